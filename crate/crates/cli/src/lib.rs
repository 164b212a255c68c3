//! Output records of the `gwregion` command-line tool.

pub mod record;
