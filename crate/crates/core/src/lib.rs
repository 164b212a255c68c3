//! Gray-Wyner rate regions for the doubly symmetric binary source and the
//! bivariate Gaussian source.

pub mod dsbs;
pub mod error;
pub mod gaussian;
pub mod info;
pub mod optim;
pub mod oracle;
pub mod ot;
pub mod surface;
pub mod verify;

pub use dsbs::{DsbsSource, Granularity, RegionLabel};
pub use error::{GwError, Result};
pub use gaussian::{AngleCoords, GaussianRegionLabel, GaussianSource};
pub use info::{
    binary_convolve, binary_entropy, binary_entropy_inv, kl_divergence, mutual_informations,
    AuxChannel, Joint2x2, LogBase, Pmf, RegionPoint,
};
