//! Point evaluation and grid sweeps shared by the command-line tool and the
//! Python bindings.

use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::dsbs::{DsbsSource, Granularity, RegionLabel};
use crate::error::{GwError, Result};
use crate::gaussian::GaussianSource;
use crate::info::{binary_entropy_inv, Joint2x2, LogBase};
use crate::ot::{self, ConvClause, Mixture};

/// A source together with its natural logarithm base.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Source {
    Dsbs(DsbsSource),
    Gaussian(GaussianSource),
}

impl Source {
    pub fn units(&self) -> LogBase {
        match self {
            Source::Dsbs(_) => LogBase::Bits,
            Source::Gaussian(_) => LogBase::Nats,
        }
    }

    /// Default upper end of the sweep range for rate coordinates.
    pub fn default_extent(&self) -> f64 {
        match self {
            Source::Dsbs(_) => 1.0,
            Source::Gaussian(_) => 2.0,
        }
    }
}

/// The function being evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    /// Lower increasing envelope of the mutual information region.
    Increasing,
    /// Lower envelope under equality constraints.
    Lower,
    /// Upper envelope under equality constraints.
    Upper,
    /// Rate-distortion function; the point is read as `(d1, d2)`.
    Rd,
    /// Lower increasing envelope of the divergence region.
    PsiLower,
    /// Upper envelope of the divergence region.
    PhiUpper,
    /// `φ_q(α)` for a fixed `q < 0`; `β` is ignored.
    PhiQ { q: f64 },
    /// Lower convex envelope of the divergence region.
    ConvPhi,
    /// Lossy Gray-Wyner common rate with fixed distortions; the point is
    /// read as the private rates `(r1, r2)`.
    Lossy { d1: f64, d2: f64 },
}

impl Quantity {
    pub fn name(&self) -> &'static str {
        match self {
            Quantity::Increasing => "increasing",
            Quantity::Lower => "lower",
            Quantity::Upper => "upper",
            Quantity::Rd => "rd",
            Quantity::PsiLower => "psi-lower",
            Quantity::PhiUpper => "phi-upper",
            Quantity::PhiQ { .. } => "phi-q",
            Quantity::ConvPhi => "conv-phi",
            Quantity::Lossy { .. } => "lossy",
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Result of evaluating a quantity at one point. `value` is `None` when the
/// point lies outside the domain of the envelope (label `OUTSIDE`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub value: Option<f64>,
    pub region: String,
    pub coupling: Option<Joint2x2>,
    pub mixture: Option<Mixture>,
}

impl Evaluation {
    fn plain(value: f64, region: impl Into<String>) -> Self {
        Self {
            value: Some(value),
            region: region.into(),
            coupling: None,
            mixture: None,
        }
    }
}

fn conv_label(c: ConvClause) -> &'static str {
    match c {
        ConvClause::Interior => "Dh1",
        ConvClause::FlatAlpha => "Dh2",
        ConvClause::FlatBeta => "Dh3",
        ConvClause::SteepAlpha => "Dh4",
        ConvClause::SteepBeta => "Dh5",
    }
}

fn unsupported(q: &Quantity) -> GwError {
    GwError::Domain {
        name: "which",
        value: f64::NAN,
        constraint: match q {
            Quantity::Rd => "rd is only defined for the dsbs source",
            Quantity::Lossy { .. } => "lossy is only defined for the dsbs source in this tool",
            _ => "quantity not defined for this source",
        },
    }
}

/// Evaluates `quantity` at `(x, y)`; see [`Quantity`] for how the two
/// coordinates are read.
pub fn evaluate(source: &Source, quantity: &Quantity, x: f64, y: f64) -> Result<Evaluation> {
    match source {
        Source::Dsbs(src) => evaluate_dsbs(src, quantity, x, y),
        Source::Gaussian(src) => evaluate_gaussian(src, quantity, x, y),
    }
}

fn evaluate_dsbs(src: &DsbsSource, quantity: &Quantity, alpha: f64, beta: f64) -> Result<Evaluation> {
    let p = src.p();
    let coarse = || src.classify(alpha, beta, Granularity::Coarse);
    Ok(match *quantity {
        Quantity::Increasing => Evaluation::plain(src.upsilon_star(alpha, beta)?, coarse()?.as_str()),
        Quantity::Lower | Quantity::Upper => {
            let label = src.classify(alpha, beta, Granularity::Fine)?;
            let inside = label != RegionLabel::Outside
                && src.in_projection_region(alpha, beta, crate::dsbs::TIE_TOL);
            if !inside {
                return Ok(Evaluation {
                    value: None,
                    region: RegionLabel::Outside.as_str().into(),
                    coupling: None,
                    mixture: None,
                });
            }
            let v = if *quantity == Quantity::Lower {
                src.lower_envelope(alpha, beta)?
            } else {
                src.upper_envelope(alpha, beta)?
            };
            Evaluation::plain(v, label.as_str())
        }
        Quantity::Rd => {
            let v = src.rate_distortion(alpha, beta)?;
            Evaluation::plain(v, "rd")
        }
        Quantity::PsiLower => Evaluation::plain(ot::psi_lower_dsbs(p, alpha, beta)?, coarse()?.as_str()),
        Quantity::PhiUpper => {
            let v = ot::phi_upper(p, alpha, beta)?;
            let a = binary_entropy_inv(1.0 - alpha);
            let b = 1.0 - binary_entropy_inv(1.0 - beta);
            Evaluation {
                coupling: Some(ot::optimal_coupling(a, b, p)?),
                ..Evaluation::plain(v, coarse()?.as_str())
            }
        }
        Quantity::PhiQ { q } => Evaluation::plain(ot::phi_q_dsbs(p, q, alpha)?, "phi-q"),
        Quantity::ConvPhi => {
            let (v, mixture, clause) = ot::conv_phi_lower(p, alpha, beta)?;
            let coupling = (mixture.components.len() == 1).then(|| mixture.components[0]);
            Evaluation {
                value: Some(v),
                region: conv_label(clause).into(),
                coupling,
                mixture: Some(mixture),
            }
        }
        Quantity::Lossy { d1, d2 } => {
            let v = src.lossy_gw_rate(alpha, beta, d1, d2)?;
            Evaluation::plain(v, "lossy")
        }
    })
}

fn evaluate_gaussian(src: &GaussianSource, quantity: &Quantity, alpha: f64, beta: f64) -> Result<Evaluation> {
    let label = || src.classify(alpha, beta).map(|l| l.as_str());
    Ok(match *quantity {
        Quantity::Increasing | Quantity::Lower => Evaluation::plain(src.upsilon_star(alpha, beta)?, label()?),
        Quantity::Upper => Evaluation::plain(src.upper_envelope(alpha, beta)?, label()?),
        Quantity::PsiLower | Quantity::ConvPhi => Evaluation::plain(src.psi_lower(alpha, beta)?, label()?),
        Quantity::PhiUpper => Evaluation::plain(src.phi_upper(alpha, beta)?, label()?),
        Quantity::PhiQ { q } => Evaluation::plain(src.phi_q(q, alpha)?, "phi-q"),
        Quantity::Rd | Quantity::Lossy { .. } => return Err(unsupported(quantity)),
    })
}

/// One grid point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceRow {
    pub alpha: f64,
    pub beta: f64,
    pub value: Option<f64>,
    pub region: String,
}

/// `steps` equispaced points on `[0, hi]`, hitting both ends exactly.
pub fn linspace(hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![0.0],
        n => (0..n).map(|i| hi * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Evaluates `quantity` on a `steps × steps` grid over `[0, extent]²`, in
/// row-major order (`alpha` outer, `beta` inner).
pub fn surface(source: &Source, quantity: &Quantity, steps: usize, extent: f64) -> Result<Vec<SurfaceRow>> {
    if steps < 2 {
        return Err(GwError::Domain {
            name: "steps",
            value: steps as f64,
            constraint: "steps >= 2",
        });
    }
    if !(extent > 0.0 && extent.is_finite()) {
        return Err(GwError::Domain {
            name: "extent",
            value: extent,
            constraint: "finite extent > 0",
        });
    }
    let axis = linspace(extent, steps);
    let mut rows = Vec::with_capacity(steps * steps);
    for &alpha in &axis {
        for &beta in &axis {
            let e = evaluate(source, quantity, alpha, beta)?;
            rows.push(SurfaceRow {
                alpha,
                beta,
                value: e.value,
                region: e.region,
            });
        }
    }
    Ok(rows)
}

/// Formats `v` with 9 significant digits, `inf`/`-inf` for infinities.
pub fn format_number(v: f64) -> String {
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v.is_nan() {
        return "nan".into();
    }
    if v == 0.0 {
        return "0".into();
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        let s = if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        };
        if s == "-0" {
            "0".into()
        } else {
            s
        }
    } else {
        format!("{v:.8e}")
    }
}

/// Writes a sweep as CSV: a `# units=...` line, the header
/// `alpha,beta,value,region`, then one LF-terminated row per point.
/// Points outside the domain have an empty value field.
pub fn write_csv<W: Write>(out: &mut W, units: LogBase, rows: &[SurfaceRow]) -> io::Result<()> {
    writeln!(out, "# units={}", units.unit())?;
    writeln!(out, "alpha,beta,value,region")?;
    for r in rows {
        let value = r.value.map(format_number).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{}",
            format_number(r.alpha),
            format_number(r.beta),
            value,
            r.region
        )?;
    }
    Ok(())
}
