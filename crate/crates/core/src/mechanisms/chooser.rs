use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PureMechanism {
    Wishart,
    Laplace,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChooserVerdict {
    pub choice: PureMechanism,
    /// `max ‖Δ‖₁,₁ / max ‖Δ‖*`.
    pub ratio: f64,
    /// `√d · ln d`.
    pub threshold: f64,
    /// True when base-2 or base-10 logarithms in the threshold would flip the
    /// decision.
    pub log_base_sensitive: bool,
}

fn pick(ratio: f64, threshold: f64) -> PureMechanism {
    // ties go to Laplace
    if ratio > threshold {
        PureMechanism::Wishart
    } else {
        PureMechanism::Laplace
    }
}

/// Wishart noise wins when the ℓ₁,₁ sensitivity exceeds the nuclear-norm
/// sensitivity by more than `√d · ln d`; otherwise Laplace.
pub fn choose_mechanism(max_l11: f64, max_nuclear: f64, d: usize) -> Result<ChooserVerdict> {
    if !(max_l11 > 0.0 && max_l11.is_finite()) {
        return Err(Error::param(
            "max_l11",
            format!("must be positive, got {max_l11}"),
        ));
    }
    if !(max_nuclear > 0.0 && max_nuclear.is_finite()) {
        return Err(Error::param(
            "max_nuclear",
            format!("must be positive, got {max_nuclear}"),
        ));
    }
    if d == 0 {
        return Err(Error::InvalidDimension("d must be at least 1".into()));
    }
    let ratio = max_l11 / max_nuclear;
    let df = d as f64;
    let threshold = df.sqrt() * df.ln();
    let choice = pick(ratio, threshold);
    let log_base_sensitive = [df.log2(), df.log10()]
        .iter()
        .any(|l| pick(ratio, df.sqrt() * l) != choice);
    Ok(ChooserVerdict {
        choice,
        ratio,
        threshold,
        log_base_sensitive,
    })
}
