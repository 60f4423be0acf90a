use num_complex::Complex64;
use thiserror::Error;

/// Everything that can go wrong while evaluating the family or running a check.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum HqcError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("k = {k} is within {eps:e} of 1; the closed form is degenerate there")]
    Degenerate { k: f64, eps: f64 },

    #[error("critical point at z = {z}: h'(z) vanishes")]
    CriticalPoint { z: Complex64 },

    #[error("not sense-preserving at z = {z}: |omega| = {modulus}")]
    NotSensePreserving { z: Complex64, modulus: f64 },

    #[error("dilatation bound {bound} violated at w = {w}: |omega(w)| = {modulus}")]
    DilatationBound { w: Complex64, modulus: f64, bound: f64 },

    #[error("quadrature did not converge within budget: achieved {achieved:e}, target {target:e}")]
    Integration { achieved: f64, target: f64 },

    #[error("evaluation failed at sample {index} (z = {z}): {source}")]
    Sample {
        index: usize,
        z: Complex64,
        #[source]
        source: Box<HqcError>,
    },
}

impl HqcError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        HqcError::Domain(msg.into())
    }

    pub(crate) fn at_sample(self, index: usize, z: Complex64) -> Self {
        HqcError::Sample { index, z, source: Box::new(self) }
    }

    /// True for input-validation failures (bad parameter ranges, points outside the disk).
    pub fn is_domain(&self) -> bool {
        match self {
            HqcError::Domain(_) | HqcError::Degenerate { .. } => true,
            HqcError::Sample { source, .. } => source.is_domain(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, HqcError>;
