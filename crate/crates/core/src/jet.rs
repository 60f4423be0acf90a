//! Third-order jets of harmonic maps `f = h + conj(g)` and the map abstraction
//! every analysis routine consumes.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{HqcError, Result};
use crate::param::DiskPoint;

/// `h, h', h'', h'''` and `g, g', g'', g'''` at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HarmonicJet {
    pub z: DiskPoint,
    pub h: [Complex64; 4],
    pub g: [Complex64; 4],
}

impl HarmonicJet {
    /// Jet of an analytic map (`g` identically zero).
    pub fn analytic(z: DiskPoint, h: [Complex64; 4]) -> Self {
        Self { z, h, g: [Complex64::new(0.0, 0.0); 4] }
    }

    /// `f(z) = h(z) + conj(g(z))`.
    pub fn value(&self) -> Complex64 {
        self.h[0] + self.g[0].conj()
    }

    /// `omega = g'/h'` and its first two derivatives.
    pub fn dilatation_derivatives(&self) -> Result<[Complex64; 3]> {
        let [_, h1, h2, h3] = self.h;
        let [_, g1, g2, g3] = self.g;
        if h1 == Complex64::new(0.0, 0.0) {
            return Err(HqcError::CriticalPoint { z: self.z.z() });
        }
        let w = g1 / h1;
        let w1 = (g2 - w * h2) / h1;
        let w2 = (g3 - 2.0 * w1 * h2 - w * h3) / h1;
        Ok([w, w1, w2])
    }
}

/// Complex dilatation `g'/h'` and Jacobian `|h'|^2 - |g'|^2`.
pub fn dilatation_and_jacobian(jet: &HarmonicJet) -> Result<(Complex64, f64)> {
    let h1 = jet.h[1];
    let g1 = jet.g[1];
    if h1 == Complex64::new(0.0, 0.0) {
        return Err(HqcError::CriticalPoint { z: jet.z.z() });
    }
    Ok((g1 / h1, h1.norm_sqr() - g1.norm_sqr()))
}

/// A harmonic map on the unit disk, evaluable together with its jet.
pub trait HarmonicMap: Sync {
    fn jet(&self, z: DiskPoint) -> Result<HarmonicJet>;

    fn eval(&self, z: DiskPoint) -> Result<Complex64> {
        Ok(self.jet(z)?.value())
    }
}

impl<M: HarmonicMap + ?Sized> HarmonicMap for &M {
    fn jet(&self, z: DiskPoint) -> Result<HarmonicJet> {
        (**self).jet(z)
    }

    fn eval(&self, z: DiskPoint) -> Result<Complex64> {
        (**self).eval(z)
    }
}

impl<M: HarmonicMap + ?Sized> HarmonicMap for Box<M> {
    fn jet(&self, z: DiskPoint) -> Result<HarmonicJet> {
        (**self).jet(z)
    }

    fn eval(&self, z: DiskPoint) -> Result<Complex64> {
        (**self).eval(z)
    }
}

/// `z -> z`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl HarmonicMap for Identity {
    fn jet(&self, z: DiskPoint) -> Result<HarmonicJet> {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Ok(HarmonicJet::analytic(z, [z.z(), one, zero, zero]))
    }
}

/// An analytic map given by a closure returning `(h, h', h'', h''')`.
pub struct AnalyticFn<F>(pub F);

impl<F> HarmonicMap for AnalyticFn<F>
where
    F: Fn(Complex64) -> [Complex64; 4] + Sync,
{
    fn jet(&self, z: DiskPoint) -> Result<HarmonicJet> {
        Ok(HarmonicJet::analytic(z, (self.0)(z.z())))
    }
}
