//! Weighted shearing: reconstruct `h` and `g` from a target derivative `phi'`
//! and a dilatation `omega` by integrating
//! `h' = phi'/(1 - omega)`, `g' = omega phi'/(1 - omega)` from the origin.

use std::cell::Cell;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{HqcError, Result};
use crate::koebe::jet_fk;
use crate::param::{DilatationParam, DiskPoint};
use crate::quad;

/// Default absolute tolerance for `|z| <= 0.9`.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Default absolute tolerance for `0.9 < |z| <= 0.97`.
pub const BOUNDARY_TOL: f64 = 1e-8;
/// Largest modulus accepted by [`shear_residual`].
pub const RESIDUAL_MAX_RADIUS: f64 = 0.95;

const MAX_PANELS: usize = 20_000;

type PointFn<'a> = Box<dyn Fn(Complex64) -> Complex64 + Sync + 'a>;

/// Inputs of the shearing system.
pub struct ShearSpec<'a> {
    target_derivative: PointFn<'a>,
    dilatation: PointFn<'a>,
    dilatation_bound: f64,
}

impl<'a> ShearSpec<'a> {
    pub fn new(
        target_derivative: impl Fn(Complex64) -> Complex64 + Sync + 'a,
        dilatation: impl Fn(Complex64) -> Complex64 + Sync + 'a,
        dilatation_bound: f64,
    ) -> Result<Self> {
        if !(0.0..1.0).contains(&dilatation_bound) {
            return Err(HqcError::domain(format!("dilatation bound {dilatation_bound} must lie in [0, 1)")));
        }
        Ok(Self {
            target_derivative: Box::new(target_derivative),
            dilatation: Box::new(dilatation),
            dilatation_bound,
        })
    }

    /// `phi' = (1+z)/(1-z)^3` (the Koebe function) with `omega = k z`.
    pub fn koebe_family(p: DilatationParam) -> Self {
        let k = p.k();
        let one = Complex64::new(1.0, 0.0);
        Self {
            target_derivative: Box::new(move |w| (one + w) / ((one - w) * (one - w) * (one - w))),
            dilatation: Box::new(move |w| k * w),
            dilatation_bound: k,
        }
    }

    pub fn dilatation_bound(&self) -> f64 {
        self.dilatation_bound
    }

    /// Integrands `(h', g')` at `w`, or the offending modulus if `|omega(w)|`
    /// exceeds the declared bound.
    fn derivatives(&self, w: Complex64) -> std::result::Result<(Complex64, Complex64), f64> {
        let omega = (self.dilatation)(w);
        let m = omega.norm();
        if m >= 1.0 || m > self.dilatation_bound * (1.0 + 1e-12) + 1e-15 {
            return Err(m);
        }
        let hp = (self.target_derivative)(w) / (1.0 - omega);
        Ok((hp, omega * hp))
    }

    fn integrate_segment(&self, from: Complex64, to: Complex64, tol: f64) -> Result<(Complex64, Complex64)> {
        let dz = to - from;
        let violation: Cell<Option<(Complex64, f64)>> = Cell::new(None);
        let record = |w: Complex64, m: f64| {
            if violation.get().is_none() {
                violation.set(Some((w, m)));
            }
        };
        let zero = Complex64::new(0.0, 0.0);
        let h = quad::integrate(
            |t: f64| {
                let w = from + t * dz;
                match self.derivatives(w) {
                    Ok((hp, _)) => hp * dz,
                    Err(m) => {
                        record(w, m);
                        zero
                    }
                }
            },
            0.0,
            1.0,
            tol,
            MAX_PANELS,
        );
        let g = quad::integrate(
            |t: f64| {
                let w = from + t * dz;
                match self.derivatives(w) {
                    Ok((_, gp)) => gp * dz,
                    Err(m) => {
                        record(w, m);
                        zero
                    }
                }
            },
            0.0,
            1.0,
            tol,
            MAX_PANELS,
        );
        if let Some((w, modulus)) = violation.get() {
            return Err(HqcError::DilatationBound { w, modulus, bound: self.dilatation_bound });
        }
        Ok((h?.value, g?.value))
    }
}

/// `(h(z), g(z))` by adaptive quadrature along the radial segment `[0, z]`.
pub fn shear_integrate(spec: &ShearSpec<'_>, z: DiskPoint, tol: f64) -> Result<(Complex64, Complex64)> {
    if !(tol > 0.0) {
        return Err(HqcError::domain("tolerance must be positive"));
    }
    spec.integrate_segment(Complex64::new(0.0, 0.0), z.z(), tol)
}

/// `(h(z), g(z))` along the polyline `0 -> vertices[0] -> ... -> z`,
/// each leg integrated to `tol`.
pub fn shear_integrate_path(
    spec: &ShearSpec<'_>,
    vertices: &[DiskPoint],
    z: DiskPoint,
    tol: f64,
) -> Result<(Complex64, Complex64)> {
    if !(tol > 0.0) {
        return Err(HqcError::domain("tolerance must be positive"));
    }
    let mut from = Complex64::new(0.0, 0.0);
    let mut acc = (from, from);
    for to in vertices.iter().map(DiskPoint::z).chain(std::iter::once(z.z())) {
        let (h, g) = spec.integrate_segment(from, to, tol)?;
        acc.0 += h;
        acc.1 += g;
        from = to;
    }
    Ok(acc)
}

/// Tolerance schedule: [`DEFAULT_TOL`] up to `|z| = 0.9`, [`BOUNDARY_TOL`] beyond.
pub fn default_tol(z: DiskPoint) -> f64 {
    if z.modulus() <= 0.9 {
        DEFAULT_TOL
    } else {
        BOUNDARY_TOL
    }
}

/// Largest deviation, over `grid`, between the shearing integration and the
/// closed form of `f_k`, taken over both `h` and `g`.
pub fn shear_residual(p: DilatationParam, grid: &[DiskPoint], tol: f64) -> Result<f64> {
    if grid.is_empty() {
        return Err(HqcError::domain("shear_residual needs a nonempty grid"));
    }
    if let Some(bad) = grid.iter().find(|z| z.modulus() > RESIDUAL_MAX_RADIUS) {
        return Err(HqcError::domain(format!(
            "grid point {} lies outside |z| <= {RESIDUAL_MAX_RADIUS}",
            bad.z()
        )));
    }
    p.ensure_nondegenerate()?;
    let spec = ShearSpec::koebe_family(p);
    let residuals: Vec<f64> = grid
        .par_iter()
        .enumerate()
        .map(|(i, &z)| {
            let (h, g) = shear_integrate(&spec, z, tol).map_err(|e| e.at_sample(i, z.z()))?;
            let jet = jet_fk(p, z)?;
            Ok((h - jet.h[0]).norm().max((g - jet.g[0]).norm()))
        })
        .collect::<Result<_>>()?;
    Ok(residuals.into_iter().fold(0.0, f64::max))
}
