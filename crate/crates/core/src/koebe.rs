//! The harmonic K-quasiconformal Koebe family `f_k = h + conj(g)`, obtained by
//! shearing `z/(1-z)^2` with dilatation `omega(z) = k z`, together with its
//! exact Taylor coefficients and the harmonic Koebe function.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{HqcError, Result};
use crate::jet::{HarmonicJet, HarmonicMap};
use crate::param::{DilatationParam, DiskPoint};

/// Below this modulus the closed form is replaced by a short series.
pub const SMALL_Z: f64 = 1e-3;
const SMALL_Z_TERMS: usize = 30;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `x^n` by repeated squaring.
pub(crate) fn pow_by_squaring(mut x: f64, mut n: u64) -> f64 {
    let mut acc = 1.0;
    while n > 0 {
        if n & 1 == 1 {
            acc *= x;
        }
        x *= x;
        n >>= 1;
    }
    acc
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum(terms: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for &t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            c += (sum - s) + t;
        } else {
            c += (t - s) + sum;
        }
        sum = s;
    }
    sum + c
}

fn check_index(n: u64) -> Result<()> {
    if n == 0 {
        return Err(HqcError::domain("coefficient index n must be >= 1"));
    }
    Ok(())
}

/// Shared numerator tail `-2k(1-k)n + k(1+k)(1-k^n)` of both coefficient formulas.
fn coefficient(lead: f64, n: u64, k: f64) -> f64 {
    let nf = n as f64;
    let one_minus = 1.0 - k;
    let numerator = compensated_sum(&[
        lead * one_minus * one_minus * nf * nf,
        -2.0 * k * one_minus * nf,
        k * (1.0 + k) * (1.0 - pow_by_squaring(k, n)),
    ]);
    numerator / (one_minus * one_minus * one_minus * nf)
}

/// Coefficient of `z^n` in the analytic part `h`.
pub fn coeff_a(n: u64, p: DilatationParam) -> Result<f64> {
    check_index(n)?;
    p.ensure_nondegenerate()?;
    Ok(coefficient(1.0, n, p.k()))
}

/// Coefficient of `z^n` in the co-analytic part `g`.
pub fn coeff_b(n: u64, p: DilatationParam) -> Result<f64> {
    check_index(n)?;
    p.ensure_nondegenerate()?;
    Ok(coefficient(p.k(), n, p.k()))
}

/// Closed-form `(h(z), g(z))`, both vanishing at the origin.
fn closed_parts(k: f64, z: Complex64) -> (Complex64, Complex64) {
    let log_ratio = (ONE - z).ln() - (ONE - k * z).ln();
    let q = z / ((ONE - z) * (ONE - z));
    let cube = (k - 1.0) * (k - 1.0) * (k - 1.0);
    let h = ((k - 1.0) * (1.0 - 3.0 * k + 2.0 * k * z) * q + k * (k + 1.0) * log_ratio) / cube;
    let g = k * ((1.0 - k) * (1.0 + k - 2.0 * z) * q + (k + 1.0) * log_ratio) / cube;
    (h, g)
}

/// Partial sums of `h` and `g` through degree `terms`.
fn series_parts(p: DilatationParam, terms: usize, z: Complex64) -> (Complex64, Complex64) {
    let mut h = Complex64::new(0.0, 0.0);
    let mut g = Complex64::new(0.0, 0.0);
    let mut zn = ONE;
    for n in 1..=terms as u64 {
        zn *= z;
        h += coefficient(1.0, n, p.k()) * zn;
        if n >= 2 {
            g += coefficient(p.k(), n, p.k()) * zn;
        }
    }
    (h, g)
}

fn parts(p: DilatationParam, z: DiskPoint) -> Result<(Complex64, Complex64)> {
    p.ensure_nondegenerate()?;
    if z.modulus() < SMALL_Z {
        Ok(series_parts(p, SMALL_Z_TERMS, z.z()))
    } else {
        Ok(closed_parts(p.k(), z.z()))
    }
}

/// `f_k(z) = h(z) + conj(g(z))`.
pub fn eval_fk(p: DilatationParam, z: DiskPoint) -> Result<Complex64> {
    let (h, g) = parts(p, z)?;
    Ok(h + g.conj())
}

/// Values and first three derivatives of `h` and `g`.
///
/// The derivatives come from `h' = (1+z)/((1-z)^3 (1-kz))` and `g' = kz h'`
/// through the logarithmic derivative of `h'`.
pub fn jet_fk(p: DilatationParam, z: DiskPoint) -> Result<HarmonicJet> {
    let (h0, g0) = parts(p, z)?;
    let k = p.k();
    let w = z.z();
    let h1 = (ONE + w) / ((ONE - w) * (ONE - w) * (ONE - w) * (ONE - k * w));
    // P = h''/h' and its derivative
    let pre = ONE / (ONE + w) + 3.0 / (ONE - w) + k / (ONE - k * w);
    let pre1 = -ONE / ((ONE + w) * (ONE + w)) + 3.0 / ((ONE - w) * (ONE - w))
        + k * k / ((ONE - k * w) * (ONE - k * w));
    let h2 = h1 * pre;
    let h3 = h1 * (pre1 + pre * pre);
    let g1 = k * w * h1;
    let g2 = k * h1 + k * w * h2;
    let g3 = 2.0 * k * h2 + k * w * h3;
    Ok(HarmonicJet { z, h: [h0, h1, h2, h3], g: [g0, g1, g2, g3] })
}

/// A truncated series value with a rigorous bound on the omitted tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesSum {
    pub value: Complex64,
    pub tail_bound: f64,
}

/// Bound on `sum_{n>N} (A(n,k) + B(n,k)) r^n` using
/// `A + B <= n (1+k)/(1-k) + 2k(1+k) / ((1-k)^3 n)`.
fn tail_bound(k: f64, terms: usize, r: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    let n = terms as f64;
    let slope = (1.0 + k) / (1.0 - k);
    let offset = 2.0 * k * (1.0 + k) / ((1.0 - k).powi(3) * (n + 1.0));
    let rn1 = r.powf(n + 1.0);
    let sum_n = rn1 * ((n + 1.0) - n * r) / ((1.0 - r) * (1.0 - r));
    let sum_1 = rn1 / (1.0 - r);
    slope * sum_n + offset * sum_1
}

/// `z + sum_{n=2}^N A(n,k) z^n + sum_{n=2}^N B(n,k) conj(z)^n`.
pub fn series_partial_sum(p: DilatationParam, terms: usize, z: DiskPoint) -> Result<SeriesSum> {
    if terms == 0 {
        return Err(HqcError::domain("series truncation order must be >= 1"));
    }
    p.ensure_nondegenerate()?;
    let (h, g) = series_parts(p, terms, z.z());
    Ok(SeriesSum { value: h + g.conj(), tail_bound: tail_bound(p.k(), terms, z.modulus()) })
}

/// Coefficient arrays of a harmonic map truncated at order `order`.
/// Index `n` holds the coefficient of `z^n`; index 0 is the constant term.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesRep {
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
    pub order: usize,
}

impl SeriesRep {
    pub fn koebe_family(p: DilatationParam, order: usize) -> Result<Self> {
        if order == 0 {
            return Err(HqcError::domain("series truncation order must be >= 1"));
        }
        let mut a = vec![Complex64::new(0.0, 0.0); order + 1];
        let mut b = a.clone();
        for n in 1..=order {
            a[n] = coeff_a(n as u64, p)?.into();
            b[n] = coeff_b(n as u64, p)?.into();
        }
        Ok(Self { a, b, order })
    }

    /// Normalized in the sense `a_0 = b_0 = 0`, `a_1 = 1`, `b_1 = 0`.
    pub fn is_normalized(&self, tol: f64) -> bool {
        let zero = Complex64::new(0.0, 0.0);
        self.order >= 1
            && (self.a[0] - zero).norm() <= tol
            && (self.b[0] - zero).norm() <= tol
            && (self.a[1] - ONE).norm() <= tol
            && (self.b[1] - zero).norm() <= tol
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let horner = |c: &[Complex64]| c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &x| acc * z + x);
        horner(&self.a) + horner(&self.b).conj()
    }
}

/// The family member `f_k` as a [`HarmonicMap`].
#[derive(Debug, Clone, Copy)]
pub struct KoebeFamily {
    param: DilatationParam,
}

impl KoebeFamily {
    pub fn new(param: DilatationParam) -> Result<Self> {
        param.ensure_nondegenerate()?;
        Ok(Self { param })
    }

    pub fn param(&self) -> DilatationParam {
        self.param
    }
}

impl HarmonicMap for KoebeFamily {
    fn jet(&self, z: DiskPoint) -> Result<HarmonicJet> {
        jet_fk(self.param, z)
    }

    fn eval(&self, z: DiskPoint) -> Result<Complex64> {
        eval_fk(self.param, z)
    }
}

/// Derivatives `0..=3` of `N(z) / (1-z)^3` for a cubic numerator `N`.
pub(crate) fn cubic_over_cube(c: [f64; 4], z: Complex64) -> [Complex64; 4] {
    let n0 = c[0] + z * (c[1] + z * (c[2] + z * c[3]));
    let n1 = c[1] + z * (2.0 * c[2] + z * 3.0 * c[3]);
    let n2 = 2.0 * c[2] + z * 6.0 * c[3];
    let n3 = Complex64::new(6.0 * c[3], 0.0);
    let u = ONE / (ONE - z);
    let v0 = u * u * u;
    let v1 = 3.0 * v0 * u;
    let v2 = 4.0 * v1 * u;
    let v3 = 5.0 * v2 * u;
    [
        n0 * v0,
        n1 * v0 + n0 * v1,
        n2 * v0 + 2.0 * n1 * v1 + n0 * v2,
        n3 * v0 + 3.0 * n2 * v1 + 3.0 * n1 * v2 + n0 * v3,
    ]
}

const HARMONIC_KOEBE_H: [f64; 4] = [0.0, 1.0, -0.5, 1.0 / 6.0];
const HARMONIC_KOEBE_G: [f64; 4] = [0.0, 0.0, 0.5, 1.0 / 6.0];

/// The harmonic Koebe function, sheared from `z/(1-z)^2` with dilatation `z`.
#[derive(Debug, Clone, Copy, Default)]
pub struct HarmonicKoebe;

impl HarmonicMap for HarmonicKoebe {
    fn jet(&self, z: DiskPoint) -> Result<HarmonicJet> {
        Ok(HarmonicJet {
            z,
            h: cubic_over_cube(HARMONIC_KOEBE_H, z.z()),
            g: cubic_over_cube(HARMONIC_KOEBE_G, z.z()),
        })
    }
}

pub fn eval_harmonic_koebe(z: DiskPoint) -> Complex64 {
    let h = cubic_over_cube(HARMONIC_KOEBE_H, z.z())[0];
    let g = cubic_over_cube(HARMONIC_KOEBE_G, z.z())[0];
    h + g.conj()
}
