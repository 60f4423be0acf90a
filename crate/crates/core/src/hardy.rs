//! Hardy-space integral means, growth exponents, and the order functions for
//! harmonic K-quasiconformal maps with bounded Schwarzian norm.

use std::cell::RefCell;
use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HqcError, Result};
use crate::jet::HarmonicMap;
use crate::param::{DilatationParam, DiskPoint};
use crate::quad;
use crate::roots::bisect_secant;

/// Slope resolution of the growth-exponent fit.
pub const SLOPE_RESOLUTION: f64 = 0.05;
/// Tolerance for the nondecreasing check on `M_p(r)`.
pub const MONOTONE_TOL: f64 = 1e-8;
/// Quartic root and `Phi` root farther apart than this are flagged.
pub const ROOT_AGREEMENT: f64 = 1e-6;
/// Number of trailing radii used by the growth fit.
pub const FIT_RADII: usize = 4;

const MAX_PANELS: usize = 200_000;

/// Breakpoints on `[0, 2pi]` refined geometrically toward `theta = 0` (mod `2pi`).
fn angular_breakpoints(r: f64) -> Vec<f64> {
    let smallest = (1e-6f64).min((1.0 - r) / 10.0);
    let mut half = vec![0.0];
    let mut w = smallest;
    while w < PI {
        half.push(w);
        w *= 2.0;
    }
    half.push(PI);
    let mut all = half.clone();
    all.extend(half.iter().rev().skip(1).map(|t| TAU - t));
    all
}

/// `(1/2pi int_0^{2pi} |f(r e^{it})|^p dt)^{1/p}`, the integral of the p-th
/// power computed to absolute error `tol`.
pub fn integral_mean<M: HarmonicMap + ?Sized>(map: &M, p: f64, r: f64, tol: f64) -> Result<f64> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(HqcError::domain(format!("exponent p = {p} must satisfy 0 < p < inf")));
    }
    if !(r > 0.0 && r < 1.0) {
        return Err(HqcError::domain(format!("radius r = {r} must satisfy 0 < r < 1")));
    }
    if !(tol > 0.0) {
        return Err(HqcError::domain("tolerance must be positive"));
    }
    let failure: RefCell<Option<HqcError>> = RefCell::new(None);
    let integrand = |t: f64| -> f64 {
        match DiskPoint::from_polar(r, t).and_then(|z| map.eval(z)) {
            Ok(w) => w.norm().powf(p) / TAU,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };
    let result = quad::integrate_panels(integrand, &angular_breakpoints(r), tol, MAX_PANELS);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(result?.value.powf(1.0 / p))
}

/// Sampled `M_p(r)` with the fitted growth exponent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanCurve {
    pub p: f64,
    pub radii: Vec<f64>,
    pub means: Vec<f64>,
    /// Least-squares slope of `log M_p` against `-log(1 - r)` over the last four radii.
    pub fitted_exponent: f64,
    /// Root-mean-square residual of that fit.
    pub fit_residual: f64,
    pub nondecreasing: bool,
}

pub fn growth_exponent<M: HarmonicMap + ?Sized>(map: &M, p: f64, radii: &[f64], tol: f64) -> Result<MeanCurve> {
    if radii.len() < FIT_RADII {
        return Err(HqcError::domain(format!("growth fit needs at least {FIT_RADII} radii, got {}", radii.len())));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(HqcError::domain("radii must be strictly increasing"));
    }
    let means: Vec<f64> = radii.par_iter().map(|&r| integral_mean(map, p, r, tol)).collect::<Result<_>>()?;
    let tail = radii.len() - FIT_RADII;
    let xs: Vec<f64> = radii[tail..].iter().map(|r| -(1.0 - r).ln()).collect();
    let ys: Vec<f64> = means[tail..].iter().map(|m| m.ln()).collect();
    let (slope, intercept) = least_squares(&xs, &ys);
    let fit_residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (slope * x + intercept)).powi(2))
        .sum::<f64>()
        / xs.len() as f64)
        .sqrt();
    let nondecreasing = means.windows(2).all(|w| w[1] >= w[0] - MONOTONE_TOL);
    Ok(MeanCurve { p, radii: radii.to_vec(), means, fitted_exponent: slope, fit_residual, nondecreasing })
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

fn check_order_inputs(big_k: f64, lambda: f64) -> Result<()> {
    DilatationParam::from_big_k(big_k)?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(HqcError::domain(format!("lambda = {lambda} must be a finite value >= 0")));
    }
    Ok(())
}

/// Sharp `sup |a_2|` over the class with `||S_f|| <= lambda`:
/// `sqrt(1 + lambda/2 + k^2/2) + k/2` with `k = (K-1)/(K+1)`.
pub fn phi_order(big_k: f64, lambda: f64) -> Result<f64> {
    check_order_inputs(big_k, lambda)?;
    Ok(phi_unchecked(big_k, lambda))
}

fn phi_unchecked(big_k: f64, lambda: f64) -> f64 {
    let k = (big_k - 1.0) / (big_k + 1.0);
    (1.0 + lambda / 2.0 + k * k / 2.0).sqrt() + k / 2.0
}

/// `16K^4 + 24K^3 - (2l-11)K^2 - 2(2l-1)K - 2l - 5`.
pub fn threshold_quartic(big_k: f64, lambda: f64) -> f64 {
    let c2 = -(2.0 * lambda - 11.0);
    let c1 = -2.0 * (2.0 * lambda - 1.0);
    let c0 = -2.0 * lambda - 5.0;
    (((16.0 * big_k + 24.0) * big_k + c2) * big_k + c1) * big_k + c0
}

/// `phi(K, lambda) - 2K`.
pub fn phi_gap(big_k: f64, lambda: f64) -> f64 {
    phi_unchecked(big_k, lambda) - 2.0 * big_k
}

/// The threshold `K_1(lambda)` found two ways.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub lambda: f64,
    /// Root of the quartic in `(1, lambda)`.
    pub k1: f64,
    /// Root of `phi(K, lambda) = 2K` in `(1, lambda)`.
    pub phi_root: f64,
    /// `phi(K_1, lambda) - 2 K_1` at the quartic root.
    pub phi_residual: f64,
    pub consistent: bool,
}

pub fn k1_threshold(lambda: f64) -> Result<ThresholdReport> {
    if !(lambda > 6.0 && lambda.is_finite()) {
        return Err(HqcError::domain(format!("K_1 exists only for lambda > 6, got {lambda}")));
    }
    let k1 = bisect_secant(|x| threshold_quartic(x, lambda), 1.0, lambda)?;
    let phi_root = bisect_secant(|x| phi_gap(x, lambda), 1.0, lambda)?;
    Ok(ThresholdReport {
        lambda,
        k1,
        phi_root,
        phi_residual: phi_gap(k1, lambda),
        consistent: (k1 - phi_root).abs() <= ROOT_AGREEMENT,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderCase {
    /// `lambda <= 6`
    Case1,
    /// `lambda > 6`, `K >= K_1`
    Case2,
    /// `lambda > 6`, `K < K_1`
    Case3,
}

/// The Hardy-space order `p` threshold for given `K` and Schwarzian bound `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderReport {
    #[serde(rename = "K")]
    pub big_k: f64,
    pub lambda: f64,
    pub phi: f64,
    #[serde(rename = "K1")]
    pub k1: Option<f64>,
    pub case: OrderCase,
    pub order: f64,
}

pub fn hardy_order(big_k: f64, lambda: f64) -> Result<OrderReport> {
    check_order_inputs(big_k, lambda)?;
    let phi = phi_unchecked(big_k, lambda);
    let conformal = 1.0 / (2.0 * big_k);
    let (k1, case, order) = if lambda <= 6.0 {
        (None, OrderCase::Case1, conformal)
    } else {
        let k1 = k1_threshold(lambda)?.k1;
        if big_k >= k1 {
            (Some(k1), OrderCase::Case2, conformal)
        } else {
            (Some(k1), OrderCase::Case3, 1.0 / phi)
        }
    };
    Ok(OrderReport { big_k, lambda, phi, k1, case, order })
}

/// `min(1/(2K), 1/phi)` for a class whose `sup |a_2|` is `phi`.
pub fn prop1_order(phi: f64, big_k: f64) -> Result<f64> {
    if !(phi >= 1.0 && phi.is_finite()) {
        return Err(HqcError::domain(format!("phi = {phi} must be >= 1")));
    }
    DilatationParam::from_big_k(big_k)?;
    Ok((1.0 / (2.0 * big_k)).min(1.0 / phi))
}
