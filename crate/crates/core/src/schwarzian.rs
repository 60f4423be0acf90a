//! Pre-Schwarzian and Schwarzian derivatives of analytic and harmonic maps,
//! and their hyperbolically weighted sup-norms over the disk.

use std::cmp::Ordering;
use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HqcError, Result};
use crate::jet::{HarmonicJet, HarmonicMap};
use crate::param::DiskPoint;

/// Margins reported by [`sup_norm_trend`], outermost first.
pub const TREND_MARGINS: [f64; 3] = [1e-2, 3e-3, 1e-3];

/// `(P, S)` of the analytic part; the jet must have `g` identically zero.
pub fn schwarzian_analytic(jet: &HarmonicJet) -> Result<(Complex64, Complex64)> {
    if jet.g.iter().any(|c| c.norm() != 0.0) {
        return Err(HqcError::domain("schwarzian_analytic expects a jet with g = 0"));
    }
    analytic_parts(jet)
}

fn analytic_parts(jet: &HarmonicJet) -> Result<(Complex64, Complex64)> {
    let [_, h1, h2, h3] = jet.h;
    if h1.norm() == 0.0 {
        return Err(HqcError::CriticalPoint { z: jet.z.z() });
    }
    let pre = h2 / h1;
    Ok((pre, h3 / h1 - 1.5 * pre * pre))
}

/// `(P_f, S_f)` with `P_f = (log J_f)_z` and `S_f = (log J_f)_zz - (P_f)^2 / 2`,
/// expressed through `h` and the dilatation `omega = g'/h'`.
pub fn schwarzian_harmonic(jet: &HarmonicJet) -> Result<(Complex64, Complex64)> {
    let (p_h, s_h) = analytic_parts(jet)?;
    let [w, w1, w2] = jet.dilatation_derivatives()?;
    let modulus = w.norm();
    if modulus >= 1.0 {
        return Err(HqcError::NotSensePreserving { z: jet.z.z(), modulus });
    }
    let factor = w.conj() / (1.0 - w.norm_sqr());
    let correction = w1 * factor;
    let pre = p_h - correction;
    let schw = s_h + factor * (p_h * w1 - w2) - 1.5 * correction * correction;
    Ok((pre, schw))
}

/// Which weighted functional to maximize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Functional {
    /// `|P_f(z)| (1 - |z|^2)`
    #[serde(rename = "P")]
    PreSchwarzian,
    /// `|S_f(z)| (1 - |z|^2)^2`
    #[serde(rename = "S")]
    Schwarzian,
}

impl Functional {
    /// Weighted modulus at `z`.
    pub fn weighted<M: HarmonicMap + ?Sized>(&self, map: &M, z: DiskPoint) -> Result<f64> {
        let (pre, schw) = schwarzian_harmonic(&map.jet(z)?)?;
        let w = 1.0 - z.z().norm_sqr();
        Ok(match self {
            Functional::PreSchwarzian => pre.norm() * w,
            Functional::Schwarzian => schw.norm() * w * w,
        })
    }
}

/// Grid and refinement settings for [`sup_norm`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormRequest {
    pub functional: Functional,
    pub grid_radial: usize,
    pub grid_angular: usize,
    pub boundary_margin: f64,
    pub refinement_tol: f64,
    pub candidates: usize,
}

impl NormRequest {
    pub fn new(functional: Functional) -> Self {
        Self {
            functional,
            grid_radial: 256,
            grid_angular: 512,
            boundary_margin: 1e-3,
            refinement_tol: 1e-6,
            candidates: 8,
        }
    }

    pub fn with_grid(mut self, radial: usize, angular: usize) -> Self {
        self.grid_radial = radial;
        self.grid_angular = angular;
        self
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.boundary_margin = margin;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.grid_radial < 16 || self.grid_angular < 16 {
            return Err(HqcError::domain("grid sizes must be at least 16"));
        }
        if !(1e-4..=0.2).contains(&self.boundary_margin) {
            return Err(HqcError::domain(format!(
                "boundary margin {} must lie in [1e-4, 0.2]",
                self.boundary_margin
            )));
        }
        if !(self.refinement_tol > 0.0) || self.candidates == 0 {
            return Err(HqcError::domain("refinement needs a positive tolerance and at least one candidate"));
        }
        Ok(())
    }
}

/// A sup-norm estimate and where it was attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormEstimate {
    pub functional: Functional,
    pub value: f64,
    pub argmax_point: DiskPoint,
    /// Best value on the grid alone, before local refinement.
    pub grid_value: f64,
    pub grid_radial: usize,
    pub grid_angular: usize,
    pub boundary_margin: f64,
    pub refinement_tol: f64,
}

#[derive(Debug, Clone, Copy)]
struct Sample {
    r: f64,
    theta: f64,
    value: f64,
}

impl Sample {
    /// Larger value first; ties go to smaller `|z|`, then smaller argument.
    fn rank(&self, other: &Self) -> Ordering {
        other
            .value
            .total_cmp(&self.value)
            .then(self.r.total_cmp(&other.r))
            .then(self.theta.total_cmp(&other.theta))
    }
}

fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

fn evaluate<M: HarmonicMap + ?Sized>(map: &M, f: Functional, r: f64, theta: f64) -> Result<f64> {
    let z = DiskPoint::from_polar(r, theta)?;
    f.weighted(map, z)
}

/// Nelder–Mead maximization in polar coordinates, `r` clamped to `[0, r_max]`.
fn refine<M: HarmonicMap + ?Sized>(
    map: &M,
    f: Functional,
    start: Sample,
    step: (f64, f64),
    r_max: f64,
    tol: f64,
) -> Result<Sample> {
    let eval = |x: [f64; 2]| -> Result<Sample> {
        let r = x[0].clamp(0.0, r_max);
        let theta = normalize_angle(x[1]);
        Ok(Sample { r, theta, value: evaluate(map, f, r, theta)? })
    };
    let mut simplex = vec![
        ([start.r, start.theta], start),
        ([start.r + step.0, start.theta], eval([start.r + step.0, start.theta])?),
        ([start.r, start.theta + step.1], eval([start.r, start.theta + step.1])?),
    ];
    for _ in 0..400 {
        simplex.sort_by(|a, b| a.1.rank(&b.1));
        let (best, worst) = (simplex[0].1.value, simplex[2].1.value);
        let size = (simplex[1].0[0] - simplex[0].0[0]).abs().max((simplex[2].0[0] - simplex[0].0[0]).abs())
            + (simplex[1].0[1] - simplex[0].0[1]).abs().max((simplex[2].0[1] - simplex[0].0[1]).abs());
        if best - worst <= tol && size <= tol.sqrt() {
            break;
        }
        let centroid = [(simplex[0].0[0] + simplex[1].0[0]) / 2.0, (simplex[0].0[1] + simplex[1].0[1]) / 2.0];
        let toward = |t: f64| [centroid[0] + t * (simplex[2].0[0] - centroid[0]), centroid[1] + t * (simplex[2].0[1] - centroid[1])];
        let xr = toward(-1.0);
        let reflected = eval(xr)?;
        if reflected.value > simplex[0].1.value {
            let xe = toward(-2.0);
            let expanded = eval(xe)?;
            simplex[2] = if expanded.value > reflected.value { (xe, expanded) } else { (xr, reflected) };
        } else if reflected.value > simplex[1].1.value {
            simplex[2] = (xr, reflected);
        } else {
            let xc = toward(0.5);
            let contracted = eval(xc)?;
            if contracted.value > simplex[2].1.value {
                simplex[2] = (xc, contracted);
            } else {
                let x0 = simplex[0].0;
                for i in 1..3 {
                    let xs = [(x0[0] + simplex[i].0[0]) / 2.0, (x0[1] + simplex[i].0[1]) / 2.0];
                    simplex[i] = (xs, eval(xs)?);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.rank(&b.1));
    Ok(simplex[0].1)
}

/// Sup over `|z| <= 1 - margin` of the weighted functional: polar grid scan,
/// then local refinement from the best grid cells.
pub fn sup_norm<M: HarmonicMap + ?Sized>(map: &M, request: &NormRequest) -> Result<NormEstimate> {
    request.validate()?;
    let r_max = 1.0 - request.boundary_margin;
    let nr = request.grid_radial;
    let na = request.grid_angular;
    let f = request.functional;
    let mut samples: Vec<Sample> = (0..nr * na)
        .into_par_iter()
        .map(|idx| {
            let r = r_max * (idx / na) as f64 / (nr - 1) as f64;
            let theta = TAU * (idx % na) as f64 / na as f64;
            let value = evaluate(map, f, r, theta)
                .map_err(|e| e.at_sample(idx, Complex64::from_polar(r, theta)))?;
            Ok(Sample { r, theta, value })
        })
        .collect::<Result<_>>()?;
    samples.sort_by(Sample::rank);
    let grid_best = samples[0];
    let step = (r_max / (nr - 1) as f64, TAU / na as f64);
    let mut refined: Vec<Sample> = samples
        .iter()
        .take(request.candidates)
        .map(|&s| refine(map, f, s, step, r_max, request.refinement_tol))
        .collect::<Result<_>>()?;
    refined.push(grid_best);
    refined.sort_by(Sample::rank);
    let best = refined[0];
    Ok(NormEstimate {
        functional: f,
        value: best.value,
        argmax_point: DiskPoint::from_polar(best.r, best.theta)?,
        grid_value: grid_best.value,
        grid_radial: nr,
        grid_angular: na,
        boundary_margin: request.boundary_margin,
        refinement_tol: request.refinement_tol,
    })
}

/// One entry of a margin sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarginValue {
    pub margin: f64,
    pub value: f64,
}

/// The sup-norm at the request's margin plus the values on [`TREND_MARGINS`],
/// so stagnation toward the boundary can be inspected.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormReport {
    pub estimate: NormEstimate,
    pub trend: Vec<MarginValue>,
}

pub fn sup_norm_trend<M: HarmonicMap + ?Sized>(map: &M, request: &NormRequest) -> Result<NormReport> {
    let estimate = sup_norm(map, request)?;
    let trend = TREND_MARGINS
        .iter()
        .map(|&margin| {
            let value = if margin == request.boundary_margin {
                estimate.value
            } else {
                sup_norm(map, &request.with_margin(margin))?.value
            };
            Ok(MarginValue { margin, value })
        })
        .collect::<Result<_>>()?;
    Ok(NormReport { estimate, trend })
}
