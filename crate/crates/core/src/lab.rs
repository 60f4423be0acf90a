//! Consistency and falsification checks on the extremal candidate `f_k`:
//! coefficient identities, Möbius behaviour of the dilatation under strongly
//! affine changes, the Schwarz-lemma variant, covering radii, and the
//! Schwarzian-norm bounds. None of these sample the whole class; they certify
//! values attained by `f_k` and its affine/Koebe orbit.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{HqcError, Result};
use crate::hardy::{hardy_order, k1_threshold, phi_order, prop1_order};
use crate::jet::{HarmonicJet, HarmonicMap};
use crate::koebe::{coeff_a, coeff_b, KoebeFamily};
use crate::param::{DilatationParam, DiskPoint};
use crate::schwarzian::{sup_norm, Functional, NormRequest};

/// Seed for every sampled check unless the caller supplies one.
pub const DEFAULT_SEED: u64 = 0x5eed_0f4b_0ebe;

/// Outcome of one check over a parameter grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub check_name: String,
    #[serde(rename = "grid")]
    pub parameter_grid: String,
    /// Signed max of `observed - bound`; at most `tolerance` means the check passed.
    pub worst_violation: f64,
    pub worst_case_params: BTreeMap<String, f64>,
    pub tolerance: f64,
    pub pass: bool,
    pub note: String,
}

impl VerificationReport {
    fn new(check_name: &str, parameter_grid: String, tolerance: f64, note: &str) -> Self {
        Self {
            check_name: check_name.to_owned(),
            parameter_grid,
            worst_violation: f64::NEG_INFINITY,
            worst_case_params: BTreeMap::new(),
            tolerance,
            pass: true,
            note: note.to_owned(),
        }
    }

    /// Record a candidate; keeps it if it is the worst seen so far.
    fn observe(&mut self, violation: f64, params: &[(&str, f64)]) {
        if violation > self.worst_violation || self.worst_case_params.is_empty() {
            self.worst_violation = violation;
            self.worst_case_params = params.iter().map(|(k, v)| ((*k).to_owned(), *v)).collect();
        }
    }

    fn finish(mut self) -> Self {
        if self.worst_violation == f64::NEG_INFINITY {
            self.worst_violation = 0.0;
        }
        self.pass = self.worst_violation <= self.tolerance;
        self
    }
}

fn sample_disk(rng: &mut ChaCha8Rng, radius: f64) -> DiskPoint {
    let r = radius * rng.gen::<f64>().sqrt();
    let t = TAU * rng.gen::<f64>();
    DiskPoint::from_polar(r, t).expect("sample radius below 1")
}

/// The strongly affine change `(f - conj(xi f)) / (1 - conj(xi) g'(0))`.
pub struct AffineTransformed<M> {
    inner: M,
    xi: Complex64,
    scale: Complex64,
}

pub fn affine_transform<M: HarmonicMap>(map: M, xi: Complex64) -> Result<AffineTransformed<M>> {
    if !(xi.norm() < 1.0) {
        return Err(HqcError::domain(format!("affine parameter |xi| = {} must be < 1", xi.norm())));
    }
    let g1 = map.jet(DiskPoint::origin())?.g[1];
    let scale = Complex64::new(1.0, 0.0) - xi.conj() * g1;
    Ok(AffineTransformed { inner: map, xi, scale })
}

impl<M: HarmonicMap> HarmonicMap for AffineTransformed<M> {
    fn jet(&self, z: DiskPoint) -> Result<HarmonicJet> {
        let j = self.inner.jet(z)?;
        let mut h = [Complex64::new(0.0, 0.0); 4];
        let mut g = h;
        for m in 0..4 {
            h[m] = (j.h[m] - self.xi.conj() * j.g[m]) / self.scale;
            g[m] = (j.g[m] - self.xi * j.h[m]) / self.scale.conj();
        }
        Ok(HarmonicJet { z, h, g })
    }
}

/// The Koebe transform `(f(phi(z)) - f(zeta)) / ((1 - |zeta|^2) h'(zeta))` with
/// `phi(z) = (z + zeta)/(1 + conj(zeta) z)`.
pub struct KoebeTransformed<M> {
    inner: M,
    zeta: Complex64,
    base: HarmonicJet,
    scale: Complex64,
}

pub fn koebe_transform<M: HarmonicMap>(map: M, zeta: DiskPoint) -> Result<KoebeTransformed<M>> {
    let base = map.jet(zeta)?;
    if base.h[1].norm() == 0.0 {
        return Err(HqcError::CriticalPoint { z: zeta.z() });
    }
    let scale = (1.0 - zeta.z().norm_sqr()) * base.h[1];
    Ok(KoebeTransformed { inner: map, zeta: zeta.z(), base, scale })
}

impl<M: HarmonicMap> HarmonicMap for KoebeTransformed<M> {
    fn jet(&self, z: DiskPoint) -> Result<HarmonicJet> {
        let one = Complex64::new(1.0, 0.0);
        let zc = self.zeta.conj();
        let den = one + zc * z.z();
        let s = 1.0 - self.zeta.norm_sqr();
        let w = DiskPoint::new((z.z() + self.zeta) / den)?;
        let d1 = s / (den * den);
        let d2 = -2.0 * zc * s / (den * den * den);
        let d3 = 6.0 * zc * zc * s / (den * den * den * den);
        let j = self.inner.jet(w)?;
        let chain = |u: &[Complex64; 4], u0: Complex64, c: Complex64| -> [Complex64; 4] {
            [
                (u[0] - u0) / c,
                u[1] * d1 / c,
                (u[2] * d1 * d1 + u[1] * d2) / c,
                (u[3] * d1 * d1 * d1 + 3.0 * u[2] * d1 * d2 + u[1] * d3) / c,
            ]
        };
        Ok(HarmonicJet {
            z,
            h: chain(&j.h, self.base.h[0], self.scale),
            g: chain(&j.g, self.base.g[0], self.scale.conj()),
        })
    }
}

/// Lemma-style check: after a strongly affine change with admissible `xi`,
/// the dilatation `G'/H'` has modulus `|(omega - xi)/(1 - conj(xi) omega)| <= k`.
///
/// Samples are drawn from the part of the disk where
/// `|xi| <= (k - |omega|)/(1 - k|omega|)` holds for `omega = k z`.
pub fn verify_dilatation_mobius(k: f64, xi: Complex64, samples: usize) -> Result<VerificationReport> {
    verify_dilatation_mobius_seeded(k, xi, samples, DEFAULT_SEED)
}

pub fn verify_dilatation_mobius_seeded(k: f64, xi: Complex64, samples: usize, seed: u64) -> Result<VerificationReport> {
    let p = DilatationParam::from_k(k)?;
    let s = xi.norm();
    let max_omega = (k - s) / (1.0 - k * s);
    if max_omega < 0.0 || (k == 0.0 && s > 0.0) {
        return Err(HqcError::domain(format!(
            "|xi| = {s} violates |xi| <= (k - |omega|)/(1 - k|omega|) for every z when k = {k}"
        )));
    }
    let radius = if k == 0.0 { 0.999 } else { (max_omega / k).min(0.999) };
    let map = affine_transform(KoebeFamily::new(p)?, xi)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = VerificationReport::new(
        "dilatation_mobius",
        format!("k={k}, xi={xi}, samples={samples}, |z|<={radius}"),
        1e-10,
        "strongly affine change of f_k; checks |omega~| <= k and the Möbius identity pointwise",
    );
    for _ in 0..samples {
        let z = sample_disk(&mut rng, radius);
        let jet = map.jet(z)?;
        let transformed = jet.g[1] / jet.h[1];
        let omega = k * z.z();
        let mobius = (omega - xi) / (1.0 - xi.conj() * omega);
        let bound_excess = transformed.norm() - k;
        let identity_error = (transformed.norm() - mobius.norm()).abs();
        report.observe(
            bound_excess.max(identity_error),
            &[("k", k), ("xi_re", xi.re), ("xi_im", xi.im), ("z_re", z.z().re), ("z_im", z.z().im)],
        );
    }
    Ok(report.finish())
}

/// `|omega(z)| <= k|z|` and `|omega'(0)| <= k` for dilatations with `omega(0) = 0`,
/// with equality for rotations `k e^{i theta} z`.
pub fn schwarz_lemma_check(k: f64, samples: usize) -> Result<VerificationReport> {
    if !(k > 0.0 && k <= 1.0) {
        return Err(HqcError::domain(format!("k = {k} must satisfy 0 < k <= 1")));
    }
    type Dil = (String, Box<dyn Fn(Complex64) -> Complex64>, Complex64, bool);
    let mut family: Vec<Dil> = Vec::new();
    for j in 0..8 {
        let rot = Complex64::from_polar(k, TAU * j as f64 / 8.0);
        family.push((format!("rotation {j}/8"), Box::new(move |z| rot * z), rot, true));
    }
    family.push(("k z^2".into(), Box::new(move |z| k * z * z), Complex64::new(0.0, 0.0), false));
    family.push(("zero".into(), Box::new(|_| Complex64::new(0.0, 0.0)), Complex64::new(0.0, 0.0), false));
    for c in [Complex64::new(0.5, 0.0), Complex64::new(0.0, -0.3), Complex64::new(-0.7, 0.6)] {
        let one = Complex64::new(1.0, 0.0);
        family.push((
            format!("k z (z + {c})/(1 + conj(c) z)"),
            Box::new(move |z| k * z * (z + c) / (one + c.conj() * z)),
            k * c,
            false,
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let points: Vec<DiskPoint> = (0..samples).map(|_| sample_disk(&mut rng, 0.999_999)).collect();
    let mut report = VerificationReport::new(
        "schwarz_lemma_variant",
        format!("k={k}, samples={samples}, {} dilatations", family.len()),
        1e-15,
        "equality family contributes | |omega| - k|z| |; others contribute |omega| - k|z| and |omega'(0)| - k",
    );
    for (idx, (_, omega, derivative_at_0, equality)) in family.iter().enumerate() {
        report.observe(derivative_at_0.norm() - k, &[("dilatation", idx as f64), ("z_re", 0.0), ("z_im", 0.0)]);
        for z in &points {
            let gap = omega(z.z()).norm() - k * z.modulus();
            let v = if *equality { gap.abs() } else { gap };
            report.observe(v, &[("dilatation", idx as f64), ("z_re", z.z().re), ("z_im", z.z().im)]);
        }
    }
    Ok(report.finish())
}

/// Minimum of `|f|` on a circle together with where it occurs.
fn circle_minimum<M: HarmonicMap + ?Sized>(map: &M, r: f64, samples: usize) -> Result<(f64, f64)> {
    let at = |t: f64| -> Result<f64> { Ok(map.eval(DiskPoint::from_polar(r, t)?)?.norm()) };
    let values: Vec<f64> = (0..samples).map(|j| at(TAU * j as f64 / samples as f64)).collect::<Result<_>>()?;
    let (best, _) = values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    // golden-section search on the two neighbouring cells
    let step = TAU / samples as f64;
    let (mut a, mut b) = ((best as f64 - 1.0) * step, (best as f64 + 1.0) * step);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (at(c)?, at(d)?);
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = at(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = at(d)?;
        }
    }
    let t = 0.5 * (a + b);
    let refined = at(t)?;
    if refined <= values[best] {
        Ok((refined, t.rem_euclid(TAU)))
    } else {
        Ok((values[best], best as f64 * step))
    }
}

/// Covering-radius estimate from `min_theta |f(r e^{i theta})|` as `r -> 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoveringEstimate {
    pub radii: Vec<f64>,
    pub minima: Vec<f64>,
    pub argmin_angles: Vec<f64>,
    pub last_value: f64,
    /// First-order Richardson extrapolation in `1 - r` from the last two radii.
    pub extrapolated: f64,
    /// `m(r)` nondecreasing within `1e-12`; false hints at a non-starlike image.
    pub monotone: bool,
    /// Every argmin lies within one angular cell of `pi`.
    pub argmin_at_pi: bool,
}

pub fn covering_radius<M: HarmonicMap + ?Sized>(map: &M, angular_samples: usize, radii: &[f64]) -> Result<CoveringEstimate> {
    if radii.len() < 2 || angular_samples < 8 {
        return Err(HqcError::domain("covering radius needs at least two radii and eight angular samples"));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) || radii.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
        return Err(HqcError::domain("radii must increase inside (0, 1)"));
    }
    let found: Vec<(f64, f64)> =
        radii.par_iter().map(|&r| circle_minimum(map, r, angular_samples)).collect::<Result<_>>()?;
    let minima: Vec<f64> = found.iter().map(|x| x.0).collect();
    let argmin_angles: Vec<f64> = found.iter().map(|x| x.1).collect();
    let n = radii.len();
    let (r0, r1) = (radii[n - 2], radii[n - 1]);
    let (m0, m1) = (minima[n - 2], minima[n - 1]);
    let extrapolated = m1 + (m1 - m0) * (1.0 - r1) / (r1 - r0);
    let cell = TAU / angular_samples as f64;
    Ok(CoveringEstimate {
        radii: radii.to_vec(),
        monotone: minima.windows(2).all(|w| w[1] >= w[0] - 1e-12),
        argmin_at_pi: argmin_angles.iter().all(|t| (t - PI).abs() <= cell),
        last_value: m1,
        extrapolated,
        minima,
        argmin_angles,
    })
}

/// Taylor coefficients recovered from point values on `|z| = radius`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CauchyCoefficients {
    pub radius: f64,
    pub nodes: usize,
    /// `a[n]` for `n = 0..=n_max`; `a[0]` carries the whole constant term.
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
    /// Per-index error bound from the noise floor of the high-frequency modes.
    pub error_bound: Vec<f64>,
}

/// Discrete Cauchy integrals on `|z| = radius` with `nodes` roots of unity:
/// positive frequencies give `a_n r^n`, negative ones `conj(b_n) r^n`.
pub fn cauchy_coefficients<M: HarmonicMap + ?Sized>(map: &M, n_max: usize, radius: f64, nodes: usize) -> Result<CauchyCoefficients> {
    if !(radius > 0.0 && radius < 1.0) || nodes < 4 * (n_max + 1) {
        return Err(HqcError::domain("need 0 < radius < 1 and at least 4 (n_max + 1) nodes"));
    }
    let mut buf: Vec<Complex64> = (0..nodes)
        .map(|j| map.eval(DiskPoint::from_polar(radius, TAU * j as f64 / nodes as f64)?))
        .collect::<Result<_>>()?;
    FftPlanner::new().plan_fft_forward(nodes).process(&mut buf);
    let scale = 1.0 / nodes as f64;
    for c in buf.iter_mut() {
        *c *= scale;
    }
    let floor = buf[nodes / 4..3 * nodes / 4].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut a = Vec::with_capacity(n_max + 1);
    let mut b = Vec::with_capacity(n_max + 1);
    let mut error_bound = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let rn = radius.powi(n as i32);
        a.push(buf[n] / rn);
        b.push(if n == 0 { Complex64::new(0.0, 0.0) } else { buf[nodes - n].conj() / rn });
        error_bound.push((floor + 4.0 * f64::EPSILON * buf[0].norm().max(buf[1].norm())) / rn);
    }
    Ok(CauchyCoefficients { radius, nodes, a, b, error_bound })
}

/// Taylor coefficients of `f_k` from the Cauchy product of the series of
/// `(1+z)`, `(1-z)^-3` and `(1-kz)^-1`, independent of the closed-form coefficients.
pub fn product_coefficients(k: f64, n_max: usize) -> (Vec<f64>, Vec<f64>) {
    let mut d = vec![0.0; n_max + 1];
    let mut acc = 0.0;
    for m in 0..=n_max {
        acc = acc * k + ((m + 1) * (m + 2)) as f64 / 2.0;
        d[m] = acc;
    }
    let mut a = vec![0.0; n_max + 1];
    let mut b = vec![0.0; n_max + 1];
    for n in 1..=n_max {
        let e = |m: usize| d[m] + if m > 0 { d[m - 1] } else { 0.0 };
        a[n] = e(n - 1) / n as f64;
        if n >= 2 {
            b[n] = k * e(n - 2) / n as f64;
        }
    }
    (a, b)
}

/// Every check of the suite, one report each, sorted by name.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjectureReport {
    pub scope: String,
    pub k_grid: Vec<f64>,
    pub lambda_grid: Vec<f64>,
    pub checks: Vec<VerificationReport>,
    pub all_pass: bool,
}

/// Coefficient indices used by the coefficient checks.
pub const COEFFICIENT_ORDER: usize = 50;
/// Indices compared against Cauchy extraction on `|z| = 1/2`.
pub const CAUCHY_ORDER: usize = 12;
/// Radii for the covering-radius estimate.
pub const COVERING_RADII: [f64; 3] = [0.99, 0.999, 0.9999];
const COVERING_SAMPLES: usize = 720;
const AFFINE_PROBES: [f64; 4] = [0.1, 0.25, 0.5, 0.75];

const SCOPE: &str = "Checks certify values attained by the candidate f_k (and its affine/Koebe orbit); \
they do not bound suprema over the whole class.";

fn grid_label(k_grid: &[f64]) -> String {
    format!("k in {k_grid:?}")
}

fn coefficient_checks(k_grid: &[f64]) -> Result<Vec<VerificationReport>> {
    let label = format!("{}, n <= {COEFFICIENT_ORDER}", grid_label(k_grid));
    let mut product = VerificationReport::new(
        "coefficients_series_product",
        label.clone(),
        1e-12,
        "relative gap between A(n,k), B(n,k) and Taylor coefficients of f_k from series products",
    );
    let mut difference = VerificationReport::new(
        "coefficient_difference_identity",
        label,
        1e-12,
        "relative gap |A(n,k) - B(n,k) - n| / n: equality case of ||a_n| - |b_n|| <= n at f_k",
    );
    let mut cauchy = VerificationReport::new(
        "coefficients_cauchy",
        format!("{}, n <= {CAUCHY_ORDER}, |z| = 1/2, 4096 nodes", grid_label(k_grid)),
        1e-9,
        "gap between A(n,k), B(n,k) and coefficients extracted from point values of f_k",
    );
    for &k in k_grid {
        let p = DilatationParam::from_k(k)?;
        let (pa, pb) = product_coefficients(k, COEFFICIENT_ORDER);
        for n in 1..=COEFFICIENT_ORDER {
            let a = coeff_a(n as u64, p)?;
            let b = coeff_b(n as u64, p)?;
            let rel = ((a - pa[n]).abs()).max((b - pb[n]).abs()) / a.abs();
            product.observe(rel, &[("k", k), ("n", n as f64)]);
            let d = ((a - b) - n as f64).abs() / n as f64;
            difference.observe(d, &[("k", k), ("n", n as f64)]);
        }
        let extracted = cauchy_coefficients(&KoebeFamily::new(p)?, CAUCHY_ORDER, 0.5, 4096)?;
        for n in 1..=CAUCHY_ORDER {
            let a = coeff_a(n as u64, p)?;
            let b = coeff_b(n as u64, p)?;
            let gap = (extracted.a[n] - a).norm().max((extracted.b[n] - b).norm());
            cauchy.observe(gap, &[("k", k), ("n", n as f64), ("error_bound", extracted.error_bound[n])]);
        }
    }
    Ok(vec![product.finish(), difference.finish(), cauchy.finish()])
}

fn second_coefficient_checks(k_grid: &[f64]) -> Result<Vec<VerificationReport>> {
    let mut a2 = VerificationReport::new(
        "a2_extremal_value",
        grid_label(k_grid),
        1e-12,
        "|A(2,k) - (5K+3)/(2K+2)|: f_k attains the conjectured sup |a_2|",
    );
    let mut b2 = VerificationReport::new(
        "b2_sharp_value",
        grid_label(k_grid),
        1e-12,
        "|B(2,k) - (K-1)/(2(K+1))|: f_k attains the sharp |b_2| bound",
    );
    for &k in k_grid {
        let p = DilatationParam::from_k(k)?;
        let kk = p.big_k();
        a2.observe((coeff_a(2, p)? - (5.0 * kk + 3.0) / (2.0 * kk + 2.0)).abs(), &[("k", k), ("K", kk)]);
        b2.observe((coeff_b(2, p)? - (kk - 1.0) / (2.0 * (kk + 1.0))).abs(), &[("k", k), ("K", kk)]);
    }
    Ok(vec![a2.finish(), b2.finish()])
}

fn affine_orbit_check(k_grid: &[f64]) -> Result<VerificationReport> {
    let mut report = VerificationReport::new(
        "affine_orbit_a2",
        format!("{}, xi in -{AFFINE_PROBES:?}", grid_label(k_grid)),
        1e-9,
        "|a_2| of the affine change of f_k (Cauchy extraction) minus (3K'+1)/(K'+1), \
         K' the distortion of the transformed map; only this orbit is probed",
    );
    for &k in k_grid {
        let p = DilatationParam::from_k(k)?;
        for &s in &AFFINE_PROBES {
            let xi = Complex64::new(-s, 0.0);
            let map = affine_transform(KoebeFamily::new(p)?, xi)?;
            let a2 = cauchy_coefficients(&map, 2, 0.5, 4096)?.a[2].norm();
            let k_new = (k + s) / (1.0 + k * s);
            let kk_new = (1.0 + k_new) / (1.0 - k_new);
            let bound = (3.0 * kk_new + 1.0) / (kk_new + 1.0);
            report.observe(a2 - bound, &[("k", k), ("xi", -s), ("a2", a2), ("bound", bound)]);
        }
    }
    Ok(report.finish())
}

fn koebe_transform_check(k_grid: &[f64]) -> Result<VerificationReport> {
    let mut report = VerificationReport::new(
        "koebe_transform_invariance",
        format!("{}, 16 centres, 64 points each", grid_label(k_grid)),
        1e-10,
        "max of |omega~| - k and the normalization error |H(0)| + |H'(0) - 1| after Koebe transforms of f_k",
    );
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED ^ 0x4b);
    for &k in k_grid {
        let p = DilatationParam::from_k(k)?;
        for _ in 0..16 {
            let zeta = sample_disk(&mut rng, 0.9);
            let map = koebe_transform(KoebeFamily::new(p)?, zeta)?;
            let at0 = map.jet(DiskPoint::origin())?;
            let normalization = at0.h[0].norm() + (at0.h[1] - 1.0).norm();
            report.observe(normalization, &[("k", k), ("zeta_re", zeta.z().re), ("zeta_im", zeta.z().im)]);
            for _ in 0..64 {
                let z = sample_disk(&mut rng, 0.95);
                let jet = map.jet(z)?;
                let excess = (jet.g[1] / jet.h[1]).norm() - k;
                report.observe(
                    excess,
                    &[("k", k), ("zeta_re", zeta.z().re), ("zeta_im", zeta.z().im), ("z_re", z.z().re), ("z_im", z.z().im)],
                );
            }
        }
    }
    Ok(report.finish())
}

fn covering_check(k_grid: &[f64]) -> Result<VerificationReport> {
    let mut report = VerificationReport::new(
        "covering_radius_lower_bound",
        format!("{}, radii {COVERING_RADII:?}", grid_label(k_grid)),
        1e-3,
        "(K+1)/(6K+2) minus the extrapolated covering radius of f_k; 'gap' records how far f_k is above the bound",
    );
    for &k in k_grid {
        let p = DilatationParam::from_k(k)?;
        let est = covering_radius(&KoebeFamily::new(p)?, COVERING_SAMPLES, &COVERING_RADII)?;
        let kk = p.big_k();
        let bound = (kk + 1.0) / (6.0 * kk + 2.0);
        report.observe(
            bound - est.extrapolated,
            &[
                ("k", k),
                ("radius", est.extrapolated),
                ("bound", bound),
                ("gap", est.extrapolated - bound),
                ("argmin_at_pi", est.argmin_at_pi as u8 as f64),
                ("monotone", est.monotone as u8 as f64),
            ],
        );
    }
    Ok(report.finish())
}

fn schwarzian_checks(k_grid: &[f64]) -> Result<Vec<VerificationReport>> {
    let norms: Vec<(f64, f64)> = k_grid
        .par_iter()
        .map(|&k| {
            let p = DilatationParam::from_k(k)?;
            let est = sup_norm(&KoebeFamily::new(p)?, &NormRequest::new(Functional::Schwarzian))?;
            Ok((k, est.value))
        })
        .collect::<Result<_>>()?;
    let mut flat = VerificationReport::new(
        "schwarzian_norm_19_over_2",
        format!("{}, grid 256x512, margin 1e-3", grid_label(k_grid)),
        1e-3,
        "||S_{f_k}|| - 19/2",
    );
    let mut k_form = VerificationReport::new(
        "schwarzian_norm_k_bound",
        format!("{}, grid 256x512, margin 1e-3", grid_label(k_grid)),
        1e-3,
        "||S_{f_k}|| - (19K^2+26K+3)/(2(K+1)^2); f_k lies in the class, so a positive value falsifies the bound",
    );
    for (k, norm) in norms {
        let kk = (1.0 + k) / (1.0 - k);
        let bound = (19.0 * kk * kk + 26.0 * kk + 3.0) / (2.0 * (kk + 1.0) * (kk + 1.0));
        flat.observe(norm - 9.5, &[("k", k), ("norm", norm)]);
        k_form.observe(norm - bound, &[("k", k), ("K", kk), ("norm", norm), ("bound", bound)]);
    }
    Ok(vec![flat.finish(), k_form.finish()])
}

fn order_checks(k_grid: &[f64], lambda_grid: &[f64]) -> Result<Vec<VerificationReport>> {
    let label = format!("{}, lambda in {lambda_grid:?}", grid_label(k_grid));
    let mut logic = VerificationReport::new(
        "order_case_logic",
        label.clone(),
        1e-12,
        "|three-case order - min(1/(2K), 1/phi(K,lambda))|",
    );
    let mut agreement = VerificationReport::new(
        "order_threshold_agreement",
        label,
        1e-6,
        "for lambda > 6: |quartic root - root of phi(K,lambda) = 2K|, and |1/phi(K_1) - 1/(2K_1)|",
    );
    for &lambda in lambda_grid {
        for &k in k_grid {
            let kk = DilatationParam::from_k(k)?.big_k();
            let report = hardy_order(kk, lambda)?;
            let expected = prop1_order(phi_order(kk, lambda)?, kk)?;
            logic.observe((report.order - expected).abs(), &[("k", k), ("lambda", lambda)]);
        }
        if lambda > 6.0 {
            let t = k1_threshold(lambda)?;
            let continuity = (1.0 / phi_order(t.k1, lambda)? - 1.0 / (2.0 * t.k1)).abs();
            agreement.observe(
                (t.k1 - t.phi_root).abs().max(continuity),
                &[("lambda", lambda), ("K1", t.k1), ("phi_root", t.phi_root)],
            );
        }
    }
    Ok(vec![logic.finish(), agreement.finish()])
}

/// The full suite over `k_grid` and `lambda_grid`.
pub fn conjecture_report(k_grid: &[f64], lambda_grid: &[f64]) -> Result<ConjectureReport> {
    if k_grid.is_empty() || lambda_grid.is_empty() {
        return Err(HqcError::domain("conjecture report needs nonempty k and lambda grids"));
    }
    for &k in k_grid {
        DilatationParam::from_k(k)?.ensure_nondegenerate()?;
    }
    if let Some(l) = lambda_grid.iter().find(|l| !(**l >= 0.0 && l.is_finite())) {
        return Err(HqcError::domain(format!("lambda = {l} must be finite and >= 0")));
    }
    type Job<'a> = Box<dyn Fn() -> Result<Vec<VerificationReport>> + Sync + 'a>;
    let jobs: Vec<Job> = vec![
        Box::new(|| coefficient_checks(k_grid)),
        Box::new(|| second_coefficient_checks(k_grid)),
        Box::new(|| affine_orbit_check(k_grid).map(|r| vec![r])),
        Box::new(|| koebe_transform_check(k_grid).map(|r| vec![r])),
        Box::new(|| covering_check(k_grid).map(|r| vec![r])),
        Box::new(|| schwarzian_checks(k_grid)),
        Box::new(|| order_checks(k_grid, lambda_grid)),
        Box::new(|| {
            let mut out = Vec::new();
            for &k in k_grid {
                let s = 0.5 * k;
                out.push(verify_dilatation_mobius(k, Complex64::new(s, 0.0), 1000)?);
            }
            Ok(vec![merge("dilatation_mobius", out, grid_label(k_grid))])
        }),
        Box::new(|| {
            let k_max = k_grid.iter().cloned().fold(0.0, f64::max);
            schwarz_lemma_check(if k_max > 0.0 { k_max } else { 0.5 }, 1000).map(|r| vec![r])
        }),
    ];
    let results: Vec<Vec<VerificationReport>> = jobs.par_iter().map(|job| job()).collect::<Result<_>>()?;
    let mut checks: Vec<VerificationReport> = results.into_iter().flatten().collect();
    checks.sort_by(|a, b| a.check_name.cmp(&b.check_name));
    let all_pass = checks.iter().all(|c| c.pass);
    Ok(ConjectureReport {
        scope: SCOPE.to_owned(),
        k_grid: k_grid.to_vec(),
        lambda_grid: lambda_grid.to_vec(),
        checks,
        all_pass,
    })
}

fn merge(name: &str, parts: Vec<VerificationReport>, grid: String) -> VerificationReport {
    let mut merged = VerificationReport::new(name, grid, parts[0].tolerance, &parts[0].note);
    for part in parts {
        let params: Vec<(&str, f64)> = part.worst_case_params.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        merged.observe(part.worst_violation, &params);
    }
    merged.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::Identity;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn dp(re: f64, im: f64) -> DiskPoint {
        DiskPoint::new(c(re, im)).unwrap()
    }

    fn fk(k: f64) -> KoebeFamily {
        KoebeFamily::new(DilatationParam::from_k(k).unwrap()).unwrap()
    }

    #[test]
    fn affine_with_zero_is_identity() {
        let base = fk(0.4);
        let t = affine_transform(fk(0.4), c(0.0, 0.0)).unwrap();
        for z in [dp(0.3, 0.2), dp(-0.5, -0.5)] {
            assert!((t.eval(z).unwrap() - base.eval(z).unwrap()).norm() < 1e-15);
        }
        assert!(affine_transform(fk(0.4), c(1.0, 0.0)).err().unwrap().is_domain());
    }

    #[test]
    fn affine_dilatation_is_mobius() {
        let k = 0.5;
        let xi = c(0.05, 0.0);
        let t = affine_transform(fk(k), xi).unwrap();
        let z = dp(0.3, -0.4);
        let j = t.jet(z).unwrap();
        let w = k * z.z();
        let expected = (w - xi) / (1.0 - xi.conj() * w);
        assert!((j.g[1] / j.h[1] - expected).norm() < 1e-14);
        // value is (f - conj(xi f))
        let f = fk(k).eval(z).unwrap();
        assert!((t.eval(z).unwrap() - (f - (xi * f).conj())).norm() < 1e-13);
    }

    #[test]
    fn affine_twice_re_mobiuses() {
        let k = 0.4;
        let xi = c(0.1, 0.05);
        let once = affine_transform(fk(k), xi).unwrap();
        let twice = affine_transform(once, -xi).unwrap();
        let z = dp(0.2, 0.5);
        let j = twice.jet(z).unwrap();
        let w = k * z.z();
        let first = (w - xi) / (1.0 - xi.conj() * w);
        let second = (first + xi) / (1.0 + xi.conj() * first);
        assert!(((j.g[1] / j.h[1]).norm() - second.norm()).abs() < 1e-14);
        assert!((j.g[1] / j.h[1]).norm() <= (k + 2.0 * xi.norm()) / (1.0 - 2.0 * k * xi.norm()));
    }

    #[test]
    fn koebe_transform_at_origin_is_identity() {
        let base = fk(0.3);
        let t = koebe_transform(fk(0.3), DiskPoint::origin()).unwrap();
        for z in [dp(0.1, 0.7), dp(-0.6, 0.2)] {
            assert!((t.eval(z).unwrap() - base.eval(z).unwrap()).norm() < 1e-13);
        }
    }

    #[test]
    fn koebe_transform_of_koebe_stays_in_class() {
        let t = koebe_transform(fk(0.0), dp(0.5, 0.0)).unwrap();
        let at0 = t.jet(DiskPoint::origin()).unwrap();
        assert!(at0.h[0].norm() < 1e-15);
        assert!((at0.h[1] - 1.0).norm() < 1e-14);
        let coeffs = cauchy_coefficients(&t, 4, 0.5, 4096).unwrap();
        assert!(coeffs.a[2].norm() <= 2.0 + 1e-9);
        assert!((coeffs.a[2] - at0.h[2] / 2.0).norm() < 1e-9);
    }

    #[test]
    fn koebe_transform_keeps_dilatation_bound() {
        let k = 0.6;
        for zeta in [dp(0.7, 0.1), dp(-0.2, -0.85), dp(0.0, 0.5)] {
            let t = koebe_transform(fk(k), zeta).unwrap();
            for z in [dp(0.0, 0.0), dp(0.9, 0.0), dp(-0.3, 0.8), dp(0.1, -0.95)] {
                let j = t.jet(z).unwrap();
                assert!((j.g[1] / j.h[1]).norm() <= k + 1e-12);
            }
        }
    }

    #[test]
    fn koebe_transform_critical_point() {
        let flat = crate::jet::AnalyticFn(|_| [c(0.0, 0.0); 4]);
        assert!(matches!(koebe_transform(flat, dp(0.1, 0.0)), Err(HqcError::CriticalPoint { .. })));
    }

    #[test]
    fn mobius_checks() {
        let r = verify_dilatation_mobius(0.0, c(0.0, 0.0), 200).unwrap();
        assert!(r.pass && r.worst_violation <= 0.0);
        let r = verify_dilatation_mobius(0.5, c(0.1, 0.0), 1000).unwrap();
        assert!(r.worst_violation <= 1e-10, "{}", r.worst_violation);
        assert!(verify_dilatation_mobius(0.5, c(0.9, 0.0), 10).unwrap_err().is_domain());
    }

    #[test]
    fn schwarz_lemma() {
        let r = schwarz_lemma_check(0.7, 500).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.worst_violation <= 1e-15);
        assert!(schwarz_lemma_check(0.0, 10).is_err());
        assert!(schwarz_lemma_check(1.0, 10).unwrap().pass);
    }

    #[test]
    fn covering_radius_of_koebe_and_identity() {
        let est = covering_radius(&fk(0.0), 360, &[0.99, 0.999, 0.9999]).unwrap();
        assert!((est.extrapolated - 0.25).abs() < 1e-4);
        assert!(est.argmin_at_pi && est.monotone);
        let id = covering_radius(&Identity, 64, &[0.9, 0.99, 0.999]).unwrap();
        assert!((id.extrapolated - 1.0).abs() < 1e-9);
        assert!(covering_radius(&Identity, 64, &[0.9]).is_err());
        assert!(covering_radius(&Identity, 64, &[0.9, 0.8]).is_err());
    }

    #[test]
    fn cauchy_recovers_family_coefficients() {
        let p = DilatationParam::from_k(0.35).unwrap();
        let got = cauchy_coefficients(&fk(0.35), 10, 0.5, 4096).unwrap();
        for n in 1..=10 {
            assert!((got.a[n] - coeff_a(n as u64, p).unwrap()).norm() <= got.error_bound[n].max(1e-12));
            assert!((got.b[n] - coeff_b(n as u64, p).unwrap()).norm() <= got.error_bound[n].max(1e-12));
        }
        assert!(got.a[0].norm() < 1e-15);
    }

    #[test]
    fn product_coefficients_of_koebe() {
        let (a, b) = product_coefficients(0.0, 6);
        assert_eq!(a, vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert!(b.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn empty_grid_rejected() {
        assert!(conjecture_report(&[], &[6.0]).unwrap_err().is_domain());
        assert!(conjecture_report(&[0.2], &[]).is_err());
        assert!(conjecture_report(&[1.2], &[6.0]).is_err());
    }
}
