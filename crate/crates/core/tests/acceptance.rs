//! End-to-end acceptance checks, one test per criterion (split where a
//! criterion bundles independent claims). Each prints a PASS/FAIL line to
//! unbuffered stderr so the tally shows up even when output is captured.

use std::f64::consts::TAU;
use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hqc::hardy::{growth_exponent, hardy_order, integral_mean, k1_threshold, phi_order, threshold_quartic};
use hqc::koebe::{coeff_a, coeff_b, eval_fk, jet_fk, series_partial_sum, HarmonicKoebe, KoebeFamily};
use hqc::lab::{covering_radius, schwarz_lemma_check, verify_dilatation_mobius, COVERING_RADII};
use hqc::render::{render_disk_image, GridSpec};
use hqc::schwarzian::{schwarzian_harmonic, sup_norm, Functional, NormRequest};
use hqc::shearing::{default_tol, shear_residual};
use hqc::{param_convert, DilatationParam, Direction, DiskPoint, HarmonicMap};

fn verdict(id: &str, pass: bool, detail: String) {
    let line = format!("criterion {id}: {} {detail}", if pass { "PASS" } else { "FAIL" });
    let _ = writeln!(std::io::stderr().lock(), "{line}");
    assert!(pass, "{line}");
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn param(k: f64) -> DilatationParam {
    DilatationParam::from_k(k).unwrap()
}

fn fk(k: f64) -> KoebeFamily {
    KoebeFamily::new(param(k)).unwrap()
}

fn disk_points(seed: u64, count: usize, radius: f64) -> Vec<DiskPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| DiskPoint::from_polar(radius * rng.gen::<f64>().sqrt(), TAU * rng.gen::<f64>()).unwrap())
        .collect()
}

/// Taylor coefficients of h and g from `h' = (1+z) (1-z)^-3 (1-kz)^-1`, `g' = kz h'`.
fn oracle_coefficients(k: f64, n_max: usize) -> (Vec<f64>, Vec<f64>) {
    // (1-z)^-3 has coefficients (m+1)(m+2)/2; dividing by (1-kz) is c_m = k c_{m-1} + d_m
    let mut conv = vec![0.0; n_max];
    for m in 0..n_max {
        let prev = if m > 0 { conv[m - 1] } else { 0.0 };
        conv[m] = k * prev + ((m + 1) * (m + 2)) as f64 / 2.0;
    }
    let hp: Vec<f64> = (0..n_max).map(|m| conv[m] + if m > 0 { conv[m - 1] } else { 0.0 }).collect();
    let mut a = vec![0.0; n_max + 1];
    let mut b = vec![0.0; n_max + 1];
    for n in 1..=n_max {
        a[n] = hp[n - 1] / n as f64;
        if n >= 2 {
            b[n] = k * hp[n - 2] / n as f64;
        }
    }
    (a, b)
}

fn oracle_derivatives(k: f64, z: Complex64) -> (Complex64, Complex64) {
    let one = c(1.0, 0.0);
    let h1 = (one + z) / ((one - z).powi(3) * (one - k * z));
    (h1, k * z * h1)
}

const K_TENTHS: [f64; 10] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
const K_FIFTHS: [f64; 5] = [0.0, 0.2, 0.4, 0.6, 0.8];

#[test]
fn criterion_1_coefficient_identities() {
    let mut worst_diff = 0.0f64;
    let mut worst_oracle = 0.0f64;
    let mut worst_second = 0.0f64;
    for &k in &K_TENTHS {
        let p = param(k);
        let (oa, ob) = oracle_coefficients(k, 50);
        for n in 1..=50u64 {
            let a = coeff_a(n, p).unwrap();
            let b = coeff_b(n, p).unwrap();
            worst_diff = worst_diff.max(((a - b) - n as f64).abs() / n as f64);
            let i = n as usize;
            worst_oracle = worst_oracle.max((a - oa[i]).abs() / oa[i]);
            if ob[i] > 0.0 {
                worst_oracle = worst_oracle.max((b - ob[i]).abs() / ob[i]);
            }
        }
        let big_k = param_convert(k, Direction::KToBigK).unwrap().big_k();
        let a2 = coeff_a(2, p).unwrap();
        let b2 = coeff_b(2, p).unwrap();
        for gap in [
            a2 - (k + 4.0) / 2.0,
            a2 - (5.0 * big_k + 3.0) / (2.0 * big_k + 2.0),
            b2 - k / 2.0,
            b2 - (big_k - 1.0) / (2.0 * (big_k + 1.0)),
        ] {
            worst_second = worst_second.max(gap.abs());
        }
    }
    let pass = worst_diff <= 1e-12 && worst_oracle <= 1e-12 && worst_second <= 1e-12;
    verdict(
        "1",
        pass,
        format!(
            "A-B=n rel {worst_diff:.2e}, vs product oracle rel {worst_oracle:.2e}, A(2)/B(2) forms {worst_second:.2e} (tol 1e-12)"
        ),
    );
}

#[test]
fn criterion_2_three_way_oracle() {
    let mut series_err = 0.0f64;
    let mut oracle_err = 0.0f64;
    let mut shear_err = 0.0f64;
    let inner = disk_points(21, 200, 0.5);
    let outer = disk_points(22, 100, 0.9);
    for &k in &K_FIFTHS {
        let p = param(k);
        let (oa, ob) = oracle_coefficients(k, 200);
        for &z in &inner {
            let closed = eval_fk(p, z).unwrap();
            series_err = series_err.max((closed - series_partial_sum(p, 200, z).unwrap().value).norm());
            let w = z.z();
            let mut zn = c(1.0, 0.0);
            let (mut h, mut g) = (c(0.0, 0.0), c(0.0, 0.0));
            for n in 1..=200 {
                zn *= w;
                h += oa[n] * zn;
                g += ob[n] * zn;
            }
            oracle_err = oracle_err.max((closed - (h + g.conj())).norm());
        }
        let tol = outer.iter().map(|z| default_tol(*z)).fold(f64::INFINITY, f64::min);
        shear_err = shear_err.max(shear_residual(p, &outer, tol).unwrap());
    }
    let pass = series_err <= 1e-10 && oracle_err <= 1e-10 && shear_err <= 1e-8;
    verdict(
        "2",
        pass,
        format!("closed vs series {series_err:.2e}, vs test-side series {oracle_err:.2e} (tol 1e-10); vs shearing {shear_err:.2e} (tol 1e-8)"),
    );
}

#[test]
fn criterion_3_shearing_system() {
    let mut worst_sum = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for (i, &k) in K_FIFTHS.iter().enumerate() {
        let map = fk(k);
        for z in disk_points(30 + i as u64, 200, 0.999) {
            let jet = map.jet(z).unwrap();
            let w = z.z();
            let koebe = w / (c(1.0, 0.0) - w).powi(2);
            worst_sum = worst_sum.max((jet.h[0] - jet.g[0] - koebe).norm() / koebe.norm());
            let target = k * w * jet.h[1];
            let scale = target.norm().max(f64::MIN_POSITIVE);
            if k > 0.0 {
                worst_ratio = worst_ratio.max((jet.g[1] - target).norm() / scale);
            } else {
                worst_ratio = worst_ratio.max(jet.g[1].norm());
            }
            let (h1, _) = oracle_derivatives(k, w);
            worst_ratio = worst_ratio.max((jet.h[1] - h1).norm() / h1.norm());
        }
    }
    let pass = worst_sum <= 1e-10 && worst_ratio <= 1e-10;
    verdict("3", pass, format!("h-g = z/(1-z)^2 rel {worst_sum:.2e}, g' = kz h' rel {worst_ratio:.2e} (tol 1e-10)"));
}

/// `log J_f` from the test-side derivative formulas.
fn log_jacobian(k: f64, z: Complex64) -> f64 {
    let (h1, g1) = oracle_derivatives(k, z);
    (h1.norm_sqr() - g1.norm_sqr()).ln()
}

/// `d/dz = (d/dx - i d/dy)/2` with fourth-order central differences.
fn d_dz(f: &dyn Fn(Complex64) -> Complex64, z: Complex64, h: f64) -> Complex64 {
    let stencil = |dir: Complex64| {
        (f(z - 2.0 * h * dir) - 8.0 * f(z - h * dir) + 8.0 * f(z + h * dir) - f(z + 2.0 * h * dir)) / (12.0 * h)
    };
    0.5 * (stencil(c(1.0, 0.0)) - c(0.0, 1.0) * stencil(c(0.0, 1.0)))
}

#[test]
fn criterion_4a_schwarzian_vs_finite_differences() {
    let mut worst = 0.0f64;
    for (i, &k) in K_FIFTHS.iter().enumerate() {
        for z in disk_points(40 + i as u64, 10, 0.7) {
            let w = z.z();
            let pre_fd = move |u: Complex64| d_dz(&|v| c(log_jacobian(k, v), 0.0), u, 1e-3);
            let p_fd = pre_fd(w);
            let s_fd = d_dz(&pre_fd, w, 1e-3) - 0.5 * p_fd * p_fd;
            let (p, s) = schwarzian_harmonic(&jet_fk(param(k), z).unwrap()).unwrap();
            worst = worst.max((p - p_fd).norm() / p.norm().max(1.0));
            worst = worst.max((s - s_fd).norm() / s.norm().max(1.0));
        }
    }
    verdict("4a", worst <= 1e-5, format!("jets vs finite differences of log J_f at 50 points, worst {worst:.2e} (tol 1e-5)"));
}

#[test]
fn criterion_4b_schwarzian_norms() {
    let request = NormRequest::new(Functional::Schwarzian);
    let norms: Vec<(f64, f64)> = K_FIFTHS.iter().map(|&k| (k, sup_norm(&fk(k), &request).unwrap().value)).collect();
    let koebe = norms[0].1;
    let worst = norms.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
    let pass = (koebe - 6.0).abs() <= 1e-3 && worst <= 9.5 + 1e-3;
    verdict("4b", pass, format!("||S_f0|| = {koebe:.6} (6 +/- 1e-3); norms {norms:.4?} all <= 9.5 + 1e-3"));
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (f(m) > 0.0) == (fa > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

#[test]
fn criterion_5_order_logic() {
    let classical = hardy_order(1.0, 6.0).unwrap().order;
    let mut continuity = 0.0f64;
    let mut agreement = 0.0f64;
    for lambda in [6.5, 8.0, 10.0, 20.0, 50.0] {
        let t = k1_threshold(lambda).unwrap();
        let below = hardy_order(t.k1 * (1.0 - 1e-12), lambda).unwrap();
        let above = hardy_order(t.k1 * (1.0 + 1e-12), lambda).unwrap();
        continuity = continuity.max((below.order - above.order).abs());
        // independent roots of the quartic and of phi(K) = 2K
        let q = bisect(|x| threshold_quartic(x, lambda), 1.0, lambda);
        let k = |x: f64| (x - 1.0) / (x + 1.0);
        let phi = bisect(|x| (1.0 + lambda / 2.0 + k(x) * k(x) / 2.0).sqrt() + k(x) / 2.0 - 2.0 * x, 1.0, lambda);
        agreement = agreement.max((q - phi).abs()).max((t.k1 - q).abs()).max((t.phi_root - phi).abs());
        assert!((phi_order(t.k1, lambda).unwrap() - 2.0 * t.k1).abs() < 1e-9);
    }
    let k1_10 = k1_threshold(10.0).unwrap().k1;
    let pass = (classical - 0.5).abs() <= 1e-15 && continuity <= 1e-8 && agreement <= 1e-6 && (k1_10 - 1.2535).abs() <= 1e-3;
    verdict(
        "5",
        pass,
        format!("order(1,6) = {classical}, jump at K1 {continuity:.2e} (1e-8), root agreement {agreement:.2e} (1e-6), K1(10) = {k1_10:.7}"),
    );
}

fn fit_radii() -> Vec<f64> {
    (1..=4).map(|j| 1.0 - 10f64.powi(-j)).collect()
}

#[test]
fn criterion_6a_hardy_slope_p06() {
    let curve = growth_exponent(&fk(0.0), 0.6, &fit_radii(), 1e-10).unwrap();
    let target = 1.0 / 3.0;
    verdict(
        "6a",
        (curve.fitted_exponent - target).abs() <= 0.05,
        format!("f_0, p=0.6: fitted exponent {:.4}, target {target:.4} +/- 0.05, means {:.4?}", curve.fitted_exponent, curve.means),
    );
}

#[test]
fn criterion_6b_hardy_slope_p04() {
    let curve = growth_exponent(&fk(0.0), 0.4, &fit_radii(), 1e-10).unwrap();
    verdict(
        "6b",
        curve.fitted_exponent.abs() <= 0.05,
        format!("f_0, p=0.4: fitted exponent {:.4}, target 0 +/- 0.05, means {:.4?}", curve.fitted_exponent, curve.means),
    );
}

#[test]
fn criterion_6c_hardy_parseval() {
    let mut worst = 0.0f64;
    for k in [0.0, 0.4] {
        let (a, b) = oracle_coefficients(k, 400_000);
        for r in fit_radii() {
            let mut sum = 0.0;
            let mut rn2 = 1.0;
            for n in 1..a.len() {
                rn2 *= r * r;
                sum += (a[n] * a[n] + b[n] * b[n]) * rn2;
            }
            let m = integral_mean(&fk(k), 2.0, r, 1e-11 * sum).unwrap();
            worst = worst.max((m * m - sum).abs() / sum);
            if k == 0.0 {
                let x = r * r;
                worst = worst.max((sum - x * (1.0 + x) / (1.0 - x).powi(3)).abs() / sum);
            }
        }
    }
    verdict("6c", worst <= 1e-8, format!("M_2(r)^2 vs sum (|a_n|^2 + |b_n|^2) r^2n at r = 1 - 10^-j, worst rel {worst:.2e} (tol 1e-8)"));
}

#[test]
fn criterion_7a_covering_koebe() {
    let est = covering_radius(&fk(0.0), 720, &COVERING_RADII).unwrap();
    verdict(
        "7a",
        (est.extrapolated - 0.25).abs() <= 1e-4,
        format!("f_0 covering radius {:.8} (0.25 +/- 1e-4), argmin at pi: {}", est.extrapolated, est.argmin_at_pi),
    );
}

#[test]
fn criterion_7b_covering_family() {
    let mut worst = 0.0f64;
    let mut detail = Vec::new();
    for k in [1.0 / 3.0, 0.6] {
        let est = covering_radius(&fk(k), 720, &COVERING_RADII).unwrap();
        let big_k = param_convert(k, Direction::KToBigK).unwrap().big_k();
        let candidate = (big_k + 1.0) / (6.0 * big_k + 2.0);
        // |f_k| near -1 from the closed form, independent of the angular search
        let edge = eval_fk(param(k), DiskPoint::new(c(-(1.0 - 1e-9), 0.0)).unwrap()).unwrap().norm();
        worst = worst.max((est.extrapolated - candidate).abs());
        detail.push(format!("k={k:.4}: R={:.7}, |f_k(-1)|={edge:.7}, (K+1)/(6K+2)={candidate:.7}", est.extrapolated));
    }
    verdict("7b", worst <= 1e-3, format!("{} worst gap {worst:.2e} (tol 1e-3)", detail.join("; ")));
}

#[test]
fn criterion_8_invariance_suites() {
    let mut worst_mobius = 0.0f64;
    let mut direct = 0.0f64;
    for k in [0.2, 0.5, 0.8] {
        for xi in [c(0.0, 0.0), c(0.5 * k, 0.0), c(0.0, -0.3 * k), Complex64::from_polar(0.9 * k, 2.0)] {
            let report = verify_dilatation_mobius(k, xi, 1000).unwrap();
            worst_mobius = worst_mobius.max(report.worst_violation);
            // the same identity straight from the derivative formulas
            let m = (k - xi.norm()) / (1.0 - k * xi.norm());
            for z in disk_points(80, 200, (m / k).min(0.999)) {
                let (h1, g1) = oracle_derivatives(k, z.z());
                let transformed = (g1 - xi * h1) / (h1 - xi.conj() * g1);
                let w = k * z.z();
                let mobius = (w - xi) / (1.0 - xi.conj() * w);
                direct = direct.max((transformed - mobius).norm()).max(transformed.norm() - k);
            }
        }
    }
    let schwarz = schwarz_lemma_check(0.8, 1000).unwrap();
    let pass = worst_mobius <= 1e-10 && direct <= 1e-10 && schwarz.worst_violation <= 1e-15;
    verdict(
        "8",
        pass,
        format!("Möbius identity worst {worst_mobius:.2e} (direct {direct:.2e}, tol 1e-10); Schwarz equality {:.2e} (tol 1e-15)", schwarz.worst_violation),
    );
}

#[test]
fn criterion_9_figure_panels() {
    let maps: Vec<(String, Box<dyn HarmonicMap>)> = vec![
        ("f_0".into(), Box::new(fk(0.0))),
        ("f_1/5".into(), Box::new(fk(0.2))),
        ("f_2/5".into(), Box::new(fk(0.4))),
        ("f_3/5".into(), Box::new(fk(0.6))),
        ("f_4/5".into(), Box::new(fk(0.8))),
        ("harmonic Koebe".into(), Box::new(HarmonicKoebe)),
    ];
    let mut spec = GridSpec::new(10, 24);
    spec.samples_per_curve = 512;
    let mut failures = Vec::new();
    for (name, map) in &maps {
        let rendering = render_disk_image(map, &spec, name).unwrap();
        let doc = roxmltree::Document::parse(&rendering.svg);
        let valid = doc.as_ref().map(|d| d.root_element().has_tag_name("svg")).unwrap_or(false);
        let finite = doc
            .as_ref()
            .map(|d| {
                d.descendants().filter(|n| n.has_tag_name("path")).all(|n| {
                    n.attribute("d")
                        .unwrap_or("")
                        .split(|ch: char| ch == ' ' || ch == 'M' || ch == 'L' || ch == 'Z')
                        .filter(|t| !t.is_empty())
                        .all(|t| t.parse::<f64>().map(f64::is_finite).unwrap_or(false))
                })
            })
            .unwrap_or(false);
        if !(valid && finite && rendering.nesting.pass) {
            failures.push(format!("{name}: valid={valid} finite={finite} nesting={:?}", rendering.nesting));
        }
    }
    verdict("9", failures.is_empty(), format!("six panels, 512 samples/curve; problems: {failures:?}"));
}
