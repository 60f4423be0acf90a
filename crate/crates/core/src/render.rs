//! SVG pictures of the image of a polar grid on the disk.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{HqcError, Result};
use crate::jet::HarmonicMap;
use crate::param::DiskPoint;

/// Coordinates beyond this (in either axis) are clipped.
pub const CLIP: f64 = 50.0;
/// Consecutive image points farther apart than this fraction of the extent get a midpoint.
pub const UPSAMPLE_FRACTION: f64 = 0.005;
const MAX_UPSAMPLE_DEPTH: u32 = 12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSpec {
    /// Concentric circles, the outermost being `|z| = max_radius`.
    pub circles: usize,
    pub spokes: usize,
    pub max_radius: f64,
    pub samples_per_curve: usize,
    /// Half-width of the output square in pixels.
    pub viewport: f64,
}

impl GridSpec {
    pub fn new(circles: usize, spokes: usize) -> Self {
        Self { circles, spokes, max_radius: 0.98, samples_per_curve: 512, viewport: 400.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.circles < 1 || self.spokes < 2 {
            return Err(HqcError::domain("need at least one circle and two spokes"));
        }
        if !(self.max_radius > 0.0 && self.max_radius < 1.0) {
            return Err(HqcError::domain(format!("max_radius = {} must lie in (0, 1)", self.max_radius)));
        }
        if self.samples_per_curve < 64 {
            return Err(HqcError::domain("samples_per_curve must be at least 64"));
        }
        if !(self.viewport > 0.0 && self.viewport.is_finite()) {
            return Err(HqcError::domain("viewport must be positive"));
        }
        Ok(())
    }
}

/// Result of the nested-circle test on the unclipped base samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NestingCheck {
    pub pass: bool,
    /// Segment intersections between images of consecutive circles.
    pub crossings: usize,
    /// Consecutive pairs where the inner image is not wound around by the outer one.
    pub uncontained: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rendering {
    pub svg: String,
    pub nesting: NestingCheck,
    pub clipped: bool,
}

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Circle(f64),
    Spoke(f64),
}

impl Kind {
    fn point(self, t: f64) -> Complex64 {
        match self {
            Kind::Circle(r) => Complex64::from_polar(r, TAU * t),
            Kind::Spoke(theta) => Complex64::from_polar(t, theta),
        }
    }
}

struct Curve {
    kind: Kind,
    closed: bool,
    /// Parameter and image pairs.
    base: Vec<(f64, Complex64)>,
}

fn eval_at<M: HarmonicMap + ?Sized>(map: &M, kind: Kind, t: f64, index: usize) -> Result<Complex64> {
    let z = kind.point(t);
    DiskPoint::new(z).and_then(|p| map.eval(p)).map_err(|e| e.at_sample(index, z))
}

fn sample_curve<M: HarmonicMap + ?Sized>(map: &M, kind: Kind, spec: &GridSpec) -> Result<Curve> {
    let n = spec.samples_per_curve;
    let (closed, params): (bool, Vec<f64>) = match kind {
        Kind::Circle(_) => (true, (0..n).map(|j| j as f64 / n as f64).collect()),
        Kind::Spoke(_) => (false, (0..n).map(|j| spec.max_radius * j as f64 / (n - 1) as f64).collect()),
    };
    let base = params
        .iter()
        .enumerate()
        .map(|(i, &t)| eval_at(map, kind, t, i).map(|w| (t, w)))
        .collect::<Result<_>>()?;
    Ok(Curve { kind, closed, base })
}

fn inside(w: Complex64) -> bool {
    w.re.abs() <= CLIP && w.im.abs() <= CLIP
}

/// Liang–Barsky clip of segment `a`–`b` to the square `[-CLIP, CLIP]^2`.
fn clip_segment(a: Complex64, b: Complex64) -> Option<(Complex64, Complex64)> {
    let d = b - a;
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for (p, q) in [(-d.re, a.re + CLIP), (d.re, CLIP - a.re), (-d.im, a.im + CLIP), (d.im, CLIP - a.im)] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    (t0 <= t1).then(|| (a + d * t0, a + d * t1))
}

fn refine<M: HarmonicMap + ?Sized>(
    map: &M,
    kind: Kind,
    a: (f64, Complex64),
    b: (f64, Complex64),
    threshold: f64,
    depth: u32,
    out: &mut Vec<(f64, Complex64)>,
) -> Result<()> {
    if depth < MAX_UPSAMPLE_DEPTH && (b.1 - a.1).norm() > threshold && clip_segment(a.1, b.1).is_some() {
        let t = 0.5 * (a.0 + b.0);
        let mid = (t, eval_at(map, kind, t, out.len())?);
        refine(map, kind, a, mid, threshold, depth + 1, out)?;
        out.push(mid);
        refine(map, kind, mid, b, threshold, depth + 1, out)?;
    }
    Ok(())
}

fn upsample<M: HarmonicMap + ?Sized>(map: &M, curve: &Curve, threshold: f64) -> Result<Vec<Complex64>> {
    let mut out = Vec::with_capacity(curve.base.len());
    let n = curve.base.len();
    let segments = if curve.closed { n } else { n - 1 };
    for i in 0..segments {
        let a = curve.base[i];
        let mut b = curve.base[(i + 1) % n];
        if curve.closed && i + 1 == n {
            b.0 = 1.0;
        }
        out.push(a);
        refine(map, curve.kind, a, b, threshold, 0, &mut out)?;
    }
    if !curve.closed {
        out.push(curve.base[n - 1]);
    }
    Ok(out.into_iter().map(|p| p.1).collect())
}

/// Visible runs of a polyline after clipping, and whether anything was cut.
fn clipped_runs(points: &[Complex64], closed: bool) -> (Vec<Vec<Complex64>>, bool) {
    let mut pts = points.to_vec();
    if closed {
        pts.push(points[0]);
    }
    if pts.iter().all(|w| inside(*w)) {
        return (vec![pts], false);
    }
    let mut runs: Vec<Vec<Complex64>> = Vec::new();
    let mut current: Vec<Complex64> = Vec::new();
    for w in pts.windows(2) {
        match clip_segment(w[0], w[1]) {
            Some((a, b)) => {
                if current.last().map_or(true, |last| (*last - a).norm() > 0.0) {
                    if current.len() > 1 {
                        runs.push(std::mem::take(&mut current));
                    }
                    current.clear();
                    current.push(a);
                }
                current.push(b);
            }
            None => {
                if current.len() > 1 {
                    runs.push(std::mem::take(&mut current));
                }
                current.clear();
            }
        }
    }
    if current.len() > 1 {
        runs.push(current);
    }
    (runs, true)
}

fn segments_cross(p1: Complex64, p2: Complex64, q1: Complex64, q2: Complex64) -> bool {
    let cross = |o: Complex64, a: Complex64, b: Complex64| (a - o).re * (b - o).im - (a - o).im * (b - o).re;
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// Winding number of the closed polyline `curve` around `w`.
pub fn winding_number(curve: &[Complex64], w: Complex64) -> i64 {
    let n = curve.len();
    let mut total = 0.0;
    for i in 0..n {
        let a = curve[i] - w;
        let b = curve[(i + 1) % n] - w;
        total += (b / a).arg();
    }
    (total / TAU).round() as i64
}

fn count_crossings(inner: &[Complex64], outer: &[Complex64]) -> usize {
    let seg = |c: &[Complex64], i: usize| (c[i], c[(i + 1) % c.len()]);
    let bbox = |a: Complex64, b: Complex64| (a.re.min(b.re), a.re.max(b.re), a.im.min(b.im), a.im.max(b.im));
    let outer_boxes: Vec<_> = (0..outer.len()).map(|j| bbox(seg(outer, j).0, seg(outer, j).1)).collect();
    (0..inner.len())
        .into_par_iter()
        .map(|i| {
            let (p1, p2) = seg(inner, i);
            let b = bbox(p1, p2);
            outer_boxes
                .iter()
                .enumerate()
                .filter(|(_, o)| o.0 <= b.1 && b.0 <= o.1 && o.2 <= b.3 && b.2 <= o.3)
                .filter(|(j, _)| {
                    let (q1, q2) = seg(outer, *j);
                    segments_cross(p1, p2, q1, q2)
                })
                .count()
        })
        .sum()
}

/// Images of consecutive circles must not cross, and each must be wound around by the next.
pub fn nesting_check(circle_images: &[Vec<Complex64>]) -> NestingCheck {
    let mut crossings = 0;
    let mut uncontained = 0;
    for pair in circle_images.windows(2) {
        crossings += count_crossings(&pair[0], &pair[1]);
        if winding_number(&pair[1], pair[0][0]) == 0 {
            uncontained += 1;
        }
    }
    NestingCheck { pass: crossings == 0 && uncontained == 0, crossings, uncontained }
}

fn fmt_coord(x: f64) -> String {
    let s = format!("{x:.4}");
    if s == "-0.0000" {
        "0.0000".to_owned()
    } else {
        s
    }
}

fn path_data(runs: &[Vec<Complex64>], closed_whole: bool) -> String {
    let mut d = String::new();
    for run in runs {
        for (i, w) in run.iter().enumerate() {
            let cmd = if i == 0 { 'M' } else { 'L' };
            let _ = write!(d, "{cmd}{} {} ", fmt_coord(w.re), fmt_coord(-w.im));
        }
    }
    if closed_whole {
        d.push('Z');
    }
    d.trim_end().to_owned()
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Render the images of `circles` concentric circles (the last being the
/// emphasized boundary `|z| = max_radius`) and `spokes` radii under `map`.
pub fn render_disk_image<M: HarmonicMap + ?Sized>(map: &M, spec: &GridSpec, title: &str) -> Result<Rendering> {
    spec.validate()?;
    let mut kinds: Vec<Kind> =
        (1..=spec.circles).map(|i| Kind::Circle(spec.max_radius * i as f64 / spec.circles as f64)).collect();
    kinds.extend((0..spec.spokes).map(|j| Kind::Spoke(TAU * j as f64 / spec.spokes as f64)));
    let curves: Vec<Curve> = kinds.par_iter().map(|&k| sample_curve(map, k, spec)).collect::<Result<_>>()?;

    let circle_images: Vec<Vec<Complex64>> =
        curves[..spec.circles].iter().map(|c| c.base.iter().map(|p| p.1).collect()).collect();
    let nesting = nesting_check(&circle_images);

    let clamp = |w: Complex64| Complex64::new(w.re.clamp(-CLIP, CLIP), w.im.clamp(-CLIP, CLIP));
    let extent_of = |pts: &mut dyn Iterator<Item = Complex64>| {
        pts.fold((f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY), |b, w| {
            (b.0.min(w.re), b.1.max(w.re), b.2.min(w.im), b.3.max(w.im))
        })
    };
    let base_box = extent_of(&mut curves.iter().flat_map(|c| c.base.iter().map(|p| clamp(p.1))));
    let threshold = UPSAMPLE_FRACTION * (base_box.1 - base_box.0).max(base_box.3 - base_box.2).max(1e-12);
    let dense: Vec<Vec<Complex64>> = curves.par_iter().map(|c| upsample(map, c, threshold)).collect::<Result<_>>()?;

    let mut clipped = false;
    let mut paths = Vec::with_capacity(dense.len());
    for (curve, pts) in curves.iter().zip(&dense) {
        let (runs, cut) = clipped_runs(pts, curve.closed);
        clipped |= cut;
        paths.push((curve.kind, path_data(&runs, curve.closed && !cut), runs));
    }
    let bbox = extent_of(&mut paths.iter().flat_map(|p| p.2.iter().flatten().copied()));
    let width = (bbox.1 - bbox.0).max(bbox.3 - bbox.2).max(1e-9);
    let pad = 0.05 * width;
    let side = width + 2.0 * pad;
    let (cx, cy) = (0.5 * (bbox.0 + bbox.1), -0.5 * (bbox.2 + bbox.3));
    let stroke = side / 800.0;
    let px = 2.0 * spec.viewport;

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="{} {} {} {}">"#,
        fmt_coord(px),
        fmt_coord(px),
        fmt_coord(cx - 0.5 * side),
        fmt_coord(cy - 0.5 * side),
        fmt_coord(side),
        fmt_coord(side)
    );
    let _ = writeln!(svg, "<title>{}</title>", escape(title));
    let _ = writeln!(svg, r##"<g fill="none" stroke="#3b5b92" stroke-width="{}">"##, fmt_coord(stroke));
    let boundary_index = spec.circles - 1;
    for (i, (kind, d, _)) in paths.iter().enumerate() {
        if i == boundary_index || d.is_empty() {
            continue;
        }
        let class = match kind {
            Kind::Circle(_) => "circle",
            Kind::Spoke(_) => "spoke",
        };
        let _ = writeln!(svg, r#"<path class="{class}" d="{d}"/>"#);
    }
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(
        svg,
        r##"<path class="boundary" fill="none" stroke="#b22222" stroke-width="{}" d="{}"/>"##,
        fmt_coord(3.0 * stroke),
        paths[boundary_index].1
    );
    if clipped {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="{}" font-family="sans-serif">coordinates clipped to |x|, |y| &lt;= {CLIP}</text>"#,
            fmt_coord(cx - 0.5 * side + pad * 0.2),
            fmt_coord(cy + 0.5 * side - pad * 0.3),
            fmt_coord(pad * 0.5)
        );
    }
    svg.push_str("</svg>\n");
    Ok(Rendering { svg, nesting, clipped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::{AnalyticFn, Identity};
    use crate::koebe::{HarmonicKoebe, KoebeFamily};
    use crate::param::DilatationParam;

    fn fk(k: f64) -> KoebeFamily {
        KoebeFamily::new(DilatationParam::from_k(k).unwrap()).unwrap()
    }

    #[test]
    fn identity_grid_is_well_formed_and_nested() {
        let r = render_disk_image(&Identity, &GridSpec::new(8, 16), "identity").unwrap();
        let doc = roxmltree::Document::parse(&r.svg).unwrap();
        assert_eq!(doc.root_element().tag_name().name(), "svg");
        let paths = doc.descendants().filter(|n| n.has_tag_name("path")).count();
        assert_eq!(paths, 8 + 16);
        assert!(r.nesting.pass && !r.clipped);
        assert!(!r.svg.contains("NaN") && !r.svg.contains("inf"));
    }

    #[test]
    fn output_is_byte_identical() {
        let spec = GridSpec::new(5, 8);
        let a = render_disk_image(&fk(0.4), &spec, "f").unwrap();
        let b = render_disk_image(&fk(0.4), &spec, "f").unwrap();
        assert_eq!(a.svg, b.svg);
    }

    #[test]
    fn koebe_images_clip_and_nest() {
        for map in [Box::new(fk(0.0)) as Box<dyn HarmonicMap>, Box::new(fk(0.8)), Box::new(HarmonicKoebe)] {
            let r = render_disk_image(&map, &GridSpec::new(8, 16), "t").unwrap();
            assert!(r.clipped && r.svg.contains("clipped"));
            assert!(r.nesting.pass, "{:?}", r.nesting);
            roxmltree::Document::parse(&r.svg).unwrap();
        }
    }

    #[test]
    fn crossing_curves_are_flagged() {
        // z -> z + 3 z^2 is not univalent on the disk
        let folded = AnalyticFn(|z: Complex64| {
            let zero = Complex64::new(0.0, 0.0);
            [z + 3.0 * z * z, 1.0 + 6.0 * z, Complex64::new(6.0, 0.0), zero]
        });
        let r = render_disk_image(&folded, &GridSpec::new(6, 4), "fold").unwrap();
        assert!(!r.nesting.pass);
    }

    #[test]
    fn winding_of_unit_square() {
        let sq = [Complex64::new(1.0, 1.0), Complex64::new(-1.0, 1.0), Complex64::new(-1.0, -1.0), Complex64::new(1.0, -1.0)];
        assert_eq!(winding_number(&sq, Complex64::new(0.0, 0.0)), 1);
        assert_eq!(winding_number(&sq, Complex64::new(3.0, 0.0)), 0);
    }

    #[test]
    fn invalid_spec_rejected() {
        let mut spec = GridSpec::new(0, 4);
        assert!(render_disk_image(&Identity, &spec, "").is_err());
        spec = GridSpec::new(2, 4);
        spec.samples_per_curve = 32;
        assert!(render_disk_image(&Identity, &spec, "").is_err());
        spec.samples_per_curve = 64;
        spec.max_radius = 1.0;
        assert!(render_disk_image(&Identity, &spec, "").is_err());
    }
}
