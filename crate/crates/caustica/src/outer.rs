//! Outer (dual) billiards about a convex curve and the area construction:
//! chords cutting a fixed area, their envelope, the induced map on the
//! curve, and the chord-angle coboundary.

use crate::billiard::geodesic_curve_intersections;
use crate::curve::ConvexCurve;
use crate::error::{Error, Result};
use crate::numerics;
use crate::strings::{tangency_pair, PoritskyEntry, PoritskyReport};
use crate::surface::{SurfaceKind, UnitTangent};
use crate::vec3::V3;

/// One sampled chord of the area construction together with its envelope
/// (tangency) point.
#[derive(Debug, Clone, Copy)]
pub struct AreaSample {
    /// Entry endpoint arclength on the parent curve.
    pub s_entry: f64,
    /// Exit endpoint arclength (ahead of entry in orientation).
    pub s_exit: f64,
    /// Envelope point of the chord family.
    pub envelope: V3,
    /// |area - p| recomputed at the sample.
    pub area_residual: f64,
    /// |dist(entry, envelope) - dist(envelope, exit)| (chord bisection).
    pub bisection_residual: f64,
}

/// The envelope of the family of chords cutting area p.
#[derive(Debug, Clone)]
pub struct AreaCurve {
    pub p: f64,
    pub samples: Vec<AreaSample>,
    /// True when the envelope turning direction changes sign (cusp).
    pub cusped: bool,
}

/// The outer billiard map about the curve: reflect `a` through the tangency
/// point of the right tangent geodesic from `a`.
pub fn outer_map(curve: &ConvexCurve, a: V3) -> Result<V3> {
    let surf = curve.surface();
    // tangency_pair errors on the convex side (inside for closed curves).
    let (_, s_b) = tangency_pair(curve, a)?;
    let b = curve.point_at(s_b);
    // Right tangent: the direction a -> b aligns with the forward tangent
    // at b (holds for the "ahead" tangency by construction).
    let (dir, dist) = surf.log_map(a, b)?;
    let t = curve.tangent_at(s_b);
    if surf.inner(b, surf.log_map(b, a)?.0, t.vector) >= 0.0 {
        return Err(Error::construction(
            "tangency orientation check failed (not a right tangent)",
        ));
    }
    Ok(surf.geodesic_flow(UnitTangent { point: a, vector: dir }, 2.0 * dist)?.point)
}

/// Total enclosed Riemannian area of a closed convex curve.
pub fn enclosed_area(curve: &ConvexCurve) -> Result<f64> {
    if !curve.is_closed() {
        return Err(Error::invalid("enclosed area needs a closed curve"));
    }
    let surf = curve.surface();
    match surf.kind() {
        SurfaceKind::Euclidean => {
            let (lo, hi) = curve.eval().domain();
            let eval = curve.eval().clone();
            let mut f = |u: f64| {
                let p = eval.point(u);
                let v = eval.velocity(u);
                p.x * v.y - p.y * v.x
            };
            Ok(0.5 * numerics::quad_adaptive(&mut f, lo, hi, 1e-13)?)
        }
        // Gauss-Bonnet: Int K dA + Int kappa_g ds = 2 pi.
        SurfaceKind::Sphere => Ok(2.0 * std::f64::consts::PI
            - curve.turning_between(0.0, curve.total_length())),
        SurfaceKind::Hyperbolic => Ok(curve.turning_between(0.0, curve.total_length())
            - 2.0 * std::f64::consts::PI),
        SurfaceKind::GeneralChart => Err(Error::Unsupported(
            "areas on general charts are not implemented".into(),
        )),
    }
}

/// Area of the region bounded by the boundary arc from `s_entry` forward to
/// `s_exit` and the geodesic chord back from exit to entry.
pub fn area_between(curve: &ConvexCurve, s_entry: f64, s_exit: f64) -> Result<f64> {
    if !curve.is_closed() {
        return Err(Error::invalid("area cuts need a closed curve"));
    }
    let total = curve.total_length();
    let mut s_exit = s_exit;
    while s_exit <= s_entry {
        s_exit += total;
    }
    if s_exit - s_entry >= total {
        return Err(Error::invalid("arc spans more than one period"));
    }
    let surf = curve.surface();
    let p_e = curve.point_at(s_entry);
    let p_x = curve.point_at(s_exit);
    match surf.kind() {
        SurfaceKind::Euclidean => {
            // Green's theorem: 1/2 (arc integral of x dy - y dx + chord term).
            let u_e = curve.param_of_s(s_entry);
            let mut u_x = curve.param_of_s(s_exit.rem_euclid(total));
            let (lo, hi) = curve.eval().domain();
            let eval = curve.eval().clone();
            let mut f = |u: f64| {
                let p = eval.point(u);
                let v = eval.velocity(u);
                p.x * v.y - p.y * v.x
            };
            let arc = if u_x > u_e {
                numerics::quad_adaptive(&mut f, u_e, u_x, 1e-13)?
            } else {
                if (u_x - lo).abs() < 1e-15 {
                    u_x = hi; // exit at the seam
                    numerics::quad_adaptive(&mut f, u_e, u_x, 1e-13)?
                } else {
                    numerics::quad_adaptive(&mut f, u_e, hi, 1e-13)?
                        + numerics::quad_adaptive(&mut f, lo, u_x, 1e-13)?
                }
            };
            Ok(0.5 * (arc + p_x.cross_xy(p_e)))
        }
        SurfaceKind::Sphere | SurfaceKind::Hyperbolic => {
            // Gauss-Bonnet for the arc + geodesic chord polygon.
            let turning = curve.turning_between(s_entry, s_exit);
            let t_x = curve.tangent_at(s_exit);
            let t_e = curve.tangent_at(s_entry);
            let (to_e, _) = surf.log_map(p_x, p_e)?;
            let (to_x, _) = surf.log_map(p_e, p_x)?;
            let ext_exit = surf.oriented_angle(p_x, t_x.vector, to_e);
            let ext_entry = surf.oriented_angle(p_e, -to_x, t_e.vector);
            let two_pi = 2.0 * std::f64::consts::PI;
            match surf.kind() {
                SurfaceKind::Sphere => Ok(two_pi - turning - ext_exit - ext_entry),
                _ => Ok(turning + ext_exit + ext_entry - two_pi),
            }
        }
        SurfaceKind::GeneralChart => Err(Error::Unsupported(
            "areas on general charts are not implemented".into(),
        )),
    }
}

/// Area cut off by an oriented geodesic crossing the curve twice: the
/// component whose boundary runs forward along the curve from the first
/// crossing to the second and back along the geodesic (the geodesic is a
/// negatively oriented boundary piece).
pub fn area_cut(curve: &ConvexCurve, g: UnitTangent) -> Result<f64> {
    let hits = geodesic_curve_intersections(curve, g)?;
    if hits.len() != 2 {
        return Err(Error::construction(format!(
            "the geodesic must cross the curve exactly twice (found {})",
            hits.len()
        )));
    }
    area_between(curve, hits[0].0, hits[1].0)
}

/// Solve for the exit endpoint of the chord from `s_entry` cutting area p.
pub fn area_chord_map(curve: &ConvexCurve, p: f64, s_entry: f64) -> Result<f64> {
    if p <= 0.0 {
        return Err(Error::invalid(format!("cut area must be positive, got {p}")));
    }
    let half = 0.5 * enclosed_area(curve)?;
    if p > half {
        return Err(Error::Domain(format!(
            "cut area {p:.4e} exceeds half the enclosed area {half:.4e}"
        )));
    }
    let kappa = curve.curvature_at(s_entry).max(1e-9);
    // Leading model: area ~ kappa d^3 / 12 over separation d.
    let seed = (12.0 * p / kappa).cbrt().min(0.45 * curve.total_length());
    let f = |d: f64| area_between(curve, s_entry, s_entry + d).map(|a| a - p);
    let mut lo = 0.5 * seed;
    while f(lo)? > 0.0 {
        lo *= 0.5;
        if lo < 1e-9 {
            return Err(Error::construction("failed to bracket the area chord from below"));
        }
    }
    let mut hi = (1.25 * seed).max(2.0 * lo);
    while f(hi)? < 0.0 {
        hi *= 1.25;
        if hi > 0.98 * curve.total_length() {
            return Err(Error::Domain("no chord carries the requested area".into()));
        }
    }
    let mut g = |d: f64| f(d).unwrap_or(f64::NAN);
    let d = numerics::brent(&mut g, lo, hi, 1e-14 * (1.0 + seed), 200)?;
    Ok(s_entry + d)
}

/// Geodesic form of the area-p chord anchored at entry arclength `tau`.
fn chord_form(curve: &ConvexCurve, p: f64, tau: f64) -> Result<V3> {
    let sigma = area_chord_map(curve, p, tau)?;
    curve
        .surface()
        .form_through(curve.point_at(tau), curve.point_at(sigma))
}

/// Build the envelope of the area-p chords over `n` anchor azimuths.
pub fn area_construction(curve: &ConvexCurve, p: f64, n: usize) -> Result<AreaCurve> {
    if n < 8 {
        return Err(Error::invalid("need at least 8 envelope samples"));
    }
    let surf = curve.surface();
    let total = curve.total_length();
    let h0 = (total / (n as f64) / 4.0).min(0.002 * total);
    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let tau = total * i as f64 / n as f64;
        let sigma = area_chord_map(curve, p, tau)?;
        let near = curve.point_at(tau);
        // Envelope as the limit intersection of neighboring chords, with
        // one Richardson step (h and h/2 both give O(h^2) error).
        let env_at = |h: f64| -> Result<V3> {
            let f1 = chord_form(curve, p, tau - h)?;
            let f2 = chord_form(curve, p, tau + h)?;
            surf.intersect_forms(f1, f2, near)
        };
        let e_h = env_at(h0)?;
        let e_h2 = env_at(0.5 * h0)?;
        let mut env = (e_h2 * 4.0 - e_h) / 3.0;
        if surf.kind() == SurfaceKind::Sphere {
            env = env.normalized();
        }
        let area = area_between(curve, tau, sigma)?;
        let d_in = surf.distance(curve.point_at(tau), env)?;
        let d_out = surf.distance(env, curve.point_at(sigma))?;
        samples.push(AreaSample {
            s_entry: tau,
            s_exit: sigma,
            envelope: env,
            area_residual: (area - p).abs(),
            bisection_residual: (d_in - d_out).abs(),
        });
    }
    // Cusp detection: the envelope turning direction must not flip.
    let mut signs = Vec::new();
    for i in 0..n {
        let a = samples[i].envelope;
        let b = samples[(i + 1) % n].envelope;
        let c = samples[(i + 2) % n].envelope;
        signs.push((b - a).cross_xy(c - b));
    }
    let cusped = signs.iter().any(|&v| v < 0.0) && signs.iter().any(|&v| v > 0.0);
    Ok(AreaCurve { p, samples, cusped })
}

/// Candidate area-invariant parameter on the curve, represented as
/// t(s) = theta + sum_k a_k cos(k theta) + b_k sin(k theta),
/// theta = 2 pi s / length; fitted so that one reference-area chord map
/// becomes a translation t -> t + c.
#[derive(Debug, Clone)]
pub struct AreaParameter {
    length: f64,
    a: Vec<f64>,
    b: Vec<f64>,
    /// Translation constant at the reference area.
    pub c_ref: f64,
    /// RMS conjugacy residual of the fit.
    pub fit_residual: f64,
}

impl AreaParameter {
    pub fn t(&self, s: f64) -> f64 {
        let theta = 2.0 * std::f64::consts::PI * s / self.length;
        let mut t = theta;
        for (k, (ak, bk)) in self.a.iter().zip(&self.b).enumerate() {
            let kk = (k + 1) as f64;
            t += ak * (kk * theta).cos() + bk * (kk * theta).sin();
        }
        t
    }

    /// u = dt/ds.
    pub fn u(&self, s: f64) -> f64 {
        let w = 2.0 * std::f64::consts::PI / self.length;
        let theta = w * s;
        let mut du = 1.0;
        for (k, (ak, bk)) in self.a.iter().zip(&self.b).enumerate() {
            let kk = (k + 1) as f64;
            du += kk * (-ak * (kk * theta).sin() + bk * (kk * theta).cos());
        }
        w * du
    }
}

/// Fit the area parameter from the chord map at a reference area by Fourier
/// collocation least squares.
pub fn fit_area_parameter(
    curve: &ConvexCurve,
    p_ref: f64,
    modes: usize,
    collocation: usize,
) -> Result<AreaParameter> {
    if collocation < 2 * modes + 8 {
        return Err(Error::invalid("not enough collocation points for the mode count"));
    }
    let length = curve.total_length();
    let w = 2.0 * std::f64::consts::PI / length;
    let mut design = Vec::with_capacity(collocation);
    let mut rhs = Vec::with_capacity(collocation);
    for i in 0..collocation {
        let s = length * i as f64 / collocation as f64;
        let sigma = area_chord_map(curve, p_ref, s)?;
        let (th, th2) = (w * s, w * sigma);
        let mut row = Vec::with_capacity(2 * modes + 1);
        for k in 1..=modes {
            let kk = k as f64;
            row.push((kk * th2).cos() - (kk * th).cos());
        }
        for k in 1..=modes {
            let kk = k as f64;
            row.push((kk * th2).sin() - (kk * th).sin());
        }
        row.push(-1.0); // translation constant c
        design.push(row);
        rhs.push(-(th2 - th));
    }
    let sol = numerics::least_squares(&design, &rhs, None)?;
    let mut res = 0.0;
    for (row, r) in design.iter().zip(&rhs) {
        let pred: f64 = row.iter().zip(&sol).map(|(a, x)| a * x).sum();
        res += (pred - r) * (pred - r);
    }
    let fit_residual = (res / collocation as f64).sqrt();
    Ok(AreaParameter {
        length,
        a: sol[0..modes].to_vec(),
        b: sol[modes..2 * modes].to_vec(),
        c_ref: sol[2 * modes],
        fit_residual,
    })
}

/// Bootstrap the candidate parameter at a reference area and test the
/// translation property at held-out areas.
pub fn area_poritsky_check(
    curve: &ConvexCurve,
    p_ref: f64,
    p_list: &[f64],
    n_samples: usize,
    tolerance: f64,
) -> Result<PoritskyReport> {
    let param = fit_area_parameter(curve, p_ref, 24, 256)?;
    let length = curve.total_length();
    let mut entries = Vec::new();
    for &p in p_list {
        let mut incs = Vec::with_capacity(n_samples);
        for i in 0..n_samples {
            let s = length * i as f64 / n_samples as f64;
            let sigma = area_chord_map(curve, p, s)?;
            incs.push(param.t(sigma) - param.t(s));
        }
        let c_p = incs.iter().sum::<f64>() / incs.len() as f64;
        let max_deviation = incs.iter().map(|v| (v - c_p).abs()).fold(0.0f64, f64::max);
        entries.push(PoritskyEntry { p, c_p, max_deviation, pass: max_deviation < tolerance });
    }
    let pass = entries.iter().all(|e| e.pass);
    Ok(PoritskyReport { entries, tolerance, pass })
}

/// sin(alpha) / sin(beta) where alpha, beta are the angles between the
/// geodesic chord from s_a to s_b and the curve at the two endpoints.
pub fn chord_angle_ratio(curve: &ConvexCurve, s_a: f64, s_b: f64) -> Result<f64> {
    let surf = curve.surface();
    let pa = curve.point_at(s_a);
    let pb = curve.point_at(s_b);
    let (to_b, _) = surf.log_map(pa, pb)?;
    let (to_a, _) = surf.log_map(pb, pa)?;
    let ta = curve.tangent_at(s_a);
    let tb = curve.tangent_at(s_b);
    let alpha = surf.angle(pa, ta.vector, to_b);
    let beta = surf.angle(pb, tb.vector, -to_a);
    if alpha.sin().abs() < 1e-14 || beta.sin().abs() < 1e-14 {
        return Err(Error::IllConditioned("degenerate chord angle".into()));
    }
    Ok(alpha.sin() / beta.sin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::{hyperbolic_circle, sphere_circle};
    use crate::surface::Surface;
    use std::f64::consts::{FRAC_PI_4, PI};

    #[test]
    fn outer_map_on_circle_is_a_rotation() {
        let circle = ConvexCurve::circle(1.0).unwrap();
        let a = V3::xy(2.0f64.sqrt(), 0.0);
        let ta = outer_map(&circle, a).unwrap();
        // Rotation by 2 arccos(1/|A|) = pi/2 counterclockwise.
        assert!((ta - V3::xy(0.0, 2.0f64.sqrt())).norm_xy() < 1e-10, "got {ta:?}");
        // Distance to the center is preserved for any exterior point.
        for a in [V3::xy(1.7, 0.4), V3::xy(-0.3, -1.9)] {
            let ta = outer_map(&circle, a).unwrap();
            assert!((ta.norm_xy() - a.norm_xy()).abs() < 1e-10);
        }
    }

    #[test]
    fn outer_map_reflects_through_the_tangency() {
        let cap = sphere_circle(FRAC_PI_4).unwrap();
        let surf = cap.surface().clone();
        // A point outside the cap (larger polar angle).
        let a = V3::new(1.1f64.sin(), 0.0, 1.1f64.cos()).rotated_xy(0.3);
        let ta = outer_map(&cap, a).unwrap();
        let (_, s_b) = tangency_pair(&cap, a).unwrap();
        let b = cap.point_at(s_b);
        let d1 = surf.distance(a, b).unwrap();
        let d2 = surf.distance(b, ta).unwrap();
        assert!((d1 - d2).abs() < 1e-10, "|AB| = {d1}, |B T(A)| = {d2}");
    }

    #[test]
    fn outer_map_rejects_interior_points() {
        let circle = ConvexCurve::circle(1.0).unwrap();
        assert!(matches!(outer_map(&circle, V3::xy(0.2, 0.1)), Err(Error::Domain(_))));
    }

    #[test]
    fn outer_map_preserves_area() {
        // Finite-difference Jacobian determinant of the outer map at an
        // exterior point of the ellipse.
        let ellipse = ConvexCurve::ellipse(2.0, 1.0).unwrap();
        let a = V3::xy(2.3, 0.8);
        let h = 1e-6;
        let f = |q: V3| outer_map(&ellipse, q).unwrap();
        let dx = (f(a + V3::xy(h, 0.0)) - f(a - V3::xy(h, 0.0))) / (2.0 * h);
        let dy = (f(a + V3::xy(0.0, h)) - f(a - V3::xy(0.0, h))) / (2.0 * h);
        let det = dx.x * dy.y - dx.y * dy.x;
        assert!((det.abs() - 1.0).abs() < 1e-5, "Jacobian determinant {det}");
    }

    #[test]
    fn disk_cut_areas_match_segment_formulas() {
        let circle = ConvexCurve::circle(1.0).unwrap();
        // Any diameter: half the disk.
        let g = UnitTangent { point: V3::xy(0.0, -2.0), vector: V3::xy(0.0, 1.0) };
        let a = area_cut(&circle, g).unwrap();
        assert!((a - PI / 2.0).abs() < 1e-10, "half disk {a}");
        // Chord at distance 0.5: minor segment arccos(1/2) - (1/2) sqrt(3)/2.
        let g = UnitTangent { point: V3::xy(0.5, -2.0), vector: V3::xy(0.0, 1.0) };
        let a = area_cut(&circle, g).unwrap();
        let expect = 0.5f64.acos() - 0.5 * 0.75f64.sqrt();
        assert!((a - expect).abs() < 1e-10, "segment {a} vs {expect}");
        // Orientation flip gives the complement.
        let g2 = UnitTangent { point: V3::xy(0.5, 2.0), vector: V3::xy(0.0, -1.0) };
        let b = area_cut(&circle, g2).unwrap();
        assert!((a + b - PI).abs() < 1e-9, "complement sum {}", a + b);
    }

    #[test]
    fn constant_curvature_half_cuts() {
        // Sphere cap, geodesic through the pole: half the cap area.
        let cap = sphere_circle(FRAC_PI_4).unwrap();
        let g = UnitTangent { point: V3::new(0.0, 0.0, 1.0), vector: V3::new(1.0, 0.0, 0.0) };
        let a = area_cut(&cap, g).unwrap();
        let expect = PI * (1.0 - FRAC_PI_4.cos());
        assert!((a - expect).abs() < 1e-9, "half cap {a} vs {expect}");
        // Hyperbolic circle, diameter: half of 4 pi sinh^2(r/2).
        let hc = hyperbolic_circle(1.0).unwrap();
        let g = UnitTangent { point: V3::xy(0.0, 0.0), vector: V3::xy(1.0, 0.0) };
        let a = area_cut(&hc, g).unwrap();
        let expect = 2.0 * PI * 0.5f64.sinh().powi(2);
        assert!((a - expect).abs() < 1e-9, "half hyperbolic disk {a} vs {expect}");
    }

    #[test]
    fn enclosed_areas_closed_forms() {
        let ellipse = ConvexCurve::ellipse(2.0, 1.0).unwrap();
        assert!((enclosed_area(&ellipse).unwrap() - 2.0 * PI).abs() < 1e-10);
        let cap = sphere_circle(FRAC_PI_4).unwrap();
        assert!(
            (enclosed_area(&cap).unwrap() - 2.0 * PI * (1.0 - FRAC_PI_4.cos())).abs() < 1e-9
        );
    }

    #[test]
    fn circle_area_envelope_is_concentric() {
        let circle = ConvexCurve::circle(1.0).unwrap();
        let r = 0.5f64;
        let p = r.acos() - r * (1.0 - r * r).sqrt();
        assert!((p - 0.614185).abs() < 1e-5);
        let ac = area_construction(&circle, p, 32).unwrap();
        assert!(!ac.cusped);
        for s in &ac.samples {
            assert!((s.envelope.norm_xy() - r).abs() < 1e-8, "radius {}", s.envelope.norm_xy());
            assert!(s.area_residual < 1e-9);
            assert!(s.bisection_residual < 1e-7);
        }
        // p near half-area: the envelope shrinks toward the center.
        let tight = area_construction(&circle, PI / 2.0 * 0.999, 16).unwrap();
        for s in &tight.samples {
            assert!(s.envelope.norm_xy() < 0.01);
        }
    }

    #[test]
    fn ellipse_area_envelope_is_homothetic() {
        let ellipse = ConvexCurve::ellipse(2.0, 1.0).unwrap();
        let ac = area_construction(&ellipse, 5e-2, 32).unwrap();
        // Fit lambda: envelope should satisfy (x/2)^2 + y^2 = lambda^2.
        let lams: Vec<f64> = ac
            .samples
            .iter()
            .map(|s| ((s.envelope.x / 2.0).powi(2) + s.envelope.y.powi(2)).sqrt())
            .collect();
        let mean = lams.iter().sum::<f64>() / lams.len() as f64;
        for (s, l) in ac.samples.iter().zip(&lams) {
            assert!((l - mean).abs() < 1e-6, "homothety residual {:.3e}", (l - mean).abs());
            assert!(s.bisection_residual < 1e-7);
        }
    }

    #[test]
    fn area_chords_stay_on_the_curve() {
        // The chord map is the outer map generated by the envelope restricted
        // to the curve: reflecting the entry through the envelope point lands
        // on the curve at the exit.
        let ellipse = ConvexCurve::ellipse(2.0, 1.0).unwrap();
        let surf = ellipse.surface();
        let ac = area_construction(&ellipse, 2e-2, 16).unwrap();
        for s in &ac.samples {
            let a = ellipse.point_at(s.s_entry);
            let (dir, dist) = surf.log_map(a, s.envelope).unwrap();
            let image = surf
                .geodesic_flow(UnitTangent { point: a, vector: dir }, 2.0 * dist)
                .unwrap()
                .point;
            let d = (image - ellipse.point_at(s.s_exit)).norm_xy();
            assert!(d < 1e-7, "image misses the curve by {d:.3e}");
        }
    }

    #[test]
    fn circle_area_parameter_is_exact() {
        let circle = ConvexCurve::circle(1.0).unwrap();
        let report = area_poritsky_check(&circle, 0.3, &[0.2, 0.5], 16, 1e-10).unwrap();
        assert!(report.pass, "deviations {:?}", report.entries);
    }

    #[test]
    fn ellipse_has_the_area_translation_property() {
        let ellipse = ConvexCurve::ellipse(2.0, 1.0).unwrap();
        let report = area_poritsky_check(&ellipse, 5e-4, &[1e-3, 2e-3], 40, 1e-5).unwrap();
        assert!(
            report.pass,
            "deviations {:?}",
            report.entries.iter().map(|e| e.max_deviation).collect::<Vec<_>>()
        );
    }

    #[test]
    fn ellipse_area_parameter_matches_affine_arclength() {
        // On conics the invariant parameter is the affine arclength
        // (integral of curvature^(1/3) ds) up to an affine map; compare
        // derivative shapes: u(s) proportional to kappa^(1/3)(s).
        let ellipse = ConvexCurve::ellipse(2.0, 1.0).unwrap();
        let param = fit_area_parameter(&ellipse, 1e-4, 40, 400).unwrap();
        let length = ellipse.total_length();
        let mut worst = 0.0f64;
        let u0 = param.u(0.0) / ellipse.curvature_at(0.0).powf(1.0 / 3.0);
        for i in 0..64 {
            let s = length * i as f64 / 64.0;
            let ratio = param.u(s) / ellipse.curvature_at(s).powf(1.0 / 3.0);
            worst = worst.max((ratio / u0 - 1.0).abs());
        }
        assert!(worst < 1e-5, "affine-arclength mismatch {worst:.3e}");
    }

    #[test]
    fn quartic_oval_fails_the_area_translation_test() {
        let oval = ConvexCurve::quartic_oval().unwrap();
        let report = area_poritsky_check(&oval, 5e-4, &[1e-3], 40, 1e-6).unwrap();
        assert!(!report.pass);
        assert!(report.entries[0].max_deviation > 1e-4);
    }

    #[test]
    fn chord_angle_ratio_closed_forms() {
        let circle = ConvexCurve::circle(1.0).unwrap();
        for (sa, sb) in [(0.0, 1.0), (2.0, 5.5)] {
            let r = chord_angle_ratio(&circle, sa, sb).unwrap();
            assert!((r - 1.0).abs() < 1e-12, "circle ratio {r}");
        }
        // Cocycle on the ellipse: ratio(A,B) ratio(B,C) ratio(C,A) = 1.
        let ellipse = ConvexCurve::ellipse(2.0, 1.0).unwrap();
        let (a, b, c) = (0.3, 2.1, 5.6);
        let prod = chord_angle_ratio(&ellipse, a, b).unwrap()
            * chord_angle_ratio(&ellipse, b, c).unwrap()
            * chord_angle_ratio(&ellipse, c, a).unwrap();
        assert!((prod - 1.0).abs() < 1e-8, "cocycle product {prod}");
    }

    #[test]
    fn chord_angle_ratio_is_the_parameter_coboundary() {
        // sin(alpha)/sin(beta) = u(A)/u(B) with u the derivative of the
        // empirical area parameter.
        let ellipse = ConvexCurve::ellipse(2.0, 1.0).unwrap();
        let param = fit_area_parameter(&ellipse, 1e-4, 40, 400).unwrap();
        for (sa, sb) in [(0.4, 1.9), (3.0, 5.2), (0.0, 4.0)] {
            let lhs = chord_angle_ratio(&ellipse, sa, sb).unwrap();
            let rhs = param.u(sa) / param.u(sb);
            assert!((lhs - rhs).abs() < 1e-4, "coboundary mismatch {lhs} vs {rhs}");
        }
    }

    #[test]
    fn euclidean_fallback_consistency() {
        // area_between and area_cut agree when the chord is realized as a
        // geodesic hit list.
        let ellipse = ConvexCurve::ellipse(2.0, 1.0).unwrap();
        let (sa, sb) = (0.7, 2.9);
        let a_direct = area_between(&ellipse, sa, sb).unwrap();
        let pa = ellipse.point_at(sa);
        let pb = ellipse.point_at(sb);
        let surf = Surface::euclidean();
        let dir = (pb - pa) / (pb - pa).norm_xy();
        // Oriented from exit toward entry: the cut is the complement piece;
        // oriented entry->exit matches area_between(sa, sb).
        let g = UnitTangent { point: pa - dir * 0.5, vector: dir };
        let a_cut = area_cut(&ellipse, g).unwrap();
        let _ = surf;
        assert!((a_direct - a_cut).abs() < 1e-9, "{a_direct} vs {a_cut}");
    }
}
