//! The string construction around a convex curve: level sets of the
//! two-tangent length function L, the induced maps on the curve, and checks
//! for the existence of a parameter in which those maps are translations.

use crate::curve::ConvexCurve;
use crate::error::{Error, Result};
use crate::numerics;
use crate::surface::{SurfaceKind, UnitTangent};
use crate::vec3::V3;

/// One point of a string curve: the tangency parameters and the tangent
/// intersection point carrying the string of length `p`.
#[derive(Debug, Clone, Copy)]
pub struct StringSample {
    pub s_a: f64,
    pub s_b: f64,
    pub c: V3,
    /// |L(s_a, s_b) - p| at the recorded sample.
    pub l_residual: f64,
}

/// The level set { C : L(A(C), B(C)) = p }, sampled over anchor points.
#[derive(Debug, Clone)]
pub struct StringCurve {
    pub p: f64,
    pub samples: Vec<StringSample>,
}

/// How to trace a string curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StringMethod {
    /// Root-find L(s_A, s_B) = p anchor by anchor (authoritative).
    PairRootfind,
    /// Integrate the exterior-bisector direction field from one root-found
    /// seed; cross-validates the rootfinder.
    BisectorOde,
}

/// Per-p summary of the translation test in the invariant parameter.
#[derive(Debug, Clone, Copy)]
pub struct PoritskyEntry {
    pub p: f64,
    /// Mean increment of the normalized curvature^(2/3) parameter.
    pub c_p: f64,
    /// Max |increment - c_p| over anchors.
    pub max_deviation: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct PoritskyReport {
    pub entries: Vec<PoritskyEntry>,
    pub tolerance: f64,
    pub pass: bool,
}

/// Solve L(s_a, s_b) = p for s_b > s_a. The cube-root scale
/// (12 p / kappa^2)^(1/3) seeds the bracket.
pub fn string_map(curve: &ConvexCurve, p: f64, s_a: f64) -> Result<f64> {
    if p <= 0.0 {
        return Err(Error::invalid(format!("string length must be positive, got {p}")));
    }
    let kappa = curve.curvature_at(s_a).max(1e-9);
    let cap = curve.max_separation();
    // Cube-root seed from the local curvature, clamped to a sane range
    // (flat spots make the local estimate blow up).
    let seed = (12.0 * p / (kappa * kappa)).cbrt().min(0.25 * cap.min(curve.total_length()));
    let f = |d: f64| curve.string_length(s_a, s_a + d).map(|l| l - p);
    // L grows like d^3: bracket around the seed.
    let mut lo = 0.5 * seed;
    loop {
        match f(lo) {
            Ok(v) if v <= 0.0 => break,
            Ok(_) | Err(Error::Domain(_)) => {
                lo *= 0.5;
                if lo < 2e-8 {
                    return Err(Error::construction(
                        "failed to bracket the string root from below",
                    ));
                }
            }
            Err(e) => return Err(e),
        }
    }
    let mut hi = (1.25 * lo).max(seed);
    loop {
        match f(hi) {
            Ok(v) if v >= 0.0 => break,
            Ok(_) => {
                hi *= 1.25;
                if hi > cap {
                    return Err(Error::Domain(format!(
                        "no admissible separation carries string length {p:.3e}"
                    )));
                }
            }
            // Hitting the turning/separation caps means p is too large here.
            Err(Error::Domain(d)) => {
                return Err(Error::Domain(format!(
                    "string length {p:.3e} is too large at anchor {s_a:.4}: {d}"
                )))
            }
            Err(e) => return Err(e),
        }
    }
    let mut g = |d: f64| f(d).unwrap_or(f64::NAN);
    let d = numerics::brent(&mut g, lo, hi, 1e-14 * (1.0 + seed), 200)?;
    Ok(s_a + d)
}

/// L(A, B) divided by its leading cubic model kappa^2(A)/12 delta^3.
pub fn lasyl_ratio(curve: &ConvexCurve, s_a: f64, delta: f64) -> Result<f64> {
    let l = curve.string_length(s_a, s_a + delta)?;
    let kappa = curve.curvature_at(s_a);
    Ok(l / (kappa * kappa / 12.0 * delta * delta * delta))
}

/// Anchor grid for a curve: full period for closed curves, a trimmed
/// interior range for open arcs.
fn anchor_grid(curve: &ConvexCurve, p: f64, n: usize) -> Vec<f64> {
    let total = curve.total_length();
    if curve.is_closed() {
        (0..n).map(|i| total * i as f64 / n as f64).collect()
    } else {
        let kappa_min = (0..=64)
            .map(|i| curve.curvature_at(total * i as f64 / 64.0))
            .fold(f64::INFINITY, f64::min)
            .max(1e-9);
        let margin = 2.5 * (12.0 * p / (kappa_min * kappa_min)).cbrt();
        let hi = (total - margin).max(0.0);
        (0..n).map(|i| hi * i as f64 / (n.max(2) - 1) as f64).collect()
    }
}

/// Trace the string curve of length `p` over `n_anchors` anchor points.
pub fn string_curve(
    curve: &ConvexCurve,
    p: f64,
    method: StringMethod,
    n_anchors: usize,
) -> Result<StringCurve> {
    if n_anchors < 2 {
        return Err(Error::invalid("need at least two anchors"));
    }
    let anchors = anchor_grid(curve, p, n_anchors);
    match method {
        StringMethod::PairRootfind => {
            let samples = anchors
                .iter()
                .map(|&s_a| pair_sample(curve, p, s_a))
                .collect::<Result<Vec<_>>>()?;
            Ok(StringCurve { p, samples })
        }
        StringMethod::BisectorOde => bisector_ode_trace(curve, p, &anchors),
    }
}

fn pair_sample(curve: &ConvexCurve, p: f64, s_a: f64) -> Result<StringSample> {
    let s_b = string_map(curve, p, s_a)?;
    let c = curve.tangent_intersection(s_a, s_b)?;
    let l = curve.string_length(s_a, s_b)?;
    Ok(StringSample { s_a, s_b, c, l_residual: (l - p).abs() })
}

/// Sine of the angle at gamma(s) between the forward tangent and the
/// geodesic toward `c`; zero exactly when the tangent geodesic at s passes
/// through c.
fn tangency_residual(curve: &ConvexCurve, s: f64, c: V3) -> Result<f64> {
    let t = curve.tangent_at(s);
    let (dir, _) = curve.surface().log_map(t.point, c)?;
    Ok(curve.surface().oriented_angle(t.point, t.vector, dir).sin())
}

/// Refine a tangency parameter near `seed` for the point `c`.
fn polish_tangency(curve: &ConvexCurve, c: V3, seed: f64, half_width: f64) -> Result<f64> {
    let mut g = |s: f64| tangency_residual(curve, s, c).unwrap_or(f64::NAN);
    let (a, b) = numerics::bracket_root(
        &mut g,
        seed,
        0.25 * half_width,
        seed - half_width,
        seed + half_width,
    )?;
    numerics::brent(&mut g, a, b, 1e-14 * (1.0 + seed.abs()), 200)
}

/// Arclength parameter of the curve point nearest to `c` (chart/ambient
/// metric; adequate as a seed).
fn nearest_param(curve: &ConvexCurve, c: V3) -> f64 {
    let total = curve.total_length();
    let n = 512;
    let mut best = (0.0, f64::INFINITY);
    for i in 0..n {
        let s = total * i as f64 / n as f64;
        let d = (curve.point_at(s) - c).norm2();
        if d < best.1 {
            best = (s, d);
        }
    }
    best.0
}

/// Both tangency parameters (behind, ahead) for a point on the concave side.
pub fn tangency_pair(curve: &ConvexCurve, c: V3) -> Result<(f64, f64)> {
    let s_c = nearest_param(curve, c);
    let q = curve.point_at(s_c);
    let d = curve.surface().distance(q, c)?;
    if d < 1e-12 {
        return Err(Error::Domain("point lies on the curve".into()));
    }
    let t = curve.tangent_at(s_c);
    let (dir, _) = curve.surface().log_map(q, c)?;
    if curve.surface().oriented_angle(q, t.vector, dir) > 0.0 {
        return Err(Error::Domain(
            "point lies on the convex side; no tangent geodesics exist".into(),
        ));
    }
    let kappa = curve.curvature_at(s_c).max(1e-9);
    let half = (2.0 * d / kappa).sqrt();
    let s_a = polish_tangency(curve, c, s_c - half, 2.5 * half + 1e-6)?;
    let s_b = polish_tangency(curve, c, s_c + half, 2.5 * half + 1e-6)?;
    if s_b <= s_a {
        return Err(Error::construction("tangency search collapsed to one point"));
    }
    Ok((s_a, s_b))
}

/// Exterior-bisector direction of the two tangent geodesics through `c`,
/// oriented so that the tangency points advance with the curve orientation.
pub fn bisector_direction(curve: &ConvexCurve, c: V3) -> Result<UnitTangent> {
    let (s_a, s_b) = tangency_pair(curve, c)?;
    bisector_from_pair(curve, c, s_a, s_b)
}

fn bisector_from_pair(curve: &ConvexCurve, c: V3, s_a: f64, s_b: f64) -> Result<UnitTangent> {
    let surf = curve.surface();
    let (za, _) = surf.log_map(c, curve.point_at(s_a))?;
    let (zb, _) = surf.log_map(c, curve.point_at(s_b))?;
    let za = za / surf.norm(c, za);
    let zb = zb / surf.norm(c, zb);
    let mut v = za - zb;
    let n = surf.norm(c, v);
    if n < 1e-12 {
        return Err(Error::IllConditioned(
            "tangent geodesics are (anti)parallel at this point".into(),
        ));
    }
    v = v / n;
    // Orient: moving along the bisector must advance the tangencies forward,
    // which means turning clockwise relative to the inward direction.
    let mid = (za + zb) / surf.norm(c, za + zb);
    if surf.oriented_angle(c, mid, v) > 0.0 {
        v = -v;
    }
    Ok(UnitTangent { point: c, vector: v })
}

/// Project a chart/ambient step back onto the model (sphere only; charts are
/// already intrinsic).
fn project_model(kind: SurfaceKind, p: V3) -> V3 {
    match kind {
        SurfaceKind::Sphere => p.normalized(),
        _ => p,
    }
}

/// Integrate the exterior-bisector field from a root-found seed, recording
/// independent samples as the leading tangency crosses each anchor.
fn bisector_ode_trace(curve: &ConvexCurve, p: f64, anchors: &[f64]) -> Result<StringCurve> {
    let kind = curve.surface().kind();
    if kind == SurfaceKind::GeneralChart {
        return Err(Error::Unsupported(
            "the bisector-field tracer requires a constant-curvature model".into(),
        ));
    }
    let seed = pair_sample(curve, p, anchors[0])?;
    let total = curve.total_length();
    let h = total / 2048.0;
    // Continuous (unwrapped) tangency state carried along the integration.
    let mut state = (seed.c, seed.s_a, seed.s_b);
    let mut samples = vec![seed];
    let mut next_anchor = 1usize;
    let span = seed.s_b - seed.s_a;
    let target_end = if curve.is_closed() {
        anchors[0] + total
    } else {
        *anchors.last().unwrap() + 1e-12
    };

    // One RK4 step of size `dt` from a tangency-tracked state.
    let step = |st: &(V3, f64, f64), dt: f64| -> Result<(V3, f64, f64)> {
        let dir_at = |c: V3, sa: f64, sb: f64| -> Result<V3> {
            let sa = polish_tangency(curve, c, sa, 0.6 * span + 4.0 * dt.abs())?;
            let sb = polish_tangency(curve, c, sb, 0.6 * span + 4.0 * dt.abs())?;
            Ok(bisector_from_pair(curve, c, sa, sb)?.vector)
        };
        let (c0, sa, sb) = *st;
        let k1 = dir_at(c0, sa, sb)?;
        let k2 = dir_at(project_model(kind, c0 + k1 * (0.5 * dt)), sa, sb)?;
        let k3 = dir_at(project_model(kind, c0 + k2 * (0.5 * dt)), sa, sb)?;
        let k4 = dir_at(project_model(kind, c0 + k3 * dt), sa, sb)?;
        let c1 = project_model(kind, c0 + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0));
        let sa1 = polish_tangency(curve, c1, sa + dt, 0.6 * span + 4.0 * dt.abs())?;
        let sb1 = polish_tangency(curve, c1, sb + dt, 0.6 * span + 4.0 * dt.abs())?;
        Ok((c1, sa1, sb1))
    };

    let mut guard = 0usize;
    while next_anchor < anchors.len() || (curve.is_closed() && state.1 < target_end - 1e-9) {
        guard += 1;
        if guard > 100_000 {
            return Err(Error::convergence("bisector tracer exceeded its step budget"));
        }
        let trial = step(&state, h)?;
        // Unwrapped anchor target for the next recording.
        let target = if next_anchor < anchors.len() {
            let mut a = anchors[next_anchor];
            while a < state.1 {
                a += total;
            }
            a
        } else {
            f64::INFINITY
        };
        if trial.1 >= target {
            // Localize the crossing inside this step by bisection on the
            // step size, keeping the sample an honest ODE output.
            let (mut lo, mut hi) = (0.0f64, h);
            let mut at = trial;
            for _ in 0..48 {
                let mid = 0.5 * (lo + hi);
                let cand = step(&state, mid)?;
                if cand.1 >= target {
                    hi = mid;
                    at = cand;
                } else {
                    lo = mid;
                }
                if hi - lo < 1e-12 {
                    break;
                }
            }
            let l = curve.string_length(at.1, at.2)?;
            samples.push(StringSample {
                s_a: at.1.rem_euclid(total),
                s_b: at.2,
                c: at.0,
                l_residual: (l - p).abs(),
            });
            next_anchor += 1;
            state = at;
        } else {
            state = trial;
        }
        if !curve.is_closed() && next_anchor >= anchors.len() {
            break;
        }
    }
    Ok(StringCurve { p, samples })
}

/// Estimate the translation constants of the string maps in the normalized
/// curvature^(2/3) parameter.
pub fn poritsky_check(
    curve: &ConvexCurve,
    p_list: &[f64],
    n_samples: usize,
    tolerance: f64,
) -> Result<PoritskyReport> {
    if p_list.is_empty() || n_samples < 2 {
        return Err(Error::invalid("need at least one p and two samples"));
    }
    // The translation property is invariant under affine reparametrization,
    // so the raw curvature^(2/3) parameter suffices (and stays finite even
    // when the curve's base point has vanishing curvature).
    let t_total = if curve.is_closed() {
        curve.lazutkin_total(false)
    } else {
        0.0
    };
    let mut entries = Vec::new();
    for &p in p_list {
        let anchors = anchor_grid(curve, p, n_samples);
        let mut incs = Vec::with_capacity(anchors.len());
        for &s in &anchors {
            let s2 = string_map(curve, p, s)?;
            let mut dt = curve.lazutkin_param(s2, false) - curve.lazutkin_param(s, false);
            if curve.is_closed() {
                dt = dt.rem_euclid(t_total);
            }
            incs.push(dt);
        }
        let c_p = incs.iter().sum::<f64>() / incs.len() as f64;
        let max_deviation = incs
            .iter()
            .map(|v| (v - c_p).abs())
            .fold(0.0f64, f64::max);
        entries.push(PoritskyEntry { p, c_p, max_deviation, pass: max_deviation < tolerance });
    }
    let pass = entries.iter().all(|e| e.pass);
    Ok(PoritskyReport { entries, tolerance, pass })
}

/// Orbit of the string map: s, T_p(s), T_p^2(s), ...
pub fn string_orbit(curve: &ConvexCurve, p: f64, s0: f64, n: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(n + 1);
    let mut s = s0;
    out.push(s);
    for _ in 0..n {
        s = string_map(curve, p, s)?;
        out.push(s);
    }
    Ok(out)
}
