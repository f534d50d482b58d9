//! End-to-end verification checks bundled for `caustica verify-all` and the
//! acceptance test suite. Each check exercises one analytic property of the
//! library at a frozen tolerance and reports a single pass/fail outcome.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::billiard::{self, LazutkinChart, PhasePoint, WeaklyBilliardMap};
use crate::conic::{hyperbolic_circle, sphere_circle};
use crate::curve::ConvexCurve;
use crate::incidence;
use crate::jet::{self, Jet4};
use crate::numerics;
use crate::outer;
use crate::strings;
use crate::surface::Surface;
use crate::vec3::V3;

/// Outcome of one acceptance check.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    /// Headline measured quantity (worst case over the check's sweep).
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Human-readable detail.
    pub detail: String,
}

impl CriterionResult {
    fn new(
        id: usize,
        name: &'static str,
        value: f64,
        tolerance: f64,
        pass: bool,
        detail: String,
    ) -> CriterionResult {
        CriterionResult { id, name, value, tolerance, pass, detail }
    }

    fn error(id: usize, name: &'static str, err: crate::Error) -> CriterionResult {
        CriterionResult {
            id,
            name,
            value: f64::NAN,
            tolerance: 0.0,
            pass: false,
            detail: format!("error: {err}"),
        }
    }
}

type Check = fn() -> crate::Result<CriterionResult>;

/// Run all acceptance checks (in parallel, deterministic order).
pub fn run_all() -> Vec<CriterionResult> {
    let checks: Vec<(usize, &'static str, Check)> = vec![
        (1, "circle string length closed form", check_circle_string_length),
        (2, "string length cubic asymptotics", check_cubic_asymptotics),
        (3, "string map translation property", check_translation_property),
        (4, "invariant parameter matches curvature^(2/3)", check_affine_parameter),
        (5, "geodesic circle circumference vs psi", check_psi),
        (6, "billiard map symplecticity", check_symplecticity),
        (7, "near-boundary normal form exponents", check_normal_form),
        (8, "quantitative orbit bounds", check_orbit_bounds),
        (9, "tangent incidence and Ceva products", check_incidence),
        (10, "tangent-length coboundary", check_coboundary),
        (11, "outer billiards and area construction", check_outer),
        (12, "defect coefficient slope and parity", check_defect_slope),
        (13, "jet ODE conic reconstruction", check_jet_ode),
        (14, "negative controls (quartic oval)", check_negative_controls),
    ];
    let mut out: Vec<CriterionResult> = checks
        .par_iter()
        .map(|&(id, name, f)| f().unwrap_or_else(|e| CriterionResult::error(id, name, e)))
        .collect();
    out.sort_by_key(|c| c.id);
    out
}

fn check_circle_string_length() -> crate::Result<CriterionResult> {
    let circle = ConvexCurve::circle(1.0)?;
    let mut worst = 0.0f64;
    for &theta in &[0.01, 0.03, 0.1, 0.2, 0.35, 0.5] {
        let l = circle.string_length(1.0, 1.0 + 2.0 * theta)?;
        let truth = 2.0 * theta.tan() - 2.0 * theta;
        worst = worst.max((l / truth - 1.0).abs());
    }
    Ok(CriterionResult::new(
        1,
        "circle string length closed form",
        worst,
        1e-9,
        worst < 1e-9,
        format!("max relative error vs 2 tan(theta) - 2 theta: {worst:.3e}"),
    ))
}

fn check_cubic_asymptotics() -> crate::Result<CriterionResult> {
    let ellipse = ConvexCurve::ellipse(2.0, 1.0)?;
    let total = ellipse.total_length();
    let mut worst = 0.0f64;
    let mut pass = true;
    for i in 0..5 {
        let s = total * i as f64 / 5.0;
        let e1 = (strings::lasyl_ratio(&ellipse, s, 1e-2)? - 1.0).abs();
        let e2 = (strings::lasyl_ratio(&ellipse, s, 5e-3)? - 1.0).abs();
        worst = worst.max(e1);
        // The error term is c1 delta + O(delta^2): halving delta halves the
        // error up to the quadratic correction (2% slack).
        pass &= e1 < 0.05 && e2 <= 0.51 * e1 + 1e-12;
    }
    Ok(CriterionResult::new(
        2,
        "string length cubic asymptotics",
        worst,
        0.05,
        pass,
        format!("max |L / (kappa^2 delta^3 / 12) - 1| at delta = 1e-2: {worst:.3e}; error halves with delta: {pass}"),
    ))
}

fn check_translation_property() -> crate::Result<CriterionResult> {
    let ellipse = ConvexCurve::ellipse(2.0, 1.0)?;
    let report = strings::poritsky_check(&ellipse, &[1e-4, 1e-3], 50, 1e-6)?;
    let worst = report
        .entries
        .iter()
        .map(|e| e.max_deviation)
        .fold(0.0f64, f64::max);
    Ok(CriterionResult::new(
        3,
        "string map translation property",
        worst,
        1e-6,
        report.pass,
        format!("max increment deviation over p in {{1e-4, 1e-3}}, 50 samples: {worst:.3e}"),
    ))
}

fn check_affine_parameter() -> crate::Result<CriterionResult> {
    let ellipse = ConvexCurve::ellipse(2.0, 1.0)?;
    let orbit = strings::string_orbit(&ellipse, 1e-3, 0.0, 60)?;
    let ms: Vec<f64> = (0..orbit.len()).map(|m| m as f64).collect();
    let ts: Vec<f64> = orbit.iter().map(|&s| ellipse.lazutkin_param(s, true)).collect();
    let (slope, icept) = numerics::line_fit(&ms, &ts);
    let worst = ms
        .iter()
        .zip(&ts)
        .map(|(m, t)| (t - (slope * m + icept)).abs())
        .fold(0.0f64, f64::max);
    Ok(CriterionResult::new(
        4,
        "invariant parameter matches curvature^(2/3)",
        worst,
        1e-3,
        worst < 1e-3,
        format!("max affine-fit residual over a 60-step orbit: {worst:.3e}"),
    ))
}

fn check_psi() -> crate::Result<CriterionResult> {
    let mut worst = 0.0f64;
    for &r in &[0.1, 0.5, 1.0] {
        let sph = sphere_circle(r)?.total_length() / (2.0 * PI);
        worst = worst.max((sph / r.sin() - 1.0).abs());
        let hyp = hyperbolic_circle(r)?.total_length() / (2.0 * PI);
        worst = worst.max((hyp / r.sinh() - 1.0).abs());
    }
    Ok(CriterionResult::new(
        5,
        "geodesic circle circumference vs psi",
        worst,
        1e-6,
        worst < 1e-6,
        format!("max relative circumference error vs sin r / sinh r: {worst:.3e}"),
    ))
}

fn check_symplecticity() -> crate::Result<CriterionResult> {
    let map = WeaklyBilliardMap::billiard(ConvexCurve::ellipse(2.0, 1.0)?)?;
    let mut worst = 0.0f64;
    for i in 0..5 {
        let s = map.s_period * i as f64 / 5.0;
        for j in 0..5 {
            let y = 1e-3 * 10f64.powf(j as f64 / 2.0); // 1e-3 .. 1e-1
            let h_s = 1e-5;
            let h_y = 1e-5 * y;
            let f = |s: f64, y: f64| -> crate::Result<(f64, f64)> {
                let q = map.forward(PhasePoint::from_sy(s, y)?)?;
                Ok((q.s, q.y()))
            };
            let (sp, yp) = f(s + h_s, y)?;
            let (sm, ym) = f(s - h_s, y)?;
            let (sp2, yp2) = f(s, y + h_y)?;
            let (sm2, ym2) = f(s, y - h_y)?;
            let a = (sp - sm) / (2.0 * h_s);
            let c = (yp - ym) / (2.0 * h_s);
            let b = (sp2 - sm2) / (2.0 * h_y);
            let d = (yp2 - ym2) / (2.0 * h_y);
            worst = worst.max(((a * d - b * c).abs() - 1.0).abs());
        }
    }
    Ok(CriterionResult::new(
        6,
        "billiard map symplecticity",
        worst,
        1e-6,
        worst < 1e-6,
        format!("max |det J - 1| on the 5x5 (s, y) grid: {worst:.3e}"),
    ))
}

fn check_normal_form() -> crate::Result<CriterionResult> {
    let map = WeaklyBilliardMap::billiard(ConvexCurve::ellipse(2.0, 1.0)?)?;
    let chart = LazutkinChart::for_curve(&ConvexCurve::ellipse(2.0, 1.0)?);
    let rep = billiard::normal_form_check(&map, &chart, 0.7, (1e-6, 1e-3), 16)?;
    let slope_err = (rep.slope - 0.5).abs();
    let coeff_err = (rep.coeff - 1.0).abs();
    let pass = slope_err < 0.01 && coeff_err < 0.02;
    Ok(CriterionResult::new(
        7,
        "near-boundary normal form exponents",
        slope_err.max(coeff_err),
        0.02,
        pass,
        format!(
            "X-step exponent {:.4} (want 0.5 +- 0.01), coefficient {:.4} (want 1 +- 0.02)",
            rep.slope, rep.coeff
        ),
    ))
}

fn check_orbit_bounds() -> crate::Result<CriterionResult> {
    let ellipse = ConvexCurve::ellipse(2.0, 1.0)?;
    let map = WeaklyBilliardMap::billiard(ellipse.clone())?;
    let chart = LazutkinChart::for_curve(&ellipse);
    let mut alphas = Vec::new();
    let mut beta_last = f64::NAN;
    let mut bands_ok = true;
    for &y0 in &[1e-4, 1e-5, 1e-6] {
        let y = chart.y_of_cap(0.3, y0);
        let rec = billiard::orbit(&map, &chart, PhasePoint::from_sy(0.3, y)?, 0.4, 200_000)?;
        let stats = billiard::plog_bounds_check(&rec);
        alphas.push(stats.alpha_hat);
        beta_last = stats.beta_hat;
        // Step bands: every X-step stays within the sqrt(Y_0) band allowed
        // by the measured oscillation alpha-hat (10% slack for the O(sqrt Y)
        // correction of the step law).
        let lo = 0.9 * (y0 * (-stats.alpha_hat).exp()).sqrt();
        let hi = 1.1 * (y0 * stats.alpha_hat.exp()).sqrt();
        for j in 1..rec.xs.len() {
            let step = rec.xs[j] - rec.xs[j - 1];
            if step < lo || step > hi {
                bands_ok = false;
            }
        }
    }
    let decreasing = alphas[0] > alphas[1] && alphas[1] > alphas[2];
    let pass = decreasing && beta_last < 0.1 && bands_ok;
    Ok(CriterionResult::new(
        8,
        "quantitative orbit bounds",
        beta_last,
        0.1,
        pass,
        format!(
            "alpha-hat = [{:.2e}, {:.2e}, {:.2e}] (strictly decreasing: {decreasing}), \
             beta-hat(1e-6) = {beta_last:.3e}, step bands: {bands_ok}",
            alphas[0], alphas[1], alphas[2]
        ),
    ))
}

fn check_incidence() -> crate::Result<CriterionResult> {
    // Conic tangent triples on all three models.
    let mut worst_res = 0.0f64;
    let ellipse = ConvexCurve::ellipse(2.0, 1.0)?;
    worst_res = worst_res.max(incidence::tangent_incidence_check(&ellipse, 0.4, 2.5, 5.0)?);
    let cap = sphere_circle(PI / 4.0)?;
    let l = cap.total_length();
    worst_res =
        worst_res.max(incidence::tangent_incidence_check(&cap, 0.1 * l, 0.43 * l, 0.71 * l)?);
    let hc = hyperbolic_circle(1.0)?;
    let l = hc.total_length();
    worst_res =
        worst_res.max(incidence::tangent_incidence_check(&hc, 0.30 * l, 0.38 * l, 0.48 * l)?);
    // Concurrent cevians through a chosen point (Euclidean witness; the
    // construction is model-uniform and covered per-model by unit tests).
    let surf = Surface::euclidean();
    let tri = incidence::GeodesicTriangle::new(
        &surf,
        V3::xy(0.0, 0.0),
        V3::xy(1.0, 0.0),
        V3::xy(0.3, 0.8),
    )?;
    let q = V3::xy(0.4, 0.25);
    let af = incidence::cevian_foot(&surf, tri.a, q, tri.b, tri.c)?;
    let bf = incidence::cevian_foot(&surf, tri.b, q, tri.c, tri.a)?;
    let cf = incidence::cevian_foot(&surf, tri.c, q, tri.a, tri.b)?;
    let prod_err = (incidence::ceva_product(&surf, &tri, af, bf, cf)? - 1.0).abs();
    let pass = worst_res < 1e-8 && prod_err < 1e-9;
    Ok(CriterionResult::new(
        9,
        "tangent incidence and Ceva products",
        worst_res.max(prod_err),
        1e-8,
        pass,
        format!(
            "worst conic concurrency residual {worst_res:.3e} (tol 1e-8), \
             Ceva product error {prod_err:.3e} (tol 1e-9)"
        ),
    ))
}

fn check_coboundary() -> crate::Result<CriterionResult> {
    let ellipse = ConvexCurve::ellipse(2.0, 1.0)?;
    let quarter = ellipse.total_length() / 4.0;
    let mut worst = 0.0f64;
    for &(a, b) in &[(0.0, quarter), (0.5, 1.9), (3.0, 4.1)] {
        let (m, p) = incidence::coboundary_ratio(&ellipse, a, b)?;
        worst = worst.max((m - p).abs());
    }
    let (a, b, c) = (0.5, 1.9, 3.6);
    let cocycle = incidence::coboundary_ratio(&ellipse, a, b)?.0
        * incidence::coboundary_ratio(&ellipse, b, c)?.0
        * incidence::coboundary_ratio(&ellipse, c, a)?.0;
    let cocycle_err = (cocycle - 1.0).abs();
    let pass = worst < 1e-6 && cocycle_err < 1e-8;
    Ok(CriterionResult::new(
        10,
        "tangent-length coboundary",
        worst,
        1e-6,
        pass,
        format!(
            "max |psi ratio - curvature ratio^(1/3)| = {worst:.3e}, \
             cocycle error {cocycle_err:.3e} (tol 1e-8)"
        ),
    ))
}

fn check_outer() -> crate::Result<CriterionResult> {
    // Circle outer map vs the analytic rotation by 2 arccos(1/d).
    let circle = ConvexCurve::circle(1.0)?;
    let mut rot_err = 0.0f64;
    for &a in &[V3::xy(2f64.sqrt(), 0.0), V3::xy(1.7, 0.4), V3::xy(-0.3, -1.9)] {
        let d = a.norm_xy();
        let expect = a.rotated_xy(2.0 * (1.0 / d).acos());
        rot_err = rot_err.max((outer::outer_map(&circle, a)? - expect).norm_xy());
    }
    // Ellipse area envelope homothety.
    let ellipse = ConvexCurve::ellipse(2.0, 1.0)?;
    let ac = outer::area_construction(&ellipse, 5e-2, 32)?;
    let lams: Vec<f64> = ac
        .samples
        .iter()
        .map(|s| ((s.envelope.x / 2.0).powi(2) + s.envelope.y.powi(2)).sqrt())
        .collect();
    let mean = lams.iter().sum::<f64>() / lams.len() as f64;
    let homothety = lams
        .iter()
        .map(|l| (l - mean).abs())
        .fold(0.0f64, f64::max);
    // Area translation property at held-out areas.
    let report = outer::area_poritsky_check(&ellipse, 5e-4, &[1e-3, 2e-3], 40, 1e-5)?;
    let area_dev = report
        .entries
        .iter()
        .map(|e| e.max_deviation)
        .fold(0.0f64, f64::max);
    let pass = rot_err < 1e-9 && homothety < 1e-6 && report.pass;
    Ok(CriterionResult::new(
        11,
        "outer billiards and area construction",
        rot_err.max(homothety).max(area_dev),
        1e-5,
        pass,
        format!(
            "circle rotation error {rot_err:.3e} (tol 1e-9), envelope homothety \
             residual {homothety:.3e} (tol 1e-6), area translation deviation {area_dev:.3e} (tol 1e-5)"
        ),
    ))
}

fn check_defect_slope() -> crate::Result<CriterionResult> {
    let surf = Surface::euclidean();
    let mk = |b4: f64, b5: f64| -> crate::Result<ConvexCurve> {
        let mut c =
            ConvexCurve::graph(surf.clone(), &[0.0, 0.0, 1.0, 0.0, b4, b5], -0.5, 0.5)?;
        c.set_base_at_point(V3::xy(0.0, 0.0))?;
        Ok(c)
    };
    let (l0, _) = jet::lambda6(&mk(0.0, 0.0)?, None)?;
    let (l1, r1) = jet::lambda6(&mk(0.0, 1.0)?, None)?;
    let slope = l1 - l0;
    let slope_err = (slope * 720.0 - 1.0).abs();
    // Parity: an even-order (b4) jet perturbation leaves the coefficient.
    let (l1b, r1b) = jet::lambda6(&mk(0.4, 1.0)?, None)?;
    let parity_shift = (l1b - l1).abs();
    let noise = (r1 + r1b).max(0.01 * l1.abs());
    let pass = slope_err < 0.02 && parity_shift < noise;
    Ok(CriterionResult::new(
        12,
        "defect coefficient slope and parity",
        slope_err,
        0.02,
        pass,
        format!(
            "720 x slope = {:.5} (want 1 +- 2%), b4-parity shift {parity_shift:.3e} \
             (noise scale {noise:.3e})",
            slope * 720.0
        ),
    ))
}

fn check_jet_ode() -> crate::Result<CriterionResult> {
    let surf = Surface::euclidean();
    // Circle jet.
    let jet = Jet4::new(0.0, [0.0, 0.0, 1.0, 0.0, 3.0])?;
    let pts = jet::integrate_jet_ode(&surf, &jet, 0.1, 0.02)?;
    let mut worst = 0.0f64;
    for &(x, y) in &pts {
        worst = worst.max((y - (1.0 - (1.0 - x * x).sqrt())).abs());
    }
    // Ellipse jet at a non-vertex point (lower branch of x^2/4 + y^2 = 1).
    let d = ellipse_branch_derivs(2.0, 1.0, 0.8);
    let jet = Jet4::new(0.8, [d[0], d[1], d[2], d[3], d[4]])?;
    let pts_a = jet::integrate_jet_ode(&surf, &jet, 0.1, 0.02)?;
    for &(x, y) in &pts_a {
        worst = worst.max((y + (1.0 - x * x / 4.0).sqrt()).abs());
    }
    // Uniqueness: a second jet of the same conic must agree on the overlap.
    let d2 = ellipse_branch_derivs(2.0, 1.0, 0.9);
    let jet2 = Jet4::new(0.9, [d2[0], d2[1], d2[2], d2[3], d2[4]])?;
    let pts_b = jet::integrate_jet_ode(&surf, &jet2, 0.1, 0.02)?;
    let mut overlap = 0.0f64;
    for &(x, y) in &pts_a {
        if x >= 0.80 && x <= 0.90 {
            for w in pts_b.windows(2) {
                if w[0].0 <= x && x <= w[1].0 {
                    let yb = w[0].1 + (w[1].1 - w[0].1) * (x - w[0].0) / (w[1].0 - w[0].0);
                    overlap = overlap.max((y - yb).abs());
                }
            }
        }
    }
    let value = worst.max(overlap);
    Ok(CriterionResult::new(
        13,
        "jet ODE conic reconstruction",
        value,
        1e-5,
        value < 1e-5,
        format!(
            "max reconstruction deviation {worst:.3e}, two-jet overlap gap {overlap:.3e}"
        ),
    ))
}

fn check_negative_controls() -> crate::Result<CriterionResult> {
    let oval = ConvexCurve::quartic_oval()?;
    let string_dev = strings::poritsky_check(&oval, &[1e-3], 50, 1e-6)?.entries[0].max_deviation;
    let l = oval.total_length();
    let incidence_res =
        incidence::tangent_incidence_check(&oval, 0.05 * l, 0.15 * l, 0.28 * l)?;
    let area_dev =
        outer::area_poritsky_check(&oval, 5e-4, &[1e-3], 40, 1e-6)?.entries[0].max_deviation;
    let margin = string_dev.min(incidence_res).min(area_dev);
    Ok(CriterionResult::new(
        14,
        "negative controls (quartic oval)",
        margin,
        1e-4,
        margin > 1e-4,
        format!(
            "quartic oval failure margins: string translation {string_dev:.3e}, \
             tangent incidence {incidence_res:.3e}, area translation {area_dev:.3e} (all must exceed 1e-4)"
        ),
    ))
}

/// Derivatives of the lower branch of x^2/a^2 + y^2/b^2 = 1 by implicit
/// differentiation (shared with the jet checks).
fn ellipse_branch_derivs(a: f64, b: f64, x: f64) -> [f64; 6] {
    let y = -b * (1.0 - x * x / (a * a)).sqrt();
    let q = b * b / (a * a);
    let y1 = -q * x / y;
    let y2 = (-q - y1 * y1) / y;
    let y3 = -3.0 * y1 * y2 / y;
    let y4 = -(3.0 * y2 * y2 + 4.0 * y1 * y3) / y;
    let y5 = -(10.0 * y2 * y3 + 5.0 * y1 * y4) / y;
    [y, y1, y2, y3, y4, y5]
}
