//! Taylor structure of the string-length defect Lambda(t), the sigma_n
//! constants, and the fourth-order jet ODE that reconstructs curves whose
//! string construction admits an invariant parameter.
//!
//! All jets are graph jets y = h(x) with b_k = h^(k)(x0) in a fixed chart;
//! on non-flat metrics that chart is the normal chart of the base point.

use crate::curve::ConvexCurve;
use crate::error::{Error, Result};
use crate::surface::Surface;
use crate::vec3::V3;

/// Fourth-order jet of a graph curve: b[k] = h^(k)(x).
#[derive(Debug, Clone, Copy)]
pub struct Jet4 {
    pub x: f64,
    pub b: [f64; 5],
}

impl Jet4 {
    pub fn new(x: f64, b: [f64; 5]) -> Result<Jet4> {
        let jet = Jet4 { x, b };
        if jet.kappa() <= 0.0 {
            return Err(Error::Convexity(format!(
                "jet has curvature {} <= 0 at its base",
                jet.kappa()
            )));
        }
        Ok(jet)
    }

    /// Euclidean-chart curvature at the jet base.
    pub fn kappa(&self) -> f64 {
        self.b[2] / (1.0 + self.b[1] * self.b[1]).powf(1.5)
    }
}

/// Estimated leading Taylor coefficients of Lambda(t) = L(O, B(t)) - L(A(t), O)
/// about the base point, in the normalized curvature^(2/3) parameter.
#[derive(Debug, Clone)]
pub struct LambdaTaylor {
    /// Coefficient estimates for t^k, k = 3 .. 3 + coefficients.len() - 1.
    pub coefficients: Vec<f64>,
    /// Per-coefficient extrapolation residuals (uncertainty scale).
    pub residuals: Vec<f64>,
    /// Whether the coefficient is resolved above its own residual.
    pub significant: Vec<bool>,
    /// Largest ladder abscissa used.
    pub t0: f64,
}

/// Evaluate Lambda at the dyadic ladder {t0 / 2^i, i = 0..levels} and
/// extrapolate f(t)/t^k with `levels` Richardson passes (each pass removes
/// one more power of the t^(k+1), t^(k+2), ... contamination). Returns the
/// estimate and the difference between the last two extrapolation levels as
/// an uncertainty scale. Deeper ladders trade contamination for roundoff at
/// the smallest node; 2-3 levels is the practical sweet spot.
fn richardson<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    t0: f64,
    k: i32,
    levels: usize,
) -> Result<(f64, f64)> {
    let n = levels + 1;
    let mut v = Vec::with_capacity(n);
    for i in 0..n {
        let t = t0 / 2f64.powi(i as i32);
        v.push(f(t)? / t.powi(k));
    }
    let mut prev = v[0];
    for l in 1..=levels {
        let f = 2f64.powi(l as i32);
        prev = v[0];
        for i in 0..(n - l) {
            v[i] = (f * v[i + 1] - v[i]) / (f - 1.0);
        }
    }
    Ok((v[0], (v[0] - prev).abs()))
}

/// Pick a ladder scale the curve can support: the requested t0, shrunk so
/// that the extreme nodes stay well inside the parameter range of the curve.
fn ladder_scale(curve: &ConvexCurve, requested: f64) -> Result<f64> {
    let mut t0 = requested;
    for _ in 0..40 {
        if curve.lambda_defect(t0).is_ok() {
            return Ok(t0);
        }
        t0 *= 0.8;
    }
    Err(Error::Domain(
        "curve cannot support any usable defect ladder near its base".into(),
    ))
}

/// Estimate the Taylor coefficients of Lambda(t) for t^3 .. t^order.
///
/// Coefficients are extracted lowest order first; a coefficient whose
/// estimate is not resolved above its extrapolation residual is treated as
/// zero in the remainder (subtracting an unresolved estimate would inject
/// its error, amplified by t^-k, into every later coefficient).
pub fn lambda_taylor(curve: &ConvexCurve, order: usize, t0: Option<f64>) -> Result<LambdaTaylor> {
    if order < 3 {
        return Err(Error::invalid("the defect expansion starts at order 3"));
    }
    let t0 = ladder_scale(curve, t0.unwrap_or(0.2))?;
    let mut kept: Vec<(i32, f64)> = Vec::new();
    let mut coefficients = Vec::new();
    let mut residuals = Vec::new();
    let mut significant = Vec::new();
    for k in 3..=(order as i32) {
        let rem = |t: f64| -> Result<f64> {
            let mut v = curve.lambda_defect(t)?;
            for &(kk, c) in &kept {
                v -= c * t.powi(kk);
            }
            Ok(v)
        };
        let (est, res) = richardson(rem, t0, k, 2)?;
        let is_significant = est.abs() > 4.0 * res && est.abs() > 1e-12;
        if is_significant {
            kept.push((k, est));
        }
        coefficients.push(est);
        residuals.push(res);
        significant.push(is_significant);
    }
    Ok(LambdaTaylor { coefficients, residuals, significant, t0 })
}

/// The universal constant multiplying b_n in the t^(n+1) defect coefficient:
/// sigma_n = (n-2)(n-3) / (6 (n+1)!) * ||w|| (||u|| kappa)^(-n), with
/// u = (1, b1) the chart tangent and w the projection of the second
/// derivative vector (0, b2) orthogonal to u. Vanishes for n = 3 and all
/// even n.
pub fn sigma_n_from_frame(norm_w: f64, norm_u: f64, kappa: f64, n: u32) -> f64 {
    if n == 3 || n % 2 == 0 {
        return 0.0;
    }
    let mut fact = 1.0;
    for i in 2..=(n + 1) {
        fact *= i as f64;
    }
    let nf = n as f64;
    (nf - 2.0) * (nf - 3.0) / (6.0 * fact) * norm_w * (norm_u * kappa).powi(-(n as i32))
}

/// sigma_n evaluated on the 2-jet part of a graph jet in a flat chart.
pub fn sigma_n(jet: &Jet4, n: u32) -> f64 {
    let norm_u = (1.0 + jet.b[1] * jet.b[1]).sqrt();
    let norm_w = jet.b[2].abs() / norm_u;
    sigma_n_from_frame(norm_w, norm_u, jet.kappa(), n)
}

/// Half-width of the trial graph domain: large enough for the defect ladder,
/// small enough that the degree-5 continuation stays convex.
fn trial_half_width(jet: &Jet4, b5: f64) -> f64 {
    let mut w = 1.2 / jet.kappa().max(1.0);
    let poly2 = |x: f64| {
        // h''(x) of the degree-5 continuation.
        jet.b[2] + jet.b[3] * x + jet.b[4] * x * x / 2.0 + b5 * x * x * x / 6.0
    };
    for _ in 0..60 {
        if poly2(w) > 0.0 && poly2(-w) > 0.0 && poly2(0.5 * w) > 0.0 && poly2(-0.5 * w) > 0.0 {
            return w;
        }
        w *= 0.8;
    }
    w
}

/// Build the degree-5 polynomial continuation of the jet as a convex graph
/// curve with the base at the jet point.
fn trial_curve(surface: &Surface, jet: &Jet4, b5: f64) -> Result<ConvexCurve> {
    let w = trial_half_width(jet, b5);
    let derivs = [jet.b[0], jet.b[1], jet.b[2], jet.b[3], jet.b[4], b5];
    let mut curve = ConvexCurve::graph(surface.clone(), &derivs, -w, w)?;
    curve.set_base_at_point(V3::xy(0.0, jet.b[0]))?;
    Ok(curve)
}

/// Estimate the t^6 defect coefficient of a curve (three-level Richardson
/// on Lambda / t^6); exposed for the jet solvers.
pub fn lambda6(curve: &ConvexCurve, t0: Option<f64>) -> Result<(f64, f64)> {
    let t0 = ladder_scale(curve, t0.unwrap_or(0.2))?;
    richardson(|t| curve.lambda_defect(t), t0, 6, 3)
}

/// Solve for the fifth derivative that kills the t^6 defect coefficient.
///
/// Lambda6 is affine in b5 (it depends on the curve only through its 5-jet
/// at the base); two trial continuations give the slope and intercept. The
/// measured slope is cross-checked against the closed form sigma_5.
pub fn solve_b5(surface: &Surface, jet: &Jet4) -> Result<f64> {
    let scale = jet.kappa();
    // Trial spread comparable to the curvature scale keeps the finite
    // difference well above the ladder noise.
    let b5_step = (scale * scale * scale).max(1.0);
    let c0 = trial_curve(surface, jet, 0.0)?;
    let c1 = trial_curve(surface, jet, b5_step)?;
    let t0 = ladder_scale(&c0, 0.2)?.min(ladder_scale(&c1, 0.2)?);
    let (l0, r0) = lambda6(&c0, Some(t0))?;
    let (l1, r1) = lambda6(&c1, Some(t0))?;
    let slope = (l1 - l0) / b5_step;
    let predicted = sigma_5_normalized(jet);
    if (slope / predicted - 1.0).abs() > 0.05 {
        return Err(Error::SelfCheck(format!(
            "defect slope {slope:.6e} disagrees with the closed form {predicted:.6e} \
             (ladder residuals {r0:.2e}, {r1:.2e})"
        )));
    }
    Ok(-l0 / slope)
}

/// The defect-coefficient slope d(Lambda6)/d(b5) in the normalized
/// curvature^(2/3) parameter used by `lambda_defect` (whose derivative at
/// the base is kappa): sigma_5 / (||w|| ||u||). The division converts the
/// frame-normalized constant to the chart derivative b5; validated
/// empirically to 4 digits over jets with mixed b1, b2.
pub fn sigma_5_normalized(jet: &Jet4) -> f64 {
    let norm_u = (1.0 + jet.b[1] * jet.b[1]).sqrt();
    let norm_w = jet.b[2].abs() / norm_u;
    sigma_n(jet, 5) / (norm_w * norm_u)
}

/// Integrate the jet-space system db_k = b_{k+1} dx (k = 0..3) closed by
/// db_4 = b5(jet) dx with classical RK4; returns (x, b0) samples from
/// -x_range to x_range about the jet base, including both endpoints.
pub fn integrate_jet_ode(
    surface: &Surface,
    jet0: &Jet4,
    x_range: f64,
    step: f64,
) -> Result<Vec<(f64, f64)>> {
    if !(x_range > 0.0 && step > 0.0 && step <= x_range) {
        return Err(Error::invalid("need 0 < step <= x_range"));
    }
    let n = (x_range / step).ceil() as usize;
    let h = x_range / n as f64;
    let rhs = |b: &[f64; 5]| -> Result<[f64; 5]> {
        let jet = Jet4::new(0.0, *b)?;
        let b5 = solve_b5(surface, &jet)?;
        Ok([b[1], b[2], b[3], b[4], b5])
    };
    let rk4 = |b: &[f64; 5], h: f64| -> Result<[f64; 5]> {
        let k1 = rhs(b)?;
        let mut s = *b;
        for i in 0..5 {
            s[i] = b[i] + 0.5 * h * k1[i];
        }
        let k2 = rhs(&s)?;
        for i in 0..5 {
            s[i] = b[i] + 0.5 * h * k2[i];
        }
        let k3 = rhs(&s)?;
        for i in 0..5 {
            s[i] = b[i] + h * k3[i];
        }
        let k4 = rhs(&s)?;
        let mut out = *b;
        for i in 0..5 {
            out[i] = b[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        Ok(out)
    };
    let mut forward = Vec::with_capacity(n + 1);
    let mut state = jet0.b;
    forward.push((jet0.x, state[0]));
    for i in 1..=n {
        state = rk4(&state, h)?;
        if state[2] <= 0.0 {
            break; // convexity lost: stop with the partial result
        }
        forward.push((jet0.x + h * i as f64, state[0]));
    }
    let mut backward = Vec::with_capacity(n);
    state = jet0.b;
    for i in 1..=n {
        state = rk4(&state, -h)?;
        if state[2] <= 0.0 {
            break;
        }
        backward.push((jet0.x - h * i as f64, state[0]));
    }
    backward.reverse();
    backward.extend(forward);
    Ok(backward)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;
    use crate::surface::MetricFn;

    /// Derivatives up to order 5 of y(x) on the ellipse x^2/a^2 + y^2/b^2 = 1
    /// (lower branch, convex as a graph), by implicit differentiation.
    fn ellipse_branch_derivs(a: f64, b: f64, x: f64) -> [f64; 6] {
        let y = -b * (1.0 - x * x / (a * a)).sqrt();
        let q = b * b / (a * a);
        // y y' = -q x ; then repeated differentiation.
        let y1 = -q * x / y;
        let y2 = (-q - y1 * y1) / y;
        let y3 = -3.0 * y1 * y2 / y;
        let y4 = -(3.0 * y2 * y2 + 4.0 * y1 * y3) / y;
        let y5 = -(10.0 * y2 * y3 + 5.0 * y1 * y4) / y;
        [y, y1, y2, y3, y4, y5]
    }

    #[test]
    fn sigma_constants() {
        let flat = Jet4::new(0.0, [0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(sigma_n(&flat, 3), 0.0);
        assert_eq!(sigma_n(&flat, 4), 0.0);
        assert!((sigma_n(&flat, 5) - 1.0 / 720.0).abs() < 1e-18);
        assert_eq!(sigma_n_from_frame(1.0, 1.0, 1.0, 6), 0.0);
        assert!((sigma_n_from_frame(1.0, 1.0, 1.0, 5) - 1.0 / 720.0).abs() < 1e-18);
    }

    #[test]
    fn jet_requires_convexity() {
        assert!(Jet4::new(0.0, [0.0, 0.0, -1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn circle_defect_coefficients_vanish() {
        let mut circle = ConvexCurve::circle(1.0).unwrap();
        circle.set_base_s(0.7);
        let lt = lambda_taylor(&circle, 6, Some(0.5)).unwrap();
        for (k, c) in lt.coefficients.iter().enumerate() {
            assert!(c.abs() < 1e-9, "t^{} coefficient {c:.3e}", k + 3);
            assert!(!lt.significant[k]);
        }
    }

    #[test]
    fn quintic_graph_sixth_coefficient() {
        let surf = Surface::euclidean();
        let curve = {
            let mut c =
                ConvexCurve::graph(surf, &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0], -0.5, 0.5).unwrap();
            c.set_base_at_point(V3::xy(0.0, 0.0)).unwrap();
            c
        };
        let lt = lambda_taylor(&curve, 6, None).unwrap();
        for k in 0..3 {
            assert!(
                !lt.significant[k],
                "spurious t^{} coefficient {:.3e}",
                k + 3,
                lt.coefficients[k]
            );
        }
        let c6 = lt.coefficients[3];
        assert!(
            (c6 * 720.0 - 1.0).abs() < 0.02,
            "720 * c6 = {} (residual {:.2e})",
            c6 * 720.0,
            lt.residuals[3]
        );
        assert!(lt.significant[3]);
    }

    #[test]
    fn sixth_coefficient_is_affine_in_b5() {
        let surf = Surface::euclidean();
        let jet = Jet4::new(0.0, [0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        let mut vals = Vec::new();
        for b5 in [0.0, 0.5, 1.0] {
            let c = trial_curve(&surf, &jet, b5).unwrap();
            vals.push(lambda6(&c, None).unwrap().0);
        }
        let slope = vals[2] - vals[0];
        // Three-point collinearity.
        let mid = 0.5 * (vals[0] + vals[2]);
        assert!(
            (vals[1] - mid).abs() < 0.01 * slope.abs(),
            "collinearity residual {:.3e}",
            (vals[1] - mid).abs()
        );
        assert!((slope * 720.0 - 1.0).abs() < 0.02, "slope * 720 = {}", slope * 720.0);
    }

    #[test]
    fn b5_solution_on_symmetric_jets_is_zero() {
        let surf = Surface::euclidean();
        let circle_jet = Jet4::new(0.0, [0.0, 0.0, 1.0, 0.0, 3.0]).unwrap();
        let b5 = solve_b5(&surf, &circle_jet).unwrap();
        assert!(b5.abs() < 1e-4, "circle jet b5 = {b5:.3e}");
        // Ellipse vertex jet (reflection symmetry).
        let d = ellipse_branch_derivs(2.0, 1.0, 0.0);
        let jet = Jet4::new(0.0, [d[0], d[1], d[2], d[3], d[4]]).unwrap();
        let b5 = solve_b5(&surf, &jet).unwrap();
        assert!(b5.abs() < 1e-4, "ellipse vertex b5 = {b5:.3e}");
    }

    #[test]
    fn b5_recovers_the_conic_fifth_derivative() {
        let surf = Surface::euclidean();
        let d = ellipse_branch_derivs(2.0, 1.0, 0.8);
        let jet = Jet4::new(0.8, [d[0], d[1], d[2], d[3], d[4]]).unwrap();
        let b5 = solve_b5(&surf, &jet).unwrap();
        assert!(
            (b5 / d[5] - 1.0).abs() < 1e-3,
            "b5 = {b5:.6e} vs true fifth derivative {:.6e}",
            d[5]
        );
    }

    #[test]
    fn jet_ode_reconstructs_the_circle() {
        let surf = Surface::euclidean();
        let jet = Jet4::new(0.0, [0.0, 0.0, 1.0, 0.0, 3.0]).unwrap();
        let pts = integrate_jet_ode(&surf, &jet, 0.1, 0.02).unwrap();
        assert!(pts.len() >= 11);
        let mut worst = 0.0f64;
        for &(x, y) in &pts {
            worst = worst.max((y - (1.0 - (1.0 - x * x).sqrt())).abs());
        }
        assert!(worst < 1e-5, "circle deviation {worst:.3e}");
    }

    #[test]
    fn jet_ode_reconstructs_the_ellipse() {
        let surf = Surface::euclidean();
        let d = ellipse_branch_derivs(2.0, 1.0, 0.8);
        let jet = Jet4::new(0.8, [d[0], d[1], d[2], d[3], d[4]]).unwrap();
        let pts = integrate_jet_ode(&surf, &jet, 0.1, 0.02).unwrap();
        let mut worst = 0.0f64;
        for &(x, y) in &pts {
            let truth = -(1.0 - x * x / 4.0).sqrt();
            worst = worst.max((y - truth).abs());
        }
        assert!(worst < 1e-5, "ellipse deviation {worst:.3e}");
    }

    #[test]
    fn reconstructions_from_two_jets_agree_on_the_overlap() {
        let surf = Surface::euclidean();
        let mk = |x0: f64| {
            let d = ellipse_branch_derivs(2.0, 1.0, x0);
            Jet4::new(x0, [d[0], d[1], d[2], d[3], d[4]]).unwrap()
        };
        let a = integrate_jet_ode(&surf, &mk(0.7), 0.12, 0.02).unwrap();
        let b = integrate_jet_ode(&surf, &mk(0.9), 0.12, 0.02).unwrap();
        // Compare by interpolating b at a's abscissae in the overlap.
        let interp = |pts: &[(f64, f64)], x: f64| -> Option<f64> {
            let i = pts.iter().position(|&(px, _)| px >= x)?;
            if i == 0 {
                return None;
            }
            let (x0, y0) = pts[i - 1];
            let (x1, y1) = pts[i];
            Some(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
        };
        let mut compared = 0;
        for &(x, y) in &a {
            if x >= 0.79 && x <= 0.81 {
                if let Some(yb) = interp(&b, x) {
                    assert!((y - yb).abs() < 1e-5, "overlap gap {:.3e} at x = {x}", (y - yb).abs());
                    compared += 1;
                }
            }
        }
        assert!(compared > 0, "no overlap samples compared");
    }

    #[test]
    fn even_order_jet_perturbations_leave_the_sixth_coefficient() {
        // Adding b4 keeps the b5 = 1 defect coefficient: sigma_4 = 0 and the
        // base jet with b5 = 0 is an even (symmetric) curve, so the t^6
        // coefficient stays sigma_5 * b5.
        let surf = Surface::euclidean();
        let base = trial_curve(&surf, &Jet4::new(0.0, [0.0, 0.0, 1.0, 0.0, 0.0]).unwrap(), 1.0)
            .unwrap();
        let bumped =
            trial_curve(&surf, &Jet4::new(0.0, [0.0, 0.0, 1.0, 0.0, 0.4]).unwrap(), 1.0).unwrap();
        let (c6a, ra) = lambda6(&base, None).unwrap();
        let (c6b, rb) = lambda6(&bumped, None).unwrap();
        let noise = (ra + rb).max(0.01 * c6a.abs());
        assert!(
            (c6a - c6b).abs() < noise,
            "t^6 coefficient moved by {:.3e} (noise {noise:.3e})",
            (c6a - c6b).abs()
        );
    }

    #[test]
    fn metric_perturbations_of_high_order_do_not_move_the_coefficient() {
        // A conformal factor vanishing to order 6 at the base leaves the
        // t^6 defect coefficient within ladder noise.
        let metric: MetricFn = Arc::new(|x: f64, y: f64| {
            let r2 = x * x + y * y;
            let f = 1.0 + 0.4 * r2 * r2 * r2;
            [[f, 0.0], [0.0, f]]
        });
        let curved = Surface::general_chart(metric, 1e-3).unwrap();
        let flat = Surface::euclidean();
        let jet = Jet4::new(0.0, [0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        let cf = trial_curve(&flat, &jet, 1.0).unwrap();
        let cc = trial_curve(&curved, &jet, 1.0).unwrap();
        let (c6f, rf) = lambda6(&cf, Some(0.15)).unwrap();
        let (c6c, rc) = lambda6(&cc, Some(0.15)).unwrap();
        let noise = (rf + rc).max(0.02 * c6f.abs());
        assert!(
            (c6f - c6c).abs() < noise,
            "flat {c6f:.4e} vs curved {c6c:.4e} (noise {noise:.3e})"
        );
    }
}
