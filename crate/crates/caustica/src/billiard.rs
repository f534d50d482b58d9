//! Billiard ball maps inside a convex curve, their near-boundary structure
//! in (s, y) coordinates with y = 1 - cos(angle), and the square-root
//! normal-form coordinates that straighten the map near the boundary.

use crate::curve::ConvexCurve;
use crate::error::{Error, Result};
use crate::numerics;
use crate::surface::{SurfaceKind, UnitTangent};
use std::sync::Arc;

/// Phase point on the boundary: arclength plus the chord angle, carried in
/// either the angle representation phi or y = 1 - cos(phi).
#[derive(Debug, Clone, Copy)]
pub struct PhasePoint {
    pub s: f64,
    phi: f64,
}

impl PhasePoint {
    pub fn from_sphi(s: f64, phi: f64) -> Result<PhasePoint> {
        if !(0.0..std::f64::consts::PI).contains(&phi) {
            return Err(Error::invalid(format!("phi must lie in [0, pi), got {phi}")));
        }
        Ok(PhasePoint { s, phi })
    }

    pub fn from_sy(s: f64, y: f64) -> Result<PhasePoint> {
        if !(0.0..2.0).contains(&y) {
            return Err(Error::invalid(format!("y must lie in [0, 2), got {y}")));
        }
        Ok(PhasePoint { s, phi: (1.0 - y).acos() })
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn y(&self) -> f64 {
        1.0 - self.phi.cos()
    }
}

/// One bounce: from the boundary point at arclength `s`, shoot a chord at
/// angle `phi` (0, pi) from the forward tangent into the curve, and return
/// the arrival arclength and arrival angle.
pub fn chord_forward(curve: &ConvexCurve, s: f64, phi: f64) -> Result<(f64, f64)> {
    if !(phi > 0.0 && phi < std::f64::consts::PI) {
        return Err(Error::invalid(format!(
            "chord angle must lie strictly inside (0, pi), got {phi}"
        )));
    }
    if !curve.is_closed() {
        return Err(Error::Unsupported("the billiard map needs a closed table".into()));
    }
    let surf = curve.surface();
    let t = curve.tangent_at(s);
    let dir = surf.rotate_tangent(t.point, t.vector, phi);
    let g = UnitTangent { point: t.point, vector: dir };
    let total = curve.total_length();
    let kappa = curve.curvature_at(s).max(1e-9);

    // Signed incidence of a boundary point with the chord geodesic.
    let incidence: Box<dyn Fn(f64) -> Result<f64>> = match surf.kind() {
        SurfaceKind::GeneralChart => {
            return Err(Error::Unsupported(
                "billiard chords are implemented on the constant-curvature models".into(),
            ))
        }
        _ => {
            let form = surf.geodesic_form(g)?;
            let surf = surf.clone();
            let curve2 = curve.clone();
            Box::new(move |sig: f64| surf.form_eval(form, curve2.point_at(sig)))
        }
    };
    // Just ahead of the launch point the boundary lies right of the chord
    // (incidence < 0); the arrival point is the next zero crossing.
    let seed = (2.0 * phi / kappa).min(0.45 * total);
    let mut lo = (0.05 * seed).max(1e-7);
    let mut guard = 0;
    while incidence(s + lo)? >= 0.0 {
        lo *= 0.5;
        guard += 1;
        if guard > 60 {
            return Err(Error::construction("chord leaves the table immediately"));
        }
    }
    let mut hi = seed.max(2.0 * lo);
    while incidence(s + hi)? < 0.0 {
        hi *= 1.25;
        if hi > 0.995 * total {
            hi = 0.9995 * total;
            if incidence(s + hi)? < 0.0 {
                return Err(Error::construction("no chord arrival found on the boundary"));
            }
            break;
        }
    }
    let mut f = |d: f64| incidence(s + d).unwrap_or(f64::NAN);
    let d = numerics::brent(&mut f, lo, hi, 1e-14 * total, 200)?;
    let s2 = s + d;
    // Arrival direction of the chord and the reflected angle.
    let q = curve.point_at(s2);
    let (back, _) = surf.log_map(q, t.point)?;
    let u = -back; // direction of travel at arrival
    let t2 = curve.tangent_at(s2);
    // The chord arrives turned clockwise from the forward tangent by the
    // reflected angle: psi = -oriented_angle(tangent, direction of travel).
    let psi = -surf.oriented_angle(q, t2.vector, u);
    if !(psi > 0.0 && psi < std::f64::consts::PI) {
        return Err(Error::construction(format!(
            "arrival angle {psi:.4} outside (0, pi); degenerate chord"
        )));
    }
    Ok((s2, psi))
}

/// All transversal intersections of an oriented geodesic with the curve:
/// (arclength on the curve, signed flow distance along the geodesic).
pub fn geodesic_curve_intersections(
    curve: &ConvexCurve,
    g: UnitTangent,
) -> Result<Vec<(f64, f64)>> {
    let surf = curve.surface();
    if surf.kind() == SurfaceKind::GeneralChart {
        return Err(Error::Unsupported(
            "geodesic-curve intersections are implemented on the constant-curvature models"
                .into(),
        ));
    }
    let form = surf.geodesic_form(g)?;
    let total = curve.total_length();
    let n = 512usize;
    let vals: Vec<f64> = (0..=n)
        .map(|i| surf.form_eval(form, curve.point_at(total * i as f64 / n as f64)).unwrap())
        .collect();
    let mut out = Vec::new();
    for i in 0..n {
        if vals[i] * vals[i + 1] > 0.0 {
            continue;
        }
        if vals[i + 1] == 0.0 && i + 1 < n {
            continue; // counted by the next interval
        }
        let (a, b) = (total * i as f64 / n as f64, total * (i + 1) as f64 / n as f64);
        let mut f = |sig: f64| surf.form_eval(form, curve.point_at(sig)).unwrap_or(f64::NAN);
        let s_star = numerics::brent(&mut f, a, b, 1e-14 * total, 200)?;
        let q = curve.point_at(s_star);
        let t = match surf.log_map(g.point, q) {
            Ok((dir, dist)) => {
                if surf.inner(g.point, dir, g.vector) >= 0.0 {
                    dist
                } else {
                    -dist
                }
            }
            Err(_) => 0.0, // the basepoint itself lies on the curve
        };
        out.push((s_star, t));
    }
    out.sort_by(|a, b| a.1.total_cmp(&b.1));
    out.dedup_by(|a, b| (a.1 - b.1).abs() < 1e-10 * (1.0 + total));
    Ok(out)
}

/// Reflect an oriented geodesic off the curve: find the first transversal
/// intersection ahead of `g`, and return the outgoing geodesic after the
/// tangent-line reflection there.
pub fn reflect(curve: &ConvexCurve, g: UnitTangent) -> Result<UnitTangent> {
    let surf = curve.surface();
    let hits = geodesic_curve_intersections(curve, g)?;
    let s_star = hits
        .iter()
        .find(|&&(_, t)| t > 1e-9)
        .map(|&(s, _)| s)
        .ok_or_else(|| {
            Error::construction("the oriented geodesic does not hit the curve ahead")
        })?;
    let q = curve.point_at(s_star);
    let (back, _) = surf.log_map(q, g.point)?;
    let u = -back;
    let t = curve.tangent_at(s_star);
    // Transversality check.
    let angle = surf.angle(q, t.vector, u);
    if angle < 1e-9 || (std::f64::consts::PI - angle) < 1e-9 {
        return Err(Error::construction("tangential incidence; reflection undefined"));
    }
    Ok(UnitTangent { point: q, vector: surf.reflect_across(q, u, t.vector) })
}

/// A near-boundary map in (s, y) with its width function w(s); x-axis (y=0)
/// is a line of fixed points.
pub struct WeaklyBilliardMap {
    forward: Arc<dyn Fn(PhasePoint) -> Result<PhasePoint> + Send + Sync>,
    w: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    /// Period in s (0 for non-periodic toy maps).
    pub s_period: f64,
}

impl WeaklyBilliardMap {
    pub fn forward(&self, q: PhasePoint) -> Result<PhasePoint> {
        if q.y() == 0.0 {
            return Ok(q); // fixed line
        }
        (self.forward)(q)
    }

    pub fn w(&self, s: f64) -> f64 {
        (self.w)(s)
    }

    /// d w / d s by central differences.
    pub fn w_deriv(&self, s: f64) -> f64 {
        let h = 1e-4;
        let mut f = |x: f64| (self.w)(x);
        numerics::deriv_central4(&mut f, s, h)
    }

    /// The billiard ball map of a convex table in (s, y), with
    /// w(s) = 2 sqrt(2) / kappa(s); realized by geometric reflection.
    pub fn billiard(curve: ConvexCurve) -> Result<WeaklyBilliardMap> {
        if !curve.is_closed() {
            return Err(Error::Unsupported("the billiard map needs a closed table".into()));
        }
        let s_period = curve.total_length();
        let c1 = curve.clone();
        let forward = move |q: PhasePoint| -> Result<PhasePoint> {
            let (s2, psi) = chord_forward(&c1, q.s, q.phi())?;
            PhasePoint::from_sphi(s2, psi)
        };
        let w = move |s: f64| 2.0 * 2.0f64.sqrt() / curve.curvature_at(s);
        Ok(WeaklyBilliardMap { forward: Arc::new(forward), w: Arc::new(w), s_period })
    }

    /// A toy map given directly in normal-form coordinates with w == 1:
    /// (x, y) -> (x + sqrt(y), y).
    pub fn toy_sqrt() -> WeaklyBilliardMap {
        let forward = |q: PhasePoint| -> Result<PhasePoint> {
            PhasePoint::from_sy(q.s + q.y().sqrt(), q.y())
        };
        WeaklyBilliardMap { forward: Arc::new(forward), w: Arc::new(|_| 1.0), s_period: 0.0 }
    }
}

/// The square-root normal-form chart: X(x) = integral of w^(-2/3),
/// Y(x, y) = w^(2/3)(x) y.
pub struct LazutkinChart {
    x_of: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    x_inv: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    w: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl LazutkinChart {
    /// Chart for a curve-backed map: X is the curvature^(2/3) parameter
    /// scaled by (2 sqrt 2)^(-2/3), via the curve's cached quadrature table.
    pub fn for_curve(curve: &ConvexCurve) -> LazutkinChart {
        let scale = (2.0 * 2.0f64.sqrt()).powf(-2.0 / 3.0);
        let c1 = curve.clone();
        let c2 = curve.clone();
        let c3 = curve.clone();
        LazutkinChart {
            x_of: Arc::new(move |s| scale * c1.lazutkin_param(s, false)),
            x_inv: Arc::new(move |x| c2.s_from_lazutkin(x / scale, false)),
            w: Arc::new(move |s| 2.0 * 2.0f64.sqrt() / c3.curvature_at(s)),
        }
    }

    /// Chart for an arbitrary positive width function, X by adaptive
    /// quadrature from 0.
    pub fn for_w(w: Arc<dyn Fn(f64) -> f64 + Send + Sync>) -> LazutkinChart {
        let w1 = w.clone();
        let x_of = move |x: f64| {
            let mut f = |z: f64| w1(z).powf(-2.0 / 3.0);
            if x >= 0.0 {
                numerics::quad_adaptive(&mut f, 0.0, x, 1e-12).unwrap_or(f64::NAN)
            } else {
                -numerics::quad_adaptive(&mut f, x, 0.0, 1e-12).unwrap_or(f64::NAN)
            }
        };
        let x_of = Arc::new(x_of);
        let x_of2 = x_of.clone();
        let w2 = w.clone();
        // Invert X by Newton (X' = w^(-2/3) > 0).
        let x_inv = move |target: f64| {
            let mut s = target;
            for _ in 0..60 {
                let err = x_of2(s) - target;
                if err.abs() < 1e-14 * (1.0 + target.abs()) {
                    break;
                }
                s -= err * w2(s).powf(2.0 / 3.0);
            }
            s
        };
        LazutkinChart { x_of, x_inv: Arc::new(x_inv), w }
    }

    pub fn x(&self, s: f64) -> f64 {
        (self.x_of)(s)
    }

    pub fn s_of_x(&self, x: f64) -> f64 {
        (self.x_inv)(x)
    }

    pub fn y_cap(&self, s: f64, y: f64) -> f64 {
        (self.w)(s).powf(2.0 / 3.0) * y
    }

    pub fn y_of_cap(&self, s: f64, y_cap: f64) -> f64 {
        y_cap / (self.w)(s).powf(2.0 / 3.0)
    }

    /// Chart image of a phase point.
    pub fn to_chart(&self, q: PhasePoint) -> (f64, f64) {
        (self.x(q.s), self.y_cap(q.s, q.y()))
    }
}

/// Fit report of the near-boundary normal form
/// (X, Y) -> (X + sqrt(Y) + O(Y), Y + o(Y^(3/2))).
#[derive(Debug, Clone)]
pub struct NormalFormReport {
    /// Fitted exponent of the X-step against Y (expect 1/2).
    pub slope: f64,
    /// Fitted coefficient of the X-step at the expected exponent (expect 1).
    pub coeff: f64,
    /// Fitted exponent of |Delta Y| against Y, when Delta Y is nonzero.
    pub dy_exponent: Option<f64>,
    /// Ratio of the measured y-drift coefficient to -(2/3) w'(s), when
    /// w' is nonzero (refined drift term).
    pub f2_ratio: Option<f64>,
    /// RMS residual of the log-log X-step fit.
    pub residual: f64,
}

/// Sample the map over logarithmically spaced Y values at base arclength
/// `s0` and fit the normal-form exponents.
pub fn normal_form_check(
    map: &WeaklyBilliardMap,
    chart: &LazutkinChart,
    s0: f64,
    y_range: (f64, f64),
    n_samples: usize,
) -> Result<NormalFormReport> {
    if n_samples < 12 {
        return Err(Error::invalid("exponent fits need at least 12 samples"));
    }
    let (y_lo, y_hi) = y_range;
    if !(y_lo > 0.0 && y_hi > y_lo && y_hi < 2.0) {
        return Err(Error::invalid("bad Y range"));
    }
    let mut ln_y = Vec::new();
    let mut ln_dx = Vec::new();
    let mut ln_dy = Vec::new();
    let mut drift_coeffs = Vec::new();
    for i in 0..n_samples {
        let y_cap = y_lo * (y_hi / y_lo).powf(i as f64 / (n_samples - 1) as f64);
        let y = chart.y_of_cap(s0, y_cap);
        let q = PhasePoint::from_sy(s0, y)?;
        let q2 = map.forward(q)?;
        let (x1, yy1) = chart.to_chart(q);
        let (x2, yy2) = chart.to_chart(q2);
        let dx = x2 - x1;
        if dx <= 0.0 {
            return Err(Error::construction("X-step not positive; outside the twist regime"));
        }
        ln_y.push(yy1.ln());
        ln_dx.push(dx.ln());
        let dy = yy2 - yy1;
        if dy.abs() > 1e-14 * yy1 {
            ln_dy.push((yy1.ln(), dy.abs().ln()));
        }
        // Raw y-drift against y^(3/2) for the refined coefficient.
        let dyraw = q2.y() - q.y();
        drift_coeffs.push(dyraw / q.y().powf(1.5));
    }
    let (slope, icept) = numerics::line_fit(&ln_y, &ln_dx);
    let residual = ln_y
        .iter()
        .zip(&ln_dx)
        .map(|(x, y)| (y - (slope * x + icept)).powi(2))
        .sum::<f64>()
        .sqrt()
        / (ln_y.len() as f64).sqrt();
    // Coefficient at the theoretical exponent 1/2: mean of dx / sqrt(Y).
    let coeff = ln_y
        .iter()
        .zip(&ln_dx)
        .map(|(ly, ldx)| (ldx - 0.5 * ly).exp())
        .sum::<f64>()
        / ln_y.len() as f64;
    let dy_exponent = if ln_dy.len() >= n_samples / 2 {
        let xs: Vec<f64> = ln_dy.iter().map(|v| v.0).collect();
        let ys: Vec<f64> = ln_dy.iter().map(|v| v.1).collect();
        Some(numerics::line_fit(&xs, &ys).0)
    } else {
        None
    };
    let wp = map.w_deriv(s0);
    let f2_ratio = if wp.abs() > 1e-6 {
        // The drift coefficient converges to -(2/3) w' as y -> 0; use the
        // smallest-y estimate refined by Richardson over the smallest pair.
        let c0 = drift_coeffs[0];
        let c1 = drift_coeffs[1];
        // y-spacing is geometric with known ratio; the correction is O(y^(1/2)).
        let r = (y_hi / y_lo).powf(1.0 / (n_samples - 1) as f64);
        let q = r.powf(0.5);
        let extrap = (q * c0 - c1) / (q - 1.0);
        Some(extrap / (-2.0 / 3.0 * wp))
    } else {
        None
    };
    Ok(NormalFormReport { slope, coeff, dy_exponent, f2_ratio, residual })
}

/// Orbit record in chart coordinates.
#[derive(Debug, Clone)]
pub struct OrbitRecord {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Number of steps taken before X exceeded the bound (or the budget).
    pub m: usize,
    pub budget_hit: bool,
}

/// Iterate the map from `q0` until the chart X-coordinate advances past
/// `delta`, recording (X_j, Y_j).
pub fn orbit(
    map: &WeaklyBilliardMap,
    chart: &LazutkinChart,
    q0: PhasePoint,
    delta: f64,
    budget: usize,
) -> Result<OrbitRecord> {
    let (x0, y0) = chart.to_chart(q0);
    let mut xs = vec![x0];
    let mut ys = vec![y0];
    let mut q = q0;
    let mut budget_hit = false;
    loop {
        if xs.len() > budget {
            budget_hit = true;
            break;
        }
        if q.y() == 0.0 {
            // Fixed line: the orbit never advances.
            budget_hit = true;
            break;
        }
        let q2 = map.forward(q)?;
        let (x, y) = chart.to_chart(q2);
        if x - x0 > delta {
            break;
        }
        xs.push(x);
        ys.push(y);
        q = q2;
    }
    let m = xs.len() - 1;
    Ok(OrbitRecord { xs, ys, m, budget_hit })
}

/// Quantitative orbit bounds: alpha-hat = max |ln(Y_j / Y_0)| and the
/// smallest beta-hat with j exp(-beta) sqrt(Y_0) <= X_j - X_0 for all j.
#[derive(Debug, Clone, Copy)]
pub struct PlogStats {
    pub alpha_hat: f64,
    pub beta_hat: f64,
}

pub fn plog_bounds_check(rec: &OrbitRecord) -> PlogStats {
    let y0 = rec.ys[0];
    let x0 = rec.xs[0];
    let mut alpha = 0.0f64;
    let mut beta = 0.0f64;
    for j in 1..rec.xs.len() {
        alpha = alpha.max((rec.ys[j] / y0).ln().abs());
        let need = (j as f64 * y0.sqrt() / (rec.xs[j] - x0)).ln();
        beta = beta.max(need);
    }
    PlogStats { alpha_hat: alpha, beta_hat: beta.max(0.0) }
}
