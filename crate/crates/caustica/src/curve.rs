//! Convex curves on a surface: parametrizations, arclength tables, geodesic
//! curvature, the curvature^(2/3) parameter, tangent geodesics and their
//! intersections, and the string length function
//! L(A, B) = |A C| + |B C| - arc(A, B).
//!
//! Public positions along a curve are arclength values `s` measured from the
//! curve's base point; for closed curves `s` wraps modulo the perimeter.

use crate::error::{Error, Result};
use crate::numerics;
use crate::surface::{Surface, SurfaceKind, UnitTangent};
use crate::vec3::V3;
use once_cell::sync::OnceCell;
use std::sync::Arc;

/// Analytic parametrization of a curve in model coordinates.
///
/// `velocity` and `accel` are chart/ambient derivatives with respect to the
/// raw parameter; `accel` has a finite-difference default for families where
/// the closed form is unpleasant.
pub trait CurveEval: Send + Sync {
    fn point(&self, u: f64) -> V3;
    fn velocity(&self, u: f64) -> V3;
    fn accel(&self, u: f64) -> V3 {
        let (a, b) = self.domain();
        let h = 1e-5 * (b - a).max(1e-2);
        let vm2 = self.velocity(u - 2.0 * h);
        let vm1 = self.velocity(u - h);
        let vp1 = self.velocity(u + h);
        let vp2 = self.velocity(u + 2.0 * h);
        (vm2 - vp2 + (vp1 - vm1) * 8.0) / (12.0 * h)
    }
    /// Raw parameter interval. For closed curves this is one full period.
    fn domain(&self) -> (f64, f64);
    fn closed(&self) -> bool;
}

// ----------------------------------------------------------------------
// Curve families
// ----------------------------------------------------------------------

/// Euclidean circle of radius r centered at `center`, counterclockwise.
pub struct Circle {
    pub center: V3,
    pub r: f64,
}

impl CurveEval for Circle {
    fn point(&self, u: f64) -> V3 {
        self.center + V3::xy(self.r * u.cos(), self.r * u.sin())
    }
    fn velocity(&self, u: f64) -> V3 {
        V3::xy(-self.r * u.sin(), self.r * u.cos())
    }
    fn accel(&self, u: f64) -> V3 {
        V3::xy(-self.r * u.cos(), -self.r * u.sin())
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, 2.0 * std::f64::consts::PI)
    }
    fn closed(&self) -> bool {
        true
    }
}

/// Euclidean ellipse x^2/a^2 + y^2/b^2 = 1, counterclockwise.
pub struct Ellipse {
    pub a: f64,
    pub b: f64,
}

impl CurveEval for Ellipse {
    fn point(&self, u: f64) -> V3 {
        V3::xy(self.a * u.cos(), self.b * u.sin())
    }
    fn velocity(&self, u: f64) -> V3 {
        V3::xy(-self.a * u.sin(), self.b * u.cos())
    }
    fn accel(&self, u: f64) -> V3 {
        V3::xy(-self.a * u.cos(), -self.b * u.sin())
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, 2.0 * std::f64::consts::PI)
    }
    fn closed(&self) -> bool {
        true
    }
}

/// Graph curve y = h(x) with h a polynomial in the power basis
/// (`poly[k]` multiplies x^k), over a chart surface.
pub struct Graph {
    pub poly: Vec<f64>,
    pub x_lo: f64,
    pub x_hi: f64,
}

impl Graph {
    /// Build from derivative data: h^(k)(0) = derivs[k].
    pub fn from_derivatives(derivs: &[f64], x_lo: f64, x_hi: f64) -> Graph {
        let mut poly = Vec::with_capacity(derivs.len());
        let mut fact = 1.0;
        for (k, &d) in derivs.iter().enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            poly.push(d / fact);
        }
        Graph { poly, x_lo, x_hi }
    }

    pub fn h(&self, x: f64) -> f64 {
        self.poly.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn dh(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for (k, &c) in self.poly.iter().enumerate().skip(1).rev() {
            acc = acc * x + k as f64 * c;
        }
        acc
    }

    pub fn d2h(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for (k, &c) in self.poly.iter().enumerate().skip(2).rev() {
            acc = acc * x + (k * (k - 1)) as f64 * c;
        }
        acc
    }
}

impl CurveEval for Graph {
    fn point(&self, u: f64) -> V3 {
        V3::xy(u, self.h(u))
    }
    fn velocity(&self, u: f64) -> V3 {
        V3::xy(1.0, self.dh(u))
    }
    fn accel(&self, u: f64) -> V3 {
        V3::xy(0.0, self.d2h(u))
    }
    fn domain(&self) -> (f64, f64) {
        (self.x_lo, self.x_hi)
    }
    fn closed(&self) -> bool {
        false
    }
}

/// The oval x^4 + y^4 = 1, parametrized radially: r(phi) (cos phi, sin phi)
/// with r = (cos^4 + sin^4)^(-1/4). Convex, with curvature vanishing at the
/// four axis points; it is not a conic, which makes it the stock negative
/// control for conic-only identities.
pub struct QuarticOval;

impl QuarticOval {
    fn r(phi: f64) -> (f64, f64, f64) {
        // f = cos^4 + sin^4 = 1 - sin^2(2 phi)/2; returns (r, r', r'').
        let s2 = (2.0 * phi).sin();
        let s4 = (4.0 * phi).sin();
        let c4 = (4.0 * phi).cos();
        let f = 1.0 - 0.5 * s2 * s2;
        let fp = -s4;
        let fpp = -4.0 * c4;
        let r = f.powf(-0.25);
        let rp = -0.25 * f.powf(-1.25) * fp;
        let rpp = 0.3125 * f.powf(-2.25) * fp * fp - 0.25 * f.powf(-1.25) * fpp;
        (r, rp, rpp)
    }
}

impl CurveEval for QuarticOval {
    fn point(&self, u: f64) -> V3 {
        let (r, _, _) = Self::r(u);
        V3::xy(r * u.cos(), r * u.sin())
    }
    fn velocity(&self, u: f64) -> V3 {
        let (r, rp, _) = Self::r(u);
        let (s, c) = u.sin_cos();
        V3::xy(rp * c - r * s, rp * s + r * c)
    }
    fn accel(&self, u: f64) -> V3 {
        let (r, rp, rpp) = Self::r(u);
        let (s, c) = u.sin_cos();
        V3::xy(rpp * c - 2.0 * rp * s - r * c, rpp * s + 2.0 * rp * c - r * s)
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, 2.0 * std::f64::consts::PI)
    }
    fn closed(&self) -> bool {
        true
    }
}

/// Spherical curve given as an ellipse in an orthonormal frame:
/// p(u) = R (a_max cos u, b_max sin u, w(u)) with w = sign * sqrt(1 - ...).
/// Produced by the spherical conic constructor.
pub struct SphereFrameCurve {
    pub frame: [V3; 3],
    pub a_max: f64,
    pub b_max: f64,
    pub w_sign: f64,
}

impl SphereFrameCurve {
    fn uvw(&self, t: f64) -> ([f64; 3], [f64; 3], [f64; 3]) {
        let (s, c) = t.sin_cos();
        let u = self.a_max * c;
        let v = self.b_max * s;
        let du = -self.a_max * s;
        let dv = self.b_max * c;
        let ddu = -u;
        let ddv = -v;
        let w2 = (1.0 - u * u - v * v).max(1e-300);
        let w = self.w_sign * w2.sqrt();
        let dw = -(u * du + v * dv) / w;
        let ddw = -(du * du + u * ddu + dv * dv + v * ddv + dw * dw) / w;
        ([u, v, w], [du, dv, dw], [ddu, ddv, ddw])
    }

    fn assemble(&self, c: [f64; 3]) -> V3 {
        self.frame[0] * c[0] + self.frame[1] * c[1] + self.frame[2] * c[2]
    }
}

impl CurveEval for SphereFrameCurve {
    fn point(&self, t: f64) -> V3 {
        let (p, _, _) = self.uvw(t);
        self.assemble(p)
    }
    fn velocity(&self, t: f64) -> V3 {
        let (_, d, _) = self.uvw(t);
        self.assemble(d)
    }
    fn accel(&self, t: f64) -> V3 {
        let (_, _, dd) = self.uvw(t);
        self.assemble(dd)
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, 2.0 * std::f64::consts::PI)
    }
    fn closed(&self) -> bool {
        true
    }
}

/// Hyperbolic curve: an ellipse in Minkowski-orthonormal coordinates on the
/// hyperboloid, projected to the Poincaré disk. Produced by the hyperbolic
/// conic constructor.
pub struct HyperbolicFrameCurve {
    /// Minkowski-orthonormal basis: v1, v2 spacelike, v3 timelike (future).
    pub frame: [V3; 3],
    pub a_max: f64,
    pub b_max: f64,
}

impl HyperbolicFrameCurve {
    fn ambient(&self, t: f64) -> (V3, V3, V3) {
        let (s, c) = t.sin_cos();
        let a = self.a_max * c;
        let b = self.b_max * s;
        let da = -self.a_max * s;
        let db = self.b_max * c;
        let w = (1.0 + a * a + b * b).sqrt();
        let dw = (a * da + b * db) / w;
        let ddw = (da * da - a * a + db * db - b * b - dw * dw) / w;
        let x = self.frame[0] * a + self.frame[1] * b + self.frame[2] * w;
        let dx = self.frame[0] * da + self.frame[1] * db + self.frame[2] * dw;
        let ddx = self.frame[0] * (-a) + self.frame[1] * (-b) + self.frame[2] * ddw;
        (x, dx, ddx)
    }
}

impl CurveEval for HyperbolicFrameCurve {
    fn point(&self, t: f64) -> V3 {
        let (x, _, _) = self.ambient(t);
        V3::xy(x.x / (1.0 + x.z), x.y / (1.0 + x.z))
    }
    fn velocity(&self, t: f64) -> V3 {
        let (x, dx, _) = self.ambient(t);
        let d = 1.0 + x.z;
        V3::xy(
            (dx.x * d - x.x * dx.z) / (d * d),
            (dx.y * d - x.y * dx.z) / (d * d),
        )
    }
    fn accel(&self, t: f64) -> V3 {
        let (x, dx, ddx) = self.ambient(t);
        let d = 1.0 + x.z;
        // Quotient rule, second order.
        let fx = (ddx.x * d - x.x * ddx.z) / (d * d)
            - 2.0 * dx.z * (dx.x * d - x.x * dx.z) / (d * d * d);
        let fy = (ddx.y * d - x.y * ddx.z) / (d * d)
            - 2.0 * dx.z * (dx.y * d - x.y * dx.z) / (d * d * d);
        V3::xy(fx, fy)
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, 2.0 * std::f64::consts::PI)
    }
    fn closed(&self) -> bool {
        true
    }
}

// ----------------------------------------------------------------------
// Cumulative integral table along the parameter
// ----------------------------------------------------------------------

/// Cumulative integral of a smooth positive density over the parameter
/// domain, with machine-precision panel quadrature and Newton inversion.
struct DensityTable {
    breaks: Vec<f64>,
    cum: Vec<f64>,
    density: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl DensityTable {
    fn build(
        density: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        lo: f64,
        hi: f64,
        panels: usize,
    ) -> DensityTable {
        let mut breaks = Vec::with_capacity(panels + 1);
        let mut cum = Vec::with_capacity(panels + 1);
        breaks.push(lo);
        cum.push(0.0);
        let mut acc = 0.0;
        for i in 1..=panels {
            let a = lo + (hi - lo) * (i - 1) as f64 / panels as f64;
            let b = lo + (hi - lo) * i as f64 / panels as f64;
            let mut f = |u: f64| density(u);
            acc += numerics::quad_gl32(&mut f, a, b);
            breaks.push(b);
            cum.push(acc);
        }
        DensityTable { breaks, cum, density }
    }

    fn total(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    /// Integral from the domain start to parameter `u` (u inside the domain).
    fn value(&self, u: f64) -> f64 {
        let idx = match self.breaks.binary_search_by(|b| b.partial_cmp(&u).unwrap()) {
            Ok(i) => return self.cum[i],
            Err(i) => i.saturating_sub(1).min(self.breaks.len() - 2),
        };
        let mut f = |x: f64| (self.density)(x);
        self.cum[idx] + numerics::quad_gl32(&mut f, self.breaks[idx], u)
    }

    /// Inverse of `value` by bracketed Newton.
    fn inverse(&self, t: f64) -> f64 {
        let n = self.cum.len();
        let idx = match self.cum.binary_search_by(|c| c.partial_cmp(&t).unwrap()) {
            Ok(i) => return self.breaks[i],
            Err(i) => i.saturating_sub(1).min(n - 2),
        };
        let (mut lo, mut hi) = (self.breaks[idx], self.breaks[idx + 1]);
        let mut u = lo
            + (hi - lo) * (t - self.cum[idx]) / (self.cum[idx + 1] - self.cum[idx]).max(1e-300);
        for _ in 0..60 {
            let val = self.value(u) - t;
            if val > 0.0 {
                hi = u;
            } else {
                lo = u;
            }
            let d = (self.density)(u);
            let step = val / d.max(1e-300);
            let next = u - step;
            if step.abs() < 1e-15 * (1.0 + u.abs()) {
                return next.clamp(self.breaks[0], *self.breaks.last().unwrap());
            }
            u = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
        }
        u
    }
}

// ----------------------------------------------------------------------
// ConvexCurve
// ----------------------------------------------------------------------

/// A convex curve on a surface, with cached arclength and
/// curvature^(2/3)-parameter tables.
#[derive(Clone)]
pub struct ConvexCurve {
    surface: Surface,
    eval: Arc<dyn CurveEval>,
    table: Arc<DensityTable>,
    lazutkin: Arc<OnceCell<DensityTable>>,
    turning: Arc<OnceCell<DensityTable>>,
    /// Arclength position of the base point (raw-domain start by default).
    base_s: f64,
    /// Largest |s_A - s_B| accepted by the two-tangent constructions.
    max_separation: f64,
}

/// Panel counts for the cumulative tables.
fn panels_for(eval: &dyn CurveEval) -> usize {
    if eval.closed() {
        512
    } else {
        128
    }
}

impl ConvexCurve {
    /// Wrap a parametrization, validating model constraints and convexity
    /// (sampled curvature must not change sign; nonnegative throughout).
    pub fn new(surface: Surface, eval: Arc<dyn CurveEval>) -> Result<ConvexCurve> {
        let (lo, hi) = eval.domain();
        if !(hi > lo) {
            return Err(Error::invalid("empty curve parameter domain"));
        }
        let panels = panels_for(eval.as_ref());
        {
            // Model + convexity probe.
            let samples = 64;
            for i in 0..=samples {
                let u = lo + (hi - lo) * i as f64 / samples as f64;
                let p = eval.point(u);
                surface.validate_point(p).map_err(|e| {
                    Error::invalid(format!("curve leaves the surface model at u={u}: {e}"))
                })?;
                let k = curvature_raw(&surface, eval.as_ref(), u);
                if k < -1e-9 {
                    return Err(Error::Convexity(format!(
                        "sampled geodesic curvature is negative ({k:.3e}) at u={u}"
                    )));
                }
            }
        }
        let table = {
            let surface = surface.clone();
            let eval2 = eval.clone();
            let speed = move |u: f64| {
                let p = eval2.point(u);
                surface.norm(p, eval2.velocity(u))
            };
            Arc::new(DensityTable::build(Arc::new(speed), lo, hi, panels))
        };
        let mut curve = ConvexCurve {
            surface,
            eval,
            table,
            lazutkin: Arc::new(OnceCell::new()),
            turning: Arc::new(OnceCell::new()),
            base_s: 0.0,
            max_separation: 0.0,
        };
        let geo_cap = if curve.is_closed() { 0.48 * curve.total_length() } else { f64::INFINITY };
        curve.max_separation = geo_cap;
        if !curve.is_closed() {
            // Open curves normalize at the middle of the arc by default.
            curve.base_s = 0.5 * curve.total_length();
        }
        Ok(curve)
    }

    /// Euclidean circle of radius `r` at the origin.
    pub fn circle(r: f64) -> Result<ConvexCurve> {
        if r <= 0.0 {
            return Err(Error::invalid(format!("circle radius must be positive, got {r}")));
        }
        ConvexCurve::new(Surface::euclidean(), Arc::new(Circle { center: V3::ZERO, r }))
    }

    /// Euclidean ellipse with semi-axes `a`, `b`.
    pub fn ellipse(a: f64, b: f64) -> Result<ConvexCurve> {
        if a <= 0.0 || b <= 0.0 {
            return Err(Error::invalid(format!("ellipse axes must be positive, got {a}, {b}")));
        }
        ConvexCurve::new(Surface::euclidean(), Arc::new(Ellipse { a, b }))
    }

    /// The quartic oval x^4 + y^4 = 1.
    pub fn quartic_oval() -> Result<ConvexCurve> {
        ConvexCurve::new(Surface::euclidean(), Arc::new(QuarticOval))
    }

    /// Graph curve y = h(x) from derivative data h^(k)(0) = derivs[k], on a
    /// chart surface (Euclidean or general chart).
    pub fn graph(surface: Surface, derivs: &[f64], x_lo: f64, x_hi: f64) -> Result<ConvexCurve> {
        if surface.kind() == SurfaceKind::Sphere || surface.kind() == SurfaceKind::Hyperbolic {
            return Err(Error::Unsupported(
                "graph curves live in a chart (euclidean or general-chart surface)".into(),
            ));
        }
        ConvexCurve::new(surface, Arc::new(Graph::from_derivatives(derivs, x_lo, x_hi)))
    }

    /// Graph curve from power-basis polynomial coefficients.
    pub fn graph_poly(surface: Surface, poly: Vec<f64>, x_lo: f64, x_hi: f64) -> Result<ConvexCurve> {
        ConvexCurve::new(surface, Arc::new(Graph { poly, x_lo, x_hi }))
    }

    pub fn surface(&self) -> &Surface {
        &self.surface
    }

    pub fn is_closed(&self) -> bool {
        self.eval.closed()
    }

    pub fn total_length(&self) -> f64 {
        self.table.total()
    }

    pub fn max_separation(&self) -> f64 {
        self.max_separation
    }

    pub fn set_max_separation(&mut self, cap: f64) {
        self.max_separation = cap;
    }

    /// Arclength position of the base (normalization) point.
    pub fn base_s(&self) -> f64 {
        self.base_s
    }

    pub fn set_base_s(&mut self, s: f64) {
        self.base_s = self.wrap_s(s);
    }

    /// Move the base point to the curve point nearest to `p` (grid scan plus
    /// parabolic refinement on squared chart/ambient distance).
    pub fn set_base_at_point(&mut self, p: V3) -> Result<()> {
        self.surface.validate_point(p)?;
        let total = self.total_length();
        let n = 1024usize;
        let d2 = |s: f64| {
            let q = self.point_at(s);
            (q - p).norm2()
        };
        let mut best = (0usize, f64::INFINITY);
        for i in 0..n {
            let v = d2(total * i as f64 / n as f64);
            if v < best.1 {
                best = (i, v);
            }
        }
        let h = total / n as f64;
        let s0 = total * best.0 as f64 / n as f64;
        let (fm, f0, fp) = (d2(s0 - h), best.1, d2(s0 + h));
        let denom = fm - 2.0 * f0 + fp;
        let s_star = if denom.abs() > 1e-300 {
            s0 + 0.5 * h * (fm - fp) / denom
        } else {
            s0
        };
        self.base_s = self.wrap_s(s_star);
        Ok(())
    }

    /// Arclength bounds for open curves: valid `s` lies in [0, total].
    fn wrap_s(&self, s: f64) -> f64 {
        if self.is_closed() {
            let total = self.total_length();
            s.rem_euclid(total)
        } else {
            s
        }
    }

    /// Raw parameter at arclength `s` from the domain start.
    pub fn param_of_s(&self, s: f64) -> f64 {
        self.table.inverse(self.wrap_s(s))
    }

    /// Arclength from the domain start to parameter `u`.
    pub fn s_of_param(&self, u: f64) -> f64 {
        self.table.value(u)
    }

    /// Arclength between two raw parameters (oriented).
    pub fn arc_between_params(&self, u_a: f64, u_b: f64) -> f64 {
        self.table.value(u_b) - self.table.value(u_a)
    }

    pub fn point_at(&self, s: f64) -> V3 {
        self.eval.point(self.param_of_s(s))
    }

    /// Unit tangent (orientation of increasing s).
    pub fn tangent_at(&self, s: f64) -> UnitTangent {
        let u = self.param_of_s(s);
        let p = self.eval.point(u);
        let v = self.eval.velocity(u);
        let n = self.surface.norm(p, v);
        UnitTangent { point: p, vector: v / n }
    }

    /// Geodesic curvature at arclength `s` (positive: curve bends left).
    pub fn curvature_at(&self, s: f64) -> f64 {
        self.curvature_param(self.param_of_s(s))
    }

    pub fn curvature_param(&self, u: f64) -> f64 {
        curvature_raw(&self.surface, self.eval.as_ref(), u)
    }

    /// d kappa / d s by central differences.
    pub fn curvature_deriv_at(&self, s: f64) -> f64 {
        let h = 1e-4 * (1.0 + self.total_length());
        let mut f = |x: f64| self.curvature_at(x);
        numerics::deriv_central4(&mut f, s, h)
    }

    fn lazutkin_table(&self) -> &DensityTable {
        self.lazutkin.get_or_init(|| {
            let (lo, hi) = self.eval.domain();
            let surface = self.surface.clone();
            let eval = self.eval.clone();
            let density = move |u: f64| {
                let p = eval.point(u);
                let speed = surface.norm(p, eval.velocity(u));
                let k = curvature_raw(&surface, eval.as_ref(), u).max(0.0);
                k.powf(2.0 / 3.0) * speed
            };
            DensityTable::build(Arc::new(density), lo, hi, panels_for(self.eval.as_ref()))
        })
    }

    fn turning_table(&self) -> &DensityTable {
        self.turning.get_or_init(|| {
            let (lo, hi) = self.eval.domain();
            let surface = self.surface.clone();
            let eval = self.eval.clone();
            let density = move |u: f64| {
                let p = eval.point(u);
                let speed = surface.norm(p, eval.velocity(u));
                curvature_raw(&surface, eval.as_ref(), u).max(0.0) * speed
            };
            DensityTable::build(Arc::new(density), lo, hi, panels_for(self.eval.as_ref()))
        })
    }

    /// Cumulative tangent turning integral kappa ds from the domain start.
    fn turning_to(&self, s: f64) -> f64 {
        let table = self.turning_table();
        if self.is_closed() {
            let total = self.total_length();
            let turns = (s / total).floor();
            table.value(self.param_of_s(s.rem_euclid(total))) + turns * table.total()
        } else {
            table.value(self.param_of_s(s))
        }
    }

    /// Total tangent turning along the oriented arc from s_a to s_b.
    pub fn turning_between(&self, s_a: f64, s_b: f64) -> f64 {
        self.turning_to(s_b) - self.turning_to(s_a)
    }

    /// The curvature^(2/3) parameter t(s) = integral of kappa^(2/3) ds from
    /// the base point. With `normalized`, the integral is multiplied by
    /// kappa(base)^(1/3), making t invariant under rescaling the metric.
    pub fn lazutkin_param(&self, s: f64, normalized: bool) -> f64 {
        let table = self.lazutkin_table();
        let s = if self.is_closed() { s } else { self.wrap_s(s) };
        let (turns, frac) = if self.is_closed() {
            let total = self.total_length();
            (
                (s / total).floor(),
                s.rem_euclid(total),
            )
        } else {
            (0.0, s)
        };
        let raw = table.value(self.param_of_s(frac)) + turns * table.total()
            - table.value(self.param_of_s(self.base_s));
        if normalized {
            raw * self.curvature_at(self.base_s).powf(1.0 / 3.0)
        } else {
            raw
        }
    }

    /// Total curvature^(2/3) parameter over one period (closed curves).
    pub fn lazutkin_total(&self, normalized: bool) -> f64 {
        let t = self.lazutkin_table().total();
        if normalized {
            t * self.curvature_at(self.base_s).powf(1.0 / 3.0)
        } else {
            t
        }
    }

    /// Inverse of `lazutkin_param`.
    pub fn s_from_lazutkin(&self, t: f64, normalized: bool) -> f64 {
        let table = self.lazutkin_table();
        let scale = if normalized {
            self.curvature_at(self.base_s).powf(1.0 / 3.0)
        } else {
            1.0
        };
        let mut raw = t / scale + table.value(self.param_of_s(self.base_s));
        let mut turns = 0.0;
        if self.is_closed() {
            let total = table.total();
            turns = (raw / total).floor();
            raw -= turns * total;
        }
        self.s_of_param(table.inverse(raw)) + turns * self.total_length()
    }

    /// Oriented tangent geodesic at arclength `s`.
    pub fn tangent_geodesic(&self, s: f64) -> UnitTangent {
        self.tangent_at(s)
    }

    /// Intersection point C of the tangent geodesics at `s_a` and `s_b`
    /// (on the concave side for nearby points).
    pub fn tangent_intersection(&self, s_a: f64, s_b: f64) -> Result<V3> {
        let sep = (s_b - s_a).abs();
        if sep < 1e-8 {
            return Err(Error::IllConditioned(format!(
                "tangent intersection of nearly equal points (|ds| = {sep:.3e})"
            )));
        }
        if sep > self.max_separation {
            return Err(Error::Domain(format!(
                "separation {sep:.3e} exceeds the tangency cap {:.3e}",
                self.max_separation
            )));
        }
        // The tangents must turn by less than pi between the two points for
        // the intersection to be the near-side envelope point.
        let turn = self.turning_between(s_a.min(s_b), s_a.max(s_b)).abs();
        if turn > 2.7 {
            return Err(Error::Domain(format!(
                "tangent turning {turn:.3} rad between the points is too large"
            )));
        }
        let ga = self.tangent_at(s_a);
        let gb = self.tangent_at(s_b);
        if self.surface.kind() == SurfaceKind::GeneralChart {
            let seed = 0.5 * sep;
            return intersect_geodesics_newton(&self.surface, ga, gb, seed, -seed);
        }
        let fa = self.surface.geodesic_form(ga)?;
        let fb = self.surface.geodesic_form(gb)?;
        let near = self.point_at(0.5 * (s_a + s_b));
        self.surface.intersect_forms(fa, fb, near)
    }

    /// String length L(A, B) = |A C| + |B C| - arc(A, B), where C is the
    /// intersection of the tangent geodesics at A = s_a, B = s_b (s_b > s_a).
    pub fn string_length(&self, s_a: f64, s_b: f64) -> Result<f64> {
        if s_b <= s_a {
            return Err(Error::invalid(format!(
                "string length wants s_a < s_b, got {s_a} >= {s_b}"
            )));
        }
        let c = self.tangent_intersection(s_a, s_b)?;
        let a = self.point_at(s_a);
        let b = self.point_at(s_b);
        let la = self.surface.distance(a, c)?;
        let lb = self.surface.distance(b, c)?;
        Ok(la + lb - (s_b - s_a))
    }

    /// Asymmetry defect of the string length about the base point, measured
    /// in the normalized curvature^(2/3) parameter: with A, O, B the curve
    /// points at normalized parameter -t, 0, t,
    /// `Lambda(t) = L(O, B) - L(A, O)`.
    /// Vanishes identically iff the string construction admits an invariant
    /// parameter with the base as a symmetry point (circles: all t;
    /// ellipse vertices: by symmetry). Generic curves have
    /// Lambda(t) = c6 t^6 + O(t^7).
    pub fn lambda_defect(&self, t: f64) -> Result<f64> {
        if t <= 0.0 {
            return Err(Error::invalid(format!("defect wants t > 0, got {t}")));
        }
        let s0 = if self.is_closed() {
            self.base_s
        } else {
            self.wrap_s(self.base_s)
        };
        let sp = self.s_from_lazutkin(t, true);
        let sm = self.s_from_lazutkin(-t, true);
        let (sm, s0, sp) = if self.is_closed() {
            // Unwrap around the base to keep ordering s_minus < s0 < s_plus.
            let total = self.total_length();
            let mut a = sm;
            while a > s0 {
                a -= total;
            }
            let mut b = sp;
            while b < s0 {
                b += total;
            }
            (a, s0, b)
        } else {
            (sm, s0, sp)
        };
        Ok(self.string_length(s0, sp)? - self.string_length(sm, s0)?)
    }

    /// A point in the interior of a closed curve (chart/ambient average).
    pub fn interior_point(&self) -> Result<V3> {
        if !self.is_closed() {
            return Err(Error::invalid("interior point requires a closed curve"));
        }
        let (lo, hi) = self.eval.domain();
        let n = 64;
        let mut acc = V3::ZERO;
        for i in 0..n {
            let u = lo + (hi - lo) * i as f64 / n as f64;
            acc = acc + self.eval.point(u);
        }
        let mean = acc / n as f64;
        match self.surface.kind() {
            SurfaceKind::Sphere => Ok(mean.normalized()),
            _ => Ok(mean),
        }
    }

    /// Access the raw parametrization (used by the chord solvers).
    pub fn eval(&self) -> &Arc<dyn CurveEval> {
        &self.eval
    }
}

/// Signed geodesic curvature from analytic derivatives:
/// kappa = area(c', D_t c') / |c'|^3 in the surface metric.
fn curvature_raw(surface: &Surface, eval: &dyn CurveEval, u: f64) -> f64 {
    let p = eval.point(u);
    let v = eval.velocity(u);
    let a = eval.accel(u);
    match surface.kind() {
        SurfaceKind::Euclidean => v.cross_xy(a) / v.norm_xy().powi(3),
        SurfaceKind::Sphere => p.dot(v.cross(a)) / v.norm().powi(3),
        SurfaceKind::Hyperbolic => {
            // Conformal factor lambda = 2 / (1 - |z|^2):
            // kappa_g = (kappa_e - grad(ln lambda) . n_left) / lambda.
            let lambda = 2.0 / (1.0 - p.x * p.x - p.y * p.y);
            let kappa_e = v.cross_xy(a) / v.norm_xy().powi(3);
            let grad = V3::xy(
                2.0 * p.x / (1.0 - p.x * p.x - p.y * p.y),
                2.0 * p.y / (1.0 - p.x * p.x - p.y * p.y),
            );
            let t = v / v.norm_xy();
            let n_left = V3::xy(-t.y, t.x);
            (kappa_e - grad.x * n_left.x - grad.y * n_left.y) / lambda
        }
        SurfaceKind::GeneralChart => {
            // Covariant acceleration via Christoffel symbols, then the signed
            // area form sqrt(det g) dx ^ dy.
            let acc = surface.covariant_accel(p, v, a);
            let g = surface.metric_at(p).expect("general chart has a metric");
            let det = (g[0][0] * g[1][1] - g[0][1] * g[1][0]).max(0.0);
            let area = det.sqrt() * v.cross_xy(acc);
            area / surface.norm(p, v).powi(3)
        }
    }
}

/// Intersection of two geodesics on a general chart by 2D Newton on the two
/// flow times.
fn intersect_geodesics_newton(
    surface: &Surface,
    ga: UnitTangent,
    gb: UnitTangent,
    seed_a: f64,
    seed_b: f64,
) -> Result<V3> {
    let mut ta = seed_a;
    let mut tb = seed_b;
    let scale = seed_a.abs().max(seed_b.abs()).max(1e-3);
    for _ in 0..50 {
        let pa = surface.geodesic_flow(ga, ta)?;
        let pb = surface.geodesic_flow(gb, tb)?;
        let rx = pa.point.x - pb.point.x;
        let ry = pa.point.y - pb.point.y;
        if rx.hypot(ry) < 1e-13 * (1.0 + scale) {
            return Ok(pa.point);
        }
        // Jacobian columns are the geodesic velocities.
        let j = [[pa.vector.x, -pb.vector.x], [pa.vector.y, -pb.vector.y]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-14 {
            return Err(Error::construction("geodesics are (nearly) parallel"));
        }
        ta -= (j[1][1] * rx - j[0][1] * ry) / det;
        tb -= (-j[1][0] * rx + j[0][0] * ry) / det;
    }
    Err(Error::convergence("geodesic intersection Newton did not converge"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn circle_basics() {
        let c = ConvexCurve::circle(1.0).unwrap();
        assert!((c.total_length() - 2.0 * PI).abs() < 1e-12);
        assert!((c.curvature_at(1.234) - 1.0).abs() < 1e-12);
        // Arclength parametrization round-trips through the parameter.
        for s in [0.0, 0.7, 3.3, 6.0] {
            let u = c.param_of_s(s);
            assert!((c.s_of_param(u) - s).abs() < 1e-10);
        }
    }

    #[test]
    fn ellipse_perimeter_against_series_oracle() {
        // Independent oracle: Gauss-Kronrod-free arclength via the binomial
        // series for the complete elliptic integral E(e).
        let (a, b) = (2.0f64, 1.0f64);
        let e2 = 1.0 - (b / a) * (b / a);
        let mut sum = 1.0;
        let mut coef = 1.0;
        let mut e_pow = 1.0;
        for n in 1..200 {
            let nf = n as f64;
            coef *= (2.0 * nf - 1.0) / (2.0 * nf);
            e_pow *= e2;
            sum -= coef * coef * e_pow / (2.0 * nf - 1.0);
        }
        let perimeter = 2.0 * PI * a * sum;
        let c = ConvexCurve::ellipse(a, b).unwrap();
        assert!(
            (c.total_length() - perimeter).abs() < 1e-9,
            "perimeter {} vs oracle {perimeter}",
            c.total_length()
        );
        // Frozen reference value for the stock test ellipse.
        assert!((c.total_length() - 9.688448).abs() < 1e-5);
    }

    #[test]
    fn ellipse_curvature_closed_form() {
        let (a, b) = (2.0f64, 1.0f64);
        let c = ConvexCurve::ellipse(a, b).unwrap();
        for u in [0.0f64, 0.4, 1.1, 2.0, 4.4] {
            let want = a * b / (a * a * u.sin().powi(2) + b * b * u.cos().powi(2)).powf(1.5);
            let got = c.curvature_param(u);
            assert!((got - want).abs() < 1e-12, "u={u}: {got} vs {want}");
        }
        // Vertex values kappa = a/b^2 and b/a^2.
        assert!((c.curvature_param(0.0) - 2.0).abs() < 1e-12);
        assert!((c.curvature_param(PI / 2.0) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn quartic_oval_is_on_the_implicit_curve_and_flat_at_axes() {
        let c = ConvexCurve::quartic_oval().unwrap();
        for s in [0.1, 1.0, 2.5, 5.0] {
            let p = c.point_at(s);
            let f = p.x.powi(4) + p.y.powi(4);
            assert!((f - 1.0).abs() < 1e-12, "f = {f}");
        }
        assert!(c.curvature_param(0.0).abs() < 1e-12);
        let k_diag = c.curvature_param(PI / 4.0);
        assert!(k_diag > 1.0, "diagonal curvature {k_diag}");
    }

    #[test]
    fn circle_tangent_intersection_closed_form() {
        // Tangents at +-theta on the unit circle meet at (1/cos theta, 0).
        let c = ConvexCurve::circle(1.0).unwrap();
        let theta = 0.2;
        let total = c.total_length();
        let x = c.tangent_intersection(total - theta, total + theta).unwrap();
        assert!((x.x - 1.0 / theta.cos()).abs() < 1e-13);
        assert!(x.y.abs() < 1e-13);
    }

    #[test]
    fn circle_string_length_closed_form() {
        // For a circle of radius R and half-angle theta between the tangency
        // points, L = R (2 tan(theta) - 2 theta).
        let c = ConvexCurve::circle(1.0).unwrap();
        for theta in [0.05, 0.2, 0.5] {
            let l = c.string_length(1.0 - theta, 1.0 + theta).unwrap();
            let want = 2.0 * theta.tan() - 2.0 * theta;
            assert!(
                ((l - want) / want).abs() < 1e-11,
                "theta={theta}: {l} vs {want}"
            );
        }
    }

    #[test]
    fn lazutkin_parameter_is_scale_invariant_on_circles() {
        // Normalized t at a quarter arc equals pi/2 on a circle of any radius.
        for r in [0.5, 1.0, 3.0] {
            let c = ConvexCurve::circle(r).unwrap();
            let t = c.lazutkin_param(c.total_length() / 4.0, true);
            assert!((t - PI / 2.0).abs() < 1e-10, "r={r}: {t}");
        }
    }

    #[test]
    fn lazutkin_inverse_roundtrip_on_ellipse() {
        let c = ConvexCurve::ellipse(2.0, 1.0).unwrap();
        for s in [0.3, 2.0, 5.5, 9.0] {
            let t = c.lazutkin_param(s, true);
            let back = c.s_from_lazutkin(t, true);
            assert!((back - s).abs() < 1e-9, "s={s} back={back}");
        }
    }

    #[test]
    fn convexity_violation_is_rejected() {
        // A wavy graph with sign-changing curvature.
        let r = ConvexCurve::graph(Surface::euclidean(), &[0.0, 0.0, 1.0, 0.0, -600.0], -0.4, 0.4);
        assert!(matches!(r, Err(Error::Convexity(_))), "wavy graph accepted");
    }

    #[test]
    fn graph_parabola_curvature() {
        let c = ConvexCurve::graph(Surface::euclidean(), &[0.0, 0.0, 1.0], -0.5, 0.5).unwrap();
        let s_mid = c.s_of_param(0.0);
        assert!((c.curvature_at(s_mid) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tangent_intersection_rejects_degenerate_separations() {
        let c = ConvexCurve::circle(1.0).unwrap();
        assert!(matches!(
            c.tangent_intersection(1.0, 1.0 + 1e-10),
            Err(Error::IllConditioned(_))
        ));
        assert!(matches!(c.tangent_intersection(0.0, 3.1), Err(Error::Domain(_))));
    }

    /// Turning angle between the tangent geodesics at s_a and s_b, measured
    /// at their intersection point.
    fn turning_angle(curve: &ConvexCurve, s_a: f64, s_b: f64) -> f64 {
        let surf = curve.surface();
        let c = curve.tangent_intersection(s_a, s_b).unwrap();
        let ga = curve.tangent_at(s_a);
        let gb = curve.tangent_at(s_b);
        let ta = surf.distance(ga.point, c).unwrap();
        let tb = surf.distance(gb.point, c).unwrap();
        let da = surf.geodesic_flow(ga, ta).unwrap().vector;
        let db = surf.geodesic_flow(gb, -tb).unwrap().vector;
        surf.angle(c, da, db)
    }

    /// Distance from a point to a geodesic, by minimizing over the flow time.
    fn dist_to_geodesic(curve: &ConvexCurve, p: V3, g: UnitTangent, t_max: f64) -> f64 {
        let surf = curve.surface();
        let d = |t: f64| surf.distance(surf.geodesic_flow(g, t).unwrap().point, p).unwrap();
        let n = 64;
        let mut best = (0usize, f64::INFINITY);
        for i in 0..=n {
            let v = d(t_max * i as f64 / n as f64);
            if v < best.1 {
                best = (i, v);
            }
        }
        let h = t_max / n as f64;
        let t0 = t_max * best.0 as f64 / n as f64;
        let (fm, f0, fp) = (d(t0 - h), best.1, d(t0 + h));
        let denom = fm - 2.0 * f0 + fp;
        if denom.abs() > 1e-300 {
            d(t0 + 0.5 * h * (fm - fp) / denom)
        } else {
            f0
        }
    }

    #[test]
    fn curvature_limits_from_tangent_data() {
        // alpha / lambda -> kappa and 2 dist(B, G_A) / lambda^2 -> kappa
        // as the two points shrink onto the midpoint; relative error below
        // 5% at lambda = 1e-2 and decreasing when lambda halves.
        let ellipse = ConvexCurve::ellipse(2.0, 1.0).unwrap();
        let sphere = {
            let eval = SphereFrameCurve {
                frame: [
                    V3::new(1.0, 0.0, 0.0),
                    V3::new(0.0, 1.0, 0.0),
                    V3::new(0.0, 0.0, 1.0),
                ],
                a_max: 0.6,
                b_max: 0.4,
                w_sign: 1.0,
            };
            ConvexCurve::new(Surface::sphere(), Arc::new(eval)).unwrap()
        };
        for (curve, s_mid) in [(&ellipse, 1.3), (&sphere, 0.7)] {
            let kappa = curve.curvature_at(s_mid);
            let mut errs_alpha = Vec::new();
            let mut errs_dist = Vec::new();
            for lambda in [1e-2, 5e-3] {
                let (sa, sb) = (s_mid - 0.5 * lambda, s_mid + 0.5 * lambda);
                let alpha = turning_angle(curve, sa, sb);
                errs_alpha.push((alpha / lambda / kappa - 1.0).abs());
                let ga = curve.tangent_at(sa);
                let b = curve.point_at(sb);
                let dist = dist_to_geodesic(curve, b, ga, 2.0 * lambda);
                errs_dist.push((2.0 * dist / (lambda * lambda) / kappa - 1.0).abs());
            }
            assert!(errs_alpha[0] < 0.05, "alpha limit error {}", errs_alpha[0]);
            assert!(errs_dist[0] < 0.05, "dist limit error {}", errs_dist[0]);
            assert!(errs_alpha[1] < errs_alpha[0]);
            assert!(errs_dist[1] < errs_dist[0]);
        }
    }

    #[test]
    fn string_length_cubic_asymptotics() {
        // L(A,B) / (kappa^2(A)/12 |sA-sB|^3) -> 1. On the unit circle at
        // separation 1e-2 the closed form gives 1.0000100.
        let circle = ConvexCurve::circle(1.0).unwrap();
        let delta = 1e-2;
        let l = circle.string_length(0.0, delta).unwrap();
        let ratio = l / (delta * delta * delta / 12.0);
        assert!((ratio - 1.0000100).abs() < 1e-6, "circle ratio {ratio:.9}");
        // Ellipse at the vertex (2, 0): within 5% at 1e-2, improving when
        // the separation halves.
        let ellipse = ConvexCurve::ellipse(2.0, 1.0).unwrap();
        let kappa = ellipse.curvature_at(0.0);
        let mut errs = Vec::new();
        for delta in [1e-2, 5e-3] {
            let l = ellipse.string_length(0.0, delta).unwrap();
            let ratio = l / (kappa * kappa / 12.0 * delta * delta * delta);
            errs.push((ratio - 1.0).abs());
        }
        assert!(errs[0] < 0.05, "ellipse ratio error {}", errs[0]);
        assert!(errs[1] < 0.5 * errs[0] + 1e-12);
    }

    #[test]
    fn lambda_defect_vanishes_on_symmetric_curves() {
        let circle = ConvexCurve::circle(1.0).unwrap();
        for t in [0.05, 0.2, 0.5] {
            let lam = circle.lambda_defect(t).unwrap();
            assert!(lam.abs() < 1e-12, "circle defect {lam:.3e} at t={t}");
        }
        // Ellipse with base at the vertex (2, 0): reflection symmetry.
        let ellipse = ConvexCurve::ellipse(2.0, 1.0).unwrap();
        for t in [0.05, 0.2] {
            let lam = ellipse.lambda_defect(t).unwrap();
            assert!(lam.abs() < 1e-11, "ellipse vertex defect {lam:.3e} at t={t}");
        }
    }

    #[test]
    fn lambda_defect_leading_term_for_quintic_graph() {
        // y = x^2/2 + x^5/120: the defect satisfies
        // Lambda(t) = t^6/720 + o(t^6).
        let mut curve = ConvexCurve::graph(
            Surface::euclidean(),
            &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0],
            -0.5,
            0.5,
        )
        .unwrap();
        curve.set_base_at_point(V3::xy(0.0, 0.0)).unwrap();
        let ratio = |t: f64| 720.0 * curve.lambda_defect(t).unwrap() / t.powi(6);
        // First-order Richardson in t removes the o(t^6)/t^6 ~ O(t) tail.
        let (r1, r2) = (ratio(0.2), ratio(0.1));
        let extrapolated = 2.0 * r2 - r1;
        assert!(
            (extrapolated - 1.0).abs() < 0.05,
            "defect coefficient estimate {extrapolated:.4} (raw {r1:.4}, {r2:.4})"
        );
    }

    #[test]
    fn string_quantities_are_isometry_invariant() {
        // The same ellipse, rotated and translated: L and Lambda agree to
        // 1e-9 with the axis-aligned version.
        let base = ConvexCurve::ellipse(2.0, 1.0).unwrap();
        let theta = 0.83f64;
        let moved_eval = crate::conic::FrameEllipse {
            center: V3::xy(0.7, -1.2),
            e1: V3::xy(theta.cos(), theta.sin()),
            e2: V3::xy(-theta.sin(), theta.cos()),
            r1: 2.0,
            r2: 1.0,
        };
        let moved = ConvexCurve::new(Surface::euclidean(), Arc::new(moved_eval)).unwrap();
        for (sa, sb) in [(0.3, 0.5), (2.0, 2.4)] {
            let l0 = base.string_length(sa, sb).unwrap();
            let l1 = moved.string_length(sa, sb).unwrap();
            assert!((l0 - l1).abs() < 1e-9, "L mismatch {l0} vs {l1}");
        }
        for t in [0.1, 0.3] {
            let d0 = base.lambda_defect(t).unwrap();
            let d1 = moved.lambda_defect(t).unwrap();
            assert!((d0 - d1).abs() < 1e-9, "defect mismatch {d0} vs {d1}");
        }
    }

    #[test]
    fn metric_rescaling_scales_lengths_and_fixes_normalized_parameter() {
        // Doubling the metric doubles string lengths and leaves the
        // normalized curvature^(2/3) parameter unchanged.
        let small = ConvexCurve::ellipse(2.0, 1.0).unwrap();
        let big = ConvexCurve::ellipse(4.0, 2.0).unwrap();
        let (sa, sb) = (0.4, 0.7);
        let l_small = small.string_length(sa, sb).unwrap();
        let l_big = big.string_length(2.0 * sa, 2.0 * sb).unwrap();
        assert!((l_big - 2.0 * l_small).abs() < 1e-10);
        let t_small = small.lazutkin_param(sb, true);
        let t_big = big.lazutkin_param(2.0 * sb, true);
        assert!((t_big - t_small).abs() < 1e-11);
    }
}
