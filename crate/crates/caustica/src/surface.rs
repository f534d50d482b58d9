//! Simply connected surfaces of constant curvature (plane, unit sphere,
//! hyperbolic plane) plus arbitrary metric charts, with geodesic primitives:
//! flow, distance, log map, angles, geodesic intersection, normal charts, and
//! the circle-length function psi.
//!
//! Model conventions
//! -----------------
//! * Euclidean: chart points (x, y), stored with z = 0.
//! * Sphere: points are unit vectors in R^3; tangent vectors are ambient
//!   vectors orthogonal to the point. Geodesics are great circles.
//! * Hyperbolic: the Poincaré disk |z| < 1 with metric 2|dz|/(1 - |z|^2)
//!   (curvature -1). Geodesic intersections are computed by converting to the
//!   Minkowski hyperboloid x1^2 + x2^2 - x3^2 = -1, where geodesics are plane
//!   sections and intersection reduces to cross products.
//! * General chart: points (u, v) with a user metric; geodesics integrated by
//!   fixed-step RK4, log map by Newton shooting.
//!
//! Orientation: the standard orientation of the (x, y) chart; on the sphere,
//! counterclockwise as seen from outside. `rotate_tangent` with a positive
//! angle turns counterclockwise, so the unit normal `rotate(-pi/2)` of an
//! oriented curve points to its right.

use crate::error::{Error, Result};
use crate::vec3::V3;
use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

/// Which model the surface uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceKind {
    Euclidean,
    Sphere,
    Hyperbolic,
    GeneralChart,
}

impl fmt::Display for SurfaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SurfaceKind::Euclidean => "euclidean",
            SurfaceKind::Sphere => "sphere",
            SurfaceKind::Hyperbolic => "hyperbolic",
            SurfaceKind::GeneralChart => "general-chart",
        };
        f.write_str(s)
    }
}

/// 2x2 metric tensor at a chart point, row-major.
pub type Metric2 = [[f64; 2]; 2];

/// Metric closure for general charts.
pub type MetricFn = Arc<dyn Fn(f64, f64) -> Metric2 + Send + Sync>;

/// A point with a metric-unit tangent vector: the state moved by geodesic
/// flow, and the representation of an oriented geodesic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitTangent {
    pub point: V3,
    pub vector: V3,
}

/// Finite-difference step for Christoffel symbols on general charts.
const CHRISTOFFEL_FD_STEP: f64 = 1e-5;

#[derive(Clone)]
pub struct Surface {
    kind: SurfaceKind,
    metric: Option<MetricFn>,
    /// RK4 step for general-chart geodesics, as a fraction of the arc being
    /// integrated.
    integrator_step: f64,
}

impl fmt::Debug for Surface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Surface")
            .field("kind", &self.kind)
            .field("integrator_step", &self.integrator_step)
            .finish()
    }
}

impl Surface {
    pub fn euclidean() -> Surface {
        Surface { kind: SurfaceKind::Euclidean, metric: None, integrator_step: 1e-3 }
    }

    pub fn sphere() -> Surface {
        Surface { kind: SurfaceKind::Sphere, metric: None, integrator_step: 1e-3 }
    }

    pub fn hyperbolic() -> Surface {
        Surface { kind: SurfaceKind::Hyperbolic, metric: None, integrator_step: 1e-3 }
    }

    /// General metric chart. The metric is probed for symmetry and positive
    /// definiteness on a small grid around the origin at construction.
    pub fn general_chart(metric: MetricFn, integrator_step: f64) -> Result<Surface> {
        if !(integrator_step > 0.0 && integrator_step < 0.5) {
            return Err(Error::invalid(format!(
                "integrator step must lie in (0, 0.5), got {integrator_step}"
            )));
        }
        for &(u, v) in &[(0.0, 0.0), (0.08, 0.0), (0.0, 0.08), (-0.05, 0.06), (0.07, -0.07)] {
            let g = metric(u, v);
            let sym_err = (g[0][1] - g[1][0]).abs();
            let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
            if sym_err > 1e-12 * (1.0 + g[0][0].abs() + g[1][1].abs()) {
                return Err(Error::construction(format!(
                    "metric is not symmetric at ({u}, {v})"
                )));
            }
            if g[0][0] <= 0.0 || det <= 0.0 || !det.is_finite() {
                return Err(Error::construction(format!(
                    "metric is not positive definite at ({u}, {v})"
                )));
            }
        }
        Ok(Surface { kind: SurfaceKind::GeneralChart, metric: Some(metric), integrator_step })
    }

    pub fn kind(&self) -> SurfaceKind {
        self.kind
    }

    /// Gaussian curvature for the constant-curvature models.
    pub fn curvature(&self) -> Option<f64> {
        match self.kind {
            SurfaceKind::Euclidean => Some(0.0),
            SurfaceKind::Sphere => Some(1.0),
            SurfaceKind::Hyperbolic => Some(-1.0),
            SurfaceKind::GeneralChart => None,
        }
    }

    pub fn integrator_step(&self) -> f64 {
        self.integrator_step
    }

    /// Check that `p` satisfies the model constraint.
    pub fn validate_point(&self, p: V3) -> Result<()> {
        let ok = match self.kind {
            SurfaceKind::Euclidean | SurfaceKind::GeneralChart => p.z == 0.0,
            SurfaceKind::Sphere => (p.norm() - 1.0).abs() < 1e-9,
            SurfaceKind::Hyperbolic => p.z == 0.0 && p.norm_xy() < 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "point ({}, {}, {}) is not on the {} model",
                p.x, p.y, p.z, self.kind
            )))
        }
    }

    // ------------------------------------------------------------------
    // Metric algebra
    // ------------------------------------------------------------------

    /// Conformal factor of the hyperbolic disk metric.
    fn lambda_disk(p: V3) -> f64 {
        2.0 / (1.0 - p.x * p.x - p.y * p.y)
    }

    /// Riemannian inner product of tangent vectors at `p`.
    pub fn inner(&self, p: V3, u: V3, v: V3) -> f64 {
        match self.kind {
            SurfaceKind::Euclidean => u.x * v.x + u.y * v.y,
            SurfaceKind::Sphere => u.dot(v),
            SurfaceKind::Hyperbolic => {
                let l = Self::lambda_disk(p);
                l * l * (u.x * v.x + u.y * v.y)
            }
            SurfaceKind::GeneralChart => {
                let g = (self.metric.as_ref().unwrap())(p.x, p.y);
                g[0][0] * u.x * v.x + g[0][1] * (u.x * v.y + u.y * v.x) + g[1][1] * u.y * v.y
            }
        }
    }

    pub fn norm(&self, p: V3, v: V3) -> f64 {
        self.inner(p, v, v).max(0.0).sqrt()
    }

    /// Scale `v` to metric-unit length.
    pub fn unit(&self, p: V3, v: V3) -> Result<V3> {
        let n = self.norm(p, v);
        if n < 1e-300 {
            return Err(Error::invalid("cannot normalize a zero tangent vector"));
        }
        Ok(v / n)
    }

    /// Metric tensor in chart coordinates (chart-based kinds only).
    pub fn metric_at(&self, p: V3) -> Result<Metric2> {
        match self.kind {
            SurfaceKind::Euclidean => Ok([[1.0, 0.0], [0.0, 1.0]]),
            SurfaceKind::Hyperbolic => {
                let l = Self::lambda_disk(p);
                Ok([[l * l, 0.0], [0.0, l * l]])
            }
            SurfaceKind::GeneralChart => Ok((self.metric.as_ref().unwrap())(p.x, p.y)),
            SurfaceKind::Sphere => Err(Error::Unsupported(
                "the sphere model is not chart-based".into(),
            )),
        }
    }

    /// Covariant acceleration a^k + Gamma^k_ij v^i v^j on a general chart.
    pub(crate) fn covariant_accel(&self, p: V3, v: V3, a: V3) -> V3 {
        debug_assert_eq!(self.kind, SurfaceKind::GeneralChart);
        let gamma = self.christoffel(p.x, p.y);
        let corr = |k: usize| {
            gamma[k][0][0] * v.x * v.x + 2.0 * gamma[k][0][1] * v.x * v.y + gamma[k][1][1] * v.y * v.y
        };
        V3::xy(a.x + corr(0), a.y + corr(1))
    }

    /// Unoriented angle between tangent vectors, in [0, pi].
    pub fn angle(&self, p: V3, u: V3, v: V3) -> f64 {
        self.oriented_angle(p, u, v).abs()
    }

    /// Oriented angle from `u` to `v` in (-pi, pi], counterclockwise positive.
    pub fn oriented_angle(&self, p: V3, u: V3, v: V3) -> f64 {
        match self.kind {
            SurfaceKind::Euclidean | SurfaceKind::Hyperbolic => {
                // Conformal metrics: chart angles are metric angles.
                (u.cross_xy(v)).atan2(u.x * v.x + u.y * v.y)
            }
            SurfaceKind::Sphere => {
                let s = p.dot(u.cross(v));
                s.atan2(u.dot(v))
            }
            SurfaceKind::GeneralChart => {
                let (e1, e2) = self.orthonormal_frame(p);
                let ux = self.inner(p, u, e1);
                let uy = self.inner(p, u, e2);
                let vx = self.inner(p, v, e1);
                let vy = self.inner(p, v, e2);
                (ux * vy - uy * vx).atan2(ux * vx + uy * vy)
            }
        }
    }

    /// Rotate a tangent vector by `theta` (counterclockwise), preserving its
    /// metric norm.
    pub fn rotate_tangent(&self, p: V3, v: V3, theta: f64) -> V3 {
        match self.kind {
            SurfaceKind::Euclidean | SurfaceKind::Hyperbolic => v.rotated_xy(theta),
            SurfaceKind::Sphere => {
                // Rodrigues rotation about the outward normal p.
                let (s, c) = theta.sin_cos();
                v * c + p.cross(v) * s
            }
            SurfaceKind::GeneralChart => {
                let (e1, e2) = self.orthonormal_frame(p);
                let a = self.inner(p, v, e1);
                let b = self.inner(p, v, e2);
                let (s, c) = theta.sin_cos();
                e1 * (c * a - s * b) + e2 * (s * a + c * b)
            }
        }
    }

    /// Reflect tangent vector `v` across the line spanned by unit tangent `t`.
    pub fn reflect_across(&self, p: V3, v: V3, t: V3) -> V3 {
        let c = self.inner(p, v, t);
        t * (2.0 * c) - v
    }

    /// g-orthonormal frame aligned with the chart axes (identity frame for
    /// the constant-curvature conformal charts).
    fn orthonormal_frame(&self, p: V3) -> (V3, V3) {
        let g = (self.metric.as_ref().unwrap())(p.x, p.y);
        let e1 = V3::xy(1.0 / g[0][0].sqrt(), 0.0);
        // Gram-Schmidt on (0, 1).
        let proj = g[0][1] / g[0][0].sqrt(); // <e2_raw, e1>
        let mut e2 = V3::xy(-proj * e1.x, 1.0);
        let n = self.norm(p, e2);
        e2 = e2 / n;
        (e1, e2)
    }

    // ------------------------------------------------------------------
    // Geodesic flow / distance / log map
    // ------------------------------------------------------------------

    /// Flow the unit tangent `u` along its geodesic for arclength `s`.
    pub fn geodesic_flow(&self, u: UnitTangent, s: f64) -> Result<UnitTangent> {
        match self.kind {
            SurfaceKind::Euclidean => Ok(UnitTangent {
                point: u.point + u.vector * s,
                vector: u.vector,
            }),
            SurfaceKind::Sphere => {
                let (sn, cs) = s.sin_cos();
                Ok(UnitTangent {
                    point: u.point * cs + u.vector * sn,
                    vector: u.vector * cs - u.point * sn,
                })
            }
            SurfaceKind::Hyperbolic => Ok(Self::flow_disk(u, s)),
            SurfaceKind::GeneralChart => self.flow_chart_rk4(u, s),
        }
    }

    /// Closed-form disk flow via the Möbius translation taking the base point
    /// to the origin (which has positive real derivative there, so chart
    /// directions are preserved).
    fn flow_disk(u: UnitTangent, s: f64) -> UnitTangent {
        let z0 = Complex64::new(u.point.x, u.point.y);
        let v = Complex64::new(u.vector.x, u.vector.y);
        let d0 = v / v.norm(); // Euclidean unit direction
        let zeta = d0 * (0.5 * s).tanh();
        let denom = 1.0 + z0.conj() * zeta;
        let z1 = (zeta + z0) / denom;
        // Pushforward of the radial direction by the inverse translation.
        let dir = d0 * ((1.0 - z0.norm_sqr()) / (denom * denom));
        let dir = dir / dir.norm();
        let scale = (1.0 - z1.norm_sqr()) / 2.0; // metric-unit Euclidean length
        UnitTangent {
            point: V3::xy(z1.re, z1.im),
            vector: V3::xy(dir.re * scale, dir.im * scale),
        }
    }

    fn christoffel(&self, x: f64, y: f64) -> [[[f64; 2]; 2]; 2] {
        let metric = self.metric.as_ref().unwrap();
        let h = CHRISTOFFEL_FD_STEP;
        let gx = {
            let gp = metric(x + h, y);
            let gm = metric(x - h, y);
            [
                [(gp[0][0] - gm[0][0]) / (2.0 * h), (gp[0][1] - gm[0][1]) / (2.0 * h)],
                [(gp[1][0] - gm[1][0]) / (2.0 * h), (gp[1][1] - gm[1][1]) / (2.0 * h)],
            ]
        };
        let gy = {
            let gp = metric(x, y + h);
            let gm = metric(x, y - h);
            [
                [(gp[0][0] - gm[0][0]) / (2.0 * h), (gp[0][1] - gm[0][1]) / (2.0 * h)],
                [(gp[1][0] - gm[1][0]) / (2.0 * h), (gp[1][1] - gm[1][1]) / (2.0 * h)],
            ]
        };
        let dg = [gx, gy]; // dg[l][i][j] = d g_ij / d x^l
        let g = metric(x, y);
        let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        let ginv = [
            [g[1][1] / det, -g[0][1] / det],
            [-g[1][0] / det, g[0][0] / det],
        ];
        let mut gamma = [[[0.0; 2]; 2]; 2];
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    let mut acc = 0.0;
                    for l in 0..2 {
                        acc += ginv[k][l] * (dg[i][l][j] + dg[j][l][i] - dg[l][i][j]);
                    }
                    gamma[k][i][j] = 0.5 * acc;
                }
            }
        }
        gamma
    }

    fn geodesic_rhs(&self, state: [f64; 4]) -> [f64; 4] {
        let gamma = self.christoffel(state[0], state[1]);
        let (vx, vy) = (state[2], state[3]);
        let ax = -(gamma[0][0][0] * vx * vx + 2.0 * gamma[0][0][1] * vx * vy + gamma[0][1][1] * vy * vy);
        let ay = -(gamma[1][0][0] * vx * vx + 2.0 * gamma[1][0][1] * vx * vy + gamma[1][1][1] * vy * vy);
        [vx, vy, ax, ay]
    }

    fn flow_chart_rk4(&self, u: UnitTangent, s: f64) -> Result<UnitTangent> {
        if s == 0.0 {
            return Ok(u);
        }
        let n_steps = (1.0 / self.integrator_step).ceil() as usize;
        let h = s / n_steps as f64;
        let mut state = [u.point.x, u.point.y, u.vector.x, u.vector.y];
        for _ in 0..n_steps {
            let k1 = self.geodesic_rhs(state);
            let s2 = add4(state, scale4(k1, 0.5 * h));
            let k2 = self.geodesic_rhs(s2);
            let s3 = add4(state, scale4(k2, 0.5 * h));
            let k3 = self.geodesic_rhs(s3);
            let s4 = add4(state, scale4(k3, h));
            let k4 = self.geodesic_rhs(s4);
            for i in 0..4 {
                state[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            if !state.iter().all(|v| v.is_finite()) {
                return Err(Error::Domain("geodesic left the chart domain".into()));
            }
        }
        let point = V3::xy(state[0], state[1]);
        let vector = self.unit(point, V3::xy(state[2], state[3]))?;
        Ok(UnitTangent { point, vector })
    }

    /// Geodesic distance between two points.
    pub fn distance(&self, p: V3, q: V3) -> Result<f64> {
        match self.kind {
            SurfaceKind::Euclidean => Ok((p - q).norm_xy()),
            SurfaceKind::Sphere => {
                // Chordal form: well conditioned for nearby points.
                let chord = (p - q).norm();
                if chord >= 2.0 {
                    return Ok(std::f64::consts::PI);
                }
                Ok(2.0 * (0.5 * chord).asin())
            }
            SurfaceKind::Hyperbolic => {
                let z = Complex64::new(p.x, p.y);
                let w = Complex64::new(q.x, q.y);
                let m = (z - w).norm() / (1.0 - z.conj() * w).norm();
                Ok(2.0 * m.atanh())
            }
            SurfaceKind::GeneralChart => Ok(self.log_map(p, q)?.1),
        }
    }

    /// Inverse exponential: the metric-unit initial direction of the geodesic
    /// from `p` to `q`, and its length. Errors on coincident or (on the
    /// sphere) antipodal points.
    pub fn log_map(&self, p: V3, q: V3) -> Result<(V3, f64)> {
        match self.kind {
            SurfaceKind::Euclidean => {
                let d = (q - p).norm_xy();
                if d < 1e-300 {
                    return Err(Error::construction("log map of coincident points"));
                }
                Ok(((q - p) / d, d))
            }
            SurfaceKind::Sphere => {
                let d = self.distance(p, q)?;
                let w = q - p * p.dot(q);
                let n = w.norm();
                if n < 1e-14 {
                    return Err(Error::construction(
                        "log map undefined for coincident or antipodal points",
                    ));
                }
                Ok((w / n, d))
            }
            SurfaceKind::Hyperbolic => {
                let z = Complex64::new(p.x, p.y);
                let w = Complex64::new(q.x, q.y);
                let zeta = (w - z) / (Complex64::new(1.0, 0.0) - z.conj() * w);
                let m = zeta.norm();
                if m < 1e-300 {
                    return Err(Error::construction("log map of coincident points"));
                }
                let d = 2.0 * m.atanh();
                // The translation to the origin preserves chart directions at
                // the base point; scale to metric-unit.
                let dir = zeta / m;
                let scale = (1.0 - z.norm_sqr()) / 2.0;
                Ok((V3::xy(dir.re * scale, dir.im * scale), d))
            }
            SurfaceKind::GeneralChart => self.log_chart_newton(p, q),
        }
    }

    /// Newton shooting for general charts: solve for (direction angle, length)
    /// such that the geodesic from `p` hits `q`. Seeded by the chart chord.
    fn log_chart_newton(&self, p: V3, q: V3) -> Result<(V3, f64)> {
        let chord = q - p;
        let chord_len = chord.norm_xy();
        if chord_len < 1e-300 {
            return Err(Error::construction("log map of coincident points"));
        }
        let base_theta = chord.y.atan2(chord.x);
        let seed_s = self.norm(p, chord); // first-order arclength estimate
        let shoot = |theta: f64, s: f64| -> Result<V3> {
            let dir = self.unit(p, V3::xy(theta.cos(), theta.sin()))?;
            Ok(self.geodesic_flow(UnitTangent { point: p, vector: dir }, s)?.point)
        };
        let mut theta = base_theta;
        let mut s = seed_s;
        for _ in 0..40 {
            let hit = shoot(theta, s)?;
            let rx = hit.x - q.x;
            let ry = hit.y - q.y;
            let err = rx.hypot(ry);
            if err < 1e-11 * (1.0 + s) {
                let dir = self.unit(p, V3::xy(theta.cos(), theta.sin()))?;
                return Ok((dir, s));
            }
            let ht = 1e-6;
            let hs = 1e-6 * (1.0 + s.abs());
            let pt = shoot(theta + ht, s)?;
            let ps = shoot(theta, s + hs)?;
            let j = [
                [(pt.x - hit.x) / ht, (ps.x - hit.x) / hs],
                [(pt.y - hit.y) / ht, (ps.y - hit.y) / hs],
            ];
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            if det.abs() < 1e-18 {
                return Err(Error::convergence("singular shooting Jacobian in log map"));
            }
            let dtheta = (j[1][1] * rx - j[0][1] * ry) / det;
            let ds = (-j[1][0] * rx + j[0][0] * ry) / det;
            theta -= dtheta;
            s -= ds;
            if s <= 0.0 {
                s = 0.5 * seed_s;
            }
        }
        Err(Error::convergence("log map shooting did not converge"))
    }

    // ------------------------------------------------------------------
    // Embedded representation of geodesics (constant curvature only)
    // ------------------------------------------------------------------

    /// Ambient/homogeneous representation of a point:
    /// plane {z = 1} for Euclidean, the unit sphere itself, the upper
    /// Minkowski hyperboloid for the hyperbolic disk.
    pub fn embed(&self, p: V3) -> Result<V3> {
        match self.kind {
            SurfaceKind::Euclidean => Ok(V3::new(p.x, p.y, 1.0)),
            SurfaceKind::Sphere => Ok(p),
            SurfaceKind::Hyperbolic => {
                let r2 = p.x * p.x + p.y * p.y;
                let d = 1.0 - r2;
                Ok(V3::new(2.0 * p.x / d, 2.0 * p.y / d, (1.0 + r2) / d))
            }
            SurfaceKind::GeneralChart => Err(Error::Unsupported(
                "embedded geodesic representation requires constant curvature".into(),
            )),
        }
    }

    /// Inverse of [`Surface::embed`].
    pub fn point_from_embed(&self, x: V3) -> Result<V3> {
        match self.kind {
            SurfaceKind::Euclidean => {
                if x.z.abs() < 1e-300 {
                    return Err(Error::construction("point at infinity"));
                }
                Ok(V3::xy(x.x / x.z, x.y / x.z))
            }
            SurfaceKind::Sphere => Ok(x.normalized()),
            SurfaceKind::Hyperbolic => {
                // Normalize to the sheet <x,x>_M = -1, z > 0, then project.
                let m = x.mdot(x);
                if m >= 0.0 {
                    return Err(Error::construction("point off the hyperbolic sheet"));
                }
                let mut y = x / (-m).sqrt();
                if y.z < 0.0 {
                    y = -y;
                }
                Ok(V3::xy(y.x / (1.0 + y.z), y.y / (1.0 + y.z)))
            }
            SurfaceKind::GeneralChart => Err(Error::Unsupported(
                "embedded geodesic representation requires constant curvature".into(),
            )),
        }
    }

    /// The geodesic through `u` as a plane normal / homogeneous line vector.
    /// The sign is chosen so that `form_eval` is positive on the left of the
    /// direction of travel.
    pub fn geodesic_form(&self, u: UnitTangent) -> Result<V3> {
        match self.kind {
            SurfaceKind::Euclidean => {
                let p = V3::new(u.point.x, u.point.y, 1.0);
                let d = V3::new(u.vector.x, u.vector.y, 0.0);
                // l = p x d gives l . (x,y,1) > 0 on the left of the direction
                // of travel (same convention as form_through(p, p + d)).
                Ok(p.cross(d).normalized())
            }
            SurfaceKind::Sphere => Ok(u.point.cross(u.vector)),
            SurfaceKind::Hyperbolic => {
                let a = self.embed(u.point)?;
                let b = self.embed(self.geodesic_flow(u, 0.5)?.point)?;
                let n = a.cross(b);
                Ok(n / n.norm())
            }
            SurfaceKind::GeneralChart => Err(Error::Unsupported(
                "geodesic forms require constant curvature".into(),
            )),
        }
    }

    /// Form through two points, oriented from `p` to `q`.
    pub fn form_through(&self, p: V3, q: V3) -> Result<V3> {
        let (a, b) = (self.embed(p)?, self.embed(q)?);
        let n = match self.kind {
            // For z=1 embeddings a x b evaluates positive on the left of p->q.
            SurfaceKind::Euclidean => a.cross(b),
            SurfaceKind::Sphere | SurfaceKind::Hyperbolic => a.cross(b),
            SurfaceKind::GeneralChart => unreachable!(),
        };
        let nn = n.norm();
        if nn < 1e-14 {
            return Err(Error::construction("form through (nearly) coincident points"));
        }
        Ok(n / nn)
    }

    /// Signed incidence of a point with a geodesic form (zero on the
    /// geodesic; sign distinguishes the two sides).
    pub fn form_eval(&self, form: V3, p: V3) -> Result<f64> {
        Ok(form.dot(self.embed(p)?))
    }

    /// Intersection of two geodesic forms, resolved to the model point closest
    /// to `near` (the sphere has two candidates). Errors for parallel /
    /// identical geodesics and for hyperbolic pairs meeting off the sheet.
    pub fn intersect_forms(&self, f1: V3, f2: V3, near: V3) -> Result<V3> {
        let d = f1.cross(f2);
        match self.kind {
            SurfaceKind::Euclidean => {
                if d.z.abs() < 1e-14 * d.norm().max(1e-300) {
                    return Err(Error::construction("geodesics are parallel"));
                }
                Ok(V3::xy(d.x / d.z, d.y / d.z))
            }
            SurfaceKind::Sphere => {
                let n = d.norm();
                if n < 1e-14 {
                    return Err(Error::construction("geodesics coincide"));
                }
                let a = d / n;
                let b = -a;
                if (a - near).norm() <= (b - near).norm() {
                    Ok(a)
                } else {
                    Ok(b)
                }
            }
            SurfaceKind::Hyperbolic => {
                let m = d.mdot(d);
                if m >= 0.0 {
                    return Err(Error::construction(
                        "geodesics do not meet on the hyperbolic sheet",
                    ));
                }
                self.point_from_embed(d)
            }
            SurfaceKind::GeneralChart => Err(Error::Unsupported(
                "geodesic forms require constant curvature".into(),
            )),
        }
    }

    // ------------------------------------------------------------------
    // Circle-length function psi and friends
    // ------------------------------------------------------------------

    /// psi(r): circumference of the geodesic circle of radius r divided by
    /// 2*pi. Closed form per constant-curvature model.
    pub fn psi(&self, r: f64) -> Result<f64> {
        if r <= 0.0 {
            return Err(Error::invalid(format!("radius must be positive, got {r}")));
        }
        match self.kind {
            SurfaceKind::Euclidean => Ok(r),
            SurfaceKind::Sphere => {
                if r >= std::f64::consts::PI {
                    return Err(Error::Domain(format!(
                        "spherical circle radius must be < pi, got {r}"
                    )));
                }
                Ok(r.sin())
            }
            SurfaceKind::Hyperbolic => Ok(r.sinh()),
            SurfaceKind::GeneralChart => Err(Error::Unsupported(
                "psi has no closed form on a general chart".into(),
            )),
        }
    }

    /// Odd extension of psi to signed lengths (psi is odd in all three
    /// constant-curvature models); used for signed ratio products.
    pub fn psi_signed(&self, r: f64) -> Result<f64> {
        if r == 0.0 {
            return Ok(0.0);
        }
        let v = self.psi(r.abs())?;
        Ok(if r < 0.0 { -v } else { v })
    }

    /// Normalized angular derivative of the exponential map:
    /// Psi(x, v, r) = |d/dphi exp_x(r v(phi))| / r, computed by central
    /// differences over the direction angle with one Richardson step.
    pub fn big_psi(&self, u: UnitTangent, r: f64) -> Result<f64> {
        if r <= 0.0 {
            return Err(Error::invalid(format!("radius must be positive, got {r}")));
        }
        if self.kind == SurfaceKind::GeneralChart && r < 10.0 * self.integrator_step {
            return Err(Error::IllConditioned(format!(
                "radius {r} below 10x integrator step {}",
                self.integrator_step
            )));
        }
        let eval = |h: f64| -> Result<f64> {
            let up = UnitTangent { point: u.point, vector: self.rotate_tangent(u.point, u.vector, h) };
            let um = UnitTangent { point: u.point, vector: self.rotate_tangent(u.point, u.vector, -h) };
            let a = self.geodesic_flow(up, r)?.point;
            let b = self.geodesic_flow(um, r)?.point;
            Ok(self.distance(a, b)? / (2.0 * h))
        };
        let h = 1e-4;
        let d1 = eval(h)?;
        let d2 = eval(0.5 * h)?;
        // Chord-based estimates carry an O(h^2) error; eliminate it.
        Ok((4.0 * d2 - d1) / 3.0 / r)
    }

    /// Circumference of the geodesic circle centered at the base point of `u`
    /// (with `u.vector` fixing the starting azimuth) of radius `r`.
    ///
    /// Computed as a polyline length with Richardson extrapolation, entirely
    /// independent of [`Surface::psi`], so the two can cross-check each other.
    pub fn circle_circumference(&self, u: UnitTangent, r: f64) -> Result<f64> {
        if r <= 0.0 {
            return Err(Error::invalid(format!("radius must be positive, got {r}")));
        }
        if self.kind == SurfaceKind::Sphere && r >= std::f64::consts::PI {
            return Err(Error::Domain("spherical circle radius must be < pi".into()));
        }
        let n = if self.kind == SurfaceKind::GeneralChart { 192 } else { 768 };
        let poly = |segments: usize| -> Result<f64> {
            let mut total = 0.0;
            let mut prev = self.geodesic_flow(u, r)?.point;
            for i in 1..=segments {
                let phi = 2.0 * std::f64::consts::PI * i as f64 / segments as f64;
                let dir = self.rotate_tangent(u.point, u.vector, phi);
                let p = self
                    .geodesic_flow(UnitTangent { point: u.point, vector: dir }, r)?
                    .point;
                total += self.distance(prev, p)?;
                prev = p;
            }
            Ok(total)
        };
        let coarse = poly(n / 2)?;
        let fine = poly(n)?;
        Ok((4.0 * fine - coarse) / 3.0)
    }

    // ------------------------------------------------------------------
    // Normal charts
    // ------------------------------------------------------------------

    /// Geodesic normal chart at `origin` with first axis along `axis`.
    pub fn normal_chart(&self, origin: V3, axis: V3) -> Result<Chart> {
        self.validate_point(origin)?;
        let e1 = self.unit(origin, axis)?;
        let e2 = self.rotate_tangent(origin, e1, std::f64::consts::FRAC_PI_2);
        Ok(Chart { surface: self.clone(), origin, e1, e2 })
    }
}

fn add4(a: [f64; 4], b: [f64; 4]) -> [f64; 4] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
}

fn scale4(a: [f64; 4], k: f64) -> [f64; 4] {
    [a[0] * k, a[1] * k, a[2] * k, a[3] * k]
}

/// Geodesic normal chart: exp/log in an orthonormal frame at the origin.
#[derive(Debug, Clone)]
pub struct Chart {
    pub surface: Surface,
    pub origin: V3,
    pub e1: V3,
    pub e2: V3,
}

impl Chart {
    /// Normal coordinates of a surface point.
    pub fn to_chart(&self, p: V3) -> Result<(f64, f64)> {
        if self.surface.distance(self.origin, p)? < 1e-15 {
            return Ok((0.0, 0.0));
        }
        let (dir, r) = self.surface.log_map(self.origin, p)?;
        let x = self.surface.inner(self.origin, dir, self.e1);
        let y = self.surface.inner(self.origin, dir, self.e2);
        Ok((r * x, r * y))
    }

    /// Surface point with the given normal coordinates.
    pub fn from_chart(&self, x: f64, y: f64) -> Result<V3> {
        let r = x.hypot(y);
        if r == 0.0 {
            return Ok(self.origin);
        }
        let v = self.e1 * (x / r) + self.e2 * (y / r);
        Ok(self
            .surface
            .geodesic_flow(UnitTangent { point: self.origin, vector: v }, r)?
            .point)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn north() -> V3 {
        V3::new(0.0, 0.0, 1.0)
    }

    #[test]
    fn sphere_quarter_great_circle() {
        // Flowing a quarter turn from the pole along e1 lands on (1,0,0) with
        // tangent (0,0,-1).
        let s = Surface::sphere();
        let u = UnitTangent { point: north(), vector: V3::new(1.0, 0.0, 0.0) };
        let out = s.geodesic_flow(u, FRAC_PI_2).unwrap();
        assert!((out.point - V3::new(1.0, 0.0, 0.0)).norm() < 1e-14);
        assert!((out.vector - V3::new(0.0, 0.0, -1.0)).norm() < 1e-14);
    }

    #[test]
    fn disk_flow_radius_half_is_distance_ln3() {
        // Euclidean disk radius 0.5 corresponds to hyperbolic distance ln 3.
        let s = Surface::hyperbolic();
        let d = s.distance(V3::xy(0.0, 0.0), V3::xy(0.5, 0.0)).unwrap();
        assert!((d - 3.0f64.ln()).abs() < 1e-14, "d = {d}");
        let u = UnitTangent { point: V3::ZERO, vector: V3::xy(0.5, 0.0) };
        let out = s.geodesic_flow(u, 3.0f64.ln()).unwrap();
        assert!((out.point - V3::xy(0.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn disk_flow_is_additive_and_unit_speed() {
        let s = Surface::hyperbolic();
        let p = V3::xy(0.3, -0.2);
        let v = s.unit(p, V3::xy(0.4, 1.0)).unwrap();
        let u = UnitTangent { point: p, vector: v };
        let a = s.geodesic_flow(u, 0.7).unwrap();
        let b = s.geodesic_flow(a, 0.5).unwrap();
        let c = s.geodesic_flow(u, 1.2).unwrap();
        assert!((b.point - c.point).norm() < 1e-13);
        assert!((s.norm(b.point, b.vector) - 1.0).abs() < 1e-13);
        // Distance along the flow equals the parameter.
        assert!((s.distance(p, c.point).unwrap() - 1.2).abs() < 1e-13);
    }

    #[test]
    fn psi_closed_forms() {
        assert!((Surface::euclidean().psi(0.7).unwrap() - 0.7).abs() < 1e-15);
        assert!((Surface::sphere().psi(0.7).unwrap() - 0.7f64.sin()).abs() < 1e-15);
        assert!((Surface::hyperbolic().psi(0.7).unwrap() - 0.7f64.sinh()).abs() < 1e-15);
        assert!(Surface::sphere().psi(PI).is_err());
        assert!(Surface::euclidean().psi(-1.0).is_err());
    }

    #[test]
    fn circumference_matches_psi_on_all_models() {
        for s in [Surface::euclidean(), Surface::sphere(), Surface::hyperbolic()] {
            let (p, v) = match s.kind() {
                SurfaceKind::Sphere => (north(), V3::new(1.0, 0.0, 0.0)),
                _ => (V3::ZERO, V3::xy(1.0, 0.0)),
            };
            let v = s.unit(p, v).unwrap();
            for r in [0.1, 0.5, 1.0] {
                let c = s.circle_circumference(UnitTangent { point: p, vector: v }, r).unwrap();
                let want = 2.0 * PI * s.psi(r).unwrap();
                assert!(
                    (c / want - 1.0).abs() < 1e-7,
                    "{:?} r={r}: {c} vs {want}",
                    s.kind()
                );
            }
        }
    }

    #[test]
    fn big_psi_equals_psi_over_r_on_constant_curvature() {
        for s in [Surface::euclidean(), Surface::sphere(), Surface::hyperbolic()] {
            let (p, v) = match s.kind() {
                SurfaceKind::Sphere => (north(), V3::new(1.0, 0.0, 0.0)),
                _ => (V3::xy(0.1, 0.05), V3::xy(1.0, 0.0)),
            };
            let v = s.unit(p, v).unwrap();
            for r in [0.3, 1.0] {
                let got = s.big_psi(UnitTangent { point: p, vector: v }, r).unwrap();
                let want = s.psi(r).unwrap() / r;
                assert!((got - want).abs() < 1e-9, "{:?} r={r}", s.kind());
            }
        }
    }

    #[test]
    fn euclidean_line_intersection_via_forms() {
        let s = Surface::euclidean();
        let g1 = UnitTangent { point: V3::xy(0.0, 0.0), vector: V3::xy(1.0, 0.0) };
        let g2 = UnitTangent { point: V3::xy(1.0, -1.0), vector: V3::xy(0.0, 1.0) };
        let f1 = s.geodesic_form(g1).unwrap();
        let f2 = s.geodesic_form(g2).unwrap();
        let x = s.intersect_forms(f1, f2, V3::ZERO).unwrap();
        assert!((x - V3::xy(1.0, 0.0)).norm() < 1e-14);
        // Parallel lines fail.
        let g3 = UnitTangent { point: V3::xy(0.0, 1.0), vector: V3::xy(1.0, 0.0) };
        let f3 = s.geodesic_form(g3).unwrap();
        assert!(s.intersect_forms(f1, f3, V3::ZERO).is_err());
    }

    #[test]
    fn sphere_form_intersection_picks_near_candidate() {
        let s = Surface::sphere();
        // The equator (z = 0) and the x-z meridian meet at (+-1, 0, 0).
        let eq = UnitTangent { point: V3::new(1.0, 0.0, 0.0), vector: V3::new(0.0, 1.0, 0.0) };
        let mer = UnitTangent { point: V3::new(0.0, 0.0, 1.0), vector: V3::new(1.0, 0.0, 0.0) };
        let f1 = s.geodesic_form(eq).unwrap();
        let f2 = s.geodesic_form(mer).unwrap();
        let near = V3::new(0.9, 0.1, 0.1).normalized();
        let x = s.intersect_forms(f1, f2, near).unwrap();
        assert!((x - V3::new(1.0, 0.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn hyperbolic_form_intersection_roundtrip() {
        let s = Surface::hyperbolic();
        let p = V3::xy(0.2, 0.1);
        let g1 = UnitTangent { point: p, vector: s.unit(p, V3::xy(1.0, 0.3)).unwrap() };
        let g2 = UnitTangent { point: p, vector: s.unit(p, V3::xy(-0.2, 1.0)).unwrap() };
        let f1 = s.geodesic_form(g1).unwrap();
        let f2 = s.geodesic_form(g2).unwrap();
        let x = s.intersect_forms(f1, f2, p).unwrap();
        assert!((x - p).norm() < 1e-12, "got {x:?}");
        // Two disjoint geodesics: vertical lines through (+-0.6, 0) along y.
        let a = V3::xy(0.6, 0.0);
        let b = V3::xy(-0.6, 0.0);
        let ga = UnitTangent { point: a, vector: s.unit(a, V3::xy(0.0, 1.0)).unwrap() };
        let gb = UnitTangent { point: b, vector: s.unit(b, V3::xy(0.0, 1.0)).unwrap() };
        let fa = s.geodesic_form(ga).unwrap();
        let fb = s.geodesic_form(gb).unwrap();
        assert!(s.intersect_forms(fa, fb, V3::ZERO).is_err());
    }

    #[test]
    fn normal_chart_roundtrip_constant_curvature() {
        for s in [Surface::euclidean(), Surface::sphere(), Surface::hyperbolic()] {
            let (p, v) = match s.kind() {
                SurfaceKind::Sphere => (north(), V3::new(1.0, 0.0, 0.0)),
                _ => (V3::xy(0.1, -0.2), V3::xy(1.0, 0.2)),
            };
            let chart = s.normal_chart(p, v).unwrap();
            for &(x, y) in &[(0.3, 0.1), (-0.2, 0.25), (0.0, -0.4)] {
                let q = chart.from_chart(x, y).unwrap();
                let (xx, yy) = chart.to_chart(q).unwrap();
                assert!((xx - x).abs() < 1e-12 && (yy - y).abs() < 1e-12, "{:?}", s.kind());
            }
        }
    }

    #[test]
    fn general_chart_with_identity_metric_matches_euclidean() {
        let s = Surface::general_chart(Arc::new(|_, _| [[1.0, 0.0], [0.0, 1.0]]), 1e-3).unwrap();
        let p = V3::xy(0.05, -0.02);
        let v = s.unit(p, V3::xy(0.6, 0.8)).unwrap();
        let out = s.geodesic_flow(UnitTangent { point: p, vector: v }, 0.5).unwrap();
        let want = p + v * 0.5;
        assert!((out.point - want).norm() < 1e-8, "got {:?}", out.point);
        let (dir, d) = s.log_map(p, V3::xy(0.3, 0.25)).unwrap();
        let chord = V3::xy(0.25, 0.27);
        assert!((d - chord.norm_xy()).abs() < 1e-8);
        assert!((dir - chord.normalized()).norm() < 1e-6);
    }

    #[test]
    fn general_chart_rejects_bad_metric() {
        assert!(Surface::general_chart(Arc::new(|_, _| [[1.0, 2.0], [2.0, 1.0]]), 1e-3).is_err());
        assert!(Surface::general_chart(Arc::new(|_, _| [[1.0, 0.1], [0.0, 1.0]]), 1e-3).is_err());
    }

    #[test]
    fn oriented_angle_signs() {
        let s = Surface::euclidean();
        let a = s.oriented_angle(V3::ZERO, V3::xy(1.0, 0.0), V3::xy(0.0, 1.0));
        assert!((a - FRAC_PI_2).abs() < 1e-15);
        let sph = Surface::sphere();
        let b = sph.oriented_angle(north(), V3::new(1.0, 0.0, 0.0), V3::new(0.0, 1.0, 0.0));
        assert!((b - FRAC_PI_2).abs() < 1e-15);
    }
}
