//! Conics on constant-curvature models: intersections of the model surface
//! with quadrics {<Cx, x> = 0}, C a symmetric 3x3 matrix, plus the metric
//! circles that arise as special cases.
//!
//! Strategy per model:
//! * Euclidean (embedding z = 1): classic central-conic reduction; only the
//!   elliptic case yields a closed convex curve.
//! * Sphere: diagonalize C orthogonally; in the eigenframe the intersection
//!   projects to an ellipse in two coordinates with the third recovered from
//!   the sphere equation.
//! * Hyperbolic (Minkowski sheet <x,x>_M = -1): diagonalize C with respect to
//!   the Minkowski form; the intersection is an ellipse in the two spacelike
//!   coordinates, unbounded coordinate recovered from the sheet equation, and
//!   the curve is projected back to the Poincaré disk.

use crate::curve::{ConvexCurve, CurveEval, HyperbolicFrameCurve, SphereFrameCurve};
use crate::error::{Error, Result};
use crate::surface::{Surface, SurfaceKind};
use crate::vec3::V3;
use std::sync::Arc;

/// Symmetric 3x3 coefficient matrix of a quadric.
pub type ConicMatrix = [[f64; 3]; 3];

/// A conic specification: surface kind plus quadric matrix.
#[derive(Debug, Clone)]
pub struct ConicSpec {
    pub kind: SurfaceKind,
    pub c: ConicMatrix,
}

fn matvec(c: &ConicMatrix, x: V3) -> V3 {
    V3::new(
        c[0][0] * x.x + c[0][1] * x.y + c[0][2] * x.z,
        c[1][0] * x.x + c[1][1] * x.y + c[1][2] * x.z,
        c[2][0] * x.x + c[2][1] * x.y + c[2][2] * x.z,
    )
}

fn check_symmetric(c: &ConicMatrix) -> Result<()> {
    let scale: f64 = c.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
    for i in 0..3 {
        for j in (i + 1)..3 {
            if (c[i][j] - c[j][i]).abs() > 1e-12 * scale.max(1.0) {
                return Err(Error::invalid("conic matrix must be symmetric"));
            }
        }
    }
    if scale == 0.0 {
        return Err(Error::invalid("conic matrix is zero"));
    }
    Ok(())
}

/// Euclidean ellipse with arbitrary center and axis frame.
pub struct FrameEllipse {
    pub center: V3,
    pub e1: V3,
    pub e2: V3,
    pub r1: f64,
    pub r2: f64,
}

impl CurveEval for FrameEllipse {
    fn point(&self, u: f64) -> V3 {
        self.center + self.e1 * (self.r1 * u.cos()) + self.e2 * (self.r2 * u.sin())
    }
    fn velocity(&self, u: f64) -> V3 {
        self.e1 * (-self.r1 * u.sin()) + self.e2 * (self.r2 * u.cos())
    }
    fn accel(&self, u: f64) -> V3 {
        self.e1 * (-self.r1 * u.cos()) + self.e2 * (-self.r2 * u.sin())
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, 2.0 * std::f64::consts::PI)
    }
    fn closed(&self) -> bool {
        true
    }
}

/// Build the convex branch of a conic through/near `base`.
///
/// The parametrization is always oriented so that the geodesic curvature is
/// positive; the curve's base point is set to the point nearest `base`.
pub fn make_conic(spec: &ConicSpec, base: V3) -> Result<ConvexCurve> {
    check_symmetric(&spec.c)?;
    let surface = match spec.kind {
        SurfaceKind::Euclidean => Surface::euclidean(),
        SurfaceKind::Sphere => Surface::sphere(),
        SurfaceKind::Hyperbolic => Surface::hyperbolic(),
        SurfaceKind::GeneralChart => {
            return Err(Error::Unsupported(
                "conics are defined on the constant-curvature models".into(),
            ))
        }
    };
    surface.validate_point(base)?;
    // Regularity probe: the quadric gradient 2 C x must not vanish at the
    // base's embedded representative.
    let xb = surface.embed(base)?;
    if matvec(&spec.c, xb).norm() < 1e-10 * xb.norm() {
        return Err(Error::construction("conic is singular at the base point"));
    }
    let mut curve = match spec.kind {
        SurfaceKind::Euclidean => euclidean_conic(&spec.c)?,
        SurfaceKind::Sphere => sphere_conic(&spec.c, base)?,
        SurfaceKind::Hyperbolic => hyperbolic_conic(&spec.c)?,
        SurfaceKind::GeneralChart => unreachable!(),
    };
    curve.set_base_at_point(base)?;
    Ok(curve)
}

fn euclidean_conic(c: &ConicMatrix) -> Result<ConvexCurve> {
    let mut a2 = [[c[0][0], c[0][1]], [c[1][0], c[1][1]]];
    let mut b = [c[0][2], c[1][2]];
    let mut f = c[2][2];
    let det = a2[0][0] * a2[1][1] - a2[0][1] * a2[1][0];
    if det <= 1e-14 {
        return Err(Error::Unsupported(
            "only elliptic conics define closed convex curves in the plane".into(),
        ));
    }
    if a2[0][0] < 0.0 {
        // Normalize so the quadratic part is positive definite.
        for row in a2.iter_mut() {
            row[0] = -row[0];
            row[1] = -row[1];
        }
        b[0] = -b[0];
        b[1] = -b[1];
        f = -f;
    }
    // Center: A2 m = -b.
    let m = [
        (-b[0] * a2[1][1] + b[1] * a2[0][1]) / det,
        (-b[1] * a2[0][0] + b[0] * a2[1][0]) / det,
    ];
    let rho = -(f + b[0] * m[0] + b[1] * m[1]);
    if rho <= 0.0 {
        return Err(Error::construction("conic has no real points (empty ellipse)"));
    }
    // 2x2 symmetric eigen-decomposition.
    let (l1, l2, theta) = eigen_sym2(a2[0][0], a2[0][1], a2[1][1]);
    let e1 = V3::xy(theta.cos(), theta.sin());
    let e2 = V3::xy(-theta.sin(), theta.cos());
    let ellipse = FrameEllipse {
        center: V3::xy(m[0], m[1]),
        e1,
        e2,
        r1: (rho / l1).sqrt(),
        r2: (rho / l2).sqrt(),
    };
    ConvexCurve::new(Surface::euclidean(), Arc::new(ellipse))
}

/// Eigenvalues (both positive for SPD input) and rotation angle of
/// [[a, b], [b, c]]; the angle orients the first eigenvector.
fn eigen_sym2(a: f64, b: f64, c: f64) -> (f64, f64, f64) {
    let theta = 0.5 * (2.0 * b).atan2(a - c);
    let half = 0.5 * (a + c);
    let r = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    (half + r, half - r, theta)
}

fn sphere_conic(c: &ConicMatrix, base: V3) -> Result<ConvexCurve> {
    let (d, e) = jacobi_eigen_sym3(c);
    // Choose which eigen-axis carries the square-root coordinate and the
    // overall sign of C so that the remaining two coordinates trace an
    // ellipse inside the unit disk.
    for k in 0..3 {
        for sign in [1.0f64, -1.0] {
            let (i, j) = ((k + 1) % 3, (k + 2) % 3);
            let (l1, l2, l3) = (sign * d[i], sign * d[j], sign * d[k]);
            let (alpha, beta, gamma) = (l1 - l3, l2 - l3, -l3);
            if alpha <= 0.0 || beta <= 0.0 || gamma <= 0.0 {
                continue;
            }
            let a_max = (gamma / alpha).sqrt();
            let b_max = (gamma / beta).sqrt();
            if a_max >= 1.0 - 1e-12 || b_max >= 1.0 - 1e-12 {
                continue;
            }
            let frame = [e[i], e[j], e[k]];
            let w_sign = if base.dot(e[k]) >= 0.0 { 1.0 } else { -1.0 };
            // On the opposite branch the traversal must be reversed to keep
            // the geodesic curvature positive.
            let eval = SphereFrameCurve { frame, a_max, b_max: w_sign * b_max, w_sign };
            return ConvexCurve::new(Surface::sphere(), Arc::new(eval));
        }
    }
    Err(Error::Unsupported(
        "conic does not cut a closed oval out of the sphere".into(),
    ))
}

fn hyperbolic_conic(c0: &ConicMatrix) -> Result<ConvexCurve> {
    // Eigenvalues of M = Q C (Q = diag(1,1,-1)); the eigenvector equation
    // C v = lambda Q v has Q-orthogonal eigenvectors.
    let m = [
        [c0[0][0], c0[0][1], c0[0][2]],
        [c0[1][0], c0[1][1], c0[1][2]],
        [-c0[2][0], -c0[2][1], -c0[2][2]],
    ];
    let roots = real_eigenvalues_3x3(&m)?;
    // Find the eigenvalue with a timelike eigenvector via the null space of
    // the symmetric matrix C - lambda Q.
    let mut timelike: Option<(f64, V3)> = None;
    for &lam in &roots {
        let s = [
            [c0[0][0] - lam, c0[0][1], c0[0][2]],
            [c0[1][0], c0[1][1] - lam, c0[1][2]],
            [c0[2][0], c0[2][1], c0[2][2] + lam],
        ];
        let rows = [
            V3::new(s[0][0], s[0][1], s[0][2]),
            V3::new(s[1][0], s[1][1], s[1][2]),
            V3::new(s[2][0], s[2][1], s[2][2]),
        ];
        let scale = rows.iter().map(|r| r.norm()).fold(0.0, f64::max).max(1e-300);
        let mut best = V3::ZERO;
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            let v = rows[a].cross(rows[b]);
            if v.norm() > best.norm() {
                best = v;
            }
        }
        if best.norm() < 1e-9 * scale * scale {
            continue; // degenerate eigenvalue; its vectors are spacelike here
        }
        let v = best / best.norm();
        if v.mdot(v) < 0.0 {
            timelike = Some((lam, v));
            break;
        }
    }
    let (mut l3, mut v3) = timelike.ok_or_else(|| {
        Error::Unsupported("conic has no timelike axis; it does not cut a closed oval".into())
    })?;
    // Normalize: <v3, v3>_M = -1, future-pointing; C sign with l3 > 0.
    v3 = v3 / (-v3.mdot(v3)).sqrt();
    if v3.z < 0.0 {
        v3 = -v3;
    }
    let mut c = *c0;
    if l3 < 0.0 {
        for row in c.iter_mut() {
            for v in row.iter_mut() {
                *v = -*v;
            }
        }
        l3 = -l3;
    } else if l3 == 0.0 {
        return Err(Error::construction("degenerate conic (zero timelike eigenvalue)"));
    }
    // Spacelike plane: Q-orthogonal complement of v3. Build a basis and
    // diagonalize the restriction of C (generalized 2x2 problem).
    let mut basis: Vec<V3> = Vec::new();
    for cand in [V3::new(1.0, 0.0, 0.0), V3::new(0.0, 1.0, 0.0), V3::new(0.0, 0.0, 1.0)] {
        let proj = cand + v3 * cand.mdot(v3); // subtract <cand,v3>/<v3,v3> v3 with <v3,v3> = -1
        if proj.norm() > 0.3 {
            basis.push(proj);
        }
        if basis.len() == 2 {
            break;
        }
    }
    let x1 = basis[0];
    // Q-Gram-Schmidt.
    let x1n = x1 / x1.mdot(x1).sqrt();
    let mut x2 = basis[1] - x1n * basis[1].mdot(x1n);
    if x2.norm() < 1e-9 {
        return Err(Error::construction("failed to build a spacelike basis"));
    }
    x2 = x2 / x2.mdot(x2).sqrt();
    let bq = |u: V3, w: V3| matvec(&c, u).dot(w);
    let b11 = bq(x1n, x1n);
    let b12 = bq(x1n, x2);
    let b22 = bq(x2, x2);
    let (l1, l2, theta) = eigen_sym2(b11, b12, b22);
    let (s, co) = theta.sin_cos();
    let v1 = x1n * co + x2 * s;
    let v2 = x1n * (-s) + x2 * co;
    if l1 - l3 <= 0.0 || l2 - l3 <= 0.0 {
        return Err(Error::Unsupported(
            "conic does not cut a closed oval out of the hyperbolic plane".into(),
        ));
    }
    let a_max = (l3 / (l1 - l3)).sqrt();
    let b_max = (l3 / (l2 - l3)).sqrt();
    let eval = HyperbolicFrameCurve { frame: [v1, v2, v3], a_max, b_max };
    ConvexCurve::new(Surface::hyperbolic(), Arc::new(eval))
}

/// Metric circle on the sphere: polar angle `polar` from the north pole,
/// counterclockwise seen from the pole; geodesic curvature cot(polar).
pub fn sphere_circle(polar: f64) -> Result<ConvexCurve> {
    if !(polar > 0.0 && polar < std::f64::consts::FRAC_PI_2) {
        return Err(Error::invalid(format!(
            "polar angle must lie in (0, pi/2) for a convex circle, got {polar}"
        )));
    }
    let eval = SphereFrameCurve {
        frame: [V3::new(1.0, 0.0, 0.0), V3::new(0.0, 1.0, 0.0), V3::new(0.0, 0.0, 1.0)],
        a_max: polar.sin(),
        b_max: polar.sin(),
        w_sign: 1.0,
    };
    ConvexCurve::new(Surface::sphere(), Arc::new(eval))
}

/// Metric circle of hyperbolic radius `r` about the disk origin; geodesic
/// curvature coth(r).
pub fn hyperbolic_circle(r: f64) -> Result<ConvexCurve> {
    if r <= 0.0 {
        return Err(Error::invalid(format!("radius must be positive, got {r}")));
    }
    let eval = HyperbolicFrameCurve {
        frame: [V3::new(1.0, 0.0, 0.0), V3::new(0.0, 1.0, 0.0), V3::new(0.0, 0.0, 1.0)],
        a_max: r.sinh(),
        b_max: r.sinh(),
    };
    ConvexCurve::new(Surface::hyperbolic(), Arc::new(eval))
}

/// Jacobi eigen-decomposition of a symmetric 3x3 matrix. Returns
/// (eigenvalues, orthonormal eigenvectors).
fn jacobi_eigen_sym3(c: &ConicMatrix) -> ([f64; 3], [V3; 3]) {
    let mut a = *c;
    let mut v = [[0.0f64; 3]; 3];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..60 {
        let off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        if off < 1e-30 {
            break;
        }
        for p in 0..2 {
            for q in (p + 1)..3 {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = 0.5 * (2.0 * a[p][q]).atan2(a[p][p] - a[q][q]);
                let (s, co) = theta.sin_cos();
                // Rotate rows/columns p, q.
                for k in 0..3 {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = co * akp + s * akq;
                    a[k][q] = -s * akp + co * akq;
                }
                for k in 0..3 {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = co * apk + s * aqk;
                    a[q][k] = -s * apk + co * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = co * vp + s * vq;
                    row[q] = -s * vp + co * vq;
                }
            }
        }
    }
    let vals = [a[0][0], a[1][1], a[2][2]];
    let vecs = [
        V3::new(v[0][0], v[1][0], v[2][0]),
        V3::new(v[0][1], v[1][1], v[2][1]),
        V3::new(v[0][2], v[1][2], v[2][2]),
    ];
    (vals, vecs)
}

/// Real eigenvalues of a 3x3 matrix via the characteristic cubic (trig
/// solution). Errors when a complex pair appears.
fn real_eigenvalues_3x3(m: &[[f64; 3]; 3]) -> Result<[f64; 3]> {
    let tr = m[0][0] + m[1][1] + m[2][2];
    let m2 = m[0][0] * m[1][1] - m[0][1] * m[1][0]
        + m[0][0] * m[2][2] - m[0][2] * m[2][0]
        + m[1][1] * m[2][2] - m[1][2] * m[2][1];
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    // lambda^3 - tr lambda^2 + m2 lambda - det = 0; depress with
    // lambda = x + tr/3.
    let p = m2 - tr * tr / 3.0;
    let q = -2.0 * tr * tr * tr / 27.0 + tr * m2 / 3.0 - det;
    let shift = tr / 3.0;
    let scale: f64 = m.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max).max(1.0);
    if p.abs() < 1e-14 * scale * scale {
        // Triple / near-triple root.
        let x = if q.abs() < 1e-300 { 0.0 } else { -q.signum() * q.abs().cbrt() };
        return Ok([x + shift, x + shift, x + shift]);
    }
    let disc = -(4.0 * p * p * p + 27.0 * q * q);
    if disc < -1e-12 * scale.powi(6) {
        return Err(Error::Unsupported(
            "conic pencil has complex eigenvalues; unsupported configuration".into(),
        ));
    }
    if p > 0.0 {
        return Err(Error::Unsupported(
            "characteristic cubic has complex roots; unsupported configuration".into(),
        ));
    }
    let a = 2.0 * (-p / 3.0).sqrt();
    let arg = (3.0 * q / (a * p)).clamp(-1.0, 1.0);
    let phi = arg.acos() / 3.0;
    let mut out = [0.0f64; 3];
    for (k, o) in out.iter_mut().enumerate() {
        *o = a * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() + shift;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    #[test]
    fn euclidean_unit_circle_from_quadric() {
        let spec = ConicSpec {
            kind: SurfaceKind::Euclidean,
            c: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]],
        };
        let curve = make_conic(&spec, V3::xy(1.0, 0.0)).unwrap();
        assert!((curve.total_length() - 2.0 * PI).abs() < 1e-10);
        assert!((curve.curvature_at(0.3) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn euclidean_axis_form_matches_ellipse() {
        // C = diag(1/a^2, 1/b^2, -1).
        let spec = ConicSpec {
            kind: SurfaceKind::Euclidean,
            c: [[0.25, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]],
        };
        let curve = make_conic(&spec, V3::xy(2.0, 0.0)).unwrap();
        let reference = ConvexCurve::ellipse(2.0, 1.0).unwrap();
        assert!((curve.total_length() - reference.total_length()).abs() < 1e-9);
    }

    #[test]
    fn rotated_translated_ellipse_points_satisfy_quadric() {
        // x^2 + x y + y^2 - 2 x - 1 = 0 (an ellipse).
        let c = [[1.0, 0.5, -1.0], [0.5, 1.0, 0.0], [-1.0, 0.0, -1.0]];
        let spec = ConicSpec { kind: SurfaceKind::Euclidean, c };
        let curve = make_conic(&spec, V3::xy(1.0, 1.0)).unwrap();
        for s in [0.0, 0.7, 1.9, 3.1] {
            let p = curve.point_at(s);
            let val = p.x * p.x + p.x * p.y + p.y * p.y - 2.0 * p.x - 1.0;
            assert!(val.abs() < 1e-10, "residual {val} at s={s}");
        }
    }

    #[test]
    fn sphere_conic_at_pi_over_4_is_small_circle() {
        // C = diag(1, 1, -cot^2(pi/4)) = diag(1, 1, -1): polar angle pi/4.
        let spec = ConicSpec {
            kind: SurfaceKind::Sphere,
            c: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]],
        };
        let base = V3::new(FRAC_PI_4.sin(), 0.0, FRAC_PI_4.cos());
        let curve = make_conic(&spec, base).unwrap();
        // Points satisfy both the quadric and the sphere equation; curvature
        // is cot(pi/4) = 1.
        for s in [0.2, 1.0, 2.2] {
            let p = curve.point_at(s);
            assert!((p.norm() - 1.0).abs() < 1e-12);
            assert!((p.x * p.x + p.y * p.y - p.z * p.z).abs() < 1e-12);
            assert!(p.z > 0.0, "wrong branch");
        }
        assert!((curve.curvature_at(0.9) - 1.0).abs() < 1e-10);
        assert!((curve.total_length() - 2.0 * PI * FRAC_PI_4.sin()).abs() < 1e-8);
    }

    #[test]
    fn sphere_conic_respects_branch_choice() {
        let spec = ConicSpec {
            kind: SurfaceKind::Sphere,
            c: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]],
        };
        let base = V3::new(FRAC_PI_4.sin(), 0.0, -FRAC_PI_4.cos());
        let curve = make_conic(&spec, base).unwrap();
        assert!(curve.point_at(0.5).z < 0.0);
    }

    #[test]
    fn hyperbolic_circle_radius_one_from_quadric() {
        // C = diag(1, 1, -tanh^2 r) cuts the metric circle of radius r.
        let r = 1.0f64;
        let t2 = r.tanh() * r.tanh();
        let spec = ConicSpec {
            kind: SurfaceKind::Hyperbolic,
            c: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -t2]],
        };
        let base = V3::xy((r / 2.0).tanh(), 0.0);
        let curve = make_conic(&spec, base).unwrap();
        let surf = Surface::hyperbolic();
        for s in [0.1, 1.5, 3.0] {
            let p = curve.point_at(s);
            let d = surf.distance(V3::ZERO, p).unwrap();
            assert!((d - r).abs() < 1e-11, "distance {d}");
        }
        assert!((curve.curvature_at(2.0) - 1.0f64 / r.tanh()).abs() < 1e-9);
        assert!((curve.total_length() - 2.0 * PI * r.sinh()).abs() < 1e-8);
    }

    #[test]
    fn hyperbolic_offcenter_conic_stays_on_quadric() {
        // A tilted negative-definite-free example: circle quadric conjugated
        // by a small Minkowski boost is still a conic; points must satisfy it.
        // Boost along x with rapidity 0.3: B^T C B where C = diag(1,1,-tanh^2 1).
        let (ch, sh) = (0.3f64.cosh(), 0.3f64.sinh());
        let t2 = 1.0f64.tanh() * 1.0f64.tanh();
        // B = [[ch,0,sh],[0,1,0],[sh,0,ch]] (symmetric boost).
        let b = [[ch, 0.0, sh], [0.0, 1.0, 0.0], [sh, 0.0, ch]];
        let mut c = [[0.0f64; 3]; 3];
        let d = [1.0, 1.0, -t2];
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = 0.0;
                for (k, dk) in d.iter().enumerate() {
                    acc += b[k][i] * dk * b[k][j];
                }
                c[i][j] = acc;
            }
        }
        let spec = ConicSpec { kind: SurfaceKind::Hyperbolic, c };
        let curve = make_conic(&spec, V3::xy(0.5, 0.0)).unwrap();
        let surf = Surface::hyperbolic();
        for s in [0.4, 1.3, 2.8, 4.0] {
            let p = curve.point_at(s);
            let x = surf.embed(p).unwrap();
            let val = x.dot(matvec(&c, x));
            assert!(val.abs() < 1e-9, "quadric residual {val}");
        }
        // It is the metric circle of radius 1 about the boosted center.
        let center_embedded = V3::new(-sh, 0.0, ch); // B^-1 applied to (0,0,1)
        let center = surf.point_from_embed(center_embedded).unwrap();
        for s in [0.2, 2.0] {
            let d = surf.distance(center, curve.point_at(s)).unwrap();
            assert!((d - 1.0).abs() < 1e-9, "boosted circle radius {d}");
        }
    }

    #[test]
    fn metric_circles_constant_curvature_values() {
        let sc = sphere_circle(FRAC_PI_4).unwrap();
        assert!((sc.curvature_at(1.0) - 1.0).abs() < 1e-10);
        let hc = hyperbolic_circle(0.8).unwrap();
        assert!((hc.curvature_at(1.0) - 1.0 / 0.8f64.tanh()).abs() < 1e-10);
        assert!((hc.total_length() - 2.0 * PI * 0.8f64.sinh()).abs() < 1e-8);
    }

    #[test]
    fn singular_and_empty_conics_are_rejected() {
        // Degenerate: the base point is on the cone vertex ray.
        let spec = ConicSpec {
            kind: SurfaceKind::Euclidean,
            c: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        };
        // x^2 + y^2 + 1 = 0 has no real points.
        assert!(make_conic(&spec, V3::xy(0.3, 0.0)).is_err());
        let hyperbola = ConicSpec {
            kind: SurfaceKind::Euclidean,
            c: [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]],
        };
        assert!(matches!(
            make_conic(&hyperbola, V3::xy(1.0, 0.0)),
            Err(Error::Unsupported(_))
        ));
    }
}
