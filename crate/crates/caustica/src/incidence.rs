//! Ceva-type concurrency tests on constant-curvature surfaces with the
//! circle-length weight psi, the tangent-incidence test for convex curves,
//! and the tangent-length coboundary ratio.
//!
//! Signed lengths: a cevian foot F on the geodesic carrying the side from P
//! to Q gets the signed parameter t of F measured from P in the direction of
//! Q; the segment beyond the side keeps psi odd (`psi_signed`), so ratios
//! carry the classical Ceva signs.

use crate::curve::ConvexCurve;
use crate::error::{Error, Result};
use crate::surface::{Surface, UnitTangent};
use crate::vec3::V3;

/// A geodesic triangle given by its vertices (pairwise distinct, one chart).
#[derive(Debug, Clone, Copy)]
pub struct GeodesicTriangle {
    pub a: V3,
    pub b: V3,
    pub c: V3,
}

impl GeodesicTriangle {
    pub fn new(surf: &Surface, a: V3, b: V3, c: V3) -> Result<Self> {
        for (p, q) in [(a, b), (b, c), (c, a)] {
            if surf.distance(p, q)? < 1e-12 {
                return Err(Error::invalid("triangle vertices must be pairwise distinct"));
            }
        }
        Ok(GeodesicTriangle { a, b, c })
    }
}

/// Signed parameter of `foot` along the geodesic from `p` toward `q`,
/// together with the side length. Errors when the foot is off the line.
fn signed_foot_param(surf: &Surface, p: V3, q: V3, foot: V3) -> Result<(f64, f64)> {
    let (dir, len) = surf.log_map(p, q)?;
    let (fdir, fd) = surf.log_map(p, foot)?;
    if fd < 1e-12 {
        return Ok((0.0, len));
    }
    let ang = surf.angle(p, dir, fdir);
    let off_line = fd * ang.min(std::f64::consts::PI - ang).sin();
    if off_line.abs() > 1e-9 * (1.0 + fd) {
        return Err(Error::invalid(format!(
            "cevian foot is off its carrying geodesic by {off_line:.3e}"
        )));
    }
    let t = if ang < std::f64::consts::FRAC_PI_2 { fd } else { -fd };
    Ok((t, len))
}

/// The psi-weighted Ceva product for feet `a_f`, `b_f`, `c_f` on the lines
/// BC, CA, AB: psi(|AB'|)/psi(|B'C|) * psi(|CA'|)/psi(|A'B|) *
/// psi(|BC'|)/psi(|C'A|), with signed lengths. Equals 1 exactly when the
/// cevians A-A', B-B', C-C' are concurrent.
pub fn ceva_product(
    surf: &Surface,
    tri: &GeodesicTriangle,
    a_f: V3,
    b_f: V3,
    c_f: V3,
) -> Result<f64> {
    let mut product = 1.0;
    // (from, to, foot): the ratio psi(t) / psi(len - t) per side.
    for (from, to, foot) in [
        (tri.a, tri.c, b_f),
        (tri.c, tri.b, a_f),
        (tri.b, tri.a, c_f),
    ] {
        let (t, len) = signed_foot_param(surf, from, to, foot)?;
        let denom = surf.psi_signed(len - t)?;
        if denom.abs() < 1e-14 {
            return Err(Error::IllConditioned("cevian foot at a vertex".into()));
        }
        product *= surf.psi_signed(t)? / denom;
    }
    Ok(product)
}

/// Foot of the cevian from `apex` through `interior` on the side from `p`
/// to `q` (helper for constructing concurrent configurations).
pub fn cevian_foot(surf: &Surface, apex: V3, interior: V3, p: V3, q: V3) -> Result<V3> {
    let cev = surf.form_through(apex, interior)?;
    let side = surf.form_through(p, q)?;
    let (dir, len) = surf.log_map(p, q)?;
    let mid = surf
        .geodesic_flow(UnitTangent { point: p, vector: dir }, 0.5 * len)?
        .point;
    surf.intersect_forms(cev, side, mid)
}

/// Concurrency residual for the tangent geodesics at three curve parameters:
/// the tangent lines a, b, c pairwise intersect in the tangent-triangle
/// vertices A = b cap c, B = c cap a, C = a cap b; the cevians join each
/// vertex to the opposite tangency point. Returns the smallest pairwise
/// distance among the three cevian intersection points (zero iff the
/// cevians concur). If some cevians fail to meet on the hyperbolic sheet the
/// projective concurrency residual |det| of the three cevian forms is
/// returned instead.
pub fn tangent_incidence_check(
    curve: &ConvexCurve,
    s_a: f64,
    s_b: f64,
    s_c: f64,
) -> Result<f64> {
    let surf = curve.surface();
    let params = [s_a, s_b, s_c];
    let pts: Vec<V3> = params.iter().map(|&s| curve.point_at(s)).collect();
    let forms: Vec<V3> = params
        .iter()
        .map(|&s| surf.geodesic_form(curve.tangent_at(s)))
        .collect::<Result<_>>()?;
    let near = curve.point_at((s_a + s_b + s_c) / 3.0);
    // Tangent-triangle vertex opposite tangency point i.
    let mut vertices = Vec::with_capacity(3);
    for i in 0..3 {
        vertices.push(surf.intersect_forms(forms[(i + 1) % 3], forms[(i + 2) % 3], near)?);
    }
    let cevians: Vec<V3> = (0..3)
        .map(|i| surf.form_through(vertices[i], pts[i]))
        .collect::<Result<_>>()?;
    let mut crossings = Vec::with_capacity(3);
    for i in 0..3 {
        match surf.intersect_forms(cevians[i], cevians[(i + 1) % 3], near) {
            Ok(p) => crossings.push(p),
            Err(Error::Construction(_)) => {
                // Off-sheet (hyperbolic) or parallel: projective residual.
                let det = cevians[0].dot(cevians[1].cross(cevians[2]));
                let scale =
                    cevians[0].norm() * cevians[1].norm() * cevians[2].norm();
                return Ok(det.abs() / scale.max(1e-300));
            }
            Err(e) => return Err(e),
        }
    }
    let mut best = f64::INFINITY;
    for i in 0..3 {
        best = best.min(surf.distance(crossings[i], crossings[(i + 1) % 3])?);
    }
    Ok(best)
}

/// Tangent-length coboundary at a parameter pair: the tangents at A and B
/// meet at C; returns (measured, predicted) with
/// measured = psi(|CA|) / psi(|CB|) and predicted = (kappa(B)/kappa(A))^(1/3).
/// The two agree exactly when the curve carries an invariant string
/// parameter (conics); the gap is a non-integrability witness otherwise.
pub fn coboundary_ratio(curve: &ConvexCurve, s_a: f64, s_b: f64) -> Result<(f64, f64)> {
    let surf = curve.surface();
    let c = curve.tangent_intersection(s_a, s_b)?;
    let la = surf.distance(c, curve.point_at(s_a))?;
    let lb = surf.distance(c, curve.point_at(s_b))?;
    let measured = surf.psi(la)? / surf.psi(lb)?;
    let predicted = (curve.curvature_at(s_b) / curve.curvature_at(s_a)).cbrt();
    Ok((measured, predicted))
}
