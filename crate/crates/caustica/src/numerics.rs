//! Shared numerical kernels: Gauss–Legendre quadrature, bracketed root
//! finding, small dense least squares, and finite-difference stencils.
//!
//! Everything here is deterministic; no randomness, no global state beyond
//! cached quadrature nodes.

use crate::error::{Error, Result};
use once_cell::sync::Lazy;

/// Gauss–Legendre nodes and weights on [-1, 1].
///
/// Computed by Newton iteration on the Legendre recurrence; accurate to a few
/// ulps, which matters because several consumers push quadrature to machine
/// precision.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-like initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n(x) and P_n'(x) via the three-term recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

static GL16: Lazy<(Vec<f64>, Vec<f64>)> = Lazy::new(|| gauss_legendre(16));
static GL32: Lazy<(Vec<f64>, Vec<f64>)> = Lazy::new(|| gauss_legendre(32));

/// Fixed 32-point Gauss–Legendre rule on [a, b].
pub fn quad_gl32<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> f64 {
    let (nodes, weights) = (&GL32.0, &GL32.1);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (&x, &w) in nodes.iter().zip(weights) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

fn quad_gl16<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> f64 {
    let (nodes, weights) = (&GL16.0, &GL16.1);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (&x, &w) in nodes.iter().zip(weights) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Adaptive Gauss–Legendre quadrature with absolute tolerance `tol`.
///
/// Splits a panel whenever the 16- and 32-point estimates disagree; for
/// analytic integrands this converges to near machine precision quickly.
pub fn quad_adaptive<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, tol: f64) -> Result<f64> {
    fn rec<F: FnMut(f64) -> f64>(
        f: &mut F,
        a: f64,
        b: f64,
        tol: f64,
        whole: f64,
        depth: usize,
    ) -> Result<f64> {
        let mid = 0.5 * (a + b);
        let left = quad_gl32(f, a, mid);
        let right = quad_gl32(f, mid, b);
        let err = (left + right - whole).abs();
        if err <= tol || depth >= 28 {
            if depth >= 28 && err > tol.max(1e-12) {
                return Err(Error::convergence(format!(
                    "adaptive quadrature stalled on [{a}, {b}] (err {err:.3e})"
                )));
            }
            return Ok(left + right);
        }
        let l = rec(f, a, mid, 0.5 * tol, left, depth + 1)?;
        let r = rec(f, mid, b, 0.5 * tol, right, depth + 1)?;
        Ok(l + r)
    }
    if a == b {
        return Ok(0.0);
    }
    let coarse = quad_gl16(f, a, b);
    let fine = quad_gl32(f, a, b);
    if (fine - coarse).abs() <= tol {
        return Ok(fine);
    }
    rec(f, a, b, tol, fine, 0)
}

/// Brent's method on a bracketing interval; `fa`/`fb` must have opposite sign.
pub fn brent<F: FnMut(f64) -> f64>(
    f: &mut F,
    mut a: f64,
    mut b: f64,
    xtol: f64,
    max_iter: usize,
) -> Result<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa * fb > 0.0 {
        return Err(Error::convergence(format!(
            "root not bracketed on [{a}, {b}] (f = {fa:.3e}, {fb:.3e})"
        )));
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.abs() > fc.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // Inverse quadratic interpolation / secant.
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        if d.abs() > tol1 {
            b += d;
        } else {
            b += tol1.copysign(xm);
        }
        fb = f(b);
        if fb == 0.0 {
            return Ok(b);
        }
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
    }
    Err(Error::convergence("brent: iteration budget exhausted"))
}

/// Expand a bracket around `seed` until `f` changes sign.
///
/// Tries progressively wider intervals inside [lo, hi]; returns (a, b) with
/// f(a) * f(b) <= 0.
pub fn bracket_root<F: FnMut(f64) -> f64>(
    f: &mut F,
    seed: f64,
    initial_half_width: f64,
    lo: f64,
    hi: f64,
) -> Result<(f64, f64)> {
    let mut h = initial_half_width;
    for _ in 0..60 {
        let a = (seed - h).max(lo);
        let b = (seed + h).min(hi);
        if f(a) * f(b) <= 0.0 {
            return Ok((a, b));
        }
        h *= 1.6;
        if a == lo && b == hi {
            break;
        }
    }
    Err(Error::convergence(format!(
        "could not bracket a sign change near {seed}"
    )))
}

/// Solve a symmetric positive-definite system in place via Cholesky.
pub fn solve_spd(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    // Factor A = L L^T.
    for j in 0..n {
        for k in 0..j {
            let ljk = a[j][k];
            for i in j..n {
                a[i][j] -= a[i][k] * ljk;
            }
        }
        let d = a[j][j];
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::IllConditioned(
                "least-squares normal matrix is not positive definite".into(),
            ));
        }
        let s = d.sqrt();
        for i in j..n {
            a[i][j] /= s;
        }
    }
    // Forward substitution L y = b.
    for i in 0..n {
        for k in 0..i {
            b[i] -= a[i][k] * b[k];
        }
        b[i] /= a[i][i];
    }
    // Back substitution L^T x = y.
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            b[i] -= a[k][i] * b[k];
        }
        b[i] /= a[i][i];
    }
    Ok(b)
}

/// Weighted linear least squares: minimize sum_i w_i (A_i . x - y_i)^2.
///
/// Columns are equilibrated before forming normal equations so moderately
/// ill-scaled Vandermonde-type designs stay solvable.
pub fn least_squares(design: &[Vec<f64>], ys: &[f64], weights: Option<&[f64]>) -> Result<Vec<f64>> {
    let m = design.len();
    assert_eq!(m, ys.len());
    if m == 0 {
        return Err(Error::invalid("least squares with no rows"));
    }
    let n = design[0].len();
    // Column scales.
    let mut scale = vec![0.0f64; n];
    for row in design {
        for (j, &v) in row.iter().enumerate() {
            scale[j] = scale[j].max(v.abs());
        }
    }
    for s in scale.iter_mut() {
        if *s == 0.0 {
            *s = 1.0;
        }
    }
    let mut ata = vec![vec![0.0; n]; n];
    let mut atb = vec![0.0; n];
    for (i, row) in design.iter().enumerate() {
        let w = weights.map_or(1.0, |ws| ws[i]);
        for j in 0..n {
            let rj = row[j] / scale[j];
            atb[j] += w * rj * ys[i];
            for k in 0..=j {
                ata[j][k] += w * rj * row[k] / scale[k];
            }
        }
    }
    for j in 0..n {
        for k in (j + 1)..n {
            ata[j][k] = ata[k][j];
        }
    }
    let x = solve_spd(ata, atb)?;
    Ok(x.into_iter().zip(scale).map(|(v, s)| v / s).collect())
}

/// Ordinary least-squares line fit; returns (slope, intercept).
pub fn line_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    (slope, intercept)
}

/// Solve a small dense linear system by Gaussian elimination with partial
/// pivoting. Used for exact interpolation systems (4x4, 6x6).
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let mut piv = col;
        for r in (col + 1)..n {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        if a[piv][col].abs() < 1e-300 {
            return Err(Error::IllConditioned("singular linear system".into()));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in (col + 1)..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            b[i] -= a[i][k] * b[k];
        }
        b[i] /= a[i][i];
    }
    Ok(b)
}

/// Fourth-order central first derivative.
pub fn deriv_central4<F: FnMut(f64) -> f64>(f: &mut F, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

/// Second-order central first derivative.
pub fn deriv_central2<F: FnMut(f64) -> f64>(f: &mut F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_nodes_integrate_polynomials_exactly() {
        // 16-point rule is exact through degree 31.
        let mut f = |x: f64| x.powi(20) + 3.0 * x.powi(7);
        let got = quad_gl32(&mut f, -1.0, 1.0);
        let want = 2.0 / 21.0;
        assert!((got - want).abs() < 1e-15, "got {got}");
    }

    #[test]
    fn adaptive_quadrature_hits_tight_tolerance() {
        let mut f = |x: f64| (x * x).exp();
        let got = quad_adaptive(&mut f, 0.0, 1.0, 1e-14).unwrap();
        // erfi-based reference value of \int_0^1 e^{x^2} dx.
        let want = 1.4626517459071816;
        assert!((got - want).abs() < 1e-13, "got {got}");
    }

    #[test]
    fn brent_finds_simple_root() {
        let mut f = |x: f64| x.cos() - x;
        let r = brent(&mut f, 0.0, 1.0, 1e-15, 100).unwrap();
        assert!((r - 0.7390851332151607).abs() < 1e-12);
    }

    #[test]
    fn least_squares_recovers_polynomial() {
        let xs: Vec<f64> = (0..20).map(|i| 0.1 * i as f64).collect();
        let design: Vec<Vec<f64>> = xs.iter().map(|&x| vec![1.0, x, x * x]).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| 2.0 - x + 0.5 * x * x).collect();
        let c = least_squares(&design, &ys, None).unwrap();
        assert!((c[0] - 2.0).abs() < 1e-10);
        assert!((c[1] + 1.0).abs() < 1e-10);
        assert!((c[2] - 0.5).abs() < 1e-10);
    }

    #[test]
    fn dense_solver_matches_known_solution() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let b = vec![5.0, 10.0];
        let x = solve_dense(a, b).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14);
        assert!((x[1] - 3.0).abs() < 1e-14);
    }
}
