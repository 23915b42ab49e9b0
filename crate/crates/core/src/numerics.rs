//! Small numerical routines shared across the crate: 1-D minimizers, a
//! bisection root finder, Gauss-Legendre quadrature and a 2-D Nelder-Mead
//! simplex. All of them operate on plain closures.

use crate::error::{Error, Result};

/// sin(x)/x with a series fallback near zero to avoid cancellation.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Golden-section search for the minimum of `f` on `[a, b]`.
///
/// Returns `(x_min, f_min)`. `rel_tol` is on the bracket width.
pub fn golden_section_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, rel_tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_895;

    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);

    for _ in 0..200 {
        if (b - a).abs() <= rel_tol * (a.abs() + b.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }

    if f1 < f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Bisection for a sign change of `f` on `[a, b]`.
pub fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, rel_tol: f64) -> Result<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::numerical("bisection: no sign change in bracket"));
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= rel_tol * m.abs() {
            return Ok(m);
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on the
/// Legendre polynomial. Accurate to machine precision for n up to a few
/// thousand.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-like initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(x) and P'_n(x).
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
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Gauss-Legendre integral of `f` on `[a, b]` with `n` nodes.
pub fn gauss_legendre_integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    x.iter()
        .zip(&w)
        .map(|(&xi, &wi)| wi * f(mid + half * xi))
        .sum::<f64>()
        * half
}

/// Adaptive Simpson quadrature on `[a, b]`.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(fa, fm, fb, b - a);
    let tol = rel_tol * whole.abs().max(1e-300);
    recurse(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Index of the minimum element (ties broken by first occurrence).
pub fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

/// Parabolic refinement of a grid minimum at interior index `i`.
///
/// Fits a parabola through `(x[i-1], y[i-1]) .. (x[i+1], y[i+1])` and returns
/// the abscissa of its vertex, clamped to the bracketing cell. Falls back to
/// `x[i]` for boundary indices or degenerate fits.
pub fn parabolic_refine(x: &[f64], y: &[f64], i: usize) -> f64 {
    if i == 0 || i + 1 >= x.len() {
        return x[i];
    }
    let (x0, x1, x2) = (x[i - 1], x[i], x[i + 1]);
    let (y0, y1, y2) = (y[i - 1], y[i], y[i + 1]);
    let denom = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
    if denom.abs() < 1e-300 {
        return x1;
    }
    let num = (x1 - x0).powi(2) * (y1 - y2) - (x1 - x2).powi(2) * (y1 - y0);
    let xv = x1 - 0.5 * num / denom;
    xv.clamp(x0.min(x2), x0.max(x2))
}

/// Two-dimensional Nelder-Mead minimization.
///
/// Plain downhill simplex with standard coefficients; good enough for the
/// smooth objectives in this crate. Returns `(x, f(x))`.
pub fn nelder_mead_2d(
    f: impl Fn([f64; 2]) -> f64,
    start: [f64; 2],
    scale: [f64; 2],
    max_iter: usize,
) -> ([f64; 2], f64) {
    let mut simplex = [
        start,
        [start[0] + scale[0], start[1]],
        [start[0], start[1] + scale[1]],
    ];
    let mut fv = [f(simplex[0]), f(simplex[1]), f(simplex[2])];

    for _ in 0..max_iter {
        // Order: best, middle, worst.
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&a, &b| fv[a].partial_cmp(&fv[b]).unwrap_or(std::cmp::Ordering::Equal));
        let (b, m, w) = (idx[0], idx[1], idx[2]);

        let spread = (fv[w] - fv[b]).abs();
        if spread <= 1e-12 * (fv[b].abs() + 1e-300) {
            break;
        }

        let centroid = [
            0.5 * (simplex[b][0] + simplex[m][0]),
            0.5 * (simplex[b][1] + simplex[m][1]),
        ];
        let refl = [
            centroid[0] + (centroid[0] - simplex[w][0]),
            centroid[1] + (centroid[1] - simplex[w][1]),
        ];
        let fr = f(refl);

        if fr < fv[b] {
            let exp = [
                centroid[0] + 2.0 * (centroid[0] - simplex[w][0]),
                centroid[1] + 2.0 * (centroid[1] - simplex[w][1]),
            ];
            let fe = f(exp);
            if fe < fr {
                simplex[w] = exp;
                fv[w] = fe;
            } else {
                simplex[w] = refl;
                fv[w] = fr;
            }
        } else if fr < fv[m] {
            simplex[w] = refl;
            fv[w] = fr;
        } else {
            let contr = [
                centroid[0] + 0.5 * (simplex[w][0] - centroid[0]),
                centroid[1] + 0.5 * (simplex[w][1] - centroid[1]),
            ];
            let fc = f(contr);
            if fc < fv[w] {
                simplex[w] = contr;
                fv[w] = fc;
            } else {
                // Shrink toward the best vertex.
                for i in [m, w] {
                    simplex[i] = [
                        simplex[b][0] + 0.5 * (simplex[i][0] - simplex[b][0]),
                        simplex[b][1] + 0.5 * (simplex[i][1] - simplex[b][1]),
                    ];
                    fv[i] = f(simplex[i]);
                }
            }
        }
    }

    let mut best = 0;
    for i in 1..3 {
        if fv[i] < fv[best] {
            best = i;
        }
    }
    (simplex[best], fv[best])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn golden_section_finds_quadratic_minimum() {
        let (x, _) = golden_section_min(|x| (x - 1.7).powi(2), -10.0, 10.0, 1e-10);
        assert_relative_eq!(x, 1.7, max_relative = 1e-6);
    }

    #[test]
    fn bisect_finds_root() {
        let x = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-12).unwrap();
        assert_relative_eq!(x, 2.0_f64.sqrt(), max_relative = 1e-10);
    }

    #[test]
    fn gauss_legendre_integrates_polynomial_exactly() {
        // 2n-1 degree exactness: x^6 with 4 nodes.
        let v = gauss_legendre_integrate(|x| x.powi(6), -1.0, 1.0, 4);
        assert_relative_eq!(v, 2.0 / 7.0, max_relative = 1e-13);
    }

    #[test]
    fn adaptive_simpson_handles_peaked_integrand() {
        let v = adaptive_simpson(&|x: f64| (-x * x).exp(), -8.0, 8.0, 1e-10);
        assert_relative_eq!(v, std::f64::consts::PI.sqrt(), max_relative = 1e-8);
    }

    #[test]
    fn sinc_series_matches_ratio_form() {
        let x = 9.99e-5;
        assert_relative_eq!(sinc(x), x.sin() / x, max_relative = 1e-14);
        assert_eq!(sinc(0.0), 1.0);
    }

    #[test]
    fn nelder_mead_finds_rosenbrock_ish_minimum() {
        let f = |p: [f64; 2]| (p[0] - 3.0).powi(2) + 2.0 * (p[1] + 1.0).powi(2);
        let (x, _) = nelder_mead_2d(f, [0.0, 0.0], [1.0, 1.0], 300);
        assert_relative_eq!(x[0], 3.0, epsilon = 1e-5);
        assert_relative_eq!(x[1], -1.0, epsilon = 1e-5);
    }
}
