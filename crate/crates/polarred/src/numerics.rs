//! Small self-contained numerical kernels: Gauss-Legendre rules and a
//! Sturm-bisection eigensolver for symmetric tridiagonal matrices.
//!
//! Both are deterministic; neither allocates per call beyond its output.

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
///
/// Newton iteration on the Legendre recurrence; accurate to machine
/// precision for the orders used here (n <= 256).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // P_n(x) and P_{n-1}(x) by upward recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        xs[i] = -x;
        xs[n - 1 - i] = x;
        ws[i] = w;
        ws[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        // Central node of odd rules is exactly zero.
        xs[n / 2] = 0.0;
    }
    (xs, ws)
}

/// Same rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (xs, ws) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (
        xs.iter().map(|&x| mid + half * x).collect(),
        ws.iter().map(|&w| half * w).collect(),
    )
}

/// Number of eigenvalues of the symmetric tridiagonal matrix strictly
/// below `x`, by the Sturm pivot recurrence.
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0usize;
    let mut d = 1.0f64;
    for (i, &a) in diag.iter().enumerate() {
        let b2 = if i > 0 { off[i - 1] * off[i - 1] } else { 0.0 };
        d = (a - x) - b2 / d;
        if d == 0.0 {
            d = -1e-300;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Lowest `k` eigenvalues of a symmetric tridiagonal matrix, ascending.
///
/// `diag` holds the n diagonal entries, `off` the n-1 off-diagonal ones.
/// Bisection on the Sturm count; each eigenvalue is located independently,
/// so the result is deterministic and does not depend on clustering.
pub fn tridiag_lowest_eigenvalues(diag: &[f64], off: &[f64], k: usize) -> Vec<f64> {
    let n = diag.len();
    assert_eq!(off.len(), n.saturating_sub(1));
    let k = k.min(n);
    // Gershgorin interval.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let mut r = 0.0;
        if i > 0 {
            r += off[i - 1].abs();
        }
        if i + 1 < n {
            r += off[i].abs();
        }
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let scale = 1.0 + lo.abs().max(hi.abs());
    (0..k)
        .map(|j| {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                if b - a <= 1e-15 * scale {
                    break;
                }
                let m = 0.5 * (a + b);
                if sturm_count(diag, off, m) > j {
                    b = m;
                } else {
                    a = m;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

/// Least-squares slope of y against x.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(&a, &b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|&a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        // An n-point rule is exact for degree 2n-1.
        let (xs, ws) = gauss_legendre(5);
        for deg in 0..=9 {
            let got: f64 = xs
                .iter()
                .zip(&ws)
                .map(|(&x, &w)| w * x.powi(deg))
                .sum();
            let exact = if deg % 2 == 0 {
                2.0 / (deg as f64 + 1.0)
            } else {
                0.0
            };
            assert_abs_diff_eq!(got, exact, epsilon = 1e-14);
        }
    }

    #[test]
    fn gauss_legendre_weights_sum_to_interval_length() {
        let (_, ws) = gauss_legendre_on(64, 0.0, 2.0 * std::f64::consts::PI);
        assert_abs_diff_eq!(ws.iter().sum::<f64>(), 2.0 * std::f64::consts::PI, epsilon = 1e-12);
    }

    #[test]
    fn gauss_legendre_handles_oscillatory_integrands() {
        // Entire integrand: spectral convergence, 64 nodes gives machine precision.
        let (xs, ws) = gauss_legendre_on(64, 0.0, 2.0 * std::f64::consts::PI);
        let got: f64 = xs
            .iter()
            .zip(&ws)
            .map(|(&x, &w)| w * (3.0 * x / 2.0).sin() * (5.0 * x / 2.0).sin())
            .sum();
        assert_abs_diff_eq!(got, 0.0, epsilon = 1e-13);
    }

    #[test]
    fn tridiag_matches_dirichlet_laplacian_closed_form() {
        // -f'' on (0, L) with Dirichlet walls, n interior nodes:
        // eigenvalues (2/h^2) (1 - cos(m pi / (n+1))).
        let n = 50;
        let l = 1.0;
        let h = l / (n as f64 + 1.0);
        let diag = vec![2.0 / (h * h); n];
        let off = vec![-1.0 / (h * h); n - 1];
        let eigs = tridiag_lowest_eigenvalues(&diag, &off, 4);
        for (m, &lam) in eigs.iter().enumerate() {
            let exact = 2.0 / (h * h)
                * (1.0 - (std::f64::consts::PI * (m as f64 + 1.0) / (n as f64 + 1.0)).cos());
            assert_abs_diff_eq!(lam, exact, epsilon = 1e-9 * (1.0 + exact.abs()));
        }
    }

    #[test]
    fn tridiag_resolves_clustered_eigenvalues() {
        // Two decoupled 2x2 blocks with identical spectra: eigenvalues come
        // out doubled, ascending.
        let diag = vec![1.0, 1.0, 1.0, 1.0];
        let off = vec![0.5, 0.0, 0.5];
        let eigs = tridiag_lowest_eigenvalues(&diag, &off, 4);
        assert_abs_diff_eq!(eigs[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(eigs[1], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(eigs[2], 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(eigs[3], 1.5, epsilon = 1e-12);
    }

    #[test]
    fn slope_of_exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|&v| 2.0 * v - 0.7).collect();
        assert_abs_diff_eq!(fit_slope(&x, &y), 2.0, epsilon = 1e-12);
    }
}
