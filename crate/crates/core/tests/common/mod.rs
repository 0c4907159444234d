//! Independent oracles shared by the integration tests.
//!
//! Nothing here reuses library code paths under test: the finite-difference
//! solver discretizes the limit ODE directly, and the root-finder brackets
//! the dispersion relation with plain bisection.

/// Solve `-u'' + c u = g` on `[0, l]` with Neumann ends by second-order
/// central differences on `n + 1` uniform nodes (mirror ghost points at the
/// ends). Returns the nodal values.
pub fn fd_neumann_solve(l: f64, c: f64, g: impl Fn(f64) -> f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && l > 0.0 && c > 0.0);
    let h = l / n as f64;
    let h2 = h * h;
    // tridiagonal system: sub/diag/super and right-hand side
    let m = n + 1;
    let mut sub = vec![-1.0 / h2; m];
    let mut diag = vec![2.0 / h2 + c; m];
    let mut sup = vec![-1.0 / h2; m];
    let mut rhs: Vec<f64> = (0..m).map(|i| g(i as f64 * h)).collect();
    // mirror ghosts fold the off-diagonal neighbour back with weight 2
    sup[0] = -2.0 / h2;
    sub[m - 1] = -2.0 / h2;
    // Thomas algorithm
    for i in 1..m {
        let w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    let mut u = vec![0.0; m];
    u[m - 1] = rhs[m - 1] / diag[m - 1];
    for i in (0..m - 1).rev() {
        u[i] = (rhs[i] - sup[i] * u[i + 1]) / diag[i];
    }
    u
}

/// Dispersion function `rho(lambda) = lambda (1 + q a / (q - lambda))` of
/// the two-component limit operator with coupling `q` and room area `a`.
pub fn rho(q: f64, a: f64, lambda: f64) -> f64 {
    lambda * (1.0 + q * a / (q - lambda))
}

/// Root of `rho(lambda) = target` inside `(lo, hi)`, found by bisection.
/// The bracket must avoid the pole at `lambda = q` and contain a sign
/// change of `rho - target`.
pub fn bisect_rho(q: f64, a: f64, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    let f = |x: f64| rho(q, a, x) - target;
    let (flo, fhi) = (f(lo), f(hi));
    assert!(
        flo.signum() != fhi.signum(),
        "no sign change on [{lo}, {hi}]: f = {flo}, {fhi}"
    );
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if f(mid).signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Both roots of `rho(lambda) = target` for a finite coupling: one below
/// the pole, one above the gap, bracketed from the known band layout.
pub fn bisect_pair(q: f64, a: f64, target: f64) -> (f64, f64) {
    assert!(target > 0.0);
    let tiny = 1e-13 * q.max(1.0);
    let lower = bisect_rho(q, a, target, 0.0, q - tiny);
    let upper_lo = q + q * a + tiny;
    let mut upper_hi = upper_lo + target + q * (1.0 + a) + 1.0;
    while rho(q, a, upper_hi) < target {
        upper_hi *= 2.0;
    }
    let upper = bisect_rho(q, a, target, upper_lo, upper_hi);
    (lower, upper)
}
