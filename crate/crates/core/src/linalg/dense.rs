//! Dense complex Hermitian kernels: Cholesky, Householder tridiagonalization
//! and the shifted-QL tridiagonal eigensolver.
//!
//! The tridiagonal stage works on real data and is shared with the Lanczos
//! driver; the dense generalized problem `K x = λ M x` is reduced through
//! `M = L Lᴴ` and a two-sided Householder pass with phase-normalized
//! subdiagonals, so the full chain stays in exact Hermitian form.

use crate::scalar::{Cplx, Real};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DenseError {
    #[error("matrix is not positive definite (pivot at column {0})")]
    NotPositiveDefinite(usize),
    #[error("tridiagonal QL failed to converge at eigenvalue {0}")]
    QlNoConvergence(usize),
}

/// Column-major complex matrix.
#[derive(Clone, Debug)]
pub struct CMat<T> {
    pub n_rows: usize,
    pub n_cols: usize,
    data: Vec<Cplx<T>>,
}

impl<T: Real> CMat<T> {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            data: vec![Cplx::new(T::zero(), T::zero()); n_rows * n_cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = Cplx::new(T::one(), T::zero());
        }
        m
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Cplx<T> {
        self.data[j * self.n_rows + i]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut Cplx<T> {
        &mut self.data[j * self.n_rows + i]
    }

    pub fn col(&self, j: usize) -> &[Cplx<T>] {
        &self.data[j * self.n_rows..(j + 1) * self.n_rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [Cplx<T>] {
        &mut self.data[j * self.n_rows..(j + 1) * self.n_rows]
    }

    pub fn from_dense_rows(rows: &[Vec<Cplx<T>>]) -> Self {
        let n_rows = rows.len();
        let n_cols = if n_rows == 0 { 0 } else { rows[0].len() };
        let mut m = Self::zeros(n_rows, n_cols);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                *m.at_mut(i, j) = v;
            }
        }
        m
    }
}

/// In-place Cholesky `A = L Lᴴ` of a Hermitian positive definite matrix;
/// on success the lower triangle of `a` holds `L` (diagonal real positive).
pub fn cholesky_in_place<T: Real>(a: &mut CMat<T>) -> Result<(), DenseError> {
    let n = a.n_rows;
    for j in 0..n {
        let mut diag = a.at(j, j).re;
        for t in 0..j {
            diag -= a.at(j, t).norm_sqr();
        }
        if !(diag > T::zero()) || !diag.is_finite() {
            return Err(DenseError::NotPositiveDefinite(j));
        }
        let ljj = diag.sqrt();
        *a.at_mut(j, j) = Cplx::new(ljj, T::zero());
        for i in j + 1..n {
            let mut s = a.at(i, j);
            for t in 0..j {
                s -= a.at(i, t) * a.at(j, t).conj();
            }
            *a.at_mut(i, j) = s / ljj;
        }
    }
    Ok(())
}

/// Solve `L y = b` with the lower factor stored in `l` (lower triangle).
pub fn forward_solve<T: Real>(l: &CMat<T>, b: &mut [Cplx<T>]) {
    let n = l.n_rows;
    for j in 0..n {
        b[j] = b[j] / l.at(j, j);
        let bj = b[j];
        for i in j + 1..n {
            b[i] -= l.at(i, j) * bj;
        }
    }
}

/// Solve `Lᴴ x = b`.
pub fn backward_solve<T: Real>(l: &CMat<T>, b: &mut [Cplx<T>]) {
    let n = l.n_rows;
    for j in (0..n).rev() {
        let mut s = b[j];
        for i in j + 1..n {
            s -= l.at(i, j).conj() * b[i];
        }
        b[j] = s / l.at(j, j);
    }
}

/// Householder reduction of a Hermitian matrix to real symmetric tridiagonal
/// form: `A = Q T Qᴴ` with `T = tridiag(e, d, e)`, `d` real, `e` real
/// non-negative (subdiagonal phases absorbed into `Q`).
pub fn householder_tridiag<T: Real>(a: &mut CMat<T>) -> (Vec<T>, Vec<T>, CMat<T>) {
    let n = a.n_rows;
    let zero = Cplx::new(T::zero(), T::zero());
    let mut q = CMat::identity(n);
    if n == 0 {
        return (vec![], vec![], q);
    }
    let mut v = vec![zero; n];
    let mut p = vec![zero; n];
    let mut t_acc = vec![zero; n];
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1; // length of the eliminated column piece
        let mut normx_sq = T::zero();
        for i in 0..m {
            normx_sq += a.at(k + 1 + i, k).norm_sqr();
        }
        let normx = normx_sq.sqrt();
        if normx == T::zero() {
            continue;
        }
        let x0 = a.at(k + 1, k);
        let phase = if x0.norm() == T::zero() {
            Cplx::new(T::one(), T::zero())
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * normx;
        // v = x - alpha e1
        let mut vnorm_sq = T::zero();
        for i in 0..m {
            let mut vi = a.at(k + 1 + i, k);
            if i == 0 {
                vi -= alpha;
            }
            v[i] = vi;
            vnorm_sq += vi.norm_sqr();
        }
        if vnorm_sq == T::zero() {
            continue;
        }
        let tau = T::two() / vnorm_sq;

        // fix column k / row k
        *a.at_mut(k + 1, k) = alpha;
        *a.at_mut(k, k + 1) = alpha.conj();
        for i in 1..m {
            *a.at_mut(k + 1 + i, k) = zero;
            *a.at_mut(k, k + 1 + i) = zero;
        }

        // two-sided update of the trailing block B = A[k+1.., k+1..]:
        // p = tau B v;  w = p - (tau/2)(vᴴp) v;  B -= v wᴴ + w vᴴ
        for i in 0..m {
            let mut s = zero;
            for j in 0..m {
                s += a.at(k + 1 + i, k + 1 + j) * v[j];
            }
            p[i] = s * tau;
        }
        let mut vhp = zero;
        for i in 0..m {
            vhp += v[i].conj() * p[i];
        }
        let kappa = vhp * (tau * T::half());
        for i in 0..m {
            p[i] -= kappa * v[i]; // now w
        }
        for j in 0..m {
            let wj_c = p[j].conj();
            let vj_c = v[j].conj();
            for i in 0..m {
                let upd = v[i] * wj_c + p[i] * vj_c;
                *a.at_mut(k + 1 + i, k + 1 + j) -= upd;
            }
        }
        // keep the diagonal exactly real against rounding drift
        for i in 0..m {
            let d = a.at(k + 1 + i, k + 1 + i);
            *a.at_mut(k + 1 + i, k + 1 + i) = Cplx::new(d.re, T::zero());
        }

        // accumulate Q <- Q (I - tau v vᴴ) on columns k+1..
        for r in 0..n {
            let mut s = zero;
            for j in 0..m {
                s += q.at(r, k + 1 + j) * v[j];
            }
            t_acc[r] = s * tau;
        }
        for j in 0..m {
            let vj_c = v[j].conj();
            for r in 0..n {
                let upd = t_acc[r] * vj_c;
                *q.at_mut(r, k + 1 + j) -= upd;
            }
        }
    }

    // extract tridiagonal, normalize subdiagonal phases into Q
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n.saturating_sub(1)];
    let mut ph = vec![Cplx::new(T::one(), T::zero()); n];
    for i in 0..n {
        d[i] = a.at(i, i).re;
    }
    for i in 0..n - 1 {
        let s = a.at(i + 1, i);
        let mag = s.norm();
        e[i] = mag;
        ph[i + 1] = if mag == T::zero() {
            ph[i]
        } else {
            ph[i] * (s / mag)
        };
    }
    for (j, f) in ph.iter().enumerate() {
        for r in 0..n {
            let val = q.at(r, j) * *f;
            *q.at_mut(r, j) = val;
        }
    }
    (d, e, q)
}

/// Eigen-decomposition of a real symmetric tridiagonal matrix by the
/// implicit-shift QL method, rotations accumulated into the columns of `z`.
///
/// `d` holds the diagonal (overwritten with ascending eigenvalues), `e` the
/// subdiagonal (`e[i]` couples `i` and `i+1`; destroyed). `z` must come in
/// as the basis to rotate (identity for plain eigenvectors); its columns are
/// permuted into eigenvalue order on return.
pub fn sym_tridiag_eig<T: Real>(
    d: &mut Vec<T>,
    e: &mut Vec<T>,
    z: &mut Vec<Vec<T>>,
) -> Result<(), DenseError> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    assert_eq!(e.len(), n - 1);
    let mut ee = vec![T::zero(); n];
    ee[..n - 1].copy_from_slice(&e[..n - 1]);

    for l in 0..n {
        let mut iter = 0usize;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if ee[m].abs() <= T::epsilon() * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(DenseError::QlNoConvergence(l));
            }
            let mut g = (d[l + 1] - d[l]) / (T::two() * ee[l]);
            let mut r = g.hypot(T::one());
            let sign_r = if g >= T::zero() { r.abs() } else { -r.abs() };
            g = d[m] - d[l] + ee[l] / (g + sign_r);
            let mut s = T::one();
            let mut c = T::one();
            let mut p = T::zero();
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * ee[i];
                let b = c * ee[i];
                r = f.hypot(g);
                ee[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] -= p;
                    ee[m] = T::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + T::two() * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                // rotate columns i and i+1 of z
                let (za, zb) = z.split_at_mut(i + 1);
                let ci = za[i].as_mut_slice();
                let cj = zb[0].as_mut_slice();
                for k in 0..ci.len() {
                    f = cj[k];
                    cj[k] = s * ci[k] + c * f;
                    ci[k] = c * ci[k] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            ee[l] = g;
            ee[m] = T::zero();
        }
    }

    // sort ascending, carrying columns
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).expect("NaN eigenvalue"));
    let d_old = d.clone();
    let z_old = z.clone();
    for (new, &old) in idx.iter().enumerate() {
        d[new] = d_old[old];
        z[new] = z_old[old].clone();
    }
    e.iter_mut().for_each(|x| *x = T::zero());
    Ok(())
}

/// All eigenpairs of a dense Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eig<T: Real>(a: &mut CMat<T>) -> Result<(Vec<T>, CMat<T>), DenseError> {
    let n = a.n_rows;
    let (mut d, mut e, q) = householder_tridiag(a);
    let mut z: Vec<Vec<T>> = (0..n)
        .map(|j| {
            let mut col = vec![T::zero(); n];
            col[j] = T::one();
            col
        })
        .collect();
    sym_tridiag_eig(&mut d, &mut e, &mut z)?;
    // eigenvectors = Q * Z (complex × real)
    let mut vecs = CMat::zeros(n, n);
    for j in 0..n {
        let zj = &z[j];
        let out = vecs.col_mut(j);
        for t in 0..n {
            let w = zj[t];
            if w == T::zero() {
                continue;
            }
            let qc = &q.data[t * n..(t + 1) * n];
            for r in 0..n {
                out[r] += qc[r] * Cplx::new(w, T::zero());
            }
        }
    }
    Ok((d, vecs))
}

/// Lowest `m` eigenpairs of the dense generalized problem `K x = λ M x`
/// (`M` positive definite), via `M = L Lᴴ` and a full Hermitian solve.
pub fn generalized_lowest_pairs<T: Real>(
    k: &CMat<T>,
    m: &CMat<T>,
    want: usize,
) -> Result<(Vec<T>, Vec<Vec<Cplx<T>>>), DenseError> {
    let n = k.n_rows;
    assert!(want <= n);
    let mut l = m.clone();
    cholesky_in_place(&mut l)?;
    // B = L⁻¹ K L⁻ᴴ
    let mut b = k.clone();
    for j in 0..n {
        forward_solve(&l, b.col_mut(j)); // B <- L⁻¹ K
    }
    // B <- (L⁻¹ Bᴴ)ᴴ  = B L⁻ᴴ
    let mut bh = CMat::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            *bh.at_mut(i, j) = b.at(j, i).conj();
        }
    }
    for j in 0..n {
        forward_solve(&l, bh.col_mut(j));
    }
    // B L⁻ᴴ = (L⁻¹ Bᴴ)ᴴ = bhᴴ; average with its adjoint to stay exactly Hermitian
    let mut sym = CMat::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            let v = (bh.at(j, i).conj() + bh.at(i, j)) * Cplx::new(T::half(), T::zero());
            *sym.at_mut(i, j) = v;
        }
    }
    let (vals, vecs) = hermitian_eig(&mut sym)?;
    let mut out_vecs = Vec::with_capacity(want);
    for j in 0..want {
        let mut x: Vec<Cplx<T>> = vecs.col(j).to_vec();
        backward_solve(&l, &mut x);
        out_vecs.push(x);
    }
    Ok((vals[..want].to_vec(), out_vecs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Cplx<f64> {
        Cplx::new(re, im)
    }

    fn hermitian4() -> CMat<f64> {
        let rows = vec![
            vec![c(4.0, 0.0), c(1.0, 1.0), c(0.0, 0.0), c(0.5, -0.5)],
            vec![c(1.0, -1.0), c(5.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(2.0, 0.0), c(6.0, 0.0), c(1.0, 2.0)],
            vec![c(0.5, 0.5), c(0.0, 0.0), c(1.0, -2.0), c(7.0, 0.0)],
        ];
        CMat::from_dense_rows(&rows)
    }

    #[test]
    fn cholesky_reconstructs() {
        let a = hermitian4();
        let mut l = a.clone();
        cholesky_in_place(&mut l).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let mut s = c(0.0, 0.0);
                for t in 0..=i.min(j) {
                    s += l.at(i, t) * l.at(j, t).conj();
                }
                assert!((s - a.at(i, j)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn tridiagonalization_preserves_similarity() {
        let a0 = hermitian4();
        let mut a = a0.clone();
        let (d, e, q) = householder_tridiag(&mut a);
        // rebuild Q T Qᴴ and compare with the original
        let n = 4;
        let mut t = CMat::zeros(n, n);
        for i in 0..n {
            *t.at_mut(i, i) = c(d[i], 0.0);
        }
        for i in 0..n - 1 {
            *t.at_mut(i + 1, i) = c(e[i], 0.0);
            *t.at_mut(i, i + 1) = c(e[i], 0.0);
            assert!(e[i] >= 0.0);
        }
        let mut qt = CMat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut s = c(0.0, 0.0);
                for r in 0..n {
                    s += q.at(i, r) * t.at(r, j);
                }
                *qt.at_mut(i, j) = s;
            }
        }
        for i in 0..n {
            for j in 0..n {
                let mut s = c(0.0, 0.0);
                for r in 0..n {
                    s += qt.at(i, r) * q.at(j, r).conj();
                }
                assert!((s - a0.at(i, j)).norm() < 1e-12, "entry ({i},{j})");
            }
        }
        // Q unitary
        for i in 0..n {
            for j in 0..n {
                let mut s = c(0.0, 0.0);
                for r in 0..n {
                    s += q.at(r, i).conj() * q.at(r, j);
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((s - c(expect, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn tridiag_eigen_on_known_matrix() {
        // tridiag(-1, 2, -1), n=4: eigenvalues 2 - 2 cos(kπ/5)
        let n = 4;
        let mut d = vec![2.0; n];
        let mut e = vec![-1.0; n - 1];
        let mut z: Vec<Vec<f64>> = (0..n)
            .map(|j| {
                let mut col = vec![0.0; n];
                col[j] = 1.0;
                col
            })
            .collect();
        sym_tridiag_eig(&mut d, &mut e, &mut z).unwrap();
        for k in 1..=n {
            let exact = 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / 5.0).cos();
            assert!((d[k - 1] - exact).abs() < 1e-12, "λ_{k}");
        }
        // residual check on one pair
        let lam = d[0];
        let v = &z[0];
        for i in 0..n {
            let mut r = 2.0 * v[i] - lam * v[i];
            if i > 0 {
                r -= v[i - 1];
            }
            if i + 1 < n {
                r -= v[i + 1];
            }
            assert!(r.abs() < 1e-12);
        }
    }

    #[test]
    fn hermitian_eig_residuals() {
        let a0 = hermitian4();
        let mut a = a0.clone();
        let (vals, vecs) = hermitian_eig(&mut a).unwrap();
        for j in 0..4 {
            assert!(j == 0 || vals[j] >= vals[j - 1]);
            for i in 0..4 {
                let mut r = c(0.0, 0.0);
                for t in 0..4 {
                    r += a0.at(i, t) * vecs.at(t, j);
                }
                r -= vecs.at(i, j) * c(vals[j], 0.0);
                assert!(r.norm() < 1e-11, "residual ({i},{j}) = {}", r.norm());
            }
        }
    }

    #[test]
    fn generalized_matches_shifted_identity() {
        // K x = λ M x with M = 2 I  ⇒  eigenvalues of K/2
        let a0 = hermitian4();
        let mut m = CMat::zeros(4, 4);
        for i in 0..4 {
            *m.at_mut(i, i) = c(2.0, 0.0);
        }
        let (gen_vals, _) = generalized_lowest_pairs(&a0, &m, 4).unwrap();
        let mut a = a0.clone();
        let (std_vals, _) = hermitian_eig(&mut a).unwrap();
        for j in 0..4 {
            assert!((gen_vals[j] - std_vals[j] / 2.0).abs() < 1e-11);
        }
    }
}
