//! Dimension-reducing averages that compare a two-dimensional field on the
//! waveguide against one-dimensional limit profiles.
//!
//! `j1` averages over the strip cross-section, `j2` over each room; both
//! are scaled so constants map isometrically. The structured strip
//! backbone and the piecewise-linear elements make the strip average at a
//! grid line, the per-room integrals, and `‖J₁u‖²` exactly computable —
//! no quadrature error enters the near-isometry checks.

use crate::limit::CosineSeries;
use crate::mesh::TriMesh;
use crate::scalar::{Cplx, Real};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AveragingError {
    #[error("mesh has no rooms to average over")]
    NoRooms,
    #[error("bad input: {0}")]
    BadInput(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProfileKind {
    /// Values at grid points, linear in between.
    Linear,
    /// One value per grid cell.
    Constant,
}

/// A one-dimensional profile on an interval, either piecewise linear or
/// piecewise constant over its grid.
#[derive(Clone, Debug)]
pub struct Profile1D<T> {
    pub grid: Vec<T>,
    pub values: Vec<Cplx<T>>,
    pub kind: ProfileKind,
}

impl<T: Real> Profile1D<T> {
    pub fn domain(&self) -> (T, T) {
        (self.grid[0], *self.grid.last().unwrap())
    }

    pub fn eval(&self, x: T) -> Cplx<T> {
        let n = self.grid.len();
        // clamp into the domain, then locate the cell
        let mut i = match self
            .grid
            .binary_search_by(|g| g.partial_cmp(&x).expect("NaN in profile grid"))
        {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        };
        if i >= n - 1 {
            i = n - 2;
        }
        match self.kind {
            ProfileKind::Constant => self.values[i],
            ProfileKind::Linear => {
                let (a, b) = (self.grid[i], self.grid[i + 1]);
                let t = ((x - a) / (b - a)).max(T::zero()).min(T::one());
                let tc = Cplx::new(t, T::zero());
                self.values[i] * (Cplx::new(T::one(), T::zero()) - tc) + self.values[i + 1] * tc
            }
        }
    }

    /// Exact `L²` norm (the integrand is piecewise quadratic at worst).
    pub fn norm_l2(&self) -> T {
        let mut acc = T::zero();
        for i in 0..self.grid.len() - 1 {
            let w = self.grid[i + 1] - self.grid[i];
            match self.kind {
                ProfileKind::Constant => acc += self.values[i].norm_sqr() * w,
                ProfileKind::Linear => {
                    let (a, b) = (self.values[i], self.values[i + 1]);
                    let m = (a + b) * Cplx::new(T::half(), T::zero());
                    acc += w / T::lit(6.0)
                        * (a.norm_sqr() + T::lit(4.0) * m.norm_sqr() + b.norm_sqr());
                }
            }
        }
        acc.sqrt()
    }
}

fn check_len<T: Real>(mesh: &TriMesh<T>, u: &[Cplx<T>]) -> Result<(), AveragingError> {
    if u.len() != mesh.n_vertices() {
        return Err(AveragingError::BadInput(format!(
            "field has {} values for {} vertices",
            u.len(),
            mesh.n_vertices()
        )));
    }
    Ok(())
}

/// Strip average: `(J₁u)(x) = ε^{−1/2} ∫ u(x, y) dy` over the strip
/// cross-section, evaluated exactly at every strip grid line (the element
/// restriction to a grid line is linear in `y`, so the trapezoid rule is
/// exact there).
pub fn j1<T: Real>(mesh: &TriMesh<T>, u: &[Cplx<T>]) -> Result<Profile1D<T>, AveragingError> {
    check_len(mesh, u)?;
    let s = &mesh.strip;
    let scale = Cplx::new(mesh.eps().sqrt().recip(), T::zero());
    let mut values = Vec::with_capacity(s.x.len());
    for col in &s.vid {
        let mut acc = Cplx::new(T::zero(), T::zero());
        for j in 0..s.y.len() - 1 {
            let dy = s.y[j + 1] - s.y[j];
            acc += (u[col[j]] + u[col[j + 1]]) * Cplx::new(dy * T::half(), T::zero());
        }
        values.push(acc * scale);
    }
    Ok(Profile1D {
        grid: s.x.clone(),
        values,
        kind: ProfileKind::Linear,
    })
}

/// Room average: one value per period cell,
/// `(J₂u)_j = (ε |B_j|)^{−1/2} ∫_{room_j} u`, constant on that cell.
/// The per-room integral of a piecewise-linear field is the exact
/// area-weighted vertex mean.
pub fn j2<T: Real>(mesh: &TriMesh<T>, u: &[Cplx<T>]) -> Result<Profile1D<T>, AveragingError> {
    check_len(mesh, u)?;
    let cells = mesh.cells();
    if cells.iter().any(|c| c.protuberance.is_none()) {
        return Err(AveragingError::NoRooms);
    }
    let third = Cplx::new(T::lit(3.0).recip(), T::zero());
    let mut integrals = vec![Cplx::new(T::zero(), T::zero()); cells.len()];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        if mesh.regions[t] != crate::geometry::Region::Room {
            continue;
        }
        let area = mesh.triangle_area(t);
        let sum = u[tri[0]] + u[tri[1]] + u[tri[2]];
        integrals[mesh.cell_of[t]] += sum * third * Cplx::new(area, T::zero());
    }
    let mut grid = Vec::with_capacity(cells.len() + 1);
    let mut values = Vec::with_capacity(cells.len());
    for (j, cell) in cells.iter().enumerate() {
        grid.push(cell.strip.x0);
        let room_area = cell.protuberance.as_ref().unwrap().room.area();
        let norm = (cell.eps * room_area).sqrt();
        values.push(integrals[j] * Cplx::new(norm.recip(), T::zero()));
    }
    grid.push(cells.last().unwrap().strip.x1);
    Ok(Profile1D {
        grid,
        values,
        kind: ProfileKind::Constant,
    })
}

/// Exact `‖J₁u‖²_{L²}`: between grid lines the cross-section integral
/// `F(x) = ∫ u dy` is quadratic in `x` (each quad cell is cut by its
/// SW–NE diagonal), so sampling `F` at the column ends and midpoint and
/// integrating `|F|²` with three-point Gauss is exact.
pub fn j1_norm_sq_exact<T: Real>(mesh: &TriMesh<T>, u: &[Cplx<T>]) -> Result<T, AveragingError> {
    check_len(mesh, u)?;
    let s = &mesh.strip;
    let half = Cplx::new(T::half(), T::zero());
    let column_integral = |col: &[usize]| {
        let mut acc = Cplx::new(T::zero(), T::zero());
        for j in 0..s.y.len() - 1 {
            let dy = s.y[j + 1] - s.y[j];
            acc += (u[col[j]] + u[col[j + 1]]) * Cplx::new(dy * T::half(), T::zero());
        }
        acc
    };
    // Gauss–Legendre on [0, 1], exact through degree 5
    let off = T::lit(0.7745966692414834) * T::half(); // √(3/5)/2
    let nodes = [T::half() - off, T::half(), T::half() + off];
    let weights = [
        T::lit(5.0) / T::lit(18.0),
        T::lit(8.0) / T::lit(18.0),
        T::lit(5.0) / T::lit(18.0),
    ];
    let mut total = T::zero();
    for ix in 0..s.x.len() - 1 {
        let dx = s.x[ix + 1] - s.x[ix];
        let f0 = column_integral(&s.vid[ix]);
        let f1 = column_integral(&s.vid[ix + 1]);
        // F(1/2): on each quad the mid-line is piecewise linear in y with a
        // break where it crosses the SW–NE diagonal
        let mut fm = Cplx::new(T::zero(), T::zero());
        for j in 0..s.y.len() - 1 {
            let dy = s.y[j + 1] - s.y[j];
            let sw = u[s.vid[ix][j]];
            let se = u[s.vid[ix + 1][j]];
            let nw = u[s.vid[ix][j + 1]];
            let ne = u[s.vid[ix + 1][j + 1]];
            let bottom = (sw + se) * half;
            let top = (nw + ne) * half;
            let diag = (sw + ne) * half;
            fm += (bottom + diag + diag + top) * Cplx::new(dy / T::lit(4.0), T::zero());
        }
        // quadratic through F(0), F(1/2), F(1) evaluated at the Gauss nodes
        for (g, w) in nodes.iter().zip(weights) {
            let t = *g;
            let l0 = (T::two() * t - T::one()) * (t - T::one());
            let lh = T::lit(4.0) * t * (T::one() - t);
            let l1 = t * (T::two() * t - T::one());
            let f = f0 * Cplx::new(l0, T::zero())
                + fm * Cplx::new(lh, T::zero())
                + f1 * Cplx::new(l1, T::zero());
            total += w * dx * f.norm_sqr();
        }
    }
    Ok(total / mesh.eps())
}

fn merged_grid<T: Real>(a: &Profile1D<T>, b: &Profile1D<T>) -> Vec<T> {
    let (a0, a1) = a.domain();
    let (b0, b1) = b.domain();
    let lo = a0.max(b0);
    let hi = a1.min(b1);
    let mut pts: Vec<T> = a
        .grid
        .iter()
        .chain(b.grid.iter())
        .copied()
        .filter(|&x| x >= lo && x <= hi)
        .collect();
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(|x, y| x.partial_cmp(y).expect("NaN in profile grid"));
    pts.dedup();
    pts
}

/// `L²` distance between two profiles over the intersection of their
/// domains. On each merged-grid interval the difference is affine, so
/// Simpson's rule is exact.
pub fn l2_error_profiles<T: Real>(a: &Profile1D<T>, b: &Profile1D<T>) -> T {
    let pts = merged_grid(a, b);
    let mut acc = T::zero();
    for w in pts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let width = hi - lo;
        if !(width > T::zero()) {
            continue;
        }
        let mid = (lo + hi) * T::half();
        let d0 = (a.eval(lo) - b.eval(lo)).norm_sqr();
        let dm = (a.eval(mid) - b.eval(mid)).norm_sqr();
        let d1 = (a.eval(hi) - b.eval(hi)).norm_sqr();
        acc += width / T::lit(6.0) * (d0 + T::lit(4.0) * dm + d1);
    }
    acc.sqrt()
}

/// `L²` distance between a profile and a cosine series over the profile's
/// domain, by composite Simpson with eight subdivisions per grid interval.
pub fn l2_error_vs_series<T: Real>(p: &Profile1D<T>, s: &CosineSeries<T>) -> T {
    let mut acc = T::zero();
    let subs = 8usize;
    for w in p.grid.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let width = hi - lo;
        if !(width > T::zero()) {
            continue;
        }
        let h = width / T::from_usize(subs).unwrap();
        let diff_sq = |x: T| {
            let d = p.eval(x) - Cplx::new(s.eval(x), T::zero());
            d.norm_sqr()
        };
        let mut sum = diff_sq(lo) + diff_sq(hi);
        for i in 1..subs {
            let x = lo + h * T::from_usize(i).unwrap();
            let coeff = if i % 2 == 1 { T::lit(4.0) } else { T::two() };
            sum += coeff * diff_sq(x);
        }
        acc += sum * h / T::lit(3.0);
    }
    acc.sqrt()
}
