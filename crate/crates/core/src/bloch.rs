//! Band structure of the periodic problem and spectral-set utilities.
//!
//! A sweep solves the quasi-periodic cell problem on a grid of phases
//! `φ ∈ [0, π]` (the other half of the Brillouin zone is reached by
//! conjugation symmetry, which is probed, not assumed), stacks the
//! eigenvalue curves into bands, and reads gaps off the complement of the
//! band union. `IntervalSet` provides the exact set arithmetic plus the
//! Hausdorff distance used to compare a computed spectrum against its
//! closed-form limit.

use crate::eigen::{lowest_eigenpairs, EigenError, EigenOptions};
use crate::fem::{assemble, dof_map, phase_factor};
use crate::geometry::CellGeometry;
use crate::mesh::{triangulate, MeshControls, MeshError, TriMesh};
use crate::scalar::Real;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BlochError {
    #[error("mesh construction failed: {0}")]
    Mesh(#[from] MeshError),
    #[error("eigenvalue solve failed: {0}")]
    Eigen(#[from] EigenError),
    #[error("band sweep requires a quasi-periodic single-cell mesh")]
    NotPeriodic,
    #[error("bad sweep settings: {0}")]
    BadSettings(String),
    #[error("highest band tops out at {top} below the spectral cap {cap}; request more bands")]
    InsufficientBands { top: f64, cap: f64 },
}

/// A finite union of closed intervals, kept sorted and disjoint
/// (touching intervals are merged on insertion).
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct IntervalSet<T> {
    intervals: Vec<(T, T)>,
}

impl<T: Real> IntervalSet<T> {
    pub fn new() -> Self {
        Self { intervals: Vec::new() }
    }

    pub fn from_intervals(items: &[(T, T)]) -> Self {
        let mut set = Self::new();
        for &(lo, hi) in items {
            set.insert(lo, hi);
        }
        set
    }

    pub fn intervals(&self) -> &[(T, T)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Total measure of the union.
    pub fn measure(&self) -> T {
        self.intervals
            .iter()
            .map(|&(lo, hi)| hi - lo)
            .fold(T::zero(), |a, w| a + w)
    }

    pub fn contains(&self, x: T) -> bool {
        self.intervals.iter().any(|&(lo, hi)| lo <= x && x <= hi)
    }

    /// Insert `[lo, hi]`, merging with every interval it overlaps or touches.
    pub fn insert(&mut self, lo: T, hi: T) {
        let (mut lo, mut hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let mut merged = Vec::with_capacity(self.intervals.len() + 1);
        let mut placed = false;
        for &(a, b) in &self.intervals {
            if b < lo {
                merged.push((a, b));
            } else if a > hi {
                if !placed {
                    merged.push((lo, hi));
                    placed = true;
                }
                merged.push((a, b));
            } else {
                lo = lo.min(a);
                hi = hi.max(b);
            }
        }
        if !placed {
            merged.push((lo, hi));
        }
        self.intervals = merged;
    }

    /// Restrict the set to `[lo, hi]`.
    pub fn clipped(&self, lo: T, hi: T) -> Self {
        let mut out = Self::new();
        for &(a, b) in &self.intervals {
            let (ca, cb) = (a.max(lo), b.min(hi));
            if ca <= cb {
                out.insert(ca, cb);
            }
        }
        out
    }

    /// Open components of `(lo, hi)` not covered by the set, as pairs.
    pub fn complement_within(&self, lo: T, hi: T) -> Vec<(T, T)> {
        let mut out = Vec::new();
        let mut cursor = lo;
        for &(a, b) in &self.intervals {
            if b <= cursor {
                continue;
            }
            if a > cursor && cursor < hi {
                out.push((cursor, a.min(hi)));
            }
            cursor = cursor.max(b);
            if cursor >= hi {
                break;
            }
        }
        if cursor < hi {
            out.push((cursor, hi));
        }
        out.retain(|&(a, b)| b > a);
        out
    }

    /// Distance from a point to the union (zero inside).
    pub fn distance(&self, x: T) -> T {
        let mut best = T::infinity();
        for &(lo, hi) in &self.intervals {
            let d = (lo - x).max(x - hi).max(T::zero());
            best = best.min(d);
        }
        best
    }

    /// Hausdorff distance between two unions of closed intervals.
    ///
    /// The supremum of `dist(·, other)` over a closed union is attained at
    /// an interval endpoint or at the midpoint of one of the other set's
    /// holes, so checking that finite candidate list is exact.
    pub fn hausdorff(&self, other: &Self) -> T {
        match (self.is_empty(), other.is_empty()) {
            (true, true) => return T::zero(),
            (true, false) | (false, true) => return T::infinity(),
            _ => {}
        }
        directed_hausdorff(self, other).max(directed_hausdorff(other, self))
    }
}

fn directed_hausdorff<T: Real>(a: &IntervalSet<T>, b: &IntervalSet<T>) -> T {
    let mut worst = T::zero();
    for &(lo, hi) in a.intervals() {
        worst = worst.max(b.distance(lo)).max(b.distance(hi));
    }
    for pair in b.intervals().windows(2) {
        let mid = (pair[0].1 + pair[1].0) * T::half();
        if a.contains(mid) {
            worst = worst.max(b.distance(mid));
        }
    }
    worst
}

/// Parameters of a band sweep.
#[derive(Clone, Copy, Debug)]
pub struct SweepSettings<T> {
    /// Number of bands (eigenvalues per phase).
    pub m_bands: usize,
    /// The phase grid is `{0} ∪ {iπ/phi_count : i = 1…phi_count}`.
    pub phi_count: usize,
    pub eigen: EigenOptions<T>,
    /// Relative movement below which two refinement levels agree.
    pub richardson_tol: T,
    /// Extra uniform refinements allowed when chasing agreement.
    pub max_refines: usize,
}

impl<T: Real> Default for SweepSettings<T> {
    fn default() -> Self {
        Self {
            m_bands: 8,
            phi_count: 16,
            eigen: EigenOptions::default(),
            richardson_tol: T::lit(5e-3),
            max_refines: 2,
        }
    }
}

/// Eigenvalue curves over the phase grid and the bands they sweep out.
#[derive(Clone, Debug, Serialize)]
pub struct BandStructure<T> {
    pub eps: T,
    pub phi_grid: Vec<T>,
    /// `mu[i][k]`: k-th eigenvalue at phase `phi_grid[i]`, ascending in `k`.
    pub mu: Vec<Vec<T>>,
    /// `bands[k] = [min_i mu[i][k], max_i mu[i][k]]`.
    pub bands: Vec<(T, T)>,
    /// Largest relative mismatch between `μ(φ)` and `μ(2π−φ)` at the probe
    /// phases, scaled by the largest eigenvalue of the sweep (floored at 1).
    pub symmetry_deviation: T,
    pub reduced_dim: usize,
    pub vertex_count: usize,
    pub residual_max: T,
    pub refinements: usize,
    pub richardson_converged: bool,
}

impl<T: Real> BandStructure<T> {
    /// The band union as a closed interval set.
    pub fn interval_set(&self) -> IntervalSet<T> {
        IntervalSet::from_intervals(&self.bands)
    }
}

fn solve_at_phase<T: Real>(
    mesh: &TriMesh<T>,
    phi: T,
    m_bands: usize,
    eigen: &EigenOptions<T>,
    seed_salt: u64,
) -> Result<(Vec<T>, T, usize), BlochError> {
    let dofs = dof_map(mesh, phase_factor(phi));
    let (k, m) = assemble(mesh, &dofs);
    let opts = EigenOptions {
        seed: eigen.seed.wrapping_add(seed_salt.wrapping_mul(0xD1B5_4A32_D192_ED03)),
        ..*eigen
    };
    let result = lowest_eigenpairs(&k, &m, m_bands, &opts)?;
    let worst = result
        .residuals
        .iter()
        .fold(T::zero(), |acc, &r| acc.max(r));
    Ok((result.eigenvalues, worst, dofs.n_reduced))
}

/// Solve the quasi-periodic cell problem over the phase grid and assemble
/// the band structure. Deterministic: the phase grid, the solve order and
/// every seed derive only from the settings.
pub fn band_sweep<T: Real>(
    mesh: &TriMesh<T>,
    settings: &SweepSettings<T>,
) -> Result<BandStructure<T>, BlochError> {
    if !mesh.is_floquet() {
        return Err(BlochError::NotPeriodic);
    }
    if settings.m_bands == 0 || settings.phi_count == 0 {
        return Err(BlochError::BadSettings(
            "m_bands and phi_count must be positive".into(),
        ));
    }
    let pc = settings.phi_count;
    let phi_grid: Vec<T> = (0..=pc)
        .map(|i| T::pi() * (T::from_usize(i).unwrap() / T::from_usize(pc).unwrap()))
        .collect();

    let solved: Result<Vec<_>, BlochError> = phi_grid
        .par_iter()
        .enumerate()
        .map(|(i, &phi)| solve_at_phase(mesh, phi, settings.m_bands, &settings.eigen, i as u64))
        .collect();
    let solved = solved?;

    let mu: Vec<Vec<T>> = solved.iter().map(|(eigs, _, _)| eigs.clone()).collect();
    let residual_max = solved
        .iter()
        .fold(T::zero(), |acc, &(_, r, _)| acc.max(r));
    let reduced_dim = solved[0].2;

    let mut bands = Vec::with_capacity(settings.m_bands);
    for k in 0..settings.m_bands {
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for row in &mu {
            lo = lo.min(row[k]);
            hi = hi.max(row[k]);
        }
        bands.push((lo, hi));
    }

    // conjugation-symmetry probes: μ(2π−φ) must reproduce μ(φ)
    let scale = mu
        .iter()
        .flatten()
        .fold(T::one(), |acc, &v| acc.max(v.abs()));
    let mut probe_idx: Vec<usize> = [pc / 4, pc / 2, (3 * pc) / 4]
        .into_iter()
        .filter(|&i| i >= 1 && i < pc)
        .collect();
    probe_idx.dedup();
    let probed: Result<Vec<_>, BlochError> = probe_idx
        .par_iter()
        .map(|&i| {
            let mirrored = T::two() * T::pi() - phi_grid[i];
            solve_at_phase(
                mesh,
                mirrored,
                settings.m_bands,
                &settings.eigen,
                0x4000_0000_0000_0000u64 + i as u64,
            )
        })
        .collect();
    let mut symmetry_deviation = T::zero();
    for (&i, (eigs, _, _)) in probe_idx.iter().zip(probed?.iter()) {
        for (a, b) in mu[i].iter().zip(eigs) {
            symmetry_deviation = symmetry_deviation.max((*a - *b).abs() / scale);
        }
    }

    Ok(BandStructure {
        eps: mesh.eps(),
        phi_grid,
        mu,
        bands,
        symmetry_deviation,
        reduced_dim,
        vertex_count: mesh.n_vertices(),
        residual_max,
        refinements: 0,
        richardson_converged: false,
    })
}

/// Sweep, then refine the mesh uniformly until no eigenvalue moves by more
/// than `richardson_tol` (relative, floored by the band scale) between two
/// consecutive levels. The finer of the two agreeing levels is returned;
/// if the budget runs out first, the last sweep comes back with
/// `richardson_converged == false`.
pub fn band_sweep_converged<T: Real>(
    cell: &CellGeometry<T>,
    controls: &MeshControls<T>,
    settings: &SweepSettings<T>,
) -> Result<BandStructure<T>, BlochError> {
    let mut mesh = triangulate(cell, controls)?;
    let mut current = band_sweep(&mesh, settings)?;
    for level in 1..=settings.max_refines {
        let refined_mesh = match mesh.refine() {
            Ok(m) => m,
            Err(MeshError::VertexBudget { .. }) => break,
            Err(e) => return Err(e.into()),
        };
        let refined = band_sweep(&refined_mesh, settings)?;
        let scale = refined
            .mu
            .iter()
            .flatten()
            .fold(T::zero(), |acc, &v| acc.max(v.abs()));
        let mut agree = true;
        'outer: for (row_a, row_b) in current.mu.iter().zip(&refined.mu) {
            for (&a, &b) in row_a.iter().zip(row_b) {
                let denom = b.abs().max(scale);
                if denom > T::zero() && (a - b).abs() / denom > settings.richardson_tol {
                    agree = false;
                    break 'outer;
                }
            }
        }
        mesh = refined_mesh;
        current = refined;
        current.refinements = level;
        if agree {
            current.richardson_converged = true;
            return Ok(current);
        }
    }
    Ok(current)
}

/// Gaps of the band union inside `(0, cap)`: maximal open components of the
/// complement whose closure stays inside `(0, cap)`, wider than `tau_gap`.
///
/// Errors when the highest band tops out below `cap` — then the sweep
/// simply cannot see the whole window and needs more bands.
pub fn extract_gaps<T: Real>(
    bands: &[(T, T)],
    cap: T,
    tau_gap: T,
) -> Result<Vec<(T, T)>, BlochError> {
    let top = bands
        .iter()
        .map(|&(_, hi)| hi)
        .fold(T::neg_infinity(), |a, b| a.max(b));
    if top < cap {
        return Err(BlochError::InsufficientBands {
            top: top.to_f64().unwrap_or(f64::NAN),
            cap: cap.to_f64().unwrap_or(f64::NAN),
        });
    }
    let union = IntervalSet::from_intervals(bands);
    let gaps = union
        .complement_within(T::zero(), cap)
        .into_iter()
        .filter(|&(a, b)| a > T::zero() && b < cap && b - a > tau_gap)
        .collect();
    Ok(gaps)
}
