//! Deterministic text writers: band CSV, profile CSV, study summary CSVs,
//! MatrixMarket dumps of assembled systems, legacy VTK meshes, and the
//! JSON spectrum document emitted by the command-line tool.
//!
//! Every floating-point value is printed with `{:.16e}` so that reruns of
//! identical computations produce byte-identical files.

use crate::averaging::{Profile1D, ProfileKind};
use crate::bloch::BandStructure;
use crate::geometry::Region;
use crate::harness::{ConvergenceReport, GapReport, RowStatus};
use crate::linalg::CscMatrix;
use crate::mesh::TriMesh;
use crate::scalar::Real;
use serde::{Deserialize, Serialize};
use std::io::{self, Write};

/// Band sweep as CSV: one row per (phase, band index) pair.
pub fn write_bands_csv<T: Real, W: Write>(w: &mut W, bs: &BandStructure<T>) -> io::Result<()> {
    writeln!(w, "eps,phi,k,mu")?;
    for (i, phi) in bs.phi_grid.iter().enumerate() {
        for (k, mu) in bs.mu[i].iter().enumerate() {
            writeln!(w, "{:.16e},{:.16e},{},{:.16e}", bs.eps, phi, k + 1, mu)?;
        }
    }
    Ok(())
}

/// Profile as CSV. Piecewise-linear profiles list their grid points;
/// piecewise-constant ones list cell midpoints.
pub fn write_profile_csv<T: Real, W: Write>(w: &mut W, p: &Profile1D<T>) -> io::Result<()> {
    writeln!(w, "x,re,im")?;
    match p.kind {
        ProfileKind::Linear => {
            for (x, v) in p.grid.iter().zip(&p.values) {
                writeln!(w, "{:.16e},{:.16e},{:.16e}", x, v.re, v.im)?;
            }
        }
        ProfileKind::Constant => {
            for (i, v) in p.values.iter().enumerate() {
                let mid = (p.grid[i] + p.grid[i + 1]) * T::half();
                writeln!(w, "{:.16e},{:.16e},{:.16e}", mid, v.re, v.im)?;
            }
        }
    }
    Ok(())
}

fn status_word(s: &RowStatus) -> &'static str {
    match s {
        RowStatus::Computed => "computed",
        RowStatus::Skipped(_) => "skipped",
    }
}

fn opt_field<T: Real>(v: Option<T>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

/// Resolvent study summary as CSV: one row per schedule entry, in schedule
/// order. Empty fields mark rows that did not compute.
pub fn write_resolvent_csv<T: Real, W: Write>(
    w: &mut W,
    report: &ConvergenceReport<T>,
) -> io::Result<()> {
    writeln!(w, "eps,status,q_eff,vertices,reduced_dim,e1,e2,coupling_residual")?;
    for r in &report.rows {
        writeln!(
            w,
            "{:.16e},{},{},{},{},{},{},{}",
            r.eps,
            status_word(&r.status),
            opt_field(r.q_eff),
            r.vertex_count,
            r.reduced_dim,
            opt_field(r.e1),
            opt_field(r.e2),
            opt_field(r.coupling_residual),
        )?;
    }
    Ok(())
}

/// Gap study summary as CSV: one row per schedule entry, in schedule
/// order. `alpha`/`beta` are the tracked gap endpoints; empty fields mark
/// missing values.
pub fn write_gap_csv<T: Real, W: Write>(w: &mut W, report: &GapReport<T>) -> io::Result<()> {
    writeln!(
        w,
        "eps,status,q_eff,vertices,reduced_dim,refinements,gap_count,alpha,beta,err_lower,err_upper,hausdorff"
    )?;
    for r in &report.rows {
        let (alpha, beta) = match r.tracked_gap {
            Some((a, b)) => (Some(a), Some(b)),
            None => (None, None),
        };
        writeln!(
            w,
            "{:.16e},{},{},{},{},{},{},{},{},{},{},{}",
            r.eps,
            status_word(&r.status),
            opt_field(r.q_eff),
            r.vertex_count,
            r.reduced_dim,
            r.refinements,
            r.gaps.len(),
            opt_field(alpha),
            opt_field(beta),
            opt_field(r.err_lower),
            opt_field(r.err_upper),
            opt_field(r.hausdorff),
        )?;
    }
    Ok(())
}

/// MatrixMarket coordinate/complex dump, 1-based. For `hermitian` matrices
/// only the lower triangle is written, as the format prescribes.
pub fn write_matrix_market<T: Real, W: Write>(
    w: &mut W,
    m: &CscMatrix<T>,
    hermitian: bool,
) -> io::Result<()> {
    let kind = if hermitian { "hermitian" } else { "general" };
    writeln!(w, "%%MatrixMarket matrix coordinate complex {kind}")?;
    let mut entries = Vec::new();
    for col in 0..m.n_cols {
        for p in m.col_ptr[col]..m.col_ptr[col + 1] {
            let row = m.row_idx[p];
            if hermitian && row < col {
                continue;
            }
            entries.push((row, col, m.values[p]));
        }
    }
    writeln!(w, "{} {} {}", m.n_rows, m.n_cols, entries.len())?;
    // column-major order with rows ascending inside a column is already the
    // storage order, so emission is deterministic
    for (row, col, v) in entries {
        writeln!(w, "{} {} {:.16e} {:.16e}", row + 1, col + 1, v.re, v.im)?;
    }
    Ok(())
}

fn region_tag(r: Region) -> i32 {
    match r {
        Region::Strip => 0,
        Region::Passage => 1,
        Region::Room => 2,
    }
}

/// Legacy-format VTK unstructured grid with region and cell-index tags,
/// plus optional named scalar fields on the vertices.
pub fn write_vtk<T: Real, W: Write>(
    w: &mut W,
    mesh: &TriMesh<T>,
    point_fields: &[(&str, &[T])],
) -> io::Result<()> {
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "waveguide mesh")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {} double", mesh.n_vertices())?;
    for v in &mesh.vertices {
        writeln!(w, "{:.16e} {:.16e} 0.0", v[0], v[1])?;
    }
    let nt = mesh.n_triangles();
    writeln!(w, "CELLS {} {}", nt, 4 * nt)?;
    for t in &mesh.triangles {
        writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    writeln!(w, "CELL_TYPES {nt}")?;
    for _ in 0..nt {
        writeln!(w, "5")?;
    }
    writeln!(w, "CELL_DATA {nt}")?;
    writeln!(w, "SCALARS region int 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for r in &mesh.regions {
        writeln!(w, "{}", region_tag(*r))?;
    }
    writeln!(w, "SCALARS cell_index int 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for c in &mesh.cell_of {
        writeln!(w, "{c}")?;
    }
    if !point_fields.is_empty() {
        writeln!(w, "POINT_DATA {}", mesh.n_vertices())?;
        for (name, values) in point_fields {
            assert_eq!(values.len(), mesh.n_vertices(), "field {name} length");
            writeln!(w, "SCALARS {name} double 1")?;
            writeln!(w, "LOOKUP_TABLE default")?;
            for v in *values {
                writeln!(w, "{v:.16e}")?;
            }
        }
    }
    Ok(())
}

/// JSON document summarizing a band sweep; the stable external format of
/// the `bands` command (`schema_version` gates future layout changes).
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
pub struct SpectrumDoc {
    pub schema_version: u32,
    pub eps: f64,
    pub m_bands: usize,
    pub phi_count: usize,
    pub bands: Vec<(f64, f64)>,
    pub gaps: Vec<(f64, f64)>,
    /// Upper edge of the spectral window; serialized as `L`.
    #[serde(rename = "L")]
    pub spectral_cap: f64,
    /// Minimal reported gap width.
    pub tau_gap: f64,
    pub symmetry_deviation: f64,
    pub residual_max: f64,
    pub vertex_count: usize,
    pub reduced_dim: usize,
    pub refinements: usize,
    pub richardson_converged: bool,
}

impl SpectrumDoc {
    pub fn new<T: Real>(bs: &BandStructure<T>, gaps: &[(T, T)], cap: T, tau: T) -> Self {
        let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
        Self {
            schema_version: 1,
            eps: f(bs.eps),
            m_bands: bs.bands.len(),
            phi_count: bs.phi_grid.len().saturating_sub(1),
            bands: bs.bands.iter().map(|&(a, b)| (f(a), f(b))).collect(),
            gaps: gaps.iter().map(|&(a, b)| (f(a), f(b))).collect(),
            spectral_cap: f(cap),
            tau_gap: f(tau),
            symmetry_deviation: f(bs.symmetry_deviation),
            residual_max: f(bs.residual_max),
            vertex_count: bs.vertex_count,
            reduced_dim: bs.reduced_dim,
            refinements: bs.refinements,
            richardson_converged: bs.richardson_converged,
        }
    }
}
