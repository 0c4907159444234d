//! End-to-end convergence studies along a schedule of shrinking periods.
//!
//! Two independent routes compare the computed waveguide against its limit
//! model. The resolvent route solves the source problem on a bounded
//! waveguide, averages the solution down to one dimension and measures the
//! distance to the closed-form limit resolvent. The spectral route sweeps
//! bands on the period cell and compares gap endpoints and the whole
//! spectrum (by Hausdorff distance) against the limit spectrum. Verdicts
//! are conservative: trend checks run on the tail (last three entries) of
//! the schedule, rows skipped by guards or per-period failures poison any
//! tail they belong to, and the error sequences themselves must shrink.

use crate::averaging::{j1, j2, l2_error_profiles, l2_error_vs_series, AveragingError, Profile1D};
use crate::bloch::{band_sweep_converged, extract_gaps, BlochError, SweepSettings};
use crate::eigen::{EigenError, EigenOptions};
use crate::fem::{assemble, dof_map, expand, load_vector_by, phase_factor};
use crate::geometry::{build_bounded_waveguide, CellGeometry, GeometryError, Region};
use crate::limit::{limit_resolvent, CosineSeries, LimitError, LimitModel};
use crate::linalg::{FactorError, LdltFactor};
use crate::mesh::{triangulate_waveguide, MeshControls, MeshError};
use crate::scalar::{Cplx, Real};
use crate::scaling::{RoomSpec, ScalingError, ScalingLaw};
use serde::Serialize;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StudyError {
    #[error("bad study configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Scaling(#[from] ScalingError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Factor(#[from] FactorError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Bloch(#[from] BlochError),
    #[error(transparent)]
    Limit(#[from] LimitError),
    #[error(transparent)]
    Averaging(#[from] AveragingError),
}

impl StudyError {
    /// True when the error indicts the configuration rather than a solver.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            StudyError::Config(_)
                | StudyError::Scaling(_)
                | StudyError::Geometry(_)
                | StudyError::Limit(_)
        )
    }
}

/// Everything a convergence study needs; `new` fills in usable defaults.
#[derive(Clone, Debug, Serialize)]
pub struct StudyConfig<T> {
    pub law: ScalingLaw<T>,
    pub room: RoomSpec<T>,
    /// Strictly decreasing period schedule.
    pub eps_schedule: Vec<T>,
    /// Waveguide length for the bounded resolvent study.
    pub l: T,
    /// Upper edge of the spectral window.
    pub spectral_cap: T,
    /// Resolvent parameter, must be positive.
    pub mu: T,
    pub f1: CosineSeries<T>,
    pub f2: CosineSeries<T>,
    pub mesh: MeshControls<T>,
    pub m_bands: usize,
    pub phi_count: usize,
    /// Minimal reported gap width; `None` means `1e-3 · spectral_cap`.
    pub tau_gap: Option<T>,
    pub richardson_tol: T,
    pub max_refines: usize,
    pub seed: u64,
}

impl<T: Real> StudyConfig<T> {
    pub fn new(law: ScalingLaw<T>, room: RoomSpec<T>) -> Self {
        Self {
            law,
            room,
            eps_schedule: vec![T::lit(0.2), T::lit(0.1)],
            l: T::one(),
            spectral_cap: T::lit(3.0),
            mu: T::one(),
            f1: CosineSeries::constant(T::one(), T::one()),
            f2: CosineSeries::zero(T::one()),
            mesh: MeshControls::default(),
            m_bands: 8,
            phi_count: 16,
            tau_gap: None,
            richardson_tol: T::lit(5e-3),
            max_refines: 2,
            seed: 0xBA5E_C0DE,
        }
    }

    pub fn limit_model(&self) -> Result<LimitModel<T>, LimitError> {
        LimitModel::new(self.law.q_target, self.room.area())
    }

    fn check_schedule(&self) -> Result<(), StudyError> {
        if self.eps_schedule.is_empty() {
            return Err(StudyError::Config("eps schedule is empty".into()));
        }
        for w in self.eps_schedule.windows(2) {
            if !(w[1] < w[0]) {
                return Err(StudyError::Config(format!(
                    "eps schedule must decrease strictly, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(())
    }
}

/// Whether a schedule row produced numbers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "reason")]
pub enum RowStatus {
    Computed,
    Skipped(String),
}

#[derive(Clone, Debug, Serialize)]
pub struct ResolventRow<T> {
    pub eps: T,
    pub status: RowStatus,
    /// Effective coupling of the cell built at this period.
    pub q_eff: Option<T>,
    pub vertex_count: usize,
    pub reduced_dim: usize,
    /// `‖J₁u^ε − u₁‖` over the waveguide length.
    pub e1: Option<T>,
    /// `‖J₂u^ε − u₂‖`.
    pub e2: Option<T>,
    /// `‖J₂u^ε − √|B| J₁u^ε‖` — must vanish in the locked regime.
    pub coupling_residual: Option<T>,
    /// Wall-clock seconds for this row; excluded from the serialized
    /// report so reruns stay byte-identical.
    #[serde(skip)]
    pub runtime_seconds: f64,
    /// The averaged strip and room profiles, kept for artifact emission;
    /// excluded from the serialized report.
    #[serde(skip)]
    pub profiles: Option<(Profile1D<T>, Profile1D<T>)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport<T> {
    pub rows: Vec<ResolventRow<T>>,
    /// `‖u₁‖`, for putting the errors in scale.
    pub limit_u1_norm: T,
    pub limit_u2_norm: T,
    pub pass: bool,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub runtime_seconds: f64,
}

fn skipped_resolvent_row<T: Real>(eps: T, reason: String) -> ResolventRow<T> {
    ResolventRow {
        eps,
        status: RowStatus::Skipped(reason),
        q_eff: None,
        vertex_count: 0,
        reduced_dim: 0,
        e1: None,
        e2: None,
        coupling_residual: None,
        runtime_seconds: 0.0,
        profiles: None,
    }
}

/// Solve the source problem on the bounded waveguide for every period in
/// the schedule and compare the averaged solution against the limit
/// resolvent. Trend verdicts look at the tail (up to three entries) of the
/// schedule: `e1` must fall strictly and `e2` must never rise there. A
/// failing row never aborts the study; it is recorded and poisons any tail
/// it belongs to. A single-entry schedule skips trend verdicts with a note.
pub fn resolvent_study<T: Real>(cfg: &StudyConfig<T>) -> Result<ConvergenceReport<T>, StudyError> {
    let t0 = Instant::now();
    cfg.check_schedule()?;
    if cfg.f1.l != cfg.l || cfg.f2.l != cfg.l {
        return Err(StudyError::Config(
            "source series must live on the waveguide interval [0, l]".into(),
        ));
    }
    let model = cfg.limit_model()?;
    let (u1_lim, u2_lim) = limit_resolvent(&model, cfg.mu, &cfg.f1, &cfg.f2)?;
    let sqrt_area = cfg.room.area().sqrt();

    let mut rows = Vec::new();
    let mut notes = Vec::new();
    for &eps in &cfg.eps_schedule {
        let row_clock = Instant::now();
        let built = (|| -> Result<ResolventRow<T>, StudyError> {
            let params = cfg.law.params_at(&cfg.room, eps)?;
            let cell = CellGeometry::from_params(&params);
            let cells = build_bounded_waveguide(cfg.l, &cell)?;
            let mesh = triangulate_waveguide(&cells, &cfg.mesh)?;
            let dofs = dof_map(&mesh, phase_factor(T::zero()));
            let (k, m) = assemble(&mesh, &dofs);
            let system = k.add_scaled(Cplx::new(cfg.mu, T::zero()), &m);
            let factor = LdltFactor::new(&system, None)?;

            // adjoint-average source: strip density ε^{−1/2}f₁(x), passages
            // silent, each room fed its cell average of f₂
            let inv_sqrt_eps = eps.sqrt().recip();
            let room_area = cell
                .protuberance
                .as_ref()
                .expect("scaled cells always carry a room")
                .room
                .area();
            let room_norm = (eps * room_area).sqrt().recip();
            let room_value: Vec<T> = cells
                .iter()
                .map(|c| cfg.f2.integrate_between(c.strip.x0, c.strip.x1) * room_norm)
                .collect();
            let rhs = load_vector_by(&mesh, &dofs, |_, region, cell_idx, p| match region {
                Region::Strip => Cplx::new(inv_sqrt_eps * cfg.f1.eval(p[0]), T::zero()),
                Region::Passage => Cplx::new(T::zero(), T::zero()),
                Region::Room => Cplx::new(room_value[cell_idx], T::zero()),
            });
            let u = expand(&dofs, &factor.solve(&rhs));

            let p1 = j1(&mesh, &u)?;
            let p2 = j2(&mesh, &u)?;
            let e1 = l2_error_vs_series(&p1, &u1_lim);
            let e2 = l2_error_vs_series(&p2, &u2_lim);
            let lifted = Profile1D {
                grid: p1.grid.clone(),
                values: p1
                    .values
                    .iter()
                    .map(|v| *v * Cplx::new(sqrt_area, T::zero()))
                    .collect(),
                kind: p1.kind,
            };
            let coupling = l2_error_profiles(&p2, &lifted);
            Ok(ResolventRow {
                eps,
                status: RowStatus::Computed,
                q_eff: Some(params.q_eff),
                vertex_count: mesh.n_vertices(),
                reduced_dim: dofs.n_reduced,
                e1: Some(e1),
                e2: Some(e2),
                coupling_residual: Some(coupling),
                runtime_seconds: 0.0,
                profiles: Some((p1, p2)),
            })
        })();
        let mut row = match built {
            Ok(row) => row,
            Err(e) => {
                notes.push(format!("eps = {eps}: {e}"));
                skipped_resolvent_row(eps, e.to_string())
            }
        };
        row.runtime_seconds = row_clock.elapsed().as_secs_f64();
        rows.push(row);
    }

    let computed_count = rows
        .iter()
        .filter(|r| r.status == RowStatus::Computed)
        .count();
    let mut pass;
    if rows.len() == 1 {
        pass = computed_count == 1;
        if pass {
            notes.push("single-entry schedule: trend verdicts skipped (insufficient data)".into());
        }
    } else {
        pass = true;
        if computed_count < 2 {
            pass = false;
            notes.push(format!(
                "only {computed_count} of {} rows computed; need at least two for a trend",
                rows.len()
            ));
        }
        let e1s: Vec<Option<T>> = rows.iter().map(|r| r.e1).collect();
        let e2s: Vec<Option<T>> = rows.iter().map(|r| r.e2).collect();
        if pass && !tail_decreases_strictly(&e1s) {
            pass = false;
            notes.push("e1 is not strictly decreasing over the schedule tail".into());
        }
        if pass && !tail_shrinks(&e2s, T::lit(1e-9)) {
            pass = false;
            notes.push("e2 rose over the schedule tail".into());
        }
    }

    Ok(ConvergenceReport {
        rows,
        limit_u1_norm: u1_lim.norm_l2(),
        limit_u2_norm: u2_lim.norm_l2(),
        pass,
        notes,
        runtime_seconds: t0.elapsed().as_secs_f64(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GapRow<T> {
    pub eps: T,
    pub status: RowStatus,
    /// Effective coupling of the cell built at this period.
    pub q_eff: Option<T>,
    pub vertex_count: usize,
    pub reduced_dim: usize,
    pub refinements: usize,
    pub richardson_converged: bool,
    pub symmetry_deviation: T,
    pub residual_max: T,
    /// All gaps found in the window.
    pub gaps: Vec<(T, T)>,
    /// The gap tracked against the limit gap, when one exists.
    pub tracked_gap: Option<(T, T)>,
    pub err_lower: Option<T>,
    pub err_upper: Option<T>,
    /// Hausdorff distance between computed and limit spectra in the window.
    pub hausdorff: Option<T>,
    /// Wall-clock seconds for this row; excluded from the serialized
    /// report so reruns stay byte-identical.
    #[serde(skip)]
    pub runtime_seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GapReport<T> {
    pub rows: Vec<GapRow<T>>,
    pub limit_gap: Option<(T, T)>,
    pub tau_gap: T,
    pub spectral_cap: T,
    pub pass: bool,
    /// Whether the smallest computed period shows exactly one gap in the
    /// window; `None` when no row computed.
    pub single_gap: Option<bool>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub runtime_seconds: f64,
}

fn skipped_gap_row<T: Real>(eps: T, reason: String) -> GapRow<T> {
    GapRow {
        eps,
        status: RowStatus::Skipped(reason),
        q_eff: None,
        vertex_count: 0,
        reduced_dim: 0,
        refinements: 0,
        richardson_converged: false,
        symmetry_deviation: T::zero(),
        residual_max: T::zero(),
        gaps: Vec::new(),
        tracked_gap: None,
        err_lower: None,
        err_upper: None,
        hausdorff: None,
        runtime_seconds: 0.0,
    }
}

/// Non-increasing over the tail (up to three entries) of the schedule;
/// missing values poison the tail.
fn tail_shrinks<T: Real>(values: &[Option<T>], slack: T) -> bool {
    let tail_len = values.len().min(3);
    if tail_len < 2 {
        return false;
    }
    let tail = &values[values.len() - tail_len..];
    if tail.iter().any(|v| v.is_none()) {
        return false;
    }
    tail.windows(2).all(|w| {
        let (a, b) = (w[0].unwrap(), w[1].unwrap());
        b.is_finite() && b <= a * (T::one() + slack)
    })
}

/// Strictly decreasing over the tail (up to three entries) of the
/// schedule; missing values poison the tail.
fn tail_decreases_strictly<T: Real>(values: &[Option<T>]) -> bool {
    let tail_len = values.len().min(3);
    if tail_len < 2 {
        return false;
    }
    let tail = &values[values.len() - tail_len..];
    if tail.iter().any(|v| v.is_none()) {
        return false;
    }
    tail.windows(2).all(|w| {
        let (a, b) = (w[0].unwrap(), w[1].unwrap());
        b.is_finite() && b < a
    })
}

/// Whether the row at the smallest computed period shows exactly one gap
/// whose closure lies inside `(0, cap)`. `None` when nothing computed.
pub fn single_gap_check<T: Real>(report: &GapReport<T>, cap: T) -> Option<bool> {
    report
        .rows
        .iter()
        .rev()
        .find(|r| r.status == RowStatus::Computed)
        .map(|r| {
            r.gaps
                .iter()
                .filter(|g| g.0 > T::zero() && g.1 < cap)
                .count()
                == 1
        })
}

/// Sweep bands for every period in the schedule, extract gaps, and compare
/// endpoints and whole spectra against the limit model. Trend verdicts
/// look at the tail (up to three entries) of the schedule: the endpoint
/// errors and the Hausdorff distance must be non-increasing there. A
/// failing row never aborts the study; it is recorded and poisons any tail
/// it belongs to. A single-entry schedule skips trend verdicts with a note.
///
/// Requires a finite coupling target (the limit spectrum has no gap
/// otherwise) and a window that strictly contains the limit gap.
pub fn gap_study<T: Real>(cfg: &StudyConfig<T>) -> Result<GapReport<T>, StudyError> {
    let t0 = Instant::now();
    cfg.check_schedule()?;
    if !(cfg.spectral_cap > T::zero()) {
        return Err(StudyError::Config("spectral cap must be positive".into()));
    }
    let model = cfg.limit_model()?;
    let (gap_lo, gap_hi) = model.gap().ok_or_else(|| {
        StudyError::Config(
            "gap study requires a finite coupling target (the limit spectrum has no gap otherwise)"
                .into(),
        )
    })?;
    if !(cfg.spectral_cap > gap_hi) {
        return Err(StudyError::Config(format!(
            "spectral window must contain the limit gap: need a cap above {gap_hi}, got {}",
            cfg.spectral_cap
        )));
    }
    let tau = cfg
        .tau_gap
        .unwrap_or_else(|| cfg.spectral_cap * T::lit(1e-3));
    let limit_spectrum = model.spectrum(cfg.spectral_cap);
    let tracked_limit = Some((gap_lo, gap_hi));

    let mut rows = Vec::new();
    let mut notes = Vec::new();
    for &eps in &cfg.eps_schedule {
        let row_clock = Instant::now();
        let built = (|| -> Result<GapRow<T>, StudyError> {
            let params = cfg.law.params_at(&cfg.room, eps)?;
            let cell = CellGeometry::from_params(&params);
            let settings = SweepSettings {
                m_bands: cfg.m_bands,
                phi_count: cfg.phi_count,
                eigen: EigenOptions {
                    seed: cfg.seed,
                    ..EigenOptions::default()
                },
                richardson_tol: cfg.richardson_tol,
                max_refines: cfg.max_refines,
            };
            let mut bs = band_sweep_converged(&cell, &cfg.mesh, &settings)?;
            let gaps = match extract_gaps(&bs.bands, cfg.spectral_cap, tau) {
                Ok(g) => g,
                Err(BlochError::InsufficientBands { .. }) => {
                    // one retry with a taller band stack
                    let retry = SweepSettings {
                        m_bands: cfg.m_bands + 4,
                        ..settings
                    };
                    bs = band_sweep_converged(&cell, &cfg.mesh, &retry)?;
                    extract_gaps(&bs.bands, cfg.spectral_cap, tau)?
                }
                Err(e) => return Err(e.into()),
            };

            let mid = (gap_lo + gap_hi) * T::half();
            let best = gaps.iter().min_by(|a, b| {
                let da = ((a.0 + a.1) * T::half() - mid).abs();
                let db = ((b.0 + b.1) * T::half() - mid).abs();
                da.partial_cmp(&db).expect("NaN gap")
            });
            let (tracked_gap, err_lower, err_upper) = match best {
                Some(&(a, b)) => (
                    Some((a, b)),
                    Some((a - gap_lo).abs()),
                    Some((b - gap_hi).abs()),
                ),
                None => (None, None, None),
            };
            let hausdorff = bs
                .interval_set()
                .clipped(T::zero(), cfg.spectral_cap)
                .hausdorff(&limit_spectrum);
            Ok(GapRow {
                eps,
                status: RowStatus::Computed,
                q_eff: Some(params.q_eff),
                vertex_count: bs.vertex_count,
                reduced_dim: bs.reduced_dim,
                refinements: bs.refinements,
                richardson_converged: bs.richardson_converged,
                symmetry_deviation: bs.symmetry_deviation,
                residual_max: bs.residual_max,
                gaps,
                tracked_gap,
                err_lower,
                err_upper,
                hausdorff: Some(hausdorff),
                runtime_seconds: 0.0,
            })
        })();
        let mut row = match built {
            Ok(row) => row,
            Err(e) => {
                notes.push(format!("eps = {eps}: {e}"));
                skipped_gap_row(eps, e.to_string())
            }
        };
        row.runtime_seconds = row_clock.elapsed().as_secs_f64();
        rows.push(row);
    }

    let computed_count = rows
        .iter()
        .filter(|r| r.status == RowStatus::Computed)
        .count();
    let slack = T::lit(1e-9);
    let mut pass;
    if rows.len() == 1 {
        pass = computed_count == 1;
        if pass {
            notes.push("single-entry schedule: trend verdicts skipped (insufficient data)".into());
        }
    } else {
        pass = true;
        if computed_count < 2 {
            pass = false;
            notes.push(format!(
                "only {computed_count} of {} rows computed; need at least two for a trend",
                rows.len()
            ));
        }
        let hs: Vec<Option<T>> = rows.iter().map(|r| r.hausdorff).collect();
        if pass && !tail_shrinks(&hs, slack) {
            pass = false;
            notes.push("Hausdorff distance to the limit spectrum is not shrinking".into());
        }
        let lows: Vec<Option<T>> = rows.iter().map(|r| r.err_lower).collect();
        let highs: Vec<Option<T>> = rows.iter().map(|r| r.err_upper).collect();
        if pass && !tail_shrinks(&lows, slack) {
            pass = false;
            notes.push("lower gap endpoint error is not shrinking".into());
        }
        if pass && !tail_shrinks(&highs, slack) {
            pass = false;
            notes.push("upper gap endpoint error is not shrinking".into());
        }
    }

    let mut report = GapReport {
        rows,
        limit_gap: tracked_limit,
        tau_gap: tau,
        spectral_cap: cfg.spectral_cap,
        pass,
        single_gap: None,
        notes,
        runtime_seconds: t0.elapsed().as_secs_f64(),
    };
    report.single_gap = single_gap_check(&report, cfg.spectral_cap);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scaling::QTarget;

    fn base_config() -> StudyConfig<f64> {
        let law = ScalingLaw::new(QTarget::Finite(1.0), 1.0).unwrap();
        let room = RoomSpec::new(0.5, 0.5, 0.2);
        StudyConfig::new(law, room)
    }

    #[test]
    fn resolvent_rows_compute_on_a_coarse_schedule() {
        let mut cfg = base_config();
        cfg.eps_schedule = vec![0.25, 0.125];
        cfg.l = 0.5;
        cfg.f1 = CosineSeries::constant(0.5, 1.0);
        cfg.f2 = CosineSeries::zero(0.5);
        cfg.mesh.n_base = 4;
        let report = resolvent_study(&cfg).unwrap();
        assert_eq!(report.rows.len(), 2);
        for row in &report.rows {
            assert_eq!(row.status, RowStatus::Computed);
            let e1 = row.e1.unwrap();
            let e2 = row.e2.unwrap();
            let cr = row.coupling_residual.unwrap();
            assert!(e1.is_finite() && e1 >= 0.0);
            assert!(e2.is_finite() && e2 >= 0.0);
            assert!(cr.is_finite() && cr >= 0.0);
            assert!(row.vertex_count > 0 && row.reduced_dim > 0);
        }
        assert!(report.limit_u1_norm > 0.0);
        // the report serializes without its runtime field
        let text = serde_json::to_string(&report).unwrap();
        assert!(!text.contains("runtime_seconds"));
    }

    #[test]
    fn guard_violations_skip_rows_and_fail_the_verdict() {
        let mut cfg = base_config();
        cfg.law = ScalingLaw::new(QTarget::Finite(100.0), 1.0).unwrap();
        cfg.eps_schedule = vec![0.5, 0.25];
        cfg.l = 1.0;
        let report = resolvent_study(&cfg).unwrap();
        assert!(report
            .rows
            .iter()
            .all(|r| matches!(r.status, RowStatus::Skipped(_))));
        assert!(!report.pass);
        assert!(!report.notes.is_empty());
    }

    #[test]
    fn schedules_must_decrease() {
        let mut cfg = base_config();
        cfg.eps_schedule = vec![0.1, 0.2];
        assert!(matches!(
            resolvent_study(&cfg),
            Err(StudyError::Config(_))
        ));
        let mut empty = base_config();
        empty.eps_schedule.clear();
        assert!(matches!(gap_study(&empty), Err(StudyError::Config(_))));
    }

    #[test]
    fn gap_study_tracks_the_limit_gap_on_one_row() {
        let mut cfg = base_config();
        cfg.eps_schedule = vec![0.3];
        cfg.m_bands = 4;
        cfg.phi_count = 6;
        cfg.mesh.n_base = 4;
        cfg.max_refines = 1;
        cfg.richardson_tol = 5e-2;
        let report = gap_study(&cfg).unwrap();
        assert_eq!(report.rows.len(), 1);
        let row = &report.rows[0];
        assert_eq!(row.status, RowStatus::Computed);
        // limit gap (1, 1.25) sits inside the window
        assert_eq!(report.limit_gap, Some((1.0, 1.25)));
        let gap = row.tracked_gap.expect("a gap should be visible already");
        assert!(gap.0 > 0.5 && gap.1 < 2.0, "tracked gap {gap:?}");
        assert!(row.err_lower.unwrap() < 0.5);
        assert!(row.err_upper.unwrap() < 0.5);
        assert!(row.hausdorff.unwrap() < 1.0);
        assert!(row.symmetry_deviation < 1e-6);
        // a single-entry schedule cannot establish a trend; it passes with
        // a warning note instead of failing
        assert!(report.pass);
        assert!(report.notes.iter().any(|n| n.contains("insufficient data")));
        assert!(report.single_gap.is_some());
    }

    #[test]
    fn single_entry_resolvent_schedule_passes_with_a_warning() {
        let mut cfg = base_config();
        cfg.eps_schedule = vec![0.25];
        cfg.l = 0.5;
        cfg.f1 = CosineSeries::constant(0.5, 1.0);
        cfg.f2 = CosineSeries::zero(0.5);
        cfg.mesh.n_base = 4;
        let report = resolvent_study(&cfg).unwrap();
        assert!(report.pass);
        assert!(report.notes.iter().any(|n| n.contains("insufficient data")));
        let row = &report.rows[0];
        assert!(row.q_eff.is_some());
        assert!(row.profiles.is_some());
        // row runtimes and profiles stay out of the serialized report
        let text = serde_json::to_string(&report).unwrap();
        assert!(text.contains("q_eff"));
        assert!(!text.contains("runtime_seconds"));
        assert!(!text.contains("profiles"));
    }

    #[test]
    fn gap_study_preconditions_are_config_errors() {
        // an infinite coupling target leaves no gap in the limit spectrum
        let mut inf = base_config();
        inf.law = ScalingLaw::new(QTarget::Infinity, 1.0).unwrap();
        assert!(matches!(gap_study(&inf), Err(StudyError::Config(_))));
        // the window must reach past the upper limit-gap endpoint 1.25
        let mut narrow = base_config();
        narrow.spectral_cap = 1.2;
        assert!(matches!(gap_study(&narrow), Err(StudyError::Config(_))));
    }

    fn computed_gap_row(eps: f64, gaps: Vec<(f64, f64)>) -> GapRow<f64> {
        let mut row = skipped_gap_row(eps, String::new());
        row.status = RowStatus::Computed;
        row.gaps = gaps;
        row
    }

    fn report_with_rows(rows: Vec<GapRow<f64>>) -> GapReport<f64> {
        GapReport {
            rows,
            limit_gap: Some((1.0, 1.25)),
            tau_gap: 3e-3,
            spectral_cap: 3.0,
            pass: true,
            single_gap: None,
            notes: Vec::new(),
            runtime_seconds: 0.0,
        }
    }

    #[test]
    fn single_gap_verdict_reads_the_finest_computed_row() {
        // the verdict looks only at the smallest computed period
        let two_then_one = report_with_rows(vec![
            computed_gap_row(0.2, vec![(0.5, 0.6), (1.0, 1.2)]),
            computed_gap_row(0.1, vec![(1.0, 1.2)]),
        ]);
        assert_eq!(single_gap_check(&two_then_one, 3.0), Some(true));

        let one_then_two = report_with_rows(vec![
            computed_gap_row(0.2, vec![(1.0, 1.2)]),
            computed_gap_row(0.1, vec![(0.5, 0.6), (1.0, 1.2)]),
        ]);
        assert_eq!(single_gap_check(&one_then_two, 3.0), Some(false));

        // a skipped finest row falls back to the next computed one
        let fine_skipped = report_with_rows(vec![
            computed_gap_row(0.2, vec![(1.0, 1.2)]),
            skipped_gap_row(0.1, "budget".into()),
        ]);
        assert_eq!(single_gap_check(&fine_skipped, 3.0), Some(true));

        // a gap touching the window edge is not counted
        let edge = report_with_rows(vec![computed_gap_row(
            0.1,
            vec![(1.0, 1.2), (2.9, 3.0)],
        )]);
        assert_eq!(single_gap_check(&edge, 3.0), Some(true));

        let nothing = report_with_rows(vec![skipped_gap_row(0.1, "budget".into())]);
        assert_eq!(single_gap_check(&nothing, 3.0), None);
    }
}
