//! Spectral laboratory for a thin periodic waveguide with room-and-passage
//! decoration.
//!
//! The object of study is the Neumann Laplacian on a strip of height `eps`
//! whose upper edge carries one tiny protuberance per period: a narrow
//! passage opening into a rectangular room. As `eps` shrinks, the passage
//! and room dimensions follow power laws ([`scaling`]) tuned so that the
//! spectrum develops bands and gaps described by an explicit one-dimensional
//! limit model ([`limit`]).
//!
//! The crate provides:
//!
//! * exact cell geometry and structured triangulations ([`geometry`], [`mesh`]),
//! * first-order finite elements with quasi-periodic boundary conditions
//!   ([`fem`]),
//! * dense and sparse Hermitian eigensolvers built from scratch ([`linalg`],
//!   [`eigen`]),
//! * Bloch band sweeps, band/gap extraction and Hausdorff distances
//!   ([`bloch`]),
//! * the closed-form limit operator and its resolvent ([`limit`]),
//! * averaging maps comparing waveguide solutions with limit profiles
//!   ([`averaging`]),
//! * convergence studies driving all of the above ([`harness`]) and plain
//!   text serialization ([`io`]).
//!
//! Everything is generic over the real scalar through [`scalar::Real`];
//! the type aliases at the crate root fix `f64` for ordinary use.

pub mod averaging;
pub mod bloch;
pub mod eigen;
pub mod fem;
pub mod geometry;
pub mod harness;
pub mod io;
pub mod limit;
pub mod linalg;
pub mod mesh;
pub mod scalar;
pub mod scaling;

/// Double-precision cell parameters.
pub type CellParams64 = scaling::CellParams<f64>;
/// Double-precision scaling law.
pub type ScalingLaw64 = scaling::ScalingLaw<f64>;
/// Double-precision cell geometry.
pub type CellGeometry64 = geometry::CellGeometry<f64>;
/// Double-precision triangulation.
pub type TriMesh64 = mesh::TriMesh<f64>;
/// Double-precision band structure.
pub type BandStructure64 = bloch::BandStructure<f64>;
/// Double-precision limit model.
pub type LimitModel64 = limit::LimitModel<f64>;
/// Double-precision study configuration.
pub type StudyConfig64 = harness::StudyConfig<f64>;
/// Double-precision convergence report.
pub type ConvergenceReport64 = harness::ConvergenceReport<f64>;
