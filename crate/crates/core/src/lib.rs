//! Harmonic Beltrami signature pipeline for 2D simply-connected shapes:
//! contour ingestion, conformal disk parameterizations via the zipper
//! algorithm, Moebius normalization, conformal welding with harmonic
//! extension, the signature field itself, shape reconstruction, and a
//! desk-scale classification harness.
//!
//! The whole crate is generic over the floating-point scalar through
//! [`scalar::Real`]; `f64` aliases for the main types live at the root.

pub mod classify;
pub mod complexgeom;
pub mod contour;
pub mod error;
pub mod harmonic;
pub mod hbs;
pub mod io;
pub mod normalize;
pub mod reconstruct;
pub mod scalar;
pub mod zipper;

pub use scalar::{Cx, Real};

/// Concrete `f64` aliases for the common types.
pub type C64 = Cx<f64>;
pub type Contour64 = contour::Contour<f64>;
pub type Moebius64 = complexgeom::Moebius<f64>;
pub type DiskGrid64 = complexgeom::DiskGrid<f64>;
pub type BeltramiField64 = complexgeom::BeltramiField<f64>;
pub type WeldingMap64 = harmonic::WeldingMap<f64>;
pub type HbsField64 = hbs::HbsField<f64>;
