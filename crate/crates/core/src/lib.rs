//! Bayesian position and orientation error bounds for far-field localization
//! aided by reconfigurable intelligent surfaces.
//!
//! The crate assembles the closed-form Fisher information of the geometric
//! channel parameters of a BS -> (RIS reflections, optional LOS) -> UE
//! downlink, reduces it with label-addressed Schur complements, and maps it
//! through the geometry Jacobian to squared position/orientation error
//! bounds (SPEB/SOEB). An independent finite-difference oracle recomputes
//! every Fisher block from the raw signal model and certifies the closed
//! forms.
//!
//! The numeric core is generic over the scalar type ([`scalar::Real`], i.e.
//! `f32` or `f64`); the aliases below pin the common `f64` instantiations.

pub mod arrays;
pub mod efim;
pub mod error;
pub mod fim;
pub mod geometry;
pub mod labels;
pub mod linalg;
pub mod localization;
pub mod oracle;
pub mod scalar;
pub mod scenario;
pub mod waveform;

pub use error::{Error, Result};
pub use labels::{LabeledMatrix, LocKind, LocationLabel, ParamKind, ParamLabel};
pub use scalar::Real;

/// Dense real matrix over the generic scalar.
pub type Mat<T> = nalgebra::DMatrix<T>;
/// Dense complex matrix over the generic scalar.
pub type CMat<T> = nalgebra::DMatrix<nalgebra::Complex<T>>;
/// Dense complex vector over the generic scalar.
pub type CVec<T> = nalgebra::DVector<nalgebra::Complex<T>>;

pub type Mat64 = Mat<f64>;
pub type CMat64 = CMat<f64>;
pub type Scenario64 = scenario::Scenario<f64>;
pub type LabeledMatrix64 = LabeledMatrix<f64, ParamLabel>;
pub type BoundsReport64 = localization::BoundsReport<f64>;
pub type FimContext64 = fim::FimContext<f64>;
