//! Ghost distributions of k-regular sequences.
//!
//! A nonnegative k-regular sequence, given by a linear representation, has
//! normalized block measures whose weak limit is described three ways: by the
//! solution of a dilation equation, by the attractor of an affine iterated
//! function system, and by the empirical measures themselves. This crate
//! computes all three together with the spectral quantities that certify when
//! the limit exists and whether it is singular.

pub mod catalog;
pub mod cli;
pub mod error;
pub mod ghost;
pub mod linrep;
pub mod matrix;
pub mod refine;
pub mod spectral;

pub use error::{Error, Result};
pub use ghost::{EmpiricalMeasure, Functional, GhostCdf, SalemClass, SingularityTrace};
pub use linrep::LinearRep;
pub use refine::{CurveSample, Dilation, IfsSystem, Mode, Model, Scalar};
pub use spectral::{JsrBounds, JsrConfig, SpectralReport};
