//! Hypersurfaces of prescribed null expansion in initial data sets: finders,
//! stability spectrum and topology checks.

pub mod chart;
pub mod error;
pub mod fields;
mod fv;
pub mod linalg;
mod par;
pub mod solvers;
pub mod spectrum;
pub mod spherical;
pub mod stencil;
pub mod surfaces;

pub use chart::{Axis, AxisKind, Chart, ChartSpec, Topology};
pub use error::{Error, Result};
pub use fields::{
    Conventions, InitialDataSet, MuConvention, ScalarField, SymTensorField, TraceConvention,
};
