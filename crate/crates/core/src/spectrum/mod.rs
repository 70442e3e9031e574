//! Stability operator, principal eigenpair and the conformal topology report.

pub mod conformal;
pub mod eigen;
pub mod operator;
pub mod topology;

pub use conformal::{conformal_scalar_curvature, laplacian_and_gradient, SurfaceMetric};
pub use eigen::{
    gershgorin_lower_bound, principal_eigenpair, principal_eigenpair_of, principal_eigenpair_with,
    stability_verdict, EigenOptions, SpectrumResult, StabilityVerdict,
};
pub use operator::{h_term, symmetric_potential, trace_p, zeroth_order, StabilityOperator};
pub use topology::{
    equality_quantity, topology_report, RigidityMargins, TopologyReport, YamabeVerdict,
};
