//! Graph hypersurfaces and their induced geometry.

mod geometry;
pub mod io;
pub mod kernel;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use geometry::{
    barrier_margins, induced_geometry, null_expansion, shear_and_potential, BarrierMargins,
    ShearPotential, SurfaceContext, SurfaceGeometry, SurfacePoint,
};

use crate::chart::{Chart, Topology};
use crate::error::{Error, Result};

/// Side of the surface the unit normal points to.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    /// Toward increasing radius or height.
    #[default]
    Positive,
    Negative,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Self::Positive => 1.0,
            Self::Negative => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Self::Positive => Self::Negative,
            Self::Negative => Self::Positive,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphereGrid {
    pub n_theta: usize,
    pub n_phi: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusGrid {
    pub extents: Vec<f64>,
    pub counts: Vec<usize>,
}

/// A closed graph hypersurface.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "representation", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Surface {
    /// `r = R(θ, φ)` over a lat-long sphere grid.
    RadialGraph {
        grid: SphereGrid,
        values: Vec<f64>,
        #[serde(default)]
        orientation: Orientation,
    },
    /// Last coordinate as a function of the others over a flat torus.
    TorusGraph {
        grid: TorusGrid,
        values: Vec<f64>,
        #[serde(default)]
        orientation: Orientation,
    },
    /// Coordinate sphere of one radius.
    RadialProfileShell {
        radius: f64,
        #[serde(default)]
        orientation: Orientation,
    },
}

impl Surface {
    pub fn sphere(grid: SphereGrid, radius: f64) -> Self {
        Self::RadialGraph {
            grid,
            values: vec![radius; grid.n_theta * grid.n_phi],
            orientation: Orientation::Positive,
        }
    }

    pub fn orientation(&self) -> Orientation {
        match self {
            Self::RadialGraph { orientation, .. }
            | Self::TorusGraph { orientation, .. }
            | Self::RadialProfileShell { orientation, .. } => *orientation,
        }
    }

    pub fn with_orientation(mut self, o: Orientation) -> Self {
        match &mut self {
            Self::RadialGraph { orientation, .. }
            | Self::TorusGraph { orientation, .. }
            | Self::RadialProfileShell { orientation, .. } => *orientation = o,
        }
        self
    }

    /// Check the invariants of the representation.
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::RadialGraph { grid, values, .. } => {
                if values.len() != grid.n_theta * grid.n_phi {
                    return Err(Error::InvalidField(
                        "radial graph values do not match the grid".into(),
                    ));
                }
                if let Some(i) = values.iter().position(|r| !(*r > 0.0) || !r.is_finite()) {
                    return Err(Error::InvalidField(format!(
                        "radial graph must be positive and finite (node {i})"
                    )));
                }
            }
            Self::TorusGraph { grid, values, .. } => {
                if values.len() != grid.counts.iter().product::<usize>() {
                    return Err(Error::InvalidField(
                        "torus graph values do not match the grid".into(),
                    ));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidField(
                        "torus graph heights must be finite".into(),
                    ));
                }
            }
            Self::RadialProfileShell { radius, .. } => {
                if !(*radius > 0.0) || !radius.is_finite() {
                    return Err(Error::InvalidField("shell radius must be positive".into()));
                }
            }
        }
        Ok(())
    }

    /// Heights on the base grid of `chart`, expanding coordinate spheres.
    pub fn heights_on(&self, chart: &Chart) -> Result<(Arc<Chart>, usize, Vec<f64>)> {
        self.validate()?;
        let (base, height_axis) = chart.graph_split()?;
        let values = match (self, chart.topology()) {
            (Self::RadialGraph { grid, values, .. }, Topology::LatLongSphereShell) => {
                if base.counts() != [grid.n_theta, grid.n_phi] {
                    return Err(Error::IncompatibleSurface(format!(
                        "surface grid {}x{} differs from chart angular grid {:?}",
                        grid.n_theta,
                        grid.n_phi,
                        base.counts()
                    )));
                }
                values.clone()
            }
            (Self::RadialProfileShell { radius, .. }, Topology::LatLongSphereShell) => {
                vec![*radius; base.len()]
            }
            (Self::TorusGraph { grid, values, .. }, Topology::PeriodicBox) => {
                let same = base.counts() == grid.counts
                    && base
                        .axes()
                        .iter()
                        .zip(&grid.extents)
                        .all(|(a, e)| (a.extent - e).abs() <= 1e-12 * e.abs());
                if !same {
                    return Err(Error::IncompatibleSurface(
                        "torus grid differs from the chart base axes".into(),
                    ));
                }
                values.clone()
            }
            (s, t) => {
                return Err(Error::IncompatibleSurface(format!(
                    "{} surface on a {t:?} chart",
                    s.kind()
                )));
            }
        };
        Ok((Arc::new(base), height_axis, values))
    }

    /// Same representation with new heights on the given base grid.
    pub fn with_values(&self, base: &Chart, values: Vec<f64>) -> Self {
        Self::graph(base, values, self.orientation())
    }

    /// Graph with the given heights over a sphere or torus base grid.
    pub fn graph(base: &Chart, values: Vec<f64>, orientation: Orientation) -> Self {
        match base.topology() {
            Topology::LatLongSphere => Self::RadialGraph {
                grid: SphereGrid {
                    n_theta: base.axis(0).count,
                    n_phi: base.axis(1).count,
                },
                values,
                orientation,
            },
            _ => Self::TorusGraph {
                grid: TorusGrid {
                    extents: base.axes().iter().map(|a| a.extent).collect(),
                    counts: base.counts(),
                },
                values,
                orientation,
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::RadialGraph { .. } => "radial-graph",
            Self::TorusGraph { .. } => "torus-graph",
            Self::RadialProfileShell { .. } => "radial-profile-shell",
        }
    }

    pub fn values(&self) -> Option<&[f64]> {
        match self {
            Self::RadialGraph { values, .. } | Self::TorusGraph { values, .. } => Some(values),
            Self::RadialProfileShell { .. } => None,
        }
    }
}
