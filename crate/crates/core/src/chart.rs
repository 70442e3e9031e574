//! Coordinate charts: structured node grids with periodic, closed and polar
//! axes.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::MAX_DIM;

/// Global shape of a chart.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    /// Flat torus: every axis periodic, coordinates are Cartesian.
    PeriodicBox,
    /// Spherical shell `(r, θ, φ)` with the poles excluded by a half cell.
    LatLongSphereShell,
    /// Radial axis first, remaining axes periodic or closed, no implied embedding.
    RadialInterval,
    /// Two-sphere `(θ, φ)`; base grid of radial graphs.
    LatLongSphere,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AxisKind {
    Periodic,
    Closed,
    /// Colatitude on `(0, π)`, nodes at half-integer offsets from the poles.
    Polar,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub kind: AxisKind,
    pub start: f64,
    pub extent: f64,
    pub count: usize,
}

impl Axis {
    pub fn periodic(start: f64, extent: f64, count: usize) -> Self {
        Self {
            kind: AxisKind::Periodic,
            start,
            extent,
            count,
        }
    }

    pub fn closed(start: f64, end: f64, count: usize) -> Self {
        Self {
            kind: AxisKind::Closed,
            start,
            extent: end - start,
            count,
        }
    }

    pub fn polar(count: usize) -> Self {
        Self {
            kind: AxisKind::Polar,
            start: 0.0,
            extent: PI,
            count,
        }
    }

    pub fn spacing(&self) -> f64 {
        match self.kind {
            AxisKind::Closed => self.extent / (self.count - 1) as f64,
            AxisKind::Periodic | AxisKind::Polar => self.extent / self.count as f64,
        }
    }

    pub fn coord(&self, i: usize) -> f64 {
        let h = self.spacing();
        match self.kind {
            AxisKind::Polar => self.start + (i as f64 + 0.5) * h,
            _ => self.start + i as f64 * h,
        }
    }

    pub fn end(&self) -> f64 {
        self.start + self.extent
    }
}

/// Serializable chart description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "topology", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ChartSpec {
    PeriodicBox {
        extents: Vec<f64>,
        counts: Vec<usize>,
        #[serde(default)]
        origin: Option<Vec<f64>>,
    },
    LatLongSphereShell {
        r_min: f64,
        r_max: f64,
        counts: [usize; 3],
    },
    RadialInterval {
        axes: Vec<Axis>,
    },
    LatLongSphere {
        counts: [usize; 2],
    },
}

impl ChartSpec {
    pub fn build(&self) -> Result<Chart> {
        match self {
            Self::PeriodicBox {
                extents,
                counts,
                origin,
            } => {
                if extents.len() != counts.len() {
                    return Err(Error::InvalidChart(
                        "extents and counts differ in length".into(),
                    ));
                }
                let origin = origin.clone().unwrap_or_else(|| vec![0.0; extents.len()]);
                if origin.len() != extents.len() {
                    return Err(Error::InvalidChart("origin has the wrong length".into()));
                }
                let axes = (0..extents.len())
                    .map(|a| Axis::periodic(origin[a], extents[a], counts[a]))
                    .collect();
                Chart::new(Topology::PeriodicBox, axes)
            }
            Self::LatLongSphereShell {
                r_min,
                r_max,
                counts,
            } => Chart::sphere_shell(*r_min, *r_max, *counts),
            Self::RadialInterval { axes } => Chart::new(Topology::RadialInterval, axes.clone()),
            Self::LatLongSphere { counts } => Chart::sphere(counts[0], counts[1]),
        }
    }
}

/// Structured grid with row-major node numbering (last axis fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    topology: Topology,
    axes: Vec<Axis>,
    strides: Vec<usize>,
    len: usize,
}

/// Multi-index of a node, padded to the maximal dimension.
pub type Multi = [usize; MAX_DIM];

impl Chart {
    pub fn new(topology: Topology, axes: Vec<Axis>) -> Result<Self> {
        let dim = axes.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidChart(format!(
                "dimension {dim} outside 1..={MAX_DIM}"
            )));
        }
        for (a, ax) in axes.iter().enumerate() {
            if ax.count < 5 {
                return Err(Error::InvalidChart(format!(
                    "axis {a} has {} nodes, need at least 5",
                    ax.count
                )));
            }
            if !(ax.extent > 0.0) || !ax.start.is_finite() || !ax.extent.is_finite() {
                return Err(Error::InvalidChart(format!(
                    "axis {a} has non-positive or non-finite extent"
                )));
            }
        }
        let kinds: Vec<AxisKind> = axes.iter().map(|a| a.kind).collect();
        use AxisKind::*;
        let ok = match topology {
            Topology::PeriodicBox => kinds.iter().all(|k| *k == Periodic),
            Topology::LatLongSphereShell => kinds == [Closed, Polar, Periodic],
            Topology::LatLongSphere => kinds == [Polar, Periodic],
            Topology::RadialInterval => {
                kinds[0] == Closed && kinds[1..].iter().all(|k| *k != Polar)
            }
        };
        if !ok {
            return Err(Error::InvalidChart(format!(
                "axis kinds {kinds:?} do not fit topology {topology:?}"
            )));
        }
        if matches!(
            topology,
            Topology::LatLongSphereShell | Topology::LatLongSphere
        ) {
            let az = axes[dim - 1];
            if az.count % 2 != 0 {
                return Err(Error::InvalidChart(
                    "azimuthal node count must be even".into(),
                ));
            }
            if (az.extent - 2.0 * PI).abs() > 1e-12 {
                return Err(Error::InvalidChart("azimuthal extent must be 2π".into()));
            }
        }
        if topology == Topology::LatLongSphereShell && !(axes[0].start > 0.0) {
            return Err(Error::InvalidChart(
                "shell inner radius must be positive".into(),
            ));
        }
        let mut strides = vec![1; dim];
        for a in (0..dim.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * axes[a + 1].count;
        }
        let len = strides[0] * axes[0].count;
        Ok(Self {
            topology,
            axes,
            strides,
            len,
        })
    }

    /// Shell `r ∈ [r_min, r_max]` with `counts = [n_r, n_θ, n_φ]`.
    pub fn sphere_shell(r_min: f64, r_max: f64, counts: [usize; 3]) -> Result<Self> {
        if !(r_max > r_min) {
            return Err(Error::InvalidChart("r_max must exceed r_min".into()));
        }
        Self::new(
            Topology::LatLongSphereShell,
            vec![
                Axis::closed(r_min, r_max, counts[0]),
                Axis::polar(counts[1]),
                Axis::periodic(0.0, 2.0 * PI, counts[2]),
            ],
        )
    }

    pub fn sphere(n_theta: usize, n_phi: usize) -> Result<Self> {
        Self::new(
            Topology::LatLongSphere,
            vec![Axis::polar(n_theta), Axis::periodic(0.0, 2.0 * PI, n_phi)],
        )
    }

    pub fn periodic_box(extents: &[f64], counts: &[usize]) -> Result<Self> {
        let axes = extents
            .iter()
            .zip(counts)
            .map(|(e, n)| Axis::periodic(0.0, *e, *n))
            .collect();
        Self::new(Topology::PeriodicBox, axes)
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, a: usize) -> &Axis {
        &self.axes[a]
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn counts(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.count).collect()
    }

    pub fn spacing(&self, a: usize) -> f64 {
        self.axes[a].spacing()
    }

    pub fn multi(&self, mut node: usize) -> Multi {
        let mut m = [0; MAX_DIM];
        for a in 0..self.dim() {
            m[a] = node / self.strides[a];
            node %= self.strides[a];
        }
        m
    }

    pub fn flat(&self, m: &Multi) -> usize {
        (0..self.dim()).map(|a| m[a] * self.strides[a]).sum()
    }

    pub fn coords(&self, node: usize) -> [f64; MAX_DIM] {
        let m = self.multi(node);
        let mut x = [0.0; MAX_DIM];
        for a in 0..self.dim() {
            x[a] = self.axes[a].coord(m[a]);
        }
        x
    }

    /// Axis whose index reflects across the poles, if any.
    pub fn polar_axis(&self) -> Option<usize> {
        self.axes.iter().position(|a| a.kind == AxisKind::Polar)
    }

    /// Map a possibly virtual multi-index to a node.
    ///
    /// Returns the node and whether it was reached through a pole, in which
    /// case tensor components pick up the reflection parity. `None` means the
    /// index lies beyond a closed axis.
    pub fn resolve(&self, idx: &[isize; MAX_DIM]) -> Option<(usize, bool)> {
        let dim = self.dim();
        let mut m = [0usize; MAX_DIM];
        let mut reflected = false;
        let mut shift_azimuth = false;
        for a in 0..dim {
            let n = self.axes[a].count as isize;
            let i = idx[a];
            m[a] = match self.axes[a].kind {
                AxisKind::Periodic => i.rem_euclid(n) as usize,
                AxisKind::Closed => {
                    if i < 0 || i >= n {
                        return None;
                    }
                    i as usize
                }
                AxisKind::Polar => {
                    if i < 0 {
                        reflected = true;
                        shift_azimuth = true;
                        (-1 - i) as usize
                    } else if i >= n {
                        reflected = true;
                        shift_azimuth = true;
                        (2 * n - 1 - i) as usize
                    } else {
                        i as usize
                    }
                }
            };
            if m[a] >= n as usize {
                return None;
            }
        }
        if shift_azimuth {
            let az = dim - 1;
            let n = self.axes[az].count;
            m[az] = (m[az] + n / 2) % n;
        }
        Some((self.flat(&m), reflected))
    }

    /// Scale factors `s_a` with first and second coordinate derivatives.
    ///
    /// Tensor components divided by `s_a s_b` are smooth through the poles,
    /// so finite differences act on the rescaled components.
    pub fn scale_jet(&self, x: &[f64; MAX_DIM]) -> ScaleJet {
        let mut j = ScaleJet::identity();
        match self.topology {
            Topology::LatLongSphereShell => {
                let (r, th) = (x[0], x[1]);
                let (s, c) = th.sin_cos();
                j.s[1] = r;
                j.ds[1][0] = 1.0;
                j.s[2] = r * s;
                j.ds[2][0] = s;
                j.ds[2][1] = r * c;
                j.dds[2][0][1] = c;
                j.dds[2][1][0] = c;
                j.dds[2][1][1] = -r * s;
            }
            Topology::LatLongSphere => {
                let (s, c) = x[0].sin_cos();
                j.s[1] = s;
                j.ds[1][0] = c;
                j.dds[1][0][0] = -s;
            }
            _ => {}
        }
        j
    }

    /// Reflection parity of a rescaled tensor component with the given indices.
    pub fn component_parity(&self, indices: &[usize]) -> f64 {
        match self.topology {
            Topology::LatLongSphereShell | Topology::LatLongSphere => {
                let angular = indices.iter().filter(|&&i| i + 2 >= self.dim()).count();
                if angular % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
            _ => 1.0,
        }
    }

    /// Position in the Cartesian embedding of the chart, where one exists.
    pub fn cartesian(&self, node: usize) -> [f64; MAX_DIM] {
        let x = self.coords(node);
        match self.topology {
            Topology::LatLongSphereShell => {
                let (r, th, ph) = (x[0], x[1], x[2]);
                [
                    r * th.sin() * ph.cos(),
                    r * th.sin() * ph.sin(),
                    r * th.cos(),
                    0.0,
                ]
            }
            Topology::LatLongSphere => {
                let (th, ph) = (x[0], x[1]);
                [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos(), 0.0]
            }
            _ => x,
        }
    }

    /// Jacobian `∂X^i/∂x^a` of the Cartesian embedding (rows `i`, columns `a`).
    pub fn cartesian_jacobian(&self, node: usize) -> [[f64; MAX_DIM]; MAX_DIM] {
        let x = self.coords(node);
        let mut jac = [[0.0; MAX_DIM]; MAX_DIM];
        match self.topology {
            Topology::LatLongSphereShell => {
                let (r, th, ph) = (x[0], x[1], x[2]);
                let (st, ct) = th.sin_cos();
                let (sp, cp) = ph.sin_cos();
                jac[0] = [st * cp, r * ct * cp, -r * st * sp, 0.0];
                jac[1] = [st * sp, r * ct * sp, r * st * cp, 0.0];
                jac[2] = [ct, -r * st, 0.0, 0.0];
            }
            _ => {
                for (a, row) in jac.iter_mut().enumerate().take(self.dim()) {
                    row[a] = 1.0;
                }
            }
        }
        jac
    }

    /// Euclidean radius of a node: `r` on shells, `|x|` otherwise.
    pub fn radius(&self, node: usize) -> f64 {
        match self.topology {
            Topology::LatLongSphereShell | Topology::RadialInterval => self.coords(node)[0],
            _ => {
                let x = self.coords(node);
                x[..self.dim()].iter().map(|v| v * v).sum::<f64>().sqrt()
            }
        }
    }

    pub fn diameter(&self) -> f64 {
        match self.topology {
            Topology::LatLongSphereShell => 2.0 * self.axes[0].end(),
            Topology::LatLongSphere => PI,
            _ => self
                .axes
                .iter()
                .map(|a| a.extent * a.extent)
                .sum::<f64>()
                .sqrt(),
        }
    }

    /// Axes of the surface base grid and the height axis of graphs over it.
    pub fn graph_split(&self) -> Result<(Chart, usize)> {
        match self.topology {
            Topology::LatLongSphereShell => {
                Ok((Chart::sphere(self.axes[1].count, self.axes[2].count)?, 0))
            }
            Topology::PeriodicBox => {
                let d = self.dim();
                Ok((
                    Chart::new(Topology::PeriodicBox, self.axes[..d - 1].to_vec())?,
                    d - 1,
                ))
            }
            t => Err(Error::UnsupportedTopology(format!(
                "{t:?} charts carry no graph surfaces"
            ))),
        }
    }

    /// Multi-index of the chart node at base node `b` and height index `k`.
    pub fn graph_node(&self, base: &Chart, b: usize, height_axis: usize, k: usize) -> usize {
        let bm = base.multi(b);
        let mut m = [0; MAX_DIM];
        let mut j = 0;
        for (a, slot) in m.iter_mut().enumerate().take(self.dim()) {
            if a == height_axis {
                *slot = k;
            } else {
                *slot = bm[j];
                j += 1;
            }
        }
        self.flat(&m)
    }

    /// Cell measure for integration on the node grid.
    ///
    /// On polar axes this is the exact cell integral of `sin θ`, so densities
    /// must be divided by `sin θ` before weighting.
    pub fn cell_measure(&self, node: usize) -> f64 {
        let m = self.multi(node);
        let mut w = 1.0;
        for (a, ax) in self.axes.iter().enumerate() {
            let h = ax.spacing();
            w *= match ax.kind {
                AxisKind::Polar => 2.0 * (0.5 * h).sin() * ax.coord(m[a]).sin(),
                AxisKind::Closed if m[a] == 0 || m[a] == ax.count - 1 => 0.5 * h,
                _ => h,
            };
        }
        w
    }
}

/// Scale factors and their derivatives, indexed `[a]`, `[a][k]`, `[a][k][l]`.
#[derive(Clone, Copy, Debug)]
pub struct ScaleJet {
    pub s: [f64; MAX_DIM],
    pub ds: [[f64; MAX_DIM]; MAX_DIM],
    pub dds: [[[f64; MAX_DIM]; MAX_DIM]; MAX_DIM],
}

impl ScaleJet {
    fn identity() -> Self {
        Self {
            s: [1.0; MAX_DIM],
            ds: [[0.0; MAX_DIM]; MAX_DIM],
            dds: [[[0.0; MAX_DIM]; MAX_DIM]; MAX_DIM],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_rules() {
        let p = Axis::periodic(0.0, 2.0, 8);
        assert_eq!(p.spacing(), 0.25);
        let c = Axis::closed(1.0, 3.0, 9);
        assert_eq!(c.spacing(), 0.25);
        let t = Axis::polar(8);
        assert!((t.coord(0) - PI / 16.0).abs() < 1e-15);
        assert!((t.coord(7) - 15.0 * PI / 16.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_small_or_mismatched_axes() {
        assert!(Chart::periodic_box(&[1.0], &[4]).is_err());
        assert!(Chart::sphere(8, 15).is_err());
        assert!(Chart::new(Topology::PeriodicBox, vec![Axis::closed(0.0, 1.0, 8)]).is_err());
        assert!(Chart::sphere_shell(0.0, 1.0, [5, 8, 16]).is_err());
    }

    #[test]
    fn pole_reflection_shifts_azimuth() {
        let c = Chart::sphere(8, 16).unwrap();
        let (node, refl) = c.resolve(&[-1, 3, 0, 0]).unwrap();
        assert!(refl);
        assert_eq!(c.multi(node)[..2], [0, 11]);
        let (node, refl) = c.resolve(&[8, 15, 0, 0]).unwrap();
        assert!(refl);
        assert_eq!(c.multi(node)[..2], [7, 7]);
        let (node, refl) = c.resolve(&[2, -1, 0, 0]).unwrap();
        assert!(!refl);
        assert_eq!(c.multi(node)[..2], [2, 15]);
    }

    #[test]
    fn closed_axes_do_not_wrap() {
        let c = Chart::sphere_shell(1.0, 2.0, [5, 6, 8]).unwrap();
        assert!(c.resolve(&[-1, 0, 0, 0]).is_none());
        assert!(c.resolve(&[5, 0, 0, 0]).is_none());
    }

    #[test]
    fn multi_and_flat_roundtrip() {
        let c = Chart::periodic_box(&[1.0, 2.0, 3.0], &[5, 6, 7]).unwrap();
        for node in 0..c.len() {
            assert_eq!(c.flat(&c.multi(node)), node);
        }
    }

    #[test]
    fn sphere_cell_measure_integrates_area_exactly() {
        let c = Chart::sphere(9, 12).unwrap();
        let area: f64 = (0..c.len()).map(|n| c.cell_measure(n)).sum();
        assert!((area - 4.0 * PI).abs() < 1e-12);
    }
}
