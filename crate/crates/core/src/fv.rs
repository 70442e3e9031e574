//! Finite-volume operators on surface base grids (flat tori and lat-long spheres).
//!
//! Faces sit halfway between nodes; pole faces carry zero flux.

use crate::chart::{AxisKind, Chart};
use crate::linalg::MAX_DIM;

/// Neighbour of `node` one step along `axis` (`dir = ±1`), unless the step
/// crosses a pole.
pub fn neighbour(chart: &Chart, node: usize, axis: usize, dir: isize) -> Option<usize> {
    let m = chart.multi(node);
    let ax = chart.axis(axis);
    let i = m[axis] as isize + dir;
    if ax.kind != AxisKind::Periodic && (i < 0 || i >= ax.count as isize) {
        return None;
    }
    let mut idx = [0isize; MAX_DIM];
    for a in 0..chart.dim() {
        idx[a] = m[a] as isize;
    }
    idx[axis] = i;
    chart.resolve(&idx).map(|(n, _)| n)
}

/// `(1/√γ) ∂_a(√γ W^a)` from nodal densities `flux[node][a] = √γ W^a`.
pub fn divergence(chart: &Chart, flux: &[[f64; MAX_DIM]], sqrt_g: &[f64]) -> Vec<f64> {
    (0..chart.len())
        .map(|node| {
            let mut s = 0.0;
            for a in 0..chart.dim() {
                let h = chart.spacing(a);
                let up = neighbour(chart, node, a, 1)
                    .map(|k| 0.5 * (flux[node][a] + flux[k][a]))
                    .unwrap_or(0.0);
                let down = neighbour(chart, node, a, -1)
                    .map(|k| 0.5 * (flux[node][a] + flux[k][a]))
                    .unwrap_or(0.0);
                s += (up - down) / h;
            }
            s / sqrt_g[node]
        })
        .collect()
}

/// Integration weights for densities given per unit coordinate volume
/// (`√γ` times the weight gives the area element).
pub fn quadrature(chart: &Chart) -> Vec<f64> {
    let polar = chart.polar_axis();
    (0..chart.len())
        .map(|node| {
            let w = chart.cell_measure(node);
            match polar {
                Some(a) => w / chart.coords(node)[a].sin(),
                None => w,
            }
        })
        .collect()
}
