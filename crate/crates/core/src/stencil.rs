//! Second-order finite-difference stencils on charts.
//!
//! Centered differences in the interior and across periodic seams and poles,
//! one-sided second-order formulas at the ends of closed axes.

use crate::chart::{AxisKind, Chart, Multi};
use crate::linalg::MAX_DIM;

const CAP: usize = 16;

/// Weighted node list; the flag marks values reached through a pole.
#[derive(Clone, Copy, Debug)]
pub struct Stencil {
    entries: [(usize, f64, bool); CAP],
    len: usize,
}

impl Stencil {
    fn empty() -> Self {
        Self {
            entries: [(0, 0.0, false); CAP],
            len: 0,
        }
    }

    fn push(&mut self, node: usize, w: f64, reflected: bool) {
        if let Some(e) = self.entries[..self.len]
            .iter_mut()
            .find(|e| e.0 == node && e.2 == reflected)
        {
            e.1 += w;
            return;
        }
        self.entries[self.len] = (node, w, reflected);
        self.len += 1;
    }

    pub fn entries(&self) -> &[(usize, f64, bool)] {
        &self.entries[..self.len]
    }

    /// Apply to component `comp` of node-major data with `stride` components
    /// per node; reflected values are multiplied by `parity`.
    pub fn apply(&self, values: &[f64], stride: usize, comp: usize, parity: f64) -> f64 {
        self.entries()
            .iter()
            .map(|&(n, w, r)| {
                let v = values[n * stride + comp];
                if r {
                    w * parity * v
                } else {
                    w * v
                }
            })
            .sum()
    }

    /// Weight of every node, with reflected entries multiplied by `parity`.
    pub fn weights(&self, parity: f64) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries()
            .iter()
            .map(move |&(n, w, r)| (n, if r { w * parity } else { w }))
    }
}

type Line = ([(isize, f64); 4], usize);

fn first_1d(kind: AxisKind, count: usize, h: f64, i: usize) -> Line {
    let i = i as isize;
    let n = count as isize;
    let s = 0.5 / h;
    match kind {
        AxisKind::Closed if i == 0 => ([(0, -3.0 * s), (1, 4.0 * s), (2, -s), (0, 0.0)], 3),
        AxisKind::Closed if i == n - 1 => {
            ([(i, 3.0 * s), (i - 1, -4.0 * s), (i - 2, s), (0, 0.0)], 3)
        }
        _ => ([(i - 1, -s), (i + 1, s), (0, 0.0), (0, 0.0)], 2),
    }
}

fn second_1d(kind: AxisKind, count: usize, h: f64, i: usize) -> Line {
    let i = i as isize;
    let n = count as isize;
    let s = 1.0 / (h * h);
    match kind {
        AxisKind::Closed if i == 0 => ([(0, 2.0 * s), (1, -5.0 * s), (2, 4.0 * s), (3, -s)], 4),
        AxisKind::Closed if i == n - 1 => (
            [
                (i, 2.0 * s),
                (i - 1, -5.0 * s),
                (i - 2, 4.0 * s),
                (i - 3, -s),
            ],
            4,
        ),
        _ => ([(i - 1, s), (i, -2.0 * s), (i + 1, s), (0, 0.0)], 3),
    }
}

impl Chart {
    fn line(&self, m: &Multi, a: usize, second: bool) -> Line {
        let ax = self.axis(a);
        if second {
            second_1d(ax.kind, ax.count, ax.spacing(), m[a])
        } else {
            first_1d(ax.kind, ax.count, ax.spacing(), m[a])
        }
    }

    fn base(m: &Multi) -> [isize; MAX_DIM] {
        let mut v = [0isize; MAX_DIM];
        for (d, s) in v.iter_mut().zip(m) {
            *d = *s as isize;
        }
        v
    }

    /// First derivative along axis `a` at the node with multi-index `m`.
    pub fn d1(&self, m: &Multi, a: usize) -> Stencil {
        let mut st = Stencil::empty();
        let (line, len) = self.line(m, a, false);
        let mut idx = Self::base(m);
        for &(i, w) in &line[..len] {
            idx[a] = i;
            let (node, r) = self.resolve(&idx).expect("stencil inside chart");
            st.push(node, w, r);
        }
        st
    }

    /// Second derivative `∂_a ∂_b`, mixed terms as products of first-derivative lines.
    pub fn d2(&self, m: &Multi, a: usize, b: usize) -> Stencil {
        let mut st = Stencil::empty();
        let mut idx = Self::base(m);
        if a == b {
            let (line, len) = self.line(m, a, true);
            for &(i, w) in &line[..len] {
                idx[a] = i;
                let (node, r) = self.resolve(&idx).expect("stencil inside chart");
                st.push(node, w, r);
            }
            return st;
        }
        let (la, na) = self.line(m, a, false);
        let (lb, nb) = self.line(m, b, false);
        for &(i, wi) in &la[..na] {
            for &(j, wj) in &lb[..nb] {
                idx[a] = i;
                idx[b] = j;
                let (node, r) = self.resolve(&idx).expect("stencil inside chart");
                st.push(node, wi * wj, r);
            }
        }
        st
    }
}
