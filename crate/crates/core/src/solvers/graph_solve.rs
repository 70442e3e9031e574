//! Direct Newton solve of `θ[Σ] = h` for graph surfaces.

use num_dual::DualSVec64;
use serde::{Deserialize, Serialize};

use super::newton::{damped_newton, NewtonOptions, NewtonStep};
use crate::error::Result;
use crate::fields::InitialDataSet;
use crate::linalg::{seed, slot, sym_index, CsrMatrix};
use crate::par::try_map_nodes;
use crate::surfaces::kernel::{Local, MAX_BASE};
use crate::surfaces::{Orientation, Surface, SurfaceContext, SurfaceGeometry};

const SLOTS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphSolveOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub min_damping: f64,
    /// Differentiate the pointwise map by central differences instead of
    /// forward-mode duals.
    pub fd_jacobian: bool,
}

impl Default for GraphSolveOptions {
    fn default() -> Self {
        let n = NewtonOptions::default();
        Self {
            tolerance: n.tolerance,
            max_iterations: n.max_iterations,
            min_damping: n.min_damping,
            fd_jacobian: false,
        }
    }
}

impl GraphSolveOptions {
    pub fn newton(&self) -> NewtonOptions {
        NewtonOptions {
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            min_damping: self.min_damping,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GraphSolution {
    pub surface: Surface,
    pub geometry: SurfaceGeometry,
    /// Max-norm of `θ − h`.
    pub residual: f64,
    pub history: Vec<NewtonStep>,
}

/// The map from graph heights to `θ − h`.
pub struct GraphSystem<'a> {
    pub ctx: SurfaceContext<'a>,
    pub orientation: Orientation,
}

impl<'a> GraphSystem<'a> {
    pub fn new(data: &'a InitialDataSet, orientation: Orientation) -> Result<Self> {
        Ok(Self {
            ctx: SurfaceContext::new(data)?,
            orientation,
        })
    }

    fn d(&self) -> usize {
        self.ctx.frame.d
    }

    fn pair_slot(&self, a: usize, b: usize) -> usize {
        1 + self.d() + sym_index(self.d(), a, b)
    }

    pub fn residual(&self, heights: &[f64]) -> Result<Vec<f64>> {
        let sign = self.orientation.sign();
        try_map_nodes(heights.len(), |b| {
            self.ctx.theta_minus_h(b, sign, &self.ctx.local(heights, b))
        })
    }

    /// Derivatives of `θ − h` at node `b` with respect to `F`, `F_a`, `F_ab`.
    fn local_derivatives(&self, heights: &[f64], b: usize, fd: bool) -> Result<[f64; SLOTS]> {
        let sign = self.orientation.sign();
        let d = self.d();
        let loc = self.ctx.local(heights, b);
        let mut out = [0.0; SLOTS];
        if fd {
            let f = |l: &Local<f64>| self.ctx.theta_minus_h(b, sign, l);
            let step = |x: f64| 1e-6 * (1.0 + x.abs());
            let mut central = |s: usize, get: &dyn Fn(&mut Local<f64>) -> &mut f64| -> Result<()> {
                let mut p = loc;
                let mut m = loc;
                let e = step(*get(&mut p));
                *get(&mut p) += e;
                *get(&mut m) -= e;
                out[s] = (f(&p)? - f(&m)?) / (2.0 * e);
                Ok(())
            };
            central(0, &|l| &mut l.f)?;
            for a in 0..d {
                central(1 + a, &|l| &mut l.df[a])?;
            }
            for a in 0..d {
                for c in a..d {
                    // ddf is symmetric: perturb both entries together
                    let s = self.pair_slot(a, c);
                    let mut p = loc;
                    let mut m = loc;
                    let e = step(loc.ddf[a][c]);
                    p.ddf[a][c] += e;
                    m.ddf[a][c] -= e;
                    if a != c {
                        p.ddf[c][a] += e;
                        m.ddf[c][a] -= e;
                    }
                    out[s] = (f(&p)? - f(&m)?) / (2.0 * e);
                }
            }
            return Ok(out);
        }
        let zero = DualSVec64::<SLOTS>::from_re(0.0);
        let mut dl = Local {
            f: seed::<SLOTS>(loc.f, 0),
            df: [zero; MAX_BASE],
            ddf: [[zero; MAX_BASE]; MAX_BASE],
        };
        for a in 0..d {
            dl.df[a] = seed::<SLOTS>(loc.df[a], 1 + a);
            for c in a..d {
                let s = seed::<SLOTS>(loc.ddf[a][c], self.pair_slot(a, c));
                dl.ddf[a][c] = s;
                dl.ddf[c][a] = s;
            }
        }
        let r = self.ctx.theta_minus_h(b, sign, &dl)?;
        for (s, o) in out.iter_mut().enumerate() {
            *o = slot(&r, s);
        }
        Ok(out)
    }

    /// Linearization of [`Self::residual`], assembled through the base stencils.
    pub fn jacobian(&self, heights: &[f64], fd: bool) -> Result<CsrMatrix> {
        let base = &self.ctx.base;
        let d = self.d();
        let rows = try_map_nodes(heights.len(), |b| {
            let w = self.local_derivatives(heights, b, fd)?;
            let m = base.multi(b);
            let mut out = vec![(b, b, w[0])];
            for a in 0..d {
                out.extend(
                    base.d1(&m, a)
                        .weights(1.0)
                        .map(|(k, x)| (b, k, w[1 + a] * x)),
                );
                for c in a..d {
                    let s = w[self.pair_slot(a, c)];
                    out.extend(base.d2(&m, a, c).weights(1.0).map(|(k, x)| (b, k, s * x)));
                }
            }
            Ok(out)
        })?;
        Ok(CsrMatrix::from_triplets(
            heights.len(),
            heights.len(),
            rows.into_iter().flatten().collect(),
        ))
    }
}

/// Newton solve of `θ = h` starting from `initial`.
pub fn pne_graph_solve(
    data: &InitialDataSet,
    initial: &Surface,
    opts: &GraphSolveOptions,
) -> Result<GraphSolution> {
    let sys = GraphSystem::new(data, initial.orientation())?;
    let (base, _, heights) = initial.heights_on(data.chart())?;
    let out = damped_newton(
        "graph",
        heights,
        &opts.newton(),
        |x| sys.residual(x),
        |x| sys.jacobian(x, opts.fd_jacobian),
        |_| {},
    )?;
    let surface = Surface::graph(&base, out.x, initial.orientation());
    let geometry = sys.ctx.geometry(&surface)?;
    Ok(GraphSolution {
        surface,
        geometry,
        residual: out.residual,
        history: out.history,
    })
}
