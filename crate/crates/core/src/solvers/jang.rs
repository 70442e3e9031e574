//! The capillary-regularized Jang equation on ambient charts.

use std::sync::Arc;

use num_dual::DualSVec64;
use serde::{Deserialize, Serialize};

use super::newton::{damped_newton, NewtonOptions, NewtonStep};
use crate::chart::{AxisKind, Chart};
use crate::error::{Error, Result};
use crate::fields::{AmbientGeometry, InitialDataSet, PointGeometry, ScalarField};
use crate::linalg::{c, seed, slot, CsrMatrix, Real, MAX_DIM};
use crate::par::map_nodes;

const SLOTS: usize = 15;

/// Boundary data for the Jang equation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BoundarySpec {
    /// No boundary nodes; the chart must be periodic in every axis.
    Periodic,
    /// Values on the start (`inner`) and end (`outer`) faces of closed axes.
    Dirichlet { inner: f64, outer: f64 },
    /// Dirichlet data `±strength/τ`: large positive inside, negative outside.
    Barrier { strength: f64 },
}

impl Default for BoundarySpec {
    fn default() -> Self {
        Self::Dirichlet {
            inner: 0.0,
            outer: 0.0,
        }
    }
}

impl BoundarySpec {
    /// Dirichlet value per node, `None` for equation rows.
    pub fn values(&self, chart: &Chart, tau: f64) -> Result<Vec<Option<f64>>> {
        let closed: Vec<usize> = (0..chart.dim())
            .filter(|&a| chart.axis(a).kind == AxisKind::Closed)
            .collect();
        let (inner, outer) = match *self {
            Self::Periodic => {
                if !closed.is_empty() {
                    return Err(Error::Config(
                        "periodic boundary conditions need a fully periodic chart".into(),
                    ));
                }
                (0.0, 0.0)
            }
            Self::Dirichlet { inner, outer } => (inner, outer),
            Self::Barrier { strength } => (strength / tau, -strength / tau),
        };
        Ok((0..chart.len())
            .map(|node| {
                let m = chart.multi(node);
                let mut v = None;
                for &a in &closed {
                    if m[a] == chart.axis(a).count - 1 {
                        v = Some(outer);
                    }
                }
                for &a in &closed {
                    if m[a] == 0 {
                        v = Some(inner);
                    }
                }
                v
            })
            .collect())
    }
}

/// Controls for Newton solves and τ-continuation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JangConfig {
    /// Strictly decreasing positive regularization schedule.
    pub taus: Vec<f64>,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub min_damping: f64,
    /// Limit on `sup |u|`; `None` means `10³ ×` chart diameter.
    pub blow_up_threshold: Option<f64>,
    /// Limit on `max |Du|_g`.
    pub gradient_threshold: f64,
    pub boundary: BoundarySpec,
}

impl Default for JangConfig {
    fn default() -> Self {
        Self {
            taus: (0..11).map(|k| 0.5f64.powi(k)).collect(),
            tolerance: 1e-9,
            max_iterations: 50,
            min_damping: 2f64.powi(-20),
            blow_up_threshold: None,
            gradient_threshold: 100.0,
            boundary: BoundarySpec::default(),
        }
    }
}

impl JangConfig {
    pub fn validate(&self) -> Result<()> {
        if self.taus.is_empty() {
            return Err(Error::Config("τ schedule is empty".into()));
        }
        if self.taus.iter().any(|t| !(*t > 0.0) || !t.is_finite())
            || self.taus.windows(2).any(|w| w[1] >= w[0])
        {
            return Err(Error::Config(
                "τ schedule must be positive and strictly decreasing".into(),
            ));
        }
        if self.blow_up_threshold.is_some_and(|t| !(t > 0.0)) || !(self.gradient_threshold > 0.0) {
            return Err(Error::Config("blow-up thresholds must be positive".into()));
        }
        self.newton().validate()
    }

    pub fn newton(&self) -> NewtonOptions {
        NewtonOptions {
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            min_damping: self.min_damping,
        }
    }

    pub fn sup_threshold(&self, chart: &Chart) -> f64 {
        self.blow_up_threshold.unwrap_or(1e3 * chart.diameter())
    }
}

/// Result of one Newton solve at fixed `τ`.
#[derive(Clone, Debug)]
pub struct JangState {
    pub u: ScalarField,
    pub tau: f64,
    pub history: Vec<NewtonStep>,
    pub converged: bool,
    pub blow_up: bool,
    /// Nodes of concentrated gradient.
    pub steep_set: Vec<usize>,
    /// `|Du|_g` per node.
    pub gradient: Vec<f64>,
}

impl JangState {
    pub fn residual(&self) -> f64 {
        self.history.last().map_or(f64::INFINITY, |s| s.residual)
    }

    pub fn sup_abs(&self) -> f64 {
        self.u.max_abs()
    }

    pub fn max_gradient(&self) -> f64 {
        self.gradient.iter().copied().fold(0.0, f64::max)
    }
}

/// `(1/W)(g^{ij} − u^i u^j/W²)(∂_ij u − Γ^k_ij ∂_k u) + (g^{ij} − u^i u^j/W²) p_ij − τ u − h`,
/// the expanded form of `div(Du/W) + …` with `W = √(1 + |Du|²)`.
fn point_residual<D: Real>(
    n: usize,
    pt: &PointGeometry,
    tau: f64,
    u: D,
    du: &[D; MAX_DIM],
    ddu: &[[D; MAX_DIM]; MAX_DIM],
) -> D {
    let mut up = [D::zero(); MAX_DIM];
    for i in 0..n {
        for j in 0..n {
            up[i] += du[j] * c::<D>(pt.ginv[i][j]);
        }
    }
    let mut q = D::zero();
    for i in 0..n {
        q += up[i] * du[i];
    }
    let w2 = D::one() + q;
    let inv_w2 = w2.recip();
    let mut lap = D::zero();
    let mut ptr = D::zero();
    for i in 0..n {
        for j in 0..n {
            let a = c::<D>(pt.ginv[i][j]) - up[i] * up[j] * inv_w2;
            let mut hess = ddu[i][j];
            for k in 0..n {
                hess -= du[k] * c::<D>(pt.gamma[k][i][j]);
            }
            lap += a * hess;
            ptr += a * c::<D>(pt.p[i][j]);
        }
    }
    lap * w2.sqrt().recip() + ptr - u * c::<D>(tau) - c::<D>(pt.h)
}

fn pair_slot(n: usize, a: usize, b: usize) -> usize {
    1 + n + crate::linalg::sym_index(n, a, b)
}

/// Discrete Jang operator with boundary rows at fixed `τ`.
pub struct JangSystem {
    chart: Arc<Chart>,
    ambient: Arc<AmbientGeometry>,
    n: usize,
    tau: f64,
    dirichlet: Vec<Option<f64>>,
}

impl JangSystem {
    pub fn new(
        data: &InitialDataSet,
        ambient: Arc<AmbientGeometry>,
        tau: f64,
        bc: BoundarySpec,
    ) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::Domain(format!("τ = {tau} must be positive")));
        }
        let chart = data.chart().clone();
        let dirichlet = bc.values(&chart, tau)?;
        Ok(Self {
            chart,
            ambient,
            n: data.n,
            tau,
            dirichlet,
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    fn jets(&self, u: &[f64], node: usize) -> ([f64; MAX_DIM], [[f64; MAX_DIM]; MAX_DIM]) {
        let m = self.chart.multi(node);
        let mut du = [0.0; MAX_DIM];
        let mut ddu = [[0.0; MAX_DIM]; MAX_DIM];
        for a in 0..self.n {
            du[a] = self.chart.d1(&m, a).apply(u, 1, 0, 1.0);
            for b in a..self.n {
                let v = self.chart.d2(&m, a, b).apply(u, 1, 0, 1.0);
                ddu[a][b] = v;
                ddu[b][a] = v;
            }
        }
        (du, ddu)
    }

    /// Equation value at every node, ignoring boundary rows.
    pub fn equation(&self, u: &[f64]) -> Vec<f64> {
        map_nodes(u.len(), |node| {
            let (du, ddu) = self.jets(u, node);
            point_residual(
                self.n,
                &self.ambient.point(node),
                self.tau,
                u[node],
                &du,
                &ddu,
            )
        })
    }

    pub fn residual(&self, u: &[f64]) -> Vec<f64> {
        let eq = self.equation(u);
        eq.into_iter()
            .zip(&self.dirichlet)
            .enumerate()
            .map(|(node, (r, bc))| match bc {
                Some(v) => u[node] - v,
                None => r,
            })
            .collect()
    }

    /// Exact linearization of [`Self::residual`].
    pub fn jacobian(&self, u: &[f64]) -> CsrMatrix {
        let n = self.n;
        let rows = map_nodes(u.len(), |node| {
            if self.dirichlet[node].is_some() {
                return vec![(node, node, 1.0)];
            }
            let (du, ddu) = self.jets(u, node);
            let mut dd = [DualSVec64::<SLOTS>::from_re(0.0); MAX_DIM];
            let mut ddd = [[DualSVec64::<SLOTS>::from_re(0.0); MAX_DIM]; MAX_DIM];
            for a in 0..n {
                dd[a] = seed::<SLOTS>(du[a], 1 + a);
                for b in a..n {
                    let s = seed::<SLOTS>(ddu[a][b], pair_slot(n, a, b));
                    ddd[a][b] = s;
                    ddd[b][a] = s;
                }
            }
            let r = point_residual(
                n,
                &self.ambient.point(node),
                self.tau,
                seed::<SLOTS>(u[node], 0),
                &dd,
                &ddd,
            );
            let m = self.chart.multi(node);
            let mut out = vec![(node, node, slot(&r, 0))];
            for a in 0..n {
                let w = slot(&r, 1 + a);
                out.extend(
                    self.chart
                        .d1(&m, a)
                        .weights(1.0)
                        .map(|(k, x)| (node, k, w * x)),
                );
                for b in a..n {
                    let w = slot(&r, pair_slot(n, a, b));
                    out.extend(
                        self.chart
                            .d2(&m, a, b)
                            .weights(1.0)
                            .map(|(k, x)| (node, k, w * x)),
                    );
                }
            }
            out
        });
        CsrMatrix::from_triplets(u.len(), u.len(), rows.into_iter().flatten().collect())
    }

    /// `|Du|_g` at every node.
    pub fn gradient_norms(&self, u: &[f64]) -> Vec<f64> {
        map_nodes(u.len(), |node| {
            let (du, _) = self.jets(u, node);
            let g = self.ambient.point(node).ginv;
            let mut s = 0.0;
            for i in 0..self.n {
                for j in 0..self.n {
                    s += g[i][j] * du[i] * du[j];
                }
            }
            s.max(0.0).sqrt()
        })
    }
}

/// Jang operator applied to `u` at every node (no boundary rows).
pub fn jang_residual(u: &ScalarField, data: &InitialDataSet, tau: f64) -> Result<ScalarField> {
    if u.chart() != data.chart() {
        return Err(Error::InvalidField(
            "u and the data live on different charts".into(),
        ));
    }
    let ambient = Arc::new(data.geometry()?);
    let sys = JangSystem::new(
        data,
        ambient,
        tau,
        BoundarySpec::Dirichlet {
            inner: 0.0,
            outer: 0.0,
        },
    )?;
    ScalarField::new(data.chart().clone(), sys.equation(u.values()))
}

/// Nodes where `|Du|_g ≥ max(10 × median, ½ × max)`, empty when the gradient
/// never exceeds one.
pub fn steep_set(gradient: &[f64]) -> Vec<usize> {
    let max = gradient.iter().copied().fold(0.0, f64::max);
    if max < 1.0 {
        return Vec::new();
    }
    let mut sorted = gradient.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let t = (10.0 * median).max(0.5 * max);
    (0..gradient.len()).filter(|&k| gradient[k] >= t).collect()
}

/// Newton solve at fixed `τ` starting from `initial` (zero if absent).
pub fn jang_newton_solve(
    data: &InitialDataSet,
    tau: f64,
    bc: BoundarySpec,
    cfg: &JangConfig,
    initial: Option<&ScalarField>,
) -> Result<JangState> {
    jang_solve_with(data, Arc::new(data.geometry()?), tau, bc, cfg, initial)
}

pub(crate) fn jang_solve_with(
    data: &InitialDataSet,
    ambient: Arc<AmbientGeometry>,
    tau: f64,
    bc: BoundarySpec,
    cfg: &JangConfig,
    initial: Option<&ScalarField>,
) -> Result<JangState> {
    let sys = JangSystem::new(data, ambient, tau, bc)?;
    let x0 = match initial {
        Some(u) if u.chart() == data.chart() => u.values().to_vec(),
        Some(_) => {
            return Err(Error::InvalidField(
                "initial u lives on another chart".into(),
            ))
        }
        None => vec![0.0; data.chart().len()],
    };
    let out = damped_newton(
        "jang",
        x0,
        &cfg.newton(),
        |u| Ok(sys.residual(u)),
        |u| Ok(sys.jacobian(u)),
        |_| {},
    )?;
    let gradient = sys.gradient_norms(&out.x);
    let u = ScalarField::new(data.chart().clone(), out.x)?;
    let blow_up = u.max_abs() > cfg.sup_threshold(data.chart())
        || gradient.iter().any(|g| *g > cfg.gradient_threshold);
    Ok(JangState {
        steep_set: steep_set(&gradient),
        u,
        tau,
        history: out.history,
        converged: true,
        blow_up,
        gradient,
    })
}

/// `|Du|_g` at every node.
pub fn gradient_norms(data: &InitialDataSet, u: &ScalarField) -> Result<Vec<f64>> {
    if u.chart() != data.chart() {
        return Err(Error::InvalidField(
            "u and the data live on different charts".into(),
        ));
    }
    let sys = JangSystem::new(
        data,
        Arc::new(data.geometry()?),
        1.0,
        BoundarySpec::default(),
    )?;
    Ok(sys.gradient_norms(u.values()))
}
