//! Scalar curvature of conformally rescaled surface metrics.

use crate::error::{Error, Result};
use crate::fields::{metric_scalar_curvature, MetricJet, ScalarField, SymTensorField};
use crate::linalg::MAX_DIM;
use crate::par::try_map_nodes;
use crate::surfaces::SurfaceGeometry;

/// Intrinsic metric `γ_ab` on a surface base chart together with its
/// scalar curvature `S`.
#[derive(Clone, Debug)]
pub struct SurfaceMetric {
    pub metric: SymTensorField,
    pub scalar: Vec<f64>,
}

impl SurfaceMetric {
    /// Metric and scalar curvature as computed by the surface geometry.
    pub fn from_geometry(geom: &SurfaceGeometry) -> Result<Self> {
        let metric = SymTensorField::from_fn(geom.base.clone(), |b| geom.points[b].metric)?;
        Ok(Self {
            metric,
            scalar: geom.field(|p| p.scalar_sigma),
        })
    }

    /// Scalar curvature obtained by differencing the metric itself.
    pub fn intrinsic(metric: SymTensorField) -> Result<Self> {
        let scalar = metric_scalar_curvature(&metric)?.into_values();
        Ok(Self { metric, scalar })
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }
}

/// `Δf` and `|∇f|²` at every node, intrinsic to `γ`.
pub fn laplacian_and_gradient(metric: &SymTensorField, f: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let chart = metric.chart().clone();
    let d = chart.dim();
    let pairs = try_map_nodes(chart.len(), |node| {
        let jet = MetricJet::at(metric, node)?;
        let gam = jet.christoffel();
        let m = chart.multi(node);
        let mut df = [0.0; MAX_DIM];
        for (a, x) in df.iter_mut().enumerate().take(d) {
            *x = chart.d1(&m, a).apply(f, 1, 0, 1.0);
        }
        let mut lap = 0.0;
        let mut grad2 = 0.0;
        for a in 0..d {
            for b in 0..d {
                let ddf = chart.d2(&m, a, b).apply(f, 1, 0, 1.0);
                let hess = ddf - (0..d).map(|c| gam[c][a][b] * df[c]).sum::<f64>();
                lap += jet.ginv[a][b] * hess;
                grad2 += jet.ginv[a][b] * df[a] * df[b];
            }
        }
        Ok((lap, grad2))
    })?;
    Ok(pairs.into_iter().unzip())
}

/// Scalar curvature of `f^{2/(n−2)} γ`:
/// `S̃ = f^{−n/(n−2)} (−2Δf + S f + ((n−1)/(n−2)) |∇f|²/f)`.
pub fn conformal_scalar_curvature(g: &SurfaceMetric, f: &[f64], n: usize) -> Result<ScalarField> {
    let chart = g.metric.chart().clone();
    if f.len() != chart.len() || g.scalar.len() != chart.len() {
        return Err(Error::InvalidField(
            "conformal factor does not match the surface grid".into(),
        ));
    }
    if n < 3 || g.dim() != n - 1 {
        return Err(Error::Domain(format!(
            "surface of dimension {} is not a hypersurface of dimension {n}",
            g.dim()
        )));
    }
    if let Some(i) = f.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::Domain(format!(
            "conformal factor must be positive, got {} at node {i}",
            f[i]
        )));
    }
    let (lap, grad2) = laplacian_and_gradient(&g.metric, f)?;
    let nf = n as f64;
    let e = -nf / (nf - 2.0);
    let c = (nf - 1.0) / (nf - 2.0);
    let values = (0..chart.len())
        .map(|i| f[i].powf(e) * (-2.0 * lap[i] + g.scalar[i] * f[i] + c * grad2[i] / f[i]))
        .collect();
    ScalarField::new(chart, values)
}
