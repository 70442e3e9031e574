//! Fields on charts and initial data sets `(g, p, h)`.

mod geometry;
pub mod io;
mod presets;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use geometry::{AmbientGeometry, MetricJet, PointGeometry};
pub use presets::{DataDescription, DataSpec, HProfile, HSpec, SchwarzschildCoordinates};

use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::linalg::{leading_minors, sym_index, sym_len, unpack_sym, SquareMat};

/// Determinant below which a metric is treated as degenerate.
pub const DEGENERATE_DET: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    chart: Arc<Chart>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(chart: Arc<Chart>, values: Vec<f64>) -> Result<Self> {
        check_len_finite(&chart, &values, 1, "scalar")?;
        Ok(Self { chart, values })
    }

    pub fn from_fn(chart: Arc<Chart>, f: impl Fn(usize) -> f64) -> Result<Self> {
        let values = (0..chart.len()).map(f).collect();
        Self::new(chart, values)
    }

    pub fn constant(chart: Arc<Chart>, c: f64) -> Result<Self> {
        Self::from_fn(chart, |_| c)
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, node: usize) -> f64 {
        self.values[node]
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn min(&self) -> (usize, f64) {
        self.values
            .iter()
            .copied()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |b, (i, v)| if v < b.1 { (i, v) } else { b },
            )
    }

    pub fn max_abs(&self) -> f64 {
        crate::linalg::max_abs(&self.values)
    }
}

/// Covector field, components node-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CovectorField {
    chart: Arc<Chart>,
    values: Vec<f64>,
}

impl CovectorField {
    pub fn new(chart: Arc<Chart>, values: Vec<f64>) -> Result<Self> {
        let d = chart.dim();
        check_len_finite(&chart, &values, d, "covector")?;
        Ok(Self { chart, values })
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, node: usize, k: usize) -> f64 {
        self.values[node * self.chart.dim() + k]
    }

    pub fn at(&self, node: usize) -> &[f64] {
        let d = self.chart.dim();
        &self.values[node * d..(node + 1) * d]
    }
}

/// Symmetric 2-tensor field storing the upper triangle only.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTensorField {
    chart: Arc<Chart>,
    values: Vec<f64>,
}

impl SymTensorField {
    pub fn new(chart: Arc<Chart>, values: Vec<f64>) -> Result<Self> {
        let k = sym_len(chart.dim());
        check_len_finite(&chart, &values, k, "symmetric tensor")?;
        Ok(Self { chart, values })
    }

    /// Build from a full matrix per node; only the upper triangle is read.
    pub fn from_fn(chart: Arc<Chart>, f: impl Fn(usize) -> SquareMat<f64>) -> Result<Self> {
        let d = chart.dim();
        let k = sym_len(d);
        let mut values = vec![0.0; chart.len() * k];
        for node in 0..chart.len() {
            let m = f(node);
            for i in 0..d {
                for j in i..d {
                    values[node * k + sym_index(d, i, j)] = m[i][j];
                }
            }
        }
        Self::new(chart, values)
    }

    pub fn zeros(chart: Arc<Chart>) -> Self {
        let k = sym_len(chart.dim());
        let values = vec![0.0; chart.len() * k];
        Self { chart, values }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, node: usize, i: usize, j: usize) -> f64 {
        let d = self.dim();
        self.values[node * sym_len(d) + sym_index(d, i, j)]
    }

    pub fn matrix(&self, node: usize) -> SquareMat<f64> {
        let k = sym_len(self.dim());
        unpack_sym(self.dim(), &self.values[node * k..(node + 1) * k])
    }
}

fn check_len_finite(chart: &Chart, values: &[f64], per_node: usize, what: &str) -> Result<()> {
    if values.len() != chart.len() * per_node {
        return Err(Error::InvalidField(format!(
            "{what} field has {} values, chart needs {}",
            values.len(),
            chart.len() * per_node
        )));
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidField(format!(
            "{what} field has a non-finite value at node {}",
            i / per_node
        )));
    }
    Ok(())
}

/// Which trace of `p` enters the `h`-dependent terms of the stability operator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceConvention {
    #[default]
    Ambient,
    Induced,
}

/// Parenthesization of the energy density.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MuConvention {
    /// `μ = ½(R − |p|² + (tr p)²)`
    #[default]
    Standard,
    /// `μ = ½R − |p|² + (tr p)²`
    Literal,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Conventions {
    #[serde(default)]
    pub trace: TraceConvention,
    #[serde(default)]
    pub mu: MuConvention,
}

/// Initial data `(g, p)` with a prescription `h`, sampled on one chart.
#[derive(Clone, Debug)]
pub struct InitialDataSet {
    pub n: usize,
    pub g: SymTensorField,
    pub p: SymTensorField,
    pub h: ScalarField,
    pub conventions: Conventions,
}

impl InitialDataSet {
    pub fn new(
        g: SymTensorField,
        p: SymTensorField,
        h: ScalarField,
        conventions: Conventions,
    ) -> Result<Self> {
        let chart = g.chart().clone();
        if p.chart() != &chart || h.chart() != &chart {
            return Err(Error::InvalidField(
                "g, p and h must share one chart".into(),
            ));
        }
        let n = chart.dim();
        if n < 3 {
            return Err(Error::InvalidField(format!("dimension {n} < 3")));
        }
        for node in 0..chart.len() {
            let minors = leading_minors(&g.matrix(node), n);
            if minors.iter().any(|m| *m <= 0.0) {
                return Err(Error::NotPositiveDefinite { node });
            }
            let det = minors[n - 1];
            if det < DEGENERATE_DET {
                return Err(Error::DegenerateMetric { node, det });
            }
        }
        Ok(Self {
            n,
            g,
            p,
            h,
            conventions,
        })
    }

    pub fn chart(&self) -> &Arc<Chart> {
        self.g.chart()
    }

    pub fn with_conventions(mut self, conventions: Conventions) -> Self {
        self.conventions = conventions;
        self
    }

    pub fn with_h(mut self, h: ScalarField) -> Result<Self> {
        if h.chart() != self.chart() {
            return Err(Error::InvalidField("h lives on another chart".into()));
        }
        self.h = h;
        Ok(self)
    }

    /// Christoffel symbols `Γ^k_ij` at a node, indexed `[k][i][j]`.
    pub fn christoffel(&self, node: usize) -> Result<crate::linalg::Rank3<f64>> {
        let jet = MetricJet::at(&self.g, node)?;
        Ok(jet.christoffel())
    }

    pub fn geometry(&self) -> Result<AmbientGeometry> {
        AmbientGeometry::compute(self)
    }

    pub fn scalar_curvature(&self) -> Result<ScalarField> {
        self.geometry()?.scalar_field(|p| p.scalar)
    }

    pub fn energy_density(&self) -> Result<ScalarField> {
        self.geometry()?.scalar_field(|p| p.mu)
    }

    pub fn momentum_density(&self) -> Result<CovectorField> {
        let geo = self.geometry()?;
        let d = self.n;
        let mut v = Vec::with_capacity(self.chart().len() * d);
        for node in 0..self.chart().len() {
            v.extend_from_slice(&geo.point(node).j[..d]);
        }
        CovectorField::new(self.chart().clone(), v)
    }

    pub fn modified_dec_margin(&self) -> Result<ScalarField> {
        self.geometry()?.scalar_field(|p| p.dec_margin)
    }
}

/// Scalar curvature of a bare metric field (any dimension ≥ 2).
pub fn metric_scalar_curvature(g: &SymTensorField) -> Result<ScalarField> {
    let chart = g.chart().clone();
    let values = crate::par::try_map_nodes(chart.len(), |node| {
        let jet = MetricJet::at(g, node)?;
        Ok(jet.ricci_and_scalar().1)
    })?;
    ScalarField::new(chart, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tensor_storage_is_symmetric_by_construction() {
        let chart = Arc::new(Chart::periodic_box(&[1.0; 3], &[5; 3]).unwrap());
        let t = SymTensorField::from_fn(chart, |n| {
            let mut m = [[0.0; 4]; 4];
            for i in 0..3 {
                for j in 0..3 {
                    m[i][j] = (n + 10 * i + j) as f64;
                }
            }
            m
        })
        .unwrap();
        assert_eq!(t.get(7, 0, 2), t.get(7, 2, 0));
        assert_eq!(t.get(7, 2, 0), 9.0);
    }

    #[test]
    fn rejects_non_finite_and_wrong_length() {
        let chart = Arc::new(Chart::periodic_box(&[1.0; 3], &[5; 3]).unwrap());
        assert!(ScalarField::new(chart.clone(), vec![0.0; 3]).is_err());
        let mut v = vec![0.0; chart.len()];
        v[4] = f64::NAN;
        assert!(ScalarField::new(chart, v).is_err());
    }

    #[test]
    fn indefinite_metric_is_rejected() {
        let chart = Arc::new(Chart::periodic_box(&[1.0; 3], &[5; 3]).unwrap());
        let g = SymTensorField::from_fn(chart.clone(), |_| {
            let mut m = [[0.0; 4]; 4];
            m[0][0] = 1.0;
            m[1][1] = -1.0;
            m[2][2] = 1.0;
            m
        })
        .unwrap();
        let p = SymTensorField::zeros(chart.clone());
        let h = ScalarField::constant(chart, 0.0).unwrap();
        assert!(matches!(
            InitialDataSet::new(g, p, h, Conventions::default()),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn tiny_determinant_is_degenerate() {
        let chart = Arc::new(Chart::periodic_box(&[1.0; 3], &[5; 3]).unwrap());
        let g = SymTensorField::from_fn(chart.clone(), |_| {
            let mut m = [[0.0; 4]; 4];
            m[0][0] = 1e-5;
            m[1][1] = 1e-5;
            m[2][2] = 1e-5;
            m
        })
        .unwrap();
        let p = SymTensorField::zeros(chart.clone());
        let h = ScalarField::constant(chart, 0.0).unwrap();
        assert!(matches!(
            InitialDataSet::new(g, p, h, Conventions::default()),
            Err(Error::DegenerateMetric { .. })
        ));
    }
}
