//! Closed-form data sets and their JSON descriptions.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Conventions, InitialDataSet, ScalarField, SymTensorField};
use crate::chart::{Chart, ChartSpec, Topology};
use crate::error::{Error, Result};
use crate::linalg::{sym_len, zeros2, SquareMat, MAX_DIM};

/// Radial profile of the prescription `h`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "kebab-case", deny_unknown_fields)]
pub enum HProfile {
    Constant {
        value: f64,
    },
    /// `h = a/|x| + b`
    InverseRadius {
        a: f64,
        b: f64,
    },
}

/// `h` given as a bare number or as a profile object.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HSpec {
    Value(f64),
    Profile(HProfile),
}

impl Default for HSpec {
    fn default() -> Self {
        Self::Value(0.0)
    }
}

impl HSpec {
    pub fn profile(&self) -> HProfile {
        match *self {
            Self::Value(value) => HProfile::Constant { value },
            Self::Profile(p) => p,
        }
    }

    pub fn eval(&self, radius: f64) -> f64 {
        match self.profile() {
            HProfile::Constant { value } => value,
            HProfile::InverseRadius { a, b } => a / radius + b,
        }
    }

    /// `dh/dr`
    pub fn radial_derivative(&self, radius: f64) -> f64 {
        match self.profile() {
            HProfile::Constant { .. } => 0.0,
            HProfile::InverseRadius { a, .. } => -a / (radius * radius),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchwarzschildCoordinates {
    /// `g = ψ⁴ δ` with `ψ = 1 + m/(2ρ)`; the horizon is the sphere `ρ = m/2`.
    #[default]
    Isotropic,
    /// `g = dr²/(1 − 2m/r) + r² dΩ²`, valid only outside `r = 2m`.
    Areal,
}

/// Data set without its chart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DataSpec {
    Minkowski {
        #[serde(default)]
        h: HSpec,
    },
    Schwarzschild {
        mass: f64,
        #[serde(default)]
        coordinates: SchwarzschildCoordinates,
        #[serde(default)]
        h: HSpec,
    },
    /// Flat metric with `p = c g`.
    ConstantTrace {
        c: f64,
        #[serde(default)]
        h: HSpec,
    },
    /// Flat data plus seeded perturbations of `g`, `p` and `h`: quadratic
    /// polynomials in `x / length_scale` on shells, first-harmonic
    /// trigonometric polynomials on periodic boxes.
    PolynomialPerturbation {
        seed: u64,
        amplitude: f64,
        length_scale: f64,
        #[serde(default)]
        c: f64,
        #[serde(default)]
        h: HSpec,
    },
    /// Explicit component tables, one row per node; symmetric tensors list
    /// their upper triangle row by row.
    Custom {
        g: Vec<Vec<f64>>,
        #[serde(default)]
        p: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        h: Option<Vec<f64>>,
    },
}

/// Data set description with its chart, as read from JSON.
#[derive(Clone, Debug, PartialEq)]
pub struct DataDescription {
    pub spec: DataSpec,
    pub chart: ChartSpec,
}

impl DataDescription {
    pub fn from_value(v: &serde_json::Value) -> Result<Self> {
        let mut obj = v
            .as_object()
            .cloned()
            .ok_or_else(|| Error::Config("data description must be a JSON object".into()))?;
        let chart = obj
            .remove("chart")
            .ok_or_else(|| Error::Config("data description lacks \"chart\"".into()))?;
        let chart: ChartSpec = serde_json::from_value(chart)?;
        let spec: DataSpec = serde_json::from_value(serde_json::Value::Object(obj))?;
        Ok(Self { spec, chart })
    }

    pub fn to_value(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(&self.spec).expect("data spec serializes");
        v.as_object_mut().expect("tagged enum is an object").insert(
            "chart".into(),
            serde_json::to_value(&self.chart).expect("chart serializes"),
        );
        v
    }

    pub fn build(&self, conventions: Conventions) -> Result<InitialDataSet> {
        let chart = Arc::new(self.chart.build()?);
        self.spec.build(chart, conventions)
    }
}

fn flat_metric(chart: &Chart, node: usize) -> SquareMat<f64> {
    pullback(
        chart.dim(),
        &chart.cartesian_jacobian(node),
        &identity(chart.dim()),
    )
}

fn check_flat(chart: &Chart) -> Result<()> {
    match chart.topology() {
        Topology::PeriodicBox | Topology::LatLongSphereShell => Ok(()),
        t => Err(Error::UnsupportedTopology(format!(
            "analytic presets need a box or shell chart, not {t:?}"
        ))),
    }
}

fn identity(n: usize) -> SquareMat<f64> {
    let mut m = zeros2();
    for (i, row) in m.iter_mut().enumerate().take(n) {
        row[i] = 1.0;
    }
    m
}

/// Chart components `J^i_a J^j_b T_ij` of a Cartesian tensor.
fn pullback(n: usize, jac: &[[f64; MAX_DIM]; MAX_DIM], t: &SquareMat<f64>) -> SquareMat<f64> {
    let mut out = zeros2();
    for a in 0..n {
        for b in 0..n {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s += jac[i][a] * jac[j][b] * t[i][j];
                }
            }
            out[a][b] = s;
        }
    }
    out
}

fn scale(m: &SquareMat<f64>, c: f64) -> SquareMat<f64> {
    let mut out = *m;
    for row in out.iter_mut() {
        for v in row.iter_mut() {
            *v *= c;
        }
    }
    out
}

/// Seeded random perturbation profile.
#[derive(Clone, Debug)]
struct Perturbation {
    /// Coefficients per polynomial: constant, linear, quadratic (upper triangle).
    coeffs: Vec<Vec<f64>>,
    periodic: bool,
    n: usize,
    length: f64,
    extents: Vec<f64>,
}

impl Perturbation {
    fn new(chart: &Chart, seed: u64, length: f64, count: usize) -> Self {
        let n = chart.dim();
        let periodic = chart.topology() == Topology::PeriodicBox;
        let per = if periodic {
            1 + 2 * n
        } else {
            1 + n + sym_len(n)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs = (0..count)
            .map(|_| (0..per).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        Self {
            coeffs,
            periodic,
            n,
            length,
            extents: chart.axes().iter().map(|a| a.extent).collect(),
        }
    }

    fn eval(&self, which: usize, x: &[f64; MAX_DIM]) -> f64 {
        let c = &self.coeffs[which];
        let n = self.n;
        if self.periodic {
            let mut s = c[0];
            for a in 0..n {
                let t = 2.0 * std::f64::consts::PI * x[a] / self.extents[a];
                s += c[1 + 2 * a] * t.cos() + c[2 + 2 * a] * t.sin();
            }
            s
        } else {
            let y: Vec<f64> = (0..n).map(|a| x[a] / self.length).collect();
            let mut s = c[0];
            for a in 0..n {
                s += c[1 + a] * y[a];
            }
            let mut k = 1 + n;
            for a in 0..n {
                for b in a..n {
                    s += c[k] * y[a] * y[b];
                    k += 1;
                }
            }
            s
        }
    }
}

impl DataSpec {
    pub fn h_spec(&self) -> Option<HSpec> {
        match self {
            Self::Minkowski { h }
            | Self::Schwarzschild { h, .. }
            | Self::ConstantTrace { h, .. }
            | Self::PolynomialPerturbation { h, .. } => Some(*h),
            Self::Custom { .. } => None,
        }
    }

    pub fn build(&self, chart: Arc<Chart>, conventions: Conventions) -> Result<InitialDataSet> {
        let n = chart.dim();
        let h_field =
            |h: &HSpec| ScalarField::from_fn(chart.clone(), |node| h.eval(chart.radius(node)));
        let (g, p, h) = match self {
            Self::Minkowski { h } => {
                check_flat(&chart)?;
                let g = SymTensorField::from_fn(chart.clone(), |node| flat_metric(&chart, node))?;
                (g, SymTensorField::zeros(chart.clone()), h_field(h)?)
            }
            Self::ConstantTrace { c, h } => {
                check_flat(&chart)?;
                let g = SymTensorField::from_fn(chart.clone(), |node| flat_metric(&chart, node))?;
                let p = SymTensorField::from_fn(chart.clone(), |node| scale(&g.matrix(node), *c))?;
                (g, p, h_field(h)?)
            }
            Self::Schwarzschild {
                mass,
                coordinates,
                h,
            } => {
                let m = *mass;
                if !(m > 0.0) {
                    return Err(Error::Config("mass must be positive".into()));
                }
                if chart.topology() != Topology::LatLongSphereShell {
                    return Err(Error::UnsupportedTopology(
                        "Schwarzschild data need a shell chart".into(),
                    ));
                }
                let g = match coordinates {
                    SchwarzschildCoordinates::Isotropic => {
                        for node in 0..chart.len() {
                            if !(chart.radius(node) > 0.0) {
                                return Err(Error::Domain(format!(
                                    "node {node} sits at the isotropic origin"
                                )));
                            }
                        }
                        SymTensorField::from_fn(chart.clone(), |node| {
                            let psi = 1.0 + m / (2.0 * chart.radius(node));
                            scale(&flat_metric(&chart, node), psi.powi(4))
                        })?
                    }
                    SchwarzschildCoordinates::Areal => {
                        if chart.topology() != Topology::LatLongSphereShell || n != 3 {
                            return Err(Error::UnsupportedTopology(
                                "areal Schwarzschild needs a 3D shell chart".into(),
                            ));
                        }
                        if chart.axis(0).start <= 2.0 * m {
                            return Err(Error::Domain(
                                "areal Schwarzschild chart must stay outside r = 2m".into(),
                            ));
                        }
                        SymTensorField::from_fn(chart.clone(), |node| {
                            let mut g = flat_metric(&chart, node);
                            g[0][0] = 1.0 / (1.0 - 2.0 * m / chart.radius(node));
                            g
                        })?
                    }
                };
                (g, SymTensorField::zeros(chart.clone()), h_field(h)?)
            }
            Self::PolynomialPerturbation {
                seed,
                amplitude,
                length_scale,
                c,
                h,
            } => {
                check_flat(&chart)?;
                if !(*length_scale > 0.0) {
                    return Err(Error::Config("length_scale must be positive".into()));
                }
                let k = sym_len(n);
                let pert = Perturbation::new(&chart, *seed, *length_scale, 2 * k + 1);
                let eps = *amplitude;
                let cart_tensor = |offset: usize, x: &[f64; MAX_DIM], base: f64| {
                    let mut t = zeros2();
                    let mut idx = 0;
                    for i in 0..n {
                        for j in i..n {
                            let v =
                                eps * pert.eval(offset + idx, x) + if i == j { base } else { 0.0 };
                            t[i][j] = v;
                            t[j][i] = v;
                            idx += 1;
                        }
                    }
                    t
                };
                let g = SymTensorField::from_fn(chart.clone(), |node| {
                    let x = chart.cartesian(node);
                    pullback(n, &chart.cartesian_jacobian(node), &cart_tensor(0, &x, 1.0))
                })?;
                let p = SymTensorField::from_fn(chart.clone(), |node| {
                    let x = chart.cartesian(node);
                    pullback(n, &chart.cartesian_jacobian(node), &cart_tensor(k, &x, *c))
                })?;
                let hf = ScalarField::from_fn(chart.clone(), |node| {
                    h.eval(chart.radius(node)) + eps * pert.eval(2 * k, &chart.cartesian(node))
                })?;
                (g, p, hf)
            }
            Self::Custom { g, p, h } => {
                let k = sym_len(n);
                let flatten = |rows: &Vec<Vec<f64>>, what: &str| -> Result<Vec<f64>> {
                    if rows.len() != chart.len() || rows.iter().any(|r| r.len() != k) {
                        return Err(Error::InvalidField(format!(
                            "custom {what} needs {} rows of {k} components",
                            chart.len()
                        )));
                    }
                    Ok(rows.iter().flatten().copied().collect())
                };
                let g = SymTensorField::new(chart.clone(), flatten(g, "g")?)?;
                let p = match p {
                    Some(p) => SymTensorField::new(chart.clone(), flatten(p, "p")?)?,
                    None => SymTensorField::zeros(chart.clone()),
                };
                let h = match h {
                    Some(h) => ScalarField::new(chart.clone(), h.clone())?,
                    None => ScalarField::constant(chart.clone(), 0.0)?,
                };
                (g, p, h)
            }
        };
        InitialDataSet::new(g, p, h, conventions)
    }
}
