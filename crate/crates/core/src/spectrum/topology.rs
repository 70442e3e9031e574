//! Conformal positivity and rigidity report for a stable surface.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::conformal::{conformal_scalar_curvature, laplacian_and_gradient, SurfaceMetric};
use super::eigen::{principal_eigenpair_of, EigenOptions, SpectrumResult};
use super::operator::{symmetric_potential, trace_p, StabilityOperator};
use crate::error::{Error, Result};
use crate::fields::io::write_csv;
use crate::fields::InitialDataSet;
use crate::linalg::max_abs;
use crate::surfaces::SurfaceGeometry;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum YamabeVerdict {
    PositiveType,
    BorderlineRigidity,
    Inconclusive,
}

/// Quantities that must all vanish in the equality case.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RigidityMargins {
    /// First eigenvalue of the drift-free operator.
    pub lambda: f64,
    /// `‖χ⁰‖_∞`
    pub chi0: f64,
    /// `‖2(μ + J(ν)) + (n/(n−1))h² − 2h tr p + 2ν(h)‖_∞`
    pub equality: f64,
    /// `max f − min f` with `max f = 1`.
    pub oscillation: f64,
}

impl RigidityMargins {
    pub fn all_below(&self, threshold: f64) -> bool {
        self.lambda.abs() < threshold
            && self.chi0 < threshold
            && self.equality < threshold
            && self.oscillation < threshold
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopologyReport {
    pub verdict: YamabeVerdict,
    pub s_tilde_min: f64,
    pub s_tilde_max: f64,
    pub margins: RigidityMargins,
    /// Pointwise gap between the two evaluations of `S̃` plus the eigen residual.
    pub truncation: f64,
    /// Ten times the truncation, plus a floor of `1e-10`.
    pub threshold: f64,
    /// `λ₁` of the full stability operator.
    pub stability_lambda: f64,
    /// `‖Ric_Σ‖_∞`
    pub ricci_norm: f64,
    pub eigen_residual: f64,
    pub s_tilde: Vec<f64>,
    /// Eigenfunction used for the conformal factor.
    pub eigenfunction: Vec<f64>,
}

impl TopologyReport {
    /// Node coordinates followed by `f` and `S̃`.
    pub fn write_csv<W: Write>(&self, out: W, geom: &SurfaceGeometry) -> Result<()> {
        write_csv(
            out,
            &geom.base,
            &[("f", &self.eigenfunction), ("s_tilde", &self.s_tilde)],
        )
    }
}

/// `2(μ + J(ν)) + (n/(n−1))h² − 2h tr p + 2ν(h)` per node.
pub fn equality_quantity(geom: &SurfaceGeometry, data: &InitialDataSet) -> Vec<f64> {
    let n = data.n as f64;
    let conv = data.conventions.trace;
    geom.field(|p| {
        2.0 * (p.mu + p.j_nu) + n / (n - 1.0) * p.h * p.h - 2.0 * p.h * trace_p(p, conv)
            + 2.0 * p.nu_h
    })
}

/// Build `S̃` from the principal eigenfunction of `−Δ + Q − ½(h² − 2h tr p + 2ν(h))`
/// and classify the surface.
///
/// `S̃` is evaluated twice: directly from the conformal formula, and from the
/// identity `f^{−2/(n−2)}[2λ + E + |χ⁰|² + ((n−1)/(n−2))|∇f|²/f²]`, which holds
/// when `θ = h`. Their gap sets the truncation scale of the run.
pub fn topology_report(
    geom: &SurfaceGeometry,
    data: &InitialDataSet,
    spectrum: &SpectrumResult,
) -> Result<TopologyReport> {
    if !spectrum.positive {
        return Err(Error::KreinRutmanViolation {
            min: spectrum.min_f(),
            max: spectrum.max_f(),
        });
    }
    let op = StabilityOperator::assemble(geom, data)?;
    let sym = op.with_potential(&symmetric_potential(geom, data.conventions.trace));
    let eig = principal_eigenpair_of(&sym, &EigenOptions::default())?;
    if !eig.positive {
        return Err(Error::KreinRutmanViolation {
            min: eig.min_f(),
            max: eig.max_f(),
        });
    }
    let f = &eig.eigenfunction;
    let n = data.n;
    let metric = SurfaceMetric::from_geometry(geom)?;
    let s_tilde = conformal_scalar_curvature(&metric, f, n)?.into_values();

    let nf = n as f64;
    let e = equality_quantity(geom, data);
    let (_, grad2) = laplacian_and_gradient(&metric.metric, f)?;
    let identity: Vec<f64> = (0..f.len())
        .map(|i| {
            let p = &geom.points[i];
            let bracket = 2.0 * eig.lambda
                + e[i]
                + p.chi0_norm2
                + (nf - 1.0) / (nf - 2.0) * grad2[i] / (f[i] * f[i]);
            f[i].powf(-2.0 / (nf - 2.0)) * bracket
        })
        .collect();
    let gap = s_tilde
        .iter()
        .zip(&identity)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let truncation = gap + eig.residual;
    let threshold = 10.0 * truncation + 1e-10;

    let s_tilde_min = s_tilde.iter().copied().fold(f64::INFINITY, f64::min);
    let s_tilde_max = s_tilde.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let margins = RigidityMargins {
        lambda: eig.lambda,
        chi0: geom
            .points
            .iter()
            .map(|p| p.chi0_norm2.max(0.0).sqrt())
            .fold(0.0, f64::max),
        equality: max_abs(&e),
        oscillation: eig.max_f() - eig.min_f(),
    };
    let verdict = if s_tilde_min > threshold {
        YamabeVerdict::PositiveType
    } else if margins.all_below(threshold) {
        YamabeVerdict::BorderlineRigidity
    } else {
        YamabeVerdict::Inconclusive
    };
    Ok(TopologyReport {
        verdict,
        s_tilde_min,
        s_tilde_max,
        margins,
        truncation,
        threshold,
        stability_lambda: spectrum.lambda,
        ricci_norm: geom.points.iter().map(|p| p.ricci_norm).fold(0.0, f64::max),
        eigen_residual: eig.residual,
        s_tilde,
        eigenfunction: eig.eigenfunction,
    })
}
