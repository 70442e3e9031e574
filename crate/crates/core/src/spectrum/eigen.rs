//! Principal eigenpair by shifted inverse iteration.

use serde::{Deserialize, Serialize};

use super::operator::StabilityOperator;
use crate::error::{Error, Result};
use crate::linalg::{max_abs, CsrMatrix, Factorization};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EigenOptions {
    /// Target for `‖L f − λ f‖_∞` with `max f = 1`.
    pub tolerance: f64,
    /// Largest residual still accepted once the iteration stagnates.
    pub accept: f64,
    pub max_iterations: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-11,
            accept: 1e-8,
            max_iterations: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub lambda: f64,
    /// Eigenfunction with `max f = 1`.
    pub eigenfunction: Vec<f64>,
    /// `‖L f − λ f‖_∞`
    pub residual: f64,
    /// `min f > 0`
    pub positive: bool,
    /// Imaginary part of the Ritz value nearest `λ` on `span{f, L f}`.
    pub imaginary_bound: f64,
    pub iterations: usize,
    /// Gershgorin lower bound on the real parts of the spectrum.
    pub gershgorin_bound: f64,
}

impl SpectrumResult {
    pub fn min_f(&self) -> f64 {
        self.eigenfunction
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_f(&self) -> f64 {
        self.eigenfunction
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StabilityVerdict {
    Stable,
    Unstable,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `min_i (R_i − Σ_{j≠i} |a_ij|)`
pub fn gershgorin_lower_bound(a: &CsrMatrix) -> f64 {
    (0..a.nrows)
        .map(|i| {
            let mut diag = 0.0;
            let mut off = 0.0;
            for (k, v) in a.row(i) {
                if k == i {
                    diag += v;
                } else {
                    off += v.abs();
                }
            }
            diag - off
        })
        .fold(f64::INFINITY, f64::min)
}

/// Collatz–Wielandt bounds `min (Ax)_i/x_i`, `max (Ax)_i/x_i` for `x > 0`.
fn collatz_wielandt(ax: &[f64], x: &[f64]) -> Option<(f64, f64)> {
    if x.iter().any(|v| *v <= 0.0) {
        return None;
    }
    let q = ax.iter().zip(x).map(|(a, b)| a / b);
    Some(q.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    }))
}

/// Imaginary part of the Ritz value nearest `lambda` on `span{f, A f}`.
fn ritz_imaginary(a: &CsrMatrix, f: &[f64], lambda: f64) -> f64 {
    let nf = dot(f, f).sqrt();
    let q1: Vec<f64> = f.iter().map(|x| x / nf).collect();
    let aq1 = a.mul_vec(&q1);
    let h11 = dot(&q1, &aq1);
    let v: Vec<f64> = aq1.iter().zip(&q1).map(|(x, y)| x - h11 * y).collect();
    let nv = dot(&v, &v).sqrt();
    if nv <= 1e-14 * h11.abs().max(1.0) {
        return 0.0;
    }
    let q2: Vec<f64> = v.iter().map(|x| x / nv).collect();
    let aq2 = a.mul_vec(&q2);
    let (h12, h21, h22) = (dot(&q1, &aq2), dot(&q2, &aq1), dot(&q2, &aq2));
    let tr = h11 + h22;
    let disc = (h11 - h22).powi(2) + 4.0 * h12 * h21;
    if disc >= 0.0 {
        return 0.0;
    }
    // complex pair: only relevant if it sits at λ
    let re = 0.5 * tr;
    let im = 0.5 * (-disc).sqrt();
    if (re - lambda).abs() <= im + 1e-8 * lambda.abs().max(1.0) {
        im
    } else {
        0.0
    }
}

/// Eigenpair of minimal real part of a sparse matrix.
///
/// Inverse iteration with a shift kept below the eigenvalue: the first shift
/// is the smallest Collatz–Wielandt quotient of the constant vector, and
/// later shifts follow the quotient bounds of the positive iterates.
pub fn principal_eigenpair_of(a: &CsrMatrix, opts: &EigenOptions) -> Result<SpectrumResult> {
    let n = a.nrows;
    if n == 0 {
        return Err(Error::Domain("empty operator".into()));
    }
    let gershgorin = gershgorin_lower_bound(a);
    let mut x = vec![1.0; n];
    let ax = a.mul_vec(&x);
    let (lo, hi) = collatz_wielandt(&ax, &x).expect("constant vector is positive");
    let gap = |lo: f64, hi: f64| (0.1 * (hi - lo)).max(1e-9 * (1.0 + lo.abs()));
    let mut shift = lo - gap(lo, hi).max(1e-3 * (1.0 + lo.abs()));
    let mut best: Option<(f64, f64, Vec<f64>)> = None;
    let mut stalled = 0;
    for it in 1..=opts.max_iterations {
        let fact = Factorization::new(&a.shifted(-shift))?;
        let mut y = fact.solve(&x)?;
        if y.iter().any(|v| !v.is_finite()) {
            shift -= gap(shift, shift + 1.0);
            continue;
        }
        let sum: f64 = y.iter().sum();
        let m = max_abs(&y);
        if m == 0.0 {
            return Err(Error::NonConvergence {
                solver: "eigen",
                reason: "inverse iteration collapsed".into(),
                residual: f64::INFINITY,
                best: x,
            });
        }
        let s = if sum < 0.0 { -1.0 / m } else { 1.0 / m };
        for v in &mut y {
            *v *= s;
        }
        let ay = a.mul_vec(&y);
        let lambda = dot(&y, &ay) / dot(&y, &y);
        let residual = max_abs(
            &ay.iter()
                .zip(&y)
                .map(|(p, q)| p - lambda * q)
                .collect::<Vec<_>>(),
        ) / max_abs(&y);
        if let Some((l, h)) = collatz_wielandt(&ay, &y) {
            let next = l - gap(l, h);
            if next > shift {
                shift = next;
            }
        }
        let improved = best.as_ref().is_none_or(|b| residual < 0.5 * b.1);
        stalled = if improved { 0 } else { stalled + 1 };
        if best.as_ref().is_none_or(|b| residual < b.1) {
            best = Some((lambda, residual, y.clone()));
        }
        x = y;
        let done = residual < opts.tolerance * (1.0 + lambda.abs());
        if done || stalled >= 8 || it == opts.max_iterations {
            let (lambda, residual, f) = best.take().expect("at least one iterate");
            if residual > opts.accept * (1.0 + lambda.abs()) {
                return Err(Error::NonConvergence {
                    solver: "eigen",
                    reason: format!("residual stalled after {it} iterations"),
                    residual,
                    best: f,
                });
            }
            let imaginary_bound = ritz_imaginary(a, &f, lambda);
            let min = f.iter().copied().fold(f64::INFINITY, f64::min);
            return Ok(SpectrumResult {
                lambda,
                positive: min > 0.0,
                eigenfunction: f,
                residual,
                imaginary_bound,
                iterations: it,
                gershgorin_bound: gershgorin,
            });
        }
    }
    unreachable!("loop returns on its last iteration")
}

/// Principal eigenpair of `L`; a sign-changing eigenfunction is an error.
pub fn principal_eigenpair(op: &StabilityOperator) -> Result<SpectrumResult> {
    principal_eigenpair_with(op, &EigenOptions::default())
}

pub fn principal_eigenpair_with(
    op: &StabilityOperator,
    opts: &EigenOptions,
) -> Result<SpectrumResult> {
    let r = principal_eigenpair_of(&op.matrix, opts)?;
    if !r.positive {
        return Err(Error::KreinRutmanViolation {
            min: r.min_f(),
            max: r.max_f(),
        });
    }
    Ok(r)
}

/// Stable iff `λ₁ ≥ −tol`; the default tolerance is ten times the residual.
pub fn stability_verdict(result: &SpectrumResult, tol: Option<f64>) -> StabilityVerdict {
    let tol = tol.unwrap_or(10.0 * result.residual);
    if result.lambda >= -tol {
        StabilityVerdict::Stable
    } else {
        StabilityVerdict::Unstable
    }
}
