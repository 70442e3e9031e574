//! Damped Newton iteration with step halving.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{max_abs, CsrMatrix, Factorization};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewtonOptions {
    /// Max-norm residual tolerance.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Smallest damping factor tried before giving up.
    pub min_damping: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 50,
            min_damping: 2f64.powi(-20),
        }
    }
}

impl NewtonOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0)
            || self.max_iterations == 0
            || !(self.min_damping > 0.0 && self.min_damping <= 1.0)
        {
            return Err(Error::Config(
                "Newton tolerances must be positive and min_damping in (0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// One accepted Newton step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewtonStep {
    pub iteration: usize,
    pub residual: f64,
    pub damping: f64,
}

#[derive(Clone, Debug)]
pub struct NewtonOutcome {
    pub x: Vec<f64>,
    pub residual: f64,
    pub history: Vec<NewtonStep>,
}

/// Minimize the max-norm of `residual` by damped Newton steps.
///
/// Each step starts at full length and is halved until the residual norm
/// strictly decreases. Reaching `min_damping`, the iteration cap, or a
/// vanishing step without convergence is a nonconvergence error carrying the
/// best iterate.
pub fn damped_newton(
    solver: &'static str,
    x0: Vec<f64>,
    opts: &NewtonOptions,
    residual: impl Fn(&[f64]) -> Result<Vec<f64>>,
    jacobian: impl Fn(&[f64]) -> Result<CsrMatrix>,
    mut on_step: impl FnMut(&NewtonStep),
) -> Result<NewtonOutcome> {
    opts.validate()?;
    let mut x = x0;
    let mut r = residual(&x)?;
    let mut norm = max_abs(&r);
    let mut history = vec![NewtonStep {
        iteration: 0,
        residual: norm,
        damping: 0.0,
    }];
    on_step(&history[0]);
    let fail = |reason: String, x: Vec<f64>, norm: f64| Error::NonConvergence {
        solver,
        reason,
        residual: norm,
        best: x,
    };
    for it in 1..=opts.max_iterations {
        if norm < opts.tolerance {
            break;
        }
        let jac = jacobian(&x)?;
        let dx = Factorization::new(&jac)?.solve(&r)?;
        if max_abs(&dx) < 1e-14 * (1.0 + max_abs(&x)) {
            return Err(fail(
                "Newton step vanished before convergence".into(),
                x,
                norm,
            ));
        }
        let mut damping = 1.0;
        let mut last_err: Option<Error> = None;
        loop {
            let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a - damping * b).collect();
            match residual(&trial) {
                Ok(rt) => {
                    let nt = max_abs(&rt);
                    if nt < norm {
                        x = trial;
                        r = rt;
                        norm = nt;
                        break;
                    }
                }
                Err(e) => last_err = Some(e),
            }
            damping *= 0.5;
            if damping < opts.min_damping {
                return Err(match last_err {
                    Some(e @ Error::OutOfChart { .. }) => e,
                    _ => fail(
                        format!("damping fell below {:e}", opts.min_damping),
                        x,
                        norm,
                    ),
                });
            }
        }
        let step = NewtonStep {
            iteration: it,
            residual: norm,
            damping,
        };
        on_step(&step);
        history.push(step);
    }
    if norm < opts.tolerance {
        Ok(NewtonOutcome {
            x,
            residual: norm,
            history,
        })
    } else {
        Err(fail(
            format!("no convergence in {} iterations", opts.max_iterations),
            x,
            norm,
        ))
    }
}
