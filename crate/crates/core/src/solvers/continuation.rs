//! τ-continuation of the Jang equation and blow-up locus extraction.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::jang::{jang_solve_with, JangConfig, JangState};
use crate::chart::{AxisKind, Topology};
use crate::error::Result;
use crate::fields::InitialDataSet;
use crate::surfaces::{induced_geometry, Orientation, Surface};

/// Graph fitted through the steep set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocusFit {
    pub surface: Surface,
    /// Mean coordinate height (radius on shells).
    pub mean_height: f64,
    /// `max − min` of the fitted heights.
    pub spread: f64,
    /// Fraction of base columns whose steepest node is in the steep set.
    pub coverage: f64,
    /// Areal radius of the fitted surface on three-dimensional shells.
    pub areal_radius: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowUpLocus {
    pub nodes: Vec<usize>,
    /// Present when the steep set is shell-like.
    pub fit: Option<LocusFit>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum JangVerdict {
    ConvergedLimit,
    BlowUp { tau: f64, locus: BlowUpLocus },
}

#[derive(Clone, Debug)]
pub struct Continuation {
    pub states: Vec<JangState>,
    /// Verdict of the last completed state, absent if none completed.
    pub verdict: Option<JangVerdict>,
    /// Failure that ended the schedule early.
    pub error: Option<String>,
}

/// Minimum coverage for a steep set to count as a shell.
const SHELL_COVERAGE: f64 = 0.9;
/// Maximum fitted height spread, relative to the height-axis extent.
const SHELL_SPREAD: f64 = 0.1;

/// Fit a graph through the steepest node of every base column.
pub fn fit_locus(data: &InitialDataSet, state: &JangState) -> Option<LocusFit> {
    let chart = data.chart();
    let (base, axis) = chart.graph_split().ok()?;
    let ax = *chart.axis(axis);
    let mut steep = vec![false; chart.len()];
    for &k in &state.steep_set {
        steep[k] = true;
    }
    let mut covered = 0usize;
    let heights: Vec<f64> = (0..base.len())
        .map(|b| {
            let col: Vec<f64> = (0..ax.count)
                .map(|k| state.gradient[chart.graph_node(&base, b, axis, k)])
                .collect();
            let k = (0..ax.count).fold(0, |best, k| if col[k] > col[best] { k } else { best });
            if steep[chart.graph_node(&base, b, axis, k)] {
                covered += 1;
            }
            let nb = |j: isize| -> Option<f64> {
                let i = k as isize + j;
                match ax.kind {
                    AxisKind::Periodic => Some(col[i.rem_euclid(ax.count as isize) as usize]),
                    _ if i < 0 || i >= ax.count as isize => None,
                    _ => Some(col[i as usize]),
                }
            };
            let offset = match (nb(-1), nb(1)) {
                (Some(a), Some(c)) => {
                    let den = a - 2.0 * col[k] + c;
                    if den < 0.0 {
                        (0.5 * (a - c) / den).clamp(-0.5, 0.5)
                    } else {
                        0.0
                    }
                }
                _ => 0.0,
            };
            ax.coord(k) + offset * ax.spacing()
        })
        .collect();
    let coverage = covered as f64 / base.len() as f64;
    let lo = heights.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = heights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if coverage < SHELL_COVERAGE || hi - lo > SHELL_SPREAD * ax.extent {
        return None;
    }
    let mean_height = heights.iter().sum::<f64>() / heights.len() as f64;
    let surface = Surface::graph(&base, heights, Orientation::Positive);
    let areal_radius = (chart.topology() == Topology::LatLongSphereShell && data.n == 3)
        .then(|| {
            induced_geometry(&surface, data)
                .ok()
                .map(|g| g.areal_radius())
        })
        .flatten();
    Some(LocusFit {
        surface,
        mean_height,
        spread: hi - lo,
        coverage,
        areal_radius,
    })
}

fn verdict(data: &InitialDataSet, state: &JangState) -> JangVerdict {
    if state.blow_up {
        JangVerdict::BlowUp {
            tau: state.tau,
            locus: BlowUpLocus {
                nodes: state.steep_set.clone(),
                fit: fit_locus(data, state),
            },
        }
    } else {
        JangVerdict::ConvergedLimit
    }
}

/// Solve along the τ schedule, warm-starting each solve from the previous
/// one, until the schedule ends or a blow-up threshold is crossed.
pub fn tau_continuation(data: &InitialDataSet, cfg: &JangConfig) -> Result<Continuation> {
    cfg.validate()?;
    let ambient = Arc::new(data.geometry()?);
    let mut states: Vec<JangState> = Vec::new();
    let mut error = None;
    for &tau in &cfg.taus {
        match jang_solve_with(
            data,
            ambient.clone(),
            tau,
            cfg.boundary,
            cfg,
            states.last().map(|s| &s.u),
        ) {
            Ok(state) => {
                let stop = state.blow_up;
                states.push(state);
                if stop {
                    break;
                }
            }
            Err(e) => {
                error = Some(format!("τ = {tau}: {e}"));
                break;
            }
        }
    }
    let verdict = states.last().map(|s| verdict(data, s));
    Ok(Continuation {
        states,
        verdict,
        error,
    })
}
