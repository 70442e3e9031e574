//! The four pipeline stages.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use pnex::fields::io::write_csv;
use pnex::solvers::{pne_graph_solve, tau_continuation, GraphSolution, JangVerdict, NewtonStep};
use pnex::spectrum::{principal_eigenpair_with, stability_verdict, topology_report, SpectrumResult, StabilityOperator, StabilityVerdict, YamabeVerdict};
use pnex::spherical::{find_pne_radii, theta_profile, SphericalData, SphericalModel};
use pnex::surfaces::io::write_geometry_csv;
use pnex::surfaces::{barrier_margins, induced_geometry, Orientation, Surface, SurfaceGeometry};
use pnex::{InitialDataSet, Topology};
use serde::Serialize;
use serde_json::json;

use crate::config::{Method, RunConfig};
use crate::output::Output;

/// Every verdict a command can reach, each with its own exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    DecPass,
    DecFail,
    Found,
    NotFound,
    Stable,
    Unstable,
    PositiveType,
    BorderlineRigidity,
    Inconclusive,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Self::DecPass | Self::Found | Self::Stable | Self::PositiveType => 0,
            Self::DecFail => 3,
            Self::NotFound => 4,
            Self::Unstable => 5,
            Self::BorderlineRigidity => 6,
            Self::Inconclusive => 7,
        }
    }
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)))
}

pub fn dec_check(cfg: &RunConfig, out: &mut Output) -> Result<Outcome> {
    let data = cfg.build()?;
    let geo = data.geometry()?;
    let margin = geo.scalar_field(|p| p.dec_margin)?;
    let mu = geo.scalar_field(|p| p.mu)?;
    let j = geo.scalar_field(|p| p.j_norm)?;
    let (argmin, min) = margin.min();
    let pass = min >= -cfg.dec_check.tolerance;
    let chart = data.chart();
    out.json(
        "dec_check.json",
        &json!({
            "command": "dec-check",
            "pass": pass,
            "tolerance": cfg.dec_check.tolerance,
            "min_margin": min,
            "argmin": argmin,
            "argmin_coords": &chart.coords(argmin)[..chart.dim()],
            "conventions": data.conventions,
        }),
    )?;
    out.csv("dec_margin.csv", |w| {
        write_csv(w, chart, &[("margin", margin.values()), ("mu", mu.values()), ("j_norm", j.values())])
    })?;
    Ok(if pass { Outcome::DecPass } else { Outcome::DecFail })
}

#[derive(Serialize)]
struct SurfaceSummary {
    file: String,
    kind: &'static str,
    residual: f64,
    min_height: f64,
    max_height: f64,
    mean_height: f64,
    areal_radius: Option<f64>,
    iterations: usize,
}

fn log_steps(out: &mut Output, stage: &str, steps: &[NewtonStep]) -> Result<()> {
    for s in steps {
        out.log(&json!({"stage": stage, "iteration": s.iteration, "residual": s.residual, "damping": s.damping}))?;
    }
    Ok(())
}

fn areal(data: &InitialDataSet, geom: &SurfaceGeometry) -> Option<f64> {
    (data.chart().topology() == Topology::LatLongSphereShell && data.n == 3).then(|| geom.areal_radius())
}

/// Write a graph solution as `surface_<k>.json` plus its geometry CSV.
fn emit_graph(
    out: &mut Output,
    data: &InitialDataSet,
    k: usize,
    stage: &str,
    sol: &GraphSolution,
) -> Result<SurfaceSummary> {
    log_steps(out, stage, &sol.history)?;
    let file = format!("surface_{k}.json");
    out.json(&file, &sol.surface)?;
    let theta_minus_h: Vec<f64> = sol.geometry.field(|p| p.theta - p.h);
    out.csv(&format!("surface_{k}.csv"), |w| write_geometry_csv(w, &sol.geometry, &[("theta_minus_h", &theta_minus_h)]))?;
    let (lo, hi) = min_max(&sol.geometry.heights);
    Ok(SurfaceSummary {
        file,
        kind: sol.surface.kind(),
        residual: sol.residual,
        min_height: lo,
        max_height: hi,
        mean_height: sol.geometry.heights.iter().sum::<f64>() / sol.geometry.heights.len() as f64,
        areal_radius: areal(data, &sol.geometry),
        iterations: sol.history.len(),
    })
}

fn initial_surface(cfg: &RunConfig, data: &InitialDataSet) -> Result<Surface> {
    let p = &cfg.find_pne;
    if let Some(s) = &p.initial {
        return Ok(s.clone());
    }
    let (base, axis) = data.chart().graph_split()?;
    let ax = data.chart().axis(axis);
    let h = p.initial_height.unwrap_or(ax.start + 0.5 * ax.extent);
    Ok(Surface::graph(&base, vec![h; base.len()], p.orientation))
}

pub fn find_pne(cfg: &RunConfig, method: Method, out: &mut Output) -> Result<Outcome> {
    let data = cfg.build()?;
    let p = &cfg.find_pne;
    let mut surfaces = Vec::new();
    let mut extra = serde_json::Map::new();
    match method {
        Method::Spherical => {
            let desc = cfg.description()?;
            let model = SphericalModel::from_spec(&desc.spec, data.n)?;
            let chart = data.chart();
            let shell = chart.topology() == Topology::LatLongSphereShell;
            let r_min = p.spherical.r_min.or(shell.then(|| chart.axis(0).start));
            let r_max = p.spherical.r_max.or(shell.then(|| chart.axis(0).end()));
            let (Some(r_min), Some(r_max)) = (r_min, r_max) else {
                bail!("find_pne.spherical needs r_min and r_max on non-shell charts");
            };
            let sd = SphericalData::new(model, r_min, r_max, p.spherical.nodes)?;
            let profile = theta_profile(&sd, p.orientation);
            out.csv("profile.csv", |w| profile.to_csv(w))?;
            let radii = find_pne_radii(&profile);
            for (k, r) in radii.iter().enumerate() {
                let file = format!("surface_{k}.json");
                out.json(&file, &Surface::RadialProfileShell { radius: r.radius, orientation: p.orientation })?;
                surfaces.push(SurfaceSummary {
                    file,
                    kind: "radial-profile-shell",
                    residual: model.theta_minus_h(r.radius, p.orientation).abs(),
                    min_height: r.radius,
                    max_height: r.radius,
                    mean_height: r.radius,
                    areal_radius: Some(r.areal_radius),
                    iterations: 0,
                });
            }
            extra.insert("radii".into(), serde_json::to_value(&radii)?);
        }
        Method::Graph => {
            let initial = initial_surface(cfg, &data)?;
            let sol = pne_graph_solve(&data, &initial, &p.graph)?;
            surfaces.push(emit_graph(out, &data, 0, "graph", &sol)?);
        }
        Method::Jang => {
            let cont = tau_continuation(&data, &p.jang)?;
            let mut stages = Vec::new();
            for s in &cont.states {
                log_steps(out, &format!("jang tau={}", s.tau), &s.history)?;
                stages.push(json!({
                    "tau": s.tau,
                    "converged": s.converged,
                    "blow_up": s.blow_up,
                    "sup_abs": s.sup_abs(),
                    "max_gradient": s.max_gradient(),
                    "steep_nodes": s.steep_set.len(),
                    "residual": s.residual(),
                    "iterations": s.history.len(),
                }));
            }
            if let Some(last) = cont.states.last() {
                out.csv("jang.csv", |w| write_csv(w, data.chart(), &[("u", last.u.values()), ("gradient", &last.gradient)]))?;
            }
            extra.insert("stages".into(), json!(stages));
            extra.insert("error".into(), json!(cont.error));
            if cont.states.is_empty() {
                bail!("Jang continuation failed at the first τ: {}", cont.error.unwrap_or_default());
            }
            match &cont.verdict {
                Some(JangVerdict::BlowUp { tau, locus }) => {
                    extra.insert("verdict".into(), json!({"verdict": "blow-up", "tau": tau, "steep_nodes": locus.nodes.len()}));
                    if let Some(fit) = &locus.fit {
                        extra.insert(
                            "locus".into(),
                            json!({
                                "mean_height": fit.mean_height,
                                "spread": fit.spread,
                                "coverage": fit.coverage,
                                "areal_radius": fit.areal_radius,
                            }),
                        );
                        let surface = fit.surface.clone().with_orientation(p.orientation);
                        if p.refine {
                            let sol = pne_graph_solve(&data, &surface, &p.graph)?;
                            surfaces.push(emit_graph(out, &data, 0, "refine", &sol)?);
                        } else {
                            let geom = induced_geometry(&surface, &data)?;
                            let sol = GraphSolution {
                                residual: geom.points.iter().map(|q| (q.theta - q.h).abs()).fold(0.0, f64::max),
                                surface,
                                geometry: geom,
                                history: Vec::new(),
                            };
                            surfaces.push(emit_graph(out, &data, 0, "locus", &sol)?);
                        }
                    }
                }
                _ => {
                    extra.insert("verdict".into(), json!({"verdict": "converged-limit"}));
                }
            }
        }
    }
    if let Some(b) = p.barrier {
        let (base, _) = data.chart().graph_split()?;
        let inner = Surface::graph(&base, vec![b.inner; base.len()], Orientation::Positive);
        let outer = Surface::graph(&base, vec![b.outer; base.len()], Orientation::Positive);
        let m = barrier_margins(&inner, &outer, &data)?;
        extra.insert(
            "barrier".into(),
            json!({"inner": b.inner, "outer": b.outer, "min_inner": m.min_inner, "min_outer": m.min_outer, "holds": m.holds}),
        );
    }
    let found = !surfaces.is_empty();
    let mut report = serde_json::Map::new();
    report.insert("command".into(), json!("find-pne"));
    report.insert("method".into(), json!(method));
    report.insert("found".into(), json!(found));
    report.insert("surfaces".into(), serde_json::to_value(&surfaces)?);
    report.extend(extra);
    out.json("find_pne.json", &report)?;
    Ok(if found { Outcome::Found } else { Outcome::NotFound })
}

pub fn load_surface(path: &Path) -> Result<Surface> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let s: Surface = serde_json::from_str(&text).with_context(|| format!("invalid surface {}", path.display()))?;
    s.validate()?;
    Ok(s)
}

struct Spectrum {
    geom: SurfaceGeometry,
    op: StabilityOperator,
    result: SpectrumResult,
    verdict: StabilityVerdict,
    tolerance: f64,
}

fn spectrum(cfg: &RunConfig, data: &InitialDataSet, surface: &Surface) -> Result<Spectrum> {
    let geom = induced_geometry(surface, data)?;
    let op = StabilityOperator::assemble(&geom, data)?;
    let result = principal_eigenpair_with(&op, &cfg.stability.eigen)?;
    let tolerance = cfg.stability.tolerance.unwrap_or(10.0 * result.residual);
    let verdict = stability_verdict(&result, Some(tolerance));
    Ok(Spectrum { geom, op, result, verdict, tolerance })
}

fn spectrum_json(s: &Spectrum) -> serde_json::Value {
    let r = &s.result;
    json!({
        "lambda": r.lambda,
        "residual": r.residual,
        "positive": r.positive,
        "min_f": r.min_f(),
        "max_f": r.max_f(),
        "imaginary_bound": r.imaginary_bound,
        "gershgorin_bound": r.gershgorin_bound,
        "iterations": r.iterations,
        "tolerance": s.tolerance,
        "verdict": s.verdict,
    })
}

pub fn stability(cfg: &RunConfig, surface: &Path, out: &mut Output) -> Result<Outcome> {
    let data = cfg.build()?;
    let surface = load_surface(surface)?;
    let s = spectrum(cfg, &data, &surface)?;
    out.log(&json!({"stage": "eigen", "iterations": s.result.iterations, "residual": s.result.residual}))?;
    let mut report = spectrum_json(&s);
    report["command"] = json!("stability");
    out.json("stability.json", &report)?;
    out.csv("eigenfunction.csv", |w| {
        write_geometry_csv(w, &s.geom, &[("f", &s.result.eigenfunction), ("c0", &s.op.c0)])
    })?;
    Ok(match s.verdict {
        StabilityVerdict::Stable => Outcome::Stable,
        StabilityVerdict::Unstable => Outcome::Unstable,
    })
}

pub fn topology(cfg: &RunConfig, surface: &Path, out: &mut Output) -> Result<Outcome> {
    let data = cfg.build()?;
    let surface = load_surface(surface)?;
    let s = spectrum(cfg, &data, &surface)?;
    out.log(&json!({"stage": "eigen", "iterations": s.result.iterations, "residual": s.result.residual}))?;
    let rep = topology_report(&s.geom, &data, &s.result)?;
    out.log(&json!({"stage": "topology", "residual": rep.eigen_residual, "truncation": rep.truncation}))?;
    out.json(
        "topology.json",
        &json!({
            "command": "topology",
            "verdict": rep.verdict,
            "s_tilde_min": rep.s_tilde_min,
            "s_tilde_max": rep.s_tilde_max,
            "margins": rep.margins,
            "truncation": rep.truncation,
            "threshold": rep.threshold,
            "ricci_norm": rep.ricci_norm,
            "eigen_residual": rep.eigen_residual,
            "stability": spectrum_json(&s),
        }),
    )?;
    out.csv("topology.csv", |w| rep.write_csv(w, &s.geom))?;
    Ok(match rep.verdict {
        YamabeVerdict::PositiveType => Outcome::PositiveType,
        YamabeVerdict::BorderlineRigidity => Outcome::BorderlineRigidity,
        YamabeVerdict::Inconclusive => Outcome::Inconclusive,
    })
}

/// Best iterate of a failed solve, if the error carries one.
pub fn iterate_dump(err: &anyhow::Error) -> Option<serde_json::Value> {
    match err.downcast_ref::<pnex::Error>()? {
        pnex::Error::NonConvergence { solver, reason, residual, best } => {
            Some(json!({"solver": solver, "reason": reason, "residual": residual, "best": best}))
        }
        _ => None,
    }
}

pub fn is_solver_failure(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        matches!(
            e.downcast_ref::<pnex::Error>(),
            Some(pnex::Error::NonConvergence { .. } | pnex::Error::KreinRutmanViolation { .. })
        )
    })
}

pub fn missing_out() -> anyhow::Error {
    anyhow!("no output directory: pass --out or set output_dir in the config")
}
