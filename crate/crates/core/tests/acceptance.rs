//! Acceptance suite: one PASS/FAIL line per criterion.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use faer::Mat;
use pnex::chart::Chart;
use pnex::fields::{metric_scalar_curvature, DataSpec, HProfile, HSpec, SchwarzschildCoordinates};
use pnex::linalg::{CsrMatrix, MAX_DIM};
use pnex::solvers::{
    pne_graph_solve, tau_continuation, BoundarySpec, GraphSolveOptions, GraphSystem, JangConfig,
    JangSystem, JangVerdict,
};
use pnex::spectrum::{
    conformal_scalar_curvature, principal_eigenpair, stability_verdict, topology_report,
    StabilityOperator, StabilityVerdict, SurfaceMetric, YamabeVerdict,
};
use pnex::spherical::{
    find_pne_radii, theta_profile, SphericalData, SphericalModel, DEFAULT_NODES,
};
use pnex::surfaces::{
    barrier_margins, induced_geometry, Orientation, SphereGrid, Surface, TorusGrid,
};
use pnex::{Conventions, InitialDataSet, SymTensorField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

type Res<T> = pnex::Result<T>;

struct Check {
    pass: bool,
    detail: String,
    /// Every measured number, compared byte for byte across runs.
    report: Value,
}

fn schwarzschild(r_min: f64, r_max: f64, counts: [usize; 3]) -> Res<InitialDataSet> {
    let chart = Arc::new(Chart::sphere_shell(r_min, r_max, counts)?);
    DataSpec::Schwarzschild {
        mass: 1.0,
        coordinates: SchwarzschildCoordinates::Isotropic,
        h: HSpec::Value(0.0),
    }
    .build(chart, Conventions::default())
}

fn shell(spec: DataSpec, r_min: f64, r_max: f64, counts: [usize; 3]) -> Res<InitialDataSet> {
    spec.build(
        Arc::new(Chart::sphere_shell(r_min, r_max, counts)?),
        Conventions::default(),
    )
}

fn torus_data(spec: DataSpec, n: usize) -> Res<InitialDataSet> {
    spec.build(
        Arc::new(Chart::periodic_box(&[1.0; 3], &[n; 3])?),
        Conventions::default(),
    )
}

fn sphere(nt: usize, r: f64) -> Surface {
    Surface::sphere(
        SphereGrid {
            n_theta: nt,
            n_phi: 2 * nt,
        },
        r,
    )
}

fn torus_surface(n: usize, height: f64) -> Surface {
    Surface::TorusGraph {
        grid: TorusGrid {
            extents: vec![1.0, 1.0],
            counts: vec![n, n],
        },
        values: vec![height; n * n],
        orientation: Orientation::Positive,
    }
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| {
            (a.min(*x), b.max(*x))
        })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Horizon of isotropic Schwarzschild `m = 1`: coordinate radius `1/2`, areal radius 2.
const RHO_H: f64 = 0.5;
const AREAL_H: f64 = 2.0;

fn horizon_solution(angular: usize) -> Res<(InitialDataSet, pnex::solvers::GraphSolution)> {
    let data = schwarzschild(0.4, 0.6, [49, angular, 2 * angular])?;
    let sol = pne_graph_solve(&data, &sphere(angular, 0.55), &GraphSolveOptions::default())?;
    Ok((data, sol))
}

fn c1_horizon() -> Res<Check> {
    let desc = DataSpec::Schwarzschild {
        mass: 1.0,
        coordinates: SchwarzschildCoordinates::Isotropic,
        h: HSpec::Value(0.0),
    };
    let model = SphericalModel::from_spec(&desc, 3)?;
    let radii = find_pne_radii(&theta_profile(
        &SphericalData::new(model, 0.3, 1.5, DEFAULT_NODES)?,
        Orientation::Positive,
    ));
    let spherical_err = match radii.as_slice() {
        [r] => (r.areal_radius - AREAL_H).abs(),
        _ => f64::INFINITY,
    };

    let (_, sol) = horizon_solution(64)?;
    let graph_rho = mean(&sol.geometry.heights);
    let graph_areal = sol.geometry.areal_radius();
    let graph_err = rel(graph_rho, RHO_H).max(rel(graph_areal, AREAL_H));

    let data = schwarzschild(0.3, 1.5, [49, 8, 16])?;
    let cfg = JangConfig {
        taus: (0..14).map(|k| 0.5f64.powi(k)).collect(),
        boundary: BoundarySpec::Barrier { strength: 0.05 },
        ..JangConfig::default()
    };
    let cont = tau_continuation(&data, &cfg)?;
    let fit = match &cont.verdict {
        Some(JangVerdict::BlowUp { locus, .. }) => locus.fit.clone(),
        _ => None,
    };
    let (jang_rho, jang_areal, refined_rho, refined_areal) = match &fit {
        Some(f) => {
            let fine = schwarzschild(0.4, 0.6, [49, 8, 16])?;
            let r = pne_graph_solve(&fine, &f.surface, &GraphSolveOptions::default())?;
            (
                f.mean_height,
                f.areal_radius.unwrap_or(f64::NAN),
                mean(&r.geometry.heights),
                r.geometry.areal_radius(),
            )
        }
        None => (f64::NAN, f64::NAN, f64::NAN, f64::NAN),
    };
    let jang_err = rel(jang_rho, RHO_H).max(rel(jang_areal, AREAL_H));
    let refined_err = rel(refined_rho, RHO_H).max(rel(refined_areal, AREAL_H));
    let pass = spherical_err <= 1e-8 && graph_err <= 1e-3 && jang_err <= 0.1 && refined_err <= 1e-3;
    Ok(Check {
        pass,
        detail: format!(
            "spherical |r-2| {spherical_err:.1e} (tol 1e-8); graph 64x128 rel {graph_err:.1e} (tol 1e-3); \
             Jang locus rel {jang_err:.1e} (tol 0.1); refined rel {refined_err:.1e} (tol 1e-3)"
        ),
        report: json!({
            "spherical_err": spherical_err, "graph_rho": graph_rho, "graph_areal": graph_areal,
            "jang_rho": jang_rho, "jang_areal": jang_areal, "refined_rho": refined_rho, "refined_areal": refined_areal,
            "jang_stages": cont.states.len(),
        }),
    })
}

fn c2_prescribed_sphere() -> Res<Check> {
    let mut errs = Vec::new();
    for spec in [
        DataSpec::Minkowski {
            h: HSpec::Value(0.5),
        },
        DataSpec::ConstantTrace {
            c: 0.1,
            h: HSpec::Value(0.7),
        },
    ] {
        let data = shell(spec, 2.5, 6.0, [29, 16, 32])?;
        let sol = pne_graph_solve(&data, &sphere(16, 3.0), &GraphSolveOptions::default())?;
        let (lo, hi) = min_max(&sol.geometry.heights);
        errs.push((lo - 4.0).abs().max((hi - 4.0).abs()));
    }
    Ok(Check {
        pass: errs.iter().all(|e| *e <= 1e-6),
        detail: format!(
            "p = 0, h = 0.5: |R-4| {:.1e}; p = 0.1 g, h = 0.7: |R-4| {:.1e} (tol 1e-6)",
            errs[0], errs[1]
        ),
        report: json!({"errors": errs}),
    })
}

fn c3_principal_eigenvalue() -> Res<Check> {
    let (data, sol) = horizon_solution(64)?;
    let op = StabilityOperator::assemble(&sol.geometry, &data)?;
    let r = principal_eigenpair(&op)?;
    let err = rel(r.lambda, 0.25);
    let pass = err <= 0.01
        && r.positive
        && r.imaginary_bound < 1e-10
        && stability_verdict(&r, None) == StabilityVerdict::Stable;
    Ok(Check {
        pass,
        detail: format!(
            "lambda {:.6} rel err {err:.1e} (tol 1e-2); min f {:.6}; imag {:.1e} (tol 1e-10)",
            r.lambda,
            r.min_f(),
            r.imaginary_bound
        ),
        report: json!({"lambda": r.lambda, "residual": r.residual, "min_f": r.min_f(), "imag": r.imaginary_bound}),
    })
}

fn dense_min_real_eigenvalue(a: &CsrMatrix) -> f64 {
    let d = a.to_dense();
    let m = Mat::<f64>::from_fn(a.nrows, a.ncols, |i, j| d[i][j]);
    let ev = m.eigenvalues().expect("dense eigenvalues");
    ev.iter().map(|z| z.re).fold(f64::INFINITY, f64::min)
}

fn rotation_operator(n: usize, c0: f64) -> Res<StabilityOperator> {
    let base = Arc::new(Chart::periodic_box(&[1.0, 1.0], &[n, n])?);
    let mut g = [[0.0; MAX_DIM]; MAX_DIM];
    g[0][0] = 1.0;
    g[1][1] = 1.0;
    // cellular rotation: W = (∂_y ψ, −∂_x ψ) with ψ = sin 2πx sin 2πy / 2π
    let w: Vec<[f64; MAX_DIM]> = (0..base.len())
        .map(|i| {
            let x = base.coords(i);
            let (sx, cx) = (2.0 * PI * x[0]).sin_cos();
            let (sy, cy) = (2.0 * PI * x[1]).sin_cos();
            [sx * cy, -cx * sy, 0.0, 0.0]
        })
        .collect();
    StabilityOperator::from_coefficients(
        base.clone(),
        &vec![g; base.len()],
        &w,
        vec![c0; base.len()],
    )
}

fn c4_nonsymmetric() -> Res<Check> {
    let op = rotation_operator(32, 0.3)?;
    let r = principal_eigenpair(&op)?;
    let dense = dense_min_real_eigenvalue(&op.matrix);
    let err = rel(r.lambda, dense);
    let asym = op
        .matrix
        .to_dense()
        .iter()
        .enumerate()
        .fold(0.0f64, |m, (i, row)| {
            row.iter()
                .enumerate()
                .fold(m, |m, (j, v)| m.max((v - op.matrix.get(j, i)).abs()))
        });
    Ok(Check {
        pass: err <= 1e-8 && asym > 1.0,
        detail: format!(
            "lambda {:.12} vs dense {:.12}, rel {err:.1e} (tol 1e-8); max |A - A^T| {asym:.1}",
            r.lambda, dense
        ),
        report: json!({"lambda": r.lambda, "dense": dense}),
    })
}

/// Seeded positive trigonometric polynomial on the unit torus of dimension `d`.
fn random_factor(d: usize, seed: u64) -> impl Fn(&[f64; MAX_DIM]) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<([f64; MAX_DIM], f64, f64)> = (0..6)
        .map(|_| {
            let mut k = [0.0; MAX_DIM];
            for kk in k.iter_mut().take(d) {
                *kk = rng.random_range(-2i32..=2) as f64;
            }
            (k, rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
        .collect();
    move |x| {
        1.0 + 0.05
            * modes
                .iter()
                .map(|(k, a, b)| {
                    let ph = 2.0 * PI * (0..d).map(|i| k[i] * x[i]).sum::<f64>();
                    a * ph.cos() + b * ph.sin()
                })
                .sum::<f64>()
    }
}

/// Max-norm gap between the conformal formula and direct differencing of `f^{2/(n−2)} δ`.
fn conformal_gap(n: usize, cells: usize, seed: u64) -> Res<f64> {
    let d = n - 1;
    let base = Arc::new(Chart::periodic_box(&vec![1.0; d], &vec![cells; d])?);
    let f_of = random_factor(d, seed);
    let f: Vec<f64> = (0..base.len()).map(|i| f_of(&base.coords(i))).collect();
    let flat = SymTensorField::from_fn(base.clone(), |_| {
        let mut g = [[0.0; MAX_DIM]; MAX_DIM];
        for a in 0..d {
            g[a][a] = 1.0;
        }
        g
    })?;
    let formula = conformal_scalar_curvature(&SurfaceMetric::intrinsic(flat)?, &f, n)?;
    let e = 2.0 / (n as f64 - 2.0);
    let scaled = SymTensorField::from_fn(base.clone(), |i| {
        let mut g = [[0.0; MAX_DIM]; MAX_DIM];
        for a in 0..d {
            g[a][a] = f[i].powf(e);
        }
        g
    })?;
    let direct = metric_scalar_curvature(&scaled)?;
    Ok(formula
        .values()
        .iter()
        .zip(direct.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

fn c5_conformal() -> Res<Check> {
    let mut ratios = Vec::new();
    let mut gaps = Vec::new();
    for (n, sizes) in [(3, [32, 64]), (4, [16, 32])] {
        let coarse = conformal_gap(n, sizes[0], 5)?;
        let fine = conformal_gap(n, sizes[1], 5)?;
        gaps.push((coarse, fine));
        ratios.push(coarse / fine);
    }
    Ok(Check {
        pass: ratios.iter().all(|r| (3.5..=4.5).contains(r)),
        detail: format!(
            "error ratio on halving: n = 3 {:.3} ({:.2e} -> {:.2e}), n = 4 {:.3} ({:.2e} -> {:.2e}) (range [3.5, 4.5])",
            ratios[0], gaps[0].0, gaps[0].1, ratios[1], gaps[1].0, gaps[1].1
        ),
        report: json!({"gaps": gaps, "ratios": ratios}),
    })
}

fn directional_error(
    residual: impl Fn(&[f64]) -> Res<Vec<f64>>,
    jacobian: &CsrMatrix,
    x: &[f64],
    v: &[f64],
) -> Res<f64> {
    let eps = 1e-6;
    let shift = |s: f64| {
        x.iter()
            .zip(v)
            .map(|(a, b)| a + s * eps * b)
            .collect::<Vec<_>>()
    };
    let (fp, fm) = (residual(&shift(1.0))?, residual(&shift(-1.0))?);
    let jv = jacobian.mul_vec(v);
    let num = fp
        .iter()
        .zip(&fm)
        .zip(&jv)
        .map(|((p, m), j)| ((p - m) / (2.0 * eps) - j).abs())
        .fold(0.0, f64::max);
    let den = jv.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(num / den)
}

fn smooth_field(chart: &Chart, rng: &mut ChaCha8Rng, amplitude: f64) -> Vec<f64> {
    let (a, b, c) = (
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
    );
    (0..chart.len())
        .map(|i| {
            let x = chart.cartesian(i);
            amplitude
                * (a * (1.3 * x[0]).sin()
                    + b * (0.7 * x[1] + 0.4).cos()
                    + c * x[2] * (0.9 * x[0]).cos())
        })
        .collect()
}

fn c6_jacobians() -> Res<Check> {
    let perturbed = |seed| DataSpec::PolynomialPerturbation {
        seed,
        amplitude: 0.05,
        length_scale: 3.0,
        c: 0.1,
        h: HSpec::Value(0.3),
    };
    let mut jang = Vec::new();
    let mut graph = Vec::new();
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let data = shell(perturbed(seed), 1.5, 3.5, [9, 8, 16])?;
        let ambient = Arc::new(data.geometry()?);
        let sys = JangSystem::new(
            &data,
            ambient,
            0.3,
            BoundarySpec::Dirichlet {
                inner: 0.5,
                outer: -0.5,
            },
        )?;
        let u = smooth_field(data.chart(), &mut rng, 1.0);
        let v = smooth_field(data.chart(), &mut rng, 1.0);
        jang.push(directional_error(
            |x| Ok(sys.residual(x)),
            &sys.jacobian(&u),
            &u,
            &v,
        )?);

        let gs = GraphSystem::new(&data, Orientation::Positive)?;
        let (base, _) = data.chart().graph_split()?;
        let h: Vec<f64> = (0..base.len())
            .map(|_| 2.5 + 0.2 * rng.random_range(-1.0..1.0))
            .collect();
        let dv: Vec<f64> = (0..base.len())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        graph.push(directional_error(
            |x| gs.residual(x),
            &gs.jacobian(&h, false)?,
            &h,
            &dv,
        )?);
    }
    let (jw, gw) = (
        jang.iter().copied().fold(0.0, f64::max),
        graph.iter().copied().fold(0.0, f64::max),
    );
    Ok(Check {
        pass: jw <= 1e-6 && gw <= 1e-6,
        detail: format!(
            "worst relative error over 10 states: Jang {jw:.1e}, graph {gw:.1e} (tol 1e-6)"
        ),
        report: json!({"jang": jang, "graph": graph}),
    })
}

fn c7_modified_dec() -> Res<Check> {
    let mink = torus_data(
        DataSpec::Minkowski {
            h: HSpec::Value(0.0),
        },
        8,
    )?
    .modified_dec_margin()?
    .max_abs();
    let coarse = schwarzschild(0.3, 1.5, [25, 8, 16])?.modified_dec_margin()?;
    let fine = schwarzschild(0.3, 1.5, [49, 8, 16])?.modified_dec_margin()?;
    // truncation estimate: largest change between the two grids on their shared nodes
    let (cc, fc) = (coarse.chart(), fine.chart());
    let truncation = (0..cc.len())
        .map(|i| {
            let mut m = cc.multi(i);
            m[0] *= 2;
            (coarse.values()[i] - fine.values()[fc.flat(&m)]).abs()
        })
        .fold(0.0, f64::max);
    let fine = fine.max_abs();
    let constant = torus_data(
        DataSpec::Minkowski {
            h: HSpec::Value(0.2),
        },
        8,
    )?
    .modified_dec_margin()?;
    let (lo, hi) = min_max(constant.values());
    let const_err = (lo - 0.03).abs().max((hi - 0.03).abs());
    let pass = mink <= 1e-12 && fine <= truncation && const_err <= 1e-12;
    Ok(Check {
        pass,
        detail: format!(
            "Minkowski {mink:.1e} (tol 1e-12); Schwarzschild {fine:.2e} vs truncation estimate {truncation:.2e}; \
             h = 0.2 |margin-0.03| {const_err:.1e} (tol 1e-12)"
        ),
        report: json!({"minkowski": mink, "truncation": truncation, "fine": fine, "constant": const_err}),
    })
}

fn c8_rigidity_sweep() -> Res<Check> {
    let h = HSpec::Profile(HProfile::InverseRadius { a: 2.5, b: -0.125 });
    let mut rows = Vec::new();
    let mut worst = f64::INFINITY;
    let mut seed = 0u64;
    let mut violations = 0;
    while rows.len() < 20 && seed < 200 {
        let spec = DataSpec::PolynomialPerturbation {
            seed,
            amplitude: 2e-3,
            length_scale: 4.0,
            c: 0.0,
            h,
        };
        seed += 1;
        let data = shell(spec, 2.5, 4.8, [25, 16, 32])?;
        if data.modified_dec_margin()?.min().1 < 0.0 {
            continue;
        }
        let Ok(sol) = pne_graph_solve(&data, &sphere(16, 3.8), &GraphSolveOptions::default())
        else {
            rows.push(json!({"seed": seed - 1, "found": false}));
            continue;
        };
        let op = StabilityOperator::assemble(&sol.geometry, &data)?;
        let spec_r = principal_eigenpair(&op)?;
        if stability_verdict(&spec_r, None) != StabilityVerdict::Stable {
            rows.push(
                json!({"seed": seed - 1, "found": true, "stable": false, "lambda": spec_r.lambda}),
            );
            continue;
        }
        let rep = topology_report(&sol.geometry, &data, &spec_r)?;
        let bound = -10.0 * rep.truncation;
        if rep.s_tilde_min < bound {
            violations += 1;
        }
        worst = worst.min(rep.s_tilde_min - bound);
        rows.push(json!({
            "seed": seed - 1, "found": true, "stable": true, "lambda": spec_r.lambda,
            "s_tilde_min": rep.s_tilde_min, "truncation": rep.truncation, "verdict": rep.verdict,
        }));
    }
    let data = torus_data(
        DataSpec::Minkowski {
            h: HSpec::Value(0.0),
        },
        16,
    )?;
    let geom = induced_geometry(&torus_surface(16, 0.5), &data)?;
    let spec_t = principal_eigenpair(&StabilityOperator::assemble(&geom, &data)?)?;
    let torus = topology_report(&geom, &data, &spec_t)?;
    let borderline = torus.verdict == YamabeVerdict::BorderlineRigidity
        && torus.margins.all_below(torus.threshold);
    let pass = rows.len() >= 20 && violations == 0 && borderline;
    Ok(Check {
        pass,
        detail: format!(
            "{} data sets passing the energy condition (seeds 0..{seed}), {violations} with min S~ below -10 x truncation; \
             flat torus {:?}",
            rows.len(),
            torus.verdict
        ),
        report: json!({"rows": rows, "worst_slack": worst, "torus_margins": torus.margins, "torus_threshold": torus.threshold}),
    })
}

fn c9_barriers() -> Res<Check> {
    // radii 1.5 and 4 of the areal horizon scale 2 sit at ρ = 0.375 and ρ = 1 in isotropic coordinates
    let data = schwarzschild(0.3, 1.5, [49, 8, 16])?;
    let s = barrier_margins(&sphere(8, 0.375), &sphere(8, 1.0), &data)?;
    let flat = shell(
        DataSpec::Minkowski {
            h: HSpec::Value(0.0),
        },
        1.0,
        4.0,
        [13, 8, 16],
    )?;
    let f = barrier_margins(&sphere(8, 1.5), &sphere(8, 4.0), &flat)?;
    let pass = s.min_inner > 0.0 && s.min_outer > 0.0 && f.min_inner < 0.0;
    Ok(Check {
        pass,
        detail: format!(
            "Schwarzschild shell margins {:.4} / {:.4} (must be > 0); flat shell inner margin {:.4} (must be < 0)",
            s.min_inner, s.min_outer, f.min_inner
        ),
        report: json!({"schwarzschild": [s.min_inner, s.min_outer], "flat": [f.min_inner, f.min_outer]}),
    })
}

const CRITERIA: [(&str, fn() -> Res<Check>); 9] = [
    ("horizon recovery", c1_horizon),
    ("prescribed-expansion sphere", c2_prescribed_sphere),
    ("principal eigenvalue", c3_principal_eigenvalue),
    ("nonsymmetric correctness", c4_nonsymmetric),
    ("conformal formula cross-check", c5_conformal),
    ("Jacobian fidelity", c6_jacobians),
    ("modified DEC", c7_modified_dec),
    ("rigidity consistency sweep", c8_rigidity_sweep),
    ("barrier margins", c9_barriers),
];

fn run_all(print: bool) -> (Vec<bool>, Vec<String>) {
    let mut passes = Vec::new();
    let mut reports = Vec::new();
    for (k, (name, f)) in CRITERIA.iter().enumerate() {
        let t = Instant::now();
        let (pass, detail, report) = match f() {
            Ok(c) => (c.pass, c.detail, c.report.to_string()),
            Err(e) => (false, format!("error: {e}"), format!("error: {e}")),
        };
        if print {
            let verdict = if pass { "PASS" } else { "FAIL" };
            println!(
                "criterion {:>2} {name}: {verdict} [{:.1}s] {detail}",
                k + 1,
                t.elapsed().as_secs_f64()
            );
        }
        passes.push(pass);
        reports.push(report);
    }
    (passes, reports)
}

fn main() -> ExitCode {
    let (mut passes, first) = run_all(true);
    let (_, second) = run_all(false);
    let identical = first == second;
    let differing: Vec<usize> = (0..first.len())
        .filter(|&i| first[i] != second[i])
        .map(|i| i + 1)
        .collect();
    println!(
        "criterion 10 determinism: {} reports of criteria 1-9 byte-identical on rerun{}",
        if identical { "PASS" } else { "FAIL" },
        if identical {
            String::new()
        } else {
            format!(", differing: {differing:?}")
        }
    );
    passes.push(identical);
    let failed = passes.iter().filter(|p| !**p).count();
    println!(
        "acceptance: {} of {} criteria passed",
        passes.len() - failed,
        passes.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
