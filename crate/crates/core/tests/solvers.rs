use std::sync::Arc;

use pnex::chart::Chart;
use pnex::fields::{DataSpec, HProfile, HSpec, SchwarzschildCoordinates};
use pnex::linalg::CsrMatrix;
use pnex::solvers::{
    jang_newton_solve, pne_graph_solve, tau_continuation, BoundarySpec, GraphSolveOptions,
    GraphSystem, JangConfig, JangSystem, NewtonStep,
};
use pnex::surfaces::{Orientation, SphereGrid, Surface};
use pnex::{Conventions, Error, InitialDataSet};
use proptest::prelude::*;

fn shell(spec: DataSpec, r: (f64, f64), counts: [usize; 3]) -> InitialDataSet {
    spec.build(
        Arc::new(Chart::sphere_shell(r.0, r.1, counts).unwrap()),
        Conventions::default(),
    )
    .unwrap()
}

fn schwarzschild(r: (f64, f64), counts: [usize; 3]) -> InitialDataSet {
    shell(
        DataSpec::Schwarzschild {
            mass: 1.0,
            coordinates: SchwarzschildCoordinates::Isotropic,
            h: HSpec::Value(0.0),
        },
        r,
        counts,
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

fn perturbed(seed: u64) -> DataSpec {
    DataSpec::PolynomialPerturbation {
        seed,
        amplitude: 0.05,
        length_scale: 3.0,
        c: 0.1,
        h: HSpec::Value(0.3),
    }
}

fn directional_error(
    residual: impl Fn(&[f64]) -> Vec<f64>,
    jac: &CsrMatrix,
    x: &[f64],
    v: &[f64],
) -> f64 {
    let eps = 1e-6;
    let at = |s: f64| {
        x.iter()
            .zip(v)
            .map(|(a, b)| a + s * eps * b)
            .collect::<Vec<_>>()
    };
    let (fp, fm) = (residual(&at(1.0)), residual(&at(-1.0)));
    let jv = jac.mul_vec(v);
    let num: f64 = fp
        .iter()
        .zip(&fm)
        .zip(&jv)
        .map(|((p, m), j)| ((p - m) / (2.0 * eps) - j).powi(2))
        .sum();
    let den: f64 = jv.iter().map(|j| j * j).sum();
    (num / den).sqrt()
}

fn assert_monotone(history: &[NewtonStep]) {
    for w in history.windows(2) {
        assert!(w[1].residual < w[0].residual, "{history:?}");
    }
}

#[test]
fn discrete_maximum_principle() {
    let h = HSpec::Profile(HProfile::InverseRadius { a: 0.3, b: 0.0 });
    let data = shell(DataSpec::Minkowski { h }, (1.0, 3.0), [17, 8, 16]);
    let (tau, inner, outer) = (1.0, 0.1, -0.2);
    let cfg = JangConfig::default();
    let state = jang_newton_solve(
        &data,
        tau,
        BoundarySpec::Dirichlet { inner, outer },
        &cfg,
        None,
    )
    .unwrap();
    assert!(state.converged);
    assert_monotone(&state.history);
    let (h_min, h_max) = (0.1, 0.3);
    let lo = inner.min(outer).min(-h_max / tau);
    let hi = inner.max(outer).max(-h_min / tau);
    for u in state.u.values() {
        assert!(
            *u >= lo - 1e-12 && *u <= hi + 1e-12,
            "{u} outside [{lo}, {hi}]"
        );
    }
}

#[test]
fn continuation_grows_monotonically_on_schwarzschild() {
    let data = schwarzschild((0.3, 1.5), [25, 8, 16]);
    let cfg = JangConfig {
        taus: (0..8).map(|k| 0.5f64.powi(k)).collect(),
        boundary: BoundarySpec::Barrier { strength: 0.05 },
        ..JangConfig::default()
    };
    let cont = tau_continuation(&data, &cfg).unwrap();
    assert!(cont.states.len() >= 2);
    for w in cont.states.windows(2) {
        assert!(w[1].sup_abs() >= w[0].sup_abs());
        assert!(w[1].tau < w[0].tau);
    }
}

#[test]
fn schedule_must_decrease() {
    let cfg = JangConfig {
        taus: vec![1.0, 0.5, 0.5],
        ..JangConfig::default()
    };
    assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    let cfg = JangConfig {
        taus: vec![1.0, -0.5],
        ..JangConfig::default()
    };
    assert!(cfg.validate().is_err());
}

#[test]
fn graph_solution_is_a_fixed_point() {
    // h = 2.5/r − 1/8 on flat data has its sphere at r = 4
    let spec = DataSpec::PolynomialPerturbation {
        seed: 1,
        amplitude: 2e-3,
        length_scale: 4.0,
        c: 0.0,
        h: HSpec::Profile(HProfile::InverseRadius { a: 2.5, b: -0.125 }),
    };
    let data = shell(spec, (2.5, 4.8), [17, 8, 16]);
    let first = pne_graph_solve(&data, &sphere(8, 3.8), &GraphSolveOptions::default()).unwrap();
    assert_monotone(&first.history);
    let again = pne_graph_solve(&data, &first.surface, &GraphSolveOptions::default()).unwrap();
    assert!(again.history.len() <= 2, "{:?}", again.history);
    let fd = GraphSolveOptions {
        fd_jacobian: true,
        ..GraphSolveOptions::default()
    };
    let with_fd = pne_graph_solve(&data, &sphere(8, 3.8), &fd).unwrap();
    let gap = first
        .geometry
        .heights
        .iter()
        .zip(&with_fd.geometry.heights)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(gap < 1e-8, "{gap}");
}

#[test]
fn graph_horizon_converges_to_the_spherical_root() {
    // horizon at ρ = 1/2; the error is second order in the radial spacing
    let err = |nr: usize| {
        let data = schwarzschild((0.4, 0.6), [nr, 8, 16]);
        let sol = pne_graph_solve(&data, &sphere(8, 0.55), &GraphSolveOptions::default()).unwrap();
        sol.geometry
            .heights
            .iter()
            .map(|h| (h - 0.5).abs())
            .fold(0.0, f64::max)
    };
    let ratio = err(17) / err(33);
    assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn nonconvergence_carries_the_best_iterate() {
    let data = shell(
        DataSpec::Minkowski {
            h: HSpec::Value(0.5),
        },
        (2.5, 6.0),
        [15, 8, 16],
    );
    let opts = GraphSolveOptions {
        max_iterations: 1,
        ..GraphSolveOptions::default()
    };
    match pne_graph_solve(&data, &sphere(8, 3.0), &opts) {
        Err(Error::NonConvergence { best, residual, .. }) => {
            assert_eq!(best.len(), 8 * 16);
            assert!(residual.is_finite());
        }
        other => panic!(
            "expected nonconvergence, got {:?}",
            other.map(|s| s.residual)
        ),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn jang_jacobian_matches_differences(seed in 0u64..1000, tau in 0.05f64..1.0, a in -1.0f64..1.0, b in -1.0f64..1.0) {
        let data = shell(perturbed(seed), (1.5, 3.5), [7, 6, 12]);
        let sys = JangSystem::new(&data, Arc::new(data.geometry().unwrap()), tau, BoundarySpec::Dirichlet { inner: 0.3, outer: -0.2 }).unwrap();
        let chart = data.chart();
        let u: Vec<f64> = (0..chart.len()).map(|i| { let x = chart.cartesian(i); a * (0.8 * x[0]).sin() + b * x[1] * x[2] / 4.0 }).collect();
        let v: Vec<f64> = (0..chart.len()).map(|i| { let x = chart.cartesian(i); (1.1 * x[2] + b).cos() }).collect();
        let e = directional_error(|x| sys.residual(x), &sys.jacobian(&u), &u, &v);
        prop_assert!(e <= 1e-6, "relative error {e:e}");
    }

    #[test]
    fn graph_jacobian_matches_differences(seed in 0u64..1000, r in 2.0f64..3.0, a in -0.2f64..0.2) {
        let data = shell(perturbed(seed), (1.5, 3.5), [7, 6, 12]);
        let sys = GraphSystem::new(&data, Orientation::Positive).unwrap();
        let (base, _) = data.chart().graph_split().unwrap();
        let h: Vec<f64> = (0..base.len()).map(|i| { let x = base.coords(i); r + a * x[0].cos() * x[1].sin() }).collect();
        let v: Vec<f64> = (0..base.len()).map(|i| { let x = base.coords(i); (2.0 * x[0]).sin() + a }).collect();
        let jac = sys.jacobian(&h, false).unwrap();
        let e = directional_error(|x| sys.residual(x).unwrap(), &jac, &h, &v);
        prop_assert!(e <= 1e-6, "relative error {e:e}");
    }
}
