use std::f64::consts::PI;
use std::sync::Arc;

use faer::{Mat, Side};
use pnex::chart::Chart;
use pnex::fields::{DataSpec, HSpec, SchwarzschildCoordinates};
use pnex::linalg::MAX_DIM;
use pnex::solvers::{pne_graph_solve, GraphSolveOptions};
use pnex::spectrum::{
    conformal_scalar_curvature, principal_eigenpair, stability_verdict, topology_report,
    zeroth_order, StabilityOperator, StabilityVerdict, SurfaceMetric, YamabeVerdict,
};
use pnex::surfaces::{induced_geometry, Orientation, SphereGrid, Surface, TorusGrid};
use pnex::{Conventions, InitialDataSet, ScalarField, SymTensorField, TraceConvention};
use proptest::prelude::*;

fn torus_chart(n: usize) -> Arc<Chart> {
    Arc::new(Chart::periodic_box(&[1.0, 1.0], &[n, n]).unwrap())
}

fn flat2() -> [[f64; MAX_DIM]; MAX_DIM] {
    let mut g = [[0.0; MAX_DIM]; MAX_DIM];
    g[0][0] = 1.0;
    g[1][1] = 1.0;
    g
}

fn potential(chart: &Chart, a: f64, b: f64) -> Vec<f64> {
    (0..chart.len())
        .map(|i| {
            let x = chart.coords(i);
            a + b * (2.0 * PI * x[0]).cos() * (2.0 * PI * x[1]).sin()
        })
        .collect()
}

fn perturbed(seed: u64) -> DataSpec {
    DataSpec::PolynomialPerturbation {
        seed,
        amplitude: 0.02,
        length_scale: 4.0,
        c: 0.05,
        h: HSpec::Value(0.0),
    }
}

fn shell(spec: DataSpec, r: (f64, f64), counts: [usize; 3]) -> InitialDataSet {
    spec.build(
        Arc::new(Chart::sphere_shell(r.0, r.1, counts).unwrap()),
        Conventions::default(),
    )
    .unwrap()
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

#[test]
fn drift_free_operator_matches_a_symmetric_solver() {
    let chart = torus_chart(16);
    // conformally flat metric, so the weights vary
    let metric: Vec<_> = (0..chart.len())
        .map(|i| {
            let x = chart.coords(i);
            let s = 1.0 + 0.2 * (2.0 * PI * x[0]).sin();
            let mut g = flat2();
            g[0][0] = s;
            g[1][1] = s;
            g
        })
        .collect();
    let c0 = potential(&chart, 0.4, 1.5);
    let op = StabilityOperator::from_coefficients(
        chart.clone(),
        &metric,
        &vec![[0.0; MAX_DIM]; chart.len()],
        c0,
    )
    .unwrap();
    assert!(op.weighted_asymmetry() < 1e-12);
    let r = principal_eigenpair(&op).unwrap();

    // D^{1/2} A D^{-1/2} is symmetric for the quadrature weights D
    let a = op.matrix.to_dense();
    let w = &op.weights;
    let n = a.len();
    let s = Mat::<f64>::from_fn(n, n, |i, j| {
        let v = w[i].sqrt() * a[i][j] / w[j].sqrt();
        let t = w[j].sqrt() * a[j][i] / w[i].sqrt();
        0.5 * (v + t)
    });
    let ev = s.self_adjoint_eigenvalues(Side::Lower).unwrap();
    let smallest = ev.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(
        (r.lambda - smallest).abs() <= 1e-8 * smallest.abs(),
        "{} vs {smallest}",
        r.lambda
    );
    assert!(r.positive);
}

#[test]
fn eigenfunctions_are_one_signed() {
    let chart = torus_chart(24);
    for (k, b) in [0.0, 3.0, 20.0].into_iter().enumerate() {
        let w: Vec<[f64; MAX_DIM]> = (0..chart.len())
            .map(|i| {
                let x = chart.coords(i);
                [
                    k as f64 * (2.0 * PI * x[1]).sin(),
                    0.5 * (2.0 * PI * x[0]).cos(),
                    0.0,
                    0.0,
                ]
            })
            .collect();
        let op = StabilityOperator::from_coefficients(
            chart.clone(),
            &vec![flat2(); chart.len()],
            &w,
            potential(&chart, -1.0, b),
        )
        .unwrap();
        let r = principal_eigenpair(&op).unwrap();
        assert!(
            r.positive && r.min_f() > 0.0,
            "case {k}: min f {}",
            r.min_f()
        );
        assert!(r.imaginary_bound < 1e-10);
        assert!(r.residual < 1e-8 * (1.0 + r.lambda.abs()));
    }
}

#[test]
fn unstable_flat_torus() {
    // h = √2, p = 0 on a flat slab: c₀ = −½h² = −1
    let data = DataSpec::Minkowski {
        h: HSpec::Value(2f64.sqrt()),
    }
    .build(
        Arc::new(Chart::periodic_box(&[1.0; 3], &[8; 3]).unwrap()),
        Conventions::default(),
    )
    .unwrap();
    let torus = Surface::TorusGraph {
        grid: TorusGrid {
            extents: vec![1.0, 1.0],
            counts: vec![8, 8],
        },
        values: vec![0.5; 64],
        orientation: Orientation::Positive,
    };
    let geom = induced_geometry(&torus, &data).unwrap();
    let r = principal_eigenpair(&StabilityOperator::assemble(&geom, &data).unwrap()).unwrap();
    assert!((r.lambda + 1.0).abs() < 1e-10);
    assert_eq!(stability_verdict(&r, None), StabilityVerdict::Unstable);
}

#[test]
fn zero_h_recovers_the_mots_operator() {
    let data = shell(perturbed(5), (1.5, 3.5), [9, 8, 16]);
    let data = data.clone().with_h(ScalarField::constant(data.chart().clone(), 0.0).unwrap()).unwrap();
    assert!(data.h.values().iter().all(|h| *h == 0.0));
    let geom = induced_geometry(&sphere(8, 2.4), &data).unwrap();
    for conv in [TraceConvention::Ambient, TraceConvention::Induced] {
        let c0 = zeroth_order(&geom, conv);
        for (p, c) in geom.points.iter().zip(&c0) {
            assert_eq!(p.nu_h, 0.0);
            assert_eq!(*c, p.div_w - p.w_norm2 + p.q);
        }
    }
}

#[test]
fn horizon_is_positive_type() {
    let data = shell(
        DataSpec::Schwarzschild {
            mass: 1.0,
            coordinates: SchwarzschildCoordinates::Isotropic,
            h: HSpec::Value(0.0),
        },
        (0.4, 0.6),
        [25, 16, 32],
    );
    let sol = pne_graph_solve(&data, &sphere(16, 0.55), &GraphSolveOptions::default()).unwrap();
    let spec =
        principal_eigenpair(&StabilityOperator::assemble(&sol.geometry, &data).unwrap()).unwrap();
    let rep = topology_report(&sol.geometry, &data, &spec).unwrap();
    assert_eq!(rep.verdict, YamabeVerdict::PositiveType);
    assert!(rep.s_tilde_min > rep.threshold);
}

fn random_f(chart: &Chart, seed: u64) -> Vec<f64> {
    let phase = seed as f64 * 0.37;
    (0..chart.len())
        .map(|i| {
            let x = chart.coords(i);
            1.0 + 0.4 * (2.0 * PI * x[0] + phase).sin() * (2.0 * PI * x[1]).cos()
                + 0.1 * (4.0 * PI * x[1] - phase).sin()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn conformal_sign_pattern_is_scale_invariant(seed in 0u64..100, c in 0.01f64..100.0, n in 3usize..5) {
        let d = n - 1;
        let chart = Arc::new(Chart::periodic_box(&vec![1.0; d], &vec![12; d]).unwrap());
        let metric = SymTensorField::from_fn(chart.clone(), |_| {
            let mut g = [[0.0; MAX_DIM]; MAX_DIM];
            for a in 0..d {
                g[a][a] = 1.0;
            }
            g
        })
        .unwrap();
        let g = SurfaceMetric::intrinsic(metric).unwrap();
        let f = random_f(&chart, seed);
        let scaled: Vec<f64> = f.iter().map(|x| c * x).collect();
        let s1 = conformal_scalar_curvature(&g, &f, n).unwrap();
        let s2 = conformal_scalar_curvature(&g, &scaled, n).unwrap();
        let factor = c.powf(-2.0 / (n as f64 - 2.0));
        for (a, b) in s1.values().iter().zip(s2.values()) {
            prop_assert_eq!(a.signum(), b.signum());
            prop_assert!((b - factor * a).abs() <= 1e-9 * factor * (1.0 + a.abs()));
        }
    }
}
