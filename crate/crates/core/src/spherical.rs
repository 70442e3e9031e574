//! Spherically symmetric reduction: closed-form expansion profiles, radius
//! roots of `θ = h`, and the radial Jang equation.
//!
//! Metrics have the form `g = λ(r) dr² + σ(r)² dΩ²` and `p = p_rad dr² + p_tan σ² dΩ²`.
//! `σ = r` for areal coordinates; isotropic Schwarzschild uses `σ = r ψ^{2/(n−2)}`.

use num_dual::DualSVec64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{DataSpec, HSpec, SchwarzschildCoordinates};
use crate::linalg::{c, seed, slot, CsrMatrix, Real};
use crate::solvers::newton::{damped_newton, NewtonOptions, NewtonStep};
use crate::surfaces::Orientation;

/// Default number of radial nodes.
pub const DEFAULT_NODES: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RadialMetric {
    Flat,
    SchwarzschildAreal { mass: f64 },
    SchwarzschildIsotropic { mass: f64 },
}

/// Closed-form symmetric data: metric, `p = c g`, and `h`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphericalModel {
    pub n: usize,
    pub metric: RadialMetric,
    pub c: f64,
    pub h: HSpec,
}

impl SphericalModel {
    /// Symmetric reduction of a preset.
    pub fn from_spec(spec: &DataSpec, n: usize) -> Result<Self> {
        let (metric, c, h) = match *spec {
            DataSpec::Minkowski { h } => (RadialMetric::Flat, 0.0, h),
            DataSpec::ConstantTrace { c, h } => (RadialMetric::Flat, c, h),
            DataSpec::Schwarzschild {
                mass,
                coordinates,
                h,
            } => (
                match coordinates {
                    SchwarzschildCoordinates::Areal => RadialMetric::SchwarzschildAreal { mass },
                    SchwarzschildCoordinates::Isotropic => {
                        RadialMetric::SchwarzschildIsotropic { mass }
                    }
                },
                0.0,
                h,
            ),
            _ => {
                return Err(Error::Config(
                    "the spherical reduction needs a spherically symmetric preset".into(),
                ))
            }
        };
        let m = Self { n, metric, c, h };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::Domain(format!("dimension {} < 3", self.n)));
        }
        match self.metric {
            RadialMetric::SchwarzschildAreal { mass }
            | RadialMetric::SchwarzschildIsotropic { mass }
                if !(mass > 0.0) =>
            {
                Err(Error::Domain("mass must be positive".into()))
            }
            _ if !self.c.is_finite() => Err(Error::Domain("c must be finite".into())),
            _ => Ok(()),
        }
    }

    fn k(&self) -> f64 {
        (self.n - 2) as f64
    }

    fn psi(&self, mass: f64, r: f64) -> (f64, f64) {
        let k = self.k();
        (
            1.0 + mass / (2.0 * r.powf(k)),
            -k * mass / (2.0 * r.powf(k + 1.0)),
        )
    }

    /// `λ(r)`
    pub fn lambda(&self, r: f64) -> f64 {
        match self.metric {
            RadialMetric::Flat => 1.0,
            RadialMetric::SchwarzschildAreal { mass } => {
                1.0 / (1.0 - 2.0 * mass / r.powf(self.k()))
            }
            RadialMetric::SchwarzschildIsotropic { mass } => {
                self.psi(mass, r).0.powf(4.0 / self.k())
            }
        }
    }

    /// `(σ, σ′)`
    pub fn sigma(&self, r: f64) -> (f64, f64) {
        match self.metric {
            RadialMetric::Flat | RadialMetric::SchwarzschildAreal { .. } => (r, 1.0),
            RadialMetric::SchwarzschildIsotropic { mass } => {
                let e = 2.0 / self.k();
                let (psi, dpsi) = self.psi(mass, r);
                (
                    r * psi.powf(e),
                    psi.powf(e) + r * e * psi.powf(e - 1.0) * dpsi,
                )
            }
        }
    }

    /// `p_rr`
    pub fn p_rad(&self, r: f64) -> f64 {
        self.c * self.lambda(r)
    }

    pub fn p_tan(&self, _r: f64) -> f64 {
        self.c
    }

    /// `h` at coordinate radius `r`.
    pub fn h(&self, r: f64) -> f64 {
        self.h.eval(r)
    }

    /// Mean curvature of the coordinate sphere for the given orientation.
    pub fn mean_curvature(&self, r: f64, orientation: Orientation) -> f64 {
        let (s, ds) = self.sigma(r);
        orientation.sign() * (self.n - 1) as f64 * ds / (s * self.lambda(r).sqrt())
    }

    /// `θ − h` on the coordinate sphere of radius `r`.
    pub fn theta_minus_h(&self, r: f64, orientation: Orientation) -> f64 {
        self.mean_curvature(r, orientation) + (self.n - 1) as f64 * self.p_tan(r) - self.h(r)
    }

    /// Radius of the round sphere with the area of the coordinate sphere `r`.
    pub fn areal_radius(&self, r: f64) -> f64 {
        self.sigma(r).0
    }

    /// Smallest admissible coordinate radius.
    pub fn min_radius(&self) -> f64 {
        match self.metric {
            RadialMetric::SchwarzschildAreal { mass } => (2.0 * mass).powf(1.0 / self.k()),
            _ => 0.0,
        }
    }
}

/// Symmetric data sampled on a uniform radial grid.
#[derive(Clone, Debug)]
pub struct SphericalData {
    pub model: SphericalModel,
    pub r: Vec<f64>,
    pub lambda: Vec<f64>,
    pub sigma: Vec<f64>,
    pub p_rad: Vec<f64>,
    pub p_tan: Vec<f64>,
    pub h: Vec<f64>,
}

impl SphericalData {
    pub fn new(model: SphericalModel, r_min: f64, r_max: f64, nodes: usize) -> Result<Self> {
        model.validate()?;
        if !(r_min > 0.0) || !(r_max > r_min) || nodes < 5 {
            return Err(Error::Domain(format!(
                "radial grid [{r_min}, {r_max}] with {nodes} nodes"
            )));
        }
        if r_min < model.min_radius() {
            return Err(Error::Domain(format!(
                "r_min = {r_min} lies inside the coordinate singularity"
            )));
        }
        let dr = (r_max - r_min) / (nodes - 1) as f64;
        let r: Vec<f64> = (0..nodes)
            .map(|i| {
                if i + 1 == nodes {
                    r_max
                } else {
                    r_min + i as f64 * dr
                }
            })
            .collect();
        let lambda: Vec<f64> = r.iter().map(|&x| model.lambda(x)).collect();
        if let Some(i) = lambda.iter().position(|l| !(*l > 0.0) || !l.is_finite()) {
            return Err(Error::Domain(format!(
                "λ is not positive and finite at r = {}",
                r[i]
            )));
        }
        Ok(Self {
            sigma: r.iter().map(|&x| model.sigma(x).0).collect(),
            p_rad: r.iter().map(|&x| model.p_rad(x)).collect(),
            p_tan: r.iter().map(|&x| model.p_tan(x)).collect(),
            h: r.iter().map(|&x| model.h(x)).collect(),
            lambda,
            r,
            model,
        })
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.r[1] - self.r[0]
    }
}

/// Sampled `θ − h`, optionally backed by the closed-form model.
#[derive(Clone, Debug)]
pub struct RadialProfile {
    pub r: Vec<f64>,
    pub values: Vec<f64>,
    source: Option<(SphericalModel, Orientation)>,
}

impl RadialProfile {
    /// Profile known only through its samples; roots are located on the
    /// piecewise-linear interpolant.
    pub fn from_samples(r: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if r.len() != values.len() || r.len() < 2 || r.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain(
                "profile needs at least two increasing radii".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("profile values must be finite".into()));
        }
        Ok(Self {
            r,
            values,
            source: None,
        })
    }

    fn eval(&self, x: f64, k: usize) -> f64 {
        match self.source {
            Some((m, o)) => m.theta_minus_h(x, o),
            None => {
                let t = (x - self.r[k]) / (self.r[k + 1] - self.r[k]);
                (1.0 - t) * self.values[k] + t * self.values[k + 1]
            }
        }
    }

    fn areal(&self, x: f64) -> f64 {
        self.source.map_or(x, |(m, _)| m.areal_radius(x))
    }

    pub fn to_csv(&self, out: impl std::io::Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["r", "theta_minus_h"])?;
        for (r, v) in self.r.iter().zip(&self.values) {
            w.write_record([format!("{r:e}"), format!("{v:e}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `θ − h` on every coordinate sphere of the grid.
pub fn theta_profile(data: &SphericalData, orientation: Orientation) -> RadialProfile {
    let values = data
        .r
        .iter()
        .map(|&r| data.model.theta_minus_h(r, orientation))
        .collect();
    RadialProfile {
        r: data.r.clone(),
        values,
        source: Some((data.model, orientation)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PneRadius {
    /// Coordinate radius.
    pub radius: f64,
    pub areal_radius: f64,
    /// `d(θ − h)/dr` at the root.
    pub slope: f64,
    /// Tangential root (`|slope| < 10⁻⁶`).
    pub degenerate: bool,
}

/// Roots of `θ − h`, one per sign-change bracket, ascending.
pub fn find_pne_radii(profile: &RadialProfile) -> Vec<PneRadius> {
    let (r, v) = (&profile.r, &profile.values);
    let scale = v
        .iter()
        .fold(0.0f64, |a, x| a.max(x.abs()))
        .max(f64::MIN_POSITIVE);
    let tol = 1e-10 * scale;
    let mut roots: Vec<PneRadius> = Vec::new();
    let mut push = |x: f64| {
        let hstep = 1e-6 * (r[r.len() - 1] - r[0]);
        let (a, b) = ((x - hstep).max(r[0]), (x + hstep).min(r[r.len() - 1]));
        let cell = |y: f64| {
            let j = r.partition_point(|ri| *ri <= y);
            j.saturating_sub(1).min(r.len() - 2)
        };
        let slope = (profile.eval(b, cell(b)) - profile.eval(a, cell(a))) / (b - a);
        if roots
            .last()
            .is_some_and(|p| (p.radius - x).abs() <= 1e-12 * x.abs().max(1.0))
        {
            return;
        }
        roots.push(PneRadius {
            radius: x,
            areal_radius: profile.areal(x),
            slope,
            degenerate: slope.abs() < 1e-6,
        });
    };
    for k in 0..r.len() - 1 {
        if v[k] == 0.0 {
            push(r[k]);
            continue;
        }
        if v[k + 1] == 0.0 {
            if k + 2 == r.len() {
                push(r[k + 1]);
            }
            continue;
        }
        if (v[k] > 0.0) == (v[k + 1] > 0.0) {
            continue;
        }
        let (mut a, mut b) = (r[k], r[k + 1]);
        let fa_pos = v[k] > 0.0;
        let mut x = 0.5 * (a + b);
        for _ in 0..200 {
            x = 0.5 * (a + b);
            let fx = profile.eval(x, k);
            if fx == 0.0 || (fx.abs() < tol && b - a < 1e-14 * x.abs().max(1.0)) {
                break;
            }
            if (fx > 0.0) == fa_pos {
                a = x;
            } else {
                b = x;
            }
            if b - a <= 2.0 * f64::EPSILON * x.abs().max(1.0) {
                x = 0.5 * (a + b);
                break;
            }
        }
        push(x);
    }
    roots
}

/// Boundary conditions of the radial Jang equation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RadialBoundary {
    Dirichlet { inner: f64, outer: f64 },
    ZeroSlope,
}

#[derive(Clone, Debug)]
pub struct JangOdeSolution {
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub tau: f64,
    pub residual: f64,
    pub history: Vec<NewtonStep>,
}

impl JangOdeSolution {
    /// `|Du|_g` at the midpoints between nodes, with their radii.
    pub fn gradient_norms(&self, data: &SphericalData) -> Vec<(f64, f64)> {
        let dr = data.spacing();
        self.u
            .windows(2)
            .zip(data.r.windows(2))
            .map(|(u, r)| {
                let rm = 0.5 * (r[0] + r[1]);
                (
                    rm,
                    ((u[1] - u[0]) / dr).abs() / data.model.lambda(rm).sqrt(),
                )
            })
            .collect()
    }

    /// Coordinate radius where `|Du|_g` is largest.
    pub fn steepest_radius(&self, data: &SphericalData) -> f64 {
        self.gradient_norms(data)
            .into_iter()
            .fold((0.0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc })
            .0
    }

    pub fn sup_abs(&self) -> f64 {
        self.u.iter().fold(0.0f64, |a, x| a.max(x.abs()))
    }
}

struct RadialStencil<'a> {
    data: &'a SphericalData,
    tau: f64,
    bc: RadialBoundary,
    half_lambda: Vec<f64>,
    half_area: Vec<f64>,
    node_area: Vec<f64>,
}

impl<'a> RadialStencil<'a> {
    fn new(data: &'a SphericalData, tau: f64, bc: RadialBoundary) -> Self {
        let dr = data.spacing();
        let m = &data.model;
        let e = (m.n - 1) as i32;
        let halves: Vec<f64> = (0..=data.len())
            .map(|k| data.r[0] + (k as f64 - 0.5) * dr)
            .collect();
        Self {
            data,
            tau,
            bc,
            half_lambda: halves.iter().map(|&x| m.lambda(x)).collect(),
            half_area: halves.iter().map(|&x| m.sigma(x).0.powi(e)).collect(),
            node_area: data.sigma.iter().map(|s| s.powi(e)).collect(),
        }
    }

    /// Columns of the three stencil slots of row `i`.
    fn columns(&self, i: usize) -> [usize; 3] {
        let last = self.data.len() - 1;
        match (i, self.bc) {
            (0, RadialBoundary::ZeroSlope) => [1, 0, 1],
            (i, RadialBoundary::ZeroSlope) if i == last => [last - 1, last, last - 1],
            (0, _) => [0, 0, 1],
            (i, _) if i == last => [last - 1, last, last],
            (i, _) => [i - 1, i, i + 1],
        }
    }

    fn row<D: Real>(&self, i: usize, um: D, u0: D, up: D) -> D {
        let d = self.data;
        let last = d.len() - 1;
        if let RadialBoundary::Dirichlet { inner, outer } = self.bc {
            if i == 0 {
                return u0 - c::<D>(inner);
            }
            if i == last {
                return u0 - c::<D>(outer);
            }
        }
        let dr = d.spacing();
        let flux = |k: usize, a: D, b: D| {
            let du = (b - a) * c::<D>(1.0 / dr);
            let lam = self.half_lambda[k];
            let w = (D::one() + du * du * c::<D>(1.0 / lam)).sqrt();
            du * c::<D>(self.half_area[k] / lam.sqrt()) / w
        };
        let lam = d.lambda[i];
        let div = (flux(i + 1, u0, up) - flux(i, um, u0))
            * c::<D>(1.0 / (dr * lam.sqrt() * self.node_area[i]));
        let du = (up - um) * c::<D>(0.5 / dr);
        let w2 = D::one() + du * du * c::<D>(1.0 / lam);
        let n = d.model.n as f64;
        div + c::<D>(d.p_rad[i] / lam) / w2 + c::<D>((n - 1.0) * d.p_tan[i])
            - u0 * c::<D>(self.tau)
            - c::<D>(d.h[i])
    }

    fn residual(&self, u: &[f64]) -> Vec<f64> {
        (0..u.len())
            .map(|i| {
                let [a, b, cc] = self.columns(i);
                self.row(i, u[a], u[b], u[cc])
            })
            .collect()
    }

    fn jacobian(&self, u: &[f64]) -> CsrMatrix {
        let mut trip = Vec::with_capacity(3 * u.len());
        for i in 0..u.len() {
            let cols = self.columns(i);
            let v = self.row::<DualSVec64<3>>(
                i,
                seed::<3>(u[cols[0]], 0),
                seed::<3>(u[cols[1]], 1),
                seed::<3>(u[cols[2]], 2),
            );
            for (s, &col) in cols.iter().enumerate() {
                let dv = slot::<3>(&v, s);
                if dv != 0.0 {
                    trip.push((i, col, dv));
                }
            }
        }
        CsrMatrix::from_triplets(u.len(), u.len(), trip)
    }
}

/// Residual of the discrete radial Jang equation at `u`.
pub fn jang_ode_residual(
    data: &SphericalData,
    tau: f64,
    bc: RadialBoundary,
    u: &[f64],
) -> Result<Vec<f64>> {
    if u.len() != data.len() {
        return Err(Error::Domain("u does not match the radial grid".into()));
    }
    Ok(RadialStencil::new(data, tau, bc).residual(u))
}

/// Damped Newton solve of the radial Jang equation
/// `div(Du/√(1+|Du|²)) + (g^{ij} − u^i u^j/(1+|Du|²)) p_ij − τ u − h = 0`.
pub fn jang_ode_solve(
    data: &SphericalData,
    tau: f64,
    bc: RadialBoundary,
    opts: &NewtonOptions,
    initial: Option<&[f64]>,
) -> Result<JangOdeSolution> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::Domain(format!("τ = {tau} must be positive")));
    }
    let x0 = match initial {
        Some(u) if u.len() == data.len() => u.to_vec(),
        Some(_) => {
            return Err(Error::Domain(
                "initial guess does not match the radial grid".into(),
            ))
        }
        None => vec![0.0; data.len()],
    };
    let st = RadialStencil::new(data, tau, bc);
    let out = damped_newton(
        "radial-jang",
        x0,
        opts,
        |u| Ok(st.residual(u)),
        |u| Ok(st.jacobian(u)),
        |_| {},
    )?;
    Ok(JangOdeSolution {
        r: data.r.clone(),
        u: out.x,
        tau,
        residual: out.residual,
        history: out.history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(c: f64, h: f64) -> SphericalModel {
        SphericalModel {
            n: 3,
            metric: RadialMetric::Flat,
            c,
            h: HSpec::Value(h),
        }
    }

    #[test]
    fn isotropic_and_areal_agree_on_mean_curvature() {
        let iso = SphericalModel {
            n: 3,
            metric: RadialMetric::SchwarzschildIsotropic { mass: 1.0 },
            c: 0.0,
            h: HSpec::Value(0.0),
        };
        let are = SphericalModel {
            metric: RadialMetric::SchwarzschildAreal { mass: 1.0 },
            ..iso
        };
        for rho in [0.6, 1.0, 3.0] {
            let r = iso.areal_radius(rho);
            let a = iso.mean_curvature(rho, Orientation::Positive);
            let b = are.mean_curvature(r, Orientation::Positive);
            assert!((a - b).abs() < 1e-13, "{a} {b}");
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let m = SphericalModel {
            n: 3,
            metric: RadialMetric::SchwarzschildIsotropic { mass: 1.0 },
            c: 0.1,
            h: HSpec::Value(0.2),
        };
        let d = SphericalData::new(m, 0.3, 1.5, 41).unwrap();
        for bc in [
            RadialBoundary::Dirichlet {
                inner: 1.0,
                outer: -1.0,
            },
            RadialBoundary::ZeroSlope,
        ] {
            let st = RadialStencil::new(&d, 0.5, bc);
            let u: Vec<f64> = d.r.iter().map(|r| (3.0 * r).sin()).collect();
            let du: Vec<f64> = d.r.iter().map(|r| (7.0 * r).cos()).collect();
            let jdu = st.jacobian(&u).mul_vec(&du);
            let eps = 1e-6;
            let plus: Vec<f64> = u.iter().zip(&du).map(|(a, b)| a + eps * b).collect();
            let minus: Vec<f64> = u.iter().zip(&du).map(|(a, b)| a - eps * b).collect();
            let (rp, rm) = (st.residual(&plus), st.residual(&minus));
            for i in 0..u.len() {
                let fd = (rp[i] - rm[i]) / (2.0 * eps);
                assert!(
                    (fd - jdu[i]).abs() < 1e-6 * (1.0 + jdu[i].abs()),
                    "{i}: {fd} {}",
                    jdu[i]
                );
            }
        }
    }

    #[test]
    fn zero_slope_constant_solution() {
        let d = SphericalData::new(flat(0.0, 0.3), 1.0, 3.0, 51).unwrap();
        let s = jang_ode_solve(
            &d,
            2.0,
            RadialBoundary::ZeroSlope,
            &NewtonOptions::default(),
            None,
        )
        .unwrap();
        assert!(s.u.iter().all(|u| (u + 0.15).abs() < 1e-12));
    }

    #[test]
    fn profile_csv() {
        let d = SphericalData::new(flat(0.0, 0.0), 1.0, 2.0, 5).unwrap();
        let mut buf = Vec::new();
        theta_profile(&d, Orientation::Positive)
            .to_csv(&mut buf)
            .unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("r,theta_minus_h\n1e0,2e0\n"));
    }
}
