use std::f64::consts::PI;
use std::sync::Arc;

use super::kernel::{
    blend, height_stencil, kernel, AmbientAt, GraphFrame, KernelError, KernelOut, Local, MAX_BASE,
};
use super::{Orientation, Surface};
use crate::chart::{Chart, Topology};
use crate::error::{Error, Result};
use crate::fields::{
    metric_scalar_curvature, AmbientGeometry, InitialDataSet, MetricJet, PointGeometry,
    SymTensorField,
};
use crate::fv;
use crate::linalg::{Real, SquareMat, MAX_DIM};
use crate::par::try_map_nodes;

/// Ambient data prepared for repeated surface evaluations.
pub struct SurfaceContext<'a> {
    pub data: &'a InitialDataSet,
    pub ambient: Arc<AmbientGeometry>,
    pub base: Arc<Chart>,
    pub frame: GraphFrame,
}

impl<'a> SurfaceContext<'a> {
    pub fn new(data: &'a InitialDataSet) -> Result<Self> {
        Self::with_ambient(data, Arc::new(data.geometry()?))
    }

    pub fn with_ambient(data: &'a InitialDataSet, ambient: Arc<AmbientGeometry>) -> Result<Self> {
        let (base, height) = data.chart().graph_split()?;
        Ok(Self {
            data,
            ambient,
            base: Arc::new(base),
            frame: GraphFrame::new(data.n, height),
        })
    }

    pub fn chart(&self) -> &Chart {
        self.data.chart()
    }

    /// Interpolation weights and the four ambient points around a height.
    pub fn ambient_at<D: Real>(
        &self,
        b: usize,
        height: D,
    ) -> Result<(AmbientAt<D>, [PointGeometry; 4], [f64; 4])> {
        let chart = self.chart();
        let (idx, w) =
            height_stencil(chart, self.frame.height, height).ok_or(Error::OutOfChart {
                node: b,
                height: height.re(),
            })?;
        let pts = idx.map(|k| {
            self.ambient
                .point(chart.graph_node(&self.base, b, self.frame.height, k))
        });
        let amb = blend(self.frame.n, &pts, &w);
        Ok((amb, pts, w.map(|x| x.re())))
    }

    /// Height and its base derivatives at node `b`.
    pub fn local(&self, heights: &[f64], b: usize) -> Local<f64> {
        let base = &self.base;
        let m = base.multi(b);
        let d = self.frame.d;
        let mut loc = Local {
            f: heights[b],
            df: [0.0; MAX_BASE],
            ddf: [[0.0; MAX_BASE]; MAX_BASE],
        };
        for a in 0..d {
            loc.df[a] = base.d1(&m, a).apply(heights, 1, 0, 1.0);
            for c in a..d {
                let v = base.d2(&m, a, c).apply(heights, 1, 0, 1.0);
                loc.ddf[a][c] = v;
                loc.ddf[c][a] = v;
            }
        }
        loc
    }

    /// Pointwise kernel at base node `b` for a local height jet.
    pub fn kernel_at<D: Real>(
        &self,
        b: usize,
        sign: f64,
        loc: &Local<D>,
    ) -> Result<(KernelOut<D>, AmbientAt<D>)> {
        let (amb, _, _) = self.ambient_at(b, loc.f)?;
        let k = kernel(&self.frame, sign, loc, &amb).map_err(|e| match e {
            KernelError::AmbientMetric => Error::NotPositiveDefinite { node: b },
            KernelError::Tangent => Error::DegenerateSurface { node: b },
        })?;
        Ok((k, amb))
    }

    /// `θ − h` at base node `b`.
    pub fn theta_minus_h<D: Real>(&self, b: usize, sign: f64, loc: &Local<D>) -> Result<D> {
        let (k, amb) = self.kernel_at(b, sign, loc)?;
        Ok(k.theta - amb.h)
    }

    pub fn geometry(&self, surface: &Surface) -> Result<SurfaceGeometry> {
        let (base, _, heights) = surface.heights_on(self.chart())?;
        debug_assert_eq!(base.as_ref(), self.base.as_ref());
        self.geometry_of_heights(&heights, surface.orientation())
    }

    pub fn geometry_of_heights(
        &self,
        heights: &[f64],
        orientation: Orientation,
    ) -> Result<SurfaceGeometry> {
        let sign = orientation.sign();
        let (n, d) = (self.frame.n, self.frame.d);
        let mut points = try_map_nodes(self.base.len(), |b| {
            let loc = self.local(heights, b);
            let (k, amb) = self.kernel_at(b, sign, &loc)?;
            let (_, pts, w) = self.ambient_at(b, loc.f)?;
            Ok(SurfacePoint::from_kernel(
                n, d, heights[b], &k, &amb, &pts, &w,
            ))
        })?;

        // intrinsic curvature
        match self.base.topology() {
            Topology::LatLongSphere => {
                for p in points.iter_mut() {
                    let mut a2 = 0.0;
                    for a in 0..d {
                        for b in 0..d {
                            for c in 0..d {
                                for e in 0..d {
                                    a2 += p.metric_inv[a][c]
                                        * p.metric_inv[b][e]
                                        * p.second[a][b]
                                        * p.second[c][e];
                                }
                            }
                        }
                    }
                    p.scalar_sigma = p.ambient_scalar - 2.0 * p.ric_nu_nu + p.mean * p.mean - a2;
                    p.ricci_norm = p.scalar_sigma.abs() / (d as f64).sqrt();
                }
            }
            _ => {
                let metric = SymTensorField::from_fn(self.base.clone(), |b| points[b].metric)?;
                let r = metric_scalar_curvature(&metric)?;
                let ric = try_map_nodes(self.base.len(), |b| {
                    let (ric, _) = MetricJet::at(&metric, b)?.ricci_and_scalar();
                    let gi = &points[b].metric_inv;
                    let mut s = 0.0;
                    for a in 0..d {
                        for bb in 0..d {
                            for c in 0..d {
                                for e in 0..d {
                                    s += gi[a][c] * gi[bb][e] * ric[a][bb] * ric[c][e];
                                }
                            }
                        }
                    }
                    Ok(s.max(0.0).sqrt())
                })?;
                for (b, p) in points.iter_mut().enumerate() {
                    p.scalar_sigma = r.get(b);
                    p.ricci_norm = ric[b];
                }
            }
        }

        // divergence of W
        let flux: Vec<[f64; MAX_DIM]> = points
            .iter()
            .map(|p| {
                let mut f = [0.0; MAX_DIM];
                for a in 0..d {
                    f[a] = p.sqrt_det * p.w_vec[a];
                }
                f
            })
            .collect();
        let sqrt_g: Vec<f64> = points.iter().map(|p| p.sqrt_det).collect();
        let div = fv::divergence(&self.base, &flux, &sqrt_g);
        for (p, dv) in points.iter_mut().zip(div) {
            p.div_w = dv;
            p.q = 0.5 * p.scalar_sigma - p.mu - p.j_nu - 0.5 * p.chi_norm2;
        }
        Ok(SurfaceGeometry {
            base: self.base.clone(),
            n,
            orientation,
            heights: heights.to_vec(),
            points,
        })
    }
}

/// Geometry at one surface node.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfacePoint {
    pub height: f64,
    /// Induced metric `γ_ab`.
    pub metric: SquareMat<f64>,
    pub metric_inv: SquareMat<f64>,
    pub sqrt_det: f64,
    pub tangents: [[f64; MAX_DIM]; MAX_BASE],
    pub nu_cov: [f64; MAX_DIM],
    pub nu_vec: [f64; MAX_DIM],
    /// Second fundamental form `A_ab`.
    pub second: SquareMat<f64>,
    pub mean: f64,
    pub trp: f64,
    pub trp_sigma: f64,
    pub theta: f64,
    pub chi: SquareMat<f64>,
    pub chi0: SquareMat<f64>,
    pub chi_norm2: f64,
    pub chi0_norm2: f64,
    /// `p(ν, e_a)`
    pub w_cov: [f64; MAX_DIM],
    /// `W^a`
    pub w_vec: [f64; MAX_DIM],
    pub w_norm2: f64,
    pub div_w: f64,
    pub h: f64,
    pub nu_h: f64,
    pub mu: f64,
    pub j_nu: f64,
    pub ambient_scalar: f64,
    pub ric_nu_nu: f64,
    pub scalar_sigma: f64,
    pub ricci_norm: f64,
    pub q: f64,
}

impl SurfacePoint {
    fn from_kernel(
        n: usize,
        d: usize,
        height: f64,
        k: &KernelOut<f64>,
        amb: &AmbientAt<f64>,
        pts: &[PointGeometry; 4],
        w: &[f64; 4],
    ) -> Self {
        let lerp = |f: &dyn Fn(&PointGeometry) -> f64| {
            pts.iter().zip(w).map(|(p, wk)| wk * f(p)).sum::<f64>()
        };
        let mu = lerp(&|p| p.mu);
        let ambient_scalar = lerp(&|p| p.scalar);
        let mut j_nu = 0.0;
        let mut ric_nu_nu = 0.0;
        let mut nu_h = 0.0;
        for i in 0..n {
            j_nu += lerp(&|p| p.j[i]) * k.nu_vec[i];
            nu_h += amb.dh[i] * k.nu_vec[i];
            for jj in 0..n {
                ric_nu_nu += lerp(&|p| p.ricci[i][jj]) * k.nu_vec[i] * k.nu_vec[jj];
            }
        }
        let mut chi = [[0.0; MAX_DIM]; MAX_DIM];
        let mut w_cov = [0.0; MAX_DIM];
        for a in 0..d {
            for b in 0..d {
                let mut ps = 0.0;
                for i in 0..n {
                    for jj in 0..n {
                        ps += amb.p[i][jj] * k.e[a][i] * k.e[b][jj];
                    }
                }
                chi[a][b] = ps + k.second[a][b];
            }
            for i in 0..n {
                for jj in 0..n {
                    w_cov[a] += amb.p[i][jj] * k.nu_vec[i] * k.e[a][jj];
                }
            }
        }
        let gi = &k.metric_inv;
        let mut tr_chi = 0.0;
        let mut w_vec = [0.0; MAX_DIM];
        for a in 0..d {
            for b in 0..d {
                tr_chi += gi[a][b] * chi[a][b];
                w_vec[a] += gi[a][b] * w_cov[b];
            }
        }
        let mut chi0 = chi;
        for a in 0..d {
            for b in 0..d {
                chi0[a][b] -= tr_chi / d as f64 * k.metric[a][b];
            }
        }
        let norm2 = |t: &SquareMat<f64>| {
            let mut s = 0.0;
            for a in 0..d {
                for b in 0..d {
                    for c in 0..d {
                        for e in 0..d {
                            s += gi[a][c] * gi[b][e] * t[a][b] * t[c][e];
                        }
                    }
                }
            }
            s
        };
        let w_norm2 = (0..d).map(|a| w_cov[a] * w_vec[a]).sum();
        Self {
            height,
            metric: k.metric,
            metric_inv: k.metric_inv,
            sqrt_det: k.metric_det.sqrt(),
            tangents: k.e,
            nu_cov: k.nu_cov,
            nu_vec: k.nu_vec,
            second: k.second,
            mean: k.mean,
            trp: k.trp,
            trp_sigma: k.trp_sigma,
            theta: k.theta,
            chi_norm2: norm2(&chi),
            chi0_norm2: norm2(&chi0),
            chi,
            chi0,
            w_cov,
            w_vec,
            w_norm2,
            div_w: 0.0,
            h: amb.h,
            nu_h,
            mu,
            j_nu,
            ambient_scalar,
            ric_nu_nu,
            scalar_sigma: 0.0,
            ricci_norm: 0.0,
            q: 0.0,
        }
    }

    /// `g_Σ`-trace of `χ⁰`.
    pub fn chi0_trace(&self, d: usize) -> f64 {
        let mut s = 0.0;
        for a in 0..d {
            for b in 0..d {
                s += self.metric_inv[a][b] * self.chi0[a][b];
            }
        }
        s
    }

    pub fn chi_trace(&self, d: usize) -> f64 {
        let mut s = 0.0;
        for a in 0..d {
            for b in 0..d {
                s += self.metric_inv[a][b] * self.chi[a][b];
            }
        }
        s
    }
}

/// Induced and extrinsic geometry at every node of a surface.
#[derive(Clone, Debug)]
pub struct SurfaceGeometry {
    pub base: Arc<Chart>,
    pub n: usize,
    pub orientation: Orientation,
    pub heights: Vec<f64>,
    pub points: Vec<SurfacePoint>,
}

impl SurfaceGeometry {
    pub fn dim(&self) -> usize {
        self.n - 1
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn field(&self, f: impl Fn(&SurfacePoint) -> f64) -> Vec<f64> {
        self.points.iter().map(f).collect()
    }

    pub fn area(&self) -> f64 {
        let q = fv::quadrature(&self.base);
        self.points
            .iter()
            .zip(&q)
            .map(|(p, w)| p.sqrt_det * w)
            .sum()
    }

    /// Radius of the round 2-sphere with the same area.
    pub fn areal_radius(&self) -> f64 {
        (self.area() / (4.0 * PI)).sqrt()
    }

    /// Area-weighted mean of a nodal field.
    pub fn mean_of(&self, values: &[f64]) -> f64 {
        let q = fv::quadrature(&self.base);
        let mut s = 0.0;
        let mut a = 0.0;
        for ((p, w), v) in self.points.iter().zip(&q).zip(values) {
            s += p.sqrt_det * w * v;
            a += p.sqrt_det * w;
        }
        s / a
    }
}

/// Geometry of `surface` in `data`.
pub fn induced_geometry(surface: &Surface, data: &InitialDataSet) -> Result<SurfaceGeometry> {
    SurfaceContext::new(data)?.geometry(surface)
}

/// `θ = H + tr_Σ p` at every node.
pub fn null_expansion(geom: &SurfaceGeometry) -> Vec<f64> {
    geom.field(|p| p.theta)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShearPotential {
    /// `W^a` per node.
    pub w: Vec<[f64; MAX_DIM]>,
    pub div_w: Vec<f64>,
    pub w_norm2: Vec<f64>,
    pub q: Vec<f64>,
}

pub fn shear_and_potential(geom: &SurfaceGeometry) -> ShearPotential {
    ShearPotential {
        w: geom.points.iter().map(|p| p.w_vec).collect(),
        div_w: geom.field(|p| p.div_w),
        w_norm2: geom.field(|p| p.w_norm2),
        q: geom.field(|p| p.q),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BarrierMargins {
    /// `H + (tr_Σ p − h)` on the inner boundary, normal out of the shell (inward).
    pub inner: Vec<f64>,
    /// `H − (tr_Σ p − h)` on the outer boundary, normal outward.
    pub outer: Vec<f64>,
    pub min_inner: f64,
    pub min_outer: f64,
    pub holds: bool,
}

/// Barrier margins of the shell between `inner` and `outer`, each computed
/// with the normal pointing out of the shell.
pub fn barrier_margins(
    inner: &Surface,
    outer: &Surface,
    data: &InitialDataSet,
) -> Result<BarrierMargins> {
    let ctx = SurfaceContext::new(data)?;
    let (_, _, hi) = inner.heights_on(ctx.chart())?;
    let (_, _, ho) = outer.heights_on(ctx.chart())?;
    if let Some(node) = hi.iter().zip(&ho).position(|(a, b)| a >= b) {
        return Err(Error::InvalidShell { node });
    }
    let gi = ctx.geometry_of_heights(&hi, Orientation::Negative)?;
    let go = ctx.geometry_of_heights(&ho, Orientation::Positive)?;
    let inner: Vec<f64> = gi.field(|p| p.mean + (p.trp_sigma - p.h));
    let outer: Vec<f64> = go.field(|p| p.mean - (p.trp_sigma - p.h));
    let min_inner = inner.iter().copied().fold(f64::INFINITY, f64::min);
    let min_outer = outer.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(BarrierMargins {
        holds: min_inner > 0.0 && min_outer > 0.0,
        inner,
        outer,
        min_inner,
        min_outer,
    })
}
