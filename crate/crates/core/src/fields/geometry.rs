use std::sync::Arc;

use super::{InitialDataSet, MuConvention, ScalarField, SymTensorField, DEGENERATE_DET};
use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::linalg::{invert_spd, sym_index, sym_len, zeros2, zeros3, Rank3, SquareMat, MAX_DIM};
use crate::par::try_map_nodes;

pub type Rank4 = [[[[f64; MAX_DIM]; MAX_DIM]; MAX_DIM]; MAX_DIM];

/// Value and coordinate derivatives of a symmetric tensor at one node:
/// `d[k][i][j] = ∂_k T_ij`, `dd[k][l][i][j] = ∂_k ∂_l T_ij`.
#[derive(Clone, Debug)]
pub struct TensorJet {
    pub v: SquareMat<f64>,
    pub d: Rank3<f64>,
    pub dd: Rank4,
}

/// Finite-difference jets of a symmetric tensor field.
///
/// Components are differenced after division by the chart scale factors and
/// restored with the exact product rule, which keeps lat-long charts second
/// order up to the poles.
pub(crate) struct SymJetter<'a> {
    chart: &'a Chart,
    vals: &'a [f64],
    dim: usize,
    scales: Vec<[f64; MAX_DIM]>,
}

impl<'a> SymJetter<'a> {
    pub fn new(field: &'a SymTensorField) -> Self {
        let chart = field.chart().as_ref();
        let scales = (0..chart.len())
            .map(|n| chart.scale_jet(&chart.coords(n)).s)
            .collect();
        Self {
            chart,
            vals: field.values(),
            dim: chart.dim(),
            scales,
        }
    }

    fn hat(&self, node: usize, i: usize, j: usize) -> f64 {
        let k = sym_len(self.dim);
        let s = &self.scales[node];
        self.vals[node * k + sym_index(self.dim, i, j)] / (s[i] * s[j])
    }

    pub fn jet(&self, node: usize, second: bool) -> TensorJet {
        let d = self.dim;
        let c = self.chart;
        let m = c.multi(node);
        let mut hv = zeros2::<f64>();
        let mut hd = zeros3::<f64>();
        let mut hdd: Rank4 = [[[[0.0; MAX_DIM]; MAX_DIM]; MAX_DIM]; MAX_DIM];
        let mut parity = zeros2::<f64>();
        for i in 0..d {
            for j in i..d {
                parity[i][j] = c.component_parity(&[i, j]);
                hv[i][j] = self.hat(node, i, j);
            }
        }
        for k in 0..d {
            let st = c.d1(&m, k);
            for i in 0..d {
                for j in i..d {
                    hd[k][i][j] = st
                        .entries()
                        .iter()
                        .map(|&(n, w, r)| {
                            w * self.hat(n, i, j) * if r { parity[i][j] } else { 1.0 }
                        })
                        .sum();
                }
            }
        }
        if second {
            for k in 0..d {
                for l in k..d {
                    let st = c.d2(&m, k, l);
                    for i in 0..d {
                        for j in i..d {
                            let v: f64 = st
                                .entries()
                                .iter()
                                .map(|&(n, w, r)| {
                                    w * self.hat(n, i, j) * if r { parity[i][j] } else { 1.0 }
                                })
                                .sum();
                            hdd[k][l][i][j] = v;
                            hdd[l][k][i][j] = v;
                        }
                    }
                }
            }
        }
        let sj = c.scale_jet(&c.coords(node));
        let (s, ds, dds) = (sj.s, sj.ds, sj.dds);
        let mut jet = TensorJet {
            v: zeros2(),
            d: zeros3(),
            dd: [[[[0.0; MAX_DIM]; MAX_DIM]; MAX_DIM]; MAX_DIM],
        };
        for i in 0..d {
            for j in i..d {
                let sij = s[i] * s[j];
                let dsij = |k: usize| ds[i][k] * s[j] + s[i] * ds[j][k];
                let v = sij * hv[i][j];
                jet.v[i][j] = v;
                jet.v[j][i] = v;
                for k in 0..d {
                    let dv = dsij(k) * hv[i][j] + sij * hd[k][i][j];
                    jet.d[k][i][j] = dv;
                    jet.d[k][j][i] = dv;
                    if second {
                        for l in 0..d {
                            let ddsij = dds[i][k][l] * s[j]
                                + ds[i][k] * ds[j][l]
                                + ds[i][l] * ds[j][k]
                                + s[i] * dds[j][k][l];
                            let ddv = ddsij * hv[i][j]
                                + dsij(k) * hd[l][i][j]
                                + dsij(l) * hd[k][i][j]
                                + sij * hdd[k][l][i][j];
                            jet.dd[k][l][i][j] = ddv;
                            jet.dd[k][l][j][i] = ddv;
                        }
                    }
                }
            }
        }
        jet
    }
}

/// Scalar value with first derivatives.
pub(crate) fn scalar_gradient(chart: &Chart, values: &[f64], node: usize) -> [f64; MAX_DIM] {
    let m = chart.multi(node);
    let mut g = [0.0; MAX_DIM];
    for (k, gk) in g.iter_mut().enumerate().take(chart.dim()) {
        *gk = chart.d1(&m, k).apply(values, 1, 0, 1.0);
    }
    g
}

/// Metric with first and second derivatives at a node.
#[derive(Clone, Debug)]
pub struct MetricJet {
    pub dim: usize,
    pub g: SquareMat<f64>,
    pub ginv: SquareMat<f64>,
    pub det: f64,
    pub dg: Rank3<f64>,
    pub ddg: Rank4,
}

impl MetricJet {
    pub fn at(g: &SymTensorField, node: usize) -> Result<Self> {
        Self::from_jet(g.dim(), SymJetter::new(g).jet(node, true), node)
    }

    pub(crate) fn from_jet(dim: usize, jet: TensorJet, node: usize) -> Result<Self> {
        let (ginv, det) = invert_spd(&jet.v, dim).ok_or(Error::NotPositiveDefinite { node })?;
        if det < DEGENERATE_DET {
            return Err(Error::DegenerateMetric { node, det });
        }
        Ok(Self {
            dim,
            g: jet.v,
            ginv,
            det,
            dg: jet.d,
            ddg: jet.dd,
        })
    }

    /// `Γ_lij = ½(∂_i g_lj + ∂_j g_li − ∂_l g_ij)`
    fn christoffel_first(&self) -> Rank3<f64> {
        let d = self.dim;
        let mut c = zeros3();
        for l in 0..d {
            for i in 0..d {
                for j in 0..d {
                    c[l][i][j] = 0.5 * (self.dg[i][l][j] + self.dg[j][l][i] - self.dg[l][i][j]);
                }
            }
        }
        c
    }

    /// `Γ^k_ij` indexed `[k][i][j]`.
    pub fn christoffel(&self) -> Rank3<f64> {
        let d = self.dim;
        let first = self.christoffel_first();
        let mut c = zeros3();
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    c[k][i][j] = (0..d).map(|l| self.ginv[k][l] * first[l][i][j]).sum();
                }
            }
        }
        c
    }

    /// Ricci tensor and scalar curvature.
    pub fn ricci_and_scalar(&self) -> (SquareMat<f64>, f64) {
        let d = self.dim;
        let first = self.christoffel_first();
        let gam = self.christoffel();
        // ∂_m g^{kl} = −g^{ka} ∂_m g_ab g^{bl}
        let mut dginv = zeros3::<f64>();
        for m in 0..d {
            for k in 0..d {
                for l in 0..d {
                    let mut s = 0.0;
                    for a in 0..d {
                        for b in 0..d {
                            s -= self.ginv[k][a] * self.dg[m][a][b] * self.ginv[b][l];
                        }
                    }
                    dginv[m][k][l] = s;
                }
            }
        }
        // dgam[m][k][i][j] = ∂_m Γ^k_ij
        let mut dgam: Rank4 = [[[[0.0; MAX_DIM]; MAX_DIM]; MAX_DIM]; MAX_DIM];
        for m in 0..d {
            for i in 0..d {
                for j in 0..d {
                    let mut dfirst = [0.0; MAX_DIM];
                    for (l, v) in dfirst.iter_mut().enumerate().take(d) {
                        *v = 0.5
                            * (self.ddg[m][i][l][j] + self.ddg[m][j][l][i] - self.ddg[m][l][i][j]);
                    }
                    for k in 0..d {
                        dgam[m][k][i][j] = (0..d)
                            .map(|l| dginv[m][k][l] * first[l][i][j] + self.ginv[k][l] * dfirst[l])
                            .sum();
                    }
                }
            }
        }
        let mut ric = zeros2::<f64>();
        for i in 0..d {
            for j in 0..d {
                let mut s = 0.0;
                for k in 0..d {
                    s += dgam[k][k][i][j] - dgam[j][k][i][k];
                    for l in 0..d {
                        s += gam[k][k][l] * gam[l][i][j] - gam[k][j][l] * gam[l][i][k];
                    }
                }
                ric[i][j] = s;
            }
        }
        for i in 0..d {
            for j in i + 1..d {
                let a = 0.5 * (ric[i][j] + ric[j][i]);
                ric[i][j] = a;
                ric[j][i] = a;
            }
        }
        let mut scalar = 0.0;
        for i in 0..d {
            for j in 0..d {
                scalar += self.ginv[i][j] * ric[i][j];
            }
        }
        (ric, scalar)
    }
}

/// Ambient geometry and constraint quantities at one node.
#[derive(Clone, Debug, PartialEq)]
pub struct PointGeometry {
    pub g: SquareMat<f64>,
    pub ginv: SquareMat<f64>,
    pub det: f64,
    /// `Γ^k_ij` indexed `[k][i][j]`.
    pub gamma: Rank3<f64>,
    pub ricci: SquareMat<f64>,
    pub scalar: f64,
    pub p: SquareMat<f64>,
    pub trp: f64,
    pub h: f64,
    pub dh: [f64; MAX_DIM],
    pub mu: f64,
    /// Momentum density covector.
    pub j: [f64; MAX_DIM],
    pub j_norm: f64,
    pub dh_norm: f64,
    pub dec_margin: f64,
}

impl PointGeometry {
    fn packed_len(n: usize) -> usize {
        let s = sym_len(n);
        4 * s + n * s + 2 * n + 8
    }

    fn pack(&self, n: usize, out: &mut Vec<f64>) {
        let sym = |m: &SquareMat<f64>, out: &mut Vec<f64>| {
            for i in 0..n {
                for j in i..n {
                    out.push(m[i][j]);
                }
            }
        };
        sym(&self.g, out);
        sym(&self.ginv, out);
        out.push(self.det);
        for k in 0..n {
            sym(&self.gamma[k], out);
        }
        sym(&self.ricci, out);
        out.push(self.scalar);
        sym(&self.p, out);
        out.extend_from_slice(&[self.trp, self.h]);
        out.extend_from_slice(&self.dh[..n]);
        out.push(self.mu);
        out.extend_from_slice(&self.j[..n]);
        out.extend_from_slice(&[self.j_norm, self.dh_norm, self.dec_margin]);
    }

    fn unpack(n: usize, v: &[f64]) -> Self {
        let mut at = 0;
        let mut next = || {
            at += 1;
            v[at - 1]
        };
        let sym = |next: &mut dyn FnMut() -> f64| {
            let mut m = zeros2::<f64>();
            for i in 0..n {
                for j in i..n {
                    let x = next();
                    m[i][j] = x;
                    m[j][i] = x;
                }
            }
            m
        };
        let g = sym(&mut next);
        let ginv = sym(&mut next);
        let det = next();
        let mut gamma = zeros3::<f64>();
        for gk in gamma.iter_mut().take(n) {
            *gk = sym(&mut next);
        }
        let ricci = sym(&mut next);
        let scalar = next();
        let p = sym(&mut next);
        let trp = next();
        let h = next();
        let mut dh = [0.0; MAX_DIM];
        for x in dh.iter_mut().take(n) {
            *x = next();
        }
        let mu = next();
        let mut j = [0.0; MAX_DIM];
        for x in j.iter_mut().take(n) {
            *x = next();
        }
        let j_norm = next();
        let dh_norm = next();
        let dec_margin = next();
        Self {
            g,
            ginv,
            det,
            gamma,
            ricci,
            scalar,
            p,
            trp,
            h,
            dh,
            mu,
            j,
            j_norm,
            dh_norm,
            dec_margin,
        }
    }
}

const CHUNK: usize = 1 << 14;

/// Pointwise ambient geometry for every chart node, stored packed.
#[derive(Clone, Debug)]
pub struct AmbientGeometry {
    chart: Arc<Chart>,
    n: usize,
    stride: usize,
    data: Vec<f64>,
}

impl AmbientGeometry {
    pub fn compute(data: &InitialDataSet) -> Result<Self> {
        let chart = data.chart().clone();
        let n = data.n;
        let gj = SymJetter::new(&data.g);
        let pj = SymJetter::new(&data.p);
        let hv = data.h.values();
        let mu_conv = data.conventions.mu;
        let stride = PointGeometry::packed_len(n);
        let mut packed = Vec::with_capacity(stride * chart.len());
        for start in (0..chart.len()).step_by(CHUNK) {
            let len = CHUNK.min(chart.len() - start);
            let points = try_map_nodes(len, |k| {
                let node = start + k;
                let mj = MetricJet::from_jet(n, gj.jet(node, true), node)?;
                let (ricci, scalar) = mj.ricci_and_scalar();
                let gamma = mj.christoffel();
                let pjet = pj.jet(node, false);
                let dh = scalar_gradient(&chart, hv, node);
                Ok(constraint_point(
                    n, &mj, gamma, ricci, scalar, &pjet, hv[node], dh, mu_conv,
                ))
            })?;
            for p in &points {
                p.pack(n, &mut packed);
            }
        }
        Ok(Self {
            chart,
            n,
            stride,
            data: packed,
        })
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn point(&self, node: usize) -> PointGeometry {
        PointGeometry::unpack(
            self.n,
            &self.data[node * self.stride..(node + 1) * self.stride],
        )
    }

    pub fn scalar_field(&self, f: impl Fn(&PointGeometry) -> f64) -> Result<ScalarField> {
        let values = (0..self.chart.len()).map(|n| f(&self.point(n))).collect();
        ScalarField::new(self.chart.clone(), values)
    }
}

#[allow(clippy::too_many_arguments)]
fn constraint_point(
    n: usize,
    mj: &MetricJet,
    gamma: Rank3<f64>,
    ricci: SquareMat<f64>,
    scalar: f64,
    pjet: &TensorJet,
    h: f64,
    dh: [f64; MAX_DIM],
    mu_conv: MuConvention,
) -> PointGeometry {
    let gi = &mj.ginv;
    let p = &pjet.v;
    let mut trp = 0.0;
    let mut p2 = 0.0;
    for i in 0..n {
        for j in 0..n {
            trp += gi[i][j] * p[i][j];
            for k in 0..n {
                for l in 0..n {
                    p2 += gi[i][k] * gi[j][l] * p[i][j] * p[k][l];
                }
            }
        }
    }
    let mu = match mu_conv {
        MuConvention::Standard => 0.5 * (scalar - p2 + trp * trp),
        MuConvention::Literal => 0.5 * scalar - p2 + trp * trp,
    };
    // J_j = g^{ik} ∇_k p_ij − ∂_j tr p
    let mut j_cov = [0.0; MAX_DIM];
    for (jj, out) in j_cov.iter_mut().enumerate().take(n) {
        let mut div = 0.0;
        for i in 0..n {
            for k in 0..n {
                let mut cov = pjet.d[k][i][jj];
                for l in 0..n {
                    cov -= gamma[l][k][i] * p[l][jj] + gamma[l][k][jj] * p[i][l];
                }
                div += gi[i][k] * cov;
            }
        }
        let mut dtr = 0.0;
        for i in 0..n {
            for k in 0..n {
                let mut dgi = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        dgi -= gi[i][a] * mj.dg[jj][a][b] * gi[b][k];
                    }
                }
                dtr += dgi * p[i][k] + gi[i][k] * pjet.d[jj][i][k];
            }
        }
        *out = div - dtr;
    }
    let norm = |v: &[f64; MAX_DIM]| {
        let mut s = 0.0;
        for i in 0..n {
            for k in 0..n {
                s += gi[i][k] * v[i] * v[k];
            }
        }
        s.max(0.0).sqrt()
    };
    let j_norm = norm(&j_cov);
    let dh_norm = norm(&dh);
    let nf = n as f64;
    let dec_margin =
        mu - j_norm + 0.5 * ((nf / (nf - 1.0)) * h * h - 2.0 * h * trp - 2.0 * dh_norm);
    PointGeometry {
        g: mj.g,
        ginv: mj.ginv,
        det: mj.det,
        gamma,
        ricci,
        scalar,
        p: *p,
        trp,
        h,
        dh,
        mu,
        j: j_cov,
        j_norm,
        dh_norm,
        dec_margin,
    }
}
