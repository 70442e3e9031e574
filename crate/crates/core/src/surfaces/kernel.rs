//! Pointwise graph geometry, generic over the scalar type so the same code
//! yields values and forward-mode derivatives.

use crate::chart::{AxisKind, Chart};
use crate::fields::PointGeometry;
use crate::linalg::{c, invert_spd, zeros2, Rank3, Real, SquareMat, MAX_DIM};

/// Maximal surface dimension.
pub const MAX_BASE: usize = MAX_DIM - 1;

/// Index bookkeeping for graphs `x^height = F(base coordinates)`.
#[derive(Clone, Copy, Debug)]
pub struct GraphFrame {
    pub n: usize,
    pub d: usize,
    pub height: usize,
    pub base_axes: [usize; MAX_BASE],
}

impl GraphFrame {
    pub fn new(n: usize, height: usize) -> Self {
        let mut base_axes = [0; MAX_BASE];
        let mut k = 0;
        for a in 0..n {
            if a != height {
                base_axes[k] = a;
                k += 1;
            }
        }
        Self {
            n,
            d: n - 1,
            height,
            base_axes,
        }
    }
}

/// Height function with its base derivatives at one node.
#[derive(Clone, Copy, Debug)]
pub struct Local<D> {
    pub f: D,
    pub df: [D; MAX_BASE],
    pub ddf: [[D; MAX_BASE]; MAX_BASE],
}

/// Ambient data interpolated to a surface point.
#[derive(Clone, Copy, Debug)]
pub struct AmbientAt<D> {
    pub g: SquareMat<D>,
    pub gamma: Rank3<D>,
    pub p: SquareMat<D>,
    pub h: D,
    pub dh: [D; MAX_DIM],
}

#[derive(Clone, Copy, Debug)]
pub struct KernelOut<D> {
    /// Tangent vectors `e[a][i]`.
    pub e: [[D; MAX_DIM]; MAX_BASE],
    pub ginv: SquareMat<D>,
    pub metric: SquareMat<D>,
    pub metric_inv: SquareMat<D>,
    pub metric_det: D,
    pub nu_cov: [D; MAX_DIM],
    pub nu_vec: [D; MAX_DIM],
    pub second: SquareMat<D>,
    pub mean: D,
    pub trp: D,
    pub trp_sigma: D,
    pub theta: D,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelError {
    AmbientMetric,
    Tangent,
}

/// Induced metric, unit normal, second fundamental form, mean curvature and
/// null expansion of the graph. `A(X, Y) = −⟨∇_X Y, ν⟩`, so round spheres
/// have positive mean curvature for the outward normal.
pub fn kernel<D: Real>(
    fr: &GraphFrame,
    sign: f64,
    loc: &Local<D>,
    amb: &AmbientAt<D>,
) -> Result<KernelOut<D>, KernelError> {
    let (n, d) = (fr.n, fr.d);
    let (ginv, _) = invert_spd(&amb.g, n).ok_or(KernelError::AmbientMetric)?;
    let mut e = [[D::zero(); MAX_DIM]; MAX_BASE];
    for a in 0..d {
        e[a][fr.height] = loc.df[a];
        e[a][fr.base_axes[a]] = D::one();
    }
    let mut ncov = [D::zero(); MAX_DIM];
    ncov[fr.height] = D::one();
    for a in 0..d {
        ncov[fr.base_axes[a]] = -loc.df[a];
    }
    let mut nn = D::zero();
    for i in 0..n {
        for j in 0..n {
            nn += ginv[i][j] * ncov[i] * ncov[j];
        }
    }
    let inv_norm = nn.sqrt().recip();
    let mut nu_cov = [D::zero(); MAX_DIM];
    for i in 0..n {
        nu_cov[i] = ncov[i] * inv_norm * c::<D>(sign);
    }
    let mut nu_vec = [D::zero(); MAX_DIM];
    for i in 0..n {
        for j in 0..n {
            nu_vec[i] += ginv[i][j] * nu_cov[j];
        }
    }
    let mut metric = zeros2::<D>();
    let mut second = zeros2::<D>();
    for a in 0..d {
        for b in a..d {
            let mut m = D::zero();
            let mut corr = D::zero();
            for i in 0..n {
                for j in 0..n {
                    m += amb.g[i][j] * e[a][i] * e[b][j];
                    let ee = e[a][i] * e[b][j];
                    for k in 0..n {
                        corr += ncov[k] * amb.gamma[k][i][j] * ee;
                    }
                }
            }
            metric[a][b] = m;
            metric[b][a] = m;
            let s = -(loc.ddf[a][b] + corr) * inv_norm * c::<D>(sign);
            second[a][b] = s;
            second[b][a] = s;
        }
    }
    let (metric_inv, metric_det) = invert_spd(&metric, d).ok_or(KernelError::Tangent)?;
    let mut mean = D::zero();
    for a in 0..d {
        for b in 0..d {
            mean += metric_inv[a][b] * second[a][b];
        }
    }
    let mut trp = D::zero();
    let mut pnn = D::zero();
    for i in 0..n {
        for j in 0..n {
            trp += ginv[i][j] * amb.p[i][j];
            pnn += amb.p[i][j] * nu_vec[i] * nu_vec[j];
        }
    }
    let trp_sigma = trp - pnn;
    Ok(KernelOut {
        e,
        ginv,
        metric,
        metric_inv,
        metric_det,
        nu_cov,
        nu_vec,
        second,
        mean,
        trp,
        trp_sigma,
        theta: mean + trp_sigma,
    })
}

/// Cubic Lagrange stencil along the height axis: chart indices and weights.
pub fn height_stencil<D: Real>(
    chart: &Chart,
    axis: usize,
    height: D,
) -> Option<([usize; 4], [D; 4])> {
    let ax = chart.axis(axis);
    let h = ax.spacing();
    let n = ax.count as isize;
    let t = (height - c::<D>(ax.start)) * c::<D>(1.0 / h);
    let tr = t.re();
    if !tr.is_finite() {
        return None;
    }
    let k = match ax.kind {
        AxisKind::Closed => {
            let tol = 1e-9;
            if tr < -tol || tr > (n - 1) as f64 + tol {
                return None;
            }
            (tr.floor() as isize).clamp(1, n - 3)
        }
        AxisKind::Periodic => tr.floor() as isize,
        AxisKind::Polar => return None,
    };
    let mut idx = [0usize; 4];
    let mut w = [D::zero(); 4];
    let nodes = [k - 1, k, k + 1, k + 2];
    for (j, &kj) in nodes.iter().enumerate() {
        idx[j] = kj.rem_euclid(n) as usize;
        let mut l = D::one();
        for (m, &km) in nodes.iter().enumerate() {
            if m != j {
                l *= (t - c::<D>(km as f64)) * c::<D>(1.0 / (kj - km) as f64);
            }
        }
        w[j] = l;
    }
    Some((idx, w))
}

/// Blend ambient points with dual weights.
pub fn blend<D: Real>(n: usize, pts: &[PointGeometry; 4], w: &[D; 4]) -> AmbientAt<D> {
    let mut out = AmbientAt {
        g: zeros2(),
        gamma: [zeros2(); MAX_DIM],
        p: zeros2(),
        h: D::zero(),
        dh: [D::zero(); MAX_DIM],
    };
    for (pt, &wk) in pts.iter().zip(w) {
        for i in 0..n {
            for j in 0..n {
                out.g[i][j] += wk * c::<D>(pt.g[i][j]);
                out.p[i][j] += wk * c::<D>(pt.p[i][j]);
                for k in 0..n {
                    out.gamma[k][i][j] += wk * c::<D>(pt.gamma[k][i][j]);
                }
            }
            out.dh[i] += wk * c::<D>(pt.dh[i]);
        }
        out.h += wk * c::<D>(pt.h);
    }
    out
}
