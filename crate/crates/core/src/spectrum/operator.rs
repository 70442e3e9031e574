//! Finite-volume assembly of the stability operator
//! `L φ = −Δφ + 2⟨W, ∇φ⟩ + c₀ φ`.

use std::sync::Arc;

use crate::chart::{AxisKind, Chart, Topology};
use crate::error::{Error, Result};
use crate::fields::{InitialDataSet, TraceConvention};
use crate::fv;
use crate::linalg::{invert_spd, CsrMatrix, SquareMat, MAX_DIM};
use crate::surfaces::{SurfaceGeometry, SurfacePoint};

/// Discretized stability operator on a closed surface grid.
///
/// `matrix = M⁻¹ K + drift + diag(c₀)` where `K` is the symmetric stiffness
/// matrix of `∫ √γ γ^{ab} ∂_a φ ∂_b ψ` and `M = diag(weights)` the lumped
/// area. `M⁻¹ K` is therefore self-adjoint for the weighted inner product.
#[derive(Clone, Debug)]
pub struct StabilityOperator {
    pub base: Arc<Chart>,
    pub matrix: CsrMatrix,
    /// Area weights `√γ` times the coordinate cell size.
    pub weights: Vec<f64>,
    pub c0: Vec<f64>,
    /// Drift field `2W^a`.
    pub drift: Vec<[f64; MAX_DIM]>,
    stiffness: CsrMatrix,
}

fn check_closed(base: &Chart) -> Result<()> {
    let closed = match base.topology() {
        Topology::LatLongSphere => true,
        Topology::PeriodicBox => base.axes().iter().all(|a| a.kind == AxisKind::Periodic),
        _ => false,
    };
    if closed {
        Ok(())
    } else {
        Err(Error::UnsupportedTopology(format!(
            "{:?} grids are not closed surfaces",
            base.topology()
        )))
    }
}

/// `tr p` entering `c₀` under the chosen convention.
pub fn trace_p(p: &SurfacePoint, convention: TraceConvention) -> f64 {
    match convention {
        TraceConvention::Ambient => p.trp,
        TraceConvention::Induced => p.trp_sigma,
    }
}

/// `½(h² − 2h tr p + 2ν(h))`
pub fn h_term(p: &SurfacePoint, convention: TraceConvention) -> f64 {
    0.5 * (p.h * p.h - 2.0 * p.h * trace_p(p, convention) + 2.0 * p.nu_h)
}

/// `c₀ = div W − |W|² + Q − ½(h² − 2h tr p + 2ν(h))` per node.
pub fn zeroth_order(geom: &SurfaceGeometry, convention: TraceConvention) -> Vec<f64> {
    geom.field(|p| p.div_w - p.w_norm2 + p.q - h_term(p, convention))
}

/// `Q − ½(h² − 2h tr p + 2ν(h))`, the potential with the drift removed.
pub fn symmetric_potential(geom: &SurfaceGeometry, convention: TraceConvention) -> Vec<f64> {
    geom.field(|p| p.q - h_term(p, convention))
}

impl StabilityOperator {
    pub fn assemble(geom: &SurfaceGeometry, data: &InitialDataSet) -> Result<Self> {
        let c0 = zeroth_order(geom, data.conventions.trace);
        let metric: Vec<SquareMat<f64>> = geom.points.iter().map(|p| p.metric).collect();
        let w: Vec<[f64; MAX_DIM]> = geom.points.iter().map(|p| p.w_vec).collect();
        Self::from_coefficients(geom.base.clone(), &metric, &w, c0)
    }

    /// Operator with explicit metric `γ_ab`, drift vector `W^a` and `c₀` per node.
    pub fn from_coefficients(
        base: Arc<Chart>,
        metric: &[SquareMat<f64>],
        w: &[[f64; MAX_DIM]],
        c0: Vec<f64>,
    ) -> Result<Self> {
        check_closed(&base)?;
        let len = base.len();
        if metric.len() != len || w.len() != len || c0.len() != len {
            return Err(Error::InvalidField(
                "operator coefficients do not match the grid".into(),
            ));
        }
        if c0.iter().chain(w.iter().flatten()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidField(
                "operator coefficients must be finite".into(),
            ));
        }
        let d = base.dim();
        let mut kmat = Vec::with_capacity(len);
        let mut sqrt_g = Vec::with_capacity(len);
        for (node, g) in metric.iter().enumerate() {
            let (inv, det) = invert_spd(g, d).ok_or(Error::DegenerateSurface { node })?;
            let s = det.sqrt();
            let mut k = [[0.0; MAX_DIM]; MAX_DIM];
            for a in 0..d {
                for b in 0..d {
                    k[a][b] = s * inv[a][b];
                }
            }
            kmat.push(k);
            sqrt_g.push(s);
        }
        let quad = fv::quadrature(&base);
        let weights: Vec<f64> = sqrt_g.iter().zip(&quad).map(|(s, q)| s * q).collect();
        let cell: f64 = (0..d).map(|a| base.spacing(a)).product();

        let mut trip = Vec::new();
        for i in 0..len {
            let mi = base.multi(i);
            for a in 0..d {
                let Some(j) = fv::neighbour(&base, i, a, 1) else {
                    continue;
                };
                let mj = base.multi(j);
                let h = base.spacing(a);
                let mut grads: [Vec<(usize, f64)>; MAX_DIM] = Default::default();
                grads[a] = vec![(j, 1.0 / h), (i, -1.0 / h)];
                for b in (0..d).filter(|&b| b != a) {
                    grads[b] = base
                        .d1(&mi, b)
                        .weights(1.0)
                        .chain(base.d1(&mj, b).weights(1.0))
                        .map(|(k, x)| (k, 0.5 * x))
                        .collect();
                }
                let kf = |x: usize, y: usize| 0.5 * (kmat[i][x][y] + kmat[j][x][y]);
                let mut outer = |ga: &[(usize, f64)], gb: &[(usize, f64)], c: f64| {
                    for &(p, x) in ga {
                        for &(q, y) in gb {
                            trip.push((p, q, c * x * y));
                        }
                    }
                };
                let ga = grads[a].clone();
                outer(&ga, &ga, cell * kf(a, a));
                for b in (0..d).filter(|&b| b != a) {
                    let c = 0.5 * cell * kf(a, b);
                    outer(&ga, &grads[b], c);
                    outer(&grads[b], &ga, c);
                }
            }
        }
        let stiffness = CsrMatrix::from_triplets(len, len, trip);

        let drift: Vec<[f64; MAX_DIM]> = w.iter().map(|v| v.map(|x| 2.0 * x)).collect();
        let mut trip = Vec::with_capacity(stiffness.nnz() + len * (2 * d + 1));
        for i in 0..len {
            for (k, v) in stiffness.row(i) {
                trip.push((i, k, v / weights[i]));
            }
            trip.push((i, i, c0[i]));
            let m = base.multi(i);
            for a in 0..d {
                if drift[i][a] != 0.0 {
                    trip.extend(
                        base.d1(&m, a)
                            .weights(1.0)
                            .map(|(k, x)| (i, k, drift[i][a] * x)),
                    );
                }
            }
        }
        let matrix = CsrMatrix::from_triplets(len, len, trip);
        Ok(Self {
            base,
            matrix,
            weights,
            c0,
            drift,
            stiffness,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `M⁻¹ K + diag(c₀)`: the operator with the drift removed.
    pub fn without_drift(&self) -> CsrMatrix {
        self.with_potential(&self.c0)
    }

    /// `M⁻¹ K + diag(v)` for another potential `v`.
    pub fn with_potential(&self, v: &[f64]) -> CsrMatrix {
        let mut trip = Vec::with_capacity(self.stiffness.nnz() + self.len());
        for i in 0..self.len() {
            for (k, x) in self.stiffness.row(i) {
                trip.push((i, k, x / self.weights[i]));
            }
            trip.push((i, i, v[i]));
        }
        CsrMatrix::from_triplets(self.len(), self.len(), trip)
    }

    /// `2W^a ∂_a` alone.
    pub fn drift_matrix(&self) -> CsrMatrix {
        let mut trip = Vec::new();
        for i in 0..self.len() {
            let m = self.base.multi(i);
            for a in 0..self.base.dim() {
                trip.extend(
                    self.base
                        .d1(&m, a)
                        .weights(1.0)
                        .map(|(k, x)| (i, k, self.drift[i][a] * x)),
                );
            }
        }
        CsrMatrix::from_triplets(self.len(), self.len(), trip)
    }

    /// `M^{1/2} (M⁻¹ K + diag(c₀)) M^{−1/2}`, symmetric in the plain sense.
    pub fn symmetrized(&self) -> CsrMatrix {
        let mut trip = Vec::with_capacity(self.stiffness.nnz() + self.len());
        for i in 0..self.len() {
            for (k, x) in self.stiffness.row(i) {
                trip.push((i, k, x / (self.weights[i] * self.weights[k]).sqrt()));
            }
            trip.push((i, i, self.c0[i]));
        }
        CsrMatrix::from_triplets(self.len(), self.len(), trip)
    }

    /// Largest `|w_i A_ij − w_j A_ji|` relative to the largest entry of `w A`,
    /// for `A` the operator without drift.
    pub fn weighted_asymmetry(&self) -> f64 {
        let a = self.without_drift();
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..self.len() {
            for (k, x) in a.row(i) {
                let wij = self.weights[i] * x;
                let wji = self.weights[k] * a.get(k, i);
                scale = scale.max(wij.abs());
                if i != k {
                    worst = worst.max((wij - wji).abs());
                }
            }
        }
        worst / scale.max(f64::MIN_POSITIVE)
    }
}
