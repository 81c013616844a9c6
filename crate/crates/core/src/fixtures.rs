//! Small hand-built instances with known closed-form answers: a cosurjective
//! relation that no UCP map realises, a positive element of `M_2 ⊗ M_2^op`
//! with invertible slice that no rescaling makes state-preserving, and a
//! classical channel.

use crate::adjacency::{psi_prime_inv, state_preservation_check, OppositeTensor};
use crate::cpmap::{ucp_realizable_full_target, CpMap, UcpProbe};
use crate::error::Result;
use crate::linalg;
use crate::mvnalg::{GnsSpace, MultiMatrixAlgebra, RepresentedAlgebra};
use crate::qrel::QuantumRelation;
use crate::report::Claim;
use crate::scalar::{c, cr, CMat, Real, C};
use nalgebra::DMatrix;

pub struct CosurjectiveFixture<R: Real> {
    pub u1: CMat<R>,
    pub u2: CMat<R>,
    pub relation: QuantumRelation<R>,
    pub probe: UcpProbe<R>,
}

/// `u₁ = 2^{-1/2}[[1,1],[-1,1]]·diag(3,2)`, `u₂ = diag(√8, √3)` in `B(C²)`, so
/// `u₁*u₁ − u₂*u₂ = 1` and `V = lin{u₁, u₂}` is cosurjective over `M_2`.
pub fn not_all_cosurjective<R: Real>(tol: R) -> Result<CosurjectiveFixture<R>> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let u1 = DMatrix::from_row_slice(2, 2, &[c::<R>(3.0 * h, 0.0), c(2.0 * h, 0.0), c(-3.0 * h, 0.0), c(2.0 * h, 0.0)]);
    let u2 = DMatrix::from_row_slice(2, 2, &[c::<R>(8f64.sqrt(), 0.0), c(0.0, 0.0), c(0.0, 0.0), c(3f64.sqrt(), 0.0)]);
    let rep = RepresentedAlgebra::standard(MultiMatrixAlgebra::full(2));
    let relation = QuantumRelation::new(rep.clone(), rep.clone(), &[u1.clone(), u2.clone()], false, tol)?;
    let probe = ucp_realizable_full_target(&[u1.clone(), u2.clone()], &rep, tol)?;
    Ok(CosurjectiveFixture { u1, u2, relation, probe })
}

impl<R: Real> CosurjectiveFixture<R> {
    pub fn claims(&self) -> Vec<Claim> {
        let diff = self.u1.adjoint() * &self.u1 - self.u2.adjoint() * &self.u2;
        vec![
            Claim::scalar("u1*u1 - u2*u2 = 1", linalg::max_abs_diff(&diff, &linalg::eye(2)).to_f64_lossy()),
            Claim::holds("V is cosurjective", self.relation.is_cosurjective()),
            Claim::holds("V is not realised by a UCP map", !self.probe.realizable),
        ]
    }
}

pub struct SliceFixture<R: Real> {
    pub gns: GnsSpace<R>,
    /// `|ξ⟩⟨ξ|` as an element of `M_2 ⊗ M_2^op`.
    pub e: OppositeTensor<R>,
    /// `(Tr ⊗ id)(e)`.
    pub u: CMat<R>,
}

/// `ξ = (1/2, 1/2, 1/2, i/2)` indexed by `(a, b) ↦ 2a + b`, and `e = |ξ⟩⟨ξ|`
/// carried into `M_2 ⊗ M_2^op` by `b ↦ (bᵀ)^op`, i.e.
/// `e = Σ ξ_ij conj(ξ_kl) E_ik ⊗ E_lj^op`, over the Markov GNS space of `M_2`.
pub fn invertible_slice<R: Real>() -> SliceFixture<R> {
    let xi: [C<R>; 4] = [c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.0, 0.5)];
    let alg = MultiMatrixAlgebra::full(2);
    let gns = GnsSpace::markov(alg.clone());
    let d = gns.dim();
    let mut e = linalg::zeros::<R>(d * d, d * d);
    let mut u = linalg::zeros::<R>(2, 2);
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    let w = xi[2 * i + j] * xi[2 * k + l].conj();
                    let left = gns.left_action(&alg.unit(0, i, k));
                    let right = gns.left_action(&alg.unit(0, l, j)).transpose();
                    e += linalg::kron(&left, &right) * w;
                    if i == k {
                        u[(j, l)] += w;
                    }
                }
            }
        }
    }
    SliceFixture { e: OppositeTensor { source: gns.clone(), target: gns.clone(), matrix: e }, gns, u }
}

impl<R: Real> SliceFixture<R> {
    /// Whether `Ψ′⁻¹(t·e)` preserves the Markov state, for each `t`.
    pub fn preserving_multiples(&self, ts: &[R], tol: R) -> Result<Vec<bool>> {
        ts.iter()
            .map(|&t| {
                let x = OppositeTensor { matrix: &self.e.matrix * cr(t), ..self.e.clone() };
                state_preservation_check(&psi_prime_inv(&x)?, tol)
            })
            .collect()
    }

    /// `(c(1)† ⊗ 1) e (c(1) ⊗ 1)`, the functional applied to the first leg.
    pub fn state_slice(&self) -> CMat<R> {
        let one = self.gns.one_coords();
        let d = self.gns.dim();
        let mut out = linalg::zeros::<R>(d, d);
        for i in 0..d {
            for k in 0..d {
                out += self.e.matrix.view((i * d, k * d), (d, d)) * (one[i].conj() * one[k]);
            }
        }
        out
    }

    pub fn claims(&self, tol: R) -> Result<Vec<Claim>> {
        let want = DMatrix::from_row_slice(2, 2, &[c::<R>(0.5, 0.0), c(0.25, -0.25), c(0.25, 0.25), c(0.5, 0.0)]);
        let det = self.u[(0, 0)] * self.u[(1, 1)] - self.u[(0, 1)] * self.u[(1, 0)];
        let proj = linalg::max_abs_diff(&(&self.e.matrix * &self.e.matrix), &self.e.matrix);
        let ts: Vec<R> = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0].iter().map(|&t| R::lit(t)).collect();
        let any = self.preserving_multiples(&ts, tol)?.into_iter().any(|b| b);
        // (φ ⊗ id)(t·e) = t·S; no t makes t·S the identity when S is not a
        // multiple of it.
        let slice = self.state_slice();
        let best = linalg::trace(&slice).re / linalg::hs_inner(&slice, &slice).re;
        let gap = linalg::max_abs_diff(&(&slice * cr(best)), &linalg::eye(slice.nrows()));
        Ok(vec![
            Claim::scalar("e is a projection", proj.to_f64_lossy()),
            Claim::holds("state slice of e is not a multiple of 1", gap > R::lit(1e-3)),
            Claim::scalar("u = [[1/2,(1-i)/4],[(1+i)/4,1/2]]", linalg::max_abs_diff(&self.u, &want).to_f64_lossy()),
            Claim::scalar("det u = 1/8", (det - c(0.125, 0.0)).norm_sqr().sqrt().to_f64_lossy()),
            Claim::holds("no tested multiple of e is state-preserving", !any),
        ])
    }
}

/// `p(y|x)` with rows indexed by `x`: `x = 0` is sent to `y = 0`, `x = 1` is
/// sent to either output with probability 1/2.
pub fn classical_channel_matrix() -> Vec<Vec<f64>> {
    vec![vec![1.0, 0.0], vec![0.5, 0.5]]
}

/// `{(y, x) : p(y|x) ≠ 0}` computed directly from the matrix.
pub fn channel_support(p: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let mut out = vec![];
    for (x, row) in p.iter().enumerate() {
        for (y, &q) in row.iter().enumerate() {
            if q != 0.0 {
                out.push((y, x));
            }
        }
    }
    out.sort_unstable();
    out
}

/// The relation of a classical channel, as pairs `(y, x)`.
pub fn channel_relation<R: Real>(p: &[Vec<f64>], tol: R) -> Result<Vec<(usize, usize)>> {
    CpMap::<R>::classical_channel(p, tol)?.relation()?.to_classical()
}
