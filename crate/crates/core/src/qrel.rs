//! Quantum relations: `N′`-`M′` bimodules `V ⊆ B(H, K)` between represented
//! algebras, and their calculus.

use crate::error::{consistency, invalid, precondition, shape, Result};
use crate::linalg;
use crate::mvnalg::{Element, RepresentedAlgebra};
use crate::opspace::{bimodule_generate, compose_spaces, tensor_sandwich_span, OperatorSubspace};
use crate::scalar::{cr, CMat, Real};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone)]
pub struct QuantumRelation<R: Real> {
    source: RepresentedAlgebra<R>,
    target: RepresentedAlgebra<R>,
    space: OperatorSubspace<R>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationFlags {
    pub coinjective: bool,
    pub cosurjective: bool,
    pub injective: bool,
    pub surjective: bool,
    pub partial_function: bool,
    pub function: bool,
    /// Only present when source and target coincide.
    pub symmetric: Option<bool>,
    pub reflexive: Option<bool>,
}

/// `1_Y V 1_X` for a pair of minimal central projections.
#[derive(Debug, Clone)]
pub struct BlockComponent<R: Real> {
    pub target_block: usize,
    pub source_block: usize,
    pub space: OperatorSubspace<R>,
}

/// The span of a commutant as a subspace of `B(H)`.
pub fn commutant_space<R: Real>(rep: &RepresentedAlgebra<R>, tol: R) -> OperatorSubspace<R> {
    let n = rep.hilbert_dim();
    OperatorSubspace::span_of(n, n, rep.commutant_basis(), tol).expect("commutant dims")
}

/// Largest residual of `a·v·b` outside `space`, over commutant bases.
fn bimodule_defect<R: Real>(
    space: &OperatorSubspace<R>,
    source: &RepresentedAlgebra<R>,
    target: &RepresentedAlgebra<R>,
) -> (R, Option<(usize, usize, usize)>) {
    let mut worst = (R::zero(), None);
    let basis = space.basis_matrix();
    if basis.ncols() == 0 {
        return worst;
    }
    // vec(l v r) = (l ⊗ rᵀ) vec(v), applied to the whole basis at once.
    for (a, l) in target.commutant_basis().iter().enumerate() {
        for (b, r) in source.commutant_basis().iter().enumerate() {
            let moved = linalg::kron(l, &r.transpose()) * basis;
            let outside = &moved - basis * (basis.adjoint() * &moved);
            for i in 0..outside.ncols() {
                let res = outside.column(i).norm();
                if res > worst.0 {
                    worst = (res, Some((a, i, b)));
                }
            }
        }
    }
    worst
}

impl<R: Real> QuantumRelation<R> {
    /// Builds a relation from generators. With `close`, the generators are
    /// bimodule-closed; otherwise their span must already be a bimodule.
    pub fn new(
        source: RepresentedAlgebra<R>,
        target: RepresentedAlgebra<R>,
        generators: &[CMat<R>],
        close: bool,
        tol: R,
    ) -> Result<Self> {
        let (rows, cols) = (target.hilbert_dim(), source.hilbert_dim());
        let space = if close {
            bimodule_generate(target.commutant_basis(), generators, source.commutant_basis(), tol)?
        } else {
            OperatorSubspace::span_of(rows, cols, generators, tol)?
        };
        Self::from_space(source, target, space, !close)
    }

    /// Wraps a subspace, optionally verifying the bimodule property.
    pub fn from_space(
        source: RepresentedAlgebra<R>,
        target: RepresentedAlgebra<R>,
        space: OperatorSubspace<R>,
        verify: bool,
    ) -> Result<Self> {
        if space.dims() != (target.hilbert_dim(), source.hilbert_dim()) {
            return Err(shape(format!(
                "relation space {:?} does not match target×source dims {:?}",
                space.dims(),
                (target.hilbert_dim(), source.hilbert_dim())
            )));
        }
        if verify {
            let (res, at) = bimodule_defect(&space, &source, &target);
            if res > space.tol() * R::lit(10.0) {
                let (a, i, b) = at.expect("defect located");
                return Err(invalid(format!(
                    "not a bimodule: target-commutant[{a}] · basis[{i}] · source-commutant[{b}] leaves the span (residual {:.3e})",
                    res.to_f64_lossy()
                )));
            }
        }
        Ok(Self { source, target, space })
    }

    pub fn identity(rep: &RepresentedAlgebra<R>, tol: R) -> Self {
        Self { source: rep.clone(), target: rep.clone(), space: commutant_space(rep, tol) }
    }

    pub fn zero(source: &RepresentedAlgebra<R>, target: &RepresentedAlgebra<R>, tol: R) -> Self {
        Self {
            source: source.clone(),
            target: target.clone(),
            space: OperatorSubspace::zero(target.hilbert_dim(), source.hilbert_dim(), tol),
        }
    }

    /// Everything: `B(H, K)`.
    pub fn full(source: &RepresentedAlgebra<R>, target: &RepresentedAlgebra<R>, tol: R) -> Self {
        Self {
            source: source.clone(),
            target: target.clone(),
            space: OperatorSubspace::full(target.hilbert_dim(), source.hilbert_dim(), tol),
        }
    }

    pub fn source(&self) -> &RepresentedAlgebra<R> {
        &self.source
    }

    pub fn target(&self) -> &RepresentedAlgebra<R> {
        &self.target
    }

    pub fn space(&self) -> &OperatorSubspace<R> {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn tol(&self) -> R {
        self.space.tol()
    }

    pub fn bimodule_residual(&self) -> R {
        bimodule_defect(&self.space, &self.source, &self.target).0
    }

    /// `V∘W` where `W` goes from `M₁` to `M₂` and `self` from `M₂` to `M₃`.
    pub fn compose(&self, w: &Self) -> Result<Self> {
        if !self.source.same_as(&w.target, self.tol()) {
            return Err(shape("composition needs the inner represented algebras to agree"));
        }
        Ok(Self { source: w.source.clone(), target: self.target.clone(), space: compose_spaces(&self.space, &w.space)? })
    }

    pub fn adjoint(&self) -> Self {
        Self { source: self.target.clone(), target: self.source.clone(), space: self.space.adjoint() }
    }

    /// `Vᵀ`, a relation between the opposite algebras acting on conjugate spaces.
    pub fn transpose(&self) -> Self {
        Self { source: self.target.opposite(), target: self.source.opposite(), space: self.space.transpose() }
    }

    pub fn same_algebras(&self, other: &Self) -> bool {
        self.source.same_as(&other.source, self.tol()) && self.target.same_as(&other.target, self.tol())
    }

    pub fn equals(&self, other: &Self) -> bool {
        self.same_algebras(other) && self.space.equals(&other.space)
    }

    pub fn is_subrelation_of(&self, other: &Self) -> bool {
        self.same_algebras(other) && self.space.is_subspace_of(&other.space)
    }

    pub fn intersect(&self, other: &Self) -> Result<Self> {
        if !self.same_algebras(other) {
            return Err(shape("intersection needs equal algebras"));
        }
        Ok(Self { source: self.source.clone(), target: self.target.clone(), space: self.space.intersect(&other.space)? })
    }

    pub fn sum(&self, other: &Self) -> Result<Self> {
        if !self.same_algebras(other) {
            return Err(shape("sum needs equal algebras"));
        }
        Ok(Self { source: self.source.clone(), target: self.target.clone(), space: self.space.sum(&other.space)? })
    }

    fn endo(&self) -> bool {
        self.source.same_as(&self.target, self.tol())
    }

    pub fn is_coinjective(&self) -> bool {
        let vv = compose_spaces(&self.space, &self.space.adjoint()).expect("dims");
        vv.is_subspace_of(&commutant_space(&self.target, self.tol()))
    }

    pub fn is_cosurjective(&self) -> bool {
        let vv = compose_spaces(&self.space.adjoint(), &self.space).expect("dims");
        commutant_space(&self.source, self.tol()).is_subspace_of(&vv)
    }

    pub fn is_injective(&self) -> bool {
        let vv = compose_spaces(&self.space.adjoint(), &self.space).expect("dims");
        vv.is_subspace_of(&commutant_space(&self.source, self.tol()))
    }

    pub fn is_surjective(&self) -> bool {
        let vv = compose_spaces(&self.space, &self.space.adjoint()).expect("dims");
        commutant_space(&self.target, self.tol()).is_subspace_of(&vv)
    }

    pub fn is_symmetric(&self) -> Result<bool> {
        if !self.endo() {
            return Err(precondition("symmetry needs source = target"));
        }
        Ok(self.space.adjoint().equals(&self.space))
    }

    pub fn is_reflexive(&self) -> Result<bool> {
        if !self.endo() {
            return Err(precondition("reflexivity needs source = target"));
        }
        Ok(self.space.contains(&linalg::eye(self.source.hilbert_dim())))
    }

    pub fn properties(&self) -> RelationFlags {
        let vvs = compose_spaces(&self.space, &self.space.adjoint()).expect("dims");
        let vsv = compose_spaces(&self.space.adjoint(), &self.space).expect("dims");
        let n_comm = commutant_space(&self.target, self.tol());
        let m_comm = commutant_space(&self.source, self.tol());
        let coinjective = vvs.is_subspace_of(&n_comm);
        let surjective = n_comm.is_subspace_of(&vvs);
        let injective = vsv.is_subspace_of(&m_comm);
        let cosurjective = m_comm.is_subspace_of(&vsv);
        let (symmetric, reflexive) = if self.endo() {
            (self.is_symmetric().ok(), self.is_reflexive().ok())
        } else {
            (None, None)
        };
        RelationFlags {
            coinjective,
            cosurjective,
            injective,
            surjective,
            partial_function: coinjective,
            function: coinjective && cosurjective,
            symmetric,
            reflexive,
        }
    }

    /// The central projection `z ∈ N` with `V∘V* = zN′`.
    pub fn central_support(&self) -> Result<Element<R>> {
        let vv = compose_spaces(&self.space, &self.space.adjoint())?;
        let n_comm = commutant_space(&self.target, self.tol());
        if !vv.is_subspace_of(&n_comm) {
            return Err(precondition("central support needs a coinjective relation"));
        }
        let alg = self.target.algebra();
        let mut z = alg.zero::<R>();
        for b in 0..alg.num_blocks() {
            let p = self.target.central_projection(b);
            let corner: Vec<CMat<R>> = self.target.commutant_basis().iter().map(|c| &p * c).collect();
            let corner = OperatorSubspace::span_of(p.nrows(), p.ncols(), &corner, self.tol())?;
            if corner.is_subspace_of(&vv) {
                z.blocks[b] = linalg::eye(alg.blocks()[b]);
            }
        }
        let pz = self.target.embed(&z);
        let z_comm = n_comm.sandwich(&pz, &linalg::eye(pz.ncols()))?;
        if !z_comm.equals(&vv) {
            return Err(consistency(format!(
                "V∘V* (dim {}) is not z·N′ (dim {}) for any central projection z",
                vv.dim(),
                z_comm.dim()
            )));
        }
        Ok(z)
    }

    /// Components `1_Y V 1_X` over pairs of minimal central projections.
    pub fn blocks(&self) -> Vec<BlockComponent<R>> {
        let mut out = vec![];
        let sp: Vec<CMat<R>> = (0..self.source.algebra().num_blocks()).map(|a| self.source.central_projection(a)).collect();
        let tp: Vec<CMat<R>> = (0..self.target.algebra().num_blocks()).map(|b| self.target.central_projection(b)).collect();
        for (y, py) in tp.iter().enumerate() {
            for (x, px) in sp.iter().enumerate() {
                let space = self.space.sandwich(py, px).expect("dims");
                out.push(BlockComponent { target_block: y, source_block: x, space });
            }
        }
        out
    }

    /// Span of the block components; equals `V` for every bimodule.
    pub fn reassemble(components: &[BlockComponent<R>], like: &Self) -> Result<Self> {
        let mut space = OperatorSubspace::zero(like.target.hilbert_dim(), like.source.hilbert_dim(), like.tol());
        for c in components {
            space = space.sum(&c.space)?;
        }
        Ok(Self { source: like.source.clone(), target: like.target.clone(), space })
    }

    /// The relation `lin{e_{y,x} : (y, x) ∈ pairs}` between commutative algebras
    /// (amplified to the multiplicity spaces).
    pub fn from_classical(
        source: &RepresentedAlgebra<R>,
        target: &RepresentedAlgebra<R>,
        pairs: &[(usize, usize)],
        tol: R,
    ) -> Result<Self> {
        if !source.algebra().is_commutative() || !target.algebra().is_commutative() {
            return Err(precondition("classical relations need commutative algebras"));
        }
        let (nx, ny) = (source.algebra().num_blocks(), target.algebra().num_blocks());
        let mut gens = vec![];
        for &(y, x) in pairs {
            if y >= ny || x >= nx {
                return Err(invalid(format!("pair ({y}, {x}) out of range for |Y| = {ny}, |X| = {nx}")));
            }
            let uy = target.block_isometry(y);
            let ux = source.block_isometry(x);
            for i in 0..uy.ncols() {
                for j in 0..ux.ncols() {
                    gens.push(uy.column(i) * ux.column(j).adjoint());
                }
            }
        }
        let space = OperatorSubspace::span_of(target.hilbert_dim(), source.hilbert_dim(), &gens, tol)?;
        Ok(Self { source: source.clone(), target: target.clone(), space })
    }

    /// The set `{(y, x) : 1_y V 1_x ≠ 0}`, sorted.
    pub fn to_classical(&self) -> Result<Vec<(usize, usize)>> {
        if !self.source.algebra().is_commutative() || !self.target.algebra().is_commutative() {
            return Err(precondition("classical export needs commutative algebras"));
        }
        let mut out = vec![];
        for c in self.blocks() {
            if c.space.dim() > 0 {
                let full = self.target.multiplicities()[c.target_block] * self.source.multiplicities()[c.source_block];
                if c.space.dim() != full {
                    return Err(consistency("a block of a classical bimodule is neither zero nor full"));
                }
                out.push((c.target_block, c.source_block));
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    /// Moves the relation to new representations of the same algebras:
    /// `u_N† (V ⊗ B(L₁, L₂)) u_M` with `u_M : H₁ → H ⊗ L₁`, `u_N : K₁ → K ⊗ L₂`
    /// isometric intertwiners.
    pub fn transport(
        &self,
        new_source: &RepresentedAlgebra<R>,
        u_m: &CMat<R>,
        new_target: &RepresentedAlgebra<R>,
        u_n: &CMat<R>,
    ) -> Result<Self> {
        let tol = self.tol();
        let l1 = check_intertwiner(new_source, &self.source, u_m, tol)?;
        let l2 = check_intertwiner(new_target, &self.target, u_n, tol)?;
        let space = tensor_sandwich_span(&u_n.adjoint(), &self.space, l2, l1, u_m, tol)?;
        Ok(Self { source: new_source.clone(), target: new_target.clone(), space })
    }

    /// `V∘U = M′` and `U∘V = N′`; when true for a partial function `U`, `V = U*` is asserted.
    pub fn is_invertible_pair(u: &Self, v: &Self) -> Result<bool> {
        let ok = match (v.compose(u), u.compose(v)) {
            (Ok(vu), Ok(uv)) => {
                vu.equals(&Self::identity(&u.source, u.tol())) && uv.equals(&Self::identity(&u.target, u.tol()))
            }
            _ => false,
        };
        if ok && u.is_coinjective() && !u.adjoint().equals(v) {
            return Err(consistency("inverse of a partial function differs from its adjoint"));
        }
        Ok(ok)
    }
}

/// Checks `u : H₁ → H ⊗ L` is an isometry with `u π₁(x) = (π(x) ⊗ 1) u`;
/// returns `dim L`.
pub fn check_intertwiner<R: Real>(
    new: &RepresentedAlgebra<R>,
    old: &RepresentedAlgebra<R>,
    u: &CMat<R>,
    tol: R,
) -> Result<usize> {
    if new.algebra() != old.algebra() {
        return Err(shape("transport needs the same abstract algebra"));
    }
    let (h1, h) = (new.hilbert_dim(), old.hilbert_dim());
    if u.ncols() != h1 || h == 0 || u.nrows() % h != 0 {
        return Err(shape(format!("isometry must be (dim H · dim L) × {h1}")));
    }
    let l = u.nrows() / h;
    let slack = tol.max(R::default_epsilon().sqrt());
    if linalg::max_abs_diff(&(u.adjoint() * u), &linalg::eye(h1)) > slack {
        return Err(invalid("transport map is not an isometry"));
    }
    for x in new.algebra().basis::<R>() {
        let lhs = u * new.embed(&x);
        let rhs = linalg::kron(&old.embed(&x), &linalg::eye(l)) * u;
        if linalg::max_abs_diff(&lhs, &rhs) > slack {
            return Err(invalid("transport map does not intertwine the representations"));
        }
    }
    Ok(l)
}

/// A standard isometric intertwiner `u : H_new → H_old ⊗ C^l`; `isometries`
/// optionally supplies the per-block maps `C^{m_new(α)} → C^{m_old(α)} ⊗ C^l`
/// (columns), otherwise coordinate inclusions are used.
pub fn intertwiner<R: Real>(
    new: &RepresentedAlgebra<R>,
    old: &RepresentedAlgebra<R>,
    isometries: Option<&[CMat<R>]>,
) -> Result<(CMat<R>, usize)> {
    if new.algebra() != old.algebra() {
        return Err(shape("intertwiners need the same abstract algebra"));
    }
    let blocks = new.algebra().blocks();
    let (m1, m0) = (new.multiplicities(), old.multiplicities());
    let l = (0..blocks.len()).map(|a| m1[a].div_ceil(m0[a])).max().unwrap_or(1);
    let (h1, h0) = (new.hilbert_dim(), old.hilbert_dim());
    let mut s = linalg::zeros::<R>(h0 * l, h1);
    let (mut o1, mut o0) = (0, 0);
    for (a, &n) in blocks.iter().enumerate() {
        let w = match isometries {
            Some(ws) => {
                if ws[a].shape() != (m0[a] * l, m1[a]) {
                    return Err(shape(format!("block isometry {a} must be {}×{}", m0[a] * l, m1[a])));
                }
                ws[a].clone()
            }
            None => {
                let mut w = linalg::zeros::<R>(m0[a] * l, m1[a]);
                for j in 0..m1[a] {
                    w[(j, j)] = cr(R::one());
                }
                w
            }
        };
        for i in 0..n {
            for j in 0..m1[a] {
                let col = o1 + i * m1[a] + j;
                for k in 0..m0[a] {
                    for q in 0..l {
                        let row = (o0 + i * m0[a] + k) * l + q;
                        s[(row, col)] = w[(k * l + q, j)];
                    }
                }
            }
        }
        o1 += n * m1[a];
        o0 += n * m0[a];
    }
    let u = linalg::kron(old.block_unitary(), &linalg::eye(l)) * s * new.block_unitary().adjoint();
    Ok((u, l))
}
