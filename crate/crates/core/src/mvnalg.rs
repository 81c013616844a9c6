//! Multimatrix algebras `⊕_α M_{n(α)}`, their representations, faithful
//! functionals, and the GNS space with its modular data.

use crate::error::{invalid, shape, Result};
use crate::linalg::{self, herm_eig, HermEig};
use crate::scalar::{cr, CMat, CVec, Real, C};
use nalgebra::{Complex, ComplexField, DMatrix, DVector};

/// The algebra `⊕_α M_{n(α)}`, described by its block sizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiMatrixAlgebra {
    blocks: Vec<usize>,
    labels: Option<Vec<String>>,
}

/// A block-diagonal tuple `x = (x_α)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Element<R: Real> {
    pub blocks: Vec<CMat<R>>,
}

impl MultiMatrixAlgebra {
    pub fn new(blocks: Vec<usize>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(invalid("an algebra needs at least one block"));
        }
        if blocks.iter().any(|&n| n == 0) {
            return Err(invalid("block sizes must be positive"));
        }
        Ok(Self { blocks, labels: None })
    }

    /// `M_n` as a single block.
    pub fn full(n: usize) -> Self {
        Self::new(vec![n]).expect("n ≥ 1")
    }

    /// The commutative algebra of functions on `k` points.
    pub fn diagonal(k: usize) -> Self {
        Self::new(vec![1; k]).expect("k ≥ 1")
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.blocks.len() {
            return Err(shape("one label per block"));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// `Σ_α n(α)²`.
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|n| n * n).sum()
    }

    pub fn is_commutative(&self) -> bool {
        self.blocks.iter().all(|&n| n == 1)
    }

    /// Start of each block in algebra coordinates.
    pub fn coord_offsets(&self) -> Vec<usize> {
        offsets(self.blocks.iter().map(|n| n * n))
    }

    pub fn coord_index(&self, alpha: usize, i: usize, j: usize) -> usize {
        let n = self.blocks[alpha];
        self.coord_offsets()[alpha] + i * n + j
    }

    /// Inverse of [`Self::coord_index`].
    pub fn coord_label(&self, k: usize) -> (usize, usize, usize) {
        let mut rest = k;
        for (a, &n) in self.blocks.iter().enumerate() {
            if rest < n * n {
                return (a, rest / n, rest % n);
            }
            rest -= n * n;
        }
        panic!("coordinate {k} out of range");
    }

    pub fn check<R: Real>(&self, x: &Element<R>) -> Result<()> {
        if x.blocks.len() != self.blocks.len()
            || x.blocks.iter().zip(&self.blocks).any(|(b, &n)| b.shape() != (n, n))
        {
            return Err(shape(format!("element does not match blocks {:?}", self.blocks)));
        }
        Ok(())
    }

    pub fn zero<R: Real>(&self) -> Element<R> {
        Element { blocks: self.blocks.iter().map(|&n| linalg::zeros(n, n)).collect() }
    }

    pub fn one<R: Real>(&self) -> Element<R> {
        Element { blocks: self.blocks.iter().map(|&n| linalg::eye(n)).collect() }
    }

    /// Matrix unit `e^α_{ij}`.
    pub fn unit<R: Real>(&self, alpha: usize, i: usize, j: usize) -> Element<R> {
        let mut x = self.zero();
        x.blocks[alpha][(i, j)] = cr(R::one());
        x
    }

    /// Minimal central projection `1_α`.
    pub fn central<R: Real>(&self, alpha: usize) -> Element<R> {
        let mut x = self.zero();
        x.blocks[alpha] = linalg::eye(self.blocks[alpha]);
        x
    }

    /// Matrix units in coordinate order.
    pub fn basis<R: Real>(&self) -> Vec<Element<R>> {
        (0..self.dim()).map(|k| self.element(&unit_vec::<R>(self.dim(), k))).collect()
    }

    /// Row-major coordinates of the blocks, concatenated.
    pub fn coords<R: Real>(&self, x: &Element<R>) -> CVec<R> {
        let mut out = Vec::with_capacity(self.dim());
        for b in &x.blocks {
            out.extend(linalg::vec_rm(b).iter().copied());
        }
        DVector::from_vec(out)
    }

    pub fn element<R: Real>(&self, c: &CVec<R>) -> Element<R> {
        assert_eq!(c.len(), self.dim(), "coordinate length");
        let offs = self.coord_offsets();
        Element {
            blocks: self
                .blocks
                .iter()
                .zip(offs)
                .map(|(&n, o)| linalg::unvec_rm(&c.as_slice()[o..o + n * n], n, n))
                .collect(),
        }
    }

    /// `Tr_M(x) = Σ_α n(α) Tr(x_α)`.
    pub fn markov_trace<R: Real>(&self, x: &Element<R>) -> Result<C<R>> {
        self.check(x)?;
        Ok(x.blocks.iter().zip(&self.blocks).fold(cr(R::zero()), |acc, (b, &n)| {
            acc + b.trace() * cr(R::lit(n as f64))
        }))
    }

    /// The opposite algebra has the same block structure; `y^op` is stored as
    /// the block-wise transpose `yᵀ`, which is multiplicative in this order.
    pub fn opposite(&self) -> Self {
        self.clone()
    }
}

pub(crate) fn offsets(sizes: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut acc = 0;
    sizes
        .map(|s| {
            let o = acc;
            acc += s;
            o
        })
        .collect()
}

fn unit_vec<R: Real>(n: usize, k: usize) -> CVec<R> {
    let mut v = DVector::zeros(n);
    v[k] = cr(R::one());
    v
}

impl<R: Real> Element<R> {
    pub fn mul(&self, other: &Self) -> Self {
        Self { blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a * b).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, s: C<R>) -> Self {
        Self { blocks: self.blocks.iter().map(|a| a * s).collect() }
    }

    pub fn adjoint(&self) -> Self {
        Self { blocks: self.blocks.iter().map(|a| a.adjoint()).collect() }
    }

    pub fn transpose(&self) -> Self {
        Self { blocks: self.blocks.iter().map(|a| a.transpose()).collect() }
    }

    pub fn max_abs(&self) -> R {
        self.blocks.iter().fold(R::zero(), |m, b| m.max(linalg::max_abs(b)))
    }

    pub fn dist(&self, other: &Self) -> R {
        self.sub(other).max_abs()
    }

    /// Largest deviation from being a scalar in each block.
    pub fn central_defect(&self) -> R {
        self.blocks.iter().fold(R::zero(), |m, b| {
            let n = b.nrows();
            let s = b.trace() * cr(R::one() / R::lit(n as f64));
            m.max(linalg::max_abs(&(b - linalg::eye::<R>(n) * s)))
        })
    }

    pub fn min_eigenvalue(&self) -> R {
        self.blocks
            .iter()
            .map(linalg::min_eigenvalue)
            .fold(R::max_value().unwrap_or(R::one()), |m, v| m.min(v))
    }
}

/// An algebra acting on `H ≅ U(⊕_α C^{n(α)} ⊗ C^{m(α)})` by `x ↦ U(⊕ x_α ⊗ 1)U†`.
#[derive(Debug, Clone)]
pub struct RepresentedAlgebra<R: Real> {
    algebra: MultiMatrixAlgebra,
    multiplicities: Vec<usize>,
    block_unitary: CMat<R>,
    identity_unitary: bool,
    commutant: Vec<CMat<R>>,
}

impl<R: Real> RepresentedAlgebra<R> {
    pub fn new(algebra: MultiMatrixAlgebra, multiplicities: Vec<usize>) -> Result<Self> {
        let dim = hilbert_dim(&algebra, &multiplicities)?;
        Ok(Self::assemble(algebra, multiplicities, linalg::eye(dim), true))
    }

    pub fn with_unitary(algebra: MultiMatrixAlgebra, multiplicities: Vec<usize>, u: CMat<R>, tol: R) -> Result<Self> {
        let dim = hilbert_dim(&algebra, &multiplicities)?;
        if u.shape() != (dim, dim) {
            return Err(shape(format!("block unitary must be {dim}×{dim}")));
        }
        if !linalg::is_unitary(&u, tol.max(R::default_epsilon().sqrt())) {
            return Err(invalid("block unitary is not unitary"));
        }
        Ok(Self::assemble(algebra, multiplicities, u, false))
    }

    /// Multiplicity one on every block: `M ⊆ B(⊕ C^{n(α)})`.
    pub fn standard(algebra: MultiMatrixAlgebra) -> Self {
        let m = vec![1; algebra.num_blocks()];
        Self::new(algebra, m).expect("valid multiplicities")
    }

    /// The GNS representation of any faithful functional: `m(α) = n(α)`.
    pub fn gns(algebra: MultiMatrixAlgebra) -> Self {
        let m = algebra.blocks().to_vec();
        Self::new(algebra, m).expect("valid multiplicities")
    }

    fn assemble(algebra: MultiMatrixAlgebra, multiplicities: Vec<usize>, u: CMat<R>, identity: bool) -> Self {
        let mut rep = Self { algebra, multiplicities, block_unitary: u, identity_unitary: identity, commutant: vec![] };
        rep.commutant = rep.structural_commutant();
        rep
    }

    pub fn algebra(&self) -> &MultiMatrixAlgebra {
        &self.algebra
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn block_unitary(&self) -> &CMat<R> {
        &self.block_unitary
    }

    pub fn hilbert_dim(&self) -> usize {
        self.block_unitary.nrows()
    }

    fn space_offsets(&self) -> Vec<usize> {
        offsets(self.algebra.blocks().iter().zip(&self.multiplicities).map(|(n, m)| n * m))
    }

    fn conjugate(&self, t: CMat<R>) -> CMat<R> {
        if self.identity_unitary {
            t
        } else {
            &self.block_unitary * t * self.block_unitary.adjoint()
        }
    }

    fn standard_embed(&self, x: &Element<R>) -> CMat<R> {
        let parts: Vec<CMat<R>> = x
            .blocks
            .iter()
            .zip(&self.multiplicities)
            .map(|(b, &m)| linalg::kron(b, &linalg::eye(m)))
            .collect();
        linalg::block_diag(&parts)
    }

    pub fn embed(&self, x: &Element<R>) -> CMat<R> {
        self.conjugate(self.standard_embed(x))
    }

    /// Embedded matrix units, in coordinate order.
    pub fn embedded_basis(&self) -> Vec<CMat<R>> {
        self.algebra.basis().iter().map(|e| self.embed(e)).collect()
    }

    fn structural_commutant(&self) -> Vec<CMat<R>> {
        let mut out = vec![];
        for (a, (&n, &m)) in self.algebra.blocks().iter().zip(&self.multiplicities).enumerate() {
            for k in 0..m {
                for l in 0..m {
                    let parts: Vec<CMat<R>> = self
                        .algebra
                        .blocks()
                        .iter()
                        .zip(&self.multiplicities)
                        .enumerate()
                        .map(|(b, (&nb, &mb))| {
                            if b == a {
                                linalg::kron(&linalg::eye(n), &linalg::matrix_unit(m, k, l))
                            } else {
                                linalg::zeros(nb * mb, nb * mb)
                            }
                        })
                        .collect();
                    out.push(self.conjugate(linalg::block_diag(&parts)));
                }
            }
        }
        out
    }

    /// Basis of `M′ = ⊕ 1 ⊗ M_{m(α)}` (conjugated by the block unitary).
    pub fn commutant_basis(&self) -> &[CMat<R>] {
        &self.commutant
    }

    /// The commutant recomputed from the commutation equations alone.
    pub fn commutant_by_nullspace(&self, tol: R) -> Vec<CMat<R>> {
        let pairs: Vec<(CMat<R>, CMat<R>)> = self.embedded_basis().into_iter().map(|x| (x.clone(), x)).collect();
        linalg::intertwiners(&pairs, tol)
    }

    /// Isometry `C^{n(α)} ⊗ C^{m(α)} → H` onto the range of `1_α`.
    pub fn block_isometry(&self, alpha: usize) -> CMat<R> {
        let offs = self.space_offsets();
        let width = self.algebra.blocks()[alpha] * self.multiplicities[alpha];
        self.block_unitary.columns(offs[alpha], width).into_owned()
    }

    pub fn central_projection(&self, alpha: usize) -> CMat<R> {
        self.embed(&self.algebra.central(alpha))
    }

    /// Trace-preserving conditional expectation of `B(H)` onto `M`, returned as
    /// an algebra element: the normalized partial trace over each multiplicity
    /// factor. Also returns how far `t` is from the embedded element.
    pub fn unembed(&self, t: &CMat<R>) -> (Element<R>, R) {
        let s = if self.identity_unitary { t.clone() } else { self.block_unitary.adjoint() * t * &self.block_unitary };
        let offs = self.space_offsets();
        let mut blocks = vec![];
        for (a, (&n, &m)) in self.algebra.blocks().iter().zip(&self.multiplicities).enumerate() {
            let o = offs[a];
            let scale = cr(R::one() / R::lit(m as f64));
            blocks.push(DMatrix::from_fn(n, n, |i, j| {
                let mut acc = cr(R::zero());
                for k in 0..m {
                    acc += s[(o + i * m + k, o + j * m + k)];
                }
                acc * scale
            }));
        }
        let x = Element { blocks };
        let resid = linalg::max_abs(&(self.embed(&x) - t));
        (x, resid)
    }

    /// The same algebra acting on the conjugate space by transposes; elements
    /// of the opposite algebra are stored transposed (see [`MultiMatrixAlgebra::opposite`]).
    pub fn opposite(&self) -> Self {
        Self::assemble(
            self.algebra.opposite(),
            self.multiplicities.clone(),
            linalg::conj(&self.block_unitary),
            self.identity_unitary,
        )
    }

    /// Same algebra, multiplicities and identification of `H`.
    pub fn same_as(&self, other: &Self, tol: R) -> bool {
        self.algebra == other.algebra
            && self.multiplicities == other.multiplicities
            && linalg::max_abs_diff(&self.block_unitary, &other.block_unitary) <= tol
    }
}

fn hilbert_dim(algebra: &MultiMatrixAlgebra, mult: &[usize]) -> Result<usize> {
    if mult.len() != algebra.num_blocks() {
        return Err(shape("one multiplicity per block"));
    }
    if mult.iter().any(|&m| m == 0) {
        return Err(invalid("multiplicities must be positive"));
    }
    Ok(algebra.blocks().iter().zip(mult).map(|(n, m)| n * m).sum())
}

/// A faithful positive functional `φ = Tr_M(Q ·)`.
#[derive(Debug, Clone)]
pub struct Functional<R: Real> {
    algebra: MultiMatrixAlgebra,
    densities: Vec<CMat<R>>,
    markov: bool,
    eig: Vec<(Vec<R>, CMat<R>)>,
}

impl<R: Real> Functional<R> {
    pub fn new(algebra: MultiMatrixAlgebra, densities: Vec<CMat<R>>) -> Result<Self> {
        let q = Element { blocks: densities };
        algebra.check(&q)?;
        let mut eig = vec![];
        for b in &q.blocks {
            let scale = linalg::max_abs(b).max(R::default_epsilon());
            if linalg::max_abs(&(b - b.adjoint())) > R::lit(1e-10).max(R::default_epsilon() * R::lit(100.0)) * scale {
                return Err(invalid("density is not Hermitian"));
            }
            let HermEig { values, vectors } = herm_eig(b);
            let top = values.iter().fold(R::zero(), |m, v| m.max(v.abs()));
            if values.iter().any(|&v| v <= R::lit(1e-12) * top) || top <= R::zero() {
                return Err(invalid("density is not positive definite"));
            }
            eig.push((values, vectors));
        }
        let markov = q.blocks.iter().all(|b| linalg::max_abs_diff(b, &linalg::eye(b.nrows())) == R::zero());
        let densities = q.blocks.iter().map(linalg::hermitian_part).collect();
        Ok(Self { algebra, densities, markov, eig })
    }

    pub fn markov(algebra: MultiMatrixAlgebra) -> Self {
        let q = algebra.one::<R>().blocks;
        Self::new(algebra, q).expect("identity densities")
    }

    pub fn algebra(&self) -> &MultiMatrixAlgebra {
        &self.algebra
    }

    pub fn densities(&self) -> &[CMat<R>] {
        &self.densities
    }

    pub fn is_markov_trace(&self) -> bool {
        self.markov
    }

    pub fn eval(&self, x: &Element<R>) -> C<R> {
        let qx = Element { blocks: self.densities.clone() }.mul(x);
        self.algebra.markov_trace(&qx).expect("shape checked by caller")
    }

    /// `Q^s` for complex `s`, via `λ^s = exp(s log λ)`.
    pub fn q_power(&self, s: C<R>) -> Element<R> {
        Element {
            blocks: self
                .eig
                .iter()
                .map(|(vals, vecs)| {
                    let n = vals.len();
                    let mut scaled = vecs.clone();
                    for k in 0..n {
                        let f = (s * cr(vals[k].ln())).exp();
                        for r in 0..n {
                            scaled[(r, k)] *= f;
                        }
                    }
                    scaled * vecs.adjoint()
                })
                .collect(),
        }
    }

    pub fn q_real_power(&self, s: R) -> Element<R> {
        self.q_power(cr(s))
    }

    /// `σ_z(x) = Q^{iz} x Q^{-iz}`; e.g. `σ_{i/2}(x) = Q^{-1/2} x Q^{1/2}`.
    pub fn sigma(&self, z: C<R>, x: &Element<R>) -> Element<R> {
        let iz = Complex::new(-z.im, z.re);
        self.q_power(iz).mul(x).mul(&self.q_power(-iz))
    }
}

/// `L²(M, φ)` in the coordinates `c(x)_α = √n(α) · vec(x_α Q_α^{1/2})`.
#[derive(Debug, Clone)]
pub struct GnsSpace<R: Real> {
    functional: Functional<R>,
    rep: RepresentedAlgebra<R>,
    offs: Vec<usize>,
    q_half: Element<R>,
    q_mhalf: Element<R>,
}

impl<R: Real> GnsSpace<R> {
    pub fn new(functional: Functional<R>) -> Self {
        let algebra = functional.algebra().clone();
        let offs = algebra.coord_offsets();
        let q_half = functional.q_real_power(R::lit(0.5));
        let q_mhalf = functional.q_real_power(R::lit(-0.5));
        let rep = RepresentedAlgebra::gns(algebra);
        Self { functional, rep, offs, q_half, q_mhalf }
    }

    pub fn markov(algebra: MultiMatrixAlgebra) -> Self {
        Self::new(Functional::markov(algebra))
    }

    pub fn algebra(&self) -> &MultiMatrixAlgebra {
        self.functional.algebra()
    }

    pub fn functional(&self) -> &Functional<R> {
        &self.functional
    }

    /// The left action of `M` on its GNS space as a represented algebra.
    pub fn rep(&self) -> &RepresentedAlgebra<R> {
        &self.rep
    }

    pub fn dim(&self) -> usize {
        self.algebra().dim()
    }

    pub fn coords(&self, x: &Element<R>) -> CVec<R> {
        let mut out = Vec::with_capacity(self.dim());
        for (a, &n) in self.algebra().blocks().iter().enumerate() {
            let y = &x.blocks[a] * &self.q_half.blocks[a] * cr(R::lit(n as f64).sqrt());
            out.extend(linalg::vec_rm(&y).iter().copied());
        }
        DVector::from_vec(out)
    }

    pub fn element(&self, c: &CVec<R>) -> Element<R> {
        assert_eq!(c.len(), self.dim(), "coordinate length");
        Element {
            blocks: self
                .algebra()
                .blocks()
                .iter()
                .enumerate()
                .map(|(a, &n)| {
                    let o = self.offs[a];
                    let y = linalg::unvec_rm(&c.as_slice()[o..o + n * n], n, n);
                    y * &self.q_mhalf.blocks[a] * cr(R::one() / R::lit(n as f64).sqrt())
                })
                .collect(),
        }
    }

    /// Element whose coordinates are the k-th standard basis vector.
    pub fn basis_element(&self, k: usize) -> Element<R> {
        self.element(&unit_vec(self.dim(), k))
    }

    /// Matrix of `Λ(a) ↦ Λ(xa)`.
    pub fn left_action(&self, x: &Element<R>) -> CMat<R> {
        self.rep.embed(x)
    }

    /// Matrix of `Λ(a) ↦ Λ(ax)`; an element of `M′`.
    pub fn right_action(&self, x: &Element<R>) -> CMat<R> {
        let parts: Vec<CMat<R>> = (0..self.algebra().num_blocks())
            .map(|a| {
                let n = self.algebra().blocks()[a];
                let t = &self.q_mhalf.blocks[a] * &x.blocks[a] * &self.q_half.blocks[a];
                linalg::kron(&linalg::eye(n), &t.transpose())
            })
            .collect();
        linalg::block_diag(&parts)
    }

    /// `∇^s` with `∇Λ(x) = Λ(QxQ^{-1})`.
    pub fn modular_power(&self, s: R) -> CMat<R> {
        let qs = self.functional.q_real_power(s);
        let qms = self.functional.q_real_power(-s);
        let parts: Vec<CMat<R>> =
            qs.blocks.iter().zip(&qms.blocks).map(|(a, b)| linalg::kron(a, &b.transpose())).collect();
        linalg::block_diag(&parts)
    }

    /// Real permutation `P` with `J c = P · conj(c)`: in these coordinates
    /// `J` is the block-wise conjugate transpose of `x_α Q_α^{1/2}`.
    pub fn j_matrix(&self) -> CMat<R> {
        let d = self.dim();
        let mut p = linalg::zeros(d, d);
        for (a, &n) in self.algebra().blocks().iter().enumerate() {
            let o = self.offs[a];
            for i in 0..n {
                for j in 0..n {
                    p[(o + i * n + j, o + j * n + i)] = cr(R::one());
                }
            }
        }
        p
    }

    /// `J` applied to a vector (one conjugation).
    pub fn apply_j(&self, c: &CVec<R>) -> CVec<R> {
        self.j_matrix() * c.map(|z| z.conj())
    }

    /// Matrix `K` with `c(x*) = K · conj(c(x))`.
    pub fn star_matrix(&self) -> CMat<R> {
        let parts: Vec<CMat<R>> = (0..self.algebra().num_blocks())
            .map(|a| linalg::kron(&self.q_mhalf.blocks[a], &self.q_half.blocks[a].transpose()))
            .collect();
        linalg::block_diag(&parts) * self.j_matrix()
    }

    pub fn sigma(&self, z: C<R>, x: &Element<R>) -> Element<R> {
        self.functional.sigma(z, x)
    }

    /// The multiplication map `m(Λx ⊗ Λy) = Λ(xy)` as a `d × d²` matrix.
    pub fn mult_map(&self) -> CMat<R> {
        let d = self.dim();
        let basis: Vec<Element<R>> = (0..d).map(|k| self.basis_element(k)).collect();
        let mut m = linalg::zeros(d, d * d);
        for a in 0..d {
            for b in 0..d {
                if self.block_of(a) != self.block_of(b) {
                    continue;
                }
                let col = self.coords(&basis[a].mul(&basis[b]));
                m.set_column(a * d + b, &col);
            }
        }
        m
    }

    /// Block index of a GNS coordinate.
    pub fn block_of(&self, k: usize) -> usize {
        self.offs.iter().rposition(|&o| o <= k).expect("valid coordinate")
    }

    /// Matrix converting algebra coordinates to GNS coordinates.
    pub fn from_algebra_coords(&self) -> CMat<R> {
        let alg = self.algebra();
        let cols: Vec<CVec<R>> = alg.basis().iter().map(|e| self.coords(e)).collect();
        linalg::hstack(self.dim(), &cols)
    }

    /// Matrix converting GNS coordinates to algebra coordinates.
    pub fn to_algebra_coords(&self) -> CMat<R> {
        let alg = self.algebra();
        let cols: Vec<CVec<R>> = (0..self.dim()).map(|k| alg.coords(&self.basis_element(k))).collect();
        linalg::hstack(self.dim(), &cols)
    }

    pub fn one_coords(&self) -> CVec<R> {
        self.coords(&self.algebra().one())
    }

    pub fn same_as(&self, other: &Self, tol: R) -> bool {
        self.algebra() == other.algebra()
            && self
                .functional
                .densities()
                .iter()
                .zip(other.functional.densities())
                .all(|(a, b)| linalg::max_abs_diff(a, b) <= tol)
    }
}
