//! Subspaces of `B(H, K)` held as an HS-orthonormal basis.
//!
//! Equality is decided on orthogonal projections, never on bases, since the
//! basis produced by an SVD is not canonical.

use crate::error::{shape, Result};
use crate::linalg::{self, col_unvec};
use crate::scalar::{cr, CMat, Real};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone)]
pub struct OperatorSubspace<R: Real> {
    rows: usize,
    cols: usize,
    /// `(rows·cols) × dim`, orthonormal columns, row-major vectorized operators.
    basis: CMat<R>,
    tol: R,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    Equal,
    Subset,
    Superset,
    Incomparable,
}

/// Beyond this many candidate products, spans of products are computed from
/// random combinations instead of all pairs (see [`span_of_products`]).
const EXHAUSTIVE_FACTOR: usize = 3;

impl<R: Real> OperatorSubspace<R> {
    pub fn zero(rows: usize, cols: usize, tol: R) -> Self {
        Self { rows, cols, basis: linalg::zeros(rows * cols, 0), tol }
    }

    pub fn full(rows: usize, cols: usize, tol: R) -> Self {
        Self { rows, cols, basis: linalg::eye(rows * cols), tol }
    }

    /// Span of the generators; the rank threshold is relative to the largest
    /// singular value of the stacked generators.
    pub fn span_of(rows: usize, cols: usize, generators: &[CMat<R>], tol: R) -> Result<Self> {
        Self::span_scaled(rows, cols, generators, tol, R::zero())
    }

    /// As [`Self::span_of`], but with an absolute floor `tol·scale` so that
    /// products that vanish up to rounding are recognised as zero.
    pub(crate) fn span_scaled(rows: usize, cols: usize, generators: &[CMat<R>], tol: R, scale: R) -> Result<Self> {
        if let Some(g) = generators.iter().find(|g| g.shape() != (rows, cols)) {
            return Err(shape(format!("generator is {:?}, expected {:?}", g.shape(), (rows, cols))));
        }
        if generators.is_empty() || rows * cols == 0 {
            return Ok(Self::zero(rows, cols, tol));
        }
        let stacked = DMatrix::from_fn(rows * cols, generators.len(), |i, k| generators[k][(i / cols, i % cols)]);
        let basis = linalg::range_basis(&stacked, tol, tol * scale);
        Ok(Self { rows, cols, basis, tol })
    }

    /// `(d_out, d_in)`.
    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn tol(&self) -> R {
        self.tol
    }

    pub fn with_tol(mut self, tol: R) -> Self {
        self.tol = tol;
        self
    }

    pub fn basis_matrix(&self) -> &CMat<R> {
        &self.basis
    }

    pub fn onb(&self) -> Vec<CMat<R>> {
        (0..self.dim()).map(|k| col_unvec(&self.basis, k, self.rows, self.cols)).collect()
    }

    pub fn projection(&self) -> CMat<R> {
        &self.basis * self.basis.adjoint()
    }

    fn check_dims(&self, other: &Self) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(shape(format!("subspace dims {:?} vs {:?}", self.dims(), other.dims())));
        }
        Ok(())
    }

    /// Norm of the component of `t` orthogonal to the subspace.
    pub fn residual(&self, t: &CMat<R>) -> R {
        let v = linalg::vec_rm(t);
        let coeff = self.basis.adjoint() * &v;
        (v - &self.basis * coeff).norm()
    }

    pub fn contains(&self, t: &CMat<R>) -> bool {
        let scale = linalg::frob(t).max(R::one());
        self.residual(t) <= self.tol * scale
    }

    /// Largest residual of an orthonormal basis of `self` against `other`.
    pub fn excess_over(&self, other: &Self) -> R {
        if self.dim() == 0 {
            return R::zero();
        }
        let r = &self.basis - &other.basis * (other.basis.adjoint() * &self.basis);
        (0..r.ncols()).map(|k| r.column(k).norm()).fold(R::zero(), |m, v| m.max(v))
    }

    pub fn is_subspace_of(&self, other: &Self) -> bool {
        self.dims() == other.dims() && self.excess_over(other) <= self.tol.max(other.tol)
    }

    pub fn compare(&self, other: &Self) -> Result<Comparison> {
        self.check_dims(other)?;
        Ok(match (self.is_subspace_of(other), other.is_subspace_of(self)) {
            (true, true) => Comparison::Equal,
            (true, false) => Comparison::Subset,
            (false, true) => Comparison::Superset,
            (false, false) => Comparison::Incomparable,
        })
    }

    /// Entrywise distance between the orthogonal projections.
    pub fn distance(&self, other: &Self) -> R {
        if self.dims() != other.dims() {
            return R::max_value().unwrap_or(R::one());
        }
        linalg::max_abs_diff(&self.projection(), &other.projection())
    }

    pub fn equals(&self, other: &Self) -> bool {
        self.distance(other) <= self.tol.max(other.tol)
    }

    /// `V ∩ W`: the nullspace of `(1 − P_W)` restricted to `V`, mapped back.
    pub fn intersect(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        if self.dim() == 0 || other.dim() == 0 {
            return Ok(Self::zero(self.rows, self.cols, self.tol));
        }
        let outside = &self.basis - &other.basis * (other.basis.adjoint() * &self.basis);
        // Absolute threshold: the columns of `self.basis` are orthonormal.
        let svd = linalg::svd_full_v(&outside);
        let keep: Vec<usize> = (0..self.dim()).filter(|&k| svd.s[k] <= self.tol).collect();
        let null = DMatrix::from_fn(self.dim(), keep.len(), |i, k| svd.v[(i, keep[k])]);
        let basis = &self.basis * null;
        Ok(Self { rows: self.rows, cols: self.cols, basis, tol: self.tol })
    }

    /// `V + W`.
    pub fn sum(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        let mut gens = self.onb();
        gens.extend(other.onb());
        Self::span_scaled(self.rows, self.cols, &gens, self.tol, R::one())
    }

    /// `{v* : v ∈ V}`.
    pub fn adjoint(&self) -> Self {
        let gens: Vec<CMat<R>> = self.onb().iter().map(|v| v.adjoint()).collect();
        let basis = stack(&gens, self.cols, self.rows);
        Self { rows: self.cols, cols: self.rows, basis, tol: self.tol }
    }

    /// `{vᵀ : v ∈ V}`.
    pub fn transpose(&self) -> Self {
        let gens: Vec<CMat<R>> = self.onb().iter().map(|v| v.transpose()).collect();
        let basis = stack(&gens, self.cols, self.rows);
        Self { rows: self.cols, cols: self.rows, basis, tol: self.tol }
    }

    /// `span{a v b}` for fixed operators `a`, `b` (e.g. ∇-conjugation).
    pub fn sandwich(&self, a: &CMat<R>, b: &CMat<R>) -> Result<Self> {
        if a.ncols() != self.rows || b.nrows() != self.cols {
            return Err(shape("sandwich factors do not match subspace dims"));
        }
        let gens: Vec<CMat<R>> = self.onb().iter().map(|v| a * v * b).collect();
        // The basis has unit norm, so products below tol·‖a‖‖b‖ are rounding.
        Self::span_scaled(a.nrows(), b.ncols(), &gens, self.tol, linalg::opnorm(a) * linalg::opnorm(b))
    }

    /// Orthonormal basis elements, orthonormalized after a linear map has been
    /// applied; used for quotients like `{T v : v ∈ V}`.
    pub fn map_left(&self, a: &CMat<R>) -> Result<Self> {
        self.sandwich(a, &linalg::eye(self.cols))
    }
}

fn stack<R: Real>(gens: &[CMat<R>], rows: usize, cols: usize) -> CMat<R> {
    DMatrix::from_fn(rows * cols, gens.len(), |i, k| gens[k][(i / cols, i % cols)])
}

/// `V∘W = span{v w}` for `V ⊆ B(K, L)`, `W ⊆ B(H, K)`.
pub fn compose_spaces<R: Real>(v: &OperatorSubspace<R>, w: &OperatorSubspace<R>) -> Result<OperatorSubspace<R>> {
    if v.cols != w.rows {
        return Err(shape(format!("cannot compose {:?} after {:?}", v.dims(), w.dims())));
    }
    let tol = v.tol.max(w.tol);
    span_of_products(v.rows, w.cols, &[v.onb(), w.onb()], tol)
}

/// `span{a g b : a ∈ A, g ∈ G, b ∈ B}`; one pass suffices when `A` and `B`
/// span algebras.
pub fn bimodule_generate<R: Real>(
    left: &[CMat<R>],
    generators: &[CMat<R>],
    right: &[CMat<R>],
    tol: R,
) -> Result<OperatorSubspace<R>> {
    let (Some(a0), Some(b0)) = (left.first(), right.first()) else {
        return Err(shape("multiplier sets must be non-empty"));
    };
    let rows = a0.nrows();
    let cols = b0.ncols();
    if let Some(g) = generators.iter().find(|g| g.shape() != (a0.ncols(), b0.nrows())) {
        return Err(shape(format!("generator is {:?}, multipliers need {:?}", g.shape(), (a0.ncols(), b0.nrows()))));
    }
    if generators.is_empty() {
        return Ok(OperatorSubspace::zero(rows, cols, tol));
    }
    // Orthonormalize the generators first so that the absolute floor is meaningful.
    let g = OperatorSubspace::span_of(a0.ncols(), b0.nrows(), generators, tol)?;
    let left_n = normalized(left);
    let right_n = normalized(right);
    span_of_products(rows, cols, &[left_n, g.onb(), right_n], tol)
}

fn normalized<R: Real>(ms: &[CMat<R>]) -> Vec<CMat<R>> {
    ms.iter()
        .filter_map(|m| {
            let n = linalg::frob(m);
            (n > R::zero()).then(|| m * cr(R::one() / n))
        })
        .collect()
}

/// Span of all products `f₁ f₂ ⋯ f_k` with `f_i` drawn from the i-th factor list.
///
/// When the number of products is large compared with the ambient dimension,
/// the span is computed from products of random Gaussian combinations of each
/// factor list instead. The image of a multilinear map is an irreducible
/// variety, so `D + 8` generic samples span its linear hull with probability
/// one; the generator is seeded so results are reproducible.
pub fn span_of_products<R: Real>(rows: usize, cols: usize, factors: &[Vec<CMat<R>>], tol: R) -> Result<OperatorSubspace<R>> {
    if factors.iter().any(|f| f.is_empty()) {
        return Ok(OperatorSubspace::zero(rows, cols, tol));
    }
    let ambient = rows * cols;
    let count: usize = factors.iter().map(|f| f.len()).product();
    let mut gens = vec![];
    if count <= EXHAUSTIVE_FACTOR * ambient {
        let mut idx = vec![0usize; factors.len()];
        loop {
            let mut p = factors[0][idx[0]].clone();
            for (f, &i) in factors.iter().zip(&idx).skip(1) {
                p = p * &f[i];
            }
            gens.push(p);
            let mut k = factors.len();
            loop {
                if k == 0 {
                    return OperatorSubspace::span_scaled(rows, cols, &gens, tol, R::one());
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < factors[k].len() {
                    break;
                }
                idx[k] = 0;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0f_5ba5);
    let samples = ambient + 8;
    let norm = |len: usize| R::lit(1.0 / (len as f64).sqrt());
    for _ in 0..samples {
        let mut p: Option<CMat<R>> = None;
        for f in factors {
            let mut comb = linalg::zeros::<R>(f[0].nrows(), f[0].ncols());
            for m in f {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                comb += m * nalgebra::Complex::new(R::lit(re), R::lit(im));
            }
            comb *= cr(norm(f.len()));
            p = Some(match p {
                None => comb,
                Some(acc) => acc * comb,
            });
        }
        gens.push(p.expect("non-empty factor list"));
    }
    OperatorSubspace::span_scaled(rows, cols, &gens, tol, R::one())
}

/// `span{a (v ⊗ E) b : v ∈ V, E ∈ B(C^{l_in}, C^{l_out})}`.
///
/// Elementary tensors span `V ⊗ B(C^{l_in}, C^{l_out})`, so when there are
/// many of them the span is computed from seeded random elementary tensors,
/// as in [`span_of_products`].
pub fn tensor_sandwich_span<R: Real>(
    a: &CMat<R>,
    v: &OperatorSubspace<R>,
    l_out: usize,
    l_in: usize,
    b: &CMat<R>,
    tol: R,
) -> Result<OperatorSubspace<R>> {
    let (rows, cols) = (a.nrows(), b.ncols());
    if a.ncols() != v.rows * l_out || b.nrows() != v.cols * l_in {
        return Err(shape("sandwich factors do not match V ⊗ B(L_in, L_out)"));
    }
    let onb = v.onb();
    if onb.is_empty() || l_out * l_in == 0 {
        return Ok(OperatorSubspace::zero(rows, cols, tol));
    }
    let ambient = rows * cols;
    let count = onb.len() * l_out * l_in;
    let mut gens = vec![];
    if count <= EXHAUSTIVE_FACTOR * ambient {
        for w in &onb {
            for k in 0..l_out * l_in {
                gens.push(a * linalg::kron(w, &linalg::unit_matrix(l_out, l_in, k)) * b);
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_7e_5a4d);
        let mut draw = |n: usize| -> Vec<nalgebra::Complex<R>> {
            (0..n)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    nalgebra::Complex::new(R::lit(re), R::lit(im))
                })
                .collect()
        };
        let wn = cr(R::lit(1.0 / (onb.len() as f64).sqrt()));
        let en = cr(R::lit(1.0 / ((l_out * l_in) as f64).sqrt()));
        for _ in 0..ambient + 8 {
            let cw = draw(onb.len());
            let mut w = linalg::zeros::<R>(v.rows, v.cols);
            for (m, c) in onb.iter().zip(cw) {
                w += m * c;
            }
            let ce = draw(l_out * l_in);
            let e = DMatrix::from_fn(l_out, l_in, |i, j| ce[i * l_in + j]);
            gens.push(a * linalg::kron(&(w * wn), &(e * en)) * b);
        }
    }
    OperatorSubspace::span_scaled(rows, cols, &gens, tol, R::one())
}
