//! Completely positive maps `θ : N → M` between represented algebras, their
//! Kraus/Stinespring data, and the relation `V^θ ⊆ B(H, K)` they induce.

use crate::error::{consistency, invalid, precondition, shape, Result};
use crate::linalg::{self, herm_eig};
use crate::mvnalg::{Element, Functional, MultiMatrixAlgebra, RepresentedAlgebra};
use crate::opspace::{tensor_sandwich_span, OperatorSubspace};
use crate::qrel::QuantumRelation;
use crate::scalar::{cr, CMat, Real};
use crate::search::maximize_min_eigenvalue;
use nalgebra::{ComplexField, DMatrix};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CpFlags {
    pub unital: bool,
    pub hom: bool,
    /// Most negative eigenvalue over the block-Choi matrices.
    pub min_choi_eigenvalue: f64,
}

/// `θ : N → M`, with `N` represented on `K` (source) and `M` on `H` (target).
#[derive(Debug, Clone)]
pub struct CpMap<R: Real> {
    source: RepresentedAlgebra<R>,
    target: RepresentedAlgebra<R>,
    /// `dim M × dim N` in algebra coordinates.
    action: CMat<R>,
    kraus: Vec<CMat<R>>,
    flags: CpFlags,
    tol: R,
}

#[derive(Debug, Clone)]
pub struct Stinespring<R: Real> {
    /// `H → K ⊗ C^r`.
    pub v: CMat<R>,
    pub r: usize,
    pub minimal: bool,
}

/// Action matrix of an arbitrary linear map given as a closure.
pub fn action_from_fn<R: Real>(
    source: &MultiMatrixAlgebra,
    target: &MultiMatrixAlgebra,
    mut f: impl FnMut(&Element<R>) -> Element<R>,
) -> CMat<R> {
    let cols: Vec<_> = source.basis::<R>().iter().map(|e| target.coords(&f(e))).collect();
    linalg::hstack(target.dim(), &cols)
}

/// Minimum eigenvalue of the block-Choi matrices `[θ(e^α_ij)]_ij`, taken
/// block by block in the target.
pub fn block_choi_min<R: Real>(source: &MultiMatrixAlgebra, target: &MultiMatrixAlgebra, action: &CMat<R>) -> R {
    let mut worst = R::max_value().unwrap_or(R::one());
    for (a, &n) in source.blocks().iter().enumerate() {
        let images: Vec<Element<R>> = (0..n * n)
            .map(|k| {
                let col = action.column(source.coord_index(a, k / n, k % n)).into_owned();
                target.element(&col)
            })
            .collect();
        for (b, &m) in target.blocks().iter().enumerate() {
            let choi = DMatrix::from_fn(n * m, n * m, |r, c| images[(r / m) * n + c / m].blocks[b][(r % m, c % m)]);
            worst = worst.min(linalg::min_eigenvalue(&linalg::hermitian_part(&choi)));
        }
    }
    worst
}

impl<R: Real> CpMap<R> {
    /// Validates complete positivity and derives flags and a minimal Kraus set.
    pub fn new(source: RepresentedAlgebra<R>, target: RepresentedAlgebra<R>, action: CMat<R>, tol: R) -> Result<Self> {
        let (n, m) = (source.algebra(), target.algebra());
        if action.shape() != (m.dim(), n.dim()) {
            return Err(shape(format!("action must be {}×{}", m.dim(), n.dim())));
        }
        let scale = linalg::max_abs(&action).max(R::one());
        let choi_min = block_choi_min(n, m, &action);
        if choi_min < -tol * scale {
            return Err(invalid(format!(
                "map is not completely positive: most negative block-Choi eigenvalue {:.3e}",
                choi_min.to_f64_lossy()
            )));
        }
        let apply = |x: &Element<R>| m.element(&(&action * n.coords(x)));
        let unital = apply(&n.one()).dist(&m.one()) <= tol * scale;
        let basis = n.basis::<R>();
        let images: Vec<Element<R>> = basis.iter().map(apply).collect();
        let mut hom = true;
        'outer: for (i, x) in basis.iter().enumerate() {
            if images[i].adjoint().dist(&apply(&x.adjoint())) > tol * scale {
                hom = false;
                break;
            }
            for (j, y) in basis.iter().enumerate() {
                if images[i].mul(&images[j]).dist(&apply(&x.mul(y))) > tol * scale * scale {
                    hom = false;
                    break 'outer;
                }
            }
        }
        let flags = CpFlags { unital, hom, min_choi_eigenvalue: choi_min.to_f64_lossy() };
        let mut map = Self { source, target, action, kraus: vec![], flags, tol };
        map.kraus = map.extract_kraus()?;
        Ok(map)
    }

    pub fn from_fn(
        source: RepresentedAlgebra<R>,
        target: RepresentedAlgebra<R>,
        f: impl Fn(&Element<R>) -> Element<R>,
        tol: R,
    ) -> Result<Self> {
        let action = action_from_fn(source.algebra(), target.algebra(), f);
        Self::new(source, target, action, tol)
    }

    /// `θ(y) = Σ b_i† y b_i` with `b_i : H → K`; the image must lie in `M`.
    pub fn from_kraus(source: RepresentedAlgebra<R>, target: RepresentedAlgebra<R>, kraus: &[CMat<R>], tol: R) -> Result<Self> {
        let (dk, dh) = (source.hilbert_dim(), target.hilbert_dim());
        if let Some(b) = kraus.iter().find(|b| b.shape() != (dk, dh)) {
            return Err(shape(format!("Kraus operator is {:?}, expected {:?}", b.shape(), (dk, dh))));
        }
        let scale = kraus.iter().fold(R::one(), |s, b| s.max(linalg::opnorm(b).powi(2)));
        let mut worst = R::zero();
        let action = action_from_fn(source.algebra(), target.algebra(), |y| {
            let ey = source.embed(y);
            let mut t = linalg::zeros::<R>(dh, dh);
            for b in kraus {
                t += b.adjoint() * &ey * b;
            }
            let (x, res) = target.unembed(&t);
            worst = worst.max(res);
            x
        });
        if worst > tol * scale * R::lit(kraus.len().max(1) as f64) {
            return Err(invalid(format!("Kraus map does not land in the target algebra (residual {:.3e})", worst.to_f64_lossy())));
        }
        Self::new(source, target, action, tol)
    }

    /// The identity of an algebra, on a given representation.
    pub fn identity(rep: &RepresentedAlgebra<R>, tol: R) -> Self {
        let d = rep.algebra().dim();
        Self::new(rep.clone(), rep.clone(), linalg::eye(d), tol).expect("identity is CP")
    }

    /// `θ(f)(x) = Σ_y p(y|x) f(y)` from a row-stochastic matrix `p[x][y]`,
    /// as a map `ℓ^∞(Y) → ℓ^∞(X)` on multiplicity-one representations.
    pub fn classical_channel(p: &[Vec<f64>], tol: R) -> Result<Self> {
        let nx = p.len();
        let ny = p.first().map_or(0, |r| r.len());
        if nx == 0 || ny == 0 || p.iter().any(|r| r.len() != ny) {
            return Err(shape("channel must be a non-empty rectangular matrix"));
        }
        for (x, row) in p.iter().enumerate() {
            if row.iter().any(|&q| !(q >= 0.0) || !q.is_finite()) {
                return Err(invalid(format!("row {x} has a negative or non-finite entry")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(invalid(format!("row {x} sums to {s}, not 1")));
            }
        }
        let action = DMatrix::from_fn(nx, ny, |x, y| cr(R::lit(p[x][y])));
        Self::new(
            RepresentedAlgebra::standard(MultiMatrixAlgebra::diagonal(ny)),
            RepresentedAlgebra::standard(MultiMatrixAlgebra::diagonal(nx)),
            action,
            tol,
        )
    }

    pub fn source(&self) -> &RepresentedAlgebra<R> {
        &self.source
    }

    pub fn target(&self) -> &RepresentedAlgebra<R> {
        &self.target
    }

    pub fn action(&self) -> &CMat<R> {
        &self.action
    }

    pub fn flags(&self) -> CpFlags {
        self.flags
    }

    pub fn tol(&self) -> R {
        self.tol
    }

    pub fn kraus(&self) -> &[CMat<R>] {
        &self.kraus
    }

    pub fn apply(&self, y: &Element<R>) -> Element<R> {
        let (n, m) = (self.source.algebra(), self.target.algebra());
        m.element(&(&self.action * n.coords(y)))
    }

    pub fn is_unital(&self) -> bool {
        self.flags.unital
    }

    pub fn is_hom(&self) -> bool {
        self.flags.hom
    }

    /// `φ_M ∘ θ = φ_N`.
    pub fn preserves(&self, phi_n: &Functional<R>, phi_m: &Functional<R>) -> bool {
        let scale = linalg::max_abs(&self.action).max(R::one());
        self.source
            .algebra()
            .basis::<R>()
            .iter()
            .all(|y| (phi_m.eval(&self.apply(y)) - phi_n.eval(y)).modulus() <= self.tol * scale)
    }

    /// Kraus operators of `ι_M ∘ θ ∘ E`, where `E : B(K) → N` is the
    /// trace-preserving conditional expectation; their restriction to `N`
    /// reproduces `θ`.
    fn extract_kraus(&self) -> Result<Vec<CMat<R>>> {
        let (dk, dh) = (self.source.hilbert_dim(), self.target.hilbert_dim());
        let mut choi = linalg::zeros::<R>(dk * dh, dk * dh);
        for a in 0..dk {
            for b in 0..dk {
                let (y, _) = self.source.unembed(&linalg::matrix_unit(dk, a, b));
                let t = self.target.embed(&self.apply(&y));
                choi.view_mut((a * dh, b * dh), (dh, dh)).copy_from(&t);
            }
        }
        let e = herm_eig(&linalg::hermitian_part(&choi));
        let top = e.values.iter().fold(R::zero(), |m, v| m.max(v.abs()));
        let mut kraus = vec![];
        for k in (0..e.values.len()).rev() {
            let l = e.values[k];
            if l <= self.tol * top || l <= R::zero() {
                continue;
            }
            let s = l.sqrt();
            kraus.push(DMatrix::from_fn(dk, dh, |i, h| e.vectors[(i * dh + h, k)].conj() * cr(s)));
        }
        let scale = top.max(R::one());
        let res = kraus_residual(&self.source, &self.target, &kraus, &self.action);
        if res > self.tol.sqrt() * scale {
            return Err(consistency(format!("Kraus set fails to reproduce the map (residual {:.3e})", res.to_f64_lossy())));
        }
        Ok(kraus)
    }

    pub fn kraus_residual(&self) -> R {
        kraus_residual(&self.source, &self.target, &self.kraus, &self.action)
    }

    /// `v = Σ b_i ⊗ δ_i : H → K ⊗ C^r`.
    pub fn stinespring(&self) -> Stinespring<R> {
        let r = self.kraus.len();
        let (dk, dh) = (self.source.hilbert_dim(), self.target.hilbert_dim());
        let mut v = linalg::zeros::<R>(dk * r, dh);
        for (i, b) in self.kraus.iter().enumerate() {
            v += linalg::kron(b, &linalg::unit_matrix(r, 1, i));
        }
        let mut cols = vec![];
        for y in self.source.embedded_basis() {
            cols.push(linalg::kron(&y, &linalg::eye(r)) * &v);
        }
        let stacked = if cols.is_empty() {
            linalg::zeros(dk * r, 0)
        } else {
            let w: usize = cols.iter().map(|c| c.ncols()).sum();
            let mut m = linalg::zeros::<R>(dk * r, w);
            let mut o = 0;
            for c in &cols {
                m.view_mut((0, o), c.shape()).copy_from(c);
                o += c.ncols();
            }
            m
        };
        let minimal = linalg::rank(&stacked, self.tol) == dk * r;
        Stinespring { v, r, minimal }
    }

    /// `V^θ = lin{y′ b_i}`, verified to be a bimodule.
    pub fn relation(&self) -> Result<QuantumRelation<R>> {
        let mut gens = vec![];
        for y in self.source.commutant_basis() {
            for b in &self.kraus {
                gens.push(y * b);
            }
        }
        relation_from_kraus_span(&self.source, &self.target, &gens, self.tol)
    }

    /// `θ₂ ∘ θ₁` where `self = θ₂`; the middle representations must agree.
    pub fn compose(&self, first: &Self) -> Result<Self> {
        if !self.source.same_as(&first.target, self.tol) {
            return Err(shape("composition needs the middle represented algebras to agree"));
        }
        Self::new(first.source.clone(), self.target.clone(), &self.action * &first.action, self.tol.max(first.tol))
    }

    /// `V^{θ*} ∘ V^θ`, a relation over `M`.
    pub fn confusability_graph(&self) -> Result<QuantumRelation<R>> {
        let v = self.relation()?;
        v.adjoint().compose(&v)
    }
}

fn kraus_residual<R: Real>(source: &RepresentedAlgebra<R>, target: &RepresentedAlgebra<R>, kraus: &[CMat<R>], action: &CMat<R>) -> R {
    let (n, m) = (source.algebra(), target.algebra());
    let dh = target.hilbert_dim();
    let mut worst = R::zero();
    for y in n.basis::<R>() {
        let ey = source.embed(&y);
        let mut t = linalg::zeros::<R>(dh, dh);
        for b in kraus {
            t += b.adjoint() * &ey * b;
        }
        let want = target.embed(&m.element(&(action * n.coords(&y))));
        worst = worst.max(linalg::max_abs_diff(&t, &want));
    }
    worst
}

/// A relation spanned by Kraus-type generators, with the bimodule property
/// verified rather than imposed.
pub(crate) fn relation_from_kraus_span<R: Real>(
    source: &RepresentedAlgebra<R>,
    target: &RepresentedAlgebra<R>,
    gens: &[CMat<R>],
    tol: R,
) -> Result<QuantumRelation<R>> {
    let space = OperatorSubspace::span_of(source.hilbert_dim(), target.hilbert_dim(), gens, tol)?;
    QuantumRelation::from_space(target.clone(), source.clone(), space, true).map_err(|e| match e {
        crate::error::Error::Invalid(msg) => consistency(format!("Kraus span is not a bimodule: {msg}")),
        other => other,
    })
}

/// Pullback of `V` (from `M₁` to `N₁`) along `θ_M : M₁ → M₂` and
/// `θ_N : N₁ → N₂`, computed by composing relations and, independently, from
/// the Stinespring dilations. The two must agree.
pub fn pullback<R: Real>(v: &QuantumRelation<R>, theta_m: &CpMap<R>, theta_n: &CpMap<R>) -> Result<QuantumRelation<R>> {
    let tol = v.tol();
    if !v.source().same_as(theta_m.source(), tol) || !v.target().same_as(theta_n.source(), tol) {
        return Err(shape("pullback needs V to act between the domains of the two maps"));
    }
    let composed = theta_n.relation()?.adjoint().compose(&v.compose(&theta_m.relation()?)?)?;
    let dilated = pullback_by_dilation(v, theta_m, theta_n)?;
    if !dilated.equals(composed.space()) {
        return Err(consistency(format!(
            "pullback routes disagree: composition dim {}, dilation dim {}, distance {:.3e}",
            composed.dim(),
            dilated.dim(),
            dilated.distance(composed.space()).to_f64_lossy()
        )));
    }
    Ok(composed)
}

/// The pullback as `u_N*(V ⊗ B(C^{r_M}, C^{r_N}))u_M` from minimal-size
/// Stinespring isometries, without any relation composition.
pub fn pullback_by_dilation<R: Real>(v: &QuantumRelation<R>, theta_m: &CpMap<R>, theta_n: &CpMap<R>) -> Result<OperatorSubspace<R>> {
    let um = theta_m.stinespring();
    let un = theta_n.stinespring();
    tensor_sandwich_span(&un.v.adjoint(), v.space(), un.r, um.r, &um.v, v.tol())
}

#[derive(Debug, Clone)]
pub struct UcpProbe<R: Real> {
    pub realizable: bool,
    /// `G` with `Σ G_ij u_i† u_j = 1`, positive definite.
    pub witness: Option<CMat<R>>,
    /// Largest smallest-eigenvalue of `G` found over the solution set.
    pub best_min_eigenvalue: R,
    /// Dimension of the affine solution set; the answer is exact when 0.
    pub free_parameters: usize,
    /// Whether any Hermitian `G` solves the linear constraints at all.
    pub consistent: bool,
}

/// Hermitian basis of `r×r` matrices: diagonal units, then symmetric and
/// antisymmetric off-diagonal pairs, HS-orthonormal.
fn hermitian_basis<R: Real>(r: usize) -> Vec<CMat<R>> {
    let mut out = vec![];
    let h = R::lit(std::f64::consts::FRAC_1_SQRT_2);
    for i in 0..r {
        out.push(linalg::matrix_unit(r, i, i));
    }
    for i in 0..r {
        for j in i + 1..r {
            let mut s = linalg::zeros::<R>(r, r);
            s[(i, j)] = cr(h);
            s[(j, i)] = cr(h);
            out.push(s);
            let mut a = linalg::zeros::<R>(r, r);
            a[(i, j)] = nalgebra::Complex::new(R::zero(), h);
            a[(j, i)] = nalgebra::Complex::new(R::zero(), -h);
            out.push(a);
        }
    }
    out
}

/// Can `V = lin{u_i} ⊆ B(H, K)` be `V^θ` for a unital CP `θ : B(K) → M`?
///
/// Such `θ` exist exactly when a positive definite `G` satisfies
/// `Σ G_ij u_i†u_j = 1` with every `Σ G_ij u_i† y u_j` in `M`; then
/// `b = G^{1/2}u` is a Kraus set. The linear constraints are solved exactly
/// and the affine solution set is searched by eigenvalue ascent.
pub fn ucp_realizable_full_target<R: Real>(
    basis: &[CMat<R>],
    target: &RepresentedAlgebra<R>,
    tol: R,
) -> Result<UcpProbe<R>> {
    let r = basis.len();
    let dh = target.hilbert_dim();
    let Some(u0) = basis.first() else {
        return Ok(UcpProbe { realizable: false, witness: None, best_min_eigenvalue: R::zero(), free_parameters: 0, consistent: false });
    };
    let dk = u0.nrows();
    if basis.iter().any(|u| u.shape() != (dk, dh)) {
        return Err(shape(format!("basis elements must be {dk}×{dh}")));
    }
    let herm = hermitian_basis::<R>(r);
    let gmap = |g: &CMat<R>, y: Option<&CMat<R>>| {
        let mut t = linalg::zeros::<R>(dh, dh);
        for i in 0..r {
            for j in 0..r {
                if g[(i, j)] != cr(R::zero()) {
                    let left = basis[i].adjoint();
                    t += match y {
                        Some(y) => left * y * &basis[j],
                        None => left * &basis[j],
                    } * g[(i, j)];
                }
            }
        }
        t
    };
    // Real rows: Re and Im of each entry, for Σ G u†u = 1 and [Σ G u† y u, c] = 0.
    let mut rows: Vec<Vec<R>> = vec![];
    let mut rhs: Vec<R> = vec![];
    let images: Vec<CMat<R>> = herm.iter().map(|h| gmap(h, None)).collect();
    let one = linalg::eye::<R>(dh);
    for e in 0..dh * dh {
        let (i, j) = (e / dh, e % dh);
        rows.push(images.iter().map(|m| m[(i, j)].re).collect());
        rhs.push(one[(i, j)].re);
        rows.push(images.iter().map(|m| m[(i, j)].im).collect());
        rhs.push(R::zero());
    }
    let comm: Vec<&CMat<R>> =
        target.commutant_basis().iter().filter(|c| linalg::max_abs_diff(c, &one) > R::zero()).collect();
    if !comm.is_empty() {
        for a in 0..dk {
            for b in 0..dk {
                let y = linalg::matrix_unit::<R>(dk, a, b);
                let imgs: Vec<CMat<R>> = herm.iter().map(|h| gmap(h, Some(&y))).collect();
                for c in &comm {
                    let comms: Vec<CMat<R>> = imgs.iter().map(|m| m * *c - *c * m).collect();
                    for e in 0..dh * dh {
                        let (i, j) = (e / dh, e % dh);
                        rows.push(comms.iter().map(|m| m[(i, j)].re).collect());
                        rhs.push(R::zero());
                        rows.push(comms.iter().map(|m| m[(i, j)].im).collect());
                        rhs.push(R::zero());
                    }
                }
            }
        }
    }
    let a = DMatrix::from_fn(rows.len(), herm.len(), |i, k| cr(rows[i][k]));
    let b = DMatrix::from_fn(rhs.len(), 1, |i, _| cr(rhs[i]));
    let g0 = linalg::pinv(&a, tol) * &b;
    let resid = linalg::max_abs(&(&a * &g0 - &b));
    let scale = linalg::max_abs(&a).max(R::one());
    if resid > tol.sqrt() * scale {
        return Ok(UcpProbe { realizable: false, witness: None, best_min_eigenvalue: R::zero(), free_parameters: 0, consistent: false });
    }
    let null = linalg::nullspace(&a, tol);
    let to_mat = |coef: &dyn Fn(usize) -> R| {
        let mut g = linalg::zeros::<R>(r, r);
        for (k, h) in herm.iter().enumerate() {
            g += h * cr(coef(k));
        }
        g
    };
    let h0 = to_mat(&|k| g0[(k, 0)].re);
    let dirs: Vec<CMat<R>> = (0..null.ncols()).map(|c| to_mat(&|k| null[(k, c)].re)).collect();
    let best = maximize_min_eigenvalue(&h0, &dirs, None, vec![R::zero(); dirs.len()]);
    let mut g = h0.clone();
    for (d, &t) in dirs.iter().zip(&best.t) {
        g += d * cr(t);
    }
    let realizable = best.value > tol.sqrt();
    Ok(UcpProbe {
        realizable,
        witness: realizable.then_some(g),
        best_min_eigenvalue: best.value,
        free_parameters: dirs.len(),
        consistent: true,
    })
}

/// The probe applied to the orthonormal basis of a relation, which must have
/// a full matrix algebra with multiplicity one as target.
pub fn ucp_realizable_relation<R: Real>(v: &QuantumRelation<R>) -> Result<UcpProbe<R>> {
    let t = v.target();
    if t.algebra().num_blocks() != 1 || t.multiplicities() != [1] {
        return Err(precondition("the probe needs a full matrix algebra with multiplicity one as target"));
    }
    ucp_realizable_full_target(&v.space().onb(), v.source(), v.tol())
}
