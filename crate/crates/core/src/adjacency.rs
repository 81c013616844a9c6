//! Operators on GNS spaces, the Schur product, and the correspondence between
//! quantum adjacency operators, positive elements of `N ⊗ M^op`, CP maps and
//! quantum relations.
//!
//! Conventions. A [`GnsOperator`] `A : L²(M) → L²(N)` is a matrix in the
//! Λ-orthonormal coordinates of [`GnsSpace`]. Elements of `N ⊗ M^op` act on
//! `HS(L²M, L²N)` through the row-major vectorisation, `x ⊗ b^op` being
//! `T ↦ L(x) T L(b)`, i.e. the matrix `L_N(x) ⊗ L_M(b)ᵀ`.

use crate::cpmap::CpMap;
use crate::error::{consistency, invalid, precondition, shape, Result};
use crate::linalg::{self, herm_eig};
use crate::mvnalg::{Element, Functional, GnsSpace, MultiMatrixAlgebra, RepresentedAlgebra};
use crate::opspace::{bimodule_generate, OperatorSubspace};
use crate::qfunc::Hom;
use crate::qrel::{commutant_space, intertwiner, QuantumRelation};
use crate::report::Claim;
use crate::scalar::{c, cr, CMat, CVec, Real};
use crate::search::maximize_min_eigenvalue;
use nalgebra::DMatrix;

/// A linear map `M → N`, stored as its matrix `L²(M) → L²(N)`.
#[derive(Debug, Clone)]
pub struct GnsOperator<R: Real> {
    source: GnsSpace<R>,
    target: GnsSpace<R>,
    matrix: CMat<R>,
}

/// An element of `N ⊗ M^op` acting on `HS(L²M, L²N)`.
#[derive(Debug, Clone)]
pub struct OppositeTensor<R: Real> {
    pub source: GnsSpace<R>,
    pub target: GnsSpace<R>,
    pub matrix: CMat<R>,
}

fn same_space<R: Real>(a: &GnsSpace<R>, b: &GnsSpace<R>) -> bool {
    a.same_as(b, R::default_tol())
}

fn scale_of<R: Real>(a: &CMat<R>) -> R {
    linalg::max_abs(a).max(R::one())
}

impl<R: Real> GnsOperator<R> {
    pub fn new(source: GnsSpace<R>, target: GnsSpace<R>, matrix: CMat<R>) -> Result<Self> {
        if matrix.shape() != (target.dim(), source.dim()) {
            return Err(shape(format!(
                "GNS operator is {:?}, expected {:?}",
                matrix.shape(),
                (target.dim(), source.dim())
            )));
        }
        Ok(Self { source, target, matrix })
    }

    pub fn identity(space: &GnsSpace<R>) -> Self {
        Self { source: space.clone(), target: space.clone(), matrix: linalg::eye(space.dim()) }
    }

    /// The operator `Λ(x) ↦ Λ(f(x))`.
    pub fn from_fn(source: &GnsSpace<R>, target: &GnsSpace<R>, f: impl Fn(&Element<R>) -> Element<R>) -> Self {
        let cols: Vec<CVec<R>> = (0..source.dim()).map(|k| target.coords(&f(&source.basis_element(k)))).collect();
        Self { source: source.clone(), target: target.clone(), matrix: linalg::hstack(target.dim(), &cols) }
    }

    /// The operator of a map given in algebra coordinates (e.g. a
    /// [`CpMap`] action).
    pub fn from_action(source: &GnsSpace<R>, target: &GnsSpace<R>, action: &CMat<R>) -> Result<Self> {
        if action.shape() != (target.dim(), source.dim()) {
            return Err(shape("action does not match the algebra dimensions"));
        }
        let matrix = target.from_algebra_coords() * action * source.to_algebra_coords();
        Self::new(source.clone(), target.clone(), matrix)
    }

    /// `|Λx⟩⟨Λy|`.
    pub fn rank_one(source: &GnsSpace<R>, target: &GnsSpace<R>, x: &Element<R>, y: &Element<R>) -> Self {
        let matrix = target.coords(x) * source.coords(y).adjoint();
        Self { source: source.clone(), target: target.clone(), matrix }
    }

    pub fn source(&self) -> &GnsSpace<R> {
        &self.source
    }

    pub fn target(&self) -> &GnsSpace<R> {
        &self.target
    }

    pub fn matrix(&self) -> &CMat<R> {
        &self.matrix
    }

    /// The map in algebra coordinates.
    pub fn action(&self) -> CMat<R> {
        self.target.to_algebra_coords() * &self.matrix * self.source.from_algebra_coords()
    }

    pub fn apply(&self, x: &Element<R>) -> Element<R> {
        self.target.element(&(&self.matrix * self.source.coords(x)))
    }

    pub fn scale(&self, s: R) -> Self {
        Self { matrix: &self.matrix * cr(s), ..self.clone() }
    }

    /// `self ∘ first`.
    pub fn compose(&self, first: &Self) -> Result<Self> {
        if !same_space(&self.source, &first.target) {
            return Err(shape("composition needs matching middle GNS spaces"));
        }
        Ok(Self { source: first.source.clone(), target: self.target.clone(), matrix: &self.matrix * &first.matrix })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self { matrix: &self.matrix + &other.matrix, ..self.clone() })
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if !same_space(&self.source, &other.source) || !same_space(&self.target, &other.target) {
            return Err(shape("operators act between different GNS spaces"));
        }
        Ok(())
    }

    pub fn dist(&self, other: &Self) -> R {
        linalg::max_abs_diff(&self.matrix, &other.matrix)
    }
}

/// `m(Λx ⊗ Λy) = Λ(xy)` and its adjoint.
pub fn mult_maps<R: Real>(g: &GnsSpace<R>) -> (CMat<R>, CMat<R>) {
    let m = g.mult_map();
    let ms = m.adjoint();
    (m, ms)
}

/// `A ⋆ B = m_N (A ⊗ B) m_M*`.
pub fn schur_product<R: Real>(a: &GnsOperator<R>, b: &GnsOperator<R>) -> Result<GnsOperator<R>> {
    a.check_same(b)?;
    let (mn, _) = mult_maps(&a.target);
    let (_, mms) = mult_maps(&a.source);
    let matrix = mn * linalg::kron(&a.matrix, &b.matrix) * mms;
    Ok(GnsOperator { matrix, ..a.clone() })
}

/// `A†(x) = A(x*)*`, via `c(x*) = K conj(c(x))`: two conjugations cancel, so
/// the result is linear.
pub fn dagger<R: Real>(a: &GnsOperator<R>) -> GnsOperator<R> {
    let kn = a.target.star_matrix();
    let km = a.source.star_matrix();
    let matrix = kn * linalg::conj(&(&a.matrix * km));
    GnsOperator { matrix, ..a.clone() }
}

/// `J_M A* J_N : L²(N) → L²(M)`. With `J = P ∘ conj` (P a real permutation)
/// the two conjugations turn `A*` into `Aᵀ`.
pub fn kms_adjoint<R: Real>(a: &GnsOperator<R>) -> GnsOperator<R> {
    let matrix = a.source.j_matrix() * a.matrix.transpose() * a.target.j_matrix();
    GnsOperator { source: a.target.clone(), target: a.source.clone(), matrix }
}

/// `Ψ′(|Λx⟩⟨Λy|) = x ⊗ σ_{i/2}(y)^{*op}`, summed over the columns of `A`.
pub fn psi_prime<R: Real>(a: &GnsOperator<R>) -> OppositeTensor<R> {
    let (m, n) = (&a.source, &a.target);
    let half_i = c::<R>(0.0, 0.5);
    let dim = n.dim() * m.dim();
    let mut out = linalg::zeros::<R>(dim, dim);
    for k in 0..m.dim() {
        let col: CVec<R> = a.matrix.column(k).into_owned();
        if col.iter().all(|z| *z == cr(R::zero())) {
            continue;
        }
        let x = n.element(&col);
        let b = m.sigma(half_i, &m.basis_element(k)).adjoint();
        out += linalg::kron(&n.left_action(&x), &m.left_action(&b).transpose());
    }
    OppositeTensor { source: m.clone(), target: n.clone(), matrix: out }
}

/// Nonzero entries of a sparse matrix.
fn entries<R: Real>(a: &CMat<R>) -> Vec<(usize, usize, nalgebra::Complex<R>)> {
    let mut out = vec![];
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            if a[(i, j)] != cr(R::zero()) {
                out.push((i, j, a[(i, j)]));
            }
        }
    }
    out
}

/// Inverse of [`psi_prime`]. The input is expanded in the orthogonal basis
/// `L(E_k) ⊗ L(E_l)ᵀ` of matrix units; components outside `N ⊗ M^op` are
/// discarded.
pub fn psi_prime_inv<R: Real>(x: &OppositeTensor<R>) -> Result<GnsOperator<R>> {
    let (m, n) = (&x.source, &x.target);
    let (dn, dm) = (n.dim(), m.dim());
    if x.matrix.shape() != (dn * dm, dn * dm) {
        return Err(shape("opposite tensor has the wrong size"));
    }
    let units = |alg: &MultiMatrixAlgebra| -> Vec<Element<R>> { alg.basis() };
    let en = units(n.algebra());
    let em = units(m.algebra());
    let ln: Vec<_> = en.iter().map(|e| entries(&n.left_action(e))).collect();
    let lm: Vec<_> = em.iter().map(|e| entries(&m.left_action(e))).collect();
    let mut coef = linalg::zeros::<R>(en.len(), em.len());
    for (k, u) in ln.iter().enumerate() {
        let nu: R = u.iter().fold(R::zero(), |s, e| s + e.2.norm_sqr());
        for (l, v) in lm.iter().enumerate() {
            let nv: R = v.iter().fold(R::zero(), |s, e| s + e.2.norm_sqr());
            let mut acc = cr(R::zero());
            // (U ⊗ Vᵀ)[(p,s),(q,r)] = U[p,q] V[r,s]
            for &(p, q, up) in u {
                for &(r, s, vr) in v {
                    acc += (up * vr).conj() * x.matrix[(p * dm + s, q * dm + r)];
                }
            }
            coef[(k, l)] = acc / cr(nu * nv);
        }
    }
    let mhalf_i = c::<R>(0.0, -0.5);
    let cn = linalg::hstack(dn, &en.iter().map(|e| n.coords(e)).collect::<Vec<_>>());
    let ys = linalg::hstack(dm, &em.iter().map(|e| m.coords(&m.sigma(mhalf_i, &e.adjoint()))).collect::<Vec<_>>());
    let matrix = cn * coef * ys.adjoint();
    GnsOperator::new(m.clone(), n.clone(), matrix)
}

/// `Ψ′(kms_adjoint(A))` from `Ψ′(A)`: swap the tensor legs and conjugate.
pub fn swap_star<R: Real>(x: &OppositeTensor<R>) -> OppositeTensor<R> {
    let (dn, dm) = (x.target.dim(), x.source.dim());
    let matrix = DMatrix::from_fn(dn * dm, dn * dm, |row, col| {
        let (a, i) = (row / dn, row % dn);
        let (cc, k) = (col / dn, col % dn);
        x.matrix[(i * dm + a, k * dm + cc)].conj()
    });
    OppositeTensor { source: x.target.clone(), target: x.source.clone(), matrix }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct AdjacencyFlags {
    pub cp: bool,
    pub real: bool,
    pub schur_idempotent: bool,
    pub psi_projection: bool,
}

fn psd_defect<R: Real>(x: &CMat<R>) -> (R, R) {
    let herm = linalg::max_abs(&(x - x.adjoint()));
    let low = linalg::min_eigenvalue(&linalg::hermitian_part(x));
    (herm, (-low).max(R::zero()))
}

/// CP, reality, Schur-idempotence, and whether `Ψ′(A)` is a projection; the
/// equivalences (CP ∧ idempotent) ⇔ (real ∧ idempotent) ⇔ projection are
/// checked and a disagreement is reported as an error.
pub fn classify<R: Real>(a: &GnsOperator<R>, tol: R) -> Result<AdjacencyFlags> {
    let x = psi_prime(a).matrix;
    let s = scale_of(&x).max(scale_of(&a.matrix));
    let (herm, neg) = psd_defect(&x);
    let cp = herm <= tol * s && neg <= tol * s;
    let real = dagger(a).dist(a) <= tol * s;
    let schur_idempotent = schur_product(a, a)?.dist(a) <= tol * s;
    let psi_projection = herm <= tol * s && linalg::max_abs_diff(&(&x * &x), &x) <= tol * s;
    let flags = AdjacencyFlags { cp, real, schur_idempotent, psi_projection };
    let lhs = cp && schur_idempotent;
    if lhs != (real && schur_idempotent) || lhs != psi_projection {
        return Err(consistency(format!("adjacency equivalences disagree: {flags:?}")));
    }
    Ok(flags)
}

fn psd_range<R: Real>(x: &CMat<R>, tol: R) -> CMat<R> {
    let top = herm_eig(&linalg::hermitian_part(x)).values.iter().fold(R::zero(), |m, &v| m.max(v));
    psd_range_above(x, tol * top)
}

/// Eigenvectors of a Hermitian matrix with eigenvalue above `cut` (and above 0).
fn psd_range_above<R: Real>(x: &CMat<R>, cut: R) -> CMat<R> {
    let e = herm_eig(&linalg::hermitian_part(x));
    let keep: Vec<usize> = (0..e.values.len()).filter(|&i| e.values[i] > cut && e.values[i] > R::zero()).collect();
    DMatrix::from_fn(x.nrows(), keep.len(), |i, k| e.vectors[(i, keep[k])])
}

fn unvec_cols<R: Real>(b: &CMat<R>, rows: usize, cols: usize) -> Vec<CMat<R>> {
    (0..b.ncols()).map(|k| linalg::col_unvec(b, k, rows, cols)).collect()
}

/// The relation `{∇_N^{1/4} T ∇_M^{1/4} : T ∈ Im x}` on the GNS
/// representations, computed from the image of `x`, from the bimodule
/// generated by `∇_N^{1/4} Ψ′⁻¹(x) ∇_M^{-1/4}`, and with `Q^{1/4}` in place of
/// `∇^{1/4}`. The three must agree.
pub fn relation_of_positive<R: Real>(x: &OppositeTensor<R>, tol: R) -> Result<QuantumRelation<R>> {
    let (m, n) = (&x.source, &x.target);
    let (dn, dm) = (n.dim(), m.dim());
    if x.matrix.shape() != (dn * dm, dn * dm) {
        return Err(shape("opposite tensor has the wrong size"));
    }
    let s = scale_of(&x.matrix);
    let (herm, neg) = psd_defect(&x.matrix);
    if herm > tol * s || neg > tol * s {
        return Err(invalid(format!("element is not positive (hermitian defect {:.3e}, negative part {:.3e})", herm.to_f64_lossy(), neg.to_f64_lossy())));
    }
    let quarter = R::lit(0.25);
    let ts = unvec_cols(&psd_range(&x.matrix, tol), dn, dm);

    let (dn4, dm4) = (n.modular_power(quarter), m.modular_power(quarter));
    let image: Vec<CMat<R>> = ts.iter().map(|t| &dn4 * t * &dm4).collect();
    let image = OperatorSubspace::span_of(dn, dm, &image, tol)?;

    let a = psi_prime_inv(x)?;
    let gen = &dn4 * &a.matrix * m.modular_power(-quarter);
    let bimod = bimodule_generate(n.rep().commutant_basis(), &[gen], m.rep().commutant_basis(), tol)?;

    let (qn, qm) = (n.left_action(&n.functional().q_real_power(quarter)), m.left_action(&m.functional().q_real_power(quarter)));
    let qform: Vec<CMat<R>> = ts.iter().map(|t| &qn * t * &qm).collect();
    let qform = OperatorSubspace::span_of(dn, dm, &qform, tol)?;

    if !image.equals(&bimod) || !image.equals(&qform) {
        return Err(consistency(format!(
            "relation of a positive element: image dim {}, bimodule dim {}, Q-form dim {} disagree",
            image.dim(),
            bimod.dim(),
            qform.dim()
        )));
    }
    QuantumRelation::from_space(m.rep().clone(), n.rep().clone(), image, false)
}

/// Moves a relation onto the GNS representations of its algebras.
pub fn to_gns<R: Real>(v: &QuantumRelation<R>, source: &GnsSpace<R>, target: &GnsSpace<R>) -> Result<QuantumRelation<R>> {
    if v.source().algebra() != source.algebra() || v.target().algebra() != target.algebra() {
        return Err(shape("relation algebras differ from the GNS algebras"));
    }
    let tol = v.tol();
    if v.source().same_as(source.rep(), tol) && v.target().same_as(target.rep(), tol) {
        return Ok(v.clone());
    }
    let (um, _) = intertwiner(source.rep(), v.source(), None)?;
    let (un, _) = intertwiner(target.rep(), v.target(), None)?;
    v.transport(source.rep(), &um, target.rep(), &un)
}

/// `Ψ′⁻¹` of the projection onto `∇_N^{-1/4} V ∇_M^{-1/4}`.
pub fn adjacency_of_relation<R: Real>(v: &QuantumRelation<R>, source: &GnsSpace<R>, target: &GnsSpace<R>) -> Result<GnsOperator<R>> {
    let v = to_gns(v, source, target)?;
    let q = -R::lit(0.25);
    let w = v.space().sandwich(&target.modular_power(q), &source.modular_power(q))?;
    let x = OppositeTensor { source: source.clone(), target: target.clone(), matrix: w.projection() };
    psi_prime_inv(&x)
}

/// `θ = J_M A* J_N` as a CP map `N → M` on the GNS representations, with the
/// identity `V^θ = ∇_N^{1/4} V ∇_M^{-1/4}` verified (`V` the relation of `Ψ′(A)`).
pub fn theta_of_adjacency<R: Real>(a: &GnsOperator<R>, tol: R) -> Result<(CpMap<R>, Claim)> {
    let (m, n) = (&a.source, &a.target);
    let k = kms_adjoint(a);
    let theta = CpMap::new(n.rep().clone(), m.rep().clone(), k.action(), tol)?;
    let v = relation_of_positive(&psi_prime(a), tol)?;
    let quarter = R::lit(0.25);
    let rhs = v.space().sandwich(&n.modular_power(quarter), &m.modular_power(-quarter))?;
    let lhs = theta.relation()?;
    let claim = Claim::subspaces("V^θ = ∇_N^{1/4} V ∇_M^{-1/4}", lhs.space(), &rhs);
    if !lhs.space().equals(&rhs) {
        return Err(consistency(format!("relation of θ differs from the conjugated relation of A (residual {:.3e})", claim.residual)));
    }
    Ok((theta, claim))
}

#[derive(Debug, Clone)]
pub struct Coinjectivity<R: Real> {
    pub coinjective: bool,
    /// `x₀` with `(A ∘ J A* J)(x) = x x₀`.
    pub x0: Option<Element<R>>,
    pub residual: R,
}

/// Tests whether `A ∘ J A* J` is right multiplication by an element of `N`.
pub fn coinjectivity_criterion<R: Real>(a: &GnsOperator<R>, tol: R) -> Result<Coinjectivity<R>> {
    let n = &a.target;
    let b = a.compose(&kms_adjoint(a))?;
    let x0 = n.element(&(&b.matrix * n.one_coords()));
    let residual = linalg::max_abs_diff(&b.matrix, &n.right_action(&x0));
    let s = scale_of(&b.matrix);
    if residual > tol * s {
        return Ok(Coinjectivity { coinjective: false, x0: None, residual });
    }
    if x0.central_defect() > tol * s * R::lit(10.0) || x0.min_eigenvalue() < -tol * s * R::lit(10.0) {
        return Err(consistency("A∘JA*J is a right multiplication but x₀ is not central and positive"));
    }
    Ok(Coinjectivity { coinjective: true, x0: Some(x0), residual })
}

/// The pieces of the adjacency operator of a hom `θ : N → M`.
#[derive(Debug, Clone)]
pub struct HomAdjacencyData<R: Real> {
    /// `W_α : C^{n(α)} ⊗ K_α → H` (standard representation of `M`), empty
    /// when `θ` kills block `α`.
    pub w: Vec<CMat<R>>,
    pub t: Vec<CMat<R>>,
    pub v: Vec<CMat<R>>,
    pub u_blocks: Vec<CMat<R>>,
    pub u: Element<R>,
    pub claims: Vec<Claim>,
}

/// `A(x) = Q_M^{-1/4} u^{1/2} θ(Q_N^{1/4} x Q_N^{1/4}) u^{1/2} Q_M^{-1/4}`, the
/// Schur-idempotent CP map `L²(N) → L²(M)` attached to a hom `θ : N → M`.
///
/// With the Markov normalisation used for the densities here, the block
/// condition for Schur-idempotence reads `u_α⁻¹ = (1/n(α)) Σ_ij (Q_{N,α}^{-1/2})_{ji} t_ij`.
pub fn adjacency_of_hom<R: Real>(
    theta: &Hom<R>,
    phi_m: &Functional<R>,
    phi_n: &Functional<R>,
    tol: R,
) -> Result<(GnsOperator<R>, HomAdjacencyData<R>)> {
    adjacency_of_hom_in_basis(theta, phi_m, phi_n, None, tol)
}

/// [`adjacency_of_hom`] with the orthonormal basis of each multiplicity
/// space `K_α` rotated by `rotations[α]` (a `k_α × k_α` unitary). The result
/// does not depend on this choice.
pub fn adjacency_of_hom_in_basis<R: Real>(
    theta: &Hom<R>,
    phi_m: &Functional<R>,
    phi_n: &Functional<R>,
    rotations: Option<&[CMat<R>]>,
    tol: R,
) -> Result<(GnsOperator<R>, HomAdjacencyData<R>)> {
    let (nalg, malg) = (theta.source().algebra(), theta.target().algebra());
    if phi_n.algebra() != nalg || phi_m.algebra() != malg {
        return Err(shape("functionals must live on the source and target algebras of θ"));
    }
    let std_m = RepresentedAlgebra::standard(malg.clone());
    let h = std_m.hilbert_dim();
    let qm_mhalf = std_m.embed(&phi_m.q_real_power(R::lit(-0.5)));
    let qn_mhalf = phi_n.q_real_power(R::lit(-0.5));
    let mut data = HomAdjacencyData { w: vec![], t: vec![], v: vec![], u_blocks: vec![], u: malg.zero(), claims: vec![] };
    let mut u = linalg::zeros::<R>(h, h);
    let mut uh = linalg::zeros::<R>(h, h);
    let mut worst_iso = R::zero();
    for (alpha, &nb) in nalg.blocks().iter().enumerate() {
        let p = std_m.embed(&theta.apply(&nalg.unit(alpha, 0, 0)));
        let mut f = psd_range(&p, R::lit(0.5));
        let k = f.ncols();
        if let Some(rot) = rotations.and_then(|r| r.get(alpha)) {
            if rot.shape() != (k, k) {
                return Err(shape(format!("rotation for block {alpha} must be {k}×{k}")));
            }
            f = f * rot;
        }
        if k == 0 {
            for list in [&mut data.w, &mut data.t, &mut data.v, &mut data.u_blocks] {
                list.push(linalg::zeros(0, 0));
            }
            continue;
        }
        let mut w = linalg::zeros::<R>(h, nb * k);
        for i in 0..nb {
            let ti = std_m.embed(&theta.apply(&nalg.unit(alpha, i, 0))) * &f;
            w.view_mut((0, i * k), (h, k)).copy_from(&ti);
        }
        worst_iso = worst_iso.max(linalg::max_abs_diff(&(w.adjoint() * &w), &linalg::eye(nb * k)));
        let t = w.adjoint() * &qm_mhalf * &w;
        let q = &qn_mhalf.blocks[alpha];
        let mut v = linalg::zeros::<R>(k, k);
        for i in 0..nb {
            for j in 0..nb {
                v += t.view((i * k, j * k), (k, k)) * q[(j, i)];
            }
        }
        v *= cr(R::one() / R::lit(nb as f64));
        let v = linalg::hermitian_part(&v);
        let low = linalg::min_eigenvalue(&v);
        if low <= tol * scale_of(&v) {
            return Err(consistency(format!("v for block {alpha} is not positive definite (smallest eigenvalue {:.3e})", low.to_f64_lossy())));
        }
        let ua = linalg::pd_power(&v, -R::one()).expect("positive definite");
        let uah = linalg::pd_power(&v, R::lit(-0.5)).expect("positive definite");
        u += &w * linalg::kron(&linalg::eye(nb), &ua) * w.adjoint();
        uh += &w * linalg::kron(&linalg::eye(nb), &uah) * w.adjoint();
        data.w.push(w);
        data.t.push(t);
        data.v.push(v);
        data.u_blocks.push(ua);
    }
    data.claims.push(Claim::scalar("W_α are isometries", worst_iso.to_f64_lossy()));
    let (u_el, res_u) = std_m.unembed(&u);
    let (uh_el, res_uh) = std_m.unembed(&uh);
    data.claims.push(Claim::scalar("u lies in M", res_u.max(res_uh).to_f64_lossy()));
    let mut comm = R::zero();
    for y in nalg.basis::<R>() {
        let ty = theta.apply(&y);
        comm = comm.max(u_el.mul(&ty).dist(&ty.mul(&u_el)));
    }
    data.claims.push(Claim::scalar("u commutes with θ(N)", comm.to_f64_lossy()));
    data.u = u_el;

    let gm = GnsSpace::new(phi_m.clone());
    let gn = GnsSpace::new(phi_n.clone());
    let (qm4, qn4) = (phi_m.q_real_power(R::lit(-0.25)), phi_n.q_real_power(R::lit(0.25)));
    let a = GnsOperator::from_fn(&gn, &gm, |x| {
        let inner = theta.apply(&qn4.mul(x).mul(&qn4));
        qm4.mul(&uh_el).mul(&inner).mul(&uh_el).mul(&qm4)
    });

    let x = psi_prime(&a).matrix;
    let (herm, neg) = psd_defect(&x);
    data.claims.push(Claim::scalar("A is completely positive", herm.max(neg).to_f64_lossy()));
    data.claims.push(Claim::scalar("A ⋆ A = A", schur_product(&a, &a)?.dist(&a).to_f64_lossy()));

    let quarter = R::lit(0.25);
    let gen = gm.modular_power(quarter) * &a.matrix * gn.modular_power(-quarter);
    let lhs = bimodule_generate(gm.rep().commutant_basis(), &[gen], gn.rep().commutant_basis(), tol)?;
    let on_gns = CpMap::new(gn.rep().clone(), gm.rep().clone(), theta.map().action().clone(), tol)?;
    let rhs = on_gns.relation()?.adjoint();
    data.claims.push(Claim::subspaces("M′∇_M^{1/4} A ∇_N^{-1/4} N′ = V^{θ*}", &lhs, rhs.space()));

    let limit = (tol * R::lit(1e3)).to_f64_lossy();
    if let Some(bad) = data.claims.iter().find(|cl| !cl.passes(limit)) {
        return Err(consistency(format!("adjacency of a hom: '{}' fails (residual {:.3e})", bad.claim, bad.residual)));
    }
    Ok((a, data))
}

fn ensure_quantum_graph<R: Real>(s: &QuantumRelation<R>, reflexive: bool) -> Result<()> {
    if !s.source().same_as(s.target(), s.tol()) {
        return Err(precondition("a quantum graph must relate one represented algebra to itself"));
    }
    if !s.is_symmetric()? {
        return Err(precondition("relation is not symmetric"));
    }
    if reflexive && !s.is_reflexive()? {
        return Err(precondition("relation is not reflexive"));
    }
    Ok(())
}

/// A UCP map `θ : B(C^r) → M` whose confusability graph is the symmetric,
/// reflexive relation `S`. `Ψ′⁻¹(e − e₀)` (e, e₀ the projections onto `S`
/// and `M′` over the Markov GNS space) is perturbed from the identity into a
/// positive operator `Σ|Λa_k⟩⟨Λa_k|`, and `θ(E_ij) = a_i* a_j`.
pub fn verdon_construct<R: Real>(s: &QuantumRelation<R>) -> Result<(CpMap<R>, Vec<Claim>)> {
    ensure_quantum_graph(s, true)?;
    let tol = s.tol();
    let alg = s.source().algebra().clone();
    let g = GnsSpace::<R>::markov(alg.clone());
    let sg = to_gns(s, &g, &g)?;
    let e = sg.space().projection();
    let e0 = commutant_space(g.rep(), tol).projection();
    let a1 = psi_prime_inv(&OppositeTensor { source: g.clone(), target: g.clone(), matrix: e - e0 })?;
    let norm = linalg::opnorm(&a1.matrix);
    let mut a = linalg::eye::<R>(g.dim());
    if norm > tol {
        a += &a1.matrix * cr(R::one() / (R::lit(2.0) * norm));
    }
    let eig = herm_eig(&linalg::hermitian_part(&a));
    let top = eig.values.iter().fold(R::zero(), |m, &v| m.max(v));
    let ks: Vec<Element<R>> = (0..eig.values.len())
        .filter(|&i| eig.values[i] > tol * top)
        .map(|i| g.element(&(eig.vectors.column(i) * cr(eig.values[i].sqrt()))))
        .collect();
    let r = ks.len();
    let src = RepresentedAlgebra::standard(MultiMatrixAlgebra::full(r));
    let adj: Vec<Element<R>> = ks.iter().map(|x| x.adjoint()).collect();
    let theta = CpMap::from_fn(
        src,
        s.source().clone(),
        |y| {
            let mut out = alg.zero();
            for i in 0..r {
                for j in 0..r {
                    let yij = y.blocks[0][(i, j)];
                    if yij != cr(R::zero()) {
                        out = out.add(&adj[i].mul(&ks[j]).scale(yij));
                    }
                }
            }
            out
        },
        tol,
    )?;
    let unit = theta.apply(&MultiMatrixAlgebra::full(r).one()).dist(&alg.one());
    let graph = theta.confusability_graph()?;
    let claims = vec![
        Claim::scalar("θ is unital", unit.to_f64_lossy()),
        Claim::subspaces("V^{θ*} ∘ V^θ = S", graph.space(), s.space()),
    ];
    if !graph.equals(s) {
        return Err(consistency(format!("constructed map has confusability graph of dim {} instead of {}", graph.dim(), s.dim())));
    }
    Ok((theta, claims))
}

/// A CP map `θ` with `V^{θ*} ∘ V^θ = S` for a symmetric `S` containing the
/// positive element `x₀ ∈ M` that dominates `S` (`S = f₀ S f₀`, `f₀` the
/// support of `x₀`). `S` is compressed to `x₀^{-1/2} S x₀^{-1/2}` on the
/// range of `f₀`, which is reflexive there, and the reflexive construction is
/// conjugated back by `x₀^{1/2}`.
pub fn qg_from_cp_construct<R: Real>(s: &QuantumRelation<R>, x0: &Element<R>) -> Result<(CpMap<R>, Vec<Claim>)> {
    ensure_quantum_graph(s, false)?;
    let tol = s.tol();
    let rep = s.source();
    let alg = rep.algebra();
    alg.check(x0)?;
    let big = rep.embed(x0);
    let sx = scale_of(&big);
    if x0.min_eigenvalue() < -tol * sx || linalg::max_abs(&(&big - big.adjoint())) > tol * sx {
        return Err(invalid("x₀ must be positive"));
    }
    if !s.space().contains(&big) {
        return Err(precondition("x₀ does not lie in S"));
    }
    let f0 = linalg::support_projection(&big, tol);
    for (i, b) in s.space().onb().iter().enumerate() {
        let res = linalg::max_abs_diff(&(&f0 * b * &f0), b);
        if res > tol * R::lit(10.0) {
            return Err(precondition(format!(
                "x₀ does not dominate S: basis element {i} leaks out of the support of x₀ (residual {:.3e})",
                res.to_f64_lossy()
            )));
        }
    }

    // Compression: Z = U (⊕ R_α ⊗ 1_{m(α)}) with R_α an isometry onto range x₀_α.
    let mults = rep.multiplicities();
    let mut rs = vec![];
    let mut kept = vec![];
    let cut = tol * x0.max_abs();
    for (a, xa) in x0.blocks.iter().enumerate() {
        let ra = psd_range_above(xa, cut);
        if ra.ncols() > 0 {
            kept.push(a);
        }
        rs.push(ra);
    }
    let h0: usize = kept.iter().map(|&a| rs[a].ncols() * mults[a]).sum();
    let mut zs = linalg::zeros::<R>(rep.hilbert_dim(), h0);
    let (mut row, mut col) = (0, 0);
    for (a, &nb) in alg.blocks().iter().enumerate() {
        let blk = linalg::kron(&rs[a], &linalg::eye(mults[a]));
        zs.view_mut((row, col), blk.shape()).copy_from(&blk);
        row += nb * mults[a];
        col += blk.ncols();
    }
    let z = rep.block_unitary() * zs;
    let alg0 = MultiMatrixAlgebra::new(kept.iter().map(|&a| rs[a].ncols()).collect())?;
    let rep0 = RepresentedAlgebra::new(alg0.clone(), kept.iter().map(|&a| mults[a]).collect())?;
    let xs: Vec<CMat<R>> = kept.iter().map(|&a| rs[a].adjoint() * &x0.blocks[a] * &rs[a]).collect();
    let x_el = Element { blocks: xs };
    let xm = rep0.embed(&x_el);
    let xmh = linalg::pd_power(&xm, R::lit(-0.5)).ok_or_else(|| consistency("compressed x₀ is not invertible"))?;
    let gens: Vec<CMat<R>> = s.space().onb().iter().map(|b| &xmh * z.adjoint() * b * &z * &xmh).collect();
    let space = OperatorSubspace::span_of(h0, h0, &gens, tol)?;
    let s0 = QuantumRelation::from_space(rep0.clone(), rep0, space, false)?;
    let (theta0, mut claims) = verdon_construct(&s0)?;

    let xh: Vec<CMat<R>> = x_el.blocks.iter().map(|b| linalg::pd_power(b, R::lit(0.5)).expect("positive definite")).collect();
    let theta = CpMap::from_fn(
        theta0.source().clone(),
        rep.clone(),
        |y| {
            let t0 = theta0.apply(y);
            let mut out = alg.zero();
            for (k, &a) in kept.iter().enumerate() {
                out.blocks[a] = &rs[a] * &xh[k] * &t0.blocks[k] * &xh[k] * rs[a].adjoint();
            }
            out
        },
        tol,
    )?;
    let graph = theta.confusability_graph()?;
    claims.push(Claim::subspaces("V^{θ*} ∘ V^θ = S", graph.space(), s.space()));
    if !graph.equals(s) {
        return Err(consistency(format!("constructed map has confusability graph of dim {} instead of {}", graph.dim(), s.dim())));
    }
    Ok((theta, claims))
}

/// Looks for a positive `x₀ ∈ S ∩ M` whose support is the smallest
/// projection `f` with `S = f S f`, by maximising the smallest eigenvalue of
/// the compression of `Σ t_k h_k` (`h_k` Hermitian, spanning `S ∩ M`) over the
/// unit ball. Returns `None` when no candidate is found; that is not a proof
/// that none exists.
pub fn find_x0<R: Real>(s: &QuantumRelation<R>) -> Result<Option<Element<R>>> {
    ensure_quantum_graph(s, false)?;
    let tol = s.tol();
    let rep = s.source();
    let h = rep.hilbert_dim();
    let m_space = OperatorSubspace::span_of(h, h, &rep.embedded_basis(), tol)?;
    let w = s.space().intersect(&m_space)?;
    if w.dim() == 0 {
        return Ok(None);
    }
    let half = cr(R::lit(0.5));
    let mut herms = vec![];
    for b in w.onb() {
        herms.push((&b + b.adjoint()) * half);
        herms.push((&b - b.adjoint()) * c::<R>(0.0, -0.5));
    }
    let mut f = linalg::zeros::<R>(h, h);
    for b in s.space().onb() {
        f += &b * b.adjoint() + b.adjoint() * &b;
    }
    let fb = psd_range(&f, tol);
    let dirs: Vec<CMat<R>> = herms.iter().map(|x| fb.adjoint() * x * &fb).collect();
    let proj = fb.adjoint() * &fb;
    let mut start: Vec<R> = dirs.iter().map(|d| linalg::hs_inner(d, &proj).re).collect();
    let n = start.iter().fold(R::zero(), |a, &x| a + x * x).sqrt();
    if n > R::zero() {
        start.iter_mut().for_each(|x| *x /= n);
    }
    let k = fb.ncols();
    let best = maximize_min_eigenvalue(&linalg::zeros(k, k), &dirs, Some(R::one()), start);
    if best.value <= tol.sqrt() * R::lit(1e-2) {
        return Ok(None);
    }
    let mut x = linalg::zeros::<R>(h, h);
    for (hk, &t) in herms.iter().zip(&best.t) {
        x += hk * cr(t);
    }
    let (el, _) = rep.unembed(&linalg::hermitian_part(&x));
    Ok(Some(el))
}

/// `φ_N ∘ A = φ_M`, tested as the identity on a basis, as `A* Λ_N(1) = Λ_M(1)`,
/// and as `(φ_N ⊗ id) Ψ′(A) = 1`. The three must agree.
pub fn state_preservation_check<R: Real>(a: &GnsOperator<R>, tol: R) -> Result<bool> {
    let (m, n) = (&a.source, &a.target);
    let s = scale_of(&a.matrix);
    let mut worst = R::zero();
    for k in 0..m.dim() {
        let x = m.basis_element(k);
        let d = n.functional().eval(&a.apply(&x)) - m.functional().eval(&x);
        worst = worst.max(d.norm_sqr().sqrt());
    }
    let by_basis = worst <= tol * s;
    let by_adjoint = (a.matrix.adjoint() * n.one_coords() - m.one_coords()).iter().fold(R::zero(), |acc, z| acc.max(z.norm_sqr().sqrt())) <= tol * s;
    let x = psi_prime(a).matrix;
    let one = n.one_coords();
    let dm = m.dim();
    let mut slice = linalg::zeros::<R>(dm, dm);
    for i in 0..n.dim() {
        for k in 0..n.dim() {
            let w = one[i].conj() * one[k];
            if w == cr(R::zero()) {
                continue;
            }
            slice += x.view((i * dm, k * dm), (dm, dm)) * w;
        }
    }
    let by_slice = linalg::max_abs_diff(&slice, &linalg::eye(dm)) <= tol * s.max(scale_of(&x));
    if by_basis != by_adjoint || by_basis != by_slice {
        return Err(consistency(format!(
            "state preservation routes disagree: basis {by_basis}, adjoint {by_adjoint}, slice {by_slice}"
        )));
    }
    Ok(by_basis)
}
