//! *-homomorphisms and the coinjective relations they correspond to.

use crate::cpmap::CpMap;
use crate::error::{consistency, invalid, precondition, Result};
use crate::linalg;
use crate::mvnalg::{Element, GnsSpace, MultiMatrixAlgebra, RepresentedAlgebra};
use crate::opspace::OperatorSubspace;
use crate::qrel::QuantumRelation;
use crate::report::Claim;
use crate::scalar::{CMat, CVec, Real};

/// A CP map whose hom flag holds.
#[derive(Debug, Clone)]
pub struct Hom<R: Real> {
    map: CpMap<R>,
    unit_image: Element<R>,
}

/// Subspace of column vectors, used to compare subspaces of an algebra in
/// coordinates.
fn column_span<R: Real>(cols: &[CVec<R>], dim: usize, tol: R) -> OperatorSubspace<R> {
    let gens: Vec<CMat<R>> = cols.iter().map(|c| CMat::from_column_slice(dim, 1, c.as_slice())).collect();
    OperatorSubspace::span_of(dim, 1, &gens, tol).expect("column dims")
}

impl<R: Real> Hom<R> {
    pub fn new(map: CpMap<R>) -> Result<Self> {
        if !map.is_hom() {
            return Err(invalid("map is not multiplicative and *-preserving"));
        }
        let unit_image = map.apply(&map.source().algebra().one());
        Ok(Self { map, unit_image })
    }

    pub fn from_fn(
        source: RepresentedAlgebra<R>,
        target: RepresentedAlgebra<R>,
        f: impl Fn(&Element<R>) -> Element<R>,
        tol: R,
    ) -> Result<Self> {
        Self::new(CpMap::from_fn(source, target, f, tol)?)
    }

    pub fn identity(rep: &RepresentedAlgebra<R>, tol: R) -> Self {
        Self::new(CpMap::identity(rep, tol)).expect("identity is a hom")
    }

    pub fn map(&self) -> &CpMap<R> {
        &self.map
    }

    pub fn apply(&self, y: &Element<R>) -> Element<R> {
        self.map.apply(y)
    }

    /// `e = θ(1)`.
    pub fn unit_image(&self) -> &Element<R> {
        &self.unit_image
    }

    pub fn tol(&self) -> R {
        self.map.tol()
    }

    pub fn source(&self) -> &RepresentedAlgebra<R> {
        self.map.source()
    }

    pub fn target(&self) -> &RepresentedAlgebra<R> {
        self.map.target()
    }

    pub fn is_injective(&self) -> bool {
        linalg::rank(self.map.action(), self.tol()) == self.source().algebra().dim()
    }

    /// `θ(N) = M` as subspaces of `M`.
    pub fn is_surjective(&self) -> bool {
        linalg::rank(self.map.action(), self.tol()) == self.target().algebra().dim()
    }

    /// `V^θ = {v : y v = v θ(y)}`, solved as an intertwiner space.
    pub fn relation(&self) -> Result<QuantumRelation<R>> {
        let (n, m) = (self.source(), self.target());
        let pairs: Vec<(CMat<R>, CMat<R>)> = n
            .algebra()
            .basis::<R>()
            .iter()
            .map(|y| (n.embed(y), m.embed(&self.apply(y))))
            .collect();
        let gens = linalg::intertwiners(&pairs, self.tol());
        let space = OperatorSubspace::span_of(n.hilbert_dim(), m.hilbert_dim(), &gens, self.tol())?;
        QuantumRelation::from_space(m.clone(), n.clone(), space, true)
    }

    /// Recovers `θ` from a coinjective relation: `θ(y) v† = v† y` on the
    /// span of the ranges of the `v†`, zero on the complement. The second
    /// value is the least-squares residual.
    pub fn from_relation(v: &QuantumRelation<R>) -> Result<(Self, R)> {
        if !v.is_coinjective() {
            return Err(precondition("hom recovery needs a coinjective relation"));
        }
        let tol = v.tol();
        let (m, n) = (v.source(), v.target());
        let (dh, dk) = (m.hilbert_dim(), n.hilbert_dim());
        let onb = v.space().onb();
        let r = onb.len();
        let mut a = linalg::zeros::<R>(dh, r * dk);
        for (k, b) in onb.iter().enumerate() {
            a.view_mut((0, k * dk), (dh, dk)).copy_from(&b.adjoint());
        }
        let ap = linalg::pinv(&a, tol);
        let mut worst = R::zero();
        let mut cols = vec![];
        for y in n.algebra().basis::<R>() {
            let ey = n.embed(&y);
            let mut b = linalg::zeros::<R>(dh, r * dk);
            for (k, w) in onb.iter().enumerate() {
                b.view_mut((0, k * dk), (dh, dk)).copy_from(&(w.adjoint() * &ey));
            }
            let t = &b * &ap;
            worst = worst.max(linalg::max_abs(&(&t * &a - &b)));
            let (x, res) = m.unembed(&t);
            worst = worst.max(res);
            cols.push(m.algebra().coords(&x));
        }
        if worst > tol.sqrt() {
            return Err(consistency(format!("no hom reproduces the relation (residual {:.3e})", worst.to_f64_lossy())));
        }
        let action = linalg::hstack(m.algebra().dim(), &cols);
        let map = CpMap::new(n.clone(), m.clone(), action, tol)?;
        Ok((Self::new(map)?, worst))
    }

    /// `z` with `ker θ = (1 − z)N`, via the central support of `V^θ`; checked
    /// against the nullspace of the action.
    pub fn kernel_projection(&self) -> Result<Element<R>> {
        let z = self.relation()?.central_support()?;
        let alg = self.source().algebra();
        let d = alg.dim();
        let one_minus = alg.one::<R>().sub(&z);
        let from_z: Vec<CVec<R>> = alg.basis::<R>().iter().map(|e| alg.coords(&one_minus.mul(e))).collect();
        let null = linalg::nullspace(self.map.action(), self.tol());
        let from_null: Vec<CVec<R>> = (0..null.ncols()).map(|k| null.column(k).into_owned()).collect();
        let (a, b) = (column_span(&from_z, d, self.tol()), column_span(&from_null, d, self.tol()));
        if !a.equals(&b) {
            return Err(consistency("(1 − z)N differs from the kernel of θ"));
        }
        Ok(z)
    }

    /// `θ^⋆(x) = θ^{-1}(θ(1) x)` when `θ(1)` is central and `θ(N) = θ(1)M`.
    pub fn star(&self) -> Result<Self> {
        let m = self.target().algebra();
        let e = &self.unit_image;
        if e.central_defect() > self.tol().sqrt() || !self.image_is_corner() {
            return Err(precondition("θ^⋆ needs θ(1) central and θ(N) = θ(1)M"));
        }
        let left_e = crate::cpmap::action_from_fn(m, m, |x: &Element<R>| e.mul(x));
        let action = linalg::pinv(self.map.action(), self.tol()) * left_e;
        let map = CpMap::new(self.target().clone(), self.source().clone(), action, self.tol())?;
        Self::new(map)
    }

    fn image_is_corner(&self) -> bool {
        let m = self.target().algebra();
        let d = m.dim();
        let a = self.map.action();
        let img: Vec<CVec<R>> = (0..a.ncols()).map(|k| a.column(k).into_owned()).collect();
        let corner: Vec<CVec<R>> = m.basis::<R>().iter().map(|x| m.coords(&self.unit_image.mul(x))).collect();
        column_span(&img, d, self.tol()).equals(&column_span(&corner, d, self.tol()))
    }

    /// `θ(1)·θ(N)′`, the commutant taken in `B(H)`.
    pub fn unit_times_image_commutant(&self) -> Result<OperatorSubspace<R>> {
        let (n, m) = (self.source(), self.target());
        let pairs: Vec<(CMat<R>, CMat<R>)> = n
            .algebra()
            .basis::<R>()
            .iter()
            .map(|y| {
                let t = m.embed(&self.apply(y));
                (t.clone(), t)
            })
            .collect();
        let comm = linalg::intertwiners(&pairs, self.tol());
        let e = m.embed(&self.unit_image);
        let gens: Vec<CMat<R>> = comm.iter().map(|c| &e * c).collect();
        OperatorSubspace::span_of(m.hilbert_dim(), m.hilbert_dim(), &gens, self.tol())
    }

    /// The four equivalences between hom properties and relation flags, plus
    /// `V*∘V = θ(1)θ(N)′`.
    pub fn property_dictionary(&self, v: &QuantumRelation<R>) -> Result<Vec<Claim>> {
        let f = v.properties();
        let central = self.unit_image.central_defect() <= self.tol().sqrt();
        let mut out = vec![
            Claim::iff("unital hom <=> function", self.map.is_unital(), f.function),
            Claim::iff("injective hom <=> surjective relation", self.is_injective(), f.surjective),
            Claim::iff("unit image central with corner image <=> injective relation", central && self.image_is_corner(), f.injective),
        ];
        if self.map.is_unital() {
            out.push(Claim::iff("surjective unital hom <=> injective relation", self.is_surjective(), f.injective));
        }
        let vsv = v.adjoint().compose(v)?;
        out.push(Claim::subspaces("V*V = unit image times image commutant", vsv.space(), &self.unit_times_image_commutant()?));
        Ok(out)
    }

    /// Checks that `v† ↦ v†Λ(1)` is a bijection from `(V^θ)*` onto
    /// `{ξ : θ(1)ξ = ξ}`, reconstructing each `v†` from `ξ` by
    /// `v†Λ(y) = θ(y)ξ`. The source must carry the GNS representation of `gns`.
    pub fn unit_vector_dictionary(&self, gns: &GnsSpace<R>) -> Result<Vec<Claim>> {
        if !self.source().same_as(gns.rep(), self.tol()) {
            return Err(precondition("the source must act on its GNS space"));
        }
        let v = self.relation()?;
        let one = gns.one_coords();
        let e = self.target().embed(&self.unit_image);
        let onb = v.space().onb();
        let xis: Vec<CVec<R>> = onb.iter().map(|b| b.adjoint() * &one).collect();
        let fixed = e.trace().re.round().to_usize().unwrap_or(0);
        let xi_mat = linalg::hstack(self.target().hilbert_dim(), &xis);
        let injective_rank = linalg::rank(&xi_mat, self.tol());
        let mut worst_fixed = R::zero();
        let mut worst_rebuild = R::zero();
        for (b, xi) in onb.iter().zip(&xis) {
            worst_fixed = worst_fixed.max(linalg::max_abs(&CMat::from_column_slice(xi.len(), 1, (&e * xi - xi).as_slice())));
            let cols: Vec<CVec<R>> =
                (0..gns.dim()).map(|k| self.target().embed(&self.apply(&gns.basis_element(k))) * xi).collect();
            let rebuilt = linalg::hstack(self.target().hilbert_dim(), &cols);
            worst_rebuild = worst_rebuild.max(linalg::max_abs_diff(&rebuilt, &b.adjoint()));
        }
        Ok(vec![
            Claim::new("dim V = rank of unit image", v.dim(), fixed, if v.dim() == fixed { 0.0 } else { 1.0 }),
            Claim::new("xi map injective", injective_rank, v.dim(), if injective_rank == v.dim() { 0.0 } else { 1.0 }),
            Claim::scalar("xi fixed by unit image", worst_fixed.to_f64_lossy()),
            Claim::scalar("v* rebuilt from xi", worst_rebuild.to_f64_lossy()),
        ])
    }
}

/// The zero map between two represented algebras (a non-unital hom).
pub fn zero_hom<R: Real>(source: &RepresentedAlgebra<R>, target: &RepresentedAlgebra<R>, tol: R) -> Hom<R> {
    let map = CpMap::new(
        source.clone(),
        target.clone(),
        linalg::zeros(target.algebra().dim(), source.algebra().dim()),
        tol,
    )
    .expect("zero is CP");
    Hom::new(map).expect("zero is a hom")
}

/// The embedding `x ↦ U(⊕_β ⊕_α x_α ⊗ 1_{k_{βα}} ⊕ 0)U†` described by a
/// multiplicity matrix `k[β][α]` (target block β, source block α), with
/// optional per-target-block unitaries.
pub fn hom_from_multiplicities<R: Real>(
    source: &RepresentedAlgebra<R>,
    target: &RepresentedAlgebra<R>,
    k: &[Vec<usize>],
    unitaries: Option<&[CMat<R>]>,
    tol: R,
) -> Result<Hom<R>> {
    let (n, m) = (source.algebra(), target.algebra());
    if k.len() != m.num_blocks() || k.iter().any(|row| row.len() != n.num_blocks()) {
        return Err(crate::error::Error::Shape("multiplicity matrix must be (target blocks) × (source blocks)".into()));
    }
    for (b, row) in k.iter().enumerate() {
        let used: usize = row.iter().zip(n.blocks()).map(|(kk, nn)| kk * nn).sum();
        if used > m.blocks()[b] {
            return Err(invalid(format!("target block {b} too small for the requested embedding")));
        }
    }
    let f = |x: &Element<R>| {
        let blocks = (0..m.num_blocks())
            .map(|b| {
                let mb = m.blocks()[b];
                let mut parts = vec![];
                for (a, &kk) in k[b].iter().enumerate() {
                    for _ in 0..kk {
                        parts.push(x.blocks[a].clone());
                    }
                }
                let used: usize = parts.iter().map(|p| p.nrows()).sum();
                parts.push(linalg::zeros(mb - used, mb - used));
                let d = linalg::block_diag(&parts);
                match unitaries {
                    Some(us) => &us[b] * d * us[b].adjoint(),
                    None => d,
                }
            })
            .collect();
        Element { blocks }
    };
    Hom::from_fn(source.clone(), target.clone(), f, tol)
}

/// Convenience: the standard representation of an algebra given by block sizes.
pub fn standard_rep<R: Real>(blocks: Vec<usize>) -> Result<RepresentedAlgebra<R>> {
    Ok(RepresentedAlgebra::standard(MultiMatrixAlgebra::new(blocks)?))
}
