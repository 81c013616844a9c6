//! Seeded generators for random test instances at desk scale: at most three
//! blocks, small block sizes, and Hilbert/GNS dimensions kept at or below 14.

use crate::cpmap::CpMap;
use crate::error::Result;
use crate::linalg;
use crate::mvnalg::{Element, Functional, MultiMatrixAlgebra, RepresentedAlgebra};
use crate::opspace::bimodule_generate;
use crate::qfunc::{hom_from_multiplicities, Hom};
use crate::qrel::QuantumRelation;
use crate::scalar::{cr, CMat, Real};
use nalgebra::{Complex, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type TrialRng = ChaCha8Rng;

/// Largest algebra/Hilbert dimension produced by the generators.
pub const MAX_DIM: usize = 14;

/// Independent sub-seed for trial `index` of a run seeded with `seed`.
pub fn sub_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn rng(seed: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian<R: Real>(rng: &mut TrialRng) -> Complex<R> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(R::lit(re * std::f64::consts::FRAC_1_SQRT_2), R::lit(im * std::f64::consts::FRAC_1_SQRT_2))
}

pub fn matrix<R: Real>(rng: &mut TrialRng, rows: usize, cols: usize) -> CMat<R> {
    DMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-distributed unitary (QR of a Ginibre matrix with phases fixed).
pub fn unitary<R: Real>(rng: &mut TrialRng, n: usize) -> CMat<R> {
    let qr = matrix::<R>(rng, n, n).qr();
    let (q, r) = (qr.q(), qr.r());
    let mut out = q;
    for k in 0..n {
        let d = r[(k, k)];
        let m = nalgebra::ComplexField::modulus(d);
        if m > R::zero() {
            let phase = d / cr(m);
            for i in 0..n {
                out[(i, k)] *= phase;
            }
        }
    }
    out
}

/// An isometry `C^cols → C^rows`.
pub fn isometry<R: Real>(rng: &mut TrialRng, rows: usize, cols: usize) -> CMat<R> {
    unitary::<R>(rng, rows).columns(0, cols).into_owned()
}

fn small_size(rng: &mut TrialRng, max: usize) -> usize {
    // Biased towards small blocks: weights 2, 2, 1 for sizes 1, 2, 3.
    let weights = [2u32, 2, 1, 1];
    let max = max.clamp(1, weights.len());
    let total: u32 = weights[..max].iter().sum();
    let mut x = rng.random_range(0..total);
    for (k, &w) in weights[..max].iter().enumerate() {
        if x < w {
            return k + 1;
        }
        x -= w;
    }
    1
}

/// Random algebra with at most 3 blocks of size at most `max_block` and
/// dimension at most `max_dim`.
pub fn algebra(rng: &mut TrialRng, max_block: usize, max_dim: usize) -> MultiMatrixAlgebra {
    loop {
        let k = rng.random_range(1..=3);
        let blocks: Vec<usize> = (0..k).map(|_| small_size(rng, max_block)).collect();
        if blocks.iter().map(|n| n * n).sum::<usize>() <= max_dim {
            return MultiMatrixAlgebra::new(blocks).expect("positive sizes");
        }
    }
}

/// Random commutative algebra on `1..=max_points` points.
pub fn classical_algebra(rng: &mut TrialRng, max_points: usize) -> MultiMatrixAlgebra {
    MultiMatrixAlgebra::diagonal(rng.random_range(1..=max_points))
}

pub fn positive_definite<R: Real>(rng: &mut TrialRng, n: usize) -> CMat<R> {
    let u = unitary::<R>(rng, n);
    let d = DMatrix::from_fn(n, n, |i, j| if i == j { cr(R::lit(rng.random_range(0.2..2.0))) } else { cr(R::zero()) });
    linalg::hermitian_part(&(&u * d * u.adjoint()))
}

/// A faithful functional with density eigenvalues in `[0.2, 2)`.
pub fn functional<R: Real>(rng: &mut TrialRng, alg: &MultiMatrixAlgebra) -> Functional<R> {
    let q: Vec<CMat<R>> = alg.blocks().iter().map(|&n| positive_definite(rng, n)).collect();
    Functional::new(alg.clone(), q).expect("positive definite densities")
}

/// Random representation with Hilbert dimension at most `max_dim`.
pub fn representation<R: Real>(rng: &mut TrialRng, alg: &MultiMatrixAlgebra, max_dim: usize, twist: bool) -> RepresentedAlgebra<R> {
    let mut mult: Vec<usize> = alg.blocks().iter().map(|_| 1).collect();
    let mut dim: usize = alg.blocks().iter().sum();
    for (a, &n) in alg.blocks().iter().enumerate() {
        let extra = rng.random_range(0..=2usize);
        for _ in 0..extra {
            if dim + n <= max_dim {
                mult[a] += 1;
                dim += n;
            }
        }
    }
    if twist {
        let u = unitary::<R>(rng, dim);
        RepresentedAlgebra::with_unitary(alg.clone(), mult, u, R::default_tol()).expect("unitary")
    } else {
        RepresentedAlgebra::new(alg.clone(), mult).expect("valid multiplicities")
    }
}

/// Random relation: bimodule closure of a few generators, each cut down by a
/// random pair of central projections so that block components vary.
pub fn relation<R: Real>(
    rng: &mut TrialRng,
    source: &RepresentedAlgebra<R>,
    target: &RepresentedAlgebra<R>,
    max_gens: usize,
) -> QuantumRelation<R> {
    let tol = R::default_tol();
    let (dk, dh) = (target.hilbert_dim(), source.hilbert_dim());
    let count = rng.random_range(0..=max_gens);
    let gens: Vec<CMat<R>> = (0..count)
        .map(|_| {
            let mut g = matrix::<R>(rng, dk, dh);
            if rng.random_bool(0.6) {
                let y = rng.random_range(0..target.algebra().num_blocks());
                let x = rng.random_range(0..source.algebra().num_blocks());
                g = target.central_projection(y) * g * source.central_projection(x);
            }
            g
        })
        .collect();
    let space = bimodule_generate(target.commutant_basis(), &gens, source.commutant_basis(), tol).expect("dims");
    QuantumRelation::from_space(source.clone(), target.clone(), space, false).expect("bimodule by construction")
}

/// Random symmetric relation over one representation, optionally reflexive.
pub fn symmetric_relation<R: Real>(rng: &mut TrialRng, rep: &RepresentedAlgebra<R>, max_gens: usize, reflexive: bool) -> QuantumRelation<R> {
    let v = relation(rng, rep, rep, max_gens);
    let mut s = v.sum(&v.adjoint()).expect("same algebras");
    if reflexive {
        s = s.sum(&QuantumRelation::identity(rep, R::default_tol())).expect("same algebras");
    }
    s
}

/// Random CP map `θ = E_M ∘ Φ ∘ ι_N` with `Φ` a random Kraus map `B(K) → B(H)`.
pub fn cp_map<R: Real>(
    rng: &mut TrialRng,
    source: &RepresentedAlgebra<R>,
    target: &RepresentedAlgebra<R>,
    max_kraus: usize,
) -> Result<CpMap<R>> {
    let (dk, dh) = (source.hilbert_dim(), target.hilbert_dim());
    let count = rng.random_range(1..=max_kraus.max(1));
    let norm = cr(R::lit(1.0 / ((count * dk) as f64).sqrt()));
    let cs: Vec<CMat<R>> = (0..count).map(|_| matrix::<R>(rng, dk, dh) * norm).collect();
    CpMap::from_fn(
        source.clone(),
        target.clone(),
        |y: &Element<R>| {
            let ey = source.embed(y);
            let mut t = linalg::zeros::<R>(dh, dh);
            for c in &cs {
                t += c.adjoint() * &ey * c;
            }
            target.unembed(&t).0
        },
        R::default_tol(),
    )
}

/// Random hom data: a target algebra built from a random Bratteli
/// multiplicity matrix over `source`, and the hom itself.
pub struct RandomHom<R: Real> {
    pub hom: Hom<R>,
    pub multiplicities: Vec<Vec<usize>>,
}

/// Random hom out of `source`'s algebra into a freshly generated target
/// algebra represented by `target_rep` (a closure choosing the representation).
pub fn hom<R: Real>(
    rng: &mut TrialRng,
    source: &RepresentedAlgebra<R>,
    unital: bool,
    max_dim: usize,
    target_rep: impl Fn(&mut TrialRng, &MultiMatrixAlgebra) -> RepresentedAlgebra<R>,
) -> Result<RandomHom<R>> {
    let n = source.algebra().blocks().to_vec();
    loop {
        let tb = rng.random_range(1..=3usize);
        let mut k: Vec<Vec<usize>> = vec![];
        let mut sizes = vec![];
        for _ in 0..tb {
            let row: Vec<usize> = n.iter().map(|_| if rng.random_bool(0.5) { 1 } else { 0 }).collect();
            let mut size: usize = row.iter().zip(&n).map(|(a, b)| a * b).sum();
            if !unital && rng.random_bool(0.4) {
                size += 1;
            }
            k.push(row);
            sizes.push(size);
        }
        if sizes.contains(&0) {
            continue;
        }
        let dim: usize = sizes.iter().map(|s| s * s).sum();
        if dim > max_dim {
            continue;
        }
        if unital && sizes.iter().zip(&k).any(|(s, row)| *s != row.iter().zip(&n).map(|(a, b)| a * b).sum::<usize>()) {
            continue;
        }
        let m = MultiMatrixAlgebra::new(sizes.clone())?;
        let us: Vec<CMat<R>> = sizes.iter().map(|&s| unitary::<R>(rng, s)).collect();
        let trep = target_rep(rng, &m);
        let hom = hom_from_multiplicities(source, &trep, &k, Some(&us), R::default_tol())?;
        return Ok(RandomHom { hom, multiplicities: k });
    }
}
