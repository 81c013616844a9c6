//! Seeded randomized verification suites.
//!
//! Each suite draws fresh random instances per trial from a sub-seed of the
//! run seed, checks a family of identities, and reports every residual. The
//! same `(suite, seed, first, trials)` always produces the same report.

use crate::adjacency::{
    adjacency_of_hom, adjacency_of_hom_in_basis, adjacency_of_relation, classify, dagger, find_x0, kms_adjoint, mult_maps,
    psi_prime, psi_prime_inv, qg_from_cp_construct, relation_of_positive, schur_product, swap_star, theta_of_adjacency, to_gns,
    verdon_construct, GnsOperator, OppositeTensor,
};
use crate::cpmap::{pullback, pullback_by_dilation, CpMap};
use crate::error::{invalid, Error, Result};
use crate::fixtures;
use crate::linalg;
use crate::mvnalg::{Element, Functional, GnsSpace, MultiMatrixAlgebra, RepresentedAlgebra};
use crate::opspace::{bimodule_generate, OperatorSubspace};
use crate::qfunc::{hom_from_multiplicities, Hom};
use crate::qrel::{commutant_space, intertwiner, QuantumRelation};
use crate::random::{self as rnd, TrialRng, MAX_DIM};
use crate::report::Claim;
use crate::scalar::{c, cr, CMat, Real};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

type F = f64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub suite: String,
    pub seed: u64,
    /// Defaults to the suite's own trial count.
    pub trials: Option<usize>,
    /// Index of the first trial; with `trials = 1` this reruns a single trial.
    #[serde(default)]
    pub first: usize,
    /// Pass threshold for residuals; defaults to the suite's own.
    pub tol: Option<f64>,
    /// Largest block size of random algebras (1..=3).
    pub max_block: usize,
}

impl SuiteConfig {
    pub fn new(suite: impl Into<String>, seed: u64) -> Self {
        Self { suite: suite.into(), seed, trials: None, first: 0, tol: None, max_block: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub index: usize,
    /// Seed of this trial's generator.
    pub seed: u64,
    pub ok: bool,
    pub worst: f64,
    pub claims: Vec<Claim>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// The error came from a failed internal identity rather than a rejected input.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub internal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub first: usize,
    pub trials: usize,
    pub tol: f64,
    pub passed: bool,
    pub worst: f64,
    /// Indices of failing trials.
    pub failures: Vec<usize>,
    pub results: Vec<TrialReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub passed: bool,
    pub suites: Vec<SuiteReport>,
}

impl VerifyReport {
    /// Whether some trial hit an internal consistency error.
    pub fn internal_error(&self) -> bool {
        self.suites.iter().flat_map(|s| &s.results).any(|t| t.internal)
    }

    /// Command lines reproducing each failing trial.
    pub fn reproducers(&self) -> Vec<String> {
        let mut out = vec![];
        for s in &self.suites {
            for &i in &s.failures {
                out.push(format!("qrelkit verify --suite {} --seed {} --first {i} --trials 1", s.suite, s.seed));
            }
        }
        out
    }
}

struct Ctx {
    max_block: usize,
}

type TrialFn = fn(&mut TrialRng, &Ctx) -> Result<Vec<Claim>>;

pub struct Suite {
    pub name: &'static str,
    pub trials: usize,
    pub tol: f64,
    run: TrialFn,
}

pub const SUITES: &[Suite] = &[
    Suite { name: "gns", trials: 100, tol: 1e-9, run: gns_trial },
    Suite { name: "relations", trials: 100, tol: 1e-8, run: relations_trial },
    Suite { name: "funcs", trials: 50, tol: 1e-8, run: funcs_trial },
    Suite { name: "functoriality", trials: 50, tol: 1e-8, run: functoriality_trial },
    Suite { name: "pullback", trials: 30, tol: 1e-8, run: pullback_trial },
    Suite { name: "schur", trials: 50, tol: 1e-9, run: schur_trial },
    Suite { name: "image-links", trials: 50, tol: 1e-8, run: image_links_trial },
    Suite { name: "adjacency-hom", trials: 30, tol: 1e-8, run: adjacency_hom_trial },
    Suite { name: "construction", trials: 30, tol: 1e-7, run: construction_trial },
    Suite { name: "fixtures", trials: 1, tol: 1e-12, run: fixtures_trial },
    Suite { name: "transport", trials: 20, tol: 1e-8, run: transport_trial },
];

pub fn suite_names() -> Vec<&'static str> {
    let mut v: Vec<_> = SUITES.iter().map(|s| s.name).collect();
    v.push("all");
    v
}

pub fn find_suite(name: &str) -> Result<&'static Suite> {
    SUITES
        .iter()
        .find(|s| s.name == name)
        .ok_or_else(|| invalid(format!("unknown suite '{name}' (expected one of: {})", suite_names().join(", "))))
}

/// Runs one named suite, or every suite for `"all"`.
pub fn verify(config: &SuiteConfig) -> Result<VerifyReport> {
    let suites: Vec<&Suite> = if config.suite == "all" { SUITES.iter().collect() } else { vec![find_suite(&config.suite)?] };
    if !(1..=3).contains(&config.max_block) {
        return Err(invalid("max block size must be between 1 and 3"));
    }
    if config.tol.is_some_and(|t| !(t > 0.0 && t.is_finite())) {
        return Err(invalid("tolerance must be positive and finite"));
    }
    let reports: Vec<SuiteReport> = suites.iter().map(|s| run_suite(s, config)).collect();
    Ok(VerifyReport { seed: config.seed, passed: reports.iter().all(|r| r.passed), suites: reports })
}

fn run_suite(suite: &Suite, config: &SuiteConfig) -> SuiteReport {
    let trials = config.trials.unwrap_or(suite.trials);
    let tol = config.tol.unwrap_or(suite.tol);
    let ctx = Ctx { max_block: config.max_block };
    let results: Vec<TrialReport> = (config.first..config.first + trials)
        .map(|index| {
            let seed = rnd::sub_seed(config.seed, index as u64);
            run_trial(suite, seed, index, tol, &ctx)
        })
        .collect();
    let failures: Vec<usize> = results.iter().filter(|t| !t.ok).map(|t| t.index).collect();
    let worst = results.iter().fold(0.0f64, |m, t| m.max(t.worst));
    SuiteReport {
        suite: suite.name.to_string(),
        seed: config.seed,
        first: config.first,
        trials,
        tol,
        passed: failures.is_empty(),
        worst,
        failures,
        results,
    }
}

fn run_trial(suite: &Suite, seed: u64, index: usize, tol: f64, ctx: &Ctx) -> TrialReport {
    let mut rng = rnd::rng(seed);
    match (suite.run)(&mut rng, ctx) {
        Ok(claims) => {
            let worst = claims.iter().fold(0.0f64, |m, c| if c.residual.is_nan() { f64::INFINITY } else { m.max(c.residual) });
            let ok = claims.iter().all(|c| c.passes(tol));
            TrialReport { index, seed, ok, worst, claims, error: None, internal: false }
        }
        Err(e) => TrialReport {
            index,
            seed,
            ok: false,
            worst: f64::INFINITY,
            claims: vec![],
            internal: matches!(e, Error::Consistency(_)),
            error: Some(e.to_string()),
        },
    }
}

// ---------------------------------------------------------------- helpers

fn rand_element(rng: &mut TrialRng, alg: &MultiMatrixAlgebra) -> Element<F> {
    Element { blocks: alg.blocks().iter().map(|&n| rnd::matrix::<F>(rng, n, n)).collect() }
}

fn rand_complex(rng: &mut TrialRng, im_range: f64) -> crate::scalar::C<F> {
    c(rng.random_range(-1.0..1.0), rng.random_range(-im_range..im_range))
}

fn column(v: &crate::scalar::CVec<F>) -> CMat<F> {
    CMat::from_column_slice(v.len(), 1, v.as_slice())
}

fn tol() -> F {
    F::default_tol()
}

/// Hermitian defect or most negative eigenvalue, whichever is larger; 0 for PSD input.
fn negativity(x: &CMat<F>) -> f64 {
    let herm = linalg::max_abs(&(x - x.adjoint()));
    let low = linalg::min_eigenvalue(&linalg::hermitian_part(x));
    herm.max((-low).max(0.0))
}

// ---------------------------------------------------------------- gns

/// `Tr_M(Q x* y)` straight from the block matrices.
fn weighted_trace(q: &[CMat<F>], x: &Element<F>, y: &Element<F>) -> crate::scalar::C<F> {
    let mut s = c(0.0, 0.0);
    for (a, qa) in q.iter().enumerate() {
        let n = qa.nrows() as f64;
        s += (qa * x.blocks[a].adjoint() * &y.blocks[a]).trace() * cr(n);
    }
    s
}

fn gns_trial(rng: &mut TrialRng, ctx: &Ctx) -> Result<Vec<Claim>> {
    let alg = rnd::algebra(rng, ctx.max_block, MAX_DIM);
    let phi = rnd::functional::<F>(rng, &alg);
    let g = GnsSpace::new(phi.clone());
    let q = phi.densities().to_vec();
    let basis = alg.basis::<F>();
    let samples: Vec<Element<F>> = (0..3).map(|_| rand_element(rng, &alg)).collect();

    let mut ip = 0.0f64;
    for x in basis.iter().chain(&samples) {
        for y in basis.iter().chain(&samples) {
            let lhs = g.coords(x).dotc(&g.coords(y));
            ip = ip.max((lhs - weighted_trace(&q, x, y)).norm());
        }
    }

    // J L(x) J, with J = P·conj, is P conj(L(x)) P.
    let p = g.j_matrix();
    let jmj: Vec<CMat<F>> = basis.iter().map(|x| &p * linalg::conj(&g.left_action(x)) * &p).collect();
    let d = g.dim();
    let jmj = OperatorSubspace::span_of(d, d, &jmj, tol())?;
    let comm = OperatorSubspace::span_of(d, d, &g.rep().commutant_by_nullspace(tol()), tol())?;

    let (z, w) = (rand_complex(rng, 0.5), rand_complex(rng, 0.5));
    let mut group = 0.0f64;
    let mut auto = 0.0f64;
    for pair in samples.windows(2) {
        let (x, y) = (&pair[0], &pair[1]);
        group = group.max(g.sigma(z, &g.sigma(w, x)).dist(&g.sigma(z + w, x)));
        auto = auto.max(g.sigma(z, &x.mul(y)).dist(&g.sigma(z, x).mul(&g.sigma(z, y))));
    }
    let zero = samples[0].dist(&g.sigma(c(0.0, 0.0), &samples[0]));

    // ∇Λ(x) = Λ(QxQ⁻¹) and Λ(x*) = J∇^{1/2}Λ(x).
    let q_el = Element { blocks: q.clone() };
    let q_inv = Element { blocks: q.iter().map(|b| b.clone().try_inverse().expect("positive definite")).collect() };
    let nabla = g.modular_power(1.0);
    let half = g.modular_power(0.5);
    let (mut mod_err, mut tomita) = (0.0f64, 0.0f64);
    for x in basis.iter().chain(&samples) {
        let lhs = &nabla * g.coords(x);
        mod_err = mod_err.max((lhs - g.coords(&q_el.mul(x).mul(&q_inv))).max_norm());
        let lhs = g.apply_j(&(&half * g.coords(x)));
        tomita = tomita.max((lhs - g.coords(&x.adjoint())).max_norm());
    }

    let markov = GnsSpace::<F>::markov(alg.clone());
    let (m, ms) = mult_maps(&markov);
    let mm = linalg::max_abs_diff(&(m * ms), &linalg::eye(markov.dim()));

    Ok(vec![
        Claim::scalar("<c(x), c(y)> = Tr_M(Q x* y)", ip),
        Claim::subspaces("J M J = M′", &jmj, &comm),
        Claim::scalar("σ_z σ_w = σ_{z+w}", group),
        Claim::scalar("σ_z is multiplicative", auto),
        Claim::scalar("σ_0 = id", zero),
        Claim::scalar("∇Λ(x) = Λ(QxQ⁻¹)", mod_err),
        Claim::scalar("Λ(x*) = J∇^{1/2}Λ(x)", tomita),
        Claim::scalar("m m* = 1 under the Markov trace", mm),
    ])
}

trait MaxNorm {
    fn max_norm(&self) -> f64;
}

impl MaxNorm for crate::scalar::CVec<F> {
    fn max_norm(&self) -> f64 {
        self.iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}

// ---------------------------------------------------------------- relations

/// A random relation, redrawn (a bounded number of times) while it is zero,
/// so that the identities below are not checked on `0` alone.
fn relation(rng: &mut TrialRng, source: &RepresentedAlgebra<F>, target: &RepresentedAlgebra<F>) -> QuantumRelation<F> {
    let mut v = rnd::relation(rng, source, target, 2);
    for _ in 0..8 {
        if v.dim() > 0 {
            break;
        }
        v = rnd::relation(rng, source, target, 2);
    }
    v
}

fn small_rep(rng: &mut TrialRng, ctx: &Ctx, max_alg: usize, max_hilbert: usize) -> RepresentedAlgebra<F> {
    let alg = rnd::algebra(rng, ctx.max_block, max_alg);
    let twist = rng.random_bool(0.5);
    rnd::representation(rng, &alg, max_hilbert, twist)
}

/// `R₂ ∘ R₁` for relations given as `(y, x)` pairs.
fn compose_pairs(r2: &[(usize, usize)], r1: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut out = BTreeSet::new();
    for &(y, x) in r1 {
        for &(z, y2) in r2 {
            if y == y2 {
                out.insert((z, x));
            }
        }
    }
    out.into_iter().collect()
}

fn random_pairs(rng: &mut TrialRng, ny: usize, nx: usize) -> Vec<(usize, usize)> {
    let p = rng.random_range(0.1..0.7);
    let mut out = vec![];
    for y in 0..ny {
        for x in 0..nx {
            if rng.random_bool(p) {
                out.push((y, x));
            }
        }
    }
    out
}

fn classical_rep(rng: &mut TrialRng, points: usize) -> RepresentedAlgebra<F> {
    let alg = MultiMatrixAlgebra::diagonal(points);
    let twist = rng.random_bool(0.5);
    rnd::representation(rng, &alg, 8, twist)
}

fn relations_trial(rng: &mut TrialRng, ctx: &Ctx) -> Result<Vec<Claim>> {
    let reps: Vec<RepresentedAlgebra<F>> = (0..4).map(|_| small_rep(rng, ctx, 9, 7)).collect();
    let w = relation(rng, &reps[0], &reps[1]);
    let v = relation(rng, &reps[1], &reps[2]);
    let x = relation(rng, &reps[2], &reps[3]);

    let left = x.compose(&v)?.compose(&w)?;
    let right = x.compose(&v.compose(&w)?)?;
    let vm = v.compose(&QuantumRelation::identity(&reps[1], tol()))?;
    let nv = QuantumRelation::identity(&reps[2], tol()).compose(&v)?;
    let adj_l = v.compose(&w)?.adjoint();
    let adj_r = w.adjoint().compose(&v.adjoint())?;
    let blocks = v.blocks();
    let rebuilt = QuantumRelation::reassemble(&blocks, &v)?;
    let block_dims: usize = blocks.iter().map(|b| b.space.dim()).sum();

    let (nx, ny, nz) = (rng.random_range(1..=5), rng.random_range(1..=5), rng.random_range(1..=5));
    let (rx, ry, rz) = (classical_rep(rng, nx), classical_rep(rng, ny), classical_rep(rng, nz));
    let p1 = random_pairs(rng, ny, nx);
    let p2 = random_pairs(rng, nz, ny);
    let c1 = QuantumRelation::from_classical(&rx, &ry, &p1, tol())?;
    let c2 = QuantumRelation::from_classical(&ry, &rz, &p2, tol())?;
    let back = c1.to_classical()?;
    let composed = c2.compose(&c1)?.to_classical()?;
    let mut swapped: Vec<(usize, usize)> = p1.iter().map(|&(y, x)| (x, y)).collect();
    swapped.sort_unstable();

    Ok(vec![
        Claim::subspaces("(X∘V)∘W = X∘(V∘W)", left.space(), right.space()),
        Claim::subspaces("V∘M′ = V", vm.space(), v.space()),
        Claim::subspaces("N′∘V = V", nv.space(), v.space()),
        Claim::subspaces("(V∘W)* = W*∘V*", adj_l.space(), adj_r.space()),
        Claim::subspaces("V = span of its block components", rebuilt.space(), v.space()),
        Claim::new("block components form a direct sum", block_dims, v.dim(), if block_dims == v.dim() { 0.0 } else { 1.0 }),
        Claim::holds("classical relation round trip", back == p1),
        Claim::holds("classical composition matches set composition", composed == compose_pairs(&p2, &p1)),
        Claim::holds("classical adjoint swaps pairs", c1.adjoint().to_classical()? == swapped),
    ])
}

// ---------------------------------------------------------------- funcs

/// A hom that is an isomorphism onto a corner: a random subset of the source
/// blocks, permuted, plus possibly an unused extra target block.
fn corner_hom(rng: &mut TrialRng, source: &RepresentedAlgebra<F>) -> Result<Hom<F>> {
    let n = source.algebra().blocks().to_vec();
    let mut chosen: Vec<usize> = (0..n.len()).filter(|_| rng.random_bool(0.7)).collect();
    if chosen.is_empty() {
        chosen.push(0);
    }
    chosen.shuffle(rng);
    let mut sizes: Vec<usize> = chosen.iter().map(|&a| n[a]).collect();
    let mut k: Vec<Vec<usize>> = chosen.iter().map(|&a| (0..n.len()).map(|b| (a == b) as usize).collect()).collect();
    if rng.random_bool(0.5) {
        sizes.push(rng.random_range(1..=2));
        k.push(vec![0; n.len()]);
    }
    let m = MultiMatrixAlgebra::new(sizes.clone())?;
    let twist = rng.random_bool(0.5);
    let target = rnd::representation(rng, &m, 10, twist);
    let us: Vec<CMat<F>> = sizes.iter().map(|&s| rnd::unitary::<F>(rng, s)).collect();
    hom_from_multiplicities(source, &target, &k, Some(&us), tol())
}

fn funcs_trial(rng: &mut TrialRng, ctx: &Ctx) -> Result<Vec<Claim>> {
    let alg = rnd::algebra(rng, ctx.max_block, 9);
    let on_gns = rng.random_bool(0.5);
    let src = if on_gns {
        RepresentedAlgebra::gns(alg.clone())
    } else {
        let twist = rng.random_bool(0.5);
        rnd::representation(rng, &alg, 8, twist)
    };
    let unital = rng.random_bool(0.4);
    let h = rnd::hom(rng, &src, unital, 9, |r, m| {
        let twist = r.random_bool(0.5);
        rnd::representation(r, m, 10, twist)
    })?
    .hom;
    let v = h.relation()?;
    let mut claims = vec![Claim::subspaces("hom route = Kraus route for V^θ", v.space(), h.map().relation()?.space())];

    let (h2, res) = Hom::from_relation(&v)?;
    claims.push(Claim::scalar("relation → hom reconstruction residual", res));
    claims.push(Claim::scalar("hom → relation → hom", linalg::max_abs_diff(h.map().action(), h2.map().action())));
    claims.extend(h.property_dictionary(&v)?);

    // ker θ = (1 − z)N: θ kills (1 − z)N and is injective on zN.
    let z = h.kernel_projection()?;
    let one_minus = alg.one::<F>().sub(&z);
    let mut killed = 0.0f64;
    for e in alg.basis::<F>() {
        killed = killed.max(h.apply(&one_minus.mul(&e)).max_abs());
    }
    let rank = linalg::rank(h.map().action(), tol());
    let dim_zn: usize = alg.blocks().iter().enumerate().filter(|(a, _)| z.blocks[*a][(0, 0)].re > 0.5).map(|(_, n)| n * n).sum();
    claims.push(Claim::scalar("z is a central projection", z.mul(&z).dist(&z).max(z.central_defect())));
    claims.push(Claim::scalar("θ vanishes on (1 − z)N", killed));
    claims.push(Claim::new("θ is injective on zN", rank, dim_zn, if rank == dim_zn { 0.0 } else { 1.0 }));

    if on_gns {
        let phi = rnd::functional::<F>(rng, &alg);
        claims.extend(h.unit_vector_dictionary(&GnsSpace::new(phi))?);
    }

    let ch = corner_hom(rng, &src)?;
    let cv = ch.relation()?;
    let star = ch.star()?;
    let zc = ch.kernel_projection()?;
    let e = ch.unit_image().clone();
    let (mut left_inv, mut right_inv) = (0.0f64, 0.0f64);
    for x in alg.basis::<F>() {
        left_inv = left_inv.max(star.apply(&ch.apply(&x)).dist(&zc.mul(&x)));
    }
    for y in ch.target().algebra().basis::<F>() {
        right_inv = right_inv.max(ch.apply(&star.apply(&y)).dist(&e.mul(&y)));
    }
    claims.push(Claim::subspaces("V^{θ⋆} = (V^θ)*", star.relation()?.space(), cv.adjoint().space()));
    claims.push(Claim::scalar("θ⋆θ(x) = z x", left_inv));
    claims.push(Claim::scalar("θθ⋆(y) = θ(1) y", right_inv));
    claims.extend(ch.property_dictionary(&cv)?);
    Ok(claims)
}

// ---------------------------------------------------------------- functoriality

fn functoriality_trial(rng: &mut TrialRng, ctx: &Ctx) -> Result<Vec<Claim>> {
    let rep_closure = |r: &mut TrialRng, m: &MultiMatrixAlgebra| {
        let twist = r.random_bool(0.5);
        rnd::representation(r, m, 9, twist)
    };
    let src = small_rep(rng, ctx, 9, 6);
    let u1 = rng.random_bool(0.5);
    let h1 = rnd::hom(rng, &src, u1, 9, rep_closure)?.hom;
    let u2 = rng.random_bool(0.5);
    let h2 = rnd::hom(rng, h1.target(), u2, MAX_DIM, rep_closure)?.hom;
    let h21 = Hom::new(h2.map().compose(h1.map())?)?;
    let hom_lhs = h21.relation()?;
    let hom_rhs = h1.relation()?.compose(&h2.relation()?)?;

    let r0 = small_rep(rng, ctx, 9, 6);
    let r1 = small_rep(rng, ctx, 9, 6);
    let r2 = small_rep(rng, ctx, 9, 6);
    let t1 = rnd::cp_map(rng, &r0, &r1, 3)?;
    let t2 = rnd::cp_map(rng, &r1, &r2, 3)?;
    let cp_lhs = t2.compose(&t1)?.relation()?;
    let cp_rhs = t1.relation()?.compose(&t2.relation()?)?;

    // Pad the Kraus family with zeros and mix it by a random unitary; the
    // map and the span of commutant·Kraus must not change.
    let ks = t1.kraus();
    let (dk, dh) = (r0.hilbert_dim(), r1.hilbert_dim());
    let pad = rng.random_range(1..=2);
    let mut padded: Vec<CMat<F>> = ks.to_vec();
    padded.extend((0..pad).map(|_| linalg::zeros::<F>(dk, dh)));
    let u = rnd::unitary::<F>(rng, padded.len());
    let rotated: Vec<CMat<F>> = (0..padded.len())
        .map(|i| padded.iter().enumerate().fold(linalg::zeros::<F>(dk, dh), |acc, (j, b)| acc + b * u[(i, j)]))
        .collect();
    let mut map_err = 0.0f64;
    for y in r0.algebra().basis::<F>() {
        let ey = r0.embed(&y);
        let t = rotated.iter().fold(linalg::zeros::<F>(dh, dh), |acc, b| acc + b.adjoint() * &ey * b);
        map_err = map_err.max(linalg::max_abs_diff(&t, &r1.embed(&t1.apply(&y))));
    }
    let gens: Vec<CMat<F>> = r0.commutant_basis().iter().flat_map(|y| rotated.iter().map(move |b| y * b)).collect();
    let rotated_span = OperatorSubspace::span_of(dk, dh, &gens, tol())?;
    let t1_again = CpMap::from_kraus(r0.clone(), r1.clone(), &rotated, tol())?;

    Ok(vec![
        Claim::subspaces("V^{θ₂∘θ₁} = V^{θ₁}∘V^{θ₂} (homs)", hom_lhs.space(), hom_rhs.space()),
        Claim::subspaces("V^{θ₂∘θ₁} = V^{θ₁}∘V^{θ₂} (CP maps)", cp_lhs.space(), cp_rhs.space()),
        Claim::scalar("rotated, padded Kraus family gives the same map", map_err),
        Claim::subspaces("V^θ from rotated, padded Kraus family", &rotated_span, t1.relation()?.space()),
        Claim::subspaces("V^θ after re-dilation", t1_again.relation()?.space(), t1.relation()?.space()),
    ])
}

// ---------------------------------------------------------------- pullback

fn pullback_trial(rng: &mut TrialRng, ctx: &Ctx) -> Result<Vec<Claim>> {
    let reps: Vec<RepresentedAlgebra<F>> = (0..6).map(|_| small_rep(rng, ctx, 9, 5)).collect();
    let (m1, n1, m2, n2, m3, n3) = (&reps[0], &reps[1], &reps[2], &reps[3], &reps[4], &reps[5]);
    let tm = rnd::cp_map(rng, m1, m2, 2)?;
    let tn = rnd::cp_map(rng, n1, n2, 2)?;
    let tm2 = rnd::cp_map(rng, m2, m3, 2)?;
    let tn2 = rnd::cp_map(rng, n2, n3, 2)?;
    let v = relation(rng, m1, n1);

    let composed = tn.relation()?.adjoint().compose(&v.compose(&tm.relation()?)?)?;
    let dilated = pullback_by_dilation(&v, &tm, &tn)?;
    let p = pullback(&v, &tm, &tn)?;
    let nested = pullback(&p, &tm2, &tn2)?;
    let direct = pullback(&v, &tm2.compose(&tm)?, &tn2.compose(&tn)?)?;
    let from_id = pullback(&QuantumRelation::identity(m1, tol()), &tm, &CpMap::identity(m1, tol()))?;

    Ok(vec![
        Claim::subspaces("pullback: composition = dilation", composed.space(), &dilated),
        Claim::holds("pullback result is a bimodule", p.bimodule_residual() <= 1e-8),
        Claim::subspaces("pullback along composites = nested pullbacks", nested.space(), direct.space()),
        Claim::subspaces("pullback of M′ along (θ, id) = V^θ", from_id.space(), tm.relation()?.space()),
    ])
}

// ---------------------------------------------------------------- schur

fn random_operator(rng: &mut TrialRng, gm: &GnsSpace<F>, gn: &GnsSpace<F>) -> Result<GnsOperator<F>> {
    GnsOperator::new(gm.clone(), gn.clone(), rnd::matrix(rng, gn.dim(), gm.dim()))
}

fn flags_vector(fl: &crate::adjacency::AdjacencyFlags) -> [bool; 4] {
    [fl.cp, fl.real, fl.schur_idempotent, fl.psi_projection]
}

fn schur_trial(rng: &mut TrialRng, ctx: &Ctx) -> Result<Vec<Claim>> {
    let ma = rnd::algebra(rng, ctx.max_block, 8);
    let na = rnd::algebra(rng, ctx.max_block, 8);
    let gm = GnsSpace::new(rnd::functional::<F>(rng, &ma));
    let gn = GnsSpace::new(rnd::functional::<F>(rng, &na));
    let mut claims = vec![];

    let (x1, y1, x2, y2) = (rand_element(rng, &na), rand_element(rng, &ma), rand_element(rng, &na), rand_element(rng, &ma));
    let r1 = GnsOperator::rank_one(&gm, &gn, &x1, &y1);
    let r2 = GnsOperator::rank_one(&gm, &gn, &x2, &y2);
    let lhs = schur_product(&r1, &r2)?;
    let rhs = GnsOperator::rank_one(&gm, &gn, &x1.mul(&x2), &y1.mul(&y2));
    claims.push(Claim::scalar("|x₁⟩⟨y₁| ⋆ |x₂⟩⟨y₂| = |x₁x₂⟩⟨y₁y₂|", lhs.dist(&rhs)));

    // Random operators as sums of rank-ones.
    let a = r1.add(&r2)?.add(&random_operator(rng, &gm, &gn)?)?;
    let b = random_operator(rng, &gm, &gn)?;
    let (pa, pb) = (psi_prime(&a), psi_prime(&b));
    claims.push(Claim::scalar("Ψ′(A ⋆ B) = Ψ′(A)Ψ′(B)", linalg::max_abs_diff(&psi_prime(&schur_product(&a, &b)?).matrix, &(&pa.matrix * &pb.matrix))));
    claims.push(Claim::scalar("Ψ′(A†) = Ψ′(A)*", linalg::max_abs_diff(&psi_prime(&dagger(&a)).matrix, &pa.matrix.adjoint())));
    claims.push(Claim::scalar("Ψ′⁻¹Ψ′(A) = A", psi_prime_inv(&pa)?.dist(&a)));
    claims.push(Claim::scalar("(A ⋆ B)† = B† ⋆ A†", dagger(&schur_product(&a, &b)?).dist(&schur_product(&dagger(&b), &dagger(&a))?)));
    claims.push(Claim::scalar("A†† = A", dagger(&dagger(&a)).dist(&a)));

    // Decomposition independence: A = Σ_k |A u_k⟩⟨u_k| over a random
    // orthonormal basis u_k, each term mapped by the rank-one formula
    // |Λx⟩⟨Λy| ↦ L(x) ⊗ L(σ_{i/2}(y)*)ᵀ.
    let u = rnd::unitary::<F>(rng, gm.dim());
    let mut sum = linalg::zeros::<F>(gn.dim() * gm.dim(), gn.dim() * gm.dim());
    for k in 0..gm.dim() {
        let uk = u.column(k).into_owned();
        let x = gn.element(&(a.matrix() * &uk));
        let y = gm.element(&uk);
        let right = gm.left_action(&gm.sigma(c(0.0, 0.5), &y).adjoint()).transpose();
        sum += linalg::kron(&gn.left_action(&x), &right);
    }
    claims.push(Claim::scalar("Ψ′ independent of the rank-one decomposition", linalg::max_abs_diff(&sum, &pa.matrix)));

    // Projections ↔ CP Schur idempotents, both directions.
    let v = relation(rng, gm.rep(), gn.rep());
    let e = OppositeTensor { source: gm.clone(), target: gn.clone(), matrix: v.space().projection() };
    let ae = psi_prime_inv(&e)?;
    let fl = classify(&ae, 1e-8)?;
    claims.push(Claim::holds("Ψ′⁻¹(projection) is CP, real and Schur-idempotent", flags_vector(&fl) == [true; 4]));
    claims.push(Claim::scalar("Ψ′⁻¹(e) ⋆ Ψ′⁻¹(e) = Ψ′⁻¹(e)", schur_product(&ae, &ae)?.dist(&ae)));
    claims.push(Claim::scalar("Ψ′⁻¹(e) is CP", negativity(&psi_prime(&ae).matrix)));
    let adj = adjacency_of_relation(&v, &gm, &gn)?;
    let x = psi_prime(&adj).matrix;
    claims.push(Claim::scalar("CP Schur idempotent ↦ projection", linalg::max_abs_diff(&(&x * &x), &x).max(linalg::max_abs(&(&x - x.adjoint())))));
    let doubled = classify(&ae.scale(2.0), 1e-8)?;
    let negated = classify(&ae.scale(-1.0), 1e-8)?;
    let nonzero = v.dim() > 0;
    claims.push(Claim::holds("2A is CP and real but not idempotent", !nonzero || flags_vector(&doubled) == [true, true, false, false]));
    claims.push(Claim::holds("−A is real but neither CP nor idempotent", !nonzero || flags_vector(&negated) == [false, true, false, false]));
    let generic = classify(&a, 1e-8)?;
    claims.push(Claim::holds("a random operator is not an adjacency operator", !generic.psi_projection && !generic.schur_idempotent));

    // Ψ′(id) = projection onto M′ for the Markov trace.
    let mk = GnsSpace::<F>::markov(ma.clone());
    let pid = psi_prime(&GnsOperator::identity(&mk)).matrix;
    claims.push(Claim::scalar("Ψ′(id) = projection onto M′ (Markov)", linalg::max_abs_diff(&pid, &commutant_space(mk.rep(), tol()).projection())));

    // (ξ₁ | A(b₁*b₀) ξ₀) = ⟨ξ₁ ⊗ P c(b₁), Ψ′(A)(ξ₀ ⊗ P c(b₀))⟩, where
    // P c(b) is the row-major vectorisation of the bra of JΛ(b).
    let (b0, b1) = (rand_element(rng, &ma), rand_element(rng, &ma));
    let xi0 = rnd::matrix::<F>(rng, gn.dim(), 1);
    let xi1 = rnd::matrix::<F>(rng, gn.dim(), 1);
    let p = gm.j_matrix();
    let mut lemma = 0.0f64;
    for op in [&adj, &a] {
        let lhs = (xi1.adjoint() * gn.left_action(&op.apply(&b1.adjoint().mul(&b0))) * &xi0)[(0, 0)];
        let v0 = linalg::kron(&xi0, &column(&(&p * gm.coords(&b0))));
        let v1 = linalg::kron(&xi1, &column(&(&p * gm.coords(&b1))));
        let rhs = (v1.adjoint() * &psi_prime(op).matrix * v0)[(0, 0)];
        lemma = lemma.max((lhs - rhs).norm());
    }
    claims.push(Claim::scalar("(ξ₁ | A(b₁*b₀)ξ₀) from Ψ′(A)", lemma));
    Ok(claims)
}

// ---------------------------------------------------------------- image links

fn image_links_trial(rng: &mut TrialRng, ctx: &Ctx) -> Result<Vec<Claim>> {
    let ma = rnd::algebra(rng, ctx.max_block, 8);
    let na = rnd::algebra(rng, ctx.max_block, 8);
    let gm = GnsSpace::new(rnd::functional::<F>(rng, &ma));
    let gn = GnsSpace::new(rnd::functional::<F>(rng, &na));
    let v = relation(rng, gm.rep(), gn.rep());
    let a = adjacency_of_relation(&v, &gm, &gn)?;
    let back = relation_of_positive(&psi_prime(&a), tol())?;

    let k = kms_adjoint(&a);
    let formula = gm.modular_power(-0.5) * a.matrix().adjoint() * gn.modular_power(0.5);
    let swap = linalg::max_abs_diff(&psi_prime(&k).matrix, &swap_star(&psi_prime(&a)).matrix);
    let back_k = relation_of_positive(&psi_prime(&k), tol())?;
    let (theta, theta_claim) = theta_of_adjacency(&a, tol())?;

    let (mk, nk) = (GnsSpace::<F>::markov(ma.clone()), GnsSpace::<F>::markov(na.clone()));
    let a0 = adjacency_of_relation(&v, &mk, &nk)?;
    let (theta0, _) = theta_of_adjacency(&a0, tol())?;

    Ok(vec![
        Claim::subspaces("relation of Ψ′(A_V) = V", back.space(), v.space()),
        Claim::scalar("J A* J = ∇^{-1/2} A* ∇^{1/2} for CP A", linalg::max_abs_diff(k.matrix(), &formula)),
        Claim::scalar("Ψ′(J A* J) = swap-star of Ψ′(A)", swap),
        Claim::subspaces("relation of Ψ′(J A* J) = V*", back_k.space(), v.adjoint().space()),
        Claim::holds("θ_A is completely positive", theta.flags().min_choi_eigenvalue >= -1e-9),
        theta_claim,
        Claim::subspaces("tracial: V^θ = V", theta0.relation()?.space(), v.space()),
    ])
}

// ---------------------------------------------------------------- adjacency of homs

fn adjacency_hom_trial(rng: &mut TrialRng, ctx: &Ctx) -> Result<Vec<Claim>> {
    let ma = rnd::algebra(rng, ctx.max_block, 8);
    let src = RepresentedAlgebra::<F>::standard(ma);
    let unital = rng.random_bool(0.5);
    let th = rnd::hom(rng, &src, unital, 10, |_, m| RepresentedAlgebra::standard(m.clone()))?.hom;
    let phi_n = rnd::functional::<F>(rng, th.source().algebra());
    let phi_m = rnd::functional::<F>(rng, th.target().algebra());
    let (a, data) = adjacency_of_hom(&th, &phi_m, &phi_n, tol())?;
    let mut claims = data.claims.clone();

    claims.push(Claim::scalar("min eigenvalue of Ψ′(A) ≥ 0", negativity(&psi_prime(&a).matrix)));
    claims.push(Claim::scalar("‖A ⋆ A − A‖", schur_product(&a, &a)?.dist(&a)));
    let vmin = data.v.iter().filter(|v| v.nrows() > 0).map(linalg::min_eigenvalue).fold(f64::INFINITY, f64::min);
    claims.push(Claim::holds("v_α positive definite", vmin > 0.0));
    let fl = classify(&a, 1e-8)?;
    claims.push(Claim::holds("A classifies as an adjacency operator", flags_vector(&fl) == [true; 4]));

    // The basis of each multiplicity space is a free choice.
    let nb = th.source().algebra().blocks();
    let rotations: Vec<CMat<F>> =
        data.w.iter().zip(nb).map(|(w, &n)| if w.ncols() == 0 { linalg::zeros(0, 0) } else { rnd::unitary(rng, w.ncols() / n) }).collect();
    let (a_rot, data_rot) = adjacency_of_hom_in_basis(&th, &phi_m, &phi_n, Some(&rotations), tol())?;
    claims.push(Claim::scalar("A independent of the multiplicity-space basis", a_rot.dist(&a)));
    claims.push(Claim::scalar("u independent of the multiplicity-space basis", data_rot.u.dist(&data.u)));

    // Tracial unital case: A is θ itself and u = 1.
    let th1 = rnd::hom(rng, &src, true, 10, |_, m| RepresentedAlgebra::standard(m.clone()))?.hom;
    let pm = Functional::markov(th1.target().algebra().clone());
    let pn = Functional::markov(th1.source().algebra().clone());
    let (a1, d1) = adjacency_of_hom(&th1, &pm, &pn, tol())?;
    let hat = GnsOperator::from_action(&GnsSpace::new(pn), &GnsSpace::new(pm), th1.map().action())?;
    claims.push(Claim::scalar("tracial unital: A = θ", a1.dist(&hat)));
    claims.push(Claim::scalar("tracial unital: u = 1", d1.u.dist(&th1.target().algebra().one())));
    Ok(claims)
}

// ---------------------------------------------------------------- construction

/// A symmetric relation `S` containing a positive `x₀ ∈ M` with `S = f₀Sf₀`,
/// `f₀` the support of `x₀`: the bimodule generated by `x₀` and compressed
/// random generators.
fn graph_with_x0(rng: &mut TrialRng, rep: &RepresentedAlgebra<F>) -> Result<(QuantumRelation<F>, Element<F>)> {
    let alg = rep.algebra();
    let blocks = alg.blocks();
    let mut ranks: Vec<usize> = blocks.iter().map(|&n| rng.random_range(0..=n)).collect();
    if ranks.iter().all(|&r| r == 0) {
        ranks[0] = 1;
    }
    let x0 = Element {
        blocks: blocks
            .iter()
            .zip(&ranks)
            .map(|(&n, &r)| {
                let b = rnd::matrix::<F>(rng, n, r);
                linalg::hermitian_part(&(&b * b.adjoint()))
            })
            .collect(),
    };
    let support = Element { blocks: x0.blocks.iter().map(|b| linalg::support_projection(b, 1e-10)).collect() };
    let f0 = rep.embed(&support);
    let h = rep.hilbert_dim();
    let mut gens = vec![rep.embed(&x0)];
    for _ in 0..rng.random_range(0..=2) {
        let g = &f0 * rnd::matrix::<F>(rng, h, h) * &f0;
        gens.push(g.adjoint());
        gens.push(g);
    }
    let space = bimodule_generate(rep.commutant_basis(), &gens, rep.commutant_basis(), tol())?;
    Ok((QuantumRelation::from_space(rep.clone(), rep.clone(), space, false)?, x0))
}

fn construction_trial(rng: &mut TrialRng, ctx: &Ctx) -> Result<Vec<Claim>> {
    let alg = rnd::algebra(rng, ctx.max_block, 9);
    let twist = rng.random_bool(0.5);
    let rep = rnd::representation::<F>(rng, &alg, 8, twist);
    let s = rnd::symmetric_relation(rng, &rep, 2, true);
    let (theta, mut claims) = verdon_construct(&s)?;
    claims.push(Claim::subspaces("Verdon: confusability graph recomputed", theta.confusability_graph()?.space(), s.space()));
    claims.push(Claim::holds("Verdon: θ is CP", theta.flags().min_choi_eigenvalue >= -1e-9));

    let (s2, x0) = graph_with_x0(rng, &rep)?;
    let (theta2, c2) = qg_from_cp_construct(&s2, &x0)?;
    claims.extend(c2);
    claims.push(Claim::subspaces("from x₀: confusability graph recomputed", theta2.confusability_graph()?.space(), s2.space()));
    if let Some(found) = find_x0(&s2)? {
        let (_, c3) = qg_from_cp_construct(&s2, &found)?;
        claims.extend(c3.into_iter().map(|cl| Claim { claim: format!("searched x₀: {}", cl.claim), ..cl }));
    }

    // Every relation is V^θ for θ = J A* J, A its Markov adjacency operator.
    let ma = rnd::algebra(rng, ctx.max_block, 8);
    let rm = rnd::representation::<F>(rng, &ma, 6, true);
    let rn = rnd::representation::<F>(rng, &alg, 6, true);
    let v = relation(rng, &rm, &rn);
    let (gm, gn) = (GnsSpace::<F>::markov(ma), GnsSpace::<F>::markov(alg));
    let a = adjacency_of_relation(&v, &gm, &gn)?;
    let (th, _) = theta_of_adjacency(&a, tol())?;
    claims.push(Claim::subspaces("every relation is V^θ for a CP θ", th.relation()?.space(), to_gns(&v, &gm, &gn)?.space()));
    Ok(claims)
}

// ---------------------------------------------------------------- fixtures

fn fixtures_trial(_rng: &mut TrialRng, _ctx: &Ctx) -> Result<Vec<Claim>> {
    let cos = fixtures::not_all_cosurjective::<F>(tol())?;
    let mut claims = cos.claims();
    claims.push(Claim::holds("cosurjective flag set", cos.relation.properties().cosurjective));
    claims.extend(fixtures::invertible_slice::<F>().claims(tol())?);
    let p = fixtures::classical_channel_matrix();
    let rel = fixtures::channel_relation::<F>(&p, tol())?;
    let want = fixtures::channel_support(&p);
    claims.push(Claim::new("channel relation = support of p", rel.len(), want.len(), if rel == want { 0.0 } else { 1.0 }));
    Ok(claims)
}

// ---------------------------------------------------------------- transport

/// A random isometric intertwiner from `new` into `old ⊗ C^l`.
fn random_intertwiner(rng: &mut TrialRng, new: &RepresentedAlgebra<F>, old: &RepresentedAlgebra<F>) -> Result<CMat<F>> {
    let (m1, m0) = (new.multiplicities(), old.multiplicities());
    let l = m1.iter().zip(m0).map(|(a, b)| a.div_ceil(*b)).max().unwrap_or(1);
    let isos: Vec<CMat<F>> = m1.iter().zip(m0).map(|(&a, &b)| rnd::isometry::<F>(rng, b * l, a)).collect();
    Ok(intertwiner(new, old, Some(&isos))?.0)
}

fn transport_trial(rng: &mut TrialRng, ctx: &Ctx) -> Result<Vec<Claim>> {
    let ma = rnd::algebra(rng, ctx.max_block, 9);
    let endo = rng.random_bool(0.5);
    let na = if endo { ma.clone() } else { rnd::algebra(rng, ctx.max_block, 9) };
    let rm = rnd::representation::<F>(rng, &ma, 7, true);
    let rn = if endo { rm.clone() } else { rnd::representation::<F>(rng, &na, 7, true) };
    let v = if endo && rng.random_bool(0.5) {
        let reflexive = rng.random_bool(0.5);
        rnd::symmetric_relation(rng, &rm, 2, reflexive)
    } else {
        relation(rng, &rm, &rn)
    };
    let rm2 = rnd::representation::<F>(rng, &ma, 9, true);
    let rn2 = if endo { rm2.clone() } else { rnd::representation::<F>(rng, &na, 9, true) };
    let um = random_intertwiner(rng, &rm2, &rm)?;
    let un = if endo { um.clone() } else { random_intertwiner(rng, &rn2, &rn)? };
    let w = v.transport(&rm2, &um, &rn2, &un)?;
    let um_back = random_intertwiner(rng, &rm, &rm2)?;
    let un_back = if endo { um_back.clone() } else { random_intertwiner(rng, &rn, &rn2)? };
    let back = w.transport(&rm, &um_back, &rn, &un_back)?;

    let (fv, fw) = (v.properties(), w.properties());
    Ok(vec![
        Claim::holds("relation flags invariant under change of representation", fv == fw),
        Claim::iff("function classification invariant", fv.function, fw.function),
        Claim::iff("partial-function classification invariant", fv.partial_function, fw.partial_function),
        Claim::holds("transported space is a bimodule", w.bimodule_residual() <= 1e-8),
        Claim::subspaces("transport there and back is the identity", back.space(), v.space()),
        Claim::subspaces("transport commutes with adjoints", w.adjoint().space(), v.adjoint().transport(&rn2, &un, &rm2, &um)?.space()),
    ])
}
