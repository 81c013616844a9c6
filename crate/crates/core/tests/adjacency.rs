use nalgebra::DMatrix;
use proptest::prelude::*;
use qrelkit::adjacency::*;
use qrelkit::linalg::{self, matrix_unit as e};
use qrelkit::mvnalg::{Element, Functional, GnsSpace, MultiMatrixAlgebra, RepresentedAlgebra};
use qrelkit::qfunc::{hom_from_multiplicities, standard_rep, Hom};
use qrelkit::qrel::{commutant_space, QuantumRelation};
use qrelkit::random as rnd;
use qrelkit::scalar::{c, CMat};

const TOL: f64 = 1e-9;

fn markov(blocks: Vec<usize>) -> GnsSpace<f64> {
    GnsSpace::markov(MultiMatrixAlgebra::new(blocks).unwrap())
}

fn el(rng: &mut rnd::TrialRng, alg: &MultiMatrixAlgebra) -> Element<f64> {
    Element { blocks: alg.blocks().iter().map(|&n| rnd::matrix::<f64>(rng, n, n)).collect() }
}

fn diag(v: &[f64]) -> CMat<f64> {
    DMatrix::from_fn(v.len(), v.len(), |i, j| if i == j { c(v[i], 0.0) } else { c(0.0, 0.0) })
}

#[test]
fn schur_rank_one_law() {
    let g = markov(vec![2, 1]);
    let h = GnsSpace::new(Functional::new(MultiMatrixAlgebra::full(2), vec![diag(&[0.5, 1.5])]).unwrap());
    let mut rng = rnd::rng(1);
    let (x1, x2) = (el(&mut rng, h.algebra()), el(&mut rng, h.algebra()));
    let (y1, y2) = (el(&mut rng, g.algebra()), el(&mut rng, g.algebra()));
    let a = GnsOperator::rank_one(&g, &h, &x1, &y1);
    let b = GnsOperator::rank_one(&g, &h, &x2, &y2);
    let lhs = schur_product(&a, &b).unwrap();
    let rhs = GnsOperator::rank_one(&g, &h, &x1.mul(&x2), &y1.mul(&y2));
    assert!(lhs.dist(&rhs) < 1e-10);
}

#[test]
fn commutative_schur_and_psi() {
    let g = markov(vec![1, 1, 1]);
    let mut rng = rnd::rng(2);
    let a = GnsOperator::new(g.clone(), g.clone(), rnd::matrix(&mut rng, 3, 3)).unwrap();
    let b = GnsOperator::new(g.clone(), g.clone(), rnd::matrix(&mut rng, 3, 3)).unwrap();
    let want = a.matrix().component_mul(b.matrix());
    assert!(linalg::max_abs_diff(schur_product(&a, &b).unwrap().matrix(), &want) < 1e-12);

    // Ψ′(|δ_y⟩⟨δ_x|) is the point projection onto (y, x)
    let alg = g.algebra().clone();
    let (y, x) = (2, 0);
    let r = GnsOperator::rank_one(&g, &g, &alg.central(y), &alg.central(x));
    let p = psi_prime(&r).matrix;
    let k = y * 3 + x;
    assert!(linalg::max_abs_diff(&p, &e(9, k, k)) < 1e-12);
}

#[test]
fn dagger_examples() {
    let g = markov(vec![2]);
    let id = GnsOperator::identity(&g);
    assert!(dagger(&id).dist(&id) < 1e-12);
    let mut rng = rnd::rng(3);
    let (x, y) = (el(&mut rng, g.algebra()), el(&mut rng, g.algebra()));
    let r = GnsOperator::rank_one(&g, &g, &x, &y);
    let want = GnsOperator::rank_one(&g, &g, &x.adjoint(), &y.adjoint());
    assert!(dagger(&r).dist(&want) < 1e-12);
}

#[test]
fn psi_examples() {
    for g in [markov(vec![2, 1]), markov(vec![1, 1])] {
        let p = psi_prime(&GnsOperator::identity(&g)).matrix;
        let want = commutant_space(g.rep(), TOL).projection();
        assert!(linalg::max_abs_diff(&p, &want) < 1e-12);
    }
    let g = GnsSpace::new(Functional::new(MultiMatrixAlgebra::full(2), vec![diag(&[0.4, 1.6])]).unwrap());
    let mut rng = rnd::rng(4);
    let a = GnsOperator::new(g.clone(), g.clone(), rnd::matrix(&mut rng, 4, 4)).unwrap();
    assert!(psi_prime_inv(&psi_prime(&a)).unwrap().dist(&a) < 1e-10);
    let lhs = psi_prime(&dagger(&a)).matrix;
    assert!(linalg::max_abs_diff(&lhs, &psi_prime(&a).matrix.adjoint()) < 1e-10);
}

#[test]
fn classify_examples() {
    let g = markov(vec![2, 1]);
    let id = GnsOperator::identity(&g);
    let f = classify(&id, TOL).unwrap();
    assert!(f.cp && f.real && f.schur_idempotent && f.psi_projection);
    let f = classify(&id.scale(2.0), TOL).unwrap();
    assert!(f.cp && f.real && !f.schur_idempotent && !f.psi_projection);

    // a classical 0/1 adjacency matrix
    let h = markov(vec![1, 1, 1]);
    let adj = DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 1.0]).map(|v| c(v, 0.0));
    let f = classify(&GnsOperator::new(h.clone(), h, adj).unwrap(), TOL).unwrap();
    assert!(f.cp && f.real && f.schur_idempotent && f.psi_projection);
}

#[test]
fn relation_of_positive_examples() {
    let g = markov(vec![2, 1]);
    let x = OppositeTensor { source: g.clone(), target: g.clone(), matrix: commutant_space(g.rep(), TOL).projection() };
    let v = relation_of_positive(&x, TOL).unwrap();
    assert!(v.equals(&QuantumRelation::identity(g.rep(), TOL)));
    assert!(psi_prime_inv(&x).unwrap().dist(&GnsOperator::identity(&g)) < 1e-12);

    // tracial commutative: the relation of a 0/1 matrix is its support
    let h = markov(vec![1, 1]);
    let adj = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]).map(|v| c(v, 0.0));
    let a = GnsOperator::new(h.clone(), h.clone(), adj).unwrap();
    let v = relation_of_positive(&psi_prime(&a), TOL).unwrap();
    assert_eq!(v.to_classical().unwrap(), vec![(0, 0), (0, 1), (1, 1)]);
}

#[test]
fn kms_examples() {
    let g = markov(vec![2]);
    let mut rng = rnd::rng(5);
    let v = rnd::relation(&mut rng, g.rep(), g.rep(), 2);
    let a = adjacency_of_relation(&v, &g, &g).unwrap();
    // tracial and real: the KMS adjoint is the Hilbert-space adjoint
    assert!(linalg::max_abs_diff(kms_adjoint(&a).matrix(), &a.matrix().adjoint()) < 1e-12);
    let id = GnsOperator::identity(&g);
    assert!(kms_adjoint(&id).dist(&id) < 1e-12);
}

#[test]
fn theta_and_coinjectivity_examples() {
    let g = markov(vec![2]);
    let id = GnsOperator::identity(&g);
    let (theta, claim) = theta_of_adjacency(&id, TOL).unwrap();
    assert!(claim.passes(1e-9));
    assert!(linalg::max_abs_diff(theta.action(), &linalg::eye(4)) < 1e-12);
    assert!(theta.relation().unwrap().equals(&QuantumRelation::identity(g.rep(), TOL)));

    let c0 = coinjectivity_criterion(&id, TOL).unwrap();
    assert!(c0.coinjective);
    assert!(c0.x0.unwrap().dist(&g.algebra().one()) < 1e-12);

    let full = QuantumRelation::full(g.rep(), g.rep(), TOL);
    let a = adjacency_of_relation(&full, &g, &g).unwrap();
    assert!(!coinjectivity_criterion(&a, TOL).unwrap().coinjective);

    // an automorphism gives a coinjective adjacency
    let mut rng = rnd::rng(6);
    let u = rnd::unitary::<f64>(&mut rng, 2);
    let h = hom_from_multiplicities(g.rep(), g.rep(), &[vec![1]], Some(&[u]), TOL).unwrap();
    let a = adjacency_of_relation(&h.relation().unwrap().adjoint(), &g, &g).unwrap();
    assert!(coinjectivity_criterion(&a, TOL).unwrap().coinjective);
}

#[test]
fn adjacency_of_hom_examples() {
    let mut rng = rnd::rng(7);
    let rep = standard_rep::<f64>(vec![2, 1]).unwrap();
    let id = Hom::identity(&rep, TOL);
    let phi = Functional::markov(rep.algebra().clone());
    let (a, data) = adjacency_of_hom(&id, &phi, &phi, TOL).unwrap();
    assert!(a.dist(&GnsOperator::identity(&GnsSpace::new(phi))) < 1e-9);
    assert!(data.u.dist(&rep.algebra().one()) < 1e-9);

    // any faithful state: the identity still gives a Schur-idempotent with the identity relation
    let phi = rnd::functional::<f64>(&mut rng, rep.algebra());
    let (a, data) = adjacency_of_hom(&id, &phi, &phi, TOL).unwrap();
    assert!(data.claims.iter().all(|c| c.passes(1e-8)));
    let v = relation_of_positive(&psi_prime(&a), TOL).unwrap();
    assert!(v.equals(&QuantumRelation::identity(GnsSpace::new(phi).rep(), TOL)));

    // tracial unital: A is the GNS matrix of θ
    let h = hom_from_multiplicities(&standard_rep(vec![1, 1]).unwrap(), &standard_rep(vec![2]).unwrap(), &[vec![1, 1]], None, TOL).unwrap();
    let (pm, pn) = (Functional::markov(h.target().algebra().clone()), Functional::markov(h.source().algebra().clone()));
    let (a, data) = adjacency_of_hom(&h, &pm, &pn, TOL).unwrap();
    let hat = GnsOperator::from_action(&GnsSpace::new(pn.clone()), &GnsSpace::new(pm.clone()), h.map().action()).unwrap();
    assert!(a.dist(&hat) < 1e-10);
    assert!(data.u.dist(&h.target().algebra().one()) < 1e-10);

    // non-tracial target state: still CP and Schur-idempotent
    let pm = Functional::new(MultiMatrixAlgebra::full(2), vec![diag(&[1.0 / 3.0, 2.0 / 3.0])]).unwrap();
    let (a, data) = adjacency_of_hom(&h, &pm, &pn, TOL).unwrap();
    assert!(data.claims.iter().all(|c| c.passes(1e-8)), "{:?}", data.claims);
    let f = classify(&a, TOL).unwrap();
    assert!(f.cp && f.schur_idempotent);
}

#[test]
fn verdon_examples() {
    let g = markov(vec![2]);
    let id = QuantumRelation::identity(g.rep(), TOL);
    let (theta, claims) = verdon_construct(&id).unwrap();
    assert!(theta.is_unital() && claims.iter().all(|c| c.passes(1e-7)));
    assert!(theta.confusability_graph().unwrap().equals(&id));

    let rep = standard_rep::<f64>(vec![2]).unwrap();
    let full = QuantumRelation::full(&rep, &rep, TOL);
    let (theta, _) = verdon_construct(&full).unwrap();
    assert_eq!(theta.confusability_graph().unwrap().dim(), 4);

    // not reflexive
    let c2 = RepresentedAlgebra::standard(MultiMatrixAlgebra::diagonal(2));
    let off = QuantumRelation::new(c2.clone(), c2.clone(), &[e(2, 0, 1), e(2, 1, 0)], false, TOL).unwrap();
    assert!(verdon_construct(&off).is_err());
}

#[test]
fn qg_from_cp_examples() {
    let c2 = RepresentedAlgebra::<f64>::standard(MultiMatrixAlgebra::diagonal(2));
    let s = QuantumRelation::new(c2.clone(), c2.clone(), &[e(2, 0, 0)], false, TOL).unwrap();
    let x0 = Element { blocks: vec![linalg::eye(1), linalg::zeros(1, 1)] };
    let (theta, claims) = qg_from_cp_construct(&s, &x0).unwrap();
    assert!(claims.iter().all(|c| c.passes(1e-7)), "{claims:?}");
    assert!(theta.confusability_graph().unwrap().equals(&s));

    // reflexive S with x₀ = 1 behaves like the unital construction
    let id = QuantumRelation::identity(&c2, TOL);
    let (theta, _) = qg_from_cp_construct(&id, &c2.algebra().one()).unwrap();
    assert!(theta.confusability_graph().unwrap().equals(&id));

    // S ∩ M = 0: no x₀
    let off = QuantumRelation::new(c2.clone(), c2.clone(), &[e(2, 0, 1), e(2, 1, 0)], false, TOL).unwrap();
    assert!(find_x0(&off).unwrap().is_none());
}

#[test]
fn find_x0_examples() {
    let rep = standard_rep::<f64>(vec![2, 1]).unwrap();
    let mut rng = rnd::rng(8);
    let s = rnd::symmetric_relation(&mut rng, &rep, 2, true);
    let x0 = find_x0(&s).unwrap().unwrap();
    assert!(x0.min_eigenvalue() > 0.0);

    // S = span{diag(1,1,0)} over M_3
    let m3 = standard_rep::<f64>(vec![3]).unwrap();
    let f = diag(&[1.0, 1.0, 0.0]);
    let s = QuantumRelation::new(m3.clone(), m3, &[f.clone()], false, TOL).unwrap();
    let x0 = find_x0(&s).unwrap().unwrap();
    let t = x0.blocks[0][(0, 0)];
    assert!(t.norm() > 1e-3);
    assert!(linalg::max_abs_diff(&x0.blocks[0], &(f * t)) < 1e-8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn relation_adjacency_round_trip(seed in any::<u64>()) {
        let mut rng = rnd::rng(seed);
        let alg = MultiMatrixAlgebra::new(vec![2, 1]).unwrap();
        let g = GnsSpace::new(rnd::functional::<f64>(&mut rng, &alg));
        let v = rnd::relation(&mut rng, g.rep(), g.rep(), 2);
        let a = adjacency_of_relation(&v, &g, &g).unwrap();
        let f = classify(&a, TOL).unwrap();
        prop_assert!(f.cp && f.schur_idempotent && f.psi_projection);
        let back = relation_of_positive(&psi_prime(&a), TOL).unwrap();
        prop_assert!(back.equals(&v));
        // the KMS adjoint carries the adjoint relation
        let star = relation_of_positive(&psi_prime(&kms_adjoint(&a)), TOL).unwrap();
        prop_assert!(star.equals(&v.adjoint()));
    }

    #[test]
    fn schur_idempotents_are_psi_projections(seed in any::<u64>()) {
        let mut rng = rnd::rng(seed);
        let alg = rnd::algebra(&mut rng, 2, 6);
        let g = GnsSpace::new(rnd::functional::<f64>(&mut rng, &alg));
        let d = g.dim();
        // a random projection in N ⊗ M^op: spectral projection of a random
        // Hermitian element built from left actions
        let k = rnd::matrix::<f64>(&mut rng, d, d);
        let a = GnsOperator::new(g.clone(), g.clone(), &k + k.adjoint()).unwrap();
        let x = linalg::hermitian_part(&psi_prime(&a).matrix);
        let e = linalg::herm_eig(&x);
        let keep: Vec<usize> = (0..d * d).filter(|&i| e.values[i] > 1e-6).collect();
        let p = DMatrix::from_fn(d * d, keep.len(), |i, j| e.vectors[(i, keep[j])]);
        let proj = OppositeTensor { source: g.clone(), target: g.clone(), matrix: &p * p.adjoint() };
        let b = psi_prime_inv(&proj).unwrap();
        let f = classify(&b, TOL).unwrap();
        prop_assert!(f.cp && f.real && f.schur_idempotent && f.psi_projection);
    }
}
