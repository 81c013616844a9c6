use proptest::prelude::*;
use qrelkit::linalg::{self, matrix_unit as e};
use qrelkit::mvnalg::{Element, GnsSpace, RepresentedAlgebra};
use qrelkit::opspace::OperatorSubspace;
use qrelkit::qfunc::*;
use qrelkit::qrel::QuantumRelation;
use qrelkit::random as rnd;
use qrelkit::scalar::c;

const TOL: f64 = 1e-9;

fn std_rep(blocks: Vec<usize>) -> RepresentedAlgebra<f64> {
    standard_rep(blocks).unwrap()
}

fn hom(src: Vec<usize>, tgt: Vec<usize>, k: &[Vec<usize>]) -> Hom<f64> {
    hom_from_multiplicities(&std_rep(src), &std_rep(tgt), k, None, TOL).unwrap()
}

#[test]
fn relation_examples() {
    let rep = std_rep(vec![2, 1]);
    let id = Hom::identity(&rep, TOL);
    assert!(id.relation().unwrap().equals(&QuantumRelation::identity(&rep, TOL)));
    assert_eq!(zero_hom(&rep, &rep, TOL).relation().unwrap().dim(), 0);

    // C² → M_2, (a, b) ↦ diag(a, b)
    let h = hom(vec![1, 1], vec![2], &[vec![1, 1]]);
    let v = h.relation().unwrap();
    // oracle: intertwiners v with v·diag(a,b) = (a,b)·v are diagonal
    let want = OperatorSubspace::span_of(2, 2, &[e(2, 0, 0), e(2, 1, 1)], TOL).unwrap();
    assert!(v.space().equals(&want));
    assert!(h.map().relation().unwrap().equals(&v));
}

#[test]
fn recovery_examples() {
    let rep = std_rep(vec![2, 1]);
    let (h, res) = Hom::from_relation(&QuantumRelation::identity(&rep, TOL)).unwrap();
    assert!(res < 1e-10);
    assert!(linalg::max_abs_diff(h.map().action(), &linalg::eye(rep.algebra().dim())) < 1e-10);
    let (h, _) = Hom::from_relation(&QuantumRelation::zero(&rep, &rep, TOL)).unwrap();
    assert!(linalg::max_abs(h.map().action()) < 1e-12);
    let full = QuantumRelation::full(&std_rep(vec![2]), &std_rep(vec![2]), TOL);
    assert!(Hom::from_relation(&full).is_err());
}

#[test]
fn dictionary_examples() {
    let mut rng = rnd::rng(1);
    let u = rnd::unitary::<f64>(&mut rng, 2);
    let iso = hom_from_multiplicities(&std_rep(vec![2]), &std_rep(vec![2]), &[vec![1]], Some(&[u]), TOL).unwrap();
    let v = iso.relation().unwrap();
    let f = v.properties();
    assert!(f.coinjective && f.cosurjective && f.injective && f.surjective);
    assert!(iso.property_dictionary(&v).unwrap().iter().all(|c| c.passes(1e-9)));

    // C² → C, (a, b) ↦ a: surjective, not injective
    let h = hom(vec![1, 1], vec![1], &[vec![1, 0]]);
    let f = h.relation().unwrap().properties();
    assert!(f.injective && !f.surjective);
    assert!(h.is_surjective() && !h.is_injective());

    // C → C², a ↦ (a, a): injective, not surjective
    let h = hom(vec![1], vec![1, 1], &[vec![1], vec![1]]);
    let f = h.relation().unwrap().properties();
    assert!(f.surjective && !f.injective);
    assert!(h.is_injective() && !h.is_surjective());
}

#[test]
fn star_examples() {
    let mut rng = rnd::rng(3);
    let u = rnd::unitary::<f64>(&mut rng, 3);
    let iso = hom_from_multiplicities(&std_rep(vec![3]), &std_rep(vec![3]), &[vec![1]], Some(&[u]), TOL).unwrap();
    let inv = iso.star().unwrap();
    let x = Element { blocks: vec![rnd::matrix::<f64>(&mut rng, 3, 3)] };
    assert!(inv.apply(&iso.apply(&x)).dist(&x) < 1e-10);
    let id = Hom::identity(&std_rep(vec![2, 1]), TOL);
    assert!(linalg::max_abs_diff(id.star().unwrap().map().action(), id.map().action()) < 1e-12);

    // θ(x, a) = (x, 0) onto the corner M_2 ⊕ 0 kills the second block;
    // θ⋆θ is multiplication by z = (1, 0)
    let h = hom(vec![2, 1], vec![2, 1], &[vec![1, 0], vec![0, 0]]);
    let s = h.star().unwrap();
    let y = Element { blocks: vec![rnd::matrix::<f64>(&mut rng, 2, 2), rnd::matrix(&mut rng, 1, 1)] };
    let z = h.kernel_projection().unwrap();
    assert!(s.apply(&h.apply(&y)).dist(&z.mul(&y)) < 1e-10);
    // images that are not corners: a ↦ a·1 in M_2, and the diagonal of M_2
    assert!(hom(vec![1], vec![2], &[vec![2]]).star().is_err());
    assert!(hom(vec![1, 1], vec![2], &[vec![1, 1]]).star().is_err());
}

#[test]
fn kernel_examples() {
    let inj = hom(vec![2], vec![3], &[vec![1]]);
    assert!(inj.kernel_projection().unwrap().dist(&inj.source().algebra().one()) < 1e-12);
    let rep = std_rep(vec![2]);
    assert!(zero_hom(&rep, &rep, TOL).kernel_projection().unwrap().max_abs() < 1e-12);
    let h = hom(vec![2, 3], vec![2], &[vec![1, 0]]);
    let z = h.kernel_projection().unwrap();
    assert!(z.dist(&h.source().algebra().central(0)) < 1e-12);
}

fn random_hom(seed: u64, unital: bool) -> Hom<f64> {
    let mut rng = rnd::rng(seed);
    let alg = rnd::algebra(&mut rng, 2, 5);
    let src = rnd::representation::<f64>(&mut rng, &alg, 6, true);
    rnd::hom(&mut rng, &src, unital, 9, |r, m| rnd::representation(r, m, 9, true)).unwrap().hom
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn round_trip_recovers_hom(seed in any::<u64>(), unital in any::<bool>()) {
        let h = random_hom(seed, unital);
        let v = h.relation().unwrap();
        prop_assert!(v.is_coinjective());
        prop_assert_eq!(v.properties().function, h.map().is_unital());
        let (back, _) = Hom::from_relation(&v).unwrap();
        prop_assert!(linalg::max_abs_diff(back.map().action(), h.map().action()) <= 1e-8);
        prop_assert!(h.property_dictionary(&v).unwrap().iter().all(|c| c.passes(1e-8)));
    }

    #[test]
    fn composition_reverses(seed in any::<u64>()) {
        let h1 = random_hom(seed, true);
        let mut rng = rnd::rng(seed ^ 0xabc);
        let h2 = rnd::hom(&mut rng, h1.target(), true, 14, |r, m| rnd::representation(r, m, 9, false)).unwrap().hom;
        let comp = Hom::new(h2.map().compose(h1.map()).unwrap()).unwrap();
        let lhs = comp.relation().unwrap();
        let rhs = h1.relation().unwrap().compose(&h2.relation().unwrap()).unwrap();
        prop_assert!(lhs.equals(&rhs));
    }

    #[test]
    fn unit_vectors_determine_adjoints(seed in any::<u64>()) {
        let mut rng = rnd::rng(seed);
        let alg = rnd::algebra(&mut rng, 2, 5);
        let g = GnsSpace::<f64>::markov(alg);
        let h = rnd::hom(&mut rng, g.rep(), false, 9, |r, m| rnd::representation(r, m, 9, false)).unwrap().hom;
        let claims = h.unit_vector_dictionary(&g).unwrap();
        prop_assert!(claims.iter().all(|c| c.passes(1e-9)), "{:?}", claims);
    }
}

#[test]
fn non_hom_is_rejected() {
    let rep = std_rep(vec![2]);
    let half = qrelkit::cpmap::CpMap::new(rep.clone(), rep, linalg::eye::<f64>(4) * c(0.5, 0.0), TOL).unwrap();
    assert!(Hom::new(half).is_err());
}
