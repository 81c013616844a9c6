use nalgebra::DMatrix;
use proptest::prelude::*;
use qrelkit::cpmap::*;
use qrelkit::fixtures;
use qrelkit::linalg::{self, matrix_unit as e};
use qrelkit::mvnalg::{Element, MultiMatrixAlgebra, RepresentedAlgebra};
use qrelkit::opspace::OperatorSubspace;
use qrelkit::qfunc::{hom_from_multiplicities, standard_rep};
use qrelkit::qrel::QuantumRelation;
use qrelkit::random as rnd;
use qrelkit::scalar::{c, CMat};

const TOL: f64 = 1e-9;

fn m(n: usize) -> RepresentedAlgebra<f64> {
    RepresentedAlgebra::standard(MultiMatrixAlgebra::full(n))
}

fn diagonal(k: usize) -> RepresentedAlgebra<f64> {
    RepresentedAlgebra::standard(MultiMatrixAlgebra::diagonal(k))
}

fn trace_map(n: usize) -> CpMap<f64> {
    CpMap::from_fn(m(n), m(n), |y: &Element<f64>| {
        let t = y.blocks[0].trace() / c(n as f64, 0.0);
        Element { blocks: vec![linalg::eye::<f64>(n) * t] }
    }, TOL)
    .unwrap()
}

#[test]
fn flag_examples() {
    let id = CpMap::identity(&m(2), TOL);
    let f = id.flags();
    assert!(f.unital && f.hom && f.min_choi_eigenvalue >= -1e-12);

    // oracle: Choi of y ↦ Tr(y)/n · 1 is (1/n)·1, eigenvalues 1/n
    let t = trace_map(3);
    assert!(t.is_unital() && !t.is_hom());
    assert!((t.flags().min_choi_eigenvalue - 1.0 / 3.0).abs() < 1e-12);

    let ch = CpMap::<f64>::classical_channel(&fixtures::classical_channel_matrix(), TOL).unwrap();
    assert!(ch.is_unital() && ch.flags().min_choi_eigenvalue >= -1e-12);

    // transpose is positive but not CP
    let tr = CpMap::from_fn(m(2), m(2), |y: &Element<f64>| Element { blocks: vec![y.blocks[0].transpose()] }, TOL);
    assert!(tr.is_err());
    assert!(CpMap::<f64>::classical_channel(&[vec![0.5, 0.4]], TOL).is_err());
}

#[test]
fn kraus_examples() {
    let id = CpMap::identity(&m(3), TOL);
    assert_eq!(id.kraus().len(), 1);
    assert!(id.kraus_residual() < 1e-12);

    let mut rng = rnd::rng(2);
    let u = rnd::unitary::<f64>(&mut rng, 2);
    let ad = CpMap::from_kraus(m(2), m(2), &[u.clone()], TOL).unwrap();
    assert_eq!(ad.kraus().len(), 1);

    // classical channel: v δ_x = Σ_y √p(y|x) δ_y ⊗ δ_x; Kraus b_(y,x) = √p(y|x) e_{y,x}
    let p = fixtures::classical_channel_matrix();
    let ch = CpMap::<f64>::classical_channel(&p, TOL).unwrap();
    let mut ks = vec![];
    for (x, row) in p.iter().enumerate() {
        for (y, &q) in row.iter().enumerate() {
            if q > 0.0 {
                ks.push(e::<f64>(2, y, x) * c(q.sqrt(), 0.0));
            }
        }
    }
    let explicit = CpMap::from_kraus(diagonal(2), diagonal(2), &ks, TOL).unwrap();
    assert!(linalg::max_abs_diff(explicit.action(), ch.action()) < 1e-12);
    assert!(ch.kraus_residual() < 1e-12);
    let s = ch.stinespring();
    let vv = s.v.adjoint() * &s.v;
    assert!(linalg::max_abs_diff(&vv, &linalg::eye(2)) < 1e-12);
}

#[test]
fn relation_examples() {
    let rep = m(2);
    let v = CpMap::identity(&rep, TOL).relation().unwrap();
    assert!(v.equals(&QuantumRelation::identity(&rep, TOL)));

    let p = fixtures::classical_channel_matrix();
    let ch = CpMap::<f64>::classical_channel(&p, TOL).unwrap();
    assert_eq!(ch.relation().unwrap().to_classical().unwrap(), fixtures::channel_support(&p));

    // a hom's V^θ from the Kraus route equals the hom route
    let h = hom_from_multiplicities(&standard_rep::<f64>(vec![1, 1]).unwrap(), &standard_rep(vec![2]).unwrap(), &[vec![1, 1]], None, TOL).unwrap();
    assert!(h.map().relation().unwrap().equals(&h.relation().unwrap()));
}

#[test]
fn composition_examples() {
    let t = trace_map(2);
    let id = CpMap::identity(&m(2), TOL);
    assert!(linalg::max_abs_diff(t.compose(&id).unwrap().action(), t.action()) < 1e-14);

    // two classical channels compose by stochastic matrix product
    let p1 = vec![vec![1.0, 0.0], vec![0.5, 0.5]];
    let p2 = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
    let a = CpMap::<f64>::classical_channel(&p1, TOL).unwrap();
    let b = CpMap::<f64>::classical_channel(&p2, TOL).unwrap();
    // θ_{p1}∘θ_{p2}: f ↦ p1 (p2 f), the channel p1·p2
    let comp = a.compose(&b).unwrap();
    let prod: Vec<Vec<f64>> = (0..2).map(|x| (0..2).map(|z| (0..2).map(|y| p1[x][y] * p2[y][z]).sum()).collect()).collect();
    let want = CpMap::<f64>::classical_channel(&prod, TOL).unwrap();
    assert!(linalg::max_abs_diff(comp.action(), want.action()) < 1e-14);
    let lhs = comp.relation().unwrap();
    let rhs = b.relation().unwrap().compose(&a.relation().unwrap()).unwrap();
    assert!(lhs.equals(&rhs));
}

#[test]
fn confusability_examples() {
    let rep = m(2);
    let g = CpMap::identity(&rep, TOL).confusability_graph().unwrap();
    assert!(g.equals(&QuantumRelation::identity(&rep, TOL)));

    // x₁ ∼ x₂ iff the rows share an output
    let p = vec![vec![1.0, 0.0, 0.0], vec![0.5, 0.5, 0.0], vec![0.0, 0.0, 1.0]];
    let ch = CpMap::<f64>::classical_channel(&p, TOL).unwrap();
    let got = ch.confusability_graph().unwrap().to_classical().unwrap();
    let mut want = vec![];
    for x1 in 0..3 {
        for x2 in 0..3 {
            if (0..3).any(|y| p[x1][y] > 0.0 && p[x2][y] > 0.0) {
                want.push((x1, x2));
            }
        }
    }
    assert_eq!(got, want);

    // depolarizing on M_2: Kraus set spans M_2, so the graph is everything
    let g = trace_map(2).confusability_graph().unwrap();
    assert_eq!(g.dim(), 4);
}

#[test]
fn pullback_examples() {
    let mut rng = rnd::rng(6);
    let (a, b) = (m(2), diagonal(2));
    let v = rnd::relation(&mut rng, &a, &b, 2);
    let p = pullback(&v, &CpMap::identity(&a, TOL), &CpMap::identity(&b, TOL)).unwrap();
    assert!(p.equals(&v));

    // the pullback of the trivial relation N′ along (θ, id) is V^θ
    let theta = rnd::cp_map(&mut rng, &b, &a, 2).unwrap();
    let triv = QuantumRelation::identity(&b, TOL);
    let p = pullback(&triv, &theta, &CpMap::identity(&b, TOL)).unwrap();
    // θ : b → a, so the pullback runs from a to b like V^θ
    assert!(p.equals(&theta.relation().unwrap()));
    assert!(pullback(&v, &CpMap::identity(&b, TOL), &CpMap::identity(&b, TOL)).is_err());
}

#[test]
fn ucp_probe_examples() {
    let rep = m(2);
    let one = QuantumRelation::new(rep.clone(), rep.clone(), &[linalg::eye(2)], false, TOL).unwrap();
    let p = ucp_realizable_relation(&one).unwrap();
    assert!(p.realizable);
    // in the basis {1} the witness is G = [1]
    let p = ucp_realizable_full_target(&[linalg::eye(2)], &rep, TOL).unwrap();
    let w = p.witness.unwrap();
    assert!((w[(0, 0)] - c::<f64>(1.0, 0.0)).norm() < 1e-9);

    let f = fixtures::not_all_cosurjective::<f64>(TOL).unwrap();
    assert!(!f.probe.realizable);
    assert_eq!(f.probe.free_parameters, 0);

    // Kraus pair of a unital map: Σ b†b = 1 so G = 1 works
    let mut rng = rnd::rng(9);
    let u = rnd::unitary::<f64>(&mut rng, 4);
    let b1 = DMatrix::from_fn(2, 2, |i, j| u[(i, j)]);
    let b2 = DMatrix::from_fn(2, 2, |i, j| u[(i + 2, j)]);
    let p = ucp_realizable_full_target(&[b1, b2], &rep, TOL).unwrap();
    assert!(p.realizable);
}

fn kraus_span(t: &CpMap<f64>) -> OperatorSubspace<f64> {
    let (dk, dh) = (t.source().hilbert_dim(), t.target().hilbert_dim());
    let gens: Vec<CMat<f64>> = t.source().commutant_basis().iter().flat_map(|y| t.kraus().iter().map(move |b| y * b)).collect();
    OperatorSubspace::span_of(dk, dh, &gens, TOL).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn kraus_reproduces_action(seed in any::<u64>(), twist in any::<bool>()) {
        let mut rng = rnd::rng(seed);
        let na = rnd::algebra(&mut rng, 3, 6);
        let ma = rnd::algebra(&mut rng, 3, 6);
        let src = rnd::representation::<f64>(&mut rng, &na, 6, twist);
        let tgt = rnd::representation::<f64>(&mut rng, &ma, 6, twist);
        let t = rnd::cp_map(&mut rng, &src, &tgt, 3).unwrap();
        prop_assert!(t.kraus_residual() <= 1e-10);
        prop_assert!(t.flags().min_choi_eigenvalue >= -1e-10);
        // rebuilding from the extracted Kraus set gives the same map and relation
        let again = CpMap::from_kraus(src, tgt, t.kraus(), TOL).unwrap();
        prop_assert!(linalg::max_abs_diff(again.action(), t.action()) <= 1e-10);
        prop_assert!(again.relation().unwrap().space().equals(&kraus_span(&t)));
    }

    #[test]
    fn cp_functoriality(seed in any::<u64>()) {
        let mut rng = rnd::rng(seed);
        let reps: Vec<RepresentedAlgebra<f64>> = (0..3).map(|_| {
            let a = rnd::algebra(&mut rng, 2, 5);
            rnd::representation(&mut rng, &a, 6, false)
        }).collect();
        let t1 = rnd::cp_map(&mut rng, &reps[0], &reps[1], 2).unwrap();
        let t2 = rnd::cp_map(&mut rng, &reps[1], &reps[2], 2).unwrap();
        // θ₂∘θ₁ : reps[0] → reps[2]; V^{θ₂∘θ₁} = V^{θ₁}∘V^{θ₂}
        let lhs = t2.compose(&t1).unwrap().relation().unwrap();
        let rhs = t1.relation().unwrap().compose(&t2.relation().unwrap()).unwrap();
        prop_assert!(lhs.equals(&rhs));
    }
}
