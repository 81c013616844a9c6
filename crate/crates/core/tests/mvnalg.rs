use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use qrelkit::linalg::{self, max_abs_diff};
use qrelkit::mvnalg::*;
use qrelkit::random as rnd;
use qrelkit::scalar::{c, CMat, C};

fn diag(v: &[f64]) -> CMat<f64> {
    DMatrix::from_fn(v.len(), v.len(), |i, j| if i == j { c(v[i], 0.0) } else { c(0.0, 0.0) })
}

fn close(a: C<f64>, b: f64) -> bool {
    (a - c::<f64>(b, 0.0)).norm() < 1e-12
}

#[test]
fn markov_trace_examples() {
    let m2 = MultiMatrixAlgebra::full(2);
    assert!(close(m2.markov_trace(&m2.one::<f64>()).unwrap(), 4.0));
    let cc = MultiMatrixAlgebra::diagonal(2);
    assert!(close(cc.markov_trace(&cc.one::<f64>()).unwrap(), 2.0));
    let m23 = MultiMatrixAlgebra::new(vec![2, 3]).unwrap();
    let x = Element { blocks: vec![linalg::eye::<f64>(2), linalg::zeros(3, 3)] };
    // oracle: Σ n(α)·Tr(x_α) = 2·2 + 3·0
    assert!(close(m23.markov_trace(&x).unwrap(), 4.0));
    let bad = Element { blocks: vec![linalg::eye::<f64>(3)] };
    assert!(m23.markov_trace(&bad).is_err());
}

#[test]
fn algebra_validation() {
    assert!(MultiMatrixAlgebra::new(vec![]).is_err());
    assert!(MultiMatrixAlgebra::new(vec![2, 0]).is_err());
    assert_eq!(MultiMatrixAlgebra::new(vec![2, 3]).unwrap().dim(), 13);
    assert!(MultiMatrixAlgebra::diagonal(3).is_commutative());
    assert!(RepresentedAlgebra::<f64>::new(MultiMatrixAlgebra::full(2), vec![1, 1]).is_err());
    assert!(RepresentedAlgebra::<f64>::new(MultiMatrixAlgebra::full(2), vec![0]).is_err());
    let mut q = diag(&[1.0, -1.0]);
    assert!(Functional::new(MultiMatrixAlgebra::full(2), vec![q.clone()]).is_err());
    q[(1, 1)] = c(0.0, 0.0);
    assert!(Functional::new(MultiMatrixAlgebra::full(2), vec![q]).is_err());
}

#[test]
fn sigma_examples() {
    let alg = MultiMatrixAlgebra::full(2);
    let phi = Functional::new(alg.clone(), vec![diag(&[1.0, 4.0])]).unwrap();
    let e12 = alg.unit::<f64>(0, 0, 1);
    // Q^{1/2} e₁₂ Q^{-1/2} = 1·e₁₂·(1/2)
    let got = phi.sigma(c(0.0, -0.5), &e12);
    assert!(got.dist(&e12.scale(c(0.5, 0.0))) < 1e-14);
    let mut rng = rnd::rng(3);
    let x = Element { blocks: vec![rnd::matrix::<f64>(&mut rng, 2, 2)] };
    assert!(phi.sigma(c(0.0, 0.0), &x).dist(&x) < 1e-14);
    let tr = Functional::markov(alg);
    assert!(tr.sigma(c(0.3, -1.7), &x).dist(&x) < 1e-13);
}

#[test]
fn commutant_examples() {
    let cases: [(Vec<usize>, Vec<usize>, usize); 3] =
        [(vec![3], vec![1], 1), (vec![1, 1, 1], vec![1, 1, 1], 3), (vec![2], vec![2], 4)];
    for (blocks, mult, want) in cases {
        let rep = RepresentedAlgebra::<f64>::new(MultiMatrixAlgebra::new(blocks).unwrap(), mult).unwrap();
        assert_eq!(rep.commutant_basis().len(), want);
        assert_eq!(rep.commutant_by_nullspace(1e-9).len(), want);
    }
}

#[test]
fn gns_examples() {
    let g = GnsSpace::<f64>::markov(MultiMatrixAlgebra::full(3));
    assert_eq!(g.dim(), 9);
    assert!(max_abs_diff(&g.modular_power(1.0), &linalg::eye(9)) < 1e-14);

    // ∇ on M_2 with Q = diag(q₁, q₂): Λ(e_ij) ↦ Λ(Q e_ij Q⁻¹) = (q_i/q_j) Λ(e_ij)
    let (q1, q2) = (0.3, 1.7);
    let alg = MultiMatrixAlgebra::full(2);
    let g = GnsSpace::new(Functional::new(alg.clone(), vec![diag(&[q1, q2])]).unwrap());
    let nabla = g.modular_power(1.0);
    let q = [q1, q2];
    for i in 0..2 {
        for j in 0..2 {
            let e = alg.unit::<f64>(0, i, j);
            let got = &nabla * g.coords(&e);
            let want = g.coords(&e) * c::<f64>(q[i] / q[j], 0.0);
            assert!((got - want).norm() < 1e-13);
        }
    }
    let mut vals: Vec<f64> = linalg::herm_eig(&nabla).values;
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut want = vec![q1 / q2, 1.0, 1.0, q2 / q1];
    want.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for (a, b) in vals.iter().zip(&want) {
        assert!((a - b).abs() < 1e-12);
    }

    // tracial J is Λ(x) ↦ Λ(x*)
    let g = GnsSpace::<f64>::markov(alg);
    let mut rng = rnd::rng(8);
    let x = Element { blocks: vec![rnd::matrix::<f64>(&mut rng, 2, 2)] };
    assert!((g.apply_j(&g.coords(&x)) - g.coords(&x.adjoint())).norm() < 1e-13);
}

fn random_setup(seed: u64) -> (GnsSpace<f64>, Element<f64>, Element<f64>) {
    let mut rng = rnd::rng(seed);
    let alg = rnd::algebra(&mut rng, 3, 14);
    let g = GnsSpace::new(rnd::functional::<f64>(&mut rng, &alg));
    let mut el = || Element { blocks: alg.blocks().iter().map(|&n| rnd::matrix::<f64>(&mut rng, n, n)).collect() };
    let (x, y) = (el(), el());
    (g, x, y)
}

fn weighted_trace(g: &GnsSpace<f64>, x: &Element<f64>, y: &Element<f64>) -> C<f64> {
    // Σ n(α) Tr(Q_α x_α* y_α), computed directly
    let mut s = c(0.0, 0.0);
    for (a, &n) in g.algebra().blocks().iter().enumerate() {
        let q = &g.functional().densities()[a];
        s += (q * x.blocks[a].adjoint() * &y.blocks[a]).trace() * c::<f64>(n as f64, 0.0);
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gns_inner_product(seed in any::<u64>()) {
        let (g, x, y) = random_setup(seed);
        let lhs = g.coords(&x).dotc(&g.coords(&y));
        let rhs = weighted_trace(&g, &x, &y);
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + rhs.norm()));
        prop_assert!(g.element(&g.coords(&x)).dist(&x) <= 1e-10);
    }

    #[test]
    fn left_action_is_a_star_homomorphism(seed in any::<u64>()) {
        let (g, x, y) = random_setup(seed);
        let l = |a: &Element<f64>| g.left_action(a);
        prop_assert!(max_abs_diff(&(l(&x) * l(&y)), &l(&x.mul(&y))) <= 1e-10);
        prop_assert!(max_abs_diff(&l(&x).adjoint(), &l(&x.adjoint())) <= 1e-10);
        prop_assert!((l(&x) * g.coords(&y) - g.coords(&x.mul(&y))).norm() <= 1e-10);
    }

    #[test]
    fn j_conjugates_m_onto_its_commutant(seed in any::<u64>()) {
        let (g, x, y) = random_setup(seed);
        let p = g.j_matrix();
        // J L(x) J as a linear map: P conj(L(x)) P
        let jxj = &p * linalg::conj(&g.left_action(&x)) * &p;
        let ly = g.left_action(&y);
        prop_assert!(max_abs_diff(&(&jxj * &ly), &(&ly * &jxj)) <= 1e-9);
        // J² = 1 and J Λ(x) = Λ(σ_{-i/2}(x*))
        let jj = &p * linalg::conj(&p);
        prop_assert!(max_abs_diff(&jj, &linalg::eye(g.dim())) <= 1e-14);
        let want = g.coords(&g.sigma(c(0.0, -0.5), &x.adjoint()));
        prop_assert!((g.apply_j(&g.coords(&x)) - &want).norm() <= 1e-9 * (1.0 + want.norm()));
    }

    #[test]
    fn sigma_group_law(seed in any::<u64>(), a in -1.0f64..1.0, b in -1.0f64..1.0, s in -1.0f64..1.0, t in -1.0f64..1.0) {
        let (g, x, y) = random_setup(seed);
        let (z, w) = (c(a, b), c(s, t));
        let lhs = g.sigma(z, &g.sigma(w, &x));
        let rhs = g.sigma(z + w, &x);
        prop_assert!(lhs.dist(&rhs) <= 1e-8 * (1.0 + rhs.max_abs()));
        let prod = g.sigma(z, &x.mul(&y));
        prop_assert!(prod.dist(&g.sigma(z, &x).mul(&g.sigma(z, &y))) <= 1e-8 * (1.0 + prod.max_abs()));
    }

    #[test]
    fn modular_operator_matches_conjugation(seed in any::<u64>()) {
        let (g, x, _) = random_setup(seed);
        let q = Element { blocks: g.functional().densities().to_vec() };
        let qinv = g.functional().q_real_power(-1.0);
        let want = g.coords(&q.mul(&x).mul(&qinv));
        let got = g.modular_power(1.0) * g.coords(&x);
        prop_assert!((got - want.clone()).norm() <= 1e-9 * (1.0 + want.norm()));
    }

    #[test]
    fn representation_embed_and_commutant(seed in any::<u64>(), twist in any::<bool>()) {
        let mut rng = rnd::rng(seed);
        let alg = rnd::algebra(&mut rng, 3, 10);
        let rep = rnd::representation::<f64>(&mut rng, &alg, 12, twist);
        let x = Element { blocks: alg.blocks().iter().map(|&n| rnd::matrix::<f64>(&mut rng, n, n)).collect() };
        let y = Element { blocks: alg.blocks().iter().map(|&n| rnd::matrix::<f64>(&mut rng, n, n)).collect() };
        prop_assert!(max_abs_diff(&(rep.embed(&x) * rep.embed(&y)), &rep.embed(&x.mul(&y))) <= 1e-10);
        prop_assert!(max_abs_diff(&rep.embed(&alg.one()), &linalg::eye(rep.hilbert_dim())) <= 1e-12);
        let want: usize = rep.multiplicities().iter().map(|m| m * m).sum();
        prop_assert_eq!(rep.commutant_basis().len(), want);
        prop_assert_eq!(rep.commutant_by_nullspace(1e-9).len(), want);
        for t in rep.commutant_basis() {
            prop_assert!(max_abs_diff(&(t * rep.embed(&x)), &(rep.embed(&x) * t)) <= 1e-10);
        }
        let (back, res) = rep.unembed(&rep.embed(&x));
        prop_assert!(back.dist(&x) <= 1e-10 && res <= 1e-10);
    }

    #[test]
    fn markov_gns_has_unit_multiplication_adjoint(seed in any::<u64>()) {
        let mut rng = rnd::rng(seed);
        let alg = rnd::algebra(&mut rng, 3, 14);
        let g = GnsSpace::<f64>::markov(alg);
        let m = g.mult_map();
        prop_assert!(max_abs_diff(&(&m * m.adjoint()), &linalg::eye(g.dim())) <= 1e-12);
        let one: DVector<C<f64>> = g.one_coords();
        prop_assert!((one.norm() - (g.dim() as f64).sqrt()).abs() <= 1e-12);
    }
}
