use proptest::prelude::*;
use qrelkit::fixtures;
use qrelkit::linalg::{self, matrix_unit as e};
use qrelkit::opspace::*;
use qrelkit::random as rnd;
use qrelkit::scalar::{c, CMat};

const TOL: f64 = 1e-9;

fn span(gens: &[CMat<f64>]) -> OperatorSubspace<f64> {
    let (r, c) = gens[0].shape();
    OperatorSubspace::span_of(r, c, gens, TOL).unwrap()
}

#[test]
fn span_examples() {
    assert_eq!(span(&[linalg::zeros(2, 2)]).dim(), 0);
    let g = [e(2, 0, 0), e::<f64>(2, 0, 0) + e(2, 0, 1), e(2, 0, 1)];
    // oracle: rank of the 3×4 coefficient matrix
    let coeffs = nalgebra::DMatrix::from_fn(3, 4, |k, i| g[k][(i / 2, i % 2)]);
    assert_eq!(span(&g).dim(), linalg::rank(&coeffs, TOL));
    assert_eq!(span(&g).dim(), 2);
    let f = fixtures::not_all_cosurjective::<f64>(TOL).unwrap();
    assert_eq!(span(&[f.u1.clone(), f.u2.clone()]).dim(), 2);
    assert!(OperatorSubspace::span_of(2, 2, &[linalg::zeros::<f64>(2, 3)], TOL).is_err());
    assert_eq!(OperatorSubspace::<f64>::span_of(2, 3, &[], TOL).unwrap().dim(), 0);
}

#[test]
fn composition_examples() {
    let v = span(&[e(2, 0, 1)]);
    let w = span(&[e(2, 1, 0)]);
    assert!(compose_spaces(&v, &w).unwrap().equals(&span(&[e(2, 0, 0)])));
    let id = span(&[linalg::eye(2)]);
    assert!(compose_spaces(&v, &id).unwrap().equals(&v));
    assert!(compose_spaces(&v, &span(&[linalg::zeros(3, 2)])).is_err());
}

#[test]
fn adjoint_examples() {
    let v = span(&[e(2, 0, 1)]);
    assert!(v.adjoint().equals(&span(&[e(2, 1, 0)])));
    assert!(v.adjoint().adjoint().equals(&v));
    let f = fixtures::not_all_cosurjective::<f64>(TOL).unwrap();
    let a = span(&[f.u1.clone()]).adjoint();
    assert_eq!(a.dim(), 1);
    assert!(a.contains(&f.u1.adjoint()));
    // transpose has no conjugation
    let t = span(&[e::<f64>(2, 0, 1) * c(0.0, 1.0)]).transpose();
    assert!(t.contains(&e(2, 1, 0)));
}

#[test]
fn bimodule_examples() {
    let scalars = vec![linalg::eye::<f64>(2)];
    let g = bimodule_generate(&scalars, &[e(2, 0, 1)], &scalars, TOL).unwrap();
    assert!(g.equals(&span(&[e(2, 0, 1)])));
    // ℓ^∞(2) on C²: e_ii g e_jj enumerate all four matrix units
    let diag = vec![e::<f64>(2, 0, 0), e(2, 1, 1)];
    let ones = nalgebra::DMatrix::from_element(2, 2, c::<f64>(1.0, 0.0));
    let g = bimodule_generate(&diag, &[ones], &diag, TOL).unwrap();
    assert_eq!(g.dim(), 4);
    let again = bimodule_generate(&diag, &g.onb(), &diag, TOL).unwrap();
    assert!(again.equals(&g));
}

#[test]
fn order_examples() {
    let a = span(&[e(2, 0, 0)]);
    let b = span(&[e::<f64>(2, 0, 0) + e(2, 1, 1), e::<f64>(2, 0, 0) - e(2, 1, 1)]);
    assert_eq!(a.compare(&a).unwrap(), Comparison::Equal);
    assert_eq!(a.compare(&b).unwrap(), Comparison::Subset);
    assert_eq!(b.compare(&a).unwrap(), Comparison::Superset);
    assert_eq!(a.compare(&span(&[e(2, 0, 1)])).unwrap(), Comparison::Incomparable);
    assert!(a.intersect(&b).unwrap().equals(&a));

    let f = fixtures::not_all_cosurjective::<f64>(TOL).unwrap();
    let v = span(&[f.u1.clone(), f.u2.clone()]);
    let vv = compose_spaces(&v.adjoint(), &v).unwrap();
    assert!(vv.contains(&linalg::eye(2)));
}

fn random_space(seed: u64, rows: usize, cols: usize, k: usize) -> OperatorSubspace<f64> {
    let mut rng = rnd::rng(seed);
    let gens: Vec<CMat<f64>> = (0..k).map(|_| rnd::matrix(&mut rng, rows, cols)).collect();
    OperatorSubspace::span_of(rows, cols, &gens, TOL).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn projection_is_orthogonal(seed in any::<u64>(), r in 1usize..4, c_ in 1usize..4, k in 0usize..5) {
        let v = random_space(seed, r, c_, k);
        prop_assert_eq!(v.dim(), k.min(r * c_));
        let p = v.projection();
        prop_assert!(linalg::max_abs_diff(&(&p * &p), &p) <= 1e-12);
        prop_assert!(linalg::max_abs_diff(&p, &p.adjoint()) <= 1e-12);
        let onb = v.onb();
        for (i, a) in onb.iter().enumerate() {
            for (j, b) in onb.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((linalg::hs_inner(a, b) - c::<f64>(want, 0.0)).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn composition_laws(seed in any::<u64>(), k in 1usize..3) {
        let u = random_space(seed, 2, 3, k);
        let v = random_space(seed ^ 1, 3, 2, k);
        let w = random_space(seed ^ 2, 2, 3, k);
        let uv_w = compose_spaces(&compose_spaces(&u, &v).unwrap(), &w).unwrap();
        let u_vw = compose_spaces(&u, &compose_spaces(&v, &w).unwrap()).unwrap();
        prop_assert!(uv_w.equals(&u_vw));
        let uv = compose_spaces(&u, &v).unwrap();
        prop_assert!(uv.dim() <= u.dim() * v.dim());
        prop_assert!(uv.adjoint().equals(&compose_spaces(&v.adjoint(), &u.adjoint()).unwrap()));
        // monotone: U ⊆ U + W ⇒ U∘V ⊆ (U + W)∘V
        let big = u.sum(&w).unwrap();
        prop_assert!(uv.is_subspace_of(&compose_spaces(&big, &v).unwrap()));
    }

    #[test]
    fn intersection_is_the_largest_common_subspace(seed in any::<u64>(), k in 1usize..5) {
        let common = random_space(seed, 3, 3, k);
        let mut rng = rnd::rng(seed ^ 7);
        let extra = |rng: &mut rnd::TrialRng| -> Vec<CMat<f64>> { (0..2).map(|_| rnd::matrix(rng, 3, 3)).collect() };
        let mut ga = common.onb(); ga.extend(extra(&mut rng));
        let mut gb = common.onb(); gb.extend(extra(&mut rng));
        let (a, b) = (span(&ga), span(&gb));
        let i = a.intersect(&b).unwrap();
        // generic extras meet only in the common part
        prop_assert!(i.equals(&common));
        prop_assert!(i.is_subspace_of(&a) && i.is_subspace_of(&b));
    }
}
