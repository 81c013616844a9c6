use qrelkit::adjacency::{adjacency_of_relation, classify, psi_prime, relation_of_positive};
use qrelkit::mvnalg::MultiMatrixAlgebra;
use qrelkit::qfunc::{hom_from_multiplicities, standard_rep};
use qrelkit::random as rnd;
use qrelkit::scalar::Real;
use qrelkit::{Gns32, Relation32};

#[test]
fn single_precision_pipeline() {
    let tol = f32::default_tol();
    assert!(tol > 1e-6 && tol < 1e-3);
    let mut rng = rnd::rng(11);
    let g: Gns32 = Gns32::new(rnd::functional(&mut rng, &MultiMatrixAlgebra::new(vec![2, 1]).unwrap()));
    let v: Relation32 = rnd::relation(&mut rng, g.rep(), g.rep(), 2);
    let a = adjacency_of_relation(&v, &g, &g).unwrap();
    let f = classify(&a, tol).unwrap();
    assert!(f.cp && f.schur_idempotent && f.psi_projection);
    assert!(relation_of_positive(&psi_prime(&a), tol).unwrap().equals(&v));

    let s = standard_rep::<f32>(vec![1, 1]).unwrap();
    let t = standard_rep::<f32>(vec![2]).unwrap();
    let h = hom_from_multiplicities(&s, &t, &[vec![1, 1]], None, tol).unwrap();
    let r = h.relation().unwrap();
    assert!(r.is_coinjective() && r.is_cosurjective());
}
