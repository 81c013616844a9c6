use proptest::prelude::*;
use qrelkit::doc::*;
use qrelkit::linalg;
use qrelkit::mvnalg::{Functional, GnsSpace, MultiMatrixAlgebra, RepresentedAlgebra};
use qrelkit::adjacency::adjacency_of_relation;
use qrelkit::qrel::QuantumRelation;
use qrelkit::random as rnd;
use qrelkit::Error;

const TOL: f64 = 1e-9;

fn reparse(d: &Document) -> Document {
    parse(&emit(d)).unwrap()
}

#[test]
fn algebra_descriptor_formats() {
    let d = parse(r#"{"kind":"algebra","version":1,"payload":{"blocks":[2,1],"state":"markov_trace"}}"#).unwrap();
    let f = state_from_doc(&d.payload::<StateDoc>(Kind::Algebra).unwrap()).unwrap();
    assert!(f.is_markov_trace());

    // state defaults to the Markov trace
    let d = parse(r#"{"kind":"algebra","version":1,"payload":{"blocks":[1,1]}}"#).unwrap();
    assert!(state_from_doc(&d.payload(Kind::Algebra).unwrap()).unwrap().is_markov_trace());

    let text = r#"{"kind":"algebra","version":1,"payload":{"blocks":[1,1],
        "state":{"densities":[[[[0.25,0]]],[[[0.75,0]]]]}}}"#;
    let f = state_from_doc(&parse(text).unwrap().payload(Kind::Algebra).unwrap()).unwrap();
    assert!(!f.is_markov_trace());
    assert!((f.densities()[1][(0, 0)].re - 0.75).abs() < 1e-15);

    let bad = r#"{"kind":"algebra","version":1,"payload":{"blocks":[1],"state":"uniform"}}"#;
    assert!(parse(bad).unwrap().payload::<StateDoc>(Kind::Algebra).is_err());
}

#[test]
fn errors() {
    let text = r#"{"kind":"relation", "version":1,,}"#;
    match parse(text) {
        Err(Error::Invalid(msg)) => assert!(msg.contains(&format!("byte {}", text.find(",,").unwrap() + 1)), "{msg}"),
        other => panic!("{other:?}"),
    }
    let err = parse(r#"{"kind":"relation","version":2,"payload":{}}"#).unwrap_err();
    assert!(err.to_string().contains("version"));
    let d = parse(r#"{"kind":"relation","version":1,"payload":{}}"#).unwrap();
    assert!(d.payload::<MapDoc>(Kind::Hom).unwrap_err().to_string().contains("expected a hom document"));
    assert!(matrix_from_doc(&vec![vec![[1.0, 0.0]], vec![]]).is_err());
    assert!(matrix_from_doc(&vec![vec![[f64::NAN, 0.0]]]).is_err());
}

#[test]
fn relation_doc_accepts_basis_alias() {
    let text = r#"{"kind":"relation","version":1,"payload":{"source":{"blocks":[1,1]},"target":{"blocks":[1,1]},
        "basis":[[[[1,0],[0,0]],[[0,0],[0,0]]]]}}"#;
    let v = relation_from_doc(&parse(text).unwrap().payload(Kind::Relation).unwrap(), TOL).unwrap();
    assert_eq!(v.to_classical().unwrap(), vec![(0, 0)]);
}

#[test]
fn empty_relation_round_trip() {
    let rep = RepresentedAlgebra::<f64>::standard(MultiMatrixAlgebra::full(2));
    let zero = QuantumRelation::new(rep.clone(), rep.clone(), &[linalg::zeros(2, 2)], false, TOL).unwrap();
    let d = reparse(&Document::new(Kind::Relation, &relation_to_doc(&zero)));
    let back = relation_from_doc(&d.payload(Kind::Relation).unwrap(), TOL).unwrap();
    assert_eq!(back.dim(), 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn matrix_round_trip(seed in any::<u64>(), r in 0usize..5, c in 0usize..5) {
        let mut rng = rnd::rng(seed);
        let a = rnd::matrix::<f64>(&mut rng, r, c);
        let text = serde_json::to_string(&matrix_to_doc(&a)).unwrap();
        let back = matrix_from_doc(&serde_json::from_str(&text).unwrap()).unwrap();
        if r > 0 { prop_assert_eq!(back, a); }
    }

    #[test]
    fn relation_round_trip(seed in any::<u64>()) {
        let mut rng = rnd::rng(seed);
        let (sa, ta) = (rnd::algebra(&mut rng, 2, 5), rnd::algebra(&mut rng, 2, 5));
        let (s, t) = (rnd::representation::<f64>(&mut rng, &sa, 8, true), rnd::representation::<f64>(&mut rng, &ta, 8, false));
        let v = rnd::relation(&mut rng, &s, &t, 3);
        let d = reparse(&Document::new(Kind::Relation, &relation_to_doc(&v)));
        let back = relation_from_doc(&d.payload(Kind::Relation).unwrap(), TOL).unwrap();
        prop_assert!(back.equals(&v));
        prop_assert!(back.source().same_as(v.source(), 1e-12));
    }

    #[test]
    fn map_state_adjacency_round_trip(seed in any::<u64>()) {
        let mut rng = rnd::rng(seed);
        let (sa, ta) = (rnd::algebra(&mut rng, 2, 5), rnd::algebra(&mut rng, 2, 5));
        let (s, t) = (rnd::representation::<f64>(&mut rng, &sa, 8, false), rnd::representation::<f64>(&mut rng, &ta, 8, false));
        let th = rnd::cp_map(&mut rng, &s, &t, 3).unwrap();
        let d = reparse(&Document::new(Kind::Cpmap, &cpmap_to_doc(&th)));
        let back = cpmap_from_doc(&d.payload(Kind::Cpmap).unwrap(), TOL).unwrap();
        prop_assert!(linalg::max_abs_diff(back.action(), th.action()) == 0.0);

        let f: Functional<f64> = rnd::functional(&mut rng, &sa);
        let d = reparse(&Document::new(Kind::Algebra, &state_to_doc(&f)));
        let g = state_from_doc(&d.payload(Kind::Algebra).unwrap()).unwrap();
        for (x, y) in g.densities().iter().zip(f.densities()) {
            prop_assert!(linalg::max_abs_diff(x, y) < 1e-15);
        }

        let gs = GnsSpace::new(f);
        let v = rnd::relation(&mut rng, gs.rep(), gs.rep(), 2);
        let a = adjacency_of_relation(&v, &gs, &gs).unwrap();
        let d = reparse(&Document::new(Kind::Adjacency, &adjacency_to_doc(&a)));
        let b = adjacency_from_doc(&d.payload(Kind::Adjacency).unwrap()).unwrap();
        prop_assert!(b.dist(&a) < 1e-15);
    }
}
