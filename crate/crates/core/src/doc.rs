//! JSON documents.
//!
//! Complex scalars are `[re, im]`; matrices are arrays of rows. Every
//! document carries a kind tag and the format version:
//!
//! ```json
//! { "kind": "relation", "version": 1, "payload": { ... } }
//! ```

use crate::adjacency::GnsOperator;
use crate::cpmap::CpMap;
use crate::error::{invalid, shape, Error, Result};
use crate::mvnalg::{Element, Functional, GnsSpace, MultiMatrixAlgebra, RepresentedAlgebra};
use crate::opspace::OperatorSubspace;
use crate::qfunc::Hom;
use crate::qrel::QuantumRelation;
use crate::report::Claim;
use crate::scalar::CMat;
use nalgebra::{Complex, DMatrix};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Algebra,
    Relation,
    Cpmap,
    Hom,
    Adjacency,
    Channel,
    Report,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub kind: Kind,
    pub version: u32,
    pub payload: serde_json::Value,
}

pub type MatrixDoc = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepDoc {
    pub blocks: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    /// Defaults to multiplicity one on every block.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplicities: Option<Vec<usize>>,
    /// Unitary conjugating the block-diagonal form; identity when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unitary: Option<MatrixDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationDoc {
    pub source: RepDoc,
    pub target: RepDoc,
    #[serde(alias = "basis")]
    pub generators: Vec<MatrixDoc>,
    /// Close the span under the commutant actions instead of requiring a bimodule.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub close: bool,
}

/// A CP map or hom: either the action in algebra coordinates or Kraus operators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapDoc {
    pub source: RepDoc,
    pub target: RepDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<MatrixDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus: Option<Vec<MatrixDoc>>,
}

/// An algebra with a faithful functional:
/// `{ "blocks": [..], "state": "markov_trace" | { "densities": [..] } }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDoc {
    pub blocks: Vec<usize>,
    #[serde(default)]
    pub state: StateSpec,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    #[default]
    #[serde(with = "markov_tag")]
    MarkovTrace,
    Densities { densities: Vec<MatrixDoc> },
}

mod markov_tag {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str("markov_trace")
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        let tag = String::deserialize(d)?;
        if tag == "markov_trace" { Ok(()) } else { Err(D::Error::custom(format!("unknown state {tag:?}"))) }
    }
}

/// An algebra element as its list of blocks.
pub type ElementDoc = Vec<MatrixDoc>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjacencyDoc {
    pub gns_matrix: MatrixDoc,
    pub source_state: StateDoc,
    pub target_state: StateDoc,
}

/// A classical channel `p[x][y]`, or a classical relation on `inputs × outputs`
/// given by pairs `[y, x]`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ChannelDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inputs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<[usize; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDoc {
    pub command: String,
    pub ok: bool,
    #[serde(default)]
    pub claims: Vec<Claim>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<Document>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Byte offset of a (line, column) position as reported by serde_json.
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let mut offset = 0;
    for (i, l) in text.split_inclusive('\n').enumerate() {
        if i + 1 == line {
            return offset + column.saturating_sub(1).min(l.len());
        }
        offset += l.len();
    }
    text.len()
}

/// Parses a document; syntax errors report the byte offset.
pub fn parse(text: &str) -> Result<Document> {
    let doc: Document = serde_json::from_str(text).map_err(|e| {
        let at = byte_offset(text, e.line(), e.column());
        invalid(format!("malformed document at byte {at}: {e}"))
    })?;
    if doc.version != FORMAT_VERSION {
        return Err(invalid(format!("unsupported format version {} (expected {FORMAT_VERSION})", doc.version)));
    }
    Ok(doc)
}

pub fn emit(doc: &Document) -> String {
    serde_json::to_string_pretty(doc).expect("documents serialize")
}

impl Document {
    pub fn new<T: Serialize>(kind: Kind, payload: &T) -> Self {
        Self { kind, version: FORMAT_VERSION, payload: serde_json::to_value(payload).expect("payload serializes") }
    }

    pub fn payload<T: DeserializeOwned>(&self, expected: Kind) -> Result<T> {
        if self.kind != expected {
            return Err(invalid(format!("expected a {expected:?} document, got {:?}", self.kind).to_lowercase()));
        }
        serde_json::from_value(self.payload.clone()).map_err(|e| invalid(format!("bad {expected:?} payload: {e}").to_lowercase()))
    }
}

pub fn matrix_from_doc(m: &MatrixDoc) -> Result<CMat<f64>> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    if m.iter().any(|r| r.len() != cols) {
        return Err(shape("matrix rows have different lengths"));
    }
    if m.iter().flatten().flatten().any(|x| !x.is_finite()) {
        return Err(invalid("matrix has non-finite entries"));
    }
    Ok(DMatrix::from_fn(rows, cols, |i, j| Complex::new(m[i][j][0], m[i][j][1])))
}

pub fn matrix_to_doc(a: &CMat<f64>) -> MatrixDoc {
    (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| [a[(i, j)].re, a[(i, j)].im]).collect()).collect()
}

fn algebra_from(blocks: &[usize], labels: Option<&Vec<String>>) -> Result<MultiMatrixAlgebra> {
    let alg = MultiMatrixAlgebra::new(blocks.to_vec())?;
    match labels {
        Some(l) => alg.with_labels(l.clone()),
        None => Ok(alg),
    }
}

pub fn rep_from_doc(d: &RepDoc, tol: f64) -> Result<RepresentedAlgebra<f64>> {
    let alg = algebra_from(&d.blocks, d.labels.as_ref())?;
    let mult = d.multiplicities.clone().unwrap_or_else(|| vec![1; d.blocks.len()]);
    match &d.unitary {
        Some(u) => RepresentedAlgebra::with_unitary(alg, mult, matrix_from_doc(u)?, tol),
        None => RepresentedAlgebra::new(alg, mult),
    }
}

pub fn rep_to_doc(r: &RepresentedAlgebra<f64>) -> RepDoc {
    let u = r.block_unitary();
    let identity = crate::linalg::max_abs_diff(u, &crate::linalg::eye(u.nrows())) == 0.0;
    RepDoc {
        blocks: r.algebra().blocks().to_vec(),
        labels: r.algebra().labels().map(|l| l.to_vec()),
        multiplicities: Some(r.multiplicities().to_vec()),
        unitary: (!identity).then(|| matrix_to_doc(u)),
    }
}

pub fn relation_from_doc(d: &RelationDoc, tol: f64) -> Result<QuantumRelation<f64>> {
    let source = rep_from_doc(&d.source, tol)?;
    let target = rep_from_doc(&d.target, tol)?;
    let gens = d.generators.iter().map(matrix_from_doc).collect::<Result<Vec<_>>>()?;
    if gens.is_empty() {
        let space = OperatorSubspace::zero(target.hilbert_dim(), source.hilbert_dim(), tol);
        return QuantumRelation::from_space(source, target, space, false);
    }
    QuantumRelation::new(source, target, &gens, d.close, tol)
}

pub fn relation_to_doc(v: &QuantumRelation<f64>) -> RelationDoc {
    RelationDoc {
        source: rep_to_doc(v.source()),
        target: rep_to_doc(v.target()),
        generators: v.space().onb().iter().map(matrix_to_doc).collect(),
        close: false,
    }
}

pub fn cpmap_from_doc(d: &MapDoc, tol: f64) -> Result<CpMap<f64>> {
    let source = rep_from_doc(&d.source, tol)?;
    let target = rep_from_doc(&d.target, tol)?;
    match (&d.action, &d.kraus) {
        (Some(a), None) => CpMap::new(source, target, matrix_from_doc(a)?, tol),
        (None, Some(ks)) => {
            let ks = ks.iter().map(matrix_from_doc).collect::<Result<Vec<_>>>()?;
            CpMap::from_kraus(source, target, &ks, tol)
        }
        _ => Err(invalid("a map needs exactly one of `action` or `kraus`")),
    }
}

pub fn cpmap_to_doc(t: &CpMap<f64>) -> MapDoc {
    MapDoc {
        source: rep_to_doc(t.source()),
        target: rep_to_doc(t.target()),
        action: Some(matrix_to_doc(t.action())),
        kraus: None,
    }
}

pub fn hom_from_doc(d: &MapDoc, tol: f64) -> Result<Hom<f64>> {
    Hom::new(cpmap_from_doc(d, tol)?)
}

pub fn state_from_doc(d: &StateDoc) -> Result<Functional<f64>> {
    let alg = MultiMatrixAlgebra::new(d.blocks.clone())?;
    match &d.state {
        StateSpec::MarkovTrace => Ok(Functional::markov(alg)),
        StateSpec::Densities { densities } => {
            Functional::new(alg, densities.iter().map(matrix_from_doc).collect::<Result<Vec<_>>>()?)
        }
    }
}

pub fn element_from_doc(d: &ElementDoc, alg: &MultiMatrixAlgebra) -> Result<Element<f64>> {
    let x = Element { blocks: d.iter().map(matrix_from_doc).collect::<Result<Vec<_>>>()? };
    alg.check(&x)?;
    Ok(x)
}

pub fn element_to_doc(x: &Element<f64>) -> ElementDoc {
    x.blocks.iter().map(matrix_to_doc).collect()
}

pub fn state_to_doc(f: &Functional<f64>) -> StateDoc {
    StateDoc {
        blocks: f.algebra().blocks().to_vec(),
        state: if f.is_markov_trace() {
            StateSpec::MarkovTrace
        } else {
            StateSpec::Densities { densities: f.densities().iter().map(matrix_to_doc).collect() }
        },
    }
}

pub fn adjacency_from_doc(d: &AdjacencyDoc) -> Result<GnsOperator<f64>> {
    let source = GnsSpace::new(state_from_doc(&d.source_state)?);
    let target = GnsSpace::new(state_from_doc(&d.target_state)?);
    GnsOperator::new(source, target, matrix_from_doc(&d.gns_matrix)?)
}

pub fn adjacency_to_doc(a: &GnsOperator<f64>) -> AdjacencyDoc {
    AdjacencyDoc {
        gns_matrix: matrix_to_doc(a.matrix()),
        source_state: state_to_doc(a.source().functional()),
        target_state: state_to_doc(a.target().functional()),
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        invalid(e.to_string())
    }
}
