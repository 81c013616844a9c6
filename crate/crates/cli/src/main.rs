use clap::{Args, Parser, Subcommand, ValueEnum};
use qrelkit::adjacency::{self, GnsOperator};
use qrelkit::cpmap::{self, CpMap};
use qrelkit::doc::{self, ChannelDoc, Document, ElementDoc, Kind, MapDoc, RelationDoc, ReportDoc, StateDoc};
use qrelkit::error::{Error, Result};
use qrelkit::mvnalg::{Functional, GnsSpace, MultiMatrixAlgebra, RepresentedAlgebra};
use qrelkit::qfunc::Hom;
use qrelkit::qrel::QuantumRelation;
use qrelkit::report::Claim;
use qrelkit::verify::{self, SuiteConfig};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const DEFAULT_TOL: f64 = 1e-9;

/// Quantum relations between finite-dimensional von Neumann algebras.
///
/// Every command reads JSON documents (`-` for stdin) and writes a single
/// report document.
#[derive(Parser)]
#[command(name = "qrelkit", version)]
struct Cli {
    /// Numerical tolerance. For `verify` it replaces the per-suite pass thresholds.
    #[arg(long, global = true, env = "QRELKIT_TOL")]
    tol: Option<f64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect and combine quantum relations.
    #[command(subcommand)]
    Relation(RelationCmd),
    /// Convert between *-homomorphisms and quantum functions.
    #[command(subcommand)]
    Hom(HomCmd),
    /// Relations induced by completely positive maps.
    #[command(subcommand)]
    Cp(CpCmd),
    /// Quantum adjacency operators on GNS spaces.
    #[command(subcommand)]
    Adjacency(AdjacencyCmd),
    /// Build CP maps realizing a quantum graph.
    #[command(subcommand)]
    Construct(ConstructCmd),
    /// Import and export classical channels and relations.
    #[command(subcommand)]
    Classical(ClassicalCmd),
    /// Run the randomized verification suites.
    Verify(VerifyArgs),
}

#[derive(Subcommand)]
enum RelationCmd {
    /// Structural flags, dimension and bimodule residual.
    Check { relation: PathBuf },
    /// `outer ∘ inner`.
    Compose { outer: PathBuf, inner: PathBuf },
    /// Adjoint relation `V*`.
    Adjoint { relation: PathBuf },
}

#[derive(Subcommand)]
enum HomCmd {
    /// Quantum function `V^θ` of a *-homomorphism.
    ToRelation { hom: PathBuf },
    /// Recover the hom of a quantum function.
    FromRelation { relation: PathBuf },
}

#[derive(Subcommand)]
enum CpCmd {
    /// Relation `V^θ` of a CP map.
    ToRelation { map: PathBuf },
    /// Confusability graph `V^{θ*} ∘ V^θ`.
    Confusability { map: PathBuf },
    /// Pull a relation back along two CP maps into its source and target.
    Pullback { relation: PathBuf, theta_source: PathBuf, theta_target: PathBuf },
}

#[derive(Args)]
struct States {
    /// Algebra document with a state on the source algebra (Markov trace when absent).
    #[arg(long)]
    source_state: Option<PathBuf>,
    /// Algebra document with a state on the target algebra.
    #[arg(long)]
    target_state: Option<PathBuf>,
}

#[derive(Subcommand)]
enum AdjacencyCmd {
    /// Adjacency operator of a relation between GNS spaces.
    OfRelation {
        relation: PathBuf,
        #[command(flatten)]
        states: States,
    },
    /// Adjacency operator of a *-homomorphism.
    OfHom {
        hom: PathBuf,
        #[command(flatten)]
        states: States,
    },
    /// CP, real and Schur-idempotent flags; the relation when it is one.
    Classify { adjacency: PathBuf },
}

#[derive(Subcommand)]
enum ConstructCmd {
    /// UCP map whose confusability graph is a given quantum graph.
    Verdon { relation: PathBuf },
    /// CP map realising a symmetric relation; `x0` is searched for when not given.
    QgFromCp {
        relation: PathBuf,
        /// JSON array of the blocks of x0.
        #[arg(long)]
        x0: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ClassicalCmd {
    /// Channel document (`p` or `pairs`) to a relation.
    Import { channel: PathBuf },
    /// Relation between commutative algebras to a channel document of pairs.
    Export { relation: PathBuf },
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite name, or `all`.
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Trials per suite; defaults to each suite's own count.
    #[arg(long)]
    trials: Option<usize>,
    /// Index of the first trial, for rerunning a reported failure.
    #[arg(long, default_value_t = 0)]
    first: usize,
    /// Largest block size of random algebras (1..=3).
    #[arg(long, default_value_t = 3)]
    max_block: usize,
}

struct Outcome {
    report: ReportDoc,
    code: u8,
}

fn read_text(path: &Path) -> Result<String> {
    let res = if path == Path::new("-") {
        std::io::read_to_string(std::io::stdin())
    } else {
        std::fs::read_to_string(path)
    };
    res.map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))
}

fn read_doc(path: &Path) -> Result<Document> {
    doc::parse(&read_text(path)?).map_err(|e| match e {
        Error::Invalid(m) => Error::Invalid(format!("{}: {m}", path.display())),
        e => e,
    })
}

fn read_relation(path: &Path, tol: f64) -> Result<QuantumRelation<f64>> {
    doc::relation_from_doc(&read_doc(path)?.payload::<RelationDoc>(Kind::Relation)?, tol)
}

fn read_cpmap(path: &Path, tol: f64) -> Result<CpMap<f64>> {
    doc::cpmap_from_doc(&read_doc(path)?.payload::<MapDoc>(Kind::Cpmap)?, tol)
}

fn read_hom(path: &Path, tol: f64) -> Result<Hom<f64>> {
    doc::hom_from_doc(&read_doc(path)?.payload::<MapDoc>(Kind::Hom)?, tol)
}

fn read_state(path: Option<&PathBuf>, alg: &MultiMatrixAlgebra) -> Result<Functional<f64>> {
    let Some(path) = path else {
        return Ok(Functional::markov(alg.clone()));
    };
    let f = doc::state_from_doc(&read_doc(path)?.payload::<StateDoc>(Kind::Algebra)?)?;
    if f.algebra() != alg {
        return Err(Error::Shape(format!("state in {} is on blocks {:?}, expected {:?}", path.display(), f.algebra().blocks(), alg.blocks())));
    }
    Ok(f)
}

fn relation_doc(v: &QuantumRelation<f64>) -> Document {
    Document::new(Kind::Relation, &doc::relation_to_doc(v))
}

fn success(claims: Vec<Claim>, data: Option<serde_json::Value>, result: Option<Document>) -> Result<(ReportDoc, u8)> {
    Ok((ReportDoc { command: String::new(), ok: true, claims, data, result, error: None }, 0))
}

fn flags_json(v: &QuantumRelation<f64>) -> serde_json::Value {
    json!({ "dim": v.dim(), "flags": v.properties() })
}

fn relation_cmd(cmd: &RelationCmd, tol: f64) -> Result<(ReportDoc, u8)> {
    match cmd {
        RelationCmd::Check { relation } => {
            let v = read_relation(relation, tol)?;
            let mut data = flags_json(&v);
            // The realisability probe only applies to full-matrix targets.
            if let Ok(p) = cpmap::ucp_realizable_relation(&v) {
                data["ucp_realizable"] = json!({
                    "realizable": p.realizable,
                    "best_min_eigenvalue": p.best_min_eigenvalue,
                    "free_parameters": p.free_parameters,
                    "consistent": p.consistent,
                });
            }
            success(vec![Claim::scalar("V is an M′-N′ bimodule", v.bimodule_residual())], Some(data), None)
        }
        RelationCmd::Compose { outer, inner } => {
            let v = read_relation(outer, tol)?.compose(&read_relation(inner, tol)?)?;
            success(vec![], Some(flags_json(&v)), Some(relation_doc(&v)))
        }
        RelationCmd::Adjoint { relation } => {
            let v = read_relation(relation, tol)?.adjoint();
            success(vec![], Some(flags_json(&v)), Some(relation_doc(&v)))
        }
    }
}

fn hom_cmd(cmd: &HomCmd, tol: f64) -> Result<(ReportDoc, u8)> {
    match cmd {
        HomCmd::ToRelation { hom } => {
            let h = read_hom(hom, tol)?;
            let v = h.relation()?;
            success(h.property_dictionary(&v)?, Some(flags_json(&v)), Some(relation_doc(&v)))
        }
        HomCmd::FromRelation { relation } => {
            let v = read_relation(relation, tol)?;
            let (h, res) = Hom::from_relation(&v)?;
            let claims = vec![Claim::scalar("recovered hom reproduces V", res)];
            success(claims, None, Some(Document::new(Kind::Hom, &doc::cpmap_to_doc(h.map()))))
        }
    }
}

fn cp_cmd(cmd: &CpCmd, tol: f64) -> Result<(ReportDoc, u8)> {
    match cmd {
        CpCmd::ToRelation { map } => {
            let t = read_cpmap(map, tol)?;
            let v = t.relation()?;
            success(vec![], Some(json!({ "map": t.flags(), "dim": v.dim(), "flags": v.properties() })), Some(relation_doc(&v)))
        }
        CpCmd::Confusability { map } => {
            let g = read_cpmap(map, tol)?.confusability_graph()?;
            success(vec![], Some(flags_json(&g)), Some(relation_doc(&g)))
        }
        CpCmd::Pullback { relation, theta_source, theta_target } => {
            let v = read_relation(relation, tol)?;
            let (tm, tn) = (read_cpmap(theta_source, tol)?, read_cpmap(theta_target, tol)?);
            let p = cpmap::pullback(&v, &tm, &tn)?;
            let d = cpmap::pullback_by_dilation(&v, &tm, &tn)?;
            let claims = vec![Claim::subspaces("composition formula = dilation formula", p.space(), &d)];
            success(claims, Some(flags_json(&p)), Some(relation_doc(&p)))
        }
    }
}

fn adjacency_doc(a: &GnsOperator<f64>) -> Document {
    Document::new(Kind::Adjacency, &doc::adjacency_to_doc(a))
}

fn adjacency_cmd(cmd: &AdjacencyCmd, tol: f64) -> Result<(ReportDoc, u8)> {
    match cmd {
        AdjacencyCmd::OfRelation { relation, states } => {
            let v = read_relation(relation, tol)?;
            let src = GnsSpace::new(read_state(states.source_state.as_ref(), v.source().algebra())?);
            let tgt = GnsSpace::new(read_state(states.target_state.as_ref(), v.target().algebra())?);
            let a = adjacency::adjacency_of_relation(&v, &src, &tgt)?;
            let flags = adjacency::classify(&a, tol)?;
            success(vec![], Some(json!({ "flags": flags })), Some(adjacency_doc(&a)))
        }
        AdjacencyCmd::OfHom { hom, states } => {
            let h = read_hom(hom, tol)?;
            let phi_n = read_state(states.source_state.as_ref(), h.source().algebra())?;
            let phi_m = read_state(states.target_state.as_ref(), h.target().algebra())?;
            let (a, data) = adjacency::adjacency_of_hom(&h, &phi_m, &phi_n, tol)?;
            let u = doc::element_to_doc(&data.u);
            success(data.claims, Some(json!({ "u": u })), Some(adjacency_doc(&a)))
        }
        AdjacencyCmd::Classify { adjacency: path } => {
            let a = doc::adjacency_from_doc(&read_doc(path)?.payload(Kind::Adjacency)?)?;
            let flags = adjacency::classify(&a, tol)?;
            let mut data = json!({ "flags": flags });
            let mut result = None;
            if flags.psi_projection {
                let c = adjacency::coinjectivity_criterion(&a, tol)?;
                data["coinjective"] = json!(c.coinjective);
                data["state_preserving"] = json!(adjacency::state_preservation_check(&a, tol)?);
                result = Some(relation_doc(&adjacency::relation_of_positive(&adjacency::psi_prime(&a), tol)?));
            }
            success(vec![], Some(data), result)
        }
    }
}

fn construct_cmd(cmd: &ConstructCmd, tol: f64) -> Result<(ReportDoc, u8)> {
    let map_doc = |t: &CpMap<f64>| Some(Document::new(Kind::Cpmap, &doc::cpmap_to_doc(t)));
    match cmd {
        ConstructCmd::Verdon { relation } => {
            let (t, claims) = adjacency::verdon_construct(&read_relation(relation, tol)?)?;
            success(claims, Some(json!({ "map": t.flags() })), map_doc(&t))
        }
        ConstructCmd::QgFromCp { relation, x0 } => {
            let s = read_relation(relation, tol)?;
            let x0 = match x0 {
                Some(p) => {
                    let d: ElementDoc = serde_json::from_str(&read_text(p)?)
                        .map_err(|e| Error::Invalid(format!("{}: bad x0: {e}", p.display())))?;
                    doc::element_from_doc(&d, s.source().algebra())?
                }
                None => adjacency::find_x0(&s)?
                    .ok_or_else(|| Error::Precondition("no x0 found; supply one with --x0".into()))?,
            };
            let (t, claims) = adjacency::qg_from_cp_construct(&s, &x0)?;
            success(claims, Some(json!({ "map": t.flags(), "x0": doc::element_to_doc(&x0) })), map_doc(&t))
        }
    }
}

fn classical_cmd(cmd: &ClassicalCmd, tol: f64) -> Result<(ReportDoc, u8)> {
    match cmd {
        ClassicalCmd::Import { channel } => {
            let c: ChannelDoc = read_doc(channel)?.payload(Kind::Channel)?;
            let v = match (&c.p, &c.pairs) {
                (Some(p), None) => CpMap::classical_channel(p, tol)?.relation()?,
                (None, Some(pairs)) => {
                    let (Some(nx), Some(ny)) = (c.inputs, c.outputs) else {
                        return Err(Error::Invalid("pairs need inputs and outputs".into()));
                    };
                    let rep = |k| RepresentedAlgebra::standard(MultiMatrixAlgebra::diagonal(k));
                    let pairs: Vec<(usize, usize)> = pairs.iter().map(|&[y, x]| (y, x)).collect();
                    QuantumRelation::from_classical(&rep(nx), &rep(ny), &pairs, tol)?
                }
                _ => return Err(Error::Invalid("channel needs exactly one of p and pairs".into())),
            };
            let pairs = v.to_classical()?;
            success(vec![], Some(json!({ "pairs": pairs, "flags": v.properties() })), Some(relation_doc(&v)))
        }
        ClassicalCmd::Export { relation } => {
            let v = read_relation(relation, tol)?;
            let pairs = v.to_classical()?;
            let c = ChannelDoc {
                inputs: Some(v.source().algebra().num_blocks()),
                outputs: Some(v.target().algebra().num_blocks()),
                pairs: Some(pairs.iter().map(|&(y, x)| [y, x]).collect()),
                ..Default::default()
            };
            success(vec![], None, Some(Document::new(Kind::Channel, &c)))
        }
    }
}

fn verify_cmd(args: &VerifyArgs, tol: Option<f64>) -> Result<(ReportDoc, u8)> {
    let config = SuiteConfig {
        suite: args.suite.clone(),
        seed: args.seed,
        trials: args.trials,
        first: args.first,
        tol,
        max_block: args.max_block,
    };
    let report = verify::verify(&config)?;
    for r in report.reproducers() {
        eprintln!("failed: {r}");
    }
    let claims = report
        .suites
        .iter()
        .map(|s| Claim::new(format!("suite {}", s.suite), s.trials, s.trials - s.failures.len(), s.worst))
        .collect();
    let code = if report.passed { 0 } else if report.internal_error() { 2 } else { 1 };
    let data = serde_json::to_value(&report).expect("reports serialize");
    Ok((ReportDoc { command: String::new(), ok: report.passed, claims, data: Some(data), result: None, error: None }, code))
}

fn command_name(cmd: &Command) -> String {
    let (group, sub) = match cmd {
        Command::Relation(c) => ("relation", match c {
            RelationCmd::Check { .. } => "check",
            RelationCmd::Compose { .. } => "compose",
            RelationCmd::Adjoint { .. } => "adjoint",
        }),
        Command::Hom(c) => ("hom", match c {
            HomCmd::ToRelation { .. } => "to-relation",
            HomCmd::FromRelation { .. } => "from-relation",
        }),
        Command::Cp(c) => ("cp", match c {
            CpCmd::ToRelation { .. } => "to-relation",
            CpCmd::Confusability { .. } => "confusability",
            CpCmd::Pullback { .. } => "pullback",
        }),
        Command::Adjacency(c) => ("adjacency", match c {
            AdjacencyCmd::OfRelation { .. } => "of-relation",
            AdjacencyCmd::OfHom { .. } => "of-hom",
            AdjacencyCmd::Classify { .. } => "classify",
        }),
        Command::Construct(c) => ("construct", match c {
            ConstructCmd::Verdon { .. } => "verdon",
            ConstructCmd::QgFromCp { .. } => "qg-from-cp",
        }),
        Command::Classical(c) => ("classical", match c {
            ClassicalCmd::Import { .. } => "import",
            ClassicalCmd::Export { .. } => "export",
        }),
        Command::Verify(_) => return "verify".into(),
    };
    format!("{group} {sub}")
}

fn dispatch(cli: &Cli) -> Outcome {
    let name = command_name(&cli.command);
    let run = || -> Result<(ReportDoc, u8)> {
        if let Some(t) = cli.tol {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::Invalid(format!("tolerance must be positive and finite, got {t}")));
            }
        }
        let tol = cli.tol.unwrap_or(DEFAULT_TOL);
        match &cli.command {
            Command::Relation(c) => relation_cmd(c, tol),
            Command::Hom(c) => hom_cmd(c, tol),
            Command::Cp(c) => cp_cmd(c, tol),
            Command::Adjacency(c) => adjacency_cmd(c, tol),
            Command::Construct(c) => construct_cmd(c, tol),
            Command::Classical(c) => classical_cmd(c, tol),
            Command::Verify(a) => verify_cmd(a, cli.tol),
        }
    };
    match run() {
        Ok((mut report, code)) => {
            report.command = name;
            Outcome { report, code }
        }
        Err(e) => Outcome {
            code: if e.is_validation() { 1 } else { 2 },
            report: ReportDoc { command: name, ok: false, claims: vec![], data: None, result: None, error: Some(e.to_string()) },
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let Outcome { report, code } = dispatch(&cli);
    let text = doc::emit(&Document::new(Kind::Report, &report)) + "\n";
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("cannot write {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => print!("{text}"),
    }
    if let Some(e) = &report.error {
        eprintln!("error: {e}");
    }
    ExitCode::from(code)
}
