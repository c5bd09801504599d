use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use thiserror::Error;

use qmt_core::json::{round_sig, EvidenceFile};
use qmt_core::markov_tree::{validate_markov, MarkovCheck, MarkovTree, MarkovViolation};
use qmt_core::oracle::check_marginals;
use qmt_core::{Engine, Error, MassFunction, Network};

use crate::model::ModelDocument;
use crate::output::{marginal_json, to_canonical_json};

/// Failures mapped onto the exit-code contract.
#[derive(Debug, Error)]
pub enum CommandError {
    #[error("{0}")]
    Input(String),
    #[error("not a qualitative Markov tree")]
    Markov(Box<MarkovViolation>),
    #[error("{0}")]
    Conflict(Error),
}

impl CommandError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Input(_) => 1,
            CommandError::Markov(_) => 2,
            CommandError::Conflict(_) => 3,
        }
    }
}

impl From<Error> for CommandError {
    fn from(e: Error) -> CommandError {
        match e {
            Error::MarkovViolation(v) => CommandError::Markov(v),
            e if e.is_total_conflict() => CommandError::Conflict(e),
            e => CommandError::Input(e.to_string()),
        }
    }
}

/// Exit code plus what to print on stdout and stderr.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Outcome {
        Outcome { code: 0, stdout, stderr: String::new() }
    }
}

impl From<CommandError> for Outcome {
    fn from(e: CommandError) -> Outcome {
        let stdout = match &e {
            CommandError::Markov(v) => to_canonical_json(&violation_json(v)),
            _ => String::new(),
        };
        Outcome { code: e.exit_code(), stdout, stderr: format!("error: {e}\n") }
    }
}

fn violation_json(v: &MarkovViolation) -> Value {
    json!({
        "markov": false,
        "node": v.node,
        "components": v.components,
        "witness": { "given_block": v.given_block, "selection": v.selection },
    })
}

fn read(path: &Path) -> Result<String, CommandError> {
    fs::read_to_string(path)
        .map_err(|e| CommandError::Input(format!("cannot read {}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<(ModelDocument, Network), CommandError> {
    let doc = ModelDocument::parse(&read(path)?)
        .map_err(|e| CommandError::Input(format!("{}: {e}", path.display())))?;
    let net = doc.network()?;
    Ok((doc, net))
}

fn load_evidence(
    doc: &ModelDocument,
    net: &Network,
    paths: &[PathBuf],
) -> Result<Vec<(String, MassFunction)>, CommandError> {
    let mut items = doc.evidence_items(net)?;
    for path in paths {
        let file: EvidenceFile = serde_json::from_str(&read(path)?)
            .map_err(|e| CommandError::Input(format!("{}: {e}", path.display())))?;
        for d in file.into_items() {
            items.push((d.node.clone(), d.to_mass(net)?));
        }
    }
    Ok(items)
}

fn build_engine(
    net: Network,
    items: Vec<(String, MassFunction)>,
    check: MarkovCheck,
) -> Result<Engine, CommandError> {
    let mut engine = Engine::new(MarkovTree::new(net, check)?);
    for (node, m) in items {
        engine.enter_evidence(&node, m)?;
    }
    Ok(engine)
}

pub fn validate(model: &Path) -> Outcome {
    let run = || -> Result<Outcome, CommandError> {
        let (_, net) = load_model(model)?;
        let report = validate_markov(&net)?;
        match report.violation {
            Some(v) => Err(CommandError::Markov(Box::new(v))),
            None => Ok(Outcome::ok(to_canonical_json(&json!({
                "markov": true,
                "nodes": net.len(),
                "edges": net.edges().len(),
            })))),
        }
    };
    run().unwrap_or_else(Outcome::from)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Batch,
    Concurrent { seed: u64 },
}

#[derive(Debug, Clone)]
pub struct PropagateArgs {
    pub model: PathBuf,
    pub evidence: Vec<PathBuf>,
    /// `None` prints every node.
    pub node: Option<String>,
    pub trace: Option<PathBuf>,
    pub skip_markov_check: bool,
    pub mode: Mode,
}

pub fn propagate(args: &PropagateArgs) -> Outcome {
    let run = || -> Result<Outcome, CommandError> {
        let (doc, net) = load_model(&args.model)?;
        if let Some(n) = &args.node {
            net.index_of(n)?;
        }
        let items = load_evidence(&doc, &net, &args.evidence)?;
        let check = if args.skip_markov_check { MarkovCheck::Skip } else { MarkovCheck::Validate };
        let mut engine = build_engine(net, items, check)?;
        let log = match args.mode {
            Mode::Batch => engine.propagate_batch()?,
            Mode::Concurrent { seed } => engine.propagate_concurrent(seed)?,
        };
        if let Some(path) = &args.trace {
            fs::write(path, log.to_json_lines()).map_err(|e| {
                CommandError::Input(format!("cannot write {}: {e}", path.display()))
            })?;
        }
        let mut marginals = BTreeMap::new();
        for m in engine.marginals()? {
            if args.node.as_ref().is_none_or(|n| *n == m.node) {
                marginals.insert(m.node.clone(), marginal_json(&m));
            }
        }
        Ok(Outcome::ok(to_canonical_json(&json!({ "marginals": marginals }))))
    };
    run().unwrap_or_else(Outcome::from)
}

#[derive(Debug, Clone)]
pub struct OracleArgs {
    pub model: PathBuf,
    pub evidence: Vec<PathBuf>,
    pub tol: f64,
    pub max_frame: usize,
}

pub fn oracle_check(args: &OracleArgs) -> Outcome {
    let run = || -> Result<Outcome, CommandError> {
        if !(args.tol >= 0.0 && args.tol.is_finite()) {
            return Err(CommandError::Input(format!("tolerance must be a finite number >= 0, got {}", args.tol)));
        }
        let (doc, net) = load_model(&args.model)?;
        let size = net.frame().len();
        if size > args.max_frame {
            return Err(Error::FrameTooLarge { size, max: args.max_frame }.into());
        }
        let items = load_evidence(&doc, &net, &args.evidence)?;
        let mut engine = build_engine(net, items, MarkovCheck::Validate)?;
        let report = check_marginals(&mut engine, args.tol, args.max_frame)?;
        let deviations: BTreeMap<&String, f64> =
            report.deviations.iter().map(|(k, &v)| (k, round_sig(v))).collect();
        let body = to_canonical_json(&json!({
            "deviations": deviations,
            "max_deviation": round_sig(report.max_deviation),
            "tol": args.tol,
            "pass": report.pass,
        }));
        Ok(Outcome { code: if report.pass { 0 } else { 4 }, stdout: body, stderr: String::new() })
    };
    run().unwrap_or_else(Outcome::from)
}
