use std::ffi::OsString;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use datavalor::anp::{DeriveOptions, JudgementSet, PriorityMethod, DEFAULT_CR_THRESHOLD};
use datavalor::catalog::MetricCatalog;
use datavalor::normalization::normalize;
use datavalor::scenario::{parse_json, result_json, Observation, Overrides, ValuationScenario};
use datavalor::screening::{start_session, AnswerLog, DecisionTree, Stage};
use datavalor::{Error, Result};

use crate::error::exit_code;
use crate::http::{self, Config, DEFAULT_ADDR};
use crate::ops;

#[derive(Debug, Parser)]
#[command(name = "datavalor", version, about = "Dataset valuation engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Eigenvector,
    GeometricMean,
}

impl From<Method> for PriorityMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Eigenvector => PriorityMethod::Eigenvector,
            Method::GeometricMean => PriorityMethod::GeometricMean,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Walk a screening tree and print its recommendations. Answers come
    /// from --answers or, without it, interactively from stdin.
    Screen {
        /// Built-in tree id (step1, step2) or path to a tree file.
        #[arg(long, default_value = "step1")]
        tree: String,
        /// Answer log: {"answers": [{"question_id", "answer_label"}, ...]}.
        #[arg(long)]
        answers: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Normalize observations: {"observations": [{"metric_id", "raw", "rule"}, ...]}.
    Normalize {
        #[arg(long)]
        observations: PathBuf,
        /// Catalog the metric ids are checked against.
        #[arg(long, env = "DATAVALOR_CATALOG")]
        catalog: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Derive metric weights and consistency ratios from pairwise judgements.
    Weigh {
        #[arg(long)]
        judgements: PathBuf,
        #[arg(long, value_enum, default_value = "eigenvector")]
        method: Method,
        #[arg(long, default_value_t = DEFAULT_CR_THRESHOLD)]
        cr_threshold: f64,
        /// Keep going when a matrix exceeds the threshold.
        #[arg(long)]
        allow_inconsistent: bool,
        /// Metric id that must receive a weight; repeatable.
        #[arg(long = "require")]
        required: Vec<String>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Value one candidate of a scenario.
    Value {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        candidate: String,
        /// Use the scenario's printed reference values where given.
        #[arg(long)]
        paper_compat: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Value and rank every candidate of a scenario.
    Compare {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        paper_compat: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Value a candidate before and after a set of overrides.
    WhatIf {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        candidate: String,
        #[arg(long)]
        overrides: PathBuf,
        #[arg(long)]
        paper_compat: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Start the HTTP service.
    Serve {
        #[arg(long, env = "DATAVALOR_ADDR", default_value = DEFAULT_ADDR)]
        addr: String,
        /// Directory for stored scenarios; in-memory when absent.
        #[arg(long, env = "DATAVALOR_STORE_DIR")]
        store_dir: Option<PathBuf>,
        #[arg(long, env = "DATAVALOR_CATALOG")]
        catalog: Option<PathBuf>,
        /// Extra decision tree file; repeatable.
        #[arg(long)]
        tree: Vec<PathBuf>,
        /// Idle seconds before a screening session is dropped.
        #[arg(long, default_value_t = 1800)]
        session_idle: u64,
    },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())).into())
}

fn load_tree(spec: &str) -> Result<DecisionTree> {
    match DecisionTree::builtin(spec) {
        Some(t) => Ok(t),
        None => DecisionTree::from_json(&read(Path::new(spec))?),
    }
}

fn emit(out: &mut dyn Write, path: Option<&Path>, json: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, json)?,
        None => out.write_all(json.as_bytes())?,
    }
    Ok(())
}

/// Ask each question on `err` and read labels from `input` until the tree ends.
fn interactive(
    tree: &DecisionTree,
    input: &mut dyn BufRead,
    err: &mut dyn Write,
) -> Result<datavalor::screening::ScreeningSession> {
    let mut session = start_session(tree)?;
    while let Some(q) = session.current_question(tree) {
        writeln!(err, "{} [{}]", q.text, q.labels().join("/"))?;
        let mut line = String::new();
        if input.read_line(&mut line)? == 0 {
            return Err(Error::Incomplete);
        }
        match session.answer(tree, &q.id, line.trim()) {
            Ok(next) => session = next,
            Err(e) => writeln!(err, "{e}")?,
        }
    }
    Ok(session)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ObservationFile {
    observations: Vec<Observation>,
}

fn execute(
    command: Command,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<()> {
    match command {
        Command::Screen {
            tree,
            answers,
            output,
        } => {
            let tree = load_tree(&tree)?;
            let session = match answers {
                Some(p) => AnswerLog::from_json(&read(&p)?)?.replay(&tree)?,
                None => interactive(&tree, input, err)?,
            };
            let json = match tree.stage {
                Stage::StepII => result_json(&session.classify_purpose(&tree)?),
                Stage::StepI => result_json(&session.recommendations(&tree)?),
            };
            emit(out, output.as_deref(), &json)
        }
        Command::Normalize {
            observations,
            catalog,
            output,
        } => {
            let file: ObservationFile = parse_json(&read(&observations)?)?;
            let catalog = match catalog {
                Some(p) => MetricCatalog::load(p)?,
                None => MetricCatalog::default_catalog(),
            };
            let mut normalized = Vec::new();
            for (i, o) in file.observations.iter().enumerate() {
                if catalog.get(&o.metric_id).is_none() {
                    writeln!(err, "warning: {} is not in catalog {}", o.metric_id, catalog.version)?;
                }
                normalized.push(normalize(&o.metric(), &o.rule).map_err(|e| e.at(format!("/observations/{i}")))?);
            }
            emit(out, output.as_deref(), &result_json(&normalized))
        }
        Command::Weigh {
            judgements,
            method,
            cr_threshold,
            allow_inconsistent,
            required,
            output,
        } => {
            let set = JudgementSet::from_json(&read(&judgements)?)?;
            let opts = DeriveOptions {
                method: method.into(),
                cr_threshold,
                allow_inconsistent,
                required,
            };
            emit(out, output.as_deref(), &ops::weigh(&set, &opts)?)
        }
        Command::Value {
            scenario,
            candidate,
            paper_compat,
            output,
        } => {
            let s = ValuationScenario::from_json(&read(&scenario)?)?;
            let json = ops::value(&s, &candidate, paper_compat.then_some(true))?;
            emit(out, output.as_deref(), &json)
        }
        Command::Compare {
            scenario,
            paper_compat,
            output,
        } => {
            let s = ValuationScenario::from_json(&read(&scenario)?)?;
            emit(out, output.as_deref(), &ops::comparison(&s, paper_compat.then_some(true))?)
        }
        Command::WhatIf {
            scenario,
            candidate,
            overrides,
            paper_compat,
            output,
        } => {
            let s = ValuationScenario::from_json(&read(&scenario)?)?;
            let o = Overrides::from_json(&read(&overrides)?)?;
            let json = ops::what_if_report(&s, &candidate, &o, paper_compat.then_some(true))?;
            emit(out, output.as_deref(), &json)
        }
        Command::Serve {
            addr,
            store_dir,
            catalog,
            tree,
            session_idle,
        } => {
            let config = Config {
                addr,
                store_dir,
                catalog,
                trees: tree,
                session_idle: Duration::from_secs(session_idle),
            };
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(http::serve(config))
        }
    }
}

/// Run the command line and return the process exit code.
pub fn run<I, T>(args: I, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    1
                }
            };
        }
    };
    match execute(cli.command, input, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(e.kind())
        }
    }
}
