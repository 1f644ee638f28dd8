//! Command-line front end: edge-file parsing, run orchestration, result
//! rendering.
//!
//! Similarity files hold `i k s` lines, association files `i j` lines,
//! whitespace separated, 0-based. Blank lines and lines starting with `#`
//! are skipped. Node counts are inferred from the largest index seen.

use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::ap::{ap_run, SolverConfig};
use crate::error::{Error, Result};
use crate::graph::{HetPotential, HeteroGraph};
use crate::h2mp::{h2mp_run, H2mpConfig};
use crate::objective::SolveResult;
use crate::oracle::{self, MAX_ENUM_IMAGES, MAX_ENUM_TAGS, MAX_VECTOR_NODES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Ap,
    H2mp,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "hetero-ap", version, about = "Exemplar clustering of images and tags")]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = Algorithm::H2mp)]
    pub algo: Algorithm,
    /// Image similarity edges (`i k s`).
    #[arg(long)]
    pub image_sims: PathBuf,
    /// Tag similarity edges (`j l s`).
    #[arg(long)]
    pub tag_sims: Option<PathBuf>,
    /// Image–tag association edges (`i j`).
    #[arg(long)]
    pub assoc: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub lambda_image: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub lambda_tag: f64,
    #[arg(long, default_value_t = -15.0, allow_negative_numbers = true)]
    pub theta: f64,
    #[arg(long, default_value_t = 0.5)]
    pub damping: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 10)]
    pub conv_window: usize,
    /// Result document path; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Check the run against the exhaustive and vector-message oracles.
    #[arg(long, alias = "verify")]
    pub verify_oracle: bool,
    /// Use the self-similarities from the input files as preferences.
    #[arg(long)]
    pub keep_user_diagonal: bool,
    /// Fill in visual and semantic exemplarness.
    #[arg(long)]
    pub emit_metrics: bool,
    /// Seed for a tiny similarity jitter that breaks exact ties.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// A validated run request.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub algo: Algorithm,
    pub image_sims: PathBuf,
    pub tag_sims: Option<PathBuf>,
    pub assoc: Option<PathBuf>,
    pub config: H2mpConfig,
    pub out: Option<PathBuf>,
    pub verify_oracle: bool,
    pub keep_user_diagonal: bool,
    pub emit_metrics: bool,
    pub seed: Option<u64>,
}

impl TryFrom<Cli> for RunSpec {
    type Error = Error;

    fn try_from(cli: Cli) -> Result<Self> {
        if cli.algo == Algorithm::H2mp && (cli.tag_sims.is_none() || cli.assoc.is_none()) {
            return Err(Error::Usage("--algo h2mp needs --tag-sims and --assoc".into()));
        }
        let config = H2mpConfig {
            solver: SolverConfig {
                damping: cli.damping,
                max_iter: cli.max_iter,
                conv_window: cli.conv_window,
            },
            lambda_image: cli.lambda_image,
            lambda_tag: cli.lambda_tag,
            theta: cli.theta,
        };
        config.solver.validate()?;
        if !(cli.theta.is_finite() && cli.theta <= 0.0) {
            return Err(Error::InvalidTheta(cli.theta));
        }
        Ok(Self {
            algo: cli.algo,
            image_sims: cli.image_sims,
            tag_sims: cli.tag_sims,
            assoc: cli.assoc,
            config,
            out: cli.out,
            verify_oracle: cli.verify_oracle,
            keep_user_diagonal: cli.keep_user_diagonal,
            emit_metrics: cli.emit_metrics,
            seed: cli.seed,
        })
    }
}

pub type SimilarityEdge = (usize, usize, f64);

fn parse_error(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn parse_index(field: &str, path: &Path, line: usize) -> Result<usize> {
    field.parse::<usize>().map_err(|_| {
        if field.parse::<i64>().is_ok() {
            parse_error(path, line, format!("negative index `{field}`"))
        } else {
            parse_error(path, line, format!("bad index `{field}`"))
        }
    })
}

/// Non-comment lines with their 1-based line numbers, split on whitespace.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(n, line)| {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            None
        } else {
            Some((n + 1, line.split_whitespace().collect()))
        }
    })
}

/// Parses similarity lines; `path` only labels errors.
pub fn parse_similarities(text: &str, path: &Path) -> Result<Vec<SimilarityEdge>> {
    data_lines(text)
        .map(|(line, fields)| {
            let [i, k, s] = fields[..] else {
                return Err(parse_error(path, line, format!("expected 3 fields, found {}", fields.len())));
            };
            let i = parse_index(i, path, line)?;
            let k = parse_index(k, path, line)?;
            let s: f64 = s
                .parse()
                .map_err(|_| parse_error(path, line, format!("bad similarity `{s}`")))?;
            if !s.is_finite() {
                return Err(parse_error(path, line, format!("non-finite similarity `{s}`")));
            }
            Ok((i, k, s))
        })
        .collect()
}

/// Parses association lines; `path` only labels errors.
pub fn parse_associations(text: &str, path: &Path) -> Result<Vec<(usize, usize)>> {
    data_lines(text)
        .map(|(line, fields)| {
            let [i, j] = fields[..] else {
                return Err(parse_error(path, line, format!("expected 2 fields, found {}", fields.len())));
            };
            Ok((parse_index(i, path, line)?, parse_index(j, path, line)?))
        })
        .collect()
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn parse_similarity_file(path: &Path) -> Result<Vec<SimilarityEdge>> {
    parse_similarities(&read(path)?, path)
}

pub fn parse_association_file(path: &Path) -> Result<Vec<(usize, usize)>> {
    parse_associations(&read(path)?, path)
}

/// Largest node index referenced by a similarity list.
pub fn max_similarity_index(edges: &[SimilarityEdge]) -> Option<usize> {
    edges.iter().map(|&(i, k, _)| i.max(k)).max()
}

/// Renders similarity edges in the input format; floats use the shortest
/// representation that parses back to the same value.
pub fn emit_similarities(edges: &[SimilarityEdge]) -> String {
    let mut out = String::new();
    for &(i, k, s) in edges {
        let _ = writeln!(out, "{i}\t{k}\t{s}");
    }
    out
}

pub fn emit_associations(pairs: &[(usize, usize)]) -> String {
    let mut out = String::new();
    for &(i, j) in pairs {
        let _ = writeln!(out, "{i}\t{j}");
    }
    out
}

/// Pretty JSON with every float written in fixed 17-significant-digit
/// scientific notation, so output bytes do not depend on float formatting
/// heuristics.
struct FixedFloats(PrettyFormatter<'static>);

macro_rules! forward {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(fn $name<W: ?Sized + io::Write>(&mut self, writer: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.0.$name(writer $(, $arg)*)
        })*
    };
}

impl Formatter for FixedFloats {
    forward! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        begin_object_value();
        end_object_value();
    }

    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// The result document: one JSON object with the [`SolveResult`] fields.
pub fn render_result(result: &SolveResult) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloats(PrettyFormatter::new()));
    result.serialize(&mut ser).expect("serializing to memory cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

/// Everything a run produced.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub result: SolveResult,
    pub document: String,
    pub summary: String,
}

fn load_graph(spec: &RunSpec) -> Result<HeteroGraph> {
    let image_edges = parse_similarity_file(&spec.image_sims)?;
    let tag_edges = match &spec.tag_sims {
        Some(p) => parse_similarity_file(p)?,
        None => Vec::new(),
    };
    let assoc = match &spec.assoc {
        Some(p) => parse_association_file(p)?,
        None => Vec::new(),
    };
    let count = |sims: Option<usize>, linked: Option<usize>| sims.max(linked).map_or(0, |x| x + 1);
    let n = count(max_similarity_index(&image_edges), assoc.iter().map(|&(i, _)| i).max());
    let m = count(max_similarity_index(&tag_edges), assoc.iter().map(|&(_, j)| j).max());
    let mut g = HeteroGraph::build(&image_edges, &tag_edges, &assoc, n, m)?;
    if !spec.keep_user_diagonal {
        g = g.set_preferences(spec.config.lambda_image, spec.config.lambda_tag)?;
    }
    g = g.scale_similarities()?;
    if let Some(seed) = spec.seed {
        g = g.perturb_ties(seed)?;
    }
    Ok(g)
}

fn verify(spec: &RunSpec, g: &HeteroGraph, pot: &HetPotential, result: &SolveResult, out: &mut String) -> Result<()> {
    let (n, m) = (g.n_images(), g.n_tags());
    if n <= MAX_ENUM_IMAGES && m <= MAX_ENUM_TAGS {
        let (best, breakdown) = oracle::brute_force_optimum(g, pot)?;
        let verdict = if best == result.labeling() {
            "same labeling"
        } else if breakdown.total == result.objective.total {
            "different labeling, same objective"
        } else {
            "suboptimal"
        };
        let _ = writeln!(
            out,
            "oracle: exhaustive optimum {:.12e}, solver {:.12e} ({verdict})",
            breakdown.total, result.objective.total
        );
    } else {
        let _ = writeln!(out, "oracle: exhaustive search skipped (limits n <= {MAX_ENUM_IMAGES}, m <= {MAX_ENUM_TAGS})");
    }
    if n <= MAX_VECTOR_NODES && m <= MAX_VECTOR_NODES {
        let iterations = result.iterations.clamp(1, 50);
        let report = oracle::lockstep(g, pot, spec.config.solver.damping, iterations)?;
        let _ = writeln!(
            out,
            "oracle: vector messages over {} iterations, max discrepancy {:.3e}, assignment mismatches {}",
            report.iterations, report.max_error, report.assignment_mismatches
        );
    } else {
        let _ = writeln!(out, "oracle: vector check skipped (limit {MAX_VECTOR_NODES} nodes per side)");
    }
    Ok(())
}

fn summarize(spec: &RunSpec, g: &HeteroGraph, r: &SolveResult) -> String {
    let mut s = String::new();
    let algo = match spec.algo {
        Algorithm::Ap => "ap",
        Algorithm::H2mp => "h2mp",
    };
    let _ = writeln!(s, "algorithm: {algo}");
    let _ = writeln!(
        s,
        "images: {} nodes, {} exemplars {:?}",
        g.n_images(),
        r.image_exemplars.len(),
        r.image_exemplars
    );
    let _ = writeln!(s, "tags: {} nodes, {} exemplars {:?}", g.n_tags(), r.tag_exemplars.len(), r.tag_exemplars);
    let o = &r.objective;
    let _ = writeln!(
        s,
        "objective: {:.6} (image fit {:.6}, tag fit {:.6}, hetero {:.6})",
        o.total, o.fit_image, o.fit_tag, o.hetero
    );
    let state = if r.converged { "converged" } else { "hit max-iter" };
    let _ = writeln!(s, "iterations: {} ({state})", r.iterations);
    if let Some(v) = r.visual_exemplarness {
        let _ = writeln!(s, "visual exemplarness: {v:.6}");
    }
    if let Some(v) = r.semantic_exemplarness {
        let _ = writeln!(s, "semantic exemplarness: {v:.6}");
    }
    s
}

/// Loads the inputs, solves, and renders the result. Writes nothing.
pub fn run(spec: &RunSpec) -> Result<RunOutcome> {
    let g = load_graph(spec)?;
    let pot = HetPotential::build(&g, spec.config.theta)?;
    let mut result = match spec.algo {
        Algorithm::H2mp => h2mp_run(&g, &pot, &spec.config.solver)?,
        Algorithm::Ap => {
            let mut r = ap_run(&g, &spec.config.solver)?;
            if !pot.is_empty() {
                r.reevaluate(&g, &pot)?;
            }
            r
        }
    };
    if !spec.emit_metrics {
        result.visual_exemplarness = None;
        result.semantic_exemplarness = None;
    }
    let mut summary = summarize(spec, &g, &result);
    if spec.verify_oracle {
        let oracle_pot = match spec.algo {
            Algorithm::H2mp => pot.clone(),
            Algorithm::Ap => HetPotential::zero(&g),
        };
        verify(spec, &g, &oracle_pot, &result, &mut summary)?;
    }
    let document = render_result(&result);
    Ok(RunOutcome {
        result,
        document,
        summary,
    })
}

/// Parses `args`, runs, writes outputs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match RunSpec::try_from(cli).and_then(|spec| execute(&spec)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(spec: &RunSpec) -> Result<()> {
    let outcome = run(spec)?;
    match &spec.out {
        Some(path) => {
            std::fs::write(path, &outcome.document).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            print!("{}", outcome.summary);
        }
        None => {
            print!("{}", outcome.document);
            eprint!("{}", outcome.summary);
        }
    }
    Ok(())
}
