//! Command-line front end. Machine output goes to stdout (or `--out`), diagnostics to
//! stderr; exit codes are 0 (ok), 2 (invalid input), 3 (resource limit) and
//! 4 (numerical failure).
//!
//! CSV column orders:
//! - `mc`: `N,estimate_re,estimate_im,stderr,variance,samples`
//! - `limit`: `N,estimate_re,estimate_im,stderr,limit,samples`
//! - `character`: `N,estimate_re,estimate_im,stderr,asymptotic_error,samples`
//! - `amalgam`: `N,estimate_re,estimate_im,stderr,variance,samples`, or `N,probe_norm,samples` with `--probe`
//! - `mobius`: `partition,blocks,mobius`
//! - `decompose`: `partition,a_re,a_im,unit_re,unit_im`
//! - `predict`: `partition,multiplicity,eta,valid,validity,t1_leaves,t2_leaves,quotient_leaves`
//! - `trace`: `value_re,value_im,L,c,plan_width`
//! - `invariants`: `vertices,order,L,c,bridges,cactus,well_oriented,validity`
//! - `normdemo`: `L,N,mode,norm,reference,fixed_vector_bound,iterations`
//! - `selftest`: `name,residual,tolerance,pass`

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::haar::{haar_injective_mc, haar_limit_injective, predict_freeness_limit};
use crate::invariants::{cutting_edges, forest_of_tec, is_forest_of_cacti, is_well_oriented, leaf_count, validity};
use crate::io::{parse_coefficients, read_graph, read_operand};
use crate::operand::{CMatrix, TensorOperand};
use crate::partition::{enumerate_partitions, mobius_from_discrete};
use crate::perm::{identity, parse_one_line};
use crate::random::family::{mc_expectation, mc_variance, VFamily, WSpec};
use crate::random::norm::{norm_absorption_demo, NormMode};
use crate::random::RngStream;
use crate::repr::{amalgamation_probe, character_mc, left_regular_check, PermutationWord, Signature};
use crate::selftest::run_selftest;
use crate::trace::state::{decompose_invariant_state, StateKind, StateSpec};
use crate::trace::{contraction_plan, graph_trace, injective_graph_trace, tau_trace, zeta_trace};
use crate::word::{Letter, StarWord};

#[derive(Parser, Debug)]
#[command(name = "traffic-tensors", version, about = "Graph traces, partition-lattice Möbius calculus and Haar-unitary freeness checks")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Output format of the primary result.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Master seed of every random stream.
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
    /// Worker threads (default: all cores); results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write the primary result to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum NormModeArg {
    /// Independent Haar pairs `U_ℓ ⊗ V_ℓ`.
    Haar,
    /// `U_ℓ ⊗ conj(U_ℓ)`.
    Conjugate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VFamilyArg {
    /// Fresh Haar unitaries on the extra legs.
    Haar,
    /// Fixed permutation matrices on the extra legs.
    Permutation,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Graph trace of an operand file along a graph JSON file.
    Trace {
        /// Graph JSON; with labels, edge k uses factor delta_k (adjointed for "s").
        #[arg(long)]
        graph: PathBuf,
        /// Operand file: JSON list of row-major complex matrices, or the binary format.
        #[arg(long)]
        operand: PathBuf,
        /// Sum over injective labelings only.
        #[arg(long, conflicts_with_all = ["zeta", "tau"])]
        injective: bool,
        /// Normalize by N^(-c), c the number of connected components.
        #[arg(long, conflicts_with = "tau")]
        zeta: bool,
        /// Normalize by N^(-L/2), L the leaf count of the forest of two-edge connected components.
        #[arg(long)]
        tau: bool,
    },
    /// Leaf count, bridges, two-edge connected components and cactus flags of a graph.
    Invariants {
        /// Graph JSON (labels, when present, are checked for validity).
        #[arg(long)]
        graph: PathBuf,
    },
    /// Möbius values mu(0, pi) for every partition of an n-set.
    Mobius {
        /// Size of the ground set.
        #[arg(long)]
        n: usize,
    },
    /// Coefficients a_{N,pi} of an invariant state in the basis of graph traces.
    Decompose {
        /// tracial, entangled, diagonal, or a JSON file of coefficients.
        #[arg(long)]
        state: String,
        /// Number of legs K.
        #[arg(long)]
        legs: usize,
        /// Matrix size N (at least 2K).
        #[arg(long)]
        n: usize,
    },
    /// Certificate deciding whether the limit of a word in the W-family vanishes.
    Predict {
        /// Star word, 1-based letters, e.g. "1,2,1*,2*".
        #[arg(long)]
        word: StarWord,
        /// Base graph JSON with one edge per block leg.
        #[arg(long)]
        graph: PathBuf,
        /// Block sizes K1,K2,K3.
        #[arg(long)]
        blocks: Blocks,
        /// Analyse the variance (doubled graph) instead of the expectation.
        #[arg(long)]
        variance: bool,
    },
    /// Monte-Carlo expectation of a state on a word in the W-family, per N.
    Mc {
        /// tracial, entangled, diagonal, or a JSON file of coefficients.
        #[arg(long)]
        state: String,
        /// Star word, 1-based letters.
        #[arg(long)]
        word: StarWord,
        /// Block sizes K1,K2,K3.
        #[arg(long)]
        blocks: Blocks,
        /// Matrix sizes, strictly increasing.
        #[arg(long, value_delimiter = ',', default_value = "16,32,64,128")]
        dims: Vec<usize>,
        /// Samples per size (at least 2).
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Estimate the variance instead of the expectation.
        #[arg(long)]
        variance: bool,
        /// How the K3 legs are filled.
        #[arg(long, value_enum, default_value_t = VFamilyArg::Haar)]
        v: VFamilyArg,
    },
    /// Exact Haar limit of a labelled graph, optionally with Monte-Carlo estimates.
    Limit {
        /// Graph JSON with labels.
        #[arg(long)]
        graph: PathBuf,
        /// Matrix sizes for Monte-Carlo estimates (omit for the exact value only).
        #[arg(long, value_delimiter = ',')]
        dims: Vec<usize>,
        /// Samples per size (at least 2).
        #[arg(long, default_value_t = 2000)]
        samples: usize,
    },
    /// Monte-Carlo mean of a normalized rational character on a word in (U, conj U).
    Character {
        /// Diagram lambda, e.g. "2,1" (empty for none).
        #[arg(long, default_value = "1")]
        lambda: String,
        /// Diagram mu, e.g. "1" (empty for none).
        #[arg(long, default_value = "")]
        mu: String,
        /// Star word; letters 1..K are U_k, letters K+1..2K are conj(U_k).
        #[arg(long, default_value = "1")]
        word: StarWord,
        /// Number K of independent unitaries (default: letters used by the word).
        #[arg(long)]
        k: Option<usize>,
        /// Matrix sizes, strictly increasing.
        #[arg(long, value_delimiter = ',', default_value = "16,32,64")]
        dims: Vec<usize>,
        /// Samples per size (at least 2).
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Left regular character check on F_2K x S_d, or the amalgamation probe.
    Amalgam {
        /// Number of tensor legs d.
        #[arg(long, default_value_t = 2)]
        d: usize,
        /// Free part; letters 1..K are U_k, letters K+1..2K are transpose(U_k).
        #[arg(long, default_value = "1")]
        word: StarWord,
        /// Permutation part in 1-based one-line notation (default: identity).
        #[arg(long)]
        perm: Option<String>,
        /// Number K of independent unitaries (default: letters used by the word).
        #[arg(long)]
        k: Option<usize>,
        /// Matrix sizes, strictly increasing.
        #[arg(long, value_delimiter = ',', default_value = "8,16,32")]
        dims: Vec<usize>,
        /// Samples per size (at least 2).
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// Report the norm of E(x y) for centered U1, U2 tensor powers instead.
        #[arg(long)]
        probe: bool,
    },
    /// Operator norm of sum_l U_l (x) V_l.
    Normdemo {
        /// Number of terms L.
        #[arg(long, default_value_t = 3)]
        l: usize,
        /// Matrix size N (N^2 <= 4096).
        #[arg(long, default_value_t = 30)]
        n: usize,
        /// Pairing of the second factor.
        #[arg(long, value_enum, default_value_t = NormModeArg::Haar)]
        mode: NormModeArg,
    },
    /// Runs the exact-identity suites.
    Selftest,
}

/// `K1,K2,K3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Blocks(pub [usize; 3]);

impl std::str::FromStr for Blocks {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let v: Vec<usize> = s
            .split(',')
            .map(|x| x.trim().parse().map_err(|_| Error::Parse(format!("bad block size {:?}", x))))
            .collect::<Result<_>>()?;
        <[usize; 3]>::try_from(v).map(Blocks).map_err(|_| Error::Parse("blocks must be K1,K2,K3".into()))
    }
}

/// Primary result: a JSON document and its CSV rendering.
pub struct Report {
    pub json: Value,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Report {
    fn new(json: Value, header: Vec<&'static str>, rows: Vec<Vec<String>>) -> Self {
        Report { json, header, rows }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(&self.json).expect("json rendering") + "\n",
            Format::Csv => {
                let mut out = self.header.join(",");
                out.push('\n');
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(|c| csv_cell(c)).collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
                out
            }
        }
    }
}

fn csv_cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn to_json<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable report")
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.is_empty() {
        return Err(Error::invalid("--dims must list at least one size"));
    }
    if dims.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("--dims must be strictly increasing"));
    }
    if dims.contains(&0) {
        return Err(Error::invalid("--dims must be positive"));
    }
    Ok(())
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < 2 {
        return Err(Error::invalid("--samples must be at least 2"));
    }
    Ok(())
}

fn state_kind(s: &str) -> Result<StateKind> {
    Ok(match s {
        "tracial" => StateKind::Tracial,
        "entangled" | "max_entangled" => StateKind::MaxEntangled,
        "diagonal" | "diagonal_uniform" => StateKind::DiagonalUniform,
        path => StateKind::ElementaryCombination {
            coefficients: parse_coefficients(&std::fs::read_to_string(path)?)?,
        },
    })
}

/// Stream of the experiment at size `n`, independent across sizes.
fn stream_for(seed: u64, n: usize) -> RngStream {
    RngStream::new(seed, 0).derive(n as u64)
}

/// One factor per edge, adjointed where the label is starred.
fn labelled_operand(a: &TensorOperand, labels: &[Letter]) -> Result<TensorOperand> {
    let TensorOperand::Factored(factors) = a else {
        return Err(Error::invalid("labelled graphs need a factored operand"));
    };
    let per_edge = labels
        .iter()
        .map(|l| {
            let f: &CMatrix = factors
                .get(l.index)
                .ok_or_else(|| Error::invalid(format!("label {} exceeds the {} factors", l, factors.len())))?;
            Ok(if l.star { f.adjoint() } else { f.clone() })
        })
        .collect::<Result<Vec<_>>>()?;
    TensorOperand::factored(per_edge)
}

/// Shortest round-trip form, in exponent notation away from moderate magnitudes.
fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        x.to_string()
    } else {
        format!("{:e}", x)
    }
}

fn c_re(z: Complex64) -> String {
    num(z.re)
}

fn c_im(z: Complex64) -> String {
    num(z.im)
}

fn cmd_trace(graph: &Path, operand: &Path, injective: bool, zeta: bool, tau: bool) -> Result<Report> {
    let (g, labels) = read_graph(graph)?;
    let mut a = read_operand(operand)?;
    if let Some(labels) = &labels {
        a = labelled_operand(&a, labels)?;
    }
    let value = if injective {
        injective_graph_trace(&g, &a)?
    } else if zeta {
        zeta_trace(&g, &a)?
    } else if tau {
        tau_trace(&g, &a)?
    } else {
        graph_trace(&g, &a)?
    };
    let l = leaf_count(&g);
    let c = g.component_count();
    let width = contraction_plan(&g).width;
    Ok(Report::new(
        json!({"value_re": value.re, "value_im": value.im, "L": l, "c": c, "plan_width": width}),
        vec!["value_re", "value_im", "L", "c", "plan_width"],
        vec![vec![c_re(value), c_im(value), l.to_string(), c.to_string(), width.to_string()]],
    ))
}

fn cmd_invariants(graph: &Path) -> Result<Report> {
    let (g, labels) = read_graph(graph)?;
    let forest = forest_of_tec(&g);
    let bridges = cutting_edges(&g);
    let l = forest.leaf_count();
    let cactus = is_forest_of_cacti(&g);
    let oriented = is_well_oriented(&g);
    let valid = labels.as_ref().map(|ls| validity(&g, ls)).transpose()?;
    let valid_str = valid.map(|v| to_json(&v).as_str().unwrap_or_default().to_string()).unwrap_or_default();
    Ok(Report::new(
        json!({
            "vertices": g.vertex_count(),
            "order": g.order(),
            "L": l,
            "c": g.component_count(),
            "bridges": bridges,
            "tec_components": forest.components,
            "forest_edges": forest.forest_edges,
            "cactus": cactus,
            "well_oriented": oriented,
            "validity": valid,
        }),
        vec!["vertices", "order", "L", "c", "bridges", "cactus", "well_oriented", "validity"],
        vec![vec![
            g.vertex_count().to_string(),
            g.order().to_string(),
            l.to_string(),
            g.component_count().to_string(),
            bridges.len().to_string(),
            cactus.to_string(),
            oriented.to_string(),
            valid_str,
        ]],
    ))
}

fn cmd_mobius(n: usize) -> Result<Report> {
    let parts = enumerate_partitions(n)?;
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    for p in &parts {
        let m = mobius_from_discrete(p);
        entries.push(json!({"partition": p.to_string(), "blocks": p.to_block_string(), "mobius": m}));
        rows.push(vec![p.to_string(), p.to_block_string(), m.to_string()]);
    }
    Ok(Report::new(json!({"n": n, "partitions": entries}), vec!["partition", "blocks", "mobius"], rows))
}

fn cmd_decompose(state: &str, legs: usize, n: usize) -> Result<Report> {
    let psi = StateSpec::new(state_kind(state)?, legs, n)?;
    let dec = decompose_invariant_state(&psi)?;
    let rows = dec
        .partitions
        .iter()
        .zip(&dec.coefficients)
        .zip(&dec.unit_values)
        .map(|((p, a), b)| vec![p.to_string(), c_re(*a), c_im(*a), c_re(*b), c_im(*b)])
        .collect();
    Ok(Report::new(to_json(&dec), vec!["partition", "a_re", "a_im", "unit_re", "unit_im"], rows))
}

fn cmd_predict(word: &StarWord, graph: &Path, blocks: Blocks, variance: bool) -> Result<Report> {
    let (t, _) = read_graph(graph)?;
    let [k1, k2, k3] = blocks.0;
    let cert = predict_freeness_limit(word, &t, k1, k2, k3, variance)?;
    let rows = cert
        .quotients
        .iter()
        .map(|q| {
            vec![
                q.partition.to_string(),
                q.multiplicity.to_string(),
                q.eta.to_string(),
                q.valid.to_string(),
                to_json(&q.validity).as_str().unwrap_or_default().to_string(),
                q.leaf_counts.t1.to_string(),
                q.leaf_counts.t2.to_string(),
                q.leaf_counts.quotient.to_string(),
            ]
        })
        .collect();
    Ok(Report::new(
        to_json(&cert),
        vec!["partition", "multiplicity", "eta", "valid", "validity", "t1_leaves", "t2_leaves", "quotient_leaves"],
        rows,
    ))
}

#[allow(clippy::too_many_arguments)]
fn cmd_mc(
    seed: u64,
    state: &str,
    word: &StarWord,
    blocks: Blocks,
    dims: &[usize],
    samples: usize,
    variance: bool,
    v: VFamilyArg,
) -> Result<Report> {
    check_dims(dims)?;
    check_samples(samples)?;
    let kind = state_kind(state)?;
    let [k1, k2, k3] = blocks.0;
    let v = match v {
        VFamilyArg::Haar => VFamily::Haar,
        VFamilyArg::Permutation => VFamily::Permutation,
    };
    let spec = WSpec::new(k1, k2, k3, word.alphabet_size().max(1))?.with_v(v);
    let mut reports = Vec::new();
    for &n in dims {
        let psi = StateSpec::new(kind.clone(), spec.legs(), n)?;
        let stream = stream_for(seed, n);
        let rep = if variance {
            mc_variance(&psi, &spec, word, samples, stream)?
        } else {
            mc_expectation(&psi, &spec, word, samples, stream)?
        };
        eprintln!("mc N={} estimate={} stderr={:e} ({:.1}s)", n, rep.estimate, rep.stderr, rep.wallclock);
        reports.push(rep);
    }
    let rows = reports
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                c_re(r.estimate),
                c_im(r.estimate),
                num(r.stderr),
                num(r.variance),
                r.samples.to_string(),
            ]
        })
        .collect();
    Ok(Report::new(
        json!({"word": word.to_string(), "blocks": blocks.0, "variance": variance, "reports": reports}),
        vec!["N", "estimate_re", "estimate_im", "stderr", "variance", "samples"],
        rows,
    ))
}

fn cmd_limit(seed: u64, graph: &Path, dims: &[usize], samples: usize) -> Result<Report> {
    let (g, labels) = read_graph(graph)?;
    let labels = labels.ok_or_else(|| Error::invalid("the graph needs labels"))?;
    let limit = haar_limit_injective(&g, &labels)?;
    let valid = validity(&g, &labels)?;
    let limit_f = *limit.numer() as f64 / *limit.denom() as f64;
    let mut reports = Vec::new();
    if !dims.is_empty() {
        check_dims(dims)?;
        check_samples(samples)?;
        for &n in dims {
            let rep = haar_injective_mc(&g, &labels, n, samples, stream_for(seed, n))?;
            eprintln!("limit N={} estimate={} stderr={:e} ({:.1}s)", n, rep.estimate, rep.stderr, rep.wallclock);
            reports.push(rep);
        }
    }
    let rows = reports
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                c_re(r.estimate),
                c_im(r.estimate),
                num(r.stderr),
                limit.to_string(),
                r.samples.to_string(),
            ]
        })
        .collect();
    Ok(Report::new(
        json!({"limit": limit.to_string(), "limit_value": limit_f, "validity": valid, "reports": reports}),
        vec!["N", "estimate_re", "estimate_im", "stderr", "limit", "samples"],
        rows,
    ))
}

fn default_k(word: &StarWord, k: Option<usize>) -> usize {
    k.unwrap_or_else(|| word.alphabet_size().max(1))
}

fn cmd_character(seed: u64, lambda: &str, mu: &str, word: &StarWord, k: Option<usize>, dims: &[usize], samples: usize) -> Result<Report> {
    check_dims(dims)?;
    check_samples(samples)?;
    let sig = Signature::parse(lambda, mu)?;
    let k = default_k(word, k);
    let mut reports = Vec::new();
    for &n in dims {
        let rep = character_mc(&sig, word, k, n, samples, stream_for(seed, n))?;
        eprintln!("character N={} estimate={} asymptotic_error={:e}", n, rep.report.estimate, rep.asymptotic_error);
        reports.push(rep);
    }
    let rows = reports
        .iter()
        .map(|r| {
            vec![
                r.report.n.to_string(),
                c_re(r.report.estimate),
                c_im(r.report.estimate),
                num(r.report.stderr),
                num(r.asymptotic_error),
                r.report.samples.to_string(),
            ]
        })
        .collect();
    Ok(Report::new(
        json!({"signature": sig, "word": word.to_string(), "K": k, "reports": reports}),
        vec!["N", "estimate_re", "estimate_im", "stderr", "asymptotic_error", "samples"],
        rows,
    ))
}

#[allow(clippy::too_many_arguments)]
fn cmd_amalgam(
    seed: u64,
    d: usize,
    word: &StarWord,
    perm: Option<&str>,
    k: Option<usize>,
    dims: &[usize],
    samples: usize,
    probe: bool,
) -> Result<Report> {
    check_dims(dims)?;
    check_samples(samples)?;
    if probe {
        let mut rows = Vec::new();
        let mut entries = Vec::new();
        for &n in dims {
            let norm = amalgamation_probe(d, n, samples, stream_for(seed, n))?;
            entries.push(json!({"N": n, "probe_norm": norm, "samples": samples}));
            rows.push(vec![n.to_string(), num(norm), samples.to_string()]);
        }
        return Ok(Report::new(json!({"d": d, "probe": entries}), vec!["N", "probe_norm", "samples"], rows));
    }
    let sigma = match perm {
        Some(p) => parse_one_line(p)?,
        None => identity(d),
    };
    if sigma.len() != d {
        return Err(Error::invalid(format!("--perm has {} entries but d = {}", sigma.len(), d)));
    }
    let pw = PermutationWord::new(word.clone(), sigma)?;
    let k = default_k(word, k);
    let mut reports = Vec::new();
    for &n in dims {
        reports.push(left_regular_check(&pw, k, n, samples, stream_for(seed, n))?);
    }
    let rows = reports
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                c_re(r.estimate),
                c_im(r.estimate),
                num(r.stderr),
                num(r.variance),
                r.samples.to_string(),
            ]
        })
        .collect();
    Ok(Report::new(
        json!({"d": d, "word": pw, "K": k, "reports": reports}),
        vec!["N", "estimate_re", "estimate_im", "stderr", "variance", "samples"],
        rows,
    ))
}

fn cmd_normdemo(seed: u64, l: usize, n: usize, mode: NormModeArg) -> Result<Report> {
    let mode = match mode {
        NormModeArg::Haar => NormMode::HaarPair,
        NormModeArg::Conjugate => NormMode::ConjugatePair,
    };
    let r = norm_absorption_demo(l, n, mode, RngStream::new(seed, 0))?;
    let mode_str = to_json(&r.mode).as_str().unwrap_or_default().to_string();
    let row = vec![
        r.l.to_string(),
        r.n.to_string(),
        mode_str,
        num(r.norm),
        num(r.reference),
        num(r.fixed_vector_bound),
        r.iterations.to_string(),
    ];
    Ok(Report::new(
        to_json(&r),
        vec!["L", "N", "mode", "norm", "reference", "fixed_vector_bound", "iterations"],
        vec![row],
    ))
}

fn cmd_selftest(seed: u64) -> Result<(Report, bool)> {
    let checks = run_selftest(seed)?;
    let ok = checks.iter().all(|c| c.pass);
    let rows = checks
        .iter()
        .map(|c| vec![c.name.to_string(), num(c.residual), num(c.tolerance), c.pass.to_string()])
        .collect();
    Ok((Report::new(json!({"pass": ok, "checks": checks}), vec!["name", "residual", "tolerance", "pass"], rows), ok))
}

/// Runs one command; `Ok(false)` means the command ran but a check failed.
pub fn execute(global: &GlobalArgs, command: &Command) -> Result<(Report, bool)> {
    let seed = global.seed;
    let report = match command {
        Command::Trace { graph, operand, injective, zeta, tau } => cmd_trace(graph, operand, *injective, *zeta, *tau)?,
        Command::Invariants { graph } => cmd_invariants(graph)?,
        Command::Mobius { n } => cmd_mobius(*n)?,
        Command::Decompose { state, legs, n } => cmd_decompose(state, *legs, *n)?,
        Command::Predict { word, graph, blocks, variance } => cmd_predict(word, graph, *blocks, *variance)?,
        Command::Mc { state, word, blocks, dims, samples, variance, v } => {
            cmd_mc(seed, state, word, *blocks, dims, *samples, *variance, *v)?
        }
        Command::Limit { graph, dims, samples } => cmd_limit(seed, graph, dims, *samples)?,
        Command::Character { lambda, mu, word, k, dims, samples } => {
            cmd_character(seed, lambda, mu, word, *k, dims, *samples)?
        }
        Command::Amalgam { d, word, perm, k, dims, samples, probe } => {
            cmd_amalgam(seed, *d, word, perm.as_deref(), *k, dims, *samples, *probe)?
        }
        Command::Normdemo { l, n, mode } => cmd_normdemo(seed, *l, *n, *mode)?,
        Command::Selftest => return cmd_selftest(seed),
    };
    Ok((report, true))
}

fn emit(global: &GlobalArgs, text: &str) -> Result<()> {
    match &global.out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                other => other?,
            }
        }
    }
    Ok(())
}

fn run_inner(cli: &Cli) -> Result<bool> {
    let (report, ok) = execute(&cli.global, &cli.command)?;
    emit(&cli.global, &report.render(cli.global.format))?;
    Ok(ok)
}

/// Parses the arguments, runs the command (inside a dedicated pool when `--threads`
/// is given) and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.global.threads {
        Some(0) => Err(Error::invalid("--threads must be positive")),
        Some(k) => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => pool.install(|| run_inner(&cli)),
            Err(e) => Err(Error::invalid(format!("cannot start {} threads: {}", k, e))),
        },
        None => run_inner(&cli),
    };
    match outcome {
        Ok(true) => 0,
        Ok(false) => {
            eprintln!("error: self-test failed");
            4
        }
        Err(e) => {
            eprintln!("error: {}", e);
            if cli.global.format == Format::Json {
                let doc = json!({"error": e.to_string(), "exit_code": e.exit_code()});
                let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(&doc).expect("error json"));
            }
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn every_flag_is_documented() {
        let cmd = Cli::command();
        cmd.clone().debug_assert();
        for sub in cmd.get_subcommands() {
            assert!(sub.get_about().is_some(), "{} has no help", sub.get_name());
            for arg in sub.get_arguments() {
                if arg.get_id() == "help" || arg.get_id() == "version" {
                    continue;
                }
                assert!(arg.get_help().is_some(), "{} --{} has no help", sub.get_name(), arg.get_id());
            }
        }
    }

    #[test]
    fn blocks_and_csv() {
        assert_eq!("1,1,0".parse::<Blocks>().unwrap(), Blocks([1, 1, 0]));
        assert!("1,1".parse::<Blocks>().is_err());
        assert_eq!(csv_cell("0,0,1"), "\"0,0,1\"");
        assert_eq!(csv_cell("x"), "x");
    }

    #[test]
    fn mobius_table() {
        let (r, _) = execute(&GlobalArgs { format: Format::Csv, seed: 0, threads: None, out: None }, &Command::Mobius { n: 4 })
            .unwrap();
        assert_eq!(r.rows.len(), 15);
        let text = r.render(Format::Csv);
        assert!(text.starts_with("partition,blocks,mobius\n"));
        assert!(text.contains("\"0,0,0,0\",\"{{1,2,3,4}}\",-6\n"), "{}", text);
    }
}
