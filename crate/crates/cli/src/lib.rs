//! Command-line front end for `pbn_phi`: reads network documents, runs the
//! analyses and renders reports.

pub mod document;
pub mod error;
pub mod report;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use pbn_phi::dynamics::{DEFAULT_STATIONARY_MAX_ITER, DEFAULT_STATIONARY_TOL};
use pbn_phi::network::{format_bitstring, parse_bitstring, DEFAULT_MAX_NODES};
use pbn_phi::oracle::{oracle_ei, oracle_joint, oracle_phi, oracle_subset_ei};
use pbn_phi::{
    backward_matrix, build_transition_matrix, distribution_at, effective_information,
    effective_information_stationary, stationary_distribution, subset_backward_matrix,
    subset_effective_information, BackwardMatrix, Distribution, NodeSet, Normalization,
    PartitionScope, PhiEngine, PhiOptions, PhiReport, ValidatedNetwork,
};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub use document::{parse_network, parse_validated, serialize_network, DocumentError};
pub use error::CliError;
pub use report::{Format, Report};

#[derive(Debug, Parser)]
#[command(
    name = "pbnphi",
    version,
    about = "Effective and integrated information of probabilistic boolean networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    /// Worker threads for parallel scans.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Refuse networks with more nodes than this.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_NODES)]
    pub max_nodes: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a network document and list its nodes.
    Validate(NetArg),
    /// Print the transition matrix.
    Matrix(NetArg),
    /// Print the state distribution at an instant.
    Evolve {
        #[command(flatten)]
        net: NetArg,
        /// Instant t ≥ 0.
        #[arg(long, default_value_t = 1)]
        time: usize,
        #[command(flatten)]
        prior: PriorArg,
    },
    /// Print a stationary distribution.
    Stationary {
        #[command(flatten)]
        net: NetArg,
        #[arg(long, default_value_t = DEFAULT_STATIONARY_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_STATIONARY_MAX_ITER)]
        max_iter: usize,
    },
    /// Print the backward matrix at an instant, optionally for a subset.
    Backward {
        #[command(flatten)]
        net: NetArg,
        #[command(flatten)]
        at: TimeArgs,
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        subset: Option<Vec<String>>,
    },
    /// Effective information of a state.
    Ei {
        #[command(flatten)]
        net: NetArg,
        #[command(flatten)]
        at: TimeArgs,
        #[command(flatten)]
        state: StateArg,
        /// Use the stationary regime instead of an instant.
        #[arg(long, conflicts_with_all = ["time", "prior"])]
        stationary: bool,
        #[arg(long, default_value_t = DEFAULT_STATIONARY_TOL, requires = "stationary")]
        tol: f64,
        /// Cross-check against the brute-force oracle.
        #[arg(long)]
        oracle: bool,
    },
    /// Effective information of a subset's state.
    SubsetEi {
        #[command(flatten)]
        net: NetArg,
        #[command(flatten)]
        at: TimeArgs,
        #[command(flatten)]
        state: StateArg,
        /// Node names, comma separated.
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        subset: Vec<String>,
        #[arg(long)]
        oracle: bool,
    },
    /// φ of a subset (default: the whole network) on its MIP.
    Phi(PhiArgs),
    /// Minimum information partition of a subset; reports the normalized value.
    Mip(PhiArgs),
    /// All complexes in a state.
    Complexes {
        #[command(flatten)]
        net: NetArg,
        #[command(flatten)]
        at: TimeArgs,
        #[command(flatten)]
        state: StateArg,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// System φ averaged over the states at an instant.
    AvgPhi {
        #[command(flatten)]
        net: NetArg,
        #[command(flatten)]
        at: TimeArgs,
        #[command(flatten)]
        search: SearchArgs,
    },
}

#[derive(Debug, Args)]
pub struct NetArg {
    /// Network document.
    pub network: PathBuf,
}

#[derive(Debug, Args)]
pub struct PriorArg {
    /// `uniform` or a file of 2^n whitespace-separated probabilities.
    #[arg(long, default_value = "uniform")]
    pub prior: String,
}

#[derive(Debug, Args)]
pub struct TimeArgs {
    /// Instant t ≥ 1.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub time: u64,
    #[command(flatten)]
    pub prior: PriorArg,
}

#[derive(Debug, Args)]
pub struct StateArg {
    /// State bitstring, highest node first.
    #[arg(long)]
    pub state: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PartitionsArg {
    Bi,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormalizationArg {
    Marginal,
    Maxent,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long, value_enum, default_value = "bi")]
    pub partitions: PartitionsArg,
    #[arg(long, value_enum, default_value = "marginal")]
    pub normalization: NormalizationArg,
    /// Leave the whole network out of complex scans.
    #[arg(long)]
    pub exclude_whole: bool,
}

#[derive(Debug, Args)]
pub struct PhiArgs {
    #[command(flatten)]
    pub net: NetArg,
    #[command(flatten)]
    pub at: TimeArgs,
    #[command(flatten)]
    pub state: StateArg,
    /// Node names, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub subset: Option<Vec<String>>,
    #[command(flatten)]
    pub search: SearchArgs,
    #[arg(long)]
    pub oracle: bool,
}

impl SearchArgs {
    fn options(&self) -> PhiOptions {
        PhiOptions {
            normalization: match self.normalization {
                NormalizationArg::Marginal => Normalization::Marginal,
                NormalizationArg::Maxent => Normalization::MaxEnt,
            },
            partitions: match self.partitions {
                PartitionsArg::Bi => PartitionScope::Bipartitions,
                PartitionsArg::All => PartitionScope::All,
            },
            include_whole: !self.exclude_whole,
            ..PhiOptions::default()
        }
    }
}

/// A parsed network with the hash of its canonical document.
pub struct Loaded {
    pub net: ValidatedNetwork,
    pub hash: String,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// SHA-256 of the canonical document form of `net`, in hex.
pub fn network_hash(net: &ValidatedNetwork) -> String {
    let digest = Sha256::digest(serialize_network(&net.to_network()).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn load(path: &Path, max_nodes: usize) -> Result<Loaded, CliError> {
    let net = parse_validated(&read(path)?, max_nodes)?;
    let hash = network_hash(&net);
    Ok(Loaded { net, hash })
}

/// Reads `uniform` or a distribution file for a network of `nodes` nodes.
pub fn load_prior(prior: &str, nodes: usize) -> Result<Distribution, CliError> {
    if prior == "uniform" {
        return Ok(Distribution::uniform(1 << nodes));
    }
    let path = Path::new(prior);
    let probs = read(path)?
        .split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .map_err(|_| CliError::Input(format!("{prior}: '{tok}' is not a number")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if probs.len() != 1 << nodes {
        return Err(CliError::Input(format!(
            "{prior}: {} probabilities, expected {} for {nodes} nodes",
            probs.len(),
            1usize << nodes
        )));
    }
    Distribution::new(probs).map_err(|e| CliError::Input(format!("{prior}: {e}")))
}

fn parse_state(text: &str, nodes: usize) -> Result<usize, CliError> {
    match parse_bitstring(text) {
        Some(x) if text.len() == nodes => Ok(x),
        _ => Err(CliError::Input(format!(
            "state '{text}' is not a bitstring of length {nodes}"
        ))),
    }
}

fn parse_subset(net: &ValidatedNetwork, names: &[String]) -> Result<NodeSet, CliError> {
    let indices = names
        .iter()
        .map(|name| {
            net.index_of(name)
                .ok_or_else(|| CliError::Input(format!("unknown node '{name}'")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(NodeSet::from_indices(indices))
}

fn subset_json(net: &ValidatedNetwork, subset: NodeSet) -> Value {
    json!({
        "ids": subset.ids(),
        "names": subset.indices().map(|k| net.name(k)).collect::<Vec<_>>(),
    })
}

fn rows_json(b: &BackwardMatrix) -> Value {
    (0..b.dim())
        .map(|i| b.row(i).map(<[f64]>::to_vec))
        .collect::<Vec<_>>()
        .into()
}

fn states_json(count: usize, nodes: usize) -> Value {
    (0..count)
        .map(|x| format_bitstring(x, nodes))
        .collect::<Vec<_>>()
        .into()
}

/// Runs one command. Thread count and output format are the caller's
/// concern.
pub fn run(cli: &Cli) -> Result<Report, CliError> {
    match &cli.command {
        Command::Validate(arg) => {
            let l = load(&arg.network, cli.max_nodes)?;
            let mut r = Report::new("validate", l.hash);
            let net = &l.net;
            let nodes: Vec<Value> = (0..net.node_count())
                .map(|k| {
                    json!({
                        "id": k + 1,
                        "name": net.name(k),
                        "inputs": net.inputs(k).iter().map(|&i| net.name(i)).collect::<Vec<_>>(),
                        "table": net.table(k),
                    })
                })
                .collect();
            r.data = json!({
                "node_count": net.node_count(),
                "state_count": net.state_count(),
                "deterministic": net.is_deterministic(),
                "nodes": nodes,
            });
            Ok(r)
        }
        Command::Matrix(arg) => {
            let l = load(&arg.network, cli.max_nodes)?;
            let s = build_transition_matrix(&l.net);
            let mut r = Report::new("matrix", l.hash);
            r.data = json!({
                "states": states_json(s.dim(), s.nodes()),
                "rows": s.rows().map(<[f64]>::to_vec).collect::<Vec<_>>(),
            });
            Ok(r)
        }
        Command::Evolve { net, time, prior } => {
            let l = load(&net.network, cli.max_nodes)?;
            let n = l.net.node_count();
            let p0 = load_prior(&prior.prior, n)?;
            let p = distribution_at(&build_transition_matrix(&l.net), &p0, *time)?;
            let mut r = Report::new("evolve", l.hash);
            r.time = Some(*time);
            r.prior = Some(prior.prior.clone());
            r.data = json!({
                "states": states_json(p.len(), n),
                "distribution": p.as_slice(),
            });
            Ok(r)
        }
        Command::Stationary { net, tol, max_iter } => {
            let l = load(&net.network, cli.max_nodes)?;
            let n = l.net.node_count();
            let p = stationary_distribution(&build_transition_matrix(&l.net), *tol, *max_iter)?;
            let mut r = Report::new("stationary", l.hash);
            r.data = json!({
                "tol": tol,
                "max_iter": max_iter,
                "states": states_json(p.len(), n),
                "distribution": p.as_slice(),
            });
            Ok(r)
        }
        Command::Backward { net, at, subset } => {
            let l = load(&net.network, cli.max_nodes)?;
            let n = l.net.node_count();
            let t = at.time as usize;
            let p0 = load_prior(&at.prior.prior, n)?;
            let s = build_transition_matrix(&l.net);
            let prev = distribution_at(&s, &p0, t - 1)?;
            let mut r = Report::new("backward", l.hash);
            r.time = Some(t);
            r.prior = Some(at.prior.prior.clone());
            r.data = match subset {
                Some(names) => {
                    let a = parse_subset(&l.net, names)?;
                    let b = subset_backward_matrix(&s, &prev, a)?;
                    json!({
                        "subset": subset_json(&l.net, a),
                        "states": states_json(a.state_count(), a.len()),
                        "rows": rows_json(&b),
                    })
                }
                None => {
                    let b = backward_matrix(&s, &prev)?;
                    json!({ "states": states_json(s.dim(), n), "rows": rows_json(&b) })
                }
            };
            let undefined = r.data["rows"]
                .as_array()
                .map_or(0, |rows| rows.iter().filter(|v| v.is_null()).count());
            if undefined > 0 {
                r.warnings.push(format!(
                    "{undefined} row(s) undefined: states unobservable at t = {t}"
                ));
            }
            Ok(r)
        }
        Command::Ei {
            net,
            at,
            state,
            stationary,
            tol,
            oracle,
        } => {
            let l = load(&net.network, cli.max_nodes)?;
            let n = l.net.node_count();
            let x = parse_state(&state.state, n)?;
            let mut r = Report::new("ei", l.hash);
            r.state = Some(state.state.clone());
            if *stationary {
                let s = build_transition_matrix(&l.net);
                r.prior = Some("stationary".into());
                r.value_bits = Some(effective_information_stationary(&s, x, *tol)?);
                if *oracle {
                    r.warnings
                        .push("--oracle does not cover the stationary regime".into());
                }
                return Ok(r);
            }
            let t = at.time as usize;
            let p0 = load_prior(&at.prior.prior, n)?;
            let ei = effective_information(&l.net, &p0, t, x)?;
            r.time = Some(t);
            r.prior = Some(at.prior.prior.clone());
            r.value_bits = Some(ei);
            if *oracle {
                let o = oracle_ei(&oracle_joint(&l.net, &p0, t)?, x)?;
                r.data = json!({ "oracle": { "value_bits": o, "delta": (ei - o).abs() } });
            }
            Ok(r)
        }
        Command::SubsetEi {
            net,
            at,
            state,
            subset,
            oracle,
        } => {
            let l = load(&net.network, cli.max_nodes)?;
            let n = l.net.node_count();
            let a = parse_subset(&l.net, subset)?;
            let x = parse_state(&state.state, n)?;
            let t = at.time as usize;
            let p0 = load_prior(&at.prior.prior, n)?;
            let sub_state = a.project(x);
            let ei = subset_effective_information(&l.net, &p0, t, a, sub_state)?;
            let mut r = Report::new("subset-ei", l.hash);
            r.time = Some(t);
            r.prior = Some(at.prior.prior.clone());
            r.state = Some(state.state.clone());
            r.value_bits = Some(ei);
            r.data = json!({
                "subset": subset_json(&l.net, a),
                "subset_state": format_bitstring(sub_state, a.len()),
            });
            if *oracle {
                let o = oracle_subset_ei(&oracle_joint(&l.net, &p0, t)?, a, sub_state)?;
                r.data["oracle"] = json!({ "value_bits": o, "delta": (ei - o).abs() });
            }
            Ok(r)
        }
        Command::Phi(args) => phi_command("phi", cli, args),
        Command::Mip(args) => phi_command("mip", cli, args),
        Command::Complexes {
            net,
            at,
            state,
            search,
        } => {
            let l = load(&net.network, cli.max_nodes)?;
            let n = l.net.node_count();
            let x = parse_state(&state.state, n)?;
            let t = at.time as usize;
            let p0 = load_prior(&at.prior.prior, n)?;
            let options = search.options();
            let mode = options.normalization;
            let engine = PhiEngine::new(&l.net, &p0, t, options)?;
            let scan = engine.find_complexes(x)?;
            let mut r = Report::new("complexes", l.hash);
            r.time = Some(t);
            r.prior = Some(at.prior.prior.clone());
            r.state = Some(state.state.clone());
            r.value_bits = Some(scan.max_phi());
            r.normalization_mode = Some(mode);
            if !scan.skipped.is_empty() {
                r.warnings.push(format!(
                    "{} subset(s) skipped: every partition excluded by zero normalization",
                    scan.skipped.len()
                ));
            }
            r.data = json!({
                "main_complex": scan.main_complex(),
                "complexes": scan.complexes,
                "skipped": scan.skipped,
            });
            Ok(r)
        }
        Command::AvgPhi { net, at, search } => {
            let l = load(&net.network, cli.max_nodes)?;
            let n = l.net.node_count();
            let t = at.time as usize;
            let p0 = load_prior(&at.prior.prior, n)?;
            let options = search.options();
            let mode = options.normalization;
            let engine = PhiEngine::new(&l.net, &p0, t, options)?;
            let mut r = Report::new("avg-phi", l.hash);
            r.time = Some(t);
            r.prior = Some(at.prior.prior.clone());
            r.value_bits = Some(engine.average_phi()?);
            r.normalization_mode = Some(mode);
            Ok(r)
        }
    }
}

fn phi_command(name: &str, cli: &Cli, args: &PhiArgs) -> Result<Report, CliError> {
    let l = load(&args.net.network, cli.max_nodes)?;
    let n = l.net.node_count();
    let x = parse_state(&args.state.state, n)?;
    let t = args.at.time as usize;
    let p0 = load_prior(&args.at.prior.prior, n)?;
    let subset = match &args.subset {
        Some(names) => parse_subset(&l.net, names)?,
        None => NodeSet::full(n),
    };
    let engine = PhiEngine::new(&l.net, &p0, t, args.search.options())?;
    let report: PhiReport = engine.find_mip(subset, x)?;

    let mut r = Report::new(name, l.hash);
    r.time = Some(t);
    r.prior = Some(args.at.prior.prior.clone());
    r.state = Some(args.state.state.clone());
    r.value_bits = Some(if name == "mip" {
        report.normalized_value
    } else {
        report.phi_raw
    });
    let excluded = report
        .per_partition
        .iter()
        .filter(|e| e.ratio.is_none())
        .count();
    if excluded > 0 {
        r.warnings.push(format!(
            "{excluded} partition(s) excluded: zero normalization with nonzero phi"
        ));
    }
    r.data = json!({
        "subset": subset_json(&l.net, subset),
        "subset_state": format_bitstring(report.subset_state, subset.len()),
        "phi_raw": report.phi_raw,
        "normalized_value": report.normalized_value,
    });
    if args.oracle {
        let joint = oracle_joint(&l.net, &p0, t)?;
        let mut max_delta = 0.0f64;
        let entries = report
            .per_partition
            .iter()
            .map(|e| {
                let o = oracle_phi(&joint, subset, &e.partition, x)?;
                max_delta = max_delta.max((e.phi - o).abs());
                Ok(json!({ "partition": e.partition, "phi": o, "delta": (e.phi - o).abs() }))
            })
            .collect::<Result<Vec<_>, pbn_phi::Error>>()?;
        r.data["oracle"] = json!({ "per_partition": entries, "max_delta": max_delta });
    }
    r.mip = Some(report.mip);
    r.normalization_mode = Some(report.normalization_mode);
    r.per_partition = Some(report.per_partition);
    Ok(r)
}
