//! `alphappp` command line.

use std::fs;
use std::path::{Path, PathBuf};

use alphappp::candidates::{evaluate_candidates, write_jsonl};
use alphappp::discovery::{run_candidates, run_repair};
use alphappp::petri::DotOptions;
use alphappp::{preset, CsvMapping, DiscoveryConfig, EventLog, ThresholdMode};
use clap::Parser;

use crate::pipeline::{self, blame, Algorithm, Blame};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum DMode {
    Absolute,
    Relative,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "alphappp", version, about = "Alpha+++ process discovery")]
pub struct Cli {
    /// Event log (.xes, .xes.gz, .csv or canonical .json).
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Algorithm::Alphappp)]
    pub algorithm: Algorithm,
    /// One of the ten named presets; individual flags override its values.
    #[arg(long)]
    pub preset: Option<String>,
    /// Loop and skip threshold.
    #[arg(long)]
    pub d: Option<f64>,
    #[arg(long, value_enum)]
    pub d_mode: Option<DMode>,
    /// Absolute advising-DFG cutoff.
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub problem_threshold: Option<f64>,
    /// Upper bound on |A1| + |A2| during candidate enumeration.
    #[arg(long)]
    pub candidate_cap: Option<usize>,
    /// PNML output; defaults to the input name with a .pnml extension.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub dot: Option<PathBuf>,
    /// Group disconnected fragments in the DOT output.
    #[arg(long)]
    pub dot_fragments: bool,
    /// Stage report as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Per-candidate scores as JSON lines.
    #[arg(long)]
    pub candidates: Option<PathBuf>,
    /// top:<k> or coverage:<f>, applied before discovery.
    #[arg(long)]
    pub variant_filter: Option<String>,
    /// greedy:<k>, removes up to k disconnected transitions.
    #[arg(long)]
    pub remove_disconnected: Option<String>,
    /// Serve the HTTP API on this port instead of running once.
    #[arg(long)]
    pub serve: Option<u16>,
    #[arg(long, default_value = "alphappp-data")]
    pub data_dir: PathBuf,
    /// Upload cap in bytes.
    #[arg(long, default_value_t = 512 * 1024 * 1024)]
    pub max_upload: usize,
    #[arg(long)]
    pub case_col: Option<String>,
    #[arg(long)]
    pub activity_col: Option<String>,
    #[arg(long)]
    pub timestamp_col: Option<String>,
    #[arg(long)]
    pub timestamp_format: Option<String>,
    #[arg(long)]
    pub delimiter: Option<char>,
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Config(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Config(_) => 3,
        }
    }

    fn from_core(context: &str, err: alphappp::Error) -> CliError {
        let msg = format!("{context}: {err}");
        match blame(&err) {
            Blame::Input => CliError::Input(msg),
            Blame::Config => CliError::Config(msg),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) | CliError::Config(m) => f.write_str(m),
        }
    }
}

impl Cli {
    pub fn config(&self) -> Result<DiscoveryConfig, CliError> {
        let mut cfg = match &self.preset {
            Some(name) => preset(name).map_err(|e| CliError::from_core("--preset", e))?,
            None => DiscoveryConfig::default(),
        };
        if let Some(d) = self.d {
            cfg.d.value = d;
        }
        if let Some(mode) = self.d_mode {
            cfg.d.mode = match mode {
                DMode::Absolute => ThresholdMode::Absolute,
                DMode::Relative => ThresholdMode::Relative,
            };
        }
        if let Some(n) = self.n {
            cfg.n = n;
        }
        for (flag, value, slot) in [
            ("--b", self.b, &mut cfg.b),
            ("--t", self.t, &mut cfg.t),
            ("--r", self.r, &mut cfg.r),
            ("--problem-threshold", self.problem_threshold, &mut cfg.problem_threshold),
        ] {
            if let Some(v) = value {
                if !(0.0..=1.0).contains(&v) {
                    return Err(CliError::Config(format!("{flag} must lie in [0, 1], got {v}")));
                }
                *slot = v;
            }
        }
        if self.candidate_cap.is_some() {
            cfg.candidate_size_cap = self.candidate_cap;
        }
        cfg.validate().map_err(|e| CliError::from_core("configuration", e))?;
        Ok(cfg)
    }

    fn csv_mapping(&self) -> CsvMapping {
        let mut m = CsvMapping::default();
        if let Some(c) = &self.case_col {
            m.case_col = c.clone();
        }
        if let Some(c) = &self.activity_col {
            m.activity_col = c.clone();
        }
        // custom columns without a timestamp column: keep file order
        if self.timestamp_col.is_some() || self.case_col.is_some() || self.activity_col.is_some() {
            m.timestamp_col = self.timestamp_col.clone().filter(|c| !c.is_empty());
        }
        if self.timestamp_format.is_some() {
            m.format = self.timestamp_format.clone();
        }
        if let Some(d) = self.delimiter {
            m.delimiter = d;
        }
        m
    }

    fn pnml_path(&self, input: &Path) -> PathBuf {
        self.out.clone().unwrap_or_else(|| {
            let name = input.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            let stem = name
                .trim_end_matches(".gz")
                .rsplit_once('.')
                .map(|(s, _)| s.to_string())
                .unwrap_or(name.clone());
            input.with_file_name(format!("{stem}.pnml"))
        })
    }
}

/// What a successful run wrote.
#[derive(Debug)]
pub struct RunSummary {
    pub pnml: PathBuf,
    pub places: usize,
    pub transitions: usize,
    pub removed: usize,
}

fn write(path: &Path, contents: &[u8], flag: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Input(format!("{flag} {}: {e}", path.display())))
}

/// One discovery run as described by the flags.
pub fn run(cli: &Cli) -> Result<RunSummary, CliError> {
    let input = cli
        .input
        .as_deref()
        .ok_or_else(|| CliError::Input("--input is required unless --serve is given".into()))?;
    let cfg = cli.config()?;
    if cli.candidates.is_some() && cli.algorithm != Algorithm::Alphappp {
        return Err(CliError::Config("--candidates needs --algorithm alphappp".into()));
    }
    let filter = cli
        .variant_filter
        .as_deref()
        .map(pipeline::parse_variant_filter)
        .transpose()
        .map_err(|m| CliError::Config(format!("--variant-filter: {m}")))?;
    let removal = cli
        .remove_disconnected
        .as_deref()
        .map(pipeline::parse_removal)
        .transpose()
        .map_err(|m| CliError::Config(format!("--remove-disconnected: {m}")))?;

    let mapping = cli.csv_mapping();
    let mut log = EventLog::read_file(input, Some(&mapping))
        .map_err(|e| CliError::Input(format!("--input {}: {e}", input.display())))?;
    if let Some(f) = filter {
        log = log
            .filter_variants(f)
            .map_err(|e| CliError::from_core("--variant-filter", e))?;
    }

    let mut found = pipeline::discover(&log, cli.algorithm, &cfg)
        .map_err(|e| CliError::from_core(&format!("discovery on {}", input.display()), e))?;
    let mut removed = 0;
    if let Some(k) = removal {
        let (net, victims) = pipeline::remove_greedy(&found.net, &found.counts(), k);
        removed = victims.len();
        found.report.transitions = net.net.num_transitions();
        found.report.disconnected_labeled = net.disconnected_transitions().len();
        found.net = net;
    }

    let pnml = cli.pnml_path(input);
    write(&pnml, found.net.to_pnml().as_bytes(), "--out")?;
    if let Some(path) = &cli.dot {
        let dot = found.net.to_dot(&DotOptions {
            fragments: cli.dot_fragments,
        });
        write(path, dot.as_bytes(), "--dot")?;
    }
    if let Some(path) = &cli.report {
        let json = serde_json::to_string_pretty(&found.report).expect("report serializes");
        write(path, json.as_bytes(), "--report")?;
    }
    if let Some(path) = &cli.candidates {
        let repair = run_repair(&log, cfg.problem_threshold, cfg.d)
            .map_err(|e| CliError::from_core("--candidates", e))?;
        let cands = run_candidates(&repair, &cfg).map_err(|e| CliError::from_core("--candidates", e))?;
        let records = evaluate_candidates(&cands.cnd0, &repair.repaired, cfg.b, cfg.t);
        let mut buf = Vec::new();
        write_jsonl(&records, &mut buf).map_err(|e| CliError::from_core("--candidates", e))?;
        write(path, &buf, "--candidates")?;
    }
    Ok(RunSummary {
        pnml,
        places: found.net.net.num_places(),
        transitions: found.net.net.num_transitions(),
        removed,
    })
}
