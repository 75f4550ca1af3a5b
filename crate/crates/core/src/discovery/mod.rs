//! End-to-end discovery: configuration, presets, the staged Alpha+++ pipeline
//! and the classical Alpha baseline.

mod alpha;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::activity::Activity;
use crate::candidates::{
    enumerate_candidates, prune_balance, prune_fitness, select_maximal, CandidateStageCounts,
    PlaceCandidate,
};
use crate::dfg::{build_advising_dfg, AdvisingStats, DfThreshold, Dfg};
use crate::error::{Error, Result};
use crate::log::EventLog;
use crate::petri::AcceptingPetriNet;
use crate::repair::{repair_log, RepairReport};

pub use alpha::{discover_alpha_classic, discover_alpha_classic_with_report};

fn default_problem_threshold() -> f64 {
    1.0
}

fn default_fraction() -> f64 {
    0.01
}

fn is_default_fraction(v: &f64) -> bool {
    *v == default_fraction()
}

/// Thresholds of one Alpha+++ run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscoveryConfig {
    /// Loop and skip detection threshold.
    pub d: DfThreshold,
    /// Absolute advising-DFG cutoff.
    #[serde(default)]
    pub n: u64,
    /// Balance threshold.
    pub b: f64,
    /// Local candidate fitness threshold.
    pub t: f64,
    /// Place replay threshold.
    pub r: f64,
    /// Activities with a higher problem score are removed; 1.0 keeps all.
    #[serde(default = "default_problem_threshold")]
    pub problem_threshold: f64,
    /// Upper bound on `|A1| + |A2|` during enumeration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate_size_cap: Option<usize>,
    /// Share of the smaller of in/out weight an advising-DFG arc needs.
    #[serde(default = "default_fraction", skip_serializing_if = "is_default_fraction")]
    pub min_weight_fraction: f64,
}

impl Default for DiscoveryConfig {
    fn default() -> Self {
        preset(PRESET_NAMES[0]).expect("first preset exists")
    }
}

impl DiscoveryConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} must lie in [0, 1], got {v}")))
            }
        };
        unit("b", self.b)?;
        unit("t", self.t)?;
        unit("r", self.r)?;
        unit("problem_threshold", self.problem_threshold)?;
        unit("min_weight_fraction", self.min_weight_fraction)?;
        if !(self.d.value.is_finite() && self.d.value >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "d must be a non-negative number, got {}",
                self.d.value
            )));
        }
        if self.candidate_size_cap.is_some_and(|c| c < 2) {
            return Err(Error::InvalidConfig(
                "candidate_size_cap must be at least 2".into(),
            ));
        }
        Ok(())
    }

    pub fn from_json(json: &str) -> Result<DiscoveryConfig> {
        let cfg: DiscoveryConfig =
            serde_json::from_str(json).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// The ten evaluation presets: artificial-activity threshold `d` (relative to
/// the mean arc weight) combined with five `(b, t, r)` triples.
pub const PRESET_NAMES: [&str; 10] = [
    "2.0/b0.5t0.5r0.5",
    "2.0/b0.3t0.7r0.6",
    "2.0/b0.2t0.8r0.7",
    "2.0/b0.2t0.8r0.8",
    "2.0/b0.1t0.9r0.9",
    "4.0/b0.5t0.5r0.5",
    "4.0/b0.3t0.7r0.6",
    "4.0/b0.2t0.8r0.7",
    "4.0/b0.2t0.8r0.8",
    "4.0/b0.1t0.9r0.9",
];

const TRIPLES: [(f64, f64, f64); 5] = [
    (0.5, 0.5, 0.5),
    (0.3, 0.7, 0.6),
    (0.2, 0.8, 0.7),
    (0.2, 0.8, 0.8),
    (0.1, 0.9, 0.9),
];

pub fn preset(name: &str) -> Result<DiscoveryConfig> {
    let idx = PRESET_NAMES
        .iter()
        .position(|p| *p == name)
        .ok_or_else(|| Error::UnknownPreset {
            name: name.to_string(),
            valid: PRESET_NAMES.iter().map(|s| s.to_string()).collect(),
        })?;
    let d = if idx < 5 { 2.0 } else { 4.0 };
    let (b, t, r) = TRIPLES[idx % 5];
    Ok(DiscoveryConfig {
        d: DfThreshold::relative(d),
        n: 0,
        b,
        t,
        r,
        problem_threshold: 1.0,
        candidate_size_cap: None,
        min_weight_fraction: default_fraction(),
    })
}

/// Wall-clock milliseconds per stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub repair_ms: f64,
    pub candidates_ms: f64,
    pub net_ms: f64,
    pub total_ms: f64,
}

/// Diagnostics of one discovery run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub algorithm: String,
    pub repair: RepairReport,
    pub adfg_arcs_kept: usize,
    pub adfg_arcs_removed: usize,
    pub candidates: CandidateStageCounts,
    /// Places after replay pruning (`|P′|`).
    pub places_final: usize,
    pub places_pruned: usize,
    pub transitions: usize,
    pub disconnected_labeled: usize,
    pub warnings: Vec<String>,
    pub timings: StageTimings,
    /// The repaired log came from a cache instead of being recomputed.
    pub repair_cached: bool,
    pub candidates_cached: bool,
}

fn ms_since(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Output of activity selection and loop/skip repair.
#[derive(Debug, Clone)]
pub struct RepairStage {
    pub repaired: EventLog,
    pub report: RepairReport,
    pub elapsed_ms: f64,
}

/// Output of the advising DFG and the three candidate pruning steps.
#[derive(Debug, Clone)]
pub struct CandidateStage {
    pub adfg: Dfg,
    pub adfg_stats: AdvisingStats,
    pub cnd0: Vec<PlaceCandidate>,
    pub counts: CandidateStageCounts,
    pub sel: Vec<PlaceCandidate>,
    pub elapsed_ms: f64,
}

/// Output of net construction and place pruning.
#[derive(Debug, Clone)]
pub struct NetStage {
    pub net: AcceptingPetriNet,
    pub places_before: usize,
    pub places_pruned: usize,
    pub elapsed_ms: f64,
}

pub fn run_repair(log: &EventLog, problem_threshold: f64, d: DfThreshold) -> Result<RepairStage> {
    if log.is_empty() {
        return Err(Error::EmptyLog);
    }
    let start = Instant::now();
    let (repaired, report) = repair_log(log, problem_threshold, d)?;
    if repaired.activities().iter().all(Activity::is_endpoint) {
        return Err(Error::NoActivities);
    }
    Ok(RepairStage {
        repaired,
        report,
        elapsed_ms: ms_since(start),
    })
}

pub fn run_candidates(repair: &RepairStage, cfg: &DiscoveryConfig) -> Result<CandidateStage> {
    let start = Instant::now();
    let log = &repair.repaired;
    let (adfg, adfg_stats) = build_advising_dfg(log, cfg.n, cfg.min_weight_fraction);
    let enumeration = enumerate_candidates(&adfg, cfg.candidate_size_cap);
    let counts_by_activity = log.activity_multiset();
    let cnd1 = prune_balance(&enumeration.candidates, &counts_by_activity, cfg.b);
    let cnd2 = prune_fitness(&cnd1, log, cfg.t);
    let sel = select_maximal(&cnd2);
    let counts = CandidateStageCounts {
        n_cnd0: enumeration.candidates.len(),
        n_cnd1: cnd1.len(),
        n_cnd2: cnd2.len(),
        n_sel: sel.len(),
        cap_hit: enumeration.cap_hit,
    };
    Ok(CandidateStage {
        adfg,
        adfg_stats,
        cnd0: enumeration.candidates,
        counts,
        sel,
        elapsed_ms: ms_since(start),
    })
}

pub fn run_net(repair: &RepairStage, cands: &CandidateStage, r: f64) -> NetStage {
    let start = Instant::now();
    let log = &repair.repaired;
    let net = AcceptingPetriNet::construct(&cands.sel, &log.activities());
    let (net, places_pruned) = net.prune_places(log, r);
    NetStage {
        net,
        places_before: cands.sel.len(),
        places_pruned,
        elapsed_ms: ms_since(start),
    }
}

/// Collects the stage outputs into a report.
pub fn assemble_report(
    repair: &RepairStage,
    cands: &CandidateStage,
    net: &NetStage,
    repair_cached: bool,
    candidates_cached: bool,
) -> StageReport {
    let mut warnings = Vec::new();
    if cands.counts.cap_hit {
        warnings.push("candidate size cap reached; larger candidates were not enumerated".into());
    }
    if net.net.initial.is_empty() {
        warnings.push("no place is initially marked".into());
    }
    if net.net.final_marking.is_empty() {
        warnings.push("no place is marked in the final marking".into());
    }
    let repair_ms = if repair_cached { 0.0 } else { repair.elapsed_ms };
    let candidates_ms = if candidates_cached { 0.0 } else { cands.elapsed_ms };
    StageReport {
        algorithm: "alphappp".into(),
        repair: repair.report.clone(),
        adfg_arcs_kept: cands.adfg_stats.kept,
        adfg_arcs_removed: cands.adfg_stats.removed,
        candidates: cands.counts,
        places_final: net.net.net.num_places(),
        places_pruned: net.places_pruned,
        transitions: net.net.net.num_transitions(),
        disconnected_labeled: net.net.disconnected_transitions().len(),
        warnings,
        timings: StageTimings {
            repair_ms,
            candidates_ms,
            net_ms: net.elapsed_ms,
            total_ms: repair_ms + candidates_ms + net.elapsed_ms,
        },
        repair_cached,
        candidates_cached,
    }
}

/// Runs the full pipeline: augment, repair, advising DFG, candidates,
/// balance, fitness, maximal selection, net construction and place replay.
pub fn discover_alphappp(
    log: &EventLog,
    cfg: &DiscoveryConfig,
) -> Result<(AcceptingPetriNet, StageReport)> {
    cfg.validate()?;
    let repair = run_repair(log, cfg.problem_threshold, cfg.d)?;
    let cands = run_candidates(&repair, cfg)?;
    let net = run_net(&repair, &cands, cfg.r);
    let report = assemble_report(&repair, &cands, &net, false, false);
    Ok((net.net, report))
}
