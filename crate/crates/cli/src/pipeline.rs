//! Discovery glue shared by the command line and the HTTP service.

use std::fmt;
use std::sync::Arc;

use alphappp::discovery::{
    assemble_report, discover_alpha_classic_with_report, run_candidates, run_net, run_repair,
};
use alphappp::{
    AcceptingPetriNet, ActivityMultiset, DiscoveryConfig, Error, EventLog,
    StageReport, TransitionId, VariantFilter,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    #[default]
    Alphappp,
    Alpha,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Alphappp => "alphappp",
            Algorithm::Alpha => "alpha",
        })
    }
}

/// Which side of the caller a core error belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Blame {
    Input,
    Config,
}

pub fn blame(err: &Error) -> Blame {
    match err {
        Error::InvalidConfig(_) | Error::UnknownPreset { .. } => Blame::Config,
        _ => Blame::Input,
    }
}

/// A discovered net with the log it should be replayed against (the repaired
/// log for Alpha+++, the filtered input for classical Alpha).
#[derive(Debug, Clone)]
pub struct Discovered {
    pub net: AcceptingPetriNet,
    pub report: StageReport,
    pub replay_log: Arc<EventLog>,
}

impl Discovered {
    pub fn counts(&self) -> ActivityMultiset {
        self.replay_log.activity_multiset()
    }
}

pub fn discover(log: &EventLog, algorithm: Algorithm, cfg: &DiscoveryConfig) -> alphappp::Result<Discovered> {
    match algorithm {
        Algorithm::Alphappp => {
            cfg.validate()?;
            let repair = run_repair(log, cfg.problem_threshold, cfg.d)?;
            let cands = run_candidates(&repair, cfg)?;
            let net = run_net(&repair, &cands, cfg.r);
            let report = assemble_report(&repair, &cands, &net, false, false);
            Ok(Discovered {
                net: net.net,
                report,
                replay_log: Arc::new(repair.repaired),
            })
        }
        Algorithm::Alpha => {
            let (net, report) = discover_alpha_classic_with_report(log)?;
            Ok(Discovered {
                net,
                report,
                replay_log: Arc::new(log.clone()),
            })
        }
    }
}

/// `top:<k>` or `coverage:<f>`.
pub fn parse_variant_filter(s: &str) -> Result<VariantFilter, String> {
    let (kind, value) = s
        .split_once(':')
        .ok_or_else(|| format!("expected top:<k> or coverage:<f>, got `{s}`"))?;
    match kind {
        "top" => value
            .parse()
            .map(VariantFilter::TopK)
            .map_err(|_| format!("`{value}` is not a variant count")),
        "coverage" => value
            .parse()
            .map(VariantFilter::Coverage)
            .map_err(|_| format!("`{value}` is not a fraction")),
        _ => Err(format!("unknown variant filter `{kind}`; use top or coverage")),
    }
}

/// `greedy:<k>`.
pub fn parse_removal(s: &str) -> Result<usize, String> {
    match s.split_once(':') {
        Some(("greedy", k)) => k.parse().map_err(|_| format!("`{k}` is not a count")),
        _ => Err(format!("expected greedy:<k>, got `{s}`")),
    }
}

/// Removes up to `k` disconnected transitions in greedy order and returns the
/// removed ids.
pub fn remove_greedy(
    net: &AcceptingPetriNet,
    counts: &ActivityMultiset,
    k: usize,
) -> (AcceptingPetriNet, Vec<TransitionId>) {
    let order = net.greedy_removal_order(counts);
    let victims: Vec<TransitionId> = order.into_iter().take(k).collect();
    let pruned = net
        .remove_transitions(&victims)
        .expect("greedy order lists only disconnected transitions");
    (pruned, victims)
}
