//! Log repair: problematic-activity removal, loop and skip detection, and
//! injection of artificial τ activities.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::activity::{Activity, Trace};
use crate::dfg::{DfThreshold, Dfg};
use crate::error::{Error, Result};
use crate::log::EventLog;

/// A detected loop: `from` (loop end, b) directly followed by `to` (loop start, a).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LoopEndpoints {
    pub from: Activity,
    pub to: Activity,
}

impl LoopEndpoints {
    pub fn new(from: impl Into<Activity>, to: impl Into<Activity>) -> Self {
        LoopEndpoints {
            from: from.into(),
            to: to.into(),
        }
    }

    /// The τ activity inserted between `from` and `to`.
    pub fn artificial(&self) -> Activity {
        Activity::Loop {
            from: name_of(&self.from),
            to: name_of(&self.to),
        }
    }
}

/// Activities that may be skipped right after `anchor`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SkipRule {
    pub anchor: Activity,
    pub skipped: BTreeSet<Activity>,
}

impl SkipRule {
    pub fn artificial(&self) -> Activity {
        skip_activity(&self.anchor, &self.skipped)
    }
}

pub type SkipRules = BTreeMap<Activity, BTreeSet<Activity>>;

fn name_of(a: &Activity) -> Arc<str> {
    match a {
        Activity::Observed(n) => n.clone(),
        other => Arc::from(other.to_string()),
    }
}

fn skip_activity(anchor: &Activity, skipped: &BTreeSet<Activity>) -> Activity {
    Activity::Skip {
        anchor: name_of(anchor),
        skipped: skipped.iter().map(name_of).collect(),
    }
}

/// What the repair stage did.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RepairReport {
    pub removed_activities: Vec<Activity>,
    pub loops: Vec<LoopEndpoints>,
    pub skip_rules: Vec<SkipRule>,
    /// Absolute weight the loop/skip threshold resolved to.
    pub resolved_d: f64,
    /// τ occurrences in the repaired log, weighted by variant count.
    pub loop_insertions: u64,
    pub skip_insertions: u64,
}

// `⇒_{≥d}` over stored arcs only, so d = 0 degrades to plain `⇒`.
fn holds(w: u64, min: f64) -> bool {
    w > 0 && w as f64 >= min
}

/// Fraction of distinct non-endpoint neighbours of `x` that are connected in
/// both directions. Zero when `x` has no such neighbour.
pub fn problem_score_in(dfg: &Dfg, x: &Activity) -> Result<f64> {
    if !dfg.nodes().contains(x) || x.is_endpoint() {
        return Err(Error::UnknownActivity(x.to_string()));
    }
    let mut neighbours = BTreeSet::new();
    for (a, b, _) in dfg.arcs() {
        if a == x && b != x && !b.is_endpoint() {
            neighbours.insert(b);
        }
        if b == x && a != x && !a.is_endpoint() {
            neighbours.insert(a);
        }
    }
    if neighbours.is_empty() {
        return Ok(0.0);
    }
    let parallel = neighbours
        .iter()
        .filter(|y| dfg.follows(x, y) && dfg.follows(y, x))
        .count();
    Ok(parallel as f64 / neighbours.len() as f64)
}

pub fn problem_score(log: &EventLog, x: &Activity) -> Result<f64> {
    problem_score_in(&Dfg::from_log(log), x)
}

/// `A′`: activities whose problem score is at most `threshold`, plus ▶/■.
pub fn select_activities(log: &EventLog, threshold: f64) -> BTreeSet<Activity> {
    let dfg = Dfg::from_log(log);
    let mut keep: BTreeSet<Activity> = dfg
        .nodes()
        .iter()
        .filter(|a| {
            a.is_endpoint() || problem_score_in(&dfg, a).is_ok_and(|s| s <= threshold)
        })
        .cloned()
        .collect();
    keep.insert(Activity::Start);
    keep.insert(Activity::End);
    keep
}

fn reachable(
    adjacency: &BTreeMap<&Activity, Vec<&Activity>>,
    from: &[&Activity],
    blocked: Option<&Activity>,
) -> HashSet<Activity> {
    let mut seen: HashSet<Activity> = HashSet::new();
    let mut queue: VecDeque<&Activity> = VecDeque::new();
    for f in from {
        if Some(*f) != blocked && seen.insert((*f).clone()) {
            queue.push_back(f);
        }
    }
    while let Some(x) = queue.pop_front() {
        for y in adjacency.get(x).into_iter().flatten() {
            if Some(*y) != blocked && seen.insert((*y).clone()) {
                queue.push_back(y);
            }
        }
    }
    seen
}

/// Loop endpoints `(b,a)`: `b ⇒ a ≥ d`, `a` is reachable from ▶ over arcs
/// `≥ d` without passing through `b`, and `b` is reachable from `a` over such
/// arcs.
pub fn detect_loops(dfg: &Dfg, d: DfThreshold) -> Result<BTreeSet<LoopEndpoints>> {
    let min = d.resolve(dfg)?;
    let mut adjacency: BTreeMap<&Activity, Vec<&Activity>> = BTreeMap::new();
    for (a, b, w) in dfg.arcs() {
        if holds(w, min) {
            adjacency.entry(a).or_default().push(b);
        }
    }
    let mut loops = BTreeSet::new();
    for (b, a, w) in dfg.arcs() {
        if !holds(w, min) || a.is_endpoint() || b.is_endpoint() {
            continue;
        }
        let successors_of_a: Vec<&Activity> = adjacency.get(a).cloned().unwrap_or_default();
        if !reachable(&adjacency, &successors_of_a, None).contains(b) {
            continue;
        }
        let blocked = if a == b { None } else { Some(b) };
        if reachable(&adjacency, &[&Activity::Start], blocked).contains(a) {
            loops.insert(LoopEndpoints {
                from: b.clone(),
                to: a.clone(),
            });
        }
    }
    Ok(loops)
}

/// `repair_◯`: single left-to-right pass turning every adjacent `(b,a)` loop
/// pair into `⟨b, τ_{b,a}, a⟩`.
pub fn repair_loops(trace: &[Activity], loops: &BTreeSet<LoopEndpoints>) -> Trace {
    if loops.is_empty() {
        return Trace::new(trace.to_vec());
    }
    let lookup: BTreeMap<(&Activity, &Activity), Activity> = loops
        .iter()
        .map(|l| ((&l.from, &l.to), l.artificial()))
        .collect();
    let mut out = Vec::with_capacity(trace.len() + 2);
    let mut i = 0;
    while i < trace.len() {
        if i + 1 < trace.len() {
            if let Some(tau) = lookup.get(&(&trace[i], &trace[i + 1])) {
                out.push(trace[i].clone());
                out.push(tau.clone());
                out.push(trace[i + 1].clone());
                i += 2;
                continue;
            }
        }
        out.push(trace[i].clone());
        i += 1;
    }
    Trace::new(out)
}

/// `skips(a, L)` for every anchor with a non-empty result.
pub fn detect_skips(dfg: &Dfg, d: DfThreshold) -> Result<SkipRules> {
    let min = d.resolve(dfg)?;
    let mut rules = SkipRules::new();
    for a in dfg.nodes() {
        if a.is_endpoint() || dfg.follows(a, a) {
            continue;
        }
        let succ_a = dfg.successors_at_least(a, min);
        let mut skipped = BTreeSet::new();
        for b in dfg.successors_at_least(a, 1.0) {
            if b.is_endpoint()
                || holds(dfg.weight(&b, a), min)
                || holds(dfg.weight(&b, &b), min)
            {
                continue;
            }
            let succ_b = dfg.successors_at_least(&b, min.max(f64::MIN_POSITIVE));
            if !succ_b.is_empty() && succ_b.is_subset(&succ_a) {
                skipped.insert(b);
            }
        }
        if !skipped.is_empty() {
            rules.insert(a.clone(), skipped);
        }
    }
    Ok(rules)
}

/// `repair_τ`: after an anchor `a`, a following `x ∈ B` is consumed together
/// with `a`; any other follower gets `τ_{a,B}` inserted in front of it.
pub fn repair_skips(trace: &[Activity], rules: &SkipRules) -> Result<Trace> {
    if rules.is_empty() {
        return Ok(Trace::new(trace.to_vec()));
    }
    let taus: BTreeMap<&Activity, Activity> = rules
        .iter()
        .map(|(a, b)| (a, skip_activity(a, b)))
        .collect();
    let mut out = Vec::with_capacity(trace.len() + 2);
    let mut i = 0;
    while i < trace.len() {
        let x = &trace[i];
        match rules.get(x) {
            None => {
                out.push(x.clone());
                i += 1;
            }
            Some(skipped) => {
                let next = trace
                    .get(i + 1)
                    .ok_or_else(|| Error::DanglingSkipAnchor(x.to_string()))?;
                out.push(x.clone());
                if skipped.contains(next) {
                    out.push(next.clone());
                    i += 2;
                } else {
                    out.push(taus[x].clone());
                    i += 1;
                }
            }
        }
    }
    Ok(Trace::new(out))
}

/// Selection, projection, loop repair and skip repair, in that order. Both
/// detections look at the DFG of the projected (unrepaired) log.
pub fn repair_log(
    log: &EventLog,
    problem_threshold: f64,
    d: DfThreshold,
) -> Result<(EventLog, RepairReport)> {
    let log = log.ensure_augmented();
    let keep = select_activities(&log, problem_threshold);
    let removed_activities: Vec<Activity> = log
        .activities()
        .into_iter()
        .filter(|a| !keep.contains(a))
        .collect();
    let projected = log.project(&keep);
    let dfg = Dfg::from_log(&projected);
    let resolved_d = d.resolve(&dfg)?;
    let loops = detect_loops(&dfg, d)?;
    let skips = detect_skips(&dfg, d)?;

    let mut repaired = EventLog::new();
    repaired.set_augmented(true);
    let mut loop_insertions = 0;
    let mut skip_insertions = 0;
    for (trace, count) in projected.variants() {
        let fixed = repair_skips(&repair_loops(trace, &loops), &skips)?;
        for a in fixed.iter() {
            match a {
                Activity::Loop { .. } => loop_insertions += count,
                Activity::Skip { .. } => skip_insertions += count,
                _ => {}
            }
        }
        repaired.add(fixed, count);
    }

    let report = RepairReport {
        removed_activities,
        loops: loops.into_iter().collect(),
        skip_rules: skips
            .into_iter()
            .map(|(anchor, skipped)| SkipRule { anchor, skipped })
            .collect(),
        resolved_d,
        loop_insertions,
        skip_insertions,
    };
    Ok((repaired, report))
}
