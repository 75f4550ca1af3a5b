//! Place candidates: enumeration over the advising DFG and the balance,
//! local-fitness and maximality pruning stages.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::io::Write;
use std::sync::atomic::{AtomicBool, Ordering as AtomicOrdering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::activity::Activity;
use crate::bitset::BitSet;
use crate::dfg::Dfg;
use crate::error::{Error, Result};
use crate::log::{ActivityMultiset, EventLog};

/// A pair `(A1, A2)` of producing and consuming activities.
///
/// Ordered canonically: by `|A1| + |A2|`, then `A1`, then `A2`, with sets
/// compared as sorted sequences.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PlaceCandidate {
    #[serde(rename = "A1")]
    pub a1: BTreeSet<Activity>,
    #[serde(rename = "A2")]
    pub a2: BTreeSet<Activity>,
}

impl PlaceCandidate {
    pub fn new(
        a1: impl IntoIterator<Item = Activity>,
        a2: impl IntoIterator<Item = Activity>,
    ) -> Self {
        PlaceCandidate {
            a1: a1.into_iter().collect(),
            a2: a2.into_iter().collect(),
        }
    }

    pub fn from_names<'a>(
        a1: impl IntoIterator<Item = &'a str>,
        a2: impl IntoIterator<Item = &'a str>,
    ) -> Self {
        Self::new(
            a1.into_iter().map(Activity::from),
            a2.into_iter().map(Activity::from),
        )
    }

    pub fn size(&self) -> usize {
        self.a1.len() + self.a2.len()
    }

    /// `A1 ∪ A2`
    pub fn activities(&self) -> BTreeSet<&Activity> {
        self.a1.iter().chain(&self.a2).collect()
    }

    pub fn mentions(&self, a: &Activity) -> bool {
        self.a1.contains(a) || self.a2.contains(a)
    }

    /// Componentwise `⊆`.
    pub fn dominated_by(&self, other: &PlaceCandidate) -> bool {
        self.a1.is_subset(&other.a1) && self.a2.is_subset(&other.a2)
    }
}

impl Ord for PlaceCandidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.size()
            .cmp(&other.size())
            .then_with(|| self.a1.cmp(&other.a1))
            .then_with(|| self.a2.cmp(&other.a2))
    }
}

impl PartialOrd for PlaceCandidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl std::fmt::Display for PlaceCandidate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let join = |s: &BTreeSet<Activity>| {
            s.iter()
                .map(|a| a.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(f, "({{{}}},{{{}}})", join(&self.a1), join(&self.a2))
    }
}

/// Sizes of the successive candidate sets.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateStageCounts {
    pub n_cnd0: usize,
    pub n_cnd1: usize,
    pub n_cnd2: usize,
    pub n_sel: usize,
    /// Some valid candidates were not enumerated because of the size cap.
    pub cap_hit: bool,
}

#[derive(Debug, Clone, Default)]
pub struct Enumeration {
    /// In canonical order.
    pub candidates: Vec<PlaceCandidate>,
    /// True iff a valid candidate with `|A1| + |A2|` above the cap exists.
    pub cap_hit: bool,
}

// ---------------------------------------------------------------------------
// Enumeration
//
// Writing X = A1 \ A2, Y = A2 \ A1 and Z = A1 ∩ A2, the four conditions on a
// candidate unfold into constraints per role:
//   X, Y non-empty, internally independent, no self-loops, X × Y all arcs;
//   Z only self-loop activities, pairwise connected both ways;
//   x → z and not z → x, z → y and not y → z;
//   some y does not directly precede some x.
// The search picks X, then Y from the common successors of X, then Z from the
// activities compatible with both, so every candidate is produced once.

struct Graph {
    nodes: Vec<Activity>,
    out: Vec<BitSet>,
    inn: Vec<BitSet>,
    selfloop: BitSet,
    nonself: BitSet,
}

impl Graph {
    fn new(dfg: &Dfg, include: impl Fn(&Activity) -> bool) -> Graph {
        let nodes: Vec<Activity> = dfg.nodes().iter().filter(|a| include(a)).cloned().collect();
        let index: HashMap<&Activity, usize> =
            nodes.iter().enumerate().map(|(i, a)| (a, i)).collect();
        let words = BitSet::words_for(nodes.len());
        let mut out = vec![BitSet::empty(words); nodes.len()];
        let mut inn = vec![BitSet::empty(words); nodes.len()];
        let mut selfloop = BitSet::empty(words);
        for (a, b, _) in dfg.arcs() {
            if let (Some(&i), Some(&j)) = (index.get(a), index.get(b)) {
                out[i].insert(j);
                inn[j].insert(i);
                if i == j {
                    selfloop.insert(i);
                }
            }
        }
        let nonself = BitSet::full(nodes.len()).and_not(&selfloop);
        Graph {
            nodes,
            out,
            inn,
            selfloop,
            nonself,
        }
    }

    /// Successors of `v`; without the Alpha+++ clauses only those that do not
    /// also precede `v`.
    fn causal_out(&self, v: usize, plus: bool) -> BitSet {
        if plus {
            self.out[v].clone()
        } else {
            self.out[v].and_not(&self.inn[v])
        }
    }

    fn neighbours(&self, v: usize) -> BitSet {
        self.out[v].or(&self.inn[v])
    }

    fn candidate(&self, a1: &BitSet, a2: &BitSet) -> PlaceCandidate {
        PlaceCandidate {
            a1: a1.iter().map(|i| self.nodes[i].clone()).collect(),
            a2: a2.iter().map(|i| self.nodes[i].clone()).collect(),
        }
    }
}

struct Search<'g> {
    g: &'g Graph,
    /// With intersections Z and the "some y does not precede some x" clause.
    plus: bool,
    cap: Option<usize>,
    /// Largest size worth exploring: every valid candidate above the cap has a
    /// valid sub-candidate at most two elements above it.
    limit: usize,
    cap_hit: &'g AtomicBool,
    found: Vec<(BitSet, BitSet)>,
}

impl Search<'_> {
    /// Returns false when the candidate lies above the cap.
    fn record(&mut self, a1: BitSet, a2: BitSet, size: usize) -> bool {
        if self.cap.is_some_and(|c| size > c) {
            self.cap_hit.store(true, AtomicOrdering::Relaxed);
            false
        } else {
            self.found.push((a1, a2));
            true
        }
    }

    fn grow_x(&mut self, x: &BitSet, nx: usize, can_y: &BitSet, can_z: &BitSet, ext: &BitSet) {
        let empty = BitSet::empty(x.words());
        self.grow_y(x, nx, &empty, 0, can_z, can_y);
        if nx + 2 > self.limit {
            return;
        }
        for v in ext.iter() {
            let can_y = can_y.and(&self.g.causal_out(v, self.plus));
            if can_y.is_empty() {
                continue;
            }
            let mut x2 = x.clone();
            x2.insert(v);
            let can_z = can_z.and(&self.g.out[v].and_not(&self.g.inn[v]));
            let ext = ext.above(v).and_not(&self.g.neighbours(v));
            self.grow_x(&x2, nx + 1, &can_y, &can_z, &ext);
        }
    }

    fn grow_y(&mut self, x: &BitSet, nx: usize, y: &BitSet, ny: usize, can_z: &BitSet, ext: &BitSet) {
        if ny > 0 && self.separated(x, y) {
            self.emit_with_z(x, y, nx + ny, can_z);
        }
        if nx + ny + 1 > self.limit {
            return;
        }
        for w in ext.iter() {
            let mut y2 = y.clone();
            y2.insert(w);
            let can_z = can_z.and(&self.g.inn[w].and_not(&self.g.out[w]));
            let ext = ext.above(w).and_not(&self.g.neighbours(w));
            self.grow_y(x, nx, &y2, ny + 1, &can_z, &ext);
        }
    }

    fn separated(&self, x: &BitSet, y: &BitSet) -> bool {
        !self.plus || y.iter().any(|w| !x.is_subset(&self.g.out[w]))
    }

    fn emit_with_z(&mut self, x: &BitSet, y: &BitSet, size: usize, can_z: &BitSet) {
        if self.record(x.clone(), y.clone(), size) && self.plus {
            let z = BitSet::empty(x.words());
            self.grow_z(x, y, &z, size, can_z);
        }
    }

    fn grow_z(&mut self, x: &BitSet, y: &BitSet, z: &BitSet, size: usize, ext: &BitSet) {
        if size + 2 > self.limit {
            return;
        }
        for v in ext.iter() {
            let mut z2 = z.clone();
            z2.insert(v);
            if self.record(x.or(&z2), y.or(&z2), size + 2) {
                let ext = ext.above(v).and(&self.g.out[v]).and(&self.g.inn[v]);
                self.grow_z(x, y, &z2, size + 2, &ext);
            }
        }
    }
}

fn run_search(g: &Graph, plus: bool, cap: Option<usize>) -> Enumeration {
    let cap_hit = AtomicBool::new(false);
    let limit = cap.map_or(usize::MAX, |c| c.saturating_add(2));
    let starts: Vec<usize> = g.nonself.iter().collect();
    let mut found: Vec<(BitSet, BitSet)> = starts
        .par_iter()
        .flat_map_iter(|&v| {
            let mut s = Search {
                g,
                plus,
                cap,
                limit,
                cap_hit: &cap_hit,
                found: Vec::new(),
            };
            let can_y = g.causal_out(v, plus).and(&g.nonself);
            if !can_y.is_empty() && limit >= 2 {
                let mut x = BitSet::empty(g.selfloop.words());
                x.insert(v);
                let can_z = g.selfloop.and(&g.out[v].and_not(&g.inn[v]));
                let ext = g.nonself.above(v).and_not(&g.neighbours(v));
                s.grow_x(&x, 1, &can_y, &can_z, &ext);
            }
            s.found
        })
        .collect();
    found.par_sort_unstable_by(|(a1, a2), (b1, b2)| {
        (a1.len() + a2.len())
            .cmp(&(b1.len() + b2.len()))
            .then_with(|| a1.lex_cmp(b1))
            .then_with(|| a2.lex_cmp(b2))
    });
    Enumeration {
        candidates: found.par_iter().map(|(a1, a2)| g.candidate(a1, a2)).collect(),
        cap_hit: cap_hit.load(AtomicOrdering::Relaxed),
    }
}

/// `Cnd₀` over an advising DFG, optionally limited to `|A1| + |A2| ≤ cap`.
pub fn enumerate_candidates(adfg: &Dfg, cap: Option<usize>) -> Enumeration {
    let g = Graph::new(adfg, |_| true);
    run_search(&g, true, cap)
}

/// Classical Alpha candidates over a DFG: `A` and `B` internally unrelated,
/// every `a ∈ A` directly followed by every `b ∈ B` and never the reverse.
/// Endpoints are ignored.
pub fn enumerate_alpha_candidates(dfg: &Dfg) -> Vec<PlaceCandidate> {
    let g = Graph::new(dfg, |a| !a.is_endpoint());
    run_search(&g, false, None).candidates
}

// ---------------------------------------------------------------------------
// Token rules

/// The counter check used during pruning: produce-only increments, consume-only
/// decrements and fails at zero, everything else is neutral. Accepts iff the
/// counter ends at zero.
pub fn fit_trace(trace: &[Activity], cand: &PlaceCandidate) -> bool {
    let mut k: u64 = 0;
    for a in trace {
        match (cand.a1.contains(a), cand.a2.contains(a)) {
            (true, false) => k += 1,
            (false, true) => {
                if k == 0 {
                    return false;
                }
                k -= 1;
            }
            _ => {}
        }
    }
    k == 0
}

pub(crate) fn fit_indexed(seq: &[u32], a1: &BitSet, a2: &BitSet) -> bool {
    let mut k: u64 = 0;
    for &a in seq {
        let a = a as usize;
        match (a1.contains(a), a2.contains(a)) {
            (true, false) => k += 1,
            (false, true) => {
                if k == 0 {
                    return false;
                }
                k -= 1;
            }
            _ => {}
        }
    }
    k == 0
}

/// Single-place token game: consume (if in A2) before produce (if in A1),
/// start and end empty.
pub(crate) fn replay_indexed(seq: &[u32], a1: &BitSet, a2: &BitSet) -> bool {
    let mut k: u64 = 0;
    for &a in seq {
        let a = a as usize;
        if a2.contains(a) {
            if k == 0 {
                return false;
            }
            k -= 1;
        }
        if a1.contains(a) {
            k += 1;
        }
    }
    k == 0
}

/// A log encoded over activity indices, shared by the fitness stage and place
/// replay.
pub(crate) struct LogIndex {
    index: HashMap<Activity, usize>,
    words: usize,
    variants: Vec<(Vec<u32>, u64)>,
    presence: Vec<BitSet>,
}

impl LogIndex {
    pub fn new(log: &EventLog) -> LogIndex {
        let acts = log.activities();
        let index: HashMap<Activity, usize> =
            acts.into_iter().enumerate().map(|(i, a)| (a, i)).collect();
        let words = BitSet::words_for(index.len());
        let mut variants = Vec::with_capacity(log.num_variants());
        let mut presence = Vec::with_capacity(log.num_variants());
        for (trace, count) in log.variants() {
            let seq: Vec<u32> = trace.iter().map(|a| index[a] as u32).collect();
            let mut p = BitSet::empty(words);
            for &a in &seq {
                p.insert(a as usize);
            }
            variants.push((seq, count));
            presence.push(p);
        }
        LogIndex {
            index,
            words,
            variants,
            presence,
        }
    }

    /// Index sets of A1 and A2; activities absent from the log are dropped
    /// since they never occur in a trace.
    pub fn roles(&self, cand: &PlaceCandidate) -> (BitSet, BitSet) {
        let set = |s: &BTreeSet<Activity>| {
            let mut b = BitSet::empty(self.words);
            for a in s {
                if let Some(&i) = self.index.get(a) {
                    b.insert(i);
                }
            }
            b
        };
        (set(&cand.a1), set(&cand.a2))
    }

    /// Overall and per-activity minimum acceptance ratios over the relevant
    /// traces, `None` when no trace is relevant.
    pub fn score(
        &self,
        cand: &PlaceCandidate,
        rule: fn(&[u32], &BitSet, &BitSet) -> bool,
    ) -> Option<Fitness> {
        let (a1, a2) = self.roles(cand);
        let both = a1.or(&a2);
        let mut total = 0u64;
        let mut fitting = 0u64;
        let mut per: HashMap<usize, (u64, u64)> = HashMap::new();
        for ((seq, count), p) in self.variants.iter().zip(&self.presence) {
            let mentioned = p.and(&both);
            if mentioned.is_empty() {
                continue;
            }
            let ok = rule(seq, &a1, &a2);
            total += count;
            if ok {
                fitting += count;
            }
            for a in mentioned.iter() {
                let e = per.entry(a).or_insert((0, 0));
                e.1 += count;
                if ok {
                    e.0 += count;
                }
            }
        }
        if total == 0 {
            return None;
        }
        let mfit = per
            .values()
            .map(|&(num, den)| num as f64 / den as f64)
            .fold(f64::INFINITY, f64::min);
        Some(Fitness {
            overall: fitting as f64 / total as f64,
            mfit,
        })
    }
}

/// Local fitness of a candidate over its relevant traces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fitness {
    pub overall: f64,
    pub mfit: f64,
}

impl Fitness {
    pub fn passes(&self, t: f64) -> bool {
        self.overall >= t && self.mfit >= t
    }
}

// ---------------------------------------------------------------------------
// Pruning

/// `|count(A1) − count(A2)| / max(count(A1), count(A2))`
pub fn balance(counts: &ActivityMultiset, cand: &PlaceCandidate) -> Result<f64> {
    let c1 = counts.count(&cand.a1);
    let c2 = counts.count(&cand.a2);
    let max = c1.max(c2);
    if max == 0 {
        return Err(Error::UndefinedBalance);
    }
    Ok(c1.abs_diff(c2) as f64 / max as f64)
}

/// `Cnd₁`: balance at most `b`. Order is preserved.
pub fn prune_balance(
    cands: &[PlaceCandidate],
    counts: &ActivityMultiset,
    b: f64,
) -> Vec<PlaceCandidate> {
    cands
        .par_iter()
        .filter(|c| balance(counts, c).is_ok_and(|v| v <= b))
        .cloned()
        .collect()
}

/// Traces (with multiplicity) that contain an activity of `A1 ∪ A2`.
pub fn relevant_traces(log: &EventLog, cand: &PlaceCandidate) -> EventLog {
    let mut rel = EventLog::new();
    rel.set_augmented(log.is_augmented());
    for (trace, count) in log.variants() {
        if trace.iter().any(|a| cand.mentions(a)) {
            rel.add(trace.clone(), count);
        }
    }
    rel
}

pub fn candidate_fitness(log: &EventLog, cand: &PlaceCandidate) -> Option<Fitness> {
    LogIndex::new(log).score(cand, fit_indexed)
}

/// `Cnd₂`: overall and per-activity fitness both at least `t`. Candidates
/// without relevant traces are dropped. Order is preserved.
pub fn prune_fitness(cands: &[PlaceCandidate], log: &EventLog, t: f64) -> Vec<PlaceCandidate> {
    let index = LogIndex::new(log);
    cands
        .par_iter()
        .filter(|c| index.score(c, fit_indexed).is_some_and(|f| f.passes(t)))
        .cloned()
        .collect()
}

/// `Sel`: the componentwise-maximal candidates, in canonical order.
pub fn select_maximal(cands: &[PlaceCandidate]) -> Vec<PlaceCandidate> {
    let universe: BTreeSet<&Activity> = cands.iter().flat_map(|c| c.activities()).collect();
    let index: HashMap<&Activity, usize> =
        universe.iter().enumerate().map(|(i, a)| (*a, i)).collect();
    let words = BitSet::words_for(index.len());
    let encode = |s: &BTreeSet<Activity>| {
        let mut b = BitSet::empty(words);
        for a in s {
            b.insert(index[a]);
        }
        b
    };
    let mut order: Vec<usize> = (0..cands.len()).collect();
    order.sort_by(|&i, &j| cands[j].size().cmp(&cands[i].size()).then(i.cmp(&j)));

    let mut kept: Vec<(BitSet, BitSet, usize)> = Vec::new();
    for i in order {
        let (a1, a2) = (encode(&cands[i].a1), encode(&cands[i].a2));
        let dominated = kept
            .iter()
            .any(|(k1, k2, _)| a1.is_subset(k1) && a2.is_subset(k2));
        if !dominated {
            kept.push((a1, a2, i));
        }
    }
    let mut sel: Vec<PlaceCandidate> = kept.into_iter().map(|(_, _, i)| cands[i].clone()).collect();
    sel.sort();
    sel.dedup();
    sel
}

// ---------------------------------------------------------------------------
// Candidate dump

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Cnd0,
    Cnd1,
    Cnd2,
    Sel,
}

/// One line of the candidate dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    #[serde(rename = "A1")]
    pub a1: BTreeSet<Activity>,
    #[serde(rename = "A2")]
    pub a2: BTreeSet<Activity>,
    pub balance: Option<f64>,
    pub overall: Option<f64>,
    pub mfit: Option<f64>,
    pub stage_survived: Stage,
}

/// Scores every candidate and records the last stage it survived. Fitness is
/// only computed for candidates that pass the balance stage.
pub fn evaluate_candidates(
    cnd0: &[PlaceCandidate],
    log: &EventLog,
    b: f64,
    t: f64,
) -> Vec<CandidateRecord> {
    let counts = log.activity_multiset();
    let index = LogIndex::new(log);
    let mut records: Vec<CandidateRecord> = cnd0
        .par_iter()
        .map(|c| {
            let bal = balance(&counts, c).ok();
            let mut stage = Stage::Cnd0;
            let mut fit = None;
            if bal.is_some_and(|v| v <= b) {
                stage = Stage::Cnd1;
                fit = index.score(c, fit_indexed);
                if fit.is_some_and(|f| f.passes(t)) {
                    stage = Stage::Cnd2;
                }
            }
            CandidateRecord {
                a1: c.a1.clone(),
                a2: c.a2.clone(),
                balance: bal,
                overall: fit.map(|f| f.overall),
                mfit: fit.map(|f| f.mfit),
                stage_survived: stage,
            }
        })
        .collect();
    let cnd2: Vec<PlaceCandidate> = records
        .iter()
        .filter(|r| r.stage_survived == Stage::Cnd2)
        .map(|r| PlaceCandidate {
            a1: r.a1.clone(),
            a2: r.a2.clone(),
        })
        .collect();
    let sel: BTreeSet<PlaceCandidate> = select_maximal(&cnd2).into_iter().collect();
    for r in &mut records {
        if r.stage_survived == Stage::Cnd2
            && sel.contains(&PlaceCandidate {
                a1: r.a1.clone(),
                a2: r.a2.clone(),
            })
        {
            r.stage_survived = Stage::Sel;
        }
    }
    records
}

pub fn write_jsonl<W: Write>(records: &[CandidateRecord], mut out: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
