//! Weighted directly-follows graphs and the advising DFG.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::activity::Activity;
use crate::error::{Error, Result};
use crate::log::EventLog;

/// Directly-follows graph with artificial ▶/■ nodes. Arcs with weight zero
/// are never stored, so no arc enters ▶ and none leaves ■.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dfg {
    nodes: BTreeSet<Activity>,
    arcs: BTreeMap<(Activity, Activity), u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdMode {
    Absolute,
    /// Multiplied by the mean arc weight of the graph it is applied to.
    Relative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DfThreshold {
    pub value: f64,
    pub mode: ThresholdMode,
}

impl DfThreshold {
    pub fn absolute(value: f64) -> Self {
        DfThreshold {
            value,
            mode: ThresholdMode::Absolute,
        }
    }

    pub fn relative(value: f64) -> Self {
        DfThreshold {
            value,
            mode: ThresholdMode::Relative,
        }
    }

    /// Absolute weight this threshold stands for on `dfg`.
    pub fn resolve(&self, dfg: &Dfg) -> Result<f64> {
        match self.mode {
            ThresholdMode::Absolute => Ok(self.value),
            ThresholdMode::Relative => Ok(self.value * dfg.mean_weight()?),
        }
    }
}

/// Counts of the advising-DFG filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdvisingStats {
    pub kept: usize,
    pub removed: usize,
}

impl Dfg {
    /// `disc_dfg(L)`; augments the log first if needed.
    pub fn from_log(log: &EventLog) -> Dfg {
        let augmented;
        let log = if log.is_augmented() {
            log
        } else {
            augmented = log.ensure_augmented();
            &augmented
        };
        let mut dfg = Dfg::default();
        for (trace, count) in log.variants() {
            dfg.nodes.extend(trace.iter().cloned());
            for pair in trace.windows(2) {
                *dfg.arcs
                    .entry((pair[0].clone(), pair[1].clone()))
                    .or_insert(0) += count;
            }
        }
        dfg
    }

    /// Builds a graph from explicit arcs; zero weights are dropped and arc
    /// endpoints become nodes.
    pub fn from_arcs<I>(nodes: impl IntoIterator<Item = Activity>, arcs: I) -> Dfg
    where
        I: IntoIterator<Item = ((Activity, Activity), u64)>,
    {
        let mut dfg = Dfg {
            nodes: nodes.into_iter().collect(),
            arcs: BTreeMap::new(),
        };
        for ((a, b), w) in arcs {
            if w > 0 {
                dfg.nodes.insert(a.clone());
                dfg.nodes.insert(b.clone());
                *dfg.arcs.entry((a, b)).or_insert(0) += w;
            }
        }
        dfg
    }

    pub fn nodes(&self) -> &BTreeSet<Activity> {
        &self.nodes
    }

    pub fn arcs(&self) -> impl Iterator<Item = (&Activity, &Activity, u64)> + '_ {
        self.arcs.iter().map(|((a, b), w)| (a, b, *w))
    }

    pub fn num_arcs(&self) -> usize {
        self.arcs.len()
    }

    /// `⇒(a,b)`, zero when absent.
    pub fn weight(&self, a: &Activity, b: &Activity) -> u64 {
        // BTreeMap lookup needs an owned tuple key.
        self.arcs
            .get(&(a.clone(), b.clone()))
            .copied()
            .unwrap_or(0)
    }

    /// `a ⇒ b`: strictly positive weight.
    pub fn follows(&self, a: &Activity, b: &Activity) -> bool {
        self.weight(a, b) > 0
    }

    /// `a ⇒_{≥t} b`
    pub fn df_holds(&self, a: &Activity, b: &Activity, threshold: DfThreshold) -> Result<bool> {
        Ok(self.weight(a, b) as f64 >= threshold.resolve(self)?)
    }

    /// Mean of all stored arc weights.
    pub fn mean_weight(&self) -> Result<f64> {
        if self.arcs.is_empty() {
            return Err(Error::EmptyDfg);
        }
        Ok(self.arcs.values().sum::<u64>() as f64 / self.arcs.len() as f64)
    }

    pub fn outgoing_sum(&self, a: &Activity) -> u64 {
        self.arcs
            .iter()
            .filter(|((x, _), _)| x == a)
            .map(|(_, w)| *w)
            .sum()
    }

    pub fn incoming_sum(&self, b: &Activity) -> u64 {
        self.arcs
            .iter()
            .filter(|((_, y), _)| y == b)
            .map(|(_, w)| *w)
            .sum()
    }

    /// `{y | a ⇒ y ≥ min}`
    pub fn successors_at_least(&self, a: &Activity, min: f64) -> BTreeSet<Activity> {
        self.arcs
            .range((a.clone(), Activity::Start)..)
            .take_while(|((x, _), _)| x == a)
            .filter(|(_, w)| **w as f64 >= min)
            .map(|((_, y), _)| y.clone())
            .collect()
    }

    /// Same node set, only arcs with weight ≥ `min`.
    pub fn restrict(&self, min: f64) -> Dfg {
        Dfg {
            nodes: self.nodes.clone(),
            arcs: self
                .arcs
                .iter()
                .filter(|(_, w)| **w as f64 >= min)
                .map(|(k, w)| (k.clone(), *w))
                .collect(),
        }
    }

    /// Removes every arc `(a,b)` with weight below `max(n, fraction · min(in(b), out(a)))`,
    /// sums taken on the unpruned graph. Nodes are kept even if isolated.
    pub fn advising(&self, n: u64, fraction: f64) -> (Dfg, AdvisingStats) {
        let mut out_sum: BTreeMap<&Activity, u64> = BTreeMap::new();
        let mut in_sum: BTreeMap<&Activity, u64> = BTreeMap::new();
        for ((a, b), w) in &self.arcs {
            *out_sum.entry(a).or_insert(0) += w;
            *in_sum.entry(b).or_insert(0) += w;
        }
        let mut arcs = BTreeMap::new();
        for ((a, b), w) in &self.arcs {
            let min_w = fraction * in_sum[b].min(out_sum[a]) as f64;
            if *w as f64 >= (n as f64).max(min_w) {
                arcs.insert((a.clone(), b.clone()), *w);
            }
        }
        let stats = AdvisingStats {
            kept: arcs.len(),
            removed: self.arcs.len() - arcs.len(),
        };
        (
            Dfg {
                nodes: self.nodes.clone(),
                arcs,
            },
            stats,
        )
    }

    /// Graphviz rendering with weight labels; ▶ first, ■ last, others sorted.
    pub fn to_dot(&self) -> String {
        let ids: BTreeMap<&Activity, usize> =
            self.nodes.iter().enumerate().map(|(i, a)| (a, i)).collect();
        let mut s = String::from("digraph dfg {\n  rankdir=LR;\n  node [shape=box, style=rounded];\n");
        for (a, i) in &ids {
            let shape = match a {
                Activity::Start | Activity::End => ", shape=circle",
                _ => "",
            };
            let _ = writeln!(s, "  n{i} [label=\"{}\"{shape}];", dot_escape(&a.to_string()));
        }
        for ((a, b), w) in &self.arcs {
            let _ = writeln!(s, "  n{} -> n{} [label=\"{w}\"];", ids[a], ids[b]);
        }
        s.push_str("}\n");
        s
    }
}

/// `build_advising_dfg`: the repaired log's DFG after the relative (`fraction`,
/// normally 1%) and absolute (`n`) cutoffs.
pub fn build_advising_dfg(repaired: &EventLog, n: u64, fraction: f64) -> (Dfg, AdvisingStats) {
    Dfg::from_log(repaired).advising(n, fraction)
}

pub(crate) fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(s: &str) -> Activity {
        Activity::observed(s)
    }

    fn l1() -> EventLog {
        EventLog::from_name_variants([
            (vec!["a", "b", "c", "d"], 400),
            (vec!["a", "b", "d"], 250),
            (vec!["d", "a", "b", "c"], 4),
            (vec!["d", "a", "b"], 2),
        ])
    }

    #[test]
    fn l1_arc_weights() {
        let dfg = Dfg::from_log(&l1());
        let (s, e) = (Activity::Start, Activity::End);
        let expected = [
            ((s.clone(), a("a")), 650),
            ((s.clone(), a("d")), 6),
            ((a("a"), a("b")), 656),
            ((a("b"), a("c")), 404),
            ((a("b"), a("d")), 250),
            ((a("b"), e.clone()), 2),
            ((a("c"), a("d")), 400),
            ((a("c"), e.clone()), 4),
            ((a("d"), a("a")), 6),
            ((a("d"), e.clone()), 650),
        ];
        assert_eq!(dfg.num_arcs(), expected.len());
        for ((x, y), w) in expected {
            assert_eq!(dfg.weight(&x, &y), w, "{x}→{y}");
        }
        assert_eq!(dfg.weight(&a("c"), &a("b")), 0);
        assert_eq!(dfg.weight(&e, &s), 0);
        // 3028 / 10
        assert_eq!(dfg.mean_weight().unwrap(), 302.8);
    }

    #[test]
    fn empty_trace_gives_start_end_arc() {
        let log = EventLog::from_variants([(crate::Trace::default(), 3)]);
        let dfg = Dfg::from_log(&log);
        assert_eq!(dfg.weight(&Activity::Start, &Activity::End), 3);
    }

    #[test]
    fn self_loop_arc() {
        let dfg = Dfg::from_log(&EventLog::from_name_variants([(vec!["a", "a"], 1)]));
        assert_eq!(dfg.weight(&a("a"), &a("a")), 1);
    }

    #[test]
    fn threshold_semantics() {
        let dfg = Dfg::from_log(&l1());
        assert!(dfg.df_holds(&a("b"), &a("d"), DfThreshold::absolute(250.0)).unwrap());
        assert!(!dfg.df_holds(&a("b"), &a("d"), DfThreshold::absolute(251.0)).unwrap());
        assert!(dfg.df_holds(&a("c"), &a("b"), DfThreshold::absolute(0.0)).unwrap());
        // 1.0 × mean 302.8
        assert!(dfg.df_holds(&a("c"), &a("d"), DfThreshold::relative(1.0)).unwrap());
        assert!(!dfg.df_holds(&a("b"), &a("d"), DfThreshold::relative(1.0)).unwrap());
    }

    #[test]
    fn mean_weight_examples() {
        let d = Dfg::from_arcs([], [((a("x"), a("y")), 2), ((a("y"), a("z")), 4)]);
        assert_eq!(d.mean_weight().unwrap(), 3.0);
        let d = Dfg::from_arcs([], [((a("x"), a("y")), 7)]);
        assert_eq!(d.mean_weight().unwrap(), 7.0);
        assert!(matches!(Dfg::default().mean_weight(), Err(Error::EmptyDfg)));
    }

    #[test]
    fn advising_dfg_on_l1() {
        let dfg = Dfg::from_log(&l1());
        let (adfg, stats) = dfg.advising(0, 0.01);
        // b→■ (2) and c→■ (4) fall below 1% of ■'s 656 incoming, ▶→d and d→a (6) below 6.56
        assert_eq!(adfg.weight(&a("b"), &Activity::End), 0);
        assert_eq!(adfg.weight(&a("c"), &Activity::End), 0);
        assert_eq!(adfg.weight(&Activity::Start, &a("d")), 0);
        assert_eq!(adfg.weight(&a("d"), &a("a")), 0);
        assert_eq!(adfg.weight(&a("a"), &a("b")), 656);
        assert_eq!(stats, AdvisingStats { kept: 6, removed: 4 });
        assert_eq!(adfg.nodes(), dfg.nodes());

        let (none, _) = dfg.advising(10_000, 0.01);
        assert_eq!(none.num_arcs(), 0);
        assert_eq!(none.nodes().len(), 6);
    }

    #[test]
    fn advising_boundary_is_inclusive() {
        // in(b) = 100, out(a) = 100 → minW = 1.0; an arc of weight exactly 1 survives
        let d = Dfg::from_arcs(
            [],
            [
                ((a("a"), a("b")), 1),
                ((a("a"), a("c")), 99),
                ((a("x"), a("b")), 99),
            ],
        );
        let (adfg, _) = d.advising(0, 0.01);
        assert_eq!(adfg.weight(&a("a"), &a("b")), 1);
        let (adfg, _) = d.advising(2, 0.01);
        assert_eq!(adfg.weight(&a("a"), &a("b")), 0);
    }

    #[test]
    fn dot_orders_endpoints() {
        let dot = Dfg::from_log(&l1()).to_dot();
        let start = dot.find("label=\"▶\"").unwrap();
        let first_obs = dot.find("label=\"a\"").unwrap();
        let end = dot.find("label=\"■\"").unwrap();
        assert!(start < first_obs && first_obs < end);
        assert_eq!(dot, Dfg::from_log(&l1()).to_dot());
    }
}
