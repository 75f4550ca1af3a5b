//! Accepting labelled Petri nets: construction from selected candidates,
//! replay-based place pruning, disconnected-transition handling and whole-net
//! token replay.

mod dot;
mod pnml;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;
use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use crate::activity::Activity;
use crate::candidates::{replay_indexed, LogIndex, PlaceCandidate};
use crate::error::{Error, Result};
use crate::log::{ActivityMultiset, EventLog};

pub use dot::DotOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PlaceId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TransitionId(pub usize);

impl fmt::Display for PlaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

impl fmt::Display for TransitionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.0)
    }
}

impl Serialize for PlaceId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl Serialize for TransitionId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Place {
    pub name: String,
    /// The candidate the place was built from; `None` for source/sink places.
    pub candidate: Option<PlaceCandidate>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub activity: Activity,
}

impl Transition {
    /// `None` for silent transitions.
    pub fn label(&self) -> Option<&str> {
        self.activity.label()
    }

    pub fn is_silent(&self) -> bool {
        self.label().is_none()
    }
}

/// A multiset of places.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Marking(BTreeMap<PlaceId, u64>);

impl Marking {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, p: PlaceId, n: u64) {
        if n > 0 {
            *self.0.entry(p).or_insert(0) += n;
        }
    }

    /// Removes one token, returning false if there was none.
    pub fn take(&mut self, p: PlaceId) -> bool {
        match self.0.get_mut(&p) {
            Some(n) if *n > 1 => {
                *n -= 1;
                true
            }
            Some(_) => {
                self.0.remove(&p);
                true
            }
            None => false,
        }
    }

    pub fn get(&self, p: PlaceId) -> u64 {
        self.0.get(&p).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (PlaceId, u64)> + '_ {
        self.0.iter().map(|(p, n)| (*p, *n))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.0.values().sum()
    }

    fn retain(&mut self, keep: impl Fn(PlaceId) -> bool) {
        self.0.retain(|p, _| keep(*p));
    }
}

impl FromIterator<PlaceId> for Marking {
    fn from_iter<I: IntoIterator<Item = PlaceId>>(iter: I) -> Self {
        let mut m = Marking::new();
        for p in iter {
            m.add(p, 1);
        }
        m
    }
}

impl Serialize for Marking {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (p, n) in &self.0 {
            map.serialize_entry(&p.to_string(), n)?;
        }
        map.end()
    }
}

/// A labelled Petri net. Places and transitions live in separate id spaces;
/// flow is stored as the pre- and postset of every transition.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PetriNet {
    places: BTreeMap<PlaceId, Place>,
    transitions: BTreeMap<TransitionId, Transition>,
    preset: BTreeMap<TransitionId, BTreeSet<PlaceId>>,
    postset: BTreeMap<TransitionId, BTreeSet<PlaceId>>,
}

impl PetriNet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_place(&mut self, name: impl Into<String>, candidate: Option<PlaceCandidate>) -> PlaceId {
        let id = PlaceId(self.places.keys().next_back().map_or(0, |p| p.0 + 1));
        self.places.insert(
            id,
            Place {
                name: name.into(),
                candidate,
            },
        );
        id
    }

    pub fn add_transition(&mut self, activity: Activity) -> TransitionId {
        let id = TransitionId(self.transitions.keys().next_back().map_or(0, |t| t.0 + 1));
        self.transitions.insert(id, Transition { activity });
        self.preset.insert(id, BTreeSet::new());
        self.postset.insert(id, BTreeSet::new());
        id
    }

    /// Arc `p → t`.
    pub fn add_input_arc(&mut self, p: PlaceId, t: TransitionId) {
        self.preset.entry(t).or_default().insert(p);
    }

    /// Arc `t → p`.
    pub fn add_output_arc(&mut self, t: TransitionId, p: PlaceId) {
        self.postset.entry(t).or_default().insert(p);
    }

    pub fn places(&self) -> impl Iterator<Item = (PlaceId, &Place)> + '_ {
        self.places.iter().map(|(id, p)| (*id, p))
    }

    pub fn transitions(&self) -> impl Iterator<Item = (TransitionId, &Transition)> + '_ {
        self.transitions.iter().map(|(id, t)| (*id, t))
    }

    pub fn place(&self, p: PlaceId) -> Option<&Place> {
        self.places.get(&p)
    }

    pub fn transition(&self, t: TransitionId) -> Option<&Transition> {
        self.transitions.get(&t)
    }

    pub fn num_places(&self) -> usize {
        self.places.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.transitions.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.preset.values().chain(self.postset.values()).map(BTreeSet::len).sum()
    }

    pub fn preset(&self, t: TransitionId) -> impl Iterator<Item = PlaceId> + '_ {
        self.preset.get(&t).into_iter().flatten().copied()
    }

    pub fn postset(&self, t: TransitionId) -> impl Iterator<Item = PlaceId> + '_ {
        self.postset.get(&t).into_iter().flatten().copied()
    }

    pub fn transition_for(&self, a: &Activity) -> Option<TransitionId> {
        self.transitions
            .iter()
            .find(|(_, t)| &t.activity == a)
            .map(|(id, _)| *id)
    }

    /// Flow relation in a fixed order: per transition, its input arcs then
    /// its output arcs.
    pub fn arcs(&self) -> Vec<FlowArc> {
        let mut arcs = Vec::with_capacity(self.num_arcs());
        for t in self.transitions.keys() {
            arcs.extend(self.preset(*t).map(|p| FlowArc::Input(p, *t)));
            arcs.extend(self.postset(*t).map(|p| FlowArc::Output(*t, p)));
        }
        arcs
    }

    fn is_connected(&self, t: TransitionId) -> bool {
        self.preset(t).next().is_some() || self.postset(t).next().is_some()
    }

    fn enabled(&self, t: TransitionId, m: &Marking) -> bool {
        self.preset(t).all(|p| m.get(p) > 0)
    }

    fn fire(&self, t: TransitionId, m: &mut Marking) -> bool {
        if !self.enabled(t, m) {
            return false;
        }
        for p in self.preset(t) {
            m.take(p);
        }
        for p in self.postset(t) {
            m.add(p, 1);
        }
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FlowArc {
    /// place → transition
    Input(PlaceId, TransitionId),
    /// transition → place
    Output(TransitionId, PlaceId),
}

impl FlowArc {
    pub fn endpoints(&self) -> (String, String) {
        match self {
            FlowArc::Input(p, t) => (p.to_string(), t.to_string()),
            FlowArc::Output(t, p) => (t.to_string(), p.to_string()),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AcceptingPetriNet {
    pub net: PetriNet,
    pub initial: Marking,
    pub final_marking: Marking,
}

/// Result of replaying one trace on a whole net.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ReplayOutcome {
    pub fits: bool,
    /// Index into the trace of the first event that could not be replayed;
    /// the trace length when only the final marking was missed.
    pub failed_at: Option<usize>,
}

impl AcceptingPetriNet {
    /// One place per candidate (in the given order), one transition per
    /// activity except ▶/■. Loop and skip activities become silent. ▶ in `A1`
    /// marks the place initially, ■ in `A2` marks it finally.
    pub fn construct(sel: &[PlaceCandidate], acts: &BTreeSet<Activity>) -> AcceptingPetriNet {
        let mut net = PetriNet::new();
        let mut tmap = BTreeMap::new();
        for a in acts.iter().filter(|a| !a.is_endpoint()) {
            tmap.insert(a.clone(), net.add_transition(a.clone()));
        }
        let mut initial = Marking::new();
        let mut final_marking = Marking::new();
        for cand in sel {
            let p = net.add_place(cand.to_string(), Some(cand.clone()));
            for a in &cand.a1 {
                if let Some(&t) = tmap.get(a) {
                    net.add_output_arc(t, p);
                }
            }
            for a in &cand.a2 {
                if let Some(&t) = tmap.get(a) {
                    net.add_input_arc(p, t);
                }
            }
            if cand.a1.contains(&Activity::Start) {
                initial.add(p, 1);
            }
            if cand.a2.contains(&Activity::End) {
                final_marking.add(p, 1);
            }
        }
        AcceptingPetriNet {
            net,
            initial,
            final_marking,
        }
    }

    /// Labelled transitions with empty pre- and postset.
    pub fn disconnected_transitions(&self) -> Vec<TransitionId> {
        self.net
            .transitions()
            .filter(|(id, t)| !t.is_silent() && !self.net.is_connected(*id))
            .map(|(id, _)| id)
            .collect()
    }

    /// Disconnected labelled transitions by ascending activity frequency, ties
    /// by label.
    pub fn greedy_removal_order(&self, counts: &ActivityMultiset) -> Vec<TransitionId> {
        let mut order: Vec<(u64, &str, TransitionId)> = self
            .disconnected_transitions()
            .into_iter()
            .map(|id| {
                let t = &self.net.transitions[&id];
                (counts.get(&t.activity), t.label().unwrap_or(""), id)
            })
            .collect();
        order.sort();
        order.into_iter().map(|(_, _, id)| id).collect()
    }

    /// Removes disconnected transitions. Anything else is left untouched.
    pub fn remove_transitions(&self, victims: &[TransitionId]) -> Result<AcceptingPetriNet> {
        let mut out = self.clone();
        for &v in victims {
            if !out.net.transitions.contains_key(&v) {
                return Err(Error::UnknownTransition(v.to_string()));
            }
            if out.net.is_connected(v) {
                return Err(Error::ConnectedTransition(v.to_string()));
            }
            out.net.transitions.remove(&v);
            out.net.preset.remove(&v);
            out.net.postset.remove(&v);
        }
        Ok(out)
    }

    /// Keeps the places whose replay score over their relevant traces is at
    /// least `r`; places without relevant traces are dropped. Places without a
    /// candidate (source/sink) are kept. Returns the pruned net and the number
    /// of places removed.
    pub fn prune_places(&self, log: &EventLog, r: f64) -> (AcceptingPetriNet, usize) {
        let index = LogIndex::new(log);
        let scored: Vec<(PlaceId, bool)> = self
            .net
            .places
            .par_iter()
            .map(|(id, place)| {
                let keep = match &place.candidate {
                    None => true,
                    Some(c) => index
                        .score(c, replay_indexed)
                        .is_some_and(|f| f.overall >= r),
                };
                (*id, keep)
            })
            .collect();
        let keep: BTreeSet<PlaceId> = scored.iter().filter(|(_, k)| *k).map(|(p, _)| *p).collect();
        let mut out = self.clone();
        out.net.places.retain(|p, _| keep.contains(p));
        for set in out.net.preset.values_mut().chain(out.net.postset.values_mut()) {
            set.retain(|p| keep.contains(p));
        }
        out.initial.retain(|p| keep.contains(&p));
        out.final_marking.retain(|p| keep.contains(&p));
        (out, self.net.num_places() - keep.len())
    }

    /// Token replay of a trace. ▶/■ are ignored, every other activity fires
    /// its own transition. When that transition is not enabled, a silent
    /// transition is fired first if exactly one enabled silent transition
    /// makes it enabled; the same rule reaches the final marking at the end.
    pub fn replay(&self, trace: &[Activity]) -> ReplayOutcome {
        let silent: Vec<TransitionId> = self
            .net
            .transitions()
            .filter(|(_, t)| t.is_silent())
            .map(|(id, _)| id)
            .collect();
        let mut m = self.initial.clone();
        let fail = |i| ReplayOutcome {
            fits: false,
            failed_at: Some(i),
        };
        for (i, a) in trace.iter().enumerate() {
            if a.is_endpoint() {
                continue;
            }
            let Some(t) = self.net.transition_for(a) else {
                return fail(i);
            };
            if self.net.enabled(t, &m) {
                self.net.fire(t, &mut m);
                continue;
            }
            let helpers: Vec<Marking> = silent
                .iter()
                .filter(|&&s| s != t)
                .filter_map(|&s| {
                    let mut m2 = m.clone();
                    (self.net.fire(s, &mut m2) && self.net.enabled(t, &m2)).then_some(m2)
                })
                .collect();
            match helpers.as_slice() {
                [only] => {
                    m = only.clone();
                    self.net.fire(t, &mut m);
                }
                _ => return fail(i),
            }
        }
        if m == self.final_marking {
            return ReplayOutcome {
                fits: true,
                failed_at: None,
            };
        }
        let finishers = silent
            .iter()
            .filter(|&&s| {
                let mut m2 = m.clone();
                self.net.fire(s, &mut m2) && m2 == self.final_marking
            })
            .count();
        if finishers == 1 {
            ReplayOutcome {
                fits: true,
                failed_at: None,
            }
        } else {
            fail(trace.len())
        }
    }

    /// Fraction of the log's cases that replay to the final marking.
    pub fn fitting_fraction(&self, log: &EventLog) -> f64 {
        let total = log.num_traces();
        if total == 0 {
            return 1.0;
        }
        let variants: Vec<_> = log.variants().collect();
        let fitting: u64 = variants
            .par_iter()
            .filter(|(t, _)| self.replay(t).fits)
            .map(|(_, c)| *c)
            .sum();
        fitting as f64 / total as f64
    }

    /// Fitting fraction after removing the first `0..=k` transitions of the
    /// greedy order.
    pub fn removal_curve(&self, counts: &ActivityMultiset, log: &EventLog, k: usize) -> Vec<f64> {
        let order = self.greedy_removal_order(counts);
        let k = k.min(order.len());
        (0..=k)
            .map(|i| {
                self.remove_transitions(&order[..i])
                    .expect("greedy order only lists disconnected transitions")
                    .fitting_fraction(log)
            })
            .collect()
    }

    pub fn to_pnml(&self) -> String {
        pnml::write(self)
    }

    pub fn to_dot(&self, options: &DotOptions) -> String {
        dot::write(self, options)
    }
}

/// Single-place token game: for each activity, consume if it is in `A2`, then
/// produce if it is in `A1`. Starts and must end empty.
pub fn replay_place(cand: &PlaceCandidate, trace: &[Activity]) -> bool {
    let mut k: u64 = 0;
    for a in trace {
        if cand.a2.contains(a) {
            if k == 0 {
                return false;
            }
            k -= 1;
        }
        if cand.a1.contains(a) {
            k += 1;
        }
    }
    k == 0
}

/// Share of relevant traces a place replays; `None` without relevant traces.
pub fn place_replay_score(cand: &PlaceCandidate, log: &EventLog) -> Option<f64> {
    LogIndex::new(log)
        .score(cand, replay_indexed)
        .map(|f| f.overall)
}

#[derive(Serialize)]
struct PlaceView<'a> {
    id: PlaceId,
    name: &'a str,
    #[serde(rename = "A1", skip_serializing_if = "Option::is_none")]
    a1: Option<&'a BTreeSet<Activity>>,
    #[serde(rename = "A2", skip_serializing_if = "Option::is_none")]
    a2: Option<&'a BTreeSet<Activity>>,
}

#[derive(Serialize)]
struct TransitionView<'a> {
    id: TransitionId,
    label: Option<&'a str>,
    activity: &'a Activity,
    silent: bool,
}

#[derive(Serialize)]
struct ArcView {
    source: String,
    target: String,
}

impl Serialize for AcceptingPetriNet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let places: Vec<PlaceView> = self
            .net
            .places()
            .map(|(id, p)| PlaceView {
                id,
                name: &p.name,
                a1: p.candidate.as_ref().map(|c| &c.a1),
                a2: p.candidate.as_ref().map(|c| &c.a2),
            })
            .collect();
        let transitions: Vec<TransitionView> = self
            .net
            .transitions()
            .map(|(id, t)| TransitionView {
                id,
                label: t.label(),
                activity: &t.activity,
                silent: t.is_silent(),
            })
            .collect();
        let arcs: Vec<ArcView> = self
            .net
            .arcs()
            .iter()
            .map(|a| {
                let (source, target) = a.endpoints();
                ArcView { source, target }
            })
            .collect();
        let mut map = s.serialize_map(Some(5))?;
        map.serialize_entry("places", &places)?;
        map.serialize_entry("transitions", &transitions)?;
        map.serialize_entry("arcs", &arcs)?;
        map.serialize_entry("initial_marking", &self.initial)?;
        map.serialize_entry("final_marking", &self.final_marking)?;
        map.end()
    }
}
