//! Brute-force reference implementations. They follow the set definitions
//! literally and share no code with the library beyond its data types.

use std::collections::BTreeSet;

use alphappp::{Activity, Dfg, EventLog, PlaceCandidate};

fn subsets(universe: &[Activity]) -> Vec<BTreeSet<Activity>> {
    (0u32..1 << universe.len())
        .map(|mask| {
            universe
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, a)| a.clone())
                .collect()
        })
        .collect()
}

/// All `(A1, A2)` over the graph's nodes that satisfy the four candidate
/// conditions.
pub fn cnd0(adfg: &Dfg) -> BTreeSet<PlaceCandidate> {
    let universe: Vec<Activity> = adfg.nodes().iter().cloned().collect();
    let all = subsets(&universe);
    let f = |a: &Activity, b: &Activity| adfg.weight(a, b) > 0;
    let mut out = BTreeSet::new();
    for a1 in &all {
        for a2 in &all {
            let only1: Vec<&Activity> = a1.difference(a2).collect();
            let only2: Vec<&Activity> = a2.difference(a1).collect();
            let c1 = a1.iter().all(|x| a2.iter().all(|y| f(x, y)));
            let c2 = a1.iter().all(|x| only1.iter().all(|y| !f(x, y)));
            let c3 = only2.iter().all(|x| a2.iter().all(|y| !f(x, y)));
            let c4 = only1.iter().any(|x| only2.iter().any(|y| !f(y, x)));
            if c1 && c2 && c3 && c4 {
                out.insert(PlaceCandidate::new(a1.iter().cloned(), a2.iter().cloned()));
            }
        }
    }
    out
}

/// Classical Alpha places: `A`, `B` non-empty, every pair inside `A` and
/// inside `B` unrelated (no self-loops either), `a → b` causal for all
/// pairs, then only the maximal pairs.
pub fn alpha_places(dfg: &Dfg) -> BTreeSet<PlaceCandidate> {
    let universe: Vec<Activity> = dfg.nodes().iter().filter(|a| !a.is_endpoint()).cloned().collect();
    let all: Vec<_> = subsets(&universe).into_iter().filter(|s| !s.is_empty()).collect();
    let f = |a: &Activity, b: &Activity| dfg.weight(a, b) > 0;
    let unrelated = |s: &BTreeSet<Activity>| s.iter().all(|x| s.iter().all(|y| !f(x, y)));
    let mut xs = Vec::new();
    for a in &all {
        for b in &all {
            if unrelated(a) && unrelated(b) && a.iter().all(|x| b.iter().all(|y| f(x, y) && !f(y, x))) {
                xs.push((a.clone(), b.clone()));
            }
        }
    }
    xs.iter()
        .filter(|(a, b)| {
            !xs.iter().any(|(a2, b2)| (a2, b2) != (a, b) && a.is_subset(a2) && b.is_subset(b2))
        })
        .map(|(a, b)| PlaceCandidate::new(a.iter().cloned(), b.iter().cloned()))
        .collect()
}

/// Literal six-case recursion with counter `k`.
pub fn fit(trace: &[Activity], cand: &PlaceCandidate, k: u32) -> bool {
    match trace.split_first() {
        None => k == 0,
        Some((a, rest)) => {
            let in1 = cand.a1.contains(a);
            let in2 = cand.a2.contains(a);
            if !in1 && in2 && k == 0 {
                false
            } else if in1 && !in2 {
                fit(rest, cand, k + 1)
            } else if !in1 && in2 {
                fit(rest, cand, k - 1)
            } else {
                fit(rest, cand, k)
            }
        }
    }
}

/// One place, one transition per activity; a transition with the place in
/// its preset needs a token to fire.
pub fn place_fires(trace: &[Activity], cand: &PlaceCandidate) -> bool {
    let mut tokens: i64 = 0;
    for a in trace {
        let pre = i64::from(cand.a2.contains(a));
        let post = i64::from(cand.a1.contains(a));
        if tokens < pre {
            return false;
        }
        tokens += post - pre;
    }
    tokens == 0
}

/// Share of the traces touching the place that it replays, weighted by
/// multiplicity.
pub fn place_score(cand: &PlaceCandidate, log: &EventLog) -> Option<(u64, u64)> {
    let mut num = 0;
    let mut den = 0;
    for (t, c) in log.variants() {
        if t.iter().any(|a| cand.mentions(a)) {
            den += c;
            if place_fires(t, cand) {
                num += c;
            }
        }
    }
    (den > 0).then_some((num, den))
}

/// Every sequence of length `0..=max_len` over `alphabet`.
pub fn all_traces(alphabet: &[Activity], max_len: usize) -> Vec<Vec<Activity>> {
    let mut out = vec![vec![]];
    let mut layer: Vec<Vec<Activity>> = vec![vec![]];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|t| {
                alphabet.iter().map(move |a| {
                    let mut t2 = t.clone();
                    t2.push(a.clone());
                    t2
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

/// All candidate pairs (including empty sides) over `alphabet`.
pub fn all_pairs(alphabet: &[Activity]) -> Vec<PlaceCandidate> {
    let all = subsets(alphabet);
    let mut out = Vec::new();
    for a1 in &all {
        for a2 in &all {
            out.push(PlaceCandidate::new(a1.iter().cloned(), a2.iter().cloned()));
        }
    }
    out
}
