#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use alphappp::{Activity, Dfg, EventLog, Trace};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub mod oracle;

pub fn act(name: &str) -> Activity {
    Activity::observed(name)
}

pub fn l1() -> EventLog {
    EventLog::from_name_variants([
        (vec!["a", "b", "c", "d"], 400),
        (vec!["a", "b", "d"], 250),
        (vec!["d", "a", "b", "c"], 4),
        (vec!["d", "a", "b"], 2),
    ])
}

pub fn l_loop() -> EventLog {
    EventLog::from_name_variants([
        (vec!["a", "b", "c", "d"], 1),
        (vec!["a", "b", "c", "a", "b", "c", "d"], 1),
    ])
}

pub fn l2() -> EventLog {
    EventLog::from_name_variants([(vec!["a", "b", "d"], 1), (vec!["a", "c", "d"], 1)])
}

pub fn l_skip() -> EventLog {
    EventLog::from_name_variants([(vec!["a", "b", "c", "d"], 10), (vec!["a", "d"], 5)])
}

pub const SEPSIS_ACTIVITIES: [&str; 16] = [
    "ER Registration",
    "ER Triage",
    "ER Sepsis Triage",
    "Leucocytes",
    "CRP",
    "LacticAcid",
    "IV Liquid",
    "IV Antibiotics",
    "Admission NC",
    "Admission IC",
    "Release A",
    "Release B",
    "Release C",
    "Release D",
    "Release E",
    "Return ER",
];

/// A hospital-style log over 16 activities and 1050 cases: triage in either
/// order, lab rounds that repeat, optional treatment and admission, one of
/// five releases, occasional returns. About 5% of cases get a swapped or
/// dropped event.
pub fn sepsis_like() -> EventLog {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e9515);
    let mut traces = Vec::with_capacity(1050);
    for _ in 0..1050 {
        let mut t: Vec<&str> = vec!["ER Registration"];
        if rng.gen_bool(0.92) {
            if rng.gen_bool(0.8) {
                t.extend(["ER Triage", "ER Sepsis Triage"]);
            } else {
                t.extend(["ER Sepsis Triage", "ER Triage"]);
            }
        }
        let mut labs = vec!["Leucocytes", "CRP"];
        if rng.gen_bool(0.6) {
            labs.push("LacticAcid");
        }
        labs.shuffle(&mut rng);
        t.extend(labs);
        if rng.gen_bool(0.55) {
            if rng.gen_bool(0.85) {
                t.extend(["IV Liquid", "IV Antibiotics"]);
            } else {
                t.push("IV Antibiotics");
            }
        }
        if rng.gen_bool(0.75) {
            t.push(if rng.gen_bool(0.9) { "Admission NC" } else { "Admission IC" });
            while rng.gen_bool(0.55) {
                let mut round = vec!["Leucocytes", "CRP"];
                round.shuffle(&mut rng);
                t.extend(round);
            }
        }
        if rng.gen_bool(0.85) {
            let x: f64 = rng.gen();
            t.push(match x {
                x if x < 0.6 => "Release A",
                x if x < 0.75 => "Release B",
                x if x < 0.85 => "Release C",
                x if x < 0.95 => "Release D",
                _ => "Release E",
            });
            if rng.gen_bool(0.2) {
                t.push("Return ER");
            }
        }
        if t.len() > 2 && rng.gen_bool(0.03) {
            let i = rng.gen_range(1..t.len() - 1);
            t.swap(i, i + 1);
        }
        if t.len() > 2 && rng.gen_bool(0.02) {
            let i = rng.gen_range(1..t.len());
            t.remove(i);
        }
        traces.push(Trace::from_names(t));
    }
    EventLog::from_traces(traces)
}

pub const RTFM_ACTIVITIES: [&str; 11] = [
    "Create Fine",
    "Send Fine",
    "Insert Fine Notification",
    "Add penalty",
    "Send for Credit Collection",
    "Payment",
    "Insert Date Appeal to Prefecture",
    "Send Appeal to Prefecture",
    "Receive Result Appeal from Prefecture",
    "Notify Result Appeal to Offender",
    "Appeal to Judge",
];

pub const RTFM_TRACES: u64 = 150_370;
pub const RTFM_EVENTS: u64 = 561_470;
pub const RTFM_VARIANTS: usize = 231;

/// A road-fine-style log with the size profile of the public log: 11
/// activities, 231 variants, 150 370 cases and 561 470 events. The nine most
/// frequent variants are fixed, the tail comes from a seeded simulation.
pub fn rtfm_like() -> EventLog {
    const TOP: [(&[usize], u64); 9] = [
        (&[0, 1, 2, 3, 4], 56_482),
        (&[0, 5], 46_371),
        (&[0, 1], 20_385),
        (&[0, 1, 2, 3, 5], 9_520),
        (&[0, 1, 2, 3, 5, 5], 3_736),
        (&[0, 1, 5], 3_301),
        (&[0, 1, 2, 6, 3, 7], 2_497),
        (&[0, 1, 2, 3, 5, 4], 1_538),
        (&[0, 5, 1], 1_385),
    ];
    let mut variants: Vec<(Vec<usize>, u64)> =
        TOP.iter().map(|(t, c)| (t.to_vec(), *c)).collect();
    let mut seen: BTreeSet<Vec<usize>> = variants.iter().map(|(t, _)| t.clone()).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(0xf1e5);
    while variants.len() < RTFM_VARIANTS {
        let t = simulate_fine(&mut rng);
        if seen.insert(t.clone()) {
            let c = rng.gen_range(1..=40);
            variants.push((t, c));
        }
    }
    fit_totals(&mut variants, RTFM_TRACES, RTFM_EVENTS);
    EventLog::from_variants(variants.into_iter().map(|(t, c)| {
        (Trace::from_names(t.into_iter().map(|i| RTFM_ACTIVITIES[i])), c)
    }))
}

fn simulate_fine(rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut t = vec![0];
    let pay = |t: &mut Vec<usize>, rng: &mut ChaCha8Rng| {
        for _ in 0..rng.gen_range(0..=3) {
            t.push(5);
        }
    };
    if rng.gen_bool(0.3) {
        pay(&mut t, rng);
    }
    t.push(1);
    if rng.gen_bool(0.2) {
        pay(&mut t, rng);
    }
    if rng.gen_bool(0.85) {
        t.push(2);
        if rng.gen_bool(0.4) {
            t.push(6);
        }
        if rng.gen_bool(0.2) {
            pay(&mut t, rng);
        }
        t.push(3);
        if rng.gen_bool(0.45) {
            t.extend([7, 8, 9]);
            if rng.gen_bool(0.3) {
                t.push(10);
            }
        } else if rng.gen_bool(0.15) {
            t.push(10);
        }
        pay(&mut t, rng);
        if rng.gen_bool(0.5) {
            t.push(4);
        }
    }
    t
}

/// Shifts multiplicities so that the trace and event totals hit the targets,
/// keeping every count at least 1.
fn fit_totals(variants: &mut [(Vec<usize>, u64)], traces: u64, events: u64) {
    let n: u64 = variants.iter().map(|(_, c)| c).sum();
    variants[0].1 = (variants[0].1 + traces).checked_sub(n).expect("trace target too small");
    loop {
        let e: i64 = variants.iter().map(|(t, c)| t.len() as i64 * *c as i64).sum();
        let delta = events as i64 - e;
        if delta == 0 {
            return;
        }
        // move traces from a variant of length l to one of length l + step
        let mut best: Option<(usize, usize, i64)> = None;
        for (i, (ti, ci)) in variants.iter().enumerate() {
            if *ci <= 1 {
                continue;
            }
            for (j, (tj, _)) in variants.iter().enumerate() {
                let step = tj.len() as i64 - ti.len() as i64;
                if step != 0 && step.signum() == delta.signum() && step.abs() <= delta.abs() {
                    if best.is_none_or(|(_, _, s)| step.abs() > s.abs()) {
                        best = Some((i, j, step));
                    }
                }
            }
        }
        let (i, j, step) = best.expect("no variant pair can close the gap");
        let k = ((delta / step) as u64).min(variants[i].1 - 1);
        variants[i].1 -= k;
        variants[j].1 += k;
    }
}

/// Minimal XES serialization, enough for the log readers.
pub fn to_xes(log: &EventLog) -> String {
    let mut out = String::from(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<log xes.version=\"1.0\">\n",
    );
    let mut case = 0u64;
    for (trace, count) in log.variants() {
        for _ in 0..count {
            case += 1;
            let _ = writeln!(out, "<trace><string key=\"concept:name\" value=\"c{case}\"/>");
            for a in trace.iter() {
                let _ = writeln!(
                    out,
                    "<event><string key=\"concept:name\" value=\"{}\"/></event>",
                    a.label().expect("observed activity")
                );
            }
            out.push_str("</trace>\n");
        }
    }
    out.push_str("</log>\n");
    out
}

/// Activity counts of an observed-only log.
pub fn observed_counts(log: &EventLog) -> BTreeMap<Activity, u64> {
    let mut m = BTreeMap::new();
    for (t, c) in log.variants() {
        for a in t.iter() {
            *m.entry(a.clone()).or_insert(0) += c;
        }
    }
    m
}

/// A random graph shaped like an advising DFG: ▶ and ■ plus `1..=max_observed`
/// activities, no arcs into ▶ or out of ■, self-loops allowed.
pub fn random_adfg(rng: &mut impl Rng, max_observed: usize) -> Dfg {
    let k = rng.gen_range(1..=max_observed);
    let observed: Vec<Activity> = (0..k).map(|i| act(&((b'a' + i as u8) as char).to_string())).collect();
    let mut nodes = vec![Activity::Start];
    nodes.extend(observed.iter().cloned());
    nodes.push(Activity::End);
    let density = rng.gen_range(0.2..0.7);
    let mut arcs = Vec::new();
    for a in &nodes {
        for b in &nodes {
            if *a == Activity::End || *b == Activity::Start || (a.is_endpoint() && b.is_endpoint()) {
                continue;
            }
            if rng.gen_bool(density) {
                arcs.push(((a.clone(), b.clone()), rng.gen_range(1..20)));
            }
        }
    }
    Dfg::from_arcs(nodes, arcs)
}
