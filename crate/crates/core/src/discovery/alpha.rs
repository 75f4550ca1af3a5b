//! The classical Alpha algorithm, kept as a baseline.

use std::collections::BTreeMap;

use crate::activity::Activity;
use crate::candidates::{enumerate_alpha_candidates, select_maximal, CandidateStageCounts};
use crate::dfg::Dfg;
use crate::error::{Error, Result};
use crate::log::EventLog;
use crate::petri::{AcceptingPetriNet, Marking, PetriNet};

use super::StageReport;

/// Classical Alpha: candidates over the unthresholded directly-follows
/// relation, maximal selection, plus a source place `i_W` feeding every start
/// activity and a sink `o_W` fed by every end activity.
pub fn discover_alpha_classic(log: &EventLog) -> Result<AcceptingPetriNet> {
    discover_alpha_classic_with_report(log).map(|(net, _)| net)
}

pub fn discover_alpha_classic_with_report(log: &EventLog) -> Result<(AcceptingPetriNet, StageReport)> {
    if log.is_augmented() {
        return Err(Error::AlreadyAugmented);
    }
    if log.is_empty() {
        return Err(Error::EmptyLog);
    }
    let dfg = Dfg::from_log(log);
    let cands = enumerate_alpha_candidates(&dfg);
    let sel = select_maximal(&cands);

    let mut net = PetriNet::new();
    let source = net.add_place("i_W", None);
    let mut tmap = BTreeMap::new();
    for a in log.activities() {
        tmap.insert(a.clone(), net.add_transition(a));
    }
    for cand in &sel {
        let p = net.add_place(cand.to_string(), Some(cand.clone()));
        for a in &cand.a1 {
            net.add_output_arc(tmap[a], p);
        }
        for a in &cand.a2 {
            net.add_input_arc(p, tmap[a]);
        }
    }
    let sink = net.add_place("o_W", None);
    for (a, b, _) in dfg.arcs() {
        if *a == Activity::Start && !b.is_endpoint() {
            net.add_input_arc(source, tmap[b]);
        }
        if *b == Activity::End && !a.is_endpoint() {
            net.add_output_arc(tmap[a], sink);
        }
    }
    let anet = AcceptingPetriNet {
        net,
        initial: [source].into_iter().collect::<Marking>(),
        final_marking: [sink].into_iter().collect::<Marking>(),
    };
    let report = StageReport {
        algorithm: "alpha".into(),
        candidates: CandidateStageCounts {
            n_cnd0: cands.len(),
            n_cnd1: cands.len(),
            n_cnd2: cands.len(),
            n_sel: sel.len(),
            cap_hit: false,
        },
        places_final: anet.net.num_places(),
        transitions: anet.net.num_transitions(),
        disconnected_labeled: anet.disconnected_transitions().len(),
        ..StageReport::default()
    };
    Ok((anet, report))
}
