//! PNML (place/transition net) export.
//!
//! Silent transitions carry the ProM `$invisible$` marker. The final marking
//! is written twice: as a ProM-style `<finalmarkings>` element and inside a
//! `<toolspecific tool="alphappp">` block, since core PNML has no notion of a
//! final marking.

use std::fmt::Write;

use quick_xml::escape::escape;

use super::AcceptingPetriNet;

const NET_TYPE: &str = "http://www.pnml.org/version-2009/grammar/pnmlcoremodel";

pub(super) fn write(anet: &AcceptingPetriNet) -> String {
    let net = &anet.net;
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<pnml>\n");
    let _ = writeln!(s, "  <net id=\"net1\" type=\"{NET_TYPE}\">");
    s.push_str("    <name><text>alphappp</text></name>\n");
    s.push_str("    <page id=\"n0\">\n");
    for (id, place) in net.places() {
        let _ = writeln!(s, "      <place id=\"{id}\">");
        let _ = writeln!(s, "        <name><text>{}</text></name>", escape(place.name.as_str()));
        let tokens = anet.initial.get(id);
        if tokens > 0 {
            let _ = writeln!(s, "        <initialMarking><text>{tokens}</text></initialMarking>");
        }
        s.push_str("      </place>\n");
    }
    for (id, t) in net.transitions() {
        let _ = writeln!(s, "      <transition id=\"{id}\">");
        let name = t.activity.to_string();
        let _ = writeln!(s, "        <name><text>{}</text></name>", escape(name.as_str()));
        if t.is_silent() {
            let _ = writeln!(
                s,
                "        <toolspecific tool=\"ProM\" version=\"6.4\" activity=\"$invisible$\" localNodeID=\"{id}\"/>"
            );
        }
        s.push_str("      </transition>\n");
    }
    for (i, arc) in net.arcs().iter().enumerate() {
        let (source, target) = arc.endpoints();
        let _ = writeln!(s, "      <arc id=\"a{i}\" source=\"{source}\" target=\"{target}\"/>");
    }
    s.push_str("    </page>\n");
    s.push_str("    <finalmarkings>\n      <marking>\n");
    for (p, n) in anet.final_marking.iter() {
        let _ = writeln!(s, "        <place idref=\"{p}\"><text>{n}</text></place>");
    }
    s.push_str("      </marking>\n    </finalmarkings>\n");
    s.push_str("    <toolspecific tool=\"alphappp\" version=\"1\">\n      <finalMarking>\n");
    for (p, n) in anet.final_marking.iter() {
        let _ = writeln!(s, "        <place idref=\"{p}\"><text>{n}</text></place>");
    }
    s.push_str("      </finalMarking>\n    </toolspecific>\n");
    s.push_str("  </net>\n</pnml>\n");
    s
}
