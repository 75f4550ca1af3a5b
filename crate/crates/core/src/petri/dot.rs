//! Graphviz export. Places are circles, transitions boxes, silent transitions
//! small filled black boxes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use super::{AcceptingPetriNet, FlowArc, PlaceId, TransitionId};
use crate::dfg::dot_escape;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DotOptions {
    /// Draw every connected fragment in its own cluster, with artificial ▶/■
    /// boxes feeding the initially marked places and draining the finally
    /// marked ones. Presentation only.
    pub fragments: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Node {
    P(PlaceId),
    T(TransitionId),
}

fn fragments(anet: &AcceptingPetriNet) -> Vec<BTreeSet<Node>> {
    let mut parent: BTreeMap<Node, Node> = BTreeMap::new();
    fn find(parent: &mut BTreeMap<Node, Node>, n: Node) -> Node {
        let p = *parent.entry(n).or_insert(n);
        if p == n {
            return n;
        }
        let root = find(parent, p);
        parent.insert(n, root);
        root
    }
    for (p, _) in anet.net.places() {
        find(&mut parent, Node::P(p));
    }
    for (t, _) in anet.net.transitions() {
        find(&mut parent, Node::T(t));
    }
    for arc in anet.net.arcs() {
        let (a, b) = match arc {
            FlowArc::Input(p, t) | FlowArc::Output(t, p) => (Node::P(p), Node::T(t)),
        };
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent.insert(ra.max(rb), ra.min(rb));
        }
    }
    let mut groups: BTreeMap<Node, BTreeSet<Node>> = BTreeMap::new();
    let nodes: Vec<Node> = parent.keys().copied().collect();
    for n in nodes {
        let r = find(&mut parent, n);
        groups.entry(r).or_default().insert(n);
    }
    groups.into_values().collect()
}

fn node_line(anet: &AcceptingPetriNet, n: Node, indent: &str, s: &mut String) {
    match n {
        Node::P(p) => {
            let tokens = anet.initial.get(p);
            let label = match tokens {
                0 => String::new(),
                1 => "●".to_string(),
                k => k.to_string(),
            };
            let periph = if anet.final_marking.get(p) > 0 { ", peripheries=2" } else { "" };
            let _ = writeln!(
                s,
                "{indent}{p} [shape=circle, width=0.4, fixedsize=true, label=\"{label}\"{periph}];"
            );
        }
        Node::T(t) => {
            let tr = anet.net.transition(t).expect("node of this net");
            match tr.label() {
                Some(l) => {
                    let _ = writeln!(s, "{indent}{t} [shape=box, label=\"{}\"];", dot_escape(l));
                }
                None => {
                    let _ = writeln!(
                        s,
                        "{indent}{t} [shape=box, style=filled, fillcolor=black, width=0.15, height=0.4, label=\"\", tooltip=\"{}\"];",
                        dot_escape(&tr.activity.to_string())
                    );
                }
            }
        }
    }
}

pub(super) fn write(anet: &AcceptingPetriNet, options: &DotOptions) -> String {
    let mut s = String::from("digraph net {\n  rankdir=LR;\n  node [fontname=\"Helvetica\"];\n");
    if options.fragments {
        for (i, group) in fragments(anet).iter().enumerate() {
            let _ = writeln!(s, "  subgraph cluster_{i} {{\n    style=dashed;");
            for &n in group {
                node_line(anet, n, "    ", &mut s);
            }
            let starts: Vec<_> = group
                .iter()
                .filter_map(|n| match n {
                    Node::P(p) if anet.initial.get(*p) > 0 => Some(*p),
                    _ => None,
                })
                .collect();
            let ends: Vec<_> = group
                .iter()
                .filter_map(|n| match n {
                    Node::P(p) if anet.final_marking.get(*p) > 0 => Some(*p),
                    _ => None,
                })
                .collect();
            if !starts.is_empty() {
                let _ = writeln!(s, "    start_{i} [shape=box, label=\"▶\"];");
                for p in starts {
                    let _ = writeln!(s, "    start_{i} -> {p};");
                }
            }
            if !ends.is_empty() {
                let _ = writeln!(s, "    end_{i} [shape=box, label=\"■\"];");
                for p in ends {
                    let _ = writeln!(s, "    {p} -> end_{i};");
                }
            }
            s.push_str("  }\n");
        }
    } else {
        for (p, _) in anet.net.places() {
            node_line(anet, Node::P(p), "  ", &mut s);
        }
        for (t, _) in anet.net.transitions() {
            node_line(anet, Node::T(t), "  ", &mut s);
        }
    }
    for arc in anet.net.arcs() {
        let (a, b) = arc.endpoints();
        let _ = writeln!(s, "  {a} -> {b};");
    }
    s.push_str("}\n");
    s
}
