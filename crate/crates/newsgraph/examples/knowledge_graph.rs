//! Build a knowledge graph from triples, watch the largest-component
//! restriction drop satellite entities, and slice out per-item subgraphs.
//!
//!     cargo run --example knowledge_graph

use newsgraph::kgraph::{assign_subgraphs, build_kg};
use newsgraph::relex::Triple;

fn t(s: &str, p: &str, o: &str, doc: &str) -> Triple {
    Triple {
        subject: s.to_string(),
        predicate: p.to_string(),
        object: o.to_string(),
        doc_id: doc.to_string(),
        sentence_id: 0,
    }
}

fn main() {
    // Two connected stories plus one isolated pair. The isolated pair is
    // smaller than the main component, so the graph drops it.
    let triples = vec![
        t("alice", "advise", "mayor", "doc-a"),
        t("mayor", "open", "bridge", "doc-a"),
        t("bob", "criticize", "mayor", "doc-b"),
        t("bob", "meet", "alice", "doc-b"),
        t("carol", "visit", "bridge", "doc-c"),
        // satellite component: two entities nobody else mentions
        t("drifter", "avoid", "lighthouse", "doc-c"),
    ];

    let kg = build_kg(&triples);
    println!(
        "graph keeps {} of 8 entities and {} of {} edges",
        kg.node_count(),
        kg.structural_edge_count(),
        triples.len()
    );
    for name in kg.node_names() {
        let id = kg.node_id(name).unwrap();
        println!("  {:10}  degree {}", name, kg.degree(id));
    }

    // Each item's subgraph is induced by its own triples, restricted to
    // entities that survived. doc-c keeps only carol and bridge.
    let items = vec![
        ("doc-a".to_string(), triples[0..2].to_vec(), Some(0u8)),
        ("doc-b".to_string(), triples[2..4].to_vec(), Some(1u8)),
        ("doc-c".to_string(), triples[4..6].to_vec(), None),
    ];
    println!();
    for sg in assign_subgraphs(&kg, &items) {
        let names: Vec<&str> = sg.node_ids.iter().map(|&id| kg.node_name(id)).collect();
        println!(
            "item {:6}  {} nodes {:?}, {} component(s), label {:?}{}",
            sg.item_id,
            sg.node_ids.len(),
            names,
            sg.components.len(),
            sg.label,
            if sg.empty { "  (empty)" } else { "" }
        );
    }
}
