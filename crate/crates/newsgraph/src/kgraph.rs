//! Global knowledge graph construction and per-item subgraphs.
//!
//! Nodes are distinct entity strings; every unordered entity pair that
//! co-occurs in a triple gets one structural edge carrying the multiset of
//! predicate labels observed between the pair. The graph kept for
//! classification is restricted to its largest connected component; an item's
//! subgraph is the subgraph its entities induce inside that global graph,
//! decomposed into connected components.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::relex::Triple;

pub type NodeId = usize;

#[derive(Debug, Error)]
pub enum KgraphError {
    #[error("component is empty")]
    EmptyComponent,
    #[error("malformed graph file at {locus}: {message}")]
    MalformedFile { locus: String, message: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeGraph {
    names: Vec<String>,
    index: HashMap<String, NodeId>,
    /// Sorted neighbor lists; symmetric, self-loops excluded.
    adjacency: Vec<Vec<NodeId>>,
    /// Predicate label counts per unordered pair `(a, b)` with `a <= b`;
    /// `a == b` records self-referential triples, which carry labels but do
    /// not count as structural edges.
    edge_labels: BTreeMap<(NodeId, NodeId), BTreeMap<String, usize>>,
}

impl KnowledgeGraph {
    fn build(triples: &[Triple], retain_lcc: bool) -> KnowledgeGraph {
        let mut names: Vec<String> = Vec::new();
        let mut index: HashMap<String, NodeId> = HashMap::new();
        let intern = |s: &str, names: &mut Vec<String>, index: &mut HashMap<String, NodeId>| {
            if let Some(&id) = index.get(s) {
                return id;
            }
            let id = names.len();
            names.push(s.to_string());
            index.insert(s.to_string(), id);
            id
        };

        let mut edge_labels: BTreeMap<(NodeId, NodeId), BTreeMap<String, usize>> = BTreeMap::new();
        for t in triples {
            let s = intern(&t.subject, &mut names, &mut index);
            let o = intern(&t.object, &mut names, &mut index);
            let key = (s.min(o), s.max(o));
            *edge_labels.entry(key).or_default().entry(t.predicate.clone()).or_insert(0) += 1;
        }

        let n = names.len();
        let mut adjacency: Vec<Vec<NodeId>> = vec![Vec::new(); n];
        for &(a, b) in edge_labels.keys() {
            if a != b {
                adjacency[a].push(b);
                adjacency[b].push(a);
            }
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }

        let mut graph = KnowledgeGraph { names, index, adjacency, edge_labels };
        if retain_lcc && graph.node_count() > 0 {
            let keep = graph.largest_component();
            graph = graph.restrict_to(&keep);
        }
        graph
    }

    /// Ids of the largest connected component; ties go to the component
    /// containing the lexicographically smallest entity string, which keeps
    /// the choice independent of triple input order.
    fn largest_component(&self) -> Vec<NodeId> {
        let components = connected_components(self.node_count(), |n| self.neighbors(n));
        let best = components
            .iter()
            .min_by(|a, b| {
                b.len().cmp(&a.len()).then_with(|| {
                    let min_a = a.iter().map(|&n| &self.names[n]).min().unwrap();
                    let min_b = b.iter().map(|&n| &self.names[n]).min().unwrap();
                    min_a.cmp(min_b)
                })
            })
            .expect("at least one component");
        best.clone()
    }

    /// New graph over `keep` (relabeled compactly, original order preserved).
    fn restrict_to(&self, keep: &[NodeId]) -> KnowledgeGraph {
        let keep_set: HashSet<NodeId> = keep.iter().copied().collect();
        let mut old_ids: Vec<NodeId> = (0..self.node_count()).filter(|n| keep_set.contains(n)).collect();
        old_ids.sort_unstable();
        let mut remap: HashMap<NodeId, NodeId> = HashMap::new();
        for (new_id, &old_id) in old_ids.iter().enumerate() {
            remap.insert(old_id, new_id);
        }
        let names: Vec<String> = old_ids.iter().map(|&o| self.names[o].clone()).collect();
        let index: HashMap<String, NodeId> =
            names.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        let adjacency: Vec<Vec<NodeId>> = old_ids
            .iter()
            .map(|&o| {
                self.adjacency[o]
                    .iter()
                    .filter_map(|n| remap.get(n).copied())
                    .collect::<Vec<_>>()
            })
            .collect();
        let edge_labels = self
            .edge_labels
            .iter()
            .filter_map(|(&(a, b), labels)| {
                let (na, nb) = (remap.get(&a)?, remap.get(&b)?);
                Some(((*na.min(nb), *na.max(nb)), labels.clone()))
            })
            .collect();
        KnowledgeGraph { names, index, adjacency, edge_labels }
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    /// Count of unordered node pairs with an edge (self-loops excluded).
    pub fn structural_edge_count(&self) -> usize {
        self.edge_labels.keys().filter(|(a, b)| a != b).count()
    }

    pub fn node_name(&self, id: NodeId) -> &str {
        &self.names[id]
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.index.get(name).copied()
    }

    pub fn node_names(&self) -> impl Iterator<Item = &str> {
        self.names.iter().map(String::as_str)
    }

    pub fn neighbors(&self, id: NodeId) -> &[NodeId] {
        &self.adjacency[id]
    }

    pub fn degree(&self, id: NodeId) -> usize {
        self.adjacency[id].len()
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    pub fn edge_label_counts(&self, a: NodeId, b: NodeId) -> Option<&BTreeMap<String, usize>> {
        self.edge_labels.get(&(a.min(b), a.max(b)))
    }

    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, &BTreeMap<String, usize>)> {
        self.edge_labels.iter().map(|(&(a, b), labels)| (a, b, labels))
    }
}

/// Global graph restricted to its largest connected component.
pub fn build_kg(triples: &[Triple]) -> KnowledgeGraph {
    KnowledgeGraph::build(triples, true)
}

/// Global graph over every component; the translational baseline trains on
/// this unrestricted form.
pub fn build_full_graph(triples: &[Triple]) -> KnowledgeGraph {
    KnowledgeGraph::build(triples, false)
}

/// Connected components by breadth-first search, each sorted ascending;
/// components ordered by smallest member.
pub fn connected_components<'a, F>(n: usize, neighbors: F) -> Vec<Vec<NodeId>>
where
    F: Fn(NodeId) -> &'a [NodeId],
{
    let mut seen = vec![false; n];
    let mut components = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        let mut component = Vec::new();
        while let Some(node) = queue.pop_front() {
            component.push(node);
            for &next in neighbors(node) {
                if !seen[next] {
                    seen[next] = true;
                    queue.push_back(next);
                }
            }
        }
        component.sort_unstable();
        components.push(component);
    }
    components
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subgraph {
    pub item_id: String,
    /// Entities of the item that survived the largest-component restriction.
    pub node_ids: Vec<NodeId>,
    /// Connected components of the induced subgraph, largest first (ties by
    /// smallest node id); nodes within each component ascend.
    pub components: Vec<Vec<NodeId>>,
    pub label: Option<u8>,
    /// True when none of the item's entities survived; such items get a zero
    /// embedding downstream.
    pub empty: bool,
}

/// Induced connected components of an arbitrary node set.
pub fn induced_components(kg: &KnowledgeGraph, nodes: &[NodeId]) -> Vec<Vec<NodeId>> {
    let set: HashSet<NodeId> = nodes.iter().copied().collect();
    let mut sorted: Vec<NodeId> = nodes.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let position: HashMap<NodeId, usize> =
        sorted.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let local_adj: Vec<Vec<usize>> = sorted
        .iter()
        .map(|&n| {
            kg.neighbors(n)
                .iter()
                .filter(|m| set.contains(m))
                .map(|m| position[m])
                .collect()
        })
        .collect();
    let locals = connected_components(sorted.len(), |i| &local_adj[i]);
    let mut components: Vec<Vec<NodeId>> = locals
        .into_iter()
        .map(|c| c.into_iter().map(|i| sorted[i]).collect::<Vec<NodeId>>())
        .collect();
    components.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a[0].cmp(&b[0])));
    components
}

/// Maps each item to the subgraph its triples induce in `kg`. Entities
/// missing from the graph (dropped with their component) are skipped; items
/// with no surviving entity come back flagged empty.
pub fn assign_subgraphs(
    kg: &KnowledgeGraph,
    items: &[(String, Vec<Triple>, Option<u8>)],
) -> Vec<Subgraph> {
    items
        .iter()
        .map(|(item_id, triples, label)| {
            let mut node_ids: Vec<NodeId> = triples
                .iter()
                .flat_map(|t| [t.subject.as_str(), t.object.as_str()])
                .filter_map(|name| kg.node_id(name))
                .collect();
            node_ids.sort_unstable();
            node_ids.dedup();
            let components = induced_components(kg, &node_ids);
            Subgraph {
                item_id: item_id.clone(),
                empty: node_ids.is_empty(),
                node_ids,
                components,
                label: *label,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeMode {
    /// Degrees within the induced component.
    Internal,
    /// Degrees in the full graph, so border context counts.
    Border,
}

/// Descending degree sequence of a component, truncated to `cap` entries.
pub fn degree_sequence(
    kg: &KnowledgeGraph,
    component: &[NodeId],
    mode: DegreeMode,
    cap: usize,
) -> Result<Vec<f64>, KgraphError> {
    if component.is_empty() {
        return Err(KgraphError::EmptyComponent);
    }
    let mut degrees: Vec<usize> = match mode {
        DegreeMode::Internal => {
            let set: HashSet<NodeId> = component.iter().copied().collect();
            component
                .iter()
                .map(|&n| kg.neighbors(n).iter().filter(|m| set.contains(m)).count())
                .collect()
        }
        DegreeMode::Border => component.iter().map(|&n| kg.degree(n)).collect(),
    };
    degrees.sort_unstable_by(|a, b| b.cmp(a));
    degrees.truncate(cap);
    Ok(degrees.into_iter().map(|d| d as f64).collect())
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    config_hash: String,
    nodes: Vec<GraphNode>,
    edges: Vec<GraphEdge>,
}

#[derive(Serialize, Deserialize)]
struct GraphNode {
    id: NodeId,
    entity: String,
}

#[derive(Serialize, Deserialize)]
struct GraphEdge {
    a: NodeId,
    b: NodeId,
    labels: BTreeMap<String, usize>,
}

pub fn write_graph_file(path: &Path, kg: &KnowledgeGraph, config_hash: &str) -> Result<(), KgraphError> {
    let file = GraphFile {
        config_hash: config_hash.to_string(),
        nodes: (0..kg.node_count())
            .map(|id| GraphNode { id, entity: kg.node_name(id).to_string() })
            .collect(),
        edges: kg
            .edges()
            .map(|(a, b, labels)| GraphEdge { a, b, labels: labels.clone() })
            .collect(),
    };
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut out, &file).map_err(|e| KgraphError::MalformedFile {
        locus: path.display().to_string(),
        message: e.to_string(),
    })?;
    out.flush()?;
    Ok(())
}

/// Reads a graph export back; returns the graph and its config hash.
pub fn read_graph_file(path: &Path) -> Result<(KnowledgeGraph, String), KgraphError> {
    let body = std::fs::read_to_string(path)?;
    let file: GraphFile = serde_json::from_str(&body).map_err(|e| KgraphError::MalformedFile {
        locus: path.display().to_string(),
        message: e.to_string(),
    })?;
    let n = file.nodes.len();
    let mut names = vec![String::new(); n];
    for node in &file.nodes {
        if node.id >= n {
            return Err(KgraphError::MalformedFile {
                locus: path.display().to_string(),
                message: format!("node id {} out of range", node.id),
            });
        }
        names[node.id] = node.entity.clone();
    }
    let index: HashMap<String, NodeId> =
        names.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
    if index.len() != n {
        return Err(KgraphError::MalformedFile {
            locus: path.display().to_string(),
            message: "duplicate node ids or entities".into(),
        });
    }
    let mut adjacency: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    let mut edge_labels = BTreeMap::new();
    for e in &file.edges {
        if e.a >= n || e.b >= n {
            return Err(KgraphError::MalformedFile {
                locus: path.display().to_string(),
                message: format!("edge ({}, {}) out of range", e.a, e.b),
            });
        }
        let key = (e.a.min(e.b), e.a.max(e.b));
        if e.a != e.b {
            adjacency[e.a].push(e.b);
            adjacency[e.b].push(e.a);
        }
        edge_labels.insert(key, e.labels.clone());
    }
    for list in &mut adjacency {
        list.sort_unstable();
        list.dedup();
    }
    Ok((KnowledgeGraph { names, index, adjacency, edge_labels }, file.config_hash))
}

#[derive(Serialize, Deserialize)]
struct SubgraphFile {
    config_hash: String,
    items: Vec<Subgraph>,
}

pub fn write_subgraph_file(path: &Path, subgraphs: &[Subgraph], config_hash: &str) -> Result<(), KgraphError> {
    let file = SubgraphFile { config_hash: config_hash.to_string(), items: subgraphs.to_vec() };
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut out, &file).map_err(|e| KgraphError::MalformedFile {
        locus: path.display().to_string(),
        message: e.to_string(),
    })?;
    out.flush()?;
    Ok(())
}

pub fn read_subgraph_file(path: &Path) -> Result<(Vec<Subgraph>, String), KgraphError> {
    let body = std::fs::read_to_string(path)?;
    let file: SubgraphFile = serde_json::from_str(&body).map_err(|e| KgraphError::MalformedFile {
        locus: path.display().to_string(),
        message: e.to_string(),
    })?;
    Ok((file.items, file.config_hash))
}
