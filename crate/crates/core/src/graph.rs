//! In-memory knowledge graph over people and departments.
//!
//! Contacts (`HAS_CONTACT_WITH`) are undirected: an edge is stored once with
//! `head < tail` and is visible from both endpoints. Repeated contacts between
//! the same pair accumulate timestamps on a single record per provenance, so a
//! pair can carry at most one direct and one inferred contact record.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Seconds covered by one proximity record.
pub const CONTACT_INTERVAL: u64 = 20;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeLabel {
    Person,
    Department,
}

impl NodeLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeLabel::Person => "Person",
            NodeLabel::Department => "Department",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "Person" => Some(NodeLabel::Person),
            "Department" => Some(NodeLabel::Department),
            _ => None,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Relation {
    HasContactWith,
    IsPartOf,
}

impl Relation {
    pub fn as_str(self) -> &'static str {
        match self {
            Relation::HasContactWith => "HAS_CONTACT_WITH",
            Relation::IsPartOf => "IS_PART_OF",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "HAS_CONTACT_WITH" => Some(Relation::HasContactWith),
            "IS_PART_OF" => Some(Relation::IsPartOf),
            _ => None,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Direct,
    Inferred,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Direct => "direct",
            Provenance::Inferred => "inferred",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "direct" => Some(Provenance::Direct),
            "inferred" => Some(Provenance::Inferred),
            _ => None,
        }
    }
}

/// Derived per-person attributes.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NodeProperties {
    /// `cp(v)`, in `[0, 1]`.
    pub contagion_probability: f64,
    /// Number of distinct contact neighbours.
    pub degree: f64,
    /// Total contact seconds over incident contact records.
    pub total_contact_time: f64,
    pub average_contact_time: f64,
    /// Contagion strength exceeded the propagation threshold.
    pub at_risk: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NodeRecord {
    pub id: NodeId,
    /// Raw identifier from the input files.
    pub name: String,
    pub labels: BTreeSet<NodeLabel>,
    /// `None` for departments and for people before property computation.
    pub properties: Option<NodeProperties>,
}

impl NodeRecord {
    pub fn is_person(&self) -> bool {
        self.labels.contains(&NodeLabel::Person)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeRecord {
    pub head: NodeId,
    pub tail: NodeId,
    pub relation: Relation,
    /// Seconds; `CONTACT_INTERVAL * timestamps.len()` for contacts.
    pub total_contact_time: u64,
    /// Interval-end times, strictly increasing.
    pub timestamps: Vec<u64>,
    pub provenance: Provenance,
    pub strength: f64,
}

impl EdgeRecord {
    pub fn other(&self, v: NodeId) -> NodeId {
        if self.head == v {
            self.tail
        } else {
            self.head
        }
    }
}

type EdgeKey = (NodeId, NodeId, Relation, Provenance);

#[derive(Clone, Debug, Default, PartialEq)]
pub struct KnowledgeGraph {
    nodes: Vec<NodeRecord>,
    edges: Vec<EdgeRecord>,
    names: HashMap<(NodeLabel, String), NodeId>,
    edge_index: HashMap<EdgeKey, usize>,
    /// Per node: (relation, neighbour) -> edge indices, direct before inferred.
    adjacency: Vec<BTreeMap<(Relation, NodeId), Vec<usize>>>,
}

impl KnowledgeGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[NodeRecord] {
        &self.nodes
    }

    pub fn edges(&self) -> &[EdgeRecord] {
        &self.edges
    }

    pub fn node(&self, id: NodeId) -> Result<&NodeRecord> {
        self.nodes.get(id.index()).ok_or(Error::NodeNotFound(id))
    }

    pub fn lookup(&self, label: NodeLabel, name: &str) -> Option<NodeId> {
        self.names.get(&(label, name.to_owned())).copied()
    }

    pub fn person_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().filter(|n| n.is_person()).map(|n| n.id)
    }

    /// Returns the node with this label and raw name, creating it if needed.
    pub fn ensure_node(&mut self, label: NodeLabel, name: &str) -> NodeId {
        if let Some(id) = self.lookup(label, name) {
            return id;
        }
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(NodeRecord {
            id,
            name: name.to_owned(),
            labels: BTreeSet::from([label]),
            properties: None,
        });
        self.names.insert((label, name.to_owned()), id);
        self.adjacency.push(BTreeMap::new());
        id
    }

    pub fn add_person(&mut self, name: &str) -> NodeId {
        self.ensure_node(NodeLabel::Person, name)
    }

    pub fn add_department(&mut self, name: &str) -> NodeId {
        self.ensure_node(NodeLabel::Department, name)
    }

    fn check_node(&self, id: NodeId) -> Result<()> {
        if id.index() < self.nodes.len() {
            Ok(())
        } else {
            Err(Error::NodeNotFound(id))
        }
    }

    fn link(&mut self, key: EdgeKey, record: EdgeRecord) -> usize {
        let idx = self.edges.len();
        let (head, tail, relation, _) = key;
        self.edges.push(record);
        self.edge_index.insert(key, idx);
        for (from, to) in [(head, tail), (tail, head)] {
            let slot = self.adjacency[from.index()].entry((relation, to)).or_default();
            slot.push(idx);
            let edges = &self.edges;
            slot.sort_by_key(|&e| edges[e].provenance);
        }
        idx
    }

    /// Records a 20-second contact between `i` and `j` ending at `t`.
    ///
    /// Returns `true` when `t` was newly appended. A timestamp already present
    /// on either provenance record of the pair is a duplicate and is ignored.
    pub fn add_contact(&mut self, i: NodeId, j: NodeId, t: u64, provenance: Provenance) -> Result<bool> {
        if i == j {
            return Err(Error::SelfLoop(i));
        }
        if t == 0 {
            return Err(Error::NonPositiveTime);
        }
        self.check_node(i)?;
        self.check_node(j)?;
        let (head, tail) = if i < j { (i, j) } else { (j, i) };
        let relation = Relation::HasContactWith;

        for p in [Provenance::Direct, Provenance::Inferred] {
            if let Some(&e) = self.edge_index.get(&(head, tail, relation, p)) {
                if self.edges[e].timestamps.binary_search(&t).is_ok() {
                    return Ok(false);
                }
            }
        }

        let key = (head, tail, relation, provenance);
        let idx = match self.edge_index.get(&key) {
            Some(&e) => e,
            None => self.link(
                key,
                EdgeRecord {
                    head,
                    tail,
                    relation,
                    total_contact_time: 0,
                    timestamps: Vec::new(),
                    provenance,
                    strength: 1.0,
                },
            ),
        };
        let edge = &mut self.edges[idx];
        let pos = edge.timestamps.partition_point(|&x| x < t);
        edge.timestamps.insert(pos, t);
        edge.total_contact_time += CONTACT_INTERVAL;
        Ok(true)
    }

    /// Adds the `IS_PART_OF` edge `person -> department`. Idempotent.
    pub fn add_membership(&mut self, person: NodeId, department: NodeId) -> Result<()> {
        if person == department {
            return Err(Error::SelfLoop(person));
        }
        self.check_node(person)?;
        self.check_node(department)?;
        let key = (person, department, Relation::IsPartOf, Provenance::Direct);
        if !self.edge_index.contains_key(&key) {
            self.link(
                key,
                EdgeRecord {
                    head: person,
                    tail: department,
                    relation: Relation::IsPartOf,
                    total_contact_time: 0,
                    timestamps: Vec::new(),
                    provenance: Provenance::Direct,
                    strength: 1.0,
                },
            );
        }
        Ok(())
    }

    /// Edge records incident to `v` under `relation`, ascending by neighbour
    /// id; a neighbour with both a direct and an inferred record appears twice.
    pub fn neighbors(&self, v: NodeId, relation: Relation) -> Result<Vec<(NodeId, &EdgeRecord)>> {
        let adj = self.adjacency.get(v.index()).ok_or(Error::NodeNotFound(v))?;
        Ok(adj
            .range((relation, NodeId(0))..=(relation, NodeId(u32::MAX)))
            .flat_map(|(&(_, u), idxs)| idxs.iter().map(move |&e| (u, &self.edges[e])))
            .collect())
    }

    /// Distinct neighbour ids of `v` under `relation`, ascending.
    pub fn neighbor_ids(&self, v: NodeId, relation: Relation) -> Result<Vec<NodeId>> {
        let adj = self.adjacency.get(v.index()).ok_or(Error::NodeNotFound(v))?;
        Ok(adj
            .range((relation, NodeId(0))..=(relation, NodeId(u32::MAX)))
            .map(|(&(_, u), _)| u)
            .collect())
    }

    pub fn contact_records(&self, a: NodeId, b: NodeId) -> impl Iterator<Item = &EdgeRecord> {
        let (head, tail) = if a < b { (a, b) } else { (b, a) };
        [Provenance::Direct, Provenance::Inferred]
            .into_iter()
            .filter_map(move |p| self.edge_index.get(&(head, tail, Relation::HasContactWith, p)))
            .map(|&e| &self.edges[e])
    }

    pub fn has_contact(&self, a: NodeId, b: NodeId) -> bool {
        self.contact_records(a, b).next().is_some()
    }

    /// Distinct unordered pairs with at least one contact record.
    pub fn contact_pair_count(&self) -> usize {
        self.adjacency
            .iter()
            .enumerate()
            .map(|(v, adj)| {
                adj.range((Relation::HasContactWith, NodeId(0))..=(Relation::HasContactWith, NodeId(u32::MAX)))
                    .filter(|(&(_, u), _)| u.index() > v)
                    .count()
            })
            .sum()
    }

    /// Total timestamped contact events, optionally restricted to one provenance.
    pub fn contact_event_count(&self, provenance: Option<Provenance>) -> usize {
        self.edges
            .iter()
            .filter(|e| e.relation == Relation::HasContactWith)
            .filter(|e| provenance.is_none_or(|p| e.provenance == p))
            .map(|e| e.timestamps.len())
            .sum()
    }

    pub fn set_edge_strength(&mut self, edge: usize, strength: f64) {
        self.edges[edge].strength = strength;
    }

    pub fn properties_mut(&mut self, id: NodeId) -> Result<&mut NodeProperties> {
        let node = self.nodes.get_mut(id.index()).ok_or(Error::NodeNotFound(id))?;
        Ok(node.properties.get_or_insert_with(NodeProperties::default))
    }

    /// Recomputes degree and contact-time properties for every person,
    /// keeping any contagion state already present.
    pub fn compute_node_properties(&mut self) {
        for v in 0..self.nodes.len() {
            if !self.nodes[v].is_person() {
                continue;
            }
            let id = NodeId(v as u32);
            let mut degree = 0usize;
            let mut total = 0u64;
            for ((relation, _), idxs) in &self.adjacency[v] {
                if *relation != Relation::HasContactWith {
                    continue;
                }
                degree += 1;
                total += idxs.iter().map(|&e| self.edges[e].total_contact_time).sum::<u64>();
            }
            let props = self.nodes[id.index()]
                .properties
                .get_or_insert_with(NodeProperties::default);
            props.degree = degree as f64;
            props.total_contact_time = total as f64;
            props.average_contact_time = if degree == 0 { 0.0 } else { total as f64 / degree as f64 };
        }
    }

    /// Same node set, no edges. Used to rebuild graphs from archives.
    pub(crate) fn push_node_record(&mut self, record: NodeRecord) -> Result<()> {
        if record.id.index() != self.nodes.len() {
            return Err(Error::Parse {
                line: 0,
                message: format!("node id {} out of sequence", record.id),
            });
        }
        for &label in &record.labels {
            self.names.insert((label, record.name.clone()), record.id);
        }
        self.nodes.push(record);
        self.adjacency.push(BTreeMap::new());
        Ok(())
    }

    pub(crate) fn push_edge_record(&mut self, record: EdgeRecord) -> Result<()> {
        self.check_node(record.head)?;
        self.check_node(record.tail)?;
        if record.head == record.tail {
            return Err(Error::SelfLoop(record.head));
        }
        let key = (record.head, record.tail, record.relation, record.provenance);
        if self.edge_index.contains_key(&key) {
            return Err(Error::Parse {
                line: 0,
                message: format!("duplicate edge {} -> {}", record.head, record.tail),
            });
        }
        self.link(key, record);
        Ok(())
    }
}
