//! Knowledge completion over contact graphs.
//!
//! Step one completes every per-timestamp connected component into a clique
//! of inferred contacts. Step two turns contact durations into transmission
//! strengths with an exponential decay in `beta * t`, aggregates independent
//! exposures, and flags people whose aggregated strength exceeds `tau`.
//!
//! Completion only ever adds edges, so every walk on the raw graph stays a
//! positive-probability walk on the completed one and exhaustive neighbourhood
//! samples only grow. The stronger claim that every node's visit frequency
//! rises does not hold pointwise: new edges redistribute walk mass.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{KnowledgeGraph, NodeId, Provenance, Relation};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregator {
    NoisyOr,
    Max,
    Avg,
    Sum,
}

/// How a source probability and a decay combine into a path strength.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrengthForm {
    /// `P_A - exp(-beta t)`.
    Subtractive,
    /// `P_A * (1 - exp(-beta t))`.
    Multiplicative,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StrengthModel {
    /// Per-second transmissibility.
    pub beta: f64,
    /// Propagation threshold.
    pub tau: f64,
    pub aggregator: Aggregator,
    /// Force path strengths into `[0, 1]`.
    pub clamp: bool,
    pub form: StrengthForm,
    pub max_hops: usize,
}

impl Default for StrengthModel {
    fn default() -> Self {
        Self {
            beta: 0.01,
            tau: 0.2,
            aggregator: Aggregator::NoisyOr,
            clamp: true,
            form: StrengthForm::Subtractive,
            max_hops: 1,
        }
    }
}

impl StrengthModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::Config(format!("beta must be positive, got {}", self.beta)));
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(Error::Config(format!("tau must lie in [0, 1], got {}", self.tau)));
        }
        if self.max_hops == 0 {
            return Err(Error::Config("max_hops must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ClosureStats {
    /// Distinct pairs with a contact before closure.
    pub direct_pairs: usize,
    /// Distinct pairs connected only by closure.
    pub inferred_pairs: usize,
    pub total_pairs: usize,
    pub growth_ratio: f64,
    pub direct_events: usize,
    pub inferred_events: usize,
    pub event_growth_ratio: f64,
    pub timestamps: usize,
    /// Component size -> number of (timestamp, component) occurrences.
    pub component_sizes: BTreeMap<usize, usize>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Contact events grouped by timestamp, as unordered pairs `(lo, hi)`.
pub fn events_by_timestamp(graph: &KnowledgeGraph) -> BTreeMap<u64, Vec<(NodeId, NodeId)>> {
    let mut by_t: BTreeMap<u64, Vec<(NodeId, NodeId)>> = BTreeMap::new();
    for e in graph.edges() {
        if e.relation != Relation::HasContactWith {
            continue;
        }
        for &t in &e.timestamps {
            by_t.entry(t).or_default().push((e.head, e.tail));
        }
    }
    for events in by_t.values_mut() {
        events.sort_unstable();
    }
    by_t
}

/// Connected components of an edge list by breadth-first search, each sorted,
/// ordered by smallest member.
pub fn components(events: &[(NodeId, NodeId)]) -> Vec<Vec<NodeId>> {
    let mut adj: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    for &(a, b) in events {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for &start in adj.keys() {
        if !seen.insert(start) {
            continue;
        }
        let mut comp = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &u in &adj[&v] {
                if seen.insert(u) {
                    comp.push(u);
                    queue.push_back(u);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

struct TimestampClosure {
    t: u64,
    inferred: Vec<(NodeId, NodeId)>,
    sizes: Vec<usize>,
}

fn close_timestamp(t: u64, events: &[(NodeId, NodeId)]) -> TimestampClosure {
    let present: BTreeSet<(NodeId, NodeId)> = events.iter().copied().collect();
    let mut inferred = Vec::new();
    let mut sizes = Vec::new();
    for comp in components(events) {
        sizes.push(comp.len());
        for (k, &a) in comp.iter().enumerate() {
            for &b in &comp[k + 1..] {
                if !present.contains(&(a, b)) {
                    inferred.push((a, b));
                }
            }
        }
    }
    TimestampClosure { t, inferred, sizes }
}

/// Completes every per-timestamp contact component. Existing records are
/// left untouched; new contacts are added with inferred provenance.
pub fn transitive_closure_step(graph: &KnowledgeGraph) -> (KnowledgeGraph, ClosureStats) {
    let by_t = events_by_timestamp(graph);
    let per_t: Vec<TimestampClosure> = by_t.par_iter().map(|(&t, events)| close_timestamp(t, events)).collect();

    let mut out = graph.clone();
    let mut stats = ClosureStats {
        direct_pairs: graph.contact_pair_count(),
        direct_events: graph.contact_event_count(None),
        timestamps: by_t.len(),
        ..Default::default()
    };
    for closure in &per_t {
        for &size in &closure.sizes {
            *stats.component_sizes.entry(size).or_default() += 1;
        }
        for &(a, b) in &closure.inferred {
            let added = out
                .add_contact(a, b, closure.t, Provenance::Inferred)
                .expect("endpoints come from existing edges");
            stats.inferred_events += usize::from(added);
        }
    }
    out.compute_node_properties();
    stats.total_pairs = out.contact_pair_count();
    stats.inferred_pairs = stats.total_pairs - stats.direct_pairs;
    stats.growth_ratio = ratio(stats.inferred_pairs, stats.direct_pairs);
    stats.event_growth_ratio = ratio(stats.inferred_events, stats.direct_events);
    (out, stats)
}

pub fn decay(contact_time: f64, beta: f64) -> f64 {
    (-beta * contact_time).exp()
}

/// Strength of one exposure of `contact_time` seconds to a source with
/// infection probability `source_probability`.
pub fn path_strength(contact_time: f64, source_probability: f64, model: &StrengthModel) -> f64 {
    let d = decay(contact_time, model.beta);
    let raw = match model.form {
        StrengthForm::Subtractive => source_probability - d,
        StrengthForm::Multiplicative => source_probability * (1.0 - d),
    };
    if model.clamp {
        raw.clamp(0.0, 1.0)
    } else {
        raw
    }
}

pub fn aggregate_strength(per_path: &[f64], aggregator: Aggregator) -> f64 {
    if per_path.is_empty() {
        return 0.0;
    }
    match aggregator {
        Aggregator::NoisyOr => 1.0 - per_path.iter().map(|s| 1.0 - s).product::<f64>(),
        Aggregator::Max => per_path.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        Aggregator::Avg => per_path.iter().sum::<f64>() / per_path.len() as f64,
        Aggregator::Sum => per_path.iter().sum::<f64>().min(1.0),
    }
}

/// Bounded edge weight `1 - exp(-beta t)` used by the weighted embedders.
pub fn exposure_strength(contact_time: f64, beta: f64) -> f64 {
    (1.0 - decay(contact_time, beta)).clamp(0.0, 1.0)
}

/// Sets every contact record's strength from its total contact time.
pub fn edge_strengths(graph: &KnowledgeGraph, model: &StrengthModel) -> KnowledgeGraph {
    let mut out = graph.clone();
    for (idx, e) in graph.edges().iter().enumerate() {
        if e.relation == Relation::HasContactWith {
            out.set_edge_strength(idx, exposure_strength(e.total_contact_time as f64, model.beta));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExposedNode {
    pub node: NodeId,
    pub name: String,
    pub contagion_probability: f64,
    pub paths: usize,
    pub hop: usize,
    pub at_risk: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ContagionReport {
    pub seeds: Vec<NodeId>,
    pub reached: usize,
    pub at_risk_count: usize,
    /// Every non-seed node that received at least one exposure, by id.
    pub exposed: Vec<ExposedNode>,
}

fn pair_contact_time(graph: &KnowledgeGraph, a: NodeId, b: NodeId) -> f64 {
    graph.contact_records(a, b).map(|e| e.total_contact_time as f64).sum()
}

/// Runs contagion from `seeds` over direct and inferred contacts.
///
/// Seeds get `cp = 1`. Each hop assigns every not-yet-assigned neighbour of
/// the frontier the aggregate of its per-exposure path strengths; nodes above
/// `tau` form the next frontier. Nodes never reached keep their `cp`.
pub fn propagate_contagion(
    graph: &KnowledgeGraph,
    seeds: &[NodeId],
    model: &StrengthModel,
) -> Result<(KnowledgeGraph, ContagionReport)> {
    model.validate()?;
    for &s in seeds {
        if !graph.node(s)?.is_person() {
            return Err(Error::Config(format!("seed {s} is not a person")));
        }
    }
    let mut out = graph.clone();
    let mut cp: HashMap<NodeId, f64> = HashMap::new();
    let seed_set: BTreeSet<NodeId> = seeds.iter().copied().collect();
    for &s in &seed_set {
        cp.insert(s, 1.0);
    }
    let mut frontier: Vec<NodeId> = seed_set.iter().copied().collect();
    let mut exposed = Vec::new();

    for hop in 1..=model.max_hops {
        if frontier.is_empty() {
            break;
        }
        let mut paths: BTreeMap<NodeId, Vec<f64>> = BTreeMap::new();
        for &u in &frontier {
            let source = cp[&u];
            for w in graph.neighbor_ids(u, Relation::HasContactWith)? {
                if cp.contains_key(&w) {
                    continue;
                }
                let t = pair_contact_time(graph, u, w);
                paths.entry(w).or_default().push(path_strength(t, source, model));
            }
        }
        frontier.clear();
        for (w, strengths) in paths {
            let value = aggregate_strength(&strengths, model.aggregator);
            cp.insert(w, value);
            let at_risk = value > model.tau;
            if at_risk {
                frontier.push(w);
            }
            exposed.push(ExposedNode {
                node: w,
                name: graph.node(w)?.name.clone(),
                contagion_probability: value,
                paths: strengths.len(),
                hop,
                at_risk,
            });
        }
    }

    for (&v, &value) in &cp {
        let props = out.properties_mut(v)?;
        props.contagion_probability = value.clamp(0.0, 1.0);
        props.at_risk = value > model.tau;
    }
    exposed.sort_by_key(|e| e.node);
    let report = ContagionReport {
        seeds: seed_set.into_iter().collect(),
        reached: exposed.len(),
        at_risk_count: exposed.iter().filter(|e| e.at_risk).count(),
        exposed,
    };
    Ok((out, report))
}

/// Everything the completion stage reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KcReport {
    pub model: StrengthModel,
    pub closure: ClosureStats,
    /// Pairs a second closure pass would add; zero for a correct closure.
    pub second_pass_added_pairs: usize,
    pub contagion: Option<ContagionReport>,
    pub raw_contagion: Option<ContagionReport>,
}
