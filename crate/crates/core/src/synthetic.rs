//! Office-like synthetic contact data.
//!
//! At every 20-second tick people gather in small co-located groups. Each
//! group records the edges of a random spanning tree plus a random subset of
//! the remaining pairs, never the full clique for groups of three or more, so
//! per-timestamp closure always has pairs to infer.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::CONTACT_INTERVAL;
use crate::ingest::{ContactRow, MetadataRow};
use crate::seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GroupModel {
    pub min_size: usize,
    pub max_size: usize,
    /// Chance that a non-tree pair inside a group is also recorded.
    pub extra_edge_probability: f64,
    /// Chance that a group member is drawn from the first member's department.
    pub department_affinity: f64,
}

impl Default for GroupModel {
    fn default() -> Self {
        Self {
            min_size: 2,
            max_size: 4,
            extra_edge_probability: 0.3,
            department_affinity: 0.8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub n_people: usize,
    pub n_departments: usize,
    pub n_timestamps: usize,
    /// Expected recorded contact events per timestamp.
    pub event_rate: f64,
    pub groups: GroupModel,
    /// Stop as soon as this many distinct pairs have been recorded.
    pub target_pairs: Option<usize>,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            n_people: 120,
            n_departments: 5,
            n_timestamps: 400,
            event_rate: 3.0,
            groups: GroupModel::default(),
            target_pairs: None,
            seed: 7,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_people < 1 || self.n_departments < 1 || self.n_timestamps < 1 {
            return Err(Error::Config("synthetic counts must be at least 1".into()));
        }
        if !(self.event_rate > 0.0 && self.event_rate.is_finite()) {
            return Err(Error::Config("event_rate must be positive".into()));
        }
        let g = &self.groups;
        if g.min_size < 2 || g.max_size < g.min_size {
            return Err(Error::Config(
                "group sizes must satisfy 2 <= min_size <= max_size".into(),
            ));
        }
        for p in [g.extra_edge_probability, g.department_affinity] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config("group probabilities must lie in [0, 1]".into()));
            }
        }
        Ok(())
    }
}

pub fn person_name(p: usize) -> String {
    (p + 1).to_string()
}

pub fn department_name(d: usize) -> String {
    format!("DEP{d}")
}

pub fn generate_synthetic(config: &SyntheticConfig) -> Result<(Vec<ContactRow>, Vec<MetadataRow>)> {
    config.validate()?;
    let mut rng = seed::stream(config.seed, "synthetic", &[]);
    let n = config.n_people;

    let department: Vec<usize> = (0..n).map(|_| rng.random_range(0..config.n_departments)).collect();
    let metadata = (0..n)
        .map(|p| MetadataRow {
            i: person_name(p),
            department: department_name(department[p]),
        })
        .collect();

    let poisson = Poisson::new(config.event_rate).map_err(|e| Error::Config(e.to_string()))?;
    let mut contacts = Vec::new();
    let mut pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
    let reached = |pairs: &BTreeSet<(usize, usize)>| config.target_pairs.is_some_and(|k| pairs.len() >= k);

    'ticks: for tick in 1..=config.n_timestamps {
        let t = tick as u64 * CONTACT_INTERVAL;
        let target = poisson.sample(&mut rng) as usize;
        let mut available: Vec<usize> = (0..n).collect();
        available.shuffle(&mut rng);
        let mut emitted = 0;
        while emitted < target && available.len() >= 2 {
            let size = rng
                .random_range(config.groups.min_size..=config.groups.max_size)
                .min(available.len());
            let group = draw_group(
                &mut rng,
                &mut available,
                &department,
                size,
                config.groups.department_affinity,
            );
            for (a, b) in group_edges(&mut rng, &group, config.groups.extra_edge_probability) {
                contacts.push(ContactRow::new(t, person_name(a), person_name(b)));
                pairs.insert((a.min(b), a.max(b)));
                emitted += 1;
                if reached(&pairs) {
                    break 'ticks;
                }
            }
        }
    }
    Ok((contacts, metadata))
}

fn draw_group<R: Rng>(
    rng: &mut R,
    available: &mut Vec<usize>,
    department: &[usize],
    size: usize,
    affinity: f64,
) -> Vec<usize> {
    let first = available.pop().expect("caller checks availability");
    let mut group = vec![first];
    while group.len() < size && !available.is_empty() {
        let colleagues: Vec<usize> = (0..available.len())
            .filter(|&k| department[available[k]] == department[first])
            .collect();
        let k = if !colleagues.is_empty() && rng.random_bool(affinity) {
            colleagues[rng.random_range(0..colleagues.len())]
        } else {
            rng.random_range(0..available.len())
        };
        group.push(available.swap_remove(k));
    }
    group
}

/// Spanning tree over `group` plus random extra pairs, short of the clique.
pub(crate) fn group_edges<R: Rng>(rng: &mut R, group: &[usize], extra: f64) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    let mut in_tree = BTreeSet::new();
    for m in 1..group.len() {
        let parent = group[rng.random_range(0..m)];
        edges.push((parent, group[m]));
        in_tree.insert((parent.min(group[m]), parent.max(group[m])));
    }
    let clique = group.len() * (group.len() - 1) / 2;
    for x in 0..group.len() {
        for y in x + 1..group.len() {
            let (a, b) = (group[x], group[y]);
            if in_tree.contains(&(a.min(b), a.max(b))) {
                continue;
            }
            if rng.random_bool(extra) {
                edges.push((a, b));
            }
        }
    }
    if group.len() >= 3 && edges.len() == clique {
        edges.pop();
    }
    edges
}
