//! Parsing of `t i j` contact files and `i D_i` metadata files, and
//! construction of the raw knowledge graph from them.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{KnowledgeGraph, Provenance, CONTACT_INTERVAL};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContactRow {
    pub t: u64,
    pub i: String,
    pub j: String,
}

impl ContactRow {
    pub fn new(t: u64, i: impl Into<String>, j: impl Into<String>) -> Self {
        Self {
            t,
            i: i.into(),
            j: j.into(),
        }
    }

    fn ordered(&self) -> (&str, &str) {
        if raw_id_cmp(&self.i, &self.j) == Ordering::Greater {
            (&self.j, &self.i)
        } else {
            (&self.i, &self.j)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetadataRow {
    pub i: String,
    pub department: String,
}

/// Numeric ids compare numerically and sort before non-numeric ones.
pub fn raw_id_cmp(a: &str, b: &str) -> Ordering {
    match (a.parse::<u64>(), b.parse::<u64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y).then_with(|| a.cmp(b)),
        (Ok(_), Err(_)) => Ordering::Less,
        (Err(_), Ok(_)) => Ordering::Greater,
        (Err(_), Err(_)) => a.cmp(b),
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ContactParseReport {
    pub lines: usize,
    pub blank: usize,
    pub valid: usize,
    pub malformed: usize,
    pub self_loops: usize,
    pub duplicates: usize,
}

impl ContactParseReport {
    pub fn skipped(&self) -> usize {
        self.blank + self.malformed + self.self_loops + self.duplicates
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct MetadataParseReport {
    pub lines: usize,
    pub blank: usize,
    pub valid: usize,
    pub malformed: usize,
    pub duplicates: usize,
    /// Rows assigning an already-assigned person to another department.
    pub conflicts: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BuildReport {
    pub people: usize,
    pub departments: usize,
    pub memberships: usize,
    /// People named only in the metadata file.
    pub metadata_only_people: usize,
    pub distinct_pairs: usize,
    pub contact_events: usize,
    pub contact_edges: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub contacts: ContactParseReport,
    pub metadata: MetadataParseReport,
    pub graph: BuildReport,
}

/// Parses contact lines, returning rows sorted by `(t, min(i,j), max(i,j))`
/// with exact duplicates removed.
pub fn parse_contacts<R: BufRead>(reader: R) -> Result<(Vec<ContactRow>, ContactParseReport)> {
    let mut report = ContactParseReport::default();
    let mut rows = Vec::new();
    for line in reader.lines() {
        let line = line?;
        report.lines += 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            report.blank += 1;
            continue;
        }
        let t = match fields.first().map(|f| f.parse::<u64>()) {
            Some(Ok(t)) if t > 0 && fields.len() >= 3 => t,
            _ => {
                report.malformed += 1;
                continue;
            }
        };
        if fields[1] == fields[2] {
            report.self_loops += 1;
            continue;
        }
        rows.push(ContactRow::new(t, fields[1], fields[2]));
    }

    let non_empty = report.lines - report.blank;
    if non_empty == 0 {
        return Err(Error::EmptyInput);
    }
    if 2 * report.malformed > non_empty {
        return Err(Error::MostlyMalformed {
            malformed: report.malformed,
            lines: non_empty,
        });
    }

    rows.sort_by(|a, b| {
        let (a_lo, a_hi) = a.ordered();
        let (b_lo, b_hi) = b.ordered();
        a.t.cmp(&b.t)
            .then_with(|| raw_id_cmp(a_lo, b_lo))
            .then_with(|| raw_id_cmp(a_hi, b_hi))
            .then_with(|| a.i.cmp(&b.i))
    });
    let before = rows.len();
    rows.dedup_by(|a, b| a.t == b.t && a.ordered() == b.ordered());
    report.duplicates = before - rows.len();
    report.valid = rows.len();
    Ok((rows, report))
}

/// Parses `i D_i` lines. The first department listed for a person wins.
pub fn parse_metadata<R: BufRead>(reader: R) -> Result<(Vec<MetadataRow>, MetadataParseReport)> {
    let mut report = MetadataParseReport::default();
    let mut rows = Vec::new();
    let mut seen: HashMap<String, String> = HashMap::new();
    for line in reader.lines() {
        let line = line?;
        report.lines += 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.as_slice() {
            [] => report.blank += 1,
            [_] => report.malformed += 1,
            [person, department, ..] => match seen.get(*person) {
                Some(d) if d == department => report.duplicates += 1,
                Some(_) => report.conflicts += 1,
                None => {
                    seen.insert(person.to_string(), department.to_string());
                    rows.push(MetadataRow {
                        i: person.to_string(),
                        department: department.to_string(),
                    });
                }
            },
        }
    }
    report.valid = rows.len();
    Ok((rows, report))
}

/// Builds `KG_raw`. Person ids are assigned in first-seen order over the
/// sorted contacts, then metadata-only people, then departments.
pub fn build_kg(contacts: &[ContactRow], metadata: &[MetadataRow]) -> Result<(KnowledgeGraph, BuildReport)> {
    let mut g = KnowledgeGraph::new();
    let mut report = BuildReport::default();
    for row in contacts {
        g.add_person(&row.i);
        g.add_person(&row.j);
    }
    let from_contacts = g.node_count();
    for row in metadata {
        g.add_person(&row.i);
    }
    report.metadata_only_people = g.node_count() - from_contacts;
    report.people = g.node_count();
    for row in metadata {
        g.add_department(&row.department);
    }
    report.departments = g.node_count() - report.people;

    for row in metadata {
        let person = g.add_person(&row.i);
        let dep = g.add_department(&row.department);
        g.add_membership(person, dep)?;
        report.memberships += 1;
    }
    for row in contacts {
        let i = g.add_person(&row.i);
        let j = g.add_person(&row.j);
        g.add_contact(i, j, row.t, Provenance::Direct)?;
    }
    g.compute_node_properties();

    report.distinct_pairs = g.contact_pair_count();
    report.contact_events = g.contact_event_count(None);
    report.contact_edges = g
        .edges()
        .iter()
        .filter(|e| e.relation == crate::graph::Relation::HasContactWith)
        .count();
    Ok((g, report))
}

pub fn write_contacts<W: Write>(rows: &[ContactRow], mut out: W) -> Result<()> {
    for r in rows {
        writeln!(out, "{} {} {}", r.t, r.i, r.j)?;
    }
    Ok(())
}

pub fn write_metadata<W: Write>(rows: &[MetadataRow], mut out: W) -> Result<()> {
    for r in rows {
        writeln!(out, "{} {}", r.i, r.department)?;
    }
    Ok(())
}

/// Distinct unordered pairs among rows, independent of graph construction.
pub fn distinct_pairs(rows: &[ContactRow]) -> usize {
    rows.iter()
        .map(|r| {
            let (a, b) = r.ordered();
            (a.to_owned(), b.to_owned())
        })
        .collect::<BTreeSet<_>>()
        .len()
}

/// Seconds of contact represented by `rows`.
pub fn contact_seconds(rows: &[ContactRow]) -> u64 {
    rows.len() as u64 * CONTACT_INTERVAL
}
