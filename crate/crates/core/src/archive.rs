//! Versioned line-oriented text archives for graphs and dense matrices.
//!
//! Graph archive layout (tab-separated, LF line endings):
//!
//! ```text
//! kcgml-graph 1
//! nodes <n>
//! <id> <name> <labels> <properties>
//! edges <m>
//! <head> <tail> <relation> <provenance> <strength> <total_contact_time> <timestamps>
//! end
//! ```
//!
//! `properties` is `-` or `cp,deg,T,avgT,at_risk`; `timestamps` is `-` or a
//! comma-separated list. Floats use the shortest representation that parses
//! back to the same bits, so re-serialisation is byte-identical.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{
    EdgeRecord, KnowledgeGraph, NodeId, NodeLabel, NodeProperties, NodeRecord, Provenance, Relation, CONTACT_INTERVAL,
};

pub const GRAPH_MAGIC: &str = "kcgml-graph";
pub const MATRIX_MAGIC: &str = "kcgml-matrix";
pub const FORMAT_VERSION: &str = "1";

pub fn write_graph<W: Write>(graph: &KnowledgeGraph, mut out: W) -> Result<()> {
    writeln!(out, "{GRAPH_MAGIC} {FORMAT_VERSION}")?;
    writeln!(out, "nodes {}", graph.node_count())?;
    for n in graph.nodes() {
        let labels: Vec<&str> = n.labels.iter().map(|l| l.as_str()).collect();
        let props = match &n.properties {
            None => "-".to_owned(),
            Some(p) => format!(
                "{},{},{},{},{}",
                p.contagion_probability,
                p.degree,
                p.total_contact_time,
                p.average_contact_time,
                u8::from(p.at_risk)
            ),
        };
        writeln!(out, "{}\t{}\t{}\t{}", n.id, n.name, labels.join(","), props)?;
    }
    writeln!(out, "edges {}", graph.edge_count())?;
    for e in graph.edges() {
        let ts = if e.timestamps.is_empty() {
            "-".to_owned()
        } else {
            e.timestamps.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
        };
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            e.head,
            e.tail,
            e.relation.as_str(),
            e.provenance.as_str(),
            e.strength,
            e.total_contact_time,
            ts
        )?;
    }
    writeln!(out, "end")?;
    Ok(())
}

pub fn serialize_graph(graph: &KnowledgeGraph, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_graph(graph, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn deserialize_graph(path: &Path) -> Result<KnowledgeGraph> {
    read_graph(BufReader::new(File::open(path)?))
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn new(reader: R) -> Self {
        Self {
            inner: reader.lines(),
            line: 0,
        }
    }

    fn next(&mut self, what: &str) -> Result<String> {
        self.line += 1;
        match self.inner.next() {
            Some(line) => Ok(line?),
            None => Err(Error::Truncated(format!("expected {what} at line {}", self.line))),
        }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            message: message.into(),
        }
    }

    fn header(&mut self, magic: &str) -> Result<()> {
        let line = self.next("header")?;
        let mut parts = line.split(' ');
        if parts.next() != Some(magic) {
            return Err(self.err(format!("missing {magic} header")));
        }
        let found = parts.next().unwrap_or("");
        if found != FORMAT_VERSION {
            return Err(Error::VersionMismatch {
                expected: FORMAT_VERSION.into(),
                found: found.into(),
            });
        }
        Ok(())
    }

    fn counted(&mut self, keyword: &str) -> Result<usize> {
        let line = self.next(keyword)?;
        line.strip_prefix(keyword)
            .and_then(|rest| rest.strip_prefix(' '))
            .and_then(|n| n.parse().ok())
            .ok_or_else(|| self.err(format!("expected `{keyword} <count>`")))
    }

    fn end(&mut self) -> Result<()> {
        match self.next("end")?.as_str() {
            "end" => Ok(()),
            other => Err(self.err(format!("expected `end`, found {other:?}"))),
        }
    }

    fn parse<T: FromStr>(&self, s: &str, what: &str) -> Result<T> {
        s.parse().map_err(|_| self.err(format!("invalid {what}: {s:?}")))
    }
}

pub fn read_graph<R: BufRead>(reader: R) -> Result<KnowledgeGraph> {
    let mut lines = Lines::new(reader);
    lines.header(GRAPH_MAGIC)?;
    let mut graph = KnowledgeGraph::new();

    let n = lines.counted("nodes")?;
    for _ in 0..n {
        let line = lines.next("node row")?;
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 4 {
            return Err(lines.err("node row needs 4 fields"));
        }
        let id = NodeId(lines.parse(f[0], "node id")?);
        let labels = f[2]
            .split(',')
            .map(|l| NodeLabel::parse(l).ok_or_else(|| lines.err(format!("unknown label {l:?}"))))
            .collect::<Result<BTreeSet<_>>>()?;
        let properties = if f[3] == "-" {
            None
        } else {
            let p: Vec<&str> = f[3].split(',').collect();
            if p.len() != 5 {
                return Err(lines.err("properties need 5 values"));
            }
            let cp: f64 = lines.parse(p[0], "contagion probability")?;
            if !(0.0..=1.0).contains(&cp) {
                return Err(lines.err("contagion probability outside [0, 1]"));
            }
            Some(NodeProperties {
                contagion_probability: cp,
                degree: lines.parse(p[1], "degree")?,
                total_contact_time: lines.parse(p[2], "total contact time")?,
                average_contact_time: lines.parse(p[3], "average contact time")?,
                at_risk: lines.parse::<u8>(p[4], "at_risk flag")? != 0,
            })
        };
        graph
            .push_node_record(NodeRecord {
                id,
                name: f[1].to_owned(),
                labels,
                properties,
            })
            .map_err(|_| lines.err(format!("node id {id} out of sequence")))?;
    }

    let m = lines.counted("edges")?;
    for _ in 0..m {
        let line = lines.next("edge row")?;
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 7 {
            return Err(lines.err("edge row needs 7 fields"));
        }
        let relation = Relation::parse(f[2]).ok_or_else(|| lines.err(format!("unknown relation {:?}", f[2])))?;
        let provenance = Provenance::parse(f[3]).ok_or_else(|| lines.err(format!("unknown provenance {:?}", f[3])))?;
        let strength: f64 = lines.parse(f[4], "strength")?;
        if !(0.0..=1.0).contains(&strength) {
            return Err(lines.err("strength outside [0, 1]"));
        }
        let total_contact_time: u64 = lines.parse(f[5], "total contact time")?;
        let timestamps: Vec<u64> = if f[6] == "-" {
            Vec::new()
        } else {
            f[6].split(',')
                .map(|t| lines.parse(t, "timestamp"))
                .collect::<Result<_>>()?
        };
        if timestamps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(lines.err("timestamps must be strictly increasing"));
        }
        if relation == Relation::HasContactWith && total_contact_time != CONTACT_INTERVAL * timestamps.len() as u64 {
            return Err(lines.err("total contact time disagrees with timestamps"));
        }
        let record = EdgeRecord {
            head: NodeId(lines.parse(f[0], "head")?),
            tail: NodeId(lines.parse(f[1], "tail")?),
            relation,
            total_contact_time,
            timestamps,
            provenance,
            strength,
        };
        graph.push_edge_record(record).map_err(|e| lines.err(e.to_string()))?;
    }
    lines.end()?;
    Ok(graph)
}

/// A named dense matrix with optional column names.
#[derive(Clone, Debug, PartialEq)]
pub struct NamedMatrix {
    pub name: String,
    pub columns: Vec<String>,
    pub data: DMatrix<f64>,
}

pub fn write_matrices<W: Write>(matrices: &[NamedMatrix], mut out: W) -> Result<()> {
    writeln!(out, "{MATRIX_MAGIC} {FORMAT_VERSION}")?;
    writeln!(out, "matrices {}", matrices.len())?;
    for m in matrices {
        writeln!(out, "name {}", m.name)?;
        writeln!(out, "shape {} {}", m.data.nrows(), m.data.ncols())?;
        if m.columns.is_empty() {
            writeln!(out, "columns -")?;
        } else {
            writeln!(out, "columns {}", m.columns.join(","))?;
        }
        for r in 0..m.data.nrows() {
            let row: Vec<String> = m.data.row(r).iter().map(f64::to_string).collect();
            writeln!(out, "{}", row.join("\t"))?;
        }
    }
    writeln!(out, "end")?;
    Ok(())
}

pub fn read_matrices<R: BufRead>(reader: R) -> Result<Vec<NamedMatrix>> {
    let mut lines = Lines::new(reader);
    lines.header(MATRIX_MAGIC)?;
    let count = lines.counted("matrices")?;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let name_line = lines.next("name")?;
        let name = name_line
            .strip_prefix("name ")
            .ok_or_else(|| lines.err("expected `name <name>`"))?
            .to_owned();
        let shape = lines.next("shape")?;
        let dims: Vec<usize> = shape
            .strip_prefix("shape ")
            .ok_or_else(|| lines.err("expected `shape <rows> <cols>`"))?
            .split(' ')
            .map(|d| lines.parse(d, "dimension"))
            .collect::<Result<_>>()?;
        let [rows, cols] = dims[..] else {
            return Err(lines.err("shape needs two dimensions"));
        };
        let col_line = lines.next("columns")?;
        let columns = match col_line.strip_prefix("columns ") {
            Some("-") => Vec::new(),
            Some(c) => c.split(',').map(str::to_owned).collect(),
            None => return Err(lines.err("expected `columns ...`")),
        };
        let mut data = DMatrix::zeros(rows, cols);
        for r in 0..rows {
            let line = lines.next("matrix row")?;
            let values: Vec<f64> = if cols == 0 {
                Vec::new()
            } else {
                line.split('\t')
                    .map(|v| lines.parse(v, "value"))
                    .collect::<Result<_>>()?
            };
            if values.len() != cols {
                return Err(lines.err(format!("row has {} values, expected {cols}", values.len())));
            }
            for (c, v) in values.into_iter().enumerate() {
                data[(r, c)] = v;
            }
        }
        out.push(NamedMatrix { name, columns, data });
    }
    lines.end()?;
    Ok(out)
}
