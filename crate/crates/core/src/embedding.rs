use std::fmt;
use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::NodeId;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    Node2vec,
    Graphsage,
}

impl Generator {
    pub fn as_str(self) -> &'static str {
        match self {
            Generator::Node2vec => "node2vec",
            Generator::Graphsage => "graphsage",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "node2vec" => Some(Generator::Node2vec),
            "graphsage" => Some(Generator::Graphsage),
            _ => None,
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One row per node, rows in ascending node id order.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingMatrix {
    pub node_ids: Vec<NodeId>,
    pub values: DMatrix<f64>,
    pub generator: Generator,
    pub seed: u64,
}

impl EmbeddingMatrix {
    pub fn new(node_ids: Vec<NodeId>, values: DMatrix<f64>, generator: Generator, seed: u64) -> Result<Self> {
        if node_ids.len() != values.nrows() {
            return Err(Error::shape("embedding rows", node_ids.len(), values.nrows()));
        }
        Ok(Self {
            node_ids,
            values,
            generator,
            seed,
        })
    }

    pub fn dimensions(&self) -> usize {
        self.values.ncols()
    }

    pub fn len(&self) -> usize {
        self.node_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_ids.is_empty()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.values.row(i).iter().copied().collect()
    }

    /// CSV with header `node_id,dim_0,...,dim_{d-1}`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let mut header = vec!["node_id".to_owned()];
        header.extend((0..self.dimensions()).map(|k| format!("dim_{k}")));
        writeln!(out, "{}", header.join(","))?;
        for (r, id) in self.node_ids.iter().enumerate() {
            let mut fields = vec![id.to_string()];
            fields.extend(self.values.row(r).iter().map(f64::to_string));
            writeln!(out, "{}", fields.join(","))?;
        }
        Ok(())
    }

    /// Reads the CSV written by [`Self::write_csv`]; the generator and seed
    /// are not stored in the file and must be supplied.
    pub fn read_csv<R: BufRead>(reader: R, generator: Generator, seed: u64) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines.next().ok_or(Error::EmptyInput)??;
        let dims = header.split(',').count().saturating_sub(1);
        if !header.starts_with("node_id") {
            return Err(Error::Parse {
                line: 1,
                message: "missing node_id header".into(),
            });
        }
        let mut ids = Vec::new();
        let mut data = Vec::new();
        for (k, line) in lines.enumerate() {
            let line = line?;
            let bad = |message: String| Error::Parse { line: k + 2, message };
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != dims + 1 {
                return Err(bad(format!("expected {} fields, found {}", dims + 1, fields.len())));
            }
            ids.push(NodeId(fields[0].parse().map_err(|_| bad("bad node id".into()))?));
            for f in &fields[1..] {
                data.push(f.parse::<f64>().map_err(|_| bad(format!("bad value {f:?}")))?);
            }
        }
        let values = DMatrix::from_row_slice(ids.len(), dims, &data);
        Self::new(ids, values, generator, seed)
    }
}
