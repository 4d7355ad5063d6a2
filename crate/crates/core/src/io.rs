//! The hypergraph file format.
//!
//! ```json
//! {"d": 2, "edges": [{"id": 0, "parts": [{"copy": 1, "lo": "0/1", "hi": "1/2"},
//!                                         {"copy": 2, "lo": "1/2", "hi": "1/1"}]}]}
//! ```
//!
//! Copies are numbered from 1. Every edge must list each copy exactly once.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{DEdge, DIntervalHypergraph, Interval};
use crate::rational::Rational;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HypergraphFile {
    d: usize,
    edges: Vec<EdgeFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeFile {
    id: usize,
    parts: Vec<PartFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartFile {
    copy: usize,
    lo: Rational,
    hi: Rational,
}

pub fn parse_hypergraph(text: &str) -> Result<DIntervalHypergraph> {
    let file: HypergraphFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: {
            // serde_json appends the position, which is reported separately.
            let full = e.to_string();
            let suffix = format!(" at line {} column {}", e.line(), e.column());
            full.strip_suffix(&suffix).map(str::to_string).unwrap_or(full)
        },
    })?;
    if file.d == 0 {
        return Err(Error::invalid("d", "must be positive"));
    }
    let mut edges = Vec::with_capacity(file.edges.len());
    for (k, edge) in file.edges.into_iter().enumerate() {
        let mut slots: Vec<Option<Interval>> = vec![None; file.d];
        for (p, part) in edge.parts.into_iter().enumerate() {
            let field = format!("edges[{k}].parts[{p}]");
            if part.copy == 0 || part.copy > file.d {
                return Err(Error::invalid(
                    format!("{field}.copy"),
                    format!("copy {} outside 1..={}", part.copy, file.d),
                ));
            }
            if part.lo > part.hi {
                return Err(Error::invalid(
                    format!("{field}.lo"),
                    format!("lo {} > hi {}", part.lo, part.hi),
                ));
            }
            if part.lo.is_negative() || part.hi > Rational::one() {
                return Err(Error::invalid(field, "interval leaves [0,1]"));
            }
            let slot = &mut slots[part.copy - 1];
            if slot.is_some() {
                return Err(Error::invalid(
                    format!("{field}.copy"),
                    format!("copy {} listed twice", part.copy),
                ));
            }
            *slot = Some(Interval { lo: part.lo, hi: part.hi });
        }
        let parts = slots
            .into_iter()
            .enumerate()
            .map(|(i, s)| {
                s.ok_or_else(|| {
                    Error::invalid(format!("edges[{k}].parts"), format!("copy {} missing", i + 1))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        edges.push(DEdge { id: edge.id, parts });
    }
    DIntervalHypergraph::new(file.d, edges)
}

pub fn read_hypergraph(path: &Path) -> Result<DIntervalHypergraph> {
    let text = std::fs::read_to_string(path)?;
    parse_hypergraph(&text)
}

pub fn hypergraph_to_value(h: &DIntervalHypergraph) -> serde_json::Value {
    let file = HypergraphFile {
        d: h.d(),
        edges: h
            .edges()
            .iter()
            .map(|e| EdgeFile {
                id: e.id,
                parts: e
                    .parts
                    .iter()
                    .enumerate()
                    .map(|(i, iv)| PartFile {
                        copy: i + 1,
                        lo: iv.lo.clone(),
                        hi: iv.hi.clone(),
                    })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_value(file).expect("hypergraph serializes")
}

pub fn hypergraph_to_json(h: &DIntervalHypergraph) -> String {
    serde_json::to_string(&hypergraph_to_value(h)).expect("hypergraph serializes")
}
