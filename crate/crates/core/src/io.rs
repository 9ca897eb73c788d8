//! File formats: graph JSON, operand files (JSON or little-endian binary), state
//! coefficient files.
//!
//! Graph JSON: `{"vertices": 2, "edges": [[1, 0], [0, 1]], "labels": {"delta": [1, 1],
//! "eps": ["u", "s"]}}` with 0-based vertex ids, edge order = array order, 1-based
//! letters in `delta` and `"u"`/`"s"` for plain/star.
//!
//! Operand JSON: a list of `N×N` matrices, each a list of rows of `[re, im]` pairs.
//! Operand binary: `u32 N`, `u32 K`, then `K·N²` pairs of `f64` (re, im), each matrix
//! row-major, everything little-endian.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::LinearGraph;
use crate::operand::{CMatrix, TensorOperand};
use crate::word::Letter;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphLabels {
    pub delta: Vec<usize>,
    pub eps: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub vertices: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<GraphLabels>,
}

impl GraphFile {
    pub fn from_graph(g: &LinearGraph, labels: Option<&[Letter]>) -> Self {
        GraphFile {
            vertices: g.vertex_count(),
            edges: g.edges().iter().map(|&(s, t)| [s, t]).collect(),
            labels: labels.map(|ls| GraphLabels {
                delta: ls.iter().map(|l| l.index + 1).collect(),
                eps: ls.iter().map(|l| if l.star { "s" } else { "u" }.to_string()).collect(),
            }),
        }
    }

    pub fn graph(&self) -> Result<LinearGraph> {
        LinearGraph::new(self.vertices, self.edges.iter().map(|e| (e[0], e[1])).collect())
    }

    pub fn letters(&self) -> Result<Option<Vec<Letter>>> {
        let Some(labels) = &self.labels else { return Ok(None) };
        if labels.delta.len() != self.edges.len() || labels.eps.len() != self.edges.len() {
            return Err(Error::Parse("labels must have one entry per edge".into()));
        }
        labels
            .delta
            .iter()
            .zip(&labels.eps)
            .map(|(&d, e)| {
                if d == 0 {
                    return Err(Error::Parse("delta labels are 1-based".into()));
                }
                match e.as_str() {
                    "u" => Ok(Letter::plain(d - 1)),
                    "s" => Ok(Letter::star(d - 1)),
                    other => Err(Error::Parse(format!("eps must be \"u\" or \"s\", got {:?}", other))),
                }
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }
}

pub fn parse_graph(text: &str) -> Result<(LinearGraph, Option<Vec<Letter>>)> {
    let file: GraphFile = serde_json::from_str(text)?;
    Ok((file.graph()?, file.letters()?))
}

pub fn read_graph(path: &Path) -> Result<(LinearGraph, Option<Vec<Letter>>)> {
    parse_graph(&fs::read_to_string(path)?)
}

pub fn graph_to_json(g: &LinearGraph, labels: Option<&[Letter]>) -> String {
    serde_json::to_string(&GraphFile::from_graph(g, labels)).expect("graph serialization")
}

type JsonMatrix = Vec<Vec<[f64; 2]>>;

fn matrix_from_rows(rows: &JsonMatrix) -> Result<CMatrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Parse("operand matrices must be square and non-empty".into()));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
}

/// Factored operand from a JSON list of row-major complex matrices.
pub fn parse_operand_json(text: &str) -> Result<TensorOperand> {
    let mats: Vec<JsonMatrix> = serde_json::from_str(text)?;
    TensorOperand::factored(mats.iter().map(matrix_from_rows).collect::<Result<_>>()?)
}

pub fn operand_to_json(factors: &[CMatrix]) -> String {
    let mats: Vec<JsonMatrix> = factors
        .iter()
        .map(|m| (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect())
        .collect();
    serde_json::to_string(&mats).expect("operand serialization")
}

pub fn parse_operand_binary(bytes: &[u8]) -> Result<TensorOperand> {
    let word = |at: usize| -> Result<u32> {
        bytes
            .get(at..at + 4)
            .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
            .ok_or_else(|| Error::Parse("truncated operand header".into()))
    };
    let n = word(0)? as usize;
    let k = word(4)? as usize;
    let expected = n
        .checked_mul(n)
        .and_then(|x| x.checked_mul(k))
        .and_then(|x| x.checked_mul(16))
        .and_then(|x| x.checked_add(8))
        .ok_or_else(|| Error::Parse("operand header overflows".into()))?;
    if bytes.len() != expected {
        return Err(Error::Parse(format!(
            "operand file has {} bytes, header N = {}, K = {} needs {}",
            bytes.len(),
            n,
            k,
            expected
        )));
    }
    let float = |at: usize| f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
    let factors = (0..k)
        .map(|f| {
            CMatrix::from_fn(n, n, |i, j| {
                let at = 8 + 16 * ((f * n + i) * n + j);
                Complex64::new(float(at), float(at + 8))
            })
        })
        .collect();
    TensorOperand::factored(factors)
}

pub fn operand_to_binary(factors: &[CMatrix]) -> Vec<u8> {
    let n = factors.first().map(|m| m.nrows()).unwrap_or(0);
    let mut out = Vec::with_capacity(8 + 16 * n * n * factors.len());
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&(factors.len() as u32).to_le_bytes());
    for m in factors {
        for i in 0..n {
            for j in 0..n {
                out.extend_from_slice(&m[(i, j)].re.to_le_bytes());
                out.extend_from_slice(&m[(i, j)].im.to_le_bytes());
            }
        }
    }
    out
}

/// JSON when the first non-blank byte is `[`, binary otherwise.
pub fn read_operand(path: &Path) -> Result<TensorOperand> {
    let bytes = fs::read(path)?;
    match bytes.iter().find(|b| !b.is_ascii_whitespace()) {
        Some(b'[') => {
            let text = std::str::from_utf8(&bytes).map_err(|e| Error::Parse(e.to_string()))?;
            parse_operand_json(text)
        }
        _ => parse_operand_binary(&bytes),
    }
}

/// State coefficients: `{"coefficients": [[re, im], ...]}` or a bare list, in
/// lexicographic restricted-growth order of the partitions of `2K`.
pub fn parse_coefficients(text: &str) -> Result<Vec<Complex64>> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Coeffs {
        Wrapped { coefficients: Vec<[f64; 2]> },
        Bare(Vec<[f64; 2]>),
    }
    let list = match serde_json::from_str::<Coeffs>(text)? {
        Coeffs::Wrapped { coefficients } => coefficients,
        Coeffs::Bare(v) => v,
    };
    Ok(list.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
}
