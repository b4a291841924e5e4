//! Reading chains from link graphs and matrix files, and writing them back.
//!
//! Edge lists hold one `src dst` pair per line with 1-based node ids and `#`
//! comments. Each node moves uniformly over its distinct out-neighbours, and
//! the node count is the largest id that appears. Matrix files are CSV (one
//! row per line) or JSON, either a bare array of rows or an object with
//! `matrix` and an optional `damping` vector.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::{DampingVector, Distribution, StochasticMatrix, DEFAULT_ROW_TOL};
use crate::error::ChainError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputFormat {
    EdgeList,
    MatrixCsv,
    MatrixJson,
}

impl InputFormat {
    /// Guesses the format from the file extension: `.csv`, `.json`, anything else is an edge list.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => Self::MatrixCsv,
            Some(e) if e.eq_ignore_ascii_case("json") => Self::MatrixJson,
            _ => Self::EdgeList,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::EdgeList => "edge-list",
            Self::MatrixCsv => "matrix-csv",
            Self::MatrixJson => "matrix-json",
        }
    }
}

impl fmt::Display for InputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "edge-list" => Ok(Self::EdgeList),
            "matrix-csv" => Ok(Self::MatrixCsv),
            "matrix-json" => Ok(Self::MatrixJson),
            _ => Err(format!("unknown format `{s}`")),
        }
    }
}

/// What to do with a node that has no out-links.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DanglingPolicy {
    #[default]
    Reject,
    /// The node links to itself.
    SelfLoop,
    /// The node jumps uniformly to every node.
    UniformJump,
}

impl DanglingPolicy {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Reject => "reject",
            Self::SelfLoop => "self-loop",
            Self::UniformJump => "uniform-jump",
        }
    }
}

impl FromStr for DanglingPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "reject" => Ok(Self::Reject),
            "self-loop" => Ok(Self::SelfLoop),
            "uniform-jump" => Ok(Self::UniformJump),
            _ => Err(format!("unknown dangling policy `{s}`")),
        }
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: node id `{id}` is not a positive integer")]
    BadNodeId { line: usize, id: String },

    #[error("dangling nodes without out-links: {nodes:?}; choose a dangling policy")]
    Dangling { nodes: Vec<usize> },

    #[error("invalid JSON: {0}")]
    Json(String),

    #[error(transparent)]
    Chain(#[from] ChainError),
}

impl IngestError {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Io { .. } => "io",
            Self::Parse { .. } => "parse",
            Self::BadNodeId { .. } => "bad_node_id",
            Self::Dangling { .. } => "dangling_node",
            Self::Json(_) => "json",
            Self::Chain(e) => e.kind(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IngestOptions {
    /// `None` picks the format from the file extension.
    pub format: Option<InputFormat>,
    pub dangling: DanglingPolicy,
    pub row_tol: f64,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            format: None,
            dangling: DanglingPolicy::Reject,
            row_tol: DEFAULT_ROW_TOL,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphInput {
    pub format: InputFormat,
    pub node_count: usize,
    pub matrix: StochasticMatrix,
    /// Present only when the file carries its own damping vector.
    pub damping: Option<DampingVector>,
}

impl GraphInput {
    /// The file's damping vector, or uniform 1/m.
    pub fn damping_or_uniform(&self) -> DampingVector {
        self.damping
            .clone()
            .unwrap_or_else(|| DampingVector::uniform(self.node_count))
    }
}

fn read(path: &Path) -> Result<String, IngestError> {
    std::fs::read_to_string(path).map_err(|e| IngestError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn ingest(path: &Path, options: &IngestOptions) -> Result<GraphInput, IngestError> {
    let format = options
        .format
        .unwrap_or_else(|| InputFormat::from_path(path));
    let text = read(path)?;
    parse(&text, format, options)
}

/// Parses in-memory text in the given format.
pub fn parse(
    text: &str,
    format: InputFormat,
    options: &IngestOptions,
) -> Result<GraphInput, IngestError> {
    let (matrix, damping) = match format {
        InputFormat::EdgeList => (parse_edge_list(text, options.dangling)?, None),
        InputFormat::MatrixCsv => (parse_matrix_csv(text, options.row_tol)?, None),
        InputFormat::MatrixJson => parse_matrix_json(text, options.row_tol)?,
    };
    Ok(GraphInput {
        format,
        node_count: matrix.dim(),
        matrix,
        damping,
    })
}

fn node_id(token: &str, line: usize) -> Result<usize, IngestError> {
    match token.parse::<usize>() {
        Ok(id) if id >= 1 => Ok(id),
        _ => Err(IngestError::BadNodeId {
            line,
            id: token.to_string(),
        }),
    }
}

/// Builds the hyperlink matrix of an edge list. Repeated edges count once.
pub fn parse_edge_list(
    text: &str,
    dangling: DanglingPolicy,
) -> Result<StochasticMatrix, IngestError> {
    let mut edges = BTreeSet::new();
    let mut m = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(IngestError::Parse {
                line,
                message: format!("expected `src dst`, found {} fields", tokens.len()),
            });
        }
        let src = node_id(tokens[0], line)?;
        let dst = node_id(tokens[1], line)?;
        m = m.max(src).max(dst);
        edges.insert((src - 1, dst - 1));
    }
    if m == 0 {
        return Err(ChainError::Empty.into());
    }

    let mut out: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (s, d) in edges {
        out[s].push(d);
    }
    let dangling_nodes: Vec<usize> = (0..m)
        .filter(|&i| out[i].is_empty())
        .map(|i| i + 1)
        .collect();
    if !dangling_nodes.is_empty() && dangling == DanglingPolicy::Reject {
        return Err(IngestError::Dangling {
            nodes: dangling_nodes,
        });
    }

    let mut data = vec![0.0; m * m];
    for (i, targets) in out.iter().enumerate() {
        let row = &mut data[i * m..(i + 1) * m];
        if targets.is_empty() {
            match dangling {
                DanglingPolicy::SelfLoop => row[i] = 1.0,
                _ => row.fill(1.0 / m as f64),
            }
        } else {
            let w = 1.0 / targets.len() as f64;
            for &t in targets {
                row[t] = w;
            }
        }
    }
    Ok(StochasticMatrix::new(m, data)?)
}

/// One matrix row per CSV record; blank lines and `#` lines are skipped.
pub fn parse_matrix_csv(text: &str, row_tol: f64) -> Result<StochasticMatrix, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| IngestError::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let row = record
            .iter()
            .map(|f| {
                f.parse::<f64>().map_err(|_| IngestError::Parse {
                    line,
                    message: format!("`{f}` is not a number"),
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(row);
    }
    matrix_from_rows(rows, row_tol)
}

fn matrix_from_rows(rows: Vec<Vec<f64>>, row_tol: f64) -> Result<StochasticMatrix, IngestError> {
    let m = rows.len();
    if m == 0 {
        return Err(ChainError::Empty.into());
    }
    if let Some(bad) = rows.iter().find(|r| r.len() != m) {
        return Err(ChainError::DimensionMismatch {
            expected: m,
            found: bad.len(),
        }
        .into());
    }
    Ok(StochasticMatrix::with_tolerance(m, rows.concat(), row_tol)?)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixFile {
    Rows(Vec<Vec<f64>>),
    Object {
        matrix: Vec<Vec<f64>>,
        #[serde(default)]
        damping: Option<Vec<f64>>,
    },
}

pub fn parse_matrix_json(
    text: &str,
    row_tol: f64,
) -> Result<(StochasticMatrix, Option<DampingVector>), IngestError> {
    let file: MatrixFile =
        serde_json::from_str(text).map_err(|e| IngestError::Json(e.to_string()))?;
    let (rows, damping) = match file {
        MatrixFile::Rows(rows) => (rows, None),
        MatrixFile::Object { matrix, damping } => (matrix, damping),
    };
    let matrix = matrix_from_rows(rows, row_tol)?;
    let damping = damping
        .map(|w| {
            if w.len() != matrix.dim() {
                return Err(ChainError::DimensionMismatch {
                    expected: matrix.dim(),
                    found: w.len(),
                });
            }
            DampingVector::with_tolerance(w, row_tol)
        })
        .transpose()?;
    Ok((matrix, damping))
}

/// Reads a damping vector: a JSON array, or numbers separated by commas or whitespace.
pub fn read_damping(path: &Path, dim: usize, row_tol: f64) -> Result<DampingVector, IngestError> {
    parse_damping(&read(path)?, dim, row_tol)
}

pub fn parse_damping(text: &str, dim: usize, row_tol: f64) -> Result<DampingVector, IngestError> {
    Ok(DampingVector::with_tolerance(
        parse_vector(text, dim)?,
        row_tol,
    )?)
}

/// Reads an initial distribution in the same formats as a damping vector; zeros are allowed.
pub fn read_distribution(
    path: &Path,
    dim: usize,
    row_tol: f64,
) -> Result<Distribution, IngestError> {
    parse_distribution(&read(path)?, dim, row_tol)
}

pub fn parse_distribution(
    text: &str,
    dim: usize,
    row_tol: f64,
) -> Result<Distribution, IngestError> {
    Ok(Distribution::with_tolerance(
        parse_vector(text, dim)?,
        row_tol,
    )?)
}

fn parse_vector(text: &str, dim: usize) -> Result<Vec<f64>, IngestError> {
    let trimmed = text.trim();
    let weights: Vec<f64> = if trimmed.starts_with('[') {
        serde_json::from_str(trimmed).map_err(|e| IngestError::Json(e.to_string()))?
    } else {
        let mut out = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let content = raw.split('#').next().unwrap_or("");
            for tok in content.split(|c: char| c == ',' || c.is_whitespace()) {
                if tok.is_empty() {
                    continue;
                }
                out.push(tok.parse::<f64>().map_err(|_| IngestError::Parse {
                    line: idx + 1,
                    message: format!("`{tok}` is not a number"),
                })?);
            }
        }
        out
    };
    if weights.len() != dim {
        return Err(ChainError::DimensionMismatch {
            expected: dim,
            found: weights.len(),
        }
        .into());
    }
    Ok(weights)
}

#[derive(Serialize)]
struct MatrixOut<'a> {
    matrix: Vec<&'a [f64]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    damping: Option<&'a [f64]>,
}

/// Matrix JSON at full precision; reading it back gives the identical matrix.
pub fn matrix_to_json(matrix: &StochasticMatrix, damping: Option<&DampingVector>) -> String {
    let out = MatrixOut {
        matrix: matrix.rows().collect(),
        damping: damping.map(|d| d.weights()),
    };
    serde_json::to_string(&out).expect("finite matrix serializes")
}
