//! Dataset selection by string, as used on the command line.
//!
//! ```text
//! edges:PATH                 adjacency rows of a graph, b = A x + 0.1 z
//! neighborhoods:PATH         closed neighborhoods of a graph
//! ratings:PATH               rating triples
//! cooccur:PATH               co-occurrence triples
//! rows:PATH                  labeled sparse rows
//! synth-ls:rows=R,cols=C,nnz=K[,noise=S]
//! synth-ratings:rows=R,cols=C,rank=K[,observed=P]
//! synth-cooccur:words=W,pairs=N
//! synth-graph:nodes=N,degree=D           adjacency rows, b = A x + 0.1 z
//! synth-neighborhoods:nodes=N,degree=D
//! synth-powerlaw:rows=R,cols=C,nnz=K[,exponent=E]
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::formats::{read_edge_list, read_labeled_rows, read_triples, EdgeList};
use super::synth::{synth_cooccurrence, synth_graph, synth_least_squares, synth_power_law_rows, synth_ratings};
use super::Dataset;
use crate::error::{input_err, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphUse {
    /// One update per adjacency row, support = neighbors.
    Rows,
    /// One update per vertex, support = the vertex and its neighbors.
    Neighborhoods,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSpec {
    EdgeList { path: PathBuf, usage: GraphUse },
    Ratings { path: PathBuf },
    Cooccurrence { path: PathBuf },
    LabeledRows { path: PathBuf },
    SynthLeastSquares { rows: usize, cols: usize, nnz: usize, noise: f64 },
    SynthRatings { rows: usize, cols: usize, rank: usize, observed: f64 },
    SynthCooccurrence { words: usize, pairs: usize },
    SynthGraph { nodes: usize, degree: f64, usage: GraphUse },
    SynthPowerLaw { rows: usize, cols: usize, nnz: usize, exponent: f64 },
}

struct Params(BTreeMap<String, String>);

impl Params {
    fn parse(s: &str) -> Result<Self> {
        let mut m = BTreeMap::new();
        for kv in s.split(',').filter(|t| !t.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| input_err!("expected key=value, got `{kv}`"))?;
            m.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Params(m))
    }

    fn get<T: FromStr>(&mut self, key: &str, default: Option<T>) -> Result<T> {
        match self.0.remove(key) {
            Some(v) => v.parse().map_err(|_| input_err!("bad value `{v}` for `{key}`")),
            None => default.ok_or_else(|| input_err!("missing `{key}`")),
        }
    }

    fn finish(self) -> Result<()> {
        match self.0.keys().next() {
            Some(k) => Err(input_err!("unknown parameter `{k}`")),
            None => Ok(()),
        }
    }
}

impl FromStr for DatasetSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| input_err!("dataset `{s}` should look like kind:args"))?;
        let path = || PathBuf::from(rest);
        let p = || Params::parse(rest);
        let spec = match kind {
            "edges" => DatasetSpec::EdgeList {
                path: path(),
                usage: GraphUse::Rows,
            },
            "neighborhoods" => DatasetSpec::EdgeList {
                path: path(),
                usage: GraphUse::Neighborhoods,
            },
            "ratings" => DatasetSpec::Ratings { path: path() },
            "cooccur" => DatasetSpec::Cooccurrence { path: path() },
            "rows" => DatasetSpec::LabeledRows { path: path() },
            "synth-ls" => {
                let mut q = p()?;
                let spec = DatasetSpec::SynthLeastSquares {
                    rows: q.get("rows", None)?,
                    cols: q.get("cols", None)?,
                    nnz: q.get("nnz", None)?,
                    noise: q.get("noise", Some(0.1))?,
                };
                q.finish()?;
                spec
            }
            "synth-ratings" => {
                let mut q = p()?;
                let spec = DatasetSpec::SynthRatings {
                    rows: q.get("rows", None)?,
                    cols: q.get("cols", None)?,
                    rank: q.get("rank", None)?,
                    observed: q.get("observed", Some(0.3))?,
                };
                q.finish()?;
                spec
            }
            "synth-cooccur" => {
                let mut q = p()?;
                let spec = DatasetSpec::SynthCooccurrence {
                    words: q.get("words", None)?,
                    pairs: q.get("pairs", None)?,
                };
                q.finish()?;
                spec
            }
            "synth-graph" | "synth-neighborhoods" => {
                let mut q = p()?;
                let spec = DatasetSpec::SynthGraph {
                    nodes: q.get("nodes", None)?,
                    degree: q.get("degree", None)?,
                    usage: if kind == "synth-graph" {
                        GraphUse::Rows
                    } else {
                        GraphUse::Neighborhoods
                    },
                };
                q.finish()?;
                spec
            }
            "synth-powerlaw" => {
                let mut q = p()?;
                let spec = DatasetSpec::SynthPowerLaw {
                    rows: q.get("rows", None)?,
                    cols: q.get("cols", None)?,
                    nnz: q.get("nnz", None)?,
                    exponent: q.get("exponent", Some(1.1))?,
                };
                q.finish()?;
                spec
            }
            other => return Err(input_err!("unknown dataset kind `{other}`")),
        };
        Ok(spec)
    }
}

impl fmt::Display for DatasetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetSpec::EdgeList { path, usage } => match usage {
                GraphUse::Rows => write!(f, "edges:{}", path.display()),
                GraphUse::Neighborhoods => write!(f, "neighborhoods:{}", path.display()),
            },
            DatasetSpec::Ratings { path } => write!(f, "ratings:{}", path.display()),
            DatasetSpec::Cooccurrence { path } => write!(f, "cooccur:{}", path.display()),
            DatasetSpec::LabeledRows { path } => write!(f, "rows:{}", path.display()),
            DatasetSpec::SynthLeastSquares { rows, cols, nnz, noise } => {
                write!(f, "synth-ls:rows={rows},cols={cols},nnz={nnz},noise={noise}")
            }
            DatasetSpec::SynthRatings { rows, cols, rank, observed } => {
                write!(f, "synth-ratings:rows={rows},cols={cols},rank={rank},observed={observed}")
            }
            DatasetSpec::SynthCooccurrence { words, pairs } => write!(f, "synth-cooccur:words={words},pairs={pairs}"),
            DatasetSpec::SynthGraph { nodes, degree, usage } => {
                let kind = match usage {
                    GraphUse::Rows => "synth-graph",
                    GraphUse::Neighborhoods => "synth-neighborhoods",
                };
                write!(f, "{kind}:nodes={nodes},degree={degree}")
            }
            DatasetSpec::SynthPowerLaw { rows, cols, nnz, exponent } => {
                write!(f, "synth-powerlaw:rows={rows},cols={cols},nnz={nnz},exponent={exponent}")
            }
        }
    }
}

fn open(path: &PathBuf) -> Result<BufReader<File>> {
    let f = File::open(path).map_err(|e| input_err!("cannot open {}: {e}", path.display()))?;
    Ok(BufReader::new(f))
}

/// Symmetric adjacency rows with targets `b = A x + 0.1 z` for seeded
/// standard-normal `x`, `z`.
pub fn adjacency_rows(name: String, e: &EdgeList, seed: u64) -> Result<Dataset> {
    let n = e.num_vertices;
    let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    for &(u, v, w) in &e.edges {
        rows[u as usize].push((v, w));
        rows[v as usize].push((u, w));
    }
    let base = Dataset::from_rows(name, rows, vec![0.0; n], n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let ax = base.mat_vec(&x);
    let b = ax
        .iter()
        .map(|v| {
            let z: f64 = StandardNormal.sample(&mut rng);
            v + 0.1 * z
        })
        .collect();
    base.with_targets(b)
}

fn graph_dataset(name: String, e: &EdgeList, usage: GraphUse, seed: u64) -> Result<Dataset> {
    match usage {
        GraphUse::Rows => adjacency_rows(name, e, seed),
        GraphUse::Neighborhoods => Dataset::neighborhoods(name, e),
    }
}

/// Loads or generates the dataset. `seed` drives generators and synthetic
/// targets; file contents are used as is.
pub fn load(spec: &DatasetSpec, seed: u64) -> Result<Dataset> {
    let name = spec.to_string();
    match spec {
        DatasetSpec::EdgeList { path, usage } => graph_dataset(name, &read_edge_list(open(path)?)?, *usage, seed),
        DatasetSpec::Ratings { path } => {
            let t = read_triples(open(path)?)?;
            Dataset::from_ratings(name, t.shape.0, t.shape.1, t.entries)
        }
        DatasetSpec::Cooccurrence { path } => {
            let t = read_triples(open(path)?)?;
            Dataset::from_cooccurrence(name, t.shape.0.max(t.shape.1), t.entries)
        }
        DatasetSpec::LabeledRows { path } => {
            let r = read_labeled_rows(open(path)?)?;
            Dataset::from_rows(name, r.rows, r.labels, r.num_cols)
        }
        &DatasetSpec::SynthLeastSquares { rows, cols, nnz, noise } => {
            let mut d = synth_least_squares(rows, cols, nnz, noise, seed)?.dataset;
            d.name = name;
            Ok(d)
        }
        &DatasetSpec::SynthRatings { rows, cols, rank, observed } => {
            let mut d = synth_ratings(rows, cols, rank, observed, seed)?;
            d.name = name;
            Ok(d)
        }
        &DatasetSpec::SynthCooccurrence { words, pairs } => {
            let mut d = synth_cooccurrence(words, pairs, seed)?;
            d.name = name;
            Ok(d)
        }
        &DatasetSpec::SynthGraph { nodes, degree, usage } => {
            graph_dataset(name, &synth_graph(nodes, degree, seed)?, usage, seed)
        }
        &DatasetSpec::SynthPowerLaw { rows, cols, nnz, exponent } => {
            let mut d = synth_power_law_rows(rows, cols, nnz, exponent, seed)?;
            d.name = name;
            Ok(d)
        }
    }
}
