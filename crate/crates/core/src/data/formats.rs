//! Whitespace-separated text formats.
//!
//! * edge list: `src dst [weight]` per line, undirected, 0-based ids
//! * triples: `row col value` per line, 0-based
//! * labeled rows: `label idx:val idx:val ...` per line, 0-based indices
//!
//! Lines starting with `#` or `%` are comments. A `# dims: a [b]` comment
//! fixes dimensions that cannot be inferred from the largest id, which the
//! writers emit so that files round-trip exactly.

use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::error::{input_err, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeList {
    pub num_vertices: usize,
    /// Undirected edges `(u, v, weight)` with `u < v`, without duplicates.
    pub edges: Vec<(u32, u32, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledRows {
    pub num_cols: usize,
    pub labels: Vec<f64>,
    pub rows: Vec<Vec<(u32, f64)>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Triples {
    pub shape: (usize, usize),
    pub entries: Vec<(u32, u32, f64)>,
}

fn parse<T: FromStr>(tok: &str, line: usize, what: &str) -> Result<T> {
    tok.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("bad {what} `{tok}`"),
    })
}

/// Data lines with 1-based numbers, plus any `dims` header values.
fn data_lines<R: BufRead>(r: R) -> Result<(Vec<(usize, String)>, Vec<usize>)> {
    let mut out = Vec::new();
    let mut dims = Vec::new();
    for (k, line) in r.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(c) = t.strip_prefix('#').or_else(|| t.strip_prefix('%')) {
            if let Some(d) = c.trim().strip_prefix("dims:") {
                dims = d
                    .split_whitespace()
                    .map(|tok| parse(tok, k + 1, "dimension"))
                    .collect::<Result<_>>()?;
            }
            continue;
        }
        out.push((k + 1, t.to_string()));
    }
    if out.is_empty() {
        return Err(input_err!("no data lines"));
    }
    Ok((out, dims))
}

pub fn read_edge_list<R: BufRead>(r: R) -> Result<EdgeList> {
    let (lines, dims) = data_lines(r)?;
    let mut edges = Vec::with_capacity(lines.len());
    let mut max_id = 0usize;
    for (ln, text) in lines {
        let toks: Vec<&str> = text.split_whitespace().collect();
        if !(2..=3).contains(&toks.len()) {
            return Err(Error::Parse {
                line: ln,
                msg: format!("expected `src dst [weight]`, got {} fields", toks.len()),
            });
        }
        let u: u32 = parse(toks[0], ln, "vertex id")?;
        let v: u32 = parse(toks[1], ln, "vertex id")?;
        let w: f64 = match toks.get(2) {
            Some(t) => parse(t, ln, "weight")?,
            None => 1.0,
        };
        max_id = max_id.max(u.max(v) as usize + 1);
        if u != v {
            edges.push((u.min(v), u.max(v), w));
        }
    }
    edges.sort_by_key(|e| (e.0, e.1));
    edges.dedup_by_key(|e| (e.0, e.1));
    let num_vertices = dims.first().copied().unwrap_or(0).max(max_id);
    Ok(EdgeList { num_vertices, edges })
}

pub fn write_edge_list<W: Write>(mut w: W, e: &EdgeList) -> Result<()> {
    writeln!(w, "# dims: {}", e.num_vertices)?;
    for &(u, v, x) in &e.edges {
        writeln!(w, "{u} {v} {x}")?;
    }
    Ok(())
}

pub fn read_triples<R: BufRead>(r: R) -> Result<Triples> {
    let (lines, dims) = data_lines(r)?;
    let mut entries = Vec::with_capacity(lines.len());
    let (mut rows, mut cols) = (0usize, 0usize);
    for (ln, text) in lines {
        let toks: Vec<&str> = text.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(Error::Parse {
                line: ln,
                msg: format!("expected `row col value`, got {} fields", toks.len()),
            });
        }
        let i: u32 = parse(toks[0], ln, "row")?;
        let j: u32 = parse(toks[1], ln, "column")?;
        let x: f64 = parse(toks[2], ln, "value")?;
        rows = rows.max(i as usize + 1);
        cols = cols.max(j as usize + 1);
        entries.push((i, j, x));
    }
    let shape = (
        dims.first().copied().unwrap_or(0).max(rows),
        dims.get(1).copied().unwrap_or(0).max(cols),
    );
    Ok(Triples { shape, entries })
}

pub fn write_triples<W: Write>(mut w: W, shape: (usize, usize), entries: &[(u32, u32, f64)]) -> Result<()> {
    writeln!(w, "# dims: {} {}", shape.0, shape.1)?;
    for &(i, j, x) in entries {
        writeln!(w, "{i} {j} {x}")?;
    }
    Ok(())
}

pub fn read_labeled_rows<R: BufRead>(r: R) -> Result<LabeledRows> {
    let (lines, dims) = data_lines(r)?;
    let mut labels = Vec::with_capacity(lines.len());
    let mut rows = Vec::with_capacity(lines.len());
    let mut cols = 0usize;
    for (ln, text) in lines {
        let mut toks = text.split_whitespace();
        let label: f64 = parse(toks.next().expect("non-empty line"), ln, "label")?;
        let mut row = Vec::new();
        for tok in toks {
            let (idx, val) = tok.split_once(':').ok_or_else(|| Error::Parse {
                line: ln,
                msg: format!("expected `idx:val`, got `{tok}`"),
            })?;
            let idx: u32 = parse(idx, ln, "index")?;
            let val: f64 = parse(val, ln, "value")?;
            cols = cols.max(idx as usize + 1);
            row.push((idx, val));
        }
        labels.push(label);
        rows.push(row);
    }
    let num_cols = dims.first().copied().unwrap_or(0).max(cols);
    Ok(LabeledRows { num_cols, labels, rows })
}

pub fn write_labeled_rows<W: Write>(mut w: W, rows: &LabeledRows) -> Result<()> {
    writeln!(w, "# dims: {}", rows.num_cols)?;
    for (label, row) in rows.labels.iter().zip(&rows.rows) {
        write!(w, "{label}")?;
        for (i, v) in row {
            write!(w, " {i}:{v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}
