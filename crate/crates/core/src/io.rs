//! CSV and JSON-lines file formats.
//!
//! Edge lists may start with a `# nodes=N` comment so trailing isolated
//! nodes survive a round trip. Floats are written as `{:.16e}` (17
//! significant digits), which parses back to the same `f64`.

use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::curvature::EdgeCurvature;
use crate::dynamics::PropositionReport;
use crate::error::{Error, Result};
use crate::features::{GraphFeatureVector, NodeFeatureTensor};
use crate::graph::{Edge, Graph, Signal};
use crate::spectral::{LaplacianKind, Pde, SolutionTensor};

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `bytes` to a sibling temp file, then renames over `path`.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::Io(format!("{} has no file name", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(r)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

fn parse_field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, what: &str) -> Result<T> {
    let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
    let raw = rec.get(i).ok_or_else(|| Error::Parse {
        line,
        message: format!("missing {what} column"),
    })?;
    raw.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid {what} {raw:?}"),
    })
}

fn check_header(r: &mut csv::Reader<impl Read>, want: &[&str], optional_tail: usize) -> Result<usize> {
    let h = r.headers().map_err(csv_error)?;
    let got: Vec<&str> = h.iter().collect();
    let min = want.len() - optional_tail;
    if got.len() < min || got.len() > want.len() || got[..] != want[..got.len()] {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header {:?}, got {:?}", want.join(","), got.join(",")),
        });
    }
    Ok(got.len())
}

/// Node count declared by a leading `# nodes=N` comment, if any.
fn declared_nodes(text: &str) -> Result<Option<usize>> {
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let Some(rest) = line.strip_prefix('#') else {
            return Ok(None);
        };
        if let Some(v) = rest.trim().strip_prefix("nodes=") {
            return v.trim().parse().map(Some).map_err(|_| Error::Parse {
                line: i + 1,
                message: format!("invalid node count {v:?}"),
            });
        }
    }
    Ok(None)
}

/// Parses `src,dst[,weight]`. The node count is the declared count, else one
/// past the largest index.
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let declared = declared_nodes(text)?;
    let mut r = reader(text.as_bytes());
    let cols = check_header(&mut r, &["src", "dst", "weight"], 1)?;
    let mut edges = Vec::new();
    let mut max_node = None::<usize>;
    for rec in r.records() {
        let rec = rec.map_err(csv_error)?;
        let u: usize = parse_field(&rec, 0, "src")?;
        let v: usize = parse_field(&rec, 1, "dst")?;
        let weight = if cols == 3 && rec.get(2).is_some_and(|w| !w.is_empty()) {
            Some(parse_field::<f64>(&rec, 2, "weight")?)
        } else {
            None
        };
        max_node = Some(max_node.map_or(u.max(v), |m| m.max(u).max(v)));
        edges.push(Edge { u, v, weight });
    }
    let n = declared.unwrap_or(max_node.map_or(0, |m| m + 1));
    Graph::from_edge_list(&edges, n)
}

pub fn read_edge_list(path: &Path) -> Result<Graph> {
    parse_edge_list(&fs::read_to_string(path)?)
}

/// Edge list with a node-count comment; the weight column is omitted when
/// every weight is 1.
pub fn format_edge_list(g: &Graph) -> String {
    let edges = g.edges();
    let weighted = edges.iter().any(|e| e.2 != 1.0);
    let mut s = format!("# nodes={}\n", g.node_count());
    s.push_str(if weighted { "src,dst,weight\n" } else { "src,dst\n" });
    for (u, v, w) in edges {
        if weighted {
            let _ = writeln!(s, "{u},{v},{w}");
        } else {
            let _ = writeln!(s, "{u},{v}");
        }
    }
    s
}

/// Signal file `node,value`; every node must appear exactly once.
pub fn parse_signal(text: &str, n: usize) -> Result<Signal> {
    let mut r = reader(text.as_bytes());
    check_header(&mut r, &["node", "value"], 0)?;
    let mut values = vec![None; n];
    for rec in r.records() {
        let rec = rec.map_err(csv_error)?;
        let node: usize = parse_field(&rec, 0, "node")?;
        let value: f64 = parse_field(&rec, 1, "value")?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let slot = values.get_mut(node).ok_or_else(|| Error::Parse {
            line,
            message: format!("node {node} out of range for {n} nodes"),
        })?;
        if slot.replace(value).is_some() {
            return Err(Error::Parse {
                line,
                message: format!("node {node} repeated"),
            });
        }
    }
    let got = values.iter().filter(|v| v.is_some()).count();
    if got != n {
        return Err(Error::LengthMismatch { expected: n, got });
    }
    Signal::new(values.into_iter().map(Option::unwrap).collect())
}

pub fn format_signal(x: &[f64]) -> String {
    let mut s = String::from("node,value\n");
    for (i, v) in x.iter().enumerate() {
        let _ = writeln!(s, "{i},{}", fmt_f64(*v));
    }
    s
}

/// `source,node,time,value`, rows ordered by source, time, node.
pub fn format_solution(sol: &SolutionTensor) -> String {
    let mut s = String::from("source,node,time,value\n");
    for src in 0..sol.sources {
        for (j, &t) in sol.times.iter().enumerate() {
            let t = fmt_f64(t);
            for (node, v) in sol.snapshot(src, j).iter().enumerate() {
                let _ = writeln!(s, "{src},{node},{t},{}", fmt_f64(*v));
            }
        }
    }
    s
}

/// Reads a solution CSV back. Every (source, node, time) cell must be
/// present exactly once; `pde` and `kind` are not stored in the file.
pub fn parse_solution(text: &str, pde: Pde, kind: LaplacianKind) -> Result<SolutionTensor> {
    let mut r = reader(text.as_bytes());
    check_header(&mut r, &["source", "node", "time", "value"], 0)?;
    let mut rows = Vec::new();
    let mut times: Vec<f64> = Vec::new();
    let (mut sources, mut nodes) = (0, 0);
    for rec in r.records() {
        let rec = rec.map_err(csv_error)?;
        let src: usize = parse_field(&rec, 0, "source")?;
        let node: usize = parse_field(&rec, 1, "node")?;
        let t: f64 = parse_field(&rec, 2, "time")?;
        let v: f64 = parse_field(&rec, 3, "value")?;
        sources = sources.max(src + 1);
        nodes = nodes.max(node + 1);
        if !times.iter().any(|&x| x.to_bits() == t.to_bits()) {
            times.push(t);
        }
        rows.push((src, node, t, v, rec.position().map(|p| p.line() as usize).unwrap_or(0)));
    }
    let mut cells = vec![vec![vec![None; nodes]; times.len()]; sources];
    for (src, node, t, v, line) in rows {
        let j = times.iter().position(|&x| x.to_bits() == t.to_bits()).unwrap();
        if cells[src][j][node].replace(v).is_some() {
            return Err(Error::Parse {
                line,
                message: format!("duplicate cell source={src} node={node} time={t}"),
            });
        }
    }
    let mut snaps = Vec::with_capacity(sources);
    for (src, per_time) in cells.into_iter().enumerate() {
        let mut out = Vec::with_capacity(times.len());
        for (j, per_node) in per_time.into_iter().enumerate() {
            let snap: Option<Vec<f64>> = per_node.into_iter().collect();
            out.push(snap.ok_or_else(|| Error::Parse {
                line: 0,
                message: format!("missing cells for source {src} at time {}", times[j]),
            })?);
        }
        snaps.push(out);
    }
    SolutionTensor::from_snapshots(pde, kind, times, nodes, snaps)
}

/// `node,time,k,m,value`; times are printed, hops and moments are 1-based
/// orders as used in the feature definitions.
pub fn format_node_features(h: &NodeFeatureTensor) -> String {
    let mut s = String::from("node,time,k,m,value\n");
    let times: Vec<String> = h.times.iter().map(|&t| fmt_f64(t)).collect();
    for node in 0..h.nodes {
        for (ti, t) in times.iter().enumerate() {
            for (ki, k) in h.hops.iter().enumerate() {
                for m in 0..h.moments {
                    let v = h.get(node, ti, ki, m);
                    let _ = writeln!(s, "{node},{t},{k},{},{}", m + 1, fmt_f64(v));
                }
            }
        }
    }
    s
}

/// `time,s,k,m,value`.
pub fn format_graph_features(f: &GraphFeatureVector) -> String {
    let mut s = String::from("time,s,k,m,value\n");
    for (ti, &t) in f.times.iter().enumerate() {
        let t = fmt_f64(t);
        for sm in 0..f.graph_moments {
            for (ki, k) in f.hops.iter().enumerate() {
                for m in 0..f.moments {
                    let v = f.get(ti, sm, ki, m);
                    let _ = writeln!(s, "{t},{},{k},{},{}", sm + 1, m + 1, fmt_f64(v));
                }
            }
        }
    }
    s
}

/// Feature values read from either feature CSV layout, in file order.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureTable {
    /// One row per node.
    Node(Vec<Vec<f64>>),
    Graph(Vec<f64>),
}

pub fn parse_features(text: &str) -> Result<FeatureTable> {
    let mut r = reader(text.as_bytes());
    let first = r.headers().map_err(csv_error)?.get(0).unwrap_or("").to_string();
    if first == "node" {
        check_header(&mut r, &["node", "time", "k", "m", "value"], 0)?;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(csv_error)?;
            let node: usize = parse_field(&rec, 0, "node")?;
            let v: f64 = parse_field(&rec, 4, "value")?;
            if node == rows.len() {
                rows.push(Vec::new());
            } else if node + 1 != rows.len() {
                return Err(Error::Parse {
                    line: rec.position().map(|p| p.line() as usize).unwrap_or(0),
                    message: format!("node {node} out of order"),
                });
            }
            rows[node].push(v);
        }
        if rows.windows(2).any(|w| w[0].len() != w[1].len()) {
            return Err(Error::Parse {
                line: 0,
                message: "nodes have differing feature counts".into(),
            });
        }
        Ok(FeatureTable::Node(rows))
    } else {
        check_header(&mut r, &["time", "s", "k", "m", "value"], 0)?;
        let mut values = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(csv_error)?;
            values.push(parse_field(&rec, 4, "value")?);
        }
        Ok(FeatureTable::Graph(values))
    }
}

/// `node,curvature`; `None` entries (isolated nodes) are skipped.
pub fn format_node_labels(labels: &[Option<f64>]) -> String {
    let mut s = String::from("node,curvature\n");
    for (v, k) in labels.iter().enumerate() {
        if let Some(k) = k {
            let _ = writeln!(s, "{v},{}", fmt_f64(*k));
        }
    }
    s
}

pub fn format_edge_labels(labels: &[EdgeCurvature]) -> String {
    let mut s = String::from("src,dst,curvature\n");
    for e in labels {
        let _ = writeln!(s, "{},{},{}", e.u, e.v, fmt_f64(e.kappa));
    }
    s
}

/// Node labels as `(node, curvature)` pairs.
pub fn parse_node_labels(text: &str) -> Result<Vec<(usize, f64)>> {
    let mut r = reader(text.as_bytes());
    check_header(&mut r, &["node", "curvature"], 0)?;
    r.records()
        .map(|rec| {
            let rec = rec.map_err(csv_error)?;
            Ok((parse_field(&rec, 0, "node")?, parse_field(&rec, 1, "curvature")?))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub file: String,
    pub family: String,
    pub n: usize,
    /// Edge probability for ER graphs, block count for SBM graphs.
    pub p_or_blocks: f64,
    pub seed: u64,
}

pub fn format_manifest(rows: &[ManifestRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

pub fn parse_manifest(text: &str) -> Result<Vec<ManifestRow>> {
    let mut r = reader(text.as_bytes());
    check_header(&mut r, &["file", "family", "n", "p_or_blocks", "seed"], 0)?;
    r.deserialize().map(|row| row.map_err(csv_error)).collect()
}

/// Generic `id,target` table.
pub fn parse_targets(text: &str) -> Result<Vec<(String, f64)>> {
    let mut r = reader(text.as_bytes());
    check_header(&mut r, &["id", "target"], 0)?;
    r.records()
        .map(|rec| {
            let rec = rec.map_err(csv_error)?;
            Ok((rec[0].to_string(), parse_field(&rec, 1, "target")?))
        })
        .collect()
}

pub fn format_reports(reports: &[PropositionReport]) -> String {
    let mut s = String::new();
    for r in reports {
        s.push_str(&r.to_json_line());
        s.push('\n');
    }
    s
}
