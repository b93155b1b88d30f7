//! Text formats: bifiltration files, TUDataset directories, feature CSVs and
//! PGM heatmaps.
//!
//! A bifiltration file starts with `bifil 2 <M>` and has one line per simplex,
//! `<dim> <v0> ... <vdim> ; <i> <j>`, with faces listed before cofaces. Blank
//! lines and lines starting with `#` are ignored.
//!
//! TUDataset node ids are 1-based on disk and 0-based per graph in memory.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::complex::{BiFiltration, ComplexError, GridPoint, GridSpec, Simplex, SimplicialComplex};
use crate::filtrations::AttributedGraph;
use crate::landscape::GrilVector;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("{coface} has a value below its face {face}")]
    NotMonotone { face: Simplex, coface: Simplex },
    #[error("missing file {0}")]
    MissingFile(PathBuf),
    #[error("{0}")]
    Dataset(String),
    #[error("feature vectors have different index sets")]
    Heterogeneous,
    #[error("centers do not form a full rectangular grid")]
    RaggedCenters,
    #[error("no entry for k={k}, ell={ell}, dim={dim}")]
    MissingEntry { k: usize, ell: u32, dim: usize },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn syntax(line: usize, msg: impl Into<String>) -> IoError {
    IoError::Syntax {
        line,
        msg: msg.into(),
    }
}

pub fn parse_bifiltration(doc: &str) -> Result<BiFiltration, IoError> {
    let mut lines = doc
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or_else(|| syntax(1, "empty document"))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    let m = match parts.as_slice() {
        ["bifil", "2", m] => m
            .parse::<u32>()
            .map_err(|_| syntax(hline, format!("bad grid size {m:?}")))?,
        _ => return Err(syntax(hline, "expected header `bifil 2 <M>`")),
    };
    let grid = GridSpec::new(m).map_err(|e| syntax(hline, e.to_string()))?;

    let mut seen: HashSet<Simplex> = HashSet::new();
    let mut entries: Vec<(Simplex, GridPoint)> = Vec::new();
    for (n, line) in lines {
        let (lhs, rhs) = line
            .split_once(';')
            .ok_or_else(|| syntax(n, "expected `;` between simplex and value"))?;
        let nums: Vec<u32> = lhs
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| syntax(n, format!("bad integer {t:?}"))))
            .collect::<Result<_, _>>()?;
        let (&dim, verts) = nums.split_first().ok_or_else(|| syntax(n, "missing dimension"))?;
        if verts.len() != dim as usize + 1 {
            return Err(syntax(n, format!("dimension {dim} needs {} vertices", dim + 1)));
        }
        let simplex = Simplex::new(verts.iter().copied()).map_err(|e| syntax(n, e.to_string()))?;
        if simplex.dim() != dim as usize {
            return Err(syntax(n, "repeated vertex"));
        }
        if seen.contains(&simplex) {
            return Err(syntax(n, format!("duplicate simplex {simplex}")));
        }
        if let Some(face) = simplex.facets().into_iter().find(|f| !seen.contains(f)) {
            return Err(syntax(n, format!("face {face} of {simplex} not listed before it")));
        }
        let coords: Vec<u32> = rhs
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| syntax(n, format!("bad coordinate {t:?}"))))
            .collect::<Result<_, _>>()?;
        let [i, j] = coords[..] else {
            return Err(syntax(n, "expected two coordinates"));
        };
        if i > m || j > m {
            return Err(syntax(n, format!("coordinate ({i}, {j}) outside [0, {m}]")));
        }
        seen.insert(simplex.clone());
        entries.push((simplex, GridPoint::new(i, j)));
    }
    let complex = SimplicialComplex::from_simplices(entries.iter().map(|(s, _)| s.clone()))
        .expect("faces were checked while parsing");
    let mut values = vec![GridPoint::new(0, 0); complex.len()];
    for (s, v) in entries {
        values[complex.id_of(&s).unwrap()] = v;
    }
    BiFiltration::new(complex, grid, values).map_err(|e| match e {
        ComplexError::NotMonotone(face, coface) => IoError::NotMonotone { face, coface },
        other => syntax(0, other.to_string()),
    })
}

pub fn serialize_bifiltration(f: &BiFiltration) -> String {
    let mut out = format!("bifil 2 {}\n", f.grid().m());
    for (s, v) in f.complex().simplices().iter().zip(f.values()) {
        let verts: Vec<String> = s.vertices().iter().map(u32::to_string).collect();
        writeln!(out, "{} {} ; {} {}", s.dim(), verts.join(" "), v.i, v.j).unwrap();
    }
    out
}

fn read_lines(path: &Path) -> Result<Vec<String>, IoError> {
    if !path.exists() {
        return Err(IoError::MissingFile(path.to_path_buf()));
    }
    Ok(std::fs::read_to_string(path)?
        .lines()
        .map(|l| l.trim().to_string())
        .filter(|l| !l.is_empty())
        .collect())
}

fn parse_num<T: std::str::FromStr>(s: &str, file: &str, line: usize) -> Result<T, IoError> {
    s.trim()
        .parse()
        .map_err(|_| IoError::Dataset(format!("{file} line {line}: bad number {s:?}")))
}

/// Reads `<name>_A.txt`, `<name>_graph_indicator.txt`,
/// `<name>_graph_labels.txt` and optional vertex attributes, taken from the
/// first column of `<name>_node_attributes.txt` or else `<name>_node_labels.txt`.
pub fn read_tudataset(dir: &Path, name: &str) -> Result<Vec<AttributedGraph>, IoError> {
    let file = |suffix: &str| dir.join(format!("{name}_{suffix}.txt"));
    let indicator: Vec<usize> = read_lines(&file("graph_indicator"))?
        .iter()
        .enumerate()
        .map(|(i, l)| parse_num(l, "graph_indicator", i + 1))
        .collect::<Result<_, _>>()?;
    let labels: Vec<i64> = read_lines(&file("graph_labels"))?
        .iter()
        .enumerate()
        .map(|(i, l)| parse_num(l, "graph_labels", i + 1))
        .collect::<Result<_, _>>()?;
    let graphs = indicator.iter().copied().max().unwrap_or(0);
    if indicator.contains(&0) {
        return Err(IoError::Dataset("graph ids are 1-based".into()));
    }
    if labels.len() < graphs {
        return Err(IoError::Dataset(format!(
            "{} graph labels for {graphs} graphs",
            labels.len()
        )));
    }
    let attr_file = ["node_attributes", "node_labels"]
        .into_iter()
        .find(|s| file(s).exists());
    let node_labels = if let Some(suffix) = attr_file {
        let v: Vec<f64> = read_lines(&file(suffix))?
            .iter()
            .enumerate()
            .map(|(i, l)| parse_num(l.split(',').next().unwrap(), suffix, i + 1))
            .collect::<Result<_, _>>()?;
        if v.len() != indicator.len() {
            return Err(IoError::Dataset("node label count differs from node count".into()));
        }
        Some(v)
    } else {
        None
    };

    let mut local = vec![0u32; indicator.len()];
    let mut sizes = vec![0u32; graphs];
    for (node, &g) in indicator.iter().enumerate() {
        local[node] = sizes[g - 1];
        sizes[g - 1] += 1;
    }
    let mut edges: Vec<Vec<(u32, u32)>> = vec![Vec::new(); graphs];
    for (i, l) in read_lines(&file("A"))?.iter().enumerate() {
        let (a, b) = l
            .split_once(',')
            .ok_or_else(|| IoError::Dataset(format!("A line {}: expected `a, b`", i + 1)))?;
        let a: usize = parse_num(a, "A", i + 1)?;
        let b: usize = parse_num(b, "A", i + 1)?;
        for v in [a, b] {
            if v == 0 || v > indicator.len() {
                return Err(IoError::Dataset(format!("A line {}: node {v} does not exist", i + 1)));
            }
        }
        let (ga, gb) = (indicator[a - 1], indicator[b - 1]);
        if ga != gb {
            return Err(IoError::Dataset(format!(
                "A line {}: edge ({a}, {b}) crosses graphs {ga} and {gb}",
                i + 1
            )));
        }
        if a != b {
            edges[ga - 1].push((local[a - 1], local[b - 1]));
        }
    }
    let mut out = Vec::with_capacity(graphs);
    for g in 0..graphs {
        let mut graph = AttributedGraph::new(sizes[g], &edges[g])
            .map_err(|e| IoError::Dataset(e.to_string()))?
            .with_label(labels[g]);
        if let Some(nl) = &node_labels {
            let attrs = indicator
                .iter()
                .zip(nl)
                .filter(|(&gi, _)| gi == g + 1)
                .map(|(_, &x)| x)
                .collect();
            graph = graph
                .with_attributes(attrs)
                .map_err(|e| IoError::Dataset(e.to_string()))?;
        }
        out.push(graph);
    }
    Ok(out)
}

/// True when the dataset ships continuous vertex attributes.
pub fn has_node_attributes(dir: &Path, name: &str) -> bool {
    dir.join(format!("{name}_node_attributes.txt")).exists()
}

/// Writes graphs in TUDataset layout, with attributes (if any) in
/// `<name>_node_attributes.txt`. Unlabelled graphs get label 0.
pub fn write_tudataset(dir: &Path, name: &str, graphs: &[AttributedGraph]) -> Result<(), IoError> {
    std::fs::create_dir_all(dir)?;
    let (mut a, mut ind, mut lab, mut attr) = (String::new(), String::new(), String::new(), String::new());
    let with_attrs = graphs.iter().all(|g| g.attributes().is_some()) && !graphs.is_empty();
    let mut base = 0u32;
    for (gi, g) in graphs.iter().enumerate() {
        for &(u, v) in g.edges() {
            writeln!(a, "{}, {}", base + u + 1, base + v + 1).unwrap();
            writeln!(a, "{}, {}", base + v + 1, base + u + 1).unwrap();
        }
        for _ in 0..g.vertex_count() {
            writeln!(ind, "{}", gi + 1).unwrap();
        }
        writeln!(lab, "{}", g.label().unwrap_or(0)).unwrap();
        if with_attrs {
            for x in g.attributes().unwrap() {
                writeln!(attr, "{x}").unwrap();
            }
        }
        base += g.vertex_count();
    }
    let file = |suffix: &str| dir.join(format!("{name}_{suffix}.txt"));
    std::fs::write(file("A"), a)?;
    std::fs::write(file("graph_indicator"), ind)?;
    std::fs::write(file("graph_labels"), lab)?;
    if with_attrs {
        std::fs::write(file("node_attributes"), attr)?;
    }
    Ok(())
}

/// Column names in storage order.
pub fn feature_columns(v: &GrilVector) -> Vec<String> {
    v.entries()
        .map(|(i, _)| format!("h{}_p{}_k{}_l{}", i.dim, i.center_idx, i.k, i.ell))
        .collect()
}

fn format_value(steps: u32, m: u32) -> String {
    (steps as f64 / m as f64).to_string()
}

/// One CSV row per vector, preceded by a header.
pub fn emit_features(vectors: &[GrilVector], ids: &[String], labels: &[i64]) -> Result<String, IoError> {
    assert_eq!(vectors.len(), ids.len());
    assert_eq!(vectors.len(), labels.len());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["graph_id".to_string(), "label".to_string()];
    if let Some(first) = vectors.first() {
        header.extend(feature_columns(first));
        for v in vectors {
            if v.centers() != first.centers()
                || v.kmax() != first.kmax()
                || v.ells() != first.ells()
                || v.dims() != first.dims()
                || v.grid() != first.grid()
            {
                return Err(IoError::Heterogeneous);
            }
        }
    }
    w.write_record(&header)?;
    for ((v, id), label) in vectors.iter().zip(ids).zip(labels) {
        let m = v.grid().m();
        let mut row = vec![id.clone(), label.to_string()];
        row.extend(v.steps().iter().map(|&s| format_value(s, m)));
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| IoError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// A row of a feature CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureRow {
    pub id: String,
    pub label: String,
    pub values: Vec<f64>,
}

/// Header columns after `graph_id,label`, and the rows.
pub fn read_features(text: &str) -> Result<(Vec<String>, Vec<FeatureRow>), IoError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header.len() < 2 || header[0] != "graph_id" || header[1] != "label" {
        return Err(syntax(1, "header must start with graph_id,label"));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let values = rec
            .iter()
            .skip(2)
            .map(|t| t.parse::<f64>().map_err(|_| syntax(i + 2, format!("bad value {t:?}"))))
            .collect::<Result<_, _>>()?;
        rows.push(FeatureRow {
            id: rec[0].to_string(),
            label: rec[1].to_string(),
            values,
        });
    }
    Ok((header[2..].to_vec(), rows))
}

/// Plain PGM of one `(k, ell, dim)` slice. Columns run over x ascending; the
/// top row holds the largest y.
pub fn emit_heatmap(v: &GrilVector, k: usize, ell: u32, dim: usize) -> Result<String, IoError> {
    let xs: BTreeSet<u32> = v.centers().iter().map(|p| p.i).collect();
    let ys: BTreeSet<u32> = v.centers().iter().map(|p| p.j).collect();
    let index: HashMap<GridPoint, usize> = v.centers().iter().enumerate().map(|(i, &p)| (p, i)).collect();
    if xs.len() * ys.len() != v.centers().len() || index.len() != v.centers().len() {
        return Err(IoError::RaggedCenters);
    }
    let mut out = format!("P2\n{} {}\n255\n", xs.len(), ys.len());
    for &y in ys.iter().rev() {
        let row: Vec<String> = xs
            .iter()
            .map(|&x| {
                let c = *index.get(&GridPoint::new(x, y)).ok_or(IoError::RaggedCenters)?;
                let val = v.get(c, k, ell, dim).ok_or(IoError::MissingEntry { k, ell, dim })?;
                Ok((255.0 * val).round().to_string())
            })
            .collect::<Result<_, IoError>>()?;
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    Ok(out)
}
