//! Bifiltration constructors for graphs and point clouds.

use std::collections::{BTreeSet, HashMap};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::complex::{
    lower_star, normalize_and_snap, BiFiltration, ComplexError, GridSpec, PreBifiltration, Simplex,
    SimplicialComplex,
};

#[derive(Debug, Error, PartialEq)]
pub enum FiltrationError {
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("edge ({0}, {1}) references a missing vertex")]
    DanglingEdge(u32, u32),
    #[error("self loop at vertex {0}")]
    SelfLoop(u32),
    #[error("diffusion time must be positive")]
    BadTime,
    #[error("graph has no vertex attributes")]
    MissingAttributes,
    #[error("attribute count {got} does not match vertex count {expected}")]
    AttributeCount { got: usize, expected: usize },
    #[error("need more than {alpha} points, got {got}")]
    TooFewPoints { alpha: usize, got: usize },
    #[error("subgraph sizes must be at least 4")]
    SmallSubgraph,
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// A simple undirected graph with optional vertex attributes and label.
#[derive(Clone, Debug, PartialEq)]
pub struct AttributedGraph {
    n: u32,
    edges: Vec<(u32, u32)>,
    attributes: Option<Vec<f64>>,
    label: Option<i64>,
}

impl AttributedGraph {
    /// Edges are stored as sorted pairs, deduplicated.
    pub fn new(n: u32, edges: &[(u32, u32)]) -> Result<Self, FiltrationError> {
        let mut set = BTreeSet::new();
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(FiltrationError::DanglingEdge(a, b));
            }
            if a == b {
                return Err(FiltrationError::SelfLoop(a));
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(Self {
            n,
            edges: set.into_iter().collect(),
            attributes: None,
            label: None,
        })
    }

    pub fn with_attributes(mut self, attributes: Vec<f64>) -> Result<Self, FiltrationError> {
        if attributes.len() != self.n as usize {
            return Err(FiltrationError::AttributeCount {
                got: attributes.len(),
                expected: self.n as usize,
            });
        }
        self.attributes = Some(attributes);
        Ok(self)
    }

    pub fn with_label(mut self, label: i64) -> Self {
        self.label = Some(label);
        self
    }

    pub fn vertex_count(&self) -> u32 {
        self.n
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn attributes(&self) -> Option<&[f64]> {
        self.attributes.as_deref()
    }

    pub fn label(&self) -> Option<i64> {
        self.label
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n as usize];
        for &(a, b) in &self.edges {
            deg[a as usize] += 1;
            deg[b as usize] += 1;
        }
        deg
    }

    pub fn complex(&self) -> SimplicialComplex {
        SimplicialComplex::graph(self.n, &self.edges)
    }
}

/// Heat kernel signature `sum_i exp(-t λ_i) φ_i(v)^2` of the symmetric
/// normalized Laplacian.
pub fn hks(g: &AttributedGraph, t: f64) -> Result<Vec<f64>, FiltrationError> {
    if g.n == 0 {
        return Err(FiltrationError::EmptyGraph);
    }
    if t.is_nan() || t <= 0.0 {
        return Err(FiltrationError::BadTime);
    }
    let n = g.n as usize;
    let deg = g.degrees();
    let mut lap = DMatrix::<f64>::zeros(n, n);
    for v in 0..n {
        if deg[v] > 0 {
            lap[(v, v)] = 1.0;
        }
    }
    for &(a, b) in &g.edges {
        let (a, b) = (a as usize, b as usize);
        let w = -1.0 / ((deg[a] * deg[b]) as f64).sqrt();
        lap[(a, b)] = w;
        lap[(b, a)] = w;
    }
    let eig = SymmetricEigen::new(lap);
    Ok((0..n)
        .map(|v| {
            (0..n)
                .map(|i| (-t * eig.eigenvalues[i].max(0.0)).exp() * eig.eigenvectors[(v, i)].powi(2))
                .sum()
        })
        .collect())
}

/// Unweighted Forman curvature `4 - deg(u) - deg(v)` of every edge, in the
/// graph's edge order.
pub fn forman_ricci(g: &AttributedGraph) -> Vec<f64> {
    let deg = g.degrees();
    g.edges
        .iter()
        .map(|&(a, b)| 4.0 - deg[a as usize] as f64 - deg[b as usize] as f64)
        .collect()
}

/// Rescales to `[0, 1]`; a constant list maps to zeros.
fn unit_range(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values
        .iter()
        .map(|&x| if hi > lo { (x - lo) / (hi - lo) } else { 0.0 })
        .collect()
}

/// First coordinate lower-star of `first`, second coordinate 0 on vertices and
/// normalized curvature on edges.
fn graph_bifiltration(g: &AttributedGraph, first: &[f64], grid: GridSpec) -> Result<BiFiltration, FiltrationError> {
    let complex = g.complex();
    let curvature = unit_range(&forman_ricci(g));
    let edge_curv: HashMap<(u32, u32), f64> = g.edges.iter().copied().zip(curvature).collect();
    let values = complex
        .simplices()
        .iter()
        .map(|s| match *s.vertices() {
            [v] => (first[v as usize], 0.0),
            [a, b] => (first[a as usize].max(first[b as usize]), edge_curv[&(a, b)]),
            _ => unreachable!("graphs have no higher simplices"),
        })
        .collect();
    Ok(normalize_and_snap(&PreBifiltration { complex, values }, grid))
}

/// HKS on the first axis, Forman curvature on the second.
pub fn hks_rc_bifiltration(g: &AttributedGraph, t: f64, grid: GridSpec) -> Result<BiFiltration, FiltrationError> {
    let h = hks(g, t)?;
    graph_bifiltration(g, &h, grid)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Traversal {
    /// Each subgraph in turn.
    T1,
    /// Upper halves of both subgraphs, then lower halves.
    T2,
}

impl Traversal {
    pub fn label(self) -> i64 {
        match self {
            Self::T1 => 0,
            Self::T2 => 1,
        }
    }
}

fn circulant(offset: u32, n: u32, edges: &mut Vec<(u32, u32)>) {
    for v in 0..n {
        for s in [1, 2] {
            edges.push((offset + v, offset + (v + s) % n));
        }
    }
}

/// Two circulant graphs (offsets 1 and 2) on `n1` and `n2` vertices, joined by
/// cross edges between the upper half of one and the lower half of the other.
/// The upper half of a subgraph is its first `n/2` vertices. Attributes are
/// the traversal order index; the label is the traversal.
pub fn hourglass_generate(n1: u32, n2: u32, traversal: Traversal, seed: u64) -> Result<AttributedGraph, FiltrationError> {
    if n1 < 4 || n2 < 4 {
        return Err(FiltrationError::SmallSubgraph);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = n1 + n2;
    let mut edges = Vec::new();
    circulant(0, n1, &mut edges);
    circulant(n1, n2, &mut edges);
    let (h1, h2) = (n1 / 2, n2 / 2);
    let g1_top: Vec<u32> = (0..h1).collect();
    let g1_bot: Vec<u32> = (h1..n1).collect();
    let g2_top: Vec<u32> = (n1..n1 + h2).collect();
    let g2_bot: Vec<u32> = (n1 + h2..total).collect();
    for (a, b) in [(&g1_top, &g2_bot), (&g1_bot, &g2_top)] {
        for _ in 0..2 * total {
            edges.push((*a.choose(&mut rng).unwrap(), *b.choose(&mut rng).unwrap()));
        }
    }
    let order: Vec<u32> = match traversal {
        Traversal::T1 => (0..total).collect(),
        Traversal::T2 => g1_top.iter().chain(&g2_top).chain(&g1_bot).chain(&g2_bot).copied().collect(),
    };
    let mut attributes = vec![0.0; total as usize];
    for (rank, &v) in order.iter().enumerate() {
        attributes[v as usize] = rank as f64;
    }
    Ok(AttributedGraph::new(total, &edges)?
        .with_attributes(attributes)?
        .with_label(traversal.label()))
}

/// Attribute order on the first axis, Forman curvature on the second.
pub fn hourglass_bifiltration(g: &AttributedGraph, grid: GridSpec) -> Result<BiFiltration, FiltrationError> {
    let x = g.attributes().ok_or(FiltrationError::MissingAttributes)?;
    graph_bifiltration(g, x, grid)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    pub points: Vec<(f64, f64)>,
}

impl PointCloud {
    pub fn new(points: Vec<(f64, f64)>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `n` points on a circle, with uniform angles and radial noise.
    pub fn circle<R: Rng>(n: usize, center: (f64, f64), radius: f64, noise: f64, rng: &mut R) -> Self {
        let points = (0..n)
            .map(|_| {
                let a = rng.gen_range(0.0..std::f64::consts::TAU);
                let r = radius + rng.gen_range(-noise..=noise);
                (center.0 + r * a.cos(), center.1 + r * a.sin())
            })
            .collect();
        Self { points }
    }

    /// `n` evenly spaced points on a circle, with a random phase and radial
    /// noise.
    pub fn even_circle<R: Rng>(n: usize, center: (f64, f64), radius: f64, noise: f64, rng: &mut R) -> Self {
        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
        let points = (0..n)
            .map(|i| {
                let a = phase + std::f64::consts::TAU * i as f64 / n as f64;
                let r = radius + rng.gen_range(-noise..=noise);
                (center.0 + r * a.cos(), center.1 + r * a.sin())
            })
            .collect();
        Self { points }
    }

    /// `n` points uniform in a disk.
    pub fn disk<R: Rng>(n: usize, center: (f64, f64), radius: f64, rng: &mut R) -> Self {
        let points = (0..n)
            .map(|_| {
                let a = rng.gen_range(0.0..std::f64::consts::TAU);
                let r = radius * rng.gen_range(0.0f64..1.0).sqrt();
                (center.0 + r * a.cos(), center.1 + r * a.sin())
            })
            .collect();
        Self { points }
    }

    /// `n` points spread evenly over a disk (sunflower pattern) with a random
    /// rotation and jitter.
    pub fn even_disk<R: Rng>(n: usize, center: (f64, f64), radius: f64, jitter: f64, rng: &mut R) -> Self {
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
        let points = (0..n)
            .map(|i| {
                let r = radius * ((i as f64 + 0.5) / n as f64).sqrt();
                let a = phase + golden * i as f64;
                let (dx, dy) = (rng.gen_range(-jitter..=jitter), rng.gen_range(-jitter..=jitter));
                (center.0 + r * a.cos() + dx, center.1 + r * a.sin() + dy)
            })
            .collect();
        Self { points }
    }

    pub fn union(mut self, other: PointCloud) -> Self {
        self.points.extend(other.points);
        self
    }

    fn dist(&self, a: usize, b: usize) -> f64 {
        let (p, q) = (self.points[a], self.points[b]);
        (p.0 - q.0).hypot(p.1 - q.1)
    }
}

/// Codensity on the first axis (`1 - exp(-mean distance to the alpha nearest
/// neighbors)`), edge length on the second (`1 - exp(-d)`) for edges shorter
/// than `r_max`, with triangles of the resulting graph added.
pub fn knn_density_bifiltration(
    pts: &PointCloud,
    alpha: usize,
    r_max: f64,
    grid: GridSpec,
) -> Result<BiFiltration, FiltrationError> {
    let n = pts.len();
    if n <= alpha {
        return Err(FiltrationError::TooFewPoints { alpha, got: n });
    }
    let density: Vec<f64> = (0..n)
        .map(|v| {
            let mut d: Vec<f64> = (0..n).filter(|&w| w != v).map(|w| pts.dist(v, w)).collect();
            d.sort_by(f64::total_cmp);
            let mean = d[..alpha].iter().sum::<f64>() / alpha as f64;
            1.0 - (-mean).exp()
        })
        .collect();
    let mut adj = vec![BTreeSet::new(); n];
    let mut simplices: Vec<Simplex> = (0..n as u32).map(Simplex::vertex).collect();
    let mut edge_len: HashMap<(u32, u32), f64> = HashMap::new();
    for a in 0..n {
        for b in a + 1..n {
            let d = pts.dist(a, b);
            if d <= r_max {
                adj[a].insert(b);
                simplices.push(Simplex::edge(a as u32, b as u32));
                edge_len.insert((a as u32, b as u32), 1.0 - (-d).exp());
            }
        }
    }
    for a in 0..n {
        for &b in &adj[a] {
            for &c in adj[b].intersection(&adj[a]) {
                simplices.push(Simplex::new([a as u32, b as u32, c as u32])?);
            }
        }
    }
    let complex = SimplicialComplex::from_simplices(simplices)?;
    let vertex_values: HashMap<u32, (f64, f64)> =
        density.iter().enumerate().map(|(v, &x)| (v as u32, (x, 0.0))).collect();
    let mut pre = lower_star(&vertex_values, &complex)?;
    for (id, s) in complex.simplices().iter().enumerate() {
        let y = match *s.vertices() {
            [_] => 0.0,
            [a, b] => edge_len[&(a, b)],
            [a, b, c] => edge_len[&(a, b)].max(edge_len[&(a, c)]).max(edge_len[&(b, c)]),
            _ => unreachable!(),
        };
        pre.values[id].1 = y;
    }
    Ok(normalize_and_snap(&pre, grid))
}

/// Random complex with at most `max_simplices` simplices (dimension ≤ 2) and
/// random monotone grid values. With `generic`, no two simplices share an x
/// or a y coordinate; this needs `max_simplices ≤ M + 1`.
pub fn random_bifiltration<R: Rng>(rng: &mut R, max_simplices: usize, grid: GridSpec, generic: bool) -> BiFiltration {
    assert!(max_simplices >= 1);
    assert!(!generic || max_simplices <= grid.m() as usize + 1);
    loop {
        if let Some(f) = try_random(rng, max_simplices, grid, generic) {
            return f;
        }
    }
}

fn try_random<R: Rng>(rng: &mut R, max_simplices: usize, grid: GridSpec, generic: bool) -> Option<BiFiltration> {
    let nv = rng.gen_range(1..=max_simplices.min(5)) as u32;
    let mut simplices: Vec<Simplex> = (0..nv).map(Simplex::vertex).collect();
    let mut pairs: Vec<(u32, u32)> = (0..nv).flat_map(|a| (a + 1..nv).map(move |b| (a, b))).collect();
    pairs.shuffle(rng);
    let room = max_simplices - simplices.len();
    let ne = rng.gen_range(0..=room.min(pairs.len()));
    let edges: BTreeSet<(u32, u32)> = pairs[..ne].iter().copied().collect();
    simplices.extend(edges.iter().map(|&(a, b)| Simplex::edge(a, b)));
    let mut triangles: Vec<Simplex> = Vec::new();
    for &(a, b) in &edges {
        for c in b + 1..nv {
            if edges.contains(&(a, c)) && edges.contains(&(b, c)) {
                triangles.push(Simplex::new([a, b, c]).unwrap());
            }
        }
    }
    triangles.shuffle(rng);
    let room = max_simplices - simplices.len();
    let nt = rng.gen_range(0..=room.min(triangles.len()));
    simplices.extend(triangles.into_iter().take(nt));
    let complex = SimplicialComplex::from_simplices(simplices).ok()?;

    let m = grid.m();
    let (mut used_x, mut used_y) = (BTreeSet::new(), BTreeSet::new());
    let mut values: Vec<crate::complex::GridPoint> = Vec::with_capacity(complex.len());
    for id in 0..complex.len() {
        let (lo_x, lo_y) = complex.facet_ids(id).iter().fold((0, 0), |(x, y), &f| {
            let v = values[f];
            let bump = u32::from(generic);
            (x.max(v.i + bump), y.max(v.j + bump))
        });
        if lo_x > m || lo_y > m {
            return None;
        }
        let pick = |rng: &mut R, lo: u32, used: &BTreeSet<u32>| -> Option<u32> {
            let free: Vec<u32> = (lo..=m).filter(|c| !generic || !used.contains(c)).collect();
            free.choose(rng).copied()
        };
        let i = pick(rng, lo_x, &used_x)?;
        let j = pick(rng, lo_y, &used_y)?;
        used_x.insert(i);
        used_y.insert(j);
        values.push(crate::complex::GridPoint::new(i, j));
    }
    BiFiltration::new(complex, grid, values).ok()
}
