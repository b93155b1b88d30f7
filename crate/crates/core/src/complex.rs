//! Simplicial complexes, grids and grid-valued bifiltrations.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ComplexError {
    #[error("simplex must have at least one vertex")]
    EmptySimplex,
    #[error("simplex {0} is missing its face {1}")]
    MissingFace(Simplex, Simplex),
    #[error("vertex {0} has no value")]
    MissingVertexValue(u32),
    #[error("expected {expected} values, got {got}")]
    ValueCount { expected: usize, got: usize },
    #[error("grid subdivision count must be at least 1")]
    EmptyGrid,
    #[error("grid point ({0}, {1}) lies outside the grid")]
    OffGrid(u32, u32),
    #[error("value of {0} is not below the value of its coface {1}")]
    NotMonotone(Simplex, Simplex),
}

/// A simplex given by its strictly increasing vertex list.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Simplex {
    vertices: Vec<u32>,
}

impl Simplex {
    /// Sorts and de-duplicates `vertices`.
    pub fn new<I: IntoIterator<Item = u32>>(vertices: I) -> Result<Self, ComplexError> {
        let mut vertices: Vec<u32> = vertices.into_iter().collect();
        vertices.sort_unstable();
        vertices.dedup();
        if vertices.is_empty() {
            return Err(ComplexError::EmptySimplex);
        }
        Ok(Self { vertices })
    }

    pub fn vertex(v: u32) -> Self {
        Self { vertices: vec![v] }
    }

    pub fn edge(a: u32, b: u32) -> Self {
        Self::new([a, b]).expect("nonempty")
    }

    pub fn vertices(&self) -> &[u32] {
        &self.vertices
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Codimension-one faces, in the order obtained by dropping each vertex.
    pub fn facets(&self) -> Vec<Simplex> {
        if self.vertices.len() == 1 {
            return Vec::new();
        }
        (0..self.vertices.len())
            .map(|skip| Simplex {
                vertices: self
                    .vertices
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, &v)| v)
                    .collect(),
            })
            .collect()
    }

    pub fn is_face_of(&self, other: &Simplex) -> bool {
        self.vertices.iter().all(|v| other.vertices.binary_search(v).is_ok())
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.vertices.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A finite simplicial complex closed under taking faces.
///
/// Simplices are stored sorted by dimension, then lexicographically; a
/// simplex's position in that order is its id. Within one dimension the ids are
/// contiguous, and `local_index` gives the position inside the dimension.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SimplicialComplex {
    simplices: Vec<Simplex>,
    index: HashMap<Simplex, usize>,
    dim_start: Vec<usize>,
    facets: Vec<Vec<usize>>,
}

impl SimplicialComplex {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a complex from a list that must already be closed under faces.
    pub fn from_simplices<I: IntoIterator<Item = Simplex>>(simplices: I) -> Result<Self, ComplexError> {
        let mut all: Vec<Simplex> = simplices.into_iter().collect();
        all.sort_by(|a, b| a.dim().cmp(&b.dim()).then_with(|| a.cmp(b)));
        all.dedup();
        let index: HashMap<Simplex, usize> =
            all.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        let mut facets = Vec::with_capacity(all.len());
        for s in &all {
            let mut ids = Vec::new();
            for f in s.facets() {
                match index.get(&f) {
                    Some(&id) => ids.push(id),
                    None => return Err(ComplexError::MissingFace(s.clone(), f)),
                }
            }
            ids.sort_unstable();
            facets.push(ids);
        }
        let top = all.last().map_or(0, |s| s.dim() + 1);
        let mut dim_start = vec![0; top + 1];
        for d in 0..=top {
            dim_start[d] = all.partition_point(|s| s.dim() < d);
        }
        Ok(Self {
            simplices: all,
            index,
            dim_start,
            facets,
        })
    }

    /// Smallest complex containing every given simplex.
    pub fn closure<I: IntoIterator<Item = Simplex>>(generators: I) -> Self {
        let mut set = std::collections::HashSet::new();
        let mut stack: Vec<Simplex> = generators.into_iter().collect();
        while let Some(s) = stack.pop() {
            if set.insert(s.clone()) {
                stack.extend(s.facets());
            }
        }
        Self::from_simplices(set).expect("closure is face-closed")
    }

    /// A graph as a 1-dimensional complex on vertices `0..n`.
    pub fn graph(n: u32, edges: &[(u32, u32)]) -> Self {
        let mut s: Vec<Simplex> = (0..n).map(Simplex::vertex).collect();
        s.extend(edges.iter().filter(|(a, b)| a != b).map(|&(a, b)| Simplex::edge(a, b)));
        Self::from_simplices(s).expect("edge endpoints must be below n")
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn simplex(&self, id: usize) -> &Simplex {
        &self.simplices[id]
    }

    pub fn id_of(&self, s: &Simplex) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn contains(&self, s: &Simplex) -> bool {
        self.index.contains_key(s)
    }

    /// Ids of the codimension-one faces of simplex `id`.
    pub fn facet_ids(&self, id: usize) -> &[usize] {
        &self.facets[id]
    }

    /// Largest simplex dimension, `None` for the empty complex.
    pub fn dim(&self) -> Option<usize> {
        self.simplices.last().map(Simplex::dim)
    }

    /// Range of ids holding the simplices of dimension `d`.
    pub fn dim_range(&self, d: usize) -> std::ops::Range<usize> {
        if d + 1 >= self.dim_start.len() {
            let n = self.simplices.len();
            return n..n;
        }
        self.dim_start[d]..self.dim_start[d + 1]
    }

    pub fn count_of_dim(&self, d: usize) -> usize {
        self.dim_range(d).len()
    }

    pub fn vertex_ids(&self) -> Vec<u32> {
        self.dim_range(0)
            .map(|id| self.simplices[id].vertices[0])
            .collect()
    }
}

/// A uniform grid on `[0,1]^2` with `m` subdivisions per axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GridSpec {
    m: u32,
}

impl GridSpec {
    pub fn new(m: u32) -> Result<Self, ComplexError> {
        if m == 0 {
            return Err(ComplexError::EmptyGrid);
        }
        Ok(Self { m })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Grid resolution `1/m`.
    pub fn rho(&self) -> f64 {
        1.0 / self.m as f64
    }

    pub fn point(&self, i: u32, j: u32) -> Result<GridPoint, ComplexError> {
        if i > self.m || j > self.m {
            return Err(ComplexError::OffGrid(i, j));
        }
        Ok(GridPoint { i, j })
    }

    /// Real value of a step count.
    pub fn to_real(&self, steps: u32) -> f64 {
        steps as f64 / self.m as f64
    }

    /// Smallest step count whose value is at least `x` (clamped to `[0, m]`).
    pub fn ceil_steps(&self, x: f64) -> u32 {
        let scaled = x * self.m as f64;
        let c = (scaled - SNAP_EPS).ceil();
        c.clamp(0.0, self.m as f64) as u32
    }
}

/// Tolerance absorbing floating-point noise when snapping to the grid.
const SNAP_EPS: f64 = 1e-9;

/// A point of the grid, in integer step coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridPoint {
    pub i: u32,
    pub j: u32,
}

impl GridPoint {
    pub const fn new(i: u32, j: u32) -> Self {
        Self { i, j }
    }

    /// Product order.
    pub fn le(&self, other: &GridPoint) -> bool {
        self.i <= other.i && self.j <= other.j
    }

    pub fn join(&self, other: &GridPoint) -> GridPoint {
        GridPoint::new(self.i.max(other.i), self.j.max(other.j))
    }

    pub fn value(&self, grid: GridSpec) -> (f64, f64) {
        (grid.to_real(self.i), grid.to_real(self.j))
    }
}

/// Real-valued simplex values, not yet normalized or placed on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PreBifiltration {
    pub complex: SimplicialComplex,
    pub values: Vec<(f64, f64)>,
}

/// A simplicial complex with a monotone grid-valued function on its simplices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BiFiltration {
    complex: SimplicialComplex,
    grid: GridSpec,
    values: Vec<GridPoint>,
}

impl BiFiltration {
    /// Checks sizes, grid bounds and monotonicity.
    pub fn new(
        complex: SimplicialComplex,
        grid: GridSpec,
        values: Vec<GridPoint>,
    ) -> Result<Self, ComplexError> {
        let f = Self::new_unchecked(complex, grid, values)?;
        if let Some((s, t)) = f.validate().into_iter().next() {
            return Err(ComplexError::NotMonotone(s, t));
        }
        Ok(f)
    }

    /// Checks sizes and grid bounds only; monotonicity is left to
    /// [`validate`](Self::validate).
    pub fn new_unchecked(
        complex: SimplicialComplex,
        grid: GridSpec,
        values: Vec<GridPoint>,
    ) -> Result<Self, ComplexError> {
        if values.len() != complex.len() {
            return Err(ComplexError::ValueCount {
                expected: complex.len(),
                got: values.len(),
            });
        }
        if let Some(p) = values.iter().find(|p| p.i > grid.m() || p.j > grid.m()) {
            return Err(ComplexError::OffGrid(p.i, p.j));
        }
        Ok(Self {
            complex,
            grid,
            values,
        })
    }

    pub fn complex(&self) -> &SimplicialComplex {
        &self.complex
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn values(&self) -> &[GridPoint] {
        &self.values
    }

    pub fn value(&self, id: usize) -> GridPoint {
        self.values[id]
    }

    pub fn value_of(&self, s: &Simplex) -> Option<GridPoint> {
        self.complex.id_of(s).map(|id| self.values[id])
    }

    /// All `(face, coface)` pairs whose values break monotonicity. Checking
    /// codimension-one faces suffices by transitivity.
    pub fn validate(&self) -> Vec<(Simplex, Simplex)> {
        let mut out = Vec::new();
        for id in 0..self.complex.len() {
            for &f in self.complex.facet_ids(id) {
                if !self.values[f].le(&self.values[id]) {
                    out.push((self.complex.simplex(f).clone(), self.complex.simplex(id).clone()));
                }
            }
        }
        out
    }

    /// Ids of simplices with value `<= u`, ascending (so faces come first).
    pub fn subcomplex_ids(&self, u: GridPoint) -> Vec<usize> {
        (0..self.values.len()).filter(|&id| self.values[id].le(&u)).collect()
    }

    /// The sublevel complex `X_u`.
    pub fn subcomplex_at(&self, u: GridPoint) -> SimplicialComplex {
        SimplicialComplex::from_simplices(
            self.subcomplex_ids(u)
                .into_iter()
                .map(|id| self.complex.simplex(id).clone()),
        )
        .expect("monotone values give a closed sublevel set")
    }

    /// Same complex and values, reinterpreted on a grid refined by `factor`.
    pub fn refine(&self, factor: u32) -> BiFiltration {
        let grid = GridSpec::new(self.grid.m() * factor).expect("positive");
        BiFiltration {
            complex: self.complex.clone(),
            grid,
            values: self
                .values
                .iter()
                .map(|p| GridPoint::new(p.i * factor, p.j * factor))
                .collect(),
        }
    }
}

/// Assigns every simplex the componentwise maximum of its vertex values.
pub fn lower_star(
    vertex_values: &HashMap<u32, (f64, f64)>,
    complex: &SimplicialComplex,
) -> Result<PreBifiltration, ComplexError> {
    let mut values = Vec::with_capacity(complex.len());
    for s in complex.simplices() {
        let mut acc = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in s.vertices() {
            let &(x, y) = vertex_values
                .get(v)
                .ok_or(ComplexError::MissingVertexValue(*v))?;
            acc = (acc.0.max(x), acc.1.max(y));
        }
        values.push(acc);
    }
    Ok(PreBifiltration {
        complex: complex.clone(),
        values,
    })
}

/// Min-max rescales each coordinate to `[0,1]` (a constant coordinate maps to
/// 0), then rounds every value up to the grid.
pub fn normalize_and_snap(pre: &PreBifiltration, grid: GridSpec) -> BiFiltration {
    let scale = |pick: fn(&(f64, f64)) -> f64| {
        let lo = pre.values.iter().map(pick).fold(f64::INFINITY, f64::min);
        let hi = pre.values.iter().map(pick).fold(f64::NEG_INFINITY, f64::max);
        move |x: f64| if hi > lo { (x - lo) / (hi - lo) } else { 0.0 }
    };
    let sx = scale(|v| v.0);
    let sy = scale(|v| v.1);
    let values = pre
        .values
        .iter()
        .map(|&(x, y)| GridPoint::new(grid.ceil_steps(sx(x)), grid.ceil_steps(sy(y))))
        .collect();
    BiFiltration {
        complex: pre.complex.clone(),
        grid,
        values,
    }
}

/// Rounds already-normalized values up to the grid without rescaling.
pub fn snap(pre: &PreBifiltration, grid: GridSpec) -> BiFiltration {
    let values = pre
        .values
        .iter()
        .map(|&(x, y)| GridPoint::new(grid.ceil_steps(x), grid.ceil_steps(y)))
        .collect();
    BiFiltration {
        complex: pre.complex.clone(),
        grid,
        values,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn k2() -> BiFiltration {
        let c = SimplicialComplex::graph(2, &[(0, 1)]);
        BiFiltration::new(
            c,
            GridSpec::new(10).unwrap(),
            vec![GridPoint::new(1, 1), GridPoint::new(3, 3), GridPoint::new(6, 6)],
        )
        .unwrap()
    }

    #[test]
    fn complex_rejects_missing_face() {
        let err = SimplicialComplex::from_simplices([Simplex::edge(0, 1), Simplex::vertex(0)]);
        assert!(matches!(err, Err(ComplexError::MissingFace(_, _))));
        assert_eq!(Simplex::new([]), Err(ComplexError::EmptySimplex));
    }

    #[test]
    fn closure_of_triangle() {
        let c = SimplicialComplex::closure([Simplex::new([0, 1, 2]).unwrap()]);
        assert_eq!(c.len(), 7);
        assert_eq!(c.dim_range(1), 3..6);
        assert_eq!(c.facet_ids(6), &[3, 4, 5]);
    }

    #[test]
    fn lower_star_examples() {
        let vals: HashMap<u32, (f64, f64)> =
            [(0, (0.1, 0.5)), (1, (0.5, 0.1))].into_iter().collect();
        let c = SimplicialComplex::graph(2, &[(0, 1)]);
        let pre = lower_star(&vals, &c).unwrap();
        assert_eq!(pre.values[2], (0.5, 0.5));

        let single: HashMap<u32, (f64, f64)> = [(7, (0.3, 0.7))].into_iter().collect();
        let c = SimplicialComplex::from_simplices([Simplex::vertex(7)]).unwrap();
        assert_eq!(lower_star(&single, &c).unwrap().values, vec![(0.3, 0.7)]);

        let tri: HashMap<u32, (f64, f64)> =
            [(0, (0.0, 0.0)), (1, (0.2, 0.1)), (2, (0.1, 0.4))].into_iter().collect();
        let c = SimplicialComplex::closure([Simplex::new([0, 1, 2]).unwrap()]);
        let pre = lower_star(&tri, &c).unwrap();
        assert_eq!(*pre.values.last().unwrap(), (0.2, 0.4));

        let missing: HashMap<u32, (f64, f64)> = [(0, (0.0, 0.0))].into_iter().collect();
        assert_eq!(
            lower_star(&missing, &SimplicialComplex::graph(2, &[])),
            Err(ComplexError::MissingVertexValue(1))
        );
    }

    #[test]
    fn normalize_examples() {
        let grid = GridSpec::new(10).unwrap();
        let pre = PreBifiltration {
            complex: SimplicialComplex::graph(2, &[]),
            values: vec![(2.0, 10.0), (4.0, 30.0)],
        };
        let f = normalize_and_snap(&pre, grid);
        assert_eq!(f.values(), &[GridPoint::new(0, 0), GridPoint::new(10, 10)]);

        assert_eq!(grid.ceil_steps(0.51), 6);
        assert_eq!(grid.ceil_steps(0.3), 3);

        let pre = PreBifiltration {
            complex: SimplicialComplex::graph(2, &[]),
            values: vec![(2.0, 5.0), (4.0, 5.0)],
        };
        let f = normalize_and_snap(&pre, grid);
        assert!(f.values().iter().all(|p| p.j == 0));
    }

    #[test]
    fn validate_examples() {
        assert!(k2().validate().is_empty());
        let bad = BiFiltration::new_unchecked(
            SimplicialComplex::graph(2, &[(0, 1)]),
            GridSpec::new(10).unwrap(),
            vec![GridPoint::new(3, 1), GridPoint::new(0, 0), GridPoint::new(2, 2)],
        )
        .unwrap();
        assert_eq!(
            bad.validate(),
            vec![(Simplex::vertex(0), Simplex::edge(0, 1))]
        );
        let empty =
            BiFiltration::new(SimplicialComplex::empty(), GridSpec::new(3).unwrap(), vec![]).unwrap();
        assert!(empty.validate().is_empty());
    }

    #[test]
    fn subcomplex_examples() {
        let f = k2();
        assert_eq!(f.subcomplex_at(GridPoint::new(10, 10)).len(), 3);
        assert!(f.subcomplex_at(GridPoint::new(0, 0)).is_empty());
        let mid = f.subcomplex_at(GridPoint::new(4, 4));
        assert_eq!(mid.simplices(), &[Simplex::vertex(0), Simplex::vertex(1)]);
    }

    proptest! {
        #[test]
        fn lower_star_is_valid_and_sublevels_nest(
            vals in proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0), 4),
            edges in proptest::collection::vec((0u32..4, 0u32..4), 0..6),
            u in (0u32..=8, 0u32..=8),
            v in (0u32..=8, 0u32..=8),
        ) {
            let c = SimplicialComplex::graph(4, &edges);
            let map: HashMap<u32, (f64, f64)> = vals.iter().copied().enumerate().map(|(i, x)| (i as u32, x)).collect();
            let pre = lower_star(&map, &c).unwrap();
            let f = normalize_and_snap(&pre, GridSpec::new(8).unwrap());
            prop_assert!(f.validate().is_empty());
            let (u, v) = (GridPoint::new(u.0, u.1), GridPoint::new(v.0, v.1));
            if u.le(&v) {
                let a = f.subcomplex_ids(u);
                let b = f.subcomplex_ids(v);
                prop_assert!(a.iter().all(|x| b.contains(x)));
            }
            // snapping preserves the order of each coordinate
            for a in 0..pre.values.len() {
                for b in 0..pre.values.len() {
                    if pre.values[a].0 <= pre.values[b].0 {
                        prop_assert!(f.value(a).i <= f.value(b).i);
                    }
                    if pre.values[a].1 <= pre.values[b].1 {
                        prop_assert!(f.value(a).j <= f.value(b).j);
                    }
                }
            }
        }
    }
}
