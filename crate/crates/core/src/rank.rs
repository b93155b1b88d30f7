//! Generalized rank of a bifiltration over grid intervals.
//!
//! The fast path restricts the bifiltration to the boundary path of a worm and
//! counts full bars of the resulting zigzag. The oracle builds the whole
//! diagram over the interval and computes the rank of the limit-to-colimit map
//! directly.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

use thiserror::Error;

use crate::complex::{BiFiltration, GridPoint};
use crate::gf2::{Gf2Matrix, Gf2Vector, Subspace};
use crate::homology::HomologyBasis;
use crate::worm::{BoundaryPath, DiscreteWorm, Direction, StaircaseRegion, WormError};
use crate::zigzag::{ZigzagEngine, ZigzagFiltration, ZigzagStep};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RankError {
    #[error("({}, {}) is not below ({}, {})", .0.i, .0.j, .1.i, .1.j)]
    NotBelow(GridPoint, GridPoint),
    #[error("point set is not an interval: {0}")]
    NotInterval(&'static str),
    #[error("point ({}, {}) is outside the grid", .0.i, .0.j)]
    OffGrid(GridPoint),
    #[error(transparent)]
    Worm(#[from] WormError),
}

/// A finite interval of grid points: nonempty, convex and connected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntervalRegion {
    points: BTreeSet<GridPoint>,
}

impl IntervalRegion {
    pub fn new<I: IntoIterator<Item = GridPoint>>(points: I) -> Result<Self, RankError> {
        let points: BTreeSet<GridPoint> = points.into_iter().collect();
        if points.is_empty() {
            return Err(RankError::NotInterval("empty"));
        }
        let (x0, x1) = (
            points.iter().map(|p| p.i).min().unwrap(),
            points.iter().map(|p| p.i).max().unwrap(),
        );
        let (y0, y1) = (
            points.iter().map(|p| p.j).min().unwrap(),
            points.iter().map(|p| p.j).max().unwrap(),
        );
        let w = (x1 - x0 + 1) as usize;
        let h = (y1 - y0 + 1) as usize;
        let idx = |x: usize, y: usize| y * w + x;
        let mut member = vec![false; w * h];
        for p in &points {
            member[idx((p.i - x0) as usize, (p.j - y0) as usize)] = true;
        }
        // below[v]: some member u <= v; above[v]: some member w >= v.
        let mut below = member.clone();
        for y in 0..h {
            for x in 0..w {
                if x > 0 && below[idx(x - 1, y)] || y > 0 && below[idx(x, y - 1)] {
                    below[idx(x, y)] = true;
                }
            }
        }
        let mut above = member.clone();
        for y in (0..h).rev() {
            for x in (0..w).rev() {
                if x + 1 < w && above[idx(x + 1, y)] || y + 1 < h && above[idx(x, y + 1)] {
                    above[idx(x, y)] = true;
                }
            }
        }
        if (0..w * h).any(|c| below[c] && above[c] && !member[c]) {
            return Err(RankError::NotInterval("not convex"));
        }
        let start = *points.iter().next().unwrap();
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(p) = queue.pop_front() {
            for q in neighbors(p) {
                if points.contains(&q) && seen.insert(q) {
                    queue.push_back(q);
                }
            }
        }
        if seen.len() != points.len() {
            return Err(RankError::NotInterval("not connected"));
        }
        Ok(Self { points })
    }

    pub fn rectangle(u: GridPoint, v: GridPoint) -> Result<Self, RankError> {
        if !u.le(&v) {
            return Err(RankError::NotBelow(u, v));
        }
        Self::new((u.i..=v.i).flat_map(|i| (u.j..=v.j).map(move |j| GridPoint::new(i, j))))
    }

    pub fn from_staircase(region: &StaircaseRegion) -> Result<Self, RankError> {
        Self::new(region.points())
    }

    pub fn points(&self) -> impl Iterator<Item = GridPoint> + '_ {
        self.points.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: GridPoint) -> bool {
        self.points.contains(&p)
    }

    /// Covering pairs `u < v` of the grid order with both ends inside.
    pub fn covers(&self) -> Vec<(GridPoint, GridPoint)> {
        let mut out = Vec::new();
        for &p in &self.points {
            for q in [GridPoint::new(p.i + 1, p.j), GridPoint::new(p.i, p.j + 1)] {
                if self.points.contains(&q) {
                    out.push((p, q));
                }
            }
        }
        out
    }
}

fn neighbors(p: GridPoint) -> impl Iterator<Item = GridPoint> {
    let mut out = vec![GridPoint::new(p.i + 1, p.j), GridPoint::new(p.i, p.j + 1)];
    if p.i > 0 {
        out.push(GridPoint::new(p.i - 1, p.j));
    }
    if p.j > 0 {
        out.push(GridPoint::new(p.i, p.j - 1));
    }
    out.into_iter()
}

/// Zigzag filtration along `path`: everything of the first sublevel set, then
/// per step the set difference of consecutive sublevel sets, inserted faces
/// first or deleted cofaces first.
pub fn restrict_to_path(f: &BiFiltration, path: &BoundaryPath) -> ZigzagFiltration {
    let complex = f.complex();
    let pts = path.points();
    let mut steps = Vec::with_capacity(pts.len());
    if let Some(&p0) = pts.first() {
        steps.push(ZigzagStep::insert(
            f.subcomplex_ids(p0)
                .into_iter()
                .map(|id| complex.simplex(id).clone())
                .collect(),
        ));
    }
    for (w, dir) in pts.windows(2).zip(path.directions()) {
        let (a, b) = (w[0], w[1]);
        let diff = |small: GridPoint, big: GridPoint| -> Vec<usize> {
            (0..complex.len())
                .filter(|&id| {
                    let v = f.value(id);
                    v.le(&big) && !v.le(&small)
                })
                .collect()
        };
        steps.push(match dir {
            Direction::Up => ZigzagStep::insert(
                diff(a, b)
                    .into_iter()
                    .map(|id| complex.simplex(id).clone())
                    .collect(),
            ),
            Direction::Down => ZigzagStep::delete(
                diff(b, a)
                    .into_iter()
                    .rev()
                    .map(|id| complex.simplex(id).clone())
                    .collect(),
            ),
        });
    }
    ZigzagFiltration::new_unchecked(steps)
}

/// Rank computations on one bifiltration, sharing a homology cache.
///
/// Safe to use from several threads; results do not depend on the schedule.
pub struct RankContext<'a> {
    f: &'a BiFiltration,
    engine: ZigzagEngine<'a>,
}

impl<'a> RankContext<'a> {
    pub fn new(f: &'a BiFiltration) -> Self {
        Self {
            f,
            engine: ZigzagEngine::new(f.complex()),
        }
    }

    pub fn bifiltration(&self) -> &BiFiltration {
        self.f
    }

    fn check(&self, u: GridPoint) -> Result<(), RankError> {
        let m = self.f.grid().m();
        if u.i > m || u.j > m {
            return Err(RankError::OffGrid(u));
        }
        Ok(())
    }

    fn bits(&self, u: GridPoint) -> Vec<u64> {
        let n = self.f.complex().len();
        let mut bits = vec![0u64; n.div_ceil(64)];
        for id in self.f.subcomplex_ids(u) {
            bits[id / 64] |= 1 << (id % 64);
        }
        bits
    }

    pub fn homology_space(&self, u: GridPoint, dim: usize) -> Arc<HomologyBasis> {
        self.engine.homology(&self.bits(u), dim)
    }

    pub fn induced_map(&self, u: GridPoint, v: GridPoint, dim: usize) -> Result<Gf2Matrix, RankError> {
        self.check(u)?;
        self.check(v)?;
        if !u.le(&v) {
            return Err(RankError::NotBelow(u, v));
        }
        Ok(self
            .homology_space(u, dim)
            .map_into(&self.homology_space(v, dim)))
    }

    pub fn rectangle_rank(&self, u: GridPoint, v: GridPoint, dim: usize) -> Result<usize, RankError> {
        Ok(self.induced_map(u, v, dim)?.rank())
    }

    /// Number of full bars of the zigzag along the worm's boundary path.
    pub fn compute_rank(&self, worm: &DiscreteWorm, dim: usize) -> Result<usize, RankError> {
        let path = worm.boundary_path()?;
        let zf = restrict_to_path(self.f, &path);
        Ok(self
            .engine
            .full_bar_count(&zf, dim)
            .expect("restricted filtration lives in the bifiltration's complex"))
    }

    /// Rank of the limit-to-colimit map of the diagram over `region`.
    pub fn rank_oracle(&self, region: &IntervalRegion, dim: usize) -> Result<usize, RankError> {
        for p in region.points() {
            self.check(p)?;
        }
        let pts: Vec<GridPoint> = region.points().collect();
        let spaces: HashMap<GridPoint, Arc<HomologyBasis>> = pts
            .iter()
            .map(|&p| (p, self.homology_space(p, dim)))
            .collect();
        let mut offset = HashMap::new();
        let mut total = 0;
        for &p in &pts {
            offset.insert(p, total);
            total += spaces[&p].dim();
        }
        let covers = region.covers();
        let maps: Vec<Gf2Matrix> = covers
            .iter()
            .map(|(u, v)| spaces[u].map_into(&spaces[v]))
            .collect();

        // Limit: kernel of m -> (phi(m_u) + m_v) over covering pairs.
        let mut edge_offset = Vec::with_capacity(covers.len());
        let mut edge_total = 0;
        for (_, v) in &covers {
            edge_offset.push(edge_total);
            edge_total += spaces[v].dim();
        }
        let mut a_cols = vec![Vec::new(); total];
        for (e, ((u, v), phi)) in covers.iter().zip(&maps).enumerate() {
            for a in 0..spaces[u].dim() {
                a_cols[offset[u] + a].extend(phi.column(a).support().iter().map(|r| edge_offset[e] + r));
            }
            for b in 0..spaces[v].dim() {
                a_cols[offset[v] + b].push(edge_offset[e] + b);
            }
        }
        let a = Gf2Matrix::from_columns(
            edge_total,
            a_cols.into_iter().map(Gf2Vector::from_indices).collect(),
        );
        let limit = a.kernel();

        // Colimit: quotient of the direct sum by phi(m) + m over covering pairs.
        let mut relations = Vec::new();
        for ((u, v), phi) in covers.iter().zip(&maps) {
            for a in 0..spaces[u].dim() {
                let mut col: Vec<usize> = phi.column(a).support().iter().map(|r| offset[v] + r).collect();
                col.push(offset[u] + a);
                relations.push(Gf2Vector::from_indices(col));
            }
        }
        let image = Subspace::spanned_by(total, relations);
        let u0 = pts[0];
        let (lo, hi) = (offset[&u0], offset[&u0] + spaces[&u0].dim());
        let embedded = limit.into_iter().map(|m| {
            Gf2Vector::from_sorted(m.support().iter().copied().filter(|&i| i >= lo && i < hi).collect())
        });
        let with_limit = image.sum(&Subspace::spanned_by(total, embedded));
        Ok(with_limit.dim() - image.dim())
    }
}

pub fn homology_space(f: &BiFiltration, u: GridPoint, dim: usize) -> Arc<HomologyBasis> {
    RankContext::new(f).homology_space(u, dim)
}

pub fn induced_map(f: &BiFiltration, u: GridPoint, v: GridPoint, dim: usize) -> Result<Gf2Matrix, RankError> {
    RankContext::new(f).induced_map(u, v, dim)
}

pub fn rectangle_rank(f: &BiFiltration, u: GridPoint, v: GridPoint, dim: usize) -> Result<usize, RankError> {
    RankContext::new(f).rectangle_rank(u, v, dim)
}

pub fn compute_rank(f: &BiFiltration, worm: &DiscreteWorm, dim: usize) -> Result<usize, RankError> {
    RankContext::new(f).compute_rank(worm, dim)
}

pub fn rank_oracle(f: &BiFiltration, region: &IntervalRegion, dim: usize) -> Result<usize, RankError> {
    RankContext::new(f).rank_oracle(region, dim)
}
