//! The GRIL landscape: binary search over worm widths, batched vectors,
//! landscape distance, rank reconstruction and the directional derivative
//! assignment.
//!
//! Widths are handled in integer grid steps internally and reported as reals
//! (`steps / M`).

use std::collections::HashMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::complex::{BiFiltration, GridPoint, GridSpec, Simplex};
use crate::rank::{RankContext, RankError};
use crate::worm::{DiscreteWorm, StaircaseRegion, WormError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GrilError {
    #[error("k must be at least 1")]
    ZeroK,
    #[error("ell must be at least 1")]
    ZeroEll,
    #[error("center ({}, {}) is outside the grid", .0.i, .0.j)]
    CenterOffGrid(GridPoint),
    #[error("subgrid step must be between 1 and M")]
    BadSubgridStep,
    #[error("vectors have different index sets")]
    IndexMismatch,
    #[error("filtration is not generic: {0} and {1} share a coordinate")]
    NotGeneric(Simplex, Simplex),
    #[error("landscape value is zero at this query")]
    ZeroLambda,
    #[error("perturbation is not representable: {0}")]
    BadPerturbation(String),
    #[error(transparent)]
    Rank(#[from] RankError),
    #[error(transparent)]
    Worm(#[from] WormError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GrilQuery {
    pub center: GridPoint,
    pub k: usize,
    pub ell: u32,
    pub dim: usize,
}

impl GrilQuery {
    pub fn new(center: GridPoint, k: usize, ell: u32, dim: usize) -> Result<Self, GrilError> {
        if k == 0 {
            return Err(GrilError::ZeroK);
        }
        if ell == 0 {
            return Err(GrilError::ZeroEll);
        }
        Ok(Self { center, k, ell, dim })
    }
}

fn check_center(grid: GridSpec, p: GridPoint) -> Result<(), GrilError> {
    if p.i > grid.m() || p.j > grid.m() {
        return Err(GrilError::CenterOffGrid(p));
    }
    Ok(())
}

/// Largest width in steps whose worm has rank at least `k`, by binary search
/// over `1..=dmax`; 0 if none.
fn search(mut dmax: u32, k: usize, mut rank_at: impl FnMut(u32) -> Result<usize, GrilError>) -> Result<u32, GrilError> {
    let mut dmin = 1;
    let mut best = 0;
    while dmin <= dmax {
        let d = (dmin + dmax) / 2;
        if rank_at(d)? >= k {
            best = d;
            dmin = d + 1;
        } else {
            dmax = d - 1;
        }
    }
    Ok(best)
}

/// Largest width whose worm stays in the positive quadrant. Wider worms
/// reach points where the complex is empty and have rank 0.
pub fn max_width(center: GridPoint, ell: u32) -> u32 {
    center.i.min(center.j) / ell.max(1)
}

/// `λ̂(p, k, ℓ)` in grid steps.
pub fn compute_gril_steps(ctx: &RankContext<'_>, q: &GrilQuery) -> Result<u32, GrilError> {
    let grid = ctx.bifiltration().grid();
    check_center(grid, q.center)?;
    search(max_width(q.center, q.ell), q.k, |d| {
        let w = DiscreteWorm::new(q.center, d, q.ell, grid)?;
        Ok(ctx.compute_rank(&w, q.dim)?)
    })
}

/// `λ̂(p, k, ℓ)` as a multiple of `1/M` in `[0, 1]`.
pub fn compute_gril(f: &BiFiltration, q: &GrilQuery) -> Result<f64, GrilError> {
    let ctx = RankContext::new(f);
    Ok(compute_gril_steps(&ctx, q)? as f64 * f.grid().rho())
}

/// Reference implementation scanning every width.
pub fn exhaustive_gril_steps(ctx: &RankContext<'_>, q: &GrilQuery) -> Result<u32, GrilError> {
    let grid = ctx.bifiltration().grid();
    check_center(grid, q.center)?;
    let mut best = 0;
    for d in 1..=max_width(q.center, q.ell) {
        let w = DiscreteWorm::new(q.center, d, q.ell, grid)?;
        if ctx.compute_rank(&w, q.dim)? >= q.k {
            best = d;
        }
    }
    Ok(best)
}

/// Cell-centered subgrid: coordinates `i*step + step/2` for `i < M/step`,
/// listed row by row (y outer, x inner).
pub fn subgrid_centers(grid: GridSpec, step: u32) -> Result<Vec<GridPoint>, GrilError> {
    if step == 0 || step > grid.m() {
        return Err(GrilError::BadSubgridStep);
    }
    let coords: Vec<u32> = (0..grid.m() / step).map(|i| i * step + step / 2).collect();
    Ok(coords
        .iter()
        .flat_map(|&j| coords.iter().map(move |&i| GridPoint::new(i, j)))
        .collect())
}

/// Index set and values of a batch of landscape queries.
///
/// Values are stored in grid steps, ordered by dim, then center, then k, then
/// ell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrilVector {
    grid: GridSpec,
    centers: Vec<GridPoint>,
    kmax: usize,
    ells: Vec<u32>,
    dims: Vec<usize>,
    values: Vec<u32>,
}

/// Position of one entry of a [`GrilVector`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GrilIndex {
    pub dim: usize,
    pub center_idx: usize,
    pub center: GridPoint,
    pub k: usize,
    pub ell: u32,
}

impl GrilVector {
    /// Panics if `values` has the wrong length.
    pub fn from_parts(
        grid: GridSpec,
        centers: Vec<GridPoint>,
        kmax: usize,
        ells: Vec<u32>,
        dims: Vec<usize>,
        values: Vec<u32>,
    ) -> Self {
        assert_eq!(values.len(), dims.len() * centers.len() * kmax * ells.len());
        Self {
            grid,
            centers,
            kmax,
            ells,
            dims,
            values,
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn centers(&self) -> &[GridPoint] {
        &self.centers
    }

    pub fn kmax(&self) -> usize {
        self.kmax
    }

    pub fn ells(&self) -> &[u32] {
        &self.ells
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn steps(&self) -> &[u32] {
        &self.values
    }

    fn offset(&self, dim_pos: usize, center_idx: usize, k: usize, ell_pos: usize) -> usize {
        ((dim_pos * self.centers.len() + center_idx) * self.kmax + (k - 1)) * self.ells.len() + ell_pos
    }

    /// Value in steps, or `None` if the index is not in the vector.
    pub fn get_steps(&self, center_idx: usize, k: usize, ell: u32, dim: usize) -> Option<u32> {
        let dp = self.dims.iter().position(|&d| d == dim)?;
        let lp = self.ells.iter().position(|&l| l == ell)?;
        if k == 0 || k > self.kmax || center_idx >= self.centers.len() {
            return None;
        }
        Some(self.values[self.offset(dp, center_idx, k, lp)])
    }

    pub fn get(&self, center_idx: usize, k: usize, ell: u32, dim: usize) -> Option<f64> {
        self.get_steps(center_idx, k, ell, dim)
            .map(|s| s as f64 * self.grid.rho())
    }

    /// Entries in storage order.
    pub fn entries(&self) -> impl Iterator<Item = (GrilIndex, f64)> + '_ {
        let rho = self.grid.rho();
        self.dims.iter().flat_map(move |&dim| {
            (0..self.centers.len()).flat_map(move |center_idx| {
                (1..=self.kmax).flat_map(move |k| {
                    self.ells.iter().map(move |&ell| {
                        let idx = GrilIndex {
                            dim,
                            center_idx,
                            center: self.centers[center_idx],
                            k,
                            ell,
                        };
                        let v = self.get_steps(center_idx, k, ell, dim).unwrap();
                        (idx, v as f64 * rho)
                    })
                })
            })
        })
    }

    fn same_index(&self, other: &GrilVector) -> bool {
        self.centers == other.centers
            && self.kmax == other.kmax
            && self.ells == other.ells
            && self.dims == other.dims
    }
}

/// Landscape values for every center, `k in 1..=kmax`, ell and dim.
///
/// Ranks are memoized per `(center, ell)` and width, and the search for `k+1`
/// is bounded by the value found for `k`. `workers` threads are used; the
/// result does not depend on it.
pub fn compute_gril_vector(
    f: &BiFiltration,
    centers: &[GridPoint],
    kmax: usize,
    ells: &[u32],
    dims: &[usize],
    workers: usize,
) -> Result<GrilVector, GrilError> {
    let grid = f.grid();
    if kmax == 0 {
        return Err(GrilError::ZeroK);
    }
    if ells.contains(&0) {
        return Err(GrilError::ZeroEll);
    }
    for &p in centers {
        check_center(grid, p)?;
    }
    let ctx = RankContext::new(f);
    let groups: Vec<(usize, usize)> = (0..centers.len())
        .flat_map(|c| (0..ells.len()).map(move |l| (c, l)))
        .collect();
    let run = || -> Result<Vec<Vec<u32>>, GrilError> {
        groups
            .par_iter()
            .map(|&(c, l)| group_values(&ctx, centers[c], ells[l], kmax, dims))
            .collect()
    };
    let per_group = if workers == 0 {
        run()?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("thread pool")
            .install(run)?
    };

    let mut out = GrilVector::from_parts(
        grid,
        centers.to_vec(),
        kmax,
        ells.to_vec(),
        dims.to_vec(),
        vec![0; dims.len() * centers.len() * kmax * ells.len()],
    );
    for (g, &(c, l)) in groups.iter().enumerate() {
        for (dp, _) in dims.iter().enumerate() {
            for k in 1..=kmax {
                let o = out.offset(dp, c, k, l);
                out.values[o] = per_group[g][dp * kmax + (k - 1)];
            }
        }
    }
    Ok(out)
}

/// Values for one `(center, ell)`, laid out as `[dim_pos][k-1]`.
fn group_values(
    ctx: &RankContext<'_>,
    center: GridPoint,
    ell: u32,
    kmax: usize,
    dims: &[usize],
) -> Result<Vec<u32>, GrilError> {
    let grid = ctx.bifiltration().grid();
    let mut memo: HashMap<u32, Vec<usize>> = HashMap::new();
    let mut rank_at = |d: u32, dp: usize| -> Result<usize, GrilError> {
        if let Some(r) = memo.get(&d) {
            return Ok(r[dp]);
        }
        let w = DiscreteWorm::new(center, d, ell, grid)?;
        let r = dims
            .iter()
            .map(|&dim| ctx.compute_rank(&w, dim))
            .collect::<Result<Vec<_>, _>>()?;
        let out = r[dp];
        memo.insert(d, r);
        Ok(out)
    };
    let mut out = Vec::with_capacity(dims.len() * kmax);
    for dp in 0..dims.len() {
        let mut bound = max_width(center, ell);
        for k in 1..=kmax {
            let v = search(bound, k, |d| rank_at(d, dp))?;
            out.push(v);
            bound = v;
        }
    }
    Ok(out)
}

/// Largest `k` with value at least `delta_steps`, 0 if none.
pub fn reconstruct_rank(v: &GrilVector, center_idx: usize, delta_steps: u32, ell: u32, dim: usize) -> usize {
    (1..=v.kmax)
        .filter(|&k| {
            v.get_steps(center_idx, k, ell, dim)
                .is_some_and(|s| s >= delta_steps)
        })
        .max()
        .unwrap_or(0)
}

/// Sup-norm distance between two vectors over the same index set.
pub fn gril_distance(a: &GrilVector, b: &GrilVector) -> Result<f64, GrilError> {
    if !a.same_index(b) {
        return Err(GrilError::IndexMismatch);
    }
    Ok(a.entries()
        .zip(b.entries())
        .map(|((_, x), (_, y))| (x - y).abs())
        .fold(0.0, f64::max))
}

/// Which part of the maximal worm's boundary a support simplex sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SupportCase {
    /// Top horizontal edge.
    Top,
    /// Left vertical edge.
    Left,
    /// Lowest point of the lower staircase, mirror of `Left`.
    BottomEnd,
    /// Rightmost point of the upper staircase, mirror of `Top`.
    RightEnd,
    /// A simplex passed by the lower staircase.
    Lower,
    /// A simplex reached by the upper staircase away from its ends.
    Upper,
}

impl SupportCase {
    /// Edges move by `ell` steps per width step, staircases by one.
    pub fn is_edge(self) -> bool {
        matches!(self, Self::Top | Self::Left | Self::BottomEnd | Self::RightEnd)
    }
}

/// Directions assigned to the simplices that limit the worm width.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment {
    /// Simplex id to `(s_x, s_y)`, sorted by id.
    pub values: Vec<(usize, (i32, i32))>,
    pub cases: Vec<SupportCase>,
    /// Support touched both edge and staircase cases; `values` is empty.
    pub mixed: bool,
    /// The worm reached the coordinate axes; `values` is empty.
    pub capped: bool,
    /// Width in steps of the maximal worm.
    pub width: u32,
}

impl Assignment {
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup_norm(&self) -> i32 {
        self.values
            .iter()
            .map(|(_, (x, y))| x.abs().max(y.abs()))
            .max()
            .unwrap_or(0)
    }

    /// Slope of `λ` along the normalized direction: `1/ell` for edge cases,
    /// 1 for staircase cases, 0 for an empty support.
    pub fn predicted_slope(&self, ell: u32) -> f64 {
        if self.values.is_empty() {
            0.0
        } else if self.cases.iter().all(|c| c.is_edge()) {
            1.0 / ell as f64
        } else {
            1.0
        }
    }
}

/// Rejects two distinct simplices sharing an x or a y value.
pub fn check_generic(f: &BiFiltration) -> Result<(), GrilError> {
    for axis in 0..2 {
        let mut seen: HashMap<u32, usize> = HashMap::new();
        for (id, v) in f.values().iter().enumerate() {
            let c = if axis == 0 { v.i } else { v.j };
            if let Some(&other) = seen.get(&c) {
                let s = f.complex();
                return Err(GrilError::NotGeneric(s.simplex(other).clone(), s.simplex(id).clone()));
            }
            seen.insert(c, id);
        }
    }
    Ok(())
}

struct Shape<'a> {
    region: &'a StaircaseRegion,
}

impl Shape<'_> {
    /// Some point of the region is `>= v`.
    fn dominates(&self, v: GridPoint) -> bool {
        self.region.columns().iter().any(|c| c.x >= v.i && c.hi >= v.j)
    }

    /// Some point of the region is `< v` in both coordinates.
    fn strictly_below(&self, v: GridPoint) -> bool {
        self.region.columns().iter().any(|c| c.x < v.i && c.lo < v.j)
    }

    fn min_x(&self) -> u32 {
        self.region.columns()[0].x
    }

    fn min_y(&self) -> u32 {
        self.region.columns().iter().map(|c| c.lo).min().unwrap()
    }

    fn max_y(&self) -> u32 {
        self.region.columns()[0].hi
    }

    fn last(&self) -> crate::worm::Column {
        *self.region.columns().last().unwrap()
    }

    /// Dominated by a point of the top edge.
    fn top_dominates(&self, v: GridPoint) -> bool {
        let top = self.max_y();
        v.j <= top && self.region.columns().iter().any(|c| c.hi == top && c.x >= v.i)
    }

    /// Dominated by a point of the right edge.
    fn right_dominates(&self, v: GridPoint) -> bool {
        let last = self.last();
        v.i <= last.x && v.j <= last.hi
    }
}

/// Support simplices and their directions at the maximal worm of `q`.
pub fn assignment(f: &BiFiltration, q: &GrilQuery) -> Result<Assignment, GrilError> {
    check_generic(f)?;
    let ctx = RankContext::new(f);
    let d = compute_gril_steps(&ctx, q)?;
    if d == 0 {
        return Err(GrilError::ZeroLambda);
    }
    let grid = f.grid();
    if d >= max_width(q.center, q.ell) {
        return Ok(Assignment {
            capped: true,
            width: d,
            ..Default::default()
        });
    }
    let now = DiscreteWorm::new(q.center, d, q.ell, grid)?.region();
    let next = DiscreteWorm::new(q.center, d + 1, q.ell, grid)?.region();
    let (a, b) = (Shape { region: &now }, Shape { region: &next });

    let ids: Vec<usize> = (0..f.complex().len())
        .filter(|&id| {
            let dim = f.complex().simplex(id).dim();
            dim == q.dim || dim == q.dim + 1
        })
        .collect();
    let mut hits: Vec<(usize, (i32, i32), SupportCase)> = Vec::new();
    let l = q.ell as i32;
    for &id in &ids {
        let v = f.value(id);
        if !a.dominates(v) && b.dominates(v) {
            if b.top_dominates(v) {
                hits.push((id, (0, l), SupportCase::Top));
            } else if b.right_dominates(v) {
                hits.push((id, (l, 0), SupportCase::RightEnd));
            } else {
                hits.push((id, (1, 1), SupportCase::Upper));
            }
        }
        let below_all_now = v.i <= a.min_x() && v.j <= a.min_y();
        if below_all_now {
            if v.i > b.min_x() {
                hits.push((id, (-l, 0), SupportCase::Left));
            }
            if v.j > b.min_y() {
                hits.push((id, (0, -l), SupportCase::BottomEnd));
            }
        }
    }
    // A simplex already in the worm matters once the lower staircase passes
    // it. Pairs of simplices never limit the width on their own: classes they
    // carry are identified through the connected part of the worm above each.
    let single: Vec<usize> = hits.iter().map(|h| h.0).collect();
    for &id in &ids {
        let v = f.value(id);
        if !single.contains(&id) && a.dominates(v) && !a.strictly_below(v) && b.strictly_below(v) {
            hits.push((id, (-1, -1), SupportCase::Lower));
        }
    }

    let mut cases: Vec<SupportCase> = hits.iter().map(|h| h.2).collect();
    cases.sort();
    cases.dedup();
    let mixed = cases.iter().any(|c| c.is_edge()) && cases.iter().any(|c| !c.is_edge());
    if mixed {
        return Ok(Assignment {
            cases,
            mixed: true,
            width: d,
            ..Default::default()
        });
    }
    let mut values: Vec<(usize, (i32, i32))> = Vec::new();
    for (id, s, _) in hits {
        if !values.iter().any(|(i, _)| *i == id) {
            values.push((id, s));
        }
    }
    values.sort();
    Ok(Assignment {
        values,
        cases,
        mixed: false,
        capped: false,
        width: d,
    })
}

/// Outcome of moving the support along its assignment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Probe {
    pub predicted_slope: f64,
    /// `λ̂(f + α s/‖s‖∞) − λ̂(f)`
    pub observed: f64,
}

/// Moves every support simplex by `α · s / ‖s‖∞` and measures the change of
/// `λ̂`. `α · M / ‖s‖∞` must be an integer number of steps.
pub fn directional_probe(f: &BiFiltration, s: &Assignment, alpha: f64, q: &GrilQuery) -> Result<Probe, GrilError> {
    let grid = f.grid();
    let before = compute_gril(f, q)?;
    let predicted_slope = s.predicted_slope(q.ell);
    if s.is_empty() {
        return Ok(Probe {
            predicted_slope,
            observed: 0.0,
        });
    }
    let norm = s.sup_norm() as f64;
    let scale = alpha * grid.m() as f64 / norm;
    if (scale - scale.round()).abs() > 1e-9 {
        return Err(GrilError::BadPerturbation(format!(
            "alpha {alpha} is not a multiple of rho * {norm}"
        )));
    }
    let scale = scale.round() as i64;
    let mut values = f.values().to_vec();
    for &(id, (sx, sy)) in &s.values {
        let x = values[id].i as i64 + sx as i64 * scale;
        let y = values[id].j as i64 + sy as i64 * scale;
        if x < 0 || y < 0 || x > grid.m() as i64 || y > grid.m() as i64 {
            return Err(GrilError::BadPerturbation("value leaves the grid".into()));
        }
        values[id] = GridPoint::new(x as u32, y as u32);
    }
    let moved = BiFiltration::new(f.complex().clone(), grid, values)
        .map_err(|e| GrilError::BadPerturbation(e.to_string()))?;
    let after = compute_gril(&moved, q)?;
    Ok(Probe {
        predicted_slope,
        observed: after - before,
    })
}
