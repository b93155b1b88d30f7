//! Discrete worms on the grid and the zigzag path along their boundary.
//!
//! A discrete `ell`-worm of width `d` (in grid steps) centered at `p` is the
//! union of the closed squares of half-width `d` centered at every grid point
//! `p + (a, -a)` with `|a| <= (ell - 1) * d`, clipped to the grid. Such a region
//! is a band between two non-increasing staircases, which is how it is stored.

use thiserror::Error;

use crate::complex::{GridPoint, GridSpec};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WormError {
    #[error("worm width must be at least one grid step")]
    ZeroWidth,
    #[error("worm length ell must be at least 1")]
    ZeroEll,
    #[error("center ({0}, {1}) is not on the grid")]
    CenterOffGrid(u32, u32),
    #[error("worms must share center, ell and grid to be compared")]
    Incomparable,
    #[error("region is empty")]
    EmptyRegion,
    #[error("region is not a staircase band: {0}")]
    NotStaircase(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DiscreteWorm {
    center: GridPoint,
    width: u32,
    ell: u32,
    grid: GridSpec,
}

impl DiscreteWorm {
    pub fn new(center: GridPoint, width: u32, ell: u32, grid: GridSpec) -> Result<Self, WormError> {
        if width == 0 {
            return Err(WormError::ZeroWidth);
        }
        if ell == 0 {
            return Err(WormError::ZeroEll);
        }
        if center.i > grid.m() || center.j > grid.m() {
            return Err(WormError::CenterOffGrid(center.i, center.j));
        }
        Ok(Self {
            center,
            width,
            ell,
            grid,
        })
    }

    pub fn center(&self) -> GridPoint {
        self.center
    }

    /// Width in grid steps.
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    /// The worm with the same center and `ell` but another width.
    pub fn with_width(&self, width: u32) -> Result<Self, WormError> {
        Self::new(self.center, width, self.ell, self.grid)
    }

    /// Grid points of the (clipped) worm, as a staircase band.
    pub fn region(&self) -> StaircaseRegion {
        let m = self.grid.m() as i64;
        let (pi, pj) = (self.center.i as i64, self.center.j as i64);
        let d = self.width as i64;
        let reach = (self.ell as i64 - 1) * d;
        // offsets a such that the square center (pi + a, pj - a) is on the grid
        let a_lo = (-reach).max(-pi).max(pj - m);
        let a_hi = reach.min(m - pi).min(pj);
        let mut columns = Vec::new();
        for x in (pi + a_lo - d).max(0)..=(pi + a_hi + d).min(m) {
            let lo_a = a_lo.max(x - pi - d);
            let hi_a = a_hi.min(x - pi + d);
            if lo_a > hi_a {
                continue;
            }
            let lo = (pj - hi_a - d).max(0);
            let hi = (pj - lo_a + d).min(m);
            columns.push(Column {
                x: x as u32,
                lo: lo as u32,
                hi: hi as u32,
            });
        }
        StaircaseRegion { columns }
    }

    /// Whether `self`'s region is contained in `other`'s, which for worms with
    /// equal center and `ell` happens exactly when the widths are ordered.
    pub fn nested_in(&self, other: &DiscreteWorm) -> Result<bool, WormError> {
        if self.center != other.center || self.ell != other.ell || self.grid != other.grid {
            return Err(WormError::Incomparable);
        }
        Ok(self.width <= other.width)
    }

    pub fn boundary_path(&self) -> Result<BoundaryPath, WormError> {
        self.region().boundary_path()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Column {
    pub x: u32,
    pub lo: u32,
    pub hi: u32,
}

/// A set of grid points given column by column, with contiguous columns whose
/// lower and upper ends are both non-increasing in `x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StaircaseRegion {
    columns: Vec<Column>,
}

impl StaircaseRegion {
    pub fn from_columns(columns: Vec<Column>) -> Result<Self, WormError> {
        let r = Self { columns };
        r.check()?;
        Ok(r)
    }

    fn check(&self) -> Result<(), WormError> {
        if self.columns.is_empty() {
            return Err(WormError::EmptyRegion);
        }
        for c in &self.columns {
            if c.lo > c.hi {
                return Err(WormError::NotStaircase("column with lo > hi"));
            }
        }
        for w in self.columns.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b.x != a.x + 1 {
                return Err(WormError::NotStaircase("columns are not contiguous"));
            }
            if b.lo > a.lo || b.hi > a.hi {
                return Err(WormError::NotStaircase("column ends must be non-increasing"));
            }
            if b.hi < a.lo {
                return Err(WormError::NotStaircase("adjacent columns do not overlap"));
            }
        }
        Ok(())
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn len(&self) -> usize {
        self.columns.iter().map(|c| (c.hi - c.lo + 1) as usize).sum()
    }

    pub fn contains(&self, p: GridPoint) -> bool {
        let Some(first) = self.columns.first() else {
            return false;
        };
        if p.i < first.x {
            return false;
        }
        match self.columns.get((p.i - first.x) as usize) {
            Some(c) => c.lo <= p.j && p.j <= c.hi,
            None => false,
        }
    }

    /// All points, column by column, bottom to top.
    pub fn points(&self) -> Vec<GridPoint> {
        self.columns
            .iter()
            .flat_map(|c| (c.lo..=c.hi).map(move |y| GridPoint::new(c.x, y)))
            .collect()
    }

    pub fn is_subset_of(&self, other: &StaircaseRegion) -> bool {
        self.points().into_iter().all(|p| other.contains(p))
    }

    /// Zigzag path along the boundary, leaving out the rightmost vertical edge
    /// and the bottommost horizontal edge (their shared endpoints excepted).
    ///
    /// The path starts at the left end of the bottom edge, climbs the lower
    /// staircase to the bottom of the left edge, goes up the left edge and then
    /// follows the upper staircase to the top of the right edge. Every step
    /// moves by one grid unit.
    pub fn boundary_path(&self) -> Result<BoundaryPath, WormError> {
        self.check()?;
        let cols = &self.columns;
        let col = |x: u32| cols[(x - cols[0].x) as usize];
        let x0 = cols[0].x;
        let last = *cols.last().expect("nonempty");
        let bottom_start = cols
            .iter()
            .find(|c| c.lo == last.lo)
            .expect("last column qualifies")
            .x;

        let mut points = Vec::new();
        let mut x = bottom_start;
        points.push(GridPoint::new(x, col(x).lo));
        while x > x0 {
            let next = col(x - 1);
            for y in col(x).lo + 1..=next.lo {
                points.push(GridPoint::new(x, y));
            }
            x -= 1;
            points.push(GridPoint::new(x, next.lo));
        }
        for y in col(x0).lo + 1..=col(x0).hi {
            points.push(GridPoint::new(x0, y));
        }
        while x < last.x {
            let next = col(x + 1);
            for y in (next.hi..col(x).hi).rev() {
                points.push(GridPoint::new(x, y));
            }
            x += 1;
            points.push(GridPoint::new(x, next.hi));
        }
        Ok(BoundaryPath::from_points(points))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    /// The next point is larger in the product order (inclusion).
    Up,
    /// The next point is smaller (restriction).
    Down,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryPath {
    points: Vec<GridPoint>,
    directions: Vec<Direction>,
}

impl BoundaryPath {
    /// Panics if two consecutive points are incomparable.
    pub fn from_points(points: Vec<GridPoint>) -> Self {
        let directions = points
            .windows(2)
            .map(|w| {
                if w[0].le(&w[1]) {
                    Direction::Up
                } else if w[1].le(&w[0]) {
                    Direction::Down
                } else {
                    panic!("consecutive path points {:?} and {:?} are incomparable", w[0], w[1])
                }
            })
            .collect();
        Self { points, directions }
    }

    pub fn points(&self) -> &[GridPoint] {
        &self.points
    }

    /// `directions()[i]` describes the step from point `i` to point `i + 1`.
    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}
