//! Sparse linear algebra over the two-element field.
//!
//! Vectors store the sorted support of their nonzero coordinates. Matrices are
//! stored column-major as a list of such vectors. Reduction always uses the
//! lowest one (largest row index) of a column as its pivot, which is the
//! convention of standard persistence reduction.

use std::fmt;

/// A vector over GF(2), stored as the strictly increasing list of row indices
/// holding a one.
#[derive(Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Gf2Vector {
    support: Vec<usize>,
}

impl fmt::Debug for Gf2Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.support)
    }
}

impl Gf2Vector {
    pub fn zero() -> Self {
        Self { support: Vec::new() }
    }

    /// Unit vector `e_i`.
    pub fn unit(i: usize) -> Self {
        Self { support: vec![i] }
    }

    /// Builds a vector from arbitrary indices. Repeated indices cancel in pairs.
    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        let mut raw: Vec<usize> = indices.into_iter().collect();
        raw.sort_unstable();
        let mut support = Vec::with_capacity(raw.len());
        let mut i = 0;
        while i < raw.len() {
            let mut j = i;
            while j < raw.len() && raw[j] == raw[i] {
                j += 1;
            }
            if (j - i) % 2 == 1 {
                support.push(raw[i]);
            }
            i = j;
        }
        Self { support }
    }

    /// Wraps an already sorted, duplicate-free support.
    ///
    /// Panics in debug builds if the input is not strictly increasing.
    pub fn from_sorted(support: Vec<usize>) -> Self {
        debug_assert!(support.windows(2).all(|w| w[0] < w[1]));
        Self { support }
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn into_support(self) -> Vec<usize> {
        self.support
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.support.binary_search(&i).is_ok()
    }

    /// Largest index with a one, i.e. the pivot used by column reduction.
    pub fn lowest(&self) -> Option<usize> {
        self.support.last().copied()
    }

    /// `self += other`.
    pub fn add_assign(&mut self, other: &Gf2Vector) {
        if other.is_zero() {
            return;
        }
        let a = &self.support;
        let b = &other.support;
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        self.support = out;
    }

    pub fn add(&self, other: &Gf2Vector) -> Gf2Vector {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    /// Toggles a single coordinate.
    pub fn toggle(&mut self, i: usize) {
        match self.support.binary_search(&i) {
            Ok(pos) => {
                self.support.remove(pos);
            }
            Err(pos) => self.support.insert(pos, i),
        }
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &Gf2Vector) -> bool {
        let (mut i, mut j, mut parity) = (0, 0, false);
        let (a, b) = (&self.support, &other.support);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    parity = !parity;
                    i += 1;
                    j += 1;
                }
            }
        }
        parity
    }

    /// Re-indexes every coordinate through `map`.
    pub fn remap(&self, map: impl Fn(usize) -> usize) -> Gf2Vector {
        Gf2Vector::from_indices(self.support.iter().map(|&i| map(i)))
    }

    /// Keeps coordinates in `range` and shifts them down to start at zero.
    pub fn slice(&self, start: usize, end: usize) -> Gf2Vector {
        Gf2Vector {
            support: self
                .support
                .iter()
                .filter(|&&i| i >= start && i < end)
                .map(|&i| i - start)
                .collect(),
        }
    }
}

/// A sparse matrix over GF(2) stored by columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gf2Matrix {
    nrows: usize,
    columns: Vec<Gf2Vector>,
}

impl Gf2Matrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            columns: vec![Gf2Vector::zero(); ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            columns: (0..n).map(Gf2Vector::unit).collect(),
        }
    }

    /// Panics if any column has a row index `>= nrows`.
    pub fn from_columns(nrows: usize, columns: Vec<Gf2Vector>) -> Self {
        assert!(
            columns
                .iter()
                .all(|c| c.lowest().map_or(true, |r| r < nrows)),
            "row index out of range"
        );
        Self { nrows, columns }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Gf2Vector] {
        &self.columns
    }

    pub fn column(&self, j: usize) -> &Gf2Vector {
        &self.columns[j]
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.columns[col].contains(row)
    }

    pub fn transpose(&self) -> Gf2Matrix {
        let mut rows = vec![Vec::new(); self.nrows];
        for (j, col) in self.columns.iter().enumerate() {
            for &i in col.support() {
                rows[i].push(j);
            }
        }
        Gf2Matrix {
            nrows: self.columns.len(),
            columns: rows.into_iter().map(Gf2Vector::from_sorted).collect(),
        }
    }

    /// Matrix-vector product, where `x` holds column coordinates.
    pub fn apply(&self, x: &Gf2Vector) -> Gf2Vector {
        let mut out = Gf2Vector::zero();
        for &j in x.support() {
            out.add_assign(&self.columns[j]);
        }
        out
    }

    /// Matrix product `self * rhs`.
    pub fn mul(&self, rhs: &Gf2Matrix) -> Gf2Matrix {
        assert_eq!(self.ncols(), rhs.nrows(), "dimension mismatch");
        Gf2Matrix {
            nrows: self.nrows,
            columns: rhs.columns.iter().map(|c| self.apply(c)).collect(),
        }
    }

    pub fn rank(&self) -> usize {
        let (_, pivots) = self.column_reduce();
        pivots.iter().filter(|p| p.is_some()).count()
    }

    /// Left-to-right column reduction.
    ///
    /// Returns the reduced matrix and, for each column, the row of its lowest
    /// one after reduction (`None` for columns reduced to zero). Every reduced
    /// column equals the original column plus a sum of earlier original columns.
    pub fn column_reduce(&self) -> (Gf2Matrix, Vec<Option<usize>>) {
        let (reduced, pivots, _) = self.reduce_impl(false);
        (reduced, pivots)
    }

    /// Like [`column_reduce`](Self::column_reduce), additionally returning the
    /// matrix `V` with `R = self * V`.
    pub fn column_reduce_tracked(&self) -> (Gf2Matrix, Vec<Option<usize>>, Gf2Matrix) {
        let (reduced, pivots, v) = self.reduce_impl(true);
        (reduced, pivots, v.expect("tracking requested"))
    }

    fn reduce_impl(&self, track: bool) -> (Gf2Matrix, Vec<Option<usize>>, Option<Gf2Matrix>) {
        let n = self.columns.len();
        let mut cols = self.columns.clone();
        let mut v: Option<Vec<Gf2Vector>> = track.then(|| (0..n).map(Gf2Vector::unit).collect());
        let mut owner = vec![usize::MAX; self.nrows];
        let mut pivots = vec![None; n];
        for j in 0..n {
            while let Some(low) = cols[j].lowest() {
                let k = owner[low];
                if k == usize::MAX {
                    owner[low] = j;
                    pivots[j] = Some(low);
                    break;
                }
                let (left, right) = cols.split_at_mut(j);
                right[0].add_assign(&left[k]);
                if let Some(v) = v.as_mut() {
                    let (vl, vr) = v.split_at_mut(j);
                    vr[0].add_assign(&vl[k]);
                }
            }
        }
        let reduced = Gf2Matrix {
            nrows: self.nrows,
            columns: cols,
        };
        let v = v.map(|columns| Gf2Matrix { nrows: n, columns });
        (reduced, pivots, v)
    }

    /// Basis of the null space, as coordinate vectors over the columns.
    pub fn kernel(&self) -> Vec<Gf2Vector> {
        let (_, pivots, v) = self.column_reduce_tracked();
        pivots
            .iter()
            .enumerate()
            .filter(|(_, p)| p.is_none())
            .map(|(j, _)| v.columns[j].clone())
            .collect()
    }

    /// Appends the columns of `other` (same row count).
    pub fn hstack(&self, other: &Gf2Matrix) -> Gf2Matrix {
        assert_eq!(self.nrows, other.nrows);
        let mut columns = self.columns.clone();
        columns.extend(other.columns.iter().cloned());
        Gf2Matrix {
            nrows: self.nrows,
            columns,
        }
    }
}

/// Returns coefficient indices `S` with `sum(basis[S]) == target`, or `None`
/// when `target` is not in the span of `basis`.
pub fn in_span(basis: &[Gf2Vector], target: &Gf2Vector) -> Option<Vec<usize>> {
    let mut echelon = Echelon::new();
    for (i, b) in basis.iter().enumerate() {
        echelon.insert(b.clone(), Gf2Vector::unit(i));
    }
    let (rem, coeffs) = echelon.reduce(target);
    rem.is_zero().then(|| coeffs.into_support())
}

/// Vectors kept in echelon form with distinct lowest ones, each tagged with a
/// coordinate vector describing it as a combination of inserted vectors.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    rows: Vec<(Gf2Vector, Gf2Vector)>,
    by_pivot: std::collections::HashMap<usize, usize>,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v` as far as possible. Returns the remainder and the XOR of the
    /// tags of the vectors used.
    pub fn reduce(&self, v: &Gf2Vector) -> (Gf2Vector, Gf2Vector) {
        let mut rem = v.clone();
        let mut tag = Gf2Vector::zero();
        let mut free = Vec::new();
        while let Some(low) = rem.lowest() {
            match self.by_pivot.get(&low) {
                Some(&r) => {
                    rem.add_assign(&self.rows[r].0);
                    tag.add_assign(&self.rows[r].1);
                }
                None => {
                    free.push(low);
                    rem.support.pop();
                }
            }
        }
        free.reverse();
        let out = Gf2Vector::from_sorted(free);
        (out, tag)
    }

    /// Inserts `v` with the given tag. Returns `true` if it was independent.
    pub fn insert(&mut self, v: Gf2Vector, tag: Gf2Vector) -> bool {
        let mut rem = v;
        let mut t = tag;
        while let Some(low) = rem.lowest() {
            match self.by_pivot.get(&low) {
                Some(&r) => {
                    rem.add_assign(&self.rows[r].0);
                    t.add_assign(&self.rows[r].1);
                }
                None => {
                    self.by_pivot.insert(low, self.rows.len());
                    self.rows.push((rem, t));
                    return true;
                }
            }
        }
        false
    }

    pub fn contains(&self, v: &Gf2Vector) -> bool {
        self.reduce(v).0.is_zero()
    }

    /// Reduces `v`; if something remains, stores the remainder with exactly
    /// `tag` (not combined with the tags used during reduction) and returns it.
    pub fn insert_remainder(&mut self, v: &Gf2Vector, tag: Gf2Vector) -> Option<Gf2Vector> {
        let (rem, _) = self.reduce(v);
        let low = rem.lowest()?;
        self.by_pivot.insert(low, self.rows.len());
        self.rows.push((rem.clone(), tag));
        Some(rem)
    }

    pub fn vectors(&self) -> impl Iterator<Item = &Gf2Vector> {
        self.rows.iter().map(|(v, _)| v)
    }
}

/// A linear subspace of `GF(2)^ambient`, stored by an echelon basis.
#[derive(Clone, Debug)]
pub struct Subspace {
    ambient: usize,
    basis: Echelon,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Self {
            ambient,
            basis: Echelon::new(),
        }
    }

    pub fn full(ambient: usize) -> Self {
        Self::spanned_by(ambient, (0..ambient).map(Gf2Vector::unit))
    }

    pub fn spanned_by<I: IntoIterator<Item = Gf2Vector>>(ambient: usize, vectors: I) -> Self {
        let mut basis = Echelon::new();
        for v in vectors {
            basis.insert(v, Gf2Vector::zero());
        }
        Self { ambient, basis }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn basis(&self) -> Vec<Gf2Vector> {
        self.basis.vectors().cloned().collect()
    }

    pub fn contains(&self, v: &Gf2Vector) -> bool {
        self.basis.contains(v)
    }

    /// Image under `map` (whose columns index this subspace's ambient space).
    pub fn image(&self, map: &Gf2Matrix) -> Subspace {
        debug_assert_eq!(map.ncols(), self.ambient);
        Subspace::spanned_by(map.nrows(), self.basis.vectors().map(|v| map.apply(v)))
    }

    /// Preimage `{x : map(x) in self}`; `map`'s rows index this ambient space.
    pub fn preimage(&self, map: &Gf2Matrix) -> Subspace {
        debug_assert_eq!(map.nrows(), self.ambient);
        let n = map.ncols();
        let own = Gf2Matrix::from_columns(self.ambient, self.basis());
        let kernel = map.hstack(&own).kernel();
        Subspace::spanned_by(n, kernel.into_iter().map(|k| k.slice(0, n)))
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        debug_assert_eq!(self.ambient, other.ambient);
        let mut out = self.clone();
        for v in other.basis.vectors() {
            out.basis.insert(v.clone(), Gf2Vector::zero());
        }
        out
    }

    pub fn intersection_dim(&self, other: &Subspace) -> usize {
        self.dim() + other.dim() - self.sum(other).dim()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dense(nrows: usize, cols: &[&[usize]]) -> Gf2Matrix {
        Gf2Matrix::from_columns(
            nrows,
            cols.iter().map(|c| Gf2Vector::from_indices(c.iter().copied())).collect(),
        )
    }

    #[test]
    fn rank_small_cases() {
        assert_eq!(Gf2Matrix::identity(3).rank(), 3);
        assert_eq!(Gf2Matrix::zeros(4, 4).rank(), 0);
        assert_eq!(dense(2, &[&[0, 1], &[0, 1]]).rank(), 1);
    }

    #[test]
    fn reduce_identity_keeps_pivots() {
        let (r, p) = Gf2Matrix::identity(3).column_reduce();
        assert_eq!(r, Gf2Matrix::identity(3));
        assert_eq!(p, vec![Some(0), Some(1), Some(2)]);
    }

    #[test]
    fn reduce_eliminates_duplicate() {
        let (r, p) = dense(2, &[&[0], &[0]]).column_reduce();
        assert!(r.column(1).is_zero());
        assert_eq!(p, vec![Some(0), None]);
    }

    #[test]
    fn reduce_filled_triangle_boundary() {
        // simplices: 0,1,2 vertices; 3=01, 4=02, 5=12; 6=012
        let m = dense(
            7,
            &[&[], &[], &[], &[0, 1], &[0, 2], &[1, 2], &[3, 4, 5]],
        );
        let (_, p) = m.column_reduce();
        let pivoted: Vec<usize> = (0..7).filter(|&j| p[j].is_some()).collect();
        assert_eq!(pivoted, vec![3, 4, 6]);
        assert_eq!(m.rank(), 3);
    }

    #[test]
    fn in_span_examples() {
        let e = |i: usize| Gf2Vector::unit(i);
        assert_eq!(in_span(&[e(1)], &e(1)), Some(vec![0]));
        assert_eq!(in_span(&[e(1)], &e(2)), None);
        let basis = [
            Gf2Vector::from_indices([1, 2]),
            Gf2Vector::from_indices([2, 3]),
        ];
        assert_eq!(
            in_span(&basis, &Gf2Vector::from_indices([1, 3])),
            Some(vec![0, 1])
        );
    }

    #[test]
    fn from_indices_cancels_pairs() {
        assert_eq!(
            Gf2Vector::from_indices([3, 1, 3, 2, 1, 1]).support(),
            &[1, 2]
        );
    }

    #[test]
    fn subspace_preimage_and_image() {
        // f: GF(2)^3 -> GF(2)^2, e0->e0, e1->e0, e2->e1
        let f = dense(2, &[&[0], &[0], &[1]]);
        let s = Subspace::spanned_by(2, [Gf2Vector::unit(1)]);
        let pre = s.preimage(&f);
        // kernel {e0+e1} plus e2
        assert_eq!(pre.dim(), 2);
        assert!(pre.contains(&Gf2Vector::from_indices([0, 1])));
        assert!(pre.contains(&Gf2Vector::unit(2)));
        assert_eq!(Subspace::full(3).image(&f).dim(), 2);
        assert_eq!(pre.intersection_dim(&Subspace::spanned_by(3, [Gf2Vector::unit(0)])), 0);
    }

    fn arb_matrix() -> impl Strategy<Value = Gf2Matrix> {
        (1usize..=64, 1usize..=64).prop_flat_map(|(r, c)| {
            proptest::collection::vec(proptest::collection::vec(0..r, 0..=r.min(8)), c)
                .prop_map(move |cols| {
                    Gf2Matrix::from_columns(
                        r,
                        cols.into_iter().map(Gf2Vector::from_indices).collect(),
                    )
                })
        })
    }

    proptest! {
        #[test]
        fn rank_equals_transpose_rank(m in arb_matrix()) {
            prop_assert_eq!(m.rank(), m.transpose().rank());
            prop_assert!(m.rank() <= m.nrows().min(m.ncols()));
        }

        #[test]
        fn reduction_is_consistent(m in arb_matrix()) {
            let (r, pivots, v) = m.column_reduce_tracked();
            prop_assert_eq!(m.mul(&v), r.clone());
            let mut seen = std::collections::HashSet::new();
            for (j, p) in pivots.iter().enumerate() {
                prop_assert_eq!(*p, r.column(j).lowest());
                if let Some(p) = p { prop_assert!(seen.insert(*p)); }
                // V is unit upper triangular: only earlier columns are added
                prop_assert_eq!(v.column(j).lowest(), Some(j));
            }
            for k in m.kernel() {
                prop_assert!(m.apply(&k).is_zero());
            }
        }

        #[test]
        fn in_span_coefficients_reproduce_target(
            m in arb_matrix(),
            pick in proptest::collection::vec(any::<bool>(), 64),
            extra in proptest::option::of(0usize..64),
        ) {
            let basis: Vec<Gf2Vector> = m.columns().to_vec();
            let mut target = Gf2Vector::zero();
            for (j, b) in basis.iter().enumerate() {
                if pick[j] { target.add_assign(b); }
            }
            if let Some(e) = extra { if e < m.nrows() { target.toggle(e); } }
            if let Some(s) = in_span(&basis, &target) {
                let mut sum = Gf2Vector::zero();
                for i in s { sum.add_assign(&basis[i]); }
                prop_assert_eq!(sum, target);
            } else {
                prop_assert!(extra.is_some());
            }
        }
    }
}
