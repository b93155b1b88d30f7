//! Zigzag persistence over GF(2).
//!
//! A filtration is a list of steps, each inserting or deleting a batch of
//! simplices. Position `i` is the complex after step `i`; a bar `[b, d)` is
//! alive at positions `b..d`. With single-simplex steps this is the usual
//! simplex-wise zigzag filtration.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use parking_lot::Mutex;
use thiserror::Error;

use crate::complex::{Simplex, SimplicialComplex};
use crate::gf2::{Gf2Matrix, Subspace};
use crate::homology::HomologyBasis;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ZigzagError {
    #[error("step {step}: {simplex} is already present")]
    AlreadyPresent { step: usize, simplex: Simplex },
    #[error("step {step}: face {face} of {simplex} is missing")]
    MissingFace {
        step: usize,
        simplex: Simplex,
        face: Simplex,
    },
    #[error("step {step}: {simplex} is not present")]
    NotPresent { step: usize, simplex: Simplex },
    #[error("step {step}: {simplex} still has a coface")]
    HasCoface { step: usize, simplex: Simplex },
    #[error("step {step}: {simplex} is not in the ambient complex")]
    NotInAmbient { step: usize, simplex: Simplex },
}

impl ZigzagError {
    pub fn step(&self) -> usize {
        match self {
            Self::AlreadyPresent { step, .. }
            | Self::MissingFace { step, .. }
            | Self::NotPresent { step, .. }
            | Self::HasCoface { step, .. }
            | Self::NotInAmbient { step, .. } => *step,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ZigzagOp {
    Insert,
    Delete,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZigzagStep {
    pub op: ZigzagOp,
    pub simplices: Vec<Simplex>,
}

impl ZigzagStep {
    pub fn insert(simplices: Vec<Simplex>) -> Self {
        Self {
            op: ZigzagOp::Insert,
            simplices,
        }
    }

    pub fn delete(simplices: Vec<Simplex>) -> Self {
        Self {
            op: ZigzagOp::Delete,
            simplices,
        }
    }
}

/// A validated zigzag filtration starting from the empty complex.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ZigzagFiltration {
    steps: Vec<ZigzagStep>,
}

impl ZigzagFiltration {
    /// Checks that the complex stays valid after every simplex operation.
    /// Simplices inside a step are applied in the given order.
    pub fn new(steps: Vec<ZigzagStep>) -> Result<Self, ZigzagError> {
        let mut present: HashMap<Simplex, usize> = HashMap::new();
        for (step, s) in steps.iter().enumerate() {
            for simplex in &s.simplices {
                match s.op {
                    ZigzagOp::Insert => {
                        if present.contains_key(simplex) {
                            return Err(ZigzagError::AlreadyPresent {
                                step,
                                simplex: simplex.clone(),
                            });
                        }
                        let facets = simplex.facets();
                        if let Some(face) = facets.iter().find(|f| !present.contains_key(*f)) {
                            return Err(ZigzagError::MissingFace {
                                step,
                                simplex: simplex.clone(),
                                face: face.clone(),
                            });
                        }
                        for f in facets {
                            *present.get_mut(&f).unwrap() += 1;
                        }
                        present.insert(simplex.clone(), 0);
                    }
                    ZigzagOp::Delete => match present.get(simplex) {
                        None => {
                            return Err(ZigzagError::NotPresent {
                                step,
                                simplex: simplex.clone(),
                            })
                        }
                        Some(&c) if c > 0 => {
                            return Err(ZigzagError::HasCoface {
                                step,
                                simplex: simplex.clone(),
                            })
                        }
                        Some(_) => {
                            present.remove(simplex);
                            for f in simplex.facets() {
                                *present.get_mut(&f).unwrap() -= 1;
                            }
                        }
                    },
                }
            }
        }
        Ok(Self { steps })
    }

    /// Skips validation; the caller guarantees a valid order.
    pub fn new_unchecked(steps: Vec<ZigzagStep>) -> Self {
        Self { steps }
    }

    /// One simplex per step.
    pub fn from_ops<I: IntoIterator<Item = (ZigzagOp, Simplex)>>(ops: I) -> Result<Self, ZigzagError> {
        Self::new(
            ops.into_iter()
                .map(|(op, s)| ZigzagStep {
                    op,
                    simplices: vec![s],
                })
                .collect(),
        )
    }

    pub fn steps(&self) -> &[ZigzagStep] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Every simplex that appears in some step, closed under faces.
    pub fn support(&self) -> SimplicialComplex {
        SimplicialComplex::closure(self.steps.iter().flat_map(|s| s.simplices.iter().cloned()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bar {
    pub dim: usize,
    pub birth: usize,
    pub death: usize,
}

impl fmt::Display for Bar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "H{} [{}, {})", self.dim, self.birth, self.death)
    }
}

/// Bars of a zigzag module over positions `0..len`, sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Barcode {
    len: usize,
    bars: Vec<Bar>,
}

impl Barcode {
    pub fn new(len: usize, mut bars: Vec<Bar>) -> Self {
        bars.sort_unstable();
        Self { len, bars }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn bars(&self) -> &[Bar] {
        &self.bars
    }

    pub fn bars_of_dim(&self, dim: usize) -> impl Iterator<Item = &Bar> {
        self.bars.iter().filter(move |b| b.dim == dim)
    }
}

/// Number of `dim`-bars equal to `[0, n)`.
pub fn count_full_bars(bc: &Barcode, n: usize, dim: usize) -> usize {
    if n == 0 {
        return 0;
    }
    bc.bars_of_dim(dim)
        .filter(|b| b.birth == 0 && b.death == n)
        .count()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Arrow {
    /// `V_i -> V_{i+1}`
    Forward(Gf2Matrix),
    /// `V_{i+1} -> V_i`
    Backward(Gf2Matrix),
}

/// A zigzag of finite-dimensional GF(2) vector spaces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZigzagModule {
    dims: Vec<usize>,
    arrows: Vec<Arrow>,
}

impl ZigzagModule {
    /// Panics if the arrow shapes do not match `dims`.
    pub fn new(dims: Vec<usize>, arrows: Vec<Arrow>) -> Self {
        assert_eq!(arrows.len() + 1, dims.len().max(1), "one arrow between consecutive spaces");
        for (i, a) in arrows.iter().enumerate() {
            let (rows, cols) = match a {
                Arrow::Forward(m) | Arrow::Backward(m) => (m.nrows(), m.ncols()),
            };
            let expected = match a {
                Arrow::Forward(_) => (dims[i + 1], dims[i]),
                Arrow::Backward(_) => (dims[i], dims[i + 1]),
            };
            assert_eq!((rows, cols), expected, "arrow {i} has the wrong shape");
        }
        Self { dims, arrows }
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// `r[b]` = number of bars containing `[b, e]`, for `b in 0..=e`.
    pub fn ranks_ending_at(&self, e: usize) -> Vec<usize> {
        let mut out = vec![0; e + 1];
        let mut s = Subspace::full(self.dims[e]);
        let mut k = Subspace::zero(self.dims[e]);
        out[e] = self.dims[e];
        for i in (0..e).rev() {
            match &self.arrows[i] {
                Arrow::Forward(f) => {
                    s = s.preimage(f);
                    k = k.preimage(f);
                }
                Arrow::Backward(g) => {
                    s = s.image(g);
                    k = k.image(g);
                }
            }
            out[i] = s.dim() - s.intersection_dim(&k);
        }
        out
    }

    /// Number of bars spanning every position.
    pub fn full_bar_count(&self) -> usize {
        if self.dims.is_empty() {
            return 0;
        }
        self.ranks_ending_at(self.dims.len() - 1)[0]
    }

    /// Interval decomposition as `(birth, death)` pairs with multiplicity.
    pub fn intervals(&self) -> Vec<(usize, usize)> {
        let n = self.dims.len();
        let ranks: Vec<Vec<usize>> = (0..n).map(|e| self.ranks_ending_at(e)).collect();
        let r = |b: isize, e: usize| -> isize {
            if b < 0 || e >= n {
                0
            } else {
                ranks[e][b as usize] as isize
            }
        };
        let mut out = Vec::new();
        for e in 0..n {
            for b in 0..=e {
                let bi = b as isize;
                let m = r(bi, e) - r(bi - 1, e) - r(bi, e + 1) + r(bi - 1, e + 1);
                debug_assert!(m >= 0);
                for _ in 0..m {
                    out.push((b, e + 1));
                }
            }
        }
        out
    }
}

type CacheKey = (Vec<u64>, usize);

/// Builds homology zigzag modules of filtrations living in a fixed ambient
/// complex, caching the homology of every complex seen.
pub struct ZigzagEngine<'a> {
    ambient: &'a SimplicialComplex,
    cache: Mutex<HashMap<CacheKey, Arc<HomologyBasis>>>,
}

impl<'a> ZigzagEngine<'a> {
    pub fn new(ambient: &'a SimplicialComplex) -> Self {
        Self {
            ambient,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn ambient(&self) -> &SimplicialComplex {
        self.ambient
    }

    pub fn cached(&self) -> usize {
        self.cache.lock().len()
    }

    fn positions(&self, zf: &ZigzagFiltration) -> Result<Vec<Vec<u64>>, ZigzagError> {
        let mut bits = vec![0u64; self.ambient.len().div_ceil(64)];
        let mut out = Vec::with_capacity(zf.len());
        for (step, s) in zf.steps().iter().enumerate() {
            for simplex in &s.simplices {
                let id = self
                    .ambient
                    .id_of(simplex)
                    .ok_or_else(|| ZigzagError::NotInAmbient {
                        step,
                        simplex: simplex.clone(),
                    })?;
                match s.op {
                    ZigzagOp::Insert => bits[id / 64] |= 1 << (id % 64),
                    ZigzagOp::Delete => bits[id / 64] &= !(1 << (id % 64)),
                }
            }
            out.push(bits.clone());
        }
        Ok(out)
    }

    /// Homology of the subcomplex given by a membership bitset.
    pub fn homology(&self, bits: &[u64], dim: usize) -> Arc<HomologyBasis> {
        let key = (bits.to_vec(), dim);
        if let Some(h) = self.cache.lock().get(&key) {
            return h.clone();
        }
        let members: Vec<usize> = (0..self.ambient.len())
            .filter(|&id| bits[id / 64] >> (id % 64) & 1 == 1)
            .collect();
        let h = Arc::new(HomologyBasis::compute(self.ambient, &members, dim));
        self.cache.lock().entry(key).or_insert(h).clone()
    }

    pub fn module(&self, zf: &ZigzagFiltration, dim: usize) -> Result<ZigzagModule, ZigzagError> {
        let positions = self.positions(zf)?;
        let spaces: Vec<Arc<HomologyBasis>> =
            positions.iter().map(|b| self.homology(b, dim)).collect();
        let arrows = zf
            .steps()
            .iter()
            .skip(1)
            .enumerate()
            .map(|(i, s)| match s.op {
                ZigzagOp::Insert => Arrow::Forward(spaces[i].map_into(&spaces[i + 1])),
                ZigzagOp::Delete => Arrow::Backward(spaces[i + 1].map_into(&spaces[i])),
            })
            .collect();
        Ok(ZigzagModule::new(
            spaces.iter().map(|h| h.dim()).collect(),
            arrows,
        ))
    }

    pub fn barcode(&self, zf: &ZigzagFiltration, max_dim: usize) -> Result<Barcode, ZigzagError> {
        let mut bars = Vec::new();
        for dim in 0..=max_dim {
            let m = self.module(zf, dim)?;
            bars.extend(
                m.intervals()
                    .into_iter()
                    .map(|(birth, death)| Bar { dim, birth, death }),
            );
        }
        Ok(Barcode::new(zf.len(), bars))
    }

    pub fn full_bar_count(&self, zf: &ZigzagFiltration, dim: usize) -> Result<usize, ZigzagError> {
        Ok(self.module(zf, dim)?.full_bar_count())
    }
}

/// Barcode of the homology zigzag module in dimensions `0..=max_dim`.
pub fn zigzag_barcode(zf: &ZigzagFiltration, max_dim: usize) -> Barcode {
    let ambient = zf.support();
    ZigzagEngine::new(&ambient)
        .barcode(zf, max_dim)
        .expect("support contains every simplex")
}
