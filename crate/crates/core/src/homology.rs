//! Simplicial homology over GF(2) of subcomplexes of a fixed ambient complex.
//!
//! Chains are vectors indexed by ambient simplex ids, so the chain map of an
//! inclusion is the identity and a cycle of a subcomplex can be read directly
//! in any larger subcomplex.

use crate::complex::SimplicialComplex;
use crate::gf2::{Echelon, Gf2Matrix, Gf2Vector};

/// A basis of `H_p` of one subcomplex: cycle representatives, together with an
/// echelon of boundaries and representatives used to express any cycle in
/// that basis.
#[derive(Clone, Debug)]
pub struct HomologyBasis {
    reps: Vec<Gf2Vector>,
    echelon: Echelon,
}

impl HomologyBasis {
    /// `members` are ambient ids of the subcomplex, which must be closed under
    /// faces.
    pub fn compute(ambient: &SimplicialComplex, members: &[usize], dim: usize) -> Self {
        let in_dim = |d: usize| -> Vec<usize> {
            let range = ambient.dim_range(d);
            members.iter().copied().filter(|id| range.contains(id)).collect()
        };
        let boundary = |id: usize| Gf2Vector::from_sorted(ambient.facet_ids(id).to_vec());

        let chains = in_dim(dim);
        let cycles: Vec<Gf2Vector> = if dim == 0 {
            chains.iter().map(|&id| Gf2Vector::unit(id)).collect()
        } else {
            let n = ambient.len();
            let d = Gf2Matrix::from_columns(n, chains.iter().map(|&id| boundary(id)).collect());
            d.kernel()
                .into_iter()
                .map(|k| k.remap(|local| chains[local]))
                .collect()
        };

        let mut echelon = Echelon::new();
        for id in in_dim(dim + 1) {
            echelon.insert(boundary(id), Gf2Vector::zero());
        }
        let mut reps = Vec::new();
        for z in cycles {
            let tag = Gf2Vector::unit(reps.len());
            if let Some(rep) = echelon.insert_remainder(&z, tag) {
                reps.push(rep);
            }
        }
        Self { reps, echelon }
    }

    pub fn dim(&self) -> usize {
        self.reps.len()
    }

    pub fn reps(&self) -> &[Gf2Vector] {
        &self.reps
    }

    /// Coordinates of the class of `cycle` in this basis, or `None` if `cycle`
    /// is not a cycle of this subcomplex.
    pub fn coordinates(&self, cycle: &Gf2Vector) -> Option<Gf2Vector> {
        let (rem, tag) = self.echelon.reduce(cycle);
        rem.is_zero().then_some(tag)
    }

    /// Matrix of the map induced by the inclusion of `self`'s subcomplex into
    /// `target`'s subcomplex.
    ///
    /// Panics if a representative is not a cycle of the target.
    pub fn map_into(&self, target: &HomologyBasis) -> Gf2Matrix {
        Gf2Matrix::from_columns(
            target.dim(),
            self.reps
                .iter()
                .map(|z| {
                    target
                        .coordinates(z)
                        .expect("source subcomplex must be contained in target")
                })
                .collect(),
        )
    }
}

/// Betti number of a subcomplex, computed from boundary ranks alone.
pub fn betti(ambient: &SimplicialComplex, members: &[usize], dim: usize) -> usize {
    let in_dim = |d: usize| -> Vec<usize> {
        let range = ambient.dim_range(d);
        members.iter().copied().filter(|id| range.contains(id)).collect()
    };
    let rank_of = |d: usize| -> usize {
        if d == 0 {
            return 0;
        }
        let cols: Vec<Gf2Vector> = in_dim(d)
            .into_iter()
            .map(|id| Gf2Vector::from_sorted(ambient.facet_ids(id).to_vec()))
            .collect();
        Gf2Matrix::from_columns(ambient.len(), cols).rank()
    };
    in_dim(dim).len() - rank_of(dim) - rank_of(dim + 1)
}
