pub mod complex;
pub mod filtrations;
pub mod gf2;
pub mod homology;
pub mod io;
pub mod landscape;
pub mod rank;
pub mod worm;
pub mod zigzag;
