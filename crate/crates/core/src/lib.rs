//! Sets of finite perimeter on dyadic grids.
//!
//! `perigrid` measures perimeter, total variation, and volume density of cell
//! sets on 2D and 3D dyadic grids, builds interior cube decompositions with
//! partition-of-unity smoothing, slices functions into level sets and
//! reassembles them, decomposes planar boundaries into nested cycles, and
//! extends sets across a boundary while tracking how much new perimeter the
//! extension touches. A built-in gallery provides the reference domains the
//! test suite measures.

pub mod components;
pub mod density;
pub mod dist;
pub mod error;
pub mod gallery;
pub mod grid;
pub mod io;
pub mod coarea;
pub mod measure;
pub mod planar;
pub mod whitney;

pub use error::{Error, Result};
pub use grid::{Adjacency, Cell, CellSet, Grid, GridFunction, Region};
