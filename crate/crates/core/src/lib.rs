//! Super-level-set persistent homology of image-shaped fields and the
//! regularizers built on top of it.
//!
//! A pixel grid is triangulated (one fixed diagonal per cell), a vertex
//! function is extended to edges and triangles by the lower-star rule, and
//! simplices are swept in descending value order. Dimension-0 pairs come from
//! a union-find sweep with the elder rule; dimension-1 pairs from a column
//! reduction over GF(2). Every birth and death is tied to a critical vertex,
//! which is what makes [`topo_loss::topo_loss_with_grad`] differentiable.
//!
//! ```
//! use toporeg_core::{GridShape, ScalarField, persistence::diagram};
//!
//! let f = ScalarField::new(GridShape::new(1, 5).unwrap(), vec![3.0, 1.0, 4.0, 1.0, 5.0]).unwrap();
//! let dgm = diagram(&f, 0).unwrap();
//! let bars: Vec<(f64, f64)> = dgm.pairs().iter().map(|p| (p.birth, p.death)).collect();
//! assert_eq!(bars, vec![(5.0, 1.0), (4.0, 1.0), (3.0, 1.0)]);
//! ```

pub mod dense_losses;
mod error;
pub mod field;
pub mod filtration;
pub mod grid;
pub mod metrics;
pub mod persistence;
pub mod topo_loss;

pub use error::{Result, TopoError};
pub use field::{LossGrad, MultiChannelField, ScalarField};
pub use filtration::{build_filtration, Filtration};
pub use grid::{build_complex, FreudenthalComplex, GridShape, Simplex};
pub use persistence::{diagram, PersistenceDiagram, PersistencePair};
pub use topo_loss::TopoPenaltyConfig;
