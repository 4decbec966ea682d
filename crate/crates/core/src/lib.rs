//! Linear regions of ReLU networks and Vietoris–Rips persistence over
//! activation-pattern distances.
//!
//! The pipeline: a [`NetworkSpec`] maps each input to a [`BitVector`]
//! (its ReLU activation pattern). Each pattern labels a convex polyhedron
//! ([`regions::Region`]); [`enumerate`] finds all of them together with the
//! dual graph. Sampled points are turned into Hamming distance matrices
//! ([`metric`]) and fed to [`persistence`] to read off barcodes.

pub mod enumerate;
pub mod error;
pub mod linalg;
pub mod lp;
pub mod metric;
pub mod network;
pub mod persistence;
pub mod regions;
pub mod sampling;
mod tolerance;

pub use enumerate::{BoxRegion, DecompositionAtlas, EnumerateOptions};
pub use error::{Error, Result};
pub use metric::DistanceMatrix;
pub use network::{BitVector, NetworkSpec};
pub use persistence::{Barcode, Filtration, Interval};
pub use regions::Region;
pub use tolerance::Tolerances;
