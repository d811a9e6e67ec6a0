#![no_std]

extern crate alloc;

pub mod diagram;
pub mod error;
pub mod flags;
pub mod linalg;
pub mod mat;
pub mod osp;
pub mod scalar;
pub mod section;
pub mod weights;

pub use diagram::{classify, enumerate_diagrams, regular_type, representative, ABDiagram, Block, Kind};
pub use error::Error;
pub use linalg::{char_poly, image, jordan_partition_nilpotent, kernel, preimage, rank, Subspace};
pub use mat::Mat;
pub use scalar::GaussianRational;
