//! Dimensions of planar diagonal self-affine carpets of Gatzouras–Lalley and
//! Barański type: Hausdorff, box, Assouad and lower dimensions, pointwise
//! Assouad dimensions along symbolic sequences, non-autonomous fibre
//! dimensions, and brute-force covering oracles to check them against.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod carpet;
pub mod dims;
pub mod error;
pub mod fibre;
pub mod instances;
pub mod optimize;
pub mod oracle;
pub mod render;
pub mod scalar;
pub mod sequence;
pub mod symbolic;

pub use carpet::{AffineMap, Axis, CarpetKind, ClassificationReport, ColumnStructure, DiagonalIfs};
pub use error::{CarpetError, Result};
pub use fibre::{FibreAssouad, NonAutoFibre, PropertyReport, ThetaQuery, ThetaTriple};
pub use oracle::{PointCloud, Rect, RectCover, Regression};
pub use render::{ComparisonDistances, Highlight, RenderSpec, TangentComparison};
pub use scalar::Scalar;
pub use sequence::{Block, Expanded, Repeat, SequenceSpec, Word};
pub use symbolic::{
    ApproximateSquare, OmegaClass, PointwiseAssouad, PseudoCylinder, Regularity, Section, Shape, Symbolic,
    TargetSequence,
};
