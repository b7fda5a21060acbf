//! Hierarchical quad-tile complexes and the finitely presented path
//! semigroup built on them.

pub mod complex;
pub mod metrics;
pub mod presentation;
pub mod rewrite;
pub mod scheme;
pub mod typing;
pub mod verify;

pub use complex::{
    build_complex, build_sequence, build_sequence_with_stats, make_unit_tile, subdivide,
    BuildLimits, Complex, ComplexError, EdgeId, EdgeType, FaceId, LevelStats, Sense, VertexId,
    VertexKind,
};
pub use metrics::{Bundle, EllipticityReport, MetricsError, Path, SampleSpec};
pub use scheme::{SchemeError, SubdivisionScheme};
