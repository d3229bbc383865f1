//! Error type shared by all fealcore modules.

use thiserror::Error;

/// Everything that can go wrong inside the engine.
#[derive(Debug, Error)]
pub enum FealError {
    #[error("index {index} out of range at position {position} (target length {len})")]
    IndexOutOfRange {
        position: usize,
        index: usize,
        len: usize,
    },

    #[error("axis `{axis}` extent mismatch: {left} vs {right}")]
    AxisMismatch {
        axis: &'static str,
        left: usize,
        right: usize,
    },

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    #[error("batch arity mismatch: {left:?} vs {right:?}")]
    BatchMismatch {
        left: Option<usize>,
        right: Option<usize>,
    },

    #[error("face {vertices:?} is shared by {count} cells; meshes must be manifold")]
    NonManifoldFace { vertices: Vec<usize>, count: usize },

    #[error("degenerate entity: dimension {dim}, index {index} has non-positive measure")]
    DegenerateEntity { dim: usize, index: usize },

    #[error(
        "cell {cell} has non-positive signed measure; vertex ordering must be positively oriented"
    )]
    NegativeCell { cell: usize },

    #[error("barycentric row {row} sums to {sum}, expected 1 within 1e-12")]
    BarycentricRowSum { row: usize, sum: f64 },

    #[error("operation `{op}` does not support cell kind {kind}")]
    UnsupportedCellKind {
        op: &'static str,
        kind: &'static str,
    },

    #[error("quadrature degree {requested} exceeds the dimension-{dim} table ceiling {max}")]
    QuadratureDegree {
        dim: usize,
        requested: usize,
        max: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cell {cell} slot {slot} maps to DoF {dof}, out of range for gdof {gdof}")]
    DofOutOfRange {
        cell: usize,
        slot: usize,
        dof: usize,
        gdof: usize,
    },

    #[error("{what} produced a non-finite value")]
    NonFinite { what: String },

    #[error("operation `{op}` requires values; matrix is pattern-only")]
    PatternOnly { op: &'static str },

    #[error("operation `{op}` cannot mix pattern-only and valued matrices")]
    PatternValueMix { op: &'static str },

    #[error("matrix is not square ({nrows}x{ncols})")]
    NotSquare { nrows: usize, ncols: usize },

    #[error("matrix is singular to machine precision at pivot {pivot}")]
    Singular { pivot: usize },

    #[error("system size {n} exceeds the dense solver cap {cap}")]
    SizeCap { n: usize, cap: usize },

    #[error("Jacobi preconditioner needs a positive diagonal; entry {index} is {value}")]
    BadDiagonal { index: usize, value: f64 },
}

pub type Result<T> = std::result::Result<T, FealError>;
