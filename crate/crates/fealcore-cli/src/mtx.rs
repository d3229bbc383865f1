//! Matrix Market coordinate writer (real, general, 1-based indices) for
//! debugging assembled systems.

use std::fmt::Write as _;
use std::path::Path;

use fealcore::error::{FealError, Result};
use fealcore::sparse::CooMatrix;

/// Render a valued, unbatched coordinate matrix in Matrix Market form.
pub fn mtx_string(a: &CooMatrix) -> Result<String> {
    let values = a
        .values()
        .ok_or(FealError::PatternOnly { op: "mtx_string" })?;
    if a.batch().is_some() {
        return Err(FealError::InvalidArgument(
            "matrix-market export takes an unbatched matrix".into(),
        ));
    }
    let (nrows, ncols) = a.sparse_shape();
    let mut out = String::from("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(out, "{nrows} {ncols} {}", a.nnz());
    for k in 0..a.nnz() {
        let _ = writeln!(
            out,
            "{} {} {}",
            a.row_indices()[k] + 1,
            a.col_indices()[k] + 1,
            values.data()[k]
        );
    }
    Ok(out)
}

/// Write the matrix to a Matrix Market file.
pub fn export_mtx(a: &CooMatrix, path: &Path) -> Result<()> {
    let text = mtx_string(a)?;
    std::fs::write(path, text)
        .map_err(|e| FealError::InvalidArgument(format!("writing {}: {e}", path.display())))
}
