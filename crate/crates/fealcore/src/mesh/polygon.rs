//! Ragged storage for polygonal cells.

use crate::error::{FealError, Result};
use crate::mesh::shoelace;
use crate::tensor::Tensor;

/// Polygons of varying vertex counts stored as one flat vertex vector plus a
/// pointer vector marking where each polygon starts.
#[derive(Clone, Debug)]
pub struct PolygonCellArray {
    flat_cell: Vec<usize>,
    indptr: Vec<usize>,
}

/// Wrap a flat vertex list and its offsets, validating the pointer layout.
pub fn polygon_cells(flat_cell: Vec<usize>, indptr: Vec<usize>) -> Result<PolygonCellArray> {
    PolygonCellArray::new(flat_cell, indptr)
}

impl PolygonCellArray {
    pub fn new(flat_cell: Vec<usize>, indptr: Vec<usize>) -> Result<PolygonCellArray> {
        if indptr.first() != Some(&0) {
            return Err(FealError::InvalidArgument(
                "polygon indptr must start at 0".into(),
            ));
        }
        if *indptr.last().unwrap() != flat_cell.len() {
            return Err(FealError::InvalidArgument(format!(
                "polygon indptr must end at {}, got {}",
                flat_cell.len(),
                indptr.last().unwrap()
            )));
        }
        for w in indptr.windows(2) {
            if w[1] < w[0] {
                return Err(FealError::InvalidArgument(
                    "polygon indptr must be non-decreasing".into(),
                ));
            }
            if w[1] - w[0] < 3 {
                return Err(FealError::InvalidArgument(format!(
                    "polygon with {} vertices (need at least 3)",
                    w[1] - w[0]
                )));
            }
        }
        Ok(PolygonCellArray { flat_cell, indptr })
    }

    pub fn num_polygons(&self) -> usize {
        self.indptr.len() - 1
    }

    pub fn polygon(&self, p: usize) -> &[usize] {
        &self.flat_cell[self.indptr[p]..self.indptr[p + 1]]
    }

    pub fn flat_cell(&self) -> &[usize] {
        &self.flat_cell
    }

    pub fn indptr(&self) -> &[usize] {
        &self.indptr
    }

    /// Unsigned polygon areas against planar node coordinates.
    pub fn measures(&self, node: &Tensor<f64>) -> Result<Vec<f64>> {
        assert_eq!(node.shape()[1], 2, "polygon measures need planar nodes");
        let nn = node.shape()[0];
        if let Some(pos) = self.flat_cell.iter().position(|&v| v >= nn) {
            return Err(FealError::IndexOutOfRange {
                position: pos,
                index: self.flat_cell[pos],
                len: nn,
            });
        }
        Ok((0..self.num_polygons())
            .map(|p| shoelace(self.polygon(p), node).abs())
            .collect())
    }
}
