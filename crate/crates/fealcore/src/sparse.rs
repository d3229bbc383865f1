//! COO and CSR sparse matrices with an optional leading batch axis.
//!
//! A batched matrix stores one index pattern and `[B, nnz]` values, one value
//! slice per batch member. Pattern-only matrices carry no values at all and
//! support structural operations only.
//!
//! `coalesce` sums duplicate entries in a canonical order (ascending under
//! `f64::total_cmp`, independently per batch slice), so matrices assembled
//! from the same entry multiset are bitwise identical regardless of the order
//! the entries arrived in.

use crate::backend::Backend;
use crate::error::{FealError, Result};
use crate::tensor::Tensor;

/// Coordinate-format sparse matrix.
#[derive(Clone, Debug)]
pub struct CooMatrix {
    nrows: usize,
    ncols: usize,
    rows: Vec<usize>,
    cols: Vec<usize>,
    values: Option<Tensor<f64>>,
    coalesced: bool,
}

/// Compressed-sparse-row matrix.
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    col_indices: Vec<usize>,
    values: Option<Tensor<f64>>,
}

fn check_values_shape(values: &Tensor<f64>, nnz: usize) -> Result<()> {
    let ok = match values.ndim() {
        1 => values.shape()[0] == nnz,
        2 => values.shape()[1] == nnz,
        _ => false,
    };
    if !ok {
        return Err(FealError::ShapeMismatch {
            expected: format!("[{nnz}] or [B, {nnz}]"),
            got: format!("{:?}", values.shape()),
        });
    }
    Ok(())
}

fn check_indices(rows: &[usize], cols: &[usize], nrows: usize, ncols: usize) -> Result<()> {
    assert_eq!(rows.len(), cols.len(), "row/col index length mismatch");
    for (k, &r) in rows.iter().enumerate() {
        if r >= nrows {
            return Err(FealError::IndexOutOfRange {
                position: k,
                index: r,
                len: nrows,
            });
        }
    }
    for (k, &c) in cols.iter().enumerate() {
        if c >= ncols {
            return Err(FealError::IndexOutOfRange {
                position: k,
                index: c,
                len: ncols,
            });
        }
    }
    Ok(())
}

impl CooMatrix {
    /// Valued matrix from entry lists. `values` is `[nnz]` or `[B, nnz]`.
    pub fn new(
        rows: Vec<usize>,
        cols: Vec<usize>,
        values: Tensor<f64>,
        shape: (usize, usize),
    ) -> Result<CooMatrix> {
        check_indices(&rows, &cols, shape.0, shape.1)?;
        check_values_shape(&values, rows.len())?;
        Ok(CooMatrix {
            nrows: shape.0,
            ncols: shape.1,
            rows,
            cols,
            values: Some(values),
            coalesced: false,
        })
    }

    /// Pattern-only matrix (no values, boolean semantics).
    pub fn pattern(rows: Vec<usize>, cols: Vec<usize>, shape: (usize, usize)) -> Result<CooMatrix> {
        check_indices(&rows, &cols, shape.0, shape.1)?;
        Ok(CooMatrix {
            nrows: shape.0,
            ncols: shape.1,
            rows,
            cols,
            values: None,
            coalesced: false,
        })
    }

    pub fn sparse_shape(&self) -> (usize, usize) {
        (self.nrows, self.ncols)
    }

    pub fn nnz(&self) -> usize {
        self.rows.len()
    }

    pub fn row_indices(&self) -> &[usize] {
        &self.rows
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.cols
    }

    pub fn values(&self) -> Option<&Tensor<f64>> {
        self.values.as_ref()
    }

    pub fn is_pattern_only(&self) -> bool {
        self.values.is_none()
    }

    pub fn is_coalesced(&self) -> bool {
        self.coalesced
    }

    /// Batch size, if the values carry a leading batch axis.
    pub fn batch(&self) -> Option<usize> {
        self.values
            .as_ref()
            .and_then(|v| (v.ndim() == 2).then(|| v.shape()[0]))
    }

    /// Entry-list concatenation; the result is uncoalesced.
    pub fn coo_add(&self, other: &CooMatrix) -> Result<CooMatrix> {
        if self.sparse_shape() != other.sparse_shape() {
            return Err(FealError::ShapeMismatch {
                expected: format!("{:?}", self.sparse_shape()),
                got: format!("{:?}", other.sparse_shape()),
            });
        }
        let values = match (&self.values, &other.values) {
            (None, None) => None,
            (Some(a), Some(b)) => {
                if self.batch() != other.batch() {
                    return Err(FealError::BatchMismatch {
                        left: self.batch(),
                        right: other.batch(),
                    });
                }
                let nnz = self.nnz() + other.nnz();
                match self.batch() {
                    None => {
                        let mut data = Vec::with_capacity(nnz);
                        data.extend_from_slice(a.data());
                        data.extend_from_slice(b.data());
                        Some(Tensor::from_vec(data, &[nnz]))
                    }
                    Some(bsz) => {
                        let mut data = Vec::with_capacity(bsz * nnz);
                        for s in 0..bsz {
                            data.extend_from_slice(&a.data()[s * self.nnz()..(s + 1) * self.nnz()]);
                            data.extend_from_slice(
                                &b.data()[s * other.nnz()..(s + 1) * other.nnz()],
                            );
                        }
                        Some(Tensor::from_vec(data, &[bsz, nnz]))
                    }
                }
            }
            _ => {
                return Err(FealError::PatternValueMix { op: "coo_add" });
            }
        };
        let mut rows = self.rows.clone();
        rows.extend_from_slice(&other.rows);
        let mut cols = self.cols.clone();
        cols.extend_from_slice(&other.cols);
        Ok(CooMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            rows,
            cols,
            values,
            coalesced: false,
        })
    }

    /// Sort entries by (row, col) and sum duplicates. Duplicate values are
    /// accumulated in a canonical order, so the output is a pure function of
    /// the entry multiset.
    pub fn coalesce(&self, backend: Backend) -> CooMatrix {
        let nnz = self.nnz();
        if nnz == 0 {
            let mut out = self.clone();
            out.coalesced = true;
            return out;
        }
        let mut keys = Vec::with_capacity(nnz * 2);
        for k in 0..nnz {
            keys.push(self.rows[k]);
            keys.push(self.cols[k]);
        }
        let keys = Tensor::from_vec(keys, &[nnz, 2]);
        let perm = backend.lexsort_rows(&keys);

        let mut rows = Vec::new();
        let mut cols = Vec::new();
        let bsz = self.batch();
        let old_vals = self.values.as_ref().map(|v| v.data());
        // per output entry, per batch slice
        let mut vals: Vec<f64> = Vec::new();
        let mut group: Vec<usize> = Vec::new();
        let flush = |group: &mut Vec<usize>,
                     rows: &mut Vec<usize>,
                     cols: &mut Vec<usize>,
                     vals: &mut Vec<f64>| {
            let lead = group[0];
            rows.push(self.rows[lead]);
            cols.push(self.cols[lead]);
            if let Some(data) = old_vals {
                match bsz {
                    None => {
                        group.sort_by(|&a, &b| data[a].total_cmp(&data[b]));
                        let mut s = 0.0;
                        for &g in group.iter() {
                            s += data[g];
                        }
                        vals.push(s);
                    }
                    Some(b) => {
                        // each slice sums its own values in ascending order,
                        // so a batched slice matches the unbatched result
                        // bitwise
                        for s in 0..b {
                            let mut slice: Vec<f64> =
                                group.iter().map(|&g| data[s * nnz + g]).collect();
                            slice.sort_by(|x, y| x.total_cmp(y));
                            let mut acc = 0.0;
                            for v in slice {
                                acc += v;
                            }
                            vals.push(acc);
                        }
                    }
                }
            }
            group.clear();
        };
        for &k in &perm {
            if let Some(&lead) = group.first() {
                if self.rows[lead] != self.rows[k] || self.cols[lead] != self.cols[k] {
                    flush(&mut group, &mut rows, &mut cols, &mut vals);
                }
            }
            group.push(k);
        }
        flush(&mut group, &mut rows, &mut cols, &mut vals);

        let out_nnz = rows.len();
        let values = old_vals.map(|_| match bsz {
            None => Tensor::from_vec(vals, &[out_nnz]),
            Some(b) => {
                // flush pushed slice-major per entry; transpose to [B, nnz]
                let mut data = vec![0.0; b * out_nnz];
                for e in 0..out_nnz {
                    for s in 0..b {
                        data[s * out_nnz + e] = vals[e * b + s];
                    }
                }
                Tensor::from_vec(data, &[b, out_nnz])
            }
        });
        CooMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            rows,
            cols,
            values,
            coalesced: true,
        }
    }

    /// Convert to CSR, coalescing first when needed.
    pub fn to_csr(&self, backend: Backend) -> CsrMatrix {
        let coalesced;
        let src = if self.coalesced {
            self
        } else {
            coalesced = self.coalesce(backend);
            &coalesced
        };
        let mut indptr = vec![0usize; src.nrows + 1];
        for &r in &src.rows {
            indptr[r + 1] += 1;
        }
        for i in 0..src.nrows {
            indptr[i + 1] += indptr[i];
        }
        CsrMatrix {
            nrows: src.nrows,
            ncols: src.ncols,
            indptr,
            col_indices: src.cols.clone(),
            values: src.values.clone(),
        }
    }

    /// Serial matrix-vector product; `x` is `[ncols]` or `[B, ncols]`.
    pub fn spmv(&self, x: &Tensor<f64>) -> Result<Tensor<f64>> {
        let values = self
            .values
            .as_ref()
            .ok_or(FealError::PatternOnly { op: "spmv" })?;
        spmv_entries(
            &self.rows,
            &self.cols,
            values,
            x,
            self.nrows,
            self.ncols,
            Backend::Serial,
            None,
        )
    }

    /// Diagonal per batch slice; requires a coalesced, valued matrix.
    pub fn extract_diagonal(&self) -> Result<Tensor<f64>> {
        if !self.coalesced {
            return Err(FealError::InvalidArgument(
                "extract_diagonal requires a coalesced matrix".into(),
            ));
        }
        let values = self.values.as_ref().ok_or(FealError::PatternOnly {
            op: "extract_diagonal",
        })?;
        let n = self.nrows.min(self.ncols);
        let nnz = self.nnz();
        match self.batch() {
            None => {
                let mut diag = vec![0.0; n];
                for k in 0..nnz {
                    if self.rows[k] == self.cols[k] {
                        diag[self.rows[k]] = values.data()[k];
                    }
                }
                Ok(Tensor::from_vec(diag, &[n]))
            }
            Some(b) => {
                let mut diag = vec![0.0; b * n];
                for k in 0..nnz {
                    if self.rows[k] == self.cols[k] {
                        for s in 0..b {
                            diag[s * n + self.rows[k]] = values.data()[s * nnz + k];
                        }
                    }
                }
                Ok(Tensor::from_vec(diag, &[b, n]))
            }
        }
    }

    /// Zero the masked rows and columns, then put 1 on the masked diagonal.
    pub fn set_rows_cols_identity(&self, mask: &[bool], backend: Backend) -> Result<CooMatrix> {
        if self.nrows != self.ncols {
            return Err(FealError::NotSquare {
                nrows: self.nrows,
                ncols: self.ncols,
            });
        }
        if mask.len() != self.nrows {
            return Err(FealError::ShapeMismatch {
                expected: format!("mask of length {}", self.nrows),
                got: format!("{}", mask.len()),
            });
        }
        let values = self.values.as_ref().ok_or(FealError::PatternOnly {
            op: "set_rows_cols_identity",
        })?;
        let nnz = self.nnz();
        let keep: Vec<usize> = (0..nnz)
            .filter(|&k| !mask[self.rows[k]] && !mask[self.cols[k]])
            .collect();
        let masked: Vec<usize> = (0..self.nrows).filter(|&i| mask[i]).collect();
        let out_nnz = keep.len() + masked.len();
        let mut rows = Vec::with_capacity(out_nnz);
        let mut cols = Vec::with_capacity(out_nnz);
        for &k in &keep {
            rows.push(self.rows[k]);
            cols.push(self.cols[k]);
        }
        for &i in &masked {
            rows.push(i);
            cols.push(i);
        }
        let values = match self.batch() {
            None => {
                let mut data = Vec::with_capacity(out_nnz);
                for &k in &keep {
                    data.push(values.data()[k]);
                }
                data.resize(out_nnz, 1.0);
                Tensor::from_vec(data, &[out_nnz])
            }
            Some(b) => {
                let mut data = Vec::with_capacity(b * out_nnz);
                for s in 0..b {
                    for &k in &keep {
                        data.push(values.data()[s * nnz + k]);
                    }
                    data.resize((s + 1) * out_nnz, 1.0);
                }
                Tensor::from_vec(data, &[b, out_nnz])
            }
        };
        let out = CooMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            rows,
            cols,
            values: Some(values),
            coalesced: false,
        };
        Ok(out.coalesce(backend))
    }

    /// Dense equivalent `[nrows, ncols]` (or `[B, nrows, ncols]`), for
    /// oracles and small-system solvers.
    pub fn to_dense(&self) -> Result<Tensor<f64>> {
        let values = self
            .values
            .as_ref()
            .ok_or(FealError::PatternOnly { op: "to_dense" })?;
        let (m, n) = (self.nrows, self.ncols);
        let nnz = self.nnz();
        match self.batch() {
            None => {
                let mut data = vec![0.0; m * n];
                for k in 0..nnz {
                    data[self.rows[k] * n + self.cols[k]] += values.data()[k];
                }
                Ok(Tensor::from_vec(data, &[m, n]))
            }
            Some(b) => {
                let mut data = vec![0.0; b * m * n];
                for s in 0..b {
                    for k in 0..nnz {
                        data[s * m * n + self.rows[k] * n + self.cols[k]] +=
                            values.data()[s * nnz + k];
                    }
                }
                Ok(Tensor::from_vec(data, &[b, m, n]))
            }
        }
    }
}

impl CsrMatrix {
    pub fn sparse_shape(&self) -> (usize, usize) {
        (self.nrows, self.ncols)
    }

    pub fn nnz(&self) -> usize {
        self.col_indices.len()
    }

    pub fn indptr(&self) -> &[usize] {
        &self.indptr
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> Option<&Tensor<f64>> {
        self.values.as_ref()
    }

    pub fn batch(&self) -> Option<usize> {
        self.values
            .as_ref()
            .and_then(|v| (v.ndim() == 2).then(|| v.shape()[0]))
    }

    /// Back to coordinate format; the result is coalesced by construction.
    pub fn to_coo(&self) -> CooMatrix {
        let mut rows = Vec::with_capacity(self.nnz());
        for r in 0..self.nrows {
            for _ in self.indptr[r]..self.indptr[r + 1] {
                rows.push(r);
            }
        }
        CooMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            rows,
            cols: self.col_indices.clone(),
            values: self.values.clone(),
            coalesced: true,
        }
    }

    /// Matrix-vector product, parallel over rows under a parallel backend.
    /// `x` is `[ncols]` or `[B, ncols]`; a batched side broadcasts against an
    /// unbatched one.
    pub fn spmv(&self, x: &Tensor<f64>, backend: Backend) -> Result<Tensor<f64>> {
        let values = self
            .values
            .as_ref()
            .ok_or(FealError::PatternOnly { op: "spmv" })?;
        spmv_entries(
            &self.col_indices,
            &self.col_indices,
            values,
            x,
            self.nrows,
            self.ncols,
            backend,
            Some(&self.indptr),
        )
    }

    /// Diagonal per batch slice; missing entries read as zero.
    pub fn extract_diagonal(&self) -> Result<Tensor<f64>> {
        let values = self.values.as_ref().ok_or(FealError::PatternOnly {
            op: "extract_diagonal",
        })?;
        let n = self.nrows.min(self.ncols);
        let nnz = self.nnz();
        let grab = |out: &mut [f64], offset: usize| {
            for r in 0..n {
                for k in self.indptr[r]..self.indptr[r + 1] {
                    if self.col_indices[k] == r {
                        out[r] = values.data()[offset + k];
                    }
                }
            }
        };
        match self.batch() {
            None => {
                let mut diag = vec![0.0; n];
                grab(&mut diag, 0);
                Ok(Tensor::from_vec(diag, &[n]))
            }
            Some(b) => {
                let mut diag = vec![0.0; b * n];
                for s in 0..b {
                    let (lo, hi) = (s * n, (s + 1) * n);
                    grab(&mut diag[lo..hi], s * nnz);
                }
                Ok(Tensor::from_vec(diag, &[b, n]))
            }
        }
    }
}

/// Shared spmv kernel. With `indptr` present the entry layout is CSR (rows
/// implicit); otherwise `rows` lists every entry's row and accumulation runs
/// serially in entry order.
#[allow(clippy::too_many_arguments)]
fn spmv_entries(
    rows: &[usize],
    cols: &[usize],
    values: &Tensor<f64>,
    x: &Tensor<f64>,
    nrows: usize,
    ncols: usize,
    backend: Backend,
    indptr: Option<&[usize]>,
) -> Result<Tensor<f64>> {
    let mat_batch = (values.ndim() == 2).then(|| values.shape()[0]);
    let x_batch = match x.ndim() {
        1 => None,
        2 => Some(x.shape()[0]),
        _ => {
            return Err(FealError::ShapeMismatch {
                expected: "[ncols] or [B, ncols]".into(),
                got: format!("{:?}", x.shape()),
            })
        }
    };
    let x_cols = *x.shape().last().unwrap();
    if x_cols != ncols {
        return Err(FealError::AxisMismatch {
            axis: "ncols",
            left: ncols,
            right: x_cols,
        });
    }
    let out_batch = match (mat_batch, x_batch) {
        (None, None) => None,
        (Some(b), None) | (None, Some(b)) => Some(b),
        (Some(a), Some(b)) => {
            if a != b {
                return Err(FealError::BatchMismatch {
                    left: Some(a),
                    right: Some(b),
                });
            }
            Some(a)
        }
    };
    let nnz = cols.len();
    let slices = out_batch.unwrap_or(1);
    let mut out = vec![0.0; slices * nrows];
    for s in 0..slices {
        let voff = match mat_batch {
            Some(_) => s * nnz,
            None => 0,
        };
        let xoff = match x_batch {
            Some(_) => s * ncols,
            None => 0,
        };
        let vdata = &values.data()[voff..voff + nnz];
        let xdata = &x.data()[xoff..xoff + ncols];
        let ydata = &mut out[s * nrows..(s + 1) * nrows];
        match indptr {
            Some(indptr) => {
                let row_kernel = |r: usize, y: &mut f64| {
                    let mut acc = 0.0;
                    for k in indptr[r]..indptr[r + 1] {
                        acc += vdata[k] * xdata[cols[k]];
                    }
                    *y = acc;
                };
                match backend {
                    Backend::Serial => {
                        for (r, y) in ydata.iter_mut().enumerate() {
                            row_kernel(r, y);
                        }
                    }
                    Backend::Parallel { .. } => {
                        use rayon::prelude::*;
                        ydata
                            .par_iter_mut()
                            .enumerate()
                            .for_each(|(r, y)| row_kernel(r, y));
                    }
                }
            }
            None => {
                for k in 0..nnz {
                    ydata[rows[k]] += vdata[k] * xdata[cols[k]];
                }
            }
        }
    }
    Ok(match out_batch {
        None => Tensor::from_vec(out, &[nrows]),
        Some(b) => Tensor::from_vec(out, &[b, nrows]),
    })
}
