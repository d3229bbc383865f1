//! Swappable execution backend for the engine's dense-tensor kernels.
//!
//! Every module in the crate programs against the closed operation set below
//! (row sorting, row deduplication, scattered accumulation, and the handful of
//! cell/quadrature contractions the integrators need) instead of calling into
//! a general array library. Two implementations exist: a serial reference and
//! a rayon data-parallel one. With deterministic reduction enabled (the
//! default for the parallel backend) both produce bitwise-identical results;
//! without it, parallel accumulation order is unspecified and results agree
//! with the serial backend to 1e-12 relative tolerance.

use rayon::prelude::*;
use std::sync::Mutex;

use crate::error::{FealError, Result};
use crate::tensor::Tensor;

/// Execution strategy for the engine's kernels.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Backend {
    /// Single-threaded reference implementation.
    #[default]
    Serial,
    /// Rayon data-parallel implementation. `deterministic` selects fixed-order
    /// accumulation so that results match the serial backend bit for bit.
    Parallel { deterministic: bool },
}

/// Result of [`Backend::unique_rows`].
#[derive(Clone, Debug, PartialEq)]
pub struct UniqueRows {
    /// Unique rows in lexicographic order, shape `[U, K]`.
    pub rows: Tensor<usize>,
    /// Smallest input-row index equal to each unique row.
    pub first_index: Vec<usize>,
    /// Largest input-row index equal to each unique row.
    pub last_index: Vec<usize>,
    /// `input[i] == unique[inverse[i]]` for every input row.
    pub inverse: Vec<usize>,
}

/// Contraction patterns the integrators are allowed to request.
///
/// `w` always carries the per-cell, per-point integration weight `[NC, NQ]`.
pub enum Contraction<'a> {
    /// `out[c,i,j] = sum_q w[c,q] * sum_k a[c,q,i,k] * b[c,q,j,k]`
    Gramian {
        w: &'a Tensor<f64>,
        a: &'a Tensor<f64>,
        b: &'a Tensor<f64>,
    },
    /// `out[c,i,j] = sum_q w[c,q] * a[q,i] * b[q,j]` (cell-independent bases)
    GramianShared {
        w: &'a Tensor<f64>,
        a: &'a Tensor<f64>,
        b: &'a Tensor<f64>,
    },
    /// `out[c,i] = sum_q w[c,q] * a[c,q,i]`
    VectorForm {
        w: &'a Tensor<f64>,
        a: &'a Tensor<f64>,
    },
    /// `out[c,i] = sum_q w[c,q] * a[q,i]`
    VectorShared {
        w: &'a Tensor<f64>,
        a: &'a Tensor<f64>,
    },
    /// `out[i,j] = a[i] * b[j]`
    Outer { a: &'a [f64], b: &'a [f64] },
}

impl Backend {
    /// Parallel backend with deterministic reduction on.
    pub fn parallel() -> Self {
        Backend::Parallel {
            deterministic: true,
        }
    }

    /// Parse a backend name as used by the CLI and `FEALCORE_BACKEND`.
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "serial" => Ok(Backend::Serial),
            "parallel" => Ok(Backend::parallel()),
            other => Err(FealError::InvalidArgument(format!(
                "unknown backend `{other}` (expected `serial` or `parallel`)"
            ))),
        }
    }

    pub fn is_parallel(&self) -> bool {
        matches!(self, Backend::Parallel { .. })
    }

    /// Permutation that sorts the rows of `keys` lexicographically (column 0
    /// most significant). The sort is stable: equal rows keep input order.
    pub fn lexsort_rows(&self, keys: &Tensor<usize>) -> Vec<usize> {
        assert_eq!(keys.ndim(), 2, "lexsort_rows expects a matrix");
        let k = keys.shape()[1];
        let n = keys.shape()[0];
        let data = keys.data();
        let mut perm: Vec<usize> = (0..n).collect();
        let cmp = |&a: &usize, &b: &usize| data[a * k..a * k + k].cmp(&data[b * k..b * k + k]);
        match self {
            Backend::Serial => perm.sort_by(cmp),
            Backend::Parallel { .. } => perm.par_sort_by(cmp),
        }
        perm
    }

    /// Sort and deduplicate the rows of a matrix, reporting for every unique
    /// row its first and last occurrence in the input and the inverse map.
    pub fn unique_rows(&self, rows: &Tensor<usize>) -> UniqueRows {
        assert_eq!(rows.ndim(), 2, "unique_rows expects a matrix");
        let (n, k) = (rows.shape()[0], rows.shape()[1]);
        let data = rows.data();
        let perm = self.lexsort_rows(rows);

        let mut unique = Vec::new();
        let mut first = Vec::new();
        let mut last = Vec::new();
        let mut inverse = vec![0usize; n];
        for &i in &perm {
            let row = &data[i * k..i * k + k];
            let is_new = first.is_empty() || &unique[unique.len() - k..] != row;
            if is_new {
                unique.extend_from_slice(row);
                first.push(i);
                last.push(i);
            } else {
                // stable sort: i is the largest index seen so far in the group
                *last.last_mut().unwrap() = i;
            }
            inverse[i] = first.len() - 1;
        }
        UniqueRows {
            rows: Tensor::from_vec(unique, &[first.len(), k]),
            first_index: first,
            last_index: last,
            inverse,
        }
    }

    /// `target[idx[m]] += values[m]` for all m, in place.
    ///
    /// Serial and deterministic-parallel modes accumulate each slot in input
    /// order and agree bitwise; non-deterministic mode merges per-chunk
    /// partial sums in completion order (1e-12 relative agreement).
    pub fn scatter_add(&self, target: &mut [f64], idx: &[usize], values: &[f64]) -> Result<()> {
        assert_eq!(idx.len(), values.len(), "index/value length mismatch");
        for (pos, &i) in idx.iter().enumerate() {
            if i >= target.len() {
                return Err(FealError::IndexOutOfRange {
                    position: pos,
                    index: i,
                    len: target.len(),
                });
            }
        }
        match self {
            Backend::Serial => {
                for (&i, &v) in idx.iter().zip(values) {
                    target[i] += v;
                }
            }
            Backend::Parallel {
                deterministic: true,
            } => {
                let mut order: Vec<usize> = (0..idx.len()).collect();
                order.par_sort_by_key(|&m| idx[m]);
                // group by slot, sum each group in input order, then apply
                let updates: Vec<(usize, f64)> = split_groups(&order, |m| idx[m])
                    .par_iter()
                    .map(|group| {
                        let slot = idx[group[0]];
                        let mut acc = target[slot];
                        for &m in *group {
                            acc += values[m];
                        }
                        (slot, acc)
                    })
                    .collect();
                for (slot, acc) in updates {
                    target[slot] = acc;
                }
            }
            Backend::Parallel {
                deterministic: false,
            } => {
                let shared = Mutex::new(target);
                idx.par_chunks(4096)
                    .zip(values.par_chunks(4096))
                    .for_each(|(ic, vc)| {
                        let mut local: Vec<(usize, f64)> =
                            ic.iter().copied().zip(vc.iter().copied()).collect();
                        local.sort_by_key(|&(i, _)| i);
                        let mut t = shared.lock().unwrap();
                        for (i, v) in local {
                            t[i] += v;
                        }
                    });
            }
        }
        Ok(())
    }

    /// Evaluate one of the supported contraction patterns.
    pub fn contract(&self, c: Contraction<'_>) -> Result<Tensor<f64>> {
        match c {
            Contraction::Gramian { w, a, b } => {
                check_axis("c", w.shape()[0], a.shape()[0])?;
                check_axis("c", w.shape()[0], b.shape()[0])?;
                check_axis("q", w.shape()[1], a.shape()[1])?;
                check_axis("q", w.shape()[1], b.shape()[1])?;
                check_axis("k", a.shape()[3], b.shape()[3])?;
                let (nc, nq) = (w.shape()[0], w.shape()[1]);
                let (ni, nj, nk) = (a.shape()[2], b.shape()[2], a.shape()[3]);
                let mut out = Tensor::zeros(&[nc, ni, nj]);
                let wd = w.data();
                let ad = a.data();
                let bd = b.data();
                self.for_each_cell(out.data_mut(), ni * nj, |c, cell_out| {
                    for q in 0..nq {
                        let wq = wd[c * nq + q];
                        let abase = (c * nq + q) * ni * nk;
                        let bbase = (c * nq + q) * nj * nk;
                        for i in 0..ni {
                            let arow = &ad[abase + i * nk..abase + (i + 1) * nk];
                            for j in 0..nj {
                                let brow = &bd[bbase + j * nk..bbase + (j + 1) * nk];
                                let mut s = 0.0;
                                for k in 0..nk {
                                    s += arow[k] * brow[k];
                                }
                                cell_out[i * nj + j] += wq * s;
                            }
                        }
                    }
                });
                Ok(out)
            }
            Contraction::GramianShared { w, a, b } => {
                check_axis("q", w.shape()[1], a.shape()[0])?;
                check_axis("q", w.shape()[1], b.shape()[0])?;
                let (nc, nq) = (w.shape()[0], w.shape()[1]);
                let (ni, nj) = (a.shape()[1], b.shape()[1]);
                let mut out = Tensor::zeros(&[nc, ni, nj]);
                let wd = w.data();
                let ad = a.data();
                let bd = b.data();
                self.for_each_cell(out.data_mut(), ni * nj, |c, cell_out| {
                    for q in 0..nq {
                        let wq = wd[c * nq + q];
                        for i in 0..ni {
                            let ai = ad[q * ni + i];
                            for j in 0..nj {
                                cell_out[i * nj + j] += wq * ai * bd[q * nj + j];
                            }
                        }
                    }
                });
                Ok(out)
            }
            Contraction::VectorForm { w, a } => {
                check_axis("c", w.shape()[0], a.shape()[0])?;
                check_axis("q", w.shape()[1], a.shape()[1])?;
                let (nc, nq, ni) = (w.shape()[0], w.shape()[1], a.shape()[2]);
                let mut out = Tensor::zeros(&[nc, ni]);
                let wd = w.data();
                let ad = a.data();
                self.for_each_cell(out.data_mut(), ni, |c, cell_out| {
                    for q in 0..nq {
                        let wq = wd[c * nq + q];
                        let base = (c * nq + q) * ni;
                        for i in 0..ni {
                            cell_out[i] += wq * ad[base + i];
                        }
                    }
                });
                Ok(out)
            }
            Contraction::VectorShared { w, a } => {
                check_axis("q", w.shape()[1], a.shape()[0])?;
                let (nc, nq, ni) = (w.shape()[0], w.shape()[1], a.shape()[1]);
                let mut out = Tensor::zeros(&[nc, ni]);
                let wd = w.data();
                let ad = a.data();
                self.for_each_cell(out.data_mut(), ni, |c, cell_out| {
                    for q in 0..nq {
                        let wq = wd[c * nq + q];
                        for i in 0..ni {
                            cell_out[i] += wq * ad[q * ni + i];
                        }
                    }
                });
                Ok(out)
            }
            Contraction::Outer { a, b } => {
                let mut out = Tensor::zeros(&[a.len(), b.len()]);
                let nj = b.len();
                self.for_each_cell(out.data_mut(), nj, |i, row| {
                    for j in 0..nj {
                        row[j] = a[i] * b[j];
                    }
                });
                Ok(out)
            }
        }
    }

    /// Run `f(c, &mut out[c*stride..])` for every leading index, serially or
    /// in parallel. Each output block is written by exactly one invocation,
    /// so parallel and serial execution are bitwise identical.
    pub(crate) fn for_each_cell<F>(&self, out: &mut [f64], stride: usize, f: F)
    where
        F: Fn(usize, &mut [f64]) + Sync + Send,
    {
        if stride == 0 {
            return;
        }
        match self {
            Backend::Serial => {
                for (c, chunk) in out.chunks_mut(stride).enumerate() {
                    f(c, chunk);
                }
            }
            Backend::Parallel { .. } => {
                out.par_chunks_mut(stride)
                    .enumerate()
                    .for_each(|(c, chunk)| f(c, chunk));
            }
        }
    }
}

fn check_axis(axis: &'static str, left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(FealError::AxisMismatch { axis, left, right });
    }
    Ok(())
}

/// Split a sorted index list into maximal runs with equal `key`.
fn split_groups<F: Fn(usize) -> usize>(order: &[usize], key: F) -> Vec<&[usize]> {
    let mut groups = Vec::new();
    let mut start = 0;
    for i in 1..=order.len() {
        if i == order.len() || key(order[i]) != key(order[start]) {
            groups.push(&order[start..i]);
            start = i;
        }
    }
    groups
}
