use std::collections::BTreeMap;

use crate::fp::PrimeField;

/// Sparse row: sorted by column, no zero values, no repeated columns.
pub type SparseRow = Vec<(u32, u32)>;

/// Sparse matrix over F_p stored by rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMat {
    nrows: usize,
    ncols: usize,
    rows: Vec<SparseRow>,
}

impl SparseMat {
    pub fn zero(nrows: usize, ncols: usize) -> Self {
        SparseMat {
            nrows,
            ncols,
            rows: vec![Vec::new(); nrows],
        }
    }

    pub fn identity(n: usize) -> Self {
        SparseMat {
            nrows: n,
            ncols: n,
            rows: (0..n).map(|i| vec![(i as u32, 1)]).collect(),
        }
    }

    /// Build from (row, col, value) triplets; repeated positions are summed
    /// and zero sums dropped.
    pub fn from_triplets(
        field: &PrimeField,
        nrows: usize,
        ncols: usize,
        entries: impl IntoIterator<Item = (usize, usize, u32)>,
    ) -> Self {
        let mut acc: Vec<BTreeMap<u32, u32>> = vec![BTreeMap::new(); nrows];
        for (r, c, v) in entries {
            assert!(r < nrows && c < ncols, "entry ({r},{c}) out of bounds");
            let slot = acc[r].entry(c as u32).or_insert(0);
            *slot = field.add(*slot, field.from_u64(v as u64));
        }
        let rows = acc
            .into_iter()
            .map(|m| m.into_iter().filter(|&(_, v)| v != 0).collect())
            .collect();
        SparseMat { nrows, ncols, rows }
    }

    /// Build from rows that are already normalized.
    pub fn from_rows(ncols: usize, rows: Vec<SparseRow>) -> Self {
        debug_assert!(rows.iter().all(|r| {
            r.windows(2).all(|w| w[0].0 < w[1].0)
                && r.iter().all(|&(c, v)| v != 0 && (c as usize) < ncols)
        }));
        SparseMat {
            nrows: rows.len(),
            ncols,
            rows,
        }
    }

    pub fn from_dense(field: &PrimeField, dense: &[Vec<u32>], ncols: usize) -> Self {
        let rows = dense
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter_map(|(c, &v)| {
                        let v = v % field.p();
                        (v != 0).then_some((c as u32, v))
                    })
                    .collect()
            })
            .collect();
        SparseMat {
            nrows: dense.len(),
            ncols,
            rows,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, i: usize) -> &[(u32, u32)] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[SparseRow] {
        &self.rows
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }

    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.rows[r]
            .binary_search_by_key(&(c as u32), |&(col, _)| col)
            .map(|i| self.rows[r][i].1)
            .unwrap_or(0)
    }

    pub fn transpose(&self) -> SparseMat {
        let mut rows: Vec<SparseRow> = vec![Vec::new(); self.ncols];
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                rows[c as usize].push((r as u32, v));
            }
        }
        SparseMat {
            nrows: self.ncols,
            ncols: self.nrows,
            rows,
        }
    }

    /// M v for a dense column vector.
    pub fn mul_vec(&self, field: &PrimeField, v: &[u32]) -> Vec<u32> {
        assert_eq!(v.len(), self.ncols);
        let p = field.p() as u64;
        // products below (p-1)^2 can be summed `batch` at a time in a u64
        let batch = (u64::MAX / ((p - 1) * (p - 1))).clamp(1, 1 << 20) as usize - 1;
        self.rows
            .iter()
            .map(|row| {
                let mut s = 0u64;
                for chunk in row.chunks(batch.max(1)) {
                    for &(c, x) in chunk {
                        s += x as u64 * v[c as usize] as u64;
                    }
                    s %= p;
                }
                s as u32
            })
            .collect()
    }

    /// v M for a dense row vector.
    pub fn vec_mul(&self, field: &PrimeField, v: &[u32]) -> Vec<u32> {
        assert_eq!(v.len(), self.nrows);
        let mut out = vec![0u32; self.ncols];
        for (r, row) in self.rows.iter().enumerate() {
            let a = v[r];
            if a == 0 {
                continue;
            }
            for &(c, x) in row {
                out[c as usize] = field.add(out[c as usize], field.mul(a, x));
            }
        }
        out
    }

    pub fn mul(&self, field: &PrimeField, other: &SparseMat) -> SparseMat {
        assert_eq!(self.ncols, other.nrows);
        let mut acc = vec![0u32; other.ncols];
        let mut touched: Vec<u32> = Vec::new();
        let rows = self
            .rows
            .iter()
            .map(|row| {
                for &(k, a) in row {
                    for &(c, b) in &other.rows[k as usize] {
                        if acc[c as usize] == 0 {
                            touched.push(c);
                        }
                        let v = field.add(acc[c as usize], field.mul(a, b));
                        // keep a marker so a cancelled entry is not pushed twice
                        acc[c as usize] = if v == 0 { field.p() } else { v };
                    }
                }
                touched.sort_unstable();
                let out: SparseRow = touched
                    .iter()
                    .filter_map(|&c| {
                        let v = acc[c as usize] % field.p();
                        acc[c as usize] = 0;
                        (v != 0).then_some((c, v))
                    })
                    .collect();
                touched.clear();
                out
            })
            .collect();
        SparseMat {
            nrows: self.nrows,
            ncols: other.ncols,
            rows,
        }
    }

    /// self + c * other
    pub fn add_scaled(&self, field: &PrimeField, other: &SparseMat, c: u32) -> SparseMat {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| axpy_sparse(field, a, b, c))
            .collect();
        SparseMat {
            nrows: self.nrows,
            ncols: self.ncols,
            rows,
        }
    }

    /// self - c * I (square matrices)
    pub fn sub_scalar(&self, field: &PrimeField, c: u32) -> SparseMat {
        assert_eq!(self.nrows, self.ncols);
        self.add_scaled(field, &SparseMat::identity(self.nrows), field.neg(c))
    }

    pub fn scale(&self, field: &PrimeField, c: u32) -> SparseMat {
        let c = c % field.p();
        if c == 0 {
            return SparseMat::zero(self.nrows, self.ncols);
        }
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().map(|&(col, v)| (col, field.mul(v, c))).collect())
            .collect();
        SparseMat {
            nrows: self.nrows,
            ncols: self.ncols,
            rows,
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<u32>> {
        self.rows
            .iter()
            .map(|row| {
                let mut d = vec![0u32; self.ncols];
                for &(c, v) in row {
                    d[c as usize] = v;
                }
                d
            })
            .collect()
    }

    /// Stack the rows of `others` below `self`.
    pub fn vstack(&self, others: &[&SparseMat]) -> SparseMat {
        let mut rows = self.rows.clone();
        for o in others {
            assert_eq!(o.ncols, self.ncols);
            rows.extend(o.rows.iter().cloned());
        }
        SparseMat {
            nrows: rows.len(),
            ncols: self.ncols,
            rows,
        }
    }
}

/// a + c * b for sparse rows.
pub fn axpy_sparse(field: &PrimeField, a: &[(u32, u32)], b: &[(u32, u32)], c: u32) -> SparseRow {
    if c == 0 {
        return a.to_vec();
    }
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let ca = a.get(i).map(|e| e.0).unwrap_or(u32::MAX);
        let cb = b.get(j).map(|e| e.0).unwrap_or(u32::MAX);
        if ca < cb {
            out.push(a[i]);
            i += 1;
        } else if cb < ca {
            out.push((cb, field.mul(c, b[j].1)));
            j += 1;
        } else {
            let v = field.add(a[i].1, field.mul(c, b[j].1));
            if v != 0 {
                out.push((ca, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}
