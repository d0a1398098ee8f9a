//! Linear algebra over F_p: sparse matrices, dense Gauss-Jordan and right
//! kernels via structured (sparse, then dense) elimination.

mod dense;
mod sparse;

use std::cmp::Reverse;
use std::collections::BinaryHeap;

pub use dense::{dense_kernel, rref};
pub use sparse::{axpy_sparse, SparseMat, SparseRow};

use crate::fp::PrimeField;

/// Pivots whose Markowitz cost exceeds this end the sparse phase.
const MARKOWITZ_LIMIT: u64 = 4096;

struct Pivot {
    row: SparseRow,
    col: u32,
}

/// Right kernel of `m` (vectors v with m v = 0), in no particular normal form.
/// Cheaper than [`kernel_basis`] when the kernel is large.
pub fn kernel_raw(field: &PrimeField, m: &SparseMat) -> Vec<Vec<u32>> {
    kernel_with_free(field, m).0
}

/// Right kernel together with its free columns: vector i is 1 at `free[i]`
/// and 0 at every other free column.
pub fn kernel_with_free(field: &PrimeField, m: &SparseMat) -> (Vec<Vec<u32>>, Vec<usize>) {
    let ncols = m.ncols();
    let (pivots, rest) = sparse_phase(field, m.rows().to_vec(), ncols);

    let mut col_done = vec![false; ncols];
    pivots
        .iter()
        .for_each(|pv| col_done[pv.col as usize] = true);
    let remaining: Vec<usize> = (0..ncols).filter(|&c| !col_done[c]).collect();
    let mut local = vec![usize::MAX; ncols];
    remaining
        .iter()
        .enumerate()
        .for_each(|(i, &c)| local[c] = i);

    let mut dense: Vec<Vec<u32>> = rest
        .iter()
        .map(|r| {
            let mut d = vec![0u32; remaining.len()];
            for &(c, v) in r {
                d[local[c as usize]] = v;
            }
            d
        })
        .collect();
    let dpiv = rref(field, &mut dense, remaining.len());
    let mut is_dpiv = vec![false; remaining.len()];
    dpiv.iter().for_each(|&c| is_dpiv[c] = true);

    let free: Vec<usize> = (0..remaining.len()).filter(|&c| !is_dpiv[c]).collect();
    let vecs = free
        .iter()
        .map(|&free| {
            let mut v = vec![0u32; ncols];
            v[remaining[free]] = 1;
            for (r, &pc) in dpiv.iter().enumerate() {
                v[remaining[pc]] = field.neg(dense[r][free]);
            }
            for pv in pivots.iter().rev() {
                let mut s = 0u32;
                let mut lead = 0u32;
                for &(c, x) in &pv.row {
                    if c == pv.col {
                        lead = x;
                    } else {
                        s = field.add(s, field.mul(x, v[c as usize]));
                    }
                }
                v[pv.col as usize] = field.neg(field.mul(s, field.inv(lead)));
            }
            v
        })
        .collect();
    (vecs, free.into_iter().map(|c| remaining[c]).collect())
}

/// Right kernel of `m` as a basis in reduced row echelon form: the pivot of
/// each vector is its leftmost nonzero entry, equal to 1, and pivots are
/// strictly increasing. The result depends only on the kernel itself.
pub fn kernel_basis(field: &PrimeField, m: &SparseMat) -> Vec<Vec<u32>> {
    let mut k = kernel_raw(field, m);
    let ncols = m.ncols();
    let piv = rref(field, &mut k, ncols);
    k.truncate(piv.len());
    k
}

/// Rank of a sparse matrix.
pub fn rank(field: &PrimeField, m: &SparseMat) -> usize {
    m.ncols() - kernel_raw(field, m).len()
}

/// Sparse elimination with Markowitz pivoting. Returns the eliminated pivot
/// rows (in elimination order) and the active rows left for the dense phase.
fn sparse_phase(
    field: &PrimeField,
    mut rows: Vec<SparseRow>,
    ncols: usize,
) -> (Vec<Pivot>, Vec<SparseRow>) {
    let nrows = rows.len();
    let mut active = vec![true; nrows];
    let mut col_count = vec![0u32; ncols];
    let mut col_rows: Vec<Vec<u32>> = vec![Vec::new(); ncols];
    for (i, r) in rows.iter().enumerate() {
        for &(c, _) in r {
            col_count[c as usize] += 1;
            col_rows[c as usize].push(i as u32);
        }
    }
    let mut heap: BinaryHeap<Reverse<(u32, u32)>> = (0..nrows)
        .map(|i| Reverse((rows[i].len() as u32, i as u32)))
        .collect();
    let mut pivots = Vec::new();

    while let Some(Reverse((w, r))) = heap.pop() {
        let r = r as usize;
        if !active[r] || rows[r].len() as u32 != w {
            continue;
        }
        if w == 0 {
            active[r] = false;
            continue;
        }
        let (col, cnt) = rows[r]
            .iter()
            .map(|&(c, _)| (c, col_count[c as usize]))
            .min_by_key(|&(c, n)| (n, c))
            .unwrap();
        let cost = (w as u64 - 1) * (cnt as u64 - 1);
        if cost > MARKOWITZ_LIMIT {
            heap.push(Reverse((w, r as u32)));
            break;
        }
        active[r] = false;
        let prow = std::mem::take(&mut rows[r]);
        for &(c, _) in &prow {
            col_count[c as usize] -= 1;
        }
        let lead = prow.iter().find(|e| e.0 == col).unwrap().1;
        let lead_inv = field.inv(lead);
        let occ = std::mem::take(&mut col_rows[col as usize]);
        for &i in &occ {
            let i = i as usize;
            if !active[i] {
                continue;
            }
            let Ok(pos) = rows[i].binary_search_by_key(&col, |e| e.0) else {
                continue;
            };
            let f = field.neg(field.mul(rows[i][pos].1, lead_inv));
            let old = std::mem::take(&mut rows[i]);
            let new = axpy_sparse(field, &old, &prow, f);
            // update counts and occurrence lists by merging old and new
            let (mut a, mut b) = (0, 0);
            while a < old.len() || b < new.len() {
                let ca = old.get(a).map(|e| e.0).unwrap_or(u32::MAX);
                let cb = new.get(b).map(|e| e.0).unwrap_or(u32::MAX);
                if ca == cb {
                    a += 1;
                    b += 1;
                } else if ca < cb {
                    col_count[ca as usize] -= 1;
                    a += 1;
                } else {
                    col_count[cb as usize] += 1;
                    col_rows[cb as usize].push(i as u32);
                    b += 1;
                }
            }
            rows[i] = new;
            heap.push(Reverse((rows[i].len() as u32, i as u32)));
        }
        pivots.push(Pivot { row: prow, col });
    }

    let rest = rows
        .into_iter()
        .zip(active)
        .filter(|(r, a)| *a && !r.is_empty())
        .map(|(r, _)| r)
        .collect();
    (pivots, rest)
}

/// Quotient of F_p^ncols by the span of `relations`. Returns the columns
/// kept as quotient basis (increasing) and, for every column, its image in
/// the quotient as a sparse row over basis positions.
pub fn relation_quotient(
    field: &PrimeField,
    relations: Vec<SparseRow>,
    ncols: usize,
) -> (Vec<usize>, Vec<SparseRow>) {
    let (pivots, rest) = sparse_phase(field, relations, ncols);
    let mut col_done = vec![false; ncols];
    pivots
        .iter()
        .for_each(|pv| col_done[pv.col as usize] = true);
    let remaining: Vec<usize> = (0..ncols).filter(|&c| !col_done[c]).collect();
    let mut local = vec![usize::MAX; ncols];
    remaining
        .iter()
        .enumerate()
        .for_each(|(i, &c)| local[c] = i);
    let mut dense: Vec<Vec<u32>> = rest
        .iter()
        .map(|r| {
            let mut d = vec![0u32; remaining.len()];
            for &(c, v) in r {
                d[local[c as usize]] = v;
            }
            d
        })
        .collect();
    let dpiv = rref(field, &mut dense, remaining.len());
    let mut is_dpiv = vec![false; remaining.len()];
    dpiv.iter().for_each(|&c| is_dpiv[c] = true);
    let free: Vec<usize> = (0..remaining.len())
        .filter(|&c| !is_dpiv[c])
        .map(|c| remaining[c])
        .collect();
    let mut basis_pos = vec![u32::MAX; ncols];
    free.iter()
        .enumerate()
        .for_each(|(i, &c)| basis_pos[c] = i as u32);

    let mut expr: Vec<SparseRow> = vec![Vec::new(); ncols];
    for &c in &free {
        expr[c] = vec![(basis_pos[c], 1)];
    }
    for (r, &pc) in dpiv.iter().enumerate() {
        expr[remaining[pc]] = dense[r]
            .iter()
            .enumerate()
            .filter(|&(j, &v)| v != 0 && j != pc)
            .map(|(j, &v)| (basis_pos[remaining[j]], field.neg(v)))
            .collect();
    }
    let dim = free.len();
    let mut acc = vec![0u32; dim];
    let mut touched: Vec<u32> = Vec::new();
    for pv in pivots.iter().rev() {
        let lead = pv.row.iter().find(|e| e.0 == pv.col).unwrap().1;
        let f = field.neg(field.inv(lead));
        for &(c, x) in &pv.row {
            if c == pv.col {
                continue;
            }
            let m = field.mul(f, x);
            for &(b, y) in &expr[c as usize] {
                if acc[b as usize] == 0 {
                    touched.push(b);
                }
                let v = field.add(acc[b as usize] % field.p(), field.mul(m, y));
                acc[b as usize] = if v == 0 { field.p() } else { v };
            }
        }
        touched.sort_unstable();
        expr[pv.col as usize] = touched
            .iter()
            .filter_map(|&b| {
                let v = acc[b as usize] % field.p();
                acc[b as usize] = 0;
                (v != 0).then_some((b, v))
            })
            .collect();
        touched.clear();
    }
    (free, expr)
}

/// Dense matrix product A B with A given by rows (a x k) and B (k x n).
pub fn dense_mul(field: &PrimeField, a: &[Vec<u32>], b: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let n = b.first().map(|r| r.len()).unwrap_or(0);
    let p = field.p() as u64;
    a.iter()
        .map(|row| {
            let mut acc = vec![0u64; n];
            for (k, &x) in row.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                for (s, &y) in acc.iter_mut().zip(&b[k]) {
                    *s = (*s + x as u64 * y as u64) % p;
                }
            }
            acc.into_iter().map(|v| v as u32).collect()
        })
        .collect()
}
