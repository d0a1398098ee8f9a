//! Dense Gauss-Jordan elimination over F_p with delayed reduction.

use crate::fp::PrimeField;

/// Storage lane for delayed reduction: entries may exceed p between
/// reductions as long as they stay below the lane's capacity.
trait Lane: Copy + Default + Send + Sync + 'static {
    fn from_u32(x: u32) -> Self;
    fn reduce(self, p: u32) -> u32;
    /// self + f * x, no reduction
    fn fma(self, f: u32, x: u32) -> Self;
}

impl Lane for u32 {
    #[inline(always)]
    fn from_u32(x: u32) -> Self {
        x
    }
    #[inline(always)]
    fn reduce(self, p: u32) -> u32 {
        self % p
    }
    #[inline(always)]
    fn fma(self, f: u32, x: u32) -> Self {
        self.wrapping_add(f.wrapping_mul(x))
    }
}

impl Lane for u64 {
    #[inline(always)]
    fn from_u32(x: u32) -> Self {
        x as u64
    }
    #[inline(always)]
    fn reduce(self, p: u32) -> u32 {
        (self % p as u64) as u32
    }
    #[inline(always)]
    fn fma(self, f: u32, x: u32) -> Self {
        self.wrapping_add(f as u64 * x as u64)
    }
}

/// Number of unreduced updates a lane entry can absorb.
fn headroom(p: u32, cap: u128) -> u128 {
    let step = (p as u128 - 1) * (p as u128 - 1);
    (cap - p as u128) / step.max(1)
}

/// Reduced row echelon form in place. Rows are dense with `ncols` entries.
/// Returns pivot columns; rows past the rank are zero afterwards.
pub fn rref(field: &PrimeField, rows: &mut Vec<Vec<u32>>, ncols: usize) -> Vec<usize> {
    let p = field.p();
    if headroom(p, u32::MAX as u128) >= 64 {
        rref_lane::<u32>(field, rows, ncols, headroom(p, u32::MAX as u128))
    } else if headroom(p, u64::MAX as u128) >= 64 {
        rref_lane::<u64>(field, rows, ncols, headroom(p, u64::MAX as u128))
    } else {
        rref_exact(field, rows, ncols)
    }
}

fn rref_lane<L: Lane>(
    field: &PrimeField,
    rows_in: &mut Vec<Vec<u32>>,
    ncols: usize,
    headroom: u128,
) -> Vec<usize> {
    let p = field.p();
    let nrows = rows_in.len();
    let mut rows: Vec<Vec<L>> = rows_in
        .iter()
        .map(|r| r.iter().map(|&x| L::from_u32(x % p)).collect())
        .collect();
    // updates absorbed per row since the last full reduction
    let mut pending = vec![0u128; nrows];
    let limit = headroom.saturating_sub(1).max(1);
    let mut pivots = Vec::new();
    let mut rank = 0usize;
    let mut piv_row = vec![0u32; ncols];
    for col in 0..ncols {
        if rank == nrows {
            break;
        }
        let Some(r) = (rank..nrows).find(|&r| rows[r][col].reduce(p) != 0) else {
            continue;
        };
        rows.swap(rank, r);
        pending.swap(rank, r);
        let inv = field.inv(rows[rank][col].reduce(p));
        for j in col..ncols {
            let v = field.mul(rows[rank][j].reduce(p), inv);
            piv_row[j] = v;
            rows[rank][j] = L::from_u32(v);
        }
        pending[rank] = 0;
        for i in 0..nrows {
            if i == rank {
                continue;
            }
            let f = rows[i][col].reduce(p);
            if f == 0 {
                continue;
            }
            if pending[i] >= limit {
                for x in rows[i][col..].iter_mut() {
                    *x = L::from_u32(x.reduce(p));
                }
                pending[i] = 0;
            }
            let nf = p - f;
            let row = &mut rows[i][col..];
            for (x, &y) in row.iter_mut().zip(&piv_row[col..]) {
                *x = x.fma(nf, y);
            }
            pending[i] += 1;
        }
        pivots.push(col);
        rank += 1;
    }
    for (dst, src) in rows_in.iter_mut().zip(rows) {
        for (d, s) in dst.iter_mut().zip(src) {
            *d = s.reduce(p);
        }
    }
    pivots
}

fn rref_exact(field: &PrimeField, rows: &mut [Vec<u32>], ncols: usize) -> Vec<usize> {
    let nrows = rows.len();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..ncols {
        if rank == nrows {
            break;
        }
        let Some(r) = (rank..nrows).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(rank, r);
        let inv = field.inv(rows[rank][col]);
        for x in rows[rank][col..].iter_mut() {
            *x = field.mul(*x, inv);
        }
        let piv = rows[rank].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == rank || row[col] == 0 {
                continue;
            }
            let f = field.neg(row[col]);
            for j in col..ncols {
                row[j] = field.add(row[j], field.mul(f, piv[j]));
            }
        }
        pivots.push(col);
        rank += 1;
    }
    pivots
}

/// Right kernel of a dense matrix, as the RREF basis of the kernel.
pub fn dense_kernel(field: &PrimeField, rows: &[Vec<u32>], ncols: usize) -> Vec<Vec<u32>> {
    let mut m = rows.to_vec();
    let pivots = rref(field, &mut m, ncols);
    let mut is_pivot = vec![false; ncols];
    pivots.iter().for_each(|&c| is_pivot[c] = true);
    let mut basis: Vec<Vec<u32>> = (0..ncols)
        .filter(|&c| !is_pivot[c])
        .map(|free| {
            let mut v = vec![0u32; ncols];
            v[free] = 1;
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = field.neg(m[r][free]);
            }
            v
        })
        .collect();
    rref(field, &mut basis, ncols);
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rref_small() {
        let f = PrimeField::new(5).unwrap();
        let mut m = vec![vec![0, 2, 4], vec![1, 1, 1], vec![1, 3, 0]];
        let piv = rref(&f, &mut m, 3);
        assert_eq!(piv, vec![0, 1]);
        assert_eq!(m[0], vec![1, 0, 4]);
        assert_eq!(m[1], vec![0, 1, 2]);
        assert_eq!(m[2], vec![0, 0, 0]);
    }

    #[test]
    fn lanes_agree() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for p in [3u64, 101, 65_521, 2_147_483_647] {
            let f = PrimeField::new(p).unwrap();
            let m: Vec<Vec<u32>> = (0..30)
                .map(|i| {
                    (0..40)
                        .map(|j| {
                            if (i * j) % 3 == 0 {
                                rng.gen_range(0..p as u32)
                            } else {
                                0
                            }
                        })
                        .collect()
                })
                .collect();
            let mut a = m.clone();
            let mut b = m.clone();
            let pa = rref(&f, &mut a, 40);
            let pb = rref_exact(&f, &mut b, 40);
            assert_eq!(pa, pb);
            assert_eq!(a, b);
        }
    }
}
