/// Cremona's Heilbronn matrices of determinant `ell` (a prime), stored as
/// [a, b, c, d]. Their right action on Manin symbols realizes T_ell.
pub fn heilbronn_cremona(ell: u64) -> Vec<[i64; 4]> {
    let p = ell as i64;
    if p == 2 {
        return vec![[1, 0, 0, 2], [2, 0, 0, 1], [2, 1, 0, 1], [1, 0, 1, 2]];
    }
    let mut out = vec![[1, 0, 0, p]];
    for r in -(p / 2)..=(p / 2) {
        let (mut x1, mut x2, mut y1, mut y2) = (p, -r, 0i64, 1i64);
        let (mut a, mut b) = (-p, r);
        out.push([x1, x2, y1, y2]);
        while b != 0 {
            let q = round_half_away(a, b);
            let c = a - b * q;
            a = -b;
            b = c;
            let x3 = q * x2 - x1;
            x1 = x2;
            x2 = x3;
            let y3 = q * y2 - y1;
            y1 = y2;
            y2 = y3;
            out.push([x1, x2, y1, y2]);
        }
    }
    out
}

/// Merel's Heilbronn matrices of determinant `n`: all [a, b, c, d] with
/// ad - bc = n, a > b >= 0 and d > c >= 0. Valid for every n, including
/// divisors of the level, where they realize U_n.
pub fn heilbronn_merel(n: u64) -> Vec<[i64; 4]> {
    let n = n as i64;
    let mut out = Vec::new();
    for a in 1..=n {
        for d in n.div_euclid(a)..=n {
            let bc = a * d - n;
            if bc < 0 || d == 0 {
                continue;
            }
            if bc == 0 {
                out.extend((0..a).map(|b| [a, b, 0, d]));
                out.extend((1..d).map(|c| [a, 0, c, d]));
                continue;
            }
            // c ranges over divisors of bc with c < d and bc / c < a
            let lo = bc / a + 1;
            for c in lo.max(1)..d {
                if bc % c == 0 {
                    out.push([a, bc / c, c, d]);
                }
            }
        }
    }
    out
}

/// a / b rounded to the nearest integer, halves away from zero.
fn round_half_away(a: i64, b: i64) -> i64 {
    let (q, r) = (a / b, a % b);
    if 2 * r.abs() >= b.abs() {
        if (a < 0) == (b < 0) {
            q + 1
        } else {
            q - 1
        }
    } else {
        q
    }
}
