//! Exact integer and rational linear algebra: Hermite and Smith normal forms,
//! integer solving, kernels and determinants.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Row-major integer matrix.
pub type IMat = Vec<Vec<BigInt>>;
/// Row-major rational matrix.
pub type QMat = Vec<Vec<BigRational>>;

pub fn zeros(rows: usize, cols: usize) -> IMat {
    vec![vec![BigInt::zero(); cols]; rows]
}

pub fn identity(n: usize) -> IMat {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = BigInt::one();
    }
    m
}

pub fn qzeros(rows: usize, cols: usize) -> QMat {
    vec![vec![BigRational::zero(); cols]; rows]
}

pub fn qidentity(n: usize) -> QMat {
    let mut m = qzeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = BigRational::one();
    }
    m
}

pub fn to_q(m: &IMat) -> QMat {
    m.iter()
        .map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect())
        .collect()
}

pub fn transpose<T: Clone>(m: &[Vec<T>]) -> Vec<Vec<T>> {
    if m.is_empty() {
        return Vec::new();
    }
    (0..m[0].len())
        .map(|j| m.iter().map(|r| r[j].clone()).collect())
        .collect()
}

pub fn imul(a: &IMat, b: &IMat) -> IMat {
    let n = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..n)
                .map(|j| {
                    row.iter()
                        .zip(b.iter())
                        .fold(BigInt::zero(), |acc, (x, brow)| acc + x * &brow[j])
                })
                .collect()
        })
        .collect()
}

pub fn qmul(a: &QMat, b: &QMat) -> QMat {
    let n = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..n)
                .map(|j| {
                    row.iter()
                        .zip(b.iter())
                        .fold(BigRational::zero(), |acc, (x, brow)| acc + x * &brow[j])
                })
                .collect()
        })
        .collect()
}

pub fn qmat_vec(a: &QMat, v: &[BigRational]) -> Vec<BigRational> {
    a.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .fold(BigRational::zero(), |acc, (x, y)| acc + x * y)
        })
        .collect()
}

pub fn imat_vec(a: &IMat, v: &[BigInt]) -> Vec<BigInt> {
    a.iter()
        .map(|row| row.iter().zip(v).fold(BigInt::zero(), |acc, (x, y)| acc + x * y))
        .collect()
}

fn col_axpy(m: &mut IMat, dst: usize, src: usize, q: &BigInt) {
    // column dst -= q * column src
    for row in m.iter_mut() {
        let t = &row[src] * q;
        row[dst] -= t;
    }
}

fn col_neg(m: &mut IMat, c: usize) {
    for row in m.iter_mut() {
        row[c] = -row[c].clone();
    }
}

fn col_swap(m: &mut IMat, a: usize, b: usize) {
    for row in m.iter_mut() {
        row.swap(a, b);
    }
}

fn row_axpy(m: &mut IMat, dst: usize, src: usize, q: &BigInt) {
    let srow = m[src].clone();
    for (x, s) in m[dst].iter_mut().zip(srow.iter()) {
        *x -= s * q;
    }
}

/// Column Hermite normal form of a full-row-rank `rows x cols` matrix.
///
/// Returns `(h, u)` with `a * u = [h | 0]`, `h` square upper triangular with
/// positive diagonal and `0 <= h[i][j] < h[i][i]` for `j > i`; `u` unimodular.
/// The trailing `cols - rows` columns of `u` span the integer kernel of `a`.
pub fn hnf_columns(a: &IMat) -> Option<(IMat, IMat)> {
    let m = a.len();
    let n = a.first().map_or(0, |r| r.len());
    if n < m {
        return None;
    }
    let mut w = a.clone();
    let mut u = identity(n);
    let mut active: Vec<usize> = (0..n).collect();
    let mut piv = vec![0usize; m];
    for r in (0..m).rev() {
        loop {
            let nz: Vec<usize> = active.iter().copied().filter(|&c| !w[r][c].is_zero()).collect();
            if nz.is_empty() {
                return None;
            }
            if nz.len() == 1 {
                let p = nz[0];
                if w[r][p].is_negative() {
                    col_neg(&mut w, p);
                    col_neg(&mut u, p);
                }
                piv[r] = p;
                active.retain(|&c| c != p);
                break;
            }
            let p = *nz.iter().min_by(|&&x, &&y| w[r][x].abs().cmp(&w[r][y].abs())).unwrap();
            for &c in &nz {
                if c != p {
                    let q = w[r][c].div_floor(&w[r][p]);
                    col_axpy(&mut w, c, p, &q);
                    col_axpy(&mut u, c, p, &q);
                }
            }
        }
    }
    for j in 0..m {
        for i in (0..j).rev() {
            let q = w[i][piv[j]].div_floor(&w[i][piv[i]]);
            if !q.is_zero() {
                col_axpy(&mut w, piv[j], piv[i], &q);
                col_axpy(&mut u, piv[j], piv[i], &q);
            }
        }
    }
    let order: Vec<usize> = piv.iter().copied().chain(active.iter().copied()).collect();
    let h: IMat = (0..m).map(|i| (0..m).map(|j| w[i][piv[j]].clone()).collect()).collect();
    let uu: IMat = (0..n).map(|i| order.iter().map(|&j| u[i][j].clone()).collect()).collect();
    Some((h, uu))
}

/// Integer solution `x` of `a x = t` for a full-row-rank `a`, if one exists.
pub fn solve_integer(a: &IMat, t: &[BigInt]) -> Option<Vec<BigInt>> {
    let (h, u) = hnf_columns(a)?;
    let m = h.len();
    let mut y = vec![BigInt::zero(); m];
    for r in (0..m).rev() {
        let mut s = t[r].clone();
        for j in r + 1..m {
            s -= &h[r][j] * &y[j];
        }
        let (q, rem) = s.div_rem(&h[r][r]);
        if !rem.is_zero() {
            return None;
        }
        y[r] = q;
    }
    let n = u.len();
    Some(
        (0..n)
            .map(|i| (0..m).fold(BigInt::zero(), |acc, j| acc + &u[i][j] * &y[j]))
            .collect(),
    )
}

/// Basis (as columns) of the integer kernel of a full-row-rank matrix.
pub fn kernel_columns(a: &IMat) -> Option<IMat> {
    let m = a.len();
    let (_, u) = hnf_columns(a)?;
    Some(u.iter().map(|row| row[m..].to_vec()).collect())
}

/// Smith normal form: returns `(diag, u, v)` with `u * a * v` diagonal, entries
/// nonnegative and each dividing the next; `u`, `v` unimodular.
pub fn snf(a: &IMat) -> (Vec<BigInt>, IMat, IMat) {
    let m = a.len();
    let n = a.first().map_or(0, |r| r.len());
    let mut w = a.clone();
    let mut u = identity(m);
    let mut v = identity(n);
    let mut t = 0;
    while t < m.min(n) {
        // choose the smallest nonzero pivot in the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in t..m {
            for j in t..n {
                if !w[i][j].is_zero()
                    && best.map_or(true, |(bi, bj)| w[i][j].abs() < w[bi][bj].abs())
                {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        w.swap(t, pi);
        u.swap(t, pi);
        col_swap(&mut w, t, pj);
        col_swap(&mut v, t, pj);
        loop {
            let mut changed = false;
            for i in t + 1..m {
                if !w[i][t].is_zero() {
                    let q = w[i][t].div_floor(&w[t][t]);
                    row_axpy(&mut w, i, t, &q);
                    row_axpy(&mut u, i, t, &q);
                    if !w[i][t].is_zero() {
                        w.swap(t, i);
                        u.swap(t, i);
                        changed = true;
                    }
                }
            }
            for j in t + 1..n {
                if !w[t][j].is_zero() {
                    let q = w[t][j].div_floor(&w[t][t]);
                    col_axpy(&mut w, j, t, &q);
                    col_axpy(&mut v, j, t, &q);
                    if !w[t][j].is_zero() {
                        col_swap(&mut w, t, j);
                        col_swap(&mut v, t, j);
                        changed = true;
                    }
                }
            }
            if changed {
                continue;
            }
            // divisibility of the trailing block by the pivot
            let mut fix = None;
            'outer: for i in t + 1..m {
                for j in t + 1..n {
                    if !(&w[i][j] % &w[t][t]).is_zero() {
                        fix = Some(i);
                        break 'outer;
                    }
                }
            }
            match fix {
                Some(i) => {
                    let minus_one = -BigInt::one();
                    row_axpy(&mut w, t, i, &minus_one);
                    row_axpy(&mut u, t, i, &minus_one);
                }
                None => break,
            }
        }
        if w[t][t].is_negative() {
            for x in w[t].iter_mut() {
                *x = -x.clone();
            }
            for x in u[t].iter_mut() {
                *x = -x.clone();
            }
        }
        t += 1;
    }
    let diag = (0..m.min(n)).map(|i| w[i][i].clone()).collect();
    (diag, u, v)
}

/// Determinant of a square integer matrix (fraction-free elimination).
pub fn det(a: &IMat) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut m = a.clone();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let val = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = val / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * m[n - 1][n - 1].clone()
}

/// Determinant of a square rational matrix.
pub fn qdet(a: &QMat) -> BigRational {
    let n = a.len();
    let mut m = a.clone();
    let mut d = BigRational::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| !m[i][k].is_zero()) else {
            return BigRational::zero();
        };
        if p != k {
            m.swap(p, k);
            d = -d;
        }
        let piv = m[k][k].clone();
        d *= &piv;
        for i in k + 1..n {
            let f = &m[i][k] / &piv;
            if f.is_zero() {
                continue;
            }
            for j in k..n {
                let t = &f * &m[k][j];
                m[i][j] -= t;
            }
        }
    }
    d
}

/// Inverse of a square rational matrix.
pub fn qinv(a: &QMat) -> Option<QMat> {
    let n = a.len();
    let mut m = a.clone();
    let mut inv = qidentity(n);
    for k in 0..n {
        let p = (k..n).find(|&i| !m[i][k].is_zero())?;
        m.swap(p, k);
        inv.swap(p, k);
        let piv = m[k][k].clone();
        for j in 0..n {
            m[k][j] = &m[k][j] / &piv;
            inv[k][j] = &inv[k][j] / &piv;
        }
        for i in 0..n {
            if i != k && !m[i][k].is_zero() {
                let f = m[i][k].clone();
                for j in 0..n {
                    let t = &f * &m[k][j];
                    m[i][j] -= t;
                    let t = &f * &inv[k][j];
                    inv[i][j] -= t;
                }
            }
        }
    }
    Some(inv)
}

/// Inverse of a unimodular integer matrix.
pub fn iinv_unimodular(a: &IMat) -> Option<IMat> {
    let q = qinv(&to_q(a))?;
    q.iter()
        .map(|r| r.iter().map(|x| x.is_integer().then(|| x.to_integer())).collect())
        .collect()
}

pub fn lcm_all<'a>(it: impl IntoIterator<Item = &'a BigInt>) -> BigInt {
    it.into_iter().fold(BigInt::one(), |acc, x| acc.lcm(x))
}

pub fn gcd_all<'a>(it: impl IntoIterator<Item = &'a BigInt>) -> BigInt {
    it.into_iter().fold(BigInt::zero(), |acc, x| acc.gcd(x))
}

/// Clears denominators of a rational matrix: returns `(d, m)` with `a = m / d`.
pub fn clear_denominators(a: &QMat) -> (BigInt, IMat) {
    let d = lcm_all(a.iter().flatten().map(|x| x.denom()));
    let m = a
        .iter()
        .map(|r| r.iter().map(|x| (x * BigRational::from_integer(d.clone())).to_integer()).collect())
        .collect();
    (d, m)
}

/// Factorization of a positive integer by trial division.
pub fn factor_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_squarefree(n: u64) -> bool {
    factor_u64(n).iter().all(|&(_, e)| e == 1)
}

pub fn isqrt(n: &BigInt) -> BigInt {
    n.sqrt()
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn qint(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

/// Fractional part in `[0, 1)`.
pub fn frac(q: &BigRational) -> BigRational {
    q - BigRational::from_integer(q.floor().to_integer())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn im(rows: &[&[i64]]) -> IMat {
        rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    #[test]
    fn hnf_is_canonical_and_tracks_transform() {
        let a = im(&[&[4, 6, 2], &[2, 8, 10]]);
        let (h, u) = hnf_columns(&a).unwrap();
        let au = imul(&a, &u);
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(au[i][j], h[i][j]);
            }
            assert!(au[i][2].is_zero());
        }
        assert!(h[1][0].is_zero());
        assert!(h[0][0].is_positive() && h[1][1].is_positive());
        assert!(h[0][1] >= BigInt::zero() && h[0][1] < h[0][0]);
        assert_eq!(det(&u).abs(), BigInt::one());
        // lattice index equals gcd of 2x2 minors = 4
        assert_eq!(&h[0][0] * &h[1][1], BigInt::from(4));
    }

    #[test]
    fn snf_of_small_matrix() {
        let a = im(&[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]]);
        let (d, u, v) = snf(&a);
        assert_eq!(d, vec![BigInt::from(2), BigInt::from(6), BigInt::from(12)]);
        let p = imul(&imul(&u, &a), &v);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!(p[i][j].is_zero());
                } else {
                    assert_eq!(p[i][i], d[i]);
                }
            }
        }
    }

    #[test]
    fn integer_solve_and_kernel() {
        let a = im(&[&[3, 5]]);
        let x = solve_integer(&a, &[BigInt::one()]).unwrap();
        assert_eq!(&x[0] * 3 + &x[1] * 5, BigInt::one());
        let a = im(&[&[2, 4]]);
        assert!(solve_integer(&a, &[BigInt::one()]).is_none());
        let k = kernel_columns(&im(&[&[1, 2, 3]])).unwrap();
        assert_eq!(k[0].len(), 2);
        for j in 0..2 {
            assert!((&k[0][j] + &k[1][j] * BigInt::from(2) + &k[2][j] * BigInt::from(3)).is_zero());
        }
    }

    #[test]
    fn determinants() {
        assert_eq!(det(&im(&[&[2, 1], &[7, 4]])), BigInt::one());
        assert_eq!(det(&im(&[&[0, 1, 2], &[1, 0, 3], &[4, -3, 8]])), BigInt::from(-2));
        let q = to_q(&im(&[&[0, 1, 2], &[1, 0, 3], &[4, -3, 8]]));
        assert_eq!(qdet(&q), rat(-2, 1));
        let qi = qinv(&q).unwrap();
        assert_eq!(qmul(&q, &qi), qidentity(3));
    }

    #[test]
    fn integer_factorization() {
        assert_eq!(factor_u64(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(factor_u64(1), Vec::<(u64, u32)>::new());
        assert!(is_squarefree(10) && !is_squarefree(12));
    }
}
