//! Arithmetic modulo a word-sized prime, used by the Dixon character-table
//! computation.

use alloc::vec;
use alloc::vec::Vec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct PrimeField {
    pub p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Self {
        debug_assert!(is_prime(p));
        PrimeField { p }
    }

    #[inline]
    pub fn add(self, a: u64, b: u64) -> u64 {
        (a + b) % self.p
    }

    #[inline]
    pub fn sub(self, a: u64, b: u64) -> u64 {
        (a + self.p - b) % self.p
    }

    #[inline]
    pub fn mul(self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.p as u128) as u64
    }

    pub fn pow(self, mut a: u64, mut e: u64) -> u64 {
        let mut acc = 1 % self.p;
        a %= self.p;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        acc
    }

    pub fn inv(self, a: u64) -> u64 {
        debug_assert!(!a.is_multiple_of(self.p), "inverse of zero");
        self.pow(a, self.p - 2)
    }

    pub fn from_usize(self, a: usize) -> u64 {
        a as u64 % self.p
    }

    /// An element of multiplicative order exactly `e`; requires `e | p − 1`.
    pub fn primitive_root_of_unity(self, e: u64) -> u64 {
        debug_assert_eq!((self.p - 1) % e, 0);
        let primes = prime_factors(e);
        (2..self.p)
            .map(|a| self.pow(a, (self.p - 1) / e))
            .find(|&z| primes.iter().all(|&q| self.pow(z, e / q) != 1))
            .unwrap_or(1)
    }

    /// Reduced row echelon form in place; returns pivot columns.
    pub fn rref(self, rows: &mut [Vec<u64>]) -> Vec<usize> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            let Some(p) = (r..rows.len()).find(|&i| rows[i][c] != 0) else {
                continue;
            };
            rows.swap(r, p);
            let scale = self.inv(rows[r][c]);
            for x in rows[r].iter_mut() {
                *x = self.mul(*x, scale);
            }
            for i in 0..rows.len() {
                if i != r && rows[i][c] != 0 {
                    let f = rows[i][c];
                    for j in 0..cols {
                        let v = self.mul(f, rows[r][j]);
                        rows[i][j] = self.sub(rows[i][j], v);
                    }
                }
            }
            pivots.push(c);
            r += 1;
            if r == rows.len() {
                break;
            }
        }
        pivots
    }

    /// Basis of the right null space `{x : A·x = 0}` of a `rows × cols` matrix.
    pub fn null_space(self, a: &[Vec<u64>], cols: usize) -> Vec<Vec<u64>> {
        let mut m: Vec<Vec<u64>> = a.to_vec();
        let pivots = self.rref(&mut m);
        let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut x = vec![0u64; cols];
                x[f] = 1;
                for (row, &pc) in pivots.iter().enumerate() {
                    x[pc] = self.sub(0, m[row][f]);
                }
                x
            })
            .collect()
    }

    /// Characteristic polynomial `det(x·I − A)`, coefficients from the
    /// constant term up, via reduction to upper Hessenberg form.
    pub fn charpoly(self, a: &[Vec<u64>]) -> Vec<u64> {
        let n = a.len();
        let mut h: Vec<Vec<u64>> = a.to_vec();
        for k in 0..n.saturating_sub(2) {
            let Some(piv) = (k + 1..n).find(|&i| h[i][k] != 0) else {
                continue;
            };
            if piv != k + 1 {
                h.swap(piv, k + 1);
                for row in h.iter_mut() {
                    row.swap(piv, k + 1);
                }
            }
            let inv = self.inv(h[k + 1][k]);
            for i in k + 2..n {
                let f = self.mul(h[i][k], inv);
                if f == 0 {
                    continue;
                }
                for j in 0..n {
                    let v = self.mul(f, h[k + 1][j]);
                    h[i][j] = self.sub(h[i][j], v);
                }
                for row in h.iter_mut() {
                    let v = self.mul(f, row[i]);
                    row[k + 1] = self.add(row[k + 1], v);
                }
            }
        }
        // p_m(x) = (x − h[m][m])·p_{m−1} − Σ_{i<m} h[i][m]·(Π_{j=i+1..m} h[j][j−1])·p_{i−1}
        let mut polys: Vec<Vec<u64>> = vec![vec![1]];
        for m in 0..n {
            let prev = &polys[m];
            let mut next = vec![0u64; m + 2];
            for (d, &c) in prev.iter().enumerate() {
                next[d + 1] = self.add(next[d + 1], c);
                next[d] = self.sub(next[d], self.mul(c, h[m][m]));
            }
            let mut prod = 1u64;
            for i in (0..m).rev() {
                prod = self.mul(prod, h[i + 1][i]);
                let f = self.mul(h[i][m], prod);
                if f == 0 {
                    continue;
                }
                for (d, &c) in polys[i].iter().enumerate() {
                    next[d] = self.sub(next[d], self.mul(f, c));
                }
            }
            polys.push(next);
        }
        polys.pop().unwrap_or_else(|| vec![1])
    }

    pub fn eval(self, poly: &[u64], x: u64) -> u64 {
        poly.iter().rev().fold(0, |acc, &c| self.add(self.mul(acc, x), c))
    }
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Least prime `p ≡ 1 (mod e)` with `p² > 4·order`.
pub(crate) fn dixon_prime(exponent: u64, order: u64) -> u64 {
    let mut p = exponent + 1;
    loop {
        if p * p > 4 * order && is_prime(p) {
            return p;
        }
        p += exponent;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes() {
        assert_eq!(dixon_prime(2, 6), 5);
        assert_eq!(dixon_prime(6, 6), 7);
        assert_eq!(dixon_prime(4, 8), 13);
        assert_eq!(prime_factors(360), [2, 3, 5]);
    }

    #[test]
    fn charpoly_matches_determinant() {
        let f = PrimeField::new(101);
        let a = vec![vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 10]];
        let cp = f.charpoly(&a);
        // det(xI − A) = x³ − 16x² − 12x + 3 over ℤ
        assert_eq!(cp, [3, f.sub(0, 12), f.sub(0, 16), 1]);
        for x in 0..101 {
            let shifted: Vec<Vec<u64>> = (0..3)
                .map(|i| (0..3).map(|j| f.sub(if i == j { x } else { 0 }, a[i][j])).collect())
                .collect();
            let det = f.sub(
                f.add(
                    f.mul(shifted[0][0], f.sub(f.mul(shifted[1][1], shifted[2][2]), f.mul(shifted[1][2], shifted[2][1]))),
                    f.mul(shifted[0][2], f.sub(f.mul(shifted[1][0], shifted[2][1]), f.mul(shifted[1][1], shifted[2][0]))),
                ),
                f.mul(shifted[0][1], f.sub(f.mul(shifted[1][0], shifted[2][2]), f.mul(shifted[1][2], shifted[2][0]))),
            );
            assert_eq!(f.eval(&cp, x), det);
        }
    }

    #[test]
    fn roots_of_unity() {
        let f = PrimeField::new(13);
        let z = f.primitive_root_of_unity(4);
        assert_eq!(f.pow(z, 4), 1);
        assert_ne!(f.pow(z, 2), 1);
    }
}
