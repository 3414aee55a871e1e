//! Exact arithmetic in the cyclotomic ring `ℤ[ζ_e]`.
//!
//! Elements are integer coordinate vectors of length `φ(e)` over the power
//! basis `1, ζ, …, ζ^{φ(e)−1}`, i.e. polynomials reduced modulo the `e`-th
//! cyclotomic polynomial. Reduction makes the representation canonical, so
//! equality of elements is equality of coordinates.

use alloc::vec;
use alloc::vec::Vec;

/// Coordinates of an element of `ℤ[ζ_e]` in the reduced power basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cyc(pub Vec<i64>);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclotomicField {
    order: usize,
    /// Monic `Φ_e`, constant term first.
    modulus: Vec<i64>,
    /// `ζ^j` reduced, for `j = 0..e`.
    powers: Vec<Cyc>,
}

/// `Φ_n` with integer coefficients, constant term first.
pub fn cyclotomic_polynomial(n: usize) -> Vec<i64> {
    // xⁿ − 1 divided by Φ_d for every proper divisor d
    let mut num = vec![0i64; n + 1];
    num[0] = -1;
    num[n] = 1;
    for d in (1..n).filter(|d| n.is_multiple_of(*d)) {
        num = exact_division(&num, &cyclotomic_polynomial(d));
    }
    num
}

/// Quotient of `a` by the monic polynomial `b`; the remainder must be zero.
fn exact_division(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut rem = a.to_vec();
    let db = b.len() - 1;
    let da = rem.len() - 1;
    let mut q = vec![0i64; da - db + 1];
    for k in (0..=da - db).rev() {
        let c = rem[k + db];
        q[k] = c;
        for (j, &bj) in b.iter().enumerate() {
            rem[k + j] -= c * bj;
        }
    }
    debug_assert!(rem.iter().all(|&x| x == 0));
    q
}

impl CyclotomicField {
    pub fn new(order: usize) -> Self {
        assert!(order > 0, "cyclotomic order must be positive");
        let modulus = cyclotomic_polynomial(order);
        let degree = modulus.len() - 1;
        let mut field = CyclotomicField {
            order,
            modulus,
            powers: Vec::new(),
        };
        let mut powers = Vec::with_capacity(order);
        for j in 0..order {
            let mut poly = vec![0i64; j + 1];
            poly[j] = 1;
            powers.push(field.reduce(poly));
        }
        debug_assert!(powers.iter().all(|p| p.0.len() == degree));
        field.powers = powers;
        field
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `φ(e)`, the number of coordinates.
    pub fn degree(&self) -> usize {
        self.modulus.len() - 1
    }

    fn reduce(&self, mut poly: Vec<i64>) -> Cyc {
        let d = self.degree();
        for k in (d..poly.len()).rev() {
            let c = poly[k];
            if c == 0 {
                continue;
            }
            for (j, &mj) in self.modulus.iter().enumerate() {
                poly[k - d + j] -= c * mj;
            }
        }
        poly.resize(d, 0);
        Cyc(poly)
    }

    pub fn zero(&self) -> Cyc {
        Cyc(vec![0; self.degree()])
    }

    pub fn integer(&self, n: i64) -> Cyc {
        let mut c = self.zero();
        c.0[0] = n;
        c
    }

    /// `ζ^j` for any integer `j`.
    pub fn root(&self, j: i64) -> Cyc {
        self.powers[j.rem_euclid(self.order as i64) as usize].clone()
    }

    /// `Σ_j coeffs[j]·ζ^j` for an unreduced coefficient list.
    pub fn from_root_coefficients(&self, coeffs: &[i64]) -> Cyc {
        let mut acc = self.zero();
        for (j, &c) in coeffs.iter().enumerate() {
            if c != 0 {
                let r = &self.powers[j % self.order];
                for (a, b) in acc.0.iter_mut().zip(&r.0) {
                    *a += c * b;
                }
            }
        }
        acc
    }

    pub fn add(&self, a: &Cyc, b: &Cyc) -> Cyc {
        Cyc(a.0.iter().zip(&b.0).map(|(x, y)| x + y).collect())
    }

    pub fn sub(&self, a: &Cyc, b: &Cyc) -> Cyc {
        Cyc(a.0.iter().zip(&b.0).map(|(x, y)| x - y).collect())
    }

    pub fn scale(&self, a: &Cyc, k: i64) -> Cyc {
        Cyc(a.0.iter().map(|x| x * k).collect())
    }

    pub fn mul(&self, a: &Cyc, b: &Cyc) -> Cyc {
        let mut prod = vec![0i64; a.0.len() + b.0.len()];
        for (i, &x) in a.0.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.0.iter().enumerate() {
                prod[i + j] += x * y;
            }
        }
        self.reduce(prod)
    }

    /// Complex conjugation `ζ ↦ ζ⁻¹`.
    pub fn conj(&self, a: &Cyc) -> Cyc {
        let mut acc = self.zero();
        for (j, &c) in a.0.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let r = self.root(-(j as i64));
            for (x, y) in acc.0.iter_mut().zip(&r.0) {
                *x += c * y;
            }
        }
        acc
    }

    /// The rational integer `a` represents, if it is one.
    pub fn as_integer(&self, a: &Cyc) -> Option<i64> {
        a.0[1..].iter().all(|&x| x == 0).then_some(a.0[0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclotomic_polynomials() {
        assert_eq!(cyclotomic_polynomial(1), [-1, 1]);
        assert_eq!(cyclotomic_polynomial(2), [1, 1]);
        assert_eq!(cyclotomic_polynomial(4), [1, 0, 1]);
        assert_eq!(cyclotomic_polynomial(6), [1, -1, 1]);
        assert_eq!(cyclotomic_polynomial(12), [1, 0, -1, 0, 1]);
        // Φ_105 is the first with a coefficient outside {−1, 0, 1}
        assert!(cyclotomic_polynomial(105).contains(&-2));
    }

    #[test]
    fn root_arithmetic() {
        let f = CyclotomicField::new(12);
        assert_eq!(f.degree(), 4);
        for j in 0..24 {
            assert_eq!(f.mul(&f.root(j), &f.root(-j)), f.integer(1));
            assert_eq!(f.conj(&f.root(j)), f.root(-j));
        }
        // 1 + ζ₃ + ζ₃² = 0 with ζ₃ = ζ₁₂⁴
        let sum = f.add(&f.add(&f.root(0), &f.root(4)), &f.root(8));
        assert_eq!(sum, f.zero());
        // ζ₄² = −1
        assert_eq!(f.mul(&f.root(3), &f.root(3)), f.integer(-1));
    }

    #[test]
    fn integrality() {
        let f = CyclotomicField::new(5);
        let one_plus = f.add(&f.integer(1), &f.root(1));
        // (1 + ζ)(1 + ζ⁻¹) = 2 + ζ + ζ⁻¹ is real but not rational
        assert_eq!(f.as_integer(&f.mul(&one_plus, &f.conj(&one_plus))), None);
        assert_eq!(f.as_integer(&f.mul(&f.root(2), &f.conj(&f.root(2)))), Some(1));
        assert_eq!(f.as_integer(&f.mul(&f.integer(3), &f.integer(4))), Some(12));
    }
}
