//! Smith and Hermite normal forms with explicit unimodular transforms.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::matrix::IntMatrix;

/// `U·M·V = D` with `U`, `V` unimodular and `D` diagonal, `d₁ | d₂ | …`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithForm {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
    /// `U⁻¹`, kept so cokernel coordinates can be mapped back.
    pub u_inv: IntMatrix,
}

impl SmithForm {
    /// Diagonal entries `d₁, …, d_min(rows, cols)`, zeros included.
    pub fn diagonal(&self) -> Vec<BigInt> {
        let k = self.d.rows().min(self.d.cols());
        (0..k).map(|i| self.d[(i, i)].clone()).collect()
    }
}

pub fn smith_normal_form(m: &IntMatrix) -> SmithForm {
    let (rows, cols) = (m.rows(), m.cols());
    let mut d = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut u_inv = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);

    for t in 0..rows.min(cols) {
        loop {
            let pivot = (t..rows)
                .flat_map(|r| (t..cols).map(move |c| (r, c)))
                .filter(|&(r, c)| !d[(r, c)].is_zero())
                .min_by(|&a, &b| d[a].abs().cmp(&d[b].abs()));
            let Some((pr, pc)) = pivot else {
                return finish(m, u, d, v, u_inv);
            };
            d.swap_rows(t, pr);
            u.swap_rows(t, pr);
            u_inv.swap_cols(t, pr);
            d.swap_cols(t, pc);
            v.swap_cols(t, pc);

            let mut clean = true;
            for r in t + 1..rows {
                let q = d[(r, t)].div_floor(&d[(t, t)]);
                let k = -q;
                d.add_row_multiple(r, t, &k);
                u.add_row_multiple(r, t, &k);
                u_inv.add_col_multiple(t, r, &-&k);
                clean &= d[(r, t)].is_zero();
            }
            for c in t + 1..cols {
                let q = d[(t, c)].div_floor(&d[(t, t)]);
                let k = -q;
                d.add_col_multiple(c, t, &k);
                v.add_col_multiple(c, t, &k);
                clean &= d[(t, c)].is_zero();
            }
            if !clean {
                continue;
            }
            // divisibility: fold an offending row into row t and retry
            let offending = (t + 1..rows).find(|&r| (t + 1..cols).any(|c| !d[(r, c)].is_multiple_of(&d[(t, t)])));
            match offending {
                Some(r) => {
                    let one = BigInt::one();
                    d.add_row_multiple(t, r, &one);
                    u.add_row_multiple(t, r, &one);
                    u_inv.add_col_multiple(r, t, &-&one);
                }
                None => break,
            }
        }
        if d[(t, t)].is_negative() {
            d.negate_row(t);
            u.negate_row(t);
            u_inv.negate_col(t);
        }
    }
    finish(m, u, d, v, u_inv)
}

fn finish(m: &IntMatrix, u: IntMatrix, d: IntMatrix, v: IntMatrix, u_inv: IntMatrix) -> SmithForm {
    assert_eq!(&(&u * m) * &v, d, "Smith form certificate U·M·V = D failed");
    assert!((&u * &u_inv).is_identity(), "Smith form certificate U·U⁻¹ = I failed");
    assert!(d.is_diagonal(), "Smith form is not diagonal");
    assert!(v.det().abs().is_one(), "Smith form V is not unimodular");
    SmithForm { u, d, v, u_inv }
}

/// Column-style Hermite form `H = M·U`.
///
/// Pivot columns sit to the right of the zero columns; the pivot of a column
/// is its lowest nonzero entry, is positive, and entries to its right in the
/// same row are reduced into `0..pivot`. A full-rank square input gives an
/// upper-triangular `H` with positive diagonal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HermiteForm {
    pub h: IntMatrix,
    pub u: IntMatrix,
    /// Number of leading zero columns of `h`; `u`'s first `zero_columns`
    /// columns are a basis of the integer kernel of the input.
    pub zero_columns: usize,
}

impl HermiteForm {
    pub fn rank(&self) -> usize {
        self.h.cols() - self.zero_columns
    }

    /// The pivot columns of `h`.
    pub fn basis(&self) -> IntMatrix {
        self.h.columns(self.zero_columns..self.h.cols())
    }

    /// Integer kernel basis of the input, as columns.
    pub fn kernel(&self) -> IntMatrix {
        self.u.columns(0..self.zero_columns)
    }
}

pub fn hermite_normal_form(m: &IntMatrix) -> HermiteForm {
    let (rows, cols) = (m.rows(), m.cols());
    let mut h = m.clone();
    let mut u = IntMatrix::identity(cols);
    let mut active = cols;

    for i in (0..rows).rev() {
        if active == 0 {
            break;
        }
        let last = active - 1;
        loop {
            let Some(p) = (0..active)
                .filter(|&j| !h[(i, j)].is_zero())
                .min_by(|&a, &b| h[(i, a)].abs().cmp(&h[(i, b)].abs()))
            else {
                break;
            };
            h.swap_cols(p, last);
            u.swap_cols(p, last);
            let mut done = true;
            for j in 0..last {
                if h[(i, j)].is_zero() {
                    continue;
                }
                let k = -h[(i, j)].div_floor(&h[(i, last)]);
                h.add_col_multiple(j, last, &k);
                u.add_col_multiple(j, last, &k);
                done &= h[(i, j)].is_zero();
            }
            if done {
                break;
            }
        }
        if h[(i, last)].is_zero() {
            continue;
        }
        if h[(i, last)].is_negative() {
            h.negate_col(last);
            u.negate_col(last);
        }
        for j in active..cols {
            let k = -h[(i, j)].div_floor(&h[(i, last)]);
            h.add_col_multiple(j, last, &k);
            u.add_col_multiple(j, last, &k);
        }
        active -= 1;
    }
    assert_eq!(&(m * &u), &h, "Hermite form certificate M·U = H failed");
    assert!(u.det().abs().is_one(), "Hermite transform is not unimodular");
    HermiteForm {
        h,
        u,
        zero_columns: active,
    }
}
