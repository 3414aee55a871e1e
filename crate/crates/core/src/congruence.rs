//! Gauss congruences `Σ_{d|n} μ(d)·R(φ^{n/d}) ≡ 0 (mod n)` and the
//! periodic-orbit counts they come from.

use alloc::vec::Vec;
use core::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::abelian::ClassCount;

/// Which engine produced a sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SequenceSource {
    Finite,
    Abelian,
    Extension,
}

impl fmt::Display for SequenceSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SequenceSource::Finite => "finite",
            SequenceSource::Abelian => "abelian",
            SequenceSource::Extension => "extension",
        })
    }
}

/// `R(φ¹), …, R(φᴺ)`; `values[k]` is `R(φ^{k+1})`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReidemeisterSequence {
    pub values: Vec<ClassCount>,
    pub source: SequenceSource,
}

impl ReidemeisterSequence {
    pub fn new(values: Vec<ClassCount>, source: SequenceSource) -> Self {
        ReidemeisterSequence { values, source }
    }

    pub fn from_counts(values: impl IntoIterator<Item = usize>, source: SequenceSource) -> Self {
        ReidemeisterSequence {
            values: values.into_iter().map(ClassCount::finite).collect(),
            source,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CongruenceError {
    InfiniteTerm(usize),
    NegativePeriodCount(usize),
    NonDivisible(usize),
    /// `Σ_{d|n} P_d` failed to give back `R(φⁿ)`.
    Reconstruction(usize),
}

impl fmt::Display for CongruenceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CongruenceError::InfiniteTerm(n) => write!(f, "R(φ^{n}) is infinite"),
            CongruenceError::NegativePeriodCount(d) => write!(f, "negative count of points of least period {d}"),
            CongruenceError::NonDivisible(d) => write!(f, "points of least period {d} do not split into orbits of length {d}"),
            CongruenceError::Reconstruction(n) => write!(f, "periodic counts do not sum back to R(φ^{n})"),
        }
    }
}

impl core::error::Error for CongruenceError {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CongruenceRow {
    pub n: usize,
    pub r: BigUint,
    /// `S_n = Σ_{d|n} μ(d)·R(φ^{n/d})`, also the number `P_n` of points of least period `n`.
    pub sum: BigInt,
    pub residue: BigInt,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CongruenceReport {
    pub rows: Vec<CongruenceRow>,
}

impl CongruenceReport {
    /// Every `S_n ≡ 0 (mod n)` and every `P_n ≥ 0`.
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass && !r.sum.is_negative())
    }

    pub fn periodic_counts(&self) -> impl Iterator<Item = &BigInt> {
        self.rows.iter().map(|r| &r.sum)
    }

    /// `n, R, S_n, S_n mod n, P_n, P_n/n`, header first.
    pub fn to_csv_rows(&self) -> Vec<[alloc::string::String; 6]> {
        use alloc::string::ToString;
        let mut out = Vec::with_capacity(self.rows.len() + 1);
        out.push(["n", "R", "S_n", "S_n mod n", "P_n", "P_n/n"].map(|s| s.to_string()));
        for row in &self.rows {
            let (q, r) = row.sum.div_rem(&BigInt::from(row.n));
            out.push([
                row.n.to_string(),
                row.r.to_string(),
                row.sum.to_string(),
                row.residue.to_string(),
                row.sum.to_string(),
                if r.is_zero() { q.to_string() } else { "-".to_string() },
            ]);
        }
        out
    }
}

/// μ(d) by trial division.
pub fn mobius(d: u64) -> i8 {
    assert!(d >= 1, "μ is defined on positive integers");
    let mut n = d;
    let mut sign = 1i8;
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

fn divisors(n: usize) -> impl Iterator<Item = usize> {
    (1..=n).filter(move |d| n.is_multiple_of(*d))
}

pub fn gauss_congruence_check(seq: &ReidemeisterSequence) -> Result<CongruenceReport, CongruenceError> {
    let values: Vec<BigInt> = seq
        .values
        .iter()
        .enumerate()
        .map(|(k, v)| {
            v.as_finite()
                .map(|r| BigInt::from(r.clone()))
                .ok_or(CongruenceError::InfiniteTerm(k + 1))
        })
        .collect::<Result<_, _>>()?;
    let rows = (1..=values.len())
        .map(|n| {
            let sum: BigInt = divisors(n)
                .map(|d| match mobius(d as u64) {
                    0 => BigInt::zero(),
                    m => BigInt::from(m) * &values[n / d - 1],
                })
                .sum();
            let residue = sum.mod_floor(&BigInt::from(n));
            CongruenceRow {
                n,
                r: values[n - 1].magnitude().clone(),
                pass: residue.is_zero(),
                sum,
                residue,
            }
        })
        .collect();
    Ok(CongruenceReport { rows })
}

/// `(d, P_d/d)` for `d = 1..=N`: the number of periodic orbits of least
/// period `d`, with `Σ_{d|n} P_d = R(φⁿ)` re-checked.
pub fn periodic_orbit_decomposition(seq: &ReidemeisterSequence) -> Result<Vec<(usize, BigUint)>, CongruenceError> {
    let report = gauss_congruence_check(seq)?;
    let mut out = Vec::with_capacity(report.rows.len());
    for row in &report.rows {
        if row.sum.is_negative() {
            return Err(CongruenceError::NegativePeriodCount(row.n));
        }
        if !row.pass {
            return Err(CongruenceError::NonDivisible(row.n));
        }
        out.push((row.n, (&row.sum / BigInt::from(row.n)).magnitude().clone()));
    }
    for row in &report.rows {
        let total: BigUint = divisors(row.n).map(|d| &out[d - 1].1 * BigUint::from(d)).sum();
        if total != row.r {
            return Err(CongruenceError::Reconstruction(row.n));
        }
    }
    Ok(out)
}
