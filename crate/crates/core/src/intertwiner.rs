//! Intertwiners between an explicit rational representation `ρ` and its
//! twist `ρ∘φ`, and the twisted class functions `g ↦ Tr(S·ρ(g))` they induce.

use alloc::collections::VecDeque;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::group::{FiniteEndo, FiniteGroup};
use crate::twisted::twisted_classes;

/// Square matrix over ℚ, row major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMatrix {
    dim: usize,
    data: Vec<BigRational>,
}

impl RatMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![BigRational::zero(); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = BigRational::one();
        }
        RatMatrix { dim, data }
    }

    /// From rows of `(numerator, denominator)` pairs.
    pub fn from_fractions(rows: &[Vec<(i64, i64)>]) -> Option<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) || rows.iter().flatten().any(|&(_, d)| d == 0) {
            return None;
        }
        let data = rows
            .iter()
            .flatten()
            .map(|&(n, d)| BigRational::new(BigInt::from(n), BigInt::from(d)))
            .collect();
        Some(RatMatrix { dim, data })
    }

    pub fn from_integers(rows: &[Vec<i64>]) -> Option<Self> {
        let fr: Vec<Vec<(i64, i64)>> = rows.iter().map(|r| r.iter().map(|&x| (x, 1)).collect()).collect();
        Self::from_fractions(&fr)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> &BigRational {
        &self.data[r * self.dim + c]
    }

    pub fn mul(&self, other: &RatMatrix) -> RatMatrix {
        let d = self.dim;
        let mut data = vec![BigRational::zero(); d * d];
        for r in 0..d {
            for k in 0..d {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..d {
                    data[r * d + c] += a * other.get(k, c);
                }
            }
        }
        RatMatrix { dim: d, data }
    }

    pub fn trace(&self) -> BigRational {
        (0..self.dim).map(|i| self.get(i, i).clone()).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RepresentationError {
    /// `ρ(x·g) ≠ ρ(x)·ρ(g)` (or the generators do not generate).
    NotARepresentation { x: usize, y: usize },
    DimensionMismatch,
    NotGenerating,
    GroupMismatch,
}

impl fmt::Display for RepresentationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RepresentationError::NotARepresentation { x, y } => {
                write!(f, "not a representation: ρ({x}·{y}) ≠ ρ({x})·ρ({y})")
            }
            RepresentationError::DimensionMismatch => f.write_str("matrices have different dimensions"),
            RepresentationError::NotGenerating => f.write_str("the given elements do not generate the group"),
            RepresentationError::GroupMismatch => f.write_str("endomorphism acts on another group"),
        }
    }
}

impl core::error::Error for RepresentationError {}

/// A representation of a finite group by rational matrices, stored on every element.
#[derive(Clone, Debug)]
pub struct RationalRep {
    group: Arc<FiniteGroup>,
    matrices: Vec<RatMatrix>,
}

impl RationalRep {
    /// Extends matrices given on generators to the whole group and checks
    /// `ρ(xy) = ρ(x)ρ(y)` on all pairs.
    pub fn from_generators(
        group: &Arc<FiniteGroup>,
        generators: &[(usize, RatMatrix)],
    ) -> Result<Self, RepresentationError> {
        let dim = generators.first().map_or(1, |(_, m)| m.dim());
        if generators.iter().any(|(_, m)| m.dim() != dim) {
            return Err(RepresentationError::DimensionMismatch);
        }
        let n = group.order();
        let mut matrices: Vec<Option<RatMatrix>> = vec![None; n];
        matrices[0] = Some(RatMatrix::identity(dim));
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for (g, m) in generators {
                if *g >= n {
                    return Err(RepresentationError::NotGenerating);
                }
                let y = group.mul(x, *g);
                let prod = matrices[x].as_ref().map(|a| a.mul(m)).expect("visited");
                match &matrices[y] {
                    None => {
                        matrices[y] = Some(prod);
                        queue.push_back(y);
                    }
                    Some(existing) if *existing != prod => {
                        return Err(RepresentationError::NotARepresentation { x, y: *g });
                    }
                    Some(_) => {}
                }
            }
        }
        let matrices: Vec<RatMatrix> = matrices
            .into_iter()
            .collect::<Option<_>>()
            .ok_or(RepresentationError::NotGenerating)?;
        for x in 0..n {
            for y in 0..n {
                if matrices[group.mul(x, y)] != matrices[x].mul(&matrices[y]) {
                    return Err(RepresentationError::NotARepresentation { x, y });
                }
            }
        }
        Ok(RationalRep {
            group: Arc::clone(group),
            matrices,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrices[0].dim()
    }

    pub fn matrix(&self, g: usize) -> &RatMatrix {
        &self.matrices[g]
    }

    pub fn character(&self) -> Vec<BigRational> {
        self.matrices.iter().map(RatMatrix::trace).collect()
    }
}

/// A nonzero `S` with `ρ(φ(x))·S = S·ρ(x)`, normalized so its first nonzero
/// entry is 1, and the function `g ↦ Tr(S·ρ(g))` on every element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Intertwiner {
    pub s: RatMatrix,
    pub values: Vec<BigRational>,
    /// Dimension of the space of intertwiners; 1 for irreducible `ρ`.
    pub solution_dimension: usize,
}

/// `None` when only `S = 0` intertwines `ρ` and `ρ∘φ`.
pub fn intertwiner_class_function(
    rep: &RationalRep,
    phi: &FiniteEndo,
) -> Result<Option<Intertwiner>, RepresentationError> {
    let group = &rep.group;
    if !(Arc::ptr_eq(group, phi.group()) || **group == **phi.group()) {
        return Err(RepresentationError::GroupMismatch);
    }
    let d = rep.dim();
    let unknowns = d * d;
    // for each generator x: ρ(φ(x))·S − S·ρ(x) = 0, one equation per entry
    let mut equations: Vec<Vec<BigRational>> = Vec::new();
    for &x in group.generators() {
        let a = rep.matrix(phi.apply(x));
        let b = rep.matrix(x);
        for r in 0..d {
            for c in 0..d {
                let mut row = vec![BigRational::zero(); unknowns];
                for k in 0..d {
                    // (A·S)[r][c] = Σ_k A[r][k]·S[k][c]
                    row[k * d + c] += a.get(r, k);
                    // (S·B)[r][c] = Σ_k S[r][k]·B[k][c]
                    row[r * d + k] -= b.get(k, c);
                }
                equations.push(row);
            }
        }
    }
    let null = rational_null_space(equations, unknowns);
    let Some(first) = null.first() else {
        return Ok(None);
    };
    let lead = first.iter().find(|x| !x.is_zero()).cloned().unwrap_or_else(BigRational::one);
    let s = RatMatrix {
        dim: d,
        data: first.iter().map(|x| x / &lead).collect(),
    };
    let values: Vec<BigRational> = (0..group.order()).map(|g| s.mul(rep.matrix(g)).trace()).collect();
    let classes = twisted_classes(phi);
    for x in 0..group.order() {
        assert_eq!(
            values[x],
            values[classes.reps()[classes.class_of(x)]],
            "intertwiner trace is not a twisted class function"
        );
    }
    Ok(Some(Intertwiner {
        s,
        values,
        solution_dimension: null.len(),
    }))
}

/// Basis of `{x : A·x = 0}` over ℚ.
fn rational_null_space(mut rows: Vec<Vec<BigRational>>, cols: usize) -> Vec<Vec<BigRational>> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let lead = rows[r][c].clone();
        for x in rows[r].iter_mut() {
            *x /= &lead;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                for j in 0..cols {
                    let v = &f * &rows[r][j];
                    rows[i][j] -= v;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    (0..cols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut x = vec![BigRational::zero(); cols];
            x[free] = BigRational::one();
            for (row, &pc) in pivots.iter().enumerate() {
                x[pc] = -rows[row][free].clone();
            }
            x
        })
        .collect()
}

/// Rank of a family of functions on the group, over ℚ.
pub fn function_rank(functions: &[Vec<BigRational>]) -> usize {
    let cols = functions.first().map_or(0, Vec::len);
    let transposed: Vec<Vec<BigRational>> = (0..cols)
        .map(|g| functions.iter().map(|f| f[g].clone()).collect())
        .collect();
    functions.len() - rational_null_space(transposed, functions.len()).len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::enumerate_endomorphisms;

    fn s3() -> (Arc<FiniteGroup>, usize, usize) {
        let (g, _) = FiniteGroup::build_from_permutations(&[vec![1, 0, 2], vec![1, 2, 0]], 100).unwrap();
        // element 1 = transposition (0 1), element 2 = 3-cycle
        (Arc::new(g), 1, 2)
    }

    fn sign_rep(g: &Arc<FiniteGroup>, t: usize, c: usize) -> RationalRep {
        RationalRep::from_generators(
            g,
            &[
                (t, RatMatrix::from_integers(&[vec![-1]]).unwrap()),
                (c, RatMatrix::from_integers(&[vec![1]]).unwrap()),
            ],
        )
        .unwrap()
    }

    /// The standard representation on `{x ∈ ℚ³ : Σx = 0}` in the basis
    /// `e₀ − e₁, e₁ − e₂`.
    fn standard_rep(g: &Arc<FiniteGroup>, t: usize, c: usize) -> RationalRep {
        // (0 1): e0−e1 ↦ −(e0−e1), e1−e2 ↦ e0−e2 = (e0−e1) + (e1−e2)
        let swap = RatMatrix::from_integers(&[vec![-1, 1], vec![0, 1]]).unwrap();
        // 3-cycle i ↦ i+1: e0−e1 ↦ e1−e2, e1−e2 ↦ e2−e0 = −(e0−e1) − (e1−e2)
        let cycle = RatMatrix::from_integers(&[vec![0, -1], vec![1, -1]]).unwrap();
        RationalRep::from_generators(g, &[(t, swap), (c, cycle)]).unwrap()
    }

    #[test]
    fn trivial_rep() {
        let (g, t, c) = s3();
        let one = RatMatrix::identity(1);
        let rep = RationalRep::from_generators(&g, &[(t, one.clone()), (c, one)]).unwrap();
        for phi in enumerate_endomorphisms(&g, g.generators()).unwrap() {
            let it = intertwiner_class_function(&rep, &phi).unwrap().unwrap();
            assert_eq!(it.s, RatMatrix::identity(1));
            assert!(it.values.iter().all(|v| v.is_one()));
        }
    }

    #[test]
    fn sign_rep_with_identity() {
        let (g, t, c) = s3();
        let rep = sign_rep(&g, t, c);
        let it = intertwiner_class_function(&rep, &FiniteEndo::identity(&g)).unwrap().unwrap();
        assert_eq!(it.s, RatMatrix::identity(1));
        assert_eq!(it.values, rep.character());
    }

    #[test]
    fn standard_rep_with_trivial_endo_has_none() {
        let (g, t, c) = s3();
        let rep = standard_rep(&g, t, c);
        assert!(rep.character()[c] == BigRational::from_integer(BigInt::from(-1)));
        assert_eq!(intertwiner_class_function(&rep, &FiniteEndo::trivial(&g)).unwrap(), None);
        let it = intertwiner_class_function(&rep, &FiniteEndo::identity(&g)).unwrap().unwrap();
        assert_eq!(it.solution_dimension, 1);
        assert_eq!(it.values, rep.character());
    }

    #[test]
    fn inconsistent_generators_are_rejected() {
        let (g, t, c) = s3();
        let err = RationalRep::from_generators(
            &g,
            &[
                (t, RatMatrix::from_integers(&[vec![2]]).unwrap()),
                (c, RatMatrix::from_integers(&[vec![1]]).unwrap()),
            ],
        )
        .unwrap_err();
        assert!(matches!(err, RepresentationError::NotARepresentation { .. }));
        let err = RationalRep::from_generators(&g, &[(t, RatMatrix::identity(1))]).unwrap_err();
        assert_eq!(err, RepresentationError::NotGenerating);
    }

    #[test]
    fn intertwiner_functions_are_independent() {
        let (g, t, c) = s3();
        let one = RatMatrix::identity(1);
        let reps = [
            RationalRep::from_generators(&g, &[(t, one.clone()), (c, one)]).unwrap(),
            sign_rep(&g, t, c),
            standard_rep(&g, t, c),
        ];
        for phi in enumerate_endomorphisms(&g, g.generators()).unwrap() {
            let functions: Vec<Vec<BigRational>> = reps
                .iter()
                .filter_map(|r| intertwiner_class_function(r, &phi).unwrap())
                .map(|it| it.values)
                .collect();
            assert_eq!(function_rank(&functions), functions.len());
            assert_eq!(functions.len(), crate::twisted::reidemeister_number(&phi, 1));
        }
    }
}
