//! Reidemeister numbers of endomorphisms of `ℤⁿ` and of finitely generated
//! abelian groups, computed from cokernels of `I − M`, plus the sublattice
//! arithmetic (Hermite-normalized lattices) used by the extension engine.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::matrix::IntMatrix;
use crate::normal_form::{hermite_normal_form, smith_normal_form, SmithForm};

/// A Reidemeister number: a positive integer or infinity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassCount {
    Finite(BigUint),
    Infinite,
}

impl ClassCount {
    pub fn finite(n: usize) -> Self {
        ClassCount::Finite(BigUint::from(n))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ClassCount::Finite(_))
    }

    pub fn as_finite(&self) -> Option<&BigUint> {
        match self {
            ClassCount::Finite(n) => Some(n),
            ClassCount::Infinite => None,
        }
    }
}

impl fmt::Display for ClassCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassCount::Finite(n) => write!(f, "{n}"),
            ClassCount::Infinite => f.write_str("infinite"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AbelianError {
    NotSquare { rows: usize, cols: usize },
    InfiniteCokernel,
    BadTorsion { index: usize },
    ShapeMismatch { expected: usize, found: usize },
    /// Column `col` has a nonzero free coordinate although it is a torsion generator.
    TorsionToFree { row: usize, col: usize },
    /// The image of torsion generator `col` in coordinate `row` is not a
    /// multiple of `d_row / gcd(d_row, d_col)`.
    IllDefined { row: usize, col: usize },
    NotFullRank { rank: usize, ambient: usize },
}

impl fmt::Display for AbelianError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbelianError::NotSquare { rows, cols } => write!(f, "matrix is {rows}×{cols}, expected square"),
            AbelianError::InfiniteCokernel => f.write_str("cokernel is infinite (determinant zero)"),
            AbelianError::BadTorsion { index } => {
                write!(f, "torsion coefficient {index} must be ≥ 2 and divide the next one")
            }
            AbelianError::ShapeMismatch { expected, found } => {
                write!(f, "matrix has size {found}, expected {expected}")
            }
            AbelianError::TorsionToFree { row, col } => {
                write!(f, "torsion generator {col} has nonzero free coordinate {row}")
            }
            AbelianError::IllDefined { row, col } => {
                write!(f, "entry ({row}, {col}) does not define a homomorphism between the cyclic factors")
            }
            AbelianError::NotFullRank { rank, ambient } => {
                write!(f, "lattice has rank {rank} in ambient rank {ambient}")
            }
        }
    }
}

impl core::error::Error for AbelianError {}

/// `R(φⁿ)` for `φ` given by the square matrix `m` on `ℤⁿ`: `|det(I − mⁿ)|`,
/// infinite when the determinant vanishes.
pub fn reidemeister_number_zn(m: &IntMatrix, power: usize) -> Result<ClassCount, AbelianError> {
    square(m)?;
    let d = m.pow(power).identity_minus().det();
    Ok(if d.is_zero() {
        ClassCount::Infinite
    } else {
        ClassCount::Finite(d.magnitude().clone())
    })
}

fn square(m: &IntMatrix) -> Result<(), AbelianError> {
    if m.is_square() {
        Ok(())
    } else {
        Err(AbelianError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        })
    }
}

/// Representatives of `ℤⁿ / Mℤⁿ`, one per coset: `U⁻¹·a` for `a` ranging over
/// the box `0 ≤ aᵢ < dᵢ` of Smith coordinates, in lexicographic order of `a`.
pub fn coker_representatives(m: &IntMatrix) -> Result<Vec<Vec<BigInt>>, AbelianError> {
    square(m)?;
    if m.det().is_zero() {
        return Err(AbelianError::InfiniteCokernel);
    }
    let snf = smith_normal_form(m);
    let diag = snf.diagonal();
    let n = m.rows();
    let mut out = Vec::new();
    let mut a = vec![BigInt::zero(); n];
    loop {
        out.push(snf.u_inv.apply(&a));
        // odometer over the box, last coordinate fastest
        let mut i = n;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            a[i] += 1;
            if a[i] < diag[i] {
                break;
            }
            a[i] = BigInt::zero();
        }
    }
}

/// Smith coordinates of the coset of `v` in `ℤⁿ / Mℤⁿ`.
pub fn coker_coordinates(snf: &SmithForm, v: &[BigInt]) -> Vec<BigInt> {
    snf.u
        .apply(v)
        .into_iter()
        .zip(snf.diagonal())
        .map(|(x, d)| if d.is_zero() { x } else { x.mod_floor(&d) })
        .collect()
}

/// Rank of `ker(I − M)` over the rationals.
pub fn fixed_subgroup_rank(m: &IntMatrix) -> Result<usize, AbelianError> {
    square(m)?;
    Ok(m.rows() - m.identity_minus().rank())
}

/// `ℤ^rank ⊕ ℤ/d₁ ⊕ … ⊕ ℤ/d_k` with `d₁ | d₂ | …`, each `dᵢ ≥ 2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FgAbelian {
    rank: usize,
    torsion: Vec<BigInt>,
}

impl FgAbelian {
    pub fn new(rank: usize, torsion: Vec<BigInt>) -> Result<Self, AbelianError> {
        for (i, d) in torsion.iter().enumerate() {
            let next_ok = torsion.get(i + 1).is_none_or(|e| e.is_multiple_of(d));
            if *d < BigInt::from(2) || !next_ok {
                return Err(AbelianError::BadTorsion { index: i });
            }
        }
        Ok(FgAbelian { rank, torsion })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn torsion(&self) -> &[BigInt] {
        &self.torsion
    }

    /// Number of coordinates `rank + k`.
    pub fn dimension(&self) -> usize {
        self.rank + self.torsion.len()
    }

    /// Order of coordinate `i`; zero for free coordinates.
    fn modulus(&self, i: usize) -> BigInt {
        if i < self.rank {
            BigInt::zero()
        } else {
            self.torsion[i - self.rank].clone()
        }
    }

    /// Relation matrix: the diagonal of coordinate orders.
    fn relations(&self) -> IntMatrix {
        let n = self.dimension();
        let mut d = IntMatrix::zeros(n, n);
        for i in self.rank..n {
            d[(i, i)] = self.modulus(i);
        }
        d
    }
}

/// An endomorphism of a finitely generated abelian group; column `j` of the
/// matrix is the image of generator `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FgAbelianEndo {
    group: FgAbelian,
    matrix: IntMatrix,
}

impl FgAbelianEndo {
    pub fn new(group: FgAbelian, matrix: IntMatrix) -> Result<Self, AbelianError> {
        square(&matrix)?;
        let n = group.dimension();
        if matrix.rows() != n {
            return Err(AbelianError::ShapeMismatch {
                expected: n,
                found: matrix.rows(),
            });
        }
        for col in group.rank..n {
            let dc = group.modulus(col);
            for row in 0..n {
                let entry = &matrix[(row, col)];
                if row < group.rank {
                    if !entry.is_zero() {
                        return Err(AbelianError::TorsionToFree { row, col });
                    }
                } else {
                    let dr = group.modulus(row);
                    if !entry.is_multiple_of(&(&dr / dr.gcd(&dc))) {
                        return Err(AbelianError::IllDefined { row, col });
                    }
                }
            }
        }
        Ok(FgAbelianEndo { group, matrix })
    }

    pub fn group(&self) -> &FgAbelian {
        &self.group
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    /// The torsion coordinates reduced into `0..d`.
    fn normalized(&self, m: IntMatrix) -> IntMatrix {
        let mut m = m;
        for row in self.group.rank..self.group.dimension() {
            let d = self.group.modulus(row);
            for col in 0..m.cols() {
                m[(row, col)] = m[(row, col)].mod_floor(&d);
            }
        }
        m
    }

    pub fn power(&self, n: usize) -> FgAbelianEndo {
        let mut acc = IntMatrix::identity(self.matrix.rows());
        for _ in 0..n {
            acc = self.normalized(&self.matrix * &acc);
        }
        FgAbelianEndo {
            group: self.group.clone(),
            matrix: acc,
        }
    }
}

/// `|coker(I − φⁿ)|` on `ℤ^r ⊕ ⊕ℤ/dᵢ`: Smith form of `[I − φⁿ | D]` where
/// `D` carries the torsion relations.
pub fn reidemeister_number_fg_abelian(phi: &FgAbelianEndo, power: usize) -> ClassCount {
    let stacked = phi.power(power).matrix.identity_minus().hstack(&phi.group.relations());
    cokernel_order(&stacked)
}

/// Order of `ℤ^rows / (column span)`.
fn cokernel_order(m: &IntMatrix) -> ClassCount {
    let snf = smith_normal_form(m);
    let diag = snf.diagonal();
    if diag.len() < m.rows() || diag.iter().any(Zero::is_zero) {
        return ClassCount::Infinite;
    }
    ClassCount::Finite(diag.iter().map(|d| d.magnitude().clone()).product())
}

/// A full-rank sublattice of `ℤⁿ`, stored by its upper-triangular Hermite basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Lattice {
    basis: IntMatrix,
}

impl Lattice {
    /// The lattice spanned by the columns of `generators`.
    pub fn from_generators(generators: &IntMatrix) -> Result<Self, AbelianError> {
        let hnf = hermite_normal_form(generators);
        let n = generators.rows();
        if hnf.rank() != n {
            return Err(AbelianError::NotFullRank {
                rank: hnf.rank(),
                ambient: n,
            });
        }
        Ok(Lattice { basis: hnf.basis() })
    }

    pub fn full(n: usize) -> Self {
        Lattice {
            basis: IntMatrix::identity(n),
        }
    }

    /// `k·ℤⁿ`.
    pub fn scalar(n: usize, k: i64) -> Self {
        Lattice {
            basis: IntMatrix::scalar(n, k),
        }
    }

    pub fn basis(&self) -> &IntMatrix {
        &self.basis
    }

    pub fn ambient_rank(&self) -> usize {
        self.basis.rows()
    }

    /// `[ℤⁿ : L]`.
    pub fn index(&self) -> BigUint {
        (0..self.ambient_rank())
            .map(|i| self.basis[(i, i)].magnitude().clone())
            .product()
    }

    /// The Hermite diagonal, which bounds the canonical coset box.
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.ambient_rank()).map(|i| self.basis[(i, i)].clone()).collect()
    }

    /// Canonical coset representative: coordinates reduced into `0..hᵢᵢ`,
    /// last coordinate first.
    pub fn reduce(&self, v: &[BigInt]) -> Vec<BigInt> {
        let n = self.ambient_rank();
        let mut v = v.to_vec();
        for i in (0..n).rev() {
            let q = v[i].div_floor(&self.basis[(i, i)]);
            if q.is_zero() {
                continue;
            }
            for (r, x) in v.iter_mut().enumerate().take(i + 1) {
                *x -= &q * &self.basis[(r, i)];
            }
        }
        v
    }

    pub fn contains(&self, v: &[BigInt]) -> bool {
        self.reduce(v).iter().all(Zero::is_zero)
    }

    pub fn contains_lattice(&self, other: &Lattice) -> bool {
        (0..other.ambient_rank()).all(|c| self.contains(&other.basis.column(c)))
    }

    /// `M·L`; fails if `M` is singular.
    pub fn image(&self, m: &IntMatrix) -> Result<Lattice, AbelianError> {
        Lattice::from_generators(&(m * &self.basis))
    }

    /// `{v : M·v ∈ L}`.
    pub fn preimage(&self, m: &IntMatrix) -> Lattice {
        let n = self.ambient_rank();
        let kernel = hermite_normal_form(&m.hstack(&self.basis.neg())).kernel();
        let generators = kernel.row_block(0..n);
        // contains [ℤⁿ : L]·ℤⁿ, so it always has full rank
        Lattice::from_generators(&generators).expect("preimage of a full-rank lattice has full rank")
    }

    pub fn intersect(&self, other: &Lattice) -> Lattice {
        let n = self.ambient_rank();
        let kernel = hermite_normal_form(&self.basis.hstack(&other.basis.neg())).kernel();
        let generators = &self.basis * &kernel.row_block(0..n);
        Lattice::from_generators(&generators).expect("intersection of full-rank lattices has full rank")
    }

    pub fn scaled(&self, k: i64) -> Lattice {
        Lattice {
            basis: self.basis.scale(&BigInt::from(k)),
        }
    }

    /// All canonical coset representatives, lexicographic with the last
    /// coordinate fastest. `None` if the index exceeds `cap`.
    pub fn coset_representatives(&self, cap: usize) -> Option<Vec<Vec<BigInt>>> {
        let index = self.index().to_usize()?;
        if index > cap {
            return None;
        }
        let diag = self.diagonal();
        let n = diag.len();
        let mut out = Vec::with_capacity(index);
        for code in 0..index {
            let mut c = code;
            let mut v = vec![BigInt::zero(); n];
            for i in (0..n).rev() {
                let d = diag[i].to_usize().unwrap_or(1);
                v[i] = BigInt::from(c % d);
                c /= d;
            }
            out.push(v);
        }
        Some(out)
    }

    /// Position of the canonical representative of `v` in
    /// [`Lattice::coset_representatives`].
    pub fn coset_index(&self, v: &[BigInt]) -> usize {
        let r = self.reduce(v);
        let diag = self.diagonal();
        r.iter().zip(&diag).fold(0usize, |acc, (x, d)| {
            acc * d.to_usize().unwrap_or(1) + x.to_usize().unwrap_or(0)
        })
    }
}

/// `H = (I − M)ℤⁿ` and the finite quotient `ℤⁿ / H`, whose order is `R(φ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbelianQuotient {
    pub lattice: Lattice,
    /// Nontrivial invariant factors of `ℤⁿ / H`.
    pub invariant_factors: Vec<BigInt>,
    pub order: BigUint,
}

pub fn abelian_separating_quotient(m: &IntMatrix) -> Result<AbelianQuotient, AbelianError> {
    square(m)?;
    let image = m.identity_minus();
    if image.det().is_zero() {
        return Err(AbelianError::InfiniteCokernel);
    }
    let lattice = Lattice::from_generators(&image)?;
    let invariant_factors: Vec<BigInt> = smith_normal_form(&image)
        .diagonal()
        .into_iter()
        .filter(|d| !d.is_one())
        .collect();
    let order: BigUint = invariant_factors.iter().map(|d| d.magnitude().clone()).product();
    assert_eq!(order, lattice.index(), "quotient order disagrees with the lattice index");
    match reidemeister_number_zn(m, 1)? {
        ClassCount::Finite(r) => assert_eq!(r, order, "quotient order disagrees with R(φ)"),
        ClassCount::Infinite => unreachable!("determinant checked nonzero"),
    }
    Ok(AbelianQuotient {
        lattice,
        invariant_factors,
        order,
    })
}

/// `(ℤ/m)ⁿ` as a dense index set: the vector `(v₀, …, v_{n−1})` has index
/// `Σ vᵢ·m^{n−1−i}`. Returns the group and the endomorphism induced by `M`.
pub fn reduction_mod(m: &IntMatrix, modulus: usize) -> (crate::group::FiniteGroup, Vec<usize>) {
    let n = m.rows();
    let size = modulus.pow(n as u32);
    let decode = |mut x: usize| -> Vec<usize> {
        let mut v = vec![0; n];
        for i in (0..n).rev() {
            v[i] = x % modulus;
            x /= modulus;
        }
        v
    };
    let encode = |v: &[usize]| v.iter().fold(0, |acc, &x| acc * modulus + x);
    let mut mul = vec![0u32; size * size];
    for a in 0..size {
        let va = decode(a);
        for b in 0..size {
            let vb = decode(b);
            let s: Vec<usize> = va.iter().zip(&vb).map(|(x, y)| (x + y) % modulus).collect();
            mul[a * size + b] = encode(&s) as u32;
        }
    }
    let reduced = m.modulo(&BigInt::from(modulus));
    let map = (0..size)
        .map(|a| {
            let v: Vec<BigInt> = decode(a).into_iter().map(BigInt::from).collect();
            let w: Vec<usize> = reduced
                .apply(&v)
                .iter()
                .map(|x| x.mod_floor(&BigInt::from(modulus)).to_usize().unwrap_or(0))
                .collect();
            encode(&w)
        })
        .collect();
    (crate::group::FiniteGroup::from_trusted_table(mul, size), map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::validate_endo;
    use crate::twisted::twisted_classes;
    use alloc::collections::BTreeSet;
    use num_traits::Signed;
    use alloc::sync::Arc;
    use proptest::prelude::*;

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn fin(n: u32) -> ClassCount {
        ClassCount::Finite(BigUint::from(n))
    }

    /// Classes of `v ~ v + u − Mu` on the box `[-r, r]ⁿ`, joining two points
    /// whenever they differ by `(I − M)e` for a basis vector `e`.
    fn box_class_count(m: &IntMatrix, r: i64) -> usize {
        let n = m.rows();
        let side = (2 * r + 1) as usize;
        let total = side.pow(n as u32);
        let decode = |mut x: usize| -> Vec<i64> {
            let mut v = vec![0; n];
            for c in v.iter_mut().rev() {
                *c = (x % side) as i64 - r;
                x /= side;
            }
            v
        };
        let encode = |v: &[i64]| -> Option<usize> {
            v.iter().try_fold(0usize, |acc, &c| {
                (c.abs() <= r).then(|| acc * side + (c + r) as usize)
            })
        };
        let step = m.identity_minus();
        let mut parent: Vec<usize> = (0..total).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            let mut x = x;
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for a in 0..total {
            let v = decode(a);
            for j in 0..n {
                let col: Vec<i64> = step.column(j).iter().map(|x| x.to_i64().unwrap()).collect();
                let w: Vec<i64> = v.iter().zip(&col).map(|(x, y)| x + y).collect();
                if let Some(b) = encode(&w) {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    parent[ra] = rb;
                }
            }
        }
        (0..total).filter(|&x| find(&mut parent, x) == x).count()
    }

    #[test]
    fn zn_examples() {
        assert_eq!(reidemeister_number_zn(&IntMatrix::from_i64(&[&[1]]), 1).unwrap(), ClassCount::Infinite);
        assert_eq!(reidemeister_number_zn(&IntMatrix::from_i64(&[&[-1]]), 1).unwrap(), fin(2));
        assert_eq!(box_class_count(&IntMatrix::from_i64(&[&[-1]]), 10), 2);
        let cat = IntMatrix::from_i64(&[&[2, 1], &[1, 1]]);
        assert_eq!(reidemeister_number_zn(&cat, 1).unwrap(), fin(1));
        assert_eq!(box_class_count(&cat, 4), 1);
        assert!(reidemeister_number_zn(&IntMatrix::zeros(2, 3), 1).is_err());
    }

    #[test]
    fn doubling_sequence() {
        let m = IntMatrix::from_i64(&[&[2]]);
        let seq: Vec<ClassCount> = (1..=5).map(|n| reidemeister_number_zn(&m, n).unwrap()).collect();
        assert_eq!(seq, [fin(1), fin(3), fin(7), fin(15), fin(31)]);
    }

    #[test]
    fn coker_reps() {
        let reps = coker_representatives(&IntMatrix::identity(2)).unwrap();
        assert_eq!(reps, vec![vec![big(0), big(0)]]);
        let reps = coker_representatives(&IntMatrix::from_i64(&[&[2]])).unwrap();
        assert_eq!(reps, vec![vec![big(0)], vec![big(1)]]);
        let m = IntMatrix::scalar(2, 3);
        let reps = coker_representatives(&m).unwrap();
        assert_eq!(reps.len(), 9);
        let residues: BTreeSet<(i64, i64)> = reps
            .iter()
            .map(|v| (v[0].mod_floor(&big(3)).to_i64().unwrap(), v[1].mod_floor(&big(3)).to_i64().unwrap()))
            .collect();
        assert_eq!(residues.len(), 9);
        assert_eq!(coker_representatives(&IntMatrix::zeros(1, 1)), Err(AbelianError::InfiniteCokernel));
    }

    #[test]
    fn fixed_rank() {
        assert_eq!(fixed_subgroup_rank(&IntMatrix::identity(3)).unwrap(), 3);
        assert_eq!(fixed_subgroup_rank(&IntMatrix::from_i64(&[&[-1]])).unwrap(), 0);
        assert_eq!(fixed_subgroup_rank(&IntMatrix::from_i64(&[&[2, 1], &[1, 1]])).unwrap(), 0);
    }

    #[test]
    fn fg_abelian_examples() {
        let z4 = FgAbelian::new(0, vec![big(4)]).unwrap();
        let id = FgAbelianEndo::new(z4.clone(), IntMatrix::identity(1)).unwrap();
        assert_eq!(reidemeister_number_fg_abelian(&id, 1), fin(4));
        let double = FgAbelianEndo::new(z4, IntMatrix::from_i64(&[&[2]])).unwrap();
        assert_eq!(reidemeister_number_fg_abelian(&double, 1), fin(1));
        let g4 = Arc::new(crate::group::FiniteGroup::cyclic(4));
        let phi = validate_endo(&g4, vec![0, 2, 0, 2]).unwrap();
        assert_eq!(twisted_classes(&phi).len(), 1);

        let mixed = FgAbelian::new(1, vec![big(2)]).unwrap();
        let phi = FgAbelianEndo::new(mixed.clone(), IntMatrix::from_i64(&[&[-1, 0], &[0, 1]])).unwrap();
        assert_eq!(reidemeister_number_fg_abelian(&phi, 1), fin(4));
        // truncate ℤ to ℤ/8: x ↦ -x on ℤ/8 ⊕ ℤ/2 leaves 8 classes on the
        // cyclic part collapsed to 2, times 2 on ℤ/2
        let truncated = FgAbelianEndo::new(
            FgAbelian::new(0, vec![big(2), big(8)]).unwrap(),
            IntMatrix::from_i64(&[&[1, 0], &[0, -1]]),
        )
        .unwrap();
        assert_eq!(reidemeister_number_fg_abelian(&truncated, 1), fin(4));
        let g = Arc::new(crate::group::FiniteGroup::direct_product(
            &crate::group::FiniteGroup::cyclic(8),
            &crate::group::FiniteGroup::cyclic(2),
        ));
        let map = (0..16).map(|x| ((8 - x / 2) % 8) * 2 + x % 2).collect();
        assert_eq!(twisted_classes(&validate_endo(&g, map).unwrap()).len(), 4);

        let identity_free = FgAbelianEndo::new(mixed, IntMatrix::identity(2)).unwrap();
        assert_eq!(reidemeister_number_fg_abelian(&identity_free, 1), ClassCount::Infinite);
    }

    #[test]
    fn fg_abelian_validation() {
        assert_eq!(FgAbelian::new(0, vec![big(2), big(3)]), Err(AbelianError::BadTorsion { index: 0 }));
        assert_eq!(FgAbelian::new(0, vec![big(1)]), Err(AbelianError::BadTorsion { index: 0 }));
        let g = FgAbelian::new(1, vec![big(2), big(4)]).unwrap();
        // torsion generator of ℤ/2 cannot go to the free part
        let m = IntMatrix::from_i64(&[&[1, 1, 0], &[0, 1, 0], &[0, 0, 1]]);
        assert_eq!(
            FgAbelianEndo::new(g.clone(), m),
            Err(AbelianError::TorsionToFree { row: 0, col: 1 })
        );
        // ℤ/2 → ℤ/4 must hit a multiple of 2
        let m = IntMatrix::from_i64(&[&[1, 0, 0], &[0, 1, 0], &[0, 1, 1]]);
        assert_eq!(FgAbelianEndo::new(g.clone(), m), Err(AbelianError::IllDefined { row: 2, col: 1 }));
        let m = IntMatrix::from_i64(&[&[1, 0, 0], &[0, 1, 0], &[0, 2, 1]]);
        assert!(FgAbelianEndo::new(g, m).is_ok());
    }

    #[test]
    fn separating_quotients() {
        let q = abelian_separating_quotient(&IntMatrix::zeros(2, 2)).unwrap();
        assert_eq!(q.lattice, Lattice::full(2));
        assert_eq!(q.order, BigUint::one());
        let q = abelian_separating_quotient(&IntMatrix::from_i64(&[&[-1]])).unwrap();
        assert_eq!(q.lattice, Lattice::scalar(1, 2));
        assert_eq!(q.invariant_factors, [big(2)]);
        let q = abelian_separating_quotient(&IntMatrix::from_i64(&[&[2, 1], &[1, 1]])).unwrap();
        assert_eq!(q.lattice, Lattice::full(2));
        assert_eq!(
            abelian_separating_quotient(&IntMatrix::identity(1)),
            Err(AbelianError::InfiniteCokernel)
        );
    }

    #[test]
    fn lattice_arithmetic() {
        let a = Lattice::scalar(2, 2);
        let b = Lattice::from_generators(&IntMatrix::from_i64(&[&[3, 0], &[0, 1]])).unwrap();
        let c = a.intersect(&b);
        assert_eq!(c, Lattice::from_generators(&IntMatrix::from_i64(&[&[6, 0], &[0, 2]])).unwrap());
        assert_eq!(c.index(), BigUint::from(12u32));
        assert!(a.contains_lattice(&c) && b.contains_lattice(&c));
        // preimage of 2ℤ under x ↦ 2x is ℤ
        let p = Lattice::scalar(1, 2).preimage(&IntMatrix::from_i64(&[&[2]]));
        assert_eq!(p, Lattice::full(1));
        let p = Lattice::scalar(1, 4).preimage(&IntMatrix::from_i64(&[&[2]]));
        assert_eq!(p, Lattice::scalar(1, 2));
        // singular map: preimage of 3ℤ² under projection to the first coordinate
        let p = Lattice::scalar(2, 3).preimage(&IntMatrix::from_i64(&[&[1, 0], &[0, 0]]));
        assert_eq!(p, Lattice::from_generators(&IntMatrix::from_i64(&[&[3, 0], &[0, 1]])).unwrap());
        let reps = c.coset_representatives(100).unwrap();
        assert_eq!(reps.len(), 12);
        for (i, r) in reps.iter().enumerate() {
            assert_eq!(c.coset_index(r), i);
            assert_eq!(&c.reduce(r), r);
        }
    }

    fn small_matrix() -> impl Strategy<Value = Vec<Vec<i64>>> {
        (1usize..=3).prop_flat_map(|n| proptest::collection::vec(proptest::collection::vec(-3i64..=3, n), n))
    }

    proptest! {
        #[test]
        fn finite_quotient_consistency(m in small_matrix(), modulus in 2usize..=5) {
            let a = IntMatrix::from_rows(&m).unwrap();
            let n = a.rows();
            let torsion = vec![big(modulus as i64); n];
            let phi = FgAbelianEndo::new(FgAbelian::new(0, torsion).unwrap(), a.modulo(&big(modulus as i64))).unwrap();
            let expected = reidemeister_number_fg_abelian(&phi, 1);
            let (g, map) = reduction_mod(&a, modulus);
            let endo = validate_endo(&Arc::new(g), map).unwrap();
            prop_assert_eq!(expected, ClassCount::finite(twisted_classes(&endo).len()));
        }

        #[test]
        fn power_consistency(m in small_matrix(), a in 1usize..4, b in 1usize..4) {
            let x = IntMatrix::from_rows(&m).unwrap();
            prop_assert_eq!(
                reidemeister_number_zn(&x, a * b).unwrap(),
                reidemeister_number_zn(&x.pow(a), b).unwrap()
            );
        }

        #[test]
        fn multiplicative_on_direct_sums(m1 in small_matrix(), m2 in small_matrix()) {
            let a = IntMatrix::from_rows(&m1).unwrap();
            let b = IntMatrix::from_rows(&m2).unwrap();
            let sum = crate::matrix::block_diagonal(&a, &b);
            let (ra, rb) = (reidemeister_number_zn(&a, 1).unwrap(), reidemeister_number_zn(&b, 1).unwrap());
            if let (ClassCount::Finite(x), ClassCount::Finite(y)) = (&ra, &rb) {
                prop_assert_eq!(reidemeister_number_zn(&sum, 1).unwrap(), ClassCount::Finite(x * y));
            }
        }

        #[test]
        fn coker_reps_are_distinct_cosets(m in small_matrix()) {
            let a = IntMatrix::from_rows(&m).unwrap().identity_minus();
            prop_assume!(!a.det().is_zero() && a.det().abs() <= big(200));
            let reps = coker_representatives(&a).unwrap();
            prop_assert_eq!(BigInt::from(reps.len()), a.det().abs());
            let lattice = Lattice::from_generators(&a).unwrap();
            let canon: BTreeSet<Vec<BigInt>> = reps.iter().map(|v| lattice.reduce(v)).collect();
            prop_assert_eq!(canon.len(), reps.len());
        }
    }
}
