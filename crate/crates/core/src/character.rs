//! Exact character tables (Burnside-Dixon) and the twisted Burnside-Frobenius
//! comparison: `R(φⁿ)` against the number of irreducible characters `χ` with
//! `χ∘φⁿ = χ`.
//!
//! The table is computed over a prime field `𝔽_p` with `p ≡ 1 (mod e)`,
//! `e` the group exponent: class-sum structure constants give commuting
//! matrices whose common eigenvectors are the central characters, and each
//! character value is lifted to `ℤ[ζ_e]` from the eigenvalue multiplicities of
//! the element it is evaluated on.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::cyclotomic::{Cyc, CyclotomicField};
use crate::group::{ClassPartition, FiniteEndo, FiniteGroup};
use crate::modp::{dixon_prime, PrimeField};
use crate::twisted::{burnside_average, reidemeister_number, twisted_classes, TwistedError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CharacterError {
    CapExceeded { order: usize, cap: usize },
    /// The modular computation did not lift; the prime is too small.
    LiftFailure { prime: u64 },
    /// A table invariant failed after lifting.
    Invariant(&'static str),
    TableMismatch,
    PreconditionNotFPoint { character: usize, power: usize },
    Twisted(TwistedError),
}

impl fmt::Display for CharacterError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CharacterError::CapExceeded { order, cap } => {
                write!(f, "group order {order} exceeds the character table cap {cap}")
            }
            CharacterError::LiftFailure { prime } => write!(f, "character values did not lift from 𝔽_{prime}"),
            CharacterError::Invariant(what) => write!(f, "character table invariant failed: {what}"),
            CharacterError::TableMismatch => f.write_str("character table belongs to another group"),
            CharacterError::PreconditionNotFPoint { character, power } => {
                write!(f, "character {character} is not fixed by the {power}-th power of the endomorphism")
            }
            CharacterError::Twisted(e) => e.fmt(f),
        }
    }
}

impl core::error::Error for CharacterError {}

impl From<TwistedError> for CharacterError {
    fn from(e: TwistedError) -> Self {
        CharacterError::Twisted(e)
    }
}

/// Irreducible characters of a finite group with exact cyclotomic values.
#[derive(Clone, Debug)]
pub struct CharTable {
    group: Arc<FiniteGroup>,
    classes: ClassPartition,
    class_sizes: Vec<usize>,
    field: CyclotomicField,
    /// `values[i][c]` is `χ_i` on class `c`.
    values: Vec<Vec<Cyc>>,
    degrees: Vec<usize>,
    prime: u64,
}

impl CharTable {
    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn classes(&self) -> &ClassPartition {
        &self.classes
    }

    pub fn class_sizes(&self) -> &[usize] {
        &self.class_sizes
    }

    /// Number of classes, equal to the number of irreducible characters.
    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    pub fn field(&self) -> &CyclotomicField {
        &self.field
    }

    pub fn values(&self) -> &[Vec<Cyc>] {
        &self.values
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    /// The prime used for the modular computation.
    pub fn prime(&self) -> u64 {
        self.prime
    }

    /// `χ_i(g)`.
    pub fn value(&self, i: usize, g: usize) -> &Cyc {
        &self.values[i][self.classes.class_of(g)]
    }

    /// `|G|·⟨a, b⟩ = Σ_c |C|·a(c)·conj(b(c))` for class functions given on classes.
    pub fn scaled_inner_product(&self, a: &[Cyc], b: &[Cyc]) -> Cyc {
        let f = &self.field;
        a.iter()
            .zip(b)
            .zip(&self.class_sizes)
            .fold(f.zero(), |acc, ((x, y), &size)| {
                f.add(&acc, &f.scale(&f.mul(x, &f.conj(y)), size as i64))
            })
    }

    /// `χ_i ∘ ψ` as values on classes.
    pub fn precompose(&self, i: usize, psi: &FiniteEndo) -> Vec<Cyc> {
        self.classes
            .reps()
            .iter()
            .map(|&g| self.value(i, psi.apply(g)).clone())
            .collect()
    }

    /// Row orthogonality, the degree-square sum and the identity column,
    /// all checked exactly.
    pub fn verify(&self) -> Result<(), CharacterError> {
        let n = self.group.order() as i64;
        let f = &self.field;
        let k = self.len();
        for i in 0..k {
            for j in 0..k {
                let ip = self.scaled_inner_product(&self.values[i], &self.values[j]);
                let expected = if i == j { n } else { 0 };
                if ip != f.integer(expected) {
                    return Err(CharacterError::Invariant("row orthogonality"));
                }
            }
        }
        if self.degrees.iter().map(|d| (d * d) as i64).sum::<i64>() != n {
            return Err(CharacterError::Invariant("sum of squared degrees"));
        }
        let identity_class = self.classes.class_of(self.group.identity());
        for (row, &d) in self.values.iter().zip(&self.degrees) {
            if row[identity_class] != f.integer(d as i64) {
                return Err(CharacterError::Invariant("identity column"));
            }
        }
        Ok(())
    }
}

/// Computes the character table of `group` (order at most `cap`).
///
/// Rows are ordered by degree, the trivial character first, then by the
/// coordinate vectors of their values.
pub fn character_table(group: &Arc<FiniteGroup>, cap: usize) -> Result<CharTable, CharacterError> {
    let n = group.order();
    if n > cap {
        return Err(CharacterError::CapExceeded { order: n, cap });
    }
    let classes = group.conjugacy_classes();
    let k = classes.len();
    let sizes = classes.class_sizes();
    let members = classes.classes();
    let reps = classes.reps().to_vec();
    let exponent = group.exponent();
    let prime = dixon_prime(exponent as u64, n as u64);
    let fp = PrimeField::new(prime);

    // structure constants: M_i[j][l] = #{(x, y) ∈ C_i × C_j : x·y = z_l}
    let mut class_matrices = vec![vec![vec![0u64; k]; k]; k];
    for (l, &z) in reps.iter().enumerate() {
        for (i, class) in members.iter().enumerate() {
            for &x in class {
                let j = classes.class_of(group.mul(group.inv(x), z));
                class_matrices[i][j][l] += 1;
            }
        }
    }
    for m in class_matrices.iter_mut() {
        for row in m.iter_mut() {
            for x in row.iter_mut() {
                *x %= prime;
            }
        }
    }

    let eigenvectors = common_eigenvectors(fp, &class_matrices, k).ok_or(CharacterError::LiftFailure { prime })?;

    let inverse_class: Vec<usize> = reps.iter().map(|&g| classes.class_of(group.inv(g))).collect();
    let sqrt_bound = (0..=n).take_while(|d| d * d <= n).last().unwrap_or(1);
    let z = fp.primitive_root_of_unity(exponent as u64);
    let e_inv = fp.inv(fp.from_usize(exponent));
    // power maps: class of g^t for each class rep and t < e
    let power_classes: Vec<Vec<usize>> = reps
        .iter()
        .map(|&g| {
            let mut x = group.identity();
            (0..exponent)
                .map(|_| {
                    let c = classes.class_of(x);
                    x = group.mul(x, g);
                    c
                })
                .collect()
        })
        .collect();

    let field = CyclotomicField::new(exponent);
    let mut rows: Vec<(usize, Vec<Cyc>)> = Vec::with_capacity(k);
    for mut w in eigenvectors {
        let lead = w[classes.class_of(group.identity())];
        if lead == 0 {
            return Err(CharacterError::LiftFailure { prime });
        }
        let lead_inv = fp.inv(lead);
        w.iter_mut().for_each(|x| *x = fp.mul(*x, lead_inv));
        // χ(1)² = |G| / Σ_l ω_l·ω_{l*} / |C_l|
        let denom = (0..k).fold(0, |acc, l| {
            let t = fp.mul(fp.mul(w[l], w[inverse_class[l]]), fp.inv(fp.from_usize(sizes[l])));
            fp.add(acc, t)
        });
        if denom == 0 {
            return Err(CharacterError::LiftFailure { prime });
        }
        let square = fp.mul(fp.from_usize(n), fp.inv(denom));
        let degree = (1..=sqrt_bound)
            .find(|&d| fp.from_usize(d * d) == square)
            .ok_or(CharacterError::LiftFailure { prime })?;
        let theta: Vec<u64> = (0..k)
            .map(|l| fp.mul(fp.mul(fp.from_usize(degree), w[l]), fp.inv(fp.from_usize(sizes[l]))))
            .collect();
        // eigenvalue multiplicities of ρ(g): m_j = (1/e)·Σ_t θ(g^t)·z^{−jt}
        let mut values = Vec::with_capacity(k);
        for powers in &power_classes {
            let mut coeffs = vec![0i64; exponent];
            for (j, c) in coeffs.iter_mut().enumerate() {
                let zj_inv = fp.inv(fp.pow(z, j as u64));
                let mut acc = 0;
                let mut step = 1;
                for &pc in powers {
                    acc = fp.add(acc, fp.mul(theta[pc], step));
                    step = fp.mul(step, zj_inv);
                }
                let m = fp.mul(acc, e_inv);
                if m as usize > degree {
                    return Err(CharacterError::LiftFailure { prime });
                }
                *c = m as i64;
            }
            if coeffs.iter().sum::<i64>() != degree as i64 {
                return Err(CharacterError::LiftFailure { prime });
            }
            values.push(field.from_root_coefficients(&coeffs));
        }
        rows.push((degree, values));
    }
    let trivial: Vec<Cyc> = (0..k).map(|_| field.integer(1)).collect();
    rows.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then_with(|| (a.1 != trivial).cmp(&(b.1 != trivial)))
            .then_with(|| a.1.cmp(&b.1))
    });
    let table = CharTable {
        group: Arc::clone(group),
        classes,
        class_sizes: sizes,
        field,
        degrees: rows.iter().map(|r| r.0).collect(),
        values: rows.into_iter().map(|r| r.1).collect(),
        prime,
    };
    table.verify()?;
    Ok(table)
}

/// Splits `𝔽_p^k` into common eigenlines of the commuting matrices; returns
/// one spanning vector per line, or `None` if some space fails to split.
fn common_eigenvectors(fp: PrimeField, matrices: &[Vec<Vec<u64>>], k: usize) -> Option<Vec<Vec<u64>>> {
    // subspaces as lists of basis column vectors
    let identity: Vec<Vec<u64>> = (0..k)
        .map(|i| (0..k).map(|j| u64::from(i == j)).collect())
        .collect();
    let mut spaces = vec![identity];
    for m in matrices {
        if spaces.iter().all(|s| s.len() == 1) {
            break;
        }
        let mut next = Vec::new();
        for basis in spaces {
            if basis.len() == 1 {
                next.push(basis);
                continue;
            }
            next.extend(split_space(fp, m, &basis)?);
        }
        spaces = next;
    }
    if spaces.iter().any(|s| s.len() != 1) {
        return None;
    }
    Some(spaces.into_iter().map(|mut s| s.pop().unwrap_or_default()).collect())
}

/// Eigenspaces of `m` restricted to the invariant subspace spanned by `basis`.
fn split_space(fp: PrimeField, m: &[Vec<u64>], basis: &[Vec<u64>]) -> Option<Vec<Vec<Vec<u64>>>> {
    let d = basis.len();
    let k = m.len();
    let apply = |v: &[u64]| -> Vec<u64> {
        (0..k)
            .map(|r| (0..k).fold(0, |acc, c| fp.add(acc, fp.mul(m[r][c], v[c]))))
            .collect()
    };
    // coordinates of m·b_a in the basis: solve [b_1 … b_d | m·b_a]
    let images: Vec<Vec<u64>> = basis.iter().map(|b| apply(b)).collect();
    let mut system: Vec<Vec<u64>> = (0..k)
        .map(|r| {
            let mut row: Vec<u64> = basis.iter().map(|b| b[r]).collect();
            row.extend(images.iter().map(|img| img[r]));
            row
        })
        .collect();
    let pivots = fp.rref(&mut system);
    if pivots.len() != d || pivots.iter().enumerate().any(|(i, &p)| p != i) {
        return None;
    }
    // restricted[b][a]: coefficient of b_b in m·b_a
    let restricted: Vec<Vec<u64>> = (0..d).map(|b| (0..d).map(|a| system[b][d + a]).collect()).collect();
    let poly = fp.charpoly(&restricted);
    let mut out = Vec::new();
    let mut found = 0;
    for lambda in 0..fp.p {
        if fp.eval(&poly, lambda) != 0 {
            continue;
        }
        let shifted: Vec<Vec<u64>> = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| fp.sub(restricted[i][j], if i == j { lambda } else { 0 }))
                    .collect()
            })
            .collect();
        let null = fp.null_space(&shifted, d);
        found += null.len();
        let vectors = null
            .iter()
            .map(|coords| {
                (0..k)
                    .map(|r| (0..d).fold(0, |acc, a| fp.add(acc, fp.mul(coords[a], basis[a][r]))))
                    .collect()
            })
            .collect();
        out.push(vectors);
        if found == d {
            break;
        }
    }
    // the class algebra is split semisimple mod p, so the eigenspaces fill the space
    (found == d).then_some(out)
}

/// Irreducible characters fixed by precomposition with `φⁿ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FPointReport {
    pub fixed_character_ids: Vec<usize>,
    pub count: usize,
    pub power: usize,
}

pub fn f_point_count(phi: &FiniteEndo, table: &CharTable, power: usize) -> Result<FPointReport, CharacterError> {
    if !same_group(phi, table) {
        return Err(CharacterError::TableMismatch);
    }
    let psi = phi.iterate(power);
    let fixed_character_ids: Vec<usize> = (0..table.len())
        .filter(|&i| table.precompose(i, &psi) == table.values[i])
        .collect();
    Ok(FPointReport {
        count: fixed_character_ids.len(),
        fixed_character_ids,
        power,
    })
}

fn same_group(phi: &FiniteEndo, table: &CharTable) -> bool {
    Arc::ptr_eq(phi.group(), &table.group) || **phi.group() == *table.group
}

/// `(n, R(φⁿ), #fixed characters of φⁿ)` for `n = 1..=max_power`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TbftReport {
    pub rows: Vec<(usize, usize, usize)>,
    pub pass: bool,
}

pub fn tbft_verify(phi: &FiniteEndo, table: &CharTable, max_power: usize) -> Result<TbftReport, CharacterError> {
    let mut rows = Vec::with_capacity(max_power);
    for n in 1..=max_power {
        let r = reidemeister_number(phi, n);
        let fixed = f_point_count(phi, table, n)?.count;
        rows.push((n, r, fixed));
    }
    let pass = rows.iter().all(|&(_, r, f)| r == f);
    Ok(TbftReport { rows, pass })
}

/// `|G|·⟨χ∘φᵐ, χ∘φᵐ⟩` for `m = 0..=max_iterate`, for a character fixed by `φⁿ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PersistenceReport {
    pub character: usize,
    pub power: usize,
    /// `⟨χ∘φᵐ, χ∘φᵐ⟩` as a rational integer when it is one.
    pub norms: Vec<Option<i64>>,
    pub pass: bool,
}

pub fn irreducibility_persistence(
    phi: &FiniteEndo,
    table: &CharTable,
    character: usize,
    power: usize,
    max_iterate: usize,
) -> Result<PersistenceReport, CharacterError> {
    if !same_group(phi, table) {
        return Err(CharacterError::TableMismatch);
    }
    if table.precompose(character, &phi.iterate(power)) != table.values[character] {
        return Err(CharacterError::PreconditionNotFPoint { character, power });
    }
    let n = table.group.order() as i64;
    let norms: Vec<Option<i64>> = (0..=max_iterate)
        .map(|m| {
            let pulled = table.precompose(character, &phi.iterate(m));
            let scaled = table.scaled_inner_product(&pulled, &pulled);
            table
                .field
                .as_integer(&scaled)
                .filter(|v| v % n == 0)
                .map(|v| v / n)
        })
        .collect();
    let pass = norms.iter().all(|v| *v == Some(1));
    Ok(PersistenceReport {
        character,
        power,
        norms,
        pass,
    })
}

/// Dimension of the space of twisted class functions: the number of twisted
/// classes, cross-checked against the Burnside average.
pub fn twisted_class_function_dimension(phi: &FiniteEndo) -> Result<usize, CharacterError> {
    let classes = twisted_classes(phi).len();
    let average = burnside_average(phi)?;
    if classes != average {
        return Err(CharacterError::Invariant("twisted class count differs from the Burnside average"));
    }
    Ok(classes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::enumerate_endomorphisms;

    fn perm_group(gens: &[Vec<usize>]) -> Arc<FiniteGroup> {
        Arc::new(FiniteGroup::build_from_permutations(gens, 1000).unwrap().0)
    }

    fn s3() -> Arc<FiniteGroup> {
        perm_group(&[vec![1, 0, 2], vec![1, 2, 0]])
    }

    fn q8() -> Arc<FiniteGroup> {
        perm_group(&[vec![2, 3, 1, 0, 6, 7, 5, 4], vec![4, 5, 7, 6, 1, 0, 2, 3]])
    }

    fn d4() -> Arc<FiniteGroup> {
        perm_group(&[vec![1, 2, 3, 0], vec![2, 1, 0, 3]])
    }

    #[test]
    fn z2_table() {
        let g = Arc::new(FiniteGroup::cyclic(2));
        let t = character_table(&g, 100).unwrap();
        let f = t.field();
        assert_eq!(t.degrees(), [1, 1]);
        assert_eq!(t.values()[0], [f.integer(1), f.integer(1)]);
        assert_eq!(t.values()[1], [f.integer(1), f.integer(-1)]);
    }

    #[test]
    fn s3_table() {
        let g = s3();
        let t = character_table(&g, 100).unwrap();
        let f = t.field();
        assert_eq!(t.degrees(), [1, 1, 2]);
        let transposition = (0..6).find(|&x| g.element_order(x) == 2).unwrap();
        let three_cycle = (0..6).find(|&x| g.element_order(x) == 3).unwrap();
        assert_eq!(*t.value(2, 0), f.integer(2));
        assert_eq!(*t.value(2, transposition), f.integer(0));
        assert_eq!(*t.value(2, three_cycle), f.integer(-1));
        assert_eq!(*t.value(1, transposition), f.integer(-1));
    }

    #[test]
    fn q8_and_cyclic_tables() {
        let t = character_table(&q8(), 100).unwrap();
        assert_eq!(t.degrees(), [1, 1, 1, 1, 2]);
        for n in 1..=12 {
            let t = character_table(&Arc::new(FiniteGroup::cyclic(n)), 100).unwrap();
            assert_eq!(t.degrees(), vec![1; n]);
        }
    }

    #[test]
    fn cap_is_enforced() {
        assert_eq!(
            character_table(&s3(), 5).unwrap_err(),
            CharacterError::CapExceeded { order: 6, cap: 5 }
        );
    }

    #[test]
    fn f_points_of_identity_and_trivial() {
        for g in [s3(), q8(), d4()] {
            let t = character_table(&g, 100).unwrap();
            assert_eq!(f_point_count(&FiniteEndo::identity(&g), &t, 1).unwrap().count, t.len());
            let r = f_point_count(&FiniteEndo::trivial(&g), &t, 1).unwrap();
            assert_eq!(r.fixed_character_ids, [0]);
        }
    }

    #[test]
    fn tbft_on_small_groups() {
        let z2 = Arc::new(FiniteGroup::cyclic(2));
        let t = character_table(&z2, 100).unwrap();
        let r = tbft_verify(&FiniteEndo::identity(&z2), &t, 3).unwrap();
        assert_eq!(r.rows, [(1, 2, 2), (2, 2, 2), (3, 2, 2)]);
        assert!(r.pass);
        let g = s3();
        let t = character_table(&g, 100).unwrap();
        for phi in enumerate_endomorphisms(&g, g.generators()).unwrap() {
            assert!(tbft_verify(&phi, &t, 4).unwrap().pass);
        }
        // endomorphism collapsing onto {e, (0 1)}
        let collapse = enumerate_endomorphisms(&g, g.generators())
            .unwrap()
            .into_iter()
            .find(|f| f.image().len() == 2)
            .unwrap();
        assert_eq!(
            f_point_count(&collapse, &t, 1).unwrap().count,
            reidemeister_number(&collapse, 1)
        );
        let d = d4();
        let t = character_table(&d, 100).unwrap();
        assert_eq!(tbft_verify(&FiniteEndo::identity(&d), &t, 1).unwrap().rows, [(1, 5, 5)]);
    }

    #[test]
    fn persistence() {
        let g = s3();
        let t = character_table(&g, 100).unwrap();
        for i in 0..t.len() {
            let r = irreducibility_persistence(&FiniteEndo::identity(&g), &t, i, 1, 4).unwrap();
            assert!(r.pass);
        }
        let r = irreducibility_persistence(&FiniteEndo::trivial(&g), &t, 0, 1, 4).unwrap();
        assert!(r.pass);
        assert_eq!(
            irreducibility_persistence(&FiniteEndo::trivial(&g), &t, 2, 1, 4).unwrap_err(),
            CharacterError::PreconditionNotFPoint { character: 2, power: 1 }
        );
    }

    #[test]
    fn class_function_dimension() {
        let g = s3();
        assert_eq!(twisted_class_function_dimension(&FiniteEndo::identity(&g)).unwrap(), 3);
        assert_eq!(twisted_class_function_dimension(&FiniteEndo::trivial(&g)).unwrap(), 1);
        let d = d4();
        for phi in enumerate_endomorphisms(&d, d.generators()).unwrap() {
            assert_eq!(twisted_class_function_dimension(&phi).unwrap(), reidemeister_number(&phi, 1));
        }
    }

    #[test]
    fn fixed_count_is_shift_invariant() {
        let g = d4();
        let t = character_table(&g, 100).unwrap();
        for phi in enumerate_endomorphisms(&g, g.generators()).unwrap() {
            let base = f_point_count(&phi, &t, 1).unwrap().count;
            for x in 0..g.order() {
                let shifted = FiniteEndo::inner(&g, x).compose(&phi).unwrap();
                assert_eq!(f_point_count(&shifted, &t, 1).unwrap().count, base);
            }
        }
    }
}
