//! Reidemeister classes of endomorphisms of finite groups.
//!
//! Classes are orbits of the action `y ↦ x·y·φ(x)⁻¹`. Besides the orbit
//! enumeration this module carries an independent Burnside-average count and
//! checkers for the structural facts about classes (kernel cosets, shifts,
//! quotients, restriction bounds) used by the verification corpus.

use alloc::collections::BTreeSet;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::group::{ClassPartition, FiniteEndo, FiniteGroup, GroupError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TwistedError {
    /// The Burnside average was not an integer; indicates a bug.
    NonIntegerAverage { sum: usize, order: usize },
    NotNormal { g: usize, h: usize },
    NotInvariant { h: usize },
    Group(GroupError),
}

impl fmt::Display for TwistedError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TwistedError::NonIntegerAverage { sum, order } => {
                write!(f, "fixed-point sum {sum} is not divisible by the group order {order}")
            }
            TwistedError::NotNormal { g, h } => write!(f, "subgroup is not normal: conjugating {h} by {g} leaves it"),
            TwistedError::NotInvariant { h } => write!(f, "subgroup is not invariant: the image of {h} leaves it"),
            TwistedError::Group(e) => e.fmt(f),
        }
    }
}

impl core::error::Error for TwistedError {}

impl From<GroupError> for TwistedError {
    fn from(e: GroupError) -> Self {
        match e {
            GroupError::NotNormal { g, h } => TwistedError::NotNormal { g, h },
            other => TwistedError::Group(other),
        }
    }
}

/// Twisted classes of `φⁿ` and their number.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReidemeisterReport {
    pub partition: ClassPartition,
    pub number: usize,
    pub endo_power: usize,
}

/// Outcome of a property check, with a witness when it fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropertyCheck {
    pub holds: bool,
    pub witness: Option<Vec<usize>>,
}

impl PropertyCheck {
    fn pass() -> Self {
        PropertyCheck {
            holds: true,
            witness: None,
        }
    }

    fn fail(witness: Vec<usize>) -> Self {
        PropertyCheck {
            holds: false,
            witness: Some(witness),
        }
    }
}

/// Partition of `G` into Reidemeister classes of `φ`.
pub fn twisted_classes(phi: &FiniteEndo) -> ClassPartition {
    let g = phi.group();
    g.orbit_partition(g.generators(), |x, y| twisted_action(g, phi, x, y))
}

#[inline]
pub fn twisted_action(g: &FiniteGroup, phi: &FiniteEndo, x: usize, y: usize) -> usize {
    g.mul(g.mul(x, y), g.inv(phi.apply(x)))
}

/// Twisted classes of `φⁿ`.
pub fn reidemeister_report(phi: &FiniteEndo, n: usize) -> ReidemeisterReport {
    let partition = twisted_classes(&phi.iterate(n));
    ReidemeisterReport {
        number: partition.len(),
        partition,
        endo_power: n,
    }
}

/// `R(φⁿ)`.
pub fn reidemeister_number(phi: &FiniteEndo, n: usize) -> usize {
    twisted_classes(&phi.iterate(n)).len()
}

/// `(1/|G|)·Σ_g #{y : g·y·φ(g)⁻¹ = y}`, the dimension of the space of
/// twisted class functions.
pub fn burnside_average(phi: &FiniteEndo) -> Result<usize, TwistedError> {
    let g = phi.group();
    let n = g.order();
    // g·y·φ(g)⁻¹ = y  ⇔  y⁻¹·g·y = φ(g)
    let sum: usize = (0..n)
        .map(|x| {
            let target = phi.apply(x);
            (0..n).filter(|&y| g.conjugate(g.inv(y), x) == target).count()
        })
        .sum();
    if !sum.is_multiple_of(n) {
        return Err(TwistedError::NonIntegerAverage { sum, order: n });
    }
    Ok(sum / n)
}

/// Every twisted class is a union of cosets of `Ker φ`. Witness: `[g1, g2]`
/// in one coset but different classes.
pub fn kernel_coset_property(phi: &FiniteEndo) -> PropertyCheck {
    let g = phi.group();
    let classes = twisted_classes(phi);
    let kernel = phi.kernel();
    for x in 0..g.order() {
        for &k in &kernel {
            let y = g.mul(k, x);
            if classes.class_of(x) != classes.class_of(y) {
                return PropertyCheck::fail(vec![y, x]);
            }
        }
    }
    PropertyCheck::pass()
}

/// The right shift `x ↦ x·g` carries classes of `φ` bijectively onto classes
/// of `τ_{g⁻¹}∘φ`. Witness: `[x, y]` with `x, y` in one class of `φ` whose
/// shifts are separated, or `[x]` where the class count differs.
pub fn shift_bijection_property(phi: &FiniteEndo, shift: usize) -> PropertyCheck {
    let g = phi.group();
    let twisted = FiniteEndo::inner(g, g.inv(shift))
        .compose(phi)
        .expect("same group");
    let before = twisted_classes(phi);
    let after = twisted_classes(&twisted);
    if before.len() != after.len() {
        return PropertyCheck::fail(vec![shift]);
    }
    let mut image = vec![usize::MAX; before.len()];
    let mut hit = vec![false; after.len()];
    for x in 0..g.order() {
        let c = before.class_of(x);
        let d = after.class_of(g.mul(x, shift));
        if image[c] == usize::MAX {
            if hit[d] {
                return PropertyCheck::fail(vec![before.reps()[c], x]);
            }
            hit[d] = true;
            image[c] = d;
        } else if image[c] != d {
            return PropertyCheck::fail(vec![before.reps()[c], x]);
        }
    }
    PropertyCheck::pass()
}

/// Result of projecting twisted classes to `G/H`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientClassReport {
    pub check: PropertyCheck,
    pub upstairs: usize,
    pub downstairs: usize,
}

fn check_invariant(phi: &FiniteEndo, members: &[usize]) -> Result<(), TwistedError> {
    let g = phi.group();
    let mut inside = vec![false; g.order()];
    members.iter().for_each(|&h| inside[h] = true);
    match members.iter().find(|&&h| !inside[phi.apply(h)]) {
        Some(&h) => Err(TwistedError::NotInvariant { h }),
        None => Ok(()),
    }
}

/// The projection `G → G/H` maps twisted classes of `φ` onto twisted classes
/// of the induced endomorphism. `H` must be normal and `φ`-invariant.
pub fn epimorphism_of_classes_property(phi: &FiniteEndo, normal: &[usize]) -> Result<QuotientClassReport, TwistedError> {
    let g = phi.group();
    let members = g.check_normal(normal)?;
    check_invariant(phi, &members)?;
    let q = g.quotient(&members)?;
    let induced = q.induced_endo(phi);
    let up = twisted_classes(phi);
    let down = twisted_classes(&induced);
    let mut image = vec![usize::MAX; up.len()];
    let mut check = PropertyCheck::pass();
    for x in 0..g.order() {
        let d = down.class_of(q.projection[x]);
        let c = up.class_of(x);
        if image[c] == usize::MAX {
            image[c] = d;
        } else if image[c] != d {
            check = PropertyCheck::fail(vec![up.reps()[c], x]);
            break;
        }
    }
    if check.holds {
        let covered: BTreeSet<usize> = image.iter().copied().collect();
        if covered.len() != down.len() {
            let missing = (0..down.len()).find(|d| !covered.contains(d)).unwrap_or(0);
            check = PropertyCheck::fail(vec![down.reps()[missing]]);
        }
    }
    Ok(QuotientClassReport {
        check,
        upstairs: up.len(),
        downstairs: down.len(),
    })
}

/// Every twisted class is mapped into itself by `φ`. Witness: `[x]` with
/// `φ(x)` in another class.
pub fn class_invariance_property(phi: &FiniteEndo) -> PropertyCheck {
    let classes = twisted_classes(phi);
    match (0..phi.group().order()).find(|&x| classes.class_of(x) != classes.class_of(phi.apply(x))) {
        Some(x) => PropertyCheck::fail(vec![x]),
        None => PropertyCheck::pass(),
    }
}

/// `R(φ)` against `R` of the map induced on `G / Ker φ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelQuotientReport {
    pub holds: bool,
    pub number: usize,
    pub quotient_number: usize,
    pub kernel_order: usize,
}

pub fn finite_image_finiteness_property(phi: &FiniteEndo) -> KernelQuotientReport {
    let g = phi.group();
    let kernel = phi.kernel();
    let q = g.quotient(&kernel).expect("kernels are normal");
    let number = twisted_classes(phi).len();
    let quotient_number = twisted_classes(&q.induced_endo(phi)).len();
    KernelQuotientReport {
        holds: number == quotient_number,
        number,
        quotient_number,
        kernel_order: kernel.len(),
    }
}

/// Both readings of the restriction bound for a normal `φ`-invariant `H`:
/// `R(φ|_H) ≤ R(φ)·|C|` and `R(φ|_H) ≤ k(G)·|C|`, where `C` is the fixed
/// subgroup of the map induced on `G/H` and `k(G)` the number of conjugacy
/// classes of `G`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RestrictionBoundReport {
    pub restricted: usize,
    pub number: usize,
    pub conjugacy_classes: usize,
    pub quotient_fixed: usize,
    pub endo_reading_holds: bool,
    pub group_reading_holds: bool,
}

pub fn restriction_bound(phi: &FiniteEndo, normal: &[usize]) -> Result<RestrictionBoundReport, TwistedError> {
    let g = phi.group();
    let members = g.check_normal(normal)?;
    check_invariant(phi, &members)?;
    let (sub, embedding) = g.subgroup(&members)?;
    let sub = Arc::new(sub);
    let mut local = vec![usize::MAX; g.order()];
    embedding.iter().enumerate().for_each(|(i, &h)| local[h] = i);
    let restricted_map = embedding.iter().map(|&h| local[phi.apply(h)]).collect();
    let restricted = crate::group::validate_endo(&sub, restricted_map)?;
    let q = g.quotient(&members)?;
    let quotient_fixed = q.induced_endo(phi).fixed_points().len();
    let r_restricted = twisted_classes(&restricted).len();
    let number = twisted_classes(phi).len();
    let conjugacy_classes = g.conjugacy_classes().len();
    Ok(RestrictionBoundReport {
        restricted: r_restricted,
        number,
        conjugacy_classes,
        quotient_fixed,
        endo_reading_holds: r_restricted <= number * quotient_fixed,
        group_reading_holds: r_restricted <= conjugacy_classes * quotient_fixed,
    })
}

/// Right shifts of twisted classes inside a finite group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftReport {
    /// Number of distinct subsets `C·g` over all classes `C` and shifts `g`.
    pub distinct_shifts: usize,
    /// For each class, `|G| / |{g : C·g = C}|`.
    pub stabilizer_index: Vec<usize>,
    /// `|Inn(G)| = |G| / |Z(G)|`.
    pub inner_automorphisms: usize,
    pub shifts_examined: usize,
}

/// Enumerates right shifts of all classes by the first `sample_size`
/// elements (all of them when `sample_size ≥ |G|`).
pub fn shift_finiteness_probe(phi: &FiniteEndo, sample_size: usize) -> ShiftReport {
    let g = phi.group();
    let n = g.order();
    let classes = twisted_classes(phi).classes();
    let shifts = sample_size.min(n);
    let mut distinct: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut stabilizer = vec![0usize; classes.len()];
    for s in 0..shifts {
        for (c, class) in classes.iter().enumerate() {
            let mut moved: Vec<usize> = class.iter().map(|&x| g.mul(x, s)).collect();
            moved.sort_unstable();
            if &moved == class {
                stabilizer[c] += 1;
            }
            distinct.insert(moved);
        }
    }
    let stabilizer_index = if shifts == n {
        stabilizer.iter().map(|&s| n / s).collect()
    } else {
        Vec::new()
    };
    ShiftReport {
        distinct_shifts: distinct.len(),
        stabilizer_index,
        inner_automorphisms: n / g.center().len(),
        shifts_examined: shifts,
    }
}
