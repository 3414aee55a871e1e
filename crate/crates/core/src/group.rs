//! Finite groups given by multiplication tables, their endomorphisms and
//! the orbit partitions used everywhere else in the crate.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Largest order for which associativity is checked on every triple by default.
pub const EXHAUSTIVE_ASSOCIATIVITY_LIMIT: usize = 256;

/// Which group axiom a Cayley table violates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupAxiom {
    Identity,
    Inverses,
    Associativity,
    LatinSquare,
}

impl fmt::Display for GroupAxiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupAxiom::Identity => "identity",
            GroupAxiom::Inverses => "inverses",
            GroupAxiom::Associativity => "associativity",
            GroupAxiom::LatinSquare => "latin-square",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupError {
    /// The table is not a group; the triple is `(x, y, z)` for associativity
    /// and `(x, y, product)` style data for the other axioms.
    NotAGroup {
        reason: GroupAxiom,
        witness: (usize, usize, usize),
    },
    EmptyTable,
    NotSquare { row: usize, len: usize },
    EntryOutOfRange { row: usize, col: usize, value: usize },
    IndexOutOfRange { index: usize, order: usize },
    NotAPermutation { generator: usize },
    DegreeMismatch { generator: usize, expected: usize, found: usize },
    CapExceeded { cap: usize },
    NotAHomomorphism { x: usize, y: usize },
    MapLength { expected: usize, found: usize },
    GroupMismatch,
    NotGenerating,
    NotASubgroup { witness: (usize, usize) },
    NotNormal { g: usize, h: usize },
}

impl fmt::Display for GroupError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupError::NotAGroup { reason, witness } => write!(
                f,
                "not a group ({reason}): witness ({}, {}, {})",
                witness.0, witness.1, witness.2
            ),
            GroupError::EmptyTable => f.write_str("empty multiplication table"),
            GroupError::NotSquare { row, len } => {
                write!(f, "table row {row} has length {len}, table is not square")
            }
            GroupError::EntryOutOfRange { row, col, value } => {
                write!(f, "table entry ({row}, {col}) = {value} is out of range")
            }
            GroupError::IndexOutOfRange { index, order } => {
                write!(f, "element index {index} out of range for order {order}")
            }
            GroupError::NotAPermutation { generator } => {
                write!(f, "generator {generator} is not a bijection")
            }
            GroupError::DegreeMismatch {
                generator,
                expected,
                found,
            } => write!(
                f,
                "generator {generator} acts on {found} points, expected {expected}"
            ),
            GroupError::CapExceeded { cap } => write!(f, "closure exceeded the cap of {cap} elements"),
            GroupError::NotAHomomorphism { x, y } => {
                write!(f, "not a homomorphism: map(x*y) != map(x)*map(y) for x = {x}, y = {y}")
            }
            GroupError::MapLength { expected, found } => {
                write!(f, "map has length {found}, group order is {expected}")
            }
            GroupError::GroupMismatch => f.write_str("endomorphisms act on different groups"),
            GroupError::NotGenerating => f.write_str("generator set does not generate the group"),
            GroupError::NotASubgroup { witness } => write!(
                f,
                "subset is not a subgroup: product of {} and {} leaves it",
                witness.0, witness.1
            ),
            GroupError::NotNormal { g, h } => {
                write!(f, "subgroup is not normal: {g} * {h} * {g}^-1 leaves it")
            }
        }
    }
}

impl core::error::Error for GroupError {}

/// How thoroughly `build_from_cayley` checks associativity.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum AssociativityCheck {
    /// Every triple up to [`EXHAUSTIVE_ASSOCIATIVITY_LIMIT`], `10·N²` random triples above.
    #[default]
    Auto,
    Exhaustive,
}

/// A finite group on the dense element set `0..order` with identity `0`.
#[derive(Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    order: usize,
    mul: Vec<u32>,
    inv: Vec<usize>,
    labels: Option<Vec<String>>,
    generators: Vec<usize>,
}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteGroup")
            .field("order", &self.order)
            .field("generators", &self.generators)
            .finish_non_exhaustive()
    }
}

impl FiniteGroup {
    /// Validates a Cayley table whose identity is `identity`.
    ///
    /// Indices are relabelled so that the identity becomes element `0` (the
    /// identity and the old element `0` swap places; every other index is kept).
    pub fn build_from_cayley(
        table: &[Vec<usize>],
        identity: usize,
        check: AssociativityCheck,
    ) -> Result<FiniteGroup, GroupError> {
        let n = table.len();
        if n == 0 {
            return Err(GroupError::EmptyTable);
        }
        for (row, r) in table.iter().enumerate() {
            if r.len() != n {
                return Err(GroupError::NotSquare { row, len: r.len() });
            }
            if let Some((col, &value)) = r.iter().enumerate().find(|(_, &v)| v >= n) {
                return Err(GroupError::EntryOutOfRange { row, col, value });
            }
        }
        if identity >= n {
            return Err(GroupError::IndexOutOfRange {
                index: identity,
                order: n,
            });
        }
        // swap `identity` and 0
        let relabel = |x: usize| {
            if x == identity {
                0
            } else if x == 0 {
                identity
            } else {
                x
            }
        };
        let mut mul = vec![0u32; n * n];
        for a in 0..n {
            for b in 0..n {
                mul[relabel(a) * n + relabel(b)] = relabel(table[a][b]) as u32;
            }
        }
        let at = |a: usize, b: usize| mul[a * n + b] as usize;

        for x in 0..n {
            if at(0, x) != x {
                return Err(GroupError::NotAGroup {
                    reason: GroupAxiom::Identity,
                    witness: (relabel(0), relabel(x), relabel(at(0, x))),
                });
            }
            if at(x, 0) != x {
                return Err(GroupError::NotAGroup {
                    reason: GroupAxiom::Identity,
                    witness: (relabel(x), relabel(0), relabel(at(x, 0))),
                });
            }
        }
        let mut seen = vec![usize::MAX; n];
        for a in 0..n {
            for b in 0..n {
                let p = at(a, b);
                if seen[p] == a {
                    return Err(GroupError::NotAGroup {
                        reason: GroupAxiom::LatinSquare,
                        witness: (relabel(a), relabel(b), relabel(p)),
                    });
                }
                seen[p] = a;
            }
        }
        seen.iter_mut().for_each(|s| *s = usize::MAX);
        for b in 0..n {
            for a in 0..n {
                let p = at(a, b);
                if seen[p] == b {
                    return Err(GroupError::NotAGroup {
                        reason: GroupAxiom::LatinSquare,
                        witness: (relabel(a), relabel(b), relabel(p)),
                    });
                }
                seen[p] = b;
            }
        }
        let mut inv = vec![0usize; n];
        for x in 0..n {
            // Latin rows guarantee a unique right inverse.
            let y = (0..n).find(|&y| at(x, y) == 0).unwrap_or(0);
            if at(y, x) != 0 {
                return Err(GroupError::NotAGroup {
                    reason: GroupAxiom::Inverses,
                    witness: (relabel(x), relabel(y), relabel(at(y, x))),
                });
            }
            inv[x] = y;
        }

        let exhaustive = check == AssociativityCheck::Exhaustive || n <= EXHAUSTIVE_ASSOCIATIVITY_LIMIT;
        let assoc = |x: usize, y: usize, z: usize| at(at(x, y), z) == at(x, at(y, z));
        let bad = if exhaustive {
            (0..n)
                .flat_map(|x| (0..n).flat_map(move |y| (0..n).map(move |z| (x, y, z))))
                .find(|&(x, y, z)| !assoc(x, y, z))
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0x7466_6273_6565_6421);
            let samples = 10 * n * n;
            (0..samples)
                .map(|_| {
                    let mut pick = || (rng.next_u64() % n as u64) as usize;
                    (pick(), pick(), pick())
                })
                .find(|&(x, y, z)| !assoc(x, y, z))
        };
        if let Some((x, y, z)) = bad {
            return Err(GroupError::NotAGroup {
                reason: GroupAxiom::Associativity,
                witness: (relabel(x), relabel(y), relabel(z)),
            });
        }

        let mut g = FiniteGroup {
            order: n,
            mul,
            inv,
            labels: None,
            generators: Vec::new(),
        };
        g.generators = g.greedy_generators();
        Ok(g)
    }

    /// Enumerates the group generated by permutations of `0..degree` by
    /// breadth-first closure. Element 0 is the identity and element `i + 1`
    /// is the `i`-th distinct non-identity generator.
    pub fn build_from_permutations(
        generators: &[Vec<usize>],
        cap: usize,
    ) -> Result<(FiniteGroup, Vec<Vec<usize>>), GroupError> {
        let degree = generators.first().map_or(0, Vec::len);
        for (i, p) in generators.iter().enumerate() {
            if p.len() != degree {
                return Err(GroupError::DegreeMismatch {
                    generator: i,
                    expected: degree,
                    found: p.len(),
                });
            }
            let mut hit = vec![false; degree];
            for &x in p {
                if x >= degree || hit[x] {
                    return Err(GroupError::NotAPermutation { generator: i });
                }
                hit[x] = true;
            }
        }
        let identity: Vec<usize> = (0..degree).collect();
        let mut elements = vec![identity.clone()];
        let mut index: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        index.insert(identity, 0);
        let mut gen_ids = Vec::new();
        for p in generators {
            if !index.contains_key(p) {
                if elements.len() >= cap {
                    return Err(GroupError::CapExceeded { cap });
                }
                index.insert(p.clone(), elements.len());
                elements.push(p.clone());
            }
            gen_ids.push(index[p]);
        }
        // compose as functions: (p * q)(x) = p(q(x)), i.e. q acts first
        let compose = |p: &[usize], q: &[usize]| -> Vec<usize> { q.iter().map(|&x| p[x]).collect() };
        let mut queue: VecDeque<usize> = (0..elements.len()).collect();
        while let Some(i) = queue.pop_front() {
            for p in generators {
                let prod = compose(&elements[i], p);
                if !index.contains_key(&prod) {
                    if elements.len() >= cap {
                        return Err(GroupError::CapExceeded { cap });
                    }
                    index.insert(prod.clone(), elements.len());
                    queue.push_back(elements.len());
                    elements.push(prod);
                }
            }
        }
        let n = elements.len();
        let mut mul = vec![0u32; n * n];
        for a in 0..n {
            for b in 0..n {
                mul[a * n + b] = index[&compose(&elements[a], &elements[b])] as u32;
            }
        }
        let mut inv = vec![0usize; n];
        for (a, p) in elements.iter().enumerate() {
            let mut q = vec![0usize; degree];
            for (x, &y) in p.iter().enumerate() {
                q[y] = x;
            }
            inv[a] = index[&q];
        }
        let mut gens: Vec<usize> = gen_ids.into_iter().filter(|&g| g != 0).collect();
        gens.dedup();
        let g = FiniteGroup {
            order: n,
            mul,
            inv,
            labels: None,
            generators: gens,
        };
        Ok((g, elements))
    }

    /// Builds a group from a table that is a group by construction (quotients,
    /// subgroups, semidirect products). Only cheap identity checks are run.
    pub(crate) fn from_trusted_table(mul: Vec<u32>, order: usize) -> FiniteGroup {
        debug_assert_eq!(mul.len(), order * order);
        debug_assert!((0..order).all(|x| mul[x] as usize == x && mul[x * order] as usize == x));
        let mut inv = vec![0usize; order];
        for x in 0..order {
            inv[x] = (0..order).find(|&y| mul[x * order + y] == 0).unwrap_or(0);
        }
        let mut g = FiniteGroup {
            order,
            mul,
            inv,
            labels: None,
            generators: Vec::new(),
        };
        g.generators = g.greedy_generators();
        g
    }

    /// Cyclic group `ℤ/n` with element `k` standing for the residue `k`.
    pub fn cyclic(n: usize) -> FiniteGroup {
        assert!(n > 0, "cyclic group of order 0");
        let mul = (0..n * n).map(|i| ((i / n + i % n) % n) as u32).collect();
        Self::from_trusted_table(mul, n)
    }

    /// Direct product `A × B`; the pair `(a, b)` has index `a·|B| + b`.
    pub fn direct_product(a: &FiniteGroup, b: &FiniteGroup) -> FiniteGroup {
        let (na, nb) = (a.order, b.order);
        let n = na * nb;
        let mut mul = vec![0u32; n * n];
        for x in 0..n {
            for y in 0..n {
                let p = a.mul(x / nb, y / nb) * nb + b.mul(x % nb, y % nb);
                mul[x * n + y] = p as u32;
            }
        }
        Self::from_trusted_table(mul, n)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        if labels.len() == self.order {
            self.labels = Some(labels);
        }
        self
    }

    /// Replaces the stored generating set after checking that it generates.
    pub fn with_generators(mut self, generators: Vec<usize>) -> Result<Self, GroupError> {
        if let Some(&bad) = generators.iter().find(|&&g| g >= self.order) {
            return Err(GroupError::IndexOutOfRange {
                index: bad,
                order: self.order,
            });
        }
        if self.closure(&generators).len() != self.order {
            return Err(GroupError::NotGenerating);
        }
        self.generators = generators;
        Ok(self)
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn identity(&self) -> usize {
        0
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.order + b] as usize
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// A generating set (greedy, in index order, unless replaced).
    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    /// The multiplication table as rows.
    pub fn table(&self) -> Vec<Vec<usize>> {
        (0..self.order)
            .map(|a| (0..self.order).map(|b| self.mul(a, b)).collect())
            .collect()
    }

    pub fn pow(&self, g: usize, k: usize) -> usize {
        (0..k).fold(0, |acc, _| self.mul(acc, g))
    }

    pub fn element_order(&self, g: usize) -> usize {
        let mut x = g;
        let mut k = 1;
        while x != 0 {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }

    /// Least common multiple of all element orders.
    pub fn exponent(&self) -> usize {
        (0..self.order).fold(1, |acc, g| num_integer::lcm(acc, self.element_order(g)))
    }

    pub fn conjugate(&self, g: usize, x: usize) -> usize {
        self.mul(self.mul(g, x), self.inv(g))
    }

    /// Sorted subgroup generated by `gens`.
    pub fn closure(&self, gens: &[usize]) -> Vec<usize> {
        let mut inside = vec![false; self.order];
        inside[0] = true;
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = self.mul(x, g);
                if !inside[y] {
                    inside[y] = true;
                    queue.push_back(y);
                }
            }
        }
        (0..self.order).filter(|&x| inside[x]).collect()
    }

    fn greedy_generators(&self) -> Vec<usize> {
        let mut gens = Vec::new();
        let mut inside = vec![false; self.order];
        inside[0] = true;
        for g in 1..self.order {
            if !inside[g] {
                gens.push(g);
                for x in self.closure(&gens) {
                    inside[x] = true;
                }
            }
        }
        gens
    }

    /// Partition of the group into orbits of the maps `y ↦ act(s, y)` for
    /// `s` in `movers`. Classes are numbered by their least element.
    pub fn orbit_partition(&self, movers: &[usize], act: impl Fn(usize, usize) -> usize) -> ClassPartition {
        orbit_partition(self.order, movers, act)
    }

    /// Ordinary conjugacy classes.
    pub fn conjugacy_classes(&self) -> ClassPartition {
        self.orbit_partition(&self.generators, |g, y| self.conjugate(g, y))
    }

    /// Checks that `subset` is a subgroup; returns it sorted and deduplicated.
    pub fn check_subgroup(&self, subset: &[usize]) -> Result<Vec<usize>, GroupError> {
        let mut inside = vec![false; self.order];
        for &h in subset {
            if h >= self.order {
                return Err(GroupError::IndexOutOfRange {
                    index: h,
                    order: self.order,
                });
            }
            inside[h] = true;
        }
        if !inside[0] {
            return Err(GroupError::NotASubgroup { witness: (0, 0) });
        }
        let members: Vec<usize> = (0..self.order).filter(|&x| inside[x]).collect();
        for &a in &members {
            for &b in &members {
                if !inside[self.mul(a, b)] {
                    return Err(GroupError::NotASubgroup { witness: (a, b) });
                }
            }
        }
        Ok(members)
    }

    /// Checks that `subset` is a normal subgroup.
    pub fn check_normal(&self, subset: &[usize]) -> Result<Vec<usize>, GroupError> {
        let members = self.check_subgroup(subset)?;
        let mut inside = vec![false; self.order];
        members.iter().for_each(|&h| inside[h] = true);
        for &g in &self.generators {
            for &h in &members {
                if !inside[self.conjugate(g, h)] {
                    return Err(GroupError::NotNormal { g, h });
                }
            }
        }
        Ok(members)
    }

    /// All normal subgroups, found as unions of conjugacy classes closed under
    /// multiplication. Returns `None` when there are more than `max_classes`
    /// conjugacy classes.
    pub fn normal_subgroups(&self, max_classes: usize) -> Option<Vec<Vec<usize>>> {
        let classes = self.conjugacy_classes();
        let k = classes.len();
        if k > max_classes || k > 24 {
            return None;
        }
        let members = classes.classes();
        let mut found = Vec::new();
        for mask in 0u32..(1u32 << (k - 1)) {
            let mut subset = members[0].clone();
            for (bit, class) in members.iter().enumerate().skip(1) {
                if mask & (1 << (bit - 1)) != 0 {
                    subset.extend_from_slice(class);
                }
            }
            if !self.order.is_multiple_of(subset.len()) {
                continue;
            }
            if let Ok(h) = self.check_subgroup(&subset) {
                found.push(h);
            }
        }
        found.sort_by_key(Vec::len);
        Some(found)
    }

    /// Centre of the group.
    pub fn center(&self) -> Vec<usize> {
        (0..self.order)
            .filter(|&z| self.generators.iter().all(|&g| self.mul(g, z) == self.mul(z, g)))
            .collect()
    }

    /// The subgroup `members` as a group of its own; the second value maps
    /// subgroup indices to indices of `self`.
    pub fn subgroup(&self, members: &[usize]) -> Result<(FiniteGroup, Vec<usize>), GroupError> {
        let members = self.check_subgroup(members)?;
        let mut local = vec![usize::MAX; self.order];
        for (i, &h) in members.iter().enumerate() {
            local[h] = i;
        }
        let m = members.len();
        let mut mul = vec![0u32; m * m];
        for (i, &a) in members.iter().enumerate() {
            for (j, &b) in members.iter().enumerate() {
                mul[i * m + j] = local[self.mul(a, b)] as u32;
            }
        }
        Ok((Self::from_trusted_table(mul, m), members))
    }

    /// Quotient by a normal subgroup. Cosets are numbered in order of their
    /// least element, so the coset of the identity is `0`.
    pub fn quotient(&self, normal: &[usize]) -> Result<Quotient, GroupError> {
        let members = self.check_normal(normal)?;
        let mut projection = vec![usize::MAX; self.order];
        let mut reps = Vec::new();
        for g in 0..self.order {
            if projection[g] == usize::MAX {
                let id = reps.len();
                reps.push(g);
                for &h in &members {
                    projection[self.mul(g, h)] = id;
                }
            }
        }
        let m = reps.len();
        let mut mul = vec![0u32; m * m];
        for (i, &a) in reps.iter().enumerate() {
            for (j, &b) in reps.iter().enumerate() {
                mul[i * m + j] = projection[self.mul(a, b)] as u32;
            }
        }
        Ok(Quotient {
            group: Arc::new(Self::from_trusted_table(mul, m)),
            projection,
            coset_reps: reps,
        })
    }
}

/// A quotient group `G/H` together with the projection `G → G/H`.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub group: Arc<FiniteGroup>,
    pub projection: Vec<usize>,
    /// Least element of each coset.
    pub coset_reps: Vec<usize>,
}

impl Quotient {
    /// The endomorphism induced on the quotient. The caller guarantees
    /// `φ(H) ⊆ H`.
    pub fn induced_endo(&self, phi: &FiniteEndo) -> FiniteEndo {
        let map = self
            .coset_reps
            .iter()
            .map(|&r| self.projection[phi.apply(r)])
            .collect();
        FiniteEndo {
            group: Arc::clone(&self.group),
            map,
        }
    }
}

/// Partition of `0..carrier_size` into classes with least-element representatives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassPartition {
    class_of: Vec<usize>,
    reps: Vec<usize>,
}

pub(crate) fn orbit_partition(n: usize, movers: &[usize], act: impl Fn(usize, usize) -> usize) -> ClassPartition {
    let mut class_of = vec![usize::MAX; n];
    let mut reps = Vec::new();
    let mut queue = VecDeque::new();
    for seed in 0..n {
        if class_of[seed] != usize::MAX {
            continue;
        }
        let id = reps.len();
        reps.push(seed);
        class_of[seed] = id;
        queue.push_back(seed);
        while let Some(y) = queue.pop_front() {
            for &s in movers {
                let z = act(s, y);
                if class_of[z] == usize::MAX {
                    class_of[z] = id;
                    queue.push_back(z);
                }
            }
        }
    }
    ClassPartition { class_of, reps }
}

impl ClassPartition {
    /// Builds a partition from arbitrary labels, renumbering classes by least element.
    pub fn from_labels(labels: &[usize]) -> ClassPartition {
        let mut renumber = BTreeMap::new();
        let mut reps = Vec::new();
        let class_of = labels
            .iter()
            .enumerate()
            .map(|(x, l)| {
                *renumber.entry(*l).or_insert_with(|| {
                    reps.push(x);
                    reps.len() - 1
                })
            })
            .collect();
        ClassPartition { class_of, reps }
    }

    pub fn carrier_size(&self) -> usize {
        self.class_of.len()
    }

    /// Number of classes.
    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn class_of(&self, x: usize) -> usize {
        self.class_of[x]
    }

    pub fn class_ids(&self) -> &[usize] {
        &self.class_of
    }

    pub fn reps(&self) -> &[usize] {
        &self.reps
    }

    /// Members of every class, each sorted ascending.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.reps.len()];
        for (x, &c) in self.class_of.iter().enumerate() {
            out[c].push(x);
        }
        out
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        let mut out = vec![0; self.reps.len()];
        for &c in &self.class_of {
            out[c] += 1;
        }
        out
    }
}

/// An endomorphism of a finite group, stored as its image table.
#[derive(Clone, PartialEq, Eq)]
pub struct FiniteEndo {
    group: Arc<FiniteGroup>,
    map: Vec<usize>,
}

impl fmt::Debug for FiniteEndo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("FiniteEndo").field(&self.map).finish()
    }
}

/// Checks `map(x·y) = map(x)·map(y)` on every pair.
pub fn validate_endo(group: &Arc<FiniteGroup>, map: Vec<usize>) -> Result<FiniteEndo, GroupError> {
    let n = group.order();
    if map.len() != n {
        return Err(GroupError::MapLength {
            expected: n,
            found: map.len(),
        });
    }
    if let Some(&bad) = map.iter().find(|&&y| y >= n) {
        return Err(GroupError::IndexOutOfRange { index: bad, order: n });
    }
    for x in 0..n {
        for y in 0..n {
            if map[group.mul(x, y)] != group.mul(map[x], map[y]) {
                return Err(GroupError::NotAHomomorphism { x, y });
            }
        }
    }
    Ok(FiniteEndo {
        group: Arc::clone(group),
        map,
    })
}

/// Extends an assignment of generator images to a homomorphism, if one exists.
pub fn endo_from_generator_images(
    group: &Arc<FiniteGroup>,
    images: &[(usize, usize)],
) -> Result<FiniteEndo, GroupError> {
    let n = group.order();
    for &(g, a) in images {
        for v in [g, a] {
            if v >= n {
                return Err(GroupError::IndexOutOfRange { index: v, order: n });
            }
        }
    }
    let gens: Vec<usize> = images.iter().map(|&(g, _)| g).collect();
    if group.closure(&gens).len() != n {
        return Err(GroupError::NotGenerating);
    }
    let mut map = vec![usize::MAX; n];
    map[0] = 0;
    let mut queue = VecDeque::from([0usize]);
    while let Some(x) = queue.pop_front() {
        for &(g, a) in images {
            let y = group.mul(x, g);
            let image = group.mul(map[x], a);
            if map[y] == usize::MAX {
                map[y] = image;
                queue.push_back(y);
            } else if map[y] != image {
                return Err(GroupError::NotAHomomorphism { x, y: g });
            }
        }
    }
    validate_endo(group, map)
}

impl FiniteEndo {
    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    pub fn identity(group: &Arc<FiniteGroup>) -> FiniteEndo {
        FiniteEndo {
            group: Arc::clone(group),
            map: (0..group.order()).collect(),
        }
    }

    /// The endomorphism sending every element to the identity.
    pub fn trivial(group: &Arc<FiniteGroup>) -> FiniteEndo {
        FiniteEndo {
            group: Arc::clone(group),
            map: vec![0; group.order()],
        }
    }

    /// Inner automorphism `x ↦ g x g⁻¹`.
    pub fn inner(group: &Arc<FiniteGroup>, g: usize) -> FiniteEndo {
        FiniteEndo {
            group: Arc::clone(group),
            map: (0..group.order()).map(|x| group.conjugate(g, x)).collect(),
        }
    }

    fn same_group(&self, other: &FiniteEndo) -> bool {
        Arc::ptr_eq(&self.group, &other.group) || self.group == other.group
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &FiniteEndo) -> Result<FiniteEndo, GroupError> {
        if !self.same_group(other) {
            return Err(GroupError::GroupMismatch);
        }
        Ok(FiniteEndo {
            group: Arc::clone(&self.group),
            map: other.map.iter().map(|&x| self.map[x]).collect(),
        })
    }

    /// `selfⁿ`, with `self⁰` the identity.
    pub fn iterate(&self, n: usize) -> FiniteEndo {
        let mut map: Vec<usize> = (0..self.map.len()).collect();
        for _ in 0..n {
            for y in map.iter_mut() {
                *y = self.map[*y];
            }
        }
        FiniteEndo {
            group: Arc::clone(&self.group),
            map,
        }
    }

    pub fn kernel(&self) -> Vec<usize> {
        (0..self.map.len()).filter(|&x| self.map[x] == 0).collect()
    }

    pub fn image(&self) -> Vec<usize> {
        let mut hit = vec![false; self.map.len()];
        self.map.iter().for_each(|&y| hit[y] = true);
        (0..hit.len()).filter(|&x| hit[x]).collect()
    }

    pub fn fixed_points(&self) -> Vec<usize> {
        (0..self.map.len()).filter(|&x| self.map[x] == x).collect()
    }

    pub fn is_injective(&self) -> bool {
        self.kernel().len() == 1
    }
}

/// Every endomorphism of `group`, found by backtracking over images of
/// `generators` and checking consistency along Cayley-graph edges of each
/// partial subgroup. Results are in lexicographic order of generator images.
pub fn enumerate_endomorphisms(group: &Arc<FiniteGroup>, generators: &[usize]) -> Result<Vec<FiniteEndo>, GroupError> {
    let n = group.order();
    if let Some(&bad) = generators.iter().find(|&&g| g >= n) {
        return Err(GroupError::IndexOutOfRange { index: bad, order: n });
    }
    if group.closure(generators).len() != n {
        return Err(GroupError::NotGenerating);
    }
    let orders: Vec<usize> = (0..n).map(|g| group.element_order(g)).collect();
    let mut out = Vec::new();
    let mut images = Vec::with_capacity(generators.len());
    search(group, generators, &orders, &mut images, &mut out);
    Ok(out)
}

fn search(
    group: &Arc<FiniteGroup>,
    generators: &[usize],
    orders: &[usize],
    images: &mut Vec<usize>,
    out: &mut Vec<FiniteEndo>,
) {
    let level = images.len();
    if level == generators.len() {
        if let Some(map) = extend_partial(group, generators, images) {
            if let Ok(endo) = validate_endo(group, map) {
                out.push(endo);
            }
        }
        return;
    }
    let g = generators[level];
    for a in 0..group.order() {
        if !orders[g].is_multiple_of(orders[a]) {
            continue;
        }
        images.push(a);
        if extend_partial(group, &generators[..=level], images).is_some() {
            search(group, generators, orders, images, out);
        }
        images.pop();
    }
}

/// Propagates generator images over the subgroup they generate; `None` if
/// some edge `x → x·g` is inconsistent.
fn extend_partial(group: &FiniteGroup, generators: &[usize], images: &[usize]) -> Option<Vec<usize>> {
    let mut map = vec![usize::MAX; group.order()];
    map[0] = 0;
    let mut queue = VecDeque::from([0usize]);
    while let Some(x) = queue.pop_front() {
        for (&g, &a) in generators.iter().zip(images) {
            let y = group.mul(x, g);
            let image = group.mul(map[x], a);
            if map[y] == usize::MAX {
                map[y] = image;
                queue.push_back(y);
            } else if map[y] != image {
                return None;
            }
        }
    }
    Some(map)
}
