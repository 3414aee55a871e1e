//! Engines checked against each other and against brute-force counts
//! written here from the definitions.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use proptest::prelude::*;
use tbf_core::abelian::{reduction_mod, reidemeister_number_fg_abelian, reidemeister_number_zn};
use tbf_core::character::{character_table, tbft_verify};
use tbf_core::congruence::{gauss_congruence_check, SequenceSource};
use tbf_core::extension::{fiber_orbit_count, reidemeister_number_extension, validate_extension_endo};
use tbf_core::group::{enumerate_endomorphisms, validate_endo};
use tbf_core::twisted::twisted_classes;
use tbf_core::{Caps, ClassCount, FgAbelian, FgAbelianEndo, FiniteGroup, IntMatrix, LatticeExtension, ReidemeisterSequence};

fn matrix(entries: &[i64], n: usize) -> IntMatrix {
    let rows: Vec<Vec<i64>> = entries.chunks(n).map(<[i64]>::to_vec).collect();
    IntMatrix::from_rows(&rows).unwrap()
}

fn det2(m: &[i64]) -> i64 {
    m[0] * m[3] - m[1] * m[2]
}

/// Classes of `y ~ x·y·φ(x)⁻¹` on `(ℤ/k)² ⋊ ℤ/2` with `θ(1) = −I` and
/// `φ(v, f) = (Mv + c(f), f)`, by union-find over the generators.
fn brute_minus_identity(m: &[i64], c1: [i64; 2], k: i64) -> usize {
    let red = |x: i64| x.rem_euclid(k);
    let encode = |v: [i64; 2], f: i64| ((red(v[0]) * k + red(v[1])) * 2 + f) as usize;
    let decode = |i: usize| {
        let i = i as i64;
        ([(i / 2) / k, (i / 2) % k], i % 2)
    };
    let sign = |f: i64| if f == 0 { 1 } else { -1 };
    let mul = |a: ([i64; 2], i64), b: ([i64; 2], i64)| ([a.0[0] + sign(a.1) * b.0[0], a.0[1] + sign(a.1) * b.0[1]], (a.1 + b.1) % 2);
    let inv = |a: ([i64; 2], i64)| ([-sign(a.1) * a.0[0], -sign(a.1) * a.0[1]], a.1);
    let phi = |a: ([i64; 2], i64)| {
        let c = if a.1 == 0 { [0, 0] } else { c1 };
        ([m[0] * a.0[0] + m[1] * a.0[1] + c[0], m[2] * a.0[0] + m[3] * a.0[1] + c[1]], a.1)
    };
    let size = (2 * k * k) as usize;
    let mut parent: Vec<usize> = (0..size).collect();
    fn root(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let gens = [([1, 0], 0), ([0, 1], 0), ([0, 0], 1)];
    let mut classes = size;
    for y in 0..size {
        for &x in &gens {
            let (v, f) = mul(mul(x, decode(y)), inv(phi(x)));
            let (a, b) = (root(&mut parent, y), root(&mut parent, encode(v, f)));
            if a != b {
                parent[a] = b;
                classes -= 1;
            }
        }
    }
    classes
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// With `θ = −I` central, `H' = (I − M)ℤ² ∩ (I + M)ℤ²` contains
    /// `k·ℤ²` for `k = |det(I − M)·det(I + M)|`, so the count on
    /// `(ℤ/k)² ⋊ ℤ/2` is `R(φ)`.
    #[test]
    fn orbit_count_matches_brute_force(m in prop::collection::vec(-3i64..=3, 4), c in (-2i64..=2, -2i64..=2)) {
        let minus = det2(&[1 - m[0], -m[1], -m[2], 1 - m[3]]);
        let plus = det2(&[1 + m[0], m[1], m[2], 1 + m[3]]);
        prop_assume!(minus != 0 && plus != 0 && (minus * plus).abs() <= 24);
        let k = (minus * plus).abs();
        let z2 = Arc::new(FiniteGroup::cyclic(2));
        let ext = Arc::new(LatticeExtension::new(2, z2, vec![IntMatrix::identity(2), IntMatrix::scalar(2, -1)]).unwrap());
        let cocycle = vec![vec![BigInt::from(0); 2], vec![BigInt::from(c.0), BigInt::from(c.1)]];
        let phi = validate_extension_endo(&ext, matrix(&m, 2), vec![0, 1], cocycle).unwrap();
        let expected = ClassCount::finite(brute_minus_identity(&m, [c.0, c.1], k));
        prop_assert_eq!(fiber_orbit_count(&phi, 10_000).unwrap(), expected.clone());
        let caps = Caps { quotient_order: 20_000, ..Caps::default() };
        if let Ok(count) = reidemeister_number_extension(&phi, &caps) {
            prop_assert_eq!(count.count, expected);
        }
    }

    /// A trivial top group leaves the abelian count `|det(I − M)|`.
    #[test]
    fn pure_lattice_matches_abelian(m in prop::collection::vec(-3i64..=3, 4)) {
        let mat = matrix(&m, 2);
        let abelian = reidemeister_number_zn(&mat, 1).unwrap();
        let ext = Arc::new(LatticeExtension::pure_lattice(2));
        let phi = validate_extension_endo(&ext, mat, vec![0], vec![vec![BigInt::from(0); 2]]).unwrap();
        prop_assert_eq!(fiber_orbit_count(&phi, 100_000).unwrap(), abelian.clone());
        if abelian.as_finite().is_some_and(|r| *r <= BigUint::from(400u32)) {
            prop_assert_eq!(reidemeister_number_extension(&phi, &Caps::default()).unwrap().count, abelian);
        }
    }

    /// Cokernel formula on `(ℤ/m)ⁿ` against orbit enumeration.
    #[test]
    fn torsion_formula_matches_enumeration(n in 1usize..=2, entries in prop::collection::vec(-6i64..=6, 4), modulus in 2usize..=7) {
        let mat = matrix(&entries[..n * n], n);
        let fg = FgAbelianEndo::new(FgAbelian::new(0, vec![BigInt::from(modulus); n]).unwrap(), mat.clone()).unwrap();
        let (g, map) = reduction_mod(&mat, modulus);
        let phi = validate_endo(&Arc::new(g), map).unwrap();
        prop_assert_eq!(reidemeister_number_fg_abelian(&fg, 1), ClassCount::finite(twisted_classes(&phi).len()));
    }

    /// Sequences from random 2×2 matrices satisfy the congruences whenever
    /// every term is finite.
    #[test]
    fn matrix_sequences_satisfy_congruences(m in prop::collection::vec(-4i64..=4, 4)) {
        let mat = matrix(&m, 2);
        let values: Vec<ClassCount> = (1..=10).map(|n| reidemeister_number_zn(&mat, n).unwrap()).collect();
        prop_assume!(values.iter().all(ClassCount::is_finite));
        let seq = ReidemeisterSequence::new(values, SequenceSource::Abelian);
        prop_assert!(gauss_congruence_check(&seq).unwrap().pass());
    }
}

/// Every endomorphism of `ℤ/a × ℤ/b` for small `a, b`: class counts equal
/// fixed character counts, and enumeration finds all of them.
#[test]
fn tbft_on_products_of_cyclic_groups() {
    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    for a in 1..=4 {
        for b in 1..=4 {
            let g = Arc::new(FiniteGroup::direct_product(&FiniteGroup::cyclic(a), &FiniteGroup::cyclic(b)));
            let table = character_table(&g, 100).unwrap();
            let endos = enumerate_endomorphisms(&g, g.generators()).unwrap();
            for phi in &endos {
                let rep = tbft_verify(phi, &table, 3).unwrap();
                assert!(rep.pass, "Z/{a} x Z/{b}: {:?}", rep.rows);
            }
            seen.insert((a, b), endos.len());
        }
    }
    // |End(ℤ/a × ℤ/b)| = a·gcd(a,b)²·b for the 2×2 matrices of maps
    for ((a, b), count) in seen {
        let gcd = num_integer::gcd(a, b);
        assert_eq!(count, a * b * gcd * gcd, "Z/{a} x Z/{b}");
    }
}
