//! The built-in verification corpus: small finite groups with all their
//! endomorphisms, and a handful of lattice-by-finite extensions.

use std::sync::Arc;

use num_bigint::BigInt;
use tbf_core::extension::validate_extension_endo;
use tbf_core::group::{enumerate_endomorphisms, GroupError};
use tbf_core::{Caps, ExtensionEndo, FiniteEndo, FiniteGroup, IntMatrix, LatticeExtension};

pub struct CorpusGroup {
    pub name: String,
    pub group: Arc<FiniteGroup>,
}

impl CorpusGroup {
    pub fn endomorphisms(&self) -> Vec<FiniteEndo> {
        enumerate_endomorphisms(&self.group, self.group.generators()).expect("group generators generate")
    }
}

fn permutation_group(name: &str, generators: &[&[usize]], caps: &Caps) -> Result<CorpusGroup, GroupError> {
    let gens: Vec<Vec<usize>> = generators.iter().map(|g| g.to_vec()).collect();
    let (group, _) = FiniteGroup::build_from_permutations(&gens, caps.closure)?;
    Ok(CorpusGroup {
        name: name.to_string(),
        group: Arc::new(group),
    })
}

/// `ℤ/n` for `n ≤ 12`, then S3, D4, Q8, A4, D6.
pub fn finite_corpus(caps: &Caps) -> Vec<CorpusGroup> {
    let mut out: Vec<CorpusGroup> = (1..=12)
        .map(|n| CorpusGroup {
            name: format!("Z/{n}"),
            group: Arc::new(FiniteGroup::cyclic(n)),
        })
        .collect();
    let named: [(&str, &[&[usize]]); 5] = [
        ("S3", &[&[1, 0, 2], &[1, 2, 0]]),
        ("D4", &[&[1, 2, 3, 0], &[2, 1, 0, 3]]),
        // left-regular action of Q8 on {1, i, j, k, −1, −i, −j, −k} reordered
        ("Q8", &[&[2, 3, 1, 0, 6, 7, 5, 4], &[4, 5, 7, 6, 1, 0, 2, 3]]),
        ("A4", &[&[1, 2, 0, 3], &[1, 0, 3, 2]]),
        ("D6", &[&[1, 2, 3, 4, 5, 0], &[5, 4, 3, 2, 1, 0]]),
    ];
    for (name, gens) in named {
        out.push(permutation_group(name, gens, caps).expect("corpus generators are permutations"));
    }
    out
}

/// The quick subset used by the smoke suite.
pub fn smoke_corpus(caps: &Caps) -> Vec<CorpusGroup> {
    finite_corpus(caps)
        .into_iter()
        .filter(|g| matches!(g.name.as_str(), "Z/1" | "Z/4" | "Z/6" | "S3" | "Q8"))
        .collect()
}

pub struct CorpusExtension {
    pub name: &'static str,
    pub endo: ExtensionEndo,
}

fn m(rows: &[&[i64]]) -> IntMatrix {
    IntMatrix::from_i64(rows)
}

fn vecs(n: usize, order: usize) -> Vec<Vec<BigInt>> {
    vec![vec![BigInt::from(0); n]; order]
}

fn rotation_powers() -> Vec<IntMatrix> {
    let r = m(&[&[0, -1], &[1, 0]]);
    (0..4).map(|k| r.pow(k)).collect()
}

/// Extension instances: `ℤ² ⋊ ℤ/2` with `θ = −I` in three variants, the
/// rotation action of `ℤ/4`, diagonal sign actions of `ℤ/2 × ℤ/2` with and
/// without a nontrivial `ψ`, pure lattices (trivial `F`) and a trivial endomorphism.
pub fn extension_corpus() -> Vec<CorpusExtension> {
    let z2 = Arc::new(FiniteGroup::cyclic(2));
    let minus = Arc::new(LatticeExtension::new(2, Arc::clone(&z2), vec![IntMatrix::identity(2), IntMatrix::scalar(2, -1)]).expect("θ = −I"));
    let mut shifted = vecs(2, 2);
    shifted[1] = vec![BigInt::from(1), BigInt::from(0)];

    let z4 = Arc::new(FiniteGroup::cyclic(4));
    let rot = Arc::new(LatticeExtension::new(2, z4, rotation_powers()).expect("rotation action"));

    let klein = Arc::new(FiniteGroup::direct_product(&z2, &z2));
    let signs = |a: i64, b: i64| m(&[&[a, 0], &[0, b]]);
    let diag = Arc::new(
        LatticeExtension::new(2, klein, vec![signs(1, 1), signs(1, -1), signs(-1, 1), signs(-1, -1)]).expect("sign action"),
    );

    let line = Arc::new(LatticeExtension::new(1, Arc::clone(&z2), vec![m(&[&[1]]), m(&[&[-1]])]).expect("reflection"));
    let plane = Arc::new(LatticeExtension::pure_lattice(2));
    let axis = Arc::new(LatticeExtension::pure_lattice(1));

    let make = |name, ext: &Arc<LatticeExtension>, mat: IntMatrix, psi: Vec<usize>, c: Vec<Vec<BigInt>>| CorpusExtension {
        name,
        endo: validate_extension_endo(ext, mat, psi, c).expect("corpus endomorphisms are valid"),
    };
    vec![
        make("Z2 x| Z/2 (theta=-I), M=2I", &minus, IntMatrix::scalar(2, 2), vec![0, 1], vecs(2, 2)),
        make("Z2 x| Z/2 (theta=-I), M=[[2,1],[1,1]]", &minus, m(&[&[2, 1], &[1, 1]]), vec![0, 1], vecs(2, 2)),
        make("Z2 x| Z/2 (theta=-I), M=3I, c(f)=(1,0)", &minus, IntMatrix::scalar(2, 3), vec![0, 1], shifted),
        make("Z2 x| Z/4 (rotation), M=I-R", &rot, m(&[&[1, 1], &[-1, 1]]), vec![0, 1, 2, 3], vecs(2, 4)),
        make("Z2 x| Z/2xZ/2 (signs), M=2I", &diag, IntMatrix::scalar(2, 2), vec![0, 1, 2, 3], vecs(2, 4)),
        make("Z2 x| Z/2xZ/2 (signs), M=[[0,1],[2,0]], psi=swap", &diag, m(&[&[0, 1], &[2, 0]]), vec![0, 2, 1, 3], vecs(2, 4)),
        make("Z x| Z/2, trivial endomorphism", &line, m(&[&[0]]), vec![0, 0], vecs(1, 2)),
        make("Z2 (F trivial), M=[[2,1],[1,1]]", &plane, m(&[&[2, 1], &[1, 1]]), vec![0], vecs(2, 1)),
        make("Z (F trivial), M=[[-1]]", &axis, m(&[&[-1]]), vec![0], vecs(1, 1)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_orders() {
        let caps = Caps::default();
        let orders: Vec<(String, usize)> = finite_corpus(&caps)
            .iter()
            .map(|g| (g.name.clone(), g.group.order()))
            .collect();
        let named = &orders[12..];
        assert_eq!(
            named,
            [
                ("S3".to_string(), 6),
                ("D4".to_string(), 8),
                ("Q8".to_string(), 8),
                ("A4".to_string(), 12),
                ("D6".to_string(), 12)
            ]
        );
    }

    #[test]
    fn q8_has_one_involution() {
        let caps = Caps::default();
        let q8 = finite_corpus(&caps).into_iter().find(|g| g.name == "Q8").unwrap();
        let involutions = (1..8).filter(|&x| q8.group.element_order(x) == 2).count();
        assert_eq!(involutions, 1);
        assert!((0..8).all(|x| q8.group.element_order(x) != 8));
    }

    #[test]
    fn extensions_validate() {
        assert!(extension_corpus().len() >= 5);
    }
}
