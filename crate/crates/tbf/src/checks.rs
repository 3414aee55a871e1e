//! The structural statements about twisted classes of one finite
//! endomorphism, checked with exhaustive quantifiers.

use serde::Serialize;
use tbf_core::twisted::{
    burnside_average, class_invariance_property, epimorphism_of_classes_property,
    finite_image_finiteness_property, kernel_coset_property, reidemeister_number, restriction_bound,
    shift_bijection_property,
};
use tbf_core::FiniteEndo;

/// Normal subgroups are enumerated as unions of conjugacy classes; groups
/// with more classes than this skip the subgroup-indexed checks.
pub const MAX_CLASSES_FOR_NORMAL_SUBGROUPS: usize = 16;

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct PropertyOutcome {
    pub name: &'static str,
    pub holds: bool,
    /// Instances checked (shifts, subgroups, powers).
    pub instances: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

/// The two readings of the restriction bound for one invariant normal subgroup.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct RestrictionRow {
    pub subgroup_order: usize,
    pub restricted: usize,
    pub number: usize,
    pub conjugacy_classes: usize,
    pub quotient_fixed: usize,
    pub endo_reading: bool,
    pub group_reading: bool,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct PropertySuite {
    pub outcomes: Vec<PropertyOutcome>,
    pub restriction: Vec<RestrictionRow>,
}

impl PropertySuite {
    /// The restriction rows are a report, not a pass/fail gate.
    pub fn pass(&self) -> bool {
        self.outcomes.iter().all(|o| o.holds)
    }
}

fn outcome(name: &'static str, instances: usize, failure: Option<String>) -> PropertyOutcome {
    PropertyOutcome {
        name,
        holds: failure.is_none(),
        instances,
        witness: failure,
    }
}

pub fn property_suite(phi: &FiniteEndo, max_power: usize) -> PropertySuite {
    let g = phi.group();
    let n = g.order();
    let mut outcomes = Vec::new();

    let trivial = FiniteEndo::trivial(g);
    outcomes.push(outcome(
        "trivial endomorphism has one class",
        1,
        (reidemeister_number(&trivial, 1) != 1).then(|| "R(trivial) ≠ 1".to_string()),
    ));

    let k = kernel_coset_property(phi);
    outcome_from_check(&mut outcomes, "classes are unions of kernel cosets", 1, k.holds, k.witness);

    let mut shift_failure = None;
    for s in 0..n {
        let c = shift_bijection_property(phi, s);
        if !c.holds {
            shift_failure = Some(format!("shift by {s}: {:?}", c.witness));
            break;
        }
    }
    outcomes.push(outcome("right shifts carry classes onto classes of the twisted map", n, shift_failure));

    let c = class_invariance_property(phi);
    outcome_from_check(&mut outcomes, "each class is mapped into itself", 1, c.holds, c.witness);

    let f = finite_image_finiteness_property(phi);
    outcomes.push(outcome(
        "R agrees with the endomorphism induced on G/ker",
        1,
        (!f.holds).then(|| format!("R = {}, quotient R = {}", f.number, f.quotient_number)),
    ));

    let mut oracle_failure = None;
    for p in 1..=max_power {
        let iterate = phi.iterate(p);
        let orbit = reidemeister_number(&iterate, 1);
        match burnside_average(&iterate) {
            Ok(avg) if avg == orbit => {}
            Ok(avg) => {
                oracle_failure = Some(format!("power {p}: orbits {orbit}, average {avg}"));
                break;
            }
            Err(e) => {
                oracle_failure = Some(format!("power {p}: {e}"));
                break;
            }
        }
    }
    outcomes.push(outcome("orbit count equals Burnside average", max_power, oracle_failure));

    let mut restriction = Vec::new();
    if let Some(normals) = g.normal_subgroups(MAX_CLASSES_FOR_NORMAL_SUBGROUPS) {
        let invariant: Vec<Vec<usize>> = normals
            .into_iter()
            .filter(|h| {
                let mut member = vec![false; n];
                h.iter().for_each(|&x| member[x] = true);
                h.iter().all(|&x| member[phi.apply(x)])
            })
            .collect();
        let mut epi_failure = None;
        for h in &invariant {
            match epimorphism_of_classes_property(phi, h) {
                Ok(rep) if rep.check.holds && rep.downstairs <= rep.upstairs => {}
                Ok(rep) => {
                    epi_failure = Some(format!("subgroup of order {}: {:?}", h.len(), rep.check.witness));
                    break;
                }
                Err(e) => {
                    epi_failure = Some(format!("subgroup of order {}: {e}", h.len()));
                    break;
                }
            }
            if let Ok(b) = restriction_bound(phi, h) {
                restriction.push(RestrictionRow {
                    subgroup_order: h.len(),
                    restricted: b.restricted,
                    number: b.number,
                    conjugacy_classes: b.conjugacy_classes,
                    quotient_fixed: b.quotient_fixed,
                    endo_reading: b.endo_reading_holds,
                    group_reading: b.group_reading_holds,
                });
            }
        }
        outcomes.push(outcome(
            "classes map onto classes of invariant quotients",
            invariant.len(),
            epi_failure,
        ));
    }
    PropertySuite { outcomes, restriction }
}

fn outcome_from_check(
    out: &mut Vec<PropertyOutcome>,
    name: &'static str,
    instances: usize,
    holds: bool,
    witness: Option<Vec<usize>>,
) {
    out.push(outcome(name, instances, (!holds).then(|| format!("{:?}", witness.unwrap_or_default()))));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::finite_corpus;
    use tbf_core::Caps;

    #[test]
    fn s3_suite_passes() {
        let caps = Caps::default();
        let s3 = finite_corpus(&caps).into_iter().find(|g| g.name == "S3").unwrap();
        for phi in s3.endomorphisms() {
            let suite = property_suite(&phi, 3);
            assert!(suite.pass(), "{suite:?}");
            // {e}, A3 and S3: images of 3-cycles have order 1 or 3
            assert_eq!(suite.restriction.len(), 3);
        }
    }
}
