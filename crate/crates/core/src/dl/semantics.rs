use std::collections::BTreeSet;

use super::{Concept, DomainFormula, DomainInterpretation};

/// Set of elements of `interp` that belong to `c`.
pub fn concept_extension(c: &Concept, interp: &DomainInterpretation) -> BTreeSet<usize> {
    let all: BTreeSet<usize> = (0..interp.universe.len()).collect();
    match c {
        Concept::Top => all,
        Concept::Bottom => BTreeSet::new(),
        Concept::Atomic(a) => interp.concepts.get(a).cloned().unwrap_or_default(),
        Concept::Nominal(o) => interp.element(o).into_iter().collect(),
        Concept::Not(inner) => all.difference(&concept_extension(inner, interp)).copied().collect(),
        Concept::And(a, b) => concept_extension(a, interp)
            .intersection(&concept_extension(b, interp))
            .copied()
            .collect(),
        Concept::Or(a, b) => concept_extension(a, interp).union(&concept_extension(b, interp)).copied().collect(),
        Concept::ExistsRole(r, inner) => {
            let target = concept_extension(inner, interp);
            let pairs = interp.roles.get(r);
            all.into_iter()
                .filter(|x| pairs.is_some_and(|p| p.iter().any(|(a, b)| a == x && target.contains(b))))
                .collect()
        }
        Concept::ForallRole(r, inner) => {
            let target = concept_extension(inner, interp);
            let pairs = interp.roles.get(r);
            all.into_iter()
                .filter(|x| pairs.is_none_or(|p| p.iter().all(|(a, b)| a != x || target.contains(b))))
                .collect()
        }
        Concept::ExistsData(t, n) => {
            let pairs = interp.data_roles.get(t);
            all.into_iter()
                .filter(|x| pairs.is_some_and(|p| p.contains(&(*x, *n))))
                .collect()
        }
        Concept::ForallData(t, n) => {
            let pairs = interp.data_roles.get(t);
            all.into_iter()
                .filter(|x| pairs.is_none_or(|p| p.iter().all(|(a, v)| a != x || v == n)))
                .collect()
        }
    }
}

/// Whether `interp` satisfies `f`. Assertions about individuals that the
/// interpretation does not name are false.
pub fn satisfies(interp: &DomainInterpretation, f: &DomainFormula) -> bool {
    match f {
        DomainFormula::Subsumption(c, d) => concept_extension(c, interp).is_subset(&concept_extension(d, interp)),
        DomainFormula::ConceptAssertion(c, o) => {
            interp.element(o).is_some_and(|x| concept_extension(c, interp).contains(&x))
        }
        DomainFormula::RoleAssertion(r, a, b) => match (interp.element(a), interp.element(b)) {
            (Some(x), Some(y)) => interp.roles.get(r).is_some_and(|p| p.contains(&(x, y))),
            _ => false,
        },
        DomainFormula::DataAssertion(t, o, n) => interp
            .element(o)
            .is_some_and(|x| interp.data_roles.get(t).is_some_and(|p| p.contains(&(x, *n)))),
    }
}

pub fn satisfies_all<'a>(interp: &DomainInterpretation, fs: impl IntoIterator<Item = &'a DomainFormula>) -> bool {
    fs.into_iter().all(|f| satisfies(interp, f))
}
