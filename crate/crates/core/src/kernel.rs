//! Kernel generation: finding lifted atoms that carry the state-relevant
//! content of a domain assertion, by deduction or by abduction.

use std::collections::BTreeSet;

use crate::dl::{DlError, DomainFormula, DomainSet, Reasoner, Satisfiability, HAS_VALUE};
use crate::lifting::SpecLifting;

/// Candidate kernel atoms: `NonZero(s)` and `hasValue(s, n)` for every stub
/// `s` and every relevant constant `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidatePool {
    pub atoms: Vec<DomainFormula>,
}

impl CandidatePool {
    pub fn build(lifting: &SpecLifting, constants: &BTreeSet<i64>) -> Self {
        let mut consts = constants.clone();
        consts.insert(0);
        let mut atoms = Vec::new();
        for stub in lifting.var_to_stub().values() {
            atoms.push(DomainFormula::non_zero(stub.clone()));
            for &n in &consts {
                atoms.push(DomainFormula::has_value(stub.clone(), n));
            }
        }
        CandidatePool { atoms }
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelResult {
    /// A subset of `entailed` that entails all of it under K.
    pub atoms: DomainSet,
    /// Every pool atom entailed by the input.
    pub entailed: DomainSet,
    /// Whether `atoms` entails the input back.
    pub covers: bool,
}

/// Pool atoms entailed by `delta`, reduced by dropping atoms that follow
/// from the ones kept (`NonZero` atoms are tried first).
pub fn alpha_deduce(delta: &DomainSet, reasoner: &Reasoner, pool: &CandidatePool) -> Result<KernelResult, DlError> {
    let premises: Vec<DomainFormula> = delta.iter().cloned().collect();
    let mut entailed = DomainSet::new();
    for a in &pool.atoms {
        if reasoner.entails_one(&premises, a)?.is_entailed() {
            entailed.insert(a.clone());
        }
    }
    let mut order: Vec<&DomainFormula> = entailed.iter().collect();
    order.sort_by_key(|f| !matches!(f, DomainFormula::ConceptAssertion(..)));
    let mut kept = entailed.clone();
    for a in order {
        kept.remove(a);
        let rest: Vec<DomainFormula> = kept.iter().cloned().collect();
        if !reasoner.entails_one(&rest, a)?.is_entailed() {
            kept.insert(a.clone());
        }
    }
    let covers = delta.is_empty() || reasoner.entails(kept.iter(), delta.iter())?.is_entailed();
    Ok(KernelResult { atoms: kept, entailed, covers })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AbductionResult {
    /// Subset-minimal explanations, ordered by size then lexicographically.
    Explanations(Vec<DomainSet>),
    NoExplanation,
}

/// Subsets `S` of the pool with at most `max_size` atoms such that
/// `K ∪ S` is consistent and entails `delta`, keeping only minimal ones.
pub fn alpha_abduce(
    delta: &DomainSet,
    reasoner: &Reasoner,
    pool: &CandidatePool,
    max_size: usize,
) -> Result<AbductionResult, DlError> {
    if reasoner.entails(std::iter::empty(), delta.iter())?.is_entailed() {
        return Ok(AbductionResult::Explanations(vec![DomainSet::new()]));
    }
    let atoms: Vec<&DomainFormula> = pool
        .atoms
        .iter()
        .filter(|a| reasoner.consistent(std::iter::once(*a)).map(|s| s != Satisfiability::NoModel).unwrap_or(false))
        .collect();
    let mut found: Vec<DomainSet> = Vec::new();
    let mut idx: Vec<usize> = Vec::new();
    for size in 1..=max_size.min(atoms.len()) {
        idx.clear();
        idx.extend(0..size);
        loop {
            let subset: DomainSet = idx.iter().map(|&i| atoms[i].clone()).collect();
            if !found.iter().any(|f| f.is_subset(&subset)) && !clashes(&subset, reasoner) {
                let consistent = reasoner.consistent(subset.iter())? != Satisfiability::NoModel;
                if consistent && reasoner.entails(subset.iter(), delta.iter())?.is_entailed() {
                    found.push(subset);
                }
            }
            if !next_combination(&mut idx, atoms.len()) {
                break;
            }
        }
    }
    found.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.iter().cmp(b.iter())));
    if found.is_empty() {
        Ok(AbductionResult::NoExplanation)
    } else {
        Ok(AbductionResult::Explanations(found))
    }
}

/// Cheap syntactic inconsistency under closure: two values for one stub, or
/// a zero value next to `NonZero`.
fn clashes(set: &DomainSet, reasoner: &Reasoner) -> bool {
    if !reasoner.kb().closure {
        return false;
    }
    let mut seen: Vec<(&str, i64)> = Vec::new();
    for f in set {
        if let DomainFormula::DataAssertion(t, s, n) = f {
            if t == HAS_VALUE {
                if seen.iter().any(|(o, m)| *o == s.as_str() && *m != *n) {
                    return true;
                }
                seen.push((s, *n));
            }
        }
    }
    set.iter().any(|f| match f {
        DomainFormula::ConceptAssertion(_, s) => {
            set.contains(&DomainFormula::non_zero(s.clone())) && set.contains(&DomainFormula::has_value(s.clone(), 0))
        }
        _ => false,
    })
}

fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinations_enumerate_lexicographically() {
        let mut idx = vec![0, 1];
        let mut all = vec![idx.clone()];
        while next_combination(&mut idx, 4) {
            all.push(idx.clone());
        }
        assert_eq!(all, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
    }
}
