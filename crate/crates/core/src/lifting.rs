//! Lifting between the state tier and the domain tier.
//!
//! The direct lifting maps `v == n` to `hasValue(s_v, n)` and `v != 0` to
//! `NonZero(s_v)`, where `s_v` is the stub individual of `v`. Its inverse
//! maps those formulas back and reads every other kernel formula as `true`.

use std::collections::BTreeMap;

use crate::dl::{
    Concept, DlError, DomainFormula, DomainSet, KnowledgeBase, Reasoner, Satisfiability, Signature, HAS_VALUE, NON_ZERO,
};
use crate::state::{characteristic_formula, holds, ProgramState, StateFormula, Term};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LiftError {
    #[error("`{0}` is outside the liftable fragment")]
    OutsideLiftableFragment(String),
    #[error("`{formula}` uses symbols outside the kernel signature: {missing}")]
    SignatureViolation { formula: String, missing: String },
}

/// A specification lifting: a stub per variable plus a translation of
/// atomic state formulas. `lift_spec` and `lift_state` derive from it.
pub trait Lifting {
    fn stub(&self, var: &str) -> String;

    /// Domain formulas for one conjunct; empty when the conjunct is valid.
    fn lift_atom(&self, atom: &StateFormula) -> Result<Vec<DomainFormula>, LiftError>;

    fn lift_spec(&self, phi: &StateFormula) -> Result<DomainSet, LiftError> {
        let mut out = DomainSet::new();
        for c in phi.conjuncts() {
            out.extend(self.lift_atom(c)?);
        }
        Ok(out)
    }

    /// Lifts the liftable conjuncts and drops the rest.
    fn lift_liftable(&self, phi: &StateFormula) -> DomainSet {
        phi.conjuncts().into_iter().filter_map(|c| self.lift_atom(c).ok()).flatten().collect()
    }

    fn lift_state(&self, sigma: &ProgramState) -> DomainSet {
        self.lift_spec(&characteristic_formula(sigma)).expect("characteristic formulas are liftable")
    }
}

/// The direct lifting over a fixed set of program variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecLifting {
    var_to_stub: BTreeMap<String, String>,
    kernel: Signature,
}

impl SpecLifting {
    /// Binds `vars` to stubs: the declared stub where the knowledge base has
    /// one, `var_<v>` otherwise. Returns the lifting and the knowledge base
    /// extended with the default stubs and the definition of `NonZero`.
    pub fn bind(kb: &KnowledgeBase, vars: impl IntoIterator<Item = String>) -> (SpecLifting, KnowledgeBase) {
        let mut kb = kb.clone();
        let mut var_to_stub = BTreeMap::new();
        for s in &kb.stubs {
            var_to_stub.insert(s.var.clone(), s.individual.clone());
        }
        for v in vars {
            if !var_to_stub.contains_key(&v) {
                let s = format!("var_{v}");
                kb.signature.nominals.insert(s.clone());
                kb.value_holders.insert(s.clone());
                var_to_stub.insert(v, s);
            }
        }
        kb.signature.concepts.insert(NON_ZERO.into());
        kb.signature.data_roles.insert(HAS_VALUE.into());
        for f in DomainFormula::equivalence(Concept::atomic(NON_ZERO), Concept::not(Concept::some_value(HAS_VALUE, 0))) {
            kb.add_axiom(f);
        }
        let mut kernel = kb.full_signature();
        kernel.nominals.extend(var_to_stub.values().cloned());
        (SpecLifting { var_to_stub, kernel }, kb)
    }

    pub fn var_to_stub(&self) -> &BTreeMap<String, String> {
        &self.var_to_stub
    }

    pub fn var_of_stub(&self, stub: &str) -> Option<&str> {
        self.var_to_stub.iter().find(|(_, s)| s.as_str() == stub).map(|(v, _)| v.as_str())
    }

    pub fn kernel_signature(&self) -> &Signature {
        &self.kernel
    }

    pub fn check_signature(&self, delta: &DomainSet) -> Result<(), LiftError> {
        for f in delta {
            let missing = f.signature().missing_from(&self.kernel);
            if !missing.is_empty() {
                return Err(LiftError::SignatureViolation { formula: f.to_string(), missing: missing.join(", ") });
            }
        }
        Ok(())
    }

    /// Inverse lifting: `hasValue(s_v, n)` to `v == n`, `NonZero(s_v)` to
    /// `v != 0`, any other kernel formula to `true`.
    pub fn delift(&self, delta: &DomainSet) -> Result<StateFormula, LiftError> {
        self.check_signature(delta)?;
        let mut parts = Vec::new();
        for f in delta {
            match f {
                DomainFormula::DataAssertion(t, s, n) if t == HAS_VALUE => {
                    if let Some(v) = self.var_of_stub(s) {
                        parts.push(StateFormula::eq(Term::var(v), Term::Int(*n)));
                    }
                }
                DomainFormula::ConceptAssertion(Concept::Atomic(c), s) if c == NON_ZERO => {
                    if let Some(v) = self.var_of_stub(s) {
                        parts.push(StateFormula::neq(Term::var(v), Term::Int(0)));
                    }
                }
                _ => {}
            }
        }
        Ok(StateFormula::conj(parts))
    }

    pub fn is_liftable(&self, phi: &StateFormula) -> bool {
        self.lift_spec(phi).is_ok()
    }
}

impl Lifting for SpecLifting {
    fn stub(&self, var: &str) -> String {
        self.var_to_stub.get(var).cloned().unwrap_or_else(|| format!("var_{var}"))
    }

    fn lift_atom(&self, atom: &StateFormula) -> Result<Vec<DomainFormula>, LiftError> {
        direct_lift_atom(atom, |v| self.stub(v), |s, n| DomainFormula::has_value(s, n))
    }
}

/// Shared shape of direct liftings; `value` builds the formula for `v == n`.
pub fn direct_lift_atom(
    atom: &StateFormula,
    stub: impl Fn(&str) -> String,
    value: impl Fn(String, i64) -> DomainFormula,
) -> Result<Vec<DomainFormula>, LiftError> {
    let outside = || Err(LiftError::OutsideLiftableFragment(atom.to_string()));
    match atom {
        StateFormula::Eq(Term::Var(v), Term::Int(n)) | StateFormula::Eq(Term::Int(n), Term::Var(v)) => {
            Ok(vec![value(stub(v), *n)])
        }
        StateFormula::Eq(Term::Int(a), Term::Int(b)) if a == b => Ok(vec![]),
        StateFormula::Not(inner) => match inner.as_ref() {
            StateFormula::Eq(Term::Var(v), Term::Int(0)) | StateFormula::Eq(Term::Int(0), Term::Var(v)) => {
                Ok(vec![DomainFormula::non_zero(stub(v))])
            }
            StateFormula::Eq(Term::Int(a), Term::Int(b)) if a != b => Ok(vec![]),
            _ => outside(),
        },
        _ => outside(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompatViolation {
    pub state: ProgramState,
    pub formula: StateFormula,
    pub missing: DomainFormula,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CompatibilityReport {
    pub states_checked: usize,
    /// States whose lifting is inconsistent with the knowledge base; they
    /// have no lifted model and are not checked further.
    pub unliftable_states: Vec<ProgramState>,
    pub formulas_checked: usize,
    pub violations: Vec<CompatViolation>,
}

/// Every state over `vars` with values from `domain`, in lexicographic order.
pub fn enumerate_states(vars: &[String], domain: &[i64]) -> Vec<ProgramState> {
    let mut out = vec![ProgramState::new()];
    for v in vars {
        let mut next = Vec::with_capacity(out.len() * domain.len());
        for s in &out {
            for &n in domain {
                next.push(s.clone().with(v.clone(), n));
            }
        }
        out = next;
    }
    out
}

/// Checks that whenever a state satisfies a liftable formula, the lifted
/// state entails the lifted formula.
pub fn check_compatibility(
    lifting: &dyn Lifting,
    reasoner: &Reasoner,
    vars: &[String],
    domain: &[i64],
    formulas: &[StateFormula],
) -> Result<CompatibilityReport, DlError> {
    let mut report = CompatibilityReport::default();
    let lifted: Vec<(usize, DomainSet)> = formulas
        .iter()
        .enumerate()
        .filter_map(|(i, f)| lifting.lift_spec(f).ok().map(|d| (i, d)))
        .collect();
    report.formulas_checked = lifted.len();
    for sigma in enumerate_states(vars, domain) {
        report.states_checked += 1;
        let ls = lifting.lift_state(&sigma);
        if reasoner.consistent(ls.iter())? == Satisfiability::NoModel {
            report.unliftable_states.push(sigma);
            continue;
        }
        for (i, target) in &lifted {
            let phi = &formulas[*i];
            if !holds(phi, &sigma, None).unwrap_or(false) {
                continue;
            }
            for goal in target {
                if !reasoner.entails_one(&ls.iter().cloned().collect::<Vec<_>>(), goal)?.is_entailed() {
                    report.violations.push(CompatViolation { state: sigma.clone(), formula: phi.clone(), missing: goal.clone() });
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lifting() -> SpecLifting {
        let mut kb = KnowledgeBase::new();
        kb.add_stub(crate::dl::Stub { role: "wheels".into(), owner: "c".into(), individual: "wheelsVar".into(), var: "wheels".into() });
        SpecLifting::bind(&kb, ["wheels".to_string(), "x".to_string()]).0
    }

    #[test]
    fn lifts_fragment() {
        let l = lifting();
        let phi = crate::lang::parse_state_formula("wheels == 4 && 0 != x && 3 == 3").unwrap();
        let d = l.lift_spec(&phi).unwrap();
        let expect: DomainSet = [DomainFormula::has_value("wheelsVar", 4), DomainFormula::non_zero("var_x")].into();
        assert_eq!(d, expect);
        let bad = crate::lang::parse_state_formula("wheels == x").unwrap();
        assert!(matches!(l.lift_spec(&bad), Err(LiftError::OutsideLiftableFragment(_))));
        assert!(l.lift_liftable(&StateFormula::and(bad, phi)).len() == 2);
    }

    #[test]
    fn delift_inverts_kernel_atoms() {
        let l = lifting();
        let d: DomainSet = [DomainFormula::has_value("wheelsVar", 4), DomainFormula::non_zero("var_x")].into();
        assert_eq!(l.delift(&d).unwrap().to_string(), "x != 0 && wheels == 4");
        let foreign: DomainSet = [DomainFormula::instance(Concept::atomic("Unknown"), "c")].into();
        assert!(matches!(l.delift(&foreign), Err(LiftError::SignatureViolation { .. })));
    }

    #[test]
    fn states_enumerate_in_order() {
        let s = enumerate_states(&["a".into(), "b".into()], &[0, 1]);
        assert_eq!(s.len(), 4);
        assert_eq!(s[1].to_string(), "{a=0, b=1}");
    }
}
