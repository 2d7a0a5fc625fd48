use std::fmt;

use crate::dl::{format_set, DlError, DomainFormula, DomainSet, Reasoner, Satisfiability, Verdict};
use crate::kernel::CandidatePool;
use crate::lang::Program;
use crate::lifting::{LiftError, Lifting, SpecLifting};
use crate::state::{holds, state_implies, Implication, ProgramState, StateError, StateFormula, Term};

/// `[ D | S ]`: a set of domain formulas and a state formula.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TwoTierAssertion {
    pub domain: DomainSet,
    pub state: StateFormula,
}

impl TwoTierAssertion {
    pub fn new(domain: DomainSet, state: StateFormula) -> Self {
        TwoTierAssertion { domain, state }
    }

    pub fn state_only(state: StateFormula) -> Self {
        TwoTierAssertion { domain: DomainSet::new(), state }
    }

    pub fn domain_only(domain: DomainSet) -> Self {
        TwoTierAssertion { domain, state: StateFormula::truth() }
    }

    pub fn truth() -> Self {
        TwoTierAssertion::state_only(StateFormula::truth())
    }

    /// Substitutes in the state tier only; domain formulas mention no
    /// program variables.
    pub fn substitute(&self, var: &str, by: &Term) -> Self {
        TwoTierAssertion { domain: self.domain.clone(), state: self.state.substitute(var, by) }
    }

    /// Equal domain sets and state tiers equal modulo ACI of conjunction.
    pub fn aci_eq(&self, other: &TwoTierAssertion) -> bool {
        self.domain == other.domain && self.state.aci_eq(&other.state)
    }

    pub fn with_domain(&self, extra: &DomainSet) -> Self {
        let mut domain = self.domain.clone();
        domain.extend(extra.iter().cloned());
        TwoTierAssertion { domain, state: self.state.clone() }
    }

    pub fn with_state(&self, extra: StateFormula) -> Self {
        TwoTierAssertion { domain: self.domain.clone(), state: conjoin(&self.state, &extra) }
    }
}

impl fmt::Display for TwoTierAssertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let state = if self.state.is_truth() { "-".to_string() } else { self.state.to_string() };
        write!(f, "[ {} | {} ]", format_set(&self.domain), state)
    }
}

/// `a && b`, dropping a `true` operand.
pub fn conjoin(a: &StateFormula, b: &StateFormula) -> StateFormula {
    StateFormula::conj_nontrivial([a.clone(), b.clone()])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ObligationKind {
    DlEntailment,
    StateImplication,
    AssertionImplication,
    SignatureCheck,
}

impl ObligationKind {
    pub fn name(self) -> &'static str {
        match self {
            ObligationKind::DlEntailment => "dl-entailment",
            ObligationKind::StateImplication => "state-implication",
            ObligationKind::AssertionImplication => "assertion-implication",
            ObligationKind::SignatureCheck => "signature-check",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "dl-entailment" => ObligationKind::DlEntailment,
            "state-implication" => ObligationKind::StateImplication,
            "assertion-implication" => ObligationKind::AssertionImplication,
            "signature-check" => ObligationKind::SignatureCheck,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ObligationStatus {
    Proved,
    Failed,
    Unknown,
}

impl ObligationStatus {
    pub fn name(self) -> &'static str {
        match self {
            ObligationStatus::Proved => "proved",
            ObligationStatus::Failed => "failed",
            ObligationStatus::Unknown => "unknown",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "proved" => ObligationStatus::Proved,
            "failed" => ObligationStatus::Failed,
            "unknown" => ObligationStatus::Unknown,
            _ => return None,
        })
    }
}

/// What a rule asks to be established.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Goal {
    Entails(DomainSet, DomainSet),
    StateImplies(StateFormula, StateFormula),
    Implies(TwoTierAssertion, TwoTierAssertion),
    Signature(DomainSet),
}

impl Goal {
    pub fn kind(&self) -> ObligationKind {
        match self {
            Goal::Entails(..) => ObligationKind::DlEntailment,
            Goal::StateImplies(..) => ObligationKind::StateImplication,
            Goal::Implies(..) => ObligationKind::AssertionImplication,
            Goal::Signature(..) => ObligationKind::SignatureCheck,
        }
    }
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Goal::Entails(p, c) => write!(f, "{} |= {}", format_set(p), format_set(c)),
            Goal::StateImplies(a, b) => write!(f, "{a} -> {b}"),
            Goal::Implies(a, b) => write!(f, "{a} -> {b}"),
            Goal::Signature(d) => write!(f, "sig({}) in ker", format_set(d)),
        }
    }
}

/// A discharged goal. `detail` explains a non-proved status: a
/// counter-state, a countermodel, or the bound that was exhausted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Obligation {
    pub kind: ObligationKind,
    pub payload: String,
    pub status: ObligationStatus,
    pub detail: Option<String>,
}

impl Obligation {
    pub fn is_proved(&self) -> bool {
        self.status == ObligationStatus::Proved
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CalcError {
    #[error(transparent)]
    Dl(#[from] DlError),
    #[error(transparent)]
    Lift(#[from] LiftError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
}

/// Everything the calculus is relative to: the knowledge base (inside the
/// reasoner), the lifting, and the candidate pool for kernel generation.
#[derive(Debug)]
pub struct Theory {
    pub reasoner: Reasoner,
    pub lifting: SpecLifting,
    pub pool: CandidatePool,
    /// Fresh values for state implication checks; `None` is one per variable.
    pub fresh: Option<usize>,
}

impl Theory {
    /// Binds every variable of `program` and collects the integer constants
    /// of the program and the knowledge base for the kernel pool.
    pub fn new(kb: &crate::dl::KnowledgeBase, program: &Program, config: crate::dl::ReasonerConfig) -> Self {
        let (lifting, kb) = SpecLifting::bind(kb, program.all_vars());
        let mut constants = program.constants();
        for f in &kb.axioms {
            f.constants(&mut constants);
        }
        let pool = CandidatePool::build(&lifting, &constants);
        Theory { reasoner: Reasoner::new(kb, config), lifting, pool, fresh: None }
    }

    pub fn lift(&self, phi: &StateFormula) -> DomainSet {
        self.lifting.lift_liftable(phi)
    }

    /// Whether the lifted state is consistent with the knowledge base.
    pub fn is_liftable_state(&self, sigma: &ProgramState) -> Result<bool, CalcError> {
        let ls = self.lifting.lift_state(sigma);
        match self.reasoner.consistent(ls.iter())? {
            Satisfiability::Model(_) => Ok(true),
            Satisfiability::NoModel => Ok(false),
            Satisfiability::Unknown(m) => Err(CalcError::Inconclusive(m)),
        }
    }

    /// `σ ⊨ Φ` and `lift(σ) ∪ μ̂(Φ) ⊨K Δ`, with `μ̂` applied to the liftable
    /// conjuncts of `Φ`.
    pub fn assertion_holds(&self, sigma: &ProgramState, a: &TwoTierAssertion) -> Result<bool, CalcError> {
        if !holds(&a.state, sigma, None)? {
            return Ok(false);
        }
        if a.domain.is_empty() {
            return Ok(true);
        }
        let mut premises = self.lifting.lift_state(sigma);
        premises.extend(self.lift(&a.state));
        match self.reasoner.entails(premises.iter(), a.domain.iter())? {
            Verdict::Entailed { .. } => Ok(true),
            Verdict::NotEntailed(_) => Ok(false),
            Verdict::Unknown(m) => Err(CalcError::Inconclusive(m)),
        }
    }

    /// `μ̂(Φ) ⊨K Δ`; the state tier must be liftable as a whole.
    pub fn strongly_consistent(&self, a: &TwoTierAssertion) -> Result<Verdict, CalcError> {
        let lifted = self.lifting.lift_spec(&a.state)?;
        Ok(self.reasoner.entails(lifted.iter(), a.domain.iter())?)
    }

    /// Sufficient check for assertion implication: the state tiers imply
    /// each other and `Δ1 ∪ μ̂(Φ1) ⊨K Δ2`.
    pub fn assertion_implies(&self, a: &TwoTierAssertion, b: &TwoTierAssertion) -> Obligation {
        self.discharge(&Goal::Implies(a.clone(), b.clone()))
    }

    pub fn discharge(&self, goal: &Goal) -> Obligation {
        let (status, detail) = match self.decide(goal) {
            Ok(r) => r,
            Err(e) => (ObligationStatus::Unknown, Some(e.to_string())),
        };
        Obligation { kind: goal.kind(), payload: goal.to_string(), status, detail }
    }

    fn decide(&self, goal: &Goal) -> Result<(ObligationStatus, Option<String>), CalcError> {
        match goal {
            Goal::Entails(p, c) => Ok(verdict_status(self.reasoner.entails(p.iter(), c.iter())?)),
            Goal::StateImplies(a, b) => self.decide_state(a, b),
            Goal::Implies(a, b) => {
                let (st, detail) = self.decide_state(&a.state, &b.state)?;
                if st != ObligationStatus::Proved {
                    return Ok((st, detail.map(|d| format!("state tier: {d}"))));
                }
                if b.domain.is_empty() {
                    return Ok((ObligationStatus::Proved, None));
                }
                let mut premises = a.domain.clone();
                premises.extend(self.lift(&a.state));
                let (st, detail) = verdict_status(self.reasoner.entails(premises.iter(), b.domain.iter())?);
                Ok((st, detail.map(|d| format!("domain tier: {d}"))))
            }
            Goal::Signature(d) => match self.lifting.check_signature(d) {
                Ok(()) => Ok((ObligationStatus::Proved, None)),
                Err(e) => Ok((ObligationStatus::Failed, Some(e.to_string()))),
            },
        }
    }

    fn decide_state(&self, a: &StateFormula, b: &StateFormula) -> Result<(ObligationStatus, Option<String>), CalcError> {
        match state_implies(a, b, self.fresh, None)? {
            Implication::Valid => Ok((ObligationStatus::Proved, None)),
            Implication::Counterexample(s) => Ok((ObligationStatus::Failed, Some(format!("counter-state {s}")))),
        }
    }
}

fn verdict_status(v: Verdict) -> (ObligationStatus, Option<String>) {
    match v {
        Verdict::Entailed { .. } => (ObligationStatus::Proved, None),
        Verdict::NotEntailed(cm) => (
            ObligationStatus::Failed,
            Some(format!("`{}` fails in the countermodel\n{}", cm.violated, cm.model)),
        ),
        Verdict::Unknown(m) => (ObligationStatus::Unknown, Some(m)),
    }
}

/// Domain formulas of the form `hasValue(s, n)` or `NonZero(s)`.
pub fn is_kernel_atom(f: &DomainFormula) -> bool {
    match f {
        DomainFormula::DataAssertion(t, _, _) => t == crate::dl::HAS_VALUE,
        DomainFormula::ConceptAssertion(crate::dl::Concept::Atomic(c), _) => c == crate::dl::NON_ZERO,
        _ => false,
    }
}
