//! First-order state logic over program variables.
//!
//! Terms are variables, integer literals and function applications. Formulas
//! are built from equality, predicates, negation and conjunction; disjunction,
//! implication, disequality and the truth constants are abbreviations that
//! expand on construction.

mod implies;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

pub use implies::{state_implies, Implication};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum StateError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("uninterpreted symbol `{0}`")]
    UninterpretedSymbol(String),
    #[error("formula outside the decidable fragment: {0}")]
    FragmentUnsupported(String),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Int(i64),
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Int(_) => {}
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    fn collect_constants(&self, out: &mut BTreeSet<i64>) {
        match self {
            Term::Var(_) => {}
            Term::Int(n) => {
                out.insert(*n);
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_constants(out)),
        }
    }

    pub fn substitute(&self, var: &str, by: &Term) -> Term {
        match self {
            Term::Var(v) if v == var => by.clone(),
            Term::Var(_) | Term::Int(_) => self.clone(),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.substitute(var, by)).collect()),
        }
    }

    fn has_uninterpreted(&self) -> bool {
        match self {
            Term::App(..) => true,
            _ => false,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Int(n) => write!(f, "{n}"),
            Term::App(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StateFormula {
    And(Box<StateFormula>, Box<StateFormula>),
    Not(Box<StateFormula>),
    Eq(Term, Term),
    Pred(String, Vec<Term>),
}

impl StateFormula {
    /// `0 == 0`, the representation of `true`.
    pub fn truth() -> Self {
        StateFormula::Eq(Term::Int(0), Term::Int(0))
    }

    pub fn falsity() -> Self {
        StateFormula::not(StateFormula::truth())
    }

    pub fn is_truth(&self) -> bool {
        *self == StateFormula::truth()
    }

    pub fn eq(a: Term, b: Term) -> Self {
        StateFormula::Eq(a, b)
    }

    pub fn neq(a: Term, b: Term) -> Self {
        StateFormula::not(StateFormula::Eq(a, b))
    }

    pub fn not(a: StateFormula) -> Self {
        StateFormula::Not(Box::new(a))
    }

    pub fn and(a: StateFormula, b: StateFormula) -> Self {
        StateFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: StateFormula, b: StateFormula) -> Self {
        StateFormula::not(StateFormula::and(StateFormula::not(a), StateFormula::not(b)))
    }

    pub fn implies(a: StateFormula, b: StateFormula) -> Self {
        StateFormula::not(StateFormula::and(a, StateFormula::not(b)))
    }

    /// Left-nested conjunction; the empty conjunction is `true`.
    pub fn conj(parts: impl IntoIterator<Item = StateFormula>) -> Self {
        let mut it = parts.into_iter();
        match it.next() {
            None => StateFormula::truth(),
            Some(first) => it.fold(first, StateFormula::and),
        }
    }

    /// Conjunction that skips `true` operands.
    pub fn conj_nontrivial(parts: impl IntoIterator<Item = StateFormula>) -> Self {
        StateFormula::conj(parts.into_iter().filter(|p| !p.is_truth()))
    }

    /// Flattened top-level conjuncts.
    pub fn conjuncts(&self) -> Vec<&StateFormula> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(f) = stack.pop() {
            match f {
                StateFormula::And(a, b) => {
                    stack.push(b);
                    stack.push(a);
                }
                other => out.push(other),
            }
        }
        out
    }

    /// Conjunct set modulo associativity, commutativity, idempotence and the
    /// `true` unit.
    pub fn aci_set(&self) -> BTreeSet<StateFormula> {
        self.conjuncts().into_iter().filter(|c| !c.is_truth()).cloned().collect()
    }

    /// Canonical representative of the ACI class: sorted, deduplicated conjuncts.
    pub fn aci_normal(&self) -> StateFormula {
        StateFormula::conj(self.aci_set())
    }

    pub fn aci_eq(&self, other: &StateFormula) -> bool {
        self.aci_set() == other.aci_set()
    }

    pub fn substitute(&self, var: &str, by: &Term) -> StateFormula {
        match self {
            StateFormula::And(a, b) => StateFormula::and(a.substitute(var, by), b.substitute(var, by)),
            StateFormula::Not(a) => StateFormula::not(a.substitute(var, by)),
            StateFormula::Eq(s, t) => StateFormula::Eq(s.substitute(var, by), t.substitute(var, by)),
            StateFormula::Pred(p, args) => {
                StateFormula::Pred(p.clone(), args.iter().map(|a| a.substitute(var, by)).collect())
            }
        }
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_terms(&mut |t| t.collect_vars(&mut out));
        out
    }

    pub fn constants(&self) -> BTreeSet<i64> {
        let mut out = BTreeSet::new();
        self.visit_terms(&mut |t| t.collect_constants(&mut out));
        out
    }

    pub fn mentions(&self, var: &str) -> bool {
        self.vars().contains(var)
    }

    /// True when the formula uses function or predicate symbols.
    pub fn has_uninterpreted(&self) -> bool {
        match self {
            StateFormula::And(a, b) => a.has_uninterpreted() || b.has_uninterpreted(),
            StateFormula::Not(a) => a.has_uninterpreted(),
            StateFormula::Eq(s, t) => s.has_uninterpreted() || t.has_uninterpreted(),
            StateFormula::Pred(..) => true,
        }
    }

    fn visit_terms(&self, f: &mut impl FnMut(&Term)) {
        match self {
            StateFormula::And(a, b) => {
                a.visit_terms(f);
                b.visit_terms(f);
            }
            StateFormula::Not(a) => a.visit_terms(f),
            StateFormula::Eq(s, t) => {
                f(s);
                f(t);
            }
            StateFormula::Pred(_, args) => args.iter().for_each(|a| f(a)),
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, unary: bool) -> fmt::Result {
        match self {
            s if s.is_truth() => write!(f, "true"),
            StateFormula::Not(inner) if inner.is_truth() => write!(f, "false"),
            StateFormula::Eq(a, b) => write!(f, "{a} == {b}"),
            StateFormula::Not(inner) => match inner.as_ref() {
                StateFormula::Eq(a, b) => write!(f, "{a} != {b}"),
                other => {
                    write!(f, "!")?;
                    other.fmt_prec(f, true)
                }
            },
            StateFormula::Pred(p, args) => write!(f, "{}", Term::App(p.clone(), args.clone())),
            StateFormula::And(a, b) => {
                if unary {
                    write!(f, "(")?;
                }
                a.fmt_prec(f, false)?;
                write!(f, " && ")?;
                b.fmt_prec(f, true)?;
                if unary {
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for StateFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, false)
    }
}

/// Total assignment of integers to program variables.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProgramState(BTreeMap<String, i64>);

impl ProgramState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, var: &str) -> Option<i64> {
        self.0.get(var).copied()
    }

    pub fn set(&mut self, var: impl Into<String>, value: i64) {
        self.0.insert(var.into(), value);
    }

    pub fn with(mut self, var: impl Into<String>, value: i64) -> Self {
        self.set(var, value);
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &i64)> {
        self.0.iter()
    }

    pub fn vars(&self) -> impl Iterator<Item = &String> {
        self.0.keys()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<(String, i64)> for ProgramState {
    fn from_iter<I: IntoIterator<Item = (String, i64)>>(iter: I) -> Self {
        ProgramState(iter.into_iter().collect())
    }
}

impl fmt::Display for ProgramState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k}={v}")?;
        }
        write!(f, "}}")
    }
}

pub type FunctionDef = Arc<dyn Fn(&[i64]) -> i64 + Send + Sync>;
pub type PredicateDef = Arc<dyn Fn(&[i64]) -> bool + Send + Sync>;

/// Interpretation of function and predicate symbols.
#[derive(Clone, Default)]
pub struct StateInterpretation {
    pub functions: BTreeMap<String, FunctionDef>,
    pub predicates: BTreeMap<String, PredicateDef>,
}

impl fmt::Debug for StateInterpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StateInterpretation")
            .field("functions", &self.functions.keys().collect::<Vec<_>>())
            .field("predicates", &self.predicates.keys().collect::<Vec<_>>())
            .finish()
    }
}

pub fn eval_term(t: &Term, sigma: &ProgramState, interp: Option<&StateInterpretation>) -> Result<i64, StateError> {
    match t {
        Term::Var(v) => sigma.get(v).ok_or_else(|| StateError::UnboundVariable(v.clone())),
        Term::Int(n) => Ok(*n),
        Term::App(name, args) => {
            let def = interp
                .and_then(|i| i.functions.get(name))
                .ok_or_else(|| StateError::UninterpretedSymbol(name.clone()))?;
            let vals = args.iter().map(|a| eval_term(a, sigma, interp)).collect::<Result<Vec<_>, _>>()?;
            Ok(def(&vals))
        }
    }
}

pub fn holds(phi: &StateFormula, sigma: &ProgramState, interp: Option<&StateInterpretation>) -> Result<bool, StateError> {
    match phi {
        StateFormula::And(a, b) => Ok(holds(a, sigma, interp)? && holds(b, sigma, interp)?),
        StateFormula::Not(a) => Ok(!holds(a, sigma, interp)?),
        StateFormula::Eq(s, t) => Ok(eval_term(s, sigma, interp)? == eval_term(t, sigma, interp)?),
        StateFormula::Pred(p, args) => {
            let def = interp
                .and_then(|i| i.predicates.get(p))
                .ok_or_else(|| StateError::UninterpretedSymbol(p.clone()))?;
            let vals = args.iter().map(|a| eval_term(a, sigma, interp)).collect::<Result<Vec<_>, _>>()?;
            Ok(def(&vals))
        }
    }
}

/// `v1 == n1 && ... && vk == nk` over the state's variables in lexicographic order.
pub fn characteristic_formula(sigma: &ProgramState) -> StateFormula {
    StateFormula::conj(sigma.iter().map(|(v, n)| StateFormula::Eq(Term::Var(v.clone()), Term::Int(*n))))
}
