//! Description logic with nominals and concrete integer roles.
//!
//! Concepts, formulas, interpretations and knowledge bases, plus a bounded
//! model finder that decides entailment by refutation.

mod reasoner;
pub mod sat;
mod semantics;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

pub use reasoner::{consistent, entails, Countermodel, Reasoner, ReasonerConfig, Satisfiability, Verdict};
pub use semantics::{concept_extension, satisfies, satisfies_all};

/// Concrete role linking program-variable stubs to their integer value.
pub const HAS_VALUE: &str = "hasValue";
/// Concept defined as `!some hasValue . 0`.
pub const NON_ZERO: &str = "NonZero";

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum DlError {
    #[error("model search exceeded its budget of {0} conflicts")]
    BudgetExceeded(u64),
    #[error("unknown individual `{0}`")]
    UnknownIndividual(String),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Concept {
    Top,
    Bottom,
    Atomic(String),
    Not(Box<Concept>),
    And(Box<Concept>, Box<Concept>),
    Or(Box<Concept>, Box<Concept>),
    ExistsRole(String, Box<Concept>),
    ForallRole(String, Box<Concept>),
    ExistsData(String, i64),
    ForallData(String, i64),
    /// `{o}`; only produced internally (negated role assertions, closure).
    Nominal(String),
}

impl Concept {
    pub fn atomic(name: impl Into<String>) -> Self {
        Concept::Atomic(name.into())
    }

    pub fn not(c: Concept) -> Self {
        Concept::Not(Box::new(c))
    }

    pub fn and(a: Concept, b: Concept) -> Self {
        Concept::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Concept, b: Concept) -> Self {
        Concept::Or(Box::new(a), Box::new(b))
    }

    pub fn some(role: impl Into<String>, c: Concept) -> Self {
        Concept::ExistsRole(role.into(), Box::new(c))
    }

    pub fn all(role: impl Into<String>, c: Concept) -> Self {
        Concept::ForallRole(role.into(), Box::new(c))
    }

    pub fn some_value(role: impl Into<String>, n: i64) -> Self {
        Concept::ExistsData(role.into(), n)
    }

    pub fn all_value(role: impl Into<String>, n: i64) -> Self {
        Concept::ForallData(role.into(), n)
    }

    pub fn nominal(o: impl Into<String>) -> Self {
        Concept::Nominal(o.into())
    }

    pub fn depth(&self) -> usize {
        match self {
            Concept::Top | Concept::Bottom | Concept::Atomic(_) | Concept::Nominal(_) => 0,
            Concept::ExistsData(..) | Concept::ForallData(..) => 1,
            Concept::Not(c) => c.depth(),
            Concept::And(a, b) | Concept::Or(a, b) => a.depth().max(b.depth()),
            Concept::ExistsRole(_, c) | Concept::ForallRole(_, c) => 1 + c.depth(),
        }
    }

    fn collect_signature(&self, sig: &mut Signature) {
        match self {
            Concept::Top | Concept::Bottom => {}
            Concept::Atomic(a) => {
                sig.concepts.insert(a.clone());
            }
            Concept::Not(c) => c.collect_signature(sig),
            Concept::And(a, b) | Concept::Or(a, b) => {
                a.collect_signature(sig);
                b.collect_signature(sig);
            }
            Concept::ExistsRole(r, c) | Concept::ForallRole(r, c) => {
                sig.roles.insert(r.clone());
                c.collect_signature(sig);
            }
            Concept::ExistsData(t, _) | Concept::ForallData(t, _) => {
                sig.data_roles.insert(t.clone());
            }
            Concept::Nominal(o) => {
                sig.nominals.insert(o.clone());
            }
        }
    }

    fn collect_constants(&self, out: &mut BTreeSet<i64>) {
        match self {
            Concept::ExistsData(_, n) | Concept::ForallData(_, n) => {
                out.insert(*n);
            }
            Concept::Not(c) | Concept::ExistsRole(_, c) | Concept::ForallRole(_, c) => c.collect_constants(out),
            Concept::And(a, b) | Concept::Or(a, b) => {
                a.collect_constants(out);
                b.collect_constants(out);
            }
            _ => {}
        }
    }

    fn atoms(&self, out: &mut BTreeSet<String>) {
        let mut sig = Signature::default();
        self.collect_signature(&mut sig);
        out.extend(sig.concepts);
    }

    fn is_simple(&self) -> bool {
        matches!(self, Concept::Top | Concept::Bottom | Concept::Atomic(_))
    }

    // 0: or-level, 1: and-level, 2: unary
    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        match self {
            Concept::Top => write!(f, "Top"),
            Concept::Bottom => write!(f, "Bot"),
            Concept::Atomic(a) => write!(f, "{a}"),
            Concept::Nominal(o) => write!(f, "{{{o}}}"),
            Concept::Not(c) => {
                write!(f, "!")?;
                c.fmt_prec(f, 2)
            }
            Concept::ExistsRole(r, c) => {
                write!(f, "some {r} . ")?;
                c.fmt_prec(f, 2)
            }
            Concept::ForallRole(r, c) => {
                write!(f, "all {r} . ")?;
                c.fmt_prec(f, 2)
            }
            Concept::ExistsData(t, n) => write!(f, "some {t} . {n}"),
            Concept::ForallData(t, n) => write!(f, "all {t} . {n}"),
            Concept::And(a, b) => {
                let paren = prec > 1;
                if paren {
                    write!(f, "(")?;
                }
                a.fmt_prec(f, 1)?;
                write!(f, " & ")?;
                b.fmt_prec(f, 2)?;
                if paren {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Concept::Or(a, b) => {
                let paren = prec > 0;
                if paren {
                    write!(f, "(")?;
                }
                a.fmt_prec(f, 0)?;
                write!(f, " | ")?;
                b.fmt_prec(f, 1)?;
                if paren {
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DomainFormula {
    Subsumption(Concept, Concept),
    ConceptAssertion(Concept, String),
    RoleAssertion(String, String, String),
    DataAssertion(String, String, i64),
}

pub type DomainSet = BTreeSet<DomainFormula>;

impl DomainFormula {
    /// `C == D` as its two subsumptions.
    pub fn equivalence(c: Concept, d: Concept) -> [DomainFormula; 2] {
        [DomainFormula::Subsumption(c.clone(), d.clone()), DomainFormula::Subsumption(d, c)]
    }

    pub fn instance(c: Concept, o: impl Into<String>) -> Self {
        DomainFormula::ConceptAssertion(c, o.into())
    }

    pub fn has_value(o: impl Into<String>, n: i64) -> Self {
        DomainFormula::DataAssertion(HAS_VALUE.into(), o.into(), n)
    }

    pub fn non_zero(o: impl Into<String>) -> Self {
        DomainFormula::ConceptAssertion(Concept::atomic(NON_ZERO), o.into())
    }

    pub fn signature(&self) -> Signature {
        let mut sig = Signature::default();
        self.collect_signature(&mut sig);
        sig
    }

    fn collect_signature(&self, sig: &mut Signature) {
        match self {
            DomainFormula::Subsumption(c, d) => {
                c.collect_signature(sig);
                d.collect_signature(sig);
            }
            DomainFormula::ConceptAssertion(c, o) => {
                c.collect_signature(sig);
                sig.nominals.insert(o.clone());
            }
            DomainFormula::RoleAssertion(r, a, b) => {
                sig.roles.insert(r.clone());
                sig.nominals.insert(a.clone());
                sig.nominals.insert(b.clone());
            }
            DomainFormula::DataAssertion(t, o, _) => {
                sig.data_roles.insert(t.clone());
                sig.nominals.insert(o.clone());
            }
        }
    }

    pub fn constants(&self, out: &mut BTreeSet<i64>) {
        match self {
            DomainFormula::Subsumption(c, d) => {
                c.collect_constants(out);
                d.collect_constants(out);
            }
            DomainFormula::ConceptAssertion(c, _) => c.collect_constants(out),
            DomainFormula::RoleAssertion(..) => {}
            DomainFormula::DataAssertion(_, _, n) => {
                out.insert(*n);
            }
        }
    }
}

impl fmt::Display for DomainFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainFormula::Subsumption(c, d) => {
                // and-level sides keep `|` parenthesized, since it separates tiers
                c.fmt_prec(f, 1)?;
                write!(f, " <= ")?;
                d.fmt_prec(f, 1)
            }
            DomainFormula::ConceptAssertion(c, o) if c.is_simple() => write!(f, "{c}({o})"),
            DomainFormula::ConceptAssertion(c, o) => write!(f, "({c})({o})"),
            DomainFormula::RoleAssertion(r, a, b) => write!(f, "{r}({a}, {b})"),
            DomainFormula::DataAssertion(t, o, n) => write!(f, "{t}({o}, {n})"),
        }
    }
}

/// Comma-separated rendering of a formula set, `-` when empty.
pub fn format_set(set: &DomainSet) -> String {
    if set.is_empty() {
        return "-".into();
    }
    set.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(", ")
}

pub fn set_signature<'a>(formulas: impl IntoIterator<Item = &'a DomainFormula>) -> Signature {
    let mut sig = Signature::default();
    for f in formulas {
        f.collect_signature(&mut sig);
    }
    sig
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    pub concepts: BTreeSet<String>,
    pub roles: BTreeSet<String>,
    pub data_roles: BTreeSet<String>,
    pub nominals: BTreeSet<String>,
}

impl Signature {
    pub fn is_subset(&self, other: &Signature) -> bool {
        self.concepts.is_subset(&other.concepts)
            && self.roles.is_subset(&other.roles)
            && self.data_roles.is_subset(&other.data_roles)
            && self.nominals.is_subset(&other.nominals)
    }

    pub fn extend(&mut self, other: &Signature) {
        self.concepts.extend(other.concepts.iter().cloned());
        self.roles.extend(other.roles.iter().cloned());
        self.data_roles.extend(other.data_roles.iter().cloned());
        self.nominals.extend(other.nominals.iter().cloned());
    }

    /// Symbols of `self` missing from `other`, rendered for diagnostics.
    pub fn missing_from(&self, other: &Signature) -> Vec<String> {
        let mut out = Vec::new();
        out.extend(self.concepts.difference(&other.concepts).map(|s| format!("concept {s}")));
        out.extend(self.roles.difference(&other.roles).map(|s| format!("role {s}")));
        out.extend(self.data_roles.difference(&other.data_roles).map(|s| format!("data-role {s}")));
        out.extend(self.nominals.difference(&other.nominals).map(|s| format!("individual {s}")));
        out
    }
}

/// Finite interpretation. Elements are indices into `universe`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DomainInterpretation {
    pub universe: Vec<String>,
    pub concepts: BTreeMap<String, BTreeSet<usize>>,
    pub roles: BTreeMap<String, BTreeSet<(usize, usize)>>,
    pub data_roles: BTreeMap<String, BTreeSet<(usize, i64)>>,
    pub nominals: BTreeMap<String, usize>,
}

impl DomainInterpretation {
    pub fn element(&self, nominal: &str) -> Option<usize> {
        self.nominals.get(nominal).copied()
    }
}

impl fmt::Display for DomainInterpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = |i: usize| self.universe[i].as_str();
        writeln!(f, "universe: {}", self.universe.join(", "))?;
        for (c, ext) in &self.concepts {
            let items: Vec<&str> = ext.iter().map(|&i| name(i)).collect();
            writeln!(f, "  {c} = {{{}}}", items.join(", "))?;
        }
        for (r, ext) in &self.roles {
            let items: Vec<String> = ext.iter().map(|&(a, b)| format!("({}, {})", name(a), name(b))).collect();
            writeln!(f, "  {r} = {{{}}}", items.join(", "))?;
        }
        for (t, ext) in &self.data_roles {
            let items: Vec<String> = ext.iter().map(|&(a, n)| format!("({}, {n})", name(a))).collect();
            writeln!(f, "  {t} = {{{}}}", items.join(", "))?;
        }
        Ok(())
    }
}

/// `stub r(c, s) for var v`: program variable `v` is represented by the
/// individual `s`, attached to `c` through role `r`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Stub {
    pub role: String,
    pub owner: String,
    pub individual: String,
    pub var: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KnowledgeBase {
    /// Declared symbols.
    pub signature: Signature,
    /// TBox and ABox formulas as written, equivalences expanded.
    pub axioms: Vec<DomainFormula>,
    pub stubs: Vec<Stub>,
    /// Individuals whose `hasValue` is functional under closure: every stub,
    /// including defaults introduced when variables are bound.
    pub value_holders: BTreeSet<String>,
    pub closure: bool,
}

impl KnowledgeBase {
    pub fn new() -> Self {
        KnowledgeBase { closure: true, ..Default::default() }
    }

    pub fn with_closure(&self, closure: bool) -> Self {
        KnowledgeBase { closure, ..self.clone() }
    }

    pub fn add_axiom(&mut self, f: DomainFormula) {
        if !self.axioms.contains(&f) {
            self.axioms.push(f);
        }
    }

    pub fn add_stub(&mut self, stub: Stub) {
        self.signature.roles.insert(stub.role.clone());
        self.signature.nominals.insert(stub.owner.clone());
        self.signature.nominals.insert(stub.individual.clone());
        self.value_holders.insert(stub.individual.clone());
        self.stubs.push(stub);
    }

    /// Axioms the reasoner works with: the written axioms, one role assertion
    /// per stub and, under closure, `(all r . {s})(c)` per stub.
    pub fn effective_axioms(&self) -> Vec<DomainFormula> {
        let mut out = self.axioms.clone();
        for s in &self.stubs {
            let link = DomainFormula::RoleAssertion(s.role.clone(), s.owner.clone(), s.individual.clone());
            if !out.contains(&link) {
                out.push(link);
            }
            if self.closure {
                out.push(DomainFormula::ConceptAssertion(
                    Concept::all(s.role.clone(), Concept::nominal(s.individual.clone())),
                    s.owner.clone(),
                ));
            }
        }
        out
    }

    /// Signature of the declarations together with everything used in axioms.
    pub fn full_signature(&self) -> Signature {
        let mut sig = self.signature.clone();
        sig.extend(&set_signature(self.axioms.iter()));
        sig.nominals.extend(self.value_holders.iter().cloned());
        sig
    }

    pub fn stub_for_var(&self, var: &str) -> Option<&Stub> {
        self.stubs.iter().find(|s| s.var == var)
    }

    /// Whether no concept name depends on itself through the axioms.
    ///
    /// A pair `C <= D`, `D <= C` with one atomic side is read as a definition
    /// of that name; any other subsumption makes every name on its left
    /// depend on every name on its right.
    pub fn tbox_is_acyclic(&self) -> bool {
        let subs: Vec<(&Concept, &Concept)> = self
            .axioms
            .iter()
            .filter_map(|f| match f {
                DomainFormula::Subsumption(c, d) => Some((c, d)),
                _ => None,
            })
            .collect();
        let mut edges: HashMap<String, BTreeSet<String>> = HashMap::new();
        for &(c, d) in &subs {
            let reverse = subs.iter().any(|&(x, y)| x == d && y == c);
            let mut from = BTreeSet::new();
            let mut to = BTreeSet::new();
            if reverse {
                match (c, d) {
                    (Concept::Atomic(a), Concept::Atomic(b)) => {
                        if a > b {
                            from.insert(a.clone());
                            to.insert(b.clone());
                        }
                    }
                    (Concept::Atomic(a), other) => {
                        from.insert(a.clone());
                        other.atoms(&mut to);
                    }
                    (_, Concept::Atomic(_)) => {}
                    (x, y) => {
                        x.atoms(&mut from);
                        y.atoms(&mut to);
                    }
                }
            } else {
                c.atoms(&mut from);
                d.atoms(&mut to);
            }
            for a in from {
                edges.entry(a).or_default().extend(to.iter().cloned());
            }
        }
        // Depth-first search for a back edge.
        let mut state: HashMap<&str, u8> = HashMap::new();
        fn visit<'a>(n: &'a str, edges: &'a HashMap<String, BTreeSet<String>>, state: &mut HashMap<&'a str, u8>) -> bool {
            match state.get(n) {
                Some(1) => return false,
                Some(2) => return true,
                _ => {}
            }
            state.insert(n, 1);
            if let Some(next) = edges.get(n) {
                for m in next {
                    if !visit(m, edges, state) {
                        return false;
                    }
                }
            }
            state.insert(n, 2);
            true
        }
        edges.keys().all(|k| visit(k, &edges, &mut state))
    }
}
