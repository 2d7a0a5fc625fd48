//! Entailment by refutation: ground `K ∪ premises ∪ {¬goal}` over a finite
//! universe (one element per named individual, unique names, plus a few
//! anonymous elements) and a finite pool of data values, then ask the SAT
//! solver for a model.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use super::sat::{Lit, SolveResult, Solver};
use super::{set_signature, Concept, DlError, DomainFormula, DomainInterpretation, KnowledgeBase, HAS_VALUE};

#[derive(Debug, Clone)]
pub struct ReasonerConfig {
    /// Anonymous elements added to the named individuals.
    pub anonymous: usize,
    /// Conflict budget per SAT call; zero means unlimited.
    pub max_conflicts: u64,
}

impl Default for ReasonerConfig {
    fn default() -> Self {
        ReasonerConfig { anonymous: 2, max_conflicts: 200_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Countermodel {
    pub model: Arc<DomainInterpretation>,
    /// Conclusion formula the model falsifies.
    pub violated: DomainFormula,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// No countermodel exists within the bound; `universe` is its size.
    Entailed { universe: usize },
    NotEntailed(Countermodel),
    /// No countermodel within the bound, but the bound is not known to be
    /// sufficient (cyclic TBox).
    Unknown(String),
}

impl Verdict {
    pub fn is_entailed(&self) -> bool {
        matches!(self, Verdict::Entailed { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Satisfiability {
    Model(Arc<DomainInterpretation>),
    NoModel,
    Unknown(String),
}

type CacheKey = (Vec<DomainFormula>, Option<DomainFormula>);

/// Model finder bound to one knowledge base, with a result cache.
pub struct Reasoner {
    kb: KnowledgeBase,
    config: ReasonerConfig,
    axioms: Vec<DomainFormula>,
    acyclic: bool,
    cache: Mutex<HashMap<CacheKey, (Option<Arc<DomainInterpretation>>, usize)>>,
}

impl std::fmt::Debug for Reasoner {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Reasoner").field("config", &self.config).field("acyclic", &self.acyclic).finish()
    }
}

impl Reasoner {
    pub fn new(kb: KnowledgeBase, config: ReasonerConfig) -> Self {
        let axioms = kb.effective_axioms();
        let acyclic = kb.tbox_is_acyclic();
        Reasoner { kb, config, axioms, acyclic, cache: Mutex::new(HashMap::new()) }
    }

    pub fn kb(&self) -> &KnowledgeBase {
        &self.kb
    }

    pub fn config(&self) -> &ReasonerConfig {
        &self.config
    }

    pub fn is_acyclic(&self) -> bool {
        self.acyclic
    }

    pub fn cache_len(&self) -> usize {
        self.cache.lock().unwrap().len()
    }

    pub fn entails<'a>(
        &self,
        premises: impl IntoIterator<Item = &'a DomainFormula>,
        conclusion: impl IntoIterator<Item = &'a DomainFormula>,
    ) -> Result<Verdict, DlError> {
        let premises = canonical(premises);
        let mut universe = 0;
        let mut searched = false;
        for goal in conclusion {
            if premises.binary_search(goal).is_ok() {
                continue;
            }
            searched = true;
            let (model, size) = self.search(&premises, Some(goal))?;
            universe = universe.max(size);
            if let Some(model) = model {
                return Ok(Verdict::NotEntailed(Countermodel { model, violated: goal.clone() }));
            }
        }
        if self.acyclic || !searched {
            Ok(Verdict::Entailed { universe })
        } else {
            Ok(Verdict::Unknown(format!(
                "cyclic TBox: no countermodel with {universe} elements, bound not known to be complete"
            )))
        }
    }

    pub fn entails_one(&self, premises: &[DomainFormula], goal: &DomainFormula) -> Result<Verdict, DlError> {
        self.entails(premises.iter(), std::iter::once(goal))
    }

    pub fn consistent<'a>(&self, formulas: impl IntoIterator<Item = &'a DomainFormula>) -> Result<Satisfiability, DlError> {
        let formulas = canonical(formulas);
        match self.search(&formulas, None)? {
            (Some(m), _) => Ok(Satisfiability::Model(m)),
            (None, _) if self.acyclic => Ok(Satisfiability::NoModel),
            (None, size) => Ok(Satisfiability::Unknown(format!("cyclic TBox: no model with {size} elements"))),
        }
    }

    fn search(
        &self,
        premises: &[DomainFormula],
        goal: Option<&DomainFormula>,
    ) -> Result<(Option<Arc<DomainInterpretation>>, usize), DlError> {
        let key = (premises.to_vec(), goal.cloned());
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let result = self.ground_and_solve(premises, goal)?;
        self.cache.lock().unwrap().insert(key, result.clone());
        Ok(result)
    }

    fn ground_and_solve(
        &self,
        premises: &[DomainFormula],
        goal: Option<&DomainFormula>,
    ) -> Result<(Option<Arc<DomainInterpretation>>, usize), DlError> {
        let mut all: Vec<&DomainFormula> = self.axioms.iter().chain(premises.iter()).collect();
        if let Some(g) = goal {
            all.push(g);
        }
        let sig = set_signature(all.iter().copied());
        let mut consts = BTreeSet::new();
        for f in &all {
            f.constants(&mut consts);
        }
        consts.insert(0);
        let fresh = (consts.iter().map(|c| c.abs()).max().unwrap_or(0) + 1..).find(|v| !consts.contains(v)).unwrap();
        consts.insert(fresh);

        let mut elems: Vec<String> = sig.nominals.iter().cloned().collect();
        for i in 1..=self.config.anonymous {
            elems.push(format!("_a{i}"));
        }
        let mut g = Grounder::new(elems, consts.into_iter().collect());

        for f in premises.iter().chain(self.axioms.iter()) {
            g.assert_formula(f);
        }
        if self.kb.closure {
            let holders: Vec<usize> =
                self.kb.value_holders.iter().filter_map(|h| g.index.get(h).copied()).collect();
            for x in holders {
                g.functional(HAS_VALUE, x);
            }
        }
        if let Some(goal) = goal {
            g.assert_negation(goal);
        }

        let size = g.elems.len();
        match g.solver.solve(self.config.max_conflicts) {
            SolveResult::Unsat => Ok((None, size)),
            SolveResult::Unknown => Err(DlError::BudgetExceeded(self.config.max_conflicts)),
            SolveResult::Sat(model) => {
                let mut concepts = self.kb.full_signature().concepts;
                concepts.extend(sig.concepts.iter().cloned());
                let mut roles = self.kb.full_signature().roles;
                roles.extend(sig.roles.iter().cloned());
                Ok((Some(Arc::new(g.extract(&model, &concepts, &roles))), size))
            }
        }
    }
}

fn canonical<'a>(fs: impl IntoIterator<Item = &'a DomainFormula>) -> Vec<DomainFormula> {
    let set: BTreeSet<DomainFormula> = fs.into_iter().cloned().collect();
    set.into_iter().collect()
}

/// One-shot entailment check without caching.
pub fn entails(premises: &[DomainFormula], conclusion: &[DomainFormula], kb: &KnowledgeBase) -> Result<Verdict, DlError> {
    Reasoner::new(kb.clone(), ReasonerConfig::default()).entails(premises.iter(), conclusion.iter())
}

pub fn consistent(formulas: &[DomainFormula], kb: &KnowledgeBase) -> Result<Satisfiability, DlError> {
    Reasoner::new(kb.clone(), ReasonerConfig::default()).consistent(formulas.iter())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum G {
    True,
    False,
    Lit(Lit),
}

impl G {
    fn neg(self) -> G {
        match self {
            G::True => G::False,
            G::False => G::True,
            G::Lit(l) => G::Lit(!l),
        }
    }
}

struct Grounder {
    solver: Solver,
    elems: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<i64>,
    concept_vars: HashMap<(String, usize), Lit>,
    role_vars: HashMap<(String, usize, usize), Lit>,
    data_vars: HashMap<(String, usize, i64), Lit>,
    memo: HashMap<(Concept, usize), G>,
}

impl Grounder {
    fn new(elems: Vec<String>, data: Vec<i64>) -> Self {
        let index = elems.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        Grounder {
            solver: Solver::new(),
            elems,
            index,
            data,
            concept_vars: HashMap::new(),
            role_vars: HashMap::new(),
            data_vars: HashMap::new(),
            memo: HashMap::new(),
        }
    }

    fn fresh(&mut self) -> Lit {
        Lit::new(self.solver.new_var(), true)
    }

    fn concept_var(&mut self, a: &str, x: usize) -> Lit {
        if let Some(l) = self.concept_vars.get(&(a.to_string(), x)) {
            return *l;
        }
        let l = self.fresh();
        self.concept_vars.insert((a.to_string(), x), l);
        l
    }

    fn role_var(&mut self, r: &str, x: usize, y: usize) -> Lit {
        if let Some(l) = self.role_vars.get(&(r.to_string(), x, y)) {
            return *l;
        }
        let l = self.fresh();
        self.role_vars.insert((r.to_string(), x, y), l);
        l
    }

    fn data_var(&mut self, t: &str, x: usize, n: i64) -> G {
        if !self.data.contains(&n) {
            return G::False;
        }
        if let Some(l) = self.data_vars.get(&(t.to_string(), x, n)) {
            return G::Lit(*l);
        }
        let l = self.fresh();
        self.data_vars.insert((t.to_string(), x, n), l);
        G::Lit(l)
    }

    fn clause(&mut self, gs: &[G]) {
        if gs.contains(&G::True) {
            return;
        }
        let lits: Vec<Lit> = gs.iter().filter_map(|g| if let G::Lit(l) = g { Some(*l) } else { None }).collect();
        self.solver.add_clause(&lits);
    }

    fn and_n(&mut self, gs: Vec<G>) -> G {
        if gs.contains(&G::False) {
            return G::False;
        }
        let lits: Vec<Lit> = gs.into_iter().filter_map(|g| if let G::Lit(l) = g { Some(l) } else { None }).collect();
        match lits.len() {
            0 => G::True,
            1 => G::Lit(lits[0]),
            _ => {
                let v = self.fresh();
                for &l in &lits {
                    self.solver.add_clause(&[!v, l]);
                }
                let mut big: Vec<Lit> = lits.iter().map(|&l| !l).collect();
                big.push(v);
                self.solver.add_clause(&big);
                G::Lit(v)
            }
        }
    }

    fn or_n(&mut self, gs: Vec<G>) -> G {
        let negated: Vec<G> = gs.into_iter().map(G::neg).collect();
        self.and_n(negated).neg()
    }

    fn lit(&mut self, c: &Concept, x: usize) -> G {
        if let Some(g) = self.memo.get(&(c.clone(), x)) {
            return *g;
        }
        let n = self.elems.len();
        let g = match c {
            Concept::Top => G::True,
            Concept::Bottom => G::False,
            Concept::Atomic(a) => G::Lit(self.concept_var(a, x)),
            Concept::Nominal(o) => {
                if self.index.get(o) == Some(&x) {
                    G::True
                } else {
                    G::False
                }
            }
            Concept::Not(inner) => self.lit(inner, x).neg(),
            Concept::And(a, b) => {
                let ga = self.lit(a, x);
                let gb = self.lit(b, x);
                self.and_n(vec![ga, gb])
            }
            Concept::Or(a, b) => {
                let ga = self.lit(a, x);
                let gb = self.lit(b, x);
                self.or_n(vec![ga, gb])
            }
            Concept::ExistsRole(r, inner) => {
                let mut terms = Vec::with_capacity(n);
                for y in 0..n {
                    let edge = G::Lit(self.role_var(r, x, y));
                    let target = self.lit(inner, y);
                    terms.push(self.and_n(vec![edge, target]));
                }
                self.or_n(terms)
            }
            Concept::ForallRole(r, inner) => {
                let mut terms = Vec::with_capacity(n);
                for y in 0..n {
                    let edge = G::Lit(self.role_var(r, x, y));
                    let target = self.lit(inner, y);
                    terms.push(self.or_n(vec![edge.neg(), target]));
                }
                self.and_n(terms)
            }
            Concept::ExistsData(t, v) => self.data_var(t, x, *v),
            Concept::ForallData(t, v) => {
                let others: Vec<i64> = self.data.iter().copied().filter(|d| d != v).collect();
                let mut terms = Vec::with_capacity(others.len());
                for d in others {
                    terms.push(self.data_var(t, x, d).neg());
                }
                self.and_n(terms)
            }
        };
        self.memo.insert((c.clone(), x), g);
        g
    }

    fn elem(&self, o: &str) -> usize {
        self.index[o]
    }

    fn assert_formula(&mut self, f: &DomainFormula) {
        match f {
            DomainFormula::Subsumption(c, d) => {
                for x in 0..self.elems.len() {
                    let gc = self.lit(c, x);
                    let gd = self.lit(d, x);
                    self.clause(&[gc.neg(), gd]);
                }
            }
            DomainFormula::ConceptAssertion(c, o) => {
                let g = self.lit(c, self.elem(o));
                self.clause(&[g]);
            }
            DomainFormula::RoleAssertion(r, a, b) => {
                let l = self.role_var(r, self.elem(a), self.elem(b));
                self.solver.add_clause(&[l]);
            }
            DomainFormula::DataAssertion(t, o, n) => {
                let g = self.data_var(t, self.elem(o), *n);
                self.clause(&[g]);
            }
        }
    }

    /// `¬C(o)` as `(¬C)(o)`, `¬r(a, b)` as `(all r . ¬{b})(a)`, `¬t(o, n)` as
    /// `(¬some t . n)(o)`, and `¬(C <= D)` as a witness of `C & ¬D`.
    fn assert_negation(&mut self, f: &DomainFormula) {
        match f {
            DomainFormula::Subsumption(c, d) => {
                let witness = Concept::and(c.clone(), Concept::not(d.clone()));
                let gs: Vec<G> = (0..self.elems.len()).map(|x| self.lit(&witness, x)).collect();
                self.clause(&gs);
            }
            DomainFormula::ConceptAssertion(c, o) => {
                self.assert_formula(&DomainFormula::ConceptAssertion(Concept::not(c.clone()), o.clone()))
            }
            DomainFormula::RoleAssertion(r, a, b) => self.assert_formula(&DomainFormula::ConceptAssertion(
                Concept::all(r.clone(), Concept::not(Concept::nominal(b.clone()))),
                a.clone(),
            )),
            DomainFormula::DataAssertion(t, o, n) => self.assert_formula(&DomainFormula::ConceptAssertion(
                Concept::not(Concept::some_value(t.clone(), *n)),
                o.clone(),
            )),
        }
    }

    fn functional(&mut self, t: &str, x: usize) {
        let data = self.data.clone();
        for (i, &a) in data.iter().enumerate() {
            for &b in &data[i + 1..] {
                let ga = self.data_var(t, x, a);
                let gb = self.data_var(t, x, b);
                self.clause(&[ga.neg(), gb.neg()]);
            }
        }
    }

    fn extract(&self, model: &[bool], concepts: &BTreeSet<String>, roles: &BTreeSet<String>) -> DomainInterpretation {
        let on = |l: &Lit| model[l.var() as usize] == l.is_positive();
        let mut interp = DomainInterpretation { universe: self.elems.clone(), ..Default::default() };
        // Identifiers start with a letter, so `_aN` never names an individual.
        for (name, &i) in &self.index {
            if !is_anonymous(name) {
                interp.nominals.insert(name.clone(), i);
            }
        }
        for c in concepts {
            interp.concepts.insert(c.clone(), BTreeSet::new());
        }
        for r in roles {
            interp.roles.insert(r.clone(), BTreeSet::new());
        }
        for ((a, x), l) in &self.concept_vars {
            if on(l) {
                interp.concepts.entry(a.clone()).or_default().insert(*x);
            }
        }
        for ((r, x, y), l) in &self.role_vars {
            if on(l) {
                interp.roles.entry(r.clone()).or_default().insert((*x, *y));
            }
        }
        for ((t, x, n), l) in &self.data_vars {
            if on(l) {
                interp.data_roles.entry(t.clone()).or_default().insert((*x, *n));
            }
        }
        interp
    }
}

fn is_anonymous(name: &str) -> bool {
    name.strip_prefix("_a").is_some_and(|rest| !rest.is_empty() && rest.chars().all(|c| c.is_ascii_digit()))
}
