//! Python bindings: parse programs and knowledge bases, verify contracts,
//! query the reasoner and replay proofs.
//!
//! ```python
//! import twotier
//! kb = twotier.KnowledgeBase.from_file("corpus/car_corrected.kb")
//! prog = twotier.Program.from_file("corpus/addwheels.prog")
//! v = twotier.Verifier(prog, kb)
//! tree = v.verify("addWheels")
//! assert tree.closed and tree.spine == ["post-core", "post-inv", "var"]
//! ```

use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use twotier::calculus::{
    auto_verify, check_proof, parse_proofs, validate_judgement_empirically, write_proof, Judgement, ProofNode,
    StrategyConfig, Theory, ValidationConfig,
};
use twotier::dl::{format_set, ReasonerConfig, Verdict};
use twotier::kernel::{alpha_abduce, alpha_deduce, AbductionResult};
use twotier::lang::{parse_domain_set, parse_kb, parse_program, parse_state_formula, pretty_kb, pretty_program, InterpContext};
use twotier::lifting::Lifting;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn read(path: &str) -> PyResult<String> {
    std::fs::read_to_string(path).map_err(|e| value_err(format!("{path}: {e}")))
}

#[pyclass(frozen, skip_from_py_object, module = "twotier")]
#[derive(Clone)]
pub struct KnowledgeBase {
    inner: twotier::dl::KnowledgeBase,
}

#[pymethods]
impl KnowledgeBase {
    #[staticmethod]
    pub fn parse(src: &str) -> PyResult<Self> {
        Ok(KnowledgeBase { inner: parse_kb(src).map_err(value_err)? })
    }

    #[staticmethod]
    pub fn from_file(path: &str) -> PyResult<Self> {
        Self::parse(&read(path)?)
    }

    #[getter]
    pub fn closure(&self) -> bool {
        self.inner.closure
    }

    pub fn with_closure(&self, on: bool) -> Self {
        KnowledgeBase { inner: self.inner.with_closure(on) }
    }

    pub fn __str__(&self) -> String {
        pretty_kb(&self.inner)
    }
}

#[pyclass(frozen, skip_from_py_object, module = "twotier")]
#[derive(Clone)]
pub struct Program {
    inner: twotier::lang::Program,
}

#[pymethods]
impl Program {
    #[staticmethod]
    pub fn parse(src: &str) -> PyResult<Self> {
        Ok(Program { inner: parse_program(src).map_err(value_err)? })
    }

    #[staticmethod]
    pub fn from_file(path: &str) -> PyResult<Self> {
        Self::parse(&read(path)?)
    }

    #[getter]
    pub fn procedures(&self) -> Vec<String> {
        self.inner.procedures.iter().map(|p| p.name.clone()).collect()
    }

    pub fn __str__(&self) -> String {
        pretty_program(&self.inner)
    }
}

/// A proof tree as produced by `Verifier.verify`.
#[pyclass(frozen, module = "twotier")]
pub struct ProofTree {
    procedure: String,
    tree: ProofNode,
}

#[pymethods]
impl ProofTree {
    #[getter]
    pub fn procedure(&self) -> String {
        self.procedure.clone()
    }

    #[getter]
    pub fn closed(&self) -> bool {
        self.tree.is_closed()
    }

    /// Rule names along the first-premise path from the root.
    #[getter]
    pub fn spine(&self) -> Vec<String> {
        self.tree.spine().iter().map(|r| r.name().to_string()).collect()
    }

    #[getter]
    pub fn size(&self) -> usize {
        self.tree.size()
    }

    /// Open subgoals and unproved obligations, one line each.
    #[getter]
    pub fn issues(&self) -> Vec<String> {
        self.tree.failures().iter().map(|i| i.to_string()).collect()
    }

    /// The tree in the line-based proof format that `Verifier.check` reads.
    pub fn to_text(&self) -> String {
        write_proof(&self.procedure, &self.tree)
    }

    pub fn __repr__(&self) -> String {
        let state = if self.closed() { "closed" } else { "open" };
        format!("<ProofTree {} {state}, {} nodes>", self.procedure, self.size())
    }
}

#[pyclass(frozen, module = "twotier")]
pub struct FuzzSummary {
    #[pyo3(get)]
    pub judgements: usize,
    #[pyo3(get)]
    pub runs: usize,
    #[pyo3(get)]
    pub counterexamples: Vec<String>,
}

/// A program and knowledge base bound together, with the reasoner cache
/// shared by every call.
#[pyclass(frozen, module = "twotier")]
pub struct Verifier {
    program: twotier::lang::Program,
    theory: Arc<Theory>,
    strategy: StrategyConfig,
}

impl Verifier {
    fn procedure(&self, name: &str) -> PyResult<&twotier::lang::Procedure> {
        self.program.procedure(name).ok_or_else(|| value_err(format!("no procedure `{name}`")))
    }

    fn domain_set(src: &str) -> PyResult<twotier::dl::DomainSet> {
        parse_domain_set(src).map_err(value_err)
    }
}

#[pymethods]
impl Verifier {
    #[new]
    #[pyo3(signature = (program, kb, unroll = 8))]
    pub fn new(program: &Program, kb: &KnowledgeBase, unroll: usize) -> Self {
        let theory = Theory::new(&kb.inner, &program.inner, ReasonerConfig::default());
        Verifier {
            program: program.inner.clone(),
            theory: Arc::new(theory),
            strategy: StrategyConfig { unroll_depth: unroll, ..StrategyConfig::default() },
        }
    }

    pub fn verify(&self, procedure: &str) -> PyResult<ProofTree> {
        let proc = self.procedure(procedure)?;
        let tree = auto_verify(&self.theory, &self.program, proc, &self.strategy);
        Ok(ProofTree { procedure: procedure.to_string(), tree })
    }

    pub fn verify_all(&self) -> Vec<ProofTree> {
        self.program
            .procedures
            .iter()
            .map(|p| ProofTree { procedure: p.name.clone(), tree: auto_verify(&self.theory, &self.program, p, &self.strategy) })
            .collect()
    }

    /// `"entailed"`, `"not-entailed"` or `"unknown"` for `premises |= goal`,
    /// both given as comma-separated domain formulas (`-` for none).
    pub fn entails(&self, premises: &str, goal: &str) -> PyResult<String> {
        let (p, g) = (Self::domain_set(premises)?, Self::domain_set(goal)?);
        Ok(match self.theory.reasoner.entails(p.iter(), g.iter()).map_err(runtime_err)? {
            Verdict::Entailed { .. } => "entailed",
            Verdict::NotEntailed(_) => "not-entailed",
            Verdict::Unknown(_) => "unknown",
        }
        .to_string())
    }

    /// Kernel atoms deduced from `goal`.
    pub fn deduce(&self, goal: &str) -> PyResult<Vec<String>> {
        let r = alpha_deduce(&Self::domain_set(goal)?, &self.theory.reasoner, &self.theory.pool).map_err(runtime_err)?;
        Ok(r.atoms.iter().map(|f| f.to_string()).collect())
    }

    /// Minimal kernel explanations of `goal`, smallest first.
    #[pyo3(signature = (goal, max_size = 2))]
    pub fn abduce(&self, goal: &str, max_size: usize) -> PyResult<Vec<String>> {
        let delta = Self::domain_set(goal)?;
        Ok(match alpha_abduce(&delta, &self.theory.reasoner, &self.theory.pool, max_size).map_err(runtime_err)? {
            AbductionResult::Explanations(found) => found.iter().map(format_set).collect(),
            AbductionResult::NoExplanation => vec![],
        })
    }

    /// Domain formulas for the liftable conjuncts of a state formula.
    pub fn lift(&self, formula: &str) -> PyResult<Vec<String>> {
        let phi = parse_state_formula(formula).map_err(value_err)?;
        Ok(self.theory.lifting.lift_liftable(&phi).iter().map(|f| f.to_string()).collect())
    }

    /// State formula recovered from kernel formulas.
    pub fn delift(&self, formulas: &str) -> PyResult<String> {
        Ok(self.theory.lifting.delift(&Self::domain_set(formulas)?).map_err(value_err)?.to_string())
    }

    /// Replays every proof in `text`; returns the issues found, empty when
    /// all proofs check.
    pub fn check(&self, text: &str) -> PyResult<Vec<String>> {
        let mut issues = Vec::new();
        for (name, tree) in parse_proofs(text).map_err(value_err)? {
            let proc = self.procedure(&name)?;
            let report = check_proof(&self.theory, &self.program, proc, &tree);
            issues.extend(report.issues().iter().map(|i| format!("{name}: {i}")));
        }
        Ok(issues)
    }

    /// Verifies `procedure` and runs every closed judgement of the proof on
    /// all states over `domain`.
    #[pyo3(signature = (procedure, domain = vec![0, 2, 4], samples = 100_000, seed = 0))]
    pub fn fuzz(&self, procedure: &str, domain: Vec<i64>, samples: usize, seed: u64) -> PyResult<FuzzSummary> {
        let proc = self.procedure(procedure)?;
        let tree = auto_verify(&self.theory, &self.program, proc, &self.strategy);
        let vars = self.program.state_vars(proc);
        let ctx = InterpContext::new(&self.program, &self.theory, vars.clone(), domain.clone());
        let config = ValidationConfig { vars, domain, samples, seed };
        let mut closed: Vec<&Judgement> = Vec::new();
        tree.walk(&mut |n| {
            if n.is_closed() && !closed.contains(&&n.judgement) {
                closed.push(&n.judgement);
            }
        });
        let mut summary = FuzzSummary { judgements: closed.len(), runs: 0, counterexamples: vec![] };
        for j in closed {
            let r = validate_judgement_empirically(&self.theory, &ctx, j, &config).map_err(runtime_err)?;
            summary.runs += r.runs;
            summary.counterexamples.extend(r.counterexamples.iter().map(|c| format!("{j}: {c}")));
        }
        Ok(summary)
    }
}

#[pymodule]
#[pyo3(name = "twotier")]
fn twotier_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<KnowledgeBase>()?;
    m.add_class::<Program>()?;
    m.add_class::<Verifier>()?;
    m.add_class::<ProofTree>()?;
    m.add_class::<FuzzSummary>()?;
    Ok(())
}
