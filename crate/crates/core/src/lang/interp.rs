//! Relational semantics: a statement maps a state to the set of states it
//! may end in. Calls are replaced by their contracts, so a call relates a
//! state meeting the precondition to every state of the bounded domain that
//! meets the postcondition.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use super::{Expr, Program, Statement};
use crate::calculus::{CalcError, Theory};
use crate::lifting::enumerate_states;
use crate::state::ProgramState;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InterpError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("call to undefined procedure `{0}`")]
    UnknownProcedure(String),
    #[error("loop did not reach a fixpoint within {0} iterations")]
    FuelExhausted(usize),
    #[error(transparent)]
    Calc(#[from] CalcError),
}

/// Post-state sets of calls, keyed by procedure and argument expression.
#[derive(Debug, Default)]
pub struct CallTable {
    posts: Mutex<HashMap<(String, Expr), Arc<Vec<ProgramState>>>>,
}

impl CallTable {
    pub fn len(&self) -> usize {
        self.posts.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub struct InterpContext<'a> {
    pub program: &'a Program,
    pub theory: &'a Theory,
    /// Variables and values spanning the havoc set of calls.
    pub vars: Vec<String>,
    pub domain: Vec<i64>,
    /// Iteration bound for loops.
    pub fuel: usize,
    pub calls: CallTable,
}

impl<'a> InterpContext<'a> {
    pub fn new(program: &'a Program, theory: &'a Theory, vars: Vec<String>, domain: Vec<i64>) -> Self {
        InterpContext { program, theory, vars, domain, fuel: 1000, calls: CallTable::default() }
    }

    /// States satisfying the post of `p(arg)`, restricted to states whose
    /// lifting is consistent with the knowledge base.
    fn call_posts(&self, p: &str, arg: &Expr) -> Result<Arc<Vec<ProgramState>>, InterpError> {
        let key = (p.to_string(), arg.clone());
        if let Some(hit) = self.calls.posts.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let proc = self.program.procedure(p).ok_or_else(|| InterpError::UnknownProcedure(p.into()))?;
        let post = proc.post_for(arg);
        let mut out = Vec::new();
        for s in enumerate_states(&self.vars, &self.domain) {
            if self.theory.is_liftable_state(&s)? && self.theory.assertion_holds(&s, &post)? {
                out.push(s);
            }
        }
        let out = Arc::new(out);
        self.calls.posts.lock().unwrap().insert(key, out.clone());
        Ok(out)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Outcome {
    pub states: BTreeSet<ProgramState>,
    /// Some call was reached in a state violating its precondition.
    pub pre_violated: bool,
    /// Some loop run revisits a state, so it has no final state.
    pub nonterminating: bool,
}

impl Outcome {
    fn single(s: ProgramState) -> Self {
        Outcome { states: [s].into(), ..Default::default() }
    }

    fn absorb_flags(&mut self, other: &Outcome) {
        self.pre_violated |= other.pre_violated;
        self.nonterminating |= other.nonterminating;
    }
}

pub fn eval_expr(e: &Expr, sigma: &ProgramState) -> Result<i64, InterpError> {
    match e {
        Expr::Int(n) => Ok(*n),
        Expr::Var(v) => sigma.get(v).ok_or_else(|| InterpError::UnboundVariable(v.clone())),
    }
}

pub fn truthy(n: i64) -> bool {
    n != 0
}

pub fn interpret(ctx: &InterpContext<'_>, s: &Statement, sigma: &ProgramState) -> Result<Outcome, InterpError> {
    match s {
        Statement::Skip => Ok(Outcome::single(sigma.clone())),
        Statement::Assign(v, e) => {
            let n = eval_expr(e, sigma)?;
            Ok(Outcome::single(sigma.clone().with(v.clone(), n)))
        }
        Statement::Seq(a, b) => {
            let first = interpret(ctx, a, sigma)?;
            let mut out = Outcome::default();
            out.absorb_flags(&first);
            for mid in &first.states {
                let r = interpret(ctx, b, mid)?;
                out.absorb_flags(&r);
                out.states.extend(r.states);
            }
            Ok(out)
        }
        Statement::If(e, a, b) => {
            if truthy(eval_expr(e, sigma)?) {
                interpret(ctx, a, sigma)
            } else {
                interpret(ctx, b, sigma)
            }
        }
        Statement::While(e, body) => {
            let mut out = Outcome::default();
            let mut seen: BTreeSet<ProgramState> = BTreeSet::new();
            let mut frontier: BTreeSet<ProgramState> = [sigma.clone()].into();
            let mut rounds = 0;
            while !frontier.is_empty() {
                if rounds == ctx.fuel {
                    return Err(InterpError::FuelExhausted(ctx.fuel));
                }
                rounds += 1;
                let mut next = BTreeSet::new();
                for s in frontier {
                    if !seen.insert(s.clone()) {
                        out.nonterminating = true;
                        continue;
                    }
                    if !truthy(eval_expr(e, &s)?) {
                        out.states.insert(s);
                        continue;
                    }
                    let r = interpret(ctx, body, &s)?;
                    out.absorb_flags(&r);
                    next.extend(r.states);
                }
                frontier = next;
            }
            Ok(out)
        }
        Statement::Call(p, arg) => {
            let proc = ctx.program.procedure(p).ok_or_else(|| InterpError::UnknownProcedure(p.clone()))?;
            let value = eval_expr(arg, sigma)?;
            let pre = proc.pre_for(&Expr::Int(value));
            if !ctx.theory.assertion_holds(sigma, &pre)? {
                return Ok(Outcome { pre_violated: true, ..Default::default() });
            }
            let posts = ctx.call_posts(p, arg)?;
            Ok(Outcome { states: posts.iter().cloned().collect(), ..Default::default() })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{setup, ADDWHEELS, CAR_KB};
    use crate::lang::parse_statements;

    fn state(pairs: &[(&str, i64)]) -> ProgramState {
        pairs.iter().fold(ProgramState::new(), |s, (v, n)| s.with(*v, *n))
    }

    fn run(src: &str, sigma: ProgramState) -> Outcome {
        let (p, t) = setup(ADDWHEELS, CAR_KB);
        let vars: Vec<String> = sigma.vars().cloned().collect();
        let ctx = InterpContext::new(&p, &t, vars, vec![0, 2, 4]);
        interpret(&ctx, &parse_statements(src).unwrap(), &sigma).unwrap()
    }

    #[test]
    fn expressions() {
        let s = state(&[("nrWheels", 4)]);
        assert_eq!(eval_expr(&Expr::Int(4), &s).unwrap(), 4);
        assert_eq!(eval_expr(&Expr::Var("nrWheels".into()), &s).unwrap(), 4);
        assert!(matches!(eval_expr(&Expr::Var("x".into()), &s), Err(InterpError::UnboundVariable(_))));
        assert!(!truthy(0));
        assert!(truthy(2));
    }

    #[test]
    fn assignment_and_skip() {
        let s = state(&[("nrWheels", 4), ("wheels", 0)]);
        let out = run("wheels := nrWheels;", s.clone());
        assert_eq!(out.states, [state(&[("nrWheels", 4), ("wheels", 4)])].into());
        assert_eq!(run("skip;", s.clone()).states, [s].into());
    }

    #[test]
    fn loop_runs_to_exit() {
        let out = run("while (x) do x := 0; od", state(&[("x", 2)]));
        assert_eq!(out.states, [state(&[("x", 0)])].into());
        assert!(!out.nonterminating);
        let out = run("while (x) do x := x; od", state(&[("x", 2)]));
        assert!(out.states.is_empty());
        assert!(out.nonterminating);
    }

    #[test]
    fn loop_unrolling_law() {
        let sigma = state(&[("x", 4), ("y", 0)]);
        let a = run("while (x) do y := x; x := 0; od", sigma.clone());
        let b = run("if (x) then y := x; x := 0; while (x) do y := x; x := 0; od else skip; fi", sigma);
        assert_eq!(a, b);
    }

    #[test]
    fn call_outside_precondition_is_empty() {
        let sigma = state(&[("bodyId", 2), ("doors", 0), ("nrWheels", 0), ("wheels", 0)]);
        let out = run("addWheels(2);", sigma.clone());
        assert!(out.states.is_empty());
        assert!(out.pre_violated);
        let out = run("addWheels(4);", sigma);
        assert!(!out.pre_violated);
        assert!(!out.states.is_empty());
        assert!(out.states.iter().all(|s| s.get("wheels") == Some(4)));
    }

    #[test]
    fn fuel_bounds_loops() {
        let (p, t) = setup(ADDWHEELS, CAR_KB);
        let mut ctx = InterpContext::new(&p, &t, vec!["x".into()], vec![0, 2]);
        ctx.fuel = 1;
        let s = parse_statements("while (x) do x := 0; od").unwrap();
        assert!(matches!(interpret(&ctx, &s, &state(&[("x", 2)])), Err(InterpError::FuelExhausted(1))));
    }
}
