//! Automatic proof search.
//!
//! Backward reasoning from the postcondition: a statement list is split at
//! its last call, which is handled by its contract; assignments pull kernel
//! atoms out of the domain postcondition (post-core, post-inv) before var
//! erases the domain tier; conditionals and loops use their rules, loops up
//! to a fixed unrolling depth. The computed precondition is connected to the
//! declared one with pre-core, pre-inv and cons.
//!
//! When this fails on straight-line code a forward pass is tried, carrying
//! the precondition through the assignments. It closes a few more goals and
//! produces a more telling failure (the entailment that breaks, rather than
//! an implication between two derived preconditions).

use super::assertion::{conjoin, Theory, TwoTierAssertion};
use super::proof::ProofNode;
use super::rules::{truth_of, Judgement, Rule, RuleArgs};
use crate::dl::DomainSet;
use crate::kernel::{alpha_abduce, alpha_deduce, AbductionResult};
use crate::lang::{Expr, Procedure, Program, Statement};
use crate::state::{StateFormula, Term};

#[derive(Debug, Clone)]
pub struct StrategyConfig {
    pub unroll_depth: usize,
    /// Largest explanation tried by abduction.
    pub abduce_max: usize,
    /// Whether the forward pass is tried after a failed backward pass.
    pub forward: bool,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        StrategyConfig { unroll_depth: 8, abduce_max: 2, forward: true }
    }
}

/// A proof attempt for the contract of `proc`; open where the search got stuck.
pub fn auto_verify(theory: &Theory, program: &Program, proc: &Procedure, config: &StrategyConfig) -> ProofNode {
    let p = Prover { theory, program, config };
    p.prove(&proc.contract.pre, &proc.body, &proc.contract.post, 0)
}

struct Prover<'a> {
    theory: &'a Theory,
    program: &'a Program,
    config: &'a StrategyConfig,
}

impl Prover<'_> {
    fn node(&self, rule: Rule, j: Judgement, args: RuleArgs, premises: Vec<ProofNode>) -> ProofNode {
        ProofNode::build(self.theory, self.program, rule, j, args, premises)
    }

    /// Proof of `pre s post`.
    fn prove(&self, pre: &TwoTierAssertion, s: &Statement, post: &TwoTierAssertion, depth: usize) -> ProofNode {
        let stmts: Vec<Statement> = s.flatten().into_iter().cloned().collect();
        let Some(i) = stmts.iter().rposition(|x| matches!(x, Statement::Call(..))) else {
            let backward = self.connect(pre, self.backward_list(&stmts, post, depth));
            if backward.is_closed() || !self.config.forward || !s.is_straight_line() {
                return backward;
            }
            return self.forward(pre, &stmts, post);
        };
        let Statement::Call(p, e) = &stmts[i] else { unreachable!() };
        let Some(proc) = self.program.procedure(p) else {
            return ProofNode::open(Judgement::new(pre.clone(), s.clone(), post.clone()), format!("no contract for `{p}`"));
        };
        let (cpre, cpost) = (proc.pre_for(e), proc.post_for(e));
        let call = stmts[i].clone();
        let left = &stmts[..i];
        let right = &stmts[i + 1..];

        let contract = self.node(Rule::Contract, Judgement::new(cpre.clone(), call.clone(), cpost.clone()), RuleArgs::default(), vec![]);
        // call and the statements after it, from the contract precondition
        let tail = if right.is_empty() {
            self.adapt(contract, &cpre, post)
        } else {
            let rest = self.prove(&cpost, &Statement::from_list(right.to_vec()).unwrap(), post, depth);
            let stmt = Statement::from_list(stmts[i..].to_vec()).unwrap();
            self.node(Rule::Seq, Judgement::new(cpre.clone(), stmt, post.clone()), RuleArgs::seq(cpost.clone(), 1), vec![contract, rest])
        };
        if left.is_empty() {
            return self.adapt(tail, pre, post);
        }
        let head = self.prove(pre, &Statement::from_list(left.to_vec()).unwrap(), &cpre, depth);
        self.node(Rule::Seq, Judgement::new(pre.clone(), s.clone(), post.clone()), RuleArgs::seq(cpre, left.len()), vec![head, tail])
    }

    /// Wraps `node` in cons so that it concludes `pre s post`.
    fn adapt(&self, node: ProofNode, pre: &TwoTierAssertion, post: &TwoTierAssertion) -> ProofNode {
        if node.pre().aci_eq(pre) && node.post().aci_eq(post) {
            return node;
        }
        let j = Judgement::new(pre.clone(), node.judgement.stmt.clone(), post.clone());
        let args = RuleArgs::cons(node.pre().clone(), node.post().clone());
        self.node(Rule::Cons, j, args, vec![node])
    }

    /// Derives `pre s post` from a proof of `W s post`: relabels when `pre`
    /// and `W` agree, otherwise recovers state information from the domain
    /// tier of `pre` (pre-core, pre-inv) and finishes with cons.
    fn connect(&self, pre: &TwoTierAssertion, mut node: ProofNode) -> ProofNode {
        if node.pre().aci_eq(pre) {
            node.judgement.pre = pre.clone();
            return node;
        }
        let post = node.post().clone();
        let stmt = node.judgement.stmt.clone();
        let alpha = if pre.domain.is_empty() { DomainSet::new() } else { self.deduce(&pre.domain) };
        if alpha.is_empty() {
            return self.adapt(node, pre, &post);
        }
        let cored = pre.with_domain(&alpha);
        let recovered = match self.theory.lifting.delift(&alpha) {
            Ok(phi) => cored.with_state(phi),
            Err(_) => return self.adapt(node, pre, &post),
        };
        let cons = self.adapt(node, &recovered, &post);
        let inv = self.node(Rule::PreInv, Judgement::new(cored, stmt.clone(), post.clone()), RuleArgs::kernel(alpha.clone()), vec![cons]);
        self.node(Rule::PreCore, Judgement::new(pre.clone(), stmt, post), RuleArgs::kernel(alpha), vec![inv])
    }

    fn deduce(&self, delta: &DomainSet) -> DomainSet {
        alpha_deduce(delta, &self.theory.reasoner, &self.theory.pool).map(|k| k.atoms).unwrap_or_default()
    }

    /// Proof of `W s post` for a computed `W`, statement by statement from
    /// the back.
    fn backward_list(&self, stmts: &[Statement], post: &TwoTierAssertion, depth: usize) -> ProofNode {
        match stmts {
            [] => self.node(Rule::Skip, Judgement::new(post.clone(), Statement::Skip, post.clone()), RuleArgs::default(), vec![]),
            [s] => self.backward(s, post, depth),
            _ => {
                let n = stmts.len();
                let last = self.backward(&stmts[n - 1], post, depth);
                let mid = last.pre().clone();
                let first = self.backward_list(&stmts[..n - 1], &mid, depth);
                let stmt = Statement::from_list(stmts.to_vec()).unwrap();
                self.node(Rule::Seq, Judgement::new(first.pre().clone(), stmt, post.clone()), RuleArgs::seq(mid, n - 1), vec![first, last])
            }
        }
    }

    fn backward(&self, s: &Statement, post: &TwoTierAssertion, depth: usize) -> ProofNode {
        match s {
            Statement::Skip => self.node(Rule::Skip, Judgement::new(post.clone(), Statement::Skip, post.clone()), RuleArgs::default(), vec![]),
            Statement::Assign(v, e) => self.assign(v, e, post),
            Statement::If(e, s1, s2) => {
                let phi = &post.state;
                let (yes, no) = truth_of(e);
                let then = self.prove(&TwoTierAssertion::state_only(conjoin(phi, &yes)), s1, post, depth);
                let other = self.prove(&TwoTierAssertion::state_only(conjoin(phi, &no)), s2, post, depth);
                let j = Judgement::new(TwoTierAssertion::state_only(phi.clone()), s.clone(), post.clone());
                self.node(Rule::Branch, j, RuleArgs::default(), vec![then, other])
            }
            Statement::While(e, body) => {
                if depth >= self.config.unroll_depth {
                    let j = Judgement::new(post.clone(), s.clone(), post.clone());
                    return ProofNode::open(j, format!("loop not closed after unrolling {depth} times"));
                }
                let unrolled = Statement::If(e.clone(), Box::new(Statement::seq((**body).clone(), s.clone())), Box::new(Statement::Skip));
                let inner = self.backward(&unrolled, post, depth + 1);
                let j = Judgement::new(inner.pre().clone(), s.clone(), post.clone());
                self.node(Rule::Loop, j, RuleArgs::default(), vec![inner])
            }
            Statement::Call(..) | Statement::Seq(..) => {
                let stmts: Vec<Statement> = s.flatten().into_iter().cloned().collect();
                if stmts.len() > 1 {
                    return self.backward_list(&stmts, post, depth);
                }
                let Statement::Call(p, e) = s else { unreachable!() };
                match self.program.procedure(p) {
                    Some(proc) => {
                        let (cpre, cpost) = (proc.pre_for(e), proc.post_for(e));
                        let c = self.node(Rule::Contract, Judgement::new(cpre.clone(), s.clone(), cpost), RuleArgs::default(), vec![]);
                        self.adapt(c, &cpre, post)
                    }
                    None => ProofNode::open(Judgement::new(post.clone(), s.clone(), post.clone()), format!("no contract for `{p}`")),
                }
            }
        }
    }

    /// `v := e` towards `post`. A domain postcondition the state tier does
    /// not already justify is reduced to kernel atoms first, by deduction,
    /// falling back to abduction when the deduced kernel does not justify it.
    fn assign(&self, v: &str, e: &Expr, post: &TwoTierAssertion) -> ProofNode {
        let stmt = Statement::Assign(v.to_string(), e.clone());
        let var = |q: &TwoTierAssertion| {
            let pre = TwoTierAssertion::state_only(q.state.substitute(v, &e.to_term()));
            self.node(Rule::Var, Judgement::new(pre, stmt.clone(), q.clone()), RuleArgs::default(), vec![])
        };
        let direct = var(post);
        if post.domain.is_empty() || direct.is_closed() {
            return direct;
        }
        let through = |alpha: DomainSet| -> Option<ProofNode> {
            let widened = post.with_domain(&alpha);
            let recovered = widened.with_state(self.theory.lifting.delift(&alpha).ok()?);
            let leaf = var(&recovered);
            let pre = leaf.pre().clone();
            let inv = self.node(Rule::PostInv, Judgement::new(pre.clone(), stmt.clone(), widened), RuleArgs::kernel(alpha.clone()), vec![leaf]);
            Some(self.node(Rule::PostCore, Judgement::new(pre, stmt.clone(), post.clone()), RuleArgs::kernel(alpha), vec![inv]))
        };
        let deduced = self.deduce(&post.domain);
        let first = if deduced.is_empty() { None } else { through(deduced) };
        if let Some(n) = &first {
            if n.is_closed() {
                return n.clone();
            }
        }
        if let Ok(AbductionResult::Explanations(found)) =
            alpha_abduce(&post.domain, &self.theory.reasoner, &self.theory.pool, self.config.abduce_max)
        {
            // the first explanation is kept as a witness even when the
            // obligation Δ ⊨ α fails, so that it shows up in the report
            let mut witness = None;
            for s in found.into_iter().filter(|s| !s.is_empty()) {
                if let Some(n) = through(s) {
                    if n.is_closed() {
                        return n;
                    }
                    witness.get_or_insert(n);
                }
            }
            if first.is_none() {
                if let Some(w) = witness {
                    return w;
                }
            }
        }
        first.unwrap_or(direct)
    }

    /// Forward pass over straight-line code: strongest postconditions of
    /// the assignments, each step a var under cons, then cons into `post`.
    fn forward(&self, pre: &TwoTierAssertion, stmts: &[Statement], post: &TwoTierAssertion) -> ProofNode {
        let whole = Statement::from_list(stmts.to_vec()).unwrap_or(Statement::Skip);
        let (start, alpha) = if pre.domain.is_empty() {
            (pre.state.clone(), DomainSet::new())
        } else {
            let alpha = self.deduce(&pre.domain);
            let phi = match self.theory.lifting.delift(&alpha) {
                Ok(r) => conjoin(&pre.state, &r),
                Err(_) => pre.state.clone(),
            };
            (phi, alpha)
        };
        let mut phis = vec![start.clone()];
        for s in stmts {
            let cur = phis.last().unwrap().clone();
            phis.push(match s {
                Statement::Assign(v, e) => strongest_post(&cur, v, e),
                _ => cur,
            });
        }
        let n = stmts.len();
        let last_assign = matches!(stmts.last(), Some(Statement::Assign(..)));
        let mut steps = Vec::new();
        for (i, s) in stmts.iter().enumerate() {
            let from = TwoTierAssertion::state_only(phis[i].clone());
            let domain = if i + 1 == n && last_assign { post.domain.clone() } else { DomainSet::new() };
            let to = TwoTierAssertion::new(domain, phis[i + 1].clone());
            steps.push(match s {
                Statement::Assign(v, e) => {
                    let vpre = TwoTierAssertion::state_only(phis[i + 1].substitute(v, &e.to_term()));
                    let leaf = self.node(Rule::Var, Judgement::new(vpre, s.clone(), to.clone()), RuleArgs::default(), vec![]);
                    self.adapt(leaf, &from, &to)
                }
                _ => self.node(Rule::Skip, Judgement::new(from.clone(), s.clone(), to), RuleArgs::default(), vec![]),
            });
        }
        // right-nested chain of seq nodes
        let mut chain = steps.pop().expect("nonempty statement list");
        while let Some(step) = steps.pop() {
            let k = steps.len();
            let stmt = Statement::from_list(stmts[k..].to_vec()).unwrap();
            let j = Judgement::new(step.pre().clone(), stmt, chain.post().clone());
            let mid = chain.pre().clone();
            chain = self.node(Rule::Seq, j, RuleArgs::seq(mid, 1), vec![step, chain]);
        }
        if alpha.is_empty() {
            return self.adapt(chain, pre, post);
        }
        let cored = pre.with_domain(&alpha);
        let recovered = TwoTierAssertion::new(cored.domain.clone(), start);
        let cons = self.adapt(chain, &recovered, post);
        let inv = self.node(Rule::PreInv, Judgement::new(cored, whole.clone(), post.clone()), RuleArgs::kernel(alpha.clone()), vec![cons]);
        self.node(Rule::PreCore, Judgement::new(pre.clone(), whole, post.clone()), RuleArgs::kernel(alpha), vec![inv])
    }
}

/// Strongest postcondition of `v := e` over a conjunction: conjuncts
/// mentioning `v` are dropped, `v == e` is added, and when `e` is a
/// variable its known value or non-zeroness carries over to `v`.
pub fn strongest_post(phi: &StateFormula, v: &str, e: &Expr) -> StateFormula {
    let mut parts: Vec<StateFormula> = phi.conjuncts().into_iter().filter(|c| !c.mentions(v)).cloned().collect();
    let vt = Term::var(v);
    parts.push(StateFormula::eq(vt.clone(), e.to_term()));
    if let Expr::Var(w) = e {
        if w != v {
            let wt = Term::var(w.clone());
            for c in phi.conjuncts() {
                match c {
                    StateFormula::Eq(a, Term::Int(n)) | StateFormula::Eq(Term::Int(n), a) if *a == wt => {
                        parts.push(StateFormula::eq(vt.clone(), Term::Int(*n)));
                    }
                    StateFormula::Not(inner) => {
                        if let StateFormula::Eq(a, Term::Int(0)) | StateFormula::Eq(Term::Int(0), a) = inner.as_ref() {
                            if *a == wt {
                                parts.push(StateFormula::neq(vt.clone(), Term::Int(0)));
                            }
                        }
                    }
                    _ => {}
                }
            }
        }
    }
    StateFormula::conj_nontrivial(parts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::check_proof;
    use crate::fixtures::{setup, ADDWHEELS, ASSEMBLY, CAR_KB};
    use crate::lang::parse_state_formula;

    #[test]
    fn addwheels_spine() {
        let (p, t) = setup(ADDWHEELS, CAR_KB);
        let tree = auto_verify(&t, &p, &p.procedures[0], &StrategyConfig::default());
        assert!(tree.is_closed(), "{:?}", tree.failures());
        assert_eq!(tree.spine(), vec![Rule::PostCore, Rule::PostInv, Rule::Var]);
    }

    #[test]
    fn skip_body_with_equal_contract() {
        let src = "var x = 0;\nproc id(y) requires [ HasChassis(c) | x == 2 ] ensures [ HasChassis(c) | x == 2 ] begin skip; end;";
        let (p, t) = setup(src, CAR_KB);
        let tree = auto_verify(&t, &p, &p.procedures[0], &StrategyConfig::default());
        assert!(tree.is_closed());
        assert_eq!(tree.spine(), vec![Rule::Skip]);
    }

    #[test]
    fn emitted_trees_pass_the_checker() {
        let (p, t) = setup(ASSEMBLY, CAR_KB);
        for proc in &p.procedures {
            let tree = auto_verify(&t, &p, proc, &StrategyConfig::default());
            assert!(tree.is_closed());
            assert!(check_proof(&t, &p, proc, &tree).is_closed());
        }
    }

    #[test]
    fn loops_stay_open_at_the_bound() {
        let src = "var x = 0;\nproc l(y) requires [ - | - ] ensures [ - | x == 0 ] begin while (x) do x := 0; od end;";
        let (p, t) = setup(src, CAR_KB);
        let config = StrategyConfig { unroll_depth: 2, ..StrategyConfig::default() };
        let tree = auto_verify(&t, &p, &p.procedures[0], &config);
        assert!(!tree.is_closed());
        assert!(tree.failures().iter().any(|i| i.message.contains("unrolling 2 times")));
    }

    #[test]
    fn strongest_post_carries_values() {
        let phi = parse_state_formula("nrWheels == 4 && wheels == 0 && id != 0").unwrap();
        let sp = strongest_post(&phi, "wheels", &Expr::Var("nrWheels".into()));
        assert_eq!(sp.to_string(), "nrWheels == 4 && id != 0 && wheels == nrWheels && wheels == 4");
        let sp = strongest_post(&phi, "bodyId", &Expr::Var("id".into()));
        assert!(sp.aci_set().contains(&parse_state_formula("bodyId != 0").unwrap()));
    }
}
