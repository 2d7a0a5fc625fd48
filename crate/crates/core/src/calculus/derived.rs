//! The derived rules lift-var and total spelled out in primitive rules.
//! Both rules are justified by these derivations; the test suites compare
//! the two forms on generated judgements.

use super::assertion::{Theory, TwoTierAssertion};
use super::proof::ProofNode;
use super::rules::{total_pre, Judgement, Rule, RuleArgs};
use crate::dl::DomainSet;
use crate::lang::{Program, Statement};

/// `[ μ̂(Φ[v\e]) | Φ[v\e] ] v := e [ Δ | Φ ]` as cons over var.
pub fn expand_lift_var(theory: &Theory, program: &Program, j: &Judgement) -> ProofNode {
    let Statement::Assign(v, e) = &j.stmt else {
        return ProofNode::open(j.clone(), "lift-var: expected an assignment");
    };
    let inner_pre = TwoTierAssertion::state_only(j.post.state.substitute(v, &e.to_term()));
    let var = ProofNode::build(
        theory,
        program,
        Rule::Var,
        Judgement::new(inner_pre.clone(), j.stmt.clone(), j.post.clone()),
        RuleArgs::default(),
        vec![],
    );
    ProofNode::build(theory, program, Rule::Cons, j.clone(), RuleArgs::cons(inner_pre, j.post.clone()), vec![var])
}

/// Rule total with kernel `alpha` as post-core, post-inv, cons and var,
/// the var node citing only the original state tier as support.
pub fn expand_total(theory: &Theory, program: &Program, j: &Judgement, alpha: &DomainSet) -> ProofNode {
    let Statement::Assign(v, e) = &j.stmt else {
        return ProofNode::open(j.clone(), "total: expected an assignment");
    };
    let delta = &j.post;
    let recovered = match theory.lifting.delift(alpha) {
        Ok(phi) => phi,
        Err(err) => return ProofNode::open(j.clone(), format!("total: {err}")),
    };
    let hat = delta.with_state(recovered);
    let widened = j.post.with_domain(alpha);
    let widened_hat = hat.with_domain(alpha);
    let var_pre = TwoTierAssertion::state_only(hat.state.substitute(v, &e.to_term()));
    let var = ProofNode::build(
        theory,
        program,
        Rule::Var,
        Judgement::new(var_pre.clone(), j.stmt.clone(), hat.clone()),
        RuleArgs::support(delta.state.clone()),
        vec![],
    );
    let cons = ProofNode::build(
        theory,
        program,
        Rule::Cons,
        Judgement::new(j.pre.clone(), j.stmt.clone(), widened_hat.clone()),
        RuleArgs::cons(var_pre, hat),
        vec![var],
    );
    let inv = ProofNode::build(
        theory,
        program,
        Rule::PostInv,
        Judgement::new(j.pre.clone(), j.stmt.clone(), widened),
        RuleArgs::kernel(alpha.clone()),
        vec![cons],
    );
    ProofNode::build(theory, program, Rule::PostCore, j.clone(), RuleArgs::kernel(alpha.clone()), vec![inv])
}

/// The conclusion rule total derives for `v := e` towards `post`.
pub fn total_judgement(theory: &Theory, stmt: &Statement, post: &TwoTierAssertion, alpha: &DomainSet) -> Option<Judgement> {
    let Statement::Assign(v, e) = stmt else { return None };
    let pre = total_pre(theory, &post.state, alpha, v, e).ok()?;
    Some(Judgement::new(pre, stmt.clone(), post.clone()))
}

/// The conclusion rule lift-var derives for `v := e` towards `post`.
pub fn lift_var_judgement(theory: &Theory, stmt: &Statement, post: &TwoTierAssertion) -> Option<Judgement> {
    let Statement::Assign(v, e) = stmt else { return None };
    let phi = post.state.substitute(v, &e.to_term());
    Some(Judgement::new(TwoTierAssertion::new(theory.lift(&phi), phi), stmt.clone(), post.clone()))
}
