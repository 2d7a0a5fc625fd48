//! Rule application: given a rule, its conclusion and its arguments, compute
//! the premises and the side obligations, or explain why the conclusion does
//! not have the rule's shape.

use std::fmt;

use super::assertion::{conjoin, Goal, Theory, TwoTierAssertion};
use crate::dl::DomainSet;
use crate::lang::{Expr, Program, Statement};
use crate::lifting::Lifting;
use crate::state::{StateFormula, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    PreLift,
    PostLift,
    PreCore,
    PostCore,
    PreInv,
    PostInv,
    Cons,
    Var,
    Skip,
    Branch,
    Loop,
    Contract,
    Seq,
    LiftVar,
    Total,
    /// Placeholder for a subgoal the strategy could not close.
    Open,
}

impl Rule {
    pub const ALL: [Rule; 16] = [
        Rule::PreLift,
        Rule::PostLift,
        Rule::PreCore,
        Rule::PostCore,
        Rule::PreInv,
        Rule::PostInv,
        Rule::Cons,
        Rule::Var,
        Rule::Skip,
        Rule::Branch,
        Rule::Loop,
        Rule::Contract,
        Rule::Seq,
        Rule::LiftVar,
        Rule::Total,
        Rule::Open,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::PreLift => "pre-lift",
            Rule::PostLift => "post-lift",
            Rule::PreCore => "pre-core",
            Rule::PostCore => "post-core",
            Rule::PreInv => "pre-inv",
            Rule::PostInv => "post-inv",
            Rule::Cons => "cons",
            Rule::Var => "var",
            Rule::Skip => "skip",
            Rule::Branch => "branch",
            Rule::Loop => "loop",
            Rule::Contract => "contract",
            Rule::Seq => "seq",
            Rule::LiftVar => "lift-var",
            Rule::Total => "total",
            Rule::Open => "open",
        }
    }

    /// Canonical names plus the aliases found in the literature.
    pub fn from_name(s: &str) -> Option<Rule> {
        if let Some(r) = Rule::ALL.iter().find(|r| r.name() == s) {
            return Some(*r);
        }
        Some(match s {
            "post-abd" | "post-abs" => Rule::PostCore,
            "pre-abd" | "pre-abs" => Rule::PreCore,
            "new-var" => Rule::Var,
            "inv" => Rule::Loop,
            "total-var" => Rule::Total,
            _ => return None,
        })
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `pre stmt post`, relative to the contracts and knowledge base in scope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Judgement {
    pub pre: TwoTierAssertion,
    pub stmt: Statement,
    pub post: TwoTierAssertion,
}

impl Judgement {
    pub fn new(pre: TwoTierAssertion, stmt: Statement, post: TwoTierAssertion) -> Self {
        Judgement { pre, stmt, post }
    }

    /// Equality modulo ACI in the state tiers and associativity of `;`.
    pub fn matches(&self, other: &Judgement) -> bool {
        self.pre.aci_eq(&other.pre) && self.post.aci_eq(&other.post) && self.stmt.seq_eq(&other.stmt)
    }
}

impl fmt::Display for Judgement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.pre, self.stmt, self.post)
    }
}

/// Rule-specific data. Which fields a rule reads:
/// `kernel` for pre-core, post-core and total (the kernel `α`) and for
/// pre-inv and post-inv (the recovered part `Δ'`); `inner` for cons;
/// `mid` and `split` for seq; `support` for var; `reason` for open.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RuleArgs {
    pub kernel: Option<DomainSet>,
    pub inner: Option<(TwoTierAssertion, TwoTierAssertion)>,
    pub mid: Option<TwoTierAssertion>,
    pub split: Option<usize>,
    pub support: Option<StateFormula>,
    pub reason: Option<String>,
}

impl RuleArgs {
    pub fn kernel(k: DomainSet) -> Self {
        RuleArgs { kernel: Some(k), ..Default::default() }
    }

    pub fn cons(pre: TwoTierAssertion, post: TwoTierAssertion) -> Self {
        RuleArgs { inner: Some((pre, post)), ..Default::default() }
    }

    pub fn seq(mid: TwoTierAssertion, split: usize) -> Self {
        RuleArgs { mid: Some(mid), split: Some(split), ..Default::default() }
    }

    pub fn support(phi: StateFormula) -> Self {
        RuleArgs { support: Some(phi), ..Default::default() }
    }

    pub fn reason(r: impl Into<String>) -> Self {
        RuleArgs { reason: Some(r.into()), ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RuleError {
    #[error("rule shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("missing argument `{0}`")]
    MissingArgument(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Application {
    pub premises: Vec<Judgement>,
    pub obligations: Vec<Goal>,
}

fn mismatch<T>(msg: impl Into<String>) -> Result<T, RuleError> {
    Err(RuleError::ShapeMismatch(msg.into()))
}

fn expect_assign(j: &Judgement) -> Result<(&String, &Expr), RuleError> {
    match &j.stmt {
        Statement::Assign(v, e) => Ok((v, e)),
        other => mismatch(format!("expected an assignment, found `{other}`")),
    }
}

/// `e != 0` and `e == 0` as state formulas.
pub fn truth_of(e: &Expr) -> (StateFormula, StateFormula) {
    let t = e.to_term();
    (StateFormula::neq(t.clone(), Term::Int(0)), StateFormula::eq(t, Term::Int(0)))
}

/// Applies `rule` backwards to `target`.
pub fn apply_rule(
    theory: &Theory,
    program: &Program,
    rule: Rule,
    target: &Judgement,
    args: &RuleArgs,
) -> Result<Application, RuleError> {
    let (pre, post) = (&target.pre, &target.post);
    let premise = |pre: TwoTierAssertion, post: TwoTierAssertion| Judgement::new(pre, target.stmt.clone(), post);
    let kernel = || args.kernel.clone().ok_or(RuleError::MissingArgument("kernel"));
    let app = |premises, obligations| Ok(Application { premises, obligations });
    match rule {
        Rule::PreLift | Rule::PostLift => {
            let side = if rule == Rule::PreLift { pre } else { post };
            let lifted = theory
                .lifting
                .lift_spec(&side.state)
                .map_err(|e| RuleError::ShapeMismatch(e.to_string()))?;
            let j = if rule == Rule::PreLift {
                premise(pre.with_domain(&lifted), post.clone())
            } else {
                premise(pre.clone(), post.with_domain(&lifted))
            };
            app(vec![j], vec![])
        }
        Rule::PreCore | Rule::PostCore => {
            let alpha = kernel()?;
            theory.lifting.check_signature(&alpha).map_err(|e| RuleError::ShapeMismatch(e.to_string()))?;
            let side = if rule == Rule::PreCore { pre } else { post };
            let j = if rule == Rule::PreCore {
                premise(pre.with_domain(&alpha), post.clone())
            } else {
                premise(pre.clone(), post.with_domain(&alpha))
            };
            app(vec![j], vec![Goal::Entails(side.domain.clone(), alpha)])
        }
        Rule::PreInv | Rule::PostInv => {
            let recovered = kernel()?;
            let side = if rule == Rule::PreInv { pre } else { post };
            if !recovered.is_subset(&side.domain) {
                return mismatch("the recovered formulas are not part of the domain tier");
            }
            let phi = match theory.lifting.delift(&recovered) {
                Ok(phi) => phi,
                // reported through the signature obligation
                Err(_) => StateFormula::truth(),
            };
            let j = if rule == Rule::PreInv {
                premise(pre.with_state(phi), post.clone())
            } else {
                premise(pre.clone(), post.with_state(phi))
            };
            app(vec![j], vec![Goal::Signature(recovered)])
        }
        Rule::Cons => {
            let (ipre, ipost) = args.inner.clone().ok_or(RuleError::MissingArgument("inner"))?;
            let obligations = vec![Goal::Implies(pre.clone(), ipre.clone()), Goal::Implies(ipost.clone(), post.clone())];
            app(vec![premise(ipre, ipost)], obligations)
        }
        Rule::Var => {
            let (v, e) = expect_assign(target)?;
            let expected = TwoTierAssertion::state_only(post.state.substitute(v, &e.to_term()));
            if !pre.aci_eq(&expected) {
                return mismatch(format!("var needs precondition {expected}, found {pre}"));
            }
            let support = match &args.support {
                Some(s) => {
                    let all = post.state.aci_set();
                    if !s.aci_set().is_subset(&all) {
                        return mismatch("support is not a part of the postcondition's state tier");
                    }
                    s
                }
                None => &post.state,
            };
            let obligations =
                if post.domain.is_empty() { vec![] } else { vec![Goal::Entails(theory.lift(support), post.domain.clone())] };
            app(vec![], obligations)
        }
        Rule::Skip => {
            if !matches!(target.stmt, Statement::Skip) {
                return mismatch(format!("expected skip, found `{}`", target.stmt));
            }
            if !pre.aci_eq(post) {
                return mismatch(format!("skip needs equal pre and post, found {pre} and {post}"));
            }
            app(vec![], vec![])
        }
        Rule::Branch => {
            let Statement::If(e, s1, s2) = &target.stmt else {
                return mismatch(format!("expected a conditional, found `{}`", target.stmt));
            };
            if !pre.domain.is_empty() {
                return mismatch("branch needs an empty domain precondition");
            }
            if !pre.state.aci_eq(&post.state) {
                return mismatch("branch needs the same state tier before and after");
            }
            let (yes, no) = truth_of(e);
            app(
                vec![
                    Judgement::new(TwoTierAssertion::state_only(conjoin(&pre.state, &yes)), (**s1).clone(), post.clone()),
                    Judgement::new(TwoTierAssertion::state_only(conjoin(&pre.state, &no)), (**s2).clone(), post.clone()),
                ],
                vec![],
            )
        }
        Rule::Loop => {
            let Statement::While(e, body) = &target.stmt else {
                return mismatch(format!("expected a loop, found `{}`", target.stmt));
            };
            let unrolled = Statement::If(
                e.clone(),
                Box::new(Statement::seq((**body).clone(), target.stmt.clone())),
                Box::new(Statement::Skip),
            );
            app(vec![Judgement::new(pre.clone(), unrolled, post.clone())], vec![])
        }
        Rule::Contract => {
            let Statement::Call(p, e) = &target.stmt else {
                return mismatch(format!("expected a call, found `{}`", target.stmt));
            };
            let Some(proc) = program.procedure(p) else {
                return mismatch(format!("no contract for `{p}`"));
            };
            let (cpre, cpost) = (proc.pre_for(e), proc.post_for(e));
            if !pre.aci_eq(&cpre) || !post.aci_eq(&cpost) {
                return mismatch(format!("contract of `{p}` is {cpre} {cpost}"));
            }
            app(vec![], vec![])
        }
        Rule::Seq => {
            let mid = args.mid.clone().ok_or(RuleError::MissingArgument("mid"))?;
            let split = args.split.ok_or(RuleError::MissingArgument("split"))?;
            let parts: Vec<Statement> = target.stmt.flatten().into_iter().cloned().collect();
            if split == 0 || split >= parts.len() {
                return mismatch(format!("cannot split {} statements at {split}", parts.len()));
            }
            let right = parts[split..].to_vec();
            let mut left = parts;
            left.truncate(split);
            app(
                vec![
                    Judgement::new(pre.clone(), Statement::from_list(left).unwrap(), mid.clone()),
                    Judgement::new(mid, Statement::from_list(right).unwrap(), post.clone()),
                ],
                vec![],
            )
        }
        Rule::LiftVar => {
            let (v, e) = expect_assign(target)?;
            let phi_pre = post.state.substitute(v, &e.to_term());
            let expected = TwoTierAssertion::new(theory.lift(&phi_pre), phi_pre);
            if !pre.aci_eq(&expected) {
                return mismatch(format!("lift-var needs precondition {expected}, found {pre}"));
            }
            let obligations = if post.domain.is_empty() {
                vec![]
            } else {
                vec![Goal::Entails(theory.lift(&post.state), post.domain.clone())]
            };
            app(vec![], obligations)
        }
        Rule::Total => {
            let (v, e) = expect_assign(target)?;
            let alpha = kernel()?;
            let expected = total_pre(theory, &post.state, &alpha, v, e)
                .map_err(|m| RuleError::ShapeMismatch(format!("total: {m}")))?;
            if !pre.aci_eq(&expected) {
                return mismatch(format!("total needs precondition {expected}, found {pre}"));
            }
            let mut obligations = vec![Goal::Entails(post.domain.clone(), alpha)];
            if !post.domain.is_empty() {
                obligations.push(Goal::Entails(theory.lift(&post.state), post.domain.clone()));
            }
            app(vec![], obligations)
        }
        Rule::Open => mismatch("open subgoal"),
    }
}

/// The precondition rule total derives for `v := e` with post state `phi`
/// and kernel `alpha`: with `Φ' = (phi ∧ delift(alpha))[v\e]`, it is
/// `[ μ̂(Φ') | Φ' ]`.
pub fn total_pre(
    theory: &Theory,
    phi: &StateFormula,
    alpha: &DomainSet,
    v: &str,
    e: &Expr,
) -> Result<TwoTierAssertion, String> {
    let recovered = theory.lifting.delift(alpha).map_err(|e| e.to_string())?;
    let hat = conjoin(phi, &recovered).substitute(v, &e.to_term());
    Ok(TwoTierAssertion::new(theory.lift(&hat), hat))
}
