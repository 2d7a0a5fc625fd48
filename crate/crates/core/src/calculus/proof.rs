use std::fmt;

use super::assertion::{Obligation, ObligationStatus, Theory, TwoTierAssertion};
use super::rules::{apply_rule, Judgement, Rule, RuleArgs};
use crate::lang::{Procedure, Program};

/// A derivation. `obligations` are the discharged side conditions of the
/// rule at this node; the checker recomputes them instead of trusting them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofNode {
    pub rule: Rule,
    pub judgement: Judgement,
    pub args: RuleArgs,
    pub obligations: Vec<Obligation>,
    pub premises: Vec<ProofNode>,
}

impl ProofNode {
    /// Applies `rule` to `judgement`, discharges its obligations and attaches
    /// the given premise proofs. Shape errors become an open leaf.
    pub fn build(
        theory: &Theory,
        program: &Program,
        rule: Rule,
        judgement: Judgement,
        args: RuleArgs,
        premises: Vec<ProofNode>,
    ) -> ProofNode {
        match apply_rule(theory, program, rule, &judgement, &args) {
            Ok(app) => {
                let obligations = app.obligations.iter().map(|g| theory.discharge(g)).collect();
                ProofNode { rule, judgement, args, obligations, premises }
            }
            Err(e) => ProofNode::open(judgement, format!("{rule}: {e}")),
        }
    }

    pub fn open(judgement: Judgement, reason: impl Into<String>) -> ProofNode {
        ProofNode { rule: Rule::Open, judgement, args: RuleArgs::reason(reason), obligations: vec![], premises: vec![] }
    }

    pub fn pre(&self) -> &TwoTierAssertion {
        &self.judgement.pre
    }

    pub fn post(&self) -> &TwoTierAssertion {
        &self.judgement.post
    }

    /// No open leaf and every recorded obligation proved.
    pub fn is_closed(&self) -> bool {
        self.rule != Rule::Open && self.obligations.iter().all(Obligation::is_proved) && self.premises.iter().all(ProofNode::is_closed)
    }

    /// Rule names in pre-order.
    pub fn spine(&self) -> Vec<Rule> {
        let mut out = Vec::new();
        self.walk(&mut |n| out.push(n.rule));
        out
    }

    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(ProofNode::size).sum::<usize>()
    }

    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a ProofNode)) {
        f(self);
        for p in &self.premises {
            p.walk(f);
        }
    }

    pub fn walk_mut(&mut self, f: &mut impl FnMut(&mut ProofNode)) {
        f(self);
        for p in &mut self.premises {
            p.walk_mut(f);
        }
    }

    /// Nodes with their paths, in pre-order.
    pub fn nodes(&self) -> Vec<(NodePath, &ProofNode)> {
        let mut out = Vec::new();
        collect(self, NodePath::root(), &mut out);
        out
    }

    /// Open leaves and unproved obligations, with their paths.
    pub fn failures(&self) -> Vec<Issue> {
        let mut out = Vec::new();
        for (path, n) in self.nodes() {
            if n.rule == Rule::Open {
                let reason = n.args.reason.clone().unwrap_or_default();
                out.push(Issue { path: path.clone(), rule: n.rule, message: format!("open subgoal {}: {reason}", n.judgement) });
            }
            for o in n.obligations.iter().filter(|o| !o.is_proved()) {
                out.push(Issue { path: path.clone(), rule: n.rule, message: obligation_message(o) });
            }
        }
        out
    }
}

fn collect<'a>(n: &'a ProofNode, path: NodePath, out: &mut Vec<(NodePath, &'a ProofNode)>) {
    out.push((path.clone(), n));
    for (i, p) in n.premises.iter().enumerate() {
        collect(p, path.child(i), out);
    }
}

fn obligation_message(o: &Obligation) -> String {
    let mut m = format!("{} {}: {}", o.kind.name(), o.status.name(), o.payload);
    if let Some(d) = &o.detail {
        m.push_str("\n  ");
        m.push_str(&d.trim_end().replace('\n', "\n  "));
    }
    m
}

/// Position of a node: the premise indices from the root, printed as
/// `root`, `root.0`, `root.0.1`, ...
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct NodePath(pub Vec<usize>);

impl NodePath {
    pub fn root() -> Self {
        NodePath(Vec::new())
    }

    pub fn child(&self, i: usize) -> Self {
        let mut v = self.0.clone();
        v.push(i);
        NodePath(v)
    }
}

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "root")?;
        for i in &self.0 {
            write!(f, ".{i}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub path: NodePath,
    pub rule: Rule,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at {} ({}): {}", self.path, self.rule, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckReport {
    Closed,
    Open(Vec<Issue>),
}

impl CheckReport {
    pub fn is_closed(&self) -> bool {
        matches!(self, CheckReport::Closed)
    }

    pub fn issues(&self) -> &[Issue] {
        match self {
            CheckReport::Closed => &[],
            CheckReport::Open(v) => v,
        }
    }
}

/// Replays `tree` as a proof of `proc`'s contract: the root must conclude
/// the contract judgement, every node must re-derive from its rule, and
/// every recomputed obligation must be proved.
pub fn check_proof(theory: &Theory, program: &Program, proc: &Procedure, tree: &ProofNode) -> CheckReport {
    let mut issues = Vec::new();
    let expected = Judgement::new(proc.contract.pre.clone(), proc.body.clone(), proc.contract.post.clone());
    if !tree.judgement.matches(&expected) {
        issues.push(Issue {
            path: NodePath::root(),
            rule: tree.rule,
            message: format!("conclusion {} is not the contract judgement {}", tree.judgement, expected),
        });
    }
    check_node(theory, program, tree, NodePath::root(), &mut issues);
    if issues.is_empty() {
        CheckReport::Closed
    } else {
        CheckReport::Open(issues)
    }
}

/// Checks a tree without relating its root to a procedure.
pub fn check_tree(theory: &Theory, program: &Program, tree: &ProofNode) -> CheckReport {
    let mut issues = Vec::new();
    check_node(theory, program, tree, NodePath::root(), &mut issues);
    if issues.is_empty() {
        CheckReport::Closed
    } else {
        CheckReport::Open(issues)
    }
}

fn check_node(theory: &Theory, program: &Program, node: &ProofNode, path: NodePath, issues: &mut Vec<Issue>) {
    let mut issue = |message: String| issues.push(Issue { path: path.clone(), rule: node.rule, message });
    if node.rule == Rule::Open {
        issue(format!("open subgoal {}: {}", node.judgement, node.args.reason.clone().unwrap_or_default()));
        return;
    }
    let app = match apply_rule(theory, program, node.rule, &node.judgement, &node.args) {
        Ok(app) => app,
        Err(e) => {
            issue(e.to_string());
            return;
        }
    };
    if app.premises.len() != node.premises.len() {
        issue(format!("{} expects {} premises, found {}", node.rule, app.premises.len(), node.premises.len()));
    }
    for (i, (want, got)) in app.premises.iter().zip(&node.premises).enumerate() {
        if !want.matches(&got.judgement) {
            issue(format!("premise {i} should conclude {want}, found {}", got.judgement));
        }
    }
    let want: Vec<(String, String)> = app.obligations.iter().map(|g| (g.kind().name().to_string(), g.to_string())).collect();
    let got: Vec<(String, String)> = node.obligations.iter().map(|o| (o.kind.name().to_string(), o.payload.clone())).collect();
    if want != got {
        let render = |v: &[(String, String)]| v.iter().map(|(k, p)| format!("{k} {p}")).collect::<Vec<_>>().join("; ");
        issue(format!("obligations should be [{}], found [{}]", render(&want), render(&got)));
    }
    for g in &app.obligations {
        let o = theory.discharge(g);
        if o.status != ObligationStatus::Proved {
            issue(obligation_message(&o));
        }
    }
    for (i, p) in node.premises.iter().enumerate() {
        check_node(theory, program, p, path.child(i), issues);
    }
}
