//! The proof calculus: two-tier assertions, rules, proof trees with a
//! checker, the automatic strategy and empirical validation.

mod assertion;
mod derived;
mod format;
mod proof;
mod rules;
mod strategy;
mod validate;

pub use assertion::{
    conjoin, is_kernel_atom, CalcError, Goal, Obligation, ObligationKind, ObligationStatus, Theory, TwoTierAssertion,
};
pub use derived::{expand_lift_var, expand_total, lift_var_judgement, total_judgement};
pub use format::{parse_proof, parse_proofs, write_proof};
pub use proof::{check_proof, check_tree, CheckReport, Issue, NodePath, ProofNode};
pub use rules::{apply_rule, total_pre, truth_of, Application, Judgement, Rule, RuleArgs, RuleError};
pub use strategy::{auto_verify, strongest_post, StrategyConfig};
pub use validate::{validate_judgement_empirically, Counterexample, FuzzReport, Tier, ValidationConfig};
