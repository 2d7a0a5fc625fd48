//! Calculus properties on generated programs and judgements.

mod common;

use std::collections::BTreeSet;
use std::sync::LazyLock;

use proptest::prelude::*;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use twotier::calculus::{
    auto_verify, check_proof, expand_lift_var, expand_total, lift_var_judgement, parse_proof, total_judgement,
    validate_judgement_empirically, write_proof, Judgement, ProofNode, Rule, RuleArgs, StrategyConfig, Theory,
    ValidationConfig,
};
use twotier::dl::DomainSet;
use twotier::kernel::{alpha_abduce, alpha_deduce, AbductionResult};
use twotier::lang::{parse_program, InterpContext, Program, Statement};

static CAR_PROGRAM: LazyLock<Program> = LazyLock::new(car_program);
static CAR: LazyLock<Theory> = LazyLock::new(|| theory(&kb("car_corrected.kb"), &CAR_PROGRAM));

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn generated(seed: u64) -> (Program, Theory) {
    let p = parse_program(&generated_program(&mut rng(seed))).unwrap();
    let t = theory(&kb("car_corrected.kb"), &p);
    (p, t)
}

fn issue_paths(tree: &ProofNode) -> BTreeSet<String> {
    tree.failures().iter().map(|i| i.path.to_string()).collect()
}

/// An assignment to a car variable towards a generated postcondition.
fn assignment_goal(r: &mut impl Rng) -> (Statement, twotier::calculus::TwoTierAssertion) {
    let v = *["wheels", "doors", "bodyId"].choose(r).unwrap();
    let e = *["0", "2", "4", "nrWheels"].choose(r).unwrap();
    let stmt = twotier::lang::parse_statements(&format!("{v} := {e};")).unwrap();
    let post = assertion(car_facts(r, 2), liftable_formula(r, &car_vars(), 2));
    (stmt, post)
}

/// Same verdict, and every obligation of the derived node reappears with
/// the same status somewhere in the expansion.
fn same_verdicts(derived: &ProofNode, expansion: &ProofNode) -> Result<(), TestCaseError> {
    prop_assert_eq!(derived.is_closed(), expansion.is_closed());
    let mut seen = Vec::new();
    expansion.walk(&mut |n| seen.extend(n.obligations.iter().map(|o| (o.payload.clone(), o.status))));
    for o in &derived.obligations {
        prop_assert!(seen.contains(&(o.payload.clone(), o.status)), "{} {:?} missing from the expansion", o.payload, o.status);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn checker_agrees_with_the_strategy(seed in any::<u64>()) {
        let (p, t) = generated(seed);
        for proc in &p.procedures {
            let tree = auto_verify(&t, &p, proc, &StrategyConfig::default());
            let report = check_proof(&t, &p, proc, &tree);
            prop_assert_eq!(report.is_closed(), tree.is_closed());
            let paths: BTreeSet<String> = report.issues().iter().map(|i| i.path.to_string()).collect();
            prop_assert_eq!(paths, issue_paths(&tree));

            let text = write_proof(&proc.name, &tree);
            let (_, back) = parse_proof(&text).unwrap();
            prop_assert_eq!(write_proof(&proc.name, &back), text);
            prop_assert_eq!(check_proof(&t, &p, proc, &back).is_closed(), tree.is_closed());
        }
    }

    #[test]
    fn lift_var_matches_its_expansion(seed in any::<u64>()) {
        let (stmt, post) = assignment_goal(&mut rng(seed));
        let j = lift_var_judgement(&CAR, &stmt, &post).unwrap();
        let derived = ProofNode::build(&CAR, &CAR_PROGRAM, Rule::LiftVar, j.clone(), RuleArgs::default(), vec![]);
        same_verdicts(&derived, &expand_lift_var(&CAR, &CAR_PROGRAM, &j))?;
    }

    #[test]
    fn total_matches_its_expansion(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (stmt, post) = assignment_goal(&mut r);
        let alpha: DomainSet = if r.random_bool(0.7) {
            alpha_deduce(&post.domain, &CAR.reasoner, &CAR.pool).unwrap().atoms
        } else {
            CAR.pool.atoms.choose_multiple(&mut r, 1).cloned().collect()
        };
        let j = total_judgement(&CAR, &stmt, &post, &alpha).unwrap();
        let derived = ProofNode::build(&CAR, &CAR_PROGRAM, Rule::Total, j.clone(), RuleArgs::kernel(alpha.clone()), vec![]);
        same_verdicts(&derived, &expand_total(&CAR, &CAR_PROGRAM, &j, &alpha))?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn closed_judgements_hold_on_every_run(seed in any::<u64>()) {
        let (p, t) = generated(seed);
        let proc = p.procedure("gen").unwrap();
        let tree = auto_verify(&t, &p, proc, &StrategyConfig::default());
        let vars = p.state_vars(proc);
        let ctx = InterpContext::new(&p, &t, vars.clone(), VALUES.to_vec());
        let config = ValidationConfig { vars, domain: VALUES.to_vec(), samples: usize::MAX, seed: 0 };
        let mut closed: Vec<&Judgement> = Vec::new();
        tree.walk(&mut |n| if n.is_closed() { closed.push(&n.judgement) });
        for j in closed {
            let report = validate_judgement_empirically(&t, &ctx, j, &config).unwrap();
            prop_assert!(report.is_sound(), "{}: {}", j, report.counterexamples[0]);
        }
    }

    #[test]
    fn deduction_is_deterministic_and_entailed(seed in any::<u64>()) {
        let delta = car_facts(&mut rng(seed), 2);
        let a = alpha_deduce(&delta, &CAR.reasoner, &CAR.pool).unwrap();
        let fresh = theory(&kb("car_corrected.kb"), &CAR_PROGRAM);
        prop_assert_eq!(&a, &alpha_deduce(&delta, &fresh.reasoner, &fresh.pool).unwrap());
        prop_assert!(a.atoms.is_subset(&a.entailed));
        for f in &a.entailed {
            prop_assert!(CAR.reasoner.entails(delta.iter(), std::iter::once(f)).unwrap().is_entailed());
        }
        // the reduced set still entails everything that was dropped
        prop_assert!(CAR.reasoner.entails(a.atoms.iter(), a.entailed.iter()).unwrap().is_entailed());
    }

    #[test]
    fn abduced_explanations_are_minimal(seed in any::<u64>()) {
        let mut delta = car_facts(&mut rng(seed), 1);
        if delta.is_empty() {
            delta.insert(car_fact(&mut rng(seed ^ 1)));
        }
        let verbatim = theory(&kb("car_verbatim.kb"), &CAR_PROGRAM);
        for t in [&*CAR, &verbatim] {
            let AbductionResult::Explanations(found) = alpha_abduce(&delta, &t.reasoner, &t.pool, 2).unwrap() else {
                continue;
            };
            for s in &found {
                prop_assert!(t.reasoner.entails(s.iter(), delta.iter()).unwrap().is_entailed());
                for drop in s {
                    let mut smaller = s.clone();
                    smaller.remove(drop);
                    prop_assert!(!t.reasoner.entails(smaller.iter(), delta.iter()).unwrap().is_entailed(), "{:?} not minimal", s);
                }
            }
        }
    }
}
