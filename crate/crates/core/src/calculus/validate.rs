//! Testing judgements against the relational semantics: every run from a
//! state satisfying the precondition must end in a state satisfying the
//! postcondition.

use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::assertion::{CalcError, Theory};
#[cfg(test)]
use super::assertion::TwoTierAssertion;
use super::rules::Judgement;
use crate::lang::{interpret, InterpContext, InterpError};
use crate::lifting::enumerate_states;
use crate::state::{holds, ProgramState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tier {
    State,
    Domain,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub before: ProgramState,
    pub after: ProgramState,
    pub tier: Tier,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tier = match self.tier {
            Tier::State => "state",
            Tier::Domain => "domain",
        };
        write!(f, "{} -> {} violates the {tier} tier", self.before, self.after)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FuzzReport {
    /// Initial states tried, after sampling.
    pub states_checked: usize,
    /// Initial states whose lifting contradicts the knowledge base; they
    /// satisfy every domain assertion vacuously and are skipped.
    pub unliftable: usize,
    /// Initial states satisfying the precondition.
    pub pre_states: usize,
    pub runs: usize,
    pub counterexamples: Vec<Counterexample>,
    pub fuel_exhausted: Vec<ProgramState>,
    /// Initial states whose run reached a call outside its precondition.
    pub pre_violations: usize,
    pub inconclusive: usize,
}

impl FuzzReport {
    pub fn is_sound(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct ValidationConfig {
    pub vars: Vec<String>,
    pub domain: Vec<i64>,
    /// Exhaustive when the state space is at most this large, sampled otherwise.
    pub samples: usize,
    pub seed: u64,
}

/// Checks `j` on every (or a seeded sample of) initial state.
pub fn validate_judgement_empirically(
    theory: &Theory,
    ctx: &InterpContext<'_>,
    j: &Judgement,
    config: &ValidationConfig,
) -> Result<FuzzReport, CalcError> {
    let mut states = enumerate_states(&config.vars, &config.domain);
    if states.len() > config.samples {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        states.shuffle(&mut rng);
        states.truncate(config.samples);
    }
    let mut report = FuzzReport::default();
    for sigma in states {
        report.states_checked += 1;
        if !theory.is_liftable_state(&sigma)? {
            report.unliftable += 1;
            continue;
        }
        match theory.assertion_holds(&sigma, &j.pre) {
            Ok(true) => {}
            Ok(false) => continue,
            Err(CalcError::Inconclusive(_)) => {
                report.inconclusive += 1;
                continue;
            }
            Err(e) => return Err(e),
        }
        report.pre_states += 1;
        let outcome = match interpret(ctx, &j.stmt, &sigma) {
            Ok(o) => o,
            Err(InterpError::FuelExhausted(_)) => {
                report.fuel_exhausted.push(sigma);
                continue;
            }
            Err(InterpError::Calc(e)) => return Err(e),
            Err(e) => return Err(CalcError::Inconclusive(e.to_string())),
        };
        if outcome.pre_violated {
            report.pre_violations += 1;
        }
        for after in outcome.states {
            report.runs += 1;
            let tier = if !holds(&j.post.state, &after, None)? {
                Some(Tier::State)
            } else {
                match theory.assertion_holds(&after, &j.post) {
                    Ok(true) => None,
                    Ok(false) => Some(Tier::Domain),
                    Err(CalcError::Inconclusive(_)) => {
                        report.inconclusive += 1;
                        None
                    }
                    Err(e) => return Err(e),
                }
            };
            if let Some(tier) = tier {
                report.counterexamples.push(Counterexample { before: sigma.clone(), after, tier });
            }
        }
    }
    Ok(report)
}
