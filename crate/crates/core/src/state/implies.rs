use std::collections::BTreeSet;

use super::{holds, ProgramState, StateError, StateFormula, StateInterpretation};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Implication {
    Valid,
    Counterexample(ProgramState),
}

impl Implication {
    pub fn is_valid(&self) -> bool {
        matches!(self, Implication::Valid)
    }
}

/// Decides `phi1 -> phi2` by enumerating states over the constants of both
/// formulas, `0`, and `fresh` extra values (default: one per variable).
///
/// For the equality fragment this is complete: any falsifying state can be
/// collapsed onto the check domain. Formulas with function or predicate
/// symbols are evaluated under `interp` over the same finite domain, which is
/// a bounded check only.
pub fn state_implies(
    phi1: &StateFormula,
    phi2: &StateFormula,
    fresh: Option<usize>,
    interp: Option<&StateInterpretation>,
) -> Result<Implication, StateError> {
    let uninterpreted = phi1.has_uninterpreted() || phi2.has_uninterpreted();
    if uninterpreted && interp.is_none() {
        return Err(StateError::FragmentUnsupported(format!("{phi1} -> {phi2}")));
    }
    let vars: Vec<String> = phi1.vars().union(&phi2.vars()).cloned().collect();
    let mut consts: BTreeSet<i64> = phi1.constants().union(&phi2.constants()).copied().collect();
    consts.insert(0);
    let k = fresh.unwrap_or(vars.len());
    let mut fresh_vals = Vec::with_capacity(k);
    let mut next = consts.iter().map(|c| c.abs()).max().unwrap_or(0) + 1;
    while fresh_vals.len() < k {
        if !consts.contains(&next) {
            fresh_vals.push(next);
        }
        next += 1;
    }
    let consts: Vec<i64> = consts.into_iter().collect();
    let mut search = Search { phi1, phi2, interp, vars: &vars, consts: &consts, fresh: &fresh_vals, symmetric: !uninterpreted };
    let mut sigma = ProgramState::new();
    match search.go(0, 0, &mut sigma)? {
        Some(cex) => Ok(Implication::Counterexample(cex)),
        None => Ok(Implication::Valid),
    }
}

struct Search<'a> {
    phi1: &'a StateFormula,
    phi2: &'a StateFormula,
    interp: Option<&'a StateInterpretation>,
    vars: &'a [String],
    consts: &'a [i64],
    fresh: &'a [i64],
    // Fresh values are interchangeable when no function symbol can tell them
    // apart, so only the first unused one is tried.
    symmetric: bool,
}

impl Search<'_> {
    fn go(&mut self, i: usize, used: usize, sigma: &mut ProgramState) -> Result<Option<ProgramState>, StateError> {
        if i == self.vars.len() {
            if holds(self.phi1, sigma, self.interp)? && !holds(self.phi2, sigma, self.interp)? {
                return Ok(Some(sigma.clone()));
            }
            return Ok(None);
        }
        let var = &self.vars[i];
        for &c in self.consts {
            sigma.set(var.clone(), c);
            if let Some(cex) = self.go(i + 1, used, sigma)? {
                return Ok(Some(cex));
            }
        }
        let limit = if self.symmetric { (used + 1).min(self.fresh.len()) } else { self.fresh.len() };
        for j in 0..limit {
            sigma.set(var.clone(), self.fresh[j]);
            if let Some(cex) = self.go(i + 1, used.max(j + 1), sigma)? {
                return Ok(Some(cex));
            }
        }
        Ok(None)
    }
}
