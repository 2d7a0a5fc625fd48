//! Shared helpers for the integration tests: corpus access, seeded
//! generators and a brute-force model enumerator for the DL reasoner.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use rand::seq::IndexedRandom;
use rand::Rng;

use twotier::calculus::{Theory, TwoTierAssertion};
use twotier::dl::{
    set_signature, satisfies_all, Concept, DomainFormula, DomainInterpretation, DomainSet, KnowledgeBase,
    ReasonerConfig,
};
use twotier::lang::{parse_kb, parse_program, Program};
use twotier::state::{StateFormula, Term};

pub fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

pub fn read(name: &str) -> String {
    std::fs::read_to_string(corpus(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn kb(name: &str) -> KnowledgeBase {
    parse_kb(&read(name)).unwrap()
}

pub fn program(name: &str) -> Program {
    parse_program(&read(name)).unwrap()
}

pub fn theory(kb: &KnowledgeBase, program: &Program) -> Theory {
    Theory::new(kb, program, ReasonerConfig::default())
}

/// Every corpus file that `parse` understands.
pub fn corpus_sources() -> Vec<&'static str> {
    vec![
        "car_corrected.kb",
        "car_verbatim.kb",
        "car_weakened.kb",
        "addwheels.prog",
        "assembly_corrected.prog",
        "assembly_paper_verbatim.prog",
    ]
}

pub const CAR_VARS: [&str; 4] = ["bodyId", "doors", "nrWheels", "wheels"];
pub const VALUES: [i64; 3] = [0, 2, 4];

pub fn car_vars() -> Vec<String> {
    CAR_VARS.iter().map(|s| s.to_string()).collect()
}

/// A program over the car globals whose variables cover `CAR_VARS`, so the
/// theory binds a stub for each.
pub fn car_program() -> Program {
    parse_program(
        "var wheels = 0; var doors = 0; var bodyId = 0;
         proc addWheels(nrWheels)
           requires [ - | nrWheels == 4 ]
           ensures [ HasFourWheels(c) | - ]
         begin wheels := nrWheels; end;",
    )
    .unwrap()
}

// ---------------------------------------------------------------------------
// state formulas

pub fn atom(v: &str, op: u8, n: i64) -> StateFormula {
    let (a, b) = (Term::var(v), Term::Int(n));
    match op % 4 {
        0 => StateFormula::eq(a, b),
        1 => StateFormula::eq(b, a),
        2 => StateFormula::neq(Term::var(v), Term::Int(0)),
        _ => StateFormula::neq(Term::Int(0), Term::var(v)),
    }
}

/// Conjunction of up to `max` liftable atoms over `vars`.
pub fn liftable_formula(rng: &mut impl Rng, vars: &[String], max: usize) -> StateFormula {
    let k = rng.random_range(0..=max);
    StateFormula::conj((0..k).map(|_| {
        let v = vars.choose(rng).unwrap();
        atom(v, rng.random_range(0..4), *VALUES.choose(rng).unwrap())
    }))
}

/// Like `liftable_formula`, sometimes with an atom outside the fragment.
pub fn mixed_formula(rng: &mut impl Rng, vars: &[String]) -> StateFormula {
    let base = liftable_formula(rng, vars, 2);
    if rng.random_bool(0.3) {
        let a = vars.choose(rng).unwrap();
        let b = vars.choose(rng).unwrap();
        StateFormula::and(base, StateFormula::eq(Term::var(a), Term::var(b)))
    } else {
        base
    }
}

/// Deterministic pool of liftable formulas: every atom over `vars` and
/// `VALUES`, and every conjunction of two atoms on different variables.
pub fn formula_pool(vars: &[String]) -> Vec<StateFormula> {
    let mut atoms = Vec::new();
    for v in vars {
        for &n in &VALUES {
            atoms.push((v.clone(), atom(v, if n % 4 == 0 { 0 } else { 1 }, n)));
        }
        atoms.push((v.clone(), atom(v, 2, 0)));
    }
    let mut pool: Vec<StateFormula> = atoms.iter().map(|(_, a)| a.clone()).collect();
    for (i, (v, a)) in atoms.iter().enumerate() {
        for (w, b) in &atoms[i + 1..] {
            if v != w {
                pool.push(StateFormula::and(a.clone(), b.clone()));
            }
        }
    }
    pool.push(StateFormula::truth());
    pool
}

// ---------------------------------------------------------------------------
// domain assertions

pub const CAR_FACTS: [&str; 6] = ["Car", "HasBody", "HasChassis", "HasFourWheels", "HasTwoDoors", "SmallCar"];

pub fn car_fact(rng: &mut impl Rng) -> DomainFormula {
    DomainFormula::instance(Concept::atomic(*CAR_FACTS.choose(rng).unwrap()), "c")
}

pub fn car_facts(rng: &mut impl Rng, max: usize) -> DomainSet {
    let k = rng.random_range(0..=max);
    (0..k).map(|_| car_fact(rng)).collect()
}

/// Formulas over the kernel signature: pool atoms and, now and then, a fact
/// about `c` from the knowledge base vocabulary.
pub fn kernel_set(rng: &mut impl Rng, theory: &Theory, max: usize) -> DomainSet {
    let k = rng.random_range(0..=max);
    (0..k)
        .map(|_| if rng.random_bool(0.2) { car_fact(rng) } else { theory.pool.atoms.choose(rng).unwrap().clone() })
        .collect()
}

pub fn assertion(domain: DomainSet, state: StateFormula) -> TwoTierAssertion {
    TwoTierAssertion::new(domain, state)
}

// ---------------------------------------------------------------------------
// programs

pub const GEN_GLOBALS: [&str; 4] = ["wheels", "doors", "bodyId", "x"];
pub const GEN_PARAM: &str = "p";

fn gen_expr(rng: &mut impl Rng) -> String {
    if rng.random_bool(0.5) {
        VALUES.choose(rng).unwrap().to_string()
    } else {
        let vars = [GEN_GLOBALS.as_slice(), &[GEN_PARAM]].concat();
        vars.choose(rng).unwrap().to_string()
    }
}

fn gen_simple(rng: &mut impl Rng) -> String {
    match rng.random_range(0..10) {
        0..=5 => format!("{} := {};", GEN_GLOBALS.choose(rng).unwrap(), gen_expr(rng)),
        6..=8 => format!("addWheels({});", gen_expr(rng)),
        _ => "skip;".to_string(),
    }
}

/// Statements spending at most `budget`; returns the text and the count.
fn gen_block(rng: &mut impl Rng, budget: usize, depth: usize) -> (String, usize) {
    let mut out = Vec::new();
    let mut used = 0;
    let want = rng.random_range(1..=budget.max(1));
    while used < want {
        let left = want - used;
        let pick = rng.random_range(0..10);
        if depth < 2 && left >= 3 && pick < 2 {
            let (a, na) = gen_block(rng, (left - 1) / 2, depth + 1);
            let (b, nb) = gen_block(rng, left - 1 - na, depth + 1);
            out.push(format!("if ({}) then {a} else {b} fi", gen_expr(rng)));
            used += 1 + na + nb;
        } else if depth < 2 && left >= 3 && pick < 3 {
            // terminates: the last statement clears the guard
            let (b, nb) = gen_block(rng, left - 2, depth + 1);
            out.push(format!("while (x) do {b} x := 0; od"));
            used += 2 + nb;
        } else {
            out.push(gen_simple(rng));
            used += 1;
        }
    }
    (out.join(" "), used)
}

fn gen_assertion(rng: &mut impl Rng, facts: &[&str]) -> String {
    let domain: BTreeSet<String> =
        (0..rng.random_range(0..=1)).map(|_| format!("{}(c)", facts.choose(rng).unwrap())).collect();
    let vars: Vec<String> = [GEN_GLOBALS.as_slice(), &[GEN_PARAM]].concat().iter().map(|s| s.to_string()).collect();
    let state = liftable_formula(rng, &vars, 2);
    let d = if domain.is_empty() { "-".to_string() } else { domain.into_iter().collect::<Vec<_>>().join(", ") };
    let s = if state.is_truth() { "-".to_string() } else { state.to_string() };
    format!("[ {d} | {s} ]")
}

/// Source of a program with the unframed `addWheels` and one generated
/// procedure `gen(p)` of at most six statements.
pub fn generated_program(rng: &mut impl Rng) -> String {
    let (body, _) = gen_block(rng, 6, 0);
    let pre = gen_assertion(rng, &["HasChassis", "HasFourWheels", "Car"]);
    let post = gen_assertion(rng, &["HasFourWheels", "HasBody", "HasTwoDoors", "SmallCar", "Car"]);
    format!(
        "var wheels = 0; var doors = 0; var bodyId = 0; var x = 0;
proc addWheels(nrWheels)
  requires [ - | nrWheels == 4 ]
  ensures [ HasFourWheels(c) | - ]
begin
  wheels := nrWheels;
end;
proc gen({GEN_PARAM})
  requires {pre}
  ensures {post}
begin
  {body}
end;
"
    )
}

// ---------------------------------------------------------------------------
// brute-force DL semantics

/// Whether `premises` entail `goal` under `kb` in every interpretation over
/// the nominals plus two anonymous elements and the value pool the reasoner
/// uses (constants, 0 and one fresh value). Returns a countermodel if not.
pub fn brute_entails(
    kb: &KnowledgeBase,
    premises: &[DomainFormula],
    goal: &DomainFormula,
) -> Option<DomainInterpretation> {
    let axioms = kb.effective_axioms();
    let all: Vec<&DomainFormula> = axioms.iter().chain(premises).chain(std::iter::once(goal)).collect();
    let sig = set_signature(all.iter().copied());
    let mut consts = BTreeSet::new();
    for f in &all {
        f.constants(&mut consts);
    }
    consts.insert(0);
    let fresh = (consts.iter().map(|c: &i64| c.abs()).max().unwrap_or(0) + 1..).find(|v| !consts.contains(v)).unwrap();
    consts.insert(fresh);
    let values: Vec<i64> = consts.into_iter().collect();

    let mut universe: Vec<String> = sig.nominals.iter().cloned().collect();
    universe.push("_a1".into());
    universe.push("_a2".into());
    let n = universe.len();
    let concepts: Vec<&String> = sig.concepts.iter().collect();
    let roles: Vec<&String> = sig.roles.iter().collect();
    let data: Vec<&String> = sig.data_roles.iter().collect();
    let bits = concepts.len() * n + roles.len() * n * n + data.len() * n * values.len();
    assert!(bits <= 20, "brute force over {bits} bits is too slow");

    let mut premises_all: Vec<&DomainFormula> = axioms.iter().collect();
    premises_all.extend(premises);
    for mask in 0u64..(1 << bits) {
        let mut it = DomainInterpretation {
            universe: universe.clone(),
            nominals: sig.nominals.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect(),
            ..Default::default()
        };
        let mut b = 0;
        let mut bit = || {
            let on = mask >> b & 1 == 1;
            b += 1;
            on
        };
        for c in &concepts {
            let ext = (0..n).filter(|_| bit()).collect();
            it.concepts.insert((*c).clone(), ext);
        }
        for r in &roles {
            let mut ext = BTreeSet::new();
            for x in 0..n {
                for y in 0..n {
                    if bit() {
                        ext.insert((x, y));
                    }
                }
            }
            it.roles.insert((*r).clone(), ext);
        }
        for t in &data {
            let mut ext = BTreeSet::new();
            for x in 0..n {
                for &v in &values {
                    if bit() {
                        ext.insert((x, v));
                    }
                }
            }
            it.data_roles.insert((*t).clone(), ext);
        }
        if satisfies_all(&it, premises_all.iter().copied()) && !satisfies_all(&it, [goal]) {
            return Some(it);
        }
    }
    None
}
