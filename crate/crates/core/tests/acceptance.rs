//! Acceptance run: one PASS/FAIL line per criterion, with the time limit
//! each is held to. Exits nonzero if any criterion fails.

mod common;

use std::collections::{BTreeSet, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use twotier::calculus::{
    auto_verify, check_proof, expand_lift_var, expand_total, lift_var_judgement, parse_proof, parse_proofs, total_judgement,
    validate_judgement_empirically, write_proof, ProofNode, Rule, RuleArgs, StrategyConfig, Theory, TwoTierAssertion,
    ValidationConfig,
};
use twotier::cli::{execute, Command, Flags, EXIT_FAILED};
use twotier::dl::{satisfies, satisfies_all, DomainFormula, DomainSet, ReasonerConfig, Verdict};
use twotier::kernel::alpha_deduce;
use twotier::lang::{parse_kb, parse_program, pretty_kb, pretty_program, InterpContext, Statement};
use twotier::lifting::{check_compatibility, enumerate_states};
use twotier::state::{ProgramState, StateFormula};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn criterion(n: usize, name: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
        Err(format!("panicked: {}", msg.unwrap_or_default()))
    });
    let took = start.elapsed();
    let (ok, detail) = match result {
        Ok(d) if took <= limit => (true, d),
        Ok(d) => (false, format!("{d}; over the time limit")),
        Err(e) => (false, e),
    };
    println!(
        "[{}] {n}. {name} ({:.2}s, limit {}s): {detail}",
        if ok { "PASS" } else { "FAIL" },
        took.as_secs_f64(),
        limit.as_secs()
    );
    ok
}

fn car_theory(kb_name: &str, prog: &str) -> (twotier::lang::Program, Theory) {
    let p = program(prog);
    let t = theory(&kb(kb_name), &p);
    (p, t)
}

fn rules_used(tree: &ProofNode) -> BTreeSet<Rule> {
    let mut out = BTreeSet::new();
    tree.walk(&mut |n| {
        out.insert(n.rule);
    });
    out
}

fn add_wheels() -> Outcome {
    let (p, t) = car_theory("car_corrected.kb", "addwheels.prog");
    let proc = p.procedure("addWheels").ok_or("no addWheels")?;
    let tree = auto_verify(&t, &p, proc, &StrategyConfig::default());
    ensure(tree.is_closed(), || format!("open: {:?}", tree.failures()))?;
    let spine = tree.spine();
    ensure(spine == [Rule::PostCore, Rule::PostInv, Rule::Var], || format!("spine {spine:?}"))?;
    let root = tree.judgement.to_string();
    ensure(root == "[ - | nrWheels == 4 ] wheels := nrWheels; [ HasFourWheels(c) | - ]", || root.clone())?;
    let wanted = "hasValue(wheelsVar, 4) |= HasFourWheels(c), hasValue(wheelsVar, 4)";
    let mut found = false;
    tree.walk(&mut |n| found |= n.obligations.iter().any(|o| o.payload == wanted && o.is_proved()));
    ensure(found, || format!("no proved obligation `{wanted}`"))?;
    Ok(format!("spine [post-core, post-inv, var], `{wanted}` proved"))
}

fn assembly() -> Outcome {
    let (p, t) = car_theory("car_corrected.kb", "assembly_corrected.prog");
    let mut used = BTreeSet::new();
    for proc in &p.procedures {
        let tree = auto_verify(&t, &p, proc, &StrategyConfig::default());
        ensure(tree.is_closed(), || format!("{} open: {:?}", proc.name, tree.failures()))?;
        used.extend(rules_used(&tree));
    }
    let needed =
        [Rule::Seq, Rule::Contract, Rule::Cons, Rule::Var, Rule::PreCore, Rule::PreInv, Rule::PostCore, Rule::PostInv];
    let missing: Vec<&Rule> = needed.iter().filter(|r| !used.contains(r)).collect();
    ensure(missing.is_empty(), || format!("rules not used: {missing:?}"))?;

    let r = execute(&Command::Verify {
        program: corpus("assembly_paper_verbatim.prog"),
        kb: corpus("car_verbatim.kb"),
        flags: Flags::default(),
    });
    ensure(r.code == EXIT_FAILED, || format!("verbatim corpus exits {}", r.code))?;
    let failing = r
        .stdout
        .lines()
        .find(|l| l.contains("dl-entailment failed") && l.ends_with("|= SmallCar(c)"))
        .ok_or("verbatim corpus does not name the failing entailment")?;
    Ok(format!("corrected corpus closed with all 8 rules; verbatim exits 1 at `{}`", failing.trim()))
}

fn dl_regression() -> Outcome {
    let kb = kb("car_corrected.kb");
    let p = program("assembly_corrected.prog");
    let hv = |s: &str, n| DomainFormula::has_value(s, n);
    let inst = |c: &str| DomainFormula::instance(twotier::dl::Concept::atomic(c), "c");
    let cases: Vec<(&str, Vec<DomainFormula>, Vec<DomainFormula>, bool)> = vec![
        ("HasFourWheels", vec![inst("HasFourWheels")], vec![hv("wheelsVar", 4)], true),
        (
            "SmallCar",
            vec![inst("SmallCar")],
            vec![hv("wheelsVar", 4), hv("doorsVar", 2), DomainFormula::non_zero("bodyVar")],
            true,
        ),
        ("wheels value", vec![hv("wheelsVar", 4)], vec![inst("HasFourWheels")], false),
    ];
    let mut notes = Vec::new();
    for closure in [true, false] {
        let t = Theory::new(&kb.with_closure(closure), &p, ReasonerConfig::default());
        for (name, premises, goal, needs_closure) in &cases {
            let v = t.reasoner.entails(premises.iter(), goal.iter()).map_err(|e| e.to_string())?;
            let expect_entailed = closure || !needs_closure;
            match v {
                Verdict::Entailed { .. } if expect_entailed => {}
                Verdict::NotEntailed(cm) if !expect_entailed => {
                    let axioms = t.reasoner.kb().effective_axioms();
                    ensure(satisfies_all(&cm.model, axioms.iter().chain(premises)), || {
                        format!("{name}: countermodel violates K or the premises")
                    })?;
                    ensure(!satisfies(&cm.model, &cm.violated), || format!("{name}: countermodel satisfies the goal"))?;
                }
                other => {
                    return Err(format!("{name} with closure {}: {}", if closure { "on" } else { "off" }, verdict_name(&other)))
                }
            }
        }
        notes.push(if closure { "closure on: 3/3 entailed" } else { "closure off: HasFourWheels and SmallCar countermodels verified, wheels value still entailed" });
    }
    Ok(notes.join("; "))
}

fn verdict_name(v: &Verdict) -> &'static str {
    match v {
        Verdict::Entailed { .. } => "Entailed",
        Verdict::NotEntailed(_) => "NotEntailed",
        Verdict::Unknown(_) => "Unknown",
    }
}

fn compatibility() -> Outcome {
    let t = theory(&kb("car_corrected.kb"), &car_program());
    let pool = formula_pool(&car_vars());
    ensure(pool.len() >= 50, || format!("pool of {}", pool.len()))?;
    let r = check_compatibility(&t.lifting, &t.reasoner, &car_vars(), &VALUES, &pool).map_err(|e| e.to_string())?;
    ensure(r.states_checked == 81, || format!("{} states", r.states_checked))?;
    ensure(r.violations.is_empty(), || {
        let v = &r.violations[0];
        format!("{} violations, first: {} at {} misses {}", r.violations.len(), v.formula, v.state, v.missing)
    })?;
    Ok(format!(
        "81 states x {} formulas, 0 violations ({} states unliftable: bodyId == 0 contradicts HasChassis(c))",
        r.formulas_checked,
        r.unliftable_states.len()
    ))
}

fn lifting_lemmas() -> Outcome {
    let t = theory(&kb("car_corrected.kb"), &car_program());
    let all = enumerate_states(&car_vars(), &VALUES);
    let liftable: Vec<bool> = all.iter().map(|s| t.is_liftable_state(s).unwrap()).collect();
    let sat = |a: &TwoTierAssertion, states: &mut dyn Iterator<Item = &ProgramState>| -> Vec<bool> {
        states.map(|s| t.assertion_holds(s, a).unwrap()).collect()
    };
    let mut r = ChaCha8Rng::seed_from_u64(11);
    let mut violations = [0usize; 3];
    let instances = 120;
    for _ in 0..instances {
        let mut delta = car_facts(&mut r, 2);
        delta.extend(kernel_set(&mut r, &t, 1));
        let kernel = kernel_set(&mut r, &t, 2);
        let phi = mixed_formula(&mut r, &car_vars());

        // 1: adding a generated kernel only shrinks the satisfaction set
        let alpha = alpha_deduce(&delta, &t.reasoner, &t.pool).map_err(|e| e.to_string())?.atoms;
        let base = sat(&assertion(delta.clone(), phi.clone()), &mut all.iter());
        let widened: DomainSet = delta.iter().chain(&alpha).cloned().collect();
        let narrowed = sat(&assertion(widened, phi.clone()), &mut all.iter());
        if narrowed.iter().zip(&base).any(|(n, b)| *n && !*b) {
            violations[0] += 1;
        }

        // 2: the lifted state tier adds nothing
        let lifted: DomainSet = delta.iter().cloned().chain(t.lift(&phi)).collect();
        if sat(&assertion(lifted, phi.clone()), &mut all.iter()) != base {
            violations[1] += 1;
        }

        // 3: the recovered state tier adds nothing, on states with a lifted model
        let with_kernel: DomainSet = delta.iter().chain(&kernel).cloned().collect();
        let recovered = t.lifting.delift(&kernel).map_err(|e| e.to_string())?;
        let live = || all.iter().zip(&liftable).filter(|(_, l)| **l).map(|(s, _)| s);
        let plain = sat(&assertion(with_kernel.clone(), phi.clone()), &mut live());
        let strengthened = sat(&assertion(with_kernel, StateFormula::and(phi, recovered)), &mut live());
        if plain != strengthened {
            violations[2] += 1;
        }
    }
    ensure(violations == [0, 0, 0], || format!("violations per property {violations:?}"))?;
    let live = liftable.iter().filter(|l| **l).count();
    Ok(format!(
        "{instances} instances, 0 violations (properties 1-2 over all 81 states, 3 over the {live} liftable ones)"
    ))
}

fn soundness() -> Outcome {
    const PROGRAMS: usize = 500;
    let mut r = ChaCha8Rng::seed_from_u64(2024);
    let sources: Vec<String> = (0..PROGRAMS).map(|_| generated_program(&mut r)).collect();
    let first = parse_program(&sources[0]).map_err(|e| e.to_string())?;
    let shared = theory(&kb("car_corrected.kb"), &first);
    let mut seen = HashSet::new();
    let (mut closed_roots, mut validated, mut runs) = (0, 0, 0);
    for src in &sources {
        let p = parse_program(src).map_err(|e| format!("{e}\n{src}"))?;
        // generated programs share variables and constants, hence the theory
        let own = theory(&kb("car_corrected.kb"), &p);
        ensure(own.lifting == shared.lifting && own.pool == shared.pool, || "theory differs".into())?;
        for q in &p.procedures {
            let vars = p.state_vars(q);
            let ctx = InterpContext::new(&p, &shared, vars.clone(), VALUES.to_vec());
            let config = ValidationConfig { vars, domain: VALUES.to_vec(), samples: usize::MAX, seed: 0 };
            let tree = auto_verify(&shared, &p, q, &StrategyConfig::default());
            if q.name == "gen" && tree.is_closed() {
                closed_roots += 1;
            }
            let mut closed = Vec::new();
            tree.walk(&mut |n| {
                if n.is_closed() && seen.insert(n.judgement.to_string()) {
                    closed.push(n.judgement.clone());
                }
            });
            for j in closed {
                let rep = validate_judgement_empirically(&shared, &ctx, &j, &config).map_err(|e| format!("{j}: {e}"))?;
                ensure(rep.is_sound(), || format!("{j}: {}\n{src}", rep.counterexamples[0]))?;
                ensure(rep.fuel_exhausted.is_empty(), || format!("{j}: out of fuel"))?;
                validated += 1;
                runs += rep.runs;
            }
        }
    }
    Ok(format!(
        "{PROGRAMS} programs (seed 2024), {closed_roots} closed contracts, {validated} distinct closed judgements, {runs} runs, 0 counterexamples"
    ))
}

fn derived_rules() -> Outcome {
    let p = car_program();
    let t = theory(&kb("car_corrected.kb"), &p);
    let mut r = ChaCha8Rng::seed_from_u64(5);
    let cases = 40;
    let mut closed = [0usize; 2];
    for _ in 0..cases {
        let v = *["wheels", "doors", "bodyId"].choose(&mut r).unwrap();
        let e = *["0", "2", "4", "nrWheels"].choose(&mut r).unwrap();
        let stmt: Statement = twotier::lang::parse_statements(&format!("{v} := {e};")).unwrap();
        let post = assertion(car_facts(&mut r, 2), liftable_formula(&mut r, &car_vars(), 2));
        let alpha: DomainSet = if r.random_bool(0.7) {
            alpha_deduce(&post.domain, &t.reasoner, &t.pool).map_err(|e| e.to_string())?.atoms
        } else {
            t.pool.atoms.choose_multiple(&mut r, 1).cloned().collect()
        };

        let j = lift_var_judgement(&t, &stmt, &post).ok_or("lift-var")?;
        let derived = ProofNode::build(&t, &p, Rule::LiftVar, j.clone(), RuleArgs::default(), vec![]);
        compare("lift-var", &derived, &expand_lift_var(&t, &p, &j))?;
        closed[0] += derived.is_closed() as usize;

        let j = total_judgement(&t, &stmt, &post, &alpha).ok_or("total")?;
        let derived = ProofNode::build(&t, &p, Rule::Total, j.clone(), RuleArgs::kernel(alpha.clone()), vec![]);
        compare("total", &derived, &expand_total(&t, &p, &j, &alpha))?;
        closed[1] += derived.is_closed() as usize;
    }
    Ok(format!(
        "{cases} judgements each; lift-var closed {}/{cases}, total closed {}/{cases}, all matching their expansions",
        closed[0], closed[1]
    ))
}

fn compare(rule: &str, derived: &ProofNode, expansion: &ProofNode) -> Result<(), String> {
    ensure(derived.is_closed() == expansion.is_closed(), || {
        format!("{rule} closed={} but expansion closed={} for {}", derived.is_closed(), expansion.is_closed(), derived.judgement)
    })?;
    let mut seen = Vec::new();
    expansion.walk(&mut |n| seen.extend(n.obligations.iter().map(|o| (o.payload.clone(), o.status))));
    for o in &derived.obligations {
        ensure(seen.contains(&(o.payload.clone(), o.status)), || {
            format!("{rule}: `{}` {:?} has no counterpart in the expansion", o.payload, o.status)
        })?;
    }
    Ok(())
}

fn tooling() -> Outcome {
    for name in corpus_sources() {
        let src = read(name);
        let same = if name.ends_with(".kb") {
            let k = parse_kb(&src).map_err(|e| format!("{name}: {e}"))?;
            parse_kb(&pretty_kb(&k)).map_err(|e| format!("{name}: {e}"))? == k
        } else {
            let q = parse_program(&src).map_err(|e| format!("{name}: {e}"))?;
            parse_program(&pretty_program(&q)).map_err(|e| format!("{name}: {e}"))? == q
        };
        ensure(same, || format!("{name} does not round trip"))?;
    }

    // the checker accepts every emitted tree: closed trees check closed, open
    // ones report exactly the strategy's own open spots
    let mut emitted = 0;
    let mut r = ChaCha8Rng::seed_from_u64(8);
    let mut programs: Vec<(String, String)> = ["addwheels.prog", "assembly_corrected.prog", "assembly_paper_verbatim.prog"]
        .iter()
        .map(|n| (read(n), if n.contains("verbatim") { "car_verbatim.kb" } else { "car_corrected.kb" }.to_string()))
        .collect();
    programs.extend((0..20).map(|_| (generated_program(&mut r), "car_corrected.kb".to_string())));
    for (src, kb_name) in &programs {
        let p = parse_program(src).unwrap();
        let t = theory(&kb(kb_name), &p);
        for proc in &p.procedures {
            let tree = auto_verify(&t, &p, proc, &StrategyConfig::default());
            let (_, back) = parse_proof(&write_proof(&proc.name, &tree)).map_err(|e| e.to_string())?;
            let report = check_proof(&t, &p, proc, &back);
            let got: BTreeSet<String> = report.issues().iter().map(|i| i.path.to_string()).collect();
            let want: BTreeSet<String> = tree.failures().iter().map(|i| i.path.to_string()).collect();
            ensure(report.is_closed() == tree.is_closed() && got == want, || {
                format!("{}: checker reports {:?}, strategy {:?}", proc.name, report.issues(), tree.failures())
            })?;
            emitted += 1;
        }
    }

    let manifest = read("golden/mutations/manifest.txt");
    let mut rejected = 0;
    for line in manifest.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
        let mut parts = line.splitn(4, ' ');
        let (Some(file), Some(prog), Some(path), Some(fragment)) = (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(format!("bad manifest line `{line}`"));
        };
        let (p, t) = car_theory("car_corrected.kb", prog);
        let proofs = parse_proofs(&read(&format!("golden/mutations/{file}"))).map_err(|e| format!("{file}: {e}"))?;
        let mut issues = Vec::new();
        for (name, tree) in &proofs {
            let proc = p.procedure(name).ok_or_else(|| format!("{file}: no procedure {name}"))?;
            issues.extend(check_proof(&t, &p, proc, tree).issues().to_vec());
        }
        let first = issues.first().ok_or_else(|| format!("{file} accepted"))?;
        ensure(first.path.to_string() == path && first.message.contains(fragment), || {
            format!("{file}: expected `{fragment}` at {path}, got {first}")
        })?;
        rejected += 1;
    }
    ensure(rejected == 10, || format!("{rejected} mutations in the manifest"))?;
    Ok(format!(
        "{} corpus files round trip; {emitted} emitted trees accepted; 10/10 mutations rejected at the expected node",
        corpus_sources().len()
    ))
}

fn main() {
    let secs = Duration::from_secs;
    let results = [
        criterion(1, "addWheels reproduction", secs(1), add_wheels),
        criterion(2, "assembly reproduction", secs(10), assembly),
        criterion(3, "DL regression", secs(5), dl_regression),
        criterion(4, "compatibility", secs(30), compatibility),
        criterion(5, "lifting lemmas", secs(60), lifting_lemmas),
        criterion(6, "empirical soundness", secs(300), soundness),
        criterion(7, "lift-var and total against their expansions", secs(60), derived_rules),
        criterion(8, "tooling", secs(60), tooling),
    ];
    let passed = results.iter().filter(|r| **r).count();
    println!("{passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
