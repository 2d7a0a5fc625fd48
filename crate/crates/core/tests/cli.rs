//! The command-line front end on the bundled corpus.

mod common;

use std::path::PathBuf;

use common::corpus;
use twotier::calculus::parse_proofs;
use twotier::cli::{execute, Command, Flags, OutputFormat, Report, EXIT_FAILED, EXIT_INPUT, EXIT_OK};

fn verify(prog: &str, kb: &str, flags: Flags) -> Report {
    execute(&Command::Verify { program: corpus(prog), kb: corpus(kb), flags })
}

fn temp(name: &str, contents: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("twotier-cli-{}-{name}", std::process::id()));
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn add_wheels_closes() {
    let r = verify("addwheels.prog", "car_corrected.kb", Flags::default());
    assert_eq!(r.code, EXIT_OK, "{}", r.stdout);
    assert!(r.stdout.contains("procedure addWheels: closed"));
    assert!(r.stdout.contains("spine: [post-core, post-inv, var]"));
}

#[test]
fn assembly_closes_on_the_corrected_corpus() {
    let r = verify("assembly_corrected.prog", "car_corrected.kb", Flags::default());
    assert_eq!(r.code, EXIT_OK, "{}", r.stdout);
    assert!(r.stdout.contains("procedure assembly: closed"));
}

#[test]
fn verbatim_assembly_names_the_failing_entailment() {
    let r = verify("assembly_paper_verbatim.prog", "car_verbatim.kb", Flags::default());
    assert_eq!(r.code, EXIT_FAILED);
    let line = r.stdout.lines().find(|l| l.contains("dl-entailment failed")).expect("no failing entailment");
    assert!(line.contains("hasValue(doorsVar, 4)") && line.ends_with("|= SmallCar(c)"), "{line}");
    assert!(r.stdout.contains("`SmallCar(c)` fails in the countermodel"));
}

#[test]
fn skip_procedure_verifies() {
    let prog = temp("skip.prog", "var x = 0;\nproc idle(p)\n  requires [ - | x == 2 ]\n  ensures [ - | x == 2 ]\nbegin\n  skip;\nend;\n");
    let r = execute(&Command::Verify { program: prog, kb: corpus("car_corrected.kb"), flags: Flags::default() });
    assert_eq!(r.code, EXIT_OK, "{}", r.stdout);
    assert!(r.stdout.contains("spine: [skip]"));
}

#[test]
fn input_errors_exit_two() {
    let r = verify("no_such_file.prog", "car_corrected.kb", Flags::default());
    assert_eq!(r.code, EXIT_INPUT);
    let bad = temp("bad.prog", "proc p(x) begin x := ; end;");
    let r = execute(&Command::Verify { program: bad, kb: corpus("car_corrected.kb"), flags: Flags::default() });
    assert_eq!(r.code, EXIT_INPUT);
    assert!(r.stderr.contains(":1:"), "{}", r.stderr);
}

#[test]
fn explain_deduces_and_abduces() {
    let explain = |kb: &str, goal: &str| {
        execute(&Command::Explain { kb: corpus(kb), goal: goal.into(), program: None, flags: Flags::default() })
    };
    let r = explain("car_corrected.kb", "HasFourWheels(c)");
    assert_eq!(r.code, EXIT_OK);
    assert!(r.stdout.contains("deduced: hasValue(wheelsVar, 4)"), "{}", r.stdout);

    let r = explain("car_corrected.kb", "Top(c)");
    assert!(r.stdout.contains("deduced: -"), "{}", r.stdout);

    let r = explain("car_verbatim.kb", "HasBody(c)");
    let first = r.stdout.lines().find(|l| l.starts_with("abduced:")).unwrap();
    assert_eq!(first, "abduced: NonZero(bodyVar)");
}

#[test]
fn fuzz_tests_closed_judgements() {
    let r = execute(&Command::Fuzz {
        program: corpus("addwheels.prog"),
        kb: corpus("car_corrected.kb"),
        flags: Flags { seed: 7, ..Flags::default() },
    });
    assert_eq!(r.code, EXIT_OK, "{}", r.stdout);
    assert!(r.stdout.starts_with("seed 7\n"));
    assert!(r.stdout.contains("judgements tested"));
}

#[test]
fn fuzz_without_closed_nodes_says_so() {
    let r = execute(&Command::Fuzz {
        program: corpus("addwheels.prog"),
        kb: corpus("car_weakened.kb"),
        flags: Flags::default(),
    });
    assert!(r.stdout.contains("nothing Closed to test"), "{}", r.stdout);
}

#[test]
fn golden_proofs_check() {
    for (proof, prog) in [("golden/addwheels.proof", "addwheels.prog"), ("golden/assembly.proof", "assembly_corrected.prog")] {
        let r = execute(&Command::Check {
            proof: corpus(proof),
            program: corpus(prog),
            kb: corpus("car_corrected.kb"),
            flags: Flags::default(),
        });
        assert_eq!(r.code, EXIT_OK, "{proof}: {}", r.stdout);
    }
}

#[test]
fn skip_node_with_different_sides_is_rejected() {
    let proof = temp(
        "skip.proof",
        "proof addWheels\nnode skip\n  pre [ - | nrWheels == 4 ]\n  stmt wheels := nrWheels;\n  post [ HasFourWheels(c) | - ]\nend\n",
    );
    let r = execute(&Command::Check {
        proof,
        program: corpus("addwheels.prog"),
        kb: corpus("car_corrected.kb"),
        flags: Flags::default(),
    });
    assert_eq!(r.code, EXIT_FAILED);
    assert!(r.stdout.contains("at root (skip)"), "{}", r.stdout);
}

#[test]
fn corpus_round_trips() {
    for name in common::corpus_sources() {
        let r = execute(&Command::Parse { file: corpus(name) });
        assert_eq!(r.code, EXIT_OK, "{name}: {}", r.stderr);
    }
}

#[test]
fn structured_output_is_stable_and_parses_back() {
    let run = |jobs| {
        verify(
            "assembly_corrected.prog",
            "car_corrected.kb",
            Flags { format: OutputFormat::Structured, jobs, ..Flags::default() },
        )
    };
    let a = run(1);
    assert_eq!(a, run(4));
    let proofs = parse_proofs(&a.stdout).unwrap();
    let names: Vec<&str> = proofs.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, ["addWheels", "assembly"]);
    assert!(proofs.iter().all(|(_, t)| t.is_closed()));
}

#[test]
fn proof_out_feeds_check() {
    let out = std::env::temp_dir().join(format!("twotier-cli-{}-out.proof", std::process::id()));
    let r = verify(
        "assembly_corrected.prog",
        "car_corrected.kb",
        Flags { proof_out: Some(out.clone()), ..Flags::default() },
    );
    assert_eq!(r.code, EXIT_OK);
    let r = execute(&Command::Check {
        proof: out,
        program: corpus("assembly_corrected.prog"),
        kb: corpus("car_corrected.kb"),
        flags: Flags::default(),
    });
    assert_eq!(r.code, EXIT_OK, "{}", r.stdout);
}

#[test]
fn closure_flag_overrides_the_knowledge_base() {
    use twotier::cli::Switch;
    // without closure the kernel of HasFourWheels(c) is empty, so post-core
    // has nothing to add and the proof goes through the lifted state instead
    let r = verify("addwheels.prog", "car_corrected.kb", Flags { closure: Some(Switch::Off), ..Flags::default() });
    assert_eq!(r.code, EXIT_OK, "{}", r.stdout);
    assert!(!r.stdout.contains("post-core"), "{}", r.stdout);
}
