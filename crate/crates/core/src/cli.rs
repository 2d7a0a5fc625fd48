//! Command-line front end.
//!
//! Exit codes: 0 success, 1 open proof or counterexample, 2 parse or load
//! error, 3 internal error or exhausted budget.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::calculus::{
    auto_verify, check_proof, parse_proofs, validate_judgement_empirically, write_proof, Goal, Judgement,
    ObligationStatus, ProofNode, Rule, StrategyConfig, Theory, ValidationConfig,
};
use crate::dl::{format_set, KnowledgeBase, ReasonerConfig};
use crate::kernel::{alpha_abduce, alpha_deduce, AbductionResult};
use crate::lang::{parse_domain_set, parse_kb, parse_program, pretty_kb, pretty_program, InterpContext, Program};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "twotier", version, about = "Two-tier Hoare-logic verifier")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Verify every procedure contract of a program.
    Verify {
        program: PathBuf,
        kb: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Kernel atoms deduced from, and explanations abduced for, a goal.
    Explain {
        kb: PathBuf,
        #[arg(long)]
        goal: String,
        /// Program whose variables and constants extend the candidate pool.
        #[arg(long)]
        program: Option<PathBuf>,
        #[command(flatten)]
        flags: Flags,
    },
    /// Verify, then test every closed judgement against the interpreter.
    Fuzz {
        program: PathBuf,
        kb: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Replay stored proofs.
    Check {
        proof: PathBuf,
        program: PathBuf,
        kb: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Parse and pretty-print a program or knowledge base (`.kb`), checking
    /// that the output parses back to the same thing.
    Parse { file: PathBuf },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Structured,
}

#[derive(Args, Debug, Clone)]
pub struct Flags {
    /// Stub closure; overrides the knowledge base's own setting.
    #[arg(long, value_enum)]
    pub closure: Option<Switch>,
    #[arg(long, default_value_t = 8)]
    pub unroll: usize,
    /// Variable values for fuzzing, e.g. "0,2,4". Defaults to the occurring
    /// constants and 0.
    #[arg(long, value_delimiter = ',')]
    pub domain: Option<Vec<i64>>,
    /// Fresh values per state implication check; default one per variable.
    #[arg(long)]
    pub fresh: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    pub fuel: usize,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Initial states tried per judgement; exhaustive below this.
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
    #[arg(long)]
    pub proof_out: Option<PathBuf>,
}

impl Default for Flags {
    fn default() -> Self {
        Flags {
            closure: None,
            unroll: 8,
            domain: None,
            fresh: None,
            fuel: 1000,
            jobs: 1,
            seed: 0,
            samples: 100_000,
            format: OutputFormat::Text,
            proof_out: None,
        }
    }
}

impl Flags {
    fn strategy(&self) -> StrategyConfig {
        StrategyConfig { unroll_depth: self.unroll, ..StrategyConfig::default() }
    }
}

/// What a command printed and how it ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Report {
    fn input_error(msg: impl Into<String>) -> Self {
        Report { code: EXIT_INPUT, stdout: String::new(), stderr: msg.into() + "\n" }
    }
}

pub fn run() -> i32 {
    let cli = Cli::parse();
    let r = execute(&cli.command);
    print!("{}", r.stdout);
    eprint!("{}", r.stderr);
    r.code
}

pub fn execute(cmd: &Command) -> Report {
    match cmd {
        Command::Verify { program, kb, flags } => cmd_verify(program, kb, flags),
        Command::Explain { kb, goal, program, flags } => cmd_explain(kb, goal, program.as_deref(), flags),
        Command::Fuzz { program, kb, flags } => cmd_fuzz(program, kb, flags),
        Command::Check { proof, program, kb, flags } => cmd_check(proof, program, kb, flags),
        Command::Parse { file } => cmd_parse(file),
    }
}

fn read(path: &Path) -> Result<String, Report> {
    std::fs::read_to_string(path).map_err(|e| Report::input_error(format!("{}: {e}", path.display())))
}

fn load_program(path: &Path) -> Result<Program, Report> {
    let src = read(path)?;
    let p = parse_program(&src).map_err(|e| Report::input_error(format!("{}:{e}", path.display())))?;
    p.validate().map_err(|e| Report::input_error(format!("{}: {e}", path.display())))?;
    Ok(p)
}

fn load_kb(path: &Path, flags: &Flags) -> Result<KnowledgeBase, Report> {
    let src = read(path)?;
    let kb = parse_kb(&src).map_err(|e| Report::input_error(format!("{}:{e}", path.display())))?;
    Ok(match flags.closure {
        Some(s) => kb.with_closure(s == Switch::On),
        None => kb,
    })
}

fn theory(kb: &KnowledgeBase, program: &Program, flags: &Flags) -> Theory {
    let mut t = Theory::new(kb, program, ReasonerConfig::default());
    t.fresh = flags.fresh;
    t
}

fn pool(jobs: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().expect("thread pool")
}

/// Proofs of every contract, in declaration order.
fn verify_all(theory: &Theory, program: &Program, flags: &Flags) -> Vec<ProofNode> {
    let config = flags.strategy();
    pool(flags.jobs).install(|| {
        program.procedures.par_iter().map(|p| auto_verify(theory, program, p, &config)).collect()
    })
}

fn has_unknown(tree: &ProofNode) -> bool {
    let mut unknown = false;
    let mut decisive = false;
    tree.walk(&mut |n| {
        decisive |= n.rule == Rule::Open;
        for o in &n.obligations {
            unknown |= o.status == ObligationStatus::Unknown;
            decisive |= o.status == ObligationStatus::Failed;
        }
    });
    unknown && !decisive
}

fn verdict(tree: &ProofNode) -> &'static str {
    if tree.is_closed() {
        "closed"
    } else {
        "open"
    }
}

fn spine(tree: &ProofNode) -> String {
    tree.spine().iter().map(|r| r.name()).collect::<Vec<_>>().join(", ")
}

/// Text or structured rendering of verification results.
fn render(program: &Program, trees: &[ProofNode], format: OutputFormat) -> String {
    let mut out = String::new();
    for (p, t) in program.procedures.iter().zip(trees) {
        match format {
            OutputFormat::Text => {
                let _ = writeln!(out, "procedure {}: {}", p.name, verdict(t));
                let _ = writeln!(out, "  spine: [{}]", spine(t));
                for issue in t.failures() {
                    let _ = writeln!(out, "  {}", issue.to_string().replace('\n', "\n  "));
                }
            }
            OutputFormat::Structured => {
                let _ = writeln!(out, "// {}: {}", p.name, verdict(t));
                out.push_str(&write_proof(&p.name, t));
            }
        }
    }
    out
}

fn write_proofs(path: &Path, program: &Program, trees: &[ProofNode]) -> Result<(), Report> {
    let text: String = program.procedures.iter().zip(trees).map(|(p, t)| write_proof(&p.name, t)).collect();
    std::fs::write(path, text).map_err(|e| Report { code: EXIT_INTERNAL, stdout: String::new(), stderr: format!("{}: {e}\n", path.display()) })
}

fn exit_code(trees: &[ProofNode]) -> i32 {
    if trees.iter().all(ProofNode::is_closed) {
        EXIT_OK
    } else if trees.iter().filter(|t| !t.is_closed()).all(has_unknown) {
        EXIT_INTERNAL
    } else {
        EXIT_FAILED
    }
}

pub fn cmd_verify(program: &Path, kb: &Path, flags: &Flags) -> Report {
    let (program, kb) = match (load_program(program), load_kb(kb, flags)) {
        (Ok(p), Ok(k)) => (p, k),
        (Err(e), _) | (_, Err(e)) => return e,
    };
    let theory = theory(&kb, &program, flags);
    let trees = verify_all(&theory, &program, flags);
    if let Some(path) = &flags.proof_out {
        if let Err(e) = write_proofs(path, &program, &trees) {
            return e;
        }
    }
    Report { code: exit_code(&trees), stdout: render(&program, &trees, flags.format), stderr: String::new() }
}

pub fn cmd_explain(kb: &Path, goal: &str, program: Option<&Path>, flags: &Flags) -> Report {
    let kb = match load_kb(kb, flags) {
        Ok(k) => k,
        Err(e) => return e,
    };
    let program = match program.map(load_program).transpose() {
        Ok(p) => p.unwrap_or_default(),
        Err(e) => return e,
    };
    let delta = match parse_domain_set(goal) {
        Ok(d) => d,
        Err(e) => return Report::input_error(format!("goal:{e}")),
    };
    let theory = theory(&kb, &program, flags);
    let mut out = String::new();
    let _ = writeln!(out, "goal: {}", format_set(&delta));
    let deduced = match alpha_deduce(&delta, &theory.reasoner, &theory.pool) {
        Ok(d) => d,
        Err(e) => return Report { code: EXIT_INTERNAL, stdout: out, stderr: format!("{e}\n") },
    };
    let _ = writeln!(out, "deduced: {}", format_set(&deduced.atoms));
    let _ = writeln!(out, "  all entailed: {}", format_set(&deduced.entailed));
    let _ = writeln!(out, "  entails goal back: {}", if deduced.covers { "yes" } else { "no" });
    match alpha_abduce(&delta, &theory.reasoner, &theory.pool, StrategyConfig::default().abduce_max) {
        Ok(AbductionResult::Explanations(es)) => {
            for e in es {
                let _ = writeln!(out, "abduced: {}", format_set(&e));
                for (name, g) in [
                    ("explains", Goal::Entails(e.clone(), delta.clone())),
                    ("implied", Goal::Entails(delta.clone(), e.clone())),
                ] {
                    let o = theory.discharge(&g);
                    let _ = writeln!(out, "  {name}: {} {}", o.payload, o.status.name());
                }
            }
        }
        Ok(AbductionResult::NoExplanation) => {
            let _ = writeln!(out, "abduced: none");
        }
        Err(e) => return Report { code: EXIT_INTERNAL, stdout: out, stderr: format!("{e}\n") },
    }
    Report { code: EXIT_OK, stdout: out, stderr: String::new() }
}

/// Occurring constants and 0.
pub fn default_domain(program: &Program, kb: &KnowledgeBase) -> Vec<i64> {
    let mut d: BTreeSet<i64> = program.constants();
    for f in &kb.axioms {
        f.constants(&mut d);
    }
    d.insert(0);
    d.into_iter().collect()
}

pub fn cmd_fuzz(program: &Path, kb: &Path, flags: &Flags) -> Report {
    let (program, kb) = match (load_program(program), load_kb(kb, flags)) {
        (Ok(p), Ok(k)) => (p, k),
        (Err(e), _) | (_, Err(e)) => return e,
    };
    let theory = theory(&kb, &program, flags);
    let trees = verify_all(&theory, &program, flags);
    let domain = flags.domain.clone().unwrap_or_else(|| default_domain(&program, &kb));
    let mut out = String::new();
    let _ = writeln!(out, "seed {}", flags.seed);
    let _ = writeln!(out, "domain {domain:?}");
    let mut code = EXIT_OK;
    let mut tested = 0;
    for (proc, tree) in program.procedures.iter().zip(&trees) {
        let _ = writeln!(out, "procedure {}: {}", proc.name, verdict(tree));
        let vars = program.state_vars(proc);
        let mut ctx = InterpContext::new(&program, &theory, vars.clone(), domain.clone());
        ctx.fuel = flags.fuel;
        let config = ValidationConfig { vars, domain: domain.clone(), samples: flags.samples, seed: flags.seed };
        // every closed subtree concludes a judgement that must hold on its own
        let mut seen = BTreeSet::new();
        let mut closed: Vec<&Judgement> = Vec::new();
        tree.walk(&mut |n| {
            if n.is_closed() && seen.insert(n.judgement.to_string()) {
                closed.push(&n.judgement);
            }
        });
        for j in closed {
            tested += 1;
            match validate_judgement_empirically(&theory, &ctx, j, &config) {
                Ok(r) => {
                    for c in &r.counterexamples {
                        let _ = writeln!(out, "  counterexample for {j}\n    {c}");
                        code = EXIT_FAILED;
                    }
                    if !r.fuel_exhausted.is_empty() {
                        let _ = writeln!(out, "  {} runs out of fuel for {j}", r.fuel_exhausted.len());
                    }
                }
                Err(e) => {
                    let _ = writeln!(out, "  error for {j}: {e}");
                    if code == EXIT_OK {
                        code = EXIT_INTERNAL;
                    }
                }
            }
        }
    }
    if tested == 0 {
        let _ = writeln!(out, "nothing Closed to test");
    } else {
        let _ = writeln!(out, "{tested} judgements tested");
    }
    Report { code, stdout: out, stderr: String::new() }
}

pub fn cmd_check(proof: &Path, program: &Path, kb: &Path, flags: &Flags) -> Report {
    let (program, kb) = match (load_program(program), load_kb(kb, flags)) {
        (Ok(p), Ok(k)) => (p, k),
        (Err(e), _) | (_, Err(e)) => return e,
    };
    let src = match read(proof) {
        Ok(s) => s,
        Err(e) => return e,
    };
    let proofs = match parse_proofs(&src) {
        Ok(p) => p,
        Err(e) => return Report::input_error(format!("{}:{e}", proof.display())),
    };
    let theory = theory(&kb, &program, flags);
    let mut out = String::new();
    let mut code = EXIT_OK;
    for (name, tree) in &proofs {
        let Some(proc) = program.procedure(name) else {
            return Report::input_error(format!("{}: no procedure `{name}`", proof.display()));
        };
        let report = check_proof(&theory, &program, proc, tree);
        if report.is_closed() {
            let _ = writeln!(out, "proof {name}: accepted");
        } else {
            code = EXIT_FAILED;
            let _ = writeln!(out, "proof {name}: rejected");
            for i in report.issues() {
                let _ = writeln!(out, "  {}", i.to_string().replace('\n', "\n  "));
            }
        }
    }
    Report { code, stdout: out, stderr: String::new() }
}

pub fn cmd_parse(file: &Path) -> Report {
    let src = match read(file) {
        Ok(s) => s,
        Err(e) => return e,
    };
    let is_kb = file.extension().is_some_and(|e| e == "kb");
    let result = if is_kb {
        round_trip(&src, parse_kb, pretty_kb)
    } else {
        round_trip(&src, parse_program, pretty_program)
    };
    match result {
        Ok(text) => Report { code: EXIT_OK, stdout: text, stderr: String::new() },
        Err(RoundTrip::Parse(e)) => Report::input_error(format!("{}:{e}", file.display())),
        Err(RoundTrip::Mismatch(text)) => Report {
            code: EXIT_FAILED,
            stdout: text,
            stderr: format!("{}: pretty-printed output does not parse back to the same input\n", file.display()),
        },
    }
}

enum RoundTrip {
    Parse(crate::lang::ParseError),
    Mismatch(String),
}

fn round_trip<T: PartialEq>(
    src: &str,
    parse: fn(&str) -> Result<T, crate::lang::ParseError>,
    pretty: fn(&T) -> String,
) -> Result<String, RoundTrip> {
    let first = parse(src).map_err(RoundTrip::Parse)?;
    let text = pretty(&first);
    match parse(&text) {
        Ok(second) if second == first && pretty(&second) == text => Ok(text),
        _ => Err(RoundTrip::Mismatch(text)),
    }
}
