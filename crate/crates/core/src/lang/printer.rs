use std::fmt::{self, Write};

use super::{Program, Statement};
use crate::dl::KnowledgeBase;

impl fmt::Display for Statement {
    /// Single-line form, as used in proof files.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statement::Assign(v, e) => write!(f, "{v} := {e};"),
            Statement::Call(p, e) => write!(f, "{p}({e});"),
            Statement::Skip => write!(f, "skip;"),
            Statement::Seq(a, b) => write!(f, "{a} {b}"),
            Statement::If(e, a, b) => write!(f, "if ({e}) then {a} else {b} fi"),
            Statement::While(e, b) => write!(f, "while ({e}) do {b} od"),
        }
    }
}

fn block(out: &mut String, s: &Statement, depth: usize) {
    let pad = "  ".repeat(depth);
    for st in s.flatten() {
        match st {
            Statement::If(e, a, b) => {
                let _ = writeln!(out, "{pad}if ({e}) then");
                block(out, a, depth + 1);
                let _ = writeln!(out, "{pad}else");
                block(out, b, depth + 1);
                let _ = writeln!(out, "{pad}fi");
            }
            Statement::While(e, b) => {
                let _ = writeln!(out, "{pad}while ({e}) do");
                block(out, b, depth + 1);
                let _ = writeln!(out, "{pad}od");
            }
            other => {
                let _ = writeln!(out, "{pad}{other}");
            }
        }
    }
}

/// Multi-line rendering that parses back to the same program.
pub fn pretty_program(p: &Program) -> String {
    let mut out = String::new();
    for (v, n) in &p.globals {
        let _ = writeln!(out, "var {v} = {n};");
    }
    for proc in &p.procedures {
        out.push('\n');
        let _ = writeln!(out, "proc {}({})", proc.name, proc.param);
        let _ = writeln!(out, "  requires {}", proc.contract.pre);
        let _ = writeln!(out, "  ensures {}", proc.contract.post);
        let _ = writeln!(out, "begin");
        block(&mut out, &proc.body, 1);
        let _ = writeln!(out, "end;");
    }
    out
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty_program(self))
    }
}

/// Knowledge-base rendering that parses back to the same knowledge base.
/// Equivalences come out as their two subsumptions.
pub fn pretty_kb(kb: &KnowledgeBase) -> String {
    let mut out = String::new();
    let sig = &kb.signature;
    for (kw, names) in [
        ("concept", &sig.concepts),
        ("role", &sig.roles),
        ("data-role", &sig.data_roles),
        ("individual", &sig.nominals),
    ] {
        if !names.is_empty() {
            let _ = writeln!(out, "{kw} {};", names.iter().cloned().collect::<Vec<_>>().join(", "));
        }
    }
    for f in &kb.axioms {
        let _ = writeln!(out, "{f};");
    }
    for s in &kb.stubs {
        let _ = writeln!(out, "stub {}({}, {}) for var {};", s.role, s.owner, s.individual, s.var);
    }
    let _ = writeln!(out, "closure {};", if kb.closure { "on" } else { "off" });
    out
}
