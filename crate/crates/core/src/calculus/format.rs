//! Line-based exchange format for proof trees.
//!
//! ```text
//! proof addWheels
//! node post-core
//!   pre [ - | nrWheels == 4 ]
//!   stmt wheels := nrWheels;
//!   post [ HasFourWheels(c) | - ]
//!   arg kernel hasValue(wheelsVar, 4)
//!   obligation dl-entailment proved HasFourWheels(c) |= hasValue(wheelsVar, 4)
//!   node post-inv
//!     ...
//!   end
//! end
//! ```
//!
//! A node lists its conclusion, its arguments, its obligations and then its
//! premises as nested nodes. Indentation is cosmetic. Arguments are
//! `kernel <domain set>`, `inner-pre <assertion>`, `inner-post <assertion>`,
//! `mid <assertion>`, `split <n>`, `support <state formula>` and
//! `reason <text>`.

use std::fmt::Write;

use super::assertion::{Obligation, ObligationKind, ObligationStatus};
use super::proof::ProofNode;
use super::rules::{Judgement, Rule, RuleArgs};
use crate::dl::format_set;
use crate::lang::{parse_assertion, parse_domain_set, parse_state_formula, parse_statements, ParseError};

pub fn write_proof(proc: &str, tree: &ProofNode) -> String {
    let mut out = format!("proof {proc}\n");
    write_node(&mut out, tree, 0);
    out
}

fn write_node(out: &mut String, n: &ProofNode, depth: usize) {
    let pad = "  ".repeat(depth);
    let _ = writeln!(out, "{pad}node {}", n.rule);
    let _ = writeln!(out, "{pad}  pre {}", n.judgement.pre);
    let _ = writeln!(out, "{pad}  stmt {}", n.judgement.stmt);
    let _ = writeln!(out, "{pad}  post {}", n.judgement.post);
    let a = &n.args;
    if let Some(k) = &a.kernel {
        let _ = writeln!(out, "{pad}  arg kernel {}", format_set(k));
    }
    if let Some((p, q)) = &a.inner {
        let _ = writeln!(out, "{pad}  arg inner-pre {p}");
        let _ = writeln!(out, "{pad}  arg inner-post {q}");
    }
    if let Some(m) = &a.mid {
        let _ = writeln!(out, "{pad}  arg mid {m}");
    }
    if let Some(s) = a.split {
        let _ = writeln!(out, "{pad}  arg split {s}");
    }
    if let Some(s) = &a.support {
        let _ = writeln!(out, "{pad}  arg support {s}");
    }
    if let Some(r) = &a.reason {
        let _ = writeln!(out, "{pad}  arg reason {}", r.replace('\n', " "));
    }
    for o in &n.obligations {
        let _ = writeln!(out, "{pad}  obligation {} {} {}", o.kind.name(), o.status.name(), o.payload);
    }
    for p in &n.premises {
        write_node(out, p, depth + 1);
    }
    let _ = writeln!(out, "{pad}end");
}

/// Parses every `proof` block of `src`.
pub fn parse_proofs(src: &str) -> Result<Vec<(String, ProofNode)>, ParseError> {
    let lines: Vec<(usize, &str)> =
        src.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with("//")).collect();
    let mut pos = 0;
    let mut out = Vec::new();
    while pos < lines.len() {
        let (ln, line) = lines[pos];
        let Some(name) = line.strip_prefix("proof ") else {
            return Err(ParseError::at(ln, 1, format!("expected `proof <name>`, found `{line}`")));
        };
        pos += 1;
        let node = parse_node(&lines, &mut pos)?;
        out.push((name.trim().to_string(), node));
    }
    Ok(out)
}

pub fn parse_proof(src: &str) -> Result<(String, ProofNode), ParseError> {
    let mut all = parse_proofs(src)?;
    match all.len() {
        1 => Ok(all.remove(0)),
        n => Err(ParseError::at(1, 1, format!("expected one proof, found {n}"))),
    }
}

/// Re-anchors an error from a single-line sub-parser at line `ln`.
fn at_line<T>(ln: usize, r: Result<T, ParseError>) -> Result<T, ParseError> {
    r.map_err(|e| ParseError::at(ln, e.col, e.message))
}

fn parse_node(lines: &[(usize, &str)], pos: &mut usize) -> Result<ProofNode, ParseError> {
    let Some(&(ln, line)) = lines.get(*pos) else {
        return Err(ParseError::at(lines.last().map_or(1, |l| l.0), 1, "unexpected end of proof"));
    };
    let Some(name) = line.strip_prefix("node ") else {
        return Err(ParseError::at(ln, 1, format!("expected `node <rule>`, found `{line}`")));
    };
    let rule = Rule::from_name(name.trim()).ok_or_else(|| ParseError::at(ln, 6, format!("unknown rule `{}`", name.trim())))?;
    *pos += 1;
    let (mut pre, mut stmt, mut post) = (None, None, None);
    let mut args = RuleArgs::default();
    let (mut inner_pre, mut inner_post) = (None, None);
    let mut obligations = Vec::new();
    let mut premises = Vec::new();
    loop {
        let Some(&(ln, line)) = lines.get(*pos) else {
            return Err(ParseError::at(ln, 1, "missing `end`"));
        };
        if line == "end" {
            *pos += 1;
            break;
        }
        if line.starts_with("node ") {
            premises.push(parse_node(lines, pos)?);
            continue;
        }
        *pos += 1;
        let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
        match key {
            "pre" => pre = Some(at_line(ln, parse_assertion(rest))?),
            "post" => post = Some(at_line(ln, parse_assertion(rest))?),
            "stmt" => stmt = Some(at_line(ln, parse_statements(rest))?),
            "arg" => {
                let (k, v) = rest.split_once(' ').unwrap_or((rest, ""));
                match k {
                    "kernel" => args.kernel = Some(at_line(ln, parse_domain_set(v))?),
                    "inner-pre" => inner_pre = Some(at_line(ln, parse_assertion(v))?),
                    "inner-post" => inner_post = Some(at_line(ln, parse_assertion(v))?),
                    "mid" => args.mid = Some(at_line(ln, parse_assertion(v))?),
                    "split" => {
                        args.split = Some(v.trim().parse().map_err(|_| ParseError::at(ln, 1, format!("bad split `{v}`")))?)
                    }
                    "support" => args.support = Some(at_line(ln, parse_state_formula(v))?),
                    "reason" => args.reason = Some(v.to_string()),
                    _ => return Err(ParseError::at(ln, 5, format!("unknown argument `{k}`"))),
                }
            }
            "obligation" => {
                let mut it = rest.splitn(3, ' ');
                let kind = it.next().and_then(ObligationKind::from_name);
                let status = it.next().and_then(ObligationStatus::from_name);
                let (Some(kind), Some(status)) = (kind, status) else {
                    return Err(ParseError::at(ln, 12, format!("malformed obligation `{rest}`")));
                };
                let payload = it.next().unwrap_or("").to_string();
                obligations.push(Obligation { kind, payload, status, detail: None });
            }
            _ => return Err(ParseError::at(ln, 1, format!("unexpected `{key}` in node"))),
        }
    }
    match (inner_pre, inner_post) {
        (Some(p), Some(q)) => args.inner = Some((p, q)),
        (None, None) => {}
        _ => return Err(ParseError::at(ln, 1, "cons needs both `inner-pre` and `inner-post`")),
    }
    let missing = |what: &str| ParseError::at(ln, 1, format!("node without `{what}`"));
    let judgement = Judgement::new(
        pre.ok_or_else(|| missing("pre"))?,
        stmt.ok_or_else(|| missing("stmt"))?,
        post.ok_or_else(|| missing("post"))?,
    );
    Ok(ProofNode { rule, judgement, args, obligations, premises })
}
