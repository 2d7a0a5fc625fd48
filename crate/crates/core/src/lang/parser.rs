//! Recursive-descent parsers for programs, knowledge bases, assertions and
//! the formulas of both tiers.


use super::lexer::{tokenize, Tok, Token};
use super::{Contract, Expr, ParseError, Procedure, Program, Statement};
use crate::calculus::TwoTierAssertion;
use crate::dl::{Concept, DomainFormula, DomainSet, KnowledgeBase, Stub, HAS_VALUE, NON_ZERO};
use crate::state::{StateFormula, Term};

const STATEMENT_END: &[&str] = &["end", "else", "fi", "od"];

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Parser { toks: tokenize(src)?, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError::at(t.line, t.col, msg)
    }

    fn describe(&self) -> String {
        match self.peek() {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == k)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.next();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        if self.is_kw(k) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{s}`, found {}", self.describe())))
        }
    }

    fn expect_kw(&mut self, k: &str) -> Result<(), ParseError> {
        if self.eat_kw(k) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{k}`, found {}", self.describe())))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(s)
            }
            _ => Err(self.error(format!("expected identifier, found {}", self.describe()))),
        }
    }

    fn int(&mut self) -> Result<i64, ParseError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.next();
                Ok(n)
            }
            _ => Err(self.error(format!("expected integer, found {}", self.describe()))),
        }
    }

    fn expect_eof(&self) -> Result<(), ParseError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.error(format!("unexpected {}", self.describe())))
        }
    }

    // ---- state tier ----

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.next();
                Ok(Term::Int(n))
            }
            Tok::Ident(name) => {
                self.next();
                if self.eat_sym("(") {
                    let mut args = vec![self.term()?];
                    while self.eat_sym(",") {
                        args.push(self.term()?);
                    }
                    self.expect_sym(")")?;
                    Ok(Term::App(name, args))
                } else {
                    Ok(Term::Var(name))
                }
            }
            _ => Err(self.error(format!("expected term, found {}", self.describe()))),
        }
    }

    fn state_formula(&mut self) -> Result<StateFormula, ParseError> {
        let lhs = self.state_or()?;
        if self.eat_sym("->") {
            let rhs = self.state_formula()?;
            return Ok(StateFormula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn state_or(&mut self) -> Result<StateFormula, ParseError> {
        let mut f = self.state_and()?;
        while self.eat_sym("||") {
            let rhs = self.state_and()?;
            f = StateFormula::or(f, rhs);
        }
        Ok(f)
    }

    fn state_and(&mut self) -> Result<StateFormula, ParseError> {
        let mut f = self.state_unary()?;
        while self.eat_sym("&&") {
            let rhs = self.state_unary()?;
            f = StateFormula::and(f, rhs);
        }
        Ok(f)
    }

    fn state_unary(&mut self) -> Result<StateFormula, ParseError> {
        if self.eat_sym("!") {
            return Ok(StateFormula::not(self.state_unary()?));
        }
        if self.eat_sym("(") {
            let f = self.state_formula()?;
            self.expect_sym(")")?;
            return Ok(f);
        }
        if self.eat_kw("true") {
            return Ok(StateFormula::truth());
        }
        if self.eat_kw("false") {
            return Ok(StateFormula::falsity());
        }
        let lhs = self.term()?;
        if self.eat_sym("==") {
            return Ok(StateFormula::Eq(lhs, self.term()?));
        }
        if self.eat_sym("!=") {
            return Ok(StateFormula::neq(lhs, self.term()?));
        }
        match lhs {
            Term::App(p, args) => Ok(StateFormula::Pred(p, args)),
            _ => Err(self.error(format!("expected `==` or `!=`, found {}", self.describe()))),
        }
    }

    // ---- domain tier ----

    /// `allow_or` is false inside assertion tiers, where `|` separates tiers.
    fn concept(&mut self, allow_or: bool) -> Result<Concept, ParseError> {
        let mut c = self.concept_and()?;
        while allow_or && self.eat_sym("|") {
            let rhs = self.concept_and()?;
            c = Concept::or(c, rhs);
        }
        Ok(c)
    }

    fn concept_and(&mut self) -> Result<Concept, ParseError> {
        let mut c = self.concept_unary()?;
        while self.eat_sym("&") {
            let rhs = self.concept_unary()?;
            c = Concept::and(c, rhs);
        }
        Ok(c)
    }

    fn concept_unary(&mut self) -> Result<Concept, ParseError> {
        if self.eat_sym("!") {
            return Ok(Concept::not(self.concept_unary()?));
        }
        if self.eat_sym("(") {
            let c = self.concept(true)?;
            self.expect_sym(")")?;
            return Ok(c);
        }
        let name = self.ident()?;
        match name.as_str() {
            "Top" => Ok(Concept::Top),
            "Bot" => Ok(Concept::Bottom),
            "some" | "all" => {
                let role = self.ident()?;
                self.expect_sym(".")?;
                let exists = name == "some";
                if let Tok::Int(n) = *self.peek() {
                    self.next();
                    return Ok(if exists { Concept::some_value(role, n) } else { Concept::all_value(role, n) });
                }
                let inner = self.concept_unary()?;
                Ok(if exists { Concept::some(role, inner) } else { Concept::all(role, inner) })
            }
            _ => Ok(Concept::Atomic(name)),
        }
    }

    fn domain_formula(&mut self, allow_or: bool) -> Result<Vec<DomainFormula>, ParseError> {
        if let (Tok::Ident(name), Tok::Sym("(")) = (self.peek().clone(), self.peek_at(1).clone()) {
            if !matches!(name.as_str(), "some" | "all") {
                self.next();
                self.next();
                let a = self.ident()?;
                if self.eat_sym(")") {
                    let c = match name.as_str() {
                        "Top" => Concept::Top,
                        "Bot" => Concept::Bottom,
                        _ => Concept::Atomic(name),
                    };
                    return Ok(vec![DomainFormula::ConceptAssertion(c, a)]);
                }
                self.expect_sym(",")?;
                let f = match self.peek().clone() {
                    Tok::Int(n) => {
                        self.next();
                        DomainFormula::DataAssertion(name, a, n)
                    }
                    _ => DomainFormula::RoleAssertion(name, a, self.ident()?),
                };
                self.expect_sym(")")?;
                return Ok(vec![f]);
            }
        }
        let c = self.concept(allow_or)?;
        if self.eat_sym("(") {
            let o = self.ident()?;
            self.expect_sym(")")?;
            return Ok(vec![DomainFormula::ConceptAssertion(c, o)]);
        }
        if self.eat_sym("<=") {
            let d = self.concept(allow_or)?;
            return Ok(vec![DomainFormula::Subsumption(c, d)]);
        }
        if self.eat_sym("==") {
            let d = self.concept(allow_or)?;
            return Ok(DomainFormula::equivalence(c, d).to_vec());
        }
        Err(self.error(format!("expected `(`, `<=` or `==` after concept, found {}", self.describe())))
    }

    fn domain_set(&mut self) -> Result<DomainSet, ParseError> {
        let mut set = DomainSet::new();
        if self.eat_sym("-") {
            return Ok(set);
        }
        set.extend(self.domain_formula(false)?);
        while self.eat_sym(",") {
            set.extend(self.domain_formula(false)?);
        }
        Ok(set)
    }

    fn assertion(&mut self) -> Result<TwoTierAssertion, ParseError> {
        self.expect_sym("[")?;
        let domain = self.domain_set()?;
        self.expect_sym("|")?;
        let state = if self.eat_sym("-") { StateFormula::truth() } else { self.state_formula()? };
        self.expect_sym("]")?;
        Ok(TwoTierAssertion { domain, state })
    }

    // ---- programs ----

    fn expr(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.next();
                Ok(Expr::Int(n))
            }
            Tok::Ident(v) if !is_keyword(&v) => {
                self.next();
                Ok(Expr::Var(v))
            }
            _ => Err(self.error(format!("expected integer or variable, found {}", self.describe()))),
        }
    }

    fn statements(&mut self) -> Result<Statement, ParseError> {
        let mut list = Vec::new();
        while !STATEMENT_END.iter().any(|k| self.is_kw(k)) && *self.peek() != Tok::Eof {
            list.push(self.statement()?);
        }
        Statement::from_list(list).ok_or_else(|| self.error("expected at least one statement"))
    }

    fn statement(&mut self) -> Result<Statement, ParseError> {
        if self.eat_kw("skip") {
            self.expect_sym(";")?;
            return Ok(Statement::Skip);
        }
        if self.eat_kw("if") {
            self.expect_sym("(")?;
            let e = self.expr()?;
            self.expect_sym(")")?;
            self.expect_kw("then")?;
            let t = self.statements()?;
            self.expect_kw("else")?;
            let f = self.statements()?;
            self.expect_kw("fi")?;
            self.eat_sym(";");
            return Ok(Statement::If(e, Box::new(t), Box::new(f)));
        }
        if self.eat_kw("while") {
            self.expect_sym("(")?;
            let e = self.expr()?;
            self.expect_sym(")")?;
            self.expect_kw("do")?;
            let body = self.statements()?;
            self.expect_kw("od")?;
            self.eat_sym(";");
            return Ok(Statement::While(e, Box::new(body)));
        }
        let name = self.ident()?;
        if is_keyword(&name) {
            return Err(ParseError::at(
                self.toks[self.pos - 1].line,
                self.toks[self.pos - 1].col,
                format!("unexpected keyword `{name}`"),
            ));
        }
        if self.eat_sym(":=") {
            let e = self.expr()?;
            self.expect_sym(";")?;
            return Ok(Statement::Assign(name, e));
        }
        if self.eat_sym("(") {
            let e = self.expr()?;
            self.expect_sym(")")?;
            self.expect_sym(";")?;
            return Ok(Statement::Call(name, e));
        }
        Err(self.error(format!("expected `:=` or `(` after `{name}`, found {}", self.describe())))
    }

    fn program(&mut self) -> Result<Program, ParseError> {
        let mut prog = Program::default();
        loop {
            if self.eat_kw("var") {
                let v = self.ident()?;
                self.expect_sym("=")?;
                let n = self.int()?;
                self.expect_sym(";")?;
                prog.globals.push((v, n));
            } else if self.eat_kw("proc") {
                let name = self.ident()?;
                self.expect_sym("(")?;
                let param = self.ident()?;
                self.expect_sym(")")?;
                self.expect_kw("requires")?;
                let pre = self.assertion()?;
                self.expect_kw("ensures")?;
                let post = self.assertion()?;
                self.expect_kw("begin")?;
                let body = self.statements()?;
                self.expect_kw("end")?;
                self.eat_sym(";");
                prog.procedures.push(Procedure { name, param, contract: Contract { pre, post }, body });
            } else {
                break;
            }
        }
        self.expect_eof()?;
        Ok(prog)
    }

    // ---- knowledge bases ----

    fn kb(&mut self) -> Result<KnowledgeBase, ParseError> {
        let mut kb = KnowledgeBase::new();
        kb.signature.concepts.insert(NON_ZERO.into());
        kb.signature.data_roles.insert(HAS_VALUE.into());
        while *self.peek() != Tok::Eof {
            let start = self.pos;
            match self.peek().clone() {
                Tok::Ident(k) if k == "concept" || k == "role" || k == "data-role" || k == "individual" => {
                    self.next();
                    loop {
                        let name = self.ident()?;
                        let set = match k.as_str() {
                            "concept" => &mut kb.signature.concepts,
                            "role" => &mut kb.signature.roles,
                            "data-role" => &mut kb.signature.data_roles,
                            _ => &mut kb.signature.nominals,
                        };
                        set.insert(name);
                        if !self.eat_sym(",") {
                            break;
                        }
                    }
                }
                Tok::Ident(k) if k == "stub" && matches!(self.peek_at(1), Tok::Ident(_)) && *self.peek_at(2) == Tok::Sym("(") => {
                    self.next();
                    let role = self.ident()?;
                    self.expect_sym("(")?;
                    let owner = self.ident()?;
                    self.expect_sym(",")?;
                    let individual = self.ident()?;
                    self.expect_sym(")")?;
                    self.expect_kw("for")?;
                    self.expect_kw("var")?;
                    let var = self.ident()?;
                    kb.add_stub(Stub { role, owner, individual, var });
                }
                Tok::Ident(k) if k == "closure" && matches!(self.peek_at(1), Tok::Ident(_)) => {
                    self.next();
                    kb.closure = match self.ident()?.as_str() {
                        "on" => true,
                        "off" => false,
                        other => return Err(self.error(format!("expected `on` or `off`, found `{other}`"))),
                    };
                }
                _ => {
                    for f in self.domain_formula(true)? {
                        let missing = f.signature().missing_from(&kb.signature);
                        if let Some(m) = missing.first() {
                            let t = &self.toks[start];
                            return Err(ParseError::at(t.line, t.col, format!("undeclared {m}")));
                        }
                        kb.add_axiom(f);
                    }
                }
            }
            self.expect_sym(";")?;
        }
        Ok(kb)
    }
}

fn is_keyword(s: &str) -> bool {
    matches!(
        s,
        "var" | "proc" | "requires" | "ensures" | "begin" | "end" | "if" | "then" | "else" | "fi" | "while" | "do"
            | "od" | "skip" | "true" | "false"
    )
}

fn complete<T>(src: &str, f: impl FnOnce(&mut Parser) -> Result<T, ParseError>) -> Result<T, ParseError> {
    let mut p = Parser::new(src)?;
    let v = f(&mut p)?;
    p.expect_eof()?;
    Ok(v)
}

pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    complete(src, |p| p.program())
}

pub fn parse_kb(src: &str) -> Result<KnowledgeBase, ParseError> {
    complete(src, |p| p.kb())
}

pub fn parse_state_formula(src: &str) -> Result<StateFormula, ParseError> {
    complete(src, |p| p.state_formula())
}

pub fn parse_concept(src: &str) -> Result<Concept, ParseError> {
    complete(src, |p| p.concept(true))
}

/// One formula; an equivalence yields its two subsumptions.
pub fn parse_domain_formulas(src: &str) -> Result<Vec<DomainFormula>, ParseError> {
    complete(src, |p| p.domain_formula(true))
}

/// Comma-separated formulas, or `-` for the empty set.
pub fn parse_domain_set(src: &str) -> Result<DomainSet, ParseError> {
    complete(src, |p| p.domain_set())
}

pub fn parse_assertion(src: &str) -> Result<TwoTierAssertion, ParseError> {
    complete(src, |p| p.assertion())
}

pub fn parse_statements(src: &str) -> Result<Statement, ParseError> {
    complete(src, |p| p.statements())
}
