//! Lexer and recursive-descent parser. Sugar is eliminated while parsing and
//! names are resolved to de Bruijn indices on the fly.

use thiserror::Error;

use super::signature::{quote, EffectKind, Prim, Signature};
use super::term::{app, case, constant, effect, inj, lam, pair, proj, seq, var, Binder, Term};
use super::types::Type;
use crate::rational::{parse_rational, Rational};

pub const STATE_VAR: &str = "__y";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: unknown effect `{name}`")]
    UnknownEffect { line: usize, col: usize, name: String },
    #[error("{line}:{col}: unbound name `{name}`")]
    Unbound { line: usize, col: usize, name: String },
    #[error("{line}:{col}: `{STATE_VAR}` is reserved for the specification state")]
    Reserved { line: usize, col: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Num(String),
    Sym(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const SYMBOLS: [&str; 21] =
    ["->", ">=", "<=", "==", "(", ")", "{", "}", "[", "]", ",", ";", ":", "|", "+", "-", "*", "/", ">", "<", "="];

const KEYWORDS: [&str; 22] = [
    "let", "rec", "in", "fun", "if", "then", "else", "case", "of", "inl", "inr", "fst", "snd", "absurd", "eff", "flip",
    "flipr", "choose", "emit", "reward", "true", "false",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let mut out = Vec::new();
    let err = |line, col, msg: &str| ParseError::Syntax { line, col, msg: msg.to_string() };
    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        if c == '(' && chars.get(i + 1) == Some(&'*') {
            let (l0, c0) = (line, col);
            let mut depth = 0;
            loop {
                if i >= chars.len() {
                    return Err(err(l0, c0, "unterminated comment"));
                }
                if chars[i] == '(' && chars.get(i + 1) == Some(&'*') {
                    depth += 1;
                    bump!();
                    bump!();
                } else if chars[i] == '*' && chars.get(i + 1) == Some(&')') {
                    depth -= 1;
                    bump!();
                    bump!();
                    if depth == 0 {
                        break;
                    }
                } else {
                    bump!();
                }
            }
            continue;
        }
        let (l0, c0) = (line, col);
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                s.push(chars[i]);
                bump!();
            }
            out.push(Token { tok: Tok::Ident(s), line: l0, col: c0 });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let mut s = String::new();
            while i < chars.len() && chars[i].is_ascii_digit() {
                s.push(chars[i]);
                bump!();
            }
            if i < chars.len() && chars[i] == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()) {
                s.push('.');
                bump!();
                while i < chars.len() && chars[i].is_ascii_digit() {
                    s.push(chars[i]);
                    bump!();
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let sign = chars.get(i + 1).is_some_and(|d| *d == '-' || *d == '+');
                let digit_at = if sign { i + 2 } else { i + 1 };
                if chars.get(digit_at).is_some_and(|d| d.is_ascii_digit()) {
                    s.push('e');
                    bump!();
                    if sign {
                        s.push(chars[i]);
                        bump!();
                    }
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        s.push(chars[i]);
                        bump!();
                    }
                }
            }
            out.push(Token { tok: Tok::Num(s), line: l0, col: c0 });
            continue;
        }
        if c == '"' {
            bump!();
            let mut s = String::new();
            loop {
                if i >= chars.len() {
                    return Err(err(l0, c0, "unterminated string"));
                }
                match chars[i] {
                    '"' => {
                        bump!();
                        break;
                    }
                    '\\' => {
                        bump!();
                        let e = *chars.get(i).ok_or_else(|| err(l0, c0, "unterminated string"))?;
                        s.push(match e {
                            'n' => '\n',
                            't' => '\t',
                            other => other,
                        });
                        bump!();
                    }
                    other => {
                        s.push(other);
                        bump!();
                    }
                }
            }
            out.push(Token { tok: Tok::Str(s), line: l0, col: c0 });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                for _ in 0..s.len() {
                    bump!();
                }
                out.push(Token { tok: Tok::Sym(s), line: l0, col: c0 });
            }
            None => return Err(err(l0, c0, &format!("unexpected character `{c}`"))),
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

/// A parsed program together with the signature extended by the effect
/// instances it uses.
#[derive(Debug, Clone)]
pub struct Program {
    pub term: Term,
    pub signature: Signature,
}

/// Parses a user program: no free variables, no reserved names.
pub fn parse_program(text: &str, sig: &Signature) -> Result<Program, ParseError> {
    parse_term(text, sig, &[], false)
}

/// Parses a term whose free variables are `ctx` (outermost first). In
/// `product` mode the state variable and `state` type are admitted and the
/// effect sugar is rejected.
pub fn parse_term(text: &str, sig: &Signature, ctx: &[String], product: bool) -> Result<Program, ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0, sig: sig.clone(), scope: ctx.to_vec(), product };
    let t = p.expr()?;
    p.expect_eof()?;
    Ok(Program { term: t, signature: p.sig })
}

pub fn parse_type(text: &str, allow_state: bool) -> Result<Type, ParseError> {
    let mut sig = Signature::standard();
    sig.bases.clear();
    let mut p = Parser { toks: lex(text)?, pos: 0, sig, scope: vec![], product: allow_state };
    let t = p.ty(true)?;
    p.expect_eof()?;
    Ok(t)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    sig: Signature,
    scope: Vec<String>,
    product: bool,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn fail<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let (line, col) = self.here();
        Err(ParseError::Syntax { line, col, msg: msg.into() })
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.fail(format!("expected `{s}`, found {}", describe(self.peek())))
        }
    }

    fn expect_kw(&mut self, s: &str) -> PResult<()> {
        if self.is_kw(s) {
            self.next();
            Ok(())
        } else {
            self.fail(format!("expected `{s}`, found {}", describe(self.peek())))
        }
    }

    fn expect_eof(&self) -> PResult<()> {
        match self.peek() {
            Tok::Eof => Ok(()),
            t => self.fail(format!("unexpected {}", describe(t))),
        }
    }

    /// A binder name: identifier or `_`, never a keyword.
    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                if s == STATE_VAR && !self.product {
                    let (line, col) = self.here();
                    return Err(ParseError::Reserved { line, col });
                }
                self.next();
                Ok(s)
            }
            t => self.fail(format!("expected identifier, found {}", describe(&t))),
        }
    }

    fn rational(&mut self) -> PResult<Rational> {
        let neg = self.eat_sym("-");
        let mut text = match self.next() {
            Tok::Num(n) => n,
            t => return self.fail(format!("expected a rational, found {}", describe(&t))),
        };
        if self.is_sym("/") && matches!(self.peek_at(1), Tok::Num(_)) {
            self.next();
            if let Tok::Num(d) = self.next() {
                text = format!("{text}/{d}");
            }
        }
        let r = parse_rational(&text).or_else(|e| self.fail(e.to_string()))?;
        Ok(if neg { -r } else { r })
    }

    fn with_binder<T>(&mut self, name: &str, f: impl FnOnce(&mut Self) -> PResult<T>) -> PResult<T> {
        self.scope.push(name.to_string());
        let r = f(self);
        self.scope.pop();
        r
    }

    fn no_sugar(&self, what: &str) -> PResult<()> {
        if self.product {
            self.fail(format!("`{what}` sugar is not available in product programs"))
        } else {
            Ok(())
        }
    }

    fn sugar_effect(&mut self, kind: EffectKind) -> String {
        self.sig.add_effect(kind)
    }

    // ---- expressions ----

    fn expr(&mut self) -> PResult<Term> {
        let kw = match self.peek() {
            Tok::Ident(s) => s.clone(),
            _ => return self.seq(),
        };
        match kw.as_str() {
            "fun" => {
                self.next();
                let params = self.params()?;
                if params.is_empty() {
                    return self.fail("`fun` needs at least one parameter");
                }
                self.expect_sym("->")?;
                self.lambda(params, None)
            }
            "let" => {
                self.next();
                if self.is_kw("rec") {
                    self.next();
                    self.let_rec()
                } else {
                    let name = self.ident()?;
                    let ty = if self.eat_sym(":") { Some(self.ty(false)?) } else { None };
                    self.expect_sym("=")?;
                    let bound = self.expr()?;
                    self.expect_kw("in")?;
                    let body = self.with_binder(&name, |p| p.expr())?;
                    Ok(app(lam(Binder::new(name, ty), body), bound))
                }
            }
            "rec" => {
                self.next();
                let f = self.ident()?;
                let x = self.param()?.ok_or_else(|| self.syntax("expected a parameter"))?;
                // The body arrow ends the annotation; arrow types need parentheses.
                let ret = if self.eat_sym(":") { Some(self.sum_ty(false)?) } else { None };
                self.expect_sym("->")?;
                let body = self.with_binder(&f, |p| p.with_binder(&x.name, |p| p.expr()))?;
                Ok(Term::Rec { fun: f, param: x, ret, body: Box::new(body) })
            }
            "if" => {
                self.next();
                let c = self.expr()?;
                self.expect_kw("then")?;
                let a = self.with_binder("_", |p| p.expr())?;
                self.expect_kw("else")?;
                let b = self.with_binder("_", |p| p.expr())?;
                Ok(case(c, Binder::unused(), a, Binder::unused(), b))
            }
            "case" => {
                self.next();
                let s = self.expr()?;
                self.expect_kw("of")?;
                self.eat_sym("|");
                self.expect_kw("inl")?;
                let l = self.case_binder()?;
                self.expect_sym("->")?;
                let a = self.with_binder(&l.name, |p| p.expr())?;
                self.expect_sym("|")?;
                self.expect_kw("inr")?;
                let r = self.case_binder()?;
                self.expect_sym("->")?;
                let b = self.with_binder(&r.name, |p| p.expr())?;
                Ok(case(s, l, a, r, b))
            }
            "flip" | "flipr" | "choose" => {
                self.no_sugar(&kw)?;
                self.next();
                let kind = match kw.as_str() {
                    "flip" => EffectKind::Flip(self.rational()?),
                    "flipr" => {
                        let p = self.rational()?;
                        EffectKind::FlipReward(p, self.rational()?)
                    }
                    _ => EffectKind::Choose,
                };
                self.check_effect(&kind)?;
                let name = self.sugar_effect(kind);
                let a = self.with_binder("_", |p| p.block())?;
                let b = self.with_binder("_", |p| p.block())?;
                let branch = case(effect(name, Term::Unit), Binder::unused(), a, Binder::unused(), b);
                if self.eat_sym(";") {
                    let rest = self.with_binder("_", |p| p.expr())?;
                    return Ok(seq(branch, rest));
                }
                Ok(branch)
            }
            "emit" => {
                self.no_sugar("emit")?;
                self.next();
                let mut symbols = Vec::new();
                while let Tok::Str(s) = self.peek().clone() {
                    self.next();
                    symbols.push(s);
                }
                if symbols.is_empty() {
                    return self.fail("`emit` needs at least one string symbol");
                }
                let tail = if self.eat_sym(";") {
                    let depth = symbols.len();
                    for _ in 0..depth {
                        self.scope.push("_".into());
                    }
                    let t = self.expr();
                    self.scope.truncate(self.scope.len() - depth);
                    Some(t?)
                } else {
                    None
                };
                let emits: Vec<Term> =
                    symbols.into_iter().map(|s| effect(self.sugar_effect(EffectKind::Emit(s)), Term::Unit)).collect();
                Ok(chain(emits, tail))
            }
            "reward" => {
                self.no_sugar("reward")?;
                self.next();
                let r = self.rational()?;
                let kind = EffectKind::FlipReward(Rational::from_integer(1.into()), r);
                self.check_effect(&kind)?;
                let name = self.sugar_effect(kind);
                self.expect_sym(";")?;
                let tail = self.with_binder("_", |p| p.expr())?;
                Ok(seq(effect(name, Term::Unit), tail))
            }
            _ => self.seq(),
        }
    }

    fn syntax(&self, msg: &str) -> ParseError {
        let (line, col) = self.here();
        ParseError::Syntax { line, col, msg: msg.to_string() }
    }

    fn check_effect(&self, kind: &EffectKind) -> PResult<()> {
        match super::signature::parse_effect_name(&super::signature::effect_name(kind)) {
            Ok(_) => Ok(()),
            Err(e) => self.fail(e.to_string()),
        }
    }

    fn block(&mut self) -> PResult<Term> {
        self.expect_sym("{")?;
        let t = self.expr()?;
        self.expect_sym("}")?;
        Ok(t)
    }

    fn case_binder(&mut self) -> PResult<Binder> {
        if self.eat_sym("(") {
            let name = self.ident()?;
            self.expect_sym(":")?;
            let t = self.ty(false)?;
            self.expect_sym(")")?;
            Ok(Binder::typed(name, t))
        } else {
            Ok(Binder::new(self.ident()?, None))
        }
    }

    /// `x`, `(x : t)` or `()`; `None` when no parameter follows.
    fn param(&mut self) -> PResult<Option<Binder>> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => Ok(Some(Binder::new(self.ident()?, None))),
            Tok::Sym("(") => {
                if matches!(self.peek_at(1), Tok::Sym(")")) {
                    self.next();
                    self.next();
                    return Ok(Some(Binder::typed("_", Type::Unit)));
                }
                self.next();
                let name = self.ident()?;
                self.expect_sym(":")?;
                let t = self.ty(false)?;
                self.expect_sym(")")?;
                Ok(Some(Binder::typed(name, t)))
            }
            _ => Ok(None),
        }
    }

    fn params(&mut self) -> PResult<Vec<Binder>> {
        let mut out = Vec::new();
        while let Some(b) = self.param()? {
            out.push(b);
        }
        Ok(out)
    }

    /// Parses the body under `params` and wraps it in λs. An optional result
    /// ascription applies to the innermost body.
    fn lambda(&mut self, params: Vec<Binder>, ret: Option<Type>) -> PResult<Term> {
        for b in &params {
            self.scope.push(b.name.clone());
        }
        let body = self.expr();
        self.scope.truncate(self.scope.len() - params.len());
        let mut t = body?;
        if let Some(r) = ret {
            t = ascribe(t, r);
        }
        for b in params.into_iter().rev() {
            t = lam(b, t);
        }
        Ok(t)
    }

    fn let_rec(&mut self) -> PResult<Term> {
        let f = self.ident()?;
        let params = self.params()?;
        let Some((first, rest)) = params.split_first() else {
            return self.fail("`let rec` needs at least one parameter");
        };
        let ret_ann = if self.eat_sym(":") { Some(self.ty(false)?) } else { None };
        self.expect_sym("=")?;
        // The μ's own return type is known only when every later parameter is annotated.
        let full_ret = match &ret_ann {
            Some(r) if rest.iter().all(|b| b.ty.is_some()) => {
                Some(rest.iter().rev().fold(r.clone(), |acc, b| Type::arrow(b.ty.clone().unwrap_or(Type::Unit), acc)))
            }
            _ => None,
        };
        let inner_ret = if full_ret.is_some() { None } else { ret_ann };
        let (first, rest) = (first.clone(), rest.to_vec());
        let body = self.with_binder(&f, |p| {
            p.with_binder(&first.name, |p| {
                if rest.is_empty() {
                    let b = p.expr()?;
                    Ok(match inner_ret {
                        Some(r) => ascribe(b, r),
                        None => b,
                    })
                } else {
                    p.lambda(rest, inner_ret)
                }
            })
        })?;
        let rec = Term::Rec { fun: f.clone(), param: first, ret: full_ret, body: Box::new(body) };
        self.expect_kw("in")?;
        let cont = self.with_binder(&f, |p| p.expr())?;
        Ok(app(lam(Binder::new(f, None), cont), rec))
    }

    fn seq(&mut self) -> PResult<Term> {
        let a = self.cmp()?;
        if self.eat_sym(";") {
            let b = self.with_binder("_", |p| p.expr())?;
            return Ok(seq(a, b));
        }
        Ok(a)
    }

    fn cmp(&mut self) -> PResult<Term> {
        let a = self.additive()?;
        let op = match self.peek() {
            Tok::Sym(">=") => Prim::Ge,
            Tok::Sym(">") => Prim::Gt,
            Tok::Sym("<=") => Prim::Le,
            Tok::Sym("<") => Prim::Lt,
            Tok::Sym("==") => Prim::Eq,
            _ => return Ok(a),
        };
        self.next();
        let b = self.additive()?;
        self.prim(op, pair(a, b))
    }

    fn prim(&self, op: Prim, arg: Term) -> PResult<Term> {
        if self.sig.constant(op.name()).is_none() {
            return self.fail(format!("operator needs constant `{}` in the signature", op.name()));
        }
        Ok(constant(op.name(), arg))
    }

    fn additive(&mut self) -> PResult<Term> {
        let mut a = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("+") => Prim::Add,
                Tok::Sym("-") => Prim::Sub,
                _ => return Ok(a),
            };
            self.next();
            let b = self.multiplicative()?;
            a = self.prim(op, pair(a, b))?;
        }
    }

    fn multiplicative(&mut self) -> PResult<Term> {
        let mut a = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("*") => Prim::Mul,
                Tok::Sym("/") => Prim::Div,
                _ => return Ok(a),
            };
            self.next();
            let b = self.unary()?;
            a = self.prim(op, pair(a, b))?;
        }
    }

    fn unary(&mut self) -> PResult<Term> {
        if self.eat_sym("-") {
            if let Tok::Num(n) = self.peek().clone() {
                self.next();
                return Ok(Term::Real { value: -self.float(&n)? });
            }
            let t = self.unary()?;
            return self.prim(Prim::Neg, t);
        }
        self.application()
    }

    fn float(&self, n: &str) -> PResult<f64> {
        n.parse::<f64>().or_else(|_| self.fail(format!("bad number `{n}`")))
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Tok::Ident(s) => !is_keyword(s) || s == "true" || s == "false",
            Tok::Num(_) => true,
            Tok::Sym("(") => true,
            _ => false,
        }
    }

    fn application(&mut self) -> PResult<Term> {
        let mut head = self.prefix()?;
        while self.starts_atom() {
            let arg = self.atom()?;
            head = app(head, arg);
        }
        Ok(head)
    }

    /// `name` or `name[arg, ...]` rendered canonically.
    fn op_name(&mut self, head: String) -> PResult<String> {
        if !self.eat_sym("[") {
            return Ok(head);
        }
        let mut args = Vec::new();
        loop {
            match self.peek().clone() {
                Tok::Str(s) => {
                    self.next();
                    args.push(quote(&s));
                }
                _ => args.push(self.rational()?.to_string()),
            }
            if !self.eat_sym(",") {
                break;
            }
        }
        self.expect_sym("]")?;
        Ok(format!("{head}[{}]", args.join(",")))
    }

    fn prefix(&mut self) -> PResult<Term> {
        let word = match self.peek() {
            Tok::Ident(s) => s.clone(),
            _ => return self.atom(),
        };
        match word.as_str() {
            "fst" | "snd" => {
                self.next();
                let a = self.atom()?;
                Ok(proj(if word == "fst" { 1 } else { 2 }, a))
            }
            "inl" | "inr" => {
                self.next();
                let a = self.atom()?;
                Ok(inj(if word == "inl" { 1 } else { 2 }, None, a))
            }
            "absurd" => {
                self.next();
                let a = self.atom()?;
                Ok(Term::Absurd { ty: None, arg: Box::new(a) })
            }
            "eff" => {
                self.next();
                let (line, col) = self.here();
                let head = match self.next() {
                    Tok::Ident(s) => s,
                    t => return self.fail(format!("expected effect name, found {}", describe(&t))),
                };
                let name = self.op_name(head)?;
                let canon = self.sig.resolve_effect(&name).map_err(|_| ParseError::UnknownEffect {
                    line,
                    col,
                    name: name.clone(),
                })?;
                let a = self.atom()?;
                Ok(effect(canon, a))
            }
            _ if !is_keyword(&word) && self.lookup(&word).is_none() && self.is_constant_head(&word) => {
                self.next();
                let (line, col) = self.here();
                let name = self.op_name(word)?;
                if self.sig.constant(&name).is_none() {
                    return Err(ParseError::Unbound { line, col, name });
                }
                if self.starts_atom() {
                    let a = self.atom()?;
                    Ok(constant(name, a))
                } else {
                    Ok(eta(&name))
                }
            }
            _ => self.atom(),
        }
    }

    fn is_constant_head(&self, word: &str) -> bool {
        self.sig.constant(word).is_some()
            || (matches!(self.peek_at(1), Tok::Sym("["))
                && self.sig.constants.keys().any(|k| k.starts_with(&format!("{word}["))))
    }

    fn lookup(&self, name: &str) -> Option<usize> {
        if name == "_" {
            return None;
        }
        self.scope.iter().rev().position(|s| s == name)
    }

    fn atom(&mut self) -> PResult<Term> {
        let (line, col) = self.here();
        match self.next() {
            Tok::Ident(s) if s == "true" => Ok(inj(1, Some(Type::bool()), Term::Unit)),
            Tok::Ident(s) if s == "false" => Ok(inj(2, Some(Type::bool()), Term::Unit)),
            Tok::Ident(s) if !is_keyword(&s) => {
                if s == STATE_VAR && !self.product {
                    return Err(ParseError::Reserved { line, col });
                }
                match self.lookup(&s) {
                    Some(i) => Ok(var(i, s)),
                    None if self.sig.constant(&s).is_some() => Ok(eta(&s)),
                    None => Err(ParseError::Unbound { line, col, name: s }),
                }
            }
            Tok::Num(n) => Ok(Term::Real { value: self.float(&n)? }),
            Tok::Sym("(") => {
                if self.eat_sym(")") {
                    return Ok(Term::Unit);
                }
                let a = self.expr()?;
                if self.eat_sym(",") {
                    let b = self.expr()?;
                    self.expect_sym(")")?;
                    return Ok(pair(a, b));
                }
                if self.eat_sym(":") {
                    let t = self.ty(false)?;
                    self.expect_sym(")")?;
                    return Ok(ascribe(a, t));
                }
                self.expect_sym(")")?;
                Ok(a)
            }
            t => {
                self.pos -= 1;
                self.fail(format!("unexpected {}", describe(&t)))
            }
        }
    }

    // ---- types ----

    fn ty(&mut self, any_base: bool) -> PResult<Type> {
        let a = self.sum_ty(any_base)?;
        if self.eat_sym("->") {
            let b = self.ty(any_base)?;
            return Ok(Type::arrow(a, b));
        }
        Ok(a)
    }

    fn sum_ty(&mut self, any_base: bool) -> PResult<Type> {
        let mut a = self.prod_ty(any_base)?;
        while self.eat_sym("+") {
            let b = self.prod_ty(any_base)?;
            a = Type::sum(a, b);
        }
        Ok(a)
    }

    fn prod_ty(&mut self, any_base: bool) -> PResult<Type> {
        let mut a = self.atom_ty(any_base)?;
        while self.eat_sym("*") {
            let b = self.atom_ty(any_base)?;
            a = Type::prod(a, b);
        }
        Ok(a)
    }

    fn atom_ty(&mut self, any_base: bool) -> PResult<Type> {
        match self.next() {
            Tok::Sym("(") => {
                let t = self.ty(any_base)?;
                self.expect_sym(")")?;
                Ok(t)
            }
            Tok::Ident(s) => match s.as_str() {
                "unit" => Ok(Type::Unit),
                "empty" => Ok(Type::Empty),
                "bool" => Ok(Type::bool()),
                "state" if self.product => Ok(Type::State),
                "state" => {
                    self.pos -= 1;
                    let (line, col) = self.here();
                    Err(ParseError::Reserved { line, col })
                }
                _ if any_base || self.sig.bases.contains(&s) => Ok(Type::Base(s)),
                _ => {
                    self.pos -= 1;
                    self.fail(format!("unknown base type `{s}`"))
                }
            },
            t => {
                self.pos -= 1;
                self.fail(format!("expected a type, found {}", describe(&t)))
            }
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Str(s) => format!("string {}", quote(s)),
        Tok::Num(n) => format!("number `{n}`"),
        Tok::Sym(s) => format!("`{s}`"),
        Tok::Eof => "end of input".to_string(),
    }
}

/// `e1; e2; ...; tail` where each later element sits under one more binder.
fn chain(mut items: Vec<Term>, tail: Option<Term>) -> Term {
    let mut acc = match tail {
        Some(t) => t,
        None => {
            let last = items.pop().expect("at least one item");
            last.shift(items.len() as isize, 0)
        }
    };
    while let Some(e) = items.pop() {
        acc = seq(e.shift(items.len() as isize, 0), acc);
    }
    acc
}

/// Attaches an annotation. Injections and absurd take it directly; any other
/// term becomes `let v : t = e in v`.
fn ascribe(t: Term, ty: Type) -> Term {
    match t {
        Term::Inj { index, ty: None, arg } => Term::Inj { index, ty: Some(ty), arg },
        Term::Absurd { ty: None, arg } => Term::Absurd { ty: Some(ty), arg },
        other => app(lam(Binder::typed("v", ty), var(0, "v")), other),
    }
}

fn eta(name: &str) -> Term {
    lam(Binder::new("v", None), constant(name, var(0, "v")))
}
