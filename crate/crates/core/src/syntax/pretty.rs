//! Printer producing program text that parses back to an α-equivalent term.

use std::collections::BTreeSet;

use super::parser::is_keyword;
use super::term::{Binder, Term};
use super::types::Type;

const ATOM: u8 = 2;
const APP: u8 = 1;
const EXPR: u8 = 0;

pub fn pretty_print(term: &Term) -> String {
    pretty_print_in(term, &[])
}

/// Prints a term whose free variables are named by `ctx` (outermost first).
pub fn pretty_print_in(term: &Term, ctx: &[String]) -> String {
    let reserved: BTreeSet<String> = term.constants().into_iter().map(|c| c.to_string()).collect();
    let mut p = Printer { scope: ctx.to_vec(), reserved, out: String::new() };
    p.term(term, EXPR);
    p.out
}

struct Printer {
    scope: Vec<String>,
    reserved: BTreeSet<String>,
    out: String,
}

fn is_open(t: &Term) -> bool {
    match t {
        Term::Lam { .. } | Term::Rec { .. } | Term::Case { .. } => true,
        Term::App { fun, .. } => matches!(**fun, Term::Lam { .. }),
        _ => false,
    }
}

impl Printer {
    fn w(&mut self, s: &str) {
        self.out.push_str(s);
    }

    fn name_of(&self, index: usize) -> String {
        self.scope.get(self.scope.len().wrapping_sub(index + 1)).cloned().unwrap_or_else(|| format!("#{index}"))
    }

    /// Names of outer variables referenced by `body`, which sits under `k`
    /// fresh binders.
    fn captured(&self, body: &Term, k: usize) -> BTreeSet<String> {
        body.free_indices().into_iter().filter(|i| *i >= k).map(|i| self.name_of(i - k)).collect()
    }

    fn choose(&self, hint: &str, used: bool, avoid: &BTreeSet<String>) -> String {
        if !used && (hint == "_" || hint.is_empty()) {
            return "_".to_string();
        }
        let base = if hint == "_" || hint.is_empty() { "x" } else { hint };
        let ok = |n: &str| !avoid.contains(n) && !is_keyword(n) && !self.reserved.contains(n);
        if ok(base) {
            return base.to_string();
        }
        let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
        let stem = if stem.is_empty() { "x" } else { stem };
        (1..).map(|i| format!("{stem}{i}")).find(|n| ok(n)).expect("unbounded supply of names")
    }

    fn binder_name(&self, b: &Binder, body: &Term, k: usize, extra: &BTreeSet<String>) -> String {
        let used = body.has_free(0);
        let mut avoid = self.captured(body, k);
        avoid.extend(extra.iter().cloned());
        self.choose(&b.name, used, &avoid)
    }

    fn binder(&mut self, name: &str, b: &Binder) {
        match &b.ty {
            Some(t) => {
                self.w(&format!("({name} : {t})"));
            }
            None => self.w(name),
        }
    }

    fn under<F: FnOnce(&mut Self)>(&mut self, names: &[String], f: F) {
        self.scope.extend(names.iter().cloned());
        f(self);
        self.scope.truncate(self.scope.len() - names.len());
    }

    fn term(&mut self, t: &Term, prec: u8) {
        let needs = match t {
            Term::Var { .. } | Term::Unit | Term::Pair { .. } => false,
            Term::Real { value } => *value < 0.0 || (*value == 0.0 && value.is_sign_negative()),
            Term::Inj { ty: Some(_), .. } | Term::Absurd { ty: Some(_), .. } => false,
            Term::Const { .. } | Term::Effect { .. } | Term::Proj { .. } | Term::Inj { .. } | Term::Absurd { .. } => {
                prec > APP
            }
            Term::App { fun, .. } if !matches!(**fun, Term::Lam { .. }) => prec > APP,
            _ => prec > EXPR,
        };
        if needs {
            self.w("(");
            self.raw(t);
            self.w(")");
        } else {
            self.raw(t);
        }
    }

    fn raw(&mut self, t: &Term) {
        match t {
            Term::Var { index, .. } => {
                let n = self.name_of(*index);
                self.w(&n);
            }
            Term::Unit => self.w("()"),
            Term::Real { value } => self.w(&format!("{value:?}")),
            Term::Const { name, arg } => {
                self.w(name);
                self.w(" ");
                self.term(arg, ATOM);
            }
            Term::Effect { name, arg } => {
                self.w("eff ");
                self.w(name);
                self.w(" ");
                self.term(arg, ATOM);
            }
            Term::Pair { fst, snd } => {
                self.w("(");
                self.term(fst, EXPR);
                self.w(", ");
                self.term(snd, EXPR);
                self.w(")");
            }
            Term::Proj { index, arg } => {
                self.w(if *index == 1 { "fst " } else { "snd " });
                self.term(arg, ATOM);
            }
            Term::Inj { index, ty, arg } => {
                if ty.is_some() {
                    self.w("(");
                }
                self.w(if *index == 1 { "inl " } else { "inr " });
                self.term(arg, ATOM);
                if let Some(t) = ty {
                    self.w(&format!(" : {t})"));
                }
            }
            Term::Absurd { ty, arg } => {
                if ty.is_some() {
                    self.w("(");
                }
                self.w("absurd ");
                self.term(arg, ATOM);
                if let Some(t) = ty {
                    self.w(&format!(" : {t})"));
                }
            }
            Term::Case { scrutinee, left, left_body, right, right_body } => {
                self.w("case ");
                self.term(scrutinee, if is_open(scrutinee) { ATOM } else { EXPR });
                self.w(" of inl ");
                let ln = self.binder_name(left, left_body, 1, &BTreeSet::new());
                self.binder(&ln, left);
                self.w(" -> ");
                self.under(&[ln], |p| p.term(left_body, EXPR));
                self.w(" | inr ");
                let rn = self.binder_name(right, right_body, 1, &BTreeSet::new());
                self.binder(&rn, right);
                self.w(" -> ");
                self.under(&[rn], |p| p.term(right_body, EXPR));
            }
            Term::Lam { param, body } => {
                self.w("fun ");
                let n = self.binder_name(param, body, 1, &BTreeSet::new());
                self.binder(&n, param);
                self.w(" -> ");
                self.under(&[n], |p| p.term(body, EXPR));
            }
            Term::Rec { fun, param, ret, body } => {
                let f_used = body.has_free(1);
                let mut avoid = self.captured(body, 2);
                let f = self.choose(fun, true, &avoid);
                if f_used {
                    avoid.insert(f.clone());
                }
                let x = self.binder_name(param, body, 2, &avoid);
                self.w(&format!("rec {f} "));
                match &param.ty {
                    Some(t) => self.w(&format!("({x} : {t})")),
                    None => self.w(&x),
                }
                match ret {
                    Some(r @ Type::Arrow(..)) => self.w(&format!(" : ({r})")),
                    Some(r) => self.w(&format!(" : {r}")),
                    None => {}
                }
                self.w(" -> ");
                self.under(&[f, x], |p| p.term(body, EXPR));
            }
            Term::App { fun, arg } => match &**fun {
                Term::Lam { param, body } => {
                    let n = self.binder_name(param, body, 1, &BTreeSet::new());
                    if n == "_" && param.ty.is_none() {
                        self.term(arg, if is_open(arg) || is_seq(arg) { ATOM } else { EXPR });
                        self.w(";\n");
                    } else {
                        self.w("let ");
                        self.w(&n);
                        if let Some(t) = &param.ty {
                            self.w(&format!(" : {t}"));
                        }
                        self.w(" = ");
                        self.term(arg, EXPR);
                        self.w(" in\n");
                    }
                    self.under(&[n], |p| p.term(body, EXPR));
                }
                _ => {
                    self.term(fun, APP);
                    self.w(" ");
                    self.term(arg, ATOM);
                }
            },
        }
    }
}

fn is_seq(t: &Term) -> bool {
    matches!(t, Term::App { fun, .. } if matches!(**fun, Term::Lam { .. }))
}
