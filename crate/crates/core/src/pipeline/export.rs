use serde::Serialize;
use serde_json::{json, Value};

use super::{Loaded, PipelineError};
use crate::sps::transform_type;
use crate::syntax::{parse_term, pretty_print_in, typecheck, Binder, Context, Term, Type, STATE_VAR};

/// A product program in both concrete forms.
#[derive(Debug, Clone, Serialize)]
pub struct Export {
    pub text: String,
    pub ast: Value,
    #[serde(rename = "type")]
    pub ty: String,
    pub simplified: bool,
}

fn ty_json(t: &Option<Type>) -> Value {
    match t {
        Some(t) => Value::String(t.to_string()),
        None => Value::Null,
    }
}

fn binder_json(b: &Binder) -> Value {
    json!({ "name": b.name, "type": ty_json(&b.ty) })
}

/// JSON AST with one `node` tag per constructor.
pub fn term_json(t: &Term) -> Value {
    match t {
        Term::Var { index, name } => json!({ "node": "var", "name": name, "index": index }),
        Term::Unit => json!({ "node": "unit" }),
        Term::Real { value } => json!({ "node": "real", "value": value }),
        Term::Pair { fst, snd } => json!({ "node": "pair", "fst": term_json(fst), "snd": term_json(snd) }),
        Term::Proj { index, arg } => json!({ "node": "proj", "index": index, "arg": term_json(arg) }),
        Term::Inj { index, ty, arg } => {
            json!({ "node": "inj", "index": index, "type": ty_json(ty), "arg": term_json(arg) })
        }
        Term::Absurd { ty, arg } => json!({ "node": "absurd", "type": ty_json(ty), "arg": term_json(arg) }),
        Term::Case { scrutinee, left, left_body, right, right_body } => json!({
            "node": "case",
            "scrutinee": term_json(scrutinee),
            "left": binder_json(left),
            "leftBody": term_json(left_body),
            "right": binder_json(right),
            "rightBody": term_json(right_body),
        }),
        Term::Lam { param, body } => json!({ "node": "lam", "param": binder_json(param), "body": term_json(body) }),
        Term::App { fun, arg } => json!({ "node": "app", "fun": term_json(fun), "arg": term_json(arg) }),
        Term::Rec { fun, param, ret, body } => json!({
            "node": "rec",
            "fun": fun,
            "param": binder_json(param),
            "ret": ty_json(ret),
            "body": term_json(body),
        }),
        Term::Const { name, arg } => json!({ "node": "const", "name": name, "arg": term_json(arg) }),
        Term::Effect { name, arg } => json!({ "node": "effect", "name": name, "arg": term_json(arg) }),
    }
}

/// Renders the product program and checks that the text parses back to
/// the same term and re-typechecks at the transformed type.
pub fn export_product(loaded: &Loaded, simplified: bool) -> Result<Export, PipelineError> {
    let term = if simplified { loaded.simplified() } else { loaded.product.term.clone() };
    let ctx = [STATE_VAR.to_string()];
    let text = pretty_print_in(&term, &ctx);
    let sig = &loaded.product.signature;
    let back = parse_term(&text, sig, &ctx, true)?;
    if !back.term.alpha_eq(&term) {
        return Err(PipelineError::Export("printed product program does not parse back to itself".into()));
    }
    let want = transform_type(&loaded.ty)?;
    let got = typecheck(&Context::new().push(STATE_VAR, Type::State), &back.term, sig)?;
    if got != want {
        return Err(PipelineError::Export(format!("re-parsed product has type {got}, expected {want}")));
    }
    Ok(Export { text, ast: term_json(&term), ty: want.to_string(), simplified })
}
