//! Random well-typed programs and automata for the three-way equality check.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{three_way, Loaded};
use crate::automata::Mode;
use crate::exec;
use crate::semantics::wp_product;
use crate::sps::{simplify, transform_context, transform_type};
use crate::syntax::{typecheck, Context};

pub const CORPUS_FUELS: u32 = 5;

#[derive(Debug, Clone, PartialEq, Eq)]
enum G {
    Unit,
    Bool,
    Prod(Box<G>, Box<G>),
    Arrow(Box<G>, Box<G>),
}

impl G {
    fn render(&self) -> String {
        match self {
            G::Unit => "unit".into(),
            G::Bool => "bool".into(),
            G::Prod(a, b) => format!("({} * {})", a.render(), b.render()),
            G::Arrow(a, b) => format!("({} -> {})", a.render(), b.render()),
        }
    }

    fn prod(a: G, b: G) -> G {
        G::Prod(Box::new(a), Box::new(b))
    }

    fn arrow(a: G, b: G) -> G {
        G::Arrow(Box::new(a), Box::new(b))
    }
}

const PROBS: [&str; 5] = ["1/2", "1/3", "1/4", "2/3", "3/4"];
const ALPHABET: [&str; 2] = ["a", "b"];

struct Gen<'r> {
    rng: &'r mut ChaCha8Rng,
    mode: Mode,
    ctx: Vec<(String, G)>,
    fresh: usize,
    recs: usize,
}

impl Gen<'_> {
    fn name(&mut self) -> String {
        self.fresh += 1;
        format!("v{}", self.fresh)
    }

    fn small_ty(&mut self) -> G {
        match self.rng.gen_range(0..4) {
            0 => G::Unit,
            1 | 2 => G::Bool,
            _ => G::prod(G::Bool, G::Unit),
        }
    }

    fn scoped(&mut self, name: &str, ty: G, f: impl FnOnce(&mut Self) -> String) -> String {
        self.ctx.push((name.to_string(), ty));
        let s = f(self);
        self.ctx.pop();
        s
    }

    fn vars_of(&self, ty: &G) -> Vec<String> {
        // Innermost binding of a name wins, so only the last occurrence counts.
        let mut seen = BTreeMap::new();
        for (n, t) in &self.ctx {
            seen.insert(n.clone(), t.clone());
        }
        seen.into_iter().filter(|(_, t)| t == ty).map(|(n, _)| n).collect()
    }

    fn leaf(&mut self, ty: &G) -> String {
        let vars = self.vars_of(ty);
        if !vars.is_empty() && self.rng.gen_bool(0.5) {
            return vars.choose(self.rng).cloned().expect("nonempty");
        }
        match ty {
            G::Unit => "()".into(),
            G::Bool => if self.rng.gen_bool(0.5) { "true" } else { "false" }.into(),
            G::Prod(a, b) => format!("({}, {})", self.leaf(a), self.leaf(b)),
            G::Arrow(a, b) => {
                let p = self.name();
                let body = self.scoped(&p, (**a).clone(), |g| g.leaf(b));
                format!("(fun ({p} : {}) -> {body})", a.render())
            }
        }
    }

    fn effect(&mut self) -> String {
        match self.mode {
            Mode::Reach | Mode::OptReward => "choose".into(),
            _ => format!("flip {}", PROBS.choose(self.rng).expect("nonempty")),
        }
    }

    fn term(&mut self, ty: &G, depth: usize) -> String {
        if depth == 0 {
            return self.leaf(ty);
        }
        let d = depth - 1;
        let callers: Vec<(String, G)> = {
            let mut seen = BTreeMap::new();
            for (n, t) in &self.ctx {
                seen.insert(n.clone(), t.clone());
            }
            seen.into_iter()
                .filter_map(|(n, t)| match t {
                    G::Arrow(a, b) if *b == *ty => Some((n, *a)),
                    _ => None,
                })
                .collect()
        };
        loop {
            match self.rng.gen_range(0..12) {
                0 => return self.leaf(ty),
                1 | 2 => {
                    let e = self.effect();
                    let a = self.term(ty, d);
                    let b = self.term(ty, d);
                    return format!("({e} {{ {a} }} {{ {b} }})");
                }
                3 | 4 => {
                    let sym = ALPHABET.choose(self.rng).expect("nonempty");
                    let rest = self.term(ty, d);
                    return format!("(emit \"{sym}\"; {rest})");
                }
                5 => {
                    let t = self.small_ty();
                    let v = self.name();
                    let bound = self.term(&t, d);
                    let body = self.scoped(&v, t.clone(), |g| g.term(ty, d));
                    return format!("(let {v} : {} = {bound} in {body})", t.render());
                }
                6 => {
                    let (a, b) = (self.small_ty(), self.small_ty());
                    let (f, p) = (self.name(), self.name());
                    let lam = self.scoped(&p, a.clone(), |g| g.term(&b, d));
                    let body = self.scoped(&f, G::arrow(a.clone(), b.clone()), |g| g.term(ty, d));
                    return format!("(let {f} = fun ({p} : {}) -> {lam} in {body})", a.render());
                }
                7 if !callers.is_empty() => {
                    let (f, a) = callers.choose(self.rng).cloned().expect("nonempty");
                    let arg = self.term(&a, d);
                    return format!("({f} {arg})");
                }
                8 => {
                    let c = self.term(&G::Bool, d);
                    let a = self.term(ty, d);
                    let b = self.term(ty, d);
                    return format!("(if {c} then {a} else {b})");
                }
                9 if self.recs < 2 => {
                    self.recs += 1;
                    let (r, p) = (self.name(), self.name());
                    let body = self.scoped(&r, G::arrow(G::Unit, ty.clone()), |g| {
                        g.scoped(&p, G::Unit, |g| {
                            let e = g.effect();
                            let step = if g.rng.gen_bool(0.5) {
                                let sym = ALPHABET.choose(g.rng).expect("nonempty");
                                format!("emit \"{sym}\"; {r} ()")
                            } else {
                                g.term(ty, d)
                            };
                            let base = g.leaf(ty);
                            format!("{e} {{ {step} }} {{ {base} }}")
                        })
                    });
                    let call = self.scoped(&r, G::arrow(G::Unit, ty.clone()), |g| {
                        if g.rng.gen_bool(0.5) {
                            format!("{r} ()")
                        } else {
                            g.term(ty, d)
                        }
                    });
                    return format!("(let rec {r} ({p} : unit) : {} = {body} in {call})", ty.render());
                }
                10 => {
                    if let G::Prod(a, b) = ty {
                        let x = self.term(a, d);
                        let y = self.term(b, d);
                        return format!("({x}, {y})");
                    }
                }
                11 => {
                    let other = self.small_ty();
                    let first = self.rng.gen_bool(0.5);
                    let pair_ty = if first { G::prod(ty.clone(), other) } else { G::prod(other, ty.clone()) };
                    let p = self.term(&pair_ty, d);
                    return format!("({} {p})", if first { "fst" } else { "snd" });
                }
                _ => {}
            }
        }
    }
}

fn random_dfa(rng: &mut ChaCha8Rng) -> String {
    let n = rng.gen_range(2..=3);
    let states: Vec<String> = (0..n).map(|i| format!("q{i}")).collect();
    let mut delta = BTreeMap::new();
    for s in &states {
        let row: BTreeMap<String, String> =
            ALPHABET.iter().map(|a| (a.to_string(), states.choose(rng).cloned().expect("nonempty"))).collect();
        delta.insert(s.clone(), row);
    }
    let accepting: Vec<String> = states.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
    serde_json::json!({
        "kind": "dfa",
        "states": states,
        "alphabet": ALPHABET,
        "initial": "q0",
        "accepting": accepting,
        "delta": delta,
    })
    .to_string()
}

/// One generated program with its automaton.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CorpusCase {
    pub index: usize,
    pub case_seed: u64,
    pub mode: Mode,
    pub program: String,
    pub spec: String,
}

/// Deterministic in `case_seed`: the reproducer for a reported failure.
pub fn generate_case(index: usize, case_seed: u64, max_depth: usize, mode: Mode) -> CorpusCase {
    let mut rng = ChaCha8Rng::seed_from_u64(case_seed);
    let tys = [G::Unit, G::Bool, G::prod(G::Bool, G::Unit), G::prod(G::Bool, G::Bool)];
    let ty = tys.choose(&mut rng).cloned().expect("nonempty");
    let depth = rng.gen_range(max_depth.div_ceil(2)..=max_depth);
    let mut g = Gen { rng: &mut rng, mode, ctx: Vec::new(), fresh: 0, recs: 0 };
    let program = g.term(&ty, depth);
    let spec = random_dfa(&mut rng);
    CorpusCase { index, case_seed, mode, program, spec }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CorpusFailure {
    pub index: usize,
    pub case_seed: u64,
    pub mode: Mode,
    pub program: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CorpusSummary {
    pub seed: u64,
    pub count: usize,
    pub max_depth: usize,
    pub fuels: u32,
    pub passed: usize,
    pub failed: usize,
    pub type_preserved: usize,
    pub failures: Vec<CorpusFailure>,
}

/// Checks one case: exact equality of source, synchronised and product
/// weakest pre-conditions (and of the simplified product) at fuels
/// `1..=CORPUS_FUELS`, plus type preservation. `Ok(())` or a diagnostic.
pub fn check_case(case: &CorpusCase) -> (bool, Result<(), String>) {
    let loaded = match Loaded::from_texts(&case.program, &case.spec) {
        Ok(l) => l,
        Err(e) => return (false, Err(e.to_string())),
    };
    let preserved = (|| {
        let want = transform_type(&loaded.ty).ok()?;
        let ctx = transform_context(&Context::new()).ok()?;
        let got = typecheck(&ctx, &loaded.product.term, &loaded.product.signature).ok()?;
        Some(got == want)
    })()
    .unwrap_or(false);
    let q = match loaded.query(case.mode) {
        Ok(q) => q,
        Err(e) => return (preserved, Err(e.to_string())),
    };
    let simplified = simplify(&loaded.product.term);
    for n in 1..=CORPUS_FUELS {
        let sides = match three_way(&loaded, &q, n) {
            Ok(s) => s,
            Err(e) => return (preserved, Err(format!("fuel {n}: {e}"))),
        };
        if !sides.equal() {
            return (
                preserved,
                Err(format!(
                    "fuel {n}: source {} / sync {} / product {}",
                    serde_json::to_string(&sides.lhs).unwrap_or_default(),
                    serde_json::to_string(&sides.mid).unwrap_or_default(),
                    serde_json::to_string(&sides.rhs).unwrap_or_default()
                )),
            );
        }
        match wp_product(&simplified, &loaded.product.signature, &q, n) {
            Ok(s) if s.same_values(&sides.rhs) => {}
            Ok(_) => return (preserved, Err(format!("fuel {n}: simplified product differs"))),
            Err(e) => return (preserved, Err(format!("fuel {n}: simplified product: {e}"))),
        }
    }
    if !preserved {
        return (false, Err("transformed program does not re-typecheck at the lifted type".into()));
    }
    (true, Ok(()))
}

/// `count` cases alternating between `prob` and `reach` mode.
pub fn corpus_cases(seed: u64, count: usize, max_depth: usize) -> Vec<CorpusCase> {
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let mode = if i % 2 == 0 { Mode::Prob } else { Mode::Reach };
            generate_case(i, master.next_u64(), max_depth, mode)
        })
        .collect()
}

pub fn corpus_check(seed: u64, count: usize, max_depth: usize) -> CorpusSummary {
    let cases = corpus_cases(seed, count, max_depth);
    let results = exec::map(cases, |c| {
        let (preserved, r) = check_case(&c);
        (c, preserved, r)
    });
    let mut summary = CorpusSummary {
        seed,
        count,
        max_depth,
        fuels: CORPUS_FUELS,
        passed: 0,
        failed: 0,
        type_preserved: 0,
        failures: Vec::new(),
    };
    for (c, preserved, r) in results {
        summary.type_preserved += preserved as usize;
        match r {
            Ok(()) => summary.passed += 1,
            Err(detail) => {
                summary.failed += 1;
                summary.failures.push(CorpusFailure {
                    index: c.index,
                    case_seed: c.case_seed,
                    mode: c.mode,
                    program: c.program,
                    detail,
                });
            }
        }
    }
    summary
}
