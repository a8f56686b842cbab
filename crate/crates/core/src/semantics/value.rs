use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::rc::Rc;

use serde::{Serialize, Serializer};

use crate::automata::{Spec, SpecState};
use crate::syntax::Term;

/// Runtime values. Hashes are computed once at construction so memo keys
/// containing closures stay cheap to hash and compare.
#[derive(Clone)]
pub struct Value<'a>(Rc<Node<'a>>);

struct Node<'a> {
    hash: u64,
    kind: V<'a>,
}

pub enum V<'a> {
    Unit,
    Real(f64),
    Pair(Value<'a>, Value<'a>),
    Inj(u8, Value<'a>),
    State(SpecState),
    /// `code` is the `Lam` or `Rec` node itself. `fuel` is set for `Rec`:
    /// the number of unfoldings this approximant may still perform. Identity
    /// only looks at the environment slots in `free`, the code's free
    /// variables.
    Closure {
        code: &'a Term,
        env: Env<'a>,
        fuel: Option<u32>,
        free: Rc<[usize]>,
    },
}

fn hasher() -> DefaultHasher {
    DefaultHasher::new()
}

impl<'a> Value<'a> {
    fn new(kind: V<'a>) -> Self {
        let mut h = hasher();
        match &kind {
            V::Unit => 0u8.hash(&mut h),
            V::Real(x) => {
                1u8.hash(&mut h);
                x.to_bits().hash(&mut h);
            }
            V::Pair(a, b) => {
                2u8.hash(&mut h);
                a.0.hash.hash(&mut h);
                b.0.hash.hash(&mut h);
            }
            V::Inj(i, a) => {
                3u8.hash(&mut h);
                i.hash(&mut h);
                a.0.hash.hash(&mut h);
            }
            V::State(s) => {
                4u8.hash(&mut h);
                s.hash(&mut h);
            }
            V::Closure { code, env, fuel, free } => {
                5u8.hash(&mut h);
                (*code as *const Term as usize).hash(&mut h);
                for i in free.iter() {
                    env.get(*i).map(|v| v.0.hash).hash(&mut h);
                }
                fuel.hash(&mut h);
            }
        }
        Value(Rc::new(Node { hash: h.finish(), kind }))
    }

    pub fn unit() -> Self {
        Value::new(V::Unit)
    }

    pub fn real(x: f64) -> Self {
        Value::new(V::Real(x))
    }

    pub fn pair(a: Value<'a>, b: Value<'a>) -> Self {
        Value::new(V::Pair(a, b))
    }

    pub fn inj(i: u8, a: Value<'a>) -> Self {
        Value::new(V::Inj(i, a))
    }

    pub fn boolean(b: bool) -> Self {
        Value::inj(if b { 1 } else { 2 }, Value::unit())
    }

    pub fn state(s: SpecState) -> Self {
        Value::new(V::State(s))
    }

    pub fn closure(code: &'a Term, env: Env<'a>, fuel: Option<u32>, free: Rc<[usize]>) -> Self {
        Value::new(V::Closure { code, env, fuel, free })
    }

    pub fn kind(&self) -> &V<'a> {
        &self.0.kind
    }

    /// Converts to a ground value; `None` if a closure occurs anywhere.
    pub fn ground(&self, spec: Option<&Spec>) -> Option<Ground> {
        Some(match self.kind() {
            V::Unit => Ground::Unit,
            V::Real(x) => Ground::Real(*x),
            V::Pair(a, b) => Ground::Pair(Box::new(a.ground(spec)?), Box::new(b.ground(spec)?)),
            V::Inj(i, a) => Ground::Inj(*i, Box::new(a.ground(spec)?)),
            V::State(s) => Ground::State(match spec {
                Some(sp) => sp.label(s),
                None => format!("{s:?}"),
            }),
            V::Closure { .. } => return None,
        })
    }
}

impl PartialEq for Value<'_> {
    fn eq(&self, other: &Self) -> bool {
        if Rc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        if self.0.hash != other.0.hash {
            return false;
        }
        match (self.kind(), other.kind()) {
            (V::Unit, V::Unit) => true,
            (V::Real(a), V::Real(b)) => a.to_bits() == b.to_bits(),
            (V::Pair(a, b), V::Pair(c, d)) => a == c && b == d,
            (V::Inj(i, a), V::Inj(j, b)) => i == j && a == b,
            (V::State(a), V::State(b)) => a == b,
            (V::Closure { code: c1, env: e1, fuel: f1, free }, V::Closure { code: c2, env: e2, fuel: f2, .. }) => {
                std::ptr::eq(*c1, *c2) && f1 == f2 && free.iter().all(|i| e1.get(*i) == e2.get(*i))
            }
            _ => false,
        }
    }
}

impl Eq for Value<'_> {}

impl Hash for Value<'_> {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl fmt::Debug for Value<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            V::Unit => f.write_str("()"),
            V::Real(x) => write!(f, "{x:?}"),
            V::Pair(a, b) => write!(f, "({a:?}, {b:?})"),
            V::Inj(i, a) => write!(f, "inj{i} {a:?}"),
            V::State(s) => write!(f, "{s:?}"),
            V::Closure { fuel, .. } => write!(f, "<closure fuel={fuel:?}>"),
        }
    }
}

/// Persistent environment; index 0 is the innermost binding.
#[derive(Clone, Default)]
pub struct Env<'a>(Option<Rc<EnvNode<'a>>>);

struct EnvNode<'a> {
    value: Value<'a>,
    next: Env<'a>,
}

impl<'a> Env<'a> {
    pub fn empty() -> Self {
        Env(None)
    }

    pub fn push(&self, value: Value<'a>) -> Self {
        Env(Some(Rc::new(EnvNode { value, next: self.clone() })))
    }

    pub fn get(&self, index: usize) -> Option<&Value<'a>> {
        let mut cur = self.0.as_ref()?;
        for _ in 0..index {
            cur = cur.next.0.as_ref()?;
        }
        Some(&cur.value)
    }
}

/// A closure-free value, as it appears in valuations.
#[derive(Debug, Clone, PartialEq)]
pub enum Ground {
    Unit,
    Real(f64),
    Pair(Box<Ground>, Box<Ground>),
    Inj(u8, Box<Ground>),
    State(String),
}

impl Ground {
    fn key(&self) -> String {
        self.to_string()
    }
}

impl Eq for Ground {}

impl PartialOrd for Ground {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ground {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key().cmp(&other.key())
    }
}

impl fmt::Display for Ground {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ground::Unit => f.write_str("()"),
            Ground::Real(x) => write!(f, "{x:?}"),
            Ground::Pair(a, b) => write!(f, "({a}, {b})"),
            Ground::Inj(1, a) if **a == Ground::Unit => f.write_str("true"),
            Ground::Inj(2, a) if **a == Ground::Unit => f.write_str("false"),
            Ground::Inj(i, a) => write!(f, "{} {a}", if *i == 1 { "inl" } else { "inr" }),
            Ground::State(s) => f.write_str(s),
        }
    }
}

impl Serialize for Ground {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}
