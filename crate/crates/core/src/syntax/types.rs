use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Types of the calculus. `State` is the reserved base standing for the
/// specification state space; user programs never mention it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Base(String),
    Unit,
    Empty,
    Prod(Box<Type>, Box<Type>),
    Sum(Box<Type>, Box<Type>),
    Arrow(Box<Type>, Box<Type>),
    State,
}

pub const REAL: &str = "real";

impl Type {
    pub fn prod(a: Type, b: Type) -> Type {
        Type::Prod(Box::new(a), Box::new(b))
    }

    pub fn sum(a: Type, b: Type) -> Type {
        Type::Sum(Box::new(a), Box::new(b))
    }

    pub fn arrow(a: Type, b: Type) -> Type {
        Type::Arrow(Box::new(a), Box::new(b))
    }

    pub fn bool() -> Type {
        Type::sum(Type::Unit, Type::Unit)
    }

    pub fn real() -> Type {
        Type::Base(REAL.to_string())
    }

    /// No arrow anywhere.
    pub fn is_ground(&self) -> bool {
        match self {
            Type::Base(_) | Type::Unit | Type::Empty | Type::State => true,
            Type::Prod(a, b) | Type::Sum(a, b) => a.is_ground() && b.is_ground(),
            Type::Arrow(..) => false,
        }
    }

    pub fn mentions_state(&self) -> bool {
        match self {
            Type::State => true,
            Type::Base(_) | Type::Unit | Type::Empty => false,
            Type::Prod(a, b) | Type::Sum(a, b) | Type::Arrow(a, b) => a.mentions_state() || b.mentions_state(),
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        let open = match self {
            Type::Arrow(..) => prec > 0,
            Type::Sum(a, b) if !(**a == Type::Unit && **b == Type::Unit) => prec > 1,
            Type::Prod(..) => prec > 2,
            _ => false,
        };
        if open {
            f.write_str("(")?;
        }
        match self {
            Type::Base(n) => f.write_str(n)?,
            Type::Unit => f.write_str("unit")?,
            Type::Empty => f.write_str("empty")?,
            Type::State => f.write_str("state")?,
            Type::Sum(a, b) if **a == Type::Unit && **b == Type::Unit => f.write_str("bool")?,
            Type::Arrow(a, b) => {
                a.fmt_prec(f, 1)?;
                f.write_str(" -> ")?;
                b.fmt_prec(f, 0)?;
            }
            Type::Sum(a, b) => {
                a.fmt_prec(f, 1)?;
                f.write_str(" + ")?;
                b.fmt_prec(f, 2)?;
            }
            Type::Prod(a, b) => {
                a.fmt_prec(f, 2)?;
                f.write_str(" * ")?;
                b.fmt_prec(f, 3)?;
            }
        }
        if open {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl Serialize for Type {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Type {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Type, D::Error> {
        let s = String::deserialize(d)?;
        super::parser::parse_type(&s, true).map_err(serde::de::Error::custom)
    }
}
