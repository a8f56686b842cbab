use std::collections::{BTreeMap, HashMap};

use num_traits::Signed;

use super::SpecError;
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub to: usize,
    pub accept: bool,
    pub reward: Rational,
}

/// Edge-labelled reward machine: each edge carries a target, an accept bit
/// and a nonnegative reward.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewardMachine {
    states: Vec<String>,
    alphabet: Vec<String>,
    edges: Vec<Vec<Edge>>,
    initial: usize,
    state_ix: HashMap<String, usize>,
    symbol_ix: HashMap<String, usize>,
}

/// One edge as written in a spec file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSpec {
    pub to: String,
    pub accept: bool,
    pub reward: Rational,
}

impl RewardMachine {
    pub fn new(
        states: Vec<String>,
        alphabet: Vec<String>,
        edges: &BTreeMap<String, BTreeMap<String, EdgeSpec>>,
        initial: &str,
    ) -> Result<RewardMachine, SpecError> {
        if states.is_empty() {
            return Err(SpecError::NoStates);
        }
        let mut state_ix = HashMap::new();
        for (i, s) in states.iter().enumerate() {
            if state_ix.insert(s.clone(), i).is_some() {
                return Err(SpecError::Duplicate("state".into(), s.clone()));
            }
        }
        let mut symbol_ix = HashMap::new();
        for (i, s) in alphabet.iter().enumerate() {
            if symbol_ix.insert(s.clone(), i).is_some() {
                return Err(SpecError::Duplicate("symbol".into(), s.clone()));
            }
        }
        let find = |s: &str| state_ix.get(s).copied().ok_or_else(|| SpecError::UnknownState(s.to_string()));
        let mut table: Vec<Vec<Option<Edge>>> = vec![vec![None; alphabet.len()]; states.len()];
        for (from, row) in edges {
            let u = find(from)?;
            for (sym, e) in row {
                let a = *symbol_ix.get(sym).ok_or_else(|| SpecError::UnknownSymbol(sym.clone()))?;
                if e.reward.is_negative() {
                    return Err(SpecError::NegativeReward(from.clone(), sym.clone()));
                }
                table[u][a] = Some(Edge { to: find(&e.to)?, accept: e.accept, reward: e.reward.clone() });
            }
        }
        let mut full = Vec::with_capacity(states.len());
        for (u, row) in table.into_iter().enumerate() {
            let mut out = Vec::with_capacity(row.len());
            for (a, e) in row.into_iter().enumerate() {
                out.push(e.ok_or_else(|| SpecError::NotTotal(states[u].clone(), alphabet[a].clone()))?);
            }
            full.push(out);
        }
        let initial = find(initial)?;
        Ok(RewardMachine { states, alphabet, edges: full, initial, state_ix, symbol_ix })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn state(&self, name: &str) -> Option<usize> {
        self.state_ix.get(name).copied()
    }

    pub fn state_name(&self, u: usize) -> &str {
        &self.states[u]
    }

    pub fn edge(&self, u: usize, a: &str) -> Result<&Edge, SpecError> {
        let a = self.symbol_ix.get(a).copied().ok_or_else(|| SpecError::UnknownSymbol(a.to_string()))?;
        Ok(&self.edges[u][a])
    }

    pub fn edge_map(&self) -> BTreeMap<String, BTreeMap<String, EdgeSpec>> {
        self.states
            .iter()
            .enumerate()
            .map(|(u, s)| {
                let row = self
                    .alphabet
                    .iter()
                    .enumerate()
                    .map(|(a, sym)| {
                        let e = &self.edges[u][a];
                        let spec =
                            EdgeSpec { to: self.states[e.to].clone(), accept: e.accept, reward: e.reward.clone() };
                        (sym.clone(), spec)
                    })
                    .collect();
                (s.clone(), row)
            })
            .collect()
    }

    /// Folds the edges over `w`, adding rewards onto `r0`. The returned bit
    /// is the accept bit of the last edge taken, or `b` for the empty word.
    pub fn run<S: AsRef<str>>(
        &self,
        u: usize,
        b: bool,
        r0: &Rational,
        w: &[S],
    ) -> Result<(usize, bool, Rational), SpecError> {
        let mut st = (u, b, r0.clone());
        for a in w {
            let e = self.edge(st.0, a.as_ref())?;
            st = (e.to, e.accept, st.2 + &e.reward);
        }
        Ok(st)
    }
}

pub fn rm_run<S: AsRef<str>>(
    m: &RewardMachine,
    u: &str,
    b: bool,
    r0: &Rational,
    w: &[S],
) -> Result<(String, bool, Rational), SpecError> {
    let u = m.state(u).ok_or_else(|| SpecError::UnknownState(u.to_string()))?;
    let (v, bit, r) = m.run(u, b, r0, w)?;
    Ok((m.state_name(v).to_string(), bit, r))
}
