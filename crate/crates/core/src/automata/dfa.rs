use std::collections::{BTreeMap, HashMap};

use super::SpecError;

/// A complete DFA over string symbols. States keep their declared order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfa {
    states: Vec<String>,
    alphabet: Vec<String>,
    /// `delta[y][a]`
    delta: Vec<Vec<usize>>,
    accepting: Vec<bool>,
    initial: usize,
    state_ix: HashMap<String, usize>,
    symbol_ix: HashMap<String, usize>,
}

fn index(names: &[String], what: &str) -> Result<HashMap<String, usize>, SpecError> {
    let mut m = HashMap::new();
    for (i, n) in names.iter().enumerate() {
        if m.insert(n.clone(), i).is_some() {
            return Err(SpecError::Duplicate(what.to_string(), n.clone()));
        }
    }
    Ok(m)
}

impl Dfa {
    pub fn new(
        states: Vec<String>,
        alphabet: Vec<String>,
        delta: &BTreeMap<String, BTreeMap<String, String>>,
        accepting: &[String],
        initial: &str,
    ) -> Result<Dfa, SpecError> {
        if states.is_empty() {
            return Err(SpecError::NoStates);
        }
        let state_ix = index(&states, "state")?;
        let symbol_ix = index(&alphabet, "symbol")?;
        let find = |s: &str| state_ix.get(s).copied().ok_or_else(|| SpecError::UnknownState(s.to_string()));
        let mut table = vec![vec![usize::MAX; alphabet.len()]; states.len()];
        for (from, row) in delta {
            let y = find(from)?;
            for (sym, to) in row {
                let a = *symbol_ix.get(sym).ok_or_else(|| SpecError::UnknownSymbol(sym.clone()))?;
                table[y][a] = find(to)?;
            }
        }
        for (y, row) in table.iter().enumerate() {
            if let Some(a) = row.iter().position(|t| *t == usize::MAX) {
                return Err(SpecError::NotTotal(states[y].clone(), alphabet[a].clone()));
            }
        }
        let mut acc = vec![false; states.len()];
        for s in accepting {
            acc[find(s)?] = true;
        }
        let initial = find(initial)?;
        Ok(Dfa { states, alphabet, delta: table, accepting: acc, initial, state_ix, symbol_ix })
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

    pub fn state_name(&self, y: usize) -> &str {
        &self.states[y]
    }

    pub fn is_accepting(&self, y: usize) -> bool {
        self.accepting[y]
    }

    pub fn accepting_names(&self) -> Vec<String> {
        (0..self.states.len()).filter(|y| self.accepting[*y]).map(|y| self.states[y].clone()).collect()
    }

    pub fn symbol(&self, a: &str) -> Result<usize, SpecError> {
        self.symbol_ix.get(a).copied().ok_or_else(|| SpecError::UnknownSymbol(a.to_string()))
    }

    pub fn step(&self, y: usize, a: &str) -> Result<usize, SpecError> {
        Ok(self.delta[y][self.symbol(a)?])
    }

    pub fn delta_map(&self) -> BTreeMap<String, BTreeMap<String, String>> {
        self.states
            .iter()
            .enumerate()
            .map(|(y, s)| {
                let row = self
                    .alphabet
                    .iter()
                    .enumerate()
                    .map(|(a, sym)| (sym.clone(), self.states[self.delta[y][a]].clone()))
                    .collect();
                (s.clone(), row)
            })
            .collect()
    }

    /// Left-to-right fold of the transition function.
    pub fn run<S: AsRef<str>>(&self, y: usize, w: &[S]) -> Result<usize, SpecError> {
        w.iter().try_fold(y, |y, a| self.step(y, a.as_ref()))
    }

    pub fn accepts<S: AsRef<str>>(&self, y: usize, w: &[S]) -> Result<bool, SpecError> {
        Ok(self.accepting[self.run(y, w)?])
    }
}

/// Run from a state given by name. Convenience for callers holding labels.
pub fn dfa_run<S: AsRef<str>>(d: &Dfa, y: &str, w: &[S]) -> Result<String, SpecError> {
    let y = d.state(y).ok_or_else(|| SpecError::UnknownState(y.to_string()))?;
    Ok(d.state_name(d.run(y, w)?).to_string())
}

pub fn dfa_accepts<S: AsRef<str>>(d: &Dfa, y: &str, w: &[S]) -> Result<bool, SpecError> {
    let y = d.state(y).ok_or_else(|| SpecError::UnknownState(y.to_string()))?;
    d.accepts(y, w)
}
