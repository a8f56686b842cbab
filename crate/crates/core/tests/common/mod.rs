#![allow(dead_code)]

use tvp::automata::{InferenceQuery, Mode, Spec};
use tvp::pipeline::Loaded;
use tvp::rational::{parse_rational, Rational};
use tvp::syntax::{parse_program, Program, Signature};

pub const CORPUS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../corpus/");

/// (program, spec, mode) for every shipped benchmark.
pub const BENCHMARKS: [(&str, &str, Mode); 7] = [
    ("coin_flip", "coin_flip", Mode::Prob),
    ("one_step", "coin_flip", Mode::Prob),
    ("gr", "gr", Mode::ProbReward),
    ("ho_gr", "ho_gr", Mode::ProbReward),
    ("ho_rw", "ho_rw", Mode::Prob),
    ("file_writing", "file_writing", Mode::Reach),
    ("file_writing", "file_writing_rm", Mode::OptReward),
];

pub fn path(file: &str) -> String {
    format!("{CORPUS}{file}")
}

pub fn read(file: &str) -> String {
    std::fs::read_to_string(path(file)).unwrap_or_else(|e| panic!("{file}: {e}"))
}

pub fn program(name: &str) -> Program {
    parse_program(&read(&format!("{name}.tvp")), &Signature::standard()).expect("benchmark parses")
}

pub fn spec(name: &str) -> Spec {
    Spec::from_json(&read(&format!("{name}.json"))).expect("spec loads")
}

pub fn load(prog: &str, spec: &str) -> Loaded {
    Loaded::from_texts(&read(&format!("{prog}.tvp")), &read(&format!("{spec}.json"))).expect("benchmark loads")
}

pub fn query(spec_name: &str, mode: Mode) -> InferenceQuery {
    InferenceQuery::new(mode, spec(spec_name)).expect("mode fits spec")
}

pub fn q(s: &str) -> Rational {
    parse_rational(s).expect("rational literal")
}

pub fn parse(text: &str) -> Program {
    parse_program(text, &Signature::standard()).unwrap_or_else(|e| panic!("{text}: {e}"))
}
