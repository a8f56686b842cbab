//! parse → typecheck → transform → evaluate → compare → report.

mod corpus;
mod export;

pub use corpus::{
    check_case, corpus_cases, corpus_check, generate_case, CorpusCase, CorpusFailure, CorpusSummary, CORPUS_FUELS,
};
pub use export::{export_product, term_json, Export};

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::automata::{InferenceQuery, Mode, Spec, SpecError};
use crate::exec;
use crate::rational::Rational;
use crate::semantics::{wp_iterate, wp_product, wp_source, wp_sync, EvalError, WpOp, WpResult};
use crate::sps::{simplify, transform_term, TransformError, TransformOutput};
use crate::syntax::{parse_program, typecheck, Context, ParseError, Program, Signature, Term, Type, TypeError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("input: {path}: {msg}")]
    Io { path: PathBuf, msg: String },
    #[error("config: {0}")]
    Config(String),
    #[error("parse: {0}")]
    Parse(#[from] ParseError),
    #[error("typecheck: {0}")]
    Type(#[from] TypeError),
    #[error("spec: {0}")]
    Spec(#[from] SpecError),
    #[error("transform: {0}")]
    Transform(#[from] TransformError),
    #[error("evaluate: {0}")]
    Eval(#[from] EvalError),
    #[error("export: {0}")]
    Export(String),
}

impl PipelineError {
    pub fn stage(&self) -> &'static str {
        match self {
            PipelineError::Io { .. } => "input",
            PipelineError::Config(_) => "config",
            PipelineError::Parse(_) => "parse",
            PipelineError::Type(_) => "typecheck",
            PipelineError::Spec(_) => "spec",
            PipelineError::Transform(_) => "transform",
            PipelineError::Eval(_) => "evaluate",
            PipelineError::Export(_) => "export",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub program_path: PathBuf,
    pub spec_path: PathBuf,
    pub mode: Mode,
    /// Defaults to the specification's initial state.
    pub initial_state: Option<String>,
    pub fuel_cap: u32,
    pub tol: Rational,
    pub output_format: OutputFormat,
    pub check_theorems: bool,
    /// Fuel at which lhs/mid/rhs are reported. Capped by `fuel_cap`.
    pub compare_fuel: u32,
    pub timings: bool,
}

impl RunConfig {
    pub fn new(program_path: impl Into<PathBuf>, spec_path: impl Into<PathBuf>, mode: Mode) -> Self {
        RunConfig {
            program_path: program_path.into(),
            spec_path: spec_path.into(),
            mode,
            initial_state: None,
            fuel_cap: 500,
            tol: Rational::new(1.into(), 1_000_000_000.into()),
            output_format: OutputFormat::Text,
            check_theorems: false,
            compare_fuel: 5,
            timings: false,
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.fuel_cap < 1 {
            return Err(PipelineError::Config("fuelCap must be at least 1".into()));
        }
        if self.tol <= Rational::from_integer(0.into()) {
            return Err(PipelineError::Config("tol must be positive".into()));
        }
        Ok(())
    }
}

pub fn read_file(path: &Path) -> Result<String, PipelineError> {
    std::fs::read_to_string(path).map_err(|e| PipelineError::Io { path: path.to_path_buf(), msg: e.to_string() })
}

pub fn digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// A program and specification taken through parsing, checking and the
/// product transformation.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub source: String,
    pub spec_source: String,
    pub program: Program,
    pub ty: Type,
    pub spec: Spec,
    pub product: TransformOutput,
}

impl Loaded {
    pub fn from_texts(source: &str, spec_source: &str) -> Result<Loaded, PipelineError> {
        let spec = Spec::from_json(spec_source)?;
        Self::with_spec(source, spec, spec_source)
    }

    pub fn with_spec(source: &str, spec: Spec, spec_source: &str) -> Result<Loaded, PipelineError> {
        let program = parse_program(source, &Signature::standard())?;
        let ty = typecheck(&Context::new(), &program.term, &program.signature)?;
        if !ty.is_ground() {
            return Err(EvalError::NonGround(ty.to_string()).into());
        }
        let lifted = crate::sps::transform_signature(&program.signature, &spec)?;
        let product = transform_term(&program.term, &Context::new(), &program.signature)?;
        debug_assert_eq!(product.signature, lifted);
        Ok(Loaded { source: source.to_string(), spec_source: spec_source.to_string(), program, ty, spec, product })
    }

    pub fn from_paths(program: &Path, spec: &Path) -> Result<Loaded, PipelineError> {
        Self::from_texts(&read_file(program)?, &read_file(spec)?)
    }

    pub fn query(&self, mode: Mode) -> Result<InferenceQuery, PipelineError> {
        Ok(InferenceQuery::new(mode, self.spec.clone())?)
    }

    pub fn simplified(&self) -> Term {
        simplify(&self.product.term)
    }
}

/// The three sides at one fuel.
#[derive(Debug, Clone)]
pub struct Sides {
    pub lhs: WpResult,
    pub mid: WpResult,
    pub rhs: WpResult,
}

impl Sides {
    pub fn equal(&self) -> bool {
        self.lhs.same_values(&self.mid) && self.mid.same_values(&self.rhs)
    }
}

pub fn three_way(loaded: &Loaded, q: &InferenceQuery, fuel: u32) -> Result<Sides, PipelineError> {
    let p = &loaded.program;
    Ok(Sides {
        lhs: wp_source(&p.term, &p.signature, q, fuel)?,
        mid: wp_sync(&p.term, &p.signature, q, fuel)?,
        rhs: wp_product(&loaded.product.term, &loaded.product.signature, q, fuel)?,
    })
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TheoremCheck {
    pub fuels: u32,
    pub all_equal: bool,
    pub first_mismatch: Option<u32>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Timings {
    pub load_ms: f64,
    pub compare_ms: f64,
    pub limit_ms: f64,
    pub theorems_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub program_digest: String,
    pub spec_digest: String,
    pub mode: Mode,
    pub initial_state: String,
    pub compare_fuel: u32,
    pub lhs: WpResult,
    pub mid: WpResult,
    pub rhs: WpResult,
    pub equal_at_fuel: bool,
    pub limit_estimate: WpResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theorem_check: Option<TheoremCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

impl Report {
    /// 0 converged, 2 not converged, 3 theorem failure.
    pub fn exit_code(&self) -> i32 {
        let theorems_ok = self.equal_at_fuel && self.theorem_check.as_ref().is_none_or(|t| t.all_equal);
        if !theorems_ok {
            3
        } else if !self.limit_estimate.converged {
            2
        } else {
            0
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("program {}\nspec    {}\nmode    {}\n", self.program_digest, self.spec_digest, self.mode));
        s.push_str(&format!(
            "fuel {}: source = sync = product: {}\n",
            self.compare_fuel,
            if self.equal_at_fuel { "yes" } else { "NO" }
        ));
        if let Some(t) = &self.theorem_check {
            match t.first_mismatch {
                None => s.push_str(&format!("three-way equality at fuels 1..{}: ok\n", t.fuels)),
                Some(n) => s.push_str(&format!("three-way equality FAILS at fuel {n}\n")),
            }
        }
        let l = &self.limit_estimate;
        s.push_str(&format!(
            "limit estimate (fuel {}, delta {}, {}):\n",
            l.fuel,
            l.delta,
            if l.converged { "converged" } else { "not converged" }
        ));
        for (st, v) in &l.per_state {
            let mark = if *st == self.initial_state { "  <- initial" } else { "" };
            s.push_str(&format!("  {st}: {v}{mark}\n"));
        }
        if let Some(t) = &self.timings {
            s.push_str(&format!(
                "timings ms: load {:.1}, compare {:.1}, limit {:.1}, theorems {:.1}\n",
                t.load_ms, t.compare_ms, t.limit_ms, t.theorems_ms
            ));
        }
        s
    }
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1000.0
}

/// Exact three-way equality at every fuel `1..=cap`. Returns the first
/// fuel where the sides differ.
pub fn check_theorems(loaded: &Loaded, q: &InferenceQuery, cap: u32) -> Result<Option<u32>, PipelineError> {
    let results = exec::map((1..=cap).collect(), |n| three_way(loaded, q, n).map(|s| (n, s.equal())));
    for r in results {
        let (n, ok) = r?;
        if !ok {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

pub fn run_verification(cfg: &RunConfig) -> Result<Report, PipelineError> {
    cfg.validate()?;
    let t0 = Instant::now();
    let loaded = Loaded::from_paths(&cfg.program_path, &cfg.spec_path)?;
    let q = loaded.query(cfg.mode)?;
    let initial_state = match &cfg.initial_state {
        Some(label) => {
            let st = loaded.spec.parse_label(label)?;
            loaded.spec.label(&st)
        }
        None => loaded.spec.label(&loaded.spec.initial_state()),
    };
    let load_ms = ms(t0);

    let t1 = Instant::now();
    let compare_fuel = cfg.compare_fuel.min(cfg.fuel_cap);
    let sides = three_way(&loaded, &q, compare_fuel)?;
    let equal_at_fuel = sides.equal();
    let compare_ms = ms(t1);

    let t2 = Instant::now();
    let simplified = loaded.simplified();
    let op = WpOp::Product { term: &simplified, sig: &loaded.product.signature, query: &q };
    let limit_estimate = wp_iterate(&op, &cfg.tol, cfg.fuel_cap)?;
    let limit_ms = ms(t2);

    let t3 = Instant::now();
    let theorem_check = if cfg.check_theorems {
        let first_mismatch = check_theorems(&loaded, &q, cfg.fuel_cap)?;
        Some(TheoremCheck { fuels: cfg.fuel_cap, all_equal: first_mismatch.is_none(), first_mismatch })
    } else {
        None
    };
    let theorems_ms = ms(t3);

    Ok(Report {
        program_digest: digest(&loaded.source),
        spec_digest: digest(&loaded.spec_source),
        mode: cfg.mode,
        initial_state,
        compare_fuel,
        lhs: sides.lhs,
        mid: sides.mid,
        rhs: sides.rhs,
        equal_at_fuel,
        limit_estimate,
        theorem_check,
        timings: cfg.timings.then_some(Timings { load_ms, compare_ms, limit_ms, theorems_ms }),
    })
}
