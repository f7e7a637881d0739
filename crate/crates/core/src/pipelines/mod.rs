//! End-to-end error reduction: the three constructions, their parameter
//! schedules, literal circuit assembly, and exact stage-by-stage evaluation.
//!
//! A pipeline is a list of stages. [`parameter_schedule`] derives the list
//! from a [`PipelineConfig`], [`build_literal`] assembles it into one
//! [`VerifierInstance`], and [`evaluate`] computes the acceptance operator
//! after every stage without ever holding the full ancilla space.

mod build;
mod evaluate;
mod schedule;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::primitives::GuessRegisters;
use crate::tolerance::{Budget, Tolerances};
use crate::verifier::VerifierInstance;

pub use build::{build_guess_instance, build_literal};
pub use evaluate::{evaluate, Evaluation, GuessAcceptance, Method, StageEvaluation};
pub use schedule::{
    parameter_schedule, phase_parameters, sig17, PhaseParameters, ScheduleStage, SideCondition, StageKind, Target, TargetScope,
    ParameterSchedule, SCHEDULE_FORMAT, SCHEDULE_VERSION,
};

/// Which of the three constructions to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Construction {
    SimplePe,
    Hybrid,
    RandomGuess,
}

impl Construction {
    pub fn name(self) -> &'static str {
        match self {
            Construction::SimplePe => "simple-pe",
            Construction::Hybrid => "hybrid",
            Construction::RandomGuess => "random-guess",
        }
    }

    /// The intermediate stages a run may stop after, innermost first.
    pub fn cutoffs(self) -> &'static [Cutoff] {
        match self {
            Construction::SimplePe => &[Cutoff::Mild, Cutoff::Soundness, Cutoff::Full],
            Construction::Hybrid => &[Cutoff::VeryMild, Cutoff::Mild, Cutoff::Soundness, Cutoff::Full],
            Construction::RandomGuess => &[
                Cutoff::MildGuess,
                Cutoff::SoundnessGuess,
                Cutoff::RandomGuess,
                Cutoff::Full,
            ],
        }
    }
}

impl std::str::FromStr for Construction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simple-pe" => Ok(Construction::SimplePe),
            "hybrid" => Ok(Construction::Hybrid),
            "random-guess" => Ok(Construction::RandomGuess),
            other => Err(Error::validation("construction", format!("unknown construction `{other}`"))),
        }
    }
}

/// A named intermediate stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Cutoff {
    VeryMild,
    Mild,
    Soundness,
    MildGuess,
    SoundnessGuess,
    RandomGuess,
    Full,
}

impl Cutoff {
    pub fn name(self) -> &'static str {
        match self {
            Cutoff::VeryMild => "very-mild",
            Cutoff::Mild => "mild",
            Cutoff::Soundness => "soundness",
            Cutoff::MildGuess => "mild-guess",
            Cutoff::SoundnessGuess => "soundness-guess",
            Cutoff::RandomGuess => "random-guess",
            Cutoff::Full => "full",
        }
    }
}

impl std::str::FromStr for Cutoff {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Cutoff::VeryMild,
            Cutoff::Mild,
            Cutoff::Soundness,
            Cutoff::MildGuess,
            Cutoff::SoundnessGuess,
            Cutoff::RandomGuess,
            Cutoff::Full,
        ]
        .into_iter()
        .find(|c| c.name() == s)
        .ok_or_else(|| Error::validation("cutoff", format!("unknown stage `{s}`")))
    }
}

/// Target error exponent, promise gap and construction for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub p: u64,
    pub c: f64,
    pub s: f64,
    pub construction: Construction,
    #[serde(default)]
    pub cutoff: Option<Cutoff>,
    #[serde(default)]
    pub seed: u64,
}

impl PipelineConfig {
    pub fn new(construction: Construction, p: u64, c: f64, s: f64) -> Self {
        PipelineConfig {
            p,
            c,
            s,
            construction,
            cutoff: None,
            seed: 0,
        }
    }

    pub fn with_cutoff(mut self, cutoff: Cutoff) -> Self {
        self.cutoff = Some(cutoff);
        self
    }

    pub fn cutoff(&self) -> Cutoff {
        self.cutoff.unwrap_or(Cutoff::Full)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::validation("error exponent", "p must be at least 1"));
        }
        if !(self.c > 0.0 && self.c <= 1.0) {
            return Err(Error::validation("completeness", format!("c = {} outside (0, 1]", self.c)));
        }
        if !(0.0..1.0).contains(&self.s) {
            return Err(Error::validation("soundness", format!("s = {} outside [0, 1)", self.s)));
        }
        if self.c <= self.s {
            return Err(Error::validation(
                "promise gap",
                format!("need c > s, got c = {} and s = {}", self.c, self.s),
            ));
        }
        let cutoff = self.cutoff();
        if !self.construction.cutoffs().contains(&cutoff) {
            return Err(Error::validation(
                "cutoff",
                format!("`{}` is not a stage of {}", cutoff.name(), self.construction.name()),
            ));
        }
        Ok(())
    }
}

/// A pipeline applied to one verifier.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub schedule: ParameterSchedule,
    /// The whole pipeline as one circuit.
    pub instance: VerifierInstance,
    pub evaluation: Evaluation,
    /// Guess and partner registers of the coherent guess, if any.
    pub guess_registers: Option<GuessRegisters>,
}

/// One fixed guess of the random-guess construction.
#[derive(Debug, Clone)]
pub struct GuessOutcome {
    pub k: u64,
    /// The per-guess pipeline up to the AND stage, with `k` as a constant.
    pub instance: VerifierInstance,
    pub max_acceptance: f64,
}

/// Per-guess acceptances and their uniform average.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixtureSummary {
    pub guess_width: u32,
    pub per_guess_max: Vec<f64>,
    pub best_guess: u64,
    /// Largest eigenvalue of the guess-averaged operator.
    pub mixture_max: f64,
}

#[derive(Debug, Clone)]
pub struct RandomGuessRun {
    pub run: PipelineRun,
    pub per_guess: Vec<GuessOutcome>,
    pub mixture: MixtureSummary,
}

fn run_checked(v: &VerifierInstance, cfg: &PipelineConfig, want: Construction, budget: &Budget) -> Result<PipelineRun> {
    if cfg.construction != want {
        return Err(Error::validation(
            "construction",
            format!("expected {}, config says {}", want.name(), cfg.construction.name()),
        ));
    }
    run_pipeline(v, cfg, budget, &Tolerances::default())
}

/// Builds and evaluates whichever construction `cfg` names.
pub fn run_pipeline(v: &VerifierInstance, cfg: &PipelineConfig, budget: &Budget, tol: &Tolerances) -> Result<PipelineRun> {
    let schedule = parameter_schedule(cfg)?;
    let (instance, guess_registers) = build_literal(v, &schedule)?;
    let evaluation = evaluate(v, &schedule, budget, tol)?;
    Ok(PipelineRun {
        schedule,
        instance,
        evaluation,
        guess_registers,
    })
}

/// Phase-estimation mild amplification, AND-type soundness reduction, then
/// OR-type completeness amplification.
pub fn simple_pe_pipeline(v: &VerifierInstance, cfg: &PipelineConfig) -> Result<PipelineRun> {
    run_checked(v, cfg, Construction::SimplePe, &Budget::default())
}

/// Phase estimation with ε = ¼, Marriott-Watrous amplification, then AND-
/// and OR-type repetition.
pub fn hybrid_pipeline(v: &VerifierInstance, cfg: &PipelineConfig) -> Result<PipelineRun> {
    run_checked(v, cfg, Construction::Hybrid, &Budget::default())
}

/// Additive adjustment and reflection for every guess, AND-type repetition,
/// a uniformly random guess, then OR-type repetition.
///
/// With `k` given, only that guess is built explicitly.
pub fn random_guess_pipeline(v: &VerifierInstance, cfg: &PipelineConfig, k: Option<u64>) -> Result<RandomGuessRun> {
    let run = run_checked(v, cfg, Construction::RandomGuess, &Budget::default())?;
    let l = run
        .schedule
        .stages
        .iter()
        .find_map(|s| match s.kind {
            StageKind::GuessRegisters { l } => Some(l),
            _ => None,
        })
        .ok_or_else(|| Error::validation("guess", "schedule has no guess stage"))?;
    let guesses: Vec<u64> = match k {
        Some(k) if k == 0 || k > 1u64 << l => {
            return Err(Error::validation("guess", format!("k = {k} outside [1, {}]", 1u64 << l)))
        }
        Some(k) => vec![k],
        None => (1..=1u64 << l).collect(),
    };
    let guess_eval = run
        .evaluation
        .stages
        .iter()
        .rev()
        .find(|s| s.per_guess.is_some())
        .and_then(|s| s.per_guess.clone())
        .unwrap_or_default();
    let per_guess_max: Vec<f64> = guess_eval.iter().map(|g| g.max_acceptance).collect();
    let mut per_guess = Vec::with_capacity(guesses.len());
    for &k in &guesses {
        per_guess.push(GuessOutcome {
            k,
            instance: build_guess_instance(v, &run.schedule, k)?,
            max_acceptance: per_guess_max[(k - 1) as usize],
        });
    }
    let best = per_guess_max
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &x)| if x > acc.1 { (i, x) } else { acc })
        .0;
    let mixture_max = run
        .evaluation
        .stages
        .iter()
        .rev()
        .find_map(|s| match s.kind {
            StageKind::GuessMixture => Some(s.max_acceptance),
            _ => s.mixture_max,
        })
        .unwrap_or(0.0);
    let mixture = MixtureSummary {
        guess_width: l,
        per_guess_max,
        best_guess: best as u64 + 1,
        mixture_max,
    };
    Ok(RandomGuessRun { run, per_guess, mixture })
}
