use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{Construction, Cutoff, PipelineConfig};
use crate::error::{Error, Result};
use crate::numerics::{ceil_log2, ceil_log2_real, ceil_real, snap};
use crate::primitives::{counter_width, phase_register_width, quoted_phase_estimation_calls};

pub const SCHEDULE_FORMAT: &str = "witamp-schedule";
pub const SCHEDULE_VERSION: u32 = 1;

/// Decimal rendering with 17 significant digits, enough to round-trip an f64.
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

/// One step of a pipeline with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "kebab-case")]
pub enum StageKind {
    PhaseEstimation {
        l: u32,
        t_numerator: u64,
        /// `1/ε`; every schedule uses a reciprocal-integer failure probability.
        eps_inverse: u64,
        phase_qubits: u32,
    },
    MarriottWatrous {
        n: u64,
        t: u64,
    },
    AndRepetition {
        n: u64,
    },
    OrRepetition {
        n: u64,
    },
    GuessRegisters {
        l: u32,
    },
    /// Additive adjustment against the guess register, or a constant guess.
    Additive {
        l: u32,
        k: Option<u64>,
    },
    /// Rejects every guess below the threshold.
    RejectBelow {
        threshold: u64,
    },
    Reflection,
    GuessMixture,
}

impl StageKind {
    pub fn name(&self) -> &'static str {
        match self {
            StageKind::PhaseEstimation { .. } => "phase-estimation",
            StageKind::MarriottWatrous { .. } => "marriott-watrous",
            StageKind::AndRepetition { .. } => "and-repetition",
            StageKind::OrRepetition { .. } => "or-repetition",
            StageKind::GuessRegisters { .. } => "guess-registers",
            StageKind::Additive { .. } => "additive-adjustment",
            StageKind::RejectBelow { .. } => "reject",
            StageKind::Reflection => "reflection",
            StageKind::GuessMixture => "uniform-guess",
        }
    }

    pub fn eps(&self) -> Option<f64> {
        match self {
            StageKind::PhaseEstimation { eps_inverse, .. } => Some(1.0 / *eps_inverse as f64),
            _ => None,
        }
    }

    /// Ancilla qubits this stage appends.
    pub fn extra_qubits(&self) -> u32 {
        match *self {
            StageKind::PhaseEstimation { phase_qubits, .. } => phase_qubits,
            StageKind::MarriottWatrous { n, .. } => 2 * n as u32 + 1 + counter_width(n),
            StageKind::AndRepetition { n } | StageKind::OrRepetition { n } => counter_width(n),
            StageKind::GuessRegisters { l } => 2 * l,
            StageKind::Additive { l, .. } => l + 1,
            StageKind::RejectBelow { .. } | StageKind::Reflection | StageKind::GuessMixture => 0,
        }
    }

    /// Calls to the base verifier and its inverse after this stage, given the
    /// counts of the circuit it wraps.
    pub fn calls_after(&self, (a, b): (u64, u64)) -> (u64, u64) {
        let both = a + b;
        match *self {
            StageKind::PhaseEstimation { phase_qubits, .. } => {
                let q = both * ((1u64 << phase_qubits) - 1);
                (q, q)
            }
            StageKind::MarriottWatrous { n, .. } | StageKind::AndRepetition { n } | StageKind::OrRepetition { n } => {
                (n * both, n * both)
            }
            StageKind::Reflection => (both, both),
            StageKind::GuessRegisters { .. }
            | StageKind::Additive { .. }
            | StageKind::RejectBelow { .. }
            | StageKind::GuessMixture => (a, b),
        }
    }
}

/// Whether a target applies to the instance, or to each guess separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetScope {
    Instance,
    /// Completeness for the best guess, soundness for every guess.
    PerGuess,
}

/// Completeness and soundness a stage promises for yes- and no-instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Target {
    /// Named stage this target closes.
    pub label: String,
    pub anchor: String,
    pub associated_p: u64,
    pub completeness: f64,
    pub soundness: f64,
    pub completeness_decimal: String,
    pub soundness_decimal: String,
    pub scope: TargetScope,
}

impl Target {
    fn new(label: Cutoff, anchor: &str, p: u64, completeness: f64, soundness: f64, scope: TargetScope) -> Self {
        Target {
            label: label.name().to_string(),
            anchor: anchor.to_string(),
            associated_p: p,
            completeness,
            soundness,
            completeness_decimal: sig17(completeness),
            soundness_decimal: sig17(soundness),
            scope,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleStage {
    pub index: usize,
    #[serde(flatten)]
    pub kind: StageKind,
    /// Ancillas appended by this stage.
    pub extra_qubits: u32,
    /// Cumulative calls to the base verifier and its inverse after this stage.
    pub calls_v: u64,
    pub calls_v_dagger: u64,
    /// The quoted closed-form call count, logged for comparison.
    pub reference_calls: Option<u64>,
    pub target: Option<Target>,
}

/// Phase-estimation precision and threshold derived from `(c, s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseParameters {
    pub l: u32,
    pub t_numerator: u64,
    pub t: f64,
    pub t_exact: f64,
    pub t_exact_decimal: String,
    pub arccos_gap: f64,
    pub arccos_gap_decimal: String,
}

/// `(c − s)/(4√(6p)) > 2^{−p}` for the random-guess stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideCondition {
    pub p: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub lhs_decimal: String,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSchedule {
    pub format: String,
    pub version: u32,
    pub construction: Construction,
    pub cutoff: Cutoff,
    pub p: u64,
    pub c: f64,
    pub s: f64,
    pub phase: Option<PhaseParameters>,
    pub q: Option<u64>,
    pub guess_width: Option<u32>,
    pub guess_threshold: Option<u64>,
    pub side_condition: Option<SideCondition>,
    pub stages: Vec<ScheduleStage>,
    pub predicted_extra_qubits: u32,
    pub predicted_calls_v: u64,
    pub predicted_calls_v_dagger: u64,
}

impl ParameterSchedule {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Targets in stage order.
    pub fn targets(&self) -> impl Iterator<Item = (usize, &Target)> {
        self.stages.iter().filter_map(|s| s.target.as_ref().map(|t| (s.index, t)))
    }

    pub fn final_target(&self) -> Option<&Target> {
        self.stages.last().and_then(|s| s.target.as_ref())
    }
}

fn log2(x: f64) -> f64 {
    x.log2()
}

fn ceil_u64(x: f64) -> u64 {
    ceil_real(x).max(0) as u64
}

/// Precision `l` and threshold numerator `t·2^l` for the gap `(c, s)`.
pub fn phase_parameters(c: f64, s: f64) -> PhaseParameters {
    let (ac, asv) = (c.sqrt().acos(), s.sqrt().acos());
    let gap = asv - ac;
    let l = ceil_log2_real(2.0 * PI / gap).max(1) as u32;
    let t_exact = (ac + asv) / (2.0 * PI);
    let scaled = snap(t_exact * (1u64 << l) as f64);
    let floor = scaled.floor();
    // Nearest grid point, ties toward zero.
    let mut t_numerator = if scaled - floor > 0.5 { floor + 1.0 } else { floor } as u64;
    t_numerator = t_numerator.min(1u64 << (l - 1));
    PhaseParameters {
        l,
        t_numerator,
        t: t_numerator as f64 / (1u64 << l) as f64,
        t_exact,
        t_exact_decimal: sig17(t_exact),
        arccos_gap: gap,
        arccos_gap_decimal: sig17(gap),
    }
}

struct Builder {
    c: f64,
    s: f64,
    stages: Vec<(StageKind, Option<Target>)>,
    phase: PhaseParameters,
    q: Option<u64>,
    guess_width: Option<u32>,
    guess_threshold: Option<u64>,
    side_condition: Option<SideCondition>,
}

impl Builder {
    fn push(&mut self, kind: StageKind) {
        self.stages.push((kind, None));
    }

    fn close(&mut self, target: Target) {
        if let Some(last) = self.stages.last_mut() {
            last.1 = Some(target);
        }
    }

    fn phase_estimation(&mut self, eps_inverse: u64) -> Result<()> {
        if eps_inverse < 2 {
            return Err(Error::validation(
                "failure probability",
                format!("ε = 1/{eps_inverse} is not below 1; use p ≥ 2"),
            ));
        }
        let l = self.phase.l;
        self.push(StageKind::PhaseEstimation {
            l,
            t_numerator: self.phase.t_numerator,
            eps_inverse,
            phase_qubits: phase_register_width(l, 1.0 / eps_inverse as f64),
        });
        Ok(())
    }

    // Phase-estimation construction.

    fn pe_mild(&mut self, p: u64) -> Result<()> {
        self.phase_estimation(p)?;
        let e = 1.0 / p as f64;
        self.close(Target::new(Cutoff::Mild, "Mild amplification: (1 - 1/p, 1/p)", p, 1.0 - e, e, TargetScope::Instance));
        Ok(())
    }

    fn pe_soundness(&mut self, p: u64) -> Result<()> {
        self.pe_mild(2 * p + 4)?;
        let n = ceil_u64(p as f64 / (2.0 * log2((2 * p + 4) as f64)));
        self.push(StageKind::AndRepetition { n });
        self.close(Target::new(
            Cutoff::Soundness,
            "Soundness reduction: (1/2, 2^-p)",
            p,
            0.5,
            (-(p as f64)).exp2(),
            TargetScope::Instance,
        ));
        Ok(())
    }

    fn pe_full(&mut self, p: u64) -> Result<()> {
        self.pe_soundness(p + ceil_log2(p + 2) as u64)?;
        self.push(StageKind::OrRepetition { n: p.div_ceil(2) });
        self.close_full(p);
        Ok(())
    }

    fn close_full(&mut self, p: u64) {
        let e = (-(p as f64)).exp2();
        self.close(Target::new(Cutoff::Full, "Error reduction: (1 - 2^-p, 2^-p)", p, 1.0 - e, e, TargetScope::Instance));
    }

    // Hybrid construction.

    fn hybrid_very_mild(&mut self) -> Result<()> {
        self.phase_estimation(4)?;
        self.close(Target::new(
            Cutoff::VeryMild,
            "Very mild amplification: (3/4, 1/4)",
            1,
            0.75,
            0.25,
            TargetScope::Instance,
        ));
        Ok(())
    }

    fn hybrid_mild(&mut self, p: u64) -> Result<()> {
        let n = ceil_u64(4.0 * (p as f64).ln());
        if n == 0 {
            return Err(Error::validation(
                "Marriott-Watrous rounds",
                format!("N = ⌈4 ln p⌉ = 0 at p = {p}; use p ≥ 2"),
            ));
        }
        self.hybrid_very_mild()?;
        self.push(StageKind::MarriottWatrous { n, t: n });
        let e = 1.0 / p as f64;
        self.close(Target::new(Cutoff::Mild, "Mild amplification: (1 - 1/p, 1/p)", p, 1.0 - e, e, TargetScope::Instance));
        Ok(())
    }

    fn hybrid_soundness(&mut self, p: u64) -> Result<()> {
        self.hybrid_mild(4 * p * p)?;
        let n = ceil_u64(p as f64 / (2.0 * log2((2 * p) as f64)));
        self.push(StageKind::AndRepetition { n });
        self.close(Target::new(
            Cutoff::Soundness,
            "Soundness reduction: (1 - 1/p, 2^-2p)",
            p,
            1.0 - 1.0 / p as f64,
            (-2.0 * p as f64).exp2(),
            TargetScope::Instance,
        ));
        Ok(())
    }

    fn hybrid_full(&mut self, p: u64) -> Result<()> {
        if p < 2 {
            return Err(Error::validation(
                "error exponent",
                "the OR stage divides by log p, which vanishes at p = 1; use p ≥ 2",
            ));
        }
        self.hybrid_soundness(p)?;
        self.push(StageKind::OrRepetition {
            n: ceil_u64(p as f64 / (2.0 * log2(p as f64))),
        });
        self.close_full(p);
        Ok(())
    }

    // Random-guess construction.

    fn gap(&self) -> f64 {
        self.c - self.s
    }

    fn guess_mild(&mut self, p: u64) -> Result<()> {
        let gap = self.gap();
        let l = ceil_real(0.5 * log2(p as f64 / (gap * gap))).max(0) as u32;
        if l == 0 || l > 20 {
            return Err(Error::validation("guess width", format!("l = {l} outside [1, 20]")));
        }
        let threshold = ceil_u64((1u64 << l) as f64 * self.c);
        self.guess_width = Some(l);
        self.guess_threshold = Some(threshold);
        self.push(StageKind::GuessRegisters { l });
        self.push(StageKind::Additive { l, k: None });
        self.push(StageKind::RejectBelow { threshold });
        self.push(StageKind::Reflection);
        self.close(Target::new(
            Cutoff::MildGuess,
            "Mild completeness with guess: (1 - (c-s)^2/p, 1 - (c-s)^2)",
            p,
            1.0 - gap * gap / p as f64,
            1.0 - gap * gap,
            TargetScope::PerGuess,
        ));
        Ok(())
    }

    fn guess_soundness(&mut self, p: u64) -> Result<()> {
        self.guess_mild(6 * p)?;
        let gap = self.gap();
        self.push(StageKind::AndRepetition {
            n: ceil_u64(p as f64 / (2.0 * gap * gap)),
        });
        self.close(Target::new(
            Cutoff::SoundnessGuess,
            "Soundness reduction with guess: (1/2, 2^-p)",
            p,
            0.5,
            (-(p as f64)).exp2(),
            TargetScope::PerGuess,
        ));
        Ok(())
    }

    fn guess_random(&mut self, p: u64) -> Result<()> {
        let gap = self.gap();
        let lhs = gap / (4.0 * (6.0 * p as f64).sqrt());
        let rhs = (-(p as f64)).exp2();
        let holds = lhs > rhs;
        self.side_condition = Some(SideCondition {
            p,
            lhs,
            rhs,
            lhs_decimal: sig17(lhs),
            holds,
        });
        if !holds {
            return Err(Error::validation(
                "random-guess side condition",
                format!("(c - s)/(4 sqrt(6p)) = {lhs:.6} does not exceed 2^-p = {rhs:.6} at p = {p}"),
            ));
        }
        self.guess_soundness(p)?;
        self.push(StageKind::GuessMixture);
        self.close(Target::new(
            Cutoff::RandomGuess,
            "Random guess: ((c-s)/(4 sqrt(6p)), 2^-p)",
            p,
            lhs,
            rhs,
            TargetScope::Instance,
        ));
        Ok(())
    }

    fn guess_full(&mut self, p: u64) -> Result<()> {
        let gap = self.gap();
        let q = ceil_u64(2.0 * (p as f64 + log2(6.0 * p as f64 / gap) + 1.0));
        self.q = Some(q);
        self.guess_random(q)?;
        let n = ceil_u64(2.0 * (6.0 * q as f64).sqrt() / gap * p as f64);
        self.push(StageKind::OrRepetition { n });
        self.close_full(p);
        Ok(())
    }
}

/// Every derived quantity of the run described by `cfg`.
pub fn parameter_schedule(cfg: &PipelineConfig) -> Result<ParameterSchedule> {
    cfg.validate()?;
    let mut b = Builder {
        c: cfg.c,
        s: cfg.s,
        stages: Vec::new(),
        phase: phase_parameters(cfg.c, cfg.s),
        q: None,
        guess_width: None,
        guess_threshold: None,
        side_condition: None,
    };
    let p = cfg.p;
    match (cfg.construction, cfg.cutoff()) {
        (Construction::SimplePe, Cutoff::Mild) => b.pe_mild(p)?,
        (Construction::SimplePe, Cutoff::Soundness) => b.pe_soundness(p)?,
        (Construction::SimplePe, _) => b.pe_full(p)?,
        (Construction::Hybrid, Cutoff::VeryMild) => b.hybrid_very_mild()?,
        (Construction::Hybrid, Cutoff::Mild) => b.hybrid_mild(p)?,
        (Construction::Hybrid, Cutoff::Soundness) => b.hybrid_soundness(p)?,
        (Construction::Hybrid, _) => b.hybrid_full(p)?,
        (Construction::RandomGuess, Cutoff::MildGuess) => b.guess_mild(p)?,
        (Construction::RandomGuess, Cutoff::SoundnessGuess) => b.guess_soundness(p)?,
        (Construction::RandomGuess, Cutoff::RandomGuess) => b.guess_random(p)?,
        (Construction::RandomGuess, _) => b.guess_full(p)?,
    }

    let mut calls = (1u64, 0u64);
    let mut extra = 0;
    let mut stages = Vec::with_capacity(b.stages.len());
    for (index, (kind, target)) in b.stages.into_iter().enumerate() {
        calls = kind.calls_after(calls);
        extra += kind.extra_qubits();
        let reference_calls = match kind {
            StageKind::PhaseEstimation { l, eps_inverse, .. } => {
                Some(quoted_phase_estimation_calls(l, 1.0 / eps_inverse as f64))
            }
            _ => None,
        };
        stages.push(ScheduleStage {
            index,
            extra_qubits: kind.extra_qubits(),
            kind,
            calls_v: calls.0,
            calls_v_dagger: calls.1,
            reference_calls,
            target,
        });
    }
    let uses_phase = stages.iter().any(|s| matches!(s.kind, StageKind::PhaseEstimation { .. }));
    Ok(ParameterSchedule {
        format: SCHEDULE_FORMAT.to_string(),
        version: SCHEDULE_VERSION,
        construction: cfg.construction,
        cutoff: cfg.cutoff(),
        p,
        c: cfg.c,
        s: cfg.s,
        phase: uses_phase.then_some(b.phase),
        q: b.q,
        guess_width: b.guess_width,
        guess_threshold: b.guess_threshold,
        side_condition: b.side_condition,
        stages,
        predicted_extra_qubits: extra,
        predicted_calls_v: calls.0,
        predicted_calls_v_dagger: calls.1,
    })
}
