use super::schedule::{ParameterSchedule, StageKind};
use crate::error::{Error, Result};
use crate::primitives::{
    additive_adjustment, additive_adjustment_with, and_type_repetition, attach_guess_registers, marriott_watrous,
    one_shot_phase_estimation, or_type_repetition, reflection, reject_all, reject_when, uniform_guess,
    GuessRegisters, Threshold,
};
use crate::registers::{Comparison, Operand, ProjectionSpec};
use crate::verifier::VerifierInstance;

/// Applies one combinator stage that does not involve the guess.
pub(crate) fn apply_plain(v: &VerifierInstance, kind: &StageKind) -> Result<VerifierInstance> {
    match *kind {
        StageKind::PhaseEstimation {
            l,
            t_numerator,
            eps_inverse,
            ..
        } => one_shot_phase_estimation(v, t_numerator as f64 / (1u64 << l) as f64, l, 1.0 / eps_inverse as f64),
        StageKind::MarriottWatrous { n, t } => marriott_watrous(v, n, t),
        StageKind::AndRepetition { n } => and_type_repetition(v, n),
        StageKind::OrRepetition { n } => or_type_repetition(v, n),
        StageKind::Additive { l, k: Some(k) } => additive_adjustment(v, l, k),
        StageKind::Reflection => reflection(v),
        _ => Err(Error::validation("stage", format!("`{}` needs a guess register", kind.name()))),
    }
}

/// The whole schedule as one circuit around `v`, with a coherent guess
/// register where the schedule has one.
pub fn build_literal(v: &VerifierInstance, schedule: &ParameterSchedule) -> Result<(VerifierInstance, Option<GuessRegisters>)> {
    let mut cur = v.clone();
    let mut regs: Option<GuessRegisters> = None;
    let missing = || Error::validation("stage", "guess stage before the guess registers");
    for stage in &schedule.stages {
        cur = match &stage.kind {
            StageKind::GuessRegisters { l } => {
                let (next, r) = attach_guess_registers(&cur, *l)?;
                regs = Some(r);
                next
            }
            StageKind::Additive { l, k: None } => {
                let r = regs.as_ref().ok_or_else(missing)?;
                additive_adjustment_with(&cur, *l, &Threshold::Register(r.guess.clone()))?
            }
            StageKind::RejectBelow { threshold } => {
                let r = regs.as_ref().ok_or_else(missing)?;
                let below = ProjectionSpec::Compare {
                    lhs: Operand::one_based(&r.guess),
                    cmp: Comparison::Lt,
                    rhs: Operand::Constant(*threshold),
                };
                reject_when(&cur, &below)?
            }
            StageKind::GuessMixture => uniform_guess(&cur, regs.as_ref().ok_or_else(missing)?)?,
            other => apply_plain(&cur, other)?,
        };
    }
    Ok((cur, regs))
}

/// The guess-`k` pipeline up to (not including) the random choice of guess.
pub fn build_guess_instance(v: &VerifierInstance, schedule: &ParameterSchedule, k: u64) -> Result<VerifierInstance> {
    let mut cur = v.clone();
    for stage in &schedule.stages {
        cur = match &stage.kind {
            StageKind::GuessRegisters { l } => {
                if k == 0 || k > 1u64 << l {
                    return Err(Error::validation("guess", format!("k = {k} outside [1, {}]", 1u64 << l)));
                }
                continue;
            }
            StageKind::Additive { l, k: None } => additive_adjustment(&cur, *l, k)?,
            StageKind::RejectBelow { threshold } if k < *threshold => reject_all(&cur)?,
            StageKind::RejectBelow { .. } => continue,
            StageKind::GuessMixture => break,
            other => apply_plain(&cur, other)?,
        };
    }
    Ok(cur)
}
