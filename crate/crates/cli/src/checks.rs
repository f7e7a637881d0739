//! Named property checks over seeded random instances.

use serde::Serialize;
use witamp_core::oracle::branch_sum_acceptance;
use witamp_core::pipelines::{phase_parameters, run_pipeline};
use witamp_core::verifier::{engineered_instance, haar_instance, no_instance, state_acceptance, yes_instance};
use witamp_core::{
    additive_adjustment, and_type_repetition, m_spectrum, marriott_watrous, one_shot_phase_estimation,
    or_type_repetition, reflection, Budget, Construction, Cutoff, PipelineConfig, Procedure, Tolerances,
    VerifierInstance,
};

use crate::Failure;

pub const VERIFY_FORMAT: &str = "witamp-verify";

pub const CHECK_NAMES: [&str; 19] = [
    "prop1",
    "prop2",
    "prop3",
    "prop4",
    "prop5",
    "prop6",
    "prop7",
    "prop8",
    "prop9",
    "lemma1",
    "lemma2",
    "lemma3",
    "lemma4",
    "lemma5",
    "lemma6",
    "lemma7",
    "thm1-pe",
    "thm1-hybrid",
    "thm1-guess",
];

/// One-line description of each check, for `--help` style listings.
pub fn describe(name: &str) -> Option<&'static str> {
    Some(match name {
        "prop1" => "one-shot phase estimation separates λ ≥ c from λ ≤ s with error ε",
        "prop2" => "AND-type repetition maps eigenvalues to λ^{2N}",
        "prop3" => "AND-type repetition keeps spectra below ε^{2N}",
        "prop4" => "Marriott-Watrous amplification meets its Hoeffding bounds",
        "prop5" => "OR-type repetition maps eigenvalues to 1 − (1 − λ)^{2N}",
        "prop6" => "OR-type repetition keeps spectra below 1 − (1 − ε)^{2N}",
        "prop7" => "additive adjustment maps eigenvalues to ½ + ½(λ − k/2^l)",
        "prop8" => "additive adjustment keeps spectra below ½ + ½(ε − k/2^l)",
        "prop9" => "the reflection procedure maps eigenvalues to 4λ(1 − λ)",
        "lemma1" => "phase-estimation mild amplification targets",
        "lemma2" => "phase-estimation soundness reduction targets",
        "lemma3" => "very mild amplification targets",
        "lemma4" => "Marriott-Watrous soundness reduction targets",
        "lemma5" => "mild completeness amplification with a guess",
        "lemma6" => "soundness reduction with a guess",
        "lemma7" => "soundness reduction with a random guess",
        "thm1-pe" => "end-to-end error 2^-p, phase-estimation construction",
        "thm1-hybrid" => "end-to-end error 2^-p, hybrid construction",
        "thm1-guess" => "end-to-end error 2^-p, random-guess construction",
        _ => return None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    Equal,
    AtLeast,
    AtMost,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::Equal => "=",
            Relation::AtLeast => ">=",
            Relation::AtMost => "<=",
        }
    }

    fn residual(self, measured: f64, bound: f64) -> f64 {
        match self {
            Relation::Equal => (measured - bound).abs(),
            Relation::AtLeast => (bound - measured).max(0.0),
            Relation::AtMost => (measured - bound).max(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub trial: usize,
    pub seed: u64,
    pub case: String,
    pub relation: Relation,
    pub measured: f64,
    pub bound: f64,
    pub residual: f64,
    pub pass: bool,
    pub anchor: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub format: &'static str,
    pub version: u32,
    pub check: String,
    pub trials: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub p: Option<u64>,
    pub rows: Vec<CheckRow>,
    pub worst_residual: f64,
    pub worst_row: usize,
    pub passed: bool,
}

impl CheckReport {
    pub fn to_json(&self) -> Result<String, Failure> {
        serde_json::to_string_pretty(self)
            .map(|s| s + "\n")
            .map_err(|e| Failure::Io(e.to_string()))
    }

    pub fn table(&self) -> String {
        let mut out = format!("{:>5}  {:<34}  {:>24}  {:>10}  {}\n", "trial", "case", "measured vs bound", "residual", "ok");
        for r in &self.rows {
            out += &format!(
                "{:>5}  {:<34}  {:>11.4e} {:>2} {:<9.4e}  {:>10.2e}  {}\n",
                r.trial,
                r.case,
                r.measured,
                r.relation.symbol(),
                r.bound,
                r.residual,
                if r.pass { "pass" } else { "FAIL" }
            );
        }
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        out += &format!(
            "{}: {verdict}, {} rows over {} trials, worst residual {:.3e} (row {}) against tolerance {:.1e}\n",
            self.check,
            self.rows.len(),
            self.trials,
            self.worst_residual,
            self.worst_row,
            self.tolerance
        );
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOptions {
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    /// Error exponent for lemma and end-to-end checks.
    pub p: Option<u64>,
    pub c: f64,
    pub s: f64,
    pub max_qubits: u32,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            trials: 20,
            seed: 0,
            tol: 1e-9,
            p: None,
            c: 0.99,
            s: 0.01,
            max_qubits: crate::config::DEFAULT_MAX_QUBITS,
        }
    }
}

struct Rows {
    trial: usize,
    seed: u64,
    tol: f64,
    rows: Vec<CheckRow>,
}

impl Rows {
    fn push(&mut self, case: String, relation: Relation, measured: f64, bound: f64, anchor: &str) {
        let residual = relation.residual(measured, bound);
        self.rows.push(CheckRow {
            trial: self.trial,
            seed: self.seed,
            case,
            relation,
            measured,
            bound,
            residual,
            pass: residual <= self.tol,
            anchor: anchor.to_string(),
        });
    }
}

type Law = fn(f64, u64) -> f64;

/// Acceptance of `wrapped` on each lifted eigenstate of `base`.
fn eigen_acceptances(base: &VerifierInstance, wrapped: &VerifierInstance) -> Result<Vec<(f64, f64)>, Failure> {
    let s = m_spectrum(base)?;
    s.eigenvalues
        .iter()
        .zip(&s.eigenstates)
        .map(|(&l, phi)| Ok((l, state_acceptance(wrapped, &phi.lift(wrapped.layout())?)?)))
        .collect()
}

fn max_acceptance(v: &VerifierInstance) -> Result<f64, Failure> {
    Ok(m_spectrum(v)?.max_acceptance)
}

const EPS_GRID: [f64; 3] = [0.1, 0.3, 0.5];

fn repetition_law(rows: &mut Rows, i: usize, or: bool) -> Result<(), Failure> {
    let n = 1 + (i % 3) as u64;
    let base = haar_instance(1, rows.seed)?;
    let (wrapped, law, anchor): (_, Law, _) = if or {
        (
            or_type_repetition(&base, n)?,
            |l, n| 1.0 - (1.0 - l).powi(2 * n as i32),
            "OR-type repetition: 1 − (1 − λ)^{2N}",
        )
    } else {
        (and_type_repetition(&base, n)?, |l, n| l.powi(2 * n as i32), "AND-type repetition: λ^{2N}")
    };
    for (l, acc) in eigen_acceptances(&base, &wrapped)? {
        rows.push(format!("N={n} λ={l:.6}"), Relation::Equal, acc, law(l, n), anchor);
    }
    Ok(())
}

fn repetition_soundness(rows: &mut Rows, i: usize, or: bool) -> Result<(), Failure> {
    let n = 1 + (i % 3) as u64;
    let eps = EPS_GRID[(i / 3) % 3];
    let base = no_instance(eps, 1, rows.seed)?;
    let (wrapped, bound, anchor) = if or {
        (
            or_type_repetition(&base, n)?,
            1.0 - (1.0 - eps).powi(2 * n as i32),
            "OR-type soundness: ≤ 1 − (1 − ε)^{2N}",
        )
    } else {
        (and_type_repetition(&base, n)?, eps.powi(2 * n as i32), "AND-type soundness: ≤ ε^{2N}")
    };
    rows.push(format!("N={n} ε={eps}"), Relation::AtMost, max_acceptance(&wrapped)?, bound, anchor);
    Ok(())
}

fn phase_estimation(rows: &mut Rows, i: usize) -> Result<(), Failure> {
    let (c, s) = [(0.9, 0.1), (0.99, 0.01)][i % 2];
    let eps_inverse = [4u32, 12][(i / 2) % 2];
    let eps = 1.0 / eps_inverse as f64;
    let pp = phase_parameters(c, s);
    let yes = yes_instance(c, 1, rows.seed)?;
    let wrapped = one_shot_phase_estimation(&yes, pp.t, pp.l, eps)?;
    let (_, top) = eigen_acceptances(&yes, &wrapped)?[0];
    let case = format!("c={c} s={s} ε=1/{eps_inverse}");
    rows.push(format!("{case} yes"), Relation::AtLeast, top, 1.0 - eps, "phase estimation: ≥ 1 − ε on λ ≥ c");
    let no = no_instance(s, 1, rows.seed)?;
    let wrapped = one_shot_phase_estimation(&no, pp.t, pp.l, eps)?;
    rows.push(format!("{case} no"), Relation::AtMost, max_acceptance(&wrapped)?, eps, "phase estimation: ≤ ε on λ ≤ s");
    Ok(())
}

fn marriott_watrous_bounds(rows: &mut Rows, i: usize, budget: &Budget) -> Result<(), Failure> {
    let n = 2 + (i % 3) as u64;
    let t = n;
    let margin = 0.25;
    let centre = t as f64 / (2 * n) as f64;
    let base = engineered_instance(&[centre + margin, centre - margin], rows.seed)?;
    let wrapped = marriott_watrous(&base, n, t)?;
    let tail = (-4.0 * margin * margin * n as f64).exp();
    let proc = Procedure::MarriottWatrous { n, t };
    let s = m_spectrum(&base)?;
    for (&l, phi) in s.eigenvalues.iter().zip(&s.eigenstates) {
        let branch = branch_sum_acceptance(&base, &proc, phi, budget)?.acceptance;
        let literal = state_acceptance(&wrapped, &phi.lift(wrapped.layout())?)?;
        let case = format!("N={n} t={t} λ={l:.2}");
        if l > centre {
            let anchor = "Marriott-Watrous completeness: > 1 − e^{−4ε²N}";
            rows.push(format!("{case} branch"), Relation::AtLeast, branch, 1.0 - tail, anchor);
            rows.push(format!("{case} circuit"), Relation::AtLeast, literal, 1.0 - tail, anchor);
        } else {
            let anchor = "Marriott-Watrous soundness: < e^{−4ε²N}";
            rows.push(format!("{case} branch"), Relation::AtMost, branch, tail, anchor);
            rows.push(format!("{case} circuit"), Relation::AtMost, literal, tail, anchor);
        }
    }
    Ok(())
}

fn additive_law(rows: &mut Rows, i: usize) -> Result<(), Failure> {
    let l = 1 + (i % 3) as u32;
    let base = haar_instance(1, rows.seed)?;
    for k in 1..=1u64 << l {
        let wrapped = additive_adjustment(&base, l, k)?;
        let shift = k as f64 / (1u64 << l) as f64;
        for (lambda, acc) in eigen_acceptances(&base, &wrapped)? {
            let law = 0.5 + 0.5 * (lambda - shift);
            rows.push(
                format!("l={l} k={k} λ={lambda:.6}"),
                Relation::Equal,
                acc,
                law,
                "additive adjustment: ½ + ½(λ − k/2^l)",
            );
        }
    }
    Ok(())
}

fn additive_soundness(rows: &mut Rows, i: usize) -> Result<(), Failure> {
    let l = 1 + (i % 3) as u32;
    let eps = EPS_GRID[(i / 3) % 3];
    let base = no_instance(eps, 1, rows.seed)?;
    for k in 1..=1u64 << l {
        let wrapped = additive_adjustment(&base, l, k)?;
        let bound = 0.5 + 0.5 * (eps - k as f64 / (1u64 << l) as f64);
        rows.push(
            format!("l={l} k={k} ε={eps}"),
            Relation::AtMost,
            max_acceptance(&wrapped)?,
            bound,
            "additive soundness: ≤ ½ + ½(ε − k/2^l)",
        );
    }
    Ok(())
}

fn reflection_law(rows: &mut Rows, i: usize) -> Result<(), Failure> {
    // Odd trials cluster the spectrum around ½, where acceptance nears 1.
    let base = if i.is_multiple_of(2) {
        haar_instance(1, rows.seed)?
    } else {
        let d = 0.01 * (1 + rows.seed % 5) as f64;
        engineered_instance(&[0.5 + d, 0.5 - d / 2.0], rows.seed)?
    };
    let wrapped = reflection(&base)?;
    for (l, acc) in eigen_acceptances(&base, &wrapped)? {
        rows.push(format!("λ={l:.6}"), Relation::Equal, acc, 4.0 * l * (1.0 - l), "reflection: 4λ(1 − λ)");
    }
    Ok(())
}

fn pipeline_targets(
    rows: &mut Rows,
    construction: Construction,
    cutoff: Cutoff,
    p: u64,
    (c, s): (f64, f64),
    budget: &Budget,
) -> Result<(), Failure> {
    let cfg = PipelineConfig::new(construction, p, c, s).with_cutoff(cutoff);
    let tol = Tolerances::default();
    let yes = run_pipeline(&yes_instance(c, 1, rows.seed)?, &cfg, budget, &tol)?;
    let no = run_pipeline(&no_instance(s, 1, rows.seed)?, &cfg, budget, &tol)?;
    let target = yes
        .schedule
        .final_target()
        .ok_or_else(|| Failure::Invalid(format!("stage `{}` has no target", cutoff.name())))?;
    let case = format!("{} p={p}", cutoff.name());
    rows.push(
        format!("{case} yes"),
        Relation::AtLeast,
        yes.evaluation.top_eigenstate_acceptance(),
        target.completeness,
        &target.anchor,
    );
    rows.push(
        format!("{case} no"),
        Relation::AtMost,
        no.evaluation.max_acceptance(),
        target.soundness,
        &target.anchor,
    );
    Ok(())
}

fn pipeline_check(name: &str) -> Option<(Construction, Cutoff, u64)> {
    Some(match name {
        "lemma1" => (Construction::SimplePe, Cutoff::Mild, 2),
        "lemma2" => (Construction::SimplePe, Cutoff::Soundness, 2),
        "lemma3" => (Construction::Hybrid, Cutoff::VeryMild, 2),
        "lemma4" => (Construction::Hybrid, Cutoff::Soundness, 2),
        "lemma5" => (Construction::RandomGuess, Cutoff::MildGuess, 2),
        "lemma6" => (Construction::RandomGuess, Cutoff::SoundnessGuess, 2),
        "lemma7" => (Construction::RandomGuess, Cutoff::RandomGuess, 5),
        "thm1-pe" => (Construction::SimplePe, Cutoff::Full, 2),
        "thm1-hybrid" => (Construction::Hybrid, Cutoff::Full, 2),
        "thm1-guess" => (Construction::RandomGuess, Cutoff::Full, 2),
        _ => return None,
    })
}

/// Runs the named check on `opts.trials` seeded trials.
pub fn run_check(name: &str, opts: &CheckOptions) -> Result<CheckReport, Failure> {
    if describe(name).is_none() {
        return Err(Failure::Invalid(format!(
            "unknown check `{name}`; expected one of {}",
            CHECK_NAMES.join(", ")
        )));
    }
    if opts.trials == 0 {
        return Err(Failure::Invalid("--trials must be at least 1".into()));
    }
    if opts.tol.is_nan() || opts.tol < 0.0 {
        return Err(Failure::Invalid(format!("--tol {} must be non-negative", opts.tol)));
    }
    let budget = Budget {
        max_qubits: opts.max_qubits,
        ..Budget::default()
    };
    let pipeline = pipeline_check(name);
    let p = pipeline.map(|(_, _, default_p)| opts.p.unwrap_or(default_p));
    let mut all = Vec::new();
    for i in 0..opts.trials {
        let mut rows = Rows {
            trial: i,
            seed: opts.seed.wrapping_add(i as u64),
            tol: opts.tol,
            rows: Vec::new(),
        };
        match (name, pipeline) {
            ("prop1", _) => phase_estimation(&mut rows, i)?,
            ("prop2", _) => repetition_law(&mut rows, i, false)?,
            ("prop3", _) => repetition_soundness(&mut rows, i, false)?,
            ("prop4", _) => marriott_watrous_bounds(&mut rows, i, &budget)?,
            ("prop5", _) => repetition_law(&mut rows, i, true)?,
            ("prop6", _) => repetition_soundness(&mut rows, i, true)?,
            ("prop7", _) => additive_law(&mut rows, i)?,
            ("prop8", _) => additive_soundness(&mut rows, i)?,
            ("prop9", _) => reflection_law(&mut rows, i)?,
            (_, Some((construction, cutoff, _))) => {
                pipeline_targets(&mut rows, construction, cutoff, p.unwrap_or(2), (opts.c, opts.s), &budget)?
            }
            _ => unreachable!("every described check is dispatched"),
        }
        all.extend(rows.rows);
    }
    let (worst_row, worst_residual) = all
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |acc, (j, r)| if r.residual > acc.1 { (j, r.residual) } else { acc });
    Ok(CheckReport {
        format: VERIFY_FORMAT,
        version: 1,
        check: name.to_string(),
        trials: opts.trials,
        seed: opts.seed,
        tolerance: opts.tol,
        p,
        passed: all.iter().all(|r| r.pass),
        rows: all,
        worst_residual,
        worst_row,
    })
}
