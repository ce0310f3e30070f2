//! State-preparation workflows built on the measurement operator.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::measurement::{
    apply_measurement, compose, rng_from_seed, sample_outcome_with, MeasurementSetting,
};
use crate::pulse::{
    build_pulse, chi_p_bound, feasibility, response_functions, strengths_numeric, CavityParams,
    FeasibilityReport, GridSpec, LoShape, PulseKind,
};
use crate::spin::{total_spin, SpinEnsembleState};

/// Fidelity above which a preparation is reported as near-unit.
pub const DEFAULT_FIDELITY_THRESHOLD: f64 = 0.99;

/// Phase-quadrature strength that saturates Dicke squeezing in one shot.
pub const SATURATING_CHI_P: f64 = 2.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuperpositionResult {
    pub post_state: SpinEnsembleState,
    pub fidelity_vs_target: f64,
    pub target_m_c: f64,
    /// Packet separation `2√(-X_L/χ_x)`; `None` unless `X_L < 0`.
    pub packet_separation: Option<f64>,
    /// Packet width `1/(2√(-X_L χ_x))`; `None` unless `X_L < 0`.
    pub packet_width: Option<f64>,
    pub outcome: f64,
    /// Set when `X_L > 0`, which leaves a single packet around `m = 0`.
    pub flagged: bool,
}

impl SuperpositionResult {
    pub fn near_unit(&self, threshold: f64) -> bool {
        self.fidelity_vs_target > threshold
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DssResult {
    pub post_state: SpinEnsembleState,
    pub xi_d: f64,
    /// Outcome of the single (or effective) measurement.
    pub outcome: f64,
    pub n_rounds: usize,
    /// Per-round outcomes.
    pub outcomes: Vec<f64>,
    /// Set when the outcome lies outside `[-χ_p S, χ_p S]`.
    pub flagged: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum OutcomePolicy {
    /// Every round returns `P_L = 0`.
    AllZero,
    /// Outcomes drawn round by round from the current state.
    Sampled { seed: u64 },
}

/// Nearest lattice point to `x ≥ 0`, ties toward zero, clamped to `[0, S]`.
pub fn nearest_lattice_m(atom_count: usize, x: f64) -> f64 {
    let s = total_spin(atom_count);
    // lattice = offset + integer, offset ∈ {0, 1/2}
    let offset = s.fract();
    let shifted = x.max(0.0) - offset;
    let lower = shifted.floor();
    let frac = shifted - lower;
    let k = if frac > 0.5 { lower + 1.0 } else { lower };
    (k + offset).clamp(offset, s)
}

pub fn prepare_superposition(
    atom_count: usize,
    chi_x: f64,
    outcome: f64,
    eta: f64,
) -> Result<SuperpositionResult> {
    if !(chi_x > 0.0) {
        return invalid(format!("chi_x must be positive, got {chi_x}"));
    }
    let css = SpinEnsembleState::css(atom_count)?;
    let setting = MeasurementSetting::amplitude(chi_x, eta)?;
    let (post_state, _) = apply_measurement(&css, &setting, outcome)?;
    let centre = if outcome < 0.0 {
        (-outcome / chi_x).sqrt()
    } else {
        0.0
    };
    let target_m_c = nearest_lattice_m(atom_count, centre);
    let target = SpinEnsembleState::superposition_target(atom_count, target_m_c, eta)?;
    let (packet_separation, packet_width) = if outcome < 0.0 {
        (
            Some(2.0 * centre),
            Some(1.0 / (2.0 * (-outcome * chi_x).sqrt())),
        )
    } else {
        (None, None)
    };
    Ok(SuperpositionResult {
        fidelity_vs_target: target.fidelity(&post_state)?,
        post_state,
        target_m_c,
        packet_separation,
        packet_width,
        outcome,
        flagged: outcome > 0.0,
    })
}

pub fn prepare_dss(atom_count: usize, chi_p: f64, outcome: f64, eta: f64) -> Result<DssResult> {
    if !(chi_p > 0.0) {
        return invalid(format!("chi_p must be positive, got {chi_p}"));
    }
    let css = SpinEnsembleState::css(atom_count)?;
    let setting = MeasurementSetting::phase(chi_p, eta)?;
    let (post_state, _) = apply_measurement(&css, &setting, outcome)?;
    Ok(DssResult {
        xi_d: post_state.observables().xi_d,
        post_state,
        outcome,
        n_rounds: 1,
        outcomes: vec![outcome],
        flagged: outcome.abs() > chi_p * total_spin(atom_count),
    })
}

/// `n` phase-quadrature measurements of strength `chi_p` on a CSS.
pub fn repetitive_dss(
    atom_count: usize,
    chi_p: f64,
    rounds: usize,
    policy: OutcomePolicy,
) -> Result<DssResult> {
    repetitive_dss_with_eta(atom_count, chi_p, rounds, policy, 0.0)
}

pub fn repetitive_dss_with_eta(
    atom_count: usize,
    chi_p: f64,
    rounds: usize,
    policy: OutcomePolicy,
    eta: f64,
) -> Result<DssResult> {
    if rounds == 0 {
        return invalid("at least one measurement round is required");
    }
    if !(chi_p > 0.0) {
        return invalid(format!("chi_p must be positive, got {chi_p}"));
    }
    let setting = MeasurementSetting::phase(chi_p, eta)?;
    let css = SpinEnsembleState::css(atom_count)?;
    let (post_state, outcomes) = match policy {
        OutcomePolicy::AllZero => {
            let composed = compose(&vec![(setting, 0.0); rounds])?;
            (
                apply_measurement(&css, &composed.setting, composed.outcome)?.0,
                vec![0.0; rounds],
            )
        }
        OutcomePolicy::Sampled { seed } => {
            let mut rng = rng_from_seed(seed);
            let mut state = css;
            let mut outcomes = Vec::with_capacity(rounds);
            for _ in 0..rounds {
                let y = sample_outcome_with(&state, &setting, &mut rng)?;
                state = apply_measurement(&state, &setting, y)?.0;
                outcomes.push(y);
            }
            (state, outcomes)
        }
    };
    let n = rounds as f64;
    let outcome = outcomes.iter().sum::<f64>() / n.sqrt();
    Ok(DssResult {
        xi_d: post_state.observables().xi_d,
        post_state,
        outcome,
        n_rounds: rounds,
        flagged: outcome.abs() > n.sqrt() * chi_p * total_spin(atom_count),
        outcomes,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LongPulsePlan {
    pub n_t: f64,
    pub rounds: usize,
    pub feasibility: FeasibilityReport,
    /// Per-round phase strength of the long probe with a `β₁`-shaped LO.
    pub chi_p_per_round: f64,
    /// `√n χ_p` after `n` rounds.
    pub chi_p_effective: f64,
    /// Closed-form per-round ceiling `g√(20 n_t e)/κ`.
    pub chi_p_bound: f64,
    /// `√n` times the per-round ceiling.
    pub chi_p_effective_bound: f64,
    /// Rounds needed to reach the saturating strength `(2/χ_p)²`, rounded up.
    pub rounds_for_saturation: usize,
}

/// Combines long-pulse probing with `rounds` repeated measurements.
pub fn long_pulse_plan(
    cavity: &CavityParams,
    n_t: f64,
    rounds: usize,
    threshold: f64,
) -> Result<LongPulsePlan> {
    if !(n_t >= 1.0) {
        return invalid(format!("n_t must be at least 1, got {n_t}"));
    }
    if rounds == 0 {
        return invalid("at least one measurement round is required");
    }
    let kind = if n_t == 1.0 {
        PulseKind::Exponential
    } else {
        PulseKind::LongExponential { n_t }
    };
    let pulse = response_functions(&build_pulse(kind, &GridSpec::default_for(&kind))?)
        .with_local_oscillator(LoShape::Beta1)?;
    let chi_p_per_round = strengths_numeric(&pulse, cavity, std::f64::consts::FRAC_PI_2)?.chi_p;
    let root = (rounds as f64).sqrt();
    let bound = chi_p_bound(cavity, n_t);
    Ok(LongPulsePlan {
        n_t,
        rounds,
        feasibility: feasibility(cavity, kind, threshold)?,
        chi_p_per_round,
        chi_p_effective: root * chi_p_per_round,
        chi_p_bound: bound,
        chi_p_effective_bound: root * bound,
        rounds_for_saturation: (SATURATING_CHI_P / chi_p_per_round).powi(2).ceil().max(1.0)
            as usize,
    })
}
