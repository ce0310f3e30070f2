//! Gaussian homodyne measurement operator acting diagonally in the Dicke
//! basis:
//!
//! ```text
//! M(Υ) = π^{-1/4} exp[ iη S_z - (Υ + χ_x S_z² + χ_p S_z)² / 2 ]
//! ```
//!
//! Outcomes `Υ` are real; `|M(Υ)|²` integrates to the identity over `Υ`, so
//! the outcome density of a state is a Gaussian mixture with variance 1/2
//! per component, centred at `-χ_x m² - χ_p m`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quad::{gauss_legendre, merge_intervals};
use crate::spin::SpinEnsembleState;

/// Half-width, in units of the outcome, beyond which a mixture component is
/// treated as zero during quadrature (`e^{-144}`).
const COMPONENT_REACH: f64 = 12.0;
const PANEL_WIDTH: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSetting {
    pub chi_x: f64,
    pub chi_p: f64,
    pub eta: f64,
}

impl MeasurementSetting {
    pub fn new(chi_x: f64, chi_p: f64, eta: f64) -> Result<Self> {
        if !(chi_x.is_finite() && chi_p.is_finite() && eta.is_finite()) {
            return invalid("measurement setting must be finite");
        }
        if chi_x < 0.0 || chi_p < 0.0 {
            return invalid(format!(
                "strengths must be non-negative, got chi_x = {chi_x}, chi_p = {chi_p}"
            ));
        }
        Ok(Self { chi_x, chi_p, eta })
    }

    /// Amplitude-quadrature measurement `M_X`.
    pub fn amplitude(chi_x: f64, eta: f64) -> Result<Self> {
        Self::new(chi_x, 0.0, eta)
    }

    /// Phase-quadrature measurement `M_P`.
    pub fn phase(chi_p: f64, eta: f64) -> Result<Self> {
        Self::new(0.0, chi_p, eta)
    }

    /// Mean outcome `-χ_x m² - χ_p m` for a Dicke state `|S,m⟩`.
    #[inline]
    pub fn center(&self, m: f64) -> f64 {
        -(self.chi_x * m * m + self.chi_p * m)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub outcome: f64,
    pub density: f64,
    pub chi_x: f64,
    pub chi_p: f64,
    pub eta: f64,
    pub seed: u64,
}

impl MeasurementRecord {
    pub fn setting(&self) -> MeasurementSetting {
        MeasurementSetting {
            chi_x: self.chi_x,
            chi_p: self.chi_p,
            eta: self.eta,
        }
    }
}

/// Effective single measurement equivalent to a product of repeated ones.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComposedMeasurement {
    pub setting: MeasurementSetting,
    pub outcome: f64,
    /// m-independent additive constant in the exponent.
    pub log_constant: f64,
}

/// `ln w_m` for every `m` on the lattice of `atom_count`.
pub fn log_weights(setting: &MeasurementSetting, outcome: f64, atom_count: usize) -> Vec<C64> {
    let s = atom_count as f64 / 2.0;
    let log_norm = -0.25 * PI.ln();
    (0..=atom_count)
        .map(|k| {
            let m = k as f64 - s;
            let r = outcome - setting.center(m);
            C64::new(log_norm - 0.5 * r * r, setting.eta * m)
        })
        .collect()
}

/// Applies `M(Υ)` and renormalizes. Returns the post-measurement state and
/// `‖M|ψ⟩‖²`, the probability density of the outcome.
///
/// All arithmetic on weights happens in the log domain, shifted by the
/// largest `ln|w_m a_m|` before exponentiation.
pub fn apply_measurement(
    state: &SpinEnsembleState,
    setting: &MeasurementSetting,
    outcome: f64,
) -> Result<(SpinEnsembleState, f64)> {
    if !outcome.is_finite() {
        return invalid(format!("outcome must be finite, got {outcome}"));
    }
    let logs: Vec<Option<C64>> = log_weights(setting, outcome, state.atom_count())
        .into_iter()
        .zip(state.amplitudes())
        .map(|(lw, a)| (a.norm_sqr() > 0.0).then(|| lw + C64::new(a.norm().ln(), a.arg())))
        .collect();
    let shift = logs
        .iter()
        .flatten()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    if !shift.is_finite() {
        return Err(Error::Internal("all measurement weights vanished".into()));
    }
    let shifted: Vec<C64> = logs
        .iter()
        .map(|l| l.map_or(C64::new(0.0, 0.0), |z| (z - shift).exp()))
        .collect();
    let scaled_norm: f64 = shifted.iter().map(|z| z.norm_sqr()).sum();
    if !(scaled_norm > 0.0 && scaled_norm.is_finite()) {
        return Err(Error::Internal(format!(
            "degenerate post-measurement norm {scaled_norm}"
        )));
    }
    let density = (2.0 * shift).exp() * scaled_norm;
    let post = SpinEnsembleState::from_amplitudes(state.atom_count(), shifted)?;
    Ok((post, density))
}

/// Exact outcome density `Σ_m |a_m|² π^{-1/2} e^{-(Υ + χ_x m² + χ_p m)²}`.
pub fn outcome_pdf(state: &SpinEnsembleState, setting: &MeasurementSetting, outcome: f64) -> f64 {
    let norm = PI.sqrt().recip();
    state
        .prob_distribution()
        .into_iter()
        .filter(|(_, p)| *p > 0.0)
        .map(|(m, p)| {
            let r = outcome - setting.center(m);
            p * norm * (-r * r).exp()
        })
        .sum()
}

/// Numeric `∫_{lo}^{hi} outcome_pdf dΥ` by composite Gauss–Legendre over the
/// support of the mixture components.
pub fn outcome_probability(
    state: &SpinEnsembleState,
    setting: &MeasurementSetting,
    lo: f64,
    hi: f64,
) -> f64 {
    if !(hi > lo) {
        return 0.0;
    }
    let spans = state
        .prob_distribution()
        .into_iter()
        .filter(|(_, p)| *p > 0.0)
        .map(|(m, _)| {
            let c = setting.center(m);
            (c - COMPONENT_REACH, c + COMPONENT_REACH)
        })
        .collect();
    merge_intervals(spans)
        .into_iter()
        .map(|(a, b)| {
            let (a, b) = (a.max(lo), b.min(hi));
            gauss_legendre(|y| outcome_pdf(state, setting, y), a, b, PANEL_WIDTH)
        })
        .sum()
}

/// Probability that the outcome lands within `window` of `target`.
pub fn acceptance_probability(
    state: &SpinEnsembleState,
    setting: &MeasurementSetting,
    target: f64,
    window: f64,
) -> Result<f64> {
    if !(window > 0.0) {
        return invalid(format!("window must be positive, got {window}"));
    }
    Ok(outcome_probability(state, setting, target - window, target + window).clamp(0.0, 1.0))
}

/// Two-stage draw: `m` with probability `|a_m|²`, then `Υ ~ N(center(m), 1/2)`.
pub fn sample_outcome_with<R: Rng + ?Sized>(
    state: &SpinEnsembleState,
    setting: &MeasurementSetting,
    rng: &mut R,
) -> Result<f64> {
    let probs: Vec<f64> = state.amplitudes().iter().map(|a| a.norm_sqr()).collect();
    let index = WeightedIndex::new(&probs).map_err(|e| Error::InvalidState(e.to_string()))?;
    let m = state.m_of(index.sample(rng));
    let noise = Normal::new(setting.center(m), std::f64::consts::FRAC_1_SQRT_2)
        .map_err(|e| Error::Internal(e.to_string()))?;
    Ok(noise.sample(rng))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seeded single-shot outcome with its exact density.
pub fn sample_outcome(
    state: &SpinEnsembleState,
    setting: &MeasurementSetting,
    seed: u64,
) -> Result<MeasurementRecord> {
    let mut rng = rng_from_seed(seed);
    let outcome = sample_outcome_with(state, setting, &mut rng)?;
    Ok(MeasurementRecord {
        outcome,
        density: outcome_pdf(state, setting, outcome),
        chi_x: setting.chi_x,
        chi_p: setting.chi_p,
        eta: setting.eta,
        seed,
    })
}

/// `count` independent outcomes from one seeded stream.
pub fn sample_outcomes(
    state: &SpinEnsembleState,
    setting: &MeasurementSetting,
    seed: u64,
    count: usize,
) -> Result<Vec<f64>> {
    let mut rng = rng_from_seed(seed);
    (0..count)
        .map(|_| sample_outcome_with(state, setting, &mut rng))
        .collect()
}

/// Collapses `n` measurements with equal strengths into one, by completing
/// the square in each exponent:
///
/// `Σ_j (Υ_j + f)² = (√n f + ΣΥ/√n)² + ΣΥ² - (ΣΥ)²/n`.
pub fn compose(rounds: &[(MeasurementSetting, f64)]) -> Result<ComposedMeasurement> {
    let (first, _) = rounds
        .first()
        .ok_or_else(|| Error::InvalidArgument("no measurements to compose".into()))?;
    if rounds
        .iter()
        .any(|(s, _)| s.chi_x != first.chi_x || s.chi_p != first.chi_p)
    {
        return Err(Error::Unsupported(
            "composition requires equal strengths in every round".into(),
        ));
    }
    if rounds.len() == 1 {
        return Ok(ComposedMeasurement {
            setting: *first,
            outcome: rounds[0].1,
            log_constant: 0.0,
        });
    }
    let n = rounds.len() as f64;
    let root = n.sqrt();
    let sum: f64 = rounds.iter().map(|(_, y)| y).sum();
    let sum_sq: f64 = rounds.iter().map(|(_, y)| y * y).sum();
    let eta: f64 = rounds.iter().map(|(s, _)| s.eta).sum();
    let setting = MeasurementSetting {
        chi_x: root * first.chi_x,
        chi_p: root * first.chi_p,
        eta,
    };
    let residual = (sum_sq - sum * sum / n).max(0.0);
    Ok(ComposedMeasurement {
        setting,
        outcome: sum / root,
        log_constant: -0.5 * residual - 0.25 * (n - 1.0) * PI.ln(),
    })
}
