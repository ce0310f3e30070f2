//! Probe pulses, cavity response functions and measurement strengths.
//!
//! Time is measured in units of `1/κ` and envelopes in units of `√κ`, so a
//! pulse grid is independent of the absolute cavity linewidth. Only the
//! ratio `Ω/κ` and the photon number `N_p` of [`CavityParams`] enter the
//! strengths.
//!
//! The response functions are the causal filters
//!
//! ```text
//! β_p(t) = √2 ∫_{-∞}^{t} e^{-(t-t')} (t-t')^p β_in(t') dt',   p = 0, 1, 2
//! ```
//!
//! evaluated with an exact propagator for piecewise-linear input.

use std::f64::consts::{E, PI};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quad::simpson;

/// Normalization tolerance for analytically defined time-domain pulses.
pub const TIME_DOMAIN_NORM_TOL: f64 = 1e-6;
/// Normalization tolerance for the spectrally defined pulse.
pub const SPECTRAL_NORM_TOL: f64 = 1e-4;
/// Default grid half-span in units of `max(1, n_t)/κ`.
pub const DEFAULT_HALF_SPAN: f64 = 25.0;
/// Smallest accepted grid half-span in units of `max(1, n_t)/κ`.
pub const MIN_HALF_SPAN: f64 = 10.0;
/// Default dt in units of 1/κ.
pub const DEFAULT_DT: f64 = 0.005;
/// Largest accepted dt in units of 1/κ.
pub const MAX_DT: f64 = 0.01;
/// Half-width of the frequency window used to invert the spectral pulse, in units of κ.
pub const SPECTRAL_WINDOW: f64 = 50.0;
/// Default intracavity-photon to `(Δ/g)²` ratio below which a setting counts as feasible.
pub const DEFAULT_FEASIBILITY_THRESHOLD: f64 = 0.01;

const TWO_PI_MHZ: f64 = 2.0 * PI * 1e6;

/// Cavity QED constants, all angular frequencies in rad/s.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    pub g: f64,
    pub delta: f64,
    pub kappa: f64,
    pub n_photons: f64,
}

impl CavityParams {
    pub fn new(g: f64, delta: f64, kappa: f64, n_photons: f64) -> Result<Self> {
        for (name, v) in [
            ("g", g),
            ("|delta|", delta.abs()),
            ("kappa", kappa),
            ("n_photons", n_photons),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return invalid(format!("{name} must be positive and finite, got {v}"));
            }
        }
        Ok(Self {
            g,
            delta,
            kappa,
            n_photons,
        })
    }

    /// Rates given as multiples of `2π × 1 MHz`.
    pub fn from_two_pi_mhz(g: f64, delta: f64, kappa: f64, n_photons: f64) -> Result<Self> {
        Self::new(
            g * TWO_PI_MHZ,
            delta * TWO_PI_MHZ,
            kappa * TWO_PI_MHZ,
            n_photons,
        )
    }

    /// Rubidium-in-cavity parameter set: g = 2π×0.4 MHz, Δ = 2π×3 GHz, κ = 2π×1 MHz.
    pub fn reference(n_photons: f64) -> Result<Self> {
        Self::from_two_pi_mhz(0.4, 3000.0, 1.0, n_photons)
    }

    /// Dispersive coupling `Ω = 2g²/|Δ|`.
    pub fn omega(&self) -> f64 {
        2.0 * self.g * self.g / self.delta.abs()
    }

    pub fn omega_over_kappa(&self) -> f64 {
        self.omega() / self.kappa
    }

    pub fn with_photons(&self, n_photons: f64) -> Result<Self> {
        Self::new(self.g, self.delta, self.kappa, n_photons)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PulseKind {
    /// `β_in(t) = e^{-|t|}`.
    Exponential,
    /// `β_in(t) = e^{-|t|/n_t} / √n_t`.
    LongExponential { n_t: f64 },
    /// Spectrum `|β_in(ω)|² = 8/[3π(1+ω²)³]`, optimal for the amplitude quadrature.
    OptimalXSpectral,
}

impl PulseKind {
    pub fn stretch(&self) -> f64 {
        match self {
            PulseKind::LongExponential { n_t } => *n_t,
            _ => 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if let PulseKind::LongExponential { n_t } = self {
            if !(n_t.is_finite() && *n_t > 0.0) {
                return invalid(format!("n_t must be positive, got {n_t}"));
            }
        }
        Ok(())
    }
}

/// Uniform time grid `[-half_span, half_span]` with step `dt`, in units of 1/κ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub half_span: f64,
    pub dt: f64,
}

impl GridSpec {
    pub fn default_for(kind: &PulseKind) -> Self {
        Self {
            half_span: DEFAULT_HALF_SPAN * kind.stretch().max(1.0),
            dt: DEFAULT_DT,
        }
    }
}

/// Temporal mode of the local oscillator.
#[derive(Clone, Debug, PartialEq)]
pub enum LoShape {
    /// Proportional to `β₁`; optimal for the phase quadrature.
    Beta1,
    /// Proportional to `β₂`; optimal for the amplitude quadrature.
    Beta2,
    Samples(Vec<C64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseGrid {
    kind: PulseKind,
    dt: f64,
    times: Vec<f64>,
    beta_in: Vec<C64>,
    beta_lo: Option<Vec<C64>>,
    beta0: Option<Vec<C64>>,
    beta1: Option<Vec<C64>>,
    beta2: Option<Vec<C64>>,
}

/// Numeric square-spin and linear-spin measurement strengths.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Strengths {
    pub chi_x: f64,
    pub chi_p: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub max_intracavity_photons: f64,
    /// `(Δ/g)²`.
    pub dispersive_bound: f64,
    pub chi_x_bound: f64,
    pub chi_p_bound: f64,
    pub photon_ratio: f64,
    pub threshold: f64,
    pub ok: bool,
}

fn sq_norm(samples: &[C64], dt: f64) -> f64 {
    let ys: Vec<f64> = samples.iter().map(|z| z.norm_sqr()).collect();
    simpson(&ys, dt)
}

/// `Re ∫ conj(a) b dt`.
fn overlap(a: &[C64], b: &[C64], dt: f64) -> f64 {
    let ys: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x.conj() * y).re).collect();
    simpson(&ys, dt)
}

fn optimal_x_spectrum(omega: f64) -> f64 {
    (8.0 / (3.0 * PI)).sqrt() * (1.0 + omega * omega).powf(-1.5)
}

/// `(1/√2π) ∫_{-W}^{W} β(ω) e^{iωt} dω` for the even, real spectrum, by
/// Simpson on `[0, W]` with the cosine generated by complex rotation.
/// The result is even in `t`, so each `|t|` is evaluated once.
fn invert_spectrum(times: &[f64], half_span: f64) -> Vec<C64> {
    let d_omega = 0.05 / half_span.max(10.0);
    let mut intervals = (SPECTRAL_WINDOW / d_omega).ceil() as usize;
    intervals += intervals % 2;
    let d_omega = SPECTRAL_WINDOW / intervals as f64;
    let spectrum: Vec<f64> = (0..=intervals)
        .map(|j| optimal_x_spectrum(j as f64 * d_omega))
        .collect();
    let prefactor = 2.0 / (2.0 * PI).sqrt();
    let at = |t: f64| {
        let step = C64::from_polar(1.0, d_omega * t);
        let mut phase = C64::new(1.0, 0.0);
        let mut acc = 0.0;
        for (j, b) in spectrum.iter().enumerate() {
            let w = if j == 0 || j == intervals {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += w * b * phase.re;
            phase *= step;
        }
        C64::new(prefactor * acc * d_omega / 3.0, 0.0)
    };
    // the grid is symmetric about t = 0 with an odd number of points
    let n = times.len();
    let half: Vec<C64> = times[n / 2..].iter().map(|&t| at(t)).collect();
    half.iter()
        .rev()
        .chain(half.iter().skip(1))
        .copied()
        .collect()
}

/// Samples the probe envelope of `kind` on `grid`.
pub fn build_pulse(kind: PulseKind, grid: &GridSpec) -> Result<PulseGrid> {
    kind.validate()?;
    let min_span = MIN_HALF_SPAN * kind.stretch().max(1.0);
    if !(grid.half_span.is_finite() && grid.half_span >= min_span) {
        return invalid(format!(
            "grid half-span {} shorter than required {min_span}",
            grid.half_span
        ));
    }
    if !(grid.dt > 0.0 && grid.dt <= MAX_DT) {
        return invalid(format!("grid step {} must lie in (0, {MAX_DT}]", grid.dt));
    }
    let mut intervals = (2.0 * grid.half_span / grid.dt).round() as usize;
    intervals += intervals % 2;
    let dt = 2.0 * grid.half_span / intervals as f64;
    let times: Vec<f64> = (0..=intervals)
        .map(|k| -grid.half_span + k as f64 * dt)
        .collect();

    let beta_in: Vec<C64> = match kind {
        PulseKind::Exponential => times
            .iter()
            .map(|t| C64::new((-t.abs()).exp(), 0.0))
            .collect(),
        PulseKind::LongExponential { n_t } => {
            let amp = n_t.sqrt().recip();
            times
                .iter()
                .map(|t| C64::new(amp * (-t.abs() / n_t).exp(), 0.0))
                .collect()
        }
        PulseKind::OptimalXSpectral => invert_spectrum(&times, grid.half_span),
    };

    let (tail, tol) = match kind {
        PulseKind::OptimalXSpectral => (1.0 - sq_norm(&beta_in, dt), SPECTRAL_NORM_TOL),
        _ => (
            (-2.0 * grid.half_span / kind.stretch()).exp(),
            TIME_DOMAIN_NORM_TOL,
        ),
    };
    if tail > tol {
        return invalid(format!(
            "pulse tail mass {tail:.3e} outside the grid exceeds {tol:e}"
        ));
    }
    let norm = sq_norm(&beta_in, dt);
    if (norm - 1.0).abs() > tol {
        return invalid(format!(
            "pulse norm {norm} deviates from 1 by more than {tol:e}; refine the grid"
        ));
    }

    Ok(PulseGrid {
        kind,
        dt,
        times,
        beta_in,
        beta_lo: None,
        beta0: None,
        beta1: None,
        beta2: None,
    })
}

/// Lower incomplete gamma `γ(s, x)` for integer `s ≥ 1` and moderate `x`,
/// by its power series.
fn lower_gamma(s: u32, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let s = s as f64;
    let mut term = 1.0 / s;
    let mut sum = term;
    for k in 1..500 {
        term *= x / (s + k as f64);
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    x.powf(s) * (-x).exp() * sum
}

/// Computes `β₀, β₁, β₂` by propagating the triangular linear system
/// `İ_p = -I_p + p I_{p-1} (+ β_in for p = 0)` exactly across each step.
pub fn response_functions(pulse: &PulseGrid) -> PulseGrid {
    let x = pulse.dt;
    let decay = (-x).exp();
    // Input weights for the left (a) and right (b) endpoint of a linear segment.
    let mut a = [0.0; 3];
    let mut b = [0.0; 3];
    for p in 0..3u32 {
        let g1 = lower_gamma(p + 1, x);
        let g2 = lower_gamma(p + 2, x) / x;
        a[p as usize] = g2;
        b[p as usize] = g1 - g2;
    }

    let n = pulse.beta_in.len();
    let mut out = [
        vec![C64::new(0.0, 0.0); n],
        vec![C64::new(0.0, 0.0); n],
        vec![C64::new(0.0, 0.0); n],
    ];
    let mut state = [C64::new(0.0, 0.0); 3];
    let root2 = 2f64.sqrt();
    for k in 1..n {
        let (left, right) = (pulse.beta_in[k - 1], pulse.beta_in[k]);
        let [i0, i1, i2] = state;
        state = [
            decay * i0 + left * a[0] + right * b[0],
            decay * (i1 + x * i0) + left * a[1] + right * b[1],
            decay * (i2 + 2.0 * x * i1 + x * x * i0) + left * a[2] + right * b[2],
        ];
        for (column, value) in out.iter_mut().zip(state) {
            column[k] = root2 * value;
        }
    }
    let [beta0, beta1, beta2] = out;
    PulseGrid {
        beta0: Some(beta0),
        beta1: Some(beta1),
        beta2: Some(beta2),
        ..pulse.clone()
    }
}

impl PulseGrid {
    pub fn kind(&self) -> PulseKind {
        self.kind
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn beta_in(&self) -> &[C64] {
        &self.beta_in
    }

    pub fn beta_lo(&self) -> Option<&[C64]> {
        self.beta_lo.as_deref()
    }

    pub fn beta0(&self) -> Option<&[C64]> {
        self.beta0.as_deref()
    }

    pub fn beta1(&self) -> Option<&[C64]> {
        self.beta1.as_deref()
    }

    pub fn beta2(&self) -> Option<&[C64]> {
        self.beta2.as_deref()
    }

    /// `∫|f|² dt` on this grid.
    pub fn l2_norm_sqr(&self, samples: &[C64]) -> f64 {
        sq_norm(samples, self.dt)
    }

    fn responses(&self) -> Result<(&[C64], &[C64], &[C64])> {
        match (&self.beta0, &self.beta1, &self.beta2) {
            (Some(b0), Some(b1), Some(b2)) => Ok((b0, b1, b2)),
            _ => Err(Error::InvalidState(
                "response functions have not been computed".into(),
            )),
        }
    }

    /// Attaches a unit-norm local-oscillator mode.
    pub fn with_local_oscillator(mut self, shape: LoShape) -> Result<Self> {
        let raw = match shape {
            LoShape::Beta1 => self.responses()?.1.to_vec(),
            LoShape::Beta2 => self.responses()?.2.to_vec(),
            LoShape::Samples(s) => {
                if s.len() != self.times.len() {
                    return invalid(format!(
                        "expected {} LO samples, got {}",
                        self.times.len(),
                        s.len()
                    ));
                }
                s
            }
        };
        let norm = sq_norm(&raw, self.dt).sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return invalid("local oscillator has zero norm");
        }
        self.beta_lo = Some(raw.into_iter().map(|z| z / norm).collect());
        Ok(self)
    }

    /// `(t, |β₀(t)|²)` at the grid maximum.
    pub fn peak_intracavity(&self) -> Result<(f64, f64)> {
        let (b0, _, _) = self.responses()?;
        let (k, v) = b0
            .iter()
            .map(|z| z.norm_sqr())
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .ok_or_else(|| Error::InvalidState("empty grid".into()))?;
        Ok((self.times[k], v))
    }

    /// CSV with columns `t, re_beta_in, im_beta_in, beta0, beta1, beta2`
    /// (real parts of the response functions).
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        let (b0, b1, b2) = self.responses()?;
        let io = |e: std::io::Error| Error::Internal(e.to_string());
        writeln!(w, "t,re_beta_in,im_beta_in,beta0,beta1,beta2").map_err(io)?;
        for k in 0..self.times.len() {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                self.times[k], self.beta_in[k].re, self.beta_in[k].im, b0[k].re, b1[k].re, b2[k].re
            )
            .map_err(io)?;
        }
        Ok(())
    }
}

/// Quadrature of the amplitude- and phase-quadrature strength integrals,
/// including the `√N_p` probe amplitude.
pub fn strengths_numeric(pulse: &PulseGrid, cavity: &CavityParams, phi: f64) -> Result<Strengths> {
    let lo = pulse
        .beta_lo
        .as_deref()
        .ok_or_else(|| Error::InvalidState("local oscillator not set".into()))?;
    let (_, b1, b2) = pulse.responses()?;
    let ratio = cavity.omega_over_kappa();
    let amp = cavity.n_photons.sqrt() * 2f64.sqrt();
    let chi_x = amp * ratio * ratio * overlap(lo, b2, pulse.dt) * phi.cos();
    let chi_p = 2.0 * amp * ratio * overlap(lo, b1, pulse.dt) * phi.sin();
    Ok(Strengths { chi_x, chi_p })
}

/// Closed-form optimum `√(42 N_p) Ω² / (2κ²)` for the amplitude quadrature.
pub fn optimal_chi_x(cavity: &CavityParams) -> f64 {
    (42.0 * cavity.n_photons).sqrt() * cavity.omega_over_kappa().powi(2) / 2.0
}

/// Closed-form optimum `√(10 N_p) Ω / κ` for the phase quadrature with an
/// exponential probe.
pub fn optimal_chi_p(cavity: &CavityParams) -> f64 {
    (10.0 * cavity.n_photons).sqrt() * cavity.omega_over_kappa()
}

/// Accumulated spin phase per unit `m` for the two optimal probes.
pub fn accumulated_phase(kind: PulseKind, cavity: &CavityParams) -> Result<f64> {
    let base = cavity.omega_over_kappa() * cavity.n_photons;
    match kind {
        PulseKind::OptimalXSpectral => Ok(-5.0 * base / 3.0),
        PulseKind::Exponential => Ok(-1.5 * base),
        PulseKind::LongExponential { .. } => Err(Error::Unsupported(
            "accumulated phase is only known for the exponential and optimal spectral probes"
                .into(),
        )),
    }
}

/// Closed-form bound `√42 g³/(κ²|Δ|)` on the amplitude strength.
pub fn chi_x_bound(cavity: &CavityParams) -> f64 {
    42f64.sqrt() * cavity.g.powi(3) / (cavity.kappa.powi(2) * cavity.delta.abs())
}

/// Closed-form bound `g √(20 n_t e) / κ` on the phase strength.
pub fn chi_p_bound(cavity: &CavityParams, n_t: f64) -> f64 {
    cavity.g * (20.0 * n_t * E).sqrt() / cavity.kappa
}

/// Checks the dispersive condition `N_p max|β₀|² ≪ (Δ/g)²` for the given probe.
pub fn feasibility(
    cavity: &CavityParams,
    kind: PulseKind,
    threshold: f64,
) -> Result<FeasibilityReport> {
    if !(threshold > 0.0) {
        return invalid(format!("threshold must be positive, got {threshold}"));
    }
    let pulse = response_functions(&build_pulse(kind, &GridSpec::default_for(&kind))?);
    let (_, peak) = pulse.peak_intracavity()?;
    let max_intracavity_photons = peak * cavity.n_photons;
    let dispersive_bound = (cavity.delta / cavity.g).powi(2);
    let photon_ratio = max_intracavity_photons / dispersive_bound;
    Ok(FeasibilityReport {
        max_intracavity_photons,
        dispersive_bound,
        chi_x_bound: chi_x_bound(cavity),
        chi_p_bound: chi_p_bound(cavity, kind.stretch()),
        photon_ratio,
        threshold,
        ok: photon_ratio < threshold,
    })
}
