//! Collective spin states of `N` two-level atoms in the maximal-`S` symmetric
//! subspace, stored as dense amplitude vectors over the Dicke basis
//! `|S, m⟩`, `m = -S, ..., S`, with `S = N/2`.
//!
//! Index `k` of the amplitude vector corresponds to `m = k - S`. For odd `N`
//! the `m` values are half-integers.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Tolerance used when validating normalization.
pub const NORM_TOL: f64 = 1e-12;

/// Largest ensemble accepted by [`spin_matrices`].
pub const MATRIX_ORACLE_MAX_ATOMS: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinEnsembleState {
    atom_count: usize,
    amplitudes: Vec<C64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableReport {
    pub mean_sz: f64,
    pub mean_sz2: f64,
    pub var_sz: f64,
    pub mean_sx2_plus_sy2: f64,
    /// Dicke squeezing parameter `N (Var S_z + 1/4) / ⟨S_x² + S_y²⟩`.
    pub xi_d: f64,
}

/// Total spin `S = N/2`.
#[inline]
pub fn total_spin(atom_count: usize) -> f64 {
    atom_count as f64 / 2.0
}

/// Maps a magnetic quantum number onto its amplitude index, rejecting values
/// that are not on the lattice `-S, -S+1, ..., S`.
pub fn m_to_index(atom_count: usize, m: f64) -> Result<usize> {
    if !m.is_finite() {
        return invalid(format!("m = {m} is not finite"));
    }
    let k = m + total_spin(atom_count);
    let k_round = k.round();
    if (k - k_round).abs() > 1e-9 || k_round < 0.0 || k_round > atom_count as f64 {
        return invalid(format!(
            "m = {m} is not on the lattice of N = {atom_count} (S = {})",
            total_spin(atom_count)
        ));
    }
    Ok(k_round as usize)
}

fn check_atoms(atom_count: usize) -> Result<()> {
    if atom_count == 0 {
        return invalid("atom count must be at least 1");
    }
    Ok(())
}

impl SpinEnsembleState {
    /// Builds a state from raw amplitudes and normalizes it.
    pub fn from_amplitudes(atom_count: usize, amplitudes: Vec<C64>) -> Result<Self> {
        check_atoms(atom_count)?;
        if amplitudes.len() != atom_count + 1 {
            return invalid(format!(
                "expected {} amplitudes for N = {atom_count}, got {}",
                atom_count + 1,
                amplitudes.len()
            ));
        }
        if amplitudes
            .iter()
            .any(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return invalid("amplitudes must be finite");
        }
        let mut state = Self {
            atom_count,
            amplitudes,
        };
        state.normalize()?;
        Ok(state)
    }

    /// Coherent spin state along `+x`: binomial amplitudes
    /// `2^{-S} C(2S, S+m)^{1/2}`.
    pub fn css(atom_count: usize) -> Result<Self> {
        check_atoms(atom_count)?;
        // ln C(N, k) built incrementally so that large N never overflows.
        let n = atom_count as f64;
        let half_ln2 = n * std::f64::consts::LN_2 / 2.0;
        let mut ln_binom = 0.0;
        let mut amplitudes = Vec::with_capacity(atom_count + 1);
        for k in 0..=atom_count {
            if k > 0 {
                ln_binom += ((atom_count - k + 1) as f64).ln() - (k as f64).ln();
            }
            amplitudes.push(C64::new((0.5 * ln_binom - half_ln2).exp(), 0.0));
        }
        let mut state = Self {
            atom_count,
            amplitudes,
        };
        state.normalize()?;
        Ok(state)
    }

    pub fn dicke(atom_count: usize, m: f64) -> Result<Self> {
        check_atoms(atom_count)?;
        let k = m_to_index(atom_count, m)?;
        let mut amplitudes = vec![C64::new(0.0, 0.0); atom_count + 1];
        amplitudes[k] = C64::new(1.0, 0.0);
        Ok(Self {
            atom_count,
            amplitudes,
        })
    }

    /// Two-Dicke superposition `(e^{iηm_c}|S,m_c⟩ + e^{-iηm_c}|S,-m_c⟩)/√2`.
    ///
    /// For `m_c = 0` both branches coincide and the state is `|S,0⟩`.
    pub fn superposition_target(atom_count: usize, m_c: f64, eta: f64) -> Result<Self> {
        check_atoms(atom_count)?;
        if m_c < 0.0 {
            return invalid(format!("m_c = {m_c} must be non-negative"));
        }
        let kp = m_to_index(atom_count, m_c)?;
        let km = m_to_index(atom_count, -m_c)?;
        if kp == km {
            return Self::dicke(atom_count, m_c);
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); atom_count + 1];
        let s = std::f64::consts::FRAC_1_SQRT_2;
        amplitudes[kp] = C64::from_polar(s, eta * m_c);
        amplitudes[km] = C64::from_polar(s, -eta * m_c);
        Ok(Self {
            atom_count,
            amplitudes,
        })
    }

    pub fn atom_count(&self) -> usize {
        self.atom_count
    }

    pub fn total_spin(&self) -> f64 {
        total_spin(self.atom_count)
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    /// Magnetic quantum number of amplitude index `k`.
    #[inline]
    pub fn m_of(&self, k: usize) -> f64 {
        k as f64 - self.total_spin()
    }

    /// Iterator over the lattice `m = -S, ..., S`.
    pub fn m_values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.atom_count).map(move |k| self.m_of(k))
    }

    pub fn amplitude(&self, m: f64) -> Result<C64> {
        Ok(self.amplitudes[m_to_index(self.atom_count, m)?])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    fn normalize(&mut self) -> Result<()> {
        let norm = self.norm_sqr().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidState(format!(
                "cannot normalize state with norm {norm}"
            )));
        }
        self.amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(())
    }

    /// `(m, |a_m|²)` pairs over the whole lattice.
    pub fn prob_distribution(&self) -> Vec<(f64, f64)> {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(k, a)| (self.m_of(k), a.norm_sqr()))
            .collect()
    }

    pub fn probability(&self, m: f64) -> Result<f64> {
        Ok(self.amplitude(m)?.norm_sqr())
    }

    pub fn observables(&self) -> ObservableReport {
        let s = self.total_spin();
        let (mut mean_sz, mut mean_sz2) = (0.0, 0.0);
        for (m, p) in self.prob_distribution() {
            mean_sz += p * m;
            mean_sz2 += p * m * m;
        }
        let var_sz = (mean_sz2 - mean_sz * mean_sz).max(0.0);
        let mean_sx2_plus_sy2 = s * (s + 1.0) - mean_sz2;
        let xi_d = self.atom_count as f64 * (var_sz + 0.25) / mean_sx2_plus_sy2;
        ObservableReport {
            mean_sz,
            mean_sz2,
            var_sz,
            mean_sx2_plus_sy2,
            xi_d,
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.atom_count != other.atom_count {
            return invalid(format!(
                "atom counts differ: {} vs {}",
                self.atom_count, other.atom_count
            ));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|⟨self|other⟩|²`, clamped into `[0, 1]` against rounding.
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr().clamp(0.0, 1.0))
    }

    /// Multiplies each amplitude by `e^{iηm}`.
    pub fn with_sz_phase(&self, eta: f64) -> Self {
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(k, a)| a * C64::from_polar(1.0, eta * self.m_of(k)))
            .collect();
        Self {
            atom_count: self.atom_count,
            amplitudes,
        }
    }

    /// Most probable `m` among those strictly greater than zero.
    pub fn argmax_positive_m(&self) -> Option<f64> {
        self.prob_distribution()
            .into_iter()
            .filter(|(m, _)| *m > 0.0)
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(m, _)| m)
    }
}

/// Explicit `S_x`, `S_y`, `S_z` matrices in the Dicke basis.
#[derive(Clone, Debug)]
pub struct SpinMatrices {
    pub sx: DMatrix<C64>,
    pub sy: DMatrix<C64>,
    pub sz: DMatrix<C64>,
}

impl SpinMatrices {
    /// `⟨ψ|A|ψ⟩` for a Hermitian `A` (real part).
    pub fn expectation(op: &DMatrix<C64>, state: &SpinEnsembleState) -> f64 {
        let v = nalgebra::DVector::from_column_slice(state.amplitudes());
        (v.adjoint() * op * &v)[(0, 0)].re
    }

    /// `⟨S_x² + S_y²⟩` by matrix products.
    pub fn transverse_second_moment(&self, state: &SpinEnsembleState) -> f64 {
        let op = &self.sx * &self.sx + &self.sy * &self.sy;
        Self::expectation(&op, state)
    }
}

/// Textbook angular-momentum matrices built from the ladder elements
/// `⟨m+1|S_+|m⟩ = √(S(S+1) - m(m+1))`.
pub fn spin_matrices(atom_count: usize) -> Result<SpinMatrices> {
    check_atoms(atom_count)?;
    if atom_count > MATRIX_ORACLE_MAX_ATOMS {
        return invalid(format!(
            "matrix oracle limited to N <= {MATRIX_ORACLE_MAX_ATOMS}, got {atom_count}"
        ));
    }
    let dim = atom_count + 1;
    let s = total_spin(atom_count);
    let mut raise = DMatrix::<C64>::zeros(dim, dim);
    let mut sz = DMatrix::<C64>::zeros(dim, dim);
    for k in 0..dim {
        let m = k as f64 - s;
        sz[(k, k)] = C64::new(m, 0.0);
        if k + 1 < dim {
            raise[(k + 1, k)] = C64::new((s * (s + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
        }
    }
    let lower = raise.adjoint();
    let sx = (&raise + &lower).map(|z| z * 0.5);
    let sy = (&raise - &lower).map(|z| z * C64::new(0.0, -0.5));
    Ok(SpinMatrices { sx, sy, sz })
}
