//! Figure tables, generic parameter sweeps and Monte-Carlo outcome sampling.
//!
//! Each entry point returns a [`SweepResult`] whose rows follow the grid
//! order, whether points are evaluated serially or in parallel.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::measurement::{apply_measurement, compose, sample_outcome, MeasurementSetting};
use crate::protocols::{
    nearest_lattice_m, prepare_dss, prepare_superposition, repetitive_dss, OutcomePolicy,
    SATURATING_CHI_P,
};
use crate::spin::{total_spin, SpinEnsembleState};
use crate::sweep::{derive_seed, OutputFormat, SweepGrid, SweepResult, SweepSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Panel {
    A,
    B,
    C,
}

impl std::str::FromStr for Panel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a" | "A" => Ok(Panel::A),
            "b" | "B" => Ok(Panel::B),
            "c" | "C" => Ok(Panel::C),
            _ => invalid(format!("unknown panel '{s}', expected a, b or c")),
        }
    }
}

impl Panel {
    fn tag(self) -> &'static str {
        match self {
            Panel::A => "a",
            Panel::B => "b",
            Panel::C => "c",
        }
    }
}

/// Optional replacements for the default figure parameters.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Overrides {
    pub atoms: Option<usize>,
    pub chi_x: Option<f64>,
    pub chi_p: Option<f64>,
    pub eta: Option<f64>,
    pub outcome: Option<f64>,
    pub rounds: Option<usize>,
    pub seed: u64,
}

impl Overrides {
    /// The overrides that are set, keyed by sweep parameter name.
    pub fn fixed(&self) -> BTreeMap<String, f64> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: Option<f64>| {
            if let Some(v) = v {
                m.insert(k.to_string(), v);
            }
        };
        put("N", self.atoms.map(|n| n as f64));
        put("chi_x", self.chi_x);
        put("chi_p", self.chi_p);
        put("eta", self.eta);
        put("outcome", self.outcome);
        put("n", self.rounds.map(|n| n as f64));
        m
    }

    fn eta(&self) -> f64 {
        self.eta.unwrap_or(0.0)
    }

    fn validate(&self) -> Result<()> {
        if self.atoms == Some(0) {
            return invalid("--N must be at least 1");
        }
        if self.rounds == Some(0) {
            return invalid("--n must be at least 1");
        }
        for (name, v) in [("chi-x", self.chi_x), ("chi-p", self.chi_p)] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return invalid(format!("--{name} must be positive, got {v}"));
                }
            }
        }
        for (name, v) in [("eta", self.eta), ("outcome", self.outcome)] {
            if let Some(v) = v {
                if !v.is_finite() {
                    return invalid(format!("--{name} must be finite"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Execution {
    pub parallel: bool,
}

fn map_points<T, F>(points: &[T], exec: Execution, f: F) -> Result<Vec<Vec<f64>>>
where
    T: Sync,
    F: Fn(usize, &T) -> Result<Vec<f64>> + Sync,
{
    if exec.parallel {
        points
            .par_iter()
            .enumerate()
            .map(|(i, p)| f(i, p))
            .collect()
    } else {
        points.iter().enumerate().map(|(i, p)| f(i, p)).collect()
    }
}

fn spec(protocol: String, parameter: &str, grid: SweepGrid, ov: &Overrides) -> SweepSpec {
    SweepSpec {
        protocol,
        parameter: parameter.to_string(),
        grid,
        fixed: ov.fixed(),
        seed: ov.seed,
        output: None,
        format: OutputFormat::Csv,
    }
}

fn m_grid(atom_count: usize) -> SweepGrid {
    let s = total_spin(atom_count);
    SweepGrid::linear(-s, s, atom_count + 1)
}

fn label(v: f64) -> String {
    format!("{v}")
}

/// Default χ_x grid for the fidelity panel.
pub const FIG2_CHI_X_GRID: (f64, f64, usize) = (0.02, 0.5, 49);
/// Default χ_p grid for the strength panels.
pub const CHI_P_GRID: (f64, f64, usize) = (0.05, 4.0, 80);

const XL_FRACTIONS: [(&str, f64); 3] = [("third", 1.0 / 3.0), ("half", 0.5), ("full", 1.0)];

/// Superposition states: P(m) for several χ_x (a), several X_L (b), and
/// fidelity against the two-Dicke target versus χ_x (c).
pub fn fig2(panel: Panel, ov: &Overrides, exec: Execution) -> Result<SweepResult> {
    ov.validate()?;
    let n = ov.atoms.unwrap_or(100);
    let s = total_spin(n);
    let eta = ov.eta();
    let protocol = format!("fig2{}", panel.tag());
    match panel {
        Panel::A => {
            let chis = ov.chi_x.map_or(vec![0.05, 0.1, 0.2], |c| vec![c]);
            let states = chis
                .iter()
                .map(|&c| {
                    Ok(
                        prepare_superposition(n, c, ov.outcome.unwrap_or(-c * s / 2.0), eta)?
                            .post_state,
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            let columns = std::iter::once("m".to_string())
                .chain(chis.iter().map(|c| format!("p_chi_x_{}", label(*c))))
                .collect();
            let rows = probability_rows(&states);
            SweepResult::new(spec(protocol, "m", m_grid(n), ov), columns, rows)
        }
        Panel::B => {
            let chi = ov.chi_x.unwrap_or(0.2);
            let states = XL_FRACTIONS
                .iter()
                .map(|(_, f)| Ok(prepare_superposition(n, chi, -chi * s * f, eta)?.post_state))
                .collect::<Result<Vec<_>>>()?;
            let columns = std::iter::once("m".to_string())
                .chain(XL_FRACTIONS.iter().map(|(name, _)| format!("p_xl_{name}")))
                .collect();
            SweepResult::new(
                spec(protocol, "m", m_grid(n), ov),
                columns,
                probability_rows(&states),
            )
        }
        Panel::C => {
            let (a, b, count) = FIG2_CHI_X_GRID;
            let grid = SweepGrid::linear(a, b, count);
            let values = grid.values()?;
            let rows = map_points(&values, exec, |_, &chi| {
                let mut row = vec![chi];
                for (_, f) in XL_FRACTIONS {
                    row.push(prepare_superposition(n, chi, -chi * s * f, eta)?.fidelity_vs_target);
                }
                Ok(row)
            })?;
            let columns = std::iter::once("chi_x".to_string())
                .chain(XL_FRACTIONS.iter().map(|(name, _)| format!("f_xl_{name}")))
                .collect();
            SweepResult::new(spec(protocol, "chi_x", grid, ov), columns, rows)
        }
    }
}

fn probability_rows(states: &[SpinEnsembleState]) -> Vec<Vec<f64>> {
    let dists: Vec<Vec<(f64, f64)>> = states.iter().map(|s| s.prob_distribution()).collect();
    let len = dists.first().map_or(0, |d| d.len());
    (0..len)
        .map(|k| {
            std::iter::once(dists[0][k].0)
                .chain(dists.iter().map(|d| d[k].1))
                .collect()
        })
        .collect()
}

/// ξ_D after `rounds` phase measurements of strength `chi_p`, each returning
/// `effective_outcome/√rounds`, so the composed outcome is `effective_outcome`.
fn xi_after_rounds(
    atoms: usize,
    chi_p: f64,
    rounds: usize,
    effective_outcome: f64,
    eta: f64,
) -> Result<f64> {
    let setting = MeasurementSetting::phase(chi_p, eta)?;
    let per_round = effective_outcome / (rounds as f64).sqrt();
    let composed = compose(&vec![(setting, per_round); rounds])?;
    let css = SpinEnsembleState::css(atoms)?;
    Ok(
        apply_measurement(&css, &composed.setting, composed.outcome)?
            .0
            .observables()
            .xi_d,
    )
}

/// Dicke squeezing: ξ_D versus P_L (a), versus χ_p (b), and the saturated
/// value versus N with the `1/(N+2)` reference (c).
pub fn fig3(panel: Panel, ov: &Overrides, exec: Execution) -> Result<SweepResult> {
    ov.validate()?;
    let eta = ov.eta();
    let protocol = format!("fig3{}", panel.tag());
    match panel {
        Panel::A => {
            let n = ov.atoms.unwrap_or(40);
            let chis = ov.chi_p.map_or(vec![0.2, 0.4], |c| vec![c]);
            let grid = SweepGrid::linear(-1.0, 1.0, 81);
            let values = grid.values()?;
            let s = total_spin(n);
            let rows = map_points(&values, exec, |_, &frac| {
                let mut row = vec![frac];
                for &c in &chis {
                    let p_l = frac * c * s;
                    row.push(p_l);
                    row.push(prepare_dss(n, c, p_l, eta)?.xi_d);
                }
                Ok(row)
            })?;
            let mut columns = vec!["p_l_frac".to_string()];
            for c in &chis {
                columns.push(format!("p_l_chi_p_{}", label(*c)));
                columns.push(format!("xi_d_chi_p_{}", label(*c)));
            }
            SweepResult::new(spec(protocol, "p_l_frac", grid, ov), columns, rows)
        }
        Panel::B => {
            let sizes = ov.atoms.map_or(vec![40, 80, 120], |n| vec![n]);
            let (a, b, count) = CHI_P_GRID;
            let grid = SweepGrid::linear(a, b, count);
            let values = grid.values()?;
            let rows = map_points(&values, exec, |_, &chi| {
                let mut row = vec![chi];
                for &n in &sizes {
                    row.push(prepare_dss(n, chi, ov.outcome.unwrap_or(0.0), eta)?.xi_d);
                }
                Ok(row)
            })?;
            let columns = std::iter::once("chi_p".to_string())
                .chain(sizes.iter().map(|n| format!("xi_d_n_{n}")))
                .collect();
            SweepResult::new(spec(protocol, "chi_p", grid, ov), columns, rows)
        }
        Panel::C => {
            let chi = ov.chi_p.unwrap_or(SATURATING_CHI_P);
            let grid = SweepGrid::linear(10.0, 120.0, 56);
            let values = grid.values()?;
            let rows = map_points(&values, exec, |_, &nf| {
                let n = nf.round() as usize;
                let xi = prepare_dss(n, chi, ov.outcome.unwrap_or(0.0), eta)?.xi_d;
                let reference = 1.0 / (n as f64 + 2.0);
                Ok(vec![n as f64, xi, reference, xi / reference])
            })?;
            let columns = ["n_atoms", "xi_d", "reference", "xi_d_times_n_plus_2"]
                .map(String::from)
                .to_vec();
            SweepResult::new(spec(protocol, "N", grid, ov), columns, rows)
        }
    }
}

/// Repetitive measurement: ξ_D versus effective P_L (a) and versus χ_p (b)
/// for several round counts, and versus the round count (c).
pub fn fig4(panel: Panel, ov: &Overrides, exec: Execution) -> Result<SweepResult> {
    ov.validate()?;
    let n = ov.atoms.unwrap_or(40);
    let eta = ov.eta();
    let protocol = format!("fig4{}", panel.tag());
    let round_set = ov.rounds.map_or(vec![1, 5, 25], |r| vec![r]);
    match panel {
        Panel::A => {
            let chi = ov.chi_p.unwrap_or(0.4);
            let s = total_spin(n);
            let grid = SweepGrid::linear(-1.0, 1.0, 81);
            let values = grid.values()?;
            let rows = map_points(&values, exec, |_, &frac| {
                let mut row = vec![frac, frac * chi * s];
                for &r in &round_set {
                    row.push(xi_after_rounds(n, chi, r, frac * chi * s, eta)?);
                }
                Ok(row)
            })?;
            let columns = ["p_l_frac".to_string(), "p_l".to_string()]
                .into_iter()
                .chain(round_set.iter().map(|r| format!("xi_d_rounds_{r}")))
                .collect();
            SweepResult::new(spec(protocol, "p_l_frac", grid, ov), columns, rows)
        }
        Panel::B => {
            let (a, b, count) = CHI_P_GRID;
            let grid = SweepGrid::linear(a, b, count);
            let values = grid.values()?;
            let rows = map_points(&values, exec, |_, &chi| {
                let mut row = vec![chi];
                for &r in &round_set {
                    row.push(xi_after_rounds(n, chi, r, ov.outcome.unwrap_or(0.0), eta)?);
                }
                Ok(row)
            })?;
            let columns = std::iter::once("chi_p".to_string())
                .chain(round_set.iter().map(|r| format!("xi_d_rounds_{r}")))
                .collect();
            SweepResult::new(spec(protocol, "chi_p", grid, ov), columns, rows)
        }
        Panel::C => {
            let chis = ov.chi_p.map_or(vec![0.2, 0.4], |c| vec![c]);
            let max_rounds = ov.rounds.unwrap_or(100).max(2);
            let grid = SweepGrid::linear(1.0, max_rounds as f64, max_rounds);
            let values = grid.values()?;
            let rows = map_points(&values, exec, |_, &rf| {
                let r = rf.round() as usize;
                let mut row = vec![r as f64];
                for &c in &chis {
                    row.push(repetitive_dss(n, c, r, OutcomePolicy::AllZero)?.xi_d);
                    let optimal = (SATURATING_CHI_P / c).powi(2).round() as usize;
                    row.push(if r == optimal { 1.0 } else { 0.0 });
                }
                Ok(row)
            })?;
            let mut columns = vec!["rounds".to_string()];
            for c in &chis {
                columns.push(format!("xi_d_chi_p_{}", label(*c)));
                columns.push(format!("optimal_rounds_chi_p_{}", label(*c)));
            }
            SweepResult::new(spec(protocol, "n", grid, ov), columns, rows)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepProtocol {
    Superposition,
    Dss,
    Repetitive,
    RepetitiveSampled,
}

impl SweepProtocol {
    pub fn parameters(self) -> &'static [&'static str] {
        match self {
            SweepProtocol::Superposition => &["N", "chi_x", "outcome", "eta"],
            SweepProtocol::Dss => &["N", "chi_p", "outcome", "eta"],
            SweepProtocol::Repetitive | SweepProtocol::RepetitiveSampled => &["N", "chi_p", "n"],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SweepProtocol::Superposition => "superposition",
            SweepProtocol::Dss => "dss",
            SweepProtocol::Repetitive => "repetitive",
            SweepProtocol::RepetitiveSampled => "repetitive_sampled",
        }
    }
}

impl std::str::FromStr for SweepProtocol {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "superposition" => Ok(Self::Superposition),
            "dss" => Ok(Self::Dss),
            "repetitive" => Ok(Self::Repetitive),
            "repetitive_sampled" => Ok(Self::RepetitiveSampled),
            _ => invalid(format!("unknown protocol '{s}'")),
        }
    }
}

fn positive_integer(name: &str, v: f64) -> Result<usize> {
    if v >= 1.0 && (v - v.round()).abs() < 1e-9 {
        Ok(v.round() as usize)
    } else {
        invalid(format!("{name} must be a positive integer, got {v}"))
    }
}

/// Runs `spec.protocol` over the grid of `spec.parameter`, with every other
/// parameter taken from `spec.fixed` or its default.
pub fn run_sweep(spec: &SweepSpec, exec: Execution) -> Result<SweepResult> {
    let protocol: SweepProtocol = spec.protocol.parse()?;
    let known = protocol.parameters();
    if !known.contains(&spec.parameter.as_str()) {
        return invalid(format!(
            "protocol '{}' has no parameter '{}'",
            spec.protocol, spec.parameter
        ));
    }
    if let Some(bad) = spec.fixed.keys().find(|k| !known.contains(&k.as_str())) {
        return invalid(format!(
            "protocol '{}' has no parameter '{bad}'",
            spec.protocol
        ));
    }
    let values = spec.grid.values()?;
    let get = |point: &BTreeMap<String, f64>, k: &str, default: f64| {
        point.get(k).copied().unwrap_or(default)
    };

    let (columns, rows): (Vec<&str>, _) = match protocol {
        SweepProtocol::Superposition => (
            vec![
                "fidelity",
                "target_m_c",
                "argmax_positive_m",
                "mean_sz2",
                "var_sz",
                "xi_d",
            ],
            map_points(&values, exec, |_, &v| {
                let mut p = spec.fixed.clone();
                p.insert(spec.parameter.clone(), v);
                let n = positive_integer("N", get(&p, "N", 100.0))?;
                let chi = get(&p, "chi_x", 0.2);
                let r = prepare_superposition(
                    n,
                    chi,
                    get(&p, "outcome", -chi * total_spin(n) / 2.0),
                    get(&p, "eta", 0.0),
                )?;
                let o = r.post_state.observables();
                let peak = r.post_state.argmax_positive_m().unwrap_or(f64::NAN);
                Ok(vec![
                    v,
                    r.fidelity_vs_target,
                    r.target_m_c,
                    peak,
                    o.mean_sz2,
                    o.var_sz,
                    o.xi_d,
                ])
            })?,
        ),
        SweepProtocol::Dss => (
            vec!["xi_d", "mean_sz", "var_sz"],
            map_points(&values, exec, |_, &v| {
                let mut p = spec.fixed.clone();
                p.insert(spec.parameter.clone(), v);
                let n = positive_integer("N", get(&p, "N", 40.0))?;
                let r = prepare_dss(
                    n,
                    get(&p, "chi_p", 0.4),
                    get(&p, "outcome", 0.0),
                    get(&p, "eta", 0.0),
                )?;
                let o = r.post_state.observables();
                Ok(vec![v, r.xi_d, o.mean_sz, o.var_sz])
            })?,
        ),
        SweepProtocol::Repetitive | SweepProtocol::RepetitiveSampled => (
            vec!["xi_d", "effective_outcome", "mean_sz", "var_sz"],
            map_points(&values, exec, |i, &v| {
                let mut p = spec.fixed.clone();
                p.insert(spec.parameter.clone(), v);
                let n = positive_integer("N", get(&p, "N", 40.0))?;
                let rounds = positive_integer("n", get(&p, "n", 1.0))?;
                let policy = if protocol == SweepProtocol::Repetitive {
                    OutcomePolicy::AllZero
                } else {
                    OutcomePolicy::Sampled {
                        seed: derive_seed(spec.seed, i as u64),
                    }
                };
                let r = repetitive_dss(n, get(&p, "chi_p", 0.4), rounds, policy)?;
                let o = r.post_state.observables();
                Ok(vec![v, r.xi_d, r.outcome, o.mean_sz, o.var_sz])
            })?,
        ),
    };
    let columns = std::iter::once(spec.parameter.clone())
        .chain(columns.into_iter().map(String::from))
        .collect();
    SweepResult::new(spec.clone(), columns, rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleProtocol {
    Dss,
    Superposition,
}

impl std::str::FromStr for SampleProtocol {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dss" => Ok(Self::Dss),
            "superposition" => Ok(Self::Superposition),
            _ => invalid(format!(
                "unknown sample protocol '{s}', expected dss or superposition"
            )),
        }
    }
}

/// Draws `shots` single-measurement outcomes from a CSS and records the
/// conditional post-state figure of merit. Shot `i` uses seed
/// `derive_seed(seed, i)`.
pub fn sample_shots(
    protocol: SampleProtocol,
    shots: usize,
    ov: &Overrides,
    exec: Execution,
) -> Result<SweepResult> {
    ov.validate()?;
    if shots == 0 {
        return invalid("at least one shot is required");
    }
    let eta = ov.eta();
    let (n, setting, name, merit) = match protocol {
        SampleProtocol::Dss => {
            let n = ov.atoms.unwrap_or(40);
            (
                n,
                MeasurementSetting::phase(ov.chi_p.unwrap_or(0.4), eta)?,
                "sample_dss",
                "xi_d",
            )
        }
        SampleProtocol::Superposition => {
            let n = ov.atoms.unwrap_or(100);
            (
                n,
                MeasurementSetting::amplitude(ov.chi_x.unwrap_or(0.2), eta)?,
                "sample_superposition",
                "fidelity",
            )
        }
    };
    let css = SpinEnsembleState::css(n)?;
    let idx: Vec<usize> = (0..shots).collect();
    let rows = map_points(&idx, exec, |_, &i| {
        let rec = sample_outcome(&css, &setting, derive_seed(ov.seed, i as u64))?;
        let (post, _) = apply_measurement(&css, &setting, rec.outcome)?;
        let score = match protocol {
            SampleProtocol::Dss => post.observables().xi_d,
            SampleProtocol::Superposition => {
                let centre = if rec.outcome < 0.0 {
                    (-rec.outcome / setting.chi_x).sqrt()
                } else {
                    0.0
                };
                let target =
                    SpinEnsembleState::superposition_target(n, nearest_lattice_m(n, centre), eta)?;
                target.fidelity(&post)?
            }
        };
        Ok(vec![i as f64, rec.outcome, rec.density, score])
    })?;
    let grid = SweepGrid::linear(0.0, (shots.max(2) - 1) as f64, shots.max(2));
    let mut sweep_spec = spec(name.to_string(), "shot", grid, ov);
    sweep_spec.fixed.insert("shots".into(), shots as f64);
    let columns = ["shot", "outcome", "density", merit]
        .map(String::from)
        .to_vec();
    SweepResult::new(sweep_spec, columns, rows)
}
