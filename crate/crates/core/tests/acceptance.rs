//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Run with `cargo test -p homodyne-core --test acceptance`.

use std::f64::consts::{E, FRAC_PI_2};
use std::process::ExitCode;

use homodyne_core::measurement::{
    apply_measurement, compose, outcome_probability, rng_from_seed, sample_outcomes,
    MeasurementSetting,
};
use homodyne_core::protocols::{prepare_dss, prepare_superposition, repetitive_dss, OutcomePolicy};
use homodyne_core::pulse::{
    build_pulse, chi_p_bound, chi_x_bound, optimal_chi_p, optimal_chi_x, response_functions,
    strengths_numeric, CavityParams, GridSpec, LoShape, PulseKind,
};
use homodyne_core::spin::{spin_matrices, SpinEnsembleState};
use homodyne_core::C64;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::erf::erf;

type Outcome = (bool, String);
type Criterion = (&'static str, fn() -> Outcome);

fn random_state<R: Rng>(n: usize, rng: &mut R) -> SpinEnsembleState {
    let amps = (0..=n)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    SpinEnsembleState::from_amplitudes(n, amps).unwrap()
}

fn max_amplitude_gap(a: &SpinEnsembleState, b: &SpinEnsembleState) -> f64 {
    a.amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn css_baseline() -> Outcome {
    let worst = (1..=200)
        .map(|n| (SpinEnsembleState::css(n).unwrap().observables().xi_d - 1.0).abs())
        .fold(0.0, f64::max);
    (
        worst <= 1e-12,
        format!("max |xi_D(CSS) - 1| over N=1..200 = {worst:.2e} (tol 1e-12)"),
    )
}

fn heisenberg_limit() -> Outcome {
    let mut worst_dss: (f64, usize) = (0.0, 0);
    let mut worst_ideal: f64 = 0.0;
    for n in (10..=120).step_by(2) {
        let xi = prepare_dss(n, 2.0, 0.0, 0.0).unwrap().xi_d;
        let dev = (xi * (n as f64 + 2.0) - 1.0).abs();
        if dev > worst_dss.0 {
            worst_dss = (dev, n);
        }
        let ideal = SpinEnsembleState::dicke(n, 0.0).unwrap().observables().xi_d;
        worst_ideal = worst_ideal.max((ideal - 1.0 / (n as f64 + 2.0)).abs());
    }
    (
        worst_dss.0 <= 0.05 && worst_ideal <= 1e-12,
        format!(
            "max |xi_D(N+2) - 1| at chi_p=2 = {:.4} at N={} (tol 0.05); ideal Dicke max dev {:.1e} (tol 1e-12)",
            worst_dss.0, worst_dss.1, worst_ideal
        ),
    )
}

fn superposition_peaks() -> Outcome {
    let s = 50.0;
    let mut ok = true;
    let mut details = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for chi in [0.05, 0.1, 0.2] {
        let post = prepare_superposition(100, chi, -chi * s / 2.0, 0.0)
            .unwrap()
            .post_state;
        let peak = post.argmax_positive_m().unwrap();
        let dist: Vec<(f64, f64)> = post
            .prob_distribution()
            .into_iter()
            .filter(|(m, _)| *m > 0.0)
            .collect();
        let height = post.probability(peak).unwrap();
        let mass: f64 = dist.iter().map(|(_, p)| p).sum();
        let spread = dist
            .iter()
            .map(|(m, p)| p * (m - peak).powi(2))
            .sum::<f64>()
            / mass;
        ok &= peak == 5.0;
        if let Some((h, w)) = prev {
            ok &= height > h && spread < w;
        }
        prev = Some((height, spread));
        details.push(format!(
            "chi_x={chi}: peak m={peak}, P={height:.4}, width^2={spread:.4}"
        ));
    }
    (ok, details.join("; "))
}

fn superposition_fidelity() -> Outcome {
    let s = 50.0;
    let grid: Vec<f64> = (0..=48).map(|i| 0.02 + 0.01 * i as f64).collect();
    let mut ok = true;
    let mut details = Vec::new();
    for (name, frac) in [("-chi S/3", 1.0 / 3.0), ("-chi S/2", 0.5), ("-chi S", 1.0)] {
        let f: Vec<f64> = grid
            .iter()
            .map(|&c| {
                prepare_superposition(100, c, -c * s * frac, 0.0)
                    .unwrap()
                    .fidelity_vs_target
            })
            .collect();
        let worst_drop = f.windows(2).map(|w| w[0] - w[1]).fold(f64::MIN, f64::max);
        let last = *f.last().unwrap();
        ok &= worst_drop <= 0.0 && last > 0.99;
        details.push(format!(
            "X_L={name}: F(0.02)={:.4}, F(0.5)={last:.6}, max drop {worst_drop:.1e}",
            f[0]
        ));
    }
    (ok, details.join("; "))
}

fn strength_oracles() -> Outcome {
    let exp = PulseKind::Exponential;
    let exp_pulse = response_functions(&build_pulse(exp, &GridSpec::default_for(&exp)).unwrap())
        .with_local_oscillator(LoShape::Beta1)
        .unwrap();
    let spec = PulseKind::OptimalXSpectral;
    let spec_pulse = response_functions(&build_pulse(spec, &GridSpec::default_for(&spec)).unwrap())
        .with_local_oscillator(LoShape::Beta2)
        .unwrap();
    let mut ok = true;
    let mut details = Vec::new();
    for np in [1.0, 100.0] {
        let cav = CavityParams::reference(np).unwrap();
        let chi_p = strengths_numeric(&exp_pulse, &cav, FRAC_PI_2)
            .unwrap()
            .chi_p;
        let chi_x = strengths_numeric(&spec_pulse, &cav, 0.0).unwrap().chi_x;
        let ep = (chi_p / optimal_chi_p(&cav) - 1.0).abs();
        let ex = (chi_x / optimal_chi_x(&cav) - 1.0).abs();
        ok &= ep <= 1e-4 && ex <= 1e-3;
        details.push(format!(
            "N_p={np}: chi_p rel err {ep:.2e} (tol 1e-4), chi_x rel err {ex:.2e} (tol 1e-3)"
        ));
    }
    (ok, details.join("; "))
}

fn intracavity_peaks() -> Outcome {
    let peak = |kind: PulseKind| {
        response_functions(&build_pulse(kind, &GridSpec::default_for(&kind)).unwrap())
            .peak_intracavity()
            .unwrap()
            .1
    };
    let exp = peak(PulseKind::Exponential);
    let spec = peak(PulseKind::OptimalXSpectral);
    let long = peak(PulseKind::LongExponential { n_t: 10.0 });
    let long_ref = 2.0 / (10f64.sqrt() * E);
    let checks = [
        (exp - 2.0 / E).abs() <= 1e-4,
        (spec / 4.0 - 1.0).abs() <= 0.02,
        (long / long_ref - 1.0).abs() <= 0.02,
    ];
    (
        checks.iter().all(|c| *c),
        format!(
            "exponential {exp:.6} vs 2/e={:.6} [{}]; optimal-x {spec:.4} vs 4 (2%) [{}]; long n_t=10 {long:.4} vs {long_ref:.4} (2%) [{}]",
            2.0 / E,
            tag(checks[0]),
            tag(checks[1]),
            tag(checks[2])
        ),
    )
}

fn feasibility_numbers() -> Outcome {
    let cav = CavityParams::reference(100.0).unwrap();
    let bx = chi_x_bound(&cav);
    let bp = chi_p_bound(&cav, 1.0);
    let ok = (bx / 1.4e-4 - 1.0).abs() <= 0.05 && (bp / 3.0 - 1.0).abs() <= 0.05;
    (
        ok,
        format!("chi_x bound {bx:.4e} vs 1.4e-4, chi_p bound {bp:.4} vs 3 (tol 5%)"),
    )
}

fn povm_completeness() -> Outcome {
    let mut rng = rng_from_seed(8);
    let sizes = [2usize, 40, 101];
    let strengths = [0.0, 0.2, 2.0];
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let state = random_state(sizes[i % sizes.len()], &mut rng);
        for &cx in &strengths {
            for &cp in &strengths {
                let setting = MeasurementSetting::new(cx, cp, rng.random_range(-1.0..1.0)).unwrap();
                let total = outcome_probability(&state, &setting, f64::NEG_INFINITY, f64::INFINITY);
                worst = worst.max((total - 1.0).abs());
            }
        }
    }
    (
        worst <= 1e-9,
        format!("max |integral - 1| over 20 states x 9 settings = {worst:.2e} (tol 1e-9)"),
    )
}

fn composition_identity() -> Outcome {
    let mut rng = rng_from_seed(9);
    let mut worst: f64 = 0.0;
    let mut trials = 0;
    for rounds in 1..=10 {
        for _ in 0..10 {
            let n = rng.random_range(2..=40);
            let state = random_state(n, &mut rng);
            let cx = rng.random_range(0.0..0.3);
            let cp = rng.random_range(0.0..0.8);
            let spec: Vec<(MeasurementSetting, f64)> = (0..rounds)
                .map(|_| {
                    let s = MeasurementSetting::new(cx, cp, rng.random_range(-1.0..1.0)).unwrap();
                    (s, rng.random_range(-3.0..3.0))
                })
                .collect();
            let mut seq = state.clone();
            for (s, y) in &spec {
                seq = apply_measurement(&seq, s, *y).unwrap().0;
            }
            let eff = compose(&spec).unwrap();
            let sum: f64 = spec.iter().map(|(_, y)| y).sum();
            let shape_ok = (eff.setting.chi_p - (rounds as f64).sqrt() * cp).abs() < 1e-12
                && (eff.outcome - sum / (rounds as f64).sqrt()).abs() < 1e-12;
            if !shape_ok {
                return (false, format!("effective parameters wrong at n={rounds}"));
            }
            let direct = apply_measurement(&state, &eff.setting, eff.outcome)
                .unwrap()
                .0;
            worst = worst.max(max_amplitude_gap(&seq, &direct));
            trials += 1;
        }
    }
    (
        worst <= 1e-12,
        format!("{trials} random trials, n=1..10: max amplitude gap {worst:.2e} (tol 1e-12)"),
    )
}

fn repetitive_behaviour() -> Outcome {
    let xi: Vec<f64> = (1..=25)
        .map(|n| {
            repetitive_dss(40, 0.4, n, OutcomePolicy::AllZero)
                .unwrap()
                .xi_d
        })
        .collect();
    let nonincreasing = xi.windows(2).all(|w| w[1] <= w[0]);
    let single = prepare_dss(40, 2.0, 0.0, 0.0).unwrap().xi_d;
    let rel = (xi[24] / single - 1.0).abs();
    let mut gap: f64 = 0.0;
    for chi in [0.2, 0.4, 0.7] {
        for n in 1..=25 {
            let rep = repetitive_dss(40, chi, n, OutcomePolicy::AllZero).unwrap();
            let one = prepare_dss(40, (n as f64).sqrt() * chi, 0.0, 0.0).unwrap();
            gap = gap.max(max_amplitude_gap(&rep.post_state, &one.post_state));
        }
    }
    (
        nonincreasing && rel <= 0.05 && gap <= 1e-12,
        format!(
            "xi_D(n) nonincreasing n=1..25: {nonincreasing}; xi_D(25)={:.6} vs chi_p=2 single {single:.6} (rel {rel:.1e}, tol 5%); sqrt(n) equivalence gap {gap:.1e} (tol 1e-12)",
            xi[24]
        ),
    )
}

/// Mixture CDF of the outcome: Σ_m P(m) Φ((y - c_m)/σ) with σ² = 1/2.
fn mixture_cdf(dist: &[(f64, f64)], chi_p: f64, y: f64) -> f64 {
    dist.iter()
        .map(|(m, p)| p * 0.5 * (1.0 + erf(y + chi_p * m)))
        .sum()
}

fn sampler_statistics() -> Outcome {
    let chi = 0.4;
    let css = SpinEnsembleState::css(40).unwrap();
    let setting = MeasurementSetting::phase(chi, 0.0).unwrap();
    let shots = 100_000;
    let ys = sample_outcomes(&css, &setting, 2024, shots).unwrap();
    let n = shots as f64;
    let mean = ys.iter().sum::<f64>() / n;
    let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1.0);

    // exact moments of Υ = -χ m + ε, ε ~ N(0, 1/2)
    let dist = css.prob_distribution();
    let m2: f64 = dist.iter().map(|(m, p)| p * m * m).sum();
    let m4: f64 = dist.iter().map(|(m, p)| p * m.powi(4)).sum();
    let sigma2 = 0.5 + chi * chi * m2;
    let mu4 = chi.powi(4) * m4 + 6.0 * chi * chi * m2 * 0.5 + 3.0 * 0.25;
    let se_mean = (sigma2 / n).sqrt();
    let se_var = ((mu4 - sigma2 * sigma2) / n).sqrt();
    let mean_ok = mean.abs() <= 5.0 * se_mean;
    let var_ok = (var - 2.1).abs() <= 5.0 * se_var && (sigma2 - 2.1).abs() < 1e-12;

    // χ² goodness of fit over equal-width bins, tails pooled into the end bins
    let edges: Vec<f64> = (0..=30).map(|i| -4.5 + 0.3 * i as f64).collect();
    let bins = edges.len() + 1;
    let mut observed = vec![0.0; bins];
    for y in &ys {
        let k = edges.partition_point(|e| e <= y);
        observed[k] += 1.0;
    }
    let cdf: Vec<f64> = edges.iter().map(|&e| mixture_cdf(&dist, chi, e)).collect();
    let mut expected = Vec::with_capacity(bins);
    expected.push(cdf[0]);
    expected.extend(cdf.windows(2).map(|w| w[1] - w[0]));
    expected.push(1.0 - cdf[cdf.len() - 1]);
    let stat: f64 = observed
        .iter()
        .zip(&expected)
        .map(|(o, p)| {
            let e = p * n;
            (o - e).powi(2) / e
        })
        .sum();
    let dof = (bins - 1) as f64;
    let p_value = 1.0 - ChiSquared::new(dof).unwrap().cdf(stat);
    let fit_ok = p_value > 1e-3 && expected.iter().all(|p| p * n >= 5.0);
    (
        mean_ok && var_ok && fit_ok,
        format!(
            "mean {mean:.4} (5 SE = {:.4}); var {var:.4} vs 2.1 (5 SE = {:.4}); chi2 = {stat:.1} on {dof} dof, p = {p_value:.3} (> 0.001)",
            5.0 * se_mean,
            5.0 * se_var
        ),
    )
}

fn matrix_oracle() -> Outcome {
    let mut rng = rng_from_seed(12);
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let n = 1 + i % 12;
        let state = random_state(n, &mut rng);
        let m = spin_matrices(n).unwrap();
        worst = worst.max(
            (m.transverse_second_moment(&state) - state.observables().mean_sx2_plus_sy2).abs(),
        );
    }
    (
        worst <= 1e-10,
        format!("50 random states N<=12: max deviation {worst:.2e} (tol 1e-10)"),
    )
}

fn tag(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("CSS baseline", css_baseline),
        ("Heisenberg limit", heisenberg_limit),
        ("superposition peak locations", superposition_peaks),
        ("superposition fidelity", superposition_fidelity),
        ("strength oracles", strength_oracles),
        ("intracavity peaks", intracavity_peaks),
        ("feasibility numbers", feasibility_numbers),
        ("POVM completeness", povm_completeness),
        ("composition identity", composition_identity),
        ("repetitive measurement", repetitive_behaviour),
        ("sampler statistics", sampler_statistics),
        ("matrix-oracle identity", matrix_oracle),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (ok, detail) = run();
        failures += usize::from(!ok);
        println!("criterion {:>2} {:<30} {}  {detail}", i + 1, name, tag(ok));
    }
    println!(
        "acceptance: {} passed, {failures} failed",
        criteria.len() - failures
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
