use approx::assert_relative_eq;
use homodyne_core::experiments::{fig3, fig4, Execution, Overrides, Panel};
use homodyne_core::measurement::{apply_measurement, outcome_pdf, sample_outcome};
use homodyne_core::protocols::{long_pulse_plan, repetitive_dss};
use homodyne_core::pulse::DEFAULT_FEASIBILITY_THRESHOLD;
use homodyne_core::{
    CavityParams, MeasurementRecord, MeasurementSetting, OutcomePolicy, SpinEnsembleState,
};
use proptest::prelude::*;

#[test]
fn sampled_record_replays_to_the_same_posterior() {
    let css = SpinEnsembleState::css(30).unwrap();
    let setting = MeasurementSetting::new(0.02, 0.3, 0.7).unwrap();
    let rec = sample_outcome(&css, &setting, 99).unwrap();

    let json = serde_json::to_string(&rec).unwrap();
    let back: MeasurementRecord = serde_json::from_str(&json).unwrap();
    assert_eq!(back, rec);

    let (post, density) = apply_measurement(&css, &back.setting(), back.outcome).unwrap();
    assert_relative_eq!(density, rec.density, max_relative = 1e-12);
    assert_relative_eq!(post.norm_sqr(), 1.0, epsilon = 1e-12);

    let state_json = serde_json::to_string(&post).unwrap();
    let restored: SpinEnsembleState = serde_json::from_str(&state_json).unwrap();
    assert_eq!(restored, post);
}

#[test]
fn single_round_tables_agree() {
    let ov = Overrides {
        rounds: Some(1),
        ..Default::default()
    };
    let serial = Execution { parallel: false };
    let a = fig3(Panel::B, &Overrides::default(), serial).unwrap();
    let b = fig4(Panel::B, &ov, serial).unwrap();
    assert_eq!(a.column("xi_d_n_40"), b.column("xi_d_rounds_1"));
}

#[test]
fn sampled_repetition_is_reproducible() {
    let a = repetitive_dss(40, 0.4, 10, OutcomePolicy::Sampled { seed: 4 }).unwrap();
    let b = repetitive_dss(40, 0.4, 10, OutcomePolicy::Sampled { seed: 4 }).unwrap();
    assert_eq!(a.post_state, b.post_state);
    assert_eq!(a.outcomes.len(), 10);
    let total: f64 = a.outcomes.iter().sum();
    assert_relative_eq!(a.outcome, total / 10f64.sqrt(), epsilon = 1e-12);
    assert!(a.xi_d < 1.0);
}

#[test]
fn long_probe_plan_on_reference_cavity() {
    let cavity = CavityParams::reference(1e6).unwrap();
    let plan = long_pulse_plan(&cavity, 10.0, 16, DEFAULT_FEASIBILITY_THRESHOLD).unwrap();
    assert!(plan.feasibility.ok);
    assert_relative_eq!(
        plan.chi_p_effective,
        4.0 * plan.chi_p_per_round,
        epsilon = 1e-12
    );
    assert!(plan.chi_p_per_round < plan.chi_p_bound);
    let needed = (2.0 / plan.chi_p_per_round).powi(2);
    assert!(plan.rounds_for_saturation as f64 >= needed);
    assert!((plan.rounds_for_saturation as f64) < needed + 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn posterior_density_matches_pdf(
        n in 1usize..60,
        chi_x in 0.0f64..0.5,
        chi_p in 0.0f64..2.0,
        eta in -3.0f64..3.0,
        y in -8.0f64..4.0,
    ) {
        let css = SpinEnsembleState::css(n).unwrap();
        let setting = MeasurementSetting::new(chi_x, chi_p, eta).unwrap();
        let pdf = outcome_pdf(&css, &setting, y);
        match apply_measurement(&css, &setting, y) {
            Ok((post, density)) => {
                prop_assert!((post.norm_sqr() - 1.0).abs() < 1e-12);
                prop_assert!((density - pdf).abs() <= 1e-12 * pdf.max(1e-300));
            }
            Err(_) => prop_assert!(pdf < 1e-250),
        }
    }
}
