use std::f64::consts::{FRAC_PI_2, PI};

use cvchip::gaussian::GaussianState;
use cvchip::measurement::{
    apply_clearance, correlation_variance, from_db, homodyne_extremes, to_db, Clearance,
    HomodyneDetector,
};
use cvchip::opo::{predicted_levels, raw_noise_levels, EfficiencyChain, OpoParams};
use proptest::prelude::*;

fn detector(mode: usize, eta: f64, jitter_deg: f64, clearance: Option<f64>) -> HomodyneDetector {
    HomodyneDetector {
        eta_pd: eta,
        phase_fluct: jitter_deg.to_radians(),
        clearance: clearance.into(),
        ..HomodyneDetector::ideal(mode, 0.0)
    }
}

proptest! {
    #[test]
    fn noise_levels_spread_with_pump(x1 in 0.0..0.99f64, dx in 1e-4..0.01f64,
                                     f in 0.0..2.0f64, rho_eta in 0.01..=1.0f64) {
        let x2 = (x1 + dx).min(0.999);
        prop_assume!(x2 > x1);
        let a = raw_noise_levels(x1, f, rho_eta, 1.0).unwrap();
        let b = raw_noise_levels(x2, f, rho_eta, 1.0).unwrap();
        prop_assert!(b.minus < a.minus);
        prop_assert!(b.plus > a.plus);
    }

    #[test]
    fn detuning_damps_both_levels(x in 0.01..0.99f64, f1 in 0.0..2.0f64, df in 1e-3..1.0f64,
                                  rho in 0.1..=1.0f64) {
        let a = raw_noise_levels(x, f1, rho, 1.0).unwrap();
        let b = raw_noise_levels(x, f1 + df, rho, 1.0).unwrap();
        prop_assert!((b.minus - 1.0).abs() < (a.minus - 1.0).abs());
        prop_assert!((b.plus - 1.0).abs() < (a.plus - 1.0).abs());
    }

    #[test]
    fn levels_mirror_under_sign_swap(x in 0.0..0.99f64, f in 0.0..2.0f64, rho in 0.1..=1.0f64) {
        let l = raw_noise_levels(x, f, rho, 1.0).unwrap();
        let lhs = (l.plus - 1.0) * ((1.0 - x).powi(2) + 4.0 * f * f);
        let rhs = (1.0 - l.minus) * ((1.0 + x).powi(2) + 4.0 * f * f);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn db_round_trip(db in -40.0..40.0f64) {
        prop_assert!((to_db(from_db(db)).unwrap() - db).abs() <= 1e-12);
        let lin = from_db(db);
        prop_assert!((from_db(to_db(lin).unwrap()) - lin).abs() <= 1e-12 * lin);
    }

    #[test]
    fn clearance_contracts_toward_shot_noise(v in 0.01..100.0f64, c in 0.0..40.0f64) {
        let k = from_db(-c);
        let out = apply_clearance(v, Clearance::Db(c)).unwrap();
        prop_assert!(((out - 1.0).abs() - (1.0 - k) * (v - 1.0).abs()).abs() <= 1e-12 * v.max(1.0));
    }

    #[test]
    fn scan_extremes_are_block_eigenvalues(r in 0.0..2.0f64, angle in 0.0..PI, eta in 0.2..=1.0f64,
                                           jitter in 0.0..5.0f64, clearance in prop::option::of(5.0..30.0f64)) {
        let s = GaussianState::squeezed_mode(r, angle).unwrap();
        let det = detector(0, eta, jitter, clearance);
        let (min, max) = homodyne_extremes(&s, &det).unwrap();
        for k in 0..720 {
            let v = cvchip::measurement::homodyne_variance(&s, &det.with_lo_phase(k as f64 * PI / 360.0))
                .unwrap()
                .variance_shot;
            prop_assert!(v >= min.variance_shot - 1e-9 && v <= max.variance_shot + 1e-9);
        }
    }

    #[test]
    fn symmetric_arm_loss_law(r in 0.0..1.5f64, eta in 0.0..=1.0f64) {
        let epr = GaussianState::product(&[
            GaussianState::squeezed_mode(r, 0.0).unwrap(),
            GaussianState::squeezed_mode(r, FRAC_PI_2).unwrap(),
        ]).unwrap().beam_splitter(0, 1, 0.5).unwrap();
        let c = correlation_variance(&epr, &detector(0, eta, 0.0, None), &detector(1, eta, 0.0, None)).unwrap();
        let expected = eta * (-2.0 * r).exp() + (1.0 - eta);
        prop_assert!((c.delta_sq - expected).abs() <= 1e-12);
    }

    #[test]
    fn aligned_squeezers_never_certify(r in 0.0..1.5f64, angle in 0.0..PI, lo in 0.0..PI) {
        let mixed = GaussianState::product(&[
            GaussianState::squeezed_mode(r, angle).unwrap(),
            GaussianState::squeezed_mode(r, angle).unwrap(),
        ]).unwrap().beam_splitter(0, 1, 0.5).unwrap();
        let d1 = HomodyneDetector::ideal(0, lo);
        let d2 = HomodyneDetector::ideal(1, lo);
        let c = correlation_variance(&mixed, &d1, &d2).unwrap();
        prop_assert!(c.delta_sq >= 1.0 - 1e-9, "{}", c.delta_sq);
    }
}

#[test]
fn zero_pump_without_jitter_or_floor_is_shot_noise() {
    let chain = EfficiencyChain {
        phase_fluct_deg: 0.0,
        clearance_db: Clearance::None,
        ..EfficiencyChain::reference()
    };
    assert_eq!(predicted_levels(&OpoParams::reference(0.0), &chain).unwrap(), (0.0, 0.0));
}

#[test]
fn squeezing_saturates_then_recovers() {
    let chain = EfficiencyChain::reference();
    let sq: Vec<f64> = (0..=17)
        .map(|k| predicted_levels(&OpoParams::reference(k as f64 * 0.01), &chain).unwrap().0)
        .collect();
    let (imin, min) = sq
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, v)| (i, *v))
        .unwrap();
    assert_eq!(imin, 12, "deepest point at 120 mW");
    assert!((-4.2..-4.1).contains(&min));
    assert!(sq[..=imin].windows(2).all(|w| w[1] < w[0]));
    assert!(sq[imin..].iter().all(|v| *v < -4.1));
}
