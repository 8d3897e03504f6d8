//! Structural properties: the additive log-ratio identity, equivalence of the
//! recursive statistics with their definitional oracles, SR/CUSUM domination,
//! and threshold monotonicity of stopping times.

use proptest::prelude::*;
use qcd_core::detectors::{brute_force_stat, run_to_stopping};
use qcd_core::likelihood::{cumulative_log_ratio, log_ratio_step};
use qcd_core::{
    DetectorKind, DetectorState, GaussianModel, ModelTriple, StoppingOutcome, StoppingRule,
};

fn rho() -> impl Strategy<Value = f64> {
    -0.95..0.95f64
}

fn observation() -> impl Strategy<Value = [f64; 2]> {
    [(-4.0..4.0f64), (-4.0..4.0f64)]
}

proptest! {
    #[test]
    fn additive_identity_holds_per_step(
        r0 in rho(), r1 in rho(), ra in rho(), x in observation()
    ) {
        let triple = ModelTriple::new(
            GaussianModel::new(r0).unwrap(),
            GaussianModel::new(r1).unwrap(),
            GaussianModel::new(ra).unwrap(),
        );
        let r = log_ratio_step(&triple, &x, &[]);
        prop_assert!((r.log_lambda - (r.log_lambda_tilde + r.log_lambda_11)).abs() <= 1e-12);
    }

    #[test]
    fn additive_identity_holds_for_every_prefix_and_start(
        r0 in rho(), r1 in rho(), ra in rho(),
        xs in prop::collection::vec(observation(), 1..20)
    ) {
        let triple = ModelTriple::new(
            GaussianModel::new(r0).unwrap(),
            GaussianModel::new(r1).unwrap(),
            GaussianModel::new(ra).unwrap(),
        );
        for end in 1..=xs.len() {
            for k in 1..=end {
                let c = cumulative_log_ratio(&triple, &xs[..end], k).unwrap();
                prop_assert!(
                    (c.log_lambda - (c.log_lambda_tilde + c.log_lambda_11)).abs() <= 1e-10
                );
            }
        }
    }

    #[test]
    fn recursion_matches_brute_force_at_every_prefix(
        stream in prop::collection::vec(-3.0..3.0f64, 1..50)
    ) {
        for kind in DetectorKind::ALL {
            let mut state = DetectorState::new(kind);
            for n in 1..=stream.len() {
                state.update(stream[n - 1]).unwrap();
                let oracle = brute_force_stat(kind, &stream[..n]).unwrap();
                prop_assert!(
                    (state.log_stat() - oracle).abs() <= 1e-9,
                    "kind {:?} n {}: recursion {} oracle {}",
                    kind, n, state.log_stat(), oracle
                );
            }
        }
    }

    #[test]
    fn cusum_never_exceeds_sr(stream in prop::collection::vec(-3.0..3.0f64, 1..50)) {
        let mut cusum = DetectorState::new(DetectorKind::Cusum);
        let mut sr = DetectorState::new(DetectorKind::ShiryaevRoberts);
        for &z in &stream {
            cusum.update(z).unwrap();
            sr.update(z).unwrap();
            prop_assert!(cusum.log_stat() <= sr.log_stat() + 1e-12);
        }
    }

    #[test]
    fn sr_stops_no_later_than_cusum(
        stream in prop::collection::vec(-2.0..2.0f64, 10..60),
        log_a in 0.1..3.0f64
    ) {
        let rule = StoppingRule::from_log_threshold(log_a);
        let horizon = stream.len() as u64;
        let (tau_c, _) =
            run_to_stopping(DetectorKind::Cusum, rule, stream.iter().cloned(), horizon).unwrap();
        let (tau_s, _) = run_to_stopping(
            DetectorKind::ShiryaevRoberts, rule, stream.iter().cloned(), horizon,
        ).unwrap();
        if let (StoppingOutcome::At(c), StoppingOutcome::At(s)) = (tau_c, tau_s) {
            prop_assert!(s <= c);
        } else {
            // CUSUM stopping implies SR stopping.
            prop_assert!(tau_c == StoppingOutcome::Censored);
        }
    }

    #[test]
    fn stopping_time_monotone_in_threshold(
        stream in prop::collection::vec(-2.0..2.0f64, 10..60),
        log_a in 0.1..2.0f64,
        bump in 0.01..2.0f64
    ) {
        let horizon = stream.len() as u64;
        for kind in DetectorKind::ALL {
            let lo = StoppingRule::from_log_threshold(log_a);
            let hi = StoppingRule::from_log_threshold(log_a + bump);
            let (tau_lo, _) =
                run_to_stopping(kind, lo, stream.iter().cloned(), horizon).unwrap();
            let (tau_hi, _) =
                run_to_stopping(kind, hi, stream.iter().cloned(), horizon).unwrap();
            match (tau_lo, tau_hi) {
                (StoppingOutcome::At(a), StoppingOutcome::At(b)) => prop_assert!(a <= b),
                (StoppingOutcome::Censored, StoppingOutcome::At(_)) => {
                    prop_assert!(false, "raising the threshold cannot create a stop")
                }
                _ => {}
            }
        }
    }
}

#[test]
fn matched_triple_shares_the_code_path() {
    // With f1_assumed = f1_true the mismatched ratio IS the classical ratio,
    // bit for bit, and the diagnostic ratio is exactly zero.
    let triple = ModelTriple::matched(
        GaussianModel::new(0.0).unwrap(),
        GaussianModel::new(0.5).unwrap(),
    );
    for x in [[0.3, -1.2], [2.0, 2.0], [-0.7, 0.1]] {
        let r = log_ratio_step(&triple, &x, &[]);
        assert_eq!(r.log_lambda.to_bits(), r.log_lambda_tilde.to_bits());
        assert_eq!(r.log_lambda_11, 0.0);
    }
}
