//! The `validate` subcommand: fast self-checks of the closed forms, the
//! detector recursions, the martingale property, and the ARL/PFA bounds.
//! Stochastic tolerances scale with the estimated standard errors, so the
//! suite stays meaningful at reduced trial counts.

use rand::Rng;

use qcd_core::bounds::{arl_lower_bound, pfa_upper_bound, threshold_for_pfa};
use qcd_core::detectors::brute_force_stat;
use qcd_core::distributions::{gaussian_kl, kl_monte_carlo};
use qcd_core::rng::trial_rng;
use qcd_core::simulator::{bernoulli_sr_mean_exact, estimate_from_records, martingale_check};
use qcd_core::{
    BernoulliModel, ChangePointPrior, DetectorKind, DetectorState, ExperimentConfig,
    GaussianModel, ModelTriple,
};

use crate::run::{detection_records_parallel, run_length_records_parallel};
use crate::CliError;

struct Report {
    failures: u32,
}

impl Report {
    fn check(&mut self, name: &str, pass: bool, detail: String) {
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!("{verdict} {name}: {detail}");
        if !pass {
            self.failures += 1;
        }
    }
}

fn gaussian(rho: f64) -> GaussianModel {
    GaussianModel::new(rho).expect("valid rho")
}

pub fn cmd_validate(seed: u64, trials: u64) -> Result<(), CliError> {
    if trials < 100 {
        return Err(CliError::Usage("validate needs at least 100 trials".into()));
    }
    let mut report = Report { failures: 0 };

    // Closed-form KL against the reference constants.
    let d10 = gaussian_kl(&gaussian(0.5), &gaussian(0.0));
    let d11_03 = gaussian_kl(&gaussian(0.5), &gaussian(0.3));
    let d11_04 = gaussian_kl(&gaussian(0.5), &gaussian(0.4));
    report.check(
        "kl-constants",
        (d10 - 0.1438).abs() <= 5e-4 && (d11_03 - 0.0308).abs() <= 5e-4
            && (d11_04 - 0.0090).abs() <= 5e-4,
        format!("d10={d10:.5} d11(0.3)={d11_03:.5} d11(0.4)={d11_04:.5}"),
    );

    // Closed form against the sampling oracle.
    let n_kl = (trials * 25).max(1000);
    let (est, se) = kl_monte_carlo(&gaussian(0.5), &gaussian(0.0), n_kl, seed);
    report.check(
        "kl-monte-carlo",
        (est - d10).abs() <= 4.0 * se,
        format!("closed form {d10:.5}, MC {est:.5} +- {se:.5}"),
    );

    // Detector recursions against the definitional statistics.
    let mut rng = trial_rng(seed, 0, 17);
    let mut max_err = 0.0f64;
    for _ in 0..1000 {
        let len = rng.random_range(1..=50);
        let stream: Vec<f64> = (0..len).map(|_| rng.random_range(-3.0..3.0)).collect();
        for kind in DetectorKind::ALL {
            let mut state = DetectorState::new(kind);
            for n in 1..=stream.len() {
                state.update(stream[n - 1]).expect("finite stream");
                let oracle = brute_force_stat(kind, &stream[..n]).expect("non-empty");
                max_err = max_err.max((state.log_stat() - oracle).abs());
            }
        }
    }
    report.check(
        "oracle-equivalence",
        max_err <= 1e-9,
        format!("max |recursion - definition| = {max_err:.2e}"),
    );

    // Martingale property, exact and sampled.
    let b0 = BernoulliModel::new(0.5).expect("valid p");
    let b1 = BernoulliModel::new(0.8).expect("valid p");
    let exact = bernoulli_sr_mean_exact(&b0, &b1, 10);
    report.check(
        "martingale-bernoulli-exact",
        exact.abs() <= 1e-10,
        format!("E[S_10] - 10 = {exact:.2e}"),
    );
    let (mean, se) = martingale_check(&gaussian(0.0), &gaussian(0.5), 50, trials.max(1000), seed);
    report.check(
        "martingale-gaussian-mc",
        mean.abs() <= 4.0 * se,
        format!("E[S_50] - 50 = {mean:.4} +- {se:.4}"),
    );

    // ARL lower bound and PFA upper bound, matched and mismatched.
    for (label, rho_assumed) in [("matched", 0.5), ("mismatched", 0.3)] {
        let models = ModelTriple::new(gaussian(0.0), gaussian(0.5), gaussian(rho_assumed));
        let a = 3.0f64.exp();
        let config = ExperimentConfig {
            models: models.clone(),
            prior: ChangePointPrior::NoChange,
            kinds: DetectorKind::ALL.to_vec(),
            log_threshold: 3.0,
            n_trials: trials,
            horizon: 100_000,
            master_seed: seed,
        };
        let records = run_length_records_parallel(&config, 0)?;
        let metrics = estimate_from_records(&config, &[], Some(&records));
        for kind in DetectorKind::ALL {
            let arl = metrics[&kind].arl.expect("stopped trials");
            report.check(
                &format!("arl-bound-{label}-{}", kind.name()),
                arl.mean >= arl_lower_bound(a).expect("positive") - 3.0 * arl.stderr,
                format!("ARL {:.1} +- {:.1} vs bound {a:.1}", arl.mean, arl.stderr),
            );
        }

        let alpha = 0.1;
        let theta_bar = 10.0;
        for kind in DetectorKind::ALL {
            let a = threshold_for_pfa(kind, alpha, theta_bar)?;
            let config = ExperimentConfig {
                models: models.clone(),
                prior: ChangePointPrior::geometric(0.1)?,
                kinds: vec![kind],
                log_threshold: a.ln(),
                n_trials: trials,
                horizon: 100_000,
                master_seed: seed,
            };
            let records = detection_records_parallel(&config, 0)?;
            let metrics = estimate_from_records(&config, &records, None);
            let pfa = metrics[&kind].pfa.expect("trials ran");
            let bound = pfa_upper_bound(kind, a, theta_bar)?;
            report.check(
                &format!("pfa-bound-{label}-{}", kind.name()),
                pfa.mean <= bound + 3.0 * pfa.stderr,
                format!("PFA {:.4} +- {:.4} vs bound {bound:.4}", pfa.mean, pfa.stderr),
            );
        }
    }

    // Threshold selection composes exactly with the PFA bound.
    let mut compose_ok = true;
    for kind in DetectorKind::ALL {
        for alpha in [0.5, 0.1, 0.01] {
            let a = threshold_for_pfa(kind, alpha, 10.0)?;
            compose_ok &= (pfa_upper_bound(kind, a, 10.0)? - alpha).abs() <= 1e-12;
        }
    }
    report.check("threshold-composition", compose_ok, "A(alpha) yields PFA bound alpha".into());

    if report.failures > 0 {
        return Err(CliError::Check(format!("{} check(s) failed", report.failures)));
    }
    println!("all checks passed");
    Ok(())
}
