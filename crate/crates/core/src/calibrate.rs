//! Fitting the per-arm efficiencies of the EPR network to measured
//! joint-quadrature noise levels.

use crate::error::{Error, Result};
use crate::measurement::sum_diff_noise_db;
use crate::netlist::{evaluate, validate, EvaluationResult, Fig1bConfig, JointSummary};

/// Measured `x̂₁ − x̂₂` noise relative to the uncorrelated level, dB.
pub const REFERENCE_TERM_X_DB: f64 = -1.44;
/// Measured `p̂₁ + p̂₂` noise relative to the uncorrelated level, dB.
pub const REFERENCE_TERM_P_DB: f64 = -1.49;

const TOL_DB: f64 = 1e-9;
const MAX_ROUNDS: usize = 100;
const BISECTION_STEPS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct EprCalibration {
    /// The input configuration with the fitted `arm_eta`.
    pub config: Fig1bConfig,
    pub term_x_db: f64,
    pub term_p_db: f64,
    pub joint: JointSummary,
    pub result: EvaluationResult,
    pub rounds: usize,
}

fn run(cfg: &Fig1bConfig) -> Result<EvaluationResult> {
    let net = cfg.build();
    let checked = validate(&net)?;
    evaluate(&net, &checked)
}

fn term_dbs(cfg: &Fig1bConfig) -> Result<(f64, f64)> {
    let res = run(cfg)?;
    let j = res
        .correlations
        .first()
        .ok_or_else(|| Error::Calibration("network has no joint detector".into()))?;
    Ok((
        sum_diff_noise_db(j.correlation.term_x)?,
        sum_diff_noise_db(j.correlation.term_p)?,
    ))
}

/// Finds `arm_eta[arm]` in `(0, 1]` so that the chosen term hits `target`,
/// holding everything else fixed. The term falls as the arm gets cleaner.
fn solve_arm(cfg: &mut Fig1bConfig, arm: usize, target: f64) -> Result<()> {
    let term = |cfg: &Fig1bConfig| -> Result<f64> {
        let (x, p) = term_dbs(cfg)?;
        Ok(if arm == 0 { x } else { p })
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    cfg.arm_eta[arm] = hi;
    let best = term(cfg)?;
    if best > target {
        return Err(Error::Calibration(format!(
            "arm {} cannot reach {target} dB: lossless arm gives {best:.4} dB",
            arm + 1
        )));
    }
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        cfg.arm_eta[arm] = mid;
        if term(cfg)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    cfg.arm_eta[arm] = 0.5 * (lo + hi);
    Ok(())
}

/// Alternates one-dimensional solves on arm 1 (for the `x` difference) and
/// arm 2 (for the `p` sum) until both targets hold.
pub fn calibrate_epr(base: &Fig1bConfig, target_x_db: f64, target_p_db: f64) -> Result<EprCalibration> {
    let mut cfg = *base;
    for round in 1..=MAX_ROUNDS {
        solve_arm(&mut cfg, 0, target_x_db)?;
        solve_arm(&mut cfg, 1, target_p_db)?;
        let (x, p) = term_dbs(&cfg)?;
        if (x - target_x_db).abs() < TOL_DB && (p - target_p_db).abs() < TOL_DB {
            let result = run(&cfg)?;
            let joint = result.correlations[0].clone();
            return Ok(EprCalibration {
                config: cfg,
                term_x_db: x,
                term_p_db: p,
                joint,
                result,
                rounds: round,
            });
        }
    }
    Err(Error::Calibration(format!(
        "arm efficiencies did not converge in {MAX_ROUNDS} rounds"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reaches_reference_levels() {
        let cal = calibrate_epr(&Fig1bConfig::default(), REFERENCE_TERM_X_DB, REFERENCE_TERM_P_DB)
            .unwrap();
        assert!((cal.term_x_db - REFERENCE_TERM_X_DB).abs() < 1e-8);
        assert!((cal.term_p_db - REFERENCE_TERM_P_DB).abs() < 1e-8);
        assert!((cal.joint.correlation.delta_sq - 0.713_686_029_617).abs() < 1e-8);
        for eta in cal.config.arm_eta {
            assert!(eta > 0.0 && eta < 1.0);
        }
    }

    #[test]
    fn unreachable_target_is_reported() {
        let err = calibrate_epr(&Fig1bConfig::default(), -20.0, -1.49).unwrap_err();
        assert!(matches!(err, Error::Calibration(_)));
    }
}
