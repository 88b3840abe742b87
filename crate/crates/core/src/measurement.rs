//! Homodyne detection, shot-noise bookkeeping and the two-mode
//! inseparability test.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{GaussianState, QuadratureTerm, VACUUM_VARIANCE};

/// Raw variance of a two-mode joint quadrature (`x₁ − x₂` or `p₁ + p₂`) when
/// the modes are uncorrelated vacua.
pub const JOINT_REFERENCE: f64 = 2.0 * VACUUM_VARIANCE;

/// Shot-noise-to-electronic-noise clearance of a detector.
///
/// `None` means no electronic noise at all; serialized as `null`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "Option<f64>", into = "Option<f64>")]
pub enum Clearance {
    #[default]
    None,
    Db(f64),
}

impl Clearance {
    /// Electronic noise floor relative to shot noise, `10^(−C/10)`.
    pub fn floor(self) -> f64 {
        match self {
            Clearance::None => 0.0,
            Clearance::Db(c) => 10f64.powf(-c / 10.0),
        }
    }

    pub fn validate(self) -> Result<()> {
        match self {
            Clearance::Db(c) if !(c > 0.0 && c.is_finite()) => Err(Error::invalid(format!(
                "clearance must be a positive number of dB, got {c}"
            ))),
            _ => Ok(()),
        }
    }
}

impl From<Option<f64>> for Clearance {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Clearance::None, Clearance::Db)
    }
}

impl From<Clearance> for Option<f64> {
    fn from(c: Clearance) -> Self {
        match c {
            Clearance::None => None,
            Clearance::Db(v) => Some(v),
        }
    }
}

pub fn to_db(variance_shot: f64) -> Result<f64> {
    if !(variance_shot > 0.0) {
        return Err(Error::invalid(format!(
            "cannot express non-positive variance {variance_shot} in dB"
        )));
    }
    Ok(10.0 * variance_shot.log10())
}

pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// `R'' = R'(1 − k) + k` with `k = 10^(−C/10)`. Shot noise (R' = 1) is the
/// fixed point.
pub fn apply_clearance(variance_shot: f64, clearance: Clearance) -> Result<f64> {
    if !(variance_shot > 0.0) {
        return Err(Error::invalid(format!(
            "variance must be positive, got {variance_shot}"
        )));
    }
    clearance.validate()?;
    Ok(match clearance {
        Clearance::None => variance_shot,
        c => {
            let k = c.floor();
            variance_shot * (1.0 - k) + k
        }
    })
}

/// `R'± = R± cos²θ̃ + R∓ sin²θ̃`.
pub fn apply_phase_fluctuation(r_minus: f64, r_plus: f64, theta: f64) -> (f64, f64) {
    let c2 = theta.cos().powi(2);
    let s2 = theta.sin().powi(2);
    (r_minus * c2 + r_plus * s2, r_plus * c2 + r_minus * s2)
}

/// A balanced homodyne detector on one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomodyneDetector {
    pub mode: usize,
    /// LO phase, rad. Selects `x̂_θ = x̂ cos θ + p̂ sin θ`.
    pub lo_phase: f64,
    /// Signal/LO visibility η_v.
    pub visibility: f64,
    pub eta_pd: f64,
    /// Residual LO phase jitter θ̃, rad.
    pub phase_fluct: f64,
    pub clearance: Clearance,
}

impl HomodyneDetector {
    /// Unit efficiency, no jitter, no electronic noise.
    pub fn ideal(mode: usize, lo_phase: f64) -> Self {
        HomodyneDetector {
            mode,
            lo_phase,
            visibility: 1.0,
            eta_pd: 1.0,
            phase_fluct: 0.0,
            clearance: Clearance::None,
        }
    }

    pub fn with_lo_phase(self, lo_phase: f64) -> Self {
        HomodyneDetector { lo_phase, ..self }
    }

    /// `η_v²·η_PD`.
    pub fn efficiency(&self) -> f64 {
        self.visibility * self.visibility * self.eta_pd
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("visibility", self.visibility), ("eta_pd", self.eta_pd)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::invalid(format!("{name} = {v} outside (0, 1]")));
            }
        }
        if !(self.phase_fluct >= 0.0 && self.phase_fluct.is_finite()) {
            return Err(Error::invalid("phase fluctuation must be non-negative"));
        }
        if !self.lo_phase.is_finite() {
            return Err(Error::invalid("LO phase must be finite"));
        }
        self.clearance.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasurementKind {
    Single,
    Sum,
    Difference,
}

impl fmt::Display for MeasurementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeasurementKind::Single => "single",
            MeasurementKind::Sum => "sum",
            MeasurementKind::Difference => "difference",
        })
    }
}

/// One measured noise level. `variance_shot` is relative to the appropriate
/// vacuum reference (one shot noise for single-mode records, two for
/// sum/difference records).
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub label: String,
    pub kind: MeasurementKind,
    /// rad
    pub lo_phase: f64,
    pub variance_shot: f64,
    pub db: f64,
}

impl MeasurementRecord {
    pub fn new(
        label: impl Into<String>,
        kind: MeasurementKind,
        lo_phase: f64,
        variance_shot: f64,
    ) -> Result<Self> {
        Ok(MeasurementRecord {
            label: label.into(),
            kind,
            lo_phase,
            variance_shot,
            db: to_db(variance_shot)?,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub const CSV_HEADER: [&'static str; 5] =
        ["label", "kind", "lo_phase_deg", "variance_shot", "db"];
}

/// The detector's view of the state: the mode after `η_v²·η_PD` loss and
/// phase jitter.
pub fn detected_state(state: &GaussianState, det: &HomodyneDetector) -> Result<GaussianState> {
    det.validate()?;
    state
        .loss_channel(det.mode, det.efficiency())?
        .dephase(det.mode, det.phase_fluct)
}

fn record_at(
    detected: &GaussianState,
    det: &HomodyneDetector,
    lo_phase: f64,
) -> Result<MeasurementRecord> {
    let raw = detected.quadrature_variance(det.mode, lo_phase)?;
    let shot = apply_clearance(raw / VACUUM_VARIANCE, det.clearance)?;
    MeasurementRecord::new(
        format!("mode{}", det.mode),
        MeasurementKind::Single,
        lo_phase,
        shot,
    )
}

/// Shot-normalized noise of the quadrature selected by `det.lo_phase`.
pub fn homodyne_variance(state: &GaussianState, det: &HomodyneDetector) -> Result<MeasurementRecord> {
    let detected = detected_state(state, det)?;
    record_at(&detected, det, det.lo_phase)
}

/// Exact minimum and maximum of the homodyne noise over all LO phases, taken
/// from the principal axes of the detected mode's covariance block.
pub fn homodyne_extremes(
    state: &GaussianState,
    det: &HomodyneDetector,
) -> Result<(MeasurementRecord, MeasurementRecord)> {
    let detected = detected_state(state, det)?;
    let b = detected.mode_block(det.mode)?;
    let theta_max = 0.5 * (2.0 * b[(0, 1)]).atan2(b[(0, 0)] - b[(1, 1)]);
    let theta_min = theta_max + FRAC_PI_2;
    Ok((
        record_at(&detected, det, theta_min.rem_euclid(TAU))?,
        record_at(&detected, det, theta_max.rem_euclid(TAU))?,
    ))
}

/// A uniform LO-phase scan over `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LoScan {
    pub records: Vec<MeasurementRecord>,
    pub min: MeasurementRecord,
    pub max: MeasurementRecord,
}

pub fn lo_phase_scan(state: &GaussianState, det: &HomodyneDetector, n_points: usize) -> Result<LoScan> {
    if n_points < 2 {
        return Err(Error::invalid(format!(
            "an LO scan needs at least 2 points, got {n_points}"
        )));
    }
    let detected = detected_state(state, det)?;
    let records = (0..n_points)
        .map(|k| record_at(&detected, det, TAU * k as f64 / n_points as f64))
        .collect::<Result<Vec<_>>>()?;
    let min = records
        .iter()
        .min_by(|a, b| a.variance_shot.total_cmp(&b.variance_shot))
        .cloned()
        .expect("non-empty scan");
    let max = records
        .iter()
        .max_by(|a, b| a.variance_shot.total_cmp(&b.variance_shot))
        .cloned()
        .expect("non-empty scan");
    Ok(LoScan { records, min, max })
}

/// Joint quadrature variances of a detector pair, raw units (uncorrelated
/// vacuum reads [`JOINT_REFERENCE`] per term).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    /// `⟨Δ(x̂₁ − x̂₂)²⟩ + ⟨Δ(p̂₁ + p̂₂)²⟩`; 1 for two vacua.
    pub delta_sq: f64,
    pub term_x: f64,
    pub term_p: f64,
}

impl Correlation {
    /// The difference (`x̂₁ − x̂₂`) and sum (`p̂₁ + p̂₂`) records, normalized to
    /// the uncorrelated reference.
    pub fn records(&self, label: &str, lo_phase: f64) -> Result<[MeasurementRecord; 2]> {
        Ok([
            MeasurementRecord::new(
                format!("{label}.x_diff"),
                MeasurementKind::Difference,
                lo_phase,
                self.term_x / JOINT_REFERENCE,
            )?,
            MeasurementRecord::new(
                format!("{label}.p_sum"),
                MeasurementKind::Sum,
                lo_phase + FRAC_PI_2,
                self.term_p / JOINT_REFERENCE,
            )?,
        ])
    }
}

/// Each detector's LO phase fixes its mode's `x` axis; `p` is 90° further.
/// Detector losses and jitter act per mode, the electronic floor acts on the
/// combined signal (the average of the two detectors' floors).
pub fn correlation_variance(
    state: &GaussianState,
    det1: &HomodyneDetector,
    det2: &HomodyneDetector,
) -> Result<Correlation> {
    if det1.mode == det2.mode {
        return Err(Error::invalid(
            "correlation needs detectors on two different modes",
        ));
    }
    let detected = detected_state(&detected_state(state, det1)?, det2)?;
    let floor = 0.5 * (det1.clearance.floor() + det2.clearance.floor());
    let joint_clearance = |raw: f64| -> Result<f64> {
        let rel = raw / JOINT_REFERENCE;
        if !(rel > 0.0) {
            return Err(Error::invalid(format!("non-positive joint variance {raw}")));
        }
        Ok((rel * (1.0 - floor) + floor) * JOINT_REFERENCE)
    };
    let term_x = joint_clearance(detected.joint_quadrature_variance(&[
        QuadratureTerm::new(det1.mode, det1.lo_phase, 1.0),
        QuadratureTerm::new(det2.mode, det2.lo_phase, -1.0),
    ])?)?;
    let term_p = joint_clearance(detected.joint_quadrature_variance(&[
        QuadratureTerm::new(det1.mode, det1.lo_phase + FRAC_PI_2, 1.0),
        QuadratureTerm::new(det2.mode, det2.lo_phase + FRAC_PI_2, 1.0),
    ])?)?;
    Ok(Correlation {
        delta_sq: term_x + term_p,
        term_x,
        term_p,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Entangled,
    SeparableOrUnknown,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Entangled => "entangled",
            Verdict::SeparableOrUnknown => "separable-or-unknown",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inseparability {
    pub verdict: Verdict,
    /// `1 − Δ²`; positive when entangled.
    pub margin: f64,
}

/// Sufficient condition for entanglement: `Δ² < 1`.
pub fn inseparability_check(delta_sq: f64) -> Result<Inseparability> {
    if !(delta_sq > 0.0) || !delta_sq.is_finite() {
        return Err(Error::invalid(format!(
            "correlation variance must be positive, got {delta_sq}"
        )));
    }
    Ok(Inseparability {
        verdict: if delta_sq < 1.0 {
            Verdict::Entangled
        } else {
            Verdict::SeparableOrUnknown
        },
        margin: 1.0 - delta_sq,
    })
}

/// Joint-quadrature term in dB relative to the no-correlation level (two
/// shot noises).
pub fn sum_diff_noise_db(term: f64) -> Result<f64> {
    to_db(term / JOINT_REFERENCE)
}

/// Wraps an angle into `[0, 2π)`; used when reporting LO phases.
pub fn wrap_phase(theta: f64) -> f64 {
    let w = theta.rem_euclid(TAU);
    if (TAU - w).abs() < 1e-12 * PI {
        0.0
    } else {
        w
    }
}
