//! Closed-form noise model of a sub-threshold optical parametric oscillator
//! and of the detection chain behind it.
//!
//! Quantities are shot-noise normalized: vacuum reads exactly 1 (0 dB).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::GaussianState;
use crate::measurement::{apply_clearance, apply_phase_fluctuation, to_db, Clearance};

/// Tolerance on `η_c = η_f·η_w²` when both factors are supplied.
pub const COUPLING_SPLIT_TOL: f64 = 1e-6;

/// Physical parameters of one OPO, in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpoParams {
    /// Pump power, W.
    pub pump_power: f64,
    /// Oscillation threshold, W.
    pub threshold_power: f64,
    /// Output-coupler transmission.
    pub output_coupler_t: f64,
    /// Intracavity loss without pump.
    pub passive_loss_l0: f64,
    /// Pump-induced (BLIIRA) loss coefficient, 1/W.
    pub bliira_coeff: f64,
    /// Cavity linewidth (FWHM), Hz.
    pub cavity_fwhm: f64,
    /// Measurement side-band frequency, Hz.
    pub sideband_freq: f64,
    /// Orientation of the squeezed quadrature, rad.
    pub squeeze_angle: f64,
}

impl OpoParams {
    /// The characterized source: T = 0.113, L₀ = 0.00254, a = 0.00922 W⁻¹,
    /// P_th = 179 mW, 11.8 MHz linewidth, 1.5 MHz side-band.
    pub fn reference(pump_power: f64) -> Self {
        OpoParams {
            pump_power,
            threshold_power: 0.179,
            output_coupler_t: 0.113,
            passive_loss_l0: 0.00254,
            bliira_coeff: 0.00922,
            cavity_fwhm: 11.8e6,
            sideband_freq: 1.5e6,
            squeeze_angle: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.pump_power,
            self.threshold_power,
            self.output_coupler_t,
            self.passive_loss_l0,
            self.bliira_coeff,
            self.cavity_fwhm,
            self.sideband_freq,
            self.squeeze_angle,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("OPO parameters must be finite"));
        }
        if self.pump_power < 0.0 {
            return Err(Error::invalid(format!("negative pump power {}", self.pump_power)));
        }
        if self.threshold_power <= 0.0 {
            return Err(Error::invalid("threshold power must be positive"));
        }
        if self.pump_power >= self.threshold_power {
            return Err(Error::AboveThreshold {
                pump_w: self.pump_power,
                threshold_w: self.threshold_power,
            });
        }
        if !(self.output_coupler_t > 0.0 && self.output_coupler_t <= 1.0) {
            return Err(Error::invalid(format!(
                "output-coupler transmission {} outside (0, 1]",
                self.output_coupler_t
            )));
        }
        if self.passive_loss_l0 < 0.0 || self.bliira_coeff < 0.0 {
            return Err(Error::invalid("cavity losses must be non-negative"));
        }
        if self.cavity_fwhm <= 0.0 {
            return Err(Error::invalid("cavity linewidth must be positive"));
        }
        if self.sideband_freq < 0.0 {
            return Err(Error::invalid("side-band frequency must be non-negative"));
        }
        Ok(())
    }

    pub fn normalized_pump(&self) -> Result<f64> {
        normalized_pump(self.pump_power, self.threshold_power)
    }

    pub fn escape_efficiency(&self) -> Result<f64> {
        escape_efficiency(
            self.output_coupler_t,
            self.passive_loss_l0,
            self.bliira_coeff,
            self.pump_power,
        )
    }

    pub fn normalized_frequency(&self) -> Result<f64> {
        normalized_frequency(self.sideband_freq, self.cavity_fwhm)
    }
}

/// OPO parameters in the units used by netlists and config files
/// (mW, MHz, degrees).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpoSource {
    pub pump_mw: f64,
    pub threshold_mw: f64,
    pub t_oc: f64,
    pub l0: f64,
    pub bliira_per_w: f64,
    pub fwhm_mhz: f64,
    pub sideband_mhz: f64,
    pub angle_deg: f64,
}

impl OpoSource {
    pub fn reference(pump_mw: f64) -> Self {
        OpoSource {
            pump_mw,
            threshold_mw: 179.0,
            t_oc: 0.113,
            l0: 0.00254,
            bliira_per_w: 0.00922,
            fwhm_mhz: 11.8,
            sideband_mhz: 1.5,
            angle_deg: 0.0,
        }
    }

    /// A lossless, zero-detuning source whose output is pure squeezed vacuum
    /// with parameter `r` (pump chosen so that `x = tanh(r/2)`).
    pub fn ideal(r: f64, threshold_mw: f64) -> Self {
        let x = (r / 2.0).tanh();
        OpoSource {
            pump_mw: threshold_mw * x * x,
            threshold_mw,
            t_oc: 0.1,
            l0: 0.0,
            bliira_per_w: 0.0,
            fwhm_mhz: 10.0,
            sideband_mhz: 0.0,
            angle_deg: 0.0,
        }
    }

    pub fn to_params(&self) -> OpoParams {
        OpoParams {
            pump_power: self.pump_mw / 1e3,
            threshold_power: self.threshold_mw / 1e3,
            output_coupler_t: self.t_oc,
            passive_loss_l0: self.l0,
            bliira_coeff: self.bliira_per_w,
            cavity_fwhm: self.fwhm_mhz * 1e6,
            sideband_freq: self.sideband_mhz * 1e6,
            squeeze_angle: self.angle_deg.to_radians(),
        }
    }
}

impl Default for OpoSource {
    fn default() -> Self {
        OpoSource::reference(100.0)
    }
}

/// Detection-side efficiencies and electronics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EfficiencyChain {
    /// Photodiode quantum efficiency η_PD.
    pub eta_pd: f64,
    /// Propagation efficiency from the output coupler to the fiber lens, η_p.
    pub eta_prop: f64,
    /// Overall fiber + chip coupling η_c.
    pub eta_coupling: f64,
    /// Signal/LO mode-match visibility η_v (enters squared).
    pub eta_visibility: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fiber_coupling: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub waveguide_coupling: Option<f64>,
    pub clearance_db: Clearance,
    pub phase_fluct_deg: f64,
}

impl EfficiencyChain {
    /// η_PD = 0.998, η_p = 0.99, η_c = 0.72, η_v = 0.995, C = 13.5 dB, θ̃ = 1.5°.
    pub fn reference() -> Self {
        EfficiencyChain {
            eta_pd: 0.998,
            eta_prop: 0.99,
            eta_coupling: 0.72,
            eta_visibility: 0.995,
            fiber_coupling: None,
            waveguide_coupling: None,
            clearance_db: Clearance::Db(13.5),
            phase_fluct_deg: 1.5,
        }
    }

    /// Unit efficiencies, no phase jitter, no electronic noise.
    pub fn perfect() -> Self {
        EfficiencyChain {
            eta_pd: 1.0,
            eta_prop: 1.0,
            eta_coupling: 1.0,
            eta_visibility: 1.0,
            fiber_coupling: None,
            waveguide_coupling: None,
            clearance_db: Clearance::None,
            phase_fluct_deg: 0.0,
        }
    }

    /// Sets `η_c = η_f·η_w²` from its fiber and waveguide factors.
    pub fn with_coupling_split(mut self, fiber: f64, waveguide: f64) -> Self {
        self.fiber_coupling = Some(fiber);
        self.waveguide_coupling = Some(waveguide);
        self.eta_coupling = fiber * waveguide * waveguide;
        self
    }

    pub fn phase_fluct_rad(&self) -> f64 {
        self.phase_fluct_deg.to_radians()
    }

    /// Efficiency seen at the detector: `η_v²·η_PD`.
    pub fn detector_efficiency(&self) -> f64 {
        self.eta_visibility * self.eta_visibility * self.eta_pd
    }

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("eta_pd", Some(self.eta_pd)),
            ("eta_prop", Some(self.eta_prop)),
            ("eta_coupling", Some(self.eta_coupling)),
            ("eta_visibility", Some(self.eta_visibility)),
            ("fiber_coupling", self.fiber_coupling),
            ("waveguide_coupling", self.waveguide_coupling),
        ];
        for (name, v) in named {
            if let Some(v) = v {
                if !(v > 0.0 && v <= 1.0) {
                    return Err(Error::invalid(format!("{name} = {v} outside (0, 1]")));
                }
            }
        }
        self.clearance_db.validate()?;
        if !(self.phase_fluct_deg.is_finite() && self.phase_fluct_deg >= 0.0) {
            return Err(Error::invalid(format!(
                "phase fluctuation {} must be non-negative",
                self.phase_fluct_deg
            )));
        }
        if let (Some(f), Some(w)) = (self.fiber_coupling, self.waveguide_coupling) {
            let split = f * w * w;
            if (self.eta_coupling - split).abs() > COUPLING_SPLIT_TOL {
                return Err(Error::invalid(format!(
                    "eta_coupling {} disagrees with fiber·waveguide² = {split}",
                    self.eta_coupling
                )));
            }
        }
        Ok(())
    }
}

impl Default for EfficiencyChain {
    fn default() -> Self {
        EfficiencyChain::reference()
    }
}

/// `x = √(P/P_th)`.
pub fn normalized_pump(pump_power: f64, threshold_power: f64) -> Result<f64> {
    if !(pump_power.is_finite() && threshold_power.is_finite()) || threshold_power <= 0.0 {
        return Err(Error::invalid("threshold must be positive and finite"));
    }
    if pump_power < 0.0 {
        return Err(Error::invalid(format!("negative pump power {pump_power}")));
    }
    if pump_power >= threshold_power {
        return Err(Error::AboveThreshold {
            pump_w: pump_power,
            threshold_w: threshold_power,
        });
    }
    Ok((pump_power / threshold_power).sqrt())
}

/// `ρ = T / (T + L₀ + a·P)`.
pub fn escape_efficiency(
    output_coupler_t: f64,
    passive_loss_l0: f64,
    bliira_coeff: f64,
    pump_power: f64,
) -> Result<f64> {
    if !(output_coupler_t > 0.0) || !output_coupler_t.is_finite() {
        return Err(Error::invalid(format!(
            "output-coupler transmission must be positive, got {output_coupler_t}"
        )));
    }
    if passive_loss_l0 < 0.0 || bliira_coeff < 0.0 || pump_power < 0.0 {
        return Err(Error::invalid("losses and pump power must be non-negative"));
    }
    let loss = passive_loss_l0 + bliira_coeff * pump_power;
    Ok(output_coupler_t / (output_coupler_t + loss))
}

/// Side-band frequency in units of the cavity FWHM.
pub fn normalized_frequency(sideband_freq: f64, cavity_fwhm: f64) -> Result<f64> {
    if !(cavity_fwhm > 0.0) || !cavity_fwhm.is_finite() {
        return Err(Error::invalid(format!(
            "cavity linewidth must be positive, got {cavity_fwhm}"
        )));
    }
    if !(sideband_freq >= 0.0) {
        return Err(Error::invalid("side-band frequency must be non-negative"));
    }
    Ok(sideband_freq / cavity_fwhm)
}

/// `η = η_PD·η_p·η_c·η_v²`.
pub fn homodyne_efficiency(chain: &EfficiencyChain) -> f64 {
    chain.eta_pd * chain.eta_prop * chain.eta_coupling * chain.eta_visibility * chain.eta_visibility
}

/// A pair of shot-normalized noise levels for the squeezed (`minus`) and
/// antisqueezed (`plus`) quadratures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseLevels {
    pub minus: f64,
    pub plus: f64,
}

impl NoiseLevels {
    pub fn to_db(self) -> Result<(f64, f64)> {
        Ok((to_db(self.minus)?, to_db(self.plus)?))
    }
}

/// Sub-threshold OPO spectrum at normalized pump `x` and frequency `f`:
///
/// `R± = 1 ± ρη·4x / ((1 ∓ x)² + 4f²)`
pub fn raw_noise_levels(x: f64, f: f64, rho: f64, eta: f64) -> Result<NoiseLevels> {
    if !(x >= 0.0) {
        return Err(Error::invalid(format!("normalized pump {x} must be non-negative")));
    }
    if x >= 1.0 {
        return Err(Error::AboveThreshold {
            pump_w: x * x,
            threshold_w: 1.0,
        });
    }
    if !(f >= 0.0) || !f.is_finite() {
        return Err(Error::invalid(format!("normalized frequency {f} must be non-negative")));
    }
    for (name, v) in [("rho", rho), ("eta", eta)] {
        if !(v > 0.0 && v <= 1.0) {
            return Err(Error::invalid(format!("{name} = {v} outside (0, 1]")));
        }
    }
    let gain = rho * eta * 4.0 * x;
    let ff = 4.0 * f * f;
    Ok(NoiseLevels {
        minus: 1.0 - gain / ((1.0 + x) * (1.0 + x) + ff),
        plus: 1.0 + gain / ((1.0 - x) * (1.0 - x) + ff),
    })
}

/// Each stage of the closed-form prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub x: f64,
    pub f: f64,
    pub rho: f64,
    pub eta: f64,
    /// Straight from the OPO spectrum.
    pub raw: NoiseLevels,
    /// After mixing by the residual LO phase error.
    pub phase_corrected: NoiseLevels,
    /// After the electronic noise floor.
    pub detected: NoiseLevels,
    pub db_minus: f64,
    pub db_plus: f64,
}

/// Runs the full chain: spectrum → phase-error mixing → clearance → dB.
pub fn predict(params: &OpoParams, chain: &EfficiencyChain) -> Result<Prediction> {
    params.validate()?;
    chain.validate()?;
    let x = params.normalized_pump()?;
    let f = params.normalized_frequency()?;
    let rho = params.escape_efficiency()?;
    let eta = homodyne_efficiency(chain);
    let raw = raw_noise_levels(x, f, rho, eta)?;
    let (pm, pp) = apply_phase_fluctuation(raw.minus, raw.plus, chain.phase_fluct_rad());
    let phase_corrected = NoiseLevels {
        minus: pm,
        plus: pp,
    };
    let detected = NoiseLevels {
        minus: apply_clearance(pm, chain.clearance_db)?,
        plus: apply_clearance(pp, chain.clearance_db)?,
    };
    let (db_minus, db_plus) = detected.to_db()?;
    Ok(Prediction {
        x,
        f,
        rho,
        eta,
        raw,
        phase_corrected,
        detected,
        db_minus,
        db_plus,
    })
}

/// Predicted (squeezing, antisqueezing) levels in dB relative to shot noise.
pub fn predicted_levels(params: &OpoParams, chain: &EfficiencyChain) -> Result<(f64, f64)> {
    let p = predict(params, chain)?;
    Ok((p.db_minus, p.db_plus))
}

/// State at the OPO output coupler: only the escape efficiency is applied,
/// every other loss is left to explicit circuit elements.
pub fn opo_source_state(params: &OpoParams) -> Result<GaussianState> {
    params.validate()?;
    let x = params.normalized_pump()?;
    let f = params.normalized_frequency()?;
    let rho = params.escape_efficiency()?;
    let levels = raw_noise_levels(x, f, rho, 1.0)?;
    GaussianState::from_noise_levels(levels.minus, levels.plus, params.squeeze_angle)
}
