//! Small-signal gain and output noise of an intensity-modulated direct
//! detection link, plus the Friis cascade used to combine it with RF stages.
//!
//! Gain is the matched-load power gain `(s · l_o · r)^2` where `s` is the
//! modulation slope (W/A), `l_o` the linear optical transmission after the
//! modulator and `r` the detector responsivity. Output noise into the load is
//! the sum of four densities (W/Hz):
//!
//! ```text
//! thermal = k T (g + 1)
//! shot    = 2 q (I_dc + I_dark) R
//! rin     = 10^(rin/10) I_dc^2 R
//! ase     = (sum over EDFAs of 2 h nu F / P_in) I_dc^2 R
//! ```
//!
//! and `NF = 10 log10(N_out / (g k T))`, floored at the 3 dB of a passively
//! matched link.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::ledger::{optical_ledger, OpticalLedger};
use super::{AnalysisConfig, LinkError};
use crate::components::{ComponentSpec, ModulationScheme};
use crate::topology::{ElementKind, SignalPath};
use crate::units::{
    db_to_linear, dbm_to_watts, linear_to_db, optical_frequency_hz, BOLTZMANN, ELEMENTARY_CHARGE,
    PLANCK,
};

/// Lowest reportable link NF: input and output loads each contribute kT.
pub fn nf_floor_db() -> f64 {
    linear_to_db(2.0)
}

/// Output-referred noise densities into the detector load, W/Hz.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseBreakdown {
    pub thermal_w_hz: f64,
    pub shot_w_hz: f64,
    pub rin_w_hz: f64,
    pub ase_w_hz: f64,
}

impl NoiseBreakdown {
    pub fn total(&self) -> f64 {
        self.thermal_w_hz + self.shot_w_hz + self.rin_w_hz + self.ase_w_hz
    }
}

/// Operating point of one path under one modulation scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkOperatingPoint {
    pub scheme: ModulationScheme,
    /// Modulation slope, W/A.
    pub slope_w_per_a: f64,
    /// Linear optical transmission after the modulator (EDFAs included).
    pub transmission: f64,
    pub responsivity_a_per_w: f64,
    pub photocurrent_a: f64,
    pub dark_current_a: f64,
    pub laser_rin_per_hz: f64,
    /// ASE folded into an equivalent RIN, 1/Hz.
    pub ase_rin_per_hz: f64,
    pub gain_linear: f64,
    pub ledger: OpticalLedger,
}

impl LinkOperatingPoint {
    pub fn gain_db(&self) -> f64 {
        linear_to_db(self.gain_linear)
    }
}

/// Modulation scheme carried by the path's modulator.
pub fn path_scheme(path: &SignalPath) -> Result<ModulationScheme, LinkError> {
    match path.first(ElementKind::Modulator).map(|e| &e.spec) {
        Some(ComponentSpec::Modulator(m)) => Ok(m.scheme),
        _ => Err(LinkError::MissingElement("modulator")),
    }
}

pub fn operating_point(
    path: &SignalPath,
    scheme: ModulationScheme,
    config: &AnalysisConfig,
) -> Result<LinkOperatingPoint, LinkError> {
    let found = path_scheme(path)?;
    if found != scheme {
        return Err(LinkError::SchemeMismatch {
            path: found,
            requested: scheme,
        });
    }
    let laser_el = path
        .first(ElementKind::Laser)
        .ok_or(LinkError::MissingElement("laser"))?;
    let ComponentSpec::Laser(laser) = &laser_el.spec else {
        return Err(LinkError::MissingElement("laser"));
    };
    let mod_el = path
        .first(ElementKind::Modulator)
        .ok_or(LinkError::MissingElement("modulator"))?;
    let ComponentSpec::Modulator(modulator) = &mod_el.spec else {
        return Err(LinkError::MissingElement("modulator"));
    };
    let ComponentSpec::Photodetector(pd) = &path
        .first(ElementKind::Detector)
        .ok_or(LinkError::MissingElement("detector"))?
        .spec
    else {
        return Err(LinkError::MissingElement("detector"));
    };

    let ledger = optical_ledger(path);
    let transmission = db_to_linear(ledger.delta_after_modulator_db());
    let r = pd.responsivity_a_per_w;
    let p_laser = laser.output_power_w;

    let (slope, photocurrent) = match scheme {
        ModulationScheme::Direct => {
            let s = laser
                .slope_efficiency_w_per_a
                .ok_or_else(|| LinkError::MissingSlopeEfficiency(laser_el.component.clone()))?;
            (s, r * p_laser * transmission)
        }
        ModulationScheme::External => {
            let v_pi = modulator
                .v_pi
                .ok_or_else(|| LinkError::MissingVpi(mod_el.component.clone()))?;
            let t_ff = db_to_linear(-modulator.through_loss_db());
            let s = PI * p_laser * t_ff * config.load_resistance_ohm / (2.0 * v_pi);
            // Quadrature bias passes half the peak transmission on average.
            (s, r * p_laser * t_ff * transmission / 2.0)
        }
    };

    let nu = optical_frequency_hz(path.wavelength_nm);
    let mut ase_rin = 0.0;
    for (i, el) in path.elements.iter().enumerate() {
        if let ComponentSpec::Edfa(e) = &el.spec {
            let p_in = dbm_to_watts(ledger.input_dbm(i));
            ase_rin += 2.0 * PLANCK * nu * db_to_linear(e.noise_figure_db) / p_in;
        }
    }

    let amplitude = slope * transmission * r;
    Ok(LinkOperatingPoint {
        scheme,
        slope_w_per_a: slope,
        transmission,
        responsivity_a_per_w: r,
        photocurrent_a: photocurrent,
        dark_current_a: pd.dark_current_a,
        laser_rin_per_hz: db_to_linear(laser.rin_db_hz),
        ase_rin_per_hz: ase_rin,
        gain_linear: amplitude * amplitude,
        ledger,
    })
}

/// Link RF power gain, dB.
pub fn rf_gain(
    path: &SignalPath,
    scheme: ModulationScheme,
    config: &AnalysisConfig,
) -> Result<f64, LinkError> {
    Ok(operating_point(path, scheme, config)?.gain_db())
}

pub fn noise_breakdown(op: &LinkOperatingPoint, config: &AnalysisConfig) -> NoiseBreakdown {
    let kt = BOLTZMANN * config.temperature_k;
    let r_load = config.load_resistance_ohm;
    let i2r = op.photocurrent_a * op.photocurrent_a * r_load;
    NoiseBreakdown {
        thermal_w_hz: kt * (op.gain_linear + 1.0),
        shot_w_hz: 2.0 * ELEMENTARY_CHARGE * (op.photocurrent_a + op.dark_current_a) * r_load,
        rin_w_hz: op.laser_rin_per_hz * i2r,
        ase_w_hz: op.ase_rin_per_hz * i2r,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseFigure {
    /// Reported NF, dB (floored; +inf when degenerate).
    pub db: f64,
    /// NF before the passive floor was applied, dB.
    pub raw_db: f64,
    pub floored: bool,
    /// Zero photocurrent or zero gain: the NF is undefined.
    pub degenerate: bool,
    pub breakdown: NoiseBreakdown,
}

/// NF from output noise and gain, with the passive floor.
pub fn noise_figure_from(
    breakdown: NoiseBreakdown,
    gain_linear: f64,
    photocurrent_a: f64,
    temperature_k: f64,
) -> NoiseFigure {
    if photocurrent_a <= 0.0 || gain_linear <= 0.0 {
        return NoiseFigure {
            db: f64::INFINITY,
            raw_db: f64::INFINITY,
            floored: false,
            degenerate: true,
            breakdown,
        };
    }
    let raw = linear_to_db(breakdown.total() / (gain_linear * BOLTZMANN * temperature_k));
    let floor = nf_floor_db();
    NoiseFigure {
        db: raw.max(floor),
        raw_db: raw,
        floored: raw < floor,
        degenerate: false,
        breakdown,
    }
}

pub fn noise_figure(
    path: &SignalPath,
    scheme: ModulationScheme,
    config: &AnalysisConfig,
) -> Result<NoiseFigure, LinkError> {
    let op = operating_point(path, scheme, config)?;
    Ok(noise_figure_from(
        noise_breakdown(&op, config),
        op.gain_linear,
        op.photocurrent_a,
        config.temperature_k,
    ))
}

/// RF stage for cascade analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub gain_db: f64,
    pub noise_figure_db: f64,
}

impl Stage {
    pub fn new(gain_db: f64, noise_figure_db: f64) -> Self {
        Self {
            gain_db,
            noise_figure_db,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cascade {
    pub gain_db: f64,
    pub noise_figure_db: f64,
}

/// Friis combination of stages in signal order.
pub fn cascade(stages: &[Stage]) -> Cascade {
    let mut factor = 1.0;
    let mut gain = 1.0;
    let mut gain_db = 0.0;
    for (i, s) in stages.iter().enumerate() {
        let f = db_to_linear(s.noise_figure_db);
        if i == 0 {
            factor = f;
        } else {
            factor += (f - 1.0) / gain;
        }
        gain *= db_to_linear(s.gain_db);
        gain_db += s.gain_db;
    }
    Cascade {
        gain_db,
        noise_figure_db: linear_to_db(factor),
    }
}
