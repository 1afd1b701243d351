//! Per-path analog link metrics under the direct or external modulation model.

pub mod ledger;
pub mod metrics;
pub mod noise;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::components::{ModulationScheme, SignalKind};
use crate::topology::{Direction, OpticalTopology, SignalPath, TopologyError};

pub use ledger::{
    apply_gain_plan, edfa_autogain, edfa_autogain_topology, optical_ledger, passive_loss_db,
    EdfaSetting, GainPlan, LedgerEntry, LedgerFlag, OpticalLedger,
};
pub use metrics::{
    crosstalk_db, effective_bandwidth_hz, noise_floor_dbm, path_crosstalk_db,
    phase_noise_degradation, phase_noise_floor_dbc_hz, propagation_delay_s, pulse_skew,
    rise_fall_time, rss, sfdr_db, skew_of, snr_degradation, timing_jitter, PhaseNoisePoint,
};
pub use noise::{
    cascade, nf_floor_db, noise_breakdown, noise_figure, noise_figure_from, operating_point,
    path_scheme, rf_gain, Cascade, LinkOperatingPoint, NoiseBreakdown, NoiseFigure, Stage,
};

fn default_bandwidth() -> f64 {
    10e6
}
fn default_temperature() -> f64 {
    crate::units::T0
}
fn default_load() -> f64 {
    50.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default = "default_bandwidth")]
    pub bandwidth_hz: f64,
    #[serde(default = "default_temperature")]
    pub temperature_k: f64,
    #[serde(default = "default_load")]
    pub load_resistance_ohm: f64,
    /// Input third-order intercept of the link, dBm.
    #[serde(default)]
    pub iip3_dbm: Option<f64>,
    /// RF stage ahead of the link, used for the NF degradation figure.
    #[serde(default)]
    pub input_stage: Option<Stage>,
    #[serde(default)]
    pub snr_in_db: Option<f64>,
    /// RF carrier power at the link input for phase-noise analysis, dBm.
    #[serde(default)]
    pub carrier_dbm: Option<f64>,
    /// Input phase-noise profile as (offset Hz, dBc/Hz).
    #[serde(default)]
    pub phase_noise_dbc_hz: Vec<(f64, f64)>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            bandwidth_hz: default_bandwidth(),
            temperature_k: default_temperature(),
            load_resistance_ohm: default_load(),
            iip3_dbm: None,
            input_stage: None,
            snr_in_db: None,
            carrier_dbm: None,
            phase_noise_dbc_hz: Vec::new(),
        }
    }
}

impl AnalysisConfig {
    pub fn check(&self) -> Result<(), LinkError> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.bandwidth_hz) {
            return Err(LinkError::InvalidConfig(format!(
                "bandwidth must be > 0 (got {})",
                self.bandwidth_hz
            )));
        }
        if !positive(self.temperature_k) {
            return Err(LinkError::InvalidConfig(format!(
                "temperature must be > 0 (got {})",
                self.temperature_k
            )));
        }
        if !positive(self.load_resistance_ohm) {
            return Err(LinkError::InvalidConfig(format!(
                "load resistance must be > 0 (got {})",
                self.load_resistance_ohm
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum LinkError {
    #[error("path uses {path:?} modulation but {requested:?} was requested")]
    SchemeMismatch {
        path: ModulationScheme,
        requested: ModulationScheme,
    },
    #[error("laser `{0}` has no slope efficiency for direct modulation")]
    MissingSlopeEfficiency(String),
    #[error("modulator `{0}` has no v_pi for external modulation")]
    MissingVpi(String),
    #[error("path has no {0}")]
    MissingElement(&'static str),
    #[error("no element on the path declares a bandwidth")]
    ZeroBandwidth,
    #[error("iip3 not provided")]
    MissingIip3,
    #[error("phase-noise profile given without a carrier power")]
    MissingCarrierPower,
    #[error("invalid analysis config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

/// Everything computed for one signal path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkMetrics {
    pub channel: String,
    pub kind: SignalKind,
    pub direction: Direction,
    pub destination: String,
    pub wavelength_nm: f64,
    pub scheme: ModulationScheme,
    pub rf_gain_db: f64,
    pub noise_figure_db: f64,
    pub nf_floored: bool,
    pub nf_degenerate: bool,
    pub cascaded_noise_figure_db: f64,
    pub nf_degradation_db: f64,
    pub noise: NoiseBreakdown,
    pub photocurrent_a: f64,
    pub iip3_dbm: Option<f64>,
    pub sfdr_db: Option<f64>,
    pub sfdr_bandwidth_hz: f64,
    pub snr_in_db: Option<f64>,
    pub snr_out_db: Option<f64>,
    pub snr_degradation_db: f64,
    pub phase_noise: Vec<PhaseNoisePoint>,
    /// Worst degradation over the phase-noise offsets, dB.
    pub phase_noise_degradation_db: Option<f64>,
    pub crosstalk_db: Option<f64>,
    pub effective_bandwidth_hz: f64,
    pub rise_time_s: f64,
    pub fall_time_s: f64,
    pub propagation_delay_s: f64,
    pub pulse_skew_s: f64,
    pub timing_jitter_rms_s: f64,
    pub optical_ledger: OpticalLedger,
}

/// SFDR of one path. Fails without an IIP3.
pub fn sfdr(
    path: &SignalPath,
    scheme: ModulationScheme,
    config: &AnalysisConfig,
) -> Result<f64, LinkError> {
    let iip3 = config.iip3_dbm.ok_or(LinkError::MissingIip3)?;
    let nf = noise_figure(path, scheme, config)?;
    Ok(sfdr_db(
        iip3,
        nf.db,
        config.bandwidth_hz,
        config.temperature_k,
    ))
}

/// Metrics for one path with no co-propagating channel information.
pub fn analyze_path(
    path: &SignalPath,
    scheme: ModulationScheme,
    config: &AnalysisConfig,
) -> Result<LinkMetrics, LinkError> {
    analyze_path_with(path, scheme, config, None)
}

/// Metrics for one path; crosstalk is taken from the topology when given.
pub fn analyze_path_with(
    path: &SignalPath,
    scheme: ModulationScheme,
    config: &AnalysisConfig,
    topology: Option<&OpticalTopology>,
) -> Result<LinkMetrics, LinkError> {
    config.check()?;
    let op = operating_point(path, scheme, config)?;
    let nf = noise_figure_from(
        noise_breakdown(&op, config),
        op.gain_linear,
        op.photocurrent_a,
        config.temperature_k,
    );
    let gain_db = op.gain_db();

    let (cascaded, degradation) = match config.input_stage {
        Some(stage) => {
            let c = cascade(&[stage, Stage::new(gain_db, nf.db)]);
            (c.noise_figure_db, c.noise_figure_db - stage.noise_figure_db)
        }
        None => (nf.db, nf.db),
    };

    let analog = path.kind == SignalKind::Analog;
    let sfdr = match (analog, config.iip3_dbm) {
        (true, Some(iip3)) => Some(sfdr_db(
            iip3,
            nf.db,
            config.bandwidth_hz,
            config.temperature_k,
        )),
        _ => None,
    };

    let (snr_out, snr_degradation) = match config.snr_in_db {
        Some(s) => {
            let (out, d) = snr_degradation(s, nf.db);
            (Some(out), d)
        }
        None => (None, nf.db),
    };

    let phase_noise = if analog && !config.phase_noise_dbc_hz.is_empty() {
        let carrier = config.carrier_dbm.ok_or(LinkError::MissingCarrierPower)?;
        let floor = phase_noise_floor_dbc_hz(nf.db, carrier, config.temperature_k);
        phase_noise_degradation(&config.phase_noise_dbc_hz, floor)
    } else {
        Vec::new()
    };
    let phase_noise_degradation_db = phase_noise
        .iter()
        .map(|p| p.degradation_db)
        .reduce(f64::max);

    let bandwidth = effective_bandwidth_hz(path).unwrap_or(config.bandwidth_hz);
    let (rise, fall) = rise_fall_time(bandwidth)?;

    Ok(LinkMetrics {
        channel: path.channel.clone(),
        kind: path.kind,
        direction: path.direction,
        destination: path.destination.clone(),
        wavelength_nm: path.wavelength_nm,
        scheme,
        rf_gain_db: gain_db,
        noise_figure_db: nf.db,
        nf_floored: nf.floored,
        nf_degenerate: nf.degenerate,
        cascaded_noise_figure_db: cascaded,
        nf_degradation_db: degradation,
        noise: nf.breakdown,
        photocurrent_a: op.photocurrent_a,
        iip3_dbm: if analog { config.iip3_dbm } else { None },
        sfdr_db: sfdr,
        sfdr_bandwidth_hz: config.bandwidth_hz,
        snr_in_db: config.snr_in_db,
        snr_out_db: snr_out,
        snr_degradation_db: snr_degradation,
        phase_noise,
        phase_noise_degradation_db,
        crosstalk_db: topology.and_then(|t| path_crosstalk_db(path, t)),
        effective_bandwidth_hz: bandwidth,
        rise_time_s: rise,
        fall_time_s: fall,
        propagation_delay_s: propagation_delay_s(path),
        pulse_skew_s: 0.0,
        timing_jitter_rms_s: timing_jitter(path),
        optical_ledger: op.ledger,
    })
}

/// Metrics for every path of a topology, each under its own modulator's
/// scheme. Pulse skew is measured against the fastest path of the same kind.
pub fn analyze_network(
    topology: &OpticalTopology,
    config: &AnalysisConfig,
) -> Result<Vec<LinkMetrics>, LinkError> {
    let paths = crate::topology::enumerate_paths(topology)?;
    let mut out = Vec::with_capacity(paths.len());
    for p in &paths {
        let scheme = path_scheme(p)?;
        out.push(analyze_path_with(p, scheme, config, Some(topology))?);
    }
    for kind in [SignalKind::Analog, SignalKind::Digital] {
        let fastest = out
            .iter()
            .filter(|m| m.kind == kind)
            .map(|m| m.propagation_delay_s)
            .fold(f64::INFINITY, f64::min);
        for m in out.iter_mut().filter(|m| m.kind == kind) {
            m.pulse_skew_s = m.propagation_delay_s - fastest;
        }
    }
    Ok(out)
}

/// Spread of delay across all analysed paths of one kind, s.
pub fn network_skew_s(metrics: &[LinkMetrics], kind: SignalKind) -> f64 {
    skew_of(
        metrics
            .iter()
            .filter(|m| m.kind == kind)
            .map(|m| m.propagation_delay_s),
    )
}
