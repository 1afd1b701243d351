//! Dynamic range, SNR, phase noise, crosstalk and timing figures.

use serde::{Deserialize, Serialize};

use super::LinkError;
use crate::components::ComponentSpec;
use crate::topology::{ElementKind, OpticalTopology, SignalPath};
use crate::units::{db_to_linear, linear_to_db, thermal_floor_dbm_hz, SPEED_OF_LIGHT};

/// First-order 10-90 % rise time constant.
pub const RISE_TIME_CONSTANT: f64 = 0.35;

/// Input-referred noise floor in `bandwidth_hz`, dBm.
pub fn noise_floor_dbm(noise_figure_db: f64, bandwidth_hz: f64, temperature_k: f64) -> f64 {
    thermal_floor_dbm_hz(temperature_k) + noise_figure_db + linear_to_db(bandwidth_hz)
}

/// Two-tone spur-free range within `bandwidth_hz`, dB. Never negative.
pub fn sfdr_db(iip3_dbm: f64, noise_figure_db: f64, bandwidth_hz: f64, temperature_k: f64) -> f64 {
    let floor = noise_floor_dbm(noise_figure_db, bandwidth_hz, temperature_k);
    (2.0 / 3.0 * (iip3_dbm - floor)).max(0.0)
}

/// Output SNR and the degradation through a link of the given NF.
pub fn snr_degradation(snr_in_db: f64, noise_figure_db: f64) -> (f64, f64) {
    (snr_in_db - noise_figure_db, noise_figure_db)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseNoisePoint {
    pub offset_hz: f64,
    pub input_dbc_hz: f64,
    pub output_dbc_hz: f64,
    pub degradation_db: f64,
}

/// Additive link floor relative to the carrier, dBc/Hz.
pub fn phase_noise_floor_dbc_hz(noise_figure_db: f64, carrier_dbm: f64, temperature_k: f64) -> f64 {
    thermal_floor_dbm_hz(temperature_k) + noise_figure_db - carrier_dbm
}

/// Power-sums a flat floor onto each point of an input phase-noise profile.
pub fn phase_noise_degradation(profile: &[(f64, f64)], floor_dbc_hz: f64) -> Vec<PhaseNoisePoint> {
    profile
        .iter()
        .map(|&(offset_hz, l_in)| {
            let l_out = linear_to_db(db_to_linear(l_in) + db_to_linear(floor_dbc_hz));
            PhaseNoisePoint {
                offset_hz,
                input_dbc_hz: l_in,
                output_dbc_hz: l_out,
                degradation_db: l_out - l_in,
            }
        })
        .collect()
}

/// Aggregate leakage of the other channels onto `channel`, dB.
///
/// Channels are ranked by wavelength; direct neighbours leak through the
/// adjacent isolation, all others through the non-adjacent isolation.
/// `None` when the channel is alone.
pub fn crosstalk_db(
    channel: &str,
    co_channels: &[(String, f64)],
    adjacent_isolation_db: f64,
    nonadjacent_isolation_db: f64,
) -> Option<f64> {
    let mut ranked: Vec<&(String, f64)> = co_channels.iter().collect();
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    let me = ranked.iter().position(|(id, _)| id == channel)?;
    let mut sum = 0.0;
    let mut count = 0;
    for (i, _) in ranked.iter().enumerate() {
        if i == me {
            continue;
        }
        let iso = if i.abs_diff(me) == 1 {
            adjacent_isolation_db
        } else {
            nonadjacent_isolation_db
        };
        sum += db_to_linear(-iso);
        count += 1;
    }
    (count > 0).then(|| linear_to_db(sum))
}

/// Crosstalk at the path's demultiplexer from channels sharing its fiber.
pub fn path_crosstalk_db(path: &SignalPath, topology: &OpticalTopology) -> Option<f64> {
    let demux = path.first(ElementKind::Demux)?;
    let ComponentSpec::MuxDemux(d) = &demux.spec else {
        return None;
    };
    let co = topology.channels_into(&path.destination, &path.plane);
    crosstalk_db(
        &path.channel,
        &co,
        d.adjacent_isolation_db,
        d.nonadjacent_isolation_db,
    )
}

/// Narrowest element bandwidth on the path, if any element declares one.
pub fn effective_bandwidth_hz(path: &SignalPath) -> Option<f64> {
    path.elements
        .iter()
        .filter_map(|e| e.spec.bandwidth_hz())
        .reduce(f64::min)
}

pub fn rise_fall_time(bandwidth_hz: f64) -> Result<(f64, f64), LinkError> {
    if bandwidth_hz <= 0.0 || !bandwidth_hz.is_finite() {
        return Err(LinkError::ZeroBandwidth);
    }
    let t = RISE_TIME_CONSTANT / bandwidth_hz;
    Ok((t, t))
}

/// Group delay through every fiber on the path, s.
pub fn propagation_delay_s(path: &SignalPath) -> f64 {
    path.elements
        .iter()
        .filter_map(|e| match &e.spec {
            ComponentSpec::Fiber(f) => Some(f.group_index * f.length_m / SPEED_OF_LIGHT),
            _ => None,
        })
        .sum()
}

/// Spread of propagation delay over a set of paths, s.
pub fn pulse_skew(paths: &[SignalPath]) -> f64 {
    skew_of(paths.iter().map(propagation_delay_s))
}

pub fn skew_of(delays: impl IntoIterator<Item = f64>) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for d in delays {
        lo = lo.min(d);
        hi = hi.max(d);
    }
    if lo.is_finite() {
        hi - lo
    } else {
        0.0
    }
}

pub fn rss(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Root-sum-square of the per-element rms jitter, s.
pub fn timing_jitter(path: &SignalPath) -> f64 {
    rss(path.elements.iter().map(|e| e.jitter_rms_s))
}
