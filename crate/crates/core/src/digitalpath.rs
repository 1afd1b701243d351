//! Throughput of the digitised return links.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::topology::{ReturnGroup, CHANNELS_PER_GROUP};

/// Receiver payload bar for an eight-channel receiver, bytes/s.
pub const EIGHT_CHANNEL_BAR_BYTES_S: f64 = 250e6;

/// The eight-channel bar scaled to one return group, bytes/s.
pub fn group_bar_bytes_s() -> f64 {
    EIGHT_CHANNEL_BAR_BYTES_S * f64::from(CHANNELS_PER_GROUP) / 8.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Encoding {
    #[serde(rename = "8b10b")]
    EightBTenB,
    #[serde(rename = "64b66b")]
    SixtyFourBSixtySixB,
}

impl Encoding {
    pub fn efficiency(self) -> f64 {
        match self {
            Encoding::EightBTenB => 0.8,
            Encoding::SixtyFourBSixtySixB => 64.0 / 66.0,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum DigitalError {
    #[error("line rate must be > 0 (got {0})")]
    LineRate(f64),
    #[error("framing overhead must be in [0, 1) (got {0})")]
    Framing(f64),
    #[error("sample rate must be > 0 (got {0})")]
    SampleRate(f64),
    #[error("bits per sample must be > 0")]
    Bits,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DigitalLinkSpec {
    pub line_rate_bps: f64,
    pub encoding: Encoding,
    #[serde(default)]
    pub framing_overhead: f64,
}

impl DigitalLinkSpec {
    pub fn new(line_rate_bps: f64, encoding: Encoding, framing_overhead: f64) -> Self {
        Self {
            line_rate_bps,
            encoding,
            framing_overhead,
        }
    }

    pub fn validate(&self) -> Result<(), DigitalError> {
        if !(self.line_rate_bps.is_finite() && self.line_rate_bps > 0.0) {
            return Err(DigitalError::LineRate(self.line_rate_bps));
        }
        if !(0.0..1.0).contains(&self.framing_overhead) {
            return Err(DigitalError::Framing(self.framing_overhead));
        }
        Ok(())
    }

    /// Payload bits per line bit.
    pub fn efficiency(&self) -> f64 {
        self.encoding.efficiency() * (1.0 - self.framing_overhead)
    }
}

fn default_group_channels() -> u32 {
    CHANNELS_PER_GROUP
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdcStreamSpec {
    pub sample_rate_sps: f64,
    pub bits_per_sample: u32,
    /// I and Q samples double the stream.
    #[serde(default)]
    pub complex: bool,
    #[serde(default = "default_group_channels")]
    pub channels_per_group: u32,
}

impl AdcStreamSpec {
    pub fn validate(&self) -> Result<(), DigitalError> {
        if !(self.sample_rate_sps.is_finite() && self.sample_rate_sps > 0.0) {
            return Err(DigitalError::SampleRate(self.sample_rate_sps));
        }
        if self.bits_per_sample == 0 {
            return Err(DigitalError::Bits);
        }
        Ok(())
    }

    pub fn channel_bit_rate(&self) -> f64 {
        let lanes = if self.complex { 2.0 } else { 1.0 };
        self.sample_rate_sps * f64::from(self.bits_per_sample) * lanes
    }
}

/// Payload carried by one serial link, bytes/s.
pub fn payload_throughput(link: &DigitalLinkSpec) -> f64 {
    link.line_rate_bps * link.efficiency() / 8.0
}

/// Smallest line rate whose payload carries `channels` ADC streams, bit/s.
pub fn required_line_rate(
    stream: &AdcStreamSpec,
    channels: u32,
    encoding: Encoding,
    framing_overhead: f64,
) -> f64 {
    let payload_bits = stream.channel_bit_rate() * f64::from(channels);
    payload_bits / (encoding.efficiency() * (1.0 - framing_overhead))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupCapacity {
    pub group: u32,
    pub transmitter: String,
    pub channels: u32,
    pub payload_bytes_s: f64,
    /// ADC payload the group must carry, bytes/s.
    pub demand_bytes_s: f64,
    pub bar_bytes_s: f64,
    /// Payload minus the bar, MB/s. Negative is a deficit.
    pub margin_mb_s: f64,
    pub pass: bool,
    /// Payload also covers the group's ADC streams.
    pub demand_met: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityReport {
    pub groups: Vec<GroupCapacity>,
}

impl CapacityReport {
    pub fn all_pass(&self) -> bool {
        !self.groups.is_empty() && self.groups.iter().all(|g| g.pass)
    }

    /// Smallest payload over the groups, bytes/s.
    pub fn worst_payload_bytes_s(&self) -> Option<f64> {
        self.groups
            .iter()
            .map(|g| g.payload_bytes_s)
            .reduce(f64::min)
    }
}

/// Compares each group's link payload against `bar_bytes_s`; ADC demand is
/// reported alongside.
pub fn check_group_capacity(
    groups: &[ReturnGroup],
    link: &DigitalLinkSpec,
    stream: &AdcStreamSpec,
    bar_bytes_s: f64,
) -> CapacityReport {
    let payload = payload_throughput(link);
    let groups = groups
        .iter()
        .map(|g| {
            let channels = g.channels.len() as u32;
            let demand = stream.channel_bit_rate() * f64::from(channels) / 8.0;
            GroupCapacity {
                group: g.index,
                transmitter: g.transmitter.clone(),
                channels,
                payload_bytes_s: payload,
                demand_bytes_s: demand,
                bar_bytes_s,
                margin_mb_s: (payload - bar_bytes_s) / 1e6,
                pass: payload >= bar_bytes_s,
                demand_met: payload >= demand,
            }
        })
        .collect();
    CapacityReport { groups }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream() -> AdcStreamSpec {
        AdcStreamSpec {
            sample_rate_sps: 7.8125e6,
            bits_per_sample: 16,
            complex: true,
            channels_per_group: 4,
        }
    }

    fn groups(n: u32) -> Vec<ReturnGroup> {
        (0..n)
            .map(|i| ReturnGroup {
                index: i,
                transmitter: format!("dotxc-{i:02}"),
                channels: (0..4).map(|c| format!("g{i:02}c{c}")).collect(),
            })
            .collect()
    }

    #[test]
    fn payload_examples() {
        let l = DigitalLinkSpec::new(3.125e9, Encoding::EightBTenB, 0.0);
        assert!((payload_throughput(&l) - 312.5e6).abs() < 1e-3);
        // linear in line rate
        let half = DigitalLinkSpec::new(1.5625e9, Encoding::EightBTenB, 0.0);
        assert_eq!(2.0 * payload_throughput(&half), payload_throughput(&l));
        let framed = DigitalLinkSpec::new(3.125e9, Encoding::EightBTenB, 0.03);
        assert!((payload_throughput(&framed) - 303.125e6).abs() < 1e-3);
        let g = DigitalLinkSpec::new(66e9, Encoding::SixtyFourBSixtySixB, 0.0);
        assert!((payload_throughput(&g) - 8e9).abs() < 1e-3);
    }

    #[test]
    fn group_bar_is_half_the_eight_channel_bar() {
        assert_eq!(group_bar_bytes_s(), 125e6);
    }

    #[test]
    fn required_rate_examples() {
        let s = stream();
        assert_eq!(s.channel_bit_rate(), 250e6);
        let r = required_line_rate(&s, 4, Encoding::EightBTenB, 0.0);
        assert!((r - 1.25e9).abs() < 1e-3);
        let one = AdcStreamSpec {
            complex: false,
            ..s
        };
        let r1 = required_line_rate(&one, 1, Encoding::EightBTenB, 0.0) * 0.8;
        assert!((r1 - one.channel_bit_rate()).abs() < 1e-6);
        let link = DigitalLinkSpec::new(r, Encoding::EightBTenB, 0.0);
        assert!(payload_throughput(&link) * 8.0 >= 4.0 * s.channel_bit_rate() - 1e-6);
    }

    #[test]
    fn capacity_examples() {
        let g = groups(4);
        let s = stream();
        let pass = check_group_capacity(
            &g,
            &DigitalLinkSpec::new(3.125e9, Encoding::EightBTenB, 0.0),
            &s,
            group_bar_bytes_s(),
        );
        assert!(pass.all_pass());
        assert_eq!(pass.groups.len(), 4);
        assert!((pass.groups[0].margin_mb_s - 187.5).abs() < 1e-9);

        let edge = check_group_capacity(
            &g,
            &DigitalLinkSpec::new(1.25e9, Encoding::EightBTenB, 0.0),
            &s,
            group_bar_bytes_s(),
        );
        assert!(edge.all_pass());
        assert_eq!(edge.groups[0].margin_mb_s, 0.0);

        let short = check_group_capacity(
            &g,
            &DigitalLinkSpec::new(1e9, Encoding::EightBTenB, 0.0),
            &s,
            group_bar_bytes_s(),
        );
        assert!(!short.all_pass());
        assert!((short.groups[0].margin_mb_s + 25.0).abs() < 1e-9);
    }

    #[test]
    fn adc_demand_is_reported_separately() {
        let s = AdcStreamSpec {
            sample_rate_sps: 20e6,
            ..stream()
        };
        let r = check_group_capacity(
            &groups(1),
            &DigitalLinkSpec::new(1.25e9, Encoding::EightBTenB, 0.0),
            &s,
            group_bar_bytes_s(),
        );
        assert!(r.groups[0].pass);
        assert!(!r.groups[0].demand_met);
    }

    #[test]
    fn validation() {
        assert!(DigitalLinkSpec::new(0.0, Encoding::EightBTenB, 0.0)
            .validate()
            .is_err());
        assert!(DigitalLinkSpec::new(1e9, Encoding::EightBTenB, 1.0)
            .validate()
            .is_err());
        assert!(DigitalLinkSpec::new(1e9, Encoding::EightBTenB, 0.5)
            .validate()
            .is_ok());
        assert!(AdcStreamSpec {
            bits_per_sample: 0,
            ..stream()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn encoding_names_round_trip() {
        let j = serde_json::to_string(&Encoding::SixtyFourBSixtySixB).unwrap();
        assert_eq!(j, "\"64b66b\"");
        let e: Encoding = serde_json::from_str("\"8b10b\"").unwrap();
        assert_eq!(e, Encoding::EightBTenB);
    }
}
