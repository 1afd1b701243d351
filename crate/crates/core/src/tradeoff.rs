//! Design-space enumeration, ordinal scoring, requirement checks and the
//! ranked recommendation.
//!
//! Power, size and weight are only known comparatively. Each is scored from a
//! small set of pairwise "strictly better" rules; a variant's rank is one more
//! than the longest chain of variants strictly better than it, so variants the
//! rules cannot separate share a rank.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::components::{GratingTechnology, ModulationScheme, SignalKind};
use crate::digitalpath::CapacityReport;
use crate::linkbudget::LinkMetrics;
use crate::units::{linear_to_db, thermal_floor_dbm_hz, T0};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modulation {
    Dm,
    Em,
}

impl Modulation {
    pub fn scheme(self) -> ModulationScheme {
        match self {
            Modulation::Dm => ModulationScheme::Direct,
            Modulation::Em => ModulationScheme::External,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integration {
    /// Silicon photonics.
    Si,
    /// III-V highly integrated photonics.
    Hip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DesignVariant {
    pub modulation: Modulation,
    pub grating: GratingTechnology,
    pub integration: Integration,
}

impl DesignVariant {
    pub fn new(
        modulation: Modulation,
        grating: GratingTechnology,
        integration: Integration,
    ) -> Self {
        Self {
            modulation,
            grating,
            integration,
        }
    }

    /// Volume Bragg gratings have no silicon implementation.
    pub fn is_feasible(&self) -> bool {
        !(self.grating == GratingTechnology::Vbg && self.integration == Integration::Si)
    }

    /// Long form, e.g. "direct modulation, VBG, III-V hybrid".
    pub fn label(&self) -> String {
        let m = match self.modulation {
            Modulation::Dm => "direct modulation",
            Modulation::Em => "external modulation",
        };
        let i = match self.integration {
            Integration::Si => "silicon",
            Integration::Hip => "III-V hybrid",
        };
        format!("{m}, {}, {i}", self.grating)
    }

    /// Position in the fixed enumeration order.
    pub fn index(&self) -> usize {
        let m = match self.modulation {
            Modulation::Dm => 0,
            Modulation::Em => 1,
        };
        let g = match self.grating {
            GratingTechnology::Vbg => 0,
            GratingTechnology::Awg => 1,
        };
        let i = match self.integration {
            Integration::Si => 0,
            Integration::Hip => 1,
        };
        m * 4 + g * 2 + i
    }
}

impl fmt::Display for DesignVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = match self.modulation {
            Modulation::Dm => "dm",
            Modulation::Em => "em",
        };
        let g = match self.grating {
            GratingTechnology::Vbg => "vbg",
            GratingTechnology::Awg => "awg",
        };
        let i = match self.integration {
            Integration::Si => "si",
            Integration::Hip => "hip",
        };
        write!(f, "{m}-{g}-{i}")
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TradeoffError {
    #[error("unknown design variant `{0}` (expected e.g. dmxvbgxhip)")]
    UnknownVariant(String),
    #[error("variant {0} is infeasible")]
    Infeasible(DesignVariant),
    #[error("no variants to rank")]
    Empty,
    #[error("invalid requirement set: {0}")]
    InvalidRequirements(String),
}

impl FromStr for DesignVariant {
    type Err = TradeoffError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        let parts: Vec<&str> = lower.split(['x', '-', '/']).collect();
        let bad = || TradeoffError::UnknownVariant(s.to_string());
        let [m, g, i] = parts.as_slice() else {
            return Err(bad());
        };
        let modulation = match *m {
            "dm" => Modulation::Dm,
            "em" => Modulation::Em,
            _ => return Err(bad()),
        };
        let grating = match *g {
            "vbg" => GratingTechnology::Vbg,
            "awg" => GratingTechnology::Awg,
            _ => return Err(bad()),
        };
        let integration = match *i {
            "si" => Integration::Si,
            "hip" | "hip3_5" | "iiiv" => Integration::Hip,
            _ => return Err(bad()),
        };
        Ok(Self::new(modulation, grating, integration))
    }
}

/// All eight combinations in enumeration order, each with its feasibility.
pub fn enumerate_variants() -> Vec<(DesignVariant, bool)> {
    let mut out = Vec::with_capacity(8);
    for modulation in [Modulation::Dm, Modulation::Em] {
        for grating in [GratingTechnology::Vbg, GratingTechnology::Awg] {
            for integration in [Integration::Si, Integration::Hip] {
                let v = DesignVariant::new(modulation, grating, integration);
                out.push((v, v.is_feasible()));
            }
        }
    }
    out
}

pub fn feasible_variants() -> Vec<DesignVariant> {
    enumerate_variants()
        .into_iter()
        .filter_map(|(v, ok)| ok.then_some(v))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Attribute {
    Power,
    Size,
    Weight,
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Attribute::Power => "power",
            Attribute::Size => "size",
            Attribute::Weight => "weight",
        })
    }
}

/// The direct rule, if any, by which `a` is strictly better than `b`.
pub fn direct_rule(a: &DesignVariant, b: &DesignVariant, attr: Attribute) -> Option<&'static str> {
    let same_m = a.modulation == b.modulation;
    let same_g = a.grating == b.grating;
    let same_i = a.integration == b.integration;
    let dm_over_em = a.modulation == Modulation::Dm && b.modulation == Modulation::Em;
    let vbg_over_awg = a.grating == GratingTechnology::Vbg && b.grating == GratingTechnology::Awg;
    match attr {
        Attribute::Power => {
            if dm_over_em && same_g && same_i {
                Some("DM draws less power than EM for the same grating")
            } else if vbg_over_awg && same_m {
                Some("VBG draws less power than AWG for the same modulation")
            } else {
                None
            }
        }
        Attribute::Size | Attribute::Weight => {
            let both_hip = a.integration == Integration::Hip && b.integration == Integration::Hip;
            if vbg_over_awg && same_m && both_hip {
                Some("VBG is smaller and lighter than AWG in III-V")
            } else if dm_over_em && same_g && same_i {
                Some("DM is smaller and lighter than EM")
            } else {
                None
            }
        }
    }
}

/// Rules that can never fire because they compare against an infeasible variant.
pub fn vacuous_rules() -> Vec<String> {
    vec![
        "silicon size/weight rule \"VBG best for DM\" is vacuous: VBG has no silicon variant"
            .to_string(),
        "silicon size/weight rule \"AWG best for EM\" is vacuous: VBG has no silicon variant"
            .to_string(),
    ]
}

/// `a` strictly better than `b` under the transitive closure of the rules.
pub fn strictly_better(
    a: &DesignVariant,
    b: &DesignVariant,
    attr: Attribute,
    among: &[DesignVariant],
) -> bool {
    let mut seen = vec![false; among.len()];
    let mut stack: Vec<DesignVariant> = vec![*a];
    while let Some(x) = stack.pop() {
        for (k, y) in among.iter().enumerate() {
            if !seen[k] && direct_rule(&x, y, attr).is_some() {
                if y == b {
                    return true;
                }
                seen[k] = true;
                stack.push(*y);
            }
        }
    }
    false
}

fn rank_in(v: &DesignVariant, attr: Attribute, among: &[DesignVariant]) -> u32 {
    // Longest chain of strictly better variants above `v`. The rule graph is
    // acyclic (every rule moves toward DM or VBG), so plain recursion ends.
    fn depth(v: &DesignVariant, attr: Attribute, among: &[DesignVariant]) -> u32 {
        among
            .iter()
            .filter(|u| direct_rule(u, v, attr).is_some())
            .map(|u| 1 + depth(u, attr, among))
            .max()
            .unwrap_or(0)
    }
    1 + depth(v, attr, among)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrdinalScore {
    pub power_rank: u32,
    pub size_rank: u32,
    pub weight_rank: u32,
}

impl OrdinalScore {
    pub fn rank(&self, attr: Attribute) -> u32 {
        match attr {
            Attribute::Power => self.power_rank,
            Attribute::Size => self.size_rank,
            Attribute::Weight => self.weight_rank,
        }
    }
}

/// Ranks of a feasible variant among all feasible variants (1 = best).
pub fn score_variant(v: &DesignVariant) -> Result<OrdinalScore, TradeoffError> {
    if !v.is_feasible() {
        return Err(TradeoffError::Infeasible(*v));
    }
    let among = feasible_variants();
    Ok(OrdinalScore {
        power_rank: rank_in(v, Attribute::Power, &among),
        size_rank: rank_in(v, Attribute::Size, &among),
        weight_rank: rank_in(v, Attribute::Weight, &among),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RequirementSet {
    pub rf_freq_min_hz: f64,
    pub rf_freq_max_hz: f64,
    pub rx_power_min_dbm: f64,
    pub rx_power_max_dbm: f64,
    pub wavelength_min_nm: f64,
    pub wavelength_max_nm: f64,
    pub nf_degradation_strict_db: f64,
    pub nf_degradation_relaxed_db: f64,
    pub phase_spur_degradation_db: f64,
    pub sfdr_min_db: f64,
    /// Bandwidth in which `sfdr_min_db` is stated, Hz.
    pub sfdr_bandwidth_hz: f64,
    /// Payload bar for an eight-channel receiver, bytes/s.
    pub throughput_bar_bytes_s: f64,
}

impl Default for RequirementSet {
    fn default() -> Self {
        Self {
            rf_freq_min_hz: 10e6,
            rf_freq_max_hz: 18e9,
            rx_power_min_dbm: -130.0,
            rx_power_max_dbm: -10.0,
            wavelength_min_nm: 1300.0,
            wavelength_max_nm: 1650.0,
            nf_degradation_strict_db: 1.0,
            nf_degradation_relaxed_db: 2.0,
            phase_spur_degradation_db: 2.0,
            sfdr_min_db: 55.0,
            sfdr_bandwidth_hz: 10e6,
            throughput_bar_bytes_s: crate::digitalpath::EIGHT_CHANNEL_BAR_BYTES_S,
        }
    }
}

impl RequirementSet {
    pub fn validate(&self) -> Result<(), TradeoffError> {
        let values = [
            ("rf_freq_min_hz", self.rf_freq_min_hz),
            ("rf_freq_max_hz", self.rf_freq_max_hz),
            ("rx_power_min_dbm", self.rx_power_min_dbm),
            ("rx_power_max_dbm", self.rx_power_max_dbm),
            ("wavelength_min_nm", self.wavelength_min_nm),
            ("wavelength_max_nm", self.wavelength_max_nm),
            ("nf_degradation_strict_db", self.nf_degradation_strict_db),
            ("nf_degradation_relaxed_db", self.nf_degradation_relaxed_db),
            ("phase_spur_degradation_db", self.phase_spur_degradation_db),
            ("sfdr_min_db", self.sfdr_min_db),
            ("sfdr_bandwidth_hz", self.sfdr_bandwidth_hz),
            ("throughput_bar_bytes_s", self.throughput_bar_bytes_s),
        ];
        if let Some((name, v)) = values.iter().find(|(_, v)| !v.is_finite()) {
            return Err(TradeoffError::InvalidRequirements(format!(
                "{name} is not finite ({v})"
            )));
        }
        if self.nf_degradation_strict_db > self.nf_degradation_relaxed_db {
            return Err(TradeoffError::InvalidRequirements(
                "strict NF degradation bound exceeds the relaxed bound".into(),
            ));
        }
        if self.rf_freq_min_hz > self.rf_freq_max_hz
            || self.rx_power_min_dbm > self.rx_power_max_dbm
            || self.wavelength_min_nm > self.wavelength_max_nm
        {
            return Err(TradeoffError::InvalidRequirements(
                "a range has its minimum above its maximum".into(),
            ));
        }
        if self.sfdr_bandwidth_hz <= 0.0 {
            return Err(TradeoffError::InvalidRequirements(
                "sfdr_bandwidth_hz must be > 0".into(),
            ));
        }
        Ok(())
    }

    /// Per-group bar for the fixed group size, bytes/s.
    pub fn group_throughput_bar_bytes_s(&self) -> f64 {
        self.throughput_bar_bytes_s * f64::from(crate::topology::CHANNELS_PER_GROUP) / 8.0
    }
}

/// Worst-case figures for one variant, as compared against a RequirementSet.
/// Any figure left `None` is reported as not evaluated and fails.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VariantEvidence {
    /// Lowest RF frequency the link passes, Hz.
    pub lower_cutoff_hz: Option<f64>,
    /// Narrowest analog path bandwidth, Hz.
    pub effective_bandwidth_hz: Option<f64>,
    /// Worst link noise figure, dB.
    pub noise_figure_db: Option<f64>,
    pub temperature_k: Option<f64>,
    pub iip3_dbm: Option<f64>,
    pub wavelength_min_nm: Option<f64>,
    pub wavelength_max_nm: Option<f64>,
    pub nf_degradation_db: Option<f64>,
    pub phase_noise_degradation_db: Option<f64>,
    pub sfdr_db: Option<f64>,
    pub sfdr_bandwidth_hz: Option<f64>,
    /// Smallest return-group payload, bytes/s.
    pub group_payload_bytes_s: Option<f64>,
}

fn worst<'a>(
    it: impl Iterator<Item = &'a LinkMetrics>,
    f: impl Fn(&LinkMetrics) -> Option<f64>,
    pick: fn(f64, f64) -> f64,
) -> Option<f64> {
    it.filter_map(f).reduce(pick)
}

impl VariantEvidence {
    /// Summarises analysed paths (forward, and return if any) and the
    /// return-group capacity. Wavelengths span every analysed path.
    pub fn from_analysis(
        metrics: &[LinkMetrics],
        capacity: Option<&CapacityReport>,
        temperature_k: f64,
    ) -> Self {
        let analog = || metrics.iter().filter(|m| m.kind == SignalKind::Analog);
        let any_analog = analog().next().is_some();
        Self {
            lower_cutoff_hz: any_analog.then_some(0.0),
            effective_bandwidth_hz: worst(analog(), |m| Some(m.effective_bandwidth_hz), f64::min),
            noise_figure_db: worst(analog(), |m| Some(m.noise_figure_db), f64::max),
            temperature_k: Some(temperature_k),
            iip3_dbm: worst(analog(), |m| m.iip3_dbm, f64::min),
            wavelength_min_nm: worst(metrics.iter(), |m| Some(m.wavelength_nm), f64::min),
            wavelength_max_nm: worst(metrics.iter(), |m| Some(m.wavelength_nm), f64::max),
            nf_degradation_db: worst(analog(), |m| Some(m.nf_degradation_db), f64::max),
            phase_noise_degradation_db: worst(analog(), |m| m.phase_noise_degradation_db, f64::max),
            sfdr_db: worst(analog(), |m| m.sfdr_db, f64::min),
            sfdr_bandwidth_hz: analog().next().map(|m| m.sfdr_bandwidth_hz),
            group_payload_bytes_s: capacity.and_then(|c| c.worst_payload_bytes_s()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    NotEvaluated,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::NotEvaluated => "NOT EVALUATED",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparator {
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "<=")]
    AtMost,
}

impl Comparator {
    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::AtLeast => ">=",
            Comparator::AtMost => "<=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplianceRow {
    pub requirement: String,
    pub unit: String,
    pub value: Option<f64>,
    pub comparator: Comparator,
    pub bound: f64,
    /// Distance to the bound in its own units; positive is headroom.
    pub margin: Option<f64>,
    pub status: Status,
}

impl ComplianceRow {
    fn new(
        requirement: &str,
        unit: &str,
        value: Option<f64>,
        comparator: Comparator,
        bound: f64,
    ) -> Self {
        let margin = value.map(|v| match comparator {
            Comparator::AtLeast => v - bound,
            Comparator::AtMost => bound - v,
        });
        let status = match margin {
            None => Status::NotEvaluated,
            Some(m) if m >= 0.0 => Status::Pass,
            Some(_) => Status::Fail,
        };
        Self {
            requirement: requirement.to_string(),
            unit: unit.to_string(),
            value,
            comparator,
            bound,
            margin,
            status,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplianceReport {
    pub variant: DesignVariant,
    pub rows: Vec<ComplianceRow>,
    pub compliant: bool,
}

impl ComplianceReport {
    pub fn passed_count(&self) -> usize {
        self.rows.iter().filter(|r| r.passed()).count()
    }

    pub fn row(&self, requirement: &str) -> Option<&ComplianceRow> {
        self.rows.iter().find(|r| r.requirement == requirement)
    }
}

/// Compares the evidence with every bound of `req`.
pub fn check_requirements(
    evidence: &VariantEvidence,
    variant: DesignVariant,
    req: &RequirementSet,
) -> ComplianceReport {
    use Comparator::{AtLeast, AtMost};
    let t = evidence.temperature_k.unwrap_or(T0);
    // Weakest signal must clear the 1 Hz input noise floor.
    let mds = evidence
        .noise_figure_db
        .map(|nf| thermal_floor_dbm_hz(t) + nf);
    // SFDR scales with B^(-2/3); restate it in the requirement's bandwidth.
    let sfdr = match (evidence.sfdr_db, evidence.sfdr_bandwidth_hz) {
        (Some(s), Some(b)) => {
            Some((s - 2.0 / 3.0 * linear_to_db(req.sfdr_bandwidth_hz / b)).max(0.0))
        }
        _ => None,
    };
    let throughput = evidence.group_payload_bytes_s.map(|p| p / 1e6);
    let rows = vec![
        ComplianceRow::new(
            "rf_freq_min",
            "Hz",
            evidence.lower_cutoff_hz,
            AtMost,
            req.rf_freq_min_hz,
        ),
        ComplianceRow::new(
            "rf_freq_max",
            "Hz",
            evidence.effective_bandwidth_hz,
            AtLeast,
            req.rf_freq_max_hz,
        ),
        ComplianceRow::new("rx_power_min", "dBm", mds, AtMost, req.rx_power_min_dbm),
        ComplianceRow::new(
            "rx_power_max",
            "dBm",
            evidence.iip3_dbm,
            AtLeast,
            req.rx_power_max_dbm,
        ),
        ComplianceRow::new(
            "wavelength_min",
            "nm",
            evidence.wavelength_min_nm,
            AtLeast,
            req.wavelength_min_nm,
        ),
        ComplianceRow::new(
            "wavelength_max",
            "nm",
            evidence.wavelength_max_nm,
            AtMost,
            req.wavelength_max_nm,
        ),
        ComplianceRow::new(
            "nf_degradation_strict",
            "dB",
            evidence.nf_degradation_db,
            AtMost,
            req.nf_degradation_strict_db,
        ),
        ComplianceRow::new(
            "nf_degradation_relaxed",
            "dB",
            evidence.nf_degradation_db,
            AtMost,
            req.nf_degradation_relaxed_db,
        ),
        ComplianceRow::new(
            "phase_spur_degradation",
            "dB",
            evidence.phase_noise_degradation_db,
            AtMost,
            req.phase_spur_degradation_db,
        ),
        ComplianceRow::new("sfdr_min", "dB", sfdr, AtLeast, req.sfdr_min_db),
        ComplianceRow::new(
            "throughput_per_group",
            "MB/s",
            throughput,
            AtLeast,
            req.group_throughput_bar_bytes_s() / 1e6,
        ),
    ];
    let compliant = rows.iter().all(ComplianceRow::passed);
    ComplianceReport {
        variant,
        rows,
        compliant,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedVariant {
    pub position: usize,
    pub variant: DesignVariant,
    pub passed: usize,
    pub compliant: bool,
    pub score: OrdinalScore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub order: Vec<RankedVariant>,
    /// One line per adjacent pair naming what separated them.
    pub rationale: Vec<String>,
    pub notes: Vec<String>,
}

impl Recommendation {
    pub fn top(&self) -> &RankedVariant {
        &self.order[0]
    }
}

fn key_cmp(a: &RankedVariant, b: &RankedVariant) -> Ordering {
    b.passed
        .cmp(&a.passed)
        .then(a.score.power_rank.cmp(&b.score.power_rank))
        .then(a.score.size_rank.cmp(&b.score.size_rank))
        .then(a.score.weight_rank.cmp(&b.score.weight_rank))
        .then(a.variant.index().cmp(&b.variant.index()))
}

fn explain(a: &RankedVariant, b: &RankedVariant) -> String {
    let head = format!("{} ahead of {}", a.variant, b.variant);
    if a.passed != b.passed {
        return format!("{head}: passes {} requirements vs {}", a.passed, b.passed);
    }
    for attr in [Attribute::Power, Attribute::Size, Attribute::Weight] {
        let (ra, rb) = (a.score.rank(attr), b.score.rank(attr));
        if ra != rb {
            let rule = direct_rule(&a.variant, &b.variant, attr)
                .map(|r| format!(" ({r})"))
                .unwrap_or_default();
            return format!("{head}: {attr} rank {ra} vs {rb}{rule}");
        }
    }
    format!("{head}: tied on compliance and every rank, enumeration order")
}

/// Orders variants whose scores are already known.
pub fn recommend_scored(
    entries: &[(ComplianceReport, OrdinalScore)],
) -> Result<Recommendation, TradeoffError> {
    if entries.is_empty() {
        return Err(TradeoffError::Empty);
    }
    let mut order: Vec<RankedVariant> = entries
        .iter()
        .map(|(report, score)| RankedVariant {
            position: 0,
            variant: report.variant,
            passed: report.passed_count(),
            compliant: report.compliant,
            score: *score,
        })
        .collect();
    order.sort_by(key_cmp);
    for (i, r) in order.iter_mut().enumerate() {
        r.position = i + 1;
    }
    let rationale = order.windows(2).map(|w| explain(&w[0], &w[1])).collect();
    Ok(Recommendation {
        order,
        rationale,
        notes: vacuous_rules(),
    })
}

/// Ranks feasible variants by (requirements passed, power, size, weight).
pub fn recommend(reports: &[ComplianceReport]) -> Result<Recommendation, TradeoffError> {
    let mut entries = Vec::with_capacity(reports.len());
    for r in reports {
        entries.push((r.clone(), score_variant(&r.variant)?));
    }
    recommend_scored(&entries)
}
