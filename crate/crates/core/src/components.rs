//! Parameter models for the photonic elements of the distribution network.
//!
//! Every element that appears on a transmitter chip, in the fiber optic
//! junction box or on a receiver chip is described by one variant of
//! [`ComponentSpec`]. Specs are plain values; [`validate_component`] checks
//! them and reports every violated bound instead of failing on the first.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default group index of standard single-mode fiber near 1550 nm.
pub const DEFAULT_GROUP_INDEX: f64 = 1.468;

/// Upper bound for photodiode responsivity, A/W.
pub const MAX_RESPONSIVITY: f64 = 1.1;

/// Closed wavelength interval, nm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavelengthWindow {
    pub min_nm: f64,
    pub max_nm: f64,
}

impl WavelengthWindow {
    /// Light source window usable for the WDM plan.
    pub const WDM: WavelengthWindow = WavelengthWindow {
        min_nm: 1300.0,
        max_nm: 1650.0,
    };

    pub fn contains(&self, nm: f64) -> bool {
        nm >= self.min_nm && nm <= self.max_nm
    }
}

impl Default for WavelengthWindow {
    fn default() -> Self {
        Self::WDM
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaserSpec {
    /// Optical output power, W.
    pub output_power_w: f64,
    /// Relative intensity noise, dB/Hz.
    pub rin_db_hz: f64,
    pub wavelength_nm: f64,
    /// Modulation slope efficiency, W/A. Only used under direct modulation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope_efficiency_w_per_a: Option<f64>,
    #[serde(default)]
    pub linewidth_tunable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModulationScheme {
    Direct,
    External,
}

impl fmt::Display for ModulationScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModulationScheme::Direct => f.write_str("direct"),
            ModulationScheme::External => f.write_str("external"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BiasPoint {
    Quadrature,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulatorSpec {
    pub scheme: ModulationScheme,
    /// Half-wave voltage, V. External modulators only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_pi: Option<f64>,
    /// Optical insertion loss, dB. External modulators only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub insertion_loss_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bias: Option<BiasPoint>,
    pub bandwidth_hz: f64,
}

impl ModulatorSpec {
    /// Optical insertion loss that applies on the through path, dB.
    pub fn through_loss_db(&self) -> f64 {
        match self.scheme {
            ModulationScheme::Direct => 0.0,
            ModulationScheme::External => self.insertion_loss_db.unwrap_or(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GratingTechnology {
    Vbg,
    Awg,
}

impl fmt::Display for GratingTechnology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GratingTechnology::Vbg => f.write_str("VBG"),
            GratingTechnology::Awg => f.write_str("AWG"),
        }
    }
}

/// Wavelength multiplexer or demultiplexer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuxDemuxSpec {
    pub technology: GratingTechnology,
    pub insertion_loss_db: f64,
    pub channel_spacing_nm: f64,
    pub adjacent_isolation_db: f64,
    pub nonadjacent_isolation_db: f64,
    #[serde(default)]
    pub athermal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdfaSpec {
    pub gain_db: f64,
    pub max_gain_db: f64,
    pub noise_figure_db: f64,
    pub saturation_output_power_dbm: f64,
}

impl EdfaSpec {
    pub fn applied_gain_db(&self) -> f64 {
        self.gain_db.min(self.max_gain_db)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitterSpec {
    pub fanout: u32,
    pub excess_loss_db: f64,
}

impl SplitterSpec {
    /// Power split loss plus excess loss, dB.
    pub fn split_loss_db(&self) -> f64 {
        10.0 * f64::from(self.fanout.max(1)).log10() + self.excess_loss_db
    }
}

fn default_group_index() -> f64 {
    DEFAULT_GROUP_INDEX
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberSpec {
    #[serde(default)]
    pub length_m: f64,
    pub attenuation_db_per_km: f64,
    #[serde(default = "default_group_index")]
    pub group_index: f64,
}

impl FiberSpec {
    pub fn loss_db(&self) -> f64 {
        self.attenuation_db_per_km * self.length_m / 1000.0
    }

    /// Group delay through the span, s.
    pub fn delay_s(&self) -> f64 {
        self.group_index * self.length_m / crate::units::SPEED_OF_LIGHT
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalKind {
    Analog,
    Digital,
}

impl fmt::Display for SignalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SignalKind::Analog => f.write_str("analog"),
            SignalKind::Digital => f.write_str("digital"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotodetectorSpec {
    pub responsivity_a_per_w: f64,
    pub saturation_power_dbm: f64,
    #[serde(default)]
    pub dark_current_a: f64,
    pub bandwidth_hz: f64,
    pub kind: SignalKind,
    /// Minimum optical input power, dBm. Optional.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensitivity_dbm: Option<f64>,
}

/// One photonic element parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ComponentSpec {
    Laser(LaserSpec),
    Modulator(ModulatorSpec),
    MuxDemux(MuxDemuxSpec),
    Edfa(EdfaSpec),
    Splitter(SplitterSpec),
    Fiber(FiberSpec),
    Photodetector(PhotodetectorSpec),
}

impl ComponentSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ComponentSpec::Laser(_) => "laser",
            ComponentSpec::Modulator(_) => "modulator",
            ComponentSpec::MuxDemux(_) => "mux_demux",
            ComponentSpec::Edfa(_) => "edfa",
            ComponentSpec::Splitter(_) => "splitter",
            ComponentSpec::Fiber(_) => "fiber",
            ComponentSpec::Photodetector(_) => "photodetector",
        }
    }

    /// Electrical bandwidth limit of the element, if it has one.
    pub fn bandwidth_hz(&self) -> Option<f64> {
        match self {
            ComponentSpec::Modulator(m) => Some(m.bandwidth_hz),
            ComponentSpec::Photodetector(p) => Some(p.bandwidth_hz),
            _ => None,
        }
    }
}

/// A single violated bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// Dotted location of the offending value, e.g. `laser.wavelength_nm`.
    pub field: String,
    pub message: String,
}

impl Violation {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Collected violations; empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn push(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation::new(field, message));
    }

    pub fn extend(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
    }

    /// Prefix every field path, used when nesting reports.
    pub fn scoped(mut self, prefix: &str) -> Self {
        for v in &mut self.violations {
            v.field = format!("{prefix}.{}", v.field);
        }
        self
    }

    pub fn mentions(&self, needle: &str) -> bool {
        self.violations
            .iter()
            .any(|v| v.message.contains(needle) || v.field.contains(needle))
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

struct Checker<'a> {
    scope: &'a str,
    report: ValidationReport,
}

impl<'a> Checker<'a> {
    fn new(scope: &'a str) -> Self {
        Self {
            scope,
            report: ValidationReport::default(),
        }
    }

    fn field(&self, name: &str) -> String {
        format!("{}.{name}", self.scope)
    }

    /// Rejects NaN and infinities. Returns false if the value is unusable.
    fn finite(&mut self, name: &str, value: f64) -> bool {
        if value.is_finite() {
            true
        } else {
            self.report
                .push(self.field(name), format!("must be finite (got {value})"));
            false
        }
    }

    fn positive(&mut self, name: &str, value: f64) {
        if self.finite(name, value) && value <= 0.0 {
            self.report.push(
                self.field(name),
                format!("{name} must be > 0 (got {value})"),
            );
        }
    }

    fn non_negative(&mut self, name: &str, value: f64) {
        if self.finite(name, value) && value < 0.0 {
            self.report.push(
                self.field(name),
                format!("{name} must be >= 0 (got {value})"),
            );
        }
    }
}

/// Checks every standalone invariant of a spec. Never panics.
pub fn validate_component(spec: &ComponentSpec) -> ValidationReport {
    let mut c = Checker::new(spec.kind_name());
    match spec {
        ComponentSpec::Laser(l) => {
            c.positive("output_power_w", l.output_power_w);
            if c.finite("rin_db_hz", l.rin_db_hz) && l.rin_db_hz >= 0.0 {
                c.report.push(
                    c.field("rin_db_hz"),
                    format!("rin must be < 0 dB/Hz (got {})", l.rin_db_hz),
                );
            }
            c.positive("wavelength_nm", l.wavelength_nm);
            if let Some(s) = l.slope_efficiency_w_per_a {
                c.positive("slope_efficiency_w_per_a", s);
            }
        }
        ComponentSpec::Modulator(m) => {
            c.positive("bandwidth_hz", m.bandwidth_hz);
            match m.scheme {
                ModulationScheme::Direct => {
                    if m.v_pi.is_some() {
                        c.report
                            .push(c.field("v_pi"), "direct modulation carries no v_pi");
                    }
                    if m.insertion_loss_db.is_some() {
                        c.report.push(
                            c.field("insertion_loss_db"),
                            "direct modulation carries no insertion loss",
                        );
                    }
                    if m.bias.is_some() {
                        c.report
                            .push(c.field("bias"), "direct modulation carries no bias point");
                    }
                }
                ModulationScheme::External => {
                    match m.v_pi {
                        Some(v) => c.positive("v_pi", v),
                        None => c
                            .report
                            .push(c.field("v_pi"), "external modulation requires v_pi > 0"),
                    }
                    if let Some(il) = m.insertion_loss_db {
                        c.non_negative("insertion_loss_db", il);
                    }
                }
            }
        }
        ComponentSpec::MuxDemux(x) => {
            c.non_negative("insertion_loss_db", x.insertion_loss_db);
            c.positive("channel_spacing_nm", x.channel_spacing_nm);
            c.positive("adjacent_isolation_db", x.adjacent_isolation_db);
            let ok = c.finite("nonadjacent_isolation_db", x.nonadjacent_isolation_db);
            if ok
                && x.adjacent_isolation_db.is_finite()
                && x.nonadjacent_isolation_db < x.adjacent_isolation_db
            {
                c.report.push(
                    c.field("nonadjacent_isolation_db"),
                    format!(
                        "nonadjacent isolation {} dB below adjacent isolation {} dB",
                        x.nonadjacent_isolation_db, x.adjacent_isolation_db
                    ),
                );
            }
        }
        ComponentSpec::Edfa(e) => {
            c.finite("max_gain_db", e.max_gain_db);
            c.positive("noise_figure_db", e.noise_figure_db);
            c.finite("saturation_output_power_dbm", e.saturation_output_power_dbm);
            if c.finite("gain_db", e.gain_db) {
                if e.gain_db < 0.0 {
                    c.report.push(
                        c.field("gain_db"),
                        format!("gain must be >= 0 (got {})", e.gain_db),
                    );
                } else if e.max_gain_db.is_finite() && e.gain_db > e.max_gain_db {
                    c.report.push(
                        c.field("gain_db"),
                        format!(
                            "gain {} dB exceeds max_gain {} dB",
                            e.gain_db, e.max_gain_db
                        ),
                    );
                }
            }
        }
        ComponentSpec::Splitter(s) => {
            if s.fanout < 1 {
                c.report.push(
                    c.field("fanout"),
                    format!("fanout ≥ 1 required (got {})", s.fanout),
                );
            }
            c.non_negative("excess_loss_db", s.excess_loss_db);
        }
        ComponentSpec::Fiber(f) => {
            c.non_negative("length_m", f.length_m);
            c.non_negative("attenuation_db_per_km", f.attenuation_db_per_km);
            c.positive("group_index", f.group_index);
        }
        ComponentSpec::Photodetector(p) => {
            if c.finite("responsivity_a_per_w", p.responsivity_a_per_w)
                && (p.responsivity_a_per_w <= 0.0 || p.responsivity_a_per_w > MAX_RESPONSIVITY)
            {
                c.report.push(
                    c.field("responsivity_a_per_w"),
                    format!(
                        "responsivity must lie in (0, {MAX_RESPONSIVITY}] A/W (got {})",
                        p.responsivity_a_per_w
                    ),
                );
            }
            c.finite("saturation_power_dbm", p.saturation_power_dbm);
            c.non_negative("dark_current_a", p.dark_current_a);
            c.positive("bandwidth_hz", p.bandwidth_hz);
            if let Some(s) = p.sensitivity_dbm {
                c.finite("sensitivity_dbm", s);
            }
        }
    }
    c.report
}

/// Standalone checks plus the WDM wavelength window for lasers.
pub fn validate_component_for_wdm(
    spec: &ComponentSpec,
    window: &WavelengthWindow,
) -> ValidationReport {
    let mut report = validate_component(spec);
    if let ComponentSpec::Laser(l) = spec {
        check_wavelength(&mut report, "laser.wavelength_nm", l.wavelength_nm, window);
    }
    report
}

pub(crate) fn check_wavelength(
    report: &mut ValidationReport,
    field: &str,
    nm: f64,
    window: &WavelengthWindow,
) {
    if !nm.is_finite() {
        return;
    }
    if nm < window.min_nm {
        report.push(
            field,
            format!("wavelength below {} nm (got {nm})", window.min_nm),
        );
    } else if nm > window.max_nm {
        report.push(
            field,
            format!("wavelength above {} nm (got {nm})", window.max_nm),
        );
    }
}

/// Named component as stored in a library, with its timing jitter budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub name: String,
    /// RMS timing jitter contributed by this element, s.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub jitter_rms_s: f64,
    #[serde(flatten)]
    pub spec: ComponentSpec,
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

impl Component {
    pub fn new(name: impl Into<String>, spec: ComponentSpec) -> Self {
        Self {
            name: name.into(),
            jitter_rms_s: 0.0,
            spec,
        }
    }

    pub fn with_jitter(mut self, jitter_rms_s: f64) -> Self {
        self.jitter_rms_s = jitter_rms_s;
        self
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = validate_component(&self.spec);
        if !self.jitter_rms_s.is_finite() || self.jitter_rms_s < 0.0 {
            report.push(
                "jitter_rms_s",
                format!("jitter must be finite and >= 0 (got {})", self.jitter_rms_s),
            );
        }
        report.scoped(&self.name)
    }
}

#[derive(Debug, Error)]
pub enum LibraryError {
    #[error("cannot read component library {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed component library: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("duplicate component name `{0}`")]
    Duplicate(String),
    #[error("invalid components: {0}")]
    Invalid(ValidationReport),
}

/// Name to component map with deterministic iteration order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComponentLibrary {
    components: BTreeMap<String, Component>,
}

#[derive(Deserialize)]
struct LibraryFile {
    #[serde(default)]
    components: Vec<Component>,
}

#[derive(Serialize)]
struct LibraryFileRef<'a> {
    components: Vec<&'a Component>,
}

impl ComponentLibrary {
    /// Builds a library, rejecting duplicates and aggregating every invalid entry.
    pub fn from_components(
        components: impl IntoIterator<Item = Component>,
    ) -> Result<Self, LibraryError> {
        let mut map = BTreeMap::new();
        let mut report = ValidationReport::default();
        for c in components {
            report.extend(c.validate());
            if map.contains_key(&c.name) {
                return Err(LibraryError::Duplicate(c.name));
            }
            map.insert(c.name.clone(), c);
        }
        if !report.is_valid() {
            return Err(LibraryError::Invalid(report));
        }
        Ok(Self { components: map })
    }

    pub fn from_json_str(text: &str) -> Result<Self, LibraryError> {
        if text.trim().is_empty() {
            return Ok(Self::default());
        }
        let file: LibraryFile = serde_json::from_str(text)?;
        Self::from_components(file.components)
    }

    pub fn to_json_string(&self) -> String {
        let file = LibraryFileRef {
            components: self.components.values().collect(),
        };
        serde_json::to_string_pretty(&file).expect("library serializes")
    }

    pub fn get(&self, name: &str) -> Option<&Component> {
        self.components.get(name)
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Component> {
        self.components.values()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.components.keys().map(String::as_str)
    }
}

/// Reads a component library file. Empty files yield an empty library.
pub fn load_component_library(path: impl AsRef<Path>) -> Result<ComponentLibrary, LibraryError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| LibraryError::Io {
        path: path.display().to_string(),
        source,
    })?;
    ComponentLibrary::from_json_str(&text)
}

/// The shipped reference library. Values are engineering defaults, not measured data.
pub fn reference_library() -> ComponentLibrary {
    ComponentLibrary::from_json_str(REFERENCE_LIBRARY_JSON).expect("reference library is valid")
}

pub const REFERENCE_LIBRARY_JSON: &str = include_str!("../data/reference_library.json");
