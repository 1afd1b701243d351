//! Scenario files: JSON documents with `schema_version` 1.
//!
//! ```text
//! {
//!   "schema_version": 1,
//!   "name": "...",
//!   "components": [ { "name": ..., "type": "laser", ... }, ... ],
//!   "topology": { "n_dtrm": 16, "forward": {...}, "return": {...}, "edfa_autogain": true },
//!   "variants": { "selection": "dm-vbg-hip" | "all", "definitions": { "dm-vbg-hip": {...} } },
//!   "analysis": { "bandwidth_hz": 1e7, ... },
//!   "digital": { "link": {...}, "adc": {...} },
//!   "requirements": { ... overrides ... }
//! }
//! ```
//!
//! Loading checks everything it can and reports every problem found, not
//! just the first.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use photonlink_core::components::{
    Component, ComponentLibrary, ComponentSpec, LibraryError, SignalKind,
};
use photonlink_core::digitalpath::{AdcStreamSpec, DigitalLinkSpec};
use photonlink_core::linkbudget::AnalysisConfig;
use photonlink_core::topology::{
    build_forward_network, build_return_network, ForwardPlan, ReturnPlan, CHANNELS_PER_GROUP,
};
use photonlink_core::tradeoff::{DesignVariant, RequirementSet};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario {path}: {message}")]
    Io { path: String, message: String },
    #[error("scenario is not valid JSON for schema {SCHEMA_VERSION}: {0}")]
    Parse(String),
    #[error("scenario has {} problem(s):\n{}", .0.len(), Problems(.0))]
    Invalid(Vec<String>),
}

struct Problems<'a>(&'a [String]);

impl fmt::Display for Problems<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "  - {p}")?;
        }
        Ok(())
    }
}

impl ScenarioError {
    pub fn problems(&self) -> Vec<String> {
        match self {
            ScenarioError::Invalid(p) => p.clone(),
            other => vec![other.to_string()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySection {
    pub n_dtrm: u32,
    pub forward: ForwardPlan,
    #[serde(default, rename = "return")]
    pub return_chain: Option<ReturnPlan>,
    /// Set every EDFA to cover the worst path through it before analysis.
    #[serde(default = "yes")]
    pub edfa_autogain: bool,
}

fn yes() -> bool {
    true
}

/// Parts a design variant puts on the analog forward channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariantParts {
    pub laser: String,
    pub modulator: String,
    pub mux: String,
    pub demux: String,
    #[serde(default)]
    pub detector: Option<String>,
    pub iip3_dbm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    All,
    One(DesignVariant),
}

impl fmt::Display for Selection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Selection::All => f.write_str("all"),
            Selection::One(v) => write!(f, "{v}"),
        }
    }
}

impl std::str::FromStr for Selection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim().eq_ignore_ascii_case("all") {
            return Ok(Selection::All);
        }
        s.parse::<DesignVariant>()
            .map(Selection::One)
            .map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariantSection {
    #[serde(default = "all")]
    pub selection: String,
    #[serde(default)]
    pub definitions: BTreeMap<String, VariantParts>,
}

fn all() -> String {
    "all".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DigitalSection {
    pub link: DigitalLinkSpec,
    pub adc: AdcStreamSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    pub name: String,
    #[serde(default)]
    pub description: Option<String>,
    #[serde(default)]
    pub components: Vec<Component>,
    pub topology: TopologySection,
    pub variants: VariantSection,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub digital: Option<DigitalSection>,
    #[serde(default)]
    pub requirements: RequirementSet,
}

/// A loaded scenario whose references all resolve.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub library: ComponentLibrary,
    pub selection: Selection,
    /// Variant definitions keyed by the parsed variant.
    pub variants: BTreeMap<usize, (DesignVariant, VariantParts)>,
    /// SHA-256 of the scenario bytes, hex.
    pub fingerprint: String,
}

impl Scenario {
    pub fn name(&self) -> &str {
        &self.file.name
    }

    pub fn n_dtrm(&self) -> u32 {
        self.file.topology.n_dtrm
    }

    pub fn parts(&self, v: &DesignVariant) -> Option<&VariantParts> {
        self.variants.get(&v.index()).map(|(_, p)| p)
    }

    /// Forward plan with the variant's parts on every analog channel. When the
    /// plant is shared the variant's mux and demux carry all channels.
    pub fn forward_plan_for(&self, v: &DesignVariant) -> Option<ForwardPlan> {
        let parts = self.parts(v)?;
        Some(apply_parts(&self.file.topology.forward, parts))
    }
}

fn apply_parts(base: &ForwardPlan, parts: &VariantParts) -> ForwardPlan {
    let mut plan = base.clone();
    for ch in plan
        .channels
        .iter_mut()
        .filter(|c| c.kind == SignalKind::Analog)
    {
        ch.laser = parts.laser.clone();
        ch.modulator = parts.modulator.clone();
        if let Some(d) = &parts.detector {
            ch.detector = d.clone();
        }
    }
    plan.mux = parts.mux.clone();
    plan.demux = parts.demux.clone();
    plan
}

pub fn fingerprint(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| ScenarioError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_scenario(&bytes)
}

pub fn parse_scenario(bytes: &[u8]) -> Result<Scenario, ScenarioError> {
    let text = std::str::from_utf8(bytes).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    let file: ScenarioFile =
        serde_json::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    let mut problems = Vec::new();

    if file.schema_version != SCHEMA_VERSION {
        problems.push(format!(
            "schema_version {} is not supported (expected {SCHEMA_VERSION})",
            file.schema_version
        ));
    }

    let library = match ComponentLibrary::from_components(file.components.clone()) {
        Ok(lib) => Some(lib),
        Err(LibraryError::Invalid(report)) => {
            problems.extend(report.violations.iter().map(|v| format!("components: {v}")));
            None
        }
        Err(e) => {
            problems.push(format!("components: {e}"));
            None
        }
    };

    let selection = match file.variants.selection.parse::<Selection>() {
        Ok(s) => Some(s),
        Err(e) => {
            problems.push(format!("variants.selection: {e}"));
            None
        }
    };

    let mut variants = BTreeMap::new();
    for (key, parts) in &file.variants.definitions {
        match key.parse::<DesignVariant>() {
            Ok(v) if !v.is_feasible() => problems.push(format!(
                "variants.definitions.{key}: variant {v} is infeasible"
            )),
            Ok(v) => {
                if variants.insert(v.index(), (v, parts.clone())).is_some() {
                    problems.push(format!("variants.definitions.{key}: defined twice"));
                }
                if !parts.iip3_dbm.is_finite() {
                    problems.push(format!("variants.definitions.{key}.iip3_dbm is not finite"));
                }
            }
            Err(e) => problems.push(format!("variants.definitions.{key}: {e}")),
        }
    }
    if let Some(Selection::One(v)) = selection {
        if !v.is_feasible() {
            problems.push(format!("variants.selection: variant {v} is infeasible"));
        } else if !variants.contains_key(&v.index()) {
            problems.push(format!("variants.selection: {v} has no definition"));
        }
    }

    if let Err(e) = file.analysis.check() {
        problems.push(format!("analysis: {e}"));
    }
    if let Some(d) = &file.digital {
        if let Err(e) = d.link.validate() {
            problems.push(format!("digital.link: {e}"));
        }
        if let Err(e) = d.adc.validate() {
            problems.push(format!("digital.adc: {e}"));
        }
        if d.adc.channels_per_group != CHANNELS_PER_GROUP {
            problems.push(format!(
                "digital.adc.channels_per_group must be {CHANNELS_PER_GROUP} (got {})",
                d.adc.channels_per_group
            ));
        }
    }
    if let Err(e) = file.requirements.validate() {
        problems.push(format!("requirements: {e}"));
    }

    let topo = &file.topology;
    if topo.n_dtrm == 0 {
        problems.push("topology.n_dtrm: at least one DTRM is required".into());
    }
    if topo.return_chain.is_some() && !topo.n_dtrm.is_multiple_of(CHANNELS_PER_GROUP) {
        problems.push(format!(
            "topology.n_dtrm: N must be divisible by 4 (got {})",
            topo.n_dtrm
        ));
    }

    if let Some(lib) = &library {
        let mut refs = Refs {
            lib,
            problems: &mut problems,
        };
        refs.forward("topology.forward", &topo.forward);
        if let Some(r) = &topo.return_chain {
            refs.return_plan("topology.return", r);
        }
        for (key, parts) in &file.variants.definitions {
            let at = format!("variants.definitions.{key}");
            refs.check(&format!("{at}.laser"), &parts.laser, "laser");
            refs.check(&format!("{at}.modulator"), &parts.modulator, "modulator");
            refs.check(&format!("{at}.mux"), &parts.mux, "mux_demux");
            refs.check(&format!("{at}.demux"), &parts.demux, "mux_demux");
            if let Some(d) = &parts.detector {
                refs.check(&format!("{at}.detector"), d, "photodetector");
            }
        }
        for (v, parts) in variants.values() {
            let at = format!("variants.definitions.{v}");
            if let Some(ComponentSpec::Modulator(m)) = lib.get(&parts.modulator).map(|c| &c.spec) {
                if m.scheme != v.modulation.scheme() {
                    problems.push(format!(
                        "{at}.modulator: `{}` is {} but the variant needs {}",
                        parts.modulator,
                        m.scheme,
                        v.modulation.scheme()
                    ));
                }
            }
            for (field, name) in [("mux", &parts.mux), ("demux", &parts.demux)] {
                if let Some(ComponentSpec::MuxDemux(m)) = lib.get(name).map(|c| &c.spec) {
                    if m.technology != v.grating {
                        problems.push(format!(
                            "{at}.{field}: `{name}` is {} but the variant needs {}",
                            m.technology, v.grating
                        ));
                    }
                }
            }
        }
    }

    // Build errors are only meaningful once every reference resolves.
    if problems.is_empty() {
        let lib = library.as_ref().expect("library present without problems");
        if let Err(e) = build_forward_network(topo.n_dtrm, &topo.forward, lib) {
            problems.push(format!("topology.forward: {e}"));
        }
        for (v, parts) in variants.values() {
            let plan = apply_parts(&topo.forward, parts);
            if let Err(e) = build_forward_network(topo.n_dtrm, &plan, lib) {
                problems.push(format!("variants.definitions.{v}: {e}"));
            }
        }
        if let Some(r) = &topo.return_chain {
            if let Err(e) = build_return_network(topo.n_dtrm, r, lib) {
                problems.push(format!("topology.return: {e}"));
            }
        }
    }

    if !problems.is_empty() {
        return Err(ScenarioError::Invalid(problems));
    }
    Ok(Scenario {
        file,
        library: library.expect("library present without problems"),
        selection: selection.expect("selection present without problems"),
        variants,
        fingerprint: fingerprint(bytes),
    })
}

struct Refs<'a> {
    lib: &'a ComponentLibrary,
    problems: &'a mut Vec<String>,
}

impl Refs<'_> {
    fn check(&mut self, at: &str, name: &str, kind: &str) {
        match self.lib.get(name) {
            None => self
                .problems
                .push(format!("{at}: unknown component `{name}`")),
            Some(c) if c.spec.kind_name() != kind => self.problems.push(format!(
                "{at}: component `{name}` is a {}, expected a {kind}",
                c.spec.kind_name()
            )),
            Some(_) => {}
        }
    }

    fn forward(&mut self, at: &str, p: &ForwardPlan) {
        for (i, ch) in p.channels.iter().enumerate() {
            let c = format!("{at}.channels[{i}]");
            self.check(&format!("{c}.laser"), &ch.laser, "laser");
            self.check(&format!("{c}.modulator"), &ch.modulator, "modulator");
            self.check(&format!("{c}.detector"), &ch.detector, "photodetector");
        }
        self.check(&format!("{at}.mux"), &p.mux, "mux_demux");
        self.check(&format!("{at}.demux"), &p.demux, "mux_demux");
        if let Some(e) = &p.otxc_edfa {
            self.check(&format!("{at}.otxc_edfa"), e, "edfa");
        }
        self.check(&format!("{at}.fojb_edfa"), &p.fojb_edfa, "edfa");
        self.check(&format!("{at}.splitter"), &p.splitter, "splitter");
        self.check(&format!("{at}.trunk.fiber"), &p.trunk.fiber, "fiber");
        self.check(&format!("{at}.drops.fiber"), &p.drops.fiber, "fiber");
    }

    fn return_plan(&mut self, at: &str, p: &ReturnPlan) {
        for (i, ch) in p.channels.iter().enumerate() {
            let c = format!("{at}.channels[{i}]");
            self.check(&format!("{c}.laser"), &ch.laser, "laser");
            self.check(&format!("{c}.modulator"), &ch.modulator, "modulator");
            self.check(&format!("{c}.detector"), &ch.detector, "photodetector");
        }
        self.check(&format!("{at}.mux"), &p.mux, "mux_demux");
        self.check(&format!("{at}.demux"), &p.demux, "mux_demux");
        self.check(&format!("{at}.fiber.fiber"), &p.fiber.fiber, "fiber");
    }
}
