//! Network graph for the forward (exciter to DTRM) and return (DTRM to DBFU)
//! optical chains.
//!
//! The forward chain is one transmitter chip feeding a single fiber into the
//! junction box, where an EDFA amplifies the multiplex before a 1:N splitter
//! fans it out to N receiver chips. The return chain is N/4 independent
//! groups, each multiplexing four digitized channels onto one fiber towards
//! the beam former.
//!
//! Nodes carry snapshots of their component specs so a topology is a
//! self-contained value: validation and path enumeration never go back to the
//! library.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::components::{
    check_wavelength, validate_component, ComponentLibrary, ComponentSpec, FiberSpec, SignalKind,
    ValidationReport, WavelengthWindow,
};

/// Digitized channels per return group.
pub const CHANNELS_PER_GROUP: u32 = 4;

/// Default minimum WDM channel spacing, nm (100 GHz grid near 1550 nm).
pub const DEFAULT_MIN_SPACING_NM: f64 = 0.8;

const SPACING_EPS_NM: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Exciter,
    Otxc,
    Fojb,
    Orxc,
    Dtrm,
    DigitalOtxc,
    Dbfu,
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            NodeKind::Exciter => "Exciter",
            NodeKind::Otxc => "OTxC",
            NodeKind::Fojb => "FOJB",
            NodeKind::Orxc => "ORxC",
            NodeKind::Dtrm => "DTRM",
            NodeKind::DigitalOtxc => "DigitalOTxC",
            NodeKind::Dbfu => "DBFU",
        };
        f.write_str(s)
    }
}

/// Role of an element inside a node. Declaration order is traversal order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Laser,
    Modulator,
    Mux,
    Edfa,
    Splitter,
    Demux,
    Detector,
}

impl Role {
    fn is_per_channel(self) -> bool {
        matches!(self, Role::Laser | Role::Modulator | Role::Detector)
    }

    fn spec_matches(self, spec: &ComponentSpec) -> bool {
        matches!(
            (self, spec),
            (Role::Laser, ComponentSpec::Laser(_))
                | (Role::Modulator, ComponentSpec::Modulator(_))
                | (Role::Mux, ComponentSpec::MuxDemux(_))
                | (Role::Demux, ComponentSpec::MuxDemux(_))
                | (Role::Edfa, ComponentSpec::Edfa(_))
                | (Role::Splitter, ComponentSpec::Splitter(_))
                | (Role::Detector, ComponentSpec::Photodetector(_))
        )
    }

    fn element_kind(self) -> ElementKind {
        match self {
            Role::Laser => ElementKind::Laser,
            Role::Modulator => ElementKind::Modulator,
            Role::Mux => ElementKind::Mux,
            Role::Edfa => ElementKind::Edfa,
            Role::Splitter => ElementKind::Splitter,
            Role::Demux => ElementKind::Demux,
            Role::Detector => ElementKind::Detector,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Role::Laser => "laser",
            Role::Modulator => "modulator",
            Role::Mux => "mux",
            Role::Edfa => "edfa",
            Role::Splitter => "splitter",
            Role::Demux => "demux",
            Role::Detector => "detector",
        };
        f.write_str(s)
    }
}

/// A component placed in a node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attachment {
    pub role: Role,
    /// Fiber plane the element sits on (`shared`, `analog`, `digital`, `g00`, ...).
    pub plane: String,
    /// Owning channel for lasers, modulators and detectors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<String>,
    pub component: String,
    #[serde(default)]
    pub jitter_rms_s: f64,
    pub spec: ComponentSpec,
}

impl Attachment {
    fn element_id(&self, node: &str) -> String {
        match &self.channel {
            Some(ch) => format!("{node}/{}:{ch}", self.role),
            None => format!("{node}/{}[{}]", self.role, self.plane),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    pub attachments: Vec<Attachment>,
}

impl Node {
    fn new(id: impl Into<String>, kind: NodeKind) -> Self {
        Self {
            id: id.into(),
            kind,
            attachments: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "medium", rename_all = "snake_case")]
pub enum Medium {
    Fiber {
        component: String,
        #[serde(default)]
        jitter_rms_s: f64,
        spec: FiberSpec,
    },
    Electrical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: String,
    pub to: String,
    pub plane: String,
    #[serde(flatten)]
    pub medium: Medium,
    /// Wavelength channels carried on this edge, sorted.
    pub channels: Vec<String>,
}

impl Edge {
    pub fn is_fiber(&self) -> bool {
        matches!(self.medium, Medium::Fiber { .. })
    }

    pub fn element_id(&self) -> String {
        format!("{}->{}[{}]", self.from, self.to, self.plane)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Return,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::Forward => f.write_str("forward"),
            Direction::Return => f.write_str("return"),
        }
    }
}

/// Entry of the wavelength plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlannedChannel {
    pub kind: SignalKind,
    pub wavelength_nm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpticalTopology {
    pub direction: Direction,
    pub n_dtrm: u32,
    pub channels_per_group: u32,
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    /// Channel id to wavelength and signal kind.
    pub wavelength_plan: BTreeMap<String, PlannedChannel>,
    pub window: WavelengthWindow,
    pub min_spacing_nm: f64,
}

/// One digitized return group: four DTRM channels sharing a fiber.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnGroup {
    pub index: u32,
    pub transmitter: String,
    pub channels: Vec<String>,
}

impl OpticalTopology {
    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn node_mut(&mut self, id: &str) -> Option<&mut Node> {
        self.nodes.iter_mut().find(|n| n.id == id)
    }

    pub fn nodes_of(&self, kind: NodeKind) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(move |n| n.kind == kind)
    }

    /// Channels (with wavelengths) on the fiber entering `node` on `plane`.
    pub fn channels_into(&self, node: &str, plane: &str) -> Vec<(String, f64)> {
        let mut out: Vec<(String, f64)> = self
            .edges
            .iter()
            .filter(|e| e.is_fiber() && e.to == node && e.plane == plane)
            .flat_map(|e| e.channels.iter())
            .filter_map(|ch| {
                self.wavelength_plan
                    .get(ch)
                    .map(|p| (ch.clone(), p.wavelength_nm))
            })
            .collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out.dedup_by(|a, b| a.0 == b.0);
        out
    }

    pub fn return_groups(&self) -> Vec<ReturnGroup> {
        if self.direction != Direction::Return {
            return Vec::new();
        }
        let mut groups: Vec<ReturnGroup> = self
            .nodes_of(NodeKind::DigitalOtxc)
            .map(|n| {
                let mut channels: Vec<String> = n
                    .attachments
                    .iter()
                    .filter(|a| a.role == Role::Laser)
                    .filter_map(|a| a.channel.clone())
                    .collect();
                channels.sort();
                ReturnGroup {
                    index: 0,
                    transmitter: n.id.clone(),
                    channels,
                }
            })
            .collect();
        groups.sort_by(|a, b| a.transmitter.cmp(&b.transmitter));
        for (i, g) in groups.iter_mut().enumerate() {
            g.index = i as u32;
        }
        groups
    }

    /// Every EDFA in the topology, by element id.
    pub fn edfa_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self
            .nodes
            .iter()
            .flat_map(|n| {
                n.attachments
                    .iter()
                    .filter(|a| a.role == Role::Edfa)
                    .map(move |a| a.element_id(&n.id))
            })
            .collect();
        ids.sort();
        ids
    }

    /// Sets the gain of the EDFA with the given element id. Returns false if absent.
    pub fn set_edfa_gain(&mut self, element_id: &str, gain_db: f64) -> bool {
        for node in &mut self.nodes {
            let node_id = node.id.clone();
            for a in &mut node.attachments {
                if a.role == Role::Edfa && a.element_id(&node_id) == element_id {
                    if let ComponentSpec::Edfa(e) = &mut a.spec {
                        e.gain_db = gain_db;
                        return true;
                    }
                }
            }
        }
        false
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TopologyError {
    #[error("n_dtrm must be >= 1 (got {0})")]
    NoDtrm(u32),
    #[error("N must be divisible by 4 (got {0})")]
    NotDivisibleByFour(u32),
    #[error("wavelength collision: channels `{first}` and `{second}` both at {wavelength_nm} nm")]
    WavelengthCollision {
        first: String,
        second: String,
        wavelength_nm: f64,
    },
    #[error("duplicate channel id `{0}`")]
    DuplicateChannel(String),
    #[error("no channels given")]
    NoChannels,
    #[error("return chain needs exactly 4 channel templates (got {0})")]
    ReturnChannelCount(usize),
    #[error("unknown component `{0}`")]
    UnknownComponent(String),
    #[error("component `{name}` is a {found}, expected {expected}")]
    WrongComponentType {
        name: String,
        expected: &'static str,
        found: &'static str,
    },
    #[error("expected 1 or {expected} fiber lengths, got {got}")]
    FiberLengthCount { expected: usize, got: usize },
    #[error("invalid topology: {0}")]
    Invalid(ValidationReport),
}

/// Forward or return channel as named in a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub id: String,
    pub kind: SignalKind,
    pub wavelength_nm: f64,
    pub laser: String,
    pub modulator: String,
    pub detector: String,
}

/// Fiber component plus one length per leg (or a single length for all legs).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberRun {
    pub fiber: String,
    #[serde(default)]
    pub lengths_m: Vec<f64>,
}

impl FiberRun {
    pub fn new(fiber: impl Into<String>, lengths_m: Vec<f64>) -> Self {
        Self {
            fiber: fiber.into(),
            lengths_m,
        }
    }

    fn length_for(&self, leg: usize, legs: usize, default_m: f64) -> Result<f64, TopologyError> {
        match self.lengths_m.len() {
            0 => Ok(default_m),
            1 => Ok(self.lengths_m[0]),
            n if n == legs => Ok(self.lengths_m[leg]),
            n => Err(TopologyError::FiberLengthCount {
                expected: legs,
                got: n,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForwardPlan {
    pub channels: Vec<ChannelSpec>,
    pub mux: String,
    #[serde(default)]
    pub otxc_edfa: Option<String>,
    pub fojb_edfa: String,
    pub splitter: String,
    pub demux: String,
    pub trunk: FiberRun,
    pub drops: FiberRun,
    /// Analog and digital channels share one fiber plant.
    #[serde(default = "default_true")]
    pub shared_fiber: bool,
    #[serde(default)]
    pub window: WavelengthWindow,
    #[serde(default = "default_spacing")]
    pub min_spacing_nm: f64,
}

/// Channel template replicated into every return group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnChannelTemplate {
    pub wavelength_nm: f64,
    pub laser: String,
    pub modulator: String,
    pub detector: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnPlan {
    pub channels: Vec<ReturnChannelTemplate>,
    pub mux: String,
    pub demux: String,
    /// One length per group, or one for all groups.
    pub fiber: FiberRun,
    #[serde(default)]
    pub window: WavelengthWindow,
    #[serde(default = "default_spacing")]
    pub min_spacing_nm: f64,
}

fn default_true() -> bool {
    true
}

fn default_spacing() -> f64 {
    DEFAULT_MIN_SPACING_NM
}

struct Resolver<'a> {
    library: &'a ComponentLibrary,
}

impl<'a> Resolver<'a> {
    fn get(
        &self,
        name: &str,
        expected: &'static str,
    ) -> Result<(ComponentSpec, f64), TopologyError> {
        let c = self
            .library
            .get(name)
            .ok_or_else(|| TopologyError::UnknownComponent(name.to_string()))?;
        if c.spec.kind_name() != expected {
            return Err(TopologyError::WrongComponentType {
                name: name.to_string(),
                expected,
                found: c.spec.kind_name(),
            });
        }
        Ok((c.spec.clone(), c.jitter_rms_s))
    }

    fn attach(
        &self,
        node: &mut Node,
        role: Role,
        plane: &str,
        channel: Option<&str>,
        name: &str,
    ) -> Result<(), TopologyError> {
        let expected = match role {
            Role::Laser => "laser",
            Role::Modulator => "modulator",
            Role::Mux | Role::Demux => "mux_demux",
            Role::Edfa => "edfa",
            Role::Splitter => "splitter",
            Role::Detector => "photodetector",
        };
        let (spec, jitter) = self.get(name, expected)?;
        node.attachments.push(Attachment {
            role,
            plane: plane.to_string(),
            channel: channel.map(str::to_string),
            component: name.to_string(),
            jitter_rms_s: jitter,
            spec,
        });
        Ok(())
    }

    fn fiber(&self, name: &str, length_m: f64) -> Result<Medium, TopologyError> {
        let (spec, jitter) = self.get(name, "fiber")?;
        let ComponentSpec::Fiber(mut f) = spec else {
            unreachable!("kind checked above")
        };
        f.length_m = length_m;
        Ok(Medium::Fiber {
            component: name.to_string(),
            jitter_rms_s: jitter,
            spec: f,
        })
    }
}

fn check_unique_wavelengths<'a>(
    channels: impl Iterator<Item = (&'a str, f64)>,
) -> Result<(), TopologyError> {
    let mut seen: Vec<(&str, f64)> = Vec::new();
    for (id, nm) in channels {
        if let Some((first, _)) = seen.iter().find(|(_, w)| *w == nm) {
            return Err(TopologyError::WavelengthCollision {
                first: first.to_string(),
                second: id.to_string(),
                wavelength_nm: nm,
            });
        }
        seen.push((id, nm));
    }
    Ok(())
}

fn index_width(n: u32) -> usize {
    n.saturating_sub(1).max(1).to_string().len().max(2)
}

/// Builds the exciter to DTRM broadcast network for `n_dtrm` receivers.
pub fn build_forward_network(
    n_dtrm: u32,
    plan: &ForwardPlan,
    library: &ComponentLibrary,
) -> Result<OpticalTopology, TopologyError> {
    if n_dtrm < 1 {
        return Err(TopologyError::NoDtrm(n_dtrm));
    }
    if plan.channels.is_empty() {
        return Err(TopologyError::NoChannels);
    }
    let mut ids = BTreeSet::new();
    for ch in &plan.channels {
        if !ids.insert(ch.id.as_str()) {
            return Err(TopologyError::DuplicateChannel(ch.id.clone()));
        }
    }
    check_unique_wavelengths(
        plan.channels
            .iter()
            .map(|c| (c.id.as_str(), c.wavelength_nm)),
    )?;

    let r = Resolver { library };
    let plane_of = |kind: SignalKind| -> &'static str {
        match (plan.shared_fiber, kind) {
            (true, _) => "shared",
            (false, SignalKind::Analog) => "analog",
            (false, SignalKind::Digital) => "digital",
        }
    };
    let mut planes: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for ch in &plan.channels {
        planes
            .entry(plane_of(ch.kind))
            .or_default()
            .push(ch.id.clone());
    }
    for chans in planes.values_mut() {
        chans.sort();
    }

    let width = index_width(n_dtrm);
    let mut nodes = Vec::new();
    let mut edges = Vec::new();

    nodes.push(Node::new("exciter", NodeKind::Exciter));

    let mut otxc = Node::new("otxc", NodeKind::Otxc);
    for ch in &plan.channels {
        let plane = plane_of(ch.kind);
        r.attach(&mut otxc, Role::Laser, plane, Some(&ch.id), &ch.laser)?;
        r.attach(
            &mut otxc,
            Role::Modulator,
            plane,
            Some(&ch.id),
            &ch.modulator,
        )?;
    }
    for plane in planes.keys() {
        r.attach(&mut otxc, Role::Mux, plane, None, &plan.mux)?;
        if let Some(edfa) = &plan.otxc_edfa {
            r.attach(&mut otxc, Role::Edfa, plane, None, edfa)?;
        }
    }
    nodes.push(otxc);

    let mut fojb = Node::new("fojb", NodeKind::Fojb);
    for plane in planes.keys() {
        r.attach(&mut fojb, Role::Edfa, plane, None, &plan.fojb_edfa)?;
        r.attach(&mut fojb, Role::Splitter, plane, None, &plan.splitter)?;
    }
    for a in &mut fojb.attachments {
        if let ComponentSpec::Splitter(s) = &mut a.spec {
            s.fanout = n_dtrm;
        }
    }
    nodes.push(fojb);

    for (plane, chans) in &planes {
        edges.push(Edge {
            from: "exciter".into(),
            to: "otxc".into(),
            plane: plane.to_string(),
            medium: Medium::Electrical,
            channels: chans.clone(),
        });
        edges.push(Edge {
            from: "otxc".into(),
            to: "fojb".into(),
            plane: plane.to_string(),
            medium: r.fiber(&plan.trunk.fiber, plan.trunk.length_for(0, 1, 0.0)?)?,
            channels: chans.clone(),
        });
    }

    for i in 0..n_dtrm {
        let orxc_id = format!("orxc-{i:0width$}");
        let dtrm_id = format!("dtrm-{i:0width$}");
        let mut orxc = Node::new(&orxc_id, NodeKind::Orxc);
        for plane in planes.keys() {
            r.attach(&mut orxc, Role::Demux, plane, None, &plan.demux)?;
        }
        for ch in &plan.channels {
            r.attach(
                &mut orxc,
                Role::Detector,
                plane_of(ch.kind),
                Some(&ch.id),
                &ch.detector,
            )?;
        }
        let len = plan.drops.length_for(i as usize, n_dtrm as usize, 0.0)?;
        for (plane, chans) in &planes {
            edges.push(Edge {
                from: "fojb".into(),
                to: orxc_id.clone(),
                plane: plane.to_string(),
                medium: r.fiber(&plan.drops.fiber, len)?,
                channels: chans.clone(),
            });
            edges.push(Edge {
                from: orxc_id.clone(),
                to: dtrm_id.clone(),
                plane: plane.to_string(),
                medium: Medium::Electrical,
                channels: chans.clone(),
            });
        }
        nodes.push(orxc);
        nodes.push(Node::new(dtrm_id, NodeKind::Dtrm));
    }

    let wavelength_plan = plan
        .channels
        .iter()
        .map(|c| {
            (
                c.id.clone(),
                PlannedChannel {
                    kind: c.kind,
                    wavelength_nm: c.wavelength_nm,
                },
            )
        })
        .collect();

    Ok(OpticalTopology {
        direction: Direction::Forward,
        n_dtrm,
        channels_per_group: CHANNELS_PER_GROUP,
        nodes,
        edges,
        wavelength_plan,
        window: plan.window,
        min_spacing_nm: plan.min_spacing_nm,
    })
}

/// Builds the N/4 digitized return groups feeding the beam former.
pub fn build_return_network(
    n_dtrm: u32,
    plan: &ReturnPlan,
    library: &ComponentLibrary,
) -> Result<OpticalTopology, TopologyError> {
    if n_dtrm < CHANNELS_PER_GROUP || !n_dtrm.is_multiple_of(CHANNELS_PER_GROUP) {
        return Err(TopologyError::NotDivisibleByFour(n_dtrm));
    }
    if plan.channels.len() != CHANNELS_PER_GROUP as usize {
        return Err(TopologyError::ReturnChannelCount(plan.channels.len()));
    }
    check_unique_wavelengths(
        plan.channels
            .iter()
            .enumerate()
            .map(|(k, c)| (["c0", "c1", "c2", "c3"][k], c.wavelength_nm)),
    )?;

    let r = Resolver { library };
    let groups = n_dtrm / CHANNELS_PER_GROUP;
    let dtrm_width = index_width(n_dtrm);
    let group_width = index_width(groups);

    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let mut dbfu = Node::new("dbfu", NodeKind::Dbfu);
    let mut wavelength_plan = BTreeMap::new();

    for g in 0..groups {
        let plane = format!("g{g:0group_width$}");
        let tx_id = format!("dotxc-{g:0group_width$}");
        let mut tx = Node::new(&tx_id, NodeKind::DigitalOtxc);
        let mut chans = Vec::new();
        for (k, tpl) in plan.channels.iter().enumerate() {
            let dtrm = g * CHANNELS_PER_GROUP + k as u32;
            let ch = format!("{plane}c{k}");
            r.attach(&mut tx, Role::Laser, &plane, Some(&ch), &tpl.laser)?;
            r.attach(&mut tx, Role::Modulator, &plane, Some(&ch), &tpl.modulator)?;
            r.attach(&mut dbfu, Role::Detector, &plane, Some(&ch), &tpl.detector)?;
            let dtrm_id = format!("dtrm-{dtrm:0dtrm_width$}");
            nodes.push(Node::new(&dtrm_id, NodeKind::Dtrm));
            edges.push(Edge {
                from: dtrm_id,
                to: tx_id.clone(),
                plane: plane.clone(),
                medium: Medium::Electrical,
                channels: vec![ch.clone()],
            });
            wavelength_plan.insert(
                ch.clone(),
                PlannedChannel {
                    kind: SignalKind::Digital,
                    wavelength_nm: tpl.wavelength_nm,
                },
            );
            chans.push(ch);
        }
        r.attach(&mut tx, Role::Mux, &plane, None, &plan.mux)?;
        r.attach(&mut dbfu, Role::Demux, &plane, None, &plan.demux)?;
        let len = plan.fiber.length_for(g as usize, groups as usize, 0.0)?;
        edges.push(Edge {
            from: tx_id,
            to: "dbfu".into(),
            plane,
            medium: r.fiber(&plan.fiber.fiber, len)?,
            channels: chans,
        });
        nodes.push(tx);
    }
    nodes.push(dbfu);

    Ok(OpticalTopology {
        direction: Direction::Return,
        n_dtrm,
        channels_per_group: CHANNELS_PER_GROUP,
        nodes,
        edges,
        wavelength_plan,
        window: plan.window,
        min_spacing_nm: plan.min_spacing_nm,
    })
}

fn is_acyclic(t: &OpticalTopology) -> bool {
    let index: BTreeMap<&str, usize> = t
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.id.as_str(), i))
        .collect();
    let mut indegree = vec![0usize; t.nodes.len()];
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); t.nodes.len()];
    for e in &t.edges {
        if let (Some(&a), Some(&b)) = (index.get(e.from.as_str()), index.get(e.to.as_str())) {
            out[a].push(b);
            indegree[b] += 1;
        }
    }
    let mut queue: VecDeque<usize> = (0..t.nodes.len()).filter(|&i| indegree[i] == 0).collect();
    let mut visited = 0;
    while let Some(i) = queue.pop_front() {
        visited += 1;
        for &j in &out[i] {
            indegree[j] -= 1;
            if indegree[j] == 0 {
                queue.push_back(j);
            }
        }
    }
    visited == t.nodes.len()
}

fn count_role(attachments: &[&Attachment], role: Role) -> usize {
    attachments.iter().filter(|a| a.role == role).count()
}

fn check_composition(node: &Node, report: &mut ValidationReport) {
    let field = format!("node[{}]", node.id);
    let mut by_plane: BTreeMap<&str, Vec<&Attachment>> = BTreeMap::new();
    for a in &node.attachments {
        by_plane.entry(a.plane.as_str()).or_default().push(a);
    }
    let allowed: &[Role] = match node.kind {
        NodeKind::Exciter | NodeKind::Dtrm => &[],
        NodeKind::Otxc | NodeKind::DigitalOtxc => {
            &[Role::Laser, Role::Modulator, Role::Mux, Role::Edfa]
        }
        NodeKind::Fojb => &[Role::Edfa, Role::Splitter],
        NodeKind::Orxc | NodeKind::Dbfu => &[Role::Demux, Role::Detector],
    };
    for a in &node.attachments {
        if !allowed.contains(&a.role) {
            report.push(
                field.clone(),
                format!("{} may not hold a {} ({})", node.kind, a.role, a.component),
            );
        }
        if !a.role.spec_matches(&a.spec) {
            report.push(
                field.clone(),
                format!(
                    "{} `{}` holds a {} spec",
                    a.role,
                    a.component,
                    a.spec.kind_name()
                ),
            );
        }
        if a.role.is_per_channel() != a.channel.is_some() {
            report.push(
                field.clone(),
                format!(
                    "{} `{}` has inconsistent channel ownership",
                    a.role, a.component
                ),
            );
        }
    }
    let needs_planes = !matches!(node.kind, NodeKind::Exciter | NodeKind::Dtrm);
    if needs_planes && by_plane.is_empty() {
        report.push(field.clone(), format!("{} has no components", node.kind));
    }
    for (plane, atts) in &by_plane {
        let pf = format!("{field}[{plane}]");
        match node.kind {
            NodeKind::Otxc | NodeKind::DigitalOtxc => {
                let lasers: BTreeSet<_> = atts
                    .iter()
                    .filter(|a| a.role == Role::Laser)
                    .filter_map(|a| a.channel.as_deref())
                    .collect();
                let mods: BTreeSet<_> = atts
                    .iter()
                    .filter(|a| a.role == Role::Modulator)
                    .filter_map(|a| a.channel.as_deref())
                    .collect();
                if lasers.is_empty() {
                    report.push(pf.clone(), "transmitter needs at least one laser");
                }
                if count_role(atts, Role::Laser) != lasers.len()
                    || count_role(atts, Role::Modulator) != mods.len()
                    || lasers != mods
                {
                    report.push(
                        pf.clone(),
                        "every laser needs exactly one modulator on its channel",
                    );
                }
                if count_role(atts, Role::Mux) != 1 {
                    report.push(pf.clone(), "transmitter needs exactly one mux per fiber");
                }
                if count_role(atts, Role::Edfa) > 1 {
                    report.push(pf.clone(), "transmitter holds at most one EDFA per fiber");
                }
            }
            NodeKind::Fojb => {
                if count_role(atts, Role::Splitter) != 1 || count_role(atts, Role::Edfa) != 1 {
                    report.push(
                        pf.clone(),
                        "junction box needs one splitter and one EDFA per fiber",
                    );
                }
            }
            NodeKind::Orxc | NodeKind::Dbfu => {
                if count_role(atts, Role::Demux) != 1 {
                    report.push(pf.clone(), "receiver needs exactly one demux per fiber");
                }
                if count_role(atts, Role::Detector) < 1 {
                    report.push(pf.clone(), "receiver needs at least one detector");
                }
            }
            NodeKind::Exciter | NodeKind::Dtrm => {}
        }
    }
}

fn check_node_counts(t: &OpticalTopology, report: &mut ValidationReport) {
    let n = t.n_dtrm as usize;
    let expected: [(NodeKind, usize); 7] = match t.direction {
        Direction::Forward => [
            (NodeKind::Exciter, 1),
            (NodeKind::Otxc, 1),
            (NodeKind::Fojb, 1),
            (NodeKind::Orxc, n),
            (NodeKind::Dtrm, n),
            (NodeKind::DigitalOtxc, 0),
            (NodeKind::Dbfu, 0),
        ],
        Direction::Return => {
            if t.n_dtrm == 0 || !t.n_dtrm.is_multiple_of(CHANNELS_PER_GROUP) {
                report.push(
                    "n_dtrm",
                    format!("N must be divisible by 4 (got {})", t.n_dtrm),
                );
            }
            [
                (NodeKind::DigitalOtxc, n / CHANNELS_PER_GROUP as usize),
                (NodeKind::Dbfu, 1),
                (NodeKind::Dtrm, n),
                (NodeKind::Exciter, 0),
                (NodeKind::Otxc, 0),
                (NodeKind::Fojb, 0),
                (NodeKind::Orxc, 0),
            ]
        }
    };
    for (k, want) in expected {
        let got = t.nodes_of(k).count();
        if got != want {
            report.push("nodes", format!("expected {want} {k} node(s), found {got}"));
        }
    }
    if t.channels_per_group != CHANNELS_PER_GROUP {
        report.push(
            "channels_per_group",
            format!("group size is fixed at 4 (got {})", t.channels_per_group),
        );
    }
}

/// Checks structure, composition and wavelength rules. Violations are data.
pub fn validate_topology(t: &OpticalTopology) -> ValidationReport {
    let mut report = ValidationReport::default();

    let mut ids = BTreeSet::new();
    for n in &t.nodes {
        if !ids.insert(n.id.as_str()) {
            report.push("nodes", format!("duplicate node id `{}`", n.id));
        }
    }
    for e in &t.edges {
        for end in [&e.from, &e.to] {
            if !ids.contains(end.as_str()) {
                report.push(
                    format!("edge[{}]", e.element_id()),
                    format!("references unknown node `{end}`"),
                );
            }
        }
    }
    if !is_acyclic(t) {
        report.push("edges", "graph contains a cycle");
    }
    check_node_counts(t, &mut report);

    for (ch, p) in &t.wavelength_plan {
        check_wavelength(
            &mut report,
            &format!("wavelength_plan[{ch}]"),
            p.wavelength_nm,
            &t.window,
        );
        if !p.wavelength_nm.is_finite() {
            report.push(
                format!("wavelength_plan[{ch}]"),
                "wavelength must be finite",
            );
        }
    }

    for node in &t.nodes {
        check_composition(node, &mut report);
        for a in &node.attachments {
            let f = format!("node[{}].{}", node.id, a.component);
            report.extend(validate_component(&a.spec).scoped(&f));
            if let Some(ch) = &a.channel {
                let Some(planned) = t.wavelength_plan.get(ch) else {
                    report.push(
                        f.clone(),
                        format!("channel `{ch}` is not in the wavelength plan"),
                    );
                    continue;
                };
                if let ComponentSpec::Photodetector(pd) = &a.spec {
                    if pd.kind != planned.kind {
                        report.push(
                            f.clone(),
                            format!(
                                "{} channel `{ch}` terminated on a {} detector",
                                planned.kind, pd.kind
                            ),
                        );
                    }
                }
            }
        }
    }

    for e in &t.edges {
        let f = format!("edge[{}]", e.element_id());
        if let Medium::Fiber { spec, .. } = &e.medium {
            report.extend(validate_component(&ComponentSpec::Fiber(spec.clone())).scoped(&f));
            let mut waves: Vec<(&str, f64)> = Vec::new();
            for ch in &e.channels {
                match t.wavelength_plan.get(ch) {
                    Some(p) => waves.push((ch, p.wavelength_nm)),
                    None => report.push(f.clone(), format!("unknown channel `{ch}`")),
                }
            }
            waves.sort_by(|a, b| a.1.total_cmp(&b.1));
            for pair in waves.windows(2) {
                let gap = pair[1].1 - pair[0].1;
                if gap == 0.0 {
                    report.push(
                        f.clone(),
                        format!(
                            "wavelength collision between `{}` and `{}`",
                            pair[0].0, pair[1].0
                        ),
                    );
                } else if gap + SPACING_EPS_NM < t.min_spacing_nm {
                    report.push(
                        f.clone(),
                        format!(
                            "channels `{}` and `{}` spaced {gap:.3} nm, below minimum {} nm",
                            pair[0].0, pair[1].0, t.min_spacing_nm
                        ),
                    );
                }
            }
        }
    }

    // Splitter fanout against outgoing fiber legs on the same plane.
    for node in &t.nodes {
        for a in node.attachments.iter().filter(|a| a.role == Role::Splitter) {
            if let ComponentSpec::Splitter(s) = &a.spec {
                let legs = t
                    .edges
                    .iter()
                    .filter(|e| e.is_fiber() && e.from == node.id && e.plane == a.plane)
                    .count();
                if legs != s.fanout as usize {
                    report.push(
                        format!("node[{}].{}", node.id, a.component),
                        format!(
                            "splitter fanout {} but {legs} outgoing fiber edges",
                            s.fanout
                        ),
                    );
                }
            }
        }
    }

    // Every channel delivered to a receiver must have a laser upstream and a detector there.
    for e in t.edges.iter().filter(|e| e.is_fiber()) {
        let from = t.node(&e.from);
        let to = t.node(&e.to);
        for ch in &e.channels {
            if let Some(n) =
                from.filter(|n| matches!(n.kind, NodeKind::Otxc | NodeKind::DigitalOtxc))
            {
                let has_laser = n
                    .attachments
                    .iter()
                    .any(|a| a.role == Role::Laser && a.channel.as_deref() == Some(ch));
                if !has_laser {
                    report.push(
                        format!("edge[{}]", e.element_id()),
                        format!("channel `{ch}` has no laser at `{}`", n.id),
                    );
                }
            }
            if let Some(n) = to.filter(|n| matches!(n.kind, NodeKind::Orxc | NodeKind::Dbfu)) {
                let has_detector = n.attachments.iter().any(|a| {
                    a.role == Role::Detector
                        && a.channel.as_deref() == Some(ch)
                        && a.plane == e.plane
                });
                if !has_detector {
                    report.push(
                        format!("edge[{}]", e.element_id()),
                        format!("channel `{ch}` has no detector at `{}`", n.id),
                    );
                }
            }
        }
    }

    report
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementKind {
    Laser,
    Modulator,
    Mux,
    Fiber,
    Edfa,
    Splitter,
    Demux,
    Detector,
}

/// Element on a signal path with a snapshot of its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathElement {
    pub id: String,
    pub kind: ElementKind,
    pub component: String,
    #[serde(default)]
    pub jitter_rms_s: f64,
    pub spec: ComponentSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalPath {
    pub channel: String,
    pub kind: SignalKind,
    pub direction: Direction,
    pub plane: String,
    pub wavelength_nm: f64,
    pub source: String,
    pub destination: String,
    pub elements: Vec<PathElement>,
}

impl SignalPath {
    /// Checks laser, modulator, mux, then fibers/EDFAs with at most one splitter,
    /// then demux and detector.
    pub fn check_order(&self) -> Result<(), String> {
        use ElementKind::*;
        let kinds: Vec<ElementKind> = self.elements.iter().map(|e| e.kind).collect();
        let n = kinds.len();
        if n < 5 {
            return Err(format!("path too short ({n} elements)"));
        }
        let head = [Laser, Modulator, Mux];
        if kinds[..3] != head {
            return Err(format!(
                "path must start laser, modulator, mux (got {:?})",
                &kinds[..3]
            ));
        }
        if kinds[n - 2..] != [Demux, Detector] {
            return Err(format!(
                "path must end demux, detector (got {:?})",
                &kinds[n - 2..]
            ));
        }
        let middle = &kinds[3..n - 2];
        if !middle.iter().all(|k| matches!(k, Fiber | Edfa | Splitter)) {
            return Err(format!("illegal element between mux and demux: {middle:?}"));
        }
        if middle.iter().filter(|k| **k == Splitter).count() > 1 {
            return Err("more than one splitter on a path".into());
        }
        if !middle.contains(&Fiber) {
            return Err("no fiber between mux and demux".into());
        }
        Ok(())
    }

    pub fn first(&self, kind: ElementKind) -> Option<&PathElement> {
        self.elements.iter().find(|e| e.kind == kind)
    }

    pub fn elements_of(&self, kind: ElementKind) -> impl Iterator<Item = &PathElement> {
        self.elements.iter().filter(move |e| e.kind == kind)
    }
}

fn node_elements(node: &Node, plane: &str, channel: &str) -> Vec<PathElement> {
    let mut atts: Vec<&Attachment> = node
        .attachments
        .iter()
        .filter(|a| a.plane == plane)
        .filter(|a| a.channel.as_deref().is_none_or(|c| c == channel))
        .collect();
    atts.sort_by_key(|a| a.role);
    atts.into_iter()
        .map(|a| PathElement {
            id: a.element_id(&node.id),
            kind: a.role.element_kind(),
            component: a.component.clone(),
            jitter_rms_s: a.jitter_rms_s,
            spec: a.spec.clone(),
        })
        .collect()
}

/// The (channel, destination) signal paths of a valid topology in
/// deterministic order.
pub fn enumerate_paths(t: &OpticalTopology) -> Result<Vec<SignalPath>, TopologyError> {
    let report = validate_topology(t);
    if !report.is_valid() {
        return Err(TopologyError::Invalid(report));
    }
    let mut paths = Vec::new();
    for (channel, planned) in &t.wavelength_plan {
        for source in &t.nodes {
            let Some(laser) = source
                .attachments
                .iter()
                .find(|a| a.role == Role::Laser && a.channel.as_deref() == Some(channel))
            else {
                continue;
            };
            let plane = laser.plane.as_str();
            let start = node_elements(source, plane, channel);
            walk(
                t, source, plane, channel, planned, start, &source.id, &mut paths,
            );
        }
    }
    paths.sort_by(|a, b| (&a.channel, &a.destination).cmp(&(&b.channel, &b.destination)));
    Ok(paths)
}

#[allow(clippy::too_many_arguments)]
fn walk(
    t: &OpticalTopology,
    at: &Node,
    plane: &str,
    channel: &str,
    planned: &PlannedChannel,
    so_far: Vec<PathElement>,
    source: &str,
    out: &mut Vec<SignalPath>,
) {
    let mut edges: Vec<&Edge> = t
        .edges
        .iter()
        .filter(|e| {
            e.is_fiber()
                && e.from == at.id
                && e.plane == plane
                && e.channels.iter().any(|c| c == channel)
        })
        .collect();
    edges.sort_by(|a, b| a.to.cmp(&b.to));
    for e in edges {
        let Some(next) = t.node(&e.to) else { continue };
        let Medium::Fiber {
            component,
            jitter_rms_s,
            spec,
        } = &e.medium
        else {
            continue;
        };
        let mut elements = so_far.clone();
        elements.push(PathElement {
            id: e.element_id(),
            kind: ElementKind::Fiber,
            component: component.clone(),
            jitter_rms_s: *jitter_rms_s,
            spec: ComponentSpec::Fiber(spec.clone()),
        });
        elements.extend(node_elements(next, plane, channel));
        let terminal = next.attachments.iter().any(|a| {
            a.role == Role::Detector && a.channel.as_deref() == Some(channel) && a.plane == plane
        });
        if terminal {
            out.push(SignalPath {
                channel: channel.to_string(),
                kind: planned.kind,
                direction: t.direction,
                plane: plane.to_string(),
                wavelength_nm: planned.wavelength_nm,
                source: source.to_string(),
                destination: next.id.clone(),
                elements,
            });
        } else {
            walk(t, next, plane, channel, planned, elements, source, out);
        }
    }
}

/// Plain-text adjacency listing, one edge per line.
pub fn adjacency_dump(t: &OpticalTopology) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "# {} topology: {} nodes, {} edges, N = {}",
        t.direction,
        t.nodes.len(),
        t.edges.len(),
        t.n_dtrm
    );
    for n in &t.nodes {
        let parts: Vec<String> = n
            .attachments
            .iter()
            .map(|a| match &a.channel {
                Some(ch) => format!("{}:{}={}", a.role, ch, a.component),
                None => format!("{}[{}]={}", a.role, a.plane, a.component),
            })
            .collect();
        let _ = writeln!(s, "node {} ({}) {}", n.id, n.kind, parts.join(" "));
    }
    for e in &t.edges {
        let medium = match &e.medium {
            Medium::Fiber {
                component, spec, ..
            } => {
                format!("fiber {component} {:.3} m", spec.length_m)
            }
            Medium::Electrical => "electrical".to_string(),
        };
        let _ = writeln!(
            s,
            "edge {} -> {} [{}] {} channels={}",
            e.from,
            e.to,
            e.plane,
            medium,
            e.channels.join(",")
        );
    }
    s
}
