//! Optical power bookkeeping and EDFA gain allocation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::components::ComponentSpec;
use crate::topology::{enumerate_paths, ElementKind, OpticalTopology, SignalPath, TopologyError};
use crate::units::watts_to_dbm;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub element: String,
    pub kind: ElementKind,
    pub delta_db: f64,
    /// Optical power after the element, dBm.
    pub power_dbm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "flag", rename_all = "snake_case")]
pub enum LedgerFlag {
    GainClamped {
        element: String,
        requested_db: f64,
        applied_db: f64,
    },
    EdfaOutputSaturated {
        element: String,
        power_dbm: f64,
        limit_dbm: f64,
    },
    AboveSaturation {
        element: String,
        power_dbm: f64,
        limit_dbm: f64,
    },
    BelowSensitivity {
        element: String,
        power_dbm: f64,
        limit_dbm: f64,
    },
}

impl LedgerFlag {
    pub fn describe(&self) -> String {
        match self {
            LedgerFlag::GainClamped {
                element,
                requested_db,
                applied_db,
            } => format!("{element}: gain clamped ({requested_db:.2} dB requested, {applied_db:.2} dB applied)"),
            LedgerFlag::EdfaOutputSaturated {
                element,
                power_dbm,
                limit_dbm,
            } => format!("{element}: output {power_dbm:.2} dBm above saturation {limit_dbm:.2} dBm"),
            LedgerFlag::AboveSaturation {
                element,
                power_dbm,
                limit_dbm,
            } => format!("{element}: input {power_dbm:.2} dBm above saturation {limit_dbm:.2} dBm"),
            LedgerFlag::BelowSensitivity {
                element,
                power_dbm,
                limit_dbm,
            } => format!("{element}: input {power_dbm:.2} dBm below sensitivity {limit_dbm:.2} dBm"),
        }
    }
}

/// Per-element optical power along one path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpticalLedger {
    pub start_dbm: f64,
    pub entries: Vec<LedgerEntry>,
    pub flags: Vec<LedgerFlag>,
}

impl OpticalLedger {
    pub fn end_dbm(&self) -> f64 {
        self.entries.last().map_or(self.start_dbm, |e| e.power_dbm)
    }

    pub fn total_delta_db(&self) -> f64 {
        self.entries.iter().map(|e| e.delta_db).sum()
    }

    /// Power entering element `index`.
    pub fn input_dbm(&self, index: usize) -> f64 {
        if index == 0 {
            self.start_dbm
        } else {
            self.entries[index - 1].power_dbm
        }
    }

    /// Net dB change over every element after the modulator.
    pub fn delta_after_modulator_db(&self) -> f64 {
        let start = self
            .entries
            .iter()
            .position(|e| e.kind == ElementKind::Modulator)
            .map_or(0, |i| i + 1);
        self.entries[start..].iter().map(|e| e.delta_db).sum()
    }

    pub fn has_clamp(&self) -> bool {
        self.flags
            .iter()
            .any(|f| matches!(f, LedgerFlag::GainClamped { .. }))
    }
}

/// dB change of one element; EDFA gain is capped at `max_gain_db`.
fn element_delta_db(spec: &ComponentSpec) -> f64 {
    match spec {
        ComponentSpec::Laser(_) | ComponentSpec::Photodetector(_) => 0.0,
        ComponentSpec::Modulator(m) => -m.through_loss_db(),
        ComponentSpec::MuxDemux(x) => -x.insertion_loss_db,
        ComponentSpec::Fiber(f) => -f.loss_db(),
        ComponentSpec::Splitter(s) => -s.split_loss_db(),
        ComponentSpec::Edfa(e) => e.applied_gain_db(),
    }
}

fn laser_power_dbm(path: &SignalPath) -> f64 {
    match path.first(ElementKind::Laser).map(|e| &e.spec) {
        Some(ComponentSpec::Laser(l)) => watts_to_dbm(l.output_power_w),
        _ => f64::NEG_INFINITY,
    }
}

/// Walks the path from the laser output to the detector input.
pub fn optical_ledger(path: &SignalPath) -> OpticalLedger {
    let start_dbm = laser_power_dbm(path);
    let mut power = start_dbm;
    let mut entries = Vec::with_capacity(path.elements.len());
    let mut flags = Vec::new();
    for el in &path.elements {
        let delta = element_delta_db(&el.spec);
        let input = power;
        power += delta;
        match &el.spec {
            ComponentSpec::Edfa(e) => {
                if e.gain_db > e.max_gain_db {
                    flags.push(LedgerFlag::GainClamped {
                        element: el.id.clone(),
                        requested_db: e.gain_db,
                        applied_db: e.max_gain_db,
                    });
                }
                if power > e.saturation_output_power_dbm {
                    flags.push(LedgerFlag::EdfaOutputSaturated {
                        element: el.id.clone(),
                        power_dbm: power,
                        limit_dbm: e.saturation_output_power_dbm,
                    });
                }
            }
            ComponentSpec::Photodetector(pd) => {
                if input > pd.saturation_power_dbm {
                    flags.push(LedgerFlag::AboveSaturation {
                        element: el.id.clone(),
                        power_dbm: input,
                        limit_dbm: pd.saturation_power_dbm,
                    });
                }
                if let Some(s) = pd.sensitivity_dbm {
                    if input < s {
                        flags.push(LedgerFlag::BelowSensitivity {
                            element: el.id.clone(),
                            power_dbm: input,
                            limit_dbm: s,
                        });
                    }
                }
            }
            _ => {}
        }
        entries.push(LedgerEntry {
            element: el.id.clone(),
            kind: el.kind,
            delta_db: delta,
            power_dbm: power,
        });
    }
    OpticalLedger {
        start_dbm,
        entries,
        flags,
    }
}

/// Gain chosen for one EDFA.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdfaSetting {
    pub element: String,
    /// Loss this EDFA was asked to cover, dB.
    pub requested_db: f64,
    pub applied_db: f64,
    pub max_gain_db: f64,
}

impl EdfaSetting {
    pub fn clamped(&self) -> bool {
        self.requested_db > self.applied_db
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainPlan {
    pub passive_loss_db: f64,
    pub settings: Vec<EdfaSetting>,
    /// Loss left over after every EDFA reached its cap, dB.
    pub uncompensated_db: f64,
}

impl GainPlan {
    pub fn under_compensated(&self) -> bool {
        self.uncompensated_db > 0.0
    }
}

/// Total passive loss between laser and detector, dB (positive).
pub fn passive_loss_db(path: &SignalPath) -> f64 {
    path.elements
        .iter()
        .filter(|e| e.kind != ElementKind::Edfa)
        .map(|e| -element_delta_db(&e.spec))
        .sum()
}

/// EDFA gains that bring the detector back to laser power, in path order.
pub fn edfa_autogain(path: &SignalPath) -> GainPlan {
    let passive = passive_loss_db(path);
    let mut remaining = passive;
    let mut settings = Vec::new();
    for el in path.elements_of(ElementKind::Edfa) {
        let ComponentSpec::Edfa(e) = &el.spec else {
            continue;
        };
        let requested = remaining.max(0.0);
        let applied = requested.min(e.max_gain_db).max(0.0);
        remaining -= applied;
        settings.push(EdfaSetting {
            element: el.id.clone(),
            requested_db: requested,
            applied_db: applied,
            max_gain_db: e.max_gain_db,
        });
    }
    GainPlan {
        passive_loss_db: passive,
        settings,
        uncompensated_db: remaining.max(0.0),
    }
}

/// Copy of `path` with the plan's gains written into its EDFAs.
pub fn apply_gain_plan(path: &SignalPath, plan: &GainPlan) -> SignalPath {
    let mut out = path.clone();
    for el in &mut out.elements {
        if let ComponentSpec::Edfa(e) = &mut el.spec {
            if let Some(s) = plan.settings.iter().find(|s| s.element == el.id) {
                e.gain_db = s.applied_db;
            }
        }
    }
    out
}

/// Sets every EDFA in a topology to cover the worst path through it.
///
/// EDFAs are settled upstream first. Each one takes the largest loss still
/// uncovered on any path through it, capped at its maximum gain.
pub fn edfa_autogain_topology(
    topology: &OpticalTopology,
) -> Result<(OpticalTopology, Vec<EdfaSetting>), TopologyError> {
    let paths = enumerate_paths(topology)?;
    let passive: Vec<f64> = paths.iter().map(passive_loss_db).collect();

    // Position of each EDFA along the paths that cross it.
    let mut order: BTreeMap<String, (usize, f64)> = BTreeMap::new();
    for p in &paths {
        for (i, el) in p.elements.iter().enumerate() {
            if let ComponentSpec::Edfa(e) = &el.spec {
                let entry = order.entry(el.id.clone()).or_insert((i, e.max_gain_db));
                entry.0 = entry.0.max(i);
            }
        }
    }
    let mut ids: Vec<(String, usize, f64)> = order
        .into_iter()
        .map(|(id, (pos, max))| (id, pos, max))
        .collect();
    ids.sort_by(|a, b| (a.1, &a.0).cmp(&(b.1, &b.0)));

    let mut applied: BTreeMap<String, f64> = BTreeMap::new();
    let mut settings = Vec::new();
    for (id, _, max_gain) in ids {
        let mut requested: f64 = 0.0;
        for (p, loss) in paths.iter().zip(&passive) {
            if !p.elements.iter().any(|e| e.id == id) {
                continue;
            }
            let covered: f64 = p
                .elements_of(ElementKind::Edfa)
                .filter_map(|e| applied.get(&e.id))
                .sum();
            requested = requested.max(loss - covered);
        }
        let gain = requested.min(max_gain).max(0.0);
        applied.insert(id.clone(), gain);
        settings.push(EdfaSetting {
            element: id,
            requested_db: requested,
            applied_db: gain,
            max_gain_db: max_gain,
        });
    }

    let mut out = topology.clone();
    for s in &settings {
        out.set_edfa_gain(&s.element, s.applied_db);
    }
    Ok((out, settings))
}
