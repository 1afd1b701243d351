//! Command execution: builds topologies, runs the analyses and assembles a
//! [`Report`].

use photonlink_core::components::{SignalKind, Violation};
use photonlink_core::digitalpath::{check_group_capacity, CapacityReport};
use photonlink_core::linkbudget::{
    analyze_network, edfa_autogain_topology, network_skew_s, AnalysisConfig, EdfaSetting,
    LinkError, LinkMetrics,
};
use photonlink_core::topology::{
    adjacency_dump, build_forward_network, build_return_network, enumerate_paths,
    validate_topology, OpticalTopology, TopologyError,
};
use photonlink_core::tradeoff::{
    check_requirements, enumerate_variants, recommend, score_variant, ComplianceReport,
    DesignVariant, OrdinalScore, Recommendation, VariantEvidence,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scenario::{Scenario, Selection};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NONCOMPLIANT: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Validate,
    Analyze,
    Tradeoff,
}

impl std::fmt::Display for Command {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Command::Validate => "validate",
            Command::Analyze => "analyze",
            Command::Tradeoff => "tradeoff",
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub variant: Option<Selection>,
    pub bandwidth_hz: Option<f64>,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{0}")]
    Options(String),
    #[error("variant {0}: {1}")]
    Topology(DesignVariant, TopologyError),
    #[error("return chain: {0}")]
    ReturnTopology(TopologyError),
    #[error("variant {0}: {1}")]
    Link(DesignVariant, LinkError),
    #[error("return chain: {0}")]
    ReturnLink(LinkError),
    #[error("{0}")]
    Tradeoff(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioInfo {
    pub name: String,
    pub fingerprint_sha256: String,
    pub n_dtrm: u32,
    pub forward_channels: usize,
    pub return_chain: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub variant_selection: String,
    pub bandwidth_hz: f64,
    pub temperature_k: f64,
    pub load_resistance_ohm: f64,
    pub edfa_autogain: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyCheck {
    /// "forward:<variant>", "forward:as-written" or "return".
    pub topology: String,
    pub valid: bool,
    pub nodes: usize,
    pub edges: usize,
    pub paths: usize,
    pub violations: Vec<Violation>,
    /// Plain-text node and edge listing, filled in by `validate`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adjacency: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnChainReport {
    pub groups: usize,
    pub edfa_settings: Vec<EdfaSetting>,
    pub paths: Vec<LinkMetrics>,
    pub pulse_skew_s: f64,
    pub capacity: Option<CapacityReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantReport {
    pub variant: DesignVariant,
    pub iip3_dbm: f64,
    pub score: OrdinalScore,
    pub edfa_settings: Vec<EdfaSetting>,
    pub analog_pulse_skew_s: f64,
    pub digital_pulse_skew_s: f64,
    pub paths: Vec<LinkMetrics>,
    pub evidence: VariantEvidence,
    pub compliance: ComplianceReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumeratedVariant {
    pub variant: DesignVariant,
    pub feasible: bool,
    pub defined: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub report_schema_version: u32,
    pub tool: ToolInfo,
    pub command: Command,
    pub scenario: ScenarioInfo,
    pub settings: Settings,
    pub validation: Vec<TopologyCheck>,
    pub return_chain: Option<ReturnChainReport>,
    pub variants: Vec<VariantReport>,
    pub enumeration: Vec<EnumeratedVariant>,
    pub recommendation: Option<Recommendation>,
    pub notes: Vec<String>,
    pub exit_code: i32,
}

impl Report {
    pub fn variant(&self, v: &DesignVariant) -> Option<&VariantReport> {
        self.variants.iter().find(|r| &r.variant == v)
    }

    pub fn forward_path_count(&self) -> usize {
        self.variants.first().map_or(0, |v| v.paths.len())
    }
}

fn check(name: String, t: &OpticalTopology) -> TopologyCheck {
    let report = validate_topology(t);
    let paths = if report.is_valid() {
        enumerate_paths(t).map_or(0, |p| p.len())
    } else {
        0
    };
    TopologyCheck {
        topology: name,
        valid: report.is_valid(),
        nodes: t.nodes.len(),
        edges: t.edges.len(),
        paths,
        violations: report.violations,
        adjacency: None,
    }
}

fn selected_variants(
    scenario: &Scenario,
    command: Command,
    selection: Selection,
) -> Result<Vec<DesignVariant>, RunError> {
    match (command, selection) {
        (Command::Tradeoff, _) | (_, Selection::All) => {
            Ok(scenario.variants.values().map(|(v, _)| *v).collect())
        }
        (_, Selection::One(v)) => {
            if !v.is_feasible() {
                return Err(RunError::Options(format!("variant {v} is infeasible")));
            }
            if scenario.parts(&v).is_none() {
                return Err(RunError::Options(format!(
                    "variant {v} has no definition in the scenario"
                )));
            }
            Ok(vec![v])
        }
    }
}

fn forward_topology(scenario: &Scenario, v: &DesignVariant) -> Result<OpticalTopology, RunError> {
    let plan = scenario
        .forward_plan_for(v)
        .ok_or_else(|| RunError::Options(format!("variant {v} has no definition")))?;
    build_forward_network(scenario.n_dtrm(), &plan, &scenario.library)
        .map_err(|e| RunError::Topology(*v, e))
}

fn settle(
    t: OpticalTopology,
    autogain: bool,
) -> Result<(OpticalTopology, Vec<EdfaSetting>), TopologyError> {
    if autogain {
        edfa_autogain_topology(&t)
    } else {
        Ok((t, Vec::new()))
    }
}

/// Runs one command. Input problems are errors; compliance is in the report.
pub fn run(command: Command, scenario: &Scenario, opts: &RunOptions) -> Result<Report, RunError> {
    if let Some(b) = opts.bandwidth_hz {
        if !(b.is_finite() && b > 0.0) {
            return Err(RunError::Options(format!(
                "--bandwidth must be > 0 (got {b})"
            )));
        }
    }
    let selection = opts.variant.unwrap_or(scenario.selection);
    let mut config: AnalysisConfig = scenario.file.analysis.clone();
    if let Some(b) = opts.bandwidth_hz {
        config.bandwidth_hz = b;
    }
    let topo = &scenario.file.topology;
    let variants = selected_variants(scenario, command, selection)?;

    let mut validation = Vec::new();
    if command == Command::Validate {
        let as_written = build_forward_network(scenario.n_dtrm(), &topo.forward, &scenario.library)
            .map_err(|e| RunError::Options(format!("topology.forward: {e}")))?;
        validation.push(check("forward:as-written".into(), &as_written));
    }
    let mut forward = Vec::new();
    for v in &variants {
        let t = forward_topology(scenario, v)?;
        validation.push(check(format!("forward:{v}"), &t));
        forward.push((*v, t));
    }
    let return_topology = match &topo.return_chain {
        Some(plan) => {
            let t = build_return_network(scenario.n_dtrm(), plan, &scenario.library)
                .map_err(RunError::ReturnTopology)?;
            validation.push(check("return".into(), &t));
            Some(t)
        }
        None => None,
    };

    if command == Command::Validate {
        let topologies = forward
            .iter()
            .map(|(_, t)| t)
            .chain(return_topology.as_ref());
        let mut dumps: Vec<String> = Vec::new();
        if let Ok(t) = build_forward_network(scenario.n_dtrm(), &topo.forward, &scenario.library) {
            dumps.push(adjacency_dump(&t));
        }
        dumps.extend(topologies.map(adjacency_dump));
        for (check, dump) in validation.iter_mut().zip(dumps) {
            check.adjacency = Some(dump);
        }
    }
    let invalid = validation.iter().any(|c| !c.valid);
    let mut report = Report {
        report_schema_version: REPORT_SCHEMA_VERSION,
        tool: ToolInfo {
            name: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
        },
        command,
        scenario: ScenarioInfo {
            name: scenario.name().into(),
            fingerprint_sha256: scenario.fingerprint.clone(),
            n_dtrm: scenario.n_dtrm(),
            forward_channels: topo.forward.channels.len(),
            return_chain: topo.return_chain.is_some(),
        },
        settings: Settings {
            variant_selection: selection.to_string(),
            bandwidth_hz: config.bandwidth_hz,
            temperature_k: config.temperature_k,
            load_resistance_ohm: config.load_resistance_ohm,
            edfa_autogain: topo.edfa_autogain,
        },
        validation,
        return_chain: None,
        variants: Vec::new(),
        enumeration: Vec::new(),
        recommendation: None,
        notes: Vec::new(),
        exit_code: EXIT_OK,
    };

    if command == Command::Validate || invalid {
        report.exit_code = if invalid { EXIT_INPUT } else { EXIT_OK };
        if invalid && command != Command::Validate {
            report
                .notes
                .push("topology is invalid; analysis was not run".into());
        }
        return Ok(report);
    }

    let return_chain = match return_topology {
        Some(t) => {
            let (t, settings) = settle(t, topo.edfa_autogain).map_err(RunError::ReturnTopology)?;
            let paths = analyze_network(&t, &config).map_err(RunError::ReturnLink)?;
            let capacity = scenario.file.digital.as_ref().map(|d| {
                check_group_capacity(
                    &t.return_groups(),
                    &d.link,
                    &d.adc,
                    scenario.file.requirements.group_throughput_bar_bytes_s(),
                )
            });
            Some(ReturnChainReport {
                groups: t.return_groups().len(),
                edfa_settings: settings,
                pulse_skew_s: network_skew_s(&paths, SignalKind::Digital),
                paths,
                capacity,
            })
        }
        None => None,
    };

    for (v, t) in forward {
        let parts = scenario.parts(&v).expect("selected variants are defined");
        let (t, settings) = settle(t, topo.edfa_autogain).map_err(|e| RunError::Topology(v, e))?;
        let cfg = AnalysisConfig {
            iip3_dbm: Some(parts.iip3_dbm),
            ..config.clone()
        };
        let paths = analyze_network(&t, &cfg).map_err(|e| RunError::Link(v, e))?;
        let mut all = paths.clone();
        if let Some(r) = &return_chain {
            all.extend(r.paths.iter().cloned());
        }
        let evidence = VariantEvidence::from_analysis(
            &all,
            return_chain.as_ref().and_then(|r| r.capacity.as_ref()),
            cfg.temperature_k,
        );
        let compliance = check_requirements(&evidence, v, &scenario.file.requirements);
        report.variants.push(VariantReport {
            variant: v,
            iip3_dbm: parts.iip3_dbm,
            score: score_variant(&v).map_err(|e| RunError::Tradeoff(e.to_string()))?,
            edfa_settings: settings,
            analog_pulse_skew_s: network_skew_s(&paths, SignalKind::Analog),
            digital_pulse_skew_s: network_skew_s(&paths, SignalKind::Digital),
            paths,
            evidence,
            compliance,
        });
    }
    report.return_chain = return_chain;
    report.variants.sort_by_key(|r| r.variant.index());

    match command {
        Command::Analyze => {
            let ok = report.variants.iter().all(|r| r.compliance.compliant);
            report.exit_code = if ok { EXIT_OK } else { EXIT_NONCOMPLIANT };
        }
        Command::Tradeoff => {
            report.enumeration = enumerate_variants()
                .into_iter()
                .map(|(v, feasible)| EnumeratedVariant {
                    variant: v,
                    feasible,
                    defined: scenario.parts(&v).is_some(),
                })
                .collect();
            for e in report
                .enumeration
                .iter()
                .filter(|e| e.feasible && !e.defined)
            {
                report.notes.push(format!(
                    "{} is feasible but has no definition; not ranked",
                    e.variant
                ));
            }
            let reports: Vec<ComplianceReport> = report
                .variants
                .iter()
                .map(|r| r.compliance.clone())
                .collect();
            let rec = recommend(&reports).map_err(|e| RunError::Tradeoff(e.to_string()))?;
            report.exit_code = if rec.top().compliant {
                EXIT_OK
            } else {
                EXIT_NONCOMPLIANT
            };
            report.recommendation = Some(rec);
        }
        Command::Validate => unreachable!("handled above"),
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::parse_scenario;

    fn reference() -> Scenario {
        parse_scenario(include_bytes!("../scenarios/reference.json")).unwrap()
    }

    #[test]
    fn validate_runs_no_analysis() {
        let r = run(Command::Validate, &reference(), &RunOptions::default()).unwrap();
        assert_eq!(r.exit_code, EXIT_OK);
        assert!(r.variants.is_empty());
        // as-written plan, six variants and the return network
        assert_eq!(r.validation.len(), 8);
        assert!(r.validation.iter().all(|c| c.valid));
    }

    #[test]
    fn analyze_one_variant() {
        let s = reference();
        let v: DesignVariant = "dm-vbg-hip".parse().unwrap();
        let opts = RunOptions {
            variant: Some(Selection::One(v)),
            bandwidth_hz: None,
        };
        let r = run(Command::Analyze, &s, &opts).unwrap();
        assert_eq!(r.variants.len(), 1);
        assert_eq!(r.forward_path_count(), 128);
        assert!(r.variants[0].compliance.compliant);
        assert_eq!(r.return_chain.as_ref().unwrap().groups, 4);
        assert!(r.recommendation.is_none());
    }

    #[test]
    fn tradeoff_covers_the_design_space() {
        let r = run(Command::Tradeoff, &reference(), &RunOptions::default()).unwrap();
        assert_eq!(r.enumeration.len(), 8);
        assert_eq!(
            r.enumeration
                .iter()
                .filter(|e| e.feasible && e.defined)
                .count(),
            6
        );
        let rec = r.recommendation.unwrap();
        assert_eq!(rec.top().variant.to_string(), "dm-vbg-hip");
        assert_eq!(r.exit_code, EXIT_OK);
    }

    #[test]
    fn rejects_bad_bandwidth() {
        let opts = RunOptions {
            variant: None,
            bandwidth_hz: Some(f64::NAN),
        };
        assert!(matches!(
            run(Command::Analyze, &reference(), &opts),
            Err(RunError::Options(_))
        ));
    }
}
