//! Text, JSON and CSV renderings of a [`Report`].

use std::fmt::Write as _;

use photonlink_core::linkbudget::LinkMetrics;
use photonlink_core::tradeoff::{ComplianceRow, Status};
use serde::{Deserialize, Serialize};

use crate::run::{Command, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Text,
    Json,
    Csv,
}

pub fn render(report: &Report, format: Format, color: bool) -> String {
    match format {
        Format::Text => render_text(report, color),
        Format::Json => render_json(report),
        Format::Csv => render_csv(report),
    }
}

pub fn render_json(report: &Report) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

fn num(v: f64, decimals: usize) -> String {
    if v.is_nan() {
        "n/a".into()
    } else if v.is_infinite() {
        if v > 0.0 { "+inf" } else { "-inf" }.into()
    } else if v != 0.0 && !(1e-3..1e6).contains(&v.abs()) {
        format!("{v:.4e}")
    } else {
        // + 0.0 turns -0.0 into 0.0
        format!("{:.decimals$}", v + 0.0)
    }
}

fn opt(v: Option<f64>, decimals: usize) -> String {
    v.map_or_else(|| "-".into(), |v| num(v, decimals))
}

fn status(s: Status, color: bool) -> String {
    let (word, code) = match s {
        Status::Pass => ("PASS", "32"),
        Status::Fail => ("FAIL", "31"),
        Status::NotEvaluated => ("N/E", "33"),
    };
    if color {
        format!("\x1b[{code}m{word}\x1b[0m")
    } else {
        word.into()
    }
}

/// Left-aligned first column, right-aligned rest. Widths ignore ANSI escapes.
fn table(out: &mut String, header: &[&str], rows: &[Vec<String>]) {
    let visible = |s: &str| {
        let mut n = 0;
        let mut esc = false;
        for c in s.chars() {
            match (esc, c) {
                (false, '\x1b') => esc = true,
                (true, 'm') => esc = false,
                (false, _) => n += 1,
                _ => {}
            }
        }
        n
    };
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (i, c) in r.iter().enumerate() {
            widths[i] = widths[i].max(visible(c));
        }
    }
    let line = |out: &mut String, cells: &mut dyn Iterator<Item = &str>| {
        let mut parts = Vec::new();
        for (i, c) in cells.enumerate() {
            let pad = " ".repeat(widths[i] - visible(c));
            parts.push(if i == 0 {
                format!("{c}{pad}")
            } else {
                format!("{pad}{c}")
            });
        }
        let _ = writeln!(out, "  {}", parts.join("  ").trim_end());
    };
    line(out, &mut header.iter().copied());
    let total: usize = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
    let _ = writeln!(out, "  {}", "-".repeat(total));
    for r in rows {
        line(out, &mut r.iter().map(String::as_str));
    }
}

fn compliance_cells(r: &ComplianceRow, color: bool) -> Vec<String> {
    vec![
        r.requirement.clone(),
        opt(r.value, 3),
        r.comparator.symbol().into(),
        num(r.bound, 3),
        r.unit.clone(),
        opt(r.margin, 3),
        status(r.status, color),
    ]
}

/// One row per channel, worst case over its destinations.
fn channel_rows(paths: &[LinkMetrics]) -> Vec<Vec<String>> {
    let mut order: Vec<&str> = Vec::new();
    for m in paths {
        if !order.contains(&m.channel.as_str()) {
            order.push(&m.channel);
        }
    }
    let fold = |xs: &mut dyn Iterator<Item = f64>, f: fn(f64, f64) -> f64| xs.reduce(f);
    order
        .into_iter()
        .map(|ch| {
            let of: Vec<&LinkMetrics> = paths.iter().filter(|m| m.channel == ch).collect();
            let min = |g: fn(&LinkMetrics) -> Option<f64>| {
                fold(&mut of.iter().filter_map(|m| g(m)), f64::min)
            };
            let max = |g: fn(&LinkMetrics) -> Option<f64>| {
                fold(&mut of.iter().filter_map(|m| g(m)), f64::max)
            };
            vec![
                ch.to_string(),
                of[0].kind.to_string(),
                of.len().to_string(),
                num(of[0].wavelength_nm, 2),
                opt(min(|m| Some(m.rf_gain_db)), 2),
                opt(max(|m| Some(m.noise_figure_db)), 3),
                opt(max(|m| Some(m.nf_degradation_db)), 3),
                opt(min(|m| m.sfdr_db), 3),
                opt(max(|m| m.phase_noise_degradation_db), 3),
                opt(max(|m| m.crosstalk_db), 2),
                opt(max(|m| Some(m.propagation_delay_s * 1e9)), 3),
                opt(max(|m| Some(m.pulse_skew_s * 1e12)), 1),
                opt(max(|m| Some(m.timing_jitter_rms_s * 1e12)), 3),
            ]
        })
        .collect()
}

const CHANNEL_HEADER: [&str; 13] = [
    "channel",
    "kind",
    "paths",
    "lambda nm",
    "min gain dB",
    "max NF dB",
    "max NF deg dB",
    "min SFDR dB",
    "max PN deg dB",
    "xtalk dB",
    "max delay ns",
    "max skew ps",
    "jitter ps",
];

pub fn render_text(r: &Report, color: bool) -> String {
    let mut o = String::new();
    let _ = writeln!(
        o,
        "{} {} {}: scenario `{}` (sha256 {})",
        r.tool.name,
        r.tool.version,
        r.command,
        r.scenario.name,
        &r.scenario.fingerprint_sha256[..16.min(r.scenario.fingerprint_sha256.len())]
    );
    let _ = writeln!(
        o,
        "N = {} DTRMs, {} forward channels, return chain {}, bandwidth {} Hz, T = {} K",
        r.scenario.n_dtrm,
        r.scenario.forward_channels,
        if r.scenario.return_chain { "yes" } else { "no" },
        r.settings.bandwidth_hz,
        r.settings.temperature_k
    );

    let _ = writeln!(o, "\nTopology checks");
    let rows: Vec<Vec<String>> = r
        .validation
        .iter()
        .map(|c| {
            vec![
                c.topology.clone(),
                c.nodes.to_string(),
                c.edges.to_string(),
                c.paths.to_string(),
                status(if c.valid { Status::Pass } else { Status::Fail }, color),
            ]
        })
        .collect();
    table(
        &mut o,
        &["topology", "nodes", "edges", "paths", "status"],
        &rows,
    );
    for c in &r.validation {
        for v in &c.violations {
            let _ = writeln!(o, "  {}: {}", c.topology, v);
        }
    }
    for c in &r.validation {
        if let Some(dump) = &c.adjacency {
            let _ = writeln!(o, "\nAdjacency of {}", c.topology);
            for line in dump.lines() {
                let _ = writeln!(o, "  {line}");
            }
        }
    }

    for v in &r.variants {
        let _ = writeln!(
            o,
            "\nVariant {} ({}) iip3 {} dBm, ranks power/size/weight {}/{}/{}",
            v.variant,
            v.variant.label(),
            num(v.iip3_dbm, 1),
            v.score.power_rank,
            v.score.size_rank,
            v.score.weight_rank
        );
        for s in &v.edfa_settings {
            let _ = writeln!(
                o,
                "  EDFA {}: requested {} dB, applied {} dB (max {} dB){}",
                s.element,
                num(s.requested_db, 3),
                num(s.applied_db, 3),
                num(s.max_gain_db, 1),
                if s.clamped() { ", clamped" } else { "" }
            );
        }
        table(&mut o, &CHANNEL_HEADER, &channel_rows(&v.paths));
        let _ = writeln!(
            o,
            "  network skew: analog {} ps, digital {} ps",
            num(v.analog_pulse_skew_s * 1e12, 1),
            num(v.digital_pulse_skew_s * 1e12, 1)
        );
        let mut seen = std::collections::BTreeSet::new();
        for m in v.paths.iter().filter(|m| seen.insert(m.kind)) {
            let l = &m.optical_ledger;
            let _ = writeln!(o, "  optical ledger {} -> {}:", m.channel, m.destination);
            let _ = writeln!(o, "    {:<24} {:>10} dBm", "laser", num(l.start_dbm, 3));
            for e in &l.entries {
                let _ = writeln!(
                    o,
                    "    {:<24} {:>+10.3} dB  {:>10} dBm",
                    e.element,
                    e.delta_db + 0.0,
                    num(e.power_dbm, 3)
                );
            }
            for f in &l.flags {
                let _ = writeln!(o, "    warning: {}", f.describe());
            }
        }
        let _ = writeln!(
            o,
            "  compliance: {}/{} requirements met",
            v.compliance.passed_count(),
            v.compliance.rows.len()
        );
        let rows: Vec<Vec<String>> = v
            .compliance
            .rows
            .iter()
            .map(|row| compliance_cells(row, color))
            .collect();
        table(
            &mut o,
            &[
                "requirement",
                "value",
                "",
                "bound",
                "unit",
                "margin",
                "status",
            ],
            &rows,
        );
    }

    if let Some(rc) = &r.return_chain {
        let _ = writeln!(
            o,
            "\nReturn chain: {} groups, {} paths, skew {} ps",
            rc.groups,
            rc.paths.len(),
            num(rc.pulse_skew_s * 1e12, 1)
        );
        table(&mut o, &CHANNEL_HEADER, &channel_rows(&rc.paths));
        if let Some(cap) = &rc.capacity {
            let rows: Vec<Vec<String>> = cap
                .groups
                .iter()
                .map(|g| {
                    vec![
                        g.group.to_string(),
                        g.transmitter.clone(),
                        g.channels.to_string(),
                        num(g.payload_bytes_s / 1e6, 3),
                        num(g.demand_bytes_s / 1e6, 3),
                        num(g.bar_bytes_s / 1e6, 3),
                        num(g.margin_mb_s, 3),
                        status(if g.pass { Status::Pass } else { Status::Fail }, color),
                        if g.demand_met { "yes" } else { "no" }.into(),
                    ]
                })
                .collect();
            table(
                &mut o,
                &[
                    "group",
                    "transmitter",
                    "channels",
                    "payload MB/s",
                    "demand MB/s",
                    "bar MB/s",
                    "margin MB/s",
                    "status",
                    "demand met",
                ],
                &rows,
            );
        }
    }

    if r.command == Command::Tradeoff {
        let _ = writeln!(o, "\nDesign space");
        let rows: Vec<Vec<String>> = r
            .enumeration
            .iter()
            .map(|e| {
                vec![
                    e.variant.to_string(),
                    if e.feasible { "feasible" } else { "infeasible" }.into(),
                    if e.defined { "yes" } else { "no" }.into(),
                ]
            })
            .collect();
        table(&mut o, &["variant", "feasibility", "defined"], &rows);
    }
    if let Some(rec) = &r.recommendation {
        let _ = writeln!(o, "\nRanking");
        let rows: Vec<Vec<String>> = rec
            .order
            .iter()
            .map(|v| {
                vec![
                    v.position.to_string(),
                    v.variant.to_string(),
                    v.passed.to_string(),
                    status(
                        if v.compliant {
                            Status::Pass
                        } else {
                            Status::Fail
                        },
                        color,
                    ),
                    v.score.power_rank.to_string(),
                    v.score.size_rank.to_string(),
                    v.score.weight_rank.to_string(),
                ]
            })
            .collect();
        table(
            &mut o,
            &[
                "#",
                "variant",
                "passed",
                "compliant",
                "power",
                "size",
                "weight",
            ],
            &rows,
        );
        let _ = writeln!(o, "  recommended: {}", rec.top().variant);
        for line in &rec.rationale {
            let _ = writeln!(o, "  - {line}");
        }
        for line in &rec.notes {
            let _ = writeln!(o, "  note: {line}");
        }
    }
    for n in &r.notes {
        let _ = writeln!(o, "note: {n}");
    }
    let _ = writeln!(o, "\nexit code {}", r.exit_code);
    o
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Metrics written for every path, with units.
pub const PATH_METRICS: [(&str, &str); 17] = [
    ("wavelength", "nm"),
    ("rf_gain", "dB"),
    ("noise_figure", "dB"),
    ("cascaded_noise_figure", "dB"),
    ("nf_degradation", "dB"),
    ("photocurrent", "A"),
    ("sfdr", "dB"),
    ("snr_out", "dB"),
    ("snr_degradation", "dB"),
    ("phase_noise_degradation", "dB"),
    ("crosstalk", "dB"),
    ("effective_bandwidth", "Hz"),
    ("rise_time", "s"),
    ("fall_time", "s"),
    ("propagation_delay", "s"),
    ("pulse_skew", "s"),
    ("timing_jitter_rms", "s"),
];

fn path_values(m: &LinkMetrics) -> [Option<f64>; 17] {
    [
        Some(m.wavelength_nm),
        Some(m.rf_gain_db),
        Some(m.noise_figure_db),
        Some(m.cascaded_noise_figure_db),
        Some(m.nf_degradation_db),
        Some(m.photocurrent_a),
        m.sfdr_db,
        m.snr_out_db,
        Some(m.snr_degradation_db),
        m.phase_noise_degradation_db,
        m.crosstalk_db,
        Some(m.effective_bandwidth_hz),
        Some(m.rise_time_s),
        Some(m.fall_time_s),
        Some(m.propagation_delay_s),
        Some(m.pulse_skew_s),
        Some(m.timing_jitter_rms_s),
    ]
}

pub const CSV_HEADER: &str = "section,variant,direction,channel,destination,metric,unit,value";

pub fn render_csv(r: &Report) -> String {
    let mut o = String::new();
    let _ = writeln!(o, "{CSV_HEADER}");
    let mut row = |section: &str,
                   variant: &str,
                   dir: &str,
                   ch: &str,
                   dest: &str,
                   metric: &str,
                   unit: &str,
                   value: String| {
        let _ = writeln!(
            o,
            "{},{},{},{},{},{},{},{}",
            section,
            csv_field(variant),
            dir,
            csv_field(ch),
            csv_field(dest),
            csv_field(metric),
            unit,
            value
        );
    };
    let opt = |v: Option<f64>| v.map_or_else(String::new, csv_num);
    for c in &r.validation {
        for (metric, value) in [
            ("nodes", c.nodes),
            ("edges", c.edges),
            ("paths", c.paths),
            ("violations", c.violations.len()),
            ("valid", usize::from(c.valid)),
        ] {
            row(
                "validation",
                &c.topology,
                "",
                "",
                "",
                metric,
                "",
                value.to_string(),
            );
        }
    }
    for v in &r.variants {
        let name = v.variant.to_string();
        for m in &v.paths {
            let dir = m.direction.to_string();
            for ((metric, unit), value) in PATH_METRICS.iter().zip(path_values(m)) {
                row(
                    "path",
                    &name,
                    &dir,
                    &m.channel,
                    &m.destination,
                    metric,
                    unit,
                    opt(value),
                );
            }
        }
        for c in &v.compliance.rows {
            row(
                "compliance",
                &name,
                "",
                "",
                "",
                &c.requirement,
                &c.unit,
                opt(c.value),
            );
        }
    }
    if let Some(rc) = &r.return_chain {
        for m in &rc.paths {
            let dir = m.direction.to_string();
            for ((metric, unit), value) in PATH_METRICS.iter().zip(path_values(m)) {
                row(
                    "path",
                    "",
                    &dir,
                    &m.channel,
                    &m.destination,
                    metric,
                    unit,
                    opt(value),
                );
            }
        }
        if let Some(cap) = &rc.capacity {
            for g in &cap.groups {
                let label = format!("group{:02}", g.group);
                row(
                    "capacity",
                    "",
                    "return",
                    &label,
                    &g.transmitter,
                    "payload",
                    "B/s",
                    csv_num(g.payload_bytes_s),
                );
                row(
                    "capacity",
                    "",
                    "return",
                    &label,
                    &g.transmitter,
                    "demand",
                    "B/s",
                    csv_num(g.demand_bytes_s),
                );
                row(
                    "capacity",
                    "",
                    "return",
                    &label,
                    &g.transmitter,
                    "margin",
                    "MB/s",
                    csv_num(g.margin_mb_s),
                );
            }
        }
    }
    if let Some(rec) = &r.recommendation {
        for v in &rec.order {
            row(
                "recommendation",
                &v.variant.to_string(),
                "",
                "",
                "",
                "position",
                "",
                v.position.to_string(),
            );
        }
    }
    o
}
