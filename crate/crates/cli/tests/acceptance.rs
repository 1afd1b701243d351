//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::time::{Duration, Instant};

use photonlink::run::{run, Command, RunOptions};
use photonlink::scenario::{load_scenario, parse_scenario, Selection};
use photonlink_core::components::{
    Component, ComponentLibrary, GratingTechnology, ModulationScheme, SignalKind,
};
use photonlink_core::digitalpath::{
    check_group_capacity, group_bar_bytes_s, payload_throughput, AdcStreamSpec, DigitalLinkSpec,
    Encoding,
};
use photonlink_core::linkbudget::{
    cascade, optical_ledger, rf_gain, sfdr_db, AnalysisConfig, Stage,
};
use photonlink_core::reference::*;
use photonlink_core::topology::{
    build_forward_network, build_return_network, enumerate_paths, Direction, ElementKind,
    OpticalTopology, PathElement, Role, SignalPath,
};
use photonlink_core::tradeoff::Integration;
use photonlink_core::tradeoff::{
    check_requirements, DesignVariant, Modulation, RequirementSet, Status, VariantEvidence,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const K: f64 = 1.380_649e-23;
const T0: f64 = 290.0;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let scenario = load_scenario(common::reference_path()).map_err(|e| e.to_string())?;
    let v: DesignVariant = "em-vbg-hip".parse().unwrap();
    let opts = RunOptions {
        variant: Some(Selection::One(v)),
        bandwidth_hz: None,
    };
    let report = run(Command::Analyze, &scenario, &opts).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let vr = report.variant(&v).ok_or("variant missing from report")?;
    let worst = vr
        .paths
        .iter()
        .filter(|m| m.kind == SignalKind::Analog)
        .max_by(|a, b| a.noise_figure_db.total_cmp(&b.noise_figure_db))
        .ok_or("no analog paths")?;
    let sfdr = worst.sfdr_db.ok_or("SFDR not computed")?;
    let row = vr.compliance.row("sfdr_min").ok_or("no sfdr_min row")?;
    ensure(worst.iip3_dbm == Some(20.0), || {
        format!("iip3 {:?}", worst.iip3_dbm)
    })?;
    ensure((worst.noise_figure_db - 30.0).abs() < 1e-3, || {
        format!("NF {} is not the 30 dB reference", worst.noise_figure_db)
    })?;
    ensure(worst.sfdr_bandwidth_hz == 10e6, || {
        format!("B {}", worst.sfdr_bandwidth_hz)
    })?;
    ensure((sfdr - 62.67).abs() <= 0.01, || {
        format!("SFDR {sfdr:.4} dB")
    })?;
    ensure(row.status == Status::Pass, || {
        format!("sfdr_min row {:?}", row.status)
    })?;
    ensure(elapsed < Duration::from_secs(1), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "SFDR {sfdr:.4} dB at NF {:.4} dB, sfdr_min PASS, {:.0} ms",
        worst.noise_figure_db,
        elapsed.as_secs_f64() * 1e3
    ))
}

fn criterion_2() -> Outcome {
    let req = RequirementSet::default();
    let v = DesignVariant::new(Modulation::Dm, GratingTechnology::Vbg, Integration::Hip);
    let classify = |deg: f64| {
        let e = VariantEvidence {
            nf_degradation_db: Some(deg),
            ..Default::default()
        };
        let r = check_requirements(&e, v, &req);
        let s = |name| r.row(name).map(|row| row.status);
        (s("nf_degradation_strict"), s("nf_degradation_relaxed"))
    };
    let p = Some(Status::Pass);
    let f = Some(Status::Fail);
    for (deg, want) in [
        (0.9, (p, p)),
        (1.8, (f, p)),
        (1.0, (p, p)),
        (2.0, (f, p)),
        (2.0001, (f, f)),
    ] {
        let got = classify(deg);
        ensure(got == want, || {
            format!("{deg} dB classified {got:?}, expected {want:?}")
        })?;
    }
    Ok("0.9 dB strict+relaxed PASS, 1.8 dB strict FAIL relaxed PASS, 1.0 dB inclusive".into())
}

fn criterion_3() -> Outcome {
    let path = common::reference_path();
    let path = path.to_str().unwrap();
    let mut first: Option<Vec<u8>> = None;
    for i in 0..10 {
        let out = common::photonlink(&["tradeoff", "--scenario", path, "--format", "json"]);
        ensure(out.status.code() == Some(0), || {
            format!(
                "run {i} exit {:?}: {}",
                out.status.code(),
                String::from_utf8_lossy(&out.stderr)
            )
        })?;
        match &first {
            None => first = Some(out.stdout),
            Some(f) => ensure(*f == out.stdout, || format!("run {i} differs from run 0"))?,
        }
    }
    let report: photonlink::Report =
        serde_json::from_slice(first.as_ref().unwrap()).map_err(|e| e.to_string())?;
    let feasible = report.enumeration.iter().filter(|e| e.feasible).count();
    ensure(report.enumeration.len() == 8 && feasible == 6, || {
        format!("{} variants, {feasible} feasible", report.enumeration.len())
    })?;
    let rec = report.recommendation.as_ref().ok_or("no recommendation")?;
    ensure(rec.order.len() == 6, || {
        format!("{} ranked", rec.order.len())
    })?;
    let top = rec.top().variant;
    ensure(
        top.modulation == Modulation::Dm && top.grating == GratingTechnology::Vbg,
        || format!("top variant {top}"),
    )?;
    Ok(format!(
        "6 of 8 feasible, {top} ranked first, 10 identical reports"
    ))
}

/// Output noise of a chain fed by kT0 noise, stage by stage.
fn brute_force_nf(stages: &[(f64, f64)]) -> f64 {
    let kt = K * T0;
    let mut noise = kt;
    let mut gain = 1.0;
    for &(g_db, nf_db) in stages {
        let g = 10f64.powf(g_db / 10.0);
        let f = 10f64.powf(nf_db / 10.0);
        noise = (noise + (f - 1.0) * kt) * g;
        gain *= g;
    }
    10.0 * (noise / (kt * gain)).log10()
}

fn random_library(rng: &mut ChaCha8Rng, fanout: u32) -> ComponentLibrary {
    let tech = if rng.gen_bool(0.5) {
        GratingTechnology::Vbg
    } else {
        GratingTechnology::Awg
    };
    ComponentLibrary::from_components([
        Component::new(
            "laser_dm",
            laser(
                rng.gen_range(1e-3..0.1),
                rng.gen_range(-170.0..-150.0),
                Some(rng.gen_range(0.1..0.6)),
            ),
        ),
        Component::new(
            "laser_digital",
            laser(rng.gen_range(1e-3..0.01), -150.0, Some(0.2)),
        ),
        Component::new("mod_dm", direct_modulator(20e9)),
        Component::new("mod_digital", direct_modulator(10e9)),
        Component::new(
            "wdm_vbg",
            mux(
                tech,
                rng.gen_range(0.5..5.0),
                rng.gen_range(20.0..35.0),
                rng.gen_range(35.0..50.0),
            ),
        ),
        Component::new("edfa", {
            let max = rng.gen_range(10.0..30.0);
            edfa(rng.gen_range(0.0..max), max, rng.gen_range(3.0..7.0))
        }),
        Component::new("splitter", splitter(fanout, rng.gen_range(0.0..2.0))),
        Component::new("smf", fiber(0.0, rng.gen_range(0.15..0.5))),
        Component::new(
            "pd_analog",
            detector(SignalKind::Analog, rng.gen_range(0.5..1.0), 20e9),
        ),
        Component::new("pd_digital", detector(SignalKind::Digital, 0.9, 10e9)),
    ])
    .expect("random library is valid")
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
    let mut worst_nf = 0.0f64;
    for _ in 0..100 {
        let n = rng.gen_range(2..=4);
        let stages: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.gen_range(-20.0..40.0), rng.gen_range(0.0..20.0)))
            .collect();
        let st: Vec<Stage> = stages.iter().map(|&(g, f)| Stage::new(g, f)).collect();
        let err = (cascade(&st).noise_figure_db - brute_force_nf(&stages)).abs();
        worst_nf = worst_nf.max(err);
        ensure(err <= 1e-9, || {
            format!("cascade {stages:?} off by {err:e} dB")
        })?;
    }

    let mut checked = 0usize;
    let mut worst_ledger = 0.0f64;
    let mut ledger_ok = |p: &SignalPath| -> Result<(), String> {
        let l = optical_ledger(p);
        let sum: f64 = l.entries.iter().map(|e| e.delta_db).sum();
        let err = (l.end_dbm() - (l.start_dbm + sum)).abs();
        worst_ledger = worst_ledger.max(err);
        checked += 1;
        ensure(err <= 1e-12, || {
            format!("ledger of {} off by {err:e} dB", p.channel)
        })
    };
    for _ in 0..25 {
        let n = [1u32, 4, 8, 16][rng.gen_range(0..4)];
        let channels = rng.gen_range(1..=8);
        let lib = random_library(&mut rng, n);
        let mut plan = forward_plan(channels);
        plan.trunk.lengths_m = vec![rng.gen_range(0.0..20_000.0)];
        plan.drops.lengths_m = (0..n).map(|_| rng.gen_range(0.0..5_000.0)).collect();
        let t = build_forward_network(n, &plan, &lib).map_err(|e| e.to_string())?;
        for p in enumerate_paths(&t).map_err(|e| e.to_string())? {
            ledger_ok(&p)?;
        }
    }
    let scenario = load_scenario(common::reference_path()).map_err(|e| e.to_string())?;
    let report =
        run(Command::Analyze, &scenario, &RunOptions::default()).map_err(|e| e.to_string())?;
    for v in &report.variants {
        for m in &v.paths {
            let l = &m.optical_ledger;
            let sum: f64 = l.entries.iter().map(|e| e.delta_db).sum();
            let err = (l.end_dbm() - (l.start_dbm + sum)).abs();
            worst_ledger = worst_ledger.max(err);
            checked += 1;
            ensure(err <= 1e-12, || {
                format!("{} ledger of {} off by {err:e} dB", v.variant, m.channel)
            })?;
        }
    }
    Ok(format!(
        "100 cascades, worst NF error {worst_nf:.1e} dB; {checked} ledgers, worst {worst_ledger:.1e} dB"
    ))
}

fn slope_path(rng: &mut ChaCha8Rng, extra_db: f64) -> (SignalPath, SignalPath) {
    let el = |i: usize, kind, spec| PathElement {
        id: format!("e{i}"),
        kind,
        component: format!("c{i}"),
        jitter_rms_s: 0.0,
        spec,
    };
    let demux_db = rng.gen_range(0.0..6.0);
    let base = |demux: f64, rng: &mut ChaCha8Rng| SignalPath {
        channel: "a0".into(),
        kind: SignalKind::Analog,
        direction: Direction::Forward,
        plane: "shared".into(),
        wavelength_nm: 1550.0,
        source: "otxc".into(),
        destination: "orxc-00".into(),
        elements: vec![
            el(
                0,
                ElementKind::Laser,
                laser(
                    rng.gen_range(1e-3..0.2),
                    -160.0,
                    Some(rng.gen_range(0.05..1.0)),
                ),
            ),
            el(1, ElementKind::Modulator, direct_modulator(20e9)),
            el(
                2,
                ElementKind::Mux,
                mux(GratingTechnology::Vbg, rng.gen_range(0.0..6.0), 30.0, 45.0),
            ),
            el(
                3,
                ElementKind::Fiber,
                fiber(rng.gen_range(0.0..20_000.0), 0.2),
            ),
            el(
                4,
                ElementKind::Edfa,
                edfa(rng.gen_range(0.0..30.0), 30.0, 5.0),
            ),
            el(
                5,
                ElementKind::Splitter,
                splitter(rng.gen_range(1..64), rng.gen_range(0.0..2.0)),
            ),
            el(
                6,
                ElementKind::Demux,
                mux(GratingTechnology::Vbg, demux, 30.0, 45.0),
            ),
            el(
                7,
                ElementKind::Detector,
                detector(SignalKind::Analog, rng.gen_range(0.5..1.0), 20e9),
            ),
        ],
    };
    // Same draws for both paths; only the demux loss differs.
    let mut r2 = rng.clone();
    let a = base(demux_db, rng);
    let b = base(demux_db + extra_db, &mut r2);
    (a, b)
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    let cfg = AnalysisConfig::default();
    let (mut e_gain, mut e_nf, mut e_iip3) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..1000 {
        let extra = rng.gen_range(0.01..10.0);
        let (a, b) = slope_path(&mut rng, extra);
        let ga = rf_gain(&a, ModulationScheme::Direct, &cfg).map_err(|e| e.to_string())?;
        let gb = rf_gain(&b, ModulationScheme::Direct, &cfg).map_err(|e| e.to_string())?;
        let slope = (gb - ga) / extra;
        e_gain = e_gain.max((slope + 2.0).abs());

        let iip3 = rng.gen_range(0.0..40.0);
        let nf = rng.gen_range(0.0..40.0);
        let bw = rng.gen_range(1e6..1e8);
        let d = rng.gen_range(0.01..5.0);
        let s0 = sfdr_db(iip3, nf, bw, T0);
        let d_nf = (sfdr_db(iip3, nf + d, bw, T0) - s0) / d;
        let d_iip3 = (sfdr_db(iip3 + d, nf, bw, T0) - s0) / d;
        e_nf = e_nf.max((d_nf + 2.0 / 3.0).abs());
        e_iip3 = e_iip3.max((d_iip3 - 2.0 / 3.0).abs());
        ensure(e_gain <= 1e-9 && e_nf <= 1e-9 && e_iip3 <= 1e-9, || {
            format!("draw {i}: gain slope {slope}, dSFDR/dNF {d_nf}, dSFDR/dIIP3 {d_iip3}")
        })?;
    }
    Ok(format!(
        "1000 draws; worst deviations: gain {e_gain:.1e}, SFDR/NF {e_nf:.1e}, SFDR/IIP3 {e_iip3:.1e}"
    ))
}

fn criterion_6() -> Outcome {
    let lib = network_library();
    let t = build_return_network(16, &return_plan(), &lib).map_err(|e| e.to_string())?;
    let groups = t.return_groups();
    ensure(groups.len() == 4, || format!("{} groups", groups.len()))?;
    ensure(groups.iter().all(|g| g.channels.len() == 4), || {
        "group of wrong size".into()
    })?;

    let link = DigitalLinkSpec::new(3.125e9, Encoding::EightBTenB, 0.0);
    let payload = payload_throughput(&link);
    ensure((payload - 312.5e6).abs() < 1e-6, || {
        format!("payload {payload} B/s")
    })?;
    ensure(group_bar_bytes_s() == 125e6, || {
        format!("bar {}", group_bar_bytes_s())
    })?;
    let adc = AdcStreamSpec {
        sample_rate_sps: 7.8125e6,
        bits_per_sample: 16,
        complex: true,
        channels_per_group: 4,
    };
    let cap = check_group_capacity(&groups, &link, &adc, group_bar_bytes_s());
    ensure(cap.groups.len() == 4 && cap.all_pass(), || {
        "group capacity failed".into()
    })?;

    ensure(
        build_return_network(6, &return_plan(), &lib).is_err(),
        || "N=6 return network was built".into(),
    )?;
    let rejected = parse_scenario(
        serde_json::to_string(&common::resized(6, true))
            .unwrap()
            .as_bytes(),
    );
    let msg = match rejected {
        Ok(_) => return Err("N=6 scenario was accepted".into()),
        Err(e) => e.to_string(),
    };
    ensure(msg.contains("divisible by 4"), || {
        format!("unexpected rejection: {msg}")
    })?;

    let scenario = load_scenario(common::reference_path()).map_err(|e| e.to_string())?;
    let report =
        run(Command::Analyze, &scenario, &RunOptions::default()).map_err(|e| e.to_string())?;
    let rc = report.return_chain.as_ref().ok_or("no return chain")?;
    let row = report.variants[0]
        .compliance
        .row("throughput_per_group")
        .ok_or("no throughput row")?;
    ensure(
        rc.groups == 4 && row.status == Status::Pass && row.value == Some(312.5),
        || {
            format!(
                "scenario: {} groups, throughput row {:?} {:?}",
                rc.groups, row.value, row.status
            )
        },
    )?;
    Ok("4 groups at N=16, 312.5 MB/s vs 125 MB/s PASS, N=6 rejected".into())
}

/// (channel, detector node) pairs reachable over fiber edges carrying the channel.
fn oracle_pairs(t: &OpticalTopology) -> BTreeSet<(String, String)> {
    let mut next: BTreeMap<(&str, &str), Vec<&str>> = BTreeMap::new();
    for e in t.edges.iter().filter(|e| e.is_fiber()) {
        for ch in &e.channels {
            next.entry((e.from.as_str(), ch.as_str()))
                .or_default()
                .push(e.to.as_str());
        }
    }
    let mut out = BTreeSet::new();
    for ch in t.wavelength_plan.keys() {
        for src in t.nodes.iter().filter(|n| {
            n.attachments
                .iter()
                .any(|a| a.role == Role::Laser && a.channel.as_deref() == Some(ch))
        }) {
            let mut queue = VecDeque::from([src.id.as_str()]);
            let mut seen = BTreeSet::from([src.id.as_str()]);
            while let Some(at) = queue.pop_front() {
                let node = t.node(at).unwrap();
                if node
                    .attachments
                    .iter()
                    .any(|a| a.role == Role::Detector && a.channel.as_deref() == Some(ch))
                {
                    out.insert((ch.clone(), at.to_string()));
                }
                for &n in next.get(&(at, ch.as_str())).into_iter().flatten() {
                    if seen.insert(n) {
                        queue.push_back(n);
                    }
                }
            }
        }
    }
    out
}

fn criterion_7() -> Outcome {
    for n in [1u32, 4, 8, 16] {
        let scenario = parse_scenario(
            serde_json::to_string(&common::resized(n, false))
                .unwrap()
                .as_bytes(),
        )
        .map_err(|e| format!("N={n}: {e}"))?;
        let channels = scenario.file.topology.forward.channels.len();
        for (v, _) in scenario.variants.values() {
            let plan = scenario.forward_plan_for(v).unwrap();
            let t =
                build_forward_network(n, &plan, &scenario.library).map_err(|e| e.to_string())?;
            let paths = enumerate_paths(&t).map_err(|e| e.to_string())?;
            let engine: BTreeSet<(String, String)> = paths
                .iter()
                .map(|p| (p.channel.clone(), p.destination.clone()))
                .collect();
            ensure(paths.len() == channels * n as usize, || {
                format!(
                    "N={n} {v}: {} paths, expected {}",
                    paths.len(),
                    channels * n as usize
                )
            })?;
            ensure(
                engine.len() == paths.len() && engine == oracle_pairs(&t),
                || format!("N={n} {v}: paths disagree with the traversal oracle"),
            )?;
        }
    }
    let start = Instant::now();
    let scenario = load_scenario(common::reference_path()).map_err(|e| e.to_string())?;
    let report =
        run(Command::Tradeoff, &scenario, &RunOptions::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(report.forward_path_count() == 128, || {
        format!("{} paths", report.forward_path_count())
    })?;
    ensure(elapsed < Duration::from_secs(5), || {
        format!("full analysis took {elapsed:?}")
    })?;
    Ok(format!(
        "paths = channels x N for N in 1,4,8,16 (oracle agrees); N=16/8-channel analysis of {} variants in {:.0} ms",
        report.variants.len(),
        elapsed.as_secs_f64() * 1e3
    ))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("SFDR reproduction", criterion_1),
        ("NF compliance classification", criterion_2),
        ("feasibility and recommendation", criterion_3),
        ("Friis and ledger oracles", criterion_4),
        ("slope identities", criterion_5),
        ("grouping and throughput", criterion_6),
        ("topology scaling", criterion_7),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({why})", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
