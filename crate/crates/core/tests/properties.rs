use photonlink_core::components::{ComponentSpec, GratingTechnology, ModulationScheme, SignalKind};
use photonlink_core::digitalpath::{
    check_group_capacity, payload_throughput, required_line_rate, AdcStreamSpec, DigitalLinkSpec,
    Encoding,
};
use photonlink_core::linkbudget::{
    cascade, crosstalk_db, noise_figure, optical_ledger, rf_gain, sfdr_db, snr_degradation,
    AnalysisConfig, Stage,
};
use photonlink_core::reference::*;
use photonlink_core::topology::{Direction, ElementKind, PathElement, ReturnGroup, SignalPath};
use proptest::prelude::*;

const T: f64 = 290.0;
const K: f64 = 1.380_649e-23;

fn el(i: usize, kind: ElementKind, spec: ComponentSpec) -> PathElement {
    PathElement {
        id: format!("e{i}"),
        kind,
        component: format!("c{i}"),
        jitter_rms_s: 0.0,
        spec,
    }
}

#[derive(Debug, Clone)]
struct PathParams {
    power_w: f64,
    rin: f64,
    slope: f64,
    mux_db: f64,
    trunk_km: f64,
    edfa_gain: f64,
    edfa_max: f64,
    edfa_nf: f64,
    fanout: u32,
    excess: f64,
    drop_km: f64,
    demux_db: f64,
    responsivity: f64,
    dark: f64,
}

fn params() -> impl Strategy<Value = PathParams> {
    (
        (1e-3..0.2f64, -170.0..-140.0f64, 0.05..1.0f64, 0.0..6.0f64),
        (0.0..20.0f64, 0.0..40.0f64, 10.0..35.0f64, 3.0..8.0f64),
        (1u32..64, 0.0..2.0f64, 0.0..5.0f64, 0.0..6.0f64),
        (0.5..1.0f64, 0.0..1e-7f64),
    )
        .prop_map(|(a, b, c, d)| PathParams {
            power_w: a.0,
            rin: a.1,
            slope: a.2,
            mux_db: a.3,
            trunk_km: b.0,
            edfa_gain: b.1,
            edfa_max: b.2,
            edfa_nf: b.3,
            fanout: c.0,
            excess: c.1,
            drop_km: c.2,
            demux_db: c.3,
            responsivity: d.0,
            dark: d.1,
        })
}

fn build(p: &PathParams) -> SignalPath {
    let mut pd = detector(SignalKind::Analog, p.responsivity, 20e9);
    if let ComponentSpec::Photodetector(d) = &mut pd {
        d.dark_current_a = p.dark;
    }
    SignalPath {
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
                laser(p.power_w, p.rin, Some(p.slope)),
            ),
            el(1, ElementKind::Modulator, direct_modulator(20e9)),
            el(
                2,
                ElementKind::Mux,
                mux(GratingTechnology::Vbg, p.mux_db, 30.0, 45.0),
            ),
            el(3, ElementKind::Fiber, fiber(p.trunk_km * 1000.0, 0.2)),
            el(
                4,
                ElementKind::Edfa,
                edfa(p.edfa_gain, p.edfa_max, p.edfa_nf),
            ),
            el(5, ElementKind::Splitter, splitter(p.fanout, p.excess)),
            el(6, ElementKind::Fiber, fiber(p.drop_km * 1000.0, 0.2)),
            el(
                7,
                ElementKind::Demux,
                mux(GratingTechnology::Vbg, p.demux_db, 30.0, 45.0),
            ),
            el(8, ElementKind::Detector, pd),
        ],
    }
}

fn with_extra_loss(p: &SignalPath, db: f64) -> SignalPath {
    let mut q = p.clone();
    if let ComponentSpec::MuxDemux(m) = &mut q.elements[7].spec {
        m.insertion_loss_db += db;
    }
    q
}

/// Output noise of a chain computed stage by stage at the reference temperature.
fn brute_force_nf(stages: &[(f64, f64)]) -> f64 {
    let kt = K * T;
    let mut noise = kt;
    for &(g_db, nf_db) in stages {
        let g = 10f64.powf(g_db / 10.0);
        let f = 10f64.powf(nf_db / 10.0);
        noise = (noise + kt * (f - 1.0)) * g;
    }
    let g_total: f64 = stages.iter().map(|s| 10f64.powf(s.0 / 10.0)).product();
    10.0 * (noise / (kt * g_total)).log10()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn ledger_conserves(p in params()) {
        let l = optical_ledger(&build(&p));
        let sum: f64 = l.entries.iter().map(|e| e.delta_db).sum();
        prop_assert!((l.end_dbm() - (l.start_dbm + sum)).abs() <= 1e-12);
    }

    #[test]
    fn gain_falls_two_db_per_optical_db(p in params(), extra in 0.0..10.0f64) {
        let cfg = AnalysisConfig::default();
        let path = build(&p);
        let a = rf_gain(&path, ModulationScheme::Direct, &cfg).unwrap();
        let b = rf_gain(&with_extra_loss(&path, extra), ModulationScheme::Direct, &cfg).unwrap();
        prop_assert!(((a - b) - 2.0 * extra).abs() < 1e-9);
    }

    #[test]
    fn sfdr_slopes(iip3 in -10.0..40.0f64, nf in 0.0..50.0f64, d in 0.01..5.0f64, bw in 1e3..1e9f64) {
        let base = sfdr_db(iip3, nf, bw, T);
        prop_assume!(base > 0.0 && sfdr_db(iip3, nf + d, bw, T) > 0.0);
        prop_assert!((sfdr_db(iip3 + d, nf, bw, T) - base - 2.0 / 3.0 * d).abs() < 1e-9);
        prop_assert!((base - sfdr_db(iip3, nf + d, bw, T) - 2.0 / 3.0 * d).abs() < 1e-9);
        prop_assert!(base >= 0.0);
    }

    #[test]
    fn nf_monotone_in_noise_sources(p in params(), d in 0.0..10.0f64) {
        let cfg = AnalysisConfig::default();
        let base = noise_figure(&build(&p), ModulationScheme::Direct, &cfg).unwrap().db;
        for q in [
            PathParams { rin: p.rin + d, ..p.clone() },
            PathParams { edfa_nf: p.edfa_nf + d, ..p.clone() },
            PathParams { dark: p.dark * (1.0 + d) + 1e-12, ..p.clone() },
        ] {
            let nf = noise_figure(&build(&q), ModulationScheme::Direct, &cfg).unwrap().db;
            prop_assert!(nf >= base - 1e-12, "{nf} < {base}");
        }
    }

    #[test]
    fn friis_matches_brute_force(stages in prop::collection::vec((-20.0..40.0f64, 0.0..20.0f64), 2..=4)) {
        let st: Vec<Stage> = stages.iter().map(|&(g, f)| Stage::new(g, f)).collect();
        let engine = cascade(&st).noise_figure_db;
        prop_assert!((engine - brute_force_nf(&stages)).abs() < 1e-9);
    }

    #[test]
    fn snr_identity(snr in -20.0..120.0f64, nf in 0.0..60.0f64) {
        let (out, deg) = snr_degradation(snr, nf);
        // exact up to one rounding of the subtraction
        prop_assert!((out + deg - snr).abs() <= 4.0 * f64::EPSILON * snr.abs().max(nf));
        prop_assert_eq!(deg, nf);
    }

    #[test]
    fn crosstalk_at_least_largest_term(n in 2usize..16, me in 0usize..16, adj in 10.0..50.0f64, gap in 0.0..30.0f64) {
        let me = me % n;
        let co: Vec<(String, f64)> = (0..n).map(|i| (format!("c{i:02}"), 1550.0 + 0.8 * i as f64)).collect();
        let x = crosstalk_db(&co[me].0, &co, adj, adj + gap).unwrap();
        let largest = if n > 1 { -adj.min(adj + gap) } else { f64::NEG_INFINITY };
        prop_assert!(x >= largest - 1e-12);
    }

    #[test]
    fn analysis_is_pure(p in params()) {
        let cfg = AnalysisConfig { iip3_dbm: Some(18.0), ..Default::default() };
        let path = build(&p);
        let a = photonlink_core::linkbudget::analyze_path(&path, ModulationScheme::Direct, &cfg).unwrap();
        let b = photonlink_core::linkbudget::analyze_path(&path, ModulationScheme::Direct, &cfg).unwrap();
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn payload_linear(rate in 1e8..1e11f64, k in 0.1..10.0f64, framing in 0.0..0.5f64) {
        let a = payload_throughput(&DigitalLinkSpec::new(rate, Encoding::SixtyFourBSixtySixB, framing));
        let b = payload_throughput(&DigitalLinkSpec::new(rate * k, Encoding::SixtyFourBSixtySixB, framing));
        prop_assert!((b - k * a).abs() <= 1e-9 * b.abs());
    }

    #[test]
    fn required_rate_never_under_provisions(sps in 1e5..1e9f64, bits in 1u32..32, complex: bool, ch in 1u32..16, framing in 0.0..0.5f64) {
        let s = AdcStreamSpec { sample_rate_sps: sps, bits_per_sample: bits, complex, channels_per_group: 4 };
        for enc in [Encoding::EightBTenB, Encoding::SixtyFourBSixtySixB] {
            let r = required_line_rate(&s, ch, enc, framing);
            let payload_bits = payload_throughput(&DigitalLinkSpec::new(r, enc, framing)) * 8.0;
            let need = s.channel_bit_rate() * f64::from(ch);
            prop_assert!(payload_bits >= need * (1.0 - 1e-12));
        }
    }

    #[test]
    fn group_compliance_monotone(lo in 1e8..5e9f64, k in 1.0..4.0f64) {
        let g = vec![ReturnGroup { index: 0, transmitter: "dotxc-00".into(), channels: vec!["g00c0".into()] }];
        let s = AdcStreamSpec { sample_rate_sps: 1e6, bits_per_sample: 16, complex: false, channels_per_group: 4 };
        let a = check_group_capacity(&g, &DigitalLinkSpec::new(lo, Encoding::EightBTenB, 0.0), &s, 125e6);
        let b = check_group_capacity(&g, &DigitalLinkSpec::new(lo * k, Encoding::EightBTenB, 0.0), &s, 125e6);
        prop_assert!(!a.all_pass() || b.all_pass());
    }
}
