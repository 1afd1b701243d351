//! Reference design used by tests, examples and the shipped scenarios.
//!
//! The numbers are engineering defaults chosen to be representative of
//! commercial C-band parts. They are not measured values.

use crate::components::{
    BiasPoint, Component, ComponentLibrary, ComponentSpec, EdfaSpec, FiberSpec, GratingTechnology,
    LaserSpec, ModulationScheme, ModulatorSpec, MuxDemuxSpec, PhotodetectorSpec, SignalKind,
    SplitterSpec, WavelengthWindow, DEFAULT_GROUP_INDEX,
};
use crate::topology::{
    ChannelSpec, FiberRun, ForwardPlan, ReturnChannelTemplate, ReturnPlan, DEFAULT_MIN_SPACING_NM,
};

pub fn laser(power_w: f64, rin_db_hz: f64, slope: Option<f64>) -> ComponentSpec {
    ComponentSpec::Laser(LaserSpec {
        output_power_w: power_w,
        rin_db_hz,
        wavelength_nm: 1550.0,
        slope_efficiency_w_per_a: slope,
        linewidth_tunable: false,
    })
}

pub fn direct_modulator(bandwidth_hz: f64) -> ComponentSpec {
    ComponentSpec::Modulator(ModulatorSpec {
        scheme: ModulationScheme::Direct,
        v_pi: None,
        insertion_loss_db: None,
        bias: None,
        bandwidth_hz,
    })
}

pub fn external_modulator(v_pi: f64, insertion_loss_db: f64, bandwidth_hz: f64) -> ComponentSpec {
    ComponentSpec::Modulator(ModulatorSpec {
        scheme: ModulationScheme::External,
        v_pi: Some(v_pi),
        insertion_loss_db: Some(insertion_loss_db),
        bias: Some(BiasPoint::Quadrature),
        bandwidth_hz,
    })
}

pub fn mux(
    technology: GratingTechnology,
    loss_db: f64,
    adj_db: f64,
    nonadj_db: f64,
) -> ComponentSpec {
    ComponentSpec::MuxDemux(MuxDemuxSpec {
        technology,
        insertion_loss_db: loss_db,
        channel_spacing_nm: DEFAULT_MIN_SPACING_NM,
        adjacent_isolation_db: adj_db,
        nonadjacent_isolation_db: nonadj_db,
        athermal: technology == GratingTechnology::Awg,
    })
}

pub fn edfa(gain_db: f64, max_gain_db: f64, noise_figure_db: f64) -> ComponentSpec {
    ComponentSpec::Edfa(EdfaSpec {
        gain_db,
        max_gain_db,
        noise_figure_db,
        saturation_output_power_dbm: 27.0,
    })
}

pub fn splitter(fanout: u32, excess_loss_db: f64) -> ComponentSpec {
    ComponentSpec::Splitter(SplitterSpec {
        fanout,
        excess_loss_db,
    })
}

pub fn fiber(length_m: f64, attenuation_db_per_km: f64) -> ComponentSpec {
    ComponentSpec::Fiber(FiberSpec {
        length_m,
        attenuation_db_per_km,
        group_index: DEFAULT_GROUP_INDEX,
    })
}

pub fn detector(kind: SignalKind, responsivity: f64, bandwidth_hz: f64) -> ComponentSpec {
    ComponentSpec::Photodetector(PhotodetectorSpec {
        responsivity_a_per_w: responsivity,
        saturation_power_dbm: 23.0,
        dark_current_a: 1e-9,
        bandwidth_hz,
        kind,
        sensitivity_dbm: None,
    })
}

/// Library covering both modulation schemes and both grating technologies.
pub fn network_library() -> ComponentLibrary {
    ComponentLibrary::from_components([
        Component::new("laser_dm", laser(0.01, -165.0, Some(0.3))).with_jitter(2e-13),
        Component::new("laser_em", laser(0.1, -165.0, None)).with_jitter(2e-13),
        Component::new("laser_digital", laser(0.002, -150.0, Some(0.2))).with_jitter(1e-12),
        Component::new("mod_dm", direct_modulator(20e9)),
        Component::new("mod_em", external_modulator(5.0, 5.0, 20e9)).with_jitter(1e-13),
        Component::new("mod_digital", direct_modulator(10e9)),
        Component::new("wdm_vbg", mux(GratingTechnology::Vbg, 1.5, 30.0, 45.0)),
        Component::new("wdm_awg", mux(GratingTechnology::Awg, 3.0, 27.0, 40.0)),
        Component::new("edfa", edfa(0.0, 30.0, 5.0)),
        Component::new("splitter", splitter(16, 1.0)),
        Component::new("smf", fiber(0.0, 0.2)),
        Component::new("pd_analog", detector(SignalKind::Analog, 0.8, 20e9)).with_jitter(3e-13),
        Component::new("pd_digital", detector(SignalKind::Digital, 0.9, 10e9)).with_jitter(5e-13),
    ])
    .expect("reference network library is valid")
}

/// `n` forward channels on a 0.8 nm grid from 1550 nm; the first half analog.
pub fn forward_plan(n: usize) -> ForwardPlan {
    let analog = n.div_ceil(2);
    let channels = (0..n)
        .map(|i| {
            let kind = if i < analog {
                SignalKind::Analog
            } else {
                SignalKind::Digital
            };
            let (id, laser, modulator, detector) = match kind {
                SignalKind::Analog => (format!("a{i}"), "laser_dm", "mod_dm", "pd_analog"),
                SignalKind::Digital => (
                    format!("d{}", i - analog),
                    "laser_digital",
                    "mod_digital",
                    "pd_digital",
                ),
            };
            ChannelSpec {
                id,
                kind,
                wavelength_nm: 1550.0 + 0.8 * i as f64,
                laser: laser.into(),
                modulator: modulator.into(),
                detector: detector.into(),
            }
        })
        .collect();
    ForwardPlan {
        channels,
        mux: "wdm_vbg".into(),
        otxc_edfa: None,
        fojb_edfa: "edfa".into(),
        splitter: "splitter".into(),
        demux: "wdm_vbg".into(),
        trunk: FiberRun::new("smf", vec![100.0]),
        drops: FiberRun::new("smf", vec![50.0]),
        shared_fiber: true,
        window: WavelengthWindow::WDM,
        min_spacing_nm: DEFAULT_MIN_SPACING_NM,
    }
}

pub fn return_plan() -> ReturnPlan {
    let channels = (0..4)
        .map(|k| ReturnChannelTemplate {
            wavelength_nm: 1310.0 + 0.8 * f64::from(k),
            laser: "laser_digital".into(),
            modulator: "mod_digital".into(),
            detector: "pd_digital".into(),
        })
        .collect();
    ReturnPlan {
        channels,
        mux: "wdm_vbg".into(),
        demux: "wdm_vbg".into(),
        fiber: FiberRun::new("smf", vec![80.0]),
        window: WavelengthWindow::WDM,
        min_spacing_nm: DEFAULT_MIN_SPACING_NM,
    }
}
