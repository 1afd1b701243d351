//! Physical constants and dB helpers.

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Reference noise temperature, K.
pub const T0: f64 = 290.0;

/// Thermal noise density at `T0` in the conventional rounded form, dBm/Hz.
pub const THERMAL_FLOOR_DBM_HZ: f64 = -174.0;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * db_to_linear(dbm)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    linear_to_db(watts * 1e3)
}

/// Thermal noise density referenced to the rounded −174 dBm/Hz at 290 K.
pub fn thermal_floor_dbm_hz(temperature_k: f64) -> f64 {
    THERMAL_FLOOR_DBM_HZ + linear_to_db(temperature_k / T0)
}

/// Optical frequency for a vacuum wavelength in nm.
pub fn optical_frequency_hz(wavelength_nm: f64) -> f64 {
    SPEED_OF_LIGHT / (wavelength_nm * 1e-9)
}
