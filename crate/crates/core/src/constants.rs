//! Physical constants in CGS units.

/// Speed of light, cm/s.
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e10;

/// ħc in erg·cm.
pub const HBAR_C_ERG_CM: f64 = 3.161_526_773e-17;

/// ħc in MeV·cm.
pub const HBAR_C_MEV_CM: f64 = 1.973_269_804e-11;

/// Fine-structure constant e²/ħc.
pub const FINE_STRUCTURE: f64 = 1.0 / 137.036;

/// Proton rest energy in MeV.
pub const PROTON_MASS_MEV: f64 = 938.272_088_16;

pub const SECONDS_PER_DAY: f64 = 86_400.0;

/// GRW collapse rate, 1/s.
pub const GRW_LAMBDA: f64 = 1e-16;

/// GRW localization length, cm.
pub const GRW_A: f64 = 1e-5;

/// Experimental upper limit on spontaneous 0.596 MeV gamma emission in Ge,
/// counts per kg per day.
pub const GE_EMISSION_BOUND: f64 = 3e-2;
