//! Physical constants, default kaon parameters and SI <-> natural unit
//! conversions.
//!
//! Everything inside the crate is computed in natural units with
//! ħ = c = 1 and energies in MeV, so lengths and times are in MeV⁻¹ and
//! Newton's constant is in MeV⁻². SI values only appear at the edges
//! (config files, CLI flags, reports).

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{check_positive, invalid, Error, Result};

/// Reduced Planck constant in J·s (exact since the 2019 SI redefinition).
pub const HBAR_SI: f64 = 1.054_571_817e-34;
/// Speed of light in m/s (exact).
pub const C_SI: f64 = 299_792_458.0;
/// Newtonian constant of gravitation in m³·kg⁻¹·s⁻² (CODATA 2018).
pub const G_SI: f64 = 6.674_30e-11;
/// One MeV in joules (exact).
pub const MEV_IN_J: f64 = 1.602_176_634e-13;

/// ħ in MeV·s.
pub const HBAR_MEV_S: f64 = HBAR_SI / MEV_IN_J;
/// ħc in MeV·m.
pub const HBARC_MEV_M: f64 = HBAR_SI * C_SI / MEV_IN_J;
/// Mass of one MeV/c² in kg.
pub const MEV_IN_KG: f64 = MEV_IN_J / (C_SI * C_SI);
/// Newton's constant in natural units (MeV⁻²), i.e. 1/M_Planck².
pub const G_NATURAL: f64 = G_SI * MEV_IN_KG * MEV_IN_KG / (HBAR_SI * C_SI);

/// The three dimensional constants of the problem, in SI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub c: f64,
    pub g: f64,
}

impl PhysicalConstants {
    pub const fn codata() -> Self {
        Self {
            hbar: HBAR_SI,
            c: C_SI,
            g: G_SI,
        }
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::codata()
    }
}

/// Dimensions that can cross the SI / natural-unit boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Dimension {
    /// m <-> MeV⁻¹
    Length,
    /// s <-> MeV⁻¹
    Time,
    /// kg <-> MeV
    Mass,
    /// J <-> MeV
    Energy,
    /// J·s <-> ħ
    Action,
}

impl Dimension {
    pub const ALL: [Dimension; 5] = [
        Dimension::Length,
        Dimension::Time,
        Dimension::Mass,
        Dimension::Energy,
        Dimension::Action,
    ];

    /// SI value of one natural unit of this dimension.
    pub const fn si_per_natural(self) -> f64 {
        match self {
            Dimension::Length => HBARC_MEV_M,
            Dimension::Time => HBAR_MEV_S,
            Dimension::Mass => MEV_IN_KG,
            Dimension::Energy => MEV_IN_J,
            Dimension::Action => HBAR_SI,
        }
    }

    pub const fn as_str(self) -> &'static str {
        match self {
            Dimension::Length => "length",
            Dimension::Time => "time",
            Dimension::Mass => "mass",
            Dimension::Energy => "energy",
            Dimension::Action => "action",
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Dimension {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "length" => Ok(Dimension::Length),
            "time" => Ok(Dimension::Time),
            "mass" => Ok(Dimension::Mass),
            "energy" => Ok(Dimension::Energy),
            "action" => Ok(Dimension::Action),
            other => Err(Error::UnknownDimension(other.to_string())),
        }
    }
}

/// Converts an SI quantity into natural units (ħ = c = 1, MeV).
pub fn to_natural(value: f64, dimension: Dimension) -> f64 {
    value / dimension.si_per_natural()
}

/// Converts a natural-unit quantity back to SI.
pub fn from_natural(value: f64, dimension: Dimension) -> f64 {
    value * dimension.si_per_natural()
}

/// Decay width (MeV) of a state with the given mean lifetime in seconds.
pub fn width_from_lifetime(tau_seconds: f64) -> f64 {
    HBAR_MEV_S / tau_seconds
}

/// Mean lifetime in seconds for a decay width in MeV.
pub fn lifetime_from_width(width: f64) -> f64 {
    HBAR_MEV_S / width
}

/// Which value to use for the K_L - K_S mass difference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DeltaMScale {
    /// Measured value, 3.484e-12 MeV.
    #[default]
    Physical,
    /// The bare "3.483 MeV" figure without the 10⁻¹² factor. Only useful
    /// to reproduce that number; it makes oscillations absurdly fast.
    Unscaled,
}

/// Measured kaon mass in MeV.
pub const KAON_MASS_MEV: f64 = 497.614;
/// Mass difference m_L - m_S in MeV.
pub const KAON_DELTA_M_MEV: f64 = 3.484e-12;
/// The unscaled mass difference figure in MeV.
pub const KAON_DELTA_M_UNSCALED_MEV: f64 = 3.483;
/// K_S mean lifetime in s.
pub const TAU_S_SECONDS: f64 = 8.954e-11;
/// K_L mean lifetime in s.
pub const TAU_L_SECONDS: f64 = 5.116e-8;
/// |ε| for neutral kaons.
pub const EPSILON_MODULUS: f64 = 2.228e-3;
/// arg ε in degrees (superweak phase).
pub const EPSILON_PHASE_DEG: f64 = 43.52;
/// Conventional CSL collapse rate λ = γ / (4π r_C²)^{3/2} in s⁻¹.
pub const CSL_LAMBDA_PER_S: f64 = 1e-16;
/// Conventional CSL correlation length in m.
pub const CSL_R_C_M: f64 = 1e-7;
/// CSL reference mass (nucleon) in MeV.
pub const CSL_M0_MEV: f64 = 938.272;

/// Parameters of the neutral kaon two-state system, in natural units.
///
/// Widths are stored as energies (Γ = ħ/τ). The CSL strength `csl_gamma`
/// has dimension length³/time, which is MeV⁻² here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KaonParameters {
    /// Kaon mass m_K (MeV).
    pub m_k: f64,
    /// Mass difference Δm = m_L - m_S (MeV).
    pub delta_m: f64,
    /// K_S width Γ_S (MeV).
    pub gamma_s: f64,
    /// K_L width Γ_L (MeV).
    pub gamma_l: f64,
    /// CP violation in mixing.
    pub epsilon: Complex64,
    /// CSL reference mass m₀ (MeV).
    pub csl_m0: f64,
    /// CSL strength γ (MeV⁻²).
    pub csl_gamma: f64,
    /// CSL correlation length r_C (MeV⁻¹).
    pub csl_r_c: f64,
}

/// Keys accepted in parameter config files, in canonical order.
pub const CONFIG_KEYS: [&str; 9] = [
    "m_K_MeV",
    "delta_m_MeV",
    "tau_S_s",
    "tau_L_s",
    "eps_re",
    "eps_im",
    "csl_gamma",
    "csl_rC_m",
    "csl_m0_MeV",
];

/// PDG-style defaults with the physical Δm.
pub fn default_kaon_parameters() -> KaonParameters {
    KaonParameters::kaon(DeltaMScale::Physical)
}

impl Default for KaonParameters {
    fn default() -> Self {
        default_kaon_parameters()
    }
}

impl KaonParameters {
    pub fn kaon(scale: DeltaMScale) -> Self {
        let delta_m = match scale {
            DeltaMScale::Physical => KAON_DELTA_M_MEV,
            DeltaMScale::Unscaled => KAON_DELTA_M_UNSCALED_MEV,
        };
        let r_c_si = CSL_R_C_M;
        let gamma_si = CSL_LAMBDA_PER_S * 8.0 * PI.powf(1.5) * r_c_si.powi(3);
        Self {
            m_k: KAON_MASS_MEV,
            delta_m,
            gamma_s: width_from_lifetime(TAU_S_SECONDS),
            gamma_l: width_from_lifetime(TAU_L_SECONDS),
            epsilon: Complex64::from_polar(EPSILON_MODULUS, EPSILON_PHASE_DEG.to_radians()),
            csl_m0: CSL_M0_MEV,
            csl_gamma: csl_gamma_to_natural(gamma_si),
            csl_r_c: to_natural(r_c_si, Dimension::Length),
        }
    }

    /// Mean width Γ = (Γ_S + Γ_L)/2.
    pub fn gamma_mean(&self) -> f64 {
        0.5 * (self.gamma_s + self.gamma_l)
    }

    /// ΔΓ = Γ_L - Γ_S (negative for kaons).
    pub fn delta_gamma(&self) -> f64 {
        self.gamma_l - self.gamma_s
    }

    /// K_S lifetime in natural time units.
    pub fn tau_s(&self) -> f64 {
        1.0 / self.gamma_s
    }

    /// K_L lifetime in natural time units.
    pub fn tau_l(&self) -> f64 {
        1.0 / self.gamma_l
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("m_k", self.m_k)?;
        check_positive("delta_m", self.delta_m)?;
        if !(self.gamma_s >= 0.0 && self.gamma_l >= 0.0) {
            return Err(invalid("gamma", "decay widths must be non-negative"));
        }
        if !(self.epsilon.norm() < 1.0) {
            return Err(invalid("epsilon", format!("|epsilon| must be < 1, got {}", self.epsilon.norm())));
        }
        check_positive("csl_m0", self.csl_m0)?;
        check_positive("csl_r_c", self.csl_r_c)?;
        if !(self.csl_gamma >= 0.0) {
            return Err(invalid("csl_gamma", "must be non-negative"));
        }
        Ok(())
    }

    /// Parses a `key=value` config on top of the defaults. Blank lines and
    /// lines starting with `#` are ignored.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut params = Self::default();
        params.apply_config_str(text)?;
        Ok(params)
    }

    pub fn apply_config_str(&mut self, text: &str) -> Result<()> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::MalformedConfig {
                line: idx + 1,
                reason: format!("expected key=value, got `{line}`"),
            })?;
            let key = key.trim();
            let value: f64 = value.trim().parse().map_err(|_| Error::MalformedConfig {
                line: idx + 1,
                reason: format!("value for `{key}` is not a number: `{}`", value.trim()),
            })?;
            self.set(key, value)?;
        }
        self.validate()
    }

    /// Sets one parameter from its config key, using the config's SI units.
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        match key {
            "m_K_MeV" => self.m_k = value,
            "delta_m_MeV" => self.delta_m = value,
            "tau_S_s" => self.gamma_s = width_from_lifetime(value),
            "tau_L_s" => self.gamma_l = width_from_lifetime(value),
            "eps_re" => self.epsilon.re = value,
            "eps_im" => self.epsilon.im = value,
            "csl_gamma" => self.csl_gamma = csl_gamma_to_natural(value),
            "csl_rC_m" => self.csl_r_c = to_natural(value, Dimension::Length),
            "csl_m0_MeV" => self.csl_m0 = value,
            other => return Err(Error::UnknownConfigKey(other.to_string())),
        }
        Ok(())
    }

    /// Current value of a config key, in the config's SI units.
    pub fn get(&self, key: &str) -> Result<f64> {
        Ok(match key {
            "m_K_MeV" => self.m_k,
            "delta_m_MeV" => self.delta_m,
            "tau_S_s" => lifetime_from_width(self.gamma_s),
            "tau_L_s" => lifetime_from_width(self.gamma_l),
            "eps_re" => self.epsilon.re,
            "eps_im" => self.epsilon.im,
            "csl_gamma" => csl_gamma_from_natural(self.csl_gamma),
            "csl_rC_m" => from_natural(self.csl_r_c, Dimension::Length),
            "csl_m0_MeV" => self.csl_m0,
            other => return Err(Error::UnknownConfigKey(other.to_string())),
        })
    }

    /// All config keys with their current values.
    pub fn settings(&self) -> Vec<(&'static str, f64)> {
        CONFIG_KEYS
            .iter()
            .map(|&k| (k, self.get(k).expect("canonical key")))
            .collect()
    }
}

/// CSL γ from m³/s to MeV⁻².
pub fn csl_gamma_to_natural(gamma_m3_per_s: f64) -> f64 {
    let length = Dimension::Length.si_per_natural();
    gamma_m3_per_s * Dimension::Time.si_per_natural() / (length * length * length)
}

/// CSL γ from MeV⁻² to m³/s.
pub fn csl_gamma_from_natural(gamma: f64) -> f64 {
    let length = Dimension::Length.si_per_natural();
    gamma * (length * length * length) / Dimension::Time.si_per_natural()
}
