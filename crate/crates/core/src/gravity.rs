//! Closed-form self-gravity of a freely spreading Gaussian wave packet.
//!
//! For the free Gaussian of initial width `a` and mass `m` the density at
//! time `t` is again Gaussian with effective width
//!
//! ```text
//! a_eff(t) = a √(1 + s²),   s = ħt/(m a²)
//! ```
//!
//! and the Newtonian kernel f(t, r) = ∫ d³r' |ψ(t, r')|² / |r - r'| has the
//! closed form erf(r / a_eff)/r. The gravitational potential is
//! Φ = -G m_active f. Natural units (ħ = c = 1) throughout.

use std::f64::consts::{FRAC_2_SQRT_PI, PI};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{check_positive, check_time, invalid, Error, Result};
use crate::quadrature::integrate;
use crate::special::erf_over_x;
use crate::units::KaonParameters;

const SQRT_PI: f64 = 1.772_453_850_905_516;
/// √(2/π)
pub const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;

/// How the spatial wave function of the kaon is modelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Scenario {
    /// One spatial wave function shared by K_S and K_L (kinetic mass m_K).
    UniqueWaveFunction,
    /// K_S and K_L carry their own spatial wave functions and masses.
    DistinctWaveFunctions,
}

impl Scenario {
    pub fn from_number(n: u32) -> Result<Self> {
        match n {
            1 => Ok(Scenario::UniqueWaveFunction),
            2 => Ok(Scenario::DistinctWaveFunctions),
            other => Err(invalid("scenario", format!("must be 1 or 2, got {other}"))),
        }
    }

    pub fn number(self) -> u32 {
        match self {
            Scenario::UniqueWaveFunction => 1,
            Scenario::DistinctWaveFunctions => 2,
        }
    }

    /// k in Δm → (1 - k Δ_SN) Δm.
    pub fn delta_m_factor(self) -> f64 {
        match self {
            Scenario::UniqueWaveFunction => 1.0,
            Scenario::DistinctWaveFunctions => 2.0,
        }
    }
}

/// Free spherical Gaussian: initial width `a`, mass `m`, elapsed time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianState {
    a: f64,
    m: f64,
    t: f64,
}

impl GaussianState {
    pub fn new(a: f64, m: f64, t: f64) -> Result<Self> {
        check_positive("a", a)?;
        check_positive("m", m)?;
        check_time(t)?;
        Ok(Self { a, m, t })
    }

    pub fn width(&self) -> f64 {
        self.a
    }

    pub fn mass(&self) -> f64 {
        self.m
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn at_time(&self, t: f64) -> Result<Self> {
        Self::new(self.a, self.m, t)
    }

    pub fn with_mass(&self, m: f64) -> Result<Self> {
        Self::new(self.a, m, self.t)
    }

    /// s = ħt/(m a²)
    pub fn spreading(&self) -> f64 {
        self.t / (self.m * self.a * self.a)
    }

    /// a √(1 + s²)
    pub fn effective_width(&self) -> f64 {
        self.a * self.spreading().hypot(1.0)
    }

    /// ⟨r²⟩ = (3/2) a_eff².
    pub fn mean_square_radius(&self) -> f64 {
        let w = self.effective_width();
        1.5 * w * w
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r >= 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(invalid("r", format!("radius must be finite and non-negative, got {r}")))
    }
}

/// ψ(t, r) = (πa²)^{-3/4} (1 + is)^{-3/2} exp(-r²/(2a²(1 + is)))
pub fn free_gaussian(state: &GaussianState, r: f64) -> Result<Complex64> {
    check_radius(r)?;
    let a2 = state.a * state.a;
    let z = Complex64::new(1.0, state.spreading());
    let norm = (PI * a2).powf(-0.75);
    Ok(norm * z.powf(-1.5) * (-(r * r) / (2.0 * a2 * z)).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialMethod {
    Closed,
    Quadrature,
    MassExpansion,
    TimeExpansion,
    WidthExpansion,
}

/// A value of the kernel f (inverse length) with the method that produced it
/// and an estimate of its absolute error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PotentialEvaluation {
    pub value: f64,
    pub method: PotentialMethod,
    pub estimated_error: f64,
}

impl PotentialEvaluation {
    pub fn relative_error_to(&self, reference: f64) -> f64 {
        ((self.value - reference) / reference).abs()
    }
}

/// f(t, r) = erf(r/a_eff)/r, with f(t, 0) = 2/(√π a_eff).
pub fn potential_f_closed(state: &GaussianState, r: f64) -> Result<PotentialEvaluation> {
    check_radius(r)?;
    let w = state.effective_width();
    let value = erf_over_x(r / w) / w;
    Ok(PotentialEvaluation {
        value,
        method: PotentialMethod::Closed,
        estimated_error: 4.0 * f64::EPSILON * value,
    })
}

/// f(t, r) from its defining integral, reduced by spherical symmetry to
///
/// ```text
/// f(r) = (1/r) ∫₀^r 4πr'² ρ dr' + ∫_r^∞ 4πr' ρ dr',   ρ = |ψ|²
/// ```
///
/// with ρ taken from [`free_gaussian`]. `tol` is relative.
pub fn potential_f_quadrature(
    state: &GaussianState,
    r: f64,
    tol: f64,
) -> Result<PotentialEvaluation> {
    check_radius(r)?;
    check_positive("tol", tol)?;
    const MAX_SEGMENTS: usize = 4000;
    let density = |x: f64| free_gaussian(state, x).map(|psi| psi.norm_sqr()).unwrap_or(0.0);
    // ρ has dropped below e^{-1600} relative to the centre here
    let cutoff = r + 40.0 * state.a * (1.0 + state.spreading());

    let outer = integrate(
        |x| 4.0 * PI * x * density(x),
        r,
        cutoff,
        0.0,
        0.5 * tol,
        MAX_SEGMENTS,
    )?;
    let (value, error) = if r > 0.0 {
        let inner = integrate(
            |x| 4.0 * PI * x * x * density(x),
            0.0,
            r,
            0.0,
            0.5 * tol,
            MAX_SEGMENTS,
        )?;
        (inner.value / r + outer.value, inner.error / r + outer.error)
    } else {
        (outer.value, outer.error)
    };
    if !(error <= tol * value.abs()) {
        return Err(Error::QuadratureNonConvergence {
            estimate: error,
            tolerance: tol * value.abs(),
        });
    }
    Ok(PotentialEvaluation {
        value,
        method: PotentialMethod::Quadrature,
        estimated_error: error,
    })
}

/// Leading small-mass term 2am/(√π ħt). Needs t > 0.
pub fn potential_f_mass_expansion(state: &GaussianState, r: f64) -> Result<PotentialEvaluation> {
    check_radius(r)?;
    if state.t <= 0.0 {
        return Err(invalid("t", "mass expansion needs t > 0"));
    }
    let value = 2.0 * state.a * state.m / (SQRT_PI * state.t);
    let s2 = state.spreading().powi(2);
    let rel = 0.5 / s2 + r * r / (3.0 * state.a * state.a * s2);
    Ok(PotentialEvaluation {
        value,
        method: PotentialMethod::MassExpansion,
        estimated_error: value * rel,
    })
}

/// erf(r/a)/r - ħ² exp(-r²/a²) t²/(√π m² a⁵), accurate to O(t⁴).
pub fn potential_f_time_expansion(state: &GaussianState, r: f64) -> Result<PotentialEvaluation> {
    check_radius(r)?;
    let (a, m, t) = (state.a, state.m, state.t);
    let static_part = erf_over_x(r / a) / a;
    let correction = (-(r * r) / (a * a)).exp() * t * t / (SQRT_PI * m * m * a.powi(5));
    Ok(PotentialEvaluation {
        value: static_part - correction,
        method: PotentialMethod::TimeExpansion,
        estimated_error: correction * state.spreading().powi(2),
    })
}

/// (2/(√π a))(1 - r²/(3a²) + r⁴/(10a⁴)) - ħ²t²/(√π m² a⁵), accurate to O(a⁻⁷).
pub fn potential_f_width_expansion(state: &GaussianState, r: f64) -> Result<PotentialEvaluation> {
    check_radius(r)?;
    let (a, m, t) = (state.a, state.m, state.t);
    let x2 = (r / a).powi(2);
    let value = FRAC_2_SQRT_PI / a * (1.0 - x2 / 3.0 + x2 * x2 / 10.0)
        - t * t / (SQRT_PI * m * m * a.powi(5));
    let next = FRAC_2_SQRT_PI / a * x2.powi(3) / 42.0
        + r * r * t * t / (SQRT_PI * m * m * a.powi(7))
        + 0.75 * t.powi(4) / (SQRT_PI * m.powi(4) * a.powi(9));
    Ok(PotentialEvaluation {
        value,
        method: PotentialMethod::WidthExpansion,
        estimated_error: next,
    })
}

/// ⟨ψ|f|ψ⟩ = √(2/(πa²)) (1 + s²)^{-1/2}
pub fn expectation_f(state: &GaussianState) -> f64 {
    SQRT_2_OVER_PI / state.effective_width()
}

/// First-order expansion of ⟨ψ|f(t, r; m + Δm, a)|ψ⟩ in Δm.
///
/// The Δm coefficient is the m-derivative of [`expectation_f`]:
/// √(2/π)/a · ħ²t²/(m³a⁴) · (1 + s²)^{-3/2}.
pub fn expectation_f_deltam(state: &GaussianState, delta_m: f64) -> f64 {
    let (a, m, t) = (state.a, state.m, state.t);
    let s2 = state.spreading().powi(2);
    let coefficient = SQRT_2_OVER_PI / a * t * t / (m.powi(3) * a.powi(4)) * (1.0 + s2).powf(-1.5);
    expectation_f(state) + coefficient * delta_m
}

/// Inputs of the gravity-induced energy shift. Masses in MeV, `width` and
/// `newton_g` in natural units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelfGravityInputs {
    pub newton_g: f64,
    pub width: f64,
    /// Mass multiplying the potential in the unique-wave-function case.
    pub m_k: f64,
    /// Short-lived mass m = m_S.
    pub m: f64,
    pub delta_m: f64,
    /// |β|², the K_L weight.
    pub beta_sq: f64,
}

impl SelfGravityInputs {
    /// Kaon defaults with m = m_K and physical G.
    pub fn kaon(params: &KaonParameters, width: f64, beta_sq: f64) -> Self {
        Self {
            newton_g: crate::units::G_NATURAL,
            width,
            m_k: params.m_k,
            m: params.m_k,
            delta_m: params.delta_m,
            beta_sq,
        }
    }
}

/// Gravitational energy shifts of the two mass eigenstates (MeV).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyShift {
    pub delta_e_s: f64,
    pub delta_e_l: f64,
    pub scenario: Scenario,
    pub beta_sq: f64,
}

/// Leading-order energy shifts for a wide Gaussian.
///
/// * unique wave function: ΔE = -√(2/π)(G m_K/a)(m + |β|²Δm) for both states;
/// * distinct wave functions: ΔE_S = -√(2/π)(G m/a)[m + |β|²Δm],
///   ΔE_L = -√(2/π)(G m/a)[m + (1 + |β|²)Δm].
pub fn energy_shift(scenario: Scenario, inputs: &SelfGravityInputs) -> Result<EnergyShift> {
    let SelfGravityInputs {
        newton_g,
        width,
        m_k,
        m,
        delta_m,
        beta_sq,
    } = *inputs;
    if !(0.0..=1.0).contains(&beta_sq) {
        return Err(invalid("beta_sq", format!("must lie in [0, 1], got {beta_sq}")));
    }
    check_positive("width", width)?;
    if !(newton_g >= 0.0) {
        return Err(invalid("newton_g", "must be non-negative"));
    }
    let prefactor = -SQRT_2_OVER_PI * newton_g / width;
    let (delta_e_s, delta_e_l) = match scenario {
        Scenario::UniqueWaveFunction => {
            let e = prefactor * m_k * (m + beta_sq * delta_m);
            (e, e)
        }
        Scenario::DistinctWaveFunctions => (
            prefactor * m * (m + beta_sq * delta_m),
            prefactor * m * (m + (1.0 + beta_sq) * delta_m),
        ),
    };
    Ok(EnergyShift {
        delta_e_s,
        delta_e_l,
        scenario,
        beta_sq,
    })
}

/// Δ_SN = √(2/π) G m/(c² a)
pub fn delta_sn(newton_g: f64, m: f64, width: f64) -> Result<f64> {
    check_positive("width", width)?;
    Ok(SQRT_2_OVER_PI * newton_g * m / width)
}

/// Fractional Δm shift k Δ_SN of the given scenario.
pub fn mass_difference_shift(scenario: Scenario, newton_g: f64, m: f64, width: f64) -> Result<f64> {
    Ok(scenario.delta_m_factor() * delta_sn(newton_g, m, width)?)
}

/// Width a* at which Δ_SN reaches one: a* = √(2/π) G m/c².
pub fn critical_width(newton_g: f64, m: f64) -> Result<f64> {
    check_positive("m", m)?;
    Ok(SQRT_2_OVER_PI * newton_g * m)
}
