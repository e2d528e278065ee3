//! Flavor-space phenomenology of the neutral kaon.
//!
//! The effective Hamiltonian in the {K⁰, K̄⁰} basis is H = M - (i/2)Γ with
//! Hermitian M and Γ. Under CPT both diagonals are equal (m_K and Γ), and all
//! dynamics is carried by the off-diagonal combinations
//!
//! ```text
//! H₁₂ = M₁₂ - (i/2)Γ₁₂,    H₂₁ = M₁₂* - (i/2)Γ₁₂*
//! ```
//!
//! Times are proper times in natural units (MeV⁻¹).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{check_positive, check_time, invalid, Error, Result};
use crate::gravity::{delta_sn, Scenario};
use crate::units::{KaonParameters, G_NATURAL};

pub type Matrix2 = [[Complex64; 2]; 2];

const HERMITIAN_TOL: f64 = 1e-12;

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    let diff = (a - b).norm();
    diff == 0.0 || diff <= tol * a.norm().max(b.norm())
}

/// Mass and decay matrices of the two-state system (MeV).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixingHamiltonian {
    mass: Matrix2,
    decay: Matrix2,
}

impl MixingHamiltonian {
    /// Validates Hermiticity of both matrices and, if `require_cpt`, equal
    /// diagonals.
    pub fn new(mass: Matrix2, decay: Matrix2, require_cpt: bool) -> Result<Self> {
        for (name, m) in [("mass", &mass), ("decay", &decay)] {
            for i in 0..2 {
                for j in 0..2 {
                    if !close(m[i][j], m[j][i].conj(), HERMITIAN_TOL) {
                        return Err(Error::NotHermitian(format!(
                            "{name} matrix element ({}, {}) = {} vs conjugate transpose {}",
                            i + 1,
                            j + 1,
                            m[i][j],
                            m[j][i].conj()
                        )));
                    }
                }
            }
        }
        let h = Self { mass, decay };
        if require_cpt && !h.is_cpt_symmetric() {
            return Err(Error::NotCptSymmetric(format!(
                "diagonals {} and {}",
                h.effective()[0][0],
                h.effective()[1][1]
            )));
        }
        Ok(h)
    }

    /// CPT-symmetric Hamiltonian from the diagonal mass/width and the
    /// off-diagonal elements M₁₂, Γ₁₂.
    pub fn cpt_symmetric(m_k: f64, gamma: f64, m12: Complex64, gamma12: Complex64) -> Self {
        let d = |x: f64| Complex64::new(x, 0.0);
        Self {
            mass: [[d(m_k), m12], [m12.conj(), d(m_k)]],
            decay: [[d(gamma), gamma12], [gamma12.conj(), d(gamma)]],
        }
    }

    /// Builds the Hamiltonian whose off-diagonal pair is H₁₂ = Y/X,
    /// H₂₁ = X·Y.
    pub fn from_xy(m_k: f64, gamma: f64, xy: XYDecomposition) -> Self {
        let h12 = xy.y / xy.x;
        let h21 = xy.x * xy.y;
        let m12 = 0.5 * (h12 + h21.conj());
        let gamma12 = Complex64::i() * (h12 - h21.conj());
        Self::cpt_symmetric(m_k, gamma, m12, gamma12)
    }

    /// Hamiltonian reproducing Δm, ΔΓ and ε of the given parameters.
    pub fn from_parameters(p: &KaonParameters) -> Self {
        let y = Complex64::new(0.5 * p.delta_m, -0.25 * p.delta_gamma());
        let x = ((1.0 - p.epsilon) / (1.0 + p.epsilon)).sqrt();
        Self::from_xy(p.m_k, p.gamma_mean(), XYDecomposition { x, y })
    }

    pub fn mass(&self) -> &Matrix2 {
        &self.mass
    }

    pub fn decay(&self) -> &Matrix2 {
        &self.decay
    }

    /// H = M - (i/2)Γ.
    pub fn effective(&self) -> Matrix2 {
        let half_i = Complex64::new(0.0, 0.5);
        let mut h = self.mass;
        for i in 0..2 {
            for j in 0..2 {
                h[i][j] -= half_i * self.decay[i][j];
            }
        }
        h
    }

    /// M₁₂ - (i/2)Γ₁₂
    pub fn h12(&self) -> Complex64 {
        self.effective()[0][1]
    }

    /// M₁₂* - (i/2)Γ₁₂*
    pub fn h21(&self) -> Complex64 {
        self.effective()[1][0]
    }

    pub fn is_cpt_symmetric(&self) -> bool {
        close(self.mass[0][0], self.mass[1][1], HERMITIAN_TOL)
            && close(self.decay[0][0], self.decay[1][1], HERMITIAN_TOL)
    }

    /// √(H₁₂ H₂₁) on the branch with Re ≥ 0 (and Im ≥ 0 when Re = 0), so
    /// that Δm ≥ 0 and, for degenerate masses, Γ_S ≥ Γ_L.
    fn mixing_root(&self) -> Complex64 {
        let root = (self.h12() * self.h21()).sqrt();
        if root.re < 0.0 || (root.re == 0.0 && root.im < 0.0) {
            -root
        } else {
            root
        }
    }
}

/// Complex eigenvalues λ = m - (i/2)Γ of the short- and long-lived states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenSystem {
    pub lambda_s: Complex64,
    pub lambda_l: Complex64,
    pub m_s: f64,
    pub m_l: f64,
    pub gamma_s: f64,
    pub gamma_l: f64,
    /// m_L - m_S
    pub delta_m: f64,
    /// Γ_L - Γ_S
    pub delta_gamma: f64,
}

impl EigenSystem {
    /// `half_split` is (λ_L - λ_S)/2, passed separately because m_K ≫ Δm
    /// makes the difference of the eigenvalues lose most of its digits.
    fn from_eigenvalues(lambda_s: Complex64, lambda_l: Complex64, half_split: Complex64) -> Self {
        Self {
            lambda_s,
            lambda_l,
            m_s: lambda_s.re,
            m_l: lambda_l.re,
            gamma_s: -2.0 * lambda_s.im,
            gamma_l: -2.0 * lambda_l.im,
            delta_m: 2.0 * half_split.re,
            delta_gamma: -4.0 * half_split.im,
        }
    }

    /// Eigensystem of a kaon with the given parameters (λ = m_K ∓ Δm/2 ...).
    pub fn from_parameters(p: &KaonParameters) -> Self {
        Self::from_eigenvalues(
            Complex64::new(p.m_k - 0.5 * p.delta_m, -0.5 * p.gamma_s),
            Complex64::new(p.m_k + 0.5 * p.delta_m, -0.5 * p.gamma_l),
            Complex64::new(0.5 * p.delta_m, -0.25 * p.delta_gamma()),
        )
    }

    /// Same as [`EigenSystem::from_parameters`] with the eigenvalues measured
    /// from m_K. The dropped factor e^{-i m_K t} is a common phase; at kaon
    /// time scales m_K t ~ 10¹³ rad, which would swamp the interference term.
    pub fn from_parameters_relative(p: &KaonParameters) -> Self {
        Self::from_parameters(&KaonParameters { m_k: 0.0, ..*p })
    }

    pub fn eigenvalue(&self, which: MassEigenstate) -> Complex64 {
        match which {
            MassEigenstate::Short => self.lambda_s,
            MassEigenstate::Long => self.lambda_l,
        }
    }
}

/// λ_{S/L} = m_K - (i/2)Γ ∓ √(H₁₂ H₂₁) for a CPT-symmetric Hamiltonian.
pub fn eigensystem(h: &MixingHamiltonian) -> Result<EigenSystem> {
    if !h.is_cpt_symmetric() {
        return Err(Error::NotCptSymmetric(
            "eigenvalue formula needs equal diagonal elements".into(),
        ));
    }
    let diagonal = h.effective()[0][0];
    let root = h.mixing_root();
    Ok(EigenSystem::from_eigenvalues(diagonal - root, diagonal + root, root))
}

/// The pair (X, Y) with Y/X = H₁₂ and X·Y = H₂₁.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XYDecomposition {
    /// dimensionless
    pub x: Complex64,
    /// MeV
    pub y: Complex64,
}

impl XYDecomposition {
    pub fn delta_m(&self) -> f64 {
        2.0 * self.y.re
    }

    pub fn delta_gamma(&self) -> f64 {
        -4.0 * self.y.im
    }

    /// ε = (1 - X²)/(1 + X²)
    pub fn epsilon(&self) -> Result<Complex64> {
        let x2 = self.x * self.x;
        let denom = 1.0 + x2;
        if denom.norm() <= 1e-14 {
            return Err(Error::VanishingDenominator("epsilon from X"));
        }
        Ok((1.0 - x2) / denom)
    }
}

pub fn xy_decomposition(h: &MixingHamiltonian) -> Result<XYDecomposition> {
    let h12 = h.h12();
    if h12 == Complex64::new(0.0, 0.0) {
        return Err(invalid("h12", "off-diagonal element M12 - i/2 Gamma12 is zero"));
    }
    let y = h.mixing_root();
    Ok(XYDecomposition { x: y / h12, y })
}

/// ε = (H₁₂ - H₂₁)/(H₁₂ + H₂₁)
pub fn cp_epsilon(h: &MixingHamiltonian) -> Result<Complex64> {
    let (h12, h21) = (h.h12(), h.h21());
    let denom = h12 + h21;
    let scale = h12.norm() + h21.norm();
    if denom.norm() <= 1e-14 * scale || scale == 0.0 {
        return Err(Error::VanishingDenominator("cp_epsilon"));
    }
    Ok((h12 - h21) / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MassEigenstate {
    Short,
    Long,
}

/// e^{-iλt} = e^{-imt} e^{-Γt/2}
pub fn evolve_mass_eigenstate(which: MassEigenstate, t: f64, es: &EigenSystem) -> Result<Complex64> {
    check_time(t)?;
    Ok((-Complex64::i() * es.eigenvalue(which) * t).exp())
}

fn oscillation_terms(t: f64, p: &KaonParameters) -> (f64, f64) {
    let decays = (-p.gamma_s * t).exp() + (-p.gamma_l * t).exp();
    let interference = 2.0 * (p.delta_m * t).cos() * (-p.gamma_mean() * t).exp();
    (decays, interference)
}

/// |⟨K⁰|K⁰(t)⟩|² = ¼(e^{-Γ_S t} + e^{-Γ_L t} + 2 cos(Δm t) e^{-Γt})
pub fn survival_probability(t: f64, p: &KaonParameters) -> Result<f64> {
    check_time(t)?;
    Ok(damped_survival(t, p, 1.0))
}

fn damped_survival(t: f64, p: &KaonParameters, damping: f64) -> f64 {
    let (decays, interference) = oscillation_terms(t, p);
    (0.25 * (decays + interference * damping)).clamp(0.0, 1.0)
}

/// |⟨K̄⁰|K⁰(t)⟩|² = |1-ε|²/(4|1+ε|²) (e^{-Γ_S t} + e^{-Γ_L t} - 2 cos(Δm t) e^{-Γt})
pub fn transition_probability(t: f64, p: &KaonParameters) -> Result<f64> {
    check_time(t)?;
    let (decays, interference) = oscillation_terms(t, p);
    let ratio = (1.0 - p.epsilon).norm_sqr() / (1.0 + p.epsilon).norm_sqr();
    Ok((0.25 * ratio * (decays - interference)).clamp(0.0, 1.0))
}

/// 2 Re ε/(1 + |ε|²), the long-time limit of the asymmetry.
pub fn asymmetry_limit(p: &KaonParameters) -> f64 {
    2.0 * p.epsilon.re / (1.0 + p.epsilon.norm_sqr())
}

/// (P(K⁰) - P(K̄⁰))/(P(K⁰) + P(K̄⁰)) in closed form.
pub fn asymmetry(t: f64, p: &KaonParameters) -> Result<f64> {
    let total = survival_probability(t, p)? + transition_probability(t, p)?;
    if total <= 0.0 {
        return Err(Error::ProbabilityUnderflow(t));
    }
    let delta = asymmetry_limit(p);
    let c = (p.delta_m * t).cos() / (0.5 * p.delta_gamma() * t).cosh();
    Ok((delta + c) / (1.0 + delta * c))
}

/// Interference damping rate γΔm²/(16π^{3/2} r_C³ m₀²) of the CSL model (MeV).
pub fn csl_damping_rate(p: &KaonParameters) -> Result<f64> {
    check_positive("csl_r_c", p.csl_r_c)?;
    check_positive("csl_m0", p.csl_m0)?;
    Ok(p.csl_gamma * p.delta_m * p.delta_m
        / (16.0 * PI.powf(1.5) * p.csl_r_c.powi(3) * p.csl_m0 * p.csl_m0))
}

/// Survival probability with the interference term damped by CSL.
pub fn csl_survival_probability(t: f64, p: &KaonParameters) -> Result<f64> {
    check_time(t)?;
    let rate = csl_damping_rate(p)?;
    Ok(damped_survival(t, p, (-rate * t).exp()))
}

/// Parameters with Δm → (1 - k·Δ_SN)Δm, k = 1 or 2 for the two scenarios.
/// `width` is the Gaussian width in natural units.
pub fn sn_shifted_parameters(
    p: &KaonParameters,
    scenario: Scenario,
    width: f64,
) -> Result<KaonParameters> {
    let shift = scenario.delta_m_factor() * delta_sn(G_NATURAL, p.m_k, width)?;
    Ok(KaonParameters {
        delta_m: (1.0 - shift) * p.delta_m,
        ..*p
    })
}

/// Proper time for a kaon that travelled `distance` (natural units) at speed
/// `beta` (in units of c).
pub fn proper_time_from_lab(distance: f64, beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(invalid("beta", format!("must lie in (0, 1), got {beta}")));
    }
    let lorentz = 1.0 / (1.0 - beta * beta).sqrt();
    Ok(distance / (lorentz * beta))
}
