use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Result};

use super::evolve::crank_nicolson;
use super::grid::RadialWaveFunction;
use super::poisson::shell_kernel;

/// Kinetic and mass matrices of a two-field (doublet) state.
///
/// `kinetic[i][j]` is the inverse mass c of T̂_ij = -(ħ²c/2)∇²; zero means
/// the operator vanishes. `mass` is the 2×2 mass matrix M.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DoubletMatrices {
    pub kinetic: [[f64; 2]; 2],
    pub mass: [[Complex64; 2]; 2],
}

impl DoubletMatrices {
    /// T̂ = diag(1/m₁, 1/m₂), M = diag(m₁, m₂).
    pub fn diagonal(m1: f64, m2: f64) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Self {
            kinetic: [[m1.recip(), 0.0], [0.0, m2.recip()]],
            mass: [[Complex64::new(m1, 0.0), zero], [zero, Complex64::new(m2, 0.0)]],
        }
    }

    /// Same matrices with M₂₁ = M₁₂* = `m21`.
    pub fn with_off_diagonal_mass(mut self, m21: Complex64) -> Self {
        self.mass[1][0] = m21;
        self.mass[0][1] = m21.conj();
        self
    }
}

/// L² norms of the four doublet equations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DoubletResiduals {
    /// i∂_tΨ₁ - T̂₁₁Ψ₁ + G M₁₁ UΨ₁
    pub dynamical_1: f64,
    /// i∂_tΨ₂ - T̂₂₂Ψ₂ + G M₂₂ UΨ₂
    pub dynamical_2: f64,
    /// T̂₂₁Ψ₁ - G M₂₁ UΨ₁
    pub constraint_21: f64,
    /// T̂₁₂Ψ₂ - G M₁₂ UΨ₂
    pub constraint_12: f64,
}

/// -(c/2) u'' on the interior, zero at the ends.
fn apply_kinetic(u: &[Complex64], inverse_mass: f64, h: f64) -> Vec<Complex64> {
    let n = u.len() - 1;
    let mut out = vec![Complex64::new(0.0, 0.0); n + 1];
    if inverse_mass == 0.0 {
        return out;
    }
    let k = -0.5 * inverse_mass / (h * h);
    for j in 1..n {
        out[j] = k * (u[j - 1] - 2.0 * u[j] + u[j + 1]);
    }
    out
}

fn norm(v: &[Complex64], h: f64) -> f64 {
    (4.0 * PI * h * v.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
}

/// U = M₁₁ f[Ψ₁] + M₂₂ f[Ψ₂] with the densities as given.
fn shared_kernel(dm: &DoubletMatrices, psi1: &RadialWaveFunction, psi2: &RadialWaveFunction) -> Vec<Complex64> {
    shell_kernel(psi1)
        .into_iter()
        .zip(shell_kernel(psi2))
        .map(|(f1, f2)| dm.mass[0][0] * f1 + dm.mass[1][1] * f2)
        .collect()
}

/// T̂u - G μ U u
fn rhs(u: &[Complex64], inverse_mass: f64, mu: Complex64, newton_g: f64, kernel: &[Complex64], h: f64) -> Vec<Complex64> {
    apply_kinetic(u, inverse_mass, h)
        .into_iter()
        .zip(u.iter().zip(kernel))
        .map(|(t, (z, k))| t - newton_g * mu * k * z)
        .collect()
}

fn check_pair(psi1: &RadialWaveFunction, psi2: &RadialWaveFunction) -> Result<()> {
    psi1.same_grid(psi2)?;
    let total = psi1.norm_sq() + psi2.norm_sq();
    if (total - 1.0).abs() > 1e-8 {
        return Err(invalid("psi", format!("joint norm is {total}, expected 1")));
    }
    Ok(())
}

/// Residuals for supplied time derivatives `d1`, `d2` of u₁, u₂.
pub fn doublet_residuals_with_derivatives(
    dm: &DoubletMatrices,
    newton_g: f64,
    psi1: &RadialWaveFunction,
    psi2: &RadialWaveFunction,
    d1: &[Complex64],
    d2: &[Complex64],
) -> Result<DoubletResiduals> {
    check_pair(psi1, psi2)?;
    let nodes = psi1.grid().nodes();
    if d1.len() != nodes || d2.len() != nodes {
        return Err(invalid("derivatives", "length differs from the grid"));
    }
    let h = psi1.grid().spacing();
    let kernel = shared_kernel(dm, psi1, psi2);
    let i = Complex64::new(0.0, 1.0);
    let dyn_residual = |u: &[Complex64], d: &[Complex64], c: f64, mu: Complex64| {
        let r: Vec<Complex64> = rhs(u, c, mu, newton_g, &kernel, h)
            .into_iter()
            .zip(d)
            .map(|(rh, dz)| i * dz - rh)
            .collect();
        norm(&r, h)
    };
    let (u1, u2) = (psi1.u(), psi2.u());
    Ok(DoubletResiduals {
        dynamical_1: dyn_residual(u1, d1, dm.kinetic[0][0], dm.mass[0][0]),
        dynamical_2: dyn_residual(u2, d2, dm.kinetic[1][1], dm.mass[1][1]),
        constraint_21: norm(&rhs(u1, dm.kinetic[1][0], dm.mass[1][0], newton_g, &kernel, h), h),
        constraint_12: norm(&rhs(u2, dm.kinetic[0][1], dm.mass[0][1], newton_g, &kernel, h), h),
    })
}

/// One predictor-corrector Crank–Nicolson step of the two dynamical
/// equations (dt may be negative).
fn doublet_step(
    dm: &DoubletMatrices,
    newton_g: f64,
    psi1: &RadialWaveFunction,
    psi2: &RadialWaveFunction,
    dt: f64,
) -> Result<(RadialWaveFunction, RadialWaveFunction)> {
    let grid = *psi1.grid();
    let h = grid.spacing();
    let potential = |kernel: &[Complex64], mu: Complex64| -> Vec<Complex64> {
        kernel.iter().map(|k| -newton_g * mu * k).collect()
    };
    let (c1, c2) = (dm.kinetic[0][0], dm.kinetic[1][1]);
    let (mu1, mu2) = (dm.mass[0][0], dm.mass[1][1]);

    let k0 = shared_kernel(dm, psi1, psi2);
    let p1 = RadialWaveFunction::from_u(grid, psi1.mass(), crank_nicolson(psi1.u(), c1, &potential(&k0, mu1), h, dt))?;
    let p2 = RadialWaveFunction::from_u(grid, psi2.mass(), crank_nicolson(psi2.u(), c2, &potential(&k0, mu2), h, dt))?;
    let k1 = shared_kernel(dm, &p1, &p2);
    let mean: Vec<Complex64> = k0.iter().zip(&k1).map(|(a, b)| 0.5 * (a + b)).collect();
    let n1 = RadialWaveFunction::from_u(grid, psi1.mass(), crank_nicolson(psi1.u(), c1, &potential(&mean, mu1), h, dt))?;
    let n2 = RadialWaveFunction::from_u(grid, psi2.mass(), crank_nicolson(psi2.u(), c2, &potential(&mean, mu2), h, dt))?;
    Ok((n1, n2))
}

/// Residuals with ∂_tΨ estimated by a central difference over one solver
/// step each way; the dynamical residuals are therefore O(dt²).
pub fn doublet_residuals(
    dm: &DoubletMatrices,
    newton_g: f64,
    psi1: &RadialWaveFunction,
    psi2: &RadialWaveFunction,
    dt: f64,
) -> Result<DoubletResiduals> {
    check_pair(psi1, psi2)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(invalid("dt", format!("must be positive, got {dt}")));
    }
    let (f1, f2) = doublet_step(dm, newton_g, psi1, psi2, dt)?;
    let (b1, b2) = doublet_step(dm, newton_g, psi1, psi2, -dt)?;
    let diff = |f: &RadialWaveFunction, b: &RadialWaveFunction| -> Vec<Complex64> {
        f.u().iter().zip(b.u()).map(|(x, y)| (x - y) / (2.0 * dt)).collect()
    };
    doublet_residuals_with_derivatives(dm, newton_g, psi1, psi2, &diff(&f1, &b1), &diff(&f2, &b2))
}

/// ‖RHS₁ - RHS₂‖ for Ψ₁ = Ψ₂ = ψ/√2: the two dynamical equations can share a
/// solution only if this vanishes.
pub fn shared_wavefunction_gap(dm: &DoubletMatrices, newton_g: f64, psi: &RadialWaveFunction) -> Result<f64> {
    let mut half = psi.clone();
    half.normalize();
    half.scale(std::f64::consts::FRAC_1_SQRT_2);
    let h = half.grid().spacing();
    let kernel = shared_kernel(dm, &half, &half);
    let r1 = rhs(half.u(), dm.kinetic[0][0], dm.mass[0][0], newton_g, &kernel, h);
    let r2 = rhs(half.u(), dm.kinetic[1][1], dm.mass[1][1], newton_g, &kernel, h);
    let gap: Vec<Complex64> = r1.iter().zip(&r2).map(|(a, b)| a - b).collect();
    Ok(norm(&gap, h))
}
