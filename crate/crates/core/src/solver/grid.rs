use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{check_positive, invalid, Error, Result};
use crate::gravity::{free_gaussian, GaussianState};

/// Uniform radial grid r_j = j Δr, j = 0..=n, with Δr = r_max/n.
///
/// Wave functions are stored as u = rψ, which vanishes at both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialGrid {
    r_max: f64,
    n: usize,
    spacing: f64,
}

impl RadialGrid {
    pub const MIN_POINTS: usize = 64;

    pub fn new(r_max: f64, n: usize) -> Result<Self> {
        check_positive("r_max", r_max)?;
        if n < Self::MIN_POINTS {
            return Err(invalid("n", format!("need at least {} points, got {n}", Self::MIN_POINTS)));
        }
        Ok(Self {
            r_max,
            n,
            spacing: r_max / n as f64,
        })
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Number of stored nodes, boundaries included.
    pub fn nodes(&self) -> usize {
        self.n + 1
    }

    pub fn radius(&self, j: usize) -> f64 {
        j as f64 * self.spacing
    }

    pub fn radii(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.nodes()).map(move |j| self.radius(j))
    }
}

/// Complex radial amplitude u_j ≈ r_j ψ(r_j) with the mass it evolves with.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialWaveFunction {
    grid: RadialGrid,
    u: Vec<Complex64>,
    mass: f64,
}

impl RadialWaveFunction {
    /// Samples u = rψ from a radial profile; the outer node is pinned to zero.
    pub fn from_fn(grid: RadialGrid, mass: f64, psi: impl Fn(f64) -> Complex64) -> Self {
        let mut u: Vec<Complex64> = grid.radii().map(|r| r * psi(r)).collect();
        u[0] = Complex64::new(0.0, 0.0);
        u[grid.n] = Complex64::new(0.0, 0.0);
        Self { grid, u, mass }
    }

    pub fn from_u(grid: RadialGrid, mass: f64, u: Vec<Complex64>) -> Result<Self> {
        if u.len() != grid.nodes() {
            return Err(invalid("u", format!("expected {} nodes, got {}", grid.nodes(), u.len())));
        }
        if u[0].norm() != 0.0 || u[grid.n].norm() != 0.0 {
            return Err(invalid("u", "u must vanish at r = 0 and r = r_max"));
        }
        Ok(Self { grid, u, mass })
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn u(&self) -> &[Complex64] {
        &self.u
    }

    pub fn same_grid(&self, other: &Self) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// 4π ∫ |u|² dr (trapezoid; the end points vanish).
    pub fn norm_sq(&self) -> f64 {
        4.0 * PI * self.grid.spacing * self.u.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn scale(&mut self, factor: f64) {
        self.u.iter_mut().for_each(|z| *z *= factor);
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sq();
        if n > 0.0 {
            self.scale(n.sqrt().recip());
        }
    }

    /// 4π ∫ ū v dr
    pub fn inner_product(&self, other: &Self) -> Result<Complex64> {
        self.same_grid(other)?;
        let sum: Complex64 = self.u.iter().zip(&other.u).map(|(a, b)| a.conj() * b).sum();
        Ok(4.0 * PI * self.grid.spacing * sum)
    }

    /// ‖self - other‖ in the 3D L² norm.
    pub fn l2_distance(&self, other: &Self) -> Result<f64> {
        self.same_grid(other)?;
        let sum: f64 = self.u.iter().zip(&other.u).map(|(a, b)| (a - b).norm_sqr()).sum();
        Ok((4.0 * PI * self.grid.spacing * sum).sqrt())
    }

    /// ⟨r²⟩ for the normalized density.
    pub fn mean_square_radius(&self) -> f64 {
        let weighted: f64 = self
            .u
            .iter()
            .enumerate()
            .map(|(j, z)| self.grid.radius(j).powi(2) * z.norm_sqr())
            .sum();
        4.0 * PI * self.grid.spacing * weighted / self.norm_sq()
    }

    /// ⟨-ħ²∇²/2m⟩ = (4π/2m) ∫ |u'|² dr with forward differences, which is
    /// exactly the expectation of the discrete kinetic operator.
    pub fn kinetic_energy(&self) -> f64 {
        let h = self.grid.spacing;
        let grad: f64 = self.u.windows(2).map(|w| (w[1] - w[0]).norm_sqr()).sum();
        4.0 * PI * grad / (h * 2.0 * self.mass)
    }

    /// ⟨V⟩ for a potential sampled on the grid.
    pub fn potential_energy(&self, potential: &[f64]) -> f64 {
        let sum: f64 = self.u.iter().zip(potential).map(|(z, v)| v * z.norm_sqr()).sum();
        4.0 * PI * self.grid.spacing * sum
    }

    /// ψ(0) from the even extension: ψ(0) ≈ (4ψ(h) - ψ(2h))/3.
    pub fn central_amplitude(&self) -> Complex64 {
        let h = self.grid.spacing;
        let psi1 = self.u[1] / h;
        let psi2 = self.u[2] / (2.0 * h);
        (4.0 * psi1 - psi2) / 3.0
    }
}

/// Normalized free Gaussian of width `a` at t = 0.
pub fn init_gaussian(grid: RadialGrid, a: f64, mass: f64) -> Result<RadialWaveFunction> {
    gaussian_at(grid, &GaussianState::new(a, mass, 0.0)?)
}

/// Normalized sample of the analytic free Gaussian at the state's time.
pub fn gaussian_at(grid: RadialGrid, state: &GaussianState) -> Result<RadialWaveFunction> {
    if !(state.width() < grid.r_max() / 6.0) {
        return Err(invalid(
            "a",
            format!("width {} too large for r_max = {} (need a < r_max/6)", state.width(), grid.r_max()),
        ));
    }
    let mut wf = RadialWaveFunction::from_fn(grid, state.mass(), |r| {
        free_gaussian(state, r).expect("grid radii are non-negative")
    });
    wf.normalize();
    Ok(wf)
}
