use std::f64::consts::PI;

use crate::error::{invalid, Result};

use super::grid::RadialWaveFunction;

/// One contribution w·m·|ψ|² to the active mass density.
#[derive(Debug, Clone, Copy)]
pub struct Source<'a> {
    pub weight: f64,
    pub mass: f64,
    pub wave_function: &'a RadialWaveFunction,
}

/// Interval integrals ∫_{r_j}^{r_{j+1}} g dr, fourth order in the interior.
/// `ghost` is g(-Δr); the last interval uses a one-sided quadratic.
fn interval_integrals(g: &[f64], h: f64, ghost: f64) -> Vec<f64> {
    let n = g.len() - 1;
    let at = |j: isize| if j < 0 { ghost } else { g[j as usize] };
    (0..n)
        .map(|j| {
            if j + 2 <= n {
                let i = j as isize;
                h / 24.0 * (-at(i - 1) + 13.0 * at(i) + 13.0 * at(i + 1) - at(i + 2))
            } else {
                h / 12.0 * (5.0 * g[j + 1] + 8.0 * g[j] - g[j - 1])
            }
        })
        .collect()
}

/// f[ψ](r_j) = (1/r) ∫₀^r 4πr'²|ψ|² dr' + ∫_r^R 4πr'|ψ|² dr' on the grid,
/// for the density as stored (no normalization applied).
pub fn shell_kernel(wf: &RadialWaveFunction) -> Vec<f64> {
    let grid = wf.grid();
    let h = grid.spacing();
    let u = wf.u();
    // 4πr²|ψ|² = 4π|u|² is even in r; 4πr|ψ|² = 4π|u|²/r is odd
    let inner: Vec<f64> = u.iter().map(|z| 4.0 * PI * z.norm_sqr()).collect();
    let outer: Vec<f64> = u
        .iter()
        .enumerate()
        .map(|(j, z)| if j == 0 { 0.0 } else { 4.0 * PI * z.norm_sqr() / grid.radius(j) })
        .collect();
    let di = interval_integrals(&inner, h, inner[1]);
    let dq = interval_integrals(&outer, h, -outer[1]);

    let nodes = u.len();
    let mut enclosed = vec![0.0; nodes];
    for j in 1..nodes {
        enclosed[j] = enclosed[j - 1] + di[j - 1];
    }
    let mut beyond = vec![0.0; nodes];
    for j in (0..nodes - 1).rev() {
        beyond[j] = beyond[j + 1] + dq[j];
    }
    (0..nodes)
        .map(|j| {
            if j == 0 {
                beyond[0]
            } else {
                enclosed[j] / grid.radius(j) + beyond[j]
            }
        })
        .collect()
}

/// Φ(r_j) = -G Σ_k w_k m_k f[ψ_k](r_j).
pub fn self_potential(newton_g: f64, sources: &[Source<'_>]) -> Result<Vec<f64>> {
    let first = sources
        .first()
        .ok_or_else(|| invalid("sources", "at least one source is required"))?;
    let mut phi = vec![0.0; first.wave_function.grid().nodes()];
    for s in sources {
        s.wave_function.same_grid(first.wave_function)?;
        if !(s.weight >= 0.0) {
            return Err(invalid("weight", format!("must be non-negative, got {}", s.weight)));
        }
        if s.weight == 0.0 || newton_g == 0.0 {
            continue;
        }
        let c = -newton_g * s.weight * s.mass;
        for (p, f) in phi.iter_mut().zip(shell_kernel(s.wave_function)) {
            *p += c * f;
        }
    }
    Ok(phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gravity::{potential_f_closed, GaussianState};
    use crate::solver::grid::{init_gaussian, RadialGrid};

    #[test]
    fn kernel_matches_closed_form() {
        let grid = RadialGrid::new(12.0, 2048).unwrap();
        let wf = init_gaussian(grid, 1.0, 1.0).unwrap();
        let f = shell_kernel(&wf);
        let state = GaussianState::new(1.0, 1.0, 0.0).unwrap();
        for j in (0..grid.nodes()).step_by(37) {
            let exact = potential_f_closed(&state, grid.radius(j)).unwrap().value;
            assert!((f[j] - exact).abs() < 1e-8 * exact, "j={j}: {} vs {exact}", f[j]);
        }
    }

    #[test]
    fn potential_is_linear_in_sources() {
        let grid = RadialGrid::new(12.0, 256).unwrap();
        let wf = init_gaussian(grid, 1.0, 1.0).unwrap();
        let one = self_potential(2.0, &[Source { weight: 1.0, mass: 3.0, wave_function: &wf }]).unwrap();
        let two = self_potential(
            2.0,
            &[
                Source { weight: 0.25, mass: 3.0, wave_function: &wf },
                Source { weight: 0.75, mass: 3.0, wave_function: &wf },
            ],
        )
        .unwrap();
        for (a, b) in one.iter().zip(&two) {
            assert!((a - b).abs() < 1e-13 * a.abs());
        }
        let zero = self_potential(0.0, &[Source { weight: 1.0, mass: 3.0, wave_function: &wf }]).unwrap();
        assert!(zero.iter().all(|&v| v == 0.0));
        assert!(self_potential(1.0, &[]).is_err());
    }
}
