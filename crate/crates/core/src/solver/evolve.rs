use num_complex::Complex64;
use serde::Serialize;

use crate::error::{check_positive, invalid, Error, Result};
use crate::gravity::Scenario;

use super::grid::{init_gaussian, RadialGrid, RadialWaveFunction};
use super::poisson::{self_potential, Source};

/// Which flavor amplitude carries the oscillating phase e^{-iΔm t}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseConvention {
    /// α(t) = α₀, β(t) = β₀ e^{-iΔm t}
    #[default]
    RelativeOnBeta,
    /// α(t) = α₀ e^{-iΔm t}, β(t) = β₀ e^{-iΔm t}
    Common,
}

/// Predictor-corrector settings for the nonlinear potential.
///
/// With `tolerance = None` exactly `passes` corrector passes are made. With a
/// tolerance the passes repeat until successive iterates differ by less than
/// it in L², failing after `passes` attempts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Corrector {
    pub passes: usize,
    pub tolerance: Option<f64>,
}

impl Default for Corrector {
    fn default() -> Self {
        Self {
            passes: 1,
            tolerance: None,
        }
    }
}

/// Physics and numerics of one radial Schrödinger–Newton run, in natural
/// units. `newton_g` already contains any verification multiplier.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub alpha0: Complex64,
    pub beta0: Complex64,
    pub include_decay_weights: bool,
    pub gravity_on: bool,
    pub newton_g: f64,
    /// Kinetic and passive mass of the shared wave function (scenario 1).
    pub m_k: f64,
    pub m_s: f64,
    pub m_l: f64,
    pub gamma_s: f64,
    pub gamma_l: f64,
    /// Initial Gaussian width a.
    pub width: f64,
    pub grid: RadialGrid,
    pub dt: f64,
    pub corrector: Corrector,
    pub phase_convention: PhaseConvention,
}

impl ScenarioConfig {
    /// Equal masses `mass`, |α|² = |β|² = ½, G = 1, no decay, dt = 10⁻³ m a².
    pub fn new(scenario: Scenario, grid: RadialGrid, width: f64, mass: f64) -> Self {
        let half = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self {
            scenario,
            alpha0: half,
            beta0: half,
            include_decay_weights: false,
            gravity_on: true,
            newton_g: 1.0,
            m_k: mass,
            m_s: mass,
            m_l: mass,
            gamma_s: 0.0,
            gamma_l: 0.0,
            width,
            grid,
            dt: 1e-3 * mass * width * width,
            corrector: Corrector::default(),
            phase_convention: PhaseConvention::default(),
        }
    }

    /// Sets α₀ = √(1 - |β|²), β₀ = |β| (real).
    pub fn with_beta_sq(mut self, beta_sq: f64) -> Self {
        self.alpha0 = Complex64::new((1.0 - beta_sq).max(0.0).sqrt(), 0.0);
        self.beta0 = Complex64::new(beta_sq.max(0.0).sqrt(), 0.0);
        self
    }

    /// Natural time unit m a²/ħ of the channel with mass `m_k`.
    pub fn spreading_time(&self) -> f64 {
        self.m_k * self.width * self.width
    }

    pub fn validate(&self) -> Result<()> {
        let total = self.alpha0.norm_sqr() + self.beta0.norm_sqr();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid("alpha0/beta0", format!("|α|² + |β|² = {total}, expected 1")));
        }
        for (name, v) in [("m_k", self.m_k), ("m_s", self.m_s), ("m_l", self.m_l), ("dt", self.dt)] {
            check_positive(name, v)?;
        }
        check_positive("width", self.width)?;
        if !(self.newton_g >= 0.0 && self.newton_g.is_finite()) {
            return Err(invalid("newton_g", format!("must be finite and non-negative, got {}", self.newton_g)));
        }
        if !(self.gamma_s >= 0.0 && self.gamma_l >= 0.0) {
            return Err(invalid("gamma", "decay widths must be non-negative"));
        }
        if self.corrector.passes == 0 {
            return Err(invalid("corrector.passes", "need at least one pass"));
        }
        if !(self.width < self.grid.r_max() / 6.0) {
            return Err(invalid("width", "initial width must be below r_max/6"));
        }
        Ok(())
    }

    pub fn delta_m(&self) -> f64 {
        self.m_l - self.m_s
    }

    /// (α(t), β(t)) including e^{-Γt/2} damping when decay weights are on.
    pub fn flavor_amplitudes(&self, t: f64) -> (Complex64, Complex64) {
        let osc = Complex64::from_polar(1.0, -self.delta_m() * t);
        let (mut alpha, mut beta) = match self.phase_convention {
            PhaseConvention::RelativeOnBeta => (self.alpha0, self.beta0 * osc),
            PhaseConvention::Common => (self.alpha0 * osc, self.beta0 * osc),
        };
        if self.include_decay_weights {
            alpha *= (-0.5 * self.gamma_s * t).exp();
            beta *= (-0.5 * self.gamma_l * t).exp();
        }
        (alpha, beta)
    }

    /// (|α(t)|², |β(t)|²)
    pub fn flavor_weights(&self, t: f64) -> (f64, f64) {
        let (a, b) = self.flavor_amplitudes(t);
        (a.norm_sqr(), b.norm_sqr())
    }

    /// Kinetic masses of the evolved channels.
    pub fn channel_masses(&self) -> Vec<f64> {
        match self.scenario {
            Scenario::UniqueWaveFunction => vec![self.m_k],
            Scenario::DistinctWaveFunctions => vec![self.m_s, self.m_l],
        }
    }

    pub fn channel_labels(&self) -> Vec<String> {
        match self.scenario {
            Scenario::UniqueWaveFunction => vec!["K".into()],
            Scenario::DistinctWaveFunctions => vec!["S".into(), "L".into()],
        }
    }
}

/// Spatial wave functions at time `t`, one per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub t: f64,
    pub channels: Vec<RadialWaveFunction>,
}

impl SolverState {
    pub fn initial(config: &ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let channels = config
            .channel_masses()
            .into_iter()
            .map(|m| init_gaussian(config.grid, config.width, m))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { t: 0.0, channels })
    }
}

/// Potential energies V_c(r_j) acting on each channel.
pub fn potentials(config: &ScenarioConfig, state: &SolverState) -> Result<Vec<Vec<f64>>> {
    let nodes = config.grid.nodes();
    if !config.gravity_on || config.newton_g == 0.0 {
        return Ok(vec![vec![0.0; nodes]; state.channels.len()]);
    }
    let (wa, wb) = config.flavor_weights(state.t);
    match config.scenario {
        Scenario::UniqueWaveFunction => {
            let psi = &state.channels[0];
            let phi = self_potential(
                config.newton_g,
                &[
                    Source { weight: wa, mass: config.m_s, wave_function: psi },
                    Source { weight: wb, mass: config.m_l, wave_function: psi },
                ],
            )?;
            Ok(vec![phi.into_iter().map(|p| config.m_k * p).collect()])
        }
        Scenario::DistinctWaveFunctions => {
            let phi = self_potential(
                config.newton_g,
                &[
                    Source { weight: wa, mass: config.m_s, wave_function: &state.channels[0] },
                    Source { weight: wb, mass: config.m_l, wave_function: &state.channels[1] },
                ],
            )?;
            Ok([config.m_s, config.m_l]
                .iter()
                .map(|m| phi.iter().map(|p| m * p).collect())
                .collect())
        }
    }
}

/// One Crank–Nicolson step (1 + iτH/2)u' = (1 - iτH/2)u with
/// H = -(1/2m) d²/dr² + V and Dirichlet ends.
pub(crate) fn crank_nicolson(u: &[Complex64], inverse_mass: f64, potential: &[Complex64], h: f64, tau: f64) -> Vec<Complex64> {
    let n = u.len() - 1;
    let half = Complex64::new(0.0, 0.5 * tau);
    let kin = inverse_mass / (h * h);
    let off = half * (-0.5 * kin);
    let diag: Vec<Complex64> = (0..=n).map(|j| 1.0 + half * (kin + potential[j])).collect();

    // forward sweep of the Thomas algorithm on the interior nodes 1..n-1
    let mut c_prime = vec![Complex64::new(0.0, 0.0); n + 1];
    let mut d_prime = vec![Complex64::new(0.0, 0.0); n + 1];
    for j in 1..n {
        let rhs = (2.0 - diag[j]) * u[j] - off * (u[j - 1] + u[j + 1]);
        let (c_prev, d_prev) = if j == 1 {
            (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
        } else {
            (c_prime[j - 1], d_prime[j - 1])
        };
        let denom = diag[j] - off * c_prev;
        c_prime[j] = off / denom;
        d_prime[j] = (rhs - off * d_prev) / denom;
    }
    let mut out = vec![Complex64::new(0.0, 0.0); n + 1];
    out[n - 1] = d_prime[n - 1];
    for j in (1..n - 1).rev() {
        out[j] = d_prime[j] - c_prime[j] * out[j + 1];
    }
    out
}

fn advance(state: &SolverState, potentials: &[Vec<f64>], dt: f64) -> Result<Vec<RadialWaveFunction>> {
    state
        .channels
        .iter()
        .zip(potentials)
        .map(|(wf, v)| {
            let vc: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
            let u = crank_nicolson(wf.u(), wf.mass().recip(), &vc, wf.grid().spacing(), dt);
            RadialWaveFunction::from_u(*wf.grid(), wf.mass(), u)
        })
        .collect()
}

/// Advances all channels by `dt` (which may be negative).
///
/// The predictor uses V at the start of the step; each corrector pass
/// re-solves with the trapezoidal average of V at both ends.
pub fn step(state: &SolverState, dt: f64, config: &ScenarioConfig) -> Result<SolverState> {
    if !(dt != 0.0 && dt.is_finite()) {
        return Err(invalid("dt", format!("must be finite and non-zero, got {dt}")));
    }
    let v0 = potentials(config, state)?;
    let mut next = SolverState {
        t: state.t + dt,
        channels: advance(state, &v0, dt)?,
    };
    if !config.gravity_on || config.newton_g == 0.0 {
        return Ok(next);
    }
    let Corrector { passes, tolerance } = config.corrector;
    let mut change = f64::INFINITY;
    for _ in 0..passes {
        let v1 = potentials(config, &next)?;
        let mean: Vec<Vec<f64>> = v0
            .iter()
            .zip(&v1)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect())
            .collect();
        let channels = advance(state, &mean, dt)?;
        change = 0.0;
        for (new, old) in channels.iter().zip(&next.channels) {
            change = change.max(new.l2_distance(old)?);
        }
        next.channels = channels;
        if tolerance.is_some_and(|tol| change <= tol) {
            return Ok(next);
        }
    }
    match tolerance {
        Some(_) => Err(Error::NonlinearNonConvergence { passes, change }),
        None => Ok(next),
    }
}

/// Observables of one channel sampled at the output times.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelSeries {
    pub label: String,
    pub mass: f64,
    pub norm: Vec<f64>,
    pub mean_square_radius: Vec<f64>,
    pub kinetic_energy: Vec<f64>,
    pub potential_energy: Vec<f64>,
    /// Unwrapped phase of ψ(t, 0).
    pub central_phase: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    pub channels: Vec<ChannelSeries>,
}

impl EvolutionResult {
    fn empty(config: &ScenarioConfig) -> Self {
        let channels = config
            .channel_labels()
            .into_iter()
            .zip(config.channel_masses())
            .map(|(label, mass)| ChannelSeries {
                label,
                mass,
                norm: Vec::new(),
                mean_square_radius: Vec::new(),
                kinetic_energy: Vec::new(),
                potential_energy: Vec::new(),
                central_phase: Vec::new(),
            })
            .collect();
        Self {
            times: Vec::new(),
            channels,
        }
    }

    fn record(&mut self, config: &ScenarioConfig, state: &SolverState) -> Result<()> {
        let v = potentials(config, state)?;
        self.times.push(state.t);
        for ((series, wf), pot) in self.channels.iter_mut().zip(&state.channels).zip(&v) {
            series.norm.push(wf.norm_sq());
            series.mean_square_radius.push(wf.mean_square_radius());
            series.kinetic_energy.push(wf.kinetic_energy());
            series.potential_energy.push(wf.potential_energy(pot));
            let raw = wf.central_amplitude().arg();
            let phase = match series.central_phase.last() {
                Some(&prev) => unwrap_phase(prev, raw),
                None => raw,
            };
            series.central_phase.push(phase);
        }
        Ok(())
    }
}

fn unwrap_phase(previous: f64, raw: f64) -> f64 {
    use std::f64::consts::TAU;
    previous + (raw - previous + std::f64::consts::PI).rem_euclid(TAU) - std::f64::consts::PI
}

/// Number of steps and the step actually used to land on `t_final`.
fn step_plan(config: &ScenarioConfig, t_final: f64) -> Result<(usize, f64)> {
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::NegativeTime(t_final));
    }
    if t_final == 0.0 {
        return Ok((0, config.dt));
    }
    let steps = ((t_final / config.dt) - 1e-9).ceil().max(1.0) as usize;
    Ok((steps, t_final / steps as f64))
}

/// Runs from the Gaussian initial data to `t_final`, keeping every
/// `output_stride`-th step plus the final one.
pub fn evolve(config: &ScenarioConfig, t_final: f64, output_stride: usize) -> Result<EvolutionResult> {
    Ok(evolve_with_state(config, t_final, output_stride)?.0)
}

/// [`evolve`] that also hands back the final state.
pub fn evolve_with_state(
    config: &ScenarioConfig,
    t_final: f64,
    output_stride: usize,
) -> Result<(EvolutionResult, SolverState)> {
    if output_stride == 0 {
        return Err(invalid("output_stride", "must be at least 1"));
    }
    let (steps, dt) = step_plan(config, t_final)?;
    let mut state = SolverState::initial(config)?;
    let mut result = EvolutionResult::empty(config);
    result.record(config, &state)?;
    for k in 1..=steps {
        state = step(&state, dt, config)?;
        if k == steps {
            state.t = t_final;
        }
        if k % output_stride == 0 || k == steps {
            result.record(config, &state)?;
        }
    }
    Ok((result, state))
}

/// Gravity-induced phases of each channel from paired runs with and
/// without self-gravity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseShiftMeasurement {
    pub scenario: Scenario,
    pub t_final: f64,
    pub labels: Vec<String>,
    pub times: Vec<f64>,
    /// arg⟨ψ_free|ψ_grav⟩ per channel, unwrapped.
    pub phases: Vec<Vec<f64>>,
    /// -φ(t_final)/t_final per channel.
    pub energy_shifts: Vec<f64>,
}

impl PhaseShiftMeasurement {
    /// ΔE_L - ΔE_S for distinct wave functions.
    pub fn rate_difference(&self) -> Option<f64> {
        match self.energy_shifts.as_slice() {
            [s, l] => Some(l - s),
            _ => None,
        }
    }
}

/// Measures the energy shift of every channel as the rate of the overlap
/// phase between a self-gravitating and a free run.
pub fn phase_shift_measurement(config: &ScenarioConfig, t_final: f64) -> Result<PhaseShiftMeasurement> {
    if !config.gravity_on {
        return Err(invalid("gravity_on", "phase measurement needs gravity switched on"));
    }
    let (steps, dt) = step_plan(config, t_final)?;
    if steps < 2 {
        return Err(invalid("t_final", format!("{t_final} resolves fewer than two steps of {}", config.dt)));
    }
    let free_config = ScenarioConfig {
        gravity_on: false,
        ..config.clone()
    };
    let mut on = SolverState::initial(config)?;
    let mut off = on.clone();
    let channels = on.channels.len();
    let mut phases = vec![vec![0.0]; channels];
    let mut times = vec![0.0];
    for _ in 0..steps {
        on = step(&on, dt, config)?;
        off = step(&off, dt, &free_config)?;
        times.push(on.t);
        for (c, series) in phases.iter_mut().enumerate() {
            let raw = off.channels[c].inner_product(&on.channels[c])?.arg();
            let prev = *series.last().expect("seeded");
            series.push(unwrap_phase(prev, raw));
        }
    }
    let energy_shifts = phases.iter().map(|p| -p.last().expect("seeded") / t_final).collect();
    Ok(PhaseShiftMeasurement {
        scenario: config.scenario,
        t_final,
        labels: config.channel_labels(),
        times,
        phases,
        energy_shifts,
    })
}

/// Fractional Δm shift extracted from the solver: with the state fully in
/// K_L, compares the K_L energy shift at the configured Δm with the one at
/// Δm = 0 and returns -(ΔE_L(Δm) - ΔE_L(0))/Δm.
pub fn measured_mass_difference_shift(config: &ScenarioConfig, t_final: f64) -> Result<f64> {
    let delta_m = config.delta_m();
    if delta_m == 0.0 {
        return Err(invalid("m_l", "needs m_L ≠ m_S"));
    }
    let base = config.clone().with_beta_sq(1.0);
    let degenerate = ScenarioConfig {
        m_l: base.m_s,
        ..base.clone()
    };
    let with = phase_shift_measurement(&base, t_final)?;
    let without = phase_shift_measurement(&degenerate, t_final)?;
    let last = |m: &PhaseShiftMeasurement| *m.energy_shifts.last().expect("at least one channel");
    Ok(-(last(&with) - last(&without)) / delta_m)
}
