//! Adaptive Dormand--Prince time stepping of `dX/dt = Phi(X)`.

use crate::error::{Error, Result};
use crate::grid::{self, Profile, SpectralCoeffs};
use crate::solver::{compute_phi_with, rt_from_phi, PhiEval, SolverConfig};
use crate::state::{InterfaceState, VorticityDensity};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepperConfig {
    pub t_end: f64,
    pub rtol: f64,
    pub atol: f64,
    pub cfl_safety: f64,
    pub dt_init: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    /// Accepted steps between decay checks.
    pub monitor_every: u64,
    /// Collision threshold; `None` means `1e-3 c_inf`.
    pub gap_min: Option<f64>,
    /// Keeps running through Rayleigh--Taylor violations.
    pub override_rt: bool,
    /// Mode whose amplitude is logged in every record.
    pub monitor_mode: i64,
    pub solver: SolverConfig,
}

impl Default for StepperConfig {
    fn default() -> Self {
        Self {
            t_end: 1.0,
            rtol: 1e-6,
            atol: 1e-10,
            cfl_safety: 0.5,
            dt_init: 1e-3,
            dt_min: 1e-10,
            dt_max: 1.0,
            monitor_every: 10,
            gap_min: None,
            override_rt: false,
            monitor_mode: 1,
            solver: SolverConfig::default(),
        }
    }
}

impl StepperConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(m.to_string()));
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return bad("t_end must be finite and >= 0");
        }
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return bad("rtol and atol must be positive");
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return bad("cfl_safety must lie in (0, 1]");
        }
        if !(self.dt_min > 0.0 && self.dt_min <= self.dt_init && self.dt_init <= self.dt_max) {
            return bad("require 0 < dt_min <= dt_init <= dt_max");
        }
        if self.monitor_every == 0 {
            return bad("monitor_every must be >= 1");
        }
        if let Some(g) = self.gap_min {
            if !(g > 0.0) {
                return bad("gap_min must be positive");
            }
        }
        Ok(())
    }

    fn gap_min_for(&self, x: &InterfaceState) -> f64 {
        self.gap_min.unwrap_or(1e-3 * x.c_inf())
    }
}

/// Why a run stopped.
#[derive(Clone, Debug, PartialEq)]
pub enum TerminationEvent {
    Completed { time: f64 },
    RtViolation { time: f64, max_r1: f64, max_r2: f64 },
    Collision { time: f64, gap: f64 },
    WindowViolation { time: f64, max_edge: f64 },
    Invertibility { time: f64, detail: String },
    Stiffness { time: f64, dt: f64 },
}

impl TerminationEvent {
    /// Process exit code.
    pub fn code(&self) -> i32 {
        match self {
            TerminationEvent::Completed { .. } => 0,
            TerminationEvent::RtViolation { .. } => 10,
            TerminationEvent::Collision { .. } => 11,
            TerminationEvent::WindowViolation { .. } => 12,
            TerminationEvent::Invertibility { .. } => 13,
            TerminationEvent::Stiffness { .. } => 14,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TerminationEvent::Completed { .. } => "t_end reached",
            TerminationEvent::RtViolation { .. } => "rayleigh-taylor violation",
            TerminationEvent::Collision { .. } => "interface collision",
            TerminationEvent::WindowViolation { .. } => "window violation",
            TerminationEvent::Invertibility { .. } => "invertibility failure",
            TerminationEvent::Stiffness { .. } => "stiffness failure",
        }
    }

    pub fn time(&self) -> f64 {
        match self {
            TerminationEvent::Completed { time }
            | TerminationEvent::RtViolation { time, .. }
            | TerminationEvent::Collision { time, .. }
            | TerminationEvent::WindowViolation { time, .. }
            | TerminationEvent::Invertibility { time, .. }
            | TerminationEvent::Stiffness { time, .. } => *time,
        }
    }
}

/// Diagnostics of one attempted step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimulationRecord {
    pub step: u64,
    pub time: f64,
    pub dt: f64,
    pub accepted: bool,
    pub err_norm: f64,
    /// Unscaled local error estimate.
    pub err_abs: f64,
    pub max_r1: f64,
    pub max_r2: f64,
    pub gap: f64,
    pub mass_f: f64,
    pub mass_h: f64,
    pub norm_f: f64,
    pub norm_h: f64,
    pub cond_estimate: f64,
    pub mode_amp_f: f64,
    pub mode_amp_h: f64,
    /// RMS of the upper half of the spectrum of `f` and `h`.
    pub tail_f: f64,
    pub tail_h: f64,
}

/// State at the end of an accepted step.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub time: f64,
    pub stepper: StepperState,
    pub state: InterfaceState,
    pub omega: VorticityDensity,
}

/// Everything the controller carries between steps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepperState {
    pub time: f64,
    pub dt_next: f64,
    pub err_prev: f64,
    pub attempts: u64,
    pub accepted: u64,
    pub last_rejected: bool,
}

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn phi_vec(p: &PhiEval) -> Vec<f64> {
    let mut v = p.phi1.values().to_vec();
    v.extend_from_slice(p.phi2.values());
    v
}

/// `Phi(X)`.
pub fn rhs(x: &InterfaceState) -> Result<(Profile, Profile)> {
    crate::solver::compute_phi(x)
}

/// An accepted or rejected trial step.
#[derive(Clone, Debug)]
pub struct Trial {
    pub x_new: InterfaceState,
    pub phi_new: PhiEval,
    /// Scaled error norm; the step is acceptable when `<= 1`.
    pub err_norm: f64,
    /// Unscaled `||err||_inf`.
    pub err_abs: f64,
}

/// One Dormand--Prince 5(4) trial from `x` with `k1 = Phi(x)`.
pub fn dp45_trial(x: &InterfaceState, k1: &PhiEval, dt: f64, cfg: &StepperConfig) -> Result<Trial> {
    let grid = *x.grid();
    let params = *x.params();
    let y0 = x.to_vec();
    let mut ks: Vec<Vec<f64>> = vec![phi_vec(k1)];
    let mut last: Option<(InterfaceState, PhiEval)> = None;
    for s in 1..7 {
        let y: Vec<f64> = (0..y0.len())
            .map(|i| y0[i] + dt * (0..s).map(|j| A[s][j] * ks[j][i]).sum::<f64>())
            .collect();
        let xs = InterfaceState::from_slice(grid, params, &y)?;
        let p = compute_phi_with(&xs, &cfg.solver)?;
        ks.push(phi_vec(&p));
        if s == 6 {
            last = Some((xs, p));
        }
    }
    let (x_new, phi_new) = last.expect("seven stages");
    let err: Vec<f64> = (0..y0.len())
        .map(|i| dt * (0..7).map(|j| E[j] * ks[j][i]).sum::<f64>())
        .collect();
    let err_abs = err.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale_x = y0
        .iter()
        .chain(x_new.f().values())
        .chain(x_new.h().values())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = (cfg.rtol * scale_x).max(cfg.atol);
    Ok(Trial {
        x_new,
        phi_new,
        err_norm: err_abs / tol,
        err_abs,
    })
}

/// Stability ceiling `cfl_safety * dx / max(|R1|, |R2|, eps)`.
pub fn cfl_ceiling(x: &InterfaceState, phi: &PhiEval, cfl_safety: f64) -> f64 {
    let (r1, r2) = rt_from_phi(x, &phi.phi1, &phi.phi2);
    let m = r1.max_abs().max(r2.max_abs()).max(1e-12);
    cfl_safety * x.grid().dx() / m
}

fn spectral_tail(p: &Profile) -> f64 {
    let c = SpectralCoeffs::transform(p);
    let n = p.grid().len() as i64;
    let e: f64 = c
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(m, _)| crate::grid::signed_index(*m, n as usize).abs() > n / 4)
        .map(|(_, z)| z.norm_sqr())
        .sum();
    e.sqrt()
}

/// Driver holding the current state and controller memory.
pub struct Simulation {
    cfg: StepperConfig,
    x: InterfaceState,
    phi: Option<PhiEval>,
    st: StepperState,
    started: bool,
    done: Option<TerminationEvent>,
}

/// Output of [`Simulation::attempt`].
#[derive(Clone, Debug)]
pub struct Attempt {
    pub record: SimulationRecord,
    pub event: Option<TerminationEvent>,
}

impl Simulation {
    pub fn new(x0: InterfaceState, cfg: StepperConfig) -> Result<Self> {
        cfg.validate()?;
        let st = StepperState {
            time: 0.0,
            dt_next: cfg.dt_init,
            err_prev: 1e-4,
            attempts: 0,
            accepted: 0,
            last_rejected: false,
        };
        Ok(Self::resume(x0, st, cfg)?)
    }

    /// Continues from a saved controller state.
    pub fn resume(x: InterfaceState, st: StepperState, cfg: StepperConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            x,
            phi: None,
            st,
            started: false,
            done: None,
        })
    }

    pub fn state(&self) -> &InterfaceState {
        &self.x
    }

    pub fn stepper_state(&self) -> StepperState {
        self.st
    }

    pub fn config(&self) -> &StepperConfig {
        &self.cfg
    }

    pub fn finished(&self) -> Option<&TerminationEvent> {
        self.done.as_ref()
    }

    pub fn omega(&self) -> Option<&VorticityDensity> {
        self.phi.as_ref().map(|p| &p.solution.omega)
    }

    pub fn snapshot(&self) -> Option<Snapshot> {
        self.phi.as_ref().map(|p| Snapshot {
            time: self.st.time,
            stepper: self.st,
            state: self.x.clone(),
            omega: p.solution.omega.clone(),
        })
    }

    fn failure_event(&self, e: &Error) -> TerminationEvent {
        let time = self.st.time;
        match e {
            Error::InterfaceCollision { gap } => TerminationEvent::Collision { time, gap: *gap },
            Error::WindowViolation { max_edge, .. } => TerminationEvent::WindowViolation {
                time,
                max_edge: *max_edge,
            },
            other => TerminationEvent::Invertibility {
                time,
                detail: other.to_string(),
            },
        }
    }

    fn state_event(&self, x: &InterfaceState, phi: &PhiEval, check_window: bool) -> Option<TerminationEvent> {
        let time = self.st.time;
        let gap = x.gap();
        if gap <= self.cfg.gap_min_for(x) {
            return Some(TerminationEvent::Collision { time, gap });
        }
        let (r1, r2) = rt_from_phi(x, &phi.phi1, &phi.phi2);
        let (m1, m2) = (r1.max(), r2.max());
        if !self.cfg.override_rt && (m1 >= 0.0 || m2 >= 0.0) {
            return Some(TerminationEvent::RtViolation {
                time,
                max_r1: m1,
                max_r2: m2,
            });
        }
        if check_window {
            if let Err(Error::WindowViolation { max_edge, .. }) = x.check_decayed() {
                return Some(TerminationEvent::WindowViolation { time, max_edge });
            }
        }
        if time >= self.cfg.t_end {
            return Some(TerminationEvent::Completed { time });
        }
        None
    }

    fn record(&self, x: &InterfaceState, phi: Option<&PhiEval>, dt: f64, accepted: bool, err: f64, err_abs: f64) -> SimulationRecord {
        let (m1, m2, cond) = match phi {
            Some(p) => {
                let (r1, r2) = rt_from_phi(x, &p.phi1, &p.phi2);
                (r1.max(), r2.max(), p.solution.cond_estimate)
            }
            None => (f64::NAN, f64::NAN, f64::NAN),
        };
        let cf = SpectralCoeffs::transform(x.f());
        let ch = SpectralCoeffs::transform(x.h());
        SimulationRecord {
            step: self.st.attempts,
            time: self.st.time,
            dt,
            accepted,
            err_norm: err,
            err_abs,
            max_r1: m1,
            max_r2: m2,
            gap: x.gap(),
            mass_f: grid::integrate(x.f()),
            mass_h: grid::integrate(x.h()),
            norm_f: x.f().max_abs(),
            norm_h: x.h().max_abs(),
            cond_estimate: cond,
            mode_amp_f: cf.mode_amplitude(self.cfg.monitor_mode),
            mode_amp_h: ch.mode_amplitude(self.cfg.monitor_mode),
            tail_f: spectral_tail(x.f()),
            tail_h: spectral_tail(x.h()),
        }
    }

    /// Evaluates `Phi` at the current state and checks the start conditions.
    /// Returns an event if the run cannot start.
    pub fn start(&mut self) -> Option<TerminationEvent> {
        if self.started {
            return self.done.clone();
        }
        self.started = true;
        match compute_phi_with(&self.x, &self.cfg.solver) {
            Ok(p) => {
                // a resumed run keeps the cadence of the original
                let check_window = self.st.accepted % self.cfg.monitor_every == 0;
                let ev = self.state_event(&self.x, &p, check_window);
                self.phi = Some(p);
                self.done = ev;
            }
            Err(e) => self.done = Some(self.failure_event(&e)),
        }
        self.done.clone()
    }

    /// One attempted step.
    pub fn attempt(&mut self) -> Attempt {
        if !self.started {
            if let Some(ev) = self.start() {
                let rec = self.record(&self.x.clone(), self.phi.as_ref(), 0.0, false, 0.0, 0.0);
                return Attempt {
                    record: rec,
                    event: Some(ev),
                };
            }
        }
        if let Some(ev) = &self.done {
            let rec = self.record(&self.x, self.phi.as_ref(), 0.0, false, 0.0, 0.0);
            return Attempt {
                record: rec,
                event: Some(ev.clone()),
            };
        }
        let phi = self.phi.clone().expect("started");
        let remaining = self.cfg.t_end - self.st.time;
        let ceiling = cfl_ceiling(&self.x, &phi, self.cfg.cfl_safety);
        let mut dt = self.st.dt_next.min(ceiling).min(self.cfg.dt_max);
        let final_clamp = dt >= remaining;
        if final_clamp {
            dt = remaining;
        }
        self.st.attempts += 1;
        if dt < self.cfg.dt_min && !final_clamp {
            let ev = TerminationEvent::Stiffness {
                time: self.st.time,
                dt,
            };
            self.done = Some(ev.clone());
            return Attempt {
                record: self.record(&self.x, Some(&phi), dt, false, f64::NAN, f64::NAN),
                event: Some(ev),
            };
        }
        match dp45_trial(&self.x, &phi, dt, &self.cfg) {
            Ok(trial) if trial.err_norm <= 1.0 => {
                let err = trial.err_norm.max(1e-10);
                let mut fac = 0.9 * err.powf(-0.7 / 5.0) * self.st.err_prev.powf(0.4 / 5.0);
                fac = fac.clamp(0.2, 5.0);
                if self.st.last_rejected {
                    fac = fac.min(1.0);
                }
                self.st.err_prev = err.max(1e-4);
                self.st.dt_next = (dt * fac).min(self.cfg.dt_max);
                if final_clamp {
                    self.st.dt_next = self.st.dt_next.max(self.cfg.dt_min);
                    self.st.time = self.cfg.t_end;
                } else {
                    self.st.time += dt;
                }
                self.st.accepted += 1;
                self.st.last_rejected = false;
                let check_window = final_clamp || self.st.accepted % self.cfg.monitor_every == 0;
                let ev = self.state_event(&trial.x_new, &trial.phi_new, check_window);
                self.x = trial.x_new;
                self.phi = Some(trial.phi_new);
                let rec = self.record(&self.x, self.phi.as_ref(), dt, true, trial.err_norm, trial.err_abs);
                self.done = ev.clone();
                Attempt { record: rec, event: ev }
            }
            Ok(trial) => {
                let fac = (0.9 * trial.err_norm.powf(-0.2)).clamp(0.2, 1.0);
                self.reject(dt, fac, trial.err_norm, trial.err_abs, &phi, None)
            }
            Err(e) => self.reject(dt, 0.25, f64::NAN, f64::NAN, &phi, Some(e)),
        }
    }

    fn reject(&mut self, dt: f64, fac: f64, err: f64, err_abs: f64, phi: &PhiEval, failure: Option<Error>) -> Attempt {
        self.st.dt_next = dt * fac;
        self.st.last_rejected = true;
        let rec = self.record(&self.x, Some(phi), dt, false, err, err_abs);
        let mut event = None;
        if self.st.dt_next < self.cfg.dt_min {
            event = Some(match &failure {
                Some(e) => self.failure_event(e),
                None => TerminationEvent::Stiffness {
                    time: self.st.time,
                    dt: self.st.dt_next,
                },
            });
            self.done = event.clone();
        }
        Attempt { record: rec, event }
    }

    /// Runs to termination; `on_record` sees every attempt, `on_snapshot`
    /// the initial state, every `snapshot_every`-th accepted state and the final state.
    pub fn run(
        &mut self,
        snapshot_every: u64,
        mut on_record: impl FnMut(&SimulationRecord),
        mut on_snapshot: impl FnMut(&Snapshot),
    ) -> TerminationEvent {
        let fresh = !self.started;
        if let Some(ev) = self.start() {
            return ev;
        }
        if fresh && self.st.attempts == 0 {
            if let Some(s) = self.snapshot() {
                on_snapshot(&s);
            }
        }
        loop {
            let a = self.attempt();
            on_record(&a.record);
            let accepted = a.record.accepted;
            if let Some(ev) = a.event {
                if accepted {
                    if let Some(s) = self.snapshot() {
                        on_snapshot(&s);
                    }
                }
                return ev;
            }
            if accepted && snapshot_every > 0 && self.st.accepted % snapshot_every == 0 {
                if let Some(s) = self.snapshot() {
                    on_snapshot(&s);
                }
            }
        }
    }
}

/// Collected output of [`simulate`].
#[derive(Clone, Debug)]
pub struct SimulationResult {
    pub snapshots: Vec<Snapshot>,
    pub records: Vec<SimulationRecord>,
    pub event: TerminationEvent,
}

/// Runs from `x0` until `t_end` or a termination event.
pub fn simulate(x0: InterfaceState, cfg: StepperConfig, snapshot_every: u64) -> Result<SimulationResult> {
    let mut sim = Simulation::new(x0, cfg)?;
    let mut snapshots = Vec::new();
    let mut records = Vec::new();
    let event = sim.run(snapshot_every, |r| records.push(*r), |s| snapshots.push(s.clone()));
    Ok(SimulationResult {
        snapshots,
        records,
        event,
    })
}

#[cfg(test)]
mod tests;
