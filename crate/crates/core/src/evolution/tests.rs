use std::f64::consts::PI;

use num_complex::Complex64;

use super::*;
use crate::grid::{Grid, Profile, SpectralCoeffs};
use crate::linear::dispersion_matrix;
use crate::params::FluidParams;

fn cfg(t_end: f64) -> StepperConfig {
    StepperConfig {
        t_end,
        dt_init: 0.05,
        ..StepperConfig::default()
    }
}

fn mode_state(l: f64, n: usize, m: usize, fa: f64, ha: f64, mu: [f64; 3]) -> InterfaceState {
    let g = Grid::periodic(l, n).unwrap();
    let k = PI * m as f64 / l;
    let p = FluidParams::new([1.0, 2.0, 3.0], mu, 1.0, 1.0, 1.0).unwrap();
    let f = Profile::from_fn(g, |x| fa * (k * x).cos()).unwrap();
    let h = Profile::from_fn(g, |x| ha * (k * x).cos()).unwrap();
    InterfaceState::new(f, h, p).unwrap()
}

fn bumps(amp_f: f64, amp_h: f64, params: FluidParams) -> InterfaceState {
    let g = Grid::periodic(15.0, 128).unwrap();
    let f = Profile::from_fn(g, |x| amp_f * (-(x * x)).exp()).unwrap();
    let h = Profile::from_fn(g, |x| amp_h * (-((x - 0.7) * (x - 0.7)) / 1.5).exp()).unwrap();
    InterfaceState::new(f, h, params).unwrap()
}

/// `exp(M t) v` for a real 2x2 `M` with real spectrum.
fn expm_apply(m: [[f64; 2]; 2], t: f64, v: [f64; 2]) -> [f64; 2] {
    // series with scaling and squaring
    let s = 8;
    let h = t / f64::from(1u32 << s);
    let mut e = [[1.0, 0.0], [0.0, 1.0]];
    let mut term = e;
    for j in 1..20 {
        let mut next = [[0.0; 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                next[r][c] = (0..2).map(|q| term[r][q] * m[q][c] * h).sum::<f64>() / j as f64;
            }
        }
        term = next;
        for r in 0..2 {
            for c in 0..2 {
                e[r][c] += term[r][c];
            }
        }
    }
    for _ in 0..s {
        let mut sq = [[0.0; 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                sq[r][c] = (0..2).map(|q| e[r][q] * e[q][c]).sum();
            }
        }
        e = sq;
    }
    [e[0][0] * v[0] + e[0][1] * v[1], e[1][0] * v[0] + e[1][1] * v[1]]
}

fn mode_re(p: &Profile, m: i64) -> f64 {
    let z: Complex64 = SpectralCoeffs::transform(p).mode(m);
    2.0 * z.re
}

#[test]
fn expm_oracle_matches_diagonal_case() {
    let v = expm_apply([[-0.3, 0.0], [0.0, 0.2]], 1.7, [1.0, 2.0]);
    assert!((v[0] - (-0.51f64).exp()).abs() < 1e-13);
    assert!((v[1] - 2.0 * 0.34f64.exp()).abs() < 1e-12);
}

#[test]
fn config_validation() {
    assert!(StepperConfig::default().validate().is_ok());
    let bad = [
        StepperConfig { rtol: 0.0, ..Default::default() },
        StepperConfig { cfl_safety: 1.5, ..Default::default() },
        StepperConfig { dt_min: 1.0, dt_init: 0.1, ..Default::default() },
        StepperConfig { dt_max: 1e-4, ..Default::default() },
        StepperConfig { monitor_every: 0, ..Default::default() },
        StepperConfig { t_end: f64::NAN, ..Default::default() },
    ];
    for c in bad {
        assert!(c.validate().is_err(), "{c:?}");
    }
}

#[test]
fn zero_state_is_fixed_point() {
    let x = InterfaceState::flat(Grid::new(15.0, 64).unwrap(), FluidParams::reference());
    let (p1, p2) = rhs(&x).unwrap();
    assert_eq!(p1.max_abs(), 0.0);
    assert_eq!(p2.max_abs(), 0.0);
    let res = simulate(x, cfg(2.0), 0).unwrap();
    assert_eq!(res.event.code(), 0);
    let last = res.snapshots.last().unwrap();
    assert_eq!(last.time, 2.0);
    assert_eq!(last.state.f().max_abs(), 0.0);
    assert_eq!(last.state.h().max_abs(), 0.0);
    assert!(res.records.iter().all(|r| r.accepted));
}

#[test]
fn rhs_is_translation_equivariant() {
    let g = Grid::periodic(10.0, 64).unwrap();
    let p = FluidParams::new([1.0, 2.0, 3.0], [1.0, 2.0, 4.0], 1.0, 1.0, 1.0).unwrap();
    let f: Vec<f64> = g.nodes().iter().map(|&x| 0.2 * (PI * x / 10.0).sin() + 0.1 * (-(x * x)).exp()).collect();
    let h: Vec<f64> = g.nodes().iter().map(|&x| 0.15 * (3.0 * PI * x / 10.0).cos()).collect();
    let shift = |v: &[f64]| {
        let n = v.len();
        (0..n).map(|i| v[(i + n - 1) % n]).collect::<Vec<_>>()
    };
    let x0 = InterfaceState::new(Profile::new(g, f.clone()).unwrap(), Profile::new(g, h.clone()).unwrap(), p).unwrap();
    let x1 = InterfaceState::new(Profile::new(g, shift(&f)).unwrap(), Profile::new(g, shift(&h)).unwrap(), p).unwrap();
    let (a1, a2) = rhs(&x0).unwrap();
    let (b1, b2) = rhs(&x1).unwrap();
    let scale = a1.max_abs().max(a2.max_abs());
    for (a, b) in [(a1, b1), (a2, b2)] {
        let s = shift(a.values());
        let d = s.iter().zip(b.values()).fold(0.0f64, |m, (u, v)| m.max((u - v).abs()));
        assert!(d < 1e-12 * scale, "{d}");
    }
}

#[test]
fn single_step_reproduces_exponential_decay_to_high_order() {
    let l = 20.0;
    let m = 4;
    let eps = 1e-7;
    let x = mode_state(l, 128, m, eps, 0.0, [1.0; 3]);
    let k = PI * m as f64 / l;
    let dm = dispersion_matrix(k, x.params());
    let c = StepperConfig::default();
    let k1 = compute_phi_with(&x, &c.solver).unwrap();
    let mut errs = Vec::new();
    for dt in [2.0, 1.0, 0.5] {
        let tr = dp45_trial(&x, &k1, dt, &c).unwrap();
        let want = expm_apply(dm.m, dt, [eps, 0.0]);
        let got = [mode_re(tr.x_new.f(), m as i64), mode_re(tr.x_new.h(), m as i64)];
        let e = ((got[0] - want[0]).powi(2) + (got[1] - want[1]).powi(2)).sqrt() / eps;
        errs.push(e);
    }
    // local error is O(dt^6); allow one order of slack
    assert!(errs[0] / errs[1] > 2f64.powi(5), "{errs:?}");
    assert!(errs[1] / errs[2] > 2f64.powi(5) || errs[2] < 1e-9, "{errs:?}");
    assert!(errs[1] < 1e-5, "{errs:?}");
}

#[test]
fn equal_viscosity_mode_follows_dispersion_oracle() {
    let l = 20.0;
    let m = 4;
    let eps = 1e-3;
    let x = mode_state(l, 128, m, eps, 0.0, [1.0; 3]);
    let k = PI * m as f64 / l;
    let dm = dispersion_matrix(k, x.params());
    // initial rate of the f mode is |k| Theta1 when h = 0
    let (p1, _) = rhs(&x).unwrap();
    let rate0 = mode_re(&p1, m as i64) / eps;
    let want0 = k * x.params().theta1();
    assert!((rate0 - want0).abs() < 0.02 * want0.abs(), "{rate0} {want0}");
    let t_end = 1.0 / want0.abs();
    let res = simulate(x, cfg(t_end), 0).unwrap();
    assert_eq!(res.event.code(), 0);
    let fin = res.snapshots.last().unwrap();
    let want = expm_apply(dm.m, t_end, [eps, 0.0]);
    let got = [mode_re(fin.state.f(), m as i64), mode_re(fin.state.h(), m as i64)];
    let rate = (got[0] / eps).ln() / t_end;
    let rate_want = (want[0] / eps).ln() / t_end;
    assert!((rate - rate_want).abs() < 0.02 * rate_want.abs(), "{rate} {rate_want}");
    assert!((got[1] - want[1]).abs() < 0.02 * want[1].abs(), "{got:?} {want:?}");
}

#[test]
fn equal_viscosity_rt_values_are_constant() {
    let x = bumps(0.3, -0.2, FluidParams::reference());
    let res = simulate(x.clone(), cfg(1.0), 0).unwrap();
    assert_eq!(res.event.code(), 0);
    for r in &res.records {
        assert_eq!(r.max_r1, x.params().theta1());
        assert_eq!(r.max_r2, x.params().theta2());
    }
}

#[test]
fn accepted_steps_respect_error_bound_and_mass_drift() {
    let p = FluidParams::new([1.0, 2.0, 3.0], [1.0, 1.6, 2.5], 1.0, 1.0, 1.0).unwrap();
    let x = bumps(0.3, -0.25, p);
    let c = cfg(2.0);
    let res = simulate(x, c, 5).unwrap();
    assert_eq!(res.event.code(), 0, "{:?}", res.event);
    let m0f = res.snapshots[0].state.f().values().iter().sum::<f64>() * res.snapshots[0].state.grid().dx();
    let m0h = res.snapshots[0].state.h().values().iter().sum::<f64>() * res.snapshots[0].state.grid().dx();
    let mut last_t = 0.0;
    let mut prev_norm = res.snapshots[0].state.f().max_abs().max(res.snapshots[0].state.h().max_abs());
    for r in res.records.iter().filter(|r| r.accepted) {
        assert!(r.err_norm <= 1.0);
        let new_norm = r.norm_f.max(r.norm_h);
        let scale = (prev_norm.max(new_norm) * c.rtol).max(c.atol);
        assert!(r.err_abs <= scale * (1.0 + 1e-12), "{} {}", r.err_abs, scale);
        prev_norm = new_norm;
        assert!(r.time >= last_t);
        last_t = r.time;
        assert!((r.mass_f - m0f).abs() <= 1e-6 * (1.0 + m0f.abs()), "{} {}", r.mass_f, m0f);
        assert!((r.mass_h - m0h).abs() <= 1e-6 * (1.0 + m0h.abs()), "{} {}", r.mass_h, m0h);
    }
    assert!(res.snapshots.len() >= 2);
}

#[test]
fn halving_rtol_does_not_increase_error_estimates() {
    let p = FluidParams::new([1.0, 2.0, 3.0], [1.0, 1.6, 2.5], 1.0, 1.0, 1.0).unwrap();
    let x = bumps(0.3, -0.25, p);
    let max_err = |rtol: f64| {
        let c = StepperConfig {
            rtol,
            atol: 1e-14,
            cfl_safety: 1.0,
            ..cfg(1.0)
        };
        let res = simulate(x.clone(), c, 0).unwrap();
        res.records
            .iter()
            .filter(|r| r.accepted)
            .fold(0.0f64, |m, r| m.max(r.err_abs))
    };
    let e1 = max_err(1e-6);
    let e2 = max_err(5e-7);
    assert!(e2 <= e1, "{e2} > {e1}");
}

#[test]
fn reversed_densities_stop_with_rt_event() {
    let p = FluidParams::allowing_unstable([3.0, 2.0, 1.0], [1.0; 3], 1.0, 1.0, 1.0).unwrap();
    let x = bumps(0.1, 0.1, p);
    let res = simulate(x.clone(), cfg(1.0), 0).unwrap();
    assert_eq!(res.event.code(), 10);
    assert_eq!(res.event.time(), 0.0);
    let res = simulate(x, StepperConfig { override_rt: true, ..cfg(0.2) }, 0).unwrap();
    assert_eq!(res.event.code(), 0);
}

#[test]
fn forced_approach_ends_in_collision() {
    let p = FluidParams::allowing_unstable([3.0, 2.0, 1.0], [1.0; 3], 1.0, 1.0, 1.0).unwrap();
    let g = Grid::periodic(15.0, 128).unwrap();
    let f = Profile::from_fn(g, |x| -0.4 * (-(x * x)).exp()).unwrap();
    let h = Profile::from_fn(g, |x| 0.4 * (-(x * x)).exp()).unwrap();
    let x = InterfaceState::new(f, h, p).unwrap();
    let c = StepperConfig {
        override_rt: true,
        gap_min: Some(0.05),
        ..cfg(50.0)
    };
    let res = simulate(x, c, 0).unwrap();
    assert_eq!(res.event.code(), 11, "{:?}", res.event);
    for r in &res.records {
        assert!(r.gap.is_finite() && r.gap > 0.0);
        assert!(r.norm_f.is_finite() && r.norm_h.is_finite());
    }
}

#[test]
fn tiny_ceiling_reports_stiffness() {
    let x = bumps(0.3, -0.2, FluidParams::reference());
    let c = StepperConfig {
        cfl_safety: 1e-3,
        dt_min: 1e-3,
        dt_init: 1e-2,
        ..cfg(1.0)
    };
    let res = simulate(x, c, 0).unwrap();
    assert_eq!(res.event.code(), 14);
}

#[test]
fn resume_is_bitwise_identical() {
    let p = FluidParams::new([1.0, 2.0, 3.0], [1.0, 1.6, 2.5], 1.0, 1.0, 1.0).unwrap();
    let x = bumps(0.3, -0.25, p);
    let c = cfg(1.0);
    let full = simulate(x.clone(), c, 3).unwrap();
    let mid = &full.snapshots[1];
    let mut sim = Simulation::resume(mid.state.clone(), mid.stepper, c).unwrap();
    let mut last = None;
    let ev = sim.run(0, |_| {}, |s| last = Some(s.clone()));
    assert_eq!(ev, full.event);
    let a = last.unwrap();
    let b = full.snapshots.last().unwrap();
    assert_eq!(a.time.to_bits(), b.time.to_bits());
    assert_eq!(a.state.to_vec(), b.state.to_vec());
    assert_eq!(a.stepper, b.stepper);
}

#[test]
fn records_count_every_attempt() {
    let p = FluidParams::new([1.0, 2.0, 3.0], [1.0, 1.6, 2.5], 1.0, 1.0, 1.0).unwrap();
    let x = bumps(0.3, -0.25, p);
    let c = StepperConfig { dt_init: 1.0, ..cfg(0.5) };
    let res = simulate(x, c, 0).unwrap();
    for (i, r) in res.records.iter().enumerate() {
        assert_eq!(r.step, i as u64 + 1);
    }
    let last = res.snapshots.last().unwrap();
    assert_eq!(last.stepper.attempts as usize, res.records.len());
}

#[test]
fn spreading_tails_trigger_window_event() {
    let g = Grid::new(15.0, 128).unwrap();
    let p = FluidParams::reference();
    let f = Profile::from_fn(g, |x| 0.3 * (-(x * x)).exp()).unwrap();
    let x = InterfaceState::new(f, Profile::zeros(g), p).unwrap();
    let res = simulate(x, StepperConfig { monitor_every: 1, ..cfg(5.0) }, 0).unwrap();
    assert_eq!(res.event.code(), 12, "{:?}", res.event);
    assert!(res.event.time() > 0.0);
}
