//! Verification batteries run by `muskat verify`.

use std::f64::consts::PI;

use muskat_core::field::{
    darcy_residual, div_curl, interior_probes, normal, recovered_density, rellich_residuals, trace_at,
    Interface, Kernel, PressureField, Region, VelocityField,
};
use muskat_core::identities::{reconstruction_error, FlatOperator};
use muskat_core::{FluidParams, Grid, InterfaceState, Profile, VorticityDensity, Window};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{DensityKind, RunConfig};
use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Symbols,
    Identities,
    Rellich,
    Traces,
    Darcy,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Symbols, Suite::Identities, Suite::Rellich, Suite::Traces, Suite::Darcy];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Symbols => "symbols",
            Suite::Identities => "identities",
            Suite::Rellich => "rellich",
            Suite::Traces => "traces",
            Suite::Darcy => "darcy",
        }
    }

    /// Parses a suite name; `all` expands to every suite.
    pub fn parse(s: &str) -> Option<Vec<Suite>> {
        if s == "all" {
            return Some(Suite::ALL.to_vec());
        }
        Suite::ALL.iter().find(|x| x.name() == s).map(|x| vec![*x])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(suite: Suite, name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self {
            suite: suite.name(),
            name: name.into(),
            measured,
            tolerance,
            pass: measured <= tolerance,
        }
    }
}

fn bumps(rng: &mut ChaCha8Rng, g: &Grid, amp: f64) -> Vec<f64> {
    let spread = 0.1 * g.half_length();
    let terms: Vec<(f64, f64, f64)> = (0..2)
        .map(|_| (rng.gen_range(-amp..amp), rng.gen_range(-spread..spread), rng.gen_range(0.7..1.5)))
        .collect();
    g.nodes()
        .iter()
        .map(|x| terms.iter().map(|(a, c, w)| a * (-((x - c) / w).powi(2)).exp()).sum())
        .collect()
}

/// Random decayed interfaces with gap at least `c_inf / 3`.
pub fn random_state(rng: &mut ChaCha8Rng, g: Grid, params: FluidParams) -> CliResult<InterfaceState> {
    for _ in 0..100 {
        let f = Profile::new(g, bumps(rng, &g, 0.3))?;
        let h = Profile::new(g, bumps(rng, &g, 0.3))?;
        if let Ok(x) = InterfaceState::new(f, h, params) {
            if x.gap() >= params.c_inf / 3.0 {
                return Ok(x);
            }
        }
    }
    Err(CliError::config("grid", "cannot draw decayed random interfaces on this grid"))
}

pub fn random_density(rng: &mut ChaCha8Rng, g: Grid) -> CliResult<VorticityDensity> {
    let one = |rng: &mut ChaCha8Rng| -> CliResult<Profile> {
        let (a, b, c, w) = (
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-0.5..0.5),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(0.8..1.6),
        );
        Ok(Profile::from_fn(g, |x| (a + b * x) * (-((x - c) / w).powi(2)).exp())?)
    };
    Ok(VorticityDensity::new(one(rng)?, one(rng)?)?)
}

fn density_for(cfg: &RunConfig, rng: &mut ChaCha8Rng, x: &InterfaceState) -> CliResult<VorticityDensity> {
    Ok(match cfg.verify.density {
        DensityKind::Random => random_density(rng, *x.grid())?,
        DensityKind::Zero => VorticityDensity::zeros(*x.grid()),
        DensityKind::Solve => muskat_core::solve_omega(x)?,
    })
}

fn trials(cfg: &RunConfig) -> CliResult<(ChaCha8Rng, Vec<InterfaceState>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let g = cfg.grid()?;
    let p = cfg.params()?;
    let xs = (0..cfg.verify.trials.max(1))
        .map(|_| random_state(&mut rng, g, p))
        .collect::<CliResult<Vec<_>>>()?;
    Ok((rng, xs))
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn symbols(cfg: &RunConfig) -> CliResult<Vec<Check>> {
    let g = Grid::with_window(cfg.grid.half_length, cfg.grid.n, Window::Periodic)?;
    let l = g.half_length();
    let p = cfg.params()?;
    let x = InterfaceState::flat(g, p);
    let mut out = Vec::new();
    for op in FlatOperator::ALL {
        let mut worst = 0.0f64;
        for m in 1..=cfg.verify.symbol_modes {
            let k = PI * f64::from(m) / l;
            let w = Profile::from_fn(g, |s| (k * s).cos())?;
            let got = op.apply(&x, &w)?;
            let (a, b) = op.symbol(k, p.c_inf);
            let want: Vec<f64> = g.nodes().iter().map(|s| a * (k * s).cos() + b * (k * s).sin()).collect();
            let scale = a.abs() + b.abs();
            let err = max_abs_diff(got.values(), &want);
            worst = worst.max(if scale > 0.0 { err / scale } else { err });
        }
        out.push(Check::at_most(Suite::Symbols, format!("{} modes 1..{}", op.name(), cfg.verify.symbol_modes), worst, 1e-6));
    }
    Ok(out)
}

fn identities(cfg: &RunConfig) -> CliResult<Vec<Check>> {
    let (mut rng, xs) = trials(cfg)?;
    let mut worst = 0.0f64;
    for x in &xs {
        let w = density_for(cfg, &mut rng, x)?;
        let scale = w.w1.max_abs().max(w.w2.max_abs()).max(1.0);
        worst = worst.max(reconstruction_error(x, &w)? / scale);
    }
    Ok(vec![Check::at_most(
        Suite::Identities,
        format!("operator reconstructions, {} states", xs.len()),
        worst,
        1e-12,
    )])
}

fn rellich(cfg: &RunConfig) -> CliResult<Vec<Check>> {
    let (mut rng, xs) = trials(cfg)?;
    let mut worst = [0.0f64; 3];
    for x in &xs {
        let w = density_for(cfg, &mut rng, x)?;
        let r = rellich_residuals(x, &w)?.relative();
        for i in 0..3 {
            worst[i] = worst[i].max(r[i]);
        }
    }
    Ok((0..3)
        .map(|i| Check::at_most(Suite::Rellich, format!("identity {} relative residual", i + 1), worst[i], 1e-8))
        .collect())
}

fn traces(cfg: &RunConfig) -> CliResult<Vec<Check>> {
    let (mut rng, xs) = trials(cfg)?;
    let (mut jump, mut cont) = (0.0f64, 0.0f64);
    let mut order_lo = f64::INFINITY;
    let mut order_hi = f64::NEG_INFINITY;
    for x in &xs {
        let w = match cfg.verify.density {
            DensityKind::Zero => random_density(&mut rng, *x.grid())?,
            _ => density_for(cfg, &mut rng, x)?,
        };
        let r = recovered_density(x, &w)?;
        jump = jump.max(max_abs_diff(&r.to_vec(), &w.to_vec()));
        for (which, lo, hi, s) in [
            (Interface::F, Region::Upper, Region::Middle, x.fp()),
            (Interface::H, Region::Middle, Region::Lower, x.hp()),
        ] {
            let a = normal(&trace_at(x, &w, which, lo)?, s);
            let b = normal(&trace_at(x, &w, which, hi)?, s);
            cont = cont.max(max_abs_diff(&a, &b));
        }
        let vel = VelocityField::with_upsampling(x, &w, 8)?;
        let g = *x.grid();
        let d0 = g.dx();
        for (which, side, dir) in [(Interface::F, Region::Upper, 1.0), (Interface::H, Region::Lower, -1.0)] {
            let tr = trace_at(x, &w, which, side)?;
            let node = g.origin_index();
            let px = g.node(node);
            let y0 = vel.interface_y(which, px);
            let want = [tr.0.values()[node], tr.1.values()[node]];
            let err = |d: f64| {
                let u = vel.velocity_unchecked(px, y0 + dir * d, Kernel::Periodic);
                (u[0] - want[0]).hypot(u[1] - want[1])
            };
            let order = (err(d0) / err(d0 / 2.0)).log2();
            order_lo = order_lo.min(order);
            order_hi = order_hi.max(order);
        }
    }
    let order_dev = (order_lo - 1.0).abs().max((order_hi - 1.0).abs());
    Ok(vec![
        Check::at_most(Suite::Traces, "jump recovery", jump, 1e-8),
        Check::at_most(Suite::Traces, "normal-trace continuity", cont, 1e-8),
        Check::at_most(Suite::Traces, "interior limit order deviation from 1", order_dev, 0.35),
    ])
}

fn darcy(cfg: &RunConfig) -> CliResult<Vec<Check>> {
    let (_, xs) = trials(cfg)?;
    let (mut dres, mut dc, mut span) = (0.0f64, 0.0f64, 0.0f64);
    for x in xs.iter().take(2) {
        let w = muskat_core::solve_omega(x)?;
        let pf = PressureField::new(x, &w)?;
        let vel = pf.velocity_field();
        let g = x.grid();
        let pts = interior_probes(vel, [-4.0, 4.0, -2.0, x.c_inf() + 2.0], cfg.verify.probes, 3.0 * g.dx());
        let scale = pts
            .iter()
            .filter_map(|p| vel.velocity(p).ok())
            .map(|u| u[0].hypot(u[1]))
            .fold(0.0f64, f64::max)
            .max(f64::MIN_POSITIVE);
        for p in &pts {
            dres = dres.max(darcy_residual(&pf, x.params(), p, 2e-2)? / scale);
            let (d, c) = div_curl(vel, p, 1e-2);
            dc = dc.max(d.abs()).max(c.abs());
        }
        let ip = pf.interface_pressures()?;
        span = span.max(ip.relative_span_f()).max(ip.relative_span_h());
    }
    Ok(vec![
        Check::at_most(Suite::Darcy, "darcy residual / max|v|", dres, 1e-5),
        Check::at_most(Suite::Darcy, "div and curl", dc, 1e-6),
        Check::at_most(Suite::Darcy, "pressure-jump relative span", span, 1e-6),
    ])
}

pub fn run_suite(cfg: &RunConfig, suite: Suite) -> CliResult<Vec<Check>> {
    match suite {
        Suite::Symbols => symbols(cfg),
        Suite::Identities => identities(cfg),
        Suite::Rellich => rellich(cfg),
        Suite::Traces => traces(cfg),
        Suite::Darcy => darcy(cfg),
    }
}

pub fn format_table(checks: &[Check]) -> String {
    let mut s = format!("{:<11} {:<44} {:>12} {:>10}  result\n", "suite", "check", "measured", "tolerance");
    for c in checks {
        s.push_str(&format!(
            "{:<11} {:<44} {:>12.3e} {:>10.1e}  {}\n",
            c.suite,
            c.name,
            c.measured,
            c.tolerance,
            if c.pass { "PASS" } else { "FAIL" }
        ));
    }
    s
}

