//! Bulk velocity and pressure reconstruction from interface densities.
//!
//! Velocities come from the vortex-sheet integrals of both interfaces,
//! summed over the periodic images of the window. Interface traces use the
//! operator pair `calA`, `calB` plus the one-sided jump terms.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::{self, Exec};
use crate::grid::{self, Grid, Profile, SpectralCoeffs, Window};
use crate::solver::{apply_block_operator, Which};
use crate::state::{InterfaceState, VorticityDensity};

/// Which fluid a point belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Region {
    /// Above `y = c_inf + f`.
    Upper,
    /// Between the interfaces.
    Middle,
    /// Below `y = h`.
    Lower,
    /// Within two grid spacings of either interface.
    NearInterface,
}

impl Region {
    /// 0-based fluid index.
    pub fn fluid(self) -> Option<usize> {
        match self {
            Region::Upper => Some(0),
            Region::Middle => Some(1),
            Region::Lower => Some(2),
            Region::NearInterface => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Region::Upper => "upper",
            Region::Middle => "middle",
            Region::Lower => "lower",
            Region::NearInterface => "near-interface",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldPoint {
    pub x: f64,
    pub y: f64,
    pub region: Region,
    /// Distance to the closer interface.
    pub distance: f64,
    /// Fluid the point would belong to ignoring the exclusion zone.
    pub side: Region,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Interface {
    F,
    H,
}

/// Lattice used for the Biot--Savart sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kernel {
    /// Images `s + 2Lj`, matching the interface operators.
    Periodic,
    /// The window alone, densities treated as compactly supported.
    FreeSpace,
}

/// `a cot(a w)` without overflow for large `|Im w|`.
fn cot_kernel(a: f64, w: Complex64) -> Complex64 {
    let u = w * a;
    let i = Complex64::i();
    let v = if u.im >= 0.0 {
        let e = (i * 2.0 * u).exp();
        i * (e + 1.0) / (e - 1.0)
    } else {
        let e = (-i * 2.0 * u).exp();
        i * (e + 1.0) / (1.0 - e)
    };
    v * a
}

#[derive(Clone, Debug)]
struct Curve {
    offset: f64,
    height: SpectralCoeffs,
    slope: SpectralCoeffs,
    density: SpectralCoeffs,
    z: Vec<Complex64>,
    /// `zeta'(s) ds`.
    dz: Vec<Complex64>,
    /// `w / zeta'`.
    psi: Vec<Complex64>,
    /// Density times `ds`.
    wds: Vec<f64>,
    /// Dense samples for distance queries.
    probe: Vec<(f64, f64)>,
}

impl Curve {
    fn new(u: &Profile, w: &Profile, offset: f64, q: usize) -> Result<Self> {
        let (u, w) = if q > 1 { (u.upsample(q)?, w.upsample(q)?) } else { (u.clone(), w.clone()) };
        let g = *u.grid();
        let up = grid::derivative_values(&g, u.values());
        let dx = g.dx();
        let z: Vec<Complex64> = g
            .nodes()
            .iter()
            .zip(u.values())
            .map(|(&x, &v)| Complex64::new(x, offset + v))
            .collect();
        let dz: Vec<Complex64> = up.iter().map(|&p| Complex64::new(1.0, p) * dx).collect();
        let psi = w
            .values()
            .iter()
            .zip(&up)
            .map(|(&o, &p)| Complex64::new(o, 0.0) / Complex64::new(1.0, p))
            .collect();
        let wds = w.values().iter().map(|v| v * dx).collect();
        let fine = u.upsample(8 / q.min(8).max(1))?;
        let probe = fine.grid().nodes().into_iter().zip(fine.values().iter().map(|v| v + offset)).collect();
        let upp = Profile::from_values_unchecked(g, up);
        Ok(Self {
            offset,
            height: SpectralCoeffs::transform(&u),
            slope: SpectralCoeffs::transform(&upp),
            density: SpectralCoeffs::transform(&w),
            z,
            dz,
            psi,
            wds,
            probe,
        })
    }

    fn wrap(&self, x: f64) -> f64 {
        let l = self.height.grid().half_length();
        (x + l).rem_euclid(2.0 * l) - l
    }

    fn outside(&self, x: f64) -> bool {
        let g = self.height.grid();
        matches!(g.window(), Window::Decaying { .. }) && x.abs() > g.half_length()
    }

    fn y_at(&self, x: f64) -> f64 {
        if self.outside(x) {
            return self.offset;
        }
        self.offset + self.height.evaluate(self.wrap(x))
    }

    fn slope_at(&self, x: f64) -> f64 {
        if self.outside(x) {
            return 0.0;
        }
        self.slope.evaluate(self.wrap(x))
    }

    fn distance(&self, x: f64, y: f64) -> f64 {
        let l = self.height.grid().half_length();
        let periodic = matches!(self.height.grid().window(), Window::Periodic);
        let x = if periodic { self.wrap(x) } else { x };
        let vertical = (y - self.y_at(x)).abs();
        let reach = vertical + 1e-12;
        let mut best = vertical;
        if self.outside(x) {
            return best;
        }
        for &(s, v) in &self.probe {
            let mut ds = (x - s).abs();
            if periodic {
                ds = ds.min(2.0 * l - ds);
            }
            if ds > reach {
                continue;
            }
            best = best.min(ds.hypot(y - v));
        }
        best
    }

    fn periodic_sum(&self, z: Complex64) -> Complex64 {
        let g = self.height.grid();
        let a = PI / (2.0 * g.half_length());
        let x0 = self.wrap(z.re);
        let psi0 = Complex64::new(self.density.evaluate(x0), 0.0) / Complex64::new(1.0, self.slope.evaluate(x0));
        let above = z.im > self.y_at(z.re);
        let jump = if above { Complex64::new(0.0, -PI) } else { Complex64::new(0.0, PI) };
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..self.z.len() {
            acc += (self.psi[j] - psi0) * cot_kernel(a, z - self.z[j]) * self.dz[j];
        }
        acc + psi0 * jump
    }

    fn free_sum(&self, z: Complex64) -> Complex64 {
        self.z
            .iter()
            .zip(&self.wds)
            .map(|(zj, w)| *w / (z - zj))
            .sum()
    }
}

/// Velocity evaluator for a fixed state and density.
#[derive(Clone, Debug)]
pub struct VelocityField {
    grid: Grid,
    curves: [Curve; 2],
}

impl VelocityField {
    pub fn new(x: &InterfaceState, w: &VorticityDensity) -> Result<Self> {
        Self::with_upsampling(x, w, 1)
    }

    /// Evaluates the sheet integrals on a `q`-fold spectrally refined copy
    /// of the interfaces.
    pub fn with_upsampling(x: &InterfaceState, w: &VorticityDensity, q: usize) -> Result<Self> {
        let g = *x.grid();
        if w.w1.grid() != &g || w.w2.grid() != &g {
            return Err(Error::GridMismatch);
        }
        if x.gap() <= 0.0 {
            return Err(Error::InterfaceCollision { gap: x.gap() });
        }
        if q == 0 {
            return Err(Error::InvalidGrid("upsampling factor must be >= 1".into()));
        }
        Ok(Self {
            grid: g,
            curves: [
                Curve::new(x.f(), &w.w1, x.c_inf(), q)?,
                Curve::new(x.h(), &w.w2, 0.0, q)?,
            ],
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Height of interface `i` at `x`.
    pub fn interface_y(&self, which: Interface, x: f64) -> f64 {
        self.curves[which as usize].y_at(x)
    }

    pub fn interface_slope(&self, which: Interface, x: f64) -> f64 {
        self.curves[which as usize].slope_at(x)
    }

    pub fn classify(&self, x: f64, y: f64) -> FieldPoint {
        let side = if y > self.curves[0].y_at(x) {
            Region::Upper
        } else if y < self.curves[1].y_at(x) {
            Region::Lower
        } else {
            Region::Middle
        };
        let distance = self.curves[0].distance(x, y).min(self.curves[1].distance(x, y));
        let region = if distance < 2.0 * self.grid.dx() { Region::NearInterface } else { side };
        FieldPoint {
            x,
            y,
            region,
            distance,
            side,
        }
    }

    /// Velocity without the exclusion-zone check.
    pub fn velocity_unchecked(&self, x: f64, y: f64, kernel: Kernel) -> [f64; 2] {
        let z = Complex64::new(x, y);
        let acc: Complex64 = match kernel {
            Kernel::Periodic => self.curves.iter().map(|c| c.periodic_sum(z)).sum(),
            Kernel::FreeSpace => self.curves.iter().map(|c| c.free_sum(z)).sum(),
        };
        // v1 - i v2 = (-i / pi) acc
        let wv = acc * Complex64::new(0.0, -1.0 / PI);
        [wv.re, -wv.im]
    }

    pub fn velocity(&self, p: &FieldPoint) -> Result<[f64; 2]> {
        self.velocity_with(p, Kernel::Periodic)
    }

    pub fn velocity_with(&self, p: &FieldPoint, kernel: Kernel) -> Result<[f64; 2]> {
        if p.region == Region::NearInterface {
            return Err(Error::EvaluationRefused {
                x: p.x,
                y: p.y,
                distance: p.distance,
            });
        }
        Ok(self.velocity_unchecked(p.x, p.y, kernel))
    }

    /// Velocities at many points; near-interface points give `None`.
    pub fn velocities(&self, pts: &[FieldPoint], kernel: Kernel, exec: Exec) -> Vec<Option<[f64; 2]>> {
        exec::map_range(exec, pts.len(), |i| self.velocity_with(&pts[i], kernel).ok())
    }
}

/// `v(z)` at a point away from both interfaces.
pub fn velocity_at(x: &InterfaceState, w: &VorticityDensity, z: &FieldPoint) -> Result<[f64; 2]> {
    VelocityField::new(x, w)?.velocity(z)
}

/// Classifies `(px, py)` against the interfaces of `x`.
pub fn classify(x: &InterfaceState, px: f64, py: f64) -> Result<FieldPoint> {
    let w = VorticityDensity::zeros(*x.grid());
    Ok(VelocityField::new(x, &w)?.classify(px, py))
}

/// One-sided velocity traces `(v^1, v^2)` on an interface.
pub fn trace_at(x: &InterfaceState, w: &VorticityDensity, which: Interface, side: Region) -> Result<(Profile, Profile)> {
    let sign = match (which, side) {
        (Interface::F, Region::Upper) => -1.0,
        (Interface::F, Region::Middle) => 1.0,
        (Interface::H, Region::Middle) => -1.0,
        (Interface::H, Region::Lower) => 1.0,
        _ => {
            return Err(Error::RegionMismatch {
                requested: format!("{which:?} interface"),
                found: side.name().to_string(),
            })
        }
    };
    let (ca1, ca2) = apply_block_operator(Which::CalA, x, w)?;
    let (cb1, cb2) = apply_block_operator(Which::CalB, x, w)?;
    let (ca, cb, up, om) = match which {
        Interface::F => (ca1, cb1, x.fp(), &w.w1),
        Interface::H => (ca2, cb2, x.hp(), &w.w2),
    };
    let g = *x.grid();
    let n = g.len();
    let mut v1 = Vec::with_capacity(n);
    let mut v2 = Vec::with_capacity(n);
    for i in 0..n {
        let (a, b, p, o) = (ca.values()[i], cb.values()[i], up[i], om.values()[i]);
        let nrm = 1.0 + p * p;
        v1.push((a - p * b + sign * o) / nrm);
        v2.push((p * a + b + sign * o * p) / nrm);
    }
    Ok((Profile::new(g, v1)?, Profile::new(g, v2)?))
}

/// Tangential component `<v|(1, u')>` of a trace.
pub fn tangential(trace: &(Profile, Profile), slope: &[f64]) -> Vec<f64> {
    trace
        .0
        .values()
        .iter()
        .zip(trace.1.values())
        .zip(slope)
        .map(|((a, b), p)| a + p * b)
        .collect()
}

/// Normal component `<v|(-u', 1)>` of a trace.
pub fn normal(trace: &(Profile, Profile), slope: &[f64]) -> Vec<f64> {
    trace
        .0
        .values()
        .iter()
        .zip(trace.1.values())
        .zip(slope)
        .map(|((a, b), p)| b - p * a)
        .collect()
}

/// The densities recovered from the tangential velocity jumps.
pub fn recovered_density(x: &InterfaceState, w: &VorticityDensity) -> Result<VorticityDensity> {
    let t1 = trace_at(x, w, Interface::F, Region::Upper)?;
    let t2 = trace_at(x, w, Interface::F, Region::Middle)?;
    let t2h = trace_at(x, w, Interface::H, Region::Middle)?;
    let t3 = trace_at(x, w, Interface::H, Region::Lower)?;
    let g = *x.grid();
    let jump = |lo: &(Profile, Profile), hi: &(Profile, Profile), s: &[f64]| {
        let a = tangential(hi, s);
        let b = tangential(lo, s);
        a.iter().zip(&b).map(|(p, q)| 0.5 * (p - q)).collect::<Vec<_>>()
    };
    VorticityDensity::new(
        Profile::new(g, jump(&t1, &t2, x.fp()))?,
        Profile::new(g, jump(&t2h, &t3, x.hp()))?,
    )
}

#[cfg(test)]
mod tests;

mod diagnostics;
mod pressure;
mod rellich;

pub use diagnostics::{central_diff, darcy_residual, div_curl, interior_probes};
pub use pressure::{pressure_at, InterfacePressures, PressureField};
pub use rellich::{rellich_residuals, RellichResiduals};
