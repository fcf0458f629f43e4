//! Pressures from line integrals of the Darcy velocity.

use super::*;

const GL_ORDER: usize = 10;

/// Interface traces of the three pressures.
#[derive(Clone, Debug)]
pub struct InterfacePressures {
    /// `p_1` on `y = c_inf + f`.
    pub upper_f: Profile,
    /// `p_2` on `y = c_inf + f`.
    pub middle_f: Profile,
    /// `p_2` on `y = h`.
    pub middle_h: Profile,
    /// `p_3` on `y = h`.
    pub lower_h: Profile,
}

fn span(v: &[f64]) -> f64 {
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    hi - lo
}

impl InterfacePressures {
    pub fn jump_f(&self) -> Vec<f64> {
        self.middle_f.values().iter().zip(self.upper_f.values()).map(|(a, b)| a - b).collect()
    }

    pub fn jump_h(&self) -> Vec<f64> {
        self.lower_h.values().iter().zip(self.middle_h.values()).map(|(a, b)| a - b).collect()
    }

    /// Span of `p_2 - p_1` along the upper interface over the larger span of
    /// the two pressures there.
    pub fn relative_span_f(&self) -> f64 {
        rel(span(&self.jump_f()), span(self.upper_f.values()).max(span(self.middle_f.values())))
    }

    pub fn relative_span_h(&self) -> f64 {
        rel(span(&self.jump_h()), span(self.middle_h.values()).max(span(self.lower_h.values())))
    }
}

fn rel(a: f64, scale: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a / scale.max(f64::MIN_POSITIVE)
    }
}

/// Pressure evaluator with the additive constants fixed so that both
/// pressure jumps vanish at `x = 0`.
#[derive(Clone, Debug)]
pub struct PressureField {
    state: InterfaceState,
    density: VorticityDensity,
    vel: VelocityField,
    d1: f64,
    d3: f64,
    constants: [f64; 3],
    anchors: [f64; 4],
    gl: GaussLegendre,
}

impl PressureField {
    pub fn new(x: &InterfaceState, w: &VorticityDensity) -> Result<Self> {
        let vel = VelocityField::with_upsampling(x, w, 2)?;
        let mut pf = Self {
            state: x.clone(),
            density: w.clone(),
            vel,
            d1: x.f().max_abs() + x.c_inf() + 1.0,
            d3: -x.h().max_abs() - 1.0,
            constants: [0.0; 3],
            anchors: [0.0; 4],
            gl: GaussLegendre::new(NonZeroUsize::new(GL_ORDER).expect("nonzero")),
        };
        let a1 = pf.raw_on_interface(0, Interface::F)?;
        let a2f = pf.raw_on_interface(1, Interface::F)?;
        let a2h = pf.raw_on_interface(1, Interface::H)?;
        let a3 = pf.raw_on_interface(2, Interface::H)?;
        pf.constants = [a2f - a1, 0.0, a2h - a3];
        pf.anchors = [a1 + pf.constants[0], a2f, a2h, a3 + pf.constants[2]];
        Ok(pf)
    }

    pub fn velocity_field(&self) -> &VelocityField {
        &self.vel
    }

    /// The constants `c_i`.
    pub fn constants(&self) -> [f64; 3] {
        self.constants
    }

    /// Path height `d_i(x)` and slope.
    pub fn path(&self, fluid: usize, x: f64) -> (f64, f64) {
        match fluid {
            0 => (self.d1, 0.0),
            1 => {
                let yf = self.vel.interface_y(Interface::F, x);
                let yh = self.vel.interface_y(Interface::H, x);
                let sf = self.vel.interface_slope(Interface::F, x);
                let sh = self.vel.interface_slope(Interface::H, x);
                (0.5 * (yf + yh), 0.5 * (sf + sh))
            }
            _ => (self.d3, 0.0),
        }
    }

    fn panels(&self, a: f64, b: f64, g: impl Fn(f64) -> f64) -> f64 {
        let width = self.vel.grid().dx();
        let np = ((b - a).abs() / width).ceil().max(1.0) as usize;
        let h = (b - a) / np as f64;
        (0..np)
            .map(|k| {
                let lo = a + h * k as f64;
                self.gl.integrate(lo, lo + h, &g)
            })
            .sum()
    }

    fn horizontal(&self, fluid: usize, x: f64) -> f64 {
        self.panels(0.0, x, |s| {
            let (d, dp) = self.path(fluid, s);
            let v = self.vel.velocity_unchecked(s, d, Kernel::Periodic);
            v[0] + dp * v[1]
        })
    }

    fn vertical(&self, fluid: usize, x: f64, y: f64) -> f64 {
        let (d, _) = self.path(fluid, x);
        self.panels(d, y, |t| self.vel.velocity_unchecked(x, t, Kernel::Periodic)[1])
    }

    fn fluid_params(&self, fluid: usize) -> (f64, f64) {
        let p = self.state.params();
        (p.mu[fluid] / p.permeability, p.rho[fluid] * p.gravity)
    }

    fn raw(&self, fluid: usize, x: f64, y: f64) -> f64 {
        let (mk, rg) = self.fluid_params(fluid);
        -mk * (self.horizontal(fluid, x) + self.vertical(fluid, x, y)) - rg * y
    }

    /// Raw pressure of `fluid` at the interface point above or below `x = 0`.
    /// The last few grid spacings of the vertical path use a quartic through
    /// interior samples and the one-sided trace.
    fn raw_on_interface(&self, fluid: usize, which: Interface) -> Result<f64> {
        let g = self.vel.grid();
        let dx = g.dx();
        let y_int = self.vel.interface_y(which, 0.0);
        let (d, _) = self.path(fluid, 0.0);
        let side = [Region::Upper, Region::Middle, Region::Lower][fluid];
        let trace = trace_at(&self.state, &self.density, which, side)?;
        let v_end = trace.1.values()[g.origin_index()];
        let dir = (y_int - d).signum();
        let total = (y_int - d).abs();
        let delta = (3.0 * dx).min(total / 2.5);
        let interior = self.panels(d, y_int - dir * delta, |t| self.vel.velocity_unchecked(0.0, t, Kernel::Periodic)[1]);
        let ts = [0.0, delta, 1.5 * delta, 2.0 * delta, 2.5 * delta];
        let vs: Vec<f64> = ts
            .iter()
            .map(|&t| {
                if t == 0.0 {
                    v_end
                } else {
                    self.vel.velocity_unchecked(0.0, y_int - dir * t, Kernel::Periodic)[1]
                }
            })
            .collect();
        let lagrange = |t: f64| {
            (0..ts.len())
                .map(|i| {
                    let mut w = vs[i];
                    for j in 0..ts.len() {
                        if j != i {
                            w *= (t - ts[j]) / (ts[i] - ts[j]);
                        }
                    }
                    w
                })
                .sum::<f64>()
        };
        let last = dir * self.gl.integrate(0.0, delta, lagrange);
        let (mk, rg) = self.fluid_params(fluid);
        Ok(-mk * (interior + last) - rg * y_int)
    }

    /// `p_i(z)` for a point inside fluid `i`.
    pub fn pressure(&self, p: &FieldPoint) -> Result<f64> {
        let fluid = p.region.fluid().ok_or(Error::EvaluationRefused {
            x: p.x,
            y: p.y,
            distance: p.distance,
        })?;
        Ok(self.pressure_unchecked(fluid, p.x, p.y))
    }

    /// `p_i` at `(x, y)` without region checks, for finite-difference stencils.
    pub fn pressure_unchecked(&self, fluid: usize, x: f64, y: f64) -> f64 {
        self.raw(fluid, x, y) + self.constants[fluid]
    }

    /// Pressures along both interfaces from the tangential traces.
    pub fn interface_pressures(&self) -> Result<InterfacePressures> {
        let x = &self.state;
        let w = &self.density;
        let g = *x.grid();
        let o = g.origin_index();
        let build = |fluid: usize, which: Interface, side: Region, anchor: f64| -> Result<Profile> {
            let tr = trace_at(x, w, which, side)?;
            let (u, up) = match which {
                Interface::F => (x.f().values(), x.fp()),
                Interface::H => (x.h().values(), x.hp()),
            };
            let tang = tangential(&tr, up);
            let prim = grid::antiderivative_values(&g, &tang);
            let (mk, rg) = self.fluid_params(fluid);
            Profile::new(
                g,
                (0..g.len()).map(|i| anchor - mk * prim[i] - rg * (u[i] - u[o])).collect(),
            )
        };
        Ok(InterfacePressures {
            upper_f: build(0, Interface::F, Region::Upper, self.anchors[0])?,
            middle_f: build(1, Interface::F, Region::Middle, self.anchors[1])?,
            middle_h: build(1, Interface::H, Region::Middle, self.anchors[2])?,
            lower_h: build(2, Interface::H, Region::Lower, self.anchors[3])?,
        })
    }
}

/// `p_i(z)`; the point must lie in `region`.
pub fn pressure_at(x: &InterfaceState, w: &VorticityDensity, region: Region, z: &FieldPoint) -> Result<f64> {
    if z.region != region {
        return Err(Error::RegionMismatch {
            requested: region.name().to_string(),
            found: z.region.name().to_string(),
        });
    }
    PressureField::new(x, w)?.pressure(z)
}
