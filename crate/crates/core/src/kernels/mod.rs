//! Quadrature of the singular and layer-type integral operators.
//!
//! All kernels are periodised over `[-L, L)`: each whole-line kernel is
//! replaced by its lattice sum over the images `s + 2Lj`, evaluated in
//! closed form. Singular self-kernels use the trapezoid rule with the
//! `cot` part subtracted, whose grid sum vanishes.

mod bnm;
pub mod sums;

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::exec::{self, Exec};
use crate::grid::{self, Profile};
use crate::state::InterfaceState;

pub use bnm::{apply_bnm, apply_bnm_generic};
pub(crate) use bnm::apply_bnm_density;
pub(crate) use sums::GridSums;

/// Operator families of the boundary-integral formulation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KernelKind {
    AOp,
    BOp,
    S,
    SPrime,
    T,
    TPrime,
    C(u32),
    CPrime(u32),
    D(u32),
    DPrime(u32),
}

/// The three finite differences entering the kernels.
#[derive(Clone, Copy, Debug, Default)]
pub struct DeltaConvention;

impl DeltaConvention {
    /// `u(x) - u(x-s)`.
    pub fn own(u: &Profile, t: usize, i: usize) -> f64 {
        u.values()[t] - u.values()[i]
    }

    /// `c_inf + f(x) - h(x-s)`.
    pub fn upper(x: &InterfaceState, t: usize, i: usize) -> f64 {
        x.c_inf() + x.f().values()[t] - x.h().values()[i]
    }

    /// `h(x) - c_inf - f(x-s)`.
    pub fn lower(x: &InterfaceState, t: usize, i: usize) -> f64 {
        x.h().values()[t] - x.c_inf() - x.f().values()[i]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Form {
    /// `u'(x) R - delta P`, removable singularity.
    A,
    /// `R + u'(x) delta P` minus the derivative term.
    B,
    /// `u'(x) R - delta P` with `delta` bounded away from zero.
    Layer,
    /// `R + u'(x) delta P` with `delta` bounded away from zero.
    LayerT,
    /// `P`.
    C,
    /// `R`.
    D,
}

/// One `N x N` block: kernel evaluated between target node `t` and source node `i`.
#[derive(Clone, Copy)]
pub(crate) struct Block<'a> {
    pub form: Form,
    pub tgt: &'a [f64],
    pub tgt_p: &'a [f64],
    pub tgt_pp: &'a [f64],
    pub src: &'a [f64],
    pub offset: f64,
}

impl<'a> Block<'a> {
    pub fn self_block(form: Form, u: &'a [f64], up: &'a [f64], upp: &'a [f64]) -> Self {
        Self {
            form,
            tgt: u,
            tgt_p: up,
            tgt_pp: upp,
            src: u,
            offset: 0.0,
        }
    }

    pub fn is_singular(&self) -> bool {
        matches!(self.form, Form::A | Form::B)
    }

    #[inline]
    fn combine(&self, t: usize, delta: f64, r: f64, p: f64) -> f64 {
        match self.form {
            Form::A | Form::Layer => self.tgt_p[t] * r - delta * p,
            Form::B | Form::LayerT => r + self.tgt_p[t] * delta * p,
            Form::C => p,
            Form::D => r,
        }
    }

    /// Kernel value without the `dx/pi` weight; on the diagonal of a
    /// singular block this is the analytic limit of the regular part.
    #[inline]
    pub fn value(&self, sums: &GridSums, t: usize, i: usize) -> f64 {
        if t == i && self.is_singular() {
            let up = self.tgt_p[t];
            let upp = self.tgt_pp[t];
            return match self.form {
                Form::A => upp / (2.0 * (1.0 + up * up)),
                _ => up * upp / (2.0 * (1.0 + up * up)),
            };
        }
        let delta = self.tgt[t] + self.offset - self.src[i];
        let (r, p) = sums.rp(sums.diff(t, i), delta);
        self.combine(t, delta, r, p)
    }

    /// `(dx/pi) sum_i K(t,i) w_i`, plus `-dx/pi w'(t)` for the B form.
    pub fn apply(&self, sums: &GridSums, dx: f64, w: &[f64], wp: Option<&[f64]>, exec: Exec) -> Vec<f64> {
        let n = w.len();
        let wgt = dx / PI;
        exec::map_range(exec, n, |t| {
            let mut acc = 0.0;
            for i in 0..n {
                acc += self.value(sums, t, i) * w[i];
            }
            if self.form == Form::B {
                acc -= wp.expect("derivative for B form")[t];
            }
            wgt * acc
        })
    }
}

fn check_same_grid(a: &Profile, b: &Profile) -> Result<()> {
    if a.grid() != b.grid() {
        Err(Error::GridMismatch)
    } else {
        Ok(())
    }
}

fn wrap(p: &Profile, values: Vec<f64>) -> Result<Profile> {
    Profile::new(*p.grid(), values)
}

/// `AOp(u)[w]` or `BOp(u)[w]`.
pub fn apply_ab(kind: KernelKind, u: &Profile, w: &Profile) -> Result<Profile> {
    check_same_grid(u, w)?;
    u.check_decayed()?;
    w.check_decayed()?;
    let g = *u.grid();
    let up = grid::derivative_values(&g, u.values());
    let upp = grid::second_derivative_values(&g, u.values());
    let sums = GridSums::new(&g);
    let form = match kind {
        KernelKind::AOp => Form::A,
        KernelKind::BOp => Form::B,
        other => return Err(Error::Unsupported(format!("{other:?} is not a self operator"))),
    };
    let blk = Block::self_block(form, u.values(), &up, &upp);
    let wp = (form == Form::B).then(|| grid::derivative_values(&g, w.values()));
    wrap(u, blk.apply(&sums, g.dx(), w.values(), wp.as_deref(), Exec::default()))
}

pub(crate) fn layer_block<'a>(kind: KernelKind, x: &'a InterfaceState) -> Result<Block<'a>> {
    let c = x.c_inf();
    let (f, h) = (x.f().values(), x.h().values());
    let upper = |form| Block {
        form,
        tgt: f,
        tgt_p: x.fp(),
        tgt_pp: x.fpp(),
        src: h,
        offset: c,
    };
    let lower = |form| Block {
        form,
        tgt: h,
        tgt_p: x.hp(),
        tgt_pp: x.hpp(),
        src: f,
        offset: -c,
    };
    Ok(match kind {
        KernelKind::S => upper(Form::Layer),
        KernelKind::T => upper(Form::LayerT),
        KernelKind::C(1) => upper(Form::C),
        KernelKind::D(1) => upper(Form::D),
        KernelKind::SPrime => lower(Form::Layer),
        KernelKind::TPrime => lower(Form::LayerT),
        KernelKind::CPrime(1) => lower(Form::C),
        KernelKind::DPrime(1) => lower(Form::D),
        other => return Err(Error::Unsupported(format!("{other:?} has no closed-form layer block"))),
    })
}

fn check_gap(x: &InterfaceState) -> Result<()> {
    let gap = x.gap();
    if gap > 0.0 {
        Ok(())
    } else {
        Err(Error::InterfaceCollision { gap })
    }
}

/// `S`, `S'`, `T` or `T'` applied to `w`.
pub fn apply_layer(kind: KernelKind, x: &InterfaceState, w: &Profile) -> Result<Profile> {
    if !matches!(
        kind,
        KernelKind::S | KernelKind::SPrime | KernelKind::T | KernelKind::TPrime
    ) {
        return Err(Error::Unsupported(format!("{kind:?} is not a layer operator")));
    }
    check_same_grid(x.f(), w)?;
    check_gap(x)?;
    w.check_decayed()?;
    let g = *w.grid();
    let blk = layer_block(kind, x)?;
    wrap(w, blk.apply(&GridSums::new(&g), g.dx(), w.values(), None, Exec::default()))
}

/// `C_m`, `C'_m`, `D_m` or `D'_m` (all arguments equal to `X`) applied to `w`.
pub fn apply_cd(kind: KernelKind, x: &InterfaceState, w: &Profile) -> Result<Profile> {
    w.check_decayed()?;
    apply_cd_density(kind, x, w)
}

/// As [`apply_cd`] without the edge-decay check on `w`.
pub(crate) fn apply_cd_density(kind: KernelKind, x: &InterfaceState, w: &Profile) -> Result<Profile> {
    check_same_grid(x.f(), w)?;
    check_gap(x)?;
    let g = *w.grid();
    let m = match kind {
        KernelKind::C(m) | KernelKind::CPrime(m) | KernelKind::D(m) | KernelKind::DPrime(m) => m,
        other => return Err(Error::Unsupported(format!("{other:?} is not a C/D operator"))),
    };
    if m == 0 {
        return Err(Error::Unsupported("order m must be >= 1".into()));
    }
    if m == 1 {
        let blk = layer_block(kind, x)?;
        return wrap(w, blk.apply(&GridSums::new(&g), g.dx(), w.values(), None, Exec::default()));
    }
    wrap(w, bnm::cd_higher(kind, m, x, w.values()))
}
