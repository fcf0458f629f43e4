//! Reconstructions of the interface operators from the `B_{n,m}` and
//! `C_m`, `D_m` families, plus flat-interface symbols.

use crate::error::Result;
use crate::grid::{self, Profile};
use crate::kernels::{apply_ab, apply_bnm, apply_cd, apply_layer, KernelKind};
use crate::solver::{apply_block_operator, Which};
use crate::state::{InterfaceState, VorticityDensity};

/// `(u' B_{0,1} - B_{1,1}, B_{0,1} + u' B_{1,1})`, which equal `(A(u)[w], B(u)[w])`.
pub fn ab_from_bnm(u: &Profile, w: &Profile) -> Result<(Profile, Profile)> {
    let b01 = apply_bnm(&[u], &[], w)?;
    let b11 = apply_bnm(&[u], &[u], w)?;
    let up = grid::derivative(u)?;
    let a = up.zip_with(&b01, |p, x| p * x)?.zip_with(&b11, |x, y| x - y)?;
    let b = up.zip_with(&b11, |p, x| p * x)?.zip_with(&b01, |x, y| x + y)?;
    Ok((a, b))
}

/// `calA(X)[w]` and `calB(X)[w]` rebuilt from `A`, `B`, `C_1`, `D_1` and their
/// primed counterparts, as `[calA_1, calA_2, calB_1, calB_2]`.
pub fn block_from_cd(x: &InterfaceState, w: &VorticityDensity) -> Result<[Profile; 4]> {
    let g = *x.grid();
    let (f, h) = (x.f(), x.h());
    let c = x.c_inf();
    let (w1, w2) = (&w.w1, &w.w2);
    let hw2 = h.zip_with(w2, |p, q| p * q)?;
    let fw1 = f.zip_with(w1, |p, q| p * q)?;
    let cw2 = apply_cd(KernelKind::C(1), x, w2)?;
    let chw2 = apply_cd(KernelKind::C(1), x, &hw2)?;
    let dw2 = apply_cd(KernelKind::D(1), x, w2)?;
    let cpw1 = apply_cd(KernelKind::CPrime(1), x, w1)?;
    let cpfw1 = apply_cd(KernelKind::CPrime(1), x, &fw1)?;
    let dpw1 = apply_cd(KernelKind::DPrime(1), x, w1)?;
    let af = apply_ab(KernelKind::AOp, f, w1)?;
    let ah = apply_ab(KernelKind::AOp, h, w2)?;
    let bf = apply_ab(KernelKind::BOp, f, w1)?;
    let bh = apply_ab(KernelKind::BOp, h, w2)?;
    let (fp, hp) = (x.fp(), x.hp());
    let (fv, hv) = (f.values(), h.values());
    let n = g.len();
    let mut r = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for j in 0..n {
        let (cw, chw, dw) = (cw2.values()[j], chw2.values()[j], dw2.values()[j]);
        let (cpw, cpfw, dpw) = (cpw1.values()[j], cpfw1.values()[j], dpw1.values()[j]);
        r[0][j] = af.values()[j] + fp[j] * dw - (c + fv[j]) * cw + chw;
        r[1][j] = hp[j] * dpw + (c - hv[j]) * cpw + cpfw + ah.values()[j];
        r[2][j] = bf.values()[j] + dw + (c + fv[j]) * fp[j] * cw - fp[j] * chw;
        r[3][j] = dpw - (c - hv[j]) * hp[j] * cpw - hp[j] * cpfw + bh.values()[j];
    }
    let [a, b, cc, d] = r;
    Ok([Profile::new(g, a)?, Profile::new(g, b)?, Profile::new(g, cc)?, Profile::new(g, d)?])
}

/// Largest deviation between the direct operators and both reconstructions.
pub fn reconstruction_error(x: &InterfaceState, w: &VorticityDensity) -> Result<f64> {
    let (a1, a2) = apply_block_operator(Which::CalA, x, w)?;
    let (b1, b2) = apply_block_operator(Which::CalB, x, w)?;
    let rec = block_from_cd(x, w)?;
    let mut err = 0.0f64;
    for (got, want) in [(&a1, &rec[0]), (&a2, &rec[1]), (&b1, &rec[2]), (&b2, &rec[3])] {
        err = err.max(max_diff(got.values(), want.values()));
    }
    for (u, om) in [(x.f(), &w.w1), (x.h(), &w.w2)] {
        let (a, b) = ab_from_bnm(u, om)?;
        err = err.max(max_diff(apply_ab(KernelKind::AOp, u, om)?.values(), a.values()));
        err = err.max(max_diff(apply_ab(KernelKind::BOp, u, om)?.values(), b.values()));
    }
    Ok(err)
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Flat-interface operators with a known response to `cos(kx)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlatOperator {
    A,
    B,
    S,
    SPrime,
    T,
    TPrime,
}

impl FlatOperator {
    pub const ALL: [FlatOperator; 6] = [
        FlatOperator::SPrime,
        FlatOperator::S,
        FlatOperator::T,
        FlatOperator::TPrime,
        FlatOperator::B,
        FlatOperator::A,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FlatOperator::A => "A(0)",
            FlatOperator::B => "B(0)",
            FlatOperator::S => "S(0)",
            FlatOperator::SPrime => "S'(0)",
            FlatOperator::T => "T(0)",
            FlatOperator::TPrime => "T'(0)",
        }
    }

    /// `(p, q)` with `Op[cos(kx)] = p cos(kx) + q sin(kx)` at separation `c`.
    pub fn symbol(self, k: f64, c: f64) -> (f64, f64) {
        let e = (-c * k.abs()).exp();
        let sg = k.signum();
        match self {
            FlatOperator::A => (0.0, 0.0),
            FlatOperator::B => (0.0, sg),
            FlatOperator::S => (-e, 0.0),
            FlatOperator::SPrime => (e, 0.0),
            FlatOperator::T | FlatOperator::TPrime => (0.0, sg * e),
        }
    }

    /// Applies the operator at the flat state `x` to `w`.
    pub fn apply(self, x: &InterfaceState, w: &Profile) -> Result<Profile> {
        match self {
            FlatOperator::A => apply_ab(KernelKind::AOp, x.f(), w),
            FlatOperator::B => apply_ab(KernelKind::BOp, x.f(), w),
            FlatOperator::S => apply_layer(KernelKind::S, x, w),
            FlatOperator::SPrime => apply_layer(KernelKind::SPrime, x, w),
            FlatOperator::T => apply_layer(KernelKind::T, x, w),
            FlatOperator::TPrime => apply_layer(KernelKind::TPrime, x, w),
        }
    }
}
