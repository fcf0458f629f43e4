//! Flat-interface dispersion relation and frozen-coefficient symbols.

use num_complex::Complex64;

use crate::error::Result;
use crate::grid::Profile;
use crate::kernels::{apply_bnm_density, apply_cd_density, KernelKind};
use crate::params::FluidParams;
use crate::solver::{apply_block_operator, Which};
use crate::state::{InterfaceState, VorticityDensity};

/// Linearisation `d/dt X_hat = M(k) X_hat` about the flat state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DispersionMatrix {
    pub k: f64,
    pub m: [[f64; 2]; 2],
    pub eigenvalues: [Complex64; 2],
}

impl DispersionMatrix {
    /// Right eigenvector for eigenvalue `idx` (real spectrum assumed).
    pub fn eigenvector(&self, idx: usize) -> [f64; 2] {
        let lam = self.eigenvalues[idx].re;
        let [[a, b], [c, d]] = self.m;
        let v = if b.abs() + (a - lam).abs() >= c.abs() + (d - lam).abs() {
            [b, lam - a]
        } else {
            [lam - d, c]
        };
        let nv = v[0].hypot(v[1]);
        if nv == 0.0 {
            return if idx == 0 { [1.0, 0.0] } else { [0.0, 1.0] };
        }
        [v[0] / nv, v[1] / nv]
    }

    /// Left eigenvector, normalised so that `<left_i, right_i> = 1`.
    pub fn left_eigenvector(&self, idx: usize) -> [f64; 2] {
        let t = DispersionMatrix {
            m: [[self.m[0][0], self.m[1][0]], [self.m[0][1], self.m[1][1]]],
            ..*self
        };
        let l = t.eigenvector(idx);
        let r = self.eigenvector(idx);
        let dot = l[0] * r[0] + l[1] * r[1];
        [l[0] / dot, l[1] / dot]
    }

    pub fn has_real_spectrum(&self) -> bool {
        self.eigenvalues.iter().all(|l| l.im == 0.0)
    }
}

fn eig2(m: [[f64; 2]; 2]) -> [Complex64; 2] {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let half = 0.5 * tr;
    let disc = half * half - det;
    if disc >= 0.0 {
        let r = disc.sqrt();
        // larger-magnitude root first, the other from the product to avoid cancellation
        let big = if half >= 0.0 { half + r } else { half - r };
        let small = if big != 0.0 { det / big } else { 0.0 };
        let (l1, l2) = if big >= small { (big, small) } else { (small, big) };
        [Complex64::new(l1, 0.0), Complex64::new(l2, 0.0)]
    } else {
        let r = (-disc).sqrt();
        [Complex64::new(half, r), Complex64::new(half, -r)]
    }
}

/// `M(k) = |k| [[1, e], [e, 1]] [[1, a1 e], [-a2 e, 1]]^{-1} diag(Theta1, Theta2)`, `e = exp(-c|k|)`.
pub fn dispersion_matrix(k: f64, params: &FluidParams) -> DispersionMatrix {
    let ak = k.abs();
    let e = (-params.c_inf * ak).exp();
    let (a1, a2) = (params.a1(), params.a2());
    let (t1, t2) = (params.theta1(), params.theta2());
    let det = 1.0 + a1 * a2 * e * e;
    // inverse of [[1, a1 e], [-a2 e, 1]]
    let inv = [[1.0 / det, -a1 * e / det], [a2 * e / det, 1.0 / det]];
    let sym = [[1.0, e], [e, 1.0]];
    let mut m = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let theta = if j == 0 { t1 } else { t2 };
            let s: f64 = (0..2).map(|l| sym[i][l] * inv[l][j]).sum();
            m[i][j] = ak * s * theta;
        }
    }
    DispersionMatrix {
        k,
        m,
        eigenvalues: eig2(m),
    }
}

/// Frozen-coefficient coefficients `(alpha, beta)` at one node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrozenSymbol {
    pub alpha: f64,
    pub beta: f64,
    /// Set for the lower interface, whose formula is obtained by the mirror substitution.
    pub derived_by_analogy: bool,
}

/// Profiles `(alpha, beta)` on the upper interface.
pub fn principal_symbol_profiles(x: &InterfaceState, w: &VorticityDensity) -> Result<(Profile, Profile)> {
    let (phi1, _) = apply_block_operator(Which::CalB, x, w)?;
    let p = x.params();
    let c = x.c_inf();
    let (f, h) = (x.f(), x.h());
    let fp = x.fp();
    let b11 = apply_bnm_density(&[f], &[f], &w.w1)?;
    let hw2 = h.zip_with(&w.w2, |a, b| a * b)?;
    let cw2 = apply_cd_density(KernelKind::C(1), x, &w.w2)?;
    let chw2 = apply_cd_density(KernelKind::C(1), x, &hw2)?;
    let n = x.grid().len();
    let mut alpha = vec![0.0; n];
    let mut beta = vec![0.0; n];
    for j in 0..n {
        let q = 1.0 + fp[j] * fp[j];
        alpha[j] = (p.theta1() + p.a1() * phi1.values()[j]) / q;
        let a_x = (c + f.values()[j]) * cw2.values()[j] - chw2.values()[j];
        beta[j] = b11.values()[j] + a_x + p.a1() * w.w1.values()[j] / q;
    }
    Ok((Profile::new(*x.grid(), alpha)?, Profile::new(*x.grid(), beta)?))
}

/// `(alpha, beta)` of the upper interface at node `node`.
pub fn principal_symbol(x: &InterfaceState, w: &VorticityDensity, node: usize) -> Result<FrozenSymbol> {
    let (a, b) = principal_symbol_profiles(x, w)?;
    Ok(FrozenSymbol {
        alpha: a.values()[node],
        beta: b.values()[node],
        derived_by_analogy: false,
    })
}

/// Lower-interface analogue, from `f <-> h`, `c_inf <-> -c_inf`, `(Theta1, a1) <-> (Theta2, a2)`.
pub fn principal_symbol_lower(x: &InterfaceState, w: &VorticityDensity, node: usize) -> Result<FrozenSymbol> {
    let (_, phi2) = apply_block_operator(Which::CalB, x, w)?;
    let p = x.params();
    let c = x.c_inf();
    let (f, h) = (x.f(), x.h());
    let hp = x.hp()[node];
    let q = 1.0 + hp * hp;
    let b11 = apply_bnm_density(&[h], &[h], &w.w2)?;
    let fw1 = f.zip_with(&w.w1, |a, b| a * b)?;
    let cw1 = apply_cd_density(KernelKind::CPrime(1), x, &w.w1)?;
    let cfw1 = apply_cd_density(KernelKind::CPrime(1), x, &fw1)?;
    let a_x = (h.values()[node] - c) * cw1.values()[node] - cfw1.values()[node];
    Ok(FrozenSymbol {
        alpha: (p.theta2() + p.a2() * phi2.values()[node]) / q,
        beta: b11.values()[node] + a_x + p.a2() * w.w2.values()[node] / q,
        derived_by_analogy: true,
    })
}

/// One row of a stability scan.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanRow {
    pub params: FluidParams,
    pub rt_stable_at_rest: bool,
    /// `min_k (-max_i Re lambda_i(k)) / |k|` over the scanned wavenumbers.
    pub min_spectral_gap: f64,
}

/// Classifies each parameter set with the flat-state dispersion relation.
pub fn rt_region_scan(grid: &[FluidParams], ks: &[f64]) -> Vec<ScanRow> {
    grid.iter()
        .map(|p| {
            let gap = ks
                .iter()
                .filter(|k| **k != 0.0)
                .map(|&k| {
                    let d = dispersion_matrix(k, p);
                    let top = d.eigenvalues.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
                    -top / k.abs()
                })
                .fold(f64::INFINITY, f64::min);
            ScanRow {
                params: *p,
                rt_stable_at_rest: p.theta1() < 0.0 && p.theta2() < 0.0,
                min_spectral_gap: gap,
            }
        })
        .collect()
}
