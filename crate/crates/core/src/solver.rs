//! Block operators, the density equation and invertibility diagnostics.

use std::f64::consts::PI;

use faer::Mat;

use crate::error::{Error, Result};
use crate::exec::{self, Exec};
use crate::grid::{self, Profile};
use crate::kernels::{layer_block, Block, Form, GridSums, KernelKind};
use crate::linalg;
use crate::state::{InterfaceState, VorticityDensity};

/// Which block operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Which {
    /// Normal-trace operator with self blocks `A(f)`, `A(h)` and layer blocks `S`, `S'`.
    CalA,
    /// Tangential operator with self blocks `B(f)`, `B(h)` and layer blocks `T`, `T'`.
    CalB,
}

/// Linear solve strategy for the density equation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SolveMethod {
    /// Dense LU with partial pivoting.
    Lu,
    /// Restarted GMRES on the assembled matrix.
    Gmres { restart: usize, tol: f64, max_iter: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub exec: Exec,
    pub method: SolveMethod,
    pub cond_max: f64,
    pub residual_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            exec: Exec::default(),
            method: SolveMethod::Lu,
            cond_max: 1e12,
            residual_tol: 1e-10,
        }
    }
}

/// Dense `2N x 2N` quadrature matrix of a block operator, row-major.
#[derive(Clone, Debug)]
pub struct DiscreteBlockOperator {
    which: Which,
    state: InterfaceState,
    data: Vec<f64>,
}

impl DiscreteBlockOperator {
    pub fn which(&self) -> Which {
        self.which
    }

    pub fn state(&self) -> &InterfaceState {
        &self.state
    }

    pub fn dim(&self) -> usize {
        2 * self.state.grid().len()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim() + j]
    }

    /// Block `(r, c)` as an `N x N` row-major copy.
    pub fn block(&self, r: usize, c: usize) -> Vec<f64> {
        let n = self.state.grid().len();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            let row = (r * n + i) * 2 * n + c * n;
            out.extend_from_slice(&self.data[row..row + n]);
        }
        out
    }

    pub fn apply(&self, w: &[f64]) -> Vec<f64> {
        linalg::matvec(Exec::default(), &self.data, self.dim(), w)
    }

    pub fn apply_with(&self, exec: Exec, w: &[f64]) -> Vec<f64> {
        linalg::matvec(exec, &self.data, self.dim(), w)
    }

    pub fn as_row_major(&self) -> &[f64] {
        &self.data
    }
}

fn blocks(which: Which, x: &InterfaceState) -> [Block<'_>; 4] {
    let (self_form, upper, lower) = match which {
        Which::CalA => (Form::A, KernelKind::S, KernelKind::SPrime),
        Which::CalB => (Form::B, KernelKind::T, KernelKind::TPrime),
    };
    [
        Block::self_block(self_form, x.f().values(), x.fp(), x.fpp()),
        layer_block(upper, x).expect("layer kind"),
        layer_block(lower, x).expect("layer kind"),
        Block::self_block(self_form, x.h().values(), x.hp(), x.hpp()),
    ]
}

fn check_gap(x: &InterfaceState) -> Result<()> {
    let gap = x.gap();
    if gap > 0.0 {
        Ok(())
    } else {
        Err(Error::InterfaceCollision { gap })
    }
}

/// Dense quadrature matrix of `calA(X)` or `calB(X)`.
pub fn assemble(which: Which, x: &InterfaceState) -> Result<DiscreteBlockOperator> {
    assemble_with(which, x, Exec::default())
}

pub fn assemble_with(which: Which, x: &InterfaceState, exec: Exec) -> Result<DiscreteBlockOperator> {
    check_gap(x)?;
    let g = *x.grid();
    let n = g.len();
    let sums = GridSums::new(&g);
    let wgt = g.dx() / PI;
    let dtab: Vec<f64> = (0..n).map(|d| grid::diff_matrix_entry(&g, d as isize)).collect();
    let bl = blocks(which, x);
    let mut data = vec![0.0; 4 * n * n];
    exec::fill_rows(exec, &mut data, 2 * n, |r, row| {
        let (t, left, right) = if r < n { (r, &bl[0], &bl[1]) } else { (r - n, &bl[2], &bl[3]) };
        let (lrow, rrow) = row.split_at_mut(n);
        for i in 0..n {
            lrow[i] = wgt * left.value(&sums, t, i);
            rrow[i] = wgt * right.value(&sums, t, i);
        }
        if which == Which::CalB {
            let self_row = if r < n { lrow } else { rrow };
            for i in 0..n {
                self_row[i] -= wgt * dtab[sums.diff(t, i)];
            }
        }
    });
    Ok(DiscreteBlockOperator {
        which,
        state: x.clone(),
        data,
    })
}

/// Matrix-free evaluation of `calA(X)[w]` or `calB(X)[w]`.
pub fn apply_block_operator(which: Which, x: &InterfaceState, w: &VorticityDensity) -> Result<(Profile, Profile)> {
    apply_block_operator_with(which, x, w, Exec::default())
}

pub fn apply_block_operator_with(
    which: Which,
    x: &InterfaceState,
    w: &VorticityDensity,
    exec: Exec,
) -> Result<(Profile, Profile)> {
    check_gap(x)?;
    let g = *x.grid();
    if w.w1.grid() != &g {
        return Err(Error::GridMismatch);
    }
    let sums = GridSums::new(&g);
    let bl = blocks(which, x);
    let (w1, w2) = (w.w1.values(), w.w2.values());
    let (d1, d2) = match which {
        Which::CalB => (
            Some(grid::derivative_values(&g, w1)),
            Some(grid::derivative_values(&g, w2)),
        ),
        Which::CalA => (None, None),
    };
    let dx = g.dx();
    let a = bl[0].apply(&sums, dx, w1, d1.as_deref(), exec);
    let b = bl[1].apply(&sums, dx, w2, None, exec);
    let c = bl[2].apply(&sums, dx, w1, None, exec);
    let d = bl[3].apply(&sums, dx, w2, d2.as_deref(), exec);
    Ok((
        Profile::new(g, a.iter().zip(&b).map(|(p, q)| p + q).collect())?,
        Profile::new(g, c.iter().zip(&d).map(|(p, q)| p + q).collect())?,
    ))
}

/// Right-hand side `Theta X'` of the density equation.
pub fn density_rhs(x: &InterfaceState) -> Vec<f64> {
    let p = x.params();
    let (t1, t2) = (p.theta1(), p.theta2());
    x.fp().iter().map(|v| t1 * v).chain(x.hp().iter().map(|v| t2 * v)).collect()
}

/// Solution of the density equation with its diagnostics.
#[derive(Clone, Debug)]
pub struct OmegaSolution {
    pub omega: VorticityDensity,
    /// `||(I - A calA) w - Theta X'||_inf / ||Theta X'||_inf`.
    pub relative_residual: f64,
    /// 1-norm condition estimate of `I - A calA` (1 when `A = 0`).
    pub cond_estimate: f64,
}

fn system_matrix(cal_a: &DiscreteBlockOperator, a1: f64, a2: f64) -> Mat<f64> {
    let m = cal_a.dim();
    let n = m / 2;
    Mat::from_fn(m, m, |i, j| {
        let a = if i < n { a1 } else { a2 };
        (i == j) as u8 as f64 - a * cal_a.entry(i, j)
    })
}

fn system_apply(cal_a: &DiscreteBlockOperator, a1: f64, a2: f64, w: &[f64], exec: Exec) -> Vec<f64> {
    let n = w.len() / 2;
    let aw = cal_a.apply_with(exec, w);
    w.iter()
        .zip(&aw)
        .enumerate()
        .map(|(i, (p, q))| p - if i < n { a1 } else { a2 } * q)
        .collect()
}

/// Density `w` with `(I - A calA(X)) w = Theta X'`.
pub fn solve_omega(x: &InterfaceState) -> Result<VorticityDensity> {
    Ok(solve_omega_with(x, &SolverConfig::default())?.omega)
}

pub fn solve_omega_with(x: &InterfaceState, cfg: &SolverConfig) -> Result<OmegaSolution> {
    check_gap(x)?;
    let (a1, a2) = (x.params().a1(), x.params().a2());
    if a1 == 0.0 && a2 == 0.0 {
        return solve_with_matrix(x, None, cfg);
    }
    let cal_a = assemble_with(Which::CalA, x, cfg.exec)?;
    solve_with_matrix(x, Some(&cal_a), cfg)
}

fn invertibility(x: &InterfaceState, reason: &str, cond: f64) -> Error {
    let (a1, a2) = (x.params().a1(), x.params().a2());
    let radius = if a1 * a2 < 0.0 {
        neumann_radius(x, a1, a2).ok()
    } else {
        None
    };
    Error::InvertibilityFailure {
        reason: reason.to_string(),
        cond_estimate: cond,
        neumann_radius: radius,
    }
}

fn solve_with_matrix(x: &InterfaceState, cal_a: Option<&DiscreteBlockOperator>, cfg: &SolverConfig) -> Result<OmegaSolution> {
    let g = *x.grid();
    let rhs = density_rhs(x);
    let rhs_norm = linalg::norm_inf(&rhs);
    let cal_a = match cal_a {
        Some(c) if rhs_norm > 0.0 => c,
        _ => {
            return Ok(OmegaSolution {
                omega: VorticityDensity::from_slice(g, &rhs)?,
                relative_residual: 0.0,
                cond_estimate: 1.0,
            })
        }
    };
    let (a1, a2) = (x.params().a1(), x.params().a2());
    let m = system_matrix(cal_a, a1, a2);
    let lu = m.partial_piv_lu();
    let cond = linalg::condition_estimate(&m, &lu);
    if !cond.is_finite() || cond > cfg.cond_max {
        return Err(invertibility(x, "condition estimate above cond_max", cond));
    }
    let mut w = match cfg.method {
        SolveMethod::Lu => linalg::lu_solve(&lu, &rhs),
        SolveMethod::Gmres { restart, tol, max_iter } => {
            let out = linalg::gmres(|v| system_apply(cal_a, a1, a2, v, cfg.exec), &rhs, restart, tol, max_iter);
            if !out.converged {
                return Err(invertibility(x, "gmres did not converge", cond));
            }
            out.x
        }
    };
    let residual = |w: &[f64]| -> Vec<f64> {
        system_apply(cal_a, a1, a2, w, cfg.exec)
            .iter()
            .zip(&rhs)
            .map(|(p, q)| p - q)
            .collect()
    };
    let mut r = residual(&w);
    let mut rel = linalg::norm_inf(&r) / rhs_norm;
    if !(rel <= cfg.residual_tol) {
        let corr = linalg::lu_solve(&lu, &r);
        w.iter_mut().zip(&corr).for_each(|(p, q)| *p -= q);
        r = residual(&w);
        rel = linalg::norm_inf(&r) / rhs_norm;
    }
    if !rel.is_finite() || w.iter().any(|v| !v.is_finite()) {
        return Err(invertibility(x, "non-finite solution", cond));
    }
    if rel > cfg.residual_tol {
        return Err(invertibility(x, "residual above tolerance", cond));
    }
    Ok(OmegaSolution {
        omega: VorticityDensity::from_slice(g, &w)?,
        relative_residual: rel,
        cond_estimate: cond,
    })
}

/// `Phi(X) = calB(X)[w]` together with the density solve.
#[derive(Clone, Debug)]
pub struct PhiEval {
    pub phi1: Profile,
    pub phi2: Profile,
    pub solution: OmegaSolution,
}

pub fn compute_phi(x: &InterfaceState) -> Result<(Profile, Profile)> {
    let e = compute_phi_with(x, &SolverConfig::default())?;
    Ok((e.phi1, e.phi2))
}

pub fn compute_phi_with(x: &InterfaceState, cfg: &SolverConfig) -> Result<PhiEval> {
    let solution = solve_omega_with(x, cfg)?;
    let (phi1, phi2) = apply_block_operator_with(Which::CalB, x, &solution.omega, cfg.exec)?;
    Ok(PhiEval { phi1, phi2, solution })
}

/// `R_i = Theta_i + a_i Phi_i` from an already computed `Phi`.
pub fn rt_from_phi(x: &InterfaceState, phi1: &Profile, phi2: &Profile) -> (Profile, Profile) {
    let p = x.params();
    (
        Profile::from_values_unchecked(*phi1.grid(), phi1.values().iter().map(|v| p.theta1() + p.a1() * v).collect()),
        Profile::from_values_unchecked(*phi2.grid(), phi2.values().iter().map(|v| p.theta2() + p.a2() * v).collect()),
    )
}

/// Pointwise Rayleigh--Taylor functions `(R_1, R_2)`.
pub fn rayleigh_taylor(x: &InterfaceState) -> Result<(Profile, Profile)> {
    let (p1, p2) = compute_phi(x)?;
    Ok(rt_from_phi(x, &p1, &p2))
}

fn self_resolvent(x: &InterfaceState, upper: bool, a: f64) -> Result<(Mat<f64>, Vec<f64>)> {
    let g = *x.grid();
    let n = g.len();
    let sums = GridSums::new(&g);
    let wgt = g.dx() / PI;
    let blk = if upper {
        Block::self_block(Form::A, x.f().values(), x.fp(), x.fpp())
    } else {
        Block::self_block(Form::A, x.h().values(), x.hp(), x.hpp())
    };
    let lay = layer_block(if upper { KernelKind::S } else { KernelKind::SPrime }, x)?;
    let mut rows = vec![0.0; 2 * n * n];
    exec::fill_rows(Exec::default(), &mut rows, 2 * n, |t, row| {
        let (l, r) = row.split_at_mut(n);
        for i in 0..n {
            l[i] = wgt * blk.value(&sums, t, i);
            r[i] = wgt * lay.value(&sums, t, i);
        }
    });
    let m = Mat::from_fn(n, n, |i, j| (i == j) as u8 as f64 - a * rows[i * 2 * n + j]);
    let layer: Vec<f64> = (0..n * n).map(|k| rows[(k / n) * 2 * n + n + k % n]).collect();
    Ok((m, layer))
}

/// Power-iteration estimate of the spectral radius of
/// `a1 a2 (1 - a1 A(f))^{-1} S(X) (1 - a2 A(h))^{-1} S'(X)`.
pub fn neumann_radius(x: &InterfaceState, a1: f64, a2: f64) -> Result<f64> {
    check_gap(x)?;
    if a1 * a2 == 0.0 {
        return Ok(0.0);
    }
    let n = x.grid().len();
    let (m1, s) = self_resolvent(x, true, a1)?;
    let (m2, sp) = self_resolvent(x, false, a2)?;
    let lu1 = m1.partial_piv_lu();
    let lu2 = m2.partial_piv_lu();
    let apply_t = |v: &[f64]| -> Vec<f64> {
        let y = linalg::matvec(Exec::default(), &sp, n, v);
        let y = linalg::lu_solve(&lu2, &y);
        let y = linalg::matvec(Exec::default(), &s, n, &y);
        linalg::lu_solve(&lu1, &y).into_iter().map(|q| a1 * a2 * q).collect()
    };
    let mut v: Vec<f64> = (0..n).map(|j| 1.0 + 0.5 * (1.7 * j as f64).sin()).collect();
    let nv = linalg::norm2(&v);
    v.iter_mut().for_each(|q| *q /= nv);
    let mut est = 0.0;
    for _ in 0..50 {
        let y = apply_t(&v);
        let ny = linalg::norm2(&y);
        if !ny.is_finite() {
            return Err(invertibility(x, "inner resolvent failure", f64::INFINITY));
        }
        if ny == 0.0 {
            return Ok(0.0);
        }
        let converged = (ny - est).abs() <= 1e-6 * ny;
        est = ny;
        v = y.into_iter().map(|q| q / ny).collect();
        if converged {
            break;
        }
    }
    Ok(est)
}

/// Condition estimate of `lambda I - calA(X)`.
pub fn resolvent_condition(x: &InterfaceState, lambda: f64) -> Result<f64> {
    let a = assemble(Which::CalA, x)?;
    let m = a.dim();
    let mat = Mat::from_fn(m, m, |i, j| lambda * (i == j) as u8 as f64 - a.entry(i, j));
    let lu = mat.partial_piv_lu();
    Ok(linalg::condition_estimate(&mat, &lu))
}

/// Partial sum `sum_{n <= terms} (A calA)^n Theta X'`.
pub fn neumann_series(x: &InterfaceState, terms: usize) -> Result<VorticityDensity> {
    let a = assemble(Which::CalA, x)?;
    let (a1, a2) = (x.params().a1(), x.params().a2());
    let n = x.grid().len();
    let mut term = density_rhs(x);
    let mut acc = term.clone();
    for _ in 0..terms {
        let y = a.apply(&term);
        term = y
            .iter()
            .enumerate()
            .map(|(i, v)| if i < n { a1 } else { a2 } * v)
            .collect();
        acc.iter_mut().zip(&term).for_each(|(p, q)| *p += q);
    }
    VorticityDensity::from_slice(*x.grid(), &acc)
}
