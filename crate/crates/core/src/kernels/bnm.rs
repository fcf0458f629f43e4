use std::f64::consts::PI;

use super::sums::{flat_image_sum, image_sum, GridSums};
use super::KernelKind;
use crate::error::{Error, Result};
use crate::exec::{self, Exec};
use crate::grid::{self, Profile};
use crate::state::InterfaceState;

struct Derivs {
    v: Vec<f64>,
    p: Vec<f64>,
    pp: Vec<f64>,
}

fn derivs(u: &Profile) -> Derivs {
    let g = u.grid();
    Derivs {
        v: u.values().to_vec(),
        p: grid::derivative_values(g, u.values()),
        pp: grid::second_derivative_values(g, u.values()),
    }
}

/// `q - 1` for `q = prod (1 + e_k)`, without cancellation.
#[inline]
fn prod_minus_one(es: impl Iterator<Item = f64>) -> f64 {
    es.fold(0.0, |acc, e| acc + e + acc * e)
}

/// `B_{n,m}(a_1..a_m)[b_1..b_n, w]`, closed-form lattice sums where available.
pub fn apply_bnm(a: &[&Profile], b: &[&Profile], w: &Profile) -> Result<Profile> {
    bnm_impl(a, b, w, false, true)
}

/// As [`apply_bnm`] without the edge-decay check on `w`; densities carry algebraic tails.
pub(crate) fn apply_bnm_density(a: &[&Profile], b: &[&Profile], w: &Profile) -> Result<Profile> {
    bnm_impl(a, b, w, false, false)
}

/// Same operator, always through the explicit image sum.
pub fn apply_bnm_generic(a: &[&Profile], b: &[&Profile], w: &Profile) -> Result<Profile> {
    bnm_impl(a, b, w, true, true)
}

fn bnm_impl(a: &[&Profile], b: &[&Profile], w: &Profile, force_generic: bool, check_w: bool) -> Result<Profile> {
    let g = *w.grid();
    for p in a.iter().chain(b.iter()) {
        if p.grid() != &g {
            return Err(Error::GridMismatch);
        }
        p.check_decayed()?;
    }
    if check_w {
        w.check_decayed()?;
    }
    let (n, m) = (b.len(), a.len());
    if n > 3 {
        return Err(Error::Unsupported(format!("B_{{n,m}} with n = {n} > 3")));
    }
    let da: Vec<Derivs> = a.iter().map(|p| derivs(p)).collect();
    let db: Vec<Derivs> = b.iter().map(|p| derivs(p)).collect();
    let wv = w.values();
    let wp = grid::derivative_values(&g, wv);
    let sums = GridSums::new(&g);
    let l = g.half_length();
    let npts = g.len();
    let closed = !force_generic && m == 1 && n <= 1;
    let pow_s = 2 * m as i32 - n as i32 - 1;

    let out = exec::map_range(Exec::default(), npts, |t| {
        let mut acc = 0.0;
        for i in 0..npts {
            if i == t {
                continue;
            }
            let d = sums.diff(t, i);
            let prod_b: f64 = db.iter().map(|q| q.v[t] - q.v[i]).product();
            if prod_b == 0.0 && n > 0 {
                continue;
            }
            let k = if closed {
                let delta_a = da[0].v[t] - da[0].v[i];
                let (r, p) = sums.rp(d, delta_a);
                if n == 0 {
                    r
                } else {
                    prod_b * p
                }
            } else {
                let s = sums.wrapped_s(d);
                let d2: Vec<f64> = da.iter().map(|q| (q.v[t] - q.v[i]).powi(2)).collect();
                let direct = s.powi(pow_s) / d2.iter().map(|x| s * s + x).product::<f64>();
                let excess = |sig: f64| {
                    let qm1 = prod_minus_one(d2.iter().map(|x| x / (sig * sig)));
                    -sig.powi(-(n as i32 + 1)) * qm1 / (1.0 + qm1)
                };
                let lead = -d2.iter().sum::<f64>();
                let images = flat_image_sum(l, s, n as u32 + 1) + image_sum(l, s, excess, lead, n as i32 + 3);
                prod_b * (direct + images)
            };
            acc += k * wv[i];
        }
        // analytic limit of the subtracted integrand at s = 0
        let denom: f64 = da.iter().map(|q| 1.0 + q.p[t] * q.p[t]).product();
        let bprod: f64 = db.iter().map(|q| q.p[t]).product();
        let g0 = bprod / denom;
        let mut gs_b = 0.0;
        for (k, q) in db.iter().enumerate() {
            let others: f64 = db
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != k)
                .map(|(_, r)| r.p[t])
                .product();
            gs_b += -0.5 * q.pp[t] * others;
        }
        let gs_a: f64 = da.iter().map(|q| q.p[t] * q.pp[t] / (1.0 + q.p[t] * q.p[t])).sum();
        let gs = gs_b / denom + g0 * gs_a;
        acc += gs * wv[t] - g0 * wp[t];
        g.dx() / PI * acc
    });
    Profile::new(g, out)
}

/// `C_m`, `C'_m`, `D_m`, `D'_m` for `m >= 2` via explicit image sums.
pub(super) fn cd_higher(kind: KernelKind, m: u32, x: &InterfaceState, w: &[f64]) -> Vec<f64> {
    let g = *x.grid();
    let sums = GridSums::new(&g);
    let l = g.half_length();
    let c = x.c_inf();
    let (f, h) = (x.f().values(), x.h().values());
    let (upper, odd) = match kind {
        KernelKind::C(_) => (true, false),
        KernelKind::D(_) => (true, true),
        KernelKind::CPrime(_) => (false, false),
        _ => (false, true),
    };
    let e = odd as i32;
    let mi = m as i32;
    let n = g.len();
    exec::map_range(Exec::default(), n, |t| {
        let mut acc = 0.0;
        for i in 0..n {
            let delta = if upper { c + f[t] - h[i] } else { h[t] - c - f[i] };
            let d2 = delta * delta;
            let s = sums.wrapped_s(sums.diff(t, i));
            let kern = |sig: f64| sig.powi(e) / (sig * sig + d2).powi(mi);
            acc += (kern(s) + image_sum(l, s, kern, 1.0, 2 * mi - e)) * w[i];
        }
        g.dx() / PI * acc
    })
}
