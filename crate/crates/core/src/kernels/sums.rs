//! Lattice sums over the images `s + 2Lj` of the whole-line kernels.

use std::f64::consts::PI;

use crate::grid::Grid;

/// Number of explicit image pairs before the asymptotic tail takes over.
pub(crate) const IMAGE_PAIRS: usize = 32;

/// `sum_j (s+2Lj)/((s+2Lj)^2 + delta^2)`.
pub fn periodic_r(half_length: f64, s: f64, delta: f64) -> f64 {
    let l = half_length;
    let a = PI / (2.0 * l);
    let (sh, _) = half_sinh(PI * delta / l);
    let sn = (PI * s / (2.0 * l)).sin();
    let d = 2.0 * sh * sh + 2.0 * sn * sn;
    a * (PI * s / l).sin() / d
}

/// `sum_j 1/((s+2Lj)^2 + delta^2)`.
pub fn periodic_p(half_length: f64, s: f64, delta: f64) -> f64 {
    let l = half_length;
    let a = PI / (2.0 * l);
    let u = PI * delta / l;
    if u.abs() > 700.0 {
        return a * (PI / l) / u.abs();
    }
    let (sh, _) = half_sinh(u);
    let sn = (PI * s / (2.0 * l)).sin();
    let d = 2.0 * sh * sh + 2.0 * sn * sn;
    a * (PI / l) * sinhc(u) / d
}

#[inline]
fn half_sinh(u: f64) -> (f64, f64) {
    let h = 0.5 * u;
    (h.sinh(), h.cosh())
}

#[inline]
fn sinhc(u: f64) -> f64 {
    if u.abs() < 1e-5 {
        1.0 + u * u / 6.0
    } else {
        u.sinh() / u
    }
}

/// Grid-aligned evaluation of the two basic lattice sums.
#[derive(Clone, Debug)]
pub(crate) struct GridSums {
    pub n: usize,
    pub l: f64,
    a: f64,
    pil: f64,
    sin_full: Vec<f64>,
    sin_half_sq: Vec<f64>,
}

impl GridSums {
    pub fn new(grid: &Grid) -> Self {
        let n = grid.len();
        let l = grid.half_length();
        let sin_full = (0..n).map(|d| (2.0 * PI * d as f64 / n as f64).sin()).collect();
        let sin_half_sq = (0..n)
            .map(|d| {
                let s = (PI * d as f64 / n as f64).sin();
                s * s
            })
            .collect();
        Self {
            n,
            l,
            a: PI / (2.0 * l),
            pil: PI / l,
            sin_full,
            sin_half_sq,
        }
    }

    #[inline]
    pub fn diff(&self, t: usize, i: usize) -> usize {
        if t >= i {
            t - i
        } else {
            t + self.n - i
        }
    }

    /// `(R, P)` for node offset `d = t - i (mod N)` and vertical offset `delta`.
    #[inline]
    pub fn rp(&self, d: usize, delta: f64) -> (f64, f64) {
        let u = self.pil * delta;
        if u.abs() > 700.0 {
            return (0.0, self.a * self.pil / u.abs());
        }
        let sh = (0.5 * u).sinh();
        let den = 2.0 * (sh * sh + self.sin_half_sq[d]);
        (self.a * self.sin_full[d] / den, self.a * self.pil * sinhc(u) / den)
    }

    /// Signed separation `s = x_t - x_i` wrapped into `[-L, L)`.
    #[inline]
    pub fn wrapped_s(&self, d: usize) -> f64 {
        let dx = 2.0 * self.l / self.n as f64;
        if d < self.n / 2 {
            d as f64 * dx
        } else {
            (d as f64 - self.n as f64) * dx
        }
    }
}

/// `sum_{j != 0} (s + 2Lj)^{-p}` for `p = 1..=4`, `0 < |s| <= L`.
pub(crate) fn flat_image_sum(l: f64, s: f64, p: u32) -> f64 {
    let a = PI / (2.0 * l);
    let t = a * s;
    let (sn, cs) = t.sin_cos();
    let csc2 = 1.0 / (sn * sn);
    let cot = cs / sn;
    let full = match p {
        1 => a * cot,
        2 => a * a * csc2,
        3 => a.powi(3) * cot * csc2,
        4 => a.powi(4) * (csc2 * csc2 - 2.0 / 3.0 * csc2),
        _ => unreachable!("flat image sums implemented for p <= 4"),
    };
    full - s.powi(-(p as i32))
}

/// Midpoint-rule estimate of `sum_{|j| > J} (s + 2Lj)^{-p}`, `p >= 2`.
pub(crate) fn tail_sum(l: f64, s: f64, j_max: usize, p: i32) -> f64 {
    let r = 2.0 * l * (j_max as f64 + 0.5);
    let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
    ((r + s).powi(1 - p) + sign * (r - s).powi(1 - p)) / (2.0 * l * (p - 1) as f64)
}

/// `sum_{1 <= |j| <= J} g(s + 2Lj) + lead * sum_{|j|>J} (s+2Lj)^{-pow}`.
pub(crate) fn image_sum(l: f64, s: f64, g: impl Fn(f64) -> f64, lead: f64, pow: i32) -> f64 {
    let mut acc = 0.0;
    for j in (1..=IMAGE_PAIRS).rev() {
        let shift = 2.0 * l * j as f64;
        acc += g(s + shift) + g(s - shift);
    }
    acc + lead * tail_sum(l, s, IMAGE_PAIRS, pow)
}
