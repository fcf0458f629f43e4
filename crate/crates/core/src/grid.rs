//! Uniform grids on `[-L, L)`, sampled profiles and FFT-based spectral tools.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Default decay tolerance on the outer tenth of the window.
pub const DEFAULT_DECAY_TOL: f64 = 1e-10;

/// Edge policy for profiles on a grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Window {
    /// Profiles must be below `tol` on the outer 10% of nodes.
    Decaying { tol: f64 },
    /// Profiles are genuinely periodic; no edge check.
    Periodic,
}

impl Default for Window {
    fn default() -> Self {
        Window::Decaying {
            tol: DEFAULT_DECAY_TOL,
        }
    }
}

/// Uniform grid `x_j = -L + j dx`, `dx = 2L/N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    half_length: f64,
    n: usize,
    window: Window,
}

impl Grid {
    pub fn new(half_length: f64, n: usize) -> Result<Self> {
        Self::with_window(half_length, n, Window::default())
    }

    pub fn periodic(half_length: f64, n: usize) -> Result<Self> {
        Self::with_window(half_length, n, Window::Periodic)
    }

    pub fn with_window(half_length: f64, n: usize, window: Window) -> Result<Self> {
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half_length must be positive, got {half_length}"
            )));
        }
        if n < 16 || n % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "node count must be even and >= 16, got {n}"
            )));
        }
        if let Window::Decaying { tol } = window {
            if !(tol.is_finite() && tol > 0.0) {
                return Err(Error::InvalidGrid(format!("decay tol must be positive, got {tol}")));
            }
        }
        Ok(Self {
            half_length,
            n,
            window,
        })
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_length / self.n as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        -self.half_length + j as f64 * self.dx()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// Index of the node at `x = 0`.
    pub fn origin_index(&self) -> usize {
        self.n / 2
    }

    /// Physical wavenumber of FFT slot `m` (Nyquist slot reported as negative).
    pub fn wavenumber(&self, m: usize) -> f64 {
        PI * signed_index(m, self.n) as f64 / self.half_length
    }

    /// Same grid with `q` times as many nodes.
    pub fn refined(&self, q: usize) -> Result<Self> {
        Self::with_window(self.half_length, self.n * q, self.window)
    }

    /// Number of nodes in each outer 10% band.
    pub fn edge_width(&self) -> usize {
        (self.n / 10).max(1)
    }
}

pub(crate) fn signed_index(m: usize, n: usize) -> i64 {
    if m <= n / 2 - 1 {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if forward {
            p.plan_fft_forward(n)
        } else {
            p.plan_fft_inverse(n)
        }
    })
}

/// Normalised forward DFT: `c_m = (1/N) sum_j v_j e^{-2 pi i m j / N}`.
pub(crate) fn fft_real(values: &[f64]) -> Vec<Complex64> {
    let n = values.len();
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    plan(n, true).process(&mut buf);
    let s = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= s);
    buf
}

pub(crate) fn ifft(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut buf = coeffs.to_vec();
    plan(buf.len(), false).process(&mut buf);
    buf
}

fn ifft_real(coeffs: &[Complex64]) -> Vec<f64> {
    ifft(coeffs).into_iter().map(|c| c.re).collect()
}

/// Applies a Fourier multiplier `sym(k)`; the Nyquist slot is zeroed.
pub(crate) fn apply_multiplier(grid: &Grid, values: &[f64], sym: impl Fn(f64) -> Complex64) -> Vec<f64> {
    let n = grid.len();
    let mut c = fft_real(values);
    for (m, cm) in c.iter_mut().enumerate() {
        if m == n / 2 {
            *cm = Complex64::new(0.0, 0.0);
        } else {
            *cm *= sym(grid.wavenumber(m));
        }
    }
    ifft_real(&c)
}

pub(crate) fn derivative_values(grid: &Grid, values: &[f64]) -> Vec<f64> {
    apply_multiplier(grid, values, |k| Complex64::new(0.0, k))
}

pub(crate) fn second_derivative_values(grid: &Grid, values: &[f64]) -> Vec<f64> {
    apply_multiplier(grid, values, |k| Complex64::new(-k * k, 0.0))
}

pub(crate) fn hilbert_values(grid: &Grid, values: &[f64]) -> Vec<f64> {
    apply_multiplier(grid, values, |k| {
        if k == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, -k.signum())
        }
    })
}

/// Samples of `x -> mean * x + P(x)` with `P` periodic, shifted to vanish at `x = 0`.
pub(crate) fn antiderivative_values(grid: &Grid, values: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let mut c = fft_real(values);
    let mean = c[0].re;
    c[0] = Complex64::new(0.0, 0.0);
    for (m, cm) in c.iter_mut().enumerate().skip(1) {
        if m == n / 2 {
            *cm = Complex64::new(0.0, 0.0);
        } else {
            *cm /= Complex64::new(0.0, grid.wavenumber(m));
        }
    }
    let p = ifft_real(&c);
    let o = grid.origin_index();
    let p0 = p[o];
    (0..n).map(|j| mean * grid.node(j) + p[j] - p0).collect()
}

/// Dense spectral differentiation matrix entry `D[t][i]` (Nyquist mode dropped).
pub(crate) fn diff_matrix_entry(grid: &Grid, d: isize) -> f64 {
    let n = grid.len() as isize;
    let d = d.rem_euclid(n);
    if d == 0 {
        return 0.0;
    }
    let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
    let t = PI * d as f64 / n as f64;
    PI / grid.half_length() * 0.5 * sign * t.cos() / t.sin()
}

/// A real profile sampled on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Profile {
    grid: Grid,
    values: Vec<f64>,
}

impl Profile {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("profile"));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.nodes().into_iter().map(f).collect())
    }

    pub(crate) fn from_values_unchecked(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest |value| on the outer 10% of nodes.
    pub fn edge_max(&self) -> f64 {
        let w = self.grid.edge_width();
        let n = self.values.len();
        self.values[..w]
            .iter()
            .chain(&self.values[n - w..])
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_decayed(&self) -> bool {
        match self.grid.window() {
            Window::Periodic => true,
            Window::Decaying { tol } => self.edge_max() <= tol,
        }
    }

    pub fn check_decayed(&self) -> Result<()> {
        match self.grid.window() {
            Window::Periodic => Ok(()),
            Window::Decaying { tol } => {
                let e = self.edge_max();
                if e <= tol {
                    Ok(())
                } else {
                    Err(Error::WindowViolation { max_edge: e, tol })
                }
            }
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self::from_values_unchecked(self.grid, self.values.iter().map(|v| a * v).collect())
    }

    pub fn zip_with(&self, other: &Profile, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Self::new(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    /// Trigonometric interpolant evaluated at an arbitrary `x`.
    pub fn interpolate(&self, x: f64) -> f64 {
        SpectralCoeffs::transform(self).evaluate(x)
    }

    /// Spectral zero-padding onto a grid with `q` times as many nodes.
    pub fn upsample(&self, q: usize) -> Result<Self> {
        let fine = self.grid.refined(q)?;
        Ok(Self::from_values_unchecked(
            fine,
            SpectralCoeffs::transform(self).padded(q).inverse_values(),
        ))
    }
}

/// Normalised DFT coefficients of a profile.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralCoeffs {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralCoeffs {
    pub fn transform(p: &Profile) -> Self {
        Self {
            grid: p.grid,
            coeffs: fft_real(&p.values),
        }
    }

    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::InvalidGrid("coefficient count".into()));
        }
        Ok(Self { grid, coeffs })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient for signed integer wavenumber `m`.
    pub fn mode(&self, m: i64) -> Complex64 {
        let n = self.grid.len() as i64;
        self.coeffs[m.rem_euclid(n) as usize]
    }

    /// Amplitude `A` of `A cos(k_m x + phase)` carried by modes `+-m`.
    pub fn mode_amplitude(&self, m: i64) -> f64 {
        if m == 0 {
            return self.mode(0).norm();
        }
        self.mode(m).norm() + self.mode(-m).norm()
    }

    /// Inverse transform; imaginary parts of the result are discarded.
    pub fn inverse(&self) -> Result<Profile> {
        Profile::new(self.grid, self.inverse_values())
    }

    fn inverse_values(&self) -> Vec<f64> {
        ifft_real(&self.coeffs)
    }

    /// Complex inverse transform, for round-trip checks.
    pub fn inverse_complex(&self) -> Vec<Complex64> {
        ifft(&self.coeffs)
    }

    /// Forward transform of complex samples.
    pub fn transform_complex(grid: Grid, samples: &[Complex64]) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::InvalidGrid("sample count".into()));
        }
        let mut buf = samples.to_vec();
        plan(buf.len(), true).process(&mut buf);
        let s = 1.0 / buf.len() as f64;
        buf.iter_mut().for_each(|c| *c *= s);
        Ok(Self { grid, coeffs: buf })
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        let n = self.grid.len();
        let xi = x + self.grid.half_length();
        let mut acc = 0.0;
        for (m, c) in self.coeffs.iter().enumerate() {
            let k = self.grid.wavenumber(m);
            if m == n / 2 {
                acc += c.re * (k * xi).cos();
                continue;
            }
            let (s, co) = (k * xi).sin_cos();
            acc += c.re * co - c.im * s;
        }
        acc
    }

    fn padded(&self, q: usize) -> Self {
        let n = self.grid.len();
        let fine = n * q;
        let mut out = vec![Complex64::new(0.0, 0.0); fine];
        for m in 0..n {
            if m == n / 2 {
                let half = self.coeffs[m] * 0.5;
                out[n / 2] += half;
                out[fine - n / 2] += half;
                continue;
            }
            let s = signed_index(m, n);
            out[s.rem_euclid(fine as i64) as usize] = self.coeffs[m];
        }
        Self {
            grid: Grid::with_window(self.grid.half_length(), fine, self.grid.window())
                .expect("refined grid is valid"),
            coeffs: out,
        }
    }
}

/// Spectral derivative of the periodic extension.
pub fn derivative(p: &Profile) -> Result<Profile> {
    p.check_decayed()?;
    Ok(Profile::from_values_unchecked(p.grid, derivative_values(&p.grid, &p.values)))
}

/// Hilbert transform with symbol `-i sign(k)`; the mean maps to zero.
pub fn hilbert(p: &Profile) -> Result<Profile> {
    p.check_decayed()?;
    Ok(Profile::from_values_unchecked(p.grid, hilbert_values(&p.grid, &p.values)))
}

/// Trapezoidal integral `dx * sum(values)`.
pub fn integrate(p: &Profile) -> f64 {
    p.grid.dx() * p.values.iter().sum::<f64>()
}
