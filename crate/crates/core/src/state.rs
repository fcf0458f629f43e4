use crate::error::{Error, Result};
use crate::grid::{self, Grid, Profile};
use crate::params::FluidParams;

/// The interface pair `X = (f, h)`: the upper interface is `c_inf + f`, the lower `h`.
#[derive(Clone, Debug)]
pub struct InterfaceState {
    f: Profile,
    h: Profile,
    params: FluidParams,
    fp: Vec<f64>,
    fpp: Vec<f64>,
    hp: Vec<f64>,
    hpp: Vec<f64>,
}

impl InterfaceState {
    /// Validates gap positivity and decay of both profiles.
    pub fn new(f: Profile, h: Profile, params: FluidParams) -> Result<Self> {
        f.check_decayed()?;
        h.check_decayed()?;
        Self::new_unmonitored(f, h, params)
    }

    /// Validates only the gap; used inside time stepping where the decay
    /// check runs on its own cadence.
    pub fn new_unmonitored(f: Profile, h: Profile, params: FluidParams) -> Result<Self> {
        if f.grid() != h.grid() {
            return Err(Error::GridMismatch);
        }
        let s = Self::build(f, h, params);
        let gap = s.gap();
        if !(gap > 0.0) {
            return Err(Error::InterfaceCollision { gap });
        }
        Ok(s)
    }

    fn build(f: Profile, h: Profile, params: FluidParams) -> Self {
        let g = *f.grid();
        let fp = grid::derivative_values(&g, f.values());
        let fpp = grid::second_derivative_values(&g, f.values());
        let hp = grid::derivative_values(&g, h.values());
        let hpp = grid::second_derivative_values(&g, h.values());
        Self {
            f,
            h,
            params,
            fp,
            fpp,
            hp,
            hpp,
        }
    }

    pub fn flat(grid: Grid, params: FluidParams) -> Self {
        Self::build(Profile::zeros(grid), Profile::zeros(grid), params)
    }

    pub fn f(&self) -> &Profile {
        &self.f
    }

    pub fn h(&self) -> &Profile {
        &self.h
    }

    pub fn params(&self) -> &FluidParams {
        &self.params
    }

    pub fn grid(&self) -> &Grid {
        self.f.grid()
    }

    pub fn c_inf(&self) -> f64 {
        self.params.c_inf
    }

    pub fn fp(&self) -> &[f64] {
        &self.fp
    }

    pub fn fpp(&self) -> &[f64] {
        &self.fpp
    }

    pub fn hp(&self) -> &[f64] {
        &self.hp
    }

    pub fn hpp(&self) -> &[f64] {
        &self.hpp
    }

    /// `min_j (c_inf + f_j - h_j)`.
    pub fn gap(&self) -> f64 {
        let c = self.params.c_inf;
        self.f
            .values()
            .iter()
            .zip(self.h.values())
            .map(|(f, h)| c + f - h)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_decayed(&self) -> bool {
        self.f.is_decayed() && self.h.is_decayed()
    }

    pub fn check_decayed(&self) -> Result<()> {
        self.f.check_decayed()?;
        self.h.check_decayed()
    }

    pub fn with_params(&self, params: FluidParams) -> Self {
        Self {
            params,
            ..self.clone()
        }
    }

    /// Concatenated samples `(f, h)`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.f.values().to_vec();
        v.extend_from_slice(self.h.values());
        v
    }

    pub fn from_slice(grid: Grid, params: FluidParams, x: &[f64]) -> Result<Self> {
        let n = grid.len();
        if x.len() != 2 * n {
            return Err(Error::InvalidGrid("state length".into()));
        }
        Self::new_unmonitored(
            Profile::new(grid, x[..n].to_vec())?,
            Profile::new(grid, x[n..].to_vec())?,
            params,
        )
    }
}

/// Vorticity density pair on the two interfaces.
#[derive(Clone, Debug, PartialEq)]
pub struct VorticityDensity {
    pub w1: Profile,
    pub w2: Profile,
}

impl VorticityDensity {
    pub fn new(w1: Profile, w2: Profile) -> Result<Self> {
        if w1.grid() != w2.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { w1, w2 })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            w1: Profile::zeros(grid),
            w2: Profile::zeros(grid),
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.w1.values().to_vec();
        v.extend_from_slice(self.w2.values());
        v
    }

    pub fn from_slice(grid: Grid, x: &[f64]) -> Result<Self> {
        let n = grid.len();
        if x.len() != 2 * n {
            return Err(Error::InvalidGrid("density length".into()));
        }
        Self::new(Profile::new(grid, x[..n].to_vec())?, Profile::new(grid, x[n..].to_vec())?)
    }
}
