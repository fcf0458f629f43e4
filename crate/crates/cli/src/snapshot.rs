//! Versioned binary snapshots holding exact float bits.
//!
//! Layout (little endian): magic `MSKSNAP\0`, `u32` version, 32-byte config
//! digest, grid, fluid parameters, stepper state, then `f`, `h`, `w1`, `w2`
//! as `n` doubles each, and finally a SHA-256 of everything before it.

use std::path::Path;

use muskat_core::evolution::{Snapshot, StepperState};
use muskat_core::{FluidParams, Grid, InterfaceState, Profile, VorticityDensity, Window};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const MAGIC: &[u8; 8] = b"MSKSNAP\0";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotFile {
    pub version: u32,
    pub digest: [u8; 32],
    pub half_length: f64,
    pub window: Window,
    pub params: FluidParams,
    pub stepper: StepperState,
    pub f: Vec<f64>,
    pub h: Vec<f64>,
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
}

struct Writer(Vec<u8>);

impl Writer {
    fn f(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_bits().to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], String> {
        if self.pos + n > self.buf.len() {
            return Err("truncated file".into());
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u64(&mut self) -> Result<u64, String> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn f(&mut self) -> Result<f64, String> {
        Ok(f64::from_bits(self.u64()?))
    }
    fn vec(&mut self, n: usize) -> Result<Vec<f64>, String> {
        (0..n).map(|_| self.f()).collect()
    }
}

impl SnapshotFile {
    pub fn from_snapshot(s: &Snapshot, digest: [u8; 32]) -> Self {
        let g = s.state.grid();
        Self {
            version: VERSION,
            digest,
            half_length: g.half_length(),
            window: g.window(),
            params: *s.state.params(),
            stepper: s.stepper,
            f: s.state.f().values().to_vec(),
            h: s.state.h().values().to_vec(),
            w1: s.omega.w1.values().to_vec(),
            w2: s.omega.w2.values().to_vec(),
        }
    }

    pub fn time(&self) -> f64 {
        self.stepper.time
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer(Vec::new());
        w.0.extend_from_slice(MAGIC);
        w.0.extend_from_slice(&self.version.to_le_bytes());
        w.0.extend_from_slice(&self.digest);
        w.u64(self.f.len() as u64);
        w.f(self.half_length);
        match self.window {
            Window::Decaying { tol } => {
                w.0.push(0);
                w.f(tol);
            }
            Window::Periodic => {
                w.0.push(1);
                w.f(0.0);
            }
        }
        let p = &self.params;
        for v in p.rho.iter().chain(&p.mu).chain([&p.permeability, &p.gravity, &p.c_inf]) {
            w.f(*v);
        }
        let s = &self.stepper;
        w.f(s.time);
        w.f(s.dt_next);
        w.f(s.err_prev);
        w.u64(s.attempts);
        w.u64(s.accepted);
        w.0.push(u8::from(s.last_rejected));
        for arr in [&self.f, &self.h, &self.w1, &self.w2] {
            for v in arr.iter() {
                w.f(*v);
            }
        }
        let sum = Sha256::digest(&w.0);
        w.0.extend_from_slice(&sum);
        w.0
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self, String> {
        if buf.len() < 8 + 4 + 32 || &buf[..8] != MAGIC {
            return Err("not a snapshot file".into());
        }
        let version = u32::from_le_bytes(buf[8..12].try_into().expect("4 bytes"));
        if version != VERSION {
            return Err(format!("snapshot format version {version}, expected {VERSION}"));
        }
        if buf.len() < 32 + 12 {
            return Err("truncated file".into());
        }
        let (body, sum) = buf.split_at(buf.len() - 32);
        if Sha256::digest(body).as_slice() != sum {
            return Err("checksum mismatch".into());
        }
        let mut r = Reader { buf: body, pos: 12 };
        let digest: [u8; 32] = r.take(32)?.try_into().expect("32 bytes");
        let n = r.u64()? as usize;
        let half_length = r.f()?;
        let tag = r.take(1)?[0];
        let tol = r.f()?;
        let window = match tag {
            0 => Window::Decaying { tol },
            1 => Window::Periodic,
            t => return Err(format!("unknown window tag {t}")),
        };
        let v = r.vec(9)?;
        let params = FluidParams::allowing_unstable([v[0], v[1], v[2]], [v[3], v[4], v[5]], v[6], v[7], v[8])
            .map_err(|e| e.to_string())?;
        let stepper = StepperState {
            time: r.f()?,
            dt_next: r.f()?,
            err_prev: r.f()?,
            attempts: r.u64()?,
            accepted: r.u64()?,
            last_rejected: r.take(1)?[0] != 0,
        };
        if n == 0 || n > (body.len() / 32) {
            return Err("implausible node count".into());
        }
        let f = r.vec(n)?;
        let h = r.vec(n)?;
        let w1 = r.vec(n)?;
        let w2 = r.vec(n)?;
        if r.pos != body.len() {
            return Err("trailing bytes".into());
        }
        Ok(Self {
            version,
            digest,
            half_length,
            window,
            params,
            stepper,
            f,
            h,
            w1,
            w2,
        })
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| CliError::io(path, e))
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let err = |m: String| CliError::Snapshot {
            path: path.display().to_string(),
            message: m,
        };
        let buf = std::fs::read(path).map_err(|e| err(e.to_string()))?;
        Self::from_bytes(&buf).map_err(err)
    }

    pub fn grid(&self) -> muskat_core::Result<Grid> {
        Grid::with_window(self.half_length, self.f.len(), self.window)
    }

    /// Interface state without the decay check, as stored.
    pub fn state(&self) -> muskat_core::Result<InterfaceState> {
        let g = self.grid()?;
        InterfaceState::new_unmonitored(Profile::new(g, self.f.clone())?, Profile::new(g, self.h.clone())?, self.params)
    }

    pub fn density(&self) -> muskat_core::Result<VorticityDensity> {
        let g = self.grid()?;
        VorticityDensity::new(Profile::new(g, self.w1.clone())?, Profile::new(g, self.w2.clone())?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SnapshotFile {
        SnapshotFile {
            version: VERSION,
            digest: [7; 32],
            half_length: 12.5,
            window: Window::Decaying { tol: 1e-10 },
            params: FluidParams::reference(),
            stepper: StepperState {
                time: 0.1 + 0.2,
                dt_next: 1.0 / 3.0,
                err_prev: 1e-4,
                attempts: 17,
                accepted: 15,
                last_rejected: true,
            },
            f: vec![0.1, -0.0, 1e-300, 3.0],
            h: vec![f64::MIN_POSITIVE, 2.0, -1.5, 0.25],
            w1: vec![1.0; 4],
            w2: vec![-2.0, 0.5, 0.0, 1.0 / 7.0],
        }
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let s = sample();
        let back = SnapshotFile::from_bytes(&s.to_bytes()).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.f[1].to_bits(), (-0.0f64).to_bits());
        assert_eq!(back.to_bytes(), s.to_bytes());
    }

    #[test]
    fn corrupt_or_foreign_files_are_rejected() {
        let mut b = sample().to_bytes();
        let k = b.len() - 40;
        b[k] ^= 1;
        assert!(SnapshotFile::from_bytes(&b).unwrap_err().contains("checksum"));
        let mut b = sample().to_bytes();
        b[8] = 9;
        assert!(SnapshotFile::from_bytes(&b).unwrap_err().contains("version"));
        assert!(SnapshotFile::from_bytes(b"hello").is_err());
        let b = sample().to_bytes();
        assert!(SnapshotFile::from_bytes(&b[..b.len() - 1]).is_err());
    }
}
