//! Subcommand implementations.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use muskat_core::evolution::{Simulation, Snapshot};
use muskat_core::field::{darcy_residual, PressureField, Region};
use muskat_core::linear::dispersion_matrix;
use muskat_core::{InterfaceState, TerminationEvent, VorticityDensity};
use serde_json::json;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::records::{header_lines, num, record_row, write_header, RECORD_COLUMNS};
use crate::snapshot::SnapshotFile;
use crate::suites::{format_table, run_suite, Suite};

fn create_dir(p: &Path) -> CliResult<()> {
    fs::create_dir_all(p).map_err(|e| CliError::io(p, e))
}

fn create_file(p: &Path) -> CliResult<BufWriter<File>> {
    if let Some(parent) = p.parent() {
        create_dir(parent)?;
    }
    File::create(p).map(BufWriter::new).map_err(|e| CliError::io(p, e))
}

struct RecordSink {
    path: PathBuf,
    out: BufWriter<File>,
    error: Option<CliError>,
}

impl RecordSink {
    fn open(path: PathBuf, header: &[String]) -> CliResult<Self> {
        let mut out = create_file(&path)?;
        write_header(&mut out, header, RECORD_COLUMNS).map_err(|e| CliError::io(&path, e))?;
        Ok(Self { path, out, error: None })
    }

    fn push(&mut self, line: &str) {
        if self.error.is_some() {
            return;
        }
        if let Err(e) = writeln!(self.out, "{line}").and_then(|_| self.out.flush()) {
            self.error = Some(CliError::io(&self.path, e));
        }
    }

    fn finish(mut self) -> CliResult<()> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        self.out.flush().map_err(|e| CliError::io(&self.path, e))
    }
}

struct SnapshotSink {
    dir: PathBuf,
    digest: [u8; 32],
    written: Vec<PathBuf>,
    error: Option<CliError>,
}

impl SnapshotSink {
    fn push(&mut self, s: &Snapshot) {
        if self.error.is_some() {
            return;
        }
        let path = self.dir.join(format!("snap_{:08}.bin", s.stepper.accepted));
        match SnapshotFile::from_snapshot(s, self.digest).write(&path) {
            Ok(()) => self.written.push(path),
            Err(e) => self.error = Some(e),
        }
    }
}

fn event_json(ev: &TerminationEvent) -> serde_json::Value {
    let detail = match ev {
        TerminationEvent::Completed { .. } => json!({}),
        TerminationEvent::RtViolation { max_r1, max_r2, .. } => json!({ "max_r1": max_r1, "max_r2": max_r2 }),
        TerminationEvent::Collision { gap, .. } => json!({ "gap": gap }),
        TerminationEvent::WindowViolation { max_edge, .. } => json!({ "max_edge": max_edge }),
        TerminationEvent::Invertibility { detail, .. } => json!({ "detail": detail }),
        TerminationEvent::Stiffness { dt, .. } => json!({ "dt": dt }),
    };
    json!({ "event": ev.name(), "code": ev.code(), "time": ev.time(), "detail": detail })
}

/// Drives a simulation, streaming records and snapshots.
fn drive(
    cfg: &RunConfig,
    mut sim: Simulation,
    records_name: &str,
    header: &[String],
    fresh: bool,
) -> CliResult<(TerminationEvent, Vec<PathBuf>, u64)> {
    let dir = PathBuf::from(&cfg.output.dir);
    let snap_dir = dir.join(&cfg.output.snapshot_dir);
    create_dir(&snap_dir)?;
    let mut rec = RecordSink::open(dir.join(records_name), header)?;
    let mut snaps = SnapshotSink {
        dir: snap_dir,
        digest: cfg.digest(),
        written: Vec::new(),
        error: None,
    };
    let mut attempts = 0u64;
    let event = match sim.start() {
        Some(ev) => {
            let a = sim.attempt();
            rec.push(&record_row(&a.record));
            attempts += 1;
            if let Some(s) = sim.snapshot() {
                snaps.push(&s);
            }
            ev
        }
        None => {
            if fresh {
                if let Some(s) = sim.snapshot() {
                    snaps.push(&s);
                }
            }
            sim.run(
                cfg.output.snapshot_every,
                |r| {
                    attempts += 1;
                    rec.push(&record_row(r));
                },
                |s| snaps.push(s),
            )
        }
    };
    rec.finish()?;
    if let Some(e) = snaps.error {
        return Err(e);
    }
    Ok((event, snaps.written, attempts))
}

pub fn simulate(cfg: &RunConfig) -> CliResult<i32> {
    let x0 = cfg.initial_state()?;
    let params = *x0.params();
    let sim = Simulation::new(x0, cfg.stepper_config()).map_err(|e| CliError::config("stepper", e.to_string()))?;
    let header = header_lines(cfg, &params, "records");
    let (event, snaps, attempts) = drive(cfg, sim, &cfg.output.records, &header, true)?;
    let meta = json!({
        "program": "muskat",
        "version": env!("CARGO_PKG_VERSION"),
        "config_digest": cfg.digest_hex(),
        "config": cfg.canonical(),
        "derived": {
            "theta1": params.theta1(),
            "theta2": params.theta2(),
            "a1": params.a1(),
            "a2": params.a2(),
            "c_inf": params.c_inf,
        },
        "attempts": attempts,
        "snapshots": snaps.iter().map(|p| p.file_name().map(|s| s.to_string_lossy().into_owned())).collect::<Vec<_>>(),
        "termination": event_json(&event),
    });
    let path = cfg.out_path(&cfg.output.metadata);
    let mut out = create_file(&path)?;
    serde_json::to_writer_pretty(&mut out, &meta)
        .map_err(|e| CliError::io(&path, e))
        .and_then(|_| writeln!(out).and_then(|_| out.flush()).map_err(|e| CliError::io(&path, e)))?;
    eprintln!("{} at t = {} after {attempts} attempts", event.name(), event.time());
    Ok(event.code())
}

pub fn resume(cfg: &RunConfig, snapshot: &Path) -> CliResult<i32> {
    let snap = SnapshotFile::read(snapshot)?;
    let bad = |e: muskat_core::Error| CliError::Snapshot {
        path: snapshot.display().to_string(),
        message: e.to_string(),
    };
    if snap.digest != cfg.digest() {
        eprintln!("warning: snapshot was written under a different configuration");
    }
    let x = snap.state().map_err(bad)?;
    let params = *x.params();
    let sim = Simulation::resume(x, snap.stepper, cfg.stepper_config())
        .map_err(|e| CliError::config("stepper", e.to_string()))?;
    let header = header_lines(cfg, &params, "resume-records");
    let (event, _, attempts) = drive(cfg, sim, &cfg.output.resume_records, &header, false)?;
    eprintln!(
        "resumed at t = {}; {} at t = {} after {attempts} attempts",
        snap.time(),
        event.name(),
        event.time()
    );
    Ok(event.code())
}

pub fn verify(cfg: &RunConfig, suite: &str) -> CliResult<i32> {
    let suites = Suite::parse(suite)
        .ok_or_else(|| CliError::config("--suite", format!("unknown suite `{suite}`")))?;
    let mut checks = Vec::new();
    for s in suites {
        checks.extend(run_suite(cfg, s)?);
    }
    print!("{}", format_table(&checks));
    let failed = checks.iter().filter(|c| !c.pass).count();
    println!("{} checks, {failed} failed", checks.len());
    Ok(if failed == 0 { 0 } else { 1 })
}

pub const DISPERSION_COLUMNS: &[&str] = &["k", "m11", "m12", "m21", "m22", "l1_re", "l1_im", "l2_re", "l2_im"];

pub fn dispersion(cfg: &RunConfig) -> CliResult<i32> {
    let params = cfg.params()?;
    let d = &cfg.dispersion;
    let path = cfg.out_path(&cfg.output.dispersion);
    let mut out = create_file(&path)?;
    let io = |e: std::io::Error| CliError::io(&path, e);
    write_header(&mut out, &header_lines(cfg, &params, "dispersion"), DISPERSION_COLUMNS).map_err(io)?;
    for i in 0..d.count {
        let k = if d.count == 1 {
            d.k_min
        } else {
            d.k_min + (d.k_max - d.k_min) * i as f64 / (d.count - 1) as f64
        };
        let m = dispersion_matrix(k, &params);
        let vals = [
            k,
            m.m[0][0],
            m.m[0][1],
            m.m[1][0],
            m.m[1][1],
            m.eigenvalues[0].re,
            m.eigenvalues[0].im,
            m.eigenvalues[1].re,
            m.eigenvalues[1].im,
        ];
        writeln!(out, "{}", vals.map(num).join(",")).map_err(io)?;
    }
    out.flush().map_err(io)?;
    Ok(0)
}

pub const FIELD_COLUMNS: &[&str] = &["x", "y", "region", "v1", "v2", "p", "darcy_residual"];

pub fn field(cfg: &RunConfig, snapshot: Option<&Path>) -> CliResult<i32> {
    let (x, w): (InterfaceState, VorticityDensity) = match snapshot {
        Some(p) => {
            let s = SnapshotFile::read(p)?;
            let bad = |e: muskat_core::Error| CliError::Snapshot {
                path: p.display().to_string(),
                message: e.to_string(),
            };
            (s.state().map_err(bad)?, s.density().map_err(bad)?)
        }
        None => {
            let x = cfg.initial_state()?;
            let w = muskat_core::solver::solve_omega_with(&x, &cfg.solver_config())?.omega;
            (x, w)
        }
    };
    let pf = PressureField::new(&x, &w)?;
    let vel = pf.velocity_field();
    let fs = &cfg.field;
    let lin = |a: f64, b: f64, n: usize, i: usize| if n == 1 { a } else { a + (b - a) * i as f64 / (n - 1) as f64 };
    let path = cfg.out_path(&cfg.output.field);
    let mut out = create_file(&path)?;
    let io = |e: std::io::Error| CliError::io(&path, e);
    write_header(&mut out, &header_lines(cfg, x.params(), "field"), FIELD_COLUMNS).map_err(io)?;
    for j in 0..fs.ny {
        for i in 0..fs.nx {
            let p = vel.classify(lin(fs.x_min, fs.x_max, fs.nx, i), lin(fs.y_min, fs.y_max, fs.ny, j));
            let row = if p.region == Region::NearInterface {
                format!("{},{},{},,,,", num(p.x), num(p.y), p.region.name())
            } else {
                let u = vel.velocity(&p)?;
                let pr = pf.pressure(&p)?;
                let r = darcy_residual(&pf, x.params(), &p, fs.fd_step)?;
                format!(
                    "{},{},{},{},{},{},{}",
                    num(p.x),
                    num(p.y),
                    p.region.name(),
                    num(u[0]),
                    num(u[1]),
                    num(pr),
                    num(r)
                )
            };
            writeln!(out, "{row}").map_err(io)?;
        }
    }
    out.flush().map_err(io)?;
    Ok(0)
}
