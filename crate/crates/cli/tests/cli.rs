use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use muskat_cli::records::read_rows;
use muskat_cli::snapshot::SnapshotFile;
use tempfile::TempDir;

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let out = dir.join("out");
    let text = format!("[output]\ndir = {:?}\n{body}", out.display().to_string());
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path
}

fn run(cfg: &Path, cmd: &str, extra: &[&str]) -> i32 {
    let mut args = vec!["muskat".to_string(), cmd.to_string(), cfg.display().to_string()];
    args.extend(extra.iter().map(|s| s.to_string()));
    muskat_cli::run(args)
}

fn column(text: &str, name: &str) -> Vec<f64> {
    let (header, rows) = read_rows(text);
    let i = header.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

fn snapshots(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<_> = fs::read_dir(dir.join("out/snapshots"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    v.sort();
    v
}

const SMALL: &str = "[grid]\nhalf_length = 15.0\nn = 128\n";

#[test]
fn flat_run_stays_exactly_flat() {
    let d = TempDir::new().unwrap();
    let cfg = write_config(d.path(), &format!("{SMALL}[stepper]\nt_end = 0.5\n"));
    assert_eq!(run(&cfg, "simulate", &[]), 0);
    let snaps = snapshots(d.path());
    assert!(snaps.len() >= 2);
    for p in snaps {
        let s = SnapshotFile::read(&p).unwrap();
        assert!(s.f.iter().chain(&s.h).all(|v| *v == 0.0));
    }
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.path().join("out/metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["termination"]["code"], 0);
    assert!(meta["config_digest"].as_str().unwrap().len() == 64);
}

/// `exp(M t)` for a real 2x2 matrix with real spectrum.
fn expm2(m: [[f64; 2]; 2], t: f64) -> [[f64; 2]; 2] {
    let s = 0.5 * (m[0][0] + m[1][1]);
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let q = (s * s - det).sqrt();
    let (c, sh) = ((q * t).cosh(), if q == 0.0 { t } else { (q * t).sinh() / q });
    let e = (s * t).exp();
    [
        [e * (c + sh * (m[0][0] - s)), e * sh * m[0][1]],
        [e * sh * m[1][0], e * (c + sh * (m[1][1] - s))],
    ]
}

#[test]
fn cosine_mode_follows_linear_growth() {
    let d = TempDir::new().unwrap();
    let body = "[fluid]\nc_inf = 5.0\n[grid]\nhalf_length = 20.0\nn = 128\nwindow = \"periodic\"\n\
        [[initial.f]]\nkind = \"cosine-mode\"\namplitude = 1e-3\nmode = 8\n\
        [stepper]\nt_end = 1.0\nmonitor_mode = 8\nrtol = 1e-8\natol = 1e-13\n";
    let cfg = write_config(d.path(), body);
    assert_eq!(run(&cfg, "simulate", &[]), 0);
    let text = fs::read_to_string(d.path().join("out/records.csv")).unwrap();
    let acc = column(&text, "accepted");
    let t = column(&text, "time");
    let af = column(&text, "mode_amp_f");
    let ah = column(&text, "mode_amp_h");
    let k = std::f64::consts::PI * 8.0 / 20.0;
    let params = muskat_core::FluidParams::new([1.0, 2.0, 3.0], [1.0; 3], 1.0, 1.0, 5.0).unwrap();
    let m = muskat_core::linear::dispersion_matrix(k, &params).m;
    let mut checked = 0;
    for i in 0..t.len() {
        if acc[i] != 1.0 {
            continue;
        }
        let e = expm2(m, t[i]);
        assert!((af[i] / 1e-3 - e[0][0]).abs() < 1e-4, "t={} {} {}", t[i], af[i] / 1e-3, e[0][0]);
        assert!((ah[i] / 1e-3 - e[1][0].abs()).abs() < 1e-4, "t={} {} {}", t[i], ah[i] / 1e-3, e[1][0]);
        checked += 1;
    }
    assert!(checked > 3);
    assert!((t.last().unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn resume_reproduces_records_bit_for_bit() {
    let d = TempDir::new().unwrap();
    let body = format!(
        "{SMALL}window = \"periodic\"\n[[initial.f]]\nkind = \"gaussian-bump\"\namplitude = 0.2\nwidth = 1.0\n\
         [[initial.h]]\nkind = \"gaussian-bump\"\namplitude = -0.1\nwidth = 1.5\ncenter = 0.5\n\
         [stepper]\nt_end = 0.3\n"
    );
    let cfg = write_config(d.path(), &body);
    let cfg_s = cfg.display().to_string();
    let run = |cmd: &str, extra: &[&str]| {
        let mut args = vec!["muskat", cmd, &cfg_s, "--set", "output.snapshot_every=2"];
        args.extend(extra);
        muskat_cli::run(args)
    };

    assert_eq!(run("simulate", &[]), 0);
    let snaps = snapshots(d.path());
    assert!(snaps.len() >= 3, "{snaps:?}");
    let mid = &snaps[snaps.len() / 2];
    let from = SnapshotFile::read(mid).unwrap();
    let last = SnapshotFile::read(snaps.last().unwrap()).unwrap();
    assert_eq!(run("resume", &["--snapshot", mid.to_str().unwrap()]), 0);

    let full = fs::read_to_string(d.path().join("out/records.csv")).unwrap();
    let resumed = fs::read_to_string(d.path().join("out/resume_records.csv")).unwrap();
    let (_, full_rows) = read_rows(&full);
    let (_, res_rows) = read_rows(&resumed);
    let skip = from.stepper.attempts as usize;
    assert_eq!(&full_rows[skip..], &res_rows[..]);
    // the resumed run ends in the same bits as the original
    let again = SnapshotFile::read(snapshots(d.path()).last().unwrap()).unwrap();
    assert_eq!(again, last);
}

#[test]
fn rellich_suite_with_zero_density_is_exact() {
    let out = Command::new(env!("CARGO_BIN_EXE_muskat"))
        .args(["verify", "--suite", "rellich", "--set", "verify.density=\"zero\"", "--set", "grid.n=128"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let s = String::from_utf8(out.stdout).unwrap();
    assert_eq!(s.lines().filter(|l| l.contains(" 0.000e0 ") && l.ends_with("PASS")).count(), 3, "{s}");
}

#[test]
fn unknown_suite_and_keys_are_config_errors() {
    let bin = env!("CARGO_BIN_EXE_muskat");
    let code = |args: &[&str]| Command::new(bin).args(args).output().unwrap().status.code();
    assert_eq!(code(&["verify", "--suite", "nope"]), Some(2));
    assert_eq!(code(&["dispersion", "--set", "grid.bogus=1"]), Some(2));
    assert_eq!(code(&["dispersion", "--set", "dispersion.k_max=-1"]), Some(2));
    assert_eq!(code(&["frobnicate"]), Some(2));
}

#[test]
fn sample_file_of_wrong_length_is_rejected() {
    let d = TempDir::new().unwrap();
    fs::write(d.path().join("f.txt"), "0\n".repeat(100)).unwrap();
    let cfg = write_config(d.path(), &format!("{SMALL}[[initial.f]]\nkind = \"samples\"\nfile = \"f.txt\"\n"));
    assert_eq!(run(&cfg, "simulate", &[]), 2);
    assert!(!d.path().join("out/records.csv").exists());

    fs::write(d.path().join("f.txt"), "# zeros\n".to_string() + &"0\n".repeat(128)).unwrap();
    assert_eq!(run(&cfg, "simulate", &["--set", "stepper.t_end=0.01"]), 0);
}

#[test]
fn density_ordering_is_enforced_unless_allowed() {
    let d = TempDir::new().unwrap();
    let cfg = write_config(d.path(), &format!("{SMALL}[fluid]\nrho = [3.0, 2.0, 1.0]\n"));
    assert_eq!(run(&cfg, "simulate", &[]), 2);
    assert_eq!(run(&cfg, "simulate", &["--set", "fluid.allow_unstable=true"]), 10);
    let text = fs::read_to_string(d.path().join("out/records.csv")).unwrap();
    assert_eq!(read_rows(&text).1.len(), 1);
}

#[test]
fn corrupt_snapshot_is_rejected() {
    let d = TempDir::new().unwrap();
    let cfg = write_config(d.path(), &format!("{SMALL}[stepper]\nt_end = 0.01\n"));
    assert_eq!(run(&cfg, "simulate", &[]), 0);
    let p = snapshots(d.path()).pop().unwrap();
    let mut bytes = fs::read(&p).unwrap();
    let mid = bytes.len() / 2;
    bytes[mid] ^= 1;
    fs::write(&p, bytes).unwrap();
    assert_eq!(run(&cfg, "resume", &["--snapshot", p.to_str().unwrap()]), 2);
    assert_eq!(run(&cfg, "resume", &["--snapshot", "/nonexistent/snap.bin"]), 2);
}

#[test]
fn dispersion_table_starts_at_neutral_mode() {
    let d = TempDir::new().unwrap();
    let cfg = write_config(d.path(), "[dispersion]\nk_min = 0.0\nk_max = 2.0\ncount = 5\n");
    assert_eq!(run(&cfg, "dispersion", &[]), 0);
    let text = fs::read_to_string(d.path().join("out/dispersion.csv")).unwrap();
    assert!(text.contains("# theta1=") && text.contains("config_digest="));
    let (header, rows) = read_rows(&text);
    assert_eq!(header, ["k", "m11", "m12", "m21", "m22", "l1_re", "l1_im", "l2_re", "l2_im"]);
    assert_eq!(rows.len(), 5);
    assert!(rows[0].iter().all(|v| v.parse::<f64>().unwrap() == 0.0));
    let l = column(&text, "l1_re");
    assert!(l[1..].iter().all(|v| *v < 0.0));
}

#[test]
fn field_marks_points_near_an_interface() {
    let d = TempDir::new().unwrap();
    let body = format!("{SMALL}[field]\nx_min = -1.0\nx_max = 1.0\nnx = 3\ny_min = -1.0\ny_max = 2.0\nny = 7\n");
    let cfg = write_config(d.path(), &body);
    assert_eq!(run(&cfg, "field", &[]), 0);
    let text = fs::read_to_string(d.path().join("out/field.csv")).unwrap();
    let (header, rows) = read_rows(&text);
    assert_eq!(header, ["x", "y", "region", "v1", "v2", "p", "darcy_residual"]);
    assert_eq!(rows.len(), 21);
    for r in &rows {
        let y: f64 = r[1].parse().unwrap();
        if y == 0.0 || y == 1.0 {
            assert_eq!(r[2], "near-interface");
            assert!(r[3..].iter().all(String::is_empty));
        } else {
            assert!(r[3..].iter().all(|v| v.parse::<f64>().is_ok()), "{r:?}");
        }
    }
}
