//! CSV output with a commented header of derived constants.

use std::io::Write;

use muskat_core::{FluidParams, SimulationRecord};

use crate::config::{RunConfig, Units};

pub const RECORD_COLUMNS: &[&str] = &[
    "step", "time", "dt", "accepted", "err_norm", "err_abs", "max_r1", "max_r2", "gap", "mass_f", "mass_h",
    "norm_f", "norm_h", "cond", "mode_amp_f", "mode_amp_h", "tail_f", "tail_h",
];

/// Shortest round-trip decimal form.
pub fn num(v: f64) -> String {
    format!("{v:e}")
}

/// `# key=value` lines naming the derived constants.
pub fn header_lines(cfg: &RunConfig, params: &FluidParams, kind: &str) -> Vec<String> {
    let units = match cfg.units {
        Units::Nondimensional => "nondimensional",
        Units::Si => "si",
    };
    vec![
        format!("# muskat {kind} v1"),
        format!(
            "# theta1={} theta2={} a1={} a2={} c_inf={} units={units}",
            num(params.theta1()),
            num(params.theta2()),
            num(params.a1()),
            num(params.a2()),
            num(params.c_inf),
        ),
        format!("# config_digest={}", cfg.digest_hex()),
    ]
}

pub fn write_header(out: &mut impl Write, lines: &[String], columns: &[&str]) -> std::io::Result<()> {
    for l in lines {
        writeln!(out, "{l}")?;
    }
    writeln!(out, "{}", columns.join(","))
}

pub fn record_row(r: &SimulationRecord) -> String {
    let vals = [
        r.time,
        r.dt,
        f64::from(u8::from(r.accepted)),
        r.err_norm,
        r.err_abs,
        r.max_r1,
        r.max_r2,
        r.gap,
        r.mass_f,
        r.mass_h,
        r.norm_f,
        r.norm_h,
        r.cond_estimate,
        r.mode_amp_f,
        r.mode_amp_h,
        r.tail_f,
        r.tail_h,
    ];
    let mut s = r.step.to_string();
    for (i, v) in vals.iter().enumerate() {
        s.push(',');
        if i == 2 {
            s.push_str(if r.accepted { "1" } else { "0" });
        } else {
            s.push_str(&num(*v));
        }
    }
    s
}

/// Parsed data rows of a CSV written by this module.
pub fn read_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().map(|h| h.split(',').map(str::to_string).collect()).unwrap_or_default();
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    (header, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 0.0, 1e22, f64::MAX] {
            assert_eq!(num(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
        assert_eq!(num(f64::NAN), "NaN");
    }

    #[test]
    fn rows_match_columns() {
        let r = SimulationRecord {
            step: 3,
            time: 0.5,
            dt: 0.1,
            accepted: true,
            err_norm: 0.2,
            err_abs: 1e-9,
            max_r1: -0.5,
            max_r2: -0.5,
            gap: 0.9,
            mass_f: 0.0,
            mass_h: 0.0,
            norm_f: 0.1,
            norm_h: 0.1,
            cond_estimate: 1.0,
            mode_amp_f: 0.0,
            mode_amp_h: 0.0,
            tail_f: 0.0,
            tail_h: 0.0,
        };
        let row = record_row(&r);
        assert_eq!(row.split(',').count(), RECORD_COLUMNS.len());
        assert!(row.starts_with("3,5e-1,1e-1,1,"));
    }
}
