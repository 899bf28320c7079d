//! CSV emitters and readers for experiment outputs.
//!
//! Floats are written with six significant digits, rows in a fixed order,
//! LF line endings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::experiment::CellResult;
use crate::stats::{mean, paired_t_test, sample_std};

pub const STEP_LOG_HEADER: &str =
    "trial,t,agent,scenario,channel_mode,sinr_sum,snr_sum,team_reward,sa_tau02,sa_tau05,epsilon";
pub const SUMMARY_HEADER: &str = "scenario,channel_mode,agent,tau,sra_mean,sra_std,n_trials";
pub const CURVE_HEADER: &str = "scenario,agent,t,reward_smoothed";
pub const TRIAL_SRA_HEADER: &str = "scenario,channel_mode,agent,tau,trial,sra";
pub const COMPARE_HEADER: &str =
    "scenario,agent,tau,sra_mean_a,sra_std_a,sra_mean_b,sra_std_b,t_stat,p_value,df,status";

/// `%g`-style formatting with six significant digits.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..6).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    trim_zeros(&format!("{:.*}", (5 - exp) as usize, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

/// Every logged step of every trial, including the initial random step `t = 0`.
pub fn step_log_csv(cells: &[CellResult]) -> String {
    let mut out = String::from(STEP_LOG_HEADER);
    out.push('\n');
    for cell in cells {
        let scenario = cell.config.scenario_label();
        let mode = cell.config.channel_mode();
        let agent = cell.agent_label();
        for (trial, rec) in cell.records.iter().enumerate() {
            for s in std::iter::once(&rec.initial).chain(&rec.steps) {
                let _ = writeln!(
                    out,
                    "{trial},{},{agent},{scenario},{mode},{},{},{},{},{},{}",
                    s.t,
                    fmt_sig(s.sinr.iter().sum()),
                    fmt_sig(s.snr.iter().sum()),
                    fmt_sig(s.team_reward),
                    flag(s.success_at(0.2)),
                    flag(s.success_at(0.5)),
                    fmt_sig(s.epsilon),
                );
            }
        }
    }
    out
}

pub fn summary_csv(cells: &[CellResult]) -> Result<String> {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for cell in cells {
        for &tau in &cell.config.taus {
            let s = cell.summary(tau)?;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                cell.config.scenario_label(),
                cell.config.channel_mode(),
                cell.agent_label(),
                fmt_sig(tau),
                fmt_sig(s.mean),
                fmt_sig(s.std),
                s.per_trial.len()
            );
        }
    }
    Ok(out)
}

/// Per-trial success rates; the paired comparison between two runs reads these.
pub fn trial_sra_csv(cells: &[CellResult]) -> Result<String> {
    let mut out = String::from(TRIAL_SRA_HEADER);
    out.push('\n');
    for cell in cells {
        for &tau in &cell.config.taus {
            let s = cell.summary(tau)?;
            for (trial, sra) in s.per_trial.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{trial},{}",
                    cell.config.scenario_label(),
                    cell.config.channel_mode(),
                    cell.agent_label(),
                    fmt_sig(tau),
                    fmt_sig(*sra),
                );
            }
        }
    }
    Ok(out)
}

pub fn curve_csv(cells: &[CellResult]) -> Result<String> {
    let mut out = String::from(CURVE_HEADER);
    out.push('\n');
    for cell in cells {
        let curve = cell.curve()?;
        for (i, v) in curve.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                cell.config.scenario_label(),
                cell.agent_label(),
                i + 1,
                fmt_sig(*v)
            );
        }
    }
    Ok(out)
}

/// Key of one comparable row: scenario, agent and threshold.
pub type RowKey = (String, String, String);

/// Per-trial success rates keyed by scenario, agent and threshold.
pub type SraTable = BTreeMap<RowKey, Vec<f64>>;

pub fn parse_trial_sra(text: &str) -> Result<SraTable> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == TRIAL_SRA_HEADER => {}
        _ => return Err(Error::config("trial_sra.csv", "unexpected header")),
    }
    let mut map: BTreeMap<RowKey, Vec<(usize, f64)>> = BTreeMap::new();
    for (i, line) in lines.enumerate().filter(|(_, l)| !l.is_empty()) {
        let bad = || Error::config(format!("trial_sra.csv:{}", i + 2), "malformed row");
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(bad());
        }
        let trial: usize = f[4].parse().map_err(|_| bad())?;
        let sra: f64 = f[5].parse().map_err(|_| bad())?;
        map.entry((f[0].into(), f[2].into(), f[3].into()))
            .or_default()
            .push((trial, sra));
    }
    Ok(map
        .into_iter()
        .map(|(k, mut v)| {
            v.sort_by_key(|(t, _)| *t);
            (k, v.into_iter().map(|(_, s)| s).collect())
        })
        .collect())
}

/// Paired comparison of two runs, one row per key present in either run.
pub fn compare_csv(a: &SraTable, b: &SraTable) -> String {
    let mut keys: Vec<&RowKey> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    let mut out = String::from(COMPARE_HEADER);
    out.push('\n');
    for key in keys {
        let (scenario, agent, tau) = key;
        let stats = |v: &Vec<f64>| (fmt_sig(mean(v)), fmt_sig(sample_std(v)));
        let row = match (a.get(key), b.get(key)) {
            (Some(x), Some(y)) => {
                let (ma, sa) = stats(x);
                let (mb, sb) = stats(y);
                match paired_t_test(x, y) {
                    Ok(t) => format!(
                        "{ma},{sa},{mb},{sb},{},{},{},ok",
                        fmt_sig(t.t),
                        fmt_sig(t.p_value),
                        t.df
                    ),
                    Err(Error::DegenerateTTest { .. }) => {
                        format!("{ma},{sa},{mb},{sb},,,{},degenerate", x.len() - 1)
                    }
                    Err(_) => format!("{ma},{sa},{mb},{sb},,,,trial_count_mismatch"),
                }
            }
            (Some(x), None) => {
                let (ma, sa) = stats(x);
                format!("{ma},{sa},,,,,,missing_in_b")
            }
            (None, Some(y)) => {
                let (mb, sb) = stats(y);
                format!(",,{mb},{sb},,,,missing_in_a")
            }
            (None, None) => unreachable!(),
        };
        let _ = writeln!(out, "{scenario},{agent},{tau},{row}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(0.5), "0.5");
        assert_eq!(fmt_sig(5.0 / 6.0), "0.833333");
        assert_eq!(fmt_sig(-3.289506617), "-3.28951");
        assert_eq!(fmt_sig(123456.7), "123457");
        assert_eq!(fmt_sig(1234567.0), "1.23457e+06");
        assert_eq!(fmt_sig(0.000123456789), "0.000123457");
        assert_eq!(fmt_sig(3.3296e-6), "3.3296e-06");
        assert_eq!(fmt_sig(999999.5), "1e+06");
    }

    fn table(rows: &[(&str, &[f64])]) -> SraTable {
        rows.iter()
            .map(|(s, v)| ((s.to_string(), "MAAS".into(), "0.5".into()), v.to_vec()))
            .collect()
    }

    #[test]
    fn self_comparison_gives_p_one() {
        let a = table(&[("pulse-single", &[0.9, 0.95, 0.85])]);
        let csv = compare_csv(&a, &a);
        let row = csv.lines().nth(1).unwrap();
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[8], "1");
        assert_eq!(fields[9], "2");
        assert_eq!(fields[10], "ok");
    }

    #[test]
    fn missing_rows_are_marked() {
        let a = table(&[
            ("pulse-single", &[0.9, 0.95]),
            ("sweep-single", &[0.5, 0.6]),
        ]);
        let b = table(&[("pulse-single", &[0.8, 0.9])]);
        let csv = compare_csv(&a, &b);
        assert!(csv
            .lines()
            .any(|l| l.starts_with("sweep-single") && l.ends_with("missing_in_b")));
        let csv = compare_csv(&b, &a);
        assert!(csv
            .lines()
            .any(|l| l.starts_with("sweep-single") && l.ends_with("missing_in_a")));
    }

    #[test]
    fn parse_round_trip() {
        let text = format!("{TRIAL_SRA_HEADER}\npulse-single,constant,MAAS,0.5,1,0.75\npulse-single,constant,MAAS,0.5,0,1\n");
        let m = parse_trial_sra(&text).unwrap();
        let key = (
            "pulse-single".to_string(),
            "MAAS".to_string(),
            "0.5".to_string(),
        );
        assert_eq!(m[&key], vec![1.0, 0.75]);
        assert!(parse_trial_sra("bogus\n").is_err());
    }
}
