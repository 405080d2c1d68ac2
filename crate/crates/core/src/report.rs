//! Table, CSV and JSONL emission of scenario results.
//!
//! Machine formats print every float with nine decimals and never print a
//! negative zero. Empty sections are left out in every format.

use std::fmt::{self, Write};
use std::str::FromStr;

use crate::error::Error;
use crate::scenarios::ScenarioResult;

/// Amplitudes smaller than this are not listed.
const AMPLITUDE_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Table,
    Csv,
    Jsonl,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Table => "table",
            Format::Csv => "csv",
            Format::Jsonl => "jsonl",
        })
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "table" => Ok(Format::Table),
            "csv" => Ok(Format::Csv),
            "jsonl" => Ok(Format::Jsonl),
            other => Err(Error::InvalidArgument(format!(
                "unknown format `{other}` (expected table, csv or jsonl)"
            ))),
        }
    }
}

/// Run parameters echoed in every output header.
#[derive(Debug, Clone, PartialEq)]
pub struct RunInfo {
    pub seed: u64,
    pub trials: Option<usize>,
    /// ANSI styling for the table format.
    pub color: bool,
}

impl Default for RunInfo {
    fn default() -> Self {
        RunInfo {
            seed: crate::DEFAULT_SEED,
            trials: None,
            color: false,
        }
    }
}

/// Fixed nine-decimal rendering with `-0` folded into `0`.
pub fn fmt9(x: f64) -> String {
    fixed(x, 9)
}

fn fixed(x: f64, decimals: usize) -> String {
    let s = format!("{x:.decimals$}");
    match s.strip_prefix('-') {
        Some(rest) if rest.chars().all(|c| c == '0' || c == '.') => rest.to_owned(),
        _ => s,
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

/// Basis label with one space-separated label per factor, as written in
/// `.scn` state lines.
fn basis(label: &str) -> String {
    label.replace(',', " ")
}

pub fn emit(result: &ScenarioResult, format: Format, info: &RunInfo) -> String {
    match format {
        Format::Table => table(result, info),
        Format::Csv => csv(result, info),
        Format::Jsonl => jsonl(result, info),
    }
}

fn header_line(result: &ScenarioResult, info: &RunInfo) -> String {
    let mut s = format!("scenario={} seed={}", result.scenario, info.seed);
    if let Some(t) = info.trials {
        let _ = write!(s, " trials={t}");
    }
    s
}

fn csv(r: &ScenarioResult, info: &RunInfo) -> String {
    let mut out = format!("# {}\n", header_line(r, info));
    let mut section = |header: &str, rows: Vec<String>| {
        if rows.is_empty() {
            return;
        }
        out.push('\n');
        out.push_str(header);
        out.push('\n');
        for row in rows {
            out.push_str(&row);
            out.push('\n');
        }
    };
    section(
        "kind,name,value",
        r.probabilities
            .iter()
            .map(|(k, v)| format!("probability,{},{}", csv_field(k), fmt9(*v)))
            .collect(),
    );
    section(
        "kind,name,re,im",
        r.weak_values
            .iter()
            .map(|(k, v)| format!("weak_value,{},{},{}", csv_field(k), fmt9(v.re), fmt9(v.im)))
            .collect(),
    );
    section(
        "kind,epoch,schmidt_rank,description",
        r.states_by_epoch
            .keys()
            .map(|e| {
                let rank = r.schmidt_ranks.get(e).map(|x| x.to_string()).unwrap_or_default();
                let desc = r
                    .schedule
                    .iter()
                    .find(|s| s.label == *e)
                    .map(|s| s.description.as_str())
                    .unwrap_or("");
                format!("epoch,{e},{rank},{}", csv_field(desc))
            })
            .collect(),
    );
    section(
        "kind,epoch,basis,re,im",
        r.states_by_epoch
            .iter()
            .flat_map(|(e, k)| {
                k.terms(AMPLITUDE_CUTOFF).into_iter().map(move |(label, a)| {
                    format!(
                        "amplitude,{e},{},{},{}",
                        csv_field(&basis(&label)),
                        fmt9(a.re),
                        fmt9(a.im)
                    )
                })
            })
            .collect(),
    );
    section(
        "kind,name,value",
        r.trial_stats
            .iter()
            .map(|(k, v)| format!("trial_stat,{},{}", csv_field(k), fmt9(*v)))
            .collect(),
    );
    section(
        "kind,observable,g,mean,shift_over_g,weak_value",
        r.sweep
            .iter()
            .map(|p| {
                format!(
                    "sweep,{},{},{},{},{}",
                    csv_field(&p.observable),
                    fmt9(p.g),
                    fmt9(p.mean),
                    fmt9(p.shift_over_g),
                    fmt9(p.weak_value)
                )
            })
            .collect(),
    );
    out
}

fn jsonl(r: &ScenarioResult, info: &RunInfo) -> String {
    let scenario = json_str(&r.scenario);
    let mut out = String::new();
    let mut record = |kind: &str, name: &str, re: f64, im: f64| {
        let _ = writeln!(
            out,
            "{{\"scenario\":{scenario},\"name\":{},\"kind\":{},\"re\":{},\"im\":{}}}",
            json_str(name),
            json_str(kind),
            fmt9(re),
            fmt9(im)
        );
    };
    record("header", "seed", info.seed as f64, 0.0);
    if let Some(t) = info.trials {
        record("header", "trials", t as f64, 0.0);
    }
    for (k, v) in &r.probabilities {
        record("probability", k, *v, 0.0);
    }
    for (k, v) in &r.weak_values {
        record("weak_value", k, v.re, v.im);
    }
    for (e, rank) in &r.schmidt_ranks {
        record("schmidt_rank", e.as_str(), *rank as f64, 0.0);
    }
    for (e, k) in &r.states_by_epoch {
        for (label, a) in k.terms(AMPLITUDE_CUTOFF) {
            record("amplitude", &format!("{e}:{}", basis(&label)), a.re, a.im);
        }
    }
    for (k, v) in &r.trial_stats {
        record("trial_stat", k, *v, 0.0);
    }
    for p in &r.sweep {
        let name = format!("{}@g={}", p.observable, fmt9(p.g));
        record("sweep_mean", &name, p.mean, 0.0);
        record("sweep_shift_over_g", &name, p.shift_over_g, 0.0);
    }
    out
}

struct Table {
    color: bool,
    out: String,
}

impl Table {
    fn title(&mut self, s: &str) {
        if self.color {
            let _ = writeln!(self.out, "\n\x1b[1m{s}\x1b[0m");
        } else {
            let _ = writeln!(self.out, "\n{s}");
        }
    }

    fn rows(&mut self, head: &[&str], rows: Vec<Vec<String>>) {
        let mut widths: Vec<usize> = head.iter().map(|h| h.chars().count()).collect();
        for r in &rows {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |cells: &[String]| -> String {
            let padded: Vec<String> = cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect();
            padded.join("  ").trim_end().to_owned()
        };
        let head: Vec<String> = head.iter().map(|h| h.to_string()).collect();
        let h = line(&head);
        if self.color {
            let _ = writeln!(self.out, "\x1b[2m{h}\x1b[0m");
        } else {
            let _ = writeln!(self.out, "{h}");
        }
        for r in rows {
            let _ = writeln!(self.out, "{}", line(&r));
        }
    }
}

fn table(r: &ScenarioResult, info: &RunInfo) -> String {
    let f6 = |x: f64| fixed(x, 6);
    let mut t = Table {
        color: info.color,
        out: format!("{}\n", header_line(r, info)),
    };
    if !r.schedule.is_empty() {
        t.title("schedule");
        t.rows(
            &["epoch", "rank", "description"],
            r.schedule
                .iter()
                .map(|s| {
                    let rank = r
                        .schmidt_ranks
                        .get(&s.label)
                        .map(|x| x.to_string())
                        .unwrap_or_default();
                    vec![s.label.to_string(), rank, s.description.clone()]
                })
                .collect(),
        );
    }
    if !r.weak_values.is_empty() {
        t.title("weak values");
        t.rows(
            &["name", "re", "im"],
            r.weak_values
                .iter()
                .map(|(k, v)| vec![k.clone(), f6(v.re), f6(v.im)])
                .collect(),
        );
    }
    if !r.probabilities.is_empty() {
        t.title("probabilities");
        t.rows(
            &["name", "value"],
            r.probabilities
                .iter()
                .map(|(k, v)| vec![k.clone(), f6(*v)])
                .collect(),
        );
    }
    if !r.states_by_epoch.is_empty() {
        t.title("amplitudes");
        t.rows(
            &["epoch", "basis", "re", "im"],
            r.states_by_epoch
                .iter()
                .flat_map(|(e, k)| {
                    k.terms(AMPLITUDE_CUTOFF)
                        .into_iter()
                        .map(move |(label, a)| vec![e.to_string(), basis(&label), f6(a.re), f6(a.im)])
                })
                .collect(),
        );
    }
    if !r.trial_stats.is_empty() {
        t.title("trial statistics");
        t.rows(
            &["name", "value"],
            r.trial_stats
                .iter()
                .map(|(k, v)| vec![k.clone(), f6(*v)])
                .collect(),
        );
    }
    if !r.sweep.is_empty() {
        t.title("coupling sweep");
        t.rows(
            &["observable", "g", "mean", "shift/g", "weak value"],
            r.sweep
                .iter()
                .map(|p| {
                    vec![
                        p.observable.clone(),
                        f6(p.g),
                        f6(p.mean),
                        f6(p.shift_over_g),
                        f6(p.weak_value),
                    ]
                })
                .collect(),
        );
    }
    t.out
}
