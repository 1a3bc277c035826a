//! Output formats: a JSON envelope, CSV rows or plain text.

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::{Cli, Format};

/// Result of a command in all three formats.
pub struct Outcome {
    pub result: Value,
    pub text: String,
    pub csv: Vec<Vec<String>>,
    /// False when a check inside the command failed; the process then exits with 1.
    pub ok: bool,
}

impl Outcome {
    pub fn new(result: Value, text: String, csv: Vec<Vec<String>>) -> Self {
        Outcome { result, text, csv, ok: true }
    }
}

fn config(cli: &Cli) -> Value {
    json!({
        "type": cli.ty,
        "system": cli.system.as_ref().map(|p| p.display().to_string()),
        "degree_vector": cli.degree_vector,
        "theta": cli.theta,
        "seed": cli.seed,
        "field": cli.field,
        "tol": cli.tol,
        "box": cli.search_box,
    })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn emit(cli: &Cli, outcome: &Outcome) -> String {
    match cli.output {
        Format::Json => {
            let doc = json!({
                "version": koszul_core::VERSION,
                "command": cli.command.name(),
                "config": config(cli),
                "ok": outcome.ok,
                "result": outcome.result,
            });
            serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
        }
        Format::Csv => outcome
            .csv
            .iter()
            .map(|row| row.iter().map(|f| csv_field(f)).collect::<Vec<_>>().join(",") + "\n")
            .collect(),
        Format::Text => {
            let mut t = outcome.text.clone();
            if !t.ends_with('\n') {
                t.push('\n');
            }
            t
        }
    }
}

/// Shortest decimal with at most 12 significant digits.
pub fn fmt_f64(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let s = format!("{:.*e}", 11, v);
    let parsed: f64 = s.parse().expect("formatted float");
    let plain = format!("{parsed}");
    if plain.len() <= 16 {
        plain
    } else {
        format!("{parsed:e}")
    }
}

/// `a`, `a+bi` or `a-bi`, dropping parts below `eps` relative to the modulus.
pub fn fmt_complex(c: Complex64, eps: f64) -> String {
    let scale = c.norm().max(1.0);
    let re = if c.re.abs() < eps * scale { 0.0 } else { c.re };
    let im = if c.im.abs() < eps * scale { 0.0 } else { c.im };
    match (re == 0.0, im == 0.0) {
        (_, true) => fmt_f64(re),
        (true, false) => format!("{}i", fmt_f64(im)),
        (false, false) if im > 0.0 => format!("{}+{}i", fmt_f64(re), fmt_f64(im)),
        _ => format!("{}-{}i", fmt_f64(re), fmt_f64(-im)),
    }
}

pub fn complex_json(c: Complex64) -> Value {
    json!([c.re, c.im])
}

/// Right-aligned text grid.
pub fn grid(header: Option<&[String]>, rows: &[Vec<String>]) -> String {
    let ncols = rows.iter().map(Vec::len).chain(header.map(<[String]>::len)).max().unwrap_or(0);
    let mut width = vec![0; ncols];
    for row in header.into_iter().map(<[String]>::to_vec).chain(rows.iter().cloned()) {
        for (k, cell) in row.iter().enumerate() {
            width[k] = width[k].max(cell.chars().count());
        }
    }
    let line = |row: &[String]| {
        row.iter()
            .enumerate()
            .map(|(k, c)| format!("{c:>w$}", w = width[k]))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
            + "\n"
    };
    let mut out = String::new();
    if let Some(h) = header {
        out.push_str(&line(h));
    }
    for r in rows {
        out.push_str(&line(r));
    }
    out
}
