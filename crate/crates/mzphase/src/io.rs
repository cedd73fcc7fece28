//! Text output for sweep tables, sample streams, Wigner grids, and campaign
//! summaries.
//!
//! CSV files start with `# key = value` metadata lines (a flat TOML document
//! once the `# ` prefix is stripped), then a header row, then data rows with
//! 17 significant digits so every double survives a round trip. JSON payloads
//! are `{meta, rows}`-shaped objects. Infinities serialize as the literal
//! `inf`/`-inf`: a diverging Cramer-Rao bound is a result, not an overflow.

use serde_json::{json, Map, Value};

use crate::fisher_c::{CampaignSummary, FisherReport, Samples, SweepAxis};
use crate::measure::{CountSample, HomodyneSample};
use crate::wigner::WignerGrid;

/// Render with 17 significant digits; non-finite values become the literals
/// `inf`, `-inf`, `nan`.
pub fn fmt_g17(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{x:.16e}")
    }
}

/// One metadata value; rendered as TOML in CSV comments and natively in JSON.
#[derive(Debug, Clone, PartialEq)]
pub enum MetaValue {
    Str(String),
    Float(f64),
    Int(i64),
    Bool(bool),
}

impl From<&str> for MetaValue {
    fn from(s: &str) -> Self {
        MetaValue::Str(s.to_string())
    }
}

impl From<String> for MetaValue {
    fn from(s: String) -> Self {
        MetaValue::Str(s)
    }
}

impl From<f64> for MetaValue {
    fn from(x: f64) -> Self {
        MetaValue::Float(x)
    }
}

impl From<i64> for MetaValue {
    fn from(x: i64) -> Self {
        MetaValue::Int(x)
    }
}

impl From<u64> for MetaValue {
    fn from(x: u64) -> Self {
        MetaValue::Int(x as i64)
    }
}

impl From<bool> for MetaValue {
    fn from(x: bool) -> Self {
        MetaValue::Bool(x)
    }
}

/// Ordered metadata entries, typically the resolved run configuration.
pub type Meta = Vec<(String, MetaValue)>;

fn toml_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Metadata as `# key = value` comment lines; stripping the `# ` prefix
/// leaves a flat TOML document.
pub fn meta_comment_block(meta: &Meta) -> String {
    let mut out = String::new();
    for (key, value) in meta {
        let rendered = match value {
            MetaValue::Str(s) => format!("\"{}\"", toml_escape(s)),
            MetaValue::Float(x) => fmt_g17(*x),
            MetaValue::Int(i) => i.to_string(),
            MetaValue::Bool(b) => b.to_string(),
        };
        out.push_str(&format!("# {key} = {rendered}\n"));
    }
    out
}

/// Finite values become JSON numbers; infinities and NaN become the tag
/// strings `inf`, `-inf`, `nan`.
pub fn json_real(x: f64) -> Value {
    match serde_json::Number::from_f64(x) {
        Some(n) => Value::Number(n),
        None => Value::String(fmt_g17(x)),
    }
}

/// Metadata as a JSON object.
pub fn meta_json(meta: &Meta) -> Value {
    let mut map = Map::new();
    for (key, value) in meta {
        let v = match value {
            MetaValue::Str(s) => Value::String(s.clone()),
            MetaValue::Float(x) => json_real(*x),
            MetaValue::Int(i) => json!(i),
            MetaValue::Bool(b) => json!(b),
        };
        map.insert(key.clone(), v);
    }
    Value::Object(map)
}

pub const FISHER_CSV_COLUMNS: &str = "phi_or_nbar,cfi,qfi,delta_phi,delta_phi_min,delta_phi_sql";

fn fisher_axis_value(axis: SweepAxis, row: &FisherReport) -> f64 {
    match axis {
        SweepAxis::Phi => row.phi,
        SweepAxis::NBar => row.n_bar,
    }
}

/// Sweep table as CSV with a metadata preamble.
pub fn fisher_csv(meta: &Meta, axis: SweepAxis, rows: &[FisherReport]) -> String {
    let mut out = meta_comment_block(meta);
    out.push_str(FISHER_CSV_COLUMNS);
    out.push('\n');
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_g17(fisher_axis_value(axis, row)),
            fmt_g17(row.cfi),
            fmt_g17(row.qfi),
            fmt_g17(row.delta_phi),
            fmt_g17(row.delta_phi_min),
            fmt_g17(row.delta_phi_sql),
        ));
    }
    out
}

/// Sweep table as a `{meta, rows}` JSON document.
pub fn fisher_json(meta: &Meta, axis: SweepAxis, rows: &[FisherReport]) -> String {
    let rows: Vec<Value> = rows
        .iter()
        .map(|row| {
            json!({
                "phi_or_nbar": json_real(fisher_axis_value(axis, row)),
                "cfi": json_real(row.cfi),
                "qfi": json_real(row.qfi),
                "delta_phi": json_real(row.delta_phi),
                "delta_phi_min": json_real(row.delta_phi_min),
                "delta_phi_sql": json_real(row.delta_phi_sql),
            })
        })
        .collect();
    let doc = json!({ "meta": meta_json(meta), "rows": Value::Array(rows) });
    serde_json::to_string_pretty(&doc).expect("static structure")
}

fn homodyne_rows(out: &mut String, samples: &[HomodyneSample], with_qubit: bool) {
    for s in samples {
        out.push_str(&fmt_g17(s.x_plus));
        out.push(',');
        out.push_str(&fmt_g17(s.x_minus));
        if with_qubit {
            out.push(',');
            out.push_str(if s.qubit_x.map(|q| q.sign()) == Some(1.0) { "1" } else { "-1" });
        }
        out.push('\n');
    }
}

fn counting_rows(out: &mut String, samples: &[CountSample], with_qubit: bool) {
    for s in samples {
        out.push_str(&format!("{},{}", s.m, s.n));
        if with_qubit {
            out.push(',');
            out.push_str(if s.qubit_x.map(|q| q.sign()) == Some(1.0) { "1" } else { "-1" });
        }
        out.push('\n');
    }
}

/// Record batch as CSV; the qubit column appears only when records carry one.
pub fn samples_csv(meta: &Meta, samples: &Samples) -> String {
    let mut out = meta_comment_block(meta);
    match samples {
        Samples::Homodyne(v) => {
            let with_qubit = v.iter().any(|s| s.qubit_x.is_some());
            out.push_str(if with_qubit { "x_plus,x_minus,qubit_x\n" } else { "x_plus,x_minus\n" });
            homodyne_rows(&mut out, v, with_qubit);
        }
        Samples::Counting(v) => {
            let with_qubit = v.iter().any(|s| s.qubit_x.is_some());
            out.push_str(if with_qubit { "m,n,qubit_x\n" } else { "m,n\n" });
            counting_rows(&mut out, v, with_qubit);
        }
    }
    out
}

/// Record batch as JSON lines: a `{"meta": ...}` header line, then one record
/// object per line.
pub fn samples_jsonl(meta: &Meta, samples: &Samples) -> String {
    let mut out = String::new();
    out.push_str(&serde_json::to_string(&json!({ "meta": meta_json(meta) })).expect("static"));
    out.push('\n');
    match samples {
        Samples::Homodyne(v) => {
            for s in v {
                out.push_str(&serde_json::to_string(s).expect("plain record"));
                out.push('\n');
            }
        }
        Samples::Counting(v) => {
            for s in v {
                out.push_str(&serde_json::to_string(s).expect("plain record"));
                out.push('\n');
            }
        }
    }
    out
}

/// Wigner grid as CSV triples (x, p, w), x-major.
pub fn wigner_csv(meta: &Meta, grid: &WignerGrid) -> String {
    let mut out = meta_comment_block(meta);
    out.push_str("x,p,w\n");
    for (i, &x) in grid.xs().iter().enumerate() {
        for (j, &p) in grid.ps().iter().enumerate() {
            out.push_str(&format!(
                "{},{},{}\n",
                fmt_g17(x),
                fmt_g17(p),
                fmt_g17(grid.value(i, j))
            ));
        }
    }
    out
}

/// Wigner grid as a dense-matrix JSON document: `values[i][j]` is the density
/// at `(x[i], p[j])`.
pub fn wigner_json(meta: &Meta, grid: &WignerGrid) -> String {
    let values: Vec<Value> = grid
        .xs()
        .iter()
        .enumerate()
        .map(|(i, _)| {
            Value::Array((0..grid.ps().len()).map(|j| json_real(grid.value(i, j))).collect())
        })
        .collect();
    let doc = json!({
        "meta": meta_json(meta),
        "x": grid.xs().iter().map(|&v| json_real(v)).collect::<Vec<_>>(),
        "p": grid.ps().iter().map(|&v| json_real(v)).collect::<Vec<_>>(),
        "values": Value::Array(values),
    });
    serde_json::to_string_pretty(&doc).expect("static structure")
}

fn summary_meta(summary: &CampaignSummary) -> Meta {
    vec![
        ("trials".to_string(), MetaValue::Int(summary.trials as i64)),
        ("samples_per_trial".to_string(), MetaValue::Int(summary.samples_per_trial as i64)),
        ("true_phi".to_string(), MetaValue::Float(summary.true_phi)),
        ("mean_estimate".to_string(), MetaValue::Float(summary.mean_estimate)),
        ("bias".to_string(), MetaValue::Float(summary.bias)),
        ("std_dev".to_string(), MetaValue::Float(summary.std_dev)),
        ("rmse".to_string(), MetaValue::Float(summary.rmse)),
        ("cfi".to_string(), MetaValue::Float(summary.cfi)),
        ("crb_std".to_string(), MetaValue::Float(summary.crb_std)),
        ("crb_ratio".to_string(), MetaValue::Float(summary.crb_ratio)),
        ("multimodal_trials".to_string(), MetaValue::Int(summary.multimodal_trials as i64)),
        ("boundary_trials".to_string(), MetaValue::Int(summary.boundary_trials as i64)),
    ]
}

/// Campaign as CSV: config metadata, then the summary statistics as further
/// metadata lines, then one row per trial estimate.
pub fn campaign_csv(meta: &Meta, summary: &CampaignSummary) -> String {
    let mut out = meta_comment_block(meta);
    out.push_str(&meta_comment_block(&summary_meta(summary)));
    out.push_str("trial,phi_hat\n");
    for (i, est) in summary.estimates.iter().enumerate() {
        out.push_str(&format!("{},{}\n", i, fmt_g17(*est)));
    }
    out
}

/// Campaign as a `{meta, summary}` JSON document; the per-trial estimates sit
/// inside the summary.
pub fn campaign_json(meta: &Meta, summary: &CampaignSummary) -> String {
    let mut doc = serde_json::to_value(summary).expect("plain struct");
    // Estimates pass through json_real so a diverging ratio stays tagged.
    if let Value::Object(map) = &mut doc {
        map.insert("crb_std".to_string(), json_real(summary.crb_std));
        map.insert("crb_ratio".to_string(), json_real(summary.crb_ratio));
    }
    let doc = json!({ "meta": meta_json(meta), "summary": doc });
    serde_json::to_string_pretty(&doc).expect("static structure")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::QubitOutcome;

    #[test]
    fn seventeen_digit_format_round_trips() {
        for &x in &[0.0, 1.0, -2.5, 1.0 / 3.0, 6.02e23, 2f64.powi(-1074)] {
            let s = fmt_g17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt_g17(f64::INFINITY), "inf");
        assert_eq!(fmt_g17(f64::NEG_INFINITY), "-inf");
        assert_eq!(fmt_g17(f64::NAN), "nan");
    }

    fn report(delta_phi: f64) -> FisherReport {
        // Dyadic values, so the decimal rendering below is exact.
        FisherReport {
            phi: 0.5,
            n_bar: 10.0,
            cfi: 0.0,
            qfi: 110.0,
            delta_phi,
            delta_phi_min: 0.03125,
            delta_phi_sql: 0.125,
            repetitions: 1,
        }
    }

    #[test]
    fn fisher_csv_has_the_pinned_header_and_inf_literal() {
        let meta = vec![("scheme".to_string(), MetaValue::from("counting"))];
        let csv = fisher_csv(&meta, SweepAxis::Phi, &[report(f64::INFINITY)]);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "# scheme = \"counting\"");
        assert_eq!(lines.next().unwrap(), FISHER_CSV_COLUMNS);
        let row = lines.next().unwrap();
        assert!(row.ends_with(",inf,3.1250000000000000e-2,1.2500000000000000e-1"), "{row}");
        assert!(row.starts_with("5.0000000000000000e-1,"), "{row}");
    }

    #[test]
    fn metadata_lines_strip_to_flat_toml() {
        let meta = vec![
            ("state".to_string(), MetaValue::from("ecs")),
            ("alpha".to_string(), MetaValue::Float(3.0)),
            ("count".to_string(), MetaValue::Int(1000)),
            ("refined".to_string(), MetaValue::Bool(true)),
        ];
        let block = meta_comment_block(&meta);
        for line in block.lines() {
            assert!(line.starts_with("# "));
            let stripped = &line[2..];
            let (key, value) = stripped.split_once(" = ").unwrap();
            assert!(!key.contains(' '));
            assert!(!value.is_empty());
        }
        assert!(block.contains("# state = \"ecs\""));
        assert!(block.contains("# count = 1000"));
    }

    #[test]
    fn fisher_json_tags_infinities() {
        let json = fisher_json(&vec![], SweepAxis::NBar, &[report(f64::INFINITY)]);
        let doc: Value = serde_json::from_str(&json).unwrap();
        assert_eq!(doc["rows"][0]["delta_phi"], Value::String("inf".to_string()));
        assert_eq!(doc["rows"][0]["qfi"], json!(110.0));
        assert_eq!(doc["rows"][0]["phi_or_nbar"], json!(10.0));
    }

    #[test]
    fn sample_csv_includes_the_qubit_column_only_when_present() {
        let plain = Samples::Homodyne(vec![HomodyneSample {
            x_plus: 0.25,
            x_minus: -1.0,
            qubit_x: None,
        }]);
        let csv = samples_csv(&vec![], &plain);
        assert!(csv.starts_with("x_plus,x_minus\n"));

        let tagged = Samples::Counting(vec![CountSample {
            m: 3,
            n: 0,
            qubit_x: Some(QubitOutcome::Minus),
        }]);
        let csv = samples_csv(&vec![], &tagged);
        assert!(csv.starts_with("m,n,qubit_x\n"));
        assert!(csv.contains("3,0,-1\n"));
    }

    #[test]
    fn sample_jsonl_is_one_record_per_line() {
        let tagged = Samples::Counting(vec![
            CountSample { m: 1, n: 2, qubit_x: Some(QubitOutcome::Plus) },
            CountSample { m: 0, n: 0, qubit_x: Some(QubitOutcome::Minus) },
        ]);
        let text = samples_jsonl(&vec![("seed".to_string(), MetaValue::Int(7))], &tagged);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        let head: Value = serde_json::from_str(lines[0]).unwrap();
        assert_eq!(head["meta"]["seed"], json!(7));
        let rec: Value = serde_json::from_str(lines[1]).unwrap();
        assert_eq!(rec, json!({"m": 1, "n": 2, "qubit_x": 1}));
    }
}
