//! Report rows and their CSV / JSON emission.

use std::io::Write;
use std::path::{Path, PathBuf};

use coquat::Biquaternion;
use num_complex::Complex64;
use serde_json::{json, Map, Value};

use crate::config::{ExperimentConfig, Format};

/// Where a reference value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    ClosedForm,
    Oracle,
    None,
}

impl Provenance {
    pub fn label(self) -> &'static str {
        match self {
            Provenance::ClosedForm => "closed-form",
            Provenance::Oracle => "oracle",
            Provenance::None => "none",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub case_id: String,
    /// `None` when the computation itself failed.
    pub value: Option<Biquaternion>,
    pub reference: Option<Biquaternion>,
    pub abs_error: Option<f64>,
    pub resolution: String,
    pub epsilon: Option<f64>,
    pub wall_ms: f64,
}

/// Per-case bookkeeping that goes to the sidecar file.
#[derive(Clone, Debug, PartialEq)]
pub struct CaseMeta {
    pub provenance: Provenance,
    pub tolerance: Option<f64>,
    pub pass: bool,
    pub note: String,
}

#[derive(Clone, Debug, Default)]
pub struct RunReport {
    pub rows: Vec<Row>,
    pub meta: Vec<CaseMeta>,
}

impl RunReport {
    pub fn push(&mut self, row: Row, meta: CaseMeta) {
        self.rows.push(row);
        self.meta.push(meta);
    }

    pub fn failures(&self) -> usize {
        self.meta.iter().filter(|m| !m.pass).count()
    }
}

pub fn scalar(c: Complex64) -> Biquaternion {
    Biquaternion::scalar(c)
}

pub fn columns() -> Vec<String> {
    let mut cols = vec!["case_id".to_string()];
    for prefix in ["value", "ref"] {
        for k in 0..4 {
            for part in ["re", "im"] {
                cols.push(format!("{prefix}_e{k}_{part}"));
            }
        }
    }
    cols.extend(["abs_error", "resolution", "epsilon", "wall_ms"].map(String::from));
    cols
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

fn parts(z: &Option<Biquaternion>) -> Vec<Option<f64>> {
    match z {
        Some(z) => z.z.iter().flat_map(|c| [Some(c.re), Some(c.im)]).collect(),
        None => vec![None; 8],
    }
}

fn cells(row: &Row) -> Vec<String> {
    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
    let mut out = vec![row.case_id.clone()];
    out.extend(parts(&row.value).into_iter().map(opt));
    out.extend(parts(&row.reference).into_iter().map(opt));
    out.push(opt(row.abs_error));
    out.push(row.resolution.clone());
    out.push(opt(row.epsilon));
    out.push(num(row.wall_ms));
    out
}

pub fn write_csv<W: Write>(rows: &[Row], w: W) -> csv::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(columns())?;
    for r in rows {
        wr.write_record(cells(r))?;
    }
    wr.flush()?;
    Ok(())
}

/// Parse CSV written by [`write_csv`] back into rows.
pub fn read_csv<R: std::io::Read>(r: R) -> Result<Vec<Row>, String> {
    let mut rd = csv::Reader::from_reader(r);
    let header: Vec<String> = rd.headers().map_err(|e| e.to_string())?.iter().map(String::from).collect();
    if header != columns() {
        return Err(format!("unexpected header {header:?}"));
    }
    let opt = |s: &str| -> Result<Option<f64>, String> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse().map(Some).map_err(|_| format!("bad number `{s}`"))
        }
    };
    let quat = |c: &[Option<f64>]| -> Result<Option<Biquaternion>, String> {
        if c.iter().all(Option::is_none) {
            return Ok(None);
        }
        let v: Vec<f64> = c.iter().map(|x| x.ok_or("partially empty value")).collect::<Result<_, _>>()?;
        Ok(Some(Biquaternion { z: std::array::from_fn(|k| Complex64::new(v[2 * k], v[2 * k + 1])) }))
    };
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        let f: Vec<&str> = rec.iter().collect();
        let nums: Vec<Option<f64>> = f[1..17].iter().map(|s| opt(s)).collect::<Result<_, _>>()?;
        rows.push(Row {
            case_id: f[0].to_string(),
            value: quat(&nums[..8])?,
            reference: quat(&nums[8..])?,
            abs_error: opt(f[17])?,
            resolution: f[18].to_string(),
            epsilon: opt(f[19])?,
            wall_ms: opt(f[20])?.ok_or("missing wall_ms")?,
        });
    }
    Ok(rows)
}

fn row_json(row: &Row) -> Value {
    let mut m = Map::new();
    for (k, cell) in columns().into_iter().zip(cells(row)) {
        let v = if k == "case_id" || k == "resolution" {
            json!(cell)
        } else if cell.is_empty() {
            Value::Null
        } else {
            json!(cell.parse::<f64>().expect("formatted number"))
        };
        m.insert(k, v);
    }
    Value::Object(m)
}

pub fn json_document(config: &ExperimentConfig, rows: &[Row]) -> Value {
    json!({
        "config": config.to_json(),
        "rows": rows.iter().map(row_json).collect::<Vec<_>>(),
    })
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

pub fn metadata(config: &ExperimentConfig, report: &RunReport) -> Value {
    let cases: Vec<Value> = report
        .rows
        .iter()
        .zip(&report.meta)
        .map(|(r, m)| {
            json!({
                "case_id": r.case_id,
                "provenance": m.provenance.label(),
                "tolerance": m.tolerance,
                "pass": m.pass,
                "note": m.note,
            })
        })
        .collect();
    json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "timestamp": chrono::Utc::now().to_rfc3339(),
        "config": config.to_json(),
        "columns": columns(),
        "summary": { "cases": report.rows.len(), "failed": report.failures() },
        "cases": cases,
    })
}

/// Write the data file and its `.meta.json` sidecar.
pub fn emit(config: &ExperimentConfig, report: &RunReport) -> std::io::Result<()> {
    let out = &config.output_path;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let file = std::io::BufWriter::new(std::fs::File::create(out)?);
    match config.format {
        Format::Csv => write_csv(&report.rows, file).map_err(std::io::Error::other)?,
        Format::Json => {
            let mut file = file;
            serde_json::to_writer_pretty(&mut file, &json_document(config, &report.rows))?;
            writeln!(file)?;
        }
    }
    let meta = serde_json::to_string_pretty(&metadata(config, report))?;
    std::fs::write(sidecar_path(out), meta + "\n")
}
