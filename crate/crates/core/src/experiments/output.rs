use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use super::scenario::{Band, Scenario};
use super::studies::{sweep_nulling, sweep_rate_vs_snr, sweep_se_vs_ebn0, sweep_slope_vs_g, Study};
use crate::error::{Error, Result};

/// One study's output: named columns of floats plus the scenario that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub study: String,
    pub band: Band,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub scenario: String,
    pub seed: u64,
    pub code_version: &'static str,
}

impl ResultTable {
    pub fn new(scn: &Scenario, study: &str, columns: Vec<String>, rows: Vec<Vec<f64>>) -> Self {
        Self {
            study: study.to_string(),
            band: scn.band,
            columns,
            rows,
            scenario: scn.canonical(),
            seed: scn.seed,
            code_version: env!("CARGO_PKG_VERSION"),
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// `# scenario=<json> seed=<u64>`, a header row, then one line per row.
    pub fn to_csv(&self) -> String {
        let mut s = format!("# scenario={} seed={}\n", self.scenario, self.seed);
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| format_sig9(x)).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }

    /// `<study>_<band>[_<unix seconds>].csv`.
    pub fn file_name(&self, naming: FileNaming) -> String {
        match naming {
            FileNaming::Deterministic => format!("{}_{}.csv", self.study, self.band.name()),
            FileNaming::Timestamped => {
                let secs = SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map_or(0, |d| d.as_secs());
                format!("{}_{}_{secs}.csv", self.study, self.band.name())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FileNaming {
    #[default]
    Timestamped,
    Deterministic,
}

/// `%.9g`: nine significant digits, trailing zeros trimmed.
pub fn format_sig9(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        trim_zeros(format!("{:.*}", (8 - exp) as usize, x))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa.to_string()), exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    }
}

/// Write `table` into `dir` through a `.partial` file renamed on completion.
pub fn write_table(table: &ResultTable, dir: &Path, naming: FileNaming) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let path = dir.join(table.file_name(naming));
    let partial = path.with_extension("csv.partial");
    fs::write(&partial, table.to_csv()).map_err(|e| io_err(&partial, e))?;
    fs::rename(&partial, &path).map_err(|e| io_err(&path, e))?;
    Ok(path)
}

/// Run `study` on `scn` and write its table into `dir`.
pub fn run(scn: &Scenario, study: Study, dir: &Path, naming: FileNaming) -> Result<(ResultTable, PathBuf)> {
    let table = match study {
        Study::SlopeSweep => sweep_slope_vs_g(scn)?,
        Study::SeCurve => sweep_se_vs_ebn0(scn)?.table,
        Study::RateVsSnr => sweep_rate_vs_snr(scn)?,
        Study::Nulling => sweep_nulling(scn)?,
    };
    let path = write_table(&table, dir, naming)?;
    Ok((table, path))
}
