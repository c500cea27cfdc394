//! File emission. CSV files open with a `# config: {...}` line holding the
//! resolved configuration; floats are written with 17 significant digits so
//! every value round-trips.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::CliError;

/// 17 significant digits, scientific notation.
pub fn float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new<C: Serialize>(config: &C, header: &[&str]) -> Result<Self, CliError> {
        let json = serde_json::to_string(config).map_err(|e| CliError::Run(e.to_string()))?;
        Ok(Self { text: format!("# config: {json}\n{}\n", header.join(",")) })
    }

    pub fn row(&mut self, cells: &[Cell<'_>]) {
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            match c {
                Cell::F(v) => self.text.push_str(&float(*v)),
                Cell::U(v) => {
                    let _ = write!(self.text, "{v}");
                }
                Cell::S(s) => self.text.push_str(s),
            }
        }
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

pub enum Cell<'a> {
    F(f64),
    U(usize),
    S(&'a str),
}

pub fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Run(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Writes to `path`, or to standard output when it is `None`.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
            }
            std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, std::f64::consts::PI, 6.02214076e23] {
            assert_eq!(float(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(float(f64::INFINITY), "inf");
    }

    #[test]
    fn csv_starts_with_the_config() {
        let mut c = Csv::new(&serde_json::json!({"a": 1}), &["x", "flag"]).unwrap();
        c.row(&[Cell::F(0.5), Cell::S("ok")]);
        assert_eq!(c.into_string(), "# config: {\"a\":1}\nx,flag\n5.0000000000000000e-1,ok\n");
    }
}
