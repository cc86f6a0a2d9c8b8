//! CSV reading and writing. One format throughout: UTF-8, comma separator,
//! `.` decimal point, floats printed with 17 significant digits so parsing
//! a file back reproduces every double bit-for-bit.

use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use super::CliError;

/// A parsed input series: consecutive integer times starting at `first_t`.
#[derive(Debug, Clone)]
pub struct Series {
    pub first_t: i64,
    pub values: Vec<f64>,
}

impl Series {
    pub fn last_t(&self) -> i64 {
        self.first_t + self.values.len() as i64 - 1
    }

    pub fn value_at(&self, t: i64) -> Option<f64> {
        if t < self.first_t || t > self.last_t() {
            None
        } else {
            Some(self.values[(t - self.first_t) as usize])
        }
    }
}

/// 17 significant digits; exact round-trip for binary doubles.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn io_err(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Reads a `t,value` CSV. A leading `t,value` header is skipped; times must
/// be consecutive integers; values must be finite.
pub fn read_series(path: &Path) -> Result<Series, CliError> {
    let file = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    let reader = BufReader::new(file);
    let mut first_t = None;
    let mut values = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| io_err(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut fields = trimmed.split(',');
        let t_field = fields.next().unwrap_or("").trim();
        let v_field = fields.next().unwrap_or("").trim();
        if fields.next().is_some() {
            return Err(CliError::Parse {
                line: line_no,
                message: format!("expected two fields `t,value`, got {trimmed:?}"),
            });
        }
        let t: i64 = match t_field.parse() {
            Ok(t) => t,
            Err(_) => {
                // Tolerate a single header row at the top of the file.
                if line_no == 1 && t_field.chars().next().is_some_and(char::is_alphabetic) {
                    continue;
                }
                return Err(CliError::Parse {
                    line: line_no,
                    message: format!("bad time index {t_field:?}"),
                });
            }
        };
        let v: f64 = v_field.parse().map_err(|_| CliError::Parse {
            line: line_no,
            message: format!("bad value {v_field:?}"),
        })?;
        if !v.is_finite() {
            return Err(CliError::Parse {
                line: line_no,
                message: format!("non-finite value {v_field:?}"),
            });
        }
        match first_t {
            None => first_t = Some(t),
            Some(f) => {
                let expected = f + values.len() as i64;
                if t != expected {
                    return Err(CliError::Gap { expected, got: t });
                }
            }
        }
        values.push(v);
    }
    match first_t {
        Some(first_t) => Ok(Series { first_t, values }),
        None => Err(CliError::Parse {
            line: 1,
            message: "input contains no samples".into(),
        }),
    }
}

/// Writer that targets either a file or stdout.
pub enum Sink {
    File(PathBuf, std::io::BufWriter<std::fs::File>),
    Stdout(std::io::Stdout),
}

impl Sink {
    pub fn create(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            Some(p) => {
                let file = std::fs::File::create(p).map_err(|e| io_err(p, e))?;
                Ok(Sink::File(p.to_path_buf(), std::io::BufWriter::new(file)))
            }
            None => Ok(Sink::Stdout(std::io::stdout())),
        }
    }

    pub fn write_line(&mut self, line: &str) -> Result<(), CliError> {
        let result = match self {
            Sink::File(_, w) => writeln!(w, "{line}"),
            Sink::Stdout(w) => writeln!(w, "{line}"),
        };
        result.map_err(|e| match self {
            Sink::File(p, _) => io_err(p, e),
            Sink::Stdout(_) => io_err(Path::new("<stdout>"), e),
        })
    }

    pub fn finish(self) -> Result<(), CliError> {
        if let Sink::File(p, mut w) = self {
            w.flush().map_err(|e| io_err(&p, e))?;
        }
        Ok(())
    }
}

pub fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Config(format!("summary serialization failed: {e}")))?;
    std::fs::write(path, text + "\n").map_err(|e| io_err(path, e))
}
