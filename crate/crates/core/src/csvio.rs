//! Plain CSV output with 17 significant digits so every value re-parses to
//! the same f64, plus the emitted gnuplot script.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Result, SchrError};
use crate::oracles::ErrorReport;

pub const SOLUTION_HEADER: [&str; 4] = ["x", "u_num", "u_exact", "abs_err"];
pub const PHASE_HEADER: [&str; 4] = ["x", "xi", "f_num", "f_exact"];

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Column-oriented numeric table.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &[&str], columns: Vec<Vec<f64>>) -> Result<Self> {
        if header.len() != columns.len() {
            return Err(SchrError::Shape { expected: header.len(), got: columns.len() });
        }
        let rows = columns.first().map_or(0, Vec::len);
        if let Some(c) = columns.iter().find(|c| c.len() != rows) {
            return Err(SchrError::Shape { expected: rows, got: c.len() });
        }
        Ok(Table { header: header.iter().map(|s| s.to_string()).collect(), columns })
    }

    pub fn nrows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.header.iter().position(|h| h == name).map(|k| self.columns[k].as_slice())
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in 0..self.nrows() {
            for (k, c) in self.columns.iter().enumerate() {
                if k > 0 {
                    s.push(',');
                }
                s.push_str(&fmt_f64(c[r]));
            }
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| SchrError::InvalidInput("empty CSV".into()))?
            .split(',')
            .map(|s| s.trim().to_string())
            .collect();
        let mut columns = vec![Vec::new(); header.len()];
        for (ln, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != header.len() {
                return Err(SchrError::InvalidInput(format!("CSV row {} has {} fields, expected {}", ln + 2, fields.len(), header.len())));
            }
            for (c, f) in columns.iter_mut().zip(fields) {
                c.push(f.trim().parse().map_err(|_| SchrError::InvalidInput(format!("bad number '{f}' in CSV row {}", ln + 2)))?);
            }
        }
        Ok(Table { header, columns })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }
}

pub fn error_summary_csv(r: &ErrorReport) -> String {
    format!("norm,value\nl_inf,{}\nl2,{}\nl1,{}\n", fmt_f64(r.l_inf), fmt_f64(r.l2), fmt_f64(r.l1))
}

/// Reads `norm,value` rows back; the point count is not stored.
pub fn parse_error_summary(text: &str) -> Result<ErrorReport> {
    let mut r = ErrorReport { l_inf: f64::NAN, l2: f64::NAN, l1: f64::NAN, n_points: 0 };
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    if lines.next().map(str::trim) != Some("norm,value") {
        return Err(SchrError::InvalidInput("error summary must start with 'norm,value'".into()));
    }
    for line in lines {
        let (k, v) = line.split_once(',').ok_or_else(|| SchrError::InvalidInput(format!("bad row '{line}'")))?;
        let v: f64 = v.trim().parse().map_err(|_| SchrError::InvalidInput(format!("bad number in '{line}'")))?;
        match k.trim() {
            "l_inf" => r.l_inf = v,
            "l2" => r.l2 = v,
            "l1" => r.l1 = v,
            other => return Err(SchrError::InvalidInput(format!("unknown norm '{other}'"))),
        }
    }
    Ok(r)
}

pub fn write_error_summary(path: &Path, r: &ErrorReport) -> Result<()> {
    fs::write(path, error_summary_csv(r))?;
    Ok(())
}

pub fn read_error_summary(path: &Path) -> Result<ErrorReport> {
    parse_error_summary(&fs::read_to_string(path)?)
}

/// gnuplot script comparing numeric and exact columns of `solution` (and
/// the direct run if present). Paths are written relative to the script.
pub fn plot_script(title: &str, solution: &str, direct: Option<&str>, phase_space: bool) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# gnuplot script; run from this directory");
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set title '{title}'");
    if phase_space {
        let png = solution.replace(".csv", ".png");
        let _ = writeln!(s, "set terminal pngcairo size 1200,500\nset output '{png}'");
        let _ = writeln!(s, "set multiplot layout 1,2\nset view map\nset xlabel 'x'\nset ylabel 'xi'");
        let _ = writeln!(s, "splot '{solution}' using 1:2:3 with points pointtype 5 pointsize 0.3 palette title 'f_num'");
        let _ = writeln!(s, "splot '{solution}' using 1:2:4 with points pointtype 5 pointsize 0.3 palette title 'f_exact'");
        let _ = writeln!(s, "unset multiplot");
    } else {
        let png = solution.replace(".csv", ".png");
        let _ = writeln!(s, "set terminal pngcairo size 900,600\nset output '{png}'\nset xlabel 'x'");
        let _ = write!(s, "plot '{solution}' using 1:2 with linespoints title 'numeric', '{solution}' using 1:3 with lines title 'exact'");
        if let Some(d) = direct {
            let _ = write!(s, ", '{d}' using 1:2 with lines dashtype 2 title 'direct'");
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_exact_bits() {
        let vals = vec![0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, f64::MIN_POSITIVE, 0.0, -0.0];
        let t = Table::new(&["a", "b"], vec![vals.clone(), vals.iter().map(|v| v * 7.0).collect()]).unwrap();
        let back = Table::parse(&t.to_csv()).unwrap();
        assert_eq!(back.header, t.header);
        for (c, d) in back.columns.iter().zip(&t.columns) {
            assert!(c.iter().zip(d).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }

    #[test]
    fn error_summary_round_trip() {
        let r = ErrorReport { l_inf: 0.1, l2: 2.0 / 3.0, l1: 1e-17, n_points: 5 };
        let back = parse_error_summary(&error_summary_csv(&r)).unwrap();
        assert_eq!((back.l_inf, back.l2, back.l1), (r.l_inf, r.l2, r.l1));
    }

    #[test]
    fn malformed_rejected() {
        assert!(Table::parse("a,b\n1,2,3\n").is_err());
        assert!(Table::parse("a\nx\n").is_err());
        assert!(Table::new(&["a"], vec![vec![1.0], vec![2.0]]).is_err());
        assert!(parse_error_summary("foo\n").is_err());
    }
}
