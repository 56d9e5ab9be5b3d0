//! CSV export of kernels and operators, bound to their measure by content hash.
//!
//! ```text
//! # waveops-kernel v1 measure=<sha256> atoms=<m>
//! i,j,re,im
//! 0,0,<re>,<im>
//! ...
//! ```
//! Operator files use `# waveops-operator v1 measure=<sha256> atoms=<m> role=<R>`
//! and hold orthonormal-coordinate entries.

use num_complex::Complex;

use super::{Kernel, MeasureRef, OperatorMatrix, Role};
use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::scalar::{fmt17, Real};

pub const KERNEL_HEADER: &str = "# waveops-kernel v1";
pub const OPERATOR_HEADER: &str = "# waveops-operator v1";

fn write_entries<T: Real>(out: &mut String, m: &CMatrix<T>) {
    out.push_str("i,j,re,im\n");
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let x = m[(i, j)];
            out.push_str(&format!("{i},{j},{},{}\n", fmt17(x.re), fmt17(x.im)));
        }
    }
}

fn parse_header<'a>(line: &'a str, prefix: &str) -> Result<Vec<(&'a str, &'a str)>> {
    let rest = line.strip_prefix(prefix).ok_or_else(|| Error::Parse {
        line: 1,
        msg: format!("expected header starting with {prefix:?}"),
    })?;
    rest.split_whitespace()
        .map(|kv| {
            kv.split_once('=').ok_or_else(|| Error::Parse {
                line: 1,
                msg: format!("malformed header field {kv:?}"),
            })
        })
        .collect()
}

fn field<'a>(fields: &[(&str, &'a str)], key: &str) -> Result<&'a str> {
    fields
        .iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| Error::Parse {
            line: 1,
            msg: format!("header is missing {key}="),
        })
}

fn read_entries<T: Real>(lines: &[&str], m: usize) -> Result<CMatrix<T>> {
    if lines.first().map(|l| l.trim()) != Some("i,j,re,im") {
        return Err(Error::Parse {
            line: 2,
            msg: "expected column header i,j,re,im".into(),
        });
    }
    let mut out = CMatrix::zeros(m, m);
    let mut seen = vec![false; m * m];
    for (off, line) in lines[1..].iter().enumerate() {
        let lineno = off + 3;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |msg: String| Error::Parse { line: lineno, msg };
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 4 {
            return Err(bad("expected 4 columns".into()));
        }
        let i: usize = parts[0].trim().parse().map_err(|e| bad(format!("row index: {e}")))?;
        let j: usize = parts[1].trim().parse().map_err(|e| bad(format!("column index: {e}")))?;
        let re: f64 = parts[2].trim().parse().map_err(|e| bad(format!("re: {e}")))?;
        let im: f64 = parts[3].trim().parse().map_err(|e| bad(format!("im: {e}")))?;
        if i >= m || j >= m {
            return Err(bad(format!("index ({i},{j}) out of range for {m} atoms")));
        }
        if std::mem::replace(&mut seen[i * m + j], true) {
            return Err(bad(format!("duplicate entry ({i},{j})")));
        }
        out[(i, j)] = Complex::new(T::lit(re), T::lit(im));
    }
    Ok(out)
}

fn check_binding<T: Real>(fields: &[(&str, &str)], measure: &MeasureRef<T>) -> Result<usize> {
    let hash = field(fields, "measure")?;
    if hash != measure.id() {
        return Err(Error::MeasureMismatch {
            left: hash.chars().take(12).collect(),
            right: measure.id()[..12].to_string(),
        });
    }
    let m: usize = field(fields, "atoms")?.parse().map_err(|e| Error::Parse {
        line: 1,
        msg: format!("atoms: {e}"),
    })?;
    if m != measure.len() {
        return Err(Error::Shape {
            expected: measure.len(),
            got: m,
        });
    }
    Ok(m)
}

impl<T: Real> Kernel<T> {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{KERNEL_HEADER} measure={} atoms={}\n", self.measure().id(), self.dim());
        write_entries(&mut out, self.values());
        out
    }

    /// Parses a kernel file; the header hash must match `measure`.
    pub fn from_csv(text: &str, measure: &MeasureRef<T>) -> Result<Self> {
        let lines: Vec<&str> = text.lines().collect();
        let header = lines.first().ok_or(Error::Parse {
            line: 1,
            msg: "empty kernel file".into(),
        })?;
        let fields = parse_header(header, KERNEL_HEADER)?;
        let m = check_binding(&fields, measure)?;
        let values = read_entries(&lines[1..], m)?;
        Kernel::new(measure.clone(), values)
    }
}

impl<T: Real> OperatorMatrix<T> {
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "{OPERATOR_HEADER} measure={} atoms={} role={}\n",
            self.measure().id(),
            self.dim(),
            self.role()
        );
        write_entries(&mut out, self.entries());
        out
    }

    pub fn from_csv(text: &str, measure: &MeasureRef<T>) -> Result<Self> {
        let lines: Vec<&str> = text.lines().collect();
        let header = lines.first().ok_or(Error::Parse {
            line: 1,
            msg: "empty operator file".into(),
        })?;
        let fields = parse_header(header, OPERATOR_HEADER)?;
        let m = check_binding(&fields, measure)?;
        let role: Role = field(&fields, "role")?.parse()?;
        let entries = read_entries(&lines[1..], m)?;
        OperatorMatrix::new(measure.clone(), entries, role)
    }
}
