//! Dense matrix of directed "like" rates.
//!
//! Entry `(i, j)` is the rate at which agent `j` likes content from agent
//! `i`. Agent `j`'s outgoing rates therefore live in column `j`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, PartialEq)]
pub struct RateMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl RateMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            entries: vec![0.0; n * n],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidParameter(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v)?;
            }
        }
        Ok(m)
    }

    /// Uniform rate on both directions of every edge of `g`.
    pub fn uniform(g: &Graph, rate: f64) -> Result<Self> {
        let mut m = Self::zeros(g.node_count());
        for (i, j) in g.directed_edges() {
            m.set(i, j, rate)?;
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        if i >= self.n || j >= self.n {
            return Err(Error::InvalidParameter(format!(
                "index ({i}, {j}) out of range for dimension {}",
                self.n
            )));
        }
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "rate ({i}, {j}) must be finite and non-negative, got {value}"
            )));
        }
        self.entries[i * self.n + j] = value;
        Ok(())
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "scale factor must be > 0, got {factor}"
            )));
        }
        Ok(Self {
            n: self.n,
            entries: self.entries.iter().map(|v| v * factor).collect(),
        })
    }

    /// Matrix with labels permuted: node `i` becomes `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        let mut m = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m.entries[perm[i] * self.n + perm[j]] = self.get(i, j);
            }
        }
        m
    }

    /// Checks dimension, zero diagonal, and that support is confined to the
    /// edges of `g`. Zero rates on edges are allowed.
    pub fn check_compatible(&self, g: &Graph) -> Result<()> {
        if self.n != g.node_count() {
            return Err(Error::DimensionMismatch {
                graph: g.node_count(),
                rates: self.n,
            });
        }
        for i in 0..self.n {
            for j in 0..self.n {
                let v = self.get(i, j);
                if v != 0.0 && !g.has_edge(i, j) {
                    return Err(Error::IncompatibleRates(format!(
                        "nonzero rate {v} at ({i}, {j}) which is not an edge"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Dense CSV: `n` rows of `n` comma-separated values, no header.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.n {
            for j in 0..self.n {
                if j > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{}", self.get(i, j));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let mut rows = Vec::new();
        for (idx, record) in reader.records().enumerate() {
            let record = record?;
            let row = record
                .iter()
                .map(|f| {
                    f.parse::<f64>().map_err(|_| Error::Parse {
                        line: idx + 1,
                        message: format!("not a number: `{f}`"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Empty("rate CSV has no rows".into()));
        }
        Self::from_rows(&rows)
    }

    /// Sparse triplets, one `i j rate` line per nonzero entry.
    pub fn to_triplets(&self) -> String {
        let mut out = String::new();
        for i in 0..self.n {
            for j in 0..self.n {
                let v = self.get(i, j);
                if v != 0.0 {
                    let _ = writeln!(out, "{i} {j} {v}");
                }
            }
        }
        out
    }

    pub fn from_triplets(text: &str, n: usize) -> Result<Self> {
        let mut m = Self::zeros(n);
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let err = |message: String| Error::Parse {
                line: idx + 1,
                message,
            };
            if fields.len() != 3 {
                return Err(err(format!("expected `i j rate`, found `{line}`")));
            }
            let i: usize = fields[0]
                .parse()
                .map_err(|_| err(format!("bad index `{}`", fields[0])))?;
            let j: usize = fields[1]
                .parse()
                .map_err(|_| err(format!("bad index `{}`", fields[1])))?;
            let v: f64 = fields[2]
                .parse()
                .map_err(|_| err(format!("bad rate `{}`", fields[2])))?;
            m.set(i, j, v).map_err(|e| err(e.to_string()))?;
        }
        Ok(m)
    }

    /// Parses either format. Text whose first data line has three
    /// whitespace-separated fields and no commas is read as triplets.
    pub fn parse_auto(text: &str, n: usize) -> Result<Self> {
        let first = text
            .lines()
            .map(str::trim)
            .find(|l| !l.is_empty() && !l.starts_with('#'));
        match first {
            Some(l) if !l.contains(',') && l.split_whitespace().count() == 3 => {
                Self::from_triplets(text, n)
            }
            _ => {
                let m = Self::from_csv(text)?;
                if m.dim() != n {
                    return Err(Error::DimensionMismatch {
                        graph: n,
                        rates: m.dim(),
                    });
                }
                Ok(m)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate_star;

    #[test]
    fn rejects_negative_and_nan() {
        let mut m = RateMatrix::zeros(2);
        assert!(m.set(0, 1, -1.0).is_err());
        assert!(m.set(0, 1, f64::NAN).is_err());
        assert!(m.set(2, 0, 1.0).is_err());
    }

    #[test]
    fn support_check() {
        let star = generate_star(4).unwrap();
        let mut m = RateMatrix::uniform(&star, 1.0).unwrap();
        assert!(m.check_compatible(&star).is_ok());
        m.set(1, 2, 0.5).unwrap();
        assert!(matches!(
            m.check_compatible(&star),
            Err(Error::IncompatibleRates(_))
        ));
        let wrong = RateMatrix::zeros(3);
        assert!(matches!(
            wrong.check_compatible(&star),
            Err(Error::DimensionMismatch { graph: 4, rates: 3 })
        ));
    }

    #[test]
    fn formats_parse_back() {
        let star = generate_star(4).unwrap();
        let mut m = RateMatrix::uniform(&star, 0.25).unwrap();
        m.set(0, 3, 1.0 / 3.0).unwrap();
        assert_eq!(RateMatrix::from_csv(&m.to_csv()).unwrap(), m);
        assert_eq!(RateMatrix::from_triplets(&m.to_triplets(), 4).unwrap(), m);
        assert_eq!(RateMatrix::parse_auto(&m.to_csv(), 4).unwrap(), m);
        assert_eq!(RateMatrix::parse_auto(&m.to_triplets(), 4).unwrap(), m);
    }

    #[test]
    fn parse_errors() {
        assert!(RateMatrix::from_csv("0,1\n1\n").is_err());
        assert!(RateMatrix::from_csv("0,x\n1,0\n").is_err());
        assert!(RateMatrix::from_triplets("0 1\n", 2).is_err());
        assert!(RateMatrix::from_triplets("0 5 1.0\n", 2).is_err());
    }
}
