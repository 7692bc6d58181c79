//! CSV and NDJSON writers. Every CSV starts with a schema line and carries the model
//! parameters on every row.

use std::io::Write;

use crate::params::ModelParams;
use crate::rational::fmt_q;

pub const SCHEMA_LINE: &str = "# schema=1";

const PARAM_COLUMNS: [&str; 8] = ["sigma", "delta", "mu", "n", "q", "m", "s", "p"];

#[derive(Debug, Clone)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        let header = PARAM_COLUMNS.iter().chain(columns).map(|s| s.to_string()).collect();
        Self { header, rows: Vec::new() }
    }

    pub fn push(&mut self, params: Option<&ModelParams>, cells: Vec<String>) {
        let mut row = param_cells(params);
        row.extend(cells);
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{SCHEMA_LINE}")?;
        let mut csv = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(&mut w);
        csv.write_record(&self.header)?;
        for row in &self.rows {
            csv.write_record(row)?;
        }
        csv.flush()?;
        Ok(())
    }
}

fn param_cells(params: Option<&ModelParams>) -> Vec<String> {
    match params {
        None => vec![String::new(); PARAM_COLUMNS.len()],
        Some(p) => vec![
            fmt_q(&p.sigma),
            fmt_q(&p.delta),
            fmt_q(&p.mu),
            p.n.to_string(),
            fmt_q(&p.q),
            fmt_q(&p.m),
            fmt_q(&p.s),
            p.p.as_ref().map(fmt_q).unwrap_or_default(),
        ],
    }
}

/// Shortest round-trip form, in exponent notation for very small or large magnitudes.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn write_ndjson<W: Write>(mut w: W, rows: &[serde_json::Value]) -> std::io::Result<()> {
    for row in rows {
        serde_json::to_writer(&mut w, row)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::reference::linear_1d;

    #[test]
    fn schema_line_and_params_lead_every_row() {
        let mut t = Table::new(&["x"]);
        t.push(Some(&linear_1d()), vec![num(0.5)]);
        t.push(None, vec![num(1.0)]);
        let mut buf = Vec::new();
        t.write(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "# schema=1\nsigma,delta,mu,n,q,m,s,p,x\n1,1/4,1,1,2,1,1,,0.5\n,,,,,,,,1\n"
        );
    }
}
