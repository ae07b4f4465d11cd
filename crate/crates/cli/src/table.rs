//! Result tables and their CSV / JSON renderings.

use std::io::Write;

use qdiv::io::format_num;
use qdiv::ExtReal;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(usize),
    Num(f64),
    Flag(bool),
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<ExtReal> for Cell {
    fn from(x: ExtReal) -> Self {
        Cell::Num(x.to_f64())
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Flag(b)
    }
}

impl Cell {
    pub fn render(self) -> String {
        match self {
            Cell::Int(n) => n.to_string(),
            Cell::Num(x) => format_num(x),
            Cell::Flag(b) => b.to_string(),
        }
    }

    /// JSON carries the same 12-digit value as the CSV; non-finite values
    /// become the strings `"inf"`, `"-inf"`, `"nan"`.
    fn to_json(self) -> Value {
        match self {
            Cell::Int(n) => Value::from(n),
            Cell::Flag(b) => Value::from(b),
            Cell::Num(x) => {
                let text = format_num(x);
                match text.parse::<f64>().ok().filter(|v| v.is_finite()).and_then(serde_json::Number::from_f64) {
                    Some(num) => Value::Number(num),
                    None => Value::String(text),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_csv(&self, out: impl Write) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.render()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json(&self, mut out: impl Write) -> std::io::Result<()> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> =
                    self.header.iter().zip(row).map(|(k, c)| (k.to_string(), c.to_json())).collect();
                Value::Object(obj)
            })
            .collect();
        serde_json::to_writer_pretty(&mut out, &rows)?;
        writeln!(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_both_formats() {
        let mut t = Table::new(vec!["n", "value", "limit", "ok"]);
        t.push(vec![4.into(), (1.0f64 / 3.0).into(), ExtReal::PosInf.into(), true.into()]);
        let mut csv = Vec::new();
        t.write_csv(&mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap(), "n,value,limit,ok\n4,0.333333333333,inf,true\n");

        let mut json = Vec::new();
        t.write_json(&mut json).unwrap();
        let v: Value = serde_json::from_slice(&json).unwrap();
        assert_eq!(v[0]["n"], 4);
        assert_eq!(v[0]["value"].as_f64().unwrap(), 0.333333333333);
        assert_eq!(v[0]["limit"], "inf");
    }
}
