//! Report rendering: aligned tables for humans (7 significant digits) and
//! CSV/JSON at full precision for machines. Dot decimal separator always.

use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Clone)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
    Empty,
}

pub struct Report {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Emit a single JSON object instead of a one-element array.
    pub scalar_object: bool,
}

/// Roughly printf's `%.7g`: 7 significant digits, plain notation for
/// moderate magnitudes, scientific otherwise, trailing zeros trimmed.
pub fn sig7(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    let text = if !(-4..7).contains(&exp) {
        format!("{:.6e}", x)
    } else {
        format!("{:.*}", (6 - exp).max(0) as usize, x)
    };
    trim_zeros(text)
}

fn trim_zeros(text: String) -> String {
    if let Some(epos) = text.find('e') {
        let (mantissa, exponent) = text.split_at(epos);
        let mantissa = if mantissa.contains('.') {
            mantissa.trim_end_matches('0').trim_end_matches('.')
        } else {
            mantissa
        };
        return format!("{mantissa}{exponent}");
    }
    if text.contains('.') {
        text.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        text
    }
}

impl Cell {
    fn table(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => sig7(*v),
            Cell::Text(v) => v.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => format!("{v}"),
            Cell::Text(v) => v.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Num(v) => json!(v),
            Cell::Text(v) => json!(v),
            Cell::Empty => Value::Null,
        }
    }
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Table => self.render_table(),
            Format::Csv => self.render_csv(),
            Format::Json => self.render_json(),
        }
    }

    fn render_table(&self) -> String {
        let mut widths: Vec<usize> = self.columns.iter().map(|c| c.len()).collect();
        let rendered: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|row| row.iter().map(Cell::table).collect())
            .collect();
        for row in &rendered {
            for (i, cell) in row.iter().enumerate() {
                widths[i] = widths[i].max(cell.len());
            }
        }
        let mut out = String::new();
        for (i, col) in self.columns.iter().enumerate() {
            if i > 0 {
                out.push_str("  ");
            }
            out.push_str(&format!("{:>width$}", col, width = widths[i]));
        }
        out.push('\n');
        for row in &rendered {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    out.push_str("  ");
                }
                out.push_str(&format!("{:>width$}", cell, width = widths[i]));
            }
            out.push('\n');
        }
        out
    }

    fn render_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    fn render_json(&self) -> String {
        let objects: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut map = Map::new();
                for (col, cell) in self.columns.iter().zip(row) {
                    map.insert((*col).to_string(), cell.json());
                }
                Value::Object(map)
            })
            .collect();
        let value = if self.scalar_object && objects.len() == 1 {
            objects.into_iter().next().unwrap()
        } else {
            Value::Array(objects)
        };
        let mut text = serde_json::to_string_pretty(&value).expect("report serialization");
        text.push('\n');
        text
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig7_formats() {
        assert_eq!(sig7(10.450583572185565), "10.45058");
        assert_eq!(sig7(0.5075), "0.5075");
        assert_eq!(sig7(0.0), "0");
        assert_eq!(sig7(1.02e-6), "1.02e-6");
        assert_eq!(sig7(12345678.0), "1.234568e7");
        assert_eq!(sig7(100.0), "100");
    }

    #[test]
    fn csv_is_full_precision() {
        let cell = Cell::Num(10.450583572185565);
        assert_eq!(cell.csv(), "10.450583572185565");
    }
}
