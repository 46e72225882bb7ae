//! CSV and JSON writers.

use std::io::Write;

use serde_json::{json, Map, Value};

use crate::run::{Cell, Table};

fn text(cell: &Cell) -> String {
    match cell {
        Cell::Num(x) => format!("{x:.16e}"),
        Cell::Int(n) => n.to_string(),
        Cell::Bool(b) => b.to_string(),
        Cell::Text(s) => s.clone(),
        Cell::Empty => String::new(),
    }
}

fn value(cell: &Cell) -> Value {
    match cell {
        Cell::Num(x) if x.is_finite() => json!(x),
        Cell::Num(_) | Cell::Empty => Value::Null,
        Cell::Int(n) => u64::try_from(*n).map(|v| json!(v)).unwrap_or_else(|_| json!(n.to_string())),
        Cell::Bool(b) => json!(b),
        Cell::Text(s) => json!(s),
    }
}

/// Header row plus one record per row, numbers with 17 significant digits.
pub fn write_csv<W: Write>(table: &Table, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(text))?;
    }
    w.flush()?;
    Ok(())
}

/// `{"metadata": …, "columns": […], "rows": [{column: value}, …]}`.
pub fn to_json(table: &Table, metadata: &Value) -> Value {
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            let mut m = Map::new();
            for (c, v) in table.columns.iter().zip(row) {
                m.insert((*c).to_string(), value(v));
            }
            Value::Object(m)
        })
        .collect();
    json!({"metadata": metadata, "columns": table.columns, "rows": rows})
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_uses_seventeen_digits_and_quotes_text() {
        let t = Table {
            columns: vec!["tau", "error"],
            rows: vec![vec![Cell::Num(0.1), Cell::Text("a, b".into())], vec![Cell::Num(2.0), Cell::Empty]],
        };
        let mut buf = Vec::new();
        write_csv(&t, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "tau,error\n1.0000000000000001e-1,\"a, b\"\n2.0000000000000000e0,\n"
        );
    }

    #[test]
    fn json_rows_are_keyed_by_column() {
        let t = Table {
            columns: vec!["tau", "N"],
            rows: vec![vec![Cell::Num(0.5), Cell::Int(3)]],
        };
        let v = to_json(&t, &json!({}));
        assert_eq!(v["rows"][0]["N"], json!(3));
        assert_eq!(v["rows"][0]["tau"], json!(0.5));
    }
}
