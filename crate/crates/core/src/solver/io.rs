use std::collections::HashMap;

use ndarray::Array2;

use super::SolveResult;
use crate::econ::{ContractItem, ContractMenu};
use crate::error::{Error, Result};

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    let bytes = w.into_inner().expect("writing to memory cannot fail");
    String::from_utf8(bytes).expect("csv output is utf-8")
}

pub(super) fn result_csv(res: &SolveResult) -> String {
    let mut w = writer();
    let row = |w: &mut csv::Writer<Vec<u8>>, fields: [String; 10]| w.write_record(&fields).expect("in-memory write");
    row(&mut w, ["kind", "m", "n", "b", "f", "r", "v", "u_contribution", "objective", "evaluations"].map(String::from));
    let (rows, cols) = res.menu.dim();
    for m in 0..rows {
        for n in 0..cols {
            let item = res.menu.items()[(m, n)];
            row(
                &mut w,
                [
                    "type".into(),
                    (m + 1).to_string(),
                    (n + 1).to_string(),
                    item.b.to_string(),
                    item.f.to_string(),
                    item.r.to_string(),
                    res.rsu_utilities[(m, n)].to_string(),
                    res.contributions[(m, n)].to_string(),
                    String::new(),
                    String::new(),
                ],
            );
        }
    }
    let mut summary: [String; 10] = Default::default();
    summary[0] = "summary".into();
    summary[8] = res.objective.to_string();
    summary[9] = res.evaluations.to_string();
    row(&mut w, summary);
    finish(w)
}

/// Reads a contract menu from CSV with one-based `m`, `n` columns and `b`,
/// `f`, `r` columns. Other columns are ignored, and so are rows whose `kind`
/// column (if present) is not `type`.
pub fn read_menu_csv(text: &str) -> Result<ContractMenu> {
    let parse_err = |detail: String| Error::Parse { what: "menu csv", detail };
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| parse_err(e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let need = |name: &str| col(name).ok_or_else(|| parse_err(format!("missing column `{name}`")));
    let (cm, cn, cb, cf, cr) = (need("m")?, need("n")?, need("b")?, need("f")?, need("r")?);
    let kind = col("kind");

    let mut items: HashMap<(usize, usize), ContractItem> = HashMap::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| parse_err(e.to_string()))?;
        if kind.is_some_and(|k| rec.get(k) != Some("type")) {
            continue;
        }
        let field = |i: usize| rec.get(i).unwrap_or("");
        let index = |i: usize| -> Result<usize> {
            match field(i).parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v - 1),
                _ => Err(parse_err(format!("record {}: bad index `{}`", line + 1, field(i)))),
            }
        };
        let num = |i: usize| -> Result<f64> {
            field(i)
                .parse::<f64>()
                .map_err(|_| parse_err(format!("record {}: bad number `{}`", line + 1, field(i))))
        };
        let key = (index(cm)?, index(cn)?);
        if items.insert(key, ContractItem::new(num(cb)?, num(cf)?, num(cr)?)).is_some() {
            return Err(parse_err(format!("type ({}, {}) listed twice", key.0 + 1, key.1 + 1)));
        }
    }
    let rows = items.keys().map(|k| k.0 + 1).max().unwrap_or(0);
    let cols = items.keys().map(|k| k.1 + 1).max().unwrap_or(0);
    if items.len() != rows * cols || rows == 0 {
        return Err(parse_err(format!("{} items do not fill a {rows}x{cols} grid", items.len())));
    }
    let grid = Array2::from_shape_fn((rows, cols), |k| items[&k]);
    ContractMenu::new(grid)
}
