//! Plot-ready serialization of sweep tables.
//!
//! CSV: header `J,D,gamma,r,basis,C,dC_dJ,d2C_dJ2`, one row per grid
//! point in the table's canonical order, decimal point, no locale.
//! Numbers carry 17 significant digits, enough to reproduce the exact
//! f64 on parse. Failed rows keep their value cells empty; when any row
//! failed the header gains a trailing `error` column for the message.
//! JSON: an array of row objects with the same keys, `error` present
//! only on failed rows.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::str::FromStr;
use xydm_core::{Basis, SweepRow, SweepTable};

pub const CSV_HEADER: &str = "J,D,gamma,r,basis,C,dC_dJ,d2C_dJ2";

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt17).unwrap_or_default()
}

fn csv_quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn table_to_csv(table: &SweepTable) -> String {
    let with_error = table.rows.iter().any(|row| row.error.is_some());
    let mut out = String::with_capacity(64 * (table.rows.len() + 1));
    out.push_str(CSV_HEADER);
    if with_error {
        out.push_str(",error");
    }
    out.push('\n');
    for row in &table.rows {
        let _ = write!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt17(row.j),
            fmt17(row.d),
            fmt17(row.gamma),
            row.r,
            row.basis,
            fmt_opt(row.c),
            fmt_opt(row.dc_dj),
            fmt_opt(row.d2c_dj2),
        );
        if with_error {
            out.push(',');
            out.push_str(&csv_quote(row.error.as_deref().unwrap_or("")));
        }
        out.push('\n');
    }
    out
}

/// Split one CSV record, honoring double-quoted fields with `""` escapes.
fn split_record(line: &str) -> Result<Vec<String>, String> {
    let mut fields = Vec::new();
    let mut current = String::new();
    let mut quoted = false;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        if quoted {
            if c == '"' {
                if chars.peek() == Some(&'"') {
                    current.push('"');
                    chars.next();
                } else {
                    quoted = false;
                }
            } else {
                current.push(c);
            }
        } else {
            match c {
                ',' => fields.push(std::mem::take(&mut current)),
                '"' if current.is_empty() => quoted = true,
                _ => current.push(c),
            }
        }
    }
    if quoted {
        return Err(format!("unterminated quote in record {line:?}"));
    }
    fields.push(current);
    Ok(fields)
}

pub fn table_from_csv(text: &str) -> Result<SweepTable, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty file")?;
    let with_error = if header == CSV_HEADER {
        false
    } else if header == format!("{CSV_HEADER},error") {
        true
    } else {
        return Err(format!("unexpected header {header:?}"));
    };

    let number = |s: &str, what: &str, idx: usize| -> Result<f64, String> {
        s.parse::<f64>()
            .map_err(|e| format!("row {idx}: bad {what} {s:?}: {e}"))
    };
    let optional = |s: &str, what: &str, idx: usize| -> Result<Option<f64>, String> {
        if s.is_empty() {
            Ok(None)
        } else {
            number(s, what, idx).map(Some)
        }
    };

    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields = split_record(line)?;
        let expected = 8 + usize::from(with_error);
        if fields.len() != expected {
            return Err(format!(
                "row {idx}: {} fields, expected {expected}",
                fields.len()
            ));
        }
        rows.push(SweepRow {
            j: number(&fields[0], "J", idx)?,
            d: number(&fields[1], "D", idx)?,
            gamma: number(&fields[2], "gamma", idx)?,
            r: fields[3]
                .parse()
                .map_err(|e| format!("row {idx}: bad r {:?}: {e}", fields[3]))?,
            basis: Basis::from_str(&fields[4]).map_err(|e| format!("row {idx}: {e}"))?,
            c: optional(&fields[5], "C", idx)?,
            dc_dj: optional(&fields[6], "dC_dJ", idx)?,
            d2c_dj2: optional(&fields[7], "d2C_dJ2", idx)?,
            error: if with_error && !fields[8].is_empty() {
                Some(fields[8].clone())
            } else {
                None
            },
        });
    }
    table_from_rows(rows)
}

fn table_from_rows(rows: Vec<SweepRow>) -> Result<SweepTable, String> {
    let gamma = rows.first().map(|row| row.gamma).ok_or("table has no rows")?;
    if rows.iter().any(|row| row.gamma != gamma) {
        return Err("rows disagree on gamma".into());
    }
    Ok(SweepTable { gamma, rows })
}

#[derive(Serialize, Deserialize)]
struct JsonRow {
    #[serde(rename = "J")]
    j: f64,
    #[serde(rename = "D")]
    d: f64,
    gamma: f64,
    r: usize,
    basis: String,
    #[serde(rename = "C")]
    c: Option<f64>,
    #[serde(rename = "dC_dJ")]
    dc_dj: Option<f64>,
    #[serde(rename = "d2C_dJ2")]
    d2c_dj2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    error: Option<String>,
}

pub fn table_to_json(table: &SweepTable) -> String {
    let rows: Vec<JsonRow> = table
        .rows
        .iter()
        .map(|row| JsonRow {
            j: row.j,
            d: row.d,
            gamma: row.gamma,
            r: row.r,
            basis: row.basis.to_string(),
            c: row.c,
            dc_dj: row.dc_dj,
            d2c_dj2: row.d2c_dj2,
            error: row.error.clone(),
        })
        .collect();
    let mut out = serde_json::to_string_pretty(&rows).expect("rows are plain data");
    out.push('\n');
    out
}

pub fn table_from_json(text: &str) -> Result<SweepTable, String> {
    let parsed: Vec<JsonRow> = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let rows = parsed
        .into_iter()
        .map(|row| {
            Ok(SweepRow {
                j: row.j,
                d: row.d,
                gamma: row.gamma,
                r: row.r,
                basis: Basis::from_str(&row.basis)?,
                c: row.c,
                dc_dj: row.dc_dj,
                d2c_dj2: row.d2c_dj2,
                error: row.error,
            })
        })
        .collect::<Result<Vec<SweepRow>, String>>()?;
    table_from_rows(rows)
}
