use std::io::Write;

use serde::Serialize;

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

pub fn write_rows<W: Write, R: Serialize>(out: W, rows: &[R], format: Format) -> Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

pub fn rows_to_string<R: Serialize>(rows: &[R], format: Format) -> Result<String> {
    let mut buf = Vec::new();
    write_rows(&mut buf, rows, format)?;
    Ok(String::from_utf8(buf).expect("csv and json are utf-8"))
}
