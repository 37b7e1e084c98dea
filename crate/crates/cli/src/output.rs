use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{Context, Result};
use losmimo::experiments::Table;

pub fn write_table<W: Write>(table: &Table, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes to `path`, or stdout when absent.
pub fn emit_table(table: &Table, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => {
            let file = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            write_table(table, file).with_context(|| format!("writing {}", p.display()))
        }
        None => write_table(table, io::stdout().lock()),
    }
}

pub fn emit_text(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

/// Gnuplot script plotting every column against the first one.
pub fn plot_script(table: &Table, data: &Path, title: &str) -> String {
    let x_label = table.header.first().map(String::as_str).unwrap_or("x");
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set key autotitle columnhead\n");
    s.push_str("set grid\n");
    s.push_str(&format!("set title '{title}'\n"));
    s.push_str(&format!("set xlabel '{}'\n", x_label.replace('_', " ")));
    s.push_str(&format!("set terminal pngcairo size 900,600\nset output '{}.png'\n", data.with_extension("").display()));
    let columns = table.header.len().max(2);
    s.push_str(&format!("plot for [i=2:{columns}] '{}' using 1:i with linespoints\n", data.display()));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        Table { header: vec!["snr_db".into(), "bound_bits".into()], rows: vec![vec!["-10".into(), "0.5".into()]] }
    }

    #[test]
    fn csv_has_header_and_rows() {
        let mut buf = Vec::new();
        write_table(&sample(), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "snr_db,bound_bits\n-10,0.5\n");
    }

    #[test]
    fn plot_script_references_data_file() {
        let s = plot_script(&sample(), Path::new("out/sweep.csv"), "bound");
        assert!(s.contains("'out/sweep.csv'"));
        assert!(s.contains("set output 'out/sweep.png'"));
        assert!(s.contains("for [i=2:2]"));
    }
}
