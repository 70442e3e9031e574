//! CSV export of node data: coordinates first, then named columns.

use std::io::Write;

use crate::chart::Chart;
use crate::error::{Error, Result};

/// Write one row per node with the chart coordinates followed by `columns`.
pub fn write_csv<W: Write>(out: W, chart: &Chart, columns: &[(&str, &[f64])]) -> Result<()> {
    for (name, col) in columns {
        if col.len() != chart.len() {
            return Err(Error::InvalidField(format!(
                "column {name} has {} rows, chart has {}",
                col.len(),
                chart.len()
            )));
        }
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (0..chart.dim()).map(|a| format!("x{a}")).collect();
    header.extend(columns.iter().map(|(n, _)| n.to_string()));
    w.write_record(&header)?;
    for node in 0..chart.len() {
        let x = chart.coords(node);
        let mut row: Vec<String> = x[..chart.dim()].iter().map(|v| format!("{v:e}")).collect();
        row.extend(columns.iter().map(|(_, c)| format!("{:e}", c[node])));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Columns named `name[i]` for interleaved per-node components.
pub fn split_components(name: &str, values: &[f64], per_node: usize) -> Vec<(String, Vec<f64>)> {
    (0..per_node)
        .map(|k| {
            (
                format!("{name}[{k}]"),
                values.iter().skip(k).step_by(per_node).copied().collect(),
            )
        })
        .collect()
}
