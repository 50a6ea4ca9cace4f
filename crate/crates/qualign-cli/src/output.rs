//! Deterministic result writers.
//!
//! Every file produced here is a pure function of the resolved config and
//! the seed list: fixed field order, fixed row order, shortest-round-trip
//! float formatting via `serde_json`. Wall-clock data never passes through
//! this module except into the explicitly named timing sidecars.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use qualign::{Instance, MinimaReport, ShotTable};

use crate::scenario::StateClass;

/// One histogram row: a sampled basis state with its count and oracle
/// classification.
#[derive(Debug, Clone, Serialize)]
pub struct HistogramRow {
    pub bitstring: String,
    pub count: u64,
    pub frequency: f64,
    pub energy: f64,
    pub class: StateClass,
}

/// A full shot histogram plus the context needed to read it.
#[derive(Debug, Clone, Serialize)]
pub struct Histogram {
    pub num_qubits: usize,
    pub shots: u64,
    pub rows: Vec<HistogramRow>,
}

/// Renders a basis index as the n-bit string in circuit order (qubit 0 is
/// the leftmost character).
pub fn bitstring(index: usize, n: usize) -> String {
    format!("{index:0n$b}")
}

/// Builds the full, deterministic histogram for a shot table: rows sorted
/// by count descending, ties broken by basis index ascending, classified
/// against the oracle report when one is available.
pub fn histogram(
    table: &ShotTable,
    instance: &Instance,
    oracle: Option<&MinimaReport>,
) -> Histogram {
    let n = table.num_qubits();
    let shots = table.shots();
    let mut rows: Vec<(usize, u64)> = table.counts().iter().map(|(&s, &c)| (s, c)).collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let rows = rows
        .into_iter()
        .map(|(state, count)| HistogramRow {
            bitstring: bitstring(state, n),
            count,
            frequency: count as f64 / shots as f64,
            energy: instance.energy_of_index(state),
            class: StateClass::classify(state, instance, oracle),
        })
        .collect();
    Histogram {
        num_qubits: n,
        shots,
        rows,
    }
}

impl Histogram {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "bitstring,count,frequency,energy,class")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.bitstring,
                r.count,
                fmt_f64(r.frequency),
                fmt_f64(r.energy),
                r.class
            )?;
        }
        Ok(())
    }

    /// The top-k rows for console display; the full table still goes to disk.
    pub fn top(&self, k: usize) -> &[HistogramRow] {
        &self.rows[..self.rows.len().min(k)]
    }
}

/// Formats an f64 the same way `serde_json` does (shortest round-trip),
/// so CSV and JSON files agree byte-for-byte on every number.
pub fn fmt_f64(x: f64) -> String {
    serde_json::to_string(&x).expect("finite float serializes")
}

/// Serializes `value` as pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let file = File::create(path)?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()
}

/// Creates a file and hands a buffered writer to `f`.
pub fn write_with<F>(path: &Path, f: F) -> std::io::Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let file = File::create(path)?;
    let mut out = BufWriter::new(file);
    f(&mut out)?;
    out.flush()
}
