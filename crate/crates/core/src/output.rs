//! CSV/JSON output helpers shared by the CLI and the experiment harness.

use std::io::Write;

use serde::Serialize;
use sha2::{Digest, Sha256};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// First 16 hex digits of the SHA-256 of the config's JSON encoding.
pub fn config_hash<T: Serialize + ?Sized>(config: &T) -> String {
    let bytes = serde_json::to_vec(config).unwrap_or_default();
    let digest = Sha256::digest(&bytes);
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// `# swarmlink <version> seed=<seed> config=<hash>`
pub fn provenance_line<T: Serialize + ?Sized>(seed: u64, config: &T) -> String {
    format!("# swarmlink {VERSION} seed={seed} config={}", config_hash(config))
}

/// Writes the provenance comment, a header row and one record per row.
pub fn write_csv<W: Write, R: Serialize>(
    out: W,
    provenance: &str,
    header: &[&str],
    rows: &[R],
) -> Result<(), csv::Error> {
    let mut out = out;
    writeln!(out, "{provenance}")?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Renders a CSV table to a string (see [`write_csv`]).
pub fn csv_string<R: Serialize>(provenance: &str, header: &[&str], rows: &[R]) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, provenance, header, rows).expect("in-memory csv write");
    String::from_utf8(buf).expect("csv output is utf-8")
}
