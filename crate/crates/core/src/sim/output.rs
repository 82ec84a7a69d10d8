use std::fmt::Write as _;
use std::path::Path;

use super::sweep::SweepResult;
use crate::error::Result;

pub const CSV_HEADER: &str = "tx_power_dbm,canceller,mean_sinr_db,std_sinr_db,runs,saturation_count";

/// Renders the sweep as CSV with `#` comment lines for provenance.
pub fn to_csv(result: &SweepResult) -> String {
    let split_db = 10.0 * (result.n_tx as f64).log10();
    let mut out = String::new();
    let _ = writeln!(out, "# config_sha256={}", result.config_hash);
    let _ = writeln!(out, "# master_seed={}", result.master_seed);
    let _ = writeln!(
        out,
        "# tx_power_dbm is the total over {} antennas, split equally ({split_db:.3} dB below total per antenna)",
        result.n_tx
    );
    let _ = writeln!(out, "{CSV_HEADER}");
    for r in &result.rows {
        let _ = writeln!(
            out,
            "{:.3},{},{:.3},{:.3},{},{}",
            r.tx_power_dbm, r.canceller, r.mean_sinr_db, r.std_sinr_db, r.runs, r.saturation_count
        );
    }
    out
}

pub fn write_csv(result: &SweepResult, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_csv(result))?;
    Ok(())
}
