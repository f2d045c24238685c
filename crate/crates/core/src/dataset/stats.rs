use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const HIST_BINS: usize = 64;
/// Upper edge of the histogram range, the entropy ceiling for 8-bit images.
pub const HIST_MAX: f64 = 8.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyStats {
    pub counts: Vec<u64>,
    pub n: usize,
    pub threshold: f64,
    pub below_threshold: f64,
}

impl EntropyStats {
    pub fn bin_edges(i: usize) -> (f64, f64) {
        let w = HIST_MAX / HIST_BINS as f64;
        (i as f64 * w, (i + 1) as f64 * w)
    }

    /// `bin_start,bin_end,count` rows, one per bin.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| super::csv_io(path, e))?;
        w.write_record(["bin_start", "bin_end", "count"])?;
        for (i, c) in self.counts.iter().enumerate() {
            let (lo, hi) = Self::bin_edges(i);
            w.write_record([lo.to_string(), hi.to_string(), c.to_string()])?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// 64-bin histogram of entropies over [0, 8] and the share below `threshold`.
/// The top bin is closed so that 8.0 lands in it.
pub fn entropy_stats(entropies: &[f64], threshold: f64) -> Result<EntropyStats> {
    if entropies.is_empty() {
        return Err(Error::Dataset("no records to summarize".into()));
    }
    let mut counts = vec![0u64; HIST_BINS];
    for &h in entropies {
        let i = (h / HIST_MAX * HIST_BINS as f64)
            .floor()
            .clamp(0.0, (HIST_BINS - 1) as f64);
        counts[i as usize] += 1;
    }
    let below = entropies.iter().filter(|&&h| h < threshold).count();
    Ok(EntropyStats {
        counts,
        n: entropies.len(),
        threshold,
        below_threshold: below as f64 / entropies.len() as f64,
    })
}
