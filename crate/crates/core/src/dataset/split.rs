use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CleanReport, MetaRecord};
use crate::error::{Error, Result};
use crate::geodesy::{latlon_to_utm, latlon_to_utm_in, Hemisphere};
use crate::geomath::GeoPoint;

pub const DEFAULT_SEED: u64 = 2024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        SplitFractions {
            train: 0.8,
            val: 0.1,
            test: 0.1,
        }
    }
}

impl SplitFractions {
    pub fn new(train: f64, val: f64, test: f64) -> Result<Self> {
        let f = SplitFractions { train, val, test };
        f.validate()?;
        Ok(f)
    }

    fn validate(&self) -> Result<()> {
        let parts = [self.train, self.val, self.test];
        if parts.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::domain(format!(
                "split fractions must be positive, got {parts:?}"
            )));
        }
        if (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::domain(format!(
                "split fractions must sum to 1, got {parts:?}"
            )));
        }
        Ok(())
    }

    /// Split sizes for `n` records: rounded train and val counts, test takes
    /// the rest, and every split gets at least one record.
    pub fn sizes(&self, n: usize) -> Result<(usize, usize, usize)> {
        if n < 3 {
            return Err(Error::Dataset(format!(
                "{n} records cannot fill three splits"
            )));
        }
        let val = ((self.val * n as f64).round() as usize).clamp(1, n - 2);
        let train = ((self.train * n as f64).round() as usize).clamp(1, n - val - 1);
        Ok((train, val, n - train - val))
    }
}

/// Mean and population standard deviation of the train labels, per axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelStats {
    pub zone: u8,
    pub hemisphere: Hemisphere,
    pub mean_easting: f64,
    pub std_easting: f64,
    pub mean_northing: f64,
    pub std_northing: f64,
}

impl LabelStats {
    pub fn normalize(&self, easting: f64, northing: f64) -> (f64, f64) {
        (
            (easting - self.mean_easting) / self.std_easting,
            (northing - self.mean_northing) / self.std_northing,
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub img_name: String,
    pub split: Split,
    pub easting: f64,
    pub northing: f64,
    pub label: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub seed: u64,
    pub fractions: SplitFractions,
    pub entropy_threshold: Option<f64>,
    /// Images left out by cleanup. Their files stay on disk.
    pub discarded: Vec<String>,
    pub label_stats: LabelStats,
    /// In input record order.
    pub assignments: Vec<SplitAssignment>,
}

impl SplitManifest {
    pub fn count(&self, split: Split) -> usize {
        self.assignments.iter().filter(|a| a.split == split).count()
    }

    pub fn with_cleaning(mut self, report: &CleanReport) -> Self {
        self.entropy_threshold = Some(report.threshold);
        self.discarded = report
            .discarded
            .iter()
            .map(|r| r.img_name.clone())
            .collect();
        self
    }
}

/// Seeded shuffle into train/val/test with UTM labels scaled by train statistics.
///
/// All labels share one UTM zone and hemisphere: `zone` if given, otherwise
/// those of the first record.
pub fn make_split(
    records: &[MetaRecord],
    fractions: SplitFractions,
    seed: u64,
    zone: Option<u8>,
) -> Result<SplitManifest> {
    fractions.validate()?;
    let (n_train, n_val, _) = fractions.sizes(records.len())?;

    let first = latlon_to_utm(GeoPoint::new(records[0].lat, records[0].lon)?, zone)?;
    let utm = records
        .iter()
        .map(|r| {
            let u = latlon_to_utm_in(
                GeoPoint::new(r.lat, r.lon)?,
                Some(first.zone),
                first.hemisphere,
            )?;
            Ok((u.easting, u.northing))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut order: Vec<usize> = (0..records.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut split = vec![Split::Test; records.len()];
    for (k, &i) in order.iter().enumerate() {
        split[i] = if k < n_train {
            Split::Train
        } else if k < n_train + n_val {
            Split::Val
        } else {
            Split::Test
        };
    }

    let train: Vec<(f64, f64)> = (0..records.len())
        .filter(|&i| split[i] == Split::Train)
        .map(|i| utm[i])
        .collect();
    let (mean_e, std_e) = mean_std(train.iter().map(|p| p.0));
    let (mean_n, std_n) = mean_std(train.iter().map(|p| p.1));
    let label_stats = LabelStats {
        zone: first.zone,
        hemisphere: first.hemisphere,
        mean_easting: mean_e,
        std_easting: std_e,
        mean_northing: mean_n,
        std_northing: std_n,
    };

    let assignments = records
        .iter()
        .zip(&utm)
        .zip(&split)
        .map(|((r, &(e, n)), &s)| SplitAssignment {
            img_name: r.img_name.clone(),
            split: s,
            easting: e,
            northing: n,
            label: label_stats.normalize(e, n),
        })
        .collect();

    Ok(SplitManifest {
        seed,
        fractions,
        entropy_threshold: None,
        discarded: Vec::new(),
        label_stats,
        assignments,
    })
}

/// Mean and population standard deviation; a zero spread scales by 1.
fn mean_std(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    let var = xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    (mean, if std > 0.0 { std } else { 1.0 })
}
