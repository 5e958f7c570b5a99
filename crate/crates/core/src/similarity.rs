//! Semantic-similarity lookup tables and image-quality metrics.
//!
//! The encoder's similarity behaviour is represented by a table over an SNR
//! grid (rows, dB) and a compression-rate grid (columns, fraction of the raw
//! data *removed*; O = 1 transmits nothing). Tables are either generated from
//! a logistic surrogate model or loaded from CSV measurements; loaded tables
//! are not required to be monotone.

use std::fmt::Write as _;

use thiserror::Error;

/// Parameters of the surrogate similarity model
/// `xi = floor + (1 - floor) * (1 - O^p) * sigmoid((snr_db - x0) / w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateParams {
    /// Exponent p on the compression rate.
    pub compression_power: f64,
    /// Logistic midpoint x0 in dB.
    pub snr_midpoint_db: f64,
    /// Logistic width w in dB.
    pub snr_scale_db: f64,
    /// Similarity floor approached at very low SNR or O -> 1.
    pub floor: f64,
}

impl Default for SurrogateParams {
    fn default() -> Self {
        SurrogateParams {
            compression_power: 2.0,
            snr_midpoint_db: 5.0,
            snr_scale_db: 3.0,
            floor: 0.05,
        }
    }
}

impl SurrogateParams {
    pub fn validate(&self) -> Result<(), SimilarityError> {
        if !(self.compression_power > 0.0) {
            return Err(SimilarityError::InvalidParam {
                param: "compression_power",
                reason: format!("must be positive, got {}", self.compression_power),
            });
        }
        if !(self.snr_scale_db > 0.0) {
            return Err(SimilarityError::InvalidParam {
                param: "snr_scale_db",
                reason: format!("must be positive, got {}", self.snr_scale_db),
            });
        }
        if !(0.0..1.0).contains(&self.floor) {
            return Err(SimilarityError::InvalidParam {
                param: "floor",
                reason: format!("must be in [0, 1), got {}", self.floor),
            });
        }
        if !self.snr_midpoint_db.is_finite() {
            return Err(SimilarityError::InvalidParam {
                param: "snr_midpoint_db",
                reason: "must be finite".into(),
            });
        }
        Ok(())
    }
}

/// One table entry available to a user: the similarity it would obtain and
/// the compression rate that produces it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateEntry {
    pub xi: f64,
    pub compression: f64,
}

#[derive(Debug, Error)]
pub enum SimilarityError {
    #[error("invalid surrogate parameter `{param}`: {reason}")]
    InvalidParam { param: &'static str, reason: String },
    #[error("compression must lie in (0, 1], got {0}")]
    CompressionOutOfRange(f64),
    #[error("{which} grid must be non-empty and strictly ascending")]
    GridNotAscending { which: &'static str },
    #[error("compression grid values must lie in (0, 1]")]
    CompressionGridOutOfRange,
    #[error("table shape mismatch: expected {rows} x {cols}, row {row} has {got} values")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        row: usize,
        got: usize,
    },
    #[error("similarity value {value} at row {row}, col {col} outside [0, 1]")]
    SimilarityOutOfRange { value: f64, row: usize, col: usize },
    #[error("snr {snr_db} dB below the table minimum {min_db} dB")]
    BelowTableRange { snr_db: f64, min_db: f64 },
    #[error("table CSV line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("image shapes differ or are empty")]
    ImageShapeMismatch,
    #[error("pixel value {0} outside [0, {1}]")]
    PixelOutOfRange(f64, f64),
}

/// Similarity as a function of compression rate and SNR. Strictly decreasing
/// in `compression`, strictly increasing in `snr_db`.
pub fn surrogate_xi(
    compression: f64,
    snr_db: f64,
    params: &SurrogateParams,
) -> Result<f64, SimilarityError> {
    params.validate()?;
    if !(compression > 0.0 && compression <= 1.0) {
        return Err(SimilarityError::CompressionOutOfRange(compression));
    }
    let z = (snr_db - params.snr_midpoint_db) / params.snr_scale_db;
    let sigmoid = if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    };
    let keep = 1.0 - compression.powf(params.compression_power);
    Ok(params.floor + (1.0 - params.floor) * keep * sigmoid)
}

/// Lookup table of similarity over (SNR row, compression column).
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityTable {
    snr_grid_db: Vec<f64>,
    compression_grid: Vec<f64>,
    /// xi[row][col] for snr_grid_db[row], compression_grid[col].
    xi: Vec<Vec<f64>>,
}

impl SimilarityTable {
    pub fn new(
        snr_grid_db: Vec<f64>,
        compression_grid: Vec<f64>,
        xi: Vec<Vec<f64>>,
    ) -> Result<Self, SimilarityError> {
        check_ascending("snr", &snr_grid_db)?;
        check_ascending("compression", &compression_grid)?;
        if compression_grid[0] <= 0.0 || *compression_grid.last().unwrap() > 1.0 {
            return Err(SimilarityError::CompressionGridOutOfRange);
        }
        if xi.len() != snr_grid_db.len() {
            return Err(SimilarityError::ShapeMismatch {
                rows: snr_grid_db.len(),
                cols: compression_grid.len(),
                row: xi.len(),
                got: 0,
            });
        }
        for (r, row) in xi.iter().enumerate() {
            if row.len() != compression_grid.len() {
                return Err(SimilarityError::ShapeMismatch {
                    rows: snr_grid_db.len(),
                    cols: compression_grid.len(),
                    row: r,
                    got: row.len(),
                });
            }
            for (c, &v) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                    return Err(SimilarityError::SimilarityOutOfRange {
                        value: v,
                        row: r,
                        col: c,
                    });
                }
            }
        }
        Ok(SimilarityTable {
            snr_grid_db,
            compression_grid,
            xi,
        })
    }

    pub fn snr_grid_db(&self) -> &[f64] {
        &self.snr_grid_db
    }

    pub fn compression_grid(&self) -> &[f64] {
        &self.compression_grid
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.xi[row][col]
    }

    /// Row index for an SNR: the highest grid row not exceeding `snr_db`
    /// (floor semantics). SNR below the first row is an error.
    pub fn row_for_snr(&self, snr_db: f64) -> Result<usize, SimilarityError> {
        if snr_db < self.snr_grid_db[0] {
            return Err(SimilarityError::BelowTableRange {
                snr_db,
                min_db: self.snr_grid_db[0],
            });
        }
        let idx = self
            .snr_grid_db
            .partition_point(|&g| g <= snr_db)
            .saturating_sub(1);
        Ok(idx)
    }

    /// Column index of the compression grid point nearest to `compression`
    /// (ties resolve to the larger rate).
    fn col_for_compression(&self, compression: f64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (j, &o) in self.compression_grid.iter().enumerate() {
            let d = (o - compression).abs();
            if d < best_d || (d == best_d && o > self.compression_grid[best]) {
                best = j;
                best_d = d;
            }
        }
        best
    }

    /// Similarity at the floored SNR row and nearest compression column.
    pub fn lookup_xi(&self, snr_db: f64, compression: f64) -> Result<f64, SimilarityError> {
        let row = self.row_for_snr(snr_db)?;
        let col = self.col_for_compression(compression);
        Ok(self.xi[row][col])
    }

    /// All entries of the floored SNR row whose similarity lies in
    /// `[xi_min, xi_max]`, best first: descending similarity, ties broken
    /// toward the larger compression rate (less data).
    pub fn candidate_entries(
        &self,
        snr_db: f64,
        xi_min: f64,
        xi_max: f64,
    ) -> Result<Vec<CandidateEntry>, SimilarityError> {
        let row = self.row_for_snr(snr_db)?;
        let mut out: Vec<CandidateEntry> = self.xi[row]
            .iter()
            .zip(&self.compression_grid)
            .filter(|(&xi, _)| xi >= xi_min && xi <= xi_max)
            .map(|(&xi, &compression)| CandidateEntry { xi, compression })
            .collect();
        out.sort_by(|a, b| {
            b.xi.partial_cmp(&a.xi)
                .unwrap()
                .then(b.compression.partial_cmp(&a.compression).unwrap())
        });
        Ok(out)
    }

    /// The floored SNR row's maximum-similarity entry (ties toward larger
    /// compression). Used as the last-resort fallback when a user's band has
    /// no entry at all.
    pub fn row_max_entry(&self, snr_db: f64) -> Result<CandidateEntry, SimilarityError> {
        let row = self.row_for_snr(snr_db)?;
        let mut best = CandidateEntry {
            xi: f64::NEG_INFINITY,
            compression: 0.0,
        };
        for (&xi, &compression) in self.xi[row].iter().zip(&self.compression_grid) {
            if xi > best.xi || (xi == best.xi && compression > best.compression) {
                best = CandidateEntry { xi, compression };
            }
        }
        Ok(best)
    }

    /// Serialize to CSV: corner cell `snr_db\O`, header row is the
    /// compression grid, first column is the SNR grid, similarity values with
    /// six decimals.
    pub fn save_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("snr_db\\O");
        for o in &self.compression_grid {
            let _ = write!(out, ",{o:.6}");
        }
        out.push('\n');
        for (row, snr) in self.snr_grid_db.iter().enumerate() {
            let _ = write!(out, "{snr:.6}");
            for v in &self.xi[row] {
                let _ = write!(out, ",{v:.6}");
            }
            out.push('\n');
        }
        out
    }

    /// Parse the CSV format produced by [`SimilarityTable::save_csv`].
    /// Validates grid ordering, rectangular shape and similarity range.
    pub fn load_csv(text: &str) -> Result<Self, SimilarityError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(SimilarityError::Malformed {
            line: 1,
            reason: "empty table".into(),
        })?;
        let mut cells = header.split(',');
        let corner = cells.next().unwrap_or("");
        if corner.trim() != "snr_db\\O" {
            return Err(SimilarityError::Malformed {
                line: 1,
                reason: format!("expected corner cell `snr_db\\O`, got `{corner}`"),
            });
        }
        let compression_grid = cells
            .map(|c| parse_cell(c, 1))
            .collect::<Result<Vec<_>, _>>()?;
        let mut snr_grid_db = Vec::new();
        let mut xi = Vec::new();
        for (i, line) in lines {
            let lineno = i + 1;
            let mut cells = line.split(',');
            let snr = parse_cell(cells.next().unwrap_or(""), lineno)?;
            let row = cells
                .map(|c| parse_cell(c, lineno))
                .collect::<Result<Vec<_>, _>>()?;
            if row.len() != compression_grid.len() {
                return Err(SimilarityError::Malformed {
                    line: lineno,
                    reason: format!(
                        "expected {} values, got {}",
                        compression_grid.len(),
                        row.len()
                    ),
                });
            }
            snr_grid_db.push(snr);
            xi.push(row);
        }
        SimilarityTable::new(snr_grid_db, compression_grid, xi)
    }
}

fn parse_cell(cell: &str, line: usize) -> Result<f64, SimilarityError> {
    cell.trim()
        .parse::<f64>()
        .map_err(|_| SimilarityError::Malformed {
            line,
            reason: format!("non-numeric cell `{cell}`"),
        })
}

fn check_ascending(which: &'static str, grid: &[f64]) -> Result<(), SimilarityError> {
    if grid.is_empty() || grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(SimilarityError::GridNotAscending { which });
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(SimilarityError::GridNotAscending { which });
    }
    Ok(())
}

/// Evaluate the surrogate on the given grids.
pub fn generate_table(
    snr_grid_db: &[f64],
    compression_grid: &[f64],
    params: &SurrogateParams,
) -> Result<SimilarityTable, SimilarityError> {
    check_ascending("snr", snr_grid_db)?;
    check_ascending("compression", compression_grid)?;
    let mut xi = Vec::with_capacity(snr_grid_db.len());
    for &snr in snr_grid_db {
        let row = compression_grid
            .iter()
            .map(|&o| surrogate_xi(o, snr, params))
            .collect::<Result<Vec<_>, _>>()?;
        xi.push(row);
    }
    SimilarityTable::new(snr_grid_db.to_vec(), compression_grid.to_vec(), xi)
}

/// Inclusive arithmetic grid from `min` to `max` in steps of `step`, snapping
/// the final point onto `max` when floating-point drift would overshoot it.
pub fn grid_range(min: f64, max: f64, step: f64) -> Result<Vec<f64>, SimilarityError> {
    if !(step > 0.0) {
        return Err(SimilarityError::InvalidParam {
            param: "step",
            reason: format!("must be positive, got {step}"),
        });
    }
    if max < min {
        return Err(SimilarityError::InvalidParam {
            param: "max",
            reason: format!("grid max {max} below min {min}"),
        });
    }
    let count = ((max - min) / step + 1e-9).floor() as usize + 1;
    let mut grid = Vec::with_capacity(count);
    for k in 0..count {
        let mut v = min + k as f64 * step;
        if (v - max).abs() < step * 1e-6 {
            v = max;
        }
        grid.push(v);
    }
    Ok(grid)
}

/// The default table: SNR −10..40 dB step 1, compression 0.05..1.00 step
/// 0.05, default surrogate parameters.
pub fn default_table() -> SimilarityTable {
    let snr: Vec<f64> = (-10..=40).map(|v| v as f64).collect();
    let compression: Vec<f64> = (1..=20).map(|k| (5 * k) as f64 / 100.0).collect();
    generate_table(&snr, &compression, &SurrogateParams::default())
        .expect("default table construction cannot fail")
}

// ---------------------------------------------------------------------------
// Image metrics
// ---------------------------------------------------------------------------

/// Peak pixel value for 8-bit images.
pub const MAX_PIXEL: f64 = 255.0;

/// A source image and its reconstruction, same shape, pixel values in
/// [0, 255].
#[derive(Debug, Clone, PartialEq)]
pub struct ImagePair {
    source: Vec<Vec<f64>>,
    reconstruction: Vec<Vec<f64>>,
}

impl ImagePair {
    pub fn new(
        source: Vec<Vec<f64>>,
        reconstruction: Vec<Vec<f64>>,
    ) -> Result<Self, SimilarityError> {
        if source.is_empty()
            || source.len() != reconstruction.len()
            || source
                .iter()
                .zip(&reconstruction)
                .any(|(a, b)| a.is_empty() || a.len() != b.len())
        {
            return Err(SimilarityError::ImageShapeMismatch);
        }
        for img in [&source, &reconstruction] {
            for row in img.iter() {
                for &p in row {
                    if !(0.0..=MAX_PIXEL).contains(&p) {
                        return Err(SimilarityError::PixelOutOfRange(p, MAX_PIXEL));
                    }
                }
            }
        }
        Ok(ImagePair {
            source,
            reconstruction,
        })
    }
}

/// Mean squared error over all pixels.
pub fn mse(pair: &ImagePair) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for (a, b) in pair.source.iter().zip(&pair.reconstruction) {
        for (&x, &y) in a.iter().zip(b) {
            sum += (x - y) * (x - y);
            n += 1;
        }
    }
    sum / n as f64
}

/// Peak signal-to-noise ratio, `10*log10(MAX^2 / MSE)` dB. Identical images
/// yield `f64::INFINITY`.
pub fn psnr(pair: &ImagePair) -> f64 {
    let e = mse(pair);
    if e == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (MAX_PIXEL * MAX_PIXEL / e).log10()
    }
}

/// Map a PSNR value onto [0, 1] by capping at `cap_db` (50 dB is a common
/// choice) and scaling linearly. Infinite PSNR maps to 1.
pub fn psnr_to_similarity(psnr_db: f64, cap_db: f64) -> f64 {
    assert!(cap_db > 0.0, "cap_db must be positive");
    if psnr_db.is_infinite() && psnr_db > 0.0 {
        return 1.0;
    }
    (psnr_db / cap_db).clamp(0.0, 1.0)
}
