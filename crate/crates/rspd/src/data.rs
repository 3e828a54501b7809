//! Dataset ingestion in the libsvm sparse text format, class statistics,
//! normalization, and deterministic sampling.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Sorted (feature index, value) pairs of one example; indices are 0-based
/// internally.
pub type SparseRow = Vec<(u32, f64)>;

/// A row-sparse feature matrix with ±1 labels and cached class statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseDataset {
    rows: Vec<SparseRow>,
    labels: Vec<i8>,
    dim: usize,
    pos_fraction: f64,
    mu_pos: Vec<f64>,
    mu_neg: Vec<f64>,
}

impl SparseDataset {
    /// Builds a dataset from parsed rows, recomputing all statistics.
    pub fn from_rows(rows: Vec<SparseRow>, labels: Vec<i8>, dim: usize) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Parse {
                line: 0,
                message: "dataset has zero examples".into(),
            });
        }
        if rows.len() != labels.len() {
            return Err(Error::Config("row/label count mismatch".into()));
        }
        if labels.iter().any(|&l| l != 1 && l != -1) {
            return Err(Error::Config("labels must be +1 or -1".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            let mut prev: Option<u32> = None;
            for &(idx, v) in row {
                if (idx as usize) >= dim {
                    return Err(Error::Parse {
                        line: i + 1,
                        message: format!("feature index {} exceeds dimension {dim}", idx + 1),
                    });
                }
                if let Some(p) = prev {
                    if idx <= p {
                        return Err(Error::Parse {
                            line: i + 1,
                            message: "feature indices must be strictly increasing".into(),
                        });
                    }
                }
                if !v.is_finite() {
                    return Err(Error::Parse {
                        line: i + 1,
                        message: "non-finite feature value".into(),
                    });
                }
                prev = Some(idx);
            }
        }
        let mut ds = SparseDataset {
            rows,
            labels,
            dim,
            pos_fraction: 0.0,
            mu_pos: Vec::new(),
            mu_neg: Vec::new(),
        };
        ds.recompute_stats();
        Ok(ds)
    }

    fn recompute_stats(&mut self) {
        let n = self.rows.len();
        let mut mu_pos = vec![0.0; self.dim];
        let mut mu_neg = vec![0.0; self.dim];
        let mut count_pos = 0usize;
        for (row, &label) in self.rows.iter().zip(&self.labels) {
            let target = if label == 1 {
                count_pos += 1;
                &mut mu_pos
            } else {
                &mut mu_neg
            };
            for &(idx, v) in row {
                target[idx as usize] += v;
            }
        }
        let count_neg = n - count_pos;
        if count_pos > 0 {
            for v in &mut mu_pos {
                *v /= count_pos as f64;
            }
        }
        if count_neg > 0 {
            for v in &mut mu_neg {
                *v /= count_neg as f64;
            }
        }
        self.pos_fraction = count_pos as f64 / n as f64;
        self.mu_pos = mu_pos;
        self.mu_neg = mu_neg;
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[(u32, f64)] {
        &self.rows[i]
    }

    pub fn label(&self, i: usize) -> i8 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    pub fn pos_fraction(&self) -> f64 {
        self.pos_fraction
    }

    pub fn mean_positive(&self) -> &[f64] {
        &self.mu_pos
    }

    pub fn mean_negative(&self) -> &[f64] {
        &self.mu_neg
    }

    /// Sparse dot product of row `i` with a dense vector.
    pub fn row_dot(&self, i: usize, dense: &[f64]) -> f64 {
        self.rows[i]
            .iter()
            .map(|&(idx, v)| v * dense[idx as usize])
            .sum()
    }

    /// Adds `scale * row_i` into a dense accumulator.
    pub fn row_add_scaled(&self, i: usize, scale: f64, out: &mut [f64]) {
        for &(idx, v) in &self.rows[i] {
            out[idx as usize] += scale * v;
        }
    }

    pub fn row_norm(&self, i: usize) -> f64 {
        self.rows[i].iter().map(|&(_, v)| v * v).sum::<f64>().sqrt()
    }

    pub fn max_row_norm(&self) -> f64 {
        (0..self.len())
            .map(|i| self.row_norm(i))
            .fold(0.0, f64::max)
    }

    /// Deterministic shuffled split into (first, second) parts, where the
    /// first receives `round(fraction * n)` examples.
    pub fn split_ratio(&self, fraction: f64, seed: u64) -> Result<(SparseDataset, SparseDataset)> {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(Error::Config(format!(
                "split fraction must lie in [0, 1], got {fraction}"
            )));
        }
        let n = self.len();
        let take = (fraction * n as f64).round() as usize;
        if take == 0 || take == n {
            return Err(Error::Config("split would leave an empty part".into()));
        }
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        order.shuffle(&mut rng);
        let gather = |ids: &[usize]| -> Result<SparseDataset> {
            SparseDataset::from_rows(
                ids.iter().map(|&i| self.rows[i].clone()).collect(),
                ids.iter().map(|&i| self.labels[i]).collect(),
                self.dim,
            )
        };
        Ok((gather(&order[..take])?, gather(&order[take..])?))
    }

    /// Keeps the first `count` examples.
    pub fn take(&self, count: usize) -> Result<SparseDataset> {
        if count == 0 || count > self.len() {
            return Err(Error::Config(format!(
                "cannot take {count} of {} examples",
                self.len()
            )));
        }
        SparseDataset::from_rows(
            self.rows[..count].to_vec(),
            self.labels[..count].to_vec(),
            self.dim,
        )
    }

    /// Random sparse binary-classification data: Gaussian nonzeros, labels
    /// from a planted hyperplane with optional flip noise.
    pub fn synthetic_classification(
        n: usize,
        d: usize,
        nnz_per_row: usize,
        label_noise: f64,
        seed: u64,
    ) -> Result<SparseDataset> {
        if n == 0 || d == 0 || nnz_per_row == 0 || nnz_per_row > d {
            return Err(Error::Config("invalid synthetic dataset shape".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let plane: Vec<f64> = (0..d)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let mut rows = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let mut picked: Vec<u32> = (0..d as u32).collect();
            picked.partial_shuffle(&mut rng, nnz_per_row);
            let mut row: SparseRow = picked[..nnz_per_row]
                .iter()
                .map(|&idx| (idx, rng.sample::<f64, _>(StandardNormal)))
                .collect();
            row.sort_by_key(|&(idx, _)| idx);
            let score: f64 = row.iter().map(|&(idx, v)| v * plane[idx as usize]).sum();
            let mut label = if score >= 0.0 { 1i8 } else { -1i8 };
            if rng.gen_bool(label_noise.clamp(0.0, 1.0)) {
                label = -label;
            }
            rows.push(row);
            labels.push(label);
        }
        // Guard against a degenerate single-class draw.
        if labels.iter().all(|&l| l == 1) {
            labels[0] = -1;
        } else if labels.iter().all(|&l| l == -1) {
            labels[0] = 1;
        }
        SparseDataset::from_rows(rows, labels, d)
    }
}

/// Row normalization modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalizeMode {
    None,
    UnitL2,
}

/// Rescales each nonzero row to unit Euclidean norm (zero rows unchanged)
/// and recomputes statistics.
pub fn normalize_rows(dataset: &SparseDataset, mode: NormalizeMode) -> SparseDataset {
    match mode {
        NormalizeMode::None => dataset.clone(),
        NormalizeMode::UnitL2 => {
            let rows = dataset
                .rows
                .iter()
                .map(|row| {
                    let norm = row.iter().map(|&(_, v)| v * v).sum::<f64>().sqrt();
                    if norm == 0.0 {
                        row.clone()
                    } else {
                        row.iter().map(|&(idx, v)| (idx, v / norm)).collect()
                    }
                })
                .collect();
            SparseDataset::from_rows(rows, dataset.labels.clone(), dataset.dim)
                .expect("normalization preserves validity")
        }
    }
}

/// Options for [`parse_libsvm_with`].
#[derive(Debug, Clone)]
pub struct ParseOptions {
    /// Fixed feature dimension; defaults to the maximum index seen. Needed
    /// when train and test files must agree on the dimension.
    pub dim_override: Option<usize>,
    /// Raw labels mapped to -1. Public copies of some multi-class-turned-
    /// binary datasets use {1, 2} labels, hence 2 maps negative by default.
    pub negative_labels: Vec<f64>,
    /// Raw labels mapped to +1.
    pub positive_labels: Vec<f64>,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            dim_override: None,
            negative_labels: vec![-1.0, 0.0, 2.0],
            positive_labels: vec![1.0],
        }
    }
}

/// Parses the libsvm sparse text format: each nonempty line is
/// `<label> <idx>:<val> <idx>:<val> ...` with 1-based indices.
pub fn parse_libsvm(reader: impl BufRead) -> Result<SparseDataset> {
    parse_libsvm_with(reader, &ParseOptions::default())
}

pub fn parse_libsvm_with(reader: impl BufRead, options: &ParseOptions) -> Result<SparseDataset> {
    let mut rows: Vec<SparseRow> = Vec::new();
    let mut labels: Vec<i8> = Vec::new();
    let mut max_index: usize = 0;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let label_token = tokens.next().expect("nonempty line has a first token");
        let raw_label: f64 = label_token.parse().map_err(|_| Error::Parse {
            line: lineno,
            message: format!("malformed label `{label_token}`"),
        })?;
        let label = if options.positive_labels.contains(&raw_label) {
            1i8
        } else if options.negative_labels.contains(&raw_label) {
            -1i8
        } else {
            return Err(Error::Parse {
                line: lineno,
                message: format!("label {raw_label} has no binary mapping"),
            });
        };
        let mut row: SparseRow = Vec::new();
        let mut prev: Option<u32> = None;
        for token in tokens {
            let (idx_str, val_str) = token.split_once(':').ok_or_else(|| Error::Parse {
                line: lineno,
                message: format!("malformed feature token `{token}`"),
            })?;
            let external: u64 = idx_str.parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("malformed feature index `{idx_str}`"),
            })?;
            if external == 0 {
                return Err(Error::Parse {
                    line: lineno,
                    message: "feature indices are 1-based".into(),
                });
            }
            let value: f64 = val_str.parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("malformed feature value `{val_str}`"),
            })?;
            let idx = (external - 1) as u32;
            if let Some(p) = prev {
                if idx <= p {
                    return Err(Error::Parse {
                        line: lineno,
                        message: "feature indices must be strictly increasing".into(),
                    });
                }
            }
            prev = Some(idx);
            max_index = max_index.max(external as usize);
            row.push((idx, value));
        }
        rows.push(row);
        labels.push(label);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 0,
            message: "dataset has zero examples".into(),
        });
    }
    let dim = match options.dim_override {
        Some(d) => {
            if d < max_index {
                return Err(Error::Parse {
                    line: 0,
                    message: format!("dimension override {d} below max feature index {max_index}"),
                });
            }
            d
        }
        None => max_index.max(1),
    };
    SparseDataset::from_rows(rows, labels, dim)
}

/// Opens a libsvm file, transparently decompressing `.gz` input.
pub fn open_libsvm(path: impl AsRef<Path>, options: &ParseOptions) -> Result<SparseDataset> {
    let path = path.as_ref();
    let file = File::open(path)?;
    if path.extension().is_some_and(|e| e == "gz") {
        let decoder = flate2::read::GzDecoder::new(file);
        parse_libsvm_with(BufReader::new(decoder), options)
    } else {
        parse_libsvm_with(BufReader::new(file), options)
    }
}

/// Serializes in the same text format with 1-based indices; values are
/// written with 17 significant digits so a reparse is exact.
pub fn serialize_libsvm(dataset: &SparseDataset, mut writer: impl Write) -> std::io::Result<()> {
    for i in 0..dataset.len() {
        let mut line = String::new();
        line.push_str(if dataset.label(i) == 1 { "+1" } else { "-1" });
        for &(idx, v) in dataset.row(i) {
            line.push_str(&format!(" {}:{:.16e}", idx + 1, v));
        }
        line.push('\n');
        writer.write_all(line.as_bytes())?;
    }
    Ok(())
}

pub fn read_to_dataset(text: &str) -> Result<SparseDataset> {
    parse_libsvm(std::io::Cursor::new(text))
}

/// A reproducible stream of uniform indices in `0..n`.
#[derive(Debug, Clone)]
pub struct UniformSampler {
    rng: ChaCha8Rng,
    n: usize,
}

impl UniformSampler {
    pub fn new(n: usize, seed: u64) -> Self {
        assert!(n >= 1, "sampler needs at least one index");
        UniformSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            n,
        }
    }

    pub fn next_index(&mut self) -> usize {
        self.rng.gen_range(0..self.n)
    }
}

impl Iterator for UniformSampler {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        Some(self.next_index())
    }
}

/// Convenience constructor mirroring the sampler's role as an operation.
pub fn uniform_sampler(n: usize, seed: u64) -> UniformSampler {
    UniformSampler::new(n, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_basic_line_format() {
        let ds = read_to_dataset("1 1:0.5 3:-2\n-1 2:1.0\n").unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.dim(), 3);
        assert_eq!(ds.label(0), 1);
        assert_eq!(ds.row(0), &[(0, 0.5), (2, -2.0)]);
        assert_eq!(ds.label(1), -1);
    }

    #[test]
    fn maps_zero_and_two_to_negative() {
        let ds = read_to_dataset("0 1:1\n2 1:2\n1 1:3\n").unwrap();
        assert_eq!(ds.labels(), &[-1, -1, 1]);
    }

    #[test]
    fn rejects_empty_and_malformed_input() {
        assert!(matches!(
            read_to_dataset(""),
            Err(Error::Parse { line: 0, .. })
        ));
        let err = read_to_dataset("1 1:0.5 oops\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = read_to_dataset("1 2:0.5 1:1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = read_to_dataset("5 1:0.5\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn roundtrip_is_identity() {
        let ds = read_to_dataset("1 1:0.1234567890123456 4:-7.25\n0 2:3.5\n").unwrap();
        let mut buf = Vec::new();
        serialize_libsvm(&ds, &mut buf).unwrap();
        let again = parse_libsvm_with(
            std::io::Cursor::new(buf),
            &ParseOptions {
                dim_override: Some(ds.dim()),
                ..ParseOptions::default()
            },
        )
        .unwrap();
        assert_eq!(ds, again);
    }

    #[test]
    fn normalization_unit_l2() {
        let ds = read_to_dataset("1 1:3 2:4\n-1 1:0\n").unwrap();
        let normed = normalize_rows(&ds, NormalizeMode::UnitL2);
        assert_eq!(normed.row(0), &[(0, 0.6), (1, 0.8)]);
        // A zero row stays unchanged.
        assert_eq!(normed.row(1), &[(0, 0.0)]);
        for i in 0..normed.len() {
            let norm = normed.row_norm(i);
            assert!(norm == 0.0 || (norm - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn class_means_weighted_sum_invariant() {
        let ds = SparseDataset::synthetic_classification(200, 12, 5, 0.1, 42).unwrap();
        let n = ds.len() as f64;
        let count_pos = ds.pos_fraction() * n;
        let count_neg = n - count_pos;
        assert_eq!(count_pos.fract(), 0.0);
        let mut global = vec![0.0; ds.dim()];
        for i in 0..ds.len() {
            ds.row_add_scaled(i, 1.0, &mut global);
        }
        for (j, total) in global.iter().enumerate() {
            let weighted = ds.mean_positive()[j] * count_pos + ds.mean_negative()[j] * count_neg;
            assert!((weighted - total).abs() <= 1e-10);
        }
    }

    #[test]
    fn sampler_is_deterministic_and_degenerate_case_constant() {
        let a: Vec<usize> = uniform_sampler(50, 9).take(10_000).collect();
        let b: Vec<usize> = uniform_sampler(50, 9).take(10_000).collect();
        assert_eq!(a, b);
        assert!(uniform_sampler(1, 3).take(100).all(|i| i == 0));
    }

    #[test]
    fn sampler_uniformity_chi_square() {
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        let n = 97usize;
        let draws = 1_000_000usize;
        let mut counts = vec![0u64; n];
        for idx in uniform_sampler(n, 2024).take(draws) {
            counts[idx] += 1;
        }
        let expected = draws as f64 / n as f64;
        let stat: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        let dist = ChiSquared::new((n - 1) as f64).unwrap();
        let critical = dist.inverse_cdf(1.0 - 1e-3);
        assert!(
            stat < critical,
            "chi-square stat {stat} above critical {critical}"
        );
    }

    #[test]
    fn gzip_input_is_supported() {
        use flate2::write::GzEncoder;
        use flate2::Compression;
        let dir = std::env::temp_dir().join("rspd-gz-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("tiny.libsvm.gz");
        let mut enc = GzEncoder::new(File::create(&path).unwrap(), Compression::default());
        enc.write_all(b"1 1:0.5\n-1 2:1.5\n").unwrap();
        enc.finish().unwrap();
        let ds = open_libsvm(&path, &ParseOptions::default()).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.row(1), &[(1, 1.5)]);
    }
}
