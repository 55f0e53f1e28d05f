//! Per-layer feature traces and the SLSF v1 binary container.
//!
//! Layout (all integers little-endian, no padding, no trailing bytes):
//!
//! | bytes          | content                                   |
//! |----------------|-------------------------------------------|
//! | 0..4           | magic `b"SLSF"`                           |
//! | 4..8           | `u32` version, always 1                   |
//! | 8..12          | `u32` n_layers                            |
//! | 12..16         | `u32` n_samples                           |
//! | 16..20         | `u32` dim                                 |
//! | 20..24         | `u32` n_classes                           |
//! | 24..28         | `u32` name_len                            |
//! | 28..           | `name_len` bytes of UTF-8 dataset name    |
//! |                | n_layers matrices, n_samples x dim `f32`, row-major |
//! |                | n_samples `u32` labels                    |

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"SLSF";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 28;

/// Class-token features of every layer for one batch of labelled samples.
///
/// Layer `i` (0-based here) holds the `n_samples x dim` matrix produced by the
/// `(i + 1)`-th transformer block. Construct through [`FeatureTrace::new`] to get a
/// validated value; [`write_trace`] re-validates anyway.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTrace {
    pub dataset_name: String,
    pub n_classes: u32,
    pub layers: Vec<Array2<f32>>,
    pub labels: Vec<u32>,
}

impl FeatureTrace {
    pub fn new(
        dataset_name: impl Into<String>,
        n_classes: u32,
        layers: Vec<Array2<f32>>,
        labels: Vec<u32>,
    ) -> Result<Self> {
        let trace = FeatureTrace {
            dataset_name: dataset_name.into(),
            n_classes,
            layers,
            labels,
        };
        trace.validate()?;
        Ok(trace)
    }

    pub fn n_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        self.layers.first().map_or(0, |m| m.ncols())
    }

    /// Layer features widened to `f64`, the precision the numerics run in.
    pub fn layer_f64(&self, layer: usize) -> Array2<f64> {
        self.layers[layer].mapv(f64::from)
    }

    pub fn labels_usize(&self) -> Vec<usize> {
        self.labels.iter().map(|&l| l as usize).collect()
    }

    /// Checks every invariant, reporting the first one that fails.
    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::validation("n_layers must be positive"));
        }
        if self.labels.is_empty() {
            return Err(Error::validation("n_samples must be positive"));
        }
        if self.n_classes < 2 {
            return Err(Error::validation(format!(
                "n_classes must be at least 2, got {}",
                self.n_classes
            )));
        }
        let (rows, cols) = self.layers[0].dim();
        if cols == 0 {
            return Err(Error::validation("dim must be positive"));
        }
        for (i, layer) in self.layers.iter().enumerate() {
            if layer.dim() != (rows, cols) {
                return Err(Error::validation(format!(
                    "layer {} has shape {:?}, expected {:?}",
                    i + 1,
                    layer.dim(),
                    (rows, cols)
                )));
            }
            if rows != self.labels.len() {
                return Err(Error::validation(format!(
                    "layer {} has {} rows but there are {} labels",
                    i + 1,
                    rows,
                    self.labels.len()
                )));
            }
            if let Some(pos) = layer.iter().position(|v| !v.is_finite()) {
                return Err(Error::validation(format!(
                    "non-finite feature in layer {} at sample {}, column {}",
                    i + 1,
                    pos / cols,
                    pos % cols
                )));
            }
        }
        let mut seen = vec![false; self.n_classes as usize];
        for (i, &label) in self.labels.iter().enumerate() {
            if label >= self.n_classes {
                return Err(Error::validation(format!(
                    "label {} at sample {} is not below n_classes {}",
                    label, i, self.n_classes
                )));
            }
            seen[label as usize] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::validation(format!(
                "class {} never appears in labels",
                missing
            )));
        }
        for (name, value) in [
            ("n_layers", self.layers.len()),
            ("n_samples", rows),
            ("dim", cols),
            ("name_len", self.dataset_name.len()),
        ] {
            if u32::try_from(value).is_err() {
                return Err(Error::validation(format!("{} does not fit in u32", name)));
            }
        }
        Ok(())
    }
}

/// Serializes a validated trace as SLSF v1. Nothing is written if validation fails.
pub fn write_trace<W: Write>(trace: &FeatureTrace, mut sink: W) -> Result<()> {
    trace.validate()?;
    let header = [
        VERSION,
        trace.n_layers() as u32,
        trace.n_samples() as u32,
        trace.dim() as u32,
        trace.n_classes,
        trace.dataset_name.len() as u32,
    ];
    let mut buf = Vec::with_capacity(
        HEADER_LEN
            + trace.dataset_name.len()
            + 4 * trace.n_layers() * trace.n_samples() * trace.dim()
            + 4 * trace.n_samples(),
    );
    buf.extend_from_slice(MAGIC);
    for field in header {
        buf.extend_from_slice(&field.to_le_bytes());
    }
    buf.extend_from_slice(trace.dataset_name.as_bytes());
    for layer in &trace.layers {
        // `iter` walks in logical row-major order regardless of memory layout.
        for v in layer.iter() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    for label in &trace.labels {
        buf.extend_from_slice(&label.to_le_bytes());
    }
    sink.write_all(&buf)?;
    sink.flush()?;
    Ok(())
}

/// Reads an SLSF v1 stream to the end and returns the validated trace.
pub fn load_trace<R: Read>(mut source: R) -> Result<FeatureTrace> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    parse_trace(&bytes)
}

pub fn parse_trace(bytes: &[u8]) -> Result<FeatureTrace> {
    if bytes.len() < 4 {
        return Err(Error::format("truncated header"));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::format("bad magic"));
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::format("truncated header"));
    }
    let word = |i: usize| {
        let at = 4 + 4 * i;
        u32::from_le_bytes([bytes[at], bytes[at + 1], bytes[at + 2], bytes[at + 3]])
    };
    let version = word(0);
    if version != VERSION {
        return Err(Error::format(format!("unsupported version {}", version)));
    }
    let n_layers = word(1) as usize;
    let n_samples = word(2) as usize;
    let dim = word(3) as usize;
    let n_classes = word(4);
    let name_len = word(5) as usize;

    let features = n_layers
        .checked_mul(n_samples)
        .and_then(|v| v.checked_mul(dim))
        .and_then(|v| v.checked_mul(4));
    let expected = features
        .and_then(|f| f.checked_add(HEADER_LEN + name_len))
        .and_then(|v| v.checked_add(n_samples.checked_mul(4)?))
        .ok_or_else(|| Error::format("declared sizes overflow"))?;
    if bytes.len() < expected {
        return Err(Error::format(format!(
            "truncated: header declares {} bytes, found {}",
            expected,
            bytes.len()
        )));
    }
    if bytes.len() > expected {
        return Err(Error::format(format!(
            "{} trailing bytes after labels",
            bytes.len() - expected
        )));
    }

    let mut at = HEADER_LEN;
    let dataset_name = std::str::from_utf8(&bytes[at..at + name_len])
        .map_err(|e| Error::format(format!("dataset name is not UTF-8: {}", e)))?
        .to_owned();
    at += name_len;

    let mut layers = Vec::with_capacity(n_layers);
    for _ in 0..n_layers {
        let len = n_samples * dim;
        let values: Vec<f32> = bytes[at..at + 4 * len]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        at += 4 * len;
        let matrix = Array2::from_shape_vec((n_samples, dim), values)
            .map_err(|e| Error::format(e.to_string()))?;
        layers.push(matrix);
    }
    let labels = bytes[at..]
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();

    FeatureTrace::new(dataset_name, n_classes, layers, labels)
}

pub fn write_trace_file(trace: &FeatureTrace, path: impl AsRef<Path>) -> Result<()> {
    trace.validate()?;
    let file = File::create(path)?;
    write_trace(trace, BufWriter::new(file))
}

pub fn load_trace_file(path: impl AsRef<Path>) -> Result<FeatureTrace> {
    let file = File::open(path)?;
    load_trace(BufReader::new(file))
}

/// Class-stratified subsample of at most `max_samples` rows.
///
/// Every class keeps at least one sample; remaining slots are allocated
/// proportionally to class size (largest remainder). Selected rows keep their
/// original relative order.
pub fn subsample_trace(trace: &FeatureTrace, max_samples: usize, seed: u64) -> Result<FeatureTrace> {
    trace.validate()?;
    let n_classes = trace.n_classes as usize;
    if max_samples < n_classes {
        return Err(Error::argument(format!(
            "max_samples {} is below n_classes {}",
            max_samples, n_classes
        )));
    }
    let n = trace.n_samples();
    if n <= max_samples {
        return Ok(trace.clone());
    }

    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &label) in trace.labels.iter().enumerate() {
        by_class[label as usize].push(i);
    }
    let quotas = stratified_quotas(&by_class.iter().map(Vec::len).collect::<Vec<_>>(), max_samples);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = Vec::with_capacity(max_samples);
    for (members, quota) in by_class.iter_mut().zip(quotas) {
        members.shuffle(&mut rng);
        keep.extend_from_slice(&members[..quota]);
    }
    keep.sort_unstable();

    let layers = trace
        .layers
        .iter()
        .map(|layer| layer.select(ndarray::Axis(0), &keep))
        .collect();
    let labels = keep.iter().map(|&i| trace.labels[i]).collect();
    FeatureTrace::new(trace.dataset_name.clone(), trace.n_classes, layers, labels)
}

/// Splits `budget` slots across classes of the given sizes: one each first, then
/// proportional shares of the rest by largest remainder. Ties go to the lower class id.
fn stratified_quotas(sizes: &[usize], budget: usize) -> Vec<usize> {
    let mut quotas = vec![1usize; sizes.len()];
    let spare: usize = budget - sizes.len();
    let capacity: Vec<usize> = sizes.iter().map(|s| s - 1).collect();
    let total_capacity: usize = capacity.iter().sum();
    if total_capacity == 0 || spare == 0 {
        return quotas;
    }
    let mut assigned = 0;
    let mut remainders = Vec::with_capacity(sizes.len());
    for (c, &cap) in capacity.iter().enumerate() {
        let exact = spare as f64 * cap as f64 / total_capacity as f64;
        let whole = (exact.floor() as usize).min(cap);
        quotas[c] += whole;
        assigned += whole;
        remainders.push((exact - whole as f64, c));
    }
    remainders.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut left = spare.min(total_capacity) - assigned;
    for &(_, c) in remainders.iter().cycle() {
        if left == 0 {
            break;
        }
        if quotas[c] - 1 < capacity[c] {
            quotas[c] += 1;
            left -= 1;
        }
    }
    quotas
}
