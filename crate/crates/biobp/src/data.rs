//! MNIST IDX parsing, dataset assembly, deterministic minibatching, and a
//! synthetic stand-in dataset for offline runs.
//!
//! The IDX container is parsed bit-exactly: big-endian 32-bit header words,
//! magic `0x00000803` for images and `0x00000801` for labels, raw `u8`
//! payload. Gzip-compressed files (leading `1F 8B`) are transparently
//! inflated. [`write_idx_images`]/[`write_idx_labels`] emit the same format,
//! and round-trip bit-exactly.

use std::io::Read;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::numerics::{Matrix, Rng};

/// Magic number of an IDX image file (3-D `u8` tensor).
pub const IMAGE_MAGIC: u32 = 0x0000_0803;
/// Magic number of an IDX label file (1-D `u8` tensor).
pub const LABEL_MAGIC: u32 = 0x0000_0801;

/// Number of classes in the task; labels are validated against it.
pub const CLASS_COUNT: usize = 10;

/// The four canonical MNIST file names, in (train images, train labels,
/// test images, test labels) order.
pub const MNIST_FILES: [&str; 4] = [
    "train-images-idx3-ubyte",
    "train-labels-idx1-ubyte",
    "t10k-images-idx3-ubyte",
    "t10k-labels-idx1-ubyte",
];

/// Environment variable consulted when no explicit data dir is given.
pub const DATA_DIR_ENV: &str = "BIOBP_DATA_DIR";

/// Raw images straight out of an IDX file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageSet {
    count: usize,
    rows: usize,
    cols: usize,
    pixels: Vec<u8>,
}

impl ImageSet {
    pub fn new(count: usize, rows: usize, cols: usize, pixels: Vec<u8>) -> Result<ImageSet> {
        if rows == 0 || cols == 0 {
            return Err(Error::Param("image dimensions must be positive".into()));
        }
        if pixels.len() != count * rows * cols {
            return Err(Error::Truncated {
                expected: count * rows * cols,
                found: pixels.len(),
            });
        }
        Ok(ImageSet {
            count,
            rows,
            cols,
            pixels,
        })
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }
}

/// Raw labels straight out of an IDX file. Every label is `< CLASS_COUNT`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSet {
    labels: Vec<u8>,
}

impl LabelSet {
    pub fn new(labels: Vec<u8>) -> Result<LabelSet> {
        if let Some(&bad) = labels.iter().find(|&&l| l as usize >= CLASS_COUNT) {
            return Err(Error::LabelRange {
                label: bad,
                classes: CLASS_COUNT,
            });
        }
        Ok(LabelSet { labels })
    }

    pub fn count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }
}

/// Normalized supervised dataset: `x` rows in `[0, 1]`, `y` one-hot rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Matrix,
    pub y: Matrix,
    pub classes: usize,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.x.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Feature width (input units).
    pub fn width(&self) -> usize {
        self.x.cols()
    }
}

fn read_be_u32(bytes: &[u8], offset: usize) -> Result<u32> {
    let end = offset + 4;
    if bytes.len() < end {
        return Err(Error::Truncated {
            expected: end,
            found: bytes.len(),
        });
    }
    Ok(u32::from_be_bytes([
        bytes[offset],
        bytes[offset + 1],
        bytes[offset + 2],
        bytes[offset + 3],
    ]))
}

/// Inflates gzip payloads (detected by the `1F 8B` prefix); passes raw bytes
/// through untouched.
pub fn maybe_gunzip(bytes: &[u8]) -> Result<Vec<u8>> {
    if bytes.len() >= 2 && bytes[0] == 0x1F && bytes[1] == 0x8B {
        let mut out = Vec::new();
        flate2::read::GzDecoder::new(bytes).read_to_end(&mut out)?;
        Ok(out)
    } else {
        Ok(bytes.to_vec())
    }
}

/// Parses an IDX image file (raw, not gzipped — see [`maybe_gunzip`]).
pub fn parse_idx_images(bytes: &[u8]) -> Result<ImageSet> {
    let magic = read_be_u32(bytes, 0)?;
    if magic != IMAGE_MAGIC {
        return Err(Error::BadMagic {
            expected: IMAGE_MAGIC,
            found: magic,
        });
    }
    let count = read_be_u32(bytes, 4)? as usize;
    let rows = read_be_u32(bytes, 8)? as usize;
    let cols = read_be_u32(bytes, 12)? as usize;
    let expected = count * rows * cols;
    let payload = &bytes[16..];
    if payload.len() != expected {
        return Err(Error::Truncated {
            expected,
            found: payload.len(),
        });
    }
    ImageSet::new(count, rows, cols, payload.to_vec())
}

/// Parses an IDX label file. Label bytes above 9 are a domain error.
pub fn parse_idx_labels(bytes: &[u8]) -> Result<LabelSet> {
    let magic = read_be_u32(bytes, 0)?;
    if magic != LABEL_MAGIC {
        return Err(Error::BadMagic {
            expected: LABEL_MAGIC,
            found: magic,
        });
    }
    let count = read_be_u32(bytes, 4)? as usize;
    let payload = &bytes[8..];
    if payload.len() != count {
        return Err(Error::Truncated {
            expected: count,
            found: payload.len(),
        });
    }
    LabelSet::new(payload.to_vec())
}

/// Serializes an [`ImageSet`] back to IDX bytes; inverse of
/// [`parse_idx_images`].
pub fn write_idx_images(set: &ImageSet) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + set.pixels.len());
    out.extend_from_slice(&IMAGE_MAGIC.to_be_bytes());
    out.extend_from_slice(&(set.count as u32).to_be_bytes());
    out.extend_from_slice(&(set.rows as u32).to_be_bytes());
    out.extend_from_slice(&(set.cols as u32).to_be_bytes());
    out.extend_from_slice(&set.pixels);
    out
}

/// Serializes a [`LabelSet`] back to IDX bytes; inverse of
/// [`parse_idx_labels`].
pub fn write_idx_labels(set: &LabelSet) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + set.labels.len());
    out.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
    out.extend_from_slice(&(set.labels.len() as u32).to_be_bytes());
    out.extend_from_slice(&set.labels);
    out
}

/// Pairs images with labels: pixels scaled by 1/255 into `[0, 1]`, labels
/// one-hot over [`CLASS_COUNT`] classes.
pub fn to_dataset(images: &ImageSet, labels: &LabelSet) -> Result<Dataset> {
    if images.count() != labels.count() {
        return Err(Error::Pairing {
            images: images.count(),
            labels: labels.count(),
        });
    }
    if images.count() == 0 {
        return Err(Error::Param("empty dataset".into()));
    }
    let d = images.rows() * images.cols();
    let x_data = images.pixels.iter().map(|&p| p as f64 / 255.0).collect();
    let x = Matrix::from_vec(images.count(), d, x_data)?;
    let mut y_data = vec![0.0; images.count() * CLASS_COUNT];
    for (i, &l) in labels.labels().iter().enumerate() {
        y_data[i * CLASS_COUNT + l as usize] = 1.0;
    }
    let y = Matrix::from_vec(images.count(), CLASS_COUNT, y_data)?;
    Ok(Dataset {
        x,
        y,
        classes: CLASS_COUNT,
    })
}

/// Resolves the data directory: explicit path, else `BIOBP_DATA_DIR`, else
/// `./data`.
pub fn resolve_data_dir(explicit: Option<&Path>) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    if let Ok(env) = std::env::var(DATA_DIR_ENV) {
        if !env.is_empty() {
            return PathBuf::from(env);
        }
    }
    PathBuf::from("data")
}

fn read_idx_file(dir: &Path, name: &str) -> Result<Vec<u8>> {
    let plain = dir.join(name);
    let gz = dir.join(format!("{name}.gz"));
    let bytes = if plain.exists() {
        std::fs::read(&plain)?
    } else if gz.exists() {
        std::fs::read(&gz)?
    } else {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("{} (or .gz) not found in {}", name, dir.display()),
        )));
    };
    maybe_gunzip(&bytes)
}

/// True when all four canonical MNIST files (raw or gzipped) are present.
pub fn mnist_available(dir: &Path) -> bool {
    MNIST_FILES.iter().all(|name| {
        dir.join(name).exists() || dir.join(format!("{name}.gz")).exists()
    })
}

/// Loads the canonical MNIST train/test pair from `dir`.
pub fn load_mnist(dir: &Path) -> Result<(Dataset, Dataset)> {
    let train_images = parse_idx_images(&read_idx_file(dir, MNIST_FILES[0])?)?;
    let train_labels = parse_idx_labels(&read_idx_file(dir, MNIST_FILES[1])?)?;
    let test_images = parse_idx_images(&read_idx_file(dir, MNIST_FILES[2])?)?;
    let test_labels = parse_idx_labels(&read_idx_file(dir, MNIST_FILES[3])?)?;
    Ok((
        to_dataset(&train_images, &train_labels)?,
        to_dataset(&test_images, &test_labels)?,
    ))
}

fn sigmoid_scalar(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn validate_synth_params(n: usize, d: usize, c: usize) -> Result<()> {
    if c < 2 || n < c {
        return Err(Error::Param(format!(
            "synthetic dataset needs n >= c >= 2, got n={n}, c={c}"
        )));
    }
    if c > CLASS_COUNT {
        return Err(Error::Param(format!(
            "synthetic dataset supports at most {CLASS_COUNT} classes, got {c}"
        )));
    }
    if d == 0 {
        return Err(Error::Param("feature width must be positive".into()));
    }
    Ok(())
}

/// Class centers are standard-normal draws from the seed's "synth-centers"
/// substream; they depend only on `(seed, d, c)`, so train and test sets
/// generated from the same seed share the same classes.
fn synth_centers(seed: u64, d: usize, c: usize) -> Vec<Vec<f64>> {
    let mut rng = Rng::substream(seed, "synth-centers");
    (0..c)
        .map(|_| (0..d).map(|_| rng.next_gaussian()).collect())
        .collect()
}

fn sample_blobs(
    centers: &[Vec<f64>],
    rng: &mut Rng,
    n: usize,
    d: usize,
) -> Result<(ImageSet, LabelSet)> {
    let c = centers.len();
    let (rows, cols) = if d == 784 { (28, 28) } else { (1, d) };
    let mut pixels = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let class = i % c;
        labels.push(class as u8);
        for &center in &centers[class] {
            let v = center + 0.5 * rng.next_gaussian();
            pixels.push((sigmoid_scalar(v) * 255.0).round() as u8);
        }
    }
    Ok((ImageSet::new(n, rows, cols, pixels)?, LabelSet::new(labels)?))
}

/// Synthetic class blobs quantized into IDX-compatible `u8` images.
///
/// Samples add zero-mean Gaussian noise to their class center, get squashed
/// through a sigmoid into `(0, 1)` and are quantized to `u8` so the exact
/// bytes round-trip through the IDX writer. Labels are assigned round-robin,
/// so every class appears `floor(n/c)` or `ceil(n/c)` times. The `label`
/// picks the noise substream: sets drawn with different labels but the same
/// seed share class centers, giving a proper train/test pair.
pub fn synth_image_set_labeled(
    seed: u64,
    label: &str,
    n: usize,
    d: usize,
    c: usize,
) -> Result<(ImageSet, LabelSet)> {
    validate_synth_params(n, d, c)?;
    let centers = synth_centers(seed, d, c);
    let mut rng = Rng::substream(seed, label);
    sample_blobs(&centers, &mut rng, n, d)
}

/// [`synth_image_set_labeled`] with the default "synth-train" noise stream.
pub fn synth_image_set(seed: u64, n: usize, d: usize, c: usize) -> Result<(ImageSet, LabelSet)> {
    synth_image_set_labeled(seed, "synth-train", n, d, c)
}

fn truncate_classes(full: Dataset, c: usize) -> Result<Dataset> {
    if c == CLASS_COUNT {
        return Ok(full);
    }
    // Keep only the first c one-hot columns; labels are < c by construction.
    let n_rows = full.y.rows();
    let mut y_data = Vec::with_capacity(n_rows * c);
    for i in 0..n_rows {
        y_data.extend_from_slice(&full.y.row(i)[..c]);
    }
    Ok(Dataset {
        x: full.x,
        y: Matrix::from_vec(n_rows, c, y_data)?,
        classes: c,
    })
}

/// [`synth_image_set`] assembled into a normalized [`Dataset`] with `c`
/// classes (one-hot columns truncated to the classes actually used).
pub fn synth_dataset(seed: u64, n: usize, d: usize, c: usize) -> Result<Dataset> {
    let (images, labels) = synth_image_set(seed, n, d, c)?;
    truncate_classes(to_dataset(&images, &labels)?, c)
}

/// Train/test pair of synthetic datasets: same class centers (same seed),
/// independent noise streams.
pub fn synth_train_test(
    seed: u64,
    n_train: usize,
    n_test: usize,
    d: usize,
    c: usize,
) -> Result<(Dataset, Dataset)> {
    let (ti, tl) = synth_image_set_labeled(seed, "synth-train", n_train, d, c)?;
    let (vi, vl) = synth_image_set_labeled(seed, "synth-test", n_test, d, c)?;
    Ok((
        truncate_classes(to_dataset(&ti, &tl)?, c)?,
        truncate_classes(to_dataset(&vi, &vl)?, c)?,
    ))
}

/// Minibatch sampling policy. Epoch shuffling is the default; sampling with
/// replacement is the alternative reading of "iterations" kept behind a flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    EpochShuffle,
    WithReplacement,
}

impl std::fmt::Display for Sampling {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Sampling::EpochShuffle => write!(f, "epoch-shuffle"),
            Sampling::WithReplacement => write!(f, "with-replacement"),
        }
    }
}

impl std::str::FromStr for Sampling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Sampling> {
        match s {
            "epoch-shuffle" => Ok(Sampling::EpochShuffle),
            "with-replacement" => Ok(Sampling::WithReplacement),
            other => Err(Error::Param(format!(
                "unknown sampling mode '{other}' (valid: epoch-shuffle, with-replacement)"
            ))),
        }
    }
}

/// Deterministic minibatch iterator.
///
/// In epoch-shuffle mode each epoch visits every index exactly once; the
/// permutation is reshuffled at each epoch boundary from the iterator's own
/// RNG substream. Batches never span epochs: when `batch` does not divide
/// `n`, the final batch of an epoch is short.
#[derive(Debug, Clone)]
pub struct BatchIterator {
    perm: Vec<usize>,
    cursor: usize,
    batch: usize,
    epoch: u64,
    rng: Rng,
    sampling: Sampling,
}

impl BatchIterator {
    pub fn new(n: usize, batch: usize, mut rng: Rng, sampling: Sampling) -> Result<BatchIterator> {
        if batch == 0 || batch > n {
            return Err(Error::Param(format!(
                "batch size must be in 1..={n}, got {batch}"
            )));
        }
        let mut perm: Vec<usize> = (0..n).collect();
        if sampling == Sampling::EpochShuffle {
            shuffle(&mut perm, &mut rng);
        }
        Ok(BatchIterator {
            perm,
            cursor: 0,
            batch,
            epoch: 0,
            rng,
            sampling,
        })
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    /// Next minibatch `(x, y)` from `ds`. Never fails once constructed;
    /// wraps (reshuffling) at epoch boundaries.
    pub fn next_batch(&mut self, ds: &Dataset) -> (Matrix, Matrix) {
        debug_assert_eq!(self.perm.len(), ds.len());
        let n = self.perm.len();
        let indices: Vec<usize> = match self.sampling {
            Sampling::WithReplacement => (0..self.batch)
                .map(|_| self.rng.next_below(n as u64) as usize)
                .collect(),
            Sampling::EpochShuffle => {
                let take = self.batch.min(n - self.cursor);
                let slice = self.perm[self.cursor..self.cursor + take].to_vec();
                self.cursor += take;
                if self.cursor == n {
                    shuffle(&mut self.perm, &mut self.rng);
                    self.cursor = 0;
                    self.epoch += 1;
                }
                slice
            }
        };
        let d = ds.width();
        let c = ds.classes;
        let mut x = Vec::with_capacity(indices.len() * d);
        let mut y = Vec::with_capacity(indices.len() * c);
        for &i in &indices {
            x.extend_from_slice(ds.x.row(i));
            y.extend_from_slice(ds.y.row(i));
        }
        (
            Matrix::from_vec(indices.len(), d, x).expect("batch rows are finite"),
            Matrix::from_vec(indices.len(), c, y).expect("batch rows are finite"),
        )
    }
}

fn shuffle(perm: &mut [usize], rng: &mut Rng) {
    for i in (1..perm.len()).rev() {
        let j = rng.next_below(i as u64 + 1) as usize;
        perm.swap(i, j);
    }
}
