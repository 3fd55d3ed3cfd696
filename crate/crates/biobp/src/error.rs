//! Crate-wide error type.

/// Shorthand result used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong in the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Two operands (or an operand and a model) disagree on shape.
    #[error("shape mismatch in {op}: {lhs_rows}x{lhs_cols} vs {rhs_rows}x{rhs_cols}")]
    ShapeMismatch {
        op: &'static str,
        lhs_rows: usize,
        lhs_cols: usize,
        rhs_rows: usize,
        rhs_cols: usize,
    },

    /// A caller-supplied parameter is out of its documented domain.
    #[error("invalid parameter: {0}")]
    Param(String),

    /// An input is mathematically degenerate (e.g. zero-norm matrix for an angle).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// An IDX payload starts with the wrong magic number.
    #[error("bad IDX magic: expected {expected:#010x}, found {found:#010x}")]
    BadMagic { expected: u32, found: u32 },

    /// An IDX payload is shorter (or longer) than its header promises.
    #[error("IDX length mismatch: expected {expected} bytes after header, found {found}")]
    Truncated { expected: usize, found: usize },

    /// A label byte falls outside the class range.
    #[error("label {label} out of range, classes = {classes}")]
    LabelRange { label: u8, classes: usize },

    /// Image and label files disagree on example count.
    #[error("dataset pairing: {images} images vs {labels} labels")]
    Pairing { images: usize, labels: usize },

    /// A checkpoint or metrics file failed structural validation.
    #[error("bad file format: {0}")]
    Format(String),

    /// Training produced a non-finite value; names the rule, step and layer.
    #[error("non-finite value in {rule} at step {step}, layer {layer}")]
    NonFinite {
        rule: &'static str,
        step: u64,
        layer: usize,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn shape(
        op: &'static str,
        lhs: (usize, usize),
        rhs: (usize, usize),
    ) -> Self {
        Error::ShapeMismatch {
            op,
            lhs_rows: lhs.0,
            lhs_cols: lhs.1,
            rhs_rows: rhs.0,
            rhs_cols: rhs.1,
        }
    }
}
