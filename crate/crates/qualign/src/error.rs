use thiserror::Error;

/// Errors shared across the alignment, scoring, simulation and optimization
/// modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid residue '{0}': not in the 20-letter amino-acid alphabet")]
    InvalidResidue(char),

    #[error("sequence set needs at least 2 sequences, got {0}")]
    TooFewSequences(usize),

    #[error("sequence {index} is empty")]
    EmptySequence { index: usize },

    #[error("padded length {padded} is shorter than the longest sequence ({longest})")]
    PaddedLengthTooShort { padded: usize, longest: usize },

    #[error("sequence index {index} out of range (set has {count} sequences)")]
    SequenceIndexOutOfRange { index: usize, count: usize },

    #[error("reference index {index} out of range (set has {count} sequences)")]
    ReferenceOutOfRange { index: usize, count: usize },

    #[error("alignment row {index} has length {got}, expected {expected}")]
    RowLength {
        index: usize,
        got: usize,
        expected: usize,
    },

    #[error("alignment has {got} rows, expected {expected}")]
    RowCount { got: usize, expected: usize },

    #[error("bit assignment has {got} bits, expected {expected}")]
    BitLength { got: usize, expected: usize },

    #[error("penalty weight must be positive, got {0}")]
    NonPositivePenalty(f64),

    #[error("{n} qubits exceeds the cap of {cap}; evaluate energies on the fly instead of building a table")]
    OverCap { n: usize, cap: usize },

    #[error("{n} qubits exceeds the landscape export cap of {cap}")]
    OverLandscapeCap { n: usize, cap: usize },

    #[error("parameter vector has length {got}, expected {expected}")]
    ParamLength { got: usize, expected: usize },

    #[error("state has {state} amplitudes but energy source covers {energy}")]
    DimensionMismatch { state: usize, energy: usize },

    #[error("QAOA circuits need an energy evaluator for the cost phase")]
    QaoaNeedsEnergy,

    #[error("noise rate {name}={value} outside [0, 1)")]
    NoiseRate { name: &'static str, value: f64 },

    #[error("CVaR ratio must lie in (0, 1], got {0}")]
    CvarRatio(f64),

    #[error("cannot take CVaR of an empty energy list")]
    EmptyEnergies,

    #[error("energy list length {0} is not a power of two")]
    EnergiesNotPowerOfTwo(usize),

    #[error("shots must be at least 1")]
    ZeroShots,

    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("{name} must lie in [0, 1), got {value}")]
    BetaRange { name: &'static str, value: f64 },

    #[error("gradient method {method} does not apply to {ansatz} circuits")]
    UnshiftableAnsatz {
        method: &'static str,
        ansatz: &'static str,
    },

    #[error("sample {name} needs at least {need} values, got {got}")]
    SampleTooSmall {
        name: &'static str,
        got: usize,
        need: usize,
    },

    #[error("observed and expected lengths differ: {got} vs {expected}")]
    MismatchedSamples { got: usize, expected: usize },

    #[error("chi-square test is degenerate: {0}")]
    DegenerateChiSquare(&'static str),

    #[error("FASTA input has no sequences")]
    EmptyFasta,

    #[error("FASTA line {line}: residues found before the first '>' header")]
    FastaMissingHeader { line: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
