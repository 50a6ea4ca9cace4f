//! Sequences, alignments, and the hybrid query encoding between them.
//!
//! An alignment of N sequences padded to L columns is stored as an N·L-bit
//! string: bit (i, k) = 1 means "a letter of sequence i occupies column k".
//! Which letter sits there is never stored; it is recovered by querying the
//! original sequence through the prefix-sum position map: the m-th set bit of
//! row i holds the m-th letter of s_i. Set bits beyond the sequence length
//! map to a dummy position (-1) and render as gaps, so every one of the 2^(N·L)
//! bitstrings decodes to *some* alignment view — the energy penalty, not the
//! decoder, rejects letter-count violations.
//!
//! Indexing is 0-based throughout. Bit (0, 0) — sequence 0, column 0 — is the
//! most significant bit of the basis-state index, so a bitstring printed
//! left-to-right reads row by row and equals the binary expansion of its
//! index. The state-vector simulator uses the same constant (see
//! [`BitAssignment::to_index`]); keep them in lockstep.

use crate::error::{Error, Result};
use std::fmt;
use std::path::Path;

/// The 20-letter amino-acid alphabet, in the conventional one-letter order.
pub const ALPHABET: [char; 20] = [
    'A', 'R', 'N', 'D', 'C', 'Q', 'E', 'G', 'H', 'I', 'L', 'K', 'M', 'F', 'P', 'S', 'T', 'W',
    'Y', 'V',
];

/// Gap character used in alignment views. Never valid inside an input sequence.
pub const GAP: char = '_';

/// One residue; guaranteed to be a member of [`ALPHABET`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Residue(char);

impl Residue {
    pub fn new(symbol: char) -> Result<Self> {
        if ALPHABET.contains(&symbol) {
            Ok(Residue(symbol))
        } else {
            Err(Error::InvalidResidue(symbol))
        }
    }

    pub fn symbol(self) -> char {
        self.0
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The input to an alignment problem: N sequences, a padded column count L,
/// and optionally a designated reference sequence.
///
/// `padded_len` defaults to the longest sequence length but may be chosen
/// larger to leave room for gaps (useful when no sequence is a superstring of
/// the others). Everything downstream — bitstrings, circuits, energies — works
/// on the fixed n = N·L qubit register this set defines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceSet {
    sequences: Vec<Vec<Residue>>,
    padded_len: usize,
    reference: Option<usize>,
}

impl SequenceSet {
    /// Builds a set with the default padding L = max length.
    pub fn new<S: AsRef<str>>(sequences: &[S]) -> Result<Self> {
        let longest = sequences
            .iter()
            .map(|s| s.as_ref().chars().count())
            .max()
            .unwrap_or(0);
        Self::with_padded_len(sequences, longest)
    }

    /// Builds a set padded to `padded_len` columns per sequence.
    pub fn with_padded_len<S: AsRef<str>>(sequences: &[S], padded_len: usize) -> Result<Self> {
        if sequences.is_empty() {
            return Err(Error::TooFewSequences(0));
        }
        let mut parsed = Vec::with_capacity(sequences.len());
        for (index, s) in sequences.iter().enumerate() {
            let row: Vec<Residue> = s
                .as_ref()
                .chars()
                .map(Residue::new)
                .collect::<Result<_>>()?;
            if row.is_empty() {
                return Err(Error::EmptySequence { index });
            }
            parsed.push(row);
        }
        let longest = parsed.iter().map(Vec::len).max().unwrap();
        if padded_len < longest {
            return Err(Error::PaddedLengthTooShort {
                padded: padded_len,
                longest,
            });
        }
        Ok(SequenceSet {
            sequences: parsed,
            padded_len,
            reference: None,
        })
    }

    /// Marks sequence `index` as the reference.
    pub fn with_reference(mut self, index: usize) -> Result<Self> {
        if index >= self.sequences.len() {
            return Err(Error::ReferenceOutOfRange {
                index,
                count: self.sequences.len(),
            });
        }
        self.reference = Some(index);
        Ok(self)
    }

    /// Parses a minimal FASTA file: `>` header lines followed by residue
    /// lines (possibly wrapped). Blank lines are skipped.
    pub fn from_fasta(path: &Path) -> Result<Self> {
        Self::parse_fasta(&std::fs::read_to_string(path)?)
    }

    pub fn parse_fasta(text: &str) -> Result<Self> {
        let mut sequences: Vec<String> = Vec::new();
        let mut in_record = false;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(_header) = line.strip_prefix('>') {
                sequences.push(String::new());
                in_record = true;
            } else {
                if !in_record {
                    return Err(Error::FastaMissingHeader { line: lineno + 1 });
                }
                sequences.last_mut().unwrap().push_str(line);
            }
        }
        if sequences.is_empty() {
            return Err(Error::EmptyFasta);
        }
        Self::new(&sequences)
    }

    pub fn num_sequences(&self) -> usize {
        self.sequences.len()
    }

    /// Length l_i of sequence `i`.
    pub fn seq_len(&self, i: usize) -> usize {
        self.sequences[i].len()
    }

    /// Columns per sequence (L).
    pub fn padded_len(&self) -> usize {
        self.padded_len
    }

    /// Total register width n = N·L.
    pub fn num_qubits(&self) -> usize {
        self.sequences.len() * self.padded_len
    }

    /// Residue `k` (0-based) of sequence `i`.
    pub fn residue(&self, i: usize, k: usize) -> Residue {
        self.sequences[i][k]
    }

    pub fn sequence(&self, i: usize) -> &[Residue] {
        &self.sequences[i]
    }

    /// Sequence `i` as a plain string.
    pub fn sequence_str(&self, i: usize) -> String {
        self.sequences[i].iter().map(|r| r.symbol()).collect()
    }

    pub fn reference_index(&self) -> Option<usize> {
        self.reference
    }

    fn check_seq_index(&self, i: usize) -> Result<()> {
        if i >= self.sequences.len() {
            return Err(Error::SequenceIndexOutOfRange {
                index: i,
                count: self.sequences.len(),
            });
        }
        Ok(())
    }

    /// The position map f_i for one row of a bit assignment.
    ///
    /// Entry k is −1 when bit (i,k) is 0 or when the running count of set
    /// bits has exceeded l_i; otherwise it is the 0-based letter position
    /// (running count − 1). Non-negative entries are strictly increasing.
    pub fn position_map(&self, i: usize, bits: &BitAssignment) -> Result<PositionMap> {
        self.check_seq_index(i)?;
        bits.check_shape(self.num_sequences(), self.padded_len)?;
        let len = self.seq_len(i);
        let mut values = vec![-1i32; self.padded_len];
        let mut count = 0usize;
        for (k, value) in values.iter_mut().enumerate() {
            if bits.bit(i, k) {
                count += 1;
                if count <= len {
                    *value = (count - 1) as i32;
                }
            }
        }
        Ok(PositionMap { values })
    }

    /// Renders a bit assignment as rows of letters and gaps by querying each
    /// sequence through its position map. Never fails: over-placed bits (the
    /// prefix count running past l_i) render as gaps.
    pub fn decode(&self, bits: &BitAssignment) -> Result<AlignmentView> {
        bits.check_shape(self.num_sequences(), self.padded_len)?;
        let mut rows = Vec::with_capacity(self.num_sequences());
        for i in 0..self.num_sequences() {
            let map = self.position_map(i, bits)?;
            let row: String = map
                .values()
                .iter()
                .map(|&f| {
                    if f >= 0 {
                        self.residue(i, f as usize).symbol()
                    } else {
                        GAP
                    }
                })
                .collect();
            rows.push(row);
        }
        Ok(AlignmentView { rows })
    }

    /// Inverse of [`decode`](Self::decode) on consistent views: bit (i,k) is
    /// set exactly where row i holds a letter. Row shapes and characters are
    /// validated; letter identities are not checked against the sequences
    /// (decode ∘ encode restores them only for views consistent with this
    /// set).
    pub fn encode(&self, alignment: &AlignmentView) -> Result<BitAssignment> {
        if alignment.rows.len() != self.num_sequences() {
            return Err(Error::RowCount {
                got: alignment.rows.len(),
                expected: self.num_sequences(),
            });
        }
        let mut bits = Vec::with_capacity(self.num_qubits());
        for (index, row) in alignment.rows.iter().enumerate() {
            let chars: Vec<char> = row.chars().collect();
            if chars.len() != self.padded_len {
                return Err(Error::RowLength {
                    index,
                    got: chars.len(),
                    expected: self.padded_len,
                });
            }
            for &c in &chars {
                if c == GAP {
                    bits.push(false);
                } else {
                    Residue::new(c)?;
                    bits.push(true);
                }
            }
        }
        BitAssignment::from_bits(bits, self.num_sequences(), self.padded_len)
    }

    /// True iff every row places exactly l_i letters (the zero-penalty
    /// condition).
    pub fn is_feasible(&self, bits: &BitAssignment) -> bool {
        debug_assert_eq!(bits.num_bits(), self.num_qubits());
        (0..self.num_sequences()).all(|i| bits.row_count(i) == self.seq_len(i))
    }
}

/// An N·L-bit candidate alignment, laid out sequence-major: all of row 0's
/// columns, then row 1's, and so on.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitAssignment {
    bits: Vec<bool>,
    rows: usize,
    cols: usize,
}

impl BitAssignment {
    pub fn from_bits(bits: Vec<bool>, rows: usize, cols: usize) -> Result<Self> {
        if bits.len() != rows * cols {
            return Err(Error::BitLength {
                got: bits.len(),
                expected: rows * cols,
            });
        }
        Ok(BitAssignment { bits, rows, cols })
    }

    /// Parses a left-to-right 0/1 string (most significant bit first).
    pub fn from_binary_str(s: &str, rows: usize, cols: usize) -> Result<Self> {
        let bits: Vec<bool> = s.chars().map(|c| c == '1').collect();
        Self::from_bits(bits, rows, cols)
    }

    /// Expands a basis-state index into bits, most significant bit = (0, 0).
    /// Only registers up to 63 bits are representable as indices.
    pub fn from_index(index: usize, rows: usize, cols: usize) -> Self {
        let n = rows * cols;
        assert!(n < usize::BITS as usize, "register too wide for an index");
        let bits = (0..n).map(|t| (index >> (n - 1 - t)) & 1 == 1).collect();
        BitAssignment { bits, rows, cols }
    }

    /// The basis-state index: the bitstring read as a binary number with
    /// bit (0, 0) most significant.
    pub fn to_index(&self) -> usize {
        let n = self.num_bits();
        assert!(n < usize::BITS as usize, "register too wide for an index");
        self.bits
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | usize::from(b))
    }

    pub fn num_bits(&self) -> usize {
        self.bits.len()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Bit (i, k): does a letter of sequence i occupy column k?
    pub fn bit(&self, i: usize, k: usize) -> bool {
        self.bits[i * self.cols + k]
    }

    /// Number of letters row i places.
    pub fn row_count(&self, i: usize) -> usize {
        self.bits[i * self.cols..(i + 1) * self.cols]
            .iter()
            .filter(|&&b| b)
            .count()
    }

    fn check_shape(&self, rows: usize, cols: usize) -> Result<()> {
        if self.rows != rows || self.cols != cols {
            return Err(Error::BitLength {
                got: self.num_bits(),
                expected: rows * cols,
            });
        }
        Ok(())
    }
}

impl fmt::Display for BitAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// The position map f_i of one sequence: column → 0-based letter position,
/// or −1 for "no letter here" (gap or over-placed bit).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionMap {
    values: Vec<i32>,
}

impl PositionMap {
    pub fn values(&self) -> &[i32] {
        &self.values
    }

    pub fn get(&self, k: usize) -> i32 {
        self.values[k]
    }
}

/// A decoded alignment: N rows of length L over letters and gaps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignmentView {
    rows: Vec<String>,
}

impl AlignmentView {
    pub fn new(rows: Vec<String>) -> Self {
        AlignmentView { rows }
    }

    pub fn rows(&self) -> &[String] {
        &self.rows
    }
}

impl fmt::Display for AlignmentView {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.rows.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{row}")?;
        }
        Ok(())
    }
}
