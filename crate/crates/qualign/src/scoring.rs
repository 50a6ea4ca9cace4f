//! The alignment loss: sum-of-pairs similarity resolved through query
//! tables, plus a soft letter-count penalty.
//!
//! The score of a bitstring is not a fixed quadratic form: each pair term
//! w^(i,j)[f_i(k)][f_j(k)] looks up a precomputed similarity table at indices
//! that themselves depend on the whole prefix of the bitstring (the position
//! maps). The tables are built once per sequence set; evaluating a bitstring
//! is then pure integer work. Together with the penalty this defines the
//! diagonal Hamiltonian: a map from basis-state index to energy, never
//! materialized as a matrix.
//!
//! Pair terms run over unordered pairs i < j. This is the single most
//! important convention in the codebase — the ordered reading would double
//! every similarity score — and it is pinned by golden tests against the
//! four-sequence demo instance whose optimum scores exactly −10.

use crate::align::{BitAssignment, Residue, SequenceSet};
use crate::error::{Error, Result};
use std::io::Write;

/// Similarity of two residues: −1 for a match, +1 for a mismatch. Gaps never
/// reach this function; they are handled by the dummy position −1 upstream.
pub fn similarity(a: Residue, b: Residue) -> i32 {
    if a == b {
        -1
    } else {
        1
    }
}

/// Penalty weight p. Positive; defaults to 1.5, which is strong enough that
/// no single letter-count violation can pay for itself in similarity.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct Penalty(f64);

impl Penalty {
    pub fn new(p: f64) -> Result<Self> {
        if p > 0.0 && p.is_finite() {
            Ok(Penalty(p))
        } else {
            Err(Error::NonPositivePenalty(p))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for Penalty {
    fn default() -> Self {
        Penalty(1.5)
    }
}

/// Precomputed similarity tables w^(i,j) of shape l_i × l_j for every
/// unordered sequence pair i < j. The (j, i) direction is served by
/// transposed lookup rather than stored twice.
#[derive(Debug, Clone)]
pub struct WeightDictionary {
    num_sequences: usize,
    lens: Vec<usize>,
    /// All matrices concatenated row-major in pair order (0,1), (0,2), ...
    data: Vec<i8>,
    offsets: Vec<usize>,
}

impl WeightDictionary {
    pub fn build(set: &SequenceSet) -> Self {
        let n = set.num_sequences();
        let lens: Vec<usize> = (0..n).map(|i| set.seq_len(i)).collect();
        let mut data = Vec::new();
        let mut offsets = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                offsets.push(data.len());
                for k in 0..lens[i] {
                    for l in 0..lens[j] {
                        data.push(similarity(set.residue(i, k), set.residue(j, l)) as i8);
                    }
                }
            }
        }
        WeightDictionary {
            num_sequences: n,
            lens,
            data,
            offsets,
        }
    }

    fn pair_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.num_sequences);
        let n = self.num_sequences;
        i * n - i * (i + 1) / 2 + (j - i - 1)
    }

    /// w^(i,j)[k][l]; indices are 0-based letter positions. Works for either
    /// orientation of (i, j).
    pub fn weight(&self, i: usize, j: usize, k: usize, l: usize) -> i32 {
        let (i, j, k, l) = if i < j { (i, j, k, l) } else { (j, i, l, k) };
        debug_assert!(k < self.lens[i] && l < self.lens[j]);
        let offset = self.offsets[self.pair_index(i, j)];
        self.data[offset + k * self.lens[j] + l] as i32
    }

    /// Shape (rows, cols) of the stored matrix for pair i < j.
    pub fn shape(&self, i: usize, j: usize) -> (usize, usize) {
        debug_assert!(i < j);
        (self.lens[i], self.lens[j])
    }

    pub fn num_pairs(&self) -> usize {
        self.offsets.len()
    }
}

/// Sum-of-pairs score of a bitstring: for every unordered pair i < j and
/// column k where both rows place a letter within budget, add the pair's
/// table entry. Any bitstring is accepted; dummy positions contribute 0.
pub fn sp_score(set: &SequenceSet, weights: &WeightDictionary, bits: &BitAssignment) -> f64 {
    let n = set.num_sequences();
    let maps: Vec<_> = (0..n)
        .map(|i| {
            set.position_map(i, bits)
                .expect("bit assignment shape checked by caller")
        })
        .collect();
    let mut total = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            for k in 0..set.padded_len() {
                let (fi, fj) = (maps[i].get(k), maps[j].get(k));
                if fi >= 0 && fj >= 0 {
                    total += weights.weight(i, j, fi as usize, fj as usize) as i64;
                }
            }
        }
    }
    total as f64
}

/// Letter-count penalty: p · Σ_i (placed_i − l_i)².
pub fn penalty(set: &SequenceSet, bits: &BitAssignment, p: Penalty) -> f64 {
    let mut sum = 0i64;
    for i in 0..set.num_sequences() {
        let d = bits.row_count(i) as i64 - set.seq_len(i) as i64;
        sum += d * d;
    }
    p.value() * sum as f64
}

/// Total loss: SP-score plus penalty. This is the energy of the basis state
/// `bits` under the diagonal Hamiltonian.
pub fn loss(
    set: &SequenceSet,
    weights: &WeightDictionary,
    bits: &BitAssignment,
    p: Penalty,
) -> f64 {
    sp_score(set, weights, bits) + penalty(set, bits, p)
}

/// Anything that can score a basis-state index. Implemented by the dense
/// [`EnergyTable`] and by [`Instance`] (on-the-fly evaluation), so simulator
/// and optimizer code is agnostic about which one it was handed.
pub trait EnergyFn: Sync {
    fn num_qubits(&self) -> usize;
    fn energy(&self, index: usize) -> f64;
}

/// A sequence set bundled with its query tables and penalty weight: one
/// alignment problem, ready to score bitstrings.
#[derive(Debug, Clone)]
pub struct Instance {
    set: SequenceSet,
    weights: WeightDictionary,
    penalty: Penalty,
    lens: Vec<usize>,
    /// (i, j, data offset, row stride) per pair, flattened for the hot loop.
    pairs: Vec<(u8, u8, u32, u32)>,
}

impl Instance {
    pub fn new(set: SequenceSet, penalty: Penalty) -> Self {
        let weights = WeightDictionary::build(&set);
        let n = set.num_sequences();
        let lens: Vec<usize> = (0..n).map(|i| set.seq_len(i)).collect();
        let mut pairs = Vec::with_capacity(weights.num_pairs());
        for i in 0..n {
            for (j, &len_j) in lens.iter().enumerate().skip(i + 1) {
                let offset = weights.offsets[weights.pair_index(i, j)];
                pairs.push((i as u8, j as u8, offset as u32, len_j as u32));
            }
        }
        Instance {
            set,
            weights,
            penalty,
            lens,
            pairs,
        }
    }

    pub fn set(&self) -> &SequenceSet {
        &self.set
    }

    pub fn weights(&self) -> &WeightDictionary {
        &self.weights
    }

    pub fn penalty_weight(&self) -> Penalty {
        self.penalty
    }

    /// Loss of a general bit assignment (any register width).
    pub fn energy_bits(&self, bits: &BitAssignment) -> f64 {
        loss(&self.set, &self.weights, bits, self.penalty)
    }

    pub fn is_feasible_index(&self, index: usize) -> bool {
        let n = self.set.num_qubits();
        let l = self.set.padded_len();
        self.lens.iter().enumerate().all(|(i, &len)| {
            let row = (index >> (n - (i + 1) * l)) & ((1usize << l) - 1);
            row.count_ones() as usize == len
        })
    }

    /// Loss of a basis-state index. This is the enumeration/sampling hot
    /// path: no allocation, integer arithmetic until the final penalty scale.
    pub fn energy_of_index(&self, index: usize) -> f64 {
        const MAX_SEQS: usize = 64;
        let n = self.set.num_qubits();
        let nseq = self.lens.len();
        let l = self.set.padded_len();
        debug_assert!(n < usize::BITS as usize && nseq <= MAX_SEQS);

        let mut counts = [0i32; MAX_SEQS];
        let mut sp = 0i64;
        for k in 0..l {
            let mut pos = [-1i32; MAX_SEQS];
            for i in 0..nseq {
                if (index >> (n - 1 - (i * l + k))) & 1 == 1 {
                    counts[i] += 1;
                    if counts[i] <= self.lens[i] as i32 {
                        pos[i] = counts[i] - 1;
                    }
                }
            }
            for &(i, j, offset, stride) in &self.pairs {
                let (fi, fj) = (pos[i as usize], pos[j as usize]);
                if fi >= 0 && fj >= 0 {
                    sp += self.weights.data
                        [offset as usize + fi as usize * stride as usize + fj as usize]
                        as i64;
                }
            }
        }
        let mut dev = 0i64;
        for (i, &len) in self.lens.iter().enumerate() {
            let d = (counts[i] - len as i32) as i64;
            dev += d * d;
        }
        sp as f64 + self.penalty.value() * dev as f64
    }

    /// Materializes the full 2^n energy table, refusing registers over `cap`
    /// qubits.
    pub fn energy_table_capped(&self, cap: usize) -> Result<EnergyTable> {
        let n = self.set.num_qubits();
        if n > cap {
            return Err(Error::OverCap { n, cap });
        }
        use rayon::prelude::*;
        let energies: Vec<f64> = (0..1usize << n)
            .into_par_iter()
            .map(|index| self.energy_of_index(index))
            .collect();
        Ok(EnergyTable { energies, n })
    }

    /// [`energy_table_capped`](Self::energy_table_capped) at the default cap.
    pub fn energy_table(&self) -> Result<EnergyTable> {
        self.energy_table_capped(DEFAULT_TABLE_CAP)
    }
}

impl EnergyFn for Instance {
    fn num_qubits(&self) -> usize {
        self.set.num_qubits()
    }

    fn energy(&self, index: usize) -> f64 {
        self.energy_of_index(index)
    }
}

/// Default qubit cap for dense tables and state vectors (256 MB of
/// amplitudes at the cap; tables are half that).
pub const DEFAULT_TABLE_CAP: usize = 24;

/// Dense energies over all 2^n basis states: the diagonal Hamiltonian as a
/// lookup table.
#[derive(Debug, Clone)]
pub struct EnergyTable {
    energies: Vec<f64>,
    n: usize,
}

impl EnergyTable {
    /// Wraps an explicit energy list (length must be a power of two). Mostly
    /// useful for synthetic landscapes in tests and studies.
    pub fn from_energies(energies: Vec<f64>) -> Result<Self> {
        if energies.is_empty() {
            return Err(Error::EmptyEnergies);
        }
        if !energies.len().is_power_of_two() {
            return Err(Error::EnergiesNotPowerOfTwo(energies.len()));
        }
        let n = energies.len().trailing_zeros() as usize;
        Ok(EnergyTable { energies, n })
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// Writes the table as CSV rows of (index, energy).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "energy"]).map_err(io_err)?;
        for (index, e) in self.energies.iter().enumerate() {
            w.write_record([index.to_string(), e.to_string()])
                .map_err(io_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

impl EnergyFn for EnergyTable {
    fn num_qubits(&self) -> usize {
        self.n
    }

    fn energy(&self, index: usize) -> f64 {
        self.energies[index]
    }
}

/// Spec'd constructor name for the dense table.
pub fn build_energy_table(instance: &Instance, cap: usize) -> Result<EnergyTable> {
    instance.energy_table_capped(cap)
}

fn io_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("csv: {other:?}"))),
    }
}
