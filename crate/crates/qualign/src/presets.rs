//! Named desk-scale alignment instances.
//!
//! The four-sequence protein demo is the canonical 20-qubit problem the
//! solver is validated against end to end. The DNA instances are stand-ins
//! chosen to hit specific register widths (4–20 qubits) for scaling studies,
//! depth sweeps, and noise comparisons where exhaustive oracles still run in
//! moments.

use crate::align::SequenceSet;
use crate::scoring::{Instance, Penalty};

/// A named, immutable problem definition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Preset {
    pub name: &'static str,
    pub sequences: &'static [&'static str],
    pub padded_len: usize,
}

/// Every named instance, ordered by register width.
pub const PRESETS: &[Preset] = &[
    Preset {
        name: "dna-pair-4q",
        sequences: &["AC", "AC"],
        padded_len: 2,
    },
    Preset {
        name: "dna-pair-8q",
        sequences: &["ACGT", "AGT"],
        padded_len: 4,
    },
    Preset {
        name: "dna-trio-12q",
        sequences: &["AGT", "AT", "GT"],
        padded_len: 4,
    },
    Preset {
        name: "dna-quad-16q",
        sequences: &["ACGT", "AGT", "ACT", "AC"],
        padded_len: 4,
    },
    Preset {
        name: "protein-demo-20q",
        sequences: &["AAKGT", "AT", "AKG", "KT"],
        padded_len: 5,
    },
    Preset {
        name: "dna-pair-20q",
        sequences: &["CCGTGCA", "ACGTAGCT"],
        padded_len: 10,
    },
];

/// Looks a preset up by name.
pub fn preset(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

impl Preset {
    pub fn num_qubits(&self) -> usize {
        self.sequences.len() * self.padded_len
    }

    pub fn sequence_set(&self) -> SequenceSet {
        SequenceSet::with_padded_len(self.sequences, self.padded_len)
            .expect("presets are statically valid")
    }

    /// The instance under the default penalty weight.
    pub fn instance(&self) -> Instance {
        self.instance_with_penalty(Penalty::default())
    }

    pub fn instance_with_penalty(&self, penalty: Penalty) -> Instance {
        Instance::new(self.sequence_set(), penalty)
    }
}
