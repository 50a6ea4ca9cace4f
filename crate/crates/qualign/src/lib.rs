//! Variational quantum multiple sequence alignment.
//!
//! The pipeline in one breath: encode an N-sequence alignment problem as an
//! n = N·L qubit register ([`align`]), score any basis state with a
//! sum-of-pairs-plus-penalty loss that doubles as a diagonal Hamiltonian
//! ([`scoring`]), prepare parameterized circuit states on a dense state-vector
//! simulator and sample them ([`sim`]), train the circuit parameters against a
//! CVaR-weighted shot loss ([`opt`]), and check everything against exhaustive
//! enumeration ([`oracle`]).
//!
//! Only the loss is quantum-hardware-agnostic; the rest is an honest
//! simulation stack, which is the point: every claim the optimizer makes can
//! be replayed against exact expectations and brute-force minima.

pub mod align;
pub mod error;
pub mod opt;
pub mod oracle;
pub mod presets;
pub mod scoring;
pub mod sim;
pub mod stats;

pub use align::{AlignmentView, BitAssignment, PositionMap, Residue, SequenceSet};
pub use error::{Error, Result};
pub use scoring::{EnergyFn, EnergyTable, Instance, Penalty, WeightDictionary};
pub use opt::{
    cvar_loss, estimate_loss, finite_difference_gradient, hea_adjoint_gradient,
    parameter_shift_gradient, run_vqe, spsa_gradient, AdamConfig, AdamState, CvarConfig,
    GradientMethod, OptimizerConfig, SpsaConfig, TraceRecord, TrainingTrace,
};
pub use oracle::{
    brute_force_min, build_landscape, global_minimum, verify_expectation, LandscapeGraph,
    LandscapeNode, MinimaReport, MinimumEntry,
};
pub use presets::{preset, Preset, PRESETS};
pub use sim::{AnsatzKind, AnsatzSpec, NoiseConfig, ShotTable, StateVector};
pub use stats::{chi_square_gof, mean, std_dev, welch_one_sided_less, ChiSquareOutcome, WelchOutcome};
