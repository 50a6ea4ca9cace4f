//! Ground truth by exhaustive enumeration: exact minima with every attaining
//! state, strict local-minimum detection on the Hamming-1 graph, the
//! energy-landscape graph export, and an independent cross-check of the
//! simulator's expectation values.
//!
//! Everything here recomputes energies on the fly from the instance rather
//! than trusting a cached table, so oracle results stand apart from the
//! pipeline they validate.

use crate::error::{Error, Result};
use crate::scoring::{EnergyFn, Instance};
use crate::sim::StateVector;
use rayon::prelude::*;
use std::io::Write;

/// Largest register exhaustive enumeration will take on.
pub const ENUM_CAP: usize = 24;

/// Largest register the landscape graph export allows; the edge list grows
/// as n·2^{n−1} and stops being viewable long before enumeration stops being
/// feasible.
pub const LANDSCAPE_CAP: usize = 16;

/// One locally minimal basis state and its energy.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MinimumEntry {
    pub index: usize,
    pub energy: f64,
}

/// Exact minima of an instance's energy landscape.
///
/// `global_states` holds every basis index attaining the global minimum, in
/// ascending index order. `local_minima` holds the states whose n Hamming-1
/// neighbors are all strictly higher; states that are weakly minimal but sit
/// on a plateau (no lower neighbor, at least one equal) are reported apart as
/// `flat_nodes`. Both lists are sorted by energy, then index. Every global
/// minimizer necessarily appears in one of the two lists.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MinimaReport {
    pub num_qubits: usize,
    /// When set, only feasible states were candidates (neighbor comparisons
    /// still run against the full graph).
    pub feasible_only: bool,
    pub global_energy: f64,
    pub global_states: Vec<usize>,
    pub local_minima: Vec<MinimumEntry>,
    pub flat_nodes: Vec<MinimumEntry>,
}

impl MinimaReport {
    pub fn is_global(&self, index: usize) -> bool {
        self.global_states.binary_search(&index).is_ok()
    }
}

struct RangeScan {
    min_energy: f64,
    min_states: Vec<usize>,
    local: Vec<MinimumEntry>,
    flat: Vec<MinimumEntry>,
}

fn scan_range(instance: &Instance, lo: usize, hi: usize, feasible_only: bool) -> RangeScan {
    let n = instance.num_qubits();
    let mut out = RangeScan {
        min_energy: f64::INFINITY,
        min_states: Vec::new(),
        local: Vec::new(),
        flat: Vec::new(),
    };
    for i in lo..hi {
        if feasible_only && !instance.is_feasible_index(i) {
            continue;
        }
        let e = instance.energy_of_index(i);
        if e < out.min_energy {
            out.min_energy = e;
            out.min_states.clear();
            out.min_states.push(i);
        } else if e == out.min_energy {
            out.min_states.push(i);
        }
        let mut weakly_minimal = true;
        let mut has_equal_neighbor = false;
        for b in 0..n {
            let neighbor = instance.energy_of_index(i ^ (1 << b));
            if neighbor < e {
                weakly_minimal = false;
                break;
            }
            if neighbor == e {
                has_equal_neighbor = true;
            }
        }
        if weakly_minimal {
            let entry = MinimumEntry { index: i, energy: e };
            if has_equal_neighbor {
                out.flat.push(entry);
            } else {
                out.local.push(entry);
            }
        }
    }
    out
}

fn index_ranges(dim: usize) -> Vec<(usize, usize)> {
    let chunk = 1usize << 14;
    (0..dim)
        .step_by(chunk.min(dim))
        .map(|lo| (lo, (lo + chunk).min(dim)))
        .collect()
}

/// Exhaustively enumerates the landscape: the exact global minimum with all
/// attaining states, plus strict local minima and plateau nodes. With
/// `feasible_only`, only states satisfying the letter-count constraints are
/// candidates.
///
/// Work is partitioned over index ranges and merged in range order, so the
/// report is identical under any worker count.
pub fn brute_force_min(instance: &Instance, feasible_only: bool) -> Result<MinimaReport> {
    let n = instance.num_qubits();
    if n > ENUM_CAP {
        return Err(Error::OverCap { n, cap: ENUM_CAP });
    }
    let scans: Vec<RangeScan> = index_ranges(1usize << n)
        .into_par_iter()
        .map(|(lo, hi)| scan_range(instance, lo, hi, feasible_only))
        .collect();
    let mut global_energy = f64::INFINITY;
    let mut global_states = Vec::new();
    let mut local_minima = Vec::new();
    let mut flat_nodes = Vec::new();
    for scan in scans {
        if scan.min_energy < global_energy {
            global_energy = scan.min_energy;
            global_states = scan.min_states;
        } else if scan.min_energy == global_energy {
            global_states.extend(scan.min_states);
        }
        local_minima.extend(scan.local);
        flat_nodes.extend(scan.flat);
    }
    let by_energy_then_index = |a: &MinimumEntry, b: &MinimumEntry| {
        a.energy.total_cmp(&b.energy).then(a.index.cmp(&b.index))
    };
    local_minima.sort_by(by_energy_then_index);
    flat_nodes.sort_by(by_energy_then_index);
    Ok(MinimaReport {
        num_qubits: n,
        feasible_only,
        global_energy,
        global_states,
        local_minima,
        flat_nodes,
    })
}

/// The global minimum alone — no neighbor probing — for when only the floor
/// of the landscape matters.
pub fn global_minimum(instance: &Instance, feasible_only: bool) -> Result<(f64, Vec<usize>)> {
    let n = instance.num_qubits();
    if n > ENUM_CAP {
        return Err(Error::OverCap { n, cap: ENUM_CAP });
    }
    let scans: Vec<(f64, Vec<usize>)> = index_ranges(1usize << n)
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut min = f64::INFINITY;
            let mut states = Vec::new();
            for i in lo..hi {
                if feasible_only && !instance.is_feasible_index(i) {
                    continue;
                }
                let e = instance.energy_of_index(i);
                if e < min {
                    min = e;
                    states.clear();
                    states.push(i);
                } else if e == min {
                    states.push(i);
                }
            }
            (min, states)
        })
        .collect();
    let mut min = f64::INFINITY;
    let mut states = Vec::new();
    for (m, s) in scans {
        if m < min {
            min = m;
            states = s;
        } else if m == min {
            states.extend(s);
        }
    }
    Ok((min, states))
}

/// One vertex of the landscape graph.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LandscapeNode {
    pub index: usize,
    pub energy: f64,
    pub feasible: bool,
}

/// The Hamming-1 energy landscape: every basis state (or the feasible
/// subset) with its energy, and an edge wherever two included states differ
/// in exactly one bit. The full graph has 2^n nodes and n·2^{n−1} edges.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LandscapeGraph {
    pub num_qubits: usize,
    pub nodes: Vec<LandscapeNode>,
    /// (smaller index, larger index) pairs, each edge listed once.
    pub edges: Vec<(usize, usize)>,
}

impl LandscapeGraph {
    /// Node list as CSV: index, zero-padded bitstring, energy, feasibility.
    pub fn write_node_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "bitstring", "energy", "feasible"])
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
        for node in &self.nodes {
            w.write_record([
                node.index.to_string(),
                format!("{:0width$b}", node.index, width = self.num_qubits),
                node.energy.to_string(),
                node.feasible.to_string(),
            ])
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Edge list as CSV with `source,target` columns, ready for
    /// force-directed layout tools.
    pub fn write_edge_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["source", "target"])
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
        for &(a, b) in &self.edges {
            w.write_record([a.to_string(), b.to_string()])
                .map_err(|e| Error::Io(std::io::Error::other(e)))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Builds the Hamming-1 landscape graph for external visualization.
pub fn build_landscape(instance: &Instance, feasible_only: bool) -> Result<LandscapeGraph> {
    let n = instance.num_qubits();
    if n > LANDSCAPE_CAP {
        return Err(Error::OverLandscapeCap {
            n,
            cap: LANDSCAPE_CAP,
        });
    }
    let dim = 1usize << n;
    let mut included = vec![false; dim];
    let mut nodes = Vec::new();
    for (i, in_graph) in included.iter_mut().enumerate() {
        let feasible = instance.is_feasible_index(i);
        if feasible_only && !feasible {
            continue;
        }
        *in_graph = true;
        nodes.push(LandscapeNode {
            index: i,
            energy: instance.energy_of_index(i),
            feasible,
        });
    }
    let mut edges = Vec::new();
    for (i, &in_graph) in included.iter().enumerate() {
        if !in_graph {
            continue;
        }
        for b in 0..n {
            let j = i | (1 << b);
            if j != i && included[j] {
                edges.push((i, j));
            }
        }
    }
    Ok(LandscapeGraph {
        num_qubits: n,
        nodes,
        edges,
    })
}

/// Cross-checks the simulator's expectation value with an independent
/// accumulation: Σ|amp|²·E(i) in reverse index order under Kahan
/// compensation. Returns |forward − independent|; anything above ~1e−9 means
/// the two paths disagree beyond rounding.
pub fn verify_expectation(psi: &StateVector, energy: &dyn EnergyFn) -> Result<f64> {
    let forward = psi.exact_expectation(energy)?;
    let mut sum = 0.0;
    let mut compensation = 0.0;
    for (i, amp) in psi.amplitudes().iter().enumerate().rev() {
        let term = amp.norm_sqr() * energy.energy(i);
        let y = term - compensation;
        let t = sum + y;
        compensation = (t - sum) - y;
        sum = t;
    }
    Ok((forward - sum).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::align::{BitAssignment, SequenceSet};
    use crate::opt::{run_vqe, CvarConfig, GradientMethod, OptimizerConfig};
    use crate::scoring::Penalty;
    use crate::sim::{AnsatzSpec, NoiseConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn instance(seqs: &[&str], padded: usize) -> Instance {
        let set = SequenceSet::with_padded_len(seqs, padded).unwrap();
        Instance::new(set, Penalty::default())
    }

    #[test]
    fn twin_pair_has_its_unique_minimum_at_all_ones() {
        let report = brute_force_min(&instance(&["AG", "AG"], 2), false).unwrap();
        assert_eq!(report.global_energy, -2.0);
        assert_eq!(report.global_states, vec![0b1111]);
        assert!(report.is_global(0b1111));
        assert!(!report.is_global(0b1110));
        // The unique global minimizer must be a strict local minimum.
        assert!(report
            .local_minima
            .iter()
            .any(|m| m.index == 0b1111 && m.energy == -2.0));
    }

    #[test]
    fn single_sequence_minimizers_are_all_column_choices() {
        // One sequence of length 2 in 4 columns: no pair terms, so the
        // minimum is 0, attained by exactly C(4,2) = 6 placements.
        let report = brute_force_min(&instance(&["AG"], 4), false).unwrap();
        assert_eq!(report.global_energy, 0.0);
        assert_eq!(report.global_states, vec![0b0011, 0b0101, 0b0110, 0b1001, 0b1010, 0b1100]);
    }

    #[test]
    fn demo_instance_reaches_minus_ten_with_the_known_solution() {
        let inst = instance(&["AAKGT", "AT", "AKG", "KT"], 5);
        let (min, states) = global_minimum(&inst, false).unwrap();
        assert_eq!(min, -10.0);
        let known = usize::from_str_radix("11111100011011000101", 2).unwrap();
        assert!(states.contains(&known), "known optimum not among minimizers");
        assert!(states.len() > 1, "several optimal alignments expected");
    }

    #[test]
    fn feasible_only_restricts_candidates_to_legal_alignments() {
        let inst = instance(&["AG", "AT"], 3);
        let all = brute_force_min(&inst, false).unwrap();
        let feas = brute_force_min(&inst, true).unwrap();
        for &s in &feas.global_states {
            let bits = BitAssignment::from_index(s, 2, 3);
            assert!(inst.set().is_feasible(&bits));
        }
        // The penalty keeps every infeasible state strictly above the best
        // feasible one here, so the two searches agree.
        assert_eq!(all.global_energy, feas.global_energy);
        assert_eq!(all.global_states, feas.global_states);
    }

    #[test]
    fn minima_lists_are_sound_and_sorted() {
        let inst = instance(&["ACGT", "AGT"], 4);
        let report = brute_force_min(&inst, false).unwrap();
        // Direct recheck: every strict local minimum beats all 8 neighbors.
        for m in &report.local_minima {
            for b in 0..8 {
                assert!(
                    inst.energy_of_index(m.index ^ (1 << b)) > m.energy,
                    "state {} is not strictly locally minimal",
                    m.index
                );
            }
        }
        // Every global minimizer is weakly minimal, so it appears in one of
        // the two lists.
        for &s in &report.global_states {
            let in_local = report.local_minima.iter().any(|m| m.index == s);
            let in_flat = report.flat_nodes.iter().any(|m| m.index == s);
            assert!(in_local || in_flat);
        }
        // Landscape structure: more local minima than global states.
        assert!(
            report.local_minima.len() > report.global_states.len(),
            "expected at least one non-global local minimum, got {}",
            report.local_minima.len()
        );
        for list in [&report.local_minima, &report.flat_nodes] {
            for pair in list.windows(2) {
                assert!(pair[0].energy <= pair[1].energy);
            }
        }
        assert!(report.global_states.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn reports_are_identical_under_any_worker_count() {
        let inst = instance(&["AGT", "AT"], 4);
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| brute_force_min(&inst, false))
            .unwrap();
        let three = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap()
            .install(|| brute_force_min(&inst, false))
            .unwrap();
        assert_eq!(one, three);
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        // 4 sequences padded to 7 columns → 28 qubits.
        let inst = instance(&["AAKGT", "AT", "AKG", "KT"], 7);
        assert!(matches!(
            brute_force_min(&inst, false),
            Err(Error::OverCap { n: 28, cap: 24 })
        ));
        assert!(matches!(
            global_minimum(&inst, false),
            Err(Error::OverCap { .. })
        ));
    }

    #[test]
    fn full_landscape_has_the_exact_node_and_edge_counts() {
        // One length-1 sequence in 3 columns → 3 qubits.
        let graph = build_landscape(&instance(&["A"], 3), false).unwrap();
        assert_eq!(graph.nodes.len(), 8);
        assert_eq!(graph.edges.len(), 12);
        for &(a, b) in &graph.edges {
            assert!(a < b);
            assert_eq!((a ^ b).count_ones(), 1);
        }
        // Neighbor symmetry: the undirected degree of every node is n.
        let mut degree = [0usize; 8];
        for &(a, b) in &graph.edges {
            degree[a] += 1;
            degree[b] += 1;
        }
        assert!(degree.iter().all(|&d| d == 3));
    }

    #[test]
    fn landscape_energies_match_the_instance_and_flag_feasibility() {
        let inst = instance(&["AG", "AT"], 2);
        let graph = build_landscape(&inst, false).unwrap();
        for node in &graph.nodes {
            assert_eq!(node.energy, inst.energy_of_index(node.index));
            assert_eq!(node.feasible, inst.is_feasible_index(node.index));
        }
        let feasible = build_landscape(&inst, true).unwrap();
        assert!(feasible.nodes.iter().all(|nd| nd.feasible));
        assert_eq!(feasible.nodes.len(), 1, "both rows must fill both columns");
    }

    #[test]
    fn landscape_cap_is_enforced() {
        let inst = instance(&["AAKGT", "AT", "AKG", "KT"], 5);
        assert!(matches!(
            build_landscape(&inst, false),
            Err(Error::OverLandscapeCap { n: 20, cap: 16 })
        ));
    }

    #[test]
    fn landscape_csv_exports_are_stable() {
        let graph = build_landscape(&instance(&["A"], 2), false).unwrap();
        let mut nodes = Vec::new();
        graph.write_node_csv(&mut nodes).unwrap();
        let text = String::from_utf8(nodes).unwrap();
        assert_eq!(
            text,
            "index,bitstring,energy,feasible\n\
             0,00,1.5,false\n\
             1,01,0,true\n\
             2,10,0,true\n\
             3,11,1.5,false\n"
        );
        let mut edges = Vec::new();
        graph.write_edge_csv(&mut edges).unwrap();
        assert_eq!(
            String::from_utf8(edges).unwrap(),
            "source,target\n0,1\n0,2\n1,3\n2,3\n"
        );
    }

    #[test]
    fn expectation_residual_vanishes_on_basis_states() {
        let inst = instance(&["A", "A"], 1);
        let table = inst.energy_table().unwrap();
        for i in 0..4 {
            let spec = AnsatzSpec::hea(2, 0);
            let theta = [
                if i & 0b10 != 0 { std::f64::consts::PI } else { 0.0 },
                if i & 0b01 != 0 { std::f64::consts::PI } else { 0.0 },
            ];
            let psi = spec.prepare(&theta, None).unwrap();
            assert_eq!(verify_expectation(&psi, &table).unwrap(), 0.0);
        }
    }

    #[test]
    fn expectation_residual_is_tiny_on_the_uniform_state() {
        let inst = instance(&["A", "A"], 1);
        let table = inst.energy_table().unwrap();
        let spec = AnsatzSpec::hea(2, 0);
        let psi = spec
            .prepare(&[std::f64::consts::FRAC_PI_2; 2], None)
            .unwrap();
        assert!(verify_expectation(&psi, &table).unwrap() < 1e-12);
    }

    #[test]
    fn expectation_residual_stays_below_tolerance_on_random_states() {
        let inst = instance(&["ACGTC", "ACGT"], 5);
        let table = inst.energy_table().unwrap();
        let spec = AnsatzSpec::hea(10, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..5 {
            let theta: Vec<f64> = (0..spec.param_count())
                .map(|_| rng.gen::<f64>() * std::f64::consts::TAU)
                .collect();
            let psi = spec.prepare(&theta, None).unwrap();
            assert!(verify_expectation(&psi, &table).unwrap() < 1e-9);
        }
    }

    #[test]
    fn optimizer_never_reports_below_the_oracle_floor() {
        let inst = instance(&["AG", "AG"], 2);
        let (oracle_min, _) = global_minimum(&inst, false).unwrap();
        let spec = AnsatzSpec::hea(4, 1);
        let opt = OptimizerConfig::new(GradientMethod::Spsa, 128, 30, 9);
        let trace = run_vqe(
            &inst,
            &spec,
            &opt,
            &CvarConfig::standard(),
            &NoiseConfig::noiseless(),
        )
        .unwrap();
        assert!(trace.best_energy >= oracle_min);
        assert_eq!(trace.best_energy, oracle_min, "4-qubit search should find the floor");
    }
}
