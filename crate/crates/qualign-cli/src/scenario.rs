//! Scenario execution: one `run_vqe` per seed, oracle classification,
//! aggregation, and file emission.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use qualign::oracle::ENUM_CAP;
use qualign::{
    brute_force_min, mean, run_vqe, std_dev, Instance, MinimaReport, ShotTable, TrainingTrace,
};

use crate::config::Resolved;
use crate::output::{self, bitstring, fmt_f64, Histogram};

/// Oracle-backed classification of a sampled basis state. `Optimal` is
/// assigned only when a brute-force report certifies the state as a global
/// minimizer — never by heuristic. Without a report (instance over the
/// enumeration cap) states are split into feasible/infeasible by the exact
/// per-sequence letter-count rule, and no state is called optimal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StateClass {
    Optimal,
    Feasible,
    Infeasible,
}

impl StateClass {
    pub fn classify(state: usize, instance: &Instance, oracle: Option<&MinimaReport>) -> Self {
        if let Some(report) = oracle {
            if report.is_global(state) {
                return StateClass::Optimal;
            }
        }
        if instance.is_feasible_index(state) {
            StateClass::Feasible
        } else {
            StateClass::Infeasible
        }
    }
}

impl fmt::Display for StateClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StateClass::Optimal => "optimal",
            StateClass::Feasible => "feasible",
            StateClass::Infeasible => "infeasible",
        })
    }
}

/// Everything one seeded run produced.
#[derive(Debug, Clone)]
pub struct SeedOutcome {
    pub seed: u64,
    pub trace: TrainingTrace,
    /// ⟨H⟩ at the final parameters: exact when the run is noiseless,
    /// otherwise the final shot table's sample mean.
    pub final_energy: f64,
    pub final_energy_is_exact: bool,
    /// Final CVaR loss at the schedule's last ratio.
    pub final_loss: f64,
    pub best_energy: f64,
    pub best_index: usize,
    pub modal_index: usize,
}

/// Aggregate statistics over the per-seed outcomes. Every number here is
/// recomputable from the per-seed rows shipped alongside.
#[derive(Debug, Clone, Serialize)]
pub struct Aggregate {
    pub mean_final_energy: f64,
    pub median_final_energy: f64,
    pub std_final_energy: f64,
    /// Fraction of seeds whose final modal state is a certified global
    /// minimizer; absent without an oracle report.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hit_rate: Option<f64>,
    /// Lowest sampled energy across all seeds and iterations.
    pub best_energy: f64,
}

/// A completed scenario: per-seed outcomes in seed-list order plus the
/// oracle report and pooled histogram.
#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub outcomes: Vec<SeedOutcome>,
    pub oracle: Option<MinimaReport>,
    /// Final shot tables of all seeds summed into one table.
    pub pooled: ShotTable,
    pub aggregate: Aggregate,
}

/// Runs every seed of the resolved scenario in a parallel pool; results are
/// reduced in seed-list order, so the outcome (and every file emitted from
/// it) is independent of the worker count.
pub fn run_scenario(resolved: &Resolved) -> qualign::Result<ScenarioResult> {
    let oracle = if resolved.instance.set().num_qubits() <= ENUM_CAP {
        Some(brute_force_min(&resolved.instance, false)?)
    } else {
        None
    };

    let outcomes: Vec<SeedOutcome> = resolved
        .seeds
        .par_iter()
        .map(|&seed| run_seed(resolved, seed))
        .collect::<qualign::Result<Vec<_>>>()?;

    let n = resolved.instance.set().num_qubits();
    let mut pooled: BTreeMap<usize, u64> = BTreeMap::new();
    for outcome in &outcomes {
        for (&state, &count) in outcome.trace.final_record().shots.counts() {
            *pooled.entry(state).or_insert(0) += count;
        }
    }
    let pooled = ShotTable::from_counts(pooled, n);

    let finals: Vec<f64> = outcomes.iter().map(|o| o.final_energy).collect();
    let hit_rate = oracle.as_ref().map(|report| {
        let hits = outcomes
            .iter()
            .filter(|o| report.is_global(o.modal_index))
            .count();
        hits as f64 / outcomes.len() as f64
    });
    let best_energy = outcomes
        .iter()
        .map(|o| o.best_energy)
        .fold(f64::INFINITY, f64::min);
    let aggregate = Aggregate {
        mean_final_energy: mean(&finals),
        median_final_energy: median(&finals),
        std_final_energy: if finals.len() > 1 { std_dev(&finals) } else { 0.0 },
        hit_rate,
        best_energy,
    };

    Ok(ScenarioResult {
        outcomes,
        oracle,
        pooled,
        aggregate,
    })
}

fn run_seed(resolved: &Resolved, seed: u64) -> qualign::Result<SeedOutcome> {
    let mut opt = resolved.optimizer;
    opt.seed = seed;
    let trace = run_vqe(
        &resolved.instance,
        &resolved.ansatz,
        &opt,
        &resolved.cvar,
        &resolved.noise,
    )?;
    let last = trace.final_record();
    let (final_energy, final_energy_is_exact) = match last.exact_energy {
        Some(e) => (e, true),
        None => (last.shots.mean_energy(&resolved.instance), false),
    };
    let final_loss = last.loss;
    let modal_index = last.shots.modal_state();
    let best_energy = trace.best_energy;
    let best_index = trace.best_index;
    Ok(SeedOutcome {
        seed,
        trace,
        final_energy,
        final_energy_is_exact,
        final_loss,
        best_energy,
        best_index,
        modal_index,
    })
}

fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    if m % 2 == 1 {
        sorted[m / 2]
    } else {
        0.5 * (sorted[m / 2 - 1] + sorted[m / 2])
    }
}

#[derive(Serialize)]
struct OracleSummary {
    available: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    global_energy: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    global_states: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    local_minima: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    flat_nodes: Option<usize>,
}

#[derive(Serialize)]
struct SeedRow {
    seed: u64,
    final_energy: f64,
    final_energy_is_exact: bool,
    final_loss: f64,
    best_energy: f64,
    best_state: String,
    modal_state: String,
    modal_class: StateClass,
}

#[derive(Serialize)]
struct SummaryJson<'a> {
    config: &'a crate::config::ScenarioConfig,
    oracle: OracleSummary,
    seeds: Vec<SeedRow>,
    aggregate: &'a Aggregate,
}

impl ScenarioResult {
    pub fn pooled_histogram(&self, instance: &Instance) -> Histogram {
        output::histogram(&self.pooled, instance, self.oracle.as_ref())
    }

    fn seed_rows(&self, n: usize, instance: &Instance) -> Vec<SeedRow> {
        self.outcomes
            .iter()
            .map(|o| SeedRow {
                seed: o.seed,
                final_energy: o.final_energy,
                final_energy_is_exact: o.final_energy_is_exact,
                final_loss: o.final_loss,
                best_energy: o.best_energy,
                best_state: bitstring(o.best_index, n),
                modal_state: bitstring(o.modal_index, n),
                modal_class: StateClass::classify(o.modal_index, instance, self.oracle.as_ref()),
            })
            .collect()
    }

    /// Writes every result file for this scenario into `dir`:
    ///
    /// - `resolved.toml` — the canonical config (always)
    /// - `summary.json` / `summary.csv` — per-seed rows plus aggregates
    /// - `histogram_seed<seed>.*` and `histogram_pooled.*` — full tables
    /// - `trace_seed<seed>.jsonl` (json) / `trace_seed<seed>.csv` (csv)
    /// - `timing.csv` — wall-clock sidecar, the one non-deterministic file
    pub fn write(&self, dir: &Path, resolved: &Resolved) -> qualign::Result<()> {
        std::fs::create_dir_all(dir)?;
        let n = resolved.instance.set().num_qubits();
        let formats = resolved.formats;

        std::fs::write(dir.join("resolved.toml"), resolved.canonical_toml())?;

        if formats.json {
            let oracle = match &self.oracle {
                Some(r) => OracleSummary {
                    available: true,
                    global_energy: Some(r.global_energy),
                    global_states: r.global_states.iter().map(|&s| bitstring(s, n)).collect(),
                    local_minima: Some(r.local_minima.len()),
                    flat_nodes: Some(r.flat_nodes.len()),
                },
                None => OracleSummary {
                    available: false,
                    global_energy: None,
                    global_states: Vec::new(),
                    local_minima: None,
                    flat_nodes: None,
                },
            };
            let summary = SummaryJson {
                config: &resolved.canonical,
                oracle,
                seeds: self.seed_rows(n, &resolved.instance),
                aggregate: &self.aggregate,
            };
            output::write_json(&dir.join("summary.json"), &summary)?;
        }
        if formats.csv {
            output::write_with(&dir.join("summary.csv"), |out| {
                self.write_summary_csv(out, n, &resolved.instance)
            })?;
        }

        for outcome in &self.outcomes {
            let table = &outcome.trace.final_record().shots;
            let hist = output::histogram(table, &resolved.instance, self.oracle.as_ref());
            let stem = format!("histogram_seed{}", outcome.seed);
            if formats.json {
                output::write_json(&dir.join(format!("{stem}.json")), &hist)?;
            }
            if formats.csv {
                output::write_with(&dir.join(format!("{stem}.csv")), |out| hist.write_csv(out))?;
            }
            if formats.json {
                let file = std::fs::File::create(dir.join(format!("trace_seed{}.jsonl", outcome.seed)))?;
                outcome.trace.write_jsonl(std::io::BufWriter::new(file))?;
            }
            if formats.csv {
                let file = std::fs::File::create(dir.join(format!("trace_seed{}.csv", outcome.seed)))?;
                outcome.trace.write_summary_csv(std::io::BufWriter::new(file))?;
            }
        }

        let pooled = self.pooled_histogram(&resolved.instance);
        if formats.json {
            output::write_json(&dir.join("histogram_pooled.json"), &pooled)?;
        }
        if formats.csv {
            output::write_with(&dir.join("histogram_pooled.csv"), |out| {
                pooled.write_csv(out)
            })?;
        }

        output::write_with(&dir.join("timing.csv"), |out| self.write_timing_csv(out))?;
        Ok(())
    }

    fn write_summary_csv<W: Write>(
        &self,
        out: &mut W,
        n: usize,
        instance: &Instance,
    ) -> std::io::Result<()> {
        writeln!(
            out,
            "seed,final_energy,final_energy_is_exact,final_loss,best_energy,best_state,modal_state,modal_class"
        )?;
        for row in self.seed_rows(n, instance) {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                row.seed,
                fmt_f64(row.final_energy),
                row.final_energy_is_exact,
                fmt_f64(row.final_loss),
                fmt_f64(row.best_energy),
                row.best_state,
                row.modal_state,
                row.modal_class
            )?;
        }
        Ok(())
    }

    /// Wall-clock per iteration, per seed. Timing is environment noise by
    /// nature, so this sidecar is excluded from the determinism guarantee.
    fn write_timing_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "seed,iterations,mean_seconds_per_iteration,std_seconds_per_iteration")?;
        for o in &self.outcomes {
            let secs = &o.trace.iteration_seconds;
            if secs.is_empty() {
                writeln!(out, "{},0,,", o.seed)?;
            } else {
                let sd = if secs.len() > 1 { std_dev(secs) } else { 0.0 };
                writeln!(
                    out,
                    "{},{},{},{}",
                    o.seed,
                    secs.len(),
                    fmt_f64(mean(secs)),
                    fmt_f64(sd)
                )?;
            }
        }
        Ok(())
    }

    /// Mean seconds per optimization iteration across all seeds; `None`
    /// when the scenario ran zero iterations.
    pub fn mean_iteration_seconds(&self) -> Option<f64> {
        let all: Vec<f64> = self
            .outcomes
            .iter()
            .flat_map(|o| o.trace.iteration_seconds.iter().copied())
            .collect();
        if all.is_empty() {
            None
        } else {
            Some(mean(&all))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{CliOverrides, ScenarioConfig};

    fn tiny_resolved(dir: &Path) -> Resolved {
        let text = r#"
            version = 1
            [instance]
            sequences = ["AC", "AC"]
            padded_len = 2
            [ansatz]
            kind = "hea"
            layers = 1
            [optimizer]
            method = "parameter-shift"
            shots = 256
            iterations = 5
            [seeds]
            list = [0, 1, 2]
        "#;
        let cfg: ScenarioConfig = toml::from_str(text).unwrap();
        let overrides = CliOverrides {
            out_dir: Some(dir.to_path_buf()),
            ..CliOverrides::default()
        };
        cfg.resolve(dir, &overrides).unwrap()
    }

    #[test]
    fn classify_requires_oracle_for_optimal() {
        let resolved = tiny_resolved(Path::new("."));
        let instance = &resolved.instance;
        let report = brute_force_min(instance, false).unwrap();
        let optimum = report.global_states[0];
        assert_eq!(
            StateClass::classify(optimum, instance, Some(&report)),
            StateClass::Optimal
        );
        // Without the oracle the same state can only be called feasible.
        assert_eq!(
            StateClass::classify(optimum, instance, None),
            StateClass::Feasible
        );
    }

    #[test]
    fn median_handles_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn scenario_aggregates_match_per_seed_data() {
        let dir = tempfile::tempdir().unwrap();
        let resolved = tiny_resolved(dir.path());
        let result = run_scenario(&resolved).unwrap();
        assert_eq!(result.outcomes.len(), 3);

        let finals: Vec<f64> = result.outcomes.iter().map(|o| o.final_energy).collect();
        assert!((result.aggregate.mean_final_energy - mean(&finals)).abs() < 1e-15);

        let pooled_shots: u64 = result.pooled.shots();
        assert_eq!(pooled_shots, 3 * 256);

        let report = result.oracle.as_ref().unwrap();
        let hits = result
            .outcomes
            .iter()
            .filter(|o| report.is_global(o.modal_index))
            .count();
        assert_eq!(
            result.aggregate.hit_rate.unwrap(),
            hits as f64 / 3.0
        );
    }

    #[test]
    fn written_files_cover_every_seed() {
        let dir = tempfile::tempdir().unwrap();
        let resolved = tiny_resolved(dir.path());
        let result = run_scenario(&resolved).unwrap();
        result.write(dir.path(), &resolved).unwrap();
        for name in [
            "resolved.toml",
            "summary.json",
            "summary.csv",
            "histogram_pooled.json",
            "histogram_pooled.csv",
            "timing.csv",
        ] {
            assert!(dir.path().join(name).exists(), "missing {name}");
        }
        for seed in [0, 1, 2] {
            for name in [
                format!("histogram_seed{seed}.json"),
                format!("histogram_seed{seed}.csv"),
                format!("trace_seed{seed}.jsonl"),
                format!("trace_seed{seed}.csv"),
            ] {
                assert!(dir.path().join(&name).exists(), "missing {name}");
            }
        }
    }
}
