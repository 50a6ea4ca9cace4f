//! The named study protocols and the scaling timing report.
//!
//! A study derives a handful of arms (variant scenarios) from one base
//! config, runs each arm through [`run_scenario`], and emits per-arm result
//! trees plus a study-level summary holding the per-seed final-energy
//! distributions (violin/box source data) and the protocol's headline
//! analysis. Wall-clock comparisons live in `timing_summary.csv`, a sidecar
//! excluded from the byte-determinism guarantee like every timing file.

use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use qualign::{
    preset, run_vqe, welch_one_sided_less, AnsatzKind, AnsatzSpec, CvarConfig, GradientMethod,
    NoiseConfig, OptimizerConfig, WelchOutcome,
};

use crate::config::Resolved;
use crate::output::{self, fmt_f64};
use crate::scenario::{run_scenario, ScenarioResult, StateClass};

/// The four study protocols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyKind {
    EntanglementSweep,
    CvarCompare,
    QaoaVsHea,
    NoiseCompare,
}

impl StudyKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            StudyKind::EntanglementSweep => "entanglement-sweep",
            StudyKind::CvarCompare => "cvar-compare",
            StudyKind::QaoaVsHea => "qaoa-vs-hea",
            StudyKind::NoiseCompare => "noise-compare",
        }
    }

    pub const ALL: [StudyKind; 4] = [
        StudyKind::EntanglementSweep,
        StudyKind::CvarCompare,
        StudyKind::QaoaVsHea,
        StudyKind::NoiseCompare,
    ];
}

impl FromStr for StudyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StudyKind::ALL
            .iter()
            .find(|k| k.as_str() == s)
            .copied()
            .ok_or_else(|| {
                let names: Vec<&str> = StudyKind::ALL.iter().map(|k| k.as_str()).collect();
                format!("unknown study kind {s:?}; expected one of {}", names.join(", "))
            })
    }
}

/// One executed arm: its derived scenario and results.
#[derive(Debug)]
pub struct StudyArm {
    pub name: &'static str,
    pub resolved: Resolved,
    pub result: ScenarioResult,
}

/// A completed study.
#[derive(Debug)]
pub struct StudyResult {
    pub kind: StudyKind,
    pub arms: Vec<StudyArm>,
    pub analysis: Analysis,
}

/// The headline numbers each protocol exists to produce.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Analysis {
    EntanglementSweep {
        /// One-sided Welch test that mean final energy at d=1 is below d=0;
        /// absent with fewer than two seeds.
        #[serde(skip_serializing_if = "Option::is_none")]
        welch_d1_below_d0: Option<WelchOutcome>,
        /// Depth with the highest ground-state hit rate (first on ties).
        best_hit_rate_depth: usize,
    },
    CvarCompare {
        mean_two_stage: f64,
        mean_standard: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        welch_two_stage_below_standard: Option<WelchOutcome>,
    },
    QaoaVsHea {
        oracle_min: f64,
        qaoa_mean_final_energy: f64,
        hea_mean_final_energy: f64,
    },
    NoiseCompare {
        arms: Vec<NoiseArmSummary>,
    },
}

/// Modality bookkeeping for one noise-compare arm.
#[derive(Debug, Clone, Serialize)]
pub struct NoiseArmSummary {
    pub name: String,
    /// Modal state of the arm's pooled histogram.
    pub pooled_modal_state: String,
    pub pooled_modal_class: StateClass,
    /// Seeds whose own final modal state is a certified global minimizer.
    pub modal_hit_seeds: usize,
    pub seeds: usize,
}

/// Derives an arm scenario from the base: apply `mutate`, then point the
/// arm at its own subdirectory and refresh the canonical config.
fn derive_arm(base: &Resolved, name: &str, mutate: impl FnOnce(&mut Resolved)) -> Resolved {
    let mut arm = base.clone();
    mutate(&mut arm);
    arm.out_dir = base.out_dir.join(name);
    arm.rebuild_canonical();
    arm
}

fn run_arm(
    base: &Resolved,
    name: &'static str,
    mutate: impl FnOnce(&mut Resolved),
) -> qualign::Result<StudyArm> {
    let resolved = derive_arm(base, name, mutate);
    let result = run_scenario(&resolved)?;
    Ok(StudyArm {
        name,
        resolved,
        result,
    })
}

/// Runs a named study protocol off the base scenario.
///
/// Arm derivation rules:
/// - `entanglement-sweep`: HEA at d ∈ {0, 1, 2, 3}, everything else as
///   configured.
/// - `cvar-compare`: the configured CVaR schedule as the two-stage arm
///   (falling back to the (r0=0.6, warmup=100) schedule when the config is
///   not staged) versus fixed r = 1 at the same iteration budget.
/// - `qaoa-vs-hea`: both ansätze on the same instance; the configured layer
///   count carries over to its own kind, the counterpart uses p = 3 / d = 2.
///   A parameter-shift base switches to finite differences for the QAOA arm.
/// - `noise-compare`: noiseless (configured method), noisy under the
///   configured rates (default gate 1e-3 / readout 1e-2) with SPSA, and a
///   noiseless SPSA control.
pub fn run_study(kind: StudyKind, base: &Resolved) -> qualign::Result<StudyResult> {
    let arms = match kind {
        StudyKind::EntanglementSweep => {
            let n = base.instance.set().num_qubits();
            let mut arms = Vec::new();
            for (name, d) in [("d0", 0), ("d1", 1), ("d2", 2), ("d3", 3)] {
                arms.push(run_arm(base, name, |r| {
                    r.ansatz = AnsatzSpec::hea(n, d);
                })?);
            }
            arms
        }
        StudyKind::CvarCompare => {
            let staged = base.cvar.warmup_iters > 0 && base.cvar.r0 != base.cvar.r_final;
            let two_stage_schedule = if staged {
                base.cvar
            } else {
                CvarConfig::quenched()
            };
            vec![
                run_arm(base, "two-stage", |r| r.cvar = two_stage_schedule)?,
                run_arm(base, "standard", |r| r.cvar = CvarConfig::standard())?,
            ]
        }
        StudyKind::QaoaVsHea => {
            let n = base.instance.set().num_qubits();
            let (qaoa_rounds, hea_depth) = match base.ansatz.kind {
                AnsatzKind::Qaoa => (base.ansatz.layers, 2),
                AnsatzKind::Hea => (3, base.ansatz.layers),
            };
            vec![
                run_arm(base, "qaoa", |r| {
                    r.ansatz = AnsatzSpec::qaoa(n, qaoa_rounds);
                    if r.optimizer.method == GradientMethod::ParameterShift {
                        r.optimizer.method = GradientMethod::FiniteDifference;
                    }
                })?,
                run_arm(base, "hea", |r| {
                    r.ansatz = AnsatzSpec::hea(n, hea_depth);
                })?,
            ]
        }
        StudyKind::NoiseCompare => {
            let noisy = if base.noise.is_noiseless() {
                NoiseConfig::new(1e-3, 1e-2).expect("default noise rates are valid")
            } else {
                base.noise
            };
            vec![
                run_arm(base, "noiseless", |r| {
                    r.noise = NoiseConfig::noiseless();
                })?,
                run_arm(base, "noisy", |r| {
                    r.noise = noisy;
                    r.optimizer.method = GradientMethod::Spsa;
                })?,
                run_arm(base, "noiseless-spsa", |r| {
                    r.noise = NoiseConfig::noiseless();
                    r.optimizer.method = GradientMethod::Spsa;
                })?,
            ]
        }
    };

    let analysis = analyze(kind, &arms)?;
    Ok(StudyResult {
        kind,
        arms,
        analysis,
    })
}

fn final_energies(arm: &StudyArm) -> Vec<f64> {
    arm.result.outcomes.iter().map(|o| o.final_energy).collect()
}

fn welch_less(a: &StudyArm, b: &StudyArm) -> Option<WelchOutcome> {
    welch_one_sided_less(&final_energies(a), &final_energies(b)).ok()
}

fn analyze(kind: StudyKind, arms: &[StudyArm]) -> qualign::Result<Analysis> {
    Ok(match kind {
        StudyKind::EntanglementSweep => {
            let best_hit_rate_depth = arms
                .iter()
                .enumerate()
                .max_by(|(_, a), (_, b)| {
                    let ra = a.result.aggregate.hit_rate.unwrap_or(0.0);
                    let rb = b.result.aggregate.hit_rate.unwrap_or(0.0);
                    ra.total_cmp(&rb)
                })
                .map(|(d, _)| d)
                .unwrap_or(0);
            Analysis::EntanglementSweep {
                welch_d1_below_d0: welch_less(&arms[1], &arms[0]),
                best_hit_rate_depth,
            }
        }
        StudyKind::CvarCompare => Analysis::CvarCompare {
            mean_two_stage: arms[0].result.aggregate.mean_final_energy,
            mean_standard: arms[1].result.aggregate.mean_final_energy,
            welch_two_stage_below_standard: welch_less(&arms[0], &arms[1]),
        },
        StudyKind::QaoaVsHea => {
            let oracle_min = arms[0]
                .result
                .oracle
                .as_ref()
                .map(|r| r.global_energy)
                .unwrap_or(f64::NAN);
            Analysis::QaoaVsHea {
                oracle_min,
                qaoa_mean_final_energy: arms[0].result.aggregate.mean_final_energy,
                hea_mean_final_energy: arms[1].result.aggregate.mean_final_energy,
            }
        }
        StudyKind::NoiseCompare => {
            let summaries = arms
                .iter()
                .map(|arm| {
                    let n = arm.resolved.instance.set().num_qubits();
                    let modal = arm.result.pooled.modal_state();
                    let report = arm.result.oracle.as_ref();
                    let hits = report.map_or(0, |rep| {
                        arm.result
                            .outcomes
                            .iter()
                            .filter(|o| rep.is_global(o.modal_index))
                            .count()
                    });
                    NoiseArmSummary {
                        name: arm.name.to_string(),
                        pooled_modal_state: output::bitstring(modal, n),
                        pooled_modal_class: StateClass::classify(
                            modal,
                            &arm.resolved.instance,
                            report,
                        ),
                        modal_hit_seeds: hits,
                        seeds: arm.result.outcomes.len(),
                    }
                })
                .collect();
            Analysis::NoiseCompare { arms: summaries }
        }
    })
}

#[derive(Serialize)]
struct ArmJson<'a> {
    name: &'a str,
    directory: String,
    aggregate: &'a crate::scenario::Aggregate,
    /// Per-seed final energies in seed order: the violin/box source data.
    final_energies: Vec<f64>,
}

#[derive(Serialize)]
struct StudySummaryJson<'a> {
    kind: StudyKind,
    config: &'a crate::config::ScenarioConfig,
    arms: Vec<ArmJson<'a>>,
    analysis: &'a Analysis,
}

impl StudyResult {
    /// Writes each arm's full result tree into `dir/<arm>/`, then the study
    /// summary (`study_summary.json` / `.csv`) and the wall-clock sidecar
    /// (`timing_summary.csv`) into `dir` itself.
    pub fn write(&self, dir: &Path, base: &Resolved) -> qualign::Result<()> {
        std::fs::create_dir_all(dir)?;
        for arm in &self.arms {
            let arm_dir = dir.join(arm.name);
            arm.result.write(&arm_dir, &arm.resolved)?;
        }

        let formats = base.formats;
        if formats.json {
            let summary = StudySummaryJson {
                kind: self.kind,
                config: &base.canonical,
                arms: self
                    .arms
                    .iter()
                    .map(|arm| ArmJson {
                        name: arm.name,
                        directory: arm.name.to_string(),
                        aggregate: &arm.result.aggregate,
                        final_energies: final_energies(arm),
                    })
                    .collect(),
                analysis: &self.analysis,
            };
            output::write_json(&dir.join("study_summary.json"), &summary)?;
        }
        if formats.csv {
            output::write_with(&dir.join("study_summary.csv"), |out| {
                writeln!(
                    out,
                    "arm,mean_final_energy,median_final_energy,std_final_energy,hit_rate,best_energy"
                )?;
                for arm in &self.arms {
                    let agg = &arm.result.aggregate;
                    writeln!(
                        out,
                        "{},{},{},{},{},{}",
                        arm.name,
                        fmt_f64(agg.mean_final_energy),
                        fmt_f64(agg.median_final_energy),
                        fmt_f64(agg.std_final_energy),
                        agg.hit_rate.map_or_else(String::new, fmt_f64),
                        fmt_f64(agg.best_energy),
                    )?;
                }
                Ok(())
            })?;
        }

        output::write_with(&dir.join("timing_summary.csv"), |out| {
            writeln!(out, "arm,mean_seconds_per_iteration")?;
            for arm in &self.arms {
                writeln!(
                    out,
                    "{},{}",
                    arm.name,
                    arm.result
                        .mean_iteration_seconds()
                        .map_or_else(String::new, fmt_f64)
                )?;
            }
            Ok(())
        })?;
        Ok(())
    }
}

/// One row of the scaling report.
#[derive(Debug, Clone, Serialize)]
pub struct TimingRow {
    pub num_qubits: usize,
    pub iterations: usize,
    pub mean_seconds_per_iteration: f64,
    pub std_seconds_per_iteration: f64,
}

/// The instances behind the scaling report, one per register width.
const TIMING_PRESETS: [(&str, usize); 4] = [
    ("dna-pair-4q", 4),
    ("dna-pair-8q", 8),
    ("dna-trio-12q", 12),
    ("dna-quad-16q", 16),
];

/// Measures mean wall-clock per optimization iteration at n = 4, 8, 12, 16
/// qubits (HEA d=2, seed 0, the given gradient method and shot count) and
/// writes `timing_report.csv` plus the raw per-iteration samples to
/// `timing_raw.csv`, so the report is recomputable from emitted data. Both
/// files are timing sidecars: deterministic in shape, not in value.
pub fn timing_report(
    dir: &Path,
    method: GradientMethod,
    shots: u64,
    iterations: usize,
) -> qualign::Result<Vec<TimingRow>> {
    std::fs::create_dir_all(dir)?;
    let mut rows = Vec::new();
    let mut raw: Vec<(usize, Vec<f64>)> = Vec::new();
    for (name, n) in TIMING_PRESETS {
        let p = preset(name).expect("timing preset exists");
        debug_assert_eq!(p.num_qubits(), n);
        let instance = p.instance();
        let spec = AnsatzSpec::hea(n, 2);
        let opt = OptimizerConfig::new(method, shots, iterations, 0);
        let trace = run_vqe(
            &instance,
            &spec,
            &opt,
            &CvarConfig::standard(),
            &NoiseConfig::noiseless(),
        )?;
        let secs = trace.iteration_seconds.clone();
        let mean_s = qualign::mean(&secs);
        let std_s = if secs.len() > 1 {
            qualign::std_dev(&secs)
        } else {
            0.0
        };
        rows.push(TimingRow {
            num_qubits: n,
            iterations: secs.len(),
            mean_seconds_per_iteration: mean_s,
            std_seconds_per_iteration: std_s,
        });
        raw.push((n, secs));
    }

    output::write_with(&dir.join("timing_report.csv"), |out| {
        writeln!(
            out,
            "num_qubits,iterations,mean_seconds_per_iteration,std_seconds_per_iteration"
        )?;
        for r in &rows {
            writeln!(
                out,
                "{},{},{},{}",
                r.num_qubits,
                r.iterations,
                fmt_f64(r.mean_seconds_per_iteration),
                fmt_f64(r.std_seconds_per_iteration)
            )?;
        }
        Ok(())
    })?;
    output::write_with(&dir.join("timing_raw.csv"), |out| {
        writeln!(out, "num_qubits,iteration,seconds")?;
        for (n, secs) in &raw {
            for (i, s) in secs.iter().enumerate() {
                writeln!(out, "{n},{i},{}", fmt_f64(*s))?;
            }
        }
        Ok(())
    })?;
    Ok(rows)
}
