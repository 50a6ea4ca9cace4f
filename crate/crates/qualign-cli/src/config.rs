//! The scenario config: a versioned TOML schema that resolves into ready
//! `qualign` objects after validation.
//!
//! Schema (version 1):
//!
//! ```toml
//! version = 1
//!
//! [instance]
//! sequences = ["AAKGT", "AT", "AKG", "KT"]  # or: sequences_path = "seqs.fasta"
//! padded_len = 5
//! penalty = 1.5                             # optional, default 1.5
//!
//! [ansatz]
//! kind = "hea"                              # "hea" | "qaoa"
//! layers = 2                                # entangling layers d / QAOA rounds p
//! topology = "linear"                       # optional; only "linear" exists
//!
//! [optimizer]
//! method = "parameter-shift"                # | "finite-difference" | "spsa"
//! shots = 2000
//! iterations = 400
//! # [optimizer.adam] step/beta1/beta2/epsilon, [optimizer.spsa] a/c/stability
//!
//! [cvar]                                    # optional; default fixed r = 1
//! r0 = 0.6
//! warmup = 100
//! r_final = 1.0
//!
//! [noise]                                   # optional; absent = noiseless
//! gate = 0.001
//! readout = 0.01
//!
//! [seeds]                                   # exactly one of the two forms
//! list = [0, 1, 2]
//! # count = 50                              # expands to 0..count
//!
//! [output]
//! directory = "runs/demo"                   # optional, default "."
//! formats = ["json", "csv"]                 # optional, default both
//! ```
//!
//! Unknown keys anywhere are hard errors, as are values that violate any
//! precondition of the solver modules; validation happens before any
//! compute, and every message names the offending field.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use qualign::scoring::DEFAULT_TABLE_CAP;
use qualign::{
    AnsatzKind, AnsatzSpec, CvarConfig, GradientMethod, Instance, NoiseConfig, OptimizerConfig,
    Penalty, SequenceSet,
};

/// The config schema revision this build reads.
pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("config version {got} is not supported (this build reads version {want})")]
    Version { got: u32, want: u32 },
    #[error("[{field}] {message}")]
    Field { field: String, message: String },
}

impl ConfigError {
    fn field(field: &str, message: impl fmt::Display) -> Self {
        ConfigError::Field {
            field: field.to_string(),
            message: message.to_string(),
        }
    }
}

/// Top-level deserialized scenario config. `resolve` turns it into live
/// solver objects; `canonicalize` (on [`Resolved`]) produces the fully
/// explicit copy embedded in every emitted result.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub version: u32,
    pub instance: InstanceSection,
    pub ansatz: AnsatzSection,
    pub optimizer: OptimizerSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cvar: Option<CvarSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSection>,
    pub seeds: SeedsSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequences: Option<Vec<String>>,
    /// FASTA file alternative to inline `sequences`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequences_path: Option<PathBuf>,
    pub padded_len: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub penalty: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzSection {
    pub kind: AnsatzKind,
    pub layers: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    pub method: GradientMethod,
    pub shots: u64,
    pub iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adam: Option<AdamSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spsa: Option<SpsaSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdamSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpsaSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stability: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CvarSection {
    pub r0: f64,
    pub warmup: usize,
    pub r_final: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub gate: f64,
    pub readout: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedsSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub list: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directory: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formats: Option<Vec<String>>,
}

/// Command-line overrides applied on top of the file config during
/// resolution. `None`/empty means "keep the file's value".
#[derive(Debug, Clone, Default)]
pub struct CliOverrides {
    pub seeds: Vec<u64>,
    pub shots: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub formats: Vec<String>,
}

/// Which result encodings to emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Formats {
    pub json: bool,
    pub csv: bool,
}

impl Formats {
    fn from_names(names: &[String], field: &str) -> Result<Self, ConfigError> {
        let mut f = Formats {
            json: false,
            csv: false,
        };
        for name in names {
            match name.as_str() {
                "json" => f.json = true,
                "csv" => f.csv = true,
                other => {
                    return Err(ConfigError::field(
                        field,
                        format!("unknown format {other:?}; expected \"json\" or \"csv\""),
                    ))
                }
            }
        }
        if !f.json && !f.csv {
            return Err(ConfigError::field(field, "at least one format is required"));
        }
        Ok(f)
    }

    pub fn names(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.json {
            v.push("json".to_string());
        }
        if self.csv {
            v.push("csv".to_string());
        }
        v
    }
}

/// A validated scenario, ready to run: live solver objects plus the
/// canonical config that reproduces them.
#[derive(Debug, Clone)]
pub struct Resolved {
    /// Fully explicit config: sequences inlined, seeds expanded, every
    /// default materialized. Re-running this config reproduces the result.
    pub canonical: ScenarioConfig,
    pub instance: Instance,
    pub ansatz: AnsatzSpec,
    /// Per-run template; `seed` is overwritten for each run.
    pub optimizer: OptimizerConfig,
    pub cvar: CvarConfig,
    pub noise: NoiseConfig,
    pub seeds: Vec<u64>,
    pub out_dir: PathBuf,
    pub formats: Formats,
}

impl ScenarioConfig {
    /// Reads and parses a TOML config file. Parsing rejects unknown keys;
    /// semantic validation happens in [`resolve`](Self::resolve).
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(toml::from_str(&text)?)
    }

    /// Validates every field against the solver preconditions and builds
    /// the live objects. `base_dir` anchors relative paths in the config
    /// (normally the config file's directory).
    pub fn resolve(&self, base_dir: &Path, overrides: &CliOverrides) -> Result<Resolved, ConfigError> {
        if self.version != CONFIG_VERSION {
            return Err(ConfigError::Version {
                got: self.version,
                want: CONFIG_VERSION,
            });
        }

        // Instance.
        let sequences: Vec<String> = match (&self.instance.sequences, &self.instance.sequences_path)
        {
            (Some(_), Some(_)) => {
                return Err(ConfigError::field(
                    "instance.sequences",
                    "give either inline sequences or sequences_path, not both",
                ))
            }
            (None, None) => {
                return Err(ConfigError::field(
                    "instance.sequences",
                    "one of sequences or sequences_path is required",
                ))
            }
            (Some(seqs), None) => seqs.clone(),
            (None, Some(rel)) => {
                let path = base_dir.join(rel);
                let set = SequenceSet::from_fasta(&path).map_err(|e| {
                    ConfigError::field("instance.sequences_path", format!("{}: {e}", path.display()))
                })?;
                (0..set.num_sequences()).map(|i| set.sequence_str(i)).collect()
            }
        };
        let set = SequenceSet::with_padded_len(&sequences, self.instance.padded_len)
            .map_err(|e| ConfigError::field("instance", e))?;
        let penalty_value = self.instance.penalty.unwrap_or(1.5);
        let penalty =
            Penalty::new(penalty_value).map_err(|e| ConfigError::field("instance.penalty", e))?;
        let instance = Instance::new(set, penalty);
        let n = instance.set().num_qubits();
        if n > DEFAULT_TABLE_CAP {
            return Err(ConfigError::field(
                "instance",
                format!("{n} qubits exceeds the dense simulation cap of {DEFAULT_TABLE_CAP}"),
            ));
        }

        // Ansatz.
        if let Some(topology) = &self.ansatz.topology {
            if topology != "linear" {
                return Err(ConfigError::field(
                    "ansatz.topology",
                    format!("unknown topology {topology:?}; only \"linear\" is supported"),
                ));
            }
        }
        let ansatz = match self.ansatz.kind {
            AnsatzKind::Hea => AnsatzSpec::hea(n, self.ansatz.layers),
            AnsatzKind::Qaoa => {
                if self.ansatz.layers == 0 {
                    return Err(ConfigError::field(
                        "ansatz.layers",
                        "qaoa needs at least one round",
                    ));
                }
                AnsatzSpec::qaoa(n, self.ansatz.layers)
            }
        };

        // Optimizer.
        if self.ansatz.kind == AnsatzKind::Qaoa
            && self.optimizer.method == GradientMethod::ParameterShift
        {
            return Err(ConfigError::field(
                "optimizer.method",
                "parameter-shift applies only to the hea ansatz; use finite-difference or spsa",
            ));
        }
        let shots = overrides.shots.unwrap_or(self.optimizer.shots);
        let mut optimizer =
            OptimizerConfig::new(self.optimizer.method, shots, self.optimizer.iterations, 0);
        if let Some(adam) = &self.optimizer.adam {
            if let Some(v) = adam.step {
                optimizer.adam.step = v;
            }
            if let Some(v) = adam.beta1 {
                optimizer.adam.beta1 = v;
            }
            if let Some(v) = adam.beta2 {
                optimizer.adam.beta2 = v;
            }
            if let Some(v) = adam.epsilon {
                optimizer.adam.epsilon = v;
            }
        }
        if let Some(spsa) = &self.optimizer.spsa {
            if let Some(v) = spsa.a {
                optimizer.spsa.a = v;
            }
            if let Some(v) = spsa.c {
                optimizer.spsa.c = v;
            }
            if let Some(v) = spsa.stability {
                optimizer.spsa.stability = v;
            }
        }
        optimizer
            .validate()
            .map_err(|e| ConfigError::field("optimizer", e))?;

        // CVaR schedule; absent means the plain expectation throughout.
        let cvar = match &self.cvar {
            Some(c) => CvarConfig::new(c.r0, c.warmup, c.r_final)
                .map_err(|e| ConfigError::field("cvar", e))?,
            None => CvarConfig::standard(),
        };

        // Noise.
        let noise = match &self.noise {
            Some(noise) => NoiseConfig::new(noise.gate, noise.readout)
                .map_err(|e| ConfigError::field("noise", e))?,
            None => NoiseConfig::noiseless(),
        };

        // Seeds.
        let seeds: Vec<u64> = if !overrides.seeds.is_empty() {
            overrides.seeds.clone()
        } else {
            match (&self.seeds.list, &self.seeds.count) {
                (Some(_), Some(_)) => {
                    return Err(ConfigError::field(
                        "seeds",
                        "give either list or count, not both",
                    ))
                }
                (None, None) => {
                    return Err(ConfigError::field("seeds", "one of list or count is required"))
                }
                (Some(list), None) => list.clone(),
                (None, Some(count)) => (0..*count).collect(),
            }
        };
        if seeds.is_empty() {
            return Err(ConfigError::field("seeds", "at least one seed is required"));
        }
        let mut unique = seeds.clone();
        unique.sort_unstable();
        unique.dedup();
        if unique.len() != seeds.len() {
            return Err(ConfigError::field(
                "seeds",
                "duplicate seeds would overwrite each other's result files",
            ));
        }

        // Output.
        let out_section = self.output.clone().unwrap_or(OutputSection {
            directory: None,
            formats: None,
        });
        let out_dir = normalize_path(
            &overrides
                .out_dir
                .clone()
                .or_else(|| out_section.directory.clone().map(|d| base_dir.join(d)))
                .unwrap_or_else(|| PathBuf::from(".")),
        );
        let format_names: Vec<String> = if !overrides.formats.is_empty() {
            overrides.formats.clone()
        } else {
            out_section
                .formats
                .clone()
                .unwrap_or_else(|| vec!["json".to_string(), "csv".to_string()])
        };
        let formats = Formats::from_names(&format_names, "output.formats")?;

        let mut resolved = Resolved {
            canonical: self.clone(),
            instance,
            ansatz,
            optimizer,
            cvar,
            noise,
            seeds,
            out_dir,
            formats,
        };
        resolved.rebuild_canonical();
        Ok(resolved)
    }
}

/// Drops redundant `.` components so that repeated resolve→emit cycles
/// produce the same directory text instead of accreting "./" prefixes.
fn normalize_path(path: &Path) -> PathBuf {
    let cleaned: PathBuf = path
        .components()
        .filter(|c| !matches!(c, std::path::Component::CurDir))
        .collect();
    if cleaned.as_os_str().is_empty() {
        PathBuf::from(".")
    } else {
        cleaned
    }
}

impl Resolved {
    /// The canonical config as TOML text, as written to `resolved.toml`.
    pub fn canonical_toml(&self) -> String {
        toml::to_string_pretty(&self.canonical).expect("canonical config serializes")
    }

    /// Recomputes the canonical config from the live solver objects. Study
    /// protocols call this after deriving an arm from a base scenario, so
    /// the `resolved.toml` written next to each arm reproduces that arm
    /// exactly.
    pub fn rebuild_canonical(&mut self) {
        let set = self.instance.set();
        let sequences: Vec<String> = (0..set.num_sequences())
            .map(|i| set.sequence_str(i))
            .collect();
        self.canonical = ScenarioConfig {
            version: CONFIG_VERSION,
            instance: InstanceSection {
                sequences: Some(sequences),
                sequences_path: None,
                padded_len: set.padded_len(),
                penalty: Some(self.instance.penalty_weight().value()),
            },
            ansatz: AnsatzSection {
                kind: self.ansatz.kind,
                layers: self.ansatz.layers,
                topology: Some("linear".to_string()),
            },
            optimizer: OptimizerSection {
                method: self.optimizer.method,
                shots: self.optimizer.shots,
                iterations: self.optimizer.max_iters,
                adam: Some(AdamSection {
                    step: Some(self.optimizer.adam.step),
                    beta1: Some(self.optimizer.adam.beta1),
                    beta2: Some(self.optimizer.adam.beta2),
                    epsilon: Some(self.optimizer.adam.epsilon),
                }),
                spsa: Some(SpsaSection {
                    a: Some(self.optimizer.spsa.a),
                    c: Some(self.optimizer.spsa.c),
                    stability: Some(self.optimizer.spsa.stability),
                }),
            },
            cvar: Some(CvarSection {
                r0: self.cvar.r0,
                warmup: self.cvar.warmup_iters,
                r_final: self.cvar.r_final,
            }),
            noise: if self.noise.is_noiseless() {
                None
            } else {
                Some(NoiseSection {
                    gate: self.noise.gate,
                    readout: self.noise.readout,
                })
            },
            seeds: SeedsSection {
                list: Some(self.seeds.clone()),
                count: None,
            },
            // The canonical config is written into the output directory
            // itself, so "." is the one echo that stays correct wherever the
            // result tree is moved: re-running it reproduces the run in place.
            output: Some(OutputSection {
                directory: Some(PathBuf::from(".")),
                formats: Some(self.formats.names()),
            }),
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo_toml() -> &'static str {
        r#"
            version = 1

            [instance]
            sequences = ["AC", "AC"]
            padded_len = 2

            [ansatz]
            kind = "hea"
            layers = 1

            [optimizer]
            method = "parameter-shift"
            shots = 500
            iterations = 10

            [seeds]
            list = [0, 1]
        "#
    }

    fn parse(text: &str) -> ScenarioConfig {
        toml::from_str(text).unwrap()
    }

    #[test]
    fn minimal_config_resolves_with_defaults() {
        let cfg = parse(demo_toml());
        let resolved = cfg.resolve(Path::new("."), &CliOverrides::default()).unwrap();
        assert_eq!(resolved.instance.set().num_qubits(), 4);
        assert_eq!(resolved.seeds, vec![0, 1]);
        assert_eq!(resolved.cvar, CvarConfig::standard());
        assert!(resolved.noise.is_noiseless());
        assert!(resolved.formats.json && resolved.formats.csv);
        assert_eq!(resolved.canonical.instance.penalty, Some(1.5));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = demo_toml().replace("[seeds]", "typo_key = 3\n[seeds]");
        let err = toml::from_str::<ScenarioConfig>(&text).unwrap_err();
        assert!(err.to_string().contains("typo_key"));
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let cfg = parse(&demo_toml().replace("version = 1", "version = 2"));
        let err = cfg
            .resolve(Path::new("."), &CliOverrides::default())
            .unwrap_err();
        assert!(matches!(err, ConfigError::Version { got: 2, want: 1 }));
    }

    #[test]
    fn qaoa_with_parameter_shift_is_rejected() {
        let cfg = parse(&demo_toml().replace("kind = \"hea\"", "kind = \"qaoa\""));
        let err = cfg
            .resolve(Path::new("."), &CliOverrides::default())
            .unwrap_err();
        assert!(err.to_string().contains("optimizer.method"));
    }

    #[test]
    fn seed_count_expands_from_zero() {
        let text = demo_toml().replace("list = [0, 1]", "count = 3");
        let resolved = parse(&text)
            .resolve(Path::new("."), &CliOverrides::default())
            .unwrap();
        assert_eq!(resolved.seeds, vec![0, 1, 2]);
    }

    #[test]
    fn seeds_require_exactly_one_form() {
        let both = demo_toml().replace("list = [0, 1]", "list = [0]\ncount = 2");
        let err = parse(&both)
            .resolve(Path::new("."), &CliOverrides::default())
            .unwrap_err();
        assert!(err.to_string().contains("seeds"));

        let neither = demo_toml().replace("list = [0, 1]", "");
        let err = parse(&neither)
            .resolve(Path::new("."), &CliOverrides::default())
            .unwrap_err();
        assert!(err.to_string().contains("seeds"));
    }

    #[test]
    fn bad_penalty_names_the_field() {
        let text = demo_toml().replace("padded_len = 2", "padded_len = 2\npenalty = 0.0");
        let err = parse(&text)
            .resolve(Path::new("."), &CliOverrides::default())
            .unwrap_err();
        assert!(err.to_string().starts_with("[instance.penalty]"));
    }

    #[test]
    fn overrides_win_over_file_values() {
        let cfg = parse(demo_toml());
        let overrides = CliOverrides {
            seeds: vec![9],
            shots: Some(64),
            out_dir: Some(PathBuf::from("/tmp/elsewhere")),
            formats: vec!["csv".to_string()],
        };
        let resolved = cfg.resolve(Path::new("."), &overrides).unwrap();
        assert_eq!(resolved.seeds, vec![9]);
        assert_eq!(resolved.optimizer.shots, 64);
        assert_eq!(resolved.out_dir, PathBuf::from("/tmp/elsewhere"));
        assert!(!resolved.formats.json && resolved.formats.csv);
    }

    #[test]
    fn canonical_round_trip_is_stable() {
        let cfg = parse(demo_toml());
        let resolved = cfg.resolve(Path::new("."), &CliOverrides::default()).unwrap();
        let text = resolved.canonical_toml();
        let reparsed: ScenarioConfig = toml::from_str(&text).unwrap();
        let re_resolved = reparsed
            .resolve(Path::new("."), &CliOverrides::default())
            .unwrap();
        assert_eq!(re_resolved.canonical_toml(), text);
        assert_eq!(re_resolved.seeds, resolved.seeds);
    }

    #[test]
    fn fasta_path_loads_sequences() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("seqs.fasta"), ">a\nAC\n>b\nAC\n").unwrap();
        let text = demo_toml().replace(
            "sequences = [\"AC\", \"AC\"]",
            "sequences_path = \"seqs.fasta\"",
        );
        let resolved = parse(&text)
            .resolve(dir.path(), &CliOverrides::default())
            .unwrap();
        assert_eq!(
            resolved.canonical.instance.sequences,
            Some(vec!["AC".to_string(), "AC".to_string()])
        );
    }
}
