//! JSON scenario files: an initial condition (explicit or preset), a kernel,
//! an integrator, output paths and optional verification suites.
//!
//! ```json
//! {
//!   "preset": "single_peakon",
//!   "params": { "h": 3, "T": 2 },
//!   "integrator": { "dt": 0.01 },
//!   "output": { "csv": "traj.csv", "jsonl": null, "summary": "summary.json" }
//! }
//! ```
//!
//! Everything is parsed and validated before the first file is written, and
//! files are only written once the run has succeeded.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{LoopDerivative, Topology, WeightedConfig};
use crate::contact::ContactModel;
use crate::dynamics;
use crate::epdiff::{self, LandmarkConfig};
use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::ode::{IntegratorSpec, Method, DEFAULT_DT, DEFAULT_OBSERVE_EVERY};
use crate::presets::{self, Initial, PresetParams};
use crate::suites;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub params: PresetParams,
    #[serde(default)]
    pub model: Option<ContactModel>,
    #[serde(default)]
    pub initial: Option<ExplicitInitial>,
    #[serde(default)]
    pub kernel: Option<KernelSpec>,
    #[serde(default)]
    pub integrator: IntegratorOverrides,
    #[serde(default)]
    pub observe_every: Option<usize>,
    #[serde(default)]
    pub output: OutputSpec,
    /// Verification suites to run after the trajectory.
    #[serde(default)]
    pub verify: Vec<String>,
    #[serde(default)]
    pub seed: u64,
}

/// Explicit initial data: weighted nodes or planar landmarks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum ExplicitInitial {
    Weighted {
        /// `"point_cloud"` or `"loop"`.
        topology: TopologyKind,
        positions: Vec<Vec<f64>>,
        weights: Vec<f64>,
        #[serde(default)]
        derivative: LoopDerivative,
    },
    Landmarks {
        /// `[q1, q2, p1, p2]` per landmark.
        landmarks: Vec<[f64; 4]>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyKind {
    PointCloud,
    Loop,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorOverrides {
    #[serde(default)]
    pub method: Option<Method>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default, rename = "T")]
    pub t_final: Option<f64>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub reverse: bool,
}

/// Output file names, relative to the output directory; `null` disables one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_csv")]
    pub csv: Option<String>,
    #[serde(default = "default_jsonl")]
    pub jsonl: Option<String>,
    #[serde(default = "default_summary")]
    pub summary: Option<String>,
    #[serde(default = "default_report")]
    pub report: Option<String>,
}

fn default_csv() -> Option<String> {
    Some("trajectory.csv".into())
}
fn default_jsonl() -> Option<String> {
    Some("trajectory.jsonl".into())
}
fn default_summary() -> Option<String> {
    Some("summary.json".into())
}
fn default_report() -> Option<String> {
    Some("verify.json".into())
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            csv: default_csv(),
            jsonl: default_jsonl(),
            summary: default_summary(),
            report: default_report(),
        }
    }
}

/// A validated, ready-to-run scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub initial: Initial,
    pub kernel: KernelSpec,
    pub integrator: IntegratorSpec,
    pub observe_every: usize,
    pub output: OutputSpec,
    pub verify: Vec<String>,
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }

    /// Resolves presets and defaults and validates everything.
    pub fn resolve(&self) -> Result<Scenario> {
        let (name, initial, mut kernel, mut integrator, mut observe_every) = match (&self.preset, &self.initial) {
            (Some(_), Some(_)) => return Err(Error::Schema("give either \"preset\" or \"initial\", not both".into())),
            (None, None) => return Err(Error::Schema("missing \"preset\" or \"initial\"".into())),
            (Some(p), None) => {
                if self.model.is_some() {
                    return Err(Error::Schema("\"model\" is fixed by the preset".into()));
                }
                let preset = presets::build(p, &self.params)?;
                (p.clone(), preset.initial, preset.kernel, preset.integrator, preset.observe_every)
            }
            (None, Some(init)) => {
                if self.params != PresetParams::default() {
                    return Err(Error::Schema("\"params\" only applies to presets".into()));
                }
                let t_final = self
                    .integrator
                    .t_final
                    .ok_or_else(|| Error::Schema("explicit scenarios need integrator.T".into()))?;
                let initial = match init {
                    ExplicitInitial::Weighted { topology, positions, weights, derivative } => {
                        let model = self
                            .model
                            .ok_or_else(|| Error::Schema("explicit weighted initial data needs \"model\"".into()))?;
                        let topology = match topology {
                            TopologyKind::PointCloud => Topology::PointCloud(positions.len()),
                            TopologyKind::Loop => Topology::Loop(positions.len()),
                        };
                        let c = WeightedConfig::new(model, topology, positions.clone(), weights.clone())?;
                        Initial::Weighted(c.with_derivative(*derivative))
                    }
                    ExplicitInitial::Landmarks { landmarks } => {
                        if self.model.is_some() {
                            return Err(Error::Schema("landmarks live in the plane; drop \"model\"".into()));
                        }
                        let nodes = landmarks.iter().map(|l| ([l[0], l[1]], [l[2], l[3]])).collect();
                        Initial::Landmarks(LandmarkConfig::new(nodes)?)
                    }
                };
                let name = "explicit".to_string();
                (name, initial, KernelSpec::default(), IntegratorSpec::rk4(DEFAULT_DT, t_final), DEFAULT_OBSERVE_EVERY)
            }
        };
        if let Some(k) = self.kernel {
            kernel = k;
        }
        let o = &self.integrator;
        if let Some(m) = o.method {
            integrator.method = m;
        }
        if let Some(dt) = o.dt {
            integrator.dt = dt;
        }
        if let Some(t) = o.t_final {
            integrator.t_final = t;
        }
        if let Some(tol) = o.tol {
            integrator.tol = tol;
        }
        integrator.reverse = o.reverse;
        integrator.validate()?;
        if let Some(n) = self.observe_every {
            if n == 0 {
                return Err(Error::Schema("observe_every must be positive".into()));
            }
            observe_every = n;
        }
        for s in &self.verify {
            if s != "all" && !suites::SUITE_NAMES.contains(&s.as_str()) {
                return Err(Error::UnknownSuite(s.clone()));
            }
        }
        for p in [&self.output.csv, &self.output.jsonl, &self.output.summary, &self.output.report].into_iter().flatten() {
            if p.is_empty() {
                return Err(Error::Schema("output paths must be non-empty".into()));
            }
        }
        Ok(Scenario {
            name,
            initial,
            kernel,
            integrator,
            observe_every,
            output: self.output.clone(),
            verify: self.verify.clone(),
            seed: self.seed,
        })
    }
}

/// What a run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub summary: serde_json::Value,
    pub files: Vec<PathBuf>,
    /// False when a requested verification suite failed.
    pub verified: bool,
}

impl Scenario {
    /// Integrates and writes the requested files into `out_dir`.
    pub fn run(&self, out_dir: &Path) -> Result<RunOutcome> {
        let mut files: Vec<(String, Vec<u8>)> = Vec::new();
        let summary = match &self.initial {
            Initial::Weighted(c) => {
                let traj = dynamics::integrate(c, &self.kernel, &self.integrator, self.observe_every)?;
                if let Some(p) = &self.output.csv {
                    let mut buf = Vec::new();
                    traj.write_csv(&mut buf)?;
                    files.push((p.clone(), buf));
                }
                if let Some(p) = &self.output.jsonl {
                    let mut buf = Vec::new();
                    traj.write_jsonl(&mut buf)?;
                    files.push((p.clone(), buf));
                }
                let mut v = serde_json::to_value(traj.summary())?;
                v["model"] = serde_json::Value::String(c.model().to_string());
                v
            }
            Initial::Landmarks(l) => {
                let traj = epdiff::integrate_landmarks(l, &self.kernel, &self.integrator, self.observe_every)?;
                if let Some(p) = &self.output.csv {
                    let mut buf = Vec::new();
                    traj.write_csv(&mut buf)?;
                    files.push((p.clone(), buf));
                }
                let last = traj.snapshots.last().expect("trajectory has a first snapshot");
                let n = l.len() as f64;
                let mean = |c: &LandmarkConfig, i: usize| c.q.iter().map(|q| q[i]).sum::<f64>() / n;
                serde_json::json!({
                    "H0": traj.energies[0],
                    "maxRelEnergyDrift": traj.max_rel_energy_drift(),
                    "minSeparation": traj.snapshots.iter().map(|c| c.min_separation()).fold(f64::INFINITY, f64::min),
                    "meanDisplacement": [mean(last, 0) - mean(l, 0), mean(last, 1) - mean(l, 1)],
                    "finalTime": traj.times.last().copied().unwrap_or(0.0),
                    "model": "landmarks",
                })
            }
        };
        let mut summary = summary;
        summary["scenario"] = serde_json::Value::String(self.name.clone());
        let mut verified = true;
        if !self.verify.is_empty() {
            let report = suites::run_suites(&self.verify, self.seed)?;
            verified = report.pass;
            summary["verified"] = serde_json::Value::Bool(report.pass);
            if let Some(p) = &self.output.report {
                files.push((p.clone(), report.to_json()?.into_bytes()));
            }
        }
        if let Some(p) = &self.output.summary {
            files.push((p.clone(), (serde_json::to_string_pretty(&summary)? + "\n").into_bytes()));
        }
        std::fs::create_dir_all(out_dir)?;
        let mut written = Vec::new();
        for (name, bytes) in files {
            let path = out_dir.join(name);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(&path, bytes)?;
            written.push(path);
        }
        Ok(RunOutcome { summary, files: written, verified })
    }
}

/// Reads, validates and runs a scenario file.
pub fn run_file(path: &Path, out_dir: &Path) -> Result<RunOutcome> {
    let text = std::fs::read_to_string(path)?;
    ScenarioConfig::from_json(&text)?.resolve()?.run(out_dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_scenario_resolves_with_overrides() {
        let s = ScenarioConfig::from_json(r#"{"preset":"single_peakon","params":{"h":3,"T":2},"integrator":{"dt":0.01}}"#)
            .unwrap()
            .resolve()
            .unwrap();
        assert_eq!(s.integrator.dt, 0.01);
        assert_eq!(s.integrator.t_final, 2.0);
        assert_eq!(s.output, OutputSpec::default());
    }

    #[test]
    fn explicit_scenarios() {
        let s = ScenarioConfig::from_json(
            r#"{"model":"rotational3","initial":{"topology":"point_cloud","positions":[[0,0,0],[1,0,0]],"weights":[1,-1]},
                "kernel":{"family":"exp","sigma":0.5},"integrator":{"T":0.5}}"#,
        )
        .unwrap()
        .resolve()
        .unwrap();
        assert_eq!(s.kernel, KernelSpec::exponential(0.5).unwrap());
        let l = ScenarioConfig::from_json(r#"{"initial":{"landmarks":[[0,0,1,0],[1,1,0,1]]},"integrator":{"T":1}}"#)
            .unwrap()
            .resolve()
            .unwrap();
        assert!(matches!(l.initial, Initial::Landmarks(_)));
    }

    #[test]
    fn schema_errors() {
        let bad = [
            r#"{"preset":"single_peakon","extra":1}"#,
            r#"{"preset":"nope"}"#,
            r#"{}"#,
            r#"{"initial":{"topology":"loop","positions":[],"weights":[]}}"#,
            r#"{"preset":"single_peakon","verify":["bogus"]}"#,
            r#"{"preset":"single_peakon","integrator":{"dt":-1}}"#,
            r#"{"preset":"single_peakon","kernel":{"family":"gaussian","sigma":0}}"#,
            r#"{"preset": "#,
        ];
        for b in bad {
            let r = ScenarioConfig::from_json(b).and_then(|c| c.resolve());
            assert!(r.is_err(), "{b}");
        }
        assert_eq!(ScenarioConfig::from_json("{").unwrap_err().code(), "schema");
    }
}
