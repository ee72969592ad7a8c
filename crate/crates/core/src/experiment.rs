//! Experiment configuration, orchestration and result files.
//!
//! Every command reads one TOML config (see `configs/default.toml`) and writes
//! its outputs into the output directory. Files are written to a temporary
//! name and renamed into place.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detector::ReadoutMatrix;
use crate::error::{Error, Result};
use crate::fock::{FidelityWithPure, OccupationVector, PureState};
use crate::gate::{ideal_postselect, GateSetup};
use crate::interferometer::MeshParams;
use crate::learning::{
    bootstrap_ideal, train_objective, BootstrapOptions, Hyperparams, LossReport, Objective,
    TrajectoryRecord,
};

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const FINAL_ANGLES_FILE: &str = "final_angles.json";
pub const SUMMARY_FILE: &str = "summary.json";
pub const BOOTSTRAP_ANGLES_FILE: &str = "bootstrap_angles.json";
pub const BOOTSTRAP_REPORT_FILE: &str = "bootstrap_report.json";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const SWEEP_REPORT_FILE: &str = "sweep_report.json";
pub const EVAL_FILE: &str = "eval.json";

/// Fidelity the lowest-threshold sweep rows are expected to approach.
pub const NEAR_UNIT_FIDELITY: f64 = 0.99;

/// One `(occupation, amplitude)` term of a state specifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateTerm {
    pub occupation: Vec<usize>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl StateTerm {
    fn new(occupation: &[usize], re: f64) -> Self {
        Self {
            occupation: occupation.to_vec(),
            re,
            im: 0.0,
        }
    }
}

fn build_state(modes: usize, terms: &[StateTerm], what: &str) -> Result<PureState> {
    let terms: Vec<(OccupationVector, Complex64)> = terms
        .iter()
        .map(|t| (t.occupation.clone().into(), Complex64::new(t.re, t.im)))
        .collect();
    PureState::from_terms(modes, &terms).map_err(|e| Error::Config(format!("{what}: {e}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SetupConfig {
    pub modes: usize,
    pub ancilla_modes: Vec<usize>,
    pub ancilla_preparation: Vec<usize>,
    pub postselect_pattern: Vec<usize>,
    /// Pure input on the non-ancilla modes, normalized on load.
    pub input_state: Vec<StateTerm>,
    /// Pure target on the non-ancilla modes, normalized on load.
    pub target_state: Vec<StateTerm>,
}

impl Default for SetupConfig {
    fn default() -> Self {
        // dual-rail qubits on modes (0,1) and (2,3), both in |+>
        let input_state = [[1, 0, 1, 0], [1, 0, 0, 1], [0, 1, 1, 0], [0, 1, 0, 1]]
            .iter()
            .map(|o| StateTerm::new(o, 0.5))
            .collect();
        let target_state = vec![
            StateTerm::new(&[0, 1, 0, 1], 0.5),
            StateTerm::new(&[1, 0, 0, 1], 0.5),
            StateTerm::new(&[0, 1, 1, 0], 0.5),
            StateTerm::new(&[1, 0, 1, 0], -0.5),
        ];
        Self {
            modes: 6,
            ancilla_modes: vec![4, 5],
            ancilla_preparation: vec![1, 1],
            postselect_pattern: vec![1, 1],
            input_state,
            target_state,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectorConfig {
    /// `resta-2023`, `identity-N` or a CSV path (relative to the config).
    pub source: String,
    pub normalize: bool,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            source: "resta-2023".into(),
            normalize: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub s_star: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            s_star: default_sweep_grid(),
        }
    }
}

/// Sixteen evenly spaced thresholds from 0 to 0.145.
pub fn default_sweep_grid() -> Vec<f64> {
    (0..16).map(|k| 0.145 * k as f64 / 15.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub setup: SetupConfig,
    pub detector: DetectorConfig,
    pub hyper: Hyperparams,
    pub bootstrap: BootstrapOptions,
    pub sweep: SweepConfig,
    /// Directory relative paths in the config resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            output_dir: PathBuf::from("out"),
            setup: SetupConfig::default(),
            detector: DetectorConfig::default(),
            hyper: Hyperparams::default(),
            bootstrap: BootstrapOptions::default(),
            sweep: SweepConfig::default(),
            base_dir: PathBuf::from("."),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let mut config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.apply_seed(config.seed);
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut config = Self::from_toml(&text)?;
        config.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config always serializes")
    }

    pub fn apply_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.hyper.seed = seed;
        self.bootstrap.seed = seed;
    }

    pub fn build(&self) -> Result<Experiment> {
        let s = &self.setup;
        if s.modes == 0 {
            return Err(Error::Config("setup.modes must be positive".into()));
        }
        let output_modes = s.modes.saturating_sub(s.ancilla_modes.len());
        let input = build_state(output_modes, &s.input_state, "setup.input_state")?;
        let target = build_state(output_modes, &s.target_state, "setup.target_state")?;
        let setup = GateSetup::new(
            s.modes,
            s.ancilla_modes.clone(),
            input,
            s.ancilla_preparation.clone().into(),
            s.postselect_pattern.clone().into(),
        )
        .map_err(|e| Error::Config(e.to_string()))?;

        let source = &self.detector.source;
        let detector = if source == "resta-2023" || source.starts_with("identity-") {
            ReadoutMatrix::load(source)?
        } else {
            ReadoutMatrix::from_csv(&self.base_dir.join(source))?
        };
        let detector = if self.detector.normalize {
            detector.normalized()
        } else {
            detector
        };
        if detector.max_photons() < setup.total_photons() {
            return Err(Error::Config(format!(
                "detector resolves {} photons but the gate carries {}",
                detector.max_photons(),
                setup.total_photons()
            )));
        }
        self.hyper
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(Experiment {
            config: self.clone(),
            setup,
            target,
            detector,
        })
    }
}

/// A validated config with its gate, target and detector built.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub setup: GateSetup,
    pub target: PureState,
    pub detector: ReadoutMatrix,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BootstrapReport {
    pub fidelity: f64,
    pub success: f64,
    pub attempt: Option<usize>,
    pub seed: u64,
    pub succeeded: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainSummary {
    pub s_star: f64,
    pub iterations: usize,
    pub baseline_loss: f64,
    pub baseline_fidelity: f64,
    pub baseline_success: f64,
    pub final_loss: f64,
    pub final_fidelity: f64,
    pub final_success: f64,
    pub wall_time_s: f64,
}

impl TrainSummary {
    pub fn line(&self) -> String {
        format!(
            "baseline F = {:.9}, final F = {:.9}, final S = {:.9}, wall time = {:.3} s",
            self.baseline_fidelity, self.final_fidelity, self.final_success, self.wall_time_s
        )
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub final_params: MeshParams,
    pub trajectory: Vec<TrajectoryRecord>,
    pub summary: TrainSummary,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub s_star: f64,
    pub final_fidelity: f64,
    pub final_success: f64,
    pub angles_path: String,
}

#[derive(Debug, Clone)]
pub enum SweepEntry {
    Done(SweepRow),
    Failed { s_star: f64, reason: String },
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    /// Biased-detector evaluation at the initial angles.
    pub baseline: LossReport,
    pub baseline_angles_path: String,
    pub rows: Vec<SweepEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepReport {
    pub baseline_fidelity: f64,
    pub baseline_success: f64,
    pub max_fidelity: f64,
    pub max_fidelity_s_star: f64,
    pub near_unit_fidelity_target: f64,
    pub near_unit_fidelity_reached: bool,
    pub failed_rows: usize,
}

impl SweepResult {
    pub fn completed(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter_map(|r| match r {
            SweepEntry::Done(row) => Some(row),
            SweepEntry::Failed { .. } => None,
        })
    }

    pub fn report(&self) -> SweepReport {
        let (max_fidelity, max_fidelity_s_star) =
            self.completed().map(|r| (r.final_fidelity, r.s_star)).fold(
                (f64::NEG_INFINITY, f64::NAN),
                |acc, x| if x.0 > acc.0 { x } else { acc },
            );
        SweepReport {
            baseline_fidelity: self.baseline.fidelity,
            baseline_success: self.baseline.success,
            max_fidelity,
            max_fidelity_s_star,
            near_unit_fidelity_target: NEAR_UNIT_FIDELITY,
            near_unit_fidelity_reached: max_fidelity >= NEAR_UNIT_FIDELITY,
            failed_rows: self.rows.len() - self.completed().count(),
        }
    }

    /// Rows in request order, preceded by the baseline row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s_star,final_fidelity,final_success,angles_path\n");
        writeln!(
            out,
            "baseline,{},{},{}",
            fmt_f64(self.baseline.fidelity),
            fmt_f64(self.baseline.success),
            self.baseline_angles_path
        )
        .unwrap();
        for row in &self.rows {
            match row {
                SweepEntry::Done(r) => writeln!(
                    out,
                    "{},{},{},{}",
                    fmt_f64(r.s_star),
                    fmt_f64(r.final_fidelity),
                    fmt_f64(r.final_success),
                    r.angles_path
                ),
                SweepEntry::Failed { s_star, reason } => writeln!(
                    out,
                    "{},error,error,\"{}\"",
                    fmt_f64(*s_star),
                    reason.replace('"', "'")
                ),
            }
            .unwrap();
        }
        out
    }
}

/// 17 significant digits: enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn trajectory_csv(trajectory: &[TrajectoryRecord]) -> String {
    let mut out = String::from("iteration,loss,success,fidelity\n");
    for r in trajectory {
        writeln!(
            out,
            "{},{},{},{}",
            r.iteration,
            fmt_f64(r.loss),
            fmt_f64(r.success),
            fmt_f64(r.fidelity)
        )
        .unwrap();
    }
    out
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
    text.push('\n');
    write_atomic(path, &text)
}

impl Experiment {
    pub fn objective(&self) -> Result<Objective> {
        Objective::new(&self.setup, &self.detector, &self.target)
    }

    fn check_modes(&self, params: &MeshParams, path: Option<&Path>) -> Result<()> {
        if params.modes == self.setup.total_modes() {
            return Ok(());
        }
        let reason = format!(
            "angles are for {} modes, config has {}",
            params.modes,
            self.setup.total_modes()
        );
        Err(match path {
            Some(p) => Error::MalformedFile {
                path: p.to_path_buf(),
                reason,
            },
            None => Error::Contract(reason),
        })
    }

    pub fn load_angles(&self, path: &Path) -> Result<MeshParams> {
        let params = MeshParams::load(path)?;
        self.check_modes(&params, Some(path))?;
        Ok(params)
    }

    pub fn bootstrap(&self) -> Result<(MeshParams, BootstrapReport)> {
        let outcome = bootstrap_ideal(&self.setup, &self.target, &self.config.bootstrap, None)?;
        let report = BootstrapReport {
            fidelity: outcome.fidelity,
            success: outcome.success,
            attempt: Some(outcome.attempt),
            seed: self.config.seed,
            succeeded: true,
        };
        Ok((outcome.params, report))
    }

    /// Runs the bootstrap and writes the angles and report. On failure the
    /// best candidate is written instead and the error is returned.
    pub fn run_bootstrap(&self, out_dir: &Path) -> Result<(MeshParams, BootstrapReport)> {
        match self.bootstrap() {
            Ok((params, report)) => {
                write_atomic(&out_dir.join(BOOTSTRAP_ANGLES_FILE), &params.to_json())?;
                write_json(&out_dir.join(BOOTSTRAP_REPORT_FILE), &report)?;
                Ok((params, report))
            }
            Err(Error::BootstrapFailed {
                attempts,
                fidelity,
                success,
                best,
            }) => {
                let report = BootstrapReport {
                    fidelity,
                    success,
                    attempt: None,
                    seed: self.config.seed,
                    succeeded: false,
                };
                write_atomic(&out_dir.join("bootstrap_best_angles.json"), &best.to_json())?;
                write_json(&out_dir.join(BOOTSTRAP_REPORT_FILE), &report)?;
                Err(Error::BootstrapFailed {
                    attempts,
                    fidelity,
                    success,
                    best,
                })
            }
            Err(e) => Err(e),
        }
    }

    /// Ideal-detector fidelity and success at `params`.
    pub fn ideal_report(&self, params: &MeshParams) -> Result<(f64, f64)> {
        let u = params.build_unitary()?;
        let (out, success) = ideal_postselect(&self.setup, &u)?;
        Ok((out.fidelity_with_pure(&self.target)?, success))
    }

    pub fn evaluate(&self, params: &MeshParams, hyper: &Hyperparams) -> Result<LossReport> {
        self.check_modes(params, None)?;
        self.objective()?.evaluate(params, hyper)
    }

    pub fn train(&self, initial: MeshParams, hyper: &Hyperparams) -> Result<TrainOutcome> {
        self.check_modes(&initial, None)?;
        hyper.validate()?;
        let objective = self.objective()?;
        let started = Instant::now();
        let baseline = objective.evaluate(&initial, hyper)?;
        let (final_params, trajectory) = train_objective(&objective, hyper, initial)?;
        let last = objective.evaluate(&final_params, hyper)?;
        let summary = TrainSummary {
            s_star: hyper.s_star,
            iterations: hyper.iterations,
            baseline_loss: baseline.loss,
            baseline_fidelity: baseline.fidelity,
            baseline_success: baseline.success,
            final_loss: last.loss,
            final_fidelity: last.fidelity,
            final_success: last.success,
            wall_time_s: started.elapsed().as_secs_f64(),
        };
        Ok(TrainOutcome {
            final_params,
            trajectory,
            summary,
        })
    }

    pub fn run_train(&self, initial: MeshParams, out_dir: &Path) -> Result<TrainOutcome> {
        let outcome = self.train(initial, &self.config.hyper)?;
        write_atomic(
            &out_dir.join(TRAJECTORY_FILE),
            &trajectory_csv(&outcome.trajectory),
        )?;
        write_atomic(
            &out_dir.join(FINAL_ANGLES_FILE),
            &outcome.final_params.to_json(),
        )?;
        write_json(&out_dir.join(SUMMARY_FILE), &outcome.summary)?;
        Ok(outcome)
    }

    /// Trains once per requested threshold, all from `initial`. Rows are
    /// independent; a failing row is recorded and the rest still run.
    pub fn sweep(&self, initial: &MeshParams, out_dir: &Path) -> Result<SweepResult> {
        let thresholds = &self.config.sweep.s_star;
        if thresholds.is_empty() {
            return Err(Error::Config("sweep.s_star is empty".into()));
        }
        self.check_modes(initial, None)?;
        let hyper = self.config.hyper;
        let baseline = self.evaluate(initial, &hyper)?;
        let baseline_angles_path = "sweep_initial_angles.json".to_string();
        write_atomic(&out_dir.join(&baseline_angles_path), &initial.to_json())?;

        let rows = thresholds
            .par_iter()
            .enumerate()
            .map(|(k, &s_star)| {
                let row_hyper = Hyperparams { s_star, ..hyper };
                let angles_path = format!("sweep_angles_{k:03}.json");
                let result = self.train(initial.clone(), &row_hyper).and_then(|outcome| {
                    write_atomic(&out_dir.join(&angles_path), &outcome.final_params.to_json())?;
                    Ok(outcome)
                });
                match result {
                    Ok(outcome) => SweepEntry::Done(SweepRow {
                        s_star,
                        final_fidelity: outcome.summary.final_fidelity,
                        final_success: outcome.summary.final_success,
                        angles_path,
                    }),
                    Err(e) => SweepEntry::Failed {
                        s_star,
                        reason: e.to_string(),
                    },
                }
            })
            .collect();
        Ok(SweepResult {
            baseline,
            baseline_angles_path,
            rows,
        })
    }

    pub fn run_sweep(&self, initial: &MeshParams, out_dir: &Path) -> Result<SweepResult> {
        let result = self.sweep(initial, out_dir)?;
        write_atomic(&out_dir.join(SWEEP_FILE), &result.to_csv())?;
        write_json(&out_dir.join(SWEEP_REPORT_FILE), &result.report())?;
        Ok(result)
    }
}
