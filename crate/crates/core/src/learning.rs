//! Training the mesh angles against a pure target under a biased detector.
//!
//! The loss is
//!
//! ```text
//! L(theta) = 1 - sqrt(F(theta)) + alpha * softplus_beta(S* - S(theta))
//! ```
//!
//! with `F = <target| rho_out |target>` and `S` the observed success
//! probability. Gradients are exact: the derivative of every sector amplitude
//! with respect to the mode matrix comes from permanent gradients, and the
//! chain rule through the mesh uses [`MeshParams::unitary_with_derivatives`].

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detector::ReadoutMatrix;
use crate::error::{Error, Result};
use crate::fock::{permanent_by, permanent_with_gradient, FidelityWithPure, PureState};
use crate::gate::{ideal_postselect, imperfect_postselect_unpruned, GateSetup};
use crate::interferometer::MeshParams;

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPSILON: f64 = 1e-8;

/// `(1/beta) ln(1 + e^{beta x})`, stable for large `|beta x|`.
pub fn softplus(x: f64, beta: f64) -> f64 {
    let z = beta * x;
    if z > 0.0 {
        x + (-z).exp().ln_1p() / beta
    } else {
        z.exp().ln_1p() / beta
    }
}

/// Derivative of [`softplus`] in `x`: the logistic function of `beta x`.
pub fn softplus_slope(x: f64, beta: f64) -> f64 {
    let z = beta * x;
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Hyperparams {
    pub alpha: f64,
    pub beta: f64,
    pub s_star: f64,
    pub learning_rate: f64,
    /// Per-step multiplicative learning-rate decay; 1 keeps it constant.
    pub lr_decay: f64,
    pub iterations: usize,
    /// Taken from the experiment-level seed when read from a config.
    #[serde(skip)]
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            alpha: 10.0,
            beta: 10_000.0,
            s_star: 0.075,
            learning_rate: 0.00025,
            lr_decay: 1.0,
            iterations: 1000,
            seed: 0,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.alpha >= 0.0
            && self.beta > 0.0
            && (0.0..=1.0).contains(&self.s_star)
            && self.learning_rate > 0.0
            && self.lr_decay > 0.0
            && self.lr_decay <= 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Validation(format!(
                "invalid hyperparameters {self:?}"
            )))
        }
    }

    /// Recomputes the loss from its logged parts.
    pub fn loss_from(&self, fidelity: f64, success: f64) -> f64 {
        1.0 - fidelity.sqrt() + self.alpha * softplus(self.s_star - success, self.beta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossReport {
    pub loss: f64,
    pub success: f64,
    pub fidelity: f64,
}

/// Reference loss evaluation through the ensemble pipeline.
pub fn loss(
    params: &MeshParams,
    setup: &GateSetup,
    p: &ReadoutMatrix,
    target: &PureState,
    hyper: &Hyperparams,
) -> Result<LossReport> {
    let u = params.build_unitary()?;
    let ensemble = imperfect_postselect_unpruned(setup, &u, p)?;
    let fidelity = ensemble.fidelity_with_pure(target)?;
    let success = ensemble.success;
    Ok(LossReport {
        loss: hyper.loss_from(fidelity, success),
        success,
        fidelity,
    })
}

/// `dL/dtheta` for every flat mesh parameter.
pub fn grad_loss(
    params: &MeshParams,
    setup: &GateSetup,
    p: &ReadoutMatrix,
    target: &PureState,
    hyper: &Hyperparams,
) -> Result<Vec<f64>> {
    Objective::new(setup, p, target)?
        .evaluate_with_gradient(params, hyper)
        .map(|(_, g)| g)
}

/// One input basis column: expanded mode list and amplitude over `sqrt(m!)`.
#[derive(Debug, Clone)]
struct InputTerm {
    cols: Vec<usize>,
    coefficient: Complex64,
}

/// One output basis row of the full sector.
#[derive(Debug, Clone)]
struct OutputRow {
    rows: Vec<usize>,
    inv_norm: f64,
    /// Index into `Objective::block_weights`.
    block: usize,
    /// `conj(target amplitude)` of the output-mode part.
    target_conj: Complex64,
}

/// Loss and gradient of one gate configuration, precompiled for repeated
/// evaluation inside the training loop.
#[derive(Debug, Clone)]
pub struct Objective {
    modes: usize,
    photons: usize,
    inputs: Vec<InputTerm>,
    outputs: Vec<OutputRow>,
    /// `P(x | n)` per ancilla occupation block.
    block_weights: Vec<f64>,
}

struct Forward {
    amplitudes: Vec<Complex64>,
    overlaps: Vec<Complex64>,
    success: f64,
    weighted_overlap: f64,
}

impl Objective {
    pub fn new(setup: &GateSetup, p: &ReadoutMatrix, target: &PureState) -> Result<Self> {
        if p.max_photons() < setup.total_photons() {
            return Err(Error::contract(format!(
                "detector resolves up to {} photons, gate carries {}",
                p.max_photons(),
                setup.total_photons()
            )));
        }
        if target.modes() != setup.output_modes().len() {
            return Err(Error::contract(format!(
                "target has {} modes, gate has {} output modes",
                target.modes(),
                setup.output_modes().len()
            )));
        }
        let sector = setup.full_sector();
        let input = setup.embedded_input();
        let inputs = sector
            .basis()
            .iter()
            .zip(input.amplitudes())
            .filter(|(_, a)| **a != Complex64::new(0.0, 0.0))
            .map(|(occ, &a)| InputTerm {
                cols: occ.expanded_modes(),
                coefficient: a / (occ.factorial_product() as f64).sqrt(),
            })
            .collect();

        let mut block_keys = Vec::new();
        let mut block_weights = Vec::new();
        let mut outputs = Vec::with_capacity(sector.len());
        for occ in sector.basis() {
            let anc = occ.select(setup.ancilla_modes());
            let out = occ.select(setup.output_modes());
            let block = match block_keys.iter().position(|k| *k == anc) {
                Some(b) => b,
                None => {
                    block_weights.push(p.readout_prob(setup.postselect_pattern(), &anc)?);
                    block_keys.push(anc);
                    block_keys.len() - 1
                }
            };
            let target_conj = if out.total() == target.photons() {
                target.amplitude(&out).conj()
            } else {
                Complex64::new(0.0, 0.0)
            };
            outputs.push(OutputRow {
                rows: occ.expanded_modes(),
                inv_norm: 1.0 / (occ.factorial_product() as f64).sqrt(),
                block,
                target_conj,
            });
        }
        Ok(Self {
            modes: setup.total_modes(),
            photons: setup.total_photons(),
            inputs,
            outputs,
            block_weights,
        })
    }

    pub fn parameter_count(&self) -> usize {
        self.modes * self.modes
    }

    fn forward(&self, u: &crate::fock::CMatrix) -> Forward {
        let n = self.photons;
        let amplitudes: Vec<Complex64> = self
            .outputs
            .iter()
            .map(|row| {
                let mut amp = Complex64::new(0.0, 0.0);
                for term in &self.inputs {
                    amp +=
                        term.coefficient * permanent_by(n, |a, b| u[(row.rows[a], term.cols[b])]);
                }
                amp * row.inv_norm
            })
            .collect();
        self.summarize(amplitudes)
    }

    fn summarize(&self, amplitudes: Vec<Complex64>) -> Forward {
        let mut overlaps = vec![Complex64::new(0.0, 0.0); self.block_weights.len()];
        let mut success = 0.0;
        for (row, amp) in self.outputs.iter().zip(&amplitudes) {
            success += self.block_weights[row.block] * amp.norm_sqr();
            overlaps[row.block] += row.target_conj * amp;
        }
        let weighted_overlap = overlaps
            .iter()
            .zip(&self.block_weights)
            .map(|(o, w)| w * o.norm_sqr())
            .sum();
        Forward {
            amplitudes,
            overlaps,
            success,
            weighted_overlap,
        }
    }

    fn report(&self, fwd: &Forward, hyper: &Hyperparams) -> Result<LossReport> {
        if fwd.success <= 0.0 {
            return Err(Error::UndefinedOutputState);
        }
        let fidelity = fwd.weighted_overlap / fwd.success;
        Ok(LossReport {
            loss: hyper.loss_from(fidelity, fwd.success),
            success: fwd.success,
            fidelity,
        })
    }

    pub fn evaluate(&self, params: &MeshParams, hyper: &Hyperparams) -> Result<LossReport> {
        self.check_params(params)?;
        let u = params.build_unitary()?;
        self.report(&self.forward(&u), hyper)
    }

    pub fn evaluate_with_gradient(
        &self,
        params: &MeshParams,
        hyper: &Hyperparams,
    ) -> Result<(LossReport, Vec<f64>)> {
        self.check_params(params)?;
        let (u, derivs) = params.unitary_with_derivatives()?;
        let n = self.photons;

        // amplitudes and d amplitude / d u, per output row
        let rows: Vec<(Complex64, Vec<Complex64>)> = self
            .outputs
            .iter()
            .map(|row| {
                let mut amp = Complex64::new(0.0, 0.0);
                let mut grad = vec![Complex64::new(0.0, 0.0); self.modes * self.modes];
                for term in &self.inputs {
                    let (perm, pg) =
                        permanent_with_gradient(n, |a, b| u[(row.rows[a], term.cols[b])]);
                    amp += term.coefficient * perm;
                    let scale = term.coefficient * row.inv_norm;
                    for a in 0..n {
                        for b in 0..n {
                            grad[row.rows[a] * self.modes + term.cols[b]] += pg[a * n + b] * scale;
                        }
                    }
                }
                (amp * row.inv_norm, grad)
            })
            .collect();
        let fwd = self.summarize(rows.iter().map(|(a, _)| *a).collect());
        let report = self.report(&fwd, hyper)?;

        // holomorphic partials dL/d amp_k
        let s = fwd.success;
        let f = report.fidelity;
        let fid_coeff = if f > 0.0 { -0.5 / f.sqrt() } else { 0.0 };
        let penalty_coeff = -hyper.alpha * softplus_slope(hyper.s_star - s, hyper.beta);
        let mut dl_du = vec![Complex64::new(0.0, 0.0); self.modes * self.modes];
        for ((row, amp), (_, grad)) in self.outputs.iter().zip(&fwd.amplitudes).zip(&rows) {
            let w = self.block_weights[row.block];
            let ds = amp.conj() * w;
            let dq = fwd.overlaps[row.block].conj() * row.target_conj * w;
            let df = (dq - ds * f) / s;
            let dl = df * fid_coeff + ds * penalty_coeff;
            if dl == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (acc, g) in dl_du.iter_mut().zip(grad) {
                *acc += dl * g;
            }
        }

        let gradient = derivs
            .iter()
            .map(|d| {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..self.modes {
                    for j in 0..self.modes {
                        acc += dl_du[i * self.modes + j] * d[(i, j)];
                    }
                }
                2.0 * acc.re
            })
            .collect();
        Ok((report, gradient))
    }

    fn check_params(&self, params: &MeshParams) -> Result<()> {
        if params.modes != self.modes {
            return Err(Error::contract(format!(
                "mesh has {} modes, gate has {}",
                params.modes, self.modes
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainState {
    pub params: MeshParams,
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub step: u64,
}

impl TrainState {
    pub fn new(params: MeshParams) -> Self {
        let n = params.parameter_count();
        Self {
            params,
            first_moment: vec![0.0; n],
            second_moment: vec![0.0; n],
            step: 0,
        }
    }
}

/// One bias-corrected Adam update. The step size is
/// `learning_rate * lr_decay^step`.
pub fn adam_step(state: TrainState, grad: &[f64], hyper: &Hyperparams) -> Result<TrainState> {
    let mut flat = state.params.to_flat();
    if grad.len() != flat.len() || state.first_moment.len() != flat.len() {
        return Err(Error::contract(format!(
            "gradient has {} components for {} parameters",
            grad.len(),
            flat.len()
        )));
    }
    let lr = hyper.learning_rate * hyper.lr_decay.powf(state.step as f64);
    let step = state.step + 1;
    let c1 = 1.0 - ADAM_BETA1.powf(step as f64);
    let c2 = 1.0 - ADAM_BETA2.powf(step as f64);
    let mut m = state.first_moment;
    let mut v = state.second_moment;
    for k in 0..flat.len() {
        m[k] = ADAM_BETA1 * m[k] + (1.0 - ADAM_BETA1) * grad[k];
        v[k] = ADAM_BETA2 * v[k] + (1.0 - ADAM_BETA2) * grad[k] * grad[k];
        let m_hat = m[k] / c1;
        let v_hat = v[k] / c2;
        flat[k] -= lr * m_hat / (v_hat.sqrt() + ADAM_EPSILON);
    }
    Ok(TrainState {
        params: MeshParams::from_flat(state.params.modes, &flat)?,
        first_moment: m,
        second_moment: v,
        step,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub iteration: usize,
    pub loss: f64,
    pub success: f64,
    pub fidelity: f64,
}

/// Runs `hyper.iterations` Adam steps. Record `i` is the loss at the
/// parameters before update `i`, so record 0 is the starting point.
pub fn train(
    setup: &GateSetup,
    p: &ReadoutMatrix,
    target: &PureState,
    hyper: &Hyperparams,
    initial: MeshParams,
) -> Result<(MeshParams, Vec<TrajectoryRecord>)> {
    hyper.validate()?;
    let objective = Objective::new(setup, p, target)?;
    train_objective(&objective, hyper, initial)
}

pub fn train_objective(
    objective: &Objective,
    hyper: &Hyperparams,
    initial: MeshParams,
) -> Result<(MeshParams, Vec<TrajectoryRecord>)> {
    let mut state = TrainState::new(initial);
    let mut trajectory = Vec::with_capacity(hyper.iterations);
    for iteration in 0..hyper.iterations {
        let (report, grad) = objective.evaluate_with_gradient(&state.params, hyper)?;
        trajectory.push(TrajectoryRecord {
            iteration,
            loss: report.loss,
            success: report.success,
            fidelity: report.fidelity,
        });
        state = adam_step(state, &grad, hyper)?;
    }
    Ok((state.params, trajectory))
}

/// Settings for reconstructing ideal-detector angles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BootstrapOptions {
    #[serde(skip)]
    pub seed: u64,
    /// Random restarts tried after the optional fixed start.
    pub restarts: usize,
    /// Adam iterations of the penalised search phase per start.
    pub search_iterations: usize,
    pub search_learning_rate: f64,
    pub search_lr_decay: f64,
    /// Adam iterations of the fidelity-only polish phase.
    pub polish_iterations: usize,
    pub polish_learning_rate: f64,
    pub polish_lr_decay: f64,
    pub alpha: f64,
    pub beta: f64,
    pub s_star: f64,
    pub min_fidelity: f64,
    pub min_success: f64,
    /// Starts evaluated concurrently; also the granularity at which the
    /// first successful start is chosen, so results do not depend on the
    /// thread count.
    pub batch: usize,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            restarts: 64,
            search_iterations: 1500,
            search_learning_rate: 0.02,
            search_lr_decay: 0.999,
            polish_iterations: 1000,
            polish_learning_rate: 0.002,
            polish_lr_decay: 0.998,
            alpha: 10.0,
            beta: 10_000.0,
            s_star: 0.074,
            min_fidelity: 1.0 - 1e-6,
            min_success: 0.070,
            batch: 4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BootstrapOutcome {
    pub params: MeshParams,
    pub fidelity: f64,
    pub success: f64,
    /// Index of the start that met the criterion (0 = fixed start if given).
    pub attempt: usize,
}

#[derive(Debug, Clone)]
struct Candidate {
    params: MeshParams,
    fidelity: f64,
    success: f64,
}

impl Candidate {
    fn meets(&self, opts: &BootstrapOptions) -> bool {
        self.fidelity >= opts.min_fidelity && self.success >= opts.min_success
    }
}

/// Multi-start search for angles that prepare `target` exactly under ideal
/// detectors with success at least `opts.min_success`.
///
/// Each start runs Adam on the penalised loss with a perfect detector, then
/// polishes with the penalty switched off. Starts are drawn uniformly from
/// `[0, 2 pi)` with a per-start seeded generator.
pub fn bootstrap_ideal(
    setup: &GateSetup,
    target: &PureState,
    opts: &BootstrapOptions,
    initial: Option<MeshParams>,
) -> Result<BootstrapOutcome> {
    let detector = ReadoutMatrix::identity(setup.total_photons());
    let objective = Objective::new(setup, &detector, target)?;
    let modes = setup.total_modes();
    let fixed = usize::from(initial.is_some());
    let attempts = fixed + opts.restarts;
    let batch = opts.batch.max(1);

    let start_for = |index: usize| -> MeshParams {
        match (&initial, index) {
            (Some(p), 0) => p.clone(),
            _ => {
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
                rng.set_stream(index as u64);
                let flat: Vec<f64> = (0..modes * modes)
                    .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
                    .collect();
                MeshParams::from_flat(modes, &flat).expect("flat length matches mesh")
            }
        }
    };

    let mut best: Option<Candidate> = None;
    let mut first = 0;
    while first < attempts {
        let last = (first + batch).min(attempts);
        let candidates: Vec<Result<Candidate>> = (first..last)
            .into_par_iter()
            .map(|index| run_start(&objective, setup, target, opts, start_for(index)))
            .collect();
        for (offset, candidate) in candidates.into_iter().enumerate() {
            let candidate = match candidate {
                Ok(c) => c,
                Err(Error::ImpossiblePostselection { .. }) | Err(Error::UndefinedOutputState) => {
                    continue
                }
                Err(e) => return Err(e),
            };
            if candidate.meets(opts) {
                return Ok(BootstrapOutcome {
                    params: candidate.params,
                    fidelity: candidate.fidelity,
                    success: candidate.success,
                    attempt: first + offset,
                });
            }
            let better = best.as_ref().is_none_or(|b| {
                (candidate.fidelity.min(1.0) * candidate.success.min(opts.min_success))
                    > (b.fidelity.min(1.0) * b.success.min(opts.min_success))
            });
            if better {
                best = Some(candidate);
            }
        }
        first = last;
    }
    let (fidelity, success, best) = match best {
        Some(b) => (b.fidelity, b.success, b.params),
        None => (0.0, 0.0, MeshParams::zeros(modes)),
    };
    Err(Error::BootstrapFailed {
        attempts,
        fidelity,
        success,
        best: Box::new(best),
    })
}

fn run_start(
    objective: &Objective,
    setup: &GateSetup,
    target: &PureState,
    opts: &BootstrapOptions,
    start: MeshParams,
) -> Result<Candidate> {
    let search = Hyperparams {
        alpha: opts.alpha,
        beta: opts.beta,
        s_star: opts.s_star,
        learning_rate: opts.search_learning_rate,
        lr_decay: opts.search_lr_decay,
        iterations: opts.search_iterations,
        seed: opts.seed,
    };
    let polish = Hyperparams {
        alpha: 0.0,
        learning_rate: opts.polish_learning_rate,
        lr_decay: opts.polish_lr_decay,
        iterations: opts.polish_iterations,
        ..search
    };
    let evaluate = |params: MeshParams| -> Result<Candidate> {
        let u = params.build_unitary()?;
        let (out, success) = ideal_postselect(setup, &u)?;
        let fidelity = out.fidelity_with_pure(target)?;
        Ok(Candidate {
            params,
            fidelity,
            success,
        })
    };
    if let Ok(candidate) = evaluate(start.clone()) {
        if candidate.meets(opts) {
            return Ok(candidate);
        }
    }
    let mut state = TrainState::new(start);
    for _ in 0..search.iterations {
        let (_, grad) = objective.evaluate_with_gradient(&state.params, &search)?;
        state = adam_step(state, &grad, &search)?;
    }
    let mut state = TrainState::new(state.params);
    for _ in 0..polish.iterations {
        let (_, grad) = objective.evaluate_with_gradient(&state.params, &polish)?;
        state = adam_step(state, &grad, &polish)?;
    }
    evaluate(state.params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softplus_values() {
        assert!((softplus(0.0, 1.0) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((softplus(10.0, 10_000.0) - 10.0).abs() < 1e-12);
        assert!(softplus(-0.01, 10_000.0).abs() < 1e-40);
        assert!(softplus(-0.01, 10_000.0) > 0.0);
        assert!(softplus(1e3, 1e3).is_finite());
    }

    #[test]
    fn softplus_slope_matches_difference() {
        for &(x, beta) in &[(0.3, 2.0), (-0.1, 5.0), (1e-4, 1e4)] {
            let h = 1e-7;
            let fd = (softplus(x + h, beta) - softplus(x - h, beta)) / (2.0 * h);
            assert!((fd - softplus_slope(x, beta)).abs() < 1e-6);
        }
    }

    #[test]
    fn adam_zero_gradient_keeps_params() {
        let params = MeshParams::from_flat(2, &[0.1, 0.2, 0.3, 0.4]).unwrap();
        let state = adam_step(
            TrainState::new(params.clone()),
            &[0.0; 4],
            &Hyperparams::default(),
        )
        .unwrap();
        assert_eq!(state.params, params);
        assert_eq!(state.step, 1);
    }

    #[test]
    fn adam_first_step_has_magnitude_lr() {
        let hyper = Hyperparams::default();
        let params = MeshParams::zeros(2);
        let grad = [3.0, -0.5, 1e-3, -20.0];
        let state = adam_step(TrainState::new(params), &grad, &hyper).unwrap();
        for (x, g) in state.params.to_flat().iter().zip(grad) {
            assert!((x + hyper.learning_rate * g.signum()).abs() < hyper.learning_rate * 1e-4);
        }
    }

    #[test]
    fn adam_rejects_length_mismatch() {
        let state = TrainState::new(MeshParams::zeros(2));
        assert!(matches!(
            adam_step(state, &[0.0; 3], &Hyperparams::default()),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn adam_decreases_quadratic() {
        // f(x) = |x|^2 over the four parameters of a 2-mode mesh, started at
        // (1, 1, 0, 0); compared against a scalar re-implementation.
        let hyper = Hyperparams {
            learning_rate: 0.1,
            ..Hyperparams::default()
        };
        let mut state = TrainState::new(MeshParams::from_flat(2, &[1.0, 1.0, 0.0, 0.0]).unwrap());
        let (mut m, mut v, mut x) = (0.0f64, 0.0f64, 1.0f64);
        let mut last = 2.0;
        for t in 1..=10 {
            let flat = state.params.to_flat();
            let grad: Vec<f64> = flat.iter().map(|x| 2.0 * x).collect();
            state = adam_step(state, &grad, &hyper).unwrap();
            let f: f64 = state.params.to_flat().iter().map(|x| x * x).sum();
            assert!(f < last);
            last = f;

            let g = 2.0 * x;
            m = 0.9 * m + 0.1 * g;
            v = 0.999 * v + 0.001 * g * g;
            let mh = m / (1.0 - 0.9f64.powi(t));
            let vh = v / (1.0 - 0.999f64.powi(t));
            x -= 0.1 * mh / (vh.sqrt() + 1e-8);
            assert!((state.params.to_flat()[0] - x).abs() < 1e-14);
        }
    }

    #[test]
    fn hyperparams_validation() {
        assert!(Hyperparams::default().validate().is_ok());
        let bad = Hyperparams {
            beta: 0.0,
            ..Hyperparams::default()
        };
        assert!(bad.validate().is_err());
        let bad = Hyperparams {
            s_star: 1.5,
            ..Hyperparams::default()
        };
        assert!(bad.validate().is_err());
    }
}
