//! Nondeterministic gates: an input state plus ancilla photons pass through
//! an interferometer and the ancilla modes are measured.
//!
//! With a pure input the state after the interferometer is pure, and the
//! unnormalized output conditioned on a true ancilla occupation `n` is a pure
//! vector `|phi_n>` of squared norm `p_n`. A biased detector turns the
//! postselected readout `x` into the mixture
//!
//! ```text
//! rho_out = (1 / S) sum_n P(x|n) |phi_n><phi_n|,   S = sum_n P(x|n) p_n
//! ```
//!
//! which is kept as a weighted ensemble and never densified.

use std::sync::Arc;

use num_complex::Complex64;

use crate::detector::ReadoutMatrix;
use crate::error::{Error, Result};
use crate::fock::{
    apply_lifted, CMatrix, FidelityWithPure, FockSector, OccupationVector, PureState,
};

/// Ensemble entries with a weight below this are dropped.
pub const PRUNE_THRESHOLD: f64 = 1e-15;

#[derive(Debug, Clone)]
pub struct GateSetup {
    total_modes: usize,
    ancilla_modes: Vec<usize>,
    output_modes: Vec<usize>,
    input_state: PureState,
    ancilla_preparation: OccupationVector,
    postselect_pattern: OccupationVector,
    total_photons: usize,
    full_sector: Arc<FockSector>,
}

impl GateSetup {
    /// `input_state` lives on the non-ancilla modes in ascending index order.
    pub fn new(
        total_modes: usize,
        ancilla_modes: Vec<usize>,
        input_state: PureState,
        ancilla_preparation: OccupationVector,
        postselect_pattern: OccupationVector,
    ) -> Result<Self> {
        if total_modes == 0 {
            return Err(Error::Validation("gate needs at least one mode".into()));
        }
        let mut seen = vec![false; total_modes];
        for &a in &ancilla_modes {
            if a >= total_modes {
                return Err(Error::Validation(format!(
                    "ancilla mode {a} is out of range for {total_modes} modes"
                )));
            }
            if std::mem::replace(&mut seen[a], true) {
                return Err(Error::Validation(format!("ancilla mode {a} listed twice")));
            }
        }
        let output_modes: Vec<usize> = (0..total_modes).filter(|&m| !seen[m]).collect();
        if output_modes.is_empty() {
            return Err(Error::Validation("every mode is an ancilla".into()));
        }
        if input_state.modes() != output_modes.len() {
            return Err(Error::Validation(format!(
                "input state has {} modes, gate has {} output modes",
                input_state.modes(),
                output_modes.len()
            )));
        }
        if ancilla_preparation.modes() != ancilla_modes.len() {
            return Err(Error::Validation(format!(
                "ancilla preparation has {} entries for {} ancilla modes",
                ancilla_preparation.modes(),
                ancilla_modes.len()
            )));
        }
        if postselect_pattern.modes() != ancilla_modes.len() {
            return Err(Error::Validation(format!(
                "postselect pattern has {} entries for {} ancilla modes",
                postselect_pattern.modes(),
                ancilla_modes.len()
            )));
        }
        let total_photons = input_state.photons() + ancilla_preparation.total();
        Ok(Self {
            total_modes,
            ancilla_modes,
            output_modes,
            input_state,
            ancilla_preparation,
            postselect_pattern,
            total_photons,
            full_sector: FockSector::shared(total_modes, total_photons),
        })
    }

    pub fn total_modes(&self) -> usize {
        self.total_modes
    }

    pub fn ancilla_modes(&self) -> &[usize] {
        &self.ancilla_modes
    }

    pub fn output_modes(&self) -> &[usize] {
        &self.output_modes
    }

    pub fn input_state(&self) -> &PureState {
        &self.input_state
    }

    pub fn ancilla_preparation(&self) -> &OccupationVector {
        &self.ancilla_preparation
    }

    pub fn postselect_pattern(&self) -> &OccupationVector {
        &self.postselect_pattern
    }

    pub fn total_photons(&self) -> usize {
        self.total_photons
    }

    pub fn full_sector(&self) -> &Arc<FockSector> {
        &self.full_sector
    }

    pub fn with_postselect_pattern(&self, pattern: OccupationVector) -> Result<Self> {
        Self::new(
            self.total_modes,
            self.ancilla_modes.clone(),
            self.input_state.clone(),
            self.ancilla_preparation.clone(),
            pattern,
        )
    }

    /// Recombines output-mode and ancilla-mode counts into a full occupation.
    pub fn join(&self, output: &OccupationVector, ancilla: &OccupationVector) -> OccupationVector {
        let mut counts = vec![0; self.total_modes];
        for (&m, &n) in self.output_modes.iter().zip(output.counts()) {
            counts[m] = n;
        }
        for (&m, &n) in self.ancilla_modes.iter().zip(ancilla.counts()) {
            counts[m] = n;
        }
        OccupationVector::new(counts)
    }

    /// `|input> (x) |a>` embedded in the total-photon sector.
    pub fn embedded_input(&self) -> PureState {
        let sector = &self.full_sector;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); sector.len()];
        let in_sector = self.input_state.sector();
        for (occ, &amp) in in_sector.basis().iter().zip(self.input_state.amplitudes()) {
            if amp == Complex64::new(0.0, 0.0) {
                continue;
            }
            let full = self.join(occ, &self.ancilla_preparation);
            let k = sector.index_of(&full).expect("photon number is conserved");
            amplitudes[k] = amp;
        }
        let mut state = PureState::new(sector.clone(), amplitudes).expect("length matches sector");
        if self.input_state.is_normalized() {
            state = state.into_normalized().expect("input is nonzero");
        }
        state
    }

    fn check_unitary(&self, u: &CMatrix) -> Result<()> {
        if !u.is_square() || u.nrows() != self.total_modes {
            return Err(Error::contract(format!(
                "interferometer is {}x{}, gate has {} modes",
                u.nrows(),
                u.ncols(),
                self.total_modes
            )));
        }
        Ok(())
    }
}

/// `phi(u) (|input> (x) |a>)` on the full sector.
pub fn propagate(setup: &GateSetup, u: &CMatrix) -> Result<PureState> {
    setup.check_unitary(u)?;
    apply_lifted(u, &setup.embedded_input())
}

/// One ancilla outcome `n` of a projective measurement.
#[derive(Debug, Clone)]
pub struct ConditionalBranch {
    pub outcome: OccupationVector,
    /// Unnormalized, on the output modes.
    pub state: PureState,
    pub probability: f64,
}

/// Splits a full-sector state by the occupation of `ancilla_modes`.
///
/// Outcomes are ordered by total ancilla photon number, then descending
/// lexicographically. Outcomes whose block is identically zero are omitted.
pub fn condition_on_ancilla(
    full_state: &PureState,
    ancilla_modes: &[usize],
) -> Result<Vec<ConditionalBranch>> {
    let total_modes = full_state.modes();
    let photons = full_state.photons();
    let mut is_ancilla = vec![false; total_modes];
    for &a in ancilla_modes {
        if a >= total_modes || std::mem::replace(&mut is_ancilla[a], true) {
            return Err(Error::contract(format!("bad ancilla mode {a}")));
        }
    }
    let output_modes: Vec<usize> = (0..total_modes).filter(|&m| !is_ancilla[m]).collect();
    if output_modes.is_empty() {
        return Err(Error::contract(
            "conditioning needs at least one unmeasured mode",
        ));
    }
    let sector = full_state.sector();
    let mut branches = Vec::new();
    for anc_photons in 0..=photons {
        if ancilla_modes.is_empty() && anc_photons > 0 {
            break;
        }
        let out_sector = FockSector::shared(output_modes.len(), photons - anc_photons);
        let outcomes = if ancilla_modes.is_empty() {
            vec![OccupationVector::new(Vec::new())]
        } else {
            FockSector::new(ancilla_modes.len(), anc_photons)
                .basis()
                .to_vec()
        };
        for outcome in outcomes {
            let mut amplitudes = Vec::with_capacity(out_sector.len());
            for out_occ in out_sector.basis() {
                let mut counts = vec![0; total_modes];
                for (&m, &n) in output_modes.iter().zip(out_occ.counts()) {
                    counts[m] = n;
                }
                for (&m, &n) in ancilla_modes.iter().zip(outcome.counts()) {
                    counts[m] = n;
                }
                let k = sector
                    .index_of(&OccupationVector::new(counts))
                    .expect("photon number is conserved");
                amplitudes.push(full_state.amplitudes()[k]);
            }
            if amplitudes.iter().all(|a| *a == Complex64::new(0.0, 0.0)) {
                continue;
            }
            let state = PureState::new(out_sector.clone(), amplitudes)?;
            let probability = state.norm_sqr();
            branches.push(ConditionalBranch {
                outcome,
                state,
                probability,
            });
        }
    }
    Ok(branches)
}

/// Output of a perfect-detector gate run: the normalized conditional state
/// and the probability of seeing the postselected pattern.
pub fn ideal_postselect(setup: &GateSetup, u: &CMatrix) -> Result<(PureState, f64)> {
    let full = propagate(setup, u)?;
    let pattern = setup.postselect_pattern();
    let branch = condition_on_ancilla(&full, setup.ancilla_modes())?
        .into_iter()
        .find(|b| &b.outcome == pattern)
        .filter(|b| b.probability > 0.0)
        .ok_or_else(|| Error::ImpossiblePostselection {
            pattern: pattern.counts().to_vec(),
        })?;
    let success = branch.probability;
    Ok((branch.state.into_normalized()?, success))
}

#[derive(Debug, Clone)]
pub struct EnsembleEntry {
    /// True ancilla occupation `n`.
    pub outcome: OccupationVector,
    /// `P(x | n)`
    pub readout_probability: f64,
    /// `p_n`, the physical probability of the occupation.
    pub probability: f64,
    /// `P(x | n) p_n`
    pub weight: f64,
    /// Unnormalized conditional state, squared norm `p_n`.
    pub conditional_state: PureState,
    pub output_photons: usize,
}

/// Mixed output state of an imperfect postselection.
#[derive(Debug, Clone)]
pub struct ConditionalEnsemble {
    pub entries: Vec<EnsembleEntry>,
    pub success: f64,
}

impl ConditionalEnsemble {
    /// Drops entries below [`PRUNE_THRESHOLD`] and recomputes the success
    /// probability.
    pub fn pruned(mut self) -> Self {
        self.entries.retain(|e| e.weight >= PRUNE_THRESHOLD);
        self.success = self.entries.iter().map(|e| e.weight).sum();
        self
    }
}

impl FidelityWithPure for ConditionalEnsemble {
    fn fidelity_with_pure(&self, target: &PureState) -> Result<f64> {
        if self.success <= 0.0 {
            return Err(Error::UndefinedOutputState);
        }
        let mut overlap = 0.0;
        for e in &self.entries {
            overlap += e.readout_probability * target.inner(&e.conditional_state)?.norm_sqr();
        }
        Ok(overlap / self.success)
    }
}

/// Biased-detector postselection on `setup.postselect_pattern()`, with
/// entries below [`PRUNE_THRESHOLD`] removed.
pub fn imperfect_postselect(
    setup: &GateSetup,
    u: &CMatrix,
    p: &ReadoutMatrix,
) -> Result<ConditionalEnsemble> {
    let ensemble = imperfect_postselect_unpruned(setup, u, p)?.pruned();
    check_success(setup, ensemble)
}

/// As [`imperfect_postselect`] but keeps every reachable outcome.
pub fn imperfect_postselect_unpruned(
    setup: &GateSetup,
    u: &CMatrix,
    p: &ReadoutMatrix,
) -> Result<ConditionalEnsemble> {
    if p.max_photons() < setup.total_photons() {
        return Err(Error::contract(format!(
            "detector resolves up to {} photons, gate carries {}",
            p.max_photons(),
            setup.total_photons()
        )));
    }
    let full = propagate(setup, u)?;
    let pattern = setup.postselect_pattern();
    let mut entries = Vec::new();
    for branch in condition_on_ancilla(&full, setup.ancilla_modes())? {
        let readout_probability = p.readout_prob(pattern, &branch.outcome)?;
        let output_photons = branch.state.photons();
        entries.push(EnsembleEntry {
            weight: readout_probability * branch.probability,
            outcome: branch.outcome,
            readout_probability,
            probability: branch.probability,
            conditional_state: branch.state,
            output_photons,
        });
    }
    let success = entries.iter().map(|e| e.weight).sum();
    check_success(setup, ConditionalEnsemble { entries, success })
}

fn check_success(setup: &GateSetup, ensemble: ConditionalEnsemble) -> Result<ConditionalEnsemble> {
    if ensemble.success > 0.0 {
        Ok(ensemble)
    } else {
        Err(Error::ImpossiblePostselection {
            pattern: setup.postselect_pattern().counts().to_vec(),
        })
    }
}
