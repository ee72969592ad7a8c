#![allow(dead_code)]

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use nondet_optics::detector::ReadoutMatrix;
use nondet_optics::experiment::ExperimentConfig;
use nondet_optics::fock::{lift_unitary, CMatrix, FockSector, OccupationVector, PureState};
use nondet_optics::gate::{ConditionalEnsemble, GateSetup};

pub fn occ(v: &[usize]) -> OccupationVector {
    OccupationVector::new(v.to_vec())
}

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the phases
/// of R's diagonal moved into Q.
pub fn haar_unitary<R: Rng>(rng: &mut R, m: usize) -> CMatrix {
    let g = CMatrix::from_fn(m, m, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let phases = DVector::from_fn(m, |i, _| {
        let d = r[(i, i)];
        d / d.norm()
    });
    q * CMatrix::from_diagonal(&phases)
}

pub fn random_complex_matrix<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

pub fn random_state<R: Rng>(rng: &mut R, modes: usize, photons: usize) -> PureState {
    let sector = FockSector::shared(modes, photons);
    let amps = (0..sector.len())
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    PureState::new(sector, amps)
        .unwrap()
        .into_normalized()
        .unwrap()
}

pub fn default_experiment() -> nondet_optics::experiment::Experiment {
    ExperimentConfig::default().build().unwrap()
}

/// Every output occupation with at most `max_photons` photons, sector by
/// sector.
pub fn output_union_basis(modes: usize, max_photons: usize) -> Vec<OccupationVector> {
    (0..=max_photons)
        .flat_map(|n| FockSector::new(modes, n).basis().to_vec())
        .collect()
}

/// Brute-force biased-detector output state: densify `phi(u) rho phi(u)^dag`
/// on the full sector, apply `I (x) |n><n|` as an explicit projector, trace
/// out the ancillas, and mix with `P(x|n)`.
pub fn dense_output_density(
    setup: &GateSetup,
    u: &CMatrix,
    p: &ReadoutMatrix,
) -> (Vec<OccupationVector>, CMatrix, f64) {
    let sector = setup.full_sector();
    let lifted = lift_unitary(u, sector).unwrap();
    let input = DVector::from_column_slice(setup.embedded_input().amplitudes());
    let out = lifted.entries() * input;
    let rho = &out * out.adjoint();

    let union = output_union_basis(setup.output_modes().len(), setup.total_photons());
    let dim = union.len();
    let mut mixed = CMatrix::zeros(dim, dim);
    let mut success = 0.0;
    let anc_modes = setup.ancilla_modes().len();
    for anc_photons in 0..=setup.total_photons() {
        for n in FockSector::new(anc_modes, anc_photons).basis() {
            let projector = CMatrix::from_fn(sector.len(), sector.len(), |i, j| {
                if i == j && sector.basis()[i].select(setup.ancilla_modes()) == *n {
                    c(1.0)
                } else {
                    c(0.0)
                }
            });
            let projected = &rho * projector;
            let weight = p.readout_prob(setup.postselect_pattern(), n).unwrap();
            for (a, oa) in union.iter().enumerate() {
                for (b, ob) in union.iter().enumerate() {
                    let (Some(i), Some(j)) = (
                        sector.index_of(&setup.join(oa, n)),
                        sector.index_of(&setup.join(ob, n)),
                    ) else {
                        continue;
                    };
                    mixed[(a, b)] += projected[(i, j)] * weight;
                }
            }
            success += weight * (0..sector.len()).map(|i| projected[(i, i)].re).sum::<f64>();
        }
    }
    (union, mixed / c(success), success)
}

/// `sum_n P(x|n) |phi_n><phi_n| / S` embedded in `union`.
pub fn ensemble_density(ensemble: &ConditionalEnsemble, union: &[OccupationVector]) -> CMatrix {
    let dim = union.len();
    let mut rho = CMatrix::zeros(dim, dim);
    for e in &ensemble.entries {
        let embedded: Vec<Complex64> = union
            .iter()
            .map(|o| {
                e.conditional_state.amplitude(o)
                    * if o.total() == e.output_photons {
                        1.0
                    } else {
                        0.0
                    }
            })
            .collect();
        for a in 0..dim {
            for b in 0..dim {
                rho[(a, b)] += embedded[a] * embedded[b].conj() * e.readout_probability;
            }
        }
    }
    rho / c(ensemble.success)
}

/// `<psi| rho |psi>` for `psi` embedded in `union`.
pub fn dense_fidelity(rho: &CMatrix, union: &[OccupationVector], target: &PureState) -> f64 {
    let v: Vec<Complex64> = union
        .iter()
        .map(|o| {
            if o.total() == target.photons() {
                target.amplitude(o)
            } else {
                c(0.0)
            }
        })
        .collect();
    let mut acc = c(0.0);
    for a in 0..v.len() {
        for b in 0..v.len() {
            acc += v[a].conj() * rho[(a, b)] * v[b];
        }
    }
    acc.re
}
