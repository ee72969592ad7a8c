//! Fixed-photon-number Fock sectors, matrix permanents and the lift of
//! mode unitaries onto a sector.
//!
//! Conventions used throughout the crate:
//!
//! * A passive interferometer with mode matrix `u` maps creation operators as
//!   `a_j^† -> sum_i u[i][j] a_i^†`.
//! * The sector amplitude `<n| phi(u) |m>` is `perm(u[n, m]) / sqrt(n! m!)`,
//!   where `u[n, m]` repeats row `i` `n_i` times and column `j` `m_j` times.
//!   With this convention `phi(u v) = phi(u) phi(v)`.
//! * Sector bases are ordered lexicographically descending, e.g.
//!   `(2,0), (1,1), (0,2)` for two photons in two modes.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

const FACTORIALS: [u64; 9] = [1, 1, 2, 6, 24, 120, 720, 5040, 40320];

/// Exact `n!` for `n <= 20`; the table covers every photon count used in
/// practice.
pub fn factorial(n: usize) -> u64 {
    match FACTORIALS.get(n) {
        Some(&f) => f,
        None => (FACTORIALS.len() as u64..=n as u64).product::<u64>() * FACTORIALS[8],
    }
}

/// Photon counts per optical mode.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OccupationVector(Vec<usize>);

impl OccupationVector {
    pub fn new(counts: Vec<usize>) -> Self {
        Self(counts)
    }

    pub fn vacuum(modes: usize) -> Self {
        Self(vec![0; modes])
    }

    pub fn counts(&self) -> &[usize] {
        &self.0
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    /// `prod_i n_i!`
    pub fn factorial_product(&self) -> u64 {
        self.0.iter().map(|&n| factorial(n)).product()
    }

    /// Mode indices with multiplicity: mode `i` appears `n_i` times.
    pub fn expanded_modes(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(mode, &n)| std::iter::repeat_n(mode, n))
            .collect()
    }

    /// Counts restricted to `modes`, in the given order.
    pub fn select(&self, modes: &[usize]) -> OccupationVector {
        OccupationVector(modes.iter().map(|&m| self.0[m]).collect())
    }
}

impl From<Vec<usize>> for OccupationVector {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

impl fmt::Display for OccupationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ">")
    }
}

/// All occupation vectors with `photons` photons in `modes` modes.
#[derive(Debug, Clone)]
pub struct FockSector {
    modes: usize,
    photons: usize,
    basis: Vec<OccupationVector>,
    index: HashMap<OccupationVector, usize>,
}

impl PartialEq for FockSector {
    fn eq(&self, other: &Self) -> bool {
        self.modes == other.modes && self.photons == other.photons
    }
}

impl FockSector {
    /// Enumerates the sector in lexicographically descending order.
    ///
    /// Panics if `modes == 0`; mode counts are validated when configs are
    /// parsed.
    pub fn new(modes: usize, photons: usize) -> Self {
        assert!(modes >= 1, "a Fock sector needs at least one mode");
        let mut basis = Vec::with_capacity(sector_dimension(modes, photons));
        let mut prefix = Vec::with_capacity(modes);
        fill_descending(&mut prefix, modes, photons, &mut basis);
        let index = basis
            .iter()
            .enumerate()
            .map(|(k, occ)| (occ.clone(), k))
            .collect();
        Self {
            modes,
            photons,
            basis,
            index,
        }
    }

    pub fn shared(modes: usize, photons: usize) -> Arc<Self> {
        Arc::new(Self::new(modes, photons))
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn photons(&self) -> usize {
        self.photons
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn basis(&self) -> &[OccupationVector] {
        &self.basis
    }

    pub fn index_of(&self, occ: &OccupationVector) -> Option<usize> {
        self.index.get(occ).copied()
    }
}

/// Binomial `C(modes + photons - 1, photons)`.
pub fn sector_dimension(modes: usize, photons: usize) -> usize {
    if modes == 0 {
        return usize::from(photons == 0);
    }
    let mut c: u128 = 1;
    for k in 0..photons as u128 {
        c = c * (modes as u128 + k) / (k + 1);
    }
    c as usize
}

fn fill_descending(
    prefix: &mut Vec<usize>,
    modes_left: usize,
    photons_left: usize,
    out: &mut Vec<OccupationVector>,
) {
    if modes_left == 1 {
        let mut counts = prefix.clone();
        counts.push(photons_left);
        out.push(OccupationVector(counts));
        return;
    }
    for k in (0..=photons_left).rev() {
        prefix.push(k);
        fill_descending(prefix, modes_left - 1, photons_left - k, out);
        prefix.pop();
    }
}

/// Permanent of the `n x n` matrix whose entries are produced by `entry`.
///
/// Glynn's formula with Gray-code ordering, `O(2^(n-1) n)`.
pub fn permanent_by<F>(n: usize, entry: F) -> Complex64
where
    F: Fn(usize, usize) -> Complex64,
{
    if n == 0 {
        return ONE;
    }
    // column sums with every delta = +1
    let mut sums: Vec<Complex64> = (0..n).map(|j| (0..n).map(|i| entry(i, j)).sum()).collect();
    let mut total: Complex64 = sums.iter().product();
    let mut sign = 1.0;
    let mut gray: u64 = 0;
    for k in 1u64..(1u64 << (n - 1)) {
        let bit = k.trailing_zeros() as usize;
        gray ^= 1 << bit;
        let row = bit + 1;
        let factor = if gray & (1 << bit) != 0 { -2.0 } else { 2.0 };
        for (j, s) in sums.iter_mut().enumerate() {
            *s += entry(row, j) * factor;
        }
        sign = -sign;
        total += sums.iter().product::<Complex64>() * sign;
    }
    total / (1u64 << (n - 1)) as f64
}

/// Permanent together with its gradient `d perm / d a[i][j]` (row-major).
pub fn permanent_with_gradient<F>(n: usize, entry: F) -> (Complex64, Vec<Complex64>)
where
    F: Fn(usize, usize) -> Complex64,
{
    if n == 0 {
        return (ONE, Vec::new());
    }
    let mut sums: Vec<Complex64> = (0..n).map(|j| (0..n).map(|i| entry(i, j)).sum()).collect();
    let mut delta = vec![1.0f64; n];
    let mut total = ZERO;
    let mut grad = vec![ZERO; n * n];
    let mut prefix = vec![ONE; n + 1];
    let mut suffix = vec![ONE; n + 1];
    let mut sign = 1.0;
    let mut gray: u64 = 0;
    for k in 0u64..(1u64 << (n - 1)) {
        if k > 0 {
            let bit = k.trailing_zeros() as usize;
            gray ^= 1 << bit;
            let row = bit + 1;
            let flipped = gray & (1 << bit) != 0;
            delta[row] = if flipped { -1.0 } else { 1.0 };
            let factor = if flipped { -2.0 } else { 2.0 };
            for (j, s) in sums.iter_mut().enumerate() {
                *s += entry(row, j) * factor;
            }
            sign = -sign;
        }
        for j in 0..n {
            prefix[j + 1] = prefix[j] * sums[j];
        }
        for j in (0..n).rev() {
            suffix[j] = suffix[j + 1] * sums[j];
        }
        total += prefix[n] * sign;
        for b in 0..n {
            let excluded = prefix[b] * suffix[b + 1] * sign;
            for (a, &d) in delta.iter().enumerate() {
                grad[a * n + b] += excluded * d;
            }
        }
    }
    let scale = 1.0 / (1u64 << (n - 1)) as f64;
    grad.iter_mut().for_each(|g| *g *= scale);
    (total * scale, grad)
}

/// Permanent of a square complex matrix. The empty matrix has permanent 1.
pub fn permanent(a: &CMatrix) -> Result<Complex64> {
    if a.nrows() != a.ncols() {
        return Err(Error::contract(format!(
            "permanent of a non-square {}x{} matrix",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(permanent_by(a.nrows(), |i, j| a[(i, j)]))
}

/// Reference permanent by expansion along the first row, `O(n!)`.
///
/// Kept for cross-checking [`permanent`]; do not use on large matrices.
pub fn permanent_laplace(a: &CMatrix) -> Result<Complex64> {
    if a.nrows() != a.ncols() {
        return Err(Error::contract(format!(
            "permanent of a non-square {}x{} matrix",
            a.nrows(),
            a.ncols()
        )));
    }
    let cols: Vec<usize> = (0..a.ncols()).collect();
    Ok(laplace(a, 0, &cols))
}

fn laplace(a: &CMatrix, row: usize, cols: &[usize]) -> Complex64 {
    if cols.is_empty() {
        return ONE;
    }
    let mut acc = ZERO;
    for (pos, &c) in cols.iter().enumerate() {
        let rest: Vec<usize> = cols
            .iter()
            .enumerate()
            .filter(|&(p, _)| p != pos)
            .map(|(_, &c)| c)
            .collect();
        acc += a[(row, c)] * laplace(a, row + 1, &rest);
    }
    acc
}

/// `<out| phi(u) |inp>` for occupation vectors with equal photon number.
pub fn transition_amplitude(
    u: &CMatrix,
    out: &OccupationVector,
    inp: &OccupationVector,
) -> Complex64 {
    if out.total() != inp.total() {
        return ZERO;
    }
    let rows = out.expanded_modes();
    let cols = inp.expanded_modes();
    let norm = ((out.factorial_product() * inp.factorial_product()) as f64).sqrt();
    permanent_by(rows.len(), |a, b| u[(rows[a], cols[b])]) / norm
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Checks `max |u^dagger u - I| <= tol`.
pub fn is_unitary(u: &CMatrix, tol: f64) -> bool {
    u.is_square() && unitarity_defect(u) <= tol
}

/// `max |u^dagger u - I|` entrywise.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let prod = u.adjoint() * u;
    let n = prod.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..prod.ncols() {
            let expected = if i == j { ONE } else { ZERO };
            worst = worst.max((prod[(i, j)] - expected).norm());
        }
    }
    worst
}

fn check_mode_unitary(u: &CMatrix, sector: &FockSector) -> Result<()> {
    if !u.is_square() || u.nrows() != sector.modes() {
        return Err(Error::contract(format!(
            "mode matrix is {}x{} but the sector has {} modes",
            u.nrows(),
            u.ncols(),
            sector.modes()
        )));
    }
    Ok(())
}

/// Representation of a mode unitary on one Fock sector.
#[derive(Debug, Clone)]
pub struct SectorUnitary {
    entries: CMatrix,
}

impl SectorUnitary {
    pub fn dimension(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn apply(&self, state: &PureState) -> Result<PureState> {
        if state.len() != self.dimension() {
            return Err(Error::contract(
                "state and sector unitary dimensions differ",
            ));
        }
        let v = nalgebra::DVector::from_column_slice(state.amplitudes());
        let out = &self.entries * v;
        PureState::new(state.sector().clone(), out.as_slice().to_vec())
    }
}

/// Builds the full sector matrix of `u`. Rows are evaluated in parallel; each
/// entry is a single permanent so results do not depend on scheduling.
pub fn lift_unitary(u: &CMatrix, sector: &FockSector) -> Result<SectorUnitary> {
    check_mode_unitary(u, sector)?;
    if !is_unitary(u, 1e-10) {
        return Err(Error::contract(
            "lift_unitary requires a unitary mode matrix",
        ));
    }
    let dim = sector.len();
    let basis = sector.basis();
    let rows: Vec<Vec<Complex64>> = basis
        .par_iter()
        .map(|out| {
            basis
                .iter()
                .map(|inp| transition_amplitude(u, out, inp))
                .collect()
        })
        .collect();
    let entries = CMatrix::from_fn(dim, dim, |i, j| rows[i][j]);
    Ok(SectorUnitary { entries })
}

/// `phi(u) |state>` without materialising the sector matrix: only columns
/// with a nonzero input amplitude are evaluated.
pub fn apply_lifted(u: &CMatrix, state: &PureState) -> Result<PureState> {
    let sector = state.sector();
    check_mode_unitary(u, sector)?;
    let support: Vec<(&OccupationVector, Complex64)> = sector
        .basis()
        .iter()
        .zip(state.amplitudes())
        .filter(|(_, a)| **a != ZERO)
        .map(|(occ, &a)| (occ, a))
        .collect();
    let amplitudes: Vec<Complex64> = sector
        .basis()
        .par_iter()
        .map(|out| {
            support
                .iter()
                .map(|(inp, c)| transition_amplitude(u, out, inp) * c)
                .sum()
        })
        .collect();
    let mut result = PureState::new(sector.clone(), amplitudes)?;
    result.normalized = state.normalized;
    Ok(result)
}

/// A vector in one Fock sector. Amplitudes follow the sector basis order.
#[derive(Debug, Clone)]
pub struct PureState {
    sector: Arc<FockSector>,
    amplitudes: Vec<Complex64>,
    normalized: bool,
}

impl PureState {
    /// Wraps raw amplitudes; the state is not marked normalized.
    pub fn new(sector: Arc<FockSector>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != sector.len() {
            return Err(Error::contract(format!(
                "{} amplitudes for a sector of dimension {}",
                amplitudes.len(),
                sector.len()
            )));
        }
        Ok(Self {
            sector,
            amplitudes,
            normalized: false,
        })
    }

    pub fn basis_state(sector: Arc<FockSector>, occ: &OccupationVector) -> Result<Self> {
        let k = sector
            .index_of(occ)
            .ok_or_else(|| Error::contract(format!("{occ} is not in the sector")))?;
        let mut amplitudes = vec![ZERO; sector.len()];
        amplitudes[k] = ONE;
        Ok(Self {
            sector,
            amplitudes,
            normalized: true,
        })
    }

    /// Builds a normalized state from `(occupation, amplitude)` terms. All
    /// occupations must carry the same photon number; repeated terms add.
    pub fn from_terms(modes: usize, terms: &[(OccupationVector, Complex64)]) -> Result<Self> {
        let photons = terms
            .first()
            .map(|(occ, _)| occ.total())
            .ok_or_else(|| Error::Validation("state has no terms".into()))?;
        let sector = FockSector::shared(modes, photons);
        let mut amplitudes = vec![ZERO; sector.len()];
        for (occ, amp) in terms {
            if occ.modes() != modes {
                return Err(Error::Validation(format!(
                    "{occ} has {} modes, expected {modes}",
                    occ.modes()
                )));
            }
            if occ.total() != photons {
                return Err(Error::Validation(format!(
                    "{occ} has {} photons; all terms need {photons}",
                    occ.total()
                )));
            }
            let k = sector
                .index_of(occ)
                .expect("occupation lies in its own sector");
            amplitudes[k] += amp;
        }
        Self::new(sector, amplitudes)?.into_normalized()
    }

    pub fn into_normalized(mut self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if norm == 0.0 {
            return Err(Error::Validation("cannot normalize the zero vector".into()));
        }
        self.amplitudes.iter_mut().for_each(|a| *a /= norm);
        self.normalized = true;
        Ok(self)
    }

    pub fn sector(&self) -> &Arc<FockSector> {
        &self.sector
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn photons(&self) -> usize {
        self.sector.photons()
    }

    pub fn modes(&self) -> usize {
        self.sector.modes()
    }

    pub fn amplitude(&self, occ: &OccupationVector) -> Complex64 {
        self.sector
            .index_of(occ)
            .map_or(ZERO, |k| self.amplitudes[k])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`; states in different photon sectors are orthogonal.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        if self.modes() != other.modes() {
            return Err(Error::contract(format!(
                "inner product between {}-mode and {}-mode states",
                self.modes(),
                other.modes()
            )));
        }
        if self.photons() != other.photons() {
            return Ok(ZERO);
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }
}

/// Fidelity `<target| rho |target>` of a (possibly mixed) state against a
/// pure target.
pub trait FidelityWithPure {
    fn fidelity_with_pure(&self, target: &PureState) -> Result<f64>;
}

impl FidelityWithPure for PureState {
    fn fidelity_with_pure(&self, target: &PureState) -> Result<f64> {
        let norm = self.norm_sqr();
        if norm == 0.0 {
            return Err(Error::UndefinedOutputState);
        }
        Ok(target.inner(self)?.norm_sqr() / norm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn basis_small_sectors() {
        let s = FockSector::new(2, 2);
        let counts: Vec<&[usize]> = s.basis().iter().map(|o| o.counts()).collect();
        assert_eq!(counts, vec![&[2, 0][..], &[1, 1], &[0, 2]]);
        assert_eq!(FockSector::new(6, 4).len(), 126);
        let vac = FockSector::new(3, 0);
        assert_eq!(vac.len(), 1);
        assert_eq!(vac.basis()[0].counts(), &[0, 0, 0]);
    }

    #[test]
    fn basis_index_is_inverse() {
        for m in 1..=6 {
            for n in 0..=4 {
                let s = FockSector::new(m, n);
                assert_eq!(s.len(), sector_dimension(m, n));
                for (k, occ) in s.basis().iter().enumerate() {
                    assert_eq!(s.index_of(occ), Some(k));
                    assert_eq!(occ.total(), n);
                }
                // strictly descending
                assert!(s.basis().windows(2).all(|w| w[0] > w[1]));
            }
        }
    }

    #[test]
    fn factorial_table() {
        assert_eq!(factorial(0), 1);
        assert_eq!(factorial(8), 40320);
        assert_eq!(factorial(10), 3_628_800);
    }

    #[test]
    fn permanent_small_cases() {
        assert_eq!(permanent(&CMatrix::identity(3, 3)).unwrap(), ONE);
        let ones = CMatrix::from_element(3, 3, ONE);
        assert!((permanent(&ones).unwrap() - c(6.0, 0.0)).norm() < 1e-14);
        assert_eq!(permanent(&CMatrix::zeros(0, 0)).unwrap(), ONE);
        let m =
            CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)]);
        assert!((permanent(&m).unwrap() - c(10.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn permanent_rejects_non_square() {
        let m = CMatrix::zeros(2, 3);
        assert!(matches!(permanent(&m), Err(Error::Contract(_))));
        assert!(matches!(permanent_laplace(&m), Err(Error::Contract(_))));
    }

    #[test]
    fn permanent_gradient_matches_minors() {
        let m = CMatrix::from_fn(4, 4, |i, j| {
            c((i * 3 + j) as f64 * 0.1 - 0.4, (i as f64 - j as f64) * 0.3)
        });
        let (p, grad) = permanent_with_gradient(4, |i, j| m[(i, j)]);
        assert!((p - permanent_laplace(&m).unwrap()).norm() < 1e-12);
        for a in 0..4 {
            for b in 0..4 {
                let minor = m.clone().remove_row(a).remove_column(b);
                let expect = permanent_laplace(&minor).unwrap();
                assert!((grad[a * 4 + b] - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn hong_ou_mandel() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bs = CMatrix::from_row_slice(2, 2, &[c(h, 0.0), c(-h, 0.0), c(h, 0.0), c(h, 0.0)]);
        let sector = FockSector::shared(2, 2);
        let input = PureState::basis_state(sector.clone(), &vec![1, 1].into()).unwrap();
        let out = lift_unitary(&bs, &sector).unwrap().apply(&input).unwrap();
        assert!(out.amplitude(&vec![1, 1].into()).norm() < 1e-15);
        assert!((out.amplitude(&vec![2, 0].into()).norm_sqr() - 0.5).abs() < 1e-14);
        assert!((out.amplitude(&vec![0, 2].into()).norm_sqr() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn phase_accumulates_per_photon() {
        let phi = 0.37;
        let u = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            ONE,
            Complex64::from_polar(1.0, phi),
        ]));
        for n in 0..5 {
            let sector = FockSector::shared(2, n);
            let input = PureState::basis_state(sector.clone(), &vec![0, n].into()).unwrap();
            let out = apply_lifted(&u, &input).unwrap();
            let expect = Complex64::from_polar(1.0, phi * n as f64);
            for (k, occ) in sector.basis().iter().enumerate() {
                let want = if occ.counts() == [0, n] { expect } else { ZERO };
                assert!((out.amplitudes()[k] - want).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn lift_of_identity_is_identity() {
        let sector = FockSector::new(3, 3);
        let lifted = lift_unitary(&CMatrix::identity(3, 3), &sector).unwrap();
        assert!(max_abs(&(lifted.entries() - CMatrix::identity(10, 10))) < 1e-15);
    }

    #[test]
    fn lift_rejects_wrong_dimension() {
        let sector = FockSector::new(3, 2);
        assert!(matches!(
            lift_unitary(&CMatrix::identity(2, 2), &sector),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn fidelity_of_pure_states() {
        let sector = FockSector::shared(2, 1);
        let a = PureState::basis_state(sector.clone(), &vec![1, 0].into()).unwrap();
        let b = PureState::basis_state(sector.clone(), &vec![0, 1].into()).unwrap();
        assert!((a.fidelity_with_pure(&a).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(b.fidelity_with_pure(&a).unwrap(), 0.0);
        let zero = PureState::new(sector, vec![ZERO; 2]).unwrap();
        assert!(matches!(
            zero.fidelity_with_pure(&a),
            Err(Error::UndefinedOutputState)
        ));
    }

    #[test]
    fn from_terms_normalizes() {
        let s = PureState::from_terms(
            2,
            &[
                (vec![1, 0].into(), c(1.0, 0.0)),
                (vec![0, 1].into(), c(0.0, 1.0)),
            ],
        )
        .unwrap();
        assert!(s.is_normalized());
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
        let mixed = PureState::from_terms(2, &[(vec![1, 0].into(), ONE), (vec![1, 1].into(), ONE)]);
        assert!(matches!(mixed, Err(Error::Validation(_))));
    }
}
