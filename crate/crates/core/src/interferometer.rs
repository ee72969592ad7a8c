//! Rectangular beamsplitter/phase-shifter mesh.
//!
//! Each two-mode block acting on modes `(k, k+1)` is
//!
//! ```text
//! [ e^{i phi} cos(theta)   -sin(theta) ]
//! [ e^{i phi} sin(theta)    cos(theta) ]
//! ```
//!
//! Blocks are placed column by column: column `c` couples the pairs
//! `(c % 2, c % 2 + 1), (c % 2 + 2, c % 2 + 3), ...` from top to bottom, and
//! there are `M` columns for `M` modes. The first block in this order acts
//! first on the input. A diagonal of output phases is applied last, so
//!
//! ```text
//! U = diag(e^{i psi}) * B_last * ... * B_first
//! ```
//!
//! The flattened parameter vector is
//! `[theta_0, phi_0, theta_1, phi_1, ..., psi_0, ..., psi_{M-1}]`.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::CMatrix;

/// Top mode index of every block, in application order.
pub fn mesh_layout(modes: usize) -> Vec<usize> {
    let mut layout = Vec::with_capacity(modes * modes.saturating_sub(1) / 2);
    for column in 0..modes {
        let mut top = column % 2;
        while top + 1 < modes {
            layout.push(top);
            top += 2;
        }
    }
    layout
}

/// Angles of a rectangular mesh, in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshParams {
    pub modes: usize,
    /// `(theta, phi)` per block in [`mesh_layout`] order.
    pub mzi_angles: Vec<(f64, f64)>,
    pub output_phases: Vec<f64>,
}

impl MeshParams {
    pub fn zeros(modes: usize) -> Self {
        Self {
            modes,
            mzi_angles: vec![(0.0, 0.0); block_count(modes)],
            output_phases: vec![0.0; modes],
        }
    }

    pub fn block_count(&self) -> usize {
        block_count(self.modes)
    }

    /// Number of real parameters, `M(M-1) + M`.
    pub fn parameter_count(&self) -> usize {
        2 * self.block_count() + self.modes
    }

    pub fn validate(&self) -> Result<()> {
        if self.modes == 0 {
            return Err(Error::contract("mesh needs at least one mode"));
        }
        if self.mzi_angles.len() != self.block_count() {
            return Err(Error::contract(format!(
                "{} blocks given, a {}-mode mesh has {}",
                self.mzi_angles.len(),
                self.modes,
                self.block_count()
            )));
        }
        if self.output_phases.len() != self.modes {
            return Err(Error::contract(format!(
                "{} output phases given for {} modes",
                self.output_phases.len(),
                self.modes
            )));
        }
        let finite = self
            .mzi_angles
            .iter()
            .flat_map(|&(t, p)| [t, p])
            .chain(self.output_phases.iter().copied())
            .all(f64::is_finite);
        if !finite {
            return Err(Error::contract("mesh angles must be finite"));
        }
        Ok(())
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.mzi_angles
            .iter()
            .flat_map(|&(t, p)| [t, p])
            .chain(self.output_phases.iter().copied())
            .collect()
    }

    pub fn from_flat(modes: usize, flat: &[f64]) -> Result<Self> {
        let blocks = block_count(modes);
        if flat.len() != 2 * blocks + modes {
            return Err(Error::contract(format!(
                "{} flat parameters for a {modes}-mode mesh (expected {})",
                flat.len(),
                2 * blocks + modes
            )));
        }
        let (angles, phases) = flat.split_at(2 * blocks);
        Ok(Self {
            modes,
            mzi_angles: angles.chunks_exact(2).map(|c| (c[0], c[1])).collect(),
            output_phases: phases.to_vec(),
        })
    }

    pub fn build_unitary(&self) -> Result<CMatrix> {
        self.validate()?;
        let mut u = CMatrix::identity(self.modes, self.modes);
        for (&top, &(theta, phi)) in mesh_layout(self.modes).iter().zip(&self.mzi_angles) {
            apply_block_left(&mut u, top, &block(theta, phi));
        }
        for (i, &psi) in self.output_phases.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, psi);
            u.row_mut(i).iter_mut().for_each(|x| *x *= phase);
        }
        Ok(u)
    }

    /// The unitary and its partial derivatives with respect to every flat
    /// parameter.
    pub fn unitary_with_derivatives(&self) -> Result<(CMatrix, Vec<CMatrix>)> {
        self.validate()?;
        let m = self.modes;
        let layout = mesh_layout(m);
        let blocks: Vec<[Complex64; 4]> =
            self.mzi_angles.iter().map(|&(t, p)| block(t, p)).collect();

        // prefixes[s] = B_{s-1} ... B_0
        let mut prefixes = Vec::with_capacity(blocks.len() + 1);
        let mut acc = CMatrix::identity(m, m);
        prefixes.push(acc.clone());
        for (&top, b) in layout.iter().zip(&blocks) {
            apply_block_left(&mut acc, top, b);
            prefixes.push(acc.clone());
        }
        let mesh = acc;

        let phases: Vec<Complex64> = self
            .output_phases
            .iter()
            .map(|&psi| Complex64::from_polar(1.0, psi))
            .collect();

        // suffix = D B_last ... B_{s+1}, built from the right end
        let mut suffix = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(phases.clone()));
        let mut derivs = vec![CMatrix::zeros(m, m); self.parameter_count()];
        for s in (0..blocks.len()).rev() {
            let top = layout[s];
            let (theta, phi) = self.mzi_angles[s];
            let (d_theta, d_phi) = block_derivatives(theta, phi);
            derivs[2 * s] = sandwich(&suffix, top, &d_theta, &prefixes[s]);
            derivs[2 * s + 1] = sandwich(&suffix, top, &d_phi, &prefixes[s]);
            apply_block_right(&mut suffix, top, &blocks[s]);
        }

        let mut u = mesh.clone();
        for (i, &p) in phases.iter().enumerate() {
            u.row_mut(i).iter_mut().for_each(|x| *x *= p);
        }
        let offset = 2 * blocks.len();
        for (i, &p) in phases.iter().enumerate() {
            let d = &mut derivs[offset + i];
            let ip = Complex64::i() * p;
            for j in 0..m {
                d[(i, j)] = mesh[(i, j)] * ip;
            }
        }
        Ok((u, derivs))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::MalformedFile {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        let params: MeshParams = serde_json::from_str(&text).map_err(|e| Error::MalformedFile {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        params.validate().map_err(|e| Error::MalformedFile {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        Ok(params)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("mesh params always serialize")
    }
}

pub fn block_count(modes: usize) -> usize {
    modes * modes.saturating_sub(1) / 2
}

/// Row-major 2x2 block.
fn block(theta: f64, phi: f64) -> [Complex64; 4] {
    let e = Complex64::from_polar(1.0, phi);
    let (s, c) = theta.sin_cos();
    [
        e * c,
        Complex64::new(-s, 0.0),
        e * s,
        Complex64::new(c, 0.0),
    ]
}

fn block_derivatives(theta: f64, phi: f64) -> ([Complex64; 4], [Complex64; 4]) {
    let e = Complex64::from_polar(1.0, phi);
    let (s, c) = theta.sin_cos();
    let zero = Complex64::new(0.0, 0.0);
    let ie = Complex64::i() * e;
    (
        [
            -e * s,
            Complex64::new(-c, 0.0),
            e * c,
            Complex64::new(-s, 0.0),
        ],
        [ie * c, zero, ie * s, zero],
    )
}

/// `u <- B u` with `B` acting on rows `top, top+1`.
fn apply_block_left(u: &mut CMatrix, top: usize, b: &[Complex64; 4]) {
    for j in 0..u.ncols() {
        let x = u[(top, j)];
        let y = u[(top + 1, j)];
        u[(top, j)] = b[0] * x + b[1] * y;
        u[(top + 1, j)] = b[2] * x + b[3] * y;
    }
}

/// `u <- u B` with `B` acting on columns `top, top+1`.
fn apply_block_right(u: &mut CMatrix, top: usize, b: &[Complex64; 4]) {
    for i in 0..u.nrows() {
        let x = u[(i, top)];
        let y = u[(i, top + 1)];
        u[(i, top)] = x * b[0] + y * b[2];
        u[(i, top + 1)] = x * b[1] + y * b[3];
    }
}

/// `left * E(d) * right` where `E(d)` is the 2x2 `d` embedded at
/// `top, top+1` with zeros elsewhere.
fn sandwich(left: &CMatrix, top: usize, d: &[Complex64; 4], right: &CMatrix) -> CMatrix {
    let m = left.nrows();
    CMatrix::from_fn(m, m, |i, j| {
        let l0 = left[(i, top)];
        let l1 = left[(i, top + 1)];
        let r0 = right[(top, j)];
        let r1 = right[(top + 1, j)];
        l0 * (d[0] * r0 + d[1] * r1) + l1 * (d[2] * r0 + d[3] * r1)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{max_abs, unitarity_defect};

    #[test]
    fn layout_sizes() {
        assert_eq!(mesh_layout(1), Vec::<usize>::new());
        assert_eq!(mesh_layout(2), vec![0]);
        assert_eq!(mesh_layout(3), vec![0, 1, 0]);
        assert_eq!(mesh_layout(4), vec![0, 2, 1, 0, 2, 1]);
        assert_eq!(
            mesh_layout(6),
            vec![0, 2, 4, 1, 3, 0, 2, 4, 1, 3, 0, 2, 4, 1, 3]
        );
        for m in 1..=8 {
            assert_eq!(mesh_layout(m).len(), m * (m - 1) / 2);
        }
    }

    #[test]
    fn zero_angles_give_identity() {
        for m in 1..=6 {
            let u = MeshParams::zeros(m).build_unitary().unwrap();
            assert!(max_abs(&(u - CMatrix::identity(m, m))) < 1e-15);
        }
    }

    #[test]
    fn single_block_quarter_turn() {
        let mut p = MeshParams::zeros(2);
        p.mzi_angles[0] = (std::f64::consts::FRAC_PI_4, 0.0);
        let u = p.build_unitary().unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let expect = CMatrix::from_row_slice(2, 2, &[h, -h, h, h].map(|x| Complex64::new(x, 0.0)));
        assert!(max_abs(&(u - expect)) < 1e-15);
    }

    #[test]
    fn parameter_count_matches_group_dimension() {
        assert_eq!(MeshParams::zeros(6).parameter_count(), 36);
        for m in 1..=6 {
            assert_eq!(MeshParams::zeros(m).parameter_count(), m * m);
        }
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let mut p = MeshParams::zeros(4);
        p.output_phases.pop();
        assert!(matches!(p.build_unitary(), Err(Error::Contract(_))));
        let mut p = MeshParams::zeros(4);
        p.mzi_angles.push((0.0, 0.0));
        assert!(matches!(p.build_unitary(), Err(Error::Contract(_))));
        assert!(MeshParams::from_flat(4, &[0.0; 15]).is_err());
    }

    #[test]
    fn derivatives_match_unitary() {
        let flat: Vec<f64> = (0..36).map(|k| (k as f64 * 0.731).sin() * 3.0).collect();
        let p = MeshParams::from_flat(6, &flat).unwrap();
        let (u, derivs) = p.unitary_with_derivatives().unwrap();
        assert!(max_abs(&(&u - p.build_unitary().unwrap())) < 1e-14);
        assert!(unitarity_defect(&u) < 1e-13);
        let h = 1e-6;
        for (k, d) in derivs.iter().enumerate() {
            let mut plus = flat.clone();
            plus[k] += h;
            let mut minus = flat.clone();
            minus[k] -= h;
            let up = MeshParams::from_flat(6, &plus)
                .unwrap()
                .build_unitary()
                .unwrap();
            let um = MeshParams::from_flat(6, &minus)
                .unwrap()
                .build_unitary()
                .unwrap();
            let fd = (up - um) / Complex64::new(2.0 * h, 0.0);
            assert!(max_abs(&(fd - d)) < 1e-8, "parameter {k}");
        }
    }

    #[test]
    fn json_shape() {
        let mut p = MeshParams::zeros(2);
        p.mzi_angles[0] = (0.5, -0.25);
        let v: serde_json::Value = serde_json::from_str(&p.to_json()).unwrap();
        assert_eq!(v["modes"], 2);
        assert_eq!(v["mzi_angles"][0][0], 0.5);
        assert_eq!(v["mzi_angles"][0][1], -0.25);
        assert_eq!(v["output_phases"].as_array().unwrap().len(), 2);
        let back: MeshParams = serde_json::from_value(v).unwrap();
        assert_eq!(back, p);
    }
}
