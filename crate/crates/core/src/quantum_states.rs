//! Density matrices of `n`-photon pulses in the weight-class basis.
//!
//! An `n`-photon pulse in polarization `x` lives in the span of the `m`
//! orthonormal vectors `|w[m]⟩`, the uniform superpositions of `n`-bit strings
//! with Hamming weight `≡ w (mod m)`. In that basis
//!
//! ```text
//! |x,n,m⟩⟨x,n,m| = Σ_{D=1-m}^{m-1} e^{iDxθ} M_D,    θ = 2π/m,
//! ```
//!
//! where `M_D` holds `2^{-n} sqrt(C(n,w[m]) C(n,w+D[m]))` at `(w, w+D)` for
//! every `w` with both indices in `0..m`. With this labelling the single-photon
//! state `x` is `(|0⟩ + e^{-ixθ}|1⟩)/√2`; the opposite orientation conjugates
//! every matrix below and leaves all spectra and entropies unchanged.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::protocol_math::{check_states, LumpedBinomialTable};

/// Tolerance on Hermiticity and unit trace.
pub const STRUCTURE_TOL: f64 = 1e-12;

/// Eigenvalues above `-PSD_TOL` are accepted and clamped to zero.
pub const PSD_TOL: f64 = 1e-10;

/// `m × m` density matrix in the `|w[m]⟩` basis, tagged with its photon
/// number.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: usize,
    n: usize,
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    /// Largest `|ρ_ij - conj(ρ_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.m {
            for j in i..self.m {
                worst = worst.max((self.entries[(i, j)] - self.entries[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut values: Vec<f64> = self
            .entries
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        values.sort_by(f64::total_cmp);
        values
    }

    /// Checks Hermiticity, unit trace and positivity.
    pub fn validate(&self) -> Result<()> {
        let defect = self.hermiticity_defect();
        if defect > STRUCTURE_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let trace_defect = (self.trace() - Complex64::new(1.0, 0.0)).norm();
        if trace_defect > STRUCTURE_TOL {
            return Err(Error::InvalidTrace(trace_defect));
        }
        let smallest = self.eigenvalues().first().copied().unwrap_or(0.0);
        if smallest < -PSD_TOL {
            return Err(Error::NotPositive(smallest));
        }
        Ok(())
    }
}

/// The shifted diagonal matrix `M_{D,m,n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedDiagonal {
    m: usize,
    n: usize,
    shift: i64,
    // values[k] sits at (first_row + k, first_row + k + shift)
    values: Vec<f64>,
}

impl ShiftedDiagonal {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn shift(&self) -> i64 {
        self.shift
    }

    fn first_row(&self) -> usize {
        (-self.shift).max(0) as usize
    }

    /// Nonzero-pattern positions `(row, col, value)`; there are `m - |D|` of
    /// them, some of which may hold zero.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let first = self.first_row();
        self.values.iter().enumerate().map(move |(k, &v)| {
            let row = first + k;
            (row, (row as i64 + self.shift) as usize, v)
        })
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        if col as i64 - row as i64 != self.shift {
            return 0.0;
        }
        self.values
            .get(row.wrapping_sub(self.first_row()))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut out = DMatrix::zeros(self.m, self.m);
        for (i, j, v) in self.entries() {
            out[(i, j)] = Complex64::new(v, 0.0);
        }
        out
    }

    /// `M_{-D}`, which is the transpose (and adjoint) of `M_D`.
    pub fn adjoint(&self) -> Self {
        Self {
            m: self.m,
            n: self.n,
            shift: -self.shift,
            values: self.values.clone(),
        }
    }
}

/// Normalized weight-class populations `C(n, w[m]) / 2^n`.
fn class_populations(n: usize, m: usize) -> Result<Vec<f64>> {
    let table = LumpedBinomialTable::new(m, n)?;
    let row = table.row(n).expect("row n exists");
    let scale = 2f64.powi(-(n as i32));
    Ok(row.iter().map(|&c| c as f64 * scale).collect())
}

fn shifted_from_populations(pops: &[f64], n: usize, shift: i64) -> ShiftedDiagonal {
    let m = pops.len();
    let first = (-shift).max(0) as usize;
    let len = m - shift.unsigned_abs() as usize;
    let values = (first..first + len)
        .map(|w| {
            let col = (w as i64 + shift) as usize;
            (pops[w] * pops[col]).sqrt()
        })
        .collect();
    ShiftedDiagonal {
        m,
        n,
        shift,
        values,
    }
}

/// `M_{D,m,n}` for `|D| ≤ m - 1`.
pub fn shifted_matrix(shift: i64, m: usize, n: usize) -> Result<ShiftedDiagonal> {
    check_states(m)?;
    if shift.unsigned_abs() as usize >= m {
        return Err(Error::ShiftOutOfRange { shift, m });
    }
    let pops = class_populations(n, m)?;
    Ok(shifted_from_populations(&pops, n, shift))
}

/// Average `n`-photon state `ρ_{n,m} = M_{0,m,n}` sent by Alice.
pub fn rho_average(n: usize, m: usize) -> Result<DensityMatrix> {
    check_states(m)?;
    let pops = class_populations(n, m)?;
    let entries = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            Complex64::new(pops[i], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    Ok(DensityMatrix { m, n, entries })
}

/// State of an `n`-photon copy of Alice's pulse conditioned on Bob's
/// outcome `y`:
///
/// ```text
/// ρ_y = M_0 - e^{-iyθ}/2 (M_{m-1} + M_{-1}) - e^{iyθ}/2 (M_{1-m} + M_1)
/// ```
///
/// `M_{m-1}` and `M_{-1}` together fill the cyclic diagonal `col ≡ row - 1`.
pub fn rho_conditioned(y: usize, n: usize, m: usize) -> Result<DensityMatrix> {
    check_states(m)?;
    if y >= m {
        return Err(Error::SymbolOutOfRange { symbol: y, m });
    }
    let pops = class_populations(n, m)?;
    let theta = 2.0 * PI / m as f64;
    let down = Complex64::from_polar(0.5, -(y as f64) * theta);
    let up = down.conj();

    let mut entries = DMatrix::zeros(m, m);
    for (i, &p) in pops.iter().enumerate() {
        entries[(i, i)] = Complex64::new(p, 0.0);
    }
    let m_i = m as i64;
    for (shift, phase) in [(m_i - 1, down), (-1, down), (1 - m_i, up), (1, up)] {
        for (i, j, v) in shifted_from_populations(&pops, n, shift).entries() {
            entries[(i, j)] -= phase * v;
        }
    }
    Ok(DensityMatrix { m, n, entries })
}

/// Von Neumann entropy `-Σ λ log2 λ` in bits.
///
/// Eigenvalues in `[-1e-10, 0)` are clamped to zero. Fails if the matrix is
/// not a valid density matrix within tolerance.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let defect = rho.hermiticity_defect();
    if defect > STRUCTURE_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let trace_defect = (rho.trace() - Complex64::new(1.0, 0.0)).norm();
    if trace_defect > STRUCTURE_TOL {
        return Err(Error::InvalidTrace(trace_defect));
    }
    let values = rho.eigenvalues();
    if let Some(&smallest) = values.first() {
        if smallest < -PSD_TOL {
            return Err(Error::NotPositive(smallest));
        }
    }
    Ok(values
        .into_iter()
        .filter(|&l| l > 0.0)
        .map(|l| -l * l.log2())
        .sum())
}
