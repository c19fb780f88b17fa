//! Single-qubit density matrices and their closed-form spectral decomposition.
//!
//! Basis order is `(|1⟩, |0⟩)`: entry `[0][0]` is the excited population.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Mat2 = [[Complex64; 2]; 2];
pub type Vec2 = [Complex64; 2];

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const POSITIVITY_TOL: f64 = 1e-12;

/// Eigenvalue splitting below which the spectrum is treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-15;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn zeros() -> Mat2 {
    [[ZERO; 2]; 2]
}

pub fn matmul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = zeros();
    for (i, row) in out.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn add(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = *a;
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] += b[i][j];
        }
    }
    out
}

pub fn scale(a: &Mat2, s: f64) -> Mat2 {
    a.map(|row| row.map(|x| x * s))
}

pub fn adjoint(a: &Mat2) -> Mat2 {
    [
        [a[0][0].conj(), a[1][0].conj()],
        [a[0][1].conj(), a[1][1].conj()],
    ]
}

pub fn trace(a: &Mat2) -> Complex64 {
    a[0][0] + a[1][1]
}

/// Largest absolute entry of `a − b`.
pub fn max_abs_diff(a: &Mat2, b: &Mat2) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            m = m.max((a[i][j] - b[i][j]).norm());
        }
    }
    m
}

pub fn outer(u: &Vec2, v: &Vec2) -> Mat2 {
    [
        [u[0] * v[0].conj(), u[0] * v[1].conj()],
        [u[1] * v[0].conj(), u[1] * v[1].conj()],
    ]
}

/// `⟨u|v⟩`
pub fn inner(u: &Vec2, v: &Vec2) -> Complex64 {
    u[0].conj() * v[0] + u[1].conj() * v[1]
}

pub fn normalize(v: Vec2) -> Vec2 {
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    [v[0] / n, v[1] / n]
}

/// Rotates `v` so its first non-negligible component is real and positive.
pub fn fix_gauge(v: Vec2) -> Vec2 {
    let norm = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    let pivot = if v[0].norm() > 1e-14 * norm {
        v[0]
    } else {
        v[1]
    };
    let phase = pivot.conj() / pivot.norm();
    [v[0] * phase, v[1] * phase]
}

/// A validated 2×2 density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix2 {
    entries: Mat2,
}

impl DensityMatrix2 {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(entries: Mat2) -> Result<Self> {
        let herm = max_abs_diff(&entries, &adjoint(&entries));
        if !(herm <= HERMITIAN_TOL) {
            return Err(Error::InvalidState(format!(
                "not Hermitian (deviation {herm:.3e})"
            )));
        }
        let tr = trace(&entries);
        if !((tr.re - 1.0).abs() <= TRACE_TOL && tr.im.abs() <= TRACE_TOL) {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        let rho = Self { entries };
        let (lo, _) = rho.eigenvalues();
        if lo < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {lo:.3e}")));
        }
        Ok(rho)
    }

    /// Builds `[[ρ₁₁, ρ₁₀], [ρ₁₀*, ρ₀₀]]`.
    pub fn from_elements(rho11: f64, rho00: f64, rho10: Complex64) -> Result<Self> {
        Self::new([[c(rho11, 0.0), rho10], [rho10.conj(), c(rho00, 0.0)]])
    }

    pub fn pure(state: Vec2) -> Result<Self> {
        Self::new(outer(&normalize(state), &normalize(state)))
    }

    pub fn entries(&self) -> &Mat2 {
        &self.entries
    }

    pub fn excited_population(&self) -> f64 {
        self.entries[0][0].re
    }

    pub fn ground_population(&self) -> f64 {
        self.entries[1][1].re
    }

    pub fn coherence(&self) -> Complex64 {
        self.entries[0][1]
    }

    /// Bloch-vector length `r`, so that the eigenvalues are `(1 ± r)/2`.
    pub fn bloch_length(&self) -> f64 {
        let half_diff = 0.5 * (self.entries[0][0].re - self.entries[1][1].re);
        half_diff.hypot(self.entries[0][1].norm()) * 2.0
    }

    /// `(smaller, larger)` eigenvalues.
    fn eigenvalues(&self) -> (f64, f64) {
        let mean = 0.5 * (self.entries[0][0].re + self.entries[1][1].re);
        let half_gap = 0.5 * self.bloch_length();
        (mean - half_gap, mean + half_gap)
    }

    pub fn purity(&self) -> f64 {
        trace(&matmul(&self.entries, &self.entries)).re
    }
}

/// Eigenpairs of a density matrix, eigenvalues in descending order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralDecomposition {
    pub values: [f64; 2],
    pub vectors: [Vec2; 2],
}

impl SpectralDecomposition {
    pub fn reconstruct(&self) -> Mat2 {
        add(
            &scale(&outer(&self.vectors[0], &self.vectors[0]), self.values[0]),
            &scale(&outer(&self.vectors[1], &self.vectors[1]), self.values[1]),
        )
    }

    /// Rotates a matrix into the eigenbasis: `(V† A V)_ij = ⟨ω_i|A|ω_j⟩`.
    pub fn to_eigenbasis(&self, a: &Mat2) -> Mat2 {
        let mut out = zeros();
        for i in 0..2 {
            for j in 0..2 {
                let av = [
                    a[0][0] * self.vectors[j][0] + a[0][1] * self.vectors[j][1],
                    a[1][0] * self.vectors[j][0] + a[1][1] * self.vectors[j][1],
                ];
                out[i][j] = inner(&self.vectors[i], &av);
            }
        }
        out
    }

    /// Inverse of [`to_eigenbasis`](Self::to_eigenbasis).
    pub fn from_eigenbasis(&self, a: &Mat2) -> Mat2 {
        let mut out = zeros();
        for i in 0..2 {
            for j in 0..2 {
                out = add(
                    &out,
                    &scale_c(&outer(&self.vectors[i], &self.vectors[j]), a[i][j]),
                );
            }
        }
        out
    }
}

fn scale_c(a: &Mat2, s: Complex64) -> Mat2 {
    a.map(|row| row.map(|x| x * s))
}

/// Closed-form eigendecomposition.
///
/// Each eigenvector is gauge-fixed so its first non-negligible component is
/// real and positive. At exact degeneracy the computational basis `(|1⟩, |0⟩)`
/// is returned.
pub fn eigen_decompose(rho: &DensityMatrix2) -> SpectralDecomposition {
    let m = rho.entries();
    let a = m[0][0].re;
    let d = m[1][1].re;
    let b = m[0][1];
    let mean = 0.5 * (a + d);
    let h = 0.5 * (a - d);
    let half_gap = h.hypot(b.norm());
    let values = [mean + half_gap, mean - half_gap];

    if half_gap <= DEGENERACY_TOL {
        return SpectralDecomposition {
            values,
            vectors: [[ONE, ZERO], [ZERO, ONE]],
        };
    }

    // Two equivalent forms of the top eigenvector; pick the one without cancellation.
    let top = if h >= 0.0 {
        [c(h + half_gap, 0.0), b.conj()]
    } else {
        [b, c(half_gap - h, 0.0)]
    };
    let top = fix_gauge(normalize(top));
    let bottom = fix_gauge([-top[1].conj(), top[0].conj()]);
    SpectralDecomposition {
        values,
        vectors: [top, bottom],
    }
}
