//! Quantum Fisher information of the phase probe.
//!
//! The watched qubit is prepared in `(|0⟩ + |1⟩)/√2`, the phase gate
//! `U(θ) = |0⟩⟨0| + e^{iθ}|1⟩⟨1|` imprints `θ`, and the reservoir then acts as
//! the amplitude-damping channel
//!
//! ```text
//! ρ(t) = [[ρ₁₁ |C|²,  ρ₁₀ C], [ρ₀₁ C*,  ρ₀₀ + ρ₁₁ (1 − |C|²)]]
//! ```
//!
//! QFI is computed two ways: from the spectral formula with explicit
//! eigenvalue and eigenvector derivatives (cross-checked against the symmetric
//! logarithmic derivative), and from the closed form `QFI = C(t)²`.

use num_complex::Complex64;

use crate::density::{
    self, add, c, eigen_decompose, inner, matmul, max_abs_diff, scale, trace, DensityMatrix2, Mat2,
    SpectralDecomposition, Vec2,
};
use crate::error::{Error, Result};
use crate::model::{amplitude_closed_form, EnsembleSpec, ReservoirSpec};

/// Eigenvalue sums below this are treated as a rank-deficient sector.
pub const RANK_TOL: f64 = 1e-14;
/// Population-derivative magnitude below which a vanishing eigenvalue's term is dropped.
pub const DERIV_TOL: f64 = 1e-12;
/// Central-difference step in `θ`.
pub const FD_STEP: f64 = 1e-6;
/// Allowed disagreement between the analytic and finite-difference QFI paths.
pub const FD_CONSISTENCY_TOL: f64 = 1e-6;

/// Initial single-qubit state given by its matrix elements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialElements {
    pub rho11: f64,
    pub rho00: f64,
    pub rho10: Complex64,
}

/// Applies the reservoir channel with amplitude `c` to an initial state.
pub fn reduced_density_matrix(
    initial: InitialElements,
    amp: impl Into<Complex64>,
) -> Result<DensityMatrix2> {
    let InitialElements {
        rho11,
        rho00,
        rho10,
    } = initial;
    DensityMatrix2::from_elements(rho11, rho00, rho10)?;
    let amp = amp.into();
    let p = amp.norm_sqr();
    if p > 1.0 + 1e-12 {
        return Err(Error::param("amplitude", format!("|C|² = {p} exceeds 1")));
    }
    DensityMatrix2::from_elements(rho11 * p, rho00 + rho11 * (1.0 - p), rho10 * amp)
}

/// State of the probe after the phase gate and the channel: populations
/// `(C²/2, 1 − C²/2)`, coherence `C e^{iθ}/2`.
pub fn phase_probe_density(theta: f64, amp: f64) -> Result<DensityMatrix2> {
    if !(-1.0 - 1e-12..=1.0 + 1e-12).contains(&amp) {
        return Err(Error::param(
            "amplitude",
            format!("must lie in [-1, 1], got {amp}"),
        ));
    }
    let initial = InitialElements {
        rho11: 0.5,
        rho00: 0.5,
        rho10: Complex64::from_polar(0.5, theta),
    };
    reduced_density_matrix(initial, amp)
}

/// Exact `∂ρ/∂θ` of [`phase_probe_density`].
pub fn phase_probe_derivative(theta: f64, amp: f64) -> Mat2 {
    let off = Complex64::from_polar(0.5 * amp, theta) * c(0.0, 1.0);
    [[c(0.0, 0.0), off], [off.conj(), c(0.0, 0.0)]]
}

/// Central finite difference of a matrix-valued function of `θ`.
pub fn central_difference<F>(f: F, theta: f64, step: f64) -> Result<Mat2>
where
    F: Fn(f64) -> Result<Mat2>,
{
    let plus = f(theta + step)?;
    let minus = f(theta - step)?;
    Ok(scale(&add(&plus, &scale(&minus, -1.0)), 0.5 / step))
}

/// Symmetric logarithmic derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sld {
    pub operator: Mat2,
    /// Set when some eigenbasis element had both eigenvalues vanish and was zeroed.
    pub rank_deficient: bool,
}

impl Sld {
    /// `Tr[ρ L²]`.
    pub fn qfi(&self, rho: &DensityMatrix2) -> f64 {
        trace(&matmul(
            rho.entries(),
            &matmul(&self.operator, &self.operator),
        ))
        .re
    }

    /// Largest entry of `∂ρ − (Lρ + ρL)/2`.
    pub fn residual(&self, rho: &DensityMatrix2, drho: &Mat2) -> f64 {
        let anti = scale(
            &add(
                &matmul(&self.operator, rho.entries()),
                &matmul(rho.entries(), &self.operator),
            ),
            0.5,
        );
        max_abs_diff(drho, &anti)
    }
}

/// Solves `∂ρ = (Lρ + ρL)/2` in the eigenbasis: `L_ij = 2 (∂ρ)_ij / (λ_i + λ_j)`.
pub fn sld_operator(decomp: &SpectralDecomposition, drho: &Mat2) -> Sld {
    let d = decomp.to_eigenbasis(drho);
    let mut l = density::zeros();
    let mut rank_deficient = false;
    for i in 0..2 {
        for j in 0..2 {
            let denom = decomp.values[i] + decomp.values[j];
            if denom > RANK_TOL {
                l[i][j] = d[i][j] * (2.0 / denom);
            } else {
                rank_deficient = true;
            }
        }
    }
    Sld {
        operator: decomp.from_eigenbasis(&l),
        rank_deficient,
    }
}

/// Derivatives of the spectral data with respect to `θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralDerivatives {
    pub eigenvalues: [f64; 2],
    /// `overlaps[i][j] = ⟨ω_i|∂θ ω_j⟩`.
    pub overlaps: [[Complex64; 2]; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QfiResult {
    pub value: f64,
    pub channel_time: f64,
    pub n_qubits: usize,
}

/// Spectral QFI formula
///
/// ```text
/// Σ_i (∂λ_i)²/λ_i + 2 Σ_{i≠i'} (λ_i − λ_i')²/(λ_i + λ_i') |⟨ω_i|∂ω_i'⟩|²
/// ```
///
/// Population terms with a vanishing eigenvalue are dropped when the
/// eigenvalue derivative vanishes too, the continuous extension at rank-deficient
/// points.
pub fn qfi_spectral(decomp: &SpectralDecomposition, derivs: &SpectralDerivatives) -> Result<f64> {
    let lam = decomp.values;
    let mut value = 0.0;
    for i in 0..2 {
        let dl = derivs.eigenvalues[i];
        if lam[i] < RANK_TOL {
            if dl.abs() < DERIV_TOL {
                continue;
            }
            return Err(Error::Numerical(format!(
                "eigenvalue {:.3e} vanishes with nonzero derivative {dl:.3e}",
                lam[i]
            )));
        }
        value += dl * dl / lam[i];
    }
    for i in 0..2 {
        for k in 0..2 {
            if i == k {
                continue;
            }
            let sum = lam[i] + lam[k];
            if sum < RANK_TOL {
                continue;
            }
            let gap = lam[i] - lam[k];
            value += 2.0 * gap * gap / sum * derivs.overlaps[i][k].norm_sqr();
        }
    }
    Ok(value)
}

/// Analytic spectral derivatives of the phase probe.
///
/// `ρ(θ) = U ρ(0) U†` leaves the eigenvalues fixed. After gauge fixing (first
/// component real) the eigenvectors move as `diag(1, e^{−iθ}) ω(0)`, so
/// `∂θ|ω_j⟩ = −i P₀ |ω_j⟩` with `P₀` the ground-state projector.
pub fn phase_probe_spectral_derivatives(decomp: &SpectralDecomposition) -> SpectralDerivatives {
    let mut overlaps = [[c(0.0, 0.0); 2]; 2];
    for (i, row) in overlaps.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            let v = decomp.vectors[j];
            // constant vectors (first component zero) carry no gauge rotation
            let d: Vec2 = if v[0].norm() > 1e-14 {
                [c(0.0, 0.0), v[1] * c(0.0, -1.0)]
            } else {
                [c(0.0, 0.0); 2]
            };
            *x = inner(&decomp.vectors[i], &d);
        }
    }
    SpectralDerivatives {
        eigenvalues: [0.0, 0.0],
        overlaps,
    }
}

/// Spectral derivatives from central differences of the gauge-fixed decomposition.
pub fn finite_difference_spectral_derivatives<F>(
    rho_of: F,
    theta: f64,
    step: f64,
) -> Result<SpectralDerivatives>
where
    F: Fn(f64) -> Result<DensityMatrix2>,
{
    let at = eigen_decompose(&rho_of(theta)?);
    let plus = eigen_decompose(&rho_of(theta + step)?);
    let minus = eigen_decompose(&rho_of(theta - step)?);
    let mut eigenvalues = [0.0; 2];
    let mut overlaps = [[c(0.0, 0.0); 2]; 2];
    for j in 0..2 {
        eigenvalues[j] = (plus.values[j] - minus.values[j]) / (2.0 * step);
        let dv: Vec2 = [
            (plus.vectors[j][0] - minus.vectors[j][0]) / (2.0 * step),
            (plus.vectors[j][1] - minus.vectors[j][1]) / (2.0 * step),
        ];
        for i in 0..2 {
            overlaps[i][j] = inner(&at.vectors[i], &dv);
        }
    }
    Ok(SpectralDerivatives {
        eigenvalues,
        overlaps,
    })
}

/// Full spectral evaluation of the phase probe at `(θ, C)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeQfi {
    /// Spectral formula with analytic derivatives.
    pub spectral: f64,
    /// Spectral formula with finite-difference derivatives.
    pub spectral_fd: f64,
    /// `Tr[ρL²]` from the symmetric logarithmic derivative.
    pub sld: f64,
    /// Residual of the SLD defining equation.
    pub sld_residual: f64,
}

/// Evaluates the probe QFI by every spectral route and checks them against
/// each other. Disagreement of the finite-difference path beyond
/// [`FD_CONSISTENCY_TOL`] is an error.
pub fn phase_probe_qfi(theta: f64, amp: f64) -> Result<ProbeQfi> {
    let rho = phase_probe_density(theta, amp)?;
    let decomp = eigen_decompose(&rho);
    let spectral = qfi_spectral(&decomp, &phase_probe_spectral_derivatives(&decomp))?;
    let fd =
        finite_difference_spectral_derivatives(|th| phase_probe_density(th, amp), theta, FD_STEP)?;
    let spectral_fd = qfi_spectral(&decomp, &fd)?;
    if (spectral - spectral_fd).abs() > FD_CONSISTENCY_TOL {
        return Err(Error::Numerical(format!(
            "QFI analytic ({spectral}) and finite-difference ({spectral_fd}) paths disagree at θ = {theta}, C = {amp}"
        )));
    }
    let drho = phase_probe_derivative(theta, amp);
    let l = sld_operator(&decomp, &drho);
    Ok(ProbeQfi {
        spectral,
        spectral_fd,
        sld: l.qfi(&rho),
        sld_residual: l.residual(&rho, &drho),
    })
}

/// Spectral-route QFI of the probe after evolving for `t` with `N` qubits.
pub fn qfi_spectral_at(
    spec: &ReservoirSpec,
    ens: &EnsembleSpec,
    theta: f64,
    t: f64,
) -> Result<QfiResult> {
    let amp = amplitude_closed_form(spec, ens, t)?;
    let rho = phase_probe_density(theta, amp)?;
    let decomp = eigen_decompose(&rho);
    Ok(QfiResult {
        value: qfi_spectral(&decomp, &phase_probe_spectral_derivatives(&decomp))?,
        channel_time: t,
        n_qubits: ens.n_qubits(),
    })
}

/// Closed-form QFI `C(t)²`.
pub fn qfi_analytic(spec: &ReservoirSpec, ens: &EnsembleSpec, t: f64) -> Result<QfiResult> {
    let amp = amplitude_closed_form(spec, ens, t)?;
    Ok(QfiResult {
        value: amp * amp,
        channel_time: t,
        n_qubits: ens.n_qubits(),
    })
}

/// Long-time QFI `((N−1)/N)²`.
pub fn qfi_asymptote(ens: &EnsembleSpec) -> f64 {
    let a = crate::model::amplitude_asymptote(ens);
    a * a
}

/// Cramér–Rao lower bound `1/(n QFI)` on the estimator variance. Returns
/// `f64::INFINITY` when the state carries no information.
pub fn cramer_rao_bound(qfi: &QfiResult, n_trials: usize) -> Result<f64> {
    if n_trials == 0 {
        return Err(Error::param("n_trials", "must be positive"));
    }
    if !(qfi.value >= 0.0) {
        return Err(Error::param(
            "qfi",
            format!("must be >= 0, got {}", qfi.value),
        ));
    }
    if qfi.value == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(1.0 / (n_trials as f64 * qfi.value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_3, PI};

    fn q(value: f64) -> QfiResult {
        QfiResult {
            value,
            channel_time: 0.0,
            n_qubits: 1,
        }
    }

    #[test]
    fn channel_limits() {
        let init = InitialElements {
            rho11: 0.3,
            rho00: 0.7,
            rho10: c(0.2, -0.1),
        };
        let rho0 = DensityMatrix2::from_elements(0.3, 0.7, c(0.2, -0.1)).unwrap();
        assert_eq!(reduced_density_matrix(init, 1.0).unwrap(), rho0);
        let decayed = reduced_density_matrix(init, 0.0).unwrap();
        assert_eq!(decayed.excited_population(), 0.0);
        assert_eq!(decayed.ground_population(), 1.0);
        assert_eq!(decayed.coherence(), c(0.0, 0.0));
        let bad = InitialElements {
            rho11: 0.5,
            rho00: 0.5,
            rho10: c(0.7, 0.0),
        };
        assert!(reduced_density_matrix(bad, 0.5).is_err());
    }

    #[test]
    fn channel_arithmetic() {
        let init = InitialElements {
            rho11: 0.5,
            rho00: 0.5,
            rho10: c(0.5, 0.0),
        };
        let rho = reduced_density_matrix(init, 0.795).unwrap();
        assert!((rho.excited_population() - 0.316_012_5).abs() < 1e-12);
        assert!((rho.coherence().norm() - 0.3975).abs() < 1e-12);
        assert!((trace(rho.entries()).re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn probe_examples() {
        let half = c(0.5, 0.0);
        let rho = phase_probe_density(0.0, 1.0).unwrap();
        assert!(max_abs_diff(rho.entries(), &[[half, half], [half, half]]) < 1e-15);
        let rho = phase_probe_density(PI, 1.0).unwrap();
        assert!(max_abs_diff(rho.entries(), &[[half, -half], [-half, half]]) < 1e-15);
        let rho = phase_probe_density(FRAC_PI_3, 0.5).unwrap();
        assert!((rho.coherence().norm() - 0.25).abs() < 1e-15);
        assert!((rho.excited_population() - 0.125).abs() < 1e-15);
        // eigenvalues 1/2 ± sqrt(0.375² + 0.25²)
        let dec = eigen_decompose(&rho);
        let r = (0.375f64 * 0.375 + 0.0625).sqrt();
        assert!((dec.values[0] - (0.5 + r)).abs() < 1e-15);
        assert!(phase_probe_density(0.0, 1.5).is_err());
    }

    #[test]
    fn probe_spectrum_at_c_0795() {
        // ρ₁₁ = C²/2, |ρ₁₀| = C/2 ⇒ λ = 1/2 ± sqrt((1/2 − C²/2)² + C²/4)
        let amp: f64 = 0.795;
        let dec = eigen_decompose(&phase_probe_density(0.0, amp).unwrap());
        let r = ((0.5 - amp * amp / 2.0).powi(2) + amp * amp / 4.0).sqrt();
        assert!((dec.values[0] - (0.5 + r)).abs() < 1e-15);
        assert!((dec.values[0] - 0.938_016).abs() < 1e-6, "{:?}", dec.values);
        assert!((dec.values[1] - 0.061_984).abs() < 1e-6);
    }

    #[test]
    fn sld_trivial_cases() {
        let rho = phase_probe_density(0.3, 0.6).unwrap();
        let l = sld_operator(&eigen_decompose(&rho), &density::zeros());
        assert!(max_abs_diff(&l.operator, &density::zeros()) < 1e-15);

        let rho = phase_probe_density(0.0, 1.0).unwrap();
        let drho = phase_probe_derivative(0.0, 1.0);
        let l = sld_operator(&eigen_decompose(&rho), &drho);
        assert!(l.rank_deficient);
        assert!((l.qfi(&rho) - 1.0).abs() < 1e-12);
        assert!(l.residual(&rho, &drho) < 1e-10);
    }

    #[test]
    fn spectral_examples() {
        for theta in [0.0, 0.4, PI / 2.0, 2.9] {
            assert!((phase_probe_qfi(theta, 1.0).unwrap().spectral - 1.0).abs() < 1e-12);
            assert_eq!(phase_probe_qfi(theta, 0.0).unwrap().spectral, 0.0);
            let p = phase_probe_qfi(theta, 0.795).unwrap();
            assert!((p.spectral - 0.795 * 0.795).abs() < 1e-12);
            assert!((p.sld - 0.795 * 0.795).abs() < 1e-12);
            assert!((p.spectral_fd - p.spectral).abs() < 1e-8);
            assert!(p.sld_residual < 1e-10);
        }
    }

    #[test]
    fn derivative_matches_central_difference() {
        for (theta, amp) in [(0.0, 1.0), (1.1, 0.795), (3.0, -0.4), (5.5, 0.1)] {
            let fd = central_difference(
                |th| Ok(*phase_probe_density(th, amp)?.entries()),
                theta,
                FD_STEP,
            )
            .unwrap();
            assert!(max_abs_diff(&fd, &phase_probe_derivative(theta, amp)) < 1e-8);
        }
    }

    #[test]
    fn analytic_qfi() {
        let s = ReservoirSpec::new(0.05, 5.0).unwrap();
        let e1 = EnsembleSpec::new(1).unwrap();
        let e2 = EnsembleSpec::new(2).unwrap();
        assert_eq!(qfi_analytic(&s, &e1, 0.0).unwrap().value, 1.0);
        // γ₀ = 0.05 relaxes at rate ≈ (λ − D)/2, so t = 100 is still 2.7e-3 above the plateau
        let late = qfi_analytic(&s, &e2, 100.0).unwrap().value;
        assert!((late - 0.25).abs() < 3e-3, "{late}");
        let strong = ReservoirSpec::new(10.0, 5.0).unwrap();
        assert!((qfi_analytic(&strong, &e2, 100.0).unwrap().value - 0.25).abs() < 1e-12);
        let v = qfi_analytic(&s, &e1, 10.0).unwrap().value;
        assert!((v - 0.632).abs() < 1e-3, "{v}");
        let sp = qfi_spectral_at(&s, &e1, 0.7, 10.0).unwrap().value;
        assert!((sp - v).abs() < 1e-12);
    }

    #[test]
    fn asymptotes() {
        assert_eq!(qfi_asymptote(&EnsembleSpec::new(1).unwrap()), 0.0);
        assert_eq!(qfi_asymptote(&EnsembleSpec::new(2).unwrap()), 0.25);
        assert!(1.0 - qfi_asymptote(&EnsembleSpec::new(1_000_000).unwrap()) < 1e-5);
    }

    #[test]
    fn cramer_rao() {
        assert_eq!(cramer_rao_bound(&q(1.0), 1).unwrap(), 1.0);
        assert!((cramer_rao_bound(&q(0.25), 100).unwrap() - 0.04).abs() < 1e-16);
        assert_eq!(cramer_rao_bound(&q(0.0), 1).unwrap(), f64::INFINITY);
        assert!(cramer_rao_bound(&q(0.5), 0).is_err());
    }
}
