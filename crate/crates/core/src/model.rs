//! Model parameters, coupling regimes and the closed-form survival amplitude.
//!
//! `N` identical qubits with transition frequency `ω₀` couple through the same
//! collective operator to a vacuum reservoir with Lorentzian spectral density
//!
//! ```text
//! J(ω) = (1/2π) γ₀ λ² / ((ω₀ − ω)² + λ²)
//! ```
//!
//! In the single-excitation sector the amplitude of the watched qubit, started
//! in its excited state with every other qubit in the ground state, is
//!
//! ```text
//! C(t) = (N−1)/N + (e^{−λt/2}/N) [cosh(Dt/2) + (λ/D) sinh(Dt/2)],   D = √(λ² − 2Nγ₀λ)
//! ```
//!
//! The `(N−1)/N` part is the overlap with the dark (non-symmetric) sector, which
//! never decays.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Relative tolerance used to tag the `γ₀ = λ/2` boundary.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Below this value of `|D| t / 2` the ratio `sinh(Dt/2)/D` is evaluated by its series.
pub const SERIES_THRESHOLD: f64 = 1e-6;

/// Maximum imaginary residue tolerated when evaluating `C(t)` in complex arithmetic.
pub const IMAG_RESIDUE_TOL: f64 = 1e-10;

/// Reservoir and qubit parameters. Rates and frequencies are in units of `λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReservoirSpec {
    gamma0: f64,
    lambda_width: f64,
    omega0: f64,
}

impl ReservoirSpec {
    /// Builds a spec with `λ = 1`.
    pub fn new(gamma0: f64, omega0: f64) -> Result<Self> {
        Self::with_width(gamma0, 1.0, omega0)
    }

    pub fn with_width(gamma0: f64, lambda_width: f64, omega0: f64) -> Result<Self> {
        for (name, v) in [
            ("gamma0", gamma0),
            ("lambda_width", lambda_width),
            ("omega0", omega0),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(
                    name,
                    format!("must be finite and > 0, got {v}"),
                ));
            }
        }
        Ok(Self {
            gamma0,
            lambda_width,
            omega0,
        })
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    pub fn lambda_width(&self) -> f64 {
        self.lambda_width
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    /// Reservoir correlation time `τ_E = 1/λ`.
    pub fn correlation_time(&self) -> f64 {
        1.0 / self.lambda_width
    }

    /// Relaxation time `τ_R = 1/γ₀`.
    pub fn relaxation_time(&self) -> f64 {
        1.0 / self.gamma0
    }
}

/// Number of qubits sharing the reservoir; `N − 1` of them are spectators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EnsembleSpec {
    n_qubits: usize,
}

impl EnsembleSpec {
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::param("n_qubits", "must be at least 1"));
        }
        Ok(Self { n_qubits })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub(crate) fn n(&self) -> f64 {
        self.n_qubits as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CouplingRegime {
    Markovian,
    NonMarkovian,
    Boundary,
}

/// `D² = λ² − 2Nγ₀λ` together with its principal square root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveRate {
    pub d_squared: f64,
    pub d: Complex64,
}

impl EffectiveRate {
    pub fn is_oscillatory(&self) -> bool {
        self.d_squared < 0.0
    }
}

/// Uniform time grid with `n_steps + 1` samples including both end points.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    t_start: f64,
    t_end: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, n_steps: usize) -> Result<Self> {
        if !(t_start.is_finite() && t_start >= 0.0) {
            return Err(Error::param(
                "t_start",
                format!("must be >= 0, got {t_start}"),
            ));
        }
        if !(t_end.is_finite() && t_end > t_start) {
            return Err(Error::param(
                "t_end",
                format!("must exceed t_start = {t_start}, got {t_end}"),
            ));
        }
        if n_steps == 0 {
            return Err(Error::param("n_steps", "must be positive"));
        }
        Ok(Self {
            t_start,
            t_end,
            n_steps,
        })
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        (self.t_end - self.t_start) / self.n_steps as f64
    }

    /// The `i`-th sample, computed directly from the index so no rounding accumulates.
    pub fn sample(&self, i: usize) -> f64 {
        if i == self.n_steps {
            return self.t_end;
        }
        self.t_start + (self.t_end - self.t_start) * (i as f64 / self.n_steps as f64)
    }

    pub fn samples(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.sample(i)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AmplitudeSource {
    ClosedForm,
    KernelOde,
    BathOracle,
}

impl AmplitudeSource {
    pub fn tag(self) -> &'static str {
        match self {
            AmplitudeSource::ClosedForm => "closed_form",
            AmplitudeSource::KernelOde => "kernel_ode",
            AmplitudeSource::BathOracle => "bath_oracle",
        }
    }
}

/// Real amplitude samples `C(t)` on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeTrace {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub source: AmplitudeSource,
}

impl AmplitudeTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Sup-norm distance to another trace sampled at the same times.
    pub fn sup_distance(&self, other: &AmplitudeTrace) -> f64 {
        assert_eq!(self.len(), other.len(), "traces sampled on different grids");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

pub fn classify_regime(spec: &ReservoirSpec) -> CouplingRegime {
    let half = 0.5 * spec.lambda_width;
    if (spec.gamma0 - half).abs() <= BOUNDARY_TOL * half {
        CouplingRegime::Boundary
    } else if spec.gamma0 < half {
        CouplingRegime::Markovian
    } else {
        CouplingRegime::NonMarkovian
    }
}

/// Smallest `N` with `D² < 0`, i.e. `⌊λ/(2γ₀)⌋ + 1`.
pub fn critical_qubit_number(spec: &ReservoirSpec) -> usize {
    let ratio = spec.lambda_width / (2.0 * spec.gamma0);
    let mut nc = ratio.floor() as usize + 1;
    // floor() of a ratio that should be an integer can land one below it
    while nc > 1 && effective_rate_d_raw(spec, nc as f64 - 1.0) < 0.0 {
        nc -= 1;
    }
    while effective_rate_d_raw(spec, nc as f64) >= 0.0 {
        nc += 1;
    }
    nc
}

fn effective_rate_d_raw(spec: &ReservoirSpec, n: f64) -> f64 {
    let l = spec.lambda_width;
    l * (l - 2.0 * n * spec.gamma0)
}

pub fn effective_rate_d(spec: &ReservoirSpec, ens: &EnsembleSpec) -> EffectiveRate {
    let d_squared = effective_rate_d_raw(spec, ens.n());
    let d = if d_squared >= 0.0 {
        Complex64::new(d_squared.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-d_squared).sqrt())
    };
    EffectiveRate { d_squared, d }
}

/// Decaying part `G(t) = e^{−λt/2}[cosh(Dt/2) + (λ/D) sinh(Dt/2)]`, the
/// amplitude of the symmetric sector.
pub(crate) fn symmetric_propagator(spec: &ReservoirSpec, rate: &EffectiveRate, t: f64) -> f64 {
    let l = spec.lambda_width;
    let d = rate.d;
    let half = 0.5 * t;

    // Real branch far from D = 0: combine exponentials so nothing overflows.
    if rate.d_squared > 0.0 && d.re * half > 20.0 {
        let dr = d.re;
        let ratio = l / dr;
        let slow = (0.5 * (1.0 + ratio)) * ((dr - l) * half).exp();
        let fast = (0.5 * (1.0 - ratio)) * (-(dr + l) * half).exp();
        return slow + fast;
    }

    let x = d * half;
    let sinh_over_d = if d.norm() * half < SERIES_THRESHOLD {
        // sinh(Dt/2)/D = t/2 + D²t³/48 + O(D⁴t⁵)
        Complex64::new(half + rate.d_squared * t * t * t / 48.0, 0.0)
    } else {
        x.sinh() / d
    };
    let bracket = x.cosh() + l * sinh_over_d;
    let value = (-l * half).exp() * bracket;
    debug_assert!(
        value.im.abs() < IMAG_RESIDUE_TOL,
        "imaginary residue {} in C(t)",
        value.im
    );
    value.re
}

/// Closed-form amplitude `C(t)` of the watched qubit.
pub fn amplitude_closed_form(spec: &ReservoirSpec, ens: &EnsembleSpec, t: f64) -> Result<f64> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::param(
            "t",
            format!("must be finite and >= 0, got {t}"),
        ));
    }
    let n = ens.n();
    let rate = effective_rate_d(spec, ens);
    Ok((n - 1.0) / n + symmetric_propagator(spec, &rate, t) / n)
}

/// Closed-form amplitude sampled on a grid.
pub fn closed_form_trace(
    spec: &ReservoirSpec,
    ens: &EnsembleSpec,
    grid: &TimeGrid,
) -> AmplitudeTrace {
    let n = ens.n();
    let rate = effective_rate_d(spec, ens);
    let times = grid.samples();
    let values = times
        .iter()
        .map(|&t| (n - 1.0) / n + symmetric_propagator(spec, &rate, t) / n)
        .collect();
    AmplitudeTrace {
        times,
        values,
        source: AmplitudeSource::ClosedForm,
    }
}

/// Long-time limit `(N−1)/N` of `C(t)`.
pub fn amplitude_asymptote(ens: &EnsembleSpec) -> f64 {
    let n = ens.n();
    (n - 1.0) / n
}

pub fn lorentzian_spectral_density(spec: &ReservoirSpec, omega: f64) -> f64 {
    let l = spec.lambda_width;
    let detuning = spec.omega0 - omega;
    spec.gamma0 * l * l / (2.0 * PI * (detuning * detuning + l * l))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec(g: f64) -> ReservoirSpec {
        ReservoirSpec::new(g, 5.0).unwrap()
    }

    fn ens(n: usize) -> EnsembleSpec {
        EnsembleSpec::new(n).unwrap()
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(ReservoirSpec::new(0.0, 1.0).is_err());
        assert!(ReservoirSpec::new(-1.0, 1.0).is_err());
        assert!(ReservoirSpec::new(0.1, f64::NAN).is_err());
        assert!(ReservoirSpec::with_width(0.1, 0.0, 1.0).is_err());
        assert!(EnsembleSpec::new(0).is_err());
        assert!(TimeGrid::new(-1.0, 1.0, 10).is_err());
        assert!(TimeGrid::new(1.0, 1.0, 10).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn timescales() {
        let s = spec(0.05);
        assert_eq!(s.correlation_time(), 1.0);
        assert_relative_eq!(s.relaxation_time(), 20.0);
    }

    #[test]
    fn regimes() {
        assert_eq!(classify_regime(&spec(0.05)), CouplingRegime::Markovian);
        assert_eq!(classify_regime(&spec(10.0)), CouplingRegime::NonMarkovian);
        assert_eq!(classify_regime(&spec(0.5)), CouplingRegime::Boundary);
        assert_eq!(
            classify_regime(&spec(0.5 + 1e-14)),
            CouplingRegime::Boundary
        );
        assert_eq!(
            classify_regime(&spec(0.5 + 1e-9)),
            CouplingRegime::NonMarkovian
        );
    }

    #[test]
    fn critical_numbers() {
        assert_eq!(critical_qubit_number(&spec(0.05)), 11);
        assert_eq!(critical_qubit_number(&spec(10.0)), 1);
        assert_eq!(critical_qubit_number(&spec(0.1)), 6);
        assert_eq!(critical_qubit_number(&spec(0.25)), 3);
        assert_eq!(critical_qubit_number(&spec(0.01)), 51);
    }

    #[test]
    fn critical_number_matches_sign_scan() {
        for g in [0.05, 0.1, 0.07, 0.25, 0.3, 0.5, 1.0, 10.0] {
            let s = spec(g);
            let scanned = (1..1000)
                .find(|&n| effective_rate_d(&s, &ens(n)).d_squared < 0.0)
                .unwrap();
            assert_eq!(critical_qubit_number(&s), scanned, "gamma0 = {g}");
        }
    }

    #[test]
    fn effective_rate_branches() {
        let r = effective_rate_d(&spec(0.05), &ens(1));
        assert_relative_eq!(r.d.re, 0.948_683_298_050_513_8, epsilon = 1e-15);
        assert_eq!(r.d.im, 0.0);
        assert_relative_eq!(r.d_squared, 0.9, epsilon = 1e-15);

        let r = effective_rate_d(&spec(0.05), &ens(20));
        assert_relative_eq!(r.d_squared, -1.0, epsilon = 1e-14);
        assert_eq!(r.d.re, 0.0);
        assert_relative_eq!(r.d.im, 1.0, epsilon = 1e-14);
        assert!(r.is_oscillatory());

        let r = effective_rate_d(&spec(0.05), &ens(10));
        assert_eq!(r.d_squared, 0.0);
        assert_eq!(r.d, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn amplitude_examples() {
        for g in [0.05, 0.5, 10.0] {
            for n in [1, 2, 10, 20] {
                assert_eq!(amplitude_closed_form(&spec(g), &ens(n), 0.0).unwrap(), 1.0);
            }
        }
        // Frozen from a direct real-branch evaluation (see `real_branch_oracle`).
        let c = amplitude_closed_form(&spec(0.05), &ens(1), 10.0).unwrap();
        assert_relative_eq!(c, real_branch_oracle(0.05, 1, 10.0), epsilon = 1e-14);
        assert!((c - 0.795).abs() < 1e-3, "{c}");
        let c = amplitude_closed_form(&spec(0.05), &ens(2), 100.0).unwrap();
        assert!((c - 0.5).abs() < 3e-3, "{c}");
        let c = amplitude_closed_form(&spec(0.05), &ens(2), 400.0).unwrap();
        assert!((c - 0.5).abs() < 1e-9, "{c}");
        assert!(amplitude_closed_form(&spec(0.05), &ens(2), -1.0).is_err());
    }

    #[test]
    fn degenerate_branch_is_smooth() {
        // N = 10 at γ₀ = 0.05 sits exactly on D = 0; the limit is e^{-t/2}(1 + t/2).
        let s = spec(0.05);
        for t in [0.0, 0.3, 1.0, 7.5, 40.0] {
            let c = amplitude_closed_form(&s, &ens(10), t).unwrap();
            let expect = 0.9 + (-t / 2.0f64).exp() * (1.0 + t / 2.0) / 10.0;
            assert_relative_eq!(c, expect, epsilon = 1e-14);
        }
    }

    #[test]
    fn asymptotes() {
        assert_eq!(amplitude_asymptote(&ens(1)), 0.0);
        assert_eq!(amplitude_asymptote(&ens(2)), 0.5);
        assert_eq!(amplitude_asymptote(&ens(8)), 0.875);
    }

    #[test]
    fn lorentzian_values() {
        let s = spec(0.3);
        assert_relative_eq!(lorentzian_spectral_density(&s, 5.0), 0.3 / (2.0 * PI));
        assert_relative_eq!(lorentzian_spectral_density(&s, 6.0), 0.3 / (4.0 * PI));
        assert_relative_eq!(lorentzian_spectral_density(&s, 4.0), 0.3 / (4.0 * PI));
    }

    #[test]
    fn large_times_do_not_overflow() {
        let c = amplitude_closed_form(&spec(0.01), &ens(3), 5000.0).unwrap();
        assert_relative_eq!(c, 2.0 / 3.0, epsilon = 1e-12);
    }

    /// C(t) evaluated in purely real arithmetic on each branch.
    fn real_branch_oracle(g: f64, n: usize, t: f64) -> f64 {
        let nf = n as f64;
        let d2 = 1.0 - 2.0 * nf * g;
        let g_t = if d2 > 0.0 {
            let d = d2.sqrt();
            (-t / 2.0).exp() * ((d * t / 2.0).cosh() + (d * t / 2.0).sinh() / d)
        } else if d2 < 0.0 {
            let w = (-d2).sqrt();
            (-t / 2.0).exp() * ((w * t / 2.0).cos() + (w * t / 2.0).sin() / w)
        } else {
            (-t / 2.0).exp() * (1.0 + t / 2.0)
        };
        (nf - 1.0) / nf + g_t / nf
    }

    #[test]
    fn complex_and_real_branches_agree() {
        for g in [0.01, 0.05, 0.25, 0.5, 1.0, 10.0] {
            for n in [1, 2, 3, 4, 8, 11, 20] {
                for i in 0..200 {
                    let t = i as f64 * 0.25;
                    let c = amplitude_closed_form(&spec(g), &ens(n), t).unwrap();
                    let r = real_branch_oracle(g, n, t);
                    assert!((c - r).abs() < 1e-12, "g={g} n={n} t={t}: {c} vs {r}");
                }
            }
        }
    }

    #[test]
    fn oscillation_witness_above_critical_number() {
        for g in [0.05, 0.1, 0.25, 1.0, 10.0] {
            let s = spec(g);
            let nc = critical_qubit_number(&s);
            for n in [nc, nc + 1, nc + 5] {
                let e = ens(n);
                let base = amplitude_asymptote(&e);
                let grid = TimeGrid::new(0.0, 20.0, 4000).unwrap();
                let tr = closed_form_trace(&s, &e, &grid);
                let sign_change = tr
                    .values
                    .windows(2)
                    .any(|w| (w[0] - base) * (w[1] - base) < 0.0);
                assert!(sign_change, "g={g} n={n}");
            }
            let at = effective_rate_d(&s, &ens(nc));
            assert!(at.d_squared < 0.0);
            if nc > 1 {
                assert!(effective_rate_d(&s, &ens(nc - 1)).d_squared >= 0.0);
            }
        }
    }

    #[test]
    fn grid_samples_are_uniform() {
        let g = TimeGrid::new(0.0, 50.0, 1000).unwrap();
        let s = g.samples();
        assert_eq!(s.len(), 1001);
        assert_eq!(s[0], 0.0);
        assert_eq!(s[1000], 50.0);
        let h = g.spacing();
        for w in s.windows(2) {
            assert!(((w[1] - w[0]) - h).abs() <= 1e-12 * 50.0);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn amplitude_bounded_and_enveloped(
                g in 1e-3f64..20.0,
                n in 1usize..64,
                t in 0.0f64..80.0,
            ) {
                let e = ens(n);
                let s = spec(g);
                let c = amplitude_closed_form(&s, &e, t).unwrap();
                prop_assert!(c.abs() <= 1.0 + 1e-9);
                // |cosh(Dt/2)| and |sinh(Dt/2)/D|/(t/2) are both bounded by e^{Re(D)t/2}
                let re_d = effective_rate_d(&s, &e).d.re;
                let envelope = (-(1.0 - re_d) * t / 2.0).exp() * (1.0 + t / 2.0) / n as f64;
                prop_assert!((c - amplitude_asymptote(&e)).abs() <= envelope * (1.0 + 1e-12) + 1e-15);
            }
        }
    }
}
