//! Geometric phase of the watched qubit over one quasicycle `T = 2π/ω₀`.
//!
//! The qubit starts in the pure state `cos(θ/2)|1⟩ + sin(θ/2)|0⟩`, so
//! `ρ₁₁(0) = cos²(θ/2)`, and evolves under the amplitude-damping channel with
//! the free precession `e^{−iω₀t}` restored on the coherence (Schrödinger
//! picture). For a pure initial state only the eigenbranch that starts with
//! eigenvalue 1 contributes to the kinematic phase
//!
//! ```text
//! Φ = Arg{ √(λ(0)λ(T)) ⟨ω(0)|ω(T)⟩ exp[−∫₀ᵀ ⟨ω|ω̇⟩ dτ] }
//! ```
//!
//! [`gp_kinematic`] evaluates it as a discrete Pancharatnam product, which is
//! gauge invariant for any phase choice of the stored eigenvectors.
//! [`gp_closed_form`] integrates the excited-state weight of that eigenvector,
//! `ω₀ ∫₀ᵀ |⟨1|ω(t)⟩|² dt`, by Simpson quadrature.

use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

use crate::density::{c, eigen_decompose, inner, DensityMatrix2, SpectralDecomposition, Vec2};
use crate::error::{Error, Result};
use crate::model::{amplitude_closed_form, EnsembleSpec, ReservoirSpec};
use crate::quadrature::simpson;

pub const MIN_STEPS: usize = 200;
/// Followed eigenvalues below this lose the branch.
pub const BRANCH_LOSS_TOL: f64 = 1e-12;
/// Denominator below which the closed-form integrand takes its limit value.
pub const DENOM_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GpMethod {
    Kinematic,
    ClosedForm,
}

impl GpMethod {
    pub fn tag(self) -> &'static str {
        match self {
            GpMethod::Kinematic => "kinematic",
            GpMethod::ClosedForm => "closed_form",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpResult {
    /// Principal value in `(−π, π]`.
    pub phase: f64,
    /// Accumulated value before reduction modulo `2π`.
    pub unwrapped: f64,
    pub method: GpMethod,
    pub theta0: f64,
}

/// Principal argument in `(−π, π]`.
pub fn wrap_phase(x: f64) -> f64 {
    let mut y = x.rem_euclid(TAU);
    if y > PI {
        y -= TAU;
    }
    y
}

/// Sampled quasicycle of the watched qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub theta0: f64,
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix2>,
    /// Eigenpairs with each eigenvector rephased so consecutive overlaps are
    /// real and non-negative. Eigenvalues keep their descending order.
    pub decomps: Vec<SpectralDecomposition>,
    /// Index into `decomps[k]` of the eigenpair continuously connected to the
    /// initial eigenvalue-1 branch.
    pub followed: Vec<usize>,
}

impl Trajectory {
    pub fn followed_vector(&self, k: usize) -> Vec2 {
        self.decomps[k].vectors[self.followed[k]]
    }

    pub fn followed_value(&self, k: usize) -> f64 {
        self.decomps[k].values[self.followed[k]]
    }
}

fn check_theta(theta0: f64) -> Result<()> {
    if !(0.0..=TAU).contains(&theta0) {
        return Err(Error::param(
            "theta0",
            format!("must lie in [0, 2π], got {theta0}"),
        ));
    }
    Ok(())
}

fn rephase(v: Vec2, reference: &Vec2) -> Vec2 {
    let ov = inner(reference, &v);
    if ov.norm() == 0.0 {
        return v;
    }
    let phase = ov.conj() / ov.norm();
    [v[0] * phase, v[1] * phase]
}

/// Schrödinger-picture state at time `t` for the initial polar angle `θ`.
pub fn state_at(
    spec: &ReservoirSpec,
    ens: &EnsembleSpec,
    theta0: f64,
    t: f64,
) -> Result<DensityMatrix2> {
    let (s, co) = (0.5 * theta0).sin_cos();
    let amp = amplitude_closed_form(spec, ens, t)?;
    let p = amp * amp;
    let rho11 = co * co * p;
    let coherence = Complex64::from_polar(co * s * amp, -spec.omega0() * t);
    DensityMatrix2::from_elements(rho11, 1.0 - rho11, coherence)
}

/// Samples `k_steps + 1` states over `[0, 2π/ω₀]` and tracks the eigenbranch
/// that starts at eigenvalue 1.
pub fn build_trajectory(
    spec: &ReservoirSpec,
    ens: &EnsembleSpec,
    theta0: f64,
    k_steps: usize,
) -> Result<Trajectory> {
    check_theta(theta0)?;
    if k_steps < MIN_STEPS {
        return Err(Error::param(
            "k_steps",
            format!("need at least {MIN_STEPS}, got {k_steps}"),
        ));
    }
    let period = TAU / spec.omega0();
    let times: Vec<f64> = (0..=k_steps)
        .map(|k| {
            if k == k_steps {
                period
            } else {
                period * (k as f64 / k_steps as f64)
            }
        })
        .collect();
    let states = times
        .iter()
        .map(|&t| state_at(spec, ens, theta0, t))
        .collect::<Result<Vec<_>>>()?;

    let mut decomps = Vec::with_capacity(states.len());
    let mut followed = Vec::with_capacity(states.len());
    let first = eigen_decompose(&states[0]);
    decomps.push(first);
    followed.push(0);
    for rho in &states[1..] {
        let prev = *decomps.last().expect("non-empty");
        let prev_idx = *followed.last().expect("non-empty");
        let mut dec = eigen_decompose(rho);
        // match eigenvectors to their predecessors by overlap magnitude
        let direct = inner(&prev.vectors[0], &dec.vectors[0]).norm()
            + inner(&prev.vectors[1], &dec.vectors[1]).norm();
        let swapped = inner(&prev.vectors[0], &dec.vectors[1]).norm()
            + inner(&prev.vectors[1], &dec.vectors[0]).norm();
        let perm = if swapped > direct { [1, 0] } else { [0, 1] };
        for (i, &j) in perm.iter().enumerate() {
            dec.vectors[j] = rephase(dec.vectors[j], &prev.vectors[i]);
        }
        followed.push(perm[prev_idx]);
        decomps.push(dec);
    }
    Ok(Trajectory {
        theta0,
        times,
        states,
        decomps,
        followed,
    })
}

/// Kinematic geometric phase by the discrete Pancharatnam product.
///
/// The principal value is the argument of
/// `√(λ₀λ_K) ⟨ω₀|ω_K⟩ Π_k ⟨ω_{k+1}|ω_k⟩`. The unwrapped value sums the same
/// step phases after rephasing every eigenvector to a real, positive ground
/// component, which lifts the phase continuously from zero.
pub fn gp_kinematic(traj: &Trajectory) -> Result<GpResult> {
    let k_last = traj.times.len() - 1;
    for k in 0..=k_last {
        let value = traj.followed_value(k);
        if value < BRANCH_LOSS_TOL {
            return Err(Error::BranchLoss {
                t: traj.times[k],
                value,
            });
        }
    }
    let vec = |k: usize| traj.followed_vector(k);

    let mut product = c(
        (traj.followed_value(0) * traj.followed_value(k_last)).sqrt(),
        0.0,
    ) * inner(&vec(0), &vec(k_last));
    for k in 0..k_last {
        product *= inner(&vec(k + 1), &vec(k));
        // keep the running product at unit scale
        let n = product.norm();
        if n > 0.0 {
            product /= n;
        }
    }
    if product.norm() == 0.0 {
        return Err(Error::Numerical("Pancharatnam product vanished".into()));
    }
    let phase = wrap_phase(product.arg());

    // Reference component for the lift: ground unless it vanishes somewhere.
    let ground_ok = (0..=k_last).all(|k| vec(k)[1].norm() > 1e-9);
    let pivot = if ground_ok { 1 } else { 0 };
    let lift = |v: Vec2| {
        let p = v[pivot];
        let ph = p.conj() / p.norm();
        [v[0] * ph, v[1] * ph]
    };
    let mut unwrapped = 0.0;
    let mut prev = lift(vec(0));
    let first = prev;
    for k in 1..=k_last {
        let cur = lift(vec(k));
        unwrapped += inner(&cur, &prev).arg();
        prev = cur;
    }
    unwrapped += inner(&first, &prev).arg();

    Ok(GpResult {
        phase,
        unwrapped,
        method: GpMethod::Kinematic,
        theta0: traj.theta0,
    })
}

/// Excited-state weight of the dominant eigenvector of the state with excited
/// population `|C|² cos²(θ/2)` and coherence magnitude `|C| |sin θ|/2`.
pub fn closed_form_integrand(amp_sq: f64, theta0: f64) -> f64 {
    let cos2 = (0.5 * theta0).cos().powi(2);
    let sin2theta = theta0.sin().powi(2);
    let pop = amp_sq * cos2;
    let radius = (amp_sq * sin2theta + (2.0 * pop - 1.0).powi(2)).sqrt();
    let small = 0.5 * (1.0 - radius);
    let num = 4.0 * (pop - small).powi(2);
    let denom = amp_sq * sin2theta + num;
    if denom < DENOM_TOL {
        return cos2;
    }
    num / denom
}

/// Closed-form geometric phase `ω₀ ∫₀^{2π/ω₀} w(t) dt` with `w` from
/// [`closed_form_integrand`], by composite Simpson on `k_steps` panels.
pub fn gp_closed_form(
    spec: &ReservoirSpec,
    ens: &EnsembleSpec,
    theta0: f64,
    k_steps: usize,
) -> Result<GpResult> {
    check_theta(theta0)?;
    let period = TAU / spec.omega0();
    // amplitude evaluation cannot fail for t in [0, T]
    let integrand = |t: f64| {
        let amp = amplitude_closed_form(spec, ens, t).unwrap_or(f64::NAN);
        closed_form_integrand(amp * amp, theta0)
    };
    let unwrapped = spec.omega0() * simpson(integrand, 0.0, period, k_steps)?;
    if !unwrapped.is_finite() {
        return Err(Error::Numerical(
            "closed-form GP integral is not finite".into(),
        ));
    }
    Ok(GpResult {
        phase: wrap_phase(unwrapped),
        unwrapped,
        method: GpMethod::ClosedForm,
        theta0,
    })
}

/// Unitary-limit geometric phase `π(1 + cos θ)`.
pub fn gp_unitary_limit(theta0: f64) -> f64 {
    PI * (1.0 + theta0.cos())
}
