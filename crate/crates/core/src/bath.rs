//! Brute-force reservoir: `M` discrete modes and the full single-excitation
//! Schrödinger dynamics.
//!
//! In the interaction picture, with `δ_k = ω₀ − ω_k` and `S = Σ_i c_i`,
//!
//! ```text
//! ċ_i = −i Σ_k g_k e^{ iδ_k t} a_k
//! ȧ_k = −i g_k e^{−iδ_k t} S
//! ```
//!
//! The ground amplitude decouples and stays constant. The mode sum is the only
//! `O(M)` work per stage and is evaluated with [`Exec::chunked_sum`], so results
//! are bitwise identical whichever execution strategy is chosen.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{
    lorentzian_spectral_density, AmplitudeSource, AmplitudeTrace, EnsembleSpec, ReservoirSpec,
    TimeGrid,
};
use crate::par::Exec;

pub const DEFAULT_MODES: usize = 4000;
pub const DEFAULT_HALF_WIDTH: f64 = 50.0;
pub const DEFAULT_DT: f64 = 2e-3;
/// Norm drift that aborts an evolution.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedBath {
    omega0: f64,
    mode_freqs: Vec<f64>,
    couplings: Vec<f64>,
    spacing: f64,
}

impl DiscretizedBath {
    pub fn mode_freqs(&self) -> &[f64] {
        &self.mode_freqs
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn len(&self) -> usize {
        self.mode_freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mode_freqs.is_empty()
    }

    /// Mode spacing `Δω`.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// `2π/Δω`, after which the discrete spectrum rephases.
    pub fn recurrence_time(&self) -> f64 {
        2.0 * PI / self.spacing
    }

    /// `Σ_k g_k²`, the discrete counterpart of `∫ J dω`.
    pub fn total_coupling(&self) -> f64 {
        self.couplings.iter().map(|g| g * g).sum()
    }

    /// Bath with the given couplings on the same frequency grid.
    pub fn with_couplings(&self, couplings: Vec<f64>) -> Result<Self> {
        if couplings.len() != self.len() || couplings.iter().any(|g| !(*g >= 0.0)) {
            return Err(Error::param(
                "couplings",
                "need one non-negative value per mode",
            ));
        }
        Ok(Self {
            couplings,
            ..self.clone()
        })
    }
}

/// Midpoint discretization of `J(ω)` over `[ω₀ − W, ω₀ + W]` with `g_k² = J(ω_k) Δω`.
pub fn discretize_bath(
    spec: &ReservoirSpec,
    m_modes: usize,
    half_width: f64,
) -> Result<DiscretizedBath> {
    if m_modes < 2 {
        return Err(Error::param(
            "m_modes",
            format!("need at least 2 modes, got {m_modes}"),
        ));
    }
    if !(half_width.is_finite() && half_width > 0.0) {
        return Err(Error::param(
            "half_width",
            format!("must be > 0, got {half_width}"),
        ));
    }
    let w0 = spec.omega0();
    let spacing = 2.0 * half_width / m_modes as f64;
    let mode_freqs: Vec<f64> = (0..m_modes)
        .map(|k| w0 - half_width + (k as f64 + 0.5) * spacing)
        .collect();
    let couplings = mode_freqs
        .iter()
        .map(|&w| (lorentzian_spectral_density(spec, w) * spacing).sqrt())
        .collect();
    Ok(DiscretizedBath {
        omega0: w0,
        mode_freqs,
        couplings,
        spacing,
    })
}

/// Amplitudes of the `N + M + 1` single-excitation basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleExcitationState {
    pub ground_amp: Complex64,
    pub qubit_amps: Vec<Complex64>,
    pub mode_amps: Vec<Complex64>,
}

impl SingleExcitationState {
    pub fn norm_sqr(&self) -> f64 {
        self.ground_amp.norm_sqr()
            + self.qubit_amps.iter().map(|a| a.norm_sqr()).sum::<f64>()
            + self.mode_amps.iter().map(|a| a.norm_sqr()).sum::<f64>()
    }

    /// Largest pairwise distance between qubit amplitudes.
    pub fn qubit_asymmetry(&self) -> f64 {
        let first = self.qubit_amps[0];
        self.qubit_amps
            .iter()
            .map(|a| (a - first).norm())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialCondition {
    /// Qubit 0 excited, all other qubits and modes empty. Its amplitude is the
    /// one the closed form describes.
    WatchedExcited,
    /// One excitation shared equally, `c_i(0) = 1/√N`.
    Symmetric,
    /// Arbitrary normalized superposition of ground and watched-excited states.
    Superposition {
        ground: Complex64,
        watched: Complex64,
    },
}

impl InitialCondition {
    fn state(self, n: usize, m: usize) -> Result<SingleExcitationState> {
        let zero = Complex64::new(0.0, 0.0);
        let mut qubit_amps = vec![zero; n];
        let mut ground_amp = zero;
        match self {
            InitialCondition::WatchedExcited => qubit_amps[0] = Complex64::new(1.0, 0.0),
            InitialCondition::Symmetric => {
                qubit_amps.fill(Complex64::new(1.0 / (n as f64).sqrt(), 0.0));
            }
            InitialCondition::Superposition { ground, watched } => {
                let norm = ground.norm_sqr() + watched.norm_sqr();
                if (norm - 1.0).abs() > 1e-12 {
                    return Err(Error::param("initial", format!("norm {norm} != 1")));
                }
                ground_amp = ground;
                qubit_amps[0] = watched;
            }
        }
        Ok(SingleExcitationState {
            ground_amp,
            qubit_amps,
            mode_amps: vec![zero; m],
        })
    }
}

/// Result of a bath evolution with run diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct BathRun {
    /// Real part of the watched amplitude `c_0(t)`.
    pub trace: AmplitudeTrace,
    /// Imaginary part of `c_0(t)`; vanishes for the resonant Lorentzian in the continuum limit.
    pub imag: Vec<f64>,
    pub final_state: SingleExcitationState,
    pub max_norm_drift: f64,
    pub max_asymmetry: f64,
}

struct Stage {
    qubit_deriv: Complex64,
    mode_deriv: Vec<Complex64>,
}

struct Propagator<'a> {
    g: &'a [f64],
    detuning: Vec<f64>,
    exec: Exec,
}

impl Propagator<'_> {
    fn phasors(&self, t: f64) -> Vec<Complex64> {
        self.detuning
            .iter()
            .map(|d| Complex64::from_polar(1.0, d * t))
            .collect()
    }

    /// Derivative at the stage point `y + h k`. Every qubit shares the same derivative.
    fn eval(
        &self,
        phasors: &[Complex64],
        qubits: &[Complex64],
        modes: &[Complex64],
        shift: Option<(f64, &Stage)>,
    ) -> Stage {
        let n = qubits.len() as f64;
        let mode_at = |k: usize| match shift {
            Some((h, st)) => modes[k] + st.mode_deriv[k] * h,
            None => modes[k],
        };
        let s: Complex64 = qubits.iter().sum::<Complex64>()
            + shift.map_or(Complex64::new(0.0, 0.0), |(h, st)| st.qubit_deriv * (h * n));
        let r: Complex64 = self
            .exec
            .chunked_sum(modes.len(), |k| self.g[k] * phasors[k] * mode_at(k));
        let minus_i = Complex64::new(0.0, -1.0);
        let mut mode_deriv = vec![Complex64::new(0.0, 0.0); modes.len()];
        let drive = minus_i * s;
        self.exec.for_each_indexed(&mut mode_deriv, |k, x| {
            *x = drive * (self.g[k] * phasors[k].conj())
        });
        Stage {
            qubit_deriv: minus_i * r,
            mode_deriv,
        }
    }

    fn step(
        &self,
        state: &mut SingleExcitationState,
        t: f64,
        h: f64,
        start: &[Complex64],
    ) -> Vec<Complex64> {
        let mid = self.phasors(t + 0.5 * h);
        let end = self.phasors(t + h);
        let q = &state.qubit_amps;
        let m = &state.mode_amps;
        let k1 = self.eval(start, q, m, None);
        let k2 = self.eval(&mid, q, m, Some((0.5 * h, &k1)));
        let k3 = self.eval(&mid, q, m, Some((0.5 * h, &k2)));
        let k4 = self.eval(&end, q, m, Some((h, &k3)));
        let w = h / 6.0;
        let dq =
            (k1.qubit_deriv + k2.qubit_deriv * 2.0 + k3.qubit_deriv * 2.0 + k4.qubit_deriv) * w;
        for a in state.qubit_amps.iter_mut() {
            *a += dq;
        }
        self.exec.for_each_indexed(&mut state.mode_amps, |k, a| {
            *a += (k1.mode_deriv[k]
                + k2.mode_deriv[k] * 2.0
                + k3.mode_deriv[k] * 2.0
                + k4.mode_deriv[k])
                * w;
        });
        end
    }
}

/// Evolves the watched-excited initial state and returns `Re c_0(t)` on `grid`.
pub fn evolve_single_excitation(
    bath: &DiscretizedBath,
    ens: &EnsembleSpec,
    grid: &TimeGrid,
    dt: f64,
) -> Result<AmplitudeTrace> {
    evolve_with(
        bath,
        ens,
        grid,
        dt,
        InitialCondition::WatchedExcited,
        Exec::default(),
    )
    .map(|r| r.trace)
}

/// Full-control variant of [`evolve_single_excitation`].
pub fn evolve_with(
    bath: &DiscretizedBath,
    ens: &EnsembleSpec,
    grid: &TimeGrid,
    dt: f64,
    initial: InitialCondition,
    exec: Exec,
) -> Result<BathRun> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::param("dt", format!("must be > 0, got {dt}")));
    }
    let spacing = grid.spacing();
    if dt > spacing * (1.0 + 1e-12) {
        return Err(Error::StepExceedsGrid { dt, spacing });
    }
    let horizon = 0.5 * bath.recurrence_time();
    if grid.t_end() > horizon {
        return Err(Error::param(
            "t_end",
            format!(
                "{} exceeds half the bath recurrence time ({horizon:.3}); refine the mode spacing",
                grid.t_end()
            ),
        ));
    }

    let prop = Propagator {
        g: &bath.couplings,
        detuning: bath.mode_freqs.iter().map(|w| bath.omega0 - w).collect(),
        exec,
    };
    let mut state = initial.state(ens.n_qubits(), bath.len())?;
    let norm0 = state.norm_sqr();
    let ground0 = state.ground_amp;

    let times = grid.samples();
    let mut values = Vec::with_capacity(times.len());
    let mut imag = Vec::with_capacity(times.len());
    let mut max_norm_drift: f64 = 0.0;
    let mut max_asymmetry: f64 = 0.0;

    let mut t = 0.0;
    let mut phasors = prop.phasors(0.0);
    let mut advance_to = |state: &mut SingleExcitationState, target: f64| -> Result<()> {
        let span = target - t;
        if span <= 0.0 {
            return Ok(());
        }
        let sub = ((span / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        for i in 0..sub {
            // absolute stage times avoid accumulating rounding in t
            let t0 = t + span * (i as f64 / sub as f64);
            let t1 = if i + 1 == sub {
                target
            } else {
                t + span * ((i + 1) as f64 / sub as f64)
            };
            phasors = prop.step(state, t0, t1 - t0, &phasors);
        }
        t = target;
        Ok(())
    };

    for &target in &times {
        advance_to(&mut state, target)?;
        let drift = (state.norm_sqr() - norm0).abs();
        if !(drift <= NORM_DRIFT_LIMIT) {
            return Err(Error::NormDrift {
                drift,
                t: target,
                limit: NORM_DRIFT_LIMIT,
            });
        }
        max_norm_drift = max_norm_drift.max(drift);
        max_asymmetry = max_asymmetry.max(state.qubit_asymmetry());
        values.push(state.qubit_amps[0].re);
        imag.push(state.qubit_amps[0].im);
    }
    debug_assert_eq!(state.ground_amp, ground0);

    Ok(BathRun {
        trace: AmplitudeTrace {
            times,
            values,
            source: AmplitudeSource::BathOracle,
        },
        imag,
        final_state: state,
        max_norm_drift,
        max_asymmetry,
    })
}
