//! Memory-kernel dynamics.
//!
//! The amplitude obeys the integro-differential equation
//!
//! ```text
//! dC_i/dt = −∫₀ᵗ f(t − τ) Σ_j C_j(τ) dτ,    f(Δt) = ∫ J(ω) e^{i(ω₀−ω)Δt} dω = (γ₀λ/2) e^{−λΔt}
//! ```
//!
//! Because the Lorentzian kernel is a single exponential, the convolution
//! `B(t) = ∫₀ᵗ f(t−τ) S(τ) dτ` of the kernel against the symmetric sum
//! `S = Σ_j C_j` satisfies `dB/dt = f(0) S − λ B`. With `dS/dt = −N B` the
//! whole problem reduces to three coupled linear ODEs, integrated here with
//! fixed-step classical RK4.

use crate::error::{Error, Result};
use crate::model::{AmplitudeSource, AmplitudeTrace, EnsembleSpec, ReservoirSpec, TimeGrid};

pub const DEFAULT_DT: f64 = 1e-3;

/// Memory kernel `f(Δt)` of the Lorentzian reservoir at resonance.
pub fn memory_kernel(spec: &ReservoirSpec, delta_t: f64) -> Result<f64> {
    if !(delta_t.is_finite() && delta_t >= 0.0) {
        return Err(Error::param(
            "delta_t",
            format!("must be >= 0, got {delta_t}"),
        ));
    }
    let l = spec.lambda_width();
    Ok(0.5 * spec.gamma0() * l * (-l * delta_t).exp())
}

/// State of the local system equivalent to the memory-kernel equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelState {
    /// Amplitude of the watched qubit.
    pub c: f64,
    /// Symmetric sum `Σ_j C_j` over all qubits.
    pub s: f64,
    /// Kernel convolved against the symmetric sum.
    pub b: f64,
}

impl KernelState {
    /// Watched qubit excited, every other qubit in its ground state.
    pub const INITIAL: KernelState = KernelState {
        c: 1.0,
        s: 1.0,
        b: 0.0,
    };

    fn axpy(self, h: f64, k: KernelState) -> KernelState {
        KernelState {
            c: self.c + h * k.c,
            s: self.s + h * k.s,
            b: self.b + h * k.b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { dt: DEFAULT_DT }
    }
}

impl SolverConfig {
    pub fn new(dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::param("dt", format!("must be > 0, got {dt}")));
        }
        Ok(Self { dt })
    }
}

struct Rhs {
    n: f64,
    f0: f64,
    lambda: f64,
}

impl Rhs {
    fn eval(&self, y: KernelState) -> KernelState {
        KernelState {
            c: -y.b,
            s: -self.n * y.b,
            b: self.f0 * y.s - self.lambda * y.b,
        }
    }

    fn rk4(&self, y: KernelState, h: f64) -> KernelState {
        let k1 = self.eval(y);
        let k2 = self.eval(y.axpy(0.5 * h, k1));
        let k3 = self.eval(y.axpy(0.5 * h, k2));
        let k4 = self.eval(y.axpy(h, k3));
        KernelState {
            c: y.c + h / 6.0 * (k1.c + 2.0 * k2.c + 2.0 * k3.c + k4.c),
            s: y.s + h / 6.0 * (k1.s + 2.0 * k2.s + 2.0 * k3.s + k4.s),
            b: y.b + h / 6.0 * (k1.b + 2.0 * k2.b + 2.0 * k3.b + k4.b),
        }
    }
}

/// Integrates the kernel equation with RK4 and reports `C(t)` on `grid`.
///
/// Each grid interval is split into `⌈spacing/dt⌉` equal substeps, so the
/// effective step never exceeds `cfg.dt`. If the grid does not start at zero,
/// the solver first integrates from zero to `t_start`.
pub fn solve_amplitude_ode(
    spec: &ReservoirSpec,
    ens: &EnsembleSpec,
    grid: &TimeGrid,
    cfg: &SolverConfig,
) -> Result<AmplitudeTrace> {
    SolverConfig::new(cfg.dt)?;
    let spacing = grid.spacing();
    if cfg.dt > spacing * (1.0 + 1e-12) {
        return Err(Error::StepExceedsGrid {
            dt: cfg.dt,
            spacing,
        });
    }
    let rhs = Rhs {
        n: ens.n_qubits() as f64,
        f0: memory_kernel(spec, 0.0)?,
        lambda: spec.lambda_width(),
    };
    let advance = |mut y: KernelState, span: f64| {
        if span <= 0.0 {
            return y;
        }
        let sub = ((span / cfg.dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        let h = span / sub as f64;
        for _ in 0..sub {
            y = rhs.rk4(y, h);
        }
        y
    };

    let times = grid.samples();
    let mut values = Vec::with_capacity(times.len());
    let mut y = advance(KernelState::INITIAL, grid.t_start());
    values.push(y.c);
    for w in times.windows(2) {
        y = advance(y, w[1] - w[0]);
        if !y.c.is_finite() {
            return Err(Error::Numerical(format!(
                "kernel solver diverged at t = {}",
                w[1]
            )));
        }
        values.push(y.c);
    }
    Ok(AmplitudeTrace {
        times,
        values,
        source: AmplitudeSource::KernelOde,
    })
}
