use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6};
use std::fmt::Write as _;

use super::config::{ExperimentConfig, GridPreset};
use super::table::fmt_f64;
use crate::bath::{discretize_bath, evolve_with, InitialCondition};
use crate::error::Result;
use crate::gp::{build_trajectory, gp_closed_form, gp_kinematic, gp_unitary_limit};
use crate::kernel::{solve_amplitude_ode, SolverConfig};
use crate::model::{
    amplitude_closed_form, closed_form_trace, EnsembleSpec, ReservoirSpec, TimeGrid,
};
use crate::par::Exec;
use crate::qfi::{phase_probe_qfi, qfi_analytic};

pub const AMPLITUDE_KERNEL_TOL: f64 = 1e-6;
pub const AMPLITUDE_BATH_TOL: f64 = 1e-2;
pub const BATH_NORM_TOL: f64 = 1e-8;
pub const QFI_ROUTE_TOL: f64 = 1e-8;
pub const QFI_THETA_TOL: f64 = 1e-10;
pub const GP_ROUTE_TOL: f64 = 1e-3;
pub const FREE_EVOLUTION_TOL: f64 = 1e-6;
pub const GP_UNITARY_TOL: f64 = 1e-5;

pub const AMPLITUDE_GAMMAS: [f64; 3] = [0.05, 0.5, 10.0];
pub const AMPLITUDE_NS: [usize; 6] = [1, 2, 4, 8, 11, 20];
pub const AMPLITUDE_T_MAX: f64 = 50.0;
pub const QFI_T_MAX: f64 = 30.0;
pub const QFI_POINTS: usize = 50;
pub const QFI_THETAS: [f64; 3] = [0.0, FRAC_PI_4, FRAC_PI_2];
pub const GP_GAMMAS: [f64; 2] = [0.05, 10.0];
pub const GP_NS: [usize; 6] = [1, 2, 4, 8, 16, 64];
pub const GP_THETAS: [f64; 4] = [FRAC_PI_6, FRAC_PI_4, FRAC_PI_2, 3.0 * FRAC_PI_4];
pub const SMOKE_GAMMA: f64 = 1e-9;

/// One tolerance check: largest observed deviation against its bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub max_deviation: f64,
    pub tolerance: f64,
}

impl Check {
    /// NaN deviations fail.
    pub fn passed(&self) -> bool {
        self.max_deviation < self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub grid: GridPreset,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed())
    }

    /// Fixed-width text table for terminals.
    pub fn table(&self) -> String {
        let width = self
            .checks
            .iter()
            .map(|c| c.name.len())
            .max()
            .unwrap_or(0)
            .max(5);
        let mut out = format!(
            "{:<width$}  {:>12}  {:>9}  status\n",
            "check", "max_dev", "tolerance"
        );
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{:<width$}  {:>12.3e}  {:>9.1e}  {}",
                c.name,
                c.max_deviation,
                c.tolerance,
                if c.passed() { "pass" } else { "FAIL" }
            );
        }
        out
    }

    /// CSV rows `check,max_deviation,tolerance,status` under `comment`.
    pub fn to_csv(&self, comment: &str) -> String {
        let mut out = format!("{comment}\ncheck,max_deviation,tolerance,status\n");
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                c.name,
                fmt_f64(c.max_deviation),
                fmt_f64(c.tolerance),
                if c.passed() { "pass" } else { "fail" }
            );
        }
        out
    }
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    // NaN propagates so that a broken route cannot pass
    values.into_iter().fold(0.0, |m, x| {
        if x.is_nan() || m.is_nan() {
            f64::NAN
        } else {
            m.max(x)
        }
    })
}

fn grid(t_max: f64, points: usize) -> Result<TimeGrid> {
    TimeGrid::new(0.0, t_max, points - 1)
}

/// The outer level of each sweep fans out; inner loops stay sequential.
fn inner(exec: Exec) -> Exec {
    if exec.is_parallel() {
        Exec::Sequential
    } else {
        exec
    }
}

fn combos<A: Copy, B: Copy>(a: &[A], b: &[B]) -> Vec<(A, B)> {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| (*x, *y)))
        .collect()
}

fn kernel_check(
    cfg: &ExperimentConfig,
    gammas: &[f64],
    ns: &[usize],
    t_max: f64,
    exec: Exec,
) -> Result<f64> {
    let g = grid(t_max, (t_max / 0.1).round() as usize + 1)?;
    let solver = SolverConfig::new(cfg.solver_dt)?;
    let devs = exec.map(&combos(gammas, ns), |&(gamma0, n)| -> Result<f64> {
        let spec = ReservoirSpec::new(gamma0, cfg.omega0)?;
        let ens = EnsembleSpec::new(n)?;
        let ode = solve_amplitude_ode(&spec, &ens, &g, &solver)?;
        Ok(ode.sup_distance(&closed_form_trace(&spec, &ens, &g)))
    });
    Ok(max_of(devs.into_iter().collect::<Result<Vec<_>>>()?))
}

/// Returns (sup distance to the closed form, max norm drift).
fn bath_check(
    cfg: &ExperimentConfig,
    gammas: &[f64],
    ns: &[usize],
    exec: Exec,
) -> Result<(f64, f64)> {
    let g = grid(cfg.bath_t_max, (cfg.bath_t_max / 0.05).round() as usize + 1)?;
    let runs = exec.map(&combos(gammas, ns), |&(gamma0, n)| -> Result<(f64, f64)> {
        let spec = ReservoirSpec::new(gamma0, cfg.omega0)?;
        let ens = EnsembleSpec::new(n)?;
        let bath = discretize_bath(&spec, cfg.bath_modes, cfg.bath_half_width)?;
        let run = evolve_with(
            &bath,
            &ens,
            &g,
            cfg.bath_dt,
            InitialCondition::WatchedExcited,
            inner(exec),
        )?;
        Ok((
            run.trace.sup_distance(&closed_form_trace(&spec, &ens, &g)),
            run.max_norm_drift,
        ))
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    Ok((
        max_of(runs.iter().map(|r| r.0)),
        max_of(runs.iter().map(|r| r.1)),
    ))
}

/// Returns (max |spectral − analytic| over spectral and SLD routes, max θ spread).
fn qfi_check(
    cfg: &ExperimentConfig,
    gammas: &[f64],
    ns: &[usize],
    exec: Exec,
) -> Result<(f64, f64)> {
    let g = grid(QFI_T_MAX, QFI_POINTS)?;
    let per = exec.map(&combos(gammas, ns), |&(gamma0, n)| -> Result<(f64, f64)> {
        let spec = ReservoirSpec::new(gamma0, cfg.omega0)?;
        let ens = EnsembleSpec::new(n)?;
        let (mut route, mut spread) = (0.0f64, 0.0f64);
        for t in g.samples() {
            let exact = qfi_analytic(&spec, &ens, t)?.value;
            let amp = amplitude_closed_form(&spec, &ens, t)?;
            let mut at_zero = None;
            for theta in QFI_THETAS {
                let p = phase_probe_qfi(theta, amp)?;
                route = max_of([route, (p.spectral - exact).abs(), (p.sld - exact).abs()]);
                let base = *at_zero.get_or_insert(p.spectral);
                spread = max_of([spread, (p.spectral - base).abs()]);
            }
        }
        Ok((route, spread))
    });
    let per = per.into_iter().collect::<Result<Vec<_>>>()?;
    Ok((
        max_of(per.iter().map(|r| r.0)),
        max_of(per.iter().map(|r| r.1)),
    ))
}

/// Unwrapped kinematic and closed-form phases for each grid point.
fn gp_pairs(
    cfg: &ExperimentConfig,
    gammas: &[f64],
    ns: &[usize],
    exec: Exec,
) -> Result<Vec<(f64, f64, f64)>> {
    let mut points = Vec::new();
    for (gamma0, n) in combos(gammas, ns) {
        for theta in GP_THETAS {
            points.push((gamma0, n, theta));
        }
    }
    exec.map(&points, |&(gamma0, n, theta)| -> Result<(f64, f64, f64)> {
        let spec = ReservoirSpec::new(gamma0, cfg.omega0)?;
        let ens = EnsembleSpec::new(n)?;
        let kin = gp_kinematic(&build_trajectory(&spec, &ens, theta, cfg.gp_steps)?)?;
        let cf = gp_closed_form(&spec, &ens, theta, cfg.k_steps)?;
        Ok((theta, kin.unwrapped, cf.unwrapped))
    })
    .into_iter()
    .collect()
}

/// Cross-validates every route on the preset grid of `cfg.grid`. Solver,
/// bath and quadrature settings come from `cfg`.
pub fn run_validation(cfg: &ExperimentConfig, exec: Exec) -> Result<ValidationReport> {
    let mut checks = Vec::new();
    match cfg.grid {
        GridPreset::Default => {
            let kernel =
                kernel_check(cfg, &AMPLITUDE_GAMMAS, &AMPLITUDE_NS, AMPLITUDE_T_MAX, exec)?;
            checks.push(Check {
                name: "amplitude closed_form vs kernel_ode",
                max_deviation: kernel,
                tolerance: AMPLITUDE_KERNEL_TOL,
            });
            let (bath, drift) = bath_check(cfg, &AMPLITUDE_GAMMAS, &AMPLITUDE_NS, exec)?;
            checks.push(Check {
                name: "amplitude closed_form vs bath_oracle",
                max_deviation: bath,
                tolerance: AMPLITUDE_BATH_TOL,
            });
            checks.push(Check {
                name: "bath_oracle norm drift",
                max_deviation: drift,
                tolerance: BATH_NORM_TOL,
            });
            let (route, spread) = qfi_check(cfg, &AMPLITUDE_GAMMAS, &AMPLITUDE_NS, exec)?;
            checks.push(Check {
                name: "qfi spectral vs analytic",
                max_deviation: route,
                tolerance: QFI_ROUTE_TOL,
            });
            checks.push(Check {
                name: "qfi theta independence",
                max_deviation: spread,
                tolerance: QFI_THETA_TOL,
            });
            let gp = gp_pairs(cfg, &GP_GAMMAS, &GP_NS, exec)?;
            checks.push(Check {
                name: "gp kinematic vs closed_form",
                max_deviation: max_of(gp.iter().map(|(_, k, c)| (k - c).abs())),
                tolerance: GP_ROUTE_TOL,
            });
        }
        GridPreset::Smoke => {
            let ns = [1, 2, 4];
            let spec = ReservoirSpec::new(SMOKE_GAMMA, cfg.omega0)?;
            let g = grid(cfg.bath_t_max, (cfg.bath_t_max / 0.05).round() as usize + 1)?;
            let mut dev = 0.0f64;
            for n in ns {
                let ens = EnsembleSpec::new(n)?;
                let closed = closed_form_trace(&spec, &ens, &g);
                let ode = solve_amplitude_ode(&spec, &ens, &g, &SolverConfig::new(cfg.solver_dt)?)?;
                let bath = discretize_bath(&spec, cfg.bath_modes, cfg.bath_half_width)?;
                let run = evolve_with(
                    &bath,
                    &ens,
                    &g,
                    cfg.bath_dt,
                    InitialCondition::WatchedExcited,
                    exec,
                )?;
                for trace in [&closed.values, &ode.values, &run.trace.values] {
                    dev = max_of(std::iter::once(dev).chain(trace.iter().map(|c| (c - 1.0).abs())));
                }
            }
            checks.push(Check {
                name: "amplitude routes vs free evolution",
                max_deviation: dev,
                tolerance: FREE_EVOLUTION_TOL,
            });
            let (route, spread) = qfi_check(cfg, &[SMOKE_GAMMA], &ns, exec)?;
            checks.push(Check {
                name: "qfi spectral vs analytic",
                max_deviation: route,
                tolerance: QFI_ROUTE_TOL,
            });
            checks.push(Check {
                name: "qfi theta independence",
                max_deviation: spread,
                tolerance: QFI_THETA_TOL,
            });
            let gp = gp_pairs(cfg, &[SMOKE_GAMMA], &[1], exec)?;
            checks.push(Check {
                name: "gp routes vs unitary limit",
                max_deviation: max_of(gp.iter().flat_map(|&(theta, k, c)| {
                    let exact = gp_unitary_limit(theta);
                    [(k - exact).abs(), (c - exact).abs()]
                })),
                tolerance: GP_UNITARY_TOL,
            });
        }
    }
    Ok(ValidationReport {
        grid: cfg.grid,
        checks,
    })
}
