//! Trajectory and equilibrium analysis: tangent-space spectra, decay-rate
//! and frequency fits, two-point cycle detection, and the cycle balance law
//! relating the cycle angle to gain and damping.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::economy::{self, Economy, PriceVector};
use crate::geometry;
use crate::{Error, Result};

/// A point is accepted as an equilibrium for spectral analysis when |xi|
/// stays below this.
pub const EQUILIBRIUM_RESIDUAL_TOL: f64 = 1e-8;

/// Angles below this are arccos roundoff, not signal; envelope fits and
/// cycle separation tests ignore them.
pub const ANGLE_NOISE_FLOOR: f64 = 1e-7;

/// Default closure tolerance for two-point cycle detection.
pub const CYCLE_TOL: f64 = 1e-9;

/// Default number of consecutive closure confirmations.
pub const CYCLE_MIN_REPEATS: usize = 10;

/// Complex number in serializable form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexPair {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexPair {
    fn from(z: Complex64) -> Self {
        ComplexPair { re: z.re, im: z.im }
    }
}

impl From<ComplexPair> for Complex64 {
    fn from(z: ComplexPair) -> Self {
        Complex64::new(z.re, z.im)
    }
}

/// Spectrum of the excess demand jacobian restricted to the tangent space of
/// the sphere at an equilibrium.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    /// Tangent-space eigenvalues (n - 1 of them).
    pub eigenvalues: Vec<ComplexPair>,
    /// |J p*| / |J|: how well the jacobian annihilates the ray direction.
    pub zero_mode_residual: f64,
    /// Smallest tangent eigenvalue magnitude.
    pub lambda_m: f64,
    /// All tangent real parts below -1e-8 (rotation-only spectra are not
    /// asymptotically stable and report false).
    pub stable: bool,
    /// Damped-mode rate -gamma/2 + sqrt((gamma/2)^2 - k lambda_m), when
    /// requested.
    pub predicted_rate: Option<ComplexPair>,
    /// Envelope decay rate measured from a trajectory, when attached.
    pub fitted_rate: Option<f64>,
}

impl StabilityReport {
    pub fn with_rate_prediction(mut self, gamma: f64, k: f64) -> Self {
        self.predicted_rate = Some(crate::dynamics::decay_rate(gamma, k, self.lambda_m).into());
        self
    }

    pub fn with_fitted_rate(mut self, rate: f64) -> Self {
        self.fitted_rate = Some(rate);
        self
    }
}

/// Eigenvalues of the jacobian restricted to the tangent hyperplane at a
/// verified equilibrium. The radial zero mode is removed exactly by
/// conjugating with an orthonormal tangent basis before the Schur solve.
pub fn eigen_analysis(
    economy: &Economy,
    p_star: &PriceVector,
    fd_step: Option<f64>,
) -> Result<StabilityReport> {
    let xi_norm = economy.excess_demand(p_star)?.norm();
    if xi_norm > EQUILIBRIUM_RESIDUAL_TOL {
        return Err(Error::NotAnEquilibrium { xi_norm, tol: EQUILIBRIUM_RESIDUAL_TOL });
    }
    let jac = economy::jacobian(economy, p_star, fd_step)?;
    let jac_norm = jac.norm();
    let zero_mode_residual =
        if jac_norm == 0.0 { 0.0 } else { (&jac * p_star.as_vector()).norm() / jac_norm };
    let basis = geometry::tangent_basis(p_star.as_vector())?;
    let tangent_block = basis.transpose() * &jac * &basis;
    let eigs = tangent_block.complex_eigenvalues();
    let eigenvalues: Vec<ComplexPair> = eigs.iter().map(|z| ComplexPair::from(*z)).collect();
    let lambda_m = eigs.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    let stable = eigs.iter().all(|z| z.re < -1e-8);
    Ok(StabilityReport {
        eigenvalues,
        zero_mode_residual,
        lambda_m,
        stable,
        predicted_rate: None,
        fitted_rate: None,
    })
}

fn angle_series(trajectory: &Trajectory, p_star: &PriceVector) -> Result<Vec<f64>> {
    trajectory
        .points
        .iter()
        .map(|p| geometry::angle_between(p, p_star.as_vector()))
        .collect()
}

/// Indices of strict local maxima of the series that clear the noise floor.
fn envelope_maxima(series: &[f64]) -> Vec<usize> {
    let mut out = Vec::new();
    for i in 1..series.len().saturating_sub(1) {
        if series[i] >= series[i - 1] && series[i] > series[i + 1] && series[i] > ANGLE_NOISE_FLOOR
        {
            out.push(i);
        }
    }
    out
}

fn least_squares_slope(ts: &[f64], ys: &[f64]) -> f64 {
    let n = ts.len() as f64;
    let mean_t = ts.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (t, y) in ts.iter().zip(ys) {
        num += (t - mean_t) * (y - mean_y);
        den += (t - mean_t) * (t - mean_t);
    }
    num / den
}

fn diverging(angles: &[f64]) -> bool {
    let m = angles.len();
    let head = m / 10 + 1;
    let first: f64 = angles[..head].iter().sum::<f64>() / head as f64;
    let last: f64 = angles[m - head..].iter().sum::<f64>() / head as f64;
    last >= first
}

/// Exponential decay rate of the angle-to-equilibrium envelope. Oscillatory
/// approaches are fitted through the trailing half of the envelope maxima;
/// monotone approaches through the trailing half of the points above the
/// noise floor. Returns the positive rate r with angle ~ exp(-r t).
pub fn fit_decay_rate(trajectory: &Trajectory, p_star: &PriceVector) -> Result<f64> {
    let angles = angle_series(trajectory, p_star)?;
    if angles.len() < 20 {
        return Err(Error::NotConverging { detail: "trajectory too short to fit".into() });
    }
    if diverging(&angles) {
        return Err(Error::NotConverging { detail: "angle to equilibrium is not shrinking".into() });
    }
    let times = &trajectory.times;
    let maxima = envelope_maxima(&angles);
    let (ts, ys): (Vec<f64>, Vec<f64>) = if maxima.len() >= 2 {
        let start = maxima.len() - (maxima.len() / 2).max(2).min(maxima.len());
        maxima[start..]
            .iter()
            .map(|&i| (times[i], angles[i].ln()))
            .unzip()
    } else {
        let usable: Vec<usize> =
            (0..angles.len()).filter(|&i| angles[i] > ANGLE_NOISE_FLOOR).collect();
        if usable.len() < 10 {
            return Err(Error::NotConverging {
                detail: "fewer than 10 samples above the angle noise floor".into(),
            });
        }
        usable[usable.len() / 2..]
            .iter()
            .map(|&i| (times[i], angles[i].ln()))
            .unzip()
    };
    let rate = -least_squares_slope(&ts, &ys);
    if !rate.is_finite() || rate <= 0.0 {
        return Err(Error::NotConverging { detail: format!("fitted rate {rate} not positive") });
    }
    Ok(rate)
}

/// Angular frequency of an oscillatory approach, from the mean spacing of
/// envelope maxima (the angle to the equilibrium peaks twice per period).
pub fn fit_oscillation_frequency(trajectory: &Trajectory, p_star: &PriceVector) -> Result<f64> {
    let angles = angle_series(trajectory, p_star)?;
    let maxima = envelope_maxima(&angles);
    if maxima.len() < 3 {
        return Err(Error::NotConverging {
            detail: format!("need at least 3 envelope maxima, found {}", maxima.len()),
        });
    }
    let times = &trajectory.times;
    let mut gaps = Vec::with_capacity(maxima.len() - 1);
    for w in maxima.windows(2) {
        gaps.push(times[w[1]] - times[w[0]]);
    }
    let mean_gap = gaps.iter().sum::<f64>() / gaps.len() as f64;
    Ok(std::f64::consts::PI / mean_gap)
}

/// Residual of the two-point cycle balance law
/// (1 - c^2) (1 + (1 - gamma_hat) c)^2 - (k_xi c)^2 with c = cos(alpha),
/// where k_xi is the per-step gain k dt^2 times |xi| at a cycle point.
/// Genuine cycles sit on the zero set.
pub fn cycle_balance_residual(alpha: f64, k_xi: f64, gamma_hat: f64) -> f64 {
    let c = alpha.cos();
    let retain = 1.0 - gamma_hat;
    (1.0 - c * c) * (1.0 + retain * c) * (1.0 + retain * c) - (k_xi * c) * (k_xi * c)
}

/// Balance-law residual with |xi| evaluated on the economy.
pub fn cycle_balance_residual_at(
    economy: &Economy,
    a: &PriceVector,
    alpha: f64,
    k_hat: f64,
    gamma_hat: f64,
) -> Result<f64> {
    let xi_norm = economy.excess_demand(a)?.norm();
    Ok(cycle_balance_residual(alpha, k_hat * xi_norm, gamma_hat))
}

/// All roots of the cycle balance law in (0, pi), smallest first, by grid
/// scan and bisection. The law is necessary but not sufficient: several
/// roots exist in general and only one of them is the realized attractor.
pub fn cycle_angle_roots(k_xi: f64, gamma_hat: f64) -> Vec<f64> {
    if !(k_xi > 0.0) || !k_xi.is_finite() || !gamma_hat.is_finite() {
        return Vec::new();
    }
    let f = |alpha: f64| cycle_balance_residual(alpha, k_xi, gamma_hat);
    let grid = 8192;
    let mut roots = Vec::new();
    let mut prev_alpha = 0.0;
    let mut prev_val = f(0.0);
    for j in 1..=grid {
        let alpha = std::f64::consts::PI * j as f64 / grid as f64;
        let val = f(alpha);
        if prev_val < 0.0 && val >= 0.0 || prev_val > 0.0 && val <= 0.0 {
            let (mut lo, mut hi) = (prev_alpha, alpha);
            let rising = prev_val < 0.0;
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if (f(mid) < 0.0) == rising {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev_alpha = alpha;
        prev_val = val;
    }
    roots
}

/// Smallest alpha in (0, pi) solving the cycle balance law. The law always
/// changes sign before pi/2, so a root exists for every positive k_xi; this
/// branch is the one following the large-damping 1/gamma_hat scaling.
pub fn solve_cycle_angle(k_xi: f64, gamma_hat: f64) -> Option<f64> {
    cycle_angle_roots(k_xi, gamma_hat).into_iter().next()
}

/// Large-damping closed-form prediction alpha = k_xi / gamma_hat for the
/// cycle angle.
pub fn predicted_cycle_angle(k_xi: f64, gamma_hat: f64) -> Option<f64> {
    if gamma_hat > 0.0 {
        Some(k_xi / gamma_hat)
    } else {
        None
    }
}

/// A detected persistent two-point cycle.
#[derive(Debug, Clone, Serialize)]
pub struct CycleReport {
    pub point_a: Vec<f64>,
    pub point_b: Vec<f64>,
    /// Angle between the two cycle points.
    pub alpha: f64,
    /// |xi| at point a.
    pub xi_norm_a: f64,
    pub k_hat: f64,
    pub gamma_hat: f64,
    /// Large-damping prediction k_hat |xi| / gamma_hat (absent for
    /// undamped runs).
    pub alpha_predicted: Option<f64>,
    /// Balance-law residual at the detected cycle.
    pub balance_residual: f64,
    /// Number of consecutive period-2 closures confirmed at the tail.
    pub repeats: usize,
}

/// Scan the tail of a discrete second-order trajectory for a period-2 orbit:
/// `min_repeats` consecutive states must each match the state two steps
/// earlier within `tol` (by angle), while neighboring states stay separated.
/// Returns None when the tail is a fixed point or not yet periodic.
pub fn detect_two_point_cycle(
    trajectory: &Trajectory,
    tol: f64,
    min_repeats: usize,
) -> Result<Option<CycleReport>> {
    let gamma_hat = trajectory.gamma_hat.ok_or_else(|| {
        Error::invalid("cycle detection needs a discrete second-order trajectory")
    })?;
    let m = trajectory.len();
    if m < 2 * min_repeats + 2 {
        return Ok(None);
    }
    let mut repeats = 0;
    for i in (2..m).rev() {
        let closure = geometry::angle_between(&trajectory.points[i], &trajectory.points[i - 2])?;
        if closure <= tol {
            repeats += 1;
            if repeats >= 2 * min_repeats {
                break;
            }
        } else {
            break;
        }
    }
    if repeats < min_repeats {
        return Ok(None);
    }
    let a = &trajectory.points[m - 1];
    let b = &trajectory.points[m - 2];
    let alpha = geometry::angle_between(a, b)?;
    if alpha <= (10.0 * tol).max(ANGLE_NOISE_FLOOR) {
        // Tail converged to a fixed point; period-2 closure holds trivially.
        return Ok(None);
    }
    let xi_norm_a = trajectory.diagnostics[m - 1].xi_norm;
    let k_hat = trajectory.k_hat();
    Ok(Some(CycleReport {
        point_a: a.iter().copied().collect(),
        point_b: b.iter().copied().collect(),
        alpha,
        xi_norm_a,
        k_hat,
        gamma_hat,
        alpha_predicted: predicted_cycle_angle(k_hat * xi_norm_a, gamma_hat),
        balance_residual: cycle_balance_residual(alpha, k_hat * xi_norm_a, gamma_hat),
        repeats,
    }))
}

/// One damping value in a cycle sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub gamma_hat: f64,
    /// Final step angle fell below the cycle tolerance (fixed point).
    pub converged: bool,
    pub alpha: Option<f64>,
    pub alpha_predicted: Option<f64>,
    pub xi_norm_a: Option<f64>,
    pub balance_residual: Option<f64>,
    /// Failure description when the run aborted (orthant exit and the like).
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepTable {
    pub k: f64,
    pub dt: f64,
    pub steps: usize,
    pub rows: Vec<SweepRow>,
}

/// Run the discrete second-order stepper across a list of damping values and
/// report the detected cycle (or convergence, or failure) for each. Rows are
/// produced in input order; a failing row never aborts the sweep.
pub fn cycle_angle_sweep(
    economy: &Economy,
    p0: &PriceVector,
    k: f64,
    dt: f64,
    gamma_hats: &[f64],
    steps: usize,
    tol: f64,
    min_repeats: usize,
) -> SweepTable {
    let mut rows = Vec::with_capacity(gamma_hats.len());
    for &gh in gamma_hats {
        let row = match crate::dynamics::run_second_order_discrete(
            economy, p0, None, k, dt, gh, steps, None,
        ) {
            Ok(traj) => {
                let final_step_angle =
                    traj.diagnostics.last().map(|d| d.angle_prev).unwrap_or(0.0);
                match detect_two_point_cycle(&traj, tol, min_repeats) {
                    Ok(Some(report)) => SweepRow {
                        gamma_hat: gh,
                        converged: false,
                        alpha: Some(report.alpha),
                        alpha_predicted: report.alpha_predicted,
                        xi_norm_a: Some(report.xi_norm_a),
                        balance_residual: Some(report.balance_residual),
                        error: None,
                    },
                    Ok(None) => SweepRow {
                        gamma_hat: gh,
                        converged: final_step_angle <= tol,
                        alpha: None,
                        alpha_predicted: None,
                        xi_norm_a: None,
                        balance_residual: None,
                        error: None,
                    },
                    Err(e) => SweepRow {
                        gamma_hat: gh,
                        converged: false,
                        alpha: None,
                        alpha_predicted: None,
                        xi_norm_a: None,
                        balance_residual: None,
                        error: Some(e.to_string()),
                    },
                }
            }
            Err(e) => SweepRow {
                gamma_hat: gh,
                converged: false,
                alpha: None,
                alpha_predicted: None,
                xi_norm_a: None,
                balance_residual: None,
                error: Some(e.to_string()),
            },
        };
        rows.push(row);
    }
    SweepTable { k, dt, steps, rows }
}
