//! Price adjustment mechanisms.
//!
//! Five mechanisms share one trajectory format: the classical first-order
//! flow and its raw/normalized discrete steppers, a second-order sphere
//! stepper with velocity damping and closed-form renormalization, the
//! matching continuous second-order flow, and a seller-level agent model
//! whose population mean reproduces the damped aggregate update exactly.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::economy::{Economy, PriceVector};
use crate::geometry;
use crate::{Error, Result};

/// Direct and closed-form step magnitudes must agree this tightly.
pub const STEP_MAGNITUDE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mechanism {
    ClassicalContinuous,
    ClassicalDiscrete,
    SecondOrderContinuous,
    SecondOrderDiscrete,
    AgentBased,
}

impl Mechanism {
    pub fn name(&self) -> &'static str {
        match self {
            Mechanism::ClassicalContinuous => "classical_continuous",
            Mechanism::ClassicalDiscrete => "classical_discrete",
            Mechanism::SecondOrderContinuous => "second_order_continuous",
            Mechanism::SecondOrderDiscrete => "second_order_discrete",
            Mechanism::AgentBased => "agent_based",
        }
    }
}

/// Two seller types: type a moves toward excess demand at the published mean
/// price with gain mu, type b imitates the previous mean price change with
/// gain nu. Fractions come from integer head counts so they are exact.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentParams {
    pub mu: f64,
    pub nu: f64,
    pub type_a_count: usize,
    pub type_b_count: usize,
}

impl AgentParams {
    pub fn total(&self) -> usize {
        self.type_a_count + self.type_b_count
    }

    pub fn f_a(&self) -> f64 {
        self.type_a_count as f64 / self.total() as f64
    }

    pub fn f_b(&self) -> f64 {
        self.type_b_count as f64 / self.total() as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.total() == 0 {
            return Err(Error::invalid("agent population is empty"));
        }
        if !self.mu.is_finite() || self.mu < 0.0 || !self.nu.is_finite() || self.nu < 0.0 {
            return Err(Error::invalid("agent gains mu, nu must be finite and nonnegative"));
        }
        // Imitation must not amplify the mean change, or the aggregate
        // recurrence has no damping.
        if self.f_b() * self.nu >= 1.0 {
            return Err(Error::invalid(format!(
                "imitation feedback f_b * nu = {} must be below 1",
                self.f_b() * self.nu
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsConfig {
    pub mechanism: Mechanism,
    /// Adjustment gain k of the price flow.
    pub k: f64,
    /// Damping coefficient of the continuous second-order flow.
    #[serde(default)]
    pub gamma: Option<f64>,
    /// Per-step damping of the discrete second-order stepper. Exactly one of
    /// `gamma` and `gamma_hat` may be set for that mechanism; a continuous
    /// gamma is converted as gamma * dt.
    #[serde(default)]
    pub gamma_hat: Option<f64>,
    pub dt: f64,
    /// Number of increments; a run records steps + 1 states.
    pub steps: usize,
    /// Renormalize after every classical discrete step.
    #[serde(default)]
    pub normalize: bool,
    #[serde(default)]
    pub agents: Option<AgentParams>,
}

impl DynamicsConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.k.is_finite() || self.k <= 0.0 {
            return Err(Error::invalid("k must be positive and finite"));
        }
        if !self.dt.is_finite() || self.dt <= 0.0 {
            return Err(Error::invalid("dt must be positive and finite"));
        }
        if self.steps == 0 {
            return Err(Error::invalid("steps must be at least 1"));
        }
        let damping_allowed = matches!(
            self.mechanism,
            Mechanism::SecondOrderContinuous | Mechanism::SecondOrderDiscrete
        );
        if !damping_allowed && (self.gamma.is_some() || self.gamma_hat.is_some()) {
            return Err(Error::invalid("damping applies only to the second-order mechanisms"));
        }
        match self.mechanism {
            Mechanism::SecondOrderContinuous => {
                if self.gamma_hat.is_some() {
                    return Err(Error::invalid(
                        "the continuous mechanism takes gamma, not gamma_hat",
                    ));
                }
                match self.gamma {
                    Some(g) if g.is_finite() && g >= 0.0 => {}
                    _ => return Err(Error::invalid("gamma must be set, finite and nonnegative")),
                }
            }
            Mechanism::SecondOrderDiscrete => match (self.gamma, self.gamma_hat) {
                (Some(g), None) if g.is_finite() && g >= 0.0 => {}
                (None, Some(gh)) if gh.is_finite() && gh >= 0.0 => {}
                (Some(_), Some(_)) => {
                    return Err(Error::invalid("set exactly one of gamma and gamma_hat"))
                }
                _ => return Err(Error::invalid("set one of gamma or gamma_hat, nonnegative")),
            },
            _ => {}
        }
        if self.normalize && self.mechanism != Mechanism::ClassicalDiscrete {
            return Err(Error::invalid("normalize applies only to classical_discrete"));
        }
        match self.mechanism {
            Mechanism::AgentBased => match &self.agents {
                Some(a) => a.validate()?,
                None => return Err(Error::invalid("agent_based needs agent parameters")),
            },
            _ => {
                if self.agents.is_some() {
                    return Err(Error::invalid("agent parameters only apply to agent_based"));
                }
            }
        }
        Ok(())
    }

    /// Per-step damping actually used by the discrete stepper.
    pub fn effective_gamma_hat(&self) -> Option<f64> {
        match self.mechanism {
            Mechanism::SecondOrderDiscrete => {
                self.gamma_hat.or(self.gamma.map(|g| g * self.dt))
            }
            _ => None,
        }
    }

    /// Per-step gain k * dt^2 of the discrete second-order stepper.
    pub fn k_hat(&self) -> f64 {
        self.k * self.dt * self.dt
    }
}

/// Per-state diagnostics recorded along every trajectory.
#[derive(Debug, Clone, Copy)]
pub struct StepDiagnostics {
    /// |xi| at the recorded state.
    pub xi_norm: f64,
    /// Angle to the previous recorded state (0 for the first row).
    pub angle_prev: f64,
    /// Angle to the reference equilibrium, when one is attached.
    pub angle_eq: Option<f64>,
    /// Renormalization factor of the discrete second-order step that
    /// produced this state; equals the cosine of `angle_prev`.
    pub scale: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub mechanism: Mechanism,
    pub k: f64,
    pub dt: f64,
    pub gamma: Option<f64>,
    /// Resolved per-step damping for the discrete second-order mechanism.
    pub gamma_hat: Option<f64>,
    pub times: Vec<f64>,
    pub points: Vec<DVector<f64>>,
    pub diagnostics: Vec<StepDiagnostics>,
    pub equilibrium: Option<DVector<f64>>,
}

impl Trajectory {
    fn new(
        mechanism: Mechanism,
        k: f64,
        dt: f64,
        gamma: Option<f64>,
        gamma_hat: Option<f64>,
        equilibrium: Option<&PriceVector>,
    ) -> Self {
        Trajectory {
            mechanism,
            k,
            dt,
            gamma,
            gamma_hat,
            times: Vec::new(),
            points: Vec::new(),
            diagnostics: Vec::new(),
            equilibrium: equilibrium.map(|p| p.as_vector().clone()),
        }
    }

    fn record(&mut self, economy: &Economy, t: f64, p: DVector<f64>, scale: Option<f64>) -> Result<()> {
        let xi_norm = economy.excess_demand_raw(&p)?.norm();
        let angle_prev = match self.points.last() {
            Some(prev) => geometry::angle_between(&p, prev)?,
            None => 0.0,
        };
        let angle_eq = match &self.equilibrium {
            Some(eq) => Some(geometry::angle_between(&p, eq)?),
            None => None,
        };
        self.times.push(t);
        self.points.push(p);
        self.diagnostics.push(StepDiagnostics { xi_norm, angle_prev, angle_eq, scale });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn last_point(&self) -> Option<&DVector<f64>> {
        self.points.last()
    }

    pub fn k_hat(&self) -> f64 {
        self.k * self.dt * self.dt
    }

    /// Euclidean norm drift max_t ||p(t)| - |p(0)||.
    pub fn max_norm_drift(&self) -> f64 {
        let n0 = match self.points.first() {
            Some(p) => p.norm(),
            None => return 0.0,
        };
        self.points.iter().map(|p| (p.norm() - n0).abs()).fold(0.0, f64::max)
    }
}

fn is_valid_state(p: &DVector<f64>) -> bool {
    p.iter().all(|x| x.is_finite() && *x > 0.0)
}

/// One raw classical step p + k dt |p| xi(p).
pub fn classical_step_raw(economy: &Economy, p: &DVector<f64>, k: f64, dt: f64) -> Result<DVector<f64>> {
    let xi = economy.excess_demand_raw(p)?;
    Ok(p + xi * (k * dt * p.norm()))
}

/// Tangent update of the discrete second-order stepper. Both inputs must be
/// unit vectors. Returns the renormalized next point and the rescale factor
/// A = |p|/|p_tilde|. The step magnitude is computed twice, directly and in
/// closed form from the angle/gain decomposition; disagreement beyond
/// STEP_MAGNITUDE_TOL is reported as a numerical inconsistency.
pub fn second_order_step(
    economy: &Economy,
    p_cur: &DVector<f64>,
    p_prev: &DVector<f64>,
    k_hat: f64,
    gamma_hat: f64,
) -> Result<(DVector<f64>, f64)> {
    let xi = economy.excess_demand_raw(p_cur)?;
    // Walras keeps xi tangent for the consumer kinds; projecting costs one
    // dot product and makes the closed-form magnitude exact for every kind.
    let xi_t = geometry::project_tangent(p_cur, &xi)?;
    let cos_theta = p_cur.dot(p_prev).clamp(-1.0, 1.0);
    // Tangent part of the chord to the previous point: (I - p p^T)(p - p_prev).
    let chord = p_cur * cos_theta - p_prev;
    let retain = 1.0 - gamma_hat;
    let tangent = &chord * retain + &xi_t * k_hat;
    let p_tilde = p_cur + &tangent;

    let direct = p_tilde.norm();
    let sin_sq = (1.0 - cos_theta * cos_theta).max(0.0);
    let closed_form = (1.0
        + retain * retain * sin_sq
        + k_hat * k_hat * xi_t.norm_squared()
        - 2.0 * retain * k_hat * p_prev.dot(&xi_t))
    .sqrt();
    if (direct - closed_form).abs() > STEP_MAGNITUDE_TOL {
        return Err(Error::NumericalInconsistency {
            detail: format!(
                "step magnitude mismatch: direct {direct:.17e} vs closed form {closed_form:.17e}"
            ),
        });
    }

    let next = geometry::renormalize(&p_tilde)?;
    Ok((next, 1.0 / direct))
}

/// Aggregate mean-price update implied by the agent population: returns the
/// new mean and the new mean change.
pub fn aggregate_step(
    economy: &Economy,
    mean: &DVector<f64>,
    prev_change: &DVector<f64>,
    params: &AgentParams,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let xi = economy.excess_demand_raw(mean)?;
    let change = xi * (params.f_a() * params.mu) + prev_change * (params.f_b() * params.nu);
    Ok((mean + &change, change))
}

/// Population of individually updated sellers.
#[derive(Debug, Clone)]
pub struct SellerPopulation {
    prices_a: Vec<DVector<f64>>,
    prices_b: Vec<DVector<f64>>,
    params: AgentParams,
    prev_mean_change: DVector<f64>,
}

impl SellerPopulation {
    /// Every seller starts at the same price.
    pub fn uniform(params: AgentParams, p0: &DVector<f64>) -> Result<Self> {
        params.validate()?;
        if !is_valid_state(p0) {
            return Err(Error::domain("initial price must be strictly positive"));
        }
        Ok(SellerPopulation {
            prices_a: vec![p0.clone(); params.type_a_count],
            prices_b: vec![p0.clone(); params.type_b_count],
            params,
            prev_mean_change: DVector::zeros(p0.len()),
        })
    }

    /// Type-a sellers start displaced from p0 by the given offsets (one per
    /// seller); used to measure the mean-field evaluation gap.
    pub fn with_type_a_offsets(
        params: AgentParams,
        p0: &DVector<f64>,
        offsets: &[DVector<f64>],
    ) -> Result<Self> {
        let mut pop = Self::uniform(params, p0)?;
        if offsets.len() != pop.prices_a.len() {
            return Err(Error::DimensionMismatch {
                expected: pop.prices_a.len(),
                got: offsets.len(),
            });
        }
        for (p, off) in pop.prices_a.iter_mut().zip(offsets) {
            *p += off;
            if !is_valid_state(p) {
                return Err(Error::domain("offset pushed a seller out of the orthant"));
            }
        }
        Ok(pop)
    }

    pub fn mean_price(&self) -> DVector<f64> {
        let n = self.prices_a.first().or(self.prices_b.first()).map(|p| p.len()).unwrap_or(0);
        let mut sum = DVector::zeros(n);
        for p in self.prices_a.iter().chain(self.prices_b.iter()) {
            sum += p;
        }
        sum / self.params.total() as f64
    }

    /// One synchronous round: type-a sellers move by mu * xi at the current
    /// mean, type-b sellers copy nu times the previous mean change.
    pub fn step(&mut self, economy: &Economy) -> Result<()> {
        let mean = self.mean_price();
        let xi = economy.excess_demand_raw(&mean)?;
        let delta_a = xi * self.params.mu;
        let delta_b = &self.prev_mean_change * self.params.nu;
        for p in &mut self.prices_a {
            *p += &delta_a;
        }
        for p in &mut self.prices_b {
            *p += &delta_b;
        }
        for p in self.prices_a.iter().chain(self.prices_b.iter()) {
            if !is_valid_state(p) {
                return Err(Error::domain("a seller price left the positive orthant"));
            }
        }
        self.prev_mean_change = self.mean_price() - mean;
        Ok(())
    }

    /// Mean-field gap: distance between the average of the type-a sellers'
    /// own excess demands and the excess demand at the population mean.
    /// Zero when type-a prices coincide; grows with price dispersion.
    pub fn evaluation_gap(&self, economy: &Economy) -> Result<f64> {
        if self.prices_a.is_empty() {
            return Ok(0.0);
        }
        let mut avg_xi = DVector::zeros(self.mean_price().len());
        for p in &self.prices_a {
            avg_xi += economy.excess_demand_raw(p)?;
        }
        avg_xi /= self.prices_a.len() as f64;
        let xi_at_mean = economy.excess_demand_raw(&self.mean_price())?;
        Ok((avg_xi - xi_at_mean).norm())
    }
}

fn orthant_exit(step: usize, trajectory: Trajectory) -> Error {
    Error::OrthantExit { step, trajectory: Box::new(trajectory) }
}

/// Fourth-order Runge-Kutta increment for a state derivative f.
fn rk4_step<F>(f: &F, y: &DVector<f64>, dt: f64) -> Result<DVector<f64>>
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>>,
{
    let k1 = f(y)?;
    let k2 = f(&(y + &k1 * (dt / 2.0)))?;
    let k3 = f(&(y + &k2 * (dt / 2.0)))?;
    let k4 = f(&(y + &k3 * dt))?;
    Ok(y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0))
}

pub fn run_classical_continuous(
    economy: &Economy,
    p0: &PriceVector,
    k: f64,
    dt: f64,
    steps: usize,
    equilibrium: Option<&PriceVector>,
) -> Result<Trajectory> {
    let mut traj = Trajectory::new(Mechanism::ClassicalContinuous, k, dt, None, None, equilibrium);
    let f = |p: &DVector<f64>| -> Result<DVector<f64>> {
        let xi = economy.excess_demand_raw(p)?;
        Ok(xi * (k * p.norm()))
    };
    let mut p = p0.as_vector().clone();
    traj.record(economy, 0.0, p.clone(), None)?;
    for step in 1..=steps {
        let next = match rk4_step(&f, &p, dt) {
            Ok(q) if is_valid_state(&q) => q,
            Ok(_) => return Err(orthant_exit(step, traj)),
            Err(Error::Domain { .. }) | Err(Error::DegenerateVector { .. }) => {
                return Err(orthant_exit(step, traj))
            }
            Err(e) => return Err(e),
        };
        traj.record(economy, step as f64 * dt, next.clone(), None)?;
        p = next;
    }
    Ok(traj)
}

pub fn run_classical_discrete(
    economy: &Economy,
    p0: &PriceVector,
    k: f64,
    dt: f64,
    steps: usize,
    normalize: bool,
    equilibrium: Option<&PriceVector>,
) -> Result<Trajectory> {
    let mut traj = Trajectory::new(Mechanism::ClassicalDiscrete, k, dt, None, None, equilibrium);
    let mut p = p0.as_vector().clone();
    traj.record(economy, 0.0, p.clone(), None)?;
    for step in 1..=steps {
        let raw = match classical_step_raw(economy, &p, k, dt) {
            Ok(q) => q,
            Err(Error::Domain { .. }) => return Err(orthant_exit(step, traj)),
            Err(e) => return Err(e),
        };
        let next = if normalize {
            match geometry::renormalize(&raw) {
                Ok(q) => q,
                Err(Error::DegenerateVector { .. }) => return Err(orthant_exit(step, traj)),
                Err(e) => return Err(e),
            }
        } else {
            raw
        };
        if !is_valid_state(&next) {
            return Err(orthant_exit(step, traj));
        }
        traj.record(economy, step as f64 * dt, next.clone(), None)?;
        p = next;
    }
    Ok(traj)
}

pub fn run_second_order_discrete(
    economy: &Economy,
    p0: &PriceVector,
    p_before: Option<&PriceVector>,
    k: f64,
    dt: f64,
    gamma_hat: f64,
    steps: usize,
    equilibrium: Option<&PriceVector>,
) -> Result<Trajectory> {
    let k_hat = k * dt * dt;
    let mut traj =
        Trajectory::new(Mechanism::SecondOrderDiscrete, k, dt, None, Some(gamma_hat), equilibrium);
    let mut p_prev = p_before.unwrap_or(p0).as_vector().clone();
    let mut p_cur = p0.as_vector().clone();
    traj.record(economy, 0.0, p_cur.clone(), None)?;
    for step in 1..=steps {
        let (next, scale) = match second_order_step(economy, &p_cur, &p_prev, k_hat, gamma_hat) {
            Ok(r) => r,
            Err(Error::Domain { .. }) | Err(Error::DegenerateVector { .. }) => {
                return Err(orthant_exit(step, traj))
            }
            Err(e) => return Err(e),
        };
        if !is_valid_state(&next) {
            return Err(orthant_exit(step, traj));
        }
        traj.record(economy, step as f64 * dt, next.clone(), Some(scale))?;
        p_prev = p_cur;
        p_cur = next;
    }
    Ok(traj)
}

/// Continuous second-order flow with the radial acceleration that keeps
/// |p| constant whenever the velocity is tangent and the field satisfies the
/// budget identity. The initial velocity is projected onto the tangent space.
pub fn run_second_order_continuous(
    economy: &Economy,
    p0: &PriceVector,
    v0: Option<&DVector<f64>>,
    k: f64,
    gamma: f64,
    dt: f64,
    steps: usize,
    equilibrium: Option<&PriceVector>,
) -> Result<Trajectory> {
    let n = p0.len();
    let mut traj =
        Trajectory::new(Mechanism::SecondOrderContinuous, k, dt, Some(gamma), None, equilibrium);
    let f = |y: &DVector<f64>| -> Result<DVector<f64>> {
        let p = y.rows(0, n).into_owned();
        let v = y.rows(n, n).into_owned();
        let xi = economy.excess_demand_raw(&p)?;
        let p_norm = p.norm();
        let accel = -&p * (v.norm_squared() / (p_norm * p_norm)) + xi * (k * p_norm) - &v * gamma;
        let mut dy = DVector::zeros(2 * n);
        dy.rows_mut(0, n).copy_from(&v);
        dy.rows_mut(n, n).copy_from(&accel);
        Ok(dy)
    };
    let v_init = match v0 {
        Some(v) => geometry::project_tangent(p0.as_vector(), v)?,
        None => DVector::zeros(n),
    };
    let mut y = DVector::zeros(2 * n);
    y.rows_mut(0, n).copy_from(p0.as_vector());
    y.rows_mut(n, n).copy_from(&v_init);
    traj.record(economy, 0.0, p0.as_vector().clone(), None)?;
    for step in 1..=steps {
        let next = match rk4_step(&f, &y, dt) {
            Ok(q) => q,
            Err(Error::Domain { .. }) | Err(Error::DegenerateVector { .. }) => {
                return Err(orthant_exit(step, traj))
            }
            Err(e) => return Err(e),
        };
        let p = next.rows(0, n).into_owned();
        if !is_valid_state(&p) {
            return Err(orthant_exit(step, traj));
        }
        traj.record(economy, step as f64 * dt, p, None)?;
        y = next;
    }
    Ok(traj)
}

/// Seller-level simulation; the trajectory records population mean prices.
pub fn run_agent_model(
    economy: &Economy,
    params: &AgentParams,
    p0: &DVector<f64>,
    steps: usize,
    equilibrium: Option<&PriceVector>,
) -> Result<Trajectory> {
    let mut pop = SellerPopulation::uniform(*params, p0)?;
    run_agent_population(economy, &mut pop, steps, equilibrium)
}

/// Like `run_agent_model` but starting from a prepared population (for
/// heterogeneous starts).
pub fn run_agent_population(
    economy: &Economy,
    pop: &mut SellerPopulation,
    steps: usize,
    equilibrium: Option<&PriceVector>,
) -> Result<Trajectory> {
    let mut traj =
        Trajectory::new(Mechanism::AgentBased, pop.params.mu, 1.0, None, None, equilibrium);
    traj.record(economy, 0.0, pop.mean_price(), None)?;
    for step in 1..=steps {
        match pop.step(economy) {
            Ok(()) => {}
            Err(Error::Domain { .. }) => return Err(orthant_exit(step, traj)),
            Err(e) => return Err(e),
        }
        traj.record(economy, step as f64, pop.mean_price(), None)?;
    }
    Ok(traj)
}

/// Largest deviation between the seller-level mean and the closed-form
/// aggregate recurrence over a shared run.
pub fn agent_aggregate_deviation(
    economy: &Economy,
    params: &AgentParams,
    p0: &DVector<f64>,
    steps: usize,
) -> Result<f64> {
    let mut pop = SellerPopulation::uniform(*params, p0)?;
    let mut mean = p0.clone();
    let mut change = DVector::zeros(p0.len());
    let mut worst = 0.0f64;
    for _ in 0..steps {
        pop.step(economy)?;
        let (next_mean, next_change) = aggregate_step(economy, &mean, &change, params)?;
        mean = next_mean;
        change = next_change;
        worst = worst.max((pop.mean_price() - &mean).amax());
    }
    Ok(worst)
}

/// Linearized decay rate -gamma/2 + sqrt((gamma/2)^2 - k lambda) of the
/// damped second-order flow along a stable mode of strength lambda > 0.
/// Underdamped cases return the root with positive imaginary part.
pub fn decay_rate(gamma: f64, k: f64, lambda_m: f64) -> Complex64 {
    let half = gamma / 2.0;
    let disc = half * half - k * lambda_m;
    if disc >= 0.0 {
        Complex64::new(-half + disc.sqrt(), 0.0)
    } else {
        Complex64::new(-half, (-disc).sqrt())
    }
}

/// Run the mechanism described by a validated config.
pub fn run(
    economy: &Economy,
    config: &DynamicsConfig,
    p0: &PriceVector,
    equilibrium: Option<&PriceVector>,
) -> Result<Trajectory> {
    config.validate()?;
    match config.mechanism {
        Mechanism::ClassicalContinuous => {
            run_classical_continuous(economy, p0, config.k, config.dt, config.steps, equilibrium)
        }
        Mechanism::ClassicalDiscrete => run_classical_discrete(
            economy,
            p0,
            config.k,
            config.dt,
            config.steps,
            config.normalize,
            equilibrium,
        ),
        Mechanism::SecondOrderContinuous => run_second_order_continuous(
            economy,
            p0,
            None,
            config.k,
            config.gamma.expect("validated"),
            config.dt,
            config.steps,
            equilibrium,
        ),
        Mechanism::SecondOrderDiscrete => run_second_order_discrete(
            economy,
            p0,
            None,
            config.k,
            config.dt,
            config.effective_gamma_hat().expect("validated"),
            config.steps,
            equilibrium,
        ),
        Mechanism::AgentBased => run_agent_model(
            economy,
            config.agents.as_ref().expect("validated"),
            p0.as_vector(),
            config.steps,
            equilibrium,
        ),
    }
}
