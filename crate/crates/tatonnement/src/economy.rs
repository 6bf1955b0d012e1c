//! Exchange economy families and their aggregate excess demand.
//!
//! Three constructible kinds: Cobb-Douglas consumers, fixed-proportion
//! (Leontief) consumers including the classic 3-good cyclic instance, and
//! explicit linearized fields around a chosen equilibrium. All fields are
//! constant along rays (scale of the price vector never matters) and the
//! consumer kinds satisfy the budget identity p . xi(p) = 0 exactly.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::geometry;
use crate::{Error, Result};

/// Relative FD step for jacobians: h = FD_STEP_SCALE * min_i p_i.
pub const FD_STEP_SCALE: f64 = 1e-5;

/// Default residual target for equilibrium search.
pub const EQUILIBRIUM_TOL: f64 = 1e-12;

const EQUILIBRIUM_MAX_ITER: usize = 200;

/// Strictly positive price vector of unit Euclidean norm, at least two goods.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceVector(DVector<f64>);

impl PriceVector {
    pub fn new(components: &[f64]) -> Result<Self> {
        Self::from_vector(DVector::from_column_slice(components))
    }

    pub fn from_vector(v: DVector<f64>) -> Result<Self> {
        if v.len() < 2 {
            return Err(Error::domain("price vector needs at least two goods"));
        }
        if v.iter().any(|x| !x.is_finite() || *x <= 0.0) {
            return Err(Error::domain(
                "price components must be finite and strictly positive",
            ));
        }
        Ok(PriceVector(geometry::renormalize(&v)?))
    }

    /// Draw a uniformly oriented strictly interior point of the positive
    /// unit sphere: absolute values of standard normals, normalized.
    /// Components closer than 1e-9 to the boundary are resampled.
    pub fn random_interior<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        assert!(n >= 2, "need at least two goods");
        loop {
            let v = DVector::from_iterator(
                n,
                (0..n).map(|_| {
                    let x: f64 = StandardNormal.sample(rng);
                    x.abs()
                }),
            );
            if let Ok(u) = geometry::renormalize(&v) {
                if u.iter().all(|x| *x > 1e-9) {
                    return PriceVector(u);
                }
            }
        }
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.0.iter().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl std::ops::Index<usize> for PriceVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl AsRef<DVector<f64>> for PriceVector {
    fn as_ref(&self) -> &DVector<f64> {
        &self.0
    }
}

/// Aggregate excess demand at a price point.
#[derive(Debug, Clone)]
pub struct ExcessDemand(DVector<f64>);

impl ExcessDemand {
    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn into_vector(self) -> DVector<f64> {
        self.0
    }
}

impl std::ops::Index<usize> for ExcessDemand {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Consumer with demand x_i = alpha_i * wealth / p_i.
#[derive(Debug, Clone)]
pub struct CobbDouglasConsumer {
    alphas: DVector<f64>,
    endowments: DVector<f64>,
}

impl CobbDouglasConsumer {
    /// Weights must be nonnegative and sum to 1 within 1e-12; endowments
    /// nonnegative.
    pub fn new(alphas: Vec<f64>, endowments: Vec<f64>) -> Result<Self> {
        if alphas.len() != endowments.len() {
            return Err(Error::DimensionMismatch {
                expected: alphas.len(),
                got: endowments.len(),
            });
        }
        if alphas.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(Error::invalid("preference weights must be nonnegative"));
        }
        let sum: f64 = alphas.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "preference weights must sum to 1 (got {sum})"
            )));
        }
        if endowments.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid("endowments must be nonnegative"));
        }
        Ok(CobbDouglasConsumer {
            alphas: DVector::from_vec(alphas),
            endowments: DVector::from_vec(endowments),
        })
    }

    pub fn alphas(&self) -> &DVector<f64> {
        &self.alphas
    }

    pub fn endowments(&self) -> &DVector<f64> {
        &self.endowments
    }
}

/// Consumer demanding goods in fixed proportions: x = a * wealth / (p . a).
#[derive(Debug, Clone)]
pub struct LeontiefConsumer {
    coefficients: DVector<f64>,
    endowments: DVector<f64>,
}

impl LeontiefConsumer {
    pub fn new(coefficients: Vec<f64>, endowments: Vec<f64>) -> Result<Self> {
        if coefficients.len() != endowments.len() {
            return Err(Error::DimensionMismatch {
                expected: coefficients.len(),
                got: endowments.len(),
            });
        }
        if coefficients.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(Error::invalid("proportion coefficients must be nonnegative"));
        }
        if coefficients.iter().all(|a| *a == 0.0) {
            return Err(Error::invalid("at least one proportion coefficient must be positive"));
        }
        if endowments.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid("endowments must be nonnegative"));
        }
        Ok(LeontiefConsumer {
            coefficients: DVector::from_vec(coefficients),
            endowments: DVector::from_vec(endowments),
        })
    }

    pub fn coefficients(&self) -> &DVector<f64> {
        &self.coefficients
    }

    pub fn endowments(&self) -> &DVector<f64> {
        &self.endowments
    }
}

#[derive(Debug, Clone)]
pub enum Economy {
    CobbDouglas { consumers: Vec<CobbDouglasConsumer> },
    ScarfLeontief { consumers: Vec<LeontiefConsumer> },
    /// Explicit field xi(p) = J (p/|p| - p_star), constant along rays.
    Linearized { p_star: PriceVector, jacobian: DMatrix<f64> },
}

impl Economy {
    pub fn cobb_douglas(consumers: Vec<CobbDouglasConsumer>) -> Result<Self> {
        if consumers.is_empty() {
            return Err(Error::invalid("need at least one consumer"));
        }
        let n = consumers[0].alphas.len();
        if n < 2 {
            return Err(Error::invalid("need at least two goods"));
        }
        for c in &consumers {
            if c.alphas.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: c.alphas.len() });
            }
        }
        let econ = Economy::CobbDouglas { consumers };
        econ.check_total_endowment()?;
        Ok(econ)
    }

    pub fn scarf_leontief(consumers: Vec<LeontiefConsumer>) -> Result<Self> {
        if consumers.is_empty() {
            return Err(Error::invalid("need at least one consumer"));
        }
        let n = consumers[0].coefficients.len();
        if n < 2 {
            return Err(Error::invalid("need at least two goods"));
        }
        for c in &consumers {
            if c.coefficients.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: c.coefficients.len() });
            }
        }
        let econ = Economy::ScarfLeontief { consumers };
        econ.check_total_endowment()?;
        Ok(econ)
    }

    /// Classic 3-good cyclic instance: consumer j owns one unit of good j and
    /// wants goods j and j+1 in equal proportions. Its unique equilibrium is
    /// equal prices, and the adjustment field there rotates without decay.
    pub fn scarf_classic() -> Self {
        let consumers = vec![
            LeontiefConsumer::new(vec![1.0, 1.0, 0.0], vec![1.0, 0.0, 0.0]).unwrap(),
            LeontiefConsumer::new(vec![0.0, 1.0, 1.0], vec![0.0, 1.0, 0.0]).unwrap(),
            LeontiefConsumer::new(vec![1.0, 0.0, 1.0], vec![0.0, 0.0, 1.0]).unwrap(),
        ];
        Economy::ScarfLeontief { consumers }
    }

    /// Field J (p/|p| - p_star). With `project` set, J is replaced by
    /// (I - p p^T) J (I - p p^T) so both J p_star = 0 and p_star^T J = 0 hold
    /// by construction; pass `project = false` only to study broken fields.
    pub fn linearized(p_star: PriceVector, jacobian: DMatrix<f64>, project: bool) -> Result<Self> {
        let n = p_star.len();
        if jacobian.nrows() != n || jacobian.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: jacobian.nrows().max(jacobian.ncols()) });
        }
        if jacobian.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("jacobian entries must be finite"));
        }
        let jacobian = if project {
            let p = p_star.as_vector();
            let proj = DMatrix::identity(n, n) - p * p.transpose();
            &proj * jacobian * proj
        } else {
            jacobian
        };
        Ok(Economy::Linearized { p_star, jacobian })
    }

    pub fn n_goods(&self) -> usize {
        match self {
            Economy::CobbDouglas { consumers } => consumers[0].alphas.len(),
            Economy::ScarfLeontief { consumers } => consumers[0].coefficients.len(),
            Economy::Linearized { p_star, .. } => p_star.len(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Economy::CobbDouglas { .. } => "cobb_douglas",
            Economy::ScarfLeontief { .. } => "scarf_leontief",
            Economy::Linearized { .. } => "linearized",
        }
    }

    /// Excess demand at any strictly positive price vector (any scale).
    pub fn excess_demand_raw(&self, p: &DVector<f64>) -> Result<DVector<f64>> {
        let n = self.n_goods();
        if p.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: p.len() });
        }
        if p.iter().any(|x| !x.is_finite() || *x <= 0.0) {
            return Err(Error::domain(
                "excess demand needs strictly positive finite prices",
            ));
        }
        match self {
            Economy::CobbDouglas { consumers } => {
                let mut xi = DVector::zeros(n);
                for c in consumers {
                    let wealth = p.dot(&c.endowments);
                    for i in 0..n {
                        xi[i] += c.alphas[i] * wealth / p[i] - c.endowments[i];
                    }
                }
                Ok(xi)
            }
            Economy::ScarfLeontief { consumers } => {
                let mut xi = DVector::zeros(n);
                for c in consumers {
                    let wealth = p.dot(&c.endowments);
                    let cost = p.dot(&c.coefficients);
                    // cost > 0 because p > 0 and some coefficient is positive
                    let scale = wealth / cost;
                    for i in 0..n {
                        xi[i] += c.coefficients[i] * scale - c.endowments[i];
                    }
                }
                Ok(xi)
            }
            Economy::Linearized { p_star, jacobian } => {
                let u = geometry::renormalize(p)?;
                Ok(jacobian * (u - p_star.as_vector()))
            }
        }
    }

    pub fn excess_demand(&self, p: &PriceVector) -> Result<ExcessDemand> {
        Ok(ExcessDemand(self.excess_demand_raw(p.as_vector())?))
    }

    fn check_total_endowment(&self) -> Result<()> {
        let n = self.n_goods();
        let mut total = DVector::zeros(n);
        match self {
            Economy::CobbDouglas { consumers } => {
                for c in consumers {
                    total += &c.endowments;
                }
            }
            Economy::ScarfLeontief { consumers } => {
                for c in consumers {
                    total += &c.endowments;
                }
            }
            Economy::Linearized { .. } => return Ok(()),
        }
        if total.iter().any(|w| *w <= 0.0) {
            return Err(Error::invalid("every good needs positive total endowment"));
        }
        Ok(())
    }
}

/// Central-difference jacobian of excess demand in ambient coordinates.
/// `h` defaults to FD_STEP_SCALE * min_i p_i and must stay below min_i p_i
/// so both stencil points remain strictly positive.
pub fn jacobian(economy: &Economy, p: &PriceVector, h: Option<f64>) -> Result<DMatrix<f64>> {
    let n = economy.n_goods();
    let pv = p.as_vector();
    let min_p = pv.min();
    let h = h.unwrap_or(FD_STEP_SCALE * min_p);
    if !(h > 0.0) || h >= min_p {
        return Err(Error::domain(format!(
            "FD step {h} must lie in (0, {min_p})"
        )));
    }
    let mut jac = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut plus = pv.clone();
        let mut minus = pv.clone();
        plus[j] += h;
        minus[j] -= h;
        let xi_plus = economy.excess_demand_raw(&plus)?;
        let xi_minus = economy.excess_demand_raw(&minus)?;
        for i in 0..n {
            jac[(i, j)] = (xi_plus[i] - xi_minus[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// Budget-identity residual |p . xi| / (|p| max(1, |xi|)), zero in exact
/// arithmetic for the consumer kinds.
pub fn walras_residual(economy: &Economy, p: &DVector<f64>) -> Result<f64> {
    let xi = economy.excess_demand_raw(p)?;
    Ok(p.dot(&xi).abs() / (p.norm() * xi.norm().max(1.0)))
}

pub fn check_walras(economy: &Economy, p: &DVector<f64>, tol: f64) -> Result<bool> {
    Ok(walras_residual(economy, p)? <= tol)
}

/// Max-norm change of excess demand under rescaling p -> scale * p, relative
/// to max(1, |xi(p)|_inf). Zero for fields constant along rays.
pub fn homogeneity_residual(economy: &Economy, p: &DVector<f64>, scale: f64) -> Result<f64> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::domain("scale must be positive and finite"));
    }
    let xi = economy.excess_demand_raw(p)?;
    let xi_scaled = economy.excess_demand_raw(&(p * scale))?;
    let diff = (&xi_scaled - &xi).amax();
    Ok(diff / xi.amax().max(1.0))
}

/// Residual of the ray-invariance identity Dxi(p) p = 0, scaled by the
/// jacobian norm. Holds at every point for fields constant along rays.
pub fn zero_mode_residual(economy: &Economy, p: &PriceVector, h: Option<f64>) -> Result<f64> {
    let jac = jacobian(economy, p, h)?;
    let jac_norm = jac.norm();
    if jac_norm == 0.0 {
        return Ok(0.0);
    }
    Ok((&jac * p.as_vector()).norm() / jac_norm)
}

/// Newton search for a market-clearing price on the unit sphere, iterating
/// in the tangent hyperplane and renormalizing each candidate. Backtracks on
/// the residual norm; candidates leaving the positive orthant are rejected
/// the same way.
pub fn find_equilibrium(
    economy: &Economy,
    start: &PriceVector,
    tol: Option<f64>,
    max_iter: Option<usize>,
) -> Result<PriceVector> {
    let tol = tol.unwrap_or(EQUILIBRIUM_TOL);
    let max_iter = max_iter.unwrap_or(EQUILIBRIUM_MAX_ITER);
    let mut p = start.clone();
    let mut xi = economy.excess_demand(&p)?.into_vector();
    let mut residual = xi.norm();
    for _ in 0..max_iter {
        if residual <= tol {
            return Ok(p);
        }
        let jac = jacobian(economy, &p, None)?;
        let basis = geometry::tangent_basis(p.as_vector())?;
        let jt = basis.transpose() * &jac * &basis;
        let rhs = -(basis.transpose() * &xi);
        let delta_t = jt.lu().solve(&rhs).ok_or(Error::NoConvergence {
            iterations: max_iter,
            residual,
        })?;
        let full_step = &basis * delta_t;
        let mut s = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let candidate = p.as_vector() + &full_step * s;
            if let Ok(q) = PriceVector::from_vector(candidate) {
                if let Ok(xi_new) = economy.excess_demand(&q) {
                    let r_new = xi_new.norm();
                    if r_new <= residual * (1.0 - 1e-4 * s) || r_new <= tol {
                        p = q;
                        xi = xi_new.into_vector();
                        residual = r_new;
                        accepted = true;
                        break;
                    }
                }
            }
            s *= 0.5;
        }
        if !accepted {
            return Err(Error::NoConvergence { iterations: max_iter, residual });
        }
    }
    if residual <= tol {
        Ok(p)
    } else {
        Err(Error::NoConvergence { iterations: max_iter, residual })
    }
}
