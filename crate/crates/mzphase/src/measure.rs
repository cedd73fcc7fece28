//! Measurement records, their exact distributions, and seeded samplers.
//!
//! Homodyne detection reads the rotated quadratures x_plus and x_minus of the
//! two output modes; photon counting reads the pair of counts (m, n). For the
//! qubit-which-path probe each record also carries the +-1 outcome of an
//! x-basis qubit readout. All densities follow the convention where the
//! quadrature noise profile is pi^(-1/2) exp(-(x - mu)^2).
//!
//! Samplers are deterministic: a fixed seed reproduces the exact record
//! stream. Draws come from a ChaCha12 generator seeded with `seed_from_u64`;
//! callers running trials in parallel must derive one seed per trial (see
//! `fisher_c::mle_campaign`) rather than share a generator.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::ser::Serializer;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::specfun::{gaussian_pdf_unit_halfwidth, poisson_pmf};
use crate::states::{displacement_pair, ecs_normalization, DephasingParams, InterferometerParams};

/// Outcome of the x-basis qubit readout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QubitOutcome {
    Plus,
    Minus,
}

impl QubitOutcome {
    pub fn sign(self) -> f64 {
        match self {
            QubitOutcome::Plus => 1.0,
            QubitOutcome::Minus => -1.0,
        }
    }

    pub fn from_sign(sign: i8) -> Result<Self> {
        match sign {
            1 => Ok(QubitOutcome::Plus),
            -1 => Ok(QubitOutcome::Minus),
            other => Err(Error::invalid(format!("qubit outcome must be +-1, got {other}"))),
        }
    }
}

impl Serialize for QubitOutcome {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_i8(match self {
            QubitOutcome::Plus => 1,
            QubitOutcome::Minus => -1,
        })
    }
}

/// One homodyne record; `qubit_x` is present exactly for QWP probes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HomodyneSample {
    pub x_plus: f64,
    pub x_minus: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qubit_x: Option<QubitOutcome>,
}

/// One photon-counting record; `qubit_x` is present exactly for QWP probes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CountSample {
    pub m: u64,
    pub n: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qubit_x: Option<QubitOutcome>,
}

/// The interference term 1 + visibility * cos(theta) that carries all phase
/// dependence of the record distributions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseInterferenceTerm {
    pub theta: f64,
    pub visibility: f64,
}

impl PhaseInterferenceTerm {
    /// Theta_x = 2 x_plus mu_minus - 2 x_minus mu_plus, visibility e^(-p a^2).
    pub fn ecs_homodyne(params: &InterferometerParams, x_plus: f64, x_minus: f64) -> Self {
        let mu = displacement_pair(params);
        PhaseInterferenceTerm {
            theta: 2.0 * (x_plus * mu.mu_minus - x_minus * mu.mu_plus),
            visibility: loss_visibility(params),
        }
    }

    /// Theta_{m,n} = (m + n) phi + m pi, visibility e^(-p a^2).
    pub fn ecs_counting(params: &InterferometerParams, m: u64, n: u64) -> Self {
        PhaseInterferenceTerm {
            theta: (m + n) as f64 * params.phi() + m as f64 * std::f64::consts::PI,
            visibility: loss_visibility(params),
        }
    }

    /// Homodyne interference of the qubit conditional: Theta_x + vartheta,
    /// visibility e^(-p a^2 - chi).
    pub fn qwp_homodyne(
        params: &InterferometerParams,
        deph: &DephasingParams,
        x_plus: f64,
        x_minus: f64,
    ) -> Self {
        let base = PhaseInterferenceTerm::ecs_homodyne(params, x_plus, x_minus);
        PhaseInterferenceTerm {
            theta: base.theta + deph.vartheta(),
            visibility: base.visibility * (-deph.chi()).exp(),
        }
    }

    /// Counting interference of the qubit conditional: Theta_{m,n} - vartheta,
    /// visibility e^(-p a^2 - chi).
    pub fn qwp_counting(
        params: &InterferometerParams,
        deph: &DephasingParams,
        m: u64,
        n: u64,
    ) -> Self {
        let base = PhaseInterferenceTerm::ecs_counting(params, m, n);
        PhaseInterferenceTerm {
            theta: base.theta - deph.vartheta(),
            visibility: base.visibility * (-deph.chi()).exp(),
        }
    }

    /// 1 + visibility cos(theta).
    pub fn fringe(&self) -> f64 {
        1.0 + self.visibility * self.theta.cos()
    }
}

fn loss_visibility(params: &InterferometerParams) -> f64 {
    (-params.loss_p() * params.alpha() * params.alpha()).exp()
}

fn arm_rate(params: &InterferometerParams) -> f64 {
    0.5 * (1.0 - params.loss_p()) * params.alpha() * params.alpha()
}

const UNDERFLOW: f64 = 1e-300;

fn guard_underflow(p: f64) -> Result<f64> {
    if p < UNDERFLOW {
        Err(Error::DensityUnderflow(p))
    } else {
        Ok(p)
    }
}

/// ECS homodyne density
/// p(x|phi) = 2 N^2 [1 + v cos(Theta_x)] g(x_plus - mu_plus) g(x_minus - mu_minus).
pub fn ecs_homodyne_pdf(x_plus: f64, x_minus: f64, params: &InterferometerParams) -> f64 {
    let mu = displacement_pair(params);
    let n_sq = ecs_normalization(params.alpha()).powi(2);
    let fringe = PhaseInterferenceTerm::ecs_homodyne(params, x_plus, x_minus).fringe();
    2.0 * n_sq
        * fringe
        * gaussian_pdf_unit_halfwidth(x_plus, mu.mu_plus)
        * gaussian_pdf_unit_halfwidth(x_minus, mu.mu_minus)
}

/// Analytic score d/dphi ln p of the ECS homodyne density at fixed phi_bar.
pub fn ecs_homodyne_dlogpdf_dphi(
    x_plus: f64,
    x_minus: f64,
    params: &InterferometerParams,
) -> Result<f64> {
    guard_underflow(ecs_homodyne_pdf(x_plus, x_minus, params))?;
    let mu = displacement_pair(params);
    let term = PhaseInterferenceTerm::ecs_homodyne(params, x_plus, x_minus);
    let half_theta = x_plus * mu.mu_minus - x_minus * mu.mu_plus;
    let a = x_plus * mu.mu_plus + x_minus * mu.mu_minus;
    Ok(half_theta + term.visibility * a * term.theta.sin() / term.fringe())
}

/// Marginal of x_plus alone:
/// 2 N^2 g(x - mu_plus) [1 + v e^(-mu_plus^2) cos(2 mu_minus (x - mu_plus))].
pub fn ecs_homodyne_marginal_x_plus(x_plus: f64, params: &InterferometerParams) -> f64 {
    let mu = displacement_pair(params);
    let n_sq = ecs_normalization(params.alpha()).powi(2);
    let v = loss_visibility(params);
    let osc = (2.0 * mu.mu_minus * (x_plus - mu.mu_plus)).cos();
    2.0 * n_sq
        * gaussian_pdf_unit_halfwidth(x_plus, mu.mu_plus)
        * (1.0 + v * (-mu.mu_plus * mu.mu_plus).exp() * osc)
}

/// ECS counting mass
/// p(m, n|phi) = 2 N^2 [1 + v cos(Theta_{m,n})] P(m; lambda) P(n; lambda),
/// lambda = (1 - p) alpha^2 / 2.
pub fn ecs_counting_pmf(m: u64, n: u64, params: &InterferometerParams) -> f64 {
    let lambda = arm_rate(params);
    let n_sq = ecs_normalization(params.alpha()).powi(2);
    let fringe = PhaseInterferenceTerm::ecs_counting(params, m, n).fringe();
    2.0 * n_sq
        * fringe
        * poisson_pmf(m, lambda).expect("lambda >= 0 by construction")
        * poisson_pmf(n, lambda).expect("lambda >= 0 by construction")
}

/// Analytic score d/dphi ln p of the ECS counting mass.
pub fn ecs_counting_dlogpmf_dphi(m: u64, n: u64, params: &InterferometerParams) -> Result<f64> {
    guard_underflow(ecs_counting_pmf(m, n, params))?;
    let term = PhaseInterferenceTerm::ecs_counting(params, m, n);
    let k = (m + n) as f64;
    Ok(-term.visibility * k * term.theta.sin() / term.fringe())
}

/// QWP joint density of quadratures and qubit outcome:
/// p(x, X|phi) = g(x_plus - mu_plus) g(x_minus - mu_minus)
///               * (1/2)[1 + X vtilde cos(Theta_x + vartheta)].
pub fn qwp_homodyne_joint(
    x_plus: f64,
    x_minus: f64,
    qubit: QubitOutcome,
    params: &InterferometerParams,
    deph: &DephasingParams,
) -> f64 {
    let mu = displacement_pair(params);
    let term = PhaseInterferenceTerm::qwp_homodyne(params, deph, x_plus, x_minus);
    gaussian_pdf_unit_halfwidth(x_plus, mu.mu_plus)
        * gaussian_pdf_unit_halfwidth(x_minus, mu.mu_minus)
        * 0.5
        * (1.0 + qubit.sign() * term.visibility * term.theta.cos())
}

/// Analytic score of the QWP homodyne joint density.
pub fn qwp_homodyne_dlogpdf_dphi(
    x_plus: f64,
    x_minus: f64,
    qubit: QubitOutcome,
    params: &InterferometerParams,
    deph: &DephasingParams,
) -> Result<f64> {
    guard_underflow(qwp_homodyne_joint(x_plus, x_minus, qubit, params, deph))?;
    let mu = displacement_pair(params);
    let term = PhaseInterferenceTerm::qwp_homodyne(params, deph, x_plus, x_minus);
    let half_theta = x_plus * mu.mu_minus - x_minus * mu.mu_plus;
    let a = x_plus * mu.mu_plus + x_minus * mu.mu_minus;
    let x = qubit.sign();
    let cond = 1.0 + x * term.visibility * term.theta.cos();
    Ok(half_theta + x * term.visibility * a * term.theta.sin() / cond)
}

/// QWP joint mass of counts and qubit outcome:
/// p(m, n, X|phi) = P(m; lambda) P(n; lambda)
///                  * (1/2)[1 + X vtilde cos(Theta_{m,n} - vartheta)].
pub fn qwp_counting_joint(
    m: u64,
    n: u64,
    qubit: QubitOutcome,
    params: &InterferometerParams,
    deph: &DephasingParams,
) -> f64 {
    let lambda = arm_rate(params);
    let term = PhaseInterferenceTerm::qwp_counting(params, deph, m, n);
    poisson_pmf(m, lambda).expect("lambda >= 0 by construction")
        * poisson_pmf(n, lambda).expect("lambda >= 0 by construction")
        * 0.5
        * (1.0 + qubit.sign() * term.visibility * term.theta.cos())
}

/// Analytic score of the QWP counting joint mass.
pub fn qwp_counting_dlogpmf_dphi(
    m: u64,
    n: u64,
    qubit: QubitOutcome,
    params: &InterferometerParams,
    deph: &DephasingParams,
) -> Result<f64> {
    guard_underflow(qwp_counting_joint(m, n, qubit, params, deph))?;
    let term = PhaseInterferenceTerm::qwp_counting(params, deph, m, n);
    let k = (m + n) as f64;
    let x = qubit.sign();
    let cond = 1.0 + x * term.visibility * term.theta.cos();
    Ok(-x * term.visibility * k * term.theta.sin() / cond)
}

fn rng_for(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

fn quadrature_noise() -> Normal<f64> {
    Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).expect("fixed std")
}

/// Rejection sampler for the ECS homodyne density. The proposal is the
/// Gaussian envelope at (mu_plus, mu_minus); a draw is kept with probability
/// [1 + v cos(Theta_x)]/(1 + v), which never drops below (1 - v)/(1 + v) and
/// accepts at least half of the proposals on average.
pub fn sample_ecs_homodyne(
    params: &InterferometerParams,
    count: usize,
    seed: u64,
) -> Vec<HomodyneSample> {
    let mut rng = rng_for(seed);
    let mu = displacement_pair(params);
    let v = loss_visibility(params);
    let noise = quadrature_noise();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x_plus = mu.mu_plus + noise.sample(&mut rng);
        let x_minus = mu.mu_minus + noise.sample(&mut rng);
        let fringe = PhaseInterferenceTerm::ecs_homodyne(params, x_plus, x_minus).fringe();
        if rng.gen::<f64>() * (1.0 + v) <= fringe {
            out.push(HomodyneSample { x_plus, x_minus, qubit_x: None });
        }
    }
    out
}

fn poisson_pair(lambda: f64, rng: &mut ChaCha12Rng) -> (u64, u64) {
    if lambda <= 0.0 {
        return (0, 0);
    }
    let dist = Poisson::new(lambda).expect("lambda > 0");
    (dist.sample(rng) as u64, dist.sample(rng) as u64)
}

/// Rejection sampler for the ECS counting mass; double-Poisson proposal,
/// same acceptance ratio as the homodyne sampler.
pub fn sample_ecs_counting(
    params: &InterferometerParams,
    count: usize,
    seed: u64,
) -> Vec<CountSample> {
    let mut rng = rng_for(seed);
    let lambda = arm_rate(params);
    let v = loss_visibility(params);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let (m, n) = poisson_pair(lambda, &mut rng);
        let fringe = PhaseInterferenceTerm::ecs_counting(params, m, n).fringe();
        if rng.gen::<f64>() * (1.0 + v) <= fringe {
            out.push(CountSample { m, n, qubit_x: None });
        }
    }
    out
}

/// Exact two-stage QWP homodyne sampler: the quadrature marginal is the plain
/// Gaussian envelope, then the qubit outcome is Bernoulli with the
/// interference-weighted conditional.
pub fn sample_qwp_homodyne(
    params: &InterferometerParams,
    deph: &DephasingParams,
    count: usize,
    seed: u64,
) -> Vec<HomodyneSample> {
    let mut rng = rng_for(seed);
    let mu = displacement_pair(params);
    let noise = quadrature_noise();
    (0..count)
        .map(|_| {
            let x_plus = mu.mu_plus + noise.sample(&mut rng);
            let x_minus = mu.mu_minus + noise.sample(&mut rng);
            let term = PhaseInterferenceTerm::qwp_homodyne(params, deph, x_plus, x_minus);
            let p_plus = 0.5 * (1.0 + term.visibility * term.theta.cos());
            let qubit = if rng.gen::<f64>() < p_plus { QubitOutcome::Plus } else { QubitOutcome::Minus };
            HomodyneSample { x_plus, x_minus, qubit_x: Some(qubit) }
        })
        .collect()
}

/// Exact two-stage QWP counting sampler.
pub fn sample_qwp_counting(
    params: &InterferometerParams,
    deph: &DephasingParams,
    count: usize,
    seed: u64,
) -> Vec<CountSample> {
    let mut rng = rng_for(seed);
    let lambda = arm_rate(params);
    (0..count)
        .map(|_| {
            let (m, n) = poisson_pair(lambda, &mut rng);
            let term = PhaseInterferenceTerm::qwp_counting(params, deph, m, n);
            let p_plus = 0.5 * (1.0 + term.visibility * term.theta.cos());
            let qubit = if rng.gen::<f64>() < p_plus { QubitOutcome::Plus } else { QubitOutcome::Minus };
            CountSample { m, n, qubit_x: Some(qubit) }
        })
        .collect()
}
