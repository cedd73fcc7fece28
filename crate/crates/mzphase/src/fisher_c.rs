//! Classical Fisher information of the concrete detection schemes, precision
//! sweeps against the quantum and shot-noise benchmarks, and maximum-likelihood
//! estimation on sampled records.
//!
//! The homodyne information integrals are evaluated with Gauss-Hermite rules
//! after recentering the quadratures on the displaced envelope and rotating
//! them so the fringe phase Theta = 2 s u rides a single coordinate u; the
//! orthogonal coordinate enters the integrand only through a quadratic whose
//! Gaussian moments are exact, so the adaptive ladder is one-dimensional and
//! its convergence is uniform in phi. (The unrotated tensor rule stalls near
//! phi = 0 and phi = pi, where one displacement component vanishes and the
//! aliased fringe harmonics lose their orthogonal Gaussian damping.)
//!
//! Fringe ratios of the form v^2 sin^2/(1 + v cos) are split into a bounded
//! trigonometric polynomial, which the quadrature sees, and a Poisson-kernel
//! remainder 1/(1 + v cos Theta) whose Gaussian integral is summed in closed
//! form harmonic by harmonic; near unit visibility the kernel's harmonics
//! decay too slowly for any fixed node budget. In the counting sums the same
//! ratios are rewritten in half-angle form before evaluation; the naive form
//! is 0/0 at fringe zeros when the visibility reaches one.

use rayon::prelude::*;
use serde::ser::Serializer;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{
    sample_ecs_counting, sample_ecs_homodyne, sample_qwp_counting, sample_qwp_homodyne,
    CountSample, HomodyneSample,
};
use crate::quad;
use crate::specfun::poisson_pmf;
use crate::states::{
    alpha_from_mean_photons, ecs_normalization, mean_photons, DephasingParams,
    InterferometerParams, StateFamily,
};

/// Detection scheme, or the quantum bound itself for benchmark rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasurementScheme {
    Homodyne,
    Counting,
    Quantum,
}

impl MeasurementScheme {
    pub fn label(self) -> &'static str {
        match self {
            MeasurementScheme::Homodyne => "homodyne",
            MeasurementScheme::Counting => "counting",
            MeasurementScheme::Quantum => "quantum",
        }
    }
}

impl std::fmt::Display for MeasurementScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for MeasurementScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "homodyne" => Ok(MeasurementScheme::Homodyne),
            "counting" => Ok(MeasurementScheme::Counting),
            "quantum" => Ok(MeasurementScheme::Quantum),
            other => Err(Error::invalid(format!(
                "unknown measurement scheme {other:?} (expected homodyne, counting, or quantum)"
            ))),
        }
    }
}

impl Serialize for MeasurementScheme {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.label())
    }
}

/// Count index beyond which the joint Poisson tail is negligible at double
/// precision: lambda + 12 sqrt(lambda) + 20 covers better than 1e-20 of mass.
pub fn poisson_tail_cutoff(lambda: f64) -> u64 {
    let lambda = lambda.max(0.0);
    (lambda + 12.0 * lambda.sqrt() + 20.0).ceil() as u64
}

const GH_LADDER: [usize; 8] = [64, 128, 256, 512, 1024, 2048, 4096, 8192];
const GH_REL_TOL: f64 = 1e-8;

/// Converging Gauss-Hermite ladder for an integrand against exp(-u^2) along
/// the fringe coordinate. The node count has to scale with the fringe
/// frequency 2 sqrt((1-p)) alpha, hence the deep ladder.
fn gh_converge(f: impl Fn(f64) -> f64, what: &str) -> Result<f64> {
    let mut prev = f64::NAN;
    for &n in &GH_LADDER {
        let rule = quad::GaussHermite::cached(n);
        let val = rule.integrate(&f);
        if prev.is_finite() && (val - prev).abs() <= GH_REL_TOL * val.abs().max(1e-12) {
            return Ok(val);
        }
        prev = val;
    }
    Err(Error::QuadratureNonConvergent(format!(
        "{what}: Gauss-Hermite ladder up to {} nodes did not stabilize",
        GH_LADDER[GH_LADDER.len() - 1]
    )))
}

/// 1 + 2 sum_{k>=1} g^k e^{-a k^2} cos(k c) for |g| < 1, a >= 0: the harmonic
/// expansion of a Poisson-kernel reciprocal integrated against a Gaussian,
/// with every harmonic in closed form. Term magnitudes decrease monotonically,
/// so the first dropped one bounds the tail; the iteration cap is reachable
/// only in the alpha -> 0 corner, where the caller's sqrt(1 - v^2) prefactor
/// shrinks faster than the truncated tail.
fn fringe_harmonic_sum(g: f64, a: f64, c: f64) -> f64 {
    let mut total = 1.0;
    let mut g_pow = 1.0f64;
    for k in 1..=200_000u64 {
        g_pow *= g;
        let damp = (-a * (k * k) as f64).exp();
        total += 2.0 * g_pow * damp * (c * k as f64).cos();
        if g_pow.abs() * damp < 1e-16 {
            break;
        }
    }
    total
}

/// sin^2(Theta) * v^2 / (1 + v cos(Theta)) in half-angle form. The denominator
/// (1 - v) + 2 v cos^2(Theta/2) only vanishes at v = 1 on fringe zeros, where
/// the ratio has the finite limit 2 v sin^2(Theta/2).
fn fringe_ratio(theta: f64, visibility: f64, one_minus_v: f64) -> f64 {
    let (sin_half, cos_half) = (0.5 * theta).sin_cos();
    let denom = one_minus_v + 2.0 * visibility * cos_half * cos_half;
    if denom < 1e-300 {
        2.0 * visibility * sin_half * sin_half
    } else {
        4.0 * visibility * visibility * sin_half * sin_half * cos_half * cos_half / denom
    }
}

/// Classical Fisher information per record of double homodyne detection.
pub fn cfi_homodyne(
    family: StateFamily,
    params: &InterferometerParams,
    deph: &DephasingParams,
) -> Result<f64> {
    // Recentered on (mu_plus, mu_minus) and rotated so the fringe phase is
    // Theta = 2 s u with s^2 = mu_plus^2 + mu_minus^2 = (1-p) alpha^2; the
    // orthogonal coordinate w enters only through A = s^2 + s w, and its
    // Gaussian moments fold A^2 into s^4 + s^2/2 exactly. Nothing left in the
    // integrand depends on phi, which is the flat-precision statement.
    let shift = (1.0 - params.loss_p()) * params.alpha() * params.alpha();
    let s = shift.sqrt();
    let a_sq = shift * shift + 0.5 * shift;
    let p_alpha_sq = params.loss_p() * params.alpha() * params.alpha();
    let sqrt_pi = std::f64::consts::PI.sqrt();
    match family {
        StateFamily::Ecs => {
            let v = (-p_alpha_sq).exp();
            let one_minus_v = -f64::exp_m1(-p_alpha_sq);
            let one_minus_v_sq = one_minus_v * (1.0 + v);
            let n_sq = ecs_normalization(params.alpha()).powi(2);
            let norm = 2.0 * n_sq / sqrt_pi;
            // v^2 sin^2/(1 + v cos) = 1 - v cos - (1 - v^2)/(1 + v cos); the
            // quadrature sees the polynomial part, the Poisson-kernel part is
            // summed in closed form (harmonics r^k against e^{-k^2 s^2}).
            let smooth = gh_converge(
                |u| {
                    let theta = 2.0 * s * u;
                    0.25 * theta * theta * (1.0 + v * theta.cos())
                        + v * shift * theta * theta.sin()
                        + a_sq * (1.0 - v * theta.cos())
                },
                "homodyne information (ECS)",
            )?;
            let kernel = if one_minus_v_sq > 0.0 {
                let r = v / (1.0 + one_minus_v_sq.sqrt());
                one_minus_v_sq.sqrt() * sqrt_pi * fringe_harmonic_sum(-r, s * s, 0.0)
            } else {
                0.0
            };
            Ok(norm * (smooth - a_sq * kernel))
        }
        StateFamily::Qwp => {
            let exponent = p_alpha_sq + deph.chi();
            let v = (-exponent).exp();
            let one_minus_v_sq = -f64::exp_m1(-2.0 * exponent);
            // Both qubit outcomes summed in closed form leave
            // Theta^2/4 + A^2 v^2 sin^2/(1 - v^2 cos^2) with the fringe at
            // Theta + vartheta; 1/(1 - v^2 cos^2) factors into two Poisson
            // kernels, so its harmonics are r^{2k} against e^{-4 k^2 s^2}.
            let smooth = gh_converge(|u| s * s * u * u + a_sq, "homodyne information (QWP)")?;
            let kernel = if one_minus_v_sq > 0.0 {
                let r = v / (1.0 + one_minus_v_sq.sqrt());
                one_minus_v_sq.sqrt()
                    * sqrt_pi
                    * fringe_harmonic_sum(r * r, 4.0 * s * s, 2.0 * deph.vartheta())
            } else {
                0.0
            };
            Ok((smooth - a_sq * kernel) / sqrt_pi)
        }
        StateFamily::Noon(_) => Err(Error::UnsupportedFamily {
            family: family.label(),
            op: "homodyne information",
        }),
    }
}

/// Classical Fisher information per record of photon counting on both outputs.
pub fn cfi_counting(
    family: StateFamily,
    params: &InterferometerParams,
    deph: &DephasingParams,
) -> Result<f64> {
    let lambda = 0.5 * (1.0 - params.loss_p()) * params.alpha() * params.alpha();
    let cutoff = poisson_tail_cutoff(lambda);
    let phi = params.phi();
    let p_alpha_sq = params.loss_p() * params.alpha() * params.alpha();
    let pmf = |j: u64| poisson_pmf(j, lambda).expect("lambda >= 0 by construction");
    match family {
        StateFamily::Ecs => {
            let v = (-p_alpha_sq).exp();
            let one_minus_v = -f64::exp_m1(-p_alpha_sq);
            let n_sq = ecs_normalization(params.alpha()).powi(2);
            let mut total = 0.0;
            for m in 0..=cutoff {
                let pm = pmf(m);
                for n in 0..=cutoff {
                    let k = (m + n) as f64;
                    if k == 0.0 {
                        continue;
                    }
                    let theta = k * phi + m as f64 * std::f64::consts::PI;
                    total += 2.0
                        * n_sq
                        * pm
                        * pmf(n)
                        * k
                        * k
                        * fringe_ratio(theta, v, one_minus_v);
                }
            }
            Ok(total)
        }
        StateFamily::Qwp => {
            let exponent = p_alpha_sq + deph.chi();
            let v = (-exponent).exp();
            let one_minus_v_sq = -f64::exp_m1(-2.0 * exponent);
            let mut total = 0.0;
            for m in 0..=cutoff {
                let pm = pmf(m);
                for n in 0..=cutoff {
                    let k = (m + n) as f64;
                    if k == 0.0 {
                        continue;
                    }
                    let theta = k * phi + m as f64 * std::f64::consts::PI - deph.vartheta();
                    let s = theta.sin();
                    let denom = one_minus_v_sq + v * v * s * s;
                    let cond = if denom < 1e-300 { 1.0 } else { v * v * s * s / denom };
                    total += pm * pmf(n) * k * k * cond;
                }
            }
            Ok(total)
        }
        StateFamily::Noon(_) => Err(Error::UnsupportedFamily {
            family: family.label(),
            op: "counting information",
        }),
    }
}

/// Fisher information per record of the requested scheme; the quantum scheme
/// reports the quantum Fisher information itself.
pub fn cfi(
    family: StateFamily,
    scheme: MeasurementScheme,
    params: &InterferometerParams,
    deph: &DephasingParams,
) -> Result<f64> {
    match scheme {
        MeasurementScheme::Homodyne => cfi_homodyne(family, params, deph),
        MeasurementScheme::Counting => cfi_counting(family, params, deph),
        MeasurementScheme::Quantum => crate::fisher_q::qfi(
            family,
            mean_photons(family, params.alpha()),
            params.loss_p(),
            deph,
        ),
    }
}

/// One evaluated point of a precision sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FisherReport {
    pub phi: f64,
    pub n_bar: f64,
    /// Per-record Fisher information of the scheme (equals `qfi` for the
    /// quantum scheme).
    pub cfi: f64,
    pub qfi: f64,
    /// Cramer-Rao phase uncertainty of the scheme over `repetitions` records;
    /// infinite when the information vanishes.
    pub delta_phi: f64,
    /// Quantum Cramer-Rao limit over the same number of records.
    pub delta_phi_min: f64,
    /// Shot-noise reference 1/sqrt((1 - p) M n_bar).
    pub delta_phi_sql: f64,
    pub repetitions: u64,
}

fn inv_sqrt_or_inf(x: f64) -> f64 {
    if x > 0.0 {
        1.0 / x.sqrt()
    } else {
        f64::INFINITY
    }
}

/// Evaluate the information and the three precision benchmarks at one point.
pub fn fisher_report(
    family: StateFamily,
    scheme: MeasurementScheme,
    params: &InterferometerParams,
    deph: &DephasingParams,
    repetitions: u64,
) -> Result<FisherReport> {
    if repetitions == 0 {
        return Err(Error::invalid("repetitions must be at least 1"));
    }
    let n_bar = mean_photons(family, params.alpha());
    let qfi = crate::fisher_q::qfi(family, n_bar, params.loss_p(), deph)?;
    let cfi_val = match scheme {
        MeasurementScheme::Quantum => qfi,
        _ => cfi(family, scheme, params, deph)?,
    };
    let m = repetitions as f64;
    Ok(FisherReport {
        phi: params.phi(),
        n_bar,
        cfi: cfi_val,
        qfi,
        delta_phi: inv_sqrt_or_inf(m * cfi_val),
        delta_phi_min: inv_sqrt_or_inf(m * qfi),
        delta_phi_sql: inv_sqrt_or_inf((1.0 - params.loss_p()) * m * n_bar),
        repetitions,
    })
}

/// Swept quantity of a precision sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Differential phase at fixed probe amplitude.
    Phi,
    /// Mean photon number at fixed differential phase.
    NBar,
}

impl SweepAxis {
    pub fn label(self) -> &'static str {
        match self {
            SweepAxis::Phi => "phi",
            SweepAxis::NBar => "n_bar",
        }
    }
}

/// Precision sweep over phase or mean photon number.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub family: StateFamily,
    pub scheme: MeasurementScheme,
    pub axis: SweepAxis,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    /// Probe amplitude, fixed along a phase sweep.
    pub alpha: f64,
    /// Differential phase, fixed along a photon-number sweep.
    pub phi: f64,
    pub phi_bar: f64,
    pub loss_p: f64,
    pub deph: DephasingParams,
    pub repetitions: u64,
}

impl SweepSpec {
    fn grid(&self) -> Result<Vec<f64>> {
        if self.points == 0 {
            return Err(Error::invalid("sweep needs at least one point"));
        }
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(Error::invalid("sweep endpoints must be finite"));
        }
        if self.axis == SweepAxis::NBar && (self.start < 0.0 || self.stop < 0.0) {
            return Err(Error::domain("mean photon number must be nonnegative"));
        }
        if self.points == 1 {
            return Ok(vec![self.start]);
        }
        let step = (self.stop - self.start) / (self.points - 1) as f64;
        Ok((0..self.points).map(|i| self.start + i as f64 * step).collect())
    }

    fn point_params(&self, x: f64) -> Result<InterferometerParams> {
        match self.axis {
            SweepAxis::Phi => {
                InterferometerParams::from_differential(self.alpha, x, self.phi_bar, self.loss_p)
            }
            SweepAxis::NBar => {
                let alpha = alpha_from_mean_photons(self.family, x)?;
                InterferometerParams::from_differential(alpha, self.phi, self.phi_bar, self.loss_p)
            }
        }
    }
}

/// Evaluate a sweep in parallel; row order follows the grid.
pub fn precision_sweep(spec: &SweepSpec) -> Result<Vec<FisherReport>> {
    let grid = spec.grid()?;
    grid.par_iter()
        .map(|&x| {
            let params = spec.point_params(x)?;
            fisher_report(spec.family, spec.scheme, &params, &spec.deph, spec.repetitions)
        })
        .collect()
}

/// A batch of measurement records of one kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Samples {
    Homodyne(Vec<HomodyneSample>),
    Counting(Vec<CountSample>),
}

impl Samples {
    pub fn len(&self) -> usize {
        match self {
            Samples::Homodyne(v) => v.len(),
            Samples::Counting(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn qubit_presence(&self) -> (bool, bool) {
        match self {
            Samples::Homodyne(v) => (
                v.iter().any(|s| s.qubit_x.is_some()),
                v.iter().all(|s| s.qubit_x.is_some()),
            ),
            Samples::Counting(v) => (
                v.iter().any(|s| s.qubit_x.is_some()),
                v.iter().all(|s| s.qubit_x.is_some()),
            ),
        }
    }
}

/// Draw a record batch for the given probe and scheme.
pub fn draw_samples(
    family: StateFamily,
    scheme: MeasurementScheme,
    params: &InterferometerParams,
    deph: &DephasingParams,
    count: usize,
    seed: u64,
) -> Result<Samples> {
    match (family, scheme) {
        (StateFamily::Noon(_), _) => {
            Err(Error::UnsupportedFamily { family: family.label(), op: "sampling" })
        }
        (_, MeasurementScheme::Quantum) => {
            Err(Error::invalid("the quantum bound has no measurement records to draw"))
        }
        (StateFamily::Ecs, MeasurementScheme::Homodyne) => {
            Ok(Samples::Homodyne(sample_ecs_homodyne(params, count, seed)))
        }
        (StateFamily::Ecs, MeasurementScheme::Counting) => {
            Ok(Samples::Counting(sample_ecs_counting(params, count, seed)))
        }
        (StateFamily::Qwp, MeasurementScheme::Homodyne) => {
            Ok(Samples::Homodyne(sample_qwp_homodyne(params, deph, count, seed)))
        }
        (StateFamily::Qwp, MeasurementScheme::Counting) => {
            Ok(Samples::Counting(sample_qwp_counting(params, deph, count, seed)))
        }
    }
}

fn check_family_records(family: StateFamily, samples: &Samples) -> Result<()> {
    let (any_qubit, all_qubit) = samples.qubit_presence();
    match family {
        StateFamily::Ecs if any_qubit => {
            Err(Error::invalid("ECS records must not carry qubit outcomes"))
        }
        StateFamily::Qwp if !all_qubit => {
            Err(Error::invalid("QWP records must all carry qubit outcomes"))
        }
        StateFamily::Noon(_) => {
            Err(Error::UnsupportedFamily { family: family.label(), op: "likelihood" })
        }
        _ => Ok(()),
    }
}

fn log_likelihood_unchecked(
    family: StateFamily,
    samples: &Samples,
    base: &InterferometerParams,
    phi: f64,
    deph: &DephasingParams,
) -> f64 {
    let params = base.with_phi(phi);
    match (family, samples) {
        (StateFamily::Ecs, Samples::Homodyne(v)) => v
            .iter()
            .map(|s| crate::measure::ecs_homodyne_pdf(s.x_plus, s.x_minus, &params).ln())
            .sum(),
        (StateFamily::Ecs, Samples::Counting(v)) => {
            v.iter().map(|s| crate::measure::ecs_counting_pmf(s.m, s.n, &params).ln()).sum()
        }
        (StateFamily::Qwp, Samples::Homodyne(v)) => v
            .iter()
            .map(|s| {
                crate::measure::qwp_homodyne_joint(
                    s.x_plus,
                    s.x_minus,
                    s.qubit_x.expect("validated"),
                    &params,
                    deph,
                )
                .ln()
            })
            .sum(),
        (StateFamily::Qwp, Samples::Counting(v)) => v
            .iter()
            .map(|s| {
                crate::measure::qwp_counting_joint(
                    s.m,
                    s.n,
                    s.qubit_x.expect("validated"),
                    &params,
                    deph,
                )
                .ln()
            })
            .sum(),
        (StateFamily::Noon(_), _) => unreachable!("rejected by check_family_records"),
    }
}

/// Total log-likelihood of a record batch at trial phase `phi`, holding the
/// other probe parameters at `base`. Returns negative infinity when any
/// record has zero density at `phi`.
pub fn log_likelihood(
    family: StateFamily,
    samples: &Samples,
    base: &InterferometerParams,
    phi: f64,
    deph: &DephasingParams,
) -> Result<f64> {
    check_family_records(family, samples)?;
    Ok(log_likelihood_unchecked(family, samples, base, phi, deph))
}

/// Search controls for the likelihood maximizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleOptions {
    /// Half-open search window [lo, hi). The window acts as the prior: for
    /// models that are symmetric in the phase (photon counting without a
    /// qubit reference) an origin-symmetric window leaves the sign of the
    /// estimate to chance.
    pub window: (f64, f64),
    /// Points of the coarse scan that brackets the global maximum.
    pub coarse_points: usize,
    /// Width at which the golden-section refinement stops.
    pub tol: f64,
}

impl Default for MleOptions {
    fn default() -> Self {
        MleOptions {
            window: (-std::f64::consts::PI, std::f64::consts::PI),
            coarse_points: 64,
            tol: 1e-8,
        }
    }
}

/// Result of the likelihood maximization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MleResult {
    pub phi_hat: f64,
    pub log_likelihood: f64,
    /// Spacing of the coarse scan that located the bracket.
    pub grid_resolution: f64,
    /// The golden-section stage produced the estimate (false when the best
    /// coarse point already beat everything the refinement visited).
    pub refined: bool,
    /// Another coarse local maximum came within one nat of the best; the
    /// estimate may have picked the wrong branch.
    pub multimodal: bool,
    /// The estimate sits at the edge of the search window.
    pub at_boundary: bool,
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Maximum-likelihood phase estimate: coarse scan over the window, then
/// golden-section refinement around the best coarse point.
pub fn mle(
    family: StateFamily,
    samples: &Samples,
    base: &InterferometerParams,
    deph: &DephasingParams,
    opts: &MleOptions,
) -> Result<MleResult> {
    check_family_records(family, samples)?;
    if samples.is_empty() {
        return Err(Error::invalid("cannot estimate a phase from zero records"));
    }
    let (lo, hi) = opts.window;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::invalid("search window must be a finite interval with lo < hi"));
    }
    if hi - lo > std::f64::consts::TAU + 1e-12 {
        return Err(Error::invalid("search window must not be wider than one 2 pi branch"));
    }
    if opts.coarse_points < 32 {
        return Err(Error::invalid("coarse scan needs at least 32 points"));
    }
    if !(opts.tol > 0.0 && opts.tol.is_finite()) {
        return Err(Error::invalid("refinement tolerance must be positive"));
    }

    let ll = |phi: f64| log_likelihood_unchecked(family, samples, base, phi, deph);
    let n = opts.coarse_points;
    let step = (hi - lo) / n as f64;
    let grid: Vec<f64> = (0..n).map(|i| lo + i as f64 * step).collect();
    let lls: Vec<f64> = grid.iter().map(|&phi| ll(phi)).collect();

    let best = (0..n)
        .max_by(|&i, &j| lls[i].partial_cmp(&lls[j]).expect("log-likelihoods never NaN"))
        .expect("grid is nonempty");
    if !lls[best].is_finite() {
        return Err(Error::DensityUnderflow(0.0));
    }

    // Local maxima of the coarse scan, for branch-ambiguity detection.
    let mut peaks: Vec<(usize, f64)> = (0..n)
        .filter(|&i| {
            let left_ok = i == 0 || lls[i] >= lls[i - 1];
            let right_ok = i == n - 1 || lls[i] >= lls[i + 1];
            left_ok && right_ok && lls[i].is_finite()
        })
        .map(|i| (i, lls[i]))
        .collect();
    peaks.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite"));
    let multimodal = peaks
        .iter()
        .skip(1)
        .any(|&(i, v)| i.abs_diff(peaks[0].0) > 1 && v >= peaks[0].1 - 1.0);

    // Golden-section refinement on the bracket around the best coarse point.
    let mut a = (grid[best] - step).max(lo);
    let mut b = (grid[best] + step).min(hi);
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let mut fc = ll(c);
    let mut fd = ll(d);
    while b - a > opts.tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = ll(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = ll(d);
        }
    }
    let mut phi_hat = 0.5 * (a + b);
    let mut ll_hat = ll(phi_hat);
    let mut refined = true;
    if lls[best] > ll_hat {
        phi_hat = grid[best];
        ll_hat = lls[best];
        refined = false;
    }

    let at_boundary = phi_hat - lo <= 2.0 * opts.tol || hi - phi_hat <= 2.0 * opts.tol;
    Ok(MleResult {
        phi_hat,
        log_likelihood: ll_hat,
        grid_resolution: step,
        refined,
        multimodal,
        at_boundary,
    })
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of campaign trial `index`, derived from the master seed so results do
/// not depend on how trials are scheduled across threads.
pub fn campaign_trial_seed(master: u64, index: usize) -> u64 {
    splitmix64(master ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Repeated-estimation campaign: many independent record batches at the same
/// true phase, each run through [`mle`].
#[derive(Debug, Clone)]
pub struct CampaignSpec {
    pub family: StateFamily,
    pub scheme: MeasurementScheme,
    /// Probe settings; `params.phi()` is the true phase of every trial.
    pub params: InterferometerParams,
    pub deph: DephasingParams,
    pub samples_per_trial: usize,
    pub trials: usize,
    pub master_seed: u64,
    pub mle: MleOptions,
}

/// Aggregate outcome of an estimation campaign.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignSummary {
    pub trials: usize,
    pub samples_per_trial: usize,
    pub true_phi: f64,
    pub mean_estimate: f64,
    pub bias: f64,
    /// Sample standard deviation of the estimates (n - 1 normalization).
    pub std_dev: f64,
    pub rmse: f64,
    /// Per-record Fisher information of the scheme at the true phase.
    pub cfi: f64,
    /// Cramer-Rao floor 1/sqrt(samples_per_trial * cfi) for one trial.
    pub crb_std: f64,
    /// std_dev / crb_std; approaches 1 from above for an efficient estimator.
    pub crb_ratio: f64,
    pub multimodal_trials: usize,
    pub boundary_trials: usize,
    pub estimates: Vec<f64>,
}

/// Run the campaign. Trials are independent and deterministically seeded from
/// the master seed, so the outcome is reproducible regardless of thread count.
pub fn mle_campaign(spec: &CampaignSpec) -> Result<CampaignSummary> {
    if spec.trials < 100 {
        return Err(Error::invalid("a campaign needs at least 100 trials"));
    }
    if spec.samples_per_trial == 0 {
        return Err(Error::invalid("each trial needs at least one record"));
    }
    if spec.scheme == MeasurementScheme::Quantum {
        return Err(Error::invalid("the quantum bound has no measurement records to draw"));
    }

    let cfi_true = cfi(spec.family, spec.scheme, &spec.params, &spec.deph)?;
    let results: Vec<MleResult> = (0..spec.trials)
        .into_par_iter()
        .map(|i| {
            let seed = campaign_trial_seed(spec.master_seed, i);
            let samples = draw_samples(
                spec.family,
                spec.scheme,
                &spec.params,
                &spec.deph,
                spec.samples_per_trial,
                seed,
            )?;
            mle(spec.family, &samples, &spec.params, &spec.deph, &spec.mle)
        })
        .collect::<Result<Vec<_>>>()?;

    let t = spec.trials as f64;
    let true_phi = spec.params.phi();
    let estimates: Vec<f64> = results.iter().map(|r| r.phi_hat).collect();
    let mean = estimates.iter().sum::<f64>() / t;
    let var = estimates.iter().map(|&e| (e - mean) * (e - mean)).sum::<f64>() / (t - 1.0);
    let std_dev = var.sqrt();
    let rmse =
        (estimates.iter().map(|&e| (e - true_phi) * (e - true_phi)).sum::<f64>() / t).sqrt();
    let m = spec.samples_per_trial as f64;
    let crb_std = inv_sqrt_or_inf(m * cfi_true);
    let crb_ratio = if cfi_true > 0.0 { std_dev * (m * cfi_true).sqrt() } else { f64::INFINITY };

    Ok(CampaignSummary {
        trials: spec.trials,
        samples_per_trial: spec.samples_per_trial,
        true_phi,
        mean_estimate: mean,
        bias: mean - true_phi,
        std_dev,
        rmse,
        cfi: cfi_true,
        crb_std,
        crb_ratio,
        multimodal_trials: results.iter().filter(|r| r.multimodal).count(),
        boundary_trials: results.iter().filter(|r| r.at_boundary).count(),
        estimates,
    })
}
