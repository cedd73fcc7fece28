//! Probe-state parameterizations and exact state-level quantities.
//!
//! All routines take the interferometer convention where the two arms carry
//! phases phi1 and phi2; the estimation target is the differential phase
//! phi = phi1 - phi2 and phi_bar = (phi1 + phi2) / 2 is held fixed. Photon
//! loss is a single parameter p applied symmetrically to both arms.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::specfun::lambert_w0;

/// Probe families covered by the toolkit. `Noon` carries its photon number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StateFamily {
    Ecs,
    Qwp,
    Noon(u32),
}

impl StateFamily {
    pub fn label(&self) -> &'static str {
        match self {
            StateFamily::Ecs => "ECS",
            StateFamily::Qwp => "QWP",
            StateFamily::Noon(_) => "N00N",
        }
    }
}

impl std::fmt::Display for StateFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StateFamily::Noon(n) => write!(f, "N00N({n})"),
            other => f.write_str(other.label()),
        }
    }
}

/// Arm phases, coherent amplitude and symmetric photon loss of one
/// interferometer configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InterferometerParams {
    alpha: f64,
    phi1: f64,
    phi2: f64,
    loss_p: f64,
}

impl InterferometerParams {
    pub fn new(alpha: f64, phi1: f64, phi2: f64, loss_p: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::invalid(format!("alpha must be finite and >= 0, got {alpha}")));
        }
        if !phi1.is_finite() || !phi2.is_finite() {
            return Err(Error::invalid("arm phases must be finite".to_string()));
        }
        if !loss_p.is_finite() || !(0.0..=1.0).contains(&loss_p) {
            return Err(Error::invalid(format!("loss_p must lie in [0, 1], got {loss_p}")));
        }
        Ok(InterferometerParams { alpha, phi1, phi2, loss_p })
    }

    /// Build from the differential/common decomposition:
    /// phi1 = phi_bar + phi/2, phi2 = phi_bar - phi/2.
    pub fn from_differential(alpha: f64, phi: f64, phi_bar: f64, loss_p: f64) -> Result<Self> {
        Self::new(alpha, phi_bar + 0.5 * phi, phi_bar - 0.5 * phi, loss_p)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn phi1(&self) -> f64 {
        self.phi1
    }

    pub fn phi2(&self) -> f64 {
        self.phi2
    }

    pub fn loss_p(&self) -> f64 {
        self.loss_p
    }

    /// Differential phase phi1 - phi2, the estimation target.
    pub fn phi(&self) -> f64 {
        self.phi1 - self.phi2
    }

    /// Common phase (phi1 + phi2) / 2.
    pub fn phi_bar(&self) -> f64 {
        0.5 * (self.phi1 + self.phi2)
    }

    /// Same alpha, loss and common phase; new differential phase.
    pub fn with_phi(&self, phi: f64) -> Self {
        let phi_bar = self.phi_bar();
        InterferometerParams {
            alpha: self.alpha,
            phi1: phi_bar + 0.5 * phi,
            phi2: phi_bar - 0.5 * phi,
            loss_p: self.loss_p,
        }
    }

    /// Same phases and loss; new coherent amplitude.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(alpha, self.phi1, self.phi2, self.loss_p)
    }
}

/// Qubit dephasing strength chi >= 0 and deterministic phase offset vartheta.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DephasingParams {
    chi: f64,
    vartheta: f64,
}

impl DephasingParams {
    pub const NONE: DephasingParams = DephasingParams { chi: 0.0, vartheta: 0.0 };

    pub fn new(chi: f64, vartheta: f64) -> Result<Self> {
        if !chi.is_finite() || chi < 0.0 {
            return Err(Error::invalid(format!("chi must be finite and >= 0, got {chi}")));
        }
        if !vartheta.is_finite() {
            return Err(Error::invalid("vartheta must be finite".to_string()));
        }
        Ok(DephasingParams { chi, vartheta })
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    pub fn vartheta(&self) -> f64 {
        self.vartheta
    }
}

impl Default for DephasingParams {
    fn default() -> Self {
        DephasingParams::NONE
    }
}

/// Normalization constant N_alpha = [2 (1 + exp(-alpha^2))]^(-1/2) of the
/// entangled coherent state.
pub fn ecs_normalization(alpha: f64) -> f64 {
    let a2 = alpha * alpha;
    1.0 / (2.0 * (1.0 + (-a2).exp())).sqrt()
}

/// Mean total photon number of the lossless probe.
pub fn mean_photons(family: StateFamily, alpha: f64) -> f64 {
    let a2 = alpha * alpha;
    match family {
        StateFamily::Ecs => a2 / (1.0 + (-a2).exp()),
        StateFamily::Qwp => a2,
        StateFamily::Noon(n) => f64::from(n),
    }
}

/// Invert `mean_photons` for alpha^2. For the ECS the inversion is
/// alpha^2 = n + W(n e^(-n)); for N00N there is no amplitude to solve for.
pub fn alpha_sq_from_mean_photons(family: StateFamily, n_bar: f64) -> Result<f64> {
    if !n_bar.is_finite() || n_bar < 0.0 {
        return Err(Error::domain(format!("n_bar must be finite and >= 0, got {n_bar}")));
    }
    match family {
        StateFamily::Ecs => Ok(n_bar + lambert_w0(n_bar * (-n_bar).exp())?),
        StateFamily::Qwp => Ok(n_bar),
        StateFamily::Noon(_) => Err(Error::UnsupportedFamily {
            family: "N00N",
            op: "alpha_sq_from_mean_photons",
        }),
    }
}

/// Convenience wrapper returning alpha itself.
pub fn alpha_from_mean_photons(family: StateFamily, n_bar: f64) -> Result<f64> {
    Ok(alpha_sq_from_mean_photons(family, n_bar)?.sqrt())
}

/// Homodyne displacement pair of the post-loss probe:
/// mu_plus = sqrt(1-p) alpha sin(phi/2), mu_minus = sqrt(1-p) alpha cos(phi/2).
/// They satisfy mu_plus^2 + mu_minus^2 = (1-p) alpha^2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DisplacementPair {
    pub mu_plus: f64,
    pub mu_minus: f64,
}

pub fn displacement_pair(params: &InterferometerParams) -> DisplacementPair {
    let scale = (1.0 - params.loss_p()).sqrt() * params.alpha();
    let half = 0.5 * params.phi();
    DisplacementPair {
        mu_plus: scale * half.sin(),
        mu_minus: scale * half.cos(),
    }
}

/// Spin label of the which-path qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spin {
    Up,
    Down,
}

/// Two-mode (optionally qubit-tagged) state vector in a truncated Fock basis.
///
/// Amplitudes are stored densely as [spin][n1][n2] with n1, n2 <= cutoff.
#[derive(Debug, Clone)]
pub struct FockState {
    cutoff: usize,
    has_qubit: bool,
    amps: Vec<Complex64>,
}

impl FockState {
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn has_qubit(&self) -> bool {
        self.has_qubit
    }

    fn dim(&self) -> usize {
        self.cutoff + 1
    }

    fn index(&self, spin: Option<Spin>, n1: usize, n2: usize) -> usize {
        let q = match (self.has_qubit, spin) {
            (false, None) => 0,
            (true, Some(Spin::Up)) => 0,
            (true, Some(Spin::Down)) => 1,
            _ => panic!("spin label must be given exactly for qubit-tagged states"),
        };
        (q * self.dim() + n1) * self.dim() + n2
    }

    pub fn amplitude(&self, spin: Option<Spin>, n1: usize, n2: usize) -> Complex64 {
        self.amps[self.index(spin, n1, n2)]
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// <n1 + n2> over the stored amplitudes.
    pub fn mean_total_photons(&self) -> f64 {
        self.expect(|n1, n2| (n1 + n2) as f64)
    }

    /// Variance of J3 = (n1 - n2) / 2; four times this is the quantum Fisher
    /// information of the pure probe.
    pub fn j3_variance(&self) -> f64 {
        let j = |n1: usize, n2: usize| 0.5 * (n1 as f64 - n2 as f64);
        let mean = self.expect(j);
        let second = self.expect(|n1, n2| j(n1, n2) * j(n1, n2));
        second - mean * mean
    }

    fn expect(&self, f: impl Fn(usize, usize) -> f64) -> f64 {
        let dim = self.dim();
        let mut acc = 0.0;
        for (i, a) in self.amps.iter().enumerate() {
            let n2 = i % dim;
            let n1 = (i / dim) % dim;
            acc += a.norm_sqr() * f(n1, n2);
        }
        acc
    }
}

/// Coherent amplitudes c_n = e^(-|beta|^2/2) beta^n / sqrt(n!) up to `cutoff`.
pub(crate) fn coherent_amps(beta: Complex64, cutoff: usize) -> Vec<Complex64> {
    let mut amps = Vec::with_capacity(cutoff + 1);
    let mut c = Complex64::new((-0.5 * beta.norm_sqr()).exp(), 0.0);
    amps.push(c);
    for n in 1..=cutoff {
        c *= beta / (n as f64).sqrt();
        amps.push(c);
    }
    amps
}

/// Poisson tail mass above `cutoff` for mean `lambda`; the weight a truncated
/// coherent state with |beta|^2 = lambda neglects.
pub(crate) fn poisson_tail(lambda: f64, cutoff: usize) -> f64 {
    let mut term = (-lambda).exp();
    let mut cdf = term;
    for n in 1..=cutoff {
        term *= lambda / n as f64;
        cdf += term;
    }
    (1.0 - cdf).max(0.0)
}

const TRUNCATION_LIMIT: f64 = 1e-9;

/// Normalized Fock-basis amplitudes of the pure probe with arm phases applied.
///
/// This is the state before the loss channel; `loss_p` in `params` does not
/// enter (loss produces a mixed state, handled by the density-matrix oracle).
/// The cutoff must keep the neglected coherent weight below 1e-9; the
/// heuristic cutoff >= alpha^2 + 10 alpha + 10 always satisfies that.
pub fn fock_truncated_state(
    family: StateFamily,
    params: &InterferometerParams,
    cutoff: usize,
) -> Result<FockState> {
    if cutoff == 0 {
        return Err(Error::invalid("cutoff must be >= 1".to_string()));
    }
    let alpha = params.alpha();
    let tail = poisson_tail(alpha * alpha, cutoff);
    if tail > TRUNCATION_LIMIT {
        return Err(Error::Truncation { cutoff, weight: tail, limit: TRUNCATION_LIMIT });
    }
    let beta1 = Complex64::from_polar(alpha, params.phi1());
    let beta2 = Complex64::from_polar(alpha, params.phi2());
    let c1 = coherent_amps(beta1, cutoff);
    let c2 = coherent_amps(beta2, cutoff);
    let dim = cutoff + 1;

    let mut state = match family {
        StateFamily::Ecs => {
            let mut amps = vec![Complex64::new(0.0, 0.0); dim * dim];
            let n_alpha = ecs_normalization(alpha);
            for n in 0..=cutoff {
                amps[n * dim] += n_alpha * c1[n]; // |n, 0>
                amps[n] += n_alpha * c2[n]; // |0, n>
            }
            FockState { cutoff, has_qubit: false, amps }
        }
        StateFamily::Qwp => {
            let mut amps = vec![Complex64::new(0.0, 0.0); 2 * dim * dim];
            let w = std::f64::consts::FRAC_1_SQRT_2;
            for n in 0..=cutoff {
                amps[n * dim] = w * c1[n]; // |up>|n, 0>
                amps[dim * dim + n] = w * c2[n]; // |down>|0, n>
            }
            FockState { cutoff, has_qubit: true, amps }
        }
        StateFamily::Noon(_) => {
            return Err(Error::UnsupportedFamily { family: "N00N", op: "fock_truncated_state" })
        }
    };

    let norm = state.norm();
    for a in &mut state.amps {
        *a /= norm;
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn params_accessors_recover_differential_split() {
        let p = InterferometerParams::from_differential(2.0, 0.7, 0.3, 0.1).unwrap();
        assert_relative_eq!(p.phi1(), 0.3 + 0.35, epsilon = 1e-15);
        assert_relative_eq!(p.phi2(), 0.3 - 0.35, epsilon = 1e-15);
        assert_relative_eq!(p.phi(), 0.7, epsilon = 1e-15);
        assert_relative_eq!(p.phi_bar(), 0.3, epsilon = 1e-15);

        let q = p.with_phi(-1.2);
        assert_relative_eq!(q.phi(), -1.2, epsilon = 1e-15);
        assert_relative_eq!(q.phi_bar(), 0.3, epsilon = 1e-15);
    }

    #[test]
    fn params_reject_out_of_range() {
        assert!(InterferometerParams::new(-1.0, 0.0, 0.0, 0.0).is_err());
        assert!(InterferometerParams::new(1.0, 0.0, 0.0, 1.5).is_err());
        assert!(InterferometerParams::new(1.0, f64::NAN, 0.0, 0.0).is_err());
        assert!(DephasingParams::new(-0.1, 0.0).is_err());
    }

    #[test]
    fn normalization_limits() {
        assert_relative_eq!(ecs_normalization(0.0), 0.5, epsilon = 1e-15);
        // Large alpha: overlap dies, N -> 1/sqrt(2).
        assert_relative_eq!(
            ecs_normalization(8.0),
            std::f64::consts::FRAC_1_SQRT_2,
            max_relative = 1e-12
        );
        let n = ecs_normalization(1.3);
        assert!(n > 0.5 && n < std::f64::consts::FRAC_1_SQRT_2);
    }

    #[test]
    fn mean_photons_closed_forms() {
        assert_relative_eq!(mean_photons(StateFamily::Qwp, 2.0), 4.0, epsilon = 1e-15);
        assert_eq!(mean_photons(StateFamily::Ecs, 0.0), 0.0);
        assert_relative_eq!(
            mean_photons(StateFamily::Ecs, 3.0),
            9.0 / (1.0 + (-9.0f64).exp()),
            max_relative = 1e-15
        );
        assert_eq!(mean_photons(StateFamily::Noon(7), 0.0), 7.0);
    }

    #[test]
    fn mean_photon_inversion_round_trips() {
        for &n_bar in &[0.0, 0.1, 1.0, 5.0, 10.0, 50.0] {
            for family in [StateFamily::Ecs, StateFamily::Qwp] {
                let a2 = alpha_sq_from_mean_photons(family, n_bar).unwrap();
                let back = mean_photons(family, a2.sqrt());
                assert!(
                    (back - n_bar).abs() <= 1e-10 * n_bar.max(1.0),
                    "round trip {family}: {n_bar} -> {a2} -> {back}"
                );
            }
        }
        assert!(matches!(
            alpha_sq_from_mean_photons(StateFamily::Noon(3), 3.0),
            Err(Error::UnsupportedFamily { .. })
        ));
    }

    #[test]
    fn displacements_at_reference_points() {
        let p = InterferometerParams::from_differential(2.0, 0.0, 0.0, 0.0).unwrap();
        let d = displacement_pair(&p);
        assert_relative_eq!(d.mu_plus, 0.0, epsilon = 1e-15);
        assert_relative_eq!(d.mu_minus, 2.0, epsilon = 1e-15);

        let p = InterferometerParams::from_differential(2.0, std::f64::consts::PI, 0.0, 0.0).unwrap();
        let d = displacement_pair(&p);
        assert_relative_eq!(d.mu_plus, 2.0, epsilon = 1e-15);
        assert!(d.mu_minus.abs() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn displacement_pythagoras(
            alpha in 0.0f64..6.0,
            phi in -10.0f64..10.0,
            phi_bar in -3.0f64..3.0,
            loss in 0.0f64..1.0,
        ) {
            let p = InterferometerParams::from_differential(alpha, phi, phi_bar, loss).unwrap();
            let d = displacement_pair(&p);
            let target = (1.0 - loss) * alpha * alpha;
            prop_assert!((d.mu_plus.powi(2) + d.mu_minus.powi(2) - target).abs() <= 1e-12 * target.max(1.0));
        }
    }

    #[test]
    fn fock_state_vacuum_limit() {
        let p = InterferometerParams::new(0.0, 0.4, -0.2, 0.0).unwrap();
        let s = fock_truncated_state(StateFamily::Ecs, &p, 4).unwrap();
        assert_relative_eq!(s.amplitude(None, 0, 0).norm(), 1.0, epsilon = 1e-12);
        assert!(s.mean_total_photons() < 1e-12);
    }

    #[test]
    fn fock_state_mean_photons_match_closed_form() {
        let p = InterferometerParams::new(2.0, 0.0, 0.0, 0.0).unwrap();
        let s = fock_truncated_state(StateFamily::Ecs, &p, 30).unwrap();
        assert_relative_eq!(s.norm(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(
            s.mean_total_photons(),
            4.0 / (1.0 + (-4.0f64).exp()),
            max_relative = 1e-9
        );

        let s = fock_truncated_state(StateFamily::Qwp, &p, 30).unwrap();
        assert_relative_eq!(s.norm(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(s.mean_total_photons(), 4.0, max_relative = 1e-9);
    }

    #[test]
    fn fock_state_variance_reproduces_pure_state_information() {
        // 4 Var(J3) against the lossless closed forms, both families.
        for &alpha in &[0.5f64, 1.0, 2.0, 3.0] {
            let cutoff = (alpha * alpha + 10.0 * alpha + 10.0).ceil() as usize;
            let p = InterferometerParams::from_differential(alpha, 0.9, 0.1, 0.0).unwrap();
            let n_bar = mean_photons(StateFamily::Ecs, alpha);
            let w = lambert_w0(n_bar * (-n_bar).exp()).unwrap();
            let expected_ecs = n_bar * n_bar + (1.0 + w) * n_bar;
            let s = fock_truncated_state(StateFamily::Ecs, &p, cutoff).unwrap();
            assert_relative_eq!(4.0 * s.j3_variance(), expected_ecs, max_relative = 1e-8);

            let n_bar = alpha * alpha;
            let s = fock_truncated_state(StateFamily::Qwp, &p, cutoff).unwrap();
            assert_relative_eq!(4.0 * s.j3_variance(), n_bar * n_bar + n_bar, max_relative = 1e-8);
        }
    }

    #[test]
    fn fock_state_rejects_small_cutoff() {
        let p = InterferometerParams::new(3.0, 0.0, 0.0, 0.0).unwrap();
        match fock_truncated_state(StateFamily::Ecs, &p, 5) {
            Err(Error::Truncation { weight, .. }) => assert!(weight > 1e-9),
            other => panic!("expected truncation error, got {other:?}"),
        }
    }
}
