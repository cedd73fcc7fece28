//! Quantum Fisher information of the probe families, with and without noise.
//!
//! The closed forms are cheap scalar expressions in the mean photon number.
//! `qfi_numeric_oracle` recomputes the same quantities from first principles:
//! it assembles the post-loss density matrix in a truncated Fock basis,
//! diagonalizes it, and evaluates the spectral double sum
//!
//!   I_Q = 2 sum_{k,j} (l_k - l_j)^2 / (l_k + l_j) |<k| J3 |j>|^2
//!
//! including the rank-deficient sector through completeness. The two routes
//! share no code beyond the state parameterization, so their agreement is a
//! real cross-check rather than an identity.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::specfun::lambert_w0;
use crate::states::{
    coherent_amps, ecs_normalization, poisson_tail, DephasingParams, InterferometerParams,
    StateFamily,
};

/// Lossless ECS information n^2 + [1 + W(n e^-n)] n.
pub fn qfi_ecs_lossless(n_bar: f64) -> Result<f64> {
    let w = lambert_w0(n_bar * (-n_bar).exp())?;
    Ok(n_bar * n_bar + (1.0 + w) * n_bar)
}

/// Lossless qubit-which-path information n^2 + n.
pub fn qfi_qwp_lossless(n_bar: f64) -> f64 {
    n_bar * n_bar + n_bar
}

/// N00N-state information N^2.
pub fn qfi_noon(n: u32) -> f64 {
    f64::from(n) * f64::from(n)
}

/// ECS information under symmetric photon loss p.
pub fn qfi_ecs_lossy(n_bar: f64, loss_p: f64) -> Result<f64> {
    check_loss(loss_p)?;
    let w = lambert_w0(n_bar * (-n_bar).exp())?;
    let q = 1.0 - loss_p;
    let coherent_part = q * q * n_bar * n_bar * (-2.0 * loss_p * (n_bar + w)).exp();
    let shot_part = q * n_bar * (1.0 + q * w);
    Ok(coherent_part + shot_part)
}

/// QWP information under photon loss p and qubit dephasing chi. The offset
/// vartheta is a deterministic rotation and drops out.
pub fn qfi_qwp_lossy(n_bar: f64, loss_p: f64, deph: &DephasingParams) -> Result<f64> {
    check_loss(loss_p)?;
    let q = 1.0 - loss_p;
    let vis_sq = (-2.0 * loss_p * n_bar - 2.0 * deph.chi()).exp();
    Ok(vis_sq * q * q * n_bar * n_bar + q * n_bar)
}

/// Family dispatcher used by sweeps. N00N is covered lossless only.
pub fn qfi(family: StateFamily, n_bar: f64, loss_p: f64, deph: &DephasingParams) -> Result<f64> {
    if !n_bar.is_finite() || n_bar < 0.0 {
        return Err(Error::domain(format!("n_bar must be finite and >= 0, got {n_bar}")));
    }
    match family {
        StateFamily::Ecs => qfi_ecs_lossy(n_bar, loss_p),
        StateFamily::Qwp => qfi_qwp_lossy(n_bar, loss_p, deph),
        StateFamily::Noon(n) => {
            check_loss(loss_p)?;
            if loss_p != 0.0 {
                return Err(Error::UnsupportedFamily { family: "N00N", op: "qfi with loss" });
            }
            Ok(qfi_noon(n))
        }
    }
}

fn check_loss(loss_p: f64) -> Result<()> {
    if !loss_p.is_finite() || !(0.0..=1.0).contains(&loss_p) {
        return Err(Error::invalid(format!("loss_p must lie in [0, 1], got {loss_p}")));
    }
    Ok(())
}

/// Eigenvalues below this (after trace normalization) count as rank-deficient.
const SUPPORT_EPS: f64 = 1e-12;
/// Pairs with l_k + l_j below this are dropped from the double sum.
const PAIR_EPS: f64 = 1e-14;
const TRUNCATION_LIMIT: f64 = 1e-9;

/// First-principles QFI from the truncated post-loss density matrix.
///
/// Both probe branches live in span{|n,0>} + span{|0,m>} (tensored with the
/// qubit for QWP), and J3 is diagonal in the Fock basis, so the whole problem
/// closes in that subspace; restricting to it is exact and keeps the
/// diagonalization small enough to run a parameter grid in seconds.
///
/// For the ECS the dephasing parameters do not enter: chi and vartheta act on
/// the which-path qubit, which the ECS does not carry.
pub fn qfi_numeric_oracle(
    family: StateFamily,
    params: &InterferometerParams,
    deph: &DephasingParams,
    cutoff: usize,
) -> Result<f64> {
    if cutoff == 0 {
        return Err(Error::invalid("cutoff must be >= 1".to_string()));
    }
    if let StateFamily::Noon(_) = family {
        return Err(Error::UnsupportedFamily { family: family.label(), op: "numeric oracle" });
    }
    let alpha = params.alpha();
    let p = params.loss_p();
    let q = 1.0 - p;
    let tail = poisson_tail(q * alpha * alpha, cutoff);
    if tail > TRUNCATION_LIMIT {
        return Err(Error::Truncation { cutoff, weight: tail, limit: TRUNCATION_LIMIT });
    }

    // Post-loss branch amplitudes, renormalized within the cutoff.
    let beta1 = Complex64::from_polar(q.sqrt() * alpha, params.phi1());
    let beta2 = Complex64::from_polar(q.sqrt() * alpha, params.phi2());
    let mut branch1 = coherent_amps(beta1, cutoff);
    let mut branch2 = coherent_amps(beta2, cutoff);
    for branch in [&mut branch1, &mut branch2] {
        let norm = branch.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        for c in branch.iter_mut() {
            *c /= norm;
        }
    }

    // Subspace basis and the diagonal of J3 on it.
    let (rho, j3) = match family {
        StateFamily::Ecs => {
            // 0: |0,0>, 1..=K: |n,0>, K+1..=2K: |0,m>.
            let dim = 2 * cutoff + 1;
            let mut a = vec![Complex64::new(0.0, 0.0); dim];
            let mut b = vec![Complex64::new(0.0, 0.0); dim];
            let mut j3 = vec![0.0f64; dim];
            a[..=cutoff].copy_from_slice(&branch1);
            b[0] = branch2[0];
            for m in 1..=cutoff {
                b[cutoff + m] = branch2[m];
                j3[cutoff + m] = -0.5 * m as f64;
            }
            for (n, j) in j3.iter_mut().enumerate().take(cutoff + 1) {
                *j = 0.5 * n as f64;
            }
            let kappa = (-p * alpha * alpha).exp();
            let n_sq = ecs_normalization(alpha).powi(2);
            let mut rho = DMatrix::<Complex64>::zeros(dim, dim);
            for i in 0..dim {
                for j in 0..dim {
                    rho[(i, j)] = n_sq
                        * (a[i] * a[j].conj()
                            + b[i] * b[j].conj()
                            + kappa * (a[i] * b[j].conj() + b[i] * a[j].conj()));
                }
            }
            (rho, j3)
        }
        StateFamily::Qwp => {
            // 0..=K: |up>|n,0>, K+1..=2K+1: |down>|0,m>.
            let dim = 2 * cutoff + 2;
            let mut j3 = vec![0.0f64; dim];
            for n in 0..=cutoff {
                j3[n] = 0.5 * n as f64;
                j3[cutoff + 1 + n] = -0.5 * n as f64;
            }
            let kappa = (-p * alpha * alpha - deph.chi()).exp();
            let phase = Complex64::new(0.0, -deph.vartheta()).exp();
            let mut rho = DMatrix::<Complex64>::zeros(dim, dim);
            for i in 0..=cutoff {
                for j in 0..=cutoff {
                    let up_up = 0.5 * branch1[i] * branch1[j].conj();
                    let dn_dn = 0.5 * branch2[i] * branch2[j].conj();
                    let up_dn = 0.5 * kappa * phase * branch1[i] * branch2[j].conj();
                    rho[(i, j)] = up_up;
                    rho[(cutoff + 1 + i, cutoff + 1 + j)] = dn_dn;
                    rho[(i, cutoff + 1 + j)] = up_dn;
                    rho[(cutoff + 1 + j, i)] = up_dn.conj();
                }
            }
            (rho, j3)
        }
        StateFamily::Noon(_) => unreachable!("rejected above"),
    };

    let dim = j3.len();
    let trace: f64 = (0..dim).map(|i| rho[(i, i)].re).sum();
    let rho = rho / Complex64::new(trace, 0.0);

    let eig = rho.symmetric_eigen();
    let support: Vec<usize> =
        (0..dim).filter(|&k| eig.eigenvalues[k] > SUPPORT_EPS).collect();

    // J3 matrix elements between support eigenvectors: <k| J3 |j>.
    let elem = |k: usize, j: usize| -> Complex64 {
        let vk = eig.eigenvectors.column(k);
        let vj = eig.eigenvectors.column(j);
        (0..dim).map(|i| vk[i].conj() * j3[i] * vj[i]).sum()
    };

    let mut info = 0.0;
    for (a_pos, &k) in support.iter().enumerate() {
        let lk = eig.eigenvalues[k];
        // Support-support pairs (each unordered pair twice via symmetry).
        for &j in support.iter().skip(a_pos + 1) {
            let lj = eig.eigenvalues[j];
            if lk + lj < PAIR_EPS {
                continue;
            }
            let diff = lk - lj;
            info += 4.0 * diff * diff / (lk + lj) * elem(k, j).norm_sqr();
        }
        // Support-kernel pairs via completeness: sum_j in kernel |<j|J3|k>|^2
        // = <k| J3^2 |k> - sum_j in support |<j|J3|k>|^2.
        let vk = eig.eigenvectors.column(k);
        let j3_sq: f64 = (0..dim).map(|i| vk[i].norm_sqr() * j3[i] * j3[i]).sum();
        let in_support: f64 = support.iter().map(|&j| elem(j, k).norm_sqr()).sum();
        info += 4.0 * lk * (j3_sq - in_support);
    }
    Ok(info)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::mean_photons;
    use approx::assert_relative_eq;

    #[test]
    fn lossless_closed_forms() {
        assert_eq!(qfi_qwp_lossless(10.0), 110.0);
        assert_eq!(qfi_qwp_lossless(4.0), 20.0);
        assert_eq!(qfi_noon(1), 1.0);
        assert_eq!(qfi_noon(10), 100.0);
        assert_relative_eq!(qfi_ecs_lossless(0.0).unwrap(), 0.0, epsilon = 1e-15);

        let w = lambert_w0(10.0 * (-10.0f64).exp()).unwrap();
        assert_relative_eq!(qfi_ecs_lossless(10.0).unwrap(), 110.0 + 10.0 * w, epsilon = 1e-12);
        // The ECS advantage dies off exponentially but stays positive while
        // it is still representable next to n^2 + n.
        let gap = qfi_ecs_lossless(30.0).unwrap() - qfi_qwp_lossless(30.0);
        assert!(gap > 0.0 && gap < 1e-9, "gap = {gap:.3e}");
        // By n = 50 it is smaller than one ulp of the total.
        let gap = qfi_ecs_lossless(50.0).unwrap() - qfi_qwp_lossless(50.0);
        assert!((0.0..1e-12).contains(&gap));
    }

    #[test]
    fn lossy_forms_reduce_and_vanish() {
        for &n in &[0.5, 2.0, 10.0] {
            assert_relative_eq!(
                qfi_ecs_lossy(n, 0.0).unwrap(),
                qfi_ecs_lossless(n).unwrap(),
                max_relative = 1e-14
            );
            assert_relative_eq!(
                qfi_qwp_lossy(n, 0.0, &DephasingParams::NONE).unwrap(),
                qfi_qwp_lossless(n),
                max_relative = 1e-14
            );
            assert_relative_eq!(qfi_ecs_lossy(n, 1.0).unwrap(), 0.0, epsilon = 1e-14);
            assert_relative_eq!(
                qfi_qwp_lossy(n, 1.0, &DephasingParams::NONE).unwrap(),
                0.0,
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn information_is_monotone_in_noise() {
        // 20 x 20 grid in (p, chi) at fixed n_bar.
        let n_bar = 6.0;
        let mut prev_ecs = f64::INFINITY;
        for i in 0..20 {
            let p = i as f64 * 0.05;
            let ecs = qfi_ecs_lossy(n_bar, p).unwrap();
            assert!(ecs <= prev_ecs + 1e-12, "ECS QFI rose at p = {p}");
            prev_ecs = ecs;
            let mut prev_qwp = f64::INFINITY;
            for j in 0..20 {
                let chi = j as f64 * 0.1;
                let deph = DephasingParams::new(chi, 0.0).unwrap();
                let qwp = qfi_qwp_lossy(n_bar, p, &deph).unwrap();
                assert!(qwp <= prev_qwp + 1e-12, "QWP QFI rose at p = {p}, chi = {chi}");
                prev_qwp = qwp;
            }
        }
    }

    #[test]
    fn family_ordering_at_matched_mean_photons() {
        for &n in &[1.0f64, 2.0, 5.0, 12.0] {
            let ecs = qfi_ecs_lossless(n).unwrap();
            let qwp = qfi_qwp_lossless(n);
            let noon = n * n;
            assert!(ecs >= qwp && qwp >= noon, "ordering broken at n_bar = {n}");
        }
    }

    #[test]
    fn vartheta_does_not_move_qwp_information() {
        let a = qfi_qwp_lossy(5.0, 0.1, &DephasingParams::new(0.2, 0.0).unwrap()).unwrap();
        let b = qfi_qwp_lossy(5.0, 0.1, &DephasingParams::new(0.2, 2.1).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    fn oracle_params(alpha: f64, p: f64) -> InterferometerParams {
        InterferometerParams::from_differential(alpha, 0.7, 0.15, p).unwrap()
    }

    fn heuristic_cutoff(alpha: f64) -> usize {
        (alpha * alpha + 10.0 * alpha + 10.0).ceil() as usize
    }

    #[test]
    fn oracle_matches_qwp_pure_state() {
        // alpha = 1, no noise: I_Q = n^2 + n = 2.
        let params = oracle_params(1.0, 0.0);
        let got =
            qfi_numeric_oracle(StateFamily::Qwp, &params, &DephasingParams::NONE, 25).unwrap();
        assert_relative_eq!(got, 2.0, max_relative = 1e-8);
    }

    #[test]
    fn oracle_matches_closed_forms_spot_checks() {
        let deph = DephasingParams::new(0.3, 0.4).unwrap();
        for &(alpha, p) in &[(0.5, 0.0), (1.0, 0.2), (2.0, 0.05), (3.0, 0.2)] {
            let params = oracle_params(alpha, p);
            let cutoff = heuristic_cutoff(alpha);

            let n_bar = mean_photons(StateFamily::Ecs, alpha);
            let oracle =
                qfi_numeric_oracle(StateFamily::Ecs, &params, &DephasingParams::NONE, cutoff)
                    .unwrap();
            let closed = qfi_ecs_lossy(n_bar, p).unwrap();
            assert_relative_eq!(oracle, closed, max_relative = 1e-6);

            let n_bar = alpha * alpha;
            let oracle = qfi_numeric_oracle(StateFamily::Qwp, &params, &deph, cutoff).unwrap();
            let closed = qfi_qwp_lossy(n_bar, p, &deph).unwrap();
            assert_relative_eq!(oracle, closed, max_relative = 1e-6);
        }
    }

    #[test]
    fn oracle_is_phase_independent() {
        let deph = DephasingParams::new(0.1, 0.9).unwrap();
        let mut values = Vec::new();
        for (phi1, phi2) in [(0.7, 0.2), (0.0, 0.0), (2.0, -1.0)] {
            let params = InterferometerParams::new(1.5, phi1, phi2, 0.1).unwrap();
            values.push(qfi_numeric_oracle(StateFamily::Qwp, &params, &deph, 30).unwrap());
        }
        for v in &values[1..] {
            assert_relative_eq!(*v, values[0], max_relative = 1e-8);
        }
    }

    #[test]
    fn oracle_rejects_unsupported_inputs() {
        let params = oracle_params(3.0, 0.0);
        assert!(matches!(
            qfi_numeric_oracle(StateFamily::Ecs, &params, &DephasingParams::NONE, 8),
            Err(Error::Truncation { .. })
        ));
        assert!(matches!(
            qfi_numeric_oracle(StateFamily::Noon(3), &params, &DephasingParams::NONE, 30),
            Err(Error::UnsupportedFamily { .. })
        ));
    }
}
