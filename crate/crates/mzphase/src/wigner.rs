//! Reduced single-mode Wigner distributions of the entangled coherent probe.
//!
//! Tracing the x_minus mode out of the post-beamsplitter ECS leaves a rank-2
//! mixture of coherent dyads in the x_plus mode. Every dyad |beta><gamma| has
//! a complex-Gaussian Wigner kernel, so the reduced distribution is evaluated
//! in closed form: two coherent lobes plus a damped interference fringe whose
//! weight is the partner-mode overlap. The convention is dimensionless
//! quadratures with integral W dx dp = 1 and vacuum peak 1/pi.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::states::{ecs_normalization, InterferometerParams};

const INV_PI: f64 = std::f64::consts::FRAC_1_PI;

/// Uniform square grid of Wigner values, row-major over x then p.
#[derive(Debug, Clone)]
pub struct WignerGrid {
    xs: Vec<f64>,
    ps: Vec<f64>,
    values: Vec<f64>,
}

impl WignerGrid {
    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ps(&self) -> &[f64] {
        &self.ps
    }

    pub fn nx(&self) -> usize {
        self.xs.len()
    }

    pub fn np(&self) -> usize {
        self.ps.len()
    }

    pub fn value(&self, ix: usize, ip: usize) -> f64 {
        self.values[ix * self.ps.len() + ip]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn dx(&self) -> f64 {
        self.xs[1] - self.xs[0]
    }

    fn dp(&self) -> f64 {
        self.ps[1] - self.ps[0]
    }

    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dp()
    }

    /// Riemann sum times the cell area; 1 within 1e-6 for a grid that covers
    /// the distribution (half extent alpha + 6 suffices).
    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_area()
    }

    /// Catmull-Rom bicubic interpolation, zero outside the grid.
    pub fn sample_bicubic(&self, x: f64, p: f64) -> f64 {
        let (nx, np) = (self.nx(), self.np());
        let fx = (x - self.xs[0]) / self.dx();
        let fp = (p - self.ps[0]) / self.dp();
        if fx < 0.0 || fp < 0.0 || fx > (nx - 1) as f64 || fp > (np - 1) as f64 {
            return 0.0;
        }
        let ix = (fx.floor() as usize).min(nx - 2);
        let ip = (fp.floor() as usize).min(np - 2);
        let tx = fx - ix as f64;
        let tp = fp - ip as f64;

        let row = |i: isize| -> [f64; 4] {
            let i = i.clamp(0, nx as isize - 1) as usize;
            let mut out = [0.0; 4];
            for (k, o) in out.iter_mut().enumerate() {
                let j = (ip as isize + k as isize - 1).clamp(0, np as isize - 1) as usize;
                *o = self.value(i, j);
            }
            out
        };
        let mut vals = [0.0; 4];
        for (k, v) in vals.iter_mut().enumerate() {
            let r = row(ix as isize + k as isize - 1);
            *v = catmull_rom(r, tp);
        }
        catmull_rom(vals, tx)
    }

    /// Marginal of the rotated quadrature x cos(theta) + p sin(theta),
    /// evaluated at the requested quadrature values by integrating the
    /// interpolated grid along the orthogonal direction.
    pub fn rotated_marginal(&self, theta: f64, quadrature_values: &[f64]) -> Vec<f64> {
        let (ct, st) = (theta.cos(), theta.sin());
        let half_diag = {
            let lx = self.xs[self.nx() - 1].abs().max(self.xs[0].abs());
            let lp = self.ps[self.np() - 1].abs().max(self.ps[0].abs());
            lx.hypot(lp)
        };
        let step = self.dx().min(self.dp());
        let n = (2.0 * half_diag / step).ceil() as usize;
        quadrature_values
            .iter()
            .map(|&s| {
                // Trapezoid along the perpendicular; W vanishes at the ends.
                let mut acc = 0.0;
                for k in 0..=n {
                    let u = -half_diag + 2.0 * half_diag * k as f64 / n as f64;
                    let x = s * ct - u * st;
                    let p = s * st + u * ct;
                    let w = self.sample_bicubic(x, p);
                    acc += if k == 0 || k == n { 0.5 * w } else { w };
                }
                acc * 2.0 * half_diag / n as f64
            })
            .collect()
    }
}

fn catmull_rom(v: [f64; 4], t: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    0.5 * (2.0 * v[1]
        + (v[2] - v[0]) * t
        + (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) * t2
        + (-v[0] + 3.0 * v[1] - 3.0 * v[2] + v[3]) * t3)
}

/// Wigner kernel of the coherent dyad |beta><gamma| in (x, p), zeta = (x + i p)/sqrt(2):
/// (1/pi) exp(conj(zeta) beta - zeta conj(beta) - |gamma|^2/2 - |2 zeta - beta|^2/2
///            + conj(gamma)(2 zeta - beta)).
fn dyad_wigner(beta: Complex64, gamma: Complex64, zeta: Complex64) -> Complex64 {
    let two_zeta_minus_beta = 2.0 * zeta - beta;
    let exponent = zeta.conj() * beta - zeta * beta.conj()
        - Complex64::new(0.5 * gamma.norm_sqr() + 0.5 * two_zeta_minus_beta.norm_sqr(), 0.0)
        + gamma.conj() * two_zeta_minus_beta;
    INV_PI * exponent.exp()
}

/// Reduced Wigner value of the x_plus mode at one phase-space point.
pub fn reduced_wigner_ecs_point(params: &InterferometerParams, x: f64, p: f64) -> f64 {
    let alpha = params.alpha();
    let a2 = alpha * alpha;
    let sqrt2_inv = std::f64::consts::FRAC_1_SQRT_2;
    let beta1 = Complex64::from_polar(alpha * sqrt2_inv, params.phi1());
    let beta2 = -Complex64::from_polar(alpha * sqrt2_inv, params.phi2());
    // Partner-mode overlap <alpha_phi2 | alpha_phi1> weighting the fringe.
    let cross = (0.5 * a2 * (Complex64::new(0.0, params.phi()).exp() - 1.0)).exp();
    let n_sq = ecs_normalization(alpha).powi(2);
    let zeta = Complex64::new(x * sqrt2_inv, p * sqrt2_inv);

    let lobe1 = dyad_wigner(beta1, beta1, zeta).re;
    let lobe2 = dyad_wigner(beta2, beta2, zeta).re;
    let fringe = 2.0 * (cross * dyad_wigner(beta1, beta2, zeta)).re;
    n_sq * (lobe1 + lobe2 + fringe)
}

/// Reduced Wigner distribution of the x_plus mode on a square grid
/// [-half_extent, half_extent]^2 with `resolution` points per axis.
///
/// Only the lossless case is covered: nonzero loss_p would need the full
/// two-mode loss channel and is out of scope for this reconstruction.
pub fn reduced_wigner_ecs(
    params: &InterferometerParams,
    half_extent: f64,
    resolution: usize,
) -> Result<WignerGrid> {
    if params.loss_p() != 0.0 {
        return Err(Error::invalid(
            "reduced_wigner_ecs covers the lossless case only (loss_p = 0)".to_string(),
        ));
    }
    if resolution < 2 {
        return Err(Error::invalid("grid resolution must be >= 2".to_string()));
    }
    if !half_extent.is_finite() || half_extent <= 0.0 {
        return Err(Error::invalid(format!("half_extent must be positive, got {half_extent}")));
    }
    let axis: Vec<f64> = (0..resolution)
        .map(|i| -half_extent + 2.0 * half_extent * i as f64 / (resolution - 1) as f64)
        .collect();
    let values: Vec<f64> = axis
        .par_iter()
        .flat_map_iter(|&x| {
            let params = *params;
            axis.iter()
                .map(move |&p| reduced_wigner_ecs_point(&params, x, p))
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(WignerGrid { xs: axis.clone(), ps: axis, values })
}

/// Default half extent covering the lobes and fringes: alpha + 6.
pub fn default_half_extent(alpha: f64) -> f64 {
    alpha + 6.0
}
