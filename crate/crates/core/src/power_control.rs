//! Uplink power-control strategies: full power, the closed-form single-cell
//! max-min solution, and bisection-over-linear-system max-min solvers for
//! the two cell-free configurations.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::linalg::Mat;
use crate::math::fabs;
use crate::sinr_mr::{
    gamma_beta_cross, mr_upper_bound, sinr_cf_mr, sinr_cl_mr, Decoder, PowerControlVector, PowerTag,
};
use crate::sinr_zf::{sinr_cf_zf, sinr_cl_zf, ZfExpectations};
use crate::Result;

/// Bisection controls for the cell-free max-min solvers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Relative bracket width at which bisection stops.
    pub tol: f64,
    /// Iteration cap, whichever comes first.
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-5,
            max_iterations: 100,
        }
    }
}

/// Outcome of a max-min power-control solve.
#[derive(Clone, Debug)]
pub struct MaxMinResult {
    pub eta: PowerControlVector,
    /// Common SINR achieved by all users, linear.
    pub zeta: f64,
    /// Bisection iterations (0 for the closed-form cellular solution).
    pub iterations: usize,
    /// Max relative deviation of the recomputed per-user SINRs from zeta.
    pub residual: f64,
    /// False only when no positive common SINR was feasible.
    pub converged: bool,
}

/// Every terminal transmits at full power.
pub fn full_power(k: usize) -> PowerControlVector {
    assert!(k >= 1, "need at least one user");
    PowerControlVector::full(k)
}

/// Closed-form single-cell max-min power control, eta_k = min(gamma)/gamma_k,
/// with the common SINR evaluated for the requested decoder.
pub fn maxmin_cl(
    decoder: Decoder,
    gamma_k: &[f64],
    beta_k: &[f64],
    m: usize,
    rho_u: f64,
) -> Result<MaxMinResult> {
    let k = gamma_k.len();
    if k == 0 || beta_k.len() != k {
        return Err(Error::shape("gamma and beta must share a positive length"));
    }
    if gamma_k.iter().any(|&g| !crate::math::is_positive(g)) {
        return Err(Error::domain("max-min needs strictly positive gamma"));
    }
    if decoder == Decoder::Zf && m <= k {
        return Err(Error::ZfUnderdetermined { m, k });
    }

    let min_gamma = gamma_k.iter().copied().fold(f64::INFINITY, f64::min);
    let eta_vec: Vec<f64> = gamma_k.iter().map(|&g| min_gamma / g).collect();
    let eta = PowerControlVector::new(eta_vec, PowerTag::MaxMin)?;

    let zeta = match decoder {
        Decoder::Mr => {
            let load: f64 = beta_k.iter().zip(gamma_k).map(|(b, g)| b / g).sum();
            m as f64 * rho_u / (1.0 / min_gamma + rho_u * load)
        }
        Decoder::Zf => {
            let load: f64 = beta_k.iter().zip(gamma_k).map(|(b, g)| (b - g) / g).sum();
            (m - k) as f64 * rho_u / (1.0 / min_gamma + rho_u * load)
        }
    };

    let recomputed = match decoder {
        Decoder::Mr => sinr_cl_mr(gamma_k, beta_k, &eta, m, rho_u)?,
        Decoder::Zf => sinr_cl_zf(gamma_k, beta_k, &eta, m, rho_u)?,
    };
    let residual = max_relative_deviation(&recomputed.sinr, zeta);

    Ok(MaxMinResult {
        eta,
        zeta,
        iterations: 0,
        residual,
        converged: true,
    })
}

fn max_relative_deviation(sinr: &[f64], zeta: f64) -> f64 {
    sinr.iter()
        .map(|&s| fabs(s - zeta) / zeta.max(1e-300))
        .fold(0.0, f64::max)
}

/// Shared bisection once the problem is reduced to: find the largest zeta
/// for which `(diag - zeta * coupling) eta = (zeta / rho) rhs` has a solution
/// inside the unit box.
///
/// `diag`, `coupling`, and `rhs` are all nonnegative, which makes
/// feasibility monotone in zeta: lowering the target never hurts.
struct BoxFeasibility<'a> {
    diag: &'a [f64],
    coupling: &'a Mat,
    rhs: &'a [f64],
    rho_u: f64,
}

impl BoxFeasibility<'_> {
    /// Solve at a given zeta and keep the solution only if it is a valid
    /// power-control vector.
    fn solve(&self, zeta: f64) -> Option<Vec<f64>> {
        let k = self.diag.len();
        let system = Mat::from_fn(k, k, |r, c| {
            let d = if r == c { self.diag[r] } else { 0.0 };
            d - zeta * self.coupling[(r, c)]
        });
        let rhs: Vec<f64> = self.rhs.iter().map(|&v| zeta / self.rho_u * v).collect();
        let eta = crate::linalg::solve_real_system(&system, &rhs)?;
        if eta.iter().all(|&e| (0.0..=1.0).contains(&e)) {
            Some(eta)
        } else {
            None
        }
    }

    fn bisect(&self, upper_hint: f64, opts: &SolverOptions) -> (f64, Vec<f64>, usize, bool) {
        let k = self.diag.len();

        // The hint is meant to be infeasible; if numerics disagree, grow it
        // until the bracket is genuine.
        let mut hi = upper_hint.max(1e-12);
        let mut grow = 0;
        while self.solve(hi).is_some() && grow < 64 {
            hi *= 2.0;
            grow += 1;
        }

        let mut lo = 0.0;
        let mut best: Option<Vec<f64>> = None;
        let mut iterations = 0usize;
        while iterations < opts.max_iterations && (hi - lo) > opts.tol * hi {
            let mid = 0.5 * (lo + hi);
            match self.solve(mid) {
                Some(eta) => {
                    lo = mid;
                    best = Some(eta);
                }
                None => hi = mid,
            }
            iterations += 1;
        }

        match best {
            Some(eta) => (lo, eta, iterations, true),
            None => (0.0, vec![0.0; k], iterations, false),
        }
    }
}

/// Max-min power control for cell-free MR decoding.
///
/// Bisection searches for the largest common SINR zeta whose equal-SINR
/// linear system has a solution in the unit box; the per-user MR upper
/// bound caps the bracket from above.
pub fn maxmin_cf_mr(
    gamma: &Mat,
    beta: &Mat,
    rho_u: f64,
    opts: &SolverOptions,
) -> Result<MaxMinResult> {
    if !gamma.same_shape(beta) {
        return Err(Error::shape("gamma and beta dimensions differ"));
    }
    if !crate::math::is_positive(rho_u) {
        return Err(Error::config("rho_u must be positive"));
    }
    let gamma_sums = gamma.col_sums();
    if gamma_sums.iter().any(|&s| !crate::math::is_positive(s)) {
        return Err(Error::domain(
            "every user needs positive channel statistics",
        ));
    }
    let cross = gamma_beta_cross(gamma, beta);
    let diag: Vec<f64> = gamma_sums.iter().map(|&s| s * s).collect();
    let bound = mr_upper_bound(gamma)?;

    let problem = BoxFeasibility {
        diag: &diag,
        coupling: &cross,
        rhs: &gamma_sums,
        rho_u,
    };
    let (zeta, eta_vec, iterations, converged) = problem.bisect(bound.min, opts);
    let eta = PowerControlVector::new(clamp_unit(eta_vec), PowerTag::MaxMin)?;

    let recomputed = sinr_cf_mr(gamma, beta, &eta, rho_u)?;
    let residual = max_relative_deviation(&recomputed.sinr, zeta);

    Ok(MaxMinResult {
        eta,
        zeta,
        iterations,
        residual,
        converged,
    })
}

/// Max-min power control for cell-free ZF decoding on estimated
/// expectations: (I - zeta E(B* ∘ B)) eta = (zeta/rho) diag[E(Ĝ*Ĝ)^{-1}].
pub fn maxmin_cf_zf(
    exp: &ZfExpectations,
    rho_u: f64,
    opts: &SolverOptions,
) -> Result<MaxMinResult> {
    let k = exp.num_users();
    if k == 0 {
        return Err(Error::shape("expectations cover no users"));
    }
    if !crate::math::is_positive(rho_u) {
        return Err(Error::config("rho_u must be positive"));
    }
    if exp.e_diag_inv.iter().any(|&d| !crate::math::is_positive(d)) {
        return Err(Error::domain("inverse-Gram diagonal must be positive"));
    }

    // Safe overestimate of the achievable common SINR: no user can do better
    // than K times the best full-power SINR.
    let full = PowerControlVector::full(k);
    let full_report = sinr_cf_zf(exp, &full, rho_u)?;
    let hint = k as f64 * full_report.sinr.iter().copied().fold(0.0, f64::max);

    let diag = vec![1.0; k];
    let problem = BoxFeasibility {
        diag: &diag,
        coupling: &exp.e_b2,
        rhs: &exp.e_diag_inv,
        rho_u,
    };
    let (zeta, eta_vec, iterations, converged) = problem.bisect(hint, opts);
    let eta = PowerControlVector::new(clamp_unit(eta_vec), PowerTag::MaxMin)?;

    let recomputed = sinr_cf_zf(exp, &eta, rho_u)?;
    let residual = max_relative_deviation(&recomputed.sinr, zeta);

    Ok(MaxMinResult {
        eta,
        zeta,
        iterations,
        residual,
        converged,
    })
}

fn clamp_unit(mut eta: Vec<f64>) -> Vec<f64> {
    for e in &mut eta {
        *e = e.clamp(0.0, 1.0);
    }
    eta
}
