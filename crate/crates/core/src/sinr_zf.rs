//! Zero-forcing effective SINR: the single-cell closed form, and the
//! cell-free form whose interference expectations are estimated by Monte
//! Carlo over small-scale channel realizations.

use alloc::vec;
use alloc::vec::Vec;

use crate::channel::{draw_channel, ChannelStats};
use crate::error::Error;
use crate::linalg::{invert_upper_triangular, qr_decompose, solve_upper_triangular, Mat};
use crate::math::{sqrt, KahanSum};
use crate::rng::Stream;
use crate::sinr_mr::{ConfigTag, PowerControlVector, SinrReport};
use crate::Result;

/// Single-cell ZF effective SINR:
/// sinr_k = (M-K) rho γ_k η_k / (1 + rho Σ_k' (β_k' - γ_k') η_k').
pub fn sinr_cl_zf(
    gamma_k: &[f64],
    beta_k: &[f64],
    eta: &PowerControlVector,
    m: usize,
    rho_u: f64,
) -> Result<SinrReport> {
    let k = gamma_k.len();
    if k == 0 {
        return Err(Error::shape("need at least one user"));
    }
    if beta_k.len() != k || eta.len() != k {
        return Err(Error::shape("gamma, beta, and eta lengths differ"));
    }
    if m <= k {
        return Err(Error::ZfUnderdetermined { m, k });
    }

    let residual_interference: f64 = gamma_k
        .iter()
        .zip(beta_k)
        .zip(eta.eta())
        .map(|((g, b), e)| (b - g) * e)
        .sum();
    let denom = 1.0 + rho_u * residual_interference;
    let scale = (m - k) as f64 * rho_u;
    let sinr = gamma_k
        .iter()
        .zip(eta.eta())
        .map(|(g, e)| scale * g * e / denom)
        .collect();
    Ok(SinrReport::from_sinr(ConfigTag::ClZf, eta, sinr))
}

/// Small-scale expectations entering the cell-free ZF SINR.
///
/// `e_b2[(k, k')]` estimates E|b_{k,k'}|^2 where B is the ZF decoder applied
/// to the estimation error, and `e_diag_inv[k]` estimates the kth diagonal
/// entry of the expected inverse Gram matrix of the channel estimate.
#[derive(Clone, Debug)]
pub struct ZfExpectations {
    pub e_b2: Mat,
    pub e_diag_inv: Vec<f64>,
    pub n_realizations: usize,
    /// Standard error of each `e_b2` entry.
    pub stderr_b2: Mat,
    /// Standard error of each `e_diag_inv` entry.
    pub stderr_diag_inv: Vec<f64>,
    /// Realizations rejected for numerical rank deficiency and redrawn.
    pub rejected: usize,
}

impl ZfExpectations {
    pub fn num_users(&self) -> usize {
        self.e_diag_inv.len()
    }
}

/// Estimate the ZF interference expectations for one large-scale profile.
///
/// Per realization the estimate matrix is QR-factored; the decoder never
/// forms the Gram matrix explicitly. B = R^{-1} (Q* G̃) and the inverse-Gram
/// diagonal falls out of the rows of R^{-1}. Accumulation is compensated so
/// the result is independent of magnitude spread across realizations.
pub fn estimate_zf_expectations(
    stats: &ChannelStats,
    n_real: usize,
    stream: &mut Stream,
) -> Result<ZfExpectations> {
    let m = stats.num_aps();
    let k = stats.num_users();
    if m <= k {
        return Err(Error::ZfUnderdetermined { m, k });
    }
    if n_real < 2 {
        return Err(Error::config("need at least 2 small-scale realizations"));
    }

    let mut sum_b2 = vec![KahanSum::new(); k * k];
    let mut sum_b2_sq = vec![KahanSum::new(); k * k];
    let mut sum_diag = vec![KahanSum::new(); k];
    let mut sum_diag_sq = vec![KahanSum::new(); k];
    let mut rejected = 0usize;

    let mut accepted = 0usize;
    while accepted < n_real {
        let real = draw_channel(stats, stream);
        let qr = qr_decompose(&real.g_hat)?;
        if qr.is_rank_deficient() {
            // Probability-zero event for continuous draws; guards
            // finite-precision pathologies.
            rejected += 1;
            if rejected > 100 + n_real {
                return Err(Error::domain(
                    "channel estimates are persistently rank deficient",
                ));
            }
            continue;
        }

        let qt_err = qr.q_conj_times(&real.g_tilde)?;
        let b = solve_upper_triangular(qr.r(), &qt_err)?;
        for row in 0..k {
            for col in 0..k {
                let v = b[(row, col)].abs_sq();
                sum_b2[row * k + col].add(v);
                sum_b2_sq[row * k + col].add(v * v);
            }
        }

        let r_inv = invert_upper_triangular(qr.r())?;
        for row in 0..k {
            // (R^{-1} R^{-*})_{kk} is the squared norm of row k of R^{-1}.
            let mut norm_sq = 0.0;
            for col in row..k {
                norm_sq += r_inv[(row, col)].abs_sq();
            }
            sum_diag[row].add(norm_sq);
            sum_diag_sq[row].add(norm_sq * norm_sq);
        }

        accepted += 1;
    }

    let n = n_real as f64;
    let mean_and_stderr = |sum: f64, sum_sq: f64| {
        let mean = sum / n;
        let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
        (mean, sqrt(var / n))
    };

    let mut e_b2 = Mat::zeros(k, k);
    let mut stderr_b2 = Mat::zeros(k, k);
    for row in 0..k {
        for col in 0..k {
            let (mean, se) = mean_and_stderr(
                sum_b2[row * k + col].value(),
                sum_b2_sq[row * k + col].value(),
            );
            e_b2[(row, col)] = mean;
            stderr_b2[(row, col)] = se;
        }
    }
    let mut e_diag_inv = Vec::with_capacity(k);
    let mut stderr_diag_inv = Vec::with_capacity(k);
    for row in 0..k {
        let (mean, se) = mean_and_stderr(sum_diag[row].value(), sum_diag_sq[row].value());
        e_diag_inv.push(mean);
        stderr_diag_inv.push(se);
    }

    Ok(ZfExpectations {
        e_b2,
        e_diag_inv,
        n_realizations: n_real,
        stderr_b2,
        stderr_diag_inv,
        rejected,
    })
}

/// Cell-free ZF effective SINR:
/// sinr_k = rho η_k / (rho Σ_k' η_k' E|b_{k,k'}|^2 + [E(Ĝ*Ĝ)^{-1}]_{k,k}).
pub fn sinr_cf_zf(
    exp: &ZfExpectations,
    eta: &PowerControlVector,
    rho_u: f64,
) -> Result<SinrReport> {
    let k = exp.num_users();
    if eta.len() != k {
        return Err(Error::shape("eta length does not match expectations"));
    }
    let mut sinr = Vec::with_capacity(k);
    for user in 0..k {
        let mut interference = 0.0;
        for (other, &e) in eta.eta().iter().enumerate() {
            interference += e * exp.e_b2[(user, other)];
        }
        let denom = rho_u * interference + exp.e_diag_inv[user];
        sinr.push(rho_u * eta.eta()[user] / denom);
    }
    Ok(SinrReport::from_sinr(ConfigTag::CfZf, eta, sinr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::fabs;

    fn uniform_stats(m: usize, k: usize, gamma: f64, beta: f64) -> ChannelStats {
        ChannelStats {
            gamma: Mat::from_fn(m, k, |_, _| gamma),
            err_var: Mat::from_fn(m, k, |_, _| beta - gamma),
            tau: k,
        }
    }

    #[test]
    fn perfect_csi_zeroes_interference_expectation() {
        let stats = uniform_stats(24, 4, 3e-11, 3e-11);
        let exp = estimate_zf_expectations(&stats, 50, &mut Stream::from_seed(41)).unwrap();
        for row in 0..4 {
            for col in 0..4 {
                assert_eq!(exp.e_b2[(row, col)], 0.0);
            }
        }
        assert!(exp.e_diag_inv.iter().all(|&d| d > 0.0));
    }

    #[test]
    fn inverse_gram_diagonal_matches_wishart_expectation() {
        // For i.i.d. CN(0, gamma) columns, E[(Ĝ*Ĝ)^{-1}]_{kk} = 1/((M-K) gamma).
        let gamma = 2e-12;
        for &(m, k) in &[(64usize, 1usize), (48, 3)] {
            let stats = uniform_stats(m, k, gamma, gamma * 1.25);
            let exp = estimate_zf_expectations(&stats, 4000, &mut Stream::from_seed(42)).unwrap();
            let expected = 1.0 / ((m - k) as f64 * gamma);
            for user in 0..k {
                let got = exp.e_diag_inv[user];
                let se = exp.stderr_diag_inv[user];
                assert!(
                    fabs(got - expected) < 4.0 * se + 0.01 * expected,
                    "M={m} K={k} user {user}: got {got}, expected {expected}, se {se}"
                );
            }
        }
    }

    #[test]
    fn iid_error_interference_matches_closed_form() {
        // E|b|^2 = v / ((M-K) gamma) when every entry shares gamma and error
        // variance v.
        let gamma = 5e-12;
        let beta = 6e-12;
        let (m, k) = (40usize, 4usize);
        let stats = uniform_stats(m, k, gamma, beta);
        let exp = estimate_zf_expectations(&stats, 4000, &mut Stream::from_seed(43)).unwrap();
        let expected = (beta - gamma) / ((m - k) as f64 * gamma);
        for row in 0..k {
            for col in 0..k {
                let got = exp.e_b2[(row, col)];
                let se = exp.stderr_b2[(row, col)];
                assert!(
                    fabs(got - expected) < 4.0 * se + 0.02 * expected,
                    "entry ({row},{col}): got {got}, expected {expected}"
                );
            }
        }
        assert_eq!(exp.rejected, 0);
        assert_eq!(exp.n_realizations, 4000);
    }

    #[test]
    fn estimator_is_deterministic() {
        let stats = uniform_stats(20, 3, 1e-12, 1.5e-12);
        let a = estimate_zf_expectations(&stats, 30, &mut Stream::from_seed(44)).unwrap();
        let b = estimate_zf_expectations(&stats, 30, &mut Stream::from_seed(44)).unwrap();
        assert_eq!(a.e_b2, b.e_b2);
        assert_eq!(a.e_diag_inv, b.e_diag_inv);
    }

    #[test]
    fn standard_error_shrinks_with_realizations() {
        let stats = uniform_stats(30, 3, 1e-12, 1.4e-12);
        let small = estimate_zf_expectations(&stats, 2000, &mut Stream::from_seed(45)).unwrap();
        let large = estimate_zf_expectations(&stats, 4000, &mut Stream::from_seed(45)).unwrap();
        // SE scales as 1/sqrt(n): doubling n should shrink it by ~sqrt(2).
        let ratio = small.stderr_diag_inv[0] / large.stderr_diag_inv[0];
        assert!(
            (1.2..=1.7).contains(&ratio),
            "stderr ratio {ratio} not near sqrt(2)"
        );
    }

    #[test]
    fn underdetermined_and_tiny_inputs_rejected() {
        let stats = uniform_stats(3, 3, 1e-12, 2e-12);
        assert!(matches!(
            estimate_zf_expectations(&stats, 10, &mut Stream::from_seed(46)),
            Err(Error::ZfUnderdetermined { .. })
        ));
        let stats = uniform_stats(8, 3, 1e-12, 2e-12);
        assert!(estimate_zf_expectations(&stats, 1, &mut Stream::from_seed(46)).is_err());
    }

    #[test]
    fn cl_zf_perfect_csi() {
        let beta = [2e-11, 4e-11];
        let eta = PowerControlVector::full(2);
        let rho = 1e11;
        let report = sinr_cl_zf(&beta, &beta, &eta, 10, rho).unwrap();
        for (user, &b) in beta.iter().enumerate() {
            let expected = 8.0 * rho * b;
            assert!(fabs(report.sinr[user] - expected) < 1e-9 * expected);
        }
    }

    #[test]
    fn cl_zf_minimal_antenna_margin() {
        let gamma = [1e-11, 2e-11, 3e-11];
        let beta = [2e-11, 3e-11, 4e-11];
        let eta = PowerControlVector::full(3);
        let rho = 1e10;
        let report = sinr_cl_zf(&gamma, &beta, &eta, 4, rho).unwrap();
        let resid: f64 = gamma.iter().zip(&beta).map(|(g, b)| b - g).sum();
        for (user, &g) in gamma.iter().enumerate() {
            let expected = rho * g / (1.0 + rho * resid);
            assert!(fabs(report.sinr[user] - expected) < 1e-12 * expected);
        }
    }

    #[test]
    fn cl_zf_beats_cl_mr_when_interference_dominates() {
        // Paired evaluation on urban tower draws: at full power the MR
        // denominator is interference-dominated (rho * sum(beta) >> 1) and
        // nulling it buys far more than the (M-K)/M noise penalty costs.
        use crate::geometry::{place_colocated, place_uniform_disk, Placement};
        use crate::propagation::{
            compute_rho_u, draw_beta, LinkBudget, Morphology, MorphologyParams,
        };
        use crate::sinr_mr::sinr_cl_mr;

        let params = MorphologyParams::preset(Morphology::Urban)
            .resolved_for(crate::propagation::Deployment::Cellular);
        let rho = compute_rho_u(&LinkBudget::vehicle_default()).unwrap();
        for seed in 0..10 {
            let mut s = Stream::from_seed(seed);
            let aps = place_colocated(200, params.radius_m).unwrap();
            let users = place_uniform_disk(18, params.radius_m, &mut s).unwrap();
            let placement = Placement::new(
                aps,
                users,
                params.ap_height_m,
                params.terminal_height_m,
                params.radius_m,
            )
            .unwrap();
            let fading = draw_beta(&placement, &params, &mut s).unwrap();
            let stats = crate::channel::gamma_from_beta(&fading, rho, 18).unwrap();
            let eta = PowerControlVector::full(18);

            let interference: f64 = fading.user_gains().iter().sum::<f64>() * rho;
            assert!(interference > 10.0, "draw not interference-dominated");

            let zf = sinr_cl_zf(stats.user_gamma(), fading.user_gains(), &eta, 200, rho).unwrap();
            let mr = sinr_cl_mr(stats.user_gamma(), fading.user_gains(), &eta, 200, rho).unwrap();
            for user in 0..18 {
                assert!(
                    zf.sinr[user] > mr.sinr[user],
                    "seed {seed} user {user}: ZF {} <= MR {}",
                    zf.sinr[user],
                    mr.sinr[user]
                );
            }
        }
    }

    #[test]
    fn cl_zf_requires_more_antennas_than_users() {
        let eta = PowerControlVector::full(3);
        let v = [1e-11, 2e-11, 3e-11];
        assert!(matches!(
            sinr_cl_zf(&v, &v, &eta, 3, 1e10),
            Err(Error::ZfUnderdetermined { m: 3, k: 3 })
        ));
    }

    #[test]
    fn cf_zf_sinr_nondecreasing_in_own_eta() {
        let stats = uniform_stats(28, 4, 2e-12, 2.6e-12);
        let exp = estimate_zf_expectations(&stats, 200, &mut Stream::from_seed(48)).unwrap();
        let rho = 3.16e12;
        for user in 0..4 {
            let mut prev = -1.0;
            for step in 1..=10 {
                let mut eta = alloc::vec![0.7; 4];
                eta[user] = step as f64 / 10.0;
                let report =
                    sinr_cf_zf(&exp, &PowerControlVector::manual(eta).unwrap(), rho).unwrap();
                assert!(
                    report.sinr[user] >= prev,
                    "user {user} SINR decreased when raising its own power"
                );
                prev = report.sinr[user];
            }
        }
    }

    #[test]
    fn cf_zf_zero_power_zero_sinr() {
        let stats = uniform_stats(20, 3, 1e-12, 1.3e-12);
        let exp = estimate_zf_expectations(&stats, 50, &mut Stream::from_seed(47)).unwrap();
        let eta = PowerControlVector::manual(vec![0.0; 3]).unwrap();
        let report = sinr_cf_zf(&exp, &eta, 3e12).unwrap();
        assert!(report.sinr.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn cf_zf_matches_cl_zf_through_analytic_expectations() {
        // Building the expectations from the i.i.d. closed forms must make
        // the cell-free expression collapse to the single-cell one exactly.
        let (m, k) = (36usize, 5usize);
        let gamma_k = [1e-12, 2e-12, 3e-12, 1.5e-12, 2.5e-12];
        let beta_k = [1.4e-12, 2.3e-12, 3.9e-12, 2.1e-12, 3.4e-12];
        let rho = 3.16e12;

        let e_b2 = Mat::from_fn(k, k, |row, col| {
            (beta_k[col] - gamma_k[col]) / ((m - k) as f64 * gamma_k[row])
        });
        let e_diag_inv: Vec<f64> = gamma_k.iter().map(|g| 1.0 / ((m - k) as f64 * g)).collect();
        let exp = ZfExpectations {
            e_b2,
            stderr_b2: Mat::zeros(k, k),
            e_diag_inv,
            stderr_diag_inv: vec![0.0; k],
            n_realizations: 0,
            rejected: 0,
        };

        let eta = PowerControlVector::manual(vec![1.0, 0.5, 0.8, 0.3, 0.9]).unwrap();
        let cf = sinr_cf_zf(&exp, &eta, rho).unwrap();
        let cl = sinr_cl_zf(&gamma_k, &beta_k, &eta, m, rho).unwrap();
        for user in 0..k {
            let rel = fabs(cf.sinr[user] - cl.sinr[user]) / cl.sinr[user];
            assert!(rel < 1e-12, "user {user} rel err {rel}");
        }
    }
}
