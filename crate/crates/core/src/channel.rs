//! MMSE channel-estimate statistics and small-scale channel realizations.
//!
//! Pilot transmission is never simulated: the estimate and the estimation
//! error are drawn directly from their exact marginal distributions, which
//! is statistically equivalent and much cheaper.

use crate::error::Error;
use crate::linalg::{CMat, Mat, C64};
use crate::math::sqrt;
use crate::propagation::LargeScaleFading;
use crate::rng::Stream;
use crate::Result;

/// Second-order statistics of the MMSE channel estimate.
///
/// `gamma` is the mean-square of the estimate and `err_var` the per-entry
/// variance of the estimation error; they sum to `beta` entrywise.
#[derive(Clone, Debug)]
pub struct ChannelStats {
    pub gamma: Mat,
    pub err_var: Mat,
    /// Pilot sequence length in symbols.
    pub tau: usize,
}

impl ChannelStats {
    #[inline]
    pub fn num_aps(&self) -> usize {
        self.gamma.rows()
    }

    #[inline]
    pub fn num_users(&self) -> usize {
        self.gamma.cols()
    }

    /// Per-user estimate quality seen from a co-located tower (row 0).
    pub fn user_gamma(&self) -> &[f64] {
        self.gamma.row(0)
    }
}

/// gamma = rho_u*tau*beta^2 / (1 + rho_u*tau*beta), entrywise.
pub fn gamma_from_beta(fading: &LargeScaleFading, rho_u: f64, tau: usize) -> Result<ChannelStats> {
    let k = fading.num_users();
    if tau < k {
        return Err(Error::config(alloc::format!(
            "pilot length tau={tau} cannot give {k} users mutually orthogonal pilots"
        )));
    }
    if !crate::math::is_positive(rho_u) {
        return Err(Error::config("rho_u must be positive"));
    }
    let m = fading.num_aps();
    let rho_tau = rho_u * tau as f64;
    let mut gamma = Mat::zeros(m, k);
    let mut err_var = Mat::zeros(m, k);
    for ap in 0..m {
        let beta_row = fading.beta.row(ap);
        for user in 0..k {
            let b = beta_row[user];
            let g = rho_tau * b * b / (1.0 + rho_tau * b);
            gamma[(ap, user)] = g;
            err_var[(ap, user)] = b - g;
        }
    }
    Ok(ChannelStats {
        gamma,
        err_var,
        tau,
    })
}

/// One draw of the MMSE estimate and estimation error.
#[derive(Clone, Debug)]
pub struct ChannelRealization {
    /// Estimate, entries CN(0, gamma_{m,k}).
    pub g_hat: CMat,
    /// Estimation error, entries CN(0, beta_{m,k} - gamma_{m,k}).
    pub g_tilde: CMat,
}

impl ChannelRealization {
    /// The true channel, estimate plus error.
    pub fn g(&self) -> CMat {
        CMat::from_fn(self.g_hat.rows(), self.g_hat.cols(), |m, k| {
            self.g_hat[(m, k)] + self.g_tilde[(m, k)]
        })
    }
}

/// Draw independent complex Gaussian matrices with the stats' variances.
pub fn draw_channel(stats: &ChannelStats, stream: &mut Stream) -> ChannelRealization {
    let (m, k) = (stats.num_aps(), stats.num_users());
    let mut g_hat = CMat::zeros(m, k);
    let mut g_tilde = CMat::zeros(m, k);
    for ap in 0..m {
        for user in 0..k {
            // CN(0, v): real and imaginary parts each N(0, v/2).
            let s_hat = sqrt(stats.gamma[(ap, user)] / 2.0);
            let (a, b) = stream.normal_pair();
            g_hat[(ap, user)] = C64::new(a * s_hat, b * s_hat);

            let s_err = sqrt(stats.err_var[(ap, user)] / 2.0);
            let (c, d) = stream.normal_pair();
            g_tilde[(ap, user)] = C64::new(c * s_err, d * s_err);
        }
    }
    ChannelRealization { g_hat, g_tilde }
}
