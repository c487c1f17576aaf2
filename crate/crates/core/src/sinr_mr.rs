//! Closed-form effective SINR for maximum-ratio decoding, single-cell and
//! cell-free, plus the Cauchy-Schwarz upper bounds that cap what any uplink
//! power control can achieve under cell-free MR.

use alloc::vec::Vec;
use core::fmt;

use crate::error::Error;
use crate::linalg::Mat;
use crate::math::se_from_sinr;
use crate::propagation::Deployment;
use crate::Result;

/// Receiver combining strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decoder {
    Mr,
    Zf,
}

impl fmt::Display for Decoder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decoder::Mr => "mr",
            Decoder::Zf => "zf",
        })
    }
}

impl core::str::FromStr for Decoder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mr" => Ok(Decoder::Mr),
            "zf" => Ok(Decoder::Zf),
            other => Err(Error::config(alloc::format!(
                "unknown decoder `{other}` (expected mr or zf)"
            ))),
        }
    }
}

/// Deployment-decoder pair naming one of the four system configurations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConfigTag {
    ClMr,
    ClZf,
    CfMr,
    CfZf,
}

impl ConfigTag {
    pub fn new(deployment: Deployment, decoder: Decoder) -> Self {
        match (deployment, decoder) {
            (Deployment::Cellular, Decoder::Mr) => ConfigTag::ClMr,
            (Deployment::Cellular, Decoder::Zf) => ConfigTag::ClZf,
            (Deployment::CellFree, Decoder::Mr) => ConfigTag::CfMr,
            (Deployment::CellFree, Decoder::Zf) => ConfigTag::CfZf,
        }
    }

    pub fn deployment(self) -> Deployment {
        match self {
            ConfigTag::ClMr | ConfigTag::ClZf => Deployment::Cellular,
            ConfigTag::CfMr | ConfigTag::CfZf => Deployment::CellFree,
        }
    }

    pub fn decoder(self) -> Decoder {
        match self {
            ConfigTag::ClMr | ConfigTag::CfMr => Decoder::Mr,
            ConfigTag::ClZf | ConfigTag::CfZf => Decoder::Zf,
        }
    }
}

impl fmt::Display for ConfigTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConfigTag::ClMr => "cl-MR",
            ConfigTag::ClZf => "cl-ZF",
            ConfigTag::CfMr => "cf-MR",
            ConfigTag::CfZf => "cf-ZF",
        })
    }
}

/// How the power-control vector was chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PowerTag {
    Full,
    MaxMin,
    Manual,
}

impl fmt::Display for PowerTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PowerTag::Full => "full",
            PowerTag::MaxMin => "maxmin",
            PowerTag::Manual => "manual",
        })
    }
}

/// Per-user uplink power coefficients, each in [0, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct PowerControlVector {
    eta: Vec<f64>,
    tag: PowerTag,
}

impl PowerControlVector {
    /// Every terminal at full power.
    pub fn full(k: usize) -> Self {
        PowerControlVector {
            eta: alloc::vec![1.0; k],
            tag: PowerTag::Full,
        }
    }

    pub fn new(eta: Vec<f64>, tag: PowerTag) -> Result<Self> {
        if eta.is_empty() {
            return Err(Error::config("power control vector cannot be empty"));
        }
        for (k, &e) in eta.iter().enumerate() {
            if !(0.0..=1.0).contains(&e) || !e.is_finite() {
                return Err(Error::domain(alloc::format!(
                    "eta[{k}] = {e} outside [0, 1]"
                )));
            }
        }
        Ok(PowerControlVector { eta, tag })
    }

    /// Arbitrary coefficients, e.g. for property checks.
    pub fn manual(eta: Vec<f64>) -> Result<Self> {
        Self::new(eta, PowerTag::Manual)
    }

    #[inline]
    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.eta.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }

    #[inline]
    pub fn tag(&self) -> PowerTag {
        self.tag
    }
}

/// Per-user SINR and spectral efficiency for one configuration.
#[derive(Clone, Debug)]
pub struct SinrReport {
    pub config: ConfigTag,
    pub power: PowerTag,
    /// Linear SINR per user.
    pub sinr: Vec<f64>,
    /// log2(1 + sinr) per user, bits/s/Hz.
    pub se: Vec<f64>,
    /// The power coefficients the SINRs were evaluated at.
    pub eta: Vec<f64>,
}

impl SinrReport {
    pub fn from_sinr(config: ConfigTag, eta: &PowerControlVector, sinr: Vec<f64>) -> Self {
        let se = sinr.iter().map(|&s| se_from_sinr(s)).collect();
        SinrReport {
            config,
            power: eta.tag(),
            sinr,
            se,
            eta: eta.eta().to_vec(),
        }
    }

    pub fn num_users(&self) -> usize {
        self.sinr.len()
    }

    pub fn min_se(&self) -> f64 {
        self.se.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn check_same_len(name: &str, len: usize, expected: usize) -> Result<()> {
    if len != expected {
        return Err(Error::shape(alloc::format!(
            "{name}: length {len}, expected {expected}"
        )));
    }
    Ok(())
}

/// Single-cell MR effective SINR:
/// sinr_k = M rho γ_k η_k / (1 + rho Σ_k' β_k' η_k').
pub fn sinr_cl_mr(
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
    check_same_len("beta", beta_k.len(), k)?;
    check_same_len("eta", eta.len(), k)?;

    let interference: f64 = beta_k
        .iter()
        .zip(eta.eta())
        .map(|(b, e)| b * e)
        .sum::<f64>()
        * rho_u;
    let denom = 1.0 + interference;
    let sinr = gamma_k
        .iter()
        .zip(eta.eta())
        .map(|(g, e)| m as f64 * rho_u * g * e / denom)
        .collect();
    Ok(SinrReport::from_sinr(ConfigTag::ClMr, eta, sinr))
}

/// Cell-free MR effective SINR:
/// sinr_k = rho (Σ_m γ_mk)^2 η_k / [Σ_m γ_mk + rho Σ_k' η_k' Σ_m γ_mk β_mk'].
pub fn sinr_cf_mr(
    gamma: &Mat,
    beta: &Mat,
    eta: &PowerControlVector,
    rho_u: f64,
) -> Result<SinrReport> {
    if !gamma.same_shape(beta) {
        return Err(Error::shape("gamma and beta dimensions differ"));
    }
    let k = gamma.cols();
    check_same_len("eta", eta.len(), k)?;

    let gamma_sums = gamma.col_sums();
    // cross[k][k'] = <gamma_k, beta_k'>, accumulated row by row.
    let cross = gamma_beta_cross(gamma, beta);

    let mut sinr = Vec::with_capacity(k);
    for user in 0..k {
        let mut interference = 0.0;
        for (other, &e) in eta.eta().iter().enumerate() {
            interference += e * cross[(user, other)];
        }
        let denom = gamma_sums[user] + rho_u * interference;
        let num = rho_u * gamma_sums[user] * gamma_sums[user] * eta.eta()[user];
        sinr.push(num / denom);
    }
    Ok(SinrReport::from_sinr(ConfigTag::CfMr, eta, sinr))
}

/// K-by-K matrix of inner products `<gamma_k, beta_k'>`.
pub(crate) fn gamma_beta_cross(gamma: &Mat, beta: &Mat) -> Mat {
    let k = gamma.cols();
    let mut cross = Mat::zeros(k, k);
    for ap in 0..gamma.rows() {
        let g_row = gamma.row(ap);
        let b_row = beta.row(ap);
        for (i, &gi) in g_row.iter().enumerate() {
            let cross_row = cross.row_mut(i);
            for (acc, &b) in cross_row.iter_mut().zip(b_row) {
                *acc += gi * b;
            }
        }
    }
    cross
}

/// Power-control-independent caps on the cell-free MR SINR.
#[derive(Clone, Debug)]
pub struct MrBound {
    /// Per-user cap (Σ_m γ_mk)^2 / Σ_m γ_mk^2.
    pub per_user: Vec<f64>,
    /// Cap on any common SINR achieved by max-min power control.
    pub min: f64,
}

/// The squared normalized-column inner product with the all-ones vector.
///
/// By Cauchy-Schwarz it lies in [1, M]: M when the user's gains are equal
/// across APs (the co-located case), 1 when a single AP dominates, which is
/// why cell-free MR cannot be rescued by adding more APs.
pub fn mr_upper_bound(gamma: &Mat) -> Result<MrBound> {
    let sums = gamma.col_sums();
    let sums_sq = gamma.col_sums_sq();
    let mut per_user = Vec::with_capacity(gamma.cols());
    for user in 0..gamma.cols() {
        if sums_sq[user] <= 0.0 {
            return Err(Error::domain(alloc::format!(
                "gamma column {user} is identically zero"
            )));
        }
        per_user.push(sums[user] * sums[user] / sums_sq[user]);
    }
    let min = per_user.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(MrBound { per_user, min })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::fabs;
    use crate::rng::Stream;

    #[test]
    fn single_user_reduction() {
        let rho = 2.5;
        let beta = [0.8];
        let eta = PowerControlVector::full(1);
        let report = sinr_cl_mr(&beta, &beta, &eta, 64, rho).unwrap();
        let expected = 64.0 * rho * 0.8 / (1.0 + rho * 0.8);
        assert!(fabs(report.sinr[0] - expected) < 1e-12);
        assert_eq!(report.config, ConfigTag::ClMr);
        assert_eq!(report.power, PowerTag::Full);
    }

    #[test]
    fn zero_power_means_zero_sinr() {
        let eta = PowerControlVector::manual(alloc::vec![0.0; 3]).unwrap();
        let gamma = [0.1, 0.2, 0.3];
        let beta = [0.2, 0.3, 0.4];
        let report = sinr_cl_mr(&gamma, &beta, &eta, 32, 1.0).unwrap();
        assert!(report.sinr.iter().all(|&s| s == 0.0));
        assert!(report.se.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn se_is_log2_one_plus_sinr() {
        let eta = PowerControlVector::full(2);
        let report = sinr_cl_mr(&[0.5, 0.25], &[0.5, 0.25], &eta, 16, 4.0).unwrap();
        for (s, se) in report.sinr.iter().zip(&report.se) {
            assert_eq!(*se, crate::math::log2(1.0 + s));
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let eta = PowerControlVector::full(2);
        assert!(sinr_cl_mr(&[0.1], &[0.1, 0.2], &eta, 8, 1.0).is_err());
        assert!(sinr_cl_mr(
            &[0.1, 0.2],
            &[0.1, 0.2],
            &PowerControlVector::full(3),
            8,
            1.0
        )
        .is_err());
    }

    #[test]
    fn eta_outside_unit_interval_rejected() {
        assert!(PowerControlVector::manual(alloc::vec![0.5, 1.2]).is_err());
        assert!(PowerControlVector::manual(alloc::vec![-0.1]).is_err());
        assert!(PowerControlVector::manual(alloc::vec![]).is_err());
    }

    #[test]
    fn mean_sinr_bounded_by_m_over_k() {
        // Any power control keeps the arithmetic mean of the single-cell MR
        // SINRs below M/K.
        let mut s = Stream::from_seed(31);
        let m = 96;
        for _ in 0..1000 {
            let k = 2 + (s.uniform() * 6.0) as usize;
            let beta: Vec<f64> = (0..k).map(|_| crate::math::exp(4.0 * s.normal())).collect();
            let gamma: Vec<f64> = beta.iter().map(|b| b * (0.3 + 0.7 * s.uniform())).collect();
            let eta = PowerControlVector::manual((0..k).map(|_| s.uniform()).collect()).unwrap();
            let rho = crate::math::exp(3.0 * s.normal());
            let report = sinr_cl_mr(&gamma, &beta, &eta, m, rho).unwrap();
            let mean = report.sinr.iter().sum::<f64>() / k as f64;
            assert!(
                mean <= m as f64 / k as f64 + 1e-9,
                "mean {mean} exceeds {}",
                m as f64 / k as f64
            );
        }
    }

    fn random_instance(seed: u64, m: usize, k: usize) -> (Mat, Mat) {
        let mut s = Stream::from_seed(seed);
        let beta = Mat::from_fn(m, k, |_, _| crate::math::exp(2.0 * s.normal()) * 1e-10);
        let gamma = Mat::from_fn(m, k, |r, c| beta[(r, c)] * (0.2 + 0.8 * s.uniform()));
        (gamma, beta)
    }

    #[test]
    fn colocated_cf_mr_reduces_to_cl_mr() {
        // Identical rows collapse the cell-free formula to the single-cell
        // one: numerator M^2 γ_k^2, denominator M γ_k (1 + ρ Σ η β).
        let mut s = Stream::from_seed(32);
        let k = 5;
        let m = 24;
        let beta_row: Vec<f64> = (0..k)
            .map(|_| crate::math::exp(s.normal()) * 1e-10)
            .collect();
        let gamma_row: Vec<f64> = beta_row.iter().map(|b| b * 0.9).collect();
        let beta = Mat::from_fn(m, k, |_, c| beta_row[c]);
        let gamma = Mat::from_fn(m, k, |_, c| gamma_row[c]);
        let eta = PowerControlVector::manual((0..k).map(|_| s.uniform()).collect()).unwrap();
        let rho = 5e9;

        let cf = sinr_cf_mr(&gamma, &beta, &eta, rho).unwrap();
        let cl = sinr_cl_mr(&gamma_row, &beta_row, &eta, m, rho).unwrap();
        for user in 0..k {
            let rel = fabs(cf.sinr[user] - cl.sinr[user]) / cl.sinr[user].max(1e-300);
            assert!(
                rel < 1e-12,
                "user {user}: cf {} vs cl {}",
                cf.sinr[user],
                cl.sinr[user]
            );
        }
    }

    #[test]
    fn single_antenna_collapse() {
        let (gamma, beta) = random_instance(33, 1, 4);
        let eta = PowerControlVector::full(4);
        let rho = 1e11;
        let report = sinr_cf_mr(&gamma, &beta, &eta, rho).unwrap();
        for user in 0..4 {
            let g = gamma[(0, user)];
            let interference: f64 = (0..4).map(|o| beta[(0, o)]).sum();
            let expected = rho * g * g / (g + rho * g * interference);
            assert!(fabs(report.sinr[user] - expected) < 1e-12 * expected);
        }
    }

    #[test]
    fn cf_mr_stays_below_upper_bound() {
        let (gamma, beta) = random_instance(34, 40, 6);
        let eta = PowerControlVector::full(6);
        let report = sinr_cf_mr(&gamma, &beta, &eta, 3.16e12).unwrap();
        let bound = mr_upper_bound(&gamma).unwrap();
        for user in 0..6 {
            assert!(report.sinr[user] < bound.per_user[user]);
        }
        assert!(bound.min <= bound.per_user.iter().copied().fold(f64::INFINITY, f64::min) + 1e-15);
    }

    #[test]
    fn bound_equals_m_for_equal_gains() {
        let gamma = Mat::from_fn(50, 3, |_, _| 2.5e-11);
        let bound = mr_upper_bound(&gamma).unwrap();
        for b in &bound.per_user {
            assert!(fabs(b - 50.0) < 1e-9);
        }
    }

    #[test]
    fn bound_equals_one_for_single_dominant_ap() {
        let gamma = Mat::from_fn(30, 2, |r, _| if r == 7 { 1e-9 } else { 0.0 });
        let bound = mr_upper_bound(&gamma).unwrap();
        for b in &bound.per_user {
            assert!(fabs(b - 1.0) < 1e-12);
        }
    }

    #[test]
    fn bound_three_four_column() {
        // Column [3, 4, 0, ...]: (3+4)^2 / (9+16) = 1.96.
        let gamma = Mat::from_fn(8, 1, |r, _| match r {
            0 => 3.0,
            1 => 4.0,
            _ => 0.0,
        });
        let bound = mr_upper_bound(&gamma).unwrap();
        assert!(fabs(bound.per_user[0] - 1.96) < 1e-12);
    }

    #[test]
    fn bound_rejects_zero_column() {
        let gamma = Mat::zeros(4, 2);
        assert!(mr_upper_bound(&gamma).is_err());
    }

    #[test]
    fn cl_mr_formula_value_under_eta_scaling() {
        // Scaling eta is not monotone in general; assert the formula value.
        let gamma = [2e-11, 5e-11];
        let beta = [3e-11, 6e-11];
        let rho = 1e12;
        let m = 40;
        for &c in &[0.25, 0.5, 1.0] {
            let eta = PowerControlVector::manual(alloc::vec![c, c]).unwrap();
            let report = sinr_cl_mr(&gamma, &beta, &eta, m, rho).unwrap();
            for (user, &g) in gamma.iter().enumerate() {
                let expected = m as f64 * rho * g * c / (1.0 + rho * c * (beta[0] + beta[1]));
                assert!(fabs(report.sinr[user] - expected) < 1e-12 * expected);
            }
        }
    }
}
