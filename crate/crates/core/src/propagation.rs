//! NLoS path loss, lognormal shadow fading, and the uplink link budget.
//!
//! The path-loss model is an empirical NLoS street-canyon fit that stays
//! valid at the short transmitter-receiver distances a distributed
//! deployment produces, where classic macro-cell models break down.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::Error;
use crate::geometry::Placement;
use crate::math::{db_to_linear, log10, watts_to_dbm};
use crate::rng::Stream;
use crate::Result;

/// Named propagation environments with pinned parameter sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Morphology {
    Urban,
    Suburban,
    Rural,
    Custom,
}

impl fmt::Display for Morphology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Morphology::Urban => "urban",
            Morphology::Suburban => "suburban",
            Morphology::Rural => "rural",
            Morphology::Custom => "custom",
        };
        f.write_str(name)
    }
}

impl core::str::FromStr for Morphology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "urban" => Ok(Morphology::Urban),
            "suburban" => Ok(Morphology::Suburban),
            "rural" => Ok(Morphology::Rural),
            other => Err(Error::config(alloc::format!(
                "unknown morphology `{other}` (expected urban, suburban, or rural)"
            ))),
        }
    }
}

/// Whether the service antennas are co-located on one tower or spread over
/// the region as single-antenna access points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Deployment {
    Cellular,
    CellFree,
}

impl fmt::Display for Deployment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Deployment::Cellular => "cellular",
            Deployment::CellFree => "cellfree",
        })
    }
}

impl core::str::FromStr for Deployment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cellular" => Ok(Deployment::Cellular),
            "cellfree" | "cell-free" => Ok(Deployment::CellFree),
            other => Err(Error::config(alloc::format!(
                "unknown deployment `{other}` (expected cellular or cellfree)"
            ))),
        }
    }
}

/// Propagation and region parameters for one environment.
///
/// `ap_height_m` is the height the path-loss model sees; cellular runs
/// substitute the taller tower height via [`MorphologyParams::resolved_for`].
#[derive(Clone, Debug, PartialEq)]
pub struct MorphologyParams {
    pub tag: Morphology,
    /// Street width W, meters.
    pub street_width_m: f64,
    /// Average building height h, meters.
    pub building_height_m: f64,
    /// Access-point antenna height, meters.
    pub ap_height_m: f64,
    /// Co-located tower height used for cellular runs, meters.
    pub bs_tower_height_m: f64,
    /// User terminal antenna height, meters.
    pub terminal_height_m: f64,
    /// Carrier frequency, GHz.
    pub carrier_ghz: f64,
    /// Lognormal shadow-fading standard deviation, dB.
    pub shadow_sigma_db: f64,
    /// Service disk radius, meters.
    pub radius_m: f64,
}

impl MorphologyParams {
    /// Pinned parameter set for a named environment.
    pub fn preset(tag: Morphology) -> Self {
        match tag {
            Morphology::Urban => MorphologyParams {
                tag,
                street_width_m: 20.0,
                building_height_m: 20.0,
                ap_height_m: 20.0,
                bs_tower_height_m: 50.0,
                terminal_height_m: 1.5,
                carrier_ghz: 2.0,
                shadow_sigma_db: 6.0,
                radius_m: 500.0,
            },
            Morphology::Suburban => MorphologyParams {
                tag,
                street_width_m: 20.0,
                building_height_m: 10.0,
                ap_height_m: 20.0,
                bs_tower_height_m: 50.0,
                terminal_height_m: 1.5,
                carrier_ghz: 2.0,
                shadow_sigma_db: 8.0,
                radius_m: 1000.0,
            },
            Morphology::Rural => MorphologyParams {
                tag,
                street_width_m: 20.0,
                building_height_m: 5.0,
                ap_height_m: 40.0,
                bs_tower_height_m: 50.0,
                terminal_height_m: 1.5,
                carrier_ghz: 0.45,
                shadow_sigma_db: 8.0,
                radius_m: 4000.0,
            },
            Morphology::Custom => panic!("custom morphologies are built field by field"),
        }
    }

    /// Copy with the antenna height the given deployment actually uses.
    pub fn resolved_for(&self, deployment: Deployment) -> Self {
        let mut p = self.clone();
        if deployment == Deployment::Cellular {
            p.ap_height_m = self.bs_tower_height_m;
        }
        p
    }

    pub fn validate(&self) -> Result<()> {
        let lengths = [
            ("street width", self.street_width_m),
            ("building height", self.building_height_m),
            ("AP height", self.ap_height_m),
            ("tower height", self.bs_tower_height_m),
            ("terminal height", self.terminal_height_m),
            ("radius", self.radius_m),
        ];
        for (name, v) in lengths {
            if !crate::math::is_positive(v) {
                return Err(Error::config(alloc::format!("{name} must be positive")));
            }
        }
        if !crate::math::is_positive(self.carrier_ghz) {
            return Err(Error::config("carrier frequency must be positive"));
        }
        if self.shadow_sigma_db < 0.0 {
            return Err(Error::config("shadow sigma must be nonnegative"));
        }
        Ok(())
    }
}

/// Stated validity range of the path-loss fit, meters.
pub const PATH_LOSS_MIN_VALID_M: f64 = 10.0;
pub const PATH_LOSS_MAX_VALID_M: f64 = 5000.0;

/// NLoS path loss in dB at 3-D distance `d_m`.
///
/// Returns the loss and whether `d_m` lies inside the model's stated
/// validity range; out-of-range distances are evaluated unchanged and
/// flagged rather than rejected.
pub fn path_loss_db(d_m: f64, params: &MorphologyParams) -> Result<(f64, bool)> {
    if !crate::math::is_positive(d_m) {
        return Err(Error::domain("path loss needs a positive distance"));
    }
    let w = params.street_width_m;
    let h = params.building_height_m;
    let h_ap = params.ap_height_m;
    let h_at = params.terminal_height_m;
    let f_c = params.carrier_ghz;

    let height_ratio = h / h_ap;
    let terminal_term = 3.2 * log10(11.75 * h_at) * log10(11.75 * h_at) - 4.97;
    let loss = 161.04 - 7.1 * log10(w) + 7.5 * log10(h)
        - (24.37 - 3.7 * height_ratio * height_ratio) * log10(h_ap)
        + (43.42 - 3.1 * log10(h_ap)) * (log10(d_m) - 3.0)
        + 20.0 * log10(f_c)
        - terminal_term;

    let in_range = (PATH_LOSS_MIN_VALID_M..=PATH_LOSS_MAX_VALID_M).contains(&d_m);
    Ok((loss, in_range))
}

/// Terminal transmit capability and receiver noise budget.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkBudget {
    pub tx_power_w: f64,
    pub total_bandwidth_hz: f64,
    pub noise_figure_db: f64,
    pub tx_antenna_gain_dbi: f64,
    pub rx_antenna_gain_dbi: f64,
}

impl LinkBudget {
    /// 2 W terminal, 20 MHz total band, 9 dB noise figure, 0 dBi antennas.
    pub fn vehicle_default() -> Self {
        LinkBudget {
            tx_power_w: 2.0,
            total_bandwidth_hz: 20e6,
            noise_figure_db: 9.0,
            tx_antenna_gain_dbi: 0.0,
            rx_antenna_gain_dbi: 0.0,
        }
    }

    /// Normalized uplink SNR in linear scale.
    pub fn rho_u(&self) -> Result<f64> {
        compute_rho_u(self)
    }
}

/// Thermal noise density at the reference temperature, dBm/Hz.
const NOISE_DENSITY_DBM_HZ: f64 = -174.0;

/// Normalized uplink SNR: transmit power over noise power across the full
/// band, before any path loss.
pub fn compute_rho_u(budget: &LinkBudget) -> Result<f64> {
    if !crate::math::is_positive(budget.tx_power_w) {
        return Err(Error::config("transmit power must be positive"));
    }
    if !crate::math::is_positive(budget.total_bandwidth_hz) {
        return Err(Error::config("bandwidth must be positive"));
    }
    let noise_dbm =
        NOISE_DENSITY_DBM_HZ + 10.0 * log10(budget.total_bandwidth_hz) + budget.noise_figure_db;
    let rho_db =
        watts_to_dbm(budget.tx_power_w) + budget.tx_antenna_gain_dbi + budget.rx_antenna_gain_dbi
            - noise_dbm;
    Ok(db_to_linear(rho_db))
}

/// Per-link bit flags, packed.
#[derive(Clone, Debug, Default)]
pub struct LinkFlags {
    cols: usize,
    bits: Vec<u64>,
    count: usize,
}

impl LinkFlags {
    fn new(rows: usize, cols: usize) -> Self {
        LinkFlags {
            cols,
            bits: vec![0u64; (rows * cols).div_ceil(64)],
            count: 0,
        }
    }

    fn set(&mut self, m: usize, k: usize) {
        let idx = m * self.cols + k;
        let word = idx / 64;
        let mask = 1u64 << (idx % 64);
        if self.bits[word] & mask == 0 {
            self.bits[word] |= mask;
            self.count += 1;
        }
    }

    pub fn get(&self, m: usize, k: usize) -> bool {
        let idx = m * self.cols + k;
        self.bits[idx / 64] & (1u64 << (idx % 64)) != 0
    }

    pub fn count(&self) -> usize {
        self.count
    }
}

/// One realization of the large-scale fading profile.
#[derive(Clone, Debug)]
pub struct LargeScaleFading {
    /// M-by-K linear power gains.
    pub beta: crate::linalg::Mat,
    pub placement: Placement,
    pub params: MorphologyParams,
    /// Links whose distance fell outside the path-loss validity range.
    pub out_of_range: LinkFlags,
}

impl LargeScaleFading {
    #[inline]
    pub fn num_aps(&self) -> usize {
        self.beta.rows()
    }

    #[inline]
    pub fn num_users(&self) -> usize {
        self.beta.cols()
    }

    /// Per-user gains seen from the (co-located) tower; row 0 by the
    /// identical-rows invariant.
    pub fn user_gains(&self) -> &[f64] {
        self.beta.row(0)
    }
}

/// Draw the large-scale fading matrix for one placement.
///
/// Shadow fading is i.i.d. lognormal per AP-user link. When the antennas are
/// co-located every row sees the same propagation path, so a single shadow
/// value is drawn per user and replicated, keeping rows identical.
pub fn draw_beta(
    placement: &Placement,
    params: &MorphologyParams,
    stream: &mut Stream,
) -> Result<LargeScaleFading> {
    params.validate()?;
    let m = placement.num_aps();
    let k = placement.num_users();
    let sigma = params.shadow_sigma_db;
    let mut beta = crate::linalg::Mat::zeros(m, k);
    let mut flags = LinkFlags::new(m, k);

    if placement.is_colocated() {
        let mut row = Vec::with_capacity(k);
        for user in 0..k {
            let d = placement.link_distance_m(0, user);
            let (loss_db, in_range) = path_loss_db(d, params)?;
            let shadow_db = sigma * stream.normal();
            row.push(db_to_linear(-loss_db + shadow_db));
            if !in_range {
                for ap in 0..m {
                    flags.set(ap, user);
                }
            }
        }
        for ap in 0..m {
            beta.row_mut(ap).copy_from_slice(&row);
        }
    } else {
        for ap in 0..m {
            for user in 0..k {
                let d = placement.link_distance_m(ap, user);
                let (loss_db, in_range) = path_loss_db(d, params)?;
                let shadow_db = sigma * stream.normal();
                beta[(ap, user)] = db_to_linear(-loss_db + shadow_db);
                if !in_range {
                    flags.set(ap, user);
                }
            }
        }
    }

    Ok(LargeScaleFading {
        beta,
        placement: placement.clone(),
        params: params.clone(),
        out_of_range: flags,
    })
}
