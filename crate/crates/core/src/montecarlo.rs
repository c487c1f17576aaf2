//! Experiment orchestration: draws large-scale realizations, evaluates each
//! requested configuration and power-control combination, pools the per-user
//! spectral-efficiency samples, and extracts percentile ("likely") rates.
//!
//! Each realization is a pure function of `(plan, index)`, so callers may
//! fan realizations out across threads and still reproduce a sequential run
//! sample for sample; pooling happens in index order either way.

use alloc::vec::Vec;

use crate::channel::{gamma_from_beta, ChannelStats};
use crate::error::Error;
use crate::geometry::{place_colocated, place_uniform_disk, Placement, Point2};
use crate::math::{se_from_sinr, KahanSum};
use crate::power_control::{full_power, maxmin_cf_mr, maxmin_cf_zf, maxmin_cl, SolverOptions};
use crate::propagation::{
    compute_rho_u, draw_beta, Deployment, LargeScaleFading, LinkBudget, MorphologyParams,
};
use crate::rng::{Stream, StreamPurpose};
use crate::sinr_mr::{
    mr_upper_bound, sinr_cf_mr, sinr_cl_mr, ConfigTag, Decoder, PowerControlVector, PowerTag,
    SinrReport,
};
use crate::sinr_zf::{estimate_zf_expectations, sinr_cf_zf, sinr_cl_zf, ZfExpectations};
use crate::Result;

/// Default percentiles reported by the harness: the 1st (99%-likely) and
/// the 5th (95%-likely).
pub const DEFAULT_PERCENTILES: [f64; 2] = [1.0, 5.0];

/// One configuration-power combination to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Configuration {
    pub tag: ConfigTag,
    pub power: PowerTag,
}

impl Configuration {
    pub fn new(tag: ConfigTag, power: PowerTag) -> Self {
        Configuration { tag, power }
    }
}

/// Full description of one experiment.
#[derive(Clone, Debug)]
pub struct ExperimentPlan {
    pub params: MorphologyParams,
    pub budget: LinkBudget,
    /// Service antennas.
    pub m: usize,
    /// User terminals.
    pub k: usize,
    /// Pilot length in symbols.
    pub tau: usize,
    pub configurations: Vec<Configuration>,
    /// Large-scale fading realizations.
    pub n_largescale: usize,
    /// Small-scale realizations per profile for the cf-ZF expectations.
    pub n_smallscale: usize,
    pub master_seed: u64,
    pub percentiles: Vec<f64>,
    pub solver: SolverOptions,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        compute_rho_u(&self.budget)?;
        if self.m < 1 || self.k < 1 {
            return Err(Error::config("need at least one antenna and one user"));
        }
        if self.tau < self.k {
            return Err(Error::config(alloc::format!(
                "pilot length tau={} must be at least K={}",
                self.tau,
                self.k
            )));
        }
        if self.configurations.is_empty() {
            return Err(Error::config("no configurations requested"));
        }
        if self.n_largescale < 1 {
            return Err(Error::config("need at least one large-scale realization"));
        }
        for cfg in &self.configurations {
            if cfg.power == PowerTag::Manual {
                return Err(Error::config("experiments run full or maxmin power only"));
            }
            if cfg.tag.decoder() == Decoder::Zf && self.m <= self.k {
                return Err(Error::ZfUnderdetermined {
                    m: self.m,
                    k: self.k,
                });
            }
            if cfg.tag == ConfigTag::CfZf && self.n_smallscale < 2 {
                return Err(Error::config(
                    "cf-ZF needs at least 2 small-scale realizations",
                ));
            }
        }
        for &p in &self.percentiles {
            if !(0.0 < p && p < 100.0) {
                return Err(Error::config(alloc::format!(
                    "percentile {p} outside (0, 100)"
                )));
            }
        }
        Ok(())
    }
}

/// Per-user results of one configuration within one realization.
#[derive(Clone, Debug)]
pub struct ConfigBlock {
    pub config: ConfigTag,
    pub power: PowerTag,
    pub sinr: Vec<f64>,
    pub se: Vec<f64>,
    pub eta: Vec<f64>,
    /// log2(1 + per-user MR cap); cell-free MR only.
    pub bound_se: Option<Vec<f64>>,
    /// log2(1 + min-over-users MR cap); cell-free MR only.
    pub maxmin_bound_se: Option<f64>,
}

impl ConfigBlock {
    fn from_report(report: SinrReport, power: PowerTag) -> Self {
        ConfigBlock {
            config: report.config,
            power,
            sinr: report.sinr,
            se: report.se,
            eta: report.eta,
            bound_se: None,
            maxmin_bound_se: None,
        }
    }
}

/// Everything produced by one large-scale realization.
#[derive(Clone, Debug)]
pub struct RealizationOutput {
    pub index: usize,
    pub blocks: Vec<ConfigBlock>,
}

/// Pooled samples and percentile values for one configuration.
#[derive(Clone, Debug)]
pub struct CdfSummary {
    pub config: ConfigTag,
    pub power: PowerTag,
    /// Pooled per-user SE samples, sorted ascending.
    pub samples: Vec<f64>,
    pub n_largescale: usize,
    pub num_users: usize,
    /// (percentile, SE) pairs for the plan's requested percentiles.
    pub percentile_values: Vec<(f64, f64)>,
    /// Pooled per-user bound SEs, sorted; cell-free MR only.
    pub bound_samples: Option<Vec<f64>>,
    /// Per-realization max-min cap SEs, sorted; cell-free MR only.
    pub maxmin_bound_samples: Option<Vec<f64>>,
}

impl CdfSummary {
    pub fn num_samples(&self) -> usize {
        self.samples.len()
    }
}

/// Empirical percentile by the lower-rank order statistic: the sample at
/// 1-based index ceil(p/100 * N) of the sorted pool.
pub fn rank_percentile(sorted: &[f64], percentile: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::EmptySamples);
    }
    if !(0.0 < percentile && percentile < 100.0) {
        return Err(Error::domain(alloc::format!(
            "percentile {percentile} outside (0, 100)"
        )));
    }
    let n = sorted.len();
    let rank = libm::ceil(percentile / 100.0 * n as f64) as usize;
    Ok(sorted[rank.clamp(1, n) - 1])
}

/// Percentile of a pooled summary; 99%-likely SE is the 1st percentile.
pub fn likely_rate(summary: &CdfSummary, percentile: f64) -> Result<f64> {
    rank_percentile(&summary.samples, percentile)
}

/// Throughput in bits/s delivered by a spectral efficiency over a bandwidth.
pub fn throughput_from_se(se_bps_hz: f64, uplink_bandwidth_hz: f64) -> f64 {
    se_bps_hz * uplink_bandwidth_hz
}

struct DeploymentCtx {
    fading: LargeScaleFading,
    stats: ChannelStats,
    zf_exp: Option<ZfExpectations>,
    bound_se: Option<Vec<f64>>,
    maxmin_bound_se: Option<f64>,
}

fn build_ctx(
    plan: &ExperimentPlan,
    index: usize,
    deployment: Deployment,
    users: &[Point2],
    rho_u: f64,
) -> Result<DeploymentCtx> {
    let params = plan.params.resolved_for(deployment);
    let aps = match deployment {
        Deployment::Cellular => place_colocated(plan.m, params.radius_m)?,
        Deployment::CellFree => {
            let mut stream =
                Stream::for_realization(plan.master_seed, index as u64, StreamPurpose::ApPlacement);
            place_uniform_disk(plan.m, params.radius_m, &mut stream)?
        }
    };
    let placement = Placement::new(
        aps,
        users.to_vec(),
        params.ap_height_m,
        params.terminal_height_m,
        params.radius_m,
    )?;

    let shadow_purpose = match deployment {
        Deployment::Cellular => StreamPurpose::ShadowingCellular,
        Deployment::CellFree => StreamPurpose::ShadowingCellFree,
    };
    let mut shadow_stream = Stream::for_realization(plan.master_seed, index as u64, shadow_purpose);
    let fading = draw_beta(&placement, &params, &mut shadow_stream)?;
    let stats = gamma_from_beta(&fading, rho_u, plan.tau)?;

    let needs = |decoder: Decoder| {
        plan.configurations
            .iter()
            .any(|c| c.tag.deployment() == deployment && c.tag.decoder() == decoder)
    };

    // The ZF expectations are the dominant cost; estimate them once per
    // realization and share them between full and max-min power.
    let zf_exp = if deployment == Deployment::CellFree && needs(Decoder::Zf) {
        let mut ss_stream =
            Stream::for_realization(plan.master_seed, index as u64, StreamPurpose::SmallScale);
        Some(estimate_zf_expectations(
            &stats,
            plan.n_smallscale,
            &mut ss_stream,
        )?)
    } else {
        None
    };

    let (bound_se, maxmin_bound_se) = if deployment == Deployment::CellFree && needs(Decoder::Mr) {
        let bound = mr_upper_bound(&stats.gamma)?;
        let per_user = bound.per_user.iter().map(|&b| se_from_sinr(b)).collect();
        (Some(per_user), Some(se_from_sinr(bound.min)))
    } else {
        (None, None)
    };

    Ok(DeploymentCtx {
        fading,
        stats,
        zf_exp,
        bound_se,
        maxmin_bound_se,
    })
}

/// Evaluate every planned configuration on one large-scale realization.
///
/// Pure in `(plan, index)`: the random streams are keyed by realization
/// index and draw purpose, so the output never depends on evaluation order
/// or on which other configurations the plan contains.
pub fn run_realization(plan: &ExperimentPlan, index: usize) -> Result<RealizationOutput> {
    let rho_u = compute_rho_u(&plan.budget)?;
    let mut user_stream =
        Stream::for_realization(plan.master_seed, index as u64, StreamPurpose::UserPlacement);
    let users = place_uniform_disk(plan.k, plan.params.radius_m, &mut user_stream)?;

    let mut cellular_ctx: Option<DeploymentCtx> = None;
    let mut cellfree_ctx: Option<DeploymentCtx> = None;
    for deployment in [Deployment::Cellular, Deployment::CellFree] {
        if plan
            .configurations
            .iter()
            .any(|c| c.tag.deployment() == deployment)
        {
            let ctx = build_ctx(plan, index, deployment, &users, rho_u)?;
            match deployment {
                Deployment::Cellular => cellular_ctx = Some(ctx),
                Deployment::CellFree => cellfree_ctx = Some(ctx),
            }
        }
    }

    let mut blocks = Vec::with_capacity(plan.configurations.len());
    for cfg in &plan.configurations {
        let ctx = match cfg.tag.deployment() {
            Deployment::Cellular => cellular_ctx.as_ref().expect("cellular context built"),
            Deployment::CellFree => cellfree_ctx.as_ref().expect("cell-free context built"),
        };
        let eta = power_vector(plan, cfg, ctx, rho_u)?;
        let report = evaluate(plan, cfg.tag, ctx, &eta, rho_u)?;
        let mut block = ConfigBlock::from_report(report, cfg.power);
        if cfg.tag == ConfigTag::CfMr {
            block.bound_se = ctx.bound_se.clone();
            block.maxmin_bound_se = ctx.maxmin_bound_se;
        }
        blocks.push(block);
    }

    Ok(RealizationOutput { index, blocks })
}

fn power_vector(
    plan: &ExperimentPlan,
    cfg: &Configuration,
    ctx: &DeploymentCtx,
    rho_u: f64,
) -> Result<PowerControlVector> {
    match cfg.power {
        PowerTag::Full => Ok(full_power(plan.k)),
        PowerTag::MaxMin => {
            let result = match cfg.tag {
                ConfigTag::ClMr | ConfigTag::ClZf => maxmin_cl(
                    cfg.tag.decoder(),
                    ctx.stats.user_gamma(),
                    ctx.fading.user_gains(),
                    plan.m,
                    rho_u,
                )?,
                ConfigTag::CfMr => {
                    maxmin_cf_mr(&ctx.stats.gamma, &ctx.fading.beta, rho_u, &plan.solver)?
                }
                ConfigTag::CfZf => {
                    let exp = ctx.zf_exp.as_ref().expect("cf-ZF expectations built");
                    maxmin_cf_zf(exp, rho_u, &plan.solver)?
                }
            };
            Ok(result.eta)
        }
        PowerTag::Manual => Err(Error::config("manual power has no solver")),
    }
}

fn evaluate(
    plan: &ExperimentPlan,
    tag: ConfigTag,
    ctx: &DeploymentCtx,
    eta: &PowerControlVector,
    rho_u: f64,
) -> Result<SinrReport> {
    match tag {
        ConfigTag::ClMr => sinr_cl_mr(
            ctx.stats.user_gamma(),
            ctx.fading.user_gains(),
            eta,
            plan.m,
            rho_u,
        ),
        ConfigTag::ClZf => sinr_cl_zf(
            ctx.stats.user_gamma(),
            ctx.fading.user_gains(),
            eta,
            plan.m,
            rho_u,
        ),
        ConfigTag::CfMr => sinr_cf_mr(&ctx.stats.gamma, &ctx.fading.beta, eta, rho_u),
        ConfigTag::CfZf => {
            let exp = ctx.zf_exp.as_ref().expect("cf-ZF expectations built");
            sinr_cf_zf(exp, eta, rho_u)
        }
    }
}

/// Pool per-realization outputs, in index order, into one summary per
/// configuration.
pub fn pool_outputs(
    plan: &ExperimentPlan,
    outputs: &[RealizationOutput],
) -> Result<Vec<CdfSummary>> {
    if outputs.len() != plan.n_largescale {
        return Err(Error::shape(alloc::format!(
            "expected {} realizations, got {}",
            plan.n_largescale,
            outputs.len()
        )));
    }
    for (position, out) in outputs.iter().enumerate() {
        if out.index != position {
            return Err(Error::shape("realization outputs out of order"));
        }
        if out.blocks.len() != plan.configurations.len() {
            return Err(Error::shape("realization missing configuration blocks"));
        }
    }

    let mut summaries = Vec::with_capacity(plan.configurations.len());
    for (ci, cfg) in plan.configurations.iter().enumerate() {
        let mut samples = Vec::with_capacity(plan.n_largescale * plan.k);
        let mut bound_samples: Option<Vec<f64>> = None;
        let mut maxmin_bound_samples: Option<Vec<f64>> = None;
        for out in outputs {
            let block = &out.blocks[ci];
            debug_assert_eq!(block.config, cfg.tag);
            samples.extend_from_slice(&block.se);
            if let Some(bounds) = &block.bound_se {
                bound_samples
                    .get_or_insert_with(Vec::new)
                    .extend_from_slice(bounds);
            }
            if let Some(cap) = block.maxmin_bound_se {
                maxmin_bound_samples.get_or_insert_with(Vec::new).push(cap);
            }
        }
        samples.sort_unstable_by(|a, b| a.partial_cmp(b).expect("SE samples are ordered"));
        if let Some(b) = &mut bound_samples {
            b.sort_unstable_by(|a, b| a.partial_cmp(b).expect("bound samples are ordered"));
        }
        if let Some(b) = &mut maxmin_bound_samples {
            b.sort_unstable_by(|a, b| a.partial_cmp(b).expect("bound samples are ordered"));
        }

        let percentile_values = plan
            .percentiles
            .iter()
            .map(|&p| rank_percentile(&samples, p).map(|v| (p, v)))
            .collect::<Result<Vec<_>>>()?;

        summaries.push(CdfSummary {
            config: cfg.tag,
            power: cfg.power,
            samples,
            n_largescale: plan.n_largescale,
            num_users: plan.k,
            percentile_values,
            bound_samples,
            maxmin_bound_samples,
        });
    }
    Ok(summaries)
}

/// Run the whole experiment sequentially.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<Vec<CdfSummary>> {
    plan.validate()?;
    let mut outputs = Vec::with_capacity(plan.n_largescale);
    for index in 0..plan.n_largescale {
        outputs.push(run_realization(plan, index)?);
    }
    pool_outputs(plan, &outputs)
}

/// Mean spectral efficiency of a summary; handy for coarse sanity checks.
pub fn mean_se(summary: &CdfSummary) -> f64 {
    let mut acc = KahanSum::new();
    for &s in &summary.samples {
        acc.add(s);
    }
    acc.value() / summary.samples.len().max(1) as f64
}

/// Convenience constructor covering the common single-deployment case.
#[allow(clippy::too_many_arguments)]
pub fn plan_for(
    params: MorphologyParams,
    deployment: Deployment,
    decoder: Decoder,
    powers: &[PowerTag],
    m: usize,
    k: usize,
    n_largescale: usize,
    n_smallscale: usize,
    master_seed: u64,
) -> ExperimentPlan {
    let tag = ConfigTag::new(deployment, decoder);
    ExperimentPlan {
        params,
        budget: LinkBudget::vehicle_default(),
        m,
        k,
        tau: k,
        configurations: powers.iter().map(|&p| Configuration::new(tag, p)).collect(),
        n_largescale,
        n_smallscale,
        master_seed,
        percentiles: DEFAULT_PERCENTILES.to_vec(),
        solver: SolverOptions::default(),
    }
}
