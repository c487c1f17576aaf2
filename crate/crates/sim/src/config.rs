//! Scenario configuration: JSON file schema, command-line overrides, and
//! conversion into an executable experiment plan.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use mmimo::montecarlo::{Configuration, ExperimentPlan, DEFAULT_PERCENTILES};
use mmimo::power_control::SolverOptions;
use mmimo::prelude::{
    ConfigTag, Decoder, Deployment, LinkBudget, Morphology, MorphologyParams, PowerTag,
};
use serde::Deserialize;

/// Which power-control strategies a run evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PowerChoice {
    Full,
    MaxMin,
    Both,
}

impl PowerChoice {
    pub fn tags(self) -> Vec<PowerTag> {
        match self {
            PowerChoice::Full => vec![PowerTag::Full],
            PowerChoice::MaxMin => vec![PowerTag::MaxMin],
            PowerChoice::Both => vec![PowerTag::Full, PowerTag::MaxMin],
        }
    }
}

impl fmt::Display for PowerChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PowerChoice::Full => "full",
            PowerChoice::MaxMin => "maxmin",
            PowerChoice::Both => "both",
        })
    }
}

impl FromStr for PowerChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "full" => Ok(PowerChoice::Full),
            "maxmin" => Ok(PowerChoice::MaxMin),
            "both" => Ok(PowerChoice::Both),
            other => Err(format!(
                "unknown power strategy `{other}` (expected full, maxmin, or both)"
            )),
        }
    }
}

/// Explicit propagation parameters accepted in the config file in place of a
/// named morphology preset.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomMorphology {
    pub street_width_m: f64,
    pub building_height_m: f64,
    pub ap_height_m: f64,
    #[serde(default = "default_tower_height")]
    pub bs_tower_height_m: f64,
    pub terminal_height_m: f64,
    pub carrier_ghz: f64,
    pub shadow_sigma_db: f64,
    pub radius_m: f64,
}

fn default_tower_height() -> f64 {
    50.0
}

impl CustomMorphology {
    fn into_params(self) -> MorphologyParams {
        MorphologyParams {
            tag: Morphology::Custom,
            street_width_m: self.street_width_m,
            building_height_m: self.building_height_m,
            ap_height_m: self.ap_height_m,
            bs_tower_height_m: self.bs_tower_height_m,
            terminal_height_m: self.terminal_height_m,
            carrier_ghz: self.carrier_ghz,
            shadow_sigma_db: self.shadow_sigma_db,
            radius_m: self.radius_m,
        }
    }
}

/// The configuration file schema; every field is optional so the file only
/// needs to state what differs from the defaults.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub morphology: Option<String>,
    pub custom_morphology: Option<CustomMorphology>,
    pub deployment: Option<String>,
    pub decoder: Option<String>,
    pub power: Option<PowerChoice>,
    pub m: Option<usize>,
    pub k: Option<usize>,
    pub tau: Option<usize>,
    pub tx_power_w: Option<f64>,
    pub bandwidth_hz: Option<f64>,
    pub noise_figure_db: Option<f64>,
    pub tx_gain_dbi: Option<f64>,
    pub rx_gain_dbi: Option<f64>,
    pub n_largescale: Option<usize>,
    pub n_smallscale: Option<usize>,
    pub seed: Option<u64>,
    pub percentiles: Option<Vec<f64>>,
    pub solver_tol: Option<f64>,
    pub solver_max_iterations: Option<usize>,
    pub out: Option<PathBuf>,
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub morphology: Option<String>,
    pub deployment: Option<String>,
    pub decoder: Option<String>,
    pub power: Option<PowerChoice>,
    pub m: Option<usize>,
    pub k: Option<usize>,
    pub tau: Option<usize>,
    pub n_largescale: Option<usize>,
    pub n_smallscale: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

/// Fully resolved scenario, ready to run and to echo into output headers.
#[derive(Clone, Debug)]
pub struct ScenarioConfig {
    pub params: MorphologyParams,
    pub deployment: Deployment,
    pub decoder: Decoder,
    pub power: PowerChoice,
    pub m: usize,
    pub k: usize,
    pub tau: usize,
    pub budget: LinkBudget,
    pub n_largescale: usize,
    pub n_smallscale: usize,
    pub seed: u64,
    pub percentiles: Vec<f64>,
    pub solver: SolverOptions,
    pub out: PathBuf,
}

/// A configuration problem; maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "configuration error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn parse<T: FromStr>(what: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| ConfigError(format!("{what}: {e}")))
}

impl ScenarioConfig {
    /// Merge defaults, the optional config file, and flag overrides; flags
    /// win over the file, the file wins over defaults.
    pub fn resolve(file: Option<&ConfigFile>, flags: &Overrides) -> Result<Self, ConfigError> {
        let empty = ConfigFile::default();
        let file = file.unwrap_or(&empty);

        let morphology_name = flags.morphology.clone().or_else(|| file.morphology.clone());
        let params = match (&morphology_name, &file.custom_morphology) {
            (Some(name), _) => {
                let tag: Morphology = parse("morphology", name)?;
                MorphologyParams::preset(tag)
            }
            (None, Some(custom)) => custom.clone().into_params(),
            (None, None) => {
                return Err(ConfigError(
                    "no morphology given (set `morphology` or `custom_morphology`)".into(),
                ))
            }
        };
        params.validate().map_err(|e| ConfigError(e.to_string()))?;

        let deployment: Deployment = parse(
            "deployment",
            flags
                .deployment
                .as_deref()
                .or(file.deployment.as_deref())
                .unwrap_or("cellfree"),
        )?;
        let decoder: Decoder = parse(
            "decoder",
            flags
                .decoder
                .as_deref()
                .or(file.decoder.as_deref())
                .unwrap_or("zf"),
        )?;
        let power = flags.power.or(file.power).unwrap_or(PowerChoice::Both);

        let m = flags
            .m
            .or(file.m)
            .ok_or_else(|| ConfigError("number of service antennas M not given".into()))?;
        let k = flags.k.or(file.k).unwrap_or(18);
        let tau = flags.tau.or(file.tau).unwrap_or(k);

        let budget = LinkBudget {
            tx_power_w: file.tx_power_w.unwrap_or(2.0),
            total_bandwidth_hz: file.bandwidth_hz.unwrap_or(20e6),
            noise_figure_db: file.noise_figure_db.unwrap_or(9.0),
            tx_antenna_gain_dbi: file.tx_gain_dbi.unwrap_or(0.0),
            rx_antenna_gain_dbi: file.rx_gain_dbi.unwrap_or(0.0),
        };

        let solver_defaults = SolverOptions::default();
        let config = ScenarioConfig {
            params,
            deployment,
            decoder,
            power,
            m,
            k,
            tau,
            budget,
            n_largescale: flags.n_largescale.or(file.n_largescale).unwrap_or(1000),
            n_smallscale: flags.n_smallscale.or(file.n_smallscale).unwrap_or(200),
            seed: flags.seed.or(file.seed).unwrap_or(1),
            percentiles: file
                .percentiles
                .clone()
                .unwrap_or_else(|| DEFAULT_PERCENTILES.to_vec()),
            solver: SolverOptions {
                tol: file.solver_tol.unwrap_or(solver_defaults.tol),
                max_iterations: file
                    .solver_max_iterations
                    .unwrap_or(solver_defaults.max_iterations),
            },
            out: flags
                .out
                .clone()
                .or_else(|| file.out.clone())
                .unwrap_or_else(|| PathBuf::from("mmimo")),
        };
        config.plan().map_err(|e| ConfigError(e.to_string()))?;
        Ok(config)
    }

    pub fn config_tag(&self) -> ConfigTag {
        ConfigTag::new(self.deployment, self.decoder)
    }

    /// The experiment plan this scenario describes.
    pub fn plan(&self) -> mmimo::Result<ExperimentPlan> {
        let tag = self.config_tag();
        let plan = ExperimentPlan {
            params: self.params.clone(),
            budget: self.budget.clone(),
            m: self.m,
            k: self.k,
            tau: self.tau,
            configurations: self
                .power
                .tags()
                .into_iter()
                .map(|p| Configuration::new(tag, p))
                .collect(),
            n_largescale: self.n_largescale,
            n_smallscale: self.n_smallscale,
            master_seed: self.seed,
            percentiles: self.percentiles.clone(),
            solver: self.solver,
        };
        plan.validate()?;
        Ok(plan)
    }

    /// One-line `key=value` echo written into every output header.
    pub fn echo(&self) -> String {
        let p = &self.params;
        format!(
            "morphology={} deployment={} decoder={} power={} m={} k={} tau={} \
             radius_m={} shadow_sigma_db={} carrier_ghz={} tx_power_w={} bandwidth_hz={} \
             noise_figure_db={} n_largescale={} n_smallscale={} seed={}",
            p.tag,
            self.deployment,
            self.decoder,
            self.power,
            self.m,
            self.k,
            self.tau,
            p.radius_m,
            p.shadow_sigma_db,
            p.carrier_ghz,
            self.budget.tx_power_w,
            self.budget.total_bandwidth_hz,
            self.budget.noise_figure_db,
            self.n_largescale,
            self.n_smallscale,
            self.seed
        )
    }
}

/// Load and parse a config file, reporting JSON problems with line numbers.
pub fn load_config_file(path: &std::path::Path) -> Result<ConfigFile, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
}
