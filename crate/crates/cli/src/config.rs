//! Flat `key = value` experiment configuration with dotted namespaces.
//!
//! Lines starting with `#` are comments. Lists are comma separated. Every key
//! has a default; unknown and repeated keys are rejected.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use ymh_core::flow::{GaugeMode, Scheme};

use crate::error::CliError;

/// How the grid follows ε across a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Refine {
    /// Same grid for every ε.
    Fixed,
    /// `N_i(ε) = round(N_i · (ε_0/ε)^power)` with `ε_0` the first entry of the list.
    Scaled { power: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub n: usize,
    pub dims: Vec<usize>,
    pub lengths: Vec<f64>,
    pub flux: Vec<i64>,
    pub refine: Refine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowSpec {
    pub scheme: Scheme,
    /// `None` picks `0.5 ε²` for IMEX and the stability guard for the explicit scheme.
    pub dt: Option<f64>,
    pub t_end: f64,
    pub gauge: GaugeMode,
    pub stationarity_tol: Option<f64>,
    pub monitor_stride: usize,
    pub clamp: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VortexSpec {
    pub k: Vec<i64>,
    pub r_max: f64,
    pub tol: f64,
    pub step: f64,
    /// Planar vortex center as fractions of the period lengths.
    pub center: Vec<f64>,
    /// Seeds are synthesized at `min(seed_scale · ε, seed_cap)` and then run at ε.
    pub seed_scale: f64,
    pub seed_cap: f64,
}

/// One straight loop: axis, transverse position as fractions of the lengths
/// (in increasing axis order) and multiplicity.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopSpec {
    pub axis: usize,
    pub at: [f64; 2],
    pub k: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CycleSpec {
    /// One loop per nonzero homology entry implied by the flux.
    Auto,
    Loops(Vec<LoopSpec>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonoSpec {
    pub big_t: f64,
    pub c2: f64,
    pub density_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WidthSpec {
    pub grid: usize,
    pub class: Vec<i64>,
    pub mass_cap: f64,
    pub state_cap: usize,
    pub sweep_dims: usize,
    pub eps: f64,
    pub level: u32,
    pub tighten: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlatNormSpec {
    pub grid: usize,
    pub max_mass: i64,
    pub triples: usize,
}

/// Acceptance tolerances.
#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    pub vortex_defect: f64,
    pub vortex_seconds: f64,
    pub bogomolny: f64,
    pub xi_ratio: f64,
    pub jacobian_lipschitz: f64,
    pub gauge_rel: f64,
    pub quantization: f64,
    pub energy_increase: f64,
    pub max_principle: f64,
    pub dissipation: f64,
    pub dissipation_order: [f64; 2],
    pub coulomb: f64,
    pub minimize_t2: f64,
    pub minimize_t3: f64,
    pub trend_noise: f64,
    pub recovery_coarse: f64,
    pub recovery_fine: f64,
    pub liminf_h: f64,
    pub metric: f64,
    pub width: f64,
    pub psi_ratio: f64,
    pub density_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub grid: GridSpec,
    pub eps: Vec<f64>,
    pub flow: FlowSpec,
    pub vortex: VortexSpec,
    pub cycle: CycleSpec,
    pub mono: MonoSpec,
    pub width: WidthSpec,
    pub flatnorm: FlatNormSpec,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub threads: usize,
    pub tol: Tolerances,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: "minimize".into(),
            grid: GridSpec {
                n: 2,
                dims: vec![32, 32],
                lengths: vec![1.0, 1.0],
                flux: vec![1],
                refine: Refine::Scaled { power: 1.5 },
            },
            eps: vec![0.2, 0.1, 0.05],
            flow: FlowSpec {
                scheme: Scheme::Imex,
                dt: None,
                t_end: 20.0,
                gauge: GaugeMode::Direct,
                stationarity_tol: None,
                monitor_stride: 10,
                clamp: false,
            },
            vortex: VortexSpec {
                k: vec![1, 2, 3],
                r_max: ymh_core::vortex::DEFAULT_R_MAX,
                tol: ymh_core::vortex::DEFAULT_TOL,
                step: ymh_core::vortex::DEFAULT_STEP,
                center: vec![0.5, 0.5],
                seed_scale: 2.5,
                seed_cap: 0.3,
            },
            cycle: CycleSpec::Auto,
            mono: MonoSpec {
                big_t: 2.5,
                c2: 1.0,
                density_time: 2.0,
            },
            width: WidthSpec {
                grid: 4,
                class: vec![1, 0],
                mass_cap: 8.0,
                state_cap: 2_000_000,
                sweep_dims: 64,
                eps: 0.05,
                level: 3,
                tighten: 0.005,
            },
            flatnorm: FlatNormSpec {
                grid: 6,
                max_mass: 4,
                triples: 1000,
            },
            output_dir: PathBuf::from("out"),
            seed: 0,
            threads: 0,
            tol: Tolerances {
                vortex_defect: 5e-3,
                vortex_seconds: 1.0,
                bogomolny: 1e-8,
                xi_ratio: 1.8,
                jacobian_lipschitz: 10.0,
                gauge_rel: 1e-12,
                quantization: 1e-9,
                energy_increase: 1e-8,
                max_principle: 1e-9,
                dissipation: 0.01,
                dissipation_order: [1.6, 2.4],
                coulomb: 5e-3,
                minimize_t2: 0.10,
                minimize_t3: 0.20,
                trend_noise: 2e-3,
                recovery_coarse: 0.15,
                recovery_fine: 0.10,
                liminf_h: 10.0,
                metric: 1e-9,
                width: 0.05,
                psi_ratio: 10.0,
                density_ratio: 50.0,
            },
        }
    }
}

fn bad(key: &str, value: &str, why: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{key} = {value}: {why}"))
}

fn scalar<T: FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse::<T>().map_err(|e| bad(key, value, e))
}

fn list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|x| scalar(key, x)).collect()
}

fn auto_or<T: FromStr>(key: &str, value: &str) -> Result<Option<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    if value.trim() == "auto" {
        Ok(None)
    } else {
        scalar(key, value).map(Some)
    }
}

fn join<T: std::fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn opt<T: std::fmt::Display>(x: &Option<T>) -> String {
    x.as_ref().map_or_else(|| "auto".to_string(), |v| v.to_string())
}

fn parse_loops(key: &str, value: &str) -> Result<CycleSpec, CliError> {
    match value.trim() {
        "auto" => return Ok(CycleSpec::Auto),
        "none" => return Ok(CycleSpec::Loops(Vec::new())),
        _ => {}
    }
    let loops = value
        .split(';')
        .map(|item| {
            let parts: Vec<&str> = item.split(':').map(str::trim).collect();
            if parts.len() != 4 {
                return Err(bad(key, value, "each loop is axis:x:y:k"));
            }
            Ok(LoopSpec {
                axis: scalar(key, parts[0])?,
                at: [scalar(key, parts[1])?, scalar(key, parts[2])?],
                k: scalar(key, parts[3])?,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CycleSpec::Loops(loops))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = ExperimentConfig::default();
        let mut seen = std::collections::HashSet::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", no + 1)))?;
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(CliError::Config(format!("line {}: {key} is set twice", no + 1)));
            }
            cfg.set(key, value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies one `key = value` pair.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let t = &mut self.tol;
        match key {
            "experiment" => self.experiment = value.to_string(),
            "grid.n" => self.grid.n = scalar(key, value)?,
            "grid.dims" => self.grid.dims = list(key, value)?,
            "grid.lengths" => self.grid.lengths = list(key, value)?,
            "grid.flux" => self.grid.flux = list(key, value)?,
            "grid.refine" => {
                self.grid.refine = match value {
                    "fixed" => Refine::Fixed,
                    "scaled" => Refine::Scaled {
                        power: match self.grid.refine {
                            Refine::Scaled { power } => power,
                            Refine::Fixed => 1.0,
                        },
                    },
                    _ => return Err(bad(key, value, "expected fixed or scaled")),
                }
            }
            "grid.refine_power" => {
                let power = scalar(key, value)?;
                if let Refine::Scaled { power: p } = &mut self.grid.refine {
                    *p = power;
                } else {
                    self.grid.refine = Refine::Scaled { power };
                }
            }
            "eps" => self.eps = list(key, value)?,
            "flow.scheme" => {
                self.flow.scheme = match value {
                    "imex" => Scheme::Imex,
                    "explicit" => Scheme::Explicit,
                    _ => return Err(bad(key, value, "expected imex or explicit")),
                }
            }
            "flow.dt" => self.flow.dt = auto_or(key, value)?,
            "flow.t_end" => self.flow.t_end = scalar(key, value)?,
            "flow.gauge" => {
                self.flow.gauge = match value {
                    "direct" => GaugeMode::Direct,
                    "coulomb" => GaugeMode::Coulomb,
                    _ => return Err(bad(key, value, "expected direct or coulomb")),
                }
            }
            "flow.stationarity_tol" => self.flow.stationarity_tol = auto_or(key, value)?,
            "flow.monitor_stride" => self.flow.monitor_stride = scalar(key, value)?,
            "flow.clamp" => self.flow.clamp = scalar(key, value)?,
            "vortex.k" => self.vortex.k = list(key, value)?,
            "vortex.r_max" => self.vortex.r_max = scalar(key, value)?,
            "vortex.tol" => self.vortex.tol = scalar(key, value)?,
            "vortex.step" => self.vortex.step = scalar(key, value)?,
            "vortex.center" => self.vortex.center = list(key, value)?,
            "vortex.seed_scale" => self.vortex.seed_scale = scalar(key, value)?,
            "vortex.seed_cap" => self.vortex.seed_cap = scalar(key, value)?,
            "cycle.loops" => self.cycle = parse_loops(key, value)?,
            "mono.t" => self.mono.big_t = scalar(key, value)?,
            "mono.c2" => self.mono.c2 = scalar(key, value)?,
            "mono.density_time" => self.mono.density_time = scalar(key, value)?,
            "width.grid" => self.width.grid = scalar(key, value)?,
            "width.class" => self.width.class = list(key, value)?,
            "width.mass_cap" => self.width.mass_cap = scalar(key, value)?,
            "width.state_cap" => self.width.state_cap = scalar(key, value)?,
            "width.sweep_dims" => self.width.sweep_dims = scalar(key, value)?,
            "width.eps" => self.width.eps = scalar(key, value)?,
            "width.level" => self.width.level = scalar(key, value)?,
            "width.tighten" => self.width.tighten = scalar(key, value)?,
            "flatnorm.grid" => self.flatnorm.grid = scalar(key, value)?,
            "flatnorm.max_mass" => self.flatnorm.max_mass = scalar(key, value)?,
            "flatnorm.triples" => self.flatnorm.triples = scalar(key, value)?,
            "output.dir" => self.output_dir = PathBuf::from(value),
            "seed" => self.seed = scalar(key, value)?,
            "threads" => self.threads = scalar(key, value)?,
            "tol.vortex_defect" => t.vortex_defect = scalar(key, value)?,
            "tol.vortex_seconds" => t.vortex_seconds = scalar(key, value)?,
            "tol.bogomolny" => t.bogomolny = scalar(key, value)?,
            "tol.xi_ratio" => t.xi_ratio = scalar(key, value)?,
            "tol.jacobian_lipschitz" => t.jacobian_lipschitz = scalar(key, value)?,
            "tol.gauge_rel" => t.gauge_rel = scalar(key, value)?,
            "tol.quantization" => t.quantization = scalar(key, value)?,
            "tol.energy_increase" => t.energy_increase = scalar(key, value)?,
            "tol.max_principle" => t.max_principle = scalar(key, value)?,
            "tol.dissipation" => t.dissipation = scalar(key, value)?,
            "tol.dissipation_order" => {
                let v: Vec<f64> = list(key, value)?;
                if v.len() != 2 {
                    return Err(bad(key, value, "expected two bounds"));
                }
                t.dissipation_order = [v[0], v[1]];
            }
            "tol.coulomb" => t.coulomb = scalar(key, value)?,
            "tol.minimize_t2" => t.minimize_t2 = scalar(key, value)?,
            "tol.minimize_t3" => t.minimize_t3 = scalar(key, value)?,
            "tol.trend_noise" => t.trend_noise = scalar(key, value)?,
            "tol.recovery_coarse" => t.recovery_coarse = scalar(key, value)?,
            "tol.recovery_fine" => t.recovery_fine = scalar(key, value)?,
            "tol.liminf_h" => t.liminf_h = scalar(key, value)?,
            "tol.metric" => t.metric = scalar(key, value)?,
            "tol.width" => t.width = scalar(key, value)?,
            "tol.psi_ratio" => t.psi_ratio = scalar(key, value)?,
            "tol.density_ratio" => t.density_ratio = scalar(key, value)?,
            _ => return Err(CliError::Config(format!("unknown key {key}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let g = &self.grid;
        let np = match g.n {
            2 => 1,
            3 => 3,
            n => return Err(CliError::Config(format!("grid.n = {n} must be 2 or 3"))),
        };
        if g.dims.len() != g.n || g.lengths.len() != g.n || g.flux.len() != np {
            return Err(CliError::Config(format!(
                "grid needs {} dims, {} lengths and {np} flux entries",
                g.n, g.n
            )));
        }
        if self.eps.is_empty() || self.eps.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
            return Err(CliError::Config("eps entries must lie in (0, 1]".into()));
        }
        if let Refine::Scaled { power } = g.refine {
            if !(power >= 0.0 && power.is_finite()) {
                return Err(CliError::Config("grid.refine_power must be non-negative".into()));
            }
        }
        if self.flow.monitor_stride == 0 {
            return Err(CliError::Config("flow.monitor_stride must be positive".into()));
        }
        if self.vortex.center.len() != 2 {
            return Err(CliError::Config("vortex.center needs two entries".into()));
        }
        if self.width.class.len() != 2 {
            return Err(CliError::Config("width.class needs two entries".into()));
        }
        if let CycleSpec::Loops(loops) = &self.cycle {
            if loops.iter().any(|l| l.axis > 2) {
                return Err(CliError::Config("cycle.loops axis must be 0, 1 or 2".into()));
            }
        }
        Ok(())
    }

    /// Grid dimensions used at coupling `eps`.
    pub fn dims_for(&self, eps: f64) -> Vec<usize> {
        match self.grid.refine {
            Refine::Fixed => self.grid.dims.clone(),
            Refine::Scaled { power } => {
                let f = (self.eps[0] / eps).powf(power);
                self.grid.dims.iter().map(|&d| ((d as f64) * f).round().max(4.0) as usize).collect()
            }
        }
    }

    /// Every key with its resolved value, in a fixed order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("experiment", self.experiment.clone());
        put("grid.n", self.grid.n.to_string());
        put("grid.dims", join(&self.grid.dims));
        put("grid.lengths", join(&self.grid.lengths));
        put("grid.flux", join(&self.grid.flux));
        match self.grid.refine {
            Refine::Fixed => put("grid.refine", "fixed".into()),
            Refine::Scaled { power } => {
                put("grid.refine", "scaled".into());
                put("grid.refine_power", power.to_string());
            }
        }
        put("eps", join(&self.eps));
        put(
            "flow.scheme",
            match self.flow.scheme {
                Scheme::Imex => "imex",
                Scheme::Explicit => "explicit",
            }
            .into(),
        );
        put("flow.dt", opt(&self.flow.dt));
        put("flow.t_end", self.flow.t_end.to_string());
        put(
            "flow.gauge",
            match self.flow.gauge {
                GaugeMode::Direct => "direct",
                GaugeMode::Coulomb => "coulomb",
            }
            .into(),
        );
        put("flow.stationarity_tol", opt(&self.flow.stationarity_tol));
        put("flow.monitor_stride", self.flow.monitor_stride.to_string());
        put("flow.clamp", self.flow.clamp.to_string());
        put("vortex.k", join(&self.vortex.k));
        put("vortex.r_max", self.vortex.r_max.to_string());
        put("vortex.tol", self.vortex.tol.to_string());
        put("vortex.step", self.vortex.step.to_string());
        put("vortex.center", join(&self.vortex.center));
        put("vortex.seed_scale", self.vortex.seed_scale.to_string());
        put("vortex.seed_cap", self.vortex.seed_cap.to_string());
        put(
            "cycle.loops",
            match &self.cycle {
                CycleSpec::Auto => "auto".into(),
                CycleSpec::Loops(l) if l.is_empty() => "none".into(),
                CycleSpec::Loops(l) => l
                    .iter()
                    .map(|x| format!("{}:{}:{}:{}", x.axis, x.at[0], x.at[1], x.k))
                    .collect::<Vec<_>>()
                    .join("; "),
            },
        );
        put("mono.t", self.mono.big_t.to_string());
        put("mono.c2", self.mono.c2.to_string());
        put("mono.density_time", self.mono.density_time.to_string());
        put("width.grid", self.width.grid.to_string());
        put("width.class", join(&self.width.class));
        put("width.mass_cap", self.width.mass_cap.to_string());
        put("width.state_cap", self.width.state_cap.to_string());
        put("width.sweep_dims", self.width.sweep_dims.to_string());
        put("width.eps", self.width.eps.to_string());
        put("width.level", self.width.level.to_string());
        put("width.tighten", self.width.tighten.to_string());
        put("flatnorm.grid", self.flatnorm.grid.to_string());
        put("flatnorm.max_mass", self.flatnorm.max_mass.to_string());
        put("flatnorm.triples", self.flatnorm.triples.to_string());
        put("output.dir", self.output_dir.display().to_string());
        put("seed", self.seed.to_string());
        put("threads", self.threads.to_string());
        let t = &self.tol;
        put("tol.vortex_defect", t.vortex_defect.to_string());
        put("tol.vortex_seconds", t.vortex_seconds.to_string());
        put("tol.bogomolny", t.bogomolny.to_string());
        put("tol.xi_ratio", t.xi_ratio.to_string());
        put("tol.jacobian_lipschitz", t.jacobian_lipschitz.to_string());
        put("tol.gauge_rel", t.gauge_rel.to_string());
        put("tol.quantization", t.quantization.to_string());
        put("tol.energy_increase", t.energy_increase.to_string());
        put("tol.max_principle", t.max_principle.to_string());
        put("tol.dissipation", t.dissipation.to_string());
        put("tol.dissipation_order", join(&t.dissipation_order));
        put("tol.coulomb", t.coulomb.to_string());
        put("tol.minimize_t2", t.minimize_t2.to_string());
        put("tol.minimize_t3", t.minimize_t3.to_string());
        put("tol.trend_noise", t.trend_noise.to_string());
        put("tol.recovery_coarse", t.recovery_coarse.to_string());
        put("tol.recovery_fine", t.recovery_fine.to_string());
        put("tol.liminf_h", t.liminf_h.to_string());
        put("tol.metric", t.metric.to_string());
        put("tol.width", t.width.to_string());
        put("tol.psi_ratio", t.psi_ratio.to_string());
        put("tol.density_ratio", t.density_ratio.to_string());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let d = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::parse(&d.to_text()).unwrap(), d);
    }

    #[test]
    fn unknown_and_repeated_keys_fail() {
        assert!(matches!(ExperimentConfig::parse("grid.nn = 2"), Err(CliError::Config(_))));
        assert!(matches!(ExperimentConfig::parse("seed = 1\nseed = 2"), Err(CliError::Config(_))));
        assert!(matches!(ExperimentConfig::parse("eps = 0.1, x"), Err(CliError::Config(_))));
    }

    #[test]
    fn loops_and_refinement_parse() {
        let c = ExperimentConfig::parse(
            "grid.n = 3\ngrid.dims = 16, 16, 16\ngrid.lengths = 1, 1, 1\ngrid.flux = 1, 0, 0\n\
             grid.refine_power = 1\neps = 0.2, 0.1\ncycle.loops = 2:0.5:0.5:1 # one loop",
        )
        .unwrap();
        assert_eq!(c.cycle, CycleSpec::Loops(vec![LoopSpec { axis: 2, at: [0.5, 0.5], k: 1 }]));
        assert_eq!(c.dims_for(0.1), vec![32, 32, 32]);
        assert_eq!(ExperimentConfig::parse(&c.to_text()).unwrap(), c);
    }
}
