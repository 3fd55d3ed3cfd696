//! Flag / config-file / environment resolution.
//!
//! Precedence: explicit flags beat the `--config` file, which beats the
//! environment (`BIOBP_DATA_DIR`), which beats the built-in defaults. The
//! built-in defaults are the reference hyperparameters (lr 1e-3, batch 50,
//! hidden 32, 100000 steps).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use biobp::data::Sampling;
use biobp::rules::RuleKind;
use biobp::trainer::{DataSource, TemporalSource, TrainConfig};
use biobp::{Error, Result};

/// Raw option values before resolution; `None` means "not given here".
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub rule: Option<RuleKind>,
    pub lr: Option<f64>,
    pub steps: Option<u64>,
    pub batch: Option<usize>,
    pub hidden: Option<Vec<usize>>,
    pub seed: Option<u64>,
    pub data: Option<DataSource>,
    pub data_dir: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub eval_every: Option<u64>,
    pub align_every: Option<u64>,
    pub sampling: Option<Sampling>,
    pub itd_source: Option<TemporalSource>,
}

impl Overrides {
    /// Later (higher-precedence) values win field by field.
    pub fn layered_over(self, lower: Overrides) -> Overrides {
        Overrides {
            rule: self.rule.or(lower.rule),
            lr: self.lr.or(lower.lr),
            steps: self.steps.or(lower.steps),
            batch: self.batch.or(lower.batch),
            hidden: self.hidden.or(lower.hidden),
            seed: self.seed.or(lower.seed),
            data: self.data.or(lower.data),
            data_dir: self.data_dir.or(lower.data_dir),
            out: self.out.or(lower.out),
            eval_every: self.eval_every.or(lower.eval_every),
            align_every: self.align_every.or(lower.align_every),
            sampling: self.sampling.or(lower.sampling),
            itd_source: self.itd_source.or(lower.itd_source),
        }
    }
}

/// Fully resolved run settings: a [`TrainConfig`] plus the pieces the CLI
/// needs (hidden widths stay separate because the input/output widths come
/// from the dataset).
#[derive(Debug, Clone)]
pub struct Resolved {
    pub rule: RuleKind,
    pub lr: f64,
    pub steps: u64,
    pub batch: usize,
    pub hidden: Vec<usize>,
    pub seed: u64,
    pub data: DataSource,
    pub data_dir: Option<PathBuf>,
    pub out: PathBuf,
    pub eval_every: u64,
    pub align_every: u64,
    pub sampling: Sampling,
    pub itd_source: TemporalSource,
}

impl Resolved {
    /// Assembles the training config once the dataset dictates input width
    /// and class count.
    pub fn train_config(&self, input_width: usize, classes: usize) -> TrainConfig {
        let mut sizes = Vec::with_capacity(self.hidden.len() + 2);
        sizes.push(input_width);
        sizes.extend_from_slice(&self.hidden);
        sizes.push(classes);
        TrainConfig {
            rule: self.rule,
            lr: self.lr,
            steps: self.steps,
            batch: self.batch,
            sizes,
            master_seed: self.seed,
            eval_every: self.eval_every,
            align_every: self.align_every,
            sampling: self.sampling,
            temporal_source: self.itd_source,
            data: self.data,
            out: Some(self.out.clone()),
        }
    }

    /// One-line summary printed at the start of a run.
    pub fn echo_line(&self) -> String {
        let hidden = self
            .hidden
            .iter()
            .map(|h| h.to_string())
            .collect::<Vec<_>>()
            .join(",");
        format!(
            "config: rule={} lr={} batch={} hidden={} steps={} seed={} data={} sampling={} eval_every={} align_every={}",
            self.rule, self.lr, self.batch, hidden, self.steps, self.seed, self.data,
            self.sampling, self.eval_every, self.align_every
        )
    }
}

pub fn parse_hidden(s: &str) -> Result<Vec<usize>> {
    let widths: Vec<usize> = s
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| Error::Param(format!("bad hidden width '{part}'")))
        })
        .collect::<Result<_>>()?;
    if widths.is_empty() || widths.contains(&0) {
        return Err(Error::Param("hidden widths must be positive".into()));
    }
    Ok(widths)
}

/// Parses the flat `key=value` config file format (one pair per line,
/// `#` comments). Unknown keys are an error so typos do not silently
/// misconfigure a run.
pub fn parse_config_file(path: &Path) -> Result<Overrides> {
    let text = std::fs::read_to_string(path)?;
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Param(format!(
                "{}:{}: expected key=value, got '{line}'",
                path.display(),
                lineno + 1
            ))
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    let mut o = Overrides::default();
    for (key, value) in map {
        match key.as_str() {
            "rule" => o.rule = Some(value.parse()?),
            "lr" => {
                o.lr = Some(
                    value
                        .parse()
                        .map_err(|_| Error::Param(format!("bad lr '{value}'")))?,
                )
            }
            "steps" => o.steps = Some(parse_int(&key, &value)?),
            "batch" => o.batch = Some(parse_int(&key, &value)? as usize),
            "hidden" => o.hidden = Some(parse_hidden(&value)?),
            "seed" => o.seed = Some(parse_int(&key, &value)?),
            "data" => o.data = Some(value.parse()?),
            "data-dir" => o.data_dir = Some(PathBuf::from(value)),
            "out" => o.out = Some(PathBuf::from(value)),
            "eval-every" => o.eval_every = Some(parse_int(&key, &value)?),
            "align-every" => o.align_every = Some(parse_int(&key, &value)?),
            "sampling" => o.sampling = Some(value.parse()?),
            "itd-source" => o.itd_source = Some(value.parse()?),
            other => {
                return Err(Error::Param(format!(
                    "unknown config key '{other}' in {}",
                    path.display()
                )))
            }
        }
    }
    Ok(o)
}

fn parse_int(key: &str, value: &str) -> Result<u64> {
    value
        .parse()
        .map_err(|_| Error::Param(format!("bad {key} '{value}'")))
}

/// Overrides taken from the environment (only `BIOBP_DATA_DIR`).
pub fn env_overrides() -> Overrides {
    let mut o = Overrides::default();
    if let Ok(dir) = std::env::var(biobp::data::DATA_DIR_ENV) {
        if !dir.is_empty() {
            o.data_dir = Some(PathBuf::from(dir));
        }
    }
    o
}

/// Applies precedence and fills in the documented defaults.
pub fn resolve(flags: Overrides, config_file: Option<&Path>, default_out: &str) -> Result<Resolved> {
    let from_file = match config_file {
        Some(path) => parse_config_file(path)?,
        None => Overrides::default(),
    };
    let merged = flags.layered_over(from_file.layered_over(env_overrides()));
    Ok(Resolved {
        rule: merged.rule.unwrap_or(RuleKind::Vbp),
        lr: merged.lr.unwrap_or(1e-3),
        steps: merged.steps.unwrap_or(100_000),
        batch: merged.batch.unwrap_or(50),
        hidden: merged.hidden.unwrap_or_else(|| vec![32]),
        seed: merged.seed.unwrap_or(0),
        data: merged.data.unwrap_or(DataSource::Mnist),
        data_dir: merged.data_dir,
        out: merged.out.unwrap_or_else(|| PathBuf::from(default_out)),
        eval_every: merged.eval_every.unwrap_or(500),
        align_every: merged.align_every.unwrap_or(500),
        sampling: merged.sampling.unwrap_or(Sampling::EpochShuffle),
        itd_source: merged.itd_source.unwrap_or(TemporalSource::Step),
    })
}
