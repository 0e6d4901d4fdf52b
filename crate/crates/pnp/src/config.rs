//! Run configuration: defaults, then a flat `key = value` file, then
//! command-line overrides (last writer wins).

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use pnp_core::design::{CapacityConstraints, KnapsackMode, QuotaMode};
use pnp_core::graph::{DuplicatePolicy, FilterThresholds, IngestConfig, TiePolicy};
use pnp_core::synth::SyntheticSpec;
use pnp_core::walks::{InferOptions, PathWeights, PnpParams};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum TargetSource {
    All,
    /// File with one user id per line.
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub ratings: Option<PathBuf>,
    pub membership: Option<PathBuf>,
    pub bundle: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: Option<u64>,
    /// 0 lets rayon pick.
    pub workers: usize,

    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub tie: TiePolicy,

    pub min_rating: f64,
    pub max_rating: f64,
    pub rating_step: Option<f64>,
    pub duplicates: DuplicatePolicy,
    pub thresholds: FilterThresholds,

    pub target: TargetSource,
    pub caps: CapacityConstraints,
    pub quota: QuotaMode,
    /// Budget mode is on when budgets are given.
    pub budgets: Option<BTreeMap<String, f64>>,
    pub costs: Option<PathBuf>,
    pub greedy: bool,
    pub resolution: u32,
    pub cell_limit: usize,
    pub compare: bool,
    pub knn_k: usize,
    pub include_unrated: bool,
    pub export_preferences: bool,
    pub export_threshold: f64,
    pub max_dense_cells: usize,

    pub folds: usize,
    pub delta_grid: Vec<f64>,
    pub weight_grid: Vec<f64>,
    pub per_user_auc: bool,

    pub nnz_grid: Vec<usize>,
    pub naive_max_nnz: usize,
    pub repeats: usize,

    pub min_support: f64,
    pub min_count: Option<usize>,
    pub min_size: usize,
    pub tolerance: f64,

    pub synth: SyntheticSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        let params = PnpParams::default();
        let ingest = IngestConfig::default();
        RunConfig {
            ratings: None,
            membership: None,
            bundle: None,
            out: PathBuf::from("."),
            seed: None,
            workers: 0,
            alpha: params.weights.alpha(),
            beta: params.weights.beta(),
            gamma: params.weights.gamma(),
            delta: params.delta,
            tie: params.tie,
            min_rating: ingest.min_rating,
            max_rating: ingest.max_rating,
            rating_step: ingest.step,
            duplicates: ingest.duplicates,
            thresholds: FilterThresholds::default(),
            target: TargetSource::All,
            caps: CapacityConstraints::default_profile(),
            quota: QuotaMode::UpperBound,
            budgets: None,
            costs: None,
            greedy: false,
            resolution: 2,
            cell_limit: 50_000_000,
            compare: false,
            knn_k: 20,
            include_unrated: true,
            export_preferences: false,
            export_threshold: 0.0,
            max_dense_cells: InferOptions::default().max_dense_cells,
            folds: 5,
            delta_grid: Vec::new(),
            weight_grid: Vec::new(),
            per_user_auc: false,
            nnz_grid: vec![1_000, 10_000, 100_000],
            naive_max_nnz: 100_000,
            repeats: 3,
            min_support: 0.005,
            min_count: None,
            min_size: 1,
            tolerance: 0.05,
            synth: SyntheticSpec::default(),
        }
    }
}

fn num<T: FromStr>(value: &str) -> std::result::Result<T, String> {
    value.trim().parse().map_err(|_| format!("cannot parse '{value}'"))
}

fn flag(value: &str) -> std::result::Result<bool, String> {
    match value.trim() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        other => Err(format!("expected true/false, got '{other}'")),
    }
}

fn list<T: FromStr>(value: &str) -> std::result::Result<Vec<T>, String> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(num).collect()
}

/// `label:value,label:value`.
fn label_map<T: FromStr>(value: &str) -> std::result::Result<BTreeMap<String, T>, String> {
    let mut out = BTreeMap::new();
    for part in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (label, v) = part.split_once(':').ok_or_else(|| format!("expected label:value, got '{part}'"))?;
        out.insert(label.trim().to_string(), num(v)?);
    }
    Ok(out)
}

fn join<T: ToString>(xs: impl IntoIterator<Item = T>) -> String {
    xs.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn join_map<T: ToString>(m: &BTreeMap<String, T>) -> String {
    join(m.iter().map(|(k, v)| format!("{k}:{}", v.to_string())))
}

fn path_or_none(p: &Option<PathBuf>) -> String {
    p.as_ref().map_or_else(|| "none".into(), |p| p.display().to_string())
}

impl RunConfig {
    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let v = value.trim();
        let path = || (v != "none").then(|| PathBuf::from(v));
        match key {
            "ratings" => self.ratings = path(),
            "membership" => self.membership = path(),
            "bundle" => self.bundle = path(),
            "out" => self.out = PathBuf::from(v),
            "seed" => self.seed = Some(num(v)?),
            "workers" => self.workers = num(v)?,
            "alpha" => self.alpha = num(v)?,
            "beta" => self.beta = num(v)?,
            "gamma" => self.gamma = num(v)?,
            "delta" => self.delta = num(v)?,
            "tie" => {
                self.tie = match v {
                    "positive" => TiePolicy::Positive,
                    "negative" => TiePolicy::Negative,
                    _ => return Err("tie must be positive or negative".into()),
                }
            }
            "min_rating" => self.min_rating = num(v)?,
            "max_rating" => self.max_rating = num(v)?,
            "rating_step" => self.rating_step = if v == "none" { None } else { Some(num(v)?) },
            "duplicates" => {
                self.duplicates = match v {
                    "last" => DuplicatePolicy::KeepLast,
                    "first" => DuplicatePolicy::KeepFirst,
                    "reject" => DuplicatePolicy::Reject,
                    _ => return Err("duplicates must be last, first or reject".into()),
                }
            }
            "min_users_per_movie" => self.thresholds.min_users_per_movie = num(v)?,
            "min_features_per_movie" => self.thresholds.min_features_per_movie = num(v)?,
            "min_movies_per_user" => self.thresholds.min_movies_per_user = num(v)?,
            "min_movies_per_feature" => self.thresholds.min_movies_per_feature = num(v)?,
            "target" => self.target = if v == "all" { TargetSource::All } else { TargetSource::File(PathBuf::from(v)) },
            "caps" => self.caps = CapacityConstraints { caps: label_map(v)? },
            "quota" => {
                self.quota = match v {
                    "upper" => QuotaMode::UpperBound,
                    "strict" => QuotaMode::Strict,
                    _ => return Err("quota must be upper or strict".into()),
                }
            }
            "budgets" => self.budgets = if v == "none" { None } else { Some(label_map(v)?) },
            "costs" => self.costs = path(),
            "knapsack" => {
                self.greedy = match v {
                    "exact" => false,
                    "greedy" => true,
                    _ => return Err("knapsack must be exact or greedy".into()),
                }
            }
            "resolution" => self.resolution = num(v)?,
            "cell_limit" => self.cell_limit = num(v)?,
            "compare" => self.compare = flag(v)?,
            "knn_k" => self.knn_k = num(v)?,
            "include_unrated" => self.include_unrated = flag(v)?,
            "export_preferences" => self.export_preferences = flag(v)?,
            "export_threshold" => self.export_threshold = num(v)?,
            "max_dense_cells" => self.max_dense_cells = num(v)?,
            "folds" => self.folds = num(v)?,
            "delta_grid" => self.delta_grid = list(v)?,
            "weight_grid" => self.weight_grid = list(v)?,
            "per_user_auc" => self.per_user_auc = flag(v)?,
            "nnz_grid" => self.nnz_grid = list(v)?,
            "naive_max_nnz" => self.naive_max_nnz = num(v)?,
            "repeats" => self.repeats = num(v)?,
            "min_support" => self.min_support = num(v)?,
            "min_count" => self.min_count = if v == "none" { None } else { Some(num(v)?) },
            "min_size" => self.min_size = num(v)?,
            "tolerance" => self.tolerance = num(v)?,
            "synth_users" => self.synth.users = num(v)?,
            "synth_movies" => self.synth.movies = num(v)?,
            "synth_features" => self.synth.features = num(v)?,
            "synth_groups" => self.synth.groups = num(v)?,
            "synth_noise" => self.synth.noise = num(v)?,
            "synth_ratings_per_user" => self.synth.ratings_per_user = num(v)?,
            "synth_features_per_movie" => self.synth.features_per_movie = num(v)?,
            "synth_theme_purity" => self.synth.theme_purity = num(v)?,
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    /// Every key with its resolved value, in a fixed order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let s = &self.synth;
        let t = &self.thresholds;
        vec![
            ("ratings", path_or_none(&self.ratings)),
            ("membership", path_or_none(&self.membership)),
            ("bundle", path_or_none(&self.bundle)),
            ("out", self.out.display().to_string()),
            ("seed", self.seed.map_or_else(|| "none".into(), |x| x.to_string())),
            ("workers", self.workers.to_string()),
            ("alpha", self.alpha.to_string()),
            ("beta", self.beta.to_string()),
            ("gamma", self.gamma.to_string()),
            ("delta", self.delta.to_string()),
            ("tie", match self.tie {
                TiePolicy::Positive => "positive".into(),
                TiePolicy::Negative => "negative".into(),
            }),
            ("min_rating", self.min_rating.to_string()),
            ("max_rating", self.max_rating.to_string()),
            ("rating_step", self.rating_step.map_or_else(|| "none".into(), |x| x.to_string())),
            ("duplicates", match self.duplicates {
                DuplicatePolicy::KeepLast => "last".into(),
                DuplicatePolicy::KeepFirst => "first".into(),
                DuplicatePolicy::Reject => "reject".into(),
            }),
            ("min_users_per_movie", t.min_users_per_movie.to_string()),
            ("min_features_per_movie", t.min_features_per_movie.to_string()),
            ("min_movies_per_user", t.min_movies_per_user.to_string()),
            ("min_movies_per_feature", t.min_movies_per_feature.to_string()),
            ("target", match &self.target {
                TargetSource::All => "all".into(),
                TargetSource::File(p) => p.display().to_string(),
            }),
            ("caps", join_map(&self.caps.caps)),
            ("quota", match self.quota {
                QuotaMode::UpperBound => "upper".into(),
                QuotaMode::Strict => "strict".into(),
            }),
            ("budgets", self.budgets.as_ref().map_or_else(|| "none".into(), join_map)),
            ("costs", path_or_none(&self.costs)),
            ("knapsack", if self.greedy { "greedy" } else { "exact" }.into()),
            ("resolution", self.resolution.to_string()),
            ("cell_limit", self.cell_limit.to_string()),
            ("compare", self.compare.to_string()),
            ("knn_k", self.knn_k.to_string()),
            ("include_unrated", self.include_unrated.to_string()),
            ("export_preferences", self.export_preferences.to_string()),
            ("export_threshold", self.export_threshold.to_string()),
            ("max_dense_cells", self.max_dense_cells.to_string()),
            ("folds", self.folds.to_string()),
            ("delta_grid", join(&self.delta_grid)),
            ("weight_grid", join(&self.weight_grid)),
            ("per_user_auc", self.per_user_auc.to_string()),
            ("nnz_grid", join(&self.nnz_grid)),
            ("naive_max_nnz", self.naive_max_nnz.to_string()),
            ("repeats", self.repeats.to_string()),
            ("min_support", self.min_support.to_string()),
            ("min_count", self.min_count.map_or_else(|| "none".into(), |x| x.to_string())),
            ("min_size", self.min_size.to_string()),
            ("tolerance", self.tolerance.to_string()),
            ("synth_users", s.users.to_string()),
            ("synth_movies", s.movies.to_string()),
            ("synth_features", s.features.to_string()),
            ("synth_groups", s.groups.to_string()),
            ("synth_noise", s.noise.to_string()),
            ("synth_ratings_per_user", s.ratings_per_user.to_string()),
            ("synth_features_per_movie", s.features_per_movie.to_string()),
            ("synth_theme_purity", s.theme_purity.to_string()),
        ]
    }

    /// Applies a config file on top of the current values.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| CliError::Config { path: path.to_path_buf(), line: n + 1, message };
            let (key, value) = line.split_once('=').ok_or_else(|| err("expected key = value".into()))?;
            self.set(key.trim(), value).map_err(|m| err(format!("{}: {m}", key.trim())))?;
        }
        Ok(())
    }

    /// Applies `key=value` overrides from the command line.
    pub fn apply_overrides<'a>(&mut self, pairs: impl IntoIterator<Item = (&'a str, String)>) -> Result<()> {
        for (key, value) in pairs {
            self.set(key, &value).map_err(|m| CliError::Usage(format!("{key}: {m}")))?;
        }
        Ok(())
    }

    pub fn params(&self) -> Result<PnpParams> {
        Ok(PnpParams { weights: PathWeights::new(self.alpha, self.beta, self.gamma)?, delta: self.delta, tie: self.tie })
    }

    pub fn ingest(&self) -> IngestConfig {
        IngestConfig {
            min_rating: self.min_rating,
            max_rating: self.max_rating,
            step: self.rating_step,
            duplicates: self.duplicates,
        }
    }

    pub fn infer(&self) -> InferOptions {
        InferOptions { max_dense_cells: self.max_dense_cells }
    }

    pub fn knapsack(&self) -> KnapsackMode {
        if self.greedy {
            KnapsackMode::Greedy
        } else {
            KnapsackMode::Exact { resolution_digits: self.resolution, cell_limit: self.cell_limit }
        }
    }

    /// Randomized commands refuse to run on an implicit seed.
    pub fn require_seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| CliError::Usage("this command is randomized; pass --seed or set seed in the config".into()))
    }
}
