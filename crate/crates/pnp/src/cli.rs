use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Signed meta-path preference inference and feature-bundle design.
#[derive(Debug, Parser)]
#[command(name = "pnp", version)]
pub struct Cli {
    /// Flat `key = value` config file; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (0 = one per core). Results do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Also write the report as `<out>/<command>.json`.
    #[arg(long, global = true)]
    pub json: bool,
    /// Set any config key, e.g. `--set knn_k=10`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Read ratings and memberships, filter to the dense core, write a bundle.
    Ingest(IngestArgs),
    /// Pick a feature bundle for a target audience.
    Design(DesignArgs),
    /// Cross-validated per-user AUC, with optional parameter sweeps.
    Evaluate(EvaluateArgs),
    /// Time the dense and aggregated pipelines over a grid of sizes.
    Bench(BenchArgs),
    /// Generate a planted-preference dataset in the ingest format.
    Synth(SynthArgs),
    /// Frequent feature sets over movies and pairwise independence checks.
    Mine(MineArgs),
}

#[derive(Debug, Args, Default)]
pub struct InputArgs {
    /// Ratings file: user_id, movie_id, rating (tab-separated).
    #[arg(long, value_name = "FILE")]
    pub ratings: Option<PathBuf>,
    /// Membership file: movie_id, feature_id, type_label (tab-separated).
    #[arg(long, value_name = "FILE")]
    pub membership: Option<PathBuf>,
    /// Graph bundle written by `ingest`; used instead of the raw files.
    #[arg(long, value_name = "FILE")]
    pub bundle: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct ModelArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Rating reweighing strength.
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Use the same minimum degree for all four filters.
    #[arg(long, value_name = "N")]
    pub min_degree: Option<usize>,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// `all` or a file with one user id per line.
    #[arg(long)]
    pub target: Option<String>,
    /// Per-type capacities as `label:n,...`. Default: actor:6, director:2,
    /// genre:2, producer:1, studio:1 (the producer and studio counts are
    /// placeholder guesses).
    #[arg(long, value_name = "CAPS")]
    pub caps: Option<String>,
    /// Use exactly min(cap, available) features per type.
    #[arg(long)]
    pub strict: bool,
    /// Per-type budgets as `label:amount,...`; switches to budget mode.
    #[arg(long, value_name = "BUDGETS")]
    pub budgets: Option<String>,
    /// Feature costs: feature_id, cost (tab-separated).
    #[arg(long, value_name = "FILE")]
    pub costs: Option<PathBuf>,
    /// Greedy ratio knapsack instead of the exact table.
    #[arg(long)]
    pub greedy: bool,
    /// Also design with the Popular and Top baselines and score all three
    /// with kNN and weighted kNN.
    #[arg(long)]
    pub compare: bool,
    /// Write the dense preference matrix (binary and TSV).
    #[arg(long)]
    pub export_preferences: bool,
    /// Only export scores with absolute value above this.
    #[arg(long)]
    pub export_threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub folds: Option<usize>,
    /// Comma-separated delta values to sweep.
    #[arg(long, value_name = "LIST")]
    pub delta_grid: Option<String>,
    /// Comma-separated values for alpha and gamma; beta takes the rest.
    #[arg(long, value_name = "LIST")]
    pub weight_grid: Option<String>,
    /// Write per-user AUC as TSV.
    #[arg(long)]
    pub per_user: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Comma-separated rating counts.
    #[arg(long, value_name = "LIST")]
    pub nnz: Option<String>,
    /// Skip the dense pipeline above this many ratings.
    #[arg(long, value_name = "N")]
    pub naive_max: Option<usize>,
    /// Timed runs per point; the fastest is kept.
    #[arg(long)]
    pub repeats: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub users: Option<usize>,
    #[arg(long)]
    pub movies: Option<usize>,
    #[arg(long)]
    pub features: Option<usize>,
    /// Latent user groups.
    #[arg(long)]
    pub groups: Option<usize>,
    /// Probability of flipping a like/dislike label, in [0, 0.5).
    #[arg(long)]
    pub noise: Option<f64>,
}

#[derive(Debug, Args)]
pub struct MineArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Relative minimum support in (0, 1].
    #[arg(long, value_name = "S")]
    pub min_support: Option<f64>,
    /// Absolute minimum count; takes precedence over --min-support.
    #[arg(long, value_name = "N")]
    pub min_count: Option<usize>,
    /// Smallest itemset size written out.
    #[arg(long, value_name = "K")]
    pub min_size: Option<usize>,
    /// Lift tolerance for the independence verdicts.
    #[arg(long)]
    pub tolerance: Option<f64>,
}

type Pairs = Vec<(&'static str, String)>;

fn opt<T: ToString>(out: &mut Pairs, key: &'static str, value: &Option<T>) {
    if let Some(v) = value {
        out.push((key, v.to_string()));
    }
}

fn on(out: &mut Pairs, key: &'static str, value: bool) {
    if value {
        out.push((key, "true".into()));
    }
}

fn path(out: &mut Pairs, key: &'static str, value: &Option<PathBuf>) {
    opt(out, key, &value.as_ref().map(|p| p.display().to_string()));
}

impl InputArgs {
    fn push(&self, out: &mut Pairs) {
        path(out, "ratings", &self.ratings);
        path(out, "membership", &self.membership);
        path(out, "bundle", &self.bundle);
    }
}

impl ModelArgs {
    fn push(&self, out: &mut Pairs) {
        opt(out, "alpha", &self.alpha);
        opt(out, "beta", &self.beta);
        opt(out, "gamma", &self.gamma);
        opt(out, "delta", &self.delta);
    }
}

impl Cli {
    pub fn command_name(&self) -> &'static str {
        match self.command {
            Command::Ingest(_) => "ingest",
            Command::Design(_) => "design",
            Command::Evaluate(_) => "evaluate",
            Command::Bench(_) => "bench",
            Command::Synth(_) => "synth",
            Command::Mine(_) => "mine",
        }
    }

    /// Flag values as config overrides, in application order.
    pub fn overrides(&self) -> Result<Pairs, String> {
        let mut out = Pairs::new();
        opt(&mut out, "seed", &self.seed);
        opt(&mut out, "workers", &self.workers);
        path(&mut out, "out", &self.out);
        match &self.command {
            Command::Ingest(a) => {
                a.input.push(&mut out);
                if let Some(n) = a.min_degree {
                    for key in ["min_users_per_movie", "min_features_per_movie", "min_movies_per_user", "min_movies_per_feature"] {
                        out.push((key, n.to_string()));
                    }
                }
            }
            Command::Design(a) => {
                a.input.push(&mut out);
                a.model.push(&mut out);
                opt(&mut out, "target", &a.target);
                opt(&mut out, "caps", &a.caps);
                if a.strict {
                    out.push(("quota", "strict".into()));
                }
                opt(&mut out, "budgets", &a.budgets);
                path(&mut out, "costs", &a.costs);
                if a.greedy {
                    out.push(("knapsack", "greedy".into()));
                }
                on(&mut out, "compare", a.compare);
                on(&mut out, "export_preferences", a.export_preferences);
                opt(&mut out, "export_threshold", &a.export_threshold);
            }
            Command::Evaluate(a) => {
                a.input.push(&mut out);
                a.model.push(&mut out);
                opt(&mut out, "folds", &a.folds);
                opt(&mut out, "delta_grid", &a.delta_grid);
                opt(&mut out, "weight_grid", &a.weight_grid);
                on(&mut out, "per_user_auc", a.per_user);
            }
            Command::Bench(a) => {
                opt(&mut out, "nnz_grid", &a.nnz);
                opt(&mut out, "naive_max_nnz", &a.naive_max);
                opt(&mut out, "repeats", &a.repeats);
            }
            Command::Synth(a) => {
                opt(&mut out, "synth_users", &a.users);
                opt(&mut out, "synth_movies", &a.movies);
                opt(&mut out, "synth_features", &a.features);
                opt(&mut out, "synth_groups", &a.groups);
                opt(&mut out, "synth_noise", &a.noise);
            }
            Command::Mine(a) => {
                a.input.push(&mut out);
                opt(&mut out, "min_support", &a.min_support);
                opt(&mut out, "min_count", &a.min_count);
                opt(&mut out, "min_size", &a.min_size);
                opt(&mut out, "tolerance", &a.tolerance);
            }
        }
        // Generic overrides come last so they win over everything.
        for kv in &self.set {
            let (k, v) = kv.split_once('=').ok_or_else(|| format!("--set expects KEY=VALUE, got '{kv}'"))?;
            let key = crate::config::RunConfig::default()
                .entries()
                .into_iter()
                .map(|(k, _)| k)
                .find(|known| *known == k.trim())
                .ok_or_else(|| format!("unknown key '{}'", k.trim()))?;
            out.push((key, v.to_string()));
        }
        Ok(out)
    }
}
