//! `relprop`: mine relational features, fit ensembles, predict and cross-validate.
//!
//! Exit codes: 0 on success, 1 for usage or configuration errors (including
//! unreadable paths), 2 when input data is malformed or unusable.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use relprop::bayes::DEFAULT_SMOOTHING;
use relprop::cv::{cross_validate, PipelineConfig};
use relprop::grasp::{archive_to_text, GraspConfig, DEFAULT_MAXITER};
use relprop::miner::{mine, FeatureSet, MiningConfig, DEFAULT_MAX_LENGTH, DEFAULT_MIN_SUPPORT};
use relprop::model::{train, TrainedModel};
use relprop::parse::{parse_bias, parse_facts};
use relprop::propmat::build_matrix;
use relprop::Combination;

#[derive(Parser)]
#[command(name = "relprop", version, about = "Relational learning by selective propositionalization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Input {
    /// Facts file with example/2 declarations and ground facts.
    #[arg(long)]
    facts: PathBuf,
    /// Bias file of decl(pred(type, ...)). lines.
    #[arg(long)]
    bias: PathBuf,
}

#[derive(Args)]
struct MineArgs {
    /// Minimum fraction of examples a query must cover.
    #[arg(long, default_value_t = DEFAULT_MIN_SUPPORT)]
    min_support: f64,
    /// Maximum number of atoms per query.
    #[arg(long, default_value_t = DEFAULT_MAX_LENGTH)]
    max_length: usize,
}

#[derive(Args)]
struct FitArgs {
    /// GRASP iterations.
    #[arg(long, default_value_t = DEFAULT_MAXITER)]
    maxiter: usize,
    /// Number of archived subsets to combine.
    #[arg(long, default_value_t = 1)]
    ensemble_size: usize,
    /// Additive smoothing for the conditional estimates; 0 disables it.
    #[arg(long, default_value_t = DEFAULT_SMOOTHING)]
    smoothing: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// How member posteriors are combined: mean or vote.
    #[arg(long, default_value = "mean")]
    combine: String,
    /// Largest feature subset GRASP may build.
    #[arg(long)]
    max_subset_size: Option<usize>,
}

impl FitArgs {
    fn grasp(&self) -> GraspConfig {
        GraspConfig {
            maxiter: self.maxiter,
            seed: self.seed,
            smoothing: self.smoothing,
            max_subset_size: self.max_subset_size,
        }
    }

    fn combination(&self) -> Result<Combination, Failure> {
        self.combine.parse().map_err(Failure::from)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Mine frequent queries and write them as a feature file.
    Mine {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        mining: MineArgs,
        /// Feature file to write.
        #[arg(long)]
        out: PathBuf,
        /// Also write the boolean example-by-feature matrix as CSV.
        #[arg(long)]
        matrix: Option<PathBuf>,
    },
    /// Select feature subsets with GRASP and fit the ensemble.
    Fit {
        #[command(flatten)]
        input: Input,
        /// Feature file produced by `mine`.
        #[arg(long)]
        features: PathBuf,
        #[command(flatten)]
        fit: FitArgs,
        /// Model file to write.
        #[arg(long)]
        out: PathBuf,
        /// Also write the GRASP archive.
        #[arg(long)]
        archive: Option<PathBuf>,
    },
    /// Classify the examples of a facts file with a fitted model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        facts: PathBuf,
        /// CSV with id, label, predicted class and one posterior column per class.
        #[arg(long)]
        out: PathBuf,
    },
    /// Stratified k-fold cross-validation of the whole pipeline.
    Cv {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[command(flatten)]
        mining: MineArgs,
        #[command(flatten)]
        fit: FitArgs,
        /// Class scored for AUC; defaults to the first class in the facts file.
        #[arg(long)]
        positive: Option<String>,
        #[arg(long)]
        report: PathBuf,
    },
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn usage(error: anyhow::Error) -> Failure {
        Failure { code: 1, error }
    }
}

impl From<relprop::Error> for Failure {
    fn from(e: relprop::Error) -> Failure {
        Failure { code: if e.is_config() { 1 } else { 2 }, error: e.into() }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display())).map_err(Failure::usage)
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display())).map_err(Failure::usage)
}

fn in_file(path: &Path) -> impl FnOnce(relprop::Error) -> Failure + '_ {
    move |e| {
        let code = if e.is_config() { 1 } else { 2 };
        Failure { code, error: anyhow::Error::new(e).context(path.display().to_string()) }
    }
}

fn load(input: &Input) -> Result<(relprop::Dataset, relprop::Bias), Failure> {
    let facts = read(&input.facts)?;
    let bias = read(&input.bias)?;
    let bias = parse_bias(&bias).map_err(in_file(&input.bias))?;
    let d = parse_facts(&facts, &bias).map_err(in_file(&input.facts))?;
    Ok((d, bias))
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Mine { input, mining, out, matrix } => {
            let (d, bias) = load(&input)?;
            let cfg = MiningConfig { min_support: mining.min_support, max_length: mining.max_length, bias };
            let features = mine(&d, &cfg)?;
            write(&out, &features.to_text())?;
            if let Some(path) = matrix {
                write(&path, &build_matrix(&d, &features).to_csv(d.class_names()))?;
            }
            println!("{} queries from {} examples written to {}", features.len(), d.len(), out.display());
        }
        Command::Fit { input, features, fit, out, archive } => {
            let (d, bias) = load(&input)?;
            let features = FeatureSet::from_text(&read(&features)?).map_err(in_file(&features))?;
            let (model, found, m) = train(&d, &bias, features, &fit.grasp(), fit.ensemble_size, fit.combination()?)?;
            write(&out, &model.to_text())?;
            if let Some(path) = archive {
                write(&path, &archive_to_text(&found))?;
            }
            let wrong = (0..m.rows()).filter(|&k| model.ensemble.predict_at(&m, k).0 != m.labels()[k]).count();
            println!(
                "{} members, best training error {}/{}, ensemble training error {wrong}/{}",
                model.ensemble.members().len(),
                found.last().map_or(0, |a| a.solution.score),
                m.rows(),
                m.rows()
            );
        }
        Command::Predict { model, facts, out } => {
            let trained = TrainedModel::from_text(&read(&model)?).map_err(in_file(&model))?;
            let d = parse_facts(&read(&facts)?, &trained.bias).map_err(in_file(&facts))?;
            let predictions = trained.predict(&d);
            let mut csv = csv::Writer::from_path(&out)
                .with_context(|| format!("cannot write {}", out.display()))
                .map_err(Failure::usage)?;
            let mut header = vec!["id".to_string(), "label".into(), "predicted".into()];
            header.extend(trained.class_names.iter().map(|c| format!("p_{c}")));
            let csv_err = |e: csv::Error| Failure::usage(anyhow!(e).context(format!("cannot write {}", out.display())));
            csv.write_record(&header).map_err(csv_err)?;
            for (p, e) in predictions.iter().zip(d.examples()) {
                let mut record = vec![
                    p.id.to_string(),
                    d.class_names()[e.label].to_string(),
                    trained.class_names[p.predicted].to_string(),
                ];
                record.extend(p.posterior.iter().map(|x| format!("{x:?}")));
                csv.write_record(&record).map_err(csv_err)?;
            }
            csv.flush().with_context(|| format!("cannot write {}", out.display())).map_err(Failure::usage)?;
            let correct = predictions.iter().filter(|p| p.actual == Some(p.predicted)).count();
            println!("{} examples predicted, {correct} match their label", predictions.len());
        }
        Command::Cv { input, folds, mining, fit, positive, report } => {
            let (d, bias) = load(&input)?;
            let positive_class = match positive {
                None => 0,
                Some(name) => d
                    .class_index(&name)
                    .ok_or_else(|| Failure::usage(anyhow!("positive class `{name}` does not occur in the data")))?,
            };
            let cfg = PipelineConfig {
                min_support: mining.min_support,
                max_length: mining.max_length,
                grasp: fit.grasp(),
                ensemble_size: fit.ensemble_size,
                combination: fit.combination()?,
                positive_class,
            };
            let result = cross_validate(&d, &bias, folds, &cfg)?;
            write(&report, &result.render())?;
            println!(
                "accuracy {:.4} +/- {:.4} over {folds} folds, report written to {}",
                result.accuracy_mean,
                result.accuracy_std,
                report.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
