//! Command-line interface: `demo`, `embed`, `factorize`, `realize`,
//! `verify` and `diagnose` subcommands over the JSON formats in
//! [`crate::schema`].
//!
//! Exit codes: 0 on success, 1 on parse or validation errors, 2 when a
//! search finished but did not reach the success threshold (or a
//! verification failed). Outputs are written atomically (temp file plus
//! rename) and are byte-identical across runs for the same arguments.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::clifford::embed_config;
use crate::configurations::{gram, hexagon, pentagon, GramMatrix};
use crate::error::Error;
use crate::exterior::creation;
use crate::orthant::{default_inner_dim, factorize_nonneg_opts, hexagon_orthant_diagnostics};
use crate::realize::{
    pentagon_psd_diagnostics, realize_from, realize_ladder_opts, verify_realization, Realization,
};
use crate::schema::{
    matrix_json_from_complex, FactorizationJson, GramJson, OperatorsJson, RealizationJson,
    TraceConvention, VectorsJson,
};
use crate::search::{MultistartOptions, SearchReport, SUCCESS_RESIDUAL};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_BELOW_THRESHOLD: i32 = 2;

/// Parsed invocation; identical values (including the seed) produce
/// byte-identical output files.
#[derive(Debug, Parser)]
#[command(
    name = "psdreal",
    version,
    about = "Realize vector configurations as PSD matrices under the normalized trace inner product"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a built-in configuration and its Gram matrix.
    Demo {
        /// Which configuration to emit.
        #[arg(value_parser = ["pentagon", "hexagon"])]
        config: String,
        /// Path for the vectors JSON.
        #[arg(long)]
        output: PathBuf,
        /// Path for the Gram JSON (default: `<output stem>.gram.json`).
        #[arg(long)]
        gram_output: Option<PathBuf>,
    },
    /// Embed a configuration into Hermitian matrices via the cone embedding.
    Embed {
        /// Vectors JSON: {"n": dim, "vectors": [[...], ...]}.
        #[arg(long)]
        input: PathBuf,
        /// Path for the realization JSON.
        #[arg(long)]
        output: PathBuf,
        /// Also dump the basis creation operators next to the output.
        #[arg(long)]
        dump_operators: bool,
        #[arg(long, default_value_t)]
        trace_convention: TraceConvention,
    },
    /// Search for an entrywise-nonnegative factorization G = B^T B.
    Factorize {
        /// Gram JSON: {"n": n, "entries": [[...], ...]}.
        #[arg(long)]
        gram: PathBuf,
        /// Inner dimension m (default: n(n+1)/2).
        #[arg(long)]
        inner_dim: Option<usize>,
        #[arg(long, default_value_t = 50)]
        restarts: usize,
        #[arg(long, default_value_t = 20000)]
        max_iters: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Path for the factorization JSON.
        #[arg(long)]
        output: PathBuf,
        /// Optional CSV of residual traces (restart, iteration, residual).
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Search for PSD matrices realizing a Gram matrix.
    Realize {
        #[arg(long)]
        gram: PathBuf,
        /// Fixed matrix dimension.
        #[arg(long, conflicts_with = "ladder", required_unless_present = "ladder")]
        dim: Option<usize>,
        /// Escalate over d = 1, 2, 4, ... up to this cap, stopping at the
        /// first success.
        #[arg(long)]
        ladder: Option<usize>,
        /// Factor rank r <= d (default: d). Ignored in ladder mode.
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long, default_value_t = 50)]
        restarts: usize,
        #[arg(long, default_value_t = 20000)]
        max_iters: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, default_value_t)]
        trace_convention: TraceConvention,
    },
    /// Check a claimed realization against a Gram matrix. No search.
    Verify {
        #[arg(long)]
        gram: PathBuf,
        #[arg(long)]
        realization: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol_psd: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol_gram: f64,
        /// Optional path for the verification report JSON.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t)]
        trace_convention: TraceConvention,
    },
    /// Measure how a candidate fails the forced structure of a built-in
    /// impossible configuration.
    Diagnose {
        #[command(subcommand)]
        target: DiagnoseTarget,
    },
}

#[derive(Debug, Subcommand)]
pub enum DiagnoseTarget {
    /// Contradiction-chain defects of a five-matrix realization candidate.
    Pentagon {
        #[arg(long)]
        realization: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t)]
        trace_convention: TraceConvention,
    },
    /// Sign-parity defects of a six-column nonnegative factorization.
    Hexagon {
        #[arg(long)]
        factorization: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

/// Errors carrying the offending path (and field, via the message).
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: invalid JSON: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Invalid { path: PathBuf, source: Error },
    #[error(transparent)]
    Core(#[from] Error),
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

fn write_json_atomic<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("serialization cannot fail");
    bytes.push(b'\n');
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, &bytes).map_err(|source| CliError::Io {
        path: tmp.clone(),
        source,
    })?;
    fs::rename(&tmp, path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_trace_csv(path: &Path, report: &SearchReport) -> Result<(), CliError> {
    let mut out = String::from("restart,iteration,residual\n");
    if report.all_traces.is_empty() {
        for &(iter, res) in &report.residual_trace {
            out.push_str(&format!("{},{},{}\n", report.best_restart, iter, res));
        }
    } else {
        for trace in &report.all_traces {
            for &(iter, res) in &trace.points {
                out.push_str(&format!("{},{},{}\n", trace.restart, iter, res));
            }
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, out.as_bytes()).map_err(|source| CliError::Io {
        path: tmp.clone(),
        source,
    })?;
    fs::rename(&tmp, path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_gram(path: &Path) -> Result<GramMatrix, CliError> {
    let json: GramJson = read_json(path)?;
    json.to_gram().map_err(|source| CliError::Invalid {
        path: path.to_path_buf(),
        source,
    })
}

fn load_realization(path: &Path, convention: TraceConvention) -> Result<Realization, CliError> {
    let json: RealizationJson = read_json(path)?;
    json.to_realization(convention)
        .map_err(|source| CliError::Invalid {
            path: path.to_path_buf(),
            source,
        })
}

fn sibling_with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "output".into());
    path.with_file_name(format!("{stem}{suffix}"))
}

/// Executes a parsed invocation, returning the process exit code.
pub fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Demo {
            config,
            output,
            gram_output,
        } => {
            let cfg = match config.as_str() {
                "pentagon" => pentagon(),
                _ => hexagon(),
            };
            let g = gram(&cfg);
            let gram_path =
                gram_output.unwrap_or_else(|| sibling_with_suffix(&output, ".gram.json"));
            write_json_atomic(&output, &VectorsJson::from_config(&cfg))?;
            write_json_atomic(&gram_path, &GramJson::from_gram(&g))?;
            println!(
                "demo {config}: wrote {} vectors to {} and Gram to {}",
                cfg.len(),
                output.display(),
                gram_path.display()
            );
            Ok(EXIT_OK)
        }

        Command::Embed {
            input,
            output,
            dump_operators,
            trace_convention,
        } => {
            let vectors: VectorsJson = read_json(&input)?;
            let config = vectors.to_config().map_err(|source| CliError::Invalid {
                path: input.clone(),
                source,
            })?;
            let realization = embed_config(config.vectors())?;
            let json = RealizationJson::from_realization(&realization, None, trace_convention);
            write_json_atomic(&output, &json)?;
            if dump_operators {
                // Exterior rank after zero-padding even n to odd length.
                let k = config.ambient_dim() / 2;
                let ops = if k >= 1 {
                    (0..k)
                        .map(|i| {
                            let mut e = vec![0.0; k];
                            e[i] = 1.0;
                            creation(k, &e).map(|m| matrix_json_from_complex(&m))
                        })
                        .collect::<Result<Vec<_>, _>>()?
                } else {
                    Vec::new()
                };
                let path = sibling_with_suffix(&output, ".operators.json");
                write_json_atomic(
                    &path,
                    &OperatorsJson {
                        k,
                        d: realization.dim(),
                        creation: ops,
                    },
                )?;
            }
            let flag_note = if realization.flags().is_empty() {
                String::new()
            } else {
                format!(" flags={:?}", realization.flags())
            };
            println!(
                "embed: {} vectors -> d={} gram_residual={:.3e}{}",
                realization.len(),
                realization.dim(),
                realization.gram_residual().unwrap_or(f64::NAN),
                flag_note
            );
            Ok(EXIT_OK)
        }

        Command::Factorize {
            gram: gram_path,
            inner_dim,
            restarts,
            max_iters,
            seed,
            output,
            trace,
        } => {
            let g = load_gram(&gram_path)?;
            let m = inner_dim.unwrap_or_else(|| default_inner_dim(g.n()));
            let mut opts = MultistartOptions::new(restarts, max_iters, seed);
            if trace.is_some() {
                opts = opts.with_traces();
            }
            let (factorization, report) = factorize_nonneg_opts(&g, m, &opts)?;
            if let Some(trace_path) = trace {
                write_trace_csv(&trace_path, &report)?;
            }
            // Per-restart traces live in the CSV; the JSON keeps the
            // winning trace only.
            let mut slim = report.clone();
            slim.all_traces = Vec::new();
            write_json_atomic(
                &output,
                &FactorizationJson::from_factorization(&factorization, Some(&slim)),
            )?;
            let ok = report.best_residual < SUCCESS_RESIDUAL;
            if ok {
                println!(
                    "factorize: m={m} best residual = {:.6e} (restarts run: {}) -> PASS",
                    report.best_residual, report.restarts_run
                );
            } else {
                println!(
                    "factorize: no factorization found; best residual = {:.6e} (m={m}, restarts run: {})",
                    report.best_residual, report.restarts_run
                );
            }
            Ok(if ok { EXIT_OK } else { EXIT_BELOW_THRESHOLD })
        }

        Command::Realize {
            gram: gram_path,
            dim,
            ladder,
            rank,
            restarts,
            max_iters,
            seed,
            output,
            trace,
            trace_convention,
        } => {
            let g = load_gram(&gram_path)?;
            let mut opts = MultistartOptions::new(restarts, max_iters, seed);
            if trace.is_some() {
                opts = opts.with_traces();
            }
            let (realization, report) = match (dim, ladder) {
                (Some(d), None) => {
                    let r = rank.unwrap_or(d);
                    let (_, realization, report) = realize_from(&g, d, r, &opts, &[])?;
                    (realization, report)
                }
                (None, Some(d_max)) => realize_ladder_opts(&g, d_max, &opts)?,
                _ => unreachable!("clap enforces exactly one of --dim/--ladder"),
            };
            if let Some(trace_path) = trace {
                write_trace_csv(&trace_path, &report)?;
            }
            let mut slim = report.clone();
            slim.all_traces = Vec::new();
            write_json_atomic(
                &output,
                &RealizationJson::from_realization(&realization, Some(&slim), trace_convention),
            )?;
            let ok = report.converged;
            let ladder_note = if report.ladder.is_empty() {
                String::new()
            } else {
                format!(" ladder={:?}", report.ladder)
            };
            if ok {
                println!(
                    "realize: d={} best residual = {:.6e}{} -> PASS",
                    realization.dim(),
                    report.best_residual,
                    ladder_note
                );
            } else {
                println!(
                    "realize: no realization found; best residual = {:.6e} (d={}){}",
                    report.best_residual,
                    realization.dim(),
                    ladder_note
                );
            }
            Ok(if ok { EXIT_OK } else { EXIT_BELOW_THRESHOLD })
        }

        Command::Verify {
            gram: gram_path,
            realization: realization_path,
            tol_psd,
            tol_gram,
            output,
            trace_convention,
        } => {
            let g = load_gram(&gram_path)?;
            let realization = load_realization(&realization_path, trace_convention)?;
            let report = verify_realization(&g, &realization, tol_psd, tol_gram)?;
            if let Some(path) = output {
                write_json_atomic(&path, &report)?;
            }
            println!(
                "verify: gram_residual={:.6e} psd_ok={} gram_ok={} -> {}",
                report.gram_residual,
                report.psd_ok,
                report.gram_ok,
                if report.pass { "PASS" } else { "FAIL" }
            );
            Ok(if report.pass {
                EXIT_OK
            } else {
                EXIT_BELOW_THRESHOLD
            })
        }

        Command::Diagnose { target } => match target {
            DiagnoseTarget::Pentagon {
                realization: realization_path,
                output,
                trace_convention,
            } => {
                let realization = load_realization(&realization_path, trace_convention)?;
                let report = pentagon_psd_diagnostics(&realization)?;
                if let Some(path) = output {
                    write_json_atomic(&path, &report)?;
                }
                println!(
                    "diagnose pentagon: max_defect={:.6e} worst_link={} gram_residual={:.6e}",
                    report.max_defect, report.worst_link, report.gram_residual
                );
                Ok(EXIT_OK)
            }
            DiagnoseTarget::Hexagon {
                factorization: factorization_path,
                output,
            } => {
                let json: FactorizationJson = read_json(&factorization_path)?;
                let factorization =
                    json.to_factorization()
                        .map_err(|source| CliError::Invalid {
                            path: factorization_path.clone(),
                            source,
                        })?;
                let report = hexagon_orthant_diagnostics(&factorization.columns())?;
                if let Some(path) = output {
                    write_json_atomic(&path, &report)?;
                }
                println!(
                    "diagnose hexagon: max_defect={:.6e} worst_link={} gram_residual={:.6e}",
                    report.max_defect, report.worst_link, report.gram_residual
                );
                Ok(EXIT_OK)
            }
        },
    }
}
