mod args;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use catastrank::cusp_model::{self, CuspParams, Stability};
use catastrank::dataset::load_csv;
use catastrank::harness::{
    self, emit_comparison_plot_data, emit_plot_data, parse_key_values, ExperimentConfig,
    RankerKind,
};
use catastrank::regress::{RegressorParams, TreeOptions};
use catastrank::{
    rank_features, relief_rank, FitOptions, OutcomeSelector, RankOptions, ReliefOptions,
    OUTPUT_DECIMALS,
};
use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};

use args::{Cli, Command, CompareArgs, DataArgs, DiagArgs, EvalArgs, RankArgs, ReliefArgs, SelectArgs, SweepArgs};

const EXIT_USAGE: u8 = 64;
const EXIT_FAILURE: u8 = 1;

/// Options that take a value and may precede the subcommand.
const GLOBAL_VALUED: [&str; 3] = ["--config", "--seed", "--threads"];

fn env_key(key: &str) -> String {
    format!("CATASTRANK_{}", key.to_ascii_uppercase().replace('-', "_"))
}

/// Index of the subcommand token, skipping values of global options.
fn subcommand_position(argv: &[OsString]) -> Option<usize> {
    let names: Vec<String> = Cli::command()
        .get_subcommands()
        .map(|c| c.get_name().to_owned())
        .collect();
    let mut i = 1;
    while i < argv.len() {
        let tok = argv[i].to_string_lossy();
        if GLOBAL_VALUED.contains(&tok.as_ref()) {
            i += 2;
            continue;
        }
        if names.iter().any(|n| *n == tok) {
            return Some(i);
        }
        i += 1;
    }
    None
}

fn config_path(argv: &[OsString]) -> Option<OsString> {
    for (i, a) in argv.iter().enumerate() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return argv.get(i + 1).cloned();
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Some(v.into());
        }
    }
    std::env::var_os("CATASTRANK_CONFIG")
}

fn given_on_command_line(argv: &[OsString], key: &str) -> bool {
    let flag = format!("--{key}");
    argv.iter().any(|a| {
        let s = a.to_string_lossy();
        s == flag.as_str() || s.starts_with(&format!("{flag}="))
    })
}

/// Turn config-file values into flags placed right after the subcommand.
/// Keys given as flags or through their environment variable are skipped,
/// which keeps flags > environment > file.
fn inject_config(argv: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let Some(at) = subcommand_position(&argv) else {
        return Ok(argv);
    };
    let text = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", Path::new(&path).display()))?;
    let pairs = parse_key_values(&text).map_err(|e| e.to_string())?;

    let cmd = Cli::command();
    let sub_name = argv[at].to_string_lossy().into_owned();
    let sub = cmd.find_subcommand(&sub_name).expect("matched above");
    let accepts = |c: &clap::Command, key: &str| c.get_arguments().any(|a| a.get_long() == Some(key));
    let mut injected = Vec::new();
    for (key, value) in pairs {
        if key == "config" {
            return Err("a config file cannot name another config file".into());
        }
        let known_here = accepts(sub, &key) || accepts(&cmd, &key);
        let known_anywhere = known_here || cmd.get_subcommands().any(|c| accepts(c, &key));
        if !known_anywhere {
            return Err(format!("config key `{key}` is not a flag of any subcommand"));
        }
        if known_here && !given_on_command_line(&argv, &key) && std::env::var_os(env_key(&key)).is_none() {
            injected.push(OsString::from(format!("--{key}={value}")));
        }
    }
    let mut out = argv;
    out.splice(at + 1..at + 1, injected);
    Ok(out)
}

fn outcome(data: &DataArgs) -> OutcomeSelector {
    OutcomeSelector::parse(&data.outcome)
}

fn print_effective(command: &str, pairs: &[(String, String)]) {
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "# effective configuration ({command})");
    for (k, v) in pairs {
        let _ = writeln!(err, "#   {k}={v}");
    }
}

fn kv(k: &str, v: impl ToString) -> (String, String) {
    (k.to_owned(), v.to_string())
}

fn write_or_print(out: Option<&Path>, body: &str) -> catastrank::Result<()> {
    match out {
        Some(p) => fs::write(p, body).map_err(|e| catastrank::Error::io(p, e)),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn run_rank(a: &RankArgs, seed: u64) -> catastrank::Result<u8> {
    print_effective(
        "rank",
        &[
            kv("input", a.data.input.display()),
            kv("outcome", &a.data.outcome),
            kv("top", a.top),
            kv("threshold", a.threshold),
            kv("asymmetry", a.asymmetry.map_or("last".into(), |f| f.to_string())),
            kv("starts", a.starts),
            kv("seed", seed),
            kv("out", a.out.as_ref().map_or("-".into(), |p| p.display().to_string())),
        ],
    );
    let ds = load_csv(&a.data.input, outcome(&a.data))?;
    let opts = RankOptions {
        n_f: a.top,
        threshold: a.threshold,
        asymmetry: a.asymmetry,
        seed,
        fit: FitOptions { starts: a.starts, ..Default::default() },
    };
    let table = rank_features(&ds, &opts)?;
    write_or_print(a.out.as_deref(), &table.to_csv())?;
    Ok(0)
}

fn run_relief(a: &ReliefArgs, seed: u64) -> catastrank::Result<u8> {
    print_effective(
        "relief",
        &[
            kv("input", a.data.input.display()),
            kv("outcome", &a.data.outcome),
            kv("m", a.m),
            kv("tau", a.tau),
            kv("bins", a.bins),
            kv("seed", seed),
            kv("out", a.out.as_ref().map_or("-".into(), |p| p.display().to_string())),
        ],
    );
    let ds = load_csv(&a.data.input, outcome(&a.data))?;
    let w = relief_rank(&ds, &ReliefOptions { m: a.m, tau: a.tau, bins: a.bins, seed })?;
    log::info!("outcome split into {} equal-frequency bins used as RELIEF classes", a.bins);
    write_or_print(a.out.as_deref(), &w.to_csv())?;
    Ok(0)
}

fn run_select(a: &SelectArgs) -> catastrank::Result<u8> {
    print_effective(
        "select",
        &[
            kv("input", a.data.input.display()),
            kv("outcome", &a.data.outcome),
            kv("ranking", a.ranking.display()),
            kv("top", a.top.map_or("kept".into(), |t| t.to_string())),
            kv("out", a.out.display()),
        ],
    );
    let ds = load_csv(&a.data.input, outcome(&a.data))?;
    let order = harness::read_feature_order(&a.ranking)?;
    let mut keep = match a.top {
        Some(t) if t == 0 || t > order.order.len() => {
            return Err(catastrank::Error::invalid(format!(
                "--top {t} outside 1..={}",
                order.order.len()
            )))
        }
        Some(t) => order.order[..t].to_vec(),
        None => order.kept.clone(),
    };
    keep.sort_unstable();
    ds.select_features(&keep)?.write_csv(&a.out)?;
    Ok(0)
}

fn sweep_config(s: &SweepArgs, seed: u64, ranker: RankerKind) -> ExperimentConfig {
    ExperimentConfig {
        input: s.data.input.clone(),
        outcome: outcome(&s.data),
        ranker,
        ranking: None,
        regressors: s.regressors.clone(),
        counts: s.counts.clone(),
        folds: s.folds,
        seed,
        error_scale: s.error_scale,
        asymmetry: s.asymmetry,
        fit: FitOptions { starts: s.starts, ..Default::default() },
        relief_m: s.m,
        relief_bins: s.bins,
        regressor: RegressorParams {
            knn_k: s.knn_k,
            tree: TreeOptions { min_leaf: s.min_leaf, holdout: s.holdout },
        },
    }
}

fn sweep_outputs(s: &SweepArgs) -> Vec<(String, String)> {
    vec![
        kv("out", s.out.as_ref().map_or("-".into(), |p| p.display().to_string())),
        kv("plot-dir", s.plot_dir.as_ref().map_or("-".into(), |p| p.display().to_string())),
    ]
}

fn run_eval(a: &EvalArgs, seed: u64) -> catastrank::Result<u8> {
    let mut cfg = sweep_config(&a.sweep, seed, a.ranker);
    cfg.ranking = a.ranking.clone();
    let mut echo = cfg.echo();
    echo.extend(sweep_outputs(&a.sweep));
    print_effective("eval", &echo);
    let report = harness::run_experiment(&cfg)?;
    if let Some(p) = &a.sweep.out {
        report.write_csv(p)?;
    }
    if let Some(d) = &a.sweep.plot_dir {
        emit_plot_data(&report, d)?;
    }
    print!("{}", report.to_table());
    Ok(report.exit_code() as u8)
}

fn run_compare(a: &CompareArgs, seed: u64) -> catastrank::Result<u8> {
    let mut cusp = sweep_config(&a.sweep, seed, RankerKind::Cusp);
    cusp.ranking = a.ranking_cusp.clone();
    let mut relief = sweep_config(&a.sweep, seed, RankerKind::Relief);
    relief.ranking = a.ranking_relief.clone();
    let mut echo: Vec<(String, String)> = cusp
        .echo()
        .into_iter()
        .filter(|(k, _)| k != "ranker" && k != "ranking")
        .collect();
    echo.push(kv("ranking-cusp", cusp.ranking.as_ref().map_or(String::new(), |p| p.display().to_string())));
    echo.push(kv("ranking-relief", relief.ranking.as_ref().map_or(String::new(), |p| p.display().to_string())));
    echo.extend(sweep_outputs(&a.sweep));
    print_effective("compare", &echo);
    let report = harness::compare_rankers(&cusp, &relief)?;
    if let Some(p) = &a.sweep.out {
        report.write_csv(p)?;
    }
    if let Some(d) = &a.sweep.plot_dir {
        emit_comparison_plot_data(&report, d)?;
    }
    print!("{}", report.to_table());
    Ok(report.exit_code() as u8)
}

fn run_diag(a: &DiagArgs) -> catastrank::Result<u8> {
    print_effective("cusp-diag", &[kv("alpha", a.alpha), kv("beta", a.beta)]);
    let p = CuspParams::new(a.alpha, a.beta);
    let eq = cusp_model::equilibria(p);
    let log_psi = cusp_model::log_normalizer(p)?;
    let d = OUTPUT_DECIMALS;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "alpha\t{:.d$}", a.alpha);
    let _ = writeln!(out, "beta\t{:.d$}", a.beta);
    let _ = writeln!(out, "discriminant\t{:.d$}", eq.discriminant);
    for (r, s) in eq.roots.iter().zip(&eq.stability) {
        let label = match s {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
        };
        let _ = writeln!(out, "equilibrium\t{r:.d$}\t{label}");
    }
    let _ = writeln!(out, "log_normalizer\t{log_psi:.d$}");
    Ok(0)
}

fn dispatch(cli: &Cli) -> catastrank::Result<u8> {
    match &cli.command {
        Command::Rank(a) => run_rank(a, cli.seed),
        Command::Relief(a) => run_relief(a, cli.seed),
        Command::Select(a) => run_select(a),
        Command::Eval(a) => run_eval(a, cli.seed),
        Command::Compare(a) => run_compare(a, cli.seed),
        Command::CuspDiag(a) => run_diag(a),
    }
}

fn main() -> ExitCode {
    let argv: Vec<OsString> = std::env::args_os().collect();
    let argv = match inject_config(argv) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(EXIT_USAGE);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} worker threads: {e}");
            return ExitCode::from(EXIT_FAILURE);
        }
    }

    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}
