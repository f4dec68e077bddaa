//! Command-line front end of the hardedge laboratory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hardedge::comparison::{
    lindeberg_swap_experiment, TestFnVariant, TestFunctionSpec, BUDGET_C,
};
use hardedge::dynamics::{advance, run_coupling, DbmState, NoiseMode};
use hardedge::ensembles::{match_first_three_moments, sample_matrix, Entries, EntryLaw};
use hardedge::experiments::{
    cg_iterations, lop_estimate, run_complex_exact, run_condition, run_coupled_relaxation,
    run_nonsquare, run_smoothed_singular, run_universality_smallest, EpsilonKnobs,
    ExperimentConfig, MOffset, RunOutput,
};
use hardedge::io;
use hardedge::rng::RngStreamSpec;
use hardedge::spectra::{singular_values, SymmetrizedSpectrum};

mod verify;

#[derive(Parser)]
#[command(
    name = "hardedge",
    version,
    about = "Monte Carlo laboratory for the smallest singular value and condition number of random matrices"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug)]
struct GlobalOpts {
    /// Experiment configuration (JSON); defaults are built in per subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (one run per directory).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Trial-count override.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Trial-record output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Allow writing into an existing non-empty output directory.
    #[arg(long, global = true)]
    force: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Draw one matrix and emit its entries and symmetrized spectrum.
    Sample {
        #[arg(long = "N")]
        n: usize,
        /// Rows (defaults to N).
        #[arg(long = "M")]
        m: Option<usize>,
        #[arg(long, default_value = "gaussian-real")]
        ensemble: String,
    },
    /// Integrate one DBM trajectory and emit checkpoints (t, k, s_k).
    Dbm {
        #[arg(long = "N")]
        n: usize,
        #[arg(long, default_value = "gaussian-real")]
        ensemble: String,
        #[arg(long, default_value_t = 0.5)]
        t_end: f64,
        #[arg(long, default_value_t = 20)]
        checkpoints: usize,
    },
    /// Coupled relaxation experiment (σ₁ gap decay in t and N).
    Coupled,
    /// Smoothed analysis of σ₁ under H + λG.
    Smoothed,
    /// Two-sided universality bound for Nσ₁ against the Gaussian.
    Universality,
    /// KS distance of Nσ₁ to the exact complex hard-edge law 1 − e^{-r}.
    ComplexExact,
    /// Condition-number statistics (shared-G smoothing and κ/N sandwich).
    Condition,
    /// Nearly-square (M = N + ⌈log N⌉) variants of the pipelines.
    Nonsquare,
    /// Lindeberg swap experiment with the evaluable comparison budget.
    Lindeberg {
        #[arg(long = "N", default_value_t = 64)]
        n: usize,
        /// Fourth-moment gap of the matched three-point comparison law;
        /// by default the comparison is Gaussian vs Rademacher (gap 2).
        #[arg(long)]
        gap: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long, default_value_t = 1.5)]
        a: f64,
    },
    /// Application calculators.
    Apps {
        #[command(subcommand)]
        which: AppsCmd,
    },
    /// Run the built-in invariant suite.
    Verify {
        /// Only the fast closed-form tier.
        #[arg(long)]
        quick: bool,
    },
}

#[derive(Subcommand)]
enum AppsCmd {
    /// Loss of precision in decimal digits for the least-squares solve.
    Lop {
        #[arg(long = "M")]
        m: usize,
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        kappa: f64,
    },
    /// Worst-case conjugate-gradient iterations to a δ-approximation.
    Cg {
        #[arg(long)]
        kappa: f64,
        #[arg(long)]
        delta: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.global.threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            // configuration and argument problems exit 2, runtime failures 1
            let usage = e.downcast_ref::<hardedge::Error>().is_some_and(|he| {
                matches!(
                    he,
                    hardedge::Error::InvalidArgument(_)
                        | hardedge::Error::InvalidLaw(_)
                        | hardedge::Error::Json(_)
                )
            });
            if usage {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn parse_law(kind: &str) -> anyhow::Result<EntryLaw> {
    Ok(match kind {
        "gaussian-real" => EntryLaw::gaussian_real(),
        "gaussian-complex" => EntryLaw::gaussian_complex(),
        "rademacher" | "bernoulli" => EntryLaw::rademacher(),
        "rademacher-complex" | "bernoulli-complex" => EntryLaw::rademacher_complex(),
        "uniform-symmetric" => EntryLaw::uniform_symmetric(),
        other => {
            if let Some(gap) = other.strip_prefix("three-point:") {
                match_first_three_moments(gap.parse::<f64>().map_err(|e| {
                    hardedge::Error::InvalidArgument(format!("bad three-point gap: {e}"))
                })?)?
            } else {
                return Err(
                    hardedge::Error::InvalidLaw(format!("unknown ensemble `{other}`")).into()
                );
            }
        }
    })
}

fn effective_config(
    global: &GlobalOpts,
    default: ExperimentConfig,
) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &global.config {
        Some(path) => io::load_config(path)?,
        None => default,
    };
    if let Some(seed) = global.seed {
        cfg.master_seed = seed;
    }
    if let Some(trials) = global.trials {
        cfg.trials = trials;
    }
    if let Some(out) = &global.out {
        cfg.output_path = out.display().to_string();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn defaults(cmd: &Command) -> ExperimentConfig {
    let base = |name: &str, n_list: Vec<usize>, grid: Vec<f64>, ensemble: EntryLaw, trials| {
        ExperimentConfig {
            name: name.into(),
            n_list,
            m_offset: MOffset::Zero,
            ensemble,
            lambda_or_t_grid: grid,
            trials,
            master_seed: 1,
            epsilon_knobs: EpsilonKnobs::default(),
            output_path: format!("runs/{name}"),
        }
    };
    match cmd {
        Command::Coupled => {
            base("coupled", vec![64], vec![0.05, 0.1, 0.2, 0.4], EntryLaw::rademacher(), 200)
        }
        Command::Smoothed => {
            base("smoothed", vec![64, 128], vec![0.5, 1.0, 2.0], EntryLaw::rademacher(), 200)
        }
        Command::Universality => {
            base("universality", vec![128], vec![0.25, 0.5, 1.0, 2.0], EntryLaw::rademacher(), 1000)
        }
        Command::ComplexExact => {
            base("complex-exact", vec![128], vec![], EntryLaw::gaussian_complex(), 1000)
        }
        Command::Condition => base("condition", vec![128], vec![1.0], EntryLaw::rademacher(), 500),
        Command::Nonsquare => {
            let mut cfg = base("nonsquare", vec![64], vec![1.0], EntryLaw::gaussian_complex(), 400);
            cfg.m_offset = MOffset::CeilLogN;
            cfg
        }
        _ => base("run", vec![64], vec![], EntryLaw::gaussian_real(), 100),
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<ExitCode> {
    match &cli.cmd {
        Command::Sample { n, m, ensemble } => cmd_sample(&cli.global, *n, *m, ensemble),
        Command::Dbm { n, ensemble, t_end, checkpoints } => {
            cmd_dbm(&cli.global, *n, ensemble, *t_end, *checkpoints)
        }
        Command::Coupled => run_experiment(&cli, run_coupled_relaxation),
        Command::Smoothed => run_experiment(&cli, run_smoothed_singular),
        Command::Universality => run_experiment(&cli, run_universality_smallest),
        Command::ComplexExact => run_experiment(&cli, run_complex_exact),
        Command::Condition => run_experiment(&cli, run_condition),
        Command::Nonsquare => run_experiment(&cli, run_nonsquare),
        Command::Lindeberg { n, gap, r, a } => cmd_lindeberg(&cli.global, *n, *gap, *r, *a),
        Command::Apps { which } => cmd_apps(which),
        Command::Verify { quick } => cmd_verify(*quick),
    }
}

fn run_experiment(
    cli: &Cli,
    run: impl Fn(&ExperimentConfig) -> hardedge::Result<RunOutput>,
) -> anyhow::Result<ExitCode> {
    let cfg = effective_config(&cli.global, defaults(&cli.cmd))?;
    let out_dir = PathBuf::from(&cfg.output_path);
    io::prepare_run_dir(&out_dir, cli.global.force)?;
    let started = io::now_rfc3339();
    let output = run(&cfg)?;
    let finished = io::now_rfc3339();
    write_run_artifacts(&out_dir, &cfg, &output, cli.global.format, started, finished)?;
    let worst = output.summary.worst_margin();
    if output.summary.all_margins_ok() {
        println!(
            "ok: all margins non-negative (worst {worst:.4}); artifacts in {}",
            out_dir.display()
        );
        Ok(ExitCode::SUCCESS)
    } else {
        println!("CHECK FAILED: worst margin {worst:.4}; artifacts in {}", out_dir.display());
        Ok(ExitCode::from(1))
    }
}

fn write_run_artifacts(
    out_dir: &Path,
    cfg: &ExperimentConfig,
    output: &RunOutput,
    format: Format,
    started: String,
    finished: String,
) -> anyhow::Result<()> {
    io::write_config(cfg, &out_dir.join("config.json"))?;
    match format {
        Format::Csv => io::write_trials_csv(&out_dir.join("trials.csv"), &output.records)?,
        Format::Json => std::fs::write(
            out_dir.join("trials.json"),
            serde_json::to_string_pretty(&output.records)?,
        )?,
    }
    io::write_summary_json(&out_dir.join("summary.json"), &output.summary)?;
    // per-figure plot data: the median with its order-statistic band
    let mut figures: BTreeMap<(String, usize), Vec<io::PlotRow>> = BTreeMap::new();
    for q in &output.summary.quantiles {
        figures.entry((q.label.clone(), q.n)).or_default().push(io::PlotRow {
            x: q.param,
            y: q.p50,
            ci_lo: q.p50_ci_lo,
            ci_hi: q.p50_ci_hi,
        });
    }
    for ((label, n), mut rows) in figures {
        rows.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap());
        let safe: String = label.replace(['/', ' '], "-");
        io::write_plot_csv(&out_dir.join(format!("plot_{safe}_N{n}.csv")), &rows)?;
    }
    let mut manifest = io::RunManifest::new(cfg.clone(), started, finished);
    io::write_manifest(&mut manifest, out_dir)?;
    Ok(())
}

fn cmd_sample(
    global: &GlobalOpts,
    n: usize,
    m: Option<usize>,
    ensemble: &str,
) -> anyhow::Result<ExitCode> {
    let law = parse_law(ensemble)?;
    let m = m.unwrap_or(n);
    let out_dir = global.out.clone().unwrap_or_else(|| PathBuf::from("runs/sample"));
    io::prepare_run_dir(&out_dir, global.force)?;
    let stream = RngStreamSpec::new(global.seed.unwrap_or(1), 0);
    let sample = sample_matrix(&law, m, n, &stream)?;
    let mut text = String::new();
    match &sample.entries {
        Entries::Real(mat) => {
            for i in 0..mat.nrows() {
                let row: Vec<String> =
                    (0..mat.ncols()).map(|j| format!("{}", mat[(i, j)])).collect();
                text.push_str(&row.join(","));
                text.push('\n');
            }
        }
        Entries::Complex(mat) => {
            for i in 0..mat.nrows() {
                let row: Vec<String> = (0..mat.ncols())
                    .map(|j| format!("{}{:+}i", mat[(i, j)].re, mat[(i, j)].im))
                    .collect();
                text.push_str(&row.join(","));
                text.push('\n');
            }
        }
    }
    std::fs::write(out_dir.join("matrix.csv"), text)?;
    let spec = SymmetrizedSpectrum::from_singular(&singular_values(&sample)?);
    io::write_spectrum_csv(&out_dir.join("spectrum.csv"), &spec)?;
    println!("wrote {}x{} {} sample to {}", m, n, law.kind(), out_dir.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_dbm(
    global: &GlobalOpts,
    n: usize,
    ensemble: &str,
    t_end: f64,
    checkpoints: usize,
) -> anyhow::Result<ExitCode> {
    if !(t_end > 0.0) || checkpoints == 0 {
        return Err(hardedge::Error::InvalidArgument(
            "need t_end > 0 and at least one checkpoint".into(),
        )
        .into());
    }
    let law = parse_law(ensemble)?;
    let out_dir = global.out.clone().unwrap_or_else(|| PathBuf::from("runs/dbm"));
    io::prepare_run_dir(&out_dir, global.force)?;
    let seed = global.seed.unwrap_or(1);
    let h = sample_matrix(&law, n, n, &RngStreamSpec::new(seed, 0))?;
    let mut state = DbmState::from_sample(&h)?;
    let mut text = String::from("t,k,s_k\n");
    for (k, s) in state.spectrum.iter() {
        text.push_str(&format!("{},{},{}\n", state.t, k, s));
    }
    for i in 1..=checkpoints {
        let stop = t_end * i as f64 / checkpoints as f64;
        state = advance(&state, stop, &RngStreamSpec::new(seed, i as u64), NoiseMode::On)?;
        for (k, s) in state.spectrum.iter() {
            text.push_str(&format!("{},{},{}\n", state.t, k, s));
        }
    }
    std::fs::write(out_dir.join("trajectory.csv"), text)?;
    // one showcase coupling run for the (t, k, phi_k, psi_k) interface
    let g = sample_matrix(&law.gaussian_counterpart(), n, n, &RngStreamSpec::new(seed, 10_000))?;
    let sh = SymmetrizedSpectrum::from_singular(&singular_values(&h)?);
    let sg = SymmetrizedSpectrum::from_singular(&singular_values(&g)?);
    let run = run_coupling(
        &sh,
        &sg,
        0.5,
        t_end.min(0.2),
        &RngStreamSpec::new(seed, 10_001),
        NoiseMode::On,
        None,
    )?;
    io::write_coupling_csv(
        &out_dir.join("coupling_fields.csv"),
        &[run.initial.clone(), run.state.clone()],
    )?;
    println!("wrote DBM trajectory ({checkpoints} checkpoints) to {}", out_dir.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_lindeberg(
    global: &GlobalOpts,
    n: usize,
    gap: Option<f64>,
    r: f64,
    a: f64,
) -> anyhow::Result<ExitCode> {
    let law_x = EntryLaw::gaussian_real();
    let law_y = match gap {
        Some(g) => match_first_three_moments(g)?,
        None => EntryLaw::rademacher(),
    };
    let trials = global.trials.unwrap_or(2000);
    let seed = global.seed.unwrap_or(1);
    let rho = (n as f64).powf(-a);
    let spec = TestFunctionSpec::new(n, r, rho, a, TestFnVariant::F1)?;
    let out = lindeberg_swap_experiment(&law_x, &law_y, n, &spec, trials, seed, 0.2)?;
    let out_dir = global.out.clone().unwrap_or_else(|| PathBuf::from("runs/lindeberg"));
    io::prepare_run_dir(&out_dir, global.force)?;
    let mut csv = String::from("trial,ensemble,trace_f,F_value\n");
    for (i, ((tx, fx), (ty, fy))) in out
        .trace_x
        .iter()
        .zip(&out.f_x)
        .zip(out.trace_y.iter().zip(&out.f_y))
        .enumerate()
    {
        csv.push_str(&format!("{i},{},{tx},{fx}\n", law_x.kind()));
        csv.push_str(&format!("{i},{},{ty},{fy}\n", law_y.kind()));
    }
    std::fs::write(out_dir.join("trials.csv"), csv)?;
    let summary = serde_json::json!({
        "delta_hat": out.delta_hat,
        "stderr": out.stderr,
        "t": out.fourth_gap,
        "budget": out.budget,
        "C": BUDGET_C,
    });
    std::fs::write(out_dir.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    println!(
        "delta_hat = {:.6} (stderr {:.6}), fourth-moment gap t = {}, budget = {:.4}",
        out.delta_hat, out.stderr, out.fourth_gap, out.budget
    );
    if out.delta_hat <= out.budget {
        Ok(ExitCode::SUCCESS)
    } else {
        println!("CHECK FAILED: measured difference exceeds the comparison budget");
        Ok(ExitCode::from(1))
    }
}

fn cmd_apps(which: &AppsCmd) -> anyhow::Result<ExitCode> {
    match which {
        AppsCmd::Lop { m, n, kappa } => println!("{}", lop_estimate(*m, *n, *kappa)?),
        AppsCmd::Cg { kappa, delta } => println!("{}", cg_iterations(*kappa, *delta)?),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(quick: bool) -> anyhow::Result<ExitCode> {
    let failures = verify::run_suite(quick);
    if failures == 0 {
        println!("verify: all checks passed");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("verify: {failures} check(s) FAILED");
        Ok(ExitCode::from(1))
    }
}
