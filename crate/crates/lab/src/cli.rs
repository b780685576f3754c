//! Command-line interface.
//!
//! Exit codes: 0 success, 2 configuration or usage error, 3 numerical
//! breakdown of the cluster expansion, 4 Hilbert-space dimension cap.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use cce_lab_core::cce::cce_coherence;
use cce_lab_core::ensemble;
use cce_lab_core::exact;
use cce_lab_core::geometry::{
    generate_diamond_bath, generate_gaas_bath, DiamondBathConfig, DotEnvelope, GaasBathConfig,
    SpinBath,
};
use cce_lab_core::hamiltonians::SpinSystem;
use cce_lab_core::model::BathState;
use cce_lab_core::scenario;
use cce_lab_core::CoreError;

use crate::config::{self, ModelConfig, RunConfig, StateConfig, SweepConfig};
use crate::exec::RayonExecutor;
use crate::formats;

#[derive(Parser)]
#[command(
    name = "cce-lab",
    about = "Cluster-correlation simulations of central-spin decoherence near clock transitions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a nuclear spin bath and write it as JSON.
    GenerateBath(GenerateBathArgs),
    /// Compute a coherence curve from a run configuration.
    Run(RunArgs),
    /// Sweep the magnetic field and extract T2 per point (NV scenario).
    Sweep(SweepArgs),
    /// Render curve or sweep CSV files as an SVG plot.
    Plot(PlotArgs),
}

#[derive(Args)]
struct GenerateBathArgs {
    /// Bath scenario: nv-diamond or gaas-dot.
    #[arg(long)]
    scenario: String,
    #[arg(long)]
    seed: u64,
    /// Isotopic abundance (nv-diamond), default 0.011.
    #[arg(long)]
    abundance: Option<f64>,
    /// Bath radius in nm (nv-diamond), max 6.
    #[arg(long)]
    radius_nm: Option<f64>,
    /// Dot height in nm (gaas-dot), default 6.
    #[arg(long)]
    lz_nm: Option<f64>,
    /// Lateral dot radius in nm (gaas-dot), default 30.
    #[arg(long)]
    rho0_nm: Option<f64>,
    /// Relative envelope density below which sites are dropped (gaas-dot).
    #[arg(long, default_value_t = 0.5)]
    density_cutoff: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    /// Override the CCE order from the config.
    #[arg(short = 'K', long)]
    order: Option<usize>,
    /// Override the expansion mode: modified or original.
    #[arg(long)]
    mode: Option<String>,
    /// Override the pulse sequence: fid or hahn.
    #[arg(long)]
    seq: Option<String>,
    /// Override the external field in Gauss (NV scenario).
    #[arg(short = 'B', long)]
    b_gauss: Option<f64>,
    /// Override the worker count (default: config, then CCE_LAB_THREADS,
    /// then 1).
    #[arg(long)]
    threads: Option<usize>,
    /// Also evaluate the exact small-bath reference and write exact.csv.
    #[arg(long)]
    compare_exact: bool,
    /// Write one CSV per CCE order instead of only the highest.
    #[arg(long)]
    all_orders: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    threads: Option<usize>,
    /// Keep the per-field coherence curves next to the sweep CSV.
    #[arg(long)]
    keep_curves: bool,
}

#[derive(Args)]
struct PlotArgs {
    /// Coherence curve CSVs; plotted as |L| against time.
    #[arg(long)]
    curve: Vec<PathBuf>,
    /// Sweep CSV; plotted as T2 against the field.
    #[arg(long)]
    sweep: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

pub fn run() {
    std::process::exit(run_with_args(std::env::args()));
}

pub fn run_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::GenerateBath(a) => cmd_generate_bath(&a),
        Command::Run(a) => cmd_run(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Plot(a) => cmd_plot(&a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code_for(&e)
        }
    }
}

fn exit_code_for(e: &anyhow::Error) -> i32 {
    for cause in e.chain() {
        if let Some(core) = cause.downcast_ref::<CoreError>() {
            return match core {
                CoreError::NumericalBreakdown { .. } => 3,
                CoreError::DimensionCap { .. } => 4,
                _ => 2,
            };
        }
    }
    2
}

fn cmd_generate_bath(args: &GenerateBathArgs) -> anyhow::Result<()> {
    let constants = cce_lab_core::constants::PhysicalConstants::default();
    let bath = match args.scenario.as_str() {
        "nv-diamond" => {
            let mut cfg = DiamondBathConfig::new(
                args.seed,
                args.abundance.unwrap_or(0.011),
                args.radius_nm.unwrap_or(4.0),
            );
            cfg.exclusion_nm = 0.5;
            generate_diamond_bath(&constants, &cfg)?
        }
        "gaas-dot" => {
            let cfg = GaasBathConfig {
                seed: args.seed,
                envelope: DotEnvelope {
                    l_z_nm: args.lz_nm.unwrap_or(6.0),
                    rho0_nm: args.rho0_nm.unwrap_or(30.0),
                },
                density_cutoff: args.density_cutoff,
            };
            generate_gaas_bath(&constants, &cfg)?
        }
        other => bail!("unknown bath scenario '{other}' (nv-diamond|gaas-dot)"),
    };
    formats::write_bath(&args.out, &bath)?;
    let nearest = &bath.sites[0];
    let mut report = format!(
        "wrote {} sites to {}; nearest site at {:.3} nm",
        bath.len(),
        args.out.display(),
        nearest.distance_nm()
    );
    if bath.scenario == cce_lab_core::geometry::BathScenario::NvDiamond {
        let hf = cce_lab_core::hamiltonians::hyperfine_vector(&constants, nearest)?;
        report.push_str(&format!(", |A1| = {:.1} kHz", hf.magnitude_khz));
    }
    eprintln!("{report}");
    Ok(())
}

fn thread_count(cli: Option<usize>, cfg: Option<usize>) -> anyhow::Result<usize> {
    let n = match (cli, cfg) {
        (Some(n), _) => n,
        (None, Some(n)) => n,
        (None, None) => match std::env::var("CCE_LAB_THREADS") {
            Ok(v) => v
                .parse::<usize>()
                .context("CCE_LAB_THREADS must be a positive integer")?,
            Err(_) => 1,
        },
    };
    if n == 0 {
        bail!("worker count must be at least 1");
    }
    Ok(n)
}

fn build_state(cfg: &StateConfig, system: &SpinSystem) -> BathState {
    match cfg {
        StateConfig::UniformUp => BathState::uniform_up(system.len()),
        StateConfig::MinOverhauser => ensemble::min_overhauser_state(system),
        StateConfig::Sampled { seed } => {
            let mut rng = ensemble::seeded_rng(*seed);
            ensemble::sample_bath_state(system, &mut rng)
        }
    }
}

fn load_system(cfg: &RunConfig) -> anyhow::Result<(SpinSystem, Vec<SpinBath>)> {
    let constants = config::load_constants(cfg.constants.as_deref())?;
    let baths: Vec<SpinBath> = cfg
        .baths
        .iter()
        .map(|p| formats::read_bath(p))
        .collect::<anyhow::Result<_>>()?;
    let system = match &cfg.model {
        ModelConfig::Nv {
            b_gauss,
            epsilon_khz,
        } => scenario::nv_system(&constants, &baths[0], *b_gauss, *epsilon_khz)?,
        ModelConfig::Driven {
            rabi_khz,
            detuning_khz,
            bath_b_gauss,
        } => scenario::driven_system(
            &constants,
            &baths[0],
            *rabi_khz,
            *detuning_khz,
            *bath_b_gauss,
        )?,
        ModelConfig::Dqd {
            j_ex_ghz,
            b_tesla,
            envelope,
            n_strongest,
        } => {
            let sys = scenario::dqd_system(
                &constants,
                &baths[0],
                &baths[1],
                *j_ex_ghz,
                *b_tesla,
                &(*envelope).into(),
            )?;
            scenario::truncate_strongest(&sys, *n_strongest)
        }
    };
    Ok((system, baths))
}

fn cmd_run(args: &RunArgs) -> anyhow::Result<()> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(k) = args.order {
        cfg.cce.max_order = k;
    }
    if let Some(mode) = &args.mode {
        cfg.cce.mode = mode.clone();
    }
    if let Some(seq) = &args.seq {
        cfg.sequence = match seq.as_str() {
            "fid" => config::SequenceConfig::Fid,
            "hahn" => config::SequenceConfig::Hahn,
            other => bail!("unknown sequence '{other}' (fid|hahn; rotary via config file)"),
        };
    }
    if let Some(b) = args.b_gauss {
        match &mut cfg.model {
            ModelConfig::Nv { b_gauss, .. } => *b_gauss = b,
            _ => bail!("--b-gauss applies to the nv scenario only"),
        }
    }
    if args.compare_exact {
        cfg.compare_exact = true;
    }
    cfg.validate()?;

    std::fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;
    let hash = config::config_hash(&cfg);
    let resolved = serde_json::to_string_pretty(&serde_json::json!({
        "config": cfg,
        "config_hash": hash,
    }))?;
    std::fs::write(args.out_dir.join("config.resolved.json"), resolved)?;

    let (system, _baths) = load_system(&cfg)?;
    let state = build_state(&cfg.state, &system);
    let times = cfg.times.build()?;
    let sequence = cfg.sequence.to_sequence();
    let cce = cfg.cce.to_cce()?;
    let threads = thread_count(args.threads, cfg.threads)?;
    let executor = RayonExecutor::new(threads)?;

    let result = cce_coherence(&system, &state, &sequence, &times, &cce, &executor)?;

    let orders: Vec<usize> = if args.all_orders {
        (1..=cce.max_order).collect()
    } else {
        vec![cce.max_order]
    };
    for k in orders {
        let name = if args.all_orders {
            format!("curve_order_{k}.csv")
        } else {
            "curve.csv".to_string()
        };
        formats::write_curve_csv(&args.out_dir.join(name), &times, result.order(k))?;
    }
    let mut extra = serde_json::Map::new();
    extra.insert("n_sites".into(), system.len().into());
    extra.insert("cluster_count".into(), result.cluster_count.into());
    extra.insert("threads".into(), threads.into());
    formats::write_curve_meta(
        &args.out_dir.join("curve.json"),
        &formats::CurveMeta {
            scenario: cfg.model.to_model().name().to_string(),
            sequence: sequence.name().to_string(),
            cce_order: cce.max_order,
            expansion_mode: cfg.cce.mode.clone(),
            bath_state_id: state.id_string(),
            config_hash: hash,
            extra,
        },
    )?;

    if cfg.compare_exact {
        let exact = exact::exact_coherence(&system, &state, &sequence, &times)?;
        formats::write_curve_csv(&args.out_dir.join("exact.csv"), &times, &exact)?;
        let max_dev = result
            .top()
            .iter()
            .zip(&exact)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        eprintln!("max |CCE - exact| = {max_dev:.3e}");
    }
    eprintln!(
        "wrote curve ({} points, {} clusters) to {}",
        times.len(),
        result.cluster_count,
        args.out_dir.display()
    );
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> anyhow::Result<()> {
    let cfg = SweepConfig::load(&args.config)?;
    std::fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;
    let hash = config::config_hash(&cfg);
    let resolved = serde_json::to_string_pretty(&serde_json::json!({
        "config": cfg,
        "config_hash": hash,
    }))?;
    std::fs::write(args.out_dir.join("config.resolved.json"), resolved)?;

    let constants = config::load_constants(cfg.constants.as_deref())?;
    let bath = formats::read_bath(&cfg.bath)?;
    let times = cfg.times.build()?;
    let sequence = cfg.sequence.to_sequence();
    let cce = cfg.cce.to_cce()?;
    let threads = thread_count(args.threads, cfg.threads)?;
    let executor = RayonExecutor::new(threads)?;

    // The bath state is fixed across the sweep; build it at the first point.
    let b_values = cfg.b_values();
    let reference = scenario::nv_system(&constants, &bath, b_values[0], cfg.epsilon_khz)?;
    let state = build_state(&cfg.state, &reference);

    let mut points = Vec::with_capacity(b_values.len());
    for &b in &b_values {
        let system = scenario::nv_system(&constants, &bath, b, cfg.epsilon_khz)?;
        let res = cce_coherence(&system, &state, &sequence, &times, &cce, &executor)?;
        if args.keep_curves {
            let name = format!("curve_B_{b}.csv");
            formats::write_curve_csv(&args.out_dir.join(name), &times, res.top())?;
        }
        points.push(ensemble::SweepPoint {
            b_value: b,
            t2: ensemble::extract_t2(&times, res.top())?,
        });
    }
    formats::write_sweep_csv(&args.out_dir.join("sweep.csv"), &points)?;

    if cfg.overhauser_samples > 0 {
        let samples =
            ensemble::overhauser_samples(&reference, bath.rng_seed, cfg.overhauser_samples)?;
        let sigma = ensemble::overhauser_variance_khz2(&reference).sqrt();
        let bins = 41;
        let counts = ensemble::histogram(&samples, -4.0 * sigma, 4.0 * sigma, bins)?;
        let mut out = String::from("h_khz_lo,h_khz_hi,count\n");
        let w = 8.0 * sigma / bins as f64;
        for (i, c) in counts.iter().enumerate() {
            let lo = -4.0 * sigma + i as f64 * w;
            out.push_str(&format!("{},{},{}\n", lo, lo + w, c));
        }
        std::fs::write(args.out_dir.join("overhauser_histogram.csv"), out)?;
    }
    eprintln!(
        "wrote {} sweep points to {}",
        points.len(),
        args.out_dir.display()
    );
    Ok(())
}

fn cmd_plot(args: &PlotArgs) -> anyhow::Result<()> {
    if args.curve.is_empty() == args.sweep.is_none() {
        bail!("pass either --curve file(s) or --sweep");
    }
    if let Some(sweep) = &args.sweep {
        let rows = formats::read_sweep_csv(sweep)?;
        let xs: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let ys: Vec<f64> = rows
            .iter()
            .map(|r| r.1.unwrap_or(f64::NAN))
            .collect();
        formats::plot_curves_svg(&args.out, &[("T2", &xs, &ys)], "B (G)", "T2 (ms)")?;
    } else {
        let mut loaded = Vec::new();
        for path in &args.curve {
            let (times, values) = formats::read_curve_csv(path)?;
            let abs: Vec<f64> = values.iter().map(|v| v.norm()).collect();
            let label = label_for(path);
            loaded.push((label, times, abs));
        }
        let series: Vec<(&str, &[f64], &[f64])> = loaded
            .iter()
            .map(|(l, t, a)| (l.as_str(), t.as_slice(), a.as_slice()))
            .collect();
        formats::plot_curves_svg(&args.out, &series, "t (ms)", "|L|")?;
    }
    eprintln!("wrote {}", args.out.display());
    Ok(())
}

fn label_for(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}
