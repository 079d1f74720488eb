mod args;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, FromArgMatches};

use args::{BetaArgs, BinsArgs, Cli, Command, FilterArgs, ModeArgs, ReversalArgs};
use plsmooth::filters::{FilterKind, FilterSpec};
use plsmooth::pipeline::{
    app_params, beta_study, detail_enhance, flash_scene, hdr_ramp_texture, quantization_study, reversal_study,
    smooth_arm, tone_map_arm, write_csv, Application, StudyRow,
};
use plsmooth::raster::{load_image, normalize_observed, save_image, ImageKind};
use plsmooth::{Arm, Error, ImageBuffer, PipelineConfig, ToneMapConfig};

#[derive(Debug)]
enum Failure {
    /// Bad flag value: exit 2 with usage.
    Usage(String),
    /// Anything that went wrong while processing: exit 1.
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e.to_string())
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn flag_name(param: &str) -> String {
    match param {
        "k" => "-k".into(),
        "target_base_contrast" => "--contrast".into(),
        other => format!("--{}", other.replace('_', "-")),
    }
}

fn usage(flag: &str, reason: impl std::fmt::Display) -> Failure {
    Failure::Usage(format!("invalid value for {flag}: {reason}"))
}

/// Library parameter errors name the offending field; report them against
/// the corresponding flag.
fn check(r: plsmooth::Result<()>) -> Outcome<()> {
    r.map_err(|e| match e {
        Error::InvalidParameter { name, reason } => usage(&flag_name(name), reason),
        other => other.into(),
    })
}

fn application_spec(fa: &FilterArgs, app: Application, arm: Arm) -> Outcome<(FilterSpec, f64)> {
    let kind = fa.filter.kind();
    let defaults = app_params(kind, app);
    let mut spec = if arm == Arm::Pl { defaults.pl } else { defaults.pc };
    let given = [
        (
            "--sigma-s",
            fa.sigma_s.is_some(),
            matches!(kind, FilterKind::Bilateral | FilterKind::DomainTransform),
        ),
        (
            "--sigma-r",
            fa.sigma_r.is_some(),
            matches!(
                kind,
                FilterKind::Bilateral | FilterKind::DomainTransform | FilterKind::WeightedMedian
            ),
        ),
        (
            "--radius",
            fa.radius.is_some(),
            matches!(kind, FilterKind::WeightedMedian | FilterKind::Guided),
        ),
        ("--bins", fa.bins.is_some(), kind == FilterKind::WeightedMedian),
        ("--lambda", fa.lambda.is_some(), kind == FilterKind::L0),
        ("--epsilon", fa.epsilon.is_some(), kind == FilterKind::Guided),
        (
            "--iterations",
            fa.iterations.is_some(),
            kind == FilterKind::DomainTransform,
        ),
        ("--fast", fa.fast, kind == FilterKind::Bilateral),
    ];
    if let Some((flag, ..)) = given.iter().find(|(_, set, applies)| *set && !applies) {
        return Err(Failure::Usage(format!(
            "{flag} does not apply to --filter {}",
            kind.name()
        )));
    }
    match &mut spec {
        FilterSpec::Bilateral { sigma_s, sigma_r, fast } => {
            *sigma_s = fa.sigma_s.unwrap_or(*sigma_s);
            *sigma_r = fa.sigma_r.unwrap_or(*sigma_r);
            *fast = fa.fast;
        }
        FilterSpec::DomainTransformNC {
            sigma_s,
            sigma_r,
            iterations,
        } => {
            *sigma_s = fa.sigma_s.unwrap_or(*sigma_s);
            *sigma_r = fa.sigma_r.unwrap_or(*sigma_r);
            *iterations = fa.iterations.unwrap_or(*iterations);
        }
        FilterSpec::WeightedMedian { radius, sigma_r, bins } => {
            *radius = fa.radius.unwrap_or(*radius);
            *sigma_r = fa.sigma_r.unwrap_or(*sigma_r);
            *bins = fa.bins.unwrap_or(*bins);
        }
        FilterSpec::L0 { lambda, .. } => *lambda = fa.lambda.unwrap_or(*lambda),
        FilterSpec::Guided { radius, epsilon } => {
            *radius = fa.radius.unwrap_or(*radius);
            *epsilon = fa.epsilon.unwrap_or(*epsilon);
        }
    }
    check(spec.validate())?;
    Ok((spec, defaults.beta))
}

/// Filter, arm and β for an application run, validated before any file is
/// touched.
fn pipeline_config(fa: &FilterArgs, ma: &ModeArgs, app: Application) -> Outcome<(PipelineConfig, Arm)> {
    let arm = ma.mode.arm();
    let (spec, default_beta) = application_spec(fa, app, arm)?;
    if arm == Arm::Pc && ma.beta.is_some() {
        eprintln!("warning: --beta is ignored in pc mode");
    }
    let beta = ma.beta.filter(|_| arm != Arm::Pc).unwrap_or(default_beta);
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(usage("--beta", format!("must be >= 0, got {beta}")));
    }
    Ok((PipelineConfig::new(spec, beta), arm))
}

fn load(path: &Path) -> Outcome<(ImageBuffer, ImageKind)> {
    let kind = ImageKind::detect(path)?;
    Ok((load_image(path, kind)?, kind))
}

fn save(img: &ImageBuffer, path: &Path, png16: bool) -> Outcome<()> {
    let kind = ImageKind::for_output(path, png16)?;
    save_image(img, path, kind)?;
    Ok(())
}

fn check_output_path(path: &Path, png16: bool) -> Outcome<()> {
    ImageKind::for_output(path, png16)
        .map(|_| ())
        .map_err(|e| usage("--output", e))
}

fn emit(rows: &[StudyRow], out: Option<&Path>) -> Outcome<()> {
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|e| Failure::Run(format!("{}: {e}", path.display())))?;
            write_csv(rows, BufWriter::new(file))?;
        }
        None => write_csv(rows, io::stdout().lock())?,
    }
    Ok(())
}

fn run(cli: Cli) -> Outcome<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(usage("--threads", "must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Run(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Smooth(a) => {
            let (cfg, arm) = pipeline_config(&a.filter, &a.mode, Application::Enhance)?;
            check_output_path(&a.io.output, a.io.png16)?;
            let (img, _) = load(&a.io.input)?;
            let cfg = match &a.guide {
                Some(path) => cfg.with_guide(load(path)?.0),
                None => cfg,
            };
            save(&smooth_arm(&img, &cfg, arm)?, &a.io.output, a.io.png16)
        }
        Command::Enhance(a) => {
            let (cfg, arm) = pipeline_config(&a.filter, &a.mode, Application::Enhance)?;
            if !a.k.is_finite() {
                return Err(usage("-k", "must be finite"));
            }
            check_output_path(&a.io.output, a.io.png16)?;
            let (img, _) = load(&a.io.input)?;
            let smoothed = smooth_arm(&img, &cfg, arm)?;
            save(&detail_enhance(&img, &smoothed, a.k)?, &a.io.output, a.io.png16)
        }
        Command::Tonemap(a) => {
            let (mut cfg, arm) = pipeline_config(&a.filter, &a.mode, Application::ToneMap)?;
            if !(a.contrast.is_finite() && a.contrast > 1.0) {
                return Err(usage("--contrast", format!("must be > 1, got {}", a.contrast)));
            }
            cfg.tone_map = ToneMapConfig {
                target_base_contrast: a.contrast.log10(),
                saturation: a.saturation,
            };
            check(cfg.tone_map.validate())?;
            check_output_path(&a.io.output, a.io.png16)?;
            let (hdr, kind) = load(&a.io.input)?;
            if kind == ImageKind::Png8 {
                return Err(Failure::Run(format!(
                    "{}: tonemap needs a high-dynamic-range input (.pfm or 16-bit PNG)",
                    a.io.input.display()
                )));
            }
            save(&tone_map_arm(&hdr, &cfg, arm)?, &a.io.output, a.io.png16)
        }
        Command::Flashnoflash(a) => {
            let (cfg, arm) = pipeline_config(&a.filter, &a.mode, Application::Flash)?;
            check_output_path(&a.io.output, a.io.png16)?;
            let (noflash, _) = load(&a.io.input)?;
            let (flash, _) = load(&a.flash)?;
            noflash.ensure_same_size(&flash)?;
            save(
                &smooth_arm(&noflash, &cfg.with_guide(flash), arm)?,
                &a.io.output,
                a.io.png16,
            )
        }
        Command::StudyReversal(a) => study_reversal(a),
        Command::StudyBins(a) => study_bins(a),
        Command::StudyBeta(a) => study_beta(a),
    }
}

fn study_reversal(a: ReversalArgs) -> Outcome<()> {
    if !a.k.is_finite() {
        return Err(usage("-k", "must be finite"));
    }
    if !(a.tau.is_finite() && a.tau >= 0.0) {
        return Err(usage("--tau", format!("must be >= 0, got {}", a.tau)));
    }
    let rows = reversal_study(&a.filter.kinds(&FilterKind::ALL), a.k, a.tau)?;
    emit(&rows, a.out.as_deref())
}

fn study_bins(a: BinsArgs) -> Outcome<()> {
    if a.size < 2 {
        return Err(usage("--size", "must be >= 2"));
    }
    if let Some(b) = a.bins.iter().find(|&&b| b < 2) {
        return Err(usage("--bins", format!("must be >= 2, got {b}")));
    }
    check(FilterSpec::weighted_median(a.radius, a.sigma_r).validate())?;
    if !(a.beta.is_finite() && a.beta >= 0.0) {
        return Err(usage("--beta", format!("must be >= 0, got {}", a.beta)));
    }
    let (img, _) = normalize_observed(&hdr_ramp_texture(a.size, a.size, a.seed).map(f64::log10))?;
    let rows: Vec<StudyRow> = quantization_study(&img, a.radius, a.sigma_r, &a.bins, a.beta)?
        .iter()
        .flat_map(|r| r.to_study_rows(a.radius, a.sigma_r, a.beta))
        .filter(|r| a.timings || r.metric != "seconds")
        .collect();
    emit(&rows, a.out.as_deref())
}

fn study_beta(a: BetaArgs) -> Outcome<()> {
    if let Some(b) = a.betas.iter().find(|b| !(b.is_finite() && **b >= 0.0)) {
        return Err(usage("--betas", format!("must be >= 0, got {b}")));
    }
    let img = match &a.input {
        Some(path) => load(path)?.0,
        None => flash_scene(128, 128, a.seed).0,
    };
    let mut rows = Vec::new();
    for kind in a.filter.kinds(&FilterKind::ALL) {
        rows.extend(beta_study(&img, &app_params(kind, Application::Enhance).pl, &a.betas)?);
    }
    emit(&rows, a.out.as_deref())
}

fn main() -> ExitCode {
    let matches = Cli::command().get_matches();
    let sub = matches.subcommand_name().unwrap_or_default().to_string();
    let cli = Cli::from_arg_matches(&matches).unwrap_or_else(|e| e.exit());
    // a panic is a bug, but it still gets a one-line diagnostic and exit 1
    std::panic::set_hook(Box::new(|info| {
        eprintln!("plsmooth: internal error: {info}");
    }));
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Failure::Usage(msg))) => {
            let mut cmd = Cli::command();
            cmd.build();
            match cmd.find_subcommand_mut(&sub) {
                Some(sc) => sc.error(ErrorKind::ValueValidation, msg).exit(),
                None => cmd.error(ErrorKind::ValueValidation, msg).exit(),
            }
        }
        Ok(Err(Failure::Run(msg))) => {
            let _ = writeln!(io::stderr(), "plsmooth: error: {msg}");
            ExitCode::from(1)
        }
        Err(_) => ExitCode::from(1),
    }
}
