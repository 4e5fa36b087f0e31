//! breaklab: run contamination attacks, breakdown detectors, and
//! reachable-set analyses from the command line.
//!
//! Samples come from CSV files (`--input`, repeatable for panels) or a
//! seeded generator (`--generate n=..,seed=..,domain=..`, with `--panel k`
//! for panels). Every run emits one JSON report whose `body` is a pure
//! function of the configuration — identical configs, including seeds,
//! produce byte-identical bodies — with the wall clock kept outside the
//! body. A "broken" verdict is a successful analysis: the exit status is
//! nonzero only for configuration, input, or budget errors.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, ValueEnum};
use serde::Serialize;

use breaklab_core::{
    breakdown_point, build_equivariant_attack, check_equivariance_tag,
    check_glm_scaling_identity, check_translation_half_identity, classify_limit, detect_def1,
    detect_def2, detect_def3, detect_def4, evaluate_trajectory, genton_lucas_limit_set,
    informativeness_query, mean_reachable_nonneg, median_reachable_analytic, nesting_check,
    reachable_oracle, AttackCatalog, AttackKind, AttackSpec, AttackTemplate,
    BreakdownPointResult, BreakdownTarget, ContaminationMask, DefinitionKind, DetectorConfig,
    Direction, Domain, EquivarianceTag, Estimator, FamilySpec, GroupAction, IdentityReport,
    LimitClassification, NestingReport, OracleParams, ReachableSet, Sample, Trajectory, Verdict,
    DEFAULT_C0, DEFAULT_GAMMA, DEFAULT_STEPS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    /// Materialize an attack, record the trajectory, and classify its tail.
    Attack,
    /// Sweep outlier counts for the smallest breaking fraction.
    BreakdownPoint,
    /// Compute reachable value sets (oracle, analytic, nesting, def4).
    Reachable,
    /// Check the estimator's declared equivariance structure.
    EquivarianceCheck,
    /// Run the limit-set collapse detector over a panel.
    LimitSet,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Attack => "attack",
            Command::BreakdownPoint => "breakdown-point",
            Command::Reachable => "reachable",
            Command::EquivarianceCheck => "equivariance-check",
            Command::LimitSet => "limit-set",
        }
    }
}

#[derive(Parser)]
#[command(
    name = "breaklab",
    version,
    about = "Breakdown detectors, contamination attacks, and reachable-set \
             oracles for classical statistics"
)]
struct Args {
    /// Analysis to run.
    #[arg(long, value_enum)]
    command: Command,

    /// Estimator: mean | median | trimmed_mean:<alpha> | std_dev | mad |
    /// b1 | b2 | ols | ols_slope | constant:<value>.
    #[arg(long)]
    estimator: String,

    /// CSV input path (one column scalar, two columns x,y; header
    /// optional). Repeat the flag to form a panel.
    #[arg(long)]
    input: Vec<PathBuf>,

    /// Generator spec `n=10,seed=1,domain=real`
    /// (domains: real | nonnegative | regression; seed defaults to 0).
    #[arg(long)]
    generate: Option<String>,

    /// Panel size drawn from the generator (members use seed, seed+1, ...).
    #[arg(long)]
    panel: Option<usize>,

    /// Retag scalar CSV input: real | nonnegative.
    #[arg(long)]
    domain: Option<String>,

    /// Attack overrides `kind=..,c0=..,gamma=..,M=..,dir=..,s=..[,target=..]`
    /// (kinds: shift-half | scale-half-x | point-mass |
    /// single-outlier-escape; dir: +1 | -1; s: outlier count, masking the
    /// first s positions). Without `kind`, the estimator's canonical
    /// equivariant battery is used.
    #[arg(long)]
    attack: Option<String>,

    /// Breakdown definition: def1 | def2 | def3 | def4 | genton-lucas.
    #[arg(long)]
    definition: Option<String>,

    /// Outlier count `s` for reachable and limit-set analyses.
    #[arg(long)]
    outliers: Option<usize>,

    /// Check the nesting chain s = 0..=s_max (reachable command).
    #[arg(long)]
    s_max: Option<usize>,

    /// Observed estimate for an informativeness query (reachable command).
    #[arg(long)]
    observed: Option<f64>,

    /// Oracle box half-width B.
    #[arg(long = "box")]
    box_half_width: Option<f64>,

    /// Oracle grid points per outlier dimension.
    #[arg(long)]
    grid: Option<usize>,

    /// Oracle evaluation budget.
    #[arg(long)]
    budget: Option<u64>,

    /// Tolerance overrides `key=value`: divergence_factor, convergence_rel,
    /// window, agreement_rel, merge_slack.
    #[arg(long)]
    tolerances: Option<String>,

    /// Report path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

// ---------------------------------------------------------------------------
// Report schema
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct Report {
    /// Everything that is a pure function of the configuration.
    body: ReportBody,
    wall_clock_ms: u64,
}

#[derive(Serialize)]
struct ReportBody {
    schema_version: &'static str,
    tool_version: &'static str,
    config: ConfigEcho,
    results: Results,
}

/// Full effective configuration, defaults included, so reports are
/// self-describing and reproducible.
#[derive(Serialize)]
struct ConfigEcho {
    command: &'static str,
    estimator: String,
    input: Vec<String>,
    generate: Option<GenerateEcho>,
    panel: Option<usize>,
    domain: Option<String>,
    attack: Option<AttackEcho>,
    definition: Option<String>,
    outliers: Option<usize>,
    s_max: Option<usize>,
    observed: Option<f64>,
    oracle: OracleParams,
    detector: DetectorConfig,
    out: Option<String>,
}

#[derive(Serialize, Clone, Copy)]
struct GenerateEcho {
    n: usize,
    seed: u64,
    domain: Domain,
}

#[derive(Serialize, Clone)]
struct AttackEcho {
    kind: Option<String>,
    c0: f64,
    gamma: f64,
    steps: usize,
    direction: i8,
    s: usize,
    target: Option<f64>,
}

#[derive(Serialize)]
#[serde(untagged)]
enum Results {
    Attack {
        runs: Vec<AttackRun>,
    },
    Breakdown(Box<BreakdownPointResult>),
    Reachable {
        s: usize,
        oracle: ReachableSet,
        analytic: Option<ReachableSet>,
        informativeness: Option<breaklab_core::InformativenessReport>,
    },
    Nesting(Box<NestingReport>),
    Def4 {
        s: usize,
        verdict: Verdict,
        sets: Vec<ReachableSet>,
    },
    Equivariance {
        tag_checks: Vec<IdentityReport>,
        translation_half: Vec<IdentityReport>,
        glm_scaling: Vec<IdentityReport>,
    },
    LimitSet {
        s: usize,
        battery: Vec<AttackSpec>,
        verdict: Verdict,
    },
}

#[derive(Serialize)]
struct AttackRun {
    spec: AttackSpec,
    /// Evaluated on the (first) sample.
    trajectory: Trajectory,
    classification: Option<LimitClassification>,
    classification_error: Option<String>,
    verdict: Verdict,
}

// ---------------------------------------------------------------------------
// key=value parsing
// ---------------------------------------------------------------------------

fn parse_kv(spec: &str, flag: &str) -> anyhow::Result<Vec<(String, String)>> {
    spec.split(',')
        .filter(|part| !part.trim().is_empty())
        .map(|part| {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| anyhow!("{flag}: expected key=value, got `{part}`"))?;
            Ok((key.trim().to_string(), value.trim().to_string()))
        })
        .collect()
}

fn parse_domain(name: &str) -> anyhow::Result<Domain> {
    match name {
        "real" => Ok(Domain::Real),
        "nonnegative" => Ok(Domain::Nonnegative),
        "regression" => Ok(Domain::Regression),
        other => bail!("unknown domain `{other}` (real | nonnegative | regression)"),
    }
}

fn parse_generate(spec: &str) -> anyhow::Result<GenerateEcho> {
    let mut n = None;
    let mut seed = 0u64;
    let mut domain = Domain::Real;
    for (key, value) in parse_kv(spec, "--generate")? {
        match key.as_str() {
            "n" => n = Some(value.parse().context("--generate: n must be an integer")?),
            "seed" => seed = value.parse().context("--generate: seed must be an integer")?,
            "domain" => domain = parse_domain(&value)?,
            other => bail!("--generate: unknown key `{other}` (n, seed, domain)"),
        }
    }
    Ok(GenerateEcho {
        n: n.ok_or_else(|| anyhow!("--generate: missing required key n"))?,
        seed,
        domain,
    })
}

fn parse_attack_overrides(spec: &str) -> anyhow::Result<AttackEcho> {
    let mut echo = AttackEcho {
        kind: None,
        c0: DEFAULT_C0,
        gamma: DEFAULT_GAMMA,
        steps: DEFAULT_STEPS,
        direction: 1,
        s: 1,
        target: None,
    };
    for (key, value) in parse_kv(spec, "--attack")? {
        match key.as_str() {
            "kind" => echo.kind = Some(value),
            "c0" => echo.c0 = value.parse().context("--attack: c0 must be a number")?,
            "gamma" => echo.gamma = value.parse().context("--attack: gamma must be a number")?,
            "M" | "steps" => {
                echo.steps = value.parse().context("--attack: M must be an integer")?
            }
            "dir" => {
                echo.direction = match value.as_str() {
                    "+1" | "1" | "forward" => 1,
                    "-1" | "inverse" => -1,
                    other => bail!("--attack: dir must be +1 or -1, got `{other}`"),
                }
            }
            "s" => echo.s = value.parse().context("--attack: s must be an integer")?,
            "target" => {
                echo.target = Some(value.parse().context("--attack: target must be a number")?)
            }
            other => bail!("--attack: unknown key `{other}`"),
        }
    }
    Ok(echo)
}

fn parse_tolerances(
    spec: Option<&str>,
) -> anyhow::Result<(DetectorConfig, f64)> {
    let mut detector = DetectorConfig::default();
    let mut merge_slack = OracleParams::default().merge_slack;
    if let Some(spec) = spec {
        for (key, value) in parse_kv(spec, "--tolerances")? {
            let number = || {
                value
                    .parse::<f64>()
                    .with_context(|| format!("--tolerances: {key} must be a number"))
            };
            match key.as_str() {
                "divergence_factor" => detector.divergence_factor = number()?,
                "convergence_rel" => detector.convergence_rel = number()?,
                "agreement_rel" => detector.agreement_rel = number()?,
                "window" => {
                    detector.window = value
                        .parse()
                        .context("--tolerances: window must be an integer")?
                }
                "merge_slack" => merge_slack = number()?,
                other => bail!("--tolerances: unknown key `{other}`"),
            }
        }
    }
    Ok((detector, merge_slack))
}

fn parse_definition(name: &str) -> anyhow::Result<DefinitionKind> {
    DefinitionKind::parse(name).map_err(|e| anyhow!(e))
}

// ---------------------------------------------------------------------------
// Sample acquisition
// ---------------------------------------------------------------------------

fn load_samples(args: &Args) -> anyhow::Result<(Vec<Sample>, Option<GenerateEcho>)> {
    if !args.input.is_empty() && args.generate.is_some() {
        bail!("--input and --generate are mutually exclusive");
    }
    if !args.input.is_empty() {
        let retag = args
            .domain
            .as_deref()
            .map(parse_domain)
            .transpose()?
            .filter(|d| *d != Domain::Real);
        let mut samples = Vec::with_capacity(args.input.len());
        for path in &args.input {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let mut sample = breaklab_core::io::parse_sample_csv(&text)
                .with_context(|| format!("parsing {}", path.display()))?;
            if let Some(domain) = retag {
                sample = sample
                    .retag(domain)
                    .with_context(|| format!("retagging {}", path.display()))?;
            }
            samples.push(sample);
        }
        return Ok((samples, None));
    }
    let Some(spec) = args.generate.as_deref() else {
        bail!("provide samples via --input or --generate");
    };
    let echo = parse_generate(spec)?;
    let count = args.panel.unwrap_or(1);
    if count == 0 {
        bail!("--panel must be at least 1");
    }
    let samples = breaklab_core::gen::panel(echo.domain, count, echo.n, echo.seed)?;
    Ok((samples, Some(echo)))
}

fn single_sample(samples: &[Sample]) -> anyhow::Result<&Sample> {
    match samples {
        [one] => Ok(one),
        _ => bail!(
            "this analysis takes exactly one sample, got {} (drop --panel or \
             extra --input flags)",
            samples.len()
        ),
    }
}

fn panel_samples(samples: &[Sample]) -> anyhow::Result<&[Sample]> {
    if samples.len() < 2 {
        bail!(
            "this analysis needs a panel of at least 2 samples (use --panel k \
             with --generate, or repeat --input)"
        );
    }
    Ok(samples)
}

// ---------------------------------------------------------------------------
// Command implementations
// ---------------------------------------------------------------------------

fn build_specs(
    est: &Estimator,
    sample: &Sample,
    overrides: &Option<AttackEcho>,
) -> anyhow::Result<Vec<AttackSpec>> {
    let n = sample.len();
    match overrides {
        Some(echo) => {
            let s = echo.s;
            let mask = ContaminationMask::first(n, s)?;
            let direction = Direction::from_sign(echo.direction)?;
            match echo.kind.as_deref() {
                Some(kind) => {
                    let kind = AttackKind::parse(kind)?;
                    let mut spec =
                        AttackSpec::new(kind, mask, echo.c0, echo.gamma, echo.steps, direction)?;
                    if let Some(target) = echo.target {
                        spec = spec.with_target(target)?;
                    }
                    Ok(vec![spec])
                }
                None => Ok(build_equivariant_attack(est, sample, s)?),
            }
        }
        None => Ok(build_equivariant_attack(est, sample, 1)?),
    }
}

fn run_attack(
    est: &Estimator,
    samples: &[Sample],
    specs: Vec<AttackSpec>,
    definition: Option<DefinitionKind>,
    detector: &DetectorConfig,
) -> anyhow::Result<Results> {
    let definition = definition.unwrap_or(DefinitionKind::Def1);
    let first = &samples[0];
    let mut runs = Vec::with_capacity(specs.len());
    for spec in specs {
        let trajectory = evaluate_trajectory(est, &spec.materialize(first)?);
        let (classification, classification_error) = match classify_limit(&trajectory, detector) {
            Ok(c) => (Some(c), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let verdict = match definition {
            DefinitionKind::Def1 => detect_def1(est, single_sample(samples)?, &spec, detector)?,
            DefinitionKind::Def2 => {
                let x = single_sample(samples)?;
                let space = est.descriptor(x.domain()).value_space;
                detect_def2(est, x, &spec, &space, detector)?
            }
            DefinitionKind::Def3 => detect_def3(est, panel_samples(samples)?, &spec, detector)?,
            DefinitionKind::Def4 | DefinitionKind::GentonLucas => bail!(
                "the attack command evaluates one attack at a time; use the \
                 reachable command for def4 and the limit-set command for \
                 genton-lucas"
            ),
        };
        runs.push(AttackRun {
            spec,
            trajectory,
            classification,
            classification_error,
            verdict,
        });
    }
    Ok(Results::Attack { runs })
}

fn run_breakdown_point(
    est: &Estimator,
    samples: Vec<Sample>,
    definition: Option<DefinitionKind>,
    overrides: &Option<AttackEcho>,
    detector: &DetectorConfig,
) -> anyhow::Result<Results> {
    let definition = definition.unwrap_or(DefinitionKind::Def1);
    let target = match definition {
        DefinitionKind::Def1 | DefinitionKind::Def2 => {
            BreakdownTarget::Single(single_sample(&samples)?.clone())
        }
        DefinitionKind::Def3 | DefinitionKind::GentonLucas => {
            BreakdownTarget::Panel(panel_samples(&samples)?.to_vec())
        }
        DefinitionKind::Def4 => bail!(
            "def4 concerns reachable sets; run the reachable command with \
             --definition def4"
        ),
    };
    let catalog = match overrides {
        Some(echo) => match echo.kind.as_deref() {
            Some(kind) => AttackCatalog::Custom(vec![AttackTemplate {
                kind: AttackKind::parse(kind)?,
                c0: echo.c0,
                gamma: echo.gamma,
                steps: echo.steps,
                direction: Direction::from_sign(echo.direction)?,
                target: echo.target,
            }]),
            None => AttackCatalog::Canonical,
        },
        None => AttackCatalog::Canonical,
    };
    let result = breakdown_point(est, &target, definition, &catalog, detector)?;
    Ok(Results::Breakdown(Box::new(result)))
}

fn run_reachable(
    est: &Estimator,
    samples: &[Sample],
    args: &Args,
    definition: Option<DefinitionKind>,
    params: &OracleParams,
) -> anyhow::Result<Results> {
    if definition == Some(DefinitionKind::Def4) {
        let panel = panel_samples(samples)?;
        let s = args
            .outliers
            .ok_or_else(|| anyhow!("--outliers is required for def4"))?;
        let verdict = detect_def4(est, panel, s, params)?;
        let sets = panel
            .iter()
            .map(|member| reachable_oracle(est, member, s, params))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(Results::Def4 { s, verdict, sets });
    }
    if let Some(definition) = definition {
        bail!(
            "the reachable command evaluates def4 only, got {}",
            definition.name()
        );
    }
    let x = single_sample(samples)?;
    if let Some(s_max) = args.s_max {
        let report = nesting_check(est, x, s_max, params)?;
        return Ok(Results::Nesting(Box::new(report)));
    }
    let s = args
        .outliers
        .ok_or_else(|| anyhow!("--outliers is required (or --s-max for a nesting check)"))?;
    let oracle = reachable_oracle(est, x, s, params)?;
    let analytic = match est {
        Estimator::Median => median_reachable_analytic(x, s).ok(),
        Estimator::Mean if x.domain() == Domain::Nonnegative => {
            mean_reachable_nonneg(x, s).ok()
        }
        _ => None,
    };
    let informativeness = args
        .observed
        .map(|t| {
            informativeness_query(
                est,
                FamilySpec {
                    n: x.len(),
                    domain: x.domain(),
                },
                s,
                t,
            )
        })
        .transpose()?;
    Ok(Results::Reachable {
        s,
        oracle,
        analytic,
        informativeness,
    })
}

fn run_equivariance_check(est: &Estimator, samples: &[Sample]) -> anyhow::Result<Results> {
    let x = single_sample(samples)?;
    let mut tag_checks = Vec::new();
    for tag in est.tags() {
        let actions = match tag {
            EquivarianceTag::TranslationEquivariant => vec![
                GroupAction::translate(5.5)?,
                GroupAction::affine(2.0, -3.0)?,
                GroupAction::scale(-1.0)?,
            ],
            EquivarianceTag::ScaleEquivariant => {
                vec![GroupAction::scale(3.0)?, GroupAction::scale(0.5)?]
            }
            EquivarianceTag::AffineInvariant => vec![
                GroupAction::affine(-5.0, 7.0)?,
                GroupAction::translate(4.0)?,
            ],
            EquivarianceTag::XScaleInverseEquivariant => {
                vec![GroupAction::x_scale(10.0)?, GroupAction::x_scale(0.1)?]
            }
        };
        tag_checks.push(check_equivariance_tag(est, tag, x, &actions)?);
    }
    let mut translation_half = Vec::new();
    if x.domain() != Domain::Regression && x.len() % 2 == 0 {
        for c in [1.0, -1.0, 10.0, -10.0, 1e3, -1e3] {
            translation_half.push(check_translation_half_identity(est, x, c)?);
        }
    }
    let mut glm_scaling = Vec::new();
    if est.has_tag(EquivarianceTag::XScaleInverseEquivariant)
        && x.domain() == Domain::Regression
        && x.len() % 2 == 0
    {
        for c in [10.0, 1e3] {
            glm_scaling.push(check_glm_scaling_identity(est, x, c)?);
        }
    }
    Ok(Results::Equivariance {
        tag_checks,
        translation_half,
        glm_scaling,
    })
}

fn run_limit_set(
    est: &Estimator,
    samples: &[Sample],
    outliers: Option<usize>,
    detector: &DetectorConfig,
) -> anyhow::Result<Results> {
    let panel = panel_samples(samples)?;
    let s = outliers.unwrap_or(1);
    let battery = build_equivariant_attack(est, &panel[0], s)?;
    let verdict = genton_lucas_limit_set(est, panel, &battery, detector)?;
    Ok(Results::LimitSet {
        s,
        battery,
        verdict,
    })
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

fn run(args: &Args) -> anyhow::Result<ReportBody> {
    let est = Estimator::parse(&args.estimator)?;
    let (detector, merge_slack) = parse_tolerances(args.tolerances.as_deref())?;
    let defaults = OracleParams::default();
    let oracle_params = OracleParams {
        box_half_width: args.box_half_width.unwrap_or(defaults.box_half_width),
        grid: args.grid.unwrap_or(defaults.grid),
        budget: args.budget.unwrap_or(defaults.budget),
        merge_slack,
    };
    let definition = args
        .definition
        .as_deref()
        .map(parse_definition)
        .transpose()?;
    let attack_overrides = args
        .attack
        .as_deref()
        .map(parse_attack_overrides)
        .transpose()?;
    let (samples, generate_echo) = load_samples(args)?;

    let results = match args.command {
        Command::Attack => {
            let specs = build_specs(&est, &samples[0], &attack_overrides)?;
            run_attack(&est, &samples, specs, definition, &detector)?
        }
        Command::BreakdownPoint => run_breakdown_point(
            &est,
            samples.clone(),
            definition,
            &attack_overrides,
            &detector,
        )?,
        Command::Reachable => run_reachable(&est, &samples, args, definition, &oracle_params)?,
        Command::EquivarianceCheck => run_equivariance_check(&est, &samples)?,
        Command::LimitSet => run_limit_set(&est, &samples, args.outliers, &detector)?,
    };

    Ok(ReportBody {
        schema_version: "1",
        tool_version: env!("CARGO_PKG_VERSION"),
        config: ConfigEcho {
            command: args.command.name(),
            estimator: est.name(),
            input: args
                .input
                .iter()
                .map(|p| p.display().to_string())
                .collect(),
            generate: generate_echo,
            panel: args.panel,
            domain: args.domain.clone(),
            attack: attack_overrides,
            definition: definition.map(|d| d.name().to_string()),
            outliers: args.outliers,
            s_max: args.s_max,
            observed: args.observed,
            oracle: oracle_params,
            detector,
            out: args.out.as_ref().map(|p| p.display().to_string()),
        },
        results,
    })
}

fn try_main(started: Instant, args: &Args) -> anyhow::Result<()> {
    let body = run(args)?;
    let report = Report {
        body,
        wall_clock_ms: started.elapsed().as_millis() as u64,
    };
    let json = serde_json::to_string_pretty(&report).context("serializing the report")?;
    match &args.out {
        Some(path) => std::fs::write(path, json.as_bytes())
            .with_context(|| format!("writing {}", path.display()))?,
        None => println!("{json}"),
    }
    Ok(())
}

fn main() {
    let started = Instant::now();
    let args = Args::parse();
    if let Err(err) = try_main(started, &args) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
