//! Command-line front end. [`run`] parses arguments, dispatches to the
//! library and maps errors to exit codes: 1 for usage, 2 for validation,
//! 3 for convergence.

use std::ffi::OsString;
use std::fs;
use std::io::{Read, Write};

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::chebdesign::{bayes_quadratic_uniform_eff, xi_m_beta};
use crate::design::{BSet, Design, DesignInterval, Prior, ReducedParameter};
use crate::error::Error;
use crate::models::{LinearModelPair, MichaelisMentenEmax, ShiftDomain};
use crate::optimizer::{
    equivalence_gap, optimize_local_linear, optimize_local_nonlinear, optimize_maximin_general,
    Criterion, LocalLinear, Maximin, OptimizerConfig, ThetaRegion,
};
use crate::powersim::{
    efficient_round, simulate_power, write_csv, Contamination, PowerCurve, SimulationSpec,
    TruthModel,
};
use crate::robust::{certify, efficiency_bound_check, optimize_bayes, AtomLocation};
use crate::tcrit::{
    r_value_linear, r_value_nonlinear, t_value_linear, t_value_nonlinear, SUP_GRID,
};

#[derive(Parser, Debug)]
#[command(name = "tdesign", version, about = "T-optimal discriminating designs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Locally T-optimal design
    #[command(allow_negative_numbers = true)]
    Local {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        opt: OptArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Bayesian T-optimal design for a linear pair
    #[command(allow_negative_numbers = true)]
    Bayes {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum)]
        prior: PriorKind,
        /// Half-width of the uniform-efficiency prior
        #[arg(long)]
        a: Option<f64>,
        /// Atom of a discrete prior as `b1[,b2...]:mass`; repeatable
        #[arg(long = "atom", allow_hyphen_values = true)]
        atoms: Vec<String>,
        #[command(flatten)]
        opt: OptArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Standardized maximin design
    #[command(allow_negative_numbers = true)]
    Maximin {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        bset: BSetArgs,
        /// EMAX region as three `lo:hi` axes; equal ends fix an axis
        #[arg(long, allow_hyphen_values = true)]
        region: Option<String>,
        /// Grid points per free region axis
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<usize>>,
        #[command(flatten)]
        opt: OptArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// The design ξ_{m,β} on [-r, r]
    Poly {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// T-efficiency of a design, optionally swept over the last parameter
    #[command(allow_negative_numbers = true)]
    Eff {
        #[command(flatten)]
        model: ModelArgs,
        /// Design JSON file, `-` for stdin
        #[arg(long, required_unless_present = "assumed")]
        design: Option<String>,
        /// Sweep `lo:hi:n` of the last component of --theta2 or --b, as CSV
        #[arg(long, allow_hyphen_values = true)]
        sweep: Option<String>,
        /// With --sweep: use at each point the locally optimal design for
        /// the first EMAX parameters θ₂₀,θ₂₁ given here instead of --design
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, requires = "sweep", conflicts_with = "design")]
        assumed: Option<Vec<f64>>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Optimal value R of the local problem
    #[command(allow_negative_numbers = true)]
    Rvalue {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Simulated power of the F test for constant against quadratic regression
    #[command(allow_negative_numbers = true)]
    Power {
        /// `id=path` of a design JSON; repeatable
        #[arg(long = "design", required = true)]
        designs: Vec<String>,
        /// Number of observations
        #[arg(long, default_value_t = 60)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Truth::Proportional)]
        truth: Truth,
        /// Comma list or `lo:hi:n`
        #[arg(long, allow_hyphen_values = true)]
        vartheta: String,
        #[arg(long, default_value_t = 50_000)]
        replications: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.5)]
        sigma2: f64,
        #[arg(long, default_value_t = 0.05)]
        level: f64,
        /// Probability of replacing an error by a Cauchy variate
        #[arg(long)]
        contamination: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        cauchy_scale: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Least-favourable certificate of a standardized maximin design
    #[command(allow_negative_numbers = true)]
    Certify {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        bset: BSetArgs,
        /// Design JSON file, `-` for stdin
        #[arg(long)]
        design: String,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args, Debug)]
struct ModelArgs {
    #[arg(long, value_enum)]
    models: ModelKind,
    /// Degree of the smaller polynomial
    #[arg(long)]
    m1: Option<usize>,
    /// Degree of the larger polynomial
    #[arg(long)]
    m2: Option<usize>,
    #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
    interval: Option<Vec<f64>>,
    /// Reduced parameter b, comma separated
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    b: Option<Vec<f64>>,
    /// EMAX parameters θ₂₀,θ₂₁,θ₂₂
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    theta2: Option<Vec<f64>>,
    /// Box for the Michaelis–Menten shift θ₁₂
    #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
    shift: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
struct BSetArgs {
    /// Symmetric interval for b; `inf` is allowed
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_hyphen_values = true)]
    bset: Option<Vec<f64>>,
    /// Point of a finite ℬ, comma separated; repeatable
    #[arg(long = "bpoint", allow_hyphen_values = true)]
    bpoints: Vec<String>,
}

#[derive(Args, Debug)]
struct OptArgs {
    #[arg(long, default_value_t = 401)]
    candidate_grid: usize,
    #[arg(long, default_value_t = 200)]
    max_iterations: usize,
}

#[derive(Args, Debug)]
struct OutArgs {
    /// Write to this file instead of stdout
    #[arg(long, short)]
    output: Option<String>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ModelKind {
    Poly,
    MmEmax,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum PriorKind {
    UniformEff,
    Atoms,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Truth {
    Proportional,
    FixedLinear,
}

#[derive(Debug)]
enum Failure {
    Usage(&'static str, String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Runs the program on `args` (including the program name) and returns the
/// exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    1
                }
            };
        }
    };
    configure_threads(stderr);
    match dispatch(cli.command, stdout, stderr) {
        Ok(()) => 0,
        Err(Failure::Usage(sub, msg)) => {
            let _ = writeln!(stderr, "error: {msg}\n");
            let mut cmd = Cli::command();
            if let Some(s) = cmd.find_subcommand_mut(sub) {
                let _ = write!(stderr, "{}", s.render_help());
            }
            1
        }
        Err(Failure::Lib(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn configure_threads(stderr: &mut dyn Write) {
    let Ok(v) = std::env::var("TDESIGN_THREADS") else { return };
    match v.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        _ => {
            let _ = writeln!(stderr, "warning: ignoring TDESIGN_THREADS={v}");
        }
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    match command {
        Command::Local { model, opt, out } => {
            let config = opt.config();
            let (interval, result) = match model.models {
                ModelKind::Poly => {
                    let (pair, interval) = model.linear("local")?;
                    let b = model.b("local", &pair)?;
                    (interval, optimize_local_linear(&pair, &b, &interval, &config)?)
                }
                ModelKind::MmEmax => {
                    let pair = model.nonlinear("local")?;
                    (*pair.interval(), optimize_local_nonlinear(&pair, &config)?)
                }
            };
            writeln!(
                stderr,
                "value {:.16e} gap {:.3e} iterations {}",
                result.value, result.gap, result.iterations
            )
            .map_err(Error::from)?;
            emit(&out, stdout, &format!("{}\n", result.design.to_json(&interval)))
        }
        Command::Bayes {
            model,
            prior,
            a,
            atoms,
            opt,
            out,
        } => {
            if model.models != ModelKind::Poly {
                return Err(Failure::Usage("bayes", "the Bayesian criterion needs --models poly".into()));
            }
            let (pair, interval) = model.linear("bayes")?;
            let design = match prior {
                PriorKind::UniformEff => {
                    let a = a.ok_or_else(|| Failure::Usage("bayes", "--prior uniform-eff needs --a".into()))?;
                    if pair.m1() != 1 || pair.m() != 2 || interval != DesignInterval::new(-1.0, 1.0)? {
                        return Err(Error::InvalidPrior(
                            "the uniform-efficiency prior is defined for constant vs quadratic on [-1, 1]".into(),
                        )
                        .into());
                    }
                    bayes_quadratic_uniform_eff(a)?
                }
                PriorKind::Atoms => {
                    if atoms.is_empty() {
                        return Err(Failure::Usage("bayes", "--prior atoms needs at least one --atom".into()));
                    }
                    let parsed = atoms
                        .iter()
                        .map(|s| parse_atom(s).ok_or_else(|| Failure::Usage("bayes", format!("bad atom `{s}`"))))
                        .collect::<CliResult<Vec<_>>>()?;
                    let prior = Prior::new(parsed)?;
                    optimize_bayes(&pair, &prior, &interval, &opt.config())?
                }
            };
            emit(&out, stdout, &format!("{}\n", design.to_json(&interval)))
        }
        Command::Maximin {
            model,
            bset,
            region,
            grid,
            opt,
            out,
        } => match model.models {
            ModelKind::Poly => {
                let (pair, interval) = model.linear("maximin")?;
                let bset = bset.parse("maximin")?;
                let cert = crate::robust::optimize_maximin(&pair, &bset, &interval, &opt.config())?;
                writeln!(
                    stderr,
                    "value {:.16e} slack {:.3e}",
                    cert.value, cert.directional_slack
                )
                .map_err(Error::from)?;
                emit(&out, stdout, &format!("{}\n", cert.design.to_json(&interval)))
            }
            ModelKind::MmEmax => {
                let text = region.ok_or_else(|| Failure::Usage("maximin", "--models mm-emax needs --region".into()))?;
                let bounds = parse_region(&text)
                    .ok_or_else(|| Failure::Usage("maximin", format!("bad region `{text}`")))?;
                let counts = match grid {
                    None => [10; 3],
                    Some(g) if g.len() == 3 => [g[0], g[1], g[2]],
                    Some(_) => return Err(Failure::Usage("maximin", "--grid takes three counts".into())),
                };
                let region = ThetaRegion::new([0, 1, 2].map(|i| (bounds[i].0, bounds[i].1, counts[i])))?;
                let template = model.nonlinear_at(region.grid()[0])?;
                let res = optimize_maximin_general(&template, &region, &opt.config())?;
                writeln!(
                    stderr,
                    "value {:.16e} gap {:.3e} candidates {}",
                    res.result.value,
                    res.result.gap,
                    res.candidates.len()
                )
                .map_err(Error::from)?;
                emit(&out, stdout, &format!("{}\n", res.result.design.to_json(template.interval())))
            }
        },
        Command::Poly { m, beta, r, out } => {
            let x = xi_m_beta(m, beta, r)?;
            let interval = DesignInterval::symmetric(r)?;
            emit(&out, stdout, &format!("{}\n", x.design.to_json(&interval)))
        }
        Command::Eff {
            model,
            design,
            sweep,
            assumed,
            out,
        } => {
            let loaded = design.map(|p| Design::from_json(&read_input(&p)?)).transpose()?;
            let Some(s) = sweep else {
                let (design, interval) = loaded.expect("clap requires --design without --assumed");
                let (t, r) = efficiency_parts(&model, &design, &interval, None)?;
                let e = crate::tcrit::efficiency_ratio(t, r)?;
                let report = json!({"t": t, "r": r, "efficiency": e});
                return emit(&out, stdout, &format!("{report}\n"));
            };
            let values = parse_range(&s).ok_or_else(|| Failure::Usage("eff", format!("bad sweep `{s}`")))?;
            let name = if model.models == ModelKind::Poly { "b" } else { "theta22" };
            let mut csv = format!("{name},efficiency\n");
            for v in values {
                let (design, interval) = match (&loaded, &assumed) {
                    (Some(l), _) => l.clone(),
                    (None, Some(a)) => {
                        if model.models != ModelKind::MmEmax || a.len() != 2 {
                            return Err(Failure::Usage("eff", "--assumed takes θ₂₀,θ₂₁ of --models mm-emax".into()));
                        }
                        let pair = model.nonlinear_at([a[0], a[1], v])?;
                        let res = optimize_local_nonlinear(&pair, &OptimizerConfig::default())?;
                        (res.design, *pair.interval())
                    }
                    (None, None) => unreachable!("clap requires --design or --assumed"),
                };
                let (t, r) = efficiency_parts(&model, &design, &interval, Some(v))?;
                let e = crate::tcrit::efficiency_ratio(t, r)?;
                csv.push_str(&format!("{v},{e}\n"));
            }
            emit(&out, stdout, &csv)
        }
        Command::Rvalue { model, out } => {
            let r = match model.models {
                ModelKind::Poly => {
                    let (pair, interval) = model.linear("rvalue")?;
                    let b = model.b("rvalue", &pair)?;
                    r_value_linear(&pair, &b, &interval)?
                }
                ModelKind::MmEmax => r_value_nonlinear(&model.nonlinear("rvalue")?)?,
            };
            let report = json!({"value": r.value, "bestapprox": r.bestapprox, "extremals": r.extremals});
            emit(&out, stdout, &format!("{report}\n"))
        }
        Command::Power {
            designs,
            n,
            truth,
            vartheta,
            replications,
            seed,
            sigma2,
            level,
            contamination,
            cauchy_scale,
            out,
        } => {
            let grid = parse_list_or_range(&vartheta)
                .ok_or_else(|| Failure::Usage("power", format!("bad --vartheta `{vartheta}`")))?;
            let truth = match truth {
                Truth::Proportional => TruthModel::Proportional,
                Truth::FixedLinear => TruthModel::FixedLinear,
            };
            let mut spec = SimulationSpec::new(truth, grid);
            spec.replications = replications;
            spec.seed = seed;
            spec.sigma2 = sigma2;
            spec.level = level;
            spec.contamination = contamination.map(|fraction| Contamination {
                fraction,
                cauchy_scale,
            });
            spec.validate()?;
            let mut curves: Vec<(String, PowerCurve)> = Vec::new();
            for entry in &designs {
                let (id, path) = entry
                    .split_once('=')
                    .ok_or_else(|| Failure::Usage("power", format!("--design expects id=path, got `{entry}`")))?;
                let (design, _) = Design::from_json(&read_input(path)?)?;
                let realized = efficient_round(&design, n)?;
                let curve = simulate_power(&spec, &realized)?;
                if curve.low_replication_warning {
                    writeln!(stderr, "warning: {replications} replications give unreliable power for {id}")
                        .map_err(Error::from)?;
                }
                curves.push((id.to_string(), curve));
            }
            let refs: Vec<(&str, &PowerCurve)> = curves.iter().map(|(i, c)| (i.as_str(), c)).collect();
            let mut buf = Vec::new();
            write_csv(&mut buf, &refs)?;
            emit(&out, stdout, &String::from_utf8_lossy(&buf))
        }
        Command::Certify {
            model,
            bset,
            design,
            out,
        } => {
            if model.models != ModelKind::Poly {
                return Err(Failure::Usage("certify", "certificates need --models poly".into()));
            }
            let (design, interval) = Design::from_json(&read_input(&design)?)?;
            let pair = model.linear_on("certify", &interval)?;
            let bset = bset.parse("certify")?;
            let cert = certify(&design, &pair, &bset, &interval)?;
            let bound = efficiency_bound_check(&cert, &pair);
            let slack = cert.directional_slack.max(0.0);
            let finite: Option<Vec<(ReducedParameter, f64)>> = cert
                .least_favorable
                .iter()
                .map(|a| match &a.location {
                    AtomLocation::Finite(b) => Some((b.clone(), a.efficiency)),
                    AtomLocation::Infinite => None,
                })
                .collect();
            let gap = match finite {
                Some(atoms) => {
                    let members = atoms
                        .into_iter()
                        .map(|(b, _)| {
                            let r = r_value_linear(&pair, &b, &interval)?.value;
                            let c: Box<dyn Criterion> = Box::new(LocalLinear { pair: pair.clone(), b });
                            Ok((c, r))
                        })
                        .collect::<crate::error::Result<Vec<_>>>()?;
                    equivalence_gap(&design, &Maximin::new(members)?, &interval, SUP_GRID)?
                }
                None => slack / (cert.value + slack),
            };
            let atoms: Vec<Value> = cert
                .least_favorable
                .iter()
                .map(|a| {
                    let b = match &a.location {
                        AtomLocation::Finite(b) => json!(b.values()),
                        AtomLocation::Infinite => json!("inf"),
                    };
                    json!({"b": b, "mass": a.mass, "efficiency": a.efficiency})
                })
                .collect();
            let report = json!({
                "value": cert.value,
                "directional_slack": cert.directional_slack,
                "equivalence_gap": gap,
                "bound_check": match &bound { Ok(()) => "pass".to_string(), Err(e) => e.to_string() },
                "least_favorable": atoms,
            });
            emit(&out, stdout, &format!("{report}\n"))?;
            bound.map_err(Failure::from)
        }
    }
}

impl OptArgs {
    fn config(&self) -> OptimizerConfig {
        OptimizerConfig {
            candidate_grid_size: self.candidate_grid,
            max_outer_iterations: self.max_iterations,
            ..OptimizerConfig::default()
        }
    }
}

impl ModelArgs {
    fn interval(&self, default: (f64, f64)) -> crate::error::Result<DesignInterval> {
        match &self.interval {
            Some(v) => DesignInterval::new(v[0], v[1]),
            None => DesignInterval::new(default.0, default.1),
        }
    }

    fn linear(&self, sub: &'static str) -> CliResult<(LinearModelPair, DesignInterval)> {
        let (Some(m1), Some(m2)) = (self.m1, self.m2) else {
            return Err(Failure::Usage(sub, "--models poly needs --m1 and --m2".into()));
        };
        let interval = self.interval((-1.0, 1.0))?;
        Ok((LinearModelPair::polynomial(m1, m2, &interval)?, interval))
    }

    fn linear_on(&self, sub: &'static str, interval: &DesignInterval) -> CliResult<LinearModelPair> {
        let (Some(m1), Some(m2)) = (self.m1, self.m2) else {
            return Err(Failure::Usage(sub, "--models poly needs --m1 and --m2".into()));
        };
        Ok(LinearModelPair::polynomial(m1, m2, interval)?)
    }

    fn b(&self, sub: &'static str, pair: &LinearModelPair) -> CliResult<ReducedParameter> {
        let b = self.b.clone().ok_or_else(|| Failure::Usage(sub, "--models poly needs --b".into()))?;
        if b.len() + 1 != pair.s() {
            return Err(Error::InvalidParameterSet(format!(
                "--b has {} values, the pair needs {}",
                b.len(),
                pair.s() - 1
            ))
            .into());
        }
        Ok(ReducedParameter::new(b)?)
    }

    fn nonlinear(&self, sub: &'static str) -> CliResult<MichaelisMentenEmax> {
        let t = self
            .theta2
            .as_ref()
            .ok_or_else(|| Failure::Usage(sub, "--models mm-emax needs --theta2".into()))?;
        if t.len() != 3 {
            return Err(Failure::Usage(sub, "--theta2 takes three values".into()));
        }
        self.nonlinear_at([t[0], t[1], t[2]])
    }

    fn nonlinear_at(&self, theta2: [f64; 3]) -> CliResult<MichaelisMentenEmax> {
        let interval = self.interval((1.0, 2.0))?;
        let domain = match &self.shift {
            Some(s) => ShiftDomain::bounded(s[0], s[1], &interval)?,
            None => ShiftDomain::pole_free(&interval),
        };
        Ok(MichaelisMentenEmax::with_shift_domain(theta2, interval, domain)?)
    }
}

impl BSetArgs {
    fn parse(&self, sub: &'static str) -> CliResult<BSet> {
        match (&self.bset, self.bpoints.is_empty()) {
            (Some(v), true) => {
                let (lo, hi) = (v[0], v[1]);
                if lo != -hi {
                    return Err(Error::InvalidParameterSet(format!(
                        "ℬ = [{lo}, {hi}] must be symmetric about 0"
                    ))
                    .into());
                }
                Ok(BSet::interval(hi)?)
            }
            (None, false) => {
                let points = self
                    .bpoints
                    .iter()
                    .map(|s| {
                        let v = parse_floats(s).ok_or_else(|| Failure::Usage(sub, format!("bad --bpoint `{s}`")))?;
                        Ok(ReducedParameter::new(v)?)
                    })
                    .collect::<CliResult<Vec<_>>>()?;
                Ok(BSet::finite(points)?)
            }
            _ => Err(Failure::Usage(sub, "give exactly one of --bset or --bpoint".into())),
        }
    }
}

/// `(T, R)` of a design for the model flags, with the last parameter
/// replaced by `last` when given.
fn efficiency_parts(
    model: &ModelArgs,
    design: &Design,
    interval: &DesignInterval,
    last: Option<f64>,
) -> CliResult<(f64, f64)> {
    match model.models {
        ModelKind::Poly => {
            let pair = model.linear_on("eff", interval)?;
            let b = model.b("eff", &pair)?;
            let mut v = b.values().to_vec();
            if let Some(x) = last {
                *v.last_mut().unwrap() = x;
            }
            let b = ReducedParameter::new(v)?;
            let t = t_value_linear(design, &pair, &b)?.value;
            let r = r_value_linear(&pair, &b, interval)?.value;
            Ok((t, r))
        }
        ModelKind::MmEmax => {
            let t = model
                .theta2
                .as_ref()
                .filter(|t| t.len() == 3)
                .ok_or_else(|| Failure::Usage("eff", "--models mm-emax needs three --theta2 values".into()))?;
            let theta = [t[0], t[1], last.unwrap_or(t[2])];
            let domain = match &model.shift {
                Some(s) => ShiftDomain::bounded(s[0], s[1], interval)?,
                None => ShiftDomain::pole_free(interval),
            };
            let pair = MichaelisMentenEmax::with_shift_domain(theta, *interval, domain)?;
            Ok((t_value_nonlinear(design, &pair)?.value, r_value_nonlinear(&pair)?.value))
        }
    }
}

fn emit(out: &OutArgs, stdout: &mut dyn Write, text: &str) -> CliResult<()> {
    match &out.output {
        Some(path) => fs::write(path, text).map_err(Error::from)?,
        None => stdout.write_all(text.as_bytes()).map_err(Error::from)?,
    }
    Ok(())
}

fn read_input(path: &str) -> crate::error::Result<String> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        return Ok(s);
    }
    Ok(fs::read_to_string(path)?)
}

fn parse_floats(s: &str) -> Option<Vec<f64>> {
    s.split(',').map(|v| v.trim().parse().ok()).collect()
}

fn parse_atom(s: &str) -> Option<(ReducedParameter, f64)> {
    let (b, m) = s.rsplit_once(':')?;
    let b = ReducedParameter::new(parse_floats(b)?).ok()?;
    Some((b, m.trim().parse().ok()?))
}

/// `lo:hi` or `lo=hi` per axis; a bare number fixes the axis.
fn parse_region(s: &str) -> Option<[(f64, f64); 3]> {
    let axes: Vec<(f64, f64)> = s
        .split(',')
        .map(|a| match a.split_once([':', '=']) {
            Some((lo, hi)) => Some((lo.trim().parse().ok()?, hi.trim().parse().ok()?)),
            None => {
                let v: f64 = a.trim().parse().ok()?;
                Some((v, v))
            }
        })
        .collect::<Option<_>>()?;
    (axes.len() == 3).then(|| [axes[0], axes[1], axes[2]])
}

/// `lo:hi:n`, `n ≥ 2` equally spaced values with exact ends.
fn parse_range(s: &str) -> Option<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return None;
    }
    let lo: f64 = parts[0].trim().parse().ok()?;
    let hi: f64 = parts[1].trim().parse().ok()?;
    let n: usize = parts[2].trim().parse().ok()?;
    if n < 2 || !(lo <= hi) {
        return None;
    }
    Some(
        (0..n)
            .map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
            .collect(),
    )
}

fn parse_list_or_range(s: &str) -> Option<Vec<f64>> {
    if s.contains(':') {
        parse_range(s)
    } else {
        parse_floats(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn region_syntax() {
        let r = parse_region("-1.1:-0.2,1=1,2:6").unwrap();
        assert_eq!(r, [(-1.1, -0.2), (1.0, 1.0), (2.0, 6.0)]);
        assert_eq!(parse_region("0,1,2").unwrap()[2], (2.0, 2.0));
        assert!(parse_region("0:1,2").is_none());
    }

    #[test]
    fn range_syntax() {
        assert_eq!(parse_range("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(parse_range("1:0:3").is_none());
        assert_eq!(parse_list_or_range("0,0.5").unwrap(), vec![0.0, 0.5]);
    }

    #[test]
    fn atom_syntax() {
        let (b, m) = parse_atom("0.5,-1:0.25").unwrap();
        assert_eq!(b.values(), &[0.5, -1.0]);
        assert_eq!(m, 0.25);
    }
}
