//! `lossgeom` command-line front end.

mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lossgeom::{
    antigauge, antipolar_bayes_risk_with, antipolar_loss, compose, dual_msum_solve, normalize_canonical,
    numeric_antipolar, parse_msum_spec, parse_spec, regret_report, shift_maximum, substitute, verify_all,
    weight_function, AntipolarMethod, GeomError, LossVector, MSumMode, ParseError, PosVector, ProperLoss,
    SimplexGrid, Tolerances,
};
use serde_json::json;

use output::{Format, Record};

#[derive(Parser)]
#[command(name = "lossgeom", version, about = "Evaluate, compose, transform and verify proper losses")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    /// Output format; defaults to csv (json for `verify`).
    #[arg(long, global = true)]
    format: Option<Format>,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<std::path::PathBuf>,

    /// Dimension for family specs without `n=`; defaults to the length of
    /// the point argument, or 2.
    #[arg(long, global = true)]
    n: Option<usize>,

    /// Seed for any randomized step. Every computation is currently
    /// deterministic; the value is echoed for reproducibility.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Loss vector and Bayes risk at p.
    Eval {
        #[arg(long)]
        loss: String,
        #[arg(long, allow_hyphen_values = true)]
        p: String,
    },
    /// Bayes risk at p.
    Bayes {
        #[arg(long)]
        loss: String,
        #[arg(long, allow_hyphen_values = true)]
        p: String,
    },
    /// Antipolar Bayes risk, antipolar loss and minimizer at x.
    Antipolar {
        #[arg(long)]
        loss: String,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
    },
    /// Superprediction boundary of a binary loss as rows t,l1,l2.
    Boundary {
        #[arg(long)]
        loss: String,
        #[arg(long, default_value_t = 20)]
        resolution: usize,
    },
    /// Run the property suite; exit 1 if any check fails.
    Verify {
        #[arg(long)]
        loss: String,
        #[arg(long, default_value_t = 25)]
        resolution: usize,
        /// Use this tolerance for every check.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Canonical normalization: scale so the Bayes risk peaks at 1.
    Normalize {
        #[arg(long)]
        loss: String,
    },
    /// Move the Bayes-risk maximizer to p0 and report the grid argmax.
    Shiftmax {
        #[arg(long)]
        loss: String,
        #[arg(long)]
        p0: String,
        /// Overall scale of the shifted loss.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 200)]
        resolution: usize,
    },
    /// Evaluate an msum spec at p, with part risks or the optimal split.
    Compose {
        #[arg(long)]
        loss: String,
        #[arg(long)]
        p: String,
    },
    /// Bregman divergence and regret of reporting q under truth p.
    Bregman {
        #[arg(long)]
        loss: String,
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: String,
    },
    /// Prediction whose loss vector is dominated by x.
    Substitute {
        #[arg(long)]
        loss: String,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
    },
    /// Weight function of a binary loss at t, or over an interior grid.
    Weightfn {
        #[arg(long)]
        loss: String,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long, default_value_t = 20)]
        resolution: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Auto,
    Numeric,
}

enum Failure {
    Usage(String),
    Verify(String),
}

impl From<GeomError> for Failure {
    fn from(e: GeomError) -> Self {
        Failure::Usage(format!("error: {e}"))
    }
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        Failure::Usage(format!("error: invalid loss spec: {e}"))
    }
}

fn parse_point(flag: &str, text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Failure::Usage(format!("error: --{flag}: cannot parse {s:?} as a number")))
        })
        .collect()
}

fn dim_for(cli_n: Option<usize>, point: Option<&[f64]>) -> usize {
    cli_n.or(point.map(|p| p.len())).unwrap_or(2)
}

fn load(spec: &str, n: usize) -> Result<ProperLoss, Failure> {
    Ok(parse_spec(spec, n)?)
}

fn pos(flag: &str, text: &str, loss: &ProperLoss) -> Result<PosVector, Failure> {
    let v = parse_point(flag, text)?;
    if v.len() != loss.dim() {
        return Err(Failure::Usage(format!(
            "error: --{flag} has {} entries but {} has dimension {}",
            v.len(),
            loss.name(),
            loss.dim()
        )));
    }
    Ok(PosVector::new(v)?)
}

fn require_binary(loss: &ProperLoss) -> Result<(), Failure> {
    if loss.dim() != 2 {
        return Err(Failure::Usage(format!("error: {} is not a binary loss", loss.name())));
    }
    Ok(())
}

fn argmax(loss: &ProperLoss, grid: &SimplexGrid) -> (PosVector, f64) {
    let risks: Vec<f64> = grid.points().iter().map(|p| loss.risk_raw(p.as_slice())).collect();
    let (i, v) = risks
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
    (grid.points()[i].clone(), v)
}

/// Runs the command and returns the rendered output.
fn run(cli: &Cli) -> Result<String, Failure> {
    let format = cli.format.unwrap_or(match cli.cmd {
        Cmd::Verify { .. } => Format::Json,
        _ => Format::Csv,
    });
    let record = match &cli.cmd {
        Cmd::Eval { loss, p } => {
            let point = parse_point("p", p)?;
            let l = load(loss, dim_for(cli.n, Some(&point)))?;
            let p = pos("p", p, &l)?;
            Record::new()
                .with("loss", l.name())
                .with("p", p.as_slice())
                .with("l", l.loss(&p)?.into_vec())
                .with("rho", l.bayes_risk(&p)?)
        }
        Cmd::Bayes { loss, p } => {
            let point = parse_point("p", p)?;
            let l = load(loss, dim_for(cli.n, Some(&point)))?;
            let p = pos("p", p, &l)?;
            Record::new()
                .with("loss", l.name())
                .with("p", p.as_slice())
                .with("rho", l.bayes_risk(&p)?)
        }
        Cmd::Antipolar { loss, x, method } => {
            let point = parse_point("x", x)?;
            let l = load(loss, dim_for(cli.n, Some(&point)))?;
            let x = pos("x", x, &l)?;
            let (m, anti) = match method {
                MethodArg::Auto => (AntipolarMethod::Auto, antipolar_loss(&l)?),
                MethodArg::Numeric => (AntipolarMethod::Numeric, numeric_antipolar(&l)),
            };
            let res = antipolar_bayes_risk_with(&l, &x, m)?;
            Record::new()
                .with("loss", l.name())
                .with("x", x.as_slice())
                .with("value", res.value)
                .with("antipolar_loss", anti.loss_raw(x.as_slice()))
                .with("minimizer", res.minimizer.as_slice())
                .with("method", res.method.as_str())
                .with("certified_gap", res.certified_gap)
        }
        Cmd::Boundary { loss, resolution } => {
            let l = load(loss, cli.n.unwrap_or(2))?;
            require_binary(&l)?;
            if *resolution < 2 {
                return Err(GeomError::ResolutionTooSmall(*resolution).into());
            }
            let rows = (1..*resolution)
                .map(|k| {
                    let t = k as f64 / *resolution as f64;
                    let v = l.loss_raw(&[t, 1.0 - t]);
                    vec![t, v[0], v[1]]
                })
                .collect();
            Record::new()
                .with("loss", l.name())
                .with("resolution", *resolution as f64)
                .table(&["t", "l1", "l2"], rows)
        }
        Cmd::Verify { loss, resolution, tol } => {
            let l = load(loss, cli.n.unwrap_or(2))?;
            let grid = SimplexGrid::new(l.dim(), *resolution)?;
            let mut t = Tolerances::for_loss(&l);
            if let Some(v) = *tol {
                t = Tolerances {
                    properness: v,
                    homogeneity: v,
                    superadditivity: v,
                    supergradient: v,
                    consistency: v,
                    pseudo_inverse: v,
                    reverse_holder: v,
                    bregman: v,
                };
            }
            let report = verify_all(&l, &grid, &t);
            let text = match format {
                Format::Json => {
                    let mut v = serde_json::to_value(&report).expect("report serializes");
                    v["passed"] = json!(report.passed());
                    v["resolution"] = json!(resolution);
                    v["seed"] = json!(cli.seed);
                    let mut s = serde_json::to_string_pretty(&v).expect("report serializes");
                    s.push('\n');
                    s
                }
                Format::Csv => {
                    let mut s = format!("# loss={}\n# resolution={resolution}\ncheck_name,pass,worst_violation\n", l.name());
                    for c in &report.checks {
                        s.push_str(&format!("{},{},{}\n", c.check_name, c.pass, output::fmt_g(c.worst_violation)));
                    }
                    s
                }
            };
            return if report.passed() { Ok(text) } else { Err(Failure::Verify(text)) };
        }
        Cmd::Normalize { loss } => {
            let l = load(loss, cli.n.unwrap_or(2))?;
            let norm = normalize_canonical(&l)?;
            Record::new()
                .with("loss", l.name())
                .with("coefficient", norm.coefficient)
                .with("maximizer", norm.maximizer.as_slice())
                .with("normalized", norm.loss.name())
                .with("peak", norm.loss.bayes_risk(&norm.maximizer)?)
        }
        Cmd::Shiftmax {
            loss,
            p0,
            alpha,
            resolution,
        } => {
            let point = parse_point("p0", p0)?;
            let l = load(loss, dim_for(cli.n, Some(&point)))?;
            let p0 = pos("p0", p0, &l)?;
            let s = shift_maximum(&l, &p0, *alpha)?;
            let grid = SimplexGrid::new(l.dim(), *resolution)?;
            let (arg, peak) = argmax(&s, &grid);
            Record::new()
                .with("loss", l.name())
                .with("p0", p0.as_slice())
                .with("shifted", s.name())
                .with("loss_at_p0", s.loss(&p0)?.into_vec())
                .with("grid_argmax", arg.as_slice())
                .with("grid_max", peak)
                .with("grid_spacing", grid.spacing())
        }
        Cmd::Compose { loss, p } => {
            let point = parse_point("p", p)?;
            let spec = parse_msum_spec(loss, dim_for(cli.n, Some(&point)))?;
            let l = compose(spec.clone())?;
            let p = pos("p", p, &l)?;
            let mut r = Record::new()
                .with("loss", l.name())
                .with("p", p.as_slice())
                .with("rho", l.bayes_risk(&p)?)
                .with("l", l.loss(&p)?.into_vec());
            match spec.mode {
                MSumMode::Direct => {
                    let risks: Vec<f64> = spec.parts.iter().map(|q| q.risk_raw(p.as_slice())).collect();
                    r = r.with("part_risks", risks);
                }
                MSumMode::Dual => {
                    let sol = dual_msum_solve(&spec, &p)?;
                    for (i, a) in sol.split.iter().enumerate() {
                        r = r.with(&format!("split{}", i + 1), a.clone());
                    }
                    r = r.with("gap", sol.gap);
                }
            }
            r
        }
        Cmd::Bregman { loss, p, q } => {
            let point = parse_point("p", p)?;
            let l = load(loss, dim_for(cli.n, Some(&point)))?;
            let (p, q) = (pos("p", p, &l)?, pos("q", q, &l)?);
            let r = regret_report(&l, &p, &q)?;
            Record::new()
                .with("loss", l.name())
                .with("p", p.as_slice())
                .with("q", q.as_slice())
                .with("bregman", r.bregman)
                .with("regret", r.regret)
                .with("discrepancy", r.discrepancy)
        }
        Cmd::Substitute { loss, x } => {
            let point = parse_point("x", x)?;
            let l = load(loss, dim_for(cli.n, Some(&point)))?;
            if point.len() != l.dim() {
                return Err(Failure::Usage(format!("error: --x has {} entries, expected {}", point.len(), l.dim())));
            }
            let xv = LossVector::new(point)?;
            let p = substitute(&l, &xv)?;
            Record::new()
                .with("loss", l.name())
                .with("x", xv.as_slice())
                .with("p", p.as_slice())
                .with("l", l.loss(&p)?.into_vec())
                .with("antigauge", antigauge(&l, &xv)?)
        }
        Cmd::Weightfn { loss, t, resolution } => {
            let l = load(loss, cli.n.unwrap_or(2))?;
            require_binary(&l)?;
            match t {
                Some(t) => Record::new()
                    .with("loss", l.name())
                    .with("t", *t)
                    .with("weight", weight_function(&l, *t, None)?),
                None => {
                    if *resolution < 2 {
                        return Err(GeomError::ResolutionTooSmall(*resolution).into());
                    }
                    let rows = (1..*resolution)
                        .map(|k| {
                            let t = k as f64 / *resolution as f64;
                            weight_function(&l, t, None).map(|w| vec![t, w])
                        })
                        .collect::<Result<Vec<_>, GeomError>>()?;
                    Record::new()
                        .with("loss", l.name())
                        .with("resolution", *resolution as f64)
                        .table(&["t", "weight"], rows)
                }
            }
        }
    };
    Ok(record.render(format))
}

fn emit(cli: &Cli, text: &str) -> Result<(), String> {
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("error: cannot write {}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (text, code) = match run(&cli) {
        Ok(text) => (text, 0),
        Err(Failure::Verify(text)) => (text, 1),
        Err(Failure::Usage(msg)) => {
            eprintln!("{msg}");
            return ExitCode::from(2);
        }
    };
    if let Err(msg) = emit(&cli, &text) {
        eprintln!("{msg}");
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}
