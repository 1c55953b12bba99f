use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use revlp_core::{
    check_equivalence, check_holds, derive_constant, dyadic_doubling, eval_form, geometric_constant, grid_bruteforce,
    is_quasi_lacunary_monotone, make_named_form, measure_weights, ray_search, search_best_constant, sweep, sweep_csv,
    validate_certificate, verify_jensen, weight_len, ConstantCertificate, Error, ErrorKind, EvalResult, FormId,
    FormSpec, IndexRange, Precision, Real, Relation, SequenceRule, SweepSpec, ValidationConfig, ValidationReport,
    WeightSpec, WitnessWeights,
};
use serde::Serialize;

mod source;

use source::{parse_real, resolve, SOURCE_HELP};

/// Failure with the exit status it maps to.
#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError { code: 1, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e.kind() {
            ErrorKind::Input => 1,
            ErrorKind::Precondition => 2,
            ErrorKind::Arithmetic => 3,
        };
        CliError { code, message: e.to_string() }
    }
}

#[derive(Parser, Debug)]
#[command(name = "revlp", version, about = "Weighted lp inequalities for decreasing sequences")]
struct Cli {
    /// Decimal digits for non-exact arithmetic (at least 50).
    #[arg(long, global = true, env = "REVLP_DIGITS")]
    digits: Option<u32>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Monotonicity and lacunary / geometric constants of a sequence.
    Classify {
        #[arg(long, help = SOURCE_HELP)]
        seq: String,
        /// Length for generated sequences (default 2^nu_max).
        #[arg(long)]
        len: Option<usize>,
        #[arg(long)]
        nu_max: u32,
    },
    /// Evaluate both sides of a form.
    Eval {
        #[command(flatten)]
        form: FormArgs,
        #[arg(long, help = SOURCE_HELP)]
        a: String,
    },
    /// Check the inequality with a given constant.
    Check {
        #[command(flatten)]
        form: FormArgs,
        #[arg(long, help = SOURCE_HELP)]
        a: String,
        /// The constant (the lower constant for two-sided forms).
        #[arg(long)]
        c: String,
        /// Upper constant for two-sided forms.
        #[arg(long)]
        upper: Option<String>,
    },
    /// Compare the beta-norm against the alpha-norm of a sequence.
    Jensen {
        #[arg(long, help = SOURCE_HELP)]
        b: String,
        #[arg(long)]
        len: Option<usize>,
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        beta: String,
        #[arg(long)]
        lo: Option<usize>,
        #[arg(long)]
        hi: Option<usize>,
    },
    /// Derive a constant certificate for a T2_* form from its weights.
    Derive {
        #[command(flatten)]
        form: FormArgs,
        /// Also validate the certificate on this many random instances.
        #[arg(long)]
        validate: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Estimate the sharp constant of a form.
    Search {
        #[command(flatten)]
        form: FormArgs,
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
        #[arg(long, default_value_t = 20)]
        budget: usize,
        #[arg(long, default_value_t = 4)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        grid_levels: u32,
    },
    /// Sharp-constant estimates along m = multiple * n.
    Sweep {
        #[arg(long)]
        form: FormId,
        #[arg(long, value_delimiter = ',', required = true)]
        n_values: Vec<usize>,
        #[arg(long)]
        multiple: usize,
        #[arg(long)]
        p: String,
        #[arg(long, default_value = "1")]
        alpha: String,
        #[arg(long, default_value = "0")]
        lambda_exp: String,
        #[arg(long, default_value = "power")]
        weights: String,
        /// Evaluate this sequence instead of searching: ones | harmonic | power:<e>.
        #[arg(long)]
        fixed: Option<String>,
        #[arg(long, default_value_t = 20)]
        budget: usize,
        #[arg(long, default_value_t = 4)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

#[derive(Args, Debug)]
struct FormArgs {
    #[arg(long)]
    form: FormId,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    p: String,
    #[arg(long, default_value = "1")]
    alpha: String,
    #[arg(long, default_value = "0")]
    lambda_exp: String,
    /// power | unit | explicit (with --lambda and --gamma).
    #[arg(long, default_value = "power")]
    weights: String,
    #[arg(long, help = SOURCE_HELP)]
    lambda: Option<String>,
    #[arg(long, help = SOURCE_HELP)]
    gamma: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    /// Exact ray enumeration at p = 1, coordinate descent otherwise.
    Auto,
    Exact,
    Grid,
    Descent,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn weight_spec(
    kind: &str,
    lambda: Option<&str>,
    gamma: Option<&str>,
    m: usize,
    prec: Precision,
) -> Result<WeightSpec, CliError> {
    match kind {
        "power" => Ok(WeightSpec::Power),
        "unit" => Ok(WeightSpec::Unit),
        "explicit" => {
            let len = weight_len(m);
            let (Some(l), Some(g)) = (lambda, gamma) else {
                return Err(CliError::input("explicit weights need --lambda and --gamma"));
            };
            Ok(WeightSpec::Explicit { lambda: resolve(l, len, prec)?, gamma: resolve(g, len, prec)? })
        }
        other => Err(CliError::input(format!("unknown weights {other:?}; expected power, unit or explicit"))),
    }
}

impl FormArgs {
    fn spec(&self, prec: Precision) -> Result<FormSpec, CliError> {
        let weights = weight_spec(&self.weights, self.lambda.as_deref(), self.gamma.as_deref(), self.m, prec)?;
        Ok(FormSpec::new(self.form, parse_real(&self.p)?, self.n, self.m)
            .alpha(parse_real(&self.alpha)?)
            .lambda_exp(parse_real(&self.lambda_exp)?)
            .weights(weights))
    }
}

#[derive(Serialize)]
struct CheckOutput {
    result: EvalResult,
    holds: bool,
}

#[derive(Serialize)]
struct DeriveOutput {
    certificate: ConstantCertificate,
    validation: ValidationReport,
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    s
}

fn run(cli: Cli) -> Result<String, CliError> {
    let prec = match cli.digits {
        Some(d) => Precision::new(d)?,
        None => Precision::default(),
    };
    match cli.command {
        Command::Classify { seq, len, nu_max } => {
            if nu_max == 0 || nu_max > 30 {
                return Err(CliError::input("nu_max must be in 1..=30"));
            }
            let s = resolve(&seq, len.unwrap_or(1 << nu_max), prec)?;
            let mut profile = is_quasi_lacunary_monotone(&s, nu_max)?;
            profile.kgeo = dyadic_doubling(&s, nu_max).and_then(|d| geometric_constant(&d, nu_max as usize)).ok();
            Ok(to_json(&profile))
        }
        Command::Eval { form, a } => {
            let f = make_named_form(&form.spec(prec)?, prec)?;
            let a = resolve(&a, f.shape.extent(), prec)?;
            Ok(to_json(&eval_form(&f, &a)?))
        }
        Command::Check { form, a, c, upper } => {
            let f = make_named_form(&form.spec(prec)?, prec)?;
            let a = resolve(&a, f.shape.extent(), prec)?;
            let c = parse_real(&c)?;
            let holds = match (f.relation, upper) {
                (Relation::Equiv, Some(u)) => check_equivalence(&f, &a, &c, &parse_real(&u)?)?,
                (Relation::Equiv, None) => return Err(CliError::input(format!("{} is two-sided; pass --upper", f.id))),
                (_, Some(_)) => return Err(CliError::input("--upper applies only to two-sided forms")),
                (_, None) => check_holds(&f, &a, &c)?,
            };
            Ok(to_json(&CheckOutput { result: eval_form(&f, &a)?, holds }))
        }
        Command::Jensen { b, len, alpha, beta, lo, hi } => {
            let b = resolve(&b, len.unwrap_or(16), prec)?;
            let range = IndexRange::new(lo.unwrap_or(1), hi.unwrap_or(b.len()));
            Ok(to_json(&verify_jensen(&b, &parse_real(&alpha)?, &parse_real(&beta)?, range, prec)?))
        }
        Command::Derive { form, validate, seed } => {
            let spec = form.spec(prec)?;
            let f = make_named_form(&spec, prec)?;
            if !f.id.is_general() {
                return Err(CliError::input(format!("certificates exist only for T2_1..T2_4, not {}", f.id)));
            }
            let window = weight_len(f.m).ilog2();
            let measured = measure_weights(&f.outer_weight, &f.inner_weight, window)?;
            let cert = derive_constant(f.id, &measured.lambda, &measured.gamma, Some(&measured.kgeo), &f.p, prec)?;
            match validate {
                None => Ok(to_json(&cert)),
                Some(trials) => {
                    let len = 1usize << window;
                    let witness = WitnessWeights {
                        lambda: f.outer_weight.truncated(len)?,
                        gamma: f.inner_weight.truncated(len)?,
                    };
                    let cfg =
                        ValidationConfig::new(f.id, trials, seed).with_sizes(vec![(f.n, f.m)]).with_witness(witness);
                    let report = validate_certificate(&cert, &cfg)?;
                    Ok(to_json(&DeriveOutput { certificate: cert, validation: report }))
                }
            }
        }
        Command::Search { form, method, budget, restarts, seed, grid_levels } => {
            let f = make_named_form(&form.spec(prec)?, prec)?;
            let result = match method {
                Method::Auto if f.p == Real::one() => ray_search(&f)?,
                Method::Exact => ray_search(&f)?,
                Method::Grid => grid_bruteforce(&f, grid_levels)?,
                Method::Auto | Method::Descent => search_best_constant(&f, budget, restarts, seed)?,
            };
            Ok(to_json(&result))
        }
        Command::Sweep {
            form,
            n_values,
            multiple,
            p,
            alpha,
            lambda_exp,
            weights,
            fixed,
            budget,
            restarts,
            seed,
            format,
        } => {
            let fixed = match fixed.as_deref() {
                None => None,
                Some("ones") => Some(SequenceRule::Ones),
                Some("harmonic") => Some(SequenceRule::Harmonic),
                Some(s) => match s.strip_prefix("power:") {
                    Some(e) => Some(SequenceRule::Power { exponent: parse_real(e)? }),
                    None => return Err(CliError::input(format!("unknown fixed sequence {s:?}"))),
                },
            };
            let max_m = n_values.iter().max().copied().unwrap_or(1) * multiple;
            let spec = SweepSpec {
                id: form,
                n_values,
                multiple,
                p: parse_real(&p)?,
                alpha: parse_real(&alpha)?,
                lambda_exp: parse_real(&lambda_exp)?,
                weights: weight_spec(&weights, None, None, max_m, prec)?,
                fixed,
                budget,
                restarts,
                seed,
            };
            let rows = sweep(&spec, prec);
            for r in rows.iter().filter(|r| r.note.is_some()) {
                eprintln!("revlp: row n = {} skipped: {}", r.n, r.note.as_deref().unwrap_or(""));
            }
            Ok(match format {
                Format::Csv => sweep_csv(&rows),
                Format::Json => to_json(&rows),
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("revlp: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
