mod output;

use std::collections::hash_map::RandomState;
use std::hash::{BuildHasher, Hasher};
use std::io::Read;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Value};

use dpl_core::asymptotics::{gupta_sandwich, partition_threshold_transfer, SandwichReport};
use dpl_core::counting::{CountFamily, ExactBudget, DEFAULT_EXACT_BUDGET};
use dpl_core::entropy::{entropy_report, parse_profiles, ClusterProfile, EntropyReport};
use dpl_core::moments::{chung_erdos_lower_bound, moment_report};
use dpl_core::samplers::{RngSpec, Sampler};
use dpl_core::threshold::{find_kc, fit_exponent, KcResult, ThresholdConfig};
use dpl_core::{log_count, prob_all_distinct, prob_all_distinct_exact, Error, Model, Regime};

use output::{num, opt, text, Format, Table};

#[derive(Parser)]
#[command(name = "dpl", version, about = "Distinct part sizes in random compositions, partitions, surjections and set partitions")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "plain")]
    format: Format,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Cap on exact-table work, in cells.
    #[arg(long, global = true, default_value_t = DEFAULT_EXACT_BUDGET)]
    exact_budget: u64,

    /// RNG seed for randomized commands; generated and reported on stderr
    /// when absent.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Args, Clone)]
struct Point {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    k: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Exact (or log-space) count of a family.
    Count {
        #[arg(long)]
        family: CountFamily,
        #[command(flatten)]
        at: Point,
        /// Natural log of the count, from the log-space routes.
        #[arg(long)]
        log: bool,
    },
    /// P(all part sizes distinct), exact when in budget.
    Prob {
        #[arg(long)]
        model: Model,
        #[command(flatten)]
        at: Point,
        /// Fail with the regime exit code instead of falling back to log space.
        #[arg(long)]
        exact: bool,
    },
    /// Draw uniform random objects and print their part sizes.
    Sample {
        #[arg(long)]
        model: Model,
        #[command(flatten)]
        at: Point,
        #[arg(long, default_value_t = 1)]
        samples: u64,
    },
    /// First- and second-moment sums of the equal-parts events.
    Expect {
        #[arg(long)]
        model: Model,
        #[command(flatten)]
        at: Point,
    },
    /// Chung–Erdős lower bound on P(some two parts equal).
    CeBound {
        #[arg(long, required_unless_present = "sum_p")]
        model: Option<Model>,
        #[arg(long, required_unless_present = "sum_p")]
        n: Option<u64>,
        #[arg(long, required_unless_present = "sum_p")]
        k: Option<u64>,
        /// Bound from given sums instead of a model.
        #[arg(long, requires = "sum_pairs")]
        sum_p: Option<f64>,
        #[arg(long)]
        sum_pairs: Option<f64>,
    },
    /// Gupta's bounds on p(n, k) and the Erdős–Lehner ratio.
    Sandwich {
        #[arg(long)]
        k: u64,
        #[arg(long, required_unless_present = "n_grid")]
        n: Option<u64>,
        #[arg(long, value_delimiter = ',')]
        n_grid: Option<Vec<u64>>,
    },
    /// q(n, k) / p(n, k) next to D(n, k) / C(n, k).
    Transfer {
        #[command(flatten)]
        at: Point,
    },
    /// Critical k at which P(some two parts equal) reaches the target.
    Threshold {
        #[arg(long)]
        model: Model,
        #[arg(long, required_unless_present = "n_grid")]
        n: Option<u64>,
        #[arg(long, value_delimiter = ',')]
        n_grid: Option<Vec<u64>>,
        #[arg(long, default_value_t = 0.5)]
        p_target: f64,
        /// Samples per bisection probe.
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        /// Samples per confirmation estimate.
        #[arg(long, default_value_t = 100_000)]
        confirm_samples: u64,
    },
    /// Log-log slope of the critical k against n.
    Fit {
        #[arg(long)]
        model: Model,
        #[arg(long, value_delimiter = ',', default_value = "10000,100000,1000000,10000000")]
        n_grid: Vec<u64>,
        #[arg(long, default_value_t = 0.5)]
        p_target: f64,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long, default_value_t = 100_000)]
        confirm_samples: u64,
    },
    /// Label and class-size entropies of cluster profiles, one per line.
    Entropy {
        /// Profile file, `-` for stdin.
        #[arg(long, default_value = "-", conflicts_with = "sizes")]
        input: String,
        /// A single profile given inline, e.g. "3 2 2 1".
        #[arg(long)]
        sizes: Option<String>,
    },
    /// Run the small-instance oracle suite.
    Verify,
}

enum Failure {
    Core(Error),
    Usage(String),
    VerifyFailed,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(Error::RegimeExceeded { .. }) => 3,
            Failure::Core(Error::NoCrossing { .. }) => 4,
            Failure::Core(Error::MonotonicityViolation { .. }) | Failure::VerifyFailed => 1,
            Failure::Core(_) | Failure::Usage(_) => 2,
        }
    }
}

type Run = Result<String, Failure>;

fn fresh_seed() -> u64 {
    let mut h = RandomState::new().build_hasher();
    h.write_u64(std::process::id() as u64);
    h.finish()
}

fn seed_or_generate(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = fresh_seed();
        eprintln!("seed: {s}");
        s
    })
}

fn regime_name(r: Regime) -> Value {
    text(r)
}

fn count(cli: &Cli, family: CountFamily, at: &Point, log: bool) -> Run {
    let (n, k) = (at.n, at.k);
    let mut t = Table::new(&["family", "n", "k", "regime", "value"]).primary(4);
    if log {
        let v = log_count(family, n, k);
        t.push(vec![text(family), json!(n), json!(k), text("log"), opt(v.ln())]);
    } else {
        let budget = ExactBudget::new(cli.exact_budget);
        let cells = match family {
            CountFamily::DistinctFiberSurjection => ExactBudget::distinct_fiber_cells(n, k),
            _ => ExactBudget::table_cells(n, k),
        };
        budget.check(cells)?;
        t.push(vec![text(family), json!(n), json!(k), text("exact"), text(family.count(n, k))]);
    }
    Ok(t.render(cli.format))
}

fn prob(cli: &Cli, model: Model, at: &Point, exact_only: bool) -> Run {
    let budget = ExactBudget::new(cli.exact_budget);
    let r = if exact_only {
        let e = prob_all_distinct_exact(model, at.n, at.k, budget)?;
        dpl_core::probability::ProbReport {
            model,
            n: at.n,
            k: at.k,
            value: e.to_f64(),
            exact: Some(e),
            regime: Regime::Exact,
        }
    } else {
        prob_all_distinct(model, at.n, at.k, budget)?
    };
    let shown = match &r.exact {
        Some(e) => text(e),
        None => num(r.value),
    };
    let mut t = Table::new(&["model", "n", "k", "regime", "probability", "value"]).primary(4);
    t.push(vec![text(model), json!(at.n), json!(at.k), regime_name(r.regime), shown, num(r.value)]);
    Ok(t.render(cli.format))
}

fn sample(cli: &Cli, model: Model, at: &Point, samples: u64) -> Run {
    let seed = seed_or_generate(cli.seed);
    let sampler = Sampler::new(model, at.n, at.k, ExactBudget::new(cli.exact_budget))?;
    let mut rng = RngSpec::new(seed, 0).rng();
    let mut t = Table::new(&["index", "parts", "distinct"]).primary(1);
    for i in 0..samples {
        let p = sampler.sample(&mut rng);
        let distinct = p.has_distinct_parts();
        t.push(vec![json!(i), json!(p.parts), json!(distinct)]);
    }
    Ok(t.render(cli.format))
}

fn expect(cli: &Cli, model: Model, at: &Point) -> Run {
    let r = moment_report(model, at.n, at.k, ExactBudget::new(cli.exact_budget))?;
    let mut t = Table::new(&[
        "model",
        "n",
        "k",
        "regime",
        "first_moment",
        "asymptotic_first",
        "three_index",
        "four_equal",
        "two_two",
        "pair_sum",
    ]);
    t.push(vec![
        text(model),
        json!(at.n),
        json!(at.k),
        regime_name(r.regime),
        num(r.first_moment),
        num(r.asymptotic_first),
        num(r.pairs.three_index),
        opt(r.pairs.four_equal),
        opt(r.pairs.two_two),
        num(r.pair_sum),
    ]);
    Ok(t.render(cli.format))
}

fn ce_bound(cli: &Cli, model: Option<Model>, n: Option<u64>, k: Option<u64>, sums: Option<(f64, f64)>) -> Run {
    if let Some((sp, spp)) = sums {
        if !(sp >= 0.0 && spp >= 0.0) {
            return Err(Failure::Usage("sums must be nonnegative".into()));
        }
        let mut t = Table::new(&["sum_p", "sum_pairs", "chung_erdos_lower"]).primary(2);
        t.push(vec![num(sp), num(spp), num(chung_erdos_lower_bound(sp, spp))]);
        return Ok(t.render(cli.format));
    }
    let (model, n, k) = match (model, n, k) {
        (Some(m), Some(n), Some(k)) => (m, n, k),
        _ => return Err(Failure::Usage("need --model, --n and --k".into())),
    };
    let r = moment_report(model, n, k, ExactBudget::new(cli.exact_budget))?;
    let mut t = Table::new(&[
        "model",
        "n",
        "k",
        "regime",
        "sum_p",
        "sum_pairs",
        "chung_erdos_lower",
        "exact_union_prob",
    ]);
    t.push(vec![
        text(model),
        json!(n),
        json!(k),
        regime_name(r.regime),
        num(r.first_moment),
        num(r.pair_sum),
        num(r.chung_erdos_lower),
        opt(r.exact_union_prob),
    ]);
    Ok(t.render(cli.format))
}

fn sandwich_row(s: &SandwichReport) -> Vec<Value> {
    vec![
        json!(s.n),
        json!(s.k),
        num(s.lower.to_f64()),
        text(&s.middle),
        num(s.upper.to_f64()),
        num(s.ratio_to_el),
    ]
}

fn sandwich(cli: &Cli, k: u64, n: Option<u64>, grid: Option<Vec<u64>>) -> Run {
    let budget = ExactBudget::new(cli.exact_budget);
    let ns = grid.unwrap_or_else(|| n.into_iter().collect());
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Failure::Usage("--n-grid must be strictly ascending".into()));
    }
    let reports = ns
        .par_iter()
        .map(|&n| gupta_sandwich(n, k, budget))
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new(&["n", "k", "lower", "middle", "upper", "ratio"]);
    for s in &reports {
        t.push(sandwich_row(s));
    }
    Ok(t.render(cli.format))
}

fn transfer(cli: &Cli, at: &Point) -> Run {
    let r = partition_threshold_transfer(at.n, at.k, ExactBudget::new(cli.exact_budget))?;
    let mut t = Table::new(&["n", "k", "q_over_p", "d_over_c", "q_over_p_exact", "d_over_c_exact"]);
    t.push(vec![
        json!(at.n),
        json!(at.k),
        num(r.q_over_p.to_f64()),
        num(r.d_over_c.to_f64()),
        text(&r.q_over_p),
        text(&r.d_over_c),
    ]);
    Ok(t.render(cli.format))
}

fn kc_table(rows: &[KcResult]) -> Table {
    let mut t = Table::new(&["model", "n", "k_c", "p_hat", "std_err", "samples", "seed", "p_below", "ambiguous"]);
    for r in rows {
        t.push(vec![
            text(r.model),
            json!(r.n),
            json!(r.k_c),
            num(r.p_at),
            num(r.std_err),
            json!(r.samples),
            json!(r.rng.seed),
            num(r.p_below),
            json!(r.ambiguous),
        ]);
    }
    t
}

fn threshold_config(cli: &Cli, p_target: f64, samples: u64, confirm: u64) -> Result<ThresholdConfig, Failure> {
    if samples == 0 || confirm == 0 {
        return Err(Failure::Usage("sample counts must be positive".into()));
    }
    Ok(ThresholdConfig {
        p_target,
        probe_samples: samples,
        confirm_samples: confirm,
        budget: ExactBudget::new(cli.exact_budget),
    })
}

fn threshold(cli: &Cli, model: Model, ns: Vec<u64>, cfg: ThresholdConfig) -> Run {
    let rng = RngSpec::new(seed_or_generate(cli.seed), 0);
    let rows = ns
        .par_iter()
        .map(|&n| find_kc(model, n, &cfg, rng.substream(n)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(kc_table(&rows).render(cli.format))
}

fn fit(cli: &Cli, model: Model, grid: &[u64], cfg: ThresholdConfig) -> Run {
    let rng = RngSpec::new(seed_or_generate(cli.seed), 0);
    let f = fit_exponent(model, grid, &cfg, rng)?;
    let ci = f.slope_ci.map(|(a, b)| json!([a, b])).unwrap_or(Value::Null);
    match cli.format {
        Format::Json => {
            let v = json!({
                "model": model.as_str(),
                "slope": f.slope,
                "intercept": f.intercept,
                "ci": ci,
                "points": f.points,
                "seed": rng.seed,
            });
            Ok(serde_json::to_string_pretty(&v).expect("json") + "\n")
        }
        format => {
            let mut t = kc_table(&f.results);
            t.note(format!("slope={} intercept={} ci={}", f.slope, f.intercept, ci));
            Ok(t.render(format))
        }
    }
}

fn entropy(cli: &Cli, input: &str, sizes: Option<&str>) -> Run {
    let profiles = match sizes {
        Some(s) => vec![s.parse::<ClusterProfile>()?],
        None => {
            let mut buf = String::new();
            if input == "-" {
                std::io::stdin()
                    .read_to_string(&mut buf)
                    .map_err(|e| Failure::Usage(e.to_string()))?;
            } else {
                buf = std::fs::read_to_string(input).map_err(|e| Failure::Usage(format!("{input}: {e}")))?;
            }
            parse_profiles(&buf)?
        }
    };
    let cols: Vec<&'static str> = EntropyReport::CSV_HEADER.split(',').collect();
    let mut t = Table::new(&cols);
    let b = std::f64::consts::LN_2;
    for p in &profiles {
        let r = entropy_report(p);
        t.push(vec![
            json!(r.n),
            json!(r.k),
            num(r.label_entropy),
            num(r.size_entropy),
            num(r.dpi_gap),
            num(r.label_entropy / b),
            num(r.size_entropy / b),
            num(r.dpi_gap / b),
        ]);
    }
    Ok(t.render(cli.format))
}

fn verify(cli: &Cli) -> Run {
    let checks = dpl_core::verify::run_all();
    let all_passed = checks.iter().all(|c| c.passed);
    let out = match cli.format {
        Format::Json => serde_json::to_string_pretty(&checks).expect("json") + "\n",
        Format::Csv => {
            let mut t = Table::new(&["check", "passed", "detail"]);
            for c in &checks {
                t.push(vec![text(c.name), json!(c.passed), text(&c.detail)]);
            }
            t.render(Format::Csv)
        }
        Format::Plain => checks
            .iter()
            .map(|c| format!("{} {}: {}\n", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail))
            .collect(),
    };
    print!("{out}");
    if all_passed {
        Ok(String::new())
    } else {
        Err(Failure::VerifyFailed)
    }
}

fn run(cli: &Cli) -> Run {
    match &cli.command {
        Command::Count { family, at, log } => count(cli, *family, at, *log),
        Command::Prob { model, at, exact } => prob(cli, *model, at, *exact),
        Command::Sample { model, at, samples } => sample(cli, *model, at, *samples),
        Command::Expect { model, at } => expect(cli, *model, at),
        Command::CeBound {
            model,
            n,
            k,
            sum_p,
            sum_pairs,
        } => ce_bound(cli, *model, *n, *k, sum_p.zip(*sum_pairs)),
        Command::Sandwich { k, n, n_grid } => sandwich(cli, *k, *n, n_grid.clone()),
        Command::Transfer { at } => transfer(cli, at),
        Command::Threshold {
            model,
            n,
            n_grid,
            p_target,
            samples,
            confirm_samples,
        } => {
            let cfg = threshold_config(cli, *p_target, *samples, *confirm_samples)?;
            let ns = n_grid.clone().unwrap_or_else(|| n.iter().copied().collect());
            threshold(cli, *model, ns, cfg)
        }
        Command::Fit {
            model,
            n_grid,
            p_target,
            samples,
            confirm_samples,
        } => {
            let cfg = threshold_config(cli, *p_target, *samples, *confirm_samples)?;
            fit(cli, *model, n_grid, cfg)
        }
        Command::Entropy { input, sizes } => entropy(cli, input, sizes.as_deref()),
        Command::Verify => verify(cli),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            match &f {
                Failure::Core(e) => eprintln!("error: {e}"),
                Failure::Usage(m) => eprintln!("error: {m}"),
                Failure::VerifyFailed => eprintln!("error: verification failed"),
            }
            ExitCode::from(f.exit_code())
        }
    }
}
