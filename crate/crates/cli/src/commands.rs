use std::fs;
use std::path::Path;

use hdloc::fmt::sig;
use hdloc::gauss::summarize;
use hdloc::harness::{self, ExperimentSpec, RunOptions};
use hdloc::io::{parse_dataset, parse_vector};
use hdloc::power::{
    asymptotic_power, classify_regime, dominance_interval, omega0_ratio, Design, PowerKind, ShiftProfile,
};
use hdloc::spectral::estimate_a;
use hdloc::testing::{
    dempster_test, hotelling_test, optimal_weight, sigma_rho, weighted_test, TestKind, TestOutcome, WeightPolicy,
};
use hdloc::{Error, Result};

use crate::{PowerArgs, SimulateArgs, TestArgs, ValidateArgs, WeightArgs};

/// Environment variable supplying the seed when neither flag nor spec does.
pub const SEED_ENV: &str = "HDLOC_SEED";

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Argument(format!("{}: {e}", path.display())))
}

fn g(x: f64) -> String {
    sig(x, 6)
}

fn mu0_from(arg: Option<&str>, p: usize) -> Result<Vec<f64>> {
    let Some(arg) = arg else {
        return Ok(vec![0.0; p]);
    };
    let path = Path::new(arg);
    let mu0 = if path.is_file() {
        parse_vector(&read(path)?)?
    } else {
        parse_vector(arg)?
    };
    if mu0.len() != p {
        return Err(Error::Argument(format!(
            "μ₀ has length {} but the data have p = {p}",
            mu0.len()
        )));
    }
    Ok(mu0)
}

enum Row {
    Done(TestOutcome),
    Undefined(String),
    Failed(Error),
}

/// `p_ge_n`: the dimension alone rules the test out.
fn row_for(result: Result<TestOutcome>, p_ge_n: bool, why: &str) -> Row {
    match result {
        Ok(out) => Row::Done(out),
        Err(Error::UndefinedTest(_)) if p_ge_n => Row::Undefined(why.into()),
        Err(Error::UndefinedTest(m)) => Row::Failed(Error::Degenerate(m)),
        Err(e) => Row::Failed(e),
    }
}

pub fn test(args: &TestArgs) -> Result<()> {
    let data = parse_dataset(&read(&args.data)?, args.header)?;
    let (n_obs, p) = (data.n_obs(), data.dim());
    let mu0 = mu0_from(args.mu0.as_deref(), p)?;
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(Error::Argument(format!("alpha = {} outside (0, 1)", args.alpha)));
    }
    let summary = summarize(&data, &mu0)?;
    let est = estimate_a(&summary)?;
    let n = summary.n;

    println!("N = {n_obs}, p = {p}, n = {n}, alpha = {}", g(args.alpha));
    println!("c_hat  = {}", g(est.c_hat));
    println!("a1_hat = {}", g(est.a1_hat));
    println!("a2_hat = {}", g(est.a2_hat));
    println!("a3_hat = {}", g(est.a3_hat));
    println!("a4_hat = {}", g(est.a4_hat));
    let weight_defined = p < n;
    match (weight_defined, optimal_weight(est.c_hat, est.a1_hat, est.a2_hat)) {
        (true, Ok(rho)) => println!("rho_hat = {}", g(rho)),
        (true, Err(_)) => println!("rho_hat = undefined (degenerate a2_hat)"),
        (false, _) => println!("rho_hat = undefined (p ≥ n)"),
    }

    let rows = [
        (
            TestKind::Hotelling,
            row_for(hotelling_test(&summary, args.alpha), p >= n_obs, "undefined (p ≥ N)"),
        ),
        (
            TestKind::Dempster,
            row_for(dempster_test(&summary, &est, args.alpha), false, ""),
        ),
        (
            TestKind::Weighted,
            if weight_defined {
                row_for(
                    weighted_test(&summary, &est, args.alpha, WeightPolicy::Adaptive, args.critical.into()),
                    false,
                    "",
                )
            } else {
                Row::Undefined("undefined (p ≥ n)".into())
            },
        ),
    ];
    println!();
    println!(
        "{:<5} {:>12} {:>12} {:>12}  decision",
        "test", "statistic", "standardized", "critical"
    );
    let mut failure = None;
    for (kind, row) in rows {
        match row {
            Row::Done(out) => {
                println!(
                    "{:<5} {:>12} {:>12} {:>12}  {}",
                    kind.label(),
                    g(out.statistic),
                    g(out.standardized),
                    g(out.critical),
                    if out.reject { "reject" } else { "accept" }
                );
                for note in &out.notes {
                    println!("      note: {note}");
                }
            }
            Row::Undefined(why) => println!("{:<5} {why}", kind.label()),
            Row::Failed(e) => {
                println!("{:<5} failed: {e}", kind.label());
                failure.get_or_insert(e);
            }
        }
    }
    failure.map_or(Ok(()), Err)
}

pub fn weight(args: &WeightArgs) -> Result<()> {
    let (c, a1, a2) = if let Some(path) = &args.data {
        let data = parse_dataset(&read(path)?, args.header)?;
        let summary = summarize(&data, &vec![0.0; data.dim()])?;
        let est = estimate_a(&summary)?;
        (est.c_hat, est.a1_hat, est.a2_hat)
    } else {
        match (args.c, args.a1, args.a2) {
            (Some(c), Some(a1), Some(a2)) => (c, a1, a2),
            _ => return Err(Error::Argument("give either --data or all of --c, --a1, --a2".into())),
        }
    };
    let rho = optimal_weight(c, a1, a2)?;
    println!("c = {}, a1 = {}, a2 = {}", g(c), g(a1), g(a2));
    println!("rho* = {}", g(rho));
    println!("sigma(rho*) = {}", g(sigma_rho(rho, c, a1, a2)?));
    Ok(())
}

pub fn power(args: &PowerArgs) -> Result<()> {
    let d = Design::new(args.n, args.c, args.a1, args.a2, args.alpha)?;
    let di = args.delta2_identity;
    let dm = args.delta2.unwrap_or(args.ratio * di);
    if !(di >= 0.0 && dm >= 0.0 && di.is_finite() && dm.is_finite()) {
        return Err(Error::Argument("squared shifts must be finite and non-negative".into()));
    }
    if (di == 0.0) != (dm == 0.0) {
        return Err(Error::Argument("Δ² and Δ_I² must both be zero or both positive".into()));
    }
    let profile = ShiftProfile {
        delta2: dm,
        delta2_identity: di,
        delta2_sigma: f64::NAN,
    };
    let rho = optimal_weight(d.c, d.a1, d.a2)?;
    let (lo, hi) = dominance_interval(d.c, d.a1, d.a2);
    println!(
        "c = {}, a1 = {}, a2 = {}, n = {}, alpha = {}",
        g(d.c),
        g(d.a1),
        g(d.a2),
        g(d.n),
        g(d.alpha)
    );
    println!("rho* = {}", g(rho));
    println!("Delta2 = {}, Delta2_I = {}", g(dm), g(di));
    for (label, kind) in [
        ("T2", PowerKind::Hotelling),
        ("Dn", PowerKind::Dempster),
        ("Trho", PowerKind::Weighted),
    ] {
        println!("power {label:<4} = {}", g(asymptotic_power(kind, &profile, &d)?));
    }
    println!("interval (C1) = [{}, {}]", g(lo.min(hi)), g(lo.max(hi)));
    println!("omega0 ratio = {}", g(omega0_ratio(d.c, d.a2)?));
    if profile.is_null() {
        println!("regime = none (null shift)");
    } else {
        let report = classify_regime(&profile, &d)?;
        println!("ratio = {}", g(report.ratio));
        println!("regime = {}", report.regime);
        for note in &report.notes {
            println!("note: {note}");
        }
    }
    Ok(())
}

fn load_spec(path: &Path) -> Result<ExperimentSpec> {
    ExperimentSpec::from_json(&read(path)?)
}

fn resolve_seed(flag: Option<u64>, spec: &ExperimentSpec) -> Result<u64> {
    if let Some(s) = flag.or(spec.seed) {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Argument(format!("{SEED_ENV} = `{v}` is not an unsigned integer"))),
        Err(_) => Ok(harness::DEFAULT_SEED),
    }
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let mut spec = load_spec(&args.spec)?;
    if let Some(c) = args.critical {
        spec.critical = c.into();
    }
    spec.validate()?;
    for w in spec.warnings() {
        eprintln!("warning: {w}");
    }
    let seed = resolve_seed(args.seed, &spec)?;
    let table = harness::run(
        &spec,
        &RunOptions {
            workers: args.workers,
            seed: Some(seed),
        },
    )?;
    fs::create_dir_all(&args.out).map_err(|e| Error::Argument(format!("{}: {e}", args.out.display())))?;
    let mode = if spec.is_power() { "power" } else { "asl" };
    for (eta, p) in table.cells() {
        let sub = table.subset(eta, p);
        let stem = format!("{mode}_eta{}_p{p}", g(eta));
        for (ext, body) in [("csv", sub.to_csv()), ("md", sub.to_markdown())] {
            let path = args.out.join(format!("{stem}.{ext}"));
            fs::write(&path, body).map_err(|e| Error::Argument(format!("{}: {e}", path.display())))?;
            println!("wrote {}", path.display());
        }
    }
    println!(
        "{} rows, r = {}, seed = {seed}, wall time {} s",
        table.rows.len(),
        spec.replications,
        g(table.wall_time.as_secs_f64())
    );
    Ok(())
}

pub fn validate(args: &ValidateArgs) -> Result<()> {
    let spec = load_spec(&args.spec)?;
    spec.validate()?;
    let cells: usize = spec.etas.len() * spec.dims.iter().map(|&p| spec.sample_sizes_for(p).len()).sum::<usize>();
    println!(
        "ok: {} study, {cells} cells, {} alphas, {} tests, r = {}",
        if spec.is_power() { "power" } else { "asl" },
        spec.alphas.len(),
        spec.tests.len(),
        spec.replications
    );
    for w in spec.warnings() {
        println!("warning: {w}");
    }
    Ok(())
}
