use std::collections::BTreeMap;
use std::time::Instant;

use hgr_core::baselines::{rdc, RdcConfig};
use hgr_core::correlation::hgr_kb_kernels;
use hgr_core::datagen::{generate, oracle_correlation, to_csv, Relation, SyntheticSpec};
use hgr_core::fairtrain::{
    cross_validate_fold, fold_indices, preprocess, shuffled_indices, summarize, synthetic_fairness,
    Dataset, MeanStd, Penalizer, RawTable, Schema, TrainConfig,
};
use hgr_core::stats;
use hgr_core::{
    degree_scan, expand, hgr_kb, hgr_sk, pearson, DegreeConfig, HgrError, SampleVector,
    SolverConfig, SolverMethod,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::cli::*;
use crate::error::CliError;
use crate::io::{load_pair, parse_table, read_file, sha256_hex, write_numeric_csv, LoadedPair};
use crate::report::Report;
use crate::{thread_pool, StdClock};

/// What a command prints on success.
#[derive(Debug)]
pub enum Output {
    Report(Box<Report>),
    /// Raw text for stdout (CSV from `generate` without `--output`).
    Text(String),
}

pub fn run(command: &Command) -> Result<Output, CliError> {
    let pool = thread_pool()?;
    pool.install(|| match command {
        Command::Compute(a) => compute(a).map(boxed),
        Command::Scan(a) => scan(a).map(boxed),
        Command::Detect(a) => detect(a).map(boxed),
        Command::Determinism(a) => determinism(a).map(boxed),
        Command::Bench(a) => bench(a).map(boxed),
        Command::Inspect(a) => inspect(a).map(boxed),
        Command::Train(a) => train(a).map(boxed),
        Command::Generate(a) => generate_cmd(a),
    })
}

fn boxed(r: Report) -> Output {
    Output::Report(Box::new(r))
}

fn config_echo<T: serde::Serialize>(args: &T) -> Value {
    serde_json::to_value(args).expect("arguments serialize")
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

pub fn parse_degrees(text: &str) -> Result<DegreeConfig, CliError> {
    let (h, k) = text
        .split_once(',')
        .ok_or_else(|| CliError::Input(format!("degrees must look like h,k, got {text:?}")))?;
    let parse = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| CliError::Input(format!("bad degree {s:?}")))
    };
    Ok(DegreeConfig::new(parse(h)?, parse(k)?)?)
}

fn load(input: &InputArgs) -> Result<LoadedPair, CliError> {
    load_pair(
        input.input.as_deref(),
        input.columns.as_deref(),
        input.synthetic.as_deref(),
    )
}

fn finite(value: f64, what: &str) -> Result<f64, CliError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(CliError::Numerical(format!("{what} is not finite")))
    }
}

/// One indicator on a pair; `seed` only matters for rdc.
fn indicator(
    method: Method,
    a: &SampleVector,
    b: &SampleVector,
    deg: DegreeConfig,
    d: usize,
    seed: u64,
    cfg: &SolverConfig,
) -> Result<f64, CliError> {
    let v = match method {
        Method::Kb => hgr_kb(a, b, deg, cfg)?.value,
        Method::Sk => hgr_sk(a, b, d, cfg)?.value,
        Method::Rdc => rdc(a, b, &RdcConfig::with_seed(seed))?,
        Method::Pearson => pearson(a, b)?.abs(),
    };
    finite(v, method.as_str())
}

fn compute(args: &ComputeArgs) -> Result<Report, CliError> {
    let pair = load(&args.input)?;
    let mut report = Report::new("compute", config_echo(args), Some(pair.sha256.clone()));
    let cfg = SolverConfig {
        ridge: args.ridge,
        method: match args.solver {
            Solver::Eigen => SolverMethod::Eigen,
            Solver::Refine => SolverMethod::Refine,
        },
        ..SolverConfig::default()
    };
    let start = Instant::now();
    let mut results = match args.method {
        Method::Kb => {
            let deg = parse_degrees(&args.degrees)?;
            let r = hgr_kb(&pair.a, &pair.b, deg, &cfg)?;
            finite(r.value, "kb")?;
            let mut v = serde_json::to_value(&r).expect("result serializes");
            v["degrees"] = json!([deg.h, deg.k]);
            v
        }
        Method::Sk => {
            let r = hgr_sk(&pair.a, &pair.b, args.degree, &cfg)?;
            finite(r.value, "sk")?;
            let mut v = serde_json::to_value(&r).expect("result serializes");
            v["degree"] = json!(args.degree);
            v
        }
        Method::Rdc => {
            let value = finite(
                rdc(&pair.a, &pair.b, &RdcConfig::with_seed(args.seed))?,
                "rdc",
            )?;
            json!({ "value": value, "seed": args.seed })
        }
        Method::Pearson => {
            let r = pearson(&pair.a, &pair.b)?;
            json!({ "value": r, "abs_value": r.abs() })
        }
    };
    report.timings_ms.insert("compute".into(), ms(start));
    results["method"] = json!(args.method.as_str());
    results["n"] = json!(pair.a.len());
    report.results = results;
    Ok(report)
}

fn scan(args: &ScanArgs) -> Result<Report, CliError> {
    let pair = load(&args.input)?;
    let max = parse_degrees(&args.max_degrees)?;
    let mut report = Report::new("scan", config_echo(args), Some(pair.sha256.clone()));
    let start = Instant::now();
    let grid = degree_scan(
        &pair.a,
        &pair.b,
        max.h,
        max.k,
        &SolverConfig::default(),
        &StdClock::new(),
    )?;
    report.timings_ms.insert("total".into(), ms(start));
    for (h, row) in grid.cell_seconds.iter().enumerate() {
        for (k, s) in row.iter().enumerate() {
            report
                .timings_ms
                .insert(format!("cell_{}_{}", h + 1, k + 1), s * 1e3);
        }
    }
    for row in &grid.values {
        for v in row {
            finite(*v, "grid cell")?;
        }
    }
    for v in &grid.violations {
        eprintln!(
            "warning: monotonicity violated: cell {:?} below {:?} by {:e}",
            v.higher, v.lower, v.deficit
        );
    }
    if let Some(path) = &args.csv {
        let headers: Vec<String> = std::iter::once("h".to_string())
            .chain((1..=max.k).map(|k| format!("k{k}")))
            .collect();
        let refs: Vec<&str> = headers.iter().map(String::as_str).collect();
        let rows: Vec<Vec<f64>> = grid
            .values
            .iter()
            .enumerate()
            .map(|(h, row)| {
                std::iter::once((h + 1) as f64)
                    .chain(row.iter().copied())
                    .collect()
            })
            .collect();
        write_numeric_csv(path, &refs, &rows)?;
    }
    report.results = json!({
        "max_degrees": [max.h, max.k],
        "values": grid.values,
        "monotone": grid.violations.is_empty(),
        "violations": grid.violations,
        "abs_pearson": pearson(&pair.a, &pair.b)?.abs(),
        "n": pair.a.len(),
    });
    Ok(report)
}

/// Result row, timing key and milliseconds for one (data set, method) job.
type DetectRow = (Value, String, f64);

/// (relation, sigma bits, method) -> (values, oracles).
type DetectGroups = BTreeMap<(String, u64, String), (Vec<f64>, Vec<f64>)>;

fn detect(args: &DetectArgs) -> Result<Report, CliError> {
    let relations: Vec<Relation> = args
        .relations
        .iter()
        .map(|r| r.trim().parse::<Relation>())
        .collect::<Result<_, HgrError>>()?;
    if args.seeds < 1 {
        return Err(CliError::Input("--seeds must be >= 1".into()));
    }
    let deg = parse_degrees(&args.degrees)?;
    let mut jobs = Vec::new();
    for &rel in &relations {
        for &sigma in &args.sigmas {
            for seed in 0..args.seeds {
                let data_seed = if args.fixed_data { 0 } else { seed };
                jobs.push((SyntheticSpec::new(rel, args.n, sigma, data_seed)?, seed));
            }
        }
    }
    let cfg = SolverConfig::default();
    let per_job: Vec<Result<Vec<DetectRow>, CliError>> = jobs
        .par_iter()
        .map(|(spec, seed)| {
            let (a, b) = generate(spec)?;
            let oracle = oracle_correlation(spec, &a, &b)?;
            args.methods
                .iter()
                .map(|&m| {
                    let start = Instant::now();
                    let value = indicator(m, &a, &b, deg, args.degree, *seed, &cfg)?;
                    let key = format!(
                        "{}/{}/{}/{}",
                        spec.relation,
                        spec.noise_sigma,
                        seed,
                        m.as_str()
                    );
                    let row = json!({
                        "relation": spec.relation.as_str(),
                        "sigma": spec.noise_sigma,
                        "seed": seed,
                        "method": m.as_str(),
                        "value": value,
                        "oracle": oracle,
                    });
                    Ok((row, key, ms(start)))
                })
                .collect()
        })
        .collect();

    let mut report = Report::new("detect", config_echo(args), None);
    let mut rows = Vec::new();
    for job in per_job {
        for (row, key, t) in job? {
            report.timings_ms.insert(key, t);
            rows.push(row);
        }
    }
    let sort_key = |r: &Value| {
        (
            r["relation"].as_str().unwrap_or("").to_string(),
            r["sigma"].as_f64().unwrap_or(0.0).to_bits(),
            r["seed"].as_u64().unwrap_or(0),
            r["method"].as_str().unwrap_or("").to_string(),
        )
    };
    rows.sort_by_key(sort_key);

    let mut groups = DetectGroups::new();
    for r in &rows {
        let key = (
            r["relation"].as_str().unwrap_or("").to_string(),
            r["sigma"].as_f64().unwrap_or(0.0).to_bits(),
            r["method"].as_str().unwrap_or("").to_string(),
        );
        let entry = groups.entry(key).or_default();
        entry.0.push(r["value"].as_f64().unwrap_or(f64::NAN));
        entry.1.push(r["oracle"].as_f64().unwrap_or(f64::NAN));
    }
    let summary: Vec<Value> = groups
        .into_iter()
        .map(|((rel, sigma, method), (values, oracles))| {
            let v = MeanStd::of(&values);
            json!({
                "relation": rel,
                "sigma": f64::from_bits(sigma),
                "method": method,
                "mean": v.mean,
                "std": v.std,
                "oracle_mean": stats::mean(&oracles),
                "seeds": values.len(),
            })
        })
        .collect();
    report.results = json!({ "rows": rows, "summary": summary });
    Ok(report)
}

fn determinism(args: &DeterminismArgs) -> Result<Report, CliError> {
    let pair = load(&args.input)?;
    if args.runs < 1 {
        return Err(CliError::Input("--runs must be >= 1".into()));
    }
    let deg = parse_degrees(&args.degrees)?;
    let cfg = SolverConfig::default();
    let mut report = Report::new("determinism", config_echo(args), Some(pair.sha256.clone()));
    let mut methods = args.methods.clone();
    methods.sort();
    methods.dedup();
    let mut results = serde_json::Map::new();
    for m in methods {
        let start = Instant::now();
        let values: Vec<f64> = (0..args.runs)
            .into_par_iter()
            .map(|run| indicator(m, &pair.a, &pair.b, deg, args.degree, run, &cfg))
            .collect::<Result<_, _>>()?;
        report.timings_ms.insert(m.as_str().into(), ms(start));
        let s = MeanStd::of(&values);
        let identical = values.iter().all(|v| v.to_bits() == values[0].to_bits());
        results.insert(
            m.as_str().into(),
            json!({ "values": values, "mean": s.mean, "std": s.std, "bit_identical": identical }),
        );
    }
    report.results = Value::Object(results);
    Ok(report)
}

fn bench(args: &BenchArgs) -> Result<Report, CliError> {
    if args.repeats < 1 {
        return Err(CliError::Input("--repeats must be >= 1".into()));
    }
    let relation: Relation = args.relation.parse()?;
    let deg = DegreeConfig::new(args.degree, args.degree)?;
    let mut report = Report::new("bench", config_echo(args), None);
    let mut rows = Vec::new();
    for &n in &args.sizes {
        let spec = SyntheticSpec::new(relation, n, args.sigma, args.seed)?;
        let (a, b) = generate(&spec)?;
        let mut sk_ms = Vec::with_capacity(args.repeats);
        let mut kb_ms = Vec::with_capacity(args.repeats);
        let mut sk_value = 0.0;
        let mut kb_value = 0.0;
        let mut kb_iterations = 0;
        for _ in 0..args.repeats {
            let start = Instant::now();
            sk_value = hgr_sk(&a, &b, args.degree, &SolverConfig::default())?.value;
            sk_ms.push(ms(start));
            let start = Instant::now();
            let r = hgr_kb(&a, &b, deg, &SolverConfig::refine())?;
            kb_ms.push(ms(start));
            kb_value = r.value;
            kb_iterations = r.diagnostics.iterations;
        }
        let sk = stats::median(&sk_ms);
        let kb = stats::median(&kb_ms);
        report.timings_ms.insert(format!("n_{n}_sk_median"), sk);
        report
            .timings_ms
            .insert(format!("n_{n}_kb_refine_median"), kb);
        rows.push(json!({
            "n": n,
            "sk_median_ms": sk,
            "kb_refine_median_ms": kb,
            "speedup": kb / sk,
            "sk_ms": sk_ms,
            "kb_refine_ms": kb_ms,
            "sk_value": sk_value,
            "kb_refine_value": kb_value,
            "kb_refine_iterations": kb_iterations,
        }));
    }
    report.results = json!({ "degree": args.degree, "repeats": args.repeats, "sizes": rows });
    Ok(report)
}

fn subset(x: &SampleVector, idx: &[usize]) -> Result<SampleVector, CliError> {
    Ok(SampleVector::new(
        idx.iter().map(|&i| x.values()[i]).collect(),
    )?)
}

fn inspect(args: &InspectArgs) -> Result<Report, CliError> {
    let pair = load(&args.input)?;
    let deg = parse_degrees(&args.degrees)?;
    let n = pair.a.len();
    let (train_idx, test_idx): (Vec<usize>, Vec<usize>) = match args.test_split {
        None => ((0..n).collect(), Vec::new()),
        Some(f) if f > 0.0 && f < 1.0 => {
            let order = shuffled_indices(n, args.split_seed);
            let n_test = ((n as f64) * f).round() as usize;
            let mut test = order[..n_test].to_vec();
            let mut train = order[n_test..].to_vec();
            test.sort_unstable();
            train.sort_unstable();
            (train, test)
        }
        Some(f) => {
            return Err(CliError::Input(format!(
                "--test-split must lie in (0, 1), got {f}"
            )))
        }
    };
    let mut report = Report::new("inspect", config_echo(args), Some(pair.sha256.clone()));
    let start = Instant::now();
    let a_train = subset(&pair.a, &train_idx)?;
    let b_train = subset(&pair.b, &train_idx)?;
    let need = deg.h.max(deg.k) + 1;
    if a_train.len() < need {
        return Err(HgrError::TooFewObservations {
            required: need,
            found: a_train.len(),
        }
        .into());
    }
    let ka = expand(&a_train, deg.h)?;
    let kb = expand(&b_train, deg.k)?;
    let r = hgr_kb_kernels(&ka, &kb, &SolverConfig::default())?;
    finite(r.value, "kb")?;
    let f = ka.centered().matvec(&r.alpha);
    let g = kb.centered().matvec(&r.beta);
    let projected = stats::correlation(&f, &g).unwrap_or(0.0);
    let mut results = json!({
        "degrees": [deg.h, deg.k],
        "value": r.value,
        "alpha": r.alpha,
        "beta": r.beta,
        "projected_correlation": projected,
        "alpha_magnitudes": r.alpha.iter().map(|x| x.abs()).collect::<Vec<_>>(),
        "beta_magnitudes": r.beta.iter().map(|x| x.abs()).collect::<Vec<_>>(),
        "n_train": train_idx.len(),
        "projections": { "f": f, "g": g },
    });
    let mut rows: Vec<Vec<f64>> = train_idx
        .iter()
        .zip(f.iter().zip(&g))
        .map(|(&i, (fi, gi))| vec![pair.a.values()[i], pair.b.values()[i], *fi, *gi, 0.0])
        .collect();
    if !test_idx.is_empty() {
        let ta: Vec<f64> = test_idx.iter().map(|&i| pair.a.values()[i]).collect();
        let tb: Vec<f64> = test_idx.iter().map(|&i| pair.b.values()[i]).collect();
        let ft = ka.project_new(&ta, &r.alpha)?;
        let gt = kb.project_new(&tb, &r.beta)?;
        let test_corr = stats::correlation(&ft, &gt).unwrap_or(0.0);
        results["test"] = json!({
            "n_test": test_idx.len(),
            "train_correlation": r.value,
            "test_correlation": test_corr,
            "gap": (r.value - test_corr).abs(),
            "projections": { "f": ft, "g": gt },
        });
        for (j, &i) in test_idx.iter().enumerate() {
            rows.push(vec![
                pair.a.values()[i],
                pair.b.values()[i],
                ft[j],
                gt[j],
                1.0,
            ]);
        }
    }
    report.timings_ms.insert("inspect".into(), ms(start));
    if let Some(path) = &args.csv {
        write_numeric_csv(path, &["a", "b", "f", "g", "test"], &rows)?;
    }
    report.results = results;
    Ok(report)
}

/// `key=value` pairs separated by `:`.
fn parse_kv(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    text.split(':')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            item.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| CliError::Input(format!("expected key=value, got {item:?}")))
        })
        .collect()
}

/// Parses `n=..[:seed=..]` for the synthetic fairness data (defaults 2000, 0).
pub fn parse_fairness_spec(text: &str) -> Result<(usize, u64), CliError> {
    let kv = parse_kv(text)?;
    let mut n = 2000usize;
    let mut seed = 0u64;
    for (k, v) in &kv {
        let bad = || CliError::Input(format!("bad value for {k}: {v:?}"));
        match k.as_str() {
            "n" => n = v.parse().map_err(|_| bad())?,
            "seed" => seed = v.parse().map_err(|_| bad())?,
            other => return Err(CliError::Input(format!("unknown key {other:?}"))),
        }
    }
    if n < 10 {
        return Err(CliError::Input("fairness data needs n >= 10".into()));
    }
    Ok((n, seed))
}

fn load_training_data(args: &TrainArgs) -> Result<(Dataset, String), CliError> {
    let (table, schema, sha): (RawTable, Schema, String) =
        if let Some(rest) = args.data.strip_prefix("synthetic") {
            let (n, seed) = parse_fairness_spec(rest.trim_start_matches(':'))?;
            let (table, mut schema) = synthetic_fairness(n, seed);
            if let Some(text) = &args.schema {
                schema = Schema::parse(text)?;
            }
            let sha = sha256_hex(table.to_csv().as_bytes());
            (table, schema, sha)
        } else {
            let bytes = read_file(std::path::Path::new(&args.data))?;
            let table = parse_table(&bytes)?;
            let schema = Schema::parse(
                args.schema
                    .as_deref()
                    .ok_or_else(|| CliError::Input("--schema is required for CSV data".into()))?,
            )?;
            (table, schema, sha256_hex(&bytes))
        };
    Ok((preprocess(&table, &schema)?, sha))
}

fn train(args: &TrainArgs) -> Result<Report, CliError> {
    let (data, sha) = load_training_data(args)?;
    let deg = parse_degrees(&args.degrees)?;
    let penalizer = match args.penalizer {
        PenalizerArg::Kb => Penalizer::HgrKb(deg),
        PenalizerArg::Sk => Penalizer::HgrSk(args.degree),
        PenalizerArg::None => Penalizer::None,
    };
    let cfg = TrainConfig {
        tau: args.tau,
        penalizer,
        primal_lr: args.lr,
        dual_lr: args.dual_lr,
        epochs: args.epochs,
        hidden: args.hidden.clone(),
        seed: args.seed,
        eval_degrees: deg,
        eval_sk_degree: args.degree,
        solver: SolverConfig::default(),
    };
    cfg.validate()?;
    if args.folds < 2 || args.folds > data.len() {
        return Err(CliError::Input(format!(
            "--folds must lie in 2..={}",
            data.len()
        )));
    }
    let mut report = Report::new("train", config_echo(args), Some(sha));
    let start = Instant::now();
    let blocks = fold_indices(data.len(), args.folds, args.seed);
    let folds = (0..args.folds)
        .into_par_iter()
        .map(|f| cross_validate_fold(&data, &cfg, &blocks, f, &StdClock::new()))
        .collect::<Result<Vec<_>, _>>()?;
    let cv = summarize(penalizer, folds);
    report.timings_ms.insert("total".into(), ms(start));
    for f in &cv.folds {
        report
            .timings_ms
            .insert(format!("fold_{}", f.fold), f.seconds * 1e3);
    }
    report
        .timings_ms
        .insert("fold_mean".into(), cv.summary.time.mean * 1e3);
    report
        .timings_ms
        .insert("fold_std".into(), cv.summary.time.std * 1e3);

    let folds: Vec<Value> = cv
        .folds
        .iter()
        .map(|f| {
            let lambdas: Vec<f64> = f.run.trajectory.iter().map(|e| e.lambda).collect();
            let mut v = json!({
                "fold": f.fold,
                "train": f.train,
                "val": f.val,
                "final_lambda": f.run.lambda,
                "min_lambda": lambdas.iter().copied().fold(f64::INFINITY, f64::min),
                "degenerate_epochs": f.run.trajectory.iter().filter(|e| e.degenerate).count(),
            });
            if args.trajectories {
                v["trajectory"] = json!(f.run.trajectory);
            }
            v
        })
        .collect();
    let s = &cv.summary;
    report.results = json!({
        "penalizer": penalizer.label(),
        "tau": args.tau,
        "summary": {
            "score_train": s.score_train,
            "score_val": s.score_val,
            "constraint_train": s.constraint_train,
            "constraint_val": s.constraint_val,
        },
        "folds": folds,
        "dataset": {
            "n": data.len(),
            "features": data.feature_names,
            "dropped": data.dropped,
            "task": data.task,
        },
    });
    Ok(report)
}

fn generate_cmd(args: &GenerateArgs) -> Result<Output, CliError> {
    let text = match (&args.synthetic, &args.fairness) {
        (Some(spec), None) => {
            let spec = SyntheticSpec::parse(spec)?;
            let (a, b) = generate(&spec)?;
            to_csv(&a, &b)
        }
        (None, Some(spec)) => {
            let (n, seed) = parse_fairness_spec(spec)?;
            synthetic_fairness(n, seed).0.to_csv()
        }
        _ => {
            return Err(CliError::Input(
                "exactly one of --synthetic or --fairness is required".into(),
            ))
        }
    };
    match &args.output {
        None => Ok(Output::Text(text)),
        Some(path) => {
            std::fs::write(path, &text)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            let mut report = Report::new(
                "generate",
                config_echo(args),
                Some(sha256_hex(text.as_bytes())),
            );
            report.results = json!({
                "path": path.display().to_string(),
                "rows": text.lines().count().saturating_sub(1),
            });
            Ok(boxed(report))
        }
    }
}
