use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};

use kdsum::bandwidth::{select_bandwidths, OptimizerOptions};
use kdsum::clustering::{cut, hac, kmeans_dist, ClusterLabels};
use kdsum::datagen::{
    gen_gridsearch_categorical_with, gen_gridsearch_continuous, gen_gridsearch_mixed, gen_mixed,
    gen_sample_size, gen_sim, Generated, MixedGenSpec, SimSpec,
};
use kdsum::evaluation::evaluate;
use kdsum::harness::{
    compute_distance, parse_algorithms, run_gridsearch, run_montecarlo, run_pipeline, summarize,
    Algorithm, BandwidthSource, GridAxis, McConfig, McSource, Metric,
};
use kdsum::io::{ingest_csv, read_labels, read_matrix, write_dataset, write_labels, write_matrix};
use kdsum::{BoundsConfig, ContinuousKernel, KernelSelection, TypedDataset};

use crate::manifest::{write_json, Recorder};
use crate::{
    BandwidthArgs, Cli, ClusterArgs, Command, DataArgs, DistanceArgs, EvalArgs, GeneratorArgs,
    GridsearchArgs, KernelArgs, MetricArgs, MontecarloArgs, OptimizerArgs, PipelineArgs,
    SimulateArgs,
};

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Distance(a) => distance(cli, a),
        Command::Bandwidth(a) => bandwidth(cli, a),
        Command::Cluster(a) => cluster(cli, a),
        Command::Eval(a) => eval(cli, a),
        Command::Pipeline(a) => pipeline(cli, a),
        Command::Simulate(a) => simulate(cli, a),
        Command::Gridsearch(a) => gridsearch(cli, a),
        Command::Montecarlo(a) => montecarlo(cli, a),
    }
}

fn recorder(cli: &Cli, command: &str) -> Result<Recorder> {
    let prefix = cli.out.clone().ok_or_else(|| {
        kdsum::Error::InvalidArgument(format!("`{command}` writes files; pass --out <prefix>"))
    })?;
    if let Some(dir) = prefix.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(Recorder::new(command, cli.seed, prefix))
}

fn kernels(args: &KernelArgs) -> Result<KernelSelection> {
    let continuous: ContinuousKernel = args.kernel.parse()?;
    Ok(KernelSelection { continuous })
}

fn bounds(opt: &OptimizerArgs) -> BoundsConfig {
    BoundsConfig {
        epsilon: opt.epsilon,
        aitken_cap: opt.aitken_cap,
    }
}

fn optimizer(opt: &OptimizerArgs, seed: u64) -> OptimizerOptions {
    OptimizerOptions {
        restarts: opt.restarts,
        seed,
        max_evals: opt.max_evals,
        tolerance: opt.tolerance,
        bounds: bounds(opt),
        subsample: opt.subsample,
    }
}

fn metric(name: &str, kernel: &KernelArgs) -> Result<Metric> {
    Ok(match name.parse::<Metric>()? {
        Metric::Kdsum(_) => Metric::Kdsum(kernels(kernel)?),
        other => other,
    })
}

fn load(rec: &mut Recorder, data: &DataArgs) -> Result<TypedDataset> {
    rec.input(&data.data)?;
    rec.input(&data.schema)?;
    rec.stage("ingest", || Ok(ingest_csv(&data.data, &data.schema)?))
}

fn load_labels(rec: &mut Recorder, path: &Path, n: usize) -> Result<ClusterLabels> {
    rec.input(path)?;
    let labels = read_labels(path)?;
    if labels.len() != n {
        return Err(kdsum::Error::Dimension(format!(
            "{} has {} labels for {n} rows",
            path.display(),
            labels.len()
        ))
        .into());
    }
    Ok(ClusterLabels::new(labels))
}

/// Bandwidths from a JSON list, `{"values": [...]}` or a `kdsum bandwidth` result.
fn read_bandwidth_file(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let list = [
        value.pointer("/bandwidths/values"),
        value.pointer("/values"),
        Some(&value),
    ]
    .into_iter()
    .flatten()
    .find_map(Value::as_array)
    .ok_or_else(|| {
        kdsum::Error::InvalidArgument(format!("{}: no bandwidth list found", path.display()))
    })?;
    list.iter()
        .map(|v| {
            v.as_f64().ok_or_else(|| {
                kdsum::Error::InvalidArgument(format!("{}: `{v}` is not a number", path.display()))
                    .into()
            })
        })
        .collect()
}

fn bandwidth_source(rec: &mut Recorder, args: &MetricArgs, seed: u64) -> Result<BandwidthSource> {
    Ok(match (&args.bandwidths, &args.bandwidth_file) {
        (Some(values), _) => BandwidthSource::Fixed(values.clone()),
        (None, Some(path)) => {
            rec.input(path)?;
            BandwidthSource::Fixed(read_bandwidth_file(path)?)
        }
        (None, None) => BandwidthSource::Mscv(optimizer(&args.optimizer, seed)),
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn write_header(out: &mut impl Write, header: &[String]) -> Result<()> {
    for line in header {
        writeln!(out, "# {line}")?;
    }
    Ok(())
}

fn distance(cli: &Cli, a: &DistanceArgs) -> Result<()> {
    let mut rec = recorder(cli, "distance")?;
    let ds = load(&mut rec, &a.data)?;
    let metric = metric(&a.metric.metric, &a.metric.kernel)?;
    let source = bandwidth_source(&mut rec, &a.metric, cli.seed)?;
    let bounds = bounds(&a.metric.optimizer);
    rec.set_config(json!({ "metric": metric, "bandwidths": source, "bounds": bounds }));
    let dist = rec.stage("distance", || {
        Ok(compute_distance(&ds, metric, &source, &bounds)?)
    })?;

    let mut comments = rec.header();
    comments.push(format!("metric: {}", metric.name()));
    if let Some(bw) = &dist.bandwidths {
        comments.push(format!(
            "bandwidths: {}",
            serde_json::to_string(bw.values())?
        ));
    }
    let path = rec.output("matrix.csv");
    write_matrix(&dist.matrix, &comments, create(&path)?)?;
    if let Some(cv) = &dist.cv {
        write_json(&rec.output("cv.json"), cv)?;
    }
    println!(
        "wrote {} ({} x {})",
        path.display(),
        dist.matrix.n(),
        dist.matrix.n()
    );
    rec.finish()?;
    Ok(())
}

fn bandwidth(cli: &Cli, a: &BandwidthArgs) -> Result<()> {
    let mut rec = recorder(cli, "bandwidth")?;
    let ds = load(&mut rec, &a.data)?;
    let kernels = kernels(&a.kernel)?;
    let opts = optimizer(&a.optimizer, cli.seed);
    rec.set_config(json!({ "kernels": kernels, "optimizer": opts }));
    let cv = rec.stage("bandwidth", || Ok(select_bandwidths(&ds, kernels, &opts)?))?;
    write_json(&rec.output("bandwidth.json"), &cv)?;
    for (name, v) in cv.bandwidths.names().iter().zip(cv.bandwidths.values()) {
        println!("{name}\t{v}");
    }
    println!("objective\t{}", cv.objective);
    rec.finish()?;
    Ok(())
}

fn cluster(cli: &Cli, a: &ClusterArgs) -> Result<()> {
    let mut rec = recorder(cli, "cluster")?;
    rec.input(&a.matrix)?;
    let algo: Algorithm = a.algo.parse()?;
    rec.set_config(json!({ "algorithm": algo.name(), "k": a.k }));
    let (dm, _) = read_matrix(&a.matrix)?;
    let labels = match algo {
        Algorithm::Hac(linkage) => {
            let dg = rec.stage("cluster", || Ok(hac(&dm, linkage)?))?;
            write_json(&rec.output("dendrogram.json"), &dg)?;
            cut(&dg, a.k)?
        }
        Algorithm::KMeansDist => {
            rec.stage("cluster", || Ok(kmeans_dist(&dm, a.k, cli.seed, 100)?))?
        }
    };
    let path = rec.output("labels.csv");
    write_labels(labels.as_slice(), create(&path)?)?;
    println!("wrote {} ({} clusters)", path.display(), labels.k());
    rec.finish()?;
    Ok(())
}

fn eval(cli: &Cli, a: &EvalArgs) -> Result<()> {
    let truth = read_labels(&a.truth)?;
    let pred = read_labels(&a.pred)?;
    let report = evaluate(&truth, &pred)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    if cli.out.is_some() {
        let mut rec = recorder(cli, "eval")?;
        rec.input(&a.truth)?;
        rec.input(&a.pred)?;
        write_json(&rec.output("report.json"), &report)?;
        rec.finish()?;
    }
    Ok(())
}

fn pipeline(cli: &Cli, a: &PipelineArgs) -> Result<()> {
    let mut rec = recorder(cli, "pipeline")?;
    let ds = load(&mut rec, &a.data)?;
    let truth = load_labels(&mut rec, &a.labels, ds.n())?;
    let metric = metric(&a.metric.metric, &a.metric.kernel)?;
    let source = bandwidth_source(&mut rec, &a.metric, cli.seed)?;
    let bounds = bounds(&a.metric.optimizer);
    let algos = parse_algorithms(&a.algo)?;
    let k = a.k.unwrap_or_else(|| truth.k());
    rec.set_config(json!({
        "metric": metric,
        "bandwidths": source,
        "bounds": bounds,
        "algorithms": algos.iter().map(Algorithm::name).collect::<Vec<_>>(),
        "k": k,
    }));
    let report = rec.stage("pipeline", || {
        Ok(run_pipeline(
            &ds, &truth, metric, &source, &bounds, &algos, k, cli.seed,
        )?)
    })?;
    let summary = json!({
        "n": report.n,
        "k": report.k,
        "metric": report.metric,
        "bandwidths": report.bandwidths,
        "reports": report.reports.iter().map(|r| json!({"algorithm": r.algorithm, "ca": r.ca, "ari": r.ari})).collect::<Vec<_>>(),
        "best": {
            "algorithm": report.best_report().algorithm,
            "ca": report.best_report().ca,
            "ari": report.best_report().ari,
        },
    });
    write_json(&rec.output("report.json"), &summary)?;
    for (i, r) in report.reports.iter().enumerate() {
        let mark = if i == report.best { " *" } else { "" };
        println!("{:<16} ca={:.3} ari={:.3}{mark}", r.algorithm, r.ca, r.ari);
    }
    rec.finish()?;
    Ok(())
}

type GeneratorFn = Box<dyn Fn(u64) -> kdsum::Result<Generated>>;

/// Builds the generator named by the flags.
fn generator(g: &GeneratorArgs) -> Result<(String, GeneratorFn)> {
    if let Some(sim) = g.sim {
        let sizes = g.sizes.clone();
        return Ok((
            format!("sim{sim}"),
            Box::new(move |seed| {
                gen_sim(&SimSpec {
                    sim,
                    seed,
                    sizes: sizes.clone(),
                })
            }),
        ));
    }
    let name = g
        .generator
        .clone()
        .ok_or_else(|| kdsum::Error::InvalidArgument("pass --sim N or --generator NAME".into()))?;
    let single_size = || -> Result<usize> {
        match g.sizes.as_deref() {
            Some([m]) => Ok(*m),
            _ => Err(kdsum::Error::InvalidArgument(format!(
                "--generator {name} needs exactly one --sizes value"
            ))
            .into()),
        }
    };
    let f: Box<dyn Fn(u64) -> kdsum::Result<Generated>> = match name.as_str() {
        "gridsearch-continuous" => Box::new(gen_gridsearch_continuous),
        "gridsearch-categorical" => Box::new(|seed| gen_gridsearch_categorical_with(seed, 3)),
        "gridsearch-categorical-2" => Box::new(|seed| gen_gridsearch_categorical_with(seed, 2)),
        "gridsearch-mixed" => Box::new(gen_gridsearch_mixed),
        "sample-size" => {
            let m = single_size()?;
            Box::new(move |seed| gen_sample_size(m, seed))
        }
        "mixed" => {
            let spec = mixed_spec(g, single_size()?);
            Box::new(move |seed| {
                gen_mixed(&MixedGenSpec {
                    seed,
                    ..spec.clone()
                })
            })
        }
        other => bail!(kdsum::Error::InvalidArgument(format!(
            "unknown generator `{other}`"
        ))),
    };
    Ok((name, f))
}

fn mixed_spec(g: &GeneratorArgs, n: usize) -> MixedGenSpec {
    MixedGenSpec {
        n,
        first_fraction: g.ratio,
        continuous: g.continuous,
        unordered_levels: g.unordered_levels.clone(),
        ordered_levels: g.ordered_levels.clone(),
        continuous_overlap: g.overlap,
        categorical_overlap: g.overlap,
        seed: 0,
    }
}

fn simulate(cli: &Cli, a: &SimulateArgs) -> Result<()> {
    let mut rec = recorder(cli, "simulate")?;
    let (name, gen) = generator(&a.generator)?;
    rec.set_config(json!({ "generator": name, "sizes": a.generator.sizes }));
    let (ds, labels) = rec.stage("generate", || Ok(gen(cli.seed)?))?;
    let data = rec.output("data.csv");
    let schema = rec.output("schema.json");
    write_dataset(&ds, &data, &schema)?;
    write_labels(labels.as_slice(), create(&rec.output("labels.csv"))?)?;
    println!(
        "wrote {} ({} rows, {} variables)",
        data.display(),
        ds.n(),
        ds.p()
    );
    rec.finish()?;
    Ok(())
}

fn gridsearch(cli: &Cli, a: &GridsearchArgs) -> Result<()> {
    let mut rec = recorder(cli, "gridsearch")?;
    let ds = load(&mut rec, &a.data)?;
    let truth = load_labels(&mut rec, &a.labels, ds.n())?;
    let kernels = kernels(&a.kernel)?;
    let parsed: Vec<GridAxis> = a
        .grid
        .iter()
        .map(|s| s.parse())
        .collect::<kdsum::Result<_>>()?;
    let axes = match parsed.len() {
        1 => vec![parsed[0]; ds.p()],
        _ => parsed,
    };
    let algo: Algorithm = a.algo.parse()?;
    let k = a.k.unwrap_or_else(|| truth.k());
    let opts = optimizer(&a.optimizer, cli.seed);
    let bounds = bounds(&a.optimizer);
    rec.set_config(json!({
        "kernels": kernels,
        "axes": axes.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "algorithm": algo.name(),
        "k": k,
        "optimizer": if a.no_mscv { Value::Null } else { serde_json::to_value(&opts)? },
    }));
    let mscv = (!a.no_mscv).then_some(&opts);
    let report = rec.stage("gridsearch", || {
        Ok(run_gridsearch(
            &ds,
            &truth,
            kernels,
            &axes,
            algo,
            k,
            cli.seed,
            &bounds,
            mscv,
            a.allow_large,
        )?)
    })?;

    let path = rec.output("grid.csv");
    let mut out = create(&path)?;
    write_header(&mut out, &rec.header())?;
    let names: Vec<String> = ds
        .schema()
        .iter()
        .map(|v| format!("lambda_{}", v.name))
        .collect();
    writeln!(out, "{},ca,ari", names.join(","))?;
    for row in &report.rows {
        let lambdas: Vec<String> = row.lambda.iter().map(f64::to_string).collect();
        writeln!(out, "{},{},{}", lambdas.join(","), row.ca, row.ari)?;
    }
    out.flush()?;
    if let (Some(row), Some(cv)) = (&report.mscv, &report.cv) {
        write_json(&rec.output("mscv.json"), &json!({ "point": row, "cv": cv }))?;
        println!(
            "cross-validated point {:?}: ca={:.3} ari={:.3}",
            row.lambda, row.ca, row.ari
        );
    }
    println!("wrote {} ({} rows)", path.display(), report.rows.len());
    rec.finish()?;
    Ok(())
}

fn montecarlo(cli: &Cli, a: &MontecarloArgs) -> Result<()> {
    let mut rec = recorder(cli, "montecarlo")?;
    let g = &a.generator;
    let source = match (g.sim, g.generator.as_deref()) {
        (Some(sim), _) => McSource::Sim(sim),
        (None, Some("sample-size")) => McSource::SampleSize,
        (None, Some("mixed")) => McSource::Mixed(mixed_spec(g, 0)),
        (None, Some(other)) => bail!(kdsum::Error::InvalidArgument(format!(
            "montecarlo supports --sim N, --generator sample-size and --generator mixed, not `{other}`"
        ))),
        (None, None) => bail!(kdsum::Error::InvalidArgument("pass --sim N or --generator NAME".into())),
    };
    if matches!(source, McSource::Mixed(_)) && g.sizes.is_none() {
        bail!(kdsum::Error::InvalidArgument(
            "--generator mixed needs --sizes (values of n)".into()
        ));
    }
    let default_algo = if g.sim.is_some() {
        "hac/average"
    } else {
        "kmeans"
    };
    let algorithms = parse_algorithms(a.algo.as_deref().unwrap_or(default_algo))?;
    let cfg = McConfig {
        source,
        reps: a.reps,
        sizes: g.sizes.clone().unwrap_or_default(),
        seed: cli.seed,
        metric: metric(&a.metric, &a.kernel)?,
        algorithms,
        k: a.k,
        optimizer: optimizer(&a.optimizer, cli.seed),
        bounds: bounds(&a.optimizer),
    };
    rec.set_config(serde_json::to_value(&cfg)?);
    let results = rec.stage("montecarlo", || Ok(run_montecarlo(&cfg)?))?;
    let summaries = summarize(&results);

    let fmt_size = |s: Option<usize>| s.map_or_else(String::new, |m| m.to_string());
    let path = rec.output("reps.csv");
    let mut out = create(&path)?;
    write_header(&mut out, &rec.header())?;
    writeln!(out, "size,rep,seed,algorithm,ca,ari,runtime_seconds")?;
    for r in &results {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_size(r.size),
            r.rep,
            r.seed,
            r.algorithm,
            r.ca,
            r.ari,
            r.runtime_seconds
        )?;
    }
    out.flush()?;

    let spath = rec.output("summary.csv");
    let mut out = create(&spath)?;
    write_header(&mut out, &rec.header())?;
    writeln!(out, "size,algorithm,reps,mean_ca,median_ca,q25_ca,q75_ca,mean_ari,median_ari,q25_ari,q75_ari,mean_runtime")?;
    for s in &summaries {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            fmt_size(s.size),
            s.algorithm,
            s.reps,
            s.mean_ca,
            s.median_ca,
            s.q25_ca,
            s.q75_ca,
            s.mean_ari,
            s.median_ari,
            s.q25_ari,
            s.q75_ari,
            s.mean_runtime
        )?;
        println!(
            "{:>6} {:<16} mean ca={:.3} mean ari={:.3} mean runtime={:.3}s",
            fmt_size(s.size),
            s.algorithm,
            s.mean_ca,
            s.mean_ari,
            s.mean_runtime
        );
    }
    out.flush()?;
    rec.finish()?;
    Ok(())
}
