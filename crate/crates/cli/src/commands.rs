use std::collections::BTreeMap;
use std::path::Path;

use layercomp_adaptive::{
    build_model, evaluate, load_idx, measure_h_max, saturate, train_mlp, GrayZonePolicy,
    TrainConfig,
};
use layercomp_core::linear::{
    cost_ratio, delta_bound, layered_cost, remainder_bound, LayeredLinearJob,
};
use layercomp_core::nn::{
    nn_cost_gap, nn_delta_bound, parse_nnw, write_nnw, LayeredModel, NnBoundInputs,
};
use layercomp_core::numerics::partition_scalar;
use layercomp_core::{partition, schedule, Matrix, PartitioningVector};
use layercomp_sim::{
    delay_stats, layered_lb, layered_lb_with, simulate, success_curve, SimConfig, SimMode,
};

use crate::output::{num, opt, read_rows, CliResult, Csv, RunOutput};
use crate::{simconf, Command};

pub fn run(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Partition { value, pv } => partition_cmd(value, &pv),
        Command::MatmulLayered { w, x, pw, px, out } => matmul(&w, &x, &pw, &px, out.as_deref()),
        Command::NnEval {
            model,
            input,
            r,
            px,
            pw,
            hmin,
            saturate,
            out,
        } => nn_eval(
            &model,
            &input,
            r,
            px.as_deref(),
            pw.as_deref(),
            hmin,
            saturate,
            out.as_deref(),
        ),
        Command::Bounds {
            pw,
            px,
            n,
            model,
            hmax,
            hmin,
            out,
        } => match model {
            Some(m) => nn_bounds(&m, pw.as_deref(), &px, hmax, hmin, out.as_deref()),
            None => bounds(
                pw.as_deref().ok_or("--pw is required without --model")?,
                &px,
                n,
                out.as_deref(),
            ),
        },
        Command::Simulate {
            config,
            overrides,
            seed,
            out_dir,
        } => simulate_cmd(config.as_deref(), &overrides, seed, &out_dir),
        Command::Train {
            images,
            labels,
            epochs,
            batch,
            lr,
            hidden,
            seed,
            out,
        } => train(&images, &labels, epochs, batch, lr, &hidden, seed, &out),
        Command::Adaptive {
            model,
            images,
            labels,
            zone,
            r,
            hmin,
            out,
        } => adaptive(&model, &images, &labels, &zone, r, hmin, &out),
    }
}

/// `--seed`, then `LAYERCOMP_SEED`, then `fallback`.
fn resolve_seed(flag: Option<u64>, fallback: u64) -> CliResult<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("LAYERCOMP_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| format!("LAYERCOMP_SEED: bad seed `{v}`").into()),
        Err(_) => Ok(fallback),
    }
}

fn emit(out: Option<&Path>, csv: &Csv, subcommand: &str) -> CliResult<()> {
    match out {
        Some(path) => {
            let dir = path
                .parent()
                .filter(|p| !p.as_os_str().is_empty())
                .unwrap_or(Path::new("."));
            let name = path
                .file_name()
                .ok_or("output path has no file name")?
                .to_string_lossy();
            let mut run = RunOutput::new(dir, subcommand, None)?;
            run.write(&name, csv.as_str())?;
            run.finish()
        }
        None => {
            print!("{}", csv.as_str());
            Ok(())
        }
    }
}

fn pv(text: &str) -> CliResult<PartitioningVector> {
    Ok(text.parse()?)
}

fn partition_cmd(value: f64, pv_text: &str) -> CliResult<()> {
    let p = pv(pv_text)?;
    let parts = partition_scalar(value, &p)?;
    let digits: Vec<String> = parts.digits.iter().map(u64::to_string).collect();
    println!("value {value}");
    println!("partitioning {p}");
    println!("sign {}", parts.sign);
    println!("components {}", digits.join(","));
    let lm = partition(&Matrix::scalar(value), &p)?;
    for k in 1..=p.depth() {
        println!("reconstruction[{k}] {}", lm.reconstruct(k)?.get(0, 0));
    }
    Ok(())
}

fn matmul(w: &Path, x: &Path, pw: &str, px: &str, out: Option<&Path>) -> CliResult<()> {
    let w = Matrix::from_rows(&read_rows(w)?)?;
    let x: Vec<f64> = read_rows(x)?.concat();
    let (pw, px) = (pv(pw)?, pv(px)?);
    let mut job = LayeredLinearJob::new(&w, &x, &pw, &px)?;
    let mut header = vec!["r".to_string(), "i".into(), "j".into()];
    header.extend((0..w.rows()).map(|k| format!("omega_{k}")));
    header.extend([
        "max_abs_error".into(),
        "delta_bound".into(),
        "remainder_bound".into(),
    ]);
    let exact = w.matvec(&x)?;
    let mut csv = Csv::new(&header);
    for (r, omega) in job.run().into_iter().enumerate() {
        let (i, j) = job.schedule().pair(r + 1);
        let err = exact
            .iter()
            .zip(&omega)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let mut row = vec![(r + 1).to_string(), i.to_string(), j.to_string()];
        row.extend(omega.into_iter().map(num));
        row.push(num(err));
        row.push(num(delta_bound(&pw, &px, r + 1, w.cols())?));
        row.push(num(remainder_bound(&pw, &px, r + 1, w.cols())?));
        csv.row(&row);
    }
    emit(out, &csv, "matmul-layered")
}

fn weight_partitioning(
    text: Option<&str>,
    net_weights: &[Matrix],
    r: usize,
) -> CliResult<Vec<PartitioningVector>> {
    match text {
        Some(t) => t.split(';').map(pv).collect(),
        None => Ok(layercomp_adaptive::choose_partitioning(net_weights, r)?),
    }
}

fn load_model(path: &Path) -> CliResult<layercomp_core::nn::Network> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(parse_nnw(&text).map_err(|e| format!("{}: {e}", path.display()))?)
}

#[allow(clippy::too_many_arguments)]
fn nn_eval(
    model: &Path,
    input: &Path,
    r: usize,
    px: Option<&str>,
    pw: Option<&str>,
    hmin: i32,
    clamp: bool,
    out: Option<&Path>,
) -> CliResult<()> {
    let net = load_model(model)?;
    let pv_x = match px {
        Some(t) => pv(t)?,
        None => PartitioningVector::unit_spaced(0, r)?,
    };
    let pv_w = weight_partitioning(pw, net.weights(), pv_x.depth())?;
    let layered = LayeredModel::new(net.clone(), pv_x.clone(), pv_w, hmin)?;
    let outputs = net.widths().last().copied().unwrap_or(0);
    let mut header = vec!["sample".to_string(), "resolution".into()];
    header.extend((0..outputs).map(|k| format!("out_{k}")));
    let mut csv = Csv::new(&header);
    for (s, raw) in read_rows(input)?.into_iter().enumerate() {
        let x = if clamp { saturate(&raw, &pv_x) } else { raw };
        let mut state = layered.start(&x)?;
        for (k, o) in state.run()?.into_iter().enumerate() {
            let mut row = vec![s.to_string(), (k + 1).to_string()];
            row.extend(o.into_iter().map(num));
            csv.row(&row);
        }
        let mut row = vec![s.to_string(), "oneshot".into()];
        row.extend(net.forward(&x)?.into_iter().map(num));
        csv.row(&row);
    }
    emit(out, &csv, "nn-eval")
}

fn bounds(pw: &str, px: &str, n: usize, out: Option<&Path>) -> CliResult<()> {
    let (pw, px) = (pv(pw)?, pv(px)?);
    let s = schedule(&pw, &px)?;
    let mut csv = Csv::new(&[
        "r",
        "i",
        "j",
        "exponent_sum",
        "delta_bound",
        "remainder_bound",
        "layered_cost",
        "cost_ratio",
    ]);
    for r in 1..=s.len() {
        let (i, j) = s.pair(r);
        csv.row(&[
            r.to_string(),
            i.to_string(),
            j.to_string(),
            s.exponent_sum(r).to_string(),
            num(delta_bound(&pw, &px, r, n)?),
            num(remainder_bound(&pw, &px, r, n)?),
            layered_cost(&pw, &px, r, 1, n)?.to_string(),
            num(cost_ratio(&pw, &px, r)?),
        ]);
    }
    emit(out, &csv, "bounds")
}

fn nn_bounds(
    model: &Path,
    pw: Option<&str>,
    px: &str,
    hmax: Option<i32>,
    hmin: i32,
    out: Option<&Path>,
) -> CliResult<()> {
    let net = load_model(model)?;
    let pv_x = pv(px)?;
    let inputs = NnBoundInputs {
        j_max: net.output().jacobian_max(),
        widths: net.widths(),
        pv_w: weight_partitioning(pw, net.weights(), pv_x.depth())?,
        pv_x,
        h_max: hmax.ok_or("--hmax is required with --model")?,
        h_min: hmin,
    };
    let mut csv = Csv::new(&["r", "nn_delta_bound", "cost_gap"]);
    for r in 1..=inputs.resolutions() {
        csv.row(&[
            r.to_string(),
            num(nn_delta_bound(&inputs, r)?),
            num(nn_cost_gap(&inputs, r)?),
        ]);
    }
    emit(out, &csv, "bounds")
}

fn simulate_cmd(
    config: Option<&Path>,
    overrides: &[String],
    seed: Option<u64>,
    out_dir: &Path,
) -> CliResult<()> {
    let mut map = simconf::defaults();
    let env_seed = resolve_seed(None, 0)?;
    map.insert("seed".into(), env_seed.to_string());
    if let Some(path) = config {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        simconf::apply_text(&mut map, &text, &path.display().to_string())?;
    }
    for o in overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| format!("--set expects KEY=VALUE, got `{o}`"))?;
        simconf::apply(&mut map, k, v)?;
    }
    if let Some(s) = seed {
        map.insert("seed".into(), s.to_string());
    }
    let cfg = simconf::build(&map)?;
    let sweep = simconf::list(&map, "sweep")?;
    let bin_width: f64 = map["bin_width"]
        .parse()
        .map_err(|_| "bin_width: bad number")?;
    let r_max = cfg.resolutions();

    let mut run = RunOutput::new(out_dir, "simulate", Some(cfg.seed))?;
    for (k, v) in &map {
        run.set(k, v);
    }

    let records = simulate(&cfg)?;
    let mut header = vec!["job_id".to_string(), "arrival".into()];
    header.extend((1..=r_max).map(|r| format!("D{r}")));
    header.push("terminated".into());
    let mut delays = Csv::new(&header);
    for (id, job) in records.iter().enumerate() {
        let mut row = vec![id.to_string(), num(job.arrival)];
        row.extend((1..=r_max).map(|r| opt(job.delay(r))));
        row.push(job.terminated.to_string());
        delays.row(&row);
    }
    run.write("delays.csv", delays.as_str())?;

    let one_cfg = SimConfig {
        mode: SimMode::OneShot,
        ..cfg.clone()
    };
    let one_records = simulate(&one_cfg)?;
    let mut stats = Csv::new(&["resolution", "count", "mean", "std_dev"]);
    let mut hist_cols = Vec::new();
    for (name, recs, r) in (1..=r_max)
        .map(|r| (r.to_string(), &records, r))
        .chain(std::iter::once(("oneshot".to_string(), &one_records, 1)))
    {
        match delay_stats(recs, r, bin_width) {
            Ok(s) => {
                stats.row(&[name, s.count.to_string(), num(s.mean), num(s.std_dev)]);
                hist_cols.push(s.histogram);
            }
            Err(_) => {
                stats.row(&[name, "0".into(), String::new(), String::new()]);
                hist_cols.push(Vec::new());
            }
        }
    }
    run.write("stats.csv", stats.as_str())?;

    let mut header = vec!["bin_start".to_string()];
    header.extend((1..=r_max).map(|r| format!("count_r{r}")));
    header.push("count_oneshot".into());
    let mut hist = Csv::new(&header);
    let bins = hist_cols.iter().map(Vec::len).max().unwrap_or(0);
    for b in 0..bins {
        let mut row = vec![num(b as f64 * bin_width)];
        row.extend(
            hist_cols
                .iter()
                .map(|c| c.get(b).copied().unwrap_or(0).to_string()),
        );
        hist.row(&row);
    }
    run.write("histogram.csv", hist.as_str())?;

    let mut header = vec!["deadline".to_string()];
    header.extend((1..=r_max).map(|r| format!("rate_r{r}")));
    header.push("rate_oneshot".into());
    let mut success = Csv::new(&header);
    for point in success_curve(&cfg, &sweep)? {
        let mut row = vec![num(point.deadline)];
        row.extend(point.layered.into_iter().map(num));
        row.push(num(point.one_shot));
        success.row(&row);
    }
    run.write("success.csv", success.as_str())?;

    let mut lb = Csv::new(&["r", "lb", "kingman"]);
    for r in 1..=r_max {
        lb.row(&[
            r.to_string(),
            num(layered_lb(&cfg, r)?),
            num(layered_lb_with(&cfg, r, 1.0)?),
        ]);
    }
    run.write("lb.csv", lb.as_str())?;
    run.finish()
}

fn parent_dir(path: &Path) -> &Path {
    path.parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."))
}

fn file_name(path: &Path) -> CliResult<String> {
    Ok(path
        .file_name()
        .ok_or("output path has no file name")?
        .to_string_lossy()
        .into_owned())
}

#[allow(clippy::too_many_arguments)]
fn train(
    images: &Path,
    labels: &Path,
    epochs: usize,
    batch: usize,
    lr: f64,
    hidden: &str,
    seed: Option<u64>,
    out: &Path,
) -> CliResult<()> {
    let data = load_idx(images, labels)?;
    let hidden = hidden
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| format!("--hidden: bad width `{t}`"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let cfg = TrainConfig {
        hidden,
        epochs,
        batch,
        lr,
        seed: resolve_seed(seed, 0)?,
    };
    let trained = train_mlp(&data, &cfg)?;

    let mut run = RunOutput::new(parent_dir(out), "train", Some(cfg.seed))?;
    let config: BTreeMap<&str, String> = [
        ("images", images.display().to_string()),
        ("labels", labels.display().to_string()),
        ("epochs", epochs.to_string()),
        ("batch", batch.to_string()),
        ("lr", lr.to_string()),
        ("hidden", format!("{:?}", cfg.hidden)),
        ("samples", data.len().to_string()),
    ]
    .into();
    for (k, v) in config {
        run.set(k, v);
    }
    run.write(&file_name(out)?, &write_nnw(&trained.network))?;
    let mut loss = Csv::new(&["epoch", "loss"]);
    for (e, l) in trained.epoch_losses.iter().enumerate() {
        loss.row(&[(e + 1).to_string(), num(*l)]);
    }
    run.write("loss.csv", loss.as_str())?;
    run.finish()
}

fn adaptive(
    model: &Path,
    images: &Path,
    labels: &Path,
    zone: &str,
    r: usize,
    hmin: i32,
    out: &Path,
) -> CliResult<()> {
    let (low, high) = zone
        .split_once(',')
        .and_then(|(a, b)| Some((a.trim().parse::<f64>().ok()?, b.trim().parse::<f64>().ok()?)))
        .ok_or_else(|| format!("--zone expects LOW,HIGH, got `{zone}`"))?;
    let policy = GrayZonePolicy::new(low, high)?;
    let net = load_model(model)?;
    let data = load_idx(images, labels)?;
    let layered = build_model(&net, r, hmin)?;
    let eval = evaluate(&layered, &data, &policy)?;
    let metrics = eval.metrics(&policy)?;

    let mut run = RunOutput::new(parent_dir(out), "adaptive", None)?;
    run.set("model", model.display());
    run.set("images", images.display());
    run.set("labels", labels.display());
    run.set("zone", format!("{low},{high}"));
    run.set("r", r);
    run.set("hmin", hmin);
    run.set("hmax_measured", measure_h_max(&net, &data)?);
    for (l, p) in layered.weight_partitioning().iter().enumerate() {
        run.set(&format!("pw_{l}"), p);
    }
    run.set("px", layered.input_partitioning());

    let mut header = vec![
        "sample".to_string(),
        "label".into(),
        "resolutions_used".into(),
        "final_output".into(),
        "prediction".into(),
    ];
    header.extend((1..=r).map(|k| format!("out_r{k}")));
    let mut traces = Csv::new(&header);
    for (i, t) in eval.traces.iter().enumerate() {
        let mut row = vec![
            i.to_string(),
            eval.labels[i].to_string(),
            t.resolutions_used.to_string(),
            num(t.final_output),
            t.prediction.to_string(),
        ];
        row.extend(eval.paths[i].iter().map(|&v| num(v)));
        traces.row(&row);
    }
    run.write(&file_name(out)?, traces.as_str())?;

    let mut m = Csv::new(&["mode", "resolution", "accuracy", "auc", "demand"]);
    for (k, s) in metrics.per_resolution.iter().enumerate() {
        m.row(&[
            "layered".into(),
            (k + 1).to_string(),
            num(s.accuracy),
            num(s.auc),
            num(metrics.demand.ratios[k]),
        ]);
    }
    for (name, s) in [
        ("adaptive", metrics.adaptive),
        ("one_shot", metrics.one_shot),
        ("quantized", metrics.quantized),
    ] {
        m.row(&[
            name.into(),
            String::new(),
            num(s.accuracy),
            num(s.auc),
            String::new(),
        ]);
    }
    m.row(&[
        "unresolved".into(),
        String::new(),
        String::new(),
        String::new(),
        num(metrics.demand.unresolved),
    ]);
    run.write("metrics.csv", m.as_str())?;
    run.finish()
}
