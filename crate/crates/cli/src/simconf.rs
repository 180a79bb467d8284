//! Flat `key=value` configuration for the simulator.

use std::collections::BTreeMap;

use layercomp_core::PartitioningVector;
use layercomp_sim::SimConfig;

use crate::output::CliResult;

pub const KEYS: &[&str] = &[
    "workers",
    "mu",
    "lambda",
    "tasks",
    "complexity",
    "pw",
    "px",
    "deadline",
    "jobs",
    "seed",
    "sweep",
    "redundancy",
    "scheduling",
    "service",
    "bin_width",
];

/// Built-in five-worker stream.
pub fn defaults() -> BTreeMap<String, String> {
    [
        ("workers", "5"),
        ("mu", "350.86,591.75,339.45,377.95,339.98"),
        ("lambda", "0.01"),
        ("tasks", "1000"),
        ("complexity", "50"),
        ("pw", "8,4,0"),
        ("px", "8,4,0"),
        ("deadline", "none"),
        ("jobs", "1000"),
        ("seed", "0"),
        ("sweep", "0,2.5,5,7.5,10,12.5,15,20,25,30,40,50,75,100"),
        ("redundancy", "0"),
        ("scheduling", "proportional"),
        ("service", "exponential"),
        ("bin_width", "1"),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect()
}

/// Applies `key=value` lines to `into`; `#` starts a comment.
pub fn apply_text(into: &mut BTreeMap<String, String>, text: &str, origin: &str) -> CliResult<()> {
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("{origin}:{}: expected key=value, got `{line}`", n + 1))?;
        apply(into, k, v).map_err(|e| format!("{origin}:{}: {e}", n + 1))?;
    }
    Ok(())
}

pub fn apply(into: &mut BTreeMap<String, String>, key: &str, value: &str) -> CliResult<()> {
    let key = key.trim();
    if !KEYS.contains(&key) {
        return Err(format!("unknown key `{key}` (known: {})", KEYS.join(", ")).into());
    }
    into.insert(key.into(), value.trim().into());
    Ok(())
}

fn parse<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> CliResult<T>
where
    T::Err: std::fmt::Display,
{
    let raw = &map[key];
    raw.parse()
        .map_err(|e| format!("{key}: cannot parse `{raw}`: {e}").into())
}

pub fn list(map: &BTreeMap<String, String>, key: &str) -> CliResult<Vec<f64>> {
    map[key]
        .split(',')
        .map(|t| {
            let t = t.trim();
            match t {
                "inf" | "none" => Ok(f64::INFINITY),
                _ => t
                    .parse::<f64>()
                    .map_err(|_| format!("{key}: bad number `{t}`").into()),
            }
        })
        .collect()
}

pub fn build(map: &BTreeMap<String, String>) -> CliResult<SimConfig> {
    let mu = list(map, "mu")?;
    let workers: usize = parse(map, "workers")?;
    if workers != mu.len() {
        return Err(format!("workers = {workers} but mu lists {} rates", mu.len()).into());
    }
    let mut cfg = SimConfig::new(
        mu,
        parse(map, "lambda")?,
        parse(map, "tasks")?,
        parse(map, "complexity")?,
        parse::<PartitioningVector>(map, "pw")?,
        parse::<PartitioningVector>(map, "px")?,
    );
    cfg.deadline = match map["deadline"].as_str() {
        "none" | "inf" => None,
        _ => Some(parse(map, "deadline")?),
    };
    cfg.num_jobs = parse(map, "jobs")?;
    cfg.seed = parse(map, "seed")?;
    cfg.redundancy = parse(map, "redundancy")?;
    cfg.scheduling = parse(map, "scheduling")?;
    cfg.service = parse(map, "service")?;
    cfg.validate()?;
    Ok(cfg)
}
