use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use hadq_core::analysis::experiments;
use hadq_core::analysis::ExperimentReport;
use hadq_core::dynamics::{evolve, Trajectory};
use hadq_core::model::io::{read_lines_csv, write_config_csv, write_field_csv, write_lines_csv};
use hadq_core::model::{io as model_io, Configuration, Geometry, PointField, RngStream};
use hadq_core::queueing::{
    build_coupled, collapse_classes, expand_classes, fifo_links, map_multiclass, queue_trajectory,
    split_departures_unused, tandem_departures, CoupledConfig, MultiLineConfig, MulticlassConfig,
};

use crate::spec::{Command, EvolveArgs, Format, Operation, OpsArgs, Process, ReportArgs, RunSpec, SampleArgs};

pub enum Outcome {
    Pass,
    Fail,
}

pub fn execute(spec: RunSpec) -> Result<Outcome> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(spec.jobs as usize)
        .build_global()
        .context("starting worker pool")?;
    let seed = spec.seed;
    match spec.command {
        Command::Sample(a) => sample(&a, seed).map(|_| Outcome::Pass),
        Command::Ops(a) => ops(&a).map(|_| Outcome::Pass),
        Command::Evolve(a) => run_evolve(&a, seed).map(|_| Outcome::Pass),
        Command::Burke(a) => experiment(&a.report, || experiments::burke(&a.params(), seed)),
        Command::Invariance(a) => experiment(&a.report, || experiments::invariance(&a.params(), seed)),
        Command::Convergence(a) => experiment(&a.report, || experiments::convergence(&a.params(), seed)),
        Command::MulticlassBurke(a) => experiment(&a.report, || experiments::multiclass_burke(&a.params(), seed)),
        Command::DualPoints(a) => experiment(&a.report, || experiments::dual_points(&a.params(), seed)),
        Command::Regeneration(a) => experiment(&a.report, || experiments::regeneration(&a.params(), seed)),
        Command::Coalescence(a) => experiment(&a.report, || experiments::coalescence(&a.params(), seed)),
        Command::Shock(a) => experiment(&a.report, || experiments::shock(&a.params(), seed)),
    }
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn experiment(out: &ReportArgs, run: impl FnOnce() -> hadq_core::Result<ExperimentReport>) -> Result<Outcome> {
    let start = Instant::now();
    let mut report = run()?;
    if out.timing {
        report.runtime_s = Some(start.elapsed().as_secs_f64());
    }
    let mut w = sink(out.output.as_deref())?;
    writeln!(w, "{}", report.to_json()?)?;
    w.flush()?;
    if let Some(path) = &out.samples_csv {
        let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        report.samples.write_csv(BufWriter::new(f))?;
    }
    for v in report.verdicts.iter().filter(|v| !v.pass) {
        eprintln!("verdict failed: {} (observed {}, threshold {})", v.criterion, v.observed, v.threshold);
    }
    Ok(if report.all_pass() { Outcome::Pass } else { Outcome::Fail })
}

fn sample(a: &SampleArgs, seed: u64) -> Result<()> {
    let g = a.geometry.geometry()?;
    let mut w = sink(a.output.as_deref())?;
    if let Some(horizon) = a.points {
        let field = PointField::sample(g, horizon, &mut RngStream::new(seed, 0).rng())?;
        match a.format {
            Format::Csv => write_field_csv(&field, &mut w)?,
            Format::Json => writeln!(w, "{}", model_io::field_to_json(&field)?)?,
        }
        w.flush()?;
        return Ok(());
    }
    let lines: Vec<Configuration> = if !a.rates.is_empty() {
        if a.rates.windows(2).any(|p| p[0] >= p[1]) {
            bail!("--rates must be strictly increasing");
        }
        a.rates
            .iter()
            .enumerate()
            .map(|(k, &r)| Configuration::sample_poisson(g, r, &mut RngStream::new(seed, k as u64).rng()))
            .collect::<hadq_core::Result<_>>()?
    } else if !a.counts.is_empty() {
        a.counts
            .iter()
            .enumerate()
            .map(|(k, &c)| Configuration::sample_count(g, c, &mut RngStream::new(seed, k as u64).rng()))
            .collect()
    } else {
        bail!("one of --counts, --rates or --points is required");
    };
    match a.format {
        Format::Csv => write_lines_csv(&lines, "line", &mut w)?,
        Format::Json => {
            let docs = lines.iter().map(model_io::config_to_json).collect::<hadq_core::Result<Vec<_>>>()?;
            writeln!(w, "[{}]", docs.join(","))?;
        }
    }
    w.flush()?;
    Ok(())
}

fn ops(a: &OpsArgs) -> Result<()> {
    let g = a.geometry.geometry()?;
    let mut text = String::new();
    io::stdin().read_to_string(&mut text).context("reading stdin")?;
    let lines = read_lines_csv(g, text.as_bytes(), None)?;
    let mut w = sink(None)?;
    let arrivals_services = |lines: &[Configuration]| -> Result<(Vec<Configuration>, Configuration)> {
        match lines.split_last() {
            Some((s, a)) if !a.is_empty() => Ok((a.to_vec(), s.clone())),
            _ => bail!("expected at least one arrival line followed by a service line"),
        }
    };
    match a.operation {
        Operation::Split => {
            let [arr, srv] = lines.as_slice() else { bail!("split expects exactly two lines (arrivals, services)") };
            let (d, u) = split_departures_unused(arr, srv)?;
            write_lines_csv(&[d, u], "line", &mut w)?;
        }
        Operation::Tandem => {
            let d = tandem_departures(&lines)?;
            write_config_csv(&d, &mut w)?;
        }
        Operation::Couple => {
            let eta = build_coupled(&MultiLineConfig::new(lines)?)?;
            write_lines_csv(eta.lines(), "line", &mut w)?;
        }
        Operation::Collapse => {
            let xi = collapse_classes(&CoupledConfig::new(lines)?)?;
            write_lines_csv(xi.classes(), "class", &mut w)?;
        }
        Operation::Expand => {
            let eta = expand_classes(&MulticlassConfig::new(lines)?)?;
            write_lines_csv(eta.lines(), "line", &mut w)?;
        }
        Operation::Multiclass => {
            let xi = map_multiclass(&MultiLineConfig::new(lines)?)?;
            write_lines_csv(xi.classes(), "class", &mut w)?;
        }
        Operation::Links => {
            let (arr, srv) = arrivals_services(&lines)?;
            fifo_links(&arr, &srv)?.to_csv(&mut w)?;
        }
        Operation::Queue => {
            let (arr, srv) = arrivals_services(&lines)?;
            queue_trajectory(&arr, &srv)?.write_csv(&mut w)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_trajectory<S: hadq_core::dynamics::HarrisState>(t: &Trajectory<S>, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut f = BufWriter::new(File::create(dir.join("trajectory.csv"))?);
    t.write_csv(&mut f)?;
    f.flush()?;
    let mut f = BufWriter::new(File::create(dir.join("duals.csv"))?);
    t.write_duals_csv(&mut f)?;
    f.flush()?;
    Ok(())
}

fn run_evolve(a: &EvolveArgs, seed: u64) -> Result<()> {
    if let Some(n) = a.lines {
        if n != a.counts.len() {
            bail!("--lines {n} does not match the {} values given to --counts", a.counts.len());
        }
    }
    let g: Geometry = a.geometry.geometry()?;
    let lines: Vec<Configuration> = a
        .counts
        .iter()
        .enumerate()
        .map(|(k, &c)| Configuration::sample_count(g, c, &mut RngStream::new(seed, k as u64 + 1).rng()))
        .collect();
    let omega = PointField::sample(g, a.time, &mut RngStream::new(seed, 0).rng())?;
    let times: Vec<f64> = if a.snapshots.is_empty() { vec![0.0, a.time] } else { a.snapshots.clone() };
    if let Some(&s) = times.iter().find(|&&s| s > a.time) {
        bail!("--snapshots value {s} exceeds --time {}", a.time);
    }
    let alpha = MultiLineConfig::new(lines)?;
    match a.process {
        Process::MultiLine => write_trajectory(&evolve(&alpha, &omega, &times)?, &a.output),
        Process::Coupled => write_trajectory(&evolve(&build_coupled(&alpha)?, &omega, &times)?, &a.output),
        Process::Multiclass => write_trajectory(&evolve(&map_multiclass(&alpha)?, &omega, &times)?, &a.output),
    }
}
