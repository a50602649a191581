use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::verify::{run_verify, VerifyReport, CHECK_COLUMNS};
use super::{ExperimentConfig, Format, Kind};
use crate::analysis::{estimate_attraction, AttractionReport, Run};
use crate::error::{Error, Result};

pub const REPLICA_COLUMNS: &str =
    "replica,horizon,window,scope,detected,onset,label,max_kernel_value,gap_crossings,capped_steps";
pub const AGGREGATE_COLUMNS: &str =
    "horizon,window,scope,successes,trials,fraction,ci_low,ci_high,mean_onset";
pub const PROFILE_COLUMNS: &str = "n,ratio,running_inf";

/// What a run produced.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub files: Vec<PathBuf>,
    pub attraction: Option<AttractionReport>,
    pub verify: Option<VerifyReport>,
}

impl Artifacts {
    /// False only when a verify check failed.
    pub fn passed(&self) -> bool {
        self.verify.as_ref().is_none_or(|v| v.passed)
    }
}

#[derive(Serialize)]
struct JsonDocument<'a, T> {
    config: &'a ExperimentConfig,
    report: &'a T,
}

struct Sink {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Sink {
    fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.display().to_string(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_owned(),
            files: Vec::new(),
        })
    }

    fn write(
        &mut self,
        name: &str,
        body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    ) -> Result<()> {
        let path = self.dir.join(name);
        let io = |source| Error::Io {
            path: path.display().to_string(),
            source,
        };
        let mut out = BufWriter::new(File::create(&path).map_err(io)?);
        body(&mut out).map_err(io)?;
        out.flush().map_err(io)?;
        self.files.push(path);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, config: &ExperimentConfig, report: &T) -> Result<()> {
        self.write(name, |out| {
            serde_json::to_writer_pretty(&mut *out, &JsonDocument { config, report })?;
            writeln!(out)
        })
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_replicas(out: &mut impl Write, report: &AttractionReport, scopes: &[String]) -> std::io::Result<()> {
    writeln!(out, "{REPLICA_COLUMNS}")?;
    for o in &report.outcomes {
        for p in &o.probes {
            for (scope, d) in scopes.iter().zip(&p.detections) {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{}",
                    o.replica,
                    p.horizon,
                    p.window,
                    scope,
                    d.detected,
                    opt(d.onset),
                    d.label.as_deref().unwrap_or(""),
                    o.max_kernel_value,
                    opt(o.gap_crossings),
                    opt(o.capped_steps),
                )?;
            }
        }
    }
    Ok(())
}

fn write_aggregate(out: &mut impl Write, report: &AttractionReport) -> std::io::Result<()> {
    writeln!(out, "{AGGREGATE_COLUMNS}")?;
    for r in &report.rows {
        let p = &r.proportion;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.horizon,
            r.window,
            r.scope,
            p.successes,
            p.trials,
            p.fraction,
            p.ci_low,
            p.ci_high,
            opt(r.mean_onset),
        )?;
    }
    Ok(())
}

fn write_checks(out: &mut impl Write, report: &VerifyReport) -> std::io::Result<()> {
    writeln!(out, "{CHECK_COLUMNS}")?;
    for c in &report.checks {
        // names and details are free text; quote them
        writeln!(
            out,
            "\"{}\",{},{},{},\"{}\"",
            c.name.replace('"', "\"\""),
            c.passed,
            c.value,
            c.tolerance,
            c.detail.replace('"', "\"\""),
        )?;
    }
    Ok(())
}

/// Runs `config` on `workers` threads (all cores when `None`) and writes its
/// artifacts under `config.output.path`. Output bytes do not depend on the
/// worker count.
pub fn run_experiment(config: &ExperimentConfig, workers: Option<usize>) -> Result<Artifacts> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    pool.install(|| run_in_pool(config))
}

fn run_in_pool(config: &ExperimentConfig) -> Result<Artifacts> {
    let mut sink = Sink::new(&config.output.path)?;
    let format = config.output.format;
    if config.kind == Kind::Verify {
        let report = run_verify(&config.verify.clone().unwrap_or_default())?;
        match format {
            Format::Json => sink.json("verify.json", config, &report)?,
            Format::Csv => {
                sink.write("checks.csv", |out| write_checks(out, &report))?;
                if let Some(profile) = &report.ratio_profile {
                    sink.write("ratio_profile.csv", |out| {
                        writeln!(out, "{PROFILE_COLUMNS}")?;
                        for p in &profile.points {
                            writeln!(out, "{},{},{}", p.n, p.ratio, p.running_inf)?;
                        }
                        Ok(())
                    })?;
                }
            }
        }
        return Ok(Artifacts {
            files: sink.files,
            attraction: None,
            verify: Some(report),
        });
    }

    let experiment = config.experiment()?.expect("walk or urn config");
    let report = estimate_attraction(
        &experiment,
        config.replicas,
        &config.horizons(),
        &config.windows,
        config.base_seed,
    )?;
    tracing::info!(
        replicas = report.replicas,
        monotone = report.monotone,
        kernel_violations = report.kernel_violations,
        "experiment finished"
    );
    match format {
        Format::Json => sink.json("report.json", config, &report)?,
        Format::Csv => {
            let scopes = experiment.scopes();
            sink.write("replicas.csv", |out| write_replicas(out, &report, &scopes))?;
            sink.write("aggregate.csv", |out| write_aggregate(out, &report))?;
        }
    }
    if config.export_trajectory {
        match experiment.simulate(config.base_seed, 0, config.horizon)? {
            Run::Walk(t) => sink.write("trajectory.csv", |out| t.write_csv(out))?,
            Run::Urn(u) => sink.write("draws.csv", |out| u.write_csv(out))?,
        }
    }
    Ok(Artifacts {
        files: sink.files,
        attraction: Some(report),
        verify: None,
    })
}
