use std::path::{Path, PathBuf};

use anyhow::bail;
use clap::Subcommand;
use kpplab::scenarios::{self, RunOptions, Scenario, Status};
use kpplab::solver::kppg;

use super::write_file;
use crate::config;
use crate::manifest::{run_dir, Input, Recorder};
use crate::{Exec, Outcome};

#[derive(Subcommand, Debug)]
pub enum ScenarioCmd {
    /// Built-in scenario ids and their claims.
    List,
    /// Print a built-in scenario as JSON.
    Show { id: String },
    /// Run a scenario (a built-in id, `all`, or a path to a JSON file).
    Run {
        id: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Skip the doubled-domain contamination test.
        #[arg(long)]
        no_doubling: bool,
        /// Do not write KPPG snapshots.
        #[arg(long)]
        no_snapshots: bool,
    },
}

pub fn run(cmd: ScenarioCmd, exec: Exec) -> anyhow::Result<Outcome> {
    match cmd {
        ScenarioCmd::List => {
            for id in scenarios::catalog_ids() {
                let s = scenarios::builtin(id)?;
                println!("{id}\t{}", s.claim);
            }
            Ok(Outcome::Success)
        }
        ScenarioCmd::Show { id } => {
            println!("{}", scenarios::builtin(&id)?.to_json());
            Ok(Outcome::Success)
        }
        ScenarioCmd::Run { id, out, no_doubling, no_snapshots } => {
            let opts = RunOptions { doubling: no_doubling.then_some(false), parallel: exec.parallel };
            let targets: Vec<(Scenario, Input)> = if id == "all" {
                scenarios::catalog_ids().into_iter().map(builtin_input).collect::<anyhow::Result<_>>()?
            } else if id.ends_with(".json") {
                let path = Path::new(&id);
                let (s, raw): (Scenario, _) = config::load(path)?;
                vec![(s, Input::new(path.display().to_string(), raw))]
            } else {
                vec![builtin_input(&id)?]
            };
            let mut failed = false;
            let mut errors = 0;
            for (s, input) in targets {
                match run_one(&s, input, &out, &opts, no_snapshots) {
                    Ok(status) => failed |= status == Status::Fail,
                    Err(e) => {
                        eprintln!("error: {}: {e:#}", s.id);
                        errors += 1;
                    }
                }
            }
            if errors > 0 {
                bail!("{errors} scenario(s) did not complete");
            }
            Ok(if failed { Outcome::Fail } else { Outcome::Success })
        }
    }
}

fn builtin_input(id: &str) -> anyhow::Result<(Scenario, Input)> {
    let s = scenarios::builtin(id)?;
    let text = s.to_json();
    Ok((s, Input::new(format!("builtin:{id}"), text)))
}

fn run_one(s: &Scenario, input: Input, out: &Path, opts: &RunOptions, no_snapshots: bool) -> anyhow::Result<Status> {
    s.validate()?;
    let options = format!("doubling={:?} snapshots={}", opts.doubling, !no_snapshots);
    let inputs = vec![input, Input::new("options", options)];
    let dir = run_dir(out, &s.id)?;
    let recorder = Recorder::new(&dir, s.seed, inputs);
    let outcome = scenarios::run_scenario(s, opts)?;
    write_file(&dir.join("scenario.json"), s.to_json() + "\n")?;
    write_file(&dir.join("report.json"), outcome.report.to_json()? + "\n")?;
    write_file(&dir.join("verdicts.json"), serde_json::to_string_pretty(&outcome.verdicts)? + "\n")?;
    let summary = scenarios::summary(s, &outcome);
    write_file(&dir.join("summary.txt"), &summary)?;
    let mut defects = Vec::new();
    outcome.report.write_defects_csv(&mut defects)?;
    write_file(&dir.join("defects.csv"), defects)?;
    for &k in outcome.report.sigma_stats.keys() {
        let mut buf = Vec::new();
        outcome.report.write_sigma_csv(k, &mut buf)?;
        write_file(&dir.join(format!("sigma{k}.csv")), buf)?;
    }
    if !no_snapshots {
        let snap_dir = dir.join(super::simulate::SNAPSHOT_DIR);
        std::fs::create_dir_all(&snap_dir)?;
        for (k, u) in outcome.snapshots.iter().enumerate() {
            kppg::save_field(&snap_dir.join(super::simulate::snapshot_name(k)), u)?;
        }
    }
    recorder.finish()?;
    print!("{summary}");
    println!("  output: {}", dir.display());
    Ok(outcome.status)
}
