use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context};
use kpplab::solver::{self, kppg, GridField, SolverError};

use crate::config::{self, SimulateConfig};
use crate::manifest::{Input, Recorder, MANIFEST_FILE};
use crate::{Exec, Outcome};

pub const SNAPSHOT_DIR: &str = "snapshots";

pub fn snapshot_name(k: usize) -> String {
    format!("snapshot-{k:04}.kppg")
}

pub fn run(config_path: &Path, out: &Path, exec: Exec) -> anyhow::Result<Outcome> {
    let (cfg, raw): (SimulateConfig, _) = config::load(config_path)?;
    let descriptor = cfg.descriptor.clone().normalized()?;
    descriptor.validate()?;
    let lattice = cfg.grid.lattice()?;
    if lattice.dim() != descriptor.dim() {
        bail!("grid is {}-dimensional but the set is {}-dimensional", lattice.dim(), descriptor.dim());
    }
    let f = cfg.reaction.build::<f64>()?;
    let solver_cfg = kpplab::solver::SolverConfig { parallel: exec.parallel, ..cfg.solver.clone() };
    solver_cfg.validate(&lattice, &f)?;

    if out.join(MANIFEST_FILE).exists() {
        bail!("{} already holds a run; choose a fresh output directory", out.display());
    }
    let snap_dir = out.join(SNAPSHOT_DIR);
    std::fs::create_dir_all(&snap_dir).with_context(|| format!("creating {}", snap_dir.display()))?;
    let recorder = Recorder::new(out, cfg.seed, vec![Input::new(config_path.display().to_string(), raw)]);

    let mask = descriptor.rasterize(&lattice);
    kppg::save_mask(&out.join("initial-set.kppg"), &mask, 0.0)?;
    let u0: GridField<f64> = solver::rasterize(&descriptor, &lattice);
    let mut index = String::from("index,time,file,min,max,mass\n");
    let mut k = 0usize;
    solver::run(&u0, &f, &solver_cfg, &mut |u: &GridField<f64>| {
        let name = snapshot_name(k);
        kppg::save_field(&snap_dir.join(&name), u)?;
        writeln!(index, "{k},{},{SNAPSHOT_DIR}/{name},{},{},{}", u.time(), u.min(), u.max(), u.integral()).map_err(|e| SolverError::Sink(e.to_string()))?;
        k += 1;
        Ok(())
    })?;
    super::write_file(&out.join("snapshots.csv"), index)?;
    super::write_file(&out.join("config.json"), serde_json::to_string_pretty(&cfg)? + "\n")?;
    let manifest = recorder.finish()?;
    println!("wrote {k} snapshots to {} (config {})", snap_dir.display(), &manifest.config_hash[..12]);
    Ok(Outcome::Success)
}
