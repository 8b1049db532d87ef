use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Subcommand};
use kpplab::diagnostics::{extract_profile, hessian_sigma, level_set_radius, planarity_defect};
use kpplab::fronts::{fit_front_position, shoot_profile};
use kpplab::solver::kppg::{self, Snapshot};
use kpplab::{sphere, Field, Window};

use super::fronts::ReactionArgs;
use super::{load_set, Coords};
use crate::Outcome;

#[derive(Args, Debug)]
pub struct DiagnoseArgs {
    #[command(subcommand)]
    cmd: DiagnoseCmd,
}

#[derive(Subcommand, Debug)]
enum DiagnoseCmd {
    /// `sup |σ_k(D²u)|` over a window, per snapshot.
    Sigma {
        #[arg(long)]
        snapshots: PathBuf,
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Window corners; the lattice minus a three-cell margin by default.
        #[arg(long, allow_hyphen_values = true)]
        lo: Option<Coords>,
        #[arg(long, allow_hyphen_values = true)]
        hi: Option<Coords>,
    },
    /// Planarity defect on a ball, per snapshot.
    Planarity {
        #[arg(long)]
        snapshots: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        point: Coords,
        #[arg(long, default_value_t = 5.0)]
        radius: f64,
    },
    /// Invasion reach `max dist(x, U)` over `{u ≥ level}` and its fit `a t + b ln t + d`.
    Speed {
        #[arg(long)]
        snapshots: PathBuf,
        /// Descriptor of the initial set `U`.
        #[arg(long)]
        anchor: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        level: f64,
        #[command(flatten)]
        reaction: ReactionArgs,
    },
    /// Sup distance between `u` along a line and the best shift of a front profile.
    Profile {
        #[arg(long)]
        snapshots: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        point: Coords,
        #[arg(long, allow_hyphen_values = true)]
        direction: Coords,
        #[arg(long, default_value_t = 15.0)]
        half_length: f64,
        /// Profile speed; the minimal speed by default.
        #[arg(long)]
        c: Option<f64>,
        #[command(flatten)]
        reaction: ReactionArgs,
    },
}

/// Fields in `dir` (or `dir/snapshots`), in time order. Mask snapshots are skipped.
pub fn load_snapshots(dir: &Path) -> anyhow::Result<Vec<Field>> {
    let nested = dir.join(super::simulate::SNAPSHOT_DIR);
    let dir = if nested.is_dir() { nested } else { dir.to_path_buf() };
    let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "kppg"))
        .collect();
    files.sort();
    let mut fields = Vec::new();
    for p in files {
        if let Snapshot::Field(f) = kppg::load(&p).with_context(|| format!("reading {}", p.display()))? {
            fields.push(f);
        }
    }
    if fields.is_empty() {
        bail!("no field snapshots in {}", dir.display());
    }
    fields.sort_by(|a, b| a.time().total_cmp(&b.time()));
    Ok(fields)
}

pub fn run(args: DiagnoseArgs) -> anyhow::Result<Outcome> {
    match args.cmd {
        DiagnoseCmd::Sigma { snapshots, k, lo, hi } => {
            let fields = load_snapshots(&snapshots)?;
            let l = fields[0].lattice();
            let window = match (lo, hi) {
                (Some(lo), Some(hi)) => Window::new(lo.0, hi.0),
                (None, None) => {
                    let b = l.bounds();
                    let m: Vec<f64> = l.spacing().iter().map(|h| 3.0 * h).collect();
                    Window::new(b.lo.iter().zip(&m).map(|(x, m)| x + m).collect(), b.hi.iter().zip(&m).map(|(x, m)| x - m).collect())
                }
                _ => bail!("--lo and --hi go together"),
            };
            println!("time,k,sup_abs,argmax");
            for f in fields.iter().filter(|f| f.time() >= 1.0) {
                let s = hessian_sigma(f, k, &window)?;
                println!("{},{},{},{}", s.time, s.k, s.sup_abs, join(&s.argmax));
            }
        }
        DiagnoseCmd::Planarity { snapshots, point, radius } => {
            println!("time,defect,oscillation,anisotropy,direction");
            for f in load_snapshots(&snapshots)? {
                let p = planarity_defect(&f, &point.0, radius)?;
                println!("{},{},{},{},{}", f.time(), p.defect, p.oscillation, p.anisotropy, join(&p.direction));
            }
        }
        DiagnoseCmd::Speed { snapshots, anchor, level, reaction } => {
            let u = load_set(&anchor)?;
            let c_star = reaction.build()?.minimal_speed()?;
            let mut samples = Vec::new();
            println!("time,reach");
            for f in load_snapshots(&snapshots)? {
                let r = level_set_radius(&f, level, &u)?;
                println!("{},{}", f.time(), r);
                if f.time() > 0.0 {
                    samples.push((f.time(), r));
                }
            }
            let fit = fit_front_position(&samples, c_star)?;
            eprintln!(
                "fit: speed {:.5} (minimal {c_star:.5}, relative error {:.2e}), log coefficient {:.4}, shift {:.4}, rms {:.2e}",
                fit.speed, fit.relative_speed_error, fit.log_coef, fit.shift, fit.rms
            );
        }
        DiagnoseCmd::Profile { snapshots, point, direction, half_length, c, reaction } => {
            let f = reaction.build()?;
            let c = match c {
                Some(c) => c,
                None => f.minimal_speed()?,
            };
            let phi = shoot_profile(&f, c, 0.005)?;
            let Some(e) = sphere::normalized(&direction.0) else {
                bail!("--direction must be nonzero");
            };
            println!("time,distance,shift,oscillation,is_front");
            for u in load_snapshots(&snapshots)? {
                let cmp = extract_profile(&u, &point.0, &e, half_length)?.compare(&phi);
                println!("{},{},{},{},{}", u.time(), cmp.distance, cmp.shift, cmp.oscillation, cmp.is_front);
            }
        }
    }
    Ok(Outcome::Success)
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}
