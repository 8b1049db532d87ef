use std::path::PathBuf;

use anyhow::bail;
use clap::{Args, Subcommand};
use kpplab::geometry::{hausdorff, opening, opening_profile, predict_e, OpeningConfig};
use kpplab::{Lattice, Window};

use super::{load_set, write_file, Coords};
use crate::Outcome;

#[derive(Subcommand, Debug)]
pub enum GeometryCmd {
    /// Opening function at a point, or its supremum over level sets of the distance.
    Opening {
        #[arg(long)]
        set: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        point: Option<Coords>,
        /// Comma-separated increasing radii; prints `R, sup O` per radius.
        #[arg(long)]
        radii: Option<Coords>,
        /// Seed directions for the level-set search.
        #[arg(long, default_value_t = 64)]
        directions: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Erosion `U_δ`, written as a descriptor.
    Erode {
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        delta: f64,
        #[command(flatten)]
        grid: GridArgs,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Hausdorff distance between two sets inside a window.
    Hausdorff {
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        other: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Direction set predicted from the level set `dist(x, U) = R`.
    PredictE {
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        radius: f64,
        #[arg(long, default_value_t = 512)]
        samples: usize,
    },
}

/// Optional lattice `[lo, hi]` with spacing `h`.
#[derive(Args, Debug)]
pub struct GridArgs {
    #[arg(long, allow_hyphen_values = true)]
    lo: Option<Coords>,
    #[arg(long, allow_hyphen_values = true)]
    hi: Option<Coords>,
    #[arg(long)]
    h: Option<f64>,
}

impl GridArgs {
    fn window(&self) -> anyhow::Result<Option<(Window, f64)>> {
        match (&self.lo, &self.hi, self.h) {
            (None, None, None) => Ok(None),
            (Some(lo), Some(hi), Some(h)) => Ok(Some((Window::new(lo.0.clone(), hi.0.clone()), h))),
            _ => bail!("--lo, --hi and --h go together"),
        }
    }
}

pub fn run(cmd: GeometryCmd) -> anyhow::Result<Outcome> {
    match cmd {
        GeometryCmd::Opening { set, point, radii, directions, seed } => {
            let u = load_set(&set)?;
            let cfg = OpeningConfig { seed, ..OpeningConfig::default() };
            match (point, radii) {
                (Some(x), None) => {
                    let est = opening(&u, &x.0, &cfg)?;
                    println!("{}", est.value);
                }
                (None, Some(r)) => {
                    let p = opening_profile(&u, &r.0, directions, &cfg)?;
                    println!("radius,sup_opening");
                    for e in &p.entries {
                        println!("{},{}", e.radius, e.sup);
                    }
                    eprintln!("nonincreasing within {}: {}", 2.0 * p.tolerance, p.monotone);
                }
                _ => bail!("give exactly one of --point and --radii"),
            }
        }
        GeometryCmd::Erode { set, delta, grid, out } => {
            let u = load_set(&set)?;
            let lattice = match grid.window()? {
                Some((w, h)) => Some(Lattice::from_bounds(&w.lo, &w.hi, h)?),
                None => None,
            };
            let eroded = u.erode(delta, lattice.as_ref())?;
            let text = serde_json::to_string_pretty(&eroded)? + "\n";
            match out {
                Some(path) => write_file(&path, text)?,
                None => print!("{text}"),
            }
        }
        GeometryCmd::Hausdorff { set, other, grid } => {
            let a = load_set(&set)?;
            let b = load_set(&other)?;
            let Some((w, h)) = grid.window()? else {
                bail!("hausdorff needs a window: --lo, --hi and --h");
            };
            let r = hausdorff(&a, &b, &w, h)?;
            println!("{}", r.value);
            eprintln!("sup_A dist(., B) = {}, sup_B dist(., A) = {}", r.a_to_b, r.b_to_a);
        }
        GeometryCmd::PredictE { set, radius, samples } => {
            let u = load_set(&set)?;
            let e = predict_e(&u, radius, samples);
            println!("{}", serde_json::to_string_pretty(&e)?);
            eprintln!("{} directions, {} clusters, coverage gap {:.2} deg", e.len(), e.clusters.len(), e.coverage_gap_deg());
        }
    }
    Ok(Outcome::Success)
}
