use std::path::PathBuf;

use clap::{Args, Subcommand};
use kpplab::fronts::{build_supersolution, shoot_profile, supersolution_residual};
use kpplab::reaction::ReactionSpec;
use kpplab::{sphere, Reaction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::write_file;
use crate::Outcome;

#[derive(Args, Debug)]
pub struct ReactionArgs {
    /// logistic, logistic-m or scaled-logistic.
    #[arg(long, default_value = "logistic")]
    reaction: String,
    /// Exponent `m` or rate `r` for the parametrized reactions.
    #[arg(long)]
    param: Option<f64>,
}

impl ReactionArgs {
    pub fn build(&self) -> anyhow::Result<Reaction> {
        Ok(ReactionSpec::parse(&self.reaction, self.param)?.build()?)
    }
}

#[derive(Subcommand, Debug)]
pub enum FrontsCmd {
    /// Traveling front at speed `c`, written as CSV `z,phi,dphi`.
    Profile {
        #[command(flatten)]
        reaction: ReactionArgs,
        #[arg(long)]
        c: f64,
        #[arg(long, default_value_t = 0.005)]
        zstep: f64,
        #[arg(long, default_value = "profile.csv")]
        out: PathBuf,
    },
    /// Sum-of-fronts supersolution over an epsilon-net of directions.
    Supersolution {
        #[command(flatten)]
        reaction: ReactionArgs,
        /// Speed `c` with `(1 − ε)c` above the minimal speed.
        #[arg(long)]
        c: f64,
        #[arg(long, default_value_t = 0.1)]
        lambda: f64,
        #[arg(long, default_value_t = 10.0)]
        horizon: f64,
        #[arg(long, default_value_t = 0.2)]
        epsilon: f64,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Random space-time points for the residual check.
        #[arg(long, default_value_t = 1000)]
        points: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Where to write the parameters as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn run(cmd: FrontsCmd) -> anyhow::Result<Outcome> {
    match cmd {
        FrontsCmd::Profile { reaction, c, zstep, out } => {
            let f = reaction.build()?;
            let p = shoot_profile(&f, c, zstep)?;
            let mut buf = Vec::new();
            p.write_csv(&mut buf)?;
            write_file(&out, buf)?;
            let r = p.residual();
            println!("ode residual {:.3e}", r.ode);
            println!("finite-difference residual {:.3e}", r.finite_difference);
            eprintln!("{} nodes on [{}, {}] written to {}", p.len(), p.z_min(), p.z_max(), out.display());
        }
        FrontsCmd::Supersolution { reaction, c, lambda, horizon, epsilon, dim, points, seed, out } => {
            let f = reaction.build()?;
            let c_star = f.minimal_speed()?;
            let profile = shoot_profile(&f, c_star, 0.005)?;
            let v = build_supersolution(&profile, lambda, c, horizon, epsilon, dim)?;
            let origin = vec![0.0; dim];
            let at_origin = (0..=100).map(|k| v.value(horizon * k as f64 / 100.0, &origin)).fold(0.0, f64::max);
            let reach = (c * horizon) + v.shift();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let samples: Vec<(f64, Vec<f64>)> = (0..points)
                .map(|_| {
                    let t = rng.gen_range(0.0..=horizon);
                    let r = rng.gen_range(0.0..=reach);
                    (t, sphere::axpy(&origin, r, &sphere::random_unit(&mut rng, dim)))
                })
                .collect();
            let residual = supersolution_residual(&v, &f, &samples);
            println!("directions {}", v.directions().len());
            println!("shift {}", v.shift());
            println!("max v(t, 0) on [0, {horizon}] {at_origin:.6e} (lambda {lambda})");
            println!("min residual over {points} points {residual:.3e}");
            if let Some(path) = out {
                write_file(&path, serde_json::to_string_pretty(v.params())? + "\n")?;
            }
        }
    }
    Ok(Outcome::Success)
}
