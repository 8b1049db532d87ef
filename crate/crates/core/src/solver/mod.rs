//! Finite-difference integration of `∂t u = Δu + f(u)` on rectangular
//! lattices in one to three dimensions.

mod field;
pub mod kppg;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use field::GridField;

use crate::geometry::SetDescriptor;
use crate::lattice::{Lattice, LatticeError};
use crate::reaction::ReactionFn;
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("time step {dt} violates the explicit stability limit {limit}")]
    Cfl { dt: f64, limit: f64 },
    #[error("time step {dt} exceeds the reaction substep limit {limit}")]
    ReactionStep { dt: f64, limit: f64 },
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("non-finite value at t={time}")]
    Divergence { time: f64 },
    #[error("values left [0, 1] at t={time}: min {min}, max {max}")]
    Range { time: f64, min: f64, max: f64 },
    #[error("snapshot sink failed: {0}")]
    Sink(String),
    #[error("run mismatch: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    #[default]
    ExplicitEuler,
    /// Explicit reaction followed by backward-Euler diffusion, split per axis.
    Imex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    /// Zero-flux faces (mirror ghost cells).
    #[default]
    NeumannZero,
    /// Boundary cells keep their initial values.
    DirichletFrozen,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SolverConfig {
    pub dt: f64,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default)]
    pub boundary: Boundary,
    pub snapshot_every: f64,
    pub horizon: f64,
    /// Split the update across threads. Results are bitwise identical to the
    /// sequential update; the flag only affects speed.
    #[serde(default)]
    pub parallel: bool,
}

impl SolverConfig {
    pub fn explicit(dt: f64, horizon: f64, snapshot_every: f64) -> Self {
        Self { dt, scheme: Scheme::ExplicitEuler, boundary: Boundary::NeumannZero, snapshot_every, horizon, parallel: false }
    }

    pub fn imex(dt: f64, horizon: f64, snapshot_every: f64) -> Self {
        Self { scheme: Scheme::Imex, ..Self::explicit(dt, horizon, snapshot_every) }
    }

    pub fn with_boundary(mut self, b: Boundary) -> Self {
        self.boundary = b;
        self
    }

    /// Largest stable explicit step, `h_min² / (2N)`.
    pub fn cfl_limit(lattice: &Lattice) -> f64 {
        let h = lattice.min_spacing();
        h * h / (2.0 * lattice.dim() as f64)
    }

    /// Largest explicit step that keeps the update monotone, so values stay
    /// in `[0, 1]`: the cell's own weight `1 − Σ 2dt/h_a² − dt·sup|f'|`
    /// must stay nonnegative. Slightly below [`cfl_limit`](Self::cfl_limit).
    pub fn explicit_limit<T: Real>(lattice: &Lattice, f: &ReactionFn<T>) -> f64 {
        let diffusion: f64 = lattice.spacing().iter().map(|h| 2.0 / (h * h)).sum();
        1.0 / (diffusion + f.max_slope().as_f64())
    }

    pub fn validate<T: Real>(&self, lattice: &Lattice, f: &ReactionFn<T>) -> Result<(), SolverError> {
        for (name, v) in [("dt", self.dt), ("snapshotEvery", self.snapshot_every), ("horizon", self.horizon)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(SolverError::Config(format!("{name} must be > 0, got {v}")));
            }
        }
        self.check_dt(self.dt, self.dt_limit(lattice, f))
    }

    /// Step-size limit for the configured scheme.
    fn dt_limit<T: Real>(&self, lattice: &Lattice, f: &ReactionFn<T>) -> f64 {
        match self.scheme {
            Scheme::ExplicitEuler => Self::explicit_limit(lattice, f),
            Scheme::Imex => 0.5 / f.max_slope().as_f64(),
        }
    }

    fn check_dt(&self, dt: f64, limit: f64) -> Result<(), SolverError> {
        if dt > limit * (1.0 + 1e-12) {
            return Err(match self.scheme {
                Scheme::ExplicitEuler => SolverError::Cfl { dt, limit },
                Scheme::Imex => SolverError::ReactionStep { dt, limit },
            });
        }
        Ok(())
    }
}

/// Reusable time stepper holding scratch buffers and implicit factors.
pub struct Stepper<'a, T: Real> {
    f: &'a ReactionFn<T>,
    cfg: SolverConfig,
    lattice: Lattice,
    scratch: Vec<T>,
    frozen: Vec<(usize, T)>,
    dt_limit: f64,
    factors: Option<(f64, Vec<Thomas<T>>)>,
}

/// Precomputed forward-elimination factors of one tridiagonal system.
struct Thomas<T> {
    off: T,
    cp: Vec<T>,
    inv_den: Vec<T>,
}

impl<T: Real> Thomas<T> {
    fn new(n: usize, r: T, boundary: Boundary) -> Self {
        let one = T::one();
        let mut diag = vec![one + r + r; n];
        let mut lower = vec![-r; n];
        let mut upper = vec![-r; n];
        if n == 1 {
            diag[0] = one;
            lower[0] = T::zero();
            upper[0] = T::zero();
        } else {
            match boundary {
                Boundary::NeumannZero => {
                    diag[0] = one + r;
                    diag[n - 1] = one + r;
                }
                Boundary::DirichletFrozen => {
                    diag[0] = one;
                    diag[n - 1] = one;
                    upper[0] = T::zero();
                    lower[n - 1] = T::zero();
                }
            }
            lower[0] = T::zero();
            upper[n - 1] = T::zero();
        }
        let mut cp = vec![T::zero(); n];
        let mut inv_den = vec![T::zero(); n];
        for i in 0..n {
            let den = if i == 0 { diag[0] } else { diag[i] - lower[i] * cp[i - 1] };
            inv_den[i] = one / den;
            cp[i] = upper[i] * inv_den[i];
        }
        Self { off: -r, cp, inv_den }
    }

    /// Lower coefficient of row `i`.
    #[inline]
    fn lower(&self, i: usize, n: usize, boundary: Boundary) -> T {
        if i == 0 || (boundary == Boundary::DirichletFrozen && i == n - 1) {
            T::zero()
        } else {
            self.off
        }
    }
}

impl<'a, T: Real> Stepper<'a, T> {
    pub fn new(initial: &GridField<T>, f: &'a ReactionFn<T>, cfg: &SolverConfig) -> Result<Self, SolverError> {
        cfg.validate(initial.lattice(), f)?;
        let lattice = initial.lattice().clone();
        let frozen = match cfg.boundary {
            Boundary::NeumannZero => vec![],
            Boundary::DirichletFrozen => boundary_cells(&lattice).into_iter().map(|i| (i, initial.values()[i])).collect(),
        };
        let dt_limit = cfg.dt_limit(&lattice, f);
        Ok(Self { f, cfg: cfg.clone(), scratch: vec![T::zero(); lattice.len()], lattice, frozen, dt_limit, factors: None })
    }

    /// Advances `u` by `dt` in place.
    pub fn advance(&mut self, u: &mut GridField<T>, dt: f64) -> Result<(), SolverError> {
        if !u.lattice().same_shape(&self.lattice) {
            return Err(SolverError::Mismatch("state lattice differs from stepper lattice".into()));
        }
        self.cfg.check_dt(dt, self.dt_limit)?;
        let (lo, hi, finite) = match self.cfg.scheme {
            Scheme::ExplicitEuler => {
                let r = explicit_update(&self.lattice, u.values(), &mut self.scratch, self.f, T::lit(dt), self.cfg.parallel);
                std::mem::swap(u.values_vec_mut(), &mut self.scratch);
                r
            }
            Scheme::Imex => {
                if self.factors.as_ref().map_or(true, |(d, _)| *d != dt) {
                    let b = self.cfg.boundary;
                    let fs = (0..self.lattice.dim())
                        .map(|a| {
                            let h = self.lattice.spacing()[a];
                            Thomas::new(self.lattice.dims()[a], T::lit(dt / (h * h)), b)
                        })
                        .collect();
                    self.factors = Some((dt, fs));
                }
                let (_, fs) = self.factors.as_ref().unwrap();
                imex_update(&self.lattice, u.values_mut(), &mut self.scratch, fs, self.f, T::lit(dt), self.cfg.boundary, self.cfg.parallel)
            }
        };
        for &(i, v) in &self.frozen {
            u.values_mut()[i] = v;
        }
        let t = u.time() + dt;
        u.set_time(t);
        if !finite {
            return Err(SolverError::Divergence { time: t });
        }
        let slack = T::slack(1e-9);
        let (lo, hi) = (lo.as_f64(), hi.as_f64());
        if lo < -slack || hi > 1.0 + slack {
            return Err(SolverError::Range { time: t, min: lo, max: hi });
        }
        Ok(())
    }
}

/// Linear indices of cells touching any lattice face.
pub fn boundary_cells(lattice: &Lattice) -> Vec<usize> {
    let mut ix = vec![0; lattice.dim()];
    (0..lattice.len())
        .filter(|&i| {
            lattice.unravel(i, &mut ix);
            ix.iter().zip(lattice.dims()).any(|(&k, &n)| k == 0 || k + 1 == n)
        })
        .collect()
}

/// One explicit Euler step into `dst`. Returns (min, max, all finite).
fn explicit_update<T: Real>(lattice: &Lattice, src: &[T], dst: &mut [T], f: &ReactionFn<T>, dt: T, parallel: bool) -> (T, T, bool) {
    let dims = lattice.dims();
    let dim = dims.len();
    let n_last = dims[dim - 1];
    let strides = lattice.strides();
    let inv_h2: Vec<T> = lattice.spacing().iter().map(|h| T::lit(1.0 / (h * h))).collect();
    let two = T::lit(2.0);

    let row = |r: usize, out: &mut [T]| -> (T, T, bool) {
        let base = r * n_last;
        // Neighbor row offsets along the non-contiguous axes (mirror at faces).
        let mut nb = [(0usize, 0usize); 2];
        let mut rem = r;
        for a in (0..dim - 1).rev() {
            let n = dims[a];
            let i = rem % n;
            rem /= n;
            let s = strides[a];
            let lo = if i == 0 { base } else { base - s };
            let hi = if i + 1 == n { base } else { base + s };
            nb[a] = (lo, hi);
        }
        let src_row = &src[base..base + n_last];
        // Laplacian, axis by axis in a fixed order so mirrored data stay mirrored.
        if dim > 1 {
            let (lo, hi) = nb[0];
            let w = inv_h2[0];
            for (j, o) in out.iter_mut().enumerate() {
                *o = (src[lo + j] + src[hi + j] - two * src_row[j]) * w;
            }
            for a in 1..dim - 1 {
                let (lo, hi) = nb[a];
                let w = inv_h2[a];
                for (j, o) in out.iter_mut().enumerate() {
                    *o += (src[lo + j] + src[hi + j] - two * src_row[j]) * w;
                }
            }
        } else {
            out.iter_mut().for_each(|o| *o = T::zero());
        }
        let il = inv_h2[dim - 1];
        if n_last == 1 {
            // Both ghosts equal the cell itself.
        } else {
            out[0] += (src_row[0] + src_row[1] - two * src_row[0]) * il;
            for j in 1..n_last - 1 {
                out[j] += (src_row[j - 1] + src_row[j + 1] - two * src_row[j]) * il;
            }
            let k = n_last - 1;
            out[k] += (src_row[k - 1] + src_row[k] - two * src_row[k]) * il;
        }
        f.euler_row(src_row, out, dt);
        let mut mn = T::infinity();
        let mut mx = T::neg_infinity();
        let mut finite = true;
        for &v in out.iter() {
            finite &= v.is_finite();
            mn = mn.min(v);
            mx = mx.max(v);
        }
        (mn, mx, finite)
    };
    let merge = |a: (T, T, bool), b: (T, T, bool)| (a.0.min(b.0), a.1.max(b.1), a.2 && b.2);
    let id = (T::infinity(), T::neg_infinity(), true);
    if parallel {
        dst.par_chunks_mut(n_last).enumerate().map(|(r, out)| row(r, out)).reduce(|| id, merge)
    } else {
        dst.chunks_mut(n_last).enumerate().map(|(r, out)| row(r, out)).fold(id, merge)
    }
}

/// Explicit reaction, then backward-Euler diffusion one axis at a time.
///
/// Each axis solves for the increment `δ` in `(I − dt·D) δ = dt·D u`, so
/// spatially constant states are reproduced exactly.
#[allow(clippy::too_many_arguments)]
fn imex_update<T: Real>(
    lattice: &Lattice,
    u: &mut [T],
    scratch: &mut [T],
    factors: &[Thomas<T>],
    f: &ReactionFn<T>,
    dt: T,
    boundary: Boundary,
    parallel: bool,
) -> (T, T, bool) {
    let react = |c: &mut [T]| {
        for v in c.iter_mut() {
            *v += dt * f.eval(*v);
        }
    };
    if parallel {
        u.par_chunks_mut(4096).for_each(react);
    } else {
        u.chunks_mut(4096).for_each(react);
    }
    let dims = lattice.dims();
    let strides = lattice.strides();
    let two = T::lit(2.0);
    for a in 0..dims.len() {
        let n = dims[a];
        let s = strides[a];
        let th = &factors[a];
        let r = -th.off;
        // Blocks of `n·s` contiguous values hold `s` interleaved lines.
        let solve = |(block, d): (&mut [T], &mut [T])| {
            for i in 0..n {
                let lo = if i == 0 { i } else { i - 1 };
                let hi = if i + 1 == n { i } else { i + 1 };
                let pinned = boundary == Boundary::DirichletFrozen && (i == 0 || i + 1 == n);
                for k in 0..s {
                    let c = block[i * s + k];
                    d[i * s + k] = if pinned {
                        T::zero()
                    } else {
                        r * (block[lo * s + k] + block[hi * s + k] - two * c)
                    };
                }
            }
            for i in 0..n {
                let low = th.lower(i, n, boundary);
                let inv = th.inv_den[i];
                let (prev, cur) = d.split_at_mut(i * s);
                let cur = &mut cur[..s];
                if i == 0 {
                    for v in cur.iter_mut() {
                        *v *= inv;
                    }
                } else {
                    let prev = &prev[(i - 1) * s..];
                    for (v, p) in cur.iter_mut().zip(prev) {
                        *v = (*v - low * *p) * inv;
                    }
                }
            }
            for i in (0..n.saturating_sub(1)).rev() {
                let c = th.cp[i];
                let (cur, next) = d.split_at_mut((i + 1) * s);
                let cur = &mut cur[i * s..];
                for (v, q) in cur.iter_mut().zip(&next[..s]) {
                    *v -= c * *q;
                }
            }
            for (v, dv) in block.iter_mut().zip(d.iter()) {
                *v += *dv;
            }
        };
        if parallel {
            u.par_chunks_mut(n * s).zip(scratch.par_chunks_mut(n * s)).for_each(solve);
        } else {
            u.chunks_mut(n * s).zip(scratch.chunks_mut(n * s)).for_each(solve);
        }
    }
    let mut mn = T::infinity();
    let mut mx = T::neg_infinity();
    let mut finite = true;
    for &v in u.iter() {
        finite &= v.is_finite();
        mn = mn.min(v);
        mx = mx.max(v);
    }
    (mn, mx, finite)
}

/// One time step of size `cfg.dt`.
pub fn step<T: Real>(state: &GridField<T>, f: &ReactionFn<T>, cfg: &SolverConfig) -> Result<GridField<T>, SolverError> {
    let mut s = Stepper::new(state, f, cfg)?;
    let mut out = state.clone();
    s.advance(&mut out, cfg.dt)?;
    Ok(out)
}

/// Consumer of snapshots emitted during [`run`].
pub type Sink<'s, T> = dyn FnMut(&GridField<T>) -> Result<(), SolverError> + 's;

/// Integrates from `u0` to `u0.time() + cfg.horizon`, emitting the initial
/// state and a snapshot every `cfg.snapshot_every` (and the final state).
pub fn run<T: Real>(u0: &GridField<T>, f: &ReactionFn<T>, cfg: &SolverConfig, sink: &mut Sink<'_, T>) -> Result<GridField<T>, SolverError> {
    let mut stepper = Stepper::new(u0, f, cfg)?;
    let mut u = u0.clone();
    let t0 = u0.time();
    let steps = ((cfg.horizon / cfg.dt) - 1e-9).ceil().max(1.0) as u64;
    sink(&u)?;
    let mut next_snap = 1u64;
    let snap_eps = 1e-9 * cfg.snapshot_every;
    for k in 1..=steps {
        let dt = if k == steps { cfg.horizon - (steps - 1) as f64 * cfg.dt } else { cfg.dt };
        stepper.advance(&mut u, dt)?;
        let elapsed = if k == steps { cfg.horizon } else { k as f64 * cfg.dt };
        u.set_time(t0 + elapsed);
        let mut emitted = false;
        while elapsed >= next_snap as f64 * cfg.snapshot_every - snap_eps {
            if !emitted {
                sink(&u)?;
                emitted = true;
            }
            next_snap += 1;
        }
        if k == steps && !emitted {
            sink(&u)?;
        }
    }
    Ok(u)
}

/// Runs and keeps every snapshot in memory.
pub fn run_collect<T: Real>(u0: &GridField<T>, f: &ReactionFn<T>, cfg: &SolverConfig) -> Result<Vec<GridField<T>>, SolverError> {
    let mut snaps = Vec::new();
    run(u0, f, cfg, &mut |s: &GridField<T>| {
        snaps.push(s.clone());
        Ok(())
    })?;
    Ok(snaps)
}

/// `min_t min_x (u_B − u_A)` over paired snapshots.
pub fn compare_runs<T: Real>(a: &[GridField<T>], b: &[GridField<T>]) -> Result<f64, SolverError> {
    if a.len() != b.len() {
        return Err(SolverError::Mismatch(format!("{} vs {} snapshots", a.len(), b.len())));
    }
    let mut worst = f64::INFINITY;
    for (sa, sb) in a.iter().zip(b) {
        if !sa.lattice().same_shape(sb.lattice()) {
            return Err(SolverError::Mismatch("grids differ".into()));
        }
        if (sa.time() - sb.time()).abs() > 1e-9 * (1.0 + sa.time().abs()) {
            return Err(SolverError::Mismatch(format!("times differ: {} vs {}", sa.time(), sb.time())));
        }
        for (x, y) in sa.values().iter().zip(sb.values()) {
            worst = worst.min((*y - *x).as_f64());
        }
    }
    Ok(worst)
}

/// Indicator of `U` sampled at cell centers, at time 0.
pub fn rasterize<T: Real>(u: &SetDescriptor, lattice: &Lattice) -> GridField<T> {
    GridField::from_fn(lattice.clone(), 0.0, |x| if u.contains(x) { T::one() } else { T::zero() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lattice2() -> Lattice {
        Lattice::from_bounds(&[-5.0, -5.0], &[5.0, 5.0], 0.1).unwrap()
    }

    #[test]
    fn equilibria_are_fixed_points() {
        let f = ReactionFn::<f64>::logistic();
        for scheme in [Scheme::ExplicitEuler, Scheme::Imex] {
            for c in [0.0, 1.0] {
                let u = GridField::constant(lattice2(), c);
                let cfg = SolverConfig { scheme, ..SolverConfig::explicit(1e-3, 1.0, 1.0) };
                let v = step(&u, &f, &cfg).unwrap();
                assert!(v.values().iter().all(|&x| x == c));
            }
        }
    }

    #[test]
    fn constant_state_follows_the_ode() {
        let f = ReactionFn::<f64>::logistic();
        let u = GridField::constant(lattice2(), 0.5);
        let v = step(&u, &f, &SolverConfig::explicit(1e-3, 1.0, 1.0)).unwrap();
        for &x in v.values() {
            assert!((x - (0.5 + 1e-3 * 0.25)).abs() < 1e-15);
        }
        assert!((v.time() - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn rejects_unstable_steps() {
        let f = ReactionFn::<f64>::logistic();
        let u = GridField::constant(lattice2(), 0.0);
        assert!(matches!(step(&u, &f, &SolverConfig::explicit(0.01, 1.0, 1.0)), Err(SolverError::Cfl { .. })));
        assert!(matches!(step(&u, &f, &SolverConfig::imex(0.6, 1.0, 1.0)), Err(SolverError::ReactionStep { .. })));
        assert!(step(&u, &f, &SolverConfig::imex(0.4, 1.0, 1.0)).is_ok());
    }

    #[test]
    fn thomas_solves_neumann_system() {
        // (I − r D) x = d with mirror ghosts; verify the residual directly.
        let n = 7;
        let r = 0.8;
        let th = Thomas::<f64>::new(n, r, Boundary::NeumannZero);
        let lattice = Lattice::new(vec![n], vec![1.0], vec![0.0]).unwrap();
        let d: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
        let mut x = d.clone();
        let mut scratch = vec![0.0; n];
        let f = ReactionFn::<f64>::custom("zero", 1.0, |_| 0.0);
        imex_update(&lattice, &mut x, &mut scratch, &[th], &f, 0.0, Boundary::NeumannZero, false);
        for i in 0..n {
            let l = if i == 0 { x[0] } else { x[i - 1] };
            let rr = if i + 1 == n { x[n - 1] } else { x[i + 1] };
            let res = x[i] - r * (l + rr - 2.0 * x[i]) - d[i];
            assert!(res.abs() < 1e-13, "row {i}: {res}");
        }
    }

    #[test]
    fn run_emits_initial_periodic_and_final_snapshots() {
        let f = ReactionFn::<f64>::logistic();
        let l = Lattice::from_bounds(&[0.0], &[10.0], 0.1).unwrap();
        let u0 = rasterize::<f64>(&SetDescriptor::ball(vec![5.0], 1.0), &l);
        let snaps = run_collect(&u0, &f, &SolverConfig::explicit(2e-3, 1.0, 0.25)).unwrap();
        let times: Vec<f64> = snaps.iter().map(|s| s.time()).collect();
        assert_eq!(times.len(), 5);
        for (t, e) in times.iter().zip([0.0, 0.25, 0.5, 0.75, 1.0]) {
            assert!((t - e).abs() < 1e-12, "{times:?}");
        }
    }

    #[test]
    fn frozen_boundary_keeps_initial_values() {
        let f = ReactionFn::<f64>::logistic();
        let l = Lattice::from_bounds(&[0.0, 0.0], &[3.0, 3.0], 0.25).unwrap();
        let u0 = GridField::from_fn(l.clone(), 0.0, |x| if x[1] < 1.0 { 1.0 } else { 0.0 });
        for scheme in [Scheme::ExplicitEuler, Scheme::Imex] {
            let cfg = SolverConfig { scheme, ..SolverConfig::explicit(0.01, 1.0, 1.0) }.with_boundary(Boundary::DirichletFrozen);
            let end = run_collect(&u0, &f, &cfg).unwrap().pop().unwrap();
            for i in boundary_cells(&l) {
                assert_eq!(end.values()[i], u0.values()[i]);
            }
        }
    }

    #[test]
    fn parallel_update_is_bitwise_sequential() {
        let f = ReactionFn::<f64>::logistic();
        let u0 = rasterize::<f64>(&SetDescriptor::ball(vec![0.3, -0.2], 2.0), &lattice2());
        for scheme in [Scheme::ExplicitEuler, Scheme::Imex] {
            let mut cfg = SolverConfig { scheme, ..SolverConfig::explicit(2e-3, 0.2, 0.2) };
            let a = run_collect(&u0, &f, &cfg).unwrap();
            cfg.parallel = true;
            let b = run_collect(&u0, &f, &cfg).unwrap();
            assert_eq!(a, b);
        }
    }
}
