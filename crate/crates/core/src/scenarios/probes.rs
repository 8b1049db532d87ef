//! Probe kinds: what each one measures into the report and how it is judged.

use serde::{Deserialize, Serialize};

use super::{Scenario, ScenarioError, Status};
use crate::diagnostics::{
    estimate_e_from_run_with, extract_profile, hessian_sigma, level_set_radius, planarity_defect, CloudConfig, DefectSample,
    DiagnosticsError, DiagnosticsReport, SigmaSample,
};
use crate::fronts::{shoot_profile, FrontProfile};
use crate::geometry::{predict_e, SetDescriptor};
use crate::lattice::{Lattice, Window};
use crate::reaction::ReactionFn;
use crate::solver::{self, GridField, SolverConfig};
use crate::sphere;

/// Where a probe looks at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProbePoint {
    Fixed { x: Vec<f64> },
    /// `base + scale·ζ(t)·direction`, with `ζ(t)` the level-1/2 position of
    /// a one-dimensional companion run started from a half-line.
    Companion { base: Vec<f64>, direction: Vec<f64>, scale: f64 },
    /// First point from `anchor` along `direction` where `u` drops below `level`.
    Crossing { anchor: Vec<f64>, direction: Vec<f64>, level: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Probe {
    /// `sup|σ_k(D²u)|` over the moving front window decays: `value(late) ≤ ratio·value(early)`.
    #[serde(rename_all = "camelCase")]
    SigmaDecay { k: usize, early: f64, late: f64, ratio: f64, pad: f64 },
    /// Planarity defect does not decay: `late ≥ ratio·early` and `late ≥ minValue`.
    #[serde(rename_all = "camelCase")]
    DefectPersistent { at: ProbePoint, radius: f64, early: f64, late: f64, ratio: f64, min_value: f64 },
    /// Planarity defect decays: `late ≤ ratio·early`.
    #[serde(rename_all = "camelCase")]
    DefectDecay { at: ProbePoint, radius: f64, early: f64, late: f64, ratio: f64 },
    /// Local front normal within `maxAngleDeg` of `target`.
    #[serde(rename_all = "camelCase")]
    Direction { at: ProbePoint, radius: f64, time: f64, target: Vec<f64>, max_angle_deg: f64 },
    /// The line profile along `direction` matches a shifted minimal-speed front.
    #[serde(rename_all = "camelCase")]
    ProfileMatch { at: ProbePoint, direction: Vec<f64>, half_length: f64, time: f64, max_distance: f64 },
    /// `min u ≥ innerMin` on `{dist(x, U_δ) ≤ innerFactor·c*·t}` and
    /// `max u ≤ outerMax` on `{dist(x, U) ≥ outerFactor·c*·t}`, within the ROI.
    #[serde(rename_all = "camelCase")]
    UniformSpreading { time: f64, delta: f64, inner_factor: f64, outer_factor: f64, inner_min: f64, outer_max: f64 },
    /// Direction cloud from snapshots at `t ≥ fromTime` and the geometric
    /// prediction at distance `predictRadius` both stay within `maxAngleDeg` of `target`.
    #[serde(rename_all = "camelCase")]
    DirectionCloud { from_time: f64, threshold: f64, window: Window, predict_radius: f64, target: Vec<f64>, max_angle_deg: f64 },
    /// `sup |∂_a u|` over the ROI for `a` in `axes` decays: `late ≤ ratio·early`.
    #[serde(rename_all = "camelCase")]
    GradientDecay { axes: Vec<usize>, early: f64, late: f64, ratio: f64 },
    /// `sup |u − u_companion|` over the ROI at `time` stays below `maxDiff`.
    #[serde(rename_all = "camelCase")]
    CompanionAgreement { companion: SetDescriptor, time: f64, max_diff: f64 },
    /// Reflection across the grid's mid-plane normal to `axis` maps `u(time)`
    /// to itself within `maxDiff`.
    #[serde(rename_all = "camelCase")]
    Symmetry { axis: usize, time: f64, max_diff: f64 },
}

impl Probe {
    /// Snapshot times the probe reads.
    pub fn times(&self) -> Vec<f64> {
        match self {
            Probe::SigmaDecay { early, late, .. }
            | Probe::DefectPersistent { early, late, .. }
            | Probe::DefectDecay { early, late, .. }
            | Probe::GradientDecay { early, late, .. } => vec![*early, *late],
            Probe::Direction { time, .. }
            | Probe::ProfileMatch { time, .. }
            | Probe::UniformSpreading { time, .. }
            | Probe::CompanionAgreement { time, .. }
            | Probe::Symmetry { time, .. } => vec![*time],
            Probe::DirectionCloud { from_time, .. } => vec![*from_time],
        }
    }

    pub(super) fn measure(&self, name: &str, ctx: &mut Context<'_>, report: &mut DiagnosticsReport) -> Result<(), ScenarioError> {
        match self {
            Probe::SigmaDecay { k, early, late, pad, .. } => {
                for &t in &[*early, *late] {
                    let field = ctx.snapshot(t)?;
                    let window = front_window(field, *pad)?;
                    let r = hessian_sigma(field, *k, &window)?;
                    report.measure(key(name, "sigma", t), r.sup_abs);
                    report.push_sigma(*k, SigmaSample { t, value: r.sup_abs, argmax: r.argmax });
                }
            }
            Probe::DefectPersistent { at, radius, early, late, .. } | Probe::DefectDecay { at, radius, early, late, .. } => {
                for &t in &[*early, *late] {
                    let x = ctx.locate(at, t)?;
                    let d = planarity_defect(ctx.snapshot(t)?, &x, *radius)?;
                    report.measure(key(name, "defect", t), d.defect);
                    report.planarity_defects.push(DefectSample { t, point: x, defect: d.defect, label: Some(name.to_string()) });
                }
            }
            Probe::Direction { at, radius, time, target, .. } => {
                let x = ctx.locate(at, *time)?;
                let d = planarity_defect(ctx.snapshot(*time)?, &x, *radius)?;
                report.measure(key(name, "angleDeg", *time), sphere::angle(&d.direction, target).to_degrees());
                report.measure(key(name, "defect", *time), d.defect);
            }
            Probe::ProfileMatch { at, direction, half_length, time, .. } => {
                let x = ctx.locate(at, *time)?;
                let sampled = extract_profile(ctx.snapshot(*time)?, &x, direction, *half_length)?;
                let cmp = sampled.compare(ctx.front()?);
                report.measure(key(name, "distance", *time), cmp.distance);
                report.measure(key(name, "oscillation", *time), cmp.oscillation);
            }
            Probe::UniformSpreading { time, delta, inner_factor, outer_factor, .. } => {
                let (inner, outer) = ctx.spreading(*time, *delta, *inner_factor, *outer_factor)?;
                if let Some(v) = inner {
                    report.measure(key(name, "innerMin", *time), v);
                }
                if let Some(v) = outer {
                    report.measure(key(name, "outerMax", *time), v);
                }
            }
            Probe::DirectionCloud { from_time, threshold, window, predict_radius, target, .. } => {
                let snaps: Vec<GridField<f64>> = ctx.snapshots.iter().filter(|s| s.time() >= from_time - 1e-9).cloned().collect();
                let cfg = CloudConfig { gradient_threshold: *threshold, window: Some(window.clone()), ..CloudConfig::default() };
                let cloud = estimate_e_from_run_with(&snaps, &cfg)?;
                let predicted = predict_e(&ctx.scenario.descriptor, *predict_radius, 512);
                report.measure(format!("{name}.cloudMaxAngleDeg"), cloud.max_angle_from(target));
                report.measure(format!("{name}.cloudSize"), cloud.len() as f64);
                report.measure(format!("{name}.predictedMaxAngleDeg"), predicted.max_angle_from(target));
                report.direction_cloud = Some(cloud);
            }
            Probe::GradientDecay { axes, early, late, .. } => {
                for &t in &[*early, *late] {
                    let g = sup_partial(ctx.snapshot(t)?, axes, &ctx.scenario.roi);
                    report.measure(key(name, "sup", t), g);
                }
            }
            Probe::CompanionAgreement { companion, time, .. } => {
                let lattice = ctx.snapshots[0].lattice().clone();
                let v0: GridField<f64> = solver::rasterize(companion, &lattice);
                let cfg = SolverConfig { horizon: *time, ..ctx.cfg.clone() };
                let v = solver::run(&v0, ctx.f, &cfg, &mut |_| Ok(()))?;
                let u = ctx.snapshot(*time)?;
                let mut worst: f64 = 0.0;
                for i in 0..lattice.len() {
                    if ctx.scenario.roi.iter().any(|w| w.contains(&lattice.center(i))) {
                        worst = worst.max((u.values()[i] - v.values()[i]).abs());
                    }
                }
                report.measure(key(name, "maxDiff", *time), worst);
            }
            Probe::Symmetry { axis, time, .. } => {
                let u = ctx.snapshot(*time)?;
                if *axis >= u.lattice().dim() {
                    return Err(ScenarioError::Config(format!("symmetry axis {axis} out of range")));
                }
                let m = u.mirrored(*axis);
                let worst = u.values().iter().zip(m.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                report.measure(key(name, "maxDiff", *time), worst);
            }
        }
        Ok(())
    }

    /// Verdict from the report alone.
    pub(super) fn judge(&self, name: &str, report: &DiagnosticsReport) -> (Status, String) {
        let get = |q: &str, t: f64| report.measurements.get(&key(name, q, t)).copied();
        let missing = || (Status::Inconclusive, "measurement missing from the report".to_string());
        let verdict = |ok: bool, detail: String| (if ok { Status::Pass } else { Status::Fail }, detail);
        match self {
            Probe::SigmaDecay { early, late, ratio, .. } => match (get("sigma", *early), get("sigma", *late)) {
                (Some(a), Some(b)) => verdict(b <= ratio * a, format!("sup|σ| {a:.3e} at t={early} → {b:.3e} at t={late} (need ≤ {ratio}×)")),
                _ => missing(),
            },
            Probe::DefectPersistent { early, late, ratio, min_value, .. } => match (get("defect", *early), get("defect", *late)) {
                (Some(a), Some(b)) => verdict(
                    b >= ratio * a && b >= *min_value,
                    format!("defect {a:.4} at t={early} → {b:.4} at t={late} (need ≥ {ratio}× and ≥ {min_value})"),
                ),
                _ => missing(),
            },
            Probe::DefectDecay { early, late, ratio, .. } => match (get("defect", *early), get("defect", *late)) {
                (Some(a), Some(b)) => verdict(b <= ratio * a, format!("defect {a:.4} at t={early} → {b:.4} at t={late} (need ≤ {ratio}×)")),
                _ => missing(),
            },
            Probe::Direction { time, max_angle_deg, .. } => match get("angleDeg", *time) {
                Some(a) => verdict(a <= *max_angle_deg, format!("normal {a:.2}° from target at t={time} (need ≤ {max_angle_deg}°)")),
                None => missing(),
            },
            Probe::ProfileMatch { time, max_distance, .. } => match (get("distance", *time), get("oscillation", *time)) {
                (Some(d), Some(o)) => verdict(
                    d <= *max_distance && o >= 0.5,
                    format!("sup distance to shifted front {d:.4}, oscillation {o:.3} at t={time} (need ≤ {max_distance}, ≥ 0.5)"),
                ),
                _ => missing(),
            },
            Probe::UniformSpreading { time, inner_min, outer_max, .. } => match (get("innerMin", *time), get("outerMax", *time)) {
                (Some(a), Some(b)) => verdict(
                    a >= *inner_min && b <= *outer_max,
                    format!("inner min {a:.5}, outer max {b:.3e} at t={time} (need ≥ {inner_min}, ≤ {outer_max})"),
                ),
                _ => (Status::Inconclusive, "inner or outer region does not meet the region of interest".into()),
            },
            Probe::DirectionCloud { max_angle_deg, .. } => {
                let cloud = report.measurements.get(&format!("{name}.cloudMaxAngleDeg")).copied();
                let pred = report.measurements.get(&format!("{name}.predictedMaxAngleDeg")).copied();
                match (cloud, pred) {
                    (Some(c), Some(p)) => verdict(
                        c <= *max_angle_deg && p <= *max_angle_deg,
                        format!("cloud within {c:.2}°, prediction within {p:.2}° of target (need ≤ {max_angle_deg}°)"),
                    ),
                    _ => missing(),
                }
            }
            Probe::GradientDecay { early, late, ratio, .. } => match (get("sup", *early), get("sup", *late)) {
                (Some(a), Some(b)) => verdict(b <= ratio * a, format!("sup|∂u| {a:.4} at t={early} → {b:.4} at t={late} (need ≤ {ratio}×)")),
                _ => missing(),
            },
            Probe::CompanionAgreement { time, max_diff, .. } => match get("maxDiff", *time) {
                Some(d) => verdict(d <= *max_diff, format!("sup|u − companion| {d:.3e} at t={time} (need ≤ {max_diff:e})")),
                None => missing(),
            },
            Probe::Symmetry { axis, time, max_diff } => match get("maxDiff", *time) {
                Some(d) => verdict(d <= *max_diff, format!("sup|u − mirror_{axis} u| {d:.3e} at t={time} (need ≤ {max_diff:e})")),
                None => missing(),
            },
        }
    }
}

fn key(name: &str, quantity: &str, t: f64) -> String {
    format!("{name}.{quantity}@{t}")
}

/// Bounding box of `0.01 < u < 0.99`, padded and kept two cells inside the grid.
fn front_window(field: &GridField<f64>, pad: f64) -> Result<Window, ScenarioError> {
    let l = field.lattice();
    let n = l.dim();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for (i, &v) in field.values().iter().enumerate() {
        if v > 0.01 && v < 0.99 {
            let c = l.center(i);
            for a in 0..n {
                lo[a] = lo[a].min(c[a] - pad);
                hi[a] = hi[a].max(c[a] + pad);
            }
        }
    }
    if lo[0] > hi[0] {
        return Err(DiagnosticsError::EmptyLevel(0.5).into());
    }
    let b = l.bounds();
    for a in 0..n {
        let inset = 3.0 * l.spacing()[a];
        lo[a] = lo[a].max(b.lo[a] + inset);
        hi[a] = hi[a].min(b.hi[a] - inset);
    }
    Ok(Window::new(lo, hi))
}

/// `max_a sup |∂_a u|` (centered differences) over interior ROI cells.
fn sup_partial(field: &GridField<f64>, axes: &[usize], roi: &[Window]) -> f64 {
    let l = field.lattice();
    let strides = l.strides();
    let mut ix = vec![0usize; l.dim()];
    let mut worst: f64 = 0.0;
    for i in 0..l.len() {
        l.unravel(i, &mut ix);
        if !roi.iter().any(|w| w.contains(&l.center(i))) {
            continue;
        }
        for &a in axes {
            if ix[a] == 0 || ix[a] + 1 == l.dims()[a] {
                continue;
            }
            let v = field.values();
            let g = (v[i + strides[a]] - v[i - strides[a]]) / (2.0 * l.spacing()[a]);
            worst = worst.max(g.abs());
        }
    }
    worst
}

/// Shared lazily-built inputs of a scenario's probes.
pub(super) struct Context<'a> {
    pub scenario: &'a Scenario,
    pub f: &'a ReactionFn<f64>,
    pub cfg: &'a SolverConfig,
    pub snapshots: &'a [GridField<f64>],
    zeta: Option<Vec<(f64, f64)>>,
    front: Option<FrontProfile<f64>>,
}

impl<'a> Context<'a> {
    pub fn new(scenario: &'a Scenario, f: &'a ReactionFn<f64>, cfg: &'a SolverConfig, snapshots: &'a [GridField<f64>]) -> Self {
        Self { scenario, f, cfg, snapshots, zeta: None, front: None }
    }

    pub fn snapshot(&self, t: f64) -> Result<&'a GridField<f64>, ScenarioError> {
        self.snapshots
            .iter()
            .find(|s| (s.time() - t).abs() <= 1e-9 * (1.0 + t))
            .ok_or_else(|| ScenarioError::Config(format!("no snapshot at t={t}")))
    }

    fn front(&mut self) -> Result<&FrontProfile<f64>, ScenarioError> {
        if self.front.is_none() {
            let c = self.f.minimal_speed()?;
            self.front = Some(shoot_profile(self.f, c, 0.005)?);
        }
        Ok(self.front.as_ref().expect("front built above"))
    }

    /// `ζ(t)` from a one-dimensional run on `[-20, c*·T + 40]` with the same
    /// spacing, step and scheme, started from the indicator of `x ≤ 0`.
    fn zeta(&mut self, t: f64) -> Result<f64, ScenarioError> {
        if self.zeta.is_none() {
            let c = self.f.minimal_speed()?;
            let h = self.scenario.grid.h;
            let lattice = Lattice::from_bounds(&[-20.0], &[c * self.cfg.horizon + 40.0], h)?;
            let half_line = SetDescriptor::half_space(vec![1.0], 0.0)?;
            let v0: GridField<f64> = solver::rasterize(&half_line, &lattice);
            let cfg = SolverConfig { boundary: solver::Boundary::NeumannZero, ..self.cfg.clone() };
            let mut out = Vec::new();
            solver::run(&v0, self.f, &cfg, &mut |s: &GridField<f64>| {
                if s.time() > 0.0 {
                    let z = level_set_radius(s, 0.5, &half_line).map_err(|e| solver::SolverError::Sink(e.to_string()))?;
                    out.push((s.time(), z));
                }
                Ok(())
            })?;
            self.zeta = Some(out);
        }
        let table = self.zeta.as_ref().expect("companion run above");
        table
            .iter()
            .find(|(s, _)| (s - t).abs() <= 1e-9 * (1.0 + t))
            .map(|p| p.1)
            .ok_or_else(|| ScenarioError::Config(format!("no companion position at t={t}")))
    }

    pub fn locate(&mut self, at: &ProbePoint, t: f64) -> Result<Vec<f64>, ScenarioError> {
        match at {
            ProbePoint::Fixed { x } => Ok(x.clone()),
            ProbePoint::Companion { base, direction, scale } => {
                let z = self.zeta(t)?;
                Ok(sphere::axpy(base, scale * z, direction))
            }
            ProbePoint::Crossing { anchor, direction, level } => {
                let field = self.snapshot(t)?;
                let dir = sphere::normalized(direction).ok_or_else(|| ScenarioError::Config("zero crossing direction".into()))?;
                let step = 0.25 * field.lattice().min_spacing();
                let at = |s: f64| field.sample(&sphere::axpy(anchor, s, &dir));
                let mut s = 0.0;
                loop {
                    match at(s + step) {
                        None => return Err(DiagnosticsError::EmptyLevel(*level).into()),
                        Some(v) if v < *level => break,
                        Some(_) => s += step,
                    }
                }
                let (mut lo, mut hi) = (s, s + step);
                for _ in 0..50 {
                    let mid = 0.5 * (lo + hi);
                    if at(mid).is_some_and(|v| v >= *level) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Ok(sphere::axpy(anchor, 0.5 * (lo + hi), &dir))
            }
        }
    }

    /// Extremes of `u(t)` over the inner and outer spreading regions within the ROI.
    fn spreading(&self, t: f64, delta: f64, inner_factor: f64, outer_factor: f64) -> Result<(Option<f64>, Option<f64>), ScenarioError> {
        let field = self.snapshot(t)?;
        let l = field.lattice();
        let c = self.f.minimal_speed()?;
        let u = &self.scenario.descriptor;
        let core = u.erode(delta, Some(l))?;
        let (mut inner, mut outer): (Option<f64>, Option<f64>) = (None, None);
        for (i, &v) in field.values().iter().enumerate() {
            let x = l.center(i);
            if !self.scenario.roi.iter().any(|w| w.contains(&x)) {
                continue;
            }
            if core.dist(&x) <= inner_factor * c * t {
                inner = Some(inner.map_or(v, |m| m.min(v)));
            }
            if u.dist(&x) >= outer_factor * c * t {
                outer = Some(outer.map_or(v, |m| m.max(v)));
            }
        }
        Ok((inner, outer))
    }
}
