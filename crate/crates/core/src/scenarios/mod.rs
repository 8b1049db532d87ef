//! Named experiment presets: a set `U`, a grid, a solver configuration and a
//! plan of diagnostic probes, each with a machine-checkable pass predicate.
//!
//! Every measurement lands in the [`DiagnosticsReport`]; verdicts are then
//! computed from the report alone, so a saved report can be re-judged.

mod budget;
mod probes;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use budget::{doubled_lattice, BudgetReport};
pub use probes::{Probe, ProbePoint};

use crate::diagnostics::{DiagnosticsError, DiagnosticsReport};
use crate::fronts::FrontError;
use crate::geometry::{GeometryError, SetDescriptor};
use crate::lattice::{Lattice, LatticeError, Window};
use crate::reaction::{ReactionError, ReactionSpec};
use crate::solver::{self, GridField, SolverConfig, SolverError};

/// Extra distance, beyond `c*·T`, required between the region of interest
/// and any boundary that misrepresents `U`.
pub const BUDGET_MARGIN: f64 = 20.0;
/// Largest ROI disagreement tolerated by the doubling test.
pub const DOUBLING_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("unknown scenario '{0}'")]
    Unknown(String),
    #[error("invalid scenario: {0}")]
    Config(String),
    #[error("boundary budget violated: {source_kind} at distance {distance:.3} from the region of interest, need {required:.3}")]
    Budget { distance: f64, required: f64, source_kind: String },
    #[error("doubling test failed: region of interest changed by {measured:.3e} (tolerance {tolerance:.0e})")]
    Contamination { measured: f64, tolerance: f64 },
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Front(#[from] FrontError),
    #[error(transparent)]
    Reaction(#[from] ReactionError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub h: f64,
}

impl GridSpec {
    pub fn lattice(&self) -> Result<Lattice, LatticeError> {
        Lattice::from_bounds(&self.lo, &self.hi, self.h)
    }
}

fn default_seed() -> u64 {
    42
}

fn yes() -> bool {
    true
}

/// One named probe of the plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanEntry {
    pub name: String,
    /// Measured and reported, but never counted toward the verdict.
    #[serde(default)]
    pub informational: bool,
    #[serde(flatten)]
    pub probe: Probe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Scenario {
    pub id: String,
    pub version: u32,
    /// Plain-language statement of what the run should show.
    pub claim: String,
    pub descriptor: SetDescriptor,
    #[serde(default)]
    pub reaction: ReactionSpec,
    pub grid: GridSpec,
    pub solver: SolverConfig,
    /// Region of interest: union of boxes where every probe looks.
    pub roi: Vec<Window>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Re-run on a doubled domain and compare the region of interest.
    #[serde(default = "yes")]
    pub doubling: bool,
    pub plan: Vec<PlanEntry>,
}

const CATALOG: &[(&str, &str)] = &[
    ("convex-2d", include_str!("../../../../scenarios/convex-2d.json")),
    ("vshape-2d", include_str!("../../../../scenarios/vshape-2d.json")),
    ("vgm-subgraph-2d", include_str!("../../../../scenarios/vgm-subgraph-2d.json")),
    ("lattice-balls-2d", include_str!("../../../../scenarios/lattice-balls-2d.json")),
    ("uniform-spreading", include_str!("../../../../scenarios/uniform-spreading.json")),
    ("directional-subgraph", include_str!("../../../../scenarios/directional-subgraph.json")),
];

/// Identifiers of the built-in scenarios, in catalog order.
pub fn catalog_ids() -> Vec<&'static str> {
    CATALOG.iter().map(|(id, _)| *id).collect()
}

/// Loads a built-in scenario.
pub fn builtin(id: &str) -> Result<Scenario, ScenarioError> {
    let (_, text) = CATALOG.iter().find(|(k, _)| *k == id).ok_or_else(|| ScenarioError::Unknown(id.to_string()))?;
    Scenario::from_json(text)
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| ScenarioError::Config(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let n = self.descriptor.dim();
        self.descriptor.validate()?;
        let lattice = self.grid.lattice()?;
        if lattice.dim() != n {
            return Err(ScenarioError::Config(format!("grid has dimension {}, set has {n}", lattice.dim())));
        }
        let f = self.reaction.build::<f64>()?;
        self.solver.validate(&lattice, &f)?;
        if self.roi.is_empty() {
            return Err(ScenarioError::Config("empty region of interest".into()));
        }
        let bounds = lattice.bounds();
        for w in &self.roi {
            if w.dim() != n || (0..n).any(|a| w.lo[a] > w.hi[a] || w.lo[a] < bounds.lo[a] || w.hi[a] > bounds.hi[a]) {
                return Err(ScenarioError::Config(format!("roi box {w:?} is not inside the grid")));
            }
        }
        if self.plan.is_empty() {
            return Err(ScenarioError::Config("empty plan".into()));
        }
        for e in &self.plan {
            for t in e.probe.times() {
                if !self.has_snapshot(t) {
                    return Err(ScenarioError::Config(format!(
                        "probe '{}' needs t={t}, not a snapshot time of this run",
                        e.name
                    )));
                }
            }
        }
        Ok(())
    }

    fn has_snapshot(&self, t: f64) -> bool {
        let k = t / self.solver.snapshot_every;
        t > 0.0 && t <= self.solver.horizon * (1.0 + 1e-12) && (k - k.round()).abs() < 1e-9
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Inconclusive => "INCONCLUSIVE",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub status: Status,
    pub informational: bool,
    pub detail: String,
}

/// PASS when every counted verdict passes, FAIL when any fails.
pub fn overall(verdicts: &[Verdict]) -> Status {
    let counted = verdicts.iter().filter(|v| !v.informational);
    let mut status = Status::Pass;
    for v in counted {
        match v.status {
            Status::Fail => return Status::Fail,
            Status::Inconclusive => status = Status::Inconclusive,
            Status::Pass => {}
        }
    }
    status
}

/// Re-derives the verdicts of `scenario` from a report.
pub fn judge(scenario: &Scenario, report: &DiagnosticsReport) -> Vec<Verdict> {
    scenario
        .plan
        .iter()
        .map(|e| {
            let (status, detail) = e.probe.judge(&e.name, report);
            let status = if e.informational { Status::Inconclusive } else { status };
            Verdict { name: e.name.clone(), status, informational: e.informational, detail }
        })
        .collect()
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides the scenario's own doubling flag.
    pub doubling: Option<bool>,
    /// Split solver updates across threads (bitwise identical results).
    pub parallel: bool,
}

#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub report: DiagnosticsReport,
    pub verdicts: Vec<Verdict>,
    pub status: Status,
    pub budget: BudgetReport,
    /// Largest ROI change when the domain is doubled, if that test ran.
    pub doubling: Option<f64>,
    pub snapshots: Vec<GridField<f64>>,
}

/// Runs the main simulation, every probe, and the boundary checks.
pub fn run_scenario(s: &Scenario, opts: &RunOptions) -> Result<ScenarioOutcome, ScenarioError> {
    s.validate()?;
    let f = s.reaction.build::<f64>()?;
    let c_star = f.minimal_speed()?;
    let lattice = s.grid.lattice()?;
    let budget = budget::check(s, &lattice, c_star)?;

    let cfg = SolverConfig { parallel: opts.parallel, ..s.solver.clone() };
    let u0: GridField<f64> = solver::rasterize(&s.descriptor, &lattice);
    let snapshots = solver::run_collect(&u0, &f, &cfg)?;

    let doubling = if opts.doubling.unwrap_or(s.doubling) {
        let big = doubled_lattice(&lattice);
        let big0: GridField<f64> = solver::rasterize(&s.descriptor, &big);
        let big_snaps = solver::run_collect(&big0, &f, &cfg)?;
        let measured = budget::roi_difference(&snapshots, &big_snaps, &s.roi)?;
        if measured > DOUBLING_TOLERANCE {
            return Err(ScenarioError::Contamination { measured, tolerance: DOUBLING_TOLERANCE });
        }
        Some(measured)
    } else {
        None
    };

    let mut ctx = probes::Context::new(s, &f, &cfg, &snapshots);
    let mut report = DiagnosticsReport::default();
    for e in &s.plan {
        e.probe.measure(&e.name, &mut ctx, &mut report)?;
    }
    if budget.distance.is_finite() {
        report.measure("budget.distance", budget.distance);
    }
    report.measure("budget.required", budget.required);
    if let Some(d) = doubling {
        report.measure("budget.doubling", d);
    }
    let verdicts = judge(s, &report);
    let status = overall(&verdicts);
    Ok(ScenarioOutcome { report, verdicts, status, budget, doubling, snapshots })
}

/// Human-readable verdict summary, one line per probe.
pub fn summary(s: &Scenario, outcome: &ScenarioOutcome) -> String {
    let mut out = format!("{} v{}: {}\n  claim: {}\n", s.id, s.version, outcome.status, s.claim);
    for v in &outcome.verdicts {
        let tag = if v.informational { " (informational)" } else { "" };
        out.push_str(&format!("  {:<13} {}{}: {}\n", v.status.to_string(), v.name, tag, v.detail));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_parses_and_validates() {
        for id in catalog_ids() {
            let s = builtin(id).unwrap();
            assert_eq!(s.id, id);
            assert_eq!(s.seed, 42);
            assert!(s.doubling);
            let again = Scenario::from_json(&s.to_json()).unwrap();
            assert_eq!(again, s);
        }
        assert!(matches!(builtin("nope"), Err(ScenarioError::Unknown(_))));
    }

    #[test]
    fn overall_ignores_informational() {
        let v = |status, informational| Verdict { name: "p".into(), status, informational, detail: String::new() };
        assert_eq!(overall(&[v(Status::Pass, false), v(Status::Inconclusive, true)]), Status::Pass);
        assert_eq!(overall(&[v(Status::Pass, false), v(Status::Inconclusive, false)]), Status::Inconclusive);
        assert_eq!(overall(&[v(Status::Fail, false), v(Status::Inconclusive, false)]), Status::Fail);
    }

    #[test]
    fn probe_times_must_be_snapshots() {
        let mut s = builtin("convex-2d").unwrap();
        s.solver.snapshot_every = 7.0;
        assert!(matches!(s.validate(), Err(ScenarioError::Config(_))));
    }
}
