//! Parameter sweeps over `b`, `c` and `chi`.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::mpsc;

use chemowave::{run, OutcomeKind, SimParams};
use rayon::prelude::*;

use crate::config::{Axis, AxisName, RunSpec};
use crate::error::Result;
use crate::output::{num, opt, write_kv, Csv};

/// Sweep grid around a base spec. Points with `b <= chi mu` are skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axes: Vec<Axis>,
    pub base: RunSpec,
    pub horizon_scale: f64,
}

impl SweepSpec {
    pub fn from_run_spec(spec: &RunSpec) -> Self {
        SweepSpec {
            axes: spec.sweep.axes.clone(),
            base: spec.clone(),
            horizon_scale: spec.sweep.horizon_scale,
        }
    }

    fn values(&self, name: AxisName, base: f64) -> Vec<f64> {
        self.axes
            .iter()
            .find(|a| a.name == name)
            .map_or_else(|| vec![base], Axis::values)
    }

    /// Grid points in sorted `(b, c, chi)` order, before filtering.
    pub fn points(&self) -> Vec<SimParams> {
        let p = self.base.params();
        let mut out = Vec::new();
        for &b in &self.values(AxisName::B, p.b) {
            for &c in &self.values(AxisName::C, p.c) {
                for &chi in &self.values(AxisName::Chi, p.chi) {
                    out.push(SimParams { b, c, chi, ..*p });
                }
            }
        }
        out
    }

    pub fn horizon(&self) -> f64 {
        self.base.run.t_end * self.horizon_scale
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PointResult {
    Done {
        outcome: OutcomeKind,
        plateau: Option<f64>,
        final_sup_u: f64,
    },
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub b: f64,
    pub c: f64,
    pub chi: f64,
    pub result: PointResult,
}

impl SweepRow {
    pub fn outcome(&self) -> Option<OutcomeKind> {
        match self.result {
            PointResult::Done { outcome, .. } => Some(outcome),
            PointResult::Failed(_) => None,
        }
    }

    fn fields(&self) -> [String; 6] {
        let (outcome, plateau, sup) = match &self.result {
            PointResult::Done {
                outcome,
                plateau,
                final_sup_u,
            } => (outcome.to_string(), opt(*plateau), num(*final_sup_u)),
            PointResult::Failed(_) => ("error".into(), String::new(), String::new()),
        };
        [
            num(self.b),
            num(self.c),
            num(self.chi),
            outcome,
            plateau,
            sup,
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub skipped: usize,
    /// Midpoint of the first extinction to forced-wave switch along `c`.
    pub transition: Option<f64>,
}

/// Runs one grid point.
pub fn run_point(sweep: &SweepSpec, params: SimParams) -> SweepRow {
    let result = sweep
        .base
        .with_params(params, sweep.horizon())
        .map_err(|e| e.to_string())
        .and_then(|spec| {
            let mut cfg = spec.run.clone();
            cfg.snapshot_times.clear();
            run(&cfg, &spec.initial_density()).map_err(|f| f.to_string())
        });
    let result = match result {
        Ok(res) => PointResult::Done {
            outcome: res.outcome.kind,
            plateau: res.outcome.plateau,
            final_sup_u: res.outcome.final_sup_u,
        },
        Err(msg) => {
            log::warn!(
                "sweep point b = {}, c = {}, chi = {}: {msg}",
                params.b,
                params.c,
                params.chi
            );
            PointResult::Failed(msg)
        }
    };
    SweepRow {
        b: params.b,
        c: params.c,
        chi: params.chi,
        result,
    }
}

/// For rows varying only in `c` (sorted ascending), the midpoint of the first
/// adjacent pair where exactly one side went extinct. Slow points near the
/// threshold often end `Undetermined`; they count as surviving.
pub fn estimate_transition(rows: &[SweepRow]) -> Option<f64> {
    let first = rows.first()?;
    if rows.iter().any(|r| r.b != first.b || r.chi != first.chi) {
        return None;
    }
    rows.windows(2).find_map(|w| {
        let (a, b) = (w[0].outcome()?, w[1].outcome()?);
        ((a == OutcomeKind::Extinction) != (b == OutcomeKind::Extinction))
            .then(|| 0.5 * (w[0].c + w[1].c))
    })
}

pub(crate) fn sweep(spec: &RunSpec, files: &mut Vec<PathBuf>) -> Result<SweepReport> {
    let sweep = SweepSpec::from_run_spec(spec);
    let all = sweep.points();
    let points: Vec<SimParams> = all
        .iter()
        .copied()
        .filter(|p| {
            let ok = p.b > p.chi * p.mu;
            if !ok {
                log::warn!("skipping b = {}, chi = {}: b <= chi mu", p.b, p.chi);
            }
            ok
        })
        .collect();
    let skipped = all.len() - points.len();

    let path = spec.out_dir.join("regime_map.csv");
    let mut csv = Csv::create(
        &path,
        &["b", "c", "chi", "outcome", "plateau", "final_sup_u"],
    )?;
    let (tx, rx) = mpsc::channel::<(usize, SweepRow)>();
    let rows = std::thread::scope(|s| {
        // single writer: rows go out in grid order as soon as their turn comes
        let writer = s.spawn(move || -> Result<Vec<SweepRow>> {
            let mut pending = BTreeMap::new();
            let mut done = Vec::new();
            for (i, row) in rx {
                pending.insert(i, row);
                while let Some(row) = pending.remove(&done.len()) {
                    csv.row(&row.fields())?;
                    csv.flush()?;
                    done.push(row);
                }
            }
            csv.finish()?;
            Ok(done)
        });
        points
            .par_iter()
            .enumerate()
            .for_each_with(tx, |tx, (i, p)| {
                let _ = tx.send((i, run_point(&sweep, *p)));
            });
        writer.join().expect("sweep writer panicked")
    })?;
    files.push(path);

    let transition = estimate_transition(&rows);
    let mut summary = vec![
        ("points", rows.len().to_string()),
        ("skipped", skipped.to_string()),
        ("horizon", num(sweep.horizon())),
        (
            "failed",
            rows.iter()
                .filter(|r| r.outcome().is_none())
                .count()
                .to_string(),
        ),
    ];
    if let Some(t) = transition {
        summary.push(("c_transition", num(t)));
    }
    files.push(write_kv(&spec.out_dir.join("sweep.txt"), &summary)?);
    Ok(SweepReport {
        rows,
        skipped,
        transition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(c: f64, outcome: OutcomeKind) -> SweepRow {
        SweepRow {
            b: 1.0,
            c,
            chi: 0.1,
            result: PointResult::Done {
                outcome,
                plateau: None,
                final_sup_u: 0.0,
            },
        }
    }

    #[test]
    fn transition_is_the_first_switch() {
        use OutcomeKind::*;
        let rows = [
            row(-7.0, Extinction),
            row(-6.5, Extinction),
            row(-6.0, ForcedWaveCase1),
            row(-5.5, ForcedWaveCase1),
        ];
        assert_eq!(estimate_transition(&rows), Some(-6.25));
        assert_eq!(estimate_transition(&rows[2..]), None);
        let slow = [row(-6.4, Extinction), row(-6.3, Undetermined)];
        assert!((estimate_transition(&slow).unwrap() + 6.35).abs() < 1e-12);
        let reversed = [row(6.4, Undetermined), row(6.5, Extinction)];
        assert!((estimate_transition(&reversed).unwrap() - 6.45).abs() < 1e-12);
        let mut mixed = rows.to_vec();
        mixed[0].b = 2.0;
        assert_eq!(estimate_transition(&mixed), None);
    }

    #[test]
    fn points_follow_axis_order() {
        let spec = crate::parse_config("sweep_b = 1, 2, 2\nsweep_chi = 0.1, 0.3, 3\n").unwrap();
        let pts = SweepSpec::from_run_spec(&spec).points();
        assert_eq!(pts.len(), 6);
        assert_eq!((pts[0].b, pts[0].chi), (1.0, 0.1));
        assert!((pts[1].chi - 0.2).abs() < 1e-15);
        assert_eq!((pts[3].b, pts[3].chi), (2.0, 0.1));
        assert!(pts.iter().all(|p| p.c == 1.0));
    }
}
