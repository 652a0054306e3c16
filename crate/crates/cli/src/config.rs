//! Flat `key = value` run configuration.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use chemowave::analysis::DEFAULT_EPSILONS;
use chemowave::{
    sample, BoundaryCase, Grid, GrowthProfile, HabitatCase, InitialCondition, NeumannClosure,
    PiecewiseLinear, RunConfig, SimParams,
};

use crate::error::{HarnessError, Result};

/// Every recognised key with its default and a one-line description.
pub const KEYS: &[(&str, &str, &str)] = &[
    (
        "mode",
        "simulate",
        "simulate | eig | regime | verify | sweep",
    ),
    ("chi", "0.1", "chemotactic sensitivity"),
    ("mu", "1", "chemical production rate"),
    ("nu", "0.05", "chemical decay rate"),
    ("b", "1", "logistic self-limitation"),
    ("c", "1", "shift speed of the habitat"),
    (
        "profile",
        "-8:-1, -7:10",
        "growth rate r(x) as x:r breakpoints",
    ),
    (
        "u0",
        "case1: -1:0, 1:r*/b; case2: bump(-1,1,1)",
        "initial density, x:u breakpoints or bump(left,right,scale)",
    ),
    (
        "bc",
        "case2 if r < 0 at both ends, else case1",
        "case1 | case2",
    ),
    ("L", "20", "half-length of the domain [-L, L]"),
    ("h", "0.1", "space step"),
    ("tau", "0.002", "time step"),
    ("T", "10", "final time"),
    (
        "snapshot_times",
        "T",
        "comma-separated snapshot times in [0, T]",
    ),
    ("conv_window", "1", "window for the convergence test"),
    (
        "conv_tol",
        "1e-3",
        "sup-change over the window counted as settled",
    ),
    ("extinct_tol", "1e-3", "sup norm counted as extinct"),
    (
        "plateau_rel_tol",
        "0.02",
        "relative distance of u(T,L) from r*/b",
    ),
    (
        "closure",
        "first_order",
        "zero-flux closure of the chemical: first_order | ghost_node",
    ),
    ("allow_unstable", "false", "skip the tau/h^2 <= 1/2 check"),
    ("out", "out", "output directory"),
    ("eig_h", "0.01", "eig: grid step of the eigenvalue problem"),
    (
        "eig_tol",
        "1e-6",
        "eig: convergence tolerance of lambda_inf in L",
    ),
    ("samples", "100", "verify: certification samples"),
    ("seed", "24301", "verify: sampling seed"),
    ("epsilons", "0.1, 0.05, 0.025", "verify: ignition cut-offs"),
    ("truncation", "60", "verify: ignition truncation radius"),
    (
        "fixed_point",
        "true",
        "verify: run the frozen-flow fixed point",
    ),
    (
        "max_outer",
        "30",
        "verify: outer iterations of the fixed point",
    ),
    ("inner_T", "50", "verify: horizon cap of each frozen flow"),
    ("sweep_b", "", "sweep: min, max, count"),
    ("sweep_c", "", "sweep: min, max, count"),
    ("sweep_chi", "", "sweep: min, max, count"),
    ("horizon_scale", "1", "sweep: multiplier on T per point"),
];

/// Help text listing every key and its default.
pub fn keys_help() -> String {
    let mut s = String::from("Config keys (default in brackets):\n");
    for (key, default, what) in KEYS {
        let _ = writeln!(s, "  {key:<16} {what} [{default}]");
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Simulate,
    Eig,
    Regime,
    Verify,
    Sweep,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Simulate => "simulate",
            Mode::Eig => "eig",
            Mode::Regime => "regime",
            Mode::Verify => "verify",
            Mode::Sweep => "sweep",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "simulate" => Mode::Simulate,
            "eig" => Mode::Eig,
            "regime" => Mode::Regime,
            "verify" => Mode::Verify,
            "sweep" => Mode::Sweep,
            _ => return Err(format!("unknown mode `{s}`")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigOptions {
    pub h: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub samples: usize,
    pub seed: u64,
    pub epsilons: Vec<f64>,
    pub truncation: f64,
    pub fixed_point: bool,
    pub max_outer: usize,
    pub inner_t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum AxisName {
    B,
    C,
    Chi,
}

impl AxisName {
    fn key(self) -> &'static str {
        match self {
            AxisName::B => "sweep_b",
            AxisName::C => "sweep_c",
            AxisName::Chi => "sweep_chi",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub name: AxisName,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    /// Evenly spaced values from `min` to `max` inclusive.
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                if k + 1 == self.count {
                    self.max
                } else {
                    self.min + k as f64 * step
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    /// Sorted by axis name, at most one per name.
    pub axes: Vec<Axis>,
    pub horizon_scale: f64,
}

/// A fully validated experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub mode: Mode,
    pub profile: GrowthProfile,
    /// `None` selects the default for the boundary case.
    pub u0: Option<InitialCondition>,
    pub run: RunConfig,
    pub out_dir: PathBuf,
    pub eig: EigOptions,
    pub verify: VerifyOptions,
    pub sweep: SweepOptions,
}

impl RunSpec {
    pub fn params(&self) -> &SimParams {
        &self.run.params
    }

    pub fn grid(&self) -> &Grid {
        &self.run.grid
    }

    pub fn bc(&self) -> BoundaryCase {
        self.run.bc
    }

    pub fn initial_condition(&self) -> InitialCondition {
        self.u0
            .clone()
            .unwrap_or_else(|| default_u0(self.run.bc, &self.profile, &self.run.params))
    }

    pub fn initial_density(&self) -> Vec<f64> {
        sample(&self.initial_condition(), self.grid())
    }

    /// Same spec with other parameters and final time, revalidated.
    pub fn with_params(&self, params: SimParams, t_end: f64) -> chemowave::Result<RunSpec> {
        let mut spec = self.clone();
        spec.run.params = params;
        spec.run.t_end = t_end;
        spec.run.validate()?;
        Ok(spec)
    }

    /// Same spec on another half-length, revalidated.
    pub fn with_half_length(&self, half_length: f64) -> chemowave::Result<RunSpec> {
        let mut spec = self.clone();
        spec.run.grid = Grid::new(half_length, self.grid().h())?;
        spec.run.r_samples = sample(&self.profile, &spec.run.grid);
        spec.run.validate()?;
        Ok(spec)
    }
}

fn default_u0(bc: BoundaryCase, profile: &GrowthProfile, params: &SimParams) -> InitialCondition {
    match bc {
        BoundaryCase::Case1 => InitialCondition::ramp(profile.r_star(), params.b),
        BoundaryCase::Case2 => InitialCondition::unit_bump(),
    }
}

struct Entry {
    /// 0 for command-line overrides.
    line: usize,
    value: String,
}

impl Entry {
    fn error(&self, key: &str, msg: String) -> HarnessError {
        if self.line == 0 {
            HarnessError::Invalid {
                key: key.into(),
                msg,
            }
        } else {
            HarnessError::Parse {
                line: self.line,
                msg: format!("`{key}`: {msg}"),
            }
        }
    }
}

struct Table(BTreeMap<String, Entry>);

impl Table {
    fn raw(&self, key: &str) -> Option<&Entry> {
        self.0.get(key)
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        let default = KEYS.iter().find(|k| k.0 == key).map(|k| k.1).unwrap_or("");
        match self.raw(key) {
            Some(e) => e
                .value
                .parse()
                .map_err(|err: T::Err| e.error(key, err.to_string())),
            None => default.parse().map_err(|err| HarnessError::Invalid {
                key: key.into(),
                msg: format!("bad default: {err}"),
            }),
        }
    }

    fn with_line<T>(
        &self,
        key: &str,
        f: impl FnOnce(&str) -> std::result::Result<T, String>,
    ) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(e) => f(&e.value).map(Some).map_err(|msg| e.error(key, msg)),
        }
    }
}

fn tokenize(text: &str, overrides: &[(&str, String)]) -> Result<Table> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(HarnessError::Parse {
                line,
                msg: format!("expected `key = value`, got `{content}`"),
            });
        };
        let key = key.trim();
        if !KEYS.iter().any(|k| k.0 == key) {
            return Err(HarnessError::Parse {
                line,
                msg: format!("unknown key `{key}`"),
            });
        }
        let entry = Entry {
            line,
            value: value.trim().to_string(),
        };
        if let Some(prev) = map.insert(key.to_string(), entry) {
            return Err(HarnessError::Parse {
                line,
                msg: format!("duplicate key `{key}` (first on line {})", prev.line),
            });
        }
    }
    for (key, value) in overrides {
        if !KEYS.iter().any(|k| k.0 == *key) {
            return Err(HarnessError::Invalid {
                key: key.to_string(),
                msg: "unknown key".into(),
            });
        }
        map.insert(
            key.to_string(),
            Entry {
                line: 0,
                value: value.clone(),
            },
        );
    }
    Ok(Table(map))
}

fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| format!("`{}`: {e}", t.trim()))
        })
        .collect()
}

fn parse_pairs(s: &str) -> std::result::Result<Vec<(f64, f64)>, String> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|item| {
            let (x, y) = item
                .split_once(':')
                .ok_or_else(|| format!("expected `x:value`, got `{}`", item.trim()))?;
            let x = x
                .trim()
                .parse::<f64>()
                .map_err(|e| format!("`{}`: {e}", x.trim()))?;
            let y = y
                .trim()
                .parse::<f64>()
                .map_err(|e| format!("`{}`: {e}", y.trim()))?;
            Ok((x, y))
        })
        .collect()
}

enum U0Spec {
    Pairs(Vec<(f64, f64)>),
    Bump(f64, f64, f64),
}

fn parse_u0(s: &str) -> std::result::Result<U0Spec, String> {
    if let Some(args) = s.strip_prefix("bump(").and_then(|r| r.strip_suffix(')')) {
        let v = parse_list(args)?;
        return match v[..] {
            [a, b, c] => Ok(U0Spec::Bump(a, b, c)),
            _ => Err("bump takes three arguments: bump(left, right, scale)".into()),
        };
    }
    parse_pairs(s).map(U0Spec::Pairs)
}

fn parse_axis(name: AxisName, s: &str) -> std::result::Result<Axis, String> {
    let v = parse_list(s)?;
    let [min, max, count] = v[..] else {
        return Err("expected `min, max, count`".into());
    };
    if !(min.is_finite() && max.is_finite()) || max < min {
        return Err(format!("need finite min <= max, got {min}, {max}"));
    }
    if count.fract() != 0.0 || count < 1.0 {
        return Err(format!("count must be a positive integer, got {count}"));
    }
    let count = count as usize;
    if count == 1 && min != max {
        return Err("count = 1 needs min = max".into());
    }
    if count >= 2 && min == max {
        return Err("min = max needs count = 1".into());
    }
    Ok(Axis {
        name,
        min,
        max,
        count,
    })
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<RunSpec> {
    parse_config_with(text, &[])
}

/// As [`parse_config`], with `key = value` overrides applied on top of the text.
pub fn parse_config_with(text: &str, overrides: &[(&str, String)]) -> Result<RunSpec> {
    let t = tokenize(text, overrides)?;

    let mode: Mode = t.get("mode")?;
    let params = SimParams {
        chi: t.get("chi")?,
        mu: t.get("mu")?,
        nu: t.get("nu")?,
        b: t.get("b")?,
        c: t.get("c")?,
    };
    params
        .validate()
        .map_err(|e| HarnessError::keyed("params", e))?;

    let points = t
        .with_line("profile", parse_pairs)?
        .unwrap_or_else(|| GrowthProfile::separated().breakpoints().collect());
    let profile = GrowthProfile::new(&points).map_err(|e| HarnessError::keyed("profile", e))?;

    let bc = match t.with_line("bc", |s| {
        s.parse::<BoundaryCase>().map_err(|e| e.to_string())
    })? {
        Some(bc) => bc,
        None if profile.classify() == HabitatCase::Case2 => BoundaryCase::Case2,
        None => BoundaryCase::Case1,
    };

    let u0 = match t.with_line("u0", parse_u0)? {
        None => None,
        Some(U0Spec::Bump(left, right, scale)) => {
            Some(InitialCondition::Bump { left, right, scale })
        }
        Some(U0Spec::Pairs(p)) => Some(InitialCondition::Piecewise(
            PiecewiseLinear::new(&p).map_err(|e| HarnessError::keyed("u0", e))?,
        )),
    };
    if let Some(u0) = &u0 {
        u0.validate().map_err(|e| HarnessError::keyed("u0", e))?;
    }

    let grid = Grid::new(t.get("L")?, t.get("h")?).map_err(|e| HarnessError::keyed("h", e))?;
    let closure: NeumannClosure = t
        .with_line("closure", |s| {
            s.parse::<NeumannClosure>().map_err(|e| e.to_string())
        })?
        .unwrap_or_default();
    let snapshot_times = t
        .with_line("snapshot_times", parse_list)?
        .unwrap_or_default();
    let run = RunConfig {
        params,
        grid,
        bc,
        tau: t.get("tau")?,
        t_end: t.get("T")?,
        r_samples: sample(&profile, &grid),
        r_star: profile.r_star(),
        snapshot_times,
        conv_window: t.get("conv_window")?,
        conv_tol: t.get("conv_tol")?,
        extinct_tol: t.get("extinct_tol")?,
        plateau_rel_tol: t.get("plateau_rel_tol")?,
        closure,
        allow_unstable: t.get("allow_unstable")?,
    };
    run.validate().map_err(|e| match e {
        chemowave::Error::CflViolated { ratio } => HarnessError::Invalid {
            key: "tau".into(),
            msg: format!(
                "CFL violated: tau/h^2 = {ratio} > 1/2 (set allow_unstable = true to run anyway)"
            ),
        },
        other => HarnessError::keyed("run", other),
    })?;

    let eig = EigOptions {
        h: t.get("eig_h")?,
        tol: t.get("eig_tol")?,
    };
    if !(eig.h > 0.0 && eig.tol > 0.0) {
        return Err(HarnessError::Invalid {
            key: "eig_h".into(),
            msg: "eig_h and eig_tol must be > 0".into(),
        });
    }

    let epsilons = t
        .with_line("epsilons", parse_list)?
        .unwrap_or_else(|| DEFAULT_EPSILONS.to_vec());
    if epsilons.is_empty() || epsilons.iter().any(|e| !(*e > 0.0)) {
        return Err(HarnessError::Invalid {
            key: "epsilons".into(),
            msg: "need at least one positive cut-off".into(),
        });
    }
    let verify = VerifyOptions {
        samples: t.get("samples")?,
        seed: t.get("seed")?,
        epsilons,
        truncation: t.get("truncation")?,
        fixed_point: t.get("fixed_point")?,
        max_outer: t.get("max_outer")?,
        inner_t: t.get("inner_T")?,
    };

    let mut axes = Vec::new();
    for name in [AxisName::B, AxisName::C, AxisName::Chi] {
        if let Some(axis) = t.with_line(name.key(), |s| parse_axis(name, s))? {
            axes.push(axis);
        }
    }
    let horizon_scale: f64 = t.get("horizon_scale")?;
    if !(horizon_scale > 0.0 && horizon_scale.is_finite()) {
        return Err(HarnessError::Invalid {
            key: "horizon_scale".into(),
            msg: "must be > 0".into(),
        });
    }
    if mode == Mode::Sweep && axes.is_empty() {
        return Err(HarnessError::Invalid {
            key: "sweep_c".into(),
            msg: "sweep mode needs at least one of sweep_b, sweep_c, sweep_chi".into(),
        });
    }

    Ok(RunSpec {
        mode,
        profile,
        u0,
        run,
        out_dir: PathBuf::from(t.get::<String>("out")?),
        eig,
        verify,
        sweep: SweepOptions {
            axes,
            horizon_scale,
        },
    })
}

fn join(values: impl IntoIterator<Item = f64>) -> String {
    values
        .into_iter()
        .map(|v| format!("{v:?}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn join_pairs(points: impl IntoIterator<Item = (f64, f64)>) -> String {
    points
        .into_iter()
        .map(|(x, y)| format!("{x:?}:{y:?}"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Writes every setting explicitly; `parse_config(&render(s)) == s`.
pub fn render(spec: &RunSpec) -> String {
    let r = &spec.run;
    let p = &r.params;
    let v = &spec.verify;
    let mut s = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(s, "{k} = {v}");
    };
    kv("mode", spec.mode.to_string());
    kv("chi", format!("{:?}", p.chi));
    kv("mu", format!("{:?}", p.mu));
    kv("nu", format!("{:?}", p.nu));
    kv("b", format!("{:?}", p.b));
    kv("c", format!("{:?}", p.c));
    kv("profile", join_pairs(spec.profile.breakpoints()));
    match &spec.u0 {
        None => {}
        Some(InitialCondition::Bump { left, right, scale }) => {
            kv("u0", format!("bump({left:?}, {right:?}, {scale:?})"))
        }
        Some(InitialCondition::Piecewise(pl)) => kv("u0", join_pairs(pl.breakpoints())),
    }
    kv("bc", r.bc.to_string());
    kv("L", format!("{:?}", r.grid.half_length()));
    kv("h", format!("{:?}", r.grid.h()));
    kv("tau", format!("{:?}", r.tau));
    kv("T", format!("{:?}", r.t_end));
    if !r.snapshot_times.is_empty() {
        kv("snapshot_times", join(r.snapshot_times.iter().copied()));
    }
    kv("conv_window", format!("{:?}", r.conv_window));
    kv("conv_tol", format!("{:?}", r.conv_tol));
    kv("extinct_tol", format!("{:?}", r.extinct_tol));
    kv("plateau_rel_tol", format!("{:?}", r.plateau_rel_tol));
    kv("closure", r.closure.to_string());
    kv("allow_unstable", r.allow_unstable.to_string());
    kv("out", spec.out_dir.display().to_string());
    kv("eig_h", format!("{:?}", spec.eig.h));
    kv("eig_tol", format!("{:?}", spec.eig.tol));
    kv("samples", v.samples.to_string());
    kv("seed", v.seed.to_string());
    kv("epsilons", join(v.epsilons.iter().copied()));
    kv("truncation", format!("{:?}", v.truncation));
    kv("fixed_point", v.fixed_point.to_string());
    kv("max_outer", v.max_outer.to_string());
    kv("inner_T", format!("{:?}", v.inner_t));
    for a in &spec.sweep.axes {
        kv(
            a.name.key(),
            format!("{:?}, {:?}, {}", a.min, a.max, a.count),
        );
    }
    kv("horizon_scale", format!("{:?}", spec.sweep.horizon_scale));
    s
}
