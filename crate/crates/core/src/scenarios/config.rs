//! Strict line-oriented `key = value` configuration with `[section]` headers.
//!
//! ```text
//! [run]
//! system = ucm10
//! scenario = shear1d_mode
//! t_end = 1
//!
//! [material]
//! c1_sq = 1
//! lambda = 1        # or "inf"
//! ```

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::material::{ElasticParams, MaxwellParams};
use crate::solver::{Integrator, Scheme, Splitting, StepOptions};
use crate::system::SystemTag;

const SECTIONS: &[(&str, &[&str])] = &[
    (
        "run",
        &["system", "scenario", "scheme", "splitting", "integrator", "cfl", "t_end", "output_every", "seed", "target"],
    ),
    ("material", &["c1_sq", "mu_dot", "d1_sq", "gamma", "rho_hat", "lambda"]),
    ("grid", &["n", "nx", "ny", "length"]),
    (
        "scenario",
        &[
            "mode",
            "amplitude",
            "width",
            "lambdas",
            "samples",
            "directions",
            "levels",
            "wall_velocity",
            "jump",
            "max_error",
            "min_order",
        ],
    ),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioId {
    Shear1dMode,
    StokesFirst,
    Riemann1dElasto,
    Gauss2dUcm,
    LimitSweep,
    AuditSymmetry,
    Converge,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 7] = [
        ScenarioId::Shear1dMode,
        ScenarioId::StokesFirst,
        ScenarioId::Riemann1dElasto,
        ScenarioId::Gauss2dUcm,
        ScenarioId::LimitSweep,
        ScenarioId::AuditSymmetry,
        ScenarioId::Converge,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioId::Shear1dMode => "shear1d_mode",
            ScenarioId::StokesFirst => "stokes_first",
            ScenarioId::Riemann1dElasto => "riemann1d_elasto",
            ScenarioId::Gauss2dUcm => "gauss2d_ucm",
            ScenarioId::LimitSweep => "limit_sweep",
            ScenarioId::AuditSymmetry => "audit_symmetry",
            ScenarioId::Converge => "converge",
        }
    }

    /// Whether the scenario runs on a periodic grid (energy gates apply).
    pub fn periodic(self) -> bool {
        !matches!(self, ScenarioId::StokesFirst)
    }
}

impl FromStr for ScenarioId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|id| id.name() == s).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|i| i.name()).collect();
            Error::validation("scenario", format!("unknown scenario `{s}`, expected one of: {}", names.join(", ")))
        })
    }
}

fn parse_system(s: &str) -> Result<SystemTag> {
    match s {
        "elasto7" => Ok(SystemTag::Elasto7),
        "ucm10" => Ok(SystemTag::Ucm10),
        _ => Err(Error::validation("system", format!("unknown system `{s}`, expected elasto7 or ucm10"))),
    }
}

/// Which material constant stays fixed when `λ` is varied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Held {
    C1Sq(f64),
    MuDot(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialSpec {
    pub held: Held,
    pub d1_sq: f64,
    pub gamma: f64,
    pub rho_hat: f64,
    pub lambda: f64,
}

impl MaterialSpec {
    pub fn params_for_lambda(&self, lambda: f64) -> Result<MaxwellParams> {
        let c1_sq = match self.held {
            Held::C1Sq(c) => c,
            Held::MuDot(m) => {
                if !lambda.is_finite() {
                    return Err(Error::validation("mu_dot", "holding mu_dot fixed requires a finite lambda"));
                }
                m / lambda
            }
        };
        MaxwellParams::new(ElasticParams::new(c1_sq, self.d1_sq, self.gamma, self.rho_hat)?, lambda)
    }

    pub fn params(&self) -> Result<MaxwellParams> {
        self.params_for_lambda(self.lambda)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub system: SystemTag,
    pub scenario: ScenarioId,
    pub material: MaterialSpec,
    pub cfl: f64,
    pub t_end: f64,
    pub step: StepOptions,
    /// Steps between field snapshots; 0 writes only the initial and final fields.
    pub output_every: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub id: ScenarioId,
    /// Scenario refined by `converge`.
    pub target: ScenarioId,
    pub n: usize,
    pub nx: usize,
    pub ny: usize,
    pub length: Option<f64>,
    pub mode: u32,
    pub amplitude: f64,
    pub width: f64,
    pub lambdas: Vec<f64>,
    pub samples: usize,
    pub directions: usize,
    pub levels: usize,
    pub wall_velocity: f64,
    pub jump: f64,
    pub max_error: f64,
    pub min_order: Option<f64>,
}

/// Raw `section.key → (line, value)` entries.
type Entries = BTreeMap<(String, String), (usize, String)>;

fn lex(text: &str) -> Result<Entries> {
    let mut out = Entries::new();
    let mut section: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| Error::Parse { line: line_no, message: format!("malformed section header `{line}`") })?
                .trim();
            if !SECTIONS.iter().any(|(s, _)| *s == name) {
                let names: Vec<_> = SECTIONS.iter().map(|(s, _)| *s).collect();
                return Err(Error::Parse { line: line_no, message: unknown("section", name, &names) });
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse { line: line_no, message: format!("expected `key = value`, got `{line}`") })?;
        let (key, value) = (key.trim(), value.trim());
        let sec = section.clone().ok_or_else(|| Error::Parse {
            line: line_no,
            message: format!("key `{key}` appears before any [section]"),
        })?;
        let allowed = SECTIONS.iter().find(|(s, _)| *s == sec).map(|(_, k)| *k).unwrap_or(&[]);
        if !allowed.contains(&key) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("{} in [{sec}]", unknown("key", key, allowed)),
            });
        }
        if value.is_empty() {
            return Err(Error::Parse { line: line_no, message: format!("missing value for `{key}`") });
        }
        if let Some((first, _)) = out.insert((sec.clone(), key.to_string()), (line_no, value.to_string())) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("duplicate key `{key}` (first set on line {first})"),
            });
        }
    }
    Ok(out)
}

fn unknown(what: &str, name: &str, candidates: &[&str]) -> String {
    let best = candidates.iter().map(|c| (strsim::jaro_winkler(name, c), *c)).max_by(|a, b| a.0.total_cmp(&b.0));
    match best {
        Some((score, c)) if score > 0.7 => format!("unknown {what} `{name}`, did you mean `{c}`?"),
        _ => format!("unknown {what} `{name}`"),
    }
}

struct Reader {
    entries: Entries,
}

impl Reader {
    fn raw(&self, sec: &str, key: &str) -> Option<&(usize, String)> {
        self.entries.get(&(sec.to_string(), key.to_string()))
    }

    fn get<T: FromStr>(&self, sec: &str, key: &str) -> Result<Option<T>> {
        match self.raw(sec, key) {
            None => Ok(None),
            Some((line, v)) => v.parse::<T>().map(Some).map_err(|_| Error::Parse {
                line: *line,
                message: format!("cannot parse `{v}` as a value for `{key}`"),
            }),
        }
    }

    fn or<T: FromStr>(&self, sec: &str, key: &str, default: T) -> Result<T> {
        Ok(self.get(sec, key)?.unwrap_or(default))
    }

    fn parsed<T: FromStr<Err = Error>>(&self, sec: &str, key: &str) -> Result<Option<T>> {
        self.raw(sec, key).map(|(_, v)| v.parse::<T>()).transpose()
    }

    fn float(&self, sec: &str, key: &str) -> Result<Option<f64>> {
        match self.raw(sec, key) {
            None => Ok(None),
            Some((line, v)) => parse_float(v).map(Some).ok_or_else(|| Error::Parse {
                line: *line,
                message: format!("cannot parse `{v}` as a number for `{key}`"),
            }),
        }
    }
}

fn parse_float(v: &str) -> Option<f64> {
    match v {
        "inf" | "infinity" => Some(f64::INFINITY),
        _ => v.parse::<f64>().ok().filter(|x| x.is_finite()),
    }
}

fn parse_list(line: usize, v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .map(|s| {
            parse_float(s.trim())
                .ok_or_else(|| Error::Parse { line, message: format!("cannot parse `{}` in list", s.trim()) })
        })
        .collect()
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<(RunConfig, ScenarioSpec)> {
    let r = Reader { entries: lex(text)? };
    let system = match r.raw("run", "system") {
        Some((_, v)) => parse_system(v)?,
        None => return Err(Error::validation("system", "is required")),
    };
    let scenario: ScenarioId =
        r.parsed("run", "scenario")?.ok_or_else(|| Error::validation("scenario", "is required"))?;
    let target: ScenarioId = r.parsed("run", "target")?.unwrap_or(ScenarioId::Shear1dMode);

    let shape = if scenario == ScenarioId::Converge { target } else { scenario };
    let default_scheme = match shape {
        ScenarioId::Shear1dMode | ScenarioId::Gauss2dUcm | ScenarioId::LimitSweep => Scheme::Central,
        _ => Scheme::Rusanov,
    };
    let step = StepOptions {
        scheme: r.parsed("run", "scheme")?.unwrap_or(default_scheme),
        splitting: r.parsed("run", "splitting")?.unwrap_or(Splitting::Strang),
        integrator: r.parsed("run", "integrator")?.unwrap_or(Integrator::Ssprk2),
    };
    let cfl = r.float("run", "cfl")?.unwrap_or(0.5);
    if !(cfl > 0.0 && cfl <= 1.0) {
        return Err(Error::validation("cfl", "cfl must lie in (0,1]"));
    }
    let t_end = match r.float("run", "t_end")? {
        Some(t) => t,
        None if scenario == ScenarioId::AuditSymmetry => 0.0,
        None => return Err(Error::validation("t_end", "is required")),
    };
    if scenario != ScenarioId::AuditSymmetry && !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::validation("t_end", "t_end must be positive and finite"));
    }

    let held = match (r.float("material", "c1_sq")?, r.float("material", "mu_dot")?) {
        (Some(_), Some(_)) => return Err(Error::validation("c1_sq", "give exactly one of c1_sq and mu_dot")),
        (Some(c), None) => Held::C1Sq(c),
        (None, Some(m)) => Held::MuDot(m),
        (None, None) => Held::C1Sq(1.0),
    };
    let lambda = match r.float("material", "lambda")? {
        Some(l) => l,
        None if system == SystemTag::Elasto7
            || scenario == ScenarioId::LimitSweep
            || scenario == ScenarioId::AuditSymmetry =>
        {
            f64::INFINITY
        }
        None => return Err(Error::validation("lambda", "is required for ucm10 scenarios")),
    };
    let material = MaterialSpec {
        held,
        d1_sq: r.float("material", "d1_sq")?.unwrap_or(1.0),
        gamma: r.float("material", "gamma")?.unwrap_or(2.0),
        rho_hat: r.float("material", "rho_hat")?.unwrap_or(1.0),
        lambda,
    };
    if scenario != ScenarioId::LimitSweep {
        material.params()?;
    }

    let expect_system = match shape {
        ScenarioId::Riemann1dElasto => Some(SystemTag::Elasto7),
        ScenarioId::Shear1dMode | ScenarioId::StokesFirst | ScenarioId::Gauss2dUcm | ScenarioId::LimitSweep => {
            Some(SystemTag::Ucm10)
        }
        _ => None,
    };
    if let Some(s) = expect_system {
        if s != system {
            return Err(Error::validation("system", format!("scenario {} runs on {}", shape.name(), s.name())));
        }
    }
    if scenario == ScenarioId::Converge
        && matches!(target, ScenarioId::Converge | ScenarioId::AuditSymmetry | ScenarioId::LimitSweep)
    {
        return Err(Error::validation("target", format!("{} cannot be refined", target.name())));
    }

    let n_default = match shape {
        ScenarioId::Gauss2dUcm => 32,
        ScenarioId::Riemann1dElasto => 200,
        ScenarioId::StokesFirst => 200,
        _ => 256,
    };
    let n: usize = r.or("grid", "n", n_default)?;
    let nx: usize = r.or("grid", "nx", n)?;
    let ny: usize = r.or("grid", "ny", if shape == ScenarioId::Riemann1dElasto { 4 } else { n })?;
    if n < 4 || nx < 4 || ny < 4 {
        return Err(Error::validation("n", "grids need at least 4 cells per axis"));
    }
    let length = r.float("grid", "length")?;
    if let Some(l) = length {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::validation("length", "must be positive and finite"));
        }
    }

    let lambdas = match r.raw("scenario", "lambdas") {
        Some((line, v)) => parse_list(*line, v)?,
        None => vec![1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3],
    };
    let spec = ScenarioSpec {
        id: scenario,
        target,
        n,
        nx,
        ny,
        length,
        mode: r.or("scenario", "mode", 1)?,
        amplitude: r.float("scenario", "amplitude")?.unwrap_or(if shape == ScenarioId::Gauss2dUcm {
            0.05
        } else {
            1.0
        }),
        width: r.float("scenario", "width")?.unwrap_or(0.1),
        lambdas,
        samples: r.or("scenario", "samples", 1000)?,
        directions: r.or("scenario", "directions", 8)?,
        levels: r.or("scenario", "levels", 4)?,
        wall_velocity: r.float("scenario", "wall_velocity")?.unwrap_or(1.0),
        jump: r.float("scenario", "jump")?.unwrap_or(0.1),
        max_error: r.float("scenario", "max_error")?.unwrap_or(1e-3),
        min_order: r.float("scenario", "min_order")?,
    };
    validate_spec(&spec)?;
    let config = RunConfig {
        system,
        scenario,
        material,
        cfl,
        t_end,
        step,
        output_every: r.or("run", "output_every", 0)?,
        seed: r.or("run", "seed", 7)?,
    };
    Ok((config, spec))
}

impl ScenarioSpec {
    /// Scenario a refinement study runs: the target of `converge`, otherwise
    /// the scenario itself.
    pub fn refined(&self) -> ScenarioId {
        if self.id == ScenarioId::Converge {
            self.target
        } else {
            self.id
        }
    }
}

pub fn validate_spec(spec: &ScenarioSpec) -> Result<()> {
    if spec.mode == 0 {
        return Err(Error::validation("mode", "mode number must be at least 1"));
    }
    if !(spec.width > 0.0) {
        return Err(Error::validation("width", "must be positive"));
    }
    if spec.samples == 0 || spec.directions == 0 {
        return Err(Error::validation("samples", "samples and directions must be at least 1"));
    }
    if spec.id == ScenarioId::Converge && spec.levels < 2 {
        return Err(Error::validation("levels", "a convergence study needs at least 2 levels"));
    }
    if spec.id == ScenarioId::LimitSweep {
        if spec.lambdas.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(Error::validation("lambdas", "every lambda must be positive and finite"));
        }
        let lo = spec.lambdas.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = spec.lambdas.iter().cloned().fold(0.0, f64::max);
        if !(hi / lo >= 1e4 * (1.0 - 1e-12)) {
            return Err(Error::validation("lambdas", "the lambda list must span at least 4 decades"));
        }
    }
    Ok(())
}
