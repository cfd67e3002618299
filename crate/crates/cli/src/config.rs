//! Experiment configuration: flat key-value text with dotted section names,
//! one file per experiment. All physical parameters are explicit; there are
//! no defaults for sigma, n, delta, alpha.
//!
//! ```text
//! scheme.family = linear_invariant
//! initial.kind = fundamental
//! initial.c = 1.0
//! initial.t0 = 10.0
//! initial.x_min = -10.0
//! initial.x_max = 10.0
//! initial.nodes = 41
//! boundary.kind = exact
//! steps.count = 100
//! steps.tau_policy = fixed
//! steps.tau = 0.05
//! output.dir = out/invariant
//! output.emit = csv,svg,summary
//! ```

use heatsym::schemes::{SchemeKind, SourceSign};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {0}: expected `key = value`")]
    Malformed(usize),
    #[error("duplicate key `{0}`")]
    Duplicate(String),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("missing key `{0}`")]
    Missing(&'static str),
    #[error("key `{key}`: invalid value `{value}` ({want})")]
    Invalid {
        key: String,
        value: String,
        want: String,
    },
    #[error("{0}")]
    Inconsistent(String),
}

/// Source of the initial layer: an exact solution plus mesh parameters, or
/// an inline node table.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialSpec {
    Fundamental {
        c: f64,
        t0: f64,
        x_min: f64,
        x_max: f64,
        nodes: usize,
    },
    Linear {
        alpha: f64,
        f0: f64,
        t0: f64,
        x_min: f64,
        x_max: f64,
        nodes: usize,
    },
    Semilinear {
        alpha: f64,
        f0: f64,
        x_min: f64,
        x_max: f64,
        nodes: usize,
    },
    Blowup {
        rho: f64,
        m: usize,
    },
    Inline {
        t0: f64,
        xs: Vec<f64>,
        us: Vec<f64>,
    },
}

/// How the two end nodes of each new layer are supplied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    /// Positions and values from the configured exact solution on the
    /// moving (or fixed) ends.
    Exact,
    /// End positions and values frozen at their initial-layer state.
    Hold,
}

/// Time-step policy of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauPolicy {
    Fixed(f64),
    /// `tau = c h^2` from the (uniform) initial spacing.
    Cfl(f64),
    /// The geometrically decreasing blow-up mesh `tau_j`.
    Blowup,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmitSet {
    pub csv: bool,
    pub svg: bool,
    pub summary: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scheme: SchemeKind,
    pub initial: InitialSpec,
    /// Boost parameter applied to the initial layer (linear-heat runs only).
    pub boost: f64,
    pub boundary: BoundaryKind,
    pub steps: usize,
    pub tau: TauPolicy,
    pub output: PathBuf,
    pub emit: EmitSet,
}

struct Entries {
    map: BTreeMap<String, String>,
    used: std::cell::RefCell<std::collections::BTreeSet<String>>,
}

impl Entries {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Malformed(idx + 1));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() || value.is_empty() {
                return Err(ConfigError::Malformed(idx + 1));
            }
            if map.insert(key.clone(), value).is_some() {
                return Err(ConfigError::Duplicate(key));
            }
        }
        Ok(Self {
            map,
            used: Default::default(),
        })
    }

    fn get(&self, key: &'static str) -> Option<&str> {
        self.used.borrow_mut().insert(key.to_string());
        self.map.get(key).map(|s| s.as_str())
    }

    fn require(&self, key: &'static str) -> Result<&str, ConfigError> {
        self.get(key).ok_or(ConfigError::Missing(key))
    }

    fn f64(&self, key: &'static str) -> Result<f64, ConfigError> {
        let v = self.require(key)?;
        v.parse().map_err(|_| ConfigError::Invalid {
            key: key.into(),
            value: v.into(),
            want: "a real number".into(),
        })
    }

    fn f64_or(&self, key: &'static str, default: f64) -> Result<f64, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| ConfigError::Invalid {
                key: key.into(),
                value: v.into(),
                want: "a real number".into(),
            }),
        }
    }

    fn usize(&self, key: &'static str) -> Result<usize, ConfigError> {
        let v = self.require(key)?;
        v.parse().map_err(|_| ConfigError::Invalid {
            key: key.into(),
            value: v.into(),
            want: "a nonnegative integer".into(),
        })
    }

    fn f64_list(&self, key: &'static str) -> Result<Vec<f64>, ConfigError> {
        let v = self.require(key)?;
        v.split(',')
            .map(|s| {
                s.trim().parse().map_err(|_| ConfigError::Invalid {
                    key: key.into(),
                    value: v.into(),
                    want: "comma-separated real numbers".into(),
                })
            })
            .collect()
    }

    fn reject_unknown(&self) -> Result<(), ConfigError> {
        let used = self.used.borrow();
        for key in self.map.keys() {
            if !used.contains(key) {
                return Err(ConfigError::UnknownKey(key.clone()));
            }
        }
        Ok(())
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let e = Entries::parse(text)?;

        let scheme = match e.require("scheme.family")? {
            "powerlaw_explicit" => {
                let sign = match e.require("scheme.sign")? {
                    "plus" => SourceSign::Plus,
                    "minus" => SourceSign::Minus,
                    "off" => SourceSign::Off,
                    other => {
                        return Err(ConfigError::Invalid {
                            key: "scheme.sign".into(),
                            value: other.into(),
                            want: "plus | minus | off".into(),
                        })
                    }
                };
                SchemeKind::PowerlawExplicit {
                    sigma: e.f64("scheme.sigma")?,
                    n: e.f64("scheme.n")?,
                    sign,
                }
            }
            "powerlaw_implicit" => SchemeKind::PowerlawImplicit {
                sigma: e.f64("scheme.sigma")?,
                n: e.f64("scheme.n")?,
            },
            "semilinear" => SchemeKind::Semilinear {
                delta: e.f64("scheme.delta")?,
            },
            "linear_invariant" => SchemeKind::LinearInvariant,
            "linear_orthogonal" => SchemeKind::LinearOrthogonal,
            "burgers_potential" => SchemeKind::BurgersPotential,
            "ode_u2" => {
                return Err(ConfigError::Inconsistent(
                    "scheme.family = ode_u2 has no time axis; the harness drives the \
                     evolutionary schemes (see the `invariants` subcommand for the ODE family)"
                        .into(),
                ))
            }
            other => {
                return Err(ConfigError::Invalid {
                    key: "scheme.family".into(),
                    value: other.into(),
                    want: "powerlaw_explicit | powerlaw_implicit | semilinear | \
                           linear_invariant | linear_orthogonal | burgers_potential"
                        .into(),
                })
            }
        };

        let mesh = |e: &Entries| -> Result<(f64, f64, usize), ConfigError> {
            let x_min = e.f64("initial.x_min")?;
            let x_max = e.f64("initial.x_max")?;
            let nodes = e.usize("initial.nodes")?;
            if !(x_max > x_min) || nodes < 3 {
                return Err(ConfigError::Inconsistent(
                    "initial mesh needs x_max > x_min and at least 3 nodes".into(),
                ));
            }
            Ok((x_min, x_max, nodes))
        };

        let initial = match e.require("initial.kind")? {
            "fundamental" => {
                let (x_min, x_max, nodes) = mesh(&e)?;
                InitialSpec::Fundamental {
                    c: e.f64("initial.c")?,
                    t0: e.f64("initial.t0")?,
                    x_min,
                    x_max,
                    nodes,
                }
            }
            "linear" => {
                let (x_min, x_max, nodes) = mesh(&e)?;
                InitialSpec::Linear {
                    alpha: e.f64("initial.alpha")?,
                    f0: e.f64("initial.f0")?,
                    t0: e.f64_or("initial.t0", 0.0)?,
                    x_min,
                    x_max,
                    nodes,
                }
            }
            "semilinear" => {
                let (x_min, x_max, nodes) = mesh(&e)?;
                InitialSpec::Semilinear {
                    alpha: e.f64("initial.alpha")?,
                    f0: e.f64("initial.f0")?,
                    x_min,
                    x_max,
                    nodes,
                }
            }
            "blowup" => InitialSpec::Blowup {
                rho: e.f64("initial.rho")?,
                m: e.usize("initial.m")?,
            },
            "inline" => {
                let xs = e.f64_list("initial.xs")?;
                let us = e.f64_list("initial.us")?;
                InitialSpec::Inline {
                    t0: e.f64_or("initial.t0", 0.0)?,
                    xs,
                    us,
                }
            }
            other => {
                return Err(ConfigError::Invalid {
                    key: "initial.kind".into(),
                    value: other.into(),
                    want: "fundamental | linear | semilinear | blowup | inline".into(),
                })
            }
        };

        // The oracle must solve the configured scheme's equation; inline data
        // carries no oracle and pairs with anything.
        let compatible = match scheme {
            SchemeKind::PowerlawExplicit { .. } => {
                matches!(initial, InitialSpec::Inline { .. })
            }
            SchemeKind::PowerlawImplicit { .. } => {
                matches!(
                    initial,
                    InitialSpec::Inline { .. } | InitialSpec::Blowup { .. }
                )
            }
            SchemeKind::Semilinear { .. } => {
                matches!(
                    initial,
                    InitialSpec::Inline { .. } | InitialSpec::Semilinear { .. }
                )
            }
            SchemeKind::LinearInvariant
            | SchemeKind::LinearOrthogonal
            | SchemeKind::BurgersPotential => matches!(
                initial,
                InitialSpec::Inline { .. }
                    | InitialSpec::Fundamental { .. }
                    | InitialSpec::Linear { .. }
            ),
            SchemeKind::OdeU2 => false,
        };
        if !compatible {
            return Err(ConfigError::Inconsistent(format!(
                "initial.kind does not provide a solution of the {:?} scheme",
                scheme
            )));
        }

        let boost = e.f64_or("initial.boost", 0.0)?;
        if boost != 0.0 {
            let linear_oracle = matches!(
                initial,
                InitialSpec::Fundamental { .. } | InitialSpec::Linear { .. }
            );
            let linear_scheme = matches!(
                scheme,
                SchemeKind::LinearInvariant | SchemeKind::LinearOrthogonal
            );
            if !linear_oracle || !linear_scheme {
                return Err(ConfigError::Inconsistent(
                    "initial.boost applies only to linear-heat oracles and schemes".into(),
                ));
            }
        }

        let boundary = match e.get("boundary.kind") {
            None | Some("exact") => BoundaryKind::Exact,
            Some("hold") => BoundaryKind::Hold,
            Some(other) => {
                return Err(ConfigError::Invalid {
                    key: "boundary.kind".into(),
                    value: other.into(),
                    want: "exact | hold".into(),
                })
            }
        };
        if boundary == BoundaryKind::Exact && matches!(initial, InitialSpec::Inline { .. }) {
            return Err(ConfigError::Inconsistent(
                "boundary.kind = exact needs an exact-solution initial layer; \
                 use boundary.kind = hold with inline data"
                    .into(),
            ));
        }

        let steps = e.usize("steps.count")?;
        let tau = match e.require("steps.tau_policy")? {
            "fixed" => TauPolicy::Fixed(e.f64("steps.tau")?),
            "cfl" => TauPolicy::Cfl(e.f64("steps.cfl")?),
            "blowup" => TauPolicy::Blowup,
            other => {
                return Err(ConfigError::Invalid {
                    key: "steps.tau_policy".into(),
                    value: other.into(),
                    want: "fixed | cfl | blowup".into(),
                })
            }
        };
        match tau {
            TauPolicy::Fixed(v) if !(v > 0.0) => {
                return Err(ConfigError::Inconsistent(
                    "steps.tau must be positive".into(),
                ))
            }
            TauPolicy::Cfl(c) if !(c > 0.0) => {
                return Err(ConfigError::Inconsistent(
                    "steps.cfl must be positive".into(),
                ))
            }
            TauPolicy::Blowup
                if !matches!(scheme, SchemeKind::PowerlawImplicit { .. })
                    || !matches!(initial, InitialSpec::Blowup { .. }) =>
            {
                return Err(ConfigError::Inconsistent(
                    "the blow-up time mesh pairs with powerlaw_implicit and \
                     initial.kind = blowup"
                        .into(),
                ));
            }
            _ => {}
        }
        if matches!(initial, InitialSpec::Blowup { .. }) && !matches!(tau, TauPolicy::Blowup) {
            return Err(ConfigError::Inconsistent(
                "initial.kind = blowup requires steps.tau_policy = blowup".into(),
            ));
        }
        if matches!(initial, InitialSpec::Semilinear { .. }) && !matches!(tau, TauPolicy::Fixed(_))
        {
            return Err(ConfigError::Inconsistent(
                "the semilinear exact solution lives on a fixed time step".into(),
            ));
        }

        let output = PathBuf::from(e.require("output.dir")?);
        let mut emit = EmitSet {
            csv: false,
            svg: false,
            summary: false,
        };
        for part in e.require("output.emit")?.split(',') {
            match part.trim() {
                "csv" => emit.csv = true,
                "svg" => emit.svg = true,
                "summary" => emit.summary = true,
                other => {
                    return Err(ConfigError::Invalid {
                        key: "output.emit".into(),
                        value: other.into(),
                        want: "subset of csv,svg,summary".into(),
                    })
                }
            }
        }

        e.reject_unknown()?;
        Ok(Self {
            scheme,
            initial,
            boost,
            boundary,
            steps,
            tau,
            output,
            emit,
        })
    }

    /// The oracle identity used by `compare`: two configs are comparable iff
    /// they start from the same exact solution and boost.
    pub fn oracle_key(&self) -> Option<(InitialSpec, f64)> {
        match &self.initial {
            InitialSpec::Inline { .. } => None,
            other => Some((other.clone(), self.boost)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "\
scheme.family = linear_invariant
initial.kind = fundamental
initial.c = 1.0
initial.t0 = 10.0
initial.x_min = -10.0
initial.x_max = 10.0
initial.nodes = 41
boundary.kind = exact
steps.count = 100
steps.tau_policy = fixed
steps.tau = 0.05
output.dir = out/invariant
output.emit = csv,summary
";

    #[test]
    fn parses_reference_config() {
        let cfg = ExperimentConfig::parse(BASE).unwrap();
        assert_eq!(cfg.scheme, SchemeKind::LinearInvariant);
        assert_eq!(cfg.steps, 100);
        assert_eq!(cfg.tau, TauPolicy::Fixed(0.05));
        assert!(cfg.emit.csv && cfg.emit.summary && !cfg.emit.svg);
        assert_eq!(cfg.output, PathBuf::from("out/invariant"));
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        let with_typo = format!("{BASE}steps.taau = 1\n");
        assert!(matches!(
            ExperimentConfig::parse(&with_typo),
            Err(ConfigError::UnknownKey(_))
        ));
        let dup = format!("{BASE}steps.count = 7\n");
        assert!(matches!(
            ExperimentConfig::parse(&dup),
            Err(ConfigError::Duplicate(_))
        ));
    }

    #[test]
    fn requires_physical_parameters() {
        let text = BASE.replace("linear_invariant", "semilinear");
        assert!(matches!(
            ExperimentConfig::parse(&text),
            Err(ConfigError::Missing("scheme.delta"))
        ));
    }

    #[test]
    fn blowup_policy_pairs_with_implicit_scheme() {
        let text = "\
scheme.family = linear_invariant
initial.kind = blowup
initial.rho = 2.0
initial.m = 5
steps.count = 5
steps.tau_policy = blowup
output.dir = out
output.emit = csv
";
        assert!(matches!(
            ExperimentConfig::parse(text),
            Err(ConfigError::Inconsistent(_))
        ));
    }

    #[test]
    fn inline_initial_needs_hold_boundary() {
        let text = "\
scheme.family = linear_orthogonal
initial.kind = inline
initial.xs = 0, 1, 2
initial.us = 1, 2, 1
steps.count = 1
steps.tau_policy = fixed
steps.tau = 0.1
output.dir = out
output.emit = csv
";
        assert!(matches!(
            ExperimentConfig::parse(text),
            Err(ConfigError::Inconsistent(_))
        ));
        let ok = text.replace(
            "initial.us = 1, 2, 1",
            "initial.us = 1, 2, 1\nboundary.kind = hold",
        );
        assert!(ExperimentConfig::parse(&ok).is_ok());
    }

    #[test]
    fn oracle_must_solve_the_scheme() {
        // A heat-equation oracle is not a solution of the power-law scheme.
        let text = BASE
            .replace(
                "scheme.family = linear_invariant",
                "scheme.family = powerlaw_explicit\nscheme.sigma = 2.0\nscheme.n = 3.0\nscheme.sign = plus",
            );
        assert!(matches!(
            ExperimentConfig::parse(&text),
            Err(ConfigError::Inconsistent(_))
        ));
    }

    #[test]
    fn malformed_line_is_reported_with_number() {
        let text = format!("{BASE}not a pair\n");
        match ExperimentConfig::parse(&text) {
            Err(ConfigError::Malformed(line)) => assert_eq!(line, 14),
            other => panic!("expected Malformed, got {other:?}"),
        }
    }
}
