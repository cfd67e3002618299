//! Experiment orchestration: builds the initial layer and its oracle from a
//! config, drives the steppers, measures errors and residuals, and emits
//! CSV/SVG/summary files.

use crate::config::{BoundaryKind, ConfigError, EmitSet, ExperimentConfig, InitialSpec, TauPolicy};
use crate::{csv_io, svg};
use heatsym::exact::{BlowupSpec, ExactError, Fundamental, LinearExact, SemilinearExact};
use heatsym::grid::{
    check_flat_time_layers, check_orthogonality, check_space_uniformity, check_time_uniformity,
    GridError, ProbeGrid, Stencil, SymmetryOperator, CONDITION_TOL,
};
use heatsym::schemes::{
    history_residual, step_burgers_potential, step_linear_invariant, step_linear_orthogonal,
    step_powerlaw_explicit, step_powerlaw_implicit, step_semilinear, EndNodes, NewtonOptions,
    SchemeError, SchemeKind,
};
use heatsym::symmetry::{
    apply_boost, linear_invariants, linear_operators, ode_invariants, powerlaw_invariants,
    powerlaw_operators, semilinear_invariants, semilinear_operators, InvariantSet, SymmetryError,
};
use heatsym::MeshLayer;
use std::path::Path;
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("the two configs do not share an oracle")]
    OracleMismatch,
    #[error("unknown operator set `{0}` (want powerlaw | semilinear | linear)")]
    UnknownSet(String),
    #[error("stencil file: {0}")]
    StencilFile(String),
    #[error("{0}")]
    Usage(String),
}

impl HarnessError {
    /// Exit code policy: 2 for usage/parse problems, 1 for numerical or i/o
    /// failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::Config(_)
            | HarnessError::OracleMismatch
            | HarnessError::UnknownSet(_)
            | HarnessError::StencilFile(_)
            | HarnessError::Usage(_) => 2,
            _ => 1,
        }
    }
}

/// The exact solution a run is validated against, with the boost composed in
/// where configured.
#[derive(Clone)]
enum Oracle {
    Fundamental { sol: Fundamental, boost: f64 },
    Linear { sol: LinearExact, boost: f64 },
    Semilinear { sol: SemilinearExact, f: Vec<f64> },
    Blowup { spec: BlowupSpec, theta: Vec<f64> },
}

impl Oracle {
    /// Solution value at `(x, t)`; `step` resolves the discrete-time oracles.
    fn value(&self, step: usize, t: f64, x: f64) -> Result<f64, ExactError> {
        match self {
            Oracle::Fundamental { sol, boost } => {
                let y = x - 2.0 * boost * t;
                Ok(sol.eval(y, t)? * (-boost * y - boost * boost * t).exp())
            }
            Oracle::Linear { sol, boost } => {
                let y = x - 2.0 * boost * t;
                Ok(sol.eval(y, t)? * (-boost * y - boost * boost * t).exp())
            }
            Oracle::Semilinear { sol, f } => sol.eval_with_f(x, t, f[step]),
            Oracle::Blowup { spec, theta } => {
                let k = (x / spec.h()).round() as usize;
                Ok(spec.amplitude(step) * theta[k.min(theta.len() - 1)])
            }
        }
    }

    /// Where the node at `(x_old, t_old)` sits at `t_new` on the exact
    /// trajectories of this solution.
    fn end_position(&self, x_old: f64, t_old: f64, t_new: f64) -> f64 {
        match self {
            Oracle::Fundamental { boost, .. } => {
                let base = x_old - 2.0 * boost * t_old;
                base * t_new / t_old + 2.0 * boost * t_new
            }
            Oracle::Linear { sol, boost } => {
                let base = x_old - 2.0 * boost * t_old;
                base * (t_new + sol.alpha) / (t_old + sol.alpha) + 2.0 * boost * t_new
            }
            Oracle::Semilinear { sol, .. } => {
                x_old * ((sol.delta * t_new).exp() + sol.alpha)
                    / ((sol.delta * t_old).exp() + sol.alpha)
            }
            Oracle::Blowup { .. } => x_old,
        }
    }
}

/// Report of one run: per-layer max relative error against the oracle (when
/// one is configured), per-step normalized residual norms, wall time, and
/// the step-rejection count (always zero on success; a rejected step aborts
/// the run rather than being silently repaired).
#[derive(Debug, Clone)]
pub struct RunReport {
    pub history: Vec<MeshLayer>,
    pub layer_errors: Option<Vec<f64>>,
    pub residual_norms: Vec<f64>,
    pub wall_time: Duration,
    pub rejections: usize,
}

impl RunReport {
    pub fn final_error(&self) -> Option<f64> {
        self.layer_errors.as_ref().and_then(|e| e.last().copied())
    }

    pub fn times(&self) -> Vec<f64> {
        self.history.iter().map(|l| l.t()).collect()
    }
}

struct Prepared {
    layer: MeshLayer,
    oracle: Option<Oracle>,
    /// True when the run is the potential-Burgers image of a linear oracle:
    /// layer values and oracle comparisons go through w = -2 ln u.
    hopf: bool,
}

fn linspace(x_min: f64, x_max: f64, nodes: usize) -> Vec<f64> {
    let h = (x_max - x_min) / (nodes - 1) as f64;
    (0..nodes).map(|i| x_min + h * i as f64).collect()
}

fn prepare(cfg: &ExperimentConfig) -> Result<Prepared, HarnessError> {
    let hopf = matches!(cfg.scheme, SchemeKind::BurgersPotential);
    let (layer, oracle) = match &cfg.initial {
        InitialSpec::Fundamental {
            c,
            t0,
            x_min,
            x_max,
            nodes,
        } => {
            let sol = Fundamental { c: *c };
            let xs = linspace(*x_min, *x_max, *nodes);
            let us = xs
                .iter()
                .map(|&x| sol.eval(x, *t0))
                .collect::<Result<_, _>>()?;
            let mut layer = MeshLayer::new(*t0, xs, us)?;
            if cfg.boost != 0.0 {
                layer = apply_boost(std::slice::from_ref(&layer), cfg.boost)
                    .pop()
                    .unwrap();
            }
            (
                layer,
                Some(Oracle::Fundamental {
                    sol,
                    boost: cfg.boost,
                }),
            )
        }
        InitialSpec::Linear {
            alpha,
            f0,
            t0,
            x_min,
            x_max,
            nodes,
        } => {
            let sol = LinearExact {
                alpha: *alpha,
                f0: *f0,
            };
            let xs = linspace(*x_min, *x_max, *nodes);
            let us = xs
                .iter()
                .map(|&x| sol.eval(x, *t0))
                .collect::<Result<_, _>>()?;
            let mut layer = MeshLayer::new(*t0, xs, us)?;
            if cfg.boost != 0.0 {
                layer = apply_boost(std::slice::from_ref(&layer), cfg.boost)
                    .pop()
                    .unwrap();
            }
            (
                layer,
                Some(Oracle::Linear {
                    sol,
                    boost: cfg.boost,
                }),
            )
        }
        InitialSpec::Semilinear {
            alpha,
            f0,
            x_min,
            x_max,
            nodes,
        } => {
            let SchemeKind::Semilinear { delta } = cfg.scheme else {
                return Err(ConfigError::Inconsistent(
                    "initial.kind = semilinear pairs with scheme.family = semilinear".into(),
                )
                .into());
            };
            let TauPolicy::Fixed(tau) = cfg.tau else {
                unreachable!("checked at parse time");
            };
            let sol = SemilinearExact::new(*alpha, *f0, delta, tau)?;
            let f = sol.f_values(cfg.steps)?;
            let xs = linspace(*x_min, *x_max, *nodes);
            let us = xs
                .iter()
                .map(|&x| sol.initial(x))
                .collect::<Result<_, _>>()?;
            (
                MeshLayer::new(0.0, xs, us)?,
                Some(Oracle::Semilinear { sol, f }),
            )
        }
        InitialSpec::Blowup { rho, m } => {
            let SchemeKind::PowerlawImplicit { sigma, .. } = cfg.scheme else {
                return Err(ConfigError::Inconsistent(
                    "initial.kind = blowup pairs with scheme.family = powerlaw_implicit".into(),
                )
                .into());
            };
            let spec = BlowupSpec::new(sigma, *rho, *m)?;
            let theta = spec.profile()?;
            (
                MeshLayer::new(0.0, spec.mesh(), theta.clone())?,
                Some(Oracle::Blowup { spec, theta }),
            )
        }
        InitialSpec::Inline { t0, xs, us } => (MeshLayer::new(*t0, xs.clone(), us.clone())?, None),
    };

    if hopf {
        if oracle.is_none() {
            return Ok(Prepared {
                layer,
                oracle: None,
                hopf: false,
            });
        }
        let layer = heatsym::schemes::hopf_map(std::slice::from_ref(&layer))?
            .pop()
            .unwrap();
        return Ok(Prepared {
            layer,
            oracle,
            hopf: true,
        });
    }
    Ok(Prepared {
        layer,
        oracle,
        hopf,
    })
}

fn tau_for_step(
    cfg: &ExperimentConfig,
    prepared: &Prepared,
    j: usize,
) -> Result<f64, HarnessError> {
    match cfg.tau {
        TauPolicy::Fixed(v) => Ok(v),
        TauPolicy::Cfl(c) => {
            let layer = &prepared.layer;
            if !layer.is_uniform(1e-9) {
                return Err(SchemeError::NonUniformMesh.into());
            }
            Ok(c * layer.step(0) * layer.step(0))
        }
        TauPolicy::Blowup => match &prepared.oracle {
            Some(Oracle::Blowup { spec, .. }) => Ok(spec.tau_j(j)),
            _ => unreachable!("checked at parse time"),
        },
    }
}

/// Max pointwise relative error of a layer against the oracle; nodes where
/// the oracle vanishes (blow-up arch endpoints) are skipped.
fn layer_error(
    layer: &MeshLayer,
    step: usize,
    oracle: &Oracle,
    hopf: bool,
) -> Result<f64, HarnessError> {
    let mut worst: f64 = 0.0;
    for (&x, &v) in layer.xs().iter().zip(layer.us()) {
        let mut e = oracle.value(step, layer.t(), x)?;
        if e == 0.0 {
            continue;
        }
        if hopf {
            e = -2.0 * e.ln();
            if e == 0.0 {
                continue;
            }
        }
        worst = worst.max(((v - e) / e).abs());
    }
    Ok(worst)
}

/// Runs one experiment and writes the configured outputs.
pub fn run(cfg: &ExperimentConfig) -> Result<RunReport, HarnessError> {
    let start = Instant::now();
    let prepared = prepare(cfg)?;
    let oracle = prepared.oracle.clone();
    let hopf = prepared.hopf;

    // The moving-mesh schemes take their end nodes along the oracle's
    // trajectories; the static schemes keep the ends in place and read the
    // oracle there.
    let moving_ends = matches!(
        cfg.scheme,
        SchemeKind::Semilinear { .. } | SchemeKind::LinearInvariant | SchemeKind::BurgersPotential
    );
    let bc_ends = |layer: &MeshLayer, t_new: f64, step: usize| -> Result<EndNodes, HarnessError> {
        let last = layer.len() - 1;
        match (&oracle, cfg.boundary) {
            (Some(orc), BoundaryKind::Exact) => {
                let (xl, xr) = if moving_ends {
                    (
                        orc.end_position(layer.xs()[0], layer.t(), t_new),
                        orc.end_position(layer.xs()[last], layer.t(), t_new),
                    )
                } else {
                    (layer.xs()[0], layer.xs()[last])
                };
                let mut ul = orc.value(step, t_new, xl)?;
                let mut ur = orc.value(step, t_new, xr)?;
                if hopf {
                    ul = -2.0 * ul.ln();
                    ur = -2.0 * ur.ln();
                }
                Ok(EndNodes {
                    x_left: xl,
                    u_left: ul,
                    x_right: xr,
                    u_right: ur,
                })
            }
            _ => Ok(EndNodes {
                x_left: layer.xs()[0],
                u_left: layer.us()[0],
                x_right: layer.xs()[last],
                u_right: layer.us()[last],
            }),
        }
    };

    let mut history = vec![prepared.layer.clone()];
    let mut residual_norms = Vec::with_capacity(cfg.steps);
    for j in 0..cfg.steps {
        let layer = history.last().unwrap();
        let tau = tau_for_step(cfg, &prepared, j)?;
        let t_new = layer.t() + tau;
        let ends = bc_ends(layer, t_new, j + 1)?;
        let value_ends = (ends.u_left, ends.u_right);
        let new = match cfg.scheme {
            SchemeKind::PowerlawExplicit { sigma, n, sign } => {
                step_powerlaw_explicit(layer, tau, sigma, n, sign, |_, _| value_ends)?
            }
            SchemeKind::PowerlawImplicit { sigma, n } => {
                // Steer Newton to the blow-up branch with the self-similar
                // predictor when running on the blow-up mesh.
                let predictor: Option<Vec<f64>> = match &oracle {
                    Some(Oracle::Blowup { spec, .. }) => {
                        Some(layer.us().iter().map(|&u| spec.rho * u).collect())
                    }
                    _ => None,
                };
                step_powerlaw_implicit(
                    layer,
                    tau,
                    sigma,
                    n,
                    |_, _| value_ends,
                    &NewtonOptions::default(),
                    predictor.as_deref(),
                )?
            }
            SchemeKind::Semilinear { delta } => step_semilinear(layer, tau, delta, |_, _| ends)?,
            SchemeKind::LinearInvariant => step_linear_invariant(layer, tau, |_, _| ends)?,
            SchemeKind::LinearOrthogonal => step_linear_orthogonal(layer, tau, |_, _| value_ends)?,
            SchemeKind::BurgersPotential => step_burgers_potential(layer, tau, |_, _| ends)?,
            SchemeKind::OdeU2 => unreachable!("rejected at parse time"),
        };
        let pair = [history.last().unwrap().clone(), new.clone()];
        residual_norms.push(history_residual(&cfg.scheme, &pair)?);
        history.push(new);
    }

    let layer_errors = match &oracle {
        Some(orc) => {
            let mut errs = Vec::with_capacity(history.len());
            for (j, layer) in history.iter().enumerate() {
                errs.push(layer_error(layer, j, orc, hopf)?);
            }
            Some(errs)
        }
        None => None,
    };

    let report = RunReport {
        history,
        layer_errors,
        residual_norms,
        wall_time: start.elapsed(),
        rejections: 0,
    };
    emit_run(cfg, &report)?;
    Ok(report)
}

fn emit_run(cfg: &ExperimentConfig, report: &RunReport) -> Result<(), HarnessError> {
    let EmitSet {
        csv,
        svg: do_svg,
        summary,
    } = cfg.emit;
    if !(csv || do_svg || summary) {
        return Ok(());
    }
    std::fs::create_dir_all(&cfg.output)?;
    if csv {
        csv_io::write_layers(&cfg.output.join("layers.csv"), &report.history)?;
    }
    if do_svg {
        // Solution profiles on up to 9 evenly spaced layers.
        let n = report.history.len();
        let picks: Vec<usize> = if n <= 9 {
            (0..n).collect()
        } else {
            (0..9).map(|k| k * (n - 1) / 8).collect()
        };
        let series: Vec<svg::Series> = picks
            .iter()
            .map(|&j| {
                let layer = &report.history[j];
                svg::Series {
                    label: format!("t = {:.4}", layer.t()),
                    points: layer
                        .xs()
                        .iter()
                        .copied()
                        .zip(layer.us().iter().copied())
                        .collect(),
                }
            })
            .collect();
        svg::write_plot(
            &cfg.output.join("solution.svg"),
            "solution layers",
            "x",
            "u",
            &series,
        )?;
        // Node trajectories in the (t, x) plane.
        let nodes = report.history[0].len();
        let mesh_series: Vec<svg::Series> = (0..nodes)
            .map(|i| svg::Series {
                label: String::new(),
                points: report.history.iter().map(|l| (l.t(), l.xs()[i])).collect(),
            })
            .collect();
        svg::write_plot(
            &cfg.output.join("mesh.svg"),
            "mesh evolution",
            "t",
            "x",
            &mesh_series,
        )?;
    }
    if summary {
        let mut text = String::new();
        text.push_str(&format!("scheme = {:?}\n", cfg.scheme));
        text.push_str(&format!("steps = {}\n", cfg.steps));
        text.push_str(&format!("layers = {}\n", report.history.len()));
        text.push_str(&format!(
            "final_t = {}\n",
            csv_io::fmt(report.history.last().unwrap().t())
        ));
        if let Some(errs) = &report.layer_errors {
            text.push_str(&format!(
                "final_error = {}\n",
                csv_io::fmt(*errs.last().unwrap())
            ));
            text.push_str(&format!(
                "max_layer_error = {}\n",
                csv_io::fmt(errs.iter().copied().fold(0.0, f64::max))
            ));
        }
        text.push_str(&format!(
            "max_residual = {}\n",
            csv_io::fmt(report.residual_norms.iter().copied().fold(0.0, f64::max))
        ));
        text.push_str(&format!("rejections = {}\n", report.rejections));
        std::fs::write(cfg.output.join("summary.txt"), text)?;
    }
    Ok(())
}

/// One aligned row of a comparison: the two runs' errors at a common time.
#[derive(Debug, Clone, Copy)]
pub struct CompareRow {
    pub t: f64,
    pub err_a: f64,
    pub err_b: f64,
    /// `err_b / err_a`.
    pub ratio: f64,
}

#[derive(Debug)]
pub struct ComparisonReport {
    pub rows: Vec<CompareRow>,
    pub report_a: RunReport,
    pub report_b: RunReport,
}

/// Runs two configs against the shared oracle (concurrently) and aligns
/// their per-layer errors at common times.
pub fn compare(
    cfg_a: &ExperimentConfig,
    cfg_b: &ExperimentConfig,
    out_dir: &Path,
) -> Result<ComparisonReport, HarnessError> {
    let (key_a, key_b) = (cfg_a.oracle_key(), cfg_b.oracle_key());
    if key_a.is_none() || key_a != key_b {
        return Err(HarnessError::OracleMismatch);
    }

    let (res_a, res_b) = std::thread::scope(|scope| {
        let ha = scope.spawn(|| run(cfg_a));
        let hb = scope.spawn(|| run(cfg_b));
        (
            ha.join().expect("run thread"),
            hb.join().expect("run thread"),
        )
    });
    let report_a = res_a?;
    let report_b = res_b?;

    let times_a = report_a.times();
    let times_b = report_b.times();
    let errs_a = report_a.layer_errors.as_ref().expect("oracle checked");
    let errs_b = report_b.layer_errors.as_ref().expect("oracle checked");
    let mut rows = Vec::new();
    let mut ib = 0usize;
    for (ia, &ta) in times_a.iter().enumerate() {
        while ib < times_b.len() && times_b[ib] < ta - 1e-9 * ta.abs().max(1.0) {
            ib += 1;
        }
        if ib < times_b.len() && (times_b[ib] - ta).abs() <= 1e-9 * ta.abs().max(1.0) {
            let (err_a, err_b) = (errs_a[ia], errs_b[ib]);
            rows.push(CompareRow {
                t: ta,
                err_a,
                err_b,
                ratio: err_b / err_a.max(f64::MIN_POSITIVE),
            });
        }
    }

    std::fs::create_dir_all(out_dir)?;
    let mut text = String::from("t,err_a,err_b,ratio\n");
    for r in &rows {
        text.push_str(&format!(
            "{},{},{},{}\n",
            csv_io::fmt(r.t),
            csv_io::fmt(r.err_a),
            csv_io::fmt(r.err_b),
            csv_io::fmt(r.ratio)
        ));
    }
    std::fs::write(out_dir.join("comparison.csv"), text)?;

    let log_floor = 1e-18f64;
    let curve = |pick: fn(&CompareRow) -> f64, label: &str| svg::Series {
        label: label.to_string(),
        points: rows
            .iter()
            .map(|r| (r.t, pick(r).max(log_floor).log10()))
            .collect(),
    };
    svg::write_plot(
        &out_dir.join("error.svg"),
        "per-layer error (log10)",
        "t",
        "log10 max relative error",
        &[curve(|r| r.err_a, "run A"), curve(|r| r.err_b, "run B")],
    )?;

    let summary = format!(
        "aligned_layers = {}\nfinal_err_a = {}\nfinal_err_b = {}\nfinal_ratio = {}\n",
        rows.len(),
        csv_io::fmt(rows.last().map(|r| r.err_a).unwrap_or(f64::NAN)),
        csv_io::fmt(rows.last().map(|r| r.err_b).unwrap_or(f64::NAN)),
        csv_io::fmt(rows.last().map(|r| r.ratio).unwrap_or(f64::NAN)),
    );
    std::fs::write(out_dir.join("summary.txt"), summary)?;

    Ok(ComparisonReport {
        rows,
        report_a,
        report_b,
    })
}

/// One operator's verdicts for the four mesh-geometry conditions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionRow {
    pub operator: String,
    pub time_uniform: bool,
    pub space_uniform: bool,
    pub orthogonal: bool,
    pub flat_layers: bool,
}

/// Evaluates the four mesh conditions for every operator of the named set on
/// the default probe grid. The power-law set is instantiated at the blow-up
/// parameters (sigma = 2, n = 3) and the semilinear set at delta = +1; the
/// verdicts do not depend on these choices.
pub fn check_mesh(set: &str) -> Result<Vec<ConditionRow>, HarnessError> {
    let ops: Vec<SymmetryOperator> = match set {
        "powerlaw" => powerlaw_operators(2.0, 3.0),
        "semilinear" => semilinear_operators(1.0),
        "linear" => linear_operators(),
        other => return Err(HarnessError::UnknownSet(other.to_string())),
    };
    let grid = ProbeGrid::default();
    Ok(ops
        .iter()
        .map(|op| ConditionRow {
            operator: op.name.clone(),
            time_uniform: check_time_uniformity(op, &grid, CONDITION_TOL),
            space_uniform: check_space_uniformity(op, &grid, CONDITION_TOL),
            orthogonal: check_orthogonality(op, &grid, CONDITION_TOL),
            flat_layers: check_flat_time_layers(op, &grid, CONDITION_TOL),
        })
        .collect())
}

fn stencil_entries(path: &Path) -> Result<std::collections::BTreeMap<String, f64>, HarnessError> {
    let text = std::fs::read_to_string(path)?;
    let mut map = std::collections::BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(HarnessError::StencilFile(format!(
                "line {}: expected `key = value`",
                idx + 1
            )));
        };
        let v: f64 = value.trim().parse().map_err(|_| {
            HarnessError::StencilFile(format!("line {}: bad number `{}`", idx + 1, value.trim()))
        })?;
        map.insert(key.trim().to_string(), v);
    }
    Ok(map)
}

fn stencil_from_file(path: &Path) -> Result<Stencil, HarnessError> {
    let map = stencil_entries(path)?;
    let get = |k: &str| -> Result<f64, HarnessError> {
        map.get(k)
            .copied()
            .ok_or_else(|| HarnessError::StencilFile(format!("missing key `{k}`")))
    };
    Stencil::new(
        get("t")?,
        get("t_hat")?,
        get("x")?,
        get("x_hat")?,
        get("h_plus")?,
        get("h_minus")?,
        get("h_hat_plus")?,
        get("h_hat_minus")?,
        get("u")?,
        get("u_plus")?,
        get("u_minus")?,
        get("u_hat")?,
        get("u_hat_plus")?,
        get("u_hat_minus")?,
    )
    .map_err(HarnessError::from)
}

/// Evaluates a family's difference invariants on a stencil file.
/// The ODE family reads the keys `x, h_plus, h_minus, u, u_plus, u_minus`;
/// the evolutionary families read the full fourteen-variable stencil.
pub fn invariants_from_file(
    family: &str,
    path: &Path,
    sigma: Option<f64>,
    n: Option<f64>,
    delta: Option<f64>,
) -> Result<InvariantSet, HarnessError> {
    let need = |opt: Option<f64>, what: &str| -> Result<f64, HarnessError> {
        opt.ok_or_else(|| HarnessError::Usage(format!("family `{family}` needs --{what}")))
    };
    match family {
        "ode" => {
            let map = stencil_entries(path)?;
            let get = |k: &str| -> Result<f64, HarnessError> {
                map.get(k)
                    .copied()
                    .ok_or_else(|| HarnessError::StencilFile(format!("missing key `{k}`")))
            };
            Ok(ode_invariants(
                get("x")?,
                get("h_plus")?,
                get("h_minus")?,
                get("u")?,
                get("u_plus")?,
                get("u_minus")?,
            )?)
        }
        "powerlaw" => {
            let st = stencil_from_file(path)?;
            Ok(powerlaw_invariants(
                &st,
                need(sigma, "sigma")?,
                need(n, "n")?,
            )?)
        }
        "semilinear" => {
            let st = stencil_from_file(path)?;
            Ok(semilinear_invariants(&st, need(delta, "delta")?)?)
        }
        "linear" => {
            let st = stencil_from_file(path)?;
            Ok(linear_invariants(&st)?)
        }
        other => Err(HarnessError::UnknownSet(other.to_string())),
    }
}
