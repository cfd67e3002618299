//! Difference invariants of each equation's symmetry algebra, closed-form
//! group flows acting on mesh histories, and scheme-invariance verification.
//!
//! The invariant lists are hard-coded from the symmetry analysis of the four
//! equations; the flows are stored in closed form per operator (every
//! operator of the listed algebras exponentiates in closed form, which keeps
//! the invariance tests at round-off accuracy).

use crate::grid::{GridError, MeshLayer, Stencil, SymmetryOperator};
use crate::schemes::{history_residual, SchemeError, SchemeKind};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SymmetryError {
    #[error("division by zero: {0} vanishes")]
    DivisionByZero(&'static str),
    #[error("degenerate exponent: n = 1 makes the tau exponent undefined")]
    DegenerateExponent,
    #[error("solution value must be positive, got {0}")]
    NonPositiveValue(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("operator {0} has no closed-form flow")]
    MissingFlow(String),
    #[error("flow does not keep time layers flat (operator {0})")]
    NonFlatLayers(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
}

/// Which equation's symmetry algebra an invariant set belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Ode,
    Powerlaw,
    Semilinear,
    Linear,
}

impl Family {
    pub fn invariant_count(self) -> usize {
        match self {
            Family::Ode => 4,
            Family::Powerlaw => 7,
            Family::Semilinear => 10,
            Family::Linear => 8,
        }
    }

    pub fn invariant_names(self) -> &'static [&'static str] {
        match self {
            Family::Ode => &["I1", "I2", "I3", "I4"],
            Family::Powerlaw => &["I1", "I2", "I3", "I4", "I5", "I6", "I7"],
            Family::Semilinear => &["I1", "I2", "I3", "I4", "I5", "I6", "I7", "I8", "I9", "I10"],
            Family::Linear => &["I1", "I2", "I3", "I4", "I5", "I6", "I7", "I8"],
        }
    }
}

/// The values of a family's difference invariants on one stencil.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantSet {
    pub family: Family,
    values: Vec<f64>,
}

impl InvariantSet {
    fn new(family: Family, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), family.invariant_count());
        Self { family, values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn names(&self) -> &'static [&'static str] {
        self.family.invariant_names()
    }
}

/// Invariants of the two-operator algebra of the `u_xx = u^2` demonstrator
/// on the three-point stencil: `I1 = h+/h-`, `I2 = u+/u`, `I3 = u-/u`,
/// `I4 = (h+)^2 u`. The discrete model holds iff `I1 = 1` and
/// `I2 + I3 - 2 = I4`.
pub fn ode_invariants(
    _x: f64,
    h_plus: f64,
    h_minus: f64,
    u: f64,
    u_plus: f64,
    u_minus: f64,
) -> Result<InvariantSet, SymmetryError> {
    if h_minus == 0.0 {
        return Err(SymmetryError::DivisionByZero("h_minus"));
    }
    if u == 0.0 {
        return Err(SymmetryError::DivisionByZero("u"));
    }
    Ok(InvariantSet::new(
        Family::Ode,
        vec![
            h_plus / h_minus,
            u_plus / u,
            u_minus / u,
            h_plus * h_plus * u,
        ],
    ))
}

/// The seven invariants of the power-law algebra on the orthogonal stencil:
/// `tau^{(n-sigma-1)/(2(n-1))}/h`, `tau u^{n-1}`, and the five value ratios.
pub fn powerlaw_invariants(
    st: &Stencil,
    sigma: f64,
    n: f64,
) -> Result<InvariantSet, SymmetryError> {
    if n == 1.0 {
        return Err(SymmetryError::DegenerateExponent);
    }
    for v in [st.u, st.u_hat] {
        if !(v > 0.0) {
            return Err(SymmetryError::NonPositiveValue(v));
        }
    }
    let tau = st.tau();
    let e = (n - sigma - 1.0) / (2.0 * (n - 1.0));
    Ok(InvariantSet::new(
        Family::Powerlaw,
        vec![
            tau.powf(e) / st.h_plus,
            tau * st.u.powf(n - 1.0),
            st.u_hat / st.u,
            st.u_plus / st.u,
            st.u_minus / st.u,
            st.u_hat_plus / st.u_hat,
            st.u_hat_minus / st.u_hat,
        ],
    ))
}

fn require_positive_stencil(st: &Stencil) -> Result<(), SymmetryError> {
    for v in [
        st.u,
        st.u_plus,
        st.u_minus,
        st.u_hat,
        st.u_hat_plus,
        st.u_hat_minus,
    ] {
        if !(v > 0.0) {
            return Err(SymmetryError::NonPositiveValue(v));
        }
    }
    Ok(())
}

/// The ten invariants of the semilinear algebra on the evolutionary stencil.
/// `I1..I5` are the raw steps; `I6`, `I7` are the jumps of the
/// log-derivative on each layer; `I8`, `I9` couple the displacement to the
/// weighted log-derivatives; `I10` couples the displacement to the layer
/// values.
pub fn semilinear_invariants(st: &Stencil, delta: f64) -> Result<InvariantSet, SymmetryError> {
    if delta != 1.0 && delta != -1.0 {
        return Err(SymmetryError::InvalidParameter(format!(
            "delta = {delta}, want +-1"
        )));
    }
    require_positive_stencil(st)?;
    let tau = st.tau();
    let dx = st.dx();
    let lx = (st.u_plus.ln() - st.u.ln()) / st.h_plus;
    let lxb = (st.u.ln() - st.u_minus.ln()) / st.h_minus;
    let lhx = (st.u_hat_plus.ln() - st.u_hat.ln()) / st.h_hat_plus;
    let lhxb = (st.u_hat.ln() - st.u_hat_minus.ln()) / st.h_hat_minus;
    let hsum = st.h_plus + st.h_minus;
    let hhsum = st.h_hat_plus + st.h_hat_minus;
    let edt = (delta * tau).exp();
    let emdt = (-delta * tau).exp();
    Ok(InvariantSet::new(
        Family::Semilinear,
        vec![
            tau,
            st.h_plus,
            st.h_minus,
            st.h_hat_plus,
            st.h_hat_minus,
            lx - lxb,
            lhx - lhxb,
            delta * dx + 2.0 * (edt - 1.0) * (st.h_minus / hsum * lx + st.h_plus / hsum * lxb),
            delta * dx
                + 2.0
                    * (1.0 - emdt)
                    * (st.h_hat_minus / hhsum * lhx + st.h_hat_plus / hhsum * lhxb),
            delta * dx * dx + 4.0 * (1.0 - emdt) * (st.u_hat.ln() - edt * st.u.ln()),
        ],
    ))
}

/// The eight invariants of the six-parameter linear-heat algebra on the
/// evolutionary stencil.
pub fn linear_invariants(st: &Stencil) -> Result<InvariantSet, SymmetryError> {
    require_positive_stencil(st)?;
    let tau = st.tau();
    let dx = st.dx();
    let lp = (st.u_plus / st.u).ln();
    let lm = (st.u_minus / st.u).ln();
    let lhp = (st.u_hat_plus / st.u_hat).ln();
    let lhm = (st.u_hat_minus / st.u_hat).ln();
    let hsum = st.h_plus + st.h_minus;
    let hhsum = st.h_hat_plus + st.h_hat_minus;
    let hp2 = st.h_plus * st.h_plus;
    let hhp2 = st.h_hat_plus * st.h_hat_plus;
    Ok(InvariantSet::new(
        Family::Linear,
        vec![
            st.h_plus / st.h_minus,
            st.h_hat_plus / st.h_hat_minus,
            st.h_hat_plus * st.h_plus / tau,
            tau.sqrt() / st.h_plus * (st.u_hat / st.u) * (dx * dx / (4.0 * tau)).exp(),
            0.25 * hp2 / tau - hp2 / hsum * (lp / st.h_plus + lm / st.h_minus),
            0.25 * hhp2 / tau + hhp2 / hhsum * (lhp / st.h_hat_plus + lhm / st.h_hat_minus),
            dx * st.h_plus / tau
                + 2.0 * st.h_plus / hsum
                    * (st.h_minus / st.h_plus * lp - st.h_plus / st.h_minus * lm),
            dx * st.h_hat_plus / tau
                + 2.0 * st.h_hat_plus / hhsum
                    * (st.h_hat_minus / st.h_hat_plus * lhp - st.h_hat_plus / st.h_hat_minus * lhm),
        ],
    ))
}

fn t_shift() -> SymmetryOperator {
    SymmetryOperator::new("X1", |_, _, _| 1.0, |_, _, _| 0.0, |_, _, _| 0.0)
        .with_flow(|t, x, u, a| (t + a, x, u))
}

fn x_shift(name: &'static str) -> SymmetryOperator {
    SymmetryOperator::new(name, |_, _, _| 0.0, |_, _, _| 1.0, |_, _, _| 0.0)
        .with_flow(|t, x, u, a| (t, x + a, u))
}

/// The algebra of the `u_xx = u^2` demonstrator: the x-translation and the
/// scaling `x -> e^a x`, `u -> e^{-2a} u`.
pub fn ode_operators() -> Vec<SymmetryOperator> {
    vec![
        x_shift("X1"),
        SymmetryOperator::new("X2", |_, _, _| 0.0, |_, x, _| x, |_, _, u| -2.0 * u)
            .with_flow(|t, x, u, a| (t, a.exp() * x, (-2.0 * a).exp() * u)),
    ]
}

/// The three-parameter algebra of `u_t = (u^sigma u_x)_x +- u^n`:
/// translations in `t` and `x` plus the anisotropic scaling.
pub fn powerlaw_operators(sigma: f64, n: f64) -> Vec<SymmetryOperator> {
    let ct = 2.0 * (n - 1.0);
    let cx = n - sigma - 1.0;
    vec![
        t_shift(),
        x_shift("X2"),
        SymmetryOperator::new(
            "X3",
            move |t, _, _| ct * t,
            move |_, x, _| cx * x,
            |_, _, u| -2.0 * u,
        )
        .with_flow(move |t, x, u, a| {
            ((ct * a).exp() * t, (cx * a).exp() * x, (-2.0 * a).exp() * u)
        }),
    ]
}

/// The four-parameter algebra of `u_t = u_xx + delta u ln u`.
pub fn semilinear_operators(delta: f64) -> Vec<SymmetryOperator> {
    vec![
        t_shift(),
        x_shift("X2"),
        SymmetryOperator::new(
            "X3",
            |_, _, _| 0.0,
            move |t, _, _| 2.0 * (delta * t).exp(),
            move |t, x, u| -delta * (delta * t).exp() * x * u,
        )
        .with_flow(move |t, x, u, a| {
            let e = (delta * t).exp();
            (
                t,
                x + 2.0 * a * e,
                u * (-delta * e * (a * x + a * a * e)).exp(),
            )
        }),
        SymmetryOperator::new(
            "X4",
            |_, _, _| 0.0,
            |_, _, _| 0.0,
            move |t, _, u| (delta * t).exp() * u,
        )
        .with_flow(move |t, x, u, a| (t, x, u * (a * (delta * t).exp()).exp())),
    ]
}

/// The six-parameter algebra of the linear heat equation `u_t = u_xx`:
/// translations, the Galilean boost, the dilation, the projective operator,
/// and the scaling of `u`. The projective flow is defined for
/// `1 - 4 a t > 0` on both layers.
pub fn linear_operators() -> Vec<SymmetryOperator> {
    vec![
        t_shift(),
        x_shift("X2"),
        boost_operator(),
        SymmetryOperator::new("X4", |t, _, _| 2.0 * t, |_, x, _| x, |_, _, _| 0.0)
            .with_flow(|t, x, u, a| ((2.0 * a).exp() * t, a.exp() * x, u)),
        SymmetryOperator::new(
            "X5",
            |t, _, _| 4.0 * t * t,
            |t, x, _| 4.0 * t * x,
            |t, x, u| -(x * x + 2.0 * t) * u,
        )
        .with_flow(|t, x, u, a| {
            let s = 1.0 - 4.0 * a * t;
            (t / s, x / s, u * s.sqrt() * (-a * x * x / s).exp())
        }),
        SymmetryOperator::new("X6", |_, _, _| 0.0, |_, _, _| 0.0, |_, _, u| u)
            .with_flow(|t, x, u, a| (t, x, a.exp() * u)),
    ]
}

/// The Galilean boost of the linear heat equation:
/// `x* = x + 2 t a`, `t* = t`, `u* = u e^{-x a - t a^2}`.
pub fn boost_operator() -> SymmetryOperator {
    SymmetryOperator::new("X3", |_, _, _| 0.0, |t, _, _| 2.0 * t, |_, x, u| -x * u)
        .with_flow(|t, x, u, a| (t, x + 2.0 * t * a, u * (-x * a - t * a * a).exp()))
}

/// Applies the boost to every layer of a history. Time layers stay flat and
/// node ordering is preserved (the shift is `x`-independent).
pub fn apply_boost(history: &[MeshLayer], alpha: f64) -> Vec<MeshLayer> {
    history
        .iter()
        .map(|layer| {
            let t = layer.t();
            let xs: Vec<f64> = layer.xs().iter().map(|&x| x + 2.0 * t * alpha).collect();
            let us: Vec<f64> = layer
                .xs()
                .iter()
                .zip(layer.us())
                .map(|(&x, &u)| u * (-x * alpha - t * alpha * alpha).exp())
                .collect();
            MeshLayer::new(t, xs, us).expect("boost preserves node ordering")
        })
        .collect()
}

/// Applies an operator's closed-form flow pointwise to every layer of a
/// history. Fails if the operator has no flow or if the flow does not keep
/// the transformed layers flat.
pub fn apply_flow(
    op: &SymmetryOperator,
    history: &[MeshLayer],
    a: f64,
) -> Result<Vec<MeshLayer>, SymmetryError> {
    if !op.has_flow() {
        return Err(SymmetryError::MissingFlow(op.name.clone()));
    }
    history
        .iter()
        .map(|layer| {
            let mut t_new = f64::NAN;
            let mut xs = Vec::with_capacity(layer.len());
            let mut us = Vec::with_capacity(layer.len());
            for (&x, &u) in layer.xs().iter().zip(layer.us()) {
                let (ts, xs_i, us_i) = op.flow(layer.t(), x, u, a).unwrap();
                if xs.is_empty() {
                    t_new = ts;
                } else if (ts - t_new).abs() > 1e-9 * t_new.abs().max(1.0) {
                    return Err(SymmetryError::NonFlatLayers(op.name.clone()));
                }
                xs.push(xs_i);
                us.push(us_i);
            }
            Ok(MeshLayer::new(t_new, xs, us)?)
        })
        .collect()
}

/// Applies an operator's flow to the six points of a stencil and rebuilds it.
pub fn transform_stencil(
    op: &SymmetryOperator,
    st: &Stencil,
    a: f64,
) -> Result<Stencil, SymmetryError> {
    if !op.has_flow() {
        return Err(SymmetryError::MissingFlow(op.name.clone()));
    }
    let p = st.points();
    let mapped: Vec<(f64, f64, f64)> = p
        .iter()
        .map(|&(t, x, u)| op.flow(t, x, u, a).unwrap())
        .collect();
    for pair in [(0usize, 1usize), (1, 2), (3, 4), (4, 5)] {
        let scale = mapped[pair.0].0.abs().max(1.0);
        if (mapped[pair.0].0 - mapped[pair.1].0).abs() > 1e-9 * scale {
            return Err(SymmetryError::NonFlatLayers(op.name.clone()));
        }
    }
    Ok(Stencil::from_points(
        mapped[1].0,
        mapped[4].0,
        [
            (mapped[0].1, mapped[0].2),
            (mapped[1].1, mapped[1].2),
            (mapped[2].1, mapped[2].2),
        ],
        [
            (mapped[3].1, mapped[3].2),
            (mapped[4].1, mapped[4].2),
            (mapped[5].1, mapped[5].2),
        ],
    )?)
}

/// Scheme residuals before and after a group transformation of a discrete
/// solution history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvarianceReport {
    pub residual_before: f64,
    pub residual_after: f64,
    pub tol: f64,
}

impl InvarianceReport {
    /// True when the transformed history still satisfies the scheme.
    pub fn invariant(&self) -> bool {
        self.residual_after <= self.tol
    }
}

/// Transforms a discrete solution of `scheme` by the flow of `op` at
/// parameter `a` and evaluates the scheme residual on the transformed
/// history. For an invariant scheme the residual stays at round-off; for the
/// orthogonal heat scheme under the boost it grows with the parameter,
/// exhibiting the loss of invariance.
pub fn verify_scheme_invariance(
    scheme: &SchemeKind,
    history: &[MeshLayer],
    op: &SymmetryOperator,
    a: f64,
    tol: f64,
) -> Result<InvarianceReport, SymmetryError> {
    let residual_before = history_residual(scheme, history)?;
    let transformed = apply_flow(op, history, a)?;
    let residual_after = history_residual(scheme, &transformed)?;
    Ok(InvarianceReport {
        residual_before,
        residual_after,
        tol,
    })
}
