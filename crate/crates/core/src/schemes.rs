//! Residuals and time steppers for the discrete models.
//!
//! Every scheme is defined by one or two algebraic equations on the six-point
//! stencil. `residual` evaluates them as written (left minus right);
//! the `step_*` functions advance one flat time layer to the next, taking a
//! boundary closure that supplies the two end nodes of the new layer
//! (values, and positions for the moving-mesh models; the validation runs
//! feed these from the exact solutions).

use crate::grid::{extract_stencils, GridError, MeshLayer, Stencil};
use thiserror::Error;

/// Relative tolerance used to decide whether a stencil satisfies the
/// geometric preconditions of the orthogonal families (uniform static mesh).
pub const GEOMETRY_RTOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum SchemeError {
    #[error("solution value must be positive: {0}")]
    NonPositiveValue(f64),
    #[error("stencil violates the scheme geometry: {0}")]
    GeometryViolation(String),
    #[error("scheme requires a uniform mesh")]
    NonUniformMesh,
    #[error("fractional power of a negative value (sigma = {sigma}, u = {u})")]
    NegativePower { sigma: f64, u: f64 },
    #[error("Newton did not converge after {iters} iterations (residual {residual})")]
    NewtonDivergence { iters: usize, residual: f64 },
    #[error("Newton iterate left the positive cone and damping failed")]
    NonPositiveIterate,
    #[error("step rejected: {0}")]
    StepRejected(String),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Sign of the source term `+-u^n` in the explicit power-law scheme.
/// `Off` disables the source, leaving the bare diffusion step for
/// baseline checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceSign {
    Plus,
    Minus,
    Off,
}

impl SourceSign {
    pub fn factor(self) -> f64 {
        match self {
            SourceSign::Plus => 1.0,
            SourceSign::Minus => -1.0,
            SourceSign::Off => 0.0,
        }
    }
}

/// Identifier and parameters of one of the discrete models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SchemeKind {
    /// Three-point analog of the stationary equation `u_xx = u^2` on a
    /// uniform mesh.
    OdeU2,
    /// Explicit conservative scheme for `u_t = (u^sigma u_x)_x +- u^n` on an
    /// orthogonal uniform mesh.
    PowerlawExplicit {
        sigma: f64,
        n: f64,
        sign: SourceSign,
    },
    /// Implicit scheme `(uhat - u)/tau = (uhat^{sigma+1})_{xbar x} + uhat^n`;
    /// `n = sigma + 1` is the blow-up case.
    PowerlawImplicit { sigma: f64, n: f64 },
    /// Explicit moving-mesh model for `u_t = u_xx + delta u ln u`.
    Semilinear { delta: f64 },
    /// Moving-mesh model for the linear heat equation with explicit
    /// equations for the solution and the node trajectory.
    LinearInvariant,
    /// Classical explicit heat step on a fixed orthogonal mesh (the
    /// noninvariant baseline).
    LinearOrthogonal,
    /// Moving-mesh model for the potential Burgers equation
    /// `w_t + w_x^2/2 = w_xx`; the layer values are `w`.
    BurgersPotential,
}

impl SchemeKind {
    /// Number of equations defining the model (1 for single-equation
    /// schemes, 2 for the moving-mesh pairs).
    pub fn equation_count(&self) -> usize {
        match self {
            SchemeKind::Semilinear { .. }
            | SchemeKind::LinearInvariant
            | SchemeKind::BurgersPotential => 2,
            _ => 1,
        }
    }

    /// True for the families that require positive solution values
    /// (they take logarithms).
    pub fn needs_positive(&self) -> bool {
        matches!(
            self,
            SchemeKind::Semilinear { .. } | SchemeKind::LinearInvariant
        )
    }

    fn is_orthogonal_family(&self) -> bool {
        matches!(
            self,
            SchemeKind::OdeU2
                | SchemeKind::PowerlawExplicit { .. }
                | SchemeKind::PowerlawImplicit { .. }
                | SchemeKind::LinearOrthogonal
        )
    }
}

/// Options for the Newton iterations of the implicit steppers.
#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub max_iter: usize,
    pub abs_tol: f64,
    /// Initial step factor in (0, 1]; the step is halved further whenever an
    /// iterate would leave the admissible cone.
    pub damping: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            max_iter: 50,
            abs_tol: 1e-12,
            damping: 1.0,
        }
    }
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= GEOMETRY_RTOL * scale
}

fn check_orthogonal_geometry(st: &Stencil) -> Result<(), SchemeError> {
    let scale = st.h_plus.abs().max(st.h_minus.abs());
    if !(close(st.h_plus, st.h_minus, scale)
        && close(st.h_hat_plus, st.h_plus, scale)
        && close(st.h_hat_minus, st.h_minus, scale))
    {
        return Err(SchemeError::GeometryViolation(
            "steps must be uniform across both layers".into(),
        ));
    }
    if !close(st.dx(), 0.0, scale) {
        return Err(SchemeError::GeometryViolation(format!(
            "orthogonal stencil moved by dx = {}",
            st.dx()
        )));
    }
    Ok(())
}

/// Each scheme equation decomposed into its additive terms, moved to one
/// side (the residual is the term sum). Keeping the terms separate lets the
/// normalized residual be scaled by the largest term magnitude, which stays
/// meaningful where the sum cancels to round-off. Positivity is enforced
/// for the log-based families; the geometric preconditions of the
/// orthogonal families are not (see [`residual`] for the checked entry
/// point).
fn equation_terms(scheme: &SchemeKind, st: &Stencil) -> Result<Vec<Vec<f64>>, SchemeError> {
    if scheme.needs_positive() && !st.all_positive() {
        let worst = [
            st.u,
            st.u_plus,
            st.u_minus,
            st.u_hat,
            st.u_hat_plus,
            st.u_hat_minus,
        ]
        .into_iter()
        .fold(f64::INFINITY, f64::min);
        return Err(SchemeError::NonPositiveValue(worst));
    }
    let tau = st.tau();
    let hsum = st.h_plus + st.h_minus;
    Ok(match *scheme {
        SchemeKind::OdeU2 => {
            let h2 = st.h_plus * st.h_plus;
            vec![vec![
                st.u_plus / h2,
                -2.0 * st.u / h2,
                st.u_minus / h2,
                -st.u * st.u,
            ]]
        }
        SchemeKind::PowerlawExplicit { sigma, n, sign } => {
            if sigma.fract() != 0.0 {
                for u in [st.u, st.u_plus, st.u_minus] {
                    if u < 0.0 {
                        return Err(SchemeError::NegativePower { sigma, u });
                    }
                }
            }
            let h = st.h_plus;
            let ux = (st.u_plus - st.u) / h;
            let uxb = (st.u - st.u_minus) / h;
            vec![vec![
                (st.u_hat - st.u) / tau,
                -((st.u_plus + st.u) / 2.0).powf(sigma) * ux / h,
                ((st.u + st.u_minus) / 2.0).powf(sigma) * uxb / h,
                -sign.factor() * st.u.powf(n),
            ]]
        }
        SchemeKind::PowerlawImplicit { sigma, n } => {
            if sigma.fract() != 0.0 {
                for u in [st.u_hat, st.u_hat_plus, st.u_hat_minus] {
                    if u < 0.0 {
                        return Err(SchemeError::NegativePower { sigma, u });
                    }
                }
            }
            let h2 = st.h_plus * st.h_plus;
            let p = sigma + 1.0;
            vec![vec![
                (st.u_hat - st.u) / tau,
                -st.u_hat_plus.powf(p) / h2,
                2.0 * st.u_hat.powf(p) / h2,
                -st.u_hat_minus.powf(p) / h2,
                -st.u_hat.powf(n),
            ]]
        }
        SchemeKind::Semilinear { delta } => {
            let edt = (delta * tau).exp();
            let emdt = (-delta * tau).exp();
            let lx = (st.u_plus.ln() - st.u.ln()) / st.h_plus;
            let lxb = (st.u.ln() - st.u_minus.ln()) / st.h_minus;
            let c = 8.0 / delta * (edt - 1.0) * (edt - 1.0) / hsum;
            vec![
                vec![
                    delta * st.dx(),
                    2.0 * (edt - 1.0) * st.h_minus / hsum * lx,
                    2.0 * (edt - 1.0) * st.h_plus / hsum * lxb,
                ],
                vec![
                    delta * st.dx() * st.dx(),
                    4.0 * (1.0 - emdt) * (st.u_hat.ln() - edt * st.u.ln()),
                    -c * lx,
                    c * lxb,
                ],
            ]
        }
        SchemeKind::LinearInvariant => {
            let lp = (st.u_plus / st.u).ln();
            let lm = (st.u_minus / st.u).ln();
            vec![
                vec![
                    st.dx(),
                    2.0 * tau / hsum * (st.h_minus / st.h_plus) * lp,
                    -2.0 * tau / hsum * (st.h_plus / st.h_minus) * lm,
                ],
                vec![
                    (st.u / st.u_hat).powi(2) * (-st.dx() * st.dx() / (2.0 * tau)).exp(),
                    -1.0,
                    4.0 * tau / hsum * lp / st.h_plus,
                    4.0 * tau / hsum * lm / st.h_minus,
                ],
            ]
        }
        SchemeKind::LinearOrthogonal => {
            let h2 = st.h_plus * st.h_plus;
            vec![vec![
                (st.u_hat - st.u) / tau,
                -st.u_plus / h2,
                2.0 * st.u / h2,
                -st.u_minus / h2,
            ]]
        }
        SchemeKind::BurgersPotential => {
            let wx = (st.u_plus - st.u) / st.h_plus;
            let wxb = (st.u - st.u_minus) / st.h_minus;
            let wxxb = 2.0 * (wx - wxb) / hsum;
            vec![
                vec![
                    st.dx(),
                    -tau * st.h_minus / hsum * wx,
                    -tau * st.h_plus / hsum * wxb,
                ],
                vec![
                    (st.u_hat - st.u - st.dx() * st.dx() / (2.0 * tau)).exp(),
                    -1.0,
                    -tau * wxxb,
                ],
            ]
        }
    })
}

/// Residual of each scheme equation, left minus right. The orthogonal
/// families reject stencils that moved or have non-uniform steps.
pub fn residual(scheme: &SchemeKind, st: &Stencil) -> Result<Vec<f64>, SchemeError> {
    if scheme.is_orthogonal_family() {
        check_orthogonal_geometry(st)?;
    }
    Ok(equation_terms(scheme, st)?
        .into_iter()
        .map(|terms| terms.into_iter().sum())
        .collect())
}

/// Residual of each equation normalized by the magnitude of its largest
/// term, so different equations are comparable and the scale survives
/// cancellation of the sum. Zero when every term vanishes.
pub fn residual_normalized(scheme: &SchemeKind, st: &Stencil) -> Result<Vec<f64>, SchemeError> {
    Ok(equation_terms(scheme, st)?
        .into_iter()
        .map(|terms| {
            let scale = terms.iter().fold(0.0f64, |a, t| a.max(t.abs()));
            if scale == 0.0 {
                0.0
            } else {
                terms.iter().sum::<f64>() / scale
            }
        })
        .collect())
}

/// Maximum normalized residual of the scheme over all interior stencils of a
/// layer history. Geometry preconditions are not enforced, so this can
/// evaluate a scheme on a group-transformed history (the invariance
/// diagnostic); `OdeU2` is evaluated per layer on its three-point stencils.
pub fn history_residual(scheme: &SchemeKind, history: &[MeshLayer]) -> Result<f64, SchemeError> {
    let mut worst: f64 = 0.0;
    if let SchemeKind::OdeU2 = scheme {
        for layer in history {
            let h2 = layer.step(0) * layer.step(0);
            for i in 1..layer.len() - 1 {
                let us = layer.us();
                let terms = [
                    us[i + 1] / h2,
                    -2.0 * us[i] / h2,
                    us[i - 1] / h2,
                    -us[i] * us[i],
                ];
                let scale = terms.iter().fold(0.0f64, |a, t| a.max(t.abs()));
                if scale > 0.0 {
                    worst = worst.max((terms.iter().sum::<f64>() / scale).abs());
                }
            }
        }
        return Ok(worst);
    }
    for pair in history.windows(2) {
        for st in extract_stencils(&pair[0], &pair[1])? {
            for r in residual_normalized(scheme, &st)? {
                worst = worst.max(r.abs());
            }
        }
    }
    Ok(worst)
}

/// End nodes of a new layer as supplied by a boundary closure:
/// positions and values of the leftmost and rightmost node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndNodes {
    pub x_left: f64,
    pub u_left: f64,
    pub x_right: f64,
    pub u_right: f64,
}

fn require_uniform(layer: &MeshLayer) -> Result<f64, SchemeError> {
    if !layer.is_uniform(GEOMETRY_RTOL) {
        return Err(SchemeError::NonUniformMesh);
    }
    Ok(layer.step(0))
}

fn require_positive(layer: &MeshLayer) -> Result<(), SchemeError> {
    for &u in layer.us() {
        if !(u > 0.0) {
            return Err(SchemeError::NonPositiveValue(u));
        }
    }
    Ok(())
}

/// One explicit step of the power-law scheme
/// `(uhat - u)/tau = ((u_+ + u)/2)^sigma u_x - ((u + u_-)/2)^sigma u_xbar) / h
///  +- u^n` on a static uniform mesh. The boundary closure supplies the two
/// end values on the new layer.
pub fn step_powerlaw_explicit(
    layer: &MeshLayer,
    tau: f64,
    sigma: f64,
    n: f64,
    sign: SourceSign,
    bc: impl Fn(&MeshLayer, f64) -> (f64, f64),
) -> Result<MeshLayer, SchemeError> {
    let h = require_uniform(layer)?;
    if sigma.fract() != 0.0 {
        for &u in layer.us() {
            if u < 0.0 {
                return Err(SchemeError::NegativePower { sigma, u });
            }
        }
    }
    let t_new = layer.t() + tau;
    let us = layer.us();
    let mut new_us = vec![0.0; layer.len()];
    for i in 1..layer.len() - 1 {
        let ux = (us[i + 1] - us[i]) / h;
        let uxb = (us[i] - us[i - 1]) / h;
        let flux = (((us[i + 1] + us[i]) / 2.0).powf(sigma) * ux
            - ((us[i] + us[i - 1]) / 2.0).powf(sigma) * uxb)
            / h;
        new_us[i] = us[i] + tau * (flux + sign.factor() * us[i].powf(n));
    }
    let (ul, ur) = bc(layer, t_new);
    new_us[0] = ul;
    *new_us.last_mut().unwrap() = ur;
    Ok(MeshLayer::new(t_new, layer.xs().to_vec(), new_us)?)
}

/// One implicit step of
/// `(uhat - u)/tau = (uhat^{sigma+1})_{xbar x} + uhat^n` on a static uniform
/// mesh, solved by Newton iteration with a tridiagonal Jacobian. The step is
/// damped (halved) while an iterate would leave the nonnegative cone.
/// Convergence: the max residual falls below `abs_tol` times the magnitude
/// of the residual's largest term (at least 1).
///
/// The nonlinear system can have several solutions; Newton converges to the
/// one nearest the initial iterate. By default the iterate is the old layer,
/// which selects the slow branch; blow-up runs must pass the self-similar
/// predictor (the old layer amplified by the growth factor) as `initial` to
/// land on the blow-up branch.
pub fn step_powerlaw_implicit(
    layer: &MeshLayer,
    tau: f64,
    sigma: f64,
    n: f64,
    bc: impl Fn(&MeshLayer, f64) -> (f64, f64),
    opts: &NewtonOptions,
    initial: Option<&[f64]>,
) -> Result<MeshLayer, SchemeError> {
    let h = require_uniform(layer)?;
    for &u in layer.us() {
        if u < 0.0 {
            return Err(SchemeError::NonPositiveValue(u));
        }
    }
    let t_new = layer.t() + tau;
    let (ul, ur) = bc(layer, t_new);
    let m = layer.len();
    let us = layer.us();
    let p = sigma + 1.0;
    let h2 = h * h;

    let mut uhat = match initial {
        Some(guess) => {
            if guess.len() != m {
                return Err(SchemeError::Grid(GridError::LengthMismatch(m, guess.len())));
            }
            guess.to_vec()
        }
        None => us.to_vec(),
    };
    uhat[0] = ul;
    uhat[m - 1] = ur;

    // Convergence is judged against the magnitude of the residual's largest
    // term: on the blow-up mesh the amplitudes grow and the steps shrink
    // without bound, so a fixed absolute tolerance would sit below the
    // round-off floor after a few steps.
    let res = |v: &[f64]| -> (Vec<f64>, f64) {
        let mut scale = 1.0f64;
        let f = (1..m - 1)
            .map(|i| {
                let du_dt = (v[i] - us[i]) / tau;
                let terms = [
                    du_dt,
                    -v[i + 1].powf(p) / h2,
                    2.0 * v[i].powf(p) / h2,
                    -v[i - 1].powf(p) / h2,
                    -v[i].powf(n),
                ];
                for t in terms {
                    scale = scale.max(t.abs());
                }
                terms.iter().sum()
            })
            .collect();
        (f, scale)
    };

    let (mut f, mut scale) = res(&uhat);
    let mut fmax = f.iter().fold(0.0f64, |a, b: &f64| a.max(b.abs()));
    for iter in 0..opts.max_iter {
        if fmax <= opts.abs_tol * scale {
            return Ok(MeshLayer::new(t_new, layer.xs().to_vec(), uhat)?);
        }
        let k = m - 2;
        let mut lower = vec![0.0; k];
        let mut diag = vec![0.0; k];
        let mut upper = vec![0.0; k];
        let mut rhs = vec![0.0; k];
        for (row, i) in (1..m - 1).enumerate() {
            diag[row] = 1.0 / tau + 2.0 * p * uhat[i].powf(sigma) / h2 - n * uhat[i].powf(n - 1.0);
            if row > 0 {
                lower[row] = -p * uhat[i - 1].powf(sigma) / h2;
            }
            if row + 1 < k {
                upper[row] = -p * uhat[i + 1].powf(sigma) / h2;
            }
            rhs[row] = -f[row];
        }
        let delta = solve_tridiagonal(&lower, &diag, &upper, &rhs).ok_or(
            SchemeError::NewtonDivergence {
                iters: iter,
                residual: fmax,
            },
        )?;
        let mut lambda = opts.damping;
        loop {
            let candidate: Vec<f64> = (0..m)
                .map(|i| {
                    if i == 0 || i == m - 1 {
                        uhat[i]
                    } else {
                        uhat[i] + lambda * delta[i - 1]
                    }
                })
                .collect();
            if candidate.iter().all(|&v| v >= 0.0) {
                uhat = candidate;
                break;
            }
            lambda /= 2.0;
            if lambda < 1e-12 {
                return Err(SchemeError::NonPositiveIterate);
            }
        }
        (f, scale) = res(&uhat);
        fmax = f.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    }
    if fmax <= opts.abs_tol * scale {
        return Ok(MeshLayer::new(t_new, layer.xs().to_vec(), uhat)?);
    }
    Err(SchemeError::NewtonDivergence {
        iters: opts.max_iter,
        residual: fmax,
    })
}

/// One explicit step of the semilinear moving-mesh model. The first model
/// equation gives the node displacement from old-layer log-derivatives, the
/// second gives `ln uhat` in closed form; both right-hand sides use only
/// old-layer data.
pub fn step_semilinear(
    layer: &MeshLayer,
    tau: f64,
    delta: f64,
    bc: impl Fn(&MeshLayer, f64) -> EndNodes,
) -> Result<MeshLayer, SchemeError> {
    require_positive(layer)?;
    let t_new = layer.t() + tau;
    let edt = (delta * tau).exp();
    let emdt = (-delta * tau).exp();
    let (xs, us) = (layer.xs(), layer.us());
    let mut new_xs = vec![0.0; layer.len()];
    let mut new_us = vec![0.0; layer.len()];
    for i in 1..layer.len() - 1 {
        let hp = xs[i + 1] - xs[i];
        let hm = xs[i] - xs[i - 1];
        let lx = (us[i + 1].ln() - us[i].ln()) / hp;
        let lxb = (us[i].ln() - us[i - 1].ln()) / hm;
        let dx = -2.0 / delta * (edt - 1.0) * (hm * lx + hp * lxb) / (hp + hm);
        let i6 = lx - lxb;
        let ln_uhat = edt * us[i].ln()
            + (8.0 / delta * (edt - 1.0) * (edt - 1.0) / (hp + hm) * i6 - delta * dx * dx)
                / (4.0 * (1.0 - emdt));
        new_xs[i] = xs[i] + dx;
        new_us[i] = ln_uhat.exp();
    }
    let ends = bc(layer, t_new);
    new_xs[0] = ends.x_left;
    new_us[0] = ends.u_left;
    *new_xs.last_mut().unwrap() = ends.x_right;
    *new_us.last_mut().unwrap() = ends.u_right;
    Ok(MeshLayer::new(t_new, new_xs, new_us)?)
}

/// One step of the invariant moving-mesh model for the linear heat equation.
/// The trajectory equation gives the displacement; the solution equation is
/// solved for `uhat` in closed form, `uhat = u exp(-dx^2/(4 tau)) / sqrt(R)`
/// with `R` the right side of the second model equation. A node with
/// `R <= 0` rejects the step (the time step is too large for the data).
pub fn step_linear_invariant(
    layer: &MeshLayer,
    tau: f64,
    bc: impl Fn(&MeshLayer, f64) -> EndNodes,
) -> Result<MeshLayer, SchemeError> {
    require_positive(layer)?;
    let t_new = layer.t() + tau;
    let (xs, us) = (layer.xs(), layer.us());
    let mut new_xs = vec![0.0; layer.len()];
    let mut new_us = vec![0.0; layer.len()];
    for i in 1..layer.len() - 1 {
        let hp = xs[i + 1] - xs[i];
        let hm = xs[i] - xs[i - 1];
        let lp = (us[i + 1] / us[i]).ln();
        let lm = (us[i - 1] / us[i]).ln();
        let dx = 2.0 * tau / (hp + hm) * (-(hm / hp) * lp + hp / hm * lm);
        let r = 1.0 - 4.0 * tau / (hp + hm) * (lp / hp + lm / hm);
        if r <= 0.0 {
            return Err(SchemeError::StepRejected(format!(
                "R = {r} <= 0 at node {i} (tau too large for the data)"
            )));
        }
        new_xs[i] = xs[i] + dx;
        new_us[i] = us[i] * (-dx * dx / (4.0 * tau)).exp() / r.sqrt();
    }
    let ends = bc(layer, t_new);
    new_xs[0] = ends.x_left;
    new_us[0] = ends.u_left;
    *new_xs.last_mut().unwrap() = ends.x_right;
    *new_us.last_mut().unwrap() = ends.u_right;
    Ok(MeshLayer::new(t_new, new_xs, new_us)?)
}

/// Classical explicit heat step on a static uniform mesh,
/// `(uhat - u)/tau = (u_+ - 2u + u_-)/h^2`.
pub fn step_linear_orthogonal(
    layer: &MeshLayer,
    tau: f64,
    bc: impl Fn(&MeshLayer, f64) -> (f64, f64),
) -> Result<MeshLayer, SchemeError> {
    let h = require_uniform(layer)?;
    let t_new = layer.t() + tau;
    let us = layer.us();
    let mut new_us = vec![0.0; layer.len()];
    for i in 1..layer.len() - 1 {
        new_us[i] = us[i] + tau * (us[i + 1] - 2.0 * us[i] + us[i - 1]) / (h * h);
    }
    let (ul, ur) = bc(layer, t_new);
    new_us[0] = ul;
    *new_us.last_mut().unwrap() = ur;
    Ok(MeshLayer::new(t_new, layer.xs().to_vec(), new_us)?)
}

/// One step of the potential Burgers model on a moving mesh. The layer
/// values are the potential `w`; a node with `1 + tau w_{x xbar} <= 0`
/// rejects the step.
pub fn step_burgers_potential(
    layer: &MeshLayer,
    tau: f64,
    bc: impl Fn(&MeshLayer, f64) -> EndNodes,
) -> Result<MeshLayer, SchemeError> {
    let t_new = layer.t() + tau;
    let (xs, ws) = (layer.xs(), layer.us());
    let mut new_xs = vec![0.0; layer.len()];
    let mut new_ws = vec![0.0; layer.len()];
    for i in 1..layer.len() - 1 {
        let hp = xs[i + 1] - xs[i];
        let hm = xs[i] - xs[i - 1];
        let wx = (ws[i + 1] - ws[i]) / hp;
        let wxb = (ws[i] - ws[i - 1]) / hm;
        let dx = tau * (hm * wx + hp * wxb) / (hp + hm);
        let g = 1.0 + tau * 2.0 * (wx - wxb) / (hp + hm);
        if g <= 0.0 {
            return Err(SchemeError::StepRejected(format!(
                "1 + tau w_xxbar = {g} <= 0 at node {i}"
            )));
        }
        new_xs[i] = xs[i] + dx;
        new_ws[i] = ws[i] + dx * dx / (2.0 * tau) + g.ln();
    }
    let ends = bc(layer, t_new);
    new_xs[0] = ends.x_left;
    new_ws[0] = ends.u_left;
    *new_xs.last_mut().unwrap() = ends.x_right;
    *new_ws.last_mut().unwrap() = ends.u_right;
    Ok(MeshLayer::new(t_new, new_xs, new_ws)?)
}

/// Hopf transformation `w = -2 ln u` applied pointwise to a history.
/// It maps discrete solutions of the invariant linear-heat model to
/// discrete solutions of the potential Burgers model on the same meshes.
pub fn hopf_map(history: &[MeshLayer]) -> Result<Vec<MeshLayer>, SchemeError> {
    history
        .iter()
        .map(|layer| {
            let ws = layer
                .us()
                .iter()
                .map(|&u| {
                    if u > 0.0 {
                        Ok(-2.0 * u.ln())
                    } else {
                        Err(SchemeError::NonPositiveValue(u))
                    }
                })
                .collect::<Result<Vec<f64>, _>>()?;
            Ok(MeshLayer::new(layer.t(), layer.xs().to_vec(), ws)?)
        })
        .collect()
}

/// Solves the three-point boundary-value problem
/// `(u_+ - 2u + u_-)/h^2 = u^2` on `n` uniform nodes with the given end
/// values, by Newton iteration with a tridiagonal Jacobian. The initial
/// iterate interpolates the boundary values linearly unless one is given.
pub fn solve_ode_bvp(
    n: usize,
    h: f64,
    left_bc: f64,
    right_bc: f64,
    initial: Option<&[f64]>,
    opts: &NewtonOptions,
) -> Result<Vec<f64>, SchemeError> {
    if n < 3 {
        return Err(SchemeError::Grid(GridError::TooFewNodes(n)));
    }
    if !(h > 0.0) {
        return Err(SchemeError::Grid(GridError::NonPositiveStep("h")));
    }
    let mut u: Vec<f64> = match initial {
        Some(g) => g.to_vec(),
        None => (0..n)
            .map(|i| left_bc + (right_bc - left_bc) * i as f64 / (n - 1) as f64)
            .collect(),
    };
    u[0] = left_bc;
    u[n - 1] = right_bc;
    let h2 = h * h;
    let res = |v: &[f64]| -> Vec<f64> {
        (1..n - 1)
            .map(|i| (v[i + 1] - 2.0 * v[i] + v[i - 1]) / h2 - v[i] * v[i])
            .collect()
    };
    let mut f = res(&u);
    let mut fmax = f.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    for iter in 0..opts.max_iter {
        if fmax <= opts.abs_tol {
            return Ok(u);
        }
        let k = n - 2;
        let lower = vec![1.0 / h2; k];
        let upper = vec![1.0 / h2; k];
        let diag: Vec<f64> = (1..n - 1).map(|i| -2.0 / h2 - 2.0 * u[i]).collect();
        let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
        let delta = solve_tridiagonal(&lower, &diag, &upper, &rhs).ok_or(
            SchemeError::NewtonDivergence {
                iters: iter,
                residual: fmax,
            },
        )?;
        for (i, d) in delta.iter().enumerate() {
            u[i + 1] += opts.damping * d;
        }
        f = res(&u);
        fmax = f.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    }
    if fmax <= opts.abs_tol {
        return Ok(u);
    }
    Err(SchemeError::NewtonDivergence {
        iters: opts.max_iter,
        residual: fmax,
    })
}

/// Thomas algorithm; `lower[0]` and `upper[k-1]` are ignored.
/// Returns `None` on a vanishing pivot.
fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let k = diag.len();
    let mut c = vec![0.0; k];
    let mut d = vec![0.0; k];
    let mut pivot = diag[0];
    if pivot == 0.0 {
        return None;
    }
    if k > 1 {
        c[0] = upper[0] / pivot;
    }
    d[0] = rhs[0] / pivot;
    for i in 1..k {
        pivot = diag[i] - lower[i] * c[i - 1];
        if pivot == 0.0 {
            return None;
        }
        if i + 1 < k {
            c[i] = upper[i] / pivot;
        }
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / pivot;
    }
    for i in (0..k - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Some(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_layer(t: f64, x0: f64, h: f64, us: &[f64]) -> MeshLayer {
        let xs: Vec<f64> = (0..us.len()).map(|i| x0 + i as f64 * h).collect();
        MeshLayer::new(t, xs, us.to_vec()).unwrap()
    }

    fn static_stencil(h: f64, tau: f64, us: [f64; 3], uhats: [f64; 3]) -> Stencil {
        Stencil::new(
            0.0, tau, 0.0, 0.0, h, h, h, h, us[1], us[2], us[0], uhats[1], uhats[2], uhats[0],
        )
        .unwrap()
    }

    #[test]
    fn ode_residual_example() {
        let st = static_stencil(1.0, 1.0, [1.0, 1.0, 1.0], [1.0, 1.0, 1.0]);
        let r = residual(&SchemeKind::OdeU2, &st).unwrap();
        assert_eq!(r, vec![-1.0]);
    }

    #[test]
    fn linear_invariant_constant_state() {
        let st = static_stencil(0.7, 0.3, [2.0, 2.0, 2.0], [2.0, 2.0, 2.0]);
        let r = residual(&SchemeKind::LinearInvariant, &st).unwrap();
        assert_eq!(r, vec![0.0, 0.0]);
    }

    #[test]
    fn linear_orthogonal_rejects_moved_stencil() {
        let st = Stencil::new(
            0.0, 0.1, 0.0, 0.3, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0,
        )
        .unwrap();
        assert!(matches!(
            residual(&SchemeKind::LinearOrthogonal, &st),
            Err(SchemeError::GeometryViolation(_))
        ));
    }

    #[test]
    fn linear_orthogonal_truncation_on_exact_data() {
        // The closed-form heat solution sampled on a static mesh is not an
        // exact solution of the orthogonal scheme.
        let sol = crate::exact::Fundamental { c: 1.0 };
        let h = 0.5;
        let tau = 0.1;
        let t = 10.0;
        let xs = [-0.5, 0.0, 0.5];
        let us: Vec<f64> = xs.iter().map(|&x| sol.eval(x, t).unwrap()).collect();
        let uhats: Vec<f64> = xs.iter().map(|&x| sol.eval(x, t + tau).unwrap()).collect();
        let st = Stencil::new(
            t,
            t + tau,
            0.0,
            0.0,
            h,
            h,
            h,
            h,
            us[1],
            us[2],
            us[0],
            uhats[1],
            uhats[2],
            uhats[0],
        )
        .unwrap();
        let r = residual(&SchemeKind::LinearOrthogonal, &st).unwrap();
        assert!(r[0].abs() > 1e-8, "expected truncation error, got {}", r[0]);
    }

    #[test]
    fn powerlaw_explicit_constant_growth() {
        // u = 1 everywhere: diffusion vanishes and uhat = 1 + tau.
        let layer = uniform_layer(0.0, 0.0, 1.0, &[1.0; 5]);
        let tau = 0.01;
        let new = step_powerlaw_explicit(&layer, tau, 2.0, 3.0, SourceSign::Plus, |_, _| {
            (1.0 + tau, 1.0 + tau)
        })
        .unwrap();
        for &u in new.us() {
            assert!((u - 1.01).abs() < 1e-15);
        }
    }

    #[test]
    fn powerlaw_explicit_zero_fixed_point() {
        let layer = uniform_layer(0.0, 0.0, 1.0, &[0.0; 5]);
        let new =
            step_powerlaw_explicit(&layer, 0.1, 2.0, 3.0, SourceSign::Plus, |_, _| (0.0, 0.0))
                .unwrap();
        assert!(new.us().iter().all(|&u| u == 0.0));
    }

    #[test]
    fn powerlaw_explicit_linear_profile_is_harmonic() {
        // sigma = 0, source off: the classical heat step leaves u = x fixed.
        let layer = uniform_layer(0.0, 1.0, 1.0, &[1.0, 2.0, 3.0]);
        let new = step_powerlaw_explicit(&layer, 0.2, 0.0, 2.0, SourceSign::Off, |l, _| {
            (l.us()[0], l.us()[2])
        })
        .unwrap();
        assert_eq!(new.us(), layer.us());
    }

    #[test]
    fn powerlaw_implicit_zero_state() {
        let layer = uniform_layer(0.0, 0.0, 1.0, &[0.0; 5]);
        let new = step_powerlaw_implicit(
            &layer,
            0.25,
            2.0,
            3.0,
            |_, _| (0.0, 0.0),
            &NewtonOptions::default(),
            None,
        )
        .unwrap();
        assert!(new.us().iter().all(|&u| u == 0.0));
    }

    #[test]
    fn powerlaw_implicit_constant_reduces_to_scalar_newton() {
        // With spatially constant data the diffusion term drops out and the
        // step solves (y - c)/tau = y^n. Scalar Newton oracle:
        let c: f64 = 0.5;
        let tau = 0.1;
        let n = 3.0;
        let mut y = c;
        for _ in 0..60 {
            let f = (y - c) / tau - y.powf(n);
            let fp = 1.0 / tau - n * y.powf(n - 1.0);
            y -= f / fp;
        }
        assert!(((y - c) / tau - y.powf(n)).abs() < 1e-14);

        let layer = uniform_layer(0.0, 0.0, 1.0, &[c; 7]);
        let new = step_powerlaw_implicit(
            &layer,
            tau,
            2.0,
            n,
            |_, _| (y, y),
            &NewtonOptions::default(),
            None,
        )
        .unwrap();
        for &u in new.us() {
            assert!((u - y).abs() < 1e-11, "expected {y}, got {u}");
        }
    }

    #[test]
    fn powerlaw_implicit_separable_blowup_step() {
        // One implicit step on u = theta with tau_0 from the blow-up mesh
        // multiplies the profile by rho, to Newton tolerance.
        let b = crate::exact::BlowupSpec::new(2.0, 2.0, 5).unwrap();
        let theta = b.profile().unwrap();
        let layer = MeshLayer::new(0.0, b.mesh(), theta.clone()).unwrap();
        let opts = NewtonOptions {
            abs_tol: 1e-13,
            ..NewtonOptions::default()
        };
        // Self-similar predictor: the implicit step also has a slow branch
        // (for these parameters the scalar reduction factors as
        // (y - 2)(y^2 + 2y - 4) = 0), so steer Newton to the blow-up root.
        let predictor: Vec<f64> = theta.iter().map(|&v| b.rho * v).collect();
        let new = step_powerlaw_implicit(
            &layer,
            b.tau_j(0),
            b.sigma,
            b.n(),
            |l, _| (b.rho * l.us()[0], b.rho * l.us()[l.len() - 1]),
            &opts,
            Some(&predictor),
        )
        .unwrap();
        for (k, (&u0, &u1)) in theta.iter().zip(new.us()).enumerate() {
            if k == 0 || k == theta.len() - 1 {
                continue;
            }
            assert!(
                (u1 / u0 - b.rho).abs() < 1e-10,
                "node {k}: ratio {} vs rho {}",
                u1 / u0,
                b.rho
            );
        }
    }

    #[test]
    fn semilinear_steady_state() {
        let layer = uniform_layer(0.0, -1.0, 1.0, &[1.0, 1.0, 1.0]);
        let new = step_semilinear(&layer, 0.1, 1.0, |l, _| EndNodes {
            x_left: l.xs()[0],
            u_left: 1.0,
            x_right: l.xs()[2],
            u_right: 1.0,
        })
        .unwrap();
        assert_eq!(new.xs(), layer.xs());
        for &u in new.us() {
            assert!((u - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn semilinear_gaussian_spreads_symmetrically() {
        // Even data on a symmetric mesh: the displacement is odd in x.
        let xs: Vec<f64> = (-3..=3).map(|i| i as f64 * 0.5).collect();
        let us: Vec<f64> = xs.iter().map(|&x| (-x * x).exp()).collect();
        let layer = MeshLayer::new(0.0, xs, us).unwrap();
        let new = step_semilinear(&layer, 0.05, 1.0, |l, _| EndNodes {
            x_left: l.xs()[0],
            u_left: l.us()[0],
            x_right: l.xs()[l.len() - 1],
            u_right: l.us()[l.len() - 1],
        })
        .unwrap();
        let n = new.len();
        for i in 1..n - 1 {
            let dx_left = new.xs()[i] - layer.xs()[i];
            let dx_right = new.xs()[n - 1 - i] - layer.xs()[n - 1 - i];
            assert!(
                (dx_left + dx_right).abs() < 1e-14,
                "displacement not odd at {i}"
            );
        }
        let _ = new.t();
    }

    #[test]
    fn linear_invariant_constant_state_step() {
        let layer = uniform_layer(0.0, 0.0, 0.5, &[3.0, 3.0, 3.0, 3.0]);
        let new = step_linear_invariant(&layer, 0.1, |l, _| EndNodes {
            x_left: l.xs()[0],
            u_left: 3.0,
            x_right: l.xs()[3],
            u_right: 3.0,
        })
        .unwrap();
        assert_eq!(new.xs(), layer.xs());
        for &u in new.us() {
            assert!((u - 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn linear_invariant_rejects_large_tau() {
        // A deep valley with a huge time step drives R negative.
        let layer = uniform_layer(0.0, -1.0, 1.0, &[1.0, 1e-6, 1.0]);
        let r = step_linear_invariant(&layer, 10.0, |l, _| EndNodes {
            x_left: l.xs()[0],
            u_left: 1.0,
            x_right: l.xs()[2],
            u_right: 1.0,
        });
        assert!(matches!(r, Err(SchemeError::StepRejected(_))));
    }

    #[test]
    fn linear_orthogonal_classical_cases() {
        // Linear profile is discrete-harmonic.
        let layer = uniform_layer(0.0, 0.0, 1.0, &[0.0, 1.0, 2.0]);
        let new = step_linear_orthogonal(&layer, 0.3, |l, _| (l.us()[0], l.us()[2])).unwrap();
        assert_eq!(new.us(), layer.us());
        // u = x^2 on h = 1: the center gains 2 tau.
        let layer = uniform_layer(0.0, -1.0, 1.0, &[1.0, 0.0, 1.0]);
        let new = step_linear_orthogonal(&layer, 0.3, |_, _| (1.0, 1.0)).unwrap();
        assert!((new.us()[1] - 0.6).abs() < 1e-15);
        // Marginal mode at tau/h^2 = 1/2: alternating data flips sign.
        let layer = uniform_layer(0.0, 0.0, 1.0, &[1.0, -1.0, 1.0, -1.0, 1.0]);
        let new = step_linear_orthogonal(&layer, 0.5, |_, _| (-1.0, -1.0)).unwrap();
        for (a, b) in layer.us().iter().zip(new.us()) {
            assert_eq!(*b, -*a);
        }
    }

    #[test]
    fn burgers_constant_and_traveling() {
        let layer = uniform_layer(0.0, 0.0, 1.0, &[5.0, 5.0, 5.0]);
        let new = step_burgers_potential(&layer, 0.2, |l, _| EndNodes {
            x_left: l.xs()[0],
            u_left: 5.0,
            x_right: l.xs()[2],
            u_right: 5.0,
        })
        .unwrap();
        assert_eq!(new.xs(), layer.xs());
        assert!(new.us().iter().all(|&w| w == 5.0));

        // w = c x: dx = tau c and w gains tau c^2 / 2, matching the exact
        // traveling solution w = c x - c^2 t / 2 at the moved node.
        let c = 1.5;
        let tau = 0.2;
        let xs = [0.0, 1.0, 2.0];
        let ws: Vec<f64> = xs.iter().map(|&x| c * x).collect();
        let layer = MeshLayer::new(0.0, xs.to_vec(), ws).unwrap();
        let exact = |x: f64, t: f64| c * x - c * c * t / 2.0;
        let new = step_burgers_potential(&layer, tau, |l, t| EndNodes {
            x_left: l.xs()[0] + tau * c,
            u_left: exact(l.xs()[0] + tau * c, t),
            x_right: l.xs()[2] + tau * c,
            u_right: exact(l.xs()[2] + tau * c, t),
        })
        .unwrap();
        assert!((new.xs()[1] - (1.0 + tau * c)).abs() < 1e-15);
        assert!((new.us()[1] - exact(new.xs()[1], tau)).abs() < 1e-14);
    }

    #[test]
    fn hopf_map_values() {
        let layer = uniform_layer(0.0, 0.0, 1.0, &[1.0, std::f64::consts::E, 1.0]);
        let w = hopf_map(&[layer]).unwrap();
        assert_eq!(w[0].us()[0], 0.0);
        assert!((w[0].us()[1] + 2.0).abs() < 1e-15);
        let bad = uniform_layer(0.0, 0.0, 1.0, &[1.0, -1.0, 1.0]);
        assert!(matches!(
            hopf_map(&[bad]),
            Err(SchemeError::NonPositiveValue(_))
        ));
    }

    #[test]
    fn ode_bvp_zero_solution() {
        let u = solve_ode_bvp(7, 0.5, 0.0, 0.0, None, &NewtonOptions::default()).unwrap();
        assert!(u.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn ode_bvp_against_continuum_solution() {
        // u = 6 / (x + 1)^2 solves u_xx = u^2; its boundary values drive
        // Newton to the nearby discrete solution.
        let n = 5;
        let h = 0.5;
        let exact = |x: f64| 6.0 / ((x + 1.0) * (x + 1.0));
        let u = solve_ode_bvp(
            n,
            h,
            exact(0.0),
            exact(2.0),
            None,
            &NewtonOptions::default(),
        )
        .unwrap();
        let h2 = h * h;
        for i in 1..n - 1 {
            let r = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / h2 - u[i] * u[i];
            assert!(r.abs() <= 1e-12, "interior residual {r}");
        }
        // The discrete solution tracks the continuum one at O(h^2).
        for (i, &v) in u.iter().enumerate() {
            assert!((v - exact(i as f64 * h)).abs() < 0.2);
        }
    }

    #[test]
    fn ode_bvp_scaling_symmetry() {
        // x -> lambda x, u -> lambda^{-2} u maps solutions to solutions.
        let n = 9;
        let h = 0.25;
        let exact = |x: f64| 6.0 / ((x + 1.0) * (x + 1.0));
        let u = solve_ode_bvp(
            n,
            h,
            exact(0.0),
            exact(2.0),
            None,
            &NewtonOptions::default(),
        )
        .unwrap();
        let lambda = 2.0;
        let scaled: Vec<f64> = u.iter().map(|v| v / (lambda * lambda)).collect();
        let hs = lambda * h;
        for i in 1..n - 1 {
            let r = (scaled[i + 1] - 2.0 * scaled[i] + scaled[i - 1]) / (hs * hs)
                - scaled[i] * scaled[i];
            assert!(r.abs() <= 1e-10, "scaled residual {r}");
        }
    }

    #[test]
    fn tridiagonal_solver() {
        // 3x3 system with known solution.
        let lower = [0.0, 1.0, 2.0];
        let diag = [4.0, 5.0, 6.0];
        let upper = [1.0, 1.0, 0.0];
        let x_true = [1.0, -2.0, 3.0];
        let rhs = [
            diag[0] * x_true[0] + upper[0] * x_true[1],
            lower[1] * x_true[0] + diag[1] * x_true[1] + upper[1] * x_true[2],
            lower[2] * x_true[1] + diag[2] * x_true[2],
        ];
        let x = solve_tridiagonal(&lower, &diag, &upper, &rhs).unwrap();
        for (a, b) in x.iter().zip(x_true) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
