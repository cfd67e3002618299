//! Mesh layers, the six-point stencil, and discrete mesh-geometry conditions.
//!
//! A mesh history is a sequence of flat time layers: every node of a layer
//! shares one time value, while node positions may move from layer to layer.
//! Two consecutive layers define one [`Stencil`] per interior node.
//!
//! A point-symmetry operator acting on `(t, x, u)` deforms the mesh. The
//! predicates in this module check, by finite differences on a probe grid,
//! which geometric properties of a mesh the operator preserves: uniformity
//! of steps in `t` and in `x`, orthogonality, and flatness of time layers.

use thiserror::Error;

/// Default tolerance for the mesh-geometry condition checks. The conditions
/// are exact identities for the operator algebras handled here, so a tight
/// tolerance is safe.
pub const CONDITION_TOL: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("layers have different node counts: {0} vs {1}")]
    LayerMismatch(usize, usize),
    #[error("node positions are not strictly increasing at index {0}")]
    NonMonotoneMesh(usize),
    #[error("need at least 3 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("positions and values have different lengths: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("new layer time {new} does not exceed old layer time {old}")]
    NonPositiveTimeStep { old: f64, new: f64 },
    #[error("stencil has non-positive step {0}")]
    NonPositiveStep(&'static str),
}

/// One flat time layer: a time value, strictly increasing node positions,
/// and the solution values at the nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshLayer {
    t: f64,
    xs: Vec<f64>,
    us: Vec<f64>,
}

impl MeshLayer {
    /// Builds a layer, enforcing strictly increasing positions and
    /// matching lengths (at least 3 nodes).
    pub fn new(t: f64, xs: Vec<f64>, us: Vec<f64>) -> Result<Self, GridError> {
        if xs.len() < 3 {
            return Err(GridError::TooFewNodes(xs.len()));
        }
        if xs.len() != us.len() {
            return Err(GridError::LengthMismatch(xs.len(), us.len()));
        }
        for i in 0..xs.len() - 1 {
            if !(xs[i + 1] > xs[i]) {
                return Err(GridError::NonMonotoneMesh(i));
            }
        }
        Ok(Self { t, xs, us })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn us(&self) -> &[f64] {
        &self.us
    }

    /// Step `h_i = xs[i+1] - xs[i]`, positive by construction.
    pub fn step(&self, i: usize) -> f64 {
        self.xs[i + 1] - self.xs[i]
    }

    /// True when all steps agree to relative tolerance `rel`.
    pub fn is_uniform(&self, rel: f64) -> bool {
        let h0 = self.step(0);
        (0..self.len() - 1).all(|i| (self.step(i) - h0).abs() <= rel * h0.abs())
    }

    pub fn into_parts(self) -> (f64, Vec<f64>, Vec<f64>) {
        (self.t, self.xs, self.us)
    }
}

/// The six-point space-time stencil of an evolutionary mesh: three nodes on
/// the old layer at time `t` and three on the new layer at time `t_hat`.
/// The new central node may be displaced by `dx = x_hat - x`; the orthogonal
/// special case has `dx = 0` and equal steps on both layers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stencil {
    pub t: f64,
    pub t_hat: f64,
    pub x: f64,
    pub x_hat: f64,
    pub h_plus: f64,
    pub h_minus: f64,
    pub h_hat_plus: f64,
    pub h_hat_minus: f64,
    pub u: f64,
    pub u_plus: f64,
    pub u_minus: f64,
    pub u_hat: f64,
    pub u_hat_plus: f64,
    pub u_hat_minus: f64,
}

impl Stencil {
    /// Validates the geometric preconditions: `t_hat > t` and positive steps.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        t: f64,
        t_hat: f64,
        x: f64,
        x_hat: f64,
        h_plus: f64,
        h_minus: f64,
        h_hat_plus: f64,
        h_hat_minus: f64,
        u: f64,
        u_plus: f64,
        u_minus: f64,
        u_hat: f64,
        u_hat_plus: f64,
        u_hat_minus: f64,
    ) -> Result<Self, GridError> {
        if !(t_hat > t) {
            return Err(GridError::NonPositiveTimeStep { old: t, new: t_hat });
        }
        for (name, h) in [
            ("h_plus", h_plus),
            ("h_minus", h_minus),
            ("h_hat_plus", h_hat_plus),
            ("h_hat_minus", h_hat_minus),
        ] {
            if !(h > 0.0) {
                return Err(GridError::NonPositiveStep(name));
            }
        }
        Ok(Self {
            t,
            t_hat,
            x,
            x_hat,
            h_plus,
            h_minus,
            h_hat_plus,
            h_hat_minus,
            u,
            u_plus,
            u_minus,
            u_hat,
            u_hat_plus,
            u_hat_minus,
        })
    }

    /// Builds a stencil from its six points: `bottom`/`top` hold the
    /// `(x, u)` pairs at `x - h_minus`, `x`, `x + h_plus` order.
    pub fn from_points(
        t: f64,
        t_hat: f64,
        bottom: [(f64, f64); 3],
        top: [(f64, f64); 3],
    ) -> Result<Self, GridError> {
        Self::new(
            t,
            t_hat,
            bottom[1].0,
            top[1].0,
            bottom[2].0 - bottom[1].0,
            bottom[1].0 - bottom[0].0,
            top[2].0 - top[1].0,
            top[1].0 - top[0].0,
            bottom[1].1,
            bottom[2].1,
            bottom[0].1,
            top[1].1,
            top[2].1,
            top[0].1,
        )
    }

    /// The six points in `(t, x, u)` form, bottom layer first, left to right.
    pub fn points(&self) -> [(f64, f64, f64); 6] {
        [
            (self.t, self.x - self.h_minus, self.u_minus),
            (self.t, self.x, self.u),
            (self.t, self.x + self.h_plus, self.u_plus),
            (self.t_hat, self.x_hat - self.h_hat_minus, self.u_hat_minus),
            (self.t_hat, self.x_hat, self.u_hat),
            (self.t_hat, self.x_hat + self.h_hat_plus, self.u_hat_plus),
        ]
    }

    /// Time step `tau = t_hat - t`.
    pub fn tau(&self) -> f64 {
        self.t_hat - self.t
    }

    /// Central node displacement between the layers.
    pub fn dx(&self) -> f64 {
        self.x_hat - self.x
    }

    /// True when all six solution values are strictly positive (required by
    /// the schemes and invariants that take logarithms).
    pub fn all_positive(&self) -> bool {
        self.u > 0.0
            && self.u_plus > 0.0
            && self.u_minus > 0.0
            && self.u_hat > 0.0
            && self.u_hat_plus > 0.0
            && self.u_hat_minus > 0.0
    }
}

/// Pairs two layers node-by-node (correspondence is by index: the moving-mesh
/// schemes evolve each node's trajectory) and returns the stencils centered
/// at the interior nodes.
pub fn extract_stencils(old: &MeshLayer, new: &MeshLayer) -> Result<Vec<Stencil>, GridError> {
    if old.len() != new.len() {
        return Err(GridError::LayerMismatch(old.len(), new.len()));
    }
    if !(new.t > old.t) {
        return Err(GridError::NonPositiveTimeStep {
            old: old.t,
            new: new.t,
        });
    }
    let mut out = Vec::with_capacity(old.len() - 2);
    for i in 1..old.len() - 1 {
        out.push(Stencil::new(
            old.t,
            new.t,
            old.xs[i],
            new.xs[i],
            old.step(i),
            old.step(i - 1),
            new.step(i),
            new.step(i - 1),
            old.us[i],
            old.us[i + 1],
            old.us[i - 1],
            new.us[i],
            new.us[i + 1],
            new.us[i - 1],
        )?);
    }
    Ok(out)
}

/// A coefficient function of `(t, x, u)`.
type Coeff = Box<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;
/// A one-parameter group map `(t, x, u; a) -> (t*, x*, u*)`.
type FlowMap = Box<dyn Fn(f64, f64, f64, f64) -> (f64, f64, f64) + Send + Sync>;

/// A Lie point operator given by its coefficient functions of `(t, x, u)`
/// and, when available, its closed-form one-parameter flow.
pub struct SymmetryOperator {
    pub name: String,
    xi_t: Coeff,
    xi_x: Coeff,
    eta: Coeff,
    flow: Option<FlowMap>,
}

impl std::fmt::Debug for SymmetryOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SymmetryOperator")
            .field("name", &self.name)
            .field("has_flow", &self.flow.is_some())
            .finish()
    }
}

impl SymmetryOperator {
    pub fn new(
        name: impl Into<String>,
        xi_t: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        xi_x: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        eta: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            xi_t: Box::new(xi_t),
            xi_x: Box::new(xi_x),
            eta: Box::new(eta),
            flow: None,
        }
    }

    pub fn with_flow(
        mut self,
        flow: impl Fn(f64, f64, f64, f64) -> (f64, f64, f64) + Send + Sync + 'static,
    ) -> Self {
        self.flow = Some(Box::new(flow));
        self
    }

    pub fn xi_t(&self, t: f64, x: f64, u: f64) -> f64 {
        (self.xi_t)(t, x, u)
    }

    pub fn xi_x(&self, t: f64, x: f64, u: f64) -> f64 {
        (self.xi_x)(t, x, u)
    }

    pub fn eta(&self, t: f64, x: f64, u: f64) -> f64 {
        (self.eta)(t, x, u)
    }

    pub fn has_flow(&self) -> bool {
        self.flow.is_some()
    }

    /// The one-parameter map at group parameter `a`, if a closed form is known.
    pub fn flow(&self, t: f64, x: f64, u: f64, a: f64) -> Option<(f64, f64, f64)> {
        self.flow.as_ref().map(|f| f(t, x, u, a))
    }
}

/// Uniform orthogonal probe grid on which the mesh-geometry conditions are
/// sampled. The `u` argument of the coefficient functions is probed at a
/// fixed value; the listed operator algebras all have `u`-independent
/// `xi_t`, `xi_x`.
#[derive(Debug, Clone, Copy)]
pub struct ProbeGrid {
    pub t0: f64,
    pub x0: f64,
    pub tau: f64,
    pub h: f64,
    pub nt: usize,
    pub nx: usize,
    pub u: f64,
}

impl Default for ProbeGrid {
    /// 8x8 points on the unit square, steps `1/7`, probed at `u = 1`.
    fn default() -> Self {
        Self {
            t0: 0.0,
            x0: 0.0,
            tau: 1.0 / 7.0,
            h: 1.0 / 7.0,
            nt: 8,
            nx: 8,
            u: 1.0,
        }
    }
}

impl ProbeGrid {
    fn t(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.tau
    }

    fn x(&self, j: usize) -> f64 {
        self.x0 + j as f64 * self.h
    }

    fn max_abs(&self, f: impl Fn(f64, f64, f64) -> f64) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.nt {
            for j in 0..self.nx {
                m = m.max(f(self.t(i), self.x(j), self.u).abs());
            }
        }
        m
    }
}

/// Scale factor for the condition checks: tolerances are relative to the
/// largest coefficient magnitude seen on the probe grid (at least 1).
fn coeff_scale(grid: &ProbeGrid, op: &SymmetryOperator) -> f64 {
    let mt = grid.max_abs(|t, x, u| op.xi_t(t, x, u));
    let mx = grid.max_abs(|t, x, u| op.xi_x(t, x, u));
    mt.max(mx).max(1.0)
}

/// Uniformity of the grid in the time direction is conserved iff the second
/// time-difference of `xi_t` vanishes on the probe grid.
pub fn check_time_uniformity(op: &SymmetryOperator, grid: &ProbeGrid, tol: f64) -> bool {
    let scale = coeff_scale(grid, op);
    for i in 1..grid.nt - 1 {
        for j in 0..grid.nx {
            let x = grid.x(j);
            let d2 = (op.xi_t(grid.t(i + 1), x, grid.u) - 2.0 * op.xi_t(grid.t(i), x, grid.u)
                + op.xi_t(grid.t(i - 1), x, grid.u))
                / (grid.tau * grid.tau);
            if d2.abs() > tol * scale {
                return false;
            }
        }
    }
    true
}

/// Uniformity in the space direction: second space-difference of `xi_x`.
pub fn check_space_uniformity(op: &SymmetryOperator, grid: &ProbeGrid, tol: f64) -> bool {
    let scale = coeff_scale(grid, op);
    for i in 0..grid.nt {
        for j in 1..grid.nx - 1 {
            let t = grid.t(i);
            let d2 = (op.xi_x(t, grid.x(j + 1), grid.u) - 2.0 * op.xi_x(t, grid.x(j), grid.u)
                + op.xi_x(t, grid.x(j - 1), grid.u))
                / (grid.h * grid.h);
            if d2.abs() > tol * scale {
                return false;
            }
        }
    }
    true
}

/// Orthogonality of the mesh is conserved iff the forward space-difference of
/// `xi_t` equals minus the forward time-difference of `xi_x` at every probe
/// point.
pub fn check_orthogonality(op: &SymmetryOperator, grid: &ProbeGrid, tol: f64) -> bool {
    let scale = coeff_scale(grid, op);
    for i in 0..grid.nt - 1 {
        for j in 0..grid.nx - 1 {
            let (t, x) = (grid.t(i), grid.x(j));
            let dh_xit = (op.xi_t(t, x + grid.h, grid.u) - op.xi_t(t, x, grid.u)) / grid.h;
            let dtau_xix = (op.xi_x(t + grid.tau, x, grid.u) - op.xi_x(t, x, grid.u)) / grid.tau;
            if (dh_xit + dtau_xix).abs() > tol * scale {
                return false;
            }
        }
    }
    true
}

/// Flatness of time layers is preserved iff the mixed forward difference of
/// `xi_t` in `x` and `t` vanishes.
pub fn check_flat_time_layers(op: &SymmetryOperator, grid: &ProbeGrid, tol: f64) -> bool {
    let scale = coeff_scale(grid, op);
    for i in 0..grid.nt - 1 {
        for j in 0..grid.nx - 1 {
            let (t, x) = (grid.t(i), grid.x(j));
            let mixed = (op.xi_t(t + grid.tau, x + grid.h, grid.u)
                - op.xi_t(t, x + grid.h, grid.u)
                - op.xi_t(t + grid.tau, x, grid.u)
                + op.xi_t(t, x, grid.u))
                / (grid.tau * grid.h);
            if mixed.abs() > tol * scale {
                return false;
            }
        }
    }
    true
}
