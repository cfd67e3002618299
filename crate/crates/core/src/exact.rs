//! Closed-form invariant solutions, mesh trajectories, and discrete blow-up
//! data. These are exact solutions of the *discrete* models, so the schemes
//! can be validated against them at round-off accuracy.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ExactError {
    #[error("outside the solution domain: {0}")]
    DomainError(String),
}

/// Invariant solution of the moving-mesh model for the linear heat equation:
/// `u = f0 (alpha / (t + alpha))^{1/2} exp(-x^2 / (4(t + alpha)))` with node
/// trajectories `x = x0 (t + alpha) / alpha`. Requires `t + alpha > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearExact {
    pub alpha: f64,
    pub f0: f64,
}

impl LinearExact {
    pub fn eval(&self, x: f64, t: f64) -> Result<f64, ExactError> {
        let s = t + self.alpha;
        if s <= 0.0 {
            return Err(ExactError::DomainError(format!("t + alpha = {s} <= 0")));
        }
        Ok(self.f0 * (self.alpha / s).sqrt() * (-x * x / (4.0 * s)).exp())
    }

    /// Trajectory of the node starting at `x0` when `t = 0`.
    pub fn trajectory(&self, x0: f64, t: f64) -> Result<f64, ExactError> {
        let s = t + self.alpha;
        if s <= 0.0 {
            return Err(ExactError::DomainError(format!("t + alpha = {s} <= 0")));
        }
        Ok(x0 * s / self.alpha)
    }
}

/// Fundamental solution of the heat equation,
/// `u = C t^{-1/2} exp(-x^2/(4t))`, valid for `t > 0`. On the moving mesh it
/// holds exactly on trajectories obeying `dx = (tau / t) x`, i.e.
/// `x(t) = x(t_ref) t / t_ref`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fundamental {
    pub c: f64,
}

impl Fundamental {
    pub fn eval(&self, x: f64, t: f64) -> Result<f64, ExactError> {
        if t <= 0.0 {
            return Err(ExactError::DomainError(format!("t = {t} <= 0")));
        }
        Ok(self.c / t.sqrt() * (-x * x / (4.0 * t)).exp())
    }

    /// Trajectory through `(t_ref, x_ref)`.
    pub fn trajectory(&self, x_ref: f64, t_ref: f64, t: f64) -> Result<f64, ExactError> {
        if t <= 0.0 || t_ref <= 0.0 {
            return Err(ExactError::DomainError(format!(
                "t = {t}, t_ref = {t_ref} must be positive"
            )));
        }
        Ok(x_ref * t / t_ref)
    }
}

/// Invariant solution of the semilinear model `u_t = u_xx + delta u ln u`.
///
/// The solution lives on the uniform time grid `t_j = j tau` and has the form
/// `u(x, t) = exp(f(t) - delta e^{delta t} x^2 / (4 (alpha + e^{delta t})))`,
/// where `f` satisfies the ordinary difference equation
/// `(f(t+tau) - e^{delta tau} f(t)) / (e^{delta tau}(e^{delta tau}-1))
///   = -(1/2) e^{delta t} / (alpha + e^{delta t})`.
/// Node trajectories: `x = x0 (e^{delta t} + alpha) / (1 + alpha)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SemilinearExact {
    pub alpha: f64,
    pub f0: f64,
    pub delta: f64,
    pub tau: f64,
}

impl SemilinearExact {
    pub fn new(alpha: f64, f0: f64, delta: f64, tau: f64) -> Result<Self, ExactError> {
        if delta != 1.0 && delta != -1.0 {
            return Err(ExactError::DomainError(format!(
                "delta = {delta}, want +-1"
            )));
        }
        if !(tau > 0.0) {
            return Err(ExactError::DomainError(format!("tau = {tau} <= 0")));
        }
        Ok(Self {
            alpha,
            f0,
            delta,
            tau,
        })
    }

    fn gauge(&self, t: f64) -> Result<f64, ExactError> {
        let e = (self.delta * t).exp();
        let denom = self.alpha + e;
        if denom <= 0.0 {
            return Err(ExactError::DomainError(format!(
                "alpha + e^(delta t) = {denom} <= 0"
            )));
        }
        Ok(self.delta * e / denom)
    }

    /// `f(t_j)` for `j = 0..=steps` by iterating the difference equation.
    pub fn f_values(&self, steps: usize) -> Result<Vec<f64>, ExactError> {
        let edt = (self.delta * self.tau).exp();
        let mut f = Vec::with_capacity(steps + 1);
        f.push(self.f0);
        for j in 0..steps {
            let t = j as f64 * self.tau;
            let e = (self.delta * t).exp();
            let denom = self.alpha + e;
            if denom <= 0.0 {
                return Err(ExactError::DomainError(format!(
                    "alpha + e^(delta t) = {denom} <= 0"
                )));
            }
            let prev = f[j];
            f.push(edt * prev - 0.5 * edt * (edt - 1.0) * e / denom);
        }
        Ok(f)
    }

    /// Closed-form partial sum for `f(t_j)`:
    /// `f(t_j) = e^{delta t_j} (f0 - (e^{delta tau}-1)/2 *
    ///   sum_{k=0}^{j-1} e^{-delta t_k} / (1 + alpha e^{-delta t_k}))`.
    /// Used as a cross-check of the recursion.
    pub fn f_closed_form(&self, j: usize) -> Result<f64, ExactError> {
        let edt = (self.delta * self.tau).exp();
        let mut sum = 0.0;
        for k in 0..j {
            let tk = k as f64 * self.tau;
            let em = (-self.delta * tk).exp();
            let denom = 1.0 + self.alpha * em;
            if denom <= 0.0 {
                return Err(ExactError::DomainError(format!(
                    "1 + alpha e^(-delta t) = {denom} <= 0"
                )));
            }
            sum += em / denom;
        }
        let tj = j as f64 * self.tau;
        Ok((self.delta * tj).exp() * (self.f0 - 0.5 * (edt - 1.0) * sum))
    }

    /// Solution value at position `x` on layer `j` (time `t_j = j tau`).
    pub fn eval(&self, x: f64, j: usize) -> Result<f64, ExactError> {
        let f = self.f_values(j)?;
        self.eval_with_f(x, j as f64 * self.tau, f[j])
    }

    /// Solution value given a precomputed `f(t)`; avoids re-iterating the
    /// recursion when stepping through a run.
    pub fn eval_with_f(&self, x: f64, t: f64, f_t: f64) -> Result<f64, ExactError> {
        let g = self.gauge(t)?;
        Ok((f_t - g * x * x / 4.0).exp())
    }

    /// Trajectory of the node starting at `x0` when `t = 0`.
    pub fn trajectory(&self, x0: f64, t: f64) -> Result<f64, ExactError> {
        let denom = 1.0 + self.alpha;
        if denom <= 0.0 {
            return Err(ExactError::DomainError(format!("1 + alpha = {denom} <= 0")));
        }
        Ok(x0 * ((self.delta * t).exp() + self.alpha) / denom)
    }

    /// Cauchy datum `u(x, 0) = exp(f0 - delta x^2 / (4 (alpha + 1)))`.
    pub fn initial(&self, x: f64) -> Result<f64, ExactError> {
        self.eval_with_f(x, 0.0, self.f0)
    }
}

/// Discrete blow-up data for the implicit power-law scheme with
/// `n = sigma + 1`. The separable solution `u = y_j theta_k` grows by the
/// factor `rho` per step on a geometrically decreasing time mesh; the
/// closed-form spatial profile is known for `sigma = 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupSpec {
    pub sigma: f64,
    pub rho: f64,
    pub m: usize,
}

impl BlowupSpec {
    pub fn new(sigma: f64, rho: f64, m: usize) -> Result<Self, ExactError> {
        if !(sigma > 0.0) {
            return Err(ExactError::DomainError(format!("sigma = {sigma} <= 0")));
        }
        if !(rho > 1.0) {
            return Err(ExactError::DomainError(format!("rho = {rho} <= 1")));
        }
        if m < 1 {
            return Err(ExactError::DomainError("M must be at least 1".into()));
        }
        Ok(Self { sigma, rho, m })
    }

    /// Source exponent of the blow-up case.
    pub fn n(&self) -> f64 {
        self.sigma + 1.0
    }

    /// Spatial step `h = 2 sin(3 pi / (2(M+1)))`.
    pub fn h(&self) -> f64 {
        2.0 * (1.5 * std::f64::consts::PI / (self.m as f64 + 1.0)).sin()
    }

    /// Localization length `l_h = (3 pi h / 2) / arcsin(h/2)`; the profile
    /// occupies `x in [0, l_h]` with `l_h = (M+1) h`.
    pub fn l_h(&self) -> f64 {
        let h = self.h();
        1.5 * std::f64::consts::PI * h / (0.5 * h).asin()
    }

    /// Wave number `a_h = pi / l_h`.
    pub fn a_h(&self) -> f64 {
        std::f64::consts::PI / self.l_h()
    }

    /// Time step `tau_j = sigma (rho - 1) rho^{-sigma-1} rho^{-sigma j}`.
    pub fn tau_j(&self, j: usize) -> f64 {
        self.sigma
            * (self.rho - 1.0)
            * self.rho.powf(-self.sigma - 1.0)
            * self.rho.powf(-self.sigma * j as f64)
    }

    /// Blow-up time `T = (sigma / rho)(rho - 1)/(rho^sigma - 1)`, the sum of
    /// the geometric step series.
    pub fn blowup_time(&self) -> f64 {
        self.sigma / self.rho * (self.rho - 1.0) / (self.rho.powf(self.sigma) - 1.0)
    }

    /// Amplitude `y_j = rho^j` of the separable solution, normalized to
    /// `y_0 = 1`.
    pub fn amplitude(&self, j: usize) -> f64 {
        self.rho.powi(j as i32)
    }

    /// Node positions `x_k = k h`, `k = 0..=M+1`.
    pub fn mesh(&self) -> Vec<f64> {
        let h = self.h();
        (0..=self.m + 1).map(|k| k as f64 * h).collect()
    }

    /// Closed-form profile
    /// `theta_k = sqrt(2) (3(1 - (4/h^2) sin^2(a_h h / 2)))^{-1/2} sin(a_h k h)`
    /// satisfying the discrete equation
    /// `(theta^3)_{xbar x} + theta^3 = theta / 2` at interior nodes.
    /// Only the `sigma = 2` profile has this closed form.
    pub fn profile(&self) -> Result<Vec<f64>, ExactError> {
        if self.sigma != 2.0 {
            return Err(ExactError::DomainError(format!(
                "closed-form profile requires sigma = 2, got {}",
                self.sigma
            )));
        }
        let h = self.h();
        let a = self.a_h();
        let bracket = 1.0 - 4.0 / (h * h) * (a * h / 2.0).sin().powi(2);
        if bracket <= 0.0 {
            return Err(ExactError::DomainError(format!(
                "profile amplitude bracket = {bracket} <= 0"
            )));
        }
        let amp = std::f64::consts::SQRT_2 / (3.0 * bracket).sqrt();
        Ok((0..=self.m + 1)
            .map(|k| {
                // a_h (M+1) h = pi identically, so the right endpoint is an
                // exact zero of the sine arch.
                if k == self.m + 1 {
                    0.0
                } else {
                    amp * (a * k as f64 * h).sin()
                }
            })
            .collect())
    }
}
