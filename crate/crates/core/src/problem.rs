//! Problem data: wave-speed coefficient, potential, initial data and the
//! Carleman weight family
//!
//! ```text
//! phi(x, tau)  = |x - x0|^2 - beta tau^2 + M0        (tau in [-T, T])
//! varphi       = exp(lambda phi)
//! rho(x, t)    = exp(-s varphi(x, 2t - T))           (t in [0, T])
//! rho0(t)      = theta_delta(t)^{-1} rho(1, t)
//! ```
//!
//! The boundary weight used in assembly is the inverse square
//! `w0(t) = theta_delta(t)^2 rho(1,t)^{-2}`, which is finite on [0, T] and
//! vanishes at both endpoints.

use crate::error::{Error, Result};

/// Maximum exponent argument before `exp` overflows an f64.
const EXP_OVERFLOW: f64 = 700.0;

/// Number of samples for the dense minimum/maximum scans.
const SCAN_POINTS: usize = 20_000;

// ---------------------------------------------------------------------------
// coefficient a(x)
// ---------------------------------------------------------------------------

/// Wave-speed-squared coefficient a(x) on [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientField {
    /// a(x) = value
    Constant { value: f64 },
    /// a(x) = intercept + slope x (the smooth family used for admissibility
    /// studies; nondecreasing when slope >= 0)
    Affine { intercept: f64, slope: f64 },
    /// C2 monotone blend from `left` to `right` over (ramp_start, ramp_end)
    /// via the quintic smoothstep; constant outside.
    Transition {
        left: f64,
        right: f64,
        ramp_start: f64,
        ramp_end: f64,
    },
}

impl CoefficientField {
    pub fn constant(value: f64) -> Self {
        CoefficientField::Constant { value }
    }

    pub fn affine(intercept: f64, slope: f64) -> Self {
        CoefficientField::Affine { intercept, slope }
    }

    /// The transition profile of the variable-coefficient experiment:
    /// 1 on [0, 0.45], 5 on [0.55, 1], quintic blend between.
    pub fn transition_1_to_5() -> Self {
        CoefficientField::Transition {
            left: 1.0,
            right: 5.0,
            ramp_start: 0.45,
            ramp_end: 0.55,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            CoefficientField::Constant { value } => value,
            CoefficientField::Affine { intercept, slope } => intercept + slope * x,
            CoefficientField::Transition {
                left,
                right,
                ramp_start,
                ramp_end,
            } => {
                if x <= ramp_start {
                    left
                } else if x >= ramp_end {
                    right
                } else {
                    let u = (x - ramp_start) / (ramp_end - ramp_start);
                    left + (right - left) * smoothstep(u)
                }
            }
        }
    }

    /// Analytic derivative a_x(x).
    pub fn eval_dx(&self, x: f64) -> f64 {
        match *self {
            CoefficientField::Constant { .. } => 0.0,
            CoefficientField::Affine { slope, .. } => slope,
            CoefficientField::Transition {
                left,
                right,
                ramp_start,
                ramp_end,
            } => {
                if x <= ramp_start || x >= ramp_end {
                    0.0
                } else {
                    let w = ramp_end - ramp_start;
                    let u = (x - ramp_start) / w;
                    (right - left) * smoothstep_deriv(u) / w
                }
            }
        }
    }

    /// Check a(x) >= a0 > 0 on a dense sample and that evaluations are finite.
    pub fn validate(&self) -> Result<()> {
        let mut min = f64::INFINITY;
        for i in 0..=SCAN_POINTS {
            let x = i as f64 / SCAN_POINTS as f64;
            let v = self.eval(x);
            if !v.is_finite() || !self.eval_dx(x).is_finite() {
                return Err(Error::InvalidCoefficient(format!(
                    "non-finite value at x = {x}"
                )));
            }
            min = min.min(v);
        }
        if min <= 0.0 {
            return Err(Error::InvalidCoefficient(format!(
                "a(x) must be strictly positive; min sampled value {min}"
            )));
        }
        Ok(())
    }
}

/// Quintic smoothstep 6u^5 - 15u^4 + 10u^3 on [0, 1].
pub fn smoothstep(u: f64) -> f64 {
    u * u * u * (10.0 + u * (-15.0 + 6.0 * u))
}

pub fn smoothstep_deriv(u: f64) -> f64 {
    30.0 * u * u * (u - 1.0) * (u - 1.0)
}

pub fn smoothstep_second_deriv(u: f64) -> f64 {
    60.0 * u * (2.0 * u - 1.0) * (u - 1.0)
}

// ---------------------------------------------------------------------------
// potential b(x, t)
// ---------------------------------------------------------------------------

/// Bounded potential b(x, t) on the space-time cylinder.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialField {
    Constant { value: f64 },
}

impl PotentialField {
    pub fn constant(value: f64) -> Self {
        PotentialField::Constant { value }
    }

    pub fn eval(&self, _x: f64, _t: f64) -> f64 {
        match *self {
            PotentialField::Constant { value } => value,
        }
    }

    /// Declared sup-norm bound.
    pub fn bound(&self) -> f64 {
        match *self {
            PotentialField::Constant { value } => value.abs(),
        }
    }
}

// ---------------------------------------------------------------------------
// initial data descriptors
// ---------------------------------------------------------------------------

/// Function descriptor for initial position or velocity.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Zero,
    /// sin(pi x)
    SinePi,
    /// exp(-coeff (x - center)^2)
    Gaussian { coeff: f64, center: f64 },
    /// Piecewise linear through (xs[i], vs[i]); zero outside the breakpoints.
    PiecewiseLinear { xs: Vec<f64>, vs: Vec<f64> },
    /// scale * 1_{[lo, hi)} with half-open support
    Indicator { lo: f64, hi: f64, scale: f64 },
}

impl Profile {
    /// The continuous/hat profile x 1_[0,1/2] + (1-x) 1_(1/2,1].
    pub fn hat() -> Self {
        Profile::PiecewiseLinear {
            xs: vec![0.0, 0.5, 1.0],
            vs: vec![0.0, 0.5, 0.0],
        }
    }

    /// Raw pointwise evaluation (half-open convention for indicators).
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Profile::Zero => 0.0,
            Profile::SinePi => (std::f64::consts::PI * x).sin(),
            Profile::Gaussian { coeff, center } => (-coeff * (x - center) * (x - center)).exp(),
            Profile::PiecewiseLinear { xs, vs } => {
                if x < xs[0] || x > *xs.last().unwrap() {
                    return 0.0;
                }
                let k = match xs.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
                    Ok(i) => i.min(xs.len() - 2),
                    Err(i) => i.saturating_sub(1).min(xs.len() - 2),
                };
                let c = (x - xs[k]) / (xs[k + 1] - xs[k]);
                vs[k] * (1.0 - c) + vs[k + 1] * c
            }
            Profile::Indicator { lo, hi, scale } => {
                if *lo <= x && x < *hi {
                    *scale
                } else {
                    0.0
                }
            }
        }
    }

    /// Nodal sampling. A node that lands on a jump within floating fuzz takes
    /// the left-closed value (the value approached from the left of the jump,
    /// so both endpoints of an indicator sample to `scale`). Mesh nodes k*dx
    /// rarely hit jump abscissas exactly in binary, hence the tolerance.
    pub fn sample_node(&self, x: f64) -> f64 {
        if let Profile::Indicator { lo, hi, scale } = self {
            let tol = 1e-9 * (1.0 + x.abs());
            if (x - lo).abs() <= tol || (x - hi).abs() <= tol {
                return *scale;
            }
        }
        self.eval(x)
    }

    /// Whether the descriptor is smooth enough that forward verification can
    /// use the raw evaluator; jumpy profiles are replaced by their nodal
    /// interpolant (the data the discrete problem actually controls).
    pub fn is_smooth(&self) -> bool {
        matches!(self, Profile::Zero | Profile::SinePi | Profile::Gaussian { .. })
    }

    /// The piecewise-linear interpolant of this profile on a uniform grid of
    /// `nx` intervals, sampled with the nodal convention.
    pub fn nodal_interpolant(&self, nx: usize) -> Profile {
        let xs: Vec<f64> = (0..=nx).map(|k| k as f64 / nx as f64).collect();
        let vs: Vec<f64> = xs.iter().map(|&x| self.sample_node(x)).collect();
        Profile::PiecewiseLinear { xs, vs }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Profile::PiecewiseLinear { xs, vs } => {
                if xs.len() < 2 || xs.len() != vs.len() {
                    return Err(Error::InvalidParameter(
                        "piecewise-linear profile needs matching xs/vs with >= 2 points".into(),
                    ));
                }
                if xs.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidParameter(
                        "piecewise-linear breakpoints must increase strictly".into(),
                    ));
                }
                Ok(())
            }
            Profile::Indicator { lo, hi, .. } => {
                if lo >= hi {
                    return Err(Error::InvalidParameter(format!(
                        "indicator support [{lo}, {hi}) is empty"
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Initial position and velocity of the controlled wave.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub y0: Profile,
    pub y1: Profile,
}

impl InitialData {
    pub fn new(y0: Profile, y1: Profile) -> Self {
        InitialData { y0, y1 }
    }

    pub fn validate(&self) -> Result<()> {
        self.y0.validate()?;
        self.y1.validate()
    }
}

// ---------------------------------------------------------------------------
// weights
// ---------------------------------------------------------------------------

/// Time cutoff profile for the boundary weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaShape {
    /// theta^2 ramps linearly from 0 to 1 over width delta (theta ~ sqrt(t)
    /// near the endpoints, the borderline behavior the weight theory allows).
    SqrtRamp,
    /// C2 quintic smoothstep ramp.
    Quintic,
}

/// Parameters of the Carleman weight family.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightParams {
    /// Virtual observation point, strictly negative.
    pub x0: f64,
    /// Weight curvature; must lie in the open interval of [`beta_bounds`].
    pub beta: f64,
    /// Carleman exponent scale, positive.
    pub lambda: f64,
    /// Carleman magnitude, nonnegative.
    pub s: f64,
    /// Shift making phi >= 1 on the doubled time interval.
    pub m0: f64,
    /// Cutoff width of theta_delta, in (0, T/2).
    pub delta: f64,
    /// Control horizon.
    pub t_final: f64,
    /// Cutoff profile.
    pub theta: ThetaShape,
}

/// Fraction of T used for the default cutoff width.
pub const DEFAULT_DELTA_FRACTION: f64 = 0.2;

impl WeightParams {
    /// Paper-style parameters: x0 = -1/20, beta = 0.99, lambda = 0.1, s = 1,
    /// minimal M0, delta = 0.225 T, sqrt ramp.
    pub fn paper_defaults(t_final: f64) -> Self {
        let x0 = -0.05;
        let beta = 0.99;
        WeightParams {
            x0,
            beta,
            lambda: 0.1,
            s: 1.0,
            m0: minimal_m0(x0, beta, t_final),
            delta: DEFAULT_DELTA_FRACTION * t_final,
            t_final,
            theta: ThetaShape::SqrtRamp,
        }
    }

    pub fn validate(&self, a: &CoefficientField) -> Result<()> {
        if self.x0 >= 0.0 {
            return Err(Error::InvalidParameter(format!("x0 = {} must be < 0", self.x0)));
        }
        if self.lambda <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "lambda = {} must be > 0",
                self.lambda
            )));
        }
        if self.s < 0.0 {
            return Err(Error::InvalidParameter(format!("s = {} must be >= 0", self.s)));
        }
        if self.t_final <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "T = {} must be > 0",
                self.t_final
            )));
        }
        if !(self.delta > 0.0 && self.delta < self.t_final / 2.0) {
            return Err(Error::InvalidParameter(format!(
                "delta = {} must lie in (0, T/2)",
                self.delta
            )));
        }
        let (lo, hi) = beta_bounds(a, self.x0)?;
        if !(self.beta > lo && self.beta < hi) {
            return Err(Error::InvalidParameter(format!(
                "beta = {} outside the admissible interval ({lo:.6}, {hi:.6})",
                self.beta
            )));
        }
        if self.m0 < minimal_m0(self.x0, self.beta, self.t_final) - 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "M0 = {} below the minimal value {}",
                self.m0,
                minimal_m0(self.x0, self.beta, self.t_final)
            )));
        }
        // probe the largest exponents for overflow
        self.rho_inv2(1.0, self.t_final / 2.0)?;
        Ok(())
    }

    /// phi(x, tau) on the doubled time interval tau in [-T, T].
    pub fn phi(&self, x: f64, tau: f64) -> f64 {
        let dx = x - self.x0;
        dx * dx - self.beta * tau * tau + self.m0
    }

    /// varphi(x, tau) = exp(lambda phi), with overflow detection.
    pub fn varphi(&self, x: f64, tau: f64) -> Result<f64> {
        let e = self.lambda * self.phi(x, tau);
        if e > EXP_OVERFLOW {
            return Err(Error::WeightOverflow {
                exponent: e,
                lambda: self.lambda,
                s: self.s,
            });
        }
        Ok(e.exp())
    }

    /// rho(x, t) = exp(-s varphi(x, 2t - T)) for t in [0, T].
    pub fn rho(&self, x: f64, t: f64) -> Result<f64> {
        Ok((-self.s * self.varphi(x, 2.0 * t - self.t_final)?).exp())
    }

    /// rho(x, t)^{-2} = exp(2 s varphi(x, 2t - T)); the weight entering the
    /// bilinear form.
    pub fn rho_inv2(&self, x: f64, t: f64) -> Result<f64> {
        let e = 2.0 * self.s * self.varphi(x, 2.0 * t - self.t_final)?;
        if e > EXP_OVERFLOW {
            return Err(Error::WeightOverflow {
                exponent: e,
                lambda: self.lambda,
                s: self.s,
            });
        }
        Ok(e.exp())
    }

    /// d/dt of rho(1, t)^{-2} (analytic, used by the control product rule).
    pub fn rho_inv2_boundary_deriv(&self, t: f64) -> Result<f64> {
        let tau = 2.0 * t - self.t_final;
        let vp = self.varphi(1.0, tau)?;
        let r2 = self.rho_inv2(1.0, t)?;
        // d/dt varphi(1, 2t-T) = lambda * (-2 beta tau) * varphi * 2
        Ok(r2 * 2.0 * self.s * self.lambda * (-2.0 * self.beta * tau) * vp * 2.0)
    }

    /// theta_delta(t) in [0, 1].
    pub fn theta(&self, t: f64) -> f64 {
        let t_final = self.t_final;
        if t <= 0.0 || t >= t_final {
            return 0.0;
        }
        let u = t.min(t_final - t);
        if u >= self.delta {
            return 1.0;
        }
        match self.theta {
            ThetaShape::SqrtRamp => (u / self.delta).sqrt(),
            ThetaShape::Quintic => smoothstep(u / self.delta),
        }
    }

    /// First derivative of theta_delta (quintic shape only; the sqrt ramp is
    /// differentiated through theta^2 instead).
    pub fn theta_deriv(&self, t: f64) -> f64 {
        let t_final = self.t_final;
        if t <= 0.0 || t >= t_final {
            return 0.0;
        }
        let (u, sign) = if t <= t_final - t { (t, 1.0) } else { (t_final - t, -1.0) };
        if u >= self.delta {
            return 0.0;
        }
        match self.theta {
            ThetaShape::SqrtRamp => sign * 0.5 / (self.delta * (u / self.delta).sqrt()),
            ThetaShape::Quintic => sign * smoothstep_deriv(u / self.delta) / self.delta,
        }
    }

    /// Second derivative of theta_delta (quintic shape).
    pub fn theta_second_deriv(&self, t: f64) -> f64 {
        let t_final = self.t_final;
        if t <= 0.0 || t >= t_final {
            return 0.0;
        }
        let u = t.min(t_final - t);
        if u >= self.delta {
            return 0.0;
        }
        match self.theta {
            ThetaShape::SqrtRamp => -0.25 / (self.delta * self.delta) * (u / self.delta).powf(-1.5),
            ThetaShape::Quintic => smoothstep_second_deriv(u / self.delta) / (self.delta * self.delta),
        }
    }

    /// theta_delta(t)^2, the ramp multiplying the boundary weight.
    pub fn theta_sq(&self, t: f64) -> f64 {
        let t_final = self.t_final;
        if t <= 0.0 || t >= t_final {
            return 0.0;
        }
        let u = t.min(t_final - t);
        if u >= self.delta {
            return 1.0;
        }
        match self.theta {
            ThetaShape::SqrtRamp => u / self.delta,
            ThetaShape::Quintic => {
                let v = smoothstep(u / self.delta);
                v * v
            }
        }
    }

    /// d/dt theta^2. On the plateau and at the exact knots the plateau value
    /// 0 is returned.
    pub fn theta_sq_deriv(&self, t: f64) -> f64 {
        let t_final = self.t_final;
        if t <= 0.0 || t >= t_final {
            return 0.0;
        }
        let (u, sign) = if t <= t_final - t { (t, 1.0) } else { (t_final - t, -1.0) };
        if u >= self.delta {
            return 0.0;
        }
        match self.theta {
            ThetaShape::SqrtRamp => sign / self.delta,
            ThetaShape::Quintic => {
                let c = u / self.delta;
                sign * 2.0 * smoothstep(c) * smoothstep_deriv(c) / self.delta
            }
        }
    }

    /// The assembly-facing boundary weight w0(t) = theta^2 rho(1, t)^{-2};
    /// finite on [0, T], exactly 0 at both endpoints.
    pub fn control_weight(&self, t: f64) -> Result<f64> {
        let th2 = self.theta_sq(t);
        if th2 == 0.0 {
            return Ok(0.0);
        }
        Ok(th2 * self.rho_inv2(1.0, t)?)
    }

    /// Analytic d/dt of the boundary weight.
    pub fn control_weight_deriv(&self, t: f64) -> Result<f64> {
        let th2 = self.theta_sq(t);
        if t <= 0.0 || t >= self.t_final {
            return Ok(0.0);
        }
        Ok(self.theta_sq_deriv(t) * self.rho_inv2(1.0, t)? + th2 * self.rho_inv2_boundary_deriv(t)?)
    }
}

/// The minimal M0 satisfying phi >= 1 on [0,1] x [-T, T]: 1 - x0^2 + beta T^2.
pub fn minimal_m0(x0: f64, beta: f64, t_final: f64) -> f64 {
    1.0 - x0 * x0 + beta * t_final * t_final
}

/// Bundle of weight values at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightValues {
    pub phi: f64,
    pub varphi: f64,
    pub rho: f64,
}

/// Evaluate phi, varphi and rho at (x, t). phi and varphi take the time
/// argument directly on [-T, T]; rho applies the 2t - T doubling internally.
pub fn weight_eval(w: &WeightParams, x: f64, t: f64) -> Result<WeightValues> {
    Ok(WeightValues {
        phi: w.phi(x, t),
        varphi: w.varphi(x, t)?,
        rho: w.rho(x, t)?,
    })
}

/// rho0(t) = theta_delta(t)^{-1} rho(1, t). Returns +inf at the endpoints;
/// assembly uses the finite inverse square [`WeightParams::control_weight`].
pub fn rho0_eval(w: &WeightParams, t: f64) -> Result<f64> {
    let th = w.theta(t);
    if th == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(w.rho(1.0, t)? / th)
}

// ---------------------------------------------------------------------------
// admissibility and horizon checks
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    /// -min over [0,1] of a + (x - x0) a_x
    pub lhs: f64,
    /// min over [0,1] of a + (x - x0) a_x / 2
    pub rhs: f64,
}

/// Dense scan plus golden-section refinement of the minimum of `f` on [0, 1].
fn min_on_unit(f: &dyn Fn(f64) -> f64) -> Result<f64> {
    let n = SCAN_POINTS;
    let mut best = f64::INFINITY;
    let mut best_i = 0usize;
    for i in 0..=n {
        let x = i as f64 / n as f64;
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::InvalidCoefficient(format!(
                "non-finite evaluation at x = {x}"
            )));
        }
        if v < best {
            best = v;
            best_i = i;
        }
    }
    // golden-section refinement inside the bracketing neighbors
    let mut a = (best_i.saturating_sub(1)) as f64 / n as f64;
    let mut b = ((best_i + 1).min(n)) as f64 / n as f64;
    let inv_phi = 0.618_033_988_749_894_8;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > 1e-10 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    Ok(best.min(fc).min(fd))
}

/// Check membership of `a` in the admissible coefficient class for the
/// observation point x0 < 0.
pub fn check_admissible(a: &CoefficientField, x0: f64) -> Result<AdmissibilityReport> {
    if x0 >= 0.0 {
        return Err(Error::InvalidParameter(format!("x0 = {x0} must be < 0")));
    }
    a.validate()?;
    let g1 = |x: f64| a.eval(x) + (x - x0) * a.eval_dx(x);
    let g2 = |x: f64| a.eval(x) + 0.5 * (x - x0) * a.eval_dx(x);
    let lhs = -min_on_unit(&g1)?;
    let rhs = min_on_unit(&g2)?;
    Ok(AdmissibilityReport {
        admissible: lhs < rhs,
        lhs,
        rhs,
    })
}

/// The open interval of valid beta values.
pub fn beta_bounds(a: &CoefficientField, x0: f64) -> Result<(f64, f64)> {
    let r = check_admissible(a, x0)?;
    if !r.admissible {
        return Err(Error::NotAdmissible { lhs: r.lhs, rhs: r.rhs });
    }
    Ok((r.lhs, r.rhs))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorizonReport {
    pub ok: bool,
    pub critical_t: f64,
}

/// critical_T = (2 / beta) max over [0,1] of sqrt(a(x)) (x - x0); the horizon
/// must exceed it strictly.
pub fn check_time_horizon(
    a: &CoefficientField,
    x0: f64,
    beta: f64,
    t_final: f64,
) -> Result<HorizonReport> {
    let neg = |x: f64| -(a.eval(x).sqrt() * (x - x0));
    let max = -min_on_unit(&neg)?;
    let critical_t = 2.0 / beta * max;
    Ok(HorizonReport {
        ok: t_final > critical_t,
        critical_t,
    })
}

// ---------------------------------------------------------------------------
// full problem configuration
// ---------------------------------------------------------------------------

/// Everything needed to pose one discrete control problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemConfig {
    pub coefficient: CoefficientField,
    pub potential: PotentialField,
    pub data: InitialData,
    pub weights: WeightParams,
    pub nx: usize,
    pub nt: usize,
    /// Accept T below the critical horizon (the blow-up study and the
    /// variable-coefficient experiment run in that regime deliberately).
    pub allow_short_horizon: bool,
}

impl ProblemConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.nt < 2 {
            return Err(Error::InvalidParameter(format!(
                "mesh sizes Nx = {}, Nt = {} must both be >= 2",
                self.nx, self.nt
            )));
        }
        self.data.validate()?;
        let report = check_admissible(&self.coefficient, self.weights.x0)?;
        if !report.admissible {
            return Err(Error::NotAdmissible {
                lhs: report.lhs,
                rhs: report.rhs,
            });
        }
        self.weights.validate(&self.coefficient)?;
        let horizon = check_time_horizon(
            &self.coefficient,
            self.weights.x0,
            self.weights.beta,
            self.weights.t_final,
        )?;
        if !horizon.ok && !self.allow_short_horizon {
            return Err(Error::HorizonTooShort {
                t: self.weights.t_final,
                critical: horizon.critical_t,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_coefficient_is_admissible() {
        for a0 in [0.3, 1.0, 5.0] {
            for x0 in [-0.05, -1.0, -7.0] {
                let r = check_admissible(&CoefficientField::constant(a0), x0).unwrap();
                assert!(r.admissible, "a0={a0} x0={x0}: {r:?}");
                assert!((r.lhs + a0).abs() < 1e-9);
                assert!((r.rhs - a0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn decreasing_affine_is_rejected() {
        // a(x) = 2 - 1.9x: lhs = 1.895, rhs = -0.8975 by minimizing the two
        // affine expressions at x = 1
        let a = CoefficientField::affine(2.0, -1.9);
        let r = check_admissible(&a, -0.05).unwrap();
        assert!(!r.admissible);
        assert!((r.lhs - 1.895).abs() < 1e-6, "lhs {}", r.lhs);
        assert!((r.rhs + 0.8975).abs() < 1e-6, "rhs {}", r.rhs);
    }

    #[test]
    fn nondecreasing_affine_is_admissible() {
        let a = CoefficientField::affine(1.0, 1.0);
        let (lo, hi) = beta_bounds(&a, -0.05).unwrap();
        // minimized at x = 0: -(1 + 0.05) and 1 + 0.025
        assert!((lo + 1.05).abs() < 1e-6, "lo {lo}");
        assert!((hi - 1.025).abs() < 1e-6, "hi {hi}");
    }

    #[test]
    fn beta_bounds_for_unit_coefficient() {
        let (lo, hi) = beta_bounds(&CoefficientField::constant(1.0), -0.05).unwrap();
        assert!((lo + 1.0).abs() < 1e-9);
        assert!((hi - 1.0).abs() < 1e-9);
        assert!(lo < 0.99 && 0.99 < hi, "paper beta inside");
    }

    #[test]
    fn horizon_constant_coefficient() {
        let r = check_time_horizon(&CoefficientField::constant(1.0), -0.05, 0.99, 2.2).unwrap();
        assert!((r.critical_t - 2.0 / 0.99 * 1.05).abs() < 1e-9);
        assert!(r.ok);
        // equality is not enough: strict inequality required
        let r2 = check_time_horizon(
            &CoefficientField::constant(1.0),
            -0.05,
            0.99,
            r.critical_t,
        )
        .unwrap();
        assert!(!r2.ok);
    }

    #[test]
    fn horizon_transition_coefficient() {
        // the paper quotes 2 (1 + 1/20) sqrt(5) ~ 4.69 (taking beta -> 1);
        // with beta = 0.99 the implemented formula gives ~4.74
        let r =
            check_time_horizon(&CoefficientField::transition_1_to_5(), -0.05, 0.99, 2.2).unwrap();
        assert!((r.critical_t - 4.69).abs() / 4.69 < 0.02, "{}", r.critical_t);
        assert!(!r.ok, "T = 2.2 is below the critical horizon");
    }

    #[test]
    fn transition_derivative_matches_finite_differences() {
        let a = CoefficientField::transition_1_to_5();
        let eps = 1e-6;
        for i in 0..=100 {
            let x = 0.005 + 0.99 * i as f64 / 100.0;
            let fd = (a.eval(x + eps) - a.eval(x - eps)) / (2.0 * eps);
            let an = a.eval_dx(x);
            let denom = an.abs().max(1.0);
            assert!((fd - an).abs() / denom < 1e-6, "x={x}: {fd} vs {an}");
        }
    }

    #[test]
    fn weight_values_paper_parameters() {
        let w = WeightParams::paper_defaults(2.2);
        assert!((w.m0 - 5.7891).abs() < 1e-12);
        // corner minimum of phi is exactly 1 with the minimal shift
        assert!((w.phi(0.0, 2.2) - 1.0).abs() < 1e-12);
        assert!((w.phi(0.0, -2.2) - 1.0).abs() < 1e-12);
        let v = weight_eval(&w, 1.0, 0.0).unwrap();
        assert!((v.phi - 6.8916).abs() < 1e-12);
        assert!((v.varphi - 1.992041515381092).abs() < 1e-12);
        // rho applies the time doubling: rho(1, T/2) uses tau = 0
        let rho_mid = w.rho(1.0, 1.1).unwrap();
        assert!((rho_mid - 0.13642).abs() < 5e-6, "rho {rho_mid}");
    }

    #[test]
    fn zero_s_means_unit_rho() {
        let mut w = WeightParams::paper_defaults(2.2);
        w.s = 0.0;
        for (x, t) in [(0.0, 0.0), (0.5, 1.3), (1.0, 2.2)] {
            assert_eq!(w.rho(x, t).unwrap(), 1.0);
            assert_eq!(w.rho_inv2(x, t).unwrap(), 1.0);
        }
    }

    #[test]
    fn weight_overflow_reported() {
        let mut w = WeightParams::paper_defaults(2.2);
        w.lambda = 200.0;
        match weight_eval(&w, 1.0, 0.0) {
            Err(Error::WeightOverflow { lambda, .. }) => assert_eq!(lambda, 200.0),
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn phi_at_least_one_on_grid() {
        let w = WeightParams::paper_defaults(2.2);
        for i in 0..=200 {
            for j in 0..=200 {
                let x = i as f64 / 200.0;
                let tau = -2.2 + 4.4 * j as f64 / 200.0;
                assert!(w.phi(x, tau) >= 1.0 - 1e-12);
            }
        }
    }

    #[test]
    fn rho_bounded_and_time_symmetric() {
        let w = WeightParams::paper_defaults(2.2);
        let cap = (-w.s).exp();
        for i in 0..=60 {
            for j in 0..=60 {
                let x = i as f64 / 60.0;
                let t = 2.2 * j as f64 / 60.0;
                let r = w.rho(x, t).unwrap();
                assert!(r > 0.0 && r <= cap + 1e-15);
                let mirror = w.rho(x, 2.2 - t).unwrap();
                assert!((r - mirror).abs() <= 1e-15 * r.abs());
            }
        }
    }

    #[test]
    fn rho0_endpoints_and_midpoint() {
        let w = WeightParams::paper_defaults(2.2);
        assert!(rho0_eval(&w, 0.0).unwrap().is_infinite());
        assert!(rho0_eval(&w, 2.2).unwrap().is_infinite());
        assert_eq!(w.control_weight(0.0).unwrap(), 0.0);
        assert_eq!(w.control_weight(2.2).unwrap(), 0.0);
        // on the plateau theta = 1 and rho0 = rho(1, .)
        let mid = rho0_eval(&w, 1.1).unwrap();
        assert!((mid - w.rho(1.0, 1.1).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn quintic_theta_is_c2_at_the_knots() {
        let mut w = WeightParams::paper_defaults(2.2);
        w.theta = ThetaShape::Quintic;
        w.delta = 0.11;
        let d = w.delta;
        let h = 1e-6;
        for knot in [w.delta, w.t_final - w.delta] {
            for probe in [0usize, 1, 2] {
                let f = |t: f64| match probe {
                    0 => w.theta(t),
                    1 => w.theta_deriv(t),
                    _ => w.theta_second_deriv(t),
                };
                // one-sided values converge to a common limit: the jump at
                // offset h is bounded by the next derivative's sup, and
                // halving h halves it
                let lip = match probe {
                    0 => 2.0 * 1.875 / d,       // sup |theta'|
                    1 => 2.0 * 10.0 / (d * d),  // sup |theta''|
                    _ => 2.0 * 60.0 / (d * d * d),
                };
                let jump = (f(knot - h) - f(knot + h)).abs();
                assert!(jump <= lip * h, "probe {probe} at {knot}: jump {jump}");
                let jump_half = (f(knot - h / 2.0) - f(knot + h / 2.0)).abs();
                assert!(jump_half <= 0.6 * jump + 1e-14, "probe {probe} not vanishing");
            }
        }
        // finite-difference consistency of the derivatives inside the ramp
        let t = 0.04;
        let h = 1e-5;
        let fd1 = (w.theta(t + h) - w.theta(t - h)) / (2.0 * h);
        assert!((fd1 - w.theta_deriv(t)).abs() < 1e-5);
        let fd2 = (w.theta_deriv(t + h) - w.theta_deriv(t - h)) / (2.0 * h);
        assert!((fd2 - w.theta_second_deriv(t)).abs() / fd2.abs().max(1.0) < 1e-5);
    }

    #[test]
    fn quintic_theta_over_sqrt_t_is_bounded() {
        let mut w = WeightParams::paper_defaults(2.2);
        w.theta = ThetaShape::Quintic;
        let mut sup: f64 = 0.0;
        for i in 1..=1000 {
            let t = w.delta * i as f64 / 1000.0;
            sup = sup.max(w.theta(t) / t.sqrt());
        }
        assert!(sup.is_finite() && sup < 10.0, "sup {sup}");
    }

    #[test]
    fn indicator_nodal_sampling_snaps_at_jumps() {
        let p = Profile::Indicator {
            lo: 0.5,
            hi: 0.7,
            scale: 1.0,
        };
        // raw half-open evaluation
        assert_eq!(p.eval(0.5), 1.0);
        assert_eq!(p.eval(0.7), 0.0);
        // binary grid node 56/80 is 0.7000...04 and must still sample to 1
        let node = 56.0 * (1.0 / 80.0);
        assert!(node != 0.7);
        assert_eq!(p.sample_node(node), 1.0);
        assert_eq!(p.sample_node(0.5), 1.0);
        assert_eq!(p.sample_node(0.69), 1.0);
        assert_eq!(p.sample_node(0.71), 0.0);
    }

    #[test]
    fn config_validation_paths() {
        let mut cfg = ProblemConfig {
            coefficient: CoefficientField::constant(1.0),
            potential: PotentialField::constant(1.0),
            data: InitialData::new(Profile::SinePi, Profile::Zero),
            weights: WeightParams::paper_defaults(2.2),
            nx: 10,
            nt: 22,
            allow_short_horizon: false,
        };
        cfg.validate().unwrap();
        // short horizon refused unless explicitly allowed
        cfg.weights = WeightParams::paper_defaults(1.5);
        assert!(matches!(cfg.validate(), Err(Error::HorizonTooShort { .. })));
        cfg.allow_short_horizon = true;
        cfg.validate().unwrap();
        // decreasing coefficient refused
        cfg.coefficient = CoefficientField::affine(2.0, -1.9);
        assert!(matches!(cfg.validate(), Err(Error::NotAdmissible { .. })));
    }
}
