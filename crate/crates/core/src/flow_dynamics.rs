//! Scalar Riccati solutions along a geodesic in negative curvature, the
//! constant-curvature Jacobi propagator, and the conormal transversality
//! test for immersed curves.
//!
//! For a unit-speed geodesic with curvature `K(t)` along it, the slopes of
//! the unstable and stable Jacobi fields satisfy `L′ + L² + K = 0`. The
//! unstable slope is the forward attractor of that equation and the stable
//! slope the backward one.

use nalgebra::Matrix2;

/// Default fixed step.
pub const DEFAULT_DT: f64 = 1e-3;
/// Burn-in length in units of `1/√κ₀`.
pub const BURN_IN_FACTOR: f64 = 20.0;
/// Margin below which a curve is considered tangent to the unstable slope.
pub const TRANSVERSALITY_TOL: f64 = 1e-6;
const BLOW_UP: f64 = 1e8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DynamicsError {
    #[error("integration escaped at t = {t}; curvature is not uniformly negative")]
    BlowUp { t: f64 },
    #[error("curvature must be negative, found sup K = {sup}")]
    NonNegativeCurvature { sup: f64 },
    #[error("sample arrays differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("invalid time span or step")]
    BadSpan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RiccatiKind {
    Unstable,
    Stable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiccatiSolution {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub kind: RiccatiKind,
}

impl RiccatiSolution {
    /// Largest centred finite-difference residual of `L′ + L² + K`.
    pub fn max_residual(&self, k: impl Fn(f64) -> f64) -> f64 {
        let (t, l) = (&self.grid, &self.values);
        (1..l.len().saturating_sub(1))
            .map(|i| {
                let dl = (l[i + 1] - l[i - 1]) / (t[i + 1] - t[i - 1]);
                (dl + l[i] * l[i] + k(t[i])).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Linear interpolation on the grid.
    pub fn at(&self, t: f64) -> f64 {
        let g = &self.grid;
        let i = g.partition_point(|&x| x <= t).clamp(1, g.len() - 1);
        let w = (t - g[i - 1]) / (g[i] - g[i - 1]);
        self.values[i - 1] * (1.0 - w) + self.values[i] * w
    }
}

fn rk4_step(k: &impl Fn(f64) -> f64, t: f64, l: f64, h: f64) -> f64 {
    let f = |t: f64, l: f64| -l * l - k(t);
    let k1 = f(t, l);
    let k2 = f(t + h / 2.0, l + h * k1 / 2.0);
    let k3 = f(t + h / 2.0, l + h * k2 / 2.0);
    let k4 = f(t + h, l + h * k3);
    l + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
}

/// Lower bound `κ₀` with `K ≤ −κ₀`, from samples over the integration range.
fn curvature_bound(k: &impl Fn(f64) -> f64, a: f64, b: f64, dt: f64) -> Result<f64, DynamicsError> {
    let n = ((b - a) / dt).ceil() as usize;
    let sup = (0..=n).map(|i| k(a + (b - a) * i as f64 / n as f64)).fold(f64::NEG_INFINITY, f64::max);
    if sup >= 0.0 {
        return Err(DynamicsError::NonNegativeCurvature { sup });
    }
    Ok(-sup)
}

fn check_span(t_span: (f64, f64), dt: f64) -> Result<usize, DynamicsError> {
    if !(t_span.1 > t_span.0) || !(dt > 0.0) {
        return Err(DynamicsError::BadSpan);
    }
    Ok(((t_span.1 - t_span.0) / dt).round().max(1.0) as usize)
}

/// Integrates with `n` steps of size `step` (negative runs backward) and
/// returns the samples after the burn-in.
fn integrate(
    k: &impl Fn(f64) -> f64,
    start: f64,
    l0: f64,
    step: f64,
    burn_steps: usize,
    keep_steps: usize,
) -> Result<(Vec<f64>, Vec<f64>), DynamicsError> {
    let mut l = l0;
    let mut grid = Vec::with_capacity(keep_steps + 1);
    let mut values = Vec::with_capacity(keep_steps + 1);
    for i in 0..=(burn_steps + keep_steps) {
        let t = start + step * i as f64;
        if !l.is_finite() || l.abs() > BLOW_UP {
            return Err(DynamicsError::BlowUp { t });
        }
        if i >= burn_steps {
            grid.push(t);
            values.push(l);
        }
        if i < burn_steps + keep_steps {
            l = rk4_step(k, t, l, step);
        }
    }
    Ok((grid, values))
}

/// Unstable slope on `t_span`, integrated forward from `t_span.0 − 20/√κ₀`.
pub fn riccati_unstable(
    k: impl Fn(f64) -> f64,
    t_span: (f64, f64),
    dt: f64,
) -> Result<RiccatiSolution, DynamicsError> {
    let keep = check_span(t_span, dt)?;
    let step = (t_span.1 - t_span.0) / keep as f64;
    let reach = BURN_IN_FACTOR / curvature_bound(&k, t_span.0, t_span.1, step)?.sqrt();
    let kappa0 = curvature_bound(&k, t_span.0 - reach, t_span.1, step)?;
    let burn = (BURN_IN_FACTOR / kappa0.sqrt() / step).ceil() as usize;
    let start = t_span.0 - burn as f64 * step;
    let (grid, values) = integrate(&k, start, kappa0.sqrt(), step, burn, keep)?;
    Ok(RiccatiSolution { grid, values, kind: RiccatiKind::Unstable })
}

/// Stable slope on `t_span`, integrated backward from `t_span.1 + 20/√κ₀`.
pub fn riccati_stable(
    k: impl Fn(f64) -> f64,
    t_span: (f64, f64),
    dt: f64,
) -> Result<RiccatiSolution, DynamicsError> {
    let keep = check_span(t_span, dt)?;
    let step = (t_span.1 - t_span.0) / keep as f64;
    let reach = BURN_IN_FACTOR / curvature_bound(&k, t_span.0, t_span.1, step)?.sqrt();
    let kappa0 = curvature_bound(&k, t_span.0, t_span.1 + reach, step)?;
    let burn = (BURN_IN_FACTOR / kappa0.sqrt() / step).ceil() as usize;
    let start = t_span.1 + burn as f64 * step;
    let (mut grid, mut values) = integrate(&k, start, -kappa0.sqrt(), -step, burn, keep)?;
    grid.reverse();
    values.reverse();
    Ok(RiccatiSolution { grid, values, kind: RiccatiKind::Stable })
}

/// Tangent map of the geodesic flow in curvature −1 over time `t`, in the
/// frame (vertical, horizontal).
pub fn jacobi_propagator_const(t: f64) -> Matrix2<f64> {
    let (c, s) = (t.cosh(), t.sinh());
    Matrix2::new(c, s, s, c)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transversality {
    pub holds: bool,
    pub margin: f64,
}

/// Whether the conormal of a curve with geodesic curvature samples `kappa`
/// stays off the unstable slope `lu`.
pub fn conormal_transversality(kappa: &[f64], lu: &[f64]) -> Result<Transversality, DynamicsError> {
    if kappa.len() != lu.len() {
        return Err(DynamicsError::LengthMismatch(kappa.len(), lu.len()));
    }
    let margin = kappa
        .iter()
        .zip(lu)
        .map(|(a, b)| (a - b).abs())
        .fold(f64::INFINITY, f64::min);
    let margin = if margin.is_finite() { margin } else { 0.0 };
    Ok(Transversality { holds: margin > TRANSVERSALITY_TOL, margin })
}
