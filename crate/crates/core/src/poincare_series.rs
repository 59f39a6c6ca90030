//! Truncated Poincaré series of a length spectrum, exponential growth fits
//! and a real-axis estimate of the continued value at `s = 0`.
//!
//! The estimator removes the simple pole at `s = h` by multiplying with
//! `s − h`, fits polynomials to the regular part on a grid right of the
//! pole and extrapolates back to zero. Truncation of the spectrum is
//! compensated with the fitted exponential tail.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::arc_census::{CountingFunction, LengthSpectrum, SpectrumRow};
use crate::numfmt::sig12;

/// Minimum number of jumps of the counting function inside a fit window.
pub const MIN_JUMPS: usize = 30;
/// Closest approach to the pole allowed when completing the tail.
pub const POLE_MARGIN: f64 = 0.05;
/// Degree spread beyond which the extrapolation is rejected.
pub const MAX_DEGREE_SPREAD: f64 = 1.0;
/// Admissible growth rates for the extrapolation.
pub const GROWTH_RANGE: (f64, f64) = (0.8, 1.2);
/// Number of grid points in the regular-part fit.
pub const GRID_POINTS: usize = 20;
/// Default grid offsets from the pole, `[h + lo, h + hi]`.
pub const GRID: (f64, f64) = (0.1, 1.0);
/// Alternative grids whose spread enters the uncertainty.
pub const PERTURBED_GRIDS: [(f64, f64); 4] = [(0.08, 1.0), (0.12, 1.0), (0.1, 0.9), (0.1, 1.1)];
/// Polynomial degree used for the reported value.
pub const MAIN_DEGREE: usize = 4;
/// Residual in `log N` above which a growth fit is flagged.
pub const RESIDUAL_FLAG: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SeriesError {
    #[error("fit window holds {jumps} jumps, at least {MIN_JUMPS} are needed")]
    InsufficientData { jumps: usize },
    #[error("s = {s} is within {POLE_MARGIN} of the pole at h = {h}")]
    PoleProximity { s: f64, h: f64 },
    #[error("polynomial degrees disagree by {spread} at s = 0")]
    UnstableExtrapolation { spread: f64 },
    #[error("growth rate {h} outside the admissible range [0.8, 1.2]")]
    GrowthOutOfRange { h: f64 },
    #[error("invalid window [{0}, {1}]")]
    BadWindow(f64, f64),
}

/// Finite list of arc lengths with the truncation length used to produce it.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub lengths: Vec<f64>,
    pub t_max: f64,
}

impl Spectrum {
    pub fn new(mut lengths: Vec<f64>, t_max: f64) -> Self {
        lengths.sort_by(f64::total_cmp);
        Spectrum { lengths, t_max }
    }

    /// Expands CSV rows by multiplicity.
    pub fn from_rows(rows: &[SpectrumRow], t_max: f64) -> Self {
        let lengths = rows
            .iter()
            .flat_map(|r| std::iter::repeat(r.length).take(r.multiplicity))
            .collect();
        Spectrum::new(lengths, t_max)
    }

    /// `ℓ_k = log(k / a)` for `k = 1..=n`, whose counting function is
    /// `⌊a·e^T⌋` and whose series is `a^s ζ(s)`.
    pub fn synthetic_zeta(a: f64, n: usize) -> Self {
        let lengths: Vec<f64> = (1..=n).map(|k| (k as f64 / a).ln()).collect();
        let t_max = lengths.last().copied().unwrap_or(0.0);
        Spectrum { lengths, t_max }
    }

    pub fn counting(&self) -> CountingFunction {
        CountingFunction::from_lengths(&self.lengths)
    }

    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }
}

impl From<&LengthSpectrum> for Spectrum {
    fn from(s: &LengthSpectrum) -> Self {
        Spectrum::new(s.lengths(), s.t_max)
    }
}

/// `Σ e^{−s·ℓ}` over the spectrum.
pub fn partial_series(s: &Spectrum, at: Complex64) -> Complex64 {
    // Long arcs first so small terms are not swamped.
    s.lengths.iter().rev().map(|&l| (-at * l).exp()).sum()
}

pub fn partial_series_real(s: &Spectrum, at: f64) -> f64 {
    s.lengths.iter().rev().map(|&l| (-at * l).exp()).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthFit {
    pub h: f64,
    pub amplitude: f64,
    pub max_residual: f64,
    /// Set when the fit is not credible as exponential growth.
    pub flagged: bool,
    pub jumps: usize,
}

/// Least-squares fit of `log N(T) ≈ log A + h·T` over the jump abscissae of
/// `n` inside the closed window.
pub fn fit_growth(n: &CountingFunction, window: (f64, f64)) -> Result<GrowthFit, SeriesError> {
    let (t1, t2) = window;
    if !(t1 < t2) {
        return Err(SeriesError::BadWindow(t1, t2));
    }
    let pts: Vec<(f64, f64)> = n
        .steps
        .iter()
        .filter(|&&(t, c)| t >= t1 && t <= t2 && c > 0)
        .map(|&(t, c)| (t, (c as f64).ln()))
        .collect();
    if pts.len() < MIN_JUMPS {
        return Err(SeriesError::InsufficientData { jumps: pts.len() });
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let h = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let log_a = my - h * mx;
    let max_residual = pts
        .iter()
        .map(|p| (p.1 - log_a - h * p.0).abs())
        .fold(0.0, f64::max);
    let flagged = max_residual > RESIDUAL_FLAG || h < GROWTH_RANGE.0 / 10.0;
    Ok(GrowthFit { h, amplitude: log_a.exp(), max_residual, flagged, jumps: pts.len() })
}

/// Partial sum plus the Margulis tail `A·e^{(h−s)T}/(s−h)` beyond `t_max`.
pub fn tail_completed_series(s: &Spectrum, at: f64, a: f64, h: f64) -> Result<f64, SeriesError> {
    if (at - h).abs() < POLE_MARGIN || at < h {
        return Err(SeriesError::PoleProximity { s: at, h });
    }
    Ok(partial_series_real(s, at) + a * ((h - at) * s.t_max).exp() / (at - h))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Finite sum; the series is entire and is evaluated directly.
    Entire,
    /// Polynomial extrapolation of the regular part.
    PoleSubtracted,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::Entire => "entire",
            Method::PoleSubtracted => "pole-subtracted",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesEstimate {
    pub value: f64,
    pub uncertainty: f64,
    pub method: Method,
    pub t_max_used: f64,
}

/// One grid row of the extrapolation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticRow {
    pub s: f64,
    pub partial: f64,
    pub completed: f64,
    pub regular: f64,
}

fn grid(h: f64, (lo, hi): (f64, f64)) -> Vec<f64> {
    let n = GRID_POINTS;
    (0..n).map(|i| h + lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Rows `(s, partial, completed, (s − h)·completed)` on the default grid.
pub fn diagnostics(s: &Spectrum, a: f64, h: f64) -> Result<Vec<DiagnosticRow>, SeriesError> {
    grid(h, GRID)
        .into_iter()
        .map(|x| {
            let completed = tail_completed_series(s, x, a, h)?;
            Ok(DiagnosticRow {
                s: x,
                partial: partial_series_real(s, x),
                completed,
                regular: (x - h) * completed,
            })
        })
        .collect()
}

pub const DIAGNOSTICS_HEADER: &str = "s,partial,completed,F";

pub fn write_diagnostics_csv(rows: &[DiagnosticRow]) -> String {
    let mut out = String::from(DIAGNOSTICS_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            sig12(r.s),
            sig12(r.partial),
            sig12(r.completed),
            sig12(r.regular)
        ));
    }
    out
}

/// Least-squares polynomial through `(xs, ys)` evaluated at `x0`, in a
/// centred and scaled variable for conditioning.
fn poly_extrapolate(xs: &[f64], ys: &[f64], degree: usize, x0: f64) -> f64 {
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (c, w) = ((lo + hi) / 2.0, (hi - lo) / 2.0);
    let u = |x: f64| (x - c) / w;
    let vander = DMatrix::from_fn(xs.len(), degree + 1, |i, j| u(xs[i]).powi(j as i32));
    let rhs = DVector::from_column_slice(ys);
    let coef = vander
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .expect("SVD was computed with both factors");
    let u0 = u(x0);
    coef.iter().rev().fold(0.0, |acc, &k| acc * u0 + k)
}

fn regular_part(s: &Spectrum, a: f64, h: f64, g: (f64, f64)) -> Result<(Vec<f64>, Vec<f64>), SeriesError> {
    let xs = grid(h, g);
    let ys = xs
        .iter()
        .map(|&x| Ok((x - h) * tail_completed_series(s, x, a, h)?))
        .collect::<Result<Vec<f64>, SeriesError>>()?;
    Ok((xs, ys))
}

/// Value at `s = 0` of the continued series, with an uncertainty built from
/// the polynomial-degree spread and the sensitivity to the grid.
pub fn continue_at_zero(s: &Spectrum, a: f64, h: f64) -> Result<SeriesEstimate, SeriesError> {
    if a == 0.0 {
        return Ok(SeriesEstimate {
            value: partial_series_real(s, 0.0),
            uncertainty: 0.0,
            method: Method::Entire,
            t_max_used: s.t_max,
        });
    }
    if !(GROWTH_RANGE.0..=GROWTH_RANGE.1).contains(&h) {
        return Err(SeriesError::GrowthOutOfRange { h });
    }
    let at_zero = |f0: f64| -f0 / h;
    let (xs, ys) = regular_part(s, a, h, GRID)?;
    let by_degree: Vec<f64> =
        (3..=5).map(|d| at_zero(poly_extrapolate(&xs, &ys, d, 0.0))).collect();
    let value = by_degree[MAIN_DEGREE - 3];
    let spread = by_degree.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - by_degree.iter().cloned().fold(f64::INFINITY, f64::min);
    if spread > MAX_DEGREE_SPREAD {
        return Err(SeriesError::UnstableExtrapolation { spread });
    }
    let mut grid_dev: f64 = 0.0;
    for g in PERTURBED_GRIDS {
        let (xs, ys) = regular_part(s, a, h, g)?;
        let v = at_zero(poly_extrapolate(&xs, &ys, MAIN_DEGREE, 0.0));
        grid_dev = grid_dev.max((v - value).abs());
    }
    Ok(SeriesEstimate {
        value,
        uncertainty: spread + grid_dev,
        method: Method::PoleSubtracted,
        t_max_used: s.t_max,
    })
}

/// Fits growth on `[fit_from, t_max]` and continues to zero. A spectrum too
/// sparse to fit is treated as a finite sum.
pub fn estimate(s: &Spectrum, fit_from: f64) -> Result<(Option<GrowthFit>, SeriesEstimate), SeriesError> {
    let n = s.counting();
    match fit_growth(&n, (fit_from, s.t_max)) {
        Ok(fit) if !fit.flagged => {
            let est = continue_at_zero(s, fit.amplitude, fit.h)?;
            Ok((Some(fit), est))
        }
        Ok(_) | Err(SeriesError::InsufficientData { .. }) | Err(SeriesError::BadWindow(..)) => {
            Ok((None, continue_at_zero(s, 0.0, 0.0)?))
        }
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn floor_exp(a: f64, t_max: f64) -> Spectrum {
        let n = (a * t_max.exp()).floor() as usize;
        let mut s = Spectrum::synthetic_zeta(a, n);
        s.t_max = t_max;
        s
    }

    #[test]
    fn partial_series_examples() {
        let empty = Spectrum::new(vec![], 1.0);
        assert_eq!(partial_series(&empty, Complex64::new(0.3, 0.0)), Complex64::new(0.0, 0.0));
        let one = Spectrum::new(vec![2f64.ln()], 1.0);
        assert!((partial_series(&one, Complex64::new(1.0, 0.0)).re - 0.5).abs() < 1e-15);
        let eight = Spectrum::new(vec![1.7; 8], 2.0);
        assert_eq!(partial_series_real(&eight, 0.0), 8.0);
        let z = partial_series(&one, Complex64::new(0.0, std::f64::consts::PI / 2f64.ln()));
        assert!((z.re + 1.0).abs() < 1e-12 && z.im.abs() < 1e-12);
    }

    #[test]
    fn growth_fit_inverts_synthetic_counts() {
        let s = floor_exp(0.25, 12.0);
        let fit = fit_growth(&s.counting(), (6.0, 12.0)).unwrap();
        assert!((0.99..=1.01).contains(&fit.h), "h = {}", fit.h);
        assert!((0.24..=0.26).contains(&fit.amplitude), "A = {}", fit.amplitude);
        assert!(!fit.flagged);
    }

    #[test]
    fn growth_fit_needs_jumps() {
        let s = Spectrum::new((0..10).map(|k| 5.0 + k as f64 * 0.1).collect(), 7.0);
        assert_eq!(
            fit_growth(&s.counting(), (4.0, 7.0)),
            Err(SeriesError::InsufficientData { jumps: 10 })
        );
    }

    #[test]
    fn flat_counts_give_zero_rate_and_flag() {
        // A thousand early arcs and then a trickle: N is essentially constant.
        let mut l = vec![0.5; 1000];
        l.extend((0..40).map(|k| 4.0 + 0.2 * k as f64));
        let fit = fit_growth(&CountingFunction::from_lengths(&l), (4.0, 12.0)).unwrap();
        assert!(fit.h.abs() < 0.01);
        assert!(fit.flagged);
    }

    #[test]
    fn tail_completion() {
        let s = floor_exp(0.25, 8.0);
        let raw = partial_series_real(&s, 1.5);
        assert_eq!(tail_completed_series(&s, 1.5, 0.0, 1.0).unwrap(), raw);
        assert!(matches!(
            tail_completed_series(&s, 1.0, 0.25, 1.0),
            Err(SeriesError::PoleProximity { .. })
        ));
        let long = floor_exp(0.25, 8.0 + 10f64.ln());
        let limit = partial_series_real(&long, 1.5);
        let completed = tail_completed_series(&s, 1.5, 0.25, 1.0).unwrap();
        assert!((completed - limit).abs() < (raw - limit).abs());
    }

    #[test]
    fn zeta_continuation() {
        let s = Spectrum::synthetic_zeta(0.25, 1_000_000);
        let fit = fit_growth(&s.counting(), (4.0, s.t_max)).unwrap();
        let est = continue_at_zero(&s, fit.amplitude, fit.h).unwrap();
        assert_eq!(est.method, Method::PoleSubtracted);
        assert!((est.value + 0.5).abs() < 0.05, "{est:?}");
        assert!((est.value + 0.5).abs() <= est.uncertainty, "{est:?}");
    }

    #[test]
    fn single_length_is_entire() {
        let s = Spectrum::new(vec![3.2], 5.0);
        let est = continue_at_zero(&s, 0.0, 1.0).unwrap();
        assert_eq!(est.method, Method::Entire);
        assert!((est.value - 1.0).abs() < 0.01);
        let (fit, est) = estimate(&s, 4.0).unwrap();
        assert!(fit.is_none());
        assert_eq!(est.value, 1.0);
    }

    #[test]
    fn estimator_consistent_under_doubling() {
        let short = floor_exp(0.25, 7.0);
        let long = floor_exp(0.25, 14.0);
        let e1 = estimate(&short, 4.0).unwrap().1;
        let e2 = estimate(&long, 4.0).unwrap().1;
        assert!((e1.value - e2.value).abs() <= e1.uncertainty.max(e2.uncertainty), "{e1:?} {e2:?}");
    }

    #[test]
    fn growth_rate_out_of_range() {
        let s = floor_exp(0.25, 8.0);
        assert!(matches!(continue_at_zero(&s, 0.25, 2.0), Err(SeriesError::GrowthOutOfRange { .. })));
    }

    #[test]
    fn diagnostics_table() {
        let s = floor_exp(0.25, 9.0);
        let rows = diagnostics(&s, 0.25, 1.0).unwrap();
        assert_eq!(rows.len(), GRID_POINTS);
        let csv = write_diagnostics_csv(&rows);
        assert!(csv.starts_with("s,partial,completed,F\n"));
        assert_eq!(csv.lines().count(), GRID_POINTS + 1);
        for r in &rows {
            assert!((r.regular - (r.s - 1.0) * r.completed).abs() < 1e-12 * r.completed.abs().max(1.0));
        }
    }

    proptest! {
        #[test]
        fn partial_series_decreasing(lengths in prop::collection::vec(0.01f64..10.0, 1..40),
                                     s in -1.0f64..3.0, ds in 0.01f64..1.0) {
            let sp = Spectrum::new(lengths, 10.0);
            prop_assert!(partial_series_real(&sp, s + ds) < partial_series_real(&sp, s));
        }

        #[test]
        fn entire_path_is_exact(lengths in prop::collection::vec(0.0f64..12.0, 0..200)) {
            let sp = Spectrum::new(lengths, 12.0);
            let est = continue_at_zero(&sp, 0.0, 1.0).unwrap();
            prop_assert!((est.value - sp.len() as f64).abs() < 1e-6);
        }
    }
}
