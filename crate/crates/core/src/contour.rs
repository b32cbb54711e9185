//! Contours `Gamma_eta` around the origin and the time-side moments
//! `int e^{-it lambda} lambda^nu log^k(b lambda) d lambda` along them,
//! including the zero-energy profile `J(t)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Parameters of the contour. `gamma = (1/C) exp(-C' log(t) / A)` is the
/// depth of the vertical pieces below the real axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    pub a: f64,
    pub c: f64,
    pub c_prime: f64,
    pub t: f64,
    pub eta: f64,
    /// The semicircle actually integrated has radius `min(eta, apex_cap / t)`.
    pub apex_cap: f64,
}

impl ContourSpec {
    pub fn new(t: f64, eta: f64) -> Result<Self> {
        Self::with_constants(4.0, 1.0, 1.0, t, eta)
    }

    pub fn with_constants(a: f64, c: f64, c_prime: f64, t: f64, eta: f64) -> Result<Self> {
        let spec = Self { a, c, c_prime, t, eta, apex_cap: 1.0 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [self.a, self.c, self.c_prime, self.eta, self.apex_cap];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::Spec("A, C, C', eta and the apex cap must be positive".into()));
        }
        if !(self.a > self.c_prime) {
            return Err(Error::Spec(format!("A = {} must exceed C' = {}", self.a, self.c_prime)));
        }
        if !(self.t >= 2.0 && self.t.is_finite()) {
            return Err(Error::Spec(format!("t = {} must be at least 2", self.t)));
        }
        if !(self.r() > self.eta) {
            return Err(Error::Spec(format!("r(t) = {} must exceed eta = {}", self.r(), self.eta)));
        }
        Ok(())
    }

    pub fn r(&self) -> f64 {
        self.t.ln() / self.a
    }

    pub fn gamma(&self) -> f64 {
        (-self.c_prime * self.r()).exp() / self.c
    }

    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        let s = Self { eta, ..*self };
        s.validate()?;
        Ok(s)
    }

    pub fn with_t(&self, t: f64) -> Result<Self> {
        let s = Self { t, ..*self };
        s.validate()?;
        Ok(s)
    }

    fn eta_eff(&self) -> f64 {
        self.eta.min(self.apex_cap / self.t)
    }
}

/// One oriented piece of a contour.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Piece {
    Segment { from: Complex64, to: Complex64 },
    /// `radius e^{i theta}` for `theta` from `theta0` to `theta1`.
    Arc { radius: f64, theta0: f64, theta1: f64 },
}

impl Piece {
    pub fn start(&self) -> Complex64 {
        match *self {
            Piece::Segment { from, .. } => from,
            Piece::Arc { radius, theta0, .. } => Complex64::from_polar(radius, theta0),
        }
    }

    pub fn end(&self) -> Complex64 {
        match *self {
            Piece::Segment { to, .. } => to,
            Piece::Arc { radius, theta1, .. } => Complex64::from_polar(radius, theta1),
        }
    }

    pub fn length(&self) -> f64 {
        match *self {
            Piece::Segment { from, to } => (to - from).norm(),
            Piece::Arc { radius, theta0, theta1 } => radius * (theta1 - theta0).abs(),
        }
    }

    /// Point and derivative at `s in [0, 1]`.
    fn at(&self, s: f64) -> (Complex64, Complex64) {
        match *self {
            Piece::Segment { from, to } => (from + (to - from) * s, to - from),
            Piece::Arc { radius, theta0, theta1 } => {
                let th = theta0 + (theta1 - theta0) * s;
                let z = Complex64::from_polar(radius, th);
                (z, I * z * (theta1 - theta0))
            }
        }
    }
}

/// An oriented piecewise path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub pieces: Vec<Piece>,
}

impl Contour {
    pub fn start(&self) -> Complex64 {
        self.pieces[0].start()
    }

    pub fn end(&self) -> Complex64 {
        self.pieces[self.pieces.len() - 1].end()
    }

    pub fn length(&self) -> f64 {
        self.pieces.iter().map(Piece::length).sum()
    }

    /// The point of largest imaginary part.
    pub fn apex(&self) -> Complex64 {
        let mut best = self.start();
        for p in &self.pieces {
            for k in 0..=64 {
                let z = p.at(k as f64 / 64.0).0;
                if z.im > best.im {
                    best = z;
                }
            }
        }
        best
    }
}

fn three_pieces(eta: f64, gamma: f64) -> Vec<Piece> {
    vec![
        Piece::Segment { from: Complex64::new(-eta, -gamma), to: Complex64::new(-eta, 0.0) },
        Piece::Arc { radius: eta, theta0: PI, theta1: 0.0 },
        Piece::Segment { from: Complex64::new(eta, 0.0), to: Complex64::new(eta, -gamma) },
    ]
}

/// `Gamma_eta`: up from `-eta - i gamma`, over the upper semicircle through
/// `i eta`, down to `eta - i gamma`.
pub fn build_contour(spec: &ContourSpec) -> Result<Contour> {
    spec.validate()?;
    Ok(Contour { pieces: three_pieces(spec.eta, spec.gamma()) })
}

/// The path actually integrated: same endpoints as `Gamma_eta`, but the
/// semicircle has radius `min(eta, apex_cap/t)` so that `|e^{-it lambda}|`
/// stays bounded by `e^{apex_cap}`. The extra horizontal connectors at depth
/// `gamma` close the gap; the two paths bound a region where the integrand
/// is analytic.
pub fn evaluation_path(spec: &ContourSpec) -> Result<Contour> {
    spec.validate()?;
    let (eta, gamma) = (spec.eta, spec.gamma());
    let e = spec.eta_eff();
    if e >= eta {
        return build_contour(spec);
    }
    let mut pieces = vec![Piece::Segment { from: Complex64::new(-eta, -gamma), to: Complex64::new(-e, -gamma) }];
    pieces.extend(three_pieces(e, gamma));
    pieces.push(Piece::Segment { from: Complex64::new(e, -gamma), to: Complex64::new(eta, -gamma) });
    Ok(Contour { pieces })
}

/// `lambda^nu log^k(b lambda)`; `k < 0` gives reciprocal powers of the log.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentSpec {
    pub nu: f64,
    pub k: i32,
    pub b: Complex64,
}

impl MomentSpec {
    /// The p-resonance profile `lambda^{-2} / log(b lambda)`.
    pub fn presonance(b: Complex64) -> Self {
        Self { nu: -2.0, k: -1, b }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentValue {
    pub value: Complex64,
    pub error: f64,
}

/// `arg` on `(-pi/2, 3pi/2]`.
fn branch_arg(z: Complex64) -> f64 {
    let a = z.arg();
    if a <= -PI / 2.0 {
        a + 2.0 * PI
    } else {
        a
    }
}

fn integrand(spec: &ContourSpec, mom: &MomentSpec, lambda: Complex64) -> Complex64 {
    let ln_lambda = Complex64::new(lambda.norm().ln(), branch_arg(lambda));
    let osc = (-I * spec.t * lambda).exp();
    let power = if mom.nu == 0.0 { Complex64::new(1.0, 0.0) } else { (mom.nu * ln_lambda).exp() };
    let log_term = if mom.k == 0 {
        Complex64::new(1.0, 0.0)
    } else {
        // log(b lambda) = ln|b| + i arg b + log(lambda), arg b on the principal branch
        (mom.b.ln() + ln_lambda).powi(mom.k)
    };
    osc * power * log_term
}

/// `int_{Gamma_eta} e^{-it lambda} lambda^nu log^k(b lambda) d lambda`.
pub fn moment(spec: &ContourSpec, mom: &MomentSpec) -> Result<MomentValue> {
    spec.validate()?;
    if mom.k != 0 && !(spec.eta < 0.5 / mom.b.norm()) {
        return Err(Error::Spec(format!(
            "eta = {} must stay below 1/(2|b|) = {}",
            spec.eta,
            0.5 / mom.b.norm()
        )));
    }
    let path = evaluation_path(spec)?;
    let t = spec.t;
    let mut total = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    let mut magnitude = 0.0;
    for piece in &path.pieces {
        let (z0, z1) = (piece.start(), piece.end());
        // pieces lying entirely at depth gamma carry a factor e^{-t gamma}
        if z0.im.max(z1.im) * t < -700.0 {
            continue;
        }
        // geometric breakpoints toward the end nearest the real axis, where
        // |e^{-it lambda}| is largest
        let mut breaks = vec![0.0, 1.0];
        if let Piece::Segment { .. } = piece {
            let depth = (z1.im - z0.im).abs();
            if depth > 0.0 {
                let top_at_end = z1.im > z0.im;
                let mut d = 1.0 / (t * depth);
                while d < 1.0 {
                    breaks.push(if top_at_end { 1.0 - d } else { d });
                    d *= 2.0;
                }
                breaks.sort_by(|a, b| a.total_cmp(b));
            }
        }
        let run = |rel: f64| {
            quad::integrate(
                |s| {
                    let (z, dz) = piece.at(s);
                    integrand(spec, mom, z) * dz
                },
                &breaks,
                1e-13,
                rel,
                None,
                20000,
            )
        };
        // at small t single pieces can exceed their sum by 1e5, putting
        // 1e-13 below the rounding floor; the total is judged below
        let r = match run(1e-13) {
            Err(Error::Accuracy { .. }) => run(1e-11)?,
            other => other?,
        };
        total += r.value;
        error += r.error;
        magnitude += r.value.norm();
    }
    let requested = 1e-10 * (1.0 + total.norm()) + 1e-12 * magnitude;
    if error > requested {
        return Err(Error::Accuracy { achieved: error, requested });
    }
    Ok(MomentValue { value: total, error })
}

/// One sample of the zero-energy profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JmSample {
    pub t: f64,
    pub value: f64,
    /// `J(t) log(t) / t`
    pub normalized: f64,
    pub imag_residual: f64,
    pub eta: f64,
}

/// `J(t) = (1/2pi) int e^{-it lambda} lambda^{-2} / log(lambda b) d lambda`,
/// accepted once the evaluations at `eta` and `eta/2` agree to `1e-8`.
pub fn jm_profile(spec: &ContourSpec, b: Complex64) -> Result<JmSample> {
    if (b.arg() + PI / 2.0).abs() > 1e-12 {
        return Err(Error::Spec(format!("arg b = {} but -pi/2 is required", b.arg())));
    }
    let mom = MomentSpec::presonance(b);
    let mut s = *spec;
    if !(s.eta < 0.5 / b.norm()) {
        s = s.with_eta(0.25 / b.norm())?;
    }
    let mut prev = moment(&s, &mom)?.value;
    let mut accepted = None;
    for _ in 0..30 {
        let half = s.with_eta(s.eta / 2.0)?;
        let next = moment(&half, &mom)?.value;
        s = half;
        if (next - prev).norm() <= 1e-8 * next.norm() {
            accepted = Some(next);
            break;
        }
        prev = next;
    }
    let v = accepted.ok_or(Error::Accuracy { achieved: (prev).norm(), requested: 1e-8 })? / (2.0 * PI);
    let imag = v.im.abs() / v.norm();
    if imag > 1e-6 {
        return Err(Error::Orientation(imag));
    }
    Ok(JmSample {
        t: s.t,
        value: v.re,
        normalized: v.re * s.t.ln() / s.t,
        imag_residual: imag,
        eta: s.eta,
    })
}

/// `jm_profile` over a grid of times, in parallel.
pub fn jm_series(base: &ContourSpec, b: Complex64, times: &[f64]) -> Result<Vec<JmSample>> {
    times
        .par_iter()
        .map(|&t| {
            let eta = base.eta.min(0.5 * t.ln() / base.a);
            jm_profile(&ContourSpec { t, eta, ..*base }, b)
        })
        .collect()
}

/// The coefficient of the `lambda^{-2}` moment, `(1/2pi) int e^{-it lambda}
/// lambda^{-2} d lambda`, which tends to `-t`; the zero-eigenvalue term
/// `A_{-2,0} = -Pi_0` then produces `t Pi_0 f`.
pub fn zero_eigen_moment(spec: &ContourSpec) -> Result<f64> {
    let m = moment(spec, &MomentSpec { nu: -2.0, k: 0, b: Complex64::new(0.0, -1.0) })?;
    Ok(m.value.re / (2.0 * PI))
}

/// Sobolev-scale indices of the remainder estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemainderBudget {
    pub s: f64,
    pub p: f64,
    pub q: f64,
}

impl RemainderBudget {
    pub fn new(s: f64, p: f64, q: f64) -> Result<Self> {
        if s < 0.0 || p < 0.0 || q < 0.0 || s + p < q {
            return Err(Error::Spec(format!("need s, p, q >= 0 and s + p >= q, got ({s}, {p}, {q})")));
        }
        Ok(Self { s, p, q })
    }

    pub fn exponent(&self) -> f64 {
        2.0 * (self.s + self.p - self.q) + 1.0
    }
}

/// `log(t)^{-(2(s+p-q)+1)}` on the grid.
pub fn remainder_window(budget: &RemainderBudget, t_grid: &[f64]) -> Vec<f64> {
    let e = budget.exponent();
    t_grid.iter().map(|t| t.ln().powf(-e)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn contour_geometry() {
        let spec = ContourSpec::with_constants(2.0, 1.0, 1.0, E.powi(4), 0.1).unwrap();
        let c = build_contour(&spec).unwrap();
        let g = (-2.0f64).exp();
        assert!((c.start() - Complex64::new(-0.1, -g)).norm() < 1e-15);
        assert!((c.end() - Complex64::new(0.1, -g)).norm() < 1e-15);
        assert!((c.length() - (2.0 * g + PI * 0.1)).abs() < 1e-14);
        assert!((c.apex() - Complex64::new(0.0, 0.1)).norm() < 1e-15);
        let ev = evaluation_path(&spec).unwrap();
        assert_eq!(ev.start(), c.start());
        assert_eq!(ev.end(), c.end());
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(ContourSpec::with_constants(1.0, 1.0, 1.0, 100.0, 0.1).is_err());
        assert!(ContourSpec::new(1.5, 0.01).is_err());
        assert!(ContourSpec::new(100.0, 5.0).is_err());
        let s = ContourSpec::new(100.0, 0.3).unwrap();
        assert!(moment(&s, &MomentSpec::presonance(Complex64::new(0.0, -2.0))).is_err());
    }

    #[test]
    fn entire_integrand_matches_antiderivative() {
        for (t, eta) in [(10.0, 0.05), (1e3, 0.05), (1e6, 0.01)] {
            let spec = ContourSpec::new(t, eta).unwrap();
            let m = moment(&spec, &MomentSpec { nu: 0.0, k: 0, b: Complex64::new(0.0, -1.0) }).unwrap();
            let want = 2.0 * (-t * spec.gamma()).exp() * (t * eta).sin() / t;
            assert!((m.value - want).norm() <= 1e-12, "t={t}: {} vs {want}", m.value);
        }
    }

    #[test]
    fn jm_is_real_and_close_to_t_over_log_t() {
        // independent high-precision quadrature (mpmath, 30 digits)
        for (k, want) in [(6, 1.0521), (8, 1.0433), (10, 1.0364), (12, 1.0313)] {
            let t = E.powi(k);
            let s = jm_profile(&ContourSpec::new(t, 0.05).unwrap(), Complex64::new(0.0, -1.0)).unwrap();
            assert!(s.imag_residual <= 1e-9);
            assert!((s.normalized - want).abs() < 1e-4, "e^{k}: {}", s.normalized);
        }
    }

    #[test]
    fn moments_do_not_depend_on_the_apex_radius() {
        let b = Complex64::new(0.0, -1.0);
        for (nu, k) in [(0.0, 1), (0.0, -1), (-2.0, 1), (-2.0, -1), (-1.0, 2)] {
            for bb in [b, 2.0 * b] {
                let mom = MomentSpec { nu, k, b: bb };
                let mut spec = ContourSpec::new(1e3, 0.05).unwrap();
                let v1 = moment(&spec, &mom).unwrap().value;
                spec.apex_cap = 0.25;
                let v2 = moment(&spec, &mom).unwrap().value;
                spec.apex_cap = 5.0;
                let v3 = moment(&spec, &mom).unwrap().value;
                assert!((v1 - v2).norm() <= 1e-11 * v1.norm());
                assert!((v1 - v3).norm() <= 1e-11 * v1.norm());
            }
        }
    }

    #[test]
    fn zero_eigen_moment_tends_to_minus_t() {
        for t in [50.0, 1e3, 1e5] {
            let v = zero_eigen_moment(&ContourSpec::new(t, 0.05).unwrap()).unwrap();
            assert!((v + t).abs() <= 1e-9 * t, "t={t}: {v}");
        }
    }

    #[test]
    fn remainder_envelope() {
        let b = RemainderBudget::new(1.0, 0.0, 0.0).unwrap();
        assert!((remainder_window(&b, &[E * E])[0] - 0.125).abs() < 1e-15);
        assert_eq!(RemainderBudget::new(0.0, 1.5, 1.5).unwrap().exponent(), 1.0);
        let w = remainder_window(&b, &[10.0, 100.0, 1000.0]);
        assert!(w[0] > w[1] && w[1] > w[2]);
        assert!(RemainderBudget::new(0.0, 0.0, 1.0).is_err());
    }
}
