//! Per-mode radial problems `-f'' - f'/r + (m^2/r^2 + V - lambda^2) f = g`:
//! matched regular and outgoing solutions, the Green's kernel, resolvent
//! application on radial grids, and the negative-energy eigenvalue search.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::RadialModel;
use crate::quad;
use crate::specfun::{
    bessel_i_with_derivative, bessel_j, bessel_j_real, bessel_j_with_derivative, bessel_k_with_derivative,
    hankel1, hankel1_with_derivative, BranchedComplex,
};

pub const DEFAULT_MAX_MODE: u32 = 4;
const SPECTRUM_TOL: f64 = 1e-13;
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A model restricted to angular mode `m` at spectral frequency `lambda`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeProblem {
    pub model: RadialModel,
    pub mode: i32,
    pub lambda: BranchedComplex,
}

impl ModeProblem {
    pub fn new(model: RadialModel, mode: i32, lambda: BranchedComplex) -> Result<Self> {
        Self::with_max_mode(model, mode, lambda, DEFAULT_MAX_MODE)
    }

    pub fn with_max_mode(model: RadialModel, mode: i32, lambda: BranchedComplex, max_mode: u32) -> Result<Self> {
        if mode.unsigned_abs() > max_mode {
            return Err(Error::Domain(format!("|m| = {} exceeds m_max = {max_mode}", mode.unsigned_abs())));
        }
        if lambda.norm() == 0.0 {
            return Err(Error::Singularity("the outgoing solution is undefined at lambda = 0".into()));
        }
        Ok(Self { model, mode, lambda })
    }

    pub fn order(&self) -> u32 {
        self.mode.unsigned_abs()
    }
}

/// `(J_n(z), J_n'(z), H_n(z), H_n'(z))`.
fn bessel_pair(order: u32, z: Complex64) -> Result<[Complex64; 4]> {
    let bz = BranchedComplex::new(z)?;
    let (j, jp) = bessel_j_with_derivative(order, bz);
    let (h, hp) = hankel1_with_derivative(order, bz)?;
    Ok([j, jp, h, hp])
}

/// Solve `c1 (J, kJ') + c2 (H, kH') = (v, d)` at radius `r`, where the
/// basis is in the variable `k r`. The determinant is `2i/(pi r)`.
fn match_jh(b: &[Complex64; 4], k: Complex64, r: f64, v: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let det = Complex64::new(0.0, 2.0 / (PI * r));
    let c1 = (v * k * b[3] - b[2] * d) / det;
    let c2 = (b[0] * d - v * k * b[1]) / det;
    (c1, c2)
}

/// `J_n` for integer `n`, with `J_{-n} = (-1)^n J_n`.
fn j_int(n: i32, x: f64) -> f64 {
    let v = bessel_j_real(n.unsigned_abs(), x);
    if n < 0 && n % 2 != 0 {
        -v
    } else {
        v
    }
}

/// `J_n(x0 + delta)` for the inner wave number `k = sqrt(lambda^2 + a^2)`
/// close to `a`: a Taylor step from the real point `x0 = a R` keeps the
/// `lambda^2` detuning that `k R` itself would lose to rounding.
fn shifted_j_below(n: i32, x0: f64, delta: Complex64, x: Complex64) -> Result<Complex64> {
    if delta.norm() >= 1e-4 || x0 == 0.0 {
        let z = BranchedComplex::new(x)?;
        let v = bessel_j(n.unsigned_abs(), z);
        return Ok(if n < 0 && n % 2 != 0 { -v } else { v });
    }
    let nf = n as f64;
    let j = j_int(n, x0);
    let d1 = j_int(n - 1, x0) - nf / x0 * j;
    let d2 = -d1 / x0 - (1.0 - nf * nf / (x0 * x0)) * j;
    Ok(j + delta * d1 + 0.5 * delta * delta * d2)
}

/// Outer coefficients of `u1 = p J_m(lambda r) + q H_m(lambda r)` from
/// `v = u1(R)` and `D = u1'(R+) + (m/R) u1(R)`. Written with `J_{m-1}`,
/// `H_{m-1}` so that nothing cancels when `D` is small near threshold.
fn outer_coeffs(order: u32, lambda: Complex64, radius: f64, v: Complex64, big_d: Complex64) -> Result<(Complex64, Complex64)> {
    let x = BranchedComplex::new(lambda * radius)?;
    let (j, h) = (bessel_j(order, x), hankel1(order, x)?);
    let (jb, hb) = if order == 0 {
        (-bessel_j(1, x), -hankel1(1, x)?)
    } else {
        (bessel_j(order - 1, x), hankel1(order - 1, x)?)
    };
    let c = Complex64::new(0.0, -PI * radius / 2.0);
    Ok((c * (v * lambda * hb - big_d * h), c * (big_d * j - v * lambda * jb)))
}

/// Variation-of-parameters realization of the resolvent in one mode:
/// `g(r, r') = -u1(r<) u2(r>) / (r W)` with `r W = r (u1 u2' - u1' u2)`.
#[derive(Clone, Copy, Debug)]
pub struct GreensKernel {
    order: u32,
    lambda: Complex64,
    /// Wave number inside the interface (`sqrt(lambda^2 + a^2)` in the well).
    inner_k: Complex64,
    interface: Option<f64>,
    /// `u1 = p J(lambda r) + q H(lambda r)` beyond the interface.
    p: Complex64,
    q: Complex64,
    /// `u2 = s J(k r) + w H(k r)` inside the interface.
    s: Complex64,
    w: Complex64,
    wronskian: Complex64,
}

/// Builds the Green's kernel; fails with an at-spectrum error when the
/// normalized Wronskian drops below `1e-13`.
pub fn solve_mode(problem: &ModeProblem) -> Result<GreensKernel> {
    build_kernel(problem, true)
}

/// `solve_mode` without the at-spectrum test, for real `lambda` approaching
/// a threshold resonance where the Wronskian legitimately tends to zero.
pub fn solve_mode_unchecked(problem: &ModeProblem) -> Result<GreensKernel> {
    let kernel = build_kernel(problem, false)?;
    if !(kernel.wronskian.norm() > 0.0 && kernel.wronskian.is_finite()) {
        return Err(Error::AtSpectrum { wronskian: kernel.wronskian.norm() });
    }
    Ok(kernel)
}

fn build_kernel(problem: &ModeProblem, check: bool) -> Result<GreensKernel> {
    let order = problem.order();
    let lambda = problem.lambda.value();
    let one = Complex64::new(1.0, 0.0);
    let mut kernel = GreensKernel {
        order,
        lambda,
        inner_k: lambda,
        interface: None,
        p: one,
        q: ZERO,
        s: ZERO,
        w: one,
        wronskian: Complex64::new(0.0, 2.0 / PI),
    };
    let (radius, jump) = match problem.model {
        RadialModel::Free => return Ok(kernel),
        RadialModel::RobinDisc { rho, sigma } => {
            let mf = order as f64;
            let (p, q) = outer_coeffs(order, lambda, rho, one, Complex64::new(mf / rho - sigma, 0.0))?;
            kernel.p = p;
            kernel.q = q;
            kernel.wronskian = Complex64::new(0.0, 2.0 / PI) * p;
            if check {
                kernel.check_spectrum(rho)?;
            }
            return Ok(kernel);
        }
        RadialModel::RoundWell { a, radius } => {
            kernel.inner_k = (lambda * lambda + a * a).sqrt();
            (radius, 0.0)
        }
        RadialModel::DeltaRing { a, radius } => (radius, a),
    };
    kernel.interface = Some(radius);
    let k = kernel.inner_k;
    let outer = bessel_pair(order, lambda * radius)?;
    // regular solution carried outward across the interface
    let (v, big_d) = match problem.model {
        RadialModel::RoundWell { a, .. } => {
            let v = bessel_j(order, BranchedComplex::new(k * radius)?);
            (v, k * shifted_j_below(order as i32 - 1, a * radius, radius * lambda * lambda / (k + a), k * radius)?)
        }
        _ => {
            let x = BranchedComplex::new(lambda * radius)?;
            let v = outer[0];
            let big_d = if order == 0 {
                jump * v - lambda * bessel_j(1, x)
            } else {
                let c = jump * radius / (2.0 * order as f64);
                lambda * ((1.0 + c) * bessel_j(order - 1, x) + c * bessel_j(order + 1, x))
            };
            (v, big_d)
        }
    };
    let (p, q) = outer_coeffs(order, lambda, radius, v, big_d)?;
    // outgoing solution carried inward
    let v2 = outer[2];
    let d2 = lambda * outer[3] - jump * v2;
    let (s, w) = if k.norm() == 0.0 {
        // k = 0: basis (r^n, r^-n), only reachable at lambda = +-ia
        return Err(Error::Singularity("inner wave number vanishes".into()));
    } else {
        let inner = bessel_pair(order, k * radius)?;
        match_jh(&inner, k, radius, v2, d2)
    };
    kernel.p = p;
    kernel.q = q;
    kernel.s = s;
    kernel.w = w;
    kernel.wronskian = Complex64::new(0.0, 2.0 / PI) * p;
    if check {
        kernel.check_spectrum(radius)?;
    }
    Ok(kernel)
}

impl GreensKernel {
    fn check_spectrum(&self, r: f64) -> Result<()> {
        let (u1, d1) = self.regular(r)?;
        let (u2, d2) = self.outgoing(r)?;
        let n1 = u1.norm().hypot(r * d1.norm());
        let n2 = u2.norm().hypot(r * d2.norm());
        let rel = self.wronskian.norm() / (n1 * n2);
        if !(rel >= SPECTRUM_TOL) {
            return Err(Error::AtSpectrum { wronskian: rel });
        }
        Ok(())
    }

    fn inside(&self, r: f64) -> bool {
        matches!(self.interface, Some(radius) if r < radius)
    }

    /// `(u1(r), u1'(r))`: regular at the origin, or satisfying the boundary
    /// condition on the Robin disc.
    pub fn regular(&self, r: f64) -> Result<(Complex64, Complex64)> {
        if self.inside(r) || (self.interface.is_none() && self.q == ZERO) {
            let k = self.inner_k;
            let (j, jp) = bessel_j_with_derivative(self.order, BranchedComplex::new(k * r)?);
            return Ok((j, k * jp));
        }
        let b = bessel_pair(self.order, self.lambda * r)?;
        Ok((
            self.p * b[0] + self.q * b[2],
            self.lambda * (self.p * b[1] + self.q * b[3]),
        ))
    }

    /// `(u2(r), u2'(r))`: proportional to `H^(1)_m(lambda r)` beyond the
    /// interface.
    pub fn outgoing(&self, r: f64) -> Result<(Complex64, Complex64)> {
        if self.inside(r) {
            let k = self.inner_k;
            let b = bessel_pair(self.order, k * r)?;
            return Ok((self.s * b[0] + self.w * b[2], k * (self.s * b[1] + self.w * b[3])));
        }
        let (h, hp) = hankel1_with_derivative(self.order, BranchedComplex::new(self.lambda * r)?)?;
        Ok((h, self.lambda * hp))
    }

    /// The constant `r W(u1, u2)`.
    pub fn wronskian(&self) -> Complex64 {
        self.wronskian
    }

    /// `r (u1 u2' - u1' u2)` evaluated directly at `r`.
    pub fn wronskian_at(&self, r: f64) -> Result<Complex64> {
        let (u1, d1) = self.regular(r)?;
        let (u2, d2) = self.outgoing(r)?;
        Ok(r * (u1 * d2 - d1 * u2))
    }

    pub fn kernel(&self, r: f64, rp: f64) -> Result<Complex64> {
        let (lo, hi) = if r <= rp { (r, rp) } else { (rp, r) };
        let (u1, _) = self.regular(lo)?;
        let (u2, _) = self.outgoing(hi)?;
        Ok(-u1 * u2 / self.wronskian)
    }

    /// For real `lambda > 0`: `Im g(r, r') = (2/pi) u1(r) u1(r') / |r W|^2`
    /// with `u1` real. Returns the scalar factor.
    pub fn spectral_factor(&self) -> f64 {
        2.0 / (PI * self.wronskian.norm_sqr())
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn interface(&self) -> Option<f64> {
        self.interface
    }
}

/// Uniform radial grid `r_k = r0 + k h`, `k = 0..n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub r0: f64,
    pub h: f64,
    pub n: usize,
}

impl RadialGrid {
    /// Grid on `[r0, r_max]` starting at the model's inner radius, with the
    /// interface radius on a node.
    pub fn aligned(model: &RadialModel, r_max: f64, h: f64) -> Result<Self> {
        let r0 = model.inner_radius();
        if !(h > 0.0) || !(r_max > r0) {
            return Err(Error::Grid(format!("invalid grid [{r0}, {r_max}] with h = {h}")));
        }
        if let (Some(radius), false) = (model.interface(), matches!(model, RadialModel::RobinDisc { .. })) {
            let k = (radius - r0) / h;
            if (k - k.round()).abs() > 1e-9 * k.max(1.0) {
                return Err(Error::Grid(format!("interface r = {radius} is not a node of spacing {h}")));
            }
        }
        let n = ((r_max - r0) / h).round() as usize + 1;
        Ok(Self { r0, h, n })
    }

    pub fn r(&self, k: usize) -> f64 {
        self.r0 + k as f64 * self.h
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.r(k)).collect()
    }

    pub fn sample<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        (0..self.n).map(|k| f(self.r(k))).collect()
    }

    pub fn node_of(&self, r: f64) -> Option<usize> {
        let k = (r - self.r0) / self.h;
        ((k - k.round()).abs() < 1e-9 * k.abs().max(1.0) && k >= -0.5).then(|| k.round() as usize)
    }

    /// Index ranges of smooth segments, split at `interface`.
    fn segments(&self, interface: Option<f64>) -> Vec<(usize, usize)> {
        match interface.and_then(|r| self.node_of(r)) {
            Some(k) if k > 0 && k + 1 < self.n => vec![(0, k), (k, self.n - 1)],
            _ => vec![(0, self.n - 1)],
        }
    }

    /// Integrals of `values` over `[r_k, r_{k+1}]` by local cubic
    /// interpolation that never reaches across a segment boundary.
    pub fn panel_integrals(&self, values: &[Complex64], interface: Option<f64>) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.n.saturating_sub(1)];
        for (i0, i1) in self.segments(interface) {
            for k in i0..i1 {
                out[k] = if i1 - i0 < 3 {
                    0.5 * self.h * (values[k] + values[k + 1])
                } else {
                    let j = (k.saturating_sub(1)).clamp(i0, i1 - 3);
                    let w = CUBIC_PANEL[k - j];
                    self.h * (0..4).map(|t| values[j + t] * w[t]).sum::<Complex64>()
                };
            }
        }
        out
    }

    /// `int g(r) r dr` over the grid with interface-aware panels.
    pub fn integrate_weighted(&self, g: &[Complex64], interface: Option<f64>) -> Complex64 {
        let vals: Vec<Complex64> = (0..self.n).map(|k| g[k] * self.r(k)).collect();
        self.panel_integrals(&vals, interface).iter().sum()
    }
}

// Weights (times h) integrating a cubic through four consecutive nodes over
// the panel starting at offset 0, 1 or 2 of the stencil.
const CUBIC_PANEL: [[f64; 4]; 3] = [
    [9.0 / 24.0, 19.0 / 24.0, -5.0 / 24.0, 1.0 / 24.0],
    [-1.0 / 24.0, 13.0 / 24.0, 13.0 / 24.0, -1.0 / 24.0],
    [1.0 / 24.0, -5.0 / 24.0, 19.0 / 24.0, 9.0 / 24.0],
];

/// `u = R(lambda) f` on every node of `grid`, with `f` sampled on the same
/// grid (zero outside its support).
pub fn apply_resolvent(problem: &ModeProblem, grid: &RadialGrid, f: &[f64]) -> Result<Vec<Complex64>> {
    let kernel = solve_mode(problem)?;
    apply_kernel(&kernel, grid, f)
}

pub fn apply_kernel(kernel: &GreensKernel, grid: &RadialGrid, f: &[f64]) -> Result<Vec<Complex64>> {
    if f.len() != grid.n {
        return Err(Error::Grid("samples do not match the grid".into()));
    }
    if f.iter().all(|&v| v == 0.0) {
        return Ok(vec![ZERO; grid.n]);
    }
    let n = grid.n;
    let mut u1 = vec![ZERO; n];
    let mut u2 = vec![ZERO; n];
    let mut a1 = vec![ZERO; n];
    let mut a2 = vec![ZERO; n];
    for k in 0..n {
        let r = grid.r(k);
        u1[k] = kernel.regular(r)?.0;
        if r > 0.0 {
            u2[k] = kernel.outgoing(r)?.0;
        }
        if f[k] != 0.0 {
            a1[k] = u1[k] * f[k] * r;
            a2[k] = u2[k] * f[k] * r;
        }
    }
    let interface = kernel.interface();
    let p1 = grid.panel_integrals(&a1, interface);
    let p2 = grid.panel_integrals(&a2, interface);
    let mut left = vec![ZERO; n];
    for k in 1..n {
        left[k] = left[k - 1] + p1[k - 1];
    }
    let mut right = vec![ZERO; n];
    for k in (0..n - 1).rev() {
        right[k] = right[k + 1] + p2[k];
    }
    let wr = kernel.wronskian();
    Ok((0..n)
        .map(|k| {
            let first = if left[k] == ZERO { ZERO } else { u2[k] * left[k] };
            -(first + u1[k] * right[k]) / wr
        })
        .collect())
}

/// `(R(lambda) f)(r)` by adaptive quadrature for `f` supported in
/// `[support.0, support.1]`.
pub fn resolvent_at<F: Fn(f64) -> f64>(kernel: &GreensKernel, f: F, support: (f64, f64), r: f64) -> Result<Complex64> {
    let (lo, hi) = support;
    let width = (1.0 / kernel.lambda().norm()).min(0.5);
    let breaks_for = |a: f64, b: f64| {
        let mut v = vec![a];
        if let Some(radius) = kernel.interface() {
            if radius > a && radius < b {
                v.push(radius);
            }
        }
        v.push(b);
        v
    };
    let left = if r > lo {
        let b = breaks_for(lo, r.min(hi));
        quad::integrate(
            |x| kernel.regular(x).map(|v| v.0).unwrap_or(ZERO) * f(x) * x,
            &b,
            1e-15,
            1e-13,
            Some(width),
            20000,
        )?
        .value
    } else {
        ZERO
    };
    let right = if r < hi {
        let b = breaks_for(r.max(lo), hi);
        quad::integrate(
            |x| kernel.outgoing(x).map(|v| v.0).unwrap_or(ZERO) * f(x) * x,
            &b,
            1e-15,
            1e-13,
            Some(width),
            20000,
        )?
        .value
    } else {
        ZERO
    };
    let first = if left == ZERO { ZERO } else { kernel.outgoing(r)?.0 * left };
    Ok(-(first + kernel.regular(r)?.0 * right) / kernel.wronskian())
}

/// Inside shape of a bound state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InnerShape {
    /// `J_m(k r)`
    J { k: f64 },
    /// `I_m(k r)`
    I { k: f64 },
    /// no inner region (Robin disc)
    None,
}

/// Negative eigenvalue `E = -kappa^2` of one mode with an `L^2(r dr)`
/// normalized profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundState {
    pub energy: f64,
    pub mode: i32,
    pub kappa: f64,
    pub inner: InnerShape,
    pub interface: Option<f64>,
    pub inner_radius: f64,
    /// Coefficients of the inner function and of `K_m(kappa r)` outside,
    /// after normalization.
    pub inner_coeff: f64,
    pub outer_coeff: f64,
}

impl BoundState {
    pub fn profile(&self, r: f64) -> f64 {
        let m = self.mode.unsigned_abs();
        if r < self.inner_radius {
            return 0.0;
        }
        if let Some(radius) = self.interface {
            if r < radius {
                return self.inner_coeff
                    * match self.inner {
                        InnerShape::J { k } => bessel_j_real(m, k * r),
                        InnerShape::I { k } => bessel_i_with_derivative(m, k * r).map(|v| v.0).unwrap_or(f64::NAN),
                        InnerShape::None => 0.0,
                    };
            }
        }
        if r == 0.0 {
            return 0.0;
        }
        self.outer_coeff * bessel_k_with_derivative(m, self.kappa * r).map(|v| v.0).unwrap_or(0.0)
    }

    /// `<f, phi>` against `r dr` on a grid.
    pub fn pairing(&self, grid: &RadialGrid, f: &[f64]) -> f64 {
        let g: Vec<Complex64> = (0..grid.n)
            .map(|k| Complex64::new(f[k] * self.profile(grid.r(k)), 0.0))
            .collect();
        grid.integrate_weighted(&g, self.interface).re
    }

    /// Projection `<f, phi> phi` sampled on the grid.
    pub fn project(&self, grid: &RadialGrid, f: &[f64]) -> Vec<f64> {
        let c = self.pairing(grid, f);
        (0..grid.n).map(|k| c * self.profile(grid.r(k))).collect()
    }

    fn norm_sq(&self) -> Result<f64> {
        let mut total = 0.0;
        let start = self.inner_radius;
        let tail = start.max(self.interface.unwrap_or(0.0)) + 60.0 / self.kappa;
        let mut breaks = vec![start];
        if let Some(radius) = self.interface {
            if radius > start {
                breaks.push(radius);
            }
        }
        breaks.push(tail);
        total += quad::integrate_real(|r| self.profile(r).powi(2) * r, &breaks, 1e-300, 1e-13)?;
        Ok(total)
    }
}

/// Matching determinant for `E = -kappa^2`, normalized to be scale free.
fn bound_determinant(model: &RadialModel, order: u32, energy: f64) -> Result<f64> {
    let kappa = (-energy).sqrt();
    let norm = |u: f64, ru: f64| u.hypot(ru);
    match *model {
        RadialModel::RoundWell { a, radius } => {
            let (u, du) = inner_solution(order, a * a + energy, radius)?;
            let (kv, kp) = bessel_k_with_derivative(order, kappa * radius)?;
            let (ru, rk) = (radius * du, radius * kappa * kp);
            Ok((ru * kv - u * rk) / (norm(u, ru) * norm(kv, rk)))
        }
        RadialModel::DeltaRing { a, radius } => {
            let (iv, ip) = bessel_i_with_derivative(order, kappa * radius)?;
            let (kv, kp) = bessel_k_with_derivative(order, kappa * radius)?;
            let ru = radius * (kappa * ip + a * iv);
            let rk = radius * kappa * kp;
            Ok((ru * kv - iv * rk) / (norm(iv, ru) * norm(kv, rk)))
        }
        RadialModel::RobinDisc { rho, sigma } => {
            let (kv, kp) = bessel_k_with_derivative(order, kappa * rho)?;
            let rk = rho * kappa * kp;
            Ok((rk + sigma * rho * kv) / norm(kv, rk))
        }
        RadialModel::Free => Ok(1.0),
    }
}

/// Regular solution of `-u'' - u'/r + m^2/r^2 u = k2 u` and its derivative at `r`.
fn inner_solution(order: u32, k2: f64, r: f64) -> Result<(f64, f64)> {
    if k2 >= 0.0 {
        let k = k2.sqrt();
        let (j, jp) = bessel_j_with_derivative(order, BranchedComplex::real(k * r));
        Ok((j.re, k * jp.re))
    } else {
        let k = (-k2).sqrt();
        let (i, ip) = bessel_i_with_derivative(order, k * r)?;
        Ok((i, k * ip))
    }
}

fn energy_window(model: &RadialModel) -> Option<(f64, f64)> {
    match *model {
        RadialModel::RoundWell { a, .. } => {
            let eps = 1e-12 * (a * a).max(1.0);
            Some((-a * a + eps, -eps))
        }
        RadialModel::DeltaRing { a, radius } if a < 0.0 => {
            let top = (a.abs() + 1.0 / radius).powi(2) * 4.0;
            Some((-top, -1e-12 * top.max(1.0)))
        }
        RadialModel::RobinDisc { rho, sigma } if sigma > 0.0 => {
            let top = (2.0 * sigma + 1.0 / rho).powi(2) * 4.0;
            Some((-top, -1e-12 * top.max(1.0)))
        }
        _ => None,
    }
}

/// All negative eigenvalues of one mode, found by sign changes of the
/// matching determinant and refined by Brent's method.
pub fn find_bound_states(model: &RadialModel, mode: i32) -> Result<Vec<BoundState>> {
    let order = mode.unsigned_abs();
    let Some((lo, hi)) = energy_window(model) else {
        return Ok(Vec::new());
    };
    // 64 log-spaced |E| values plus a linear sweep for deep wells
    let mut grid: Vec<f64> = (0..64)
        .map(|i| -((-hi).ln() + ((-lo).ln() - (-hi).ln()) * i as f64 / 63.0).exp())
        .chain((0..64).map(|i| lo + (hi - lo) * i as f64 / 63.0))
        .collect();
    grid.sort_by(|a, b| a.total_cmp(b));
    grid.dedup();
    let det = |e: f64| bound_determinant(model, order, e);
    let mut vals = Vec::with_capacity(grid.len());
    for &e in &grid {
        vals.push(det(e)?);
    }
    let mut states = Vec::new();
    for i in 0..grid.len() - 1 {
        if vals[i] == 0.0 || vals[i].signum() != vals[i + 1].signum() {
            let e = if vals[i] == 0.0 {
                grid[i]
            } else {
                brent(|e| det(e).unwrap_or(f64::NAN), grid[i], grid[i + 1], vals[i], vals[i + 1], 1e-12)
            };
            states.push(build_bound_state(model, mode, e)?);
        }
    }
    states.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(states)
}

fn build_bound_state(model: &RadialModel, mode: i32, energy: f64) -> Result<BoundState> {
    let order = mode.unsigned_abs();
    let kappa = (-energy).sqrt();
    let (inner, interface, inner_radius, inner_coeff, outer_coeff) = match *model {
        RadialModel::RoundWell { a, radius } => {
            let k2 = a * a + energy;
            let shape = if k2 >= 0.0 { InnerShape::J { k: k2.sqrt() } } else { InnerShape::I { k: (-k2).sqrt() } };
            let (u, _) = inner_solution(order, k2, radius)?;
            let kv = bessel_k_with_derivative(order, kappa * radius)?.0;
            (shape, Some(radius), 0.0, 1.0, u / kv)
        }
        RadialModel::DeltaRing { radius, .. } => {
            let iv = bessel_i_with_derivative(order, kappa * radius)?.0;
            let kv = bessel_k_with_derivative(order, kappa * radius)?.0;
            (InnerShape::I { k: kappa }, Some(radius), 0.0, 1.0, iv / kv)
        }
        RadialModel::RobinDisc { rho, .. } => (InnerShape::None, None, rho, 0.0, 1.0),
        RadialModel::Free => unreachable!("free model has no bound states"),
    };
    let mut state = BoundState {
        energy,
        mode,
        kappa,
        inner,
        interface,
        inner_radius,
        inner_coeff,
        outer_coeff,
    };
    let n = state.norm_sq()?.sqrt();
    state.inner_coeff /= n;
    state.outer_coeff /= n;
    Ok(state)
}

/// Brent's root finder on a sign-changing bracket.
pub(crate) fn brent<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, fa: f64, fb: f64, xtol: f64) -> f64 {
    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    if fa.abs() < fb.abs() {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut bisected = true;
    for _ in 0..200 {
        if fb == 0.0 || (b - a).abs() <= xtol {
            return b;
        }
        let mut s = if fa != fc && fb != fc {
            a * fb * fc / ((fa - fb) * (fa - fc)) + b * fa * fc / ((fb - fa) * (fb - fc)) + c * fa * fb / ((fc - fa) * (fc - fb))
        } else {
            b - fb * (b - a) / (fb - fa)
        };
        let lo = (3.0 * a + b) / 4.0;
        let outside = !((s > lo.min(b)) && (s < lo.max(b)));
        let slow = if bisected { (s - b).abs() >= (b - c).abs() / 2.0 } else { (s - b).abs() >= (c - d).abs() / 2.0 };
        if outside || slow || !s.is_finite() {
            s = 0.5 * (a + b);
            bisected = true;
        } else {
            bisected = false;
        }
        let fs = f(s);
        d = c;
        c = b;
        fc = fb;
        if fa.signum() != fs.signum() {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if fa.abs() < fb.abs() {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut fa, &mut fb);
        }
    }
    b
}
