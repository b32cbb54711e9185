//! Radially symmetric operator families with zero-energy p-resonances,
//! their closed-form resonant states, and the variable-wave-speed grid
//! construction `V = c^2 (Delta u_p) / u_p`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;
use crate::specfun::{bessel_j_real, bessel_zero, BesselZeroIndex};

/// One of the radial operator families `-Delta + V` on `R^2` (or on the
/// exterior of a disc for the Robin problem).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum RadialModel {
    /// `V(r) = -a^2 1_{r < R}`.
    RoundWell { a: f64, radius: f64 },
    /// `V(r) = a delta(r - R)`, realized as the jump `f'(R+) - f'(R-) = a f(R)`.
    DeltaRing { a: f64, radius: f64 },
    /// `-Delta` on `r > rho` with `f'(rho) + sigma f(rho) = 0`.
    RobinDisc { rho: f64, sigma: f64 },
    Free,
}

impl RadialModel {
    pub fn round_well(a: f64, radius: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Domain(format!("round well amplitude must be positive, got {a}")));
        }
        check_radius("R", radius)?;
        Ok(Self::RoundWell { a, radius })
    }

    pub fn delta_ring(a: f64, radius: f64) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::Domain("delta ring coupling must be finite".into()));
        }
        check_radius("R", radius)?;
        Ok(Self::DeltaRing { a, radius })
    }

    pub fn robin_disc(rho: f64, sigma: f64) -> Result<Self> {
        check_radius("rho", rho)?;
        if !sigma.is_finite() {
            return Err(Error::Domain("robin coefficient must be finite".into()));
        }
        Ok(Self::RobinDisc { rho, sigma })
    }

    /// Radius where the coefficients are non-smooth, if any.
    pub fn interface(&self) -> Option<f64> {
        match *self {
            Self::RoundWell { radius, .. } | Self::DeltaRing { radius, .. } => Some(radius),
            Self::RobinDisc { rho, .. } => Some(rho),
            Self::Free => None,
        }
    }

    /// Left end of the radial half line (`rho` for the Robin disc, else 0).
    pub fn inner_radius(&self) -> f64 {
        match *self {
            Self::RobinDisc { rho, .. } => rho,
            _ => 0.0,
        }
    }

    /// The bounded part of the potential at `r` (zero for the delta ring,
    /// whose singular part is handled as an interface condition).
    pub fn potential(&self, r: f64) -> f64 {
        match *self {
            Self::RoundWell { a, radius } if r < radius => -a * a,
            _ => 0.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::RoundWell { .. } => "round-well",
            Self::DeltaRing { .. } => "delta-ring",
            Self::RobinDisc { .. } => "robin-disc",
            Self::Free => "free",
        }
    }
}

fn check_radius(name: &str, r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive, got {r}")))
    }
}

/// Angular factor attached to a radial profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AngularForm {
    /// `exp(i m theta)`
    Exp,
    Cos,
    Sin,
}

/// Radial shape of a zero-energy state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StateProfile {
    /// `C J_1(a r)` for `r < R`, `B / r` for `r >= R`.
    Well { c: f64, b: f64, a: f64, radius: f64 },
    /// `A r` for `r < R`, `B / r` for `r > R`, coupling `a` on the ring.
    Ring { inner: f64, outer: f64, coupling: f64, radius: f64 },
    /// `B / r` on `r >= rho`.
    Exterior { b: f64, rho: f64 },
}

/// A closed-form zero-energy solution of the radial problem.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonantState {
    pub mode: i32,
    pub angular: AngularForm,
    /// `C` for the well, `A` for the ring, `B` for the exterior profile.
    pub inner_coeff: f64,
    pub outer_coeff: f64,
    /// `d` in `profile ~ r^{-d}` at infinity; 1 for a p-resonant state.
    pub decay_exponent: u32,
    pub profile: StateProfile,
}

impl ResonantState {
    pub fn value(&self, r: f64) -> f64 {
        match self.profile {
            StateProfile::Well { c, b, a, radius } => {
                if r < radius {
                    c * bessel_j_real(1, a * r)
                } else {
                    b / r
                }
            }
            StateProfile::Ring { inner, outer, radius, .. } => {
                if r < radius {
                    inner * r
                } else {
                    outer / r
                }
            }
            StateProfile::Exterior { b, rho } => {
                if r < rho {
                    f64::NAN
                } else {
                    b / r
                }
            }
        }
    }

    /// One-sided derivatives are selected by comparing `r` with the interface.
    pub fn derivative(&self, r: f64) -> f64 {
        match self.profile {
            StateProfile::Well { c, b, a, radius } => {
                if r < radius {
                    let x = a * r;
                    c * a * (bessel_j_real(0, x) - bessel_j_real(1, x) / x)
                } else {
                    -b / (r * r)
                }
            }
            StateProfile::Ring { inner, outer, radius, .. } => {
                if r < radius {
                    inner
                } else {
                    -outer / (r * r)
                }
            }
            StateProfile::Exterior { b, .. } => -b / (r * r),
        }
    }

    fn inner_limits(&self) -> Option<(f64, f64, f64)> {
        match self.profile {
            StateProfile::Well { c, a, radius, .. } => {
                let x = a * radius;
                let v = c * bessel_j_real(1, x);
                let d = c * a * (bessel_j_real(0, x) - bessel_j_real(1, x) / x);
                Some((radius, v, d))
            }
            StateProfile::Ring { inner, radius, .. } => Some((radius, inner * radius, inner)),
            StateProfile::Exterior { .. } => None,
        }
    }

    /// `(|f(R-) - f(R+)|, derivative residual)` at the interface. For the
    /// well the derivative residual is `|f'(R-) - f'(R+)|`; for the ring it
    /// is `|f'(R+) - f'(R-) - a f(R)|`.
    pub fn interface_residuals(&self) -> Option<(f64, f64)> {
        let (radius, vin, din) = self.inner_limits()?;
        let vout = self.value(radius);
        let dout = self.derivative(radius);
        let dres = match self.profile {
            StateProfile::Ring { coupling, .. } => (dout - din - coupling * vout).abs(),
            _ => (din - dout).abs(),
        };
        Some(((vin - vout).abs(), dres))
    }

    /// `f'(rho) + sigma f(rho)`.
    pub fn robin_residual(&self, sigma: f64) -> Option<f64> {
        match self.profile {
            StateProfile::Exterior { rho, .. } => Some(self.derivative(rho) + sigma * self.value(rho)),
            _ => None,
        }
    }

    /// `int_{max(1, r0)}^{cutoff} |f(r)|^q r dr`, with `r0` the inner end of
    /// the domain.
    pub fn lq_tail(&self, q: f64, cutoff: f64) -> Result<f64> {
        let start = match self.profile {
            StateProfile::Exterior { rho, .. } => rho.max(1.0),
            _ => 1.0,
        };
        if cutoff <= start {
            return Ok(0.0);
        }
        let (s0, s1) = (start.ln(), cutoff.ln());
        let mut breaks = vec![s0];
        if let Some((radius, _, _)) = self.inner_limits() {
            if radius > start && radius < cutoff {
                breaks.push(radius.ln());
            }
        }
        breaks.push(s1);
        // r = e^s, r dr = e^{2s} ds
        quad::integrate_real(
            |s| {
                let r = s.exp();
                self.value(r).abs().powf(q) * r * r
            },
            &breaks,
            1e-13,
            1e-12,
        )
    }
}

/// Round well with `a = j_{0,n} / R`; the `m = +-1` states are
/// `C J_1(a r)` inside and `1 / r` outside with `C = 1 / (R J_1(a R))`.
pub fn round_well_presonance(radius: f64, n: u32) -> Result<(RadialModel, Vec<ResonantState>)> {
    let a = bessel_zero(BesselZeroIndex::new(0, n)?) / radius;
    let model = RadialModel::round_well(a, radius)?;
    let c = 1.0 / (radius * bessel_j_real(1, a * radius));
    let profile = StateProfile::Well { c, b: 1.0, a, radius };
    let states = [1, -1]
        .into_iter()
        .map(|mode| ResonantState {
            mode,
            angular: AngularForm::Exp,
            inner_coeff: c,
            outer_coeff: 1.0,
            decay_exponent: 1,
            profile,
        })
        .collect();
    Ok((model, states))
}

/// Delta ring with `a = -2 / R`; states `r` inside and `R^2 / r` outside.
pub fn delta_ring_presonance(radius: f64) -> Result<(RadialModel, Vec<ResonantState>)> {
    let a = -2.0 / radius;
    let model = RadialModel::delta_ring(a, radius)?;
    let profile = StateProfile::Ring {
        inner: 1.0,
        outer: radius * radius,
        coupling: a,
        radius,
    };
    let states = [1, -1]
        .into_iter()
        .map(|mode| ResonantState {
            mode,
            angular: AngularForm::Exp,
            inner_coeff: 1.0,
            outer_coeff: radius * radius,
            decay_exponent: 1,
            profile,
        })
        .collect();
    Ok((model, states))
}

/// Robin disc with `sigma = 1 / rho`; the two real states `cos(theta)/r`
/// and `sin(theta)/r`.
pub fn robin_disc_presonance(rho: f64) -> Result<(RadialModel, Vec<ResonantState>)> {
    let model = RadialModel::robin_disc(rho, 1.0 / rho)?;
    let profile = StateProfile::Exterior { b: 1.0, rho };
    let states = [(1, AngularForm::Cos), (-1, AngularForm::Sin)]
        .into_iter()
        .map(|(mode, angular)| ResonantState {
            mode,
            angular,
            inner_coeff: 1.0,
            outer_coeff: 1.0,
            decay_exponent: 1,
            profile,
        })
        .collect();
    Ok((model, states))
}

/// Normalized zero-energy matching determinant for angular mode `mode`:
/// the regular (or boundary-conforming) solution is matched against the
/// decaying exterior solution `r^{-|m|}` (constant for `m = 0`). Zero
/// exactly when the model has a zero-energy state in this mode that does
/// not grow at infinity.
pub fn zero_energy_mismatch(model: &RadialModel, mode: i32) -> f64 {
    let m = mode.unsigned_abs();
    let mf = m as f64;
    // outer solution and r * derivative at radius R
    let outer = |radius: f64| -> (f64, f64) {
        if m == 0 {
            (1.0, 0.0)
        } else {
            (radius.powf(-mf), -mf * radius.powf(-mf))
        }
    };
    let normalized = |u: f64, ru: f64, v: f64, rv: f64| {
        (ru * v - u * rv) / ((u * u + ru * ru).sqrt() * (v * v + rv * rv).sqrt())
    };
    match *model {
        RadialModel::RoundWell { a, radius } => {
            let x = a * radius;
            let u = bessel_j_real(m, x);
            let du = if m == 0 {
                -bessel_j_real(1, x)
            } else {
                0.5 * (bessel_j_real(m - 1, x) - bessel_j_real(m + 1, x))
            };
            let (v, rv) = outer(radius);
            normalized(u, x * du, v, rv)
        }
        RadialModel::DeltaRing { a, radius } => {
            // inner r^m (1 for m = 0), continuous at R; jump adds a R u(R)
            let u = radius.powf(mf);
            let ru = mf * u + a * radius * u;
            let (v, rv) = outer(radius);
            normalized(u, ru, v, rv)
        }
        RadialModel::RobinDisc { rho, sigma } => {
            let (v, rv) = outer(rho);
            // boundary row: r u' = -sigma rho u
            normalized(1.0, -sigma * rho, v, rv)
        }
        RadialModel::Free => {
            let (v, rv) = outer(1.0);
            let (u, ru) = if m == 0 { (1.0, 0.0) } else { (1.0, mf) };
            normalized(u, ru, v, rv)
        }
    }
}

/// Smooth transition: 1 on `[0, inner]`, 0 on `[outer, inf)`.
pub fn smooth_step(s: f64, inner: f64, outer: f64) -> f64 {
    let s = s.abs();
    if s <= inner {
        return 1.0;
    }
    if s >= outer {
        return 0.0;
    }
    let t = (s - inner) / (outer - inner);
    let f = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    f(1.0 - t) / (f(1.0 - t) + f(t))
}

/// A uniform square grid `[-half, half]^2` with an odd number of nodes per
/// side, so that the symmetry line `x1 = 0` is a grid line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SquareGrid {
    pub nodes: usize,
    pub h: f64,
}

impl SquareGrid {
    pub fn new(half_width: f64, h: f64) -> Result<Self> {
        if !(h > 0.0 && half_width > 0.0) {
            return Err(Error::Grid("grid spacing and width must be positive".into()));
        }
        let half = (half_width / h).round() as usize;
        if ((half as f64) * h - half_width).abs() > 1e-9 * half_width {
            return Err(Error::Grid(format!("h = {h} does not divide the half width {half_width}")));
        }
        Ok(Self { nodes: 2 * half + 1, h })
    }

    pub fn coord(&self, i: usize) -> f64 {
        (i as f64 - ((self.nodes - 1) / 2) as f64) * self.h
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.nodes + j
    }

    /// Samples `f(x1, x2)` row-major with `x1` along the first index.
    pub fn sample<F: Fn(f64, f64) -> f64 + Sync>(&self, f: F) -> Vec<f64> {
        let n = self.nodes;
        (0..n * n)
            .into_par_iter()
            .map(|k| f(self.coord(k / n), self.coord(k % n)))
            .collect()
    }
}

/// Default cutoff: `psi(|x1|) psi(|x2|)`, identically a function of `x2`
/// alone in the strip `|x1| < inner`.
pub fn default_cutoff(inner: f64, outer: f64) -> impl Fn(f64, f64) -> f64 + Sync {
    move |x1, x2| smooth_step(x1, inner, outer) * smooth_step(x2, inner, outer)
}

/// Variable-wave-speed construction on a grid: `u_p`, and the potential
/// making `(-c^2 Delta + V) u_p = 0`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VwsGrid {
    pub grid: SquareGrid,
    pub c: Vec<f64>,
    pub chi: Vec<f64>,
    pub a0: f64,
    pub u_p: Vec<f64>,
    pub v: Vec<f64>,
}

const GUARD: f64 = 1e-8;

/// Builds `u_p = (1 - chi) x1/|x|^2 + chi a0 x1` and
/// `V = c^2 (Delta u_p) / u_p` from samples of `c` and `chi`.
///
/// `Delta u_p` is assembled from the product rule with finite-difference
/// derivatives of `chi`; the quotient is replaced by its limit along the
/// symmetry line where `|u_p|` drops below the guard.
pub fn vws_construct(grid: &SquareGrid, c: &[f64], chi: &[f64], a0: f64) -> Result<VwsGrid> {
    let n = grid.nodes;
    let h = grid.h;
    if c.len() != n * n || chi.len() != n * n {
        return Err(Error::Construction("sample arrays do not match the grid".into()));
    }
    if !(a0 > 0.0) {
        return Err(Error::Construction("a0 must be positive".into()));
    }
    if c.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::Construction("wave speed must be positive and bounded".into()));
    }
    if chi.iter().any(|&v| !(-1e-14..=1.0 + 1e-14).contains(&v)) {
        return Err(Error::Construction("cutoff must take values in [0, 1]".into()));
    }
    let mid = (n - 1) / 2;
    for (di, dj) in [(0isize, 0isize), (1, 0), (-1, 0), (0, 1), (0, -1)] {
        let k = grid.index((mid as isize + di) as usize, (mid as isize + dj) as usize);
        if chi[k] != 1.0 {
            return Err(Error::Construction("cutoff must equal 1 near the origin".into()));
        }
    }
    for t in 0..n {
        for k in [grid.index(0, t), grid.index(n - 1, t), grid.index(t, 0), grid.index(t, n - 1)] {
            if chi[k] != 0.0 {
                return Err(Error::Construction("cutoff must be compactly supported inside the grid".into()));
            }
        }
    }
    for j in 1..n - 1 {
        let d1 = (chi[grid.index(mid + 1, j)] - chi[grid.index(mid - 1, j)]) / (2.0 * h);
        if d1.abs() > 1e-12 {
            return Err(Error::Construction(format!(
                "d chi / d x1 = {d1:e} on the symmetry line at x2 = {}; the quotient would be singular",
                grid.coord(j)
            )));
        }
    }

    let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut up_row = vec![0.0; n];
            let mut v_row = vec![0.0; n];
            let x1 = grid.coord(i);
            for j in 0..n {
                let x2 = grid.coord(j);
                let k = grid.index(i, j);
                let r2 = x1 * x1 + x2 * x2;
                let inv_r2 = if r2 > 0.0 { 1.0 / r2 } else { 0.0 };
                let ch = chi[k];
                // u_p = x1 * denom with denom > 0
                let denom = (1.0 - ch) * inv_r2 + ch * a0;
                up_row[j] = x1 * denom;
                if i == 0 || j == 0 || i == n - 1 || j == n - 1 {
                    continue;
                }
                let d1 = (chi[grid.index(i + 1, j)] - chi[grid.index(i - 1, j)]) / (2.0 * h);
                let d2 = (chi[grid.index(i, j + 1)] - chi[grid.index(i, j - 1)]) / (2.0 * h);
                let lap = (chi[grid.index(i + 1, j)]
                    + chi[grid.index(i - 1, j)]
                    + chi[grid.index(i, j + 1)]
                    + chi[grid.index(i, j - 1)]
                    - 4.0 * ch)
                    / (h * h);
                if d1 == 0.0 && d2 == 0.0 && lap == 0.0 {
                    continue;
                }
                // w = a0 x1 - x1/|x|^2 = x1 q;  Delta u_p = w Delta chi + 2 grad chi . grad w
                let q = a0 - inv_r2;
                let dw1 = a0 - (x2 * x2 - x1 * x1) * inv_r2 * inv_r2;
                let dw2_over_x1 = 2.0 * x2 * inv_r2 * inv_r2;
                let scale = x1.abs().max(h) * denom;
                let speed2 = c[k] * c[k];
                v_row[j] = if up_row[j].abs() < GUARD * scale {
                    // limit along x1 -> 0: d chi/d x1 vanishes in the strip
                    speed2 * (q * lap + 2.0 * d2 * dw2_over_x1) / denom
                } else {
                    let delta_up = x1 * q * lap + 2.0 * d1 * dw1 + 2.0 * d2 * x1 * dw2_over_x1;
                    speed2 * delta_up / up_row[j]
                };
            }
            (up_row, v_row)
        })
        .collect();

    let mut u_p = Vec::with_capacity(n * n);
    let mut v = Vec::with_capacity(n * n);
    for (ur, vr) in rows {
        u_p.extend(ur);
        v.extend(vr);
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Construction("non-finite potential".into()));
    }
    Ok(VwsGrid {
        grid: grid.clone(),
        c: c.to_vec(),
        chi: chi.to_vec(),
        a0,
        u_p,
        v,
    })
}

impl VwsGrid {
    /// `max |(-c^2 Delta_h + V) u_p|` over interior nodes.
    pub fn discrete_residual(&self) -> f64 {
        let n = self.grid.nodes;
        let h2 = self.grid.h * self.grid.h;
        let g = &self.grid;
        (1..n - 1)
            .into_par_iter()
            .map(|i| {
                let mut worst: f64 = 0.0;
                for j in 1..n - 1 {
                    let k = g.index(i, j);
                    let lap = (self.u_p[g.index(i + 1, j)]
                        + self.u_p[g.index(i - 1, j)]
                        + self.u_p[g.index(i, j + 1)]
                        + self.u_p[g.index(i, j - 1)]
                        - 4.0 * self.u_p[k])
                        / h2;
                    let r = -self.c[k] * self.c[k] * lap + self.v[k] * self.u_p[k];
                    worst = worst.max(r.abs());
                }
                worst
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Largest distance from the origin of a node with `V != 0`.
    pub fn potential_support_radius(&self) -> f64 {
        let n = self.grid.nodes;
        let mut r: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if self.v[self.grid.index(i, j)] != 0.0 {
                    r = r.max(self.grid.coord(i).hypot(self.grid.coord(j)));
                }
            }
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_well_parameters() {
        let (m, s) = round_well_presonance(1.0, 1).unwrap();
        let RadialModel::RoundWell { a, .. } = m else { panic!() };
        assert!((a - 2.404825557695773).abs() < 1e-12);
        assert!((s[0].inner_coeff - 1.0 / 0.5191474972894669).abs() < 1e-12);
        let (m2, _) = round_well_presonance(2.0, 1).unwrap();
        let RadialModel::RoundWell { a: a2, .. } = m2 else { panic!() };
        assert!((a2 - 1.2024127788478865).abs() < 1e-13);
        for st in &s {
            let (c, d) = st.interface_residuals().unwrap();
            assert!(c <= 1e-10 && d <= 1e-10);
            assert!((st.value(1.0 - 1e-15) - 1.0).abs() < 1e-12);
            assert_eq!(st.value(1.0), 1.0);
        }
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn delta_ring_parameters() {
        let (m, s) = delta_ring_presonance(1.0).unwrap();
        assert_eq!(m, RadialModel::DeltaRing { a: -2.0, radius: 1.0 });
        assert_eq!(s[0].derivative(1.0) - s[0].derivative(1.0 - 1e-12), -2.0);
        assert_eq!(s[0].interface_residuals().unwrap(), (0.0, 0.0));
        let (m2, s2) = delta_ring_presonance(2.0).unwrap();
        assert_eq!(m2, RadialModel::DeltaRing { a: -1.0, radius: 2.0 });
        assert_eq!(s2[0].inner_coeff * 2.0, s2[0].outer_coeff / 2.0);
    }

    #[test]
    fn robin_parameters() {
        let (m, s) = robin_disc_presonance(1.0).unwrap();
        assert_eq!(m, RadialModel::RobinDisc { rho: 1.0, sigma: 1.0 });
        assert_eq!(s.len(), 2);
        let (m2, s2) = robin_disc_presonance(0.5).unwrap();
        assert_eq!(m2, RadialModel::RobinDisc { rho: 0.5, sigma: 2.0 });
        for st in s.iter().chain(&s2) {
            assert!(st.robin_residual(1.0 / st_rho(st)).unwrap().abs() <= 1e-12);
            assert_eq!(st.value(3.0), 1.0 / 3.0);
        }
        assert_ne!(s[0].angular, s[1].angular);
    }

    fn st_rho(s: &ResonantState) -> f64 {
        match s.profile {
            StateProfile::Exterior { rho, .. } => rho,
            _ => unreachable!(),
        }
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(RadialModel::round_well(-1.0, 1.0).is_err());
        assert!(RadialModel::round_well(1.0, 0.0).is_err());
        assert!(RadialModel::robin_disc(-1.0, 1.0).is_err());
        assert!(round_well_presonance(1.0, 0).is_err());
    }

    #[test]
    fn tail_integrals_show_borderline_integrability() {
        let states = [
            round_well_presonance(1.0, 1).unwrap().1[0],
            round_well_presonance(2.0, 1).unwrap().1[0],
            delta_ring_presonance(1.5).unwrap().1[0],
            robin_disc_presonance(1.0).unwrap().1[0],
        ];
        for s in &states {
            let i2 = |c: f64| s.lq_tail(2.0, c).unwrap();
            let b2 = s.outer_coeff * s.outer_coeff;
            let g1 = (i2(1e4) - i2(1e2)) / (1e2f64).ln();
            let g2 = (i2(1e6) - i2(1e4)) / (1e2f64).ln();
            assert!((g1 / b2 - 1.0).abs() < 0.05 && (g2 / b2 - 1.0).abs() < 0.05);
            let i3a = s.lq_tail(3.0, 1e4).unwrap();
            let i3b = s.lq_tail(3.0, 1e6).unwrap();
            assert!((i3b - i3a) < 1e-3 * i3a.max(1e-12) + 1e-3);
        }
    }

    #[test]
    fn zero_energy_mismatch_detects_resonances_only() {
        let (w, _) = round_well_presonance(1.0, 1).unwrap();
        assert!(zero_energy_mismatch(&w, 1).abs() < 1e-12);
        let off = RadialModel::round_well(0.9 * 2.404825557695773, 1.0).unwrap();
        assert!(zero_energy_mismatch(&off, 1).abs() >= 1e-3);
        let (d, _) = delta_ring_presonance(1.0).unwrap();
        assert!(zero_energy_mismatch(&d, 1).abs() < 1e-15);
        let (r, _) = robin_disc_presonance(0.7).unwrap();
        assert!(zero_energy_mismatch(&r, -1).abs() < 1e-15);
        assert!(zero_energy_mismatch(&RadialModel::Free, 1).abs() > 0.5);
    }

    fn vws_case(h: f64, variable: bool) -> VwsGrid {
        let grid = SquareGrid::new(4.0, h).unwrap();
        let chi = grid.sample(default_cutoff(0.8, 2.5));
        let c = grid.sample(|x1, x2| {
            if variable {
                1.0 + 0.3 * (-((x1 - 0.5).powi(2) + (x2 + 0.7).powi(2))).exp()
            } else {
                1.0
            }
        });
        vws_construct(&grid, &c, &chi, 1.0).unwrap()
    }

    #[test]
    fn vws_residual_is_second_order() {
        for variable in [false, true] {
            let coarse = vws_case(0.04, variable).discrete_residual();
            let fine = vws_case(0.02, variable).discrete_residual();
            let ratio = coarse / fine;
            assert!((3.5..=4.5).contains(&ratio), "variable={variable} ratio={ratio}");
        }
    }

    #[test]
    fn vws_potential_vanishes_where_cutoff_is_flat() {
        let g = vws_case(0.05, false);
        for i in 0..g.grid.nodes {
            for j in 0..g.grid.nodes {
                let (x1, x2) = (g.grid.coord(i), g.grid.coord(j));
                let k = g.grid.index(i, j);
                if x1.abs().max(x2.abs()) < 0.8 - 2.0 * g.grid.h {
                    assert_eq!(g.v[k], 0.0);
                    assert!((g.u_p[k] - x1).abs() < 1e-15);
                }
                if x1.abs().max(x2.abs()) > 2.5 + 2.0 * g.grid.h {
                    assert_eq!(g.v[k], 0.0);
                }
                if x1 == 0.0 {
                    assert_eq!(g.u_p[k], 0.0);
                }
            }
        }
        assert!(g.potential_support_radius() <= 2.5 * 2f64.sqrt() + 2.0 * g.grid.h);
    }

    #[test]
    fn vws_rejects_cutoff_with_normal_derivative_on_symmetry_line() {
        let grid = SquareGrid::new(3.0, 0.05).unwrap();
        let chi = grid.sample(|x1, x2| {
            let r = (x1 - 0.3).hypot(x2);
            smooth_step(r, 0.5, 2.0)
        });
        let c = vec![1.0; chi.len()];
        assert!(matches!(vws_construct(&grid, &c, &chi, 1.0), Err(Error::Construction(_))));
    }
}
