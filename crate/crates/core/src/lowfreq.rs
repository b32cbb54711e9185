//! Low-frequency behaviour of the resolvent: sampling `<g, R(lambda) f>`
//! near `lambda = 0` and fitting
//! `c_{-2}/lambda^2 + c_p/(lambda^2 log(lambda b)) + c_l log(lambda) + c_0`
//! plus the first regular corrections `lambda^2 log(lambda)` and `lambda^2`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::least_squares;
use crate::models::RadialModel;
use crate::radial::{apply_resolvent, ModeProblem, RadialGrid};
use crate::specfun::BranchedComplex;

pub const DEFAULT_LAMBDA_MAX: f64 = 1e-1;
pub const DEFAULT_SIGNIFICANCE: f64 = 1e-3;
/// `ln|b|` is searched in `[-LOG_B_RANGE, LOG_B_RANGE]`.
const LOG_B_RANGE: f64 = 10.0;

/// Rays `arg lambda in {pi/2, pi/4, 3pi/4}` with `per_ray` log-spaced radii
/// in `[lo, hi]`.
pub fn default_lambdas(lo: f64, hi: f64, per_ray: usize) -> Vec<BranchedComplex> {
    let mut out = Vec::with_capacity(3 * per_ray);
    for arg in [PI / 2.0, PI / 4.0, 3.0 * PI / 4.0] {
        for i in 0..per_ray {
            let t = if per_ray > 1 { i as f64 / (per_ray - 1) as f64 } else { 0.0 };
            let r = (lo.ln() + (hi.ln() - lo.ln()) * t).exp();
            out.push(BranchedComplex::from_polar(r, arg).expect("ray inside the branch domain"));
        }
    }
    out
}

/// `<g, R(lambda) f> = int g(r) (R f)(r) r dr` for each `lambda`, with `f`
/// and `g` sampled on `grid`.
pub fn sample_lowfreq(
    model: &RadialModel,
    mode: i32,
    grid: &RadialGrid,
    f: &[f64],
    g: &[f64],
    lambdas: &[BranchedComplex],
) -> Result<Vec<Complex64>> {
    if g.len() != grid.n || f.len() != grid.n {
        return Err(Error::Grid("window or data does not match the grid".into()));
    }
    let interface = model.interface();
    lambdas
        .par_iter()
        .map(|&lam| {
            let u = apply_resolvent(&ModeProblem::new(*model, mode, lam)?, grid, f)?;
            let gu: Vec<Complex64> = u.iter().zip(g).map(|(u, g)| u * g).collect();
            Ok(grid.integrate_weighted(&gu, interface))
        })
        .collect()
}

/// `(R(lambda) f)(r)` at a grid node `r` for each `lambda`.
pub fn sample_pointwise(
    model: &RadialModel,
    mode: i32,
    grid: &RadialGrid,
    f: &[f64],
    r: f64,
    lambdas: &[BranchedComplex],
) -> Result<Vec<Complex64>> {
    let k = grid
        .node_of(r)
        .filter(|&k| k < grid.n)
        .ok_or_else(|| Error::Grid(format!("r = {r} is not a grid node")))?;
    lambdas
        .par_iter()
        .map(|&lam| Ok(apply_resolvent(&ModeProblem::new(*model, mode, lam)?, grid, f)?[k]))
        .collect()
}

/// One term `coeff * lambda^nu * log^k(...)`. `k = -1` marks the
/// reciprocal-log term `1/log(lambda b)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionTerm {
    pub nu: f64,
    pub k: i32,
    pub b: Option<Complex64>,
    pub coeff: Complex64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionFit {
    pub terms: Vec<ExpansionTerm>,
    /// Number of significant reciprocal-log terms in this fit (0 or 1).
    pub m: usize,
    pub zero_eigen_amp: Complex64,
    pub b: Complex64,
    /// Relative weighted residual `|W(y - A c)| / |W y|`.
    pub residual: f64,
    pub condition: f64,
    /// Largest contribution over the samples of the reciprocal-log term,
    /// relative to the largest contribution of any term.
    pub singular_ratio: f64,
}

impl ExpansionFit {
    pub fn arg_b(&self) -> f64 {
        self.b.arg()
    }

    pub fn c_p(&self) -> Complex64 {
        self.terms[1].coeff
    }

    pub fn evaluate(&self, lambda: BranchedComplex) -> Complex64 {
        let row = design_row(lambda, self.b.ln());
        row.iter().zip(&self.terms).map(|(a, t)| a * t.coeff).sum()
    }
}

const COLUMNS: usize = 6;

fn design_row(lambda: BranchedComplex, beta: Complex64) -> [Complex64; COLUMNS] {
    let l = lambda.ln();
    let sq = lambda.value() * lambda.value();
    let inv2 = 1.0 / sq;
    [inv2, inv2 / (l + beta), l, Complex64::new(1.0, 0.0), sq * l, sq]
}

struct Trial {
    coeffs: Vec<Complex64>,
    residual: f64,
    condition: f64,
}

fn solve_at(samples: &[(BranchedComplex, Complex64)], weights: &[f64], beta: Complex64) -> Result<Trial> {
    let rows: Vec<Vec<Complex64>> = samples
        .iter()
        .zip(weights)
        .map(|((lam, _), w)| design_row(*lam, beta).iter().map(|a| a * w).collect())
        .collect();
    let rhs: Vec<Complex64> = samples.iter().zip(weights).map(|((_, y), w)| y * w).collect();
    let ls = least_squares(&rows, &rhs)?;
    Ok(Trial {
        coeffs: ls.solution,
        residual: ls.residual_norm,
        condition: ls.condition,
    })
}

fn check_coverage(samples: &[(BranchedComplex, Complex64)]) -> Result<()> {
    if samples.len() < 24 {
        return Err(Error::InsufficientData(format!("{} samples, need at least 24", samples.len())));
    }
    let (lo, hi) = samples.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), (l, _)| (lo.min(l.norm()), hi.max(l.norm())));
    if hi / lo < 100.0 * (1.0 - 1e-9) {
        return Err(Error::InsufficientData(format!("samples span {:.2} decades, need 2", (hi / lo).log10())));
    }
    let mut rays: Vec<f64> = samples.iter().map(|(l, _)| l.arg()).collect();
    rays.sort_by(|a, b| a.total_cmp(b));
    rays.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
    if rays.len() < 2 {
        return Err(Error::InsufficientData("samples lie on a single ray".into()));
    }
    if samples.iter().any(|(_, y)| !y.is_finite()) {
        return Err(Error::InsufficientData("non-finite sample".into()));
    }
    Ok(())
}

pub fn fit_expansion(samples: &[(BranchedComplex, Complex64)]) -> Result<ExpansionFit> {
    fit_expansion_with(samples, DEFAULT_SIGNIFICANCE)
}

/// Variable projection: the amplitudes are linear given
/// `beta = log b`, which is located by a global grid over
/// `(ln|b|, arg b)` followed by successive zoomed grids.
pub fn fit_expansion_with(samples: &[(BranchedComplex, Complex64)], significance: f64) -> Result<ExpansionFit> {
    check_coverage(samples)?;
    let ymax = samples.iter().map(|(_, y)| y.norm()).fold(0.0, f64::max);
    // relative weighting; the floor keeps exact zeros usable
    let weights: Vec<f64> = samples.iter().map(|(_, y)| 1.0 / y.norm().max(1e-14 * ymax).max(1e-300)).collect();
    let objective = |x: f64, y: f64| -> f64 {
        solve_at(samples, &weights, Complex64::new(x, y)).map_or(f64::INFINITY, |t| t.residual)
    };

    let (nx, ny) = (81, 48);
    let candidates: Vec<(f64, f64, f64)> = (0..nx * ny)
        .into_par_iter()
        .map(|k| {
            let x = -LOG_B_RANGE + 2.0 * LOG_B_RANGE * (k / ny) as f64 / (nx - 1) as f64;
            let y = -PI + 2.0 * PI * (k % ny) as f64 / ny as f64;
            (objective(x, y), x, y)
        })
        .collect();
    let &(mut best, mut bx, mut by) = candidates
        .iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("non-empty grid");
    if !best.is_finite() {
        let cond = solve_at(samples, &weights, Complex64::new(0.0, -PI / 2.0))
            .map(|t| t.condition)
            .unwrap_or(f64::INFINITY);
        return Err(Error::FitDegeneracy { condition: cond });
    }
    let (mut sx, mut sy) = (2.0 * LOG_B_RANGE / (nx - 1) as f64, 2.0 * PI / ny as f64);
    for _ in 0..40 {
        let mut improved = (best, bx, by);
        for i in -4..=4 {
            for j in -4..=4 {
                let x = (bx + i as f64 * sx / 4.0).clamp(-LOG_B_RANGE, LOG_B_RANGE);
                let y = by + j as f64 * sy / 4.0;
                let v = objective(x, y);
                if v < improved.0 {
                    improved = (v, x, y);
                }
            }
        }
        (best, bx, by) = improved;
        sx /= 2.0;
        sy /= 2.0;
        if sx < 1e-12 {
            break;
        }
    }
    // wrap arg b into (-pi, pi]
    let by = by - 2.0 * PI * ((by + PI) / (2.0 * PI)).floor();
    let by = if by <= -PI { by + 2.0 * PI } else { by };
    let beta = Complex64::new(bx, by);
    let trial = solve_at(samples, &weights, beta)?;
    let b = beta.exp();

    let mut amps = [0.0f64; COLUMNS];
    for (lam, _) in samples {
        let row = design_row(*lam, beta);
        for t in 0..COLUMNS {
            amps[t] = amps[t].max((row[t] * trial.coeffs[t]).norm());
        }
    }
    let dominant = amps.iter().cloned().fold(0.0, f64::max);
    let singular_ratio = if dominant > 0.0 { amps[1] / dominant } else { 0.0 };
    let m = usize::from(singular_ratio > significance);
    let wy: f64 = samples.iter().zip(&weights).map(|((_, y), w)| (y * w).norm_sqr()).sum::<f64>().sqrt();
    let terms = vec![
        ExpansionTerm { nu: -2.0, k: 0, b: None, coeff: trial.coeffs[0] },
        ExpansionTerm { nu: -2.0, k: -1, b: Some(b), coeff: trial.coeffs[1] },
        ExpansionTerm { nu: 0.0, k: 1, b: None, coeff: trial.coeffs[2] },
        ExpansionTerm { nu: 0.0, k: 0, b: None, coeff: trial.coeffs[3] },
        ExpansionTerm { nu: 2.0, k: 1, b: None, coeff: trial.coeffs[4] },
        ExpansionTerm { nu: 2.0, k: 0, b: None, coeff: trial.coeffs[5] },
    ];
    Ok(ExpansionFit {
        terms,
        m,
        zero_eigen_amp: trial.coeffs[0],
        b,
        residual: trial.residual / wy,
        condition: trial.condition,
        singular_ratio,
    })
}

/// Total p-resonance count over per-mode fits (the `+-1` modes of a
/// radial model give `M = 2`).
pub fn presonance_count(fits: &[ExpansionFit]) -> usize {
    fits.iter().map(|f| f.m).sum()
}

/// Relative spread of the fitted `b` across fits that detected a
/// p-resonance; `None` with fewer than two such fits.
pub fn b_agreement(fits: &[ExpansionFit]) -> Option<f64> {
    let bs: Vec<Complex64> = fits.iter().filter(|f| f.m == 1).map(|f| f.b).collect();
    if bs.len() < 2 {
        return None;
    }
    let scale = bs.iter().map(|b| b.norm()).fold(0.0, f64::max);
    let spread = bs.iter().flat_map(|a| bs.iter().map(move |b| (a - b).norm())).fold(0.0, f64::max);
    Some(spread / scale)
}
