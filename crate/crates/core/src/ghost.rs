//! Empirical block measures, the ghost distribution and its diagnostics.
//!
//! Positions live on the torus grid `m / (k^n (k − 1))`. The block
//! `[k^n, k^{n+1})` has exactly `k^n (k − 1)` members, so level-`n` atoms sit
//! on the level-`n` torus grid, and the ghost CDF at a torus point needs `F`
//! only at the k-adic point `(k^n + m) / k^{n+1}`.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::{BigRational, Ratio};
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linrep::LinearRep;
use crate::matrix::Mat;
use crate::refine::{pow_u64, Dilation, Scalar};
use crate::spectral::{agm_terms_of, family_of, jsr_bounds, random_log_norm, rng_for, JsrConfig};

/// Extra digits drawn past the deepest perturbed position, so the truncated
/// tail moves `F` by far less than the quotients being measured.
const TAIL_DIGITS: usize = 30;

/// Default ε values for [`max_density_profile`].
pub const DEFAULT_EPSILONS: [f64; 3] = [0.05, 0.1, 0.2];

/// Number of torus grid points `k^n (k − 1)` at level `n`.
pub(crate) fn torus_len(k: u64, level: u32) -> Result<u64> {
    pow_u64(k, level)?
        .checked_mul(k - 1)
        .ok_or_else(|| Error::ResourceLimit(format!("torus grid of level {level} overflows")))
}

/// A CDF on `[0, 1]` that can be read on the torus grid.
pub trait TorusCdf {
    fn radix(&self) -> u64;

    /// Value at `m / (k^level (k − 1))`, for `0 ≤ m ≤ k^level (k − 1)`.
    fn at(&self, m: u64, level: u32) -> Result<f64>;

    /// Left limit at the same point.
    fn below(&self, m: u64, level: u32) -> Result<f64> {
        self.at(m, level)
    }
}

/// Normalized block measure `μ_n = Σ(n)^{-1} Σ_m f(k^n + m) δ_{m / (k^n (k−1))}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    k: u64,
    level: u32,
    weights: Vec<BigUint>,
    /// Prefix sums of `weights`, starting at 0.
    cumulative: Vec<BigUint>,
}

impl EmpiricalMeasure {
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    /// `Σ(n)`.
    pub fn total(&self) -> &BigUint {
        self.cumulative.last().expect("at least one atom")
    }

    /// Raw sequence values `f(k^n + m)`.
    pub fn raw_weights(&self) -> &[BigUint] {
        &self.weights
    }

    /// Atoms as `(position, weight)` in exact arithmetic.
    pub fn atoms(&self) -> Vec<(Ratio<u64>, BigRational)> {
        let den = self.weights.len() as u64;
        let total = BigInt::from(self.total().clone());
        self.weights
            .iter()
            .enumerate()
            .map(|(m, w)| {
                (
                    Ratio::new(m as u64, den),
                    BigRational::new(BigInt::from(w.clone()), total.clone()),
                )
            })
            .collect()
    }

    /// Mass of atoms with position at most `m / (k^level (k−1))`, exactly.
    pub fn cdf_exact(&self, m: u64, level: u32) -> Result<BigRational> {
        let count = self.count_at_most(m, level)?;
        Ok(self.fraction(count))
    }

    fn fraction(&self, count: usize) -> BigRational {
        BigRational::new(
            BigInt::from(self.cumulative[count].clone()),
            BigInt::from(self.total().clone()),
        )
    }

    /// Number of atoms at positions `≤ m / (k^level (k−1))`.
    fn count_at_most(&self, m: u64, level: u32) -> Result<usize> {
        let n = self.weights.len() as u128;
        let grid = torus_len(self.k, level)? as u128;
        // Atom j qualifies iff j / n ≤ m / grid.
        let last = (m as u128 * n) / grid;
        Ok((last + 1).min(n) as usize)
    }

    fn count_below(&self, m: u64, level: u32) -> Result<usize> {
        let n = self.weights.len() as u128;
        let grid = torus_len(self.k, level)? as u128;
        // Atom j qualifies iff j · grid < m · n.
        let bound = m as u128 * n;
        Ok(bound.div_ceil(grid).min(n) as usize)
    }
}

/// Right-continuous step function of a measure at a real point.
pub fn empirical_cdf(measure: &EmpiricalMeasure, x: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    let n = measure.weights.len();
    let count = ((x * n as f64).floor() as usize + 1).min(n);
    ratio_to_f64(&measure.fraction(count))
}

/// `μ_n` from the block `[k^n, k^{n+1})`.
pub fn empirical_measure(rep: &LinearRep, n: u32) -> Result<EmpiricalMeasure> {
    let weights = rep.block_values(n)?;
    let mut cumulative = Vec::with_capacity(weights.len() + 1);
    let mut acc = BigUint::zero();
    cumulative.push(acc.clone());
    for w in &weights {
        acc += w;
        cumulative.push(acc.clone());
    }
    if acc.is_zero() {
        return Err(Error::DegenerateBlock { level: n });
    }
    Ok(EmpiricalMeasure {
        k: rep.k(),
        level: n,
        weights,
        cumulative,
    })
}

impl TorusCdf for EmpiricalMeasure {
    fn radix(&self) -> u64 {
        self.k
    }

    fn at(&self, m: u64, level: u32) -> Result<f64> {
        Ok(ratio_to_f64(&self.fraction(self.count_at_most(m, level)?)))
    }

    fn below(&self, m: u64, level: u32) -> Result<f64> {
        Ok(ratio_to_f64(&self.fraction(self.count_below(m, level)?)))
    }
}

pub(crate) fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Linear functional applied to `F` in the affine CDF formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Functional {
    /// Coordinate `i` (0-based) of `F`.
    Component(usize),
    /// The representation's row vector `w`.
    #[default]
    Weight,
}

impl Functional {
    /// `e_1`, the first coordinate.
    pub const FIRST: Functional = Functional::Component(0);
}

/// `x ↦ φ(F((1 + (k−1)x)/k) − F(1/k)) / φ(F(1) − F(1/k))` for a functional `φ`.
#[derive(Debug, Clone)]
pub struct GhostCdf<T> {
    dilation: Dilation<T>,
    functional: Vec<T>,
    base: T,
    denominator: T,
}

impl<T: Scalar> GhostCdf<T> {
    pub fn new(dilation: Dilation<T>, functional: Functional) -> Result<Self> {
        let d = dilation.dim();
        let phi: Vec<T> = match functional {
            Functional::Component(i) if i < d => (0..d)
                .map(|j| if j == i { T::one() } else { T::zero() })
                .collect(),
            Functional::Component(i) => {
                return Err(Error::InvalidArgument(format!(
                    "component {i} outside dimension {d}"
                )))
            }
            Functional::Weight => dilation.weight().to_vec(),
        };
        let apply = |v: &[T]| {
            phi.iter()
                .zip(v)
                .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
        };
        // F(1/k) is the offset O_1.
        let base = apply(dilation.offset(1));
        let denominator = apply(&dilation.offset_complement(1));
        if denominator <= T::zero() {
            let component = match functional {
                Functional::Component(i) => i,
                Functional::Weight => d,
            };
            return Err(Error::DegenerateComponent { component });
        }
        Ok(GhostCdf {
            dilation,
            functional: phi,
            base,
            denominator,
        })
    }

    pub fn dilation(&self) -> &Dilation<T> {
        &self.dilation
    }

    /// Exact-type value at the torus point `m / (k^level (k−1))`.
    pub fn value_at_torus(&self, m: u64, level: u32) -> Result<T> {
        let k = self.dilation.k();
        let len = torus_len(k, level)?;
        if m > len {
            return Err(Error::InvalidArgument(format!(
                "torus index {m} exceeds {len}"
            )));
        }
        if m == len {
            return Ok(T::one());
        }
        let y = pow_u64(k, level)? + m;
        let f = self.dilation.eval(y, level + 1)?;
        let numerator = self
            .functional
            .iter()
            .zip(&f)
            .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            - self.base.clone();
        Ok(numerator / self.denominator.clone())
    }

    /// Exact-type value at the k-adic point `j / k^depth`.
    pub fn value(&self, j: u64, depth: u32) -> Result<T> {
        let m = j
            .checked_mul(self.dilation.k() - 1)
            .ok_or(Error::Overflow("scaling a k-adic numerator"))?;
        self.value_at_torus(m, depth)
    }

    /// Values on the k-adic grid `j / k^depth`, `j = 0..=k^depth`.
    pub fn grid(&self, depth: u32) -> Result<Vec<T>> {
        let top = pow_u64(self.dilation.k(), depth)?;
        (0..=top)
            .into_par_iter()
            .map(|j| self.value(j, depth))
            .collect()
    }
}

impl<T: Scalar> TorusCdf for GhostCdf<T> {
    fn radix(&self) -> u64 {
        self.dilation.k()
    }

    fn at(&self, m: u64, level: u32) -> Result<f64> {
        self.value_at_torus(m, level).map(|v| v.as_f64())
    }
}

/// Ghost CDF at the k-adic point `j / k^depth` using coordinate `component` of `F`.
pub fn ghost_cdf(rep: &LinearRep, j: u64, depth: u32, component: usize) -> Result<f64> {
    let dilation = Dilation::float(rep, JsrConfig::default())?;
    GhostCdf::new(dilation, Functional::Component(component))?.value(j, depth)
}

/// Exact ghost CDF; needs a rational Perron pair.
pub fn ghost_cdf_exact(
    rep: &LinearRep,
    j: u64,
    depth: u32,
    component: usize,
) -> Result<BigRational> {
    let dilation = Dilation::exact(rep, JsrConfig::default())?;
    GhostCdf::new(dilation, Functional::Component(component))?.value(j, depth)
}

/// `max |a − b|` over the level-`depth` torus grid, at each point and just below it.
pub fn sup_distance(
    a: &(impl TorusCdf + Sync),
    b: &(impl TorusCdf + Sync),
    depth: u32,
) -> Result<f64> {
    if a.radix() != b.radix() {
        return Err(Error::InvalidArgument(format!(
            "radix mismatch: {} vs {}",
            a.radix(),
            b.radix()
        )));
    }
    let len = torus_len(a.radix(), depth)?;
    (0..=len)
        .into_par_iter()
        .map(|m| {
            let at = (a.at(m, depth)? - b.at(m, depth)?).abs();
            let below = (a.below(m, depth)? - b.below(m, depth)?).abs();
            Ok(at.max(below))
        })
        .try_reduce(|| 0.0, |x, y| Ok(x.max(y)))
}

/// Difference quotients of `F_1` along one random point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularityTrace {
    pub trial: usize,
    /// Digits `x_1, x_2, …` of the sampled point.
    pub x_digits: Vec<u8>,
    /// `quotients[n − 1] = |F_1(x) − F_1(y_n)| / |x − y_n|` for `n = 1..=N`.
    pub quotients: Vec<f64>,
    /// `(k/ρ) Π_j ‖B_j‖^{1/k}`, the base of the exponential bound.
    pub decay_constant: f64,
}

/// For each trial draw `x` with i.i.d. uniform digits, perturb digit `n + 1` by
/// `+1` when it is 0 and `−1` otherwise, and record the difference quotients
/// of `F_1` for `n = 1..=depth`.
pub fn singularity_trace(
    rep: &LinearRep,
    trials: usize,
    depth: u32,
    seed: u64,
) -> Result<Vec<SingularityTrace>> {
    if depth < 4 {
        return Err(Error::InvalidArgument(
            "singularity trace needs depth >= 4".into(),
        ));
    }
    let dilation = Dilation::float(rep, JsrConfig::default())?;
    let terms = agm_terms_of(&family_of(rep), dilation.certificate().eigen.rho);
    let decay_constant = terms.geometric_mean / terms.rho_over_k;
    let k = rep.k();
    let d = rep.dim();
    let kf = k as f64;
    let total = depth as usize + 1 + TAIL_DIGITS;

    let traces = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = rng_for(seed, trial as u64);
            let digits: Vec<usize> = (0..total).map(|_| rng.gen_range(0..k as usize)).collect();
            // tails[j] = F(.x_{j+1} x_{j+2} ⋯), with x_1 = digits[0].
            let mut tails = vec![vec![0.0; d]; total + 1];
            for j in (0..total).rev() {
                let a = digits[j];
                let next = mat_vec(dilation.scaled_digit(a), &tails[j + 1]);
                tails[j] = next
                    .iter()
                    .zip(dilation.offset(a))
                    .map(|(x, o)| x + o)
                    .collect();
            }
            // row = k^n e_1 C_{x_1} ⋯ C_{x_n}
            let mut row = vec![0.0; d];
            row[0] = 1.0;
            let mut quotients = Vec::with_capacity(depth as usize);
            for n in 1..=depth as usize {
                row = vec_mat(&row, dilation.scaled_digit(digits[n - 1]))
                    .into_iter()
                    .map(|x| x * kf)
                    .collect();
                let a = digits[n];
                let b = if a == 0 { 1 } else { a - 1 };
                let (ca, cb) = (dilation.scaled_digit(a), dilation.scaled_digit(b));
                let g = &tails[n + 1];
                let diff: Vec<f64> = (0..d)
                    .map(|i| {
                        let lin: f64 = (0..d).map(|j| (ca[i * d + j] - cb[i * d + j]) * g[j]).sum();
                        lin + dilation.offset(a)[i] - dilation.offset(b)[i]
                    })
                    .collect();
                let dot: f64 = row.iter().zip(&diff).map(|(r, x)| r * x).sum();
                quotients.push(kf * dot.abs());
            }
            SingularityTrace {
                trial,
                x_digits: digits.iter().map(|&a| a as u8).collect(),
                quotients,
                decay_constant,
            }
        })
        .collect();
    Ok(traces)
}

fn mat_vec(m: &[f64], v: &[f64]) -> Vec<f64> {
    let d = v.len();
    (0..d)
        .map(|i| (0..d).map(|j| m[i * d + j] * v[j]).sum())
        .collect()
}

fn vec_mat(v: &[f64], m: &[f64]) -> Vec<f64> {
    let d = v.len();
    (0..d)
        .map(|j| (0..d).map(|i| v[i] * m[i * d + j]).sum())
        .collect()
}

/// Median quotient at index `n − 1` across traces.
pub fn median_quotient(traces: &[SingularityTrace], n: usize) -> Option<f64> {
    let mut values: Vec<f64> = traces
        .iter()
        .filter_map(|t| t.quotients.get(n - 1).copied())
        .collect();
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len().is_multiple_of(2) {
        (values[mid - 1] + values[mid]) / 2.0
    } else {
        values[mid]
    })
}

/// Ghost measure type of a Salem sequence, read off its digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SalemClass {
    ZeroMeasure,
    /// Dirac mass at `j / (k − 1)` on the torus.
    PurePoint(Ratio<u64>),
    SingularContinuous,
    Lebesgue,
}

impl fmt::Display for SalemClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SalemClass::ZeroMeasure => write!(f, "zero measure"),
            SalemClass::PurePoint(at) => write!(f, "pure point at {at}"),
            SalemClass::SingularContinuous => write!(f, "singular continuous"),
            SalemClass::Lebesgue => write!(f, "Lebesgue"),
        }
    }
}

pub fn classify_salem(digits: &[u64]) -> Result<SalemClass> {
    let k = digits.len();
    if k < 2 {
        return Err(Error::InvalidRadix(k as u64));
    }
    let nonzero: Vec<usize> = (0..k).filter(|&j| digits[j] != 0).collect();
    Ok(match nonzero.as_slice() {
        [] => return Err(Error::InvalidArgument("Salem digits are all zero".into())),
        _ if digits.iter().all(|&b| b == digits[0]) => SalemClass::Lebesgue,
        [0] => SalemClass::ZeroMeasure,
        [j] => SalemClass::PurePoint(Ratio::new(*j as u64, k as u64 - 1)),
        _ => SalemClass::SingularContinuous,
    })
}

/// For each level `m`, the fraction of `n ∈ [k^m, k^{m+1})` with
/// `f(n) ≥ ε (ρ*_lower)^m`.
pub fn max_density_profile(
    rep: &LinearRep,
    levels: &[u32],
    epsilon: f64,
    cfg: JsrConfig,
) -> Result<Vec<(u32, f64)>> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    let rho = crate::spectral::dominant_eigenpair(&rep.sum_matrix().to_f64())
        .map(|e| e.rho)
        .or_else(|_| {
            Ok::<f64, Error>(crate::spectral::spectral_radius(&rep.sum_matrix().to_f64()))
        })?;
    let jsr = jsr_bounds(&family_of(rep), cfg)?;
    let threshold = rho / rep.k() as f64;
    if jsr.lower <= threshold * (1.0 + crate::spectral::RELATIVE_TOL) {
        return Err(Error::HypothesisViolated(format!(
            "joint spectral radius lower bound {} does not exceed rho/k = {threshold}",
            jsr.lower
        )));
    }
    levels
        .iter()
        .map(|&m| {
            let values = rep.block_values(m)?;
            let cut = epsilon * jsr.lower.powi(m as i32);
            let hits = values
                .iter()
                .filter(|v| v.to_f64().unwrap_or(f64::INFINITY) >= cut)
                .count();
            Ok((m, hits as f64 / values.len() as f64))
        })
        .collect()
}

/// Samples of `‖B_{x_1} ⋯ B_{x_n}‖ / ρ*^n` for uniform random digit strings.
pub fn norm_decay_sample(
    family: &[Mat],
    rho_star: f64,
    trials: usize,
    length: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if family.is_empty() || trials < 1 || rho_star.is_nan() || rho_star <= 0.0 {
        return Err(Error::InvalidArgument(
            "norm decay needs a nonempty family, trials >= 1 and rho_star > 0".into(),
        ));
    }
    let scale = length as f64 * rho_star.ln();
    Ok((0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_for(seed, t as u64);
            random_log_norm(family, length, &mut rng).map_or(0.0, |l| (l - scale).exp())
        })
        .collect())
}

/// `Σ(n+1) / Σ(n)` for `n = 0..levels`; tends to `ρ` under the standing hypotheses.
pub fn block_sum_ratios(rep: &LinearRep, levels: u32) -> Vec<Option<f64>> {
    let sums: Vec<BigUint> = (0..=levels).map(|n| rep.block_sum(n)).collect();
    sums.windows(2)
        .map(|w| {
            (!w[0].is_zero()).then(|| {
                ratio_to_f64(&BigRational::new(
                    BigInt::from(w[1].clone()),
                    BigInt::from(w[0].clone()),
                ))
            })
        })
        .collect()
}
