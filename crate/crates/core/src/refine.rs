//! Dilation-equation solutions at k-adic points and the equivalent affine IFS.
//!
//! With `C_a = ρ^{-1} B_a` and `O_j = Σ_{a<j} C_a v_ρ`, the solution of
//! `F(x) = Σ_a C_a F(kx − a)` (zero left of 0, `v_ρ` right of 1) satisfies
//! `F(.j x_1 x_2 ⋯) = C_j F(.x_1 x_2 ⋯) + O_j`. At a k-adic point the digit
//! string is finite and the recursion bottoms out at `F(0) = 0`, so grid
//! values are computed exactly. The same maps, paired with `x ↦ (x + j)/k`,
//! form the IFS whose attractor is the graph of `F`.
//!
//! Everything is generic over [`Scalar`]: `BigRational` when `ρ` and `v_ρ` are
//! rational, `f64` otherwise.

use std::fmt::Debug;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linrep::{padded_digits, LinearRep};
use crate::matrix::IntMatrix;
use crate::spectral::{certify, operator_norm, Certificate, JsrConfig};

/// Deepest grid [`Dilation::sample`] will build by default.
pub const DEFAULT_MAX_DEPTH: u32 = 16;
/// Cap on materialized grid points and polyline vertices.
pub const MAX_POINTS: u64 = 1 << 24;

/// Field used for curve values.
pub trait Scalar:
    Clone + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive + Debug + Send + Sync + 'static
{
    /// Equality up to rounding (exact for rationals).
    fn approx_eq(&self, other: &Self) -> bool;

    /// Exact `p/q` text when the value is exact.
    fn exact_text(&self) -> Option<String>;

    fn as_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn approx_eq(&self, other: &Self) -> bool {
        (self - other).abs() <= 1e-12 * self.abs().max(other.abs()).max(1.0)
    }

    fn exact_text(&self) -> Option<String> {
        None
    }
}

impl Scalar for BigRational {
    fn approx_eq(&self, other: &Self) -> bool {
        self == other
    }

    fn exact_text(&self) -> Option<String> {
        Some(if self.denom().is_one() {
            self.numer().to_string()
        } else {
            self.to_string()
        })
    }
}

pub(crate) fn pow_u64(k: u64, n: u32) -> Result<u64> {
    k.checked_pow(n)
        .ok_or_else(|| Error::ResourceLimit(format!("{k}^{n} overflows")))
}

fn lift<T: Scalar>(x: u64) -> T {
    T::from_u64(x).expect("integer converts")
}

fn mat_vec<T: Scalar>(m: &[T], v: &[T]) -> Vec<T> {
    let d = v.len();
    (0..d)
        .map(|i| {
            (0..d).fold(T::zero(), |acc, j| {
                if m[i * d + j].is_zero() {
                    acc
                } else {
                    acc + m[i * d + j].clone() * v[j].clone()
                }
            })
        })
        .collect()
}

fn vec_add<T: Scalar>(a: Vec<T>, b: &[T]) -> Vec<T> {
    a.into_iter().zip(b).map(|(x, y)| x + y.clone()).collect()
}

/// Rational Perron pair `(ρ, v_ρ)` with `Σ v_ρ = 1`, when one exists for `d ≤ 2`.
pub fn exact_eigenpair(b: &IntMatrix) -> Option<(BigRational, Vec<BigRational>)> {
    let int = |x: u64| BigRational::from_integer(BigInt::from(x));
    match b.dim() {
        1 => Some((int(b.get(0, 0)), vec![BigRational::one()])),
        2 => {
            let (a, c01, c10, d) = (b.get(0, 0), b.get(0, 1), b.get(1, 0), b.get(1, 1));
            let diff = BigInt::from(a) - BigInt::from(d);
            let disc = &diff * &diff + BigInt::from(4u8) * BigInt::from(c01) * BigInt::from(c10);
            let root = disc.sqrt();
            if &root * &root != disc || c01 == 0 {
                return None;
            }
            let two = BigRational::from_integer(BigInt::from(2u8));
            let rho = (BigRational::from_integer(BigInt::from(a) + BigInt::from(d) + root)) / two;
            let v0 = int(c01);
            let v1 = &rho - int(a);
            let s = &v0 + &v1;
            Some((rho, vec![v0 / &s, v1 / s]))
        }
        _ => None,
    }
}

/// Solution of the dilation equation attached to a representation.
#[derive(Debug, Clone)]
pub struct Dilation<T> {
    k: u64,
    dim: usize,
    rho: T,
    v: Vec<T>,
    /// `ρ^{-1} B_a`, row-major.
    scaled: Vec<Vec<T>>,
    /// `O_j = Σ_{a<j} ρ^{-1} B_a v_ρ`, for `j = 0..=k` (so `O_k = v_ρ`).
    offsets: Vec<Vec<T>>,
    weight: Vec<T>,
    certificate: Certificate,
}

impl Dilation<f64> {
    /// Floating-point solution; certifies dominance and `ρ > ρ*` first.
    pub fn float(rep: &LinearRep, cfg: JsrConfig) -> Result<Self> {
        let certificate = certify(rep, cfg)?;
        let rho = certificate.eigen.rho;
        let v = certificate.eigen.v_rho.clone();
        Ok(Self::from_parts(rep, rho, v, certificate))
    }
}

impl Dilation<BigRational> {
    /// Exact solution; fails with `InvalidArgument` when `ρ` is irrational or `d > 2`.
    pub fn exact(rep: &LinearRep, cfg: JsrConfig) -> Result<Self> {
        let certificate = certify(rep, cfg)?;
        let (rho, v) = exact_eigenpair(&rep.sum_matrix()).ok_or_else(|| {
            Error::InvalidArgument("Perron root is not rational; use floating mode".into())
        })?;
        Ok(Self::from_parts(rep, rho, v, certificate))
    }
}

impl<T: Scalar> Dilation<T> {
    fn from_parts(rep: &LinearRep, rho: T, v: Vec<T>, certificate: Certificate) -> Self {
        let d = rep.dim();
        let scaled: Vec<Vec<T>> = rep
            .digit_matrices()
            .iter()
            .map(|b| {
                b.entries()
                    .iter()
                    .map(|&x| lift::<T>(x) / rho.clone())
                    .collect()
            })
            .collect();
        let mut offsets = Vec::with_capacity(scaled.len() + 1);
        let mut acc = vec![T::zero(); d];
        offsets.push(acc.clone());
        for c in &scaled {
            acc = vec_add(mat_vec(c, &v), &acc);
            offsets.push(acc.clone());
        }
        Dilation {
            k: rep.k(),
            dim: d,
            rho,
            v,
            scaled,
            offsets,
            weight: rep.w().iter().map(|&x| lift(x)).collect(),
            certificate,
        }
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rho(&self) -> &T {
        &self.rho
    }

    pub fn v_rho(&self) -> &[T] {
        &self.v
    }

    /// Row vector `w` of the originating representation.
    pub fn weight(&self) -> &[T] {
        &self.weight
    }

    pub fn certificate(&self) -> &Certificate {
        &self.certificate
    }

    /// `ρ^{-1} B_a` in row-major order.
    pub fn scaled_digit(&self, a: usize) -> &[T] {
        &self.scaled[a]
    }

    /// `Σ_{a<j} ρ^{-1} B_a v_ρ`.
    pub fn offset(&self, j: usize) -> &[T] {
        &self.offsets[j]
    }

    /// `Σ_{a≥j} ρ^{-1} B_a v_ρ = v_ρ − O_j`, summed directly to avoid cancellation.
    pub fn offset_complement(&self, j: usize) -> Vec<T> {
        self.scaled[j..]
            .iter()
            .fold(vec![T::zero(); self.dim], |acc, c| {
                vec_add(mat_vec(c, &self.v), &acc)
            })
    }

    /// Same equation with `v_ρ` replaced by `c · v_ρ`; every value scales by `c`.
    pub fn with_eigenvector_scale(&self, c: T) -> Self {
        let mut out = self.clone();
        out.v = self.v.iter().map(|x| x.clone() * c.clone()).collect();
        for o in &mut out.offsets {
            for x in o.iter_mut() {
                *x = x.clone() * c.clone();
            }
        }
        out
    }

    /// `F(.x_1 x_2 ⋯ x_n)` for a finite digit string.
    pub fn eval_digits(&self, digits: &[usize]) -> Vec<T> {
        let mut value = vec![T::zero(); self.dim];
        for &a in digits.iter().rev() {
            value = vec_add(mat_vec(&self.scaled[a], &value), &self.offsets[a]);
        }
        value
    }

    /// `F(m / k^depth)` for `0 ≤ m ≤ k^depth`.
    pub fn eval(&self, m: u64, depth: u32) -> Result<Vec<T>> {
        let top = pow_u64(self.k, depth)?;
        match m.cmp(&top) {
            std::cmp::Ordering::Less => Ok(self.eval_digits(&padded_digits(m, self.k, depth))),
            std::cmp::Ordering::Equal => Ok(self.v.clone()),
            std::cmp::Ordering::Greater => Err(Error::InvalidArgument(format!(
                "{m}/{}^{depth} lies outside [0, 1]",
                self.k
            ))),
        }
    }

    /// `F(numerator / k^depth)` extended by the boundary values; the flag reports clamping.
    pub fn eval_clamped(&self, numerator: i64, depth: u32) -> Result<(Vec<T>, bool)> {
        if numerator < 0 {
            return Ok((vec![T::zero(); self.dim], true));
        }
        let top = pow_u64(self.k, depth)?;
        if numerator as u64 > top {
            return Ok((self.v.clone(), true));
        }
        Ok((self.eval(numerator as u64, depth)?, false))
    }

    /// Exact values on the grid `m / k^depth`, `m = 0..=k^depth`.
    pub fn sample(&self, depth: u32) -> Result<CurveSample<T>> {
        self.sample_with_limit(depth, DEFAULT_MAX_DEPTH)
    }

    pub fn sample_with_limit(&self, depth: u32, max_depth: u32) -> Result<CurveSample<T>> {
        if depth > max_depth {
            return Err(Error::ResourceLimit(format!(
                "sample depth {depth} exceeds {max_depth}"
            )));
        }
        let top = pow_u64(self.k, depth)?;
        if top >= MAX_POINTS {
            return Err(Error::ResourceLimit(format!("{top} grid points requested")));
        }
        let mut values = vec![vec![T::zero(); self.dim], self.v.clone()];
        let k = self.k as usize;
        for _ in 0..depth {
            let prev = &values;
            let span = prev.len() - 1;
            let mut next: Vec<Vec<T>> = (0..k * span)
                .into_par_iter()
                .map(|idx| {
                    let (j, m) = (idx / span, idx % span);
                    vec_add(mat_vec(&self.scaled[j], &prev[m]), &self.offsets[j])
                })
                .collect();
            next.push(self.v.clone());
            values = next;
        }
        Ok(CurveSample {
            k: self.k,
            depth,
            values,
        })
    }

    /// `max_x ‖F(x) − Σ_a C_a F(kx − a)‖_∞` over a sample, with the right side read
    /// from the sample itself and extended by the boundary values.
    pub fn refinement_residual(&self, sample: &CurveSample<T>) -> Result<T> {
        if sample.depth < 1 {
            return Err(Error::InvalidArgument(
                "residual needs sample depth >= 1".into(),
            ));
        }
        let k = self.k as usize;
        let span = sample.values.len() - 1;
        let coarse = span / k;
        let residual = (0..=span)
            .into_par_iter()
            .map(|m| {
                let mut rhs = vec![T::zero(); self.dim];
                for a in 0..k {
                    // k·x − a on the same grid is (m − a·k^{n−1}) / k^{n−1}.
                    let arg = m as i64 - (a * coarse) as i64;
                    let value = if arg <= 0 {
                        continue;
                    } else if arg as usize >= coarse {
                        self.v.clone()
                    } else {
                        sample.values[arg as usize * k].clone()
                    };
                    rhs = vec_add(mat_vec(&self.scaled[a], &value), &rhs);
                }
                sample.values[m]
                    .iter()
                    .zip(&rhs)
                    .map(|(x, y)| (x.clone() - y.clone()).abs())
                    .fold(T::zero(), |acc, e| if e > acc { e } else { acc })
            })
            .reduce(T::zero, |a, b| if b > a { b } else { a });
        Ok(residual)
    }

    pub fn build_ifs(&self) -> IfsSystem<T> {
        let k = self.k;
        let d = self.dim;
        let inv_k = T::one() / lift::<T>(k);
        let maps = (0..k as usize)
            .map(|j| {
                let mut linear = vec![vec![T::zero(); d + 1]; d + 1];
                linear[0][0] = inv_k.clone();
                for r in 0..d {
                    for c in 0..d {
                        linear[r + 1][c + 1] = self.scaled[j][r * d + c].clone();
                    }
                }
                let mut offset = Vec::with_capacity(d + 1);
                offset.push(lift::<T>(j as u64) / lift::<T>(k));
                offset.extend(self.offsets[j].iter().cloned());
                AffineMap { linear, offset }
            })
            .collect();
        IfsSystem {
            k,
            dim: d,
            maps,
            v: self.v.clone(),
        }
    }
}

/// Exact values of `F` on the depth-`n` k-adic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSample<T> {
    k: u64,
    depth: u32,
    values: Vec<Vec<T>>,
}

impl<T: Scalar> CurveSample<T> {
    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// `F(m / k^depth)` for `m = 0..=k^depth`.
    pub fn values(&self) -> &[Vec<T>] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Vec<T>] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Grid abscissa as `(numerator, depth)`.
    pub fn x(&self, index: usize) -> (u64, u32) {
        (index as u64, self.depth)
    }

    pub fn x_f64(&self, index: usize) -> f64 {
        index as f64 / (self.values.len() - 1) as f64
    }
}

/// `y ↦ linear · y + offset` on `R^{d+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap<T> {
    pub linear: Vec<Vec<T>>,
    pub offset: Vec<T>,
}

impl<T: Scalar> AffineMap<T> {
    pub fn apply(&self, point: &[T]) -> Vec<T> {
        self.linear
            .iter()
            .zip(&self.offset)
            .map(|(row, b)| {
                row.iter()
                    .zip(point)
                    .fold(b.clone(), |acc, (a, y)| acc + a.clone() * y.clone())
            })
            .collect()
    }
}

/// Polyline in `R^{d+1}`; coordinate 0 is the abscissa.
pub type Polyline<T> = Vec<Vec<T>>;

/// The `k` maps `S_j(x, y) = (x/k + j/k, ρ^{-1} B_j y + O_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IfsSystem<T> {
    k: u64,
    dim: usize,
    maps: Vec<AffineMap<T>>,
    v: Vec<T>,
}

impl<T: Scalar> IfsSystem<T> {
    pub fn maps(&self) -> &[AffineMap<T>] {
        &self.maps
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn v_rho(&self) -> &[T] {
        &self.v
    }

    /// Operator norms of the `ρ^{-1} B_j` blocks. All below 1 means each map
    /// contracts in the Euclidean norm; otherwise contraction holds only in an
    /// adapted norm (guaranteed by `ρ > ρ*`).
    pub fn contraction_factors(&self) -> Vec<f64> {
        let d = self.dim;
        self.maps
            .iter()
            .map(|m| {
                let rows: Vec<Vec<f64>> = (0..d)
                    .map(|r| (0..d).map(|c| m.linear[r + 1][c + 1].as_f64()).collect())
                    .collect();
                operator_norm(&crate::matrix::Mat::from_rows(&rows))
            })
            .collect()
    }

    /// Segment from `(0, 0)` to `(1, v_ρ)`.
    pub fn default_seed(&self) -> Polyline<T> {
        let mut start = vec![T::zero(); self.dim + 1];
        start[0] = T::zero();
        let mut end = vec![T::one()];
        end.extend(self.v.iter().cloned());
        vec![start, end]
    }

    /// Apply every map to the polyline `iterations` times, concatenating the
    /// images in x-order and merging coincident joints.
    pub fn iterate(&self, seed: &Polyline<T>, iterations: u32) -> Result<Polyline<T>> {
        self.iterate_with_budget(seed, iterations, MAX_POINTS)
    }

    pub fn iterate_with_budget(
        &self,
        seed: &Polyline<T>,
        iterations: u32,
        budget: u64,
    ) -> Result<Polyline<T>> {
        if seed.is_empty() {
            return Err(Error::InvalidArgument("IFS seed polyline is empty".into()));
        }
        let pieces = pow_u64(self.k, iterations)?
            .checked_mul(seed.len() as u64)
            .filter(|&p| p <= budget)
            .ok_or_else(|| {
                Error::ResourceLimit(format!(
                    "{iterations} IFS iterations exceed the vertex budget"
                ))
            })?;
        let mut current = seed.clone();
        for _ in 0..iterations {
            let images: Vec<Polyline<T>> = self
                .maps
                .par_iter()
                .map(|map| current.iter().map(|p| map.apply(p)).collect())
                .collect();
            let mut next: Polyline<T> = Vec::with_capacity(current.len() * self.maps.len());
            for image in images {
                for p in image {
                    let joint = next
                        .last()
                        .is_some_and(|q: &Vec<T>| q.iter().zip(&p).all(|(a, b)| a.approx_eq(b)));
                    if !joint {
                        next.push(p);
                    }
                }
            }
            current = next;
        }
        debug_assert!(current.len() as u64 <= pieces);
        Ok(current)
    }
}

/// Coordinate-wise `[min, max]` of a set of points.
pub fn bounding_box(points: &[Vec<f64>]) -> Vec<(f64, f64)> {
    let Some(first) = points.first() else {
        return Vec::new();
    };
    let mut bbox: Vec<(f64, f64)> = first.iter().map(|&x| (x, x)).collect();
    for p in points {
        for (b, &x) in bbox.iter_mut().zip(p) {
            b.0 = b.0.min(x);
            b.1 = b.1.max(x);
        }
    }
    bbox
}

/// `max_x ‖P(x) − F(x)‖_∞` over the depth-`grid_depth` k-adic grid, where `P`
/// is the piecewise-linear interpolant of a polyline sorted by abscissa.
pub fn polyline_error(
    polyline: &Polyline<f64>,
    dilation: &Dilation<f64>,
    grid_depth: u32,
) -> Result<f64> {
    let sample = dilation.sample_with_limit(grid_depth, 24)?;
    let xs: Vec<f64> = polyline.iter().map(|p| p[0]).collect();
    let error = sample
        .values()
        .par_iter()
        .enumerate()
        .map(|(m, f)| {
            let x = sample.x_f64(m);
            let i = xs.partition_point(|&t| t <= x).clamp(1, xs.len() - 1);
            let (x0, x1) = (xs[i - 1], xs[i]);
            let t = if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.0 };
            f.iter()
                .enumerate()
                .map(|(c, fc)| {
                    let y = polyline[i - 1][c + 1] * (1.0 - t) + polyline[i][c + 1] * t;
                    (y - fc).abs()
                })
                .fold(0.0_f64, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Ok(error)
}

/// Exact or floating solution, chosen per representation.
#[derive(Debug, Clone)]
pub enum Model {
    Exact(Dilation<BigRational>),
    Float(Dilation<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Exact when `ρ` is rational and `d ≤ 2`.
    #[default]
    Auto,
    Exact,
    Float,
}

impl Model {
    pub fn build(rep: &LinearRep, mode: Mode, cfg: JsrConfig) -> Result<Self> {
        match mode {
            Mode::Float => Dilation::float(rep, cfg).map(Model::Float),
            Mode::Exact => Dilation::exact(rep, cfg).map(Model::Exact),
            Mode::Auto => {
                if exact_eigenpair(&rep.sum_matrix()).is_some() {
                    Dilation::exact(rep, cfg).map(Model::Exact)
                } else {
                    Dilation::float(rep, cfg).map(Model::Float)
                }
            }
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Model::Exact(_))
    }
}

/// `ρ^n` as an integer when `ρ` is, for partial-sum identities in tests and tools.
pub fn integer_power(rho: &BigRational, n: u32) -> Option<BigUint> {
    rho.is_integer()
        .then(|| rho.to_integer().to_biguint())
        .flatten()
        .map(|r| r.pow(n))
}
