//! Spectral quantities of digit-matrix families.
//!
//! Everything here works on tiny dense matrices. For `d ≤ 2` eigenvalues and
//! singular values come from closed forms; larger matrices use shifted power
//! iteration for the Perron pair and `nalgebra` for the remaining spectrum.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linrep::LinearRep;
use crate::matrix::Mat;

/// Dominance is certified only when `|λ₂| / ρ` stays below this.
pub const GAP_THRESHOLD: f64 = 1.0 - 1e-9;

const POWER_TOL: f64 = 1e-13;
/// Relative slack when comparing ρ against the joint spectral radius bounds.
pub const RELATIVE_TOL: f64 = 1e-12;
const POWER_MAX_ITER: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominantEigen {
    pub rho: f64,
    /// Right Perron vector, entries sum to 1.
    pub v_rho: Vec<f64>,
    /// `|λ₂| / ρ`.
    pub gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JsrBounds {
    pub lower: f64,
    pub upper: f64,
    /// Longest product length fully enumerated.
    pub depth: u32,
    /// Set when the product budget stopped enumeration before the requested depth.
    pub truncated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JsrConfig {
    pub depth: u32,
    /// Maximum number of products formed across all levels.
    pub budget: usize,
}

impl Default for JsrConfig {
    fn default() -> Self {
        JsrConfig {
            depth: 12,
            budget: 1 << 20,
        }
    }
}

/// The two sides of the strong arithmetic-geometric mean criterion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AgmTerms {
    pub rho_over_k: f64,
    /// `Π_j ‖B_j‖^{1/k}`.
    pub geometric_mean: f64,
}

impl AgmTerms {
    pub fn margin(&self) -> f64 {
        self.rho_over_k - self.geometric_mean
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LyapunovEstimate {
    /// `None` when some sampled product vanished (exponent is −∞).
    pub mean: Option<f64>,
    pub stderr: f64,
    pub trials: usize,
    pub length: usize,
    pub seed: u64,
}

/// ρ(B) together with the hypotheses ρ(B) > ρ* that the dilation machinery needs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub eigen: DominantEigen,
    pub jsr: JsrBounds,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralReport {
    pub rho: f64,
    pub gap: f64,
    pub v_rho: Vec<f64>,
    pub jsr: JsrBounds,
    pub agm_margin: f64,
    /// `None` when ρ > ρ* could not be certified.
    pub holder_bound: Option<f64>,
}

/// Largest eigenvalue modulus of an arbitrary real square matrix.
pub fn spectral_radius(m: &Mat) -> f64 {
    match m.dim() {
        1 => m.get(0, 0).abs(),
        2 => {
            let (a, b, c, d) = (m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1));
            let tr = a + d;
            let det = a * d - b * c;
            let disc = (a - d) * (a - d) + 4.0 * b * c;
            if disc >= 0.0 {
                let s = disc.sqrt();
                (tr.abs() + s) / 2.0
            } else {
                det.abs().sqrt()
            }
        }
        _ => m
            .to_nalgebra()
            .complex_eigenvalues()
            .iter()
            .fold(0.0, |acc, z| acc.max(z.norm())),
    }
}

/// Largest singular value.
pub fn operator_norm(m: &Mat) -> f64 {
    match m.dim() {
        1 => m.get(0, 0).abs(),
        2 => {
            let (a, b, c, d) = (m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1));
            ((a + d).hypot(b - c) + (a - d).hypot(b + c)) / 2.0
        }
        _ => m
            .to_nalgebra()
            .singular_values()
            .iter()
            .fold(0.0_f64, |acc, &s| acc.max(s)),
    }
}

fn check_primitive(b: &Mat) -> Result<()> {
    let d = b.dim();
    if (0..d).any(|i| (0..d).any(|j| b.get(i, j) < 0.0)) {
        return Err(Error::InvalidArgument("matrix has negative entries".into()));
    }
    // Wielandt: a primitive d×d matrix has a positive power at or below (d-1)^2 + 1.
    let limit = (d - 1) * (d - 1) + 1;
    let pattern: Vec<bool> = (0..d * d).map(|p| b.get(p / d, p % d) > 0.0).collect();
    let mut power = pattern.clone();
    for _ in 1..limit {
        if power.iter().all(|&x| x) {
            return Ok(());
        }
        let mut next = vec![false; d * d];
        for i in 0..d {
            for j in 0..d {
                next[i * d + j] = (0..d).any(|l| power[i * d + l] && pattern[l * d + j]);
            }
        }
        power = next;
    }
    if power.iter().all(|&x| x) {
        Ok(())
    } else {
        Err(Error::ReducibleMatrix { checked: limit })
    }
}

/// Perron root, normalized Perron vector and dominance ratio of a primitive matrix.
pub fn dominant_eigenpair(b: &Mat) -> Result<DominantEigen> {
    check_primitive(b)?;
    let eigen = match b.dim() {
        1 => DominantEigen {
            rho: b.get(0, 0),
            v_rho: vec![1.0],
            gap: 0.0,
        },
        2 => {
            let (a, c01, c10, d) = (b.get(0, 0), b.get(0, 1), b.get(1, 0), b.get(1, 1));
            let disc = (a - d) * (a - d) + 4.0 * c01 * c10;
            let rho = (a + d + disc.sqrt()) / 2.0;
            let lambda2 = (a * d - c01 * c10) / rho;
            // Primitivity forces the off-diagonal entries to be positive.
            let v = [c01, rho - a];
            let s = v[0] + v[1];
            DominantEigen {
                rho,
                v_rho: vec![v[0] / s, v[1] / s],
                gap: lambda2.abs() / rho,
            }
        }
        _ => power_iteration(b)?,
    };
    if eigen.gap >= GAP_THRESHOLD {
        return Err(Error::DominanceNotCertified { gap: eigen.gap });
    }
    Ok(eigen)
}

fn power_iteration(b: &Mat) -> Result<DominantEigen> {
    let d = b.dim();
    // The shift makes the iteration matrix aperiodic without moving eigenvectors.
    let shift = b.max_abs().max(1.0);
    let shifted = b.add(&Mat::identity(d).scale(shift));
    let mut v = vec![1.0 / d as f64; d];
    let mut converged = false;
    for _ in 0..POWER_MAX_ITER {
        let mut next = shifted.mul_vec(&v);
        let s: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= s);
        let delta = next
            .iter()
            .zip(&v)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        v = next;
        if delta < POWER_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::ResourceLimit(
            "power iteration did not converge".into(),
        ));
    }
    let bv = b.mul_vec(&v);
    let rho = bv.iter().sum::<f64>() / v.iter().sum::<f64>();
    // Drop the Perron root from the full spectrum; the largest remaining modulus is |λ₂|.
    let mut moduli: Vec<(f64, f64)> = b
        .to_nalgebra()
        .complex_eigenvalues()
        .iter()
        .map(|z| ((z.re - rho).hypot(z.im), z.norm()))
        .collect();
    moduli.sort_by(|x, y| x.0.total_cmp(&y.0));
    let second = moduli[1..].iter().fold(0.0_f64, |m, &(_, r)| m.max(r));
    Ok(DominantEigen {
        rho,
        v_rho: v,
        gap: second / rho,
    })
}

/// Bounds on the joint spectral radius from products of length at most `cfg.depth`.
///
/// `lower` is the best `ρ(P)^{1/n}` and `upper` the best `max ‖P‖^{1/n}` over
/// the completed lengths `n`.
pub fn jsr_bounds(family: &[Mat], cfg: JsrConfig) -> Result<JsrBounds> {
    if family.is_empty() {
        return Err(Error::InvalidArgument("empty matrix family".into()));
    }
    if cfg.depth < 1 {
        return Err(Error::InvalidArgument(
            "JSR depth must be at least 1".into(),
        ));
    }
    let mut lower = 0.0_f64;
    let mut upper = f64::INFINITY;
    let mut level: Vec<Mat> = family.to_vec();
    let mut used = level.len();
    let mut depth = 0;
    for n in 1..=cfg.depth {
        if n > 1 {
            let next_len = level.len().saturating_mul(family.len());
            if used.saturating_add(next_len) > cfg.budget {
                return Ok(JsrBounds {
                    lower,
                    upper,
                    depth,
                    truncated: true,
                });
            }
            level = level
                .par_iter()
                .flat_map_iter(|p| family.iter().map(move |b| p.mul(b)))
                .collect();
            used += level.len();
        }
        let inv = 1.0 / n as f64;
        let (rho_max, norm_max) = level
            .par_iter()
            .map(|p| (spectral_radius(p), operator_norm(p)))
            .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
        lower = lower.max(rho_max.powf(inv));
        upper = upper.min(norm_max.powf(inv));
        depth = n;
    }
    Ok(JsrBounds {
        lower,
        upper,
        depth,
        truncated: false,
    })
}

/// Digit matrices of a representation as floating matrices.
pub fn family_of(rep: &LinearRep) -> Vec<Mat> {
    rep.digit_matrices().iter().map(|b| b.to_f64()).collect()
}

/// Exact-as-possible `k`-th root: `powf` followed by one Newton step.
fn kth_root(x: f64, k: usize) -> f64 {
    if x == 0.0 || k == 1 {
        return x;
    }
    let g = x.powf(1.0 / k as f64);
    let gk1 = g.powi(k as i32 - 1);
    g - (gk1 * g - x) / (k as f64 * gk1)
}

/// `Π_j ‖B_j‖^{1/k}` and `ρ / k` for an arbitrary family and its sum's Perron root.
pub fn agm_terms_of(family: &[Mat], rho: f64) -> AgmTerms {
    let k = family.len();
    let product: f64 = family.iter().map(operator_norm).product();
    AgmTerms {
        rho_over_k: rho / k as f64,
        geometric_mean: kth_root(product, k),
    }
}

pub fn agm_terms(rep: &LinearRep) -> Result<AgmTerms> {
    let eigen = dominant_eigenpair(&rep.sum_matrix().to_f64())?;
    Ok(agm_terms_of(&family_of(rep), eigen.rho))
}

/// `ρ/k − Π_j ‖B_j‖^{1/k}`; positive values meet the singularity criterion.
pub fn agm_margin(rep: &LinearRep) -> Result<f64> {
    agm_terms(rep).map(|t| t.margin())
}

/// Check ρ(B) is a certified simple dominant eigenvalue and exceeds the JSR upper bound.
pub fn certify(rep: &LinearRep, cfg: JsrConfig) -> Result<Certificate> {
    let eigen = dominant_eigenpair(&rep.sum_matrix().to_f64())?;
    let jsr = jsr_bounds(&family_of(rep), cfg)?;
    // Products of a single dominant digit reproduce ρ only up to rounding in `powf`.
    if jsr.upper >= eigen.rho * (1.0 - RELATIVE_TOL) {
        return Err(Error::HypothesisViolated(format!(
            "rho = {} does not exceed the joint spectral radius bound {} (depth {})",
            eigen.rho, jsr.upper, jsr.depth
        )));
    }
    Ok(Certificate { eigen, jsr })
}

/// `log_k(ρ / ρ*_upper)`, a lower bound for the supremum of admissible Hölder exponents.
pub fn holder_bound(rep: &LinearRep, cfg: JsrConfig) -> Result<f64> {
    let cert = certify(rep, cfg)?;
    Ok((cert.eigen.rho / cert.jsr.upper).ln() / (rep.k() as f64).ln())
}

/// Deterministic generator for stream `stream` of run `seed`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `log ‖B_{i_{n-1}} ⋯ B_{i_0}‖` for a random digit string, or `None` if the product vanishes.
pub(crate) fn random_log_norm(family: &[Mat], length: usize, rng: &mut ChaCha8Rng) -> Option<f64> {
    let d = family[0].dim();
    let mut product = Mat::identity(d);
    let mut log_scale = 0.0;
    for _ in 0..length {
        let b = &family[rng.gen_range(0..family.len())];
        product = b.mul(&product);
        let scale = product.max_abs();
        if scale == 0.0 {
            return None;
        }
        log_scale += scale.ln();
        product = product.scale(1.0 / scale);
    }
    Some(log_scale + operator_norm(&product).ln())
}

/// Monte Carlo estimate of the top Lyapunov exponent under uniform i.i.d. digits.
pub fn lyapunov_estimate(
    family: &[Mat],
    trials: usize,
    length: usize,
    seed: u64,
) -> Result<LyapunovEstimate> {
    if family.is_empty() || trials < 1 || length < 1 {
        return Err(Error::InvalidArgument(
            "Lyapunov estimate needs a nonempty family, trials >= 1 and length >= 1".into(),
        ));
    }
    let samples: Vec<Option<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_for(seed, t as u64);
            random_log_norm(family, length, &mut rng).map(|l| l / length as f64)
        })
        .collect();
    let Some(values) = samples.into_iter().collect::<Option<Vec<f64>>>() else {
        return Ok(LyapunovEstimate {
            mean: None,
            stderr: 0.0,
            trials,
            length,
            seed,
        });
    };
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let stderr = if values.len() > 1 {
        let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok(LyapunovEstimate {
        mean: Some(mean),
        stderr,
        trials,
        length,
        seed,
    })
}

pub fn spectral_report(rep: &LinearRep, cfg: JsrConfig) -> Result<SpectralReport> {
    let eigen = dominant_eigenpair(&rep.sum_matrix().to_f64())?;
    let family = family_of(rep);
    let jsr = jsr_bounds(&family, cfg)?;
    let agm = agm_terms_of(&family, eigen.rho);
    let holder_bound = (jsr.upper < eigen.rho * (1.0 - RELATIVE_TOL))
        .then(|| (eigen.rho / jsr.upper).ln() / (rep.k() as f64).ln());
    Ok(SpectralReport {
        rho: eigen.rho,
        gap: eigen.gap,
        v_rho: eigen.v_rho,
        jsr,
        agm_margin: agm.margin(),
        holder_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{salem, stern, zaremba};
    use approx::assert_relative_eq;

    fn m(rows: &[&[f64]]) -> Mat {
        Mat::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
    }

    #[test]
    fn eigenpair_examples() {
        let e = dominant_eigenpair(&m(&[&[3.0, 2.0], &[2.0, 0.0]])).unwrap();
        assert_eq!(e.rho, 4.0);
        assert_relative_eq!(e.v_rho[0], 2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(e.v_rho[1], 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(e.gap, 0.25, epsilon = 1e-15);

        let e = dominant_eigenpair(&Mat::scalar(5.0)).unwrap();
        assert_eq!((e.rho, e.v_rho.clone(), e.gap), (5.0, vec![1.0], 0.0));

        let e = dominant_eigenpair(&m(&[&[2.0, 1.0], &[1.0, 2.0]])).unwrap();
        assert_relative_eq!(e.rho, 3.0, epsilon = 1e-15);
        assert_relative_eq!(e.v_rho[0], 0.5, epsilon = 1e-15);
        assert_relative_eq!(e.gap, 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn eigenpair_rejects_reducible_and_periodic() {
        let triangular = m(&[&[1.0, 0.0], &[1.0, 1.0]]);
        assert!(matches!(
            dominant_eigenpair(&triangular),
            Err(Error::ReducibleMatrix { .. })
        ));
        // Irreducible with period 2: some power never becomes positive.
        let swap = m(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert!(matches!(
            dominant_eigenpair(&swap),
            Err(Error::ReducibleMatrix { .. })
        ));
    }

    #[test]
    fn power_iteration_matches_closed_form_on_embedded_problem() {
        // Block-free 3x3 with known spectrum: J - I + 2I has eigenvalues 4, 1, 1.
        let b = m(&[&[2.0, 1.0, 1.0], &[1.0, 2.0, 1.0], &[1.0, 1.0, 2.0]]);
        let e = dominant_eigenpair(&b).unwrap();
        assert_relative_eq!(e.rho, 4.0, epsilon = 1e-11);
        for x in &e.v_rho {
            assert_relative_eq!(*x, 1.0 / 3.0, epsilon = 1e-11);
        }
        assert_relative_eq!(e.gap, 0.25, epsilon = 1e-9);
        let bv = b.mul_vec(&e.v_rho);
        for (a, v) in bv.iter().zip(&e.v_rho) {
            assert!((a - e.rho * v).abs() <= 1e-12 * e.rho);
        }
    }

    #[test]
    fn operator_norm_examples() {
        assert_eq!(operator_norm(&m(&[&[1.0, 1.0], &[1.0, 1.0]])), 2.0);
        assert_relative_eq!(
            operator_norm(&m(&[&[2.0, 1.0], &[1.0, 0.0]])),
            1.0 + 2f64.sqrt(),
            max_relative = 1e-12
        );
        assert_eq!(operator_norm(&Mat::identity(2)), 1.0);
        assert_relative_eq!(operator_norm(&Mat::identity(4)), 1.0, max_relative = 1e-12);
        // Non-normal: singular values of [[1,1],[0,1]] are φ and 1/φ.
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert_relative_eq!(
            operator_norm(&m(&[&[1.0, 1.0], &[0.0, 1.0]])),
            phi,
            max_relative = 1e-12
        );
    }

    #[test]
    fn jsr_single_matrix() {
        let b = m(&[&[2.0, 1.0], &[1.0, 1.0]]);
        let rho = spectral_radius(&b);
        let j = jsr_bounds(
            &[b],
            JsrConfig {
                depth: 6,
                budget: 1 << 20,
            },
        )
        .unwrap();
        assert_relative_eq!(j.lower, rho, max_relative = 1e-12);
        assert!(j.upper >= rho - 1e-12);
    }

    #[test]
    fn jsr_stern_pair() {
        let fam = family_of(&stern());
        let j = jsr_bounds(
            &fam,
            JsrConfig {
                depth: 8,
                budget: 1 << 20,
            },
        )
        .unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!(j.lower >= phi - 1e-12, "lower {}", j.lower);
        assert!(j.lower <= j.upper);
    }

    #[test]
    fn jsr_zaremba_pair() {
        let fam = family_of(&zaremba(2).unwrap());
        let j = jsr_bounds(
            &fam,
            JsrConfig {
                depth: 8,
                budget: 1 << 20,
            },
        )
        .unwrap();
        assert!(j.lower >= 1.0 + 2f64.sqrt() - 1e-12);
        assert!(j.upper < 4.0);
    }

    #[test]
    fn jsr_budget_truncates() {
        let fam = family_of(&zaremba(4).unwrap());
        let j = jsr_bounds(
            &fam,
            JsrConfig {
                depth: 12,
                budget: 100,
            },
        )
        .unwrap();
        assert!(j.truncated);
        assert_eq!(j.depth, 3);
        assert!(jsr_bounds(&[], JsrConfig::default()).is_err());
    }

    #[test]
    fn agm_examples() {
        let t = agm_terms(&zaremba(2).unwrap()).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert_relative_eq!(
            t.geometric_mean,
            (phi * (1.0 + 2f64.sqrt())).sqrt(),
            epsilon = 1e-12
        );
        assert_relative_eq!(t.margin(), 0.023568974130229847, epsilon = 1e-12);
        assert!(t.margin() > 0.0);

        let fam = [
            m(&[&[1.0, 1.0], &[1.0, 1.0]]),
            m(&[&[2.0, 1.0], &[1.0, 1.0]]),
        ];
        let rho = dominant_eigenpair(&fam[0].add(&fam[1])).unwrap().rho;
        let t = agm_terms_of(&fam, rho);
        assert_relative_eq!(t.rho_over_k, (5.0 + 17f64.sqrt()) / 4.0, epsilon = 1e-12);
        assert_relative_eq!(
            t.geometric_mean,
            (3.0 + 5f64.sqrt()).sqrt(),
            epsilon = 1e-12
        );
        assert!(t.margin() < 0.0);

        for c in 1..6 {
            assert_eq!(agm_margin(&salem(&[c, c]).unwrap()).unwrap(), 0.0);
            assert_eq!(agm_margin(&salem(&[c, c, c]).unwrap()).unwrap(), 0.0);
        }
    }

    #[test]
    fn holder_examples() {
        let cfg = JsrConfig::default();
        assert_relative_eq!(
            holder_bound(&salem(&[2, 3]).unwrap(), cfg).unwrap(),
            (5.0f64 / 3.0).log2(),
            epsilon = 1e-12
        );
        assert_relative_eq!(
            holder_bound(&salem(&[1, 1]).unwrap(), cfg).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        let z = holder_bound(&zaremba(2).unwrap(), cfg).unwrap();
        assert!(z > 0.0 && z <= (4.0 / (1.0 + 2f64.sqrt())).log2() + 1e-12);
    }

    #[test]
    fn holder_rejects_when_jsr_reaches_rho() {
        // One digit carries all the mass: ρ(B) = ρ(B_1) = ρ*.
        let rep = salem(&[0, 4]).unwrap();
        assert!(matches!(
            holder_bound(&rep, JsrConfig::default()),
            Err(Error::HypothesisViolated(_))
        ));
    }

    #[test]
    fn lyapunov_examples() {
        let fam = [Mat::scalar(2.0), Mat::scalar(3.0)];
        let est = lyapunov_estimate(&fam, 400, 400, 0).unwrap();
        let target = 6f64.sqrt().ln();
        assert!((est.mean.unwrap() - target).abs() < 4.0 * est.stderr + 1e-3);

        let single = lyapunov_estimate(&[Mat::scalar(7.0)], 3, 5, 9).unwrap();
        assert_relative_eq!(single.mean.unwrap(), 7f64.ln(), epsilon = 1e-14);

        let b = m(&[&[2.0, 1.0], &[1.0, 1.0]]);
        let est = lyapunov_estimate(std::slice::from_ref(&b), 2, 2000, 1).unwrap();
        assert_relative_eq!(est.mean.unwrap(), spectral_radius(&b).ln(), epsilon = 1e-3);

        let zero = lyapunov_estimate(&[Mat::scalar(0.0), Mat::scalar(1.0)], 4, 50, 0).unwrap();
        assert_eq!(zero.mean, None);
    }

    #[test]
    fn lyapunov_is_deterministic_per_seed() {
        let fam = family_of(&zaremba(2).unwrap());
        let a = lyapunov_estimate(&fam, 16, 64, 5).unwrap();
        let b = lyapunov_estimate(&fam, 16, 64, 5).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, lyapunov_estimate(&fam, 16, 64, 6).unwrap());
    }
}
