//! Linear representations of k-regular sequences.
//!
//! A representation is a radix `k`, a nonnegative row vector `w` and `k`
//! nonnegative digit matrices `B_0..B_{k-1}`. The value at `m` with base-k
//! expansion `i_s ... i_1 i_0` (most significant first) is
//! `w · B_{i_s} ⋯ B_{i_0} · e_1`, and the whole row vector `w · B_{(m)_k}`
//! holds the values of every kernel-basis sequence at `m`. The empty
//! expansion of `m = 0` gives `w · e_1`.

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{row_times, IntMatrix};

/// Largest block the enumerating helpers will materialize.
pub const MAX_BLOCK_LEN: u64 = 1 << 24;

/// Base-k expansion of a nonnegative integer, most significant digit first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitString {
    radix: u64,
    digits: Vec<u64>,
}

impl DigitString {
    pub fn radix(&self) -> u64 {
        self.radix
    }

    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// Positional reassembly `Σ digit · k^position`.
    pub fn value(&self) -> BigUint {
        self.digits
            .iter()
            .fold(BigUint::zero(), |acc, &d| acc * self.radix + d)
    }
}

pub fn digits_of(mut m: u64, k: u64) -> Result<DigitString> {
    if k < 2 {
        return Err(Error::InvalidRadix(k));
    }
    let mut digits = Vec::new();
    while m > 0 {
        digits.push(m % k);
        m /= k;
    }
    digits.reverse();
    Ok(DigitString { radix: k, digits })
}

/// The `n` least significant base-k digits of `m`, zero padded, most significant first.
pub(crate) fn padded_digits(mut m: u64, k: u64, n: u32) -> Vec<usize> {
    let mut out = vec![0usize; n as usize];
    for slot in out.iter_mut().rev() {
        *slot = (m % k) as usize;
        m /= k;
    }
    out
}

/// Which entry of `B` broke positivity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrimitivityWitness {
    /// Zero-based position of a zero entry of the sum matrix.
    ZeroEntry { row: usize, col: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Primitivity {
    pub primitive: bool,
    pub witness: Option<PrimitivityWitness>,
}

/// On-disk JSON shape: `{"k": int, "w": [int...], "digits": [[[int...]...]...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RepresentationFile {
    pub k: i64,
    pub w: Vec<i64>,
    pub digits: Vec<Vec<Vec<i64>>>,
}

/// Linear representation of a k-regular sequence with nonnegative digit matrices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearRep {
    k: u64,
    w: Vec<u64>,
    digits: Vec<IntMatrix>,
}

impl LinearRep {
    pub fn new(k: u64, w: Vec<u64>, digits: Vec<IntMatrix>) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidRadix(k));
        }
        if digits.len() as u64 != k {
            return Err(Error::InvalidRepresentation(format!(
                "expected {k} digit matrices, got {}",
                digits.len()
            )));
        }
        let d = w.len();
        if d == 0 {
            return Err(Error::InvalidRepresentation("w is empty".into()));
        }
        if let Some(a) = digits.iter().position(|b| b.dim() != d) {
            return Err(Error::InvalidRepresentation(format!(
                "digit matrix {a} is {0}x{0}, expected {d}x{d}",
                digits[a].dim()
            )));
        }
        if w.iter().all(|&x| x == 0) {
            return Err(Error::InvalidRepresentation(
                "w has no nonzero entry".into(),
            ));
        }
        Ok(LinearRep { k, w, digits })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RepresentationFile = serde_json::from_str(text)?;
        Self::try_from(raw)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("representation serializes")
    }

    pub fn to_file(&self) -> RepresentationFile {
        RepresentationFile {
            k: self.k as i64,
            w: self.w.iter().map(|&x| x as i64).collect(),
            digits: self
                .digits
                .iter()
                .map(|b| {
                    b.rows()
                        .into_iter()
                        .map(|r| r.into_iter().map(|x| x as i64).collect())
                        .collect()
                })
                .collect(),
        }
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    pub fn w(&self) -> &[u64] {
        &self.w
    }

    pub fn digit_matrices(&self) -> &[IntMatrix] {
        &self.digits
    }

    pub fn digit(&self, a: usize) -> &IntMatrix {
        &self.digits[a]
    }

    /// Same digit matrices with a different row vector.
    pub fn with_weight(&self, w: Vec<u64>) -> Result<Self> {
        Self::new(self.k, w, self.digits.clone())
    }

    /// Row vector `w · B_{(m)_k}`: the values of all kernel-basis sequences at `m`.
    pub fn eval_kernel_vector(&self, m: u64) -> Vec<BigUint> {
        let expansion = digits_of(m, self.k).expect("radix validated at construction");
        let mut row: Vec<BigUint> = self.w.iter().map(|&x| BigUint::from(x)).collect();
        for &a in expansion.digits() {
            row = row_times(&row, &self.digits[a as usize]);
        }
        row
    }

    pub fn eval_f(&self, m: u64) -> BigUint {
        self.eval_kernel_vector(m).swap_remove(0)
    }

    /// `B = Σ_a B_a`.
    pub fn sum_matrix(&self) -> IntMatrix {
        let mut acc = IntMatrix::zeros(self.dim());
        for b in &self.digits {
            acc = acc.checked_add(b).expect("digit sum fits in u64");
        }
        acc
    }

    /// `Σ(n) = Σ_{m=k^n}^{k^{n+1}-1} f(m)`, computed as `w · (B − B_0) · B^n · e_1`.
    pub fn block_sum(&self, n: u32) -> BigUint {
        self.block_sum_vector(n).swap_remove(0)
    }

    /// All kernel-basis components of the block sum, `w · (B − B_0) · B^n`.
    pub fn block_sum_vector(&self, n: u32) -> Vec<BigUint> {
        let b = self.sum_matrix();
        let leading = b
            .checked_sub(&self.digits[0])
            .expect("B - B_0 is nonnegative");
        let w: Vec<BigUint> = self.w.iter().map(|&x| BigUint::from(x)).collect();
        let mut row = row_times(&w, &leading);
        for _ in 0..n {
            row = row_times(&row, &b);
        }
        row
    }

    /// Kernel vectors `f(m)` for `m` in `[k^n, k^{n+1})`, in increasing order of `m`.
    ///
    /// Built level by level from `f(km + a) = f(m) · B_a`.
    pub fn block_kernel_vectors(&self, n: u32) -> Result<Vec<Vec<BigUint>>> {
        let len = self
            .k
            .checked_pow(n)
            .and_then(|p| p.checked_mul(self.k - 1))
            .filter(|&len| len <= MAX_BLOCK_LEN)
            .ok_or_else(|| {
                Error::ResourceLimit(format!("block {n} in radix {} is too large", self.k))
            })?;
        let w: Vec<BigUint> = self.w.iter().map(|&x| BigUint::from(x)).collect();
        let mut block: Vec<Vec<BigUint>> =
            self.digits[1..].iter().map(|b| row_times(&w, b)).collect();
        for _ in 0..n {
            let mut next = Vec::with_capacity(block.len() * self.k as usize);
            for row in &block {
                for b in &self.digits {
                    next.push(row_times(row, b));
                }
            }
            block = next;
        }
        debug_assert_eq!(block.len() as u64, len);
        Ok(block)
    }

    /// Sequence values `f(m)` over the block `[k^n, k^{n+1})`.
    pub fn block_values(&self, n: u32) -> Result<Vec<BigUint>> {
        Ok(self
            .block_kernel_vectors(n)?
            .into_iter()
            .map(|mut row| row.swap_remove(0))
            .collect())
    }

    /// Nonnegative digit matrices and `w` hold by construction, so primitivity
    /// reduces to strict positivity of `B`.
    pub fn is_primitive(&self) -> Primitivity {
        match self.sum_matrix().first_zero() {
            None => Primitivity {
                primitive: true,
                witness: None,
            },
            Some((row, col)) => Primitivity {
                primitive: false,
                witness: Some(PrimitivityWitness::ZeroEntry { row, col }),
            },
        }
    }

    /// Whether leading zero digits are invisible to evaluation, i.e. `w · B_0 = w`.
    pub fn is_zero_insensitive(&self) -> bool {
        let w: Vec<BigUint> = self.w.iter().map(|&x| BigUint::from(x)).collect();
        row_times(&w, &self.digits[0]) == w
    }

    /// View the sequence as `k^j`-regular: digit `r = Σ a_t k^{j−t}` maps to
    /// `B_{a_1} ⋯ B_{a_j}`.
    ///
    /// Evaluation agrees with `self` at every `m` whose leading base-`k^j`
    /// digit has a full `j`-digit base-k expansion, and at every `m` when the
    /// representation is zero insensitive. Otherwise the padding zeros of a
    /// short leading group contribute extra `B_0` factors.
    pub fn rebase(&self, j: u32) -> Result<LinearRep> {
        if j < 1 {
            return Err(Error::InvalidArgument(
                "rebase power must be at least 1".into(),
            ));
        }
        let radix = self
            .k
            .checked_pow(j)
            .filter(|&r| r <= 1 << 16)
            .ok_or_else(|| Error::ResourceLimit(format!("radix {}^{j} is too large", self.k)))?;
        let mut digits = Vec::with_capacity(radix as usize);
        for r in 0..radix {
            let mut product = IntMatrix::identity(self.dim());
            for a in padded_digits(r, self.k, j) {
                product = product.checked_mul(&self.digits[a])?;
            }
            digits.push(product);
        }
        LinearRep::new(radix, self.w.clone(), digits)
    }
}

impl TryFrom<RepresentationFile> for LinearRep {
    type Error = Error;

    fn try_from(raw: RepresentationFile) -> Result<Self> {
        fn nonneg(x: i64, what: &str) -> Result<u64> {
            u64::try_from(x)
                .map_err(|_| Error::InvalidRepresentation(format!("{what} has negative entry {x}")))
        }
        let k = u64::try_from(raw.k).map_err(|_| Error::InvalidRadix(0))?;
        if k < 2 {
            return Err(Error::InvalidRadix(k));
        }
        let w = raw
            .w
            .iter()
            .map(|&x| nonneg(x, "w"))
            .collect::<Result<Vec<_>>>()?;
        let digits = raw
            .digits
            .iter()
            .enumerate()
            .map(|(a, rows)| {
                let what = format!("digit matrix {a}");
                let rows = rows
                    .iter()
                    .map(|r| {
                        r.iter()
                            .map(|&x| nonneg(x, &what))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                IntMatrix::from_rows(&rows)
            })
            .collect::<Result<Vec<_>>>()?;
        LinearRep::new(k, w, digits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{cantor, salem, salem_classic, stern, zaremba};

    fn big(x: u64) -> BigUint {
        BigUint::from(x)
    }

    #[test]
    fn digits_of_examples() {
        assert_eq!(digits_of(6, 2).unwrap().digits(), &[1, 1, 0]);
        assert_eq!(digits_of(5, 3).unwrap().digits(), &[1, 2]);
        assert!(digits_of(0, 2).unwrap().is_empty());
        assert!(matches!(digits_of(5, 1), Err(Error::InvalidRadix(1))));
    }

    #[test]
    fn eval_examples() {
        assert_eq!(zaremba(2).unwrap().eval_f(1), big(2));
        assert_eq!(zaremba(2).unwrap().eval_f(0), big(1));
        assert_eq!(salem_classic().eval_f(2), big(6));
    }

    #[test]
    fn kernel_vector_examples() {
        let z = zaremba(2).unwrap();
        assert_eq!(z.eval_kernel_vector(2), vec![big(3), big(2)]);
        assert_eq!(z.eval_kernel_vector(0), vec![big(1), big(0)]);
        // (s(3), s(4)) for the Stern sequence 0,1,1,2,1,3,...
        assert_eq!(stern().eval_kernel_vector(3), vec![big(2), big(1)]);
    }

    #[test]
    fn sum_matrix_examples() {
        assert_eq!(
            zaremba(2).unwrap().sum_matrix().rows(),
            vec![vec![3, 2], vec![2, 0]]
        );
        assert_eq!(salem(&[2, 3]).unwrap().sum_matrix().rows(), vec![vec![5]]);
        assert_eq!(stern().sum_matrix().rows(), vec![vec![2, 1], vec![1, 2]]);
    }

    #[test]
    fn block_sum_examples() {
        assert_eq!(salem(&[2, 3]).unwrap().block_sum(1), big(15));
        assert_eq!(zaremba(2).unwrap().block_sum(1), big(8));
        assert_eq!(zaremba(2).unwrap().block_sum(0), big(2));
    }

    #[test]
    fn primitivity_examples() {
        assert!(salem(&[2, 3]).unwrap().is_primitive().primitive);
        assert!(cantor().is_primitive().primitive);
        let z = zaremba(2).unwrap().is_primitive();
        assert!(!z.primitive);
        assert_eq!(
            z.witness,
            Some(PrimitivityWitness::ZeroEntry { row: 1, col: 1 })
        );
    }

    #[test]
    fn rebase_examples() {
        let z = zaremba(2).unwrap();
        assert_eq!(z.rebase(1).unwrap(), z);
        let z2 = z.rebase(2).unwrap();
        assert_eq!(z2.k(), 4);
        assert_eq!(z2.digit(3).rows(), vec![vec![5, 2], vec![2, 1]]);
        assert!(z2.is_primitive().primitive);
        assert!(matches!(z.rebase(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn rebase_of_zero_sensitive_rep_differs_on_short_leading_group() {
        // 1 = "01" in two base-2 digits: the padding zero adds a B_0 factor.
        let z2 = zaremba(2).unwrap().rebase(2).unwrap();
        assert_eq!(z2.eval_f(1), big(3));
        assert_eq!(zaremba(2).unwrap().eval_f(1), big(2));
    }

    #[test]
    fn json_round_trip_and_validation() {
        let z = zaremba(3).unwrap();
        assert_eq!(LinearRep::from_json(&z.to_json()).unwrap(), z);
        let neg = r#"{"k": 2, "w": [1], "digits": [[[1]], [[-2]]]}"#;
        assert!(matches!(
            LinearRep::from_json(neg),
            Err(Error::InvalidRepresentation(_))
        ));
        let short = r#"{"k": 3, "w": [1], "digits": [[[1]], [[2]]]}"#;
        assert!(matches!(
            LinearRep::from_json(short),
            Err(Error::InvalidRepresentation(_))
        ));
        let zero_w = r#"{"k": 2, "w": [0], "digits": [[[1]], [[2]]]}"#;
        assert!(LinearRep::from_json(zero_w).is_err());
        assert!(LinearRep::from_json("{not json").is_err());
        let radix = r#"{"k": 1, "w": [1], "digits": [[[1]]]}"#;
        assert!(matches!(
            LinearRep::from_json(radix),
            Err(Error::InvalidRadix(1))
        ));
    }

    #[test]
    fn block_values_follow_increasing_order() {
        let z = zaremba(2).unwrap();
        let direct: Vec<BigUint> = (4..8).map(|m| z.eval_f(m)).collect();
        assert_eq!(z.block_values(2).unwrap(), direct);
    }
}
