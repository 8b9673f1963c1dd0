//! Concrete sequence families and a continued-fraction oracle for the Zaremba family.

use std::collections::{BTreeSet, HashSet, VecDeque};

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linrep::LinearRep;
use crate::matrix::IntMatrix;

/// One-dimensional representation with scalar digits `b_0..b_{k-1}` and `w = (1)`.
pub fn salem(digits: &[u64]) -> Result<LinearRep> {
    if digits.len() < 2 {
        return Err(Error::InvalidRadix(digits.len() as u64));
    }
    if digits.iter().all(|&b| b == 0) {
        return Err(Error::InvalidArgument("Salem digits are all zero".into()));
    }
    LinearRep::new(
        digits.len() as u64,
        vec![1],
        digits.iter().map(|&b| IntMatrix::scalar(b)).collect(),
    )
}

/// `s(n) = 2^{#zeros} 3^{#ones}` over the binary digits of `n`.
pub fn salem_classic() -> LinearRep {
    salem(&[2, 3]).expect("valid digits")
}

/// Digits `(1, 0, 1)`: the middle-thirds Cantor construction.
pub fn cantor() -> LinearRep {
    salem(&[1, 0, 1]).expect("valid digits")
}

/// `w = (1, 0)`, `B_i = [[i+1, 1], [1, 0]]`.
pub fn zaremba(k: u64) -> Result<LinearRep> {
    if k < 2 {
        return Err(Error::InvalidRadix(k));
    }
    let digits = (0..k)
        .map(|i| IntMatrix::from_rows(&[vec![i + 1, 1], vec![1, 0]]))
        .collect::<Result<Vec<_>>>()?;
    LinearRep::new(k, vec![1, 0], digits)
}

/// Stern's diatomic sequence with kernel vector `(s(m), s(m+1))`.
pub fn stern() -> LinearRep {
    let b0 = IntMatrix::from_rows(&[vec![1, 1], vec![0, 1]]).expect("square");
    let b1 = IntMatrix::from_rows(&[vec![1, 0], vec![1, 1]]).expect("square");
    LinearRep::new(2, vec![0, 1], vec![b0, b1]).expect("valid representation")
}

/// Names accepted by [`by_name`] for the fixed members of the catalog.
pub const NAMES: &[&str] = &[
    "salem-2-3",
    "salem-classic",
    "cantor",
    "stern",
    "zaremba2",
    "zaremba3",
];

/// Resolve a catalog name.
///
/// Besides [`NAMES`], accepts `zaremba<k>` for any `k ≥ 2` and
/// `salem-<b0>-<b1>-...` for any digit list.
pub fn by_name(name: &str) -> Result<LinearRep> {
    match name {
        "salem-classic" => return Ok(salem_classic()),
        "cantor" => return Ok(cantor()),
        "stern" => return Ok(stern()),
        _ => {}
    }
    if let Some(k) = name.strip_prefix("zaremba") {
        let k = k.trim_start_matches('-');
        return k
            .parse::<u64>()
            .map_err(|_| Error::InvalidArgument(format!("unknown representation '{name}'")))
            .and_then(zaremba);
    }
    if let Some(rest) = name.strip_prefix("salem-") {
        let digits = rest
            .split('-')
            .map(|s| s.parse::<u64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::InvalidArgument(format!("unknown representation '{name}'")))?;
        return salem(&digits);
    }
    Err(Error::InvalidArgument(format!(
        "unknown representation '{name}'"
    )))
}

/// Finite word of partial quotients, each in `[1, k]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CfWord {
    quotients: Vec<u64>,
}

impl CfWord {
    pub fn new(quotients: Vec<u64>, k: u64) -> Result<Self> {
        if quotients.is_empty() {
            return Err(Error::InvalidArgument(
                "continued fraction word is empty".into(),
            ));
        }
        if let Some(&a) = quotients.iter().find(|&&a| a == 0 || a > k) {
            return Err(Error::InvalidArgument(format!(
                "partial quotient {a} outside [1, {k}]"
            )));
        }
        Ok(CfWord { quotients })
    }

    pub fn quotients(&self) -> &[u64] {
        &self.quotients
    }
}

/// Denominator `q_n` of `[a_1, ..., a_n]` via `q_j = a_j q_{j-1} + q_{j-2}`.
///
/// This is the top-left entry of `[[a_n,1],[1,0]] ⋯ [[a_1,1],[1,0]]`,
/// computed without matrices.
pub fn cf_denominator(word: &CfWord) -> BigUint {
    let mut prev = BigUint::zero();
    let mut cur = BigUint::one();
    for &a in word.quotients() {
        let next = &cur * a + &prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// All denominators of convergents with partial quotients in `[1, k]`, up to `bound`.
///
/// Breadth-first over words; a word is dropped once its denominator exceeds
/// `bound`, since extending a word only increases `q`.
pub fn zaremba_oracle(k: u64, bound: u64) -> BTreeSet<u64> {
    let mut found = BTreeSet::new();
    let mut seen = HashSet::new();
    let mut queue = VecDeque::new();
    // State is (q_{n-1}, q_n); the empty word has (0, 1).
    queue.push_back((0u64, 1u64));
    while let Some((prev, cur)) = queue.pop_front() {
        for a in 1..=k {
            let Some(next) = a.checked_mul(cur).and_then(|x| x.checked_add(prev)) else {
                continue;
            };
            if next > bound {
                continue;
            }
            found.insert(next);
            if seen.insert((cur, next)) {
                queue.push_back((cur, next));
            }
        }
    }
    found
}
