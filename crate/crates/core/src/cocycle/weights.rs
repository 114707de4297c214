use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Scalar;

/// Probability vector driving the Bernoulli measure on the symbol space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernoulliWeights<T> {
    p: Vec<T>,
    strictly_positive: bool,
}

impl<T: Scalar> BernoulliWeights<T> {
    pub fn new(p: Vec<T>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::invalid("probability vector is empty"));
        }
        if p.iter().any(|&x| !x.is_finite() || x < T::zero()) {
            return Err(Error::invalid("probabilities must be finite and non-negative"));
        }
        let total: T = p.iter().copied().sum();
        let tol = T::lit(1e-12).max(T::epsilon() * T::from_usize_lossy(4 * p.len()));
        if (total - T::one()).abs() > tol {
            return Err(Error::invalid(format!("probabilities sum to {total}, not 1")));
        }
        let strictly_positive = p.iter().all(|&x| x > T::zero());
        Ok(Self { p, strictly_positive })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("need at least one symbol"));
        }
        Self::new(vec![T::one() / T::from_usize_lossy(n); n])
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn probabilities(&self) -> &[T] {
        &self.p
    }

    /// Whether every symbol has positive probability.
    pub fn is_strictly_positive(&self) -> bool {
        self.strictly_positive
    }

    /// Shannon entropy in nats, `−Σ_{p_i>0} p_i log p_i`.
    pub fn entropy(&self) -> T {
        entropy_of(&self.p)
    }

    /// Draws one symbol by inverse-CDF sampling.
    pub fn sample_symbol<R: Rng + ?Sized>(&self, rng: &mut R) -> u16 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut last_positive = 0;
        for (i, &pi) in self.p.iter().enumerate() {
            let pi = pi.to_f64_lossy();
            if pi > 0.0 {
                last_positive = i;
                acc += pi;
                if u < acc {
                    return i as u16;
                }
            }
        }
        last_positive as u16
    }

    /// I.i.d. word of length `n` with law `p`.
    pub fn sample_word<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> SymbolWord {
        SymbolWord((0..n).map(|_| self.sample_symbol(rng)).collect())
    }
}

pub fn entropy_of<T: Scalar>(p: &[T]) -> T {
    p.iter().filter(|&&x| x > T::zero()).map(|&x| -x * x.ln()).sum()
}

/// Finite word over the 0-based alphabet `{0, …, N−1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct SymbolWord(pub Vec<u16>);

impl SymbolWord {
    pub fn new(symbols: Vec<u16>) -> Self {
        Self(symbols)
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[u16] {
        &self.0
    }

    /// Checks that every symbol is below `n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        match self.0.iter().find(|&&s| s as usize >= n) {
            Some(&s) => Err(Error::invalid(format!("symbol {s} out of range for {n} maps"))),
            None => Ok(()),
        }
    }

    /// Left shift `σ`: drops the first symbol.
    pub fn shift(&self) -> Self {
        Self(self.0.iter().skip(1).copied().collect())
    }

    /// Word with `s` prepended.
    pub fn prepend(&self, s: u16) -> Self {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(s);
        v.extend_from_slice(&self.0);
        Self(v)
    }

    pub fn prefix(&self, n: usize) -> Self {
        Self(self.0[..n.min(self.0.len())].to_vec())
    }

    /// Dot-separated text form, e.g. `0.2.1`.
    pub fn to_dotted(&self) -> String {
        self.0.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(".")
    }

    pub fn from_dotted(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Ok(Self::empty());
        }
        s.split('.')
            .map(|t| t.parse::<u16>().map_err(|_| Error::invalid(format!("bad symbol '{t}'"))))
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

/// A bi-infinite word truncated to finite past and future parts.
///
/// `future = (i_0, i_1, …)`; `past = (i_{−1}, i_{−2}, …)`, listed moving away from time 0.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TwoSidedWord {
    pub past: SymbolWord,
    pub future: SymbolWord,
}

impl TwoSidedWord {
    pub fn new(past: SymbolWord, future: SymbolWord) -> Self {
        Self { past, future }
    }

    /// The shift `σ`: `i_0` moves to the front of the past.
    pub fn shift(&self) -> Self {
        match self.future.0.first() {
            Some(&s) => Self { past: self.past.prepend(s), future: self.future.shift() },
            None => self.clone(),
        }
    }
}
