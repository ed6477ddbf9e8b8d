//! Small numeric helpers shared by the pricing modules.

/// Largest `n` for which binomial coefficients are computed in exact integer
/// arithmetic. `C(60, 30)` fits comfortably in a `u64`.
pub const EXACT_BINOMIAL_MAX: u64 = 60;

/// Exact binomial coefficient by the multiplicative recurrence.
///
/// Every partial product `C(n, i)` is an integer, so the division is exact.
/// Returns `None` on overflow of `u128`.
pub fn binomial_exact(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// Natural log of `C(n, k)`, accumulated term by term.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    (0..k)
        .map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln())
        .sum()
}

/// `C(n, k)` as a float; exact for `n <= EXACT_BINOMIAL_MAX`.
pub fn binomial(n: u64, k: u64) -> f64 {
    if n <= EXACT_BINOMIAL_MAX {
        if let Some(c) = binomial_exact(n, k) {
            return c as f64;
        }
    }
    ln_binomial(n, k).exp()
}

/// Binomial probability mass `C(n, k) q^k (1-q)^(n-k)`.
///
/// Small `n` multiplies the exact coefficient by integer powers; large `n`
/// works in log space so `C(1024, 512)` never overflows.
pub fn binomial_pmf(n: u64, k: u64, q: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    if n <= EXACT_BINOMIAL_MAX {
        return binomial(n, k) * q.powi(k as i32) * (1.0 - q).powi((n - k) as i32);
    }
    let ln = ln_binomial(n, k) + k as f64 * q.ln() + (n - k) as f64 * (1.0 - q).ln();
    ln.exp()
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: CompensatedSum) {
        self.add(other.sum);
        self.add(other.carry);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Ordinary least-squares slope of `ys` on `xs` (with intercept).
pub fn ols_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(sxy / sxx)
}
