//! Small numerical helpers shared by the estimators.

/// Neumaier's compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// `log(sum(exp(v)))`, `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let s: CompensatedSum = values.iter().map(|&v| (v - max).exp()).collect();
    max + s.value().ln()
}

/// Sample mean and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub stderr: f64,
}

pub fn mean_estimate(samples: &[f64]) -> MeanEstimate {
    let n = samples.len();
    if n == 0 {
        return MeanEstimate {
            mean: f64::NAN,
            stderr: f64::NAN,
        };
    }
    let mean = samples.iter().copied().collect::<CompensatedSum>().value() / n as f64;
    if n < 2 {
        return MeanEstimate { mean, stderr: 0.0 };
    }
    let ss: CompensatedSum = samples.iter().map(|&x| (x - mean) * (x - mean)).collect();
    let var = ss.value() / (n - 1) as f64;
    MeanEstimate {
        mean,
        stderr: (var / n as f64).sqrt(),
    }
}

/// Ratio of two sample means with a delta-method standard error.
///
/// Returns `(ratio, stderr)`; the ratio is 0 when the numerator samples are
/// all exactly zero, regardless of the denominator.
pub fn ratio_estimate(numerator: &[f64], denominator: &[f64]) -> (f64, f64) {
    assert_eq!(numerator.len(), denominator.len());
    let n = numerator.len();
    let a = mean_estimate(numerator);
    let b = mean_estimate(denominator);
    if numerator.iter().all(|&x| x == 0.0) {
        return (0.0, 0.0);
    }
    let r = a.mean / b.mean;
    if n < 2 {
        return (r, 0.0);
    }
    // Var(a - r b) / (n b^2)
    let resid: CompensatedSum = numerator
        .iter()
        .zip(denominator)
        .map(|(&x, &y)| {
            let d = (x - a.mean) - r * (y - b.mean);
            d * d
        })
        .collect();
    let var = resid.value() / (n - 1) as f64;
    (r, (var / n as f64).sqrt() / b.mean.abs())
}

/// Exact binomial coefficient, saturating at `u128::MAX`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i + 1) as u128,
            None => return u128::MAX,
        };
    }
    acc
}

/// Falling factorial `(n)_k = n (n-1) ... (n-k+1)`, saturating.
pub fn falling_factorial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v,
            None => return u128::MAX,
        };
    }
    acc
}

/// Lexicographic iterator over the `k`-subsets of `0..n`.
#[derive(Debug, Clone)]
pub struct Combinations {
    n: usize,
    current: Vec<usize>,
    done: bool,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        Combinations {
            n,
            current: (0..k).collect(),
            done: k > n,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        let k = self.current.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.current[i] < self.n - k + i {
                self.current[i] += 1;
                for j in i + 1..k {
                    self.current[j] = self.current[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials_and_falling_factorials() {
        assert_eq!(binomial(20, 3), 1140);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(falling_factorial(8, 2), 56);
        assert_eq!(falling_factorial(3, 0), 1);
    }

    #[test]
    fn combinations_enumerate_all_subsets_in_order() {
        let all: Vec<_> = Combinations::new(5, 2).collect();
        assert_eq!(all.len(), 10);
        assert_eq!(all[0], vec![0, 1]);
        assert_eq!(all[9], vec![3, 4]);
        assert_eq!(Combinations::new(3, 0).count(), 1);
        assert_eq!(Combinations::new(2, 3).count(), 0);
    }

    #[test]
    fn log_sum_exp_is_shift_invariant() {
        let v = [-1000.0, -1001.5, -999.25];
        let shifted: Vec<f64> = v.iter().map(|x| x + 1000.0).collect();
        assert!((log_sum_exp(&v) + 1000.0 - log_sum_exp(&shifted)).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn ratio_of_zero_numerator_is_exactly_zero() {
        assert_eq!(ratio_estimate(&[0.0, 0.0], &[1.0, 2.0]), (0.0, 0.0));
    }
}
