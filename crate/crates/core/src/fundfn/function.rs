use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed-form fundamental functions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Formula {
    /// `x^exponent`, `0 <= exponent <= 1`.
    Power { exponent: f64 },
    /// `x / ln(x + e - 1)`.
    Xlog,
    /// `phi(1) = 1`; `phi(x)/x` constant on odd-numbered intervals
    /// `[n_k, n_{k+1}]`, `phi` constant on even-numbered ones. The pattern
    /// continues past the last breakpoint.
    Alternating { breakpoints: Vec<f64> },
    /// Geometric interpolation of `lambda = base(x)/x` between the nodes
    /// `n0 * ratio^k`; equals `base` on `[1, n0]` and at every node.
    Interpolated {
        base: Box<FundamentalFunction>,
        n0: f64,
        ratio: f64,
    },
    Scaled {
        factor: f64,
        base: Box<FundamentalFunction>,
    },
}

/// Increasing `phi` on `[1, cap]` with `phi(x)/x` nonincreasing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FundamentalFunction {
    /// `samples[k - 1] = phi(k)`, linear in between, `lambda(N) x` past the
    /// last sample.
    Grid {
        samples: Vec<f64>,
        cap: usize,
    },
    Closed {
        formula: Formula,
        cap: usize,
    },
}

impl FundamentalFunction {
    pub fn grid(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidFundamentalFunction("no samples".into()));
        }
        let f = Self::Grid {
            cap: samples.len(),
            samples,
        };
        f.check()?;
        Ok(f)
    }

    pub fn closed(formula: Formula, cap: usize) -> Result<Self> {
        let f = Self::Closed { formula, cap };
        f.check()?;
        Ok(f)
    }

    pub fn power(exponent: f64, cap: usize) -> Result<Self> {
        Self::closed(Formula::Power { exponent }, cap)
    }

    pub fn cap(&self) -> usize {
        match self {
            Self::Grid { cap, .. } | Self::Closed { cap, .. } => *cap,
        }
    }

    /// `phi(x)`; arguments below 1 are floored to 1.
    pub fn eval(&self, x: f64) -> f64 {
        let x = x.max(1.0);
        match self {
            Self::Grid { samples, .. } => grid_eval(samples, x),
            Self::Closed { formula, .. } => formula_eval(formula, x),
        }
    }

    pub fn lambda(&self, x: f64) -> f64 {
        let x = x.max(1.0);
        self.eval(x) / x
    }

    /// Values on `1..=n`.
    pub fn table(&self, n: usize) -> Vec<f64> {
        (1..=n).map(|k| self.eval(k as f64)).collect()
    }

    /// Sampled on `1..=cap`.
    pub fn to_grid(&self) -> Self {
        Self::Grid {
            samples: self.table(self.cap()),
            cap: self.cap(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::Closed {
            formula: Formula::Scaled {
                factor,
                base: Box::new(self.clone()),
            },
            cap: self.cap(),
        }
    }

    /// Checks the defining properties on the integer grid: positive,
    /// increasing, `phi(x)/x` nonincreasing, all within a relative 1e-12.
    pub fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidFundamentalFunction(m));
        if self.cap() == 0 {
            return bad("cap must be positive".into());
        }
        match self {
            Self::Closed { formula, .. } => check_formula(formula)?,
            Self::Grid { samples, cap } if samples.len() != *cap => {
                return bad(format!("grid has {} samples but cap {cap}", samples.len()))
            }
            _ => {}
        }
        let t = self.table(self.cap());
        for (i, v) in t.iter().enumerate() {
            if !(v.is_finite() && *v > 0.0) {
                return bad(format!("phi({}) = {v} is not positive", i + 1));
            }
        }
        for k in 1..t.len() {
            let tol = 1e-12 * t[k].abs().max(1.0);
            if t[k] < t[k - 1] - tol {
                return bad(format!("phi decreases between {} and {}", k, k + 1));
            }
            let (l0, l1) = (t[k - 1] / k as f64, t[k] / (k + 1) as f64);
            if l1 > l0 + 1e-12 * l0.max(1.0) {
                return bad(format!("phi(x)/x increases between {} and {}", k, k + 1));
            }
        }
        Ok(())
    }
}

fn check_formula(f: &Formula) -> Result<()> {
    let bad = |m: &str| Err(Error::InvalidFundamentalFunction(m.into()));
    match f {
        Formula::Power { exponent } if !(0.0..=1.0).contains(exponent) => bad("power exponent must lie in [0, 1]"),
        Formula::Alternating { breakpoints } => {
            if breakpoints.first() != Some(&1.0) {
                return bad("breakpoints must start at 1");
            }
            if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
                return bad("breakpoints must be strictly increasing");
            }
            Ok(())
        }
        Formula::Interpolated { base, n0, ratio } => {
            if !(*n0 >= 1.0 && *ratio > 1.0) {
                return bad("interpolation needs n0 >= 1 and ratio > 1");
            }
            base.check()
        }
        Formula::Scaled { factor, base } => {
            if !(*factor > 0.0 && factor.is_finite()) {
                return bad("scale factor must be positive");
            }
            base.check()
        }
        _ => Ok(()),
    }
}

fn grid_eval(samples: &[f64], x: f64) -> f64 {
    let n = samples.len();
    if x == n as f64 {
        return samples[n - 1];
    }
    if x > n as f64 {
        return samples[n - 1] * (x / n as f64);
    }
    let i = x.floor() as usize;
    let t = x - i as f64;
    if t == 0.0 {
        return samples[i - 1];
    }
    samples[i - 1] * (1.0 - t) + samples[i] * t
}

fn formula_eval(f: &Formula, x: f64) -> f64 {
    match f {
        Formula::Power { exponent } => x.powf(*exponent),
        Formula::Xlog => x / (x + std::f64::consts::E - 1.0).ln(),
        Formula::Alternating { breakpoints } => {
            let mut phi = 1.0;
            for (k, w) in breakpoints.windows(2).enumerate() {
                let (a, b) = (w[0], w[1]);
                let linear = k % 2 == 0;
                if x <= b {
                    return if linear { phi * x / a } else { phi };
                }
                if linear {
                    phi *= b / a;
                }
            }
            let last = *breakpoints.last().unwrap_or(&1.0);
            if (breakpoints.len() - 1) % 2 == 0 {
                phi * x / last
            } else {
                phi
            }
        }
        Formula::Interpolated { base, n0, ratio } => {
            if x <= *n0 {
                return base.eval(x);
            }
            let steps = ((x / n0).ln() / ratio.ln()).floor();
            let n = n0 * ratio.powf(steps);
            let theta = ((x / n).ln() / ratio.ln()).clamp(0.0, 1.0);
            let mu = base.lambda(n).powf(1.0 - theta) * base.lambda(ratio * n).powf(theta);
            x * mu
        }
        Formula::Scaled { factor, base } => factor * base.eval(x),
    }
}
