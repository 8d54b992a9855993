//! Entropies and mutual information, in bits.
//!
//! Everything downstream is expressed through [`fano_information`], the
//! mutual information of a `d`-ary variable sent through a channel that is
//! correct with probability `(1 + (d-1) e) / d` and otherwise picks one of
//! the `d - 1` wrong symbols uniformly. For uniform inputs this is exactly
//! the Fano lower bound, so it doubles as the capacity of a symmetric
//! channel.

use serde::{Deserialize, Serialize};

use crate::error::{check_alphabet, check_unit, Error, Result};

/// Mass deviation accepted as-is.
pub const MASS_TOL: f64 = 1e-12;
/// Mass deviation above [`MASS_TOL`] that constructors silently renormalize.
pub const RENORMALIZE_TOL: f64 = 1e-9;

/// `x log2 x`, with `0 log 0 = 0`.
#[inline]
pub fn xlog2x(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// Shannon entropy of a distribution, in bits.
pub fn entropy(dist: &[f64]) -> f64 {
    -dist.iter().map(|&p| xlog2x(p)).sum::<f64>()
}

pub fn binary_entropy(q: f64) -> Result<f64> {
    check_unit("q", q)?;
    Ok(-xlog2x(q) - xlog2x(1.0 - q))
}

/// `(1 + u) ln(1 + u) - u` for `u >= -1`, accurate near `u = 0`.
fn excess_log(u: f64) -> f64 {
    if u.abs() < 0.1 {
        // sum_{n>=2} (-u)^n / (n (n - 1))
        let mut term = u * u;
        let mut acc = 0.0;
        for n in 2..40 {
            let nf = n as f64;
            acc += term / (nf * (nf - 1.0));
            term *= -u;
            if term.abs() < 1e-18 * acc.abs() {
                break;
            }
        }
        acc
    } else if u == -1.0 {
        1.0
    } else {
        (1.0 + u) * u.ln_1p() - u
    }
}

/// `I_d(e) = log2 d - h(p) - (1 - p) log2(d - 1)` with `p = (1 + (d-1) e) / d`.
///
/// Evaluated as `[phi((d-1) e) + (d-1) phi(-e)] / (d ln 2)` where
/// `phi(u) = (1+u) ln(1+u) - u`. The two forms are algebraically equal; this
/// one keeps full relative precision for tiny biases, where the textbook form
/// cancels to zero long before `e^2` underflows.
pub fn fano_information(d: usize, e: f64) -> Result<f64> {
    check_alphabet("d", d)?;
    check_unit("e", e)?;
    Ok(fano_unchecked(d, e))
}

pub(crate) fn fano_unchecked(d: usize, e: f64) -> f64 {
    let k = (d - 1) as f64;
    let v = (excess_log(k * e) + k * excess_log(-e)) / (d as f64 * std::f64::consts::LN_2);
    v.max(0.0)
}

/// Success probability `p` and bias `e` of a `d`-ary guess, tied by
/// `p = (1 + (d-1) e) / d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasedProbability {
    d: usize,
    p: f64,
    e: f64,
}

impl BiasedProbability {
    pub fn from_bias(d: usize, e: f64) -> Result<Self> {
        check_alphabet("d", d)?;
        check_unit("e", e)?;
        Ok(Self {
            d,
            p: bias_to_probability(d, e),
            e,
        })
    }

    pub fn from_probability(d: usize, p: f64) -> Result<Self> {
        check_alphabet("d", d)?;
        let lo = 1.0 / d as f64;
        if !(lo..=1.0).contains(&p) {
            return Err(Error::Domain {
                name: "p",
                value: p,
                expected: "[1/d, 1]",
            });
        }
        Ok(Self {
            d,
            p,
            e: probability_to_bias(d, p).clamp(0.0, 1.0),
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn probability(&self) -> f64 {
        self.p
    }

    pub fn bias(&self) -> f64 {
        self.e
    }
}

#[inline]
pub fn bias_to_probability(d: usize, e: f64) -> f64 {
    (1.0 + (d as f64 - 1.0) * e) / d as f64
}

#[inline]
pub fn probability_to_bias(d: usize, p: f64) -> f64 {
    (d as f64 * p - 1.0) / (d as f64 - 1.0)
}

/// Joint distribution `P(a = i, b = j)` stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointDistribution {
    rows: usize,
    cols: usize,
    weights: Vec<f64>,
}

impl JointDistribution {
    pub fn new(rows: usize, cols: usize, mut weights: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || weights.len() != rows * cols {
            return Err(Error::Shape {
                component: "joint distribution",
                detail: format!("{} weights for a {rows}x{cols} table", weights.len()),
            });
        }
        if let Some((k, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !w.is_finite() || **w < 0.0)
        {
            return Err(Error::Validation(format!(
                "weight ({}, {}) = {w} is not a nonnegative number",
                k / cols,
                k % cols
            )));
        }
        let total: f64 = weights.iter().sum();
        let dev = (total - 1.0).abs();
        if dev > RENORMALIZE_TOL {
            return Err(Error::Validation(format!(
                "total mass {total} deviates from 1 by {dev:e}"
            )));
        }
        if dev > MASS_TOL {
            weights.iter_mut().for_each(|w| *w /= total);
        }
        Ok(Self {
            rows,
            cols,
            weights,
        })
    }

    /// `P(a = i) r(j | i)` for a prior `P(a)` and a row-stochastic response.
    pub fn from_conditional(prior: &[f64], response: &[f64]) -> Result<Self> {
        let rows = prior.len();
        if rows == 0 || !response.len().is_multiple_of(rows) {
            return Err(Error::Shape {
                component: "joint distribution",
                detail: format!(
                    "response of length {} does not split into {rows} rows",
                    response.len()
                ),
            });
        }
        let cols = response.len() / rows;
        let weights = response
            .chunks(cols)
            .zip(prior)
            .flat_map(|(row, &pa)| row.iter().map(move |&r| pa * r))
            .collect();
        Self::new(rows, cols, weights)
    }

    /// Uniform input and unbiased errors: `r(i|i) = p`, `r(j|i) = (1-p)/(d-1)`.
    pub fn unbiased_errors(d: usize, e: f64) -> Result<Self> {
        check_alphabet("d", d)?;
        check_unit("e", e)?;
        let p = bias_to_probability(d, e);
        let off = (1.0 - p) / (d as f64 - 1.0);
        let weights = (0..d * d)
            .map(|k| if k / d == k % d { p } else { off } / d as f64)
            .collect();
        Self::new(d, d, weights)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.cols + j]
    }

    pub fn row_marginal(&self) -> Vec<f64> {
        self.weights
            .chunks(self.cols)
            .map(|r| r.iter().sum())
            .collect()
    }

    pub fn col_marginal(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.cols];
        for row in self.weights.chunks(self.cols) {
            m.iter_mut().zip(row).for_each(|(acc, w)| *acc += w);
        }
        m
    }

    /// `P(a = b)`.
    pub fn diagonal_mass(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }
}

/// `I(a; b)` in bits. Zero cells contribute nothing.
pub fn mutual_information(joint: &JointDistribution) -> f64 {
    table_information(joint.cols, &joint.weights, &mut Vec::new(), &mut Vec::new())
}

/// Mutual information of a row-major table, with caller-owned marginal buffers.
pub(crate) fn table_information(
    cols: usize,
    weights: &[f64],
    pa: &mut Vec<f64>,
    pb: &mut Vec<f64>,
) -> f64 {
    pa.clear();
    pa.extend(weights.chunks(cols).map(|r| r.iter().sum::<f64>()));
    pb.clear();
    pb.resize(cols, 0.0);
    for row in weights.chunks(cols) {
        for (acc, w) in pb.iter_mut().zip(row) {
            *acc += w;
        }
    }
    let mut acc = 0.0;
    for (i, row) in weights.chunks(cols).enumerate() {
        for (j, &w) in row.iter().enumerate() {
            if w > 0.0 {
                acc += w * (w / (pa[i] * pb[j])).log2();
            }
        }
    }
    acc.max(0.0)
}
