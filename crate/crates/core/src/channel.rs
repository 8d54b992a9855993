//! Square discrete memoryless channels and their capacities.

use serde::{Deserialize, Serialize};

use crate::error::{check_alphabet, check_unit, Error, Result};
use crate::info::{bias_to_probability, probability_to_bias, MASS_TOL, RENORMALIZE_TOL};

/// Iteration cap for [`iterative_capacity`].
pub const MAX_CAPACITY_ITERATIONS: usize = 10_000;

/// Transition matrix `r(j | i)`, rows indexed by the sent symbol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChannelFile", into = "ChannelFile")]
pub struct DiscreteChannel {
    d: usize,
    transition: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ChannelFile {
    d: usize,
    transition: Vec<Vec<f64>>,
}

impl TryFrom<ChannelFile> for DiscreteChannel {
    type Error = Error;

    fn try_from(f: ChannelFile) -> Result<Self> {
        if f.transition.len() != f.d {
            return Err(Error::Shape {
                component: "channel",
                detail: format!(
                    "transition has {} rows, expected d = {}",
                    f.transition.len(),
                    f.d
                ),
            });
        }
        if let Some((i, row)) = f
            .transition
            .iter()
            .enumerate()
            .find(|(_, r)| r.len() != f.d)
        {
            return Err(Error::Shape {
                component: "channel",
                detail: format!(
                    "transition[{i}] has {} columns, expected d = {} (channels are square)",
                    row.len(),
                    f.d
                ),
            });
        }
        Self::new(f.d, f.transition.concat())
    }
}

impl From<DiscreteChannel> for ChannelFile {
    fn from(c: DiscreteChannel) -> Self {
        ChannelFile {
            d: c.d,
            transition: c.transition.chunks(c.d).map(<[f64]>::to_vec).collect(),
        }
    }
}

impl DiscreteChannel {
    /// Row-major `d x d` transition matrix. Rows off by less than 1e-9 are
    /// renormalized; larger deviations are rejected.
    pub fn new(d: usize, mut transition: Vec<f64>) -> Result<Self> {
        if d == 0 || transition.len() != d * d {
            return Err(Error::Shape {
                component: "channel",
                detail: format!(
                    "{} entries for a square channel of size {d}",
                    transition.len()
                ),
            });
        }
        if let Some(k) = transition.iter().position(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::Validation(format!(
                "transition[{}][{}] = {} is not a nonnegative number",
                k / d,
                k % d,
                transition[k]
            )));
        }
        for (i, row) in transition.chunks_mut(d).enumerate() {
            let total: f64 = row.iter().sum();
            let dev = (total - 1.0).abs();
            if dev > RENORMALIZE_TOL {
                return Err(Error::Validation(format!(
                    "transition row {i} sums to {total}"
                )));
            }
            if dev > MASS_TOL {
                row.iter_mut().for_each(|r| *r /= total);
            }
        }
        Ok(Self { d, transition })
    }

    pub fn identity(d: usize) -> Result<Self> {
        symmetric_channel(d, 1.0)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("channel serializes")
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn transition(&self) -> &[f64] {
        &self.transition
    }

    #[inline]
    pub fn prob(&self, sent: usize, received: usize) -> f64 {
        self.transition[sent * self.d + received]
    }

    pub fn row(&self, sent: usize) -> &[f64] {
        &self.transition[sent * self.d..(sent + 1) * self.d]
    }

    /// Channel bias `e_c` if the matrix has constant diagonal `p_c >= 1/d`
    /// and constant off-diagonal `(1 - p_c)/(d - 1)`.
    pub fn symmetric_bias(&self) -> Option<f64> {
        if self.d < 2 {
            return None;
        }
        let pc = self.prob(0, 0);
        let off = (1.0 - pc) / (self.d as f64 - 1.0);
        let tol = 1e-12;
        let symmetric = (0..self.d).all(|i| {
            (0..self.d).all(|j| {
                let want = if i == j { pc } else { off };
                (self.prob(i, j) - want).abs() <= tol
            })
        });
        let e = probability_to_bias(self.d, pc);
        (symmetric && e >= -tol).then(|| e.clamp(0.0, 1.0))
    }

    /// `self` followed by `next`: `r(k|i) = sum_j r_self(j|i) r_next(k|j)`.
    pub fn then(&self, next: &DiscreteChannel) -> Result<DiscreteChannel> {
        if self.d != next.d {
            return Err(Error::Shape {
                component: "channel",
                detail: format!("cannot chain sizes {} and {}", self.d, next.d),
            });
        }
        let d = self.d;
        let mut transition = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                let r = self.prob(i, j);
                for k in 0..d {
                    transition[i * d + k] += r * next.prob(j, k);
                }
            }
        }
        DiscreteChannel::new(d, transition)
    }

    /// Capacity in bits: closed form for symmetric channels, otherwise
    /// alternating maximization to `tol`.
    pub fn capacity(&self, tol: f64) -> Result<f64> {
        match self.symmetric_bias() {
            Some(e) => closed_form_capacity(self.d, e),
            None => iterative_capacity(self, tol).map(|c| c.capacity),
        }
    }
}

/// Keeps the symbol with probability `p_c = (1 + (d-1) e_c)/d`, otherwise
/// sends one of the other `d - 1` symbols uniformly.
pub fn symmetric_channel(d: usize, e_c: f64) -> Result<DiscreteChannel> {
    check_alphabet("d", d)?;
    check_unit("e_c", e_c)?;
    let pc = bias_to_probability(d, e_c);
    let off = (1.0 - pc) / (d as f64 - 1.0);
    let transition = (0..d * d)
        .map(|k| if k / d == k % d { pc } else { off })
        .collect();
    DiscreteChannel::new(d, transition)
}

pub fn closed_form_capacity(d: usize, e_c: f64) -> Result<f64> {
    crate::info::fano_information(d, e_c)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityEstimate {
    pub capacity: f64,
    /// Maximizing input distribution.
    pub input: Vec<f64>,
    pub iterations: usize,
    /// Upper minus lower capacity bound at exit.
    pub gap: f64,
}

/// Blahut-Arimoto iteration from the uniform input.
///
/// Each step yields a lower bound `I(q; r)` and an upper bound
/// `max_i D(r(.|i) || q r)`; iteration stops once they are within `tol`,
/// which bounds the error of the reported capacity.
pub fn iterative_capacity(ch: &DiscreteChannel, tol: f64) -> Result<CapacityEstimate> {
    if !(tol > 0.0) {
        return Err(Error::Domain {
            name: "tol",
            value: tol,
            expected: "> 0",
        });
    }
    let d = ch.d;
    let mut input = vec![1.0 / d as f64; d];
    let mut output = vec![0.0; d];
    let mut divergence = vec![0.0; d];
    let mut best = (0.0, input.clone(), f64::INFINITY);

    for iterations in 1..=MAX_CAPACITY_ITERATIONS {
        output.iter_mut().for_each(|o| *o = 0.0);
        for (i, &q) in input.iter().enumerate() {
            for (o, &r) in output.iter_mut().zip(ch.row(i)) {
                *o += q * r;
            }
        }
        // D(r(.|i) || output) in bits
        for (i, div) in divergence.iter_mut().enumerate() {
            *div = ch
                .row(i)
                .iter()
                .zip(&output)
                .filter(|(r, _)| **r > 0.0)
                .map(|(&r, &o)| r * (r / o).log2())
                .sum();
        }
        let lower: f64 = input.iter().zip(&divergence).map(|(q, dv)| q * dv).sum();
        let upper = divergence.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let gap = upper - lower;
        if lower >= best.0 {
            best = (lower, input.clone(), gap);
        }
        if gap <= tol {
            return Ok(CapacityEstimate {
                capacity: lower.max(0.0),
                input,
                iterations,
                gap,
            });
        }
        let mut norm = 0.0;
        for (q, dv) in input.iter_mut().zip(&divergence) {
            *q *= dv.exp2();
            norm += *q;
        }
        input.iter_mut().for_each(|q| *q /= norm);
    }
    Err(Error::NonConvergence {
        iterations: MAX_CAPACITY_ITERATIONS,
        best: best.0,
        gap: best.2,
        best_input: best.1,
    })
}
