//! Bounds on the bias `e` of a box implied by Information Causality.
//!
//! Every solver looks for the largest `e` at which the IC margin
//! `capacity - sum_i I(a_i; b_i)` is still nonnegative. Margins are
//! positive at `e = 0` and (in all cases handled here) decrease in `e`, so
//! the root is bracketed on `[0, 1]` and found by bisection.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boxes::BipartiteBox;
use crate::channel::{symmetric_channel, DiscreteChannel};
use crate::error::{check_alphabet, check_unit, Error, Result};
use crate::info::{bias_to_probability, fano_unchecked};
use crate::protocol::{simulate, Protocol, CAPACITY_TOL};

pub const DEFAULT_TOL: f64 = 1e-10;
/// Grid step of the coarse channel-bias scan.
pub const CHANNEL_BIAS_STEP: f64 = 1e-3;
/// Intervals in the margin scan of [`protocol_bound`].
pub const SCAN_POINTS: usize = 1000;
/// Intervals in the fallback scan used when the margin is not monotone.
pub const FINE_SCAN_POINTS: usize = 10_000;
/// Channel biases used by [`limit_bound`], largest first.
pub const LIMIT_CHANNEL_BIASES: [f64; 4] = [1e-2, 5e-3, 2e-3, 1e-3];
/// Deepest concatenation level tried by [`best_concatenation_bound`] callers.
pub const MAX_CONCATENATION_DEPTH: u32 = 64;

const MAX_BISECTIONS: usize = 200;
const MONOTONE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    /// Largest bias compatible with IC; `1.0` when no bound was found.
    pub e_bound: f64,
    /// Success probability `(1 + (d-1) e_bound) / d`.
    pub p_bound: f64,
    /// Alphabet size `d` used to convert between bias and probability.
    pub alphabet: usize,
    /// Channel bias the bound was obtained with, when a symmetric channel was used.
    pub e_c: Option<f64>,
    pub margin_at_bound: f64,
    pub iterations: usize,
    /// Width of the final bracket (or fit residual for extrapolated bounds).
    pub tolerance: f64,
    pub bound_found: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
}

impl BoundResult {
    fn new(alphabet: usize, e_c: Option<f64>, root: Root) -> Self {
        Self {
            e_bound: root.e,
            p_bound: bias_to_probability(alphabet, root.e),
            alphabet,
            e_c,
            margin_at_bound: root.margin,
            iterations: root.iterations,
            tolerance: root.width,
            bound_found: root.found,
            diagnostics: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Root {
    e: f64,
    margin: f64,
    iterations: usize,
    width: f64,
    found: bool,
}

/// Largest `e` in `[lo, hi]` with `margin(e) >= 0`, given `margin(lo) >= 0 > margin(hi)`.
fn bisect(margin: impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64, tol: f64) -> Result<Root> {
    let mut at_lo = margin(lo)?;
    let mut iterations = 0;
    while hi - lo > tol && iterations < MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let m = margin(mid)?;
        if m >= 0.0 {
            lo = mid;
            at_lo = m;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    Ok(Root {
        e: lo,
        margin: at_lo,
        iterations,
        width: hi - lo,
        found: true,
    })
}

/// Solves on `[0, 1]` after checking the bracket.
fn solve_unit(margin: impl Fn(f64) -> Result<f64>, tol: f64) -> Result<Root> {
    let at_zero = margin(0.0)?;
    if !(at_zero > 0.0) {
        return Err(Error::Validation(format!(
            "margin at e = 0 is {at_zero}, expected positive"
        )));
    }
    let at_one = margin(1.0)?;
    if at_one >= 0.0 {
        return Ok(Root {
            e: 1.0,
            margin: at_one,
            iterations: 0,
            width: 0.0,
            found: false,
        });
    }
    bisect(margin, 0.0, 1.0, tol)
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "tol",
            value: tol,
            expected: "> 0",
        })
    }
}

fn check_queries(n: usize) -> Result<()> {
    if n >= 2 {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "n",
            value: n as f64,
            expected: ">= 2",
        })
    }
}

/// Bound from `n I_d(e_c e) <= I_d(e_c)`: a single box and a symmetric
/// channel with bias `e_c`, for a protocol with unbiased errors.
pub fn solve_symmetric_bound(n: usize, d: usize, e_c: f64, tol: f64) -> Result<BoundResult> {
    check_queries(n)?;
    check_alphabet("d", d)?;
    check_unit("e_c", e_c)?;
    check_tol(tol)?;
    if e_c == 0.0 {
        return Err(Error::Domain {
            name: "e_c",
            value: 0.0,
            expected: "(0, 1]; use limit_bound for e_c -> 0",
        });
    }
    let capacity = fano_unchecked(d, e_c);
    let nf = n as f64;
    let root = solve_unit(|e| Ok(capacity - nf * fano_unchecked(d, e_c * e)), tol)?;
    Ok(BoundResult::new(d, Some(e_c), root))
}

/// Channel bias giving the tightest symmetric bound: a `1e-3` grid over
/// `(0, 1]`, then golden-section refinement around the best grid point.
/// Ties go to the smaller `e_c`.
pub fn optimize_channel_bias(n: usize, d: usize, tol: f64) -> Result<BoundResult> {
    check_queries(n)?;
    check_alphabet("d", d)?;
    check_tol(tol)?;
    // inner solves run tighter than the requested tolerance so the
    // objective is smooth enough for golden-section search
    let inner = tol.min(1e-14);
    let objective = |ec: f64| solve_symmetric_bound(n, d, ec, inner).map(|r| r.e_bound);

    let steps = (1.0 / CHANNEL_BIAS_STEP).round() as usize;
    let grid: Vec<f64> = (1..=steps).map(|k| k as f64 * CHANNEL_BIAS_STEP).collect();
    let values = grid
        .par_iter()
        .map(|&ec| objective(ec))
        .collect::<Result<Vec<_>>>()?;
    let best = values
        .iter()
        .enumerate()
        .fold(0, |best, (k, v)| if *v < values[best] { k } else { best });

    let mut lo = if best == 0 { grid[0] } else { grid[best - 1] };
    let mut hi = grid[(best + 1).min(steps - 1)];
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - ratio * (hi - lo);
    let mut dpt = lo + ratio * (hi - lo);
    let mut fc = objective(c)?;
    let mut fd = objective(dpt)?;
    let mut iterations = 0;
    while hi - lo > 1e-9 && iterations < 200 {
        if fc <= fd {
            hi = dpt;
            dpt = c;
            fd = fc;
            c = hi - ratio * (hi - lo);
            fc = objective(c)?;
        } else {
            lo = c;
            c = dpt;
            fc = fd;
            dpt = lo + ratio * (hi - lo);
            fd = objective(dpt)?;
        }
        iterations += 1;
    }
    let candidates = [(grid[best], values[best]), (c, fc), (dpt, fd)];
    let (ec, _) = candidates.iter().copied().fold(candidates[0], |acc, cand| {
        if cand.1 < acc.1 || (cand.1 == acc.1 && cand.0 < acc.0) {
            cand
        } else {
            acc
        }
    });
    let mut result = solve_symmetric_bound(n, d, ec, inner)?;
    result.iterations += iterations;
    result.diagnostics.push(format!(
        "grid optimum e_c = {:.3}, refined over [{lo:.9}, {hi:.9}]",
        grid[best]
    ));
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcatenationQuery {
    /// Queries per round.
    pub n: usize,
    pub d: usize,
    /// Concatenation depth.
    pub k: u32,
}

impl ConcatenationQuery {
    pub fn new(n: usize, d: usize, k: u32) -> Result<Self> {
        check_queries(n)?;
        check_alphabet("d", d)?;
        if k == 0 {
            return Err(Error::Domain {
                name: "k",
                value: 0.0,
                expected: ">= 1",
            });
        }
        Ok(Self { n, d, k })
    }
}

/// Bound from `n^k I_d(e^k) <= log2 d`, the condition after `k` levels of
/// concatenation over a noiseless `d`-symbol message.
pub fn concatenation_bound(q: ConcatenationQuery, tol: f64) -> Result<BoundResult> {
    let q = ConcatenationQuery::new(q.n, q.d, q.k)?;
    check_tol(tol)?;
    let scale = (q.n as f64).powi(q.k as i32);
    let log_d = (q.d as f64).log2();
    let k = q.k as i32;
    let root = solve_unit(|e| Ok(log_d - scale * fano_unchecked(q.d, e.powi(k))), tol)?;
    let mut r = BoundResult::new(q.d, None, root);
    r.diagnostics
        .push(format!("concatenation depth k = {}", q.k));
    Ok(r)
}

/// Tightest concatenation bound over depths `1..=max_depth`; ties go to
/// the shallower depth.
pub fn best_concatenation_bound(
    n: usize,
    d: usize,
    max_depth: u32,
    tol: f64,
) -> Result<(u32, BoundResult)> {
    let mut best: Option<(u32, BoundResult)> = None;
    for k in 1..=max_depth.max(1) {
        let r = concatenation_bound(ConcatenationQuery::new(n, d, k)?, tol)?;
        if best.as_ref().is_none_or(|(_, b)| r.e_bound < b.e_bound) {
            best = Some((k, r));
        }
    }
    Ok(best.expect("at least one depth"))
}

/// Family of boxes parameterized by the bias `e` in `[0, 1]`.
pub type BoxFamily<'a> = dyn Fn(f64) -> Result<BipartiteBox> + Sync + 'a;

/// Largest `e` for which `protocol` over `ch` does not violate IC with the
/// box `family(e)`.
///
/// The margin is scanned on a 1001-point grid first. If it is
/// nonincreasing the single sign change is refined by bisection. Otherwise
/// the scan is repeated on a 10001-point grid, the result is flagged in the
/// diagnostics, and more than one sign change is reported as ambiguous.
pub fn protocol_bound(
    proto: &Protocol,
    family: &BoxFamily<'_>,
    ch: &DiscreteChannel,
    tol: f64,
) -> Result<BoundResult> {
    check_tol(tol)?;
    proto.validate()?;
    proto.check_compatible(&family(0.0)?, ch)?;
    let capacity = ch.capacity(CAPACITY_TOL)?;
    let margin =
        |e: f64| -> Result<f64> { Ok(capacity - simulate(proto, &family(e)?, ch)?.ic_sum) };
    let scan = |points: usize| -> Result<Vec<(f64, f64)>> {
        (0..=points)
            .into_par_iter()
            .map(|j| {
                let e = j as f64 / points as f64;
                margin(e).map(|m| (e, m))
            })
            .collect()
    };

    let mut diagnostics = Vec::new();
    let mut samples = scan(SCAN_POINTS)?;
    let slack = MONOTONE_SLACK * capacity.max(1.0);
    let rise = samples.windows(2).map(|w| (w[1].1 - w[0].1, w[1].0)).fold(
        (f64::NEG_INFINITY, 0.0),
        |a, b| if b.0 > a.0 { b } else { a },
    );
    if rise.0 > slack {
        diagnostics.push(format!(
            "margin not monotone in e: rises by {:.3e} at e = {:.4}; rescanned on {} points",
            rise.0, rise.1, FINE_SCAN_POINTS
        ));
        samples = scan(FINE_SCAN_POINTS)?;
    }

    let (e0, m0) = samples[0];
    if !(m0 > 0.0) {
        return Err(Error::Validation(format!(
            "margin at e = {e0} is {m0}, expected positive"
        )));
    }
    let crossings: Vec<usize> = samples
        .windows(2)
        .enumerate()
        .filter(|(_, w)| (w[0].1 >= 0.0) != (w[1].1 >= 0.0))
        .map(|(j, _)| j)
        .collect();

    let root = match crossings.as_slice() {
        [] => Root {
            e: 1.0,
            margin: samples.last().expect("nonempty scan").1,
            iterations: 0,
            width: 0.0,
            found: false,
        },
        [j] => bisect(margin, samples[*j].0, samples[j + 1].0, tol)?,
        many => {
            return Err(Error::Ambiguous {
                crossings: many
                    .iter()
                    .map(|&j| 0.5 * (samples[j].0 + samples[j + 1].0))
                    .collect(),
            })
        }
    };
    let alphabet = proto.data_alphabet;
    let mut result = BoundResult::new(alphabet, ch.symmetric_bias(), root);
    result.diagnostics = diagnostics;
    Ok(result)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitBound {
    /// Extrapolated bound at `e_c -> 0`.
    pub bound: BoundResult,
    /// Coefficient of `e_c^2` in the fit `e(e_c) = e_0 + slope e_c^2`.
    pub slope: f64,
    /// Largest absolute deviation of the sequence from the fit.
    pub residual: f64,
    /// `(e_c, e_bound)` pairs the fit was made from.
    pub sequence: Vec<(f64, f64)>,
}

/// Bound in the limit of a vanishing symmetric channel bias.
///
/// Mutual informations are quadratic in small biases, so the bound
/// approaches its limit as `e_0 + c e_c^2`; the limit is read off a least
/// squares fit over [`LIMIT_CHANNEL_BIASES`]. Fails if the fit residual
/// exceeds `tol`.
pub fn limit_bound(
    proto: &Protocol,
    family: &BoxFamily<'_>,
    d: usize,
    tol: f64,
) -> Result<LimitBound> {
    check_alphabet("d", d)?;
    check_tol(tol)?;
    let inner = 1e-12;
    let mut sequence = Vec::with_capacity(LIMIT_CHANNEL_BIASES.len());
    let mut iterations = 0;
    for &ec in &LIMIT_CHANNEL_BIASES {
        let r = protocol_bound(proto, family, &symmetric_channel(d, ec)?, inner)?;
        if !r.bound_found {
            return Err(Error::Validation(format!(
                "no bound at e_c = {ec}; the limit is not defined"
            )));
        }
        iterations += r.iterations;
        sequence.push((ec, r.e_bound));
    }

    // least squares for e = e0 + slope * u with u = e_c^2
    let count = sequence.len() as f64;
    let mean_u = sequence.iter().map(|(ec, _)| ec * ec).sum::<f64>() / count;
    let mean_e = sequence.iter().map(|(_, e)| e).sum::<f64>() / count;
    let (mut suu, mut sue) = (0.0, 0.0);
    for (ec, e) in &sequence {
        let du = ec * ec - mean_u;
        suu += du * du;
        sue += du * (e - mean_e);
    }
    let slope = sue / suu;
    let e0 = mean_e - slope * mean_u;
    let residual = sequence
        .iter()
        .map(|(ec, e)| (e - (e0 + slope * ec * ec)).abs())
        .fold(0.0, f64::max);
    if residual > tol {
        return Err(Error::FitResidual {
            residual,
            tol,
            sequence,
        });
    }
    let e_bound = e0.clamp(0.0, 1.0);
    let bound = BoundResult {
        e_bound,
        p_bound: bias_to_probability(proto.data_alphabet, e_bound),
        alphabet: proto.data_alphabet,
        e_c: Some(0.0),
        margin_at_bound: 0.0,
        iterations,
        tolerance: residual,
        bound_found: true,
        diagnostics: vec![format!(
            "extrapolated in e_c^2 from e_c = {LIMIT_CHANNEL_BIASES:?}"
        )],
    };
    Ok(LimitBound {
        bound,
        slope,
        residual,
        sequence,
    })
}

/// The three comparisons behind the dominance of channel tuning over
/// concatenation, at concatenation depth `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Result1Report {
    /// `n^k I_d(e^k)`.
    pub concatenated_k: f64,
    /// `n^(k+1) I_d(e^(k+1))`.
    pub concatenated_k1: f64,
    pub log_d: f64,
    /// `n I_d(e^(k+1))`, the IC left side with a channel of bias `e^k`.
    pub channel_lhs: f64,
    /// `I_d(e^k)`, the capacity of that channel.
    pub channel_capacity: f64,
    /// Depth `k` passes IC but depth `k + 1` violates it.
    pub premises_hold: bool,
    pub conclusion_holds: bool,
    pub implication_holds: bool,
}

pub fn result1_witness(n: usize, d: usize, e: f64, k: u32) -> Result<Result1Report> {
    check_queries(n)?;
    check_alphabet("d", d)?;
    check_unit("e", e)?;
    if k == 0 {
        return Err(Error::Domain {
            name: "k",
            value: 0.0,
            expected: ">= 1",
        });
    }
    let nf = n as f64;
    let scale = nf.powi(k as i32);
    let channel_capacity = fano_unchecked(d, e.powi(k as i32));
    let channel_lhs = nf * fano_unchecked(d, e.powi(k as i32 + 1));
    // both sides share the factor n^k so rounding cannot split them
    let concatenated_k = scale * channel_capacity;
    let concatenated_k1 = scale * channel_lhs;
    let log_d = (d as f64).log2();
    let premises_hold = concatenated_k <= log_d && concatenated_k1 > log_d;
    let conclusion_holds = channel_lhs > channel_capacity;
    Ok(Result1Report {
        concatenated_k,
        concatenated_k1,
        log_d,
        channel_lhs,
        channel_capacity,
        premises_hold,
        conclusion_holds,
        implication_holds: !premises_hold || conclusion_holds,
    })
}

/// CHSH bound on `p` for binary symmetric channels with keep-probability
/// `p_c`, sorted by `p_c`.
pub fn sweep_fig1(grid: &[f64], tol: f64) -> Result<Vec<(f64, f64)>> {
    if let Some(&bad) = grid.iter().find(|pc| !(**pc > 0.5 && **pc <= 1.0)) {
        return Err(Error::Domain {
            name: "p_c",
            value: bad,
            expected: "(0.5, 1]",
        });
    }
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
        .par_iter()
        .map(|&pc| solve_symmetric_bound(2, 2, 2.0 * pc - 1.0, tol).map(|r| (pc, r.p_bound)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub d: usize,
    pub e_c_opt: f64,
    pub e: f64,
    pub e_concat: f64,
    pub concat_depth: u32,
}

pub const TABLE1_ALPHABETS: [usize; 4] = [3, 4, 5, 20];

/// Optimal channel bias and bound next to the best concatenation bound, `n = 2`.
pub fn table1(tol: f64) -> Result<Vec<Table1Row>> {
    TABLE1_ALPHABETS
        .par_iter()
        .map(|&d| {
            let opt = optimize_channel_bias(2, d, tol)?;
            let (depth, concat) = best_concatenation_bound(2, d, MAX_CONCATENATION_DEPTH, tol)?;
            Ok(Table1Row {
                d,
                e_c_opt: opt.e_c.expect("symmetric bound carries e_c"),
                e: opt.e_bound,
                e_concat: concat.e_bound,
                concat_depth: depth,
            })
        })
        .collect()
}

/// Box family `e -> e * bx + (1 - e) * white noise`.
pub fn white_noise_family(bx: &BipartiteBox) -> impl Fn(f64) -> Result<BipartiteBox> + Sync + '_ {
    move |e| bx.mix_with_white_noise(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxes::{box_3322, pr_box};
    use crate::protocol::{protocol_3322, van_dam_protocol};

    const TSIRELSON_P: f64 = 0.853_553_390_593_273_8;

    #[test]
    fn chsh_capacity_one() {
        let r = solve_symmetric_bound(2, 2, 1.0, DEFAULT_TOL).unwrap();
        assert!((r.p_bound - 0.890).abs() < 1e-3, "{}", r.p_bound);
        assert!(r.bound_found);
        assert!(r.margin_at_bound >= 0.0 && r.margin_at_bound < 1e-9);
    }

    #[test]
    fn chsh_small_channel_bias() {
        let r = solve_symmetric_bound(2, 2, 0.001, DEFAULT_TOL).unwrap();
        assert!((r.e_bound - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-5);
        assert!((r.p_bound - 0.854).abs() < 1e-3);
    }

    #[test]
    fn table_one_d3_at_listed_channel() {
        let r = solve_symmetric_bound(2, 3, 0.295, DEFAULT_TOL).unwrap();
        assert!((r.e_bound - 0.702).abs() < 1e-3, "{}", r.e_bound);
    }

    #[test]
    fn symmetric_domain_errors() {
        assert!(solve_symmetric_bound(2, 2, 0.0, DEFAULT_TOL).is_err());
        assert!(solve_symmetric_bound(1, 2, 0.5, DEFAULT_TOL).is_err());
        assert!(solve_symmetric_bound(2, 1, 0.5, DEFAULT_TOL).is_err());
        assert!(solve_symmetric_bound(2, 2, 0.5, 0.0).is_err());
    }

    #[test]
    fn concatenation_depths() {
        let one =
            concatenation_bound(ConcatenationQuery::new(2, 2, 1).unwrap(), DEFAULT_TOL).unwrap();
        assert!((one.p_bound - 0.890).abs() < 1e-3);
        let sym = solve_symmetric_bound(2, 2, 1.0, DEFAULT_TOL).unwrap();
        assert!((one.e_bound - sym.e_bound).abs() < 1e-9);
        // approaches 1/sqrt 2 from above, roughly as 1/k
        let at = |k| {
            concatenation_bound(ConcatenationQuery::new(2, 2, k).unwrap(), DEFAULT_TOL)
                .unwrap()
                .e_bound
        };
        let (e30, e200) = (at(30), at(200));
        // 250-digit reference values
        assert!((e30 - 0.710_966_699_835).abs() < 1e-9, "{e30}");
        assert!(e200 < e30 && e200 > std::f64::consts::FRAC_1_SQRT_2);
        assert!((e200 - 0.707_684_430_255).abs() < 1e-9, "{e200}");
        assert!(ConcatenationQuery::new(2, 2, 0).is_err());
    }

    #[test]
    fn protocol_bound_matches_symmetric_solver() {
        let family = |e: f64| pr_box((1.0 + e) / 2.0);
        let ch = DiscreteChannel::identity(2).unwrap();
        let r = protocol_bound(&van_dam_protocol(), &family, &ch, 1e-12).unwrap();
        assert!((r.p_bound - 0.890).abs() < 1e-3);
        let ch = symmetric_channel(2, 0.5).unwrap();
        let r = protocol_bound(&van_dam_protocol(), &family, &ch, 1e-12).unwrap();
        let s = solve_symmetric_bound(2, 2, 0.5, 1e-12).unwrap();
        assert!((r.e_bound - s.e_bound).abs() < 1e-9);
        assert_eq!(r.e_c, Some(0.5));
        assert!(r.diagnostics.is_empty());
    }

    #[test]
    fn protocol_bound_3322_capacity_one() {
        let ch = DiscreteChannel::identity(2).unwrap();
        let r = protocol_bound(&protocol_3322(), &box_3322, &ch, DEFAULT_TOL).unwrap();
        assert!((r.e_bound - 0.7445).abs() < 1e-3, "{}", r.e_bound);
    }

    #[test]
    fn no_bound_is_reported_not_raised() {
        // a box that never helps: white noise at every e
        let family = |_: f64| pr_box(0.5);
        let ch = DiscreteChannel::identity(2).unwrap();
        let r = protocol_bound(&van_dam_protocol(), &family, &ch, DEFAULT_TOL).unwrap();
        assert!(!r.bound_found);
        assert_eq!(r.e_bound, 1.0);
        assert!(r.margin_at_bound > 0.0);
    }

    #[test]
    fn ambiguous_margin_lists_crossings() {
        // violation only for e in a middle band: two sign changes
        let family = |e: f64| {
            let strength = if (0.4..0.6).contains(&e) { 1.0 } else { 0.5 };
            pr_box(strength)
        };
        let ch = DiscreteChannel::identity(2).unwrap();
        match protocol_bound(&van_dam_protocol(), &family, &ch, DEFAULT_TOL) {
            Err(Error::Ambiguous { crossings }) => {
                assert_eq!(crossings.len(), 2);
                assert!((crossings[0] - 0.4).abs() < 1e-3);
                assert!((crossings[1] - 0.6).abs() < 1e-3);
            }
            other => panic!("expected ambiguity, got {other:?}"),
        }
    }

    #[test]
    fn non_monotone_single_crossing_is_flagged() {
        // margin dips then recovers while staying positive, then crosses once
        let family = |e: f64| {
            let p = if (0.2..0.3).contains(&e) {
                0.8
            } else {
                (1.0 + e) / 2.0
            };
            pr_box(p)
        };
        let ch = DiscreteChannel::identity(2).unwrap();
        let r = protocol_bound(&van_dam_protocol(), &family, &ch, DEFAULT_TOL).unwrap();
        assert!((r.p_bound - 0.890).abs() < 1e-3);
        assert_eq!(r.diagnostics.len(), 1);
        assert!(r.diagnostics[0].contains("not monotone"));
    }

    #[test]
    fn limit_van_dam_reaches_tsirelson() {
        let family = |e: f64| pr_box((1.0 + e) / 2.0);
        let lim = limit_bound(&van_dam_protocol(), &family, 2, 1e-6).unwrap();
        assert!(
            (lim.bound.p_bound - TSIRELSON_P).abs() < 1e-6,
            "{}",
            lim.bound.p_bound
        );
        assert_eq!(lim.sequence.len(), 4);
    }

    #[test]
    fn limit_fit_residual_is_enforced() {
        let family = |e: f64| pr_box((1.0 + e) / 2.0);
        match limit_bound(&van_dam_protocol(), &family, 2, 1e-15) {
            Err(Error::FitResidual { sequence, .. }) => assert_eq!(sequence.len(), 4),
            Ok(l) => assert!(l.residual <= 1e-15),
            Err(e) => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn result1_examples() {
        let r = result1_witness(2, 2, 0.75, 2).unwrap();
        assert!(r.implication_holds);
        // 4 I(0.5625) <= 1 and 8 I(0.421875) > 1 hold at e = 0.75
        assert!(r.premises_hold && r.conclusion_holds);
        for k in 1..8 {
            let r = result1_witness(2, 2, 0.0, k).unwrap();
            assert!(!r.premises_hold && r.implication_holds);
        }
    }

    #[test]
    fn fig1_sweep_endpoints() {
        let rows = sweep_fig1(&[1.0, 0.501, 0.75], DEFAULT_TOL).unwrap();
        assert_eq!(
            rows.iter().map(|r| r.0).collect::<Vec<_>>(),
            vec![0.501, 0.75, 1.0]
        );
        assert!((rows[2].1 - 0.890).abs() < 1e-3);
        assert!((rows[0].1 - 0.854).abs() < 2e-3);
        assert!(rows.windows(2).all(|w| w[0].1 <= w[1].1));
        assert!(sweep_fig1(&[0.5], DEFAULT_TOL).is_err());
    }
}
