//! Protocol search: simulated annealing over the protocol tables, and an
//! exhaustive enumerator for spaces small enough to serve as its oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boxes::BipartiteBox;
use crate::channel::DiscreteChannel;
use crate::error::{Error, Result};
use crate::info::{mutual_information, table_information, JointDistribution};
use crate::protocol::Protocol;

/// Name of the pseudo-random generator recorded with every search result.
pub const GENERATOR: &str = "ChaCha8Rng (rand_chacha 0.3, seed_from_u64)";
/// Largest number of candidate evaluations [`exhaustive_protocol_search`] accepts.
pub const ENUMERATION_LIMIT: f64 = 1e7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub initial_temperature: f64,
    /// Geometric cooling factor applied after every temperature step.
    pub cooling: f64,
    pub steps_per_temperature: usize,
    pub max_evaluations: usize,
    /// Annealing stops once the temperature drops below this.
    pub min_temperature: f64,
    pub seed: u64,
    /// Relative frequency of moves on `x_table`, `m_table` and `decoder_table`.
    pub move_weights: [f64; 3],
    pub data_alphabet: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            initial_temperature: 1.0,
            cooling: 0.995,
            steps_per_temperature: 200,
            max_evaluations: 1_000_000,
            min_temperature: 1e-6,
            seed: 0,
            move_weights: [1.0, 1.0, 1.0],
            data_alphabet: 2,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, value: f64, expected: &'static str| {
            Err(Error::Domain {
                name,
                value,
                expected,
            })
        };
        if !(self.cooling > 0.0 && self.cooling < 1.0) {
            return bad("cooling", self.cooling, "(0, 1)");
        }
        if !(self.initial_temperature > 0.0) {
            return bad("initial_temperature", self.initial_temperature, "> 0");
        }
        if !(self.min_temperature >= 0.0) {
            return bad("min_temperature", self.min_temperature, ">= 0");
        }
        if self.steps_per_temperature == 0 {
            return bad("steps_per_temperature", 0.0, ">= 1");
        }
        if self.max_evaluations == 0 {
            return bad("max_evaluations", 0.0, ">= 1");
        }
        if self.data_alphabet < 2 {
            return bad("data_alphabet", self.data_alphabet as f64, ">= 2");
        }
        if self.move_weights.iter().any(|w| !(*w >= 0.0))
            || self.move_weights.iter().sum::<f64>() <= 0.0
        {
            return bad(
                "move_weights",
                self.move_weights.iter().sum(),
                "nonnegative, not all zero",
            );
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub evaluation: usize,
    pub best_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchOutcome {
    pub protocol: Protocol,
    /// `sum_i I(a_i; b_i)` of the returned protocol.
    pub score: f64,
    pub evaluations: usize,
    /// The evaluation cap stopped the run before the schedule finished.
    pub hit_cap: bool,
    pub seed: u64,
    /// Every improvement of the best score, in order.
    pub trace: Vec<TracePoint>,
}

/// Protocol skeleton for a box and channel: `y = i mod ny`, tables zeroed.
fn blank_protocol(
    bx: &BipartiteBox,
    ch: &DiscreteChannel,
    n_data: usize,
    q: usize,
) -> Result<Protocol> {
    if n_data == 0 {
        return Err(Error::Domain {
            name: "n_data",
            value: 0.0,
            expected: ">= 1",
        });
    }
    let (na, nb, nx, ny) = bx.shape();
    let d = ch.d();
    let tuples = q
        .checked_pow(n_data as u32)
        .filter(|t| *t <= 1 << 20)
        .ok_or_else(|| Error::Shape {
            component: "protocol",
            detail: format!("{q}^{n_data} data tuples is too many"),
        })?;
    Ok(Protocol {
        name: None,
        n_data,
        data_alphabet: q,
        message_alphabet: d,
        sender_settings: nx,
        receiver_settings: ny,
        sender_outcomes: na,
        receiver_outcomes: nb,
        x_table: vec![0; tuples],
        m_table: vec![0; tuples * na],
        y_map: (0..n_data).map(|i| i % ny).collect(),
        decoder_table: vec![0; n_data * d * nb],
        prior: None,
    })
}

/// `sum_i I(a_i; b_i)` for protocols sharing one skeleton, with the box,
/// channel and data tuples laid out once. Mirrors [`simulate`] without its
/// validation and allocations.
struct Scorer<'a> {
    bx: &'a BipartiteBox,
    ch: &'a DiscreteChannel,
    digits: Vec<usize>,
    weight: f64,
    tables: Vec<f64>,
    pa: Vec<f64>,
    pb: Vec<f64>,
}

impl<'a> Scorer<'a> {
    fn new(bx: &'a BipartiteBox, ch: &'a DiscreteChannel, skeleton: &Protocol) -> Self {
        let tuples = skeleton.tuple_count();
        Self {
            bx,
            ch,
            digits: (0..tuples).flat_map(|t| skeleton.tuple_digits(t)).collect(),
            weight: 1.0 / tuples as f64,
            tables: Vec::new(),
            pa: Vec::new(),
            pb: Vec::new(),
        }
    }

    fn score(&mut self, p: &Protocol) -> f64 {
        let (q, d, n) = (p.data_alphabet, p.message_alphabet, p.n_data);
        let (na, nb, _, _) = self.bx.shape();
        let w = self.weight;
        self.tables.clear();
        self.tables.resize(n * q * q, 0.0);
        for (t, digits) in self.digits.chunks(n).enumerate() {
            let x = p.x_table[t];
            for (i, table) in self.tables.chunks_mut(q * q).enumerate() {
                let y = p.y_map[i];
                let row = digits[i] * q;
                for a in 0..na {
                    let m = p.m_table[t * na + a];
                    for b in 0..nb {
                        let pab = self.bx.prob(a, b, x, y);
                        if pab == 0.0 {
                            continue;
                        }
                        for received in 0..d {
                            let r = self.ch.prob(m, received);
                            if r != 0.0 {
                                table[row + p.guess(i, received, b)] += w * pab * r;
                            }
                        }
                    }
                }
            }
        }
        self.tables
            .chunks(q * q)
            .map(|t| table_information(q, t, &mut self.pa, &mut self.pb))
            .sum()
    }
}

/// Simulated annealing on `sum_i I(a_i; b_i)`.
///
/// Each move rewrites one entry of `x_table`, `m_table` or `decoder_table`
/// (picked by `cfg.move_weights`). Worse candidates are accepted with
/// probability `exp(delta / T)`. The run is fully determined by `cfg.seed`.
pub fn anneal_protocol(
    bx: &BipartiteBox,
    ch: &DiscreteChannel,
    n_data: usize,
    cfg: &SearchConfig,
) -> Result<SearchOutcome> {
    cfg.validate()?;
    if n_data < 2 {
        return Err(Error::Domain {
            name: "n_data",
            value: n_data as f64,
            expected: ">= 2",
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut current = blank_protocol(bx, ch, n_data, cfg.data_alphabet)?;
    let ranges = [
        current.sender_settings,
        current.message_alphabet,
        current.data_alphabet,
    ];
    for v in current.x_table.iter_mut() {
        *v = rng.gen_range(0..ranges[0]);
    }
    for v in current.m_table.iter_mut() {
        *v = rng.gen_range(0..ranges[1]);
    }
    for v in current.decoder_table.iter_mut() {
        *v = rng.gen_range(0..ranges[2]);
    }

    // tables a move can actually change
    let weights: Vec<f64> = cfg
        .move_weights
        .iter()
        .zip(ranges)
        .map(|(&w, r)| if r > 1 { w } else { 0.0 })
        .collect();
    let total_weight: f64 = weights.iter().sum();

    let mut scorer = Scorer::new(bx, ch, &current);
    let mut current_score = scorer.score(&current);
    let mut best = (current.clone(), current_score);
    let mut trace = vec![TracePoint {
        evaluation: 1,
        best_score: current_score,
    }];
    let mut evaluations = 1;
    let mut temperature = cfg.initial_temperature;

    if total_weight > 0.0 {
        'schedule: while temperature > cfg.min_temperature {
            for _ in 0..cfg.steps_per_temperature {
                if evaluations >= cfg.max_evaluations {
                    break 'schedule;
                }
                let mut pick = rng.gen::<f64>() * total_weight;
                let table = weights
                    .iter()
                    .position(|&w| {
                        pick -= w;
                        pick < 0.0 && w > 0.0
                    })
                    .unwrap_or_else(|| {
                        weights.iter().rposition(|&w| w > 0.0).expect("some weight")
                    });
                let entries = match table {
                    0 => &mut current.x_table,
                    1 => &mut current.m_table,
                    _ => &mut current.decoder_table,
                };
                let slot = rng.gen_range(0..entries.len());
                let old = entries[slot];
                // uniform over the other values
                let new = (old + 1 + rng.gen_range(0..ranges[table] - 1)) % ranges[table];
                entries[slot] = new;

                let candidate = scorer.score(&current);
                evaluations += 1;
                let delta = candidate - current_score;
                if delta >= 0.0 || rng.gen::<f64>() < (delta / temperature).exp() {
                    current_score = candidate;
                    if candidate > best.1 {
                        best = (current.clone(), candidate);
                        trace.push(TracePoint {
                            evaluation: evaluations,
                            best_score: candidate,
                        });
                    }
                } else {
                    let entries = match table {
                        0 => &mut current.x_table,
                        1 => &mut current.m_table,
                        _ => &mut current.decoder_table,
                    };
                    entries[slot] = old;
                }
            }
            temperature *= cfg.cooling;
        }
    }

    let hit_cap = evaluations >= cfg.max_evaluations && temperature > cfg.min_temperature;
    let (mut protocol, score) = best;
    protocol.name = Some(format!("annealed (seed {})", cfg.seed));
    Ok(SearchOutcome {
        protocol,
        score,
        evaluations,
        hit_cap,
        seed: cfg.seed,
        trace,
    })
}

/// Independent chains, one per seed. The best score wins; ties go to the
/// lower seed.
pub fn anneal_many(
    bx: &BipartiteBox,
    ch: &DiscreteChannel,
    n_data: usize,
    cfg: &SearchConfig,
    seeds: &[u64],
) -> Result<SearchOutcome> {
    let runs = seeds
        .par_iter()
        .map(|&seed| {
            let cfg = SearchConfig {
                seed,
                ..cfg.clone()
            };
            anneal_protocol(bx, ch, n_data, &cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    runs.into_iter()
        .reduce(|a, b| {
            if b.score > a.score || (b.score == a.score && b.seed < a.seed) {
                b
            } else {
                a
            }
        })
        .ok_or_else(|| Error::Validation("no seeds given".into()))
}

/// Number of candidate evaluations an exhaustive search over binary data needs.
///
/// Decoders for different indices are independent, so the count is
/// `|x tables| * |m tables| * N * |decoders per index|`.
pub fn enumeration_size(bx: &BipartiteBox, ch: &DiscreteChannel, n_data: usize, q: usize) -> f64 {
    let (na, nb, nx, _) = bx.shape();
    let tuples = (q as f64).powi(n_data as i32);
    let d = ch.d() as f64;
    (nx as f64).powf(tuples)
        * d.powf(tuples * na as f64)
        * n_data as f64
        * (q as f64).powf(d * nb as f64)
}

/// Globally optimal protocol over binary data with `y = i mod ny`, by
/// enumeration. Refuses when [`enumeration_size`] exceeds [`ENUMERATION_LIMIT`].
pub fn exhaustive_protocol_search(
    bx: &BipartiteBox,
    ch: &DiscreteChannel,
    n_data: usize,
) -> Result<(Protocol, f64)> {
    exhaustive_search_over(bx, ch, n_data, 2)
}

pub fn exhaustive_search_over(
    bx: &BipartiteBox,
    ch: &DiscreteChannel,
    n_data: usize,
    q: usize,
) -> Result<(Protocol, f64)> {
    let size = enumeration_size(bx, ch, n_data, q);
    if !(size <= ENUMERATION_LIMIT) {
        return Err(Error::SearchSpaceTooLarge {
            size,
            limit: ENUMERATION_LIMIT,
        });
    }
    let mut proto = blank_protocol(bx, ch, n_data, q)?;
    let (na, nb, nx, _) = bx.shape();
    let d = ch.d();
    let tuples = proto.tuple_count();
    let digits: Vec<Vec<usize>> = (0..tuples).map(|t| proto.tuple_digits(t)).collect();
    let weight = 1.0 / tuples as f64;
    let x_count = nx.pow(tuples as u32);
    let m_count = d.pow((tuples * na) as u32);
    let dec_count = q.pow((d * nb) as u32);

    let mut best_score = f64::NEG_INFINITY;
    let mut x_table = vec![0; tuples];
    let mut m_table = vec![0; tuples * na];
    let mut kernel = vec![0.0; q * d * nb];

    for xi in 0..x_count {
        radix_digits(xi, nx, &mut x_table);
        for mi in 0..m_count {
            radix_digits(mi, d, &mut m_table);
            let mut total = 0.0;
            let mut decoders = Vec::with_capacity(n_data);
            for (i, &y) in proto.y_map.iter().enumerate() {
                // kernel[a_i][received][b]
                kernel.iter_mut().for_each(|k| *k = 0.0);
                for t in 0..tuples {
                    let base = digits[t][i] * d * nb;
                    for a in 0..na {
                        let m = m_table[t * na + a];
                        for received in 0..d {
                            let r = ch.prob(m, received);
                            if r == 0.0 {
                                continue;
                            }
                            for b in 0..nb {
                                kernel[base + received * nb + b] +=
                                    weight * r * bx.prob(a, b, x_table[t], y);
                            }
                        }
                    }
                }
                let mut best_i = (f64::NEG_INFINITY, 0);
                let mut decoder = vec![0; d * nb];
                for di in 0..dec_count {
                    radix_digits(di, q, &mut decoder);
                    let mut joint = vec![0.0; q * q];
                    for ai in 0..q {
                        for (slot, &guess) in decoder.iter().enumerate() {
                            joint[ai * q + guess] += kernel[ai * d * nb + slot];
                        }
                    }
                    let info = mutual_information(&JointDistribution::new(q, q, joint)?);
                    if info > best_i.0 {
                        best_i = (info, di);
                    }
                }
                total += best_i.0;
                decoders.push(best_i.1);
            }
            if total > best_score {
                best_score = total;
                proto.x_table.copy_from_slice(&x_table);
                proto.m_table.copy_from_slice(&m_table);
                for (i, &di) in decoders.iter().enumerate() {
                    let span = d * nb;
                    radix_digits(di, q, &mut proto.decoder_table[i * span..(i + 1) * span]);
                }
            }
        }
    }
    proto.name = Some("exhaustive optimum".into());
    Ok((proto, best_score))
}

/// Writes `value` in base `radix` into `out`, most significant digit first.
fn radix_digits(mut value: usize, radix: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = value % radix;
        value /= radix;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxes::{box_3322, pr_box};
    use crate::info::binary_entropy;
    use crate::protocol::simulate;

    fn quick(seed: u64) -> SearchConfig {
        SearchConfig {
            cooling: 0.95,
            steps_per_temperature: 100,
            max_evaluations: 20_000,
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn scorer_matches_simulate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let bx = box_3322(0.8).unwrap();
        let ch = crate::channel::symmetric_channel(2, 0.7).unwrap();
        let mut p = blank_protocol(&bx, &ch, 3, 2).unwrap();
        let mut scorer = Scorer::new(&bx, &ch, &p);
        for _ in 0..200 {
            p.x_table.iter_mut().for_each(|v| *v = rng.gen_range(0..3));
            p.m_table.iter_mut().for_each(|v| *v = rng.gen_range(0..2));
            p.decoder_table
                .iter_mut()
                .for_each(|v| *v = rng.gen_range(0..2));
            let want = simulate(&p, &bx, &ch).unwrap().ic_sum;
            assert!((scorer.score(&p) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn config_validation() {
        assert!(SearchConfig::default().validate().is_ok());
        for bad in [
            SearchConfig {
                cooling: 1.0,
                ..Default::default()
            },
            SearchConfig {
                cooling: 0.0,
                ..Default::default()
            },
            SearchConfig {
                steps_per_temperature: 0,
                ..Default::default()
            },
            SearchConfig {
                max_evaluations: 0,
                ..Default::default()
            },
            SearchConfig {
                move_weights: [0.0; 3],
                ..Default::default()
            },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn radix_digits_most_significant_first() {
        let mut out = [0; 3];
        radix_digits(6, 2, &mut out);
        assert_eq!(out, [1, 1, 0]);
        radix_digits(7, 3, &mut out);
        assert_eq!(out, [0, 2, 1]);
    }

    #[test]
    fn exhaustive_finds_van_dam_value() {
        let id = DiscreteChannel::identity(2).unwrap();
        for p in [0.9, 0.95, 1.0] {
            let (proto, score) = exhaustive_protocol_search(&pr_box(p).unwrap(), &id, 2).unwrap();
            let want = 2.0 * (1.0 - binary_entropy(p).unwrap());
            assert!((score - want).abs() < 1e-12, "p={p}: {score} vs {want}");
            let sim = simulate(&proto, &pr_box(p).unwrap(), &id).unwrap();
            assert!((sim.ic_sum - score).abs() < 1e-12);
        }
        let (_, score) = exhaustive_protocol_search(&pr_box(0.5).unwrap(), &id, 2).unwrap();
        // with white noise only a plain message bit carries information
        assert!((score - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exhaustive_refuses_large_spaces() {
        let id = DiscreteChannel::identity(2).unwrap();
        match exhaustive_protocol_search(&box_3322(1.0).unwrap(), &id, 3) {
            Err(Error::SearchSpaceTooLarge { size, .. }) => assert!(size > 1e8),
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn annealing_is_deterministic() {
        let bx = pr_box(0.9).unwrap();
        let id = DiscreteChannel::identity(2).unwrap();
        let a = anneal_protocol(&bx, &id, 2, &quick(11)).unwrap();
        let b = anneal_protocol(&bx, &id, 2, &quick(11)).unwrap();
        assert_eq!(a, b);
        assert!(a
            .trace
            .windows(2)
            .all(|w| w[0].best_score < w[1].best_score));
        assert_eq!(a.trace.last().unwrap().best_score, a.score);
    }

    #[test]
    fn annealing_reaches_van_dam() {
        let bx = pr_box(0.9).unwrap();
        let id = DiscreteChannel::identity(2).unwrap();
        let out = anneal_protocol(&bx, &id, 2, &quick(3)).unwrap();
        let floor = 2.0 * (1.0 - binary_entropy(0.9).unwrap());
        assert!(out.score >= floor - 1e-9, "{}", out.score);
    }

    #[test]
    fn white_noise_box_with_noisy_channel_scores_capacity_at_most() {
        let bx = pr_box(0.5).unwrap();
        let ch = crate::channel::symmetric_channel(2, 0.5).unwrap();
        let out = anneal_protocol(&bx, &ch, 2, &quick(5)).unwrap();
        let cap = crate::channel::closed_form_capacity(2, 0.5).unwrap();
        assert!(out.score <= cap + 1e-12);
    }

    #[test]
    fn anneal_many_prefers_lower_seed_on_ties() {
        let bx = pr_box(1.0).unwrap();
        let id = DiscreteChannel::identity(2).unwrap();
        let best = anneal_many(&bx, &id, 2, &quick(0), &[9, 4, 7]).unwrap();
        assert!((best.score - 2.0).abs() < 1e-12);
        assert_eq!(best.seed, 4);
    }

    #[test]
    fn cap_is_a_flag_not_an_error() {
        let bx = pr_box(0.9).unwrap();
        let id = DiscreteChannel::identity(2).unwrap();
        let cfg = SearchConfig {
            max_evaluations: 50,
            ..Default::default()
        };
        let out = anneal_protocol(&bx, &id, 2, &cfg).unwrap();
        assert!(out.hit_cap);
        assert_eq!(out.evaluations, 50);
    }
}
