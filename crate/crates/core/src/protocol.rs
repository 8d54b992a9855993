//! Random-access-coding protocols and their exact evaluation.
//!
//! A protocol gives the sender `N` data symbols `a_0 .. a_{N-1}`. The sender
//! picks a box setting `x` from the data, sees outcome `a`, and sends one
//! symbol `m` over the channel. To guess `a_i` the receiver uses setting
//! `y_map[i]`, sees `b`, and decodes from the received symbol and `b`.
//!
//! Tables are flat integer arrays keyed by mixed-radix indices:
//!
//! * `x_table[t]`, where `t = sum_i a_i q^(N-1-i)` (so `a_0` is the most
//!   significant digit);
//! * `m_table[t * na + a]`;
//! * `decoder_table[(i * d + m) * nb + b]`.

use serde::{Deserialize, Serialize};

use crate::boxes::BipartiteBox;
use crate::channel::DiscreteChannel;
use crate::error::{Error, Result};
use crate::info::{mutual_information, JointDistribution};

const PROTOCOL_3322_JSON: &str = include_str!("../data/protocol_3322.json");
const VAN_DAM_JSON: &str = include_str!("../data/van_dam.json");

/// Capacity tolerance used when a channel is not symmetric.
pub const CAPACITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProtocolFile")]
pub struct Protocol {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub n_data: usize,
    pub data_alphabet: usize,
    pub message_alphabet: usize,
    pub sender_settings: usize,
    pub receiver_settings: usize,
    pub sender_outcomes: usize,
    pub receiver_outcomes: usize,
    pub x_table: Vec<usize>,
    pub m_table: Vec<usize>,
    pub y_map: Vec<usize>,
    pub decoder_table: Vec<usize>,
    /// Per-symbol prior of the i.i.d. data; uniform when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<Vec<f64>>,
}

#[derive(Deserialize)]
struct ProtocolFile {
    #[serde(default)]
    name: Option<String>,
    n_data: usize,
    data_alphabet: usize,
    message_alphabet: usize,
    sender_settings: usize,
    receiver_settings: usize,
    sender_outcomes: usize,
    receiver_outcomes: usize,
    x_table: Vec<usize>,
    m_table: Vec<usize>,
    y_map: Vec<usize>,
    decoder_table: Vec<usize>,
    #[serde(default)]
    prior: Option<Vec<f64>>,
}

impl TryFrom<ProtocolFile> for Protocol {
    type Error = Error;

    fn try_from(f: ProtocolFile) -> Result<Self> {
        let p = Protocol {
            name: f.name,
            n_data: f.n_data,
            data_alphabet: f.data_alphabet,
            message_alphabet: f.message_alphabet,
            sender_settings: f.sender_settings,
            receiver_settings: f.receiver_settings,
            sender_outcomes: f.sender_outcomes,
            receiver_outcomes: f.receiver_outcomes,
            x_table: f.x_table,
            m_table: f.m_table,
            y_map: f.y_map,
            decoder_table: f.decoder_table,
            prior: f.prior,
        };
        p.validate()?;
        Ok(p)
    }
}

fn table_error(table: &'static str, detail: String) -> Error {
    Error::Shape {
        component: table,
        detail,
    }
}

fn check_table(name: &'static str, table: &[usize], len: usize, range: usize) -> Result<()> {
    if table.len() != len {
        return Err(table_error(
            name,
            format!("has {} entries, expected {len}", table.len()),
        ));
    }
    if let Some(k) = table.iter().position(|&v| v >= range) {
        return Err(table_error(
            name,
            format!("entry {k} = {} is outside 0..{range}", table[k]),
        ));
    }
    Ok(())
}

impl Protocol {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("protocol serializes")
    }

    /// Number of data tuples, `q^N`.
    pub fn tuple_count(&self) -> usize {
        self.data_alphabet.pow(self.n_data as u32)
    }

    /// Digits `(a_0, .., a_{N-1})` of a tuple index.
    pub fn tuple_digits(&self, mut t: usize) -> Vec<usize> {
        let mut digits = vec![0; self.n_data];
        for slot in digits.iter_mut().rev() {
            *slot = t % self.data_alphabet;
            t /= self.data_alphabet;
        }
        digits
    }

    pub fn tuple_index(&self, digits: &[usize]) -> usize {
        digits.iter().fold(0, |t, &a| t * self.data_alphabet + a)
    }

    #[inline]
    pub fn setting(&self, t: usize) -> usize {
        self.x_table[t]
    }

    #[inline]
    pub fn message(&self, t: usize, a: usize) -> usize {
        self.m_table[t * self.sender_outcomes + a]
    }

    #[inline]
    pub fn guess(&self, i: usize, received: usize, b: usize) -> usize {
        self.decoder_table[(i * self.message_alphabet + received) * self.receiver_outcomes + b]
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("n_data", self.n_data),
            ("data_alphabet", self.data_alphabet),
            ("message_alphabet", self.message_alphabet),
            ("sender_settings", self.sender_settings),
            ("receiver_settings", self.receiver_settings),
            ("sender_outcomes", self.sender_outcomes),
            ("receiver_outcomes", self.receiver_outcomes),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(table_error("protocol", format!("{name} must be positive")));
        }
        let tuples = self
            .data_alphabet
            .checked_pow(self.n_data as u32)
            .filter(|t| *t <= 1 << 24)
            .ok_or_else(|| table_error("protocol", "data space too large".into()))?;
        check_table("x_table", &self.x_table, tuples, self.sender_settings)?;
        check_table(
            "m_table",
            &self.m_table,
            tuples * self.sender_outcomes,
            self.message_alphabet,
        )?;
        check_table("y_map", &self.y_map, self.n_data, self.receiver_settings)?;
        check_table(
            "decoder_table",
            &self.decoder_table,
            self.n_data * self.message_alphabet * self.receiver_outcomes,
            self.data_alphabet,
        )?;
        if let Some(prior) = &self.prior {
            JointDistribution::new(1, self.data_alphabet, prior.clone()).map_err(|e| {
                table_error(
                    "prior",
                    format!("not a distribution over the data alphabet: {e}"),
                )
            })?;
        }
        Ok(())
    }

    pub fn check_compatible(&self, bx: &BipartiteBox, ch: &DiscreteChannel) -> Result<()> {
        let want = (
            self.sender_outcomes,
            self.receiver_outcomes,
            self.sender_settings,
            self.receiver_settings,
        );
        if bx.shape() != want {
            return Err(Error::Shape {
                component: "box",
                detail: format!(
                    "protocol expects (na, nb, nx, ny) = {want:?}, box has {:?}",
                    bx.shape()
                ),
            });
        }
        if ch.d() != self.message_alphabet {
            return Err(Error::Shape {
                component: "channel",
                detail: format!(
                    "protocol sends {} symbols, channel has size {}",
                    self.message_alphabet,
                    ch.d()
                ),
            });
        }
        Ok(())
    }

    fn tuple_weights(&self) -> Vec<f64> {
        let tuples = self.tuple_count();
        match &self.prior {
            None => vec![1.0 / tuples as f64; tuples],
            Some(prior) => (0..tuples)
                .map(|t| self.tuple_digits(t).iter().map(|&a| prior[a]).product())
                .collect(),
        }
    }
}

/// The CHSH protocol, generalized to `d`-ary data over [`crate::boxes::dary_pr_box`]:
/// `x = a_1 - a_0`, `m = a_0 - a`, `y = i`, `b_i = m' + b` (all mod `d`).
/// For `d = 2` this is `x = a_0 xor a_1`, `m = a_0 xor a`, `b_i = m' xor b`.
pub fn dary_van_dam_protocol(d: usize) -> Result<Protocol> {
    crate::error::check_alphabet("d", d)?;
    let mut p = Protocol {
        name: Some(if d == 2 {
            "van Dam".into()
        } else {
            format!("van Dam (d = {d})")
        }),
        n_data: 2,
        data_alphabet: d,
        message_alphabet: d,
        sender_settings: d,
        receiver_settings: 2,
        sender_outcomes: d,
        receiver_outcomes: d,
        x_table: Vec::with_capacity(d * d),
        m_table: Vec::with_capacity(d * d * d),
        y_map: vec![0, 1],
        decoder_table: Vec::with_capacity(2 * d * d),
        prior: None,
    };
    for a0 in 0..d {
        for a1 in 0..d {
            p.x_table.push((a1 + d - a0) % d);
            for a in 0..d {
                p.m_table.push((a0 + d - a) % d);
            }
        }
    }
    for _ in 0..2 {
        for m in 0..d {
            for b in 0..d {
                p.decoder_table.push((m + b) % d);
            }
        }
    }
    p.validate()?;
    Ok(p)
}

pub fn van_dam_protocol() -> Protocol {
    dary_van_dam_protocol(2).expect("binary protocol is valid")
}

/// Setting choice of the 3322 protocol, indexed by `(a_0, a_1, a_2)`.
pub const X_TABLE_3322: [usize; 8] = [0, 2, 0, 1, 1, 0, 2, 0];

/// Three-bit protocol for the 3322 box: `x` from [`X_TABLE_3322`],
/// `m = a_0 xor a xor 1`, `y = i`, and guesses `b_0 = m xor b xor 1`,
/// `b_1 = m xor b`, `b_2 = m xor b xor 1`.
pub fn protocol_3322() -> Protocol {
    let flips = [1, 0, 1];
    let mut m_table = Vec::with_capacity(16);
    for t in 0..8usize {
        let a0 = t >> 2;
        for a in 0..2 {
            m_table.push(a0 ^ a ^ 1);
        }
    }
    let mut decoder_table = Vec::with_capacity(12);
    for flip in flips {
        for m in 0..2 {
            for b in 0..2 {
                decoder_table.push(m ^ b ^ flip);
            }
        }
    }
    Protocol {
        name: Some("3322".into()),
        n_data: 3,
        data_alphabet: 2,
        message_alphabet: 2,
        sender_settings: 3,
        receiver_settings: 3,
        sender_outcomes: 2,
        receiver_outcomes: 2,
        x_table: X_TABLE_3322.to_vec(),
        m_table,
        y_map: vec![0, 1, 2],
        decoder_table,
        prior: None,
    }
}

/// The bundled JSON fixtures.
pub fn protocol_3322_fixture() -> &'static str {
    PROTOCOL_3322_JSON
}

pub fn van_dam_fixture() -> &'static str {
    VAN_DAM_JSON
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationResult {
    /// Joint distribution of `(a_i, b_i)` per index.
    pub joints: Vec<JointDistribution>,
    /// `P(b_i = a_i)` per index.
    pub success: Vec<f64>,
    /// `I(a_i; b_i)` per index, in bits.
    pub information: Vec<f64>,
    pub ic_sum: f64,
}

/// Exact evaluation by enumerating data tuples, sender outcomes, channel
/// transitions and receiver outcomes.
pub fn simulate(
    proto: &Protocol,
    bx: &BipartiteBox,
    ch: &DiscreteChannel,
) -> Result<SimulationResult> {
    proto.validate()?;
    proto.check_compatible(bx, ch)?;
    let q = proto.data_alphabet;
    let d = proto.message_alphabet;
    let (na, nb, _, _) = bx.shape();
    let weights = proto.tuple_weights();

    let mut tables = vec![vec![0.0; q * q]; proto.n_data];
    for (t, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let digits = proto.tuple_digits(t);
        let x = proto.setting(t);
        for (i, table) in tables.iter_mut().enumerate() {
            let y = proto.y_map[i];
            let row = digits[i] * q;
            for a in 0..na {
                let m = proto.message(t, a);
                for b in 0..nb {
                    let pab = bx.prob(a, b, x, y);
                    if pab == 0.0 {
                        continue;
                    }
                    for received in 0..d {
                        let r = ch.prob(m, received);
                        if r != 0.0 {
                            table[row + proto.guess(i, received, b)] += w * pab * r;
                        }
                    }
                }
            }
        }
    }

    let joints = tables
        .into_iter()
        .map(|t| JointDistribution::new(q, q, t))
        .collect::<Result<Vec<_>>>()?;
    let success: Vec<f64> = joints
        .iter()
        .map(JointDistribution::diagonal_mass)
        .collect();
    let information: Vec<f64> = joints.iter().map(mutual_information).collect();
    let ic_sum = information.iter().sum();
    Ok(SimulationResult {
        joints,
        success,
        information,
        ic_sum,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IcCheck {
    pub capacity: f64,
    pub ic_sum: f64,
    /// `capacity - ic_sum`; negative means the box violates IC with this protocol.
    pub margin: f64,
}

pub fn ic_report(proto: &Protocol, bx: &BipartiteBox, ch: &DiscreteChannel) -> Result<IcCheck> {
    let sim = simulate(proto, bx, ch)?;
    let capacity = ch.capacity(CAPACITY_TOL)?;
    Ok(IcCheck {
        capacity,
        ic_sum: sim.ic_sum,
        margin: capacity - sim.ic_sum,
    })
}

/// `C - sum_i I(a_i; b_i)`.
pub fn ic_check(proto: &Protocol, bx: &BipartiteBox, ch: &DiscreteChannel) -> Result<f64> {
    ic_report(proto, bx, ch).map(|r| r.margin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxes::{box_3322, dary_pr_box, parity_3322, pr_box};
    use crate::channel::symmetric_channel;
    use crate::info::{binary_entropy, fano_information};

    fn identity2() -> DiscreteChannel {
        DiscreteChannel::identity(2).unwrap()
    }

    #[test]
    fn van_dam_tables() {
        let p = van_dam_protocol();
        assert_eq!(p.x_table, vec![0, 1, 1, 0]);
        assert_eq!(p.m_table, vec![0, 1, 0, 1, 1, 0, 1, 0]);
        assert_eq!(p.decoder_table, vec![0, 1, 1, 0, 0, 1, 1, 0]);
    }

    #[test]
    fn van_dam_information_is_one_minus_h() {
        for p in [0.5, 0.75, 0.854, 0.9, 1.0] {
            let sim = simulate(&van_dam_protocol(), &pr_box(p).unwrap(), &identity2()).unwrap();
            let want = 1.0 - binary_entropy(p).unwrap();
            for (s, info) in sim.success.iter().zip(&sim.information) {
                assert!((s - p).abs() < 1e-15);
                assert!((info - want).abs() < 1e-12);
            }
            assert!((sim.ic_sum - 2.0 * want).abs() < 1e-12);
        }
        let sim = simulate(&van_dam_protocol(), &pr_box(0.854).unwrap(), &identity2()).unwrap();
        // 2 (1 - h(0.854)) evaluated directly
        assert!((sim.ic_sum - 0.800_521_781_300_588_5).abs() < 1e-12);
    }

    #[test]
    fn van_dam_over_noisy_channel() {
        for (p, ec) in [(0.9, 0.5), (0.8, 0.3), (1.0, 0.77)] {
            let e = 2.0 * p - 1.0;
            let ch = symmetric_channel(2, ec).unwrap();
            let sim = simulate(&van_dam_protocol(), &pr_box(p).unwrap(), &ch).unwrap();
            for (s, info) in sim.success.iter().zip(&sim.information) {
                assert!((s - (1.0 + ec * e) / 2.0).abs() < 1e-14);
                assert!((info - fano_information(2, e * ec).unwrap()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn dary_van_dam_has_unbiased_errors() {
        for d in [3usize, 4] {
            let p = 0.8;
            let e = crate::info::probability_to_bias(d, p);
            let ec = 0.6;
            let sim = simulate(
                &dary_van_dam_protocol(d).unwrap(),
                &dary_pr_box(d, p).unwrap(),
                &symmetric_channel(d, ec).unwrap(),
            )
            .unwrap();
            let unbiased = JointDistribution::unbiased_errors(d, e * ec).unwrap();
            for j in &sim.joints {
                for (got, want) in j.weights().iter().zip(unbiased.weights()) {
                    assert!((got - want).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn protocol_3322_truth_table() {
        let p = protocol_3322();
        assert_eq!(p.setting(p.tuple_index(&[0, 1, 1])), 1);
        assert_eq!(p.setting(p.tuple_index(&[1, 1, 0])), 2);
        assert_eq!(p.setting(p.tuple_index(&[0, 0, 1])), 2);
        p.validate().unwrap();
    }

    #[test]
    fn protocol_3322_perfect_box() {
        let sim = simulate(&protocol_3322(), &box_3322(1.0).unwrap(), &identity2()).unwrap();
        assert_eq!(sim.success, vec![1.0, 0.75, 1.0]);
        // guess b_0 = a_0 xor f(x, 0), and f(x, 0) = 0 for every x
        assert!((0..3).all(|x| parity_3322(x, 0) == 0));
    }

    #[test]
    fn fixtures_match_constructors() {
        assert_eq!(
            Protocol::from_json(protocol_3322_fixture()).unwrap(),
            protocol_3322()
        );
        assert_eq!(
            Protocol::from_json(van_dam_fixture()).unwrap(),
            van_dam_protocol()
        );
    }

    #[test]
    fn ic_check_examples() {
        let id = identity2();
        let m = ic_check(&van_dam_protocol(), &pr_box(1.0).unwrap(), &id).unwrap();
        assert!((m + 1.0).abs() < 1e-14);
        let m = ic_check(&van_dam_protocol(), &pr_box(0.75).unwrap(), &id).unwrap();
        let want = 1.0 - 2.0 * (1.0 - binary_entropy(0.75).unwrap());
        assert!(m > 0.0 && (m - want).abs() < 1e-12);
        let m = ic_check(&van_dam_protocol(), &pr_box(0.890).unwrap(), &id).unwrap();
        assert!(m.abs() < 2e-3, "{m}");
    }

    #[test]
    fn shape_errors_name_component() {
        let err = simulate(&van_dam_protocol(), &box_3322(1.0).unwrap(), &identity2()).unwrap_err();
        assert!(matches!(
            err,
            Error::Shape {
                component: "box",
                ..
            }
        ));
        let ch3 = symmetric_channel(3, 0.5).unwrap();
        let err = simulate(&van_dam_protocol(), &pr_box(0.9).unwrap(), &ch3).unwrap_err();
        assert!(matches!(
            err,
            Error::Shape {
                component: "channel",
                ..
            }
        ));
        let mut bad = van_dam_protocol();
        bad.decoder_table[3] = 2;
        let err = simulate(&bad, &pr_box(0.9).unwrap(), &identity2()).unwrap_err();
        assert!(matches!(
            err,
            Error::Shape {
                component: "decoder_table",
                ..
            }
        ));
    }

    #[test]
    fn nonuniform_prior_is_accepted() {
        let mut p = van_dam_protocol();
        p.prior = Some(vec![0.7, 0.3]);
        let sim = simulate(&p, &pr_box(1.0).unwrap(), &identity2()).unwrap();
        let h = binary_entropy(0.7).unwrap();
        assert!((sim.ic_sum - 2.0 * h).abs() < 1e-12);
        p.prior = Some(vec![0.7, 0.4]);
        assert!(p.validate().is_err());
    }
}
