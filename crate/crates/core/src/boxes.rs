//! Bipartite nonsignaling boxes `P(a, b | x, y)` and linear Bell functionals.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_alphabet, check_unit, Error, Result};

/// Default tolerance for normalization and marginal equalities.
pub const NS_TOL: f64 = 1e-10;

const I3322_JSON: &str = include_str!("../data/i3322.json");

type Tensor4 = Vec<Vec<Vec<Vec<f64>>>>;

/// Dense tensor `P(a, b | x, y)`, flat index `((x * ny + y) * na + a) * nb + b`.
///
/// Construction only checks shape and nonnegativity. Normalization and
/// no-signaling are reported by [`validate_no_signaling`], so that a
/// signaling tensor can still be loaded and diagnosed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TensorFile", into = "TensorFile")]
pub struct BipartiteBox {
    na: usize,
    nb: usize,
    nx: usize,
    ny: usize,
    probs: Vec<f64>,
}

/// JSON layout shared by boxes and functionals: nested arrays `[x][y][a][b]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct TensorFile {
    na: usize,
    nb: usize,
    nx: usize,
    ny: usize,
    probs: Tensor4,
}

fn flatten(
    component: &'static str,
    (na, nb, nx, ny): (usize, usize, usize, usize),
    nested: &Tensor4,
) -> Result<Vec<f64>> {
    let bad = |path: String, want: usize, got: usize| Error::Shape {
        component,
        detail: format!("{path} has length {got}, expected {want}"),
    };
    if nested.len() != nx {
        return Err(bad("[]".into(), nx, nested.len()));
    }
    let mut flat = Vec::with_capacity(na * nb * nx * ny);
    for (x, by_y) in nested.iter().enumerate() {
        if by_y.len() != ny {
            return Err(bad(format!("[{x}]"), ny, by_y.len()));
        }
        for (y, by_a) in by_y.iter().enumerate() {
            if by_a.len() != na {
                return Err(bad(format!("[{x}][{y}]"), na, by_a.len()));
            }
            for (a, by_b) in by_a.iter().enumerate() {
                if by_b.len() != nb {
                    return Err(bad(format!("[{x}][{y}][{a}]"), nb, by_b.len()));
                }
                flat.extend_from_slice(by_b);
            }
        }
    }
    Ok(flat)
}

fn nest((na, nb, nx, ny): (usize, usize, usize, usize), flat: &[f64]) -> Tensor4 {
    let mut it = flat.iter().copied();
    (0..nx)
        .map(|_| {
            (0..ny)
                .map(|_| (0..na).map(|_| it.by_ref().take(nb).collect()).collect())
                .collect()
        })
        .collect()
}

impl TryFrom<TensorFile> for BipartiteBox {
    type Error = Error;

    fn try_from(f: TensorFile) -> Result<Self> {
        let probs = flatten("box", (f.na, f.nb, f.nx, f.ny), &f.probs)?;
        Self::new(f.na, f.nb, f.nx, f.ny, probs)
    }
}

impl From<BipartiteBox> for TensorFile {
    fn from(b: BipartiteBox) -> Self {
        TensorFile {
            probs: nest(b.shape(), &b.probs),
            na: b.na,
            nb: b.nb,
            nx: b.nx,
            ny: b.ny,
        }
    }
}

impl BipartiteBox {
    pub fn new(na: usize, nb: usize, nx: usize, ny: usize, probs: Vec<f64>) -> Result<Self> {
        if na == 0 || nb == 0 || nx == 0 || ny == 0 || probs.len() != na * nb * nx * ny {
            return Err(Error::Shape {
                component: "box",
                detail: format!(
                    "{} entries for na={na}, nb={nb}, nx={nx}, ny={ny}",
                    probs.len()
                ),
            });
        }
        if let Some(k) = probs.iter().position(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::Validation(format!(
                "box entry {k} = {} is not a nonnegative number",
                probs[k]
            )));
        }
        Ok(Self {
            na,
            nb,
            nx,
            ny,
            probs,
        })
    }

    pub fn from_fn(
        na: usize,
        nb: usize,
        nx: usize,
        ny: usize,
        f: impl Fn(usize, usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut probs = Vec::with_capacity(na * nb * nx * ny);
        for x in 0..nx {
            for y in 0..ny {
                for a in 0..na {
                    for b in 0..nb {
                        probs.push(f(a, b, x, y));
                    }
                }
            }
        }
        Self::new(na, nb, nx, ny, probs)
    }

    /// Uniform outcomes for every pair of settings.
    pub fn white_noise(na: usize, nb: usize, nx: usize, ny: usize) -> Result<Self> {
        let w = 1.0 / (na * nb) as f64;
        Self::new(na, nb, nx, ny, vec![w; na * nb * nx * ny])
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("box serializes")
    }

    /// `(na, nb, nx, ny)`.
    pub fn shape(&self) -> (usize, usize, usize, usize) {
        (self.na, self.nb, self.nx, self.ny)
    }

    pub fn sender_outcomes(&self) -> usize {
        self.na
    }

    pub fn receiver_outcomes(&self) -> usize {
        self.nb
    }

    pub fn sender_settings(&self) -> usize {
        self.nx
    }

    pub fn receiver_settings(&self) -> usize {
        self.ny
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    #[inline]
    pub fn prob(&self, a: usize, b: usize, x: usize, y: usize) -> f64 {
        self.probs[((x * self.ny + y) * self.na + a) * self.nb + b]
    }

    /// `weight * self + (1 - weight) * other`, entrywise.
    pub fn mix(&self, weight: f64, other: &Self) -> Result<Self> {
        check_unit("weight", weight)?;
        if self.shape() != other.shape() {
            return Err(Error::Shape {
                component: "box",
                detail: format!("cannot mix {:?} with {:?}", self.shape(), other.shape()),
            });
        }
        let probs = self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(p, q)| weight * p + (1.0 - weight) * q)
            .collect();
        Self::new(self.na, self.nb, self.nx, self.ny, probs)
    }

    /// `e * self + (1 - e) * white noise`.
    pub fn mix_with_white_noise(&self, e: f64) -> Result<Self> {
        let (na, nb, nx, ny) = self.shape();
        self.mix(e, &Self::white_noise(na, nb, nx, ny)?)
    }
}

/// Isotropic CHSH box: `a xor b = x * y` with probability `p`, uniform marginals.
pub fn pr_box(p: f64) -> Result<BipartiteBox> {
    check_unit("p", p)?;
    BipartiteBox::from_fn(2, 2, 2, 2, |a, b, x, y| {
        if a ^ b == x & y {
            p / 2.0
        } else {
            (1.0 - p) / 2.0
        }
    })
}

/// `d`-outcome generalization with `d` sender settings and two receiver
/// settings: `b - a = x * y (mod d)` with probability `p`, every other
/// difference equally likely, uniform marginals.
pub fn dary_pr_box(d: usize, p: f64) -> Result<BipartiteBox> {
    check_alphabet("d", d)?;
    check_unit("p", p)?;
    let df = d as f64;
    BipartiteBox::from_fn(d, d, d, 2, |a, b, x, y| {
        if (a + x * y) % d == b {
            p / df
        } else {
            (1.0 - p) / (df * (df - 1.0))
        }
    })
}

/// Parity rule of the 3322 box: `a xor b = 1` exactly for settings
/// `(1,2), (2,1), (2,2)`.
pub fn parity_3322(x: usize, y: usize) -> usize {
    usize::from(matches!((x, y), (1, 2) | (2, 1) | (2, 2)))
}

/// `e * P_NS + (1 - e) * P_L` for the extremal 3322 box `P_NS`.
pub fn box_3322(e: f64) -> Result<BipartiteBox> {
    check_unit("e", e)?;
    BipartiteBox::from_fn(2, 2, 3, 3, |a, b, x, y| {
        let ns = if a ^ b == parity_3322(x, y) { 0.5 } else { 0.0 };
        e * ns + (1.0 - e) * 0.25
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// `sum_{a,b} P(a,b|x,y) != 1`.
    Normalization { x: usize, y: usize, deviation: f64 },
    /// Receiver marginal `P(b|x,y)` depends on the sender setting `x`.
    SenderSignals {
        b: usize,
        y: usize,
        x: usize,
        deviation: f64,
    },
    /// Sender marginal `P(a|x,y)` depends on the receiver setting `y`.
    ReceiverSignals {
        a: usize,
        x: usize,
        y: usize,
        deviation: f64,
    },
}

impl Violation {
    pub fn magnitude(&self) -> f64 {
        match *self {
            Violation::Normalization { deviation, .. }
            | Violation::SenderSignals { deviation, .. }
            | Violation::ReceiverSignals { deviation, .. } => deviation,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::Normalization { x, y, deviation } => {
                write!(f, "P(.,.|x={x},y={y}) sums to 1 {deviation:+.3e}")
            }
            Violation::SenderSignals { b, y, x, deviation } => write!(
                f,
                "receiver marginal P(b={b}|y={y}) differs at x={x} from x=0 by {deviation:.3e}"
            ),
            Violation::ReceiverSignals { a, x, y, deviation } => write!(
                f,
                "sender marginal P(a={a}|x={x}) differs at y={y} from y=0 by {deviation:.3e}"
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct NoSignalingReport {
    pub violations: Vec<Violation>,
}

impl NoSignalingReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn max_violation(&self) -> f64 {
        self.violations
            .iter()
            .map(Violation::magnitude)
            .fold(0.0, f64::max)
    }
}

/// Checks normalization of every block and both no-signaling directions.
/// Marginals are compared against setting 0 of the other party.
pub fn validate_no_signaling(bx: &BipartiteBox, tol: f64) -> NoSignalingReport {
    let (na, nb, nx, ny) = bx.shape();
    let mut violations = Vec::new();

    for x in 0..nx {
        for y in 0..ny {
            let total: f64 = (0..na)
                .flat_map(|a| (0..nb).map(move |b| (a, b)))
                .map(|(a, b)| bx.prob(a, b, x, y))
                .sum();
            if (total - 1.0).abs() > tol {
                violations.push(Violation::Normalization {
                    x,
                    y,
                    deviation: total - 1.0,
                });
            }
        }
    }

    let alice = |a: usize, x: usize, y: usize| (0..nb).map(|b| bx.prob(a, b, x, y)).sum::<f64>();
    let bob = |b: usize, x: usize, y: usize| (0..na).map(|a| bx.prob(a, b, x, y)).sum::<f64>();

    for y in 0..ny {
        for b in 0..nb {
            let reference = bob(b, 0, y);
            for x in 1..nx {
                let deviation = (bob(b, x, y) - reference).abs();
                if deviation > tol {
                    violations.push(Violation::SenderSignals { b, y, x, deviation });
                }
            }
        }
    }
    for x in 0..nx {
        for a in 0..na {
            let reference = alice(a, x, 0);
            for y in 1..ny {
                let deviation = (alice(a, x, y) - reference).abs();
                if deviation > tol {
                    violations.push(Violation::ReceiverSignals { a, x, y, deviation });
                }
            }
        }
    }
    NoSignalingReport { violations }
}

/// Linear functional `sum c(a,b,x,y) P(a,b|x,y)` over a fixed box shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FunctionalFile", into = "FunctionalFile")]
pub struct BellFunctional {
    pub name: String,
    shape: (usize, usize, usize, usize),
    coefficients: Vec<f64>,
    pub classical_bound: Option<f64>,
    pub nonsignaling_max: Option<f64>,
    /// Free-form metadata carried through serialization.
    pub extra: serde_json::Map<String, serde_json::Value>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FunctionalFile {
    name: String,
    na: usize,
    nb: usize,
    nx: usize,
    ny: usize,
    coefficients: Tensor4,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    classical_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    nonsignaling_max: Option<f64>,
    #[serde(flatten)]
    extra: serde_json::Map<String, serde_json::Value>,
}

impl TryFrom<FunctionalFile> for BellFunctional {
    type Error = Error;

    fn try_from(f: FunctionalFile) -> Result<Self> {
        let shape = (f.na, f.nb, f.nx, f.ny);
        let coefficients = flatten("functional", shape, &f.coefficients)?;
        Ok(Self {
            name: f.name,
            shape,
            coefficients,
            classical_bound: f.classical_bound,
            nonsignaling_max: f.nonsignaling_max,
            extra: f.extra,
        })
    }
}

impl From<BellFunctional> for FunctionalFile {
    fn from(f: BellFunctional) -> Self {
        let (na, nb, nx, ny) = f.shape;
        FunctionalFile {
            coefficients: nest(f.shape, &f.coefficients),
            name: f.name,
            na,
            nb,
            nx,
            ny,
            classical_bound: f.classical_bound,
            nonsignaling_max: f.nonsignaling_max,
            extra: f.extra,
        }
    }
}

impl BellFunctional {
    pub fn new(
        name: impl Into<String>,
        shape: (usize, usize, usize, usize),
        coefficients: Vec<f64>,
    ) -> Result<Self> {
        let (na, nb, nx, ny) = shape;
        if coefficients.len() != na * nb * nx * ny {
            return Err(Error::Shape {
                component: "functional",
                detail: format!("{} coefficients for shape {shape:?}", coefficients.len()),
            });
        }
        Ok(Self {
            name: name.into(),
            shape,
            coefficients,
            classical_bound: None,
            nonsignaling_max: None,
            extra: Default::default(),
        })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn shape(&self) -> (usize, usize, usize, usize) {
        self.shape
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// CHSH as a winning probability: `1/4 sum_{x,y} P(a xor b = x y | x, y)`.
    pub fn chsh() -> Self {
        let mut coefficients = Vec::with_capacity(16);
        for x in 0..2 {
            for y in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        coefficients.push(if a ^ b == x & y { 0.25 } else { 0.0 });
                    }
                }
            }
        }
        let mut f = Self::new("CHSH", (2, 2, 2, 2), coefficients).expect("fixed shape");
        f.classical_bound = Some(0.75);
        f.nonsignaling_max = Some(1.0);
        f
    }

    /// I3322 in Collins-Gisin form, scoring 1 on the extremal 3322 box and
    /// -1 on white noise. Loaded from the bundled data file.
    pub fn i3322() -> Self {
        Self::from_json(I3322_JSON).expect("bundled I3322 file parses")
    }
}

pub fn bell_value(bx: &BipartiteBox, f: &BellFunctional) -> Result<f64> {
    if bx.shape() != f.shape {
        return Err(Error::Shape {
            component: "functional",
            detail: format!(
                "{} expects box shape {:?}, got {:?}",
                f.name,
                f.shape,
                bx.shape()
            ),
        });
    }
    Ok(bx
        .probs
        .iter()
        .zip(&f.coefficients)
        .map(|(p, c)| p * c)
        .sum())
}
