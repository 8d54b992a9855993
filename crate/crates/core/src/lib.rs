//! Information Causality bounds on nonsignaling boxes.
//!
//! A box `P(a, b | x, y)` is plugged into a random access code: the sender
//! encodes `N` data symbols into one box input and one message, the message
//! crosses a discrete memoryless channel, and the receiver guesses any one
//! symbol. Information Causality requires
//!
//! ```text
//! sum_i I(a_i; b_i) <= C
//! ```
//!
//! for the channel capacity `C`. Mixing the box with white noise and
//! tuning the channel noise turns this into a bound on how nonlocal the box
//! may be, without concatenating many boxes.
//!
//! | module | contents |
//! |---|---|
//! | [`info`] | entropies, mutual information, `I_d(e)` |
//! | [`boxes`] | boxes, no-signaling checks, Bell functionals |
//! | [`channel`] | symmetric and general channels, capacities |
//! | [`protocol`] | protocol tables and exact simulation |
//! | [`bounds`] | all bound solvers |
//! | [`search`] | protocol search by annealing and enumeration |

// negated comparisons are how NaN inputs get rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod boxes;
pub mod channel;
pub mod error;
pub mod info;
pub mod protocol;
pub mod search;

pub use bounds::{
    best_concatenation_bound, concatenation_bound, limit_bound, optimize_channel_bias,
    protocol_bound, result1_witness, solve_symmetric_bound, sweep_fig1, table1, BoundResult,
    ConcatenationQuery, LimitBound, Result1Report, Table1Row,
};
pub use boxes::{
    bell_value, box_3322, dary_pr_box, pr_box, validate_no_signaling, BellFunctional, BipartiteBox,
    NoSignalingReport, Violation,
};
pub use channel::{
    closed_form_capacity, iterative_capacity, symmetric_channel, CapacityEstimate, DiscreteChannel,
};
pub use error::{Error, Result};
pub use info::{
    binary_entropy, fano_information, mutual_information, BiasedProbability, JointDistribution,
};
pub use protocol::{
    dary_van_dam_protocol, ic_check, protocol_3322, simulate, van_dam_protocol, Protocol,
    SimulationResult,
};
pub use search::{anneal_protocol, exhaustive_protocol_search, SearchConfig, SearchOutcome};

/// Quantum maximum of the CHSH winning probability, `(1 + 1/sqrt 2) / 2`.
pub const TSIRELSON_P: f64 = 0.853_553_390_593_273_8;
/// Quantum bound on the 3322 mixing parameter, reported only as a reference.
pub const QUANTUM_3322_E: f64 = 0.6;
