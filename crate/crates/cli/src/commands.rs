use std::fs;
use std::path::Path;

use ic_core::bounds::white_noise_family;
use ic_core::protocol::protocol_3322_fixture;
use ic_core::search::{anneal_protocol, exhaustive_protocol_search, SearchConfig, GENERATOR};
use ic_core::{
    bell_value, box_3322, closed_form_capacity, iterative_capacity, limit_bound, pr_box,
    protocol_bound, solve_symmetric_bound, sweep_fig1, symmetric_channel, validate_no_signaling,
    van_dam_protocol, BellFunctional, BipartiteBox, BoundResult, DiscreteChannel, Protocol,
    Violation, QUANTUM_3322_E,
};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use crate::output::{csv, emit, sig6, Body};
use crate::{
    AppError, BoundArgs, CapacityArgs, ChannelChoice, ChshArgs, Fig1Args, Format, I3322Args,
    I3322Mode, SearchArgs, ValidateArgs,
};

pub struct Context<'a> {
    pub tol: f64,
    pub out: Option<&'a Path>,
    pub name: &'static str,
    pub params: Value,
}

impl Context<'_> {
    fn emit(&self, body: Body, seeds: Vec<u64>) -> Result<(), AppError> {
        emit(body, self.out, self.name, self.params.clone(), seeds)
    }
}

/// Reads a JSON file, reporting schema errors with the field path.
fn load<T: DeserializeOwned>(path: &Path, what: &str) -> Result<T, AppError> {
    let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        AppError::validation(format!(
            "{what} file {}: at `{}`: {}",
            path.display(),
            e.path(),
            e.inner()
        ))
    })
}

fn resolve_channel(choice: &ChannelChoice, d: usize) -> Result<Option<DiscreteChannel>, AppError> {
    match (&choice.channel, choice.ec) {
        (Some(path), _) => load(path, "channel").map(Some),
        (None, Some(ec)) => Ok(Some(symmetric_channel(d, ec)?)),
        (None, None) => Ok(None),
    }
}

const BOUND_HEADER: [&str; 3] = ["e_c", "e_bound", "p_bound"];

fn bound_row(e_c: Option<f64>, r: &BoundResult) -> Vec<String> {
    vec![
        e_c.map(sig6).unwrap_or_default(),
        sig6(r.e_bound),
        sig6(r.p_bound),
    ]
}

pub fn chsh(ctx: &Context, a: &ChshArgs) -> Result<(), AppError> {
    let body = if a.limit {
        let pr = pr_box(1.0)?;
        let lim = limit_bound(&van_dam_protocol(), &white_noise_family(&pr), 2, a.fit_tol)?;
        limit_body(a.format, &lim)?
    } else {
        let r = solve_symmetric_bound(2, 2, a.ec, ctx.tol)?;
        match a.format {
            Format::Csv => Body::Csv(csv(&BOUND_HEADER, [bound_row(Some(a.ec), &r)])),
            Format::Json => Body::json(&r)?,
        }
    };
    ctx.emit(body, vec![])
}

fn limit_body(format: Format, lim: &ic_core::LimitBound) -> Result<Body, AppError> {
    Ok(match format {
        Format::Csv => Body::Csv(csv(&BOUND_HEADER, [bound_row(Some(0.0), &lim.bound)])),
        Format::Json => Body::json(lim)?,
    })
}

pub fn table1(ctx: &Context) -> Result<(), AppError> {
    let rows = ic_core::table1(ctx.tol)?;
    let body = csv(
        &["d", "e_c_opt", "e", "e_concat", "concat_depth"],
        rows.iter().map(|r| {
            vec![
                r.d.to_string(),
                sig6(r.e_c_opt),
                sig6(r.e),
                sig6(r.e_concat),
                r.concat_depth.to_string(),
            ]
        }),
    );
    ctx.emit(Body::Csv(body), vec![])
}

pub fn fig1(ctx: &Context, a: &Fig1Args) -> Result<(), AppError> {
    if a.points < 2 {
        return Err(AppError::usage(format!(
            "--points must be at least 2, got {}",
            a.points
        )));
    }
    let grid: Vec<f64> = (1..=a.points)
        .map(|j| 0.5 + 0.5 * j as f64 / a.points as f64)
        .collect();
    let rows = sweep_fig1(&grid, ctx.tol)?;
    let body = csv(
        &["p_c", "p_bound"],
        rows.iter().map(|&(pc, p)| vec![sig6(pc), sig6(p)]),
    );
    ctx.emit(Body::Csv(body), vec![])
}

pub fn i3322(ctx: &Context, a: &I3322Args) -> Result<(), AppError> {
    let proto = Protocol::from_json(protocol_3322_fixture())?;
    let (mode, bound) = match a.mode {
        I3322Mode::Capacity1 => {
            let id = DiscreteChannel::identity(2)?;
            (
                "capacity1",
                protocol_bound(&proto, &box_3322, &id, ctx.tol)?,
            )
        }
        I3322Mode::Limit => ("limit", limit_bound(&proto, &box_3322, 2, a.fit_tol)?.bound),
    };
    let value = bell_value(&box_3322(bound.e_bound)?, &BellFunctional::i3322())?;
    let body = match a.format {
        Format::Csv => Body::Csv(csv(
            &["mode", "e_bound", "i3322_value", "quantum_reference"],
            [vec![
                mode.to_string(),
                sig6(bound.e_bound),
                sig6(value),
                sig6(QUANTUM_3322_E),
            ]],
        )),
        Format::Json => Body::Json(json!({
            "mode": mode,
            "bound": bound,
            "i3322_value": value,
            "quantum_reference": QUANTUM_3322_E,
            "quantum_reference_note": "published NPA value, reported only",
        })),
    };
    ctx.emit(body, vec![])
}

pub fn bound(ctx: &Context, a: &BoundArgs) -> Result<(), AppError> {
    let bx: BipartiteBox = load(&a.box_file, "box")?;
    let proto: Protocol = load(&a.protocol, "protocol")?;
    let family = white_noise_family(&bx);
    let d = a.channel.d.unwrap_or(proto.message_alphabet);
    if a.limit {
        let lim = limit_bound(&proto, &family, d, a.fit_tol)?;
        return ctx.emit(limit_body(a.format, &lim)?, vec![]);
    }
    let ch = resolve_channel(&a.channel, d)?
        .ok_or_else(|| AppError::usage("one of --channel, --ec or --limit is required"))?;
    let r = protocol_bound(&proto, &family, &ch, ctx.tol)?;
    let body = match a.format {
        Format::Csv => Body::Csv(csv(&BOUND_HEADER, [bound_row(r.e_c, &r)])),
        Format::Json => Body::json(&r)?,
    };
    ctx.emit(body, vec![])
}

pub fn search(ctx: &Context, a: &SearchArgs) -> Result<(), AppError> {
    let bx: BipartiteBox = load(&a.box_file, "box")?;
    let choice = &a.channel;
    let ch = resolve_channel(choice, choice.d.unwrap_or(2))?
        .map_or_else(|| symmetric_channel(choice.d.unwrap_or(2), 0.5), Ok)?;
    let (proto, provenance, seeds) = if a.exhaustive {
        let (proto, score) = exhaustive_protocol_search(&bx, &ch, a.n_data)?;
        let provenance = json!({ "method": "exhaustive", "score": score });
        (proto, provenance, vec![])
    } else {
        let mut cfg: SearchConfig = match &a.config {
            Some(path) => load(path, "search config")?,
            None => SearchConfig::default(),
        };
        if let Some(seed) = a.seed {
            cfg.seed = seed;
        }
        let outcome = anneal_protocol(&bx, &ch, a.n_data, &cfg)?;
        let provenance = json!({
            "method": "anneal",
            "seed": cfg.seed,
            "config": cfg,
            "score": outcome.score,
            "evaluations": outcome.evaluations,
            "hit_cap": outcome.hit_cap,
            "generator": GENERATOR,
        });
        (outcome.protocol, provenance, vec![cfg.seed])
    };
    let mut value = serde_json::to_value(&proto).map_err(|e| AppError::internal(e.to_string()))?;
    if let Value::Object(map) = &mut value {
        map.insert("provenance".into(), provenance);
    }
    ctx.emit(Body::Json(value), seeds)
}

pub fn validate(ctx: &Context, a: &ValidateArgs) -> Result<(), AppError> {
    let bx: BipartiteBox = load(&a.box_file, "box")?;
    let report = validate_no_signaling(&bx, a.ns_tol);
    let body = match a.format {
        Format::Csv => Body::Csv(csv(
            &["kind", "x", "y", "outcome", "deviation"],
            report.violations.iter().map(|v| {
                let (kind, x, y, outcome, dev) = match *v {
                    Violation::Normalization { x, y, deviation } => {
                        ("normalization", x, y, None, deviation)
                    }
                    Violation::SenderSignals { b, y, x, deviation } => {
                        ("sender_signals", x, y, Some(b), deviation)
                    }
                    Violation::ReceiverSignals { a, x, y, deviation } => {
                        ("receiver_signals", x, y, Some(a), deviation)
                    }
                };
                vec![
                    kind.to_string(),
                    x.to_string(),
                    y.to_string(),
                    outcome.map(|o| o.to_string()).unwrap_or_default(),
                    sig6(dev),
                ]
            }),
        )),
        Format::Json => Body::Json(json!({
            "valid": report.is_valid(),
            "max_violation": report.max_violation(),
            "violations": report.violations,
        })),
    };
    ctx.emit(body, vec![])?;
    if report.is_valid() {
        Ok(())
    } else {
        Err(AppError::validation(format!(
            "{} violation(s), largest {:.3e}",
            report.violations.len(),
            report.max_violation()
        )))
    }
}

pub fn capacity(ctx: &Context, a: &CapacityArgs) -> Result<(), AppError> {
    let ch = resolve_channel(&a.channel, a.channel.d.unwrap_or(2))?
        .ok_or_else(|| AppError::usage("one of --channel or --ec is required"))?;
    let est = iterative_capacity(&ch, ctx.tol)?;
    let closed = ch
        .symmetric_bias()
        .map(|e_c| closed_form_capacity(ch.d(), e_c))
        .transpose()?;
    let body = match a.format {
        Format::Csv => Body::Csv(csv(
            &["d", "capacity", "closed_form", "iterations", "gap"],
            [vec![
                ch.d().to_string(),
                sig6(est.capacity),
                closed.map(sig6).unwrap_or_default(),
                est.iterations.to_string(),
                format!("{:.1e}", est.gap),
            ]],
        )),
        Format::Json => Body::Json(json!({
            "d": ch.d(),
            "estimate": est,
            "closed_form": closed,
        })),
    };
    ctx.emit(body, vec![])
}
