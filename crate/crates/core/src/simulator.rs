//! Bit-level simulation of a compiled code.
//!
//! Every rational coefficient is realized as a [`FeedbackRegister`]. The
//! filtered simulator applies the global equations directly; the structural
//! simulator runs the local equations node by node. Both must agree on every
//! edge, and every sink must recover each generation after its delay.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::flow_graph::{EdgeId, FlowNetwork};
use crate::gf2::{Gf2Poly, Gf2Rational};
use crate::life_star::{Input, NetworkCode};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("coefficient {0} is not causal")]
    NonCausal(String),
    #[error("horizon {horizon} does not exceed the largest decoding delay {delay}")]
    HorizonTooShort { horizon: usize, delay: usize },
    #[error("schedule has {found} streams, network has {expected} sources")]
    ScheduleWidth { found: usize, expected: usize },
    #[error("schedule line {line}: {message}")]
    ScheduleFormat { line: usize, message: String },
    #[error("simulators diverge on edge {edge} at time {time}")]
    Divergence { edge: String, time: usize },
    #[error("sink {sink} decodes {symbol}({generation}) wrongly")]
    DecodeMismatch {
        sink: String,
        symbol: String,
        generation: usize,
    },
}

/// A causal rational filter `N(D)/Q(D)` with `Q(0) = 1`, in transposed
/// direct form II.
#[derive(Clone, Debug)]
pub struct FeedbackRegister {
    num: Vec<bool>,
    den: Vec<bool>,
    state: Vec<bool>,
}

impl FeedbackRegister {
    pub fn new(r: &Gf2Rational) -> Result<Self, SimError> {
        if !r.denominator().constant_term() {
            return Err(SimError::NonCausal(r.to_string()));
        }
        let len = r.numerator().degree().unwrap_or(0).max(r.denominator().degree().unwrap_or(0));
        let bits = |p: &Gf2Poly| (0..=len).map(|k| p.coeff(k)).collect::<Vec<bool>>();
        Ok(Self {
            num: bits(r.numerator()),
            den: bits(r.denominator()),
            state: vec![false; len],
        })
    }

    pub fn from_poly(p: &Gf2Poly) -> Self {
        Self::new(&Gf2Rational::from_poly(p.clone())).expect("polynomials are causal")
    }

    /// Number of memory bits.
    pub fn state_len(&self) -> usize {
        self.state.len()
    }

    pub fn has_feedback(&self) -> bool {
        self.den.iter().skip(1).any(|&b| b)
    }

    /// Whether the output depends on the current input.
    pub fn is_instantaneous(&self) -> bool {
        self.num[0]
    }

    /// Output for current input `u`, without advancing.
    pub fn output(&self, u: bool) -> bool {
        (self.num[0] & u) ^ self.state.first().copied().unwrap_or(false)
    }

    /// Consumes `u` and returns the output.
    pub fn step(&mut self, u: bool) -> bool {
        let y = self.output(u);
        let n = self.state.len();
        for i in 0..n {
            let carry = if i + 1 < n { self.state[i + 1] } else { false };
            self.state[i] = carry ^ (self.num[i + 1] & u) ^ (self.den[i + 1] & y);
        }
        y
    }

    pub fn run(&mut self, input: &[bool]) -> Vec<bool> {
        input.iter().map(|&u| self.step(u)).collect()
    }

    pub fn reset(&mut self) {
        self.state.iter_mut().for_each(|b| *b = false);
    }
}

/// Source streams `sigma_i(x)` for `x = 0 .. horizon-1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceSchedule {
    pub streams: Vec<Vec<bool>>,
}

impl SourceSchedule {
    pub fn zero(h: usize, horizon: usize) -> Self {
        Self {
            streams: vec![vec![false; horizon]; h],
        }
    }

    /// A single 1 on `symbol` at time 0.
    pub fn impulse(h: usize, symbol: usize, horizon: usize) -> Self {
        let mut s = Self::zero(h, horizon);
        if horizon > 0 {
            s.streams[symbol][0] = true;
        }
        s
    }

    pub fn random(h: usize, horizon: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self {
            streams: (0..h)
                .map(|_| (0..horizon).map(|_| rng.gen()).collect())
                .collect(),
        }
    }

    /// One line per time step holding `h` bits; blanks, commas and `#`
    /// comments are ignored. Steps past the file are zero.
    pub fn parse(text: &str, h: usize, horizon: usize) -> Result<Self, SimError> {
        let mut s = Self::zero(h, horizon);
        let mut x = 0;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("");
            let bits: Vec<char> = line.chars().filter(|c| !c.is_whitespace() && *c != ',').collect();
            if bits.is_empty() {
                continue;
            }
            if bits.len() != h {
                return Err(SimError::ScheduleFormat {
                    line: i + 1,
                    message: format!("expected {h} bits, found {}", bits.len()),
                });
            }
            for (j, c) in bits.iter().enumerate() {
                let bit = match c {
                    '0' => false,
                    '1' => true,
                    _ => {
                        return Err(SimError::ScheduleFormat {
                            line: i + 1,
                            message: format!("unexpected {c:?}"),
                        })
                    }
                };
                if x < horizon {
                    s.streams[j][x] = bit;
                }
            }
            x += 1;
        }
        Ok(s)
    }

    pub fn h(&self) -> usize {
        self.streams.len()
    }

    pub fn horizon(&self) -> usize {
        self.streams.first().map_or(0, Vec::len)
    }

    /// Delays every stream by `s` steps, keeping the horizon.
    pub fn shifted(&self, s: usize) -> Self {
        Self {
            streams: self.streams.iter().map(|v| shift(v, s)).collect(),
        }
    }

    pub fn xor(&self, other: &Self) -> Self {
        Self {
            streams: self
                .streams
                .iter()
                .zip(&other.streams)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x ^ y).collect())
                .collect(),
        }
    }
}

fn shift(v: &[bool], s: usize) -> Vec<bool> {
    (0..v.len()).map(|x| x >= s && v[x - s]).collect()
}

/// Edge streams produced by one simulator run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimTrace {
    pub horizon: usize,
    /// `None` for edges outside every flow.
    pub edges: Vec<Option<Vec<bool>>>,
    pub registers: RegisterCount,
    /// Registers held by each node; empty for the filtered simulator.
    pub nodes: Vec<RegisterCount>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RegisterCount {
    pub filters: usize,
    pub feedback: usize,
    pub state_bits: usize,
}

impl RegisterCount {
    fn add(&mut self, r: &FeedbackRegister) {
        self.filters += 1;
        self.feedback += usize::from(r.has_feedback());
        self.state_bits += r.state_len();
    }
}

impl SimTrace {
    pub fn edge(&self, e: EdgeId) -> Option<&[bool]> {
        self.edges[e].as_deref()
    }

    /// CSV with columns `time,edge,bit`, ordered by time then edge.
    pub fn to_csv(&self, net: &FlowNetwork) -> String {
        let mut out = String::from("time,edge,bit\n");
        for x in 0..self.horizon {
            for (e, v) in self.edges.iter().enumerate() {
                if let Some(v) = v {
                    let _ = writeln!(out, "{x},{},{}", net.edge_name(e), u8::from(v[x]));
                }
            }
        }
        out
    }

    /// First `(edge, time)` where the traces differ.
    pub fn first_difference(&self, other: &Self) -> Option<(EdgeId, usize)> {
        for x in 0..self.horizon.min(other.horizon) {
            for (e, (a, b)) in self.edges.iter().zip(&other.edges).enumerate() {
                if let (Some(a), Some(b)) = (a, b) {
                    if a[x] != b[x] {
                        return Some((e, x));
                    }
                }
            }
        }
        None
    }
}

/// What the sources put on the network: each stream times the precode.
fn precoded(code: &NetworkCode, schedule: &SourceSchedule) -> Vec<Vec<bool>> {
    schedule
        .streams
        .iter()
        .map(|s| FeedbackRegister::from_poly(&code.precode).run(s))
        .collect()
}

fn check_width(code: &NetworkCode, schedule: &SourceSchedule) -> Result<(), SimError> {
    if schedule.h() != code.h {
        return Err(SimError::ScheduleWidth {
            found: schedule.h(),
            expected: code.h,
        });
    }
    Ok(())
}

/// Every edge stream as `sum_i (precode * F_{e,i}) sigma_i`.
pub fn simulate_filtered(code: &NetworkCode, schedule: &SourceSchedule) -> Result<SimTrace, SimError> {
    check_width(code, schedule)?;
    let horizon = schedule.horizon();
    let pre = Gf2Rational::from_poly(code.precode.clone());
    let mut registers = RegisterCount::default();
    let mut edges = Vec::with_capacity(code.globals.len());
    for g in &code.globals {
        let Some(g) = g else {
            edges.push(None);
            continue;
        };
        let mut out = vec![false; horizon];
        for (i, c) in g.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mut r = FeedbackRegister::new(&(&pre * c))?;
            registers.add(&r);
            for (o, y) in out.iter_mut().zip(r.run(&schedule.streams[i])) {
                *o ^= y;
            }
        }
        edges.push(Some(out));
    }
    Ok(SimTrace {
        horizon,
        edges,
        registers,
        nodes: Vec::new(),
    })
}

struct Tap {
    input: Input,
    reg: FeedbackRegister,
}

/// Runs the local equations at the nodes, one time step at a time.
pub fn simulate_structural(
    net: &FlowNetwork,
    code: &NetworkCode,
    schedule: &SourceSchedule,
) -> Result<SimTrace, SimError> {
    check_width(code, schedule)?;
    let horizon = schedule.horizon();
    let sources = precoded(code, schedule);
    let m = code.locals.len();
    let mut registers = RegisterCount::default();
    let mut nodes = vec![RegisterCount::default(); net.nodes().len()];
    let mut taps: Vec<Vec<Tap>> = Vec::with_capacity(m);
    for (e, l) in code.locals.iter().enumerate() {
        let mut list = Vec::new();
        if let Some(l) = l {
            for t in &l.terms {
                list.push(Tap {
                    input: t.input,
                    reg: FeedbackRegister::new(&t.coefficient)?,
                });
            }
            for r in &l.removals {
                list.push(Tap {
                    input: Input::Edge(r.input),
                    reg: FeedbackRegister::new(&r.coefficient)?,
                });
            }
        }
        for t in &list {
            registers.add(&t.reg);
            nodes[net.edge(e).from].add(&t.reg);
        }
        taps.push(list);
    }
    // Edges reading some input without delay are evaluated after the rest,
    // in visiting order.
    let order: Vec<EdgeId> = code.plan.edges();
    let knot_edges: Vec<EdgeId> = code
        .knots
        .iter()
        .flat_map(|k| k.component.edges.iter().copied())
        .collect();
    let mut delayed: Vec<EdgeId> = Vec::new();
    let mut instant: Vec<EdgeId> = Vec::new();
    for &e in order.iter().chain(&knot_edges) {
        if code.locals[e].is_none() || delayed.contains(&e) || instant.contains(&e) {
            continue;
        }
        if taps[e].iter().any(|t| t.reg.is_instantaneous()) {
            instant.push(e);
        } else {
            delayed.push(e);
        }
    }
    let mut edges: Vec<Option<Vec<bool>>> = code
        .locals
        .iter()
        .map(|l| l.as_ref().map(|_| vec![false; horizon]))
        .collect();
    let mut now = vec![false; m];
    for x in 0..horizon {
        let read = |input: Input, now: &[bool]| match input {
            Input::Edge(p) => now[p],
            Input::Source(s) => sources[s][x],
        };
        for &e in &delayed {
            now[e] = taps[e].iter().fold(false, |acc, t| acc ^ t.reg.output(false));
        }
        for &e in &instant {
            let v = taps[e]
                .iter()
                .fold(false, |acc, t| acc ^ t.reg.output(read(t.input, &now)));
            now[e] = v;
        }
        for e in delayed.iter().chain(&instant) {
            edges[*e].as_mut().expect("encoded")[x] = now[*e];
        }
        for list in &mut taps {
            for t in list.iter_mut() {
                let u = read(t.input, &now);
                t.reg.step(u);
            }
        }
    }
    Ok(SimTrace {
        horizon,
        edges,
        registers,
        nodes,
    })
}

/// Decoded streams of one sink.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SinkDecode {
    pub sink: usize,
    /// `streams[i][x]` estimates `sigma_i(x - delays[i])`.
    pub streams: Vec<Vec<bool>>,
    /// Advance used for each symbol.
    pub delays: Vec<usize>,
    /// Largest of `delays`; equals the sink's `d_t`.
    pub delay: usize,
    /// Per symbol, the smallest shift under which the decoded stream
    /// matches the schedule.
    pub realized: Vec<Option<usize>>,
    pub registers: RegisterCount,
}

fn matches_shift(decoded: &[bool], source: &[bool], s: usize) -> bool {
    decoded
        .iter()
        .enumerate()
        .all(|(x, &b)| b == (x >= s && source[x - s]))
}

/// Applies `D^d_i * M^-1 / precode` to the received streams of each sink.
pub fn decode_at_sinks(
    code: &NetworkCode,
    trace: &SimTrace,
    schedule: &SourceSchedule,
) -> Result<Vec<SinkDecode>, SimError> {
    let horizon = trace.horizon;
    let pre = Gf2Rational::from_poly(code.precode.clone());
    let mut out = Vec::new();
    for d in &code.decoders {
        let h = d.columns.len();
        let filters: Vec<Vec<Gf2Rational>> = (0..h)
            .map(|i| {
                (0..h)
                    .map(|j| d.inverse[(j, i)].checked_div(&pre).expect("precode is nonzero"))
                    .collect()
            })
            .collect();
        let delays: Vec<usize> = filters
            .iter()
            .map(|col| col.iter().map(|f| f.causal_split().0).max().unwrap_or(0))
            .collect();
        let mut registers = RegisterCount::default();
        let mut streams = Vec::with_capacity(h);
        for (i, col) in filters.iter().enumerate() {
            let mut acc = vec![false; horizon];
            for (j, f) in col.iter().enumerate() {
                if f.is_zero() {
                    continue;
                }
                let mut r = FeedbackRegister::new(&f.shl(delays[i]))?;
                registers.add(&r);
                let received = trace.edge(d.columns[j]).expect("sink inputs are encoded");
                for (a, y) in acc.iter_mut().zip(r.run(received)) {
                    *a ^= y;
                }
            }
            streams.push(acc);
        }
        let realized = streams
            .iter()
            .zip(&schedule.streams)
            .map(|(dec, src)| (0..horizon).find(|&s| matches_shift(dec, src, s)))
            .collect();
        out.push(SinkDecode {
            sink: d.sink,
            delay: delays.iter().copied().max().unwrap_or(0),
            streams,
            delays,
            realized,
            registers,
        });
    }
    Ok(out)
}

/// Outcome of checking a code end to end.
#[derive(Clone, Debug)]
pub struct Verification {
    pub filtered: SimTrace,
    pub structural: SimTrace,
    pub sinks: Vec<SinkDecode>,
}

impl SinkDecode {
    /// Largest realized per-symbol shift; `None` if some symbol never matched.
    pub fn realized_delay(&self) -> Option<usize> {
        self.realized.iter().try_fold(0, |acc, r| r.map(|r| acc.max(r)))
    }
}

impl Verification {
    pub fn summary(&self, net: &FlowNetwork) -> String {
        let mut out = String::new();
        for s in &self.sinks {
            let _ = writeln!(
                out,
                "{}: delay {} PASS ({} decoder filters, {} with feedback, {} state bits)",
                net.sinks()[s.sink].name,
                s.delay,
                s.registers.filters,
                s.registers.feedback,
                s.registers.state_bits
            );
        }
        let r = self.structural.registers;
        let _ = writeln!(
            out,
            "network: {} filters, {} with feedback, {} state bits",
            r.filters, r.feedback, r.state_bits
        );
        out
    }
}

/// Runs both simulators, compares them on every edge, and checks that
/// every sink recovers every generation `x` at exactly `x + d_t`.
pub fn verify(
    net: &FlowNetwork,
    code: &NetworkCode,
    schedule: &SourceSchedule,
) -> Result<Verification, SimError> {
    let horizon = schedule.horizon();
    let delay = code.max_delay();
    if horizon <= delay {
        return Err(SimError::HorizonTooShort { horizon, delay });
    }
    let filtered = simulate_filtered(code, schedule)?;
    let structural = simulate_structural(net, code, schedule)?;
    if let Some((e, x)) = filtered.first_difference(&structural) {
        return Err(SimError::Divergence {
            edge: net.edge_name(e).to_string(),
            time: x,
        });
    }
    let sinks = decode_at_sinks(code, &filtered, schedule)?;
    for s in &sinks {
        for (i, (dec, src)) in s.streams.iter().zip(&schedule.streams).enumerate() {
            // generation x is complete at x + d_t
            let shifted = shift(src, s.delays[i]);
            if let Some(x) = (0..horizon).find(|&x| dec[x] != shifted[x]) {
                return Err(SimError::DecodeMismatch {
                    sink: net.sinks()[s.sink].name.clone(),
                    symbol: net.sources()[i].symbol.clone(),
                    generation: x.saturating_sub(s.delays[i]),
                });
            }
        }
        debug_assert_eq!(s.delay, code.decoders[s.sink].delay);
    }
    Ok(Verification {
        filtered,
        structural,
        sinks,
    })
}
