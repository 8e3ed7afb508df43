//! The encoder: walks the flow structure, assigns every edge a local
//! encoding with the smallest artificial delays keeping each sink's transfer
//! matrix at full rank, and builds the sink decoders.
//!
//! Every edge adds one unit of link delay. Edges outside flow cycles combine
//! their predecessors as `sum D^(i_e(p)+1) v_p`; flow cycles and knots are
//! encoded in one pass with transfer functions from [`crate::mason`].

use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::flow_graph::{
    build_line_graph, find_knots, topo_layers, validate, EdgeId, FlowError, FlowNetwork,
    FlowStructure, KnotComponent, VisitPlan, VisitStep,
};
use crate::gf2::{AlgebraError, Gf2Poly, Gf2Rational, DEFAULT_DEGREE_CAP};
use crate::linalg::RatMatrix;
use crate::mason::{transfer_table, MasonError, MasonLimits, TransferTable};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Mason(#[from] MasonError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(
        "no delay exponents below {cap} keep full rank at edge {edge} for sinks {sinks}; \
         raise --exponent-cap"
    )]
    SearchExhausted {
        edge: String,
        sinks: String,
        cap: usize,
    },
    #[error(
        "no delay exponents below {cap} keep full rank at the exits of the knot {{{edges}}} \
         for sinks {sinks}; raise --exponent-cap"
    )]
    KnotSearchExhausted {
        edges: String,
        sinks: String,
        cap: usize,
    },
    #[error(
        "exits of the knot {{{edges}}} stay rank deficient for sinks {sinks} under every \
         tried exponent choice, including widely spaced ones; per-predecessor delays \
         cannot separate them"
    )]
    KnotSingular { edges: String, sinks: String },
    #[error("flow of {symbol} starts at edge {edge}, which lies inside a flow cycle")]
    SourceInsideKnot { edge: String, symbol: String },
    #[error("transfer matrix of sink {sink} is singular")]
    Singular { sink: String },
    #[error("rank audit: M_{sink} lost full rank after encoding {step}")]
    AuditViolation { sink: String, step: String },
}

impl EncodeError {
    /// Whether the failure comes from a configured resource limit.
    pub fn is_resource_limit(&self) -> bool {
        matches!(
            self,
            EncodeError::Mason(MasonError::CycleCap { .. })
                | EncodeError::Mason(MasonError::PathCap { .. })
                | EncodeError::Mason(MasonError::TermCap { .. })
                | EncodeError::Mason(MasonError::Algebra(AlgebraError::DegreeLimit { .. }))
                | EncodeError::Algebra(AlgebraError::DegreeLimit { .. })
                | EncodeError::SearchExhausted { .. }
                | EncodeError::KnotSearchExhausted { .. }
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncoderConfig {
    /// Let edges leaving a knot read the freshest in-knot value.
    pub shortcut: bool,
    /// Exclusive bound on each delay exponent; `None` uses the number of
    /// sinks involved (`|T(e)|` for an edge, the sinks touching a knot).
    pub exponent_cap: Option<usize>,
    pub limits: MasonLimits,
    pub degree_cap: usize,
    /// Visiting rank per edge id; lower goes first among eligible edges.
    pub priority: Option<Vec<usize>>,
    /// Re-check every sink matrix after every step.
    pub audit: bool,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        Self {
            shortcut: true,
            exponent_cap: None,
            limits: MasonLimits::default(),
            degree_cap: DEFAULT_DEGREE_CAP,
            priority: None,
            audit: cfg!(debug_assertions),
        }
    }
}

/// What a local encoding term reads.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Input {
    Edge(EdgeId),
    Source(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub input: Input,
    /// Artificial delay exponent chosen by the search.
    pub exponent: usize,
    /// Full filter applied to the input, link delay included.
    pub coefficient: Gf2Rational,
}

/// Subtraction of a symbol that entered the knot at this node and came
/// back through `via`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Removal {
    pub via: EdgeId,
    pub input: EdgeId,
    pub exponent: usize,
    pub tau: Gf2Rational,
    /// `D^(exponent+1) * tau`.
    pub coefficient: Gf2Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LocalKind {
    Source,
    Acyclic,
    Shortcut,
    Knot,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalEquation {
    pub kind: LocalKind,
    pub terms: Vec<Term>,
    pub removals: Vec<Removal>,
}

impl LocalEquation {
    /// Whether the edge reads some input without link delay.
    pub fn is_instantaneous(&self) -> bool {
        self.kind == LocalKind::Shortcut
    }

    pub fn render(&self, net: &FlowNetwork, e: EdgeId) -> String {
        let input = |i: Input| match i {
            Input::Edge(p) => format!("v_{}(x)", net.edge_name(p)),
            Input::Source(s) => format!("{}(x)", net.sources()[s].symbol),
        };
        let mut parts = Vec::new();
        for t in &self.terms {
            parts.push(scaled(&t.coefficient, &input(t.input)));
        }
        let mut out = format!("v_{}(x) = {}", net.edge_name(e), parts.join(" + "));
        if !self.removals.is_empty() {
            let rem: Vec<String> = self
                .removals
                .iter()
                .map(|r| {
                    let d = power(r.exponent + 1);
                    format!(
                        "{d}*tau({},{})*v_{}(x)",
                        net.edge_name(r.input),
                        net.edge_name(r.via),
                        net.edge_name(r.input)
                    )
                })
                .collect();
            let _ = write!(out, " - [removal: {}]", rem.join(" + "));
        }
        out
    }
}

fn power(k: usize) -> String {
    match k {
        0 => "1".to_string(),
        1 => "D".to_string(),
        k => format!("D^{k}"),
    }
}

fn scaled(c: &Gf2Rational, what: &str) -> String {
    if c.is_one() {
        what.to_string()
    } else if c.is_polynomial() && c.numerator().is_monomial() {
        format!("{}*{what}", c.numerator())
    } else {
        format!("[{c}]*{what}")
    }
}

/// Coefficients of an edge value over the source symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlobalEquation {
    pub coeffs: Vec<Gf2Rational>,
}

impl GlobalEquation {
    pub fn is_polynomial(&self) -> bool {
        self.coeffs.iter().all(Gf2Rational::is_polynomial)
    }

    /// `a(x-3) + b(x-2)`; rational coefficients print as `[D^4/(1+D^3)] a(x)`.
    pub fn render_rhs(&self, net: &FlowNetwork) -> String {
        let mut parts = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            let sym = &net.sources()[i].symbol;
            if c.is_zero() {
                continue;
            }
            if c.is_polynomial() {
                for k in c.numerator().exponents() {
                    parts.push(shifted(sym, k));
                }
            } else {
                parts.push(format!("[{c}] {sym}(x)"));
            }
        }
        if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join(" + ")
        }
    }

    pub fn render(&self, net: &FlowNetwork, e: EdgeId) -> String {
        format!("v_{}(x) = {}", net.edge_name(e), self.render_rhs(net))
    }
}

fn shifted(sym: &str, k: usize) -> String {
    if k == 0 {
        format!("{sym}(x)")
    } else {
        format!("{sym}(x-{k})")
    }
}

/// Search record of one edge outside knots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeReport {
    pub kind: LocalKind,
    pub exponents: Vec<usize>,
    pub cap: usize,
    pub tries: usize,
    /// Set when the shortcut form was rejected and the plain form used.
    pub shortcut_fallback: bool,
}

#[derive(Clone, Debug)]
pub struct KnotReport {
    pub component: KnotComponent,
    pub table: TransferTable,
    /// `i_C(p)` in the order of `component.predecessors`.
    pub exponents: Vec<usize>,
    pub cap: usize,
    pub tries: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decoder {
    pub sink: usize,
    /// Edge entering the sink on each source's flow path.
    pub columns: Vec<EdgeId>,
    /// Column `j` is the global equation of `columns[j]`.
    pub matrix: RatMatrix,
    pub inverse: RatMatrix,
    /// Generation `x` is recovered at time `x + delay`.
    pub delay: usize,
    /// Longest flow path into the sink.
    pub lower_bound: usize,
    /// Largest power of `D` in the matrix, when every entry is a polynomial.
    pub upper_bound: Option<usize>,
}

impl Decoder {
    /// `D^delay * inverse / precode`: causal filters turning the received
    /// streams into the source streams delayed by `delay`.
    pub fn filters(&self, precode: &Gf2Poly) -> RatMatrix {
        let p = Gf2Rational::from_poly(precode.clone())
            .inverse()
            .expect("precode is nonzero");
        let mut m = self.inverse.scale(&p);
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                m[(i, j)] = m[(i, j)].shl(self.delay);
            }
        }
        m
    }

    /// Decoding expressions such as `b(x) = r2(x+3)`.
    pub fn render_decode(&self, net: &FlowNetwork) -> Vec<String> {
        let h = self.inverse.rows();
        (0..h)
            .map(|j| {
                let mut parts = Vec::new();
                for i in 0..h {
                    let c = &self.inverse[(i, j)];
                    if c.is_zero() {
                        continue;
                    }
                    let (adv, causal) = c.causal_split();
                    let r = if adv == 0 {
                        format!("r{}(x)", i + 1)
                    } else {
                        format!("r{}(x+{adv})", i + 1)
                    };
                    if causal.is_polynomial() {
                        for k in causal.numerator().exponents() {
                            parts.push(match adv as isize - k as isize {
                                0 => format!("r{}(x)", i + 1),
                                s if s > 0 => format!("r{}(x+{s})", i + 1),
                                s => format!("r{}(x-{})", i + 1, -s),
                            });
                        }
                    } else {
                        parts.push(format!("[{causal}] {r}"));
                    }
                }
                format!("{}(x) = {}", net.sources()[j].symbol, parts.join(" + "))
            })
            .collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EncodeStats {
    pub encoded_edges: usize,
    /// Edges outside knots whose search settled on a nonzero exponent.
    pub delayed_edges: usize,
    pub searched_edges: usize,
    pub candidates_tried: usize,
    pub rank_checks: usize,
    pub audit_checks: usize,
    pub shortcut_edges: usize,
    pub knots: usize,
    /// Largest exponent chosen anywhere, knots included.
    pub max_exponent: usize,
}

#[derive(Clone, Debug)]
pub struct NetworkCode {
    pub h: usize,
    pub plan: VisitPlan,
    pub locals: Vec<Option<LocalEquation>>,
    pub globals: Vec<Option<GlobalEquation>>,
    pub edge_reports: Vec<Option<EdgeReport>>,
    pub knots: Vec<KnotReport>,
    pub decoders: Vec<Decoder>,
    pub precode: Gf2Poly,
    pub stats: EncodeStats,
    pub warnings: Vec<String>,
}

impl NetworkCode {
    pub fn global(&self, e: EdgeId) -> Option<&GlobalEquation> {
        self.globals[e].as_ref()
    }

    pub fn local(&self, e: EdgeId) -> Option<&LocalEquation> {
        self.locals[e].as_ref()
    }

    pub fn decoder(&self, sink: usize) -> &Decoder {
        &self.decoders[sink]
    }

    /// `precode * M_t`: what the sink sees when sources send precoded symbols.
    pub fn sink_view(&self, sink: usize) -> RatMatrix {
        self.decoders[sink]
            .matrix
            .scale(&Gf2Rational::from_poly(self.precode.clone()))
    }

    pub fn max_delay(&self) -> usize {
        self.decoders.iter().map(|d| d.delay).max().unwrap_or(0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Column {
    Source,
    Edge(EdgeId),
}

struct Encoder<'a> {
    net: &'a FlowNetwork,
    s: &'a FlowStructure,
    config: &'a EncoderConfig,
    h: usize,
    /// `columns[t][j]`: the most recently encoded edge of source `j`'s flow to `t`.
    columns: Vec<Vec<Column>>,
    globals: Vec<Option<GlobalEquation>>,
    locals: Vec<Option<LocalEquation>>,
    reports: Vec<Option<EdgeReport>>,
    knot_reports: Vec<KnotReport>,
    stats: EncodeStats,
}

/// Validates `net`, then encodes it.
pub fn compile(net: &FlowNetwork, config: &EncoderConfig) -> Result<NetworkCode, EncodeError> {
    let structure = validate(net)?;
    run(net, &structure, config)
}

pub fn run(
    net: &FlowNetwork,
    structure: &FlowStructure,
    config: &EncoderConfig,
) -> Result<NetworkCode, EncodeError> {
    let knots = find_knots(net, structure);
    let plan = topo_layers(structure, &knots, config.priority.as_deref());
    let h = structure.h();
    let m = net.edges().len();
    let mut enc = Encoder {
        net,
        s: structure,
        config,
        h,
        columns: vec![vec![Column::Source; h]; structure.sink_count()],
        globals: vec![None; m],
        locals: vec![None; m],
        reports: vec![None; m],
        knot_reports: Vec::new(),
        stats: EncodeStats::default(),
    };
    for step in &plan.steps {
        match *step {
            VisitStep::Initial(e) => enc.initial(e)?,
            VisitStep::Edge(e) => enc.edge(e)?,
            VisitStep::Knot(k) => enc.knot(&knots[k])?,
        }
        if config.audit {
            enc.audit(step)?;
        }
    }
    let decoders = enc.decoders()?;
    let precode = precode_for(&decoders);
    let mut warnings = structure.warnings().to_vec();
    if precode.is_one() && decoders.iter().any(|d| d.matrix.entries().any(|v| !v.is_polynomial())) {
        warnings.push("sink matrices are rational but no precode was derived".into());
    }
    Ok(NetworkCode {
        h,
        plan,
        locals: enc.locals,
        globals: enc.globals,
        edge_reports: enc.reports,
        knots: enc.knot_reports,
        decoders,
        precode,
        stats: enc.stats,
        warnings,
    })
}

/// Lcm of every denominator in the sink matrices, with factors of `D`
/// stripped. Multiplying the sources by it makes every sink view polynomial.
pub fn precode_for(decoders: &[Decoder]) -> Gf2Poly {
    let mut acc = Gf2Poly::one();
    for d in decoders {
        for v in d.matrix.entries() {
            let den = v.denominator();
            let den = den.shr(den.ord().unwrap_or(0));
            acc = acc.lcm(&den).expect("nonzero denominators");
        }
    }
    acc
}

/// Exponent vectors in search order: increasing sum, then descending
/// lexicographic order. Calls `accept` until it returns true.
/// Exponent spacing of the probe run after a failed knot search.
const GENERIC_SPREAD: usize = 61;

fn search<F>(k: usize, cap: usize, mut accept: F) -> Result<Option<(Vec<usize>, usize)>, EncodeError>
where
    F: FnMut(&[usize]) -> Result<bool, EncodeError>,
{
    if cap == 0 {
        return Ok(None);
    }
    let mut tries = 0;
    let mut v = vec![0; k];
    for sum in 0..=k * (cap - 1) {
        if let Some(found) = fill(0, sum, cap, &mut v, &mut tries, &mut accept)? {
            return Ok(Some((found, tries)));
        }
    }
    Ok(None)
}

fn fill<F>(
    pos: usize,
    remaining: usize,
    cap: usize,
    v: &mut Vec<usize>,
    tries: &mut usize,
    accept: &mut F,
) -> Result<Option<Vec<usize>>, EncodeError>
where
    F: FnMut(&[usize]) -> Result<bool, EncodeError>,
{
    let k = v.len();
    if pos + 1 >= k {
        if k == 0 {
            if remaining != 0 {
                return Ok(None);
            }
        } else {
            if remaining >= cap {
                return Ok(None);
            }
            v[pos] = remaining;
        }
        *tries += 1;
        return Ok(accept(v)?.then(|| v.clone()));
    }
    let rest = (k - pos - 1) * (cap - 1);
    let lo = remaining.saturating_sub(rest);
    let hi = remaining.min(cap - 1);
    if lo > hi {
        return Ok(None);
    }
    for x in (lo..=hi).rev() {
        v[pos] = x;
        if let Some(found) = fill(pos + 1, remaining - x, cap, v, tries, accept)? {
            return Ok(Some(found));
        }
    }
    Ok(None)
}

impl Encoder<'_> {
    fn zero_global(&self) -> Vec<Gf2Rational> {
        vec![Gf2Rational::zero(); self.h]
    }

    fn input_global(&self, i: Input) -> Vec<Gf2Rational> {
        match i {
            Input::Edge(p) => self.globals[p].as_ref().expect("predecessor encoded").coeffs.clone(),
            Input::Source(s) => {
                let mut g = self.zero_global();
                g[s] = Gf2Rational::one();
                g
            }
        }
    }

    fn column_global(&self, c: Column, j: usize) -> Vec<Gf2Rational> {
        match c {
            Column::Source => self.input_global(Input::Source(j)),
            Column::Edge(e) => self.input_global(Input::Edge(e)),
        }
    }

    fn matrix(&self, t: usize, replace: &[(usize, &[Gf2Rational])]) -> RatMatrix {
        let cols: Vec<Vec<Gf2Rational>> = (0..self.h)
            .map(|j| match replace.iter().find(|(jj, _)| *jj == j) {
                Some((_, g)) => g.to_vec(),
                None => self.column_global(self.columns[t][j], j),
            })
            .collect();
        RatMatrix::from_columns(&cols)
    }

    fn full_rank(&mut self, t: usize, replace: &[(usize, &[Gf2Rational])]) -> Result<bool, EncodeError> {
        self.stats.rank_checks += 1;
        Ok(self.matrix(t, replace).rank_capped(self.config.degree_cap)? == self.h)
    }

    fn check_degree(&self, g: &[Gf2Rational]) -> Result<(), EncodeError> {
        for c in g {
            c.ensure_degree(self.config.degree_cap)?;
        }
        Ok(())
    }

    fn initial(&mut self, e: EdgeId) -> Result<(), EncodeError> {
        let u = &self.s.uses(e)[0];
        let source = u.source;
        let mut g = self.zero_global();
        g[source] = Gf2Rational::monomial(1);
        self.globals[e] = Some(GlobalEquation { coeffs: g });
        self.locals[e] = Some(LocalEquation {
            kind: LocalKind::Source,
            terms: vec![Term {
                input: Input::Source(source),
                exponent: 0,
                coefficient: Gf2Rational::monomial(1),
            }],
            removals: Vec::new(),
        });
        for u in self.s.uses(e) {
            self.columns[u.sink][u.source] = Column::Edge(e);
        }
        self.stats.encoded_edges += 1;
        Ok(())
    }

    /// Inputs of an edge outside knots: its flow predecessors, plus the
    /// source itself when some flow starts on this edge.
    fn inputs(&self, e: EdgeId) -> Vec<Input> {
        let mut inputs: Vec<Input> = self.s.preds_of(e).iter().map(|&p| Input::Edge(p)).collect();
        let mut starts: Vec<usize> = self
            .s
            .uses(e)
            .iter()
            .filter(|u| u.pred.is_none())
            .map(|u| u.source)
            .collect();
        starts.sort_unstable();
        starts.dedup();
        inputs.extend(starts.into_iter().map(Input::Source));
        inputs
    }

    fn candidate(&self, bases: &[(Vec<Gf2Rational>, usize)], exps: &[usize]) -> Vec<Gf2Rational> {
        let mut g = self.zero_global();
        for ((base, link), &i) in bases.iter().zip(exps) {
            for (acc, b) in g.iter_mut().zip(base) {
                if !b.is_zero() {
                    *acc = &*acc + &b.shl(i + link);
                }
            }
        }
        g
    }

    /// Greedy search for one edge given its inputs and per-input link delay.
    fn search_edge(
        &mut self,
        e: EdgeId,
        inputs: &[Input],
        links: &[usize],
    ) -> Result<Option<(Vec<usize>, usize, Vec<Gf2Rational>)>, EncodeError> {
        let bases: Vec<(Vec<Gf2Rational>, usize)> = inputs
            .iter()
            .zip(links)
            .map(|(&i, &l)| (self.input_global(i), l))
            .collect();
        let uses: Vec<(usize, usize)> = self.s.uses(e).iter().map(|u| (u.sink, u.source)).collect();
        let cap = self.edge_cap(e);
        let mut chosen = None;
        let found = search(inputs.len(), cap, |exps| {
            let g = self.candidate(&bases, exps);
            for &(t, j) in &uses {
                if !self.full_rank(t, &[(j, &g)])? {
                    return Ok(false);
                }
            }
            chosen = Some(g);
            Ok(true)
        })?;
        self.stats.candidates_tried += found.as_ref().map_or(0, |f| f.1);
        Ok(found.map(|(exps, tries)| (exps, tries, chosen.expect("accepted candidate"))))
    }

    fn edge_cap(&self, e: EdgeId) -> usize {
        self.config
            .exponent_cap
            .unwrap_or_else(|| self.s.sinks_using(e).len())
    }

    fn edge(&mut self, e: EdgeId) -> Result<(), EncodeError> {
        let inputs = self.inputs(e);
        if self.config.shortcut {
            if let Some((s_c, others)) = self.shortcut_source(e) {
                let mut sc_inputs = vec![Input::Edge(s_c)];
                sc_inputs.extend(others);
                let mut links = vec![0];
                links.extend(std::iter::repeat_n(1, sc_inputs.len() - 1));
                if let Some((exps, tries, g)) = self.search_edge(e, &sc_inputs, &links)? {
                    self.commit_edge(e, LocalKind::Shortcut, &sc_inputs, &links, exps, tries, g, false)?;
                    self.stats.shortcut_edges += 1;
                    return Ok(());
                }
                return self.plain_edge(e, &inputs, true);
            }
        }
        self.plain_edge(e, &inputs, false)
    }

    fn plain_edge(&mut self, e: EdgeId, inputs: &[Input], fallback: bool) -> Result<(), EncodeError> {
        let links = vec![1; inputs.len()];
        match self.search_edge(e, inputs, &links)? {
            Some((exps, tries, g)) => {
                self.commit_edge(e, LocalKind::Acyclic, inputs, &links, exps, tries, g, fallback)
            }
            None => {
                let sinks: Vec<&str> = self
                    .s
                    .sinks_using(e)
                    .iter()
                    .map(|&t| self.net.sinks()[t].name.as_str())
                    .collect();
                Err(EncodeError::SearchExhausted {
                    edge: self.net.edge_name(e).to_string(),
                    sinks: sinks.join(","),
                    cap: self.edge_cap(e),
                })
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn commit_edge(
        &mut self,
        e: EdgeId,
        kind: LocalKind,
        inputs: &[Input],
        links: &[usize],
        exps: Vec<usize>,
        tries: usize,
        g: Vec<Gf2Rational>,
        fallback: bool,
    ) -> Result<(), EncodeError> {
        self.check_degree(&g)?;
        let terms = inputs
            .iter()
            .zip(links)
            .zip(&exps)
            .map(|((&input, &l), &i)| Term {
                input,
                exponent: i,
                coefficient: Gf2Rational::monomial(i + l),
            })
            .collect();
        self.locals[e] = Some(LocalEquation {
            kind,
            terms,
            removals: Vec::new(),
        });
        self.globals[e] = Some(GlobalEquation { coeffs: g });
        for u in self.s.uses(e) {
            self.columns[u.sink][u.source] = Column::Edge(e);
        }
        self.stats.encoded_edges += 1;
        self.stats.searched_edges += 1;
        let max = exps.iter().copied().max().unwrap_or(0);
        if max > 0 {
            self.stats.delayed_edges += 1;
        }
        self.stats.max_exponent = self.stats.max_exponent.max(max);
        self.reports[e] = Some(EdgeReport {
            kind,
            exponents: exps,
            cap: self.edge_cap(e),
            tries,
            shortcut_fallback: fallback,
        });
        Ok(())
    }

    /// For an edge leaving a knot at a node where some knot predecessor also
    /// enters, the knot edge starting at the same node carries the freshest
    /// mix. Returns it together with the inputs kept alongside it.
    fn shortcut_source(&self, e: EdgeId) -> Option<(EdgeId, Vec<Input>)> {
        let knot = self.knot_reports.iter().find(|k| {
            self.s.preds_of(e).iter().any(|&p| k.component.contains(p))
        })?;
        let c = &knot.component;
        if c.contains(e) {
            return None;
        }
        let start = self.net.edge(e).from;
        let entering: Vec<EdgeId> = self
            .s
            .phys_preds_of(e)
            .iter()
            .copied()
            .filter(|p| c.predecessors.contains(p))
            .collect();
        if entering.is_empty() {
            return None;
        }
        let candidates: Vec<EdgeId> = c
            .edges
            .iter()
            .copied()
            .filter(|&x| self.net.edge(x).from == start)
            .collect();
        let s_c = candidates
            .iter()
            .copied()
            .find(|&x| entering.iter().any(|&p| self.s.preds_of(x).contains(&p)))
            .or_else(|| candidates.first().copied())?;
        let others = self
            .inputs(e)
            .into_iter()
            .filter(|i| !matches!(i, Input::Edge(p) if c.contains(*p)))
            .collect();
        Some((s_c, others))
    }

    fn knot(&mut self, c: &KnotComponent) -> Result<(), EncodeError> {
        for &e in &c.edges {
            if let Some(u) = self.s.uses(e).iter().find(|u| u.pred.is_none()) {
                return Err(EncodeError::SourceInsideKnot {
                    edge: self.net.edge_name(e).to_string(),
                    symbol: self.net.sources()[u.source].symbol.clone(),
                });
            }
        }
        let line = build_line_graph(c, self.s);
        let table = transfer_table(c, &line, self.net, self.s, self.config.limits)?;
        let preds = &c.predecessors;
        // base[e][p] = tau(p, e) * global(p)
        let base = |enc: &Self, e: EdgeId| -> Vec<Vec<Gf2Rational>> {
            preds
                .iter()
                .map(|&p| {
                    let tau = table.get(p, e);
                    enc.input_global(Input::Edge(p))
                        .iter()
                        .map(|g| g * tau)
                        .collect()
                })
                .collect()
        };
        let exits = c.exits(self.s);
        let exit_bases: Vec<Vec<Vec<Gf2Rational>>> = exits.iter().map(|&(_, _, e)| base(self, e)).collect();
        let sinks = c.sinks(self.s);
        let cap = self.config.exponent_cap.unwrap_or(sinks.len());
        let combine = |h: usize, rows: &[Vec<Gf2Rational>], exps: &[usize]| {
            let mut g = vec![Gf2Rational::zero(); h];
            for (row, &i) in rows.iter().zip(exps) {
                for (acc, b) in g.iter_mut().zip(row) {
                    if !b.is_zero() {
                        *acc = &*acc + &b.shl(i);
                    }
                }
            }
            g
        };
        let h = self.h;
        let mut accept = |exps: &[usize]| -> Result<bool, EncodeError> {
            let gs: Vec<Vec<Gf2Rational>> = exit_bases.iter().map(|rows| combine(h, rows, exps)).collect();
            for &t in &sinks {
                let replace: Vec<(usize, &[Gf2Rational])> = exits
                    .iter()
                    .zip(&gs)
                    .filter(|((tt, _, _), _)| *tt == t)
                    .map(|((_, j, _), g)| (*j, g.as_slice()))
                    .collect();
                if replace.is_empty() {
                    continue;
                }
                if !self.full_rank(t, &replace)? {
                    return Ok(false);
                }
            }
            Ok(true)
        };
        let found = search(preds.len(), cap, &mut accept)?;
        let Some((exps, tries)) = found else {
            let spread: Vec<usize> = (0..preds.len()).map(|k| k * GENERIC_SPREAD).collect();
            let singular = matches!(accept(&spread), Ok(false));
            let names: Vec<&str> = c.edges.iter().map(|&e| self.net.edge_name(e)).collect();
            let sink_names: Vec<&str> = sinks.iter().map(|&t| self.net.sinks()[t].name.as_str()).collect();
            let (edges, sinks) = (names.join(","), sink_names.join(","));
            return Err(if singular {
                EncodeError::KnotSingular { edges, sinks }
            } else {
                EncodeError::KnotSearchExhausted { edges, sinks, cap }
            });
        };
        self.stats.candidates_tried += tries;
        let exponent_of = |p: EdgeId| exps[preds.iter().position(|&x| x == p).expect("knot predecessor")];

        for &e in &c.edges {
            let g = combine(h, &base(self, e), &exps);
            self.check_degree(&g)?;
            self.globals[e] = Some(GlobalEquation { coeffs: g });
        }
        for &e in &c.edges {
            let mut terms = Vec::new();
            let mut removals = Vec::new();
            for &p in self.s.preds_of(e) {
                if c.contains(p) {
                    terms.push(Term {
                        input: Input::Edge(p),
                        exponent: 0,
                        coefficient: Gf2Rational::monomial(1),
                    });
                } else {
                    let i = exponent_of(p);
                    terms.push(Term {
                        input: Input::Edge(p),
                        exponent: i,
                        coefficient: Gf2Rational::monomial(i + 1),
                    });
                }
            }
            for &via in self.s.preds_of(e).iter().filter(|&&p| c.contains(p)) {
                for &p in self.s.phys_preds_of(e).iter().filter(|p| preds.contains(p)) {
                    let tau = table.get(p, via).clone();
                    if tau.is_zero() {
                        continue;
                    }
                    let i = exponent_of(p);
                    removals.push(Removal {
                        via,
                        input: p,
                        exponent: i,
                        coefficient: tau.shl(i + 1),
                        tau,
                    });
                }
            }
            self.locals[e] = Some(LocalEquation {
                kind: LocalKind::Knot,
                terms,
                removals,
            });
            self.stats.encoded_edges += 1;
        }
        for &(t, j, e) in &exits {
            self.columns[t][j] = Column::Edge(e);
        }
        self.stats.knots += 1;
        self.stats.max_exponent = self.stats.max_exponent.max(exps.iter().copied().max().unwrap_or(0));
        self.knot_reports.push(KnotReport {
            component: c.clone(),
            table,
            exponents: exps,
            cap,
            tries,
        });
        Ok(())
    }

    fn audit(&mut self, step: &VisitStep) -> Result<(), EncodeError> {
        for t in 0..self.columns.len() {
            self.stats.audit_checks += 1;
            if self.matrix(t, &[]).rank_capped(self.config.degree_cap)? != self.h {
                let step = match *step {
                    VisitStep::Initial(e) | VisitStep::Edge(e) => self.net.edge_name(e).to_string(),
                    VisitStep::Knot(k) => format!("knot {k}"),
                };
                return Err(EncodeError::AuditViolation {
                    sink: self.net.sinks()[t].name.clone(),
                    step,
                });
            }
        }
        Ok(())
    }

    fn decoders(&self) -> Result<Vec<Decoder>, EncodeError> {
        (0..self.columns.len())
            .map(|t| {
                let columns: Vec<EdgeId> = (0..self.h)
                    .map(|j| {
                        let path = self.s.path(t, j);
                        let last = *path.last().expect("nonempty path");
                        debug_assert_eq!(self.columns[t][j], Column::Edge(last));
                        last
                    })
                    .collect();
                let matrix = self.matrix(t, &[]);
                let inverse = matrix.inverse().ok_or_else(|| EncodeError::Singular {
                    sink: self.net.sinks()[t].name.clone(),
                })?;
                let delay = inverse
                    .entries()
                    .map(|v| v.causal_split().0)
                    .max()
                    .unwrap_or(0);
                let lower_bound = (0..self.h).map(|j| self.s.path(t, j).len()).max().unwrap_or(0);
                let upper_bound = matrix
                    .entries()
                    .all(Gf2Rational::is_polynomial)
                    .then(|| {
                        matrix
                            .entries()
                            .filter_map(|v| v.numerator().degree())
                            .max()
                            .unwrap_or(0)
                    });
                Ok(Decoder {
                    sink: t,
                    columns,
                    matrix,
                    inverse,
                    delay,
                    lower_bound,
                    upper_bound,
                })
            })
            .collect()
    }
}

impl fmt::Display for LocalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LocalKind::Source => "source",
            LocalKind::Acyclic => "acyclic",
            LocalKind::Shortcut => "shortcut",
            LocalKind::Knot => "knot",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn order(k: usize, cap: usize) -> Vec<Vec<usize>> {
        let mut seen = Vec::new();
        search(k, cap, |v| {
            seen.push(v.to_vec());
            Ok(false)
        })
        .unwrap();
        seen
    }

    #[test]
    fn search_order_is_sum_then_descending() {
        assert_eq!(
            order(2, 3),
            vec![
                vec![0, 0],
                vec![1, 0],
                vec![0, 1],
                vec![2, 0],
                vec![1, 1],
                vec![0, 2],
                vec![2, 1],
                vec![1, 2],
                vec![2, 2]
            ]
        );
        assert_eq!(order(3, 2).len(), 8);
        assert_eq!(order(1, 1), vec![vec![0]]);
        assert!(order(2, 0).is_empty());
    }
}
