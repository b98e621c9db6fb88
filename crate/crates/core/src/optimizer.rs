//! Genetic-algorithm search for the two replenishment problems: minimum annual cost under
//! service requirements (OR), and the highest auxiliary launch price that still keeps the
//! dual-channel strategy within a reference budget and usage share (VA).
//!
//! Every gene is an integer index into its variable's grid. Constraint handling is by
//! feasibility dominance: a feasible candidate always outranks an infeasible one, feasible
//! candidates compare by objective and infeasible ones by total violation.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inplane::DualPolicy;
use crate::parking::ParkingPolicy;
use crate::system::{evaluate, ScenarioConfig, SteadyStateMetrics, SystemPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Or,
    Va,
}

/// Inclusive integer range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntRange {
    pub lo: i64,
    pub hi: i64,
}

impl IntRange {
    pub const fn new(lo: i64, hi: i64) -> Self {
        IntRange { lo, hi }
    }

    pub const fn fixed(v: i64) -> Self {
        IntRange { lo: v, hi: v }
    }

    fn len(&self) -> i64 {
        self.hi - self.lo + 1
    }
}

/// Evenly spaced real grid `lo, lo + step, ..., hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealGrid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl RealGrid {
    pub const fn fixed(v: f64) -> Self {
        RealGrid { lo: v, hi: v, step: 1.0 }
    }

    fn len(&self) -> i64 {
        if self.hi <= self.lo {
            1
        } else {
            ((self.hi - self.lo) / self.step + 1e-9).floor() as i64 + 1
        }
    }

    fn value(&self, i: i64) -> f64 {
        // strip accumulated float noise so values print cleanly
        let v = self.lo + i as f64 * self.step;
        (v * 1e9).round() / 1e9
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub r1: IntRange,
    pub r2: IntRange,
    pub q1: IntRange,
    pub q2: IntRange,
    pub k_r: IntRange,
    pub k_q: IntRange,
    pub n_parking: IntRange,
    /// Allowed parking altitudes, km.
    pub h_parking_km: Vec<f64>,
    pub alpha_w: RealGrid,
    /// Auxiliary launch price grid, M$. Only searched by VA.
    pub c_auxiliary: RealGrid,
}

impl Bounds {
    fn validate(&self) -> Result<()> {
        let ints = [
            ("R1", self.r1),
            ("R2", self.r2),
            ("Q1", self.q1),
            ("Q2", self.q2),
            ("k_R", self.k_r),
            ("k_Q", self.k_q),
            ("N_parking", self.n_parking),
        ];
        for (name, r) in ints {
            if r.lo > r.hi {
                return Err(Error::config(format!("empty range for {name}: [{}, {}]", r.lo, r.hi)));
            }
        }
        if self.q1.lo < 1 || self.q2.lo < 1 || self.k_q.lo < 1 || self.n_parking.lo < 1 || self.k_r.lo < 0 {
            return Err(Error::config("Q1, Q2, k_Q and N_parking need lower bounds >= 1 and k_R >= 0"));
        }
        if self.h_parking_km.is_empty() {
            return Err(Error::config("no parking altitudes to choose from"));
        }
        for (name, g) in [("alpha_w", self.alpha_w), ("c_auxiliary", self.c_auxiliary)] {
            if !(g.step > 0.0) || g.hi < g.lo || g.lo < 0.0 {
                return Err(Error::config(format!("invalid {name} grid {g:?}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaSettings {
    pub population: usize,
    pub generations: usize,
    pub elitism: usize,
    pub tournament: usize,
    pub crossover: f64,
    /// Per-gene reset probability.
    pub mutation: f64,
}

impl Default for GaSettings {
    fn default() -> Self {
        GaSettings { population: 60, generations: 150, elitism: 2, tournament: 3, crossover: 0.9, mutation: 0.15 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub rho_plane_req: f64,
    pub rho_parking_req: f64,
    /// Budget of the VA problem, M$/yr.
    #[serde(default)]
    pub tessac_ref: Option<f64>,
    /// Minimum auxiliary launches per primary launch (VA).
    #[serde(default)]
    pub eta: f64,
    pub bounds: Bounds,
    #[serde(default)]
    pub ga: GaSettings,
    #[serde(default)]
    pub seed: u64,
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, r) in [("rho_plane_req", self.rho_plane_req), ("rho_parking_req", self.rho_parking_req)] {
            if !(r > 0.0 && r < 1.0) {
                return Err(Error::config(format!("{name} must lie in (0, 1), got {r}")));
            }
        }
        if !(self.eta >= 0.0) {
            return Err(Error::config(format!("eta must be non-negative, got {}", self.eta)));
        }
        let ga = &self.ga;
        if ga.population < 2 || ga.tournament < 1 || ga.elitism > ga.population {
            return Err(Error::config(format!("invalid GA settings {ga:?}")));
        }
        self.bounds.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionVector {
    pub r1: i32,
    pub r2: i32,
    pub q1: u32,
    pub q2: u32,
    pub k_r: u32,
    pub k_q: u32,
    pub n_parking: u32,
    pub h_parking_km: f64,
    pub alpha_w: f64,
    /// Only meaningful for VA.
    pub c_auxiliary: Option<f64>,
}

impl DecisionVector {
    pub fn policy(&self) -> SystemPolicy {
        SystemPolicy {
            plane: DualPolicy { r1: self.r1, r2: self.r2, q1: self.q1, q2: self.q2, alpha_w: self.alpha_w },
            parking: ParkingPolicy { k_r: self.k_r, k_q: self.k_q },
            n_parking: self.n_parking,
            h_parking_km: self.h_parking_km,
        }
    }

    pub fn from_policy(policy: &SystemPolicy, c_auxiliary: Option<f64>) -> Self {
        DecisionVector {
            r1: policy.plane.r1,
            r2: policy.plane.r2,
            q1: policy.plane.q1,
            q2: policy.plane.q2,
            k_r: policy.parking.k_r,
            k_q: policy.parking.k_q,
            n_parking: policy.n_parking,
            h_parking_km: policy.h_parking_km,
            alpha_w: policy.plane.alpha_w,
            c_auxiliary,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    /// Non-negative when satisfied.
    pub slack: f64,
    /// Divides a negative slack in the total violation.
    pub scale: f64,
}

impl Constraint {
    fn new(name: &str, slack: f64, scale: f64) -> Self {
        Constraint { name: name.to_string(), slack, scale }
    }

    pub fn satisfied(&self) -> bool {
        self.slack >= 0.0
    }

    fn violation(&self) -> f64 {
        if self.slack >= 0.0 {
            0.0
        } else if self.slack.is_finite() {
            -self.slack / self.scale
        } else {
            f64::MAX
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateEvaluation {
    /// Minimised: TESSAC for OR, minus the auxiliary price for VA. NaN when the structural
    /// screen failed and the model was not evaluated.
    pub objective: f64,
    pub constraints: Vec<Constraint>,
    pub metrics: Option<SteadyStateMetrics>,
}

impl CandidateEvaluation {
    pub fn feasible(&self) -> bool {
        self.metrics.is_some() && self.constraints.iter().all(Constraint::satisfied)
    }

    pub fn violation(&self) -> f64 {
        self.constraints.iter().map(Constraint::violation).sum()
    }
}

/// Violation assigned to a candidate the model could not evaluate.
const FAILED_EVALUATION_VIOLATION: f64 = 1e6;

fn structural(config: &ScenarioConfig, v: &DecisionVector) -> Vec<Constraint> {
    vec![
        Constraint::new("R1 - R2 >= 1", (v.r1 - v.r2 - 1) as f64, 1.0),
        Constraint::new("Q1 k_Q <= Q3_max", config.primary.capacity as f64 - (v.q1 * v.k_q) as f64, 1.0),
        Constraint::new("Q2 <= Q2_max", config.auxiliary.capacity as f64 - v.q2 as f64, 1.0),
        Constraint::new("k_R <= k_Q", v.k_q as f64 - v.k_r as f64, 1.0),
    ]
}

fn priced(config: &ScenarioConfig, c_auxiliary: Option<f64>) -> ScenarioConfig {
    let mut cfg = *config;
    if let Some(c) = c_auxiliary {
        cfg.auxiliary.cost_musd = c;
    }
    cfg
}

fn model_constraints(spec: &ProblemSpec, v: &DecisionVector, m: &SteadyStateMetrics) -> Vec<Constraint> {
    let mut out = vec![
        Constraint::new("rho_parking >= req", m.parking.rho_parking - spec.rho_parking_req, 1.0 - spec.rho_parking_req),
        Constraint::new("rho_plane >= req", m.plane.rho_plane - spec.rho_plane_req, 1.0 - spec.rho_plane_req),
        Constraint::new("R1 <= Q_plane", m.plane.q_plane - v.r1 as f64, 1.0),
    ];
    if spec.kind == ProblemKind::Va {
        let budget = spec.tessac_ref.unwrap_or(f64::INFINITY);
        out.push(Constraint::new("TESSAC <= TESSAC_ref", budget - m.cost.tessac, budget.abs().max(1.0) * 1e-2));
        out.push(Constraint::new("k_Q p2 >= eta", v.k_q as f64 * m.plane.p2 - spec.eta, spec.eta.max(1.0)));
    }
    out
}

fn objective(spec: &ProblemSpec, v: &DecisionVector, m: &SteadyStateMetrics) -> f64 {
    match spec.kind {
        ProblemKind::Or => m.cost.tessac,
        ProblemKind::Va => -v.c_auxiliary.unwrap_or(0.0),
    }
}

/// Objective and signed constraint slacks of one decision vector. Structural violations are
/// reported without running the model.
pub fn evaluate_candidate(config: &ScenarioConfig, spec: &ProblemSpec, v: &DecisionVector) -> Result<CandidateEvaluation> {
    let mut constraints = structural(config, v);
    if !constraints.iter().all(Constraint::satisfied) {
        return Ok(CandidateEvaluation { objective: f64::NAN, constraints, metrics: None });
    }
    let metrics = evaluate(&priced(config, v.c_auxiliary), &v.policy())?;
    constraints.extend(model_constraints(spec, v, &metrics));
    Ok(CandidateEvaluation { objective: objective(spec, v, &metrics), constraints, metrics: Some(metrics) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationTrace {
    pub generation: usize,
    /// Best objective among feasible members, NaN when none is feasible.
    pub best_objective: f64,
    pub mean_feasible_objective: f64,
    pub feasible_count: usize,
    pub best_violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub kind: ProblemKind,
    pub seed: u64,
    pub best: DecisionVector,
    pub objective: f64,
    pub feasible: bool,
    pub constraints: Vec<Constraint>,
    pub metrics: SteadyStateMetrics,
    pub trace: Vec<GenerationTrace>,
    /// Distinct model evaluations.
    pub evaluations: usize,
    pub wall_time_s: f64,
}

type Genome = [i64; 10];
/// Upper bound on local-descent steps after the last generation.
const POLISH_ROUNDS: usize = 50;
const C_GENE: usize = 9;

struct Space<'a> {
    b: &'a Bounds,
    va: bool,
}

impl Space<'_> {
    fn sizes(&self) -> Genome {
        let b = self.b;
        [
            b.r1.len(),
            b.r2.len(),
            b.q1.len(),
            b.q2.len(),
            b.k_r.len(),
            b.k_q.len(),
            b.n_parking.len(),
            b.h_parking_km.len() as i64,
            b.alpha_w.len(),
            if self.va { b.c_auxiliary.len() } else { 1 },
        ]
    }

    fn decode(&self, g: &Genome) -> DecisionVector {
        let b = self.b;
        DecisionVector {
            r1: (b.r1.lo + g[0]) as i32,
            r2: (b.r2.lo + g[1]) as i32,
            q1: (b.q1.lo + g[2]) as u32,
            q2: (b.q2.lo + g[3]) as u32,
            k_r: (b.k_r.lo + g[4]) as u32,
            k_q: (b.k_q.lo + g[5]) as u32,
            n_parking: (b.n_parking.lo + g[6]) as u32,
            h_parking_km: b.h_parking_km[g[7] as usize],
            alpha_w: b.alpha_w.value(g[8]),
            c_auxiliary: self.va.then(|| b.c_auxiliary.value(g[C_GENE])),
        }
    }

    /// Clamps genes that break an ordering or capacity constraint onto the bound (R2 < R1,
    /// k_Q Q1 within the primary capacity, k_R <= k_Q, Q2 within the auxiliary capacity).
    fn repair(&self, g: &mut Genome, config: &ScenarioConfig) {
        fn clamp(gene: &mut i64, r: IntRange, max: i64) {
            let hi = max.min(r.hi);
            if r.lo + *gene > hi && hi >= r.lo {
                *gene = hi - r.lo;
            }
        }
        let b = self.b;
        let r1 = b.r1.lo + g[0];
        clamp(&mut g[1], b.r2, r1 - 1);
        let q1 = (b.q1.lo + g[2]).max(1);
        clamp(&mut g[5], b.k_q, config.primary.capacity as i64 / q1);
        let k_q = b.k_q.lo + g[5];
        clamp(&mut g[4], b.k_r, k_q);
        clamp(&mut g[3], b.q2, config.auxiliary.capacity as i64);
    }

    fn random(&self, rng: &mut ChaCha8Rng) -> Genome {
        let sizes = self.sizes();
        let mut g = [0; 10];
        for (gene, n) in g.iter_mut().zip(sizes) {
            *gene = rng.random_range(0..n);
        }
        g
    }
}

/// Model output for one genome, without the auxiliary price (VA prices are applied on top).
#[derive(Clone)]
enum Cached {
    Structural,
    Failed,
    Done(Box<SteadyStateMetrics>),
}

struct Scored {
    genome: Genome,
    objective: f64,
    /// Orders equal objectives: the cheaper policy first.
    tiebreak: f64,
    violation: f64,
    feasible: bool,
    /// Passed the structural screen and the model produced metrics.
    evaluated: bool,
}

fn better(a: &Scored, b: &Scored) -> bool {
    rank(a, b) == Ordering::Less
}

fn rank(a: &Scored, b: &Scored) -> Ordering {
    match (a.feasible, b.feasible) {
        (true, false) => Ordering::Less,
        (false, true) => Ordering::Greater,
        (true, true) => a.objective.total_cmp(&b.objective).then(a.tiebreak.total_cmp(&b.tiebreak)),
        // model-evaluated candidates first, so that cheap structural slacks do not
        // outrank every candidate the model has seen
        (false, false) => b.evaluated.cmp(&a.evaluated).then(a.violation.total_cmp(&b.violation)),
    }
}

fn memo_key(g: &Genome, va: bool) -> Genome {
    let mut k = *g;
    if va {
        k[C_GENE] = 0;
    }
    k
}

/// Applies an auxiliary launch price to metrics evaluated at the configured price. Only the
/// launch cost depends on it.
fn reprice(config: &ScenarioConfig, m: &SteadyStateMetrics, c_auxiliary: f64) -> SteadyStateMetrics {
    let mut out = m.clone();
    let delta = (c_auxiliary - config.auxiliary.cost_musd) * m.orders.o2 * config.constellation.n_plane as f64;
    out.cost.launch += delta;
    out.cost.tessac = out.cost.manufacturing + out.cost.launch + out.cost.maneuvering + out.cost.holding;
    out
}

struct Search<'a> {
    config: &'a ScenarioConfig,
    spec: &'a ProblemSpec,
    space: Space<'a>,
    cache: HashMap<Genome, Cached>,
}

impl Search<'_> {
    fn fill_cache(&mut self, genomes: &[Genome]) {
        let mut todo: Vec<Genome> = genomes.iter().map(|g| memo_key(g, self.space.va)).collect();
        todo.sort_unstable();
        todo.dedup();
        todo.retain(|k| !self.cache.contains_key(k));
        let (config, space) = (self.config, &self.space);
        let results: Vec<(Genome, Cached)> = todo
            .par_iter()
            .map(|k| {
                let v = space.decode(k);
                if !structural(config, &v).iter().all(Constraint::satisfied) {
                    return (*k, Cached::Structural);
                }
                match evaluate(config, &v.policy()) {
                    Ok(m) => (*k, Cached::Done(Box::new(m))),
                    Err(e) => {
                        log::debug!("candidate {v:?} failed to evaluate: {e}");
                        (*k, Cached::Failed)
                    }
                }
            })
            .collect();
        self.cache.extend(results);
    }

    fn candidate(&self, g: &Genome) -> CandidateEvaluation {
        let v = self.space.decode(g);
        let mut constraints = structural(self.config, &v);
        match &self.cache[&memo_key(g, self.space.va)] {
            Cached::Structural => CandidateEvaluation { objective: f64::NAN, constraints, metrics: None },
            Cached::Failed => {
                constraints.push(Constraint::new("model evaluation", -FAILED_EVALUATION_VIOLATION, 1.0));
                CandidateEvaluation { objective: f64::NAN, constraints, metrics: None }
            }
            Cached::Done(m) => {
                let m = match v.c_auxiliary {
                    Some(c) => reprice(self.config, m, c),
                    None => (**m).clone(),
                };
                constraints.extend(model_constraints(self.spec, &v, &m));
                CandidateEvaluation { objective: objective(self.spec, &v, &m), constraints, metrics: Some(m) }
            }
        }
    }

    /// Highest price on the grid that keeps the genome's TESSAC within budget, or the lowest
    /// price when none does. TESSAC is linear in the price, so this needs no extra evaluation.
    fn affordable_price(&self, g: &Genome) -> i64 {
        let grid = &self.spec.bounds.c_auxiliary;
        let n = grid.len();
        let Cached::Done(m) = &self.cache[&memo_key(g, true)] else {
            return g[C_GENE];
        };
        let budget = self.spec.tessac_ref.unwrap_or(f64::INFINITY);
        let per_musd = m.orders.o2 * self.config.constellation.n_plane as f64;
        let at_zero = m.cost.tessac - self.config.auxiliary.cost_musd * per_musd;
        (0..n).rev().find(|&i| at_zero + grid.value(i) * per_musd <= budget).unwrap_or(0)
    }

    fn score(&mut self, mut genomes: Vec<Genome>) -> Vec<Scored> {
        // Only the VA search is repaired: there the cost budget already squeezes the feasible
        // set, while for OR the repair steers the population away from the cheapest policies.
        if self.space.va {
            for g in &mut genomes {
                self.space.repair(g, self.config);
            }
        }
        self.fill_cache(&genomes);
        genomes
            .into_iter()
            .map(|mut genome| {
                if self.space.va {
                    genome[C_GENE] = self.affordable_price(&genome);
                }
                let c = self.candidate(&genome);
                Scored {
                    genome,
                    objective: c.objective,
                    tiebreak: c.metrics.as_ref().map_or(0.0, |m| m.cost.tessac),
                    violation: c.violation(),
                    feasible: c.feasible(),
                    evaluated: c.metrics.is_some(),
                }
            })
            .collect()
    }
}

/// Genomes one grid step away in one gene, or in two genes at once. The paired moves let the
/// descent shift coupled variables such as R1 and R2 together.
fn neighbours(g: &Genome, sizes: &Genome) -> Vec<Genome> {
    let free: Vec<usize> = (0..g.len()).filter(|&i| sizes[i] > 1).collect();
    let step = |g: &mut Genome, i: usize, d: i64| {
        g[i] += d;
        (0..sizes[i]).contains(&g[i])
    };
    let mut out = Vec::new();
    for (a, &i) in free.iter().enumerate() {
        for di in [-1, 1] {
            let mut one = *g;
            if !step(&mut one, i, di) {
                continue;
            }
            out.push(one);
            for &j in &free[a + 1..] {
                for dj in [-1, 1] {
                    let mut two = one;
                    if step(&mut two, j, dj) {
                        out.push(two);
                    }
                }
            }
        }
    }
    out
}

fn tournament<'p>(pop: &'p [Scored], size: usize, rng: &mut ChaCha8Rng) -> &'p Scored {
    let mut best = &pop[rng.random_range(0..pop.len())];
    for _ in 1..size {
        let c = &pop[rng.random_range(0..pop.len())];
        if better(c, best) {
            best = c;
        }
    }
    best
}

fn trace_of(generation: usize, pop: &[Scored]) -> GenerationTrace {
    let feasible: Vec<f64> = pop.iter().filter(|s| s.feasible).map(|s| s.objective).collect();
    GenerationTrace {
        generation,
        best_objective: feasible.iter().copied().fold(f64::NAN, f64::min),
        mean_feasible_objective: if feasible.is_empty() { f64::NAN } else { feasible.iter().sum::<f64>() / feasible.len() as f64 },
        feasible_count: feasible.len(),
        best_violation: pop.iter().map(|s| s.violation).fold(f64::INFINITY, f64::min),
    }
}

fn solve(config: &ScenarioConfig, spec: &ProblemSpec, kind: ProblemKind) -> Result<SolveReport> {
    if spec.kind != kind {
        return Err(Error::config(format!("problem kind {:?} passed to the {kind:?} solver", spec.kind)));
    }
    config.validate()?;
    spec.validate()?;
    if kind == ProblemKind::Va && !config.dual_channel_enabled {
        return Err(Error::config("the VA problem needs the auxiliary channel enabled"));
    }
    let started = Instant::now();
    let ga = spec.ga;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut search = Search { config, spec, space: Space { b: &spec.bounds, va: kind == ProblemKind::Va }, cache: HashMap::new() };
    let sizes = search.space.sizes();

    let initial: Vec<Genome> = (0..ga.population).map(|_| search.space.random(&mut rng)).collect();
    let mut pop = search.score(initial);
    pop.sort_by(rank);
    let mut trace = vec![trace_of(0, &pop)];

    for generation in 1..=ga.generations {
        let mut children: Vec<Genome> = Vec::with_capacity(ga.population);
        while children.len() + ga.elitism < ga.population {
            let a = tournament(&pop, ga.tournament, &mut rng).genome;
            let b = tournament(&pop, ga.tournament, &mut rng).genome;
            let (mut c1, mut c2) = (a, b);
            if rng.random::<f64>() < ga.crossover {
                for i in 0..c1.len() {
                    if rng.random::<bool>() {
                        std::mem::swap(&mut c1[i], &mut c2[i]);
                    }
                }
            }
            for child in [&mut c1, &mut c2] {
                for (gene, &n) in child.iter_mut().zip(&sizes) {
                    if rng.random::<f64>() < ga.mutation {
                        *gene = rng.random_range(0..n);
                    }
                }
            }
            children.push(c1);
            if children.len() + ga.elitism < ga.population {
                children.push(c2);
            }
        }
        let mut next: Vec<Scored> = pop.drain(..ga.elitism).collect();
        next.extend(search.score(children));
        next.sort_by(rank);
        pop = next;
        trace.push(trace_of(generation, &pop));
    }

    let mut best = pop.swap_remove(0);
    for _ in 0..POLISH_ROUNDS {
        let mut scored = search.score(neighbours(&best.genome, &sizes));
        scored.sort_by(rank);
        match scored.into_iter().next() {
            Some(n) if better(&n, &best) => best = n,
            _ => break,
        }
    }
    let report = search.candidate(&best.genome);
    if !report.feasible() {
        let violated: Vec<&str> = report.constraints.iter().filter(|c| !c.satisfied()).map(|c| c.name.as_str()).collect();
        log::warn!("best candidate {:?} violates {}", search.space.decode(&best.genome), violated.join(", "));
        return Err(Error::NoFeasibleSolution { best_violation: report.violation() });
    }
    Ok(SolveReport {
        kind,
        seed: spec.seed,
        best: search.space.decode(&best.genome),
        objective: report.objective,
        feasible: true,
        constraints: report.constraints,
        metrics: report.metrics.expect("feasible candidates carry metrics"),
        trace,
        evaluations: search.cache.len(),
        wall_time_s: started.elapsed().as_secs_f64(),
    })
}

/// Minimum-cost policy under the fill-rate requirements.
pub fn solve_or(config: &ScenarioConfig, spec: &ProblemSpec) -> Result<SolveReport> {
    solve(config, spec, ProblemKind::Or)
}

/// Highest auxiliary launch price keeping TESSAC within budget and the usage share above eta.
pub fn solve_va(config: &ScenarioConfig, spec: &ProblemSpec) -> Result<SolveReport> {
    solve(config, spec, ProblemKind::Va)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_decoding() {
        let g = RealGrid { lo: 0.0, hi: 5.0, step: 0.1 };
        assert_eq!(g.len(), 51);
        assert_eq!(g.value(37), 3.7);
        assert_eq!(RealGrid::fixed(1.0).len(), 1);
        assert_eq!(g.value(39), 3.9);
        assert_eq!(RealGrid::fixed(7.5).value(0), 7.5);
    }

    fn scored(feasible: bool, objective: f64, violation: f64) -> Scored {
        Scored { genome: [0; 10], objective, tiebreak: 0.0, violation, feasible, evaluated: true }
    }

    #[test]
    fn feasibility_dominates() {
        assert!(better(&scored(true, 1e9, 0.0), &scored(false, 1.0, 1e-9)));
        assert!(better(&scored(true, 1.0, 0.0), &scored(true, 2.0, 0.0)));
        assert!(better(&scored(false, f64::NAN, 0.5), &scored(false, f64::NAN, 2.0)));
        let unevaluated = Scored { evaluated: false, ..scored(false, f64::NAN, 1.0) };
        assert!(better(&scored(false, 900.0, 3.0), &unevaluated));
    }

    #[test]
    fn neighbourhood_covers_single_and_paired_steps() {
        let sizes = [3, 3, 1, 1, 1, 1, 1, 1, 1, 1];
        let n = neighbours(&[1, 1, 0, 0, 0, 0, 0, 0, 0, 0], &sizes);
        assert_eq!(n.len(), 4 + 4);
        let edge = neighbours(&[0, 0, 0, 0, 0, 0, 0, 0, 0, 0], &sizes);
        assert_eq!(edge.len(), 2 + 1);
    }

    #[test]
    fn violation_is_scaled() {
        let c = Constraint::new("rho", -0.01, 0.02);
        assert!((c.violation() - 0.5).abs() < 1e-12);
        assert_eq!(Constraint::new("ok", 0.0, 1.0).violation(), 0.0);
    }
}
