//! Fluid-limit ODEs for the degree sequences of the right side (`x`) and the
//! left side (`y`) while Greedy, Karp-Sipser or one-sided Karp-Sipser run.
//!
//! Time counts matched pairs divided by `n`. `x[k]` is the fraction of right
//! vertices of degree `k` for `k >= 1`; slot `x[0]` accumulates the mass that
//! has left with degree zero (unmatched vertices). `y` is laid out the same.
//!
//! The fields are piecewise smooth: the picked degree class changes when a
//! class empties. Steps are taken with RK4 while the pick rule is frozen;
//! when a component would turn negative the step is shortened by bisection
//! onto the switching time. When the min-degree pool is empty but keeps being
//! refilled, the pool is held at zero and picks are split between the pool
//! and the next class so that inflow equals consumption (Filippov sliding).

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gen::{generate_with, DegreeDist, GenSpec, Model};
use crate::matching::{run_heuristic, Algo, Progress};
use crate::rng;

/// Components at or below this count as empty when locating the min degree.
pub const DELTA_NUM: f64 = 1e-9;
const NEG_TOL: f64 = 1e-13;
const SNAP: f64 = 1e-12;
const WEIGHT_TOL: f64 = 1e-12;
const BISECTIONS: usize = 60;
const MAX_STALLS: usize = 200;
const MIN_STEP: f64 = 1e-15;
const MAX_STEPS: usize = 50_000_000;

#[derive(Clone, Debug)]
pub struct OdeSpec {
    pub algo: Algo,
    /// Degree truncation `N`.
    pub n_max: usize,
    pub init_in: DegreeDist,
    pub init_out: DegreeDist,
    pub eps_stop: f64,
    pub h_max: f64,
    /// Fraction of the stiffness bound used as step size.
    pub safety: f64,
}

impl OdeSpec {
    pub fn new(algo: Algo, init_in: DegreeDist, init_out: DegreeDist) -> Result<Self> {
        if algo == Algo::Max {
            return Err(Error::Input("no degree dynamics for exact matching".into()));
        }
        let n_max = init_in.max_degree().max(init_out.max_degree()).max(1);
        Ok(OdeSpec { algo, n_max, init_in, init_out, eps_stop: 1e-6, h_max: 1e-3, safety: 0.2 })
    }

    /// Poisson(λ) on both sides, truncated where the combined tail drops below `1e-12`.
    pub fn poisson(algo: Algo, lambda: f64) -> Result<Self> {
        let d = DegreeDist::poisson_with_tail(lambda, 5e-13)?;
        Self::new(algo, d.clone(), d)
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps_stop = eps;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.algo == Algo::Max {
            return Err(Error::Input("no degree dynamics for exact matching".into()));
        }
        if self.n_max < 1 || !(self.eps_stop > 0.0) || !(self.h_max > 0.0) || !(self.safety > 0.0) {
            return Err(Error::Input("ODE spec needs N >= 1 and positive eps, h_max, safety".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DegreeState {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl DegreeState {
    pub fn x0(&self) -> f64 {
        self.x[0]
    }

    pub fn y0(&self) -> f64 {
        self.y[0]
    }

    pub fn edge_mass_x(&self) -> f64 {
        moment(&self.x, 1)
    }

    pub fn edge_mass_y(&self) -> f64 {
        moment(&self.y, 1)
    }

    /// Right vertices still present with positive degree.
    pub fn vertex_mass_x(&self) -> f64 {
        self.x[1..].iter().sum()
    }
}

fn moment(v: &[f64], p: i32) -> f64 {
    v.iter().enumerate().skip(1).map(|(k, &a)| (k as f64).powi(p) * a).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side2 {
    R,
    L,
}

/// Pick rule frozen over one step.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Mode {
    Greedy,
    /// Pick class `m`; for KS both sides' class `m` in proportion to mass.
    Pure(usize),
    /// Pools at class `m - 1` held at zero on the marked sides.
    Slide { m: usize, hold_x: bool, hold_y: bool },
}

#[derive(Default)]
struct Picks {
    list: Vec<(Side2, usize, f64)>,
    hold_x: Option<usize>,
    hold_y: Option<usize>,
    /// Fraction of picks made at degree two or more.
    no_deg1: f64,
}

/// Views into the flat integration vector `[x_0..x_N, y_0..y_N, z]`, where
/// `z` integrates the fraction of picks made at degree two or more.
struct Layout {
    n: usize,
}

impl Layout {
    fn len(&self) -> usize {
        2 * (self.n + 1) + 1
    }
    fn x<'a>(&self, s: &'a [f64]) -> &'a [f64] {
        &s[..=self.n]
    }
    fn y<'a>(&self, s: &'a [f64]) -> &'a [f64] {
        &s[self.n + 1..2 * (self.n + 1)]
    }
    fn z(&self) -> usize {
        2 * (self.n + 1)
    }
}

struct Stats {
    mu_x: f64,
    mu_y: f64,
    ek_x: f64,
    ek_y: f64,
}

fn stats(x: &[f64], y: &[f64]) -> Stats {
    let mu_x = moment(x, 1);
    let mu_y = moment(y, 1);
    Stats { mu_x, mu_y, ek_x: moment(x, 2) / mu_x, ek_y: moment(y, 2) / mu_y }
}

fn min_class(v: &[f64]) -> Option<usize> {
    (1..v.len()).find(|&k| v[k] > DELTA_NUM)
}

fn mix(xm: f64, ym: f64) -> (f64, f64) {
    let s = xm + ym;
    if s > 0.0 {
        (xm / s, ym / s)
    } else {
        (0.5, 0.5)
    }
}

fn in_range(w: f64) -> bool {
    (-WEIGHT_TOL..=1.0 + WEIGHT_TOL).contains(&w)
}

struct Field<'a> {
    spec: &'a OdeSpec,
    lay: Layout,
}

impl<'a> Field<'a> {
    fn new(spec: &'a OdeSpec) -> Self {
        Field { spec, lay: Layout { n: spec.n_max } }
    }

    /// Picks under `mode` at state `s`; `None` if the mode's weights are infeasible.
    fn picks(&self, mode: Mode, s: &[f64]) -> Option<Picks> {
        let x = self.lay.x(s);
        let y = self.lay.y(s);
        let st = stats(x, y);
        match (self.spec.algo, mode) {
            (_, Mode::Greedy) => {
                let mass: f64 = x[1..].iter().sum();
                let list: Vec<_> = (1..x.len()).map(|k| (Side2::R, k, x[k] / mass)).collect();
                let no_deg1 = 1.0 - x[1] / mass;
                Some(Picks { list, no_deg1, ..Default::default() })
            }
            (Algo::Oks, Mode::Pure(m)) => Some(Picks {
                list: vec![(Side2::R, m, 1.0)],
                no_deg1: if m >= 2 { 1.0 } else { 0.0 },
                ..Default::default()
            }),
            (Algo::Oks, Mode::Slide { m, .. }) => {
                let j = m - 1;
                // Inflow into the empty pool per pick; above one the pool refills
                // faster than it is consumed and every pick is taken from it.
                let theta = (st.ek_y - 1.0) * m as f64 * x[m] / st.mu_x;
                if !(theta >= 0.0) {
                    return None;
                }
                let held = theta < 1.0;
                let theta = theta.min(1.0);
                Some(Picks {
                    list: vec![(Side2::R, j, theta), (Side2::R, m, 1.0 - theta)],
                    hold_x: held.then_some(j),
                    hold_y: None,
                    no_deg1: if j >= 2 { 1.0 } else { 1.0 - theta },
                })
            }
            (_, Mode::Pure(m)) => {
                let (wx, wy) = mix(x[m], y[m]);
                Some(Picks {
                    list: vec![(Side2::R, m, wx), (Side2::L, m, wy)],
                    no_deg1: if m >= 2 { 1.0 } else { 0.0 },
                    ..Default::default()
                })
            }
            (_, Mode::Slide { m, hold_x, hold_y }) => self.ks_slide(m, hold_x, hold_y, x, y, &st),
        }
    }

    fn ks_slide(&self, m: usize, hold_x: bool, hold_y: bool, x: &[f64], y: &[f64], st: &Stats) -> Option<Picks> {
        let j = m - 1;
        let (wx, wy) = mix(x[m], y[m]);
        let (jf, mf) = (j as f64, m as f64);
        // Inflow into the pools per unit of each pick type.
        let ar = mf * x[m] / st.mu_x;
        let al = mf * y[m] / st.mu_y;
        let (p1, q1, r1) = (ar * (st.ek_y - 1.0), ar * (jf - 1.0), ar * (wx * (st.ek_y - 1.0) + wy * (mf - 1.0)));
        let (p2, q2, r2) = (al * (st.ek_x - 1.0), al * (jf - 1.0), al * (wy * (st.ek_x - 1.0) + wx * (mf - 1.0)));
        let (a, b) = match (hold_x, hold_y) {
            (true, true) => {
                // a(p1-1) + b q1 + c r1 = 0, a q2 + b(p2-1) + c r2 = 0, a + b + c = 1
                let (m11, m12, m21, m22) = (p1 - 1.0 - r1, q1 - r1, q2 - r2, p2 - 1.0 - r2);
                let det = m11 * m22 - m12 * m21;
                if det.abs() < 1e-300 {
                    return None;
                }
                ((-r1 * m22 + r2 * m12) / det, (-r2 * m11 + r1 * m21) / det)
            }
            (true, false) => (r1 / (1.0 - p1 + r1), 0.0),
            (false, true) => (0.0, r2 / (1.0 - p2 + r2)),
            (false, false) => (0.0, 0.0),
        };
        let c = 1.0 - a - b;
        if !(in_range(a) && in_range(b) && in_range(c)) || !(a.is_finite() && b.is_finite()) {
            return None;
        }
        let (a, b, c) = (a.clamp(0.0, 1.0), b.clamp(0.0, 1.0), c.clamp(0.0, 1.0));
        let low = if j >= 2 { a + b } else { 0.0 };
        Some(Picks {
            list: vec![(Side2::R, j, a), (Side2::L, j, b), (Side2::R, m, c * wx), (Side2::L, m, c * wy)],
            hold_x: hold_x.then_some(j),
            hold_y: hold_y.then_some(j),
            no_deg1: low + c,
        })
    }

    /// Feasible pick rules at state `s`, preferred first; empty once nothing is left to pick.
    fn modes_at(&self, s: &[f64]) -> Vec<Mode> {
        let x = self.lay.x(s);
        let y = self.lay.y(s);
        let m = match self.spec.algo {
            Algo::Greedy => return min_class(x).map(|_| vec![Mode::Greedy]).unwrap_or_default(),
            Algo::Oks => min_class(x),
            _ => match (min_class(x), min_class(y)) {
                (None, None) => None,
                (a, b) => Some(a.unwrap_or(usize::MAX).min(b.unwrap_or(usize::MAX))),
            },
        };
        let Some(m) = m else { return Vec::new() };
        if m == 1 {
            return vec![Mode::Pure(1)];
        }
        let holds: &[(bool, bool)] =
            if self.spec.algo == Algo::Oks { &[(true, false)] } else { &[(true, true), (true, false), (false, true)] };
        let mut out: Vec<Mode> = holds
            .iter()
            .map(|&(hold_x, hold_y)| Mode::Slide { m, hold_x, hold_y })
            .filter(|&mode| self.picks(mode, s).is_some())
            .collect();
        out.push(Mode::Pure(m));
        out
    }

    /// Time derivative of the flat state under `mode`.
    fn eval(&self, mode: Mode, s: &[f64], out: &mut [f64]) -> Option<()> {
        let p = self.picks(mode, s)?;
        let n = self.lay.n;
        let x = self.lay.x(s);
        let y = self.lay.y(s);
        let st = stats(x, y);
        let (mut sx, mut rx, mut sy, mut ry) = (0.0, 0.0, 0.0, 0.0);
        out.iter_mut().for_each(|v| *v = 0.0);
        for &(side, k, w) in &p.list {
            if w == 0.0 {
                continue;
            }
            match side {
                Side2::R => {
                    out[k] -= w;
                    sx += w * (st.ek_y - 1.0);
                    sy += w * (k as f64 - 1.0);
                    ry += w;
                }
                Side2::L => {
                    out[n + 1 + k] -= w;
                    sy += w * (st.ek_x - 1.0);
                    sx += w * (k as f64 - 1.0);
                    rx += w;
                }
            }
        }
        shift(x, sx / st.mu_x, rx / st.mu_x, &mut out[..=n]);
        shift(y, sy / st.mu_y, ry / st.mu_y, &mut out[n + 1..2 * (n + 1)]);
        if let Some(j) = p.hold_x {
            out[j] = 0.0;
        }
        if let Some(j) = p.hold_y {
            out[n + 1 + j] = 0.0;
        }
        out[self.lay.z()] = p.no_deg1;
        Some(())
    }
}

/// Adds `s (SAv - Av) - r Av` to `out`, with slot 0 receiving the flow out of degree one.
fn shift(v: &[f64], s: f64, r: f64, out: &mut [f64]) {
    let n = v.len() - 1;
    out[0] += s * v[1];
    for k in 1..=n {
        let up = if k < n { (k + 1) as f64 * v[k + 1] } else { 0.0 };
        out[k] += s * (up - k as f64 * v[k]) - r * k as f64 * v[k];
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub states: Vec<DegreeState>,
    /// Fraction of picks at degree two or more over `[t_i, t_{i+1}]`, per step.
    pub pick_rates: Vec<f64>,
    /// Whether the min-degree class was above one at the start of each step.
    pub no_deg1_steps: Vec<bool>,
    pub t_stop: f64,
    pub unmatched_fraction: f64,
    pub unmatched_fraction_left: f64,
    pub eps_stop: f64,
}

impl Trajectory {
    pub fn last(&self) -> &DegreeState {
        self.states.last().expect("trajectory has at least the initial state")
    }

    /// Linear interpolation at time `t`, clamped to the integration window.
    pub fn at(&self, t: f64) -> DegreeState {
        let st = &self.states;
        if t <= st[0].t {
            return st[0].clone();
        }
        if t >= self.t_stop {
            return self.last().clone();
        }
        let i = st.partition_point(|s| s.t <= t);
        let (a, b) = (&st[i - 1], &st[i]);
        let f = if b.t > a.t { (t - a.t) / (b.t - a.t) } else { 0.0 };
        let lerp = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(p, q)| p + f * (q - p)).collect();
        DegreeState { t, x: lerp(&a.x, &b.x), y: lerp(&a.y, &b.y) }
    }

    /// Writes columns `t, x0..xN, y0..yN`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let n = self.states[0].x.len() - 1;
        let mut head = vec!["t".to_string()];
        head.extend((0..=n).map(|k| format!("x{k}")));
        head.extend((0..=n).map(|k| format!("y{k}")));
        writeln!(w, "{}", head.join(","))?;
        for s in &self.states {
            let row: Vec<String> = std::iter::once(s.t).chain(s.x.iter().copied()).chain(s.y.iter().copied()).map(|v| format!("{v:e}")).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Public field evaluation at a state, using the pick rule the state implies.
///
/// Returns `None` when either edge mass is at or below `eps_stop`.
pub fn vector_field(spec: &OdeSpec, state: &DegreeState) -> Option<(Vec<f64>, Vec<f64>)> {
    let f = Field::new(spec);
    let n = spec.n_max;
    let mut s = vec![0.0; f.lay.len()];
    s[..=n].copy_from_slice(&state.x);
    s[n + 1..2 * (n + 1)].copy_from_slice(&state.y);
    if state.edge_mass_x() <= spec.eps_stop || state.edge_mass_y() <= spec.eps_stop {
        return None;
    }
    let mode = *f.modes_at(&s).first()?;
    let mut d = vec![0.0; s.len()];
    f.eval(mode, &s, &mut d)?;
    Some((d[..=n].to_vec(), d[n + 1..2 * (n + 1)].to_vec()))
}

fn padded(d: &DegreeDist, n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n + 1];
    for (k, &p) in d.pmf().iter().enumerate().take(n + 1) {
        v[k] = p;
    }
    v
}

fn rk4(f: &Field, mode: Mode, s: &[f64], h: f64) -> Option<Vec<f64>> {
    let len = s.len();
    let mut k: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; len]);
    let mut tmp = vec![0.0; len];
    f.eval(mode, s, &mut k[0])?;
    for (stage, c) in [(1usize, 0.5), (2, 0.5), (3, 1.0)] {
        for i in 0..len {
            tmp[i] = s[i] + c * h * k[stage - 1][i];
        }
        f.eval(mode, &tmp, &mut k[stage])?;
    }
    Some((0..len).map(|i| s[i] + h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i])).collect())
}

fn snap(s: &mut [f64], n: usize, thr: f64) {
    for i in (1..=n).chain(n + 2..2 * (n + 1)) {
        if s[i].abs() < thr {
            s[i] = 0.0;
        }
    }
}

/// Largest step up to `h` that keeps the state nonnegative and `mode` feasible.
/// Returns `(mode, step, next state, whether the step was shortened)`.
fn try_step(f: &Field, mode: Mode, s: &[f64], h: f64) -> Option<(Mode, f64, Vec<f64>, bool)> {
    let n = f.lay.n;
    let accept = |h: f64| -> Option<Vec<f64>> {
        let next = rk4(f, mode, s, h)?;
        let negative = (1..=n).any(|i| next[i] < -NEG_TOL || next[n + 1 + i] < -NEG_TOL);
        (!negative && f.picks(mode, &next).is_some()).then_some(next)
    };
    if let Some(next) = accept(h) {
        return Some((mode, h, next, false));
    }
    let (mut lo, mut hi) = (0.0, h);
    let mut best = None;
    for _ in 0..BISECTIONS {
        let mid = 0.5 * (lo + hi);
        match accept(mid) {
            Some(v) => {
                lo = mid;
                best = Some(v);
            }
            None => hi = mid,
        }
    }
    best.filter(|_| lo > MIN_STEP).map(|v| (mode, lo, v, true))
}

pub fn integrate(spec: &OdeSpec) -> Result<Trajectory> {
    spec.validate()?;
    let f = Field::new(spec);
    let n = spec.n_max;
    let lay = &f.lay;
    let mut s = vec![0.0; lay.len()];
    s[..=n].copy_from_slice(&padded(&spec.init_in, n));
    s[n + 1..2 * (n + 1)].copy_from_slice(&padded(&spec.init_out, n));

    let mut t = 0.0;
    let mut states = vec![DegreeState { t, x: lay.x(&s).to_vec(), y: lay.y(&s).to_vec() }];
    let mut pick_rates = Vec::new();
    let mut no_deg1_steps = Vec::new();
    let mut stalls = 0;

    let dump = |s: &[f64], t: f64| format!("t={t} x={:?} y={:?}", lay.x(s), lay.y(s));

    for _ in 0..MAX_STEPS {
        let (x, y) = (lay.x(&s), lay.y(&s));
        let st = stats(x, y);
        if !(st.mu_x > spec.eps_stop && st.mu_y > spec.eps_stop) {
            break;
        }
        let modes = f.modes_at(&s);
        if modes.is_empty() {
            break;
        }
        let stiff = spec.safety * st.mu_x.min(st.mu_y) / (n as f64 * (1.0 + st.ek_x.max(st.ek_y)));
        let h = spec.h_max.min(stiff);
        let Some((mode, step, next, event)) = modes.iter().find_map(|&mode| try_step(&f, mode, &s, h)) else {
            stalls += 1;
            if stalls > MAX_STALLS {
                return Err(Error::Integration {
                    msg: format!("step underflow below {MIN_STEP:e} at t = {t}"),
                    state: dump(&s, t),
                });
            }
            snap(&mut s, n, SNAP * 1e3);
            continue;
        };
        stalls = 0;
        let rate = (next[lay.z()] - s[lay.z()]) / step.max(f64::MIN_POSITIVE);
        pick_rates.push(if step > 0.0 { rate } else { 0.0 });
        let m_above_one = match mode {
            Mode::Greedy => false,
            Mode::Pure(m) | Mode::Slide { m, .. } => m >= 2,
        };
        no_deg1_steps.push(m_above_one);
        s = next;
        if event {
            snap(&mut s, n, SNAP);
        }
        t += step;
        states.push(DegreeState { t, x: lay.x(&s).to_vec(), y: lay.y(&s).to_vec() });
    }
    let last = states.last().expect("initial state present");
    Ok(Trajectory {
        t_stop: t,
        unmatched_fraction: last.x0(),
        unmatched_fraction_left: last.y0(),
        eps_stop: spec.eps_stop,
        states,
        pick_rates,
        no_deg1_steps,
    })
}

/// Share of `[0, T]` during which the minimum positive degree exceeds one.
pub fn fraction_time_no_deg1(traj: &Trajectory) -> f64 {
    if traj.t_stop <= 0.0 {
        return 0.0;
    }
    let w: f64 = traj
        .states
        .windows(2)
        .zip(&traj.no_deg1_steps)
        .filter(|(_, &b)| b)
        .map(|(p, _)| p[1].t - p[0].t)
        .fold(0.0, |a, b| a + b);
    w / traj.t_stop
}

/// Share of picks over `[0, T]` made at degree two or more (time-weighted).
pub fn fraction_picks_no_deg1(traj: &Trajectory) -> f64 {
    if traj.t_stop <= 0.0 {
        return 0.0;
    }
    let w: f64 = traj.states.windows(2).zip(&traj.pick_rates).map(|(p, r)| (p[1].t - p[0].t) * r).fold(0.0, |a, b| a + b);
    w / traj.t_stop
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareReport {
    pub n: usize,
    pub seeds: usize,
    /// Largest `sup_t ||X(t) - x(t)||_1` over seeds (right side, including slot 0).
    pub sup_deviation_max: f64,
    pub sup_deviation_mean: f64,
    /// Mean of `|J|/n`, picks made at degree two or more.
    pub no_deg1_fraction_mean: f64,
    pub discrete_unmatched_mean: f64,
    pub ode_unmatched: f64,
}

pub const COMPARE_MAX_N: usize = 1_000_000;
const GRID: usize = 400;

/// Runs the discrete algorithm on configuration-model graphs drawn from the
/// spec's initial laws and measures the distance to the ODE trajectory.
pub fn compare_discrete(spec: &OdeSpec, n: usize, seeds: &[u64]) -> Result<CompareReport> {
    if n > COMPARE_MAX_N {
        return Err(Error::Guard(format!("compare_discrete needs n <= {COMPARE_MAX_N}")));
    }
    if seeds.is_empty() {
        return Err(Error::Input("at least one seed is required".into()));
    }
    let traj = integrate(spec)?;
    let grid: Vec<DegreeState> = (0..=GRID).map(|g| traj.at(g as f64 / GRID as f64)).collect();
    let gspec = GenSpec {
        dist_in: Some(spec.init_in.clone()),
        dist_out: Some(spec.init_out.clone()),
        ..GenSpec::new(Model::DdDirected, n, spec.init_in.mean(), 0)
    };
    let mut devs = Vec::new();
    let mut no_deg1 = Vec::new();
    let mut unmatched = Vec::new();
    for &seed in seeds {
        let mut r = rng::seeded(seed);
        let net = generate_with(&gspec, &mut r)?;
        let nf = n as f64;
        let mut sup: f64 = 0.0;
        let mut next_g = 0usize;
        let mut record = |matched: usize, counts: &dyn Fn(usize) -> f64, max_deg: usize, x0: f64| {
            while next_g <= GRID && next_g as f64 / GRID as f64 <= matched as f64 / nf {
                let ode = &grid[next_g];
                let mut d = (x0 - ode.x[0]).abs();
                for k in 1..=max_deg.max(ode.x.len() - 1) {
                    let o = ode.x.get(k).copied().unwrap_or(0.0);
                    d += (counts(k) / nf - o).abs();
                }
                sup = sup.max(d);
                next_g += 1;
            }
        };
        let degrees = net.degrees(crate::graph::Side::Right).to_vec();
        let mut init = vec![0.0; degrees.iter().copied().max().unwrap_or(0) + 1];
        for d in degrees {
            init[d] += 1.0;
        }
        record(0, &|k| init.get(k).copied().unwrap_or(0.0), init.len() - 1, init[0] / nf);
        let mut obs = |p: &Progress| {
            let x0 = (p.dropped_right + p.right.count(0)) as f64 / nf;
            record(p.matched, &|k| p.right.count(k) as f64, p.right.max_degree(), x0);
        };
        let stats = run_heuristic(spec.algo, &net, &mut r, Some(&mut obs))?;
        devs.push(sup);
        no_deg1.push(stats.iterations_no_deg1 as f64 / nf);
        unmatched.push(stats.unmatched_right() as f64 / nf);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Ok(CompareReport {
        n,
        seeds: seeds.len(),
        sup_deviation_max: devs.iter().copied().fold(0.0, f64::max),
        sup_deviation_mean: mean(&devs),
        no_deg1_fraction_mean: mean(&no_deg1),
        discrete_unmatched_mean: mean(&unmatched),
        ode_unmatched: traj.unmatched_fraction,
    })
}
