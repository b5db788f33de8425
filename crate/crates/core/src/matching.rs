//! Greedy, Karp-Sipser and one-sided Karp-Sipser heuristics, Hopcroft-Karp
//! maximum matching, and an exhaustive oracle for small nets.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{control_config, BipartiteNet, ControlConfig, Matching, Side};
use crate::rng::{self, ChaCha8Rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Greedy,
    Ks,
    Oks,
    Max,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Greedy => "greedy",
            Algo::Ks => "ks",
            Algo::Oks => "oks",
            Algo::Max => "max",
        }
    }
}

impl std::str::FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(Algo::Greedy),
            "ks" => Ok(Algo::Ks),
            "oks" => Ok(Algo::Oks),
            "max" => Ok(Algo::Max),
            _ => Err(Error::Input(format!("unknown algorithm `{s}`"))),
        }
    }
}

/// Outcome of one heuristic run.
///
/// Unmatched counts refer to the right side. Phase 2 starts at the first
/// pick made while the scanned side(s) hold no degree-one vertex and never
/// ends; `core_size` counts vertices of positive degree on both sides at that
/// instant.
#[derive(Clone, Debug, Serialize)]
pub struct RunStats {
    pub matching: Matching,
    pub unmatched_total: usize,
    pub phase1_unmatched: usize,
    pub phase2_unmatched: usize,
    pub core_size: usize,
    pub reached_phase2: bool,
    pub iterations_no_deg1: usize,
    pub rng_seed: Option<u64>,
}

impl RunStats {
    pub fn unmatched_right(&self) -> usize {
        self.matching.n - self.matching.len()
    }
}

/// Vertices of one side grouped by current degree.
#[derive(Clone, Debug)]
pub struct DegreeBuckets {
    buckets: Vec<Vec<usize>>,
    pos: Vec<usize>,
    deg: Vec<usize>,
    present: Vec<bool>,
    min: usize,
}

impl DegreeBuckets {
    fn new(degrees: &[usize]) -> Self {
        let max = degrees.iter().copied().max().unwrap_or(0);
        let mut buckets = vec![Vec::new(); max + 1];
        let mut pos = vec![0; degrees.len()];
        for (v, &d) in degrees.iter().enumerate() {
            pos[v] = buckets[d].len();
            buckets[d].push(v);
        }
        DegreeBuckets { buckets, pos, deg: degrees.to_vec(), present: vec![true; degrees.len()], min: 0 }
    }

    fn detach(&mut self, v: usize) {
        let b = &mut self.buckets[self.deg[v]];
        let i = self.pos[v];
        b.swap_remove(i);
        if i < b.len() {
            self.pos[b[i]] = i;
        }
    }

    fn remove(&mut self, v: usize) {
        if self.present[v] {
            self.detach(v);
            self.present[v] = false;
        }
    }

    fn decrement(&mut self, v: usize) {
        if !self.present[v] {
            return;
        }
        self.detach(v);
        self.deg[v] -= 1;
        let d = self.deg[v];
        self.pos[v] = self.buckets[d].len();
        self.buckets[d].push(v);
        self.min = self.min.min(d);
    }

    fn min_degree(&mut self) -> Option<usize> {
        while self.min < self.buckets.len() && self.buckets[self.min].is_empty() {
            self.min += 1;
        }
        (self.min < self.buckets.len()).then_some(self.min)
    }

    /// Number of present vertices of degree `k`.
    pub fn count(&self, k: usize) -> usize {
        self.buckets.get(k).map_or(0, Vec::len)
    }

    pub fn max_degree(&self) -> usize {
        self.buckets.len().saturating_sub(1)
    }
}

/// State visible to observers after every matched pair.
pub struct Progress<'a> {
    pub matched: usize,
    pub right: &'a DegreeBuckets,
    pub left: &'a DegreeBuckets,
    /// Right vertices removed unmatched so far.
    pub dropped_right: usize,
    pub dropped_left: usize,
}

struct Runner<'o> {
    net: BipartiteNet,
    left: DegreeBuckets,
    right: DegreeBuckets,
    matching: Matching,
    dropped_left: usize,
    dropped_right: usize,
    positive: [usize; 2],
    phase2: bool,
    u1: usize,
    u2: usize,
    core_size: usize,
    no_deg1: usize,
    /// Degree buckets are maintained; Greedy without an observer skips them.
    tracked: bool,
    observer: Option<&'o mut dyn FnMut(&Progress)>,
}

fn idx(side: Side) -> usize {
    match side {
        Side::Left => 0,
        Side::Right => 1,
    }
}

impl<'o> Runner<'o> {
    fn new(net: &BipartiteNet, observer: Option<&'o mut dyn FnMut(&Progress)>) -> Self {
        Self::with_tracking(net, observer, true)
    }

    fn with_tracking(net: &BipartiteNet, observer: Option<&'o mut dyn FnMut(&Progress)>, tracked: bool) -> Self {
        let count_pos = |s| net.degrees(s).iter().filter(|&&d| d > 0).count();
        let buckets = |s| DegreeBuckets::new(if tracked { net.degrees(s) } else { &[] });
        Runner {
            left: buckets(Side::Left),
            right: buckets(Side::Right),
            matching: Matching::new(net.n()),
            positive: [count_pos(Side::Left), count_pos(Side::Right)],
            net: net.clone(),
            dropped_left: 0,
            dropped_right: 0,
            phase2: false,
            u1: 0,
            u2: 0,
            core_size: 0,
            no_deg1: 0,
            tracked,
            observer,
        }
    }

    fn buckets(&mut self, side: Side) -> &mut DegreeBuckets {
        match side {
            Side::Left => &mut self.left,
            Side::Right => &mut self.right,
        }
    }

    fn delete(&mut self, side: Side, v: usize) {
        if self.net.degree(side, v) > 0 {
            self.positive[idx(side)] -= 1;
        }
        let other = side.other();
        if !self.tracked {
            let positive = &mut self.positive[idx(other)];
            self.net.remove_vertex_with(side, v, |_, d| {
                if d == 0 {
                    *positive -= 1;
                }
            });
            return;
        }
        self.buckets(side).remove(v);
        let (net, b, positive) = match other {
            Side::Left => (&mut self.net, &mut self.left, &mut self.positive[0]),
            Side::Right => (&mut self.net, &mut self.right, &mut self.positive[1]),
        };
        net.remove_vertex_with(side, v, |w, d| {
            b.decrement(w);
            if d == 0 {
                *positive -= 1;
            }
        });
    }

    fn drop_unmatched(&mut self, side: Side, v: usize) {
        if self.tracked {
            self.buckets(side).remove(v);
        }
        match side {
            Side::Left => self.dropped_left += 1,
            Side::Right => {
                self.dropped_right += 1;
                if self.phase2 {
                    self.u2 += 1;
                } else {
                    self.u1 += 1;
                }
            }
        }
    }

    fn sweep_isolated(&mut self, side: Side) {
        while let Some(&v) = self.buckets(side).buckets.first().and_then(|b| b.last()) {
            self.drop_unmatched(side, v);
        }
    }

    fn enter_phase2_if(&mut self, min_degree: usize) {
        if !self.phase2 && min_degree >= 2 {
            self.phase2 = true;
            self.core_size = self.positive[0] + self.positive[1];
        }
    }

    /// Matches `v` on `side` to a random live neighbour.
    fn match_vertex(&mut self, side: Side, v: usize, rng: &mut impl Rng) {
        let d = self.net.degree(side, v);
        if d >= 2 {
            self.no_deg1 += 1;
        }
        let u = self.net.random_neighbor(side, v, rng).expect("picked vertex has an edge");
        let (l, r) = match side {
            Side::Left => (v, u),
            Side::Right => (u, v),
        };
        self.matching.pairs.push((l, r));
        self.delete(side, v);
        self.delete(side.other(), u);
        if let Some(obs) = self.observer.as_mut() {
            obs(&Progress {
                matched: self.matching.len(),
                right: &self.right,
                left: &self.left,
                dropped_right: self.dropped_right,
                dropped_left: self.dropped_left,
            });
        }
    }

    fn finish(mut self, seed: Option<u64>) -> RunStats {
        let n = self.matching.n;
        let m = self.matching.len();
        if self.tracked {
            self.sweep_isolated(Side::Right);
            self.sweep_isolated(Side::Left);
        } else {
            self.dropped_left = n - m;
        }
        debug_assert_eq!(self.u1 + self.u2, n - m);
        RunStats {
            matching: self.matching,
            unmatched_total: 2 * (n - m),
            phase1_unmatched: self.u1,
            phase2_unmatched: self.u2,
            core_size: self.core_size,
            reached_phase2: self.phase2,
            iterations_no_deg1: self.no_deg1,
            rng_seed: seed,
        }
    }
}

fn run_greedy<'o>(net: &BipartiteNet, rng: &mut impl Rng, observer: Option<&'o mut dyn FnMut(&Progress)>) -> Runner<'o> {
    let tracked = observer.is_some();
    let mut run = Runner::with_tracking(net, observer, tracked);
    let mut order: Vec<usize> = (0..net.n()).collect();
    order.shuffle(rng);
    for v in order {
        if run.net.degree(Side::Right, v) == 0 {
            run.drop_unmatched(Side::Right, v);
        } else {
            run.match_vertex(Side::Right, v, rng);
        }
    }
    run
}

fn run_ks<'o>(net: &BipartiteNet, rng: &mut impl Rng, observer: Option<&'o mut dyn FnMut(&Progress)>) -> Runner<'o> {
    let mut run = Runner::new(net, observer);
    loop {
        let ml = run.left.min_degree();
        let mr = run.right.min_degree();
        let m = match (ml, mr) {
            (None, None) => break,
            (a, b) => a.unwrap_or(usize::MAX).min(b.unwrap_or(usize::MAX)),
        };
        if m == 0 {
            run.sweep_isolated(Side::Right);
            run.sweep_isolated(Side::Left);
            continue;
        }
        run.enter_phase2_if(m);
        let nl = if ml == Some(m) { run.left.count(m) } else { 0 };
        let nr = if mr == Some(m) { run.right.count(m) } else { 0 };
        let k = rng.random_range(0..nl + nr);
        if k < nr {
            let v = run.right.buckets[m][k];
            run.match_vertex(Side::Right, v, rng);
        } else {
            let v = run.left.buckets[m][k - nr];
            run.match_vertex(Side::Left, v, rng);
        }
    }
    run
}

fn run_oks<'o>(net: &BipartiteNet, rng: &mut impl Rng, observer: Option<&'o mut dyn FnMut(&Progress)>) -> Runner<'o> {
    let mut run = Runner::new(net, observer);
    while let Some(m) = run.right.min_degree() {
        if m == 0 {
            run.sweep_isolated(Side::Right);
            continue;
        }
        run.enter_phase2_if(m);
        let k = rng.random_range(0..run.right.count(m));
        let v = run.right.buckets[m][k];
        run.match_vertex(Side::Right, v, rng);
    }
    run
}

/// Runs a heuristic with an explicit random stream and an optional observer.
pub fn run_heuristic(
    algo: Algo,
    net: &BipartiteNet,
    rng: &mut ChaCha8Rng,
    observer: Option<&mut dyn FnMut(&Progress)>,
) -> Result<RunStats> {
    let run = match algo {
        Algo::Greedy => run_greedy(net, rng, observer),
        Algo::Ks => run_ks(net, rng, observer),
        Algo::Oks => run_oks(net, rng, observer),
        Algo::Max => return Err(Error::Input("`max` is not a heuristic".into())),
    };
    Ok(run.finish(None))
}

fn seeded_run(algo: Algo, net: &BipartiteNet, seed: u64) -> RunStats {
    let mut stats = run_heuristic(algo, net, &mut rng::seeded(seed), None).expect("heuristic algorithm");
    stats.rng_seed = Some(seed);
    stats
}

/// Processes right vertices in random order, matching each to a random neighbour.
pub fn greedy(net: &BipartiteNet, seed: u64) -> RunStats {
    seeded_run(Algo::Greedy, net, seed)
}

/// Repeatedly matches a minimum-degree vertex from either side.
pub fn karp_sipser(net: &BipartiteNet, seed: u64) -> RunStats {
    seeded_run(Algo::Ks, net, seed)
}

/// Karp-Sipser restricted to minimum-degree vertices on the right side.
pub fn one_sided_karp_sipser(net: &BipartiteNet, seed: u64) -> RunStats {
    seeded_run(Algo::Oks, net, seed)
}

const NONE: usize = usize::MAX;

/// Hopcroft-Karp on the deduplicated adjacency, scanning vertices by ascending id.
pub fn max_matching(net: &BipartiteNet) -> Matching {
    let n = net.n();
    let adj = net.simple_adjacency();
    let mut mate_l = vec![NONE; n];
    let mut mate_r = vec![NONE; n];
    let mut dist = vec![NONE; n];
    let mut it = vec![0usize; n];
    let mut queue = Vec::with_capacity(n);
    let mut stack = Vec::new();

    // Cheap greedy start.
    for u in 0..n {
        if let Some(&v) = adj[u].iter().find(|&&v| mate_r[v] == NONE) {
            mate_l[u] = v;
            mate_r[v] = u;
        }
    }

    loop {
        queue.clear();
        for u in 0..n {
            if mate_l[u] == NONE {
                dist[u] = 0;
                queue.push(u);
            } else {
                dist[u] = NONE;
            }
        }
        let mut found = false;
        let mut head = 0;
        while head < queue.len() {
            let u = queue[head];
            head += 1;
            for &v in &adj[u] {
                let w = mate_r[v];
                if w == NONE {
                    found = true;
                } else if dist[w] == NONE {
                    dist[w] = dist[u] + 1;
                    queue.push(w);
                }
            }
        }
        if !found {
            break;
        }
        it.iter_mut().for_each(|x| *x = 0);
        for root in 0..n {
            if mate_l[root] != NONE {
                continue;
            }
            stack.clear();
            stack.push(root);
            while let Some(&u) = stack.last() {
                if it[u] == adj[u].len() {
                    dist[u] = NONE;
                    stack.pop();
                    continue;
                }
                let v = adj[u][it[u]];
                it[u] += 1;
                let w = mate_r[v];
                if w == NONE {
                    for &x in stack.iter().rev() {
                        let y = adj[x][it[x] - 1];
                        mate_r[y] = x;
                        mate_l[x] = y;
                    }
                    break;
                } else if dist[w] == dist[u] + 1 {
                    stack.push(w);
                }
            }
        }
    }
    let pairs = (0..n).filter(|&u| mate_l[u] != NONE).map(|u| (u, mate_l[u])).collect();
    Matching::from_pairs(n, pairs)
}

pub const BRUTE_FORCE_MAX_N: usize = 12;

/// Exhaustive maximum matching by branching on right vertices.
pub fn brute_force_max(net: &BipartiteNet) -> Result<Matching> {
    let n = net.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::Guard(format!("brute force needs n <= {BRUTE_FORCE_MAX_N}, got {n}")));
    }
    // Left neighbour mask of each right vertex.
    let mut nb = vec![0u32; n];
    for (l, r) in net.edges() {
        nb[r] |= 1 << l;
    }
    // best[r][mask]: most extra pairs using right vertices r.. with left set `mask` taken.
    let full = 1usize << n;
    let mut best = vec![vec![0u8; full]; n + 1];
    for r in (0..n).rev() {
        for mask in 0..full {
            let mut b = best[r + 1][mask];
            let mut free = nb[r] & !(mask as u32);
            while free != 0 {
                let l = free.trailing_zeros() as usize;
                free &= free - 1;
                b = b.max(1 + best[r + 1][mask | 1 << l]);
            }
            best[r][mask] = b;
        }
    }
    let mut pairs = Vec::new();
    let mut mask = 0usize;
    for r in 0..n {
        let target = best[r][mask];
        if best[r + 1][mask] == target {
            continue;
        }
        let mut free = nb[r] & !(mask as u32);
        while free != 0 {
            let l = free.trailing_zeros() as usize;
            free &= free - 1;
            if 1 + best[r + 1][mask | 1 << l] == target {
                pairs.push((l, r));
                mask |= 1 << l;
                break;
            }
        }
    }
    Ok(Matching::from_pairs(n, pairs))
}

pub fn run_matching(net: &BipartiteNet, algo: Algo, seed: u64) -> Matching {
    match algo {
        Algo::Greedy => greedy(net, seed).matching,
        Algo::Ks => karp_sipser(net, seed).matching,
        Algo::Oks => one_sided_karp_sipser(net, seed).matching,
        Algo::Max => max_matching(net),
    }
}

/// Controller placement from the chosen algorithm's matching.
pub fn controllers(net: &BipartiteNet, algo: Algo, seed: u64) -> ControlConfig {
    control_config(net, &run_matching(net, algo, seed)).expect("algorithms return valid matchings")
}
