//! Asymptotic predictors: generating functions, the four-variable fixed point
//! for the maximum matching, Poisson Karp-Sipser constants, and Greedy laws.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gen::DegreeDist;
use crate::graph::{BipartiteNet, Side};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const MAX_ITERATIONS: usize = 1_000_000;

/// Monotone sweeps before switching to a bracketed root search.
const SWEEPS_BEFORE_BRACKET: usize = 2_000;
const SCAN_STEPS: usize = 10_000;

/// `Φ(u) = Σ p(k) u^k` and `φ(u) = Φ'(u) / μ` of a degree distribution.
#[derive(Clone, Debug)]
pub struct GenFunc {
    base: DegreeDist,
    mu: f64,
}

impl GenFunc {
    pub fn new(base: DegreeDist) -> Self {
        let mu = base.mean();
        GenFunc { base, mu }
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn base(&self) -> &DegreeDist {
        &self.base
    }

    fn big_phi(&self, u: f64) -> f64 {
        self.base.pmf().iter().rev().fold(0.0, |acc, &p| acc * u + p)
    }

    fn small_phi(&self, u: f64) -> f64 {
        let pmf = self.base.pmf();
        let d = (1..pmf.len()).rev().fold(0.0, |acc, k| acc * u + k as f64 * pmf[k]);
        d / self.mu
    }
}

/// Returns `(Φ(u), φ(u))`.
pub fn eval_mgf(gf: &GenFunc, u: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::Domain(format!("u = {u} outside [0, 1]")));
    }
    if gf.mu <= 0.0 {
        return Err(Error::Domain("φ is undefined for a distribution with zero mean".into()));
    }
    Ok((gf.big_phi(u), gf.small_phi(u)))
}

#[derive(Clone, Debug, Serialize)]
pub struct FixedPointSolution {
    pub w: [f64; 4],
    pub u_star: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Smallest fixed point of a nondecreasing map of `[0, 1]` into itself.
///
/// Iterates from zero; if the sweeps stall (tangential fixed points converge
/// only algebraically) the root is bracketed by a forward scan from the
/// current iterate and refined by bisection.
fn smallest_fixed_point(g: impl Fn(f64) -> f64, tol: f64) -> Result<(f64, usize)> {
    let mut w = 0.0;
    for it in 1..=MAX_ITERATIONS {
        let next = g(w);
        if next < w - 1e-15 {
            return Err(Error::Convergence {
                msg: format!("iteration decreased at sweep {it}: {w} -> {next}"),
                residual: w - next,
            });
        }
        if (next - w).abs() < tol {
            return Ok((next, it));
        }
        w = next;
        if it == SWEEPS_BEFORE_BRACKET {
            if let Some((root, steps)) = bracket_root(&g, w, tol) {
                return Ok((root, it + steps));
            }
        }
    }
    Err(Error::Convergence {
        msg: format!("no fixed point within {MAX_ITERATIONS} sweeps"),
        residual: (g(w) - w).abs(),
    })
}

fn bracket_root(g: &impl Fn(f64) -> f64, lo: f64, tol: f64) -> Option<(f64, usize)> {
    let f = |x: f64| g(x) - x;
    let step = (1.0 - lo) / SCAN_STEPS as f64;
    let mut a = lo;
    for j in 1..=SCAN_STEPS {
        let b = if j == SCAN_STEPS { 1.0 } else { lo + j as f64 * step };
        if f(b) <= 0.0 {
            let (mut a, mut b) = (a, b);
            let mut steps = 0;
            while b - a > f64::EPSILON * b.max(1e-300) && steps < 200 {
                let mid = 0.5 * (a + b);
                if f(mid) > 0.0 {
                    a = mid;
                } else {
                    b = mid;
                }
                steps += 1;
            }
            let root = if f(b).abs() <= f(a).abs() { b } else { a };
            return (f(root).abs() < tol).then_some((root, steps));
        }
        a = b;
    }
    None
}

/// Solution `(w1, w2, w3, w4)` of the maximum-matching system and the
/// unmatched fraction `U*`.
///
/// `(w2, w3)` is the smallest solution of its pair. The second pair is the
/// first one reflected through `w -> 1 - w`, so `(w1, w4) = (1 - w2, 1 - w3)`
/// solves it; taking its own smallest root instead picks a spurious solution
/// whenever the two degree laws differ or a law has no mass at degree one.
pub fn solve_fixed_point(gf_in: &GenFunc, gf_out: &GenFunc, tol: f64) -> Result<FixedPointSolution> {
    if (gf_in.mu - gf_out.mu).abs() > 1e-9 {
        return Err(Error::Input(format!(
            "in- and out-degree means differ: {} vs {}",
            gf_in.mu, gf_out.mu
        )));
    }
    if gf_in.mu <= 0.0 {
        return Err(Error::Domain("degree distributions have zero mean".into()));
    }
    let clamp = |x: f64| x.clamp(0.0, 1.0);
    // w2 = 1 - φ_out(1 - w3), w3 = φ_in(w2).
    let (w3, iterations) = smallest_fixed_point(|w| clamp(gf_in.small_phi(clamp(1.0 - gf_out.small_phi(1.0 - w)))), tol)?;
    let w2 = clamp(1.0 - gf_out.small_phi(1.0 - w3));
    let (w1, w4) = (1.0 - w2, 1.0 - w3);
    let w = [w1, w2, w3, w4];
    Ok(FixedPointSolution { w, u_star: unmatched_fraction(gf_in, gf_out, w).clamp(0.0, 1.0), residual: residual(gf_in, gf_out, w), iterations })
}

/// Largest violation of the four fixed-point equations at `w`.
pub fn residual(gf_in: &GenFunc, gf_out: &GenFunc, w: [f64; 4]) -> f64 {
    let [w1, w2, w3, w4] = w;
    [
        (gf_out.small_phi(1.0 - w3) - (1.0 - w2)).abs(),
        (gf_in.small_phi(w2) - w3).abs(),
        (gf_in.small_phi(1.0 - w1) - (1.0 - w4)).abs(),
        (gf_out.small_phi(w4) - w1).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

/// The unmatched-fraction functional evaluated at `w`.
pub fn unmatched_fraction(gf_in: &GenFunc, gf_out: &GenFunc, w: [f64; 4]) -> f64 {
    let [w1, w2, w3, w4] = w;
    0.5 * (gf_in.big_phi(1.0 - w1) + gf_in.big_phi(w2) + gf_out.big_phi(1.0 - w3) + gf_out.big_phi(w4) - 2.0
        + gf_in.mu * (w3 * (1.0 - w2) + w1 * (1.0 - w4)))
}

#[derive(Clone, Debug, Serialize)]
pub struct PoissonKS {
    pub lambda: f64,
    pub gamma_star_lo: f64,
    pub gamma_star_hi: f64,
    pub k_lambda: f64,
    pub h_lambda: f64,
}

/// Karp-Sipser constants for Poisson(λ) degrees.
pub fn solve_poisson_ks(lambda: f64) -> Result<PoissonKS> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("λ must be positive and finite, got {lambda}")));
    }
    let g = |x: f64| x - lambda * (-lambda * (-x).exp()).exp();
    let hi = lambda.max(1.0);
    let mut a = 0.0;
    let mut root = None;
    for j in 1..=SCAN_STEPS {
        let b = hi * j as f64 / SCAN_STEPS as f64;
        if g(b) >= 0.0 {
            let (mut lo, mut up) = (a, b);
            for _ in 0..200 {
                let mid = 0.5 * (lo + up);
                if mid <= lo || mid >= up {
                    break;
                }
                if g(mid) < 0.0 {
                    lo = mid;
                } else {
                    up = mid;
                }
            }
            root = Some(if g(up).abs() <= g(lo).abs() { up } else { lo });
            break;
        }
        a = b;
    }
    // g(max(λ, 1)) >= 0 always since the right-hand side is below λ.
    let lo = root.ok_or_else(|| Error::Convergence { msg: "no root of γ = λexp(-λe^-γ) found".into(), residual: f64::NAN })?;
    let hi_root = lambda * (-lo).exp();
    let k = (lo + hi_root + lo * hi_root) / lambda - 1.0;
    let h = if lambda <= std::f64::consts::E { 0.0 } else { (1.0 - lo) * (hi_root - lo) / lambda };
    Ok(PoissonKS { lambda, gamma_star_lo: lo, gamma_star_hi: hi_root, k_lambda: k, h_lambda: h })
}

/// Law of the number `k` of unmatched right vertices after Greedy on a
/// directed ER graph with edge probability `p`; index `k` runs over `0..=n`.
pub fn greedy_pmf_directed_er(n: usize, p: f64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("p = {p} outside [0, 1]")));
    }
    let mut pmf = vec![0.0; n + 1];
    if p == 1.0 {
        pmf[0] = 1.0;
        return Ok(pmf);
    }
    if p == 0.0 {
        pmf[n] = 1.0;
        return Ok(pmf);
    }
    let log_q = (-p).ln_1p();
    // log α_i = Σ_{j<=i} ln(1 - q^j)
    let mut log_alpha = vec![0.0; n + 1];
    for i in 1..=n {
        log_alpha[i] = log_alpha[i - 1] + (-(i as f64 * log_q).exp_m1()).ln();
    }
    for (k, slot) in pmf.iter_mut().enumerate() {
        let lp = 2.0 * log_alpha[n] - 2.0 * log_alpha[k] - log_alpha[n - k] + (k * k) as f64 * log_q;
        *slot = lp.exp();
    }
    Ok(pmf)
}

#[derive(Clone, Debug, Serialize)]
pub struct GreedyAsymptotic {
    pub matched_fraction: f64,
    pub normal_mean_coeff: f64,
    pub normal_var_coeff: f64,
}

/// Limit of `|M|/n` for Greedy with mean degree λ, with the normal law's
/// mean and variance coefficients (both to be multiplied by `n`).
pub fn greedy_asymptotic(lambda: f64) -> Result<GreedyAsymptotic> {
    if lambda.is_nan() || lambda < 0.0 {
        return Err(Error::Domain(format!("λ must be nonnegative, got {lambda}")));
    }
    if lambda == 0.0 {
        return Ok(GreedyAsymptotic { matched_fraction: 0.0, normal_mean_coeff: 0.0, normal_var_coeff: f64::INFINITY });
    }
    if lambda.is_infinite() {
        return Ok(GreedyAsymptotic { matched_fraction: 1.0, normal_mean_coeff: 1.0, normal_var_coeff: 0.0 });
    }
    // ln(2 - e^-λ) = ln(1 + (1 - e^-λ))
    let l = (-(-lambda).exp_m1()).ln_1p();
    let f = 1.0 - l / lambda;
    Ok(GreedyAsymptotic { matched_fraction: f, normal_mean_coeff: f, normal_var_coeff: 1.0 / (4.0 * lambda) })
}

/// `max(1, round(n U*))`.
pub fn predict_controllers(gf_in: &GenFunc, gf_out: &GenFunc, n: usize) -> Result<usize> {
    let sol = solve_fixed_point(gf_in, gf_out, DEFAULT_TOL)?;
    Ok(((n as f64 * sol.u_star).round() as usize).max(1))
}

/// In-degree (right side) and out-degree (left side) generating functions of a net.
pub fn empirical_gen_funcs(net: &BipartiteNet) -> Result<(GenFunc, GenFunc)> {
    let gin = GenFunc::new(DegreeDist::from_degrees(net.degrees(Side::Right))?);
    let gout = GenFunc::new(DegreeDist::from_degrees(net.degrees(Side::Left))?);
    Ok((gin, gout))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn poisson(l: f64) -> GenFunc {
        GenFunc::new(DegreeDist::poisson(l).unwrap())
    }

    #[test]
    fn mgf_examples() {
        let g = GenFunc::new(DegreeDist::point_mass(1));
        for u in [0.0, 0.3, 1.0] {
            let (a, b) = eval_mgf(&g, u).unwrap();
            assert!((a - u).abs() < 1e-15 && (b - 1.0).abs() < 1e-15);
        }
        let g = poisson(2.0);
        for u in [0.0, 0.25, 0.5, 0.9, 1.0] {
            let (a, b) = eval_mgf(&g, u).unwrap();
            let exact = (2.0 * (u - 1.0)).exp();
            assert!((a - exact).abs() < 1e-13 && (b - exact).abs() < 1e-13);
        }
        assert!((eval_mgf(&g, 0.5).unwrap().0 - 0.3678794412).abs() < 1e-10);
        let zero = GenFunc::new(DegreeDist::point_mass(0));
        assert!(matches!(eval_mgf(&zero, 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn fixed_point_one_regular() {
        let g = GenFunc::new(DegreeDist::point_mass(1));
        // φ ≡ 1 forces w2 = w4 = 0 and w1 = w3 = φ(0) = 1, the closed boundary.
        let s = solve_fixed_point(&g, &g, DEFAULT_TOL).unwrap();
        assert_eq!(s.w, [1.0, 0.0, 1.0, 0.0]);
        assert!(s.u_star.abs() < 1e-15);
    }

    #[test]
    fn fixed_point_rejects_mean_mismatch() {
        assert!(matches!(solve_fixed_point(&poisson(1.0), &poisson(2.0), DEFAULT_TOL), Err(Error::Input(_))));
    }

    #[test]
    fn fixed_point_poisson_e() {
        let g = poisson(E);
        let s = solve_fixed_point(&g, &g, DEFAULT_TOL).unwrap();
        assert!((s.u_star - (3.0 / E - 1.0)).abs() < 1e-8, "{}", s.u_star);
        assert!(s.residual < DEFAULT_TOL);
        // Symmetric input: the pairs coincide, so the mirrored vector solves the
        // system too and gives the same value.
        let mirrored = [s.w[2], s.w[1], s.w[2], s.w[1]];
        assert!(residual(&g, &g, mirrored) < DEFAULT_TOL);
        assert!((unmatched_fraction(&g, &g, mirrored) - s.u_star).abs() < 1e-8);
        let one = solve_fixed_point(&poisson(1.0), &poisson(1.0), DEFAULT_TOL).unwrap();
        assert!((one.w[0] - one.w[2]).abs() < 1e-9 && (one.w[1] - one.w[3]).abs() < 1e-9);
    }

    #[test]
    fn fixed_point_without_degree_one_mass() {
        // In-degrees 1 or 3, out-degrees 2. Viewing left vertices as edges on the
        // right side, unmatched vertices are tree components; the value below is
        // the closed form with w3 = 1/3, which exact matchings confirm.
        let gin = GenFunc::new(DegreeDist::from_weights(vec![0.0, 0.5, 0.0, 0.5]).unwrap());
        let gout = GenFunc::new(DegreeDist::point_mass(2));
        let s = solve_fixed_point(&gin, &gout, DEFAULT_TOL).unwrap();
        assert!((s.w[2] - 1.0 / 3.0).abs() < 1e-9);
        assert!((s.u_star - 2.0 / 27.0).abs() < 1e-9, "{}", s.u_star);
    }

    #[test]
    fn fixed_point_agrees_with_direct_root() {
        // For Poisson(λ) pair A reduces to w3 = exp(-λ exp(-λ w3)); find its
        // smallest root by dense scanning and compare.
        for lambda in [0.5, 1.0, 2.0, 4.0, 8.0] {
            let f = |w: f64| (-lambda * (-lambda * w).exp()).exp() - w;
            let mut a = 0.0;
            let mut root = f64::NAN;
            for j in 1..=100_000 {
                let b = j as f64 / 100_000.0;
                if f(b) <= 0.0 {
                    let (mut lo, mut hi) = (a, b);
                    for _ in 0..100 {
                        let m = 0.5 * (lo + hi);
                        if f(m) > 0.0 { lo = m } else { hi = m }
                    }
                    root = hi;
                    break;
                }
                a = b;
            }
            let g = poisson(lambda);
            let s = solve_fixed_point(&g, &g, DEFAULT_TOL).unwrap();
            assert!((s.w[2] - root).abs() < 1e-9, "λ={lambda}: {} vs {root}", s.w[2]);
        }
    }

    #[test]
    fn poisson_ks_constants() {
        let r = solve_poisson_ks(E).unwrap();
        assert!((r.k_lambda - (3.0 / E - 1.0)).abs() < 1e-12);
        assert_eq!(r.h_lambda, 0.0);
        for l in [0.3, 1.0, 2.0, 2.7] {
            let r = solve_poisson_ks(l).unwrap();
            assert_eq!(r.h_lambda, 0.0);
            let g = r.gamma_star_lo;
            assert!((g - l * (-l * (-g).exp()).exp()).abs() < 1e-12);
        }
        // λ = 1: the omega constant, since Ω = e^-Ω gives exp(-e^-Ω) = Ω.
        let r = solve_poisson_ks(1.0).unwrap();
        assert!((r.gamma_star_lo - 0.5671432904097838).abs() < 1e-12);
        let r = solve_poisson_ks(10.0).unwrap();
        assert!(r.h_lambda > 0.0 && r.k_lambda > 0.0);
        assert!(solve_poisson_ks(0.0).is_err());
    }

    #[test]
    fn greedy_pmf_small() {
        let p = 0.3;
        let pmf = greedy_pmf_directed_er(1, p).unwrap();
        assert!((pmf[0] - p).abs() < 1e-15 && (pmf[1] - (1.0 - p)).abs() < 1e-15);
        for (n, p) in [(1, 0.5), (20, 0.1), (100, 0.02), (1000, 0.002), (5, 1e-9)] {
            let s: f64 = greedy_pmf_directed_er(n, p).unwrap().iter().sum();
            assert!((s - 1.0).abs() < 1e-10, "n={n} p={p} sum={s}");
        }
        assert_eq!(greedy_pmf_directed_er(3, 1.0).unwrap(), vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(greedy_pmf_directed_er(3, 0.0).unwrap(), vec![0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn greedy_pmf_matches_enumeration_n2() {
        // Enumerate all 2^4 directed graphs on 2 vertices and both processing
        // orders with uniform neighbour choice.
        let p: f64 = 0.37;
        let mut law = [0.0; 3];
        for mask in 0u32..16 {
            let edges: Vec<(usize, usize)> =
                (0..4).filter(|b| mask >> b & 1 == 1).map(|b| (b / 2, b % 2)).collect();
            let prob = p.powi(edges.len() as i32) * (1.0 - p).powi(4 - edges.len() as i32);
            for order in [[0usize, 1], [1, 0]] {
                let (first, second) = (order[0], order[1]);
                let nb = |r: usize| edges.iter().filter(|e| e.1 == r).map(|e| e.0).collect::<Vec<_>>();
                let n1 = nb(first);
                if n1.is_empty() {
                    let k = if nb(second).is_empty() { 2 } else { 1 };
                    law[k] += prob * 0.5;
                } else {
                    for &l in &n1 {
                        let rest = nb(second).into_iter().filter(|&x| x != l).count();
                        let k = if rest > 0 { 0 } else { 1 };
                        law[k] += prob * 0.5 / n1.len() as f64;
                    }
                }
            }
        }
        let pmf = greedy_pmf_directed_er(2, p).unwrap();
        for k in 0..3 {
            assert!((pmf[k] - law[k]).abs() < 1e-14, "k={k}: {} vs {}", pmf[k], law[k]);
        }
    }

    #[test]
    fn greedy_pmf_mode_tracks_limit() {
        let n = 1000;
        let lambda = 2.0;
        let pmf = greedy_pmf_directed_er(n, lambda / n as f64).unwrap();
        let argmax = (0..=n).max_by(|&a, &b| pmf[a].total_cmp(&pmf[b])).unwrap();
        let limit = (2.0 - (-lambda).exp()).ln() / lambda;
        assert!((argmax as f64 / n as f64 - limit).abs() < 0.01);
    }

    #[test]
    fn greedy_asymptotic_values() {
        let a = greedy_asymptotic(std::f64::consts::LN_2).unwrap();
        assert!((a.matched_fraction - (1.0 - 1.5f64.ln() / 2f64.ln())).abs() < 1e-14);
        assert!((a.matched_fraction - 0.41504).abs() < 1e-5);
        // 1 - ln(2 - 1/e) = 1 - 0.48988 = 0.51012
        let a = greedy_asymptotic(1.0).unwrap();
        assert!((a.matched_fraction - 0.5101198744).abs() < 1e-9);
        assert!(greedy_asymptotic(1e-9).unwrap().matched_fraction < 1e-8);
        assert_eq!(greedy_asymptotic(0.0).unwrap().matched_fraction, 0.0);
        assert_eq!(greedy_asymptotic(f64::INFINITY).unwrap().matched_fraction, 1.0);
        assert!(greedy_asymptotic(-1.0).is_err());
    }

    #[test]
    fn controller_prediction() {
        let g = GenFunc::new(DegreeDist::point_mass(1));
        assert_eq!(predict_controllers(&g, &g, 1000).unwrap(), 1);
        let g = poisson(1.0);
        let k = solve_poisson_ks(1.0).unwrap().k_lambda;
        assert_eq!(predict_controllers(&g, &g, 100_000).unwrap(), (1e5 * k).round() as usize);
    }
}
