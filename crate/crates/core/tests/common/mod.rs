//! Dense reference computations for integration tests. Nothing here uses the
//! spatial index or the library's path loss or link code.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use udn_coop::channel::{realize_channels, ChannelRealization, PathLossLaw};
use udn_coop::config::PathLossParams;
use udn_coop::geometry::{Deployment, Point, VoronoiCells};
use udn_coop::link::compute_link_budgets;

pub fn torus_d2(side: f64, a: &Point, b: &Point) -> f64 {
    let wrap = |d: f64| {
        let d = d.abs() % side;
        d.min(side - d)
    };
    let dx = wrap(a.x - b.x);
    let dy = wrap(a.y - b.y);
    dx * dx + dy * dy
}

pub fn dual_slope(d: f64, a1: f64, a2: f64, r_b: f64, r_c: f64) -> f64 {
    if d <= r_b {
        1.0
    } else if d <= r_c {
        d.powf(-a1)
    } else {
        r_c.powf(a2 - a1) * d.powf(-a2)
    }
}

/// Cooperation sets by exhaustive search: every BS joins its nearest user
/// (lower index on ties); each user keeps its `n` nearest members.
pub fn dense_sets(dep: &Deployment, n: usize) -> Vec<Vec<usize>> {
    let side = dep.window_side;
    let mut members: Vec<Vec<(f64, usize)>> = vec![Vec::new(); dep.user_positions.len()];
    for (b, bp) in dep.bs_positions.iter().enumerate() {
        let mut best = (f64::INFINITY, usize::MAX);
        for (u, up) in dep.user_positions.iter().enumerate() {
            let d2 = torus_d2(side, bp, up);
            if d2 < best.0 {
                best = (d2, u);
            }
        }
        if best.1 != usize::MAX {
            members[best.1].push((best.0, b));
        }
    }
    members
        .into_iter()
        .map(|mut m| {
            m.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
            m.into_iter().take(n).map(|(_, b)| b).collect()
        })
        .collect()
}

pub struct DenseSir {
    pub single: f64,
    pub nj: f64,
    pub cj: f64,
}

/// SIRs of every user from a full BS × user evaluation. Fading is read from
/// `ch`; everything else is recomputed here. `None` for users with no BS.
pub fn dense_sirs(
    dep: &Deployment,
    n: usize,
    law: (f64, f64, f64, f64),
    ch: &ChannelRealization,
    cap: f64,
) -> Vec<Option<DenseSir>> {
    let (a1, a2, r_b, r_c) = law;
    let base_sets = dense_sets(dep, 1);
    let coop_sets = dense_sets(dep, n);
    let n_bs = dep.bs_positions.len();
    let mut base_active = vec![false; n_bs];
    let mut coop_active = vec![false; n_bs];
    for s in &base_sets {
        for &b in s {
            base_active[b] = true;
        }
    }
    for s in &coop_sets {
        for &b in s {
            coop_active[b] = true;
        }
    }
    let ratio = |s: f64, i: f64| if i > 0.0 { (s / i).min(cap) } else { cap };

    (0..dep.user_positions.len())
        .map(|u| {
            if coop_sets[u].is_empty() {
                return None;
            }
            let up = &dep.user_positions[u];
            let ell = |b: usize| dual_slope(torus_d2(dep.window_side, &dep.bs_positions[b], up).sqrt(), a1, a2, r_b, r_c);
            let h = |b: usize| ch.h_true[ch.index(b, u)];
            let g = |b: usize| ch.h_est[ch.index(b, u)];

            let interference = |active: &[bool], set: &[usize]| -> f64 {
                (0..n_bs)
                    .filter(|b| active[*b] && !set.contains(b))
                    .map(|b| h(b).norm_sqr() * ell(b))
                    .sum()
            };
            let s_single: f64 = base_sets[u].iter().map(|&b| h(b).norm_sqr() * ell(b)).sum();
            let s_nj: f64 = coop_sets[u].iter().map(|&b| h(b).norm_sqr() * ell(b)).sum();
            let amp: Complex64 = coop_sets[u]
                .iter()
                .map(|&b| {
                    let w = if g(b).norm() > 0.0 { g(b).conj() / g(b).norm() } else { Complex64::new(1.0, 0.0) };
                    h(b) * w * ell(b).sqrt()
                })
                .sum();
            let i_single = interference(&base_active, &base_sets[u]);
            let i_coop = interference(&coop_active, &coop_sets[u]);
            Some(DenseSir {
                single: ratio(s_single, i_single),
                nj: ratio(s_nj, i_coop),
                cj: ratio(amp.norm_sqr(), i_coop),
            })
        })
        .collect()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Outcome of comparing the indexed pipeline with the dense oracle on one
/// random small instance.
pub struct InstanceCheck {
    pub users: usize,
    pub sets_match: bool,
    pub served_match: bool,
    pub max_rel_err: f64,
}

/// Draws ≤10 users, ≤50 BSs and random model parameters, then compares
/// every SIR of the indexed pipeline with [`dense_sirs`].
pub fn check_random_instance<R: Rng>(rng: &mut R, cap: f64) -> InstanceCheck {
    let side = rng.random_range(40.0..300.0);
    let n_users = rng.random_range(1..=10);
    let n_bs = rng.random_range(1..=50);
    let n_coop = rng.random_range(1..=6);
    let a1 = rng.random_range(2.0..4.0);
    let a2 = a1 + rng.random_range(0.0..2.0);
    let r_b = rng.random_range(0.5..5.0);
    let r_c = r_b + rng.random_range(1.0..150.0);
    let rho = if rng.random_bool(0.5) { 1.0 } else { rng.random_range(0.0..1.0) };
    let pt = |rng: &mut R| Point::new(rng.random_range(0.0..side), rng.random_range(0.0..side));
    let dep = Deployment {
        bs_positions: (0..n_bs).map(|_| pt(rng)).collect(),
        user_positions: (0..n_users).map(|_| pt(rng)).collect(),
        window_side: side,
        resampled: 0,
    };

    let law = PathLossLaw::new(PathLossParams::new(a1, a2, r_b, r_c).unwrap());
    let cells = VoronoiCells::build(&dep);
    let base = cells.cooperation(1);
    let coop = cells.cooperation(n_coop);
    let sets_match = coop.coop_sets == dense_sets(&dep, n_coop) && base.coop_sets == dense_sets(&dep, 1);

    let ch = realize_channels(&dep, &coop, &law, rho, rng);
    let budgets = compute_link_budgets(&base, &coop, &ch, cap);
    let dense = dense_sirs(&dep, n_coop, (a1, a2, r_b, r_c), &ch, cap);
    let mut served_match = budgets.len() == dense.iter().flatten().count();
    let mut max_rel_err = 0.0f64;
    for lb in &budgets {
        match &dense[lb.user] {
            Some(d) => {
                for (got, want) in [(lb.sir_single, d.single), (lb.sir_nj, d.nj), (lb.sir_cj, d.cj)] {
                    max_rel_err = max_rel_err.max(rel_err(got, want));
                }
            }
            None => served_match = false,
        }
    }
    InstanceCheck {
        users: budgets.len(),
        sets_match,
        served_match,
        max_rel_err,
    }
}

const FRAC_BITS: u64 = 320;

/// `Σ (-1)^k (x²/4)^k / (k!)²` with 320 fractional bits. Every f64 is a
/// dyadic rational, so x is represented exactly.
pub fn j0_series(x: f64) -> f64 {
    let (mantissa, exponent) = {
        let bits = x.to_bits();
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        if exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), exp - 1075)
        }
    };
    // q = x²/4 = m² · 2^(2e - 2), scaled by 2^FRAC_BITS.
    let shift = 2 * exponent - 2 + FRAC_BITS as i64;
    let m2 = BigInt::from(mantissa) * BigInt::from(mantissa);
    let q = if shift >= 0 { m2 << shift as u64 } else { m2 >> (-shift) as u64 };

    let one = BigInt::one() << FRAC_BITS;
    let mut term = one.clone();
    let mut sum = one;
    let mut k: u64 = 1;
    while !term.is_zero() {
        term = ((term * &q) >> FRAC_BITS) / BigInt::from(k * k);
        if k % 2 == 1 {
            sum -= &term;
        } else {
            sum += &term;
        }
        k += 1;
    }
    let keep = 100u64;
    let top = (sum.abs() >> (FRAC_BITS - keep)).to_f64().unwrap() / 2f64.powi(keep as i32);
    if sum.is_negative() {
        -top
    } else {
        top
    }
}
