//! Desired signal, interference and SIR under single association,
//! non-coherent joint transmission and coherent (MRT) joint transmission.

use crate::channel::ChannelRealization;
use crate::geometry::CooperationAssignment;

/// `Σ |h|² ℓ` over the cooperating BSs (unit precoders).
pub fn signal_power_noncoherent(coop: &[usize], channels: &ChannelRealization, user: usize) -> f64 {
    coop.iter().map(|&b| channels.gain(channels.index(b, user))).sum()
}

/// Coherent power and the number of members whose estimate was exactly zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentPower {
    pub power: f64,
    pub degenerate: usize,
}

/// `|Σ h_true · w · √ℓ|²` with the MRT precoder `w = conj(h_est)/|h_est|`.
///
/// A member whose estimate is exactly zero has no defined phase; it
/// transmits with `w = 1` and is counted.
pub fn signal_power_coherent(coop: &[usize], channels: &ChannelRealization, user: usize) -> CoherentPower {
    let mut sum = num_complex::Complex64::new(0.0, 0.0);
    let mut degenerate = 0;
    for &b in coop {
        let i = channels.index(b, user);
        let est = channels.h_est[i];
        let mag = est.norm();
        let w = if mag > 0.0 {
            est.conj() / mag
        } else {
            degenerate += 1;
            num_complex::Complex64::new(1.0, 0.0)
        };
        sum += channels.h_true[i] * w * channels.loss[i].sqrt();
    }
    CoherentPower {
        power: sum.norm_sqr(),
        degenerate,
    }
}

/// `Σ |h|² ℓ` over `active_set \ coop`.
///
/// `active_set` must be ascending (as produced by the assignment); `coop` is
/// usually tiny, so membership is a linear scan.
pub fn interference_power(
    active_set: &[usize],
    coop: &[usize],
    channels: &ChannelRealization,
    user: usize,
) -> f64 {
    active_set
        .iter()
        .filter(|b| !coop.contains(b))
        .map(|&b| channels.gain(channels.index(b, user)))
        .sum()
}

/// `min(signal / interference, cap)`; zero interference gives the cap.
pub fn sir(signal: f64, interference: f64, cap: f64) -> f64 {
    if interference > 0.0 {
        (signal / interference).min(cap)
    } else {
        cap
    }
}

/// Per-user powers and SIRs for all three schemes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub user: usize,
    pub s_single: f64,
    pub s_nj: f64,
    pub s_cj: f64,
    /// Interference with one active BS per user.
    pub i_single: f64,
    /// Interference with every cooperating BS active.
    pub i_coop: f64,
    pub sir_single: f64,
    pub sir_nj: f64,
    pub sir_cj: f64,
    /// Cooperating BSs whose MRT precoder fell back to unit gain.
    pub degenerate_precoders: usize,
}

impl LinkBudget {
    /// True when either scenario saw no interferer at all.
    pub fn interference_free(&self) -> bool {
        self.i_single == 0.0 || self.i_coop == 0.0
    }
}

/// Link budgets for every user with a non-empty cell.
///
/// `baseline` is the `N = 1` assignment and `coop` the `N`-BS one, both from
/// the same deployment. `channels` must cover the cooperation active set,
/// which contains the baseline one, so shared links reuse the same draws.
pub fn compute_link_budgets(
    baseline: &CooperationAssignment,
    coop: &CooperationAssignment,
    channels: &ChannelRealization,
    sir_cap: f64,
) -> Vec<LinkBudget> {
    let mut out = Vec::with_capacity(coop.coop_sets.len());
    for (user, set) in coop.coop_sets.iter().enumerate() {
        if set.is_empty() {
            continue;
        }
        let serving = &baseline.coop_sets[user];
        let s_single = signal_power_noncoherent(serving, channels, user);
        let i_single = interference_power(&baseline.active_set, serving, channels, user);
        let s_nj = signal_power_noncoherent(set, channels, user);
        let cj = signal_power_coherent(set, channels, user);
        let i_coop = interference_power(&coop.active_set, set, channels, user);
        out.push(LinkBudget {
            user,
            s_single,
            s_nj,
            s_cj: cj.power,
            i_single,
            i_coop,
            sir_single: sir(s_single, i_single, sir_cap),
            sir_nj: sir(s_nj, i_coop, sir_cap),
            sir_cj: sir(cj.power, i_coop, sir_cap),
            degenerate_precoders: cj.degenerate,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{realize_channels, PathLossLaw};
    use crate::config::PathLossParams;
    use crate::geometry::{Deployment, Point, VoronoiCells};
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn law() -> PathLossLaw {
        PathLossLaw::new(PathLossParams::new(2.0, 4.0, 1.0, 70.0).unwrap())
    }

    fn random_drop(seed: u64, n_users: usize, n_bs: usize, side: f64) -> Deployment {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pts = |n| -> Vec<Point> {
            (0..n)
                .map(|_| Point::new(rng.random::<f64>() * side, rng.random::<f64>() * side))
                .collect()
        };
        Deployment {
            user_positions: pts(n_users),
            bs_positions: pts(n_bs),
            window_side: side,
            resampled: 0,
        }
    }

    fn setup(seed: u64, n: usize, rho: f64) -> (CooperationAssignment, CooperationAssignment, ChannelRealization) {
        let dep = random_drop(seed, 8, 60, 200.0);
        let cells = VoronoiCells::build(&dep);
        let base = cells.cooperation(1);
        let coop = cells.cooperation(n);
        let ch = realize_channels(&dep, &coop, &law(), rho, &mut ChaCha8Rng::seed_from_u64(seed + 1));
        (base, coop, ch)
    }

    /// Overwrites one pair's channel with a fixed value and known loss.
    fn force(ch: &mut ChannelRealization, bs: usize, user: usize, h: Complex64, loss: f64) {
        let i = ch.index(bs, user);
        ch.h_true[i] = h;
        ch.h_est[i] = h;
        ch.loss[i] = loss;
    }

    #[test]
    fn noncoherent_examples() {
        let (_, coop, mut ch) = setup(1, 5, 1.0);
        let (u, set) = coop
            .coop_sets
            .iter()
            .enumerate()
            .find(|(_, s)| s.len() >= 2)
            .map(|(u, s)| (u, s.clone()))
            .unwrap();
        force(&mut ch, set[0], u, Complex64::new(0.6, 0.8), 0.25);
        assert!((signal_power_noncoherent(&set[..1], &ch, u) - 0.25).abs() < 1e-15);
        // Equal |h|²ℓ = p on two links.
        force(&mut ch, set[1], u, Complex64::new(0.0, 1.0), 0.25);
        assert!((signal_power_noncoherent(&set[..2], &ch, u) - 0.5).abs() < 1e-15);
        // Coherent combining doubles the amplitude: 4a² with a² = 0.25.
        let cj = signal_power_coherent(&set[..2], &ch, u);
        assert!((cj.power - 1.0).abs() < 1e-15);
        assert_eq!(cj.degenerate, 0);
    }

    #[test]
    fn zero_estimate_falls_back_to_unit_precoder() {
        let (_, coop, mut ch) = setup(2, 3, 1.0);
        let (u, set) = coop.coop_sets.iter().enumerate().find(|(_, s)| !s.is_empty()).unwrap();
        let i = ch.index(set[0], u);
        ch.h_est[i] = Complex64::new(0.0, 0.0);
        ch.h_true[i] = Complex64::new(0.0, 2.0);
        ch.loss[i] = 1.0;
        let cj = signal_power_coherent(&set[..1], &ch, u);
        assert_eq!(cj.degenerate, 1);
        assert!((cj.power - 4.0).abs() < 1e-15);
    }

    #[test]
    fn interference_examples() {
        let (_, coop, mut ch) = setup(3, 5, 1.0);
        let u = 0;
        let all = coop.active_set.clone();
        assert_eq!(interference_power(&all, &all, &ch, u), 0.0);
        let b = all[0];
        force(&mut ch, b, u, Complex64::new(1.0, 1.0), 0.1);
        let v = interference_power(&[b], &[], &ch, u);
        assert!((v - 0.2).abs() < 1e-15);
    }

    #[test]
    fn term_by_term_oracle() {
        for seed in 0..20 {
            let (_, coop, ch) = setup(10 + seed, 5, 0.8);
            for (u, set) in coop.coop_sets.iter().enumerate() {
                if set.is_empty() {
                    continue;
                }
                let mut nj = 0.0;
                let mut cj_re = 0.0;
                let mut cj_im = 0.0;
                for &b in set {
                    let i = ch.index(b, u);
                    let (t, e, l) = (ch.h_true[i], ch.h_est[i], ch.loss[i]);
                    nj += (t.re * t.re + t.im * t.im) * l;
                    let m = (e.re * e.re + e.im * e.im).sqrt();
                    // t · conj(e)/|e| · √l
                    cj_re += (t.re * e.re + t.im * e.im) / m * l.sqrt();
                    cj_im += (t.im * e.re - t.re * e.im) / m * l.sqrt();
                }
                let mut interf = 0.0;
                for &b in &coop.active_set {
                    if !set.contains(&b) {
                        let i = ch.index(b, u);
                        interf += ch.h_true[i].norm_sqr() * ch.loss[i];
                    }
                }
                let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-300);
                assert!(rel(signal_power_noncoherent(set, &ch, u), nj) < 1e-12);
                assert!(rel(signal_power_coherent(set, &ch, u).power, cj_re * cj_re + cj_im * cj_im) < 1e-12);
                assert!(rel(interference_power(&coop.active_set, set, &ch, u), interf) < 1e-12);
            }
        }
    }

    #[test]
    fn isolated_user_hits_cap() {
        let dep = Deployment {
            bs_positions: vec![Point::new(1.0, 1.0)],
            user_positions: vec![Point::new(2.0, 2.0)],
            window_side: 10.0,
            resampled: 0,
        };
        let cells = VoronoiCells::build(&dep);
        let (base, coop) = (cells.cooperation(1), cells.cooperation(5));
        let ch = realize_channels(&dep, &coop, &law(), 1.0, &mut ChaCha8Rng::seed_from_u64(0));
        let lb = compute_link_budgets(&base, &coop, &ch, 1e10);
        assert_eq!(lb.len(), 1);
        assert_eq!(lb[0].sir_single, 1e10);
        assert_eq!(lb[0].sir_nj, 1e10);
        assert_eq!(lb[0].sir_cj, 1e10);
        assert!(lb[0].interference_free());
    }

    #[test]
    fn single_bs_schemes_coincide() {
        let (base, _, ch) = setup(4, 1, 1.0);
        let lb = compute_link_budgets(&base, &base, &ch, 1e10);
        assert!(!lb.is_empty());
        for l in lb {
            assert_eq!(l.sir_single, l.sir_nj);
            assert!((l.sir_cj - l.sir_nj).abs() <= 1e-12 * l.sir_nj);
        }
    }

    #[test]
    fn coherent_matches_noncoherent_on_average_without_csi() {
        // With rho = 0 the precoder phase is independent of the channel, so
        // cross terms vanish in expectation.
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let n = 100_000;
        let (mut nj, mut cj) = (0.0, 0.0);
        let loss = [1.0, 0.5, 0.3, 0.2, 0.1];
        for _ in 0..n {
            let mut sum = Complex64::new(0.0, 0.0);
            for &l in &loss {
                let t = crate::channel::complex_gaussian(&mut rng);
                let e = crate::channel::complex_gaussian(&mut rng);
                nj += t.norm_sqr() * l;
                sum += t * e.conj() / e.norm() * f64::sqrt(l);
            }
            cj += sum.norm_sqr();
        }
        let (nj, cj) = (nj / n as f64, cj / n as f64);
        // Both are sums of five Exp(1)-weighted terms with mean 2.1.
        assert!((nj - 2.1).abs() < 0.03, "{nj}");
        assert!((cj - nj).abs() < 0.05, "{cj} vs {nj}");
    }

    proptest! {
        #[test]
        fn coherent_dominates_with_perfect_csi(seed in 0u64..5000, n in 1usize..8) {
            let (base, coop, ch) = setup(seed, n, 1.0);
            for l in compute_link_budgets(&base, &coop, &ch, 1e10) {
                prop_assert!(l.s_cj >= l.s_nj * (1.0 - 1e-12));
                prop_assert!(l.sir_single > 0.0 && l.sir_single <= 1e10);
                prop_assert!(l.sir_nj > 0.0 && l.sir_nj <= 1e10);
                prop_assert!(l.sir_cj > 0.0 && l.sir_cj <= 1e10);
            }
        }

        #[test]
        fn more_cooperation_never_reduces_interference(seed in 0u64..5000, n in 2usize..8) {
            let (base, coop, ch) = setup(seed, n, 0.9);
            for l in compute_link_budgets(&base, &coop, &ch, 1e10) {
                prop_assert!(l.i_coop >= l.i_single);
            }
        }
    }
}
