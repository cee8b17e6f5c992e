//! Propagation and fading: bounded dual-slope path loss, Rayleigh fading,
//! and delayed channel estimates from a first-order Gauss-Markov process.

mod bessel;

pub use bessel::bessel_j0;

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::config::{CsiMode, CsiParams, PathLossParams};
use crate::geometry::{CooperationAssignment, Deployment};

/// Bounded dual-slope path loss `ℓ(d)`:
/// 1 inside `r_b`, `d^-α1` up to `r_c`, `τ d^-α2` beyond.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossLaw {
    params: PathLossParams,
}

#[inline]
fn pow_neg(d: f64, alpha: f64) -> f64 {
    // Integer exponents dominate every sweep; powf is several times slower.
    if alpha == 2.0 {
        1.0 / (d * d)
    } else if alpha == 3.0 {
        1.0 / (d * d * d)
    } else if alpha == 4.0 {
        let d2 = d * d;
        1.0 / (d2 * d2)
    } else {
        d.powf(-alpha)
    }
}

impl PathLossLaw {
    pub fn new(params: PathLossParams) -> Self {
        Self { params }
    }

    pub fn params(&self) -> &PathLossParams {
        &self.params
    }

    #[inline]
    pub fn eval(&self, d: f64) -> f64 {
        let p = &self.params;
        if d <= p.r_b() {
            1.0
        } else if d <= p.r_c() {
            pow_neg(d, p.alpha1())
        } else {
            p.tau() * pow_neg(d, p.alpha2())
        }
    }
}

pub fn path_loss(d: f64, law: &PathLossLaw) -> f64 {
    law.eval(d)
}

/// Temporal correlation between the fed-back and the current channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    /// Coefficient used by the simulator, in [0, 1].
    pub rho: f64,
    /// `J0(2π f_d T_s)` before clamping.
    pub raw: f64,
    /// True when `raw` was negative and has been clamped to zero.
    pub clamped: bool,
}

/// `ρ = J0(2π f_d T_s)` with `f_d = f_c v / c`; exactly 1 for perfect CSI.
pub fn correlation_coefficient(csi: &CsiParams) -> Correlation {
    match csi.mode {
        CsiMode::Perfect => Correlation {
            rho: 1.0,
            raw: 1.0,
            clamped: false,
        },
        CsiMode::Delayed => {
            let raw = bessel_j0(2.0 * PI * csi.doppler() * csi.t_s);
            let rho = raw.clamp(0.0, 1.0);
            Correlation {
                rho,
                raw,
                clamped: raw < 0.0,
            }
        }
    }
}

/// One `CN(0, 1)` draw: independent `N(0, 1/2)` real and imaginary parts.
#[inline]
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

const NO_SLOT: u32 = u32::MAX;

/// Path loss and fading for every (active BS, user) pair of one drop.
///
/// Storage is user-major: pair `(a, u)` lives at `u * n_active + a`, where
/// `a` is the BS's position in `active`.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    active: Vec<usize>,
    slot: Vec<u32>,
    n_users: usize,
    pub rho: f64,
    pub loss: Vec<f64>,
    /// Channel at transmission time.
    pub h_true: Vec<Complex64>,
    /// Channel known at the BS, one feedback delay earlier.
    pub h_est: Vec<Complex64>,
}

impl ChannelRealization {
    /// Active BS indices, ascending.
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn n_active(&self) -> usize {
        self.active.len()
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    /// Position of BS `bs` in [`Self::active`], if it transmits.
    #[inline]
    pub fn slot_of(&self, bs: usize) -> Option<usize> {
        match self.slot.get(bs) {
            Some(&s) if s != NO_SLOT => Some(s as usize),
            _ => None,
        }
    }

    #[inline]
    pub fn pair(&self, slot: usize, user: usize) -> usize {
        user * self.active.len() + slot
    }

    /// Flat index of the pair `(bs, user)`; panics if `bs` is dormant.
    #[inline]
    pub fn index(&self, bs: usize, user: usize) -> usize {
        let slot = self
            .slot_of(bs)
            .unwrap_or_else(|| panic!("BS {bs} has no channel draw (dormant)"));
        self.pair(slot, user)
    }

    /// Received power `|h_true|² ℓ` on one pair.
    #[inline]
    pub fn gain(&self, idx: usize) -> f64 {
        self.h_true[idx].norm_sqr() * self.loss[idx]
    }
}

/// Draws fading for every (active BS, user) pair.
///
/// All estimates are drawn first, user-major; innovations follow in the same
/// order only when `rho < 1`. Two runs sharing a seed therefore share their
/// estimates regardless of `rho`, and `rho == 1` copies the estimate exactly.
pub fn realize_channels<R: Rng + ?Sized>(
    dep: &Deployment,
    assignment: &CooperationAssignment,
    law: &PathLossLaw,
    rho: f64,
    rng: &mut R,
) -> ChannelRealization {
    let metric = dep.metric();
    let active = assignment.active_set.clone();
    let mut slot = vec![NO_SLOT; dep.bs_positions.len()];
    for (a, &b) in active.iter().enumerate() {
        slot[b] = a as u32;
    }
    let n_users = dep.user_positions.len();
    let pairs = n_users * active.len();

    let mut loss = Vec::with_capacity(pairs);
    for u in &dep.user_positions {
        for &b in &active {
            loss.push(law.eval(metric.distance(&dep.bs_positions[b], u)));
        }
    }

    let h_est: Vec<Complex64> = (0..pairs).map(|_| complex_gaussian(rng)).collect();
    let h_true = if rho >= 1.0 {
        h_est.clone()
    } else {
        let spread = (1.0 - rho * rho).sqrt();
        h_est
            .iter()
            .map(|&h| h * rho + complex_gaussian(rng) * spread)
            .collect()
    };

    ChannelRealization {
        active,
        slot,
        n_users,
        rho,
        loss,
        h_true,
        h_est,
    }
}
