//! Poisson deployments on a square torus and user-centric Voronoi
//! cooperation sets.

mod grid;

pub use grid::TorusGrid;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use thiserror::Error;

use crate::config::SimulationConfig;

/// Redraws allowed when a drop comes out with no users.
pub const MAX_RESAMPLE_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Euclidean distance on a square torus of the given side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusMetric {
    side: f64,
}

impl TorusMetric {
    pub fn new(side: f64) -> Self {
        assert!(side > 0.0, "torus side must be positive");
        Self { side }
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    #[inline]
    fn wrap(&self, d: f64) -> f64 {
        let d = d.abs();
        d.min(self.side - d)
    }

    #[inline]
    pub fn distance_sq(&self, a: &Point, b: &Point) -> f64 {
        let dx = self.wrap(a.x - b.x);
        let dy = self.wrap(a.y - b.y);
        dx * dx + dy * dy
    }

    #[inline]
    pub fn distance(&self, a: &Point, b: &Point) -> f64 {
        self.distance_sq(a, b).sqrt()
    }
}

/// Shorthand for [`TorusMetric::distance`].
pub fn toroidal_distance(a: &Point, b: &Point, metric: &TorusMetric) -> f64 {
    metric.distance(a, b)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("no users after {0} deployment attempts; lambda_u * window_side^2 is too small")]
    NoUsers(usize),
}

/// One realization of BS and user positions.
#[derive(Debug, Clone, PartialEq)]
pub struct Deployment {
    pub bs_positions: Vec<Point>,
    pub user_positions: Vec<Point>,
    pub window_side: f64,
    /// Draws discarded because they contained no users.
    pub resampled: usize,
}

impl Deployment {
    pub fn metric(&self) -> TorusMetric {
        TorusMetric::new(self.window_side)
    }
}

fn uniform_points<R: Rng + ?Sized>(rng: &mut R, n: usize, side: f64) -> Vec<Point> {
    (0..n)
        .map(|_| {
            let x = rng.random::<f64>() * side;
            let y = rng.random::<f64>() * side;
            // x * side can round up to side itself.
            Point::new(if x < side { x } else { 0.0 }, if y < side { y } else { 0.0 })
        })
        .collect()
}

fn poisson_count<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(mean).expect("finite positive Poisson mean");
    dist.sample(rng) as usize
}

/// Draws independent homogeneous PPPs of BSs and users on the torus.
pub fn sample_deployment<R: Rng + ?Sized>(
    config: &SimulationConfig,
    rng: &mut R,
) -> Result<Deployment, GeometryError> {
    let side = config.window_side;
    let area = side * side;
    for attempt in 0..MAX_RESAMPLE_ATTEMPTS {
        let n_bs = poisson_count(rng, config.lambda_b * area);
        let n_users = poisson_count(rng, config.lambda_u * area);
        let bs_positions = uniform_points(rng, n_bs, side);
        let user_positions = uniform_points(rng, n_users, side);
        if n_users > 0 {
            return Ok(Deployment {
                bs_positions,
                user_positions,
                window_side: side,
                resampled: attempt,
            });
        }
    }
    Err(GeometryError::NoUsers(MAX_RESAMPLE_ATTEMPTS))
}

/// Each BS's nearest user and each user's cell members sorted by distance.
///
/// This is the expensive part of building a cooperation assignment; one
/// partition serves every cooperation size on the same deployment.
#[derive(Debug, Clone)]
pub struct VoronoiCells {
    /// For every BS, the index of its nearest user.
    pub nearest_user: Vec<usize>,
    /// For every user, the BSs in its cell with their distances, nearest first.
    pub members: Vec<Vec<(usize, f64)>>,
}

impl VoronoiCells {
    pub fn build(dep: &Deployment) -> Self {
        let metric = dep.metric();
        let n_users = dep.user_positions.len();
        let mut members: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_users];
        let mut nearest_user = Vec::with_capacity(dep.bs_positions.len());
        if n_users > 0 {
            let density = n_users as f64 / (dep.window_side * dep.window_side);
            let grid = TorusGrid::build(&dep.user_positions, metric, 1.0 / density.sqrt());
            for (b, p) in dep.bs_positions.iter().enumerate() {
                let (u, d2) = grid
                    .nearest(&dep.user_positions, p)
                    .expect("grid holds at least one user");
                nearest_user.push(u);
                members[u].push((b, d2));
            }
        }
        for m in &mut members {
            m.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            for e in m.iter_mut() {
                e.1 = e.1.sqrt();
            }
        }
        Self {
            nearest_user,
            members,
        }
    }

    pub fn cooperation(&self, n_coop: usize) -> CooperationAssignment {
        let mut coop_sets = Vec::with_capacity(self.members.len());
        let mut coop_distances = Vec::with_capacity(self.members.len());
        let mut active_set = Vec::new();
        for m in &self.members {
            let take = m.len().min(n_coop);
            coop_sets.push(m[..take].iter().map(|&(b, _)| b).collect::<Vec<_>>());
            coop_distances.push(m[..take].iter().map(|&(_, d)| d).collect::<Vec<_>>());
            active_set.extend(m[..take].iter().map(|&(b, _)| b));
        }
        active_set.sort_unstable();
        let mut serving_user = vec![None; self.nearest_user.len()];
        for (u, set) in coop_sets.iter().enumerate() {
            for &b in set {
                serving_user[b] = Some(u);
            }
        }
        CooperationAssignment {
            n_coop,
            coop_sets,
            coop_distances,
            cell_sizes: self.members.iter().map(Vec::len).collect(),
            active_set,
            serving_user,
        }
    }
}

/// Which BSs jointly serve which user.
#[derive(Debug, Clone, PartialEq)]
pub struct CooperationAssignment {
    pub n_coop: usize,
    /// Per user, the serving BSs nearest first; length `min(M, N)`.
    pub coop_sets: Vec<Vec<usize>>,
    /// Toroidal distances matching `coop_sets`.
    pub coop_distances: Vec<Vec<f64>>,
    /// Per user, `M`: the number of BSs in its Voronoi cell.
    pub cell_sizes: Vec<usize>,
    /// Union of all cooperation sets, ascending.
    pub active_set: Vec<usize>,
    /// Per BS, the user it serves, if active.
    pub serving_user: Vec<Option<usize>>,
}

impl CooperationAssignment {
    /// Users whose Voronoi cell holds no BS.
    pub fn empty_cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.cell_sizes
            .iter()
            .enumerate()
            .filter(|(_, &m)| m == 0)
            .map(|(i, _)| i)
    }
}

/// Builds the user-centric Voronoi cooperation sets for cooperation size
/// `n_coop`. Users with an empty cell get an empty set.
pub fn assign_cooperation(dep: &Deployment, n_coop: usize) -> CooperationAssignment {
    VoronoiCells::build(dep).cooperation(n_coop)
}

/// For each user, its nearest BS over the whole network (ignoring cells).
pub fn nearest_bs_overall(dep: &Deployment) -> Vec<Option<usize>> {
    let metric = dep.metric();
    if dep.bs_positions.is_empty() {
        return vec![None; dep.user_positions.len()];
    }
    let density = dep.bs_positions.len() as f64 / (dep.window_side * dep.window_side);
    let grid = TorusGrid::build(&dep.bs_positions, metric, 1.0 / density.sqrt());
    dep.user_positions
        .iter()
        .map(|u| grid.nearest(&dep.bs_positions, u).map(|(b, _)| b))
        .collect()
}
