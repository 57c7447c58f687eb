//! Finite quasimetric measure spaces, their structural constants and balls.
//!
//! Balls are open: `B(x, r) = {y : d(x, y) < r}`. A finite space has finitely
//! many distinct member sets per center, and each is realized by a half-open
//! interval of radii `(d_{j-1}, d_j]` where `d_0 < d_1 < ...` are the distinct
//! distances from the center. The canonical radius of a member set is the right
//! endpoint `d_j` of that interval; the set containing every point gets radius
//! `2 * d_max`. Suprema over "all balls" reduce to maxima over this catalog.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Open ball with a center index and a numeric radius.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Ball {
    pub center: usize,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: usize, radius: f64) -> Self {
        Ball { center, radius }
    }

    /// Same center, radius multiplied by `lambda >= 1`.
    pub fn dilate(&self, lambda: f64) -> Result<Ball> {
        if !(lambda >= 1.0) || !lambda.is_finite() {
            return Err(Error::param("lambda", "dilation factor must be finite and >= 1"));
        }
        Ok(Ball {
            center: self.center,
            radius: self.radius * lambda,
        })
    }

    /// Dilation without the `lambda >= 1` check, for internal constants known to exceed 1.
    pub(crate) fn scaled(&self, lambda: f64) -> Ball {
        Ball {
            center: self.center,
            radius: self.radius * lambda,
        }
    }
}

/// Entry of the ball catalog: the ball, the size of its member set and its measure.
///
/// Members are the first `len` points of the center's distance ordering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalBall {
    pub ball: Ball,
    pub len: usize,
    pub measure: f64,
}

/// Metric used by the grid generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Metric {
    L1,
    Linf,
    L2,
}

impl Metric {
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let diffs = a.iter().zip(b).map(|(x, y)| libm::fabs(x - y));
        match self {
            Metric::L1 => diffs.sum(),
            Metric::Linf => diffs.fold(0.0, f64::max),
            Metric::L2 => libm::sqrt(diffs.map(|d| d * d).sum()),
        }
    }
}

/// Point masses of a generated space.
#[derive(Debug, Clone, PartialEq)]
pub enum MassSpec {
    Uniform,
    Values(Vec<f64>),
}

/// Description of a space: either explicit data or a grid generator.
#[derive(Debug, Clone, PartialEq)]
pub enum SpaceSpec {
    Explicit { dist: Vec<Vec<f64>>, mass: Vec<f64> },
    Grid { shape: Vec<usize>, metric: Metric, mass: MassSpec },
}

impl SpaceSpec {
    /// `n` collinear points with unit spacing and unit masses.
    pub fn line(n: usize) -> Self {
        SpaceSpec::Grid {
            shape: vec![n],
            metric: Metric::L1,
            mass: MassSpec::Uniform,
        }
    }
}

/// Finite quasimetric measure space with its ball catalog.
#[derive(Debug, Clone)]
pub struct QuasiMetricSpace {
    n: usize,
    dist: Vec<f64>,
    mass: Vec<f64>,
    /// Per center: point indices sorted by distance, ties by index.
    order: Vec<Vec<usize>>,
    /// Per center: prefix sums of masses along `order` (length n + 1).
    prefix_mass: Vec<Vec<f64>>,
    catalog: Vec<CanonicalBall>,
}

/// Builds and validates a space from its description.
pub fn build_space(spec: &SpaceSpec) -> Result<QuasiMetricSpace> {
    match spec {
        SpaceSpec::Explicit { dist, mass } => {
            let n = mass.len();
            if dist.len() != n {
                return Err(Error::DimensionMismatch {
                    what: "distance matrix",
                    expected: n,
                    got: dist.len(),
                });
            }
            let mut flat = Vec::with_capacity(n * n);
            for row in dist {
                if row.len() != n {
                    return Err(Error::DimensionMismatch {
                        what: "distance row",
                        expected: n,
                        got: row.len(),
                    });
                }
                flat.extend_from_slice(row);
            }
            QuasiMetricSpace::new(flat, mass.clone())
        }
        SpaceSpec::Grid { shape, metric, mass } => {
            let coords: Vec<Vec<f64>> = match shape.as_slice() {
                [n] => (0..*n).map(|i| vec![i as f64]).collect(),
                [n, m] => (0..*n)
                    .flat_map(|i| (0..*m).map(move |j| vec![i as f64, j as f64]))
                    .collect(),
                _ => return Err(Error::param("shape", "grid shape must have one or two entries")),
            };
            let mass = match mass {
                MassSpec::Uniform => vec![1.0; coords.len()],
                MassSpec::Values(v) => v.clone(),
            };
            QuasiMetricSpace::from_points(&coords, *metric, mass)
        }
    }
}

impl QuasiMetricSpace {
    /// Validates a row-major `n x n` distance matrix and `n` masses.
    pub fn new(dist: Vec<f64>, mass: Vec<f64>) -> Result<Self> {
        let n = mass.len();
        if n == 0 {
            return Err(Error::EmptySpace);
        }
        if dist.len() != n * n {
            return Err(Error::DimensionMismatch {
                what: "distance matrix",
                expected: n * n,
                got: dist.len(),
            });
        }
        for (i, &m) in mass.iter().enumerate() {
            if !(m > 0.0) || !m.is_finite() {
                return Err(Error::NonpositiveMass(i));
            }
        }
        for i in 0..n {
            for j in 0..n {
                let d = dist[i * n + j];
                if !d.is_finite() {
                    return Err(Error::NonFiniteDistance(i, j));
                }
                if d < 0.0 {
                    return Err(Error::NegativeDistance(i, j));
                }
                if i == j && d != 0.0 {
                    return Err(Error::NonzeroDiagonal(i));
                }
                if i != j && d == 0.0 {
                    return Err(Error::ZeroDistance(i, j));
                }
                if d != dist[j * n + i] {
                    return Err(Error::AsymmetricDistance(i, j));
                }
            }
        }

        let mut order = Vec::with_capacity(n);
        let mut prefix_mass = Vec::with_capacity(n);
        let mut catalog = Vec::new();
        for x in 0..n {
            let row = &dist[x * n..(x + 1) * n];
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b)));
            let mut prefix = Vec::with_capacity(n + 1);
            prefix.push(0.0);
            let mut acc = 0.0;
            for &y in &idx {
                acc += mass[y];
                prefix.push(acc);
            }

            // Distinct distances d_0 = 0 < d_1 < ... < d_m; radius d_j realizes
            // the points strictly closer than d_j, the full set gets 2 d_m.
            let mut len = 0;
            while len < n {
                let current = row[idx[len]];
                let mut next = len;
                while next < n && row[idx[next]] == current {
                    next += 1;
                }
                let radius = if next < n {
                    row[idx[next]]
                } else if current > 0.0 {
                    2.0 * current
                } else {
                    1.0
                };
                catalog.push(CanonicalBall {
                    ball: Ball::new(x, radius),
                    len: next,
                    measure: prefix[next],
                });
                len = next;
            }
            order.push(idx);
            prefix_mass.push(prefix);
        }

        Ok(QuasiMetricSpace {
            n,
            dist,
            mass,
            order,
            prefix_mass,
            catalog,
        })
    }

    /// Space of points in `R^k` under one of the grid metrics.
    pub fn from_points(points: &[Vec<f64>], metric: Metric, mass: Vec<f64>) -> Result<Self> {
        let n = points.len();
        if mass.len() != n {
            return Err(Error::DimensionMismatch {
                what: "mass",
                expected: n,
                got: mass.len(),
            });
        }
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                dist[i * n + j] = metric.distance(&points[i], &points[j]);
            }
        }
        Self::new(dist, mass)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn dist(&self, x: usize, y: usize) -> f64 {
        self.dist[x * self.n + y]
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// Points sorted by distance from `center`.
    pub fn order(&self, center: usize) -> &[usize] {
        &self.order[center]
    }

    /// The ball catalog, sorted by center then radius.
    pub fn canonical_balls(&self) -> &[CanonicalBall] {
        &self.catalog
    }

    /// Members of a catalog entry, ordered by distance from the center.
    #[inline]
    pub fn catalog_members(&self, ball: &CanonicalBall) -> &[usize] {
        &self.order[ball.ball.center][..ball.len]
    }

    /// Number of points strictly closer than `radius` to `center`.
    pub fn member_count(&self, center: usize, radius: f64) -> usize {
        let row = &self.dist[center * self.n..(center + 1) * self.n];
        self.order[center].partition_point(|&y| row[y] < radius)
    }

    /// Members of an arbitrary ball, ordered by distance from the center.
    pub fn members(&self, ball: &Ball) -> &[usize] {
        &self.order[ball.center][..self.member_count(ball.center, ball.radius)]
    }

    /// `{y : d(center, y) < radius}` as a sorted index list.
    pub fn ball_members(&self, ball: &Ball) -> Vec<usize> {
        let mut m = self.members(ball).to_vec();
        m.sort_unstable();
        m
    }

    /// `mu(B)`.
    pub fn measure(&self, ball: &Ball) -> f64 {
        self.prefix_mass[ball.center][self.member_count(ball.center, ball.radius)]
    }

    pub fn contains(&self, ball: &Ball, y: usize) -> bool {
        self.dist(ball.center, y) < ball.radius
    }

    /// Canonical balls, one per distinct member set per center.
    pub fn enumerate_balls(&self) -> Vec<Ball> {
        self.catalog.iter().map(|c| c.ball).collect()
    }

    /// Measure-weighted sum `sum_{y in B} f(y) mu(y)`.
    pub(crate) fn integral(&self, members: &[usize], f: &[f64]) -> f64 {
        members.iter().map(|&y| f[y] * self.mass[y]).sum()
    }

    /// Structural constants computed from the data.
    pub fn profile(&self) -> SpaceProfile {
        space_profile(self)
    }
}

/// Quasitriangle constant, doubling constant and derived quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpaceProfile {
    pub kappa: f64,
    pub c_mu: f64,
    pub d_mu: f64,
    pub engulf: f64,
}

impl SpaceProfile {
    fn from_constants(kappa: f64, c_mu: f64) -> Self {
        SpaceProfile {
            kappa,
            c_mu,
            d_mu: libm::log2(c_mu),
            engulf: kappa * (2.0 * kappa + 1.0),
        }
    }

    /// Replaces the computed quasitriangle constant with a caller-supplied upper bound.
    pub fn with_kappa_bound(&self, kappa: f64) -> Result<Self> {
        if !(kappa >= self.kappa) || !kappa.is_finite() {
            return Err(Error::param(
                "kappa",
                alloc::format!("supplied bound {kappa} is below the computed constant {}", self.kappa),
            ));
        }
        Ok(Self::from_constants(kappa, self.c_mu))
    }
}

/// Smallest quasitriangle constant and exact doubling constant of a space.
pub fn space_profile(space: &QuasiMetricSpace) -> SpaceProfile {
    let n = space.n;
    let mut kappa: f64 = 1.0;
    for x in 0..n {
        for y in (x + 1)..n {
            let dxy = space.dist(x, y);
            for z in 0..n {
                let s = space.dist(x, z) + space.dist(z, y);
                let ratio = dxy / s;
                if ratio > kappa {
                    kappa = ratio;
                }
            }
        }
    }
    // Nudge upward until the product form certifies every triple; the ratio
    // can round below the exact value.
    'certify: loop {
        for x in 0..n {
            for y in (x + 1)..n {
                for z in 0..n {
                    if space.dist(x, y) > kappa * (space.dist(x, z) + space.dist(z, y)) {
                        kappa = f64::from_bits(kappa.to_bits() + 1);
                        continue 'certify;
                    }
                }
            }
        }
        break;
    }

    // mu(B(x, 2r)) is nondecreasing on each radius interval, so the ratio peaks
    // at the right endpoint, which is the canonical radius.
    let mut c_mu: f64 = 1.0;
    for cb in &space.catalog {
        if cb.len == n {
            continue;
        }
        let doubled = space.prefix_mass[cb.ball.center]
            [space.member_count(cb.ball.center, 2.0 * cb.ball.radius)];
        let ratio = doubled / cb.measure;
        if ratio > c_mu {
            c_mu = ratio;
        }
    }
    SpaceProfile::from_constants(kappa, c_mu)
}

/// Canonical balls of a space.
pub fn enumerate_balls(space: &QuasiMetricSpace) -> Vec<Ball> {
    space.enumerate_balls()
}

/// Pair of intersecting balls with `r1 <= r2` where `B1` escapes `engulf * B2`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EngulfingViolation {
    pub first: Ball,
    pub second: Ball,
    pub point: usize,
}

/// Checks `B1 ⊆ κ(2κ+1) B2` for every intersecting canonical pair with `r(B1) <= r(B2)`.
pub fn check_engulfing(space: &QuasiMetricSpace, profile: &SpaceProfile) -> Vec<EngulfingViolation> {
    let mut violations = Vec::new();
    let catalog = space.canonical_balls();
    for b1 in catalog {
        let m1 = space.catalog_members(b1);
        for b2 in catalog {
            if b1.ball.radius > b2.ball.radius {
                continue;
            }
            let intersects = m1.iter().any(|&z| space.contains(&b2.ball, z));
            if !intersects {
                continue;
            }
            let big = b2.ball.scaled(profile.engulf);
            if let Some(&y) = m1.iter().find(|&&y| !space.contains(&big, y)) {
                violations.push(EngulfingViolation {
                    first: b1.ball,
                    second: b2.ball,
                    point: y,
                });
            }
        }
    }
    violations
}

/// Canonical ball and factor where `mu(λB) > (2λ)^D mu(B)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DilationViolation {
    pub ball: Ball,
    pub lambda: f64,
    pub ratio: f64,
    pub bound: f64,
}

/// Checks the dilation bound `mu(λB) <= (2λ)^{D_mu} mu(B)` over the catalog.
pub fn check_dilation_bound(
    space: &QuasiMetricSpace,
    profile: &SpaceProfile,
    lambdas: &[f64],
) -> Vec<DilationViolation> {
    let mut violations = Vec::new();
    for cb in space.canonical_balls() {
        for &lambda in lambdas {
            let ratio = space.measure(&cb.ball.scaled(lambda)) / cb.measure;
            let bound = libm::pow(2.0 * lambda, profile.d_mu);
            if !crate::numeric::le_rel(ratio, bound, 1e-12) {
                violations.push(DilationViolation {
                    ball: cb.ball,
                    lambda,
                    ratio,
                    bound,
                });
            }
        }
    }
    violations
}
