//! Turning particle sets into confidence distributions, intervals, and
//! multivariate depth-contour regions, and scoring coverage over replicated
//! experiments.
//!
//! The construction follows the matching-map route: with `v_i = V(theta_i,
//! s_obs)` computed over the Monte Carlo sample, the region is
//! `{theta : W(theta, s_obs) inside a (1 - alpha) contour of the v_i}` —
//! central quantiles of the `v_i` for scalar maps, an empirical depth
//! contour for multivariate ones.
//!
//! Quantiles are rank `ceil(m alpha)` from the smallest throughout; the
//! reflected one-sided bound `2 theta_hat - theta_(alpha)` requires the
//! lower-quantile reading, and the opposite convention remains available
//! through [`QuantileConvention`].

use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;

use crate::core::{stats, substream, ParameterPoint, ParticleSet, SummaryVector};
use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// Empirical quantiles and confidence distributions

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuantileConvention {
    /// Order statistic of rank `ceil(m alpha)` counted from the smallest.
    FromSmallest,
    /// Order statistic of rank `ceil(m alpha)` counted from the largest.
    FromLargest,
}

pub fn empirical_quantile(values: &[f64], alpha: f64) -> Result<f64> {
    empirical_quantile_with(values, alpha, QuantileConvention::FromSmallest)
}

pub fn empirical_quantile_with(
    values: &[f64],
    alpha: f64,
    convention: QuantileConvention,
) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput("empirical quantile of empty sample".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidConfig(format!("quantile level {alpha}")));
    }
    let m = values.len() as f64;
    let tail = alpha.min(1.0 - alpha);
    if m < 1.0 / tail {
        log::warn!(
            "estimating the {alpha} quantile from only {} values; \
             at least {:.0} are recommended",
            values.len(),
            (1.0 / tail).ceil()
        );
    }
    match convention {
        QuantileConvention::FromSmallest => stats::quantile(values, alpha),
        QuantileConvention::FromLargest => {
            let sorted = stats::sorted_copy(values);
            let rank = ((m * alpha).ceil() as usize).clamp(1, sorted.len());
            Ok(sorted[sorted.len() - rank])
        }
    }
}

/// A right-continuous empirical distribution function on the parameter axis.
#[derive(Clone, Debug)]
pub struct EmpiricalCD {
    points: Vec<f64>,
    cum: Vec<f64>,
}

impl EmpiricalCD {
    pub fn new(values: &[f64], weights: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput("empirical CD".into()));
        }
        if values.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: values.len(),
                got: weights.len(),
                context: "CD weights".into(),
            });
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::DegenerateSample("all CD weights zero".into()));
        }
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("NaN value"));
        let mut points = Vec::with_capacity(values.len());
        let mut cum = Vec::with_capacity(values.len());
        let mut acc = 0.0;
        for &i in &order {
            acc += weights[i] / total;
            points.push(values[i]);
            cum.push(acc.min(1.0));
        }
        *cum.last_mut().unwrap() = 1.0;
        Ok(Self { points, cum })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn cdf(&self, t: f64) -> f64 {
        let idx = self.points.partition_point(|p| *p <= t);
        if idx == 0 {
            0.0
        } else {
            self.cum[idx - 1]
        }
    }

    /// Right-continuous quantile: the smallest support point whose
    /// cumulative mass strictly exceeds `alpha` (the last point when none
    /// does). This convention makes the reflected upper bound exact:
    /// `quantile(1 - alpha)` of the CD equals
    /// `2 theta_hat - empirical_quantile(theta, alpha)`.
    pub fn quantile(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidConfig(format!("quantile level {alpha}")));
        }
        let idx = self.cum.partition_point(|c| *c <= alpha + 1e-12);
        Ok(self.points[idx.min(self.points.len() - 1)])
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5).expect("0.5 is a valid level")
    }

    pub fn support(&self) -> &[f64] {
        &self.points
    }
}

/// The reflected confidence distribution of a scalar parameter: the
/// empirical distribution of `2 theta_hat_obs - theta_i` over the particle
/// sample, weights honored. Its `1 - alpha` quantile is the upper confidence
/// bound `2 theta_hat_obs - theta_(alpha)`.
pub fn cd_from_particles(particles: &ParticleSet, theta_hat_obs: f64) -> Result<EmpiricalCD> {
    if particles.is_empty() {
        return Err(Error::EmptyInput("CD from empty particle set".into()));
    }
    if particles.particles[0].theta.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: particles.particles[0].theta.dim(),
            context: "confidence distributions are scalar".into(),
        });
    }
    let values: Vec<f64> = particles
        .particles
        .iter()
        .map(|p| 2.0 * theta_hat_obs - p.theta[0])
        .collect();
    EmpiricalCD::new(&values, &particles.weights())
}

// ---------------------------------------------------------------------------
// Matching maps

type MapFn = dyn Fn(&ParameterPoint, &SummaryVector) -> Vec<f64> + Send + Sync;
type ProbeFn = dyn Fn(f64) -> ParameterPoint + Send + Sync;
type EstimatorFn = dyn Fn(&SummaryVector) -> ParameterPoint + Send + Sync;

/// The paired mappings `V` (applied to Monte Carlo draws given `s_obs`) and
/// `W` (applied to candidate parameters) whose distributional agreement
/// licenses frequentist regions, plus the plug-in estimator
/// `theta_hat(s)` where one exists.
///
/// `probe` parametrizes the one-dimensional path through parameter space
/// along which scalar `W` maps are inverted; `probe_coord` names the theta
/// coordinate that path varies.
#[derive(Clone)]
pub struct MatchingMaps {
    v: Arc<MapFn>,
    w: Arc<MapFn>,
    probe: Option<Arc<ProbeFn>>,
    probe_coord: usize,
    estimator: Option<Arc<EstimatorFn>>,
}

impl MatchingMaps {
    pub fn custom(
        v: impl Fn(&ParameterPoint, &SummaryVector) -> Vec<f64> + Send + Sync + 'static,
        w: impl Fn(&ParameterPoint, &SummaryVector) -> Vec<f64> + Send + Sync + 'static,
        probe: Option<(usize, Arc<ProbeFn>)>,
        estimator: Option<Arc<EstimatorFn>>,
    ) -> Self {
        let (probe_coord, probe) = match probe {
            Some((c, p)) => (c, Some(p)),
            None => (0, None),
        };
        Self {
            v: Arc::new(v),
            w: Arc::new(w),
            probe,
            probe_coord,
            estimator,
        }
    }

    /// Location pivot: `V(theta, s) = theta - theta_hat(s)`,
    /// `W(theta, s) = theta_hat(s) - theta`, with `theta_hat(s)` the given
    /// summary coordinate.
    pub fn location(summary_coord: usize) -> Self {
        Self::custom(
            move |theta, s| vec![theta[0] - s[summary_coord]],
            move |theta, s| vec![s[summary_coord] - theta[0]],
            Some((0, Arc::new(|t| ParameterPoint::scalar(t).expect("finite probe")))),
            Some(Arc::new(move |s: &SummaryVector| {
                ParameterPoint::scalar(s[summary_coord]).expect("finite summary")
            })),
        )
    }

    /// Scale pivot: `V = W = sigma_hat(s) / theta`, with `sigma_hat(s)` the
    /// given summary coordinate. The Monte Carlo copy
    /// `sigma_hat_obs / sigma_i` matches the sampling copy
    /// `sigma_hat(S) / sigma_0`.
    pub fn scale(summary_coord: usize) -> Self {
        let map = move |theta: &ParameterPoint, s: &SummaryVector| vec![s[summary_coord] / theta[0]];
        Self::custom(
            map,
            map,
            Some((0, Arc::new(|t| ParameterPoint::scalar(t).expect("finite probe")))),
            Some(Arc::new(move |s: &SummaryVector| {
                ParameterPoint::scalar(s[summary_coord]).expect("finite summary")
            })),
        )
    }

    /// Joint location-scale pivot:
    /// `V = W = (mu_hat(s) - theta_loc, sigma_hat(s) / theta_scale)`.
    pub fn location_scale(loc_coord: usize, scale_coord: usize) -> Self {
        let map = move |theta: &ParameterPoint, s: &SummaryVector| {
            vec![s[loc_coord] - theta[0], s[scale_coord] / theta[1]]
        };
        Self::custom(
            map,
            map,
            None,
            Some(Arc::new(move |s: &SummaryVector| {
                ParameterPoint::new(vec![s[loc_coord], s[scale_coord]]).expect("finite summary")
            })),
        )
    }

    /// Fully centered maps over all coordinates:
    /// `V(theta, .) = theta - c`, `W(theta, .) = c - theta`. With `c` the
    /// accepted-sample mean this is the practical large-sample construction:
    /// the region compares `c - theta` against the spread of the accepted
    /// draws around their own mean.
    pub fn centered(center: ParameterPoint) -> Self {
        let c = center.clone();
        let c2 = center;
        Self::custom(
            move |theta, _| {
                (0..theta.dim()).map(|j| theta[j] - c[j]).collect()
            },
            move |theta, _| {
                (0..theta.dim()).map(|j| c2[j] - theta[j]).collect()
            },
            None,
            None,
        )
    }

    /// Marginal pivot centered on a point estimate (typically the particle
    /// mean): `V(theta, .) = theta_j - c_j`, `W(theta, .) = c_j - theta_j`.
    pub fn centered_coord(center: ParameterPoint, coord: usize) -> Self {
        let c = center.clone();
        let c2 = center.clone();
        let c3 = center;
        Self::custom(
            move |theta, _| vec![theta[coord] - c[coord]],
            move |theta, _| vec![c2[coord] - theta[coord]],
            Some((
                coord,
                Arc::new(move |t| {
                    let mut values = c3.values().to_vec();
                    values[coord] = t;
                    ParameterPoint::new(values).expect("finite probe")
                }),
            )),
            None,
        )
    }

    pub fn v(&self, theta: &ParameterPoint, s: &SummaryVector) -> Vec<f64> {
        (self.v)(theta, s)
    }

    pub fn w(&self, theta: &ParameterPoint, s: &SummaryVector) -> Vec<f64> {
        (self.w)(theta, s)
    }

    pub fn estimate(&self, s: &SummaryVector) -> Option<ParameterPoint> {
        self.estimator.as_ref().map(|e| e(s))
    }
}

// ---------------------------------------------------------------------------
// Confidence regions

/// Which tails a scalar region uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sided {
    TwoSidedCentral,
    Upper,
}

#[derive(Clone, Debug)]
pub enum RegionKind {
    Interval { lo: f64, hi: f64, coord: usize },
    UpperBound { hi: f64, coord: usize },
    Depth(DepthRegion),
}

/// A confidence region at nominal level `1 - alpha`: a closed interval or
/// one-sided bound for scalar maps, a depth-contour membership rule for
/// multivariate ones.
#[derive(Clone, Debug)]
pub struct ConfidenceRegion {
    pub kind: RegionKind,
    pub level: f64,
}

impl ConfidenceRegion {
    pub fn contains(&self, theta: &ParameterPoint) -> bool {
        match &self.kind {
            RegionKind::Interval { lo, hi, coord } => {
                let t = theta[*coord];
                *lo <= t && t <= *hi
            }
            RegionKind::UpperBound { hi, coord } => theta[*coord] <= *hi,
            RegionKind::Depth(depth) => depth.contains(theta),
        }
    }

    /// Interval width or estimated region volume; `None` for one-sided
    /// bounds and for depth regions whose volume was not estimated.
    pub fn width_or_volume(&self) -> Option<f64> {
        match &self.kind {
            RegionKind::Interval { lo, hi, .. } => Some(hi - lo),
            RegionKind::UpperBound { .. } => None,
            RegionKind::Depth(depth) => depth.volume,
        }
    }

    /// Plain-text record: kind, level, then endpoints or the depth threshold
    /// plus a digest of the reference sample.
    pub fn serialize_record(&self) -> String {
        match &self.kind {
            RegionKind::Interval { lo, hi, coord } => {
                format!("interval level={} coord={coord} lo={lo:.9e} hi={hi:.9e}", self.level)
            }
            RegionKind::UpperBound { hi, coord } => {
                format!("upper level={} coord={coord} hi={hi:.9e}", self.level)
            }
            RegionKind::Depth(depth) => format!(
                "depth level={} alpha={:.9e} m={} ref_digest={:016x}",
                self.level,
                depth.alpha,
                depth.sorted_depths.len(),
                depth.digest()
            ),
        }
    }
}

/// Scalar-map region: quantiles of `v_i = V(theta_i, s_obs)` inverted
/// through the monotone map `theta -> W(theta, s_obs)` by bisection.
pub fn interval_from_w(
    particles: &ParticleSet,
    maps: &MatchingMaps,
    s_obs: &SummaryVector,
    alpha: f64,
    sided: Sided,
) -> Result<ConfidenceRegion> {
    if particles.is_empty() {
        return Err(Error::EmptyInput("interval from empty particle set".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidConfig(format!("alpha {alpha}")));
    }
    let probe = maps
        .probe
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("these matching maps have no scalar inversion path".into()))?
        .clone();
    let first = &particles.particles[0];
    if maps.v(&first.theta, s_obs).len() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: maps.v(&first.theta, s_obs).len(),
            context: "scalar interval needs k = 1 maps; use depth_region".into(),
        });
    }

    let vs: Vec<f64> = particles
        .particles
        .iter()
        .map(|p| maps.v(&p.theta, s_obs)[0])
        .collect();
    let weights = particles.weights();

    // Bracket from the particle range of the probed coordinate, widened by
    // half the range on each side.
    let coord_vals = particles.theta_column(maps.probe_coord);
    let lo = coord_vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = coord_vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let range = (hi - lo).max(1e-12 * (1.0 + hi.abs()));
    let mut bracket_lo = lo - 0.5 * range;
    let bracket_hi = hi + 0.5 * range;
    if coord_vals.iter().all(|v| *v > 0.0) && bracket_lo <= 0.0 {
        bracket_lo = lo * 0.25;
    }
    let w_of = |t: f64| maps.w(&probe(t), s_obs)[0];

    // Numerical monotonicity check over the bracket.
    let grid: Vec<f64> = (0..=32)
        .map(|i| bracket_lo + (bracket_hi - bracket_lo) * i as f64 / 32.0)
        .collect();
    let w_grid: Vec<f64> = grid.iter().map(|&t| w_of(t)).collect();
    let increasing = w_grid.windows(2).all(|p| p[1] > p[0]);
    let decreasing = w_grid.windows(2).all(|p| p[1] < p[0]);
    if !increasing && !decreasing {
        return Err(Error::NonMonotoneMap(
            "W is not monotone over the particle range; use depth_region instead".into(),
        ));
    }

    let invert = |target: f64| -> Result<f64> {
        let (mut a, mut b) = (bracket_lo, bracket_hi);
        let (mut fa, mut fb) = (w_of(a) - target, w_of(b) - target);
        let mut widen = 0;
        while fa * fb > 0.0 {
            widen += 1;
            if widen > 60 {
                return Err(Error::NonMonotoneMap(format!(
                    "could not bracket W = {target:.6e} around the particle range"
                )));
            }
            let span = b - a;
            // widen toward the side whose value is closer to the target,
            // backing off if the map stops being finite there
            if fa.abs() < fb.abs() {
                let mut step = span;
                loop {
                    let cand = a - step;
                    let fc = w_of(cand) - target;
                    if fc.is_finite() {
                        a = cand;
                        fa = fc;
                        break;
                    }
                    step *= 0.5;
                    if step < 1e-12 * span {
                        return Err(Error::NonMonotoneMap(format!(
                            "W became non-finite while bracketing {target:.6e}"
                        )));
                    }
                }
            } else {
                let mut step = span;
                loop {
                    let cand = b + step;
                    let fc = w_of(cand) - target;
                    if fc.is_finite() {
                        b = cand;
                        fb = fc;
                        break;
                    }
                    step *= 0.5;
                    if step < 1e-12 * span {
                        return Err(Error::NonMonotoneMap(format!(
                            "W became non-finite while bracketing {target:.6e}"
                        )));
                    }
                }
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            let fm = w_of(mid) - target;
            if fm == 0.0 {
                return Ok(mid);
            }
            if fa * fm < 0.0 {
                b = mid;
            } else {
                a = mid;
                fa = fm;
            }
            if (b - a).abs() <= 1e-10 * (1.0 + a.abs().max(b.abs())) {
                break;
            }
        }
        Ok(0.5 * (a + b))
    };

    let level = 1.0 - alpha;
    let kind = match sided {
        Sided::TwoSidedCentral => {
            let q_lo = stats::weighted_quantile(&vs, &weights, alpha / 2.0)?;
            let q_hi = stats::weighted_quantile(&vs, &weights, 1.0 - alpha / 2.0)?;
            let (a, b) = (invert(q_lo)?, invert(q_hi)?);
            RegionKind::Interval {
                lo: a.min(b),
                hi: a.max(b),
                coord: maps.probe_coord,
            }
        }
        Sided::Upper => {
            // Pick the tail that upper-bounds theta: W increasing in theta
            // pairs with the upper v-quantile, W decreasing with the lower.
            let q = if increasing {
                stats::weighted_quantile(&vs, &weights, 1.0 - alpha)?
            } else {
                stats::weighted_quantile(&vs, &weights, alpha)?
            };
            RegionKind::UpperBound {
                hi: invert(q)?,
                coord: maps.probe_coord,
            }
        }
    };
    Ok(ConfidenceRegion { kind, level })
}

// ---------------------------------------------------------------------------
// Depth

/// Mahalanobis depth `1 / (1 + (x - mu)' Sigma^-1 (x - mu))` with weighted
/// mean and covariance fitted to a reference cloud.
#[derive(Clone, Debug)]
pub struct MahalanobisDepth {
    mean: DVector<f64>,
    cov_inv: DMatrix<f64>,
    pub ridged: bool,
}

impl MahalanobisDepth {
    pub fn fit(reference: &[Vec<f64>], weights: &[f64], allow_ridge: bool) -> Result<Self> {
        if reference.is_empty() {
            return Err(Error::EmptyInput("depth reference".into()));
        }
        let (mean, cov) = stats::weighted_mean_cov(reference, weights)?;
        let k = mean.len();
        let mut cov_m = DMatrix::zeros(k, k);
        for r in 0..k {
            for c in 0..k {
                cov_m[(r, c)] = cov[r][c];
            }
        }
        let mut ridged = false;
        let chol = match Cholesky::new(cov_m.clone()) {
            Some(c) => c,
            None => {
                if !allow_ridge {
                    return Err(Error::SingularCovariance(
                        "reference covariance is singular; enable the ridge fallback".into(),
                    ));
                }
                ridged = true;
                let lambda = 1e-8 * cov_m.trace().max(1e-300) / k as f64;
                for j in 0..k {
                    cov_m[(j, j)] += lambda;
                }
                Cholesky::new(cov_m).ok_or_else(|| {
                    Error::SingularCovariance("covariance singular even after ridging".into())
                })?
            }
        };
        Ok(Self {
            mean: DVector::from_vec(mean),
            cov_inv: chol.inverse(),
            ridged,
        })
    }

    pub fn depth(&self, x: &[f64]) -> f64 {
        let diff = DVector::from_column_slice(x) - &self.mean;
        let quad = (&diff.transpose() * &self.cov_inv * &diff)[(0, 0)].max(0.0);
        1.0 / (1.0 + quad)
    }
}

/// Depth of `point` within the weighted reference cloud.
pub fn mahalanobis_depth(point: &[f64], reference: &[Vec<f64>], weights: &[f64]) -> Result<f64> {
    Ok(MahalanobisDepth::fit(reference, weights, false)?.depth(point))
}

/// Depth-contour membership rule: `theta` belongs to the region when the
/// weighted fraction of reference depths strictly below the depth of
/// `W(theta, s_obs)` is at least `alpha`.
#[derive(Clone)]
pub struct DepthRegion {
    depth: MahalanobisDepth,
    sorted_depths: Vec<f64>,
    prefix_mass: Vec<f64>,
    alpha: f64,
    maps: MatchingMaps,
    s_obs: SummaryVector,
    theta_box: Vec<(f64, f64)>,
    pub volume: Option<f64>,
}

impl std::fmt::Debug for DepthRegion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DepthRegion")
            .field("m", &self.sorted_depths.len())
            .field("alpha", &self.alpha)
            .field("volume", &self.volume)
            .finish()
    }
}

impl DepthRegion {
    fn fraction_strictly_below(&self, depth: f64) -> f64 {
        let count = self.sorted_depths.partition_point(|d| *d < depth);
        self.prefix_mass[count]
    }

    pub fn contains(&self, theta: &ParameterPoint) -> bool {
        let w = self.maps.w(theta, &self.s_obs);
        self.fraction_strictly_below(self.depth.depth(&w)) >= self.alpha
    }

    fn digest(&self) -> u64 {
        // FNV-1a over the reference depth bytes
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for d in &self.sorted_depths {
            for b in d.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x1000_0000_01b3);
            }
        }
        h
    }

    /// Monte Carlo volume over the particle bounding box (widened by half
    /// the range per coordinate).
    pub fn estimate_volume(&self, samples: usize, seed: u64) -> f64 {
        let box_volume: f64 = self.theta_box.iter().map(|(lo, hi)| hi - lo).product();
        let mut rng = substream(seed, 0);
        let mut inside = 0usize;
        for _ in 0..samples {
            let candidate: Vec<f64> = self
                .theta_box
                .iter()
                .map(|(lo, hi)| lo + rng.random::<f64>() * (hi - lo))
                .collect();
            if let Ok(theta) = ParameterPoint::new(candidate) {
                if self.contains(&theta) {
                    inside += 1;
                }
            }
        }
        box_volume * inside as f64 / samples as f64
    }
}

/// Build the depth-contour region of level `1 - alpha` from the particle
/// sample under the given matching maps.
pub fn depth_region(
    particles: &ParticleSet,
    maps: &MatchingMaps,
    s_obs: &SummaryVector,
    alpha: f64,
    allow_ridge: bool,
) -> Result<ConfidenceRegion> {
    if particles.is_empty() {
        return Err(Error::EmptyInput("depth region from empty particle set".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidConfig(format!("alpha {alpha}")));
    }
    let m = particles.len() as f64;
    if m < 20.0 / alpha {
        log::warn!(
            "depth region at alpha {alpha} from only {} particles; \
             at least {:.0} are recommended",
            particles.len(),
            20.0 / alpha
        );
    }

    let reference: Vec<Vec<f64>> = particles
        .particles
        .iter()
        .map(|p| maps.v(&p.theta, s_obs))
        .collect();
    let weights = particles.weights();
    let depth = MahalanobisDepth::fit(&reference, &weights, allow_ridge)?;

    let total: f64 = weights.iter().sum();
    let mut order: Vec<usize> = (0..reference.len()).collect();
    let depths: Vec<f64> = reference.iter().map(|v| depth.depth(v)).collect();
    order.sort_by(|&a, &b| depths[a].partial_cmp(&depths[b]).expect("depths are finite"));
    let sorted_depths: Vec<f64> = order.iter().map(|&i| depths[i]).collect();
    let mut prefix_mass = Vec::with_capacity(order.len() + 1);
    prefix_mass.push(0.0);
    let mut acc = 0.0;
    for &i in &order {
        acc += weights[i] / total;
        prefix_mass.push(acc);
    }

    let p = particles.particles[0].theta.dim();
    let theta_box: Vec<(f64, f64)> = (0..p)
        .map(|j| {
            let col = particles.theta_column(j);
            let lo = col.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let range = (hi - lo).max(1e-12 * (1.0 + hi.abs()));
            (lo - 0.5 * range, hi + 0.5 * range)
        })
        .collect();

    Ok(ConfidenceRegion {
        kind: RegionKind::Depth(DepthRegion {
            depth,
            sorted_depths,
            prefix_mass,
            alpha,
            maps: maps.clone(),
            s_obs: s_obs.clone(),
            theta_box,
            volume: None,
        }),
        level: 1.0 - alpha,
    })
}

// ---------------------------------------------------------------------------
// Coverage scoring

/// Proportion of regions containing the data-generating parameter, and the
/// median interval width (or estimated volume for depth regions).
pub fn coverage_score(regions: &[ConfidenceRegion], theta0: &ParameterPoint) -> Result<(f64, f64)> {
    if regions.is_empty() {
        return Err(Error::EmptyInput("coverage over zero regions".into()));
    }
    let first = std::mem::discriminant(&regions[0].kind);
    if regions.iter().any(|r| std::mem::discriminant(&r.kind) != first) {
        return Err(Error::MixedRegionKinds(
            "coverage batches must hold one region kind".into(),
        ));
    }
    let covered = regions.iter().filter(|r| r.contains(theta0)).count();
    let sizes: Vec<f64> = regions
        .iter()
        .map(|r| {
            r.width_or_volume().ok_or_else(|| {
                Error::InvalidConfig(
                    "region without width or estimated volume in coverage batch".into(),
                )
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((covered as f64 / regions.len() as f64, stats::median(&sizes)?))
}

// ---------------------------------------------------------------------------
// Cauchy reference posterior and distributional distances

/// Unnormalized-log to normalized density values of the exact Cauchy
/// location posterior (flat prior, known scale `tau`) on the given grid,
/// trapezoid-normalized.
pub fn cauchy_target_posterior_grid(
    data: &crate::core::Dataset,
    tau: f64,
    grid: &[f64],
) -> Result<Vec<f64>> {
    if !(tau > 0.0) {
        return Err(Error::InvalidConfig(format!("Cauchy scale {tau}")));
    }
    if grid.len() < 2 {
        return Err(Error::InvalidConfig("grid needs at least 2 points".into()));
    }
    if grid.len() < 200 {
        log::warn!("posterior grid of only {} points is coarse", grid.len());
    }
    let obs = data.observations();
    let log_density: Vec<f64> = grid
        .iter()
        .map(|&theta| {
            -obs.iter()
                .map(|x| {
                    let z = (x - theta) / tau;
                    (1.0 + z * z).ln()
                })
                .sum::<f64>()
        })
        .collect();
    let max = log_density.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut density: Vec<f64> = log_density.iter().map(|l| (l - max).exp()).collect();
    let mut total = 0.0;
    for i in 1..grid.len() {
        total += 0.5 * (density[i] + density[i - 1]) * (grid[i] - grid[i - 1]);
    }
    if !(total > 0.0) {
        return Err(Error::DegenerateSample("posterior mass vanished on the grid".into()));
    }
    for d in &mut density {
        *d /= total;
    }
    Ok(density)
}

/// Kolmogorov-Smirnov distance between a weighted sample and a density
/// tabulated on a grid, evaluated at the grid points.
pub fn ks_distance_to_grid(
    values: &[f64],
    weights: &[f64],
    grid: &[f64],
    density: &[f64],
) -> Result<f64> {
    if grid.len() != density.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            got: density.len(),
            context: "grid density".into(),
        });
    }
    let cd = EmpiricalCD::new(values, weights)?;
    let mut grid_cdf = vec![0.0; grid.len()];
    for i in 1..grid.len() {
        grid_cdf[i] =
            grid_cdf[i - 1] + 0.5 * (density[i] + density[i - 1]) * (grid[i] - grid[i - 1]);
    }
    let total = *grid_cdf.last().unwrap();
    let mut sup: f64 = 0.0;
    for (g, c) in grid.iter().zip(&grid_cdf) {
        sup = sup.max((cd.cdf(*g) - c / total).abs());
    }
    Ok(sup)
}
