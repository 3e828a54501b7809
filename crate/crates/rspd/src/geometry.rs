//! Euclidean projections onto the feasible sets used by the solvers.
//!
//! Every projection here is paired with a brute-force verification oracle in
//! [`crate::reference`] for small dimensions.

use crate::error::{Error, Result};

/// A feasible set that iterates are projected onto after every update.
#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleSet {
    /// No constraint.
    WholeSpace,
    /// `{x : ||x - center|| <= radius}`.
    L2Ball { center: Vec<f64>, radius: f64 },
    /// `{x : ||x||_1 <= radius}`.
    L1Ball { radius: f64 },
    /// The probability simplex `{y : y_i >= 0, sum_i y_i = 1}`.
    Simplex { dim: usize },
    /// `[lo, hi]` for scalar variables.
    Interval { lo: f64, hi: f64 },
    /// Intersection of the probability simplex with an L2 ball whose center
    /// lies on the simplex.
    SimplexBall { center: Vec<f64>, radius: f64 },
}

impl FeasibleSet {
    pub fn l2_ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Config(format!(
                "ball radius must be > 0, got {radius}"
            )));
        }
        Ok(FeasibleSet::L2Ball { center, radius })
    }

    pub fn l1_ball(radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Config(format!(
                "ball radius must be > 0, got {radius}"
            )));
        }
        Ok(FeasibleSet::L1Ball { radius })
    }

    pub fn simplex(dim: usize) -> Result<Self> {
        if dim < 1 {
            return Err(Error::Config("simplex dimension must be >= 1".into()));
        }
        Ok(FeasibleSet::Simplex { dim })
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        if !(lo <= hi) {
            return Err(Error::Config(format!(
                "interval requires lo <= hi, got [{lo}, {hi}]"
            )));
        }
        Ok(FeasibleSet::Interval { lo, hi })
    }

    /// Builds the simplex/ball intersection, checking it is nonempty: the
    /// simplex projection of the center must itself lie within the radius.
    pub fn simplex_ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::Config("simplex dimension must be >= 1".into()));
        }
        if !(radius > 0.0) {
            return Err(Error::Config(format!(
                "ball radius must be > 0, got {radius}"
            )));
        }
        let on_simplex = project_simplex(&center);
        let dist = euclidean_distance(&on_simplex, &center);
        if dist > radius {
            return Err(Error::Config(format!(
                "empty intersection: simplex point nearest the ball center is {dist:e} away, radius {radius:e}"
            )));
        }
        Ok(FeasibleSet::SimplexBall { center, radius })
    }

    /// Dimension of the set's ambient space, when it is pinned by the set.
    pub fn dim(&self) -> Option<usize> {
        match self {
            FeasibleSet::WholeSpace | FeasibleSet::L1Ball { .. } => None,
            FeasibleSet::L2Ball { center, .. } => Some(center.len()),
            FeasibleSet::Simplex { dim } => Some(*dim),
            FeasibleSet::Interval { .. } => Some(1),
            FeasibleSet::SimplexBall { center, .. } => Some(center.len()),
        }
    }

    /// Membership test up to an absolute tolerance.
    pub fn contains(&self, point: &[f64], tol: f64) -> bool {
        match self {
            FeasibleSet::WholeSpace => true,
            FeasibleSet::L2Ball { center, radius } => {
                euclidean_distance(point, center) <= radius + tol
            }
            FeasibleSet::L1Ball { radius } => {
                point.iter().map(|v| v.abs()).sum::<f64>() <= radius + tol
            }
            FeasibleSet::Simplex { dim } => {
                point.len() == *dim
                    && point.iter().all(|&v| v >= -tol)
                    && (point.iter().sum::<f64>() - 1.0).abs() <= tol
            }
            FeasibleSet::Interval { lo, hi } => {
                point.len() == 1 && point[0] >= lo - tol && point[0] <= hi + tol
            }
            FeasibleSet::SimplexBall { center, radius } => {
                FeasibleSet::Simplex { dim: center.len() }.contains(point, tol)
                    && euclidean_distance(point, center) <= radius + tol
            }
        }
    }

    /// Projects `point` onto the set in place.
    pub fn project_in_place(&self, point: &mut Vec<f64>) -> Result<()> {
        match self {
            FeasibleSet::WholeSpace => Ok(()),
            FeasibleSet::L2Ball { center, radius } => {
                project_l2_ball_in_place(point, center, *radius);
                Ok(())
            }
            FeasibleSet::L1Ball { radius } => {
                *point = project_l1_ball(point, *radius);
                Ok(())
            }
            FeasibleSet::Simplex { dim } => {
                assert_eq!(point.len(), *dim, "dimension mismatch");
                project_simplex_in_place(point);
                Ok(())
            }
            FeasibleSet::Interval { lo, hi } => {
                assert_eq!(point.len(), 1, "interval sets are one-dimensional");
                point[0] = clamp_interval(point[0], *lo, *hi);
                Ok(())
            }
            FeasibleSet::SimplexBall { center, radius } => {
                *point = project_intersection(point, center, *radius)?;
                Ok(())
            }
        }
    }

    pub fn project(&self, point: &[f64]) -> Result<Vec<f64>> {
        let mut out = point.to_vec();
        self.project_in_place(&mut out)?;
        Ok(out)
    }
}

pub(crate) fn euclidean_distance(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "dimension mismatch");
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Projects onto `{x : ||x - center|| <= radius}` by radial scaling.
pub fn project_l2_ball(point: &[f64], center: &[f64], radius: f64) -> Vec<f64> {
    let mut out = point.to_vec();
    project_l2_ball_in_place(&mut out, center, radius);
    out
}

pub fn project_l2_ball_in_place(point: &mut [f64], center: &[f64], radius: f64) {
    assert!(radius > 0.0, "ball radius must be > 0");
    assert_eq!(point.len(), center.len(), "dimension mismatch");
    let dist = euclidean_distance(point, center);
    if dist <= radius {
        return;
    }
    let scale = radius / dist;
    for (p, c) in point.iter_mut().zip(center) {
        *p = c + scale * (*p - c);
    }
}

/// Projects onto the probability simplex by the sort-and-threshold method:
/// sort descending, find the largest `k` with `u_k - (sum_{j<=k} u_j - 1)/k > 0`,
/// and clip at that threshold.
pub fn project_simplex(point: &[f64]) -> Vec<f64> {
    let mut out = point.to_vec();
    project_simplex_in_place(&mut out);
    out
}

/// In-place variant of [`project_simplex`]; allocation-free for dimensions
/// up to 32, which keeps it cheap in solver inner loops.
pub fn project_simplex_in_place(point: &mut [f64]) {
    let tau = simplex_threshold(point, 1.0);
    clip_at_threshold(point, tau);
}

/// Projection onto `{u : u_i >= 0, sum_i u_i = total}`.
fn project_scaled_simplex(point: &[f64], total: f64) -> Vec<f64> {
    let mut out = point.to_vec();
    let tau = simplex_threshold(&out, total);
    clip_at_threshold(&mut out, tau);
    out
}

fn clip_at_threshold(point: &mut [f64], tau: f64) {
    for v in point {
        let d = *v - tau;
        // Ties at the threshold go to exactly 0, avoiding -0 artifacts.
        *v = if d > 0.0 { d } else { 0.0 };
    }
}

fn simplex_threshold(point: &[f64], total: f64) -> f64 {
    assert!(!point.is_empty(), "cannot project an empty vector");
    assert!(total > 0.0);
    let mut stack = [0.0_f64; 32];
    let mut heap;
    let sorted: &mut [f64] = if point.len() <= 32 {
        let buf = &mut stack[..point.len()];
        buf.copy_from_slice(point);
        // Insertion sort (descending); beats the general sort at this size.
        for i in 1..buf.len() {
            let key = buf[i];
            let mut j = i;
            while j > 0 && buf[j - 1] < key {
                buf[j] = buf[j - 1];
                j -= 1;
            }
            buf[j] = key;
        }
        buf
    } else {
        heap = point.to_vec();
        heap.sort_by(|a, b| b.partial_cmp(a).expect("non-finite entry"));
        &mut heap
    };
    let mut cumsum = 0.0;
    let mut tau = 0.0;
    for (k, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - total) / (k + 1) as f64;
        if u - candidate > 0.0 {
            tau = candidate;
        }
    }
    tau
}

/// Projects onto `{x : ||x||_1 <= radius}`: interior points are returned
/// unchanged, otherwise the magnitudes are projected onto the scaled simplex
/// and the signs restored.
pub fn project_l1_ball(point: &[f64], radius: f64) -> Vec<f64> {
    assert!(radius > 0.0, "ball radius must be > 0");
    assert!(!point.is_empty(), "cannot project an empty vector");
    let l1: f64 = point.iter().map(|v| v.abs()).sum();
    if l1 <= radius {
        return point.to_vec();
    }
    let magnitudes: Vec<f64> = point.iter().map(|v| v.abs()).collect();
    let shrunk = project_scaled_simplex(&magnitudes, radius);
    point
        .iter()
        .zip(&shrunk)
        .map(|(&v, &m)| if v < 0.0 { -m } else { m })
        .collect()
}

/// Clamps a scalar into `[lo, hi]`.
pub fn clamp_interval(point: f64, lo: f64, hi: f64) -> f64 {
    assert!(lo <= hi, "interval requires lo <= hi");
    point.max(lo).min(hi)
}

/// Projects onto the intersection of the probability simplex and the L2 ball
/// `B(center, radius)` with `center` on the simplex.
///
/// When the plain simplex projection already lies in the ball it is the
/// answer. Otherwise the ball constraint binds and the projection is
/// `proj_simplex((p + beta*center) / (1 + beta))` for the multiplier
/// `beta >= 0` solving `||y(beta) - center|| = radius`; the distance is
/// nonincreasing in `beta`, so bisection finds it to machine precision.
/// (Dykstra's alternating projection handles this pair too, but its linear
/// rate degrades badly when the active simplex face meets the sphere at a
/// shallow angle; see [`dykstra_pair`] for the generic tool.)
pub fn project_intersection(point: &[f64], center: &[f64], radius: f64) -> Result<Vec<f64>> {
    assert_eq!(point.len(), center.len(), "dimension mismatch");
    assert!(radius > 0.0, "ball radius must be > 0");
    let unconstrained = project_simplex(point);
    if euclidean_distance(&unconstrained, center) <= radius {
        return Ok(unconstrained);
    }
    let blend = |beta: f64| -> Vec<f64> {
        let mixed: Vec<f64> = point
            .iter()
            .zip(center)
            .map(|(p, c)| (p + beta * c) / (1.0 + beta))
            .collect();
        project_simplex(&mixed)
    };
    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    while euclidean_distance(&blend(hi), center) > radius {
        hi *= 2.0;
        if hi > 1e18 {
            return Err(Error::Numerical {
                what: "bracketing the ball multiplier in the simplex/ball projection".into(),
                residual: euclidean_distance(&blend(hi), center) - radius,
            });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if euclidean_distance(&blend(mid), center) > radius {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Feasible side of the bracket, pulled exactly onto the ball; the pull
    // stays on the simplex since the center is a simplex point.
    let mut out = blend(hi);
    project_l2_ball_in_place(&mut out, center, radius);
    Ok(out)
}

/// Dykstra's algorithm for the intersection of two convex sets given their
/// projection maps. Returns the iterate produced by `project_a`, so the
/// output satisfies set A's membership exactly and set B's up to the
/// residual at the stop.
pub fn dykstra_pair(
    point: &[f64],
    project_a: impl Fn(&[f64]) -> Vec<f64>,
    project_b: impl Fn(&[f64]) -> Vec<f64>,
    tol: f64,
    max_rounds: usize,
) -> Result<Vec<f64>> {
    let n = point.len();
    let mut x = point.to_vec();
    let mut p_inc = vec![0.0; n];
    let mut q_inc = vec![0.0; n];
    let mut y_prev: Option<Vec<f64>> = None;
    let mut residual = f64::INFINITY;
    for _ in 0..max_rounds {
        let mut shifted: Vec<f64> = x.iter().zip(&p_inc).map(|(v, c)| v + c).collect();
        let y = project_a(&shifted);
        for i in 0..n {
            p_inc[i] = shifted[i] - y[i];
        }
        shifted = y.iter().zip(&q_inc).map(|(v, c)| v + c).collect();
        let x_next = project_b(&shifted);
        for i in 0..n {
            q_inc[i] = shifted[i] - x_next[i];
        }
        let cross = euclidean_distance(&y, &x_next);
        let successive = y_prev
            .as_deref()
            .map_or(f64::INFINITY, |yp| euclidean_distance(&y, yp));
        residual = cross.min(successive);
        x = x_next;
        if cross <= tol || successive <= tol {
            return Ok(y);
        }
        y_prev = Some(y);
    }
    Err(Error::Numerical {
        what: "Dykstra alternating projection".into(),
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn l2_ball_interior_point_unchanged() {
        let out = project_l2_ball(&[0.3, 0.0], &[0.0, 0.0], 1.0);
        assert_close(&out, &[0.3, 0.0], 0.0);
    }

    #[test]
    fn l2_ball_radial_scaling() {
        let out = project_l2_ball(&[2.0, 0.0], &[0.0, 0.0], 1.0);
        assert_close(&out, &[1.0, 0.0], 1e-15);
        let out = project_l2_ball(&[1.0, 1.0], &[0.0, 0.0], 1.0);
        let inv_sqrt2 = 1.0 / 2.0_f64.sqrt();
        assert_close(&out, &[inv_sqrt2, inv_sqrt2], 1e-15);
    }

    #[test]
    fn simplex_symmetry_and_fixed_points() {
        let out = project_simplex(&[0.5, 0.5, 0.5]);
        assert_close(&out, &[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 1e-15);
        let out = project_simplex(&[1.0, 0.0]);
        assert_close(&out, &[1.0, 0.0], 0.0);
    }

    #[test]
    fn simplex_matches_enumeration_oracle() {
        let point = [1.2, 0.1, -0.3];
        let got = project_simplex(&point);
        let want = reference::simplex_projection_exact(&point, 1.0);
        assert_close(&got, &want, 1e-12);
        assert!((got.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn l1_ball_trivial_cases() {
        let out = project_l1_ball(&[0.2, -0.1], 1.0);
        assert_close(&out, &[0.2, -0.1], 0.0);
        let out = project_l1_ball(&[2.0, 0.0], 1.0);
        assert_close(&out, &[1.0, 0.0], 1e-15);
    }

    #[test]
    fn l1_ball_matches_enumeration_oracle() {
        let point = [1.0, 1.0, -1.0];
        let got = project_l1_ball(&point, 1.0);
        let want = reference::l1_projection_exact(&point, 1.0);
        assert_close(&got, &want, 1e-12);
        assert!(got.iter().map(|v| v.abs()).sum::<f64>() <= 1.0 + 1e-12);
    }

    #[test]
    fn intersection_fixed_point_and_inactive_ball() {
        let center = vec![1.0 / 3.0; 3];
        let inside = [0.4, 0.35, 0.25];
        let got = project_intersection(&inside, &center, 0.5).unwrap();
        assert_close(&got, &inside, 1e-10);

        // A radius >= 2 contains the whole simplex, so only the simplex binds.
        let point = [1.5, -0.2, 0.4];
        let got = project_intersection(&point, &center, 2.0).unwrap();
        let want = project_simplex(&point);
        assert_close(&got, &want, 1e-12);
    }

    #[test]
    fn intersection_matches_kkt_oracle() {
        let center = vec![1.0 / 3.0; 3];
        let point = [1.0, 0.0, 0.0];
        let got = project_intersection(&point, &center, 0.1).unwrap();
        let want = reference::simplex_ball_projection_exact(&point, &center, 0.1);
        assert_close(&got, &want, 1e-10);
    }

    #[test]
    fn clamp_interval_basics() {
        assert_eq!(clamp_interval(0.5, 0.0, 1.0), 0.5);
        assert_eq!(clamp_interval(-2.0, 0.0, 1.0), 0.0);
        assert_eq!(clamp_interval(7.0, 0.0, 1.0), 1.0);
    }

    #[test]
    #[should_panic(expected = "lo <= hi")]
    fn clamp_interval_rejects_inverted_bounds() {
        clamp_interval(0.0, 1.0, -1.0);
    }

    #[test]
    fn empty_intersection_rejected_at_construction() {
        let far = vec![5.0, 5.0, 5.0];
        assert!(FeasibleSet::simplex_ball(far, 0.1).is_err());
        let ok = FeasibleSet::simplex_ball(vec![1.0 / 3.0; 3], 0.1);
        assert!(ok.is_ok());
    }

    #[test]
    fn projections_idempotent_and_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let center = vec![0.25, 0.25, 0.25, 0.25];
        for _ in 0..1000 {
            let p: Vec<f64> = (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect();

            let s = project_simplex(&p);
            assert_close(&project_simplex(&s), &s, 1e-12);
            assert!(FeasibleSet::Simplex { dim: 4 }.contains(&s, 1e-10));

            let l = project_l1_ball(&p, 1.3);
            assert_close(&project_l1_ball(&l, 1.3), &l, 1e-12);
            assert!(FeasibleSet::L1Ball { radius: 1.3 }.contains(&l, 1e-10));

            let b = project_l2_ball(&p, &center, 0.6);
            assert_close(&project_l2_ball(&b, &center, 0.6), &b, 1e-12);

            let i = project_intersection(&p, &center, 0.3).unwrap();
            let again = project_intersection(&i, &center, 0.3).unwrap();
            assert_close(&again, &i, 1e-10);
            assert!(FeasibleSet::Simplex { dim: 4 }.contains(&i, 1e-10));
            assert!(euclidean_distance(&i, &center) <= 0.3 + 1e-10);
        }
    }

    #[test]
    fn projections_nonexpansive() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let p: Vec<f64> = (0..5).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let q: Vec<f64> = (0..5).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let d = euclidean_distance(&p, &q);

            let (sp, sq) = (project_simplex(&p), project_simplex(&q));
            assert!(euclidean_distance(&sp, &sq) <= d + 1e-12);

            let (lp, lq) = (project_l1_ball(&p, 0.9), project_l1_ball(&q, 0.9));
            assert!(euclidean_distance(&lp, &lq) <= d + 1e-12);

            let c = vec![0.0; 5];
            let (bp, bq) = (project_l2_ball(&p, &c, 1.1), project_l2_ball(&q, &c, 1.1));
            assert!(euclidean_distance(&bp, &bq) <= d + 1e-12);
        }
    }
}
