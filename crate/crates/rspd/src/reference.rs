//! Slow, independent reference computations used to validate the fast paths.
//!
//! Everything here is exhaustive enumeration, bisection, or direct summation.
//! None of it shares code with the production implementations it checks, so a
//! bug on either side shows up as a mismatch.

/// Exact projection onto `{u : u_i >= 0, sum u_i = total}` by enumerating
/// every candidate support set and solving the KKT system on it.
///
/// Cost is `O(2^n * n)`; intended for `n <= 20`.
pub fn simplex_projection_exact(point: &[f64], total: f64) -> Vec<f64> {
    let n = point.len();
    assert!(
        (1..=20).contains(&n),
        "enumeration oracle limited to n <= 20"
    );
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let sum: f64 = support.iter().map(|&i| point[i]).sum();
        let tau = (sum - total) / support.len() as f64;
        let mut candidate = vec![0.0; n];
        let mut feasible = true;
        for &i in &support {
            let v = point[i] - tau;
            if v < -1e-12 {
                feasible = false;
                break;
            }
            candidate[i] = v.max(0.0);
        }
        if !feasible {
            continue;
        }
        let dist: f64 = candidate
            .iter()
            .zip(point)
            .map(|(c, p)| (c - p) * (c - p))
            .sum();
        if best.as_ref().is_none_or(|(d, _)| dist < *d) {
            best = Some((dist, candidate));
        }
    }
    best.expect("at least one support set is feasible").1
}

/// Exact projection onto `{x : ||x||_1 <= radius}` by support-set
/// enumeration of the boundary KKT system.
pub fn l1_projection_exact(point: &[f64], radius: f64) -> Vec<f64> {
    let n = point.len();
    assert!(
        (1..=20).contains(&n),
        "enumeration oracle limited to n <= 20"
    );
    assert!(radius > 0.0);
    let l1: f64 = point.iter().map(|v| v.abs()).sum();
    if l1 <= radius {
        return point.to_vec();
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let sum: f64 = support.iter().map(|&i| point[i].abs()).sum();
        let tau = (sum - radius) / support.len() as f64;
        if tau < -1e-12 {
            continue;
        }
        let mut candidate = vec![0.0; n];
        let mut feasible = true;
        for &i in &support {
            let m = point[i].abs() - tau;
            if m < -1e-12 {
                feasible = false;
                break;
            }
            candidate[i] = point[i].signum() * m.max(0.0);
        }
        if !feasible {
            continue;
        }
        let dist: f64 = candidate
            .iter()
            .zip(point)
            .map(|(c, p)| (c - p) * (c - p))
            .sum();
        if best.as_ref().is_none_or(|(d, _)| dist < *d) {
            best = Some((dist, candidate));
        }
    }
    best.expect("boundary case always has a feasible support").1
}

/// Projection onto `simplex ∩ B(center, radius)` (center on the simplex) by
/// bisection on the ball multiplier, with the exact simplex oracle solving
/// each inner subproblem.
///
/// The binding-ball solution is `y(beta) = proj_simplex((p + beta*c)/(1+beta))`
/// where `beta >= 0` solves `||y(beta) - c|| = radius`.
pub fn simplex_ball_projection_exact(point: &[f64], center: &[f64], radius: f64) -> Vec<f64> {
    assert_eq!(point.len(), center.len());
    let dist_to_center = |y: &[f64]| -> f64 {
        y.iter()
            .zip(center)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    };
    let unconstrained = simplex_projection_exact(point, 1.0);
    if dist_to_center(&unconstrained) <= radius + 1e-14 {
        return unconstrained;
    }
    let blend = |beta: f64| -> Vec<f64> {
        let mixed: Vec<f64> = point
            .iter()
            .zip(center)
            .map(|(p, c)| (p + beta * c) / (1.0 + beta))
            .collect();
        simplex_projection_exact(&mixed, 1.0)
    };
    // Bracket: h(0) > 0 and y(beta) -> center as beta -> inf, so h -> -radius.
    let mut lo = 0.0;
    let mut hi = 1.0;
    while dist_to_center(&blend(hi)) > radius {
        hi *= 2.0;
        assert!(hi < 1e18, "failed to bracket the ball multiplier");
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if dist_to_center(&blend(mid)) > radius {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Return the feasible side of the bracket.
    blend(hi)
}

/// `O(n^2)` pairwise AUC: the fraction of (positive, negative) pairs ranked
/// correctly, ties counting one half.
pub fn pairwise_auc(scores: &[f64], labels: &[i8]) -> f64 {
    assert_eq!(scores.len(), labels.len());
    let mut wins = 0.0_f64;
    let mut pairs = 0.0_f64;
    for (i, &li) in labels.iter().enumerate() {
        if li != 1 {
            continue;
        }
        for (j, &lj) in labels.iter().enumerate() {
            if lj != -1 {
                continue;
            }
            pairs += 1.0;
            if scores[i] > scores[j] {
                wins += 1.0;
            } else if scores[i] == scores[j] {
                wins += 0.5;
            }
        }
    }
    assert!(
        pairs > 0.0,
        "need at least one positive and one negative label"
    );
    wins / pairs
}

/// Golden-section maximization of a unimodal function on `[lo, hi]`,
/// finished with one parabolic fit through the final bracket.
///
/// Pure section search stalls at `sqrt(eps |f| / curvature)` where function
/// values become indistinguishable in f64; the closing fit recovers the
/// vertex to near machine precision for smooth peaks. Shrink the bracket to
/// `tol` before fitting; `tol` around `1e-5` is a good choice.
pub fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    assert!(lo < hi);
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let mut fa = f(a);
    let mut fb = f(b);
    while hi - lo > tol {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = f(a);
        }
    }
    let mid = 0.5 * (lo + hi);
    let (f_lo, f_mid, f_hi) = (f(lo), f(mid), f(hi));
    let denom = (f_lo - f_mid) + (f_hi - f_mid);
    if denom >= 0.0 {
        // No usable curvature at this scale; the bracket is the answer.
        return mid;
    }
    let vertex = mid + 0.25 * (hi - lo) * (f_lo - f_hi) / denom;
    vertex.clamp(lo, hi)
}

/// Central finite differences of a scalar function of a vector.
pub fn central_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut grad = vec![0.0; x.len()];
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let up = f(&probe);
        probe[i] = x[i] - h;
        let down = f(&probe);
        probe[i] = x[i];
        grad[i] = (up - down) / (2.0 * h);
    }
    grad
}

/// Maximizes an objective over the 3-simplex on the rational grid with the
/// given number of steps per axis, returning the best value found.
pub fn simplex3_grid_max(objective: impl Fn(&[f64; 3]) -> f64, steps: usize) -> f64 {
    assert!(steps >= 1);
    let m = steps as f64;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=steps {
        for j in 0..=(steps - i) {
            let k = steps - i - j;
            let y = [i as f64 / m, j as f64 / m, k as f64 / m];
            let v = objective(&y);
            if v > best {
                best = v;
            }
        }
    }
    best
}

/// Arithmetic mean by direct summation, the oracle for incremental averaging.
pub fn direct_mean(points: &[Vec<f64>]) -> Vec<f64> {
    assert!(!points.is_empty());
    let dim = points[0].len();
    let mut sum = vec![0.0; dim];
    for p in points {
        assert_eq!(p.len(), dim);
        for (s, v) in sum.iter_mut().zip(p) {
            *s += v;
        }
    }
    for s in &mut sum {
        *s /= points.len() as f64;
    }
    sum
}
