use crate::mesh::{CrackSet, Mesh, Point};

/// Hausdorff distance between two cracks seen as unions of closed segments.
/// The empty crack is at distance `diam(Ω)` from every nonempty one.
pub fn hausdorff_distance(mesh: &Mesh, a: &CrackSet, b: &CrackSet) -> f64 {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => 0.0,
        (true, false) | (false, true) => mesh.diameter(),
        _ if a == b => 0.0,
        _ => {
            let (sa, sb) = (a.segments(mesh), b.segments(mesh));
            let shared = |s: &[Point; 2], others: &[[Point; 2]]| others.iter().any(|o| same_segment(s, o));
            let da = sa.iter().filter(|s| !shared(s, &sb)).map(|s| directed_from_segment(s, &sb)).fold(0.0, f64::max);
            let db = sb.iter().filter(|s| !shared(s, &sa)).map(|s| directed_from_segment(s, &sa)).fold(0.0, f64::max);
            da.max(db)
        }
    }
}

/// Hausdorff distance between two nonempty finite unions of segments.
pub fn segment_hausdorff(a: &[[Point; 2]], b: &[[Point; 2]]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty(), "segment sets must be nonempty");
    let da = a.iter().map(|s| directed_from_segment(s, b)).fold(0.0, f64::max);
    let db = b.iter().map(|s| directed_from_segment(s, a)).fold(0.0, f64::max);
    da.max(db)
}

fn same_segment(a: &[Point; 2], b: &[Point; 2]) -> bool {
    (a[0] == b[0] && a[1] == b[1]) || (a[0] == b[1] && a[1] == b[0])
}

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub(crate) fn point_segment_distance(p: Point, s: &[Point; 2]) -> f64 {
    let e = sub(s[1], s[0]);
    let w = sub(p, s[0]);
    let l = dot(e, e);
    let mu = if l > 0.0 { (dot(w, e) / l).clamp(0.0, 1.0) } else { 0.0 };
    let d = sub(w, [mu * e[0], mu * e[1]]);
    dot(d, d).sqrt()
}

/// Squared distance from `p(τ) = p0 + τ·d` to segment `s`, as a quadratic in
/// τ on the piece of the line containing `tau`.
fn squared_distance_piece(p0: Point, d: Point, s: &[Point; 2], tau: f64) -> [f64; 3] {
    let e = sub(s[1], s[0]);
    let l = dot(e, e);
    let w = sub(p0, s[0]);
    let mu = if l > 0.0 { (dot(w, e) + tau * dot(d, e)) / l } else { 0.0 };
    let endpoint = |q: Point| {
        let r = sub(p0, q);
        [dot(r, r), 2.0 * dot(r, d), dot(d, d)]
    };
    if l == 0.0 || mu <= 0.0 {
        endpoint(s[0])
    } else if mu >= 1.0 {
        endpoint(s[1])
    } else {
        // |w + τd|² − (w·e + τ d·e)²/|e|²
        let (we, de) = (dot(w, e), dot(d, e));
        [dot(w, w) - we * we / l, 2.0 * (dot(w, d) - we * de / l), dot(d, d) - de * de / l]
    }
}

/// Values of τ where the projection of `p(τ)` onto `s` switches between an
/// endpoint and the interior.
fn projection_switches(p0: Point, d: Point, s: &[Point; 2], out: &mut Vec<f64>) {
    let e = sub(s[1], s[0]);
    let l = dot(e, e);
    let de = dot(d, e);
    if l == 0.0 || de == 0.0 {
        return;
    }
    let we = dot(sub(p0, s[0]), e);
    for target in [0.0, l] {
        let tau = (target - we) / de;
        if tau > 0.0 && tau < 1.0 {
            out.push(tau);
        }
    }
}

fn quadratic_roots(c: [f64; 3], lo: f64, hi: f64, out: &mut Vec<f64>) {
    let [c0, c1, c2] = c;
    let scale = c0.abs().max(c1.abs()).max(c2.abs());
    if scale == 0.0 {
        return;
    }
    let eps = 1e-14 * scale;
    let mut push = |r: f64| {
        if r >= lo && r <= hi {
            out.push(r);
        }
    };
    if c2.abs() <= eps {
        if c1.abs() > eps {
            push(-c0 / c1);
        }
        return;
    }
    let disc = c1 * c1 - 4.0 * c2 * c0;
    if disc < 0.0 {
        return;
    }
    let q = -0.5 * (c1 + c1.signum() * disc.sqrt());
    push(q / c2);
    if q != 0.0 {
        push(c0 / q);
    }
}

/// `sup_{p ∈ s} min_j dist(p, others_j)`.
///
/// Each distance is convex along `s`, so the supremum of their minimum is
/// attained at an endpoint of `s` or where two distances cross. Crossings are
/// roots of a difference of piecewise quadratics.
fn directed_from_segment(s: &[Point; 2], others: &[[Point; 2]]) -> f64 {
    let p0 = s[0];
    let d = sub(s[1], s[0]);
    let at = |tau: f64| [p0[0] + tau * d[0], p0[1] + tau * d[1]];
    let f = |tau: f64| others.iter().map(|o| point_segment_distance(at(tau), o)).fold(f64::INFINITY, f64::min);

    let mut switches: Vec<Vec<f64>> = Vec::with_capacity(others.len());
    for o in others {
        let mut v = Vec::new();
        projection_switches(p0, d, o, &mut v);
        switches.push(v);
    }

    let mut candidates = vec![0.0, 1.0];
    for sw in &switches {
        candidates.extend(sw);
    }
    let mut bps = Vec::new();
    for i in 0..others.len() {
        for k in i + 1..others.len() {
            bps.clear();
            bps.push(0.0);
            bps.extend(&switches[i]);
            bps.extend(&switches[k]);
            bps.push(1.0);
            bps.sort_by(f64::total_cmp);
            for w in bps.windows(2) {
                if w[1] <= w[0] {
                    continue;
                }
                let mid = 0.5 * (w[0] + w[1]);
                let qi = squared_distance_piece(p0, d, &others[i], mid);
                let qk = squared_distance_piece(p0, d, &others[k], mid);
                quadratic_roots([qi[0] - qk[0], qi[1] - qk[1], qi[2] - qk[2]], w[0], w[1], &mut candidates);
            }
        }
    }
    candidates.into_iter().map(f).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_offset_segments() {
        let a = [[[0.0, 0.0], [1.0, 0.0]]];
        let b = [[[0.0, 0.3], [1.0, 0.3]]];
        assert!((segment_hausdorff(&a, &b) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn interior_crossing_is_found() {
        // the point of a farthest from both b segments is its midpoint
        let a = [[[0.0, 0.0], [2.0, 0.0]]];
        let b = [[[0.0, 0.5], [0.0, 1.0]], [[2.0, 0.5], [2.0, 1.0]]];
        let expect = (1.0f64 + 0.25).sqrt();
        let got = directed_from_segment(&a[0], &b);
        assert!((got - expect).abs() < 1e-12, "{got}");
    }

    #[test]
    fn contained_segment_has_zero_directed_distance() {
        let a = [[0.25, 0.0], [0.75, 0.0]];
        let b = [[[0.0, 0.0], [1.0, 0.0]]];
        assert!(directed_from_segment(&a, &b) < 1e-15);
    }
}
