use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// Continuous piecewise-linear function of time given by its knots; constant
/// before the first knot and after the last.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeProfile {
    knots: Vec<(f64, f64)>,
}

impl TimeProfile {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::Invalid("time profile needs at least one knot".into()));
        }
        if knots.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(Error::Invalid("time profile knots must be finite".into()));
        }
        if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Invalid("time profile knots must have increasing times".into()));
        }
        Ok(Self { knots })
    }

    pub fn constant(value: f64) -> Self {
        Self { knots: vec![(0.0, value)] }
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn value(&self, t: f64) -> f64 {
        let k = &self.knots;
        if t <= k[0].0 {
            return k[0].1;
        }
        if t >= k[k.len() - 1].0 {
            return k[k.len() - 1].1;
        }
        let i = k.partition_point(|&(kt, _)| kt <= t);
        let ((t0, v0), (t1, v1)) = (k[i - 1], k[i]);
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    /// Derivative on the knot interval containing `t` (right derivative at
    /// knots).
    pub fn slope(&self, t: f64) -> f64 {
        let k = &self.knots;
        if k.len() < 2 || t < k[0].0 || t >= k[k.len() - 1].0 {
            return 0.0;
        }
        let i = k.partition_point(|&(kt, _)| kt <= t);
        let ((t0, v0), (t1, v1)) = (k[i - 1], k[i]);
        (v1 - v0) / (t1 - t0)
    }

    pub fn is_constant(&self) -> bool {
        self.knots.windows(2).all(|w| w[0].1 == w[1].1)
    }
}

/// One term `s(t)·φ` of a boundary program.
#[derive(Clone, Debug, PartialEq)]
pub struct Mode {
    pub profile: TimeProfile,
    /// Nodal field on the uncracked mesh.
    pub spatial: Vec<f64>,
}

/// Time-dependent boundary displacement `g(t) = Σ s_k(t)·φ_k`.
///
/// The spatial modes are H¹ extensions of the boundary data to the whole
/// uncracked mesh, so `‖∇ġ‖` and `‖ġ‖` are well defined. Norms use the
/// lumped mass matrix, like the penalty term.
#[derive(Clone, Debug)]
pub struct BoundaryProgram {
    modes: Vec<Mode>,
    stiffness_gram: Vec<Vec<f64>>,
    mass_gram: Vec<Vec<f64>>,
    n_vertices: usize,
}

impl BoundaryProgram {
    pub fn new(mesh: &Mesh, modes: Vec<Mode>) -> Result<Self> {
        for (k, m) in modes.iter().enumerate() {
            if m.spatial.len() != mesh.n_vertices() {
                return Err(Error::Invalid(format!(
                    "mode {k} has {} values, mesh has {} vertices",
                    m.spatial.len(),
                    mesh.n_vertices()
                )));
            }
            if m.spatial.iter().any(|v| !v.is_finite()) {
                return Err(Error::Invalid(format!("mode {k} has non-finite values")));
            }
        }
        let n = modes.len();
        let mut stiffness_gram = vec![vec![0.0; n]; n];
        let mut mass_gram = vec![vec![0.0; n]; n];
        for a in 0..n {
            for b in a..n {
                let s = mesh.stiffness_product(&modes[a].spatial, &modes[b].spatial);
                let m = mesh.mass_product(&modes[a].spatial, &modes[b].spatial);
                stiffness_gram[a][b] = s;
                stiffness_gram[b][a] = s;
                mass_gram[a][b] = m;
                mass_gram[b][a] = m;
            }
        }
        Ok(Self { modes, stiffness_gram, mass_gram, n_vertices: mesh.n_vertices() })
    }

    /// The zero program.
    pub fn zero(mesh: &Mesh) -> Self {
        Self { modes: Vec::new(), stiffness_gram: Vec::new(), mass_gram: Vec::new(), n_vertices: mesh.n_vertices() }
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn at(&self, t: f64) -> Vec<f64> {
        self.combine(|p| p.value(t))
    }

    pub fn rate(&self, t: f64) -> Vec<f64> {
        self.combine(|p| p.slope(t))
    }

    /// `g(b) − g(a)`, as mode coefficients.
    pub fn coefficient_increment(&self, a: f64, b: f64) -> Vec<f64> {
        self.modes.iter().map(|m| m.profile.value(b) - m.profile.value(a)).collect()
    }

    fn combine(&self, coef: impl Fn(&TimeProfile) -> f64) -> Vec<f64> {
        let mut out = vec![0.0; self.n_vertices];
        for m in &self.modes {
            let c = coef(&m.profile);
            if c != 0.0 {
                for (o, v) in out.iter_mut().zip(&m.spatial) {
                    *o += c * v;
                }
            }
        }
        out
    }

    pub fn is_static(&self) -> bool {
        self.modes.iter().all(|m| m.profile.is_constant())
    }

    /// All knot times inside `(a, b)`, with `a` and `b` added, sorted.
    pub fn breakpoints(&self, a: f64, b: f64) -> Vec<f64> {
        let mut ts = vec![a, b];
        for m in &self.modes {
            ts.extend(m.profile.knots().iter().map(|k| k.0).filter(|&t| t > a && t < b));
        }
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts
    }

    /// Exact `(∫ₐᵇ ‖∇ġ‖ dτ, ∫ₐᵇ ‖ġ‖ dτ)`; `ġ` is constant between knots.
    pub fn rate_integrals(&self, a: f64, b: f64) -> (f64, f64) {
        if b <= a {
            return (0.0, 0.0);
        }
        let bp = self.breakpoints(a, b);
        let mut grad = 0.0;
        let mut val = 0.0;
        for w in bp.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let s: Vec<f64> = self.modes.iter().map(|m| m.profile.slope(mid)).collect();
            let len = w[1] - w[0];
            grad += len * quad(&self.stiffness_gram, &s).max(0.0).sqrt();
            val += len * quad(&self.mass_gram, &s).max(0.0).sqrt();
        }
        (grad, val)
    }

    /// `sup ‖g(t)‖_∞` over `[a, b]`, attained at a breakpoint since `g` is
    /// piecewise linear in time at every vertex.
    pub fn sup_norm(&self, a: f64, b: f64) -> f64 {
        self.breakpoints(a, b)
            .into_iter()
            .map(|t| self.at(t).iter().fold(0.0f64, |m, v| m.max(v.abs())))
            .fold(0.0, f64::max)
    }
}

fn quad(gram: &[Vec<f64>], s: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (a, row) in gram.iter().enumerate() {
        for (b, g) in row.iter().enumerate() {
            acc += s[a] * g * s[b];
        }
    }
    acc
}

/// Uniform time grid `t_i = i·δ` for `t_i ≤ T`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Schedule {
    end: f64,
    delta: f64,
    steps: usize,
}

impl Schedule {
    pub fn new(end: f64, delta: f64) -> Result<Self> {
        if !(end > 0.0 && end.is_finite()) {
            return Err(Error::Invalid(format!("final time must be positive, got {end}")));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::Invalid(format!("time step must be positive, got {delta}")));
        }
        if delta > end {
            return Err(Error::Invalid(format!("time step {delta} exceeds final time {end}")));
        }
        // tolerate representation error in T/δ, then keep t_i ≤ T
        let mut steps = (end / delta * (1.0 + 1e-12)).floor() as usize;
        while steps > 0 && steps as f64 * delta > end * (1.0 + 1e-12) {
            steps -= 1;
        }
        Ok(Self { end, delta, steps })
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.delta
    }

    /// Index of the record in force at time `t` (right-open intervals; the
    /// last record also covers `[t_n, T]`).
    pub fn index_at(&self, t: f64) -> Result<usize> {
        if !(t >= 0.0 && t <= self.end * (1.0 + 1e-12)) {
            return Err(Error::TimeOutOfRange { t, end: self.end });
        }
        let i = (t / self.delta + 1e-9).floor() as usize;
        Ok(i.min(self.steps))
    }
}
