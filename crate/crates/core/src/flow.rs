//! The extended combinatorial Ricci flow `dl/dt = K̃(l)`.
//!
//! The flow is the negative gradient flow of `H(l) = Σ cov_σ − 2π Σ l_e`,
//! so `H` decreases at rate `|K̃|²`. Integration is classical RK4 on the
//! augmented system `(l, h)` with `dh/dt = −|K̃|²`; the accumulated `h`
//! (`h_delta`) is therefore non-increasing by construction, and comparing it
//! with the true `H` measures the integration error.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::complex::{CurvatureVector, PolyhedralMetric, TriangulatedComplex};
use crate::error::{Error, Result};
use crate::tet::{covolume, tet_volume};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepMode {
    Fixed,
    Adaptive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub step_mode: StepMode,
    pub initial_step: f64,
    /// Stop once `|K̃|∞` is at most this and every tetrahedron is realizable.
    pub tolerance_curvature: f64,
    pub max_time: f64,
    /// Stop once `|l|∞` reaches this.
    pub divergence_bound: f64,
    /// Keep every `sample_stride`-th accepted state in the trajectory.
    pub sample_stride: usize,
    /// Re-project the per-cusp length sums to their initial values after
    /// each step. They are conserved by the exact flow; this only removes
    /// rounding drift.
    pub normalize_decorations: bool,
    /// Upper bound on the adaptive step.
    pub max_step: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            step_mode: StepMode::Adaptive,
            initial_step: 1e-2,
            tolerance_curvature: 1e-9,
            max_time: 200.0,
            divergence_bound: 1e3,
            sample_stride: 1,
            normalize_decorations: false,
            max_step: 1.0,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x > 0.0 && x.is_finite();
        let bad = |what: &str| Err(Error::Domain(format!("flow config: {what}")));
        if !positive(self.initial_step) {
            return bad("initial_step must be positive");
        }
        if !(positive(self.tolerance_curvature) && self.tolerance_curvature < 1.0) {
            return bad("tolerance_curvature must lie in (0, 1)");
        }
        // max_time = 0 is allowed: it only evaluates the initial state
        if !(self.max_time >= 0.0 && self.max_time.is_finite()) {
            return bad("max_time must be finite and non-negative");
        }
        if !positive(self.divergence_bound) {
            return bad("divergence_bound must be positive");
        }
        if self.sample_stride == 0 {
            return bad("sample_stride must be at least 1");
        }
        if !positive(self.max_step) {
            return bad("max_step must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    pub t: f64,
    pub l: PolyhedralMetric,
    pub k_tilde: CurvatureVector,
    /// `∫₀ᵗ −|K̃|² dt` along the discrete trajectory.
    pub h_delta: f64,
}

impl FlowState {
    pub fn initial(c: &TriangulatedComplex, m: &PolyhedralMetric) -> Result<Self> {
        let k_tilde = c.extended_curvature(m)?;
        Ok(FlowState { t: 0.0, l: m.clone(), k_tilde, h_delta: 0.0 })
    }

    pub fn max_abs_l(&self) -> f64 {
        self.l.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlowStatus {
    Converged,
    MaxTimeReached,
    DivergenceSuspected,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowResult {
    pub status: FlowStatus,
    pub final_state: FlowState,
    /// Initial state, every `sample_stride`-th accepted state, final state.
    pub trajectory: Vec<FlowState>,
    /// `(t, h_delta)` after every accepted step, starting at `(0, 0)`.
    pub h_ledger: Vec<(f64, f64)>,
    /// `H` at the final metric when every tetrahedron is realizable.
    pub h_closed_form: Option<f64>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

/// A failed run, with the last state that was accepted.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("{error}")]
pub struct FlowError {
    pub error: Error,
    pub last_good: Option<Box<FlowState>>,
}

impl From<Error> for FlowError {
    fn from(error: Error) -> Self {
        FlowError { error, last_good: None }
    }
}

/// `H(l) = Σ_σ cov_σ(l) − 2π Σ_e l_e`.
pub fn h_value(c: &TriangulatedComplex, m: &PolyhedralMetric) -> Result<f64> {
    if m.0.len() != c.edge_count() {
        return Err(Error::MetricLength { expected: c.edge_count(), got: m.0.len() });
    }
    let mut h = 0.0;
    for t in 0..c.tet_count() {
        h += covolume(c.tet_shape(t), &c.tet_lengths(t, m))?;
    }
    Ok(h - 2.0 * PI * m.0.iter().sum::<f64>())
}

/// Hessian of `H` by central differences of `−K̃`, step `1e-5 · max(1, |l|∞)`.
/// Row `i` holds `∂(−K̃)/∂l_i`.
pub fn h_hessian(c: &TriangulatedComplex, m: &PolyhedralMetric) -> Result<DMatrix<f64>> {
    let n = c.edge_count();
    if m.0.len() != n {
        return Err(Error::MetricLength { expected: n, got: m.0.len() });
    }
    let h = 1e-5 * m.0.iter().fold(1.0f64, |a, x| a.max(x.abs()));
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        let (mut up, mut down) = (m.clone(), m.clone());
        up.0[i] += h;
        down.0[i] -= h;
        let (a, b) = (c.extended_curvature(&up)?, c.extended_curvature(&down)?);
        for j in 0..n {
            out[(i, j)] = -(a.0[j] - b.0[j]) / (2.0 * h);
        }
    }
    Ok(out)
}

fn field(c: &TriangulatedComplex, l: &[f64], stage: &str) -> Result<Vec<f64>> {
    if let Some(x) = l.iter().find(|x| !x.is_finite()) {
        return Err(Error::Numeric(format!("non-finite length {x} at stage {stage}: l = {l:?}")));
    }
    let k = c.extended_curvature(&PolyhedralMetric(l.to_vec()))?.0;
    if k.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric(format!("non-finite curvature at stage {stage}: l = {l:?}, K = {k:?}")));
    }
    Ok(k)
}

fn axpy(l: &[f64], h: f64, k: &[f64]) -> Vec<f64> {
    l.iter().zip(k).map(|(a, b)| a + h * b).collect()
}

fn sq(k: &[f64]) -> f64 {
    k.iter().map(|x| x * x).sum()
}

/// One RK4 step of size `dt`.
pub fn flow_step(c: &TriangulatedComplex, s: &FlowState, dt: f64) -> Result<FlowState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Domain(format!("step size {dt} must be positive")));
    }
    let l = &s.l.0;
    let k1 = &s.k_tilde.0;
    let k2 = field(c, &axpy(l, 0.5 * dt, k1), "2")?;
    let k3 = field(c, &axpy(l, 0.5 * dt, &k2), "3")?;
    let k4 = field(c, &axpy(l, dt, &k3), "4")?;
    let next: Vec<f64> = (0..l.len())
        .map(|e| l[e] + dt / 6.0 * (k1[e] + 2.0 * k2[e] + 2.0 * k3[e] + k4[e]))
        .collect();
    let k_next = field(c, &next, "end")?;
    let dh = dt / 6.0 * (sq(k1) + 2.0 * sq(&k2) + 2.0 * sq(&k3) + sq(&k4));
    Ok(FlowState {
        t: s.t + dt,
        l: PolyhedralMetric(next),
        k_tilde: CurvatureVector(k_next),
        h_delta: s.h_delta - dh,
    })
}

/// Minimal-norm correction `A w` restoring the cusp sums `Aᵀ l` to `target`.
struct CuspProjector {
    a: DMatrix<f64>,
    gram_pinv: DMatrix<f64>,
    target: DVector<f64>,
}

impl CuspProjector {
    fn new(c: &TriangulatedComplex, l0: &[f64]) -> Result<Self> {
        let ideal = c.ideal_vertices();
        let full = c.incidence_matrix();
        let a = DMatrix::from_fn(c.edge_count(), ideal.len(), |e, j| full[(e, ideal[j])]);
        let gram_pinv = (a.transpose() * &a)
            .pseudo_inverse(1e-12)
            .map_err(|e| Error::Numeric(format!("cusp projection: {e}")))?;
        let target = a.transpose() * DVector::from_column_slice(l0);
        Ok(CuspProjector { a, gram_pinv, target })
    }

    fn apply(&self, l: &mut [f64]) {
        if self.a.ncols() == 0 {
            return;
        }
        let cur = DVector::from_column_slice(l);
        let w = &self.gram_pinv * (&self.target - self.a.transpose() * cur);
        let shift = &self.a * w;
        for (x, d) in l.iter_mut().zip(shift.iter()) {
            *x += d;
        }
    }
}

fn closed_form_h(c: &TriangulatedComplex, m: &PolyhedralMetric) -> Option<f64> {
    if c.is_decorated(m) {
        h_value(c, m).ok()
    } else {
        None
    }
}

/// Integrate the flow from `m0` until convergence, the time limit, or the
/// divergence bound.
pub fn run_flow(
    c: &TriangulatedComplex,
    m0: &PolyhedralMetric,
    cfg: &FlowConfig,
) -> std::result::Result<FlowResult, FlowError> {
    cfg.validate()?;
    if m0.0.len() != c.edge_count() {
        return Err(Error::MetricLength { expected: c.edge_count(), got: m0.0.len() }.into());
    }
    let mut state = FlowState::initial(c, m0)?;
    let projector = if cfg.normalize_decorations { Some(CuspProjector::new(c, &m0.0)?) } else { None };
    let fail = |error: Error, last: &FlowState| FlowError { error, last_good: Some(Box::new(last.clone())) };

    let mut trajectory = vec![state.clone()];
    let mut h_ledger = vec![(0.0, 0.0)];
    let (mut accepted, mut rejected) = (0usize, 0usize);
    let mut dt = cfg.initial_step;
    let mut since_sample = 0usize;

    let status = loop {
        if state.k_tilde.max_abs() <= cfg.tolerance_curvature && c.is_decorated(&state.l) {
            break FlowStatus::Converged;
        }
        if state.max_abs_l() >= cfg.divergence_bound {
            break FlowStatus::DivergenceSuspected;
        }
        if state.t >= cfg.max_time {
            break FlowStatus::MaxTimeReached;
        }
        let remaining = cfg.max_time - state.t;
        let last_step = dt >= remaining;
        let h = if last_step { remaining } else { dt };

        let mut next = match cfg.step_mode {
            StepMode::Fixed => flow_step(c, &state, h).map_err(|e| fail(e, &state))?,
            StepMode::Adaptive => {
                let big = flow_step(c, &state, h).map_err(|e| fail(e, &state))?;
                let half = flow_step(c, &state, 0.5 * h).map_err(|e| fail(e, &state))?;
                let small = flow_step(c, &half, 0.5 * h).map_err(|e| fail(e, &state))?;
                let err = (0..big.l.0.len()).fold(0.0f64, |m, e| m.max((big.l.0[e] - small.l.0[e]).abs()));
                let tol = 1e-9 * state.max_abs_l().max(1.0);
                // H must not go up; checked with the closed form when both
                // ends are realizable
                let h_up = match (closed_form_h(c, &state.l), closed_form_h(c, &small.l)) {
                    (Some(h0), Some(h1)) => h1 - h0 > 1e-12,
                    _ => false,
                };
                let factor = if err > 0.0 { (0.9 * (tol / err).powf(0.2)).clamp(0.2, 5.0) } else { 5.0 };
                if err > tol || h_up {
                    rejected += 1;
                    dt = h * if h_up { factor.min(0.5) } else { factor };
                    if dt < 1e-14 * state.t.max(1.0) {
                        return Err(fail(Error::Numeric(format!("step size underflow at t = {}", state.t)), &state));
                    }
                    continue;
                }
                dt = (h * factor).min(cfg.max_step);
                small
            }
        };
        if last_step {
            next.t = cfg.max_time;
        }
        if let Some(p) = &projector {
            p.apply(&mut next.l.0);
            next.k_tilde = c.extended_curvature(&next.l).map_err(|e| fail(e, &state))?;
        }
        accepted += 1;
        h_ledger.push((next.t, next.h_delta));
        state = next;
        since_sample += 1;
        if since_sample == cfg.sample_stride {
            since_sample = 0;
            trajectory.push(state.clone());
        }
    };
    if trajectory.last() != Some(&state) {
        trajectory.push(state.clone());
    }
    let h_closed_form = closed_form_h(c, &state.l);
    Ok(FlowResult {
        status,
        final_state: state,
        trajectory,
        h_ledger,
        h_closed_form,
        accepted_steps: accepted,
        rejected_steps: rejected,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TetReport {
    pub shape: String,
    /// Edge class of each canonical edge.
    pub edge_classes: [usize; 6],
    /// Dihedral angles in canonical edge order (extended if not realizable).
    pub angles: [f64; 6],
    pub realizable: bool,
    pub volume: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub schema: u32,
    pub status: FlowStatus,
    pub t_final: f64,
    pub k_tilde_max: f64,
    pub k_tilde: Vec<f64>,
    pub final_metric: Vec<f64>,
    /// Final metric with the decoration part removed (closest point of its
    /// decoration orbit to 0).
    pub normalized_metric: Vec<f64>,
    pub tets: Vec<TetReport>,
    pub valences: Vec<usize>,
    pub min_valence: Option<usize>,
    pub all_valences_at_least_ten: bool,
    /// Sum of tetrahedron volumes; present when every tetrahedron is realizable.
    pub total_volume: Option<f64>,
    pub vertex_length_sums: Vec<f64>,
    pub h_delta: f64,
    pub h_closed_form: Option<f64>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// `(t, |l|∞)` at the sampled states.
    pub max_abs_l_trace: Vec<(f64, f64)>,
    pub caveat: Option<String>,
}

/// Summary of a run: final geometry, H ledger, valences.
pub fn convergence_report(c: &TriangulatedComplex, r: &FlowResult) -> Result<ConvergenceReport> {
    let m = &r.final_state.l;
    let mut tets = Vec::with_capacity(c.tet_count());
    for t in 0..c.tet_count() {
        let shape = c.tet_shape(t);
        let realizable = c.tet_angles(t, m).is_ok();
        let angles = c.tet_angles_extended(t, m);
        let volume = if realizable { Some(tet_volume(shape, &angles)?) } else { None };
        tets.push(TetReport { shape: shape.to_string(), edge_classes: c.canonical_edges(t), angles: angles.0, realizable, volume });
    }
    let total_volume = tets.iter().map(|t| t.volume).sum::<Option<f64>>();
    let valences = c.edge_valences();
    let caveat = (r.status == FlowStatus::DivergenceSuspected).then(|| {
        "the lengths left the divergence bound; the flow is only known to diverge along a subsequence \
         when no zero-curvature decorated metric exists, so this is a heuristic verdict"
            .to_string()
    });
    Ok(ConvergenceReport {
        schema: 1,
        status: r.status,
        t_final: r.final_state.t,
        k_tilde_max: r.final_state.k_tilde.max_abs(),
        k_tilde: r.final_state.k_tilde.0.clone(),
        final_metric: m.0.clone(),
        normalized_metric: c.decoration_normalized(m)?.0,
        tets,
        valences: valences.valences,
        min_valence: valences.min,
        all_valences_at_least_ten: valences.all_at_least_ten,
        total_volume,
        vertex_length_sums: c.vertex_length_sums(m)?,
        h_delta: r.final_state.h_delta,
        h_closed_form: r.h_closed_form,
        accepted_steps: r.accepted_steps,
        rejected_steps: r.rejected_steps,
        max_abs_l_trace: r.trajectory.iter().map(|s| (s.t, s.max_abs_l())).collect(),
        caveat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{build_complex, FaceGluing, GluingSpec};

    fn figure_eight() -> TriangulatedComplex {
        let fg = |tet, face, perm| Some(FaceGluing { tet, face, perm });
        build_complex(GluingSpec {
            tets: 2,
            gluings: vec![
                vec![fg(1, 0, [0, 1, 3, 2]), fg(1, 2, [1, 2, 3, 0]), fg(1, 1, [2, 3, 1, 0]), fg(1, 3, [2, 1, 0, 3])],
                vec![fg(0, 0, [0, 1, 3, 2]), fg(0, 2, [3, 2, 0, 1]), fg(0, 1, [3, 0, 1, 2]), fg(0, 3, [2, 1, 0, 3])],
            ],
            vertex_flags: Default::default(),
        })
        .unwrap()
    }

    #[test]
    fn equilibrium_is_fixed() {
        let c = figure_eight();
        let s = FlowState::initial(&c, &PolyhedralMetric(vec![0.2, 0.2])).unwrap();
        let n = flow_step(&c, &s, 0.1).unwrap();
        assert!((n.l.0[0] - 0.2).abs() < 1e-14 && (n.l.0[1] - 0.2).abs() < 1e-14);
        assert!(n.h_delta.abs() < 1e-24);
        let r = run_flow(&c, &PolyhedralMetric(vec![0.2, 0.2]), &FlowConfig::default()).unwrap();
        assert_eq!(r.status, FlowStatus::Converged);
        assert_eq!(r.final_state.t, 0.0);
        assert_eq!(r.accepted_steps, 0);
        let rep = convergence_report(&c, &r).unwrap();
        assert_eq!(rep.t_final, 0.0);
    }

    #[test]
    fn step_moves_toward_equality() {
        let c = figure_eight();
        let s = FlowState::initial(&c, &PolyhedralMetric(vec![0.01, -0.01])).unwrap();
        assert!(s.k_tilde.0[0] < 0.0 && s.k_tilde.0[1] > 0.0);
        let n = flow_step(&c, &s, 0.01).unwrap();
        assert!(n.l.0[0] < 0.01 && n.l.0[1] > -0.01);
        assert!(n.h_delta < 0.0);
    }

    #[test]
    fn rk4_local_error_is_fifth_order() {
        let c = figure_eight();
        let s = FlowState::initial(&c, &PolyhedralMetric(vec![0.3, -0.2])).unwrap();
        let gap = |dt: f64| {
            let one = flow_step(&c, &s, dt).unwrap();
            let two = flow_step(&c, &flow_step(&c, &s, dt / 2.0).unwrap(), dt / 2.0).unwrap();
            (one.l.0[0] - two.l.0[0]).abs().max((one.l.0[1] - two.l.0[1]).abs())
        };
        let ratio = gap(0.2) / gap(0.1);
        // 2^5 = 32 in the asymptotic regime
        assert!(ratio > 20.0 && ratio < 45.0, "ratio {ratio}");
    }

    #[test]
    fn h_constant_on_the_diagonal() {
        let c = figure_eight();
        let h0 = h_value(&c, &PolyhedralMetric(vec![0.0, 0.0])).unwrap();
        for x in [1.0, -1.0] {
            assert!((h_value(&c, &PolyhedralMetric(vec![x, x])).unwrap() - h0).abs() < 1e-12);
        }
    }

    #[test]
    fn hessian_kernel_is_the_decoration_line() {
        let c = figure_eight();
        let hm = h_hessian(&c, &PolyhedralMetric(vec![0.4, 0.4])).unwrap();
        let v = DVector::from_column_slice(&[1.0, 1.0]);
        assert!((&hm * v).norm() < 1e-8);
        assert!((hm[(0, 1)] - hm[(1, 0)]).abs() < 1e-8);
        assert!(hm[(0, 0)] > 0.1);
    }

    #[test]
    fn config_limits() {
        let c = figure_eight();
        let m = PolyhedralMetric(vec![0.3, -0.2]);
        let cfg = FlowConfig { max_time: 0.0, ..Default::default() };
        assert_eq!(run_flow(&c, &m, &cfg).unwrap().status, FlowStatus::MaxTimeReached);
        let cfg = FlowConfig { divergence_bound: 0.1, ..Default::default() };
        let r = run_flow(&c, &m, &cfg).unwrap();
        assert_eq!(r.status, FlowStatus::DivergenceSuspected);
        assert!(convergence_report(&c, &r).unwrap().caveat.is_some());
        assert!(FlowConfig { tolerance_curvature: 2.0, ..Default::default() }.validate().is_err());
        assert!(FlowConfig { sample_stride: 0, ..Default::default() }.validate().is_err());
        assert!(run_flow(&c, &PolyhedralMetric(vec![0.0]), &FlowConfig::default()).is_err());
    }

    #[test]
    fn fixed_step_lands_on_max_time() {
        let c = figure_eight();
        let cfg = FlowConfig { step_mode: StepMode::Fixed, initial_step: 0.3, max_time: 1.0, ..Default::default() };
        let r = run_flow(&c, &PolyhedralMetric(vec![0.3, -0.2]), &cfg).unwrap();
        assert_eq!(r.status, FlowStatus::MaxTimeReached);
        assert_eq!(r.final_state.t, 1.0);
        assert_eq!(r.accepted_steps, 4);
    }

    #[test]
    fn normalization_keeps_cusp_sums() {
        let c = figure_eight();
        let m = PolyhedralMetric(vec![0.3, -0.2]);
        let cfg = FlowConfig { normalize_decorations: true, ..Default::default() };
        let r = run_flow(&c, &m, &cfg).unwrap();
        assert_eq!(r.status, FlowStatus::Converged);
        let s = c.vertex_length_sums(&r.final_state.l).unwrap();
        assert!((s[0] - 0.2).abs() < 1e-14);
    }
}
