//! Witness vectors against the local-hidden-classical-states model: the
//! supporting-hyperplane inequality, its exact right-hand side by quadratic
//! suprema over the continuous detector parameter, the violation search
//! (hull facets or LP separation), and the final verdict.
//!
//! A witness λ certifies a violation when λ·𝓟 exceeds
//! sup over all classical points M(s, t) of λ·M — the supremum is taken in
//! closed form, never on the grid, so a reported violation is a genuine
//! certificate rather than a discretization artifact.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{
    reduce_to_independent, reconstruct_full, vertex, vertex_grid, DeviceProfile,
    ProbabilityVector, Strategy, Vertex, DIM,
};
use crate::hull::convex_hull;
use crate::lp::separate;
use crate::nm::nelder_mead;
use crate::physics::{
    classicality_margin, conditional_dist, joint_table, ExperimentParams, JointTable,
};
use crate::stats::{epsilon_coeff, lambda_decompose};

/// Raw gaps at or below this are treated as zero: no violation is reported.
pub const VIOLATION_TOL: f64 = 1e-10;
/// Slack granted to the conditional classicality margins before a positive
/// violation is downgraded from `Sln` to `LhcsViolation`.
const MARGIN_TOL: f64 = 1e-12;

/// A witness direction λ, ordered like [`ProbabilityVector`]. The inequality
/// is positively homogeneous, so λ and cλ (c > 0) are the same witness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    pub lambda: [f64; DIM],
}

impl Witness {
    pub fn new(lambda: [f64; DIM]) -> Result<Self> {
        if lambda.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParams("witness entries must be finite".into()));
        }
        Ok(Witness { lambda })
    }

    /// Same witness scaled to ‖λ‖_∞ = 1 (the zero vector stays zero).
    pub fn normalized(&self) -> Witness {
        let mx = self.lambda.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if mx == 0.0 {
            return *self;
        }
        Witness { lambda: self.lambda.map(|c| c / mx) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// The inequality holds: nothing detected.
    NoViolation,
    /// The inequality is violated, but some conditional click distribution
    /// is itself nonclassical, so the violation does not certify steering
    /// of *latent* nonclassicality.
    LhcsViolation,
    /// Violation with all four conditional distributions classical.
    Sln,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::NoViolation => "no_violation",
            Verdict::LhcsViolation => "lhcs_violation",
            Verdict::Sln => "sln",
        }
    }
}

/// Outcome of evaluating one witness against one model/state.
///
/// `epsilon_coeff` and `v_coeff` are the sample-size-free coefficients: for
/// N events per setting the standard deviation of the estimator is
/// `epsilon_coeff/√N` and the expected significance is `v_coeff·√N`.
#[derive(Debug, Clone, Copy)]
pub struct ViolationReport {
    pub lhs: f64,
    pub rhs: f64,
    pub epsilon_coeff: f64,
    pub v_coeff: f64,
    pub lambda: [f64; DIM],
    pub argmax: Vertex,
    pub verdict: Verdict,
}

/// sup over t ∈ [0,1] of a·t² + b·t + c, with its argmax. Evaluated in
/// closed form: both endpoints plus the stationary point −b/2a when that is
/// a maximum interior to the interval. Ties resolve to the smaller t.
pub fn quadratic_sup(a: f64, b: f64, c: f64) -> (f64, f64) {
    let mut best = (c, 0.0);
    let at_one = a + b + c;
    if at_one > best.0 {
        best = (at_one, 1.0);
    }
    if a < 0.0 {
        let ts = -b / (2.0 * a);
        if ts > 0.0 && ts < 1.0 {
            let vs = (a * ts + b) * ts + c;
            if vs > best.0 {
                best = (vs, ts);
            }
        }
    }
    best
}

/// Exact sup over the classical set of λ·M(s, t): per deterministic strategy
/// the payoff is a quadratic in t, so the global supremum is the best of
/// four closed-form quadratic suprema. Strategy ties resolve to the earlier
/// entry of [`Strategy::ALL`].
pub fn rhs_sup(w: &Witness, profile: DeviceProfile) -> (f64, Vertex) {
    let pi = profile.pi_coeffs();
    let l = &w.lambda;
    let mut best: Option<(f64, Strategy, f64)> = None;
    for s in Strategy::ALL {
        let d10 = if s.a1 == 0 { 1.0 } else { 0.0 };
        let d11 = 1.0 - d10;
        let d20 = if s.a2 == 0 { 1.0 } else { 0.0 };
        let c0 = l[0] * d10 + l[2] * d11 + l[4] * d20;
        let c1 = l[1] * d10 + l[3] * d11 + l[5] * d20;
        let cc = l[6] * d10 + l[7] * d20;
        let qa = c0 * pi[0][0] + c1 * pi[1][0];
        let qb = c0 * pi[0][1] + c1 * pi[1][1];
        let qc = c0 * pi[0][2] + c1 * pi[1][2] + cc;
        let (val, t) = quadratic_sup(qa, qb, qc);
        if best.as_ref().map_or(true, |&(bv, _, _)| val > bv) {
            best = Some((val, s, t));
        }
    }
    let (val, s, t) = best.unwrap();
    (val, vertex(s, t, profile).expect("argmax t lies in [0,1]"))
}

/// λ·𝓟 in the canonical component ordering.
pub fn lhs(w: &Witness, v: &ProbabilityVector) -> f64 {
    w.lambda.iter().zip(&v.v).map(|(l, x)| l * x).sum()
}

/// Evaluates a witness against the model at the given parameters.
pub fn evaluate(w: &Witness, params: &ExperimentParams) -> Result<ViolationReport> {
    evaluate_table(w, &joint_table(params)?)
}

/// [`evaluate`] for an already-computed click table, e.g. one estimated
/// from data. The verdict is `Sln` only when the inequality is violated
/// *and* every conditional click distribution (two settings × two Alice
/// outcomes) passes the classicality margin.
pub fn evaluate_table(w: &Witness, table: &JointTable) -> Result<ViolationReport> {
    let v = reduce_to_independent(table);
    let lhs_val = lhs(w, &v);
    let (rhs_val, argmax) = rhs_sup(w, DeviceProfile::Array);
    let eps = epsilon_coeff(&lambda_decompose(w), table);
    let gap = lhs_val - rhs_val;
    let v_coeff = if eps > 0.0 {
        gap / eps
    } else if gap.abs() <= VIOLATION_TOL {
        0.0
    } else {
        f64::INFINITY.copysign(gap)
    };
    let verdict = if v_coeff > 0.0 {
        let mut latent = true;
        for setting in 0..2 {
            for n_a in 0..2 {
                let cond = conditional_dist(table, setting, n_a)?;
                if classicality_margin(&cond.q) < -MARGIN_TOL {
                    latent = false;
                }
            }
        }
        if latent {
            Verdict::Sln
        } else {
            Verdict::LhcsViolation
        }
    } else {
        Verdict::NoViolation
    };
    Ok(ViolationReport {
        lhs: lhs_val,
        rhs: rhs_val,
        epsilon_coeff: eps,
        v_coeff,
        lambda: w.lambda,
        argmax,
        verdict,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMethod {
    /// Enumerate facet normals of the convex hull of the vertex grid.
    Hull,
    /// One separating-hyperplane LP against the vertex grid.
    Lp,
}

#[derive(Debug, Clone, Copy)]
pub struct SearchConfig {
    /// Grid resolution M for the vertex family (4M candidate points).
    pub grid_m: usize,
    pub method: SearchMethod,
    pub profile: DeviceProfile,
    /// Refine the winning direction by simplex descent on the exact
    /// relative violation.
    pub polish: bool,
    /// LP rounds: grid violations that fail the continuous-t check trigger
    /// M ← 2M−1 this many times before giving up.
    pub max_refinements: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            grid_m: 30,
            method: SearchMethod::Lp,
            profile: DeviceProfile::Array,
            polish: true,
            max_refinements: 3,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SearchOutcome {
    pub witness: Witness,
    /// Exact relative violation V at the witness (continuous-t RHS).
    pub v_coeff: f64,
    /// Exact raw gap λ·𝓟 − rhs_sup(λ).
    pub gap: f64,
}

/// Searches for a witness whose inequality the point violates. `None` means
/// no violation was certified: every reported witness has already passed the
/// continuous-t check, so grid artifacts are never returned.
pub fn find_witness(v: &ProbabilityVector, cfg: &SearchConfig) -> Result<Option<SearchOutcome>> {
    let table = reconstruct_full(v)?;
    let mut best = match cfg.method {
        SearchMethod::Hull => hull_search(v, &table, cfg)?,
        SearchMethod::Lp => lp_search(v, &table, cfg)?,
    };
    if cfg.polish {
        if let Some(out) = best.as_mut() {
            polish(out, v, &table, cfg.profile);
        }
    }
    Ok(best)
}

/// Exact (relative violation, raw gap) of a candidate direction.
fn exact_score(
    w: &Witness,
    v: &ProbabilityVector,
    table: &JointTable,
    profile: DeviceProfile,
) -> (f64, f64) {
    let gap = lhs(w, v) - rhs_sup(w, profile).0;
    let eps = epsilon_coeff(&lambda_decompose(w), table);
    let vc = if eps > 0.0 {
        gap / eps
    } else if gap.abs() <= VIOLATION_TOL {
        0.0
    } else {
        f64::INFINITY.copysign(gap)
    };
    (vc, gap)
}

/// Total-order ranking: larger V, then larger raw gap, then lexicographically
/// smaller λ. Associative under reduction, so parallel order cannot change
/// the winner.
fn better(a: &(f64, f64, [f64; DIM]), b: &(f64, f64, [f64; DIM])) -> bool {
    match a.0.total_cmp(&b.0) {
        Ordering::Greater => return true,
        Ordering::Less => return false,
        Ordering::Equal => {}
    }
    match a.1.total_cmp(&b.1) {
        Ordering::Greater => return true,
        Ordering::Less => return false,
        Ordering::Equal => {}
    }
    for k in 0..DIM {
        match a.2[k].total_cmp(&b.2[k]) {
            Ordering::Less => return true,
            Ordering::Greater => return false,
            Ordering::Equal => {}
        }
    }
    false
}

fn hull_search(
    v: &ProbabilityVector,
    table: &JointTable,
    cfg: &SearchConfig,
) -> Result<Option<SearchOutcome>> {
    let points: Vec<[f64; DIM]> =
        vertex_grid(cfg.grid_m, cfg.profile)?.iter().map(|vx| vx.m).collect();
    let hull = match convex_hull(&points) {
        Ok(h) => h,
        Err(Error::Degenerate(why)) => {
            log::warn!("vertex family spans no full-dimensional body ({why}); using LP instead");
            return lp_search(v, table, cfg);
        }
        Err(e) => return Err(e),
    };
    log::info!(
        "hull search: {} facet normals at M = {} (joggle {:.1e})",
        hull.facets.len(),
        cfg.grid_m,
        hull.joggle
    );
    let best = hull
        .facets
        .par_iter()
        .filter_map(|f| {
            let w = Witness { lambda: f.normal }.normalized();
            let (vc, gap) = exact_score(&w, v, table, cfg.profile);
            (gap > VIOLATION_TOL).then_some((vc, gap, w.lambda))
        })
        .reduce_with(|a, b| if better(&a, &b) { a } else { b });
    Ok(best.and_then(|(vc, gap, lambda)| {
        (vc > 0.0).then_some(SearchOutcome { witness: Witness { lambda }, v_coeff: vc, gap })
    }))
}

fn lp_search(
    v: &ProbabilityVector,
    table: &JointTable,
    cfg: &SearchConfig,
) -> Result<Option<SearchOutcome>> {
    let mut m = cfg.grid_m;
    for round in 0..=cfg.max_refinements {
        let points: Vec<[f64; DIM]> = vertex_grid(m, cfg.profile)?.iter().map(|vx| vx.m).collect();
        let sol = separate(&v.v, &points)?;
        if sol.objective <= VIOLATION_TOL {
            // Inside the grid hull; a finer grid only grows the hull.
            return Ok(None);
        }
        let w = Witness { lambda: sol.lambda }.normalized();
        let (vc, gap) = exact_score(&w, v, table, cfg.profile);
        if gap > VIOLATION_TOL && vc > 0.0 {
            return Ok(Some(SearchOutcome { witness: w, v_coeff: vc, gap }));
        }
        log::debug!(
            "round {round}: grid gap {:.3e} at M = {m} failed the continuous-t check",
            sol.objective
        );
        m = 2 * m - 1;
    }
    log::warn!(
        "no continuous-t certificate after {} grid refinements; reporting none",
        cfg.max_refinements
    );
    Ok(None)
}

/// Simplex descent on −V over witness directions, restarted with shrinking
/// steps; the polished direction replaces the input only when it certifies a
/// strictly better violation.
fn polish(out: &mut SearchOutcome, v: &ProbabilityVector, table: &JointTable, profile: DeviceProfile) {
    for step in [0.3, 0.08, 0.02] {
        let x0 = out.witness.lambda.to_vec();
        let objective = |x: &[f64]| {
            let lambda: [f64; DIM] = x.try_into().unwrap();
            let w = Witness { lambda }.normalized();
            -exact_score(&w, v, table, profile).0
        };
        let (x, _) = nelder_mead(objective, &x0, step, 800, 1e-13, 0.0);
        let lambda: [f64; DIM] = x.as_slice().try_into().unwrap();
        let w = Witness { lambda }.normalized();
        let (vc, gap) = exact_score(&w, v, table, profile);
        if gap > VIOLATION_TOL && vc > out.v_coeff {
            *out = SearchOutcome { witness: w, v_coeff: vc, gap };
        }
    }
}
