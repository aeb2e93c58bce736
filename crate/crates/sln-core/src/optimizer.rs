//! Optimization of the LO amplitudes (γ₁, γ₂): coarse grid scan over the
//! feasible box followed by simplex refinement, maximizing the relative
//! violation while keeping both amplitudes above the latent-classicality
//! threshold γ_min.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::reduce_to_independent;
use crate::nm::nelder_mead;
use crate::physics::{gamma_min, joint_table, ExperimentParams};
use crate::witness::{
    evaluate, find_witness, SearchConfig, SearchMethod, SearchOutcome, ViolationReport, Witness,
};

#[derive(Debug, Clone, Copy)]
pub struct OptimizerConfig {
    /// Requested amplitude range; the effective lower bound is
    /// max(gamma_lo, γ_min).
    pub gamma_lo: f64,
    pub gamma_hi: f64,
    /// Coarse-grid spacing.
    pub step: f64,
    /// Amplitude resolution of the simplex refinement.
    pub gamma_tol: f64,
    /// Inner witness search. Polishing every grid point is expensive, so the
    /// default scans unpolished and polishes only the final point.
    pub search: SearchConfig,
    /// Re-certify the final point with the hull backend.
    pub certify_with_hull: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            gamma_lo: 0.0,
            gamma_hi: 2.0,
            step: 0.05,
            gamma_tol: 1e-4,
            search: SearchConfig { polish: false, ..SearchConfig::default() },
            certify_with_hull: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OptimizationResult {
    pub gamma1: f64,
    pub gamma2: f64,
    pub witness: Witness,
    pub report: ViolationReport,
    /// Every evaluated point as (γ₁, γ₂, v_coeff), grid scan first, then the
    /// refinement path. Points with no certified witness carry v = 0.
    pub trace: Vec<(f64, f64, f64)>,
}

/// Relative violation at one amplitude pair, or `None` when no witness is
/// certified there. The diagonal γ₁ = γ₂ carries no steering information and
/// is excluded from the search.
fn violation_at(
    r: f64,
    eta_a: f64,
    eta_b: f64,
    g1: f64,
    g2: f64,
    search: &SearchConfig,
) -> Result<Option<SearchOutcome>> {
    if g1 == g2 {
        return Ok(None);
    }
    let params = ExperimentParams::new(r, eta_a, eta_b, g1, g2)?;
    let v = reduce_to_independent(&joint_table(&params)?);
    find_witness(&v, search)
}

/// Maximizes the relative violation over the box [max(γ_min, lo), hi]².
///
/// Returns the best point found, preferring verdicts in the order
/// sln > lhcs_violation (a returned lhcs_violation means the optimum sits on
/// the classicality boundary and its margin re-check failed), or `None` when
/// no amplitude pair admits a certified violation.
pub fn optimize(
    r: f64,
    eta_a: f64,
    eta_b: f64,
    cfg: &OptimizerConfig,
) -> Result<Option<OptimizationResult>> {
    if !(cfg.step > 0.0) || !(cfg.gamma_tol > 0.0) {
        return Err(Error::InvalidParams("step and gamma_tol must be positive".into()));
    }
    let lo = cfg.gamma_lo.max(gamma_min(r, eta_a, eta_b));
    let hi = cfg.gamma_hi;
    if !(lo < hi) {
        return Err(Error::InvalidParams(format!(
            "empty amplitude range: [max(gamma_lo, gamma_min), gamma_hi] = [{lo}, {hi}]"
        )));
    }
    // Validate the physics parameters once, up front.
    ExperimentParams::new(r, eta_a, eta_b, lo, hi)?;

    let n_steps = ((hi - lo) / cfg.step).floor() as usize;
    let values: Vec<f64> = (0..=n_steps).map(|k| lo + k as f64 * cfg.step).collect();
    let pairs: Vec<(f64, f64)> = values
        .iter()
        .flat_map(|&g1| values.iter().map(move |&g2| (g1, g2)))
        .filter(|(g1, g2)| g1 != g2)
        .collect();

    let scanned: Vec<(f64, f64, Option<SearchOutcome>)> = pairs
        .par_iter()
        .map(|&(g1, g2)| {
            let out = violation_at(r, eta_a, eta_b, g1, g2, &cfg.search)?;
            Ok((g1, g2, out))
        })
        .collect::<Result<_>>()?;

    let mut trace: Vec<(f64, f64, f64)> = Vec::with_capacity(scanned.len());
    let mut best: Option<(f64, f64, SearchOutcome)> = None;
    for (g1, g2, out) in scanned {
        let v = out.as_ref().map_or(0.0, |o| o.v_coeff);
        trace.push((g1, g2, v));
        if let Some(o) = out {
            // Lexicographic (γ₁, γ₂) tie-break keeps the argmax deterministic.
            let improves = best.as_ref().map_or(o.v_coeff > 0.0, |(_, _, b)| o.v_coeff > b.v_coeff);
            if improves {
                best = Some((g1, g2, o));
            }
        }
    }
    let Some((mut g1, mut g2, mut best_out)) = best else {
        log::info!("no amplitude pair in [{lo}, {hi}]² admits a certified violation");
        return Ok(None);
    };

    // Simplex descent on -V from the best grid point, projected onto the box.
    {
        let trace = &mut trace;
        let objective = |x: &[f64]| {
            let c1 = x[0].clamp(lo, hi);
            let c2 = x[1].clamp(lo, hi);
            let out = violation_at(r, eta_a, eta_b, c1, c2, &cfg.search).ok().flatten();
            let v = out.map_or(0.0, |o| o.v_coeff);
            trace.push((c1, c2, v));
            -v
        };
        let (x, neg_v) = nelder_mead(objective, &[g1, g2], cfg.step, 200, 0.0, cfg.gamma_tol);
        let (c1, c2) = (x[0].clamp(lo, hi), x[1].clamp(lo, hi));
        if -neg_v > best_out.v_coeff {
            if let Some(o) = violation_at(r, eta_a, eta_b, c1, c2, &cfg.search)? {
                if o.v_coeff > best_out.v_coeff {
                    (g1, g2, best_out) = (c1, c2, o);
                }
            }
        }
    }

    // Final pass at the winning amplitudes: polish the direction, and
    // re-derive it from hull facets when asked to.
    let final_cfg = SearchConfig {
        polish: true,
        method: if cfg.certify_with_hull { SearchMethod::Hull } else { cfg.search.method },
        ..cfg.search
    };
    match violation_at(r, eta_a, eta_b, g1, g2, &final_cfg) {
        Ok(Some(o)) if o.v_coeff >= best_out.v_coeff => best_out = o,
        Ok(_) => log::warn!("final certification did not improve on the scan witness"),
        Err(e) => return Err(e),
    }
    trace.push((g1, g2, best_out.v_coeff));

    let params = ExperimentParams::new(r, eta_a, eta_b, g1, g2)?;
    let report = evaluate(&best_out.witness, &params)?;
    Ok(Some(OptimizationResult { gamma1: g1, gamma2: g2, witness: best_out.witness, report, trace }))
}
