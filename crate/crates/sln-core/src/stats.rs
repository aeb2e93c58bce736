//! Statistical layer: per-outcome payoff decomposition of a witness, exact
//! moments under a model table, and a seeded Monte-Carlo sampler with the
//! matching estimators.
//!
//! The witness functional splits into two observables, one per setting,
//! with payoff Lambda^i_{n_A n_B} for outcome (n_A, n_B) under setting i.
//! Their means recover the witness LHS; their variances set the shot-noise
//! scale epsilon. Everything downstream (simulation, estimation, relative
//! violation) is bookkeeping on those payoffs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::DeviceProfile;
use crate::physics::{joint_table, ExperimentParams, JointTable};
use crate::witness::{rhs_sup, Witness};

/// Per-outcome payoffs `lam[setting][n_A][n_B]`.
///
/// Rows with no independent coordinate behind them are identically zero:
/// all of setting 2 / n_A = 1, and both n_B = 2 columns except through the
/// marginal terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaObservable {
    pub lam: [[[f64; 3]; 2]; 2],
}

/// One recorded measurement event. `setting` is 1-based on the wire
/// (files, CLI); internal table indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EventRecord {
    pub setting: u8,
    pub n_a: u8,
    pub n_b: u8,
}

/// Exact first and second moments of the two payoff observables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: [f64; 2],
    pub var: [f64; 2],
}

/// Sample estimate of the witness violation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    /// Per-setting sample means of the payoff observables.
    pub theta_star: [f64; 2],
    /// Plug-in standard error of theta_star[0] + theta_star[1].
    pub epsilon_hat: f64,
    /// (theta_star[0] + theta_star[1] - rhs) / epsilon_hat.
    pub v_hat: f64,
    /// Samples per setting.
    pub n: usize,
}

/// Splits a witness vector into the two per-setting payoff tables.
///
/// The marginal components enter every Bob outcome of their setting's
/// n_A = 0 row (the marginal is the row sum), the joint components only
/// their own cell, and the dependent cells carry zero.
pub fn lambda_decompose(w: &Witness) -> LambdaObservable {
    let l = &w.lambda;
    LambdaObservable {
        lam: [
            [[l[0] + l[6], l[1] + l[6], l[6]], [l[2], l[3], 0.0]],
            [[l[4] + l[7], l[5] + l[7], l[7]], [0.0, 0.0, 0.0]],
        ],
    }
}

pub fn exact_moments(lam: &LambdaObservable, table: &JointTable) -> Moments {
    let mut mean = [0.0; 2];
    let mut sq = [0.0; 2];
    for i in 0..2 {
        for na in 0..2 {
            for nb in 0..3 {
                let v = lam.lam[i][na][nb];
                let p = table.p[i][na][nb];
                mean[i] += v * p;
                sq[i] += v * v * p;
            }
        }
    }
    Moments {
        mean,
        var: [sq[0] - mean[0] * mean[0], sq[1] - mean[1] * mean[1]],
    }
}

/// sqrt(var_1 + var_2): the standard deviation of the summed payoff means
/// scaled by sqrt(N), i.e. independent of the sample count.
pub fn epsilon_coeff(lam: &LambdaObservable, table: &JointTable) -> f64 {
    let m = exact_moments(lam, table);
    (m.var[0] + m.var[1]).max(0.0).sqrt()
}

/// Samples per independent RNG stream. Each (setting, shard) pair owns one
/// counter-based stream, so the merged record list depends only on
/// (seed, n) — never on thread count or scheduling.
const SHARD: usize = 1 << 20;

/// Draws `n` i.i.d. events per setting from the model's click distribution.
/// Output order: the full setting-1 block, then the setting-2 block, each
/// in sample order.
pub fn simulate(params: &ExperimentParams, n: usize, seed: u64) -> Result<Vec<EventRecord>> {
    if n == 0 {
        return Err(Error::InvalidParams("need at least one sample per setting".into()));
    }
    let table = joint_table(params)?;
    let mut out = Vec::with_capacity(2 * n);
    for setting in 0..2usize {
        // Row-major CDF over the six outcome cells (n_A, n_B).
        let mut cdf = [0.0f64; 6];
        let mut acc = 0.0;
        for na in 0..2 {
            for nb in 0..3 {
                acc += table.p[setting][na][nb];
                cdf[na * 3 + nb] = acc;
            }
        }
        let n_shards = n.div_ceil(SHARD);
        let blocks: Vec<Vec<EventRecord>> = (0..n_shards)
            .into_par_iter()
            .map(|shard| {
                let mut rng = ChaCha12Rng::seed_from_u64(seed);
                rng.set_stream(((setting as u64) << 32) | shard as u64);
                let len = (n - shard * SHARD).min(SHARD);
                (0..len)
                    .map(|_| {
                        let u: f64 = rng.gen();
                        let cell = cdf.iter().position(|&c| u < c).unwrap_or(5);
                        EventRecord {
                            setting: setting as u8 + 1,
                            n_a: (cell / 3) as u8,
                            n_b: (cell % 3) as u8,
                        }
                    })
                    .collect()
            })
            .collect();
        for b in blocks {
            out.extend_from_slice(&b);
        }
    }
    Ok(out)
}

/// Witness violation estimate from recorded events: per-setting payoff
/// means, plug-in (1/N) variance, and the studentized gap against the
/// exact classical bound.
pub fn estimate(w: &Witness, events: &[EventRecord]) -> Result<Estimate> {
    let lam = lambda_decompose(w);
    let mut n = [0usize; 2];
    let mut sum = [0.0f64; 2];
    let mut sumsq = [0.0f64; 2];
    for e in events {
        let i = match e.setting {
            1 => 0,
            2 => 1,
            s => return Err(Error::Domain(format!("setting must be 1 or 2, got {s}"))),
        };
        if e.n_a > 1 || e.n_b > 2 {
            return Err(Error::Domain(format!(
                "outcome out of range: n_a={}, n_b={}",
                e.n_a, e.n_b
            )));
        }
        let v = lam.lam[i][e.n_a as usize][e.n_b as usize];
        n[i] += 1;
        sum[i] += v;
        sumsq[i] += v * v;
    }
    if n[0] == 0 || n[1] == 0 {
        return Err(Error::MissingSetting);
    }
    if n[0] != n[1] {
        return Err(Error::InvalidParams(format!(
            "settings have unequal sample counts: {} vs {}",
            n[0], n[1]
        )));
    }
    let nn = n[0] as f64;
    let theta = [sum[0] / nn, sum[1] / nn];
    let var = [
        (sumsq[0] / nn - theta[0] * theta[0]).max(0.0),
        (sumsq[1] / nn - theta[1] * theta[1]).max(0.0),
    ];
    let epsilon_hat = ((var[0] + var[1]) / nn).sqrt();
    let gap = theta[0] + theta[1] - rhs_sup(w, DeviceProfile::Array).0;
    let v_hat = if epsilon_hat > 0.0 {
        gap / epsilon_hat
    } else if gap == 0.0 {
        0.0
    } else {
        f64::INFINITY * gap.signum()
    };
    Ok(Estimate { theta_star: theta, epsilon_hat, v_hat, n: n[0] })
}
