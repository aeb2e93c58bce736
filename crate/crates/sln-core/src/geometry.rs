//! Coordinates for the eight-dimensional independent probability space and
//! the classical-model vertex family.
//!
//! No-signaling plus normalization cut the twelve raw click probabilities
//! down to eight independent components, stored in a fixed order that every
//! other module (witness vectors, JSON/CSV emission) follows:
//!
//! ```text
//! (P(0,0|g1), P(0,1|g1), P(1,0|g1), P(1,1|g1),
//!  P(0,0|g2), P(0,1|g2), P_A(0|g1), P_A(0|g2))
//! ```
//!
//! Classical models with deterministic Alice outcomes and coherent light on
//! Bob's side trace out a family of points M(s, t) in this space, one
//! quadratic curve in t per strategy s; their convex hull is the set the
//! witness machinery separates against.

use crate::error::{Error, Result};
use crate::physics::JointTable;

pub const DIM: usize = 8;

/// A point of the independent probability space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilityVector {
    pub v: [f64; DIM],
}

/// Deterministic pair of Alice outcomes, one per setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Strategy {
    pub a1: u8,
    pub a2: u8,
}

impl Strategy {
    /// The four strategies in canonical enumeration order.
    pub const ALL: [Strategy; 4] = [
        Strategy { a1: 0, a2: 0 },
        Strategy { a1: 0, a2: 1 },
        Strategy { a1: 1, a2: 0 },
        Strategy { a1: 1, a2: 1 },
    ];
}

/// One classical-model point M(s, t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vertex {
    pub m: [f64; DIM],
    pub strategy: Strategy,
    pub t: f64,
}

/// Bob-side detector layout. Each variant fixes the coherent-state click
/// profile Pi_{n_B}(t) as a quadratic in t = exp(-|alpha|^2 / 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DeviceProfile {
    /// Balanced two-detector click array: (t^2, 2t(1-t), (1-t)^2).
    #[default]
    Array,
    /// Single on-off detector: (t^2, 1-t^2, 0) — double clicks impossible.
    SingleOnOff,
}

impl DeviceProfile {
    /// Coefficients (a, b, c) with Pi_{n_B}(t) = a t^2 + b t + c, indexed by n_B.
    pub fn pi_coeffs(self) -> [[f64; 3]; 3] {
        match self {
            DeviceProfile::Array => [[1.0, 0.0, 0.0], [-2.0, 2.0, 0.0], [1.0, -2.0, 1.0]],
            DeviceProfile::SingleOnOff => [[1.0, 0.0, 0.0], [-1.0, 0.0, 1.0], [0.0, 0.0, 0.0]],
        }
    }

    pub fn pi(self, n_b: usize, t: f64) -> f64 {
        let [a, b, c] = self.pi_coeffs()[n_b];
        (a * t + b) * t + c
    }
}

/// Projects a full click table onto the eight independent components.
pub fn reduce_to_independent(table: &JointTable) -> ProbabilityVector {
    let p = &table.p;
    ProbabilityVector {
        v: [
            p[0][0][0],
            p[0][0][1],
            p[0][1][0],
            p[0][1][1],
            p[1][0][0],
            p[1][0][1],
            table.alice_marginal(0, 0),
            table.alice_marginal(1, 0),
        ],
    }
}

/// Rebuilds the full 12-entry table from the independent components, using
/// Alice's marginals, normalization, and the setting-independence of Bob's
/// marginal. Fails when a recovered entry is substantially negative, i.e.
/// the vector was not a physical point.
pub fn reconstruct_full(pv: &ProbabilityVector) -> Result<JointTable> {
    let v = &pv.v;
    let b0 = v[0] + v[2];
    let b1 = v[1] + v[3];
    let p = [
        [
            [v[0], v[1], v[6] - v[0] - v[1]],
            [v[2], v[3], 1.0 - v[6] - v[2] - v[3]],
        ],
        [
            [v[4], v[5], v[7] - v[4] - v[5]],
            [b0 - v[4], b1 - v[5], 1.0 - v[7] - (b0 - v[4]) - (b1 - v[5])],
        ],
    ];
    for (i, setting) in p.iter().enumerate() {
        for (na, row) in setting.iter().enumerate() {
            for (nb, &x) in row.iter().enumerate() {
                if x < -1e-9 {
                    return Err(Error::Domain(format!(
                        "unphysical vector: recovered P({na},{nb}|setting {}) = {x}",
                        i + 1
                    )));
                }
            }
        }
    }
    Ok(JointTable { p })
}

/// The classical-model point M(s, t): Alice answers deterministically per
/// setting, Bob sees coherent light of overlap t through the given device.
pub fn vertex(s: Strategy, t: f64, profile: DeviceProfile) -> Result<Vertex> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("t must be in [0, 1], got {t}")));
    }
    let pi0 = profile.pi(0, t);
    let pi1 = profile.pi(1, t);
    let d10 = if s.a1 == 0 { 1.0 } else { 0.0 };
    let d11 = 1.0 - d10;
    let d20 = if s.a2 == 0 { 1.0 } else { 0.0 };
    Ok(Vertex {
        m: [
            d10 * pi0,
            d10 * pi1,
            d11 * pi0,
            d11 * pi1,
            d20 * pi0,
            d20 * pi1,
            d10,
            d20,
        ],
        strategy: s,
        t,
    })
}

/// All 4M vertices on the uniform grid t_k = k/(M-1), strategies in
/// canonical order (outer loop), t ascending (inner loop).
pub fn vertex_grid(m: usize, profile: DeviceProfile) -> Result<Vec<Vertex>> {
    if m < 2 {
        return Err(Error::InvalidParams(format!("grid size must be >= 2, got {m}")));
    }
    let mut out = Vec::with_capacity(4 * m);
    for s in Strategy::ALL {
        for k in 0..m {
            let t = k as f64 / (m - 1) as f64;
            out.push(vertex(s, t, profile)?);
        }
    }
    Ok(out)
}
