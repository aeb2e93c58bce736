//! Built-in benchmark operating points: three squeezing/efficiency regimes
//! together with reference witness directions (quoted to two decimals) and
//! the violation strengths they are known to reach after direction search.

use crate::geometry::DIM;
use crate::physics::ExperimentParams;
use crate::witness::Witness;

#[derive(Debug, Clone, Copy)]
pub struct BenchmarkCase {
    pub label: &'static str,
    pub r: f64,
    pub eta_a: f64,
    pub eta_b: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    /// Reference witness direction, rounded to two decimals.
    pub lambda: [f64; DIM],
    /// Quoted relative violation per √N at these parameters.
    pub v_table: f64,
}

impl BenchmarkCase {
    pub fn params(&self) -> ExperimentParams {
        ExperimentParams::new(self.r, self.eta_a, self.eta_b, self.gamma1, self.gamma2)
            .expect("benchmark parameters are valid")
    }

    pub fn witness(&self) -> Witness {
        Witness { lambda: self.lambda }
    }
}

pub const BENCHMARK_CASES: [BenchmarkCase; 3] = [
    BenchmarkCase {
        label: "A",
        r: 0.6,
        eta_a: 0.9,
        eta_b: 0.75,
        gamma1: 0.54,
        gamma2: 1.04,
        lambda: [0.42, 0.43, 0.1, 0.17, 0.38, 0.46, -0.3, -0.39],
        v_table: 2.6e-3,
    },
    BenchmarkCase {
        label: "B",
        r: 0.8,
        eta_a: 0.85,
        eta_b: 0.5,
        gamma1: 0.44,
        gamma2: 1.04,
        lambda: [0.48, 0.49, 0.1, 0.19, 0.32, 0.39, -0.35, -0.32],
        v_table: 4.1e-3,
    },
    BenchmarkCase {
        label: "C",
        r: 1.0,
        eta_a: 0.8,
        eta_b: 0.3,
        gamma1: 0.1,
        gamma2: 0.8,
        lambda: [0.0, -0.06, 0.11, 0.22, 0.52, 0.61, 0.15, 0.52],
        v_table: 1.2e-2,
    },
];

pub fn benchmark_case(label: &str) -> Option<&'static BenchmarkCase> {
    BENCHMARK_CASES.iter().find(|c| c.label.eq_ignore_ascii_case(label))
}
