//! Fixtures shared by the criterion benches.

use conormal::examples::{example, ExampleSpec};

pub fn titeica(n: usize) -> ExampleSpec {
    example("titeica", n).expect("built-in example")
}

pub fn quartic(n: usize) -> ExampleSpec {
    example("quartic", n).expect("built-in example")
}

/// A point away from the symmetric center of the chart.
pub fn probe(n: usize) -> Vec<f64> {
    (0..n).map(|i| 0.3 + 0.1 * i as f64).collect()
}
