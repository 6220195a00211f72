//! Power curves, CLT diagnostics, the Hotelling baseline and the limiting
//! local-power formula.

mod clt;
mod hotelling;
mod local_power;
mod power;
mod svg;

pub use clt::{clt_diagnostic, simulate_decomposition, CltConfig, CltReport, Decomposition};
pub use hotelling::{hotelling_t2, hotelling_t2_groups};
pub use local_power::{
    local_power_cross_validation, theoretical_local_power, truncated_second_moment, LocalPowerConfig,
    LocalPowerReport, TheoreticalPower,
};
pub use power::{
    power_curve, DrawMode, PowerConfig, PowerCurve, PowerPoint, PowerSeries, TestSpec,
    DEFAULT_TRUNCATION_RADIUS,
};
pub use svg::power_curve_svg;

/// Critical exponents `(β_d, γ_d)`: `(1/4, 1/4)` for `d <= 8`, otherwise
/// `(1/2 - 2/d, 2/d)`.
pub fn critical_exponents(d: usize) -> (f64, f64) {
    assert!(d >= 1, "dimension must be positive");
    if d <= 8 {
        (0.25, 0.25)
    } else {
        let d = d as f64;
        (0.5 - 2.0 / d, 2.0 / d)
    }
}
