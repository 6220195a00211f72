use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use crate::error::{invalid_input, invalid_param, Error, Result};
use crate::mc::normal_quantile;
use crate::sampling::LabeledSample;
use crate::stats::{TestMethod, TestReport};

/// Reciprocal condition numbers below this count as singular.
const MIN_RCOND: f64 = 1e-10;

/// Two-sample Hotelling `T^2` with the exact `F` calibration under
/// Gaussian data. `t_raw` is `T^2`; `z` is `Φ^{-1}(p_value)` so that, as for
/// the graph tests, small values favour the alternative.
pub fn hotelling_t2(sample: &LabeledSample, alpha: f64) -> Result<TestReport> {
    let x: Vec<&[f64]> = sample.group(1).collect();
    let y: Vec<&[f64]> = sample.group(2).collect();
    hotelling_t2_groups(&x, &y, sample.cloud.dim(), alpha)
}

fn mean(rows: &[&[f64]], d: usize) -> DVector<f64> {
    let mut m = DVector::zeros(d);
    for r in rows {
        m += DVector::from_column_slice(r);
    }
    m / rows.len() as f64
}

pub fn hotelling_t2_groups(x: &[&[f64]], y: &[&[f64]], d: usize, alpha: f64) -> Result<TestReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid_param(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let (n1, n2) = (x.len(), y.len());
    if n1 <= d + 1 || n2 <= d + 1 {
        return Err(invalid_input(format!(
            "Hotelling needs more than d + 1 = {} points per group, got {n1} and {n2}",
            d + 1
        )));
    }
    let (mx, my) = (mean(x, d), mean(y, d));
    let mut scatter = DMatrix::<f64>::zeros(d, d);
    for (rows, m) in [(x, &mx), (y, &my)] {
        for r in rows {
            let c = DVector::from_column_slice(r) - m;
            scatter.ger(1.0, &c, &c, 1.0);
        }
    }
    let pooled = scatter / (n1 + n2 - 2) as f64;
    let sv = pooled.singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    if !(smin > MIN_RCOND * smax) {
        return Err(Error::Numerical(format!(
            "pooled covariance is singular (condition number {:.3e})",
            smax / smin
        )));
    }
    let chol = pooled
        .cholesky()
        .ok_or_else(|| Error::Numerical("pooled covariance is not positive definite".into()))?;
    let diff = &mx - &my;
    let quad = diff.dot(&chol.solve(&diff));
    let (n1f, n2f, df) = (n1 as f64, n2 as f64, d as f64);
    let t2 = n1f * n2f / (n1f + n2f) * quad;
    let df2 = n1f + n2f - df - 1.0;
    let f_stat = df2 / (df * (n1f + n2f - 2.0)) * t2;
    let fisher = FisherSnedecor::new(df, df2).map_err(|e| Error::Numerical(e.to_string()))?;
    let p_value = fisher.sf(f_stat).clamp(0.0, 1.0);
    Ok(TestReport {
        t_raw: t2,
        center: 0.0,
        scale: 1.0,
        z: normal_quantile(p_value),
        p_value,
        reject: p_value <= alpha,
        method: TestMethod::Hotelling,
        alpha,
    })
}
