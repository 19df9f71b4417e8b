use super::report::{spread, ConvergenceReport, Verdict};
use super::{StudyConfig, POINCARE_BOUND};
use crate::error::{Error, Result};
use crate::fem::poincare_constant;

/// Discrete Poincaré constant of every level domain.
pub fn poincare_uniformity_study(study: &StudyConfig) -> Result<ConvergenceReport> {
    let mut report = ConvergenceReport::new("poincare uniformity", &["h", "nodes", "poincare_constant"]);
    for &m in &study.levels {
        let run = || -> Result<Vec<f64>> {
            let sys = study.system(m, study.sigma_scaling)?;
            Ok(vec![study.h(m)?, sys.mesh().num_nodes() as f64, poincare_constant(&sys)?])
        };
        let row = run().map_err(Error::at_level(m))?;
        report.push_row(m, row);
    }
    let sp = spread(&report.column("poincare_constant").expect("column"));
    report.verdicts.push(Verdict::new(
        "Poincare constants max/min across levels at most 2",
        sp <= POINCARE_BOUND,
        vec![("spread".into(), sp)],
    ));
    Ok(report)
}
