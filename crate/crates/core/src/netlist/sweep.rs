use rayon::prelude::*;

use super::{evaluate, validate, HomodyneSummary, JointSummary, Netlist};
use crate::error::{Error, Result};

/// Summary of one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub homodynes: Vec<HomodyneSummary>,
    pub correlations: Vec<JointSummary>,
}

/// `count` evenly spaced points from `start` to `stop` inclusive. A single
/// point sits at `start`.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (count - 1) as f64;
            (0..count)
                .map(|k| if k == count - 1 { stop } else { start + step * k as f64 })
                .collect()
        }
    }
}

/// Re-evaluates `netlist` with the numeric parameter at `path` set to each
/// value. Points run in parallel; rows keep the order of `values`.
pub fn sweep(netlist: &Netlist, path: &str, values: &[f64]) -> Result<Vec<SweepRow>> {
    if !netlist.is_numeric_param(path)? {
        return Err(Error::BadParameterValue {
            path: path.to_string(),
            value: "(non-numeric parameter)".into(),
        });
    }
    values
        .par_iter()
        .map(|&value| {
            let mut net = netlist.clone();
            net.set_number(path, value)?;
            let checked = validate(&net)?;
            let res = evaluate(&net, &checked)?;
            Ok(SweepRow {
                value,
                homodynes: res.homodynes,
                correlations: res.correlations,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{preset_fig1a, Fig1bConfig};
    use crate::opo::EfficiencyChain;

    #[test]
    fn linspace_endpoints() {
        assert!(linspace(0.0, 1.0, 0).is_empty());
        assert_eq!(linspace(2.0, 5.0, 1), vec![2.0]);
        let v = linspace(0.0, 170.0, 18);
        assert_eq!(v.len(), 18);
        assert_eq!(v[10], 100.0);
        assert_eq!(v[17], 170.0);
    }

    #[test]
    fn empty_values_give_empty_table() {
        let net = preset_fig1a(0.1, &EfficiencyChain::reference());
        assert!(sweep(&net, "sources.sl1.pump_mw", &[]).unwrap().is_empty());
    }

    #[test]
    fn bad_paths_are_rejected() {
        let net = preset_fig1a(0.1, &EfficiencyChain::reference());
        assert!(matches!(
            sweep(&net, "sources.nope.pump_mw", &[1.0]),
            Err(Error::UnknownPath(_))
        ));
        assert!(matches!(
            sweep(&net, "elements.prop.in", &[1.0]),
            Err(Error::BadParameterValue { .. })
        ));
    }

    #[test]
    fn theta12_sweep_lowers_delta() {
        let net = Fig1bConfig::default().build();
        let rows = sweep(&net, "elements.theta12.phase_deg", &linspace(0.0, 90.0, 10)).unwrap();
        let d: Vec<f64> = rows
            .iter()
            .map(|r| r.correlations[0].correlation.delta_sq)
            .collect();
        assert!(d[0] >= 1.0);
        assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
    }
}
