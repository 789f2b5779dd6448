//! Weighted-sum multi-criteria ranking of assessed pathways: min-max
//! normalization onto [0, 1] with 1 = best per declared direction,
//! equal-split weighted scores (higher is better), and a rank-stability
//! probe over explicit weight perturbations.

use serde::{Deserialize, Serialize};

use crate::criteria::CriteriaReport;
use crate::error::{Error, Result};

/// Which end of a criterion's raw range is best.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    LowerIsBetter,
    HigherIsBetter,
}

/// Default directions for [`CriteriaReport::FIELDS`]: the minimum is best
/// for every criterion except the rate subsidy level, which measures
/// assistance received.
pub const DIRECTIONS: [Direction; 16] = [
    Direction::LowerIsBetter,  // iuf
    Direction::LowerIsBetter,  // resource_adequacy_pct
    Direction::LowerIsBetter,  // infra_cost
    Direction::LowerIsBetter,  // retail_rate
    Direction::HigherIsBetter, // cea_level
    Direction::LowerIsBetter,  // subsidized_rate
    Direction::LowerIsBetter,  // annual_elec_cost_per_house
    Direction::LowerIsBetter,  // annual_heat_cost_per_house
    Direction::LowerIsBetter,  // total_energy_cost_per_house
    Direction::LowerIsBetter,  // saving_pct
    Direction::LowerIsBetter,  // co2e_power_t
    Direction::LowerIsBetter,  // co2e_heating_t
    Direction::LowerIsBetter,  // co2e_reduction_pct
    Direction::LowerIsBetter,  // pm25_ugm3
    Direction::LowerIsBetter,  // energy_burden_pct
    Direction::LowerIsBetter,  // epi_pct
];

/// Raw criteria matrix: one row per pathway, one column per criterion.
#[derive(Debug, Clone, Serialize)]
pub struct CriteriaMatrix {
    pub pathways: Vec<String>,
    pub criteria: Vec<String>,
    pub directions: Vec<Direction>,
    /// `values[p][c]`.
    pub values: Vec<Vec<f64>>,
    /// Default weights, one per criterion.
    pub weights: Vec<f64>,
}

impl CriteriaMatrix {
    /// Assemble from per-pathway reports with the standard 16 criteria,
    /// default directions, and equal unit weights.
    pub fn from_reports(names: &[String], reports: &[CriteriaReport]) -> Result<Self> {
        if names.len() != reports.len() {
            return Err(Error::LengthMismatch {
                weights: names.len(),
                criteria: reports.len(),
            });
        }
        if reports.len() < 2 {
            return Err(Error::TooFewPathways(reports.len()));
        }
        Ok(CriteriaMatrix {
            pathways: names.to_vec(),
            criteria: CriteriaReport::FIELDS.iter().map(|s| s.to_string()).collect(),
            directions: DIRECTIONS.to_vec(),
            values: reports.iter().map(|r| r.values().to_vec()).collect(),
            weights: vec![1.0; CriteriaReport::FIELDS.len()],
        })
    }

    fn check_shape(&self) -> Result<()> {
        let n_crit = self.criteria.len();
        if self.directions.len() != n_crit
            || self.weights.len() != n_crit
            || self.values.iter().any(|row| row.len() != n_crit)
        {
            return Err(Error::LengthMismatch {
                weights: self.directions.len(),
                criteria: n_crit,
            });
        }
        Ok(())
    }
}

/// Output of [`normalize`]: values in [0, 1] with 1 = best, plus the
/// columns that were constant across pathways (mapped to 1 everywhere,
/// carrying no discriminating power).
#[derive(Debug, Clone, Serialize)]
pub struct Normalized {
    pub values: Vec<Vec<f64>>,
    pub degenerate: Vec<usize>,
}

/// Min-max normalize each column: `|(C - C_worst) / (C_best - C_worst)|`
/// with best/worst taken per the declared direction, so the best pathway
/// reads 1 and the worst 0 on every criterion.
pub fn normalize(matrix: &CriteriaMatrix) -> Result<Normalized> {
    let n_path = matrix.values.len();
    if n_path < 2 {
        return Err(Error::TooFewPathways(n_path));
    }
    matrix.check_shape()?;

    let n_crit = matrix.criteria.len();
    let mut values = vec![vec![0.0; n_crit]; n_path];
    let mut degenerate = Vec::new();
    for c in 0..n_crit {
        let col: Vec<f64> = matrix.values.iter().map(|row| row[c]).collect();
        let min = col.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let span = max - min;
        if span.abs() < 1e-12 {
            degenerate.push(c);
            for p in 0..n_path {
                values[p][c] = 1.0;
            }
            continue;
        }
        let best_is_max = matrix.directions[c] == Direction::HigherIsBetter;
        for p in 0..n_path {
            values[p][c] = if best_is_max {
                (col[p] - min) / span
            } else {
                (max - col[p]) / span
            };
        }
    }
    Ok(Normalized { values, degenerate })
}

/// Weighted-sum transition scores `S_p = (1/N) * sum_c w_c * C_norm[p][c]`;
/// higher is better. Weights must be non-negative and are used as given, so
/// proportional weight sets scale scores without changing the ranking.
pub fn score(normalized: &Normalized, weights: &[f64]) -> Result<Vec<f64>> {
    let n_crit = normalized.values.first().map_or(0, Vec::len);
    if weights.len() != n_crit {
        return Err(Error::LengthMismatch {
            weights: weights.len(),
            criteria: n_crit,
        });
    }
    if weights.iter().any(|w| *w < 0.0) {
        return Err(Error::InvalidScenario(
            "criterion weights must be non-negative".into(),
        ));
    }
    Ok(normalized
        .values
        .iter()
        .map(|row| {
            row.iter().zip(weights).map(|(v, w)| v * w).sum::<f64>() / n_crit as f64
        })
        .collect())
}

/// Ranking (pathway indices, best first) from scores; ties keep input order.
pub fn rank(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}

/// One weight-perturbation probe result.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityProbe {
    pub weights: Vec<f64>,
    pub ranking: Vec<usize>,
    pub argmax_same: bool,
    pub ordering_same: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub base_ranking: Vec<usize>,
    pub probes: Vec<StabilityProbe>,
    /// True when every probe keeps the same top pathway.
    pub argmax_stable: bool,
    /// True when every probe reproduces the full ordering.
    pub ordering_stable: bool,
}

/// Re-score under each perturbed weight set and report whether the top
/// pathway and the full ordering survive.
pub fn rank_stability(
    normalized: &Normalized,
    base_weights: &[f64],
    perturbations: &[Vec<f64>],
) -> Result<StabilityReport> {
    let base_ranking = rank(&score(normalized, base_weights)?);
    let mut probes = Vec::with_capacity(perturbations.len());
    for w in perturbations {
        let ranking = rank(&score(normalized, w)?);
        probes.push(StabilityProbe {
            weights: w.clone(),
            argmax_same: ranking.first() == base_ranking.first(),
            ordering_same: ranking == base_ranking,
            ranking,
        });
    }
    Ok(StabilityReport {
        argmax_stable: probes.iter().all(|p| p.argmax_same),
        ordering_stable: probes.iter().all(|p| p.ordering_same),
        base_ranking,
        probes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(values: Vec<Vec<f64>>, directions: Vec<Direction>) -> CriteriaMatrix {
        let n_crit = directions.len();
        CriteriaMatrix {
            pathways: (0..values.len()).map(|i| format!("p{i}")).collect(),
            criteria: (0..n_crit).map(|i| format!("c{i}")).collect(),
            weights: vec![1.0; n_crit],
            directions,
            values,
        }
    }

    #[test]
    fn best_maps_to_one_worst_to_zero() {
        let m = matrix(
            vec![vec![10.0, 3.0], vec![20.0, 6.0], vec![30.0, 9.0]],
            vec![Direction::LowerIsBetter, Direction::HigherIsBetter],
        );
        let n = normalize(&m).unwrap();
        // Column 0 (lower best): 10 -> 1, 30 -> 0, midpoint -> 0.5.
        assert_eq!(n.values[0][0], 1.0);
        assert_eq!(n.values[2][0], 0.0);
        assert!((n.values[1][0] - 0.5).abs() < 1e-12);
        // Column 1 (higher best): 9 -> 1, 3 -> 0.
        assert_eq!(n.values[2][1], 1.0);
        assert_eq!(n.values[0][1], 0.0);
        assert!(n.degenerate.is_empty());
    }

    #[test]
    fn constant_column_is_degenerate_and_maps_to_one() {
        let m = matrix(
            vec![vec![5.0, 1.0], vec![5.0, 2.0]],
            vec![Direction::LowerIsBetter, Direction::LowerIsBetter],
        );
        let n = normalize(&m).unwrap();
        assert_eq!(n.degenerate, vec![0]);
        assert_eq!(n.values[0][0], 1.0);
        assert_eq!(n.values[1][0], 1.0);
    }

    #[test]
    fn single_pathway_cannot_be_normalized() {
        let m = matrix(vec![vec![1.0]], vec![Direction::LowerIsBetter]);
        assert!(matches!(normalize(&m), Err(Error::TooFewPathways(1))));
    }

    #[test]
    fn dominating_pathway_scores_one_under_unit_weights() {
        let m = matrix(
            vec![vec![1.0, 9.0], vec![4.0, 2.0]],
            vec![Direction::LowerIsBetter, Direction::HigherIsBetter],
        );
        let n = normalize(&m).unwrap();
        let s = score(&n, &[1.0, 1.0]).unwrap();
        assert_eq!(s[0], 1.0);
        assert_eq!(s[1], 0.0);
        assert_eq!(rank(&s), vec![0, 1]);
    }

    #[test]
    fn single_criterion_score_is_the_normalized_value() {
        let n = Normalized {
            values: vec![vec![0.25], vec![1.0]],
            degenerate: vec![],
        };
        let s = score(&n, &[1.0]).unwrap();
        assert_eq!(s, vec![0.25, 1.0]);
    }

    #[test]
    fn weights_are_validated() {
        let n = Normalized {
            values: vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            degenerate: vec![],
        };
        assert!(matches!(
            score(&n, &[1.0]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(score(&n, &[1.0, -0.1]).is_err());
    }

    #[test]
    fn proportional_weights_preserve_ranking_and_scale_scores() {
        let n = Normalized {
            values: vec![vec![0.2, 0.9], vec![0.7, 0.1], vec![0.5, 0.5]],
            degenerate: vec![],
        };
        let w1 = [1.0, 3.0];
        let w2 = [2.0, 6.0];
        let s1 = score(&n, &w1).unwrap();
        let s2 = score(&n, &w2).unwrap();
        assert_eq!(rank(&s1), rank(&s2));
        for (a, b) in s1.iter().zip(&s2) {
            assert!((2.0 * a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn ranking_is_descending_with_ties_in_input_order() {
        assert_eq!(rank(&[0.5, 0.5, 0.9]), vec![2, 0, 1]);
    }

    #[test]
    fn stability_distinguishes_robust_from_fragile() {
        let robust = Normalized {
            values: vec![vec![1.0, 1.0], vec![0.0, 0.0]],
            degenerate: vec![],
        };
        let probes = vec![vec![2.0, 1.0], vec![1.0, 2.0]];
        let r = rank_stability(&robust, &[1.0, 1.0], &probes).unwrap();
        assert!(r.argmax_stable && r.ordering_stable);

        // Each pathway wins one criterion outright: emphasis flips the order.
        let fragile = Normalized {
            values: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            degenerate: vec![],
        };
        let r = rank_stability(&fragile, &[1.0, 1.01], &probes).unwrap();
        assert!(!r.ordering_stable);
    }
}
