//! Weighted empirical distribution functions as right-continuous step functions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

/// A step CDF over sorted support points.
///
/// `points[k] = (t_k, G(t_k))` with strictly increasing `t_k`, nondecreasing
/// `G`, and `G` of the last point equal to exactly `1.0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedEcdf {
    points: Vec<(f64, f64)>,
    normalizer: f64,
}

impl WeightedEcdf {
    /// Builds the CDF of `values` with positive `weights`. Ties are merged.
    ///
    /// `normalizer` is stored as given (for the logarithmic ECDF it is the
    /// harmonic sum); the cumulative values are divided by the total weight
    /// summed in sorted order, so the final step is exactly one.
    pub fn from_weighted(values: &[f64], weights: &[f64], normalizer: f64) -> Result<Self> {
        if values.len() != weights.len() {
            return Err(Error::input(format!(
                "{} values but {} weights",
                values.len(),
                weights.len()
            )));
        }
        if values.is_empty() {
            return Err(Error::input("cannot build an ECDF from no values"));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::input(format!("non-finite value {v} in ECDF input")));
        }
        if weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::input("ECDF weights must be positive and finite"));
        }
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));

        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(values.len());
        let mut acc = CompensatedSum::new();
        for &k in &order {
            acc.add(weights[k]);
            match merged.last_mut() {
                Some(last) if last.0 == values[k] => last.1 = acc.value(),
                _ => merged.push((values[k], acc.value())),
            }
        }
        let total = acc.value();
        for p in &mut merged {
            p.1 /= total;
        }
        merged.last_mut().unwrap().1 = 1.0;
        Ok(Self {
            points: merged,
            normalizer,
        })
    }

    /// Equal-weight ECDF; the normalizer is the sample count.
    pub fn from_samples(values: &[f64]) -> Result<Self> {
        let w = vec![1.0; values.len()];
        Self::from_weighted(values, &w, values.len() as f64)
    }

    /// Reassembles an ECDF from stored `(t, G)` rows.
    pub fn from_points(points: Vec<(f64, f64)>, normalizer: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::input("ECDF has no points"));
        }
        for w in points.windows(2) {
            if !(w[0].0 < w[1].0) || w[0].1 > w[1].1 {
                return Err(Error::input(
                    "ECDF points must be strictly increasing in t and nondecreasing in G",
                ));
            }
        }
        if points.iter().any(|p| !(0.0..=1.0).contains(&p.1)) {
            return Err(Error::input("ECDF values must lie in [0, 1]"));
        }
        Ok(Self { points, normalizer })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `G(t)`: total weight at or below `t`.
    pub fn eval(&self, t: f64) -> f64 {
        let idx = self.points.partition_point(|p| p.0 <= t);
        if idx == 0 {
            0.0
        } else {
            self.points[idx - 1].1
        }
    }

    /// Smallest support point `t` with `G(t) >= level`.
    pub fn quantile(&self, level: f64) -> Result<f64> {
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::domain(format!("quantile level must lie in (0, 1), got {level}")));
        }
        let idx = self.points.partition_point(|p| p.1 < level);
        Ok(self.points[idx.min(self.points.len() - 1)].0)
    }

    /// `sup_t |G(t) - H(t)|`, attained at a support point of either function.
    pub fn sup_distance(&self, other: &WeightedEcdf) -> f64 {
        self.points
            .iter()
            .chain(other.points.iter())
            .map(|&(t, _)| (self.eval(t) - other.eval(t)).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ties_are_merged() {
        let e = WeightedEcdf::from_samples(&[1.0, 2.0, 1.0, 3.0]).unwrap();
        assert_eq!(e.points(), &[(1.0, 0.5), (2.0, 0.75), (3.0, 1.0)]);
        assert_eq!(e.eval(0.5), 0.0);
        assert_eq!(e.eval(1.0), 0.5);
        assert_eq!(e.eval(2.5), 0.75);
        assert_eq!(e.quantile(0.5).unwrap(), 1.0);
        assert_eq!(e.quantile(0.51).unwrap(), 2.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(WeightedEcdf::from_samples(&[]).is_err());
        assert!(WeightedEcdf::from_samples(&[f64::NAN]).is_err());
        assert!(WeightedEcdf::from_weighted(&[1.0], &[0.0], 1.0).is_err());
        assert!(WeightedEcdf::from_weighted(&[1.0], &[1.0, 2.0], 1.0).is_err());
        let e = WeightedEcdf::from_samples(&[1.0]).unwrap();
        assert!(e.quantile(0.0).is_err());
        assert!(e.quantile(1.0).is_err());
        assert!(WeightedEcdf::from_points(vec![(1.0, 0.5), (1.0, 1.0)], 1.0).is_err());
    }

    #[test]
    fn sup_distance_is_symmetric_and_zero_on_self() {
        let a = WeightedEcdf::from_samples(&[0.0, 1.0, 2.0]).unwrap();
        let b = WeightedEcdf::from_samples(&[0.5, 1.5]).unwrap();
        assert_eq!(a.sup_distance(&a), 0.0);
        assert_eq!(a.sup_distance(&b), b.sup_distance(&a));
        assert!((a.sup_distance(&b) - 1.0 / 3.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn valid_cdf_and_galois(
            values in prop::collection::vec(-1e6f64..1e6, 1..200),
            seed_weights in prop::collection::vec(1e-3f64..10.0, 200),
        ) {
            let w = &seed_weights[..values.len()];
            let e = WeightedEcdf::from_weighted(&values, w, 1.0).unwrap();
            let pts = e.points();
            prop_assert_eq!(pts.last().unwrap().1, 1.0);
            prop_assert!(pts.windows(2).all(|p| p[0].0 < p[1].0 && p[0].1 <= p[1].1));
            prop_assert!(pts[0].1 > 0.0);
            for &t in &values {
                let g = e.eval(t);
                if g < 1.0 {
                    prop_assert!(e.quantile(g).unwrap() <= t);
                }
            }
        }
    }
}
