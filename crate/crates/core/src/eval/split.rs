use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::solver::SparseObservations;
use crate::synthgen::rng_for;

/// Disjoint train and test parts of one observation set.
#[derive(Debug, Clone)]
pub struct EvalSplit {
    pub train: SparseObservations,
    pub test: SparseObservations,
}

/// Seeded uniform partition: `round(test_fraction · |Ω|)` entries go to test.
pub fn make_split(obs: &SparseObservations, test_fraction: f64, seed: u64) -> Result<EvalSplit> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::param(
            "test_fraction",
            format!("must lie in (0, 1), got {test_fraction}"),
        ));
    }
    let n_test = (test_fraction * obs.len() as f64).round() as usize;
    if n_test == 0 {
        return Err(Error::Empty(format!(
            "test fraction {test_fraction} of {} entries leaves an empty test set",
            obs.len()
        )));
    }
    if n_test >= obs.len() {
        return Err(Error::Empty("test set would swallow every entry".into()));
    }
    let mut order: Vec<usize> = (0..obs.len()).collect();
    order.shuffle(&mut rng_for(seed, 10));
    let (test, train) = order.split_at(n_test);
    Ok(EvalSplit {
        train: obs.select(train),
        test: obs.select(test),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn obs100() -> SparseObservations {
        SparseObservations::fully_observed(&DMatrix::from_fn(10, 10, |i, j| (i * 10 + j) as f64))
    }

    #[test]
    fn thirty_five_percent() {
        let s = make_split(&obs100(), 0.35, 1).unwrap();
        assert_eq!(s.test.len(), 35);
        assert_eq!(s.train.len(), 65);
    }

    #[test]
    fn deterministic_and_partitioning() {
        let o = obs100();
        let a = make_split(&o, 0.35, 7).unwrap();
        let b = make_split(&o, 0.35, 7).unwrap();
        assert_eq!(a.test, b.test);
        assert!(a.test.entries().iter().all(|e| !a.train.contains(e.0, e.1)));
        let mut all: Vec<_> = a.train.entries().iter().chain(a.test.entries()).copied().collect();
        all.sort_by_key(|e| (e.0, e.1));
        assert_eq!(all, o.entries());
    }

    #[test]
    fn empty_test_rejected() {
        let o = SparseObservations::new(2, 2, vec![(0, 0, 1.0), (1, 1, 1.0)]).unwrap();
        assert!(make_split(&o, 0.1, 0).is_err());
        assert!(make_split(&o, 1.0, 0).is_err());
    }
}
