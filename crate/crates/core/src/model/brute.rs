use crate::error::Result;
use crate::model::{BayesianNetwork, Factor, Query, Role};

/// Default entry cap for the brute-force joint table.
pub const BRUTE_FORCE_CAP: u64 = 1 << 24;

/// The full joint distribution of a network, kept around so many queries can
/// be answered by selection and summation without recomputing it.
#[derive(Debug, Clone)]
pub struct BruteForce {
    joint: Factor,
}

impl BruteForce {
    pub fn new(net: &BayesianNetwork) -> Result<Self> {
        Self::with_cap(net, BRUTE_FORCE_CAP)
    }

    pub fn with_cap(net: &BayesianNetwork, cap: u64) -> Result<Self> {
        let cpts: Vec<&Factor> = net.cpts().iter().collect();
        Ok(BruteForce { joint: Factor::product(&cpts, cap)? })
    }

    pub fn joint(&self) -> &Factor {
        &self.joint
    }

    /// Selects the bound rows, then sums out every remaining non-free variable.
    pub fn answer(&self, q: &Query) -> Result<Factor> {
        let mut f = self.joint.clone();
        for (&v, &s) in &q.bound {
            f = f.reduce(v, s)?;
        }
        for &v in self.joint.scope().iter().rev() {
            if matches!(q.role(v), Role::Summed) {
                f = f.sum_out(v)?;
            }
        }
        Ok(f)
    }
}

/// Answers `q` by materialising the full joint table (test oracle).
pub fn joint_brute_force(net: &BayesianNetwork, q: &Query) -> Result<Factor> {
    q.check(net)?;
    BruteForce::new(net)?.answer(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::model::fixtures::survey;

    #[test]
    fn full_joint_normalises() {
        let net = survey();
        let all = Query::marginal(0..net.len());
        let f = joint_brute_force(&net, &all).unwrap();
        assert_eq!(f.len(), 3 * 2 * 2 * 2 * 2 * 3);
        assert!((f.total() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn cap_is_enforced() {
        let net = survey();
        let err = BruteForce::with_cap(&net, 100).unwrap_err();
        assert!(matches!(err, Error::SizeLimit { .. }));
    }

    #[test]
    fn travel_given_young_sums_to_prior() {
        let net = survey();
        let f = joint_brute_force(&net, &Query::new([5], [(0, 0)])).unwrap();
        assert_eq!(f.scope(), &[5]);
        assert!((f.total() - 0.3).abs() < 1e-12);
    }
}
