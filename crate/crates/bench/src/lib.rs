//! Shared fixtures for the criterion benchmarks.

use qguess::verify::{sample_joint, sample_pmf};
use qguess::{JointPmf, NEParams, Pmf, SourceFamily};

pub fn pmf64() -> Pmf {
    sample_pmf(400, 0, 64)
}

pub fn joint_8x4() -> JointPmf {
    sample_joint(401, 0, 8, 4)
}

pub fn joint_pair_4x2() -> (JointPmf, JointPmf) {
    (sample_joint(402, 0, 4, 2), sample_joint(403, 0, 4, 2))
}

pub fn small_family() -> SourceFamily {
    SourceFamily::new(vec![sample_joint(404, 0, 3, 1), sample_joint(405, 0, 3, 1)]).unwrap()
}

pub fn params(q: f64, rho: f64) -> NEParams {
    NEParams::new(q, rho).unwrap()
}
