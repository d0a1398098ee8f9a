//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use kurihara::eigen::{cut_eigenfunctional, EigenFunctional};
use kurihara::formdata::{CurveSpec, EigenData};
use kurihara::{ManinSpace, Sign};

/// y^2 = x^3 - 67x + 926, conductor 760.
pub fn curve_760() -> CurveSpec {
    CurveSpec::new("760.e1", 760, [0, 0, 0, -67, 926]).expect("nonsingular")
}

/// y^2 = x^3 - 1795500x - 926032500, conductor 10800.
pub fn curve_10800() -> CurveSpec {
    CurveSpec::new("10800.dl1", 10800, [0, 0, 0, -1_795_500, -926_032_500]).expect("nonsingular")
}

/// The plus-space functional of a curve mod p.
pub fn functional(curve: &CurveSpec, p: u64) -> EigenFunctional {
    let data = EigenData::from_curve(curve, p, 100).expect("eigendata");
    let space = ManinSpace::build(curve.conductor, p, Sign::Plus).expect("space");
    cut_eigenfunctional(Arc::new(space), &data, None, 1).expect("eigenline")
}
