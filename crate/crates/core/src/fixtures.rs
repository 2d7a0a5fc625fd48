//! Corpus files shared by the unit tests.

use crate::calculus::Theory;
use crate::dl::ReasonerConfig;
use crate::lang::{parse_kb, parse_program, Program};

pub const CAR_KB: &str = include_str!("../../../corpus/car_corrected.kb");
pub const CAR_VERBATIM_KB: &str = include_str!("../../../corpus/car_verbatim.kb");
pub const ADDWHEELS: &str = include_str!("../../../corpus/addwheels.prog");
pub const ASSEMBLY: &str = include_str!("../../../corpus/assembly_corrected.prog");

pub fn setup(prog: &str, kb: &str) -> (Program, Theory) {
    let p = parse_program(prog).unwrap();
    let t = Theory::new(&parse_kb(kb).unwrap(), &p, ReasonerConfig::default());
    (p, t)
}
