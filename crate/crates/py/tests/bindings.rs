use std::ffi::CString;

use meshflow_py::meshflow_py;
use pyo3::prelude::*;

fn run(script: &str) {
    pyo3::append_to_inittab!(meshflow_py);
    Python::initialize();
    Python::attach(|py| {
        let code = CString::new(script).unwrap();
        if let Err(e) = py.run(&code, None, None) {
            e.print(py);
            panic!("script failed");
        }
    });
}

#[test]
fn bindings_round_trip() {
    run(r#"
from fractions import Fraction
import meshflow

assert meshflow.throughput(Fraction(11, 2), Fraction(5, 2)) == Fraction(11, 5)
assert meshflow.format_mbps(Fraction(22, 7)) == "3.143"

a = [0, 1, 2, 3, 4, 5, 11]
b = [0, 6, 7, 8, 9, 10, 11]
g = meshflow.Topology(12, [(u, v, "11/2") for p in (a, b) for u, v in zip(p, p[1:])])
sol = meshflow.solve(g, 0, 11)
assert sol.throughput == Fraction(11, 4)
assert len(sol.paths) == 2
assert sol.validate(g) == [] and sol.check_literal(g) == []
assert meshflow.Solution.parse(sol.dump(), g).throughput == sol.throughput
assert meshflow.compare(g, 0, 11)[2] == Fraction(3, 2)
assert meshflow.mtm(g, 0, 11).medium_time_per_bit == Fraction(12, 11)

try:
    meshflow.solve(meshflow.Topology(3, [(0, 1, 11)]), 0, 2)
    raise AssertionError("no error")
except meshflow.NoPathError:
    pass
try:
    meshflow.Topology(2, [(0, 1, "fast")])
    raise AssertionError("no error")
except ValueError:
    pass
"#);
}
