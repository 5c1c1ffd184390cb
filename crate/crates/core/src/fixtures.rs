//! Small hand-checked instances used by tests, benchmarks and self-tests.

use crate::format::parse_marked;
use crate::marking::MarkedGGraph;

/// Rose with two petals, trivial group, identity marking.
pub const R2: &str = "\
[graph]
basepoint = *
edge a : * -> *
edge b : * -> *
[marking]
x1 = a
x2 = b
";

/// The two-petal rose with its petals swapped by an involution.
pub const R2_SWAP: &str = "\
[graph]
basepoint = *
edge a : * -> *
edge b : * -> *
[group]
order = 2
gen t : a->b, b->a
[marking]
x1 = a
x2 = b
";

/// Theta graph: three edges from the basepoint to `v`, two of them swapped.
pub const THETA: &str = "\
[graph]
basepoint = *
vertex v
edge e1 : * -> v
edge e2 : * -> v
edge e3 : * -> v
[group]
order = 2
gen t : e2->e3, e3->e2
[marking]
x1 = e1 ~e2
x2 = e1 ~e3
";

/// Two-petal rose, trivial group, marking `x1 = a`, `x2 = b a`.
pub const R2W: &str = "\
[graph]
basepoint = *
edge a : * -> *
edge b : * -> *
[marking]
x1 = a
x2 = b a
";

pub fn r2() -> MarkedGGraph {
    parse_marked(R2).expect("fixture R2")
}

pub fn r2_swap() -> MarkedGGraph {
    parse_marked(R2_SWAP).expect("fixture R2-SWAP")
}

pub fn theta() -> MarkedGGraph {
    parse_marked(THETA).expect("fixture THETA")
}

pub fn r2w() -> MarkedGGraph {
    parse_marked(R2W).expect("fixture R2W")
}

pub fn all() -> Vec<(&'static str, MarkedGGraph)> {
    vec![
        ("FIX-R2", r2()),
        ("FIX-R2-SWAP", r2_swap()),
        ("FIX-THETA", theta()),
        ("FIX-R2W", r2w()),
    ]
}
