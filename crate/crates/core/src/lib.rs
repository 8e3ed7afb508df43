//! Binary multicast network coding with delay.
//!
//! Edges carry bits; coding coefficients are rational functions of the unit
//! delay operator `D` over GF(2). The compiler walks the flow paths of a
//! network, assigning each edge a local encoding so every sink keeps a
//! full-rank transfer matrix, and handles flow cycles and knots through
//! Mason's gain formula on the knot's line graph.

pub mod flow_graph;
pub mod gf2;
pub mod linalg;
pub mod mason;
pub mod life_star;
pub mod report;
pub mod random;
pub mod simulator;
