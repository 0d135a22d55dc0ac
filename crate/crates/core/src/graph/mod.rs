//! Graphs, periodic lattices and exhaustions by finite subgraphs.

mod exhaustion;
mod io;
mod lattice;
mod simple;

pub use exhaustion::{
    ball, ball_within, make_defected, BoundarySets, DefectReport, DefectRule, DefectedLattice, Exhaustion,
    FiniteBase, FolnerReport, LocalGraph, Stage, StageRule,
};
pub use io::{parse_graph, parse_potential};
pub use lattice::{make_zd_lattice, Boundary, Bridge, PeriodicLattice, Site, Truncation};
pub use simple::Graph;
