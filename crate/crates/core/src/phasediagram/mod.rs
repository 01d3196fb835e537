//! Phase-diagram level analyses: grid sweeps over `(Δ̃, G)`, transitions
//! along slices, boundary continuation, the critical point and critical
//! exponents.

mod boundary;
mod critical;
mod grid;
mod slice;

pub use boundary::{boundary_function, trace_boundary, BoundaryKind, Polyline, TraceOptions, TraceStop};
pub use critical::{estimate_exponents, find_critical_point, ApproachSide, CriticalPoint, ExponentOptions, Exponents};
pub use grid::{
    evaluate_cell, sweep_grid, BranchRule, Cell, CellMeasures, GridSpec, LinRange, Measures, PhaseMap,
};
pub use slice::{slice_transitions, Slice, SliceOptions, TransitionEvent, TransitionKind};
