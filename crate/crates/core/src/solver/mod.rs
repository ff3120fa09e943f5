//! Embedded LP solving, branch and bound, and the successive-linearization heuristic.
