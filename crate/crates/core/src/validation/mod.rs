//! Exact constraint checking, profit accounting, yield calibration and violation classification.
