//! Model export, plan and report serialization.
