//! A value assignment to every model variable for all periods.

use std::collections::HashMap;

use crate::model::{AlgebraicModel, VarIndex, VarKind};

/// Plan values keyed by symbol kind and index tuple, independent of any
/// particular model's variable ids.
#[derive(Debug, Clone, Default)]
pub struct PlanSolution {
    pub values: HashMap<(VarKind, VarIndex), f64>,
    pub source: String,
}

impl PlanSolution {
    pub fn new(source: impl Into<String>) -> Self {
        PlanSolution { values: HashMap::new(), source: source.into() }
    }

    pub fn set(&mut self, kind: VarKind, index: VarIndex, value: f64) {
        self.values.insert((kind, index), value);
    }

    pub fn get(&self, kind: VarKind, index: VarIndex) -> Option<f64> {
        self.values.get(&(kind, index)).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Capture a model's primal vector as a plan.
    pub fn from_model_values(model: &AlgebraicModel, values: &[f64], source: &str) -> Self {
        let mut plan = PlanSolution::new(source);
        for (i, def) in model.vars().iter().enumerate() {
            if def.substituted.is_some() || def.kind == VarKind::Aux {
                continue;
            }
            plan.set(def.kind, def.index, values[i]);
        }
        plan
    }

    /// Dense vector aligned with the model's variable table. Missing natural
    /// variables are reported; the objective variable defaults to its
    /// defining row when absent.
    pub fn to_model_values(&self, model: &AlgebraicModel) -> Result<Vec<f64>, Vec<String>> {
        let mut out = vec![0.0; model.num_vars()];
        let mut missing = Vec::new();
        for (i, def) in model.vars().iter().enumerate() {
            if let Some(v) = def.substituted {
                out[i] = v;
                continue;
            }
            match self.get(def.kind, def.index) {
                Some(v) => out[i] = v,
                None if def.kind == VarKind::Profit => {}
                None => missing.push(model.describe_var(crate::model::VarId(i as u32))),
            }
        }
        if !missing.is_empty() {
            return Err(missing);
        }
        // Derive the objective variable from its defining row if absent.
        if let Some(pv) = model.objective_var {
            if self.get(VarKind::Profit, model.var(pv).index).is_none() {
                for con in model.constraints() {
                    if con.tag.family == crate::model::Family::Objective {
                        // row: profit - expr = 0  =>  profit = expr over others
                        let mut rest = con.expr.rhs;
                        let mut pcoeff = 0.0;
                        for &(c, v) in &con.expr.linear {
                            if v == pv {
                                pcoeff = c;
                            } else {
                                rest -= c * out[v.idx()];
                            }
                        }
                        for &(c, a, b) in &con.expr.bilinear {
                            rest -= c * out[a.idx()] * out[b.idx()];
                        }
                        if pcoeff != 0.0 {
                            out[pv.idx()] = rest / pcoeff;
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}
