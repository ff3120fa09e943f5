//! Solver-agnostic algebraic model: variables with bounds and integrality,
//! constraints as linear + bilinear term lists, and a maximized objective.
//!
//! Only bilinear nonlinearity is representable. Fractional forms are
//! reformulated at build time through auxiliary volume variables, so the IR
//! stays closed under the envelope relaxations in [`crate::relax`].

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::schema::{BatchId, CapacityId, QualityId, StreamId, UnitId};

/// Symbol kind of a model variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    /// Inlet mass flow of a stream (consumption side).
    Fvi,
    /// Outlet mass flow of a stream (production side).
    Fvo,
    /// Disaggregated mass flow of a stream within a unit batch.
    Fvm,
    /// Tracked property value of a stream.
    Fq,
    /// Adjusted yield coefficient of a delta-base batch stream.
    Gamma,
    /// Mass flow added to inventory.
    Fvli,
    /// Mass flow taken from inventory.
    Fvlo,
    /// Inventory level at end of period.
    Level,
    /// Inventory-decrease indicator (binary).
    Flag,
    /// Volume flow of a stream within a unit batch.
    Vm,
    /// Volume flow of a stream.
    Vol,
    /// Objective variable.
    Profit,
    /// Auxiliary variable introduced by a relaxation.
    Aux,
}

impl VarKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VarKind::Fvi => "FVI",
            VarKind::Fvo => "FVO",
            VarKind::Fvm => "FVM",
            VarKind::Fq => "FQ",
            VarKind::Gamma => "GAMMA",
            VarKind::Fvli => "FVLI",
            VarKind::Fvlo => "FVLO",
            VarKind::Level => "L",
            VarKind::Flag => "X",
            VarKind::Vm => "VM",
            VarKind::Vol => "V",
            VarKind::Profit => "PROFIT",
            VarKind::Aux => "AUX",
        }
    }

    pub fn parse(s: &str) -> Option<VarKind> {
        Some(match s {
            "FVI" => VarKind::Fvi,
            "FVO" => VarKind::Fvo,
            "FVM" => VarKind::Fvm,
            "FQ" => VarKind::Fq,
            "GAMMA" => VarKind::Gamma,
            "FVLI" => VarKind::Fvli,
            "FVLO" => VarKind::Fvlo,
            "L" => VarKind::Level,
            "X" => VarKind::Flag,
            "VM" => VarKind::Vm,
            "V" => VarKind::Vol,
            "PROFIT" => VarKind::Profit,
            "AUX" => VarKind::Aux,
            _ => return None,
        })
    }
}

/// Index tuple of a variable. Unused dimensions stay `None`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct VarIndex {
    pub unit: Option<UnitId>,
    pub batch: Option<BatchId>,
    pub stream: Option<StreamId>,
    pub quality: Option<QualityId>,
    pub period: u32,
    /// Disambiguator for auxiliary variables.
    pub ordinal: Option<u32>,
}

impl VarIndex {
    pub fn stream(s: StreamId, t: u32) -> Self {
        VarIndex { stream: Some(s), period: t, ..Default::default() }
    }

    pub fn stream_quality(s: StreamId, q: QualityId, t: u32) -> Self {
        VarIndex { stream: Some(s), quality: Some(q), period: t, ..Default::default() }
    }

    pub fn batch_stream(u: UnitId, m: BatchId, s: StreamId, t: u32) -> Self {
        VarIndex { unit: Some(u), batch: Some(m), stream: Some(s), period: t, ..Default::default() }
    }

    pub fn ordinal(n: u32) -> Self {
        VarIndex { ordinal: Some(n), ..Default::default() }
    }
}

/// Handle to a registered variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub u32);

impl VarId {
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

/// Handle to a stored constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConId(pub u32);

impl ConId {
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone)]
pub struct VarDef {
    pub kind: VarKind,
    pub index: VarIndex,
    pub lo: f64,
    pub hi: f64,
    pub integer: bool,
    /// Set by `canonicalize` when the variable was substituted by a constant.
    pub substituted: Option<f64>,
}

/// Constraint sense.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Eq,
    Le,
    Ge,
}

impl Sense {
    pub fn as_str(self) -> &'static str {
        match self {
            Sense::Eq => "=",
            Sense::Le => "<=",
            Sense::Ge => ">=",
        }
    }
}

/// Equation family a constraint was generated from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// Stream inlet flow aggregated over batches.
    MaterialIn,
    /// Stream outlet flow aggregated over batches.
    MaterialOut,
    /// Per-batch in = out balance of a mixer.
    MixerBatch,
    /// Unit-level in = out balance of a splitter or blender.
    UnitBalance,
    /// Swing-cut mass output of a distillation batch.
    CduYield,
    /// Volume definition of a distillation output stream.
    CduVolume,
    /// Specific-gravity balance of a distillation output.
    CduSpg,
    /// Volume-based property balance of a distillation output.
    CduVolQuality,
    /// Weight-based property balance of a distillation output.
    CduWtQuality,
    /// Feed quality window of a distillation batch.
    CduFeedQuality,
    /// Plant-wide crude quality window.
    CrudeQuality,
    /// Fixed-yield proportionality of a process batch stream.
    FixedYield,
    /// Linear yield correction from feed properties.
    YieldAdjust,
    /// Bilinear yield balance of a delta-base batch stream.
    YieldBalance,
    /// Property transfer from feed to product.
    PropertyTransfer,
    /// Batch volume definition in a mixer.
    BatchVolume,
    /// Batch volume balance in a mixer.
    BatchVolumeBalance,
    /// Volume-based pooling of a mixer batch output.
    PoolVolQuality,
    /// Weight-based pooling of a mixer batch output.
    PoolWtQuality,
    /// Stream volume definition (virtual batches, blender inlets).
    StreamVolume,
    /// Aggregate specific-gravity window of a virtual batch.
    AggSpg,
    /// Aggregate volume-based property window of a virtual batch.
    AggVolQuality,
    /// Aggregate weight-based property window of a virtual batch.
    AggWtQuality,
    /// Component-ratio window on a unit feed.
    ComponentRatio,
    /// Splitter property copy.
    SplitQuality,
    /// Blend specific-gravity specification window.
    BlendSpg,
    /// Blend volume-based specification window.
    BlendVolQuality,
    /// Blend weight-based specification window.
    BlendWtQuality,
    /// Fixed-ratio component of a proportional blender.
    BlendRatio,
    /// Stream production + withdrawal = consumption + storage identity.
    StreamBalance,
    /// Inventory level recursion.
    InventoryLevel,
    /// Big-M switch on inventory withdrawal.
    InventoryOutFlag,
    /// Big-M switch on inventory addition.
    InventoryInFlag,
    /// Capacity window on summed inlet flows.
    CapacityIn,
    /// Capacity window on summed outlet flows.
    CapacityOut,
    /// Objective-defining row.
    Objective,
    /// Envelope rows of a relaxed bilinear term.
    Envelope,
    /// Digit-selection rows of a disaggregated factor.
    Digit,
    /// Anything else.
    Plumbing,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::MaterialIn => "material_in",
            Family::MaterialOut => "material_out",
            Family::MixerBatch => "mixer_batch",
            Family::UnitBalance => "unit_balance",
            Family::CduYield => "cdu_yield",
            Family::CduVolume => "cdu_volume",
            Family::CduSpg => "cdu_spg",
            Family::CduVolQuality => "cdu_vol_quality",
            Family::CduWtQuality => "cdu_wt_quality",
            Family::CduFeedQuality => "cdu_feed_quality",
            Family::CrudeQuality => "crude_quality",
            Family::FixedYield => "fixed_yield",
            Family::YieldAdjust => "yield_adjust",
            Family::YieldBalance => "yield_balance",
            Family::PropertyTransfer => "property_transfer",
            Family::BatchVolume => "batch_volume",
            Family::BatchVolumeBalance => "batch_volume_balance",
            Family::PoolVolQuality => "pool_vol_quality",
            Family::PoolWtQuality => "pool_wt_quality",
            Family::StreamVolume => "stream_volume",
            Family::AggSpg => "agg_spg",
            Family::AggVolQuality => "agg_vol_quality",
            Family::AggWtQuality => "agg_wt_quality",
            Family::ComponentRatio => "component_ratio",
            Family::SplitQuality => "split_quality",
            Family::BlendSpg => "blend_spg",
            Family::BlendVolQuality => "blend_vol_quality",
            Family::BlendWtQuality => "blend_wt_quality",
            Family::BlendRatio => "blend_ratio",
            Family::StreamBalance => "stream_balance",
            Family::InventoryLevel => "inventory_level",
            Family::InventoryOutFlag => "inventory_out_flag",
            Family::InventoryInFlag => "inventory_in_flag",
            Family::CapacityIn => "capacity_in",
            Family::CapacityOut => "capacity_out",
            Family::Objective => "objective",
            Family::Envelope => "envelope",
            Family::Digit => "digit",
            Family::Plumbing => "plumbing",
        }
    }
}

/// Which side of a two-sided window a row implements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WindowSide {
    Eq,
    Lower,
    Upper,
}

/// Provenance of a constraint: family plus the index tuple it was emitted for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ConTag {
    pub family: Family,
    pub unit: Option<UnitId>,
    pub batch: Option<BatchId>,
    pub stream: Option<StreamId>,
    pub quality: Option<QualityId>,
    pub capacity: Option<CapacityId>,
    pub period: u32,
    pub side: WindowSide,
}

impl ConTag {
    pub fn new(family: Family) -> Self {
        ConTag {
            family,
            unit: None,
            batch: None,
            stream: None,
            quality: None,
            capacity: None,
            period: 0,
            side: WindowSide::Eq,
        }
    }

    pub fn unit(mut self, u: UnitId) -> Self {
        self.unit = Some(u);
        self
    }
    pub fn batch(mut self, m: BatchId) -> Self {
        self.batch = Some(m);
        self
    }
    pub fn stream(mut self, s: StreamId) -> Self {
        self.stream = Some(s);
        self
    }
    pub fn quality(mut self, q: QualityId) -> Self {
        self.quality = Some(q);
        self
    }
    pub fn capacity(mut self, c: CapacityId) -> Self {
        self.capacity = Some(c);
        self
    }
    pub fn period(mut self, t: u32) -> Self {
        self.period = t;
        self
    }
    pub fn side(mut self, side: WindowSide) -> Self {
        self.side = side;
        self
    }
}

/// A constraint as linear + bilinear term lists with a constant right-hand side.
#[derive(Debug, Clone, Default)]
pub struct ConstraintExpr {
    pub linear: Vec<(f64, VarId)>,
    pub bilinear: Vec<(f64, VarId, VarId)>,
    pub rhs: f64,
    pub sense: Sense,
}

impl Default for Sense {
    fn default() -> Self {
        Sense::Eq
    }
}

impl ConstraintExpr {
    pub fn new(sense: Sense, rhs: f64) -> Self {
        ConstraintExpr { linear: Vec::new(), bilinear: Vec::new(), rhs, sense }
    }

    pub fn add_linear(&mut self, coeff: f64, var: VarId) {
        self.linear.push((coeff, var));
    }

    pub fn add_bilinear(&mut self, coeff: f64, a: VarId, b: VarId) {
        self.bilinear.push((coeff, a, b));
    }

    /// Fold constants, merge duplicate terms, drop zeros and order terms
    /// canonically (bilinear pairs stored with the smaller id first).
    pub fn canonicalize(&mut self) {
        for term in &mut self.bilinear {
            if term.1 > term.2 {
                std::mem::swap(&mut term.1, &mut term.2);
            }
        }
        self.linear.sort_by_key(|&(_, v)| v);
        self.bilinear.sort_by_key(|&(_, a, b)| (a, b));

        let mut lin: Vec<(f64, VarId)> = Vec::with_capacity(self.linear.len());
        for &(c, v) in &self.linear {
            match lin.last_mut() {
                Some(last) if last.1 == v => last.0 += c,
                _ => lin.push((c, v)),
            }
        }
        lin.retain(|&(c, _)| c != 0.0);
        self.linear = lin;

        let mut bil: Vec<(f64, VarId, VarId)> = Vec::with_capacity(self.bilinear.len());
        for &(c, a, b) in &self.bilinear {
            match bil.last_mut() {
                Some(last) if last.1 == a && last.2 == b => last.0 += c,
                _ => bil.push((c, a, b)),
            }
        }
        bil.retain(|&(c, _, _)| c != 0.0);
        self.bilinear = bil;
    }

    pub fn is_vacuous(&self) -> bool {
        self.linear.is_empty() && self.bilinear.is_empty()
    }

    /// Evaluate the left-hand side under a value assignment.
    pub fn eval(&self, value: impl Fn(VarId) -> f64) -> f64 {
        let mut acc = 0.0;
        for &(c, v) in &self.linear {
            acc += c * value(v);
        }
        for &(c, a, b) in &self.bilinear {
            acc += c * value(a) * value(b);
        }
        acc
    }
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub expr: ConstraintExpr,
    pub tag: ConTag,
    pub vacuous: bool,
}

/// Canonical model statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ModelStatistics {
    pub total_variables: usize,
    pub binary_variables: usize,
    pub total_constraints: usize,
    /// (constraint, variable) incidences where the variable appears in at
    /// least one bilinear term of that constraint.
    pub nonlinear_elements: usize,
    pub vacuous_constraints: usize,
}

impl fmt::Display for ModelStatistics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{}/{}/{}",
            self.total_variables,
            self.binary_variables,
            self.total_constraints,
            self.nonlinear_elements
        )
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("variable {kind:?} {index:?} already registered")]
    DuplicateVariable { kind: VarKind, index: VarIndex },
    #[error("constraint references unregistered variable id {0:?}")]
    UnknownVariable(VarId),
    #[error("variable bounds reversed: {lo} > {hi}")]
    ReversedBounds { lo: f64, hi: f64 },
}

/// Variable table, constraint list and maximized objective.
#[derive(Debug, Clone, Default)]
pub struct AlgebraicModel {
    vars: Vec<VarDef>,
    lookup: HashMap<(VarKind, VarIndex), VarId>,
    cons: Vec<Constraint>,
    /// Objective variable; the objective is `maximize` this variable, defined
    /// through a row of family [`Family::Objective`].
    pub objective_var: Option<VarId>,
}

impl AlgebraicModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_variable(
        &mut self,
        kind: VarKind,
        index: VarIndex,
        lo: f64,
        hi: f64,
        integer: bool,
    ) -> Result<VarId, ModelError> {
        if lo > hi {
            return Err(ModelError::ReversedBounds { lo, hi });
        }
        if self.lookup.contains_key(&(kind, index)) {
            return Err(ModelError::DuplicateVariable { kind, index });
        }
        let id = VarId(self.vars.len() as u32);
        self.vars.push(VarDef { kind, index, lo, hi, integer, substituted: None });
        self.lookup.insert((kind, index), id);
        Ok(id)
    }

    /// Look up a variable, registering it on first use.
    pub fn intern(
        &mut self,
        kind: VarKind,
        index: VarIndex,
        lo: f64,
        hi: f64,
        integer: bool,
    ) -> Result<VarId, ModelError> {
        if let Some(&id) = self.lookup.get(&(kind, index)) {
            return Ok(id);
        }
        self.add_variable(kind, index, lo, hi, integer)
    }

    pub fn find(&self, kind: VarKind, index: VarIndex) -> Option<VarId> {
        self.lookup.get(&(kind, index)).copied()
    }

    pub fn add_constraint(&mut self, mut expr: ConstraintExpr, tag: ConTag) -> Result<ConId, ModelError> {
        for &(_, v) in &expr.linear {
            if v.idx() >= self.vars.len() {
                return Err(ModelError::UnknownVariable(v));
            }
        }
        for &(_, a, b) in &expr.bilinear {
            if a.idx() >= self.vars.len() {
                return Err(ModelError::UnknownVariable(a));
            }
            if b.idx() >= self.vars.len() {
                return Err(ModelError::UnknownVariable(b));
            }
        }
        expr.canonicalize();
        let vacuous = expr.is_vacuous();
        let id = ConId(self.cons.len() as u32);
        self.cons.push(Constraint { expr, tag, vacuous });
        Ok(id)
    }

    pub fn var(&self, id: VarId) -> &VarDef {
        &self.vars[id.idx()]
    }

    pub fn var_mut(&mut self, id: VarId) -> &mut VarDef {
        &mut self.vars[id.idx()]
    }

    pub fn vars(&self) -> &[VarDef] {
        &self.vars
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn constraint(&self, id: ConId) -> &Constraint {
        &self.cons[id.idx()]
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.cons
    }

    pub fn num_constraints(&self) -> usize {
        self.cons.len()
    }

    /// Pin a variable to a constant; the next `canonicalize` substitutes it
    /// out of every constraint.
    pub fn pin_variable(&mut self, id: VarId, value: f64) {
        let v = &mut self.vars[id.idx()];
        v.lo = value;
        v.hi = value;
        v.substituted = Some(value);
    }

    /// Substitute pinned variables, fold and order all terms, and re-flag
    /// vacuous rows. Idempotent.
    pub fn canonicalize(&mut self) {
        let subst: Vec<Option<f64>> = self.vars.iter().map(|v| v.substituted).collect();
        for con in &mut self.cons {
            let expr = &mut con.expr;
            let mut folded = ConstraintExpr::new(expr.sense, expr.rhs);
            for &(c, v) in &expr.linear {
                match subst[v.idx()] {
                    Some(val) => folded.rhs -= c * val,
                    None => folded.add_linear(c, v),
                }
            }
            for &(c, a, b) in &expr.bilinear {
                match (subst[a.idx()], subst[b.idx()]) {
                    (Some(x), Some(y)) => folded.rhs -= c * x * y,
                    (Some(x), None) => folded.add_linear(c * x, b),
                    (None, Some(y)) => folded.add_linear(c * y, a),
                    (None, None) => folded.add_bilinear(c, a, b),
                }
            }
            folded.canonicalize();
            con.vacuous = folded.is_vacuous();
            con.expr = folded;
        }
    }

    /// Whether the model has any bilinear term.
    pub fn is_linear(&self) -> bool {
        self.cons.iter().all(|c| c.expr.bilinear.is_empty())
    }

    pub fn statistics(&self) -> ModelStatistics {
        let total_variables = self.vars.iter().filter(|v| v.substituted.is_none()).count();
        let binary_variables = self
            .vars
            .iter()
            .filter(|v| v.substituted.is_none() && v.integer)
            .count();
        let total_constraints = self.cons.len();
        let vacuous_constraints = self.cons.iter().filter(|c| c.vacuous).count();

        let mut nonlinear_elements = 0usize;
        let mut seen: Vec<u32> = Vec::new();
        for con in &self.cons {
            seen.clear();
            for &(_, a, b) in &con.expr.bilinear {
                seen.push(a.0);
                seen.push(b.0);
            }
            seen.sort_unstable();
            seen.dedup();
            nonlinear_elements += seen.len();
        }

        ModelStatistics {
            total_variables,
            binary_variables,
            total_constraints,
            nonlinear_elements,
            vacuous_constraints,
        }
    }

    /// Human-readable variable name, used for diagnostics when no instance
    /// name table is at hand.
    pub fn describe_var(&self, id: VarId) -> String {
        let v = &self.vars[id.idx()];
        let mut s = v.kind.as_str().to_string();
        let ix = &v.index;
        if let Some(u) = ix.unit {
            s.push_str(&format!("_u{}", u.0));
        }
        if let Some(m) = ix.batch {
            s.push_str(&format!("_m{}", m.0));
        }
        if let Some(st) = ix.stream {
            s.push_str(&format!("_s{}", st.0));
        }
        if let Some(q) = ix.quality {
            s.push_str(&format!("_q{}", q.0));
        }
        if let Some(n) = ix.ordinal {
            s.push_str(&format!("_{}", n));
        }
        s.push_str(&format!("_t{}", ix.period));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (AlgebraicModel, VarId, VarId) {
        let mut m = AlgebraicModel::new();
        let x = m
            .add_variable(VarKind::Fvi, VarIndex::stream(StreamId(0), 0), 0.0, 10.0, false)
            .unwrap();
        let y = m
            .add_variable(VarKind::Fvi, VarIndex::stream(StreamId(1), 0), 0.0, 10.0, false)
            .unwrap();
        (m, x, y)
    }

    #[test]
    fn duplicate_variable_rejected() {
        let (mut m, _, _) = toy();
        let err = m.add_variable(VarKind::Fvi, VarIndex::stream(StreamId(0), 0), 0.0, 1.0, false);
        assert!(matches!(err, Err(ModelError::DuplicateVariable { .. })));
    }

    #[test]
    fn binary_flag_bounds() {
        let mut m = AlgebraicModel::new();
        let x = m
            .add_variable(VarKind::Flag, VarIndex::stream(StreamId(3), 1), 0.0, 1.0, true)
            .unwrap();
        let def = m.var(x);
        assert!(def.integer);
        assert_eq!((def.lo, def.hi), (0.0, 1.0));
    }

    #[test]
    fn unknown_variable_rejected() {
        let (mut m, x, _) = toy();
        let mut e = ConstraintExpr::new(Sense::Le, 1.0);
        e.add_linear(1.0, x);
        e.add_linear(1.0, VarId(99));
        let err = m.add_constraint(e, ConTag::new(Family::Plumbing));
        assert!(matches!(err, Err(ModelError::UnknownVariable(_))));
    }

    #[test]
    fn vacuous_constant_row_accepted_and_flagged() {
        let (mut m, _, _) = toy();
        let e = ConstraintExpr::new(Sense::Eq, 0.0);
        let id = m.add_constraint(e, ConTag::new(Family::Plumbing)).unwrap();
        assert!(m.constraint(id).vacuous);
        assert_eq!(m.statistics().vacuous_constraints, 1);
    }

    #[test]
    fn zero_coefficient_dropped() {
        let (mut m, x, y) = toy();
        let mut e = ConstraintExpr::new(Sense::Eq, 1.0);
        e.add_linear(0.0, x);
        e.add_linear(1.0, y);
        let id = m.add_constraint(e, ConTag::new(Family::Plumbing)).unwrap();
        assert_eq!(m.constraint(id).expr.linear, vec![(1.0, y)]);
    }

    #[test]
    fn bilinear_pairs_canonically_ordered_and_merged() {
        let (mut m, x, y) = toy();
        let mut e = ConstraintExpr::new(Sense::Eq, 0.0);
        e.add_bilinear(1.0, y, x);
        e.add_bilinear(2.0, x, y);
        let id = m.add_constraint(e, ConTag::new(Family::Plumbing)).unwrap();
        assert_eq!(m.constraint(id).expr.bilinear, vec![(3.0, x, y)]);
    }

    #[test]
    fn statistics_count_nonlinear_incidences_once_per_var() {
        let (mut m, x, y) = toy();
        let z = m
            .add_variable(VarKind::Fvi, VarIndex::stream(StreamId(2), 0), 0.0, 1.0, false)
            .unwrap();
        // x appears in two bilinear terms of the same row: one incidence.
        let mut e = ConstraintExpr::new(Sense::Eq, 0.0);
        e.add_bilinear(1.0, x, y);
        e.add_bilinear(1.0, x, z);
        e.add_linear(1.0, z);
        m.add_constraint(e, ConTag::new(Family::Plumbing)).unwrap();
        let st = m.statistics();
        assert_eq!(st.nonlinear_elements, 3);
        assert_eq!(st.total_variables, 3);
        assert_eq!(st.total_constraints, 1);
    }

    #[test]
    fn canonicalize_substitutes_pinned_variables() {
        let (mut m, x, y) = toy();
        let mut e = ConstraintExpr::new(Sense::Eq, 1.0);
        e.add_bilinear(2.0, x, y);
        e.add_linear(1.0, x);
        let id = m.add_constraint(e, ConTag::new(Family::Plumbing)).unwrap();
        m.pin_variable(x, 0.85);
        m.canonicalize();
        let c = &m.constraint(id).expr;
        assert!(c.bilinear.is_empty());
        assert_eq!(c.linear, vec![(2.0 * 0.85, y)]);
        assert!((c.rhs - (1.0 - 0.85)).abs() < 1e-12);
        assert_eq!(m.statistics().total_variables, 1);
    }

    #[test]
    fn canonicalize_is_idempotent() {
        let (mut m, x, y) = toy();
        let mut e = ConstraintExpr::new(Sense::Le, 4.0);
        e.add_linear(1.0, x);
        e.add_linear(-1.0, x);
        e.add_bilinear(1.5, y, x);
        m.add_constraint(e, ConTag::new(Family::Plumbing)).unwrap();
        m.canonicalize();
        let once: Vec<_> = m.constraints().iter().map(|c| c.expr.clone()).collect();
        m.canonicalize();
        for (a, b) in once.iter().zip(m.constraints()) {
            assert_eq!(a.linear, b.expr.linear);
            assert_eq!(a.bilinear, b.expr.bilinear);
            assert_eq!(a.rhs, b.expr.rhs);
        }
    }
}
