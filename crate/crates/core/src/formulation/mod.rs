//! Generates every constraint family of the planning problem from an
//! instance into the bilinear IR.
//!
//! Fraction-form property equations are cleared to bilinear form through
//! auxiliary volume variables (`V`, `VM`), so a volume-based balance
//! `FQ' · FVO / FQ_spg = …` becomes the pair `V · FQ_spg = FVO` and
//! `FQ' · V = …`. The validator re-checks plans against the original
//! fractional forms.

use thiserror::Error;

use crate::model::*;
use crate::schema::*;

/// Build-time switches.
#[derive(Debug, Clone)]
pub struct BuildOptions {
    /// Restrict the horizon to the first `k` periods.
    pub periods: Option<u32>,
    /// Emit the inventory-decrease indicator and its big-M switch rows.
    pub inventory_binaries: bool,
    /// Model delta-base batches with adjusted yields; when off, every
    /// process batch degenerates to the fixed-yield form.
    pub delta_base: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { periods: None, inventory_binaries: true, delta_base: true }
    }
}

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("unit '{0}' is batched but declares no batch memberships")]
    MissingBatch(String),
    #[error("missing cut property for cut '{cut}' / crude '{crude}' / quality '{quality}'")]
    MissingCutProperty { cut: String, crude: String, quality: String },
    #[error("missing base yield for unit '{unit}' batch '{batch}' stream '{stream}'")]
    MissingBaseYield { unit: String, batch: String, stream: String },
    #[error("missing base property or step for unit '{unit}' batch '{batch}' quality '{quality}'")]
    MissingBaseProperty { unit: String, batch: String, quality: String },
    #[error("delta link references quality '{quality}' of stream '{stream}' that is neither tracked nor fixed")]
    DeltaQualityUnknown { stream: String, quality: String },
    #[error("stream '{stream}' lacks quality '{quality}' required for pooling")]
    MissingInletQuality { stream: String, quality: String },
    #[error("storable stream '{0}' has no maximum level; inventory switch undefined")]
    MissingMaxLevel(String),
    #[error("capacity '{0}' has no member streams")]
    EmptyCapacity(String),
    #[error("proportional blender '{unit}' missing ratio for inlet '{stream}'")]
    MissingBlendRatio { unit: String, stream: String },
    #[error("missing price for stream '{0}'")]
    MissingPrice(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Either a registered variable or a constant folded from a fixed property.
#[derive(Debug, Clone, Copy)]
enum Term {
    Var(VarId),
    Const(f64),
}

struct Emitter<'a> {
    inst: &'a BenchmarkInstance,
    opts: &'a BuildOptions,
    model: AlgebraicModel,
    periods: u32,
    spg: Option<QualityId>,
    /// Streams with an emitted volume definition, per period.
    vol_defined: std::collections::HashSet<(StreamId, u32)>,
}

const INF: f64 = f64::INFINITY;

pub fn build_model(
    inst: &BenchmarkInstance,
    opts: &BuildOptions,
) -> Result<AlgebraicModel, BuildError> {
    let periods = match opts.periods {
        Some(k) => k.min(inst.num_periods()),
        None => inst.num_periods(),
    };
    let mut e = Emitter {
        inst,
        opts,
        model: AlgebraicModel::new(),
        periods,
        spg: inst.spg(),
        vol_defined: Default::default(),
    };

    for t in 0..periods {
        e.emit_material_balance(t)?;
        e.emit_cdu_constraints(t)?;
        e.emit_process_unit_constraints(t)?;
        e.emit_mixing_constraints(t)?;
        e.emit_blender_constraints(t)?;
        e.emit_inventory_constraints(t)?;
        e.emit_capacity_and_bounds(t)?;
    }
    e.emit_objective()?;

    let mut model = e.model;
    model.canonicalize();
    Ok(model)
}

impl<'a> Emitter<'a> {
    // ----- variable access ----------------------------------------------

    fn fvi(&mut self, s: StreamId, t: u32) -> Result<VarId, BuildError> {
        let (mut lo, mut hi) = (0.0, INF);
        if self.inst.streams[s.idx()].role == StreamRole::Product {
            let (blo, bhi) = self.inst.fv_bound(s, t);
            lo = blo.unwrap_or(0.0);
            hi = bhi.unwrap_or(INF);
        }
        Ok(self.model.intern(VarKind::Fvi, VarIndex::stream(s, t), lo, hi, false)?)
    }

    fn fvo(&mut self, s: StreamId, t: u32) -> Result<VarId, BuildError> {
        let (mut lo, mut hi) = (0.0, INF);
        if self.inst.streams[s.idx()].role == StreamRole::Raw {
            let (blo, bhi) = self.inst.fv_bound(s, t);
            lo = blo.unwrap_or(0.0);
            hi = bhi.unwrap_or(INF);
        }
        Ok(self.model.intern(VarKind::Fvo, VarIndex::stream(s, t), lo, hi, false)?)
    }

    fn fvm(&mut self, u: UnitId, m: BatchId, s: StreamId, t: u32) -> Result<VarId, BuildError> {
        Ok(self
            .model
            .intern(VarKind::Fvm, VarIndex::batch_stream(u, m, s, t), 0.0, INF, false)?)
    }

    /// Tracked property variable or fixed constant.
    fn fq(&mut self, s: StreamId, q: QualityId, t: u32) -> Result<Term, BuildError> {
        if let Some(v) = self.inst.fixed_value(s, q) {
            return Ok(Term::Const(v));
        }
        if !self.inst.is_tracked(s, q) {
            return Err(BuildError::MissingInletQuality {
                stream: self.inst.stream_name(s).into(),
                quality: self.inst.quality_name(q).into(),
            });
        }
        let (lo, hi) = self.inst.fq_bound(s, q);
        Ok(Term::Var(self.model.intern(
            VarKind::Fq,
            VarIndex::stream_quality(s, q, t),
            lo.unwrap_or(0.0),
            hi.unwrap_or(INF),
            false,
        )?))
    }

    fn vol(&mut self, s: StreamId, t: u32) -> Result<VarId, BuildError> {
        Ok(self.model.intern(VarKind::Vol, VarIndex::stream(s, t), 0.0, INF, false)?)
    }

    fn vm(&mut self, u: UnitId, m: BatchId, s: StreamId, t: u32) -> Result<VarId, BuildError> {
        Ok(self
            .model
            .intern(VarKind::Vm, VarIndex::batch_stream(u, m, s, t), 0.0, INF, false)?)
    }

    fn gamma(&mut self, u: UnitId, m: BatchId, s: StreamId, t: u32) -> Result<VarId, BuildError> {
        Ok(self
            .model
            .intern(VarKind::Gamma, VarIndex::batch_stream(u, m, s, t), 0.0, INF, false)?)
    }

    fn add(&mut self, expr: ConstraintExpr, tag: ConTag) -> Result<ConId, BuildError> {
        Ok(self.model.add_constraint(expr, tag)?)
    }

    /// Add `expr · term` to a constraint, folding constants into a linear
    /// coefficient.
    fn push_product(expr: &mut ConstraintExpr, coeff: f64, var: VarId, term: Term) {
        match term {
            Term::Var(v) => expr.add_bilinear(coeff, var, v),
            Term::Const(c) => expr.add_linear(coeff * c, var),
        }
    }

    fn unit_kind(&self, u: UnitId) -> UnitKind {
        self.inst.units[u.idx()].kind
    }

    fn quality_class(&self, q: QualityId) -> QualityClass {
        self.inst.qualities[q.idx()].class
    }

    /// Delta-base machinery applies to this batch in the current build.
    fn delta_active(&self, u: UnitId, m: BatchId) -> bool {
        self.opts.delta_base && self.inst.is_delta_batch(u, m)
    }

    /// Virtual-batch windows guard the feed envelope of yield-calibrated
    /// units; they are emitted only while such a unit is modeled with
    /// adjusted yields (directly, or downstream of the declaring mixer).
    fn vbatch_active(&self, u: UnitId) -> bool {
        if !self.opts.delta_base {
            return false;
        }
        let serves_delta = |unit: UnitId| {
            self.inst
                .batches_of(unit)
                .any(|m| self.inst.is_delta_batch(unit, m))
        };
        if serves_delta(u) {
            return true;
        }
        if self.unit_kind(u) == UnitKind::Mixer {
            for &(uu, s) in &self.inst.ou {
                if uu != u {
                    continue;
                }
                for &(consumer, cs) in &self.inst.iu {
                    if cs == s && serves_delta(consumer) {
                        return true;
                    }
                }
            }
        }
        false
    }

    // ----- material balance ----------------------------------------------

    fn emit_material_balance(&mut self, t: u32) -> Result<(), BuildError> {
        for (ui, unit) in self.inst.units.iter().enumerate() {
            let u = UnitId(ui as u32);
            match unit.kind {
                k if k.is_batched() => {
                    if self.inst.batches_of(u).next().is_none() {
                        return Err(BuildError::MissingBatch(unit.name.clone()));
                    }
                    for s in self.inst.unit_inlets(u) {
                        let fvi = self.fvi(s, t)?;
                        let mut expr = ConstraintExpr::new(Sense::Eq, 0.0);
                        expr.add_linear(1.0, fvi);
                        for &(uu, m, ss) in &self.inst.im {
                            if uu == u && ss == s {
                                let fvm = self.fvm(u, m, s, t)?;
                                expr.add_linear(-1.0, fvm);
                            }
                        }
                        self.add(
                            expr,
                            ConTag::new(Family::MaterialIn).unit(u).stream(s).period(t),
                        )?;
                    }
                    for s in self.inst.unit_outlets(u) {
                        let fvo = self.fvo(s, t)?;
                        let mut expr = ConstraintExpr::new(Sense::Eq, 0.0);
                        expr.add_linear(1.0, fvo);
                        for &(uu, m, ss) in &self.inst.om {
                            if uu == u && ss == s {
                                let fvm = self.fvm(u, m, s, t)?;
                                expr.add_linear(-1.0, fvm);
                            }
                        }
                        self.add(
                            expr,
                            ConTag::new(Family::MaterialOut).unit(u).stream(s).period(t),
                        )?;
                    }
                    if unit.kind == UnitKind::Mixer {
                        for m in self.inst.batches_of(u).collect::<Vec<_>>() {
                            let mut expr = ConstraintExpr::new(Sense::Eq, 0.0);
                            for s in self.inst.batch_inlets(u, m) {
                                let fvm = self.fvm(u, m, s, t)?;
                                expr.add_linear(1.0, fvm);
                            }
                            for s in self.inst.batch_outlets(u, m) {
                                let fvm = self.fvm(u, m, s, t)?;
                                expr.add_linear(-1.0, fvm);
                            }
                            self.add(
                                expr,
                                ConTag::new(Family::MixerBatch).unit(u).batch(m).period(t),
                            )?;
                        }
                    }
                }
                UnitKind::Splitter | UnitKind::Blender => {
                    let mut expr = ConstraintExpr::new(Sense::Eq, 0.0);
                    for s in self.inst.unit_inlets(u) {
                        let fvi = self.fvi(s, t)?;
                        expr.add_linear(1.0, fvi);
                    }
                    for s in self.inst.unit_outlets(u) {
                        let fvo = self.fvo(s, t)?;
                        expr.add_linear(-1.0, fvo);
                    }
                    self.add(expr, ConTag::new(Family::UnitBalance).unit(u).period(t))?;
                }
                _ => unreachable!(),
            }
        }
        Ok(())
    }

    // ----- distillation ----------------------------------------------------

    fn cut_yield(&self, u: UnitId, m: BatchId, cut: StreamId, crude: StreamId) -> f64 {
        self.inst
            .yields
            .iter()
            .find(|y| y.unit == u && y.batch == m && y.cut == cut && y.crude == crude)
            .map(|y| y.value)
            .unwrap_or(0.0)
    }

    fn cut_prop(
        &self,
        u: UnitId,
        m: BatchId,
        cut: StreamId,
        crude: StreamId,
        q: QualityId,
    ) -> Result<f64, BuildError> {
        self.inst
            .cut_props
            .iter()
            .find(|p| p.unit == u && p.batch == m && p.cut == cut && p.crude == crude && p.quality == q)
            .map(|p| p.value)
            .ok_or_else(|| BuildError::MissingCutProperty {
                cut: self.inst.stream_name(cut).into(),
                crude: self.inst.stream_name(crude).into(),
                quality: self.inst.quality_name(q).into(),
            })
    }

    fn crude_prop(&self, u: UnitId, m: BatchId, s: StreamId, q: QualityId) -> Option<f64> {
        self.inst
            .crude_props
            .iter()
            .find(|p| p.unit == u && p.batch == m && p.stream == s && p.quality == q)
            .map(|p| p.value)
    }

    /// Swing pairs receiving into `cut` and donating from `cut`, per batch.
    fn swings_of(&self, u: UnitId, m: BatchId) -> Vec<&SwingCut> {
        self.inst
            .swing
            .iter()
            .filter(|sc| sc.unit == u && sc.batch == m)
            .collect()
    }

    fn emit_cdu_constraints(&mut self, t: u32) -> Result<(), BuildError> {
        let spg = self.spg;
        for (ui, unit) in self.inst.units.iter().enumerate() {
            if unit.kind != UnitKind::Cdu {
                continue;
            }
            let u = UnitId(ui as u32);

            // Mass output of each batch cut, with swing transfers.
            for m in self.inst.batches_of(u).collect::<Vec<_>>() {
                let inlets = self.inst.batch_inlets(u, m);
                let swings = self.swings_of(u, m).into_iter().cloned().collect::<Vec<_>>();
                for s in self.inst.batch_outlets(u, m) {
                    let mut expr = ConstraintExpr::new(Sense::Eq, 0.0);
                    let fvm_out = self.fvm(u, m, s, t)?;
                    expr.add_linear(1.0, fvm_out);
                    for &crude in &inlets {
                        let fvm_in = self.fvm(u, m, crude, t)?;
                        let mut coeff = -self.cut_yield(u, m, s, crude);
                        for sc in &swings {
                            if sc.receiver == s {
                                coeff -= self.cut_yield(u, m, sc.swing, crude) * sc.phi;
                            }
                            if sc.swing == s {
                                coeff += self.cut_yield(u, m, s, crude) * sc.phi;
                            }
                        }
                        expr.add_linear(coeff, fvm_in);
                    }
                    self.add(
                        expr,
                        ConTag::new(Family::CduYield).unit(u).batch(m).stream(s).period(t),
                    )?;
                }
            }

            // Cut properties. The fraction forms are cleared through the cut
            // volume variable.
            for s in self.inst.unit_outlets(u) {
                let tracked: Vec<QualityId> = self
                    .inst
                    .sq
                    .iter()
                    .filter(|&&(ss, _)| ss == s)
                    .map(|&(_, q)| q)
                    .collect();
                if tracked.is_empty() {
                    continue;
                }
                let spg_q = spg.filter(|&q| self.inst.is_tracked(s, q));
                let vol = match spg_q {
                    Some(_) => Some(self.vol(s, t)?),
                    None => None,
                };

                if let (Some(q_spg), Some(v)) = (spg_q, vol) {
                    // V * FQ_spg = FVO
                    let fq_spg = self.fq(s, q_spg, t)?;
                    let fvo = self.fvo(s, t)?;
                    let mut def = ConstraintExpr::new(Sense::Eq, 0.0);
                    Self::push_product(&mut def, 1.0, v, fq_spg);
                    def.add_linear(-1.0, fvo);
                    self.add(
                        def,
                        ConTag::new(Family::CduVolume).unit(u).stream(s).period(t),
                    )?;

                    // V = sum of cut volumes per crude
                    let mut expr = ConstraintExpr::new(Sense::Eq, 0.0);
                    expr.add_linear(1.0, v);
                    self.accumulate_cut_terms(&mut expr, u, s, t, |this, u, m, cut, crude| {
                        this.cut_prop(u, m, cut, crude, q_spg).map(|p| 1.0 / p)
                    })?;
                    self.add(
                        expr,
                        ConTag::new(Family::CduSpg).unit(u).stream(s).quality(q_spg).period(t),
                    )?;
                }

                for &q in &tracked {
                    match self.quality_class(q) {
                        QualityClass::Spg => {}
                        QualityClass::Volume => {
                            let q_spg = match spg_q {
                                Some(q_spg) => q_spg,
                                None => {
                                    return Err(BuildError::MissingInletQuality {
                                        stream: self.inst.stream_name(s).into(),
                                        quality: "SPG".into(),
                                    })
                                }
                            };
                            let v = vol.expect("volume variable exists with tracked spg");
                            let fq = self.fq(s, q, t)?;
                            let mut expr = ConstraintExpr::new(Sense::Eq, 0.0);
                            match fq {
                                Term::Var(fqv) => expr.add_bilinear(1.0, fqv, v),
                                Term::Const(_) => unreachable!("tracked pairs are not fixed"),
                            }
                            self.accumulate_cut_terms(
                                &mut expr,
                                u,
                                s,
                                t,
                                |this, u, m, cut, crude| {
                                    let pq = this.cut_prop(u, m, cut, crude, q)?;
                                    let ps = this.cut_prop(u, m, cut, crude, q_spg)?;
                                    Ok(pq / ps)
                                },
                            )?;
                            self.add(
                                expr,
                                ConTag::new(Family::CduVolQuality)
                                    .unit(u)
                                    .stream(s)
                                    .quality(q)
                                    .period(t),
                            )?;
                        }
                        QualityClass::Weight => {
                            let fq = self.fq(s, q, t)?;
                            let fvo = self.fvo(s, t)?;
                            let mut expr = ConstraintExpr::new(Sense::Eq, 0.0);
                            Self::push_product(&mut expr, 1.0, fvo, fq);
                            self.accumulate_cut_terms(
                                &mut expr,
                                u,
                                s,
                                t,
                                |this, u, m, cut, crude| this.cut_prop(u, m, cut, crude, q),
                            )?;
                            self.add(
                                expr,
                                ConTag::new(Family::CduWtQuality)
                                    .unit(u)
                                    .stream(s)
                                    .quality(q)
                                    .period(t),
                            )?;
                        }
                        QualityClass::Percent => {}
                    }
                }
            }

            // Feed quality windows per batch.
            for w in self.inst.cdumq.iter().filter(|w| w.unit == u).cloned().collect::<Vec<_>>() {
                self.emit_feed_window(u, &w, t)?;
            }
        }

        // Plant-wide crude windows.
        for w in self.inst.cru.clone() {
            self.emit_crude_window(&w, t)?;
        }
        Ok(())
    }

    /// Accumulate `-(y + swing adjustments) * weight * FVM_crude` terms over
    /// all batches producing `cut`, where `weight` is a per-(batch, cut,
    /// crude) factor (a property, its reciprocal, or a ratio).
    fn accumulate_cut_terms(
        &mut self,
        expr: &mut ConstraintExpr,
        u: UnitId,
        cut: StreamId,
        t: u32,
        weight: impl Fn(&Self, UnitId, BatchId, StreamId, StreamId) -> Result<f64, BuildError>,
    ) -> Result<(), BuildError> {
        for m in self.inst.batches_of(u).collect::<Vec<_>>() {
            if !self.inst.om.contains(&(u, m, cut)) {
                continue;
            }
            let inlets = self.inst.batch_inlets(u, m);
            let swings = self.swings_of(u, m).into_iter().cloned().collect::<Vec<_>>();
            for &crude in &inlets {
                let fvm_in = self.fvm(u, m, crude, t)?;
                let mut coeff = 0.0;
                let y_base = self.cut_yield(u, m, cut, crude);
                if y_base != 0.0 {
                    coeff += y_base * weight(self, u, m, cut, crude)?;
                }
                for sc in &swings {
                    if sc.receiver == cut {
                        let y_sw = self.cut_yield(u, m, sc.swing, crude);
                        if y_sw != 0.0 && sc.phi != 0.0 {
                            coeff += y_sw * sc.phi * weight(self, u, m, sc.swing, crude)?;
                        }
                    }
                    if sc.swing == cut {
                        let y_own = self.cut_yield(u, m, cut, crude);
                        if y_own != 0.0 && sc.phi != 0.0 {
                            coeff -= y_own * sc.phi * weight(self, u, m, cut, crude)?;
                        }
                    }
                }
                expr.add_linear(-coeff, fvm_in);
            }
        }
        Ok(())
    }

    fn emit_feed_window(&mut self, u: UnitId, w: &CduFeedWindow, t: u32) -> Result<(), BuildError> {
        let spg = self.spg;
        let m = w.batch;
        let inlets = self.inst.batch_inlets(u, m);
        let class = self.quality_class(w.quality);

        // Per-feed coefficients of the measured sum and the reference sum.
        let mut terms: Vec<(StreamId, f64, f64)> = Vec::new();
        for &s in &inlets {
            match class {
                QualityClass::Spg => {
                    if let Some(p) = self.crude_prop(u, m, s, w.quality) {
                        terms.push((s, 1.0, 1.0 / p));
                    }
                }
                QualityClass::Volume => {
                    let q_spg = match spg {
                        Some(q) => q,
                        None => continue,
                    };
                    if let (Some(pq), Some(ps)) =
                        (self.crude_prop(u, m, s, w.quality), self.crude_prop(u, m, s, q_spg))
                    {
                        terms.push((s, pq / ps, 1.0 / ps));
                    }
                }
                QualityClass::Weight | QualityClass::Percent => {
                    if let Some(p) = self.crude_prop(u, m, s, w.quality) {
                        terms.push((s, p, 1.0));
                    }
                }
            }
        }
        if terms.is_empty() {
            return Ok(());
        }
        for (bound, side, sense) in [
            (w.lo, WindowSide::Lower, Sense::Ge),
            (w.hi, WindowSide::Upper, Sense::Le),
        ] {
            let Some(b) = bound else { continue };
            let mut expr = ConstraintExpr::new(sense, 0.0);
            for &(s, meas, reference) in &terms {
                let fvm = self.fvm(u, m, s, t)?;
                expr.add_linear(meas - b * reference, fvm);
            }
            self.add(
                expr,
                ConTag::new(Family::CduFeedQuality)
                    .unit(u)
                    .batch(m)
                    .quality(w.quality)
                    .period(t)
                    .side(side),
            )?;
        }
        Ok(())
    }

    fn emit_crude_window(&mut self, w: &CrudeQualityWindow, t: u32) -> Result<(), BuildError> {
        let spg = self.spg;
        let class = self.quality_class(w.quality);
        let mut terms: Vec<(UnitId, BatchId, StreamId, f64, f64)> = Vec::new();
        for &(u, m, s) in &self.inst.im {
            if self.unit_kind(u) != UnitKind::Cdu {
                continue;
            }
            match class {
                QualityClass::Spg => {
                    if let Some(p) = self.crude_prop(u, m, s, w.quality) {
                        terms.push((u, m, s, 1.0, 1.0 / p));
                    }
                }
                QualityClass::Volume => {
                    let q_spg = match spg {
                        Some(q) => q,
                        None => continue,
                    };
                    if let (Some(pq), Some(ps)) =
                        (self.crude_prop(u, m, s, w.quality), self.crude_prop(u, m, s, q_spg))
                    {
                        terms.push((u, m, s, pq / ps, 1.0 / ps));
                    }
                }
                QualityClass::Weight | QualityClass::Percent => {
                    if let Some(p) = self.crude_prop(u, m, s, w.quality) {
                        terms.push((u, m, s, p, 1.0));
                    }
                }
            }
        }
        if terms.is_empty() {
            return Ok(());
        }
        for (bound, side, sense) in [
            (w.lo, WindowSide::Lower, Sense::Ge),
            (w.hi, WindowSide::Upper, Sense::Le),
        ] {
            let Some(b) = bound else { continue };
            let mut expr = ConstraintExpr::new(sense, 0.0);
            for &(u, m, s, meas, reference) in &terms {
                let fvm = self.fvm(u, m, s, t)?;
                expr.add_linear(meas - b * reference, fvm);
            }
            self.add(
                expr,
                ConTag::new(Family::CrudeQuality).quality(w.quality).period(t).side(side),
            )?;
        }
        Ok(())
    }

    // ----- process units ---------------------------------------------------

    fn base_yield_req(&self, u: UnitId, m: BatchId, s: StreamId) -> Result<f64, BuildError> {
        self.inst.base_yield(u, m, s).ok_or_else(|| BuildError::MissingBaseYield {
            unit: self.inst.unit_name(u).into(),
            batch: self.inst.batch_name(m).into(),
            stream: self.inst.stream_name(s).into(),
        })
    }

    fn emit_process_unit_constraints(&mut self, t: u32) -> Result<(), BuildError> {
        for (ui, unit) in self.inst.units.iter().enumerate() {
            if !unit.kind.is_process() {
                continue;
            }
            let u = UnitId(ui as u32);
            for m in self.inst.batches_of(u).collect::<Vec<_>>() {
                if self.delta_active(u, m) {
                    self.emit_delta_batch(u, m, t)?;
                } else {
                    self.emit_fixed_batch(u, m, t)?;
                }
            }
        }

        // Property transfers from feed to product.
        for qt in self.inst.qt.clone() {
            if self.inst.fixed_value(qt.dst, qt.quality).is_some() {
                continue;
            }
            let src = self.fq(qt.src, qt.quality, t)?;
            let dst = match self.fq(qt.dst, qt.quality, t)? {
                Term::Var(v) => v,
                Term::Const(_) => unreachable!("fixed destinations are skipped"),
            };
            let mut expr = ConstraintExpr::new(Sense::Eq, 0.0);
            expr.add_linear(1.0, dst);
            match src {
                Term::Var(v) => expr.add_linear(-qt.alpha, v),
                Term::Const(c) => expr.rhs += qt.alpha * c,
            }
            self.add(
                expr,
                ConTag::new(Family::PropertyTransfer)
                    .stream(qt.dst)
                    .quality(qt.quality)
                    .period(t),
            )?;
        }
        Ok(())
    }

    fn emit_fixed_batch(&mut self, u: UnitId, m: BatchId, t: u32) -> Result<(), BuildError> {
        let inlets = self.inst.batch_inlets(u, m);
        let outlets = self.inst.batch_outlets(u, m);
        let gamma_in_sum: f64 = inlets
            .iter()
            .map(|&s| self.base_yield_req(u, m, s))
            .sum::<Result<f64, _>>()?;
        for &s in inlets.iter().chain(outlets.iter()) {
            if inlets.len() == 1 && inlets[0] == s {
                continue; // proportionality of a single feed to itself
            }
            let g = self.base_yield_req(u, m, s)?;
            let fvm_s = self.fvm(u, m, s, t)?;
            let mut expr = ConstraintExpr::new(Sense::Eq, 0.0);
            expr.add_linear(gamma_in_sum, fvm_s);
            for &si in &inlets {
                let fvm_i = self.fvm(u, m, si, t)?;
                expr.add_linear(-g, fvm_i);
            }
            self.add(
                expr,
                ConTag::new(Family::FixedYield).unit(u).batch(m).stream(s).period(t),
            )?;
        }
        Ok(())
    }

    fn emit_delta_batch(&mut self, u: UnitId, m: BatchId, t: u32) -> Result<(), BuildError> {
        let inlets = self.inst.batch_inlets(u, m);
        let outlets = self.inst.batch_outlets(u, m);
        let links: Vec<DeltaLink> =
            self.inst.delta_links(u, m).into_iter().cloned().collect();

        // Pre-resolve per-link step ratios against base data.
        let mut link_data: Vec<(StreamId, QualityId, f64, f64)> = Vec::new();
        for l in &links {
            if !self.inst.is_tracked(l.stream, l.quality)
                && self.inst.fixed_value(l.stream, l.quality).is_none()
            {
                return Err(BuildError::DeltaQualityUnknown {
                    stream: self.inst.stream_name(l.stream).into(),
                    quality: self.inst.quality_name(l.quality).into(),
                });
            }
            let base = self
                .inst
                .base_props
                .iter()
                .find(|b| b.unit == u && b.batch == m && b.quality == l.quality)
                .map(|b| b.value);
            let step = self
                .inst
                .delta_steps
                .iter()
                .find(|d| d.unit == u && d.batch == m && d.quality == l.quality)
                .map(|d| d.value);
            let (base, step) = match (base, step) {
                (Some(b), Some(d)) if d != 0.0 => (b, d),
                _ => {
                    return Err(BuildError::MissingBaseProperty {
                        unit: self.inst.unit_name(u).into(),
                        batch: self.inst.batch_name(m).into(),
                        quality: self.inst.quality_name(l.quality).into(),
                    })
                }
            };
            link_data.push((l.stream, l.quality, base, step));
        }

        for &s in inlets.iter().chain(outlets.iter()) {
            let g = self.base_yield_req(u, m, s)?;
            let gv = self.gamma(u, m, s, t)?;
            let mut expr = ConstraintExpr::new(Sense::Eq, g);
            expr.add_linear(1.0, gv);
            for &(ls, lq, base, step) in &link_data {
                let sens = self
                    .inst
                    .yield_sens
                    .iter()
                    .find(|d| d.unit == u && d.batch == m && d.stream == s && d.quality == lq)
                    .map(|d| d.value)
                    .unwrap_or(0.0);
                if sens == 0.0 {
                    continue;
                }
                let ratio = sens / step;
                match self.fq(ls, lq, t)? {
                    Term::Var(fq) => {
                        expr.add_linear(-ratio, fq);
                        expr.rhs -= ratio * base;
                    }
                    Term::Const(c) => {
                        expr.rhs += ratio * (c - base);
                    }
                }
            }
            self.add(
                expr,
                ConTag::new(Family::YieldAdjust).unit(u).batch(m).stream(s).period(t),
            )?;
        }

        for &s in inlets.iter().chain(outlets.iter()) {
            if inlets.len() == 1 && inlets[0] == s {
                continue; // vacuous after clearing
            }
            let fvm_s = self.fvm(u, m, s, t)?;
            let g_s = self.gamma(u, m, s, t)?;
            let mut expr = ConstraintExpr::new(Sense::Eq, 0.0);
            for &si in &inlets {
                let g_i = self.gamma(u, m, si, t)?;
                expr.add_bilinear(1.0, fvm_s, g_i);
                let fvm_i = self.fvm(u, m, si, t)?;
                expr.add_bilinear(-1.0, g_s, fvm_i);
            }
            self.add(
                expr,
                ConTag::new(Family::YieldBalance).unit(u).batch(m).stream(s).period(t),
            )?;
        }
        Ok(())
    }

    // ----- mixers and virtual batches ---------------------------------------

    fn emit_mixing_constraints(&mut self, t: u32) -> Result<(), BuildError> {
        let spg = self.spg;
        for (ui, unit) in self.inst.units.iter().enumerate() {
            if unit.kind != UnitKind::Mixer {
                continue;
            }
            let u = UnitId(ui as u32);
            for m in self.inst.batches_of(u).collect::<Vec<_>>() {
                let inlets = self.inst.batch_inlets(u, m);
                let outlets = self.inst.batch_outlets(u, m);

                // Volume definitions wherever specific gravity is known.
                let mut has_vm = std::collections::HashSet::new();
                if let Some(q_spg) = spg {
                    for &s in inlets.iter().chain(outlets.iter()) {
                        let known = self.inst.is_tracked(s, q_spg)
                            || self.inst.fixed_value(s, q_spg).is_some();
                        if !known {
                            continue;
                        }
                        let vm = self.vm(u, m, s, t)?;
                        let fvm = self.fvm(u, m, s, t)?;
                        let fq = self.fq(s, q_spg, t)?;
                        let mut def = ConstraintExpr::new(Sense::Eq, 0.0);
                        Self::push_product(&mut def, 1.0, vm, fq);
                        def.add_linear(-1.0, fvm);
                        self.add(
                            def,
                            ConTag::new(Family::BatchVolume).unit(u).batch(m).stream(s).period(t),
                        )?;
                        has_vm.insert(s);
                    }
                }

                for &out in &outlets {
                    // Volume balance when every stream of the batch has a volume.
                    if has_vm.contains(&out) && inlets.iter().all(|s| has_vm.contains(s)) {
                        let mut expr = ConstraintExpr::new(Sense::Eq, 0.0);
                        let vm_out = self.vm(u, m, out, t)?;
                        expr.add_linear(1.0, vm_out);
                        for &s in &inlets {
                            let vm_in = self.vm(u, m, s, t)?;
                            expr.add_linear(-1.0, vm_in);
                        }
                        self.add(
                            expr,
                            ConTag::new(Family::BatchVolumeBalance)
                                .unit(u)
                                .batch(m)
                                .stream(out)
                                .period(t),
                        )?;
                    }

                    let tracked: Vec<QualityId> = self
                        .inst
                        .sq
                        .iter()
                        .filter(|&&(ss, _)| ss == out)
                        .map(|&(_, q)| q)
                        .collect();
                    for q in tracked {
                        match self.quality_class(q) {
                            QualityClass::Volume => {
                                let vm_out = self.vm(u, m, out, t)?;
                                let fq_out = self.fq(out, q, t)?;
                                let mut expr = ConstraintExpr::new(Sense::Eq, 0.0);
                                Self::push_product(&mut expr, 1.0, vm_out, fq_out);
                                for &s in &inlets {
                                    let vm_in = self.vm(u, m, s, t)?;
                                    let fq_in = self.fq(s, q, t)?;
                                    Self::push_product(&mut expr, -1.0, vm_in, fq_in);
                                }
                                self.add(
                                    expr,
                                    ConTag::new(Family::PoolVolQuality)
                                        .unit(u)
                                        .batch(m)
                                        .stream(out)
                                        .quality(q)
                                        .period(t),
                                )?;
                            }
                            QualityClass::Weight => {
                                let fvm_out = self.fvm(u, m, out, t)?;
                                let fq_out = self.fq(out, q, t)?;
                                let mut expr = ConstraintExpr::new(Sense::Eq, 0.0);
                                Self::push_product(&mut expr, 1.0, fvm_out, fq_out);
                                for &s in &inlets {
                                    let fvm_in = self.fvm(u, m, s, t)?;
                                    let fq_in = self.fq(s, q, t)?;
                                    Self::push_product(&mut expr, -1.0, fvm_in, fq_in);
                                }
                                self.add(
                                    expr,
                                    ConTag::new(Family::PoolWtQuality)
                                        .unit(u)
                                        .batch(m)
                                        .stream(out)
                                        .quality(q)
                                        .period(t),
                                )?;
                            }
                            QualityClass::Spg | QualityClass::Percent => {}
                        }
                    }
                }
            }
        }

        // Virtual batches: stream-level volume definitions and aggregate
        // quality windows over combined feeds.
        self.emit_virtual_batches(t)?;

        // Splitters copy properties from the single inlet to every outlet.
        for (ui, unit) in self.inst.units.iter().enumerate() {
            if unit.kind != UnitKind::Splitter {
                continue;
            }
            let u = UnitId(ui as u32);
            for s_in in self.inst.unit_inlets(u) {
                let tracked: Vec<QualityId> = self
                    .inst
                    .sq
                    .iter()
                    .filter(|&&(ss, _)| ss == s_in)
                    .map(|&(_, q)| q)
                    .collect();
                for s_out in self.inst.unit_outlets(u) {
                    for &q in &tracked {
                        if self.inst.fixed_value(s_out, q).is_some()
                            || !self.inst.is_tracked(s_out, q)
                        {
                            continue;
                        }
                        let src = self.fq(s_in, q, t)?;
                        let dst = match self.fq(s_out, q, t)? {
                            Term::Var(v) => v,
                            Term::Const(_) => continue,
                        };
                        let mut expr = ConstraintExpr::new(Sense::Eq, 0.0);
                        expr.add_linear(1.0, dst);
                        match src {
                            Term::Var(v) => expr.add_linear(-1.0, v),
                            Term::Const(c) => expr.rhs += c,
                        }
                        self.add(
                            expr,
                            ConTag::new(Family::SplitQuality)
                                .unit(u)
                                .stream(s_out)
                                .quality(q)
                                .period(t),
                        )?;
                    }
                }
            }
        }
        Ok(())
    }

    fn emit_virtual_batches(&mut self, t: u32) -> Result<(), BuildError> {
        let spg = self.spg;
        for (vbi, vb) in self.inst.vbatches.clone().into_iter().enumerate() {
            let vb_id = VBatchId(vbi as u32);
            if !self.vbatch_active(vb.unit) {
                continue;
            }
            let members: Vec<VirtualMember> = self
                .inst
                .vmq
                .iter()
                .filter(|m| m.vbatch == vb_id)
                .cloned()
                .collect();
            if members.is_empty() {
                continue;
            }

            // Stream volume definitions for members declared on SPG.
            if let Some(q_spg) = spg {
                for mem in members.iter().filter(|m| m.quality == q_spg) {
                    if !self.vol_defined.insert((mem.stream, t)) {
                        continue;
                    }
                    let v = self.vol(mem.stream, t)?;
                    let fq = self.fq(mem.stream, q_spg, t)?;
                    let fvi = self.fvi(mem.stream, t)?;
                    let mut def = ConstraintExpr::new(Sense::Eq, 0.0);
                    Self::push_product(&mut def, 1.0, v, fq);
                    def.add_linear(-1.0, fvi);
                    self.add(
                        def,
                        ConTag::new(Family::StreamVolume).stream(mem.stream).period(t),
                    )?;
                }
            }

            for w in self.inst.vbq.iter().filter(|w| w.vbatch == vb_id).cloned().collect::<Vec<_>>()
            {
                let q = w.quality;
                let class = self.quality_class(q);
                let m_q: Vec<&VirtualMember> =
                    members.iter().filter(|m| m.quality == q).collect();
                if m_q.is_empty() {
                    continue;
                }
                let streams: Vec<StreamId> = m_q.iter().map(|m| m.stream).collect();
                let weights: Vec<f64> = m_q.iter().map(|m| m.w).collect();

                for (bound, side, sense) in [
                    (w.lo, WindowSide::Lower, Sense::Ge),
                    (w.hi, WindowSide::Upper, Sense::Le),
                ] {
                    let Some(b) = bound else { continue };
                    let mut expr = ConstraintExpr::new(sense, 0.0);
                    let family = match class {
                        QualityClass::Spg => {
                            for &s in &streams {
                                let fvi = self.fvi(s, t)?;
                                expr.add_linear(1.0, fvi);
                                let v = self.vol(s, t)?;
                                expr.add_linear(-b, v);
                            }
                            Family::AggSpg
                        }
                        QualityClass::Volume => {
                            for &s in &streams {
                                let v = self.vol(s, t)?;
                                let fq = self.fq(s, q, t)?;
                                Self::push_product(&mut expr, 1.0, v, fq);
                                expr.add_linear(-b, v);
                            }
                            Family::AggVolQuality
                        }
                        QualityClass::Weight => {
                            for &s in &streams {
                                let fvi = self.fvi(s, t)?;
                                let fq = self.fq(s, q, t)?;
                                Self::push_product(&mut expr, 1.0, fvi, fq);
                                expr.add_linear(-b, fvi);
                            }
                            Family::AggWtQuality
                        }
                        QualityClass::Percent => {
                            for (&s, &wgt) in streams.iter().zip(&weights) {
                                let fvi = self.fvi(s, t)?;
                                expr.add_linear(wgt, fvi);
                            }
                            for s in self.inst.unit_inlets(vb.unit) {
                                let fvi = self.fvi(s, t)?;
                                expr.add_linear(-b, fvi);
                            }
                            Family::ComponentRatio
                        }
                    };
                    let vb_batch = BatchId(vbi as u32);
                    self.add(
                        expr,
                        ConTag::new(family)
                            .unit(vb.unit)
                            .batch(vb_batch)
                            .quality(q)
                            .period(t)
                            .side(side),
                    )?;
                }
            }
        }
        Ok(())
    }

    // ----- blenders ----------------------------------------------------------

    fn emit_blender_constraints(&mut self, t: u32) -> Result<(), BuildError> {
        let spg = self.spg;
        for (ui, unit) in self.inst.units.iter().enumerate() {
            if unit.kind != UnitKind::Blender {
                continue;
            }
            let u = UnitId(ui as u32);
            let inlets = self.inst.unit_inlets(u);
            let specs: Vec<BlendSpec> = self
                .inst
                .blend_specs
                .iter()
                .filter(|b| b.unit == u)
                .cloned()
                .collect();
            let needs_volume = specs.iter().any(|sp| {
                matches!(self.quality_class(sp.quality), QualityClass::Spg | QualityClass::Volume)
            });

            if needs_volume {
                let q_spg = spg.ok_or_else(|| BuildError::MissingInletQuality {
                    stream: self.inst.unit_name(u).into(),
                    quality: "SPG".into(),
                })?;
                for &s in &inlets {
                    if !self.vol_defined.insert((s, t)) {
                        continue;
                    }
                    let v = self.vol(s, t)?;
                    let fq = self.fq(s, q_spg, t)?;
                    let fvi = self.fvi(s, t)?;
                    let mut def = ConstraintExpr::new(Sense::Eq, 0.0);
                    Self::push_product(&mut def, 1.0, v, fq);
                    def.add_linear(-1.0, fvi);
                    self.add(def, ConTag::new(Family::StreamVolume).stream(s).period(t))?;
                }
            }

            for sp in &specs {
                let class = self.quality_class(sp.quality);
                for (bound, side, sense) in [
                    (sp.lo, WindowSide::Lower, Sense::Ge),
                    (sp.hi, WindowSide::Upper, Sense::Le),
                ] {
                    let Some(b) = bound else { continue };
                    let mut expr = ConstraintExpr::new(sense, 0.0);
                    let family = match class {
                        QualityClass::Spg => {
                            for &s in &inlets {
                                let fvi = self.fvi(s, t)?;
                                expr.add_linear(1.0, fvi);
                                let v = self.vol(s, t)?;
                                expr.add_linear(-b, v);
                            }
                            Family::BlendSpg
                        }
                        QualityClass::Volume => {
                            for &s in &inlets {
                                let v = self.vol(s, t)?;
                                let fq = self.fq(s, sp.quality, t)?;
                                Self::push_product(&mut expr, 1.0, v, fq);
                                expr.add_linear(-b, v);
                            }
                            Family::BlendVolQuality
                        }
                        QualityClass::Weight | QualityClass::Percent => {
                            for &s in &inlets {
                                let fvi = self.fvi(s, t)?;
                                let fq = self.fq(s, sp.quality, t)?;
                                Self::push_product(&mut expr, 1.0, fvi, fq);
                                expr.add_linear(-b, fvi);
                            }
                            Family::BlendWtQuality
                        }
                    };
                    self.add(
                        expr,
                        ConTag::new(family).unit(u).quality(sp.quality).period(t).side(side),
                    )?;
                }
            }

            // Fixed-proportion recipes.
            if unit.proportional {
                for s_out in self.inst.unit_outlets(u) {
                    for &s_in in &inlets {
                        let beta = self
                            .inst
                            .blend_ratios
                            .iter()
                            .find(|r| r.unit == u && r.product == s_out && r.component == s_in)
                            .map(|r| r.beta)
                            .ok_or_else(|| BuildError::MissingBlendRatio {
                                unit: unit.name.clone(),
                                stream: self.inst.stream_name(s_in).into(),
                            })?;
                        let fvi = self.fvi(s_in, t)?;
                        let fvo = self.fvo(s_out, t)?;
                        let mut expr = ConstraintExpr::new(Sense::Eq, 0.0);
                        expr.add_linear(1.0, fvi);
                        expr.add_linear(-beta, fvo);
                        self.add(
                            expr,
                            ConTag::new(Family::BlendRatio).unit(u).stream(s_in).period(t),
                        )?;
                    }
                }
            }
        }
        Ok(())
    }

    // ----- inventory -----------------------------------------------------------

    fn emit_inventory_constraints(&mut self, t: u32) -> Result<(), BuildError> {
        for (si, _) in self.inst.streams.iter().enumerate() {
            let s = StreamId(si as u32);
            let storable = self.inst.is_storable(s);
            let fvi = self.fvi(s, t)?;
            let fvo = self.fvo(s, t)?;

            let mut expr = ConstraintExpr::new(Sense::Eq, 0.0);
            expr.add_linear(1.0, fvo);
            expr.add_linear(-1.0, fvi);
            if storable {
                let (_, lmax) = self.inst.level_bound(s, t);
                let lmax = lmax.ok_or_else(|| {
                    BuildError::MissingMaxLevel(self.inst.stream_name(s).into())
                })?;
                let fvli = self.model.intern(
                    VarKind::Fvli,
                    VarIndex::stream(s, t),
                    0.0,
                    lmax,
                    false,
                )?;
                let fvlo = self.model.intern(
                    VarKind::Fvlo,
                    VarIndex::stream(s, t),
                    0.0,
                    lmax,
                    false,
                )?;
                expr.add_linear(1.0, fvlo);
                expr.add_linear(-1.0, fvli);
                self.add(expr, ConTag::new(Family::StreamBalance).stream(s).period(t))?;

                let (llo, _) = self.inst.level_bound(s, t);
                let level = self.model.intern(
                    VarKind::Level,
                    VarIndex::stream(s, t),
                    llo.unwrap_or(0.0),
                    lmax,
                    false,
                )?;
                let mut rec = ConstraintExpr::new(Sense::Eq, 0.0);
                rec.add_linear(1.0, level);
                rec.add_linear(-1.0, fvli);
                rec.add_linear(1.0, fvlo);
                if t == 0 {
                    rec.rhs = self.inst.initial_level(s);
                } else {
                    let prev = self
                        .model
                        .find(VarKind::Level, VarIndex::stream(s, t - 1))
                        .expect("previous level exists");
                    rec.add_linear(-1.0, prev);
                }
                self.add(rec, ConTag::new(Family::InventoryLevel).stream(s).period(t))?;

                if self.opts.inventory_binaries {
                    let x = self.model.intern(
                        VarKind::Flag,
                        VarIndex::stream(s, t),
                        0.0,
                        1.0,
                        true,
                    )?;
                    let mut out_flag = ConstraintExpr::new(Sense::Le, 0.0);
                    out_flag.add_linear(1.0, fvlo);
                    out_flag.add_linear(-lmax, x);
                    self.add(
                        out_flag,
                        ConTag::new(Family::InventoryOutFlag).stream(s).period(t),
                    )?;
                    let mut in_flag = ConstraintExpr::new(Sense::Le, lmax);
                    in_flag.add_linear(1.0, fvli);
                    in_flag.add_linear(lmax, x);
                    self.add(
                        in_flag,
                        ConTag::new(Family::InventoryInFlag).stream(s).period(t),
                    )?;
                }
            } else {
                self.add(expr, ConTag::new(Family::StreamBalance).stream(s).period(t))?;
            }
        }
        Ok(())
    }

    // ----- capacity ---------------------------------------------------------------

    fn emit_capacity_and_bounds(&mut self, t: u32) -> Result<(), BuildError> {
        for b in self.inst.cap_bounds.clone() {
            if b.period != t {
                continue;
            }
            let c = b.capacity;
            let def = &self.inst.capacities[c.idx()];
            let members: Vec<StreamId> = self
                .inst
                .caps
                .iter()
                .filter(|&&(cc, _)| cc == c)
                .map(|&(_, s)| s)
                .collect();
            if members.is_empty() {
                return Err(BuildError::EmptyCapacity(def.name.clone()));
            }
            let (family, kind) = match def.kind {
                CapacityKind::Inlet => (Family::CapacityIn, CapacityKind::Inlet),
                CapacityKind::Outlet => (Family::CapacityOut, CapacityKind::Outlet),
            };
            for (bound, side, sense) in [
                (b.lo, WindowSide::Lower, Sense::Ge),
                (b.hi, WindowSide::Upper, Sense::Le),
            ] {
                let Some(v) = bound else { continue };
                let mut expr = ConstraintExpr::new(sense, v);
                for &s in &members {
                    let var = match kind {
                        CapacityKind::Inlet => self.fvi(s, t)?,
                        CapacityKind::Outlet => self.fvo(s, t)?,
                    };
                    expr.add_linear(1.0, var);
                }
                self.add(expr, ConTag::new(family).capacity(c).period(t).side(side))?;
            }
        }
        Ok(())
    }

    // ----- objective -----------------------------------------------------------------

    fn emit_objective(&mut self) -> Result<(), BuildError> {
        let profit = self.model.intern(
            VarKind::Profit,
            VarIndex::default(),
            -INF,
            INF,
            false,
        )?;
        let mut expr = ConstraintExpr::new(Sense::Eq, 0.0);
        expr.add_linear(1.0, profit);
        for t in 0..self.periods {
            for (si, stream) in self.inst.streams.clone().iter().enumerate() {
                let s = StreamId(si as u32);
                let storable = self.inst.is_storable(s);
                match stream.role {
                    StreamRole::Product => {
                        let price = self
                            .inst
                            .price(s)
                            .and_then(|p| p.cp)
                            .ok_or_else(|| BuildError::MissingPrice(stream.name.clone()))?;
                        let fvi = self.fvi(s, t)?;
                        expr.add_linear(-price, fvi);
                        if storable {
                            let (cip, cim) = self
                                .inst
                                .price(s)
                                .map(|p| (p.cip.unwrap_or(0.0), p.cim.unwrap_or(0.0)))
                                .unwrap_or((0.0, 0.0));
                            let fvli =
                                self.model.find(VarKind::Fvli, VarIndex::stream(s, t)).unwrap();
                            let fvlo =
                                self.model.find(VarKind::Fvlo, VarIndex::stream(s, t)).unwrap();
                            expr.add_linear(-cip, fvli);
                            expr.add_linear(cim, fvlo);
                        }
                    }
                    StreamRole::Raw => {
                        let cost = self
                            .inst
                            .price(s)
                            .and_then(|p| p.cm)
                            .ok_or_else(|| BuildError::MissingPrice(stream.name.clone()))?;
                        let fvo = self.fvo(s, t)?;
                        expr.add_linear(cost, fvo);
                        if storable {
                            let (cip, cim) = self
                                .inst
                                .price(s)
                                .map(|p| (p.cip.unwrap_or(0.0), p.cim.unwrap_or(0.0)))
                                .unwrap_or((0.0, 0.0));
                            let fvli =
                                self.model.find(VarKind::Fvli, VarIndex::stream(s, t)).unwrap();
                            let fvlo =
                                self.model.find(VarKind::Fvlo, VarIndex::stream(s, t)).unwrap();
                            expr.add_linear(cim, fvlo);
                            expr.add_linear(-cip, fvli);
                        }
                    }
                    StreamRole::Intermediate => {}
                }
            }
        }
        self.model.objective_var = Some(profit);
        self.add(expr, ConTag::new(Family::Objective))?;
        Ok(())
    }
}
