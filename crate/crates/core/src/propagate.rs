//! Forward derivation of the quality side of a plan from its flow side.
//!
//! Given flow values (batch flows, stream inlet/outlet flows), this walks the
//! units in topological order and computes tracked properties through the
//! exact distillation, pooling, transfer and copy relations, then volumes and
//! adjusted yield coefficients. Pools below the degeneracy epsilon keep their
//! previous estimate (or the bound midpoint).

use std::collections::HashMap;

use crate::model::{VarIndex, VarKind};
use crate::plan::PlanSolution;
use crate::schema::*;

/// Flow below which a pool's quality is considered undefined.
pub const FLOW_EPSILON: f64 = 1e-5;

/// Units in a producer-before-consumer order; cycles fall back to
/// declaration order for the remainder.
pub fn unit_topo_order(inst: &BenchmarkInstance) -> Vec<UnitId> {
    let n = inst.units.len();
    let mut consumers_of_unit: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut indegree = vec![0usize; n];
    for &(up, sp) in &inst.ou {
        for &(uc, sc) in &inst.iu {
            if sp == sc && up != uc {
                consumers_of_unit[up.idx()].push(uc.idx());
                indegree[uc.idx()] += 1;
            }
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut queue: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    queue.sort_unstable();
    let mut qi = 0;
    while qi < queue.len() {
        let u = queue[qi];
        qi += 1;
        order.push(UnitId(u as u32));
        let mut next: Vec<usize> = Vec::new();
        for &c in &consumers_of_unit[u] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                next.push(c);
            }
        }
        next.sort_unstable();
        queue.extend(next);
    }
    if order.len() < n {
        for i in 0..n {
            if !order.contains(&UnitId(i as u32)) {
                order.push(UnitId(i as u32));
            }
        }
    }
    order
}

struct Ctx<'a> {
    inst: &'a BenchmarkInstance,
    values: HashMap<(StreamId, QualityId), f64>,
}

impl<'a> Ctx<'a> {
    fn fq(&self, s: StreamId, q: QualityId) -> Option<f64> {
        if let Some(v) = self.inst.fixed_value(s, q) {
            return Some(v);
        }
        self.values.get(&(s, q)).copied()
    }
}

pub fn derive_quality_side(
    inst: &BenchmarkInstance,
    plan: &mut PlanSolution,
    delta_base: bool,
    periods: u32,
    fallback: Option<&PlanSolution>,
) -> Result<(), String> {
    let order = unit_topo_order(inst);
    let spg = inst.spg();

    for t in 0..periods {
        let mut ctx = Ctx { inst, values: HashMap::new() };

        // Bound-pinned qualities are data.
        for &(s, q) in &inst.sq {
            if let (Some(lo), Some(hi)) = inst.fq_bound(s, q) {
                if lo == hi {
                    ctx.values.insert((s, q), lo);
                }
            }
        }

        let flow = |plan: &PlanSolution, kind: VarKind, ix: VarIndex| -> f64 {
            plan.get(kind, ix).unwrap_or(0.0)
        };

        for &u in &order {
            let kind = inst.units[u.idx()].kind;
            match kind {
                UnitKind::Cdu => {
                    derive_cdu(inst, plan, &mut ctx, u, t, spg)?;
                }
                UnitKind::Mixer => {
                    for m in inst.batches_of(u) {
                        let inlets = inst.batch_inlets(u, m);
                        let outlets = inst.batch_outlets(u, m);
                        for &out in &outlets {
                            let fvm_out =
                                flow(plan, VarKind::Fvm, VarIndex::batch_stream(u, m, out, t));
                            // volume pass needs inlet specific gravities
                            let mut vol_out = 0.0;
                            let mut vol_ok = spg.is_some();
                            if let Some(q_spg) = spg {
                                for &s in &inlets {
                                    let fvm =
                                        flow(plan, VarKind::Fvm, VarIndex::batch_stream(u, m, s, t));
                                    match ctx.fq(s, q_spg) {
                                        Some(g) if g > 0.0 => vol_out += fvm / g,
                                        _ => {
                                            vol_ok = false;
                                            break;
                                        }
                                    }
                                }
                            }
                            for &(ss, q) in inst.sq.iter().filter(|&&(ss, _)| ss == out) {
                                let _ = ss;
                                let class = inst.qualities[q.idx()].class;
                                let val = match class {
                                    QualityClass::Spg => {
                                        if vol_ok && vol_out > FLOW_EPSILON {
                                            Some(fvm_out / vol_out)
                                        } else {
                                            None
                                        }
                                    }
                                    QualityClass::Volume => {
                                        if vol_ok && vol_out > FLOW_EPSILON {
                                            let q_spg = spg.unwrap();
                                            let mut acc = 0.0;
                                            let mut ok = true;
                                            for &s in &inlets {
                                                let fvm = flow(
                                                    plan,
                                                    VarKind::Fvm,
                                                    VarIndex::batch_stream(u, m, s, t),
                                                );
                                                let g = ctx.fq(s, q_spg).unwrap_or(0.0);
                                                match ctx.fq(s, q) {
                                                    Some(v) if g > 0.0 => acc += (fvm / g) * v,
                                                    _ => {
                                                        ok = false;
                                                        break;
                                                    }
                                                }
                                            }
                                            if ok {
                                                Some(acc / vol_out)
                                            } else {
                                                None
                                            }
                                        } else {
                                            None
                                        }
                                    }
                                    QualityClass::Weight | QualityClass::Percent => {
                                        if fvm_out > FLOW_EPSILON {
                                            let mut acc = 0.0;
                                            let mut ok = true;
                                            for &s in &inlets {
                                                let fvm = flow(
                                                    plan,
                                                    VarKind::Fvm,
                                                    VarIndex::batch_stream(u, m, s, t),
                                                );
                                                match ctx.fq(s, q) {
                                                    Some(v) => acc += fvm * v,
                                                    None => {
                                                        ok = false;
                                                        break;
                                                    }
                                                }
                                            }
                                            if ok {
                                                Some(acc / fvm_out)
                                            } else {
                                                None
                                            }
                                        } else {
                                            None
                                        }
                                    }
                                };
                                apply_quality(inst, &mut ctx, fallback, out, q, t, val);
                            }
                        }
                    }
                    apply_transfers(inst, &mut ctx, u);
                }
                UnitKind::Splitter => {
                    let inlets = inst.unit_inlets(u);
                    for &s_in in &inlets {
                        for s_out in inst.unit_outlets(u) {
                            for &(ss, q) in inst.sq.iter().filter(|&&(ss, _)| ss == s_out) {
                                let _ = ss;
                                let val = ctx.fq(s_in, q);
                                apply_quality(inst, &mut ctx, fallback, s_out, q, t, val);
                            }
                        }
                    }
                    apply_transfers(inst, &mut ctx, u);
                }
                UnitKind::ProcessFixed | UnitKind::ProcessDelta => {
                    apply_transfers(inst, &mut ctx, u);
                }
                UnitKind::Blender => {}
            }
        }

        // Adjusted yield coefficients from the now-known feed properties.
        for (mi, b) in inst.batches.iter().enumerate() {
            let m = BatchId(mi as u32);
            let u = b.unit;
            if !(delta_base && inst.is_delta_batch(u, m)) {
                continue;
            }
            let links = inst.delta_links(u, m);
            let members: Vec<StreamId> = inst
                .batch_inlets(u, m)
                .into_iter()
                .chain(inst.batch_outlets(u, m))
                .collect();
            for s in members {
                let gamma0 = inst
                    .base_yield(u, m, s)
                    .ok_or_else(|| format!("missing base yield for {}", inst.stream_name(s)))?;
                let mut adj = gamma0;
                for l in &links {
                    let sens = inst
                        .yield_sens
                        .iter()
                        .find(|d| {
                            d.unit == u && d.batch == m && d.stream == s && d.quality == l.quality
                        })
                        .map(|d| d.value)
                        .unwrap_or(0.0);
                    if sens == 0.0 {
                        continue;
                    }
                    let base = inst
                        .base_props
                        .iter()
                        .find(|bp| bp.unit == u && bp.batch == m && bp.quality == l.quality)
                        .map(|bp| bp.value)
                        .ok_or("missing base property")?;
                    let step = inst
                        .delta_steps
                        .iter()
                        .find(|d| d.unit == u && d.batch == m && d.quality == l.quality)
                        .map(|d| d.value)
                        .ok_or("missing property step")?;
                    let fq = ctx
                        .fq(l.stream, l.quality)
                        .ok_or_else(|| format!("unresolved feed property of {}", inst.stream_name(l.stream)))?;
                    adj += (fq - base) * sens / step;
                }
                plan.set(VarKind::Gamma, VarIndex::batch_stream(u, m, s, t), adj);
            }
        }

        // Publish qualities, then volumes.
        for (&(s, q), &v) in &ctx.values {
            if inst.is_tracked(s, q) {
                plan.set(VarKind::Fq, VarIndex::stream_quality(s, q, t), v);
            }
        }
        if let Some(q_spg) = spg {
            for (si, _) in inst.streams.iter().enumerate() {
                let s = StreamId(si as u32);
                if let Some(g) = ctx.fq(s, q_spg) {
                    if g > 0.0 {
                        if let Some(fvi) = plan.get(VarKind::Fvi, VarIndex::stream(s, t)) {
                            plan.set(VarKind::Vol, VarIndex::stream(s, t), fvi / g);
                        }
                    }
                }
            }
            for (mi, b) in inst.batches.iter().enumerate() {
                let m = BatchId(mi as u32);
                let u = b.unit;
                if inst.units[u.idx()].kind != UnitKind::Mixer {
                    continue;
                }
                let members: Vec<StreamId> = inst
                    .batch_inlets(u, m)
                    .into_iter()
                    .chain(inst.batch_outlets(u, m))
                    .collect();
                for s in members {
                    if let Some(g) = ctx.fq(s, q_spg) {
                        if g > 0.0 {
                            if let Some(fvm) =
                                plan.get(VarKind::Fvm, VarIndex::batch_stream(u, m, s, t))
                            {
                                plan.set(
                                    VarKind::Vm,
                                    VarIndex::batch_stream(u, m, s, t),
                                    fvm / g,
                                );
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

fn apply_quality(
    inst: &BenchmarkInstance,
    ctx: &mut Ctx,
    fallback: Option<&PlanSolution>,
    s: StreamId,
    q: QualityId,
    t: u32,
    val: Option<f64>,
) {
    if inst.fixed_value(s, q).is_some() {
        return;
    }
    let v = match val {
        Some(v) => v,
        None => {
            if let Some(prev) = ctx.fq(s, q) {
                prev
            } else if let Some(fb) =
                fallback.and_then(|f| f.get(VarKind::Fq, VarIndex::stream_quality(s, q, t)))
            {
                fb
            } else {
                let (lo, hi) = inst.fq_bound(s, q);
                match (lo, hi) {
                    (Some(a), Some(b)) => 0.5 * (a + b),
                    (Some(a), None) => a,
                    (None, Some(b)) => b,
                    (None, None) => 0.0,
                }
            }
        }
    };
    ctx.values.insert((s, q), v);
}

/// Apply declared property transfers whose destination is an outlet of `u`.
fn apply_transfers(inst: &BenchmarkInstance, ctx: &mut Ctx, u: UnitId) {
    for qt in &inst.qt {
        let dst_here = inst.ou.iter().any(|&(uu, s)| uu == u && s == qt.dst);
        if !dst_here || inst.fixed_value(qt.dst, qt.quality).is_some() {
            continue;
        }
        if let Some(v) = ctx.fq(qt.src, qt.quality) {
            ctx.values.insert((qt.dst, qt.quality), qt.alpha * v);
        }
    }
}

fn derive_cdu(
    inst: &BenchmarkInstance,
    plan: &mut PlanSolution,
    ctx: &mut Ctx,
    u: UnitId,
    t: u32,
    spg: Option<QualityId>,
) -> Result<(), String> {
    let cut_prop = |m: BatchId, cut: StreamId, crude: StreamId, q: QualityId| -> Option<f64> {
        inst.cut_props
            .iter()
            .find(|p| p.unit == u && p.batch == m && p.cut == cut && p.crude == crude && p.quality == q)
            .map(|p| p.value)
    };
    let cut_yield = |m: BatchId, cut: StreamId, crude: StreamId| -> f64 {
        inst.yields
            .iter()
            .find(|y| y.unit == u && y.batch == m && y.cut == cut && y.crude == crude)
            .map(|y| y.value)
            .unwrap_or(0.0)
    };

    for s in inst.unit_outlets(u) {
        let tracked: Vec<QualityId> = inst
            .sq
            .iter()
            .filter(|&&(ss, _)| ss == s)
            .map(|&(_, q)| q)
            .collect();
        if tracked.is_empty() {
            continue;
        }
        let fvo: f64 = inst
            .batches_of(u)
            .filter(|&m| inst.om.contains(&(u, m, s)))
            .map(|m| {
                plan.get(VarKind::Fvm, VarIndex::batch_stream(u, m, s, t)).unwrap_or(0.0)
            })
            .sum();

        // weighted sum over (batch, crude, contributing cut, sign)
        let sum_terms = |weight: &dyn Fn(BatchId, StreamId, StreamId) -> Option<f64>| -> Option<f64> {
            let mut acc = 0.0;
            for m in inst.batches_of(u) {
                if !inst.om.contains(&(u, m, s)) {
                    continue;
                }
                let swings: Vec<&SwingCut> = inst
                    .swing
                    .iter()
                    .filter(|sc| sc.unit == u && sc.batch == m)
                    .collect();
                for crude in inst.batch_inlets(u, m) {
                    let fvm = plan
                        .get(VarKind::Fvm, VarIndex::batch_stream(u, m, crude, t))
                        .unwrap_or(0.0);
                    let y_base = cut_yield(m, s, crude);
                    if y_base != 0.0 {
                        acc += y_base * weight(m, s, crude)? * fvm;
                    }
                    for sc in &swings {
                        if sc.receiver == s {
                            let y_sw = cut_yield(m, sc.swing, crude);
                            if y_sw != 0.0 && sc.phi != 0.0 {
                                acc += y_sw * sc.phi * weight(m, sc.swing, crude)? * fvm;
                            }
                        }
                        if sc.swing == s {
                            let y_own = cut_yield(m, s, crude);
                            if y_own != 0.0 && sc.phi != 0.0 {
                                acc -= y_own * sc.phi * weight(m, s, crude)? * fvm;
                            }
                        }
                    }
                }
            }
            Some(acc)
        };

        let mut vol = None;
        if let Some(q_spg) = spg {
            if inst.is_tracked(s, q_spg) {
                let v = sum_terms(&|m, cut, crude| cut_prop(m, cut, crude, q_spg).map(|p| 1.0 / p))
                    .ok_or("missing cut specific gravity")?;
                vol = Some(v);
                let val = if v > FLOW_EPSILON { Some(fvo / v) } else { None };
                apply_quality(inst, ctx, None, s, q_spg, t, val);
            }
        }
        for &q in &tracked {
            match inst.qualities[q.idx()].class {
                QualityClass::Spg => {}
                QualityClass::Volume => {
                    let q_spg = spg.ok_or("volume quality without specific gravity")?;
                    let num = sum_terms(&|m, cut, crude| {
                        let pq = cut_prop(m, cut, crude, q)?;
                        let ps = cut_prop(m, cut, crude, q_spg)?;
                        Some(pq / ps)
                    })
                    .ok_or("missing cut property")?;
                    let val = match vol {
                        Some(v) if v > FLOW_EPSILON => Some(num / v),
                        _ => None,
                    };
                    apply_quality(inst, ctx, None, s, q, t, val);
                }
                QualityClass::Weight | QualityClass::Percent => {
                    let num = sum_terms(&|m, cut, crude| cut_prop(m, cut, crude, q))
                        .ok_or("missing cut property")?;
                    let val = if fvo > FLOW_EPSILON { Some(num / fvo) } else { None };
                    apply_quality(inst, ctx, None, s, q, t, val);
                }
            }
        }
    }
    apply_transfers(inst, ctx, u);
    Ok(())
}
