//! Instance data model: sets, parameters and bounds of a planning case,
//! plus loading, validation and summary.
//!
//! An instance bundle is a directory of tab-separated tables listed by a
//! manifest; see `docs/instance-format.md` in the repository root for the
//! column reference. Loaded instances are immutable and safely shareable.

mod load;
mod write;
pub(crate) mod tables;

pub use load::{load_instance, LoadError};
pub use write::write_bundle;

use std::collections::HashMap;

macro_rules! id_type {
    ($name:ident) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(pub u32);

        impl $name {
            pub fn idx(self) -> usize {
                self.0 as usize
            }
        }
    };
}

id_type!(StreamId);
id_type!(UnitId);
id_type!(BatchId);
id_type!(QualityId);
id_type!(CapacityId);
id_type!(VBatchId);

/// Market role of a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamRole {
    /// Sold product.
    Product,
    /// Purchased raw material.
    Raw,
    /// Internal stream.
    Intermediate,
}

impl StreamRole {
    pub fn code(self) -> &'static str {
        match self {
            StreamRole::Product => "P",
            StreamRole::Raw => "M",
            StreamRole::Intermediate => "",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitKind {
    Cdu,
    ProcessFixed,
    ProcessDelta,
    Mixer,
    Splitter,
    Blender,
}

impl UnitKind {
    pub fn code(self) -> &'static str {
        match self {
            UnitKind::Cdu => "CDU",
            UnitKind::ProcessFixed => "PF",
            UnitKind::ProcessDelta => "PD",
            UnitKind::Mixer => "MIX",
            UnitKind::Splitter => "SPL",
            UnitKind::Blender => "BLD",
        }
    }

    pub fn parse(s: &str) -> Option<UnitKind> {
        Some(match s {
            "CDU" => UnitKind::Cdu,
            "PF" => UnitKind::ProcessFixed,
            "PD" => UnitKind::ProcessDelta,
            "MIX" => UnitKind::Mixer,
            "SPL" => UnitKind::Splitter,
            "BLD" => UnitKind::Blender,
            _ => return None,
        })
    }

    /// Units whose flows are disaggregated into batches.
    pub fn is_batched(self) -> bool {
        matches!(
            self,
            UnitKind::Cdu | UnitKind::ProcessFixed | UnitKind::ProcessDelta | UnitKind::Mixer
        )
    }

    pub fn is_process(self) -> bool {
        matches!(self, UnitKind::ProcessFixed | UnitKind::ProcessDelta)
    }
}

/// Blending basis of a quality.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QualityClass {
    /// Specific gravity: converts mass flow to volume flow.
    Spg,
    /// Volume-based: blends on volume fractions.
    Volume,
    /// Weight-based: blends on mass fractions.
    Weight,
    /// Component percentage: constrained through declared compositions.
    Percent,
}

impl QualityClass {
    pub fn code(self) -> &'static str {
        match self {
            QualityClass::Spg => "SPG",
            QualityClass::Volume => "V",
            QualityClass::Weight => "W",
            QualityClass::Percent => "P",
        }
    }

    pub fn parse(s: &str) -> Option<QualityClass> {
        Some(match s {
            "SPG" => QualityClass::Spg,
            "V" => QualityClass::Volume,
            "W" => QualityClass::Weight,
            "P" => QualityClass::Percent,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone)]
pub struct StreamDef {
    pub name: String,
    pub role: StreamRole,
}

#[derive(Debug, Clone)]
pub struct UnitDef {
    pub name: String,
    pub kind: UnitKind,
    /// Member of the proportional-blending subset.
    pub proportional: bool,
}

#[derive(Debug, Clone)]
pub struct QualityDef {
    pub name: String,
    pub class: QualityClass,
    /// Declared measurement unit, carried opaquely.
    pub unit: String,
}

#[derive(Debug, Clone)]
pub struct BatchDef {
    pub unit: UnitId,
    pub name: String,
}

#[derive(Debug, Clone)]
pub struct VirtualBatchDef {
    pub unit: UnitId,
    pub name: String,
}

/// Swing pair: `swing` may be merged into `receiver` at ratio `phi`.
#[derive(Debug, Clone)]
pub struct SwingCut {
    pub unit: UnitId,
    pub batch: BatchId,
    pub receiver: StreamId,
    pub swing: StreamId,
    pub phi: f64,
}

#[derive(Debug, Clone)]
pub struct FixedQuality {
    pub stream: StreamId,
    pub quality: QualityId,
    pub value: f64,
}

/// Property transfer from `src` to `dst` at ratio `alpha`.
#[derive(Debug, Clone)]
pub struct PropertyTransfer {
    pub src: StreamId,
    pub dst: StreamId,
    pub quality: QualityId,
    pub alpha: f64,
}

#[derive(Debug, Clone)]
pub struct CrudeQualityWindow {
    pub quality: QualityId,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct CduFeedWindow {
    pub unit: UnitId,
    pub batch: BatchId,
    pub quality: QualityId,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
}

/// Feed stream/property pair that drives the yield correction of a batch.
#[derive(Debug, Clone)]
pub struct DeltaLink {
    pub unit: UnitId,
    pub batch: BatchId,
    pub stream: StreamId,
    pub quality: QualityId,
}

/// Virtual-batch membership; `w` is the component composition used by
/// percentage qualities.
#[derive(Debug, Clone)]
pub struct VirtualMember {
    pub vbatch: VBatchId,
    pub stream: StreamId,
    pub quality: QualityId,
    pub w: f64,
}

#[derive(Debug, Clone)]
pub struct VirtualWindow {
    pub vbatch: VBatchId,
    pub quality: QualityId,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapacityKind {
    Inlet,
    Outlet,
}

#[derive(Debug, Clone)]
pub struct CapacityDef {
    pub name: String,
    pub kind: CapacityKind,
}

#[derive(Debug, Clone)]
pub struct CapBound {
    pub capacity: CapacityId,
    pub period: u32,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
}

/// Crude property, indexed by the consuming batch.
#[derive(Debug, Clone)]
pub struct CrudeProp {
    pub unit: UnitId,
    pub batch: BatchId,
    pub stream: StreamId,
    pub quality: QualityId,
    pub value: f64,
}

/// Property transfer ratio from crude to cut.
#[derive(Debug, Clone)]
pub struct CutProp {
    pub unit: UnitId,
    pub batch: BatchId,
    pub cut: StreamId,
    pub crude: StreamId,
    pub quality: QualityId,
    pub value: f64,
}

/// Cut fraction yield of a crude in a distillation batch.
#[derive(Debug, Clone)]
pub struct CutYield {
    pub unit: UnitId,
    pub batch: BatchId,
    pub cut: StreamId,
    pub crude: StreamId,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct BaseYield {
    pub unit: UnitId,
    pub batch: BatchId,
    pub stream: StreamId,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct BaseProp {
    pub unit: UnitId,
    pub batch: BatchId,
    pub quality: QualityId,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct DeltaStep {
    pub unit: UnitId,
    pub batch: BatchId,
    pub quality: QualityId,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct YieldSens {
    pub unit: UnitId,
    pub batch: BatchId,
    pub stream: StreamId,
    pub quality: QualityId,
    pub value: f64,
}

/// Fixed component ratio of a proportional blender.
#[derive(Debug, Clone)]
pub struct BlendRatioDef {
    pub unit: UnitId,
    pub product: StreamId,
    pub component: StreamId,
    pub beta: f64,
}

#[derive(Debug, Clone)]
pub struct BlendSpec {
    pub unit: UnitId,
    pub quality: QualityId,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
}

/// Declaring inventory data makes a stream storable.
#[derive(Debug, Clone)]
pub struct InventoryDef {
    pub stream: StreamId,
    pub l0: f64,
}

#[derive(Debug, Clone)]
pub struct LevelBound {
    pub stream: StreamId,
    pub period: u32,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Price {
    pub stream: StreamId,
    /// Product sale price.
    pub cp: Option<f64>,
    /// Raw material cost.
    pub cm: Option<f64>,
    /// Inventory valuation on the product side.
    pub cip: Option<f64>,
    /// Inventory valuation on the material side.
    pub cim: Option<f64>,
}

impl Price {
    fn new(stream: StreamId) -> Self {
        Price { stream, cp: None, cm: None, cip: None, cim: None }
    }
}

#[derive(Debug, Clone)]
pub struct FlowBound {
    pub stream: StreamId,
    pub period: u32,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct QualityBound {
    pub stream: StreamId,
    pub quality: QualityId,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
}

/// Feed composition window; parsed and stored, currently generates no
/// constraints (no equation family indexes it).
#[derive(Debug, Clone)]
pub struct FeedCompBound {
    pub unit: UnitId,
    pub stream: StreamId,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
}

/// All sets and parameters of a planning case.
#[derive(Debug, Clone, Default)]
pub struct BenchmarkInstance {
    pub name: String,
    pub periods: Vec<String>,
    pub streams: Vec<StreamDef>,
    pub units: Vec<UnitDef>,
    pub qualities: Vec<QualityDef>,
    pub batches: Vec<BatchDef>,
    pub vbatches: Vec<VirtualBatchDef>,
    pub capacities: Vec<CapacityDef>,

    pub iu: Vec<(UnitId, StreamId)>,
    pub ou: Vec<(UnitId, StreamId)>,
    pub im: Vec<(UnitId, BatchId, StreamId)>,
    pub om: Vec<(UnitId, BatchId, StreamId)>,
    pub swing: Vec<SwingCut>,
    pub sq: Vec<(StreamId, QualityId)>,
    pub fix: Vec<FixedQuality>,
    pub qt: Vec<PropertyTransfer>,
    pub cru: Vec<CrudeQualityWindow>,
    pub cdumq: Vec<CduFeedWindow>,
    pub dbsq: Vec<DeltaLink>,
    pub vmq: Vec<VirtualMember>,
    pub vbq: Vec<VirtualWindow>,
    pub caps: Vec<(CapacityId, StreamId)>,
    pub cap_bounds: Vec<CapBound>,
    pub usp: Vec<(UnitId, StreamId)>,
    pub fc_bounds: Vec<FeedCompBound>,

    pub crude_props: Vec<CrudeProp>,
    pub cut_props: Vec<CutProp>,
    pub yields: Vec<CutYield>,
    pub base_yields: Vec<BaseYield>,
    pub base_props: Vec<BaseProp>,
    pub delta_steps: Vec<DeltaStep>,
    pub yield_sens: Vec<YieldSens>,
    pub blend_ratios: Vec<BlendRatioDef>,
    pub blend_specs: Vec<BlendSpec>,
    pub inventory: Vec<InventoryDef>,
    pub level_bounds: Vec<LevelBound>,
    pub prices: Vec<Price>,
    pub fv_bounds: Vec<FlowBound>,
    pub fq_bounds: Vec<QualityBound>,

    stream_names: HashMap<String, StreamId>,
    unit_names: HashMap<String, UnitId>,
    quality_names: HashMap<String, QualityId>,
    capacity_names: HashMap<String, CapacityId>,
    batch_names: HashMap<(UnitId, String), BatchId>,
    vbatch_names: HashMap<(UnitId, String), VBatchId>,
}

/// Severity of a validation diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone)]
pub struct Diagnostic {
    pub severity: Severity,
    pub locus: String,
    pub message: String,
}

impl Diagnostic {
    fn error(locus: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Error, locus: locus.into(), message: message.into() }
    }

    fn warning(locus: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Warning, locus: locus.into(), message: message.into() }
    }
}

/// Counts record returned by [`BenchmarkInstance::summary`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct InstanceSummary {
    pub periods: usize,
    pub streams: usize,
    pub products: usize,
    pub raw_materials: usize,
    pub units: usize,
    pub cdu_units: usize,
    pub fixed_process_units: usize,
    pub delta_process_units: usize,
    pub mixers: usize,
    pub splitters: usize,
    pub blenders: usize,
    pub batches: usize,
    pub tracked_qualities: usize,
    pub storable_streams: usize,
}

impl BenchmarkInstance {
    pub fn new(name: impl Into<String>) -> Self {
        BenchmarkInstance { name: name.into(), ..Default::default() }
    }

    // ----- construction ------------------------------------------------

    pub fn add_period(&mut self, name: impl Into<String>) -> u32 {
        self.periods.push(name.into());
        (self.periods.len() - 1) as u32
    }

    pub fn add_stream(&mut self, name: impl Into<String>, role: StreamRole) -> StreamId {
        let name = name.into();
        let id = StreamId(self.streams.len() as u32);
        self.stream_names.insert(name.clone(), id);
        self.streams.push(StreamDef { name, role });
        id
    }

    pub fn add_unit(&mut self, name: impl Into<String>, kind: UnitKind) -> UnitId {
        let name = name.into();
        let id = UnitId(self.units.len() as u32);
        self.unit_names.insert(name.clone(), id);
        self.units.push(UnitDef { name, kind, proportional: false });
        id
    }

    pub fn add_quality(
        &mut self,
        name: impl Into<String>,
        class: QualityClass,
        unit: impl Into<String>,
    ) -> QualityId {
        let name = name.into();
        let id = QualityId(self.qualities.len() as u32);
        self.quality_names.insert(name.clone(), id);
        self.qualities.push(QualityDef { name, class, unit: unit.into() });
        id
    }

    pub fn add_batch(&mut self, unit: UnitId, name: impl Into<String>) -> BatchId {
        let name = name.into();
        let id = BatchId(self.batches.len() as u32);
        self.batch_names.insert((unit, name.clone()), id);
        self.batches.push(BatchDef { unit, name });
        id
    }

    pub fn add_virtual_batch(&mut self, unit: UnitId, name: impl Into<String>) -> VBatchId {
        let name = name.into();
        let id = VBatchId(self.vbatches.len() as u32);
        self.vbatch_names.insert((unit, name.clone()), id);
        self.vbatches.push(VirtualBatchDef { unit, name });
        id
    }

    pub fn add_capacity(&mut self, name: impl Into<String>, kind: CapacityKind) -> CapacityId {
        let name = name.into();
        let id = CapacityId(self.capacities.len() as u32);
        self.capacity_names.insert(name.clone(), id);
        self.capacities.push(CapacityDef { name, kind });
        id
    }

    pub fn connect_in(&mut self, unit: UnitId, batch: BatchId, stream: StreamId) {
        if !self.iu.contains(&(unit, stream)) {
            self.iu.push((unit, stream));
        }
        self.im.push((unit, batch, stream));
    }

    pub fn connect_out(&mut self, unit: UnitId, batch: BatchId, stream: StreamId) {
        if !self.ou.contains(&(unit, stream)) {
            self.ou.push((unit, stream));
        }
        self.om.push((unit, batch, stream));
    }

    pub fn track(&mut self, stream: StreamId, quality: QualityId) {
        if !self.sq.contains(&(stream, quality)) {
            self.sq.push((stream, quality));
        }
    }

    pub fn price_entry(&mut self, stream: StreamId) -> &mut Price {
        if let Some(pos) = self.prices.iter().position(|p| p.stream == stream) {
            return &mut self.prices[pos];
        }
        self.prices.push(Price::new(stream));
        self.prices.last_mut().unwrap()
    }

    // ----- lookups ------------------------------------------------------

    pub fn stream_id(&self, name: &str) -> Option<StreamId> {
        self.stream_names.get(name).copied()
    }

    pub fn unit_id(&self, name: &str) -> Option<UnitId> {
        self.unit_names.get(name).copied()
    }

    pub fn quality_id(&self, name: &str) -> Option<QualityId> {
        self.quality_names.get(name).copied()
    }

    pub fn capacity_id(&self, name: &str) -> Option<CapacityId> {
        self.capacity_names.get(name).copied()
    }

    pub fn batch_id(&self, unit: UnitId, name: &str) -> Option<BatchId> {
        self.batch_names.get(&(unit, name.to_string())).copied()
    }

    pub fn vbatch_id(&self, unit: UnitId, name: &str) -> Option<VBatchId> {
        self.vbatch_names.get(&(unit, name.to_string())).copied()
    }

    pub fn stream_name(&self, id: StreamId) -> &str {
        &self.streams[id.idx()].name
    }

    pub fn unit_name(&self, id: UnitId) -> &str {
        &self.units[id.idx()].name
    }

    pub fn quality_name(&self, id: QualityId) -> &str {
        &self.qualities[id.idx()].name
    }

    pub fn batch_name(&self, id: BatchId) -> &str {
        &self.batches[id.idx()].name
    }

    pub fn num_periods(&self) -> u32 {
        self.periods.len() as u32
    }

    /// The specific-gravity quality, when declared.
    pub fn spg(&self) -> Option<QualityId> {
        self.qualities
            .iter()
            .position(|q| q.class == QualityClass::Spg)
            .map(|i| QualityId(i as u32))
    }

    pub fn is_tracked(&self, s: StreamId, q: QualityId) -> bool {
        self.sq.contains(&(s, q))
    }

    pub fn fixed_value(&self, s: StreamId, q: QualityId) -> Option<f64> {
        self.fix
            .iter()
            .find(|f| f.stream == s && f.quality == q)
            .map(|f| f.value)
    }

    pub fn is_storable(&self, s: StreamId) -> bool {
        self.inventory.iter().any(|i| i.stream == s)
    }

    pub fn initial_level(&self, s: StreamId) -> f64 {
        self.inventory
            .iter()
            .find(|i| i.stream == s)
            .map(|i| i.l0)
            .unwrap_or(0.0)
    }

    pub fn level_bound(&self, s: StreamId, t: u32) -> (Option<f64>, Option<f64>) {
        self.level_bounds
            .iter()
            .find(|b| b.stream == s && b.period == t)
            .map(|b| (b.lo, b.hi))
            .unwrap_or((None, None))
    }

    pub fn fv_bound(&self, s: StreamId, t: u32) -> (Option<f64>, Option<f64>) {
        self.fv_bounds
            .iter()
            .find(|b| b.stream == s && b.period == t)
            .map(|b| (b.lo, b.hi))
            .unwrap_or((None, None))
    }

    pub fn fq_bound(&self, s: StreamId, q: QualityId) -> (Option<f64>, Option<f64>) {
        self.fq_bounds
            .iter()
            .find(|b| b.stream == s && b.quality == q)
            .map(|b| (b.lo, b.hi))
            .unwrap_or((None, None))
    }

    pub fn price(&self, s: StreamId) -> Option<&Price> {
        self.prices.iter().find(|p| p.stream == s)
    }

    pub fn batches_of(&self, unit: UnitId) -> impl Iterator<Item = BatchId> + '_ {
        self.batches
            .iter()
            .enumerate()
            .filter(move |(_, b)| b.unit == unit)
            .map(|(i, _)| BatchId(i as u32))
    }

    pub fn batch_inlets(&self, unit: UnitId, batch: BatchId) -> Vec<StreamId> {
        self.im
            .iter()
            .filter(|&&(u, m, _)| u == unit && m == batch)
            .map(|&(_, _, s)| s)
            .collect()
    }

    pub fn batch_outlets(&self, unit: UnitId, batch: BatchId) -> Vec<StreamId> {
        self.om
            .iter()
            .filter(|&&(u, m, _)| u == unit && m == batch)
            .map(|&(_, _, s)| s)
            .collect()
    }

    pub fn unit_inlets(&self, unit: UnitId) -> Vec<StreamId> {
        self.iu
            .iter()
            .filter(|&&(u, _)| u == unit)
            .map(|&(_, s)| s)
            .collect()
    }

    pub fn unit_outlets(&self, unit: UnitId) -> Vec<StreamId> {
        self.ou
            .iter()
            .filter(|&&(u, _)| u == unit)
            .map(|&(_, s)| s)
            .collect()
    }

    pub fn base_yield(&self, u: UnitId, m: BatchId, s: StreamId) -> Option<f64> {
        self.base_yields
            .iter()
            .find(|g| g.unit == u && g.batch == m && g.stream == s)
            .map(|g| g.value)
    }

    pub fn delta_links(&self, u: UnitId, m: BatchId) -> Vec<&DeltaLink> {
        self.dbsq
            .iter()
            .filter(|d| d.unit == u && d.batch == m)
            .collect()
    }

    /// Whether a batch carries delta-base data.
    pub fn is_delta_batch(&self, u: UnitId, m: BatchId) -> bool {
        self.units[u.idx()].kind == UnitKind::ProcessDelta
            && self.dbsq.iter().any(|d| d.unit == u && d.batch == m)
    }

    // ----- validation ---------------------------------------------------

    /// Check every structural invariant; an empty list means the instance is
    /// internally consistent.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();

        // Membership consistency: IM within IU, OM within OU.
        for &(u, m, s) in &self.im {
            if !self.iu.contains(&(u, s)) {
                out.push(Diagnostic::error(
                    format!("im/{}/{}", self.unit_name(u), self.stream_name(s)),
                    format!(
                        "batch {} lists inlet {} not declared in iu",
                        self.batch_name(m),
                        self.stream_name(s)
                    ),
                ));
            }
            if self.batches[m.idx()].unit != u {
                out.push(Diagnostic::error(
                    format!("im/{}", self.unit_name(u)),
                    format!("batch {} belongs to another unit", self.batch_name(m)),
                ));
            }
        }
        for &(u, m, s) in &self.om {
            if !self.ou.contains(&(u, s)) {
                out.push(Diagnostic::error(
                    format!("om/{}/{}", self.unit_name(u), self.stream_name(s)),
                    format!(
                        "batch {} lists outlet {} not declared in ou",
                        self.batch_name(m),
                        self.stream_name(s)
                    ),
                ));
            }
            if self.batches[m.idx()].unit != u {
                out.push(Diagnostic::error(
                    format!("om/{}", self.unit_name(u)),
                    format!("batch {} belongs to another unit", self.batch_name(m)),
                ));
            }
        }

        // Batched units need batch rows; splitters and blenders must not
        // declare any.
        for (i, unit) in self.units.iter().enumerate() {
            let u = UnitId(i as u32);
            let has_batches = self.batches_of(u).next().is_some();
            if unit.kind.is_batched() && !has_batches {
                out.push(Diagnostic::error(
                    format!("units/{}", unit.name),
                    "batched unit declares no batches",
                ));
            }
            if !unit.kind.is_batched() && has_batches {
                out.push(Diagnostic::error(
                    format!("units/{}", unit.name),
                    "splitter/blender units carry no batch structure",
                ));
            }
        }

        // Swing pairs reference distillation batches and streams in their OM.
        for sc in &self.swing {
            if self.units[sc.unit.idx()].kind != UnitKind::Cdu {
                out.push(Diagnostic::error(
                    format!("sc/{}", self.unit_name(sc.unit)),
                    "swing pair on a non-distillation unit",
                ));
            }
            for s in [sc.receiver, sc.swing] {
                if !self.om.contains(&(sc.unit, sc.batch, s)) {
                    out.push(Diagnostic::error(
                        format!("sc/{}/{}", self.unit_name(sc.unit), self.stream_name(s)),
                        format!(
                            "swing pair references {} outside the batch outlets",
                            self.stream_name(s)
                        ),
                    ));
                }
            }
        }

        // Every stream/quality pair referenced by a parameter must be tracked
        // or fixed.
        let mut need: Vec<(StreamId, QualityId, &'static str)> = Vec::new();
        for l in &self.dbsq {
            need.push((l.stream, l.quality, "dbsq"));
        }
        for q in &self.qt {
            need.push((q.src, q.quality, "qt"));
            need.push((q.dst, q.quality, "qt"));
        }
        for v in &self.vmq {
            need.push((v.stream, v.quality, "vmq"));
        }
        for (s, q, table) in need {
            let known = self.is_tracked(s, q) || self.fixed_value(s, q).is_some();
            if !known {
                out.push(Diagnostic::error(
                    format!("{}/{}/{}", table, self.stream_name(s), self.quality_name(q)),
                    "referenced stream/quality pair is neither tracked nor fixed",
                ));
            }
        }

        // Volume-based tracking requires specific gravity on the same stream.
        if let Some(spg) = self.spg() {
            for &(s, q) in &self.sq {
                if self.qualities[q.idx()].class == QualityClass::Volume
                    && !(self.is_tracked(s, spg) || self.fixed_value(s, spg).is_some())
                {
                    out.push(Diagnostic::error(
                        format!("sq/{}/{}", self.stream_name(s), self.quality_name(q)),
                        "volume-based quality tracked without specific gravity",
                    ));
                }
            }
        }

        // Bound ordering.
        fn check_pair(
            out: &mut Vec<Diagnostic>,
            locus: String,
            lo: Option<f64>,
            hi: Option<f64>,
        ) {
            if let (Some(a), Some(b)) = (lo, hi) {
                if a > b {
                    out.push(Diagnostic::error(locus, format!("bounds reversed: {} > {}", a, b)));
                }
            }
        }
        for b in &self.fq_bounds {
            check_pair(
                &mut out,
                format!("fq_bounds/{}/{}", self.stream_name(b.stream), self.quality_name(b.quality)),
                b.lo,
                b.hi,
            );
        }
        for b in &self.fv_bounds {
            check_pair(&mut out, format!("fv_bounds/{}", self.stream_name(b.stream)), b.lo, b.hi);
        }
        for b in &self.cap_bounds {
            check_pair(
                &mut out,
                format!("cap_bounds/{}", self.capacities[b.capacity.idx()].name),
                b.lo,
                b.hi,
            );
        }
        for b in &self.level_bounds {
            check_pair(&mut out, format!("level_bounds/{}", self.stream_name(b.stream)), b.lo, b.hi);
        }
        for b in &self.cdumq {
            check_pair(
                &mut out,
                format!("cdumq/{}/{}", self.unit_name(b.unit), self.quality_name(b.quality)),
                b.lo,
                b.hi,
            );
        }
        for b in &self.vbq {
            check_pair(&mut out, format!("vbq/{}", self.vbatches[b.vbatch.idx()].name), b.lo, b.hi);
        }
        for b in &self.blend_specs {
            check_pair(
                &mut out,
                format!("fqb/{}/{}", self.unit_name(b.unit), self.quality_name(b.quality)),
                b.lo,
                b.hi,
            );
        }
        for b in &self.cru {
            check_pair(&mut out, format!("mfq/{}", self.quality_name(b.quality)), b.lo, b.hi);
        }

        // Virtual batches live on mixers or process units.
        for vb in &self.vbatches {
            let kind = self.units[vb.unit.idx()].kind;
            if !(kind == UnitKind::Mixer || kind.is_process()) {
                out.push(Diagnostic::error(
                    format!("vbatch/{}", vb.name),
                    "virtual batch on a unit that is neither mixer nor process kind",
                ));
            }
        }

        // A stream tracked or fixed twice for the same quality is ambiguous.
        for f in &self.fix {
            if self.is_tracked(f.stream, f.quality) {
                out.push(Diagnostic::error(
                    format!("fix/{}/{}", self.stream_name(f.stream), self.quality_name(f.quality)),
                    "stream/quality pair is both tracked and fixed",
                ));
            }
        }

        // Storable streams need a finite maximum level in every period.
        for inv in &self.inventory {
            for t in 0..self.num_periods() {
                if self.level_bound(inv.stream, t).1.is_none() {
                    out.push(Diagnostic::warning(
                        format!("inventory/{}", self.stream_name(inv.stream)),
                        format!("storable stream lacks a maximum level in period {}", t),
                    ));
                }
            }
        }

        out
    }

    // ----- summary --------------------------------------------------------

    pub fn summary(&self) -> InstanceSummary {
        let mut s = InstanceSummary {
            periods: self.periods.len(),
            streams: self.streams.len(),
            batches: self.batches.len(),
            tracked_qualities: self.sq.len(),
            storable_streams: self.inventory.len(),
            units: self.units.len(),
            ..Default::default()
        };
        for st in &self.streams {
            match st.role {
                StreamRole::Product => s.products += 1,
                StreamRole::Raw => s.raw_materials += 1,
                StreamRole::Intermediate => {}
            }
        }
        for u in &self.units {
            match u.kind {
                UnitKind::Cdu => s.cdu_units += 1,
                UnitKind::ProcessFixed => s.fixed_process_units += 1,
                UnitKind::ProcessDelta => s.delta_process_units += 1,
                UnitKind::Mixer => s.mixers += 1,
                UnitKind::Splitter => s.splitters += 1,
                UnitKind::Blender => s.blenders += 1,
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_instance_summary_is_zero() {
        let inst = BenchmarkInstance::new("empty");
        let s = inst.summary();
        assert_eq!(s, InstanceSummary::default());
    }

    #[test]
    fn reversed_quality_bounds_flagged() {
        let mut inst = BenchmarkInstance::new("t");
        inst.add_period("t1");
        let s = inst.add_stream("a", StreamRole::Intermediate);
        let q = inst.add_quality("sul", QualityClass::Weight, "%");
        inst.track(s, q);
        inst.fq_bounds.push(QualityBound { stream: s, quality: q, lo: Some(2.0), hi: Some(1.0) });
        let diags = inst.validate();
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].severity, Severity::Error);
    }

    #[test]
    fn swing_stream_outside_batch_outlets_flagged() {
        let mut inst = BenchmarkInstance::new("t");
        inst.add_period("t1");
        let cdu = inst.add_unit("cdu1", UnitKind::Cdu);
        let m = inst.add_batch(cdu, "b1");
        let crude = inst.add_stream("crude", StreamRole::Raw);
        let cut_a = inst.add_stream("cut_a", StreamRole::Intermediate);
        let cut_b = inst.add_stream("cut_b", StreamRole::Intermediate);
        inst.connect_in(cdu, m, crude);
        inst.connect_out(cdu, m, cut_a);
        // cut_b is never connected as an outlet of the batch
        inst.swing.push(SwingCut { unit: cdu, batch: m, receiver: cut_a, swing: cut_b, phi: 0.2 });
        let diags = inst.validate();
        assert!(diags
            .iter()
            .any(|d| d.severity == Severity::Error && d.message.contains("swing pair")));
    }

    #[test]
    fn membership_requires_port_declaration() {
        let mut inst = BenchmarkInstance::new("t");
        inst.add_period("t1");
        let u = inst.add_unit("hx", UnitKind::ProcessFixed);
        let m = inst.add_batch(u, "b");
        let s = inst.add_stream("feed", StreamRole::Intermediate);
        // bypass connect_in to leave iu stale
        inst.im.push((u, m, s));
        let diags = inst.validate();
        assert!(diags.iter().any(|d| d.message.contains("not declared in iu")));
    }
}
