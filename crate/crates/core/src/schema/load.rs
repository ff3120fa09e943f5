//! Instance bundle reader.
//!
//! A bundle is a directory with a `manifest.tsv` mapping table names to
//! files. Every table is optional; a missing table is an empty set.

use std::collections::HashMap;
use std::path::Path;

use thiserror::Error;

use super::tables::Table;
use super::*;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{file} line {line}: {message}")]
    Parse { file: String, line: u32, message: String },
    #[error("{file}: missing column '{column}'")]
    MissingColumn { file: String, column: String },
    #[error("{file} line {line}: unknown {kind} '{name}'")]
    Dangling { file: String, line: u32, kind: &'static str, name: String },
    #[error("{file} line {line}: unit '{unit}' redeclared with a different kind")]
    UnitKindConflict { file: String, line: u32, unit: String },
    #[error("{file} line {line}: duplicate {kind} '{name}'")]
    Duplicate { file: String, line: u32, kind: &'static str, name: String },
    #[error("{file}: unknown table '{table}' in manifest")]
    UnknownTable { file: String, table: String },
}

const KNOWN_TABLES: &[&str] = &[
    "periods", "qualities", "streams", "units", "batches", "vbatches", "capacities", "iu", "ou",
    "im", "om", "sc", "sq", "fix", "qt", "mfq", "cdumq", "dbsq", "vmq", "vbq", "caps", "fvc",
    "usp", "fc", "fq_crd", "fq_cut", "y", "gamma", "b", "delta_step", "delta_sens", "beta", "fqb",
    "inventory", "l_bounds", "prices", "fv", "fq_bounds",
];

struct Loader {
    inst: BenchmarkInstance,
}

impl Loader {
    fn stream(&self, t: &Table, row: &(u32, Vec<String>), col: usize) -> Result<StreamId, LoadError> {
        let name = t.required(row, col)?;
        self.inst.stream_id(name).ok_or_else(|| LoadError::Dangling {
            file: t.file.clone(),
            line: row.0,
            kind: "stream",
            name: name.to_string(),
        })
    }

    fn unit(&self, t: &Table, row: &(u32, Vec<String>), col: usize) -> Result<UnitId, LoadError> {
        let name = t.required(row, col)?;
        self.inst.unit_id(name).ok_or_else(|| LoadError::Dangling {
            file: t.file.clone(),
            line: row.0,
            kind: "unit",
            name: name.to_string(),
        })
    }

    fn quality(&self, t: &Table, row: &(u32, Vec<String>), col: usize) -> Result<QualityId, LoadError> {
        let name = t.required(row, col)?;
        self.inst.quality_id(name).ok_or_else(|| LoadError::Dangling {
            file: t.file.clone(),
            line: row.0,
            kind: "quality",
            name: name.to_string(),
        })
    }

    fn batch(
        &self,
        t: &Table,
        row: &(u32, Vec<String>),
        unit: UnitId,
        col: usize,
    ) -> Result<BatchId, LoadError> {
        let name = t.required(row, col)?;
        self.inst.batch_id(unit, name).ok_or_else(|| LoadError::Dangling {
            file: t.file.clone(),
            line: row.0,
            kind: "batch",
            name: name.to_string(),
        })
    }

    fn vbatch(
        &self,
        t: &Table,
        row: &(u32, Vec<String>),
        unit: UnitId,
        col: usize,
    ) -> Result<VBatchId, LoadError> {
        let name = t.required(row, col)?;
        self.inst.vbatch_id(unit, name).ok_or_else(|| LoadError::Dangling {
            file: t.file.clone(),
            line: row.0,
            kind: "virtual batch",
            name: name.to_string(),
        })
    }

    fn capacity(&self, t: &Table, row: &(u32, Vec<String>), col: usize) -> Result<CapacityId, LoadError> {
        let name = t.required(row, col)?;
        self.inst.capacity_id(name).ok_or_else(|| LoadError::Dangling {
            file: t.file.clone(),
            line: row.0,
            kind: "capacity",
            name: name.to_string(),
        })
    }

    fn period(&self, t: &Table, row: &(u32, Vec<String>), col: usize) -> Result<u32, LoadError> {
        let name = t.required(row, col)?;
        self.inst
            .periods
            .iter()
            .position(|p| p == name)
            .map(|i| i as u32)
            .ok_or_else(|| LoadError::Dangling {
                file: t.file.clone(),
                line: row.0,
                kind: "period",
                name: name.to_string(),
            })
    }
}

/// Load and fully resolve an instance bundle.
pub fn load_instance(dir: impl AsRef<Path>) -> Result<BenchmarkInstance, LoadError> {
    let dir = dir.as_ref();
    let manifest_path = dir.join("manifest.tsv");
    let manifest = Table::read(&manifest_path, "manifest.tsv")?;
    let tcol = manifest.col("table")?;
    let fcol = manifest.col("file")?;

    let mut files: HashMap<String, Table> = HashMap::new();
    for row in &manifest.rows {
        let table = manifest.required(row, tcol)?.to_string();
        let file = manifest.required(row, fcol)?.to_string();
        if !KNOWN_TABLES.contains(&table.as_str()) {
            return Err(LoadError::UnknownTable { file: "manifest.tsv".into(), table });
        }
        let t = Table::read(&dir.join(&file), &file)?;
        files.insert(table, t);
    }
    let name = dir
        .file_name()
        .map(|n| n.to_string_lossy().to_string())
        .unwrap_or_else(|| "instance".to_string());

    let mut loader = Loader { inst: BenchmarkInstance::new(name) };
    let empty = Table::parse("", "")?;
    let get = |n: &str| -> &Table { files.get(n).unwrap_or(&empty) };

    // Base sets first; everything else resolves against them.
    {
        let t = get("periods");
        if !t.rows.is_empty() {
            let c = t.col("t")?;
            for row in &t.rows {
                let p = t.required(row, c)?;
                if loader.inst.periods.iter().any(|x| x == p) {
                    return Err(LoadError::Duplicate {
                        file: t.file.clone(),
                        line: row.0,
                        kind: "period",
                        name: p.to_string(),
                    });
                }
                loader.inst.add_period(p);
            }
        }
    }
    {
        let t = get("qualities");
        if !t.rows.is_empty() {
            let (cq, cc, cu) = (t.col("q")?, t.col("class")?, t.col("unit")?);
            for row in &t.rows {
                let name = t.required(row, cq)?;
                if loader.inst.quality_id(name).is_some() {
                    return Err(LoadError::Duplicate {
                        file: t.file.clone(),
                        line: row.0,
                        kind: "quality",
                        name: name.to_string(),
                    });
                }
                let class_code = t.required(row, cc)?;
                let class = QualityClass::parse(class_code).ok_or_else(|| LoadError::Parse {
                    file: t.file.clone(),
                    line: row.0,
                    message: format!("unknown quality class '{}'", class_code),
                })?;
                let unit = t.field(row, cu).to_string();
                loader.inst.add_quality(name, class, unit);
            }
        }
    }
    {
        let t = get("streams");
        if !t.rows.is_empty() {
            let (cs, cr) = (t.col("s")?, t.col("role")?);
            for row in &t.rows {
                let name = t.required(row, cs)?;
                if loader.inst.stream_id(name).is_some() {
                    return Err(LoadError::Duplicate {
                        file: t.file.clone(),
                        line: row.0,
                        kind: "stream",
                        name: name.to_string(),
                    });
                }
                let role = match t.field(row, cr) {
                    "P" => StreamRole::Product,
                    "M" => StreamRole::Raw,
                    "" => StreamRole::Intermediate,
                    other => {
                        return Err(LoadError::Parse {
                            file: t.file.clone(),
                            line: row.0,
                            message: format!("unknown stream role '{}'", other),
                        })
                    }
                };
                loader.inst.add_stream(name, role);
            }
        }
    }
    {
        let t = get("units");
        if !t.rows.is_empty() {
            let (cu, ck) = (t.col("u")?, t.col("kind")?);
            let crb = t.col("rb").ok();
            for row in &t.rows {
                let name = t.required(row, cu)?;
                let kind_code = t.required(row, ck)?;
                let kind = UnitKind::parse(kind_code).ok_or_else(|| LoadError::Parse {
                    file: t.file.clone(),
                    line: row.0,
                    message: format!("unknown unit kind '{}'", kind_code),
                })?;
                if let Some(prev) = loader.inst.unit_id(name) {
                    if loader.inst.units[prev.idx()].kind != kind {
                        return Err(LoadError::UnitKindConflict {
                            file: t.file.clone(),
                            line: row.0,
                            unit: name.to_string(),
                        });
                    }
                    return Err(LoadError::Duplicate {
                        file: t.file.clone(),
                        line: row.0,
                        kind: "unit",
                        name: name.to_string(),
                    });
                }
                let id = loader.inst.add_unit(name, kind);
                if let Some(c) = crb {
                    if t.field(row, c) == "1" {
                        loader.inst.units[id.idx()].proportional = true;
                    }
                }
            }
        }
    }
    {
        let t = get("batches");
        if !t.rows.is_empty() {
            let (cu, cm) = (t.col("u")?, t.col("m")?);
            for row in &t.rows {
                let u = loader.unit(t, row, cu)?;
                let m = t.required(row, cm)?;
                if loader.inst.batch_id(u, m).is_some() {
                    return Err(LoadError::Duplicate {
                        file: t.file.clone(),
                        line: row.0,
                        kind: "batch",
                        name: m.to_string(),
                    });
                }
                loader.inst.add_batch(u, m);
            }
        }
    }
    {
        let t = get("vbatches");
        if !t.rows.is_empty() {
            let (cu, cm) = (t.col("u")?, t.col("m")?);
            for row in &t.rows {
                let u = loader.unit(t, row, cu)?;
                let m = t.required(row, cm)?;
                loader.inst.add_virtual_batch(u, m);
            }
        }
    }
    {
        let t = get("capacities");
        if !t.rows.is_empty() {
            let (cc, ck) = (t.col("c")?, t.col("kind")?);
            for row in &t.rows {
                let name = t.required(row, cc)?;
                let kind = match t.required(row, ck)? {
                    "IN" => CapacityKind::Inlet,
                    "OUT" => CapacityKind::Outlet,
                    other => {
                        return Err(LoadError::Parse {
                            file: t.file.clone(),
                            line: row.0,
                            message: format!("unknown capacity kind '{}'", other),
                        })
                    }
                };
                loader.inst.add_capacity(name, kind);
            }
        }
    }

    // Incidence sets.
    {
        let t = get("iu");
        if !t.rows.is_empty() {
            let (cu, cs) = (t.col("u")?, t.col("s")?);
            for row in &t.rows {
                let u = loader.unit(t, row, cu)?;
                let s = loader.stream(t, row, cs)?;
                loader.inst.iu.push((u, s));
            }
        }
    }
    {
        let t = get("ou");
        if !t.rows.is_empty() {
            let (cu, cs) = (t.col("u")?, t.col("s")?);
            for row in &t.rows {
                let u = loader.unit(t, row, cu)?;
                let s = loader.stream(t, row, cs)?;
                loader.inst.ou.push((u, s));
            }
        }
    }
    {
        let t = get("im");
        if !t.rows.is_empty() {
            let (cu, cm, cs) = (t.col("u")?, t.col("m")?, t.col("s")?);
            for row in &t.rows {
                let u = loader.unit(t, row, cu)?;
                let m = loader.batch(t, row, u, cm)?;
                let s = loader.stream(t, row, cs)?;
                loader.inst.im.push((u, m, s));
            }
        }
    }
    {
        let t = get("om");
        if !t.rows.is_empty() {
            let (cu, cm, cs) = (t.col("u")?, t.col("m")?, t.col("s")?);
            for row in &t.rows {
                let u = loader.unit(t, row, cu)?;
                let m = loader.batch(t, row, u, cm)?;
                let s = loader.stream(t, row, cs)?;
                loader.inst.om.push((u, m, s));
            }
        }
    }
    {
        let t = get("sc");
        if !t.rows.is_empty() {
            let (cu, cm, cs, cs2, cphi) =
                (t.col("u")?, t.col("m")?, t.col("s")?, t.col("s2")?, t.col("phi")?);
            for row in &t.rows {
                let u = loader.unit(t, row, cu)?;
                let m = loader.batch(t, row, u, cm)?;
                let receiver = loader.stream(t, row, cs)?;
                let swing = loader.stream(t, row, cs2)?;
                let phi = t.number(row, cphi)?;
                loader.inst.swing.push(SwingCut { unit: u, batch: m, receiver, swing, phi });
            }
        }
    }
    {
        let t = get("sq");
        if !t.rows.is_empty() {
            let (cs, cq) = (t.col("s")?, t.col("q")?);
            for row in &t.rows {
                let s = loader.stream(t, row, cs)?;
                let q = loader.quality(t, row, cq)?;
                loader.inst.sq.push((s, q));
            }
        }
    }
    {
        let t = get("fix");
        if !t.rows.is_empty() {
            let (cs, cq, cv) = (t.col("s")?, t.col("q")?, t.col("fq0")?);
            for row in &t.rows {
                let stream = loader.stream(t, row, cs)?;
                let quality = loader.quality(t, row, cq)?;
                let value = t.number(row, cv)?;
                loader.inst.fix.push(FixedQuality { stream, quality, value });
            }
        }
    }
    {
        let t = get("qt");
        if !t.rows.is_empty() {
            let (cs, cs2, cq, ca) = (t.col("s")?, t.col("s2")?, t.col("q")?, t.col("alpha")?);
            for row in &t.rows {
                let src = loader.stream(t, row, cs)?;
                let dst = loader.stream(t, row, cs2)?;
                let quality = loader.quality(t, row, cq)?;
                let alpha = t.number(row, ca)?;
                loader.inst.qt.push(PropertyTransfer { src, dst, quality, alpha });
            }
        }
    }
    {
        let t = get("mfq");
        if !t.rows.is_empty() {
            let (cq, clo, chi) = (t.col("q")?, t.col("lo")?, t.col("hi")?);
            for row in &t.rows {
                let quality = loader.quality(t, row, cq)?;
                let lo = t.opt_number(row, clo)?;
                let hi = t.opt_number(row, chi)?;
                loader.inst.cru.push(CrudeQualityWindow { quality, lo, hi });
            }
        }
    }
    {
        let t = get("cdumq");
        if !t.rows.is_empty() {
            let (cu, cm, cq, clo, chi) =
                (t.col("u")?, t.col("m")?, t.col("q")?, t.col("lo")?, t.col("hi")?);
            for row in &t.rows {
                let unit = loader.unit(t, row, cu)?;
                let batch = loader.batch(t, row, unit, cm)?;
                let quality = loader.quality(t, row, cq)?;
                let lo = t.opt_number(row, clo)?;
                let hi = t.opt_number(row, chi)?;
                loader.inst.cdumq.push(CduFeedWindow { unit, batch, quality, lo, hi });
            }
        }
    }
    {
        let t = get("dbsq");
        if !t.rows.is_empty() {
            let (cu, cm, cs, cq) = (t.col("u")?, t.col("m")?, t.col("s")?, t.col("q")?);
            for row in &t.rows {
                let unit = loader.unit(t, row, cu)?;
                let batch = loader.batch(t, row, unit, cm)?;
                let stream = loader.stream(t, row, cs)?;
                let quality = loader.quality(t, row, cq)?;
                loader.inst.dbsq.push(DeltaLink { unit, batch, stream, quality });
            }
        }
    }
    {
        let t = get("vmq");
        if !t.rows.is_empty() {
            let (cu, cm, cs, cq, cw) =
                (t.col("u")?, t.col("m")?, t.col("s")?, t.col("q")?, t.col("w")?);
            for row in &t.rows {
                let unit = loader.unit(t, row, cu)?;
                let vbatch = loader.vbatch(t, row, unit, cm)?;
                let stream = loader.stream(t, row, cs)?;
                let quality = loader.quality(t, row, cq)?;
                let w = t.opt_number(row, cw)?.unwrap_or(1.0);
                loader.inst.vmq.push(VirtualMember { vbatch, stream, quality, w });
            }
        }
    }
    {
        let t = get("vbq");
        if !t.rows.is_empty() {
            let (cu, cm, cq, clo, chi) =
                (t.col("u")?, t.col("m")?, t.col("q")?, t.col("lo")?, t.col("hi")?);
            for row in &t.rows {
                let unit = loader.unit(t, row, cu)?;
                let vbatch = loader.vbatch(t, row, unit, cm)?;
                let quality = loader.quality(t, row, cq)?;
                let lo = t.opt_number(row, clo)?;
                let hi = t.opt_number(row, chi)?;
                loader.inst.vbq.push(VirtualWindow { vbatch, quality, lo, hi });
            }
        }
    }
    {
        let t = get("caps");
        if !t.rows.is_empty() {
            let (cc, cs) = (t.col("c")?, t.col("s")?);
            for row in &t.rows {
                let c = loader.capacity(t, row, cc)?;
                let s = loader.stream(t, row, cs)?;
                loader.inst.caps.push((c, s));
            }
        }
    }
    {
        let t = get("fvc");
        if !t.rows.is_empty() {
            let (cc, ct, clo, chi) = (t.col("c")?, t.col("t")?, t.col("lo")?, t.col("hi")?);
            for row in &t.rows {
                let capacity = loader.capacity(t, row, cc)?;
                let period = loader.period(t, row, ct)?;
                let lo = t.opt_number(row, clo)?;
                let hi = t.opt_number(row, chi)?;
                loader.inst.cap_bounds.push(CapBound { capacity, period, lo, hi });
            }
        }
    }
    {
        let t = get("usp");
        if !t.rows.is_empty() {
            let (cu, cs) = (t.col("u")?, t.col("s")?);
            for row in &t.rows {
                let u = loader.unit(t, row, cu)?;
                let s = loader.stream(t, row, cs)?;
                loader.inst.usp.push((u, s));
            }
        }
    }
    {
        let t = get("fc");
        if !t.rows.is_empty() {
            let (cu, cs, clo, chi) = (t.col("u")?, t.col("s")?, t.col("lo")?, t.col("hi")?);
            for row in &t.rows {
                let unit = loader.unit(t, row, cu)?;
                let stream = loader.stream(t, row, cs)?;
                let lo = t.opt_number(row, clo)?;
                let hi = t.opt_number(row, chi)?;
                loader.inst.fc_bounds.push(FeedCompBound { unit, stream, lo, hi });
            }
        }
    }

    // Parameters.
    {
        let t = get("fq_crd");
        if !t.rows.is_empty() {
            let (cu, cm, cs, cq, cv) =
                (t.col("u")?, t.col("m")?, t.col("s")?, t.col("q")?, t.col("value")?);
            for row in &t.rows {
                let unit = loader.unit(t, row, cu)?;
                let batch = loader.batch(t, row, unit, cm)?;
                let stream = loader.stream(t, row, cs)?;
                let quality = loader.quality(t, row, cq)?;
                let value = t.number(row, cv)?;
                loader.inst.crude_props.push(CrudeProp { unit, batch, stream, quality, value });
            }
        }
    }
    {
        let t = get("fq_cut");
        if !t.rows.is_empty() {
            let (cu, cm, cs, cs2, cq, cv) =
                (t.col("u")?, t.col("m")?, t.col("s")?, t.col("s2")?, t.col("q")?, t.col("value")?);
            for row in &t.rows {
                let unit = loader.unit(t, row, cu)?;
                let batch = loader.batch(t, row, unit, cm)?;
                let cut = loader.stream(t, row, cs)?;
                let crude = loader.stream(t, row, cs2)?;
                let quality = loader.quality(t, row, cq)?;
                let value = t.number(row, cv)?;
                loader.inst.cut_props.push(CutProp { unit, batch, cut, crude, quality, value });
            }
        }
    }
    {
        let t = get("y");
        if !t.rows.is_empty() {
            let (cu, cm, cs, cs2, cv) =
                (t.col("u")?, t.col("m")?, t.col("s")?, t.col("s2")?, t.col("value")?);
            for row in &t.rows {
                let unit = loader.unit(t, row, cu)?;
                let batch = loader.batch(t, row, unit, cm)?;
                let cut = loader.stream(t, row, cs)?;
                let crude = loader.stream(t, row, cs2)?;
                let value = t.number(row, cv)?;
                loader.inst.yields.push(CutYield { unit, batch, cut, crude, value });
            }
        }
    }
    {
        let t = get("gamma");
        if !t.rows.is_empty() {
            let (cu, cm, cs, cv) = (t.col("u")?, t.col("m")?, t.col("s")?, t.col("value")?);
            for row in &t.rows {
                let unit = loader.unit(t, row, cu)?;
                let batch = loader.batch(t, row, unit, cm)?;
                let stream = loader.stream(t, row, cs)?;
                let value = t.number(row, cv)?;
                loader.inst.base_yields.push(BaseYield { unit, batch, stream, value });
            }
        }
    }
    {
        let t = get("b");
        if !t.rows.is_empty() {
            let (cu, cm, cq, cv) = (t.col("u")?, t.col("m")?, t.col("q")?, t.col("value")?);
            for row in &t.rows {
                let unit = loader.unit(t, row, cu)?;
                let batch = loader.batch(t, row, unit, cm)?;
                let quality = loader.quality(t, row, cq)?;
                let value = t.number(row, cv)?;
                loader.inst.base_props.push(BaseProp { unit, batch, quality, value });
            }
        }
    }
    {
        let t = get("delta_step");
        if !t.rows.is_empty() {
            let (cu, cm, cq, cv) = (t.col("u")?, t.col("m")?, t.col("q")?, t.col("value")?);
            for row in &t.rows {
                let unit = loader.unit(t, row, cu)?;
                let batch = loader.batch(t, row, unit, cm)?;
                let quality = loader.quality(t, row, cq)?;
                let value = t.number(row, cv)?;
                loader.inst.delta_steps.push(DeltaStep { unit, batch, quality, value });
            }
        }
    }
    {
        let t = get("delta_sens");
        if !t.rows.is_empty() {
            let (cu, cm, cs, cq, cv) =
                (t.col("u")?, t.col("m")?, t.col("s")?, t.col("q")?, t.col("value")?);
            for row in &t.rows {
                let unit = loader.unit(t, row, cu)?;
                let batch = loader.batch(t, row, unit, cm)?;
                let stream = loader.stream(t, row, cs)?;
                let quality = loader.quality(t, row, cq)?;
                let value = t.number(row, cv)?;
                loader.inst.yield_sens.push(YieldSens { unit, batch, stream, quality, value });
            }
        }
    }
    {
        let t = get("beta");
        if !t.rows.is_empty() {
            let (cu, cs, cs2, cv) = (t.col("u")?, t.col("s")?, t.col("s2")?, t.col("value")?);
            for row in &t.rows {
                let unit = loader.unit(t, row, cu)?;
                let product = loader.stream(t, row, cs)?;
                let component = loader.stream(t, row, cs2)?;
                let beta = t.number(row, cv)?;
                loader.inst.blend_ratios.push(BlendRatioDef { unit, product, component, beta });
            }
        }
    }
    {
        let t = get("fqb");
        if !t.rows.is_empty() {
            let (cu, cq, clo, chi) = (t.col("u")?, t.col("q")?, t.col("lo")?, t.col("hi")?);
            for row in &t.rows {
                let unit = loader.unit(t, row, cu)?;
                let quality = loader.quality(t, row, cq)?;
                let lo = t.opt_number(row, clo)?;
                let hi = t.opt_number(row, chi)?;
                loader.inst.blend_specs.push(BlendSpec { unit, quality, lo, hi });
            }
        }
    }
    {
        let t = get("inventory");
        if !t.rows.is_empty() {
            let (cs, cl0) = (t.col("s")?, t.col("l0")?);
            for row in &t.rows {
                let stream = loader.stream(t, row, cs)?;
                let l0 = t.number(row, cl0)?;
                loader.inst.inventory.push(InventoryDef { stream, l0 });
            }
        }
    }
    {
        let t = get("l_bounds");
        if !t.rows.is_empty() {
            let (cs, ct, clo, chi) = (t.col("s")?, t.col("t")?, t.col("lo")?, t.col("hi")?);
            for row in &t.rows {
                let stream = loader.stream(t, row, cs)?;
                let period = loader.period(t, row, ct)?;
                let lo = t.opt_number(row, clo)?;
                let hi = t.opt_number(row, chi)?;
                loader.inst.level_bounds.push(LevelBound { stream, period, lo, hi });
            }
        }
    }
    {
        let t = get("prices");
        if !t.rows.is_empty() {
            let cs = t.col("s")?;
            let (ccp, ccm, ccip, ccim) =
                (t.col("cp")?, t.col("cm")?, t.col("cip")?, t.col("cim")?);
            for row in &t.rows {
                let stream = loader.stream(t, row, cs)?;
                let cp = t.opt_number(row, ccp)?;
                let cm = t.opt_number(row, ccm)?;
                let cip = t.opt_number(row, ccip)?;
                let cim = t.opt_number(row, ccim)?;
                loader.inst.prices.push(Price { stream, cp, cm, cip, cim });
            }
        }
    }
    {
        let t = get("fv");
        if !t.rows.is_empty() {
            let (cs, ct, clo, chi) = (t.col("s")?, t.col("t")?, t.col("lo")?, t.col("hi")?);
            for row in &t.rows {
                let stream = loader.stream(t, row, cs)?;
                let period = loader.period(t, row, ct)?;
                let lo = t.opt_number(row, clo)?;
                let hi = t.opt_number(row, chi)?;
                loader.inst.fv_bounds.push(FlowBound { stream, period, lo, hi });
            }
        }
    }
    {
        let t = get("fq_bounds");
        if !t.rows.is_empty() {
            let (cs, cq, clo, chi) = (t.col("s")?, t.col("q")?, t.col("lo")?, t.col("hi")?);
            for row in &t.rows {
                let stream = loader.stream(t, row, cs)?;
                let quality = loader.quality(t, row, cq)?;
                let lo = t.opt_number(row, clo)?;
                let hi = t.opt_number(row, chi)?;
                loader.inst.fq_bounds.push(QualityBound { stream, quality, lo, hi });
            }
        }
    }

    Ok(loader.inst)
}
