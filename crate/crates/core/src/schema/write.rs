//! Instance bundle writer. Inverse of the loader: `load(write(inst))` is
//! identity on all sets and parameters.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use super::*;

fn num(v: f64) -> String {
    // Shortest representation that round-trips through f64.
    format!("{:?}", v)
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn write_bundle(inst: &BenchmarkInstance, dir: impl AsRef<Path>) -> io::Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;

    let mut manifest = String::from("table\tfile\n");
    let mut emit = |table: &str, header: &str, rows: Vec<String>| -> io::Result<()> {
        if rows.is_empty() {
            return Ok(());
        }
        let file = format!("{}.tsv", table);
        let mut body = String::new();
        writeln!(body, "{}", header).unwrap();
        for r in rows {
            writeln!(body, "{}", r).unwrap();
        }
        fs::write(dir.join(&file), body)?;
        writeln!(manifest, "{}\t{}", table, file).unwrap();
        Ok(())
    };

    emit("periods", "t", inst.periods.clone())?;
    emit(
        "qualities",
        "q\tclass\tunit",
        inst.qualities
            .iter()
            .map(|q| format!("{}\t{}\t{}", q.name, q.class.code(), q.unit))
            .collect(),
    )?;
    emit(
        "streams",
        "s\trole",
        inst.streams
            .iter()
            .map(|s| format!("{}\t{}", s.name, s.role.code()))
            .collect(),
    )?;
    emit(
        "units",
        "u\tkind\trb",
        inst.units
            .iter()
            .map(|u| {
                format!("{}\t{}\t{}", u.name, u.kind.code(), if u.proportional { "1" } else { "" })
            })
            .collect(),
    )?;
    emit(
        "batches",
        "u\tm",
        inst.batches
            .iter()
            .map(|b| format!("{}\t{}", inst.unit_name(b.unit), b.name))
            .collect(),
    )?;
    emit(
        "vbatches",
        "u\tm",
        inst.vbatches
            .iter()
            .map(|b| format!("{}\t{}", inst.unit_name(b.unit), b.name))
            .collect(),
    )?;
    emit(
        "capacities",
        "c\tkind",
        inst.capacities
            .iter()
            .map(|c| {
                format!(
                    "{}\t{}",
                    c.name,
                    match c.kind {
                        CapacityKind::Inlet => "IN",
                        CapacityKind::Outlet => "OUT",
                    }
                )
            })
            .collect(),
    )?;
    emit(
        "iu",
        "u\ts",
        inst.iu
            .iter()
            .map(|&(u, s)| format!("{}\t{}", inst.unit_name(u), inst.stream_name(s)))
            .collect(),
    )?;
    emit(
        "ou",
        "u\ts",
        inst.ou
            .iter()
            .map(|&(u, s)| format!("{}\t{}", inst.unit_name(u), inst.stream_name(s)))
            .collect(),
    )?;
    emit(
        "im",
        "u\tm\ts",
        inst.im
            .iter()
            .map(|&(u, m, s)| {
                format!("{}\t{}\t{}", inst.unit_name(u), inst.batch_name(m), inst.stream_name(s))
            })
            .collect(),
    )?;
    emit(
        "om",
        "u\tm\ts",
        inst.om
            .iter()
            .map(|&(u, m, s)| {
                format!("{}\t{}\t{}", inst.unit_name(u), inst.batch_name(m), inst.stream_name(s))
            })
            .collect(),
    )?;
    emit(
        "sc",
        "u\tm\ts\ts2\tphi",
        inst.swing
            .iter()
            .map(|sc| {
                format!(
                    "{}\t{}\t{}\t{}\t{}",
                    inst.unit_name(sc.unit),
                    inst.batch_name(sc.batch),
                    inst.stream_name(sc.receiver),
                    inst.stream_name(sc.swing),
                    num(sc.phi)
                )
            })
            .collect(),
    )?;
    emit(
        "sq",
        "s\tq",
        inst.sq
            .iter()
            .map(|&(s, q)| format!("{}\t{}", inst.stream_name(s), inst.quality_name(q)))
            .collect(),
    )?;
    emit(
        "fix",
        "s\tq\tfq0",
        inst.fix
            .iter()
            .map(|f| {
                format!(
                    "{}\t{}\t{}",
                    inst.stream_name(f.stream),
                    inst.quality_name(f.quality),
                    num(f.value)
                )
            })
            .collect(),
    )?;
    emit(
        "qt",
        "s\ts2\tq\talpha",
        inst.qt
            .iter()
            .map(|q| {
                format!(
                    "{}\t{}\t{}\t{}",
                    inst.stream_name(q.src),
                    inst.stream_name(q.dst),
                    inst.quality_name(q.quality),
                    num(q.alpha)
                )
            })
            .collect(),
    )?;
    emit(
        "mfq",
        "q\tlo\thi",
        inst.cru
            .iter()
            .map(|w| format!("{}\t{}\t{}", inst.quality_name(w.quality), opt(w.lo), opt(w.hi)))
            .collect(),
    )?;
    emit(
        "cdumq",
        "u\tm\tq\tlo\thi",
        inst.cdumq
            .iter()
            .map(|w| {
                format!(
                    "{}\t{}\t{}\t{}\t{}",
                    inst.unit_name(w.unit),
                    inst.batch_name(w.batch),
                    inst.quality_name(w.quality),
                    opt(w.lo),
                    opt(w.hi)
                )
            })
            .collect(),
    )?;
    emit(
        "dbsq",
        "u\tm\ts\tq",
        inst.dbsq
            .iter()
            .map(|d| {
                format!(
                    "{}\t{}\t{}\t{}",
                    inst.unit_name(d.unit),
                    inst.batch_name(d.batch),
                    inst.stream_name(d.stream),
                    inst.quality_name(d.quality)
                )
            })
            .collect(),
    )?;
    emit(
        "vmq",
        "u\tm\ts\tq\tw",
        inst.vmq
            .iter()
            .map(|v| {
                let vb = &inst.vbatches[v.vbatch.idx()];
                format!(
                    "{}\t{}\t{}\t{}\t{}",
                    inst.unit_name(vb.unit),
                    vb.name,
                    inst.stream_name(v.stream),
                    inst.quality_name(v.quality),
                    num(v.w)
                )
            })
            .collect(),
    )?;
    emit(
        "vbq",
        "u\tm\tq\tlo\thi",
        inst.vbq
            .iter()
            .map(|w| {
                let vb = &inst.vbatches[w.vbatch.idx()];
                format!(
                    "{}\t{}\t{}\t{}\t{}",
                    inst.unit_name(vb.unit),
                    vb.name,
                    inst.quality_name(w.quality),
                    opt(w.lo),
                    opt(w.hi)
                )
            })
            .collect(),
    )?;
    emit(
        "caps",
        "c\ts",
        inst.caps
            .iter()
            .map(|&(c, s)| {
                format!("{}\t{}", inst.capacities[c.idx()].name, inst.stream_name(s))
            })
            .collect(),
    )?;
    emit(
        "fvc",
        "c\tt\tlo\thi",
        inst.cap_bounds
            .iter()
            .map(|b| {
                format!(
                    "{}\t{}\t{}\t{}",
                    inst.capacities[b.capacity.idx()].name,
                    inst.periods[b.period as usize],
                    opt(b.lo),
                    opt(b.hi)
                )
            })
            .collect(),
    )?;
    emit(
        "usp",
        "u\ts",
        inst.usp
            .iter()
            .map(|&(u, s)| format!("{}\t{}", inst.unit_name(u), inst.stream_name(s)))
            .collect(),
    )?;
    emit(
        "fc",
        "u\ts\tlo\thi",
        inst.fc_bounds
            .iter()
            .map(|b| {
                format!(
                    "{}\t{}\t{}\t{}",
                    inst.unit_name(b.unit),
                    inst.stream_name(b.stream),
                    opt(b.lo),
                    opt(b.hi)
                )
            })
            .collect(),
    )?;
    emit(
        "fq_crd",
        "u\tm\ts\tq\tvalue",
        inst.crude_props
            .iter()
            .map(|p| {
                format!(
                    "{}\t{}\t{}\t{}\t{}",
                    inst.unit_name(p.unit),
                    inst.batch_name(p.batch),
                    inst.stream_name(p.stream),
                    inst.quality_name(p.quality),
                    num(p.value)
                )
            })
            .collect(),
    )?;
    emit(
        "fq_cut",
        "u\tm\ts\ts2\tq\tvalue",
        inst.cut_props
            .iter()
            .map(|p| {
                format!(
                    "{}\t{}\t{}\t{}\t{}\t{}",
                    inst.unit_name(p.unit),
                    inst.batch_name(p.batch),
                    inst.stream_name(p.cut),
                    inst.stream_name(p.crude),
                    inst.quality_name(p.quality),
                    num(p.value)
                )
            })
            .collect(),
    )?;
    emit(
        "y",
        "u\tm\ts\ts2\tvalue",
        inst.yields
            .iter()
            .map(|p| {
                format!(
                    "{}\t{}\t{}\t{}\t{}",
                    inst.unit_name(p.unit),
                    inst.batch_name(p.batch),
                    inst.stream_name(p.cut),
                    inst.stream_name(p.crude),
                    num(p.value)
                )
            })
            .collect(),
    )?;
    emit(
        "gamma",
        "u\tm\ts\tvalue",
        inst.base_yields
            .iter()
            .map(|p| {
                format!(
                    "{}\t{}\t{}\t{}",
                    inst.unit_name(p.unit),
                    inst.batch_name(p.batch),
                    inst.stream_name(p.stream),
                    num(p.value)
                )
            })
            .collect(),
    )?;
    emit(
        "b",
        "u\tm\tq\tvalue",
        inst.base_props
            .iter()
            .map(|p| {
                format!(
                    "{}\t{}\t{}\t{}",
                    inst.unit_name(p.unit),
                    inst.batch_name(p.batch),
                    inst.quality_name(p.quality),
                    num(p.value)
                )
            })
            .collect(),
    )?;
    emit(
        "delta_step",
        "u\tm\tq\tvalue",
        inst.delta_steps
            .iter()
            .map(|p| {
                format!(
                    "{}\t{}\t{}\t{}",
                    inst.unit_name(p.unit),
                    inst.batch_name(p.batch),
                    inst.quality_name(p.quality),
                    num(p.value)
                )
            })
            .collect(),
    )?;
    emit(
        "delta_sens",
        "u\tm\ts\tq\tvalue",
        inst.yield_sens
            .iter()
            .map(|p| {
                format!(
                    "{}\t{}\t{}\t{}\t{}",
                    inst.unit_name(p.unit),
                    inst.batch_name(p.batch),
                    inst.stream_name(p.stream),
                    inst.quality_name(p.quality),
                    num(p.value)
                )
            })
            .collect(),
    )?;
    emit(
        "beta",
        "u\ts\ts2\tvalue",
        inst.blend_ratios
            .iter()
            .map(|p| {
                format!(
                    "{}\t{}\t{}\t{}",
                    inst.unit_name(p.unit),
                    inst.stream_name(p.product),
                    inst.stream_name(p.component),
                    num(p.beta)
                )
            })
            .collect(),
    )?;
    emit(
        "fqb",
        "u\tq\tlo\thi",
        inst.blend_specs
            .iter()
            .map(|b| {
                format!(
                    "{}\t{}\t{}\t{}",
                    inst.unit_name(b.unit),
                    inst.quality_name(b.quality),
                    opt(b.lo),
                    opt(b.hi)
                )
            })
            .collect(),
    )?;
    emit(
        "inventory",
        "s\tl0",
        inst.inventory
            .iter()
            .map(|i| format!("{}\t{}", inst.stream_name(i.stream), num(i.l0)))
            .collect(),
    )?;
    emit(
        "l_bounds",
        "s\tt\tlo\thi",
        inst.level_bounds
            .iter()
            .map(|b| {
                format!(
                    "{}\t{}\t{}\t{}",
                    inst.stream_name(b.stream),
                    inst.periods[b.period as usize],
                    opt(b.lo),
                    opt(b.hi)
                )
            })
            .collect(),
    )?;
    emit(
        "prices",
        "s\tcp\tcm\tcip\tcim",
        inst.prices
            .iter()
            .map(|p| {
                format!(
                    "{}\t{}\t{}\t{}\t{}",
                    inst.stream_name(p.stream),
                    opt(p.cp),
                    opt(p.cm),
                    opt(p.cip),
                    opt(p.cim)
                )
            })
            .collect(),
    )?;
    emit(
        "fv",
        "s\tt\tlo\thi",
        inst.fv_bounds
            .iter()
            .map(|b| {
                format!(
                    "{}\t{}\t{}\t{}",
                    inst.stream_name(b.stream),
                    inst.periods[b.period as usize],
                    opt(b.lo),
                    opt(b.hi)
                )
            })
            .collect(),
    )?;
    emit(
        "fq_bounds",
        "s\tq\tlo\thi",
        inst.fq_bounds
            .iter()
            .map(|b| {
                format!(
                    "{}\t{}\t{}\t{}",
                    inst.stream_name(b.stream),
                    inst.quality_name(b.quality),
                    opt(b.lo),
                    opt(b.hi)
                )
            })
            .collect(),
    )?;

    fs::write(dir.join("manifest.tsv"), manifest)?;
    Ok(())
}
