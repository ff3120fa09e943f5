//! Port-stream hybrid topology: units as nodes, streams as first-class edges
//! carrying their own producing/consuming contexts and an inventory flag.
//!
//! A stream's "ports" are derived from the declared unit-stream memberships;
//! inventories attach to streams directly, so storage never changes the
//! topology.

use thiserror::Error;

use crate::schema::{
    BenchmarkInstance, Diagnostic, Severity, StreamId, StreamRole, UnitId, UnitKind,
};

#[derive(Debug, Clone)]
pub struct StreamRecord {
    pub id: StreamId,
    pub role: StreamRole,
    /// Units producing into this stream.
    pub producers: Vec<UnitId>,
    /// Units consuming from this stream.
    pub consumers: Vec<UnitId>,
    pub inventory_capable: bool,
}

#[derive(Debug, Clone)]
pub struct UnitNode {
    pub id: UnitId,
    pub kind: UnitKind,
    pub inlets: Vec<StreamId>,
    pub outlets: Vec<StreamId>,
}

#[derive(Debug, Clone)]
pub struct Network {
    pub nodes: Vec<UnitNode>,
    pub streams: Vec<StreamRecord>,
}

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("stream '{0}' is consumed but has no producer and is not a raw material")]
    OrphanStream(String),
    #[error("stream '{0}' is produced but has no consumer and is not a product")]
    SinklessStream(String),
}

/// Materialize the topology. Deterministic: identical instances yield
/// identical networks (ordering follows the declaration order).
pub fn build_network(inst: &BenchmarkInstance) -> Result<Network, NetworkError> {
    let mut streams: Vec<StreamRecord> = inst
        .streams
        .iter()
        .enumerate()
        .map(|(i, def)| StreamRecord {
            id: StreamId(i as u32),
            role: def.role,
            producers: Vec::new(),
            consumers: Vec::new(),
            inventory_capable: inst.is_storable(StreamId(i as u32)),
        })
        .collect();

    let mut nodes: Vec<UnitNode> = inst
        .units
        .iter()
        .enumerate()
        .map(|(i, def)| UnitNode {
            id: UnitId(i as u32),
            kind: def.kind,
            inlets: Vec::new(),
            outlets: Vec::new(),
        })
        .collect();

    for &(u, s) in &inst.iu {
        nodes[u.idx()].inlets.push(s);
        if !streams[s.idx()].consumers.contains(&u) {
            streams[s.idx()].consumers.push(u);
        }
    }
    for &(u, s) in &inst.ou {
        nodes[u.idx()].outlets.push(s);
        if !streams[s.idx()].producers.contains(&u) {
            streams[s.idx()].producers.push(u);
        }
    }

    for rec in &streams {
        let name = inst.stream_name(rec.id);
        let consumed = !rec.consumers.is_empty();
        let produced = !rec.producers.is_empty();
        if consumed && !produced && rec.role != StreamRole::Raw {
            return Err(NetworkError::OrphanStream(name.to_string()));
        }
        if produced && !consumed && rec.role != StreamRole::Product {
            return Err(NetworkError::SinklessStream(name.to_string()));
        }
    }

    Ok(Network { nodes, streams })
}

impl Network {
    /// Structural soundness beyond what `build_network` rejects outright:
    /// unreachable units, multi-product blenders, disconnected ports.
    pub fn check_topology(&self, inst: &BenchmarkInstance) -> Vec<Diagnostic> {
        let mut out = Vec::new();

        for node in &self.nodes {
            if node.inlets.is_empty() {
                out.push(Diagnostic {
                    severity: Severity::Warning,
                    locus: format!("unit/{}", inst.unit_name(node.id)),
                    message: "unit has no inlet streams".into(),
                });
            }
            if node.outlets.is_empty() {
                out.push(Diagnostic {
                    severity: Severity::Warning,
                    locus: format!("unit/{}", inst.unit_name(node.id)),
                    message: "unit has no outlet streams".into(),
                });
            }
            if node.kind == UnitKind::Blender {
                let products: Vec<_> = node
                    .outlets
                    .iter()
                    .filter(|&&s| self.streams[s.idx()].role == StreamRole::Product)
                    .collect();
                if products.len() > 1 {
                    out.push(Diagnostic {
                        severity: Severity::Error,
                        locus: format!("unit/{}", inst.unit_name(node.id)),
                        message: format!(
                            "blender is associated with {} final products",
                            products.len()
                        ),
                    });
                }
            }
        }

        // Reachability from raw materials.
        let mut stream_reached = vec![false; self.streams.len()];
        let mut unit_reached = vec![false; self.nodes.len()];
        let mut frontier: Vec<StreamId> = self
            .streams
            .iter()
            .filter(|r| r.role == StreamRole::Raw)
            .map(|r| r.id)
            .collect();
        for s in &frontier {
            stream_reached[s.idx()] = true;
        }
        while let Some(s) = frontier.pop() {
            for &u in &self.streams[s.idx()].consumers {
                if !unit_reached[u.idx()] {
                    unit_reached[u.idx()] = true;
                    for &out_s in &self.nodes[u.idx()].outlets {
                        if !stream_reached[out_s.idx()] {
                            stream_reached[out_s.idx()] = true;
                            frontier.push(out_s);
                        }
                    }
                }
            }
        }
        for node in &self.nodes {
            if !unit_reached[node.idx()] {
                out.push(Diagnostic {
                    severity: Severity::Warning,
                    locus: format!("unit/{}", inst.unit_name(node.id)),
                    message: "unit is unreachable from any raw material".into(),
                });
            }
        }

        // Self-recycles: a unit both producing and consuming the same stream.
        for rec in &self.streams {
            for u in &rec.producers {
                if rec.consumers.contains(u) {
                    out.push(Diagnostic {
                        severity: Severity::Warning,
                        locus: format!("stream/{}", inst.stream_name(rec.id)),
                        message: "stream recycles into its own producer".into(),
                    });
                }
            }
        }

        out
    }

    /// Partition the units into `k` blocks by greedy agglomeration on the
    /// unit adjacency induced by streams, merging the pair of blocks with the
    /// most connecting streams until `k` blocks remain. Returns the blocks
    /// and the streams crossing between them. Deterministic.
    pub fn spatial_partition(&self, k: usize) -> Partition {
        let n = self.nodes.len();
        let k = k.clamp(1, n.max(1));
        let mut block_of: Vec<usize> = (0..n).collect();
        let mut blocks: Vec<Vec<UnitId>> = (0..n).map(|i| vec![UnitId(i as u32)]).collect();
        let mut alive: Vec<bool> = vec![true; n];
        let mut alive_count = n;

        // Edge weights between unit pairs: number of streams connecting them.
        let mut edges: Vec<(usize, usize, usize)> = Vec::new();
        {
            let mut weight: std::collections::HashMap<(usize, usize), usize> =
                std::collections::HashMap::new();
            for rec in &self.streams {
                for &p in &rec.producers {
                    for &c in &rec.consumers {
                        if p != c {
                            let key = (p.idx().min(c.idx()), p.idx().max(c.idx()));
                            *weight.entry(key).or_insert(0) += 1;
                        }
                    }
                }
            }
            for ((a, b), w) in weight {
                edges.push((a, b, w));
            }
            edges.sort();
        }

        while alive_count > k {
            // Heaviest inter-block connection; ties resolved by lowest ids.
            let mut best: Option<(usize, usize, usize)> = None;
            for &(a, b, w) in &edges {
                let (ba, bb) = (block_of[a], block_of[b]);
                if ba == bb {
                    continue;
                }
                let key = (ba.min(bb), ba.max(bb));
                match best {
                    Some((bw, x, y)) if (w, (x, y)) <= (bw, key) => {
                        if w > bw {
                            best = Some((w, key.0, key.1));
                        }
                    }
                    Some((bw, _, _)) if w > bw => best = Some((w, key.0, key.1)),
                    None => best = Some((w, key.0, key.1)),
                    _ => {}
                }
            }
            let (_, ba, bb) = match best {
                Some(b) => b,
                // Disconnected remainder: merge the two lowest-numbered blocks.
                None => {
                    let mut it = (0..n).filter(|&i| alive[i]);
                    let a = it.next().unwrap();
                    let b = it.next().unwrap();
                    (0, a, b)
                }
            };
            let moved = std::mem::take(&mut blocks[bb]);
            for u in &moved {
                block_of[u.idx()] = ba;
            }
            blocks[ba].extend(moved);
            alive[bb] = false;
            alive_count -= 1;
        }

        let mut final_blocks: Vec<Vec<UnitId>> = blocks
            .into_iter()
            .enumerate()
            .filter(|(i, _)| alive[*i])
            .map(|(_, b)| b)
            .collect();
        for b in &mut final_blocks {
            b.sort();
        }
        final_blocks.sort();

        let mut assignment = vec![0usize; n];
        for (bi, b) in final_blocks.iter().enumerate() {
            for u in b {
                assignment[u.idx()] = bi;
            }
        }

        let mut cut_streams: Vec<StreamId> = Vec::new();
        for rec in &self.streams {
            let crosses = rec.producers.iter().any(|p| {
                rec.consumers
                    .iter()
                    .any(|c| assignment[p.idx()] != assignment[c.idx()])
            });
            if crosses {
                cut_streams.push(rec.id);
            }
        }

        Partition { blocks: final_blocks, cut_streams }
    }

    /// Node/edge listing for external visualization tools.
    pub fn export_graph(&self, inst: &BenchmarkInstance) -> String {
        let mut out = String::from("record\tname\tkind\tfrom\tto\n");
        for node in &self.nodes {
            out.push_str(&format!(
                "node\t{}\t{}\t\t\n",
                inst.unit_name(node.id),
                node.kind.code()
            ));
        }
        for rec in &self.streams {
            let from = rec
                .producers
                .iter()
                .map(|&u| inst.unit_name(u))
                .collect::<Vec<_>>()
                .join(",");
            let to = rec
                .consumers
                .iter()
                .map(|&u| inst.unit_name(u))
                .collect::<Vec<_>>()
                .join(",");
            let kind = match (rec.role, rec.inventory_capable) {
                (StreamRole::Raw, _) => "raw",
                (StreamRole::Product, _) => "product",
                (_, true) => "storable",
                _ => "stream",
            };
            out.push_str(&format!(
                "edge\t{}\t{}\t{}\t{}\n",
                inst.stream_name(rec.id),
                kind,
                from,
                to
            ));
        }
        out
    }
}

impl UnitNode {
    fn idx(&self) -> usize {
        self.id.idx()
    }
}

#[derive(Debug, Clone)]
pub struct Partition {
    pub blocks: Vec<Vec<UnitId>>,
    pub cut_streams: Vec<StreamId>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::StreamRole;

    fn single_unit_toy() -> BenchmarkInstance {
        let mut inst = BenchmarkInstance::new("toy");
        inst.add_period("t1");
        let u = inst.add_unit("hx", UnitKind::ProcessFixed);
        let m = inst.add_batch(u, "b");
        let feed = inst.add_stream("feed", StreamRole::Raw);
        let prod = inst.add_stream("prod", StreamRole::Product);
        inst.connect_in(u, m, feed);
        inst.connect_out(u, m, prod);
        inst.base_yields.push(crate::schema::BaseYield { unit: u, batch: m, stream: feed, value: 1.0 });
        inst.base_yields.push(crate::schema::BaseYield { unit: u, batch: m, stream: prod, value: 0.9 });
        inst
    }

    #[test]
    fn toy_network_counts() {
        let inst = single_unit_toy();
        let net = build_network(&inst).unwrap();
        assert_eq!(net.nodes.len(), 1);
        assert_eq!(net.streams.len(), 2);
        assert!(net.check_topology(&inst).is_empty());
    }

    #[test]
    fn orphan_stream_rejected() {
        let mut inst = single_unit_toy();
        let u = inst.unit_id("hx").unwrap();
        let m = inst.batch_id(u, "b").unwrap();
        // consumed but never produced, and not raw
        let ghost = inst.add_stream("ghost", StreamRole::Intermediate);
        inst.connect_in(u, m, ghost);
        let err = build_network(&inst).unwrap_err();
        assert!(matches!(err, NetworkError::OrphanStream(_)));
    }

    #[test]
    fn blender_with_two_products_flagged() {
        let mut inst = BenchmarkInstance::new("t");
        inst.add_period("t1");
        let b = inst.add_unit("bld", UnitKind::Blender);
        let c = inst.add_stream("comp", StreamRole::Raw);
        let p1 = inst.add_stream("p1", StreamRole::Product);
        let p2 = inst.add_stream("p2", StreamRole::Product);
        inst.iu.push((b, c));
        inst.ou.push((b, p1));
        inst.ou.push((b, p2));
        let net = build_network(&inst).unwrap();
        let diags = net.check_topology(&inst);
        assert!(diags
            .iter()
            .any(|d| d.severity == Severity::Error && d.message.contains("final products")));
    }

    #[test]
    fn unit_without_inlets_warned() {
        let mut inst = BenchmarkInstance::new("t");
        inst.add_period("t1");
        let u = inst.add_unit("spl", UnitKind::Splitter);
        let p = inst.add_stream("p", StreamRole::Product);
        inst.ou.push((u, p));
        let net = build_network(&inst).unwrap();
        let diags = net.check_topology(&inst);
        assert!(diags
            .iter()
            .any(|d| d.severity == Severity::Warning && d.message.contains("no inlet")));
    }

    fn chain(n: usize) -> (BenchmarkInstance, Network) {
        let mut inst = BenchmarkInstance::new("chain");
        inst.add_period("t1");
        let mut prev = inst.add_stream("s0", StreamRole::Raw);
        for i in 0..n {
            let u = inst.add_unit(format!("u{}", i), UnitKind::Splitter);
            let next = inst.add_stream(
                format!("s{}", i + 1),
                if i + 1 == n { StreamRole::Product } else { StreamRole::Intermediate },
            );
            inst.iu.push((u, prev));
            inst.ou.push((u, next));
            prev = next;
        }
        let net = build_network(&inst).unwrap();
        (inst, net)
    }

    #[test]
    fn partition_extremes() {
        let (_, net) = chain(5);
        let p1 = net.spatial_partition(1);
        assert_eq!(p1.blocks.len(), 1);
        assert!(p1.cut_streams.is_empty());

        let pn = net.spatial_partition(5);
        assert_eq!(pn.blocks.len(), 5);
        // all four inter-unit streams cross
        assert_eq!(pn.cut_streams.len(), 4);
    }

    #[test]
    fn partition_covers_units_exactly_once() {
        let (_, net) = chain(7);
        for k in 1..=7 {
            let p = net.spatial_partition(k);
            let mut seen = vec![0usize; 7];
            for b in &p.blocks {
                for u in b {
                    seen[u.idx()] += 1;
                }
            }
            assert!(seen.iter().all(|&c| c == 1), "k={} cover broken", k);
        }
    }

    #[test]
    fn partition_deterministic() {
        let (_, net) = chain(6);
        let a = net.spatial_partition(3);
        let b = net.spatial_partition(3);
        assert_eq!(a.blocks, b.blocks);
        assert_eq!(a.cut_streams, b.cut_streams);
    }
}
