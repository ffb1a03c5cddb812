//! Bucketed grid index over node xy positions. Supports radius and
//! nearest-neighbor queries; deterministic iteration order throughout.

use std::collections::BTreeMap;

use crate::graph::NodeId;

#[derive(Debug, Clone, PartialEq)]
pub struct GridIndex {
    cell: f64,
    buckets: BTreeMap<(i64, i64), Vec<(NodeId, [f64; 2])>>,
    len: usize,
}

impl GridIndex {
    pub fn new(cell: f64) -> Self {
        assert!(cell > 0.0);
        Self {
            cell,
            buckets: BTreeMap::new(),
            len: 0,
        }
    }

    fn key(&self, p: [f64; 2]) -> (i64, i64) {
        (
            (p[0] / self.cell).floor() as i64,
            (p[1] / self.cell).floor() as i64,
        )
    }

    pub fn cell(&self) -> f64 {
        self.cell
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn insert(&mut self, id: NodeId, p: [f64; 2]) {
        self.buckets.entry(self.key(p)).or_default().push((id, p));
        self.len += 1;
    }

    pub fn remove(&mut self, id: NodeId, p: [f64; 2]) {
        let key = self.key(p);
        if let Some(bucket) = self.buckets.get_mut(&key) {
            if let Some(i) = bucket.iter().position(|(n, _)| *n == id) {
                bucket.swap_remove(i);
                self.len -= 1;
                if bucket.is_empty() {
                    self.buckets.remove(&key);
                }
            }
        }
    }

    /// Ids within `radius` of `p`, sorted by id.
    pub fn within(&self, p: [f64; 2], radius: f64) -> Vec<NodeId> {
        let mut out = Vec::new();
        let r2 = radius * radius;
        let lo = self.key([p[0] - radius, p[1] - radius]);
        let hi = self.key([p[0] + radius, p[1] + radius]);
        let cells = (hi.0 - lo.0 + 1).saturating_mul(hi.1 - lo.1 + 1) as u128;
        let scan = |bucket: &Vec<(NodeId, [f64; 2])>, out: &mut Vec<NodeId>| {
            for (id, q) in bucket {
                let dx = q[0] - p[0];
                let dy = q[1] - p[1];
                if dx * dx + dy * dy <= r2 {
                    out.push(*id);
                }
            }
        };
        if cells > self.buckets.len() as u128 {
            // wide query: cheaper to test every occupied bucket
            for ((kx, ky), bucket) in &self.buckets {
                if *kx < lo.0 || *kx > hi.0 || *ky < lo.1 || *ky > hi.1 {
                    continue;
                }
                scan(bucket, &mut out);
            }
        } else {
            for kx in lo.0..=hi.0 {
                for ky in lo.1..=hi.1 {
                    if let Some(bucket) = self.buckets.get(&(kx, ky)) {
                        scan(bucket, &mut out);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Closest id to `p` with its distance; ties broken by smaller id.
    pub fn nearest(&self, p: [f64; 2]) -> Option<(NodeId, f64)> {
        if self.len == 0 {
            return None;
        }
        let center = self.key(p);
        // Any point in a bucket at Chebyshev cell distance k is at least
        // (k-1)*cell away, so once best <= ring*cell no later ring can win.
        let max_ring = self
            .buckets
            .keys()
            .map(|(kx, ky)| (kx - center.0).abs().max((ky - center.1).abs()))
            .max()
            .unwrap();
        let mut best: Option<(NodeId, f64)> = None;
        for ring in 0..=max_ring {
            for kx in center.0 - ring..=center.0 + ring {
                for ky in center.1 - ring..=center.1 + ring {
                    if ring > 0 && (kx - center.0).abs() != ring && (ky - center.1).abs() != ring {
                        continue;
                    }
                    if let Some(bucket) = self.buckets.get(&(kx, ky)) {
                        for (id, q) in bucket {
                            let d = ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt();
                            match best {
                                Some((bid, bd)) if d > bd || (d == bd && *id >= bid) => {}
                                _ => best = Some((*id, d)),
                            }
                        }
                    }
                }
            }
            if let Some((_, bd)) = best {
                if bd <= ring as f64 * self.cell {
                    break;
                }
            }
        }
        best
    }
}
