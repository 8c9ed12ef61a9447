//! Small static kd-tree over `D`-dimensional points, used for
//! nearest-neighbour projection and the outlier filter.

/// Kd-tree storing a payload index per point. Built once, queried many times.
#[derive(Debug, Clone)]
pub struct KdTree<const D: usize> {
    // Median-split tree flattened into the slice: the midpoint of a range is
    // the node, the halves are its subtrees.
    points: Vec<[f64; D]>,
    payload: Vec<usize>,
}

#[derive(Debug, Clone, Copy)]
struct Neighbor {
    dist_sq: f64,
    payload: usize,
}

trait Collector {
    fn offer(&mut self, n: Neighbor);
    fn radius_sq(&self) -> f64;
}

struct NearestOne {
    best: Neighbor,
}

impl Collector for NearestOne {
    fn offer(&mut self, n: Neighbor) {
        if n.dist_sq < self.best.dist_sq
            || (n.dist_sq == self.best.dist_sq && n.payload < self.best.payload)
        {
            self.best = n;
        }
    }

    fn radius_sq(&self) -> f64 {
        self.best.dist_sq
    }
}

/// Worst-first bounded list kept sorted; k stays small for every caller.
struct NearestK {
    k: usize,
    items: Vec<Neighbor>,
}

impl Collector for NearestK {
    fn offer(&mut self, n: Neighbor) {
        let pos = self
            .items
            .binary_search_by(|m| {
                m.dist_sq
                    .partial_cmp(&n.dist_sq)
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(m.payload.cmp(&n.payload))
            })
            .unwrap_or_else(|e| e);
        if pos < self.k {
            self.items.insert(pos, n);
            if self.items.len() > self.k {
                self.items.pop();
            }
        }
    }

    fn radius_sq(&self) -> f64 {
        if self.items.len() == self.k {
            self.items.last().map_or(f64::INFINITY, |n| n.dist_sq)
        } else {
            f64::INFINITY
        }
    }
}

impl<const D: usize> KdTree<D> {
    pub fn build(points: Vec<[f64; D]>) -> Self {
        let mut payload: Vec<usize> = (0..points.len()).collect();
        let mut pts = points;
        if !pts.is_empty() {
            let len = pts.len();
            Self::build_rec(&mut pts, &mut payload, 0, 0, len);
        }
        Self { points: pts, payload }
    }

    fn build_rec(pts: &mut [[f64; D]], payload: &mut [usize], axis: usize, lo: usize, hi: usize) {
        if hi - lo <= 1 {
            return;
        }
        let mid = (lo + hi) / 2;
        let mut idx: Vec<usize> = (lo..hi).collect();
        idx.sort_by(|&a, &b| {
            pts[a][axis]
                .partial_cmp(&pts[b][axis])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(payload[a].cmp(&payload[b]))
        });
        let reordered_pts: Vec<[f64; D]> = idx.iter().map(|&i| pts[i]).collect();
        let reordered_payload: Vec<usize> = idx.iter().map(|&i| payload[i]).collect();
        pts[lo..hi].copy_from_slice(&reordered_pts);
        payload[lo..hi].copy_from_slice(&reordered_payload);
        let next = (axis + 1) % D;
        Self::build_rec(pts, payload, next, lo, mid);
        Self::build_rec(pts, payload, next, mid + 1, hi);
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Payload index of the nearest point, with its squared distance.
    pub fn nearest(&self, query: &[f64; D]) -> Option<(usize, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let mut collector = NearestOne {
            best: Neighbor {
                dist_sq: f64::INFINITY,
                payload: usize::MAX,
            },
        };
        self.search(query, 0, 0, self.points.len(), &mut collector);
        Some((collector.best.payload, collector.best.dist_sq))
    }

    /// The `k` nearest payload indices, closest first.
    pub fn k_nearest(&self, query: &[f64; D], k: usize) -> Vec<(usize, f64)> {
        if self.points.is_empty() || k == 0 {
            return Vec::new();
        }
        let mut collector = NearestK {
            k,
            items: Vec::with_capacity(k + 1),
        };
        self.search(query, 0, 0, self.points.len(), &mut collector);
        collector
            .items
            .into_iter()
            .map(|n| (n.payload, n.dist_sq))
            .collect()
    }

    fn search(
        &self,
        query: &[f64; D],
        axis: usize,
        lo: usize,
        hi: usize,
        collector: &mut impl Collector,
    ) {
        if lo >= hi {
            return;
        }
        let mid = (lo + hi) / 2;
        let point = &self.points[mid];
        let mut dist_sq = 0.0;
        for d in 0..D {
            let delta = point[d] - query[d];
            dist_sq += delta * delta;
        }
        collector.offer(Neighbor {
            dist_sq,
            payload: self.payload[mid],
        });
        let next = (axis + 1) % D;
        let delta = query[axis] - point[axis];
        let (near, far) = if delta < 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.search(query, next, near.0, near.1, collector);
        if delta * delta <= collector.radius_sq() {
            self.search(query, next, far.0, far.1, collector);
        }
    }
}
