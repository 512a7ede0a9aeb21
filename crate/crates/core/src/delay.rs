//! Formation graph with per-directed-edge delays, and timestamped sample
//! buffers that deliver delayed neighbor positions.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::Vec2;

/// One directed communication link: robot `to` receives robot `from`'s
/// position delayed by `delay` seconds, and maintains `distance` to it.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DirectedEdge {
    pub from: usize,
    pub to: usize,
    /// Desired inter-robot distance d_ij (m).
    pub distance: f64,
    /// Communication delay T_ij (s) on this direction of the link.
    pub delay: f64,
}

/// Undirected formation graph stored as directed edges so that per-direction
/// delays (and symmetry violations) are representable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Topology {
    pub n_robots: usize,
    pub edges: Vec<DirectedEdge>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TopologyError {
    #[error("edge ({from},{to}): vertex index out of range for {n} robots")]
    IndexOutOfRange { from: usize, to: usize, n: usize },
    #[error("edge ({from},{to}): self-loop")]
    SelfLoop { from: usize, to: usize },
    #[error("edge set not symmetric: ({from},{to}) has no reverse edge")]
    NotSymmetric { from: usize, to: usize },
    #[error("edge ({from},{to}): duplicate directed edge")]
    Duplicate { from: usize, to: usize },
    #[error("edge ({from},{to}): nonpositive desired distance {distance}")]
    NonpositiveDistance { from: usize, to: usize, distance: f64 },
    #[error("edge ({from},{to}): desired distance differs from reverse edge ({d_rev} vs {distance})")]
    AsymmetricDistance { from: usize, to: usize, distance: f64, d_rev: f64 },
    #[error("edge ({from},{to}): negative delay {delay}")]
    NegativeDelay { from: usize, to: usize, delay: f64 },
}

impl Topology {
    /// Checks the structural invariants and reports the first violation.
    pub fn validate(&self) -> Result<(), TopologyError> {
        for e in &self.edges {
            if e.from >= self.n_robots || e.to >= self.n_robots {
                return Err(TopologyError::IndexOutOfRange {
                    from: e.from,
                    to: e.to,
                    n: self.n_robots,
                });
            }
            if e.from == e.to {
                return Err(TopologyError::SelfLoop { from: e.from, to: e.to });
            }
            if !(e.distance > 0.0) || !e.distance.is_finite() {
                return Err(TopologyError::NonpositiveDistance {
                    from: e.from,
                    to: e.to,
                    distance: e.distance,
                });
            }
            if e.delay < 0.0 || !e.delay.is_finite() {
                return Err(TopologyError::NegativeDelay {
                    from: e.from,
                    to: e.to,
                    delay: e.delay,
                });
            }
            if self
                .edges
                .iter()
                .filter(|o| o.from == e.from && o.to == e.to)
                .count()
                > 1
            {
                return Err(TopologyError::Duplicate { from: e.from, to: e.to });
            }
            match self.edges.iter().find(|o| o.from == e.to && o.to == e.from) {
                None => {
                    return Err(TopologyError::NotSymmetric { from: e.from, to: e.to })
                }
                Some(rev) if rev.distance != e.distance => {
                    return Err(TopologyError::AsymmetricDistance {
                        from: e.from,
                        to: e.to,
                        distance: e.distance,
                        d_rev: rev.distance,
                    })
                }
                Some(_) => {}
            }
        }
        Ok(())
    }

    /// Directed edges whose receiver is robot `i` (its in-neighborhood).
    pub fn incoming(&self, i: usize) -> impl Iterator<Item = &DirectedEdge> {
        self.edges.iter().filter(move |e| e.to == i)
    }

    /// Unordered edge pairs (i < j) with their desired distance, in first
    /// appearance order. Used for per-edge trace columns and metrics.
    pub fn undirected_edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out: Vec<(usize, usize, f64)> = Vec::new();
        for e in &self.edges {
            let (a, b) = if e.from < e.to { (e.from, e.to) } else { (e.to, e.from) };
            if !out.iter().any(|&(i, j, _)| i == a && j == b) {
                out.push((a, b, e.distance));
            }
        }
        out
    }
}

/// Timestamped ring buffer delivering the delayed position z(t − T) by
/// linear interpolation between bracketing samples.
#[derive(Debug, Clone)]
pub struct DelayLine {
    delay: f64,
    /// Extra history kept beyond the delay horizon before eviction; set to
    /// one control period by the simulator.
    retention_margin: f64,
    buffer: VecDeque<(f64, Vec2)>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DelayLineError {
    #[error("non-monotone timestamp: {t} is not after newest sample {newest}")]
    NonMonotone { t: f64, newest: f64 },
    #[error("query on empty delay line")]
    Empty,
}

impl DelayLine {
    pub fn new(delay: f64, retention_margin: f64) -> Self {
        assert!(delay >= 0.0 && retention_margin >= 0.0);
        Self {
            delay,
            retention_margin,
            buffer: VecDeque::new(),
        }
    }

    pub fn delay(&self) -> f64 {
        self.delay
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    /// Appends a sample. Timestamps must be strictly increasing. Samples
    /// older than `t − delay − retention_margin` are evicted, except that
    /// one sample at or before the horizon is always kept so queries at the
    /// horizon can interpolate.
    pub fn push(&mut self, t: f64, position: Vec2) -> Result<(), DelayLineError> {
        if let Some(&(newest, _)) = self.buffer.back() {
            if t <= newest {
                return Err(DelayLineError::NonMonotone { t, newest });
            }
        }
        self.buffer.push_back((t, position));
        let horizon = t - self.delay - self.retention_margin;
        while self.buffer.len() >= 2 && self.buffer[1].0 <= horizon {
            self.buffer.pop_front();
        }
        Ok(())
    }

    /// Position at time `t − delay`. Holds the first sample before history
    /// starts and the last sample past the newest.
    pub fn query(&self, t: f64) -> Result<Vec2, DelayLineError> {
        let target = t - self.delay;
        let (oldest, newest) = match (self.buffer.front(), self.buffer.back()) {
            (Some(&f), Some(&b)) => (f, b),
            _ => return Err(DelayLineError::Empty),
        };
        if target <= oldest.0 {
            return Ok(oldest.1);
        }
        if target >= newest.0 {
            return Ok(newest.1);
        }
        // Bracketing pair exists; interpolate linearly.
        let idx = self.buffer.partition_point(|&(ts, _)| ts <= target);
        let (t0, z0) = self.buffer[idx - 1];
        let (t1, z1) = self.buffer[idx];
        let w = (target - t0) / (t1 - t0);
        Ok(z0 + w * (z1 - z0))
    }
}
