//! Shared domain types: beacon/station identities, the fixed 20-second
//! analysis grid, canonical unordered pair keys, and the packet record that
//! every other module consumes.
//!
//! All values here are immutable after construction and safe to share across
//! threads.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hardware cap on simultaneous sightings carried by one report packet.
pub const MAX_SEEN: usize = 4;

/// Default analysis window in seconds.
pub const DEFAULT_BIN_WIDTH: f64 = 20.0;

/// Identity of a wearable badge. Disjoint namespace from [`StationId`].
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct BeaconId(pub u32);

/// Identity of a fixed relaying station. Disjoint namespace from [`BeaconId`].
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct StationId(pub u32);

impl std::fmt::Display for BeaconId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::fmt::Display for StationId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Index of one analysis window; bin `k` covers
/// `[origin + k*width, origin + (k+1)*width)`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct BinIndex(pub u64);

impl std::fmt::Display for BinIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("timestamp {t} precedes grid origin {origin}")]
    TimeBeforeOrigin { t: f64, origin: f64 },
    #[error("timestamp {0} is not finite")]
    NonFiniteTime(f64),
    #[error("bin width must be positive and finite, got {0}")]
    InvalidBinWidth(f64),
    #[error("a beacon cannot be paired with itself ({0})")]
    SelfPair(BeaconId),
}

/// Fixed time discretization: left-closed right-open bins of `bin_width`
/// seconds anchored at `origin`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub origin: f64,
    pub bin_width: f64,
}

impl TimeGrid {
    pub fn new(origin: f64, bin_width: f64) -> Result<Self, ModelError> {
        if !origin.is_finite() {
            return Err(ModelError::NonFiniteTime(origin));
        }
        if !bin_width.is_finite() || bin_width <= 0.0 {
            return Err(ModelError::InvalidBinWidth(bin_width));
        }
        Ok(TimeGrid { origin, bin_width })
    }

    /// Grid whose origin is `t_start` rounded down to a whole bin, so that
    /// two analyses of the same stream land on identical bin boundaries.
    pub fn aligned_to(t_start: f64, bin_width: f64) -> Result<Self, ModelError> {
        if !t_start.is_finite() {
            return Err(ModelError::NonFiniteTime(t_start));
        }
        if !bin_width.is_finite() || bin_width <= 0.0 {
            return Err(ModelError::InvalidBinWidth(bin_width));
        }
        let origin = (t_start / bin_width).floor() * bin_width;
        Ok(TimeGrid { origin, bin_width })
    }

    /// Maps a timestamp to its bin. Bins are left-closed right-open, so
    /// `bin_of(origin + k*width) == k` exactly.
    pub fn bin_of(&self, t: f64) -> Result<BinIndex, ModelError> {
        if !t.is_finite() {
            return Err(ModelError::NonFiniteTime(t));
        }
        if t < self.origin {
            return Err(ModelError::TimeBeforeOrigin {
                t,
                origin: self.origin,
            });
        }
        let rel = t - self.origin;
        let mut k = (rel / self.bin_width).floor() as u64;
        // Repair boundary rounding so that k*width <= rel < (k+1)*width holds
        // exactly in f64 comparisons.
        while (k + 1) as f64 * self.bin_width <= rel {
            k += 1;
        }
        while k > 0 && k as f64 * self.bin_width > rel {
            k -= 1;
        }
        Ok(BinIndex(k))
    }

    /// Start time of bin `k` in seconds.
    pub fn bin_start(&self, k: BinIndex) -> f64 {
        self.origin + k.0 as f64 * self.bin_width
    }

    /// End time of bin `k` (exclusive).
    pub fn bin_end(&self, k: BinIndex) -> f64 {
        self.origin + (k.0 + 1) as f64 * self.bin_width
    }

    /// Bins whose start time falls inside `[t0, t1)`, as an index range.
    /// Spans before the origin are clipped to the origin.
    pub fn bins_in_span(&self, t0: f64, t1: f64) -> std::ops::Range<u64> {
        if t1 <= t0 || t1 <= self.origin {
            return 0..0;
        }
        let first = if t0 <= self.origin {
            0
        } else {
            // Smallest k with bin_start(k) >= t0.
            match self.bin_of(t0) {
                Ok(BinIndex(k)) => {
                    if self.bin_start(BinIndex(k)) >= t0 {
                        k
                    } else {
                        k + 1
                    }
                }
                Err(_) => 0,
            }
        };
        // Largest k with bin_start(k) < t1, then exclusive end.
        let last = match self.bin_of(t1) {
            Ok(BinIndex(k)) => {
                if self.bin_start(BinIndex(k)) < t1 {
                    k + 1
                } else {
                    k
                }
            }
            Err(_) => 0,
        };
        first..last.max(first)
    }
}

/// Canonical unordered beacon pair: `lo < hi` always.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct PairKey {
    pub lo: BeaconId,
    pub hi: BeaconId,
}

impl PairKey {
    pub fn new(a: BeaconId, b: BeaconId) -> Result<Self, ModelError> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Ok(PairKey { lo: a, hi: b }),
            std::cmp::Ordering::Greater => Ok(PairKey { lo: b, hi: a }),
            std::cmp::Ordering::Equal => Err(ModelError::SelfPair(a)),
        }
    }

    pub fn contains(&self, b: BeaconId) -> bool {
        self.lo == b || self.hi == b
    }

    /// The member that is not `b`. Panics if `b` is not in the pair.
    pub fn other(&self, b: BeaconId) -> BeaconId {
        if self.lo == b {
            self.hi
        } else {
            debug_assert_eq!(self.hi, b);
            self.lo
        }
    }
}

impl std::fmt::Display for PairKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.lo, self.hi)
    }
}

/// Canonical pair of two beacons; errors on a self-pair.
pub fn pair_key(a: BeaconId, b: BeaconId) -> Result<PairKey, ModelError> {
    PairKey::new(a, b)
}

/// One relayed report: a timestamp, the relaying station, the reporting
/// beacon, and up to [`MAX_SEEN`] beacons it saw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PacketRecord {
    pub t: f64,
    pub station: StationId,
    pub src: BeaconId,
    #[serde(default)]
    pub seen: Vec<BeaconId>,
}

impl PacketRecord {
    pub fn new(
        t: f64,
        station: StationId,
        src: BeaconId,
        seen: Vec<BeaconId>,
    ) -> Result<Self, RecordError> {
        let rec = PacketRecord {
            t,
            station,
            src,
            seen,
        };
        rec.validate()?;
        Ok(rec)
    }

    /// Checks the wire-level invariants: finite timestamp, at most
    /// [`MAX_SEEN`] sightings, no self-sighting, no duplicate sightings.
    pub fn validate(&self) -> Result<(), RecordError> {
        if !self.t.is_finite() {
            return Err(RecordError::NonFiniteTime(self.t));
        }
        if self.seen.len() > MAX_SEEN {
            return Err(RecordError::TooManySeen(self.seen.len()));
        }
        if self.seen.contains(&self.src) {
            return Err(RecordError::SelfSighting(self.src));
        }
        for (i, b) in self.seen.iter().enumerate() {
            if self.seen[..i].contains(b) {
                return Err(RecordError::DuplicateSeen(*b));
            }
        }
        Ok(())
    }

    /// True if the record reports at least one contact.
    pub fn is_contact(&self) -> bool {
        !self.seen.is_empty()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RecordError {
    #[error("timestamp {0} is not finite")]
    NonFiniteTime(f64),
    #[error("{0} seen beacons exceeds the hardware cap of {MAX_SEEN}")]
    TooManySeen(usize),
    #[error("source beacon {0} listed in its own seen set")]
    SelfSighting(BeaconId),
    #[error("beacon {0} listed twice in one seen set")]
    DuplicateSeen(BeaconId),
}

/// Deterministic total order on records: time, station, src, then seen list.
pub fn record_order(a: &PacketRecord, b: &PacketRecord) -> std::cmp::Ordering {
    a.t.total_cmp(&b.t)
        .then(a.station.cmp(&b.station))
        .then(a.src.cmp(&b.src))
        .then(a.seen.cmp(&b.seen))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> TimeGrid {
        TimeGrid::new(0.0, 20.0).unwrap()
    }

    #[test]
    fn bin_of_boundaries() {
        let g = grid();
        assert_eq!(g.bin_of(0.0).unwrap(), BinIndex(0));
        assert_eq!(g.bin_of(19.99).unwrap(), BinIndex(0));
        assert_eq!(g.bin_of(20.0).unwrap(), BinIndex(1));
    }

    #[test]
    fn bin_of_rejects_pre_origin() {
        let g = TimeGrid::new(100.0, 20.0).unwrap();
        assert!(matches!(
            g.bin_of(99.9),
            Err(ModelError::TimeBeforeOrigin { .. })
        ));
    }

    #[test]
    fn bin_of_exact_on_grid_points() {
        let g = grid();
        for k in 0..10_000u64 {
            assert_eq!(g.bin_of(k as f64 * 20.0).unwrap(), BinIndex(k));
        }
    }

    #[test]
    fn pair_key_orders_and_rejects_self() {
        let (a, b) = (BeaconId(5), BeaconId(3));
        let k = pair_key(a, b).unwrap();
        assert_eq!((k.lo, k.hi), (BeaconId(3), BeaconId(5)));
        assert_eq!(pair_key(BeaconId(3), BeaconId(5)).unwrap(), k);
        assert!(matches!(
            pair_key(BeaconId(7), BeaconId(7)),
            Err(ModelError::SelfPair(_))
        ));
    }

    #[test]
    fn aligned_grid_rounds_down() {
        let g = TimeGrid::aligned_to(47.3, 20.0).unwrap();
        assert_eq!(g.origin, 40.0);
        assert_eq!(g.bin_of(47.3).unwrap(), BinIndex(0));
    }

    #[test]
    fn bins_in_span_covers_starts_only() {
        let g = grid();
        assert_eq!(g.bins_in_span(0.0, 60.0), 0..3);
        assert_eq!(g.bins_in_span(10.0, 60.0), 1..3);
        assert_eq!(g.bins_in_span(20.0, 20.1), 1..2);
        assert_eq!(g.bins_in_span(5.0, 5.0), 0..0);
    }

    #[test]
    fn record_validation() {
        let s = StationId(1);
        assert!(PacketRecord::new(1.0, s, BeaconId(1), vec![BeaconId(2)]).is_ok());
        assert!(matches!(
            PacketRecord::new(1.0, s, BeaconId(1), vec![BeaconId(1)]),
            Err(RecordError::SelfSighting(_))
        ));
        assert!(matches!(
            PacketRecord::new(
                1.0,
                s,
                BeaconId(1),
                vec![BeaconId(2), BeaconId(3), BeaconId(4), BeaconId(5), BeaconId(6)]
            ),
            Err(RecordError::TooManySeen(5))
        ));
        assert!(matches!(
            PacketRecord::new(1.0, s, BeaconId(1), vec![BeaconId(2), BeaconId(2)]),
            Err(RecordError::DuplicateSeen(_))
        ));
    }
}
