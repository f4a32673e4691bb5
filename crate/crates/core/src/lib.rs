//! Quadtree allocation of aligned squares in the unit square, with
//! defragmenting reallocation, a First Fit strategy in z-order, padding of
//! general squares and rectangles, and a simulation harness.
//!
//! The tree and cost accounting are generic over a [`Volume`] scalar. The
//! aliases [`Configuration`] and [`CostLedger`] fix it to the exact
//! [`Dyadic`] type, which is what the strategies and the harness use.

use std::fmt;

pub mod dyadic;
pub mod error;
pub mod first_fit;
pub mod oracle;
pub mod path;
pub mod quadtree;
pub mod realloc;
pub mod request;
pub mod scalar;
pub mod shapes;
pub mod sim;
pub mod worst_case;
pub mod zorder;

pub use dyadic::Dyadic;
pub use error::{Error, Result};
pub use path::PixelPath;
pub use quadtree::{Height, PixelKind, PixelState, Quadtree, DEFAULT_MAX_DEPTH};
pub use scalar::Volume;
pub use shapes::ModuleShape;
pub use zorder::ZKey;

/// Pixel layer (tree depth). Layer `j` pixels have side `2^-j`.
pub type Layer = u8;

/// Exact quadtree configuration.
pub type Configuration = Quadtree<Dyadic>;

/// Exact per-request cost accounting.
pub type CostLedger = Ledger<Dyadic>;

/// Module shape with `f64` side lengths.
pub type Shape = ModuleShape<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModuleId(pub u64);

impl fmt::Display for ModuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Reallocation cost of a single request.
#[derive(Clone, Debug, PartialEq)]
pub struct Ledger<V> {
    /// Number of squares moved.
    pub moves: u64,
    /// Sum of the volumes of moved squares.
    pub total_volume: V,
    /// Layer of the square whose request triggered the moves.
    pub request_layer: Option<Layer>,
    /// Every move in the order performed, when tracing was asked for.
    pub trace: Option<Vec<Relocation>>,
}

/// One move recorded by a tracing [`Ledger`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Relocation {
    pub id: ModuleId,
    pub from: PixelPath,
    pub to: PixelPath,
}

impl<V: Volume> Default for Ledger<V> {
    fn default() -> Self {
        Ledger {
            moves: 0,
            total_volume: V::zero(),
            request_layer: None,
            trace: None,
        }
    }
}

impl<V: Volume> Ledger<V> {
    pub fn for_request(layer: Layer) -> Self {
        Ledger {
            request_layer: Some(layer),
            ..Self::default()
        }
    }

    /// Like [`Ledger::for_request`], also keeping the list of moves.
    pub fn traced(layer: Layer) -> Self {
        Ledger {
            trace: Some(Vec::new()),
            ..Self::for_request(layer)
        }
    }

    pub fn record_move(&mut self, layer: Layer) {
        self.moves += 1;
        self.total_volume += V::pixel(layer);
    }

    pub(crate) fn record_relocation(&mut self, id: ModuleId, from: PixelPath, to: PixelPath) {
        self.record_move(from.layer());
        if let Some(trace) = &mut self.trace {
            trace.push(Relocation { id, from, to });
        }
    }

    /// Volume of the triggering request, if any.
    pub fn request_volume(&self) -> Option<V> {
        self.request_layer.map(V::pixel)
    }

    /// Moved volume divided by the request's volume.
    pub fn relative_volume(&self) -> Option<V> {
        self.request_layer
            .map(|l| self.total_volume.clone() * V::pow4(l as i32))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ledger_relative_volume() {
        let mut l = CostLedger::for_request(1);
        l.record_move(2);
        l.record_move(2);
        l.record_move(2);
        assert_eq!(l.moves, 3);
        assert_eq!(l.total_volume, Dyadic::new(3, -2));
        assert_eq!(l.relative_volume(), Some(Dyadic::new(3, -1)));
        assert_eq!(CostLedger::default().relative_volume(), None);
    }
}
