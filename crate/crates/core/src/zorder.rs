//! Z-order over disjoint pixels and the scans First Fit relies on.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::path::{PixelPath, MAX_LAYER};
use crate::quadtree::{Node, Quadtree};
use crate::scalar::Volume;
use crate::Layer;

/// Position of a pixel on the z-order curve.
///
/// The first component is the quadrant sequence read as a base-4 fraction
/// with [`MAX_LAYER`] digits. Disjoint pixels always differ there. The layer
/// only breaks ties between a pixel and its z-least descendants so that keys
/// can index ordered maps; it carries no geometric meaning.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ZKey(pub u64, pub Layer);

impl ZKey {
    pub fn of(p: &PixelPath) -> Self {
        ZKey(p.index() << (2 * (MAX_LAYER - p.layer()) as u32), p.layer())
    }
}

impl From<PixelPath> for ZKey {
    fn from(p: PixelPath) -> Self {
        ZKey::of(&p)
    }
}

/// Compares two pixels in z-order. Nested pixels have no z-order.
pub fn z_compare(p: &PixelPath, q: &PixelPath) -> Result<Ordering> {
    if p == q {
        return Ok(Ordering::Equal);
    }
    if !p.is_disjoint(q) {
        return Err(Error::NestedPixels(*p, *q));
    }
    Ok(ZKey::of(p).0.cmp(&ZKey::of(q).0))
}

/// The z-least empty `j`-pixel of the configuration.
pub fn first_empty_pixel<V: Volume>(tree: &Quadtree<V>, j: Layer) -> Option<PixelPath> {
    first_empty_below(tree.root_node(), PixelPath::ROOT, j)
}

/// The z-least empty `j`-pixel inside `region`.
pub fn first_empty_in<V: Volume>(
    tree: &Quadtree<V>,
    region: PixelPath,
    j: Layer,
) -> Option<PixelPath> {
    if j < region.layer() {
        return None;
    }
    let (depth, node) = tree.locate(region);
    if depth < region.layer() {
        return match node {
            Node::Empty => Some(region.first_descendant(j)),
            _ => None,
        };
    }
    first_empty_below(node, region, j)
}

fn first_empty_below<V: Volume>(
    mut node: &Node<V>,
    mut path: PixelPath,
    j: Layer,
) -> Option<PixelPath> {
    if node.shallowest_empty(path.layer()) > j {
        return None;
    }
    loop {
        match node {
            Node::Empty => return Some(path.first_descendant(j)),
            Node::Occupied(_) => unreachable!("shallowest-empty cache points at an occupied leaf"),
            Node::Split(b) => {
                let depth = path.layer() + 1;
                let q = b
                    .children
                    .iter()
                    .position(|c| c.shallowest_empty(depth) <= j)
                    .expect("cache promises an empty pixel below");
                node = &b.children[q];
                path = path.child(q as u8);
            }
        }
    }
}

/// The occupied pixel that comes last in z-order.
pub fn last_occupied<V: Volume>(tree: &Quadtree<V>) -> Option<PixelPath> {
    last_occupied_below(tree.root_node(), PixelPath::ROOT)
}

fn last_occupied_below<V>(mut node: &Node<V>, mut path: PixelPath) -> Option<PixelPath> {
    loop {
        match node {
            Node::Empty => return None,
            Node::Occupied(_) => return Some(path),
            Node::Split(b) => {
                let q = b
                    .children
                    .iter()
                    .rposition(|c| !matches!(c, Node::Empty))
                    .expect("internal nodes contain a square");
                node = &b.children[q];
                path = path.child(q as u8);
            }
        }
    }
}

/// The last occupied pixel that precedes `p` in z-order and is disjoint from it.
pub fn prev_occupied<V: Volume>(tree: &Quadtree<V>, p: PixelPath) -> Option<PixelPath> {
    let mut node = tree.root_node();
    let mut path = PixelPath::ROOT;
    let mut best: Option<(&Node<V>, PixelPath)> = None;
    while path.layer() < p.layer() {
        let Node::Split(b) = node else { break };
        let q = p.quadrant(path.layer()) as usize;
        if let Some(k) = b.children[..q]
            .iter()
            .rposition(|c| !matches!(c, Node::Empty))
        {
            best = Some((&b.children[k], path.child(k as u8)));
        }
        node = &b.children[q];
        path = path.child(q as u8);
    }
    best.and_then(|(n, at)| last_occupied_below(n, at))
}

/// All occupied pixels in z-order.
pub fn occupied_in_z_order<V: Volume>(tree: &Quadtree<V>) -> Vec<PixelPath> {
    tree.squares_within(PixelPath::ROOT)
        .into_iter()
        .map(|(p, _)| p)
        .collect()
}

/// All pixels of `layer` in z-order.
pub fn layer_pixels(layer: Layer) -> impl Iterator<Item = PixelPath> {
    (0..1u64 << (2 * layer as u32)).map(move |i| PixelPath::from_index(layer, i))
}
