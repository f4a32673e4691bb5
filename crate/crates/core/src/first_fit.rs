//! First Fit in z-order.
//!
//! Insertions go to the z-least empty pixel of their layer and never move
//! anything. Deletions back-fill the freed space with squares taken from the
//! end of the z-order, which keeps every empty `i`-pixel behind all occupied
//! `i`-pixels.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::path::PixelPath;
use crate::quadtree::Quadtree;
use crate::scalar::Volume;
use crate::zorder::{first_empty_in, first_empty_pixel, last_occupied, prev_occupied, ZKey};
use crate::{Layer, Ledger, ModuleId};

/// Assigns module `id` to the z-least empty `j`-pixel.
pub fn ff_insert<V: Volume>(tree: &mut Quadtree<V>, id: ModuleId, j: Layer) -> Result<PixelPath> {
    if j > tree.max_depth() {
        return Err(Error::DepthExceeded {
            layer: j as u32,
            max_depth: tree.max_depth(),
        });
    }
    let p = first_empty_pixel(tree, j).ok_or(Error::NoEmptyPixel(j))?;
    tree.assign(id, j, p)?;
    Ok(p)
}

/// Removes module `id` and compacts.
///
/// Pending maximally empty pixels are processed in z-order. For each one,
/// occupied pixels are scanned backwards from the end of the z-order while
/// they lie behind it; a square that fits is moved to the z-least empty pixel
/// of its layer inside, and the maximally empty pixel it leaves behind
/// becomes pending, replacing any pending pixels it contains.
pub fn ff_delete<V: Volume>(
    tree: &mut Quadtree<V>,
    id: ModuleId,
    ledger: &mut Ledger<V>,
) -> Result<()> {
    let freed = tree.unassign(id)?;
    let mut pending = BTreeMap::new();
    let seed = maximal_empty_containing(tree, freed);
    pending.insert(ZKey::of(&seed), seed);
    while let Some((_, a)) = pending.pop_first() {
        let mut cursor = last_occupied(tree);
        while let Some(b) = cursor {
            if !b.is_disjoint(&a) || ZKey::of(&b) < ZKey::of(&a) {
                break;
            }
            cursor = prev_occupied(tree, b);
            if b.layer() < a.layer() {
                continue;
            }
            if let Some(dest) = first_empty_in(tree, a, b.layer()) {
                tree.move_square(b, dest, ledger)?;
                let vacated = maximal_empty_containing(tree, b);
                pending.retain(|_, p: &mut PixelPath| !vacated.contains(p));
                pending.insert(ZKey::of(&vacated), vacated);
            }
        }
    }
    Ok(())
}

/// The maximally empty pixel containing the empty pixel `p`.
pub fn maximal_empty_containing<V: Volume>(tree: &Quadtree<V>, p: PixelPath) -> PixelPath {
    let (depth, _) = tree.locate(p);
    debug_assert!(tree.classify(p).is_empty());
    p.ancestor(depth)
}

/// True if no occupied `i`-pixel follows an empty `i`-pixel in z-order, for every `i`.
pub fn invariant_check<V: Volume>(tree: &Quadtree<V>) -> bool {
    let mut last: BTreeMap<Layer, ZKey> = BTreeMap::new();
    for (_, p) in tree.modules() {
        let k = ZKey::of(&p);
        let e = last.entry(p.layer()).or_insert(k);
        *e = (*e).max(k);
    }
    last.into_iter()
        .all(|(layer, k)| match first_empty_pixel(tree, layer) {
            Some(e) => ZKey::of(&e).0 > k.0,
            None => true,
        })
}
