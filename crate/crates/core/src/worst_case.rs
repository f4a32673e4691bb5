//! Configurations on which inserting an `i`-square costs as much as possible.
//!
//! Every `i`-pixel holds three `k`-squares for each `i < k <= 2i`, nested so
//! that the fourth quadrant at each level holds the next level. That leaves
//! one empty `2i`-pixel per `i`-pixel, so the free capacity is exactly one
//! `i`-pixel spread over `4^i` holes.

use crate::error::{Error, Result};
use crate::path::PixelPath;
use crate::quadtree::Quadtree;
use crate::realloc::insert_with_defrag;
use crate::scalar::Volume;
use crate::zorder::layer_pixels;
use crate::{Layer, Ledger, ModuleId};

pub fn build_worst_case<V: Volume>(i: Layer) -> Result<Quadtree<V>> {
    build_worst_case_with_depth(i, crate::DEFAULT_MAX_DEPTH)
}

pub fn build_worst_case_with_depth<V: Volume>(i: Layer, max_depth: Layer) -> Result<Quadtree<V>> {
    let s = 2 * i as u32;
    if s > max_depth as u32 {
        return Err(Error::DepthExceeded {
            layer: s,
            max_depth,
        });
    }
    let mut tree = Quadtree::with_max_depth(max_depth)?;
    let mut next = 0u64;
    for top in layer_pixels(i) {
        let mut cur: PixelPath = top;
        for k in i + 1..=2 * i {
            for q in 0..3 {
                tree.assign(ModuleId(next), k, cur.child(q))?;
                next += 1;
            }
            cur = cur.child(3);
        }
    }
    Ok(tree)
}

/// Costs of inserting an `i`-square into [`build_worst_case`]`(i)`.
pub fn verify_lower_bound<V: Volume>(i: Layer) -> Result<Ledger<V>> {
    let mut tree = build_worst_case::<V>(i)?;
    let id = ModuleId(tree.len() as u64);
    let mut ledger = Ledger::for_request(i);
    insert_with_defrag(&mut tree, id, i, &mut ledger)?;
    Ok(ledger)
}
