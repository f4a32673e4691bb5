//! Defragmentation by moves.
//!
//! [`merge_four`] turns four maximally empty `j`-pixels into one empty
//! `(j-1)`-pixel. [`make_empty_pixel`] repeats it on the shortest prefix of
//! maximally empty pixels (by descending capacity) that holds a `j`-square,
//! and [`insert_with_defrag`] places a square after freeing a pixel for it.

use arrayvec::ArrayVec;

use crate::error::{Error, Result};
use crate::path::PixelPath;
use crate::quadtree::{Node, Quadtree};
use crate::scalar::Volume;
use crate::zorder::{first_empty_pixel, ZKey};
use crate::{Layer, Ledger, ModuleId};

/// Worst-case costs of inserting an `i`-square when the smallest assigned
/// square is an `s`-square.
#[derive(Clone, Debug, PartialEq)]
pub struct CostBounds<V> {
    pub total_volume: V,
    pub moves: u64,
    pub relative_volume: V,
}

/// Upper bounds `3/4 * 4^-i * m`, `4^m - 1` and `3/4 * m` with `m = min(s - i, i)`.
///
/// When `s <= i` every maximally empty pixel holds an `i`-pixel, so all
/// bounds are zero.
pub fn cost_bounds<V: Volume>(i: Layer, s: Layer) -> CostBounds<V> {
    let m = s.saturating_sub(i).min(i);
    let three_quarters_m = V::from_u64(3 * m as u64) * V::pow4(-1);
    CostBounds {
        total_volume: three_quarters_m.clone() * V::pixel(i),
        moves: (1u64 << (2 * m as u32)) - 1,
        relative_volume: three_quarters_m,
    }
}

/// Merges four maximally empty `j`-pixels into an empty `(j-1)`-pixel.
///
/// The donor is the pixel whose parent holds the least assigned volume (ties
/// by z-order). The non-empty children of that parent are relocated, in
/// z-order, into those of the four pixels lying outside it, one square at a
/// time in pre-order. Returns the emptied parent.
pub fn merge_four<V: Volume>(
    tree: &mut Quadtree<V>,
    pixels: [PixelPath; 4],
    ledger: &mut Ledger<V>,
) -> Result<PixelPath> {
    let j = pixels[0].layer();
    if j == 0 || pixels.iter().any(|p| p.layer() != j) {
        return Err(Error::PreconditionViolated(format!(
            "merge needs four pixels of one layer j >= 1, got {pixels:?}"
        )));
    }
    let parent = pixels[0].parent().expect("layer >= 1");
    let siblings = pixels
        .iter()
        .filter(|p| p.parent() == Some(parent))
        .fold(0u8, |seen, p| seen | 1 << p.quadrant(j - 1));
    if siblings == 0b1111 && tree.classify(parent).is_empty() {
        return Ok(parent);
    }
    for (k, p) in pixels.iter().enumerate() {
        if !tree.classify(*p).maximally_empty {
            return Err(Error::PreconditionViolated(format!(
                "{p} is not maximally empty"
            )));
        }
        if pixels[..k].contains(p) {
            return Err(Error::PreconditionViolated(format!("{p} listed twice")));
        }
    }

    let assigned = |p: &PixelPath| {
        let parent = p.parent().expect("layer >= 1");
        V::pixel(parent.layer()) - tree.capacity(parent)
    };
    let mut donor = pixels[0];
    let mut donor_assigned = assigned(&donor);
    for p in &pixels[1..] {
        let a = assigned(p);
        if a < donor_assigned || (a == donor_assigned && ZKey::of(p) < ZKey::of(&donor)) {
            donor = *p;
            donor_assigned = a;
        }
    }
    let target = donor.parent().expect("layer >= 1");

    let mut receivers: ArrayVec<PixelPath, 4> = pixels
        .iter()
        .copied()
        .filter(|p| !target.contains(p))
        .collect();
    receivers.sort_by_key(ZKey::of);
    let sources: ArrayVec<PixelPath, 4> = (0..4)
        .map(|q| target.child(q))
        .filter(|c| !tree.classify(*c).is_empty())
        .collect();
    if sources.len() > receivers.len() {
        return Err(Error::InvariantViolated(format!(
            "{} non-empty siblings but {} receivers",
            sources.len(),
            receivers.len()
        )));
    }
    for (src, dst) in sources.iter().zip(&receivers) {
        for (sq, _) in tree.squares_within(*src) {
            tree.move_square(sq, dst.join(&sq.relative_to(src)), ledger)?;
        }
    }
    debug_assert!(tree.classify(target).is_empty());
    Ok(target)
}

/// Moves squares until an empty `j`-pixel exists and returns the z-least one.
pub fn make_empty_pixel<V: Volume>(
    tree: &mut Quadtree<V>,
    j: Layer,
    ledger: &mut Ledger<V>,
) -> Result<PixelPath> {
    if let Some(p) = first_empty_pixel(tree, j) {
        return Ok(p);
    }
    let need = V::pixel(j);
    if tree.total_capacity() < need {
        return Err(Error::InsufficientCapacity(j));
    }
    // Safety net against a merge sequence that makes no progress.
    let mut guard = 4 * (tree.len() + 1) * (tree.max_depth() as usize + 1);
    loop {
        let empty = tree.maximally_empty_pixels();
        let mut sum = V::zero();
        let mut k = 0;
        while sum < need {
            sum += empty[k].volume::<V>();
            k += 1;
        }
        if k < 4 || empty[k - 4].layer() != empty[k - 1].layer() {
            return Err(Error::InvariantViolated(format!(
                "prefix of {k} maximally empty pixels cannot be merged"
            )));
        }
        let four = [empty[k - 4], empty[k - 3], empty[k - 2], empty[k - 1]];
        merge_four(tree, four, ledger)?;
        if let Some(p) = first_empty_pixel(tree, j) {
            return Ok(p);
        }
        guard -= 1;
        if guard == 0 {
            return Err(Error::InvariantViolated(
                "merge loop does not terminate".into(),
            ));
        }
    }
}

/// Places module `id` as a `j`-square, moving other squares if needed.
///
/// Without an empty `j`-pixel, the `j`-pixel with the largest remaining
/// capacity (z-least on ties) is evacuated: its squares leave largest first,
/// each to the pixel of its own layer with the largest remaining capacity
/// outside every pixel currently being evacuated, which is evacuated in turn
/// when it is not empty. Should that run out of room, the merge procedure of
/// [`make_empty_pixel`] is used instead.
pub fn insert_with_defrag<V: Volume>(
    tree: &mut Quadtree<V>,
    id: ModuleId,
    j: Layer,
    ledger: &mut Ledger<V>,
) -> Result<PixelPath> {
    if j > tree.max_depth() {
        return Err(Error::DepthExceeded {
            layer: j as u32,
            max_depth: tree.max_depth(),
        });
    }
    if tree.contains_module(id) {
        return Err(Error::DuplicateModule(id));
    }
    let target = match first_empty_pixel(tree, j) {
        Some(p) => p,
        None => {
            if tree.total_capacity() < V::pixel(j) {
                return Err(Error::InsufficientCapacity(j));
            }
            let target = best_pixel(tree, j, &[])
                .expect("positive capacity leaves a j-pixel with room")
                .0;
            let mut trial = tree.clone();
            let mut trial_ledger = ledger.clone();
            match evacuate(&mut trial, target, &mut Vec::new(), &mut trial_ledger) {
                Ok(()) => {
                    *tree = trial;
                    *ledger = trial_ledger;
                    target
                }
                Err(_) => make_empty_pixel(tree, j, ledger)?,
            }
        }
    };
    tree.assign(id, j, target)?;
    Ok(target)
}

fn evacuate<V: Volume>(
    tree: &mut Quadtree<V>,
    region: PixelPath,
    stack: &mut Vec<PixelPath>,
    ledger: &mut Ledger<V>,
) -> Result<()> {
    stack.push(region);
    while let Some(square) = tree
        .squares_within(region)
        .into_iter()
        .map(|(p, _)| p)
        .min_by_key(|p| p.layer())
    {
        let (dest, _) = best_pixel(tree, square.layer(), stack)
            .ok_or(Error::InsufficientCapacity(square.layer()))?;
        if !tree.classify(dest).is_empty() {
            evacuate(tree, dest, stack, ledger)?;
        }
        tree.move_square(square, dest, ledger)?;
    }
    stack.pop();
    Ok(())
}

/// The `layer`-pixel with the largest positive remaining capacity that is
/// disjoint from every pixel in `excluded`, z-least on ties.
///
/// Excluded pixels must contain squares, so none lies inside an empty leaf.
pub(crate) fn best_pixel<V: Volume>(
    tree: &Quadtree<V>,
    layer: Layer,
    excluded: &[PixelPath],
) -> Option<(PixelPath, V)> {
    fn walk<V: Volume>(
        node: &Node<V>,
        path: PixelPath,
        layer: Layer,
        excluded: &[PixelPath],
        best: &mut (Option<PixelPath>, V),
    ) -> bool {
        if excluded.iter().any(|e| e.contains(&path)) {
            return false;
        }
        match node {
            Node::Occupied(_) => false,
            Node::Empty => {
                *best = (Some(path.first_descendant(layer)), V::pixel(layer));
                true
            }
            Node::Split(b) if path.layer() == layer => {
                if b.capacity > best.1 && !excluded.iter().any(|e| path.contains(e)) {
                    *best = (Some(path), b.capacity.clone());
                }
                false
            }
            Node::Split(b) => {
                if b.capacity <= best.1 {
                    return false;
                }
                b.children
                    .iter()
                    .enumerate()
                    .any(|(q, c)| walk(c, path.child(q as u8), layer, excluded, best))
            }
        }
    }
    let mut best = (None, V::zero());
    walk(
        tree.root_node(),
        PixelPath::ROOT,
        layer,
        excluded,
        &mut best,
    );
    let (path, cap) = best;
    path.map(|p| (p, cap))
}
