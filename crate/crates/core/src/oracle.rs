//! Brute-force references for small configurations.
//!
//! The search here works on its own model: per-layer occupancy bitmasks over
//! a fixed depth-3 grid of 64 cells, indexed in z-order. It shares no code
//! with the tree or the reallocation engine beyond reading the initial
//! square positions.

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::mem;

use arrayvec::ArrayVec;

use crate::error::{Error, Result};
use crate::path::PixelPath;
use crate::quadtree::{Branch, Node, Quadtree};
use crate::scalar::Volume;
use crate::{Layer, ModuleId};

/// Deepest layer the grid model represents.
pub const ORACLE_DEPTH: Layer = 3;
/// Largest number of squares enumerated exhaustively.
pub const ENUMERATION_MAX_SQUARES: usize = 6;
/// Largest number of squares the search accepts.
pub const SEARCH_MAX_SQUARES: usize = 16;
/// Default limit on expanded states per search.
pub const DEFAULT_BUDGET: usize = 2_000_000;

const CELLS: u32 = 64;

/// Number of grid cells under one `layer`-pixel.
fn block_len(layer: Layer) -> u32 {
    1 << (2 * (ORACLE_DEPTH - layer) as u32)
}

/// Cell mask of the `layer`-pixel with z-index `index`.
fn block(layer: Layer, index: u32) -> u64 {
    let len = block_len(layer);
    if len == CELLS {
        u64::MAX
    } else {
        ((1u64 << len) - 1) << (index * len)
    }
}

/// True if some `layer`-pixel has no occupied cell.
fn has_free_block(cells: u64, layer: Layer) -> bool {
    let len = block_len(layer);
    let mut any = cells;
    let mut step = 1;
    while step < len {
        any |= any >> step;
        step *= 2;
    }
    let firsts = match len {
        1 => u64::MAX,
        4 => 0x1111_1111_1111_1111,
        16 => 0x0001_0001_0001_0001,
        _ => 1,
    };
    !any & firsts != 0
}

/// Occupied pixels of each layer as bitmasks over their z-indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Grid {
    occupied: [u64; ORACLE_DEPTH as usize + 1],
}

impl Grid {
    pub fn from_tree<V: Volume>(tree: &Quadtree<V>) -> Result<Self> {
        Self::from_squares(tree.modules().map(|(_, p)| p))
    }

    pub fn from_squares<I: IntoIterator<Item = PixelPath>>(squares: I) -> Result<Self> {
        let mut g = Grid::default();
        let mut cells = 0u64;
        for p in squares {
            if p.layer() > ORACLE_DEPTH {
                return Err(Error::LimitsTooLarge(format!(
                    "square at layer {} is deeper than {ORACLE_DEPTH}",
                    p.layer()
                )));
            }
            let b = block(p.layer(), p.index() as u32);
            if cells & b != 0 {
                return Err(Error::InvariantViolated(format!(
                    "square {p} overlaps another"
                )));
            }
            cells |= b;
            g.occupied[p.layer() as usize] |= 1 << p.index();
        }
        Ok(g)
    }

    pub fn squares(&self) -> impl Iterator<Item = PixelPath> + '_ {
        (0..=ORACLE_DEPTH).flat_map(move |l| {
            let mask = self.occupied[l as usize];
            (0..64u64)
                .filter(move |i| mask >> i & 1 == 1)
                .map(move |i| PixelPath::from_index(l, i))
        })
    }

    pub fn len(&self) -> usize {
        self.occupied.iter().map(|m| m.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn cells(&self) -> u64 {
        let mut c = 0;
        for l in 0..=ORACLE_DEPTH {
            let mut m = self.occupied[l as usize];
            while m != 0 {
                let i = m.trailing_zeros();
                c |= block(l, i);
                m &= m - 1;
            }
        }
        c
    }

    /// Free volume in units of grid cells.
    pub fn free_cells(&self) -> u32 {
        CELLS - self.cells().count_ones()
    }

    fn key(&self) -> u128 {
        let o = &self.occupied;
        o[0] as u128 | (o[1] as u128) << 1 | (o[2] as u128) << 5 | (o[3] as u128) << 21
    }

    /// Fewest squares that must move before some `j`-pixel is empty: the
    /// minimum over `j`-pixels of the squares meeting it.
    fn lower_bound(&self, j: Layer) -> u32 {
        let mut hits = [0u8; 64];
        let n = 1usize << (2 * j as u32);
        for l in 0..=ORACLE_DEPTH {
            let mut m = self.occupied[l as usize];
            while m != 0 {
                let i = m.trailing_zeros() as usize;
                if l >= j {
                    hits[i >> (2 * (l - j) as u32)] += 1;
                } else {
                    let span = 1usize << (2 * (j - l) as u32);
                    hits[i * span..(i + 1) * span]
                        .iter_mut()
                        .for_each(|h| *h += 1);
                }
                m &= m - 1;
            }
        }
        hits[..n].iter().copied().min().unwrap_or(0) as u32
    }

    fn successors(&self, out: &mut Vec<Grid>) {
        let cells = self.cells();
        for l in 0..=ORACLE_DEPTH {
            let mut m = self.occupied[l as usize];
            while m != 0 {
                let a = m.trailing_zeros();
                m &= m - 1;
                let free_without_a = cells & !block(l, a);
                for b in 0..(1u32 << (2 * l as u32)) {
                    if b != a && free_without_a & block(l, b) == 0 {
                        let mut next = *self;
                        next.occupied[l as usize] ^= (1 << a) | (1 << b);
                        out.push(next);
                    }
                }
            }
        }
    }

    /// Invariant key under reordering the children of any node.
    pub fn shape_key(&self) -> u128 {
        // Exclusive upper bounds on the codes of nodes at layers 1, 2 and 3.
        const BOUND: [u64; 4] = [0, 2 + 18u64.pow(4), 2 + 2u64.pow(4), 2];
        fn sorted(mut c: [u64; 4]) -> [u64; 4] {
            for (a, b) in [(0, 1), (2, 3), (0, 2), (1, 3), (1, 2)] {
                if c[a] > c[b] {
                    c.swap(a, b);
                }
            }
            c
        }
        fn children(g: &Grid, cells: u64, l: Layer, i: u32) -> [u64; 4] {
            let mut c = [0; 4];
            for (q, slot) in c.iter_mut().enumerate() {
                *slot = code(g, cells, l + 1, 4 * i + q as u32);
            }
            sorted(c)
        }
        fn code(g: &Grid, cells: u64, l: Layer, i: u32) -> u64 {
            if cells & block(l, i) == 0 {
                return 0;
            }
            if g.occupied[l as usize] >> i & 1 == 1 {
                return 1;
            }
            let c = children(g, cells, l, i);
            let base = BOUND[l as usize + 1];
            2 + c[0] + base * (c[1] + base * (c[2] + base * c[3]))
        }
        let cells = self.cells();
        if cells == 0 {
            return 0;
        }
        if self.occupied[0] == 1 {
            return 1;
        }
        let c = children(self, cells, 0, 0).map(u128::from);
        let base = BOUND[1] as u128;
        2 + c[0] + base * (c[1] + base * (c[2] + base * c[3]))
    }
}

/// Minimum number of single-square moves after which `grid` has an empty
/// `j`-pixel, or `None` when no sequence of moves gets there.
///
/// Explores states in order of moves made plus [`Grid::lower_bound`], which
/// never overestimates and changes by at most one per move, so the first
/// goal state reached is a nearest one. Every move keeps the free volume, so
/// a grid with fewer free cells than a `j`-pixel is answered without search.
pub fn brute_force_empty_pixel(grid: &Grid, j: Layer, budget: usize) -> Result<Option<u32>> {
    if j > ORACLE_DEPTH {
        return Err(Error::LimitsTooLarge(format!(
            "layer {j} is deeper than {ORACLE_DEPTH}"
        )));
    }
    if grid.len() > SEARCH_MAX_SQUARES {
        return Err(Error::LimitsTooLarge(format!(
            "{} squares, at most {SEARCH_MAX_SQUARES} supported",
            grid.len()
        )));
    }
    if grid.free_cells() < block_len(j) {
        return Ok(None);
    }
    let h0 = grid.lower_bound(j);
    if h0 == 0 {
        return Ok(Some(0));
    }
    let mut best: HashMap<u128, u32> = HashMap::new();
    let mut buckets: Vec<Vec<(Grid, u32)>> = vec![Vec::new(); h0 as usize + 1];
    buckets[h0 as usize].push((*grid, 0));
    best.insert(grid.key(), 0);
    let mut expanded = 0usize;
    let mut next = Vec::new();
    let mut f = h0 as usize;
    while f < buckets.len() {
        let Some((state, g)) = buckets[f].pop() else {
            f += 1;
            continue;
        };
        if best.get(&state.key()).is_some_and(|&b| b < g) {
            continue;
        }
        expanded += 1;
        if expanded > budget {
            return Err(Error::SearchBudgetExceeded(budget));
        }
        next.clear();
        state.successors(&mut next);
        for s in &next {
            let h = s.lower_bound(j);
            if h == 0 {
                return Ok(Some(g + 1));
            }
            match best.entry(s.key()) {
                Entry::Occupied(mut e) => {
                    if *e.get() <= g + 1 {
                        continue;
                    }
                    e.insert(g + 1);
                }
                Entry::Vacant(e) => {
                    e.insert(g + 1);
                }
            }
            let fs = (g + 1 + h) as usize;
            if fs >= buckets.len() {
                buckets.resize(fs + 1, Vec::new());
            }
            buckets[fs].push((*s, g + 1));
        }
    }
    Ok(None)
}

/// Search results memoized by [`Grid::shape_key`].
///
/// Reordering children maps move sequences to move sequences, so shapes
/// that agree up to such reordering have the same answer.
pub struct Oracle {
    budget: usize,
    cache: HashMap<(u128, Layer), Option<u32>>,
}

impl Default for Oracle {
    fn default() -> Self {
        Self::new(DEFAULT_BUDGET)
    }
}

impl Oracle {
    pub fn new(budget: usize) -> Self {
        Oracle {
            budget,
            cache: HashMap::new(),
        }
    }

    pub fn min_moves(&mut self, grid: &Grid, j: Layer) -> Result<Option<u32>> {
        if j > ORACLE_DEPTH {
            return brute_force_empty_pixel(grid, j, self.budget);
        }
        let cells = grid.cells();
        if CELLS - cells.count_ones() < block_len(j) {
            return Ok(None);
        }
        if has_free_block(cells, j) {
            return Ok(Some(0));
        }
        let key = (grid.shape_key(), j);
        if let Some(r) = self.cache.get(&key) {
            return Ok(*r);
        }
        let r = brute_force_empty_pixel(grid, j, self.budget)?;
        self.cache.insert(key, r);
        Ok(r)
    }

    /// Number of distinct searches run so far.
    pub fn cached(&self) -> usize {
        self.cache.len()
    }
}

type Squares = ArrayVec<PixelPath, ENUMERATION_MAX_SQUARES>;

/// Every way to fill a pixel at `layer` with at most `max_squares` squares
/// no deeper than `max_depth`, as paths relative to that pixel, fewest
/// squares first.
fn subtree_options(layer: Layer, max_depth: Layer, max_squares: usize) -> Vec<Squares> {
    let mut out = vec![Squares::new()];
    if max_squares == 0 {
        return out;
    }
    let mut occupied = Squares::new();
    occupied.push(PixelPath::ROOT);
    out.push(occupied);
    if layer < max_depth {
        let child = subtree_options(layer + 1, max_depth, max_squares);
        let mut picks = [0usize; 4];
        fn fill(
            child: &[Squares],
            q: usize,
            picks: &mut [usize; 4],
            left: usize,
            out: &mut Vec<Squares>,
        ) {
            if q == 4 {
                if picks.iter().all(|&k| k == 0) {
                    return;
                }
                let mut s = Squares::new();
                for (quadrant, &k) in picks.iter().enumerate() {
                    for p in &child[k] {
                        s.push(PixelPath::ROOT.child(quadrant as u8).join(p));
                    }
                }
                out.push(s);
                return;
            }
            for (k, option) in child.iter().enumerate() {
                if option.len() > left {
                    break;
                }
                picks[q] = k;
                fill(child, q + 1, picks, left - option.len(), out);
            }
        }
        fill(&child, 0, &mut picks, max_squares, &mut out);
    }
    out.sort_by_key(|s| s.len());
    out
}

fn check_limits(max_depth: Layer, max_squares: usize) -> Result<()> {
    if max_depth > ORACLE_DEPTH || max_squares > ENUMERATION_MAX_SQUARES {
        return Err(Error::LimitsTooLarge(format!(
            "depth {max_depth} with {max_squares} squares; at most depth {ORACLE_DEPTH} with {ENUMERATION_MAX_SQUARES} squares"
        )));
    }
    Ok(())
}

/// A prebuilt quadrant subtree and the squares it holds.
type Subtree<V> = (Node<V>, Vec<(ModuleId, PixelPath)>);

/// Calls `visit` once for every canonical configuration with at most
/// `max_squares` squares, none deeper than `max_depth`.
///
/// A single tree is mutated in place between calls, so this is much cheaper
/// than [`enumerate_small_configs`]. Stops at the first error from `visit`.
pub fn for_each_small_config<V, F>(max_depth: Layer, max_squares: usize, visit: F) -> Result<()>
where
    V: Volume,
    F: FnMut(&Quadtree<V>) -> Result<()>,
{
    for_each_small_config_shard(max_depth, max_squares, 0, 1, visit)
}

/// The part of [`for_each_small_config`] that falls to `shard` out of
/// `shards`. Together the shards visit every configuration exactly once,
/// so they can run on separate threads.
pub fn for_each_small_config_shard<V, F>(
    max_depth: Layer,
    max_squares: usize,
    shard: usize,
    shards: usize,
    mut visit: F,
) -> Result<()>
where
    V: Volume,
    F: FnMut(&Quadtree<V>) -> Result<()>,
{
    check_limits(max_depth, max_squares)?;
    if shard >= shards {
        return Err(Error::LimitsTooLarge(format!("shard {shard} of {shards}")));
    }
    let mut tree = Quadtree::<V>::with_max_depth(max_depth)?;
    if shard == 0 {
        visit(&tree)?;
        if max_squares > 0 {
            tree.assign(ModuleId(0), 0, PixelPath::ROOT)?;
            visit(&tree)?;
            tree.unassign(ModuleId(0))?;
        }
    }
    if max_depth == 0 || max_squares == 0 {
        return Ok(());
    }
    let options = subtree_options(1, max_depth, max_squares);

    // Every option is built once per quadrant; the walk below swaps the
    // prebuilt subtrees in and out of the root.
    let mut subtrees: Vec<Vec<Subtree<V>>> = Vec::with_capacity(4);
    for q in 0..4u8 {
        let base = PixelPath::ROOT.child(q);
        let mut row = Vec::with_capacity(options.len());
        for option in &options {
            let mut scratch = Quadtree::<V>::with_max_depth(max_depth)?;
            let mut squares = Vec::with_capacity(option.len());
            for (k, p) in option.iter().enumerate() {
                let path = base.join(p);
                let id = ModuleId((q as usize * ENUMERATION_MAX_SQUARES + k) as u64);
                scratch.assign(id, path.layer(), path)?;
                squares.push((id, path));
            }
            let node = match &mut scratch.root {
                Node::Split(b) => mem::replace(&mut b.children[q as usize], Node::Empty),
                _ => Node::Empty,
            };
            row.push((node, squares));
        }
        subtrees.push(row);
    }
    tree.root = Node::Split(Box::new(Branch::empty(0)));

    // Shards take turns over the choices for the first two quadrants.
    struct Split {
        shard: usize,
        shards: usize,
        prefixes: usize,
    }
    fn recurse<V: Volume, F: FnMut(&Quadtree<V>) -> Result<()>>(
        tree: &mut Quadtree<V>,
        subtrees: &mut [Vec<Subtree<V>>],
        q: usize,
        left: usize,
        split: &mut Split,
        visit: &mut F,
    ) -> Result<()> {
        if q == 2 {
            split.prefixes += 1;
            if (split.prefixes - 1) % split.shards != split.shard {
                return Ok(());
            }
        }
        if q == 4 {
            if tree.index.is_empty() {
                return Ok(());
            }
            let Node::Split(b) = &mut tree.root else {
                unreachable!("root stays split during the walk");
            };
            b.capacity = b
                .children
                .iter()
                .fold(V::zero(), |acc, c| acc + c.capacity(1));
            b.squares = b.children.iter().map(Node::squares).sum();
            b.refresh(0);
            return visit(tree);
        }
        let (row, rest) = subtrees.split_first_mut().expect("one row per quadrant");
        for (node, squares) in row.iter_mut() {
            if squares.len() > left {
                break;
            }
            swap_root_child(tree, q, node, squares, true);
            let r = recurse(tree, rest, q + 1, left - squares.len(), split, visit);
            swap_root_child(tree, q, node, squares, false);
            r?;
        }
        Ok(())
    }
    let mut split = Split {
        shard,
        shards,
        prefixes: 0,
    };
    recurse(
        &mut tree,
        &mut subtrees,
        0,
        max_squares,
        &mut split,
        &mut visit,
    )
}

fn swap_root_child<V: Volume>(
    tree: &mut Quadtree<V>,
    q: usize,
    node: &mut Node<V>,
    squares: &[(ModuleId, PixelPath)],
    entering: bool,
) {
    let Node::Split(b) = &mut tree.root else {
        unreachable!("root stays split during the walk");
    };
    mem::swap(&mut b.children[q], node);
    for (id, path) in squares {
        if entering {
            tree.index.insert(*id, *path);
        } else {
            tree.index.remove(id);
        }
    }
}

/// Lazily yields every canonical configuration with at most `max_squares`
/// squares, none deeper than `max_depth`, each exactly once.
pub fn enumerate_small_configs<V: Volume>(
    max_depth: Layer,
    max_squares: usize,
) -> Result<SmallConfigs<V>> {
    check_limits(max_depth, max_squares)?;
    let options = if max_depth == 0 {
        Vec::new()
    } else {
        subtree_options(1, max_depth, max_squares)
    };
    Ok(SmallConfigs {
        max_depth,
        max_squares,
        options,
        stage: 0,
        picks: [0; 4],
        _volume: std::marker::PhantomData,
    })
}

pub struct SmallConfigs<V> {
    max_depth: Layer,
    max_squares: usize,
    options: Vec<Squares>,
    /// 0: empty tree, 1: root square, 2: split roots, 3: done.
    stage: u8,
    picks: [usize; 4],
    _volume: std::marker::PhantomData<V>,
}

impl<V: Volume> SmallConfigs<V> {
    fn total(&self) -> usize {
        self.picks.iter().map(|&k| self.options[k].len()).sum()
    }

    /// Advances `picks` like an odometer to the next combination within budget.
    fn advance(&mut self) -> bool {
        let mut q = 3;
        loop {
            self.picks[q] += 1;
            if self.picks[q] < self.options.len() && self.total() <= self.max_squares {
                return true;
            }
            // Options are sorted by size, so later ones in this slot are too large.
            self.picks[q] = 0;
            if q == 0 {
                return false;
            }
            q -= 1;
        }
    }

    fn build(&self) -> Quadtree<V> {
        let mut tree = Quadtree::with_max_depth(self.max_depth).expect("checked depth");
        let mut id = 0;
        for (q, &k) in self.picks.iter().enumerate() {
            for p in &self.options[k] {
                let path = PixelPath::ROOT.child(q as u8).join(p);
                tree.assign(ModuleId(id), path.layer(), path)
                    .expect("enumerated squares are disjoint");
                id += 1;
            }
        }
        tree
    }
}

impl<V: Volume> Iterator for SmallConfigs<V> {
    type Item = Quadtree<V>;

    fn next(&mut self) -> Option<Quadtree<V>> {
        loop {
            match self.stage {
                0 => {
                    self.stage = if self.max_squares == 0 { 3 } else { 1 };
                    return Some(Quadtree::with_max_depth(self.max_depth).expect("checked depth"));
                }
                1 => {
                    self.stage = if self.max_depth == 0 { 3 } else { 2 };
                    let mut t = Quadtree::with_max_depth(self.max_depth).expect("checked depth");
                    t.assign(ModuleId(0), 0, PixelPath::ROOT)
                        .expect("empty tree");
                    return Some(t);
                }
                2 => {
                    if !self.advance() {
                        self.stage = 3;
                        continue;
                    }
                    return Some(self.build());
                }
                _ => return None,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Dyadic;

    type Tree = Quadtree<Dyadic>;

    fn p(q: &[u8]) -> PixelPath {
        PixelPath::from_quadrants(q.iter().copied())
    }

    fn grid(squares: &[&[u8]]) -> Grid {
        Grid::from_squares(squares.iter().map(|q| p(q))).unwrap()
    }

    #[test]
    fn depth_one_single_square() {
        let all: Vec<_> = enumerate_small_configs::<Dyadic>(1, 1).unwrap().collect();
        assert_eq!(all.len(), 6);
        let mut count = 0;
        for_each_small_config::<Dyadic, _>(1, 1, |_| {
            count += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(count, 6);
    }

    /// Canonical text with module ids dropped.
    fn shape_of(canonical: &str) -> String {
        canonical
            .split(':')
            .enumerate()
            .map(|(i, part)| {
                if i == 0 {
                    part
                } else {
                    part.trim_start_matches(|c: char| c.is_ascii_digit())
                }
            })
            .collect()
    }

    #[test]
    fn enumeration_is_duplicate_free_and_valid() {
        let mut seen = std::collections::HashSet::new();
        let mut visited = Vec::new();
        for t in enumerate_small_configs::<Dyadic>(2, 3).unwrap() {
            t.validate().unwrap();
            assert!(t.len() <= 3);
            assert!(seen.insert(t.to_canonical()));
        }
        for_each_small_config::<Dyadic, _>(2, 3, |t| {
            visited.push(t.to_canonical());
            Ok(())
        })
        .unwrap();
        assert_eq!(visited.len(), seen.len());
        let seen: std::collections::HashSet<String> = seen.iter().map(|c| shape_of(c)).collect();
        assert!(visited.iter().all(|c| seen.contains(&shape_of(c))));
    }

    #[test]
    fn shards_cover_the_enumeration_once() {
        let mut all = Vec::new();
        for_each_small_config::<Dyadic, _>(2, 3, |t| {
            all.push(t.to_canonical());
            Ok(())
        })
        .unwrap();
        let mut sharded = Vec::new();
        for shard in 0..3 {
            for_each_small_config_shard::<Dyadic, _>(2, 3, shard, 3, |t| {
                sharded.push(t.to_canonical());
                Ok(())
            })
            .unwrap();
        }
        all.sort();
        sharded.sort();
        assert_eq!(all, sharded);
    }

    #[test]
    fn limits() {
        assert!(matches!(
            enumerate_small_configs::<Dyadic>(4, 1),
            Err(Error::LimitsTooLarge(_))
        ));
        assert!(matches!(
            for_each_small_config::<Dyadic, _>(3, 7, |_| Ok(())),
            Err(Error::LimitsTooLarge(_))
        ));
        assert!(matches!(
            brute_force_empty_pixel(&Grid::default(), 4, 10),
            Err(Error::LimitsTooLarge(_))
        ));
    }

    #[test]
    fn search_answers() {
        assert_eq!(
            brute_force_empty_pixel(&grid(&[&[0]]), 1, 100).unwrap(),
            Some(0)
        );
        assert_eq!(
            brute_force_empty_pixel(&grid(&[&[0], &[1], &[2], &[3, 0]]), 1, 100).unwrap(),
            None
        );
        // One 2-square in each quadrant: a single move frees a quadrant.
        let g = grid(&[&[0, 0], &[1, 0], &[2, 0], &[3, 0]]);
        assert_eq!(brute_force_empty_pixel(&g, 1, 1000).unwrap(), Some(1));
        assert_eq!(brute_force_empty_pixel(&g, 0, 1000).unwrap(), None);
    }

    #[test]
    fn three_holes_need_three_moves() {
        // Each quadrant holds three 2-squares around one hole.
        let mut squares = Vec::new();
        for a in 0..4u8 {
            for b in 0..3u8 {
                squares.push(p(&[a, b]));
            }
        }
        let g = Grid::from_squares(squares).unwrap();
        assert_eq!(brute_force_empty_pixel(&g, 1, 100_000).unwrap(), Some(3));
    }

    #[test]
    fn free_blocks_match_the_bound() {
        let mut state = 0x9e37_79b9_7f4a_7c15u64;
        for _ in 0..2000 {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let g = Grid {
                occupied: [0, 0, 0, state & state >> 17 & state >> 31],
            };
            for j in 0..=ORACLE_DEPTH {
                assert_eq!(has_free_block(g.cells(), j), g.lower_bound(j) == 0);
            }
        }
    }

    #[test]
    fn shape_key_ignores_child_order() {
        let a = grid(&[&[0, 1], &[2]]);
        let b = grid(&[&[3, 0], &[1]]);
        let c = grid(&[&[3, 0], &[1, 1]]);
        assert_eq!(a.shape_key(), b.shape_key());
        assert_ne!(a.shape_key(), c.shape_key());
        assert_eq!(Grid::default().shape_key(), 0);
    }

    #[test]
    fn grid_round_trip() {
        let t = {
            let mut t = Tree::new();
            t.assign(ModuleId(0), 2, p(&[1, 2])).unwrap();
            t.assign(ModuleId(1), 3, p(&[3, 3, 3])).unwrap();
            t
        };
        let g = Grid::from_tree(&t).unwrap();
        assert_eq!(
            g.squares().collect::<Vec<_>>(),
            vec![p(&[1, 2]), p(&[3, 3, 3])]
        );
        assert_eq!(g.free_cells(), 64 - 4 - 1);
    }
}
