//! Quadtree configurations: assignment of aligned squares to pixels.
//!
//! A configuration is stored as a canonical tree. Leaves are either empty or
//! hold one square; an internal node has four children and caches its
//! remaining capacity, the number of squares below it, and the shallowest
//! empty leaf below it. Four empty siblings are always collapsed into a single
//! empty leaf, so every internal node is fractional and every empty leaf is
//! maximally empty.

use std::collections::BTreeMap;
use std::fmt;
use std::mem;

use crate::error::{Error, Result};
use crate::path::{PixelPath, MAX_LAYER};
use crate::scalar::Volume;
use crate::{Layer, Ledger, ModuleId};

/// Default bound on the layer of any assigned square.
pub const DEFAULT_MAX_DEPTH: Layer = 24;

pub(crate) const NO_EMPTY: Layer = Layer::MAX;

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Node<V> {
    Empty,
    Occupied(ModuleId),
    Split(Box<Branch<V>>),
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Branch<V> {
    pub(crate) children: [Node<V>; 4],
    pub(crate) capacity: V,
    pub(crate) squares: u32,
    /// Shallowest layer of an empty leaf in this subtree, or [`NO_EMPTY`].
    pub(crate) shallowest_empty: Layer,
}

impl<V: Volume> Branch<V> {
    pub(crate) fn empty(depth: Layer) -> Self {
        Branch {
            children: [Node::Empty, Node::Empty, Node::Empty, Node::Empty],
            capacity: V::pixel(depth),
            squares: 0,
            shallowest_empty: depth + 1,
        }
    }

    pub(crate) fn refresh(&mut self, depth: Layer) {
        self.shallowest_empty = self
            .children
            .iter()
            .map(|c| c.shallowest_empty(depth + 1))
            .min()
            .unwrap_or(NO_EMPTY);
    }
}

impl<V: Volume> Node<V> {
    /// Shallowest empty layer in the subtree rooted at this node, sitting at `depth`.
    pub(crate) fn shallowest_empty(&self, depth: Layer) -> Layer {
        match self {
            Node::Empty => depth,
            Node::Occupied(_) => NO_EMPTY,
            Node::Split(b) => b.shallowest_empty,
        }
    }

    pub(crate) fn capacity(&self, depth: Layer) -> V {
        match self {
            Node::Empty => V::pixel(depth),
            Node::Occupied(_) => V::zero(),
            Node::Split(b) => b.capacity.clone(),
        }
    }

    pub(crate) fn squares(&self) -> u32 {
        match self {
            Node::Empty => 0,
            Node::Occupied(_) => 1,
            Node::Split(b) => b.squares,
        }
    }
}

/// Classification of a pixel relative to a configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PixelKind {
    /// A square of the pixel's own layer is assigned to it.
    Occupied,
    /// A strict ancestor is occupied.
    Blocked,
    /// Free and containing no square.
    FreeEmpty,
    /// Free and containing at least one square.
    FreeFractional,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PixelState {
    pub kind: PixelKind,
    /// Empty with a non-empty parent (the root counts when it is empty).
    pub maximally_empty: bool,
    /// Fractional with at least one maximally empty child.
    pub open: bool,
}

impl PixelState {
    fn of(kind: PixelKind) -> Self {
        PixelState {
            kind,
            maximally_empty: false,
            open: false,
        }
    }

    pub fn is_free(&self) -> bool {
        matches!(self.kind, PixelKind::FreeEmpty | PixelKind::FreeFractional)
    }

    pub fn is_empty(&self) -> bool {
        self.kind == PixelKind::FreeEmpty
    }
}

/// Height of a configuration: zero when nothing is assigned, otherwise one
/// more than the deepest layer holding a square.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Height(pub u8);

/// A quadtree configuration over volumes of type `V`.
#[derive(Clone, PartialEq)]
pub struct Quadtree<V> {
    pub(crate) root: Node<V>,
    pub(crate) index: BTreeMap<ModuleId, PixelPath>,
    max_depth: Layer,
}

impl<V: Volume> Default for Quadtree<V> {
    fn default() -> Self {
        Self::new()
    }
}

impl<V: Volume> Quadtree<V> {
    /// The empty unit square, accepting squares down to [`DEFAULT_MAX_DEPTH`].
    pub fn new() -> Self {
        Quadtree {
            root: Node::Empty,
            index: BTreeMap::new(),
            max_depth: DEFAULT_MAX_DEPTH,
        }
    }

    pub fn with_max_depth(max_depth: Layer) -> Result<Self> {
        if max_depth > MAX_LAYER {
            return Err(Error::DepthExceeded {
                layer: max_depth as u32,
                max_depth: MAX_LAYER,
            });
        }
        Ok(Quadtree {
            max_depth,
            ..Self::new()
        })
    }

    pub fn max_depth(&self) -> Layer {
        self.max_depth
    }

    pub(crate) fn root_node(&self) -> &Node<V> {
        &self.root
    }

    /// Number of assigned squares.
    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    /// Placed modules and their pixels, ordered by module id.
    pub fn modules(&self) -> impl Iterator<Item = (ModuleId, PixelPath)> + '_ {
        self.index.iter().map(|(id, p)| (*id, *p))
    }

    pub fn position(&self, id: ModuleId) -> Option<PixelPath> {
        self.index.get(&id).copied()
    }

    pub fn contains_module(&self, id: ModuleId) -> bool {
        self.index.contains_key(&id)
    }

    /// The module occupying exactly `path`, if any.
    pub fn module_at(&self, path: PixelPath) -> Option<ModuleId> {
        match self.locate(path) {
            (depth, Node::Occupied(id)) if depth == path.layer() => Some(*id),
            _ => None,
        }
    }

    /// Deepest stored node on the way to `path`, with its layer.
    pub(crate) fn locate(&self, path: PixelPath) -> (Layer, &Node<V>) {
        let mut node = &self.root;
        let mut depth = 0;
        while depth < path.layer() {
            match node {
                Node::Split(b) => {
                    node = &b.children[path.quadrant(depth) as usize];
                    depth += 1;
                }
                _ => break,
            }
        }
        (depth, node)
    }

    pub fn classify(&self, path: PixelPath) -> PixelState {
        let (depth, node) = self.locate(path);
        match node {
            Node::Occupied(_) if depth == path.layer() => PixelState::of(PixelKind::Occupied),
            Node::Occupied(_) => PixelState::of(PixelKind::Blocked),
            Node::Empty => PixelState {
                kind: PixelKind::FreeEmpty,
                maximally_empty: depth == path.layer(),
                open: false,
            },
            Node::Split(b) => PixelState {
                kind: PixelKind::FreeFractional,
                maximally_empty: false,
                open: b.children.iter().any(|c| matches!(c, Node::Empty)),
            },
        }
    }

    /// Remaining capacity of `path`.
    pub fn capacity(&self, path: PixelPath) -> V {
        let (depth, node) = self.locate(path);
        match node {
            Node::Occupied(_) => V::zero(),
            Node::Empty => V::pixel(path.layer()),
            Node::Split(b) => {
                debug_assert_eq!(depth, path.layer());
                b.capacity.clone()
            }
        }
    }

    /// Remaining capacity of the whole configuration, `cap(T)`.
    pub fn total_capacity(&self) -> V {
        self.root.capacity(0)
    }

    /// Total volume of the assigned squares.
    pub fn assigned_volume(&self) -> V {
        V::one() - self.total_capacity()
    }

    pub fn height(&self) -> Height {
        Height(
            self.index
                .values()
                .map(|p| p.layer() + 1)
                .max()
                .unwrap_or(0),
        )
    }

    /// Layer of the smallest assigned square.
    pub fn smallest_square_layer(&self) -> Option<Layer> {
        self.index.values().map(|p| p.layer()).max()
    }

    /// All maximally empty pixels, by capacity descending and then z-order.
    pub fn maximally_empty_pixels(&self) -> Vec<PixelPath> {
        fn walk<V>(branch: &Branch<V>, path: PixelPath, out: &mut Vec<PixelPath>) {
            for (q, c) in branch.children.iter().enumerate() {
                match c {
                    Node::Empty => out.push(path.child(q as u8)),
                    Node::Occupied(_) => {}
                    Node::Split(b) => walk(b, path.child(q as u8), out),
                }
            }
        }
        let mut out = Vec::with_capacity(64);
        match &self.root {
            Node::Empty => out.push(PixelPath::ROOT),
            Node::Occupied(_) => {}
            Node::Split(b) => walk(b, PixelPath::ROOT, &mut out),
        }
        out.sort_unstable_by_key(|p| (p.layer(), p.index()));
        out
    }

    /// Fractional pixels with at least one empty child, in z-order.
    pub fn open_pixels(&self) -> Vec<PixelPath> {
        fn walk<V>(node: &Node<V>, path: PixelPath, out: &mut Vec<PixelPath>) {
            if let Node::Split(b) = node {
                if b.children.iter().any(|c| matches!(c, Node::Empty)) {
                    out.push(path);
                }
                for (q, c) in b.children.iter().enumerate() {
                    walk(c, path.child(q as u8), out);
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.root, PixelPath::ROOT, &mut out);
        out
    }

    /// At most one open pixel per layer.
    pub fn is_compact(&self) -> bool {
        let mut seen = [false; MAX_LAYER as usize + 1];
        for p in self.open_pixels() {
            let slot = &mut seen[p.layer() as usize];
            if *slot {
                return false;
            }
            *slot = true;
        }
        true
    }

    /// Occupied pixels inside `region` (inclusive), in z-order.
    pub fn squares_within(&self, region: PixelPath) -> Vec<(PixelPath, ModuleId)> {
        fn walk<V>(node: &Node<V>, path: PixelPath, out: &mut Vec<(PixelPath, ModuleId)>) {
            match node {
                Node::Empty => {}
                Node::Occupied(id) => out.push((path, *id)),
                Node::Split(b) => {
                    for (q, c) in b.children.iter().enumerate() {
                        walk(c, path.child(q as u8), out);
                    }
                }
            }
        }
        let mut out = Vec::new();
        let (depth, node) = self.locate(region);
        if depth == region.layer() {
            walk(node, region, &mut out);
        }
        out
    }

    /// Assigns module `id`, whose padded layer is `layer`, to the empty pixel `path`.
    pub fn assign(&mut self, id: ModuleId, layer: Layer, path: PixelPath) -> Result<()> {
        if layer != path.layer() {
            return Err(Error::LayerMismatch {
                module: layer,
                pixel: path.layer(),
            });
        }
        if layer > self.max_depth {
            return Err(Error::DepthExceeded {
                layer: layer as u32,
                max_depth: self.max_depth,
            });
        }
        if self.index.contains_key(&id) {
            return Err(Error::DuplicateModule(id));
        }
        if !self.classify(path).is_empty() {
            return Err(Error::PixelNotEmpty(path));
        }
        place(&mut self.root, 0, path, id);
        self.index.insert(id, path);
        Ok(())
    }

    /// Removes module `id`, returning the pixel it occupied.
    pub fn unassign(&mut self, id: ModuleId) -> Result<PixelPath> {
        let path = self.index.remove(&id).ok_or(Error::UnknownModule(id))?;
        let removed = clear(&mut self.root, 0, path);
        debug_assert_eq!(removed, id);
        Ok(path)
    }

    /// Reallocates the square at `from` to the empty pixel `to` of the same layer.
    pub fn move_square(
        &mut self,
        from: PixelPath,
        to: PixelPath,
        ledger: &mut Ledger<V>,
    ) -> Result<()> {
        let id = self.module_at(from).ok_or(Error::SourceNotOccupied(from))?;
        if from.layer() != to.layer() {
            return Err(Error::LayerMismatch {
                module: from.layer(),
                pixel: to.layer(),
            });
        }
        if !self.classify(to).is_empty() {
            return Err(Error::DestinationNotEmpty(to));
        }
        clear(&mut self.root, 0, from);
        place(&mut self.root, 0, to, id);
        self.index.insert(id, to);
        ledger.record_relocation(id, from, to);
        Ok(())
    }

    /// Checks canonical form, cached values, and the module index against a
    /// from-scratch evaluation of the definitions.
    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeMap::new();
        check_node(&self.root, PixelPath::ROOT, self.max_depth, &mut seen)?;
        if seen != self.index {
            return Err(Error::InvariantViolated(
                "module index disagrees with the tree".into(),
            ));
        }
        let direct = definitional_capacity(self, PixelPath::ROOT);
        if direct != self.total_capacity() {
            return Err(Error::InvariantViolated(format!(
                "cached capacity {} differs from definition {}",
                self.total_capacity(),
                direct
            )));
        }
        Ok(())
    }

    /// Checks that the maximally empty pixels are pairwise disjoint and that
    /// their capacities add up to the capacity of the root.
    pub fn check_empty_partition(&self) -> Result<()> {
        struct Walk {
            /// Volume of the empty pixels seen so far, in pixels of the finest layer.
            units: u64,
            /// End of the previous empty pixel on the z-curve at the finest layer.
            end: u64,
            last: PixelPath,
            overlap: Option<(PixelPath, PixelPath)>,
        }
        impl Walk {
            #[inline]
            fn empty(&mut self, path: PixelPath) {
                let shift = 2 * (MAX_LAYER - path.layer()) as u32;
                let start = path.index() << shift;
                if start < self.end && self.overlap.is_none() {
                    self.overlap = Some((self.last, path));
                }
                self.end = self.end.max((path.index() + 1) << shift);
                self.units = self.units.saturating_add(1 << shift);
                self.last = path;
            }
        }
        fn walk<V>(branch: &Branch<V>, path: PixelPath, w: &mut Walk) {
            for (q, c) in branch.children.iter().enumerate() {
                match c {
                    Node::Empty => w.empty(path.child(q as u8)),
                    Node::Occupied(_) => {}
                    Node::Split(b) => walk(b, path.child(q as u8), w),
                }
            }
        }
        let mut w = Walk {
            units: 0,
            end: 0,
            last: PixelPath::ROOT,
            overlap: None,
        };
        match &self.root {
            Node::Empty => w.empty(PixelPath::ROOT),
            Node::Occupied(_) => {}
            Node::Split(b) => walk(b, PixelPath::ROOT, &mut w),
        }
        if let Some((p, q)) = w.overlap {
            return Err(Error::InvariantViolated(format!(
                "maximally empty pixels {p} and {q} overlap"
            )));
        }
        let sum = V::from_u64(w.units) * V::pixel(MAX_LAYER);
        if sum != self.total_capacity() {
            return Err(Error::InvariantViolated(format!(
                "maximally empty pixels hold {sum}, root capacity is {}",
                self.total_capacity()
            )));
        }
        Ok(())
    }

    /// Canonical pre-order text: `E` empty leaf, `O:<id>` occupied leaf,
    /// `(` four children `)` internal node.
    pub fn to_canonical(&self) -> String {
        fn write<V>(node: &Node<V>, out: &mut String) {
            match node {
                Node::Empty => out.push('E'),
                Node::Occupied(id) => {
                    out.push_str("O:");
                    out.push_str(&id.0.to_string());
                }
                Node::Split(b) => {
                    out.push('(');
                    b.children.iter().for_each(|c| write(c, out));
                    out.push(')');
                }
            }
        }
        let mut out = String::new();
        write(&self.root, &mut out);
        out
    }

    /// Parses the canonical text form. Whitespace is ignored and internal
    /// nodes with four empty children are collapsed.
    pub fn from_canonical(text: &str, max_depth: Layer) -> Result<Self> {
        let mut tree = Self::with_max_depth(max_depth)?;
        let bytes: Vec<u8> = text.bytes().filter(|b| !b.is_ascii_whitespace()).collect();
        let mut pos = 0;
        let mut squares = Vec::new();
        parse_node(&bytes, &mut pos, PixelPath::ROOT, &mut squares)?;
        if pos != bytes.len() {
            return Err(Error::Parse(format!("trailing input at byte {pos}")));
        }
        for (path, id) in squares {
            tree.assign(id, path.layer(), path)?;
        }
        Ok(tree)
    }
}

impl<V: Volume> fmt::Debug for Quadtree<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Quadtree({})", self.to_canonical())
    }
}

impl<V: Volume> fmt::Display for Quadtree<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_canonical())
    }
}

fn place<V: Volume>(node: &mut Node<V>, depth: Layer, path: PixelPath, id: ModuleId) {
    if depth == path.layer() {
        debug_assert!(matches!(node, Node::Empty));
        *node = Node::Occupied(id);
        return;
    }
    if matches!(node, Node::Empty) {
        *node = Node::Split(Box::new(Branch::empty(depth)));
    }
    let Node::Split(b) = node else {
        unreachable!("assignment below an occupied pixel");
    };
    place(
        &mut b.children[path.quadrant(depth) as usize],
        depth + 1,
        path,
        id,
    );
    b.capacity -= V::pixel(path.layer());
    b.squares += 1;
    b.refresh(depth);
}

fn clear<V: Volume>(node: &mut Node<V>, depth: Layer, path: PixelPath) -> ModuleId {
    if depth == path.layer() {
        let Node::Occupied(id) = mem::replace(node, Node::Empty) else {
            unreachable!("index points at a pixel that is not occupied");
        };
        return id;
    }
    let Node::Split(b) = node else {
        unreachable!("index points below a leaf");
    };
    let id = clear(
        &mut b.children[path.quadrant(depth) as usize],
        depth + 1,
        path,
    );
    b.capacity += V::pixel(path.layer());
    b.squares -= 1;
    if b.squares == 0 {
        *node = Node::Empty;
    } else {
        b.refresh(depth);
    }
    id
}

fn check_node<V: Volume>(
    node: &Node<V>,
    path: PixelPath,
    max_depth: Layer,
    seen: &mut BTreeMap<ModuleId, PixelPath>,
) -> Result<()> {
    let fail = |msg: String| Err(Error::InvariantViolated(format!("{path}: {msg}")));
    match node {
        Node::Empty => Ok(()),
        Node::Occupied(id) => {
            if path.layer() > max_depth {
                return fail("square deeper than the maximum depth".into());
            }
            if seen.insert(*id, path).is_some() {
                return fail(format!("module {id} appears twice"));
            }
            Ok(())
        }
        Node::Split(b) => {
            if path.layer() >= max_depth {
                return fail("internal node at the maximum depth".into());
            }
            if b.children.iter().all(|c| matches!(c, Node::Empty)) {
                return fail("four empty children not collapsed".into());
            }
            for (q, c) in b.children.iter().enumerate() {
                check_node(c, path.child(q as u8), max_depth, seen)?;
            }
            let squares: u32 = b.children.iter().map(Node::squares).sum();
            if squares != b.squares {
                return fail(format!("cached square count {} != {squares}", b.squares));
            }
            let cap = b
                .children
                .iter()
                .fold(V::zero(), |acc, c| acc + c.capacity(path.layer() + 1));
            if cap != b.capacity {
                return fail(format!("cached capacity {} != {cap}", b.capacity));
            }
            let shallowest = b
                .children
                .iter()
                .map(|c| c.shallowest_empty(path.layer() + 1))
                .min()
                .unwrap_or(NO_EMPTY);
            if shallowest != b.shallowest_empty {
                return fail("stale shallowest-empty cache".into());
            }
            Ok(())
        }
    }
}

/// Capacity evaluated from pixel classification alone, without cached values.
pub(crate) fn definitional_capacity<V: Volume>(tree: &Quadtree<V>, path: PixelPath) -> V {
    let state = tree.classify(path);
    match state.kind {
        PixelKind::Occupied | PixelKind::Blocked => V::zero(),
        PixelKind::FreeEmpty => V::pixel(path.layer()),
        PixelKind::FreeFractional => (0..4)
            .map(|q| definitional_capacity(tree, path.child(q)))
            .fold(V::zero(), |a, b| a + b),
    }
}

fn parse_node(
    bytes: &[u8],
    pos: &mut usize,
    path: PixelPath,
    out: &mut Vec<(PixelPath, ModuleId)>,
) -> Result<()> {
    let err = |pos: usize, what: &str| Error::Parse(format!("expected {what} at byte {pos}"));
    match bytes.get(*pos) {
        Some(b'E') => {
            *pos += 1;
            Ok(())
        }
        Some(b'O') => {
            *pos += 1;
            if bytes.get(*pos) != Some(&b':') {
                return Err(err(*pos, "':'"));
            }
            *pos += 1;
            let start = *pos;
            while bytes.get(*pos).is_some_and(u8::is_ascii_digit) {
                *pos += 1;
            }
            let digits = std::str::from_utf8(&bytes[start..*pos]).expect("ascii digits");
            let id = digits.parse::<u64>().map_err(|_| err(start, "module id"))?;
            out.push((path, ModuleId(id)));
            Ok(())
        }
        Some(b'(') => {
            *pos += 1;
            if path.layer() >= MAX_LAYER {
                return Err(Error::Parse(format!("tree deeper than {MAX_LAYER}")));
            }
            for q in 0..4 {
                parse_node(bytes, pos, path.child(q), out)?;
            }
            if bytes.get(*pos) != Some(&b')') {
                return Err(err(*pos, "')'"));
            }
            *pos += 1;
            Ok(())
        }
        _ => Err(err(*pos, "'E', 'O' or '('")),
    }
}
