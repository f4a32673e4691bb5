use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::scalar::Volume;
use crate::Layer;

/// Deepest layer a [`PixelPath`] can address (two bits per quadrant in a `u64`).
pub const MAX_LAYER: Layer = 31;

/// Address of a quadtree pixel as a sequence of quadrant indices.
///
/// Quadrant `0` is the north-west child, `1` north-east, `2` south-west and
/// `3` south-east. Listing children by index traces the z-order curve, so the
/// packed code of a path is its position within its layer in z-order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PixelPath {
    code: u64,
    layer: Layer,
}

impl PixelPath {
    pub const ROOT: PixelPath = PixelPath { code: 0, layer: 0 };

    pub fn root() -> Self {
        Self::ROOT
    }

    /// Builds a path from quadrant indices, each in `0..4`.
    ///
    /// Panics if an index is out of range or the path is deeper than [`MAX_LAYER`].
    pub fn from_quadrants<I: IntoIterator<Item = u8>>(quadrants: I) -> Self {
        quadrants
            .into_iter()
            .fold(Self::ROOT, |path, q| path.child(q))
    }

    /// The pixel with z-order position `index` among the `4^layer` pixels of `layer`.
    #[inline]
    pub fn from_index(layer: Layer, index: u64) -> Self {
        assert!(layer <= MAX_LAYER, "layer {layer} too deep");
        assert!(
            index < (1u64 << (2 * layer as u32)),
            "index {index} out of range for layer {layer}"
        );
        PixelPath { code: index, layer }
    }

    #[inline]
    pub fn layer(&self) -> Layer {
        self.layer
    }

    /// Position of this pixel within its layer in z-order.
    #[inline]
    pub fn index(&self) -> u64 {
        self.code
    }

    /// Quadrant taken when descending from layer `depth` to `depth + 1`.
    #[inline]
    pub fn quadrant(&self, depth: Layer) -> u8 {
        debug_assert!(depth < self.layer);
        ((self.code >> (2 * (self.layer - 1 - depth) as u32)) & 3) as u8
    }

    pub fn quadrants(&self) -> impl Iterator<Item = u8> + '_ {
        (0..self.layer).map(move |d| self.quadrant(d))
    }

    #[inline]
    pub fn child(&self, quadrant: u8) -> Self {
        assert!(quadrant < 4, "quadrant index {quadrant} out of range");
        assert!(self.layer < MAX_LAYER, "path deeper than {MAX_LAYER}");
        PixelPath {
            code: (self.code << 2) | quadrant as u64,
            layer: self.layer + 1,
        }
    }

    #[inline]
    pub fn parent(&self) -> Option<Self> {
        (self.layer > 0).then(|| PixelPath {
            code: self.code >> 2,
            layer: self.layer - 1,
        })
    }

    /// The ancestor (or self) at `layer`, which must not exceed this path's layer.
    #[inline]
    pub fn ancestor(&self, layer: Layer) -> Self {
        assert!(layer <= self.layer);
        PixelPath {
            code: self.code >> (2 * (self.layer - layer) as u32),
            layer,
        }
    }

    /// True if `other` equals this pixel or lies inside it.
    #[inline]
    pub fn contains(&self, other: &PixelPath) -> bool {
        other.layer >= self.layer && other.ancestor(self.layer) == *self
    }

    #[inline]
    pub fn is_disjoint(&self, other: &PixelPath) -> bool {
        !self.contains(other) && !other.contains(self)
    }

    /// The z-least descendant at `layer` (self when the layers agree).
    pub fn first_descendant(&self, layer: Layer) -> Self {
        assert!(layer >= self.layer && layer <= MAX_LAYER);
        PixelPath {
            code: self.code << (2 * (layer - self.layer) as u32),
            layer,
        }
    }

    /// Appends the quadrants of `suffix` to this path.
    #[inline]
    pub fn join(&self, suffix: &PixelPath) -> Self {
        let layer = self.layer + suffix.layer;
        assert!(layer <= MAX_LAYER, "path deeper than {MAX_LAYER}");
        PixelPath {
            code: (self.code << (2 * suffix.layer as u32)) | suffix.code,
            layer,
        }
    }

    /// The quadrants of this path below `ancestor`, which must contain it.
    #[inline]
    pub fn relative_to(&self, ancestor: &PixelPath) -> Self {
        assert!(ancestor.contains(self));
        let layer = self.layer - ancestor.layer;
        let mask = if layer == 0 {
            0
        } else {
            u64::MAX >> (64 - 2 * layer as u32)
        };
        PixelPath {
            code: self.code & mask,
            layer,
        }
    }

    /// Volume `4^-layer` of this pixel.
    #[inline]
    pub fn volume<V: Volume>(&self) -> V {
        V::pixel(self.layer)
    }
}

impl fmt::Debug for PixelPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PixelPath{self}")
    }
}

impl fmt::Display for PixelPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, q) in self.quadrants().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{q}")?;
        }
        f.write_str("]")
    }
}

/// Accepts `[0,3,1]`, `031`, `[]` or `root`.
impl FromStr for PixelPath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        if s == "root" {
            return Ok(Self::ROOT);
        }
        let digits = s.trim_start_matches('[').trim_end_matches(']');
        let mut path = Self::ROOT;
        for c in digits.chars().filter(|c| *c != ',' && !c.is_whitespace()) {
            let q = match c {
                '0'..='3' => c as u8 - b'0',
                _ => return Err(Error::Parse(format!("invalid quadrant '{c}' in {s:?}"))),
            };
            if path.layer == MAX_LAYER {
                return Err(Error::Parse(format!("path {s:?} deeper than {MAX_LAYER}")));
            }
            path = path.child(q);
        }
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrants_round_trip() {
        let p = PixelPath::from_quadrants([0, 3, 1]);
        assert_eq!(p.layer(), 3);
        assert_eq!(p.quadrants().collect::<Vec<_>>(), vec![0, 3, 1]);
        assert_eq!(p.index(), 0b00_11_01);
        assert_eq!(p.to_string(), "[0,3,1]");
        assert_eq!("031".parse::<PixelPath>().unwrap(), p);
        assert_eq!("[0, 3, 1]".parse::<PixelPath>().unwrap(), p);
        assert_eq!("[]".parse::<PixelPath>().unwrap(), PixelPath::ROOT);
        assert!("04".parse::<PixelPath>().is_err());
    }

    #[test]
    fn ancestry() {
        let p = PixelPath::from_quadrants([2, 1]);
        let c = p.child(3);
        assert!(p.contains(&c));
        assert!(!c.contains(&p));
        assert!(PixelPath::ROOT.contains(&c));
        assert_eq!(c.parent(), Some(p));
        assert_eq!(c.ancestor(1), PixelPath::from_quadrants([2]));
        assert_eq!(c.relative_to(&p), PixelPath::from_quadrants([3]));
        assert_eq!(p.join(&c.relative_to(&p)), c);
        assert!(PixelPath::from_quadrants([0]).is_disjoint(&c));
        assert_eq!(
            p.first_descendant(4),
            PixelPath::from_quadrants([2, 1, 0, 0])
        );
        assert_eq!(PixelPath::ROOT.parent(), None);
    }
}
