//! Padding of general squares and rectangles to aligned squares.

use std::collections::BTreeMap;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::path::MAX_LAYER;
use crate::quadtree::Quadtree;
use crate::scalar::Volume;
use crate::{Layer, ModuleId};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShapeKind {
    /// A square of side `2^-r`.
    AlignedSquare,
    GeneralSquare,
    Rectangle,
}

/// Requested module dimensions, both sides in `(0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModuleShape<T> {
    pub width: T,
    pub height: T,
}

fn check_side<T: Float>(side: T) -> Result<()> {
    if side > T::zero() && side <= T::one() {
        Ok(())
    } else {
        Err(Error::InvalidSide(side.to_f64().unwrap_or(f64::NAN)))
    }
}

impl<T: Float> ModuleShape<T> {
    pub fn new(width: T, height: T) -> Result<Self> {
        check_side(width)?;
        check_side(height)?;
        Ok(ModuleShape { width, height })
    }

    pub fn square(side: T) -> Result<Self> {
        Self::new(side, side)
    }

    /// The aligned square of layer `layer`.
    pub fn aligned(layer: Layer) -> Self {
        let side = T::from(0.5).expect("float").powi(layer as i32);
        ModuleShape {
            width: side,
            height: side,
        }
    }

    pub fn area(&self) -> T {
        self.width * self.height
    }

    pub fn aspect_ratio(&self) -> T {
        self.width.max(self.height) / self.width.min(self.height)
    }

    pub fn kind(&self) -> ShapeKind {
        if self.width != self.height {
            ShapeKind::Rectangle
        } else if pad_square(self.width)
            .is_ok_and(|l| self.width == T::from(0.5).expect("float").powi(l as i32))
        {
            ShapeKind::AlignedSquare
        } else {
            ShapeKind::GeneralSquare
        }
    }

    /// Layer of the aligned square this shape is padded to, given the aspect bound `k`.
    pub fn padded_layer(&self, k: T) -> Result<Layer> {
        pad_rectangle(self.width, self.height, k)
    }
}

/// Layer `i` of the smallest aligned square with side `2^-i >= side`.
///
/// Sides are compared against exact powers of two, so a side of exactly
/// `2^-i` maps to layer `i`.
pub fn pad_square<T: Float>(side: T) -> Result<Layer> {
    check_side(side)?;
    let half = T::from(0.5).expect("float");
    let mut bound = T::one();
    let mut layer: u32 = 0;
    while side <= bound * half {
        bound = bound * half;
        layer += 1;
        if layer > MAX_LAYER as u32 {
            return Err(Error::DepthExceeded {
                layer,
                max_depth: MAX_LAYER,
            });
        }
    }
    Ok(layer as Layer)
}

/// Pads a `width x height` rectangle with aspect ratio at most `k` by its longer side.
pub fn pad_rectangle<T: Float>(width: T, height: T, k: T) -> Result<Layer> {
    let shape = ModuleShape::new(width, height)?;
    let ratio = shape.aspect_ratio();
    if ratio > k {
        return Err(Error::AspectRatioExceeded {
            ratio: ratio.to_f64().unwrap_or(f64::NAN),
            bound: k.to_f64().unwrap_or(f64::NAN),
        });
    }
    pad_square(width.max(height))
}

/// Allocated pixel volume against true module area.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnderallocationReport {
    pub allocated_pixel_volume: f64,
    pub module_area: f64,
    /// `allocated_pixel_volume / module_area`, or `1` when nothing is placed.
    pub factor: f64,
}

impl UnderallocationReport {
    pub fn from_totals(allocated_pixel_volume: f64, module_area: f64) -> Self {
        let factor = if module_area > 0.0 {
            allocated_pixel_volume / module_area
        } else {
            1.0
        };
        UnderallocationReport {
            allocated_pixel_volume,
            module_area,
            factor,
        }
    }
}

/// Underallocation of the modules placed in `tree`, whose shapes are given by `shapes`.
pub fn underallocation<V: Volume, T: Float>(
    tree: &Quadtree<V>,
    shapes: &BTreeMap<ModuleId, ModuleShape<T>>,
) -> Result<UnderallocationReport> {
    let mut pixels = 0.0;
    let mut area = 0.0;
    for (id, p) in tree.modules() {
        let shape = shapes.get(&id).ok_or(Error::UnknownModule(id))?;
        pixels += 0.25f64.powi(p.layer() as i32);
        area += shape.area().to_f64().unwrap_or(f64::NAN);
    }
    Ok(UnderallocationReport::from_totals(pixels, area))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Dyadic, PixelPath};

    #[test]
    fn square_padding() {
        assert_eq!(pad_square(0.5).unwrap(), 1);
        assert_eq!(pad_square(0.3).unwrap(), 1);
        assert_eq!(pad_square(1.0).unwrap(), 0);
        assert_eq!(pad_square(0.25f32).unwrap(), 2);
        assert_eq!(pad_square(0.2500001).unwrap(), 1);
        assert!(matches!(pad_square(0.0), Err(Error::InvalidSide(_))));
        assert!(matches!(pad_square(1.5), Err(Error::InvalidSide(_))));
        assert!(matches!(
            pad_square(1e-12),
            Err(Error::DepthExceeded { .. })
        ));
    }

    #[test]
    fn rectangle_padding() {
        assert_eq!(pad_rectangle(0.3, 0.15, 2.0).unwrap(), 1);
        assert_eq!(pad_rectangle(0.25, 0.25, 1.0).unwrap(), 2);
        assert!(matches!(
            pad_rectangle(0.6, 0.1, 2.0),
            Err(Error::AspectRatioExceeded { .. })
        ));
    }

    #[test]
    fn kinds() {
        assert_eq!(
            ModuleShape::square(0.25).unwrap().kind(),
            ShapeKind::AlignedSquare
        );
        assert_eq!(
            ModuleShape::square(0.3).unwrap().kind(),
            ShapeKind::GeneralSquare
        );
        assert_eq!(
            ModuleShape::new(0.3, 0.2).unwrap().kind(),
            ShapeKind::Rectangle
        );
        assert_eq!(ModuleShape::<f64>::aligned(3).width, 0.125);
    }

    #[test]
    fn underallocation_limits() {
        let eps = 1e-9;
        let mut tree = Quadtree::<Dyadic>::new();
        let mut shapes = BTreeMap::new();
        let small = ModuleShape::square(0.5 - eps).unwrap();
        tree.assign(
            ModuleId(0),
            small.padded_layer(1.0).unwrap(),
            PixelPath::from_quadrants([0]),
        )
        .unwrap();
        shapes.insert(ModuleId(0), small);
        let u = underallocation(&tree, &shapes).unwrap().factor;
        assert!(u > 1.0 && u < 1.0 + 1e-8);

        let k = 3.0;
        let big = ModuleShape::new(0.5 + eps, (0.5 + eps) / k).unwrap();
        let mut tree = Quadtree::<Dyadic>::new();
        tree.assign(ModuleId(0), big.padded_layer(k).unwrap(), PixelPath::ROOT)
            .unwrap();
        let shapes = BTreeMap::from([(ModuleId(0), big)]);
        let u = underallocation(&tree, &shapes).unwrap().factor;
        assert!(u < 4.0 * k && u > 4.0 * k - 1e-6);

        let empty = underallocation::<Dyadic, f64>(&Quadtree::new(), &BTreeMap::new()).unwrap();
        assert_eq!(empty.factor, 1.0);
    }
}
