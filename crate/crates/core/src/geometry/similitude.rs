use nalgebra::{Matrix2, Point2, Vector2};

use crate::error::{Error, Result};

pub type Point = Point2<f64>;

/// A contractive similitude of the plane: rotation after an optional
/// reflection across the x-axis, uniform scaling, then translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Similitude {
    rotation: f64,
    reflect: bool,
    ratio: f64,
    translation: Vector2<f64>,
}

impl Similitude {
    pub fn new(rotation: f64, reflect: bool, ratio: f64, translation: Vector2<f64>) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::InvalidSimilitude(format!(
                "ratio {ratio} outside the open interval (0, 1)"
            )));
        }
        if !rotation.is_finite() || !translation.iter().all(|t| t.is_finite()) {
            return Err(Error::InvalidSimilitude("non-finite parameters".into()));
        }
        Ok(Self {
            rotation,
            reflect,
            ratio,
            translation,
        })
    }

    /// The similitude sending segment `a -> b` onto segment `p -> q`.
    pub fn mapping_segment(a: Point, b: Point, p: Point, q: Point, reflect: bool) -> Result<Self> {
        let from = b - a;
        let to = q - p;
        let from_len = from.norm();
        if from_len == 0.0 {
            return Err(Error::InvalidSimilitude("zero-length source segment".into()));
        }
        let ratio = to.norm() / from_len;
        let from_dir = if reflect {
            Vector2::new(from.x, -from.y)
        } else {
            from
        };
        let rotation = to.y.atan2(to.x) - from_dir.y.atan2(from_dir.x);
        let mut map = Self::new(rotation, reflect, ratio, Vector2::zeros())?;
        map.translation = p.coords - map.linear() * a.coords;
        Ok(map)
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn rotation(&self) -> f64 {
        self.rotation
    }

    pub fn is_reflection(&self) -> bool {
        self.reflect
    }

    pub fn translation(&self) -> Vector2<f64> {
        self.translation
    }

    pub fn linear(&self) -> Matrix2<f64> {
        let (s, c) = self.rotation.sin_cos();
        let rot = Matrix2::new(c, -s, s, c);
        let flip = if self.reflect {
            Matrix2::new(1.0, 0.0, 0.0, -1.0)
        } else {
            Matrix2::identity()
        };
        rot * flip * self.ratio
    }

    pub fn apply(&self, p: Point) -> Point {
        Point::from(self.linear() * p.coords + self.translation)
    }

    pub fn to_affine(&self) -> Affine {
        Affine {
            linear: self.linear(),
            translation: self.translation,
        }
    }
}

/// General affine map, used for compositions of similitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub linear: Matrix2<f64>,
    pub translation: Vector2<f64>,
}

impl Affine {
    pub fn identity() -> Self {
        Self {
            linear: Matrix2::identity(),
            translation: Vector2::zeros(),
        }
    }

    pub fn apply(&self, p: Point) -> Point {
        Point::from(self.linear * p.coords + self.translation)
    }

    /// `self ∘ inner`
    pub fn compose(&self, inner: &Affine) -> Affine {
        Affine {
            linear: self.linear * inner.linear,
            translation: self.linear * inner.translation + self.translation,
        }
    }

    /// Reflection across the line through `a` and `b`.
    pub fn reflection_across(a: Point, b: Point) -> Affine {
        let d = (b - a).normalize();
        let linear = Matrix2::new(
            d.x * d.x - d.y * d.y,
            2.0 * d.x * d.y,
            2.0 * d.x * d.y,
            d.y * d.y - d.x * d.x,
        );
        Affine {
            linear,
            translation: a.coords - linear * a.coords,
        }
    }
}
