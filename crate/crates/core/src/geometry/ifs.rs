use super::similitude::{Affine, Point, Similitude};
use crate::error::{Error, Result};

const ENDPOINT_TOL: f64 = 1e-12;

/// One generator Ψ: an ordered list of similitudes whose images of the base
/// segment join head-to-tail from `A` to `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct Family {
    pub maps: Vec<Similitude>,
}

impl Family {
    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    /// Σ dᵢⁿ⁻¹ over the maps of this family.
    pub fn contraction_sum(&self, n: u32) -> f64 {
        self.maps
            .iter()
            .map(|m| m.ratio().powi(n as i32 - 1))
            .sum()
    }

    /// Family whose maps send the base segment onto consecutive edges of
    /// the polyline `vertices` (which must start at `a` and end at `b`).
    pub fn from_polyline(a: Point, b: Point, vertices: &[Point], reflect: bool) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidIfs("generator needs at least two edges".into()));
        }
        let maps = vertices
            .windows(2)
            .map(|w| Similitude::mapping_segment(a, b, w[0], w[1], reflect))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { maps })
    }
}

/// A family of generators together with the environment sequence that
/// selects which generator acts at each level, and the base segment `K₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct IfsSystem {
    families: Vec<Family>,
    environment: Vec<usize>,
    a: Point,
    b: Point,
}

impl IfsSystem {
    pub fn new(families: Vec<Family>, environment: Vec<usize>, a: Point, b: Point) -> Result<Self> {
        if families.is_empty() {
            return Err(Error::InvalidIfs("no generator families".into()));
        }
        if (b - a).norm() == 0.0 {
            return Err(Error::InvalidIfs("base segment has zero length".into()));
        }
        let n = families[0].len();
        if families.len() > 1 && families.iter().any(|f| f.len() != n) {
            return Err(Error::InvalidIfs(
                "generator families of a mixture must have equal size".into(),
            ));
        }
        if families.iter().any(|f| f.len() > u8::MAX as usize) {
            return Err(Error::InvalidIfs("more than 255 maps in a family".into()));
        }
        if let Some(&bad) = environment.iter().find(|&&e| e >= families.len()) {
            return Err(Error::InvalidIfs(format!(
                "environment refers to family {bad}, only {} exist",
                families.len()
            )));
        }
        let scale = (b - a).norm();
        for (k, fam) in families.iter().enumerate() {
            if fam.is_empty() {
                return Err(Error::InvalidIfs(format!("family {k} is empty")));
            }
            let mut cursor = a;
            for (i, map) in fam.maps.iter().enumerate() {
                let start = map.apply(a);
                if (start - cursor).norm() > ENDPOINT_TOL * scale {
                    return Err(Error::InvalidIfs(format!(
                        "family {k}: image of map {i} does not start where map {} ends",
                        i.saturating_sub(1)
                    )));
                }
                cursor = map.apply(b);
            }
            if (cursor - b).norm() > ENDPOINT_TOL * scale {
                return Err(Error::InvalidIfs(format!(
                    "family {k}: images do not end at the base endpoint"
                )));
            }
        }
        Ok(Self {
            families,
            environment,
            a,
            b,
        })
    }

    /// Classic von Koch generator: four maps of ratio 1/3.
    pub fn koch() -> Self {
        Self::koch_mixture(&[3.0], Vec::new()).expect("koch generator is valid")
    }

    /// Square Koch (Minkowski) generator: eight maps of ratio 1/4 following
    /// right-up-right-down-down-right-up-right.
    pub fn minkowski() -> Self {
        let q = 0.25;
        let pts: Vec<Point> = [
            (0.0, 0.0),
            (q, 0.0),
            (q, q),
            (2.0 * q, q),
            (2.0 * q, 0.0),
            (2.0 * q, -q),
            (3.0 * q, -q),
            (3.0 * q, 0.0),
            (1.0, 0.0),
        ]
        .iter()
        .map(|&(x, y)| Point::new(x, y))
        .collect();
        let family = Family::from_polyline(pts[0], pts[8], &pts, false).expect("valid polyline");
        Self::new(vec![family], Vec::new(), pts[0], pts[8]).expect("minkowski generator is valid")
    }

    /// The four-map Koch generator with contraction factor `1/l`, `2 < l < 4`,
    /// on the unit base segment. The apex sits above the base.
    pub fn koch_family(l: f64, reflect: bool) -> Result<Family> {
        if !(l > 2.0 && l < 4.0) {
            return Err(Error::InvalidIfs(format!("Koch parameter l = {l} outside (2, 4)")));
        }
        let s = 1.0 / l;
        let height = (s * s - (0.5 - s).powi(2)).sqrt();
        let pts = [
            Point::new(0.0, 0.0),
            Point::new(s, 0.0),
            Point::new(0.5, height),
            Point::new(1.0 - s, 0.0),
            Point::new(1.0, 0.0),
        ];
        Family::from_polyline(pts[0], pts[4], &pts, reflect)
    }

    /// Scale-irregular Koch curve built from one family per entry of `l`,
    /// chosen level by level by `environment`.
    pub fn koch_mixture(l: &[f64], environment: Vec<usize>) -> Result<Self> {
        let families = l
            .iter()
            .map(|&la| Self::koch_family(la, false))
            .collect::<Result<Vec<_>>>()?;
        Self::new(families, environment, Point::new(0.0, 0.0), Point::new(1.0, 0.0))
    }

    pub fn families(&self) -> &[Family] {
        &self.families
    }

    pub fn environment(&self) -> &[usize] {
        &self.environment
    }

    pub fn base(&self) -> (Point, Point) {
        (self.a, self.b)
    }

    pub fn base_length(&self) -> f64 {
        (self.b - self.a).norm()
    }

    pub fn is_mixture(&self) -> bool {
        self.families.len() > 1
    }

    /// Family acting at level `j` (0-based; the outermost map uses `j = 0`).
    pub fn family_at(&self, j: usize) -> Result<usize> {
        if self.families.len() == 1 {
            return Ok(0);
        }
        self.environment.get(j).copied().ok_or_else(|| {
            Error::InvalidIfs(format!(
                "environment has {} entries, level {} requested",
                self.environment.len(),
                j + 1
            ))
        })
    }

    /// The same system reflected across the base line: every prefractal of
    /// the result is the mirror image of the corresponding original.
    pub fn reflected(&self) -> Self {
        let r = Affine::reflection_across(self.a, self.b);
        let families = self
            .families
            .iter()
            .map(|fam| {
                let maps = fam
                    .maps
                    .iter()
                    .map(|m| {
                        let p = r.apply(m.apply(r.apply(self.a)));
                        let q = r.apply(m.apply(r.apply(self.b)));
                        Similitude::mapping_segment(self.a, self.b, p, q, m.is_reflection())
                            .expect("reflection preserves ratio")
                    })
                    .collect();
                Family { maps }
            })
            .collect();
        Self {
            families,
            environment: self.environment.clone(),
            a: self.a,
            b: self.b,
        }
    }

    /// Composite maps `ψ_{w₁} ∘ … ∘ ψ_{w_m}` for all words of length `m`,
    /// in lexicographic (head-to-tail) order.
    pub fn level_maps(&self, m: usize) -> Result<Vec<(Affine, Vec<u8>)>> {
        let mut cells = vec![(Affine::identity(), Vec::new())];
        for j in 0..m {
            let fam = &self.families[self.family_at(j)?];
            let mut next = Vec::with_capacity(cells.len() * fam.len());
            for (outer, word) in &cells {
                for (i, map) in fam.maps.iter().enumerate() {
                    let mut w = Vec::with_capacity(word.len() + 1);
                    w.extend_from_slice(word);
                    w.push(i as u8);
                    next.push((outer.compose(&map.to_affine()), w));
                }
            }
            cells = next;
        }
        Ok(cells)
    }

    /// Number of level-`m` segments.
    pub fn segment_count(&self, m: usize) -> Result<u128> {
        let mut count: u128 = 1;
        for j in 0..m {
            count = count.saturating_mul(self.families[self.family_at(j)?].len() as u128);
        }
        Ok(count)
    }
}
