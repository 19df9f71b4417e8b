use std::fmt::Write as _;

use super::ifs::IfsSystem;
use super::similitude::Point;
use crate::error::{Error, Result};

/// Default cap on the number of segments a prefractal may have.
pub const DEFAULT_SEGMENT_CAP: usize = 1 << 20;

/// One segment of a prefractal curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment<'a> {
    pub start: Point,
    pub end: Point,
    pub word: &'a [u8],
    pub weight: f64,
}

impl Segment<'_> {
    pub fn length(&self) -> f64 {
        (self.end - self.start).norm()
    }
}

/// Level-`m` prefractal polyline `Kₘ`, ordered head-to-tail from `A` to `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrefractalCurve {
    level: usize,
    vertices: Vec<Point>,
    words: Vec<Vec<u8>>,
    weights: Vec<f64>,
    sigma: f64,
    /// Contraction sums of the families, in family order.
    d: Vec<f64>,
}

impl PrefractalCurve {
    /// Builds `Kₘ` with the default segment cap.
    pub fn generate(ifs: &IfsSystem, m: usize) -> Result<Self> {
        Self::generate_with_cap(ifs, m, DEFAULT_SEGMENT_CAP)
    }

    pub fn generate_with_cap(ifs: &IfsSystem, m: usize, cap: usize) -> Result<Self> {
        let count = ifs.segment_count(m)?;
        if count > cap as u128 {
            return Err(Error::LevelOverflow {
                level: m,
                segments: count,
                cap,
            });
        }
        let (a, b) = ifs.base();
        let maps = ifs.level_maps(m)?;
        let mut vertices = Vec::with_capacity(maps.len() + 1);
        let mut words = Vec::with_capacity(maps.len());
        let mut weights = Vec::with_capacity(maps.len());
        for (map, word) in maps {
            vertices.push(map.apply(a));
            weights.push(super::measure::cell_measure(ifs, &word, 2)?);
            words.push(word);
        }
        vertices.push(b);
        vertices[0] = a;
        Ok(Self {
            level: m,
            vertices,
            words,
            weights,
            sigma: super::measure::sigma(ifs, m)?,
            d: super::measure::contraction_sums(ifs, 2),
        })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Polyline vertices; there is one more vertex than segments.
    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn words(&self) -> &[Vec<u8>] {
        &self.words
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `σₘ` of the generating system at this level.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn contraction_sums(&self) -> &[f64] {
        &self.d
    }

    pub fn segment(&self, i: usize) -> Segment<'_> {
        Segment {
            start: self.vertices[i],
            end: self.vertices[i + 1],
            word: &self.words[i],
            weight: self.weights[i],
        }
    }

    pub fn segments(&self) -> impl ExactSizeIterator<Item = Segment<'_>> + '_ {
        (0..self.len()).map(move |i| self.segment(i))
    }

    pub fn total_length(&self) -> f64 {
        self.segments().map(|s| s.length()).sum()
    }

    /// Mirror image across the line through the curve's endpoints.
    pub fn reflected(&self) -> Self {
        let a = self.vertices[0];
        let b = *self.vertices.last().expect("curve has vertices");
        let r = super::similitude::Affine::reflection_across(a, b);
        let mut vertices: Vec<Point> = self.vertices.iter().map(|&p| r.apply(p)).collect();
        let last = vertices.len() - 1;
        vertices[0] = a;
        vertices[last] = b;
        Self {
            vertices,
            ..self.clone()
        }
    }

    /// Plain-text export: a header line and one `x0 y0 x1 y1 weight word`
    /// row per segment. Words are 1-based and dot-separated, `-` when empty.
    /// Mixtures list every family's `D` separated by commas.
    pub fn to_text(&self) -> String {
        let d = self
            .d
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let mut out = format!("# ifs-curve level={} D={}", self.level, d);
        if self.d.len() > 1 {
            write!(out, " sigma={}", self.sigma).expect("writing to a String cannot fail");
        }
        out.push('\n');
        for s in self.segments() {
            writeln!(
                out,
                "{} {} {} {} {} {}",
                s.start.x,
                s.start.y,
                s.end.x,
                s.end.y,
                s.weight,
                format_word(s.word)
            )
            .expect("writing to a String cannot fail");
        }
        out
    }

    /// Inverse of [`PrefractalCurve::to_text`]. Mixture curves carry an extra
    /// `sigma=` header field since `σₘ` depends on the environment.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "empty curve file".into(),
        })?;
        let parse_err = |line: usize, message: &str| Error::Parse {
            line,
            message: message.to_string(),
        };
        let rest = header
            .strip_prefix("# ifs-curve ")
            .ok_or_else(|| parse_err(1, "missing '# ifs-curve' header"))?;
        let mut level = None;
        let mut d = None;
        let mut sigma = None;
        for field in rest.split_whitespace() {
            if let Some(v) = field.strip_prefix("level=") {
                level = Some(v.parse::<usize>().map_err(|e| parse_err(1, &e.to_string()))?);
            } else if let Some(v) = field.strip_prefix("sigma=") {
                sigma = Some(v.parse::<f64>().map_err(|e| parse_err(1, &e.to_string()))?);
            } else if let Some(v) = field.strip_prefix("D=") {
                d = Some(
                    v.split(',')
                        .map(|x| x.parse::<f64>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|e| parse_err(1, &e.to_string()))?,
                );
            }
        }
        let level = level.ok_or_else(|| parse_err(1, "header lacks level="))?;
        let d = d.ok_or_else(|| parse_err(1, "header lacks D="))?;

        let mut vertices = Vec::new();
        let mut words = Vec::new();
        let mut weights = Vec::new();
        for (idx, line) in lines {
            let lineno = idx + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() != 6 {
                return Err(parse_err(lineno, "expected 6 columns"));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| parse_err(lineno, &e.to_string()));
            let start = Point::new(num(cols[0])?, num(cols[1])?);
            let end = Point::new(num(cols[2])?, num(cols[3])?);
            match vertices.last() {
                None => vertices.push(start),
                Some(&prev) if prev == start => {}
                Some(_) => return Err(parse_err(lineno, "segment does not continue the polyline")),
            }
            vertices.push(end);
            weights.push(num(cols[4])?);
            words.push(parse_word(cols[5]).map_err(|m| parse_err(lineno, &m))?);
        }
        if words.is_empty() {
            return Err(parse_err(1, "curve has no segments"));
        }
        let sigma = match (sigma, d.len()) {
            (Some(s), _) => s,
            (None, 1) => d[0].powi(-(level as i32)),
            (None, _) => return Err(parse_err(1, "mixture header lacks sigma=")),
        };
        Ok(Self {
            level,
            vertices,
            words,
            weights,
            sigma,
            d,
        })
    }
}

pub fn format_word(word: &[u8]) -> String {
    if word.is_empty() {
        return "-".to_string();
    }
    word.iter()
        .map(|i| (*i as usize + 1).to_string())
        .collect::<Vec<_>>()
        .join(".")
}

pub fn parse_word(s: &str) -> std::result::Result<Vec<u8>, String> {
    if s == "-" {
        return Ok(Vec::new());
    }
    s.split('.')
        .map(|p| match p.parse::<u16>() {
            Ok(v) if (1..=256).contains(&v) => Ok((v - 1) as u8),
            _ => Err(format!("bad word letter '{p}'")),
        })
        .collect()
}
