//! Point sets in the half-open unit cube, deterministic generators and the
//! plain-text / JSON file formats.
//!
//! The text format is one point per line with coordinates separated by commas
//! or whitespace. Lines starting with `#` are comments; `# label: ...` carries
//! the optional label and `# dim: k` declares the dimension (needed to write
//! the empty set).
//!
//! Random point sets come from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64(seed)`; each coordinate is drawn with `rand`'s standard
//! `f64` distribution (53 random mantissa bits, values in `[0, 1)`), points in
//! order, coordinates within a point in order.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An ordered multiset of `n` points in `[0,1)^dim`. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
    label: Option<String>,
}

impl PointSet {
    /// Builds a point set, checking row lengths and that every coordinate
    /// lies in `[0, 1)`.
    pub fn new(dim: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        let mut coords = Vec::with_capacity(dim * points.len());
        for (row, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::Format {
                    line: row + 1,
                    message: format!("expected {dim} coordinates, found {}", p.len()),
                });
            }
            for (column, &c) in p.iter().enumerate() {
                check_coordinate(c, row, column)?;
                coords.push(c);
            }
        }
        Ok(Self { dim, coords, label: None })
    }

    /// The empty point set in dimension `dim`.
    pub fn empty(dim: usize) -> Result<Self> {
        Self::new(dim, Vec::new())
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn point(&self, index: usize) -> &[f64] {
        &self.coords[index * self.dim..(index + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.iter().map(<[f64]>::to_vec).collect()
    }

    /// Text serialization; reparses to an identical point set because `f64`
    /// display is shortest round-trip.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(label) = &self.label {
            out.push_str("# label: ");
            out.push_str(label);
            out.push('\n');
        }
        out.push_str(&format!("# dim: {}\n", self.dim));
        for p in self.iter() {
            let row: Vec<String> = p.iter().map(|c| format!("{c}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(PointSetJson {
            dim: self.dim,
            n: self.len(),
            points: self.to_rows(),
            label: self.label.clone(),
        })
        .expect("point set serializes")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let parsed: PointSetJson = serde_json::from_value(value.clone())
            .map_err(|e| Error::Format { line: 0, message: e.to_string() })?;
        if parsed.points.len() != parsed.n {
            return Err(Error::Format {
                line: 0,
                message: format!("n = {} but {} points given", parsed.n, parsed.points.len()),
            });
        }
        let mut set = Self::new(parsed.dim, parsed.points)?;
        set.label = parsed.label;
        Ok(set)
    }
}

#[derive(Serialize, Deserialize)]
struct PointSetJson {
    dim: usize,
    n: usize,
    points: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
}

fn check_coordinate(c: f64, row: usize, column: usize) -> Result<()> {
    if (0.0..1.0).contains(&c) {
        Ok(())
    } else {
        Err(Error::Domain { row: row + 1, column: column + 1, value: c })
    }
}

/// Parses the text format. `dim_hint` resolves the empty file and, when rows
/// are present, must agree with their length.
pub fn load_pointset(text: &str, dim_hint: Option<usize>) -> Result<PointSet> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut dim: Option<usize> = None;
    let mut label = None;
    let mut row_lines = Vec::new();
    let mut declared_dim: Option<usize> = None;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(l) = comment.strip_prefix("label:") {
                label = Some(l.trim().to_string());
            } else if let Some(d) = comment.strip_prefix("dim:") {
                declared_dim = d.trim().parse().ok();
            }
            continue;
        }
        let mut row = Vec::new();
        for token in line.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
            let value: f64 = token.parse().map_err(|_| Error::Format {
                line: lineno + 1,
                message: format!("cannot parse {token:?} as a number"),
            })?;
            row.push(value);
        }
        match dim {
            None => dim = Some(row.len()),
            Some(d) if d != row.len() => {
                return Err(Error::Format {
                    line: lineno + 1,
                    message: format!("ragged rows: expected {d} coordinates, found {}", row.len()),
                })
            }
            _ => {}
        }
        row_lines.push(lineno + 1);
        rows.push(row);
    }

    let dim = match (dim, dim_hint.or(declared_dim)) {
        (Some(d), Some(h)) if d != h => {
            return Err(Error::Format {
                line: row_lines[0],
                message: format!("rows have {d} coordinates but dimension {h} was requested"),
            })
        }
        (Some(d), _) => d,
        (None, Some(h)) => h,
        (None, None) => return Err(Error::AmbiguousDimension),
    };

    for (i, row) in rows.iter().enumerate() {
        for (column, &c) in row.iter().enumerate() {
            if !(0.0..1.0).contains(&c) {
                return Err(Error::Domain { row: row_lines[i], column: column + 1, value: c });
            }
        }
    }
    let mut set = PointSet::new(dim, rows)?;
    set.label = label;
    Ok(set)
}

/// `n` i.i.d. uniform points from ChaCha8 seeded with `seed`.
pub fn gen_random(n: usize, dim: usize, seed: u64) -> Result<PointSet> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords: Vec<f64> = (0..n * dim).map(|_| rng.gen::<f64>()).collect();
    Ok(PointSet { dim, coords, label: Some(format!("random(seed={seed})")) })
}

/// Radical inverse of `i` in base `base`.
pub fn radical_inverse(base: u64, mut i: u64) -> f64 {
    let mut reversed: u64 = 0;
    let mut denom: u64 = 1;
    while i > 0 {
        reversed = reversed * base + i % base;
        denom *= base;
        i /= base;
    }
    reversed as f64 / denom as f64
}

/// First `count` primes.
pub fn primes(count: usize) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::with_capacity(count);
    let mut candidate = 2u64;
    while out.len() < count {
        if out.iter().take_while(|&&p| p * p <= candidate).all(|&p| !candidate.is_multiple_of(p)) {
            out.push(candidate);
        }
        candidate += 1;
    }
    out
}

/// Hammersley set: point `i` is `(i/n, φ_2(i), φ_3(i), ...)`.
pub fn gen_hammersley(n: usize, dim: usize) -> Result<PointSet> {
    if dim == 0 || n == 0 {
        return Err(Error::InvalidArgument("hammersley needs n >= 1 and dim >= 1".into()));
    }
    let bases = primes(dim - 1);
    let mut coords = Vec::with_capacity(n * dim);
    for i in 0..n {
        coords.push(i as f64 / n as f64);
        coords.extend(bases.iter().map(|&b| radical_inverse(b, i as u64)));
    }
    Ok(PointSet { dim, coords, label: Some("hammersley".into()) })
}

/// `n` copies of the origin.
pub fn gen_corner(n: usize, dim: usize) -> Result<PointSet> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    Ok(PointSet { dim, coords: vec![0.0; n * dim], label: Some("corner".into()) })
}

/// Named generator families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Random,
    Hammersley,
    Corner,
}

impl Family {
    pub fn generate(self, n: usize, dim: usize, seed: u64) -> Result<PointSet> {
        match self {
            Family::Random => gen_random(n, dim, seed),
            Family::Hammersley => gen_hammersley(n, dim),
            Family::Corner => gen_corner(n, dim),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Random => "random",
            Family::Hammersley => "hammersley",
            Family::Corner => "corner",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Family::Random),
            "hammersley" => Ok(Family::Hammersley),
            "corner" => Ok(Family::Corner),
            other => Err(Error::InvalidArgument(format!("unknown family {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_single_point() {
        let p = load_pointset("0.5\n", None).unwrap();
        assert_eq!(p.dim(), 1);
        assert_eq!(p.len(), 1);
        assert_eq!(p.point(0), &[0.5]);
    }

    #[test]
    fn parses_comma_rows() {
        let p = load_pointset("0.25,0.5\n0.75,0.25\n", None).unwrap();
        assert_eq!(p.dim(), 2);
        assert_eq!(p.len(), 2);
        assert_eq!(p.point(1), &[0.75, 0.25]);
    }

    #[test]
    fn whitespace_and_comments() {
        let p = load_pointset("# label: demo\n0.1  0.2\n\n# x\n0.3\t0.4\n", None).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.label(), Some("demo"));
    }

    #[test]
    fn rejects_one() {
        let err = load_pointset("0.5,1.0\n", None).unwrap_err();
        assert_eq!(err, Error::Domain { row: 1, column: 2, value: 1.0 });
    }

    #[test]
    fn rejects_negative_and_nan() {
        assert!(matches!(load_pointset("-0.1\n", None), Err(Error::Domain { .. })));
        assert!(matches!(load_pointset("NaN\n", None), Err(Error::Domain { .. })));
    }

    #[test]
    fn ragged_rows_are_format_errors() {
        let err = load_pointset("0.1,0.2\n0.3\n", None).unwrap_err();
        assert!(matches!(err, Error::Format { line: 2, .. }));
    }

    #[test]
    fn empty_stream_needs_hint() {
        assert_eq!(load_pointset("", None).unwrap_err(), Error::AmbiguousDimension);
        let p = load_pointset("# nothing\n", Some(3)).unwrap();
        assert_eq!(p.dim(), 3);
        assert!(p.is_empty());
    }

    #[test]
    fn empty_set_round_trips_through_text() {
        let e = PointSet::empty(4).unwrap();
        assert_eq!(load_pointset(&e.to_text(), None).unwrap(), e);
    }

    #[test]
    fn hint_must_match_rows() {
        assert!(matches!(load_pointset("0.1,0.2\n", Some(3)), Err(Error::Format { .. })));
    }

    #[test]
    fn random_empty_and_deterministic() {
        let e = gen_random(0, 3, 9).unwrap();
        assert!(e.is_empty());
        assert_eq!(e.dim(), 3);
        assert_eq!(gen_random(8, 2, 42).unwrap(), gen_random(8, 2, 42).unwrap());
        assert_ne!(gen_random(8, 2, 42).unwrap(), gen_random(8, 2, 43).unwrap());
    }

    #[test]
    fn random_in_range() {
        let p = gen_random(1000, 1, 7).unwrap();
        assert!(p.iter().all(|x| (0.0..1.0).contains(&x[0])));
    }

    #[test]
    fn radical_inverse_base_two() {
        assert_eq!(radical_inverse(2, 1), 0.5);
        assert_eq!(radical_inverse(2, 2), 0.25);
        assert_eq!(radical_inverse(2, 3), 0.75);
        assert_eq!(radical_inverse(3, 1), 1.0 / 3.0);
        assert_eq!(radical_inverse(3, 4), 4.0 / 9.0);
    }

    #[test]
    fn hammersley_small() {
        let p = gen_hammersley(4, 2).unwrap();
        assert_eq!(
            p.to_rows(),
            vec![vec![0.0, 0.0], vec![0.25, 0.5], vec![0.5, 0.25], vec![0.75, 0.75]]
        );
        let q = gen_hammersley(3, 1).unwrap();
        assert_eq!(q.to_rows(), vec![vec![0.0], vec![1.0 / 3.0], vec![2.0 / 3.0]]);
    }

    #[test]
    fn primes_start_right() {
        assert_eq!(primes(6), vec![2, 3, 5, 7, 11, 13]);
    }

    #[test]
    fn corner_sets() {
        assert_eq!(gen_corner(1, 1).unwrap().to_rows(), vec![vec![0.0]]);
        assert_eq!(gen_corner(2, 3).unwrap().to_rows(), vec![vec![0.0; 3]; 2]);
        assert!(gen_corner(0, 2).unwrap().is_empty());
    }

    #[test]
    fn json_round_trip() {
        let p = gen_random(5, 3, 1).unwrap();
        let back = PointSet::from_json(&p.to_json()).unwrap();
        assert_eq!(back, p);
        let v = p.to_json();
        assert_eq!(v["dim"], 3);
        assert_eq!(v["n"], 5);
    }
}
