//! Point sets, the L-infinity metric, per-coordinate rank tables, and the
//! plain-text point file format.
//!
//! A point file starts with a header line `n d real` or `n d int M`, followed
//! by `n` rows of `d` whitespace-separated numbers. Blank lines and anything
//! after a `#` are ignored.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::io::{self, Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Largest integer bound that is still exactly representable in an `f64`.
pub const MAX_INTEGER_BOUND: u64 = 1 << 53;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Real,
    /// Every coordinate is an integer in `[-bound, bound]`.
    Integer {
        bound: u64,
    },
}

impl Domain {
    pub fn is_integer(&self) -> bool {
        matches!(self, Domain::Integer { .. })
    }

    pub fn integer_bound(&self) -> Option<u64> {
        match *self {
            Domain::Integer { bound } => Some(bound),
            Domain::Real => None,
        }
    }
}

/// `n` points in `d` dimensions, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    n: usize,
    d: usize,
    domain: Domain,
    coords: Vec<f64>,
}

impl PointSet {
    /// Validates and wraps a row-major coordinate buffer of `coords.len() / d` points.
    pub fn new(d: usize, domain: Domain, coords: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidPoints("dimension must be at least 1".into()));
        }
        if coords.is_empty() {
            return Err(Error::InvalidPoints(
                "point set must contain at least 1 point".into(),
            ));
        }
        if !coords.len().is_multiple_of(d) {
            return Err(Error::InvalidPoints(format!(
                "{} coordinates do not split into rows of {d}",
                coords.len()
            )));
        }
        if let Domain::Integer { bound } = domain {
            if bound > MAX_INTEGER_BOUND {
                return Err(Error::InvalidPoints(format!(
                    "integer bound {bound} exceeds 2^53"
                )));
            }
        }
        for (idx, &v) in coords.iter().enumerate() {
            check_coordinate(v, domain).map_err(|msg| {
                Error::InvalidPoints(format!("point {} coordinate {}: {msg}", idx / d, idx % d))
            })?;
        }
        let n = coords.len() / d;
        Ok(Self {
            n,
            d,
            domain,
            coords,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], domain: Domain) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != d) {
            return Err(Error::InvalidPoints(format!(
                "row {i} has {} coordinates, expected {d}",
                row.len()
            )));
        }
        Self::new(d, domain, rows.concat())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.d)
    }

    /// Returns a copy with the points reordered so that new point `t` is old point `order[t]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        assert_eq!(order.len(), self.n);
        let mut coords = Vec::with_capacity(self.coords.len());
        for &i in order {
            coords.extend_from_slice(self.point(i));
        }
        Self {
            coords,
            ..self.clone()
        }
    }
}

fn check_coordinate(v: f64, domain: Domain) -> std::result::Result<(), String> {
    if !v.is_finite() {
        return Err(format!("{v} is not a finite number"));
    }
    if let Domain::Integer { bound } = domain {
        if v.fract() != 0.0 {
            return Err(format!("{v} is not an integer"));
        }
        if v.abs() > bound as f64 {
            return Err(format!("{v} lies outside [-{bound}, {bound}]"));
        }
    }
    Ok(())
}

/// A pair of point indices (`i < j`) and their L-infinity distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairDistance {
    pub i: usize,
    pub j: usize,
    pub dist: f64,
}

impl PairDistance {
    pub fn new(a: usize, b: usize, dist: f64) -> Self {
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        Self { i, j, dist }
    }
}

/// `max_k |p[k] - q[k]|`.
pub fn linf_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            found: q.len(),
        });
    }
    Ok(linf(p, q))
}

#[inline]
pub(crate) fn linf(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
}

/// Orders coordinate values with `<`, so `-0.0` and `0.0` compare equal.
#[inline]
pub(crate) fn cmp_value(a: f64, b: f64) -> Ordering {
    a.partial_cmp(&b).expect("coordinates are never NaN")
}

/// Per-coordinate sorted orders. `perm[k][t]` is the point at position `t`
/// when sorting by coordinate `k` (ties by point index), and `rank[k]` is its
/// inverse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankTable {
    n: usize,
    perm: Vec<Vec<usize>>,
    rank: Vec<Vec<usize>>,
}

impl RankTable {
    pub fn build(points: &PointSet) -> Self {
        Self::from_coords(points.coords(), points.len(), points.dim())
    }

    /// Builds the table for a raw row-major buffer. Infinite values are
    /// allowed here; NaN is not.
    pub(crate) fn from_coords(coords: &[f64], n: usize, d: usize) -> Self {
        debug_assert_eq!(coords.len(), n * d);
        let perm: Vec<Vec<usize>> = (0..d)
            .into_par_iter()
            .map(|k| {
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&a, &b| {
                    cmp_value(coords[a * d + k], coords[b * d + k]).then(a.cmp(&b))
                });
                order
            })
            .collect();
        let rank = perm
            .iter()
            .map(|order| {
                let mut inv = vec![0; n];
                for (t, &i) in order.iter().enumerate() {
                    inv[i] = t;
                }
                inv
            })
            .collect();
        Self { n, perm, rank }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Points in ascending order of coordinate `k`.
    pub fn order(&self, k: usize) -> &[usize] {
        &self.perm[k]
    }

    /// Positions of each point in [`order`](Self::order)`(k)`.
    pub fn ranks(&self, k: usize) -> &[usize] {
        &self.rank[k]
    }

    pub fn rank(&self, k: usize, i: usize) -> usize {
        self.rank[k][i]
    }
}

pub fn build_rank_tables(points: &PointSet) -> RankTable {
    RankTable::build(points)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Distribution {
    /// Independent coordinates uniform in `[0, 1)`.
    UniformReal,
    /// Independent integer coordinates uniform in `[-bound, bound]`.
    IntegerGrid { bound: u64 },
    /// `max(1, n/8)` uniform centers, each point within `0.01` of a random center.
    Clustered,
}

/// Deterministic point generator (ChaCha8 seeded from `seed`).
pub fn generate_points(n: usize, d: usize, dist: Distribution, seed: u64) -> Result<PointSet> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidParameter(format!(
            "n and d must be at least 1 (got n={n}, d={d})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (domain, coords) = match dist {
        Distribution::UniformReal => (
            Domain::Real,
            (0..n * d).map(|_| rng.gen::<f64>()).collect::<Vec<_>>(),
        ),
        Distribution::IntegerGrid { bound } => {
            if bound > MAX_INTEGER_BOUND {
                return Err(Error::InvalidParameter(format!(
                    "integer bound {bound} exceeds 2^53"
                )));
            }
            let b = bound as i64;
            let coords = (0..n * d).map(|_| rng.gen_range(-b..=b) as f64).collect();
            (Domain::Integer { bound }, coords)
        }
        Distribution::Clustered => {
            let clusters = (n / 8).max(1);
            let centers: Vec<f64> = (0..clusters * d).map(|_| rng.gen::<f64>()).collect();
            let mut coords = Vec::with_capacity(n * d);
            for _ in 0..n {
                let c = rng.gen_range(0..clusters);
                for k in 0..d {
                    coords.push(centers[c * d + k] + rng.gen_range(-0.01..0.01));
                }
            }
            (Domain::Real, coords)
        }
    };
    PointSet::new(d, domain, coords)
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

pub fn parse_points_str(text: &str) -> Result<PointSet> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (header_line, header) = lines
        .next()
        .ok_or_else(|| parse_error(1, "missing header"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let count = |s: &str, what: &str| {
        s.parse::<usize>()
            .map_err(|_| parse_error(header_line, format!("invalid {what} `{s}`")))
    };
    let (n, d, domain) = match fields.as_slice() {
        [n, d, "real"] => (
            count(n, "point count")?,
            count(d, "dimension")?,
            Domain::Real,
        ),
        [n, d, "int", m] => {
            let bound = m
                .parse::<u64>()
                .map_err(|_| parse_error(header_line, format!("invalid integer bound `{m}`")))?;
            if bound > MAX_INTEGER_BOUND {
                return Err(parse_error(
                    header_line,
                    format!("integer bound {bound} exceeds 2^53"),
                ));
            }
            (
                count(n, "point count")?,
                count(d, "dimension")?,
                Domain::Integer { bound },
            )
        }
        _ => {
            return Err(parse_error(
                header_line,
                format!("expected `n d real` or `n d int M`, found `{header}`"),
            ))
        }
    };
    if n == 0 || d == 0 {
        return Err(parse_error(header_line, "n and d must be at least 1"));
    }

    let mut coords = Vec::with_capacity(n * d);
    let mut rows = 0;
    for (line_no, line) in lines {
        if rows == n {
            return Err(parse_error(
                line_no,
                format!("more than the declared {n} rows"),
            ));
        }
        let before = coords.len();
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| parse_error(line_no, format!("non-numeric token `{tok}`")))?;
            check_coordinate(v, domain).map_err(|msg| parse_error(line_no, msg))?;
            coords.push(v);
        }
        let found = coords.len() - before;
        if found != d {
            return Err(parse_error(
                line_no,
                format!("expected {d} coordinates, found {found}"),
            ));
        }
        rows += 1;
    }
    if rows != n {
        return Err(parse_error(
            text.lines().count().max(1),
            format!("expected {n} rows, found {rows}"),
        ));
    }
    PointSet::new(d, domain, coords)
}

pub fn parse_points<R: Read>(mut reader: R) -> Result<PointSet> {
    let mut buf = Vec::new();
    reader
        .read_to_end(&mut buf)
        .map_err(|e| parse_error(0, format!("read failed: {e}")))?;
    let text =
        std::str::from_utf8(&buf).map_err(|e| parse_error(0, format!("invalid UTF-8: {e}")))?;
    parse_points_str(text)
}

pub fn format_points(points: &PointSet) -> String {
    let mut out = String::new();
    match points.domain() {
        Domain::Real => writeln!(out, "{} {} real", points.len(), points.dim()).unwrap(),
        Domain::Integer { bound } => {
            writeln!(out, "{} {} int {bound}", points.len(), points.dim()).unwrap()
        }
    }
    for p in points.points() {
        for (k, v) in p.iter().enumerate() {
            if k > 0 {
                out.push(' ');
            }
            match points.domain() {
                Domain::Integer { .. } => write!(out, "{}", *v as i64).unwrap(),
                // Display prints the shortest string that parses back to the same f64.
                Domain::Real => write!(out, "{v}").unwrap(),
            }
        }
        out.push('\n');
    }
    out
}

pub fn write_points<W: Write>(points: &PointSet, mut writer: W) -> io::Result<()> {
    writer.write_all(format_points(points).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_real_and_integer_headers() {
        let s = parse_points_str("2 2 real\n0 0\n3 1\n").unwrap();
        assert_eq!((s.len(), s.dim(), s.domain()), (2, 2, Domain::Real));
        assert_eq!(s.point(1), &[3.0, 1.0]);

        let s = parse_points_str("1 1 int 5\n-5\n").unwrap();
        assert_eq!(s.domain(), Domain::Integer { bound: 5 });
        assert_eq!(s.point(0), &[-5.0]);
    }

    #[test]
    fn rejects_out_of_range_integer_with_line_number() {
        let err = parse_points_str("2 2 int 3\n4 0\n0 0\n").unwrap_err();
        match err {
            Error::Parse { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains("outside"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_errors() {
        let line_of = |text: &str| match parse_points_str(text) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("expected parse error, got {other:?}"),
        };
        assert_eq!(line_of("2 2 complex\n"), 1);
        assert_eq!(line_of("2 2 real\n0 0\n1\n"), 3);
        assert_eq!(line_of("1 2 real\n0 NaN\n"), 2);
        assert_eq!(line_of("1 2 real\n0 x\n"), 2);
        assert_eq!(line_of("1 1 real\n0\n1\n"), 3);
        assert_eq!(line_of("1 1 int 2\n0.5\n"), 2);
        assert!(matches!(
            parse_points_str("2 1 real\n0\n"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(parse_points_str(""), Err(Error::Parse { .. })));
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let s = parse_points_str("# points\n\n2 1 real # header\n1.5\n\n# mid\n-2\n").unwrap();
        assert_eq!(s.coords(), &[1.5, -2.0]);
    }

    #[test]
    fn linf_examples() {
        assert_eq!(linf_distance(&[0.0, 0.0], &[3.0, 1.0]).unwrap(), 3.0);
        assert_eq!(linf_distance(&[1.5, -2.0], &[1.5, -2.0]).unwrap(), 0.0);
        assert_eq!(linf_distance(&[-2.0, 5.0], &[1.0, 5.0]).unwrap(), 3.0);
        assert_eq!(
            linf_distance(&[0.0], &[0.0, 1.0]),
            Err(Error::DimensionMismatch {
                expected: 1,
                found: 2
            })
        );
    }

    #[test]
    fn rank_table_breaks_ties_by_index() {
        let s = PointSet::from_rows(&[vec![5.0], vec![3.0], vec![5.0]], Domain::Real).unwrap();
        let t = build_rank_tables(&s);
        assert_eq!(t.order(0), &[1, 0, 2]);
        assert_eq!(t.ranks(0), &[1, 0, 2]);

        let single = PointSet::new(3, Domain::Real, vec![1.0, 2.0, 3.0]).unwrap();
        let t = build_rank_tables(&single);
        for k in 0..3 {
            assert_eq!(t.order(k), &[0]);
        }
    }

    #[test]
    fn signed_zeros_tie_by_index() {
        let s = PointSet::from_rows(&[vec![0.0], vec![-0.0]], Domain::Real).unwrap();
        assert_eq!(build_rank_tables(&s).order(0), &[0, 1]);
    }

    #[test]
    fn ranks_invert_orders() {
        let s = generate_points(8, 3, Distribution::IntegerGrid { bound: 2 }, 11).unwrap();
        let t = build_rank_tables(&s);
        for k in 0..3 {
            for i in 0..8 {
                assert_eq!(t.order(k)[t.rank(k, i)], i);
            }
            let col: Vec<f64> = t.order(k).iter().map(|&i| s.point(i)[k]).collect();
            assert!(col.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn generator_contracts() {
        let zeros = generate_points(3, 2, Distribution::IntegerGrid { bound: 0 }, 7).unwrap();
        assert!(zeros.coords().iter().all(|&v| v == 0.0));

        for dist in [
            Distribution::UniformReal,
            Distribution::IntegerGrid { bound: 9 },
            Distribution::Clustered,
        ] {
            let a = format_points(&generate_points(20, 4, dist, 3).unwrap());
            let b = format_points(&generate_points(20, 4, dist, 3).unwrap());
            assert_eq!(a, b);
        }

        let s = generate_points(100, 10, Distribution::UniformReal, 1).unwrap();
        let mut rows: Vec<Vec<u64>> = s
            .points()
            .map(|p| p.iter().map(|v| v.to_bits()).collect())
            .collect();
        rows.sort();
        rows.dedup();
        assert_eq!(rows.len(), 100);

        assert!(generate_points(0, 2, Distribution::UniformReal, 0).is_err());
        assert!(generate_points(2, 0, Distribution::UniformReal, 0).is_err());
    }

    #[test]
    fn point_set_validation() {
        assert!(PointSet::new(2, Domain::Real, vec![0.0, f64::INFINITY]).is_err());
        assert!(PointSet::new(2, Domain::Real, vec![0.0, 1.0, 2.0]).is_err());
        assert!(PointSet::new(1, Domain::Real, vec![]).is_err());
        assert!(PointSet::new(1, Domain::Integer { bound: 1 }, vec![2.0]).is_err());
    }
}
