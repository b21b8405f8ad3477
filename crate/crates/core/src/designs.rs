//! Set partitions into rank-ordered subsets, unbalanced designs and
//! misplacement (subset-confusion) matrices.

use std::fmt;

use crate::error::{Error, Result};

const STOCHASTIC_TOL: f64 = 1e-9;

/// A balanced or explicitly partitioned PROS design.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Design {
    set_size: usize,
    subsets: Vec<Vec<usize>>,
    cycles: usize,
}

impl Design {
    /// Validated design from an ordered partition of `1..=set_size` into
    /// blocks of consecutive ranks.
    pub fn new(set_size: usize, subsets: Vec<Vec<usize>>, cycles: usize) -> Result<Self> {
        validate_partition(set_size, &subsets)?;
        if cycles == 0 {
            return Err(Error::InvalidDesign("cycle count must be at least 1".into()));
        }
        Ok(Self {
            set_size,
            subsets,
            cycles,
        })
    }

    /// Parses `1-3|4-5|6`.
    pub fn from_partition_str(set_size: usize, partition: &str, cycles: usize) -> Result<Self> {
        Self::new(set_size, parse_partition(partition)?, cycles)
    }

    pub fn set_size(&self) -> usize {
        self.set_size
    }

    /// Number of subsets `n`.
    pub fn n(&self) -> usize {
        self.subsets.len()
    }

    pub fn cycles(&self) -> usize {
        self.cycles
    }

    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    /// Ranks of subset `r` (0-based index).
    pub fn subset(&self, r: usize) -> &[usize] {
        &self.subsets[r]
    }

    pub fn subset_sizes(&self) -> Vec<usize> {
        self.subsets.iter().map(Vec::len).collect()
    }

    /// True when every subset has the same size.
    pub fn is_balanced(&self) -> bool {
        self.subsets.iter().all(|d| d.len() == self.subsets[0].len())
    }

    /// Subset index (0-based) holding rank `u` (1-based).
    pub fn subset_of_rank(&self, u: usize) -> usize {
        self.subsets
            .iter()
            .position(|d| d.contains(&u))
            .unwrap_or(self.subsets.len() - 1)
    }

    /// Measured units per full run: `cycles · n`.
    pub fn sample_size(&self) -> usize {
        self.cycles * self.n()
    }

    pub fn with_cycles(&self, cycles: usize) -> Result<Self> {
        Self::new(self.set_size, self.subsets.clone(), cycles)
    }
}

impl fmt::Display for Design {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_partition(&self.subsets))
    }
}

/// Consecutive blocks of size `S/n`.
pub fn make_balanced_design(set_size: usize, n: usize, cycles: usize) -> Result<Design> {
    if set_size == 0 || n == 0 {
        return Err(Error::InvalidDesign("set size and subset count must be positive".into()));
    }
    if set_size % n != 0 {
        return Err(Error::InvalidDesign(format!(
            "subset count {n} does not divide set size {set_size}"
        )));
    }
    let m = set_size / n;
    let subsets = (0..n).map(|r| (r * m + 1..=(r + 1) * m).collect()).collect();
    Design::new(set_size, subsets, cycles)
}

fn validate_partition(set_size: usize, subsets: &[Vec<usize>]) -> Result<()> {
    if set_size == 0 {
        return Err(Error::InvalidDesign("set size must be positive".into()));
    }
    if subsets.is_empty() {
        return Err(Error::InvalidDesign("a design needs at least one subset".into()));
    }
    let mut next = 1;
    for (r, d) in subsets.iter().enumerate() {
        if d.is_empty() {
            return Err(Error::InvalidDesign(format!("subset {} is empty", r + 1)));
        }
        for &u in d {
            if u != next {
                return Err(Error::InvalidDesign(format!(
                    "subsets must be consecutive increasing rank blocks covering 1..{set_size}; \
                     subset {} has rank {u} where {next} was expected",
                    r + 1
                )));
            }
            next += 1;
        }
    }
    if next != set_size + 1 {
        return Err(Error::InvalidDesign(format!(
            "subsets cover ranks 1..{} but the set size is {set_size}",
            next - 1
        )));
    }
    Ok(())
}

/// Parses a partition such as `1-3|4-5|6` or `1,2,3|4,5,6`.
pub fn parse_partition(text: &str) -> Result<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut offset = 0;
    for block in text.split('|') {
        let mut ranks = Vec::new();
        let mut inner = offset;
        for piece in block.split(',') {
            let t = piece.trim();
            if t.is_empty() {
                return Err(Error::parse(inner, "empty rank entry"));
            }
            let num = |s: &str, pos: usize| -> Result<usize> {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::parse(pos, format!("'{}' is not a rank", s.trim())))
            };
            if let Some((a, b)) = t.split_once('-') {
                let (a, b) = (num(a, inner)?, num(b, inner + a.len() + 1)?);
                if b < a {
                    return Err(Error::parse(inner, format!("descending range {a}-{b}")));
                }
                ranks.extend(a..=b);
            } else {
                ranks.push(num(t, inner)?);
            }
            inner += piece.len() + 1;
        }
        out.push(ranks);
        offset += block.len() + 1;
    }
    Ok(out)
}

pub fn format_partition(subsets: &[Vec<usize>]) -> String {
    let blocks: Vec<String> = subsets
        .iter()
        .map(|d| {
            let inner: Vec<String> = d.iter().map(usize::to_string).collect();
            format!("{{{}}}", inner.join(","))
        })
        .collect();
    format!("{{{}}}", blocks.join(","))
}

/// One set of an unbalanced design: its cycle, its partition and the
/// measured subset (1-based, equal to the set's position in the cycle).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnbalancedSet {
    pub cycle: usize,
    pub partition: Vec<Vec<usize>>,
    pub measured: usize,
}

/// Cycles with possibly different subset counts and sizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnbalancedDesign {
    set_size: usize,
    cycles: Vec<Design>,
}

impl UnbalancedDesign {
    /// Builds from per-cycle partitions; cycle `i` contributes one set per subset.
    pub fn new(set_size: usize, partitions: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        if partitions.is_empty() {
            return Err(Error::InvalidDesign("an unbalanced design needs at least one cycle".into()));
        }
        let cycles = partitions
            .into_iter()
            .map(|p| Design::new(set_size, p, 1))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { set_size, cycles })
    }

    /// Builds from per-set rows, enforcing the diagonal convention.
    pub fn from_sets(set_size: usize, sets: &[UnbalancedSet]) -> Result<Self> {
        let mut partitions: Vec<Vec<Vec<usize>>> = Vec::new();
        let mut seen: Vec<usize> = Vec::new();
        let mut current: Option<usize> = None;
        for s in sets {
            if current != Some(s.cycle) {
                if let Some(c) = current {
                    check_cycle_complete(c, &partitions, &seen)?;
                    if s.cycle <= c {
                        return Err(Error::InvalidDesign(format!(
                            "cycle {} appears after cycle {c}",
                            s.cycle
                        )));
                    }
                }
                current = Some(s.cycle);
                partitions.push(s.partition.clone());
                seen.clear();
            }
            let part = partitions.last().expect("pushed above");
            if *part != s.partition {
                return Err(Error::InvalidDesign(format!(
                    "sets of cycle {} use different partitions",
                    s.cycle
                )));
            }
            if s.measured != seen.len() + 1 {
                return Err(Error::InvalidDesign(format!(
                    "set {} of cycle {} must measure subset {} (diagonal convention), got {}",
                    seen.len() + 1,
                    s.cycle,
                    seen.len() + 1,
                    s.measured
                )));
            }
            seen.push(s.measured);
        }
        if let Some(c) = current {
            check_cycle_complete(c, &partitions, &seen)?;
        }
        Self::new(set_size, partitions)
    }

    /// Parses lines `cycle;partition;measured`; blank lines and `#` comments are skipped.
    pub fn parse(set_size: usize, text: &str) -> Result<Self> {
        let mut sets = Vec::new();
        let mut offset = 0;
        for line in text.lines() {
            let t = line.trim();
            if !t.is_empty() && !t.starts_with('#') {
                let fields: Vec<&str> = t.split(';').collect();
                if fields.len() != 3 {
                    return Err(Error::parse(offset, "expected 'cycle;partition;measured'"));
                }
                let cycle = fields[0]
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(offset, format!("bad cycle '{}'", fields[0].trim())))?;
                let partition = parse_partition(fields[1]).map_err(|e| match e {
                    Error::Parse { position, message } => Error::parse(offset + fields[0].len() + 1 + position, message),
                    other => other,
                })?;
                let measured = fields[2].trim().parse().map_err(|_| {
                    Error::parse(
                        offset + fields[0].len() + fields[1].len() + 2,
                        format!("bad measured index '{}'", fields[2].trim()),
                    )
                })?;
                sets.push(UnbalancedSet {
                    cycle,
                    partition,
                    measured,
                });
            }
            offset += line.len() + 1;
        }
        Self::from_sets(set_size, &sets)
    }

    /// The two-cycle design with `S = 6`, `K = 5` used as the running example.
    pub fn example() -> Self {
        Self::new(
            6,
            vec![
                vec![vec![1, 2, 3], vec![4, 5], vec![6]],
                vec![vec![1, 2], vec![3, 4, 5, 6]],
            ],
        )
        .expect("valid example")
    }

    pub fn set_size(&self) -> usize {
        self.set_size
    }

    /// One single-cycle [`Design`] per cycle.
    pub fn cycles(&self) -> &[Design] {
        &self.cycles
    }

    /// Total measured units `K = Σ n_i`.
    pub fn total_size(&self) -> usize {
        self.cycles.iter().map(Design::n).sum()
    }

    /// Subset size `m_{ri}` of the measured subset of set `r` in cycle `i` (0-based).
    pub fn measured_size(&self, r: usize, i: usize) -> usize {
        self.cycles[i].subset(r).len()
    }

    /// Per-set rows in file order.
    pub fn sets(&self) -> Vec<UnbalancedSet> {
        let mut out = Vec::new();
        for (i, c) in self.cycles.iter().enumerate() {
            for r in 0..c.n() {
                out.push(UnbalancedSet {
                    cycle: i + 1,
                    partition: c.subsets().to_vec(),
                    measured: r + 1,
                });
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for set in self.sets() {
            let blocks: Vec<String> = set
                .partition
                .iter()
                .map(|d| {
                    if d.len() == 1 {
                        d[0].to_string()
                    } else {
                        format!("{}-{}", d[0], d[d.len() - 1])
                    }
                })
                .collect();
            s.push_str(&format!("{};{};{}\n", set.cycle, blocks.join("|"), set.measured));
        }
        s
    }
}

fn check_cycle_complete(cycle: usize, partitions: &[Vec<Vec<usize>>], seen: &[usize]) -> Result<()> {
    let n = partitions.last().map_or(0, Vec::len);
    if seen.len() != n {
        return Err(Error::InvalidDesign(format!(
            "cycle {cycle} has {n} subsets but {} sets",
            seen.len()
        )));
    }
    Ok(())
}

/// Probabilities `α[r][h]` that the unit measured for subset `r` truly
/// belongs to subset `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct MisplacementMatrix {
    n: usize,
    data: Vec<f64>,
}

impl MisplacementMatrix {
    /// Validated doubly stochastic matrix.
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        validate_misplacement(rows)?;
        Ok(Self::from_rows_unchecked(rows))
    }

    /// Row-stochastic matrix satisfying the mass balance
    /// `Σ_r m_r α[r][h] = m_h` for unequal subset sizes `m`. Reduces to the
    /// doubly stochastic check when all sizes agree.
    pub fn with_sizes(rows: &[Vec<f64>], sizes: &[usize]) -> Result<Self> {
        let n = rows.len();
        if sizes.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: sizes.len(),
            });
        }
        check_entries_and_rows(rows)?;
        for h in 0..n {
            let mass: f64 = (0..n).map(|r| sizes[r] as f64 * rows[r][h]).sum();
            let sum = mass / sizes[h] as f64;
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::ColumnSum { index: h, sum });
            }
        }
        Ok(Self::from_rows_unchecked(rows))
    }

    fn from_rows_unchecked(rows: &[Vec<f64>]) -> Self {
        Self {
            n: rows.len(),
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn identity(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDesign("matrix dimension must be positive".into()));
        }
        let mut data = vec![0.0; n * n];
        (0..n).for_each(|r| data[r * n + r] = 1.0);
        Ok(Self { n, data })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDesign("matrix dimension must be positive".into()));
        }
        Ok(Self {
            n,
            data: vec![1.0 / n as f64; n * n],
        })
    }

    /// Random subsetting for subsets of the given sizes: `α[r][h] = m_h / S`.
    pub fn random_placement(sizes: &[usize]) -> Result<Self> {
        let total: usize = sizes.iter().sum();
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(Error::InvalidDesign("subset sizes must be positive".into()));
        }
        let row: Vec<f64> = sizes.iter().map(|&m| m as f64 / total as f64).collect();
        let rows = vec![row; sizes.len()];
        Self::with_sizes(&rows, sizes)
    }

    /// Parses `n` lines of `n` comma-separated probabilities.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        let mut offset = 0;
        for line in text.lines() {
            let t = line.trim();
            if !t.is_empty() && !t.starts_with('#') {
                let mut row = Vec::new();
                let mut pos = offset;
                for cell in t.split(',') {
                    let v: f64 = cell
                        .trim()
                        .parse()
                        .map_err(|_| Error::parse(pos, format!("'{}' is not a number", cell.trim())))?;
                    row.push(v);
                    pos += cell.len() + 1;
                }
                rows.push(row);
            }
            offset += line.len() + 1;
        }
        Self::new(&rows)
    }

    pub fn to_csv(&self) -> String {
        self.rows()
            .iter()
            .map(|r| r.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(","))
            .collect::<Vec<_>>()
            .join("\n")
            + "\n"
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, h: usize) -> f64 {
        self.data[r * self.n + h]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn is_identity(&self) -> bool {
        (0..self.n).all(|r| (0..self.n).all(|h| self.get(r, h) == if r == h { 1.0 } else { 0.0 }))
    }
}

/// Diagonal `p`, off-diagonal `(1−p)/(n−1)`.
pub fn make_symmetric_alpha(n: usize, p: f64) -> Result<MisplacementMatrix> {
    if n < 2 {
        return Err(Error::InvalidDesign(format!(
            "symmetric misplacement needs at least two subsets, got {n}"
        )));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("probability {p} is outside [0, 1]")));
    }
    let off = (1.0 - p) / (n - 1) as f64;
    let mut data = vec![off; n * n];
    for r in 0..n {
        data[r * n + r] = p;
    }
    Ok(MisplacementMatrix { n, data })
}

fn check_entries_and_rows(rows: &[Vec<f64>]) -> Result<()> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::InvalidDesign("matrix dimension must be positive".into()));
    }
    for (r, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: row.len(),
            });
        }
        for (h, &v) in row.iter().enumerate() {
            if !(v >= 0.0 && v <= 1.0) {
                return Err(Error::BadEntry { row: r, col: h, value: v });
            }
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::RowSum { index: r, sum });
        }
    }
    Ok(())
}

/// Ok iff the square matrix is doubly stochastic within `1e-9`.
pub fn validate_misplacement(rows: &[Vec<f64>]) -> Result<()> {
    let n = rows.len();
    // Columns first so that the reported index points at the offending column
    // even when rows also fail (rows of a symmetric violation fail together).
    for row in rows {
        if row.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: row.len(),
            });
        }
    }
    for (r, row) in rows.iter().enumerate() {
        for (h, &v) in row.iter().enumerate() {
            if !(v >= 0.0 && v <= 1.0) {
                return Err(Error::BadEntry { row: r, col: h, value: v });
            }
        }
    }
    for h in 0..n {
        let sum: f64 = rows.iter().map(|row| row[h]).sum();
        if (sum - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::ColumnSum { index: h, sum });
        }
    }
    check_entries_and_rows(rows)
}

/// Alternating row/column normalisation (at most `max_iter` sweeps).
pub fn sinkhorn(rows: &mut [Vec<f64>], max_iter: usize, tol: f64) {
    let n = rows.len();
    for _ in 0..max_iter {
        for row in rows.iter_mut() {
            let s: f64 = row.iter().sum();
            if s > 0.0 {
                row.iter_mut().for_each(|v| *v /= s);
            }
        }
        let mut worst: f64 = 0.0;
        for h in 0..n {
            let s: f64 = rows.iter().map(|r| r[h]).sum();
            worst = worst.max((s - 1.0).abs());
            if s > 0.0 {
                rows.iter_mut().for_each(|r| r[h] /= s);
            }
        }
        let row_err = rows
            .iter()
            .map(|r| (r.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max);
        if worst.max(row_err) <= tol {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn balanced_examples() {
        let d = make_balanced_design(6, 2, 1).unwrap();
        assert_eq!(d.subsets(), &[vec![1, 2, 3], vec![4, 5, 6]]);
        assert_eq!(make_balanced_design(1, 1, 1).unwrap().subsets(), &[vec![1]]);
        assert_eq!(
            make_balanced_design(3, 3, 1).unwrap().subsets(),
            &[vec![1], vec![2], vec![3]]
        );
        assert!(make_balanced_design(6, 4, 1).is_err());
        assert!(make_balanced_design(6, 2, 0).is_err());
        assert_eq!(make_balanced_design(6, 2, 3).unwrap().sample_size(), 6);
    }

    #[test]
    fn partitions_must_be_consecutive() {
        assert!(Design::new(4, vec![vec![1, 3], vec![2, 4]], 1).is_err());
        assert!(Design::new(4, vec![vec![1, 2], vec![3]], 1).is_err());
        assert!(Design::new(4, vec![vec![3, 4], vec![1, 2]], 1).is_err());
        let d = Design::from_partition_str(6, "1-5|6", 1).unwrap();
        assert_eq!(d.subset_sizes(), vec![5, 1]);
        assert!(matches!(
            Design::from_partition_str(6, "1-x|6", 1),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn symmetric_alpha_examples() {
        let a = make_symmetric_alpha(2, 0.8).unwrap();
        let want = [[0.8, 0.2], [0.2, 0.8]];
        assert!((0..2).all(|r| (0..2).all(|h| (a.get(r, h) - want[r][h]).abs() < 1e-15)));
        let u = make_symmetric_alpha(3, 1.0 / 3.0).unwrap();
        assert!(u.rows().iter().flatten().all(|v| (v - 1.0 / 3.0).abs() < 1e-15));
        assert!(make_symmetric_alpha(3, 1.0).unwrap().is_identity());
        assert!(make_symmetric_alpha(1, 0.5).is_err());
    }

    #[test]
    fn validation_examples() {
        let id = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        assert!(validate_misplacement(&id).is_ok());
        match validate_misplacement(&[vec![0.6, 0.4], vec![0.5, 0.5]]) {
            Err(Error::ColumnSum { index: 0, sum }) => assert!((sum - 1.1).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
        assert!(validate_misplacement(&[vec![0.5, 0.5], vec![0.5, 0.5]]).is_ok());
        assert!(matches!(
            validate_misplacement(&[vec![1.2, -0.2], vec![-0.2, 1.2]]),
            Err(Error::BadEntry { .. })
        ));
    }

    #[test]
    fn sized_mass_balance() {
        // Sizes (2, 1): rows perceive subset 1 (two units) and subset 2 (one unit).
        let rows = vec![vec![0.75, 0.25], vec![0.5, 0.5]];
        assert!(MisplacementMatrix::with_sizes(&rows, &[2, 1]).is_ok());
        assert!(MisplacementMatrix::new(&rows).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let a = make_symmetric_alpha(3, 0.6).unwrap();
        let b = MisplacementMatrix::from_csv(&a.to_csv()).unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            MisplacementMatrix::from_csv("0.5,abc\n0.5,0.5\n"),
            Err(Error::Parse { position: 4, .. })
        ));
    }

    #[test]
    fn unbalanced_example_and_file() {
        let ud = UnbalancedDesign::example();
        assert_eq!(ud.total_size(), 5);
        assert_eq!(ud.measured_size(0, 0), 3);
        assert_eq!(ud.measured_size(1, 1), 4);
        let text = ud.to_text();
        assert!(text.starts_with("1;1-3|4-5|6;1\n"));
        assert_eq!(UnbalancedDesign::parse(6, &text).unwrap(), ud);
        let bad = "1;1-3|4-6;2\n1;1-3|4-6;1\n";
        assert!(UnbalancedDesign::parse(6, bad).is_err());
        let short = "1;1-3|4-6;1\n";
        assert!(UnbalancedDesign::parse(6, short).is_err());
    }

    proptest! {
        #[test]
        fn symmetric_alpha_always_valid(n in 2usize..12, p in 0.0f64..=1.0) {
            let a = make_symmetric_alpha(n, p).unwrap();
            prop_assert!(validate_misplacement(&a.rows()).is_ok());
        }

        #[test]
        fn sinkhorn_makes_doubly_stochastic(v in prop::collection::vec(0.05f64..1.0, 9)) {
            let mut rows: Vec<Vec<f64>> = v.chunks(3).map(<[f64]>::to_vec).collect();
            sinkhorn(&mut rows, 1000, 1e-12);
            prop_assert!(validate_misplacement(&rows).is_ok());
        }
    }
}
