//! Filters and ultrafilters on a finite universe `{1, ..., n}`, with subsets
//! encoded as bit masks (element `i` is bit `i - 1`).

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

pub const MAX_UNIVERSE: u32 = 16;
pub const MAX_ENUMERATION: u32 = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FilterError {
    #[error("universe size must be between 1 and {MAX_UNIVERSE}, got {0}")]
    UniverseSize(u32),
    #[error("subset {0} is not contained in the universe")]
    OutOfUniverse(String),
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("not a filter: {0}")]
    NotAFilter(Violation),
    #[error("not an ultrafilter: {0}")]
    NotAnUltrafilter(String),
    #[error("parts {0} and {1} are not disjoint")]
    NotDisjoint(usize, usize),
    #[error("the union of the parts is not in the ultrafilter")]
    UnionNotInFilter,
    #[error("exhaustive enumeration is limited to universes of size {MAX_ENUMERATION}")]
    TooLargeToEnumerate,
}

/// The first filter axiom a family breaks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Empty,
    ContainsEmptySet,
    NotIntersectionClosed { a: u32, b: u32 },
    NotSupersetClosed { member: u32, superset: u32 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => f.write_str("the family is empty"),
            Violation::ContainsEmptySet => f.write_str("axiom (a): the empty set is a member"),
            Violation::NotIntersectionClosed { a, b } => {
                write!(f, "axiom (b): {} and {} are members but their intersection is not", Mask(*a), Mask(*b))
            }
            Violation::NotSupersetClosed { member, superset } => {
                write!(f, "axiom (c): {} is a member but its superset {} is not", Mask(*member), Mask(*superset))
            }
        }
    }
}

struct Mask(u32);

impl fmt::Display for Mask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = (0..32).filter(|i| self.0 >> i & 1 == 1).map(|i| (i + 1).to_string()).collect();
        write!(f, "{{{}}}", items.join(","))
    }
}

pub fn format_mask(mask: u32) -> String {
    Mask(mask).to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SetFamily {
    n: u32,
    members: BTreeSet<u32>,
}

impl SetFamily {
    pub fn new(n: u32, members: impl IntoIterator<Item = u32>) -> Result<Self, FilterError> {
        if !(1..=MAX_UNIVERSE).contains(&n) {
            return Err(FilterError::UniverseSize(n));
        }
        let family = SetFamily { n, members: members.into_iter().collect() };
        if let Some(&bad) = family.members.iter().find(|&&m| m > family.universe()) {
            return Err(FilterError::OutOfUniverse(format_mask(bad)));
        }
        Ok(family)
    }

    /// Parses a comma-separated list of braced subsets, e.g. `{1},{1,2},{}`.
    pub fn parse(n: u32, src: &str) -> Result<Self, FilterError> {
        let masks = parse_masks(n, src)?;
        SetFamily::new(n, masks)
    }

    /// `{A : i ∈ A}`.
    pub fn principal(n: u32, i: u32) -> Result<Self, FilterError> {
        if i == 0 || i > n {
            return Err(FilterError::OutOfUniverse(format!("{{{i}}}")));
        }
        SetFamily::new(n, (0..=full(n)).filter(|m| m >> (i - 1) & 1 == 1))
    }

    /// `{A : I \ A is finite}`, which on a finite universe is every subset.
    pub fn frechet(n: u32) -> Result<Self, FilterError> {
        SetFamily::new(n, 0..=full(n))
    }

    pub fn universe_size(&self) -> u32 {
        self.n
    }

    pub fn universe(&self) -> u32 {
        full(self.n)
    }

    pub fn members(&self) -> impl Iterator<Item = u32> + '_ {
        self.members.iter().copied()
    }

    pub fn contains(&self, mask: u32) -> bool {
        self.members.contains(&mask)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn complement(&self, mask: u32) -> u32 {
        self.universe() & !mask
    }

    pub fn check_filter(&self) -> Result<(), Violation> {
        if self.members.is_empty() {
            return Err(Violation::Empty);
        }
        if self.contains(0) {
            return Err(Violation::ContainsEmptySet);
        }
        for &a in &self.members {
            for &b in self.members.range(a..) {
                if !self.contains(a & b) {
                    return Err(Violation::NotIntersectionClosed { a, b });
                }
            }
        }
        for &m in &self.members {
            for i in 0..self.n {
                let up = m | 1 << i;
                if !self.contains(up) {
                    return Err(Violation::NotSupersetClosed { member: m, superset: up });
                }
            }
        }
        Ok(())
    }

    pub fn is_filter(&self) -> bool {
        self.check_filter().is_ok()
    }

    /// Whether every subset or its complement, but not both, is a member.
    pub fn is_ultrafilter(&self) -> Result<bool, FilterError> {
        self.check_filter().map_err(FilterError::NotAFilter)?;
        Ok((0..=self.universe()).all(|a| self.contains(a) != self.contains(self.complement(a))))
    }

    /// Maximality among all filters, by enumerating every family.
    pub fn is_maximal_filter(&self) -> Result<bool, FilterError> {
        self.check_filter().map_err(FilterError::NotAFilter)?;
        Ok(!all_filters(self.n)?.iter().any(|g| g.len() > self.len() && self.members.is_subset(&g.members)))
    }

    /// The element `i` if the family is `{A : i ∈ A}`.
    pub fn principal_element(&self) -> Option<u32> {
        (1..=self.n).find(|&i| SetFamily::principal(self.n, i).is_ok_and(|p| &p == self))
    }

    /// For pairwise disjoint parts whose union is in the ultrafilter, the
    /// unique index of the part that is itself a member.
    pub fn partition_check(&self, parts: &[u32]) -> Result<usize, FilterError> {
        if !self.is_ultrafilter()? {
            return Err(FilterError::NotAnUltrafilter("some subset and its complement are both outside".into()));
        }
        for (i, &a) in parts.iter().enumerate() {
            if a > self.universe() {
                return Err(FilterError::OutOfUniverse(format_mask(a)));
            }
            if let Some(j) = parts[i + 1..].iter().position(|&b| a & b != 0) {
                return Err(FilterError::NotDisjoint(i, i + 1 + j));
            }
        }
        if !self.contains(parts.iter().fold(0, |acc, p| acc | p)) {
            return Err(FilterError::UnionNotInFilter);
        }
        let hits: Vec<usize> = parts.iter().enumerate().filter(|(_, p)| self.contains(**p)).map(|(i, _)| i).collect();
        match hits.as_slice() {
            [i] => Ok(*i),
            _ => unreachable!("an ultrafilter contains exactly one part of a partition of a member"),
        }
    }
}

impl fmt::Display for SetFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.members.iter().map(|m| format_mask(*m)).collect();
        f.write_str(&items.join(","))
    }
}

fn full(n: u32) -> u32 {
    if n >= 32 {
        u32::MAX
    } else {
        (1 << n) - 1
    }
}

/// Parses `{1,2},{3}` into masks over a universe of size `n`.
pub fn parse_masks(n: u32, src: &str) -> Result<Vec<u32>, FilterError> {
    let bytes = src.as_bytes();
    let mut pos = 0;
    let mut out = Vec::new();
    let err = |offset, message: &str| FilterError::Syntax { offset, message: message.into() };
    let skip = |pos: &mut usize| {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
    };
    skip(&mut pos);
    if pos == bytes.len() {
        return Ok(out);
    }
    loop {
        skip(&mut pos);
        if bytes.get(pos) != Some(&b'{') {
            return Err(err(pos, "expected `{`"));
        }
        pos += 1;
        let mut mask = 0u32;
        loop {
            skip(&mut pos);
            match bytes.get(pos) {
                Some(b'}') => {
                    pos += 1;
                    break;
                }
                Some(b',') if mask != 0 => pos += 1,
                Some(c) if c.is_ascii_digit() => {
                    let start = pos;
                    while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                        pos += 1;
                    }
                    let i: u32 = src[start..pos].parse().map_err(|_| err(start, "bad element"))?;
                    if i == 0 || i > n {
                        return Err(err(start, &format!("element {i} is outside {{1..{n}}}")));
                    }
                    mask |= 1 << (i - 1);
                }
                _ => return Err(err(pos, "expected an element or `}`")),
            }
        }
        out.push(mask);
        skip(&mut pos);
        match bytes.get(pos) {
            None => return Ok(out),
            Some(b',') => pos += 1,
            Some(_) => return Err(err(pos, "expected `,`")),
        }
    }
}

/// Every filter on a universe of size `n ≤ 4`, by brute force over all
/// families of subsets.
pub fn all_filters(n: u32) -> Result<Vec<SetFamily>, FilterError> {
    if n > MAX_ENUMERATION || n == 0 {
        return Err(if n == 0 { FilterError::UniverseSize(0) } else { FilterError::TooLargeToEnumerate });
    }
    let subsets = 1u32 << n;
    let mut out = Vec::new();
    for bits in 0u64..1u64 << subsets {
        if bits & 1 == 1 {
            continue;
        }
        let family = SetFamily::new(n, (0..subsets).filter(|m| bits >> m & 1 == 1))?;
        if family.is_filter() {
            out.push(family);
        }
    }
    Ok(out)
}

pub fn all_ultrafilters(n: u32) -> Result<Vec<SetFamily>, FilterError> {
    let mut out = Vec::new();
    for f in all_filters(n)? {
        if f.is_ultrafilter()? {
            out.push(f);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filter_axioms() {
        assert!(SetFamily::principal(3, 1).unwrap().is_filter());
        let with_empty = SetFamily::parse(3, "{},{1}").unwrap();
        assert_eq!(with_empty.check_filter(), Err(Violation::ContainsEmptySet));
        assert!(SetFamily::parse(2, "{1,2}").unwrap().is_filter());
        assert!(matches!(
            SetFamily::parse(3, "{1},{2},{1,2},{1,2,3},{1,3},{2,3}").unwrap().check_filter(),
            Err(Violation::NotIntersectionClosed { .. })
        ));
        assert!(matches!(SetFamily::parse(2, "{1}").unwrap().check_filter(), Err(Violation::NotSupersetClosed { .. })));
        assert_eq!(SetFamily::frechet(3).unwrap().check_filter(), Err(Violation::ContainsEmptySet));
        assert_eq!(SetFamily::parse(3, "{1},{1,2},{1,3},{1,2,3}").unwrap(), SetFamily::principal(3, 1).unwrap());
    }

    #[test]
    fn ultrafilters() {
        assert!(SetFamily::principal(3, 2).unwrap().is_ultrafilter().unwrap());
        assert!(!SetFamily::parse(2, "{1,2}").unwrap().is_ultrafilter().unwrap());
        assert!(matches!(SetFamily::parse(2, "{}").unwrap().is_ultrafilter(), Err(FilterError::NotAFilter(_))));
        let all = all_ultrafilters(3).unwrap();
        assert_eq!(all.len(), 3);
        assert!(all.iter().all(|u| u.principal_element().is_some()));
        assert!(SetFamily::principal(4, 4).unwrap().is_maximal_filter().unwrap());
        assert!(!SetFamily::parse(2, "{1,2}").unwrap().is_maximal_filter().unwrap());
    }

    #[test]
    fn partitions() {
        let u = SetFamily::principal(3, 2).unwrap();
        assert_eq!(u.partition_check(&[0b001, 0b010, 0b100]), Ok(1));
        assert_eq!(u.partition_check(&[0b011, 0b010]), Err(FilterError::NotDisjoint(0, 1)));
        let u = SetFamily::principal(3, 1).unwrap();
        assert_eq!(u.partition_check(&[0b010, 0b100]), Err(FilterError::UnionNotInFilter));
    }

    #[test]
    fn mask_syntax() {
        assert_eq!(parse_masks(3, " {1}, {1,2} ,{}").unwrap(), vec![1, 3, 0]);
        assert!(matches!(parse_masks(3, "{4}"), Err(FilterError::Syntax { offset: 1, .. })));
        assert!(matches!(parse_masks(3, "{1}{2}"), Err(FilterError::Syntax { offset: 3, .. })));
        assert_eq!(SetFamily::principal(2, 1).unwrap().to_string(), "{1},{1,2}");
    }
}
