//! Set comparisons over name lists. Lists are treated as sets: order and
//! repetition do not matter.

/// Both sides contain the same names.
pub fn same<'a>(actual: impl Iterator<Item = &'a str> + Clone, args: &[&str]) -> bool {
    actual.clone().all(|a| args.contains(&a)) && args.iter().all(|x| actual.clone().any(|a| a == *x))
}

/// Every actual name is among `args`.
pub fn within<'a>(mut actual: impl Iterator<Item = &'a str>, args: &[&str]) -> bool {
    actual.all(|a| args.contains(&a))
}

/// Every name in `args` is present in `actual`.
pub fn contains_all<'a>(actual: impl Iterator<Item = &'a str> + Clone, args: &[&str]) -> bool {
    args.iter().all(|x| actual.clone().any(|a| a == *x))
}

/// Number of distinct names.
pub fn distinct<'a>(actual: impl Iterator<Item = &'a str>) -> usize {
    let mut v: Vec<&str> = actual.collect();
    v.sort_unstable();
    v.dedup();
    v.len()
}

/// `min <= |actual| <= max`.
pub fn count_between<'a>(actual: impl Iterator<Item = &'a str>, min: i64, max: i64) -> bool {
    let n = distinct(actual) as i64;
    min <= n && n <= max
}
