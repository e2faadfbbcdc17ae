use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Cohen's kappa between two label sequences over the same items.
pub fn agreement_kappa<T: Ord>(a: &[T], b: &[T]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Validation(format!(
            "label sequences differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::Validation("kappa needs at least one item".into()));
    }
    let n = a.len() as u128;
    let mut margins: BTreeMap<&T, (u128, u128)> = BTreeMap::new();
    let mut agree = 0u128;
    for (x, y) in a.iter().zip(b) {
        margins.entry(x).or_default().0 += 1;
        margins.entry(y).or_default().1 += 1;
        agree += u128::from(x == y);
    }
    // (p_o - p_e) / (1 - p_e) scaled by n^2, kept in integers until the final division
    let chance: u128 = margins.values().map(|&(ca, cb)| ca * cb).sum();
    if chance == n * n {
        // both annotators used one and the same label throughout
        return Ok(1.0);
    }
    Ok((n * agree) as f64 - chance as f64).map(|num| num / (n * n - chance) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_and_degenerate() {
        assert_eq!(agreement_kappa(&[1, 2, 1, 3], &[1, 2, 1, 3]).unwrap(), 1.0);
        assert_eq!(agreement_kappa(&["x"; 5], &["x"; 5]).unwrap(), 1.0);
        assert!(agreement_kappa(&[1, 2], &[1]).is_err());
        assert!(agreement_kappa::<u8>(&[], &[]).is_err());
    }
}
