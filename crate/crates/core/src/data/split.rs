use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::numerics::Rng;

/// Default held-out share; 30% of 303 rows gives the 91-row test set.
pub const DEFAULT_TEST_FRACTION: f64 = 0.30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSplit {
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub seed: u64,
    pub test_fraction: f64,
}

impl DataSplit {
    /// SHA-256 over the test indices (little-endian u64), hex encoded.
    pub fn test_hash(&self) -> String {
        let mut hasher = Sha256::new();
        for &i in &self.test_indices {
            hasher.update((i as u64).to_le_bytes());
        }
        hex_digest(hasher)
    }
}

pub(crate) fn hex_digest(hasher: Sha256) -> String {
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Stratified train/test partition of binary labels.
///
/// The test size is `round(n * test_fraction)`, shared between the classes by
/// largest remainder (ties go to class 0). Each class is shuffled with a
/// generator seeded by `seed`, class 0 first. Both index lists come back sorted.
pub fn stratified_split(y: &[u8], test_fraction: f64, seed: u64) -> Result<DataSplit> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, &label) in y.iter().enumerate() {
        match label {
            0 | 1 => by_class[label as usize].push(i),
            other => {
                return Err(Error::InvalidArgument(format!("label {other} at row {i} is not binary")))
            }
        }
    }
    for (c, members) in by_class.iter().enumerate() {
        if members.len() < 2 {
            return Err(Error::Stratification(format!(
                "class {c} has {} member(s); at least 2 are needed",
                members.len()
            )));
        }
    }

    let n = y.len();
    let n_test = ((n as f64) * test_fraction).round() as usize;
    let exact: Vec<f64> = by_class
        .iter()
        .map(|m| m.len() as f64 * n_test as f64 / n as f64)
        .collect();
    let mut quota: Vec<usize> = exact.iter().map(|q| q.floor() as usize).collect();
    let mut remaining = n_test - quota.iter().sum::<usize>();
    let mut order: Vec<usize> = vec![0, 1];
    order.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.partial_cmp(&fa).unwrap()
    });
    for &c in order.iter().cycle() {
        if remaining == 0 {
            break;
        }
        quota[c] += 1;
        remaining -= 1;
    }
    for (c, q) in quota.iter_mut().enumerate() {
        *q = (*q).clamp(1, by_class[c].len() - 1);
    }

    let mut rng = Rng::new(seed);
    let mut train = Vec::with_capacity(n);
    let mut test = Vec::with_capacity(n_test);
    for (members, &q) in by_class.iter_mut().zip(&quota) {
        rng.shuffle(members);
        test.extend_from_slice(&members[..q]);
        train.extend_from_slice(&members[q..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(DataSplit {
        train_indices: train,
        test_indices: test,
        seed,
        test_fraction,
    })
}
