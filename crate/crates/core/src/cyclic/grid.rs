use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::{admissible_params, default_p_values, IdentitySpec, Params};

/// Base points, moduli and integer parameters an identity is checked on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleGrid {
    pub base_points: Vec<Complex64>,
    pub moduli: Vec<f64>,
    /// `None` uses the family default.
    pub p_values: Option<Vec<i64>>,
    /// Restricts `(r, s, t)`; `None` admits every combination allowed by the
    /// identity's constraints.
    pub neighbor_params: Option<Vec<(i64, i64, i64)>>,
    /// At most this many `(r, s, t, l)` per `p`, spread evenly over the
    /// admissible list.
    pub max_param_sets: usize,
    pub seed: u64,
}

/// Largest `|Im x0|` of the random base points. `K'` never drops below
/// `π/2`, so this stays under `K'/4` for every modulus.
pub const MAX_IMAG: f64 = 0.35;

impl SampleGrid {
    /// Eight real base points `0.1 + 0.3k`, eight seeded complex ones,
    /// `m ∈ {0.1, 0.5, 0.9, 0.99}`.
    pub fn default_grid(seed: u64) -> Self {
        let mut base_points: Vec<Complex64> = (0..8).map(|k| Complex64::new(0.1 + 0.3 * k as f64, 0.0)).collect();
        base_points.extend(random_points(seed, 8));
        SampleGrid {
            base_points,
            moduli: vec![0.1, 0.5, 0.9, 0.99],
            p_values: None,
            neighbor_params: None,
            max_param_sets: 6,
            seed,
        }
    }

    pub fn with_moduli(mut self, moduli: Vec<f64>) -> Self {
        self.moduli = moduli;
        self
    }

    pub fn with_p_values(mut self, p: Vec<i64>) -> Self {
        self.p_values = Some(p);
        self
    }

    pub fn with_base_points(mut self, points: Vec<Complex64>) -> Self {
        self.base_points = points;
        self
    }

    /// Parameter sets for `spec`, ordered by `p` then lexicographically.
    pub fn params_for(&self, spec: &IdentitySpec) -> Vec<Params> {
        let ps = self.p_values.clone().unwrap_or_else(|| default_p_values(spec.family));
        let mut out = Vec::new();
        for p in ps {
            let mut all = admissible_params(spec, p);
            if let Some(allowed) = &self.neighbor_params {
                all.retain(|q| {
                    allowed.iter().any(|&(r, s, t)| {
                        (q.r == 0 || q.r == r) && (q.s == 0 || q.s == s) && (q.t == 0 || q.t == t)
                    })
                });
            }
            out.extend(spread(all, self.max_param_sets));
        }
        out
    }
}

/// `n` points with real part in `(0, 3)` and `|Im| < MAX_IMAG`.
pub fn random_points(seed: u64, n: usize) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| Complex64::new(rng.gen_range(0.05..3.0), rng.gen_range(-MAX_IMAG..MAX_IMAG)))
        .collect()
}

fn spread(all: Vec<Params>, cap: usize) -> Vec<Params> {
    if cap == 0 || all.len() <= cap {
        return all;
    }
    if cap == 1 {
        return vec![all[0]];
    }
    let n = all.len();
    let mut picked: Vec<usize> = (0..cap).map(|k| k * (n - 1) / (cap - 1)).collect();
    picked.dedup();
    picked.into_iter().map(|i| all[i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::parse_catalog;

    #[test]
    fn seeded_points_are_reproducible() {
        assert_eq!(random_points(7, 8), random_points(7, 8));
        assert_ne!(random_points(7, 8), random_points(8, 8));
        assert!(random_points(3, 64).iter().all(|z| z.im.abs() < MAX_IMAG));
    }

    #[test]
    fn coprime_constraint_filters_r() {
        let cat = parse_catalog("sum dn[0]*dn[+r] == const: 1").unwrap();
        let grid = SampleGrid::default_grid(1).with_p_values(vec![6]);
        let rs: Vec<i64> = grid.params_for(&cat.identities[0]).iter().map(|q| q.r).collect();
        assert_eq!(rs, vec![1, 5]);
    }

    #[test]
    fn cap_keeps_ends() {
        let all: Vec<Params> = (1..=20).map(|r| Params::new(21, r)).collect();
        let got = spread(all, 4);
        assert_eq!(got.len(), 4);
        assert_eq!(got[0].r, 1);
        assert_eq!(got[3].r, 20);
    }
}
