use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chain::StochasticMatrix;
use crate::error::{Error, Result};
use crate::util::mix_seed;

/// Family of `m` near-uniform rank-`r` transition matrices built from
/// sign-pattern perturbations of the flat kernel.
///
/// Every instance has the uniform stationary distribution, entries in
/// `[1/p - eta/2p, 1/p + eta/2p]`, and mixing time `tau(1/4) = 1`. The family
/// is exposed through the test surface only; it exists to validate class
/// membership and pairwise separations, not for end users.
pub fn gen_fano_transition_instances(
    p: usize,
    r: usize,
    eta: f64,
    m: usize,
    seed: u64,
) -> Result<Vec<StochasticMatrix>> {
    if r < 2 {
        return Err(Error::InvalidParameter(format!("rank must be >= 2, got {r}")));
    }
    if !(eta > 0.0 && eta <= 0.5) {
        return Err(Error::InvalidParameter(format!("eta must lie in (0, 1/2], got {eta}")));
    }
    if m == 0 {
        return Err(Error::InvalidParameter("instance count m must be >= 1".into()));
    }
    let half = p / 2;
    let copies = half / (2 * (r - 1));
    if copies == 0 {
        return Err(Error::InvalidParameter(format!(
            "p = {p} too small for r = {r}: need floor(p/2) >= 2(r-1)"
        )));
    }
    let width = copies * (r - 1);
    let mut out = Vec::with_capacity(m);
    for idx in 0..m {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[seed, idx as u64, 0xfa0]));
        let signs = DMatrix::from_fn(half, r - 1, |_, _| {
            if rng.gen::<bool>() {
                1.0
            } else {
                -1.0
            }
        });
        let base = 1.0 / p as f64;
        let bump = eta / (2.0 * p as f64);
        let entries = DMatrix::from_fn(p, p, |i, j| {
            if i >= 2 * half || j >= 2 * width {
                return base;
            }
            let sign_row = i % half;
            let sign_col = (j % width) % (r - 1);
            // Top-left and bottom-middle quadrants carry +R, the other two -R.
            let flip = usize::from(i >= half) + usize::from(j >= width);
            let orientation = if flip % 2 == 0 { 1.0 } else { -1.0 };
            base + bump * orientation * signs[(sign_row, sign_col)]
        });
        out.push(StochasticMatrix::new(entries)?);
    }
    Ok(out)
}

/// Family of `m` rank-2 near-uniform transition matrices with a planted
/// second singular pair: the top pair is the flat kernel, the second has
/// singular value `zeta * sqrt(1 + zeta^2)` and a sign-vector left factor.
///
/// `p` must be a multiple of 4. Entries stay nonnegative for
/// `zeta <= 1/sqrt(2)`; for `zeta <= 1/(4 sqrt(2))` they lie in
/// `[3/(4p), 5/(4p)]`.
pub fn gen_fano_subspace_instances(
    p: usize,
    zeta: f64,
    m: usize,
    seed: u64,
) -> Result<Vec<StochasticMatrix>> {
    if p == 0 || !p.is_multiple_of(4) {
        return Err(Error::InvalidParameter(format!("p must be a positive multiple of 4, got {p}")));
    }
    if !(zeta > 0.0 && zeta <= 1.0) {
        return Err(Error::InvalidParameter(format!("zeta must lie in (0, 1], got {zeta}")));
    }
    if m == 0 {
        return Err(Error::InvalidParameter("instance count m must be >= 1".into()));
    }
    let quarter = p / 4;
    let base = 1.0 / p as f64;
    let coeff = 2f64.sqrt() * zeta / p as f64;
    let mut out = Vec::with_capacity(m);
    for idx in 0..m {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[seed, idx as u64, 0xfa2]));
        let pattern: Vec<f64> =
            (0..quarter).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
        let left_weight = |i: usize| -> f64 {
            match i / quarter {
                0 => 1.0,
                1 => -1.0,
                2 => zeta * pattern[i % quarter],
                _ => -zeta * pattern[i % quarter],
            }
        };
        let entries = DMatrix::from_fn(p, p, |i, j| {
            let right = if j < p / 2 { 1.0 } else { -1.0 };
            base + coeff * left_weight(i) * right
        });
        out.push(StochasticMatrix::new(entries)?);
    }
    Ok(out)
}
