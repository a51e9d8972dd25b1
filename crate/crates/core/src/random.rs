//! Seeded random instances: unitaries, elements of block algebras, involutive
//! *-automorphisms, fundamental data and automorphisms with known polar parts.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::autopolar::AlgebraAutomorphism;
use crate::crossedz2::FundamentalData;
use crate::error::{Error, Result};
use crate::matalg::{opnorm, real, Mat, MatrixStarAlgebra, Vect, C64};

/// Generator for instance `index` of a run seeded with `seed`.
pub fn instance_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn complex_gaussian(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Mat {
    Mat::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

pub fn gaussian_vector(rng: &mut ChaCha8Rng, n: usize) -> Vect {
    Vect::from_fn(n, |_, _| complex_gaussian(rng))
}

/// Haar unitary from the QR factorization of a Gaussian matrix, with the phases of `R` removed.
pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> Mat {
    let qr = gaussian_matrix(rng, n, n).qr();
    let (q, r) = (qr.q(), qr.r());
    let mut u = q;
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            u[(i, j)] *= phase;
        }
    }
    u
}

/// Block sizes with `sum k^2 = dim`; for the dimensions 2, 4 and 8 a noncommutative option is drawn half the time.
pub fn blocks_for_dim(rng: &mut ChaCha8Rng, dim: usize) -> Result<Vec<usize>> {
    if dim == 0 {
        return Err(Error::DomainViolation("dimension must be at least 1".into()));
    }
    let coin = rng.random_bool(0.5);
    Ok(match dim {
        4 if coin => vec![2],
        8 if coin => vec![2, 2],
        8 => vec![2, 1, 1, 1, 1],
        _ => vec![1; dim],
    })
}

fn block_offsets(blocks: &[usize]) -> Vec<usize> {
    blocks.iter().scan(0, |acc, &k| {
        let o = *acc;
        *acc += k;
        Some(o)
    }).collect()
}

/// A self-adjoint unitary normalizing the block algebra: equal blocks are paired
/// and exchanged through `[[0, U], [U^*, 0]]`, the others get `V diag(+-1) V^*`.
pub fn random_symmetry(rng: &mut ChaCha8Rng, blocks: &[usize]) -> Mat {
    let n: usize = blocks.iter().sum();
    let offs = block_offsets(blocks);
    let mut w = Mat::zeros(n, n);
    let mut used = vec![false; blocks.len()];
    for i in 0..blocks.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let k = blocks[i];
        let partner = (i + 1..blocks.len()).find(|&j| !used[j] && blocks[j] == k);
        match partner {
            Some(j) if rng.random_bool(0.75) => {
                used[j] = true;
                let u = random_unitary(rng, k);
                w.view_mut((offs[i], offs[j]), (k, k)).copy_from(&u);
                w.view_mut((offs[j], offs[i]), (k, k)).copy_from(&u.adjoint());
            }
            _ => {
                let v = random_unitary(rng, k);
                let signs = Vect::from_fn(k, |_, _| real(if rng.random_bool(0.5) { 1.0 } else { -1.0 }));
                let s = &v * Mat::from_diagonal(&signs) * v.adjoint();
                w.view_mut((offs[i], offs[i]), (k, k)).copy_from(&s);
            }
        }
    }
    w
}

/// A block-diagonal unitary composed with a block permutation that respects sizes.
pub fn random_block_unitary(rng: &mut ChaCha8Rng, blocks: &[usize]) -> Mat {
    let n: usize = blocks.iter().sum();
    let offs = block_offsets(blocks);
    let mut perm: Vec<usize> = (0..blocks.len()).collect();
    for i in (1..perm.len()).rev() {
        let j = rng.random_range(0..=i);
        if blocks[perm[i]] == blocks[perm[j]] {
            perm.swap(i, j);
        }
    }
    let mut w = Mat::zeros(n, n);
    for (i, &j) in perm.iter().enumerate() {
        let k = blocks[i];
        w.view_mut((offs[j], offs[i]), (k, k)).copy_from(&random_unitary(rng, k));
    }
    w
}

/// Coordinates of a Gaussian element.
pub fn random_element(rng: &mut ChaCha8Rng, alg: &MatrixStarAlgebra) -> Vect {
    gaussian_vector(rng, alg.dim())
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, alg: &MatrixStarAlgebra) -> Vect {
    let c = random_element(rng, alg);
    (&c + alg.star_coords(&c)).unscale(2.0)
}

/// `(A, pi, h)` with `A = M_{k1} + ...`, `pi = Ad(W)` for a random symmetry `W`,
/// and `h = 1/2 + c d / |d|` where `d = (h0 - pi(h0)) / 2` and `c` is drawn from `[0.05, 0.45]`.
pub fn random_fundamental_data(rng: &mut ChaCha8Rng, blocks: &[usize], tol: f64) -> Result<FundamentalData> {
    let a = Arc::new(MatrixStarAlgebra::block_diagonal(blocks, tol)?);
    let w = random_symmetry(rng, blocks);
    let pi = AlgebraAutomorphism::conjugation(a.clone(), &w)?;
    let h0 = random_hermitian(rng, &a);
    let d = (&h0 - pi.op() * &h0).unscale(2.0);
    let one = a.identity_coords().ok_or(Error::MissingIdentity)?.clone();
    let dn = opnorm(&a.element(&d));
    let amp: f64 = rng.random_range(0.05..=0.45);
    let h = if dn > 1e-8 { one.unscale(2.0) + d * real(amp / dn) } else { one.unscale(2.0) };
    FundamentalData::new(a, pi.op().clone(), h)
}

/// `rho = pi0 Ad(s)` with `pi0 = Ad(U)` a *-automorphism and `s = 1 + H / (2|H|)` positive.
#[derive(Clone, Debug)]
pub struct KnownPolar {
    pub rho: AlgebraAutomorphism,
    pub pi: AlgebraAutomorphism,
    pub gamma: AlgebraAutomorphism,
}

pub fn random_known_polar(rng: &mut ChaCha8Rng, blocks: &[usize], tol: f64) -> Result<KnownPolar> {
    let a = Arc::new(MatrixStarAlgebra::block_diagonal(blocks, tol)?);
    let u = random_block_unitary(rng, blocks);
    let pi = AlgebraAutomorphism::conjugation(a.clone(), &u)?;
    let h = a.element(&random_hermitian(rng, &a));
    let n = a.ambient_dim();
    let hn = opnorm(&h);
    let s = if hn > 0.0 { Mat::identity(n, n) + h.unscale(2.0 * hn) } else { Mat::identity(n, n) };
    let gamma = AlgebraAutomorphism::conjugation(a.clone(), &s)?;
    let rho = pi.compose(&gamma);
    Ok(KnownPolar { rho, pi, gamma })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matalg::DEFAULT_TOL;

    #[test]
    fn unitary_is_unitary() {
        let mut rng = instance_rng(1, 0);
        let u = random_unitary(&mut rng, 4);
        assert!((u.adjoint() * &u - Mat::identity(4, 4)).norm() < 1e-13);
    }

    #[test]
    fn symmetry_is_self_adjoint_unitary() {
        let mut rng = instance_rng(2, 0);
        let w = random_symmetry(&mut rng, &[2, 2, 1]);
        assert!((&w - w.adjoint()).norm() < 1e-13);
        assert!((&w * &w - Mat::identity(5, 5)).norm() < 1e-13);
    }

    #[test]
    fn generated_data_is_valid_and_deterministic() {
        for blocks in [vec![1, 1], vec![2], vec![2, 2], vec![2, 1, 1, 1, 1]] {
            let fd1 = random_fundamental_data(&mut instance_rng(5, 3), &blocks, DEFAULT_TOL).unwrap();
            let fd2 = random_fundamental_data(&mut instance_rng(5, 3), &blocks, DEFAULT_TOL).unwrap();
            assert_eq!(fd1.h(), fd2.h());
            assert_eq!(fd1.pi().op(), fd2.pi().op());
        }
    }
}
