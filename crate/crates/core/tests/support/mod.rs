//! Reference implementations used only by tests. They follow the textbook
//! definitions directly and share no code with the library.
#![allow(dead_code)]

/// Analysis filters: low-pass `[1, 1]/√2`, high-pass `[1, -1]/√2`.
fn filter(high: bool) -> [f64; 2] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    if high {
        [s, -s]
    } else {
        [s, s]
    }
}

/// Row `r` of the explicit `n × n` two-level Haar packet basis matrix, with
/// rows ordered `a1 | d1 | a2 | d2`. `n` must be divisible by 4.
///
/// Coefficient `m` of the packet taking branch `b1` at level 1 and `b2` at
/// level 2 is `Σ_j f_b2[j] Σ_i f_b1[i] x[4m + 2j + i]`.
pub fn wpt_basis_row(n: usize, r: usize) -> Vec<f64> {
    assert_eq!(n % 4, 0);
    let q = n / 4;
    let (packet, m) = (r / q, r % q);
    let (b1, b2) = [(false, false), (false, true), (true, false), (true, true)][packet];
    let mut row = vec![0.0; n];
    for j in 0..2 {
        for i in 0..2 {
            row[4 * m + 2 * j + i] = filter(b2)[j] * filter(b1)[i];
        }
    }
    row
}

pub fn wpt_basis_matrix(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|r| wpt_basis_row(n, r)).collect()
}

/// Packets `[a1, d1, a2, d2]` by multiplying `x` with the basis matrix.
pub fn wpt_matrix_oracle(x: &[f64]) -> [Vec<f64>; 4] {
    let n = x.len();
    let q = n / 4;
    let coeffs: Vec<f64> = (0..n)
        .map(|r| wpt_basis_row(n, r).iter().zip(x).map(|(a, b)| a * b).sum())
        .collect();
    [0, 1, 2, 3].map(|p| coeffs[p * q..(p + 1) * q].to_vec())
}

pub fn variance_oracle(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (xs.len() - 1) as f64
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Dist {
    L1,
    L2,
}

fn dist(d: Dist, a: &[f64], b: &[f64]) -> f64 {
    match d {
        Dist::L1 => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
        Dist::L2 => a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt(),
    }
}

/// Population z-scoring of each column; constant columns are only centered.
pub fn zscore(train: &[Vec<f64>], queries: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let dim = train[0].len();
    let n = train.len() as f64;
    let mut mean = vec![0.0; dim];
    let mut sd = vec![0.0; dim];
    for c in 0..dim {
        mean[c] = train.iter().map(|r| r[c]).sum::<f64>() / n;
        sd[c] = (train.iter().map(|r| (r[c] - mean[c]).powi(2)).sum::<f64>() / n).sqrt();
        if sd[c] == 0.0 {
            sd[c] = 1.0;
        }
    }
    let map = |rows: &[Vec<f64>]| -> Vec<Vec<f64>> {
        rows.iter()
            .map(|r| (0..dim).map(|c| (r[c] - mean[c]) / sd[c]).collect())
            .collect()
    };
    (map(train), map(queries))
}

/// Breunig et al. LOF with the query scored against the training set only.
/// O(n²) and deliberately naive.
pub struct BruteLof {
    pub train: Vec<Vec<f64>>,
    pub k: usize,
    pub d: Dist,
    pub kdist: Vec<f64>,
    pub lrd: Vec<f64>,
}

const EPS: f64 = 1e-10;

impl BruteLof {
    pub fn new(train: Vec<Vec<f64>>, k: usize, d: Dist) -> Self {
        let n = train.len();
        let mut kdist = vec![0.0; n];
        for p in 0..n {
            let mut ds: Vec<f64> = (0..n).filter(|&o| o != p).map(|o| dist(d, &train[p], &train[o])).collect();
            ds.sort_by(|a, b| a.partial_cmp(b).unwrap());
            kdist[p] = ds[k - 1];
        }
        let mut lrd = vec![0.0; n];
        for p in 0..n {
            let mut sum = 0.0;
            let mut count = 0usize;
            for o in 0..n {
                if o == p {
                    continue;
                }
                let dpo = dist(d, &train[p], &train[o]);
                if dpo <= kdist[p] {
                    sum += if kdist[o] > dpo { kdist[o] } else { dpo };
                    count += 1;
                }
            }
            lrd[p] = 1.0 / (sum / count as f64 + EPS);
        }
        BruteLof { train, k, d, kdist, lrd }
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        let mut ds: Vec<f64> = self.train.iter().map(|t| dist(self.d, x, t)).collect();
        let all = ds.clone();
        ds.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let kx = ds[self.k - 1];
        let mut reach = 0.0;
        let mut lrd_sum = 0.0;
        let mut count = 0usize;
        for (o, &dxo) in all.iter().enumerate() {
            if dxo <= kx {
                reach += if self.kdist[o] > dxo { self.kdist[o] } else { dxo };
                lrd_sum += self.lrd[o];
                count += 1;
            }
        }
        let lrd_x = 1.0 / (reach / count as f64 + EPS);
        (lrd_sum / count as f64) / lrd_x
    }
}
