//! Independent reference implementations used as test oracles. They favor
//! the most literal transcription over speed.

#![allow(dead_code)]

use berbench::{Label, LabeledDataset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += (a[i] - b[i]).powi(2);
    }
    s
}

/// Random dataset with `na` + `nb` points in `d` dimensions, classes offset
/// by `shift` in the first coordinate.
pub fn random_dataset(r: &mut ChaCha20Rng, na: usize, nb: usize, d: usize, shift: f64) -> LabeledDataset {
    let a: Vec<Vec<f64>> = (0..na).map(|_| (0..d).map(|_| r.gen_range(-1.0..1.0)).collect()).collect();
    let b: Vec<Vec<f64>> = (0..nb)
        .map(|_| {
            (0..d)
                .map(|l| r.gen_range(-1.0..1.0) + if l == 0 { shift } else { 0.0 })
                .collect()
        })
        .collect();
    LabeledDataset::from_classes(d, &a, &b).unwrap()
}

/// LOO k-NN error by full sort of all pairwise distances.
pub fn brute_knn_loo_error(data: &LabeledDataset, k: usize) -> f64 {
    let n = data.len();
    let mut wrong = 0;
    for i in 0..n {
        let mut others: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| (dist2(data.row(i), data.row(j)), j))
            .collect();
        others.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let votes_b = others[..k].iter().filter(|(_, j)| data.label(*j) == Label::B).count();
        let predicted = if votes_b * 2 > k { Label::B } else { Label::A };
        if predicted != data.label(i) {
            wrong += 1;
        }
    }
    wrong as f64 / n as f64
}

/// Kruskal's algorithm over all pairs; edges returned as `(i, j)` with `i < j`.
pub fn kruskal_mst(points: &[f64], dim: usize) -> (Vec<(usize, usize)>, f64) {
    let n = points.len() / dim;
    let row = |i: usize| &points[i * dim..(i + 1) * dim];
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            edges.push((dist2(row(i), row(j)).sqrt(), i, j));
        }
    }
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut x = x;
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut tree = Vec::new();
    let mut total = 0.0;
    for (w, i, j) in edges {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            parent[ri] = rj;
            tree.push((i, j));
            total += w;
        }
    }
    tree.sort();
    (tree, total)
}

pub fn brute_cross_count(data: &LabeledDataset) -> usize {
    let (tree, _) = kruskal_mst(data.features(), data.dim());
    tree.iter().filter(|(i, j)| data.label(*i) != data.label(*j)).count()
}

/// GKDE estimate evaluated literally in the linear domain.
pub fn linear_gkde(data: &LabeledDataset, h: f64) -> f64 {
    let n = data.len();
    let d = data.dim() as f64;
    let norm = (2.0 * std::f64::consts::PI).powf(-d / 2.0) * h.powf(-d);
    let kde = |x: &[f64], label: Label| {
        let members: Vec<usize> = (0..n).filter(|&j| data.label(j) == label).collect();
        let s: f64 = members
            .iter()
            .map(|&j| norm * (-0.5 * dist2(x, data.row(j)) / (h * h)).exp())
            .sum();
        s / members.len() as f64
    };
    let mut total = 0.0;
    let mut col = [vec![0.0; n], vec![0.0; n]];
    for i in 0..n {
        col[0][i] = kde(data.row(i), Label::A);
        col[1][i] = kde(data.row(i), Label::B);
    }
    let sums = [col[0].iter().sum::<f64>(), col[1].iter().sum::<f64>()];
    let na = data.count(Label::A) as f64;
    let nb = data.count(Label::B) as f64;
    for i in 0..n {
        let a = col[0][i] / sums[0] * na / n as f64;
        let b = col[1][i] / sums[1] * nb / n as f64;
        total += a.max(b);
    }
    1.0 - total
}

/// Gaussian naive Bayes written out per feature in the linear domain.
pub fn hand_naive_bayes(data: &LabeledDataset) -> f64 {
    let n = data.len();
    let d = data.dim();
    let mut params = Vec::new();
    for label in [Label::A, Label::B] {
        let rows: Vec<&[f64]> = (0..n).filter(|&i| data.label(i) == label).map(|i| data.row(i)).collect();
        let m = rows.len() as f64;
        let mut stats = Vec::new();
        for l in 0..d {
            let mean = rows.iter().map(|r| r[l]).sum::<f64>() / m;
            let var = (rows.iter().map(|r| (r[l] - mean).powi(2)).sum::<f64>() / m).max(1e-9);
            stats.push((mean, var));
        }
        params.push((m / n as f64, stats));
    }
    let score = |x: &[f64], p: &(f64, Vec<(f64, f64)>)| {
        let mut s = p.0;
        for (l, &(mean, var)) in p.1.iter().enumerate() {
            s *= (-(x[l] - mean).powi(2) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt();
        }
        s
    };
    let wrong = (0..n)
        .filter(|&i| {
            let pred = if score(data.row(i), &params[0]) >= score(data.row(i), &params[1]) {
                Label::A
            } else {
                Label::B
            };
            pred != data.label(i)
        })
        .count();
    wrong as f64 / n as f64
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300) || a == b
}
