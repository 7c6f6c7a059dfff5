//! Independent reference implementations used only by tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use skillcompass::profiles::{parse_profiles, ProfileSchema, WorkerProfile};
use skillcompass::skillnet::SkillGraph;

pub const FIVE_WORKERS: &str = include_str!("../fixtures/five_workers.csv");
pub const TWENTY_WORKERS: &str = include_str!("../fixtures/twenty_workers.csv");

pub fn fixture_profiles(text: &str) -> Vec<WorkerProfile> {
    let parsed = parse_profiles(text.as_bytes(), &ProfileSchema::default()).unwrap();
    assert!(parsed.rejected.is_empty());
    parsed.profiles
}

/// Pair weights by enumerating every ordered pair of skills of every worker
/// and keeping the ones with `a < b`.
pub fn brute_force_pairs(profiles: &[WorkerProfile]) -> BTreeMap<(String, String), u64> {
    let mut out = BTreeMap::new();
    for p in profiles {
        let skills: Vec<&String> = p.skills.iter().collect();
        for a in &skills {
            for b in &skills {
                if a < b {
                    *out.entry(((*a).clone(), (*b).clone())).or_insert(0) += 1;
                }
            }
        }
    }
    out
}

/// Distinct neighbors per skill from the brute-force pair table.
pub fn brute_force_degrees(profiles: &[WorkerProfile]) -> BTreeMap<String, usize> {
    let mut neighbors: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for p in profiles {
        for s in &p.skills {
            neighbors.entry(s.clone()).or_default();
        }
    }
    for (a, b) in brute_force_pairs(profiles).keys() {
        neighbors.get_mut(a).unwrap().insert(b.clone());
        neighbors.get_mut(b).unwrap().insert(a.clone());
    }
    neighbors.into_iter().map(|(k, v)| (k, v.len())).collect()
}

/// Graph pair weights keyed by skill names with `a < b`.
pub fn graph_pairs(graph: &SkillGraph) -> BTreeMap<(String, String), u64> {
    graph
        .edges()
        .map(|(a, b, w)| {
            let (ka, kb) = (graph.key(a).to_string(), graph.key(b).to_string());
            if ka < kb {
                ((ka, kb), w)
            } else {
                ((kb, ka), w)
            }
        })
        .collect()
}

/// Modularity by summing over all ordered node pairs:
/// `Q = 1/(2m) Σ_ij [A_ij − γ k_i k_j / (2m)] δ(c_i, c_j)`.
pub fn modularity_oracle(graph: &SkillGraph, assignment: &[usize], resolution: f64) -> f64 {
    let n = graph.node_count();
    let two_m = 2.0 * graph.total_edge_weight() as f64;
    let k: Vec<f64> = (0..n).map(|i| graph.weighted_degree(i) as f64).collect();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if assignment[i] == assignment[j] {
                q += graph.weight(i, j) as f64 - resolution * k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

/// NMI with base-2 logarithms over an explicit contingency table.
pub fn nmi_oracle(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len() as f64;
    let ka = a.iter().max().map_or(0, |m| m + 1);
    let kb = b.iter().max().map_or(0, |m| m + 1);
    let mut table = vec![vec![0.0f64; kb]; ka];
    for (&x, &y) in a.iter().zip(b) {
        table[x][y] += 1.0;
    }
    let rows: Vec<f64> = table.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<f64> = (0..kb).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    let h = |v: &[f64]| -> f64 {
        v.iter()
            .filter(|&&c| c > 0.0)
            .map(|&c| -(c / n) * (c / n).log2())
            .sum()
    };
    let (ha, hb) = (h(&rows), h(&cols));
    let mut mi = 0.0;
    for i in 0..ka {
        for j in 0..kb {
            let c = table[i][j];
            if c > 0.0 {
                mi += (c / n) * ((c * n) / (rows[i] * cols[j])).log2();
            }
        }
    }
    if ha + hb == 0.0 {
        1.0
    } else {
        2.0 * mi / (ha + hb)
    }
}

/// Normal-equation least squares via Cholesky of `XᵀX`.
pub struct NormalEquationFit {
    pub beta: DVector<f64>,
    pub se: DVector<f64>,
    pub r_squared: f64,
    pub f_value: f64,
    pub residuals: DVector<f64>,
}

pub fn normal_equation_oracle(x: &DMatrix<f64>, y: &DVector<f64>) -> NormalEquationFit {
    let (n, p) = x.shape();
    let xtx = x.transpose() * x;
    let chol = xtx.clone().cholesky().expect("full rank");
    let beta = chol.solve(&(x.transpose() * y));
    let residuals = y - x * &beta;
    let rss = residuals.norm_squared();
    let mean = y.mean();
    let tss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let sigma2 = rss / (n - p) as f64;
    let inv = chol.inverse();
    let se = DVector::from_iterator(p, (0..p).map(|j| (sigma2 * inv[(j, j)]).sqrt()));
    let r_squared = 1.0 - rss / tss;
    let f_value = ((tss - rss) / (p - 1) as f64) / (rss / (n - p) as f64);
    NormalEquationFit {
        beta,
        se,
        r_squared,
        f_value,
        residuals,
    }
}

pub fn relative_error(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }
}

/// `max |Xᵀe| / ‖y‖`.
pub fn orthogonality_ratio(x: &DMatrix<f64>, y: &DVector<f64>, residuals: &[f64]) -> f64 {
    let e = DVector::from_column_slice(residuals);
    (x.transpose() * e).amax() / y.norm()
}

/// Random regression problem: intercept plus `p − 1` standard normal
/// columns, coefficients of magnitude in [0.5, 3], unit noise.
pub fn random_ols_instance(seed: u64, n: usize, p: usize) -> (DMatrix<f64>, DVector<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = rand_distr::StandardNormal;
    let x = DMatrix::from_fn(n, p, |_, j| {
        if j == 0 {
            1.0
        } else {
            rng.sample::<f64, _>(normal)
        }
    });
    let beta = DVector::from_fn(p, |_, _| {
        let m: f64 = rng.random_range(0.5..3.0);
        if rng.random_bool(0.5) {
            m
        } else {
            -m
        }
    });
    let noise = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(normal));
    let y = &x * beta + noise;
    (x, y)
}

/// Stochastic block graph: `blocks × size` nodes, each intra-block pair
/// linked with probability `p_in`, each inter-block pair with `p_out`.
pub fn planted_blocks(
    blocks: usize,
    size: usize,
    p_in: f64,
    p_out: f64,
    seed: u64,
) -> (SkillGraph, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = blocks * size;
    let keys = (0..n).map(|i| format!("n{i:04}")).collect();
    let truth: Vec<usize> = (0..n).map(|i| i / size).collect();
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let p = if truth[a] == truth[b] { p_in } else { p_out };
            if rng.random_bool(p) {
                edges.push((a, b, 1));
            }
        }
    }
    (SkillGraph::from_edges(keys, edges).unwrap(), truth)
}

/// `count` disjoint cliques of `size` nodes with unit weights.
pub fn disjoint_cliques(count: usize, size: usize) -> SkillGraph {
    let keys = (0..count * size).map(|i| format!("c{i:04}")).collect();
    let mut edges = Vec::new();
    for c in 0..count {
        for a in 0..size {
            for b in a + 1..size {
                edges.push((c * size + a, c * size + b, 1));
            }
        }
    }
    SkillGraph::from_edges(keys, edges).unwrap()
}

/// For each planted domain, the estimated domain holding most of its skills.
pub fn match_domains(
    planted: &BTreeMap<String, usize>,
    estimated: &dyn Fn(&str) -> usize,
    planted_count: usize,
) -> Vec<usize> {
    (0..planted_count)
        .map(|d| {
            let mut votes: HashMap<usize, usize> = HashMap::new();
            for (key, &pd) in planted {
                if pd == d {
                    *votes.entry(estimated(key)).or_default() += 1;
                }
            }
            votes
                .into_iter()
                .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
                .map(|(e, _)| e)
                .unwrap()
        })
        .collect()
}

/// Quartile by the linear interpolation rule `h = (n − 1) q`, written out
/// directly.
pub fn quantile_oracle(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let h = (v.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}
