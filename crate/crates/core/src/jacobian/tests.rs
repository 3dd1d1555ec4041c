use super::*;
use crate::acceptance::{Acceptance, AcceptanceRule};
use crate::catalog::{build_neighborhood_index, Catalog, DissimilaritySpec, NeighborhoodIndex, TieBreak};
use crate::exec::Execution;
use crate::model::{insertion_rates, refresh_rates};
use crate::solver::map_g;
use approx::assert_relative_eq;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Instance {
    index: NeighborhoodIndex,
    acc: Acceptance,
    rates: Vec<f64>,
    capacity: f64,
}

impl Instance {
    fn input(&self) -> ModelInput<'_> {
        ModelInput::new(&self.index, &self.acc, &self.rates, self.capacity).unwrap()
    }
}

fn random_instance(seed: u64, n: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = (0..n).map(|_| vec![rng.random::<f64>() * 4.0, rng.random::<f64>() * 4.0]).collect();
    let catalog = Catalog::new(pts).unwrap();
    let d = 0.6 + rng.random::<f64>() * 1.2;
    let index = build_neighborhood_index(&catalog, &DissimilaritySpec::euclidean(d), TieBreak::ById, Execution::Sequential).unwrap();
    let q = (0..index.entries()).map(|_| rng.random::<f64>()).collect();
    let acc = Acceptance::from_aligned(&index, q).unwrap();
    let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.05).collect();
    let total: f64 = w.iter().sum();
    Instance {
        index,
        acc,
        rates: w.iter().map(|x| x / total).collect(),
        capacity: (n / 4) as f64,
    }
}

fn central_difference(f: impl Fn(&[f64]) -> Vec<f64>, o: &[f64], h: f64) -> DenseMatrix {
    let n = o.len();
    let mut m = DenseMatrix::zeros(n);
    for j in 0..n {
        let mut up = o.to_vec();
        let mut down = o.to_vec();
        up[j] += h;
        down[j] -= h;
        let (fu, fd) = (f(&up), f(&down));
        for i in 0..n {
            m.set(i, j, (fu[i] - fd[i]) / (2.0 * h));
        }
    }
    m
}

fn interior_point(n: usize, c: f64, seed: u64) -> Vec<f64> {
    // keep away from the box faces so ±h stays inside [0, 1]
    sample_capped_simplex(n, c, 1, seed).unwrap()[0]
        .iter()
        .map(|x| 0.02 + 0.96 * x)
        .collect()
}

#[test]
fn isolated_catalog_has_zero_jacobians() {
    let index = NeighborhoodIndex::isolated(6);
    let acc = Acceptance::new(&index, &AcceptanceRule::SimLru).unwrap();
    let rates = [0.3, 0.2, 0.2, 0.1, 0.1, 0.1];
    let input = ModelInput::new(&index, &acc, &rates, 2.0).unwrap();
    let o = [0.5, 0.4, 0.3, 0.3, 0.3, 0.2];
    let b = jacobian_g(&input, &o, 0.0).unwrap();
    assert_eq!(b.j_e.nnz(), 0);
    assert_eq!(b.j_r.nnz(), 0);
    let damped = b.damped(0.3).to_dense();
    assert_eq!(damped.max_abs_diff(&DenseMatrix::identity(6).scale_identity(0.3)), 0.0);
}

trait ScaleIdentity {
    fn scale_identity(self, s: f64) -> DenseMatrix;
}

impl ScaleIdentity for DenseMatrix {
    fn scale_identity(self, s: f64) -> DenseMatrix {
        let n = self.dim();
        DenseMatrix::from_row_major(n, self.as_row_major().iter().map(|x| x * s).collect())
    }
}

#[test]
fn pair_has_hand_derivative() {
    let index = NeighborhoodIndex::from_lists(vec![vec![(1, 1.0)], vec![(0, 1.0)]], 1.0).unwrap();
    let acc = Acceptance::from_aligned(&index, vec![1.0, 1.0]).unwrap();
    let rates = [0.6, 0.4];
    let input = ModelInput::new(&index, &acc, &rates, 1.0).unwrap();
    let je = jacobian_e(&input, &[0.3, 0.7]);
    assert_relative_eq!(je.get(0, 1), -0.6, epsilon = 1e-15);
    assert_relative_eq!(je.get(1, 0), -0.4, epsilon = 1e-15);
    assert_eq!(je.get(0, 0), 0.0);
    // R_1 = λ_1 + λ_2(1 − o_2)
    let jr = jacobian_r(&input, &[0.3, 0.7]);
    assert_relative_eq!(jr.get(0, 1), -0.4, epsilon = 1e-15);
}

#[test]
fn rate_jacobians_match_finite_differences() {
    for seed in 0..5 {
        let inst = random_instance(seed, 20);
        let input = inst.input();
        let o = interior_point(20, inst.capacity, seed);
        for (analytic, f) in [
            (jacobian_e(&input, &o), Box::new(|x: &[f64]| insertion_rates(&input, x)) as Box<dyn Fn(&[f64]) -> Vec<f64>>),
            (jacobian_r(&input, &o), Box::new(|x: &[f64]| refresh_rates(&input, x))),
        ] {
            let fd = central_difference(f, &o, 1e-6);
            let a = analytic.to_dense();
            for i in 0..20 {
                for j in 0..20 {
                    let (x, y) = (a.get(i, j), fd.get(i, j));
                    assert!((x - y).abs() <= 1e-5 * y.abs().max(1e-3), "seed {seed} ({i},{j}): {x} vs {y}");
                }
            }
        }
    }
}

#[test]
fn jacobian_g_matches_finite_differences() {
    for seed in 10..14 {
        let inst = random_instance(seed, 24);
        let input = inst.input();
        let o = interior_point(24, inst.capacity, seed);
        let b = jacobian_g(&input, &o, 0.0).unwrap();
        let fd = central_difference(|x| map_g(&input, x, 0.0, None).unwrap().0, &o, 1e-6);
        let err = b.j_g.to_dense().max_abs_diff(&fd);
        assert!(err < 1e-6, "seed {seed}: {err}");
        for s in b.j_g.column_sums() {
            assert!(s.abs() < 1e-10);
        }
    }
}

#[test]
fn damped_identity_holds_exactly_enough() {
    let inst = random_instance(3, 25);
    let input = inst.input();
    let o = interior_point(25, inst.capacity, 1);
    let b = jacobian_g(&input, &o, 0.0).unwrap();
    let beta = 0.37;
    let jg = b.j_g.to_dense();
    let jb = b.damped(beta).to_dense();
    for i in 0..25 {
        for j in 0..25 {
            let expect = (1.0 - beta) * jg.get(i, j) + if i == j { beta } else { 0.0 };
            assert!((jb.get(i, j) - expect).abs() <= 4.0 * f64::EPSILON * (1.0 + expect.abs()));
        }
    }
}

#[test]
fn singular_when_nothing_can_be_inserted() {
    let index = NeighborhoodIndex::from_lists(vec![vec![(1, 1.0)], vec![(0, 1.0)], vec![]], 1.0).unwrap();
    let acc = Acceptance::from_aligned(&index, vec![1.0, 1.0]).unwrap();
    let rates = [0.5, 0.5, 0.0];
    let input = ModelInput::new(&index, &acc, &rates, 1.0).unwrap();
    // every insertion rate vanishes once both neighbors are cached
    assert!(jacobian_g(&input, &[1.0, 1.0, 0.0], 0.0).is_err());
}

#[test]
fn spectral_norm_matches_dense_eigensolver() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let n = 50;
    let data: Vec<f64> = (0..n * n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
    let m = DenseMatrix::from_row_major(n, data.clone());
    let na = nalgebra::DMatrix::from_row_slice(n, n, &data);
    let mmt = &na * na.transpose();
    let top = nalgebra::SymmetricEigen::new(mmt).eigenvalues.max();
    let cfg = SpectralConfig { tol: 1e-12, ..Default::default() };
    let s = spectral_norm(&m, &cfg).unwrap();
    assert!((s * s - top).abs() < 1e-8, "{} vs {}", s * s, top);
    // symmetric part radius: max |eigenvalue| of M + Mᵀ
    let sym = &na + na.transpose();
    let radius = nalgebra::SymmetricEigen::new(sym).eigenvalues.amax();
    assert_relative_eq!(symmetric_part_radius(&m, &cfg).unwrap(), radius, max_relative = 1e-9);
}

#[test]
fn quadratic_bound_holds_when_gamma_at_most_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cfg = SpectralConfig { tol: 1e-12, ..Default::default() };
    let mut checked = 0;
    for _ in 0..40 {
        let n = 8;
        let scale = rng.random::<f64>() * 0.4;
        let m = DenseMatrix::from_row_major(n, (0..n * n).map(|_| (rng.random::<f64>() - 0.5) * scale).collect());
        let gamma = spectral_norm(&m, &cfg).unwrap();
        if gamma > 1.0 {
            continue;
        }
        checked += 1;
        let eta = symmetric_part_radius(&m, &cfg).unwrap();
        for k in 0..=20 {
            let beta = k as f64 / 20.0;
            let damped = damp_dense(&m, beta);
            let norm = spectral_norm(&damped, &cfg).unwrap();
            assert!(norm * norm <= quadratic_norm_bound(gamma, eta, beta) + 1e-9);
            assert!(norm * norm <= convex_norm_bound(gamma, eta, beta) + 1e-9);
        }
    }
    assert!(checked > 20);
}

fn damp_dense(m: &DenseMatrix, beta: f64) -> DenseMatrix {
    let n = m.dim();
    let mut out = DenseMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            out.set(i, j, (1.0 - beta) * m.get(i, j) + if i == j { beta } else { 0.0 });
        }
    }
    out
}

#[test]
fn quadratic_bound_can_fail_above_unit_gamma() {
    // rotation generator: γ = 3, η = 0; the interval is (1/2, 1) yet β = 0.6
    // leaves ‖J_{Gβ}‖₂² = 0.16·9 + 0.36 = 1.8
    let j = DenseMatrix::from_row_major(2, vec![0.0, 3.0, -3.0, 0.0]);
    let cfg = SpectralConfig::default();
    let interval = beta_interval(3.0, 0.0);
    assert!(interval.contains(0.6));
    let norm = spectral_norm(&damp_dense(&j, 0.6), &cfg).unwrap();
    assert_relative_eq!(norm * norm, 1.8, epsilon = 1e-9);
    assert!(quadratic_norm_bound(3.0, 0.0, 0.6) < 1.0);
    assert_relative_eq!(convex_norm_bound(3.0, 0.0, 0.6), 1.8, epsilon = 1e-12);
}

#[test]
fn tune_isolated_catalog() {
    let index = NeighborhoodIndex::isolated(10);
    let acc = Acceptance::new(&index, &AcceptanceRule::Lru).unwrap();
    let rates = vec![0.1; 10];
    let input = ModelInput::new(&index, &acc, &rates, 3.0).unwrap();
    let r = tune_beta(&input, &TuneConfig::default()).unwrap();
    assert!(r.verified);
    assert_eq!(r.beta, 0.5);
    assert_eq!(r.samples.len(), 8);
    for s in &r.samples {
        assert_eq!(s.interval.interval, Some((0.0, 1.0)));
        assert!(s.damped_norm.unwrap() < 1.0);
    }
}

#[test]
fn tune_verified_beta_contracts_every_sample() {
    for seed in 0..4 {
        let inst = random_instance(100 + seed, 30);
        let input = inst.input();
        let r = tune_beta(&input, &TuneConfig { seed, ..Default::default() }).unwrap();
        if r.verified {
            assert!(r.samples.iter().all(|s| s.damped_norm.unwrap() < 1.0));
            let (a, b) = r.intersection.unwrap();
            assert!(a < r.beta && r.beta < b);
        } else {
            assert_eq!(r.beta, 0.5);
            assert!(r.fallback.is_some());
        }
    }
}

#[test]
fn sequential_and_parallel_tuning_agree() {
    let inst = random_instance(5, 30);
    let seq = inst.input().with_exec(Execution::Sequential);
    let par = inst.input().with_exec(Execution::Parallel);
    assert_eq!(
        tune_beta(&seq, &TuneConfig::default()).unwrap(),
        tune_beta(&par, &TuneConfig::default()).unwrap()
    );
}

