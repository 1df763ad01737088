use mfmg::mesh::{refine_octant, refine_uniform};
use mfmg::multigrid::{solve_poisson, CoarseSolver, SolverControl};
use mfmg::{Hierarchy, MgConfig, MgError, Variant};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn free_vector(h: &Hierarchy<f64>, seed: u64) -> Vec<f64> {
    let cs = h.active_operator().constraints().clone();
    let mut x: Vec<f64> = (0..h.n_active_dofs())
        .map(|i| (((i as u64 + 3) * (seed * 2 + 1)) % 211) as f64 / 211.0 - 0.5)
        .collect();
    cs.set_zero(&mut x);
    x
}

#[test]
fn vcycles_are_symmetric_positive() {
    let mesh = refine_octant(4, 2).unwrap();
    for (v, p) in [
        (Variant::LocalSmoothing, 1),
        (Variant::LocalSmoothing, 2),
        (Variant::GlobalCoarsening, 2),
        (Variant::PolynomialCoarsening, 3),
    ] {
        let mut h = Hierarchy::<f64>::build(&mesh, p, v, &MgConfig::default()).unwrap();
        let x = free_vector(&h, 1);
        let y = free_vector(&h, 2);
        let mx = h.vcycle(&x).unwrap();
        let my = h.vcycle(&y).unwrap();
        let (a, b) = (dot(&y, &mx), dot(&x, &my));
        assert!((a - b).abs() <= 1e-10 * a.abs().max(b.abs()), "{v} p={p}: {a} vs {b}");
        assert!(dot(&x, &mx) > 0.0);
    }
}

#[test]
fn vcycle_is_deterministic() {
    let mesh = refine_octant(3, 3).unwrap();
    let mut h = Hierarchy::<f64>::build(&mesh, 2, Variant::LocalSmoothing, &MgConfig::default()).unwrap();
    let x = free_vector(&h, 5);
    let a = h.vcycle(&x).unwrap();
    let b = h.vcycle(&x).unwrap();
    assert_eq!(a, b);
}

#[test]
fn uniform_meshes_give_identical_local_and_global_cycles() {
    let mesh = refine_uniform(3, 2).unwrap();
    let mut ls = Hierarchy::<f64>::build(&mesh, 2, Variant::LocalSmoothing, &MgConfig::default()).unwrap();
    let mut gc = Hierarchy::<f64>::build(&mesh, 2, Variant::GlobalCoarsening, &MgConfig::default()).unwrap();
    let x = free_vector(&gc, 3);
    let a = ls.vcycle(&x).unwrap();
    let b = gc.vcycle(&x).unwrap();
    let diff: f64 = a.iter().zip(&b).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
    assert!(diff <= 1e-10 * dot(&b, &b).sqrt());
}

#[test]
fn polynomial_chain_halves_the_degree() {
    let mesh = refine_octant(3, 2).unwrap();
    let h = Hierarchy::<f64>::build(&mesh, 4, Variant::PolynomialCoarsening, &MgConfig::default()).unwrap();
    assert_eq!(h.degrees(), vec![1, 2, 4]);
    assert!(matches!(h.coarse_solver(), CoarseSolver::Nested(inner) if inner.variant() == Variant::GlobalCoarsening));
    let h = Hierarchy::<f64>::build(&mesh, 7, Variant::PolynomialCoarsening, &MgConfig::default()).unwrap();
    assert_eq!(h.degrees(), vec![1, 3, 7]);
    let dense = MgConfig { pc_coarse: None, ..MgConfig::default() };
    let h = Hierarchy::<f64>::build(&mesh, 2, Variant::PolynomialCoarsening, &dense).unwrap();
    assert!(matches!(h.coarse_solver(), CoarseSolver::Dense(_)));
    assert!(matches!(
        Hierarchy::<f64>::build(&mesh, 1, Variant::PolynomialCoarsening, &MgConfig::default()),
        Err(MgError::NoCoarserDegree(1))
    ));
}

#[test]
fn level_sizes_follow_the_views() {
    let mesh = refine_octant(4, 2).unwrap();
    let gc = Hierarchy::<f64>::build(&mesh, 1, Variant::GlobalCoarsening, &MgConfig::default()).unwrap();
    let ls = Hierarchy::<f64>::build(&mesh, 1, Variant::LocalSmoothing, &MgConfig::default()).unwrap();
    assert_eq!(gc.n_levels(), 5);
    assert_eq!(ls.n_levels(), 5);
    assert_eq!(*gc.level_n_cells().last().unwrap(), mesh.n_active());
    assert!(ls.level_n_cells().last().unwrap() < &mesh.n_active());
    assert_eq!(gc.level_n_cells()[..3], ls.level_n_cells()[..3]);
    for (g, l) in gc.level_n_cells().iter().zip(ls.level_n_cells()) {
        assert!(*g >= l);
    }
}

#[test]
fn solver_reproduces_a_discrete_solution() {
    // bilinear/trilinear functions are in every space, so the discrete
    // solution with matching boundary data and zero load is exact
    let g = |x: [f64; 3]| 1.0 + 2.0 * x[0] - x[1] + 0.5 * x[0] * x[1];
    let mesh = refine_octant(4, 2).unwrap();
    for v in [Variant::LocalSmoothing, Variant::GlobalCoarsening, Variant::PolynomialCoarsening] {
        let mut h = Hierarchy::<f64>::build(&mesh, 2, v, &MgConfig::default()).unwrap();
        let control = SolverControl { rtol: 1e-12, max_iterations: 100 };
        let s = solve_poisson(&mesh, &mut h, |_| 0.0, Some(&g), control).unwrap();
        let dofs = h.active_operator().dofs().clone();
        let err = mfmg::fem::l2_error(&mesh, &dofs, &s.values, g, 4);
        assert!(err < 1e-9, "{v}: {err:e}");
    }
}

#[test]
fn iteration_cap_is_reported() {
    let mesh = refine_octant(3, 2).unwrap();
    let mut h = Hierarchy::<f64>::build(&mesh, 1, Variant::GlobalCoarsening, &MgConfig::default()).unwrap();
    let control = SolverControl { rtol: 1e-14, max_iterations: 1 };
    assert!(matches!(
        solve_poisson(&mesh, &mut h, |_| 1.0, None, control),
        Err(MgError::Diverged { iterations: 1, .. })
    ));
}

#[test]
fn single_precision_cycle_agrees_with_double() {
    let mesh = refine_octant(3, 3).unwrap();
    let mut h64 = Hierarchy::<f64>::build(&mesh, 2, Variant::GlobalCoarsening, &MgConfig::default()).unwrap();
    let mut h32 = Hierarchy::<f32>::build(&mesh, 2, Variant::GlobalCoarsening, &MgConfig::default()).unwrap();
    let x = free_vector(&h64, 9);
    let x32: Vec<f32> = x.iter().map(|&v| v as f32).collect();
    let a = h64.vcycle(&x).unwrap();
    let b: Vec<f64> = h32.vcycle(&x32).unwrap().iter().map(|&v| v as f64).collect();
    let diff: f64 = a.iter().zip(&b).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
    assert!(diff <= 1e-4 * dot(&a, &a).sqrt());
}

#[test]
fn multigrid_interpolation_reproduces_linear_fields() {
    let mesh = refine_octant(4, 2).unwrap();
    let lin = |x: [f64; 3]| 0.3 + x[0] - 2.0 * x[1];
    for v in [Variant::GlobalCoarsening, Variant::LocalSmoothing] {
        let h = Hierarchy::<f64>::build(&mesh, 2, v, &MgConfig::default()).unwrap();
        let active = mfmg::fem::interpolate(h.active_operator().dofs(), lin);
        let levels = h.interpolate_to_mg(&mesh, &active).unwrap();
        for (l, field) in levels.iter().enumerate() {
            let dofs = h.level_operator(l).dofs();
            for (i, &val) in field.iter().enumerate() {
                assert!((val - lin(dofs.position(i))).abs() < 1e-12, "{v} level {l}");
            }
        }
    }
}

#[test]
fn octant_hierarchies_have_one_level_per_refinement_level() {
    let mesh = refine_octant(5, 3).unwrap();
    for v in [Variant::LocalSmoothing, Variant::GlobalCoarsening] {
        let h = Hierarchy::<f64>::build(&mesh, 1, v, &MgConfig::default()).unwrap();
        assert_eq!(h.n_levels(), 6, "{v}");
    }
}

#[test]
fn single_level_cycle_is_an_exact_solve() {
    // a root-only mesh gives a one-level hierarchy
    let root = mfmg::TreeMesh::new(3).unwrap();
    for (m, p) in [(&root, 3), (&root, 4)] {
        let mut h = Hierarchy::<f64>::build(m, p, Variant::GlobalCoarsening, &MgConfig::default()).unwrap();
        assert_eq!(h.n_levels(), 1);
        let b = free_vector(&h, 4);
        let x = h.vcycle(&b).unwrap();
        let ax = h.active_operator().apply(&x).unwrap();
        let res: f64 = ax.iter().zip(&b).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
        assert!(res <= 1e-12 * dot(&b, &b).sqrt());
    }
}

#[test]
fn vcycle_is_linear() {
    let mesh = refine_octant(4, 2).unwrap();
    for v in [Variant::LocalSmoothing, Variant::GlobalCoarsening, Variant::PolynomialCoarsening] {
        let mut h = Hierarchy::<f64>::build(&mesh, 2, v, &MgConfig::default()).unwrap();
        let b = free_vector(&h, 8);
        let c = free_vector(&h, 9);
        let combo: Vec<f64> = b.iter().zip(&c).map(|(x, y)| 2.5 * x - 0.75 * y).collect();
        let mb = h.vcycle(&b).unwrap();
        let mc = h.vcycle(&c).unwrap();
        let m = h.vcycle(&combo).unwrap();
        let expect: Vec<f64> = mb.iter().zip(&mc).map(|(x, y)| 2.5 * x - 0.75 * y).collect();
        let diff: f64 = m.iter().zip(&expect).map(|(u, w)| (u - w).powi(2)).sum::<f64>().sqrt();
        assert!(diff <= 1e-12 * dot(&expect, &expect).sqrt(), "{v}");
    }
}

#[test]
fn dense_coarse_solver_matches_iterative_solve() {
    use mfmg::multigrid::{pcg_solve, DenseCoarseSolver};
    let mesh = refine_octant(4, 2).unwrap();
    let h = Hierarchy::<f64>::build(&mesh, 2, Variant::GlobalCoarsening, &MgConfig::default()).unwrap();
    let op = h.level_operator(2);
    let mut b: Vec<f64> = (0..op.n_dofs()).map(|i| ((i * 13) % 7) as f64 - 3.0).collect();
    op.constraints().set_zero(&mut b);
    let direct = DenseCoarseSolver::new(op).unwrap().solve(&b);
    let ax = op.apply(&direct).unwrap();
    let res: f64 = ax.iter().zip(&b).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
    assert!(res <= 1e-12 * dot(&b, &b).sqrt());
    let control = SolverControl { rtol: 1e-14, max_iterations: 1000 };
    let (cg, _) = pcg_solve(op, &b, |r| r.to_vec(), control).unwrap();
    let diff: f64 = cg.iter().zip(&direct).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
    assert!(diff <= 1e-10 * dot(&direct, &direct).sqrt());
}

#[test]
fn eigenvalue_estimates_are_within_five_percent() {
    use mfmg::multigrid::estimate_eigenvalues;
    let mesh = refine_octant(3, 2).unwrap();
    for p in 1..=3 {
        let h = Hierarchy::<f64>::build(&mesh, p, Variant::GlobalCoarsening, &MgConfig::default()).unwrap();
        for l in 1..h.n_levels() {
            let op = h.level_operator(l);
            let a = op.assemble_matrix();
            let diag = op.compute_diagonal();
            let fixed: Vec<bool> = (0..op.n_dofs()).map(|i| op.constraints().is_constrained(i)).collect();
            let free: Vec<usize> = (0..op.n_dofs()).filter(|&i| !fixed[i]).collect();
            let n = free.len();
            let scaled = nalgebra::DMatrix::from_fn(n, n, |i, j| {
                a[(free[i], free[j])] / (diag[free[i]] * diag[free[j]]).sqrt()
            });
            let exact = scaled.symmetric_eigenvalues().max();
            let estimate = estimate_eigenvalues(op, &diag, &fixed, 20, 42);
            assert!(estimate <= exact * (1.0 + 1e-12), "p={p} level {l}");
            assert!(estimate >= 0.95 * exact, "p={p} level {l}: {estimate} vs {exact}");
            assert_eq!(h.smoother(l).unwrap().lambda_max, estimate);
        }
    }
}

#[test]
fn higher_smoother_degree_never_needs_more_iterations() {
    let mesh = refine_octant(4, 3).unwrap();
    for v in [Variant::LocalSmoothing, Variant::GlobalCoarsening] {
        let mut its = Vec::new();
        for k in [3, 6] {
            let cfg = MgConfig { smoother_degree: k, ..MgConfig::default() };
            let mut h = Hierarchy::<f64>::build(&mesh, 2, v, &cfg).unwrap();
            its.push(solve_poisson(&mesh, &mut h, |_| 1.0, None, SolverControl::default()).unwrap().stats.iterations);
        }
        assert!(its[1] <= its[0], "{v}: {its:?}");
    }
}
