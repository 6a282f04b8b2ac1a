use proptest::prelude::*;

use hamlab::gen;
use hamlab::ham::embed_operator;
use hamlab::linalg::{self, eigvalsh, hermitian_deviation, kron, Matrix, Operator};
use hamlab::oracle::{AdversarialPolicy, OracleTranscript, SpectralOracle};
use hamlab::reductions::{binary_strings, tree_prefixes, QueryTree, TreeMode};
use hamlab::solvers::{self, Normalized};
use hamlab::spectral::{self, DoublingOperator};
use hamlab::Representation;

fn sorted_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 48,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn assembled_hamiltonians_are_hermitian(seed in any::<u64>(), n in 1usize..=4, terms in 1usize..=6) {
        let mut rng = gen::rng(seed);
        let h = gen::random_local_hamiltonian(n, terms, n.min(3), &mut rng);
        let m = h.assemble_dense().unwrap();
        prop_assert!(hermitian_deviation(&m) <= 1e-12);
        // norm bound is an upper bound on the spectral radius
        let vals = eigvalsh(&m);
        prop_assert!(vals[0].abs().max(vals[vals.len() - 1].abs()) <= h.norm_bound() + 1e-9);
    }

    #[test]
    fn sparse_and_dense_assembly_agree(seed in any::<u64>(), n in 1usize..=4) {
        let mut rng = gen::rng(seed);
        let h = gen::random_local_hamiltonian(n, 4, n.min(2), &mut rng);
        let dense = h.assemble_with(Representation::Dense).unwrap();
        let sparse = h.assemble_with(Representation::Sparse).unwrap();
        let x = gen::random_state(1 << n, &mut rng);
        prop_assert!((dense.matvec(&x) - sparse.matvec(&x)).norm() <= 1e-12);
        prop_assert!(matches!(sparse, Operator::Sparse(_)));
    }

    #[test]
    fn single_qubit_embedding_is_a_kronecker_chain(seed in any::<u64>(), n in 1usize..=4, q in 0usize..4) {
        let q = q % n;
        let mut rng = gen::rng(seed);
        let a = gen::random_hermitian(2, &mut rng);
        let embedded = embed_operator(&a, &[q], n).unwrap();
        // qubit 0 is the least significant bit, so it is the rightmost factor
        let mut chain = Matrix::identity(1, 1);
        for k in (0..n).rev() {
            let factor = if k == q { a.clone() } else { Matrix::identity(2, 2) };
            chain = kron(&chain, &factor);
        }
        prop_assert!(linalg::max_abs_diff(&embedded, &chain) <= 1e-14);
    }

    #[test]
    fn shift_and_scale_move_the_spectrum(seed in any::<u64>(), c in -3.0f64..3.0, s in 0.1f64..4.0) {
        let mut rng = gen::rng(seed);
        let h = gen::random_local_hamiltonian(3, 3, 2, &mut rng);
        let base = eigvalsh(&h.assemble_dense().unwrap());
        let moved = eigvalsh(&h.scale(s).shifted(c).assemble_dense().unwrap());
        let want: Vec<f64> = base.iter().map(|v| s * v + c).collect();
        prop_assert!(sorted_diff(&moved, &want) <= 1e-10);
    }

    #[test]
    fn normalization_keeps_spectrum_in_unit_interval(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = gen::rng(seed);
        let h = gen::random_local_hamiltonian(n, 3, n, &mut rng);
        let norm = Normalized::new(&h);
        let vals = eigvalsh(&norm.hamiltonian.assemble_dense().unwrap());
        prop_assert!(vals[0] >= -1e-10);
        prop_assert!(vals[vals.len() - 1] <= 1.0 + 1e-10);
        let x = 0.37;
        prop_assert!((norm.to_original(norm.to_normalized(x)) - x).abs() <= 1e-12);
    }

    #[test]
    fn binary_search_brackets_under_any_oracle(
        seed in any::<u64>(),
        ground in 0.0f64..1.0,
        k in 3i32..=7,
        policy in prop_oneof![
            Just(AdversarialPolicy::Strict),
            Just(AdversarialPolicy::Fixed(true)),
            Just(AdversarialPolicy::Fixed(false)),
            any::<u64>().prop_map(AdversarialPolicy::Seeded),
        ],
    ) {
        let mut rng = gen::rng(seed);
        let spectrum = [ground, ground + (1.0 - ground) * 0.5, 1.0f64.max(ground), 1.0];
        let h = gen::hamiltonian_with_spectrum(2, &spectrum, &mut rng);
        let eps = 2f64.powi(-k);
        let mut oracle = SpectralOracle::new(policy);
        let r = solvers::binary_search_ground_energy(&h, eps, &mut oracle).unwrap();
        prop_assert!(r.a - 1e-12 <= ground && ground <= r.a + r.width + 1e-12, "{ground} not in [{}, +{}]", r.a, r.width);
        prop_assert!(r.width <= eps / 2.0);
        prop_assert!(r.query_count() <= (2.0 / eps).log2().ceil() as usize + 1);
    }

    #[test]
    fn antisymmetric_sector_holds_pair_sums(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = gen::rng(seed);
        let m = gen::random_hermitian(1 << n, &mut rng);
        let vals = eigvalsh(&m);
        let mut sums = Vec::new();
        for i in 0..vals.len() {
            for j in i + 1..vals.len() {
                sums.push(vals[i] + vals[j]);
            }
        }
        sums.sort_by(f64::total_cmp);
        let restricted = eigvalsh(&spectral::antisymmetric_restriction(&m, DoublingOperator::Sum));
        prop_assert_eq!(restricted.len(), sums.len());
        prop_assert!(sorted_diff(&restricted, &sums) <= 1e-10);
    }

    #[test]
    fn transcripts_round_trip(seed in any::<u64>(), queries in 1usize..6) {
        let mut rng = gen::rng(seed);
        let h = gen::random_local_hamiltonian(2, 2, 2, &mut rng);
        let mut oracle = SpectralOracle::new(AdversarialPolicy::Seeded(seed));
        for i in 0..queries {
            let a = -1.0 + 0.3 * i as f64;
            hamlab::oracle::Oracle::record(&mut oracle, &hamlab::oracle::PromiseInstance::Lh {
                hamiltonian: h.clone(),
                a,
                b: a + 0.2,
            }).unwrap();
        }
        let t = oracle.into_transcript();
        let back = OracleTranscript::from_jsonl(&t.to_jsonl()).unwrap();
        prop_assert_eq!(back.bits(), t.bits());
        prop_assert_eq!(back.to_jsonl(), t.to_jsonl());
    }

    #[test]
    fn query_trees_round_trip(seed in any::<u64>(), depth in 1usize..=3) {
        let eps = 0.1;
        let mut rng = gen::rng(seed);
        let queries = tree_prefixes(depth)
            .into_iter()
            .map(|p| {
                let yes = rand::Rng::random_bool(&mut rng, 0.5);
                (p, gen::query_hamiltonian(1, yes, eps, &mut rng))
            })
            .collect();
        let accept = binary_strings(depth).into_iter().filter(|_| rand::Rng::random_bool(&mut rng, 0.5)).collect();
        let tree = QueryTree::new(eps, depth, 1, queries, accept, TreeMode::Strict).unwrap();
        let back = QueryTree::from_json(&tree.to_json(), TreeMode::Strict).unwrap();
        prop_assert_eq!(back.to_json(), tree.to_json());
        prop_assert_eq!(back.machine_output().unwrap(), tree.machine_output().unwrap());
    }
}
