use approx::assert_relative_eq;
use proptest::prelude::*;

use halfline::bvp::{solve_bvp, BvpOptions};
use halfline::forcing::ForcingSpec;
use halfline::grid::Grid;
use halfline::operators::{ConvexPotential, MonotoneOperator, OperatorSpec, ScalarGraph};
use halfline::problem::Problem;
use halfline::weights::{build_weights, Coefficient, CoefficientSpec, Tail};

fn operator(kind: usize) -> MonotoneOperator {
    let spec = match kind {
        0 => OperatorSpec::Linear {
            matrix: vec![vec![2.0, -1.0], vec![1.0, 0.5]],
        },
        1 => OperatorSpec::ScalarGraph {
            graph: ScalarGraph::Sign,
            dim: 2,
        },
        2 => OperatorSpec::ScalarGraph {
            graph: ScalarGraph::Power { exponent: 3.0 },
            dim: 2,
        },
        3 => OperatorSpec::Potential {
            potential: ConvexPotential::Abs,
            dim: 2,
        },
        4 => OperatorSpec::Potential {
            potential: ConvexPotential::PositivePartSquared,
            dim: 2,
        },
        _ => OperatorSpec::Potential {
            potential: ConvexPotential::Quadratic {
                matrix: vec![vec![1.0, 0.5], vec![0.5, 1.0]],
            },
            dim: 2,
        },
    };
    MonotoneOperator::from_spec(&spec).unwrap()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, 2)
}

proptest! {
    #[test]
    fn resolvent_is_nonexpansive(kind in 0..6usize, lambda in 1e-3..1e3f64, z in point(), w in point()) {
        let op = operator(kind);
        let jz = op.resolve(lambda, &z).unwrap();
        let jw = op.resolve(lambda, &w).unwrap();
        prop_assert!(norm(&sub(&jz, &jw)) <= norm(&sub(&z, &w)) * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn yosida_is_monotone_and_below_min_section(kind in 0..6usize, lambda in 1e-3..1e3f64, z in point(), w in point()) {
        let op = operator(kind);
        let az = op.yosida(lambda, &z).unwrap();
        let aw = op.yosida(lambda, &w).unwrap();
        let pairing: f64 = sub(&az, &aw).iter().zip(sub(&z, &w)).map(|(a, b)| a * b).sum();
        prop_assert!(pairing >= -1e-9 * (1.0 + norm(&sub(&z, &w)).powi(2)));
        let min = op.min_section(&z).unwrap();
        prop_assert!(norm(&az) <= norm(&min) * (1.0 + 1e-10) + 1e-10);
    }

    #[test]
    fn resolvent_identity(kind in 0..6usize, lambda in 1e-2..1e2f64, ratio in 0.01..1.0f64, z in point()) {
        let op = operator(kind);
        let mu = ratio * lambda;
        let jz = op.resolve(lambda, &z).unwrap();
        let mixed: Vec<f64> = z.iter().zip(&jz).map(|(a, b)| ratio * a + (1.0 - ratio) * b).collect();
        let again = op.resolve(mu, &mixed).unwrap();
        for (a, b) in jz.iter().zip(&again) {
            assert_relative_eq!(*a, *b, epsilon = 1e-9, max_relative = 1e-10);
        }
    }

    #[test]
    fn weight_factorization(q in prop::collection::vec(-3.0..3.0f64, 6), p in prop::collection::vec(0.5..2.0f64, 6)) {
        let coeffs = CoefficientSpec {
            p: Coefficient::samples(p, 5.0, Tail::None),
            q: Coefficient::samples(q, 5.0, Tail::CompactSupport),
        };
        let grid = Grid::with_step(5.0, 0.05).unwrap();
        let w = build_weights(&coeffs, &grid).unwrap();
        for i in 0..grid.len() {
            // a = a₊ a₋ with a₊ nondecreasing, a₋ nonincreasing.
            assert_relative_eq!(w.a(i), w.a_plus(i) * w.a_minus(i), max_relative = 1e-12);
            if i > 0 {
                prop_assert!(w.a_plus(i) >= w.a_plus(i - 1));
                prop_assert!(w.a_minus(i) <= w.a_minus(i - 1));
            }
        }
    }

    #[test]
    fn bvp_is_order_preserving_and_contractive(x1 in -3.0..3.0f64, x2 in -3.0..3.0f64, drift in -2.0..=0.0f64) {
        let base = Problem::new(
            MonotoneOperator::scalar_graph(ScalarGraph::Sign, 1).unwrap(),
            CoefficientSpec::constant(1.0, drift),
            ForcingSpec::Zero,
            vec![x1],
        ).unwrap();
        let grid = Grid::with_step(4.0, 0.02).unwrap();
        let opts = BvpOptions::default();
        let u1 = solve_bvp(&base, &grid, &[0.0], &opts).unwrap();
        let u2 = solve_bvp(&base.with_x(vec![x2]).unwrap(), &grid, &[0.0], &opts).unwrap();
        for i in 0..grid.len() {
            let (a, b) = (u1.value(i)[0], u2.value(i)[0]);
            prop_assert!((a - b).abs() <= (x1 - x2).abs() + 1e-8);
            if x1 <= x2 {
                prop_assert!(a <= b + 1e-8);
            }
        }
    }

    #[test]
    fn forcing_json_round_trip(scale in -5.0..5.0f64, rate in 0.1..3.0f64, exponent in 2.1..5.0f64) {
        let f = ForcingSpec::Sum {
            terms: vec![
                ForcingSpec::Exponential { scale: vec![scale], rate },
                ForcingSpec::Power { scale: vec![1.0], exponent },
            ],
        };
        let back: ForcingSpec = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        prop_assert_eq!(back, f);
    }
}
