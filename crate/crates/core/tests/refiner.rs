use cpsoc_core::fitness::{Budgeted, Unbounded};
use cpsoc_core::refiner::{csa_step, directional_refine};
use cpsoc_core::rng::{stream, Stream};
use cpsoc_core::{Antibody, Fitness, Interval, Landscape, MpbParams, Peak, RefinerParams};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const A: Interval = Interval { min: 0.0, max: 100.0 };

fn cone(center: Vec<f64>, height: f64, width: f64) -> Landscape {
    let dims = center.len();
    let params = MpbParams {
        dimensions: dims,
        ..MpbParams::default()
    };
    let peak = Peak {
        center,
        height,
        width,
        last_shift: vec![0.0; dims],
    };
    Landscape::from_peaks(params, vec![peak], 0).unwrap()
}

fn params() -> RefinerParams {
    RefinerParams {
        initial_step: 8.0,
        ..RefinerParams::default()
    }
}

/// Counts evaluations without going through the landscape's own counter.
struct Counting<'a> {
    inner: &'a mut Landscape,
    calls: usize,
}

impl Fitness for Counting<'_> {
    fn dimensions(&self) -> usize {
        self.inner.params().dimensions
    }

    fn evaluate(&mut self, x: &[f64]) -> f64 {
        self.calls += 1;
        Fitness::evaluate(&mut *self.inner, x)
    }
}

#[test]
fn directional_refine_reaches_apex_from_any_start() {
    let p = params();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..100 {
        let center = rng.random_range(0.0..=100.0);
        let start = rng.random_range(0.0..=100.0);
        let mut land = cone(vec![center], 50.0, rng.random_range(1.0..=12.0));
        let r = directional_refine(&[start], &p, A, &mut land);
        assert!(
            (r.position[0] - center).abs() <= 2.0 * p.min_step,
            "trial {trial}: start {start}, center {center}, got {}",
            r.position[0]
        );
        assert!(land.eval_count() as usize <= p.eval_budget_per_cell);
    }
}

#[test]
fn directional_refine_worked_example() {
    let mut land = cone(vec![30.0], 50.0, 1.0);
    let r = directional_refine(&[20.0], &params(), A, &mut land);
    assert!((r.position[0] - 30.0).abs() <= 0.02);
    assert!(r.affinity >= 49.98);
}

#[test]
fn directional_refine_in_five_dimensions_never_worsens() {
    let p = params();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..200 {
        let mut land = Landscape::new(MpbParams::default(), rng.random()).unwrap();
        let start: Vec<f64> = (0..5).map(|_| rng.random_range(0.0..=100.0)).collect();
        let before = land.evaluate(&start).unwrap();
        let mut counted = Counting { inner: &mut land, calls: 0 };
        let r = directional_refine(&start, &p, A, &mut counted);
        assert!(counted.calls <= p.eval_budget_per_cell);
        assert!(r.affinity >= before);
        assert!(r.position.iter().all(|&v| A.contains(v)));
        assert_eq!(land.evaluate(&r.position).unwrap(), r.affinity);
    }
}

#[test]
fn csa_best_never_worsens_over_ten_thousand_generations() {
    let mut rng = stream(3, Stream::Optimizer);
    let mut land = Landscape::new(MpbParams::default(), 3).unwrap();
    let p = RefinerParams::default();
    let mut population: Vec<Antibody> = (0..5)
        .map(|_| {
            let position: Vec<f64> = (0..5).map(|_| rng.random_range(0.0..=100.0)).collect();
            let affinity = land.evaluate(&position).unwrap();
            Antibody { position, affinity }
        })
        .collect();
    let mut best = population.iter().map(|a| a.affinity).fold(f64::NEG_INFINITY, f64::max);
    for generation in 0..10_000 {
        // a varying budget exercises refused clones as well
        let budget = generation % 17;
        let mut probe = Budgeted::new(&mut land, budget);
        population = csa_step(population, &p, A, &mut probe, &mut rng).unwrap();
        assert!(probe.used() <= budget);
        assert_eq!(population.len(), 5);
        let now = population[0].affinity;
        assert!(now >= best, "generation {generation}: {now} < {best}");
        assert!(population.windows(2).all(|w| w[0].affinity >= w[1].affinity));
        best = now;
    }
}

#[test]
fn csa_converges_on_a_one_dimensional_cone() {
    let p = RefinerParams {
        population_size: 10,
        clone_count: 10,
        mutation_scale: 10.0,
        ..RefinerParams::default()
    };
    let mut hits = 0;
    for trial in 0..100 {
        let mut rng = stream(trial, Stream::Optimizer);
        let center = rng.random_range(0.0..=100.0);
        let start = rng.random_range(0.0..=100.0);
        let mut land = cone(vec![center], 50.0, 1.0);
        let affinity = land.evaluate(&[start]).unwrap();
        let mut population = vec![
            Antibody {
                position: vec![start],
                affinity,
            };
            p.population_size
        ];
        for _ in 0..20 {
            population = csa_step(population, &p, A, &mut Unbounded(&mut land), &mut rng).unwrap();
        }
        if (population[0].position[0] - center).abs() <= 0.1 {
            hits += 1;
        }
    }
    assert!(hits >= 90, "{hits}/100 converged");
}

#[test]
fn csa_clones_follow_rank() {
    let p = RefinerParams::default();
    let counts: Vec<usize> = (1..=5).map(|r| p.clones_for_rank(r)).collect();
    assert!(counts.windows(2).all(|w| w[0] >= w[1]));
    let sigmas: Vec<f64> = (1..=5).map(|r| p.sigma_for_rank(r, 5)).collect();
    assert!(sigmas.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn csa_on_apex_keeps_apex() {
    let mut land = cone(vec![40.0, 60.0], 50.0, 2.0);
    let apex = Antibody {
        position: vec![40.0, 60.0],
        affinity: 50.0,
    };
    let mut rng = stream(0, Stream::Optimizer);
    let out = csa_step(vec![apex.clone()], &RefinerParams::default(), A, &mut Unbounded(&mut land), &mut rng).unwrap();
    assert_eq!(out, vec![apex]);
}

proptest! {
    #[test]
    fn directional_refine_respects_any_budget(
        budget in 0usize..60,
        start in prop::collection::vec(0.0f64..=100.0, 5),
        seed in any::<u64>(),
    ) {
        let p = RefinerParams { eval_budget_per_cell: budget, ..params() };
        let mut land = Landscape::new(MpbParams::default(), seed).unwrap();
        let r = directional_refine(&start, &p, A, &mut land);
        prop_assert!(land.eval_count() as usize <= budget);
        prop_assert!(r.position.iter().all(|&v| A.contains(v)));
    }
}
