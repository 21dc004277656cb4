//! Post-change refinement of cell memories.
//!
//! After every environment change each occupied cell's memory is improved in two stages:
//! one generation of clonal selection around the memory, then a coordinate-wise search
//! that keeps a step magnitude and a direction per dimension. Both stages share one
//! evaluation budget per cell.

use alloc::vec::Vec;

use rand_distr::{Distribution, StandardNormal};

use crate::engine::{EngineState, RefinedCell};
use crate::error::Error;
use crate::fitness::{Budgeted, Fitness, Probe};
use crate::grid::GridSpec;
use crate::mpb::Interval;
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct Antibody {
    pub position: Vec<f64>,
    pub affinity: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct RefinerParams {
    /// Antibodies seeded around a cell memory.
    pub population_size: usize,
    /// Number of antibodies selected for cloning; also scales the clone counts.
    pub clone_count: usize,
    /// Hypermutation standard deviation of the worst selected antibody.
    pub mutation_scale: f64,
    pub initial_step: f64,
    pub min_step: f64,
    pub step_shrink: f64,
    pub eval_budget_per_cell: usize,
    /// Cells refined after one change, best memory first.
    pub max_cells_per_change: usize,
    /// Largest fraction of the change period the refinement of one change may use, when
    /// the engine knows the period.
    pub change_budget_share: f64,
}

impl Default for RefinerParams {
    fn default() -> Self {
        RefinerParams::for_grid(&GridSpec::default())
    }
}

impl RefinerParams {
    /// Defaults scaled to `grid`: the first coordinate step is half a cell.
    pub fn for_grid(grid: &GridSpec) -> Self {
        RefinerParams {
            population_size: 5,
            clone_count: 5,
            mutation_scale: 1.0,
            initial_step: grid.cell_width() / 2.0,
            min_step: 1e-2,
            step_shrink: 0.5,
            eval_budget_per_cell: 100,
            max_cells_per_change: 10,
            change_budget_share: 0.4,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.population_size < 1 {
            return Err(Error::config("refiner.population_size", "must be at least 1"));
        }
        if self.clone_count < 1 {
            return Err(Error::config("refiner.clone_count", "must be at least 1"));
        }
        if !(self.mutation_scale >= 0.0) {
            return Err(Error::config("refiner.mutation_scale", "must be non-negative"));
        }
        if !(self.min_step > 0.0) {
            return Err(Error::config("refiner.min_step", "must be positive"));
        }
        if !(self.min_step <= self.initial_step) {
            return Err(Error::config("refiner.initial_step", "must be at least min_step"));
        }
        if !(self.step_shrink > 0.0 && self.step_shrink < 1.0) {
            return Err(Error::config("refiner.step_shrink", "must lie in (0, 1)"));
        }
        if !(0.0..=1.0).contains(&self.change_budget_share) {
            return Err(Error::config("refiner.change_budget_share", "must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Clones given to the antibody of 1-based affinity rank `rank`.
    pub fn clones_for_rank(&self, rank: usize) -> usize {
        self.clone_count.div_ceil(rank)
    }

    /// Hypermutation scale for 1-based affinity rank `rank` out of `selected`.
    pub fn sigma_for_rank(&self, rank: usize, selected: usize) -> f64 {
        self.mutation_scale * rank as f64 / selected as f64
    }
}

fn sort_by_affinity(pop: &mut [Antibody]) {
    pop.sort_by(|a, b| b.affinity.total_cmp(&a.affinity));
}

/// One clonal-selection generation.
///
/// Ranks by affinity, clones the best `clone_count` antibodies (more clones for better
/// ranks), hypermutates clones with a Gaussian whose scale grows with rank, and keeps the
/// best `population.len()` of parents and clones. Clones that the probe refuses to
/// evaluate are discarded.
pub fn csa_step<P: Probe + ?Sized>(
    mut population: Vec<Antibody>,
    params: &RefinerParams,
    bounds: Interval,
    probe: &mut P,
    rng: &mut Rng,
) -> Result<Vec<Antibody>, Error> {
    if population.is_empty() {
        return Err(Error::Usage("clonal selection needs a non-empty population"));
    }
    let size = population.len();
    sort_by_affinity(&mut population);
    let selected = params.clone_count.min(size);
    let mut clones = Vec::new();
    'clone: for rank in 1..=selected {
        let sigma = params.sigma_for_rank(rank, selected);
        for _ in 0..params.clones_for_rank(rank) {
            let position: Vec<f64> = population[rank - 1]
                .position
                .iter()
                .map(|&x| {
                    let g: f64 = StandardNormal.sample(rng);
                    bounds.clamp(x + sigma * g)
                })
                .collect();
            let Some(affinity) = probe.probe(&position) else {
                break 'clone;
            };
            clones.push(Antibody { position, affinity });
        }
    }
    population.extend(clones);
    sort_by_affinity(&mut population);
    population.truncate(size);
    Ok(population)
}

/// Coordinate-wise direction/magnitude search from `start`, within
/// `eval_budget_per_cell` evaluations (the start point included).
pub fn directional_refine<F: Fitness + ?Sized>(
    start: &[f64],
    params: &RefinerParams,
    bounds: Interval,
    fitness: &mut F,
) -> Antibody {
    let mut budget = Budgeted::new(fitness, params.eval_budget_per_cell);
    match budget.probe(start) {
        Some(fit) => directional_refine_from(start, fit, params, bounds, &mut budget),
        None => Antibody {
            position: start.to_vec(),
            affinity: f64::NEG_INFINITY,
        },
    }
}

/// [`directional_refine`] from a point whose fitness is already known.
///
/// Every dimension starts with step `initial_step` and direction `+1`. Dimensions are
/// swept in ascending order: a probe that improves is accepted; otherwise the direction is
/// reversed and probed again; if that fails too the step shrinks. A dimension whose step
/// drops below `min_step` is done. The search ends when all dimensions are done or the
/// probe refuses.
pub fn directional_refine_from<P: Probe + ?Sized>(
    start: &[f64],
    start_fitness: f64,
    params: &RefinerParams,
    bounds: Interval,
    probe: &mut P,
) -> Antibody {
    let dims = start.len();
    let mut x = start.to_vec();
    let mut fit = start_fitness;
    let mut step = alloc::vec![params.initial_step; dims];
    let mut dir = alloc::vec![1.0f64; dims];

    'search: while step.iter().any(|&s| s >= params.min_step) {
        for d in 0..dims {
            if step[d] < params.min_step {
                continue;
            }
            let mut accepted = false;
            for attempt in 0..2 {
                let original = x[d];
                let candidate = bounds.clamp(original + dir[d] * step[d]);
                if candidate != original {
                    x[d] = candidate;
                    match probe.probe(&x) {
                        None => {
                            x[d] = original;
                            break 'search;
                        }
                        Some(f) if f > fit => {
                            fit = f;
                            accepted = true;
                        }
                        Some(_) => x[d] = original,
                    }
                }
                if accepted {
                    break;
                }
                if attempt == 0 {
                    dir[d] = -dir[d];
                }
            }
            if !accepted {
                step[d] *= params.step_shrink;
            }
        }
    }
    Antibody {
        position: x,
        affinity: fit,
    }
}

/// Number of cells to refine after a change and the budget of each. With a known change
/// period the total is capped at `change_budget_share` of it: fewer cells are refined,
/// and a single cell gets whatever the cap allows.
pub fn cell_allocation(params: &RefinerParams, change_period: Option<u64>) -> (usize, usize) {
    let per_cell = params.eval_budget_per_cell;
    let Some(period) = change_period else {
        return (params.max_cells_per_change, per_cell);
    };
    let total = (params.change_budget_share * period as f64) as usize;
    if per_cell == 0 || total >= per_cell {
        let cells = total.checked_div(per_cell).unwrap_or(params.max_cells_per_change);
        (cells.min(params.max_cells_per_change), per_cell)
    } else {
        (params.max_cells_per_change.min(1), total)
    }
}

/// Refines the best cell memories, best first.
///
/// Per cell: seed `population_size` antibodies (the memory plus Gaussian jitter of
/// `mutation_scale`), run one clonal-selection generation, then the coordinate search from
/// the best antibody. A better result replaces the cell memory and the memory of the group
/// that owned it. Cell count and per-cell spend come from [`cell_allocation`].
pub fn refine_cell_bests<F: Fitness + ?Sized>(
    state: &mut EngineState,
    fitness: &mut F,
) -> Vec<RefinedCell> {
    let params = state.refiner_params().clone();
    let bounds = state.grid().search_range;
    let mut targets: Vec<(usize, Vec<f64>, f64)> = state
        .cells()
        .iter()
        .filter(|(_, c)| c.has_memory())
        .map(|(id, c)| (*id, c.cbest_pos.clone(), c.cbest_fit))
        .collect();
    targets.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)));
    let (cells, per_cell) = cell_allocation(&params, state.change_period());
    targets.truncate(cells);

    let mut report = Vec::with_capacity(targets.len());
    for (cell_id, cbest, cbest_fit) in targets {
        let mut budget = Budgeted::new(&mut *fitness, per_cell);
        let rng = state.rng_mut();
        let mut population = alloc::vec![Antibody {
            position: cbest.clone(),
            affinity: cbest_fit,
        }];
        for _ in 1..params.population_size {
            let position: Vec<f64> = cbest
                .iter()
                .map(|&x| {
                    let g: f64 = StandardNormal.sample(&mut *rng);
                    bounds.clamp(x + params.mutation_scale * g)
                })
                .collect();
            let Some(affinity) = budget.probe(&position) else { break };
            population.push(Antibody { position, affinity });
        }
        let population = csa_step(population, &params, bounds, &mut budget, rng)
            .expect("population holds at least the cell memory");
        let best = &population[0];
        let refined =
            directional_refine_from(&best.position, best.affinity, &params, bounds, &mut budget);
        let improved = refined.affinity > cbest_fit;
        report.push(RefinedCell {
            cell: cell_id,
            evaluations: budget.used(),
            improved,
        });
        if improved {
            let group_ids = {
                let cell = state.cells_mut().get_mut(&cell_id).expect("target cell exists");
                cell.cbest_fit = refined.affinity;
                cell.cbest_pos.clone_from(&refined.position);
                cell.group_ids.clone()
            };
            if let Some(owner) = state
                .groups_mut()
                .iter_mut()
                .filter(|g| group_ids.contains(&g.id))
                .find(|g| g.sbest_fit == cbest_fit)
            {
                owner.sbest_fit = refined.affinity;
                owner.sbest_pos = refined.position;
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mpb::{Landscape, MpbParams, Peak};
    use crate::rng::{self, Stream};

    fn cone_1d(center: f64, height: f64, width: f64) -> Landscape {
        let params = MpbParams {
            dimensions: 1,
            ..MpbParams::default()
        };
        let peak = Peak {
            center: alloc::vec![center],
            height,
            width,
            last_shift: alloc::vec![0.0],
        };
        Landscape::from_peaks(params, alloc::vec![peak], 0).unwrap()
    }

    fn params() -> RefinerParams {
        RefinerParams {
            population_size: 5,
            clone_count: 5,
            mutation_scale: 1.0,
            initial_step: 8.0,
            min_step: 0.01,
            step_shrink: 0.5,
            eval_budget_per_cell: 100,
            max_cells_per_change: 10,
            change_budget_share: 0.4,
        }
    }

    const RANGE: Interval = Interval::new(0.0, 100.0);

    #[test]
    fn clone_counts_and_sigmas_follow_rank() {
        let p = params();
        let counts: Vec<usize> = (1..=5).map(|r| p.clones_for_rank(r)).collect();
        assert_eq!(counts, [5, 3, 2, 2, 1]);
        assert!(counts.windows(2).all(|w| w[0] >= w[1]));
        let sigmas: Vec<f64> = (1..=5).map(|r| p.sigma_for_rank(r, 5)).collect();
        assert!(sigmas.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(sigmas[4], 1.0);
    }

    #[test]
    fn apex_start_is_a_fixed_point() {
        let mut l = cone_1d(30.0, 50.0, 1.0);
        let r = directional_refine(&[30.0], &params(), RANGE, &mut l);
        assert_eq!(r.position, [30.0]);
        assert_eq!(r.affinity, 50.0);
    }

    #[test]
    fn climbs_a_one_dimensional_cone() {
        let mut l = cone_1d(30.0, 50.0, 1.0);
        let r = directional_refine(&[20.0], &params(), RANGE, &mut l);
        assert!((r.position[0] - 30.0).abs() <= 0.02, "{:?}", r.position);
        assert!(l.eval_count() <= 100);
    }

    #[test]
    fn zero_budget_returns_start() {
        let mut l = cone_1d(30.0, 50.0, 1.0);
        let p = RefinerParams {
            eval_budget_per_cell: 0,
            ..params()
        };
        let r = directional_refine(&[20.0], &p, RANGE, &mut l);
        assert_eq!(r.position, [20.0]);
        assert_eq!(l.eval_count(), 0);
    }

    #[test]
    fn csa_rejects_empty_population() {
        let mut l = cone_1d(30.0, 50.0, 1.0);
        let mut rng = rng::stream(1, Stream::Optimizer);
        let mut probe = crate::fitness::Unbounded(&mut l);
        let r = csa_step(Vec::new(), &params(), RANGE, &mut probe, &mut rng);
        assert!(matches!(r, Err(Error::Usage(_))));
    }

    #[test]
    fn csa_single_antibody_keeps_size_and_incumbent() {
        let mut l = cone_1d(30.0, 50.0, 1.0);
        let mut rng = rng::stream(2, Stream::Optimizer);
        let p = RefinerParams {
            clone_count: 1,
            ..params()
        };
        let start = Antibody {
            position: alloc::vec![25.0],
            affinity: 45.0,
        };
        let mut probe = crate::fitness::Unbounded(&mut l);
        let out = csa_step(alloc::vec![start], &p, RANGE, &mut probe, &mut rng).unwrap();
        assert_eq!(out.len(), 1);
        assert!(out[0].affinity >= 45.0);
        assert_eq!(l.eval_count(), 1);
    }

    #[test]
    fn csa_respects_probe_budget() {
        let mut l = cone_1d(30.0, 50.0, 1.0);
        let mut rng = rng::stream(3, Stream::Optimizer);
        let pop: Vec<Antibody> = [10.0, 20.0, 40.0]
            .iter()
            .map(|&x| Antibody {
                position: alloc::vec![x],
                affinity: 50.0 - (x - 30.0f64).abs(),
            })
            .collect();
        let mut budget = Budgeted::new(&mut l, 4);
        let out = csa_step(pop, &params(), RANGE, &mut budget, &mut rng).unwrap();
        assert_eq!(out.len(), 3);
        assert_eq!(l.eval_count(), 4);
    }
}
