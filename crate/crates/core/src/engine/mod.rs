//! The cellular multi-swarm engine.
//!
//! Particles live in the cells of a [`GridSpec`]. Inside each cell they are clustered into
//! groups; every group keeps a memory of its best position (sBest) and every cell keeps a
//! memory of the best position seen by its groups (cBest). One [`EngineState::step`]:
//!
//! 1. moves each active group's best member with the group-best rule, then the other
//!    members with the regular rule (one evaluation per particle, cut short when the
//!    fitness reports a change);
//! 2. refreshes group and cell memories;
//! 3. deactivates converged groups and scatters their members around the home cell;
//! 4. reassigns particles to cells and re-clusters every cell whose membership changed.
//!
//! The harness tells the engine about environment changes through
//! [`EngineState::handle_change`].

mod cluster;
pub mod update;

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;

use crate::error::Error;
use crate::fitness::Fitness;
use crate::grid::{CellIndex, GridSpec, Topology};
use crate::mpb::Interval;
use crate::refiner::{self, RefinerParams};
use crate::rng::Rng;
use crate::vector::{distance, norm};

pub use cluster::cluster_particles;
pub use update::Draws;

/// Swarm parameters.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct PsoParams {
    pub swarm_size: usize,
    pub c1: f64,
    pub c2: f64,
    /// Weight of the repulsion from other groups' memory.
    pub c3: f64,
    /// Inertia is drawn uniformly from this range for every particle update.
    pub w_range: Interval,
    pub cluster_radius: f64,
    /// Two memories closer than this are taken to sit on the same optimum; the worse one
    /// is dropped.
    pub exclusion_radius: f64,
    /// Most memories kept in cells that no group occupies.
    pub memory_capacity: usize,
    pub convergence_radius: f64,
    /// Per-dimension velocity clamp.
    pub vmax: f64,
}

impl Default for PsoParams {
    fn default() -> Self {
        PsoParams::for_grid(&GridSpec::default())
    }
}

impl PsoParams {
    /// Defaults scaled to `grid`: clustering radius of half a cell, exclusion radius of
    /// one and a half cells, convergence radius of 1e-3 of the range, velocity clamp of
    /// half the range.
    pub fn for_grid(grid: &GridSpec) -> Self {
        let range = grid.search_range.width();
        PsoParams {
            swarm_size: 40,
            c1: 1.496180,
            c2: 1.496180,
            c3: 1.496180,
            w_range: Interval::new(0.4, 0.9),
            cluster_radius: grid.cell_width() / 2.0,
            exclusion_radius: 1.5 * grid.cell_width(),
            memory_capacity: 20,
            convergence_radius: 1e-3 * range,
            vmax: range / 2.0,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.swarm_size < 1 {
            return Err(Error::config("pso.swarm_size", "must be at least 1"));
        }
        for (field, c) in [("pso.c1", self.c1), ("pso.c2", self.c2), ("pso.c3", self.c3)] {
            if !(c > 0.0) {
                return Err(Error::config(field, "must be positive"));
            }
        }
        let w = self.w_range;
        if !(0.0 <= w.min && w.min <= w.max && w.max < 1.0) {
            return Err(Error::config("pso.w_range", "must satisfy 0 <= min <= max < 1"));
        }
        if !(self.cluster_radius >= 0.0) {
            return Err(Error::config("pso.cluster_radius", "must be non-negative"));
        }
        if !(self.exclusion_radius >= 0.0) {
            return Err(Error::config("pso.exclusion_radius", "must be non-negative"));
        }
        if self.memory_capacity < 1 {
            return Err(Error::config("pso.memory_capacity", "must be at least 1"));
        }
        if !(self.convergence_radius >= 0.0) {
            return Err(Error::config("pso.convergence_radius", "must be non-negative"));
        }
        if !(self.vmax > 0.0) {
            return Err(Error::config("pso.vmax", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub id: usize,
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub pbest_pos: Vec<f64>,
    /// `-inf` until the particle has been evaluated since it was last (re)placed.
    pub pbest_fit: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Group {
    pub id: u64,
    /// Linear index of the home cell.
    pub cell: usize,
    /// Particle ids in ascending order; the first is the clustering leader.
    pub members: Vec<usize>,
    pub sbest_pos: Vec<f64>,
    pub sbest_fit: f64,
    pub active: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub index: CellIndex,
    pub group_ids: Vec<u64>,
    pub cbest_pos: Vec<f64>,
    /// `-inf` while the cell has no memory.
    pub cbest_fit: f64,
    /// Set when a converged group left its memory here; such a memory outlives the
    /// cell's groups.
    pub retained: bool,
}

impl Cell {
    pub fn has_memory(&self) -> bool {
        self.cbest_fit > f64::NEG_INFINITY
    }
}

/// What one `handle_change` spent.
#[derive(Debug, Clone, PartialEq)]
pub struct ChangeReport {
    /// Memories and personal bests evaluated again.
    pub reevaluations: usize,
    pub refined: Vec<RefinedCell>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinedCell {
    pub cell: usize,
    pub evaluations: usize,
    pub improved: bool,
}

#[derive(Clone, Copy)]
enum Memory {
    Cell(usize),
    Particle(usize),
}

/// Complete optimizer state for one run.
#[derive(Debug, Clone)]
pub struct EngineState {
    params: PsoParams,
    refiner: RefinerParams,
    grid: GridSpec,
    particles: Vec<Particle>,
    groups: Vec<Group>,
    cells: BTreeMap<usize, Cell>,
    /// Linear cell index of every particle at the last clustering.
    placement: Vec<usize>,
    next_group_id: u64,
    /// Neighborhood offsets of the grid topology, without the zero offset.
    offsets: Vec<Vec<isize>>,
    /// Evaluations between environment changes, when known.
    change_period: Option<u64>,
    rng: Rng,
}

/// Cell coordinates and memory positions of the cells holding a memory, flattened.
struct MemorySnapshot {
    coords: Vec<usize>,
    positions: Vec<f64>,
}

impl EngineState {
    /// Places `swarm_size` particles uniformly in the search box, evaluates them and
    /// forms the initial groups.
    pub fn new<F: Fitness + ?Sized>(
        params: PsoParams,
        refiner: RefinerParams,
        grid: GridSpec,
        fitness: &mut F,
        mut rng: Rng,
    ) -> Result<Self, Error> {
        params.validate()?;
        refiner.validate()?;
        if fitness.dimensions() != grid.dimensions {
            return Err(Error::Usage("landscape and grid dimensions differ"));
        }
        let a = grid.search_range;
        let dims = grid.dimensions;
        let particles = (0..params.swarm_size)
            .map(|id| {
                let position: Vec<f64> = (0..dims).map(|_| rng.random_range(a.min..=a.max)).collect();
                let fit = fitness.evaluate(&position);
                Particle {
                    id,
                    velocity: vec![0.0; dims],
                    pbest_pos: position.clone(),
                    pbest_fit: fit,
                    position,
                }
            })
            .collect();
        let mut state = EngineState {
            params,
            refiner,
            grid,
            particles,
            groups: Vec::new(),
            cells: BTreeMap::new(),
            placement: Vec::new(),
            next_group_id: 0,
            offsets: Vec::new(),
            change_period: None,
            rng,
        };
        state.offsets = state.grid.neighbor_offsets();
        state.reassign();
        state.refresh_memories();
        Ok(state)
    }

    /// Tells the engine how many evaluations separate two changes, which bounds the
    /// refinement spent per change (see [`RefinerParams::change_budget_share`]).
    pub fn set_change_period(&mut self, evaluations: u64) {
        self.change_period = Some(evaluations);
    }

    pub fn change_period(&self) -> Option<u64> {
        self.change_period
    }

    pub fn params(&self) -> &PsoParams {
        &self.params
    }

    pub fn refiner_params(&self) -> &RefinerParams {
        &self.refiner
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    /// Cells that currently hold groups or memory, keyed by linear index.
    pub fn cells(&self) -> &BTreeMap<usize, Cell> {
        &self.cells
    }

    /// Best fitness over all current particle, group and cell memories.
    pub fn best_known(&self) -> Option<(&[f64], f64)> {
        let particles = self.particles.iter().map(|p| (&p.pbest_pos, p.pbest_fit));
        let groups = self.groups.iter().map(|g| (&g.sbest_pos, g.sbest_fit));
        let cells = self.cells.values().map(|c| (&c.cbest_pos, c.cbest_fit));
        particles
            .chain(groups)
            .chain(cells)
            .filter(|(_, fit)| *fit > f64::NEG_INFINITY)
            .fold(None, |best: Option<(&Vec<f64>, f64)>, (pos, fit)| match best {
                Some((_, b)) if b >= fit => best,
                _ => Some((pos, fit)),
            })
            .map(|(pos, fit)| (pos.as_slice(), fit))
    }

    /// Checks the structure that holds after every step and every change: each particle
    /// belongs to exactly one active group, each group lives in the cell that contains all
    /// of its members and is listed there, and memories dominate (cell over group over
    /// member).
    pub fn check_invariants(&self) -> Result<(), Error> {
        let mut owner = alloc::vec![None; self.particles.len()];
        for g in &self.groups {
            if !g.active || g.members.is_empty() {
                return Err(Error::Consistency("inactive or empty group after a step"));
            }
            let cell = self
                .cells
                .get(&g.cell)
                .ok_or(Error::Consistency("group points at a missing cell"))?;
            if !cell.group_ids.contains(&g.id) {
                return Err(Error::Consistency("cell does not list its resident group"));
            }
            if g.sbest_fit > cell.cbest_fit {
                return Err(Error::Consistency("group memory beats its cell memory"));
            }
            for &id in &g.members {
                let slot = owner
                    .get_mut(id)
                    .ok_or(Error::Consistency("group member id out of range"))?;
                if slot.replace(g.id).is_some() {
                    return Err(Error::Consistency("particle belongs to two groups"));
                }
                let p = &self.particles[id];
                if self.grid.linear_of(&p.position)? != g.cell {
                    return Err(Error::Consistency("member lies outside its group's cell"));
                }
                if p.pbest_fit > g.sbest_fit {
                    return Err(Error::Consistency("personal best beats its group memory"));
                }
            }
        }
        if owner.iter().any(Option::is_none) {
            return Err(Error::Consistency("particle without a group"));
        }
        for (&id, cell) in &self.cells {
            for gid in &cell.group_ids {
                if !self.groups.iter().any(|g| g.id == *gid && g.cell == id) {
                    return Err(Error::Consistency("cell lists a group that lives elsewhere"));
                }
            }
            if cell.group_ids.is_empty() && !cell.retained {
                return Err(Error::Consistency("empty cell kept without a retained memory"));
            }
        }
        Ok(())
    }

    /// One full iteration.
    /// Returns the ids of particles freed from deactivated groups.
    pub fn step<F: Fitness + ?Sized>(&mut self, fitness: &mut F) -> Vec<usize> {
        self.move_particles(fitness);
        self.refresh_memories();
        let freed = self.deactivate_converged();
        self.reassign();
        self.refresh_memories();
        freed
    }

    fn move_particles<F: Fitness + ?Sized>(&mut self, fitness: &mut F) {
        let coeffs = (self.params.c1, self.params.c2, self.params.c3);
        let range = self.grid.search_range;
        let vmax = self.params.vmax;
        let memories = self.memories_best_first();
        for gi in 0..self.groups.len() {
            if !self.groups[gi].active {
                continue;
            }
            let leader = self.best_member(gi);
            let cell_id = self.groups[gi].cell;
            let other = self.other_groups_best(gi);
            let cbest = self.best_near(&memories, cell_id);

            let draws = Draws::sample(&mut self.rng, self.params.w_range);
            let p = &mut self.particles[leader];
            update::group_best_velocity(
                &mut p.velocity,
                &p.position,
                &p.pbest_pos,
                cbest.as_deref(),
                other.as_deref(),
                coeffs,
                &draws,
            );
            update::advance(&mut p.position, &mut p.velocity, vmax, range);
            Self::evaluate_particle(p, fitness);
            if fitness.change_pending() {
                return;
            }

            let group = &self.groups[gi];
            for &id in &group.members {
                if id == leader {
                    continue;
                }
                let draws = Draws::sample(&mut self.rng, self.params.w_range);
                let p = &mut self.particles[id];
                let sbest = if group.sbest_fit > f64::NEG_INFINITY {
                    &group.sbest_pos
                } else {
                    &p.position.clone()
                };
                update::regular_velocity(
                    &mut p.velocity,
                    &p.position,
                    &p.pbest_pos,
                    sbest,
                    (coeffs.0, coeffs.1),
                    &draws,
                );
                update::advance(&mut p.position, &mut p.velocity, vmax, range);
                Self::evaluate_particle(p, fitness);
                if fitness.change_pending() {
                    return;
                }
            }
        }
    }

    fn evaluate_particle<F: Fitness + ?Sized>(p: &mut Particle, fitness: &mut F) {
        let fit = fitness.evaluate(&p.position);
        if fit > p.pbest_fit {
            p.pbest_fit = fit;
            p.pbest_pos.clone_from(&p.position);
        }
    }

    /// Member with the highest personal best; ties go to the lowest id.
    pub(crate) fn best_member(&self, gi: usize) -> usize {
        let members = &self.groups[gi].members;
        let mut best = members[0];
        for &id in &members[1..] {
            if self.particles[id].pbest_fit > self.particles[best].pbest_fit {
                best = id;
            }
        }
        best
    }

    /// Best group memory among the other active groups of `gi`'s cell.
    fn other_groups_best(&self, gi: usize) -> Option<Vec<f64>> {
        let group = &self.groups[gi];
        let mut best: Option<&Group> = None;
        for gid in &self.cells[&group.cell].group_ids {
            if *gid == group.id {
                continue;
            }
            let Some(other) = self.group_by_id(*gid) else { continue };
            if other.active
                && other.sbest_fit > f64::NEG_INFINITY
                && best.is_none_or(|b| other.sbest_fit > b.sbest_fit)
            {
                best = Some(other);
            }
        }
        best.map(|g| g.sbest_pos.clone())
    }

    /// Best cell memory in the neighborhood of `cell_id`, the cell itself included.
    pub fn neighborhood_best(&self, cell_id: usize) -> Option<Vec<f64>> {
        self.best_near(&self.memories_best_first(), cell_id)
    }

    /// Snapshot of the cell memories, best first.
    fn memories_best_first(&self) -> MemorySnapshot {
        let mut order: Vec<(f64, usize)> = self
            .cells
            .iter()
            .filter(|(_, c)| c.has_memory())
            .map(|(id, c)| (c.cbest_fit, *id))
            .collect();
        order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut snapshot = MemorySnapshot {
            coords: Vec::with_capacity(order.len() * self.grid.dimensions),
            positions: Vec::with_capacity(order.len() * self.grid.dimensions),
        };
        for (_, id) in order {
            let cell = &self.cells[&id];
            snapshot.coords.extend_from_slice(&cell.index.coords);
            snapshot.positions.extend_from_slice(&cell.cbest_pos);
        }
        snapshot
    }

    fn best_near(&self, memories: &MemorySnapshot, cell_id: usize) -> Option<Vec<f64>> {
        let home = &self.cells[&cell_id].index.coords;
        let r = self.grid.radius;
        let dims = self.grid.dimensions;
        memories
            .coords
            .chunks_exact(dims)
            .zip(memories.positions.chunks_exact(dims))
            .find_map(|(coords, pos)| {
                let offsets = home.iter().zip(coords).map(|(a, b)| a.abs_diff(*b));
                let near = match self.grid.topology {
                    Topology::Moore => offsets.max().unwrap_or(0) <= r,
                    Topology::VonNeumann => offsets.sum::<usize>() <= r,
                };
                near.then(|| pos.to_vec())
            })
    }

    fn group_by_id(&self, id: u64) -> Option<&Group> {
        self.groups.iter().find(|g| g.id == id)
    }

    /// Raises group memories to their best member and cell memories to their best group.
    /// Memories are never lowered here.
    pub fn refresh_memories(&mut self) {
        for gi in 0..self.groups.len() {
            let best = self.best_member(gi);
            let p = &self.particles[best];
            let g = &mut self.groups[gi];
            if p.pbest_fit > g.sbest_fit {
                g.sbest_fit = p.pbest_fit;
                g.sbest_pos.clone_from(&p.pbest_pos);
            }
        }
        for g in &self.groups {
            let cell = self.cells.get_mut(&g.cell).expect("group without cell");
            if g.sbest_fit > cell.cbest_fit {
                cell.cbest_fit = g.sbest_fit;
                cell.cbest_pos.clone_from(&g.sbest_pos);
            }
        }
    }

    /// Deactivates every group whose members all lie within the convergence radius of its
    /// memory, and relocates those members uniformly over the home cell and its
    /// neighborhood. Returns the freed particle ids.
    pub fn deactivate_converged(&mut self) -> Vec<usize> {
        let radius = self.params.convergence_radius;
        let mut freed = Vec::new();
        let mut retained = self.retained_ids();
        for gi in 0..self.groups.len() {
            let g = &self.groups[gi];
            if !g.active || g.sbest_fit == f64::NEG_INFINITY {
                continue;
            }
            let converged = g.members.iter().all(|&id| {
                let p = &self.particles[id];
                distance(&p.position, &g.sbest_pos) <= radius && norm(&p.velocity) <= radius
            });
            if converged {
                let cell = g.cell;
                self.offer_memory(cell, &mut retained);
            } else if !self.shadowed_by_retained(gi, &retained) {
                continue;
            }
            let home = self.grid.from_linear(self.groups[gi].cell);
            let members = core::mem::take(&mut self.groups[gi].members);
            self.groups[gi].active = false;
            for id in members {
                self.relocate(id, &home);
                freed.push(id);
            }
        }
        freed
    }

    /// True if a better retained memory of another cell lies within the exclusion radius
    /// of the group's memory: the group is chasing an optimum that is already tracked.
    fn shadowed_by_retained(&self, gi: usize, retained: &[(usize, f64)]) -> bool {
        let g = &self.groups[gi];
        retained.iter().any(|&(id, fit)| {
            id != g.cell
                && fit > g.sbest_fit
                && distance(&self.cells[&id].cbest_pos, &g.sbest_pos) <= self.params.exclusion_radius
        })
    }

    /// Retained cells with their memory fitness.
    fn retained_ids(&self) -> Vec<(usize, f64)> {
        self.cells
            .iter()
            .filter(|(_, c)| c.retained)
            .map(|(id, c)| (*id, c.cbest_fit))
            .collect()
    }

    /// Offers the memory of `cell_id` to the set of retained memories, which holds at most
    /// `memory_capacity` memories no two of which lie within the exclusion radius. The
    /// memory is kept if it beats every retained memory near it and, when the set is full,
    /// the worst one. Retained memories it displaces are forgotten.
    ///
    /// `retained` lists the retained cells and is kept up to date.
    fn offer_memory(&mut self, cell_id: usize, retained: &mut Vec<(usize, f64)>) {
        let Some(offer) = self.cells.get(&cell_id) else { return };
        if !offer.has_memory() || offer.retained {
            return;
        }
        let fit = offer.cbest_fit;
        let full = retained.len() >= self.params.memory_capacity;
        let worst = retained
            .iter()
            .copied()
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        // a memory no better than the worst of a full set can never get in
        if full && worst.is_some_and(|(_, w)| w >= fit) {
            return;
        }
        let radius = self.params.exclusion_radius;
        let mut near = Vec::new();
        for &(id, f) in retained.iter() {
            if distance(&self.cells[&id].cbest_pos, &offer.cbest_pos) <= radius {
                if f >= fit {
                    return;
                }
                near.push(id);
            }
        }
        if near.is_empty() && full {
            near.extend(worst.map(|(id, _)| id));
        }
        retained.retain(|(id, _)| !near.contains(id));
        for id in near {
            self.forget_memory(id);
        }
        if let Some(cell) = self.cells.get_mut(&cell_id) {
            cell.retained = true;
            retained.push((cell_id, fit));
        }
    }

    fn forget_memory(&mut self, cell_id: usize) {
        let Some(cell) = self.cells.get_mut(&cell_id) else { return };
        cell.retained = false;
        if cell.group_ids.is_empty() {
            self.cells.remove(&cell_id);
        }
    }

    /// Places particle `id` uniformly over `home` and its neighborhood with zero velocity
    /// and no personal best.
    fn relocate(&mut self, id: usize, home: &CellIndex) {
        let k = self.grid.divisions as isize;
        let pick = loop {
            // the extra slot stands for the home cell itself
            let pick = self.rng.random_range(0..=self.offsets.len());
            let inside = self.offsets.get(pick).is_none_or(|offset| {
                home.coords
                    .iter()
                    .zip(offset)
                    .all(|(&c, &o)| (0..k).contains(&(c as isize + o)))
            });
            if inside {
                break pick;
            }
        };
        let p = &mut self.particles[id];
        for d in 0..home.coords.len() {
            let shift = self.offsets.get(pick).map_or(0, |o| o[d]);
            let (lo, hi) = self.grid.slab(home.coords[d].wrapping_add_signed(shift));
            p.position[d] = self.rng.random_range(lo..=hi);
            p.velocity[d] = 0.0;
        }
        p.pbest_pos.clone_from(&p.position);
        p.pbest_fit = f64::NEG_INFINITY;
    }

    /// Maps particles to cells and re-clusters every cell whose membership changed.
    /// Inactive groups are dropped; cell memories persist.
    fn reassign(&mut self) {
        let placement: Vec<usize> = self
            .particles
            .iter()
            .map(|p| {
                self.grid
                    .linear_of(&p.position)
                    .expect("particle positions are clamped to the search range")
            })
            .collect();
        // a cell changes when a particle enters or leaves it
        let mut changed: Vec<usize> = if self.placement.len() == placement.len() {
            self.placement
                .iter()
                .zip(&placement)
                .filter(|(before, now)| before != now)
                .flat_map(|(&before, &now)| [before, now])
                .collect()
        } else {
            placement.clone()
        };
        changed.extend(self.groups.iter().filter(|g| !g.active).map(|g| g.cell));
        changed.sort_unstable();
        changed.dedup();

        self.groups
            .retain(|g| g.active && !changed.binary_search(&g.cell).is_ok());
        let mut members_of: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (id, cell) in placement.iter().enumerate() {
            if changed.binary_search(cell).is_ok() {
                members_of.entry(*cell).or_default().push(id);
            }
        }
        for &cell_id in &changed {
            let Some(members) = members_of.get(&cell_id) else {
                if let Some(cell) = self.cells.get_mut(&cell_id) {
                    cell.group_ids.clear();
                }
                continue;
            };
            let grid = &self.grid;
            let cell = self.cells.entry(cell_id).or_insert_with(|| Cell {
                index: grid.from_linear(cell_id),
                group_ids: Vec::new(),
                cbest_pos: Vec::new(),
                cbest_fit: f64::NEG_INFINITY,
                retained: false,
            });
            cell.group_ids.clear();
            let points: Vec<&[f64]> = members
                .iter()
                .map(|&id| self.particles[id].position.as_slice())
                .collect();
            for cluster in cluster_particles(&points, self.params.cluster_radius) {
                let ids: Vec<usize> = cluster.into_iter().map(|i| members[i]).collect();
                let best = ids
                    .iter()
                    .copied()
                    .fold(ids[0], |b, id| {
                        if self.particles[id].pbest_fit > self.particles[b].pbest_fit {
                            id
                        } else {
                            b
                        }
                    });
                let group = Group {
                    id: self.next_group_id,
                    cell: cell_id,
                    sbest_pos: self.particles[best].pbest_pos.clone(),
                    sbest_fit: self.particles[best].pbest_fit,
                    members: ids,
                    active: true,
                };
                self.next_group_id += 1;
                cell.group_ids.push(group.id);
                self.groups.push(group);
            }
        }
        self.groups.sort_by_key(|g| (g.cell, g.id));
        let vacated: Vec<usize> = self
            .cells
            .iter()
            .filter(|(_, c)| !c.retained && c.group_ids.is_empty() && c.has_memory())
            .map(|(id, _)| *id)
            .collect();
        if !vacated.is_empty() {
            let mut retained = self.retained_ids();
            for id in vacated {
                self.offer_memory(id, &mut retained);
            }
        }
        self.cells.retain(|_, c| c.retained || !c.group_ids.is_empty());
        self.placement = placement;
    }

    /// Re-evaluates every memory under the new environment, refines the best cell
    /// memories and drops retained memories that duplicate a better one.
    ///
    /// Cell memories and personal bests keep their positions and get fresh fitness
    /// values; group memories restart from their members.
    pub fn handle_change<F: Fitness + ?Sized>(&mut self, fitness: &mut F) -> ChangeReport {
        self.prune_duplicate_memories();
        self.forget_surplus_memories();
        // best first, so the best known solution is back on record after one evaluation
        let mut stale: Vec<(f64, Memory)> = self
            .cells
            .iter()
            .filter(|(_, c)| c.has_memory())
            .map(|(&id, c)| (c.cbest_fit, Memory::Cell(id)))
            .chain(
                self.particles
                    .iter()
                    .filter(|p| p.pbest_fit > f64::NEG_INFINITY)
                    .map(|p| (p.pbest_fit, Memory::Particle(p.id))),
            )
            .collect();
        stale.sort_by(|a, b| b.0.total_cmp(&a.0));
        let reevaluations = stale.len();
        for (_, memory) in stale {
            match memory {
                Memory::Cell(id) => {
                    let c = self.cells.get_mut(&id).expect("listed cell exists");
                    c.cbest_fit = fitness.evaluate(&c.cbest_pos);
                }
                Memory::Particle(id) => {
                    let p = &mut self.particles[id];
                    p.pbest_fit = fitness.evaluate(&p.pbest_pos);
                }
            }
        }
        for g in &mut self.groups {
            g.sbest_fit = f64::NEG_INFINITY;
        }
        self.refresh_memories();
        let refined = refiner::refine_cell_bests(self, fitness);
        self.prune_duplicate_memories();
        ChangeReport {
            reevaluations,
            refined,
        }
    }

    /// Keeps only the best `max_cells_per_change` memories of unoccupied cells, ranked by
    /// their pre-change fitness.
    fn forget_surplus_memories(&mut self) {
        let mut unoccupied: Vec<(usize, f64)> = self
            .cells
            .iter()
            .filter(|(_, c)| c.group_ids.is_empty())
            .map(|(id, c)| (*id, c.cbest_fit))
            .collect();
        unoccupied.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        for (id, _) in unoccupied.into_iter().skip(self.refiner.max_cells_per_change) {
            self.cells.remove(&id);
        }
    }

    /// Removes memories of unoccupied cells that lie within the exclusion radius of a
    /// better memory.
    fn prune_duplicate_memories(&mut self) {
        let mut order: Vec<(usize, f64)> = self
            .cells
            .iter()
            .filter(|(_, c)| c.has_memory())
            .map(|(id, c)| (*id, c.cbest_fit))
            .collect();
        order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let mut kept: Vec<usize> = Vec::new();
        let mut dropped = Vec::new();
        for (id, _) in order {
            let cell = &self.cells[&id];
            let duplicate = kept.iter().any(|k| {
                distance(&self.cells[k].cbest_pos, &cell.cbest_pos) <= self.params.exclusion_radius
            });
            if duplicate && cell.group_ids.is_empty() {
                dropped.push(id);
            } else {
                kept.push(id);
            }
        }
        for id in dropped {
            self.cells.remove(&id);
        }
    }

    pub(crate) fn cells_mut(&mut self) -> &mut BTreeMap<usize, Cell> {
        &mut self.cells
    }

    pub(crate) fn groups_mut(&mut self) -> &mut Vec<Group> {
        &mut self.groups
    }

    pub(crate) fn rng_mut(&mut self) -> &mut Rng {
        &mut self.rng
    }
}
