//! Genetic operators: mutation, two-point crossover and tournament selection.

use alloc::vec::Vec;

use rand::Rng;

use crate::room::{Room, TileKind};

use super::archive::{Archive, Individual, PopulationKind};
use super::EngineError;

/// Re-rolls every unlocked, non-door tile with probability `rate` to a
/// uniformly chosen paintable kind.
pub fn mutate<R: Rng + ?Sized>(room: &mut Room, rate: f64, rng: &mut R) {
    let locks: Vec<bool> = room.locks().to_vec();
    for (tile, locked) in room.tiles_mut().iter_mut().zip(locks) {
        if locked || *tile == TileKind::Door {
            continue;
        }
        if rng.random_bool(rate) {
            *tile = TileKind::PAINTABLE[rng.random_range(0..TileKind::PAINTABLE.len())];
        }
    }
}

/// Swaps the row-major tile segment `[lo, hi)` between two same-sized rooms.
pub fn crossover_at(a: &Room, b: &Room, lo: usize, hi: usize) -> (Room, Room) {
    assert_eq!(a.len(), b.len(), "crossover needs rooms of the same size");
    assert!(lo <= hi && hi <= a.len(), "crossover segment out of range");
    let mut x = a.clone();
    let mut y = b.clone();
    x.tiles_mut()[lo..hi].copy_from_slice(&b.tiles()[lo..hi]);
    y.tiles_mut()[lo..hi].copy_from_slice(&a.tiles()[lo..hi]);
    x.refresh_doors();
    y.refresh_doors();
    (x, y)
}

/// Two-point crossover with cut points `a < b` drawn uniformly over
/// `[0, len]`.
pub fn crossover<R: Rng + ?Sized>(a: &Room, b: &Room, rng: &mut R) -> (Room, Room) {
    let len = a.len();
    let lo = rng.random_range(0..len);
    let hi = rng.random_range(lo + 1..=len);
    crossover_at(a, b, lo, hi)
}

/// Index of the winner of a tournament among `size` members drawn with
/// replacement. Ties go to the member drawn first.
pub fn tournament<R: Rng + ?Sized>(pop: &[Individual], size: usize, rng: &mut R) -> usize {
    assert!(!pop.is_empty(), "tournament over an empty population");
    let mut best = rng.random_range(0..pop.len());
    for _ in 1..size.max(1) {
        let i = rng.random_range(0..pop.len());
        if pop[i].fitness > pop[best].fitness {
            best = i;
        }
    }
    best
}

/// Picks `count` parents of one population kind: each from a random cell
/// whose population of that kind is non-empty, through a tournament whose
/// size is drawn from `sizes`.
pub fn select_parents<R: Rng + ?Sized>(
    archive: &Archive,
    kind: PopulationKind,
    count: usize,
    sizes: (usize, usize),
    rng: &mut R,
) -> Vec<Individual> {
    let pools: Vec<&[Individual]> = archive
        .cells()
        .iter()
        .map(|c| c.population(kind))
        .filter(|p| !p.is_empty())
        .collect();
    if pools.is_empty() {
        return Vec::new();
    }
    (0..count)
        .map(|_| {
            let pool = pools[rng.random_range(0..pools.len())];
            let size = rng.random_range(sizes.0..=sizes.1);
            pool[tournament(pool, size, rng)].clone()
        })
        .collect()
}

/// Offspring genotypes from consecutive parent pairs; an odd last parent is
/// paired with the first. Every offspring may be mutated and is then forced
/// to match the target's doors and locked tiles.
pub fn breed<R: Rng + ?Sized>(
    parents: &[Individual],
    target: &Room,
    mutation_chance: f64,
    tile_rate: f64,
    rng: &mut R,
) -> Result<Vec<Room>, EngineError> {
    if parents.len() < 2 {
        return Err(EngineError::TooFewParents(parents.len()));
    }
    if parents.iter().any(|p| p.feasible != parents[0].feasible) {
        return Err(EngineError::MixedParents);
    }
    let mut out = Vec::with_capacity(parents.len() + 1);
    let mut i = 0;
    while i < parents.len() {
        let a = &parents[i].genotype;
        let b = &parents[(i + 1) % parents.len()].genotype;
        let (x, y) = crossover(a, b, rng);
        for mut child in [x, y] {
            if rng.random_bool(mutation_chance) {
                mutate(&mut child, tile_rate, rng);
            }
            child.conform_to(target);
            out.push(child);
        }
        i += 2;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::room::Position;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ind(room: Room, fitness: f64, feasible: bool) -> Individual {
        Individual {
            genotype: room,
            fitness,
            feasible,
            dims: alloc::vec![0.0],
        }
    }

    #[test]
    fn crossover_swaps_segment() {
        let a = Room::new(4, 3).unwrap();
        let b = a.bucket_paint(Position::new(0, 0), TileKind::Wall).unwrap();
        let (x, y) = crossover_at(&a, &b, 3, 7);
        for i in 0..12 {
            let inside = (3..7).contains(&i);
            let (ex, ey) = if inside {
                (TileKind::Wall, TileKind::Floor)
            } else {
                (TileKind::Floor, TileKind::Wall)
            };
            assert_eq!(x.tiles()[i], ex, "tile {i}");
            assert_eq!(y.tiles()[i], ey, "tile {i}");
        }
        let (x, y) = crossover_at(&a, &a, 0, 12);
        assert_eq!((x, y), (a.clone(), a));
    }

    #[test]
    fn mutation_skips_doors_and_locks() {
        let room = Room::parse("5 3\nwwdwW\nfFfff\nwwwwd\n").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let mut m = room.clone();
            mutate(&mut m, 1.0, &mut rng);
            assert_eq!(m.doors(), room.doors());
            assert_eq!(m.tile(Position::new(0, 4)), TileKind::Wall);
            assert_eq!(m.tile(Position::new(1, 1)), TileKind::Floor);
        }
        let mut same = room.clone();
        mutate(&mut same, 0.0, &mut rng);
        assert_eq!(same, room);
    }

    #[test]
    fn tournament_favors_best() {
        let pop: Vec<Individual> = (0..6)
            .map(|i| {
                let r = Room::new(3, 3)
                    .unwrap()
                    .paint_tiles(&[Position::new(1, i % 3)], TileKind::Enemy, false)
                    .unwrap();
                ind(r, [0.2, 0.9, 0.5, 0.1, 0.9, 0.3][i], true)
            })
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut wins = [0usize; 6];
        for _ in 0..10_000 {
            let size = rng.random_range(2..=5);
            wins[tournament(&pop, size, &mut rng)] += 1;
        }
        let top = wins[1].max(wins[4]);
        assert!(wins.iter().all(|&w| w <= top), "{wins:?}");
        assert!(wins[3] < wins[0]);
        assert_eq!(tournament(&pop[..1], 4, &mut rng), 0);
    }

    #[test]
    fn breed_contracts() {
        let target = Room::parse("3 3\nfdf\nfWf\nfff\n").unwrap();
        let a = ind(target.clone(), 0.5, true);
        let b = ind(target.clone(), 0.1, false);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(
            breed(&[a.clone(), b], &target, 0.3, 0.05, &mut rng),
            Err(EngineError::MixedParents)
        );
        assert_eq!(
            breed(std::slice::from_ref(&a), &target, 0.3, 0.05, &mut rng),
            Err(EngineError::TooFewParents(1))
        );
        let kids = breed(
            &[a.clone(), a.clone(), a.clone()],
            &target,
            0.0,
            0.05,
            &mut rng,
        )
        .unwrap();
        assert_eq!(kids.len(), 4);
        assert!(kids.iter().all(|k| *k == target));
    }
}
