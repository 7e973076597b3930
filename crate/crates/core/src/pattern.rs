//! Spatial and meso pattern detection.
//!
//! Passable tiles are partitioned into patterns in three passes:
//!
//! 1. Chambers: the largest all-passable rectangle with both sides at least
//!    3 that does not overlap an earlier chamber is claimed, repeatedly.
//!    Ties go to the topmost, then leftmost, then wider rectangle.
//! 2. Every leftover tile gets its horizontal and vertical run length among
//!    leftover tiles. Tiles on a run of 2+ in both directions are turns and
//!    become connectors (orthogonally touching turn tiles form one
//!    connector). Tiles on a run in one direction only are corridor tiles;
//!    consecutive corridor tiles on the same row (or column) form one
//!    corridor.
//! 3. Tiles with no leftover neighbour become a connector when they touch
//!    two or more distinct patterns, otherwise a single-tile "nothing".
//!
//! Meso patterns classify chambers by their content, see [`MesoRules`].

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::room::{Position, Room, TileKind};

/// Simple paths counted per door pair before the count saturates.
pub const MAX_PATHS_PER_PAIR: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PatternKind {
    Chamber,
    Corridor,
    Connector,
    Nothing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    Horizontal,
    Vertical,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpatialPattern {
    pub kind: PatternKind,
    /// Orientation of a corridor; `None` for other kinds.
    pub axis: Option<Axis>,
    /// Tiles in row-major order.
    pub tiles: Vec<Position>,
    /// Door tiles belonging to this pattern.
    pub doors: Vec<Position>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MesoKind {
    TreasureRoom,
    GuardRoom,
    Ambush,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MesoPattern {
    pub kind: MesoKind,
    /// Index of the chamber node in [`PatternGraph::nodes`].
    pub chamber: usize,
}

/// Thresholds for classifying chambers. The first matching rule wins.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MesoRules {
    /// A treasure room holds at least this many treasures and no enemies.
    pub treasure_room_min: usize,
    /// A guard room holds at least this many treasures and enemies each.
    pub guard_room_min: usize,
    /// An ambush has an enemy within this Manhattan distance of a door of
    /// the chamber and no treasure.
    pub ambush_radius: usize,
}

impl Default for MesoRules {
    fn default() -> Self {
        MesoRules {
            treasure_room_min: 2,
            guard_room_min: 1,
            ambush_radius: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternGraph {
    pub nodes: Vec<SpatialPattern>,
    /// Unordered adjacency, stored as `(low, high)` pairs in ascending order.
    pub edges: Vec<(usize, usize)>,
    pub meso: Vec<MesoPattern>,
    width: usize,
    height: usize,
    owner: Vec<Option<usize>>,
}

impl PatternGraph {
    pub fn node_of(&self, pos: Position) -> Option<usize> {
        self.owner
            .get(pos.row * self.width + pos.col)
            .copied()
            .flatten()
    }

    pub fn count(&self, kind: PatternKind) -> usize {
        self.nodes.iter().filter(|n| n.kind == kind).count()
    }

    pub fn tiles_of(&self, kind: PatternKind) -> usize {
        self.nodes
            .iter()
            .filter(|n| n.kind == kind)
            .map(|n| n.tiles.len())
            .sum()
    }

    pub fn neighbors(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter_map(move |&(a, b)| {
            if a == node {
                Some(b)
            } else if b == node {
                Some(a)
            } else {
                None
            }
        })
    }

    /// Nodes holding at least one door.
    pub fn door_nodes(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&i| !self.nodes[i].doors.is_empty())
            .collect()
    }

    /// Character overlay of the partition: `C` chamber, `-`/`|` corridor,
    /// `+` connector, `.` nothing and `#` wall.
    pub fn dump(&self) -> String {
        let mut out = String::with_capacity((self.width + 1) * self.height);
        for row in 0..self.height {
            for col in 0..self.width {
                let c = match self.node_of(Position::new(row, col)) {
                    None => '#',
                    Some(n) => match (self.nodes[n].kind, self.nodes[n].axis) {
                        (PatternKind::Chamber, _) => 'C',
                        (PatternKind::Corridor, Some(Axis::Vertical)) => '|',
                        (PatternKind::Corridor, _) => '-',
                        (PatternKind::Connector, _) => '+',
                        (PatternKind::Nothing, _) => '.',
                    },
                };
                out.push(c);
            }
            out.push('\n');
        }
        out
    }
}

/// Largest unclaimed all-passable rectangle with both sides >= 3, as
/// `(top, left, height, width)`.
fn best_rectangle(
    open: &[bool],
    width: usize,
    height: usize,
) -> Option<(usize, usize, usize, usize)> {
    // Prefix sums of open cells.
    let stride = width + 1;
    let mut sum = vec![0u32; stride * (height + 1)];
    for r in 0..height {
        for c in 0..width {
            sum[(r + 1) * stride + c + 1] = sum[r * stride + c + 1] + sum[(r + 1) * stride + c]
                - sum[r * stride + c]
                + open[r * width + c] as u32;
        }
    }
    let full = |top: usize, left: usize, h: usize, w: usize| {
        let s = sum[(top + h) * stride + left + w] + sum[top * stride + left]
            - sum[top * stride + left + w]
            - sum[(top + h) * stride + left];
        s as usize == h * w
    };

    let mut best: Option<(usize, usize, usize, usize)> = None;
    let better = |cand: (usize, usize, usize, usize), cur: Option<(usize, usize, usize, usize)>| {
        let Some(cur) = cur else { return true };
        let (ca, ba) = (cand.2 * cand.3, cur.2 * cur.3);
        // Area, then topmost, leftmost, wider.
        (
            ca,
            core::cmp::Reverse(cand.0),
            core::cmp::Reverse(cand.1),
            cand.3,
        ) > (
            ba,
            core::cmp::Reverse(cur.0),
            core::cmp::Reverse(cur.1),
            cur.3,
        )
    };
    for top in 0..height.saturating_sub(2) {
        for left in 0..width.saturating_sub(2) {
            for w in 3..=width - left {
                if !full(top, left, 3, w) {
                    break;
                }
                let mut h = 3;
                while top + h < height && full(top, left, h + 1, w) {
                    h += 1;
                }
                // Every height from 3 to h is valid; the tallest has the
                // largest area for this width and anchor.
                let cand = (top, left, h, w);
                if better(cand, best) {
                    best = Some(cand);
                }
            }
        }
    }
    best
}

/// Partitions the room's passable tiles into spatial patterns and builds
/// their adjacency graph. The result has no meso patterns yet.
pub fn detect_spatial_patterns(room: &Room) -> PatternGraph {
    let (width, height) = (room.width(), room.height());
    let n = width * height;
    let passable: Vec<bool> = room.tiles().iter().map(|t| t.is_passable()).collect();
    let mut owner: Vec<Option<usize>> = vec![None; n];
    let mut nodes: Vec<SpatialPattern> = Vec::new();

    let mut open = passable.clone();
    while let Some((top, left, h, w)) = best_rectangle(&open, width, height) {
        let id = nodes.len();
        let mut tiles = Vec::with_capacity(h * w);
        for r in top..top + h {
            for c in left..left + w {
                let i = r * width + c;
                open[i] = false;
                owner[i] = Some(id);
                tiles.push(Position::new(r, c));
            }
        }
        nodes.push(SpatialPattern {
            kind: PatternKind::Chamber,
            axis: None,
            tiles,
            doors: Vec::new(),
        });
    }

    // `open` now marks the leftover passable tiles.
    let run = |i: usize, dr: isize, dc: isize| -> usize {
        let (r0, c0) = ((i / width) as isize, (i % width) as isize);
        let mut len = 1;
        for sign in [-1isize, 1] {
            let (mut r, mut c) = (r0 + sign * dr, c0 + sign * dc);
            while r >= 0
                && c >= 0
                && (r as usize) < height
                && (c as usize) < width
                && open[r as usize * width + c as usize]
            {
                len += 1;
                r += sign * dr;
                c += sign * dc;
            }
        }
        len
    };

    #[derive(Clone, Copy, PartialEq, Eq)]
    enum Class {
        Turn,
        Horizontal,
        Vertical,
        Single,
    }
    let class: Vec<Option<Class>> = (0..n)
        .map(|i| {
            open[i].then(|| match (run(i, 0, 1) >= 2, run(i, 1, 0) >= 2) {
                (true, true) => Class::Turn,
                (true, false) => Class::Horizontal,
                (false, true) => Class::Vertical,
                (false, false) => Class::Single,
            })
        })
        .collect();

    // Turn tiles grouped by orthogonal contact, corridor tiles grouped along
    // their own axis. Groups are created in row-major order of their first
    // tile.
    for i in 0..n {
        let Some(cls) = class[i] else { continue };
        if owner[i].is_some() || cls == Class::Single {
            continue;
        }
        let id = nodes.len();
        let mut tiles = Vec::new();
        let mut stack = vec![i];
        owner[i] = Some(id);
        while let Some(j) = stack.pop() {
            let pos = room.position(j);
            tiles.push(pos);
            let candidates: Vec<Position> = match cls {
                Class::Turn => room.neighbors(pos).collect(),
                Class::Horizontal => [
                    (pos.col > 0).then(|| Position::new(pos.row, pos.col - 1)),
                    (pos.col + 1 < width).then(|| Position::new(pos.row, pos.col + 1)),
                ]
                .into_iter()
                .flatten()
                .collect(),
                Class::Vertical => [
                    (pos.row > 0).then(|| Position::new(pos.row - 1, pos.col)),
                    (pos.row + 1 < height).then(|| Position::new(pos.row + 1, pos.col)),
                ]
                .into_iter()
                .flatten()
                .collect(),
                Class::Single => Vec::new(),
            };
            for q in candidates {
                let k = room.index(q);
                if owner[k].is_none() && class[k] == Some(cls) {
                    owner[k] = Some(id);
                    stack.push(k);
                }
            }
        }
        tiles.sort();
        let (kind, axis) = match cls {
            Class::Turn => (PatternKind::Connector, None),
            Class::Horizontal => (PatternKind::Corridor, Some(Axis::Horizontal)),
            _ => (PatternKind::Corridor, Some(Axis::Vertical)),
        };
        nodes.push(SpatialPattern {
            kind,
            axis,
            tiles,
            doors: Vec::new(),
        });
    }

    // Single leftover tiles: decided against the patterns built so far.
    for i in 0..n {
        if class[i] != Some(Class::Single) {
            continue;
        }
        let pos = room.position(i);
        let touching: BTreeSet<usize> = room
            .neighbors(pos)
            .filter_map(|q| owner[room.index(q)])
            .filter(|&o| nodes[o].kind != PatternKind::Nothing)
            .collect();
        let kind = if touching.len() >= 2 {
            PatternKind::Connector
        } else {
            PatternKind::Nothing
        };
        owner[i] = Some(nodes.len());
        nodes.push(SpatialPattern {
            kind,
            axis: None,
            tiles: vec![pos],
            doors: Vec::new(),
        });
    }

    for &d in room.doors() {
        if let Some(o) = owner[room.index(d)] {
            nodes[o].doors.push(d);
        }
    }

    let mut edges = BTreeSet::new();
    for i in 0..n {
        let Some(a) = owner[i] else { continue };
        let pos = room.position(i);
        for q in room.neighbors(pos) {
            if let Some(b) = owner[room.index(q)] {
                if a != b {
                    edges.insert((a.min(b), a.max(b)));
                }
            }
        }
    }

    PatternGraph {
        nodes,
        edges: edges.into_iter().collect(),
        meso: Vec::new(),
        width,
        height,
        owner,
    }
}

/// Classifies every chamber of `graph` into at most one meso pattern.
pub fn detect_meso_patterns(
    room: &Room,
    mut graph: PatternGraph,
    rules: &MesoRules,
) -> PatternGraph {
    graph.meso.clear();
    for (idx, node) in graph.nodes.iter().enumerate() {
        if node.kind != PatternKind::Chamber {
            continue;
        }
        let count = |kind| node.tiles.iter().filter(|&&p| room.tile(p) == kind).count();
        let treasures = count(TileKind::Treasure);
        let enemies = count(TileKind::Enemy);
        let kind = if treasures >= rules.treasure_room_min && enemies == 0 {
            Some(MesoKind::TreasureRoom)
        } else if treasures >= rules.guard_room_min && enemies >= rules.guard_room_min {
            Some(MesoKind::GuardRoom)
        } else if treasures == 0
            && node.tiles.iter().any(|&e| {
                room.tile(e) == TileKind::Enemy
                    && node.doors.iter().any(|&d| {
                        e.row.abs_diff(d.row) + e.col.abs_diff(d.col) <= rules.ambush_radius
                    })
            })
        {
            Some(MesoKind::Ambush)
        } else {
            None
        };
        if let Some(kind) = kind {
            graph.meso.push(MesoPattern { kind, chamber: idx });
        }
    }
    graph
}

/// Spatial patterns plus meso patterns under the default rules.
pub fn analyze(room: &Room) -> PatternGraph {
    detect_meso_patterns(room, detect_spatial_patterns(room), &MesoRules::default())
}

/// Number of simple paths between every unordered pair of distinct
/// door-bearing nodes. Each pair saturates at [`MAX_PATHS_PER_PAIR`].
pub fn count_door_paths(graph: &PatternGraph) -> usize {
    let n = graph.nodes.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(a, b) in &graph.edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let doors = graph.door_nodes();
    let mut total = 0;
    for (k, &src) in doors.iter().enumerate() {
        for &dst in &doors[k + 1..] {
            total += count_simple_paths(&adj, src, dst, MAX_PATHS_PER_PAIR);
        }
    }
    total
}

fn count_simple_paths(adj: &[Vec<usize>], src: usize, dst: usize, cap: usize) -> usize {
    let mut on_path = vec![false; adj.len()];
    // Nodes that can still reach `dst`; anything else is never worth visiting.
    let reach = {
        let mut seen = vec![false; adj.len()];
        let mut stack = vec![dst];
        seen[dst] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    };
    if !reach[src] {
        return 0;
    }
    let mut found = 0;
    // Explicit stack of (node, next neighbour index).
    let mut stack: Vec<(usize, usize)> = vec![(src, 0)];
    on_path[src] = true;
    while let Some(top) = stack.last_mut() {
        let (v, i) = *top;
        if i == adj[v].len() {
            on_path[v] = false;
            stack.pop();
            continue;
        }
        top.1 += 1;
        let w = adj[v][i];
        if on_path[w] || !reach[w] {
            continue;
        }
        if w == dst {
            found += 1;
            if found >= cap {
                return cap;
            }
            continue;
        }
        on_path[w] = true;
        stack.push((w, 0));
    }
    found
}

#[cfg(test)]
mod tests {
    use super::*;

    fn room(s: &str) -> Room {
        Room::parse(s).unwrap()
    }

    fn check_partition(room: &Room, g: &PatternGraph) {
        let mut seen = vec![false; room.len()];
        for node in &g.nodes {
            for &t in &node.tiles {
                assert!(room.tile(t).is_passable());
                assert!(!seen[room.index(t)], "tile {t} in two patterns");
                seen[room.index(t)] = true;
            }
        }
        for p in room.positions() {
            assert_eq!(seen[room.index(p)], room.tile(p).is_passable());
        }
    }

    #[test]
    fn open_room_is_one_chamber() {
        let r = Room::new(3, 3).unwrap();
        let g = detect_spatial_patterns(&r);
        assert_eq!(g.nodes.len(), 1);
        assert_eq!(g.nodes[0].kind, PatternKind::Chamber);
        assert!(g.edges.is_empty());
        assert!(g.meso.is_empty());

        let big = detect_spatial_patterns(&Room::new(13, 7).unwrap());
        assert_eq!(big.nodes.len(), 1);
        assert_eq!(big.nodes[0].tiles.len(), 91);
    }

    #[test]
    fn walled_line_is_one_corridor() {
        let r = room("7 3\nwwwwwww\nwfffffw\nwwwwwww\n");
        let g = detect_spatial_patterns(&r);
        assert_eq!(g.nodes.len(), 1);
        assert_eq!(g.nodes[0].kind, PatternKind::Corridor);
        assert_eq!(g.nodes[0].tiles.len(), 5);
        assert_eq!(g.dump(), "#######\n#-----#\n#######\n");
    }

    #[test]
    fn chambers_joined_by_corridor() {
        let r = room("9 3\nfffwwwfff\nfffffffff\nfffwwwfff\n");
        let g = detect_spatial_patterns(&r);
        check_partition(&r, &g);
        // Hand partition: left 3x3 chamber, three corridor tiles, right 3x3.
        assert_eq!(g.dump(), "CCC###CCC\nCCC---CCC\nCCC###CCC\n");
        assert_eq!(g.nodes.len(), 3);
        assert_eq!(g.edges.len(), 2);
        let kinds: Vec<PatternKind> = g.nodes.iter().map(|n| n.kind).collect();
        assert_eq!(
            kinds,
            [
                PatternKind::Chamber,
                PatternKind::Chamber,
                PatternKind::Corridor
            ]
        );
        assert_eq!(g.edges, [(0, 2), (1, 2)]);
    }

    #[test]
    fn turns_and_singles() {
        // An L-shaped corridor, a dead-end nub and an isolated tile.
        let r = room("6 5\nwwwwww\nwfffww\nwwwfww\nwfwfwf\nwwwfff\n");
        let g = detect_spatial_patterns(&r);
        check_partition(&r, &g);
        assert_eq!(g.dump(), "######\n#--+##\n###|##\n#.#|#|\n###+-+\n");
    }

    #[test]
    fn single_between_patterns_is_connector() {
        // A lone tile bridging two chambers.
        let r = room("7 3\nfffwfff\nfffffff\nfffwfff\n");
        let g = detect_spatial_patterns(&r);
        assert_eq!(g.dump(), "CCC#CCC\nCCC+CCC\nCCC#CCC\n");
        assert_eq!(g.count(PatternKind::Connector), 1);
    }

    #[test]
    fn chamber_tie_breaks() {
        // The whole 4x3 area beats either 3x3 square inside it.
        let r = room("4 3\nffff\nffff\nffff\n");
        assert_eq!(detect_spatial_patterns(&r).nodes.len(), 1);

        // Two equal squares: the topmost one is claimed first.
        let r = room("7 6\nwwwwfff\nwwwwfff\nwwwwfff\nfffwwww\nfffwwww\nfffwwww\n");
        let g = detect_spatial_patterns(&r);
        assert_eq!(g.nodes[0].tiles[0], Position::new(0, 4));
        assert_eq!(g.nodes[1].tiles[0], Position::new(3, 0));

        // Same row: the leftmost one first.
        let r = room("7 3\nfffwfff\nfffwfff\nfffwfff\n");
        let g = detect_spatial_patterns(&r);
        assert_eq!(g.nodes[0].tiles[0], Position::new(0, 0));
        assert_eq!(g.nodes[1].tiles[0], Position::new(0, 4));
    }

    #[test]
    fn meso_rules() {
        let treasure = room("3 3\nftf\nfff\nftf\n");
        let g = analyze(&treasure);
        assert_eq!(
            g.meso,
            [MesoPattern {
                kind: MesoKind::TreasureRoom,
                chamber: 0
            }]
        );

        let guard = room("3 3\nftf\nfff\nfef\n");
        assert_eq!(analyze(&guard).meso[0].kind, MesoKind::GuardRoom);

        let ambush = room("3 3\nfdf\nfff\nfef\n");
        assert_eq!(analyze(&ambush).meso[0].kind, MesoKind::Ambush);

        let far = room("4 4\ndfff\nffff\nffff\nfffe\n");
        assert!(analyze(&far).meso.is_empty());

        let single_treasure = room("3 3\nftf\nfff\nfff\n");
        assert!(analyze(&single_treasure).meso.is_empty());
    }

    #[test]
    fn door_paths_single_chamber() {
        let r = room("5 3\ndfffd\nfffff\nfdfff\n");
        let g = analyze(&r);
        assert_eq!(g.door_nodes().len(), 1);
        assert_eq!(count_door_paths(&g), 0);
    }

    #[test]
    fn door_paths_on_path_graph() {
        let r = room("9 3\ndffwwwffd\nfffffffff\nfffwwwfff\n");
        let g = analyze(&r);
        assert_eq!(count_door_paths(&g), 1);
    }

    fn graph_from_edges(n: usize, edges: &[(usize, usize)], doors: &[usize]) -> PatternGraph {
        let nodes = (0..n)
            .map(|i| SpatialPattern {
                kind: PatternKind::Connector,
                axis: None,
                tiles: vec![Position::new(0, i)],
                doors: if doors.contains(&i) {
                    vec![Position::new(0, i)]
                } else {
                    Vec::new()
                },
            })
            .collect();
        PatternGraph {
            nodes,
            edges: edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect(),
            meso: Vec::new(),
            width: n,
            height: 1,
            owner: (0..n).map(Some).collect(),
        }
    }

    #[test]
    fn door_paths_on_cycle() {
        // 4-cycle 0-1-2-3-0 with doors on opposite nodes 0 and 2: two routes.
        let g = graph_from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)], &[0, 2]);
        assert_eq!(count_door_paths(&g), 2);
        // Adjacent door nodes on the same cycle: the direct edge and the
        // long way around.
        let g = graph_from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)], &[0, 1]);
        assert_eq!(count_door_paths(&g), 2);
    }

    #[test]
    fn door_paths_saturate() {
        // Complete graph on 9 nodes has far more than 1000 simple paths
        // between two nodes (sum over k of 7!/(7-k)! = 13700).
        let mut edges = Vec::new();
        for a in 0..9 {
            for b in a + 1..9 {
                edges.push((a, b));
            }
        }
        let g = graph_from_edges(9, &edges, &[0, 8]);
        assert_eq!(count_door_paths(&g), MAX_PATHS_PER_PAIR);
    }

    #[test]
    fn all_wall_room_is_empty_graph() {
        let r = Room::new(4, 4)
            .unwrap()
            .bucket_paint(Position::new(0, 0), TileKind::Wall)
            .unwrap();
        let g = analyze(&r);
        assert!(g.nodes.is_empty());
        assert_eq!(count_door_paths(&g), 0);
    }
}
