use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::room::Position;

/// Orthogonal neighbours in row-major order (up, left, right, down).
pub(crate) fn neighbors(
    pos: Position,
    width: usize,
    height: usize,
) -> impl Iterator<Item = Position> {
    let Position { row, col } = pos;
    let up = (row > 0).then(|| Position::new(row - 1, col));
    let left = (col > 0).then(|| Position::new(row, col - 1));
    let right = (col + 1 < width).then(|| Position::new(row, col + 1));
    let down = (row + 1 < height).then(|| Position::new(row + 1, col));
    [up, left, right, down].into_iter().flatten()
}

/// Breadth-first flood from `seeds` over cells accepted by `open`.
/// Returns a row-major membership mask. Seeds that are not open are ignored.
pub(crate) fn flood<I, F>(width: usize, height: usize, seeds: I, open: F) -> Vec<bool>
where
    I: IntoIterator<Item = Position>,
    F: Fn(Position) -> bool,
{
    let mut seen = vec![false; width * height];
    let mut queue = VecDeque::new();
    for s in seeds {
        let i = s.row * width + s.col;
        if !seen[i] && open(s) {
            seen[i] = true;
            queue.push_back(s);
        }
    }
    while let Some(p) = queue.pop_front() {
        for n in neighbors(p, width, height) {
            let i = n.row * width + n.col;
            if !seen[i] && open(n) {
                seen[i] = true;
                queue.push_back(n);
            }
        }
    }
    seen
}

/// Labels the orthogonally connected components of open cells.
/// Components are numbered in row-major order of their first cell.
pub(crate) fn components<F>(width: usize, height: usize, open: F) -> (Vec<Option<usize>>, usize)
where
    F: Fn(Position) -> bool,
{
    let mut label = vec![None; width * height];
    let mut count = 0;
    for i in 0..width * height {
        let start = Position::new(i / width, i % width);
        if label[i].is_some() || !open(start) {
            continue;
        }
        label[i] = Some(count);
        let mut queue = VecDeque::from([start]);
        while let Some(p) = queue.pop_front() {
            for n in neighbors(p, width, height) {
                let j = n.row * width + n.col;
                if label[j].is_none() && open(n) {
                    label[j] = Some(count);
                    queue.push_back(n);
                }
            }
        }
        count += 1;
    }
    (label, count)
}
