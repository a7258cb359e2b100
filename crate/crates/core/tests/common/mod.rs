//! Test-only oracles. Nothing here calls into the simulator's move
//! enumeration or softmax code; geometry and transition probabilities are
//! rebuilt from first principles.

#![allow(dead_code)]

use std::collections::HashMap;

/// Room with a `width`-cell exit centered in the bottom wall (row -1).
#[derive(Debug, Clone, Copy)]
pub struct OracleRoom {
    pub size: i32,
    pub exit_lo: i32,
    pub exit_hi: i32,
}

impl OracleRoom {
    pub fn new(size: i32, width: i32) -> Self {
        let exit_lo = (size - width) / 2;
        Self {
            size,
            exit_lo,
            exit_hi: exit_lo + width - 1,
        }
    }

    pub fn is_exit(&self, col: i32, row: i32) -> bool {
        row == -1 && (self.exit_lo..=self.exit_hi).contains(&col)
    }

    pub fn is_interior(&self, col: i32, row: i32) -> bool {
        (0..self.size).contains(&col) && (0..self.size).contains(&row)
    }

    pub fn enterable(&self, col: i32, row: i32) -> bool {
        self.is_interior(col, row) || self.is_exit(col, row)
    }

    pub fn field(&self, col: i32, row: i32) -> f64 {
        let ox = (self.exit_lo + self.exit_hi) as f64 / 2.0;
        let dx = col as f64 - ox;
        let dy = row as f64 + 1.0;
        -(dx * dx + dy * dy).sqrt()
    }
}

/// (col, row, horizontal) of the lower-left cell.
pub type Body = (i32, i32, bool);

pub fn cells(b: Body) -> [(i32, i32); 2] {
    let (c, r, h) = b;
    if h {
        [(c, r), (c + 1, r)]
    } else {
        [(c, r), (c, r + 1)]
    }
}

fn body_value(room: &OracleRoom, b: Body) -> f64 {
    let [a, z] = cells(b);
    (room.field(a.0, a.1) + room.field(z.0, z.1)) / 2.0
}

fn fits(room: &OracleRoom, b: Body) -> bool {
    cells(b).iter().all(|&(c, r)| room.enterable(c, r))
}

/// Candidate bodies with a "slow" flag (sideways translation).
fn translations(room: &OracleRoom, b: Body) -> Vec<(Body, bool)> {
    let mut out = vec![(b, false)];
    for (dc, dr) in [(0, 1), (0, -1), (1, 0), (-1, 0)] {
        let t = (b.0 + dc, b.1 + dr, b.2);
        // Sideways means moving along the long axis.
        let slow = if b.2 { dc != 0 } else { dr != 0 };
        if fits(room, t) {
            out.push((t, slow));
        }
    }
    out
}

/// Perpendicular bodies sharing exactly one cell with `b`, found by search.
fn rotations(room: &OracleRoom, b: Body) -> Vec<(Body, bool)> {
    let mut out = vec![(b, false)];
    let own = cells(b);
    for dc in -2..=2 {
        for dr in -2..=2 {
            let t = (b.0 + dc, b.1 + dr, !b.2);
            let shared = cells(t).iter().filter(|c| own.contains(c)).count();
            if shared == 1 && fits(room, t) {
                out.push((t, false));
            }
        }
    }
    out
}

/// Two-stage softmax distribution over next bodies, with the rejected share
/// of every sideways candidate returned to staying put.
fn neighbourhood_distribution(
    room: &OracleRoom,
    b: Body,
    cands: &[(Body, bool)],
    v: f64,
    k: f64,
    into: &mut HashMap<Body, f64>,
    scale: f64,
) {
    let values: Vec<f64> = cands.iter().map(|&(t, _)| body_value(room, t)).collect();
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = values.iter().map(|s| ((s - max) / k).exp()).collect();
    let total: f64 = weights.iter().sum();
    for (&(t, slow), w) in cands.iter().zip(&weights) {
        let p = scale * w / total;
        if slow {
            *into.entry(t).or_default() += v * p;
            *into.entry(b).or_default() += (1.0 - v) * p;
        } else {
            *into.entry(t).or_default() += p;
        }
    }
}

/// One-step transition law of a lone evacuee.
pub fn lone_transition(room: &OracleRoom, b: Body, r: f64, v: f64, k: f64) -> HashMap<Body, f64> {
    let mut out = HashMap::new();
    if r < 1.0 {
        neighbourhood_distribution(room, b, &translations(room, b), v, k, &mut out, 1.0 - r);
    }
    if r > 0.0 {
        neighbourhood_distribution(room, b, &rotations(room, b), v, k, &mut out, r);
    }
    out
}

/// Probability that the translation draw picks the given unit step.
pub fn translation_probability(room: &OracleRoom, b: Body, step: (i32, i32), k: f64) -> f64 {
    let cands = translations(room, b);
    let values: Vec<f64> = cands.iter().map(|&(t, _)| body_value(room, t)).collect();
    let target = (b.0 + step.0, b.1 + step.1, b.2);
    let total: f64 = values.iter().map(|s| (s / k).exp()).sum();
    cands
        .iter()
        .zip(&values)
        .filter(|((t, _), _)| *t == target)
        .map(|(_, s)| (s / k).exp() / total)
        .sum()
}

/// Expected number of steps for a lone evacuee starting at `start` to touch
/// an exit cell, by Gauss-Seidel iteration on the first-passage equations.
pub fn expected_escape_time(room: &OracleRoom, start: Body, r: f64, v: f64, k: f64) -> f64 {
    let mut states = Vec::new();
    for row in 0..room.size {
        for col in 0..room.size {
            for h in [true, false] {
                let b = (col, row, h);
                if cells(b).iter().all(|&(c, r)| room.is_interior(c, r)) {
                    states.push(b);
                }
            }
        }
    }
    let index: HashMap<Body, usize> = states.iter().enumerate().map(|(i, &b)| (b, i)).collect();
    let transitions: Vec<Vec<(Option<usize>, f64)>> = states
        .iter()
        .map(|&b| {
            lone_transition(room, b, r, v, k)
                .into_iter()
                .map(|(t, p)| (index.get(&t).copied(), p))
                .collect()
        })
        .collect();
    let mut time = vec![0.0f64; states.len()];
    for _sweep in 0..100_000 {
        let mut delta: f64 = 0.0;
        for i in 0..states.len() {
            let mut stay = 0.0;
            let mut acc = 1.0;
            for &(j, p) in &transitions[i] {
                match j {
                    Some(j) if j == i => stay += p,
                    Some(j) => acc += p * time[j],
                    None => {}
                }
            }
            let next = acc / (1.0 - stay);
            delta = delta.max((next - time[i]).abs());
            time[i] = next;
        }
        if delta < 1e-10 {
            break;
        }
    }
    time[index[&start]]
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).unwrap());
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            out[o] = rank;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation (Pearson on average ranks).
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}
