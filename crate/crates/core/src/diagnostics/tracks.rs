//! Continuity-ordered eigenvalue tracks of Y(t;κ), near-approach detection,
//! and collision classification (defectiveness and winding).

use num_complex::Complex64;

use super::DiagResult;
use crate::linalg::{eigenvalues_only, geometric_multiplicity, ComplexMatrix};
use crate::ode::{propagate, solve_at, MatrixFunction};

#[derive(Debug, Clone)]
pub struct TrackOptions {
    /// Initial uniform sample count (at least 2).
    pub samples: usize,
    /// Integrator tolerance.
    pub tol: f64,
    /// Adaptive refinement passes inserting midpoints where a track moves
    /// more than `movement_bound` in modulus-normalized distance.
    pub refine_rounds: usize,
    pub movement_bound: f64,
    /// Near-approach local minima below this (relative) threshold are
    /// refined in t.
    pub approach_threshold: f64,
}

impl Default for TrackOptions {
    fn default() -> Self {
        TrackOptions {
            samples: 160,
            tol: 1e-10,
            refine_rounds: 5,
            movement_bound: 0.05,
            approach_threshold: 0.2,
        }
    }
}

/// Absolute inter-track distance below which a refined approach counts as a
/// collision.
pub const COLLISION_TOL: f64 = 1e-4;

/// A refined closest approach of two tracks (not necessarily a collision).
#[derive(Debug, Clone)]
pub struct CollisionCandidate {
    pub t_star: f64,
    pub lambda_star: Complex64,
    pub gap: f64,
    pub track_indices: (usize, usize),
}

/// A classified eigenvalue collision.
#[derive(Debug, Clone)]
pub struct CollisionEvent {
    pub t_star: f64,
    pub lambda_star: Complex64,
    pub track_indices: (usize, usize),
    /// Refined inter-track distance at t_star.
    pub gap: f64,
    pub algebraic: usize,
    pub geometric: usize,
    /// geometric < algebraic at the collision.
    pub defective: bool,
    /// Winding number about the origin of the closed loop running forward
    /// along track i and backward along track j.
    pub winding: i64,
    /// Set when the multiplicity estimates move under a 10× threshold change.
    pub multiplicity_unstable: bool,
}

/// Continuity-ordered eigenvalue tracks λₙ(t;κ) with detected collisions.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub kappa: Complex64,
    pub grid: Vec<f64>,
    /// tracks[n][k] = λₙ(grid[k]); all tracks start at 1.
    pub tracks: Vec<Vec<Complex64>>,
    /// Y(grid[k]); kept for collision classification and sweep refinement.
    pub samples: Vec<ComplexMatrix>,
    /// Collisions (refined approaches with gap below `COLLISION_TOL`),
    /// classified.
    pub events: Vec<CollisionEvent>,
    /// All refined closest approaches, including non-collisions.
    pub approaches: Vec<CollisionCandidate>,
    /// Sample indices where the continuity assignment was ambiguous.
    pub ambiguous_steps: Vec<usize>,
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.tracks.len()
    }

    /// Accumulated continuous argument of track `n` from 0 up to `t_star`,
    /// ending at `lambda_end`.
    fn accumulated_arg(&self, track: usize, t_star: f64, lambda_end: Complex64) -> f64 {
        let mut total = 0.0;
        let mut prev = self.tracks[track][0];
        for (k, &t) in self.grid.iter().enumerate().skip(1) {
            if t > t_star {
                break;
            }
            let cur = self.tracks[track][k];
            total += (cur / prev).arg();
            prev = cur;
        }
        total += (lambda_end / prev).arg();
        total
    }
}

/// Minimum-total-distance assignment of `new` values to `prev` track values.
/// Exhaustive over permutations (desk scale); returns the permutation and
/// whether a distinct assignment came within 1e−12 of the optimum.
fn assign(prev: &[Complex64], new: &[Complex64]) -> (Vec<usize>, bool) {
    let n = prev.len();
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut second_best = f64::INFINITY;
    let mut perm: Vec<usize> = (0..n).collect();
    permute(&mut perm, 0, &mut |p| {
        let cost: f64 = (0..n).map(|i| (prev[i] - new[p[i]]).norm()).sum();
        match &mut best {
            Some((best_cost, best_perm)) => {
                if cost < *best_cost {
                    second_best = *best_cost;
                    *best_cost = cost;
                    best_perm.copy_from_slice(p);
                } else if cost < second_best {
                    second_best = cost;
                }
            }
            None => best = Some((cost, p.to_vec())),
        }
    });
    let (best_cost, best_perm) = best.expect("at least one permutation");
    (best_perm, second_best - best_cost < 1e-12)
}

fn permute(items: &mut [usize], k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}

/// Eigenvalue tracks with default options.
pub fn eigenvalue_tracks(
    a: &MatrixFunction,
    kappa: Complex64,
    t_end: f64,
    samples: usize,
) -> DiagResult<Trajectory> {
    eigenvalue_tracks_with(a, kappa, t_end, &TrackOptions { samples, ..Default::default() })
}

pub fn eigenvalue_tracks_with(
    a: &MatrixFunction,
    kappa: Complex64,
    t_end: f64,
    options: &TrackOptions,
) -> DiagResult<Trajectory> {
    let dim = a.dim();
    let samples = options.samples.max(2);
    let grid: Vec<f64> = (0..samples).map(|k| t_end * k as f64 / (samples - 1) as f64).collect();
    let ys = solve_at(a, kappa, &grid, options.tol)?;
    let mut nodes: Vec<(f64, ComplexMatrix, Vec<Complex64>)> = grid
        .into_iter()
        .zip(ys)
        .map(|(t, y)| {
            let evals = eigenvalues_only(&y)?;
            Ok((t, y, evals))
        })
        .collect::<DiagResult<_>>()?;

    // Adaptive refinement: insert midpoints where some eigenvalue moves too
    // far between consecutive samples (in modulus-normalized distance).
    let max_nodes = (samples * 16).max(4096);
    for _ in 0..options.refine_rounds {
        let ordered = order_into_tracks(&nodes);
        let mut insertions: Vec<(usize, f64)> = Vec::new();
        for k in 0..nodes.len() - 1 {
            let mut worst: f64 = 0.0;
            for track in &ordered.0 {
                let d = (track[k + 1] - track[k]).norm() / (1.0 + track[k].norm());
                worst = worst.max(d);
            }
            if worst > options.movement_bound {
                insertions.push((k, 0.5 * (nodes[k].0 + nodes[k + 1].0)));
            }
        }
        if insertions.is_empty() || nodes.len() + insertions.len() > max_nodes {
            break;
        }
        for (offset, (k, t_mid)) in insertions.into_iter().enumerate() {
            let idx = k + offset;
            let (t_left, y_left, _) = &nodes[idx];
            let y_mid = propagate(a, kappa, *t_left, y_left, t_mid, options.tol)?;
            let evals = eigenvalues_only(&y_mid)?;
            nodes.insert(idx + 1, (t_mid, y_mid, evals));
        }
    }

    let (tracks, ambiguous_steps) = order_into_tracks(&nodes);
    let grid: Vec<f64> = nodes.iter().map(|n| n.0).collect();
    let samples_y: Vec<ComplexMatrix> = nodes.iter().map(|n| n.1.clone()).collect();

    let mut trajectory = Trajectory {
        kappa,
        grid,
        tracks,
        samples: samples_y,
        events: Vec::new(),
        approaches: Vec::new(),
        ambiguous_steps,
    };

    // Near-approach detection per track pair: local minima of the gap below
    // the (relative) threshold, refined in t by golden-section.
    let mut approaches = Vec::new();
    for i in 0..dim {
        for j in (i + 1)..dim {
            approaches.extend(refine_pair_minima(a, &trajectory, (i, j), options)?);
        }
    }
    approaches.sort_by(|x, y| x.t_star.partial_cmp(&y.t_star).unwrap());

    let mut events = Vec::new();
    for cand in &approaches {
        if cand.gap < COLLISION_TOL {
            let y_at = y_at_time(a, &trajectory, cand.t_star, options.tol)?;
            events.push(collision_classify(&trajectory, cand, &y_at)?);
        }
    }
    trajectory.approaches = approaches;
    trajectory.events = events;
    Ok(trajectory)
}

type Tracks = Vec<Vec<Complex64>>;

/// Chain the per-sample spectra into continuity-ordered tracks.
fn order_into_tracks(nodes: &[(f64, ComplexMatrix, Vec<Complex64>)]) -> (Tracks, Vec<usize>) {
    let dim = nodes[0].2.len();
    let mut tracks: Tracks = vec![Vec::with_capacity(nodes.len()); dim];
    let mut ambiguous = Vec::new();
    let mut current: Vec<Complex64> = nodes[0].2.clone();
    for (n, value) in current.iter().enumerate() {
        tracks[n].push(*value);
    }
    for (k, node) in nodes.iter().enumerate().skip(1) {
        let (perm, tie) = assign(&current, &node.2);
        if tie {
            ambiguous.push(k);
        }
        for n in 0..dim {
            current[n] = node.2[perm[n]];
            tracks[n].push(current[n]);
        }
    }
    (tracks, ambiguous)
}

/// Y at an arbitrary time, continued from the nearest stored sample.
fn y_at_time(
    a: &MatrixFunction,
    traj: &Trajectory,
    t: f64,
    tol: f64,
) -> DiagResult<ComplexMatrix> {
    let k = match traj.grid.iter().rposition(|&g| g <= t) {
        Some(k) => k,
        None => 0,
    };
    Ok(propagate(a, traj.kappa, traj.grid[k], &traj.samples[k], t, tol)?)
}

/// Find and refine the local minima of |λᵢ − λⱼ| along the grid.
fn refine_pair_minima(
    a: &MatrixFunction,
    traj: &Trajectory,
    (i, j): (usize, usize),
    options: &TrackOptions,
) -> DiagResult<Vec<CollisionCandidate>> {
    let count = traj.grid.len();
    let gap_at = |k: usize| (traj.tracks[i][k] - traj.tracks[j][k]).norm();
    let mut out = Vec::new();
    for k in 1..count {
        let is_min = if k + 1 < count {
            gap_at(k) <= gap_at(k - 1) && gap_at(k) <= gap_at(k + 1)
        } else {
            gap_at(k) < gap_at(k - 1)
        };
        if !is_min {
            continue;
        }
        let scale = 1.0 + traj.tracks[i][k].norm();
        if gap_at(k) > options.approach_threshold * scale {
            continue;
        }
        let lo = traj.grid[k - 1];
        let hi = traj.grid[(k + 1).min(count - 1)];
        let base_idx = k - 1;
        let eval_gap = |t: f64| -> DiagResult<(f64, Complex64)> {
            let y = propagate(
                a,
                traj.kappa,
                traj.grid[base_idx],
                &traj.samples[base_idx],
                t,
                options.tol,
            )?;
            let evals = eigenvalues_only(&y)?;
            Ok(closest_pair_to(
                &evals,
                traj.tracks[i][k],
                traj.tracks[j][k],
            ))
        };
        let (t_star, (gap, lambda_star)) = golden_min(lo, hi, 48, &eval_gap)?;
        out.push(CollisionCandidate { t_star, lambda_star, gap, track_indices: (i, j) });
    }
    // Deduplicate refined minima that converged to the same point.
    out.sort_by(|x, y| x.t_star.partial_cmp(&y.t_star).unwrap());
    out.dedup_by(|b, a| (a.t_star - b.t_star).abs() < 1e-9 * (1.0 + a.t_star.abs()));
    Ok(out)
}

/// Pick the two eigenvalues nearest the reference pair; return their gap and
/// midpoint.
fn closest_pair_to(
    evals: &[Complex64],
    ref_i: Complex64,
    ref_j: Complex64,
) -> (f64, Complex64) {
    let mut remaining: Vec<Complex64> = evals.to_vec();
    let pick = |pool: &mut Vec<Complex64>, reference: Complex64| -> Complex64 {
        let (idx, _) = pool
            .iter()
            .enumerate()
            .map(|(idx, &l)| (idx, (l - reference).norm()))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .expect("nonempty spectrum");
        pool.swap_remove(idx)
    };
    let li = pick(&mut remaining, ref_i);
    let lj = pick(&mut remaining, ref_j);
    ((li - lj).norm(), (li + lj) * 0.5)
}

/// Golden-section minimization of f over [lo, hi].
fn golden_min<T>(
    lo: f64,
    hi: f64,
    iterations: usize,
    f: &impl Fn(f64) -> DiagResult<(f64, T)>,
) -> DiagResult<(f64, (f64, T))> {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut a = lo;
    let mut b = hi;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..iterations {
        if f1.0 <= f2.0 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2)?;
        }
    }
    if f1.0 <= f2.0 {
        Ok((x1, f1))
    } else {
        Ok((x2, f2))
    }
}

/// Complete a detected approach into a classified collision event:
/// multiplicities at λ*, defectiveness, and the winding number of the loop
/// formed by the two tracks up to t*.
pub fn collision_classify(
    traj: &Trajectory,
    candidate: &CollisionCandidate,
    y_at_collision: &ComplexMatrix,
) -> DiagResult<CollisionEvent> {
    let evals = eigenvalues_only(y_at_collision)?;
    let cluster_radius = (10.0 * candidate.gap).max(COLLISION_TOL);
    let algebraic = evals
        .iter()
        .filter(|l| (**l - candidate.lambda_star).norm() <= cluster_radius)
        .count()
        .max(2);
    let geometric =
        geometric_multiplicity(y_at_collision, candidate.lambda_star, 1e-6);
    let geo_lo = geometric_multiplicity(y_at_collision, candidate.lambda_star, 1e-7);
    let geo_hi = geometric_multiplicity(y_at_collision, candidate.lambda_star, 1e-5);
    let multiplicity_unstable = geo_lo != geometric || geo_hi != geometric;
    let (i, j) = candidate.track_indices;
    let arg_i = traj.accumulated_arg(i, candidate.t_star, candidate.lambda_star);
    let arg_j = traj.accumulated_arg(j, candidate.t_star, candidate.lambda_star);
    let winding = ((arg_i - arg_j) / (2.0 * std::f64::consts::PI)).round() as i64;
    Ok(CollisionEvent {
        t_star: candidate.t_star,
        lambda_star: candidate.lambda_star,
        track_indices: candidate.track_indices,
        gap: candidate.gap,
        algebraic,
        geometric,
        defective: geometric < algebraic,
        winding,
        multiplicity_unstable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::corpus;

    const ONE: Complex64 = Complex64::new(1.0, 0.0);
    const I: Complex64 = Complex64::new(0.0, 1.0);

    #[test]
    fn all_tracks_start_at_one() {
        let a = corpus::example4();
        let traj = eigenvalue_tracks(&a, ONE, 0.5, 100).unwrap();
        for track in &traj.tracks {
            assert!((track[0] - ONE).norm() < 1e-12);
        }
        assert_eq!(traj.dim(), 4);
    }

    #[test]
    fn rotation_collides_at_pi_but_not_defectively() {
        let a = corpus::example1();
        let traj = eigenvalue_tracks(&a, ONE, 4.0, 160).unwrap();
        let near_pi: Vec<&CollisionEvent> = traj
            .events
            .iter()
            .filter(|e| (e.t_star - std::f64::consts::PI).abs() < 1e-3)
            .collect();
        assert!(!near_pi.is_empty(), "collision at t = π not found");
        for event in near_pi {
            assert!((event.lambda_star - Complex64::new(-1.0, 0.0)).norm() < 1e-3);
            assert!(!event.defective, "rotation collision must be non-defective");
            assert_eq!(event.geometric, 2);
        }
    }

    #[test]
    fn triangular_at_imaginary_kappa_collides_defectively() {
        let a = corpus::example3();
        let traj = eigenvalue_tracks(&a, I, 2.5, 200).unwrap();
        let t_expected = 2.0 * std::f64::consts::PI / 3.0;
        let event = traj
            .events
            .iter()
            .find(|e| (e.t_star - t_expected).abs() < 1e-3)
            .expect("collision at 2π/3");
        assert!(event.defective, "upper-triangular collision is defective");
        assert_eq!(event.winding.abs(), 1, "loop encircles the origin");
    }

    #[test]
    fn quartic_tracks_match_described_shape() {
        let a = corpus::example4();
        let traj = eigenvalue_tracks(&a, ONE, 1.0, 120).unwrap();
        // No collision on the negative real axis for t in [0, 1].
        for event in &traj.events {
            assert!(
                !(event.lambda_star.re < 0.0 && event.lambda_star.im.abs() < 1e-6),
                "unexpected negative-axis collision at {:?}",
                event.lambda_star
            );
        }
        // Two eigenvalues move right, the other two form a complex pair.
        let finals: Vec<Complex64> = traj.tracks.iter().map(|t| *t.last().unwrap()).collect();
        let real_right =
            finals.iter().filter(|l| l.im.abs() < 1e-6 && l.re > 1.0).count();
        let complex_pair = finals.iter().filter(|l| l.im.abs() > 1e-3).count();
        assert_eq!(real_right, 2, "finals {finals:?}");
        assert_eq!(complex_pair, 2, "finals {finals:?}");
    }

    #[test]
    fn winding_stable_under_grid_halving() {
        let a = corpus::example3();
        let coarse = eigenvalue_tracks(&a, I, 2.5, 150).unwrap();
        let fine = eigenvalue_tracks(&a, I, 2.5, 300).unwrap();
        let pick = |t: &Trajectory| {
            t.events
                .iter()
                .map(|e| e.winding)
                .collect::<Vec<_>>()
        };
        assert_eq!(pick(&coarse), pick(&fine));
    }
}
