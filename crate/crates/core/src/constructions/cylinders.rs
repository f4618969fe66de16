//! Disjoint cylinders whose rotations all sit near a target rotation.

use std::collections::{HashSet, VecDeque};

use serde::Serialize;

use crate::error::{IfsError, Result};
use crate::geometry::{
    max_entry_distance, op_norm, orth_mul, orth_residual, BallSet, Mat, Similarity, Ssifs, Word,
};
use crate::group::{closure_of, FiniteGroup};
use crate::tolerance::{TAU_NUM, TAU_ORTH};

#[derive(Debug, Clone, Serialize)]
pub struct CylinderSelection {
    pub words: Vec<Word>,
    #[serde(skip)]
    pub rotation_target: Mat,
    pub delta: f64,
    pub t: f64,
    /// `Σ r_w^t` over the selected words.
    pub mass: f64,
    pub mass_target: f64,
    pub depth_cap: usize,
    /// Stopped at the depth or frontier cap before reaching the mass target.
    pub partial: bool,
    /// Exact rotation equality in a finite group.
    pub exact_group_mode: bool,
    /// Mass after each refinement round.
    pub mass_history: Vec<f64>,
    /// Mass above 1: `t` is larger than the true dimension of this sample.
    pub mass_exceeds_one: bool,
    pub worst_rotation_distance: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct CylinderOptions {
    /// Frontier size at which refinement stops with a partial result.
    pub max_frontier: usize,
    /// Distinct rotations kept when enumerating corrector words.
    pub max_corrector_states: usize,
    /// Use exact equality when the group is finite and contains the target.
    pub allow_exact_mode: bool,
}

impl Default for CylinderOptions {
    fn default() -> Self {
        Self {
            max_frontier: 1 << 21,
            max_corrector_states: 200_000,
            allow_exact_mode: true,
        }
    }
}

/// Shortest words giving each reachable rotation, enumerated breadth-first
/// on demand, with rotations identified below `dedup` (Frobenius).
struct WordTable {
    generators: Vec<Mat>,
    entries: Vec<(Mat, Word)>,
    frontier: Vec<usize>,
    seen: HashSet<Vec<i64>>,
    depth: usize,
    dedup: f64,
    max_states: usize,
    exhausted: bool,
}

impl WordTable {
    fn new(generators: Vec<Mat>, dedup: f64, max_states: usize) -> Self {
        let d = generators[0].nrows();
        let id = Mat::identity(d, d);
        let mut seen = HashSet::new();
        seen.insert(Self::key(&id, dedup));
        Self {
            generators,
            entries: vec![(id, Word::empty())],
            frontier: vec![0],
            seen,
            depth: 0,
            dedup,
            max_states,
            exhausted: false,
        }
    }

    fn key(m: &Mat, dedup: f64) -> Vec<i64> {
        m.iter().map(|x| (x / dedup).round() as i64).collect()
    }

    /// Adds one more word length. Returns false if nothing new appeared.
    fn grow(&mut self) -> bool {
        if self.exhausted || self.frontier.is_empty() {
            self.exhausted = true;
            return false;
        }
        let mut next = Vec::new();
        for &i in &self.frontier.clone() {
            for (g, gen) in self.generators.iter().enumerate() {
                let u = orth_mul(&self.entries[i].0, gen);
                if self.seen.insert(Self::key(&u, self.dedup)) {
                    let w = self.entries[i].1.push(g);
                    self.entries.push((u, w));
                    next.push(self.entries.len() - 1);
                    if self.entries.len() >= self.max_states {
                        self.exhausted = true;
                        break;
                    }
                }
            }
            if self.exhausted {
                break;
            }
        }
        self.depth += 1;
        self.frontier = next;
        !self.frontier.is_empty()
    }

    /// First word `j` (shortest, then earliest) with `‖U_j - goal‖ < radius`.
    fn find(&mut self, goal: &Mat, radius: f64, max_len: usize) -> Option<Word> {
        // ‖X‖_F <= sqrt(d) ‖X‖_op, so this prefilter never drops a hit.
        let prefilter = radius * (goal.nrows() as f64).sqrt();
        let mut scanned = 0;
        loop {
            for (u, w) in &self.entries[scanned..] {
                if w.len() <= max_len
                    && (u - goal).norm() < prefilter
                    && op_norm(&(u - goal)) < radius
                {
                    return Some(w.clone());
                }
            }
            scanned = self.entries.len();
            if self.depth >= max_len || !self.grow() {
                return None;
            }
        }
    }
}

enum Mode {
    Exact {
        group: FiniteGroup,
        target_index: usize,
        /// Shortest word for each group element.
        words: Vec<Word>,
    },
    Approximate {
        table: WordTable,
        /// `(O_n, j_n)` with `‖O_n T_{j_n} - O‖ < δ/2`, or no such short `j_n`.
        net: Vec<(Mat, Option<Word>)>,
    },
}

fn shortest_group_words(ifs: &Ssifs, group: &FiniteGroup) -> Result<Vec<Option<Word>>> {
    let mut words: Vec<Option<Word>> = vec![None; group.order()];
    let id = group.identity_index()?;
    words[id] = Some(Word::empty());
    let mut queue = VecDeque::from([id]);
    while let Some(i) = queue.pop_front() {
        for (n, s) in ifs.maps().iter().enumerate() {
            let j = group.index_of(&orth_mul(&group.elements()[i], s.rotation()))?;
            if words[j].is_none() {
                words[j] = Some(words[i].as_ref().expect("visited").push(n));
                queue.push_back(j);
            }
        }
    }
    Ok(words)
}

impl Mode {
    fn matches(&self, r: &Mat, target: &Mat, delta: f64) -> bool {
        match self {
            Mode::Exact { .. } => max_entry_distance(r, target) < TAU_ORTH,
            Mode::Approximate { .. } => op_norm(&(r - target)) < delta,
        }
    }

    fn corrector(&mut self, r: &Mat, target: &Mat, delta: f64, max_len: usize) -> Result<Option<Word>> {
        match self {
            Mode::Exact {
                group,
                target_index,
                words,
            } => {
                // T_j = R^T O.
                let need = group.index_of(&orth_mul(&r.transpose(), &group.elements()[*target_index]))?;
                Ok(Some(words[need].clone()))
            }
            Mode::Approximate { table, net } => {
                for (o, j) in net.iter() {
                    if (r - o).norm() < 0.5 * delta {
                        return Ok(j.clone());
                    }
                }
                let goal = r.transpose() * target;
                // A miss is cached too; the word is then only refined.
                let found = table.find(&goal, 0.5 * delta, max_len);
                net.push((r.clone(), found.clone()));
                Ok(found)
            }
        }
    }
}

pub fn select_disjoint_cylinders(
    ifs: &Ssifs,
    target: &Mat,
    delta: f64,
    t: f64,
    mass_target: f64,
    depth_cap: usize,
) -> Result<CylinderSelection> {
    select_disjoint_cylinders_with(ifs, target, delta, t, mass_target, depth_cap, &CylinderOptions::default())
}

/// Greedy refinement: walk the word tree breadth-first in lexicographic
/// order; keep a word when its rotation is within `delta` of `target` and
/// its ball misses every kept ball, otherwise try it followed by a
/// corrector word and then refine it into its children.
#[allow(clippy::too_many_arguments)]
pub fn select_disjoint_cylinders_with(
    ifs: &Ssifs,
    target: &Mat,
    delta: f64,
    t: f64,
    mass_target: f64,
    depth_cap: usize,
    opts: &CylinderOptions,
) -> Result<CylinderSelection> {
    let d = ifs.dim();
    if target.nrows() != d || target.ncols() != d {
        return Err(IfsError::DimensionMismatch {
            what: "target rotation",
            expected: d,
            got: target.nrows(),
        });
    }
    if orth_residual(target) > TAU_ORTH {
        return Err(IfsError::NotOrthogonal {
            residual: orth_residual(target),
            tol: TAU_ORTH,
        });
    }
    if !(delta > 0.0) || !(t > 0.0) || !(mass_target > 0.0 && mass_target < 1.0) {
        return Err(IfsError::InvalidArgument(
            "need delta > 0, t > 0 and 0 < mass_target < 1".into(),
        ));
    }

    let group = closure_of(&ifs.rotations())?;
    let mut mode = match group.finite() {
        Some(fg) if opts.allow_exact_mode => {
            let target_index = fg.index_of(target)?;
            let words = shortest_group_words(ifs, fg)?
                .into_iter()
                .map(|w| w.ok_or_else(|| IfsError::Numeric("group element unreachable".into())))
                .collect::<Result<Vec<_>>>()?;
            Mode::Exact {
                group: fg.clone(),
                target_index,
                words,
            }
        }
        _ => Mode::Approximate {
            table: WordTable::new(ifs.rotations(), delta / 16.0, opts.max_corrector_states),
            net: Vec::new(),
        },
    };
    let exact_group_mode = matches!(mode, Mode::Exact { .. });

    let root = ifs.bounding_ball()?;
    let slack = ifs.separation_slack(&root);
    let mut balls = BallSet::new();
    let mut kept: Vec<(Word, f64, f64)> = Vec::new();
    let mut kept_set: HashSet<Word> = HashSet::new();
    let mut mass = 0.0;
    let mut history = Vec::new();
    let mut partial = false;

    let has_kept_prefix = |w: &Word, set: &HashSet<Word>| -> bool {
        (1..=w.len()).any(|k| set.contains(&Word(w.0[..k].to_vec())))
    };

    let mut pending: Vec<(Word, Similarity)> = vec![(Word::empty(), Similarity::identity(d))];
    'rounds: for depth in 0..=depth_cap {
        if pending.is_empty() {
            break;
        }
        pending.sort_by(|a, b| a.0.cmp(&b.0));
        let mut next: Vec<(Word, Similarity)> = Vec::new();
        for (w, s) in pending.drain(..) {
            if mass >= mass_target {
                break 'rounds;
            }
            if has_kept_prefix(&w, &kept_set) {
                continue;
            }
            let ball = s.image_ball(&root);
            let hit = mode.matches(s.rotation(), target, delta);
            if !w.is_empty() && hit && balls.disjoint_from_all(&ball, slack) {
                let dist = op_norm(&(s.rotation() - target));
                mass += s.ratio().powf(t);
                balls.insert(ball);
                kept_set.insert(w.clone());
                kept.push((w, s.ratio(), dist));
                continue;
            }
            if depth >= depth_cap {
                continue;
            }
            if !hit {
                if let Some(c) = mode.corrector(s.rotation(), target, delta, depth_cap)? {
                    if !c.is_empty() && depth + c.len() <= depth_cap {
                        let u = w.concat(&c);
                        let su = ifs.word_map(&c).map(|m| s.compose(&m))?;
                        let bu = su.image_ball(&root);
                        if mode.matches(su.rotation(), target, delta)
                            && !has_kept_prefix(&u, &kept_set)
                            && balls.disjoint_from_all(&bu, slack)
                        {
                            let dist = op_norm(&(su.rotation() - target));
                            mass += su.ratio().powf(t);
                            balls.insert(bu);
                            kept_set.insert(u.clone());
                            kept.push((u, su.ratio(), dist));
                        }
                    }
                }
            }
            for (n, map) in ifs.maps().iter().enumerate() {
                let child = w.push(n);
                if !kept_set.contains(&child) {
                    let sc = s.compose(map);
                    next.push((child, sc));
                }
            }
            if next.len() > opts.max_frontier {
                history.push(mass);
                partial = true;
                break 'rounds;
            }
        }
        history.push(mass);
        pending = next;
    }
    if mass < mass_target {
        partial = true;
    }
    kept.sort_by(|a, b| a.0.cmp(&b.0));
    let worst = kept.iter().map(|k| k.2).fold(0.0, f64::max);
    Ok(CylinderSelection {
        words: kept.into_iter().map(|k| k.0).collect(),
        rotation_target: target.clone(),
        delta,
        t,
        mass,
        mass_target,
        depth_cap,
        partial,
        exact_group_mode,
        mass_history: history,
        mass_exceeds_one: mass > 1.0 + TAU_NUM,
        worst_rotation_distance: worst,
    })
}
