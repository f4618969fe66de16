//! Strongly separated subsystems with nearly full dimension.

use std::collections::HashSet;

use serde::Serialize;

use crate::dimension::{sim_dim_ratios, sim_dim_ssifs};
use crate::error::{IfsError, Result};
use crate::estimation::{box_dim_default, sample_attractor, SamplingMethod};
use crate::geometry::{pairwise_disjoint, BallSet, BoundingBall, Similarity, Ssifs, Vect, Word};
use crate::group::{kronecker_power, KroneckerPower};

/// Where the target dimension `t` comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum DimensionProxy {
    /// Open set condition certified, so `t` is the similarity dimension.
    OscCertified,
    Supplied(f64),
    /// Box-count slope of a chaos-game sample.
    Estimated { points: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy)]
pub struct SscOptions {
    pub proxy: DimensionProxy,
    /// Deepest cylinder level tried in the packing stage.
    pub max_level: usize,
    /// Cap on candidate cylinders per level.
    pub max_candidates: usize,
}

impl Default for SscOptions {
    fn default() -> Self {
        Self {
            proxy: DimensionProxy::OscCertified,
            max_level: 16,
            max_candidates: 1 << 21,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SscSubsystem {
    pub words: Vec<Word>,
    #[serde(skip)]
    pub subsystem: Ssifs,
    pub sim_dim: f64,
    pub t: f64,
    pub t_is_estimate: bool,
    pub epsilon: f64,
    /// Input already strongly separated; no surgery applied.
    pub identity: bool,
    /// Words with pairwise distinct fixed points, one per generator.
    pub base_words: Vec<Word>,
    pub kronecker: Vec<KroneckerPower>,
    /// A short cylinder disjoint from the powered base cylinders.
    pub gap_word: Option<Word>,
    pub cylinder_level: Option<usize>,
    pub packed_cylinders: usize,
    pub warning: Option<String>,
}

fn resolve_t(ifs: &Ssifs, proxy: DimensionProxy) -> Result<(f64, bool)> {
    match proxy {
        DimensionProxy::OscCertified => Ok((sim_dim_ssifs(ifs)?.value, false)),
        DimensionProxy::Supplied(t) => {
            if !(t > 0.0) || !t.is_finite() {
                return Err(IfsError::InvalidArgument(format!("dimension proxy {t} must be positive")));
            }
            Ok((t, false))
        }
        DimensionProxy::Estimated { points, seed } => {
            let cloud = sample_attractor(ifs, points, seed, SamplingMethod::chaos_uniform())?;
            Ok((box_dim_default(&cloud)?.slope.max(0.0), true))
        }
    }
}

/// Base words with pairwise distinct fixed points: `(a)`, `(b)` for the
/// first pair of maps with distinct fixed points, then for every other map
/// `i` either `(i)` or `a^n i` with the smallest `n` that separates it.
fn base_words(ifs: &Ssifs, sep: f64) -> Result<Vec<(Word, Similarity, Vect)>> {
    let m = ifs.len();
    let fixed: Vec<Vect> = ifs.maps().iter().map(|s| s.fixed_point()).collect::<Result<_>>()?;
    let (a, b) = (0..m)
        .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
        .find(|&(i, j)| (&fixed[i] - &fixed[j]).norm() > sep)
        .ok_or_else(|| IfsError::Degenerate("all maps share a fixed point".into()))?;
    let mut out: Vec<(Word, Similarity, Vect)> = vec![
        (Word::single(a), ifs.map(a).clone(), fixed[a].clone()),
        (Word::single(b), ifs.map(b).clone(), fixed[b].clone()),
    ];
    let separated = |x: &Vect, chosen: &[(Word, Similarity, Vect)]| {
        chosen.iter().all(|(_, _, y)| (x - y).norm() > sep)
    };
    for i in 0..m {
        if i == a || i == b {
            continue;
        }
        let mut pick = None;
        'search: for base in [a, b] {
            for n in 0..=64usize {
                let w = Word::single(base).repeat(n).push(i);
                let s = ifs.word_map(&w)?;
                let x = s.fixed_point()?;
                if separated(&x, &out) {
                    pick = Some((w, s, x));
                    break 'search;
                }
            }
        }
        out.push(pick.ok_or_else(|| {
            IfsError::SearchExhausted(format!("no word a^n {} with a fresh fixed point", i + 1))
        })?);
    }
    Ok(out)
}

/// Words `w` with `r_w <= level_ratio < r_{w^-}`, in lexicographic order.
fn stopping_words(ifs: &Ssifs, level_ratio: f64, cap: usize) -> Result<Vec<(Word, Similarity)>> {
    let mut out = Vec::new();
    let mut stack: Vec<(Word, Similarity)> = vec![(Word::empty(), Similarity::identity(ifs.dim()))];
    while let Some((w, s)) = stack.pop() {
        if !w.is_empty() && s.ratio() <= level_ratio {
            out.push((w, s));
            if out.len() > cap {
                return Err(IfsError::SearchExhausted(format!(
                    "more than {cap} candidate cylinders"
                )));
            }
            continue;
        }
        for n in (0..ifs.len()).rev() {
            stack.push((w.push(n), s.compose(ifs.map(n))));
        }
    }
    Ok(out)
}

/// Subsystem `{S_w}` with pairwise disjoint cylinder balls (hence the
/// strong separation condition), transformation group dense in the
/// original one, and similarity dimension at least `t - epsilon`.
///
/// Base maps with distinct fixed points, raised to Kronecker powers so
/// their balls separate, keep the group. The dimension comes from a
/// greedy maximal family of level cylinders disjoint from those balls.
pub fn ssc_subsystem(ifs: &Ssifs, epsilon: f64, opts: &SscOptions) -> Result<SscSubsystem> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(IfsError::InvalidArgument(format!("epsilon {epsilon} must be positive")));
    }
    let (t, t_is_estimate) = resolve_t(ifs, opts.proxy)?;
    let ball = ifs.bounding_ball()?;
    let slack = ifs.separation_slack(&ball);

    if ifs.ball_certified_ssc()? {
        let words: Vec<Word> = (0..ifs.len()).map(Word::single).collect();
        return Ok(SscSubsystem {
            sim_dim: sim_dim_ssifs(ifs)?.value,
            words,
            subsystem: ifs.clone(),
            t,
            t_is_estimate,
            epsilon,
            identity: true,
            base_words: (0..ifs.len()).map(Word::single).collect(),
            kronecker: Vec::new(),
            gap_word: None,
            cylinder_level: None,
            packed_cylinders: 0,
            warning: None,
        });
    }

    let sep = 1e-9 * (1.0 + ball.radius);
    let base = base_words(ifs, sep)?;
    let mut d_min = f64::INFINITY;
    for i in 0..base.len() {
        for j in i + 1..base.len() {
            d_min = d_min.min((&base[i].2 - &base[j].2).norm());
        }
    }
    let rho = base.iter().map(|b| b.1.ratio()).fold(0.0, f64::max);
    // Ball of F^k sits in B(x_F, 2 ρ^k R); these separate once 4 ρ^N R < d_min.
    let mut n = ((d_min / (4.0 * ball.radius)).ln() / rho.ln()).ceil().max(1.0) as u32;
    let (powered, kron) = loop {
        let mut powered: Vec<(Word, Similarity)> = Vec::with_capacity(base.len());
        let mut kron = Vec::with_capacity(base.len());
        for (w, s, _) in &base {
            let kp = kronecker_power(s.rotation(), n)?;
            let k = usize::try_from(kp.k)
                .ok()
                .filter(|&k| k <= 4096)
                .ok_or_else(|| IfsError::SearchExhausted(format!("Kronecker exponent {} too large", kp.k)))?;
            let mut map = Similarity::identity(ifs.dim());
            for _ in 0..k {
                map = map.compose(s);
            }
            powered.push((w.repeat(k), map));
            kron.push(kp);
        }
        let balls: Vec<BoundingBall> = powered.iter().map(|(_, s)| s.image_ball(&ball)).collect();
        if pairwise_disjoint(&balls, slack) {
            break (powered, kron);
        }
        n += 1;
        if n > 60 {
            return Err(IfsError::SearchExhausted("powered base balls never separate".into()));
        }
    };
    let mut kept = BallSet::new();
    for (_, s) in &powered {
        kept.insert(s.image_ball(&ball));
    }

    let gap_word = (1..=8).find_map(|len| {
        ifs.words_of_length(len).ok()?.into_iter().find(|w| {
            ifs.word_map(w)
                .map(|s| kept.disjoint_from_all(&s.image_ball(&ball), slack))
                .unwrap_or(false)
        })
    });

    let finish = |words: Vec<Word>, maps: Vec<Similarity>, level, packed, warning| -> Result<SscSubsystem> {
        let ratios: Vec<f64> = maps.iter().map(|s| s.ratio()).collect();
        let sim_dim = sim_dim_ratios(&ratios, ifs.dim(), ifs.tolerances())?.value;
        Ok(SscSubsystem {
            words,
            subsystem: Ssifs::with_tolerances(maps, *ifs.tolerances())?,
            sim_dim,
            t,
            t_is_estimate,
            epsilon,
            identity: false,
            base_words: base.iter().map(|b| b.0.clone()).collect(),
            kronecker: kron.clone(),
            gap_word: gap_word.clone(),
            cylinder_level: level,
            packed_cylinders: packed,
            warning,
        })
    };

    if epsilon >= t {
        let (w, s): (Vec<Word>, Vec<Similarity>) = powered.iter().take(2).cloned().unzip();
        return finish(w, s, None, 0, Some(format!("epsilon {epsilon} >= t {t}: trivial subsystem")));
    }

    let r_max = ifs.ratios().into_iter().fold(0.0, f64::max);
    for level in 1..=opts.max_level {
        let cands = stopping_words(ifs, r_max.powi(level as i32), opts.max_candidates)?;
        let mut set = kept.clone();
        let mut words: Vec<Word> = powered.iter().map(|p| p.0.clone()).collect();
        let mut maps: Vec<Similarity> = powered.iter().map(|p| p.1.clone()).collect();
        let mut seen: HashSet<Vec<u64>> = HashSet::new();
        let mut packed = 0;
        for (w, s) in cands {
            let b = s.image_ball(&ball);
            // Exact duplicates (overlapping systems) share a ball; skip fast.
            let key: Vec<u64> = b.center.iter().map(|x| x.to_bits()).collect();
            if !seen.insert(key) {
                continue;
            }
            if set.disjoint_from_all(&b, slack) {
                set.insert(b);
                words.push(w);
                maps.push(s);
                packed += 1;
            }
        }
        let ratios: Vec<f64> = maps.iter().map(|s| s.ratio()).collect();
        let dim = sim_dim_ratios(&ratios, ifs.dim(), ifs.tolerances())?.value;
        if dim >= t - epsilon {
            return finish(words, maps, Some(level), packed, None);
        }
    }
    Err(IfsError::SearchExhausted(format!(
        "no disjoint cylinder family reached dimension {} by level {}",
        t - epsilon,
        opts.max_level
    )))
}
