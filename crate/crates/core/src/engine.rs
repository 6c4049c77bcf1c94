//! Synchronous LOCAL-model execution with per-node termination rounds, and
//! the distance-s coloring used by the deterministic solver.

use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::tree::Tree;
use crate::Label;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("round limit {0} exceeded with {1} nodes still running")]
    RoundLimitExceeded(usize, usize),
    #[error("duplicate identifier {0}")]
    DuplicateId(u64),
    #[error("identifier count {ids} does not match node count {n}")]
    IdCountMismatch { ids: usize, n: usize },
    #[error("distance parameter must be at least 1")]
    BadDistance,
}

/// What a node knows before the first round.
#[derive(Debug, Clone)]
pub struct NodeContext<'a> {
    pub id: u64,
    pub degree: usize,
    /// Input label per port.
    pub inputs: &'a [Label],
    seed: u64,
}

impl NodeContext<'_> {
    /// Private random stream derived from the run seed and the node's id.
    pub fn rng(&self) -> ChaCha8Rng {
        node_rng(self.seed, self.id)
    }
}

pub fn node_rng(seed: u64, id: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&id.to_le_bytes());
    key[16..24].copy_from_slice(b"lclavg\0\0");
    ChaCha8Rng::from_seed(key)
}

/// A per-node program in the state-exchange formulation of LOCAL: each
/// round a running node reads the public state of every neighbour.
///
/// Nodes that have produced output are never stepped again, so their
/// public state is frozen and a second output cannot be emitted.
pub trait NodeAlgorithm {
    type State;
    type Public: Clone;
    type Output: Clone;

    fn init(&self, ctx: &NodeContext<'_>) -> (Self::State, Self::Public, Option<Self::Output>);

    /// `round` starts at 1. `neighbors` is indexed by port.
    fn step(
        &self,
        round: usize,
        state: &mut Self::State,
        neighbors: &[&Self::Public],
    ) -> (Self::Public, Option<Self::Output>);
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunResult<O> {
    pub termination_round: Vec<usize>,
    pub outputs: Vec<O>,
    pub rounds_total: usize,
}

impl<O> RunResult<O> {
    pub fn new(termination_round: Vec<usize>, outputs: Vec<O>) -> RunResult<O> {
        assert_eq!(termination_round.len(), outputs.len());
        let rounds_total = termination_round.iter().copied().max().unwrap_or(0);
        RunResult { termination_round, outputs, rounds_total }
    }

    pub fn node_count(&self) -> usize {
        self.termination_round.len()
    }

    pub fn average_f64(&self) -> f64 {
        let s: u64 = self.termination_round.iter().map(|&t| t as u64).sum();
        s as f64 / self.node_count().max(1) as f64
    }
}

/// Exact mean termination round.
pub fn node_averaged_complexity<O>(r: &RunResult<O>) -> Ratio<u64> {
    let s: u64 = r.termination_round.iter().map(|&t| t as u64).sum();
    Ratio::new(s, r.node_count().max(1) as u64)
}

fn check_ids(t: &Tree, ids: &[u64]) -> Result<(), EngineError> {
    if ids.len() != t.node_count() {
        return Err(EngineError::IdCountMismatch { ids: ids.len(), n: t.node_count() });
    }
    let mut sorted = ids.to_vec();
    sorted.sort_unstable();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(EngineError::DuplicateId(w[0]));
    }
    Ok(())
}

/// Runs `alg` with all inputs 0. `round_limit` defaults to `4n`.
pub fn run_simulation<A: NodeAlgorithm>(
    tree: &Tree,
    ids: &[u64],
    alg: &A,
    seed: u64,
    round_limit: Option<usize>,
) -> Result<RunResult<A::Output>, EngineError> {
    let inputs: Vec<Vec<Label>> = (0..tree.node_count()).map(|v| vec![0; tree.degree(v)]).collect();
    run_simulation_with_inputs(tree, ids, &inputs, alg, seed, round_limit)
}

pub fn run_simulation_with_inputs<A: NodeAlgorithm>(
    tree: &Tree,
    ids: &[u64],
    inputs: &[Vec<Label>],
    alg: &A,
    seed: u64,
    round_limit: Option<usize>,
) -> Result<RunResult<A::Output>, EngineError> {
    check_ids(tree, ids)?;
    let n = tree.node_count();
    let limit = round_limit.unwrap_or(4 * n);
    let mut states = Vec::with_capacity(n);
    let mut public = Vec::with_capacity(n);
    let mut outputs: Vec<Option<A::Output>> = Vec::with_capacity(n);
    let mut term = vec![0usize; n];
    for v in 0..n {
        let ctx = NodeContext { id: ids[v], degree: tree.degree(v), inputs: &inputs[v], seed };
        let (s, p, o) = alg.init(&ctx);
        states.push(s);
        public.push(p);
        outputs.push(o);
    }
    let mut active: Vec<usize> = (0..n).filter(|&v| outputs[v].is_none()).collect();
    let mut round = 0;
    while !active.is_empty() {
        round += 1;
        if round > limit {
            return Err(EngineError::RoundLimitExceeded(limit, active.len()));
        }
        let mut updates = Vec::with_capacity(active.len());
        for &v in &active {
            let nb: Vec<&A::Public> = tree.neighbors(v).iter().map(|&u| &public[u]).collect();
            updates.push(alg.step(round, &mut states[v], &nb));
        }
        let mut still = Vec::with_capacity(active.len());
        for (&v, (p, o)) in active.iter().zip(updates) {
            public[v] = p;
            match o {
                Some(o) => {
                    outputs[v] = Some(o);
                    term[v] = round;
                }
                None => still.push(v),
            }
        }
        active = still;
    }
    let outputs = outputs.into_iter().map(|o| o.expect("every node terminated")).collect();
    Ok(RunResult::new(term, outputs))
}

/// A proper coloring of the power graph `G^s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coloring {
    pub colors: Vec<usize>,
    pub s: usize,
    pub palette_size: usize,
}

impl Coloring {
    /// Brute-force check that nodes within distance `s` differ.
    pub fn is_valid(&self, t: &Tree) -> bool {
        let n = t.node_count();
        (0..n).all(|v| ball(t, v, self.s).iter().all(|&u| u == v || self.colors[u] != self.colors[v]))
    }
}

/// Nodes within distance `r` of `v`, including `v`.
pub fn ball(t: &Tree, v: usize, r: usize) -> Vec<usize> {
    let mut out = vec![v];
    let mut frontier = vec![(v, usize::MAX)];
    for _ in 0..r {
        let mut next = Vec::new();
        for &(x, from) in &frontier {
            for &u in t.neighbors(x) {
                if u != from {
                    out.push(u);
                    next.push((u, x));
                }
            }
        }
        frontier = next;
    }
    out
}

/// Upper bound on the degree of `G^s` for trees with maximum degree `delta`.
pub fn power_degree_bound(delta: usize, s: usize) -> usize {
    let mut total = 0usize;
    let mut layer = delta;
    for _ in 0..s {
        total = total.saturating_add(layer);
        layer = layer.saturating_mul(delta.saturating_sub(1));
    }
    total
}

fn is_prime(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    let mut i = 2;
    while i * i <= q {
        if q.is_multiple_of(i) {
            return false;
        }
        i += 1;
    }
    true
}

/// Smallest `r` with `r^k >= m`.
fn int_root_ceil(m: u128, k: u32) -> u64 {
    let mut r = (m as f64).powf(1.0 / k as f64) as u64;
    r = r.saturating_sub(2);
    while (r as u128).checked_pow(k).is_some_and(|p| p < m) {
        r += 1;
    }
    r
}

/// Polynomial parameters `(q, d)` for one reduction step from palette `m`,
/// or `None` if no step shrinks the palette.
fn reduction_params(m: u128, big_d: u64) -> Option<(u64, u32)> {
    let mut best: Option<(u64, u32)> = None;
    for d in 1..=64u32 {
        let mut lo = int_root_ceil(m, d + 1).max(big_d.max(1) * d as u64 + 1);
        if lo > 1 << 40 {
            continue;
        }
        while !is_prime(lo) {
            lo += 1;
        }
        let q = lo;
        if best.is_none_or(|(bq, _)| q < bq) {
            best = Some((q, d));
        }
    }
    best.filter(|&(q, _)| (q as u128) * (q as u128) < m)
}

fn poly_eval(c: u64, q: u64, d: u32, x: u64) -> u64 {
    let mut digits = Vec::with_capacity(d as usize + 1);
    let mut rest = c;
    for _ in 0..=d {
        digits.push(rest % q);
        rest /= q;
    }
    let mut acc = 0u128;
    for &a in digits.iter().rev() {
        acc = (acc * x as u128 + a as u128) % q as u128;
    }
    acc as u64
}

/// Colors `G^s` with `power_degree_bound(Δ, s) + 1` colors.
///
/// Starting from the identifiers, each power round recolors every node
/// with a point `(x, p(x))` of the polynomial encoding its color, where `x`
/// separates it from all `G^s` neighbours. Once the palette stops shrinking,
/// a node whose color is too large and exceeds every too-large color in its
/// `G^s` neighbourhood takes the smallest free small color. One power round
/// costs `s` rounds. Returns the coloring and the round at which each
/// node's color became final.
pub fn compute_distance_coloring(tree: &Tree, ids: &[u64], s: usize) -> Result<(Coloring, Vec<usize>), EngineError> {
    if s == 0 {
        return Err(EngineError::BadDistance);
    }
    check_ids(tree, ids)?;
    let n = tree.node_count();
    let big_d = power_degree_bound(tree.max_degree(), s);
    let palette_size = big_d + 1;
    if n == 1 {
        return Ok((Coloring { colors: vec![0], s, palette_size }, vec![0]));
    }
    let nbrs: Vec<Vec<usize>> = (0..n)
        .map(|v| ball(tree, v, s).into_iter().filter(|&u| u != v).collect())
        .collect();
    let mut colors: Vec<u64> = ids.to_vec();
    let mut m: u128 = 1u128 << 64;
    let mut rounds = 0usize;
    while let Some((q, d)) = reduction_params(m, big_d as u64) {
        let next: Vec<u64> = (0..n)
            .map(|v| {
                let c = colors[v];
                let x = (0..q)
                    .find(|&x| {
                        let y = poly_eval(c, q, d, x);
                        nbrs[v].iter().all(|&u| poly_eval(colors[u], q, d, x) != y)
                    })
                    .expect("q exceeds the number of conflicting points");
                x * q + poly_eval(c, q, d, x)
            })
            .collect();
        colors = next;
        m = (q as u128) * (q as u128);
        rounds += s;
    }
    let big = big_d as u64;
    let mut fixed = vec![rounds; n];
    let mut pending: Vec<usize> = (0..n).filter(|&v| colors[v] > big).collect();
    while !pending.is_empty() {
        rounds += s;
        let movers: Vec<usize> = pending
            .iter()
            .copied()
            .filter(|&v| nbrs[v].iter().all(|&u| colors[u] <= big || colors[u] < colors[v]))
            .collect();
        for &v in &movers {
            let used: Vec<u64> = nbrs[v].iter().map(|&u| colors[u]).collect();
            let c = (0..=big).find(|c| !used.contains(c)).expect("at most D neighbours");
            colors[v] = c;
            fixed[v] = rounds;
        }
        pending.retain(|&v| colors[v] > big);
    }
    let colors = colors.into_iter().map(|c| c as usize).collect();
    Ok((Coloring { colors, s, palette_size }, fixed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{generate_path, generate_random_tree, IdAssignment};

    struct OwnId;

    impl NodeAlgorithm for OwnId {
        type State = ();
        type Public = ();
        type Output = u64;
        fn init(&self, ctx: &NodeContext<'_>) -> ((), (), Option<u64>) {
            ((), (), Some(ctx.id))
        }
        fn step(&self, _: usize, _: &mut (), _: &[&()]) -> ((), Option<u64>) {
            unreachable!()
        }
    }

    /// Each node learns its distance to the nearest degree-1 node.
    struct SeeEndpoint;

    impl NodeAlgorithm for SeeEndpoint {
        type State = ();
        type Public = bool;
        type Output = ();
        fn init(&self, ctx: &NodeContext<'_>) -> ((), bool, Option<()>) {
            let leaf = ctx.degree <= 1;
            ((), leaf, leaf.then_some(()))
        }
        fn step(&self, _: usize, _: &mut (), nb: &[&bool]) -> (bool, Option<()>) {
            if nb.iter().any(|&&b| b) {
                (true, Some(()))
            } else {
                (false, None)
            }
        }
    }

    #[test]
    fn output_at_init_costs_zero() {
        let t = generate_path(6);
        let ids = IdAssignment::from_seed(6, 1);
        let r = run_simulation(&t, ids.as_slice(), &OwnId, 0, None).unwrap();
        assert_eq!(r.termination_round, vec![0; 6]);
        assert_eq!(r.outputs, ids.as_slice().to_vec());
        assert_eq!(node_averaged_complexity(&r), Ratio::from_integer(0));
    }

    #[test]
    fn path_endpoint_discovery() {
        let t = generate_path(5);
        let ids = IdAssignment::from_seed(5, 1);
        let r = run_simulation(&t, ids.as_slice(), &SeeEndpoint, 0, None).unwrap();
        assert_eq!(r.termination_round, vec![0, 1, 2, 1, 0]);
        assert_eq!(r.rounds_total, 2);
        let again = run_simulation(&t, ids.as_slice(), &SeeEndpoint, 0, None).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn round_limit_is_enforced() {
        let t = generate_path(9);
        let ids = IdAssignment::from_seed(9, 1);
        let err = run_simulation(&t, ids.as_slice(), &SeeEndpoint, 0, Some(2)).unwrap_err();
        assert_eq!(err, EngineError::RoundLimitExceeded(2, 3));
        let dup = vec![1, 2, 1, 4, 5, 6, 7, 8, 9];
        assert_eq!(run_simulation(&t, &dup, &OwnId, 0, None).unwrap_err(), EngineError::DuplicateId(1));
    }

    #[test]
    fn averages_are_exact() {
        let avg = |t: Vec<usize>| node_averaged_complexity(&RunResult::new(t.clone(), vec![(); t.len()]));
        assert_eq!(avg(vec![3, 1, 2]), Ratio::from_integer(2));
        assert_eq!(avg(vec![5; 7]), Ratio::from_integer(5));
        assert_eq!(avg(vec![0, 0, 0, 4]), Ratio::from_integer(1));
        assert_eq!(avg(vec![1, 2]), Ratio::new(3, 2));
    }

    #[test]
    fn coloring_single_node() {
        let t = generate_path(1);
        let (c, r) = compute_distance_coloring(&t, &[42], 3).unwrap();
        assert_eq!(c.colors, vec![0]);
        assert_eq!(r, vec![0]);
    }

    #[test]
    fn coloring_is_valid_on_small_trees() {
        for seed in 0..6 {
            let t = generate_random_tree(2000, 4, seed);
            let ids = IdAssignment::from_seed(2000, seed);
            for s in 1..=3 {
                let (c, _) = compute_distance_coloring(&t, ids.as_slice(), s).unwrap();
                assert!(c.is_valid(&t));
                assert!(c.colors.iter().all(|&x| x < c.palette_size));
                assert_eq!(c.palette_size, power_degree_bound(4, s) + 1);
            }
        }
    }

    #[test]
    fn coloring_rejects_duplicates() {
        let t = generate_path(3);
        assert_eq!(compute_distance_coloring(&t, &[5, 6, 5], 1).unwrap_err(), EngineError::DuplicateId(5));
        assert_eq!(compute_distance_coloring(&t, &[5, 6, 7], 0).unwrap_err(), EngineError::BadDistance);
    }

    #[test]
    fn polynomial_step_separates() {
        let (q, d) = reduction_params(1u128 << 64, 4).unwrap();
        assert!(q > 4 * d as u64);
        assert!((q as u128).pow(d + 1) >= 1u128 << 64);
        for a in 0..50u64 {
            for b in 0..50u64 {
                if a != b {
                    let agree = (0..q).filter(|&x| poly_eval(a, q, d, x) == poly_eval(b, q, d, x)).count();
                    assert!(agree <= d as usize);
                }
            }
        }
    }
}
