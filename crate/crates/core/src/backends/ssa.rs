//! Gillespie direct method.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::rnet::{CompiledReaction, ReactionModel};

/// Number of ways to pick `n` molecules out of `x`.
fn choose(x: u64, n: u64) -> f64 {
    if x < n {
        return 0.0;
    }
    let mut c = 1.0;
    for j in 0..n {
        c *= (x - j) as f64 / (j + 1) as f64;
    }
    c
}

fn propensity(r: &CompiledReaction, state: &[u64]) -> f64 {
    let mut a = r.k;
    for &(i, n) in &r.reactants {
        a *= choose(state[i], n);
        if a == 0.0 {
            break;
        }
    }
    a
}

/// Generator for one design point and replication: the base seed picks the
/// key and `(point << 32) | replication` picks the stream.
pub fn stream_rng(seed: u64, point: u64, replication: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((point << 32) | (replication & 0xffff_ffff));
    rng
}

/// Simulates until `stop_time` and records the state at each observation
/// time. Times beyond `stop_time` are not recorded.
pub fn ssa_simulate(model: &ReactionModel, stop_time: f64, observation_times: &[f64], seed: u64) -> Vec<Vec<u64>> {
    let mut rng = stream_rng(seed, 0, 0);
    simulate_with(model, stop_time, observation_times, &mut rng)
}

pub(crate) fn simulate_with<R: Rng>(
    model: &ReactionModel,
    stop_time: f64,
    observation_times: &[f64],
    rng: &mut R,
) -> Vec<Vec<u64>> {
    let reactions = model.compile();
    let mut state = model.initial_state();
    let obs: Vec<f64> = observation_times.iter().copied().filter(|&t| t <= stop_time).collect();
    let mut out = Vec::with_capacity(obs.len());
    let mut next = 0;
    let mut t = 0.0;
    let mut props = vec![0.0; reactions.len()];
    while next < obs.len() {
        let mut total = 0.0;
        for (p, r) in props.iter_mut().zip(&reactions) {
            *p = propensity(r, &state);
            total += *p;
        }
        let t_next = if total > 0.0 {
            let u: f64 = 1.0 - rng.random::<f64>();
            t - u.ln() / total
        } else {
            f64::INFINITY
        };
        // record every observation that falls before the next event
        while next < obs.len() && obs[next] < t_next {
            out.push(state.clone());
            next += 1;
        }
        if next == obs.len() || t_next > stop_time {
            break;
        }
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = reactions.len() - 1;
        for (j, &p) in props.iter().enumerate() {
            acc += p;
            if target < acc && p > 0.0 {
                chosen = j;
                break;
            }
        }
        // guard against rounding leaving the last slot with zero propensity
        if props[chosen] == 0.0 {
            chosen = props.iter().rposition(|&p| p > 0.0).expect("positive total");
        }
        for &(i, d) in &reactions[chosen].delta {
            state[i] = (state[i] as i64 + d) as u64;
        }
        t = t_next;
    }
    while out.len() < obs.len() {
        out.push(state.clone());
    }
    out
}
