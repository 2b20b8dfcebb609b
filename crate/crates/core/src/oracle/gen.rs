//! Random totally normed systems.
//!
//! Constants are built one at a time. Each ordinary constant gets a visible
//! rule whose right-hand side only uses earlier constants, which bounds its
//! norm; extra rules may then point anywhere. Some constants are twins of an
//! earlier one: an exact copy, a copy followed by another constant, or a copy
//! with one small change. Twins make bisimilar pairs common enough to matter.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{ActionId, BpaSystem, ConstId, Process};
use crate::normalize::{check_totally_normed, compute_norms};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub constants: usize,
    pub max_rhs_len: usize,
    /// Size of the visible alphabet.
    pub actions: usize,
    pub silent_prob: f64,
    pub norm_cap: u64,
    pub extra_rules: usize,
    pub twin_prob: f64,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            constants: 6,
            max_rhs_len: 2,
            actions: 2,
            silent_prob: 0.3,
            norm_cap: 5,
            extra_rules: 6,
            twin_prob: 0.35,
            seed: 0,
        }
    }
}

impl GenParams {
    pub fn with_seed(&self, seed: u64) -> Self {
        GenParams { seed, ..self.clone() }
    }
}

#[derive(Clone, Copy, Debug)]
enum Twin {
    Exact { of: usize, silent_link: bool },
    Product { of: usize, then: usize, silent_link: bool },
    Near { of: usize },
}

/// Label: `None` is silent.
type RawRule = (usize, Option<usize>, Vec<usize>);

fn constant_name(i: usize) -> String {
    let letter = (b'A' + (i % 26) as u8) as char;
    if i < 26 {
        letter.to_string()
    } else {
        format!("{letter}{}", i / 26)
    }
}

fn action_name(i: usize) -> String {
    if i < 26 {
        ((b'a' + i as u8) as char).to_string()
    } else {
        format!("a{i}")
    }
}

/// Deterministic in `params.seed`.
pub fn random_system(params: &GenParams) -> BpaSystem {
    let n = params.constants.max(1);
    let actions = params.actions.max(1);
    let cap = params.norm_cap.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let mut norm_est = vec![0u64; n];
    let mut twins: Vec<Option<Twin>> = vec![None; n];
    let mut rules: Vec<RawRule> = Vec::new();

    for i in 0..n {
        if i > 0 && rng.gen_bool(params.twin_prob.clamp(0.0, 1.0)) {
            let of = rng.gen_range(0..i);
            let silent = params.silent_prob > 0.0;
            let kind = rng.gen_range(0..3);
            let then = rng.gen_range(0..i);
            let twin = match kind {
                1 if norm_est[of] + norm_est[then] <= cap => Twin::Product {
                    of,
                    then,
                    silent_link: silent && rng.gen_bool(0.5),
                },
                2 => Twin::Near { of },
                _ => Twin::Exact {
                    of,
                    silent_link: silent && rng.gen_bool(0.5),
                },
            };
            norm_est[i] = match twin {
                Twin::Product { of, then, .. } => norm_est[of] + norm_est[then],
                Twin::Exact { of, .. } | Twin::Near { of } => norm_est[of],
            };
            twins[i] = Some(twin);
            continue;
        }
        let mut budget = cap - 1;
        let len = if i == 0 { 0 } else { rng.gen_range(0..=params.max_rhs_len) };
        let mut rhs = Vec::new();
        for _ in 0..len {
            let fits: Vec<usize> = (0..i).filter(|&j| norm_est[j] <= budget).collect();
            let Some(&j) = fits.choose(&mut rng) else { break };
            budget -= norm_est[j];
            rhs.push(j);
        }
        norm_est[i] = 1 + rhs.iter().map(|&j| norm_est[j]).sum::<u64>();
        rules.push((i, Some(rng.gen_range(0..actions)), rhs));
    }

    let ordinary: Vec<usize> = (0..n).filter(|&i| twins[i].is_none()).collect();
    for _ in 0..params.extra_rules {
        let lhs = *ordinary.choose(&mut rng).expect("constant 0 is ordinary");
        let silent = rng.gen_bool(params.silent_prob.clamp(0.0, 1.0));
        let lo = usize::from(silent);
        let len = rng.gen_range(lo..=params.max_rhs_len.max(lo));
        let rhs = (0..len).map(|_| rng.gen_range(0..n)).collect();
        let label = if silent { None } else { Some(rng.gen_range(0..actions)) };
        rules.push((lhs, label, rhs));
    }

    for (i, twin) in twins.iter().enumerate() {
        let Some(twin) = *twin else { continue };
        let of = match twin {
            Twin::Exact { of, .. } | Twin::Product { of, .. } | Twin::Near { of } => of,
        };
        let source: Vec<RawRule> = rules.iter().filter(|r| r.0 == of).cloned().collect();
        match twin {
            Twin::Exact { silent_link, .. } => {
                rules.extend(source.into_iter().map(|(_, l, r)| (i, l, r)));
                if silent_link {
                    rules.push((i, None, vec![of]));
                }
            }
            Twin::Product { then, silent_link, .. } => {
                rules.extend(source.into_iter().map(|(_, l, mut r)| {
                    r.push(then);
                    (i, l, r)
                }));
                if silent_link {
                    rules.push((i, None, vec![of, then]));
                }
            }
            Twin::Near { .. } => {
                let mut copy: Vec<RawRule> = source.into_iter().map(|(_, l, r)| (i, l, r)).collect();
                let visible: Vec<usize> = (0..copy.len()).filter(|&k| copy[k].1.is_some()).collect();
                if actions > 1 && rng.gen_bool(0.5) {
                    let k = *visible.choose(&mut rng).expect("copied constants have a visible rule");
                    let old = copy[k].1.expect("visible");
                    copy[k].1 = Some((old + rng.gen_range(1..actions)) % actions);
                    // keep the original rule too when it was the norm witness
                    if copy[k].2.is_empty() || rng.gen_bool(0.5) {
                        copy.push((i, Some(old), copy[k].2.clone()));
                    }
                } else {
                    let len = rng.gen_range(1..=params.max_rhs_len.max(1));
                    let rhs = (0..len).map(|_| rng.gen_range(0..n)).collect();
                    copy.push((i, Some(rng.gen_range(0..actions)), rhs));
                }
                rules.extend(copy);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    rules.shuffle(&mut rng);

    let mut b = BpaSystem::builder();
    let mut ids = vec![ConstId(0); n];
    for &i in &order {
        ids[i] = b.constant(constant_name(i));
    }
    let action_ids: Vec<ActionId> = (0..actions).map(|a| b.visible(&action_name(a))).collect();
    for (lhs, label, rhs) in rules {
        let label = label.map_or(ActionId::TAU, |a| action_ids[a]);
        b.rule(ids[lhs], label, Process(rhs.into_iter().map(|j| ids[j]).collect()));
    }
    let sys = b.build();
    debug_assert!(check_totally_normed(&sys, &compute_norms(&sys)).is_ok());
    sys
}
