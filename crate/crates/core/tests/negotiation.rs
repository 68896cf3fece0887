use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rms_sched::baselines::HeuristicKind;
use rms_sched::negotiation::*;
use rms_sched::nn::gradcheck::{max_relative_error, max_vector_error, numeric_gradient};
use rms_sched::nn::{Matrix, Module};
use rms_sched::sim::*;
use rms_sched::trainer::{run_episode, Allocation, EvalPolicy};

fn machine(native: &[usize], reconf: &[usize], setup: f64, reconfig: f64) -> MachineDef {
    MachineDef {
        native: native.to_vec(),
        reconfigurable: reconf.to_vec(),
        setup_time: setup,
        flexibility: 0.85,
        reliability: 0.9,
        efficiency: 1.0,
        reconfig_time: Some(reconfig),
    }
}

fn job(processes: &[usize], times: &[f64], priority: u8, due: f64) -> JobDef {
    JobDef { processes: processes.to_vec(), times: times.to_vec(), priority, due_date: Some(due), arrival_time: 0.0 }
}

/// M0 runs {0,1} now, M1 runs {2,3} and can switch, M2 is down from the start.
fn bid_fixture() -> SystemState {
    let m1 = MachineDef { efficiency: 0.8, flexibility: 0.7, reliability: 0.95, ..machine(&[2, 3], &[0, 1], 4.0, 6.0) };
    let cfg = ScenarioConfig {
        name: "bids".into(),
        machines: MachineSpec::explicit(vec![machine(&[0, 1], &[2, 3], 5.2, 5.0), m1, machine(&[0, 1], &[2, 3], 1.0, 1.0)]),
        jobs: JobSpec {
            explicit: Some(vec![job(&[0, 2, 1], &[10.0, 5.0, 5.0], 3, 200.0), job(&[2, 3, 0], &[8.0, 6.0, 7.0], 2, 200.0)]),
            ..JobSpec::generated(0)
        },
        process_count: 4,
        view_size: 4,
        horizon: 1000.0,
        breakdowns: vec![BreakdownSpec { machine: 2, time: 0.0 }],
        ..ScenarioConfig::reference()
    };
    SystemState::new(&cfg, 1).unwrap()
}

#[test]
fn bids_match_machine_fields() {
    let s = bid_fixture();
    let req = JobRequest::of(&s, 0).unwrap();
    assert_eq!(req.vector(), [0.0, 200.0, 3.0, 10.0]);
    let bids = collect_bids(&s, &req);
    assert_eq!(bids.len(), 2);
    assert_eq!(bids[0], Bid { machine_id: 0, y: [0.85, 0.9, 0.0, 5.2, 10.0], requires_reconfig: false });
    assert_eq!(bids[1], Bid { machine_id: 1, y: [0.7, 0.95, 0.0, 4.0 + 6.0, 12.5], requires_reconfig: true });
    assert!(bids.iter().all(|b| b.machine_id != 2));

    let other = collect_bids(&s, &JobRequest::of(&s, 1).unwrap());
    assert_eq!(other[0].y[3], 5.2 + 5.0);
    assert_eq!(other[1].y[3], 4.0);
    assert!(!other[1].requires_reconfig);
}

#[test]
fn selection_by_hand() {
    let (alpha, winner) = softmax_select(&[2f64.ln(), 0.0]).unwrap();
    assert!((alpha[0] - 2.0 / 3.0).abs() < 1e-12 && (alpha[1] - 1.0 / 3.0).abs() < 1e-12);
    assert_eq!(winner, 0);
    let (uniform, first) = softmax_select(&[0.3; 4]).unwrap();
    assert!(uniform.iter().all(|a| (a - 0.25).abs() < 1e-12));
    assert_eq!(first, 0);
    assert!((entropy(&uniform) - 4f64.ln()).abs() < 1e-12);
    assert_eq!(softmax_select(&[]), Err(NegotiationError::NoBids));
    let adv = normalized_advantages(&[1.0, 2.0, 3.0]);
    for (a, e) in adv.iter().zip([-1.2247, 0.0, 1.2247]) {
        assert!((a - e).abs() < 1e-3);
    }
}

proptest! {
    #[test]
    fn alpha_is_a_distribution_and_shift_invariant(
        scores in prop::collection::vec(-5.0f64..5.0, 1..12),
        shift in -50.0f64..50.0,
    ) {
        let (alpha, winner) = softmax_select(&scores).unwrap();
        prop_assert!((alpha.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(alpha.iter().all(|&a| a > 0.0));
        let best = alpha.iter().copied().fold(f64::MIN, f64::max);
        prop_assert_eq!(alpha[winner], best);
        prop_assert!(alpha[..winner].iter().all(|&a| a < best));
        let shifted: Vec<f64> = scores.iter().map(|s| s + shift).collect();
        let (alpha2, winner2) = softmax_select(&shifted).unwrap();
        prop_assert_eq!(winner, winner2);
        for (a, b) in alpha.iter().zip(&alpha2) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}

fn random_bid(machine_id: usize, rng: &mut ChaCha8Rng) -> Bid {
    Bid {
        machine_id,
        y: [
            rng.random_range(0.7..1.0),
            rng.random_range(0.85..1.0),
            rng.random_range(0.0..1.0),
            rng.random_range(0.0..30.0),
            rng.random_range(5.0..20.0),
        ],
        requires_reconfig: rng.random_bool(0.5),
    }
}

fn score_of(b: &Bid) -> f64 {
    -(b.y[3] + b.y[4]) / 10.0 + b.y[1]
}

/// Independent replay of the round protocol: per round, every open job picks
/// the argmax over its still-free machines; each machine keeps the most urgent
/// suitor (earliest on ties).
fn oracle(candidates: &[Candidate], max_rounds: usize) -> (BTreeMap<usize, usize>, usize) {
    let mut placed: BTreeMap<usize, usize> = BTreeMap::new();
    let mut rounds = 0;
    for round in 1..=max_rounds {
        let taken: Vec<usize> = placed.values().copied().collect();
        let mut suitors: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (ci, c) in candidates.iter().enumerate() {
            if placed.contains_key(&c.job_id) {
                continue;
            }
            let open: Vec<&Bid> = c.bids.iter().filter(|b| !taken.contains(&b.machine_id)).collect();
            let mut best: Option<&Bid> = None;
            for b in open {
                if best.is_none_or(|x| score_of(b) > score_of(x)) {
                    best = Some(b);
                }
            }
            if let Some(b) = best {
                suitors.entry(b.machine_id).or_default().push(ci);
            }
        }
        if suitors.is_empty() {
            break;
        }
        rounds = round;
        for (m, jobs) in suitors {
            let mut win = jobs[0];
            for &ci in &jobs[1..] {
                if candidates[ci].urgency > candidates[win].urgency {
                    win = ci;
                }
            }
            placed.insert(candidates[win].job_id, m);
        }
    }
    (placed, rounds)
}

#[test]
fn protocol_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..300 {
        let candidates: Vec<Candidate> = (0..5)
            .map(|j| {
                let mut bids = Vec::new();
                for m in 0..3 {
                    if rng.random_bool(0.7) {
                        bids.push(random_bid(m, &mut rng));
                    }
                }
                let urgency = if rng.random_bool(0.2) { 1.0 } else { rng.random_range(0.1..50.0) };
                Candidate { job_id: 10 + j, urgency, bids }
            })
            .filter(|c| !c.bids.is_empty())
            .collect();
        let max_rounds = rng.random_range(1..=8);
        let res = resolve_conflicts(&candidates, max_rounds, |_, bids| bids.iter().map(score_of).collect());
        let (expected, rounds) = oracle(&candidates, max_rounds);
        let got: BTreeMap<usize, usize> = res.assignments.iter().copied().collect();
        assert_eq!(got, expected, "case {case}");
        assert_eq!(res.rounds, rounds, "case {case}");
        assert!(res.rounds <= max_rounds);

        let mut machines: Vec<usize> = res.assignments.iter().map(|a| a.1).collect();
        machines.sort_unstable();
        machines.dedup();
        assert_eq!(machines.len(), res.assignments.len());
        assert_eq!(got.len(), res.assignments.len());
        for &(job, m) in &res.assignments {
            let c = candidates.iter().find(|c| c.job_id == job).unwrap();
            assert!(c.bids.iter().any(|b| b.machine_id == m));
            let o = res.accepted(job).unwrap();
            assert_eq!(o.bids[o.winner].machine_id, m);
            assert!((o.alpha.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        if res.rounds < max_rounds {
            for c in candidates.iter().filter(|c| !got.contains_key(&c.job_id)) {
                assert!(c.bids.iter().all(|b| machines.contains(&b.machine_id)), "case {case}: job left with a free bidder");
            }
        }
    }
}

fn random_bid_matrix(rows: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let raw: Vec<[f64; 5]> = (0..rows).map(|r| random_bid(r, rng).y).collect();
    scale_bids(&raw)
}

#[test]
fn scoring_net_gradients_match_finite_differences() {
    for case in 0..25u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(300 + case);
        let mut net = ScoringNet::new(8, &mut rng);
        let rows = rng.random_range(1..6);
        let y = random_bid_matrix(rows, &mut rng);
        let coeffs: Vec<f64> = (0..rows).map(|_| rng.random_range(-1.0..1.0)).collect();
        let loss = |n: &ScoringNet, y: &Matrix| -> f64 {
            n.forward(y).unwrap().0.iter().zip(&coeffs).map(|(h, c)| h * c).sum()
        };
        let (h, cache) = net.forward(&y).unwrap();
        assert!(h.iter().all(|&v| v > 0.0 && v < 1.0));
        net.zero_grad();
        let dy = net.backward(&cache, &coeffs).unwrap();
        let err = max_relative_error(&mut net, |n| loss(n, &y), 1e-5);
        assert!(err < 1e-4, "case {case}: parameter error {err}");
        let numeric = numeric_gradient(&y.data, |d| loss(&net, &Matrix::from_vec(rows, 5, d.to_vec())), 1e-5);
        let err = max_vector_error(&dy.data, &numeric);
        assert!(err < 1e-4, "case {case}: input error {err}");
    }
}

#[test]
fn bid_head_gradients_match_finite_differences() {
    for case in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(500 + case);
        let mut head = BidHead::new(3, 6, &mut rng);
        let rows = rng.random_range(1..4);
        let y = random_bid_matrix(rows, &mut rng);
        let machines: Vec<usize> = (0..rows).map(|_| rng.random_range(0..3)).collect();
        let coeffs: Vec<f64> = (0..rows * 5).map(|_| rng.random_range(-1.0..1.0)).collect();
        let loss = |h: &BidHead, y: &Matrix| -> f64 {
            h.forward(y, &machines).unwrap().0.data.iter().zip(&coeffs).map(|(a, c)| a * c).sum()
        };
        let (_, cache) = head.forward(&y, &machines).unwrap();
        head.zero_grad();
        let dy = head.backward(&cache, &Matrix::from_vec(rows, 5, coeffs.clone())).unwrap();
        let err = max_relative_error(&mut head, |h| loss(h, &y), 1e-5);
        assert!(err < 1e-4, "case {case}: parameter error {err}");
        let numeric = numeric_gradient(&y.data, |d| loss(&head, &Matrix::from_vec(rows, 5, d.to_vec())), 1e-5);
        assert!(max_vector_error(&dy.data, &numeric) < 1e-4, "case {case}");
    }
}

fn records(rng: &mut ChaCha8Rng, count: usize, reward: impl Fn(&mut ChaCha8Rng) -> f64) -> Vec<NegotiationRecord> {
    (0..count)
        .map(|k| {
            let n = rng.random_range(1..=3);
            let bids: Vec<Bid> = (0..n).map(|m| random_bid(m, rng)).collect();
            NegotiationRecord {
                job_id: k,
                round: 1,
                rounds_used: 1,
                winner: rng.random_range(0..n),
                alpha: vec![1.0 / n as f64; n],
                bids,
                reward: reward(rng),
            }
        })
        .collect()
}

fn negotiator(seed: u64) -> Negotiator {
    Negotiator::new(3, NegotiationConfig { scorer_hidden: 8, head_hidden: 6, entropy_n: 0.05, entropy_m: 0.02, seed, ..NegotiationConfig::default() })
}

#[test]
fn negotiation_loss_gradients_match_finite_differences() {
    for case in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(700 + case);
        let batch = records(&mut rng, 6, |r| r.random_range(-5.0..5.0));
        let mut neg = negotiator(case);
        neg.scorer.zero_grad();
        neg.head.zero_grad();
        neg.accumulate_gradients(&batch).unwrap();
        let frozen = neg.clone();

        let err_n = max_relative_error(
            &mut neg.scorer,
            |s| {
                let mut n = frozen.clone();
                n.scorer = s.clone();
                n.losses(&batch).unwrap().l_n
            },
            1e-5,
        );
        assert!(err_n < 1e-4, "case {case}: scorer error {err_n}");

        let err_m = max_relative_error(
            &mut neg.head,
            |h| {
                let mut n = frozen.clone();
                n.head = h.clone();
                n.losses(&batch).unwrap().l_m
            },
            1e-5,
        );
        assert!(err_m < 1e-4, "case {case}: head error {err_m}");
    }
}

#[test]
fn equal_rewards_leave_only_the_entropy_term() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let batch = records(&mut rng, 5, |_| 4.0);
    let mut neg = negotiator(1);
    let losses = neg.losses(&batch).unwrap();
    let mut expected = 0.0;
    for r in &batch {
        let (alpha, _) = neg.score_and_select(&r.bids).unwrap();
        expected -= 0.05 * entropy(&alpha) / batch.len() as f64;
    }
    assert!((losses.l_n - expected).abs() < 1e-12);

    let mut no_entropy = neg.clone();
    no_entropy.config.entropy_n = 0.0;
    no_entropy.config.entropy_m = 0.0;
    no_entropy.scorer.zero_grad();
    no_entropy.head.zero_grad();
    no_entropy.accumulate_gradients(&batch).unwrap();
    let grads = |m: &dyn Fn() -> Vec<f64>| m().iter().map(|g| g.abs()).fold(0.0, f64::max);
    let scorer_grads = || no_entropy.scorer.params().iter().flat_map(|p| p.grad.clone()).collect();
    let head_grads = || no_entropy.head.params().iter().flat_map(|p| p.grad.clone()).collect();
    assert_eq!(grads(&scorer_grads), 0.0);
    assert_eq!(grads(&head_grads), 0.0);

    neg.scorer.zero_grad();
    neg.accumulate_gradients(&batch).unwrap();
    let norm: f64 = neg.scorer.params().iter().flat_map(|p| p.grad.iter()).map(|g| g * g).sum();
    assert!(norm > 0.0);
}

#[test]
fn update_needs_two_records() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut neg = negotiator(0);
    assert_eq!(neg.train(&records(&mut rng, 1, |_| 1.0)).unwrap_err(), NegotiationError::BatchTooSmall(1));
    assert_eq!(neg.train(&[]).unwrap_err(), NegotiationError::BatchTooSmall(0));
    assert_eq!(neg.updates, 0);
    let before = neg.scorer.clone();
    neg.train(&records(&mut rng, 4, |r| r.random_range(0.0..1.0))).unwrap();
    assert_eq!(neg.updates, 1);
    assert_ne!(before, neg.scorer);
}

#[test]
fn urgent_job_takes_the_contested_machine() {
    let s = bid_fixture();
    let relaxed = urgency(1.0, 500.0, 0.0, 20.0, 0.1);
    let tight = urgency(5.0, 30.0, 0.0, 20.0, 0.1);
    assert!(tight > relaxed);
    let bid = collect_bids(&s, &JobRequest::of(&s, 0).unwrap())[0];
    let candidates = vec![
        Candidate { job_id: 0, urgency: relaxed, bids: vec![bid] },
        Candidate { job_id: 1, urgency: tight, bids: vec![bid] },
    ];
    let res = resolve_conflicts(&candidates, 8, |_, b| vec![0.5; b.len()]);
    assert_eq!(res.assignments, vec![(1, 0)]);
    assert_eq!(res.rounds, 1);
}

#[test]
fn disabled_negotiation_uses_earliest_available() {
    let mut cfg = ScenarioConfig::desk();
    cfg.toggles.negotiation = false;
    let machines = new_scenario(&cfg, 0).unwrap().machines.len();
    let neg = Negotiator::new(machines, NegotiationConfig::default());
    for seed in 0..4 {
        let plain = EvalPolicy::heuristic(HeuristicKind::Edf).guided();
        let with_neg = EvalPolicy { negotiator: Some(&neg), ..plain };
        let a = run_episode(&cfg, seed, &plain, true).unwrap();
        let b = run_episode(&cfg, seed, &with_neg, true).unwrap();
        assert!(a.negotiation_rounds.is_empty() && b.negotiation_rounds.is_empty());
        assert_eq!(a.metrics, b.metrics);
        assert_eq!(a.state.events(), b.state.events());
    }

    let state = new_scenario(&cfg, 0).unwrap();
    let raw = state.feasible_actions();
    let proposals = earliest_available(&state);
    assert!(!proposals.is_empty());
    let mask = restrict_mask(&state, &proposals, &raw);
    let space = state.action_space();
    for (slot, &job) in state.job_view.iter().enumerate() {
        for m in 0..state.machines.len() {
            assert_eq!(mask[space.encode(slot, m)], proposals.contains(&(job, m)));
        }
    }

    cfg.toggles.negotiation = true;
    let on = run_episode(&cfg, 0, &EvalPolicy::heuristic(HeuristicKind::Edf).with_allocation(Allocation::Guided), false).unwrap();
    assert!(!on.negotiation_rounds.is_empty());
}

#[test]
fn negotiator_state_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut neg = negotiator(2);
    neg.train(&records(&mut rng, 4, |r| r.random_range(0.0..1.0))).unwrap();
    let back = Negotiator::from_json(&neg.to_json()).unwrap();
    let values = |m: &dyn Module| m.params().iter().map(|p| p.data.clone()).collect::<Vec<_>>();
    assert_eq!(values(&back.scorer), values(&neg.scorer));
    assert_eq!(values(&back.head), values(&neg.head));
    assert_eq!(back.updates, 1);
    assert!(matches!(Negotiator::from_json("{}"), Err(NegotiationError::Corrupt(_))));
}
