use std::time::Instant;

use rms_sched::baselines::HeuristicKind;
use rms_sched::sim::ScenarioConfig;
use rms_sched::trainer::{
    evaluate, read_train_log, run_training, run_training_with, write_train_log, EvalPolicy, TrainConfig, TrainError,
};

#[test]
fn zero_episodes_leave_agent_untouched() {
    let cfg = TrainConfig { episodes: 0, ..TrainConfig::smoke() };
    let out = run_training(&TrainConfig::smoke_scenario(), &cfg).unwrap();
    assert!(out.log.is_empty());
    assert_eq!(out.agent.learn_steps, 0);
    let fresh = run_training(&TrainConfig::smoke_scenario(), &cfg).unwrap();
    assert_eq!(out.agent.checksum(), fresh.agent.checksum());
}

#[test]
fn smoke_run_is_fast_and_logs_every_episode() {
    let cfg = TrainConfig::smoke();
    let t0 = Instant::now();
    let out = run_training(&TrainConfig::smoke_scenario(), &cfg).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    assert!(secs < 30.0, "smoke run took {secs:.1}s");
    assert_eq!(out.log.len(), 30);
    for (e, row) in out.log.rows.iter().enumerate() {
        assert_eq!(row.episode, e);
        assert!(row.loss_mean.is_finite() && row.reward.is_finite());
    }
    assert!(out.agent.learn_steps > 0);
}

#[test]
fn epsilon_trace_is_monotone_and_floored() {
    let cfg = TrainConfig {
        episodes: 60,
        agent: rms_sched::agent::AgentConfig { epsilon_decay: 0.9, ..TrainConfig::smoke().agent },
        ..TrainConfig::smoke()
    };
    let out = run_training(&TrainConfig::smoke_scenario(), &cfg).unwrap();
    let eps = out.log.epsilons();
    assert_eq!(eps[0], 1.0);
    for (e, w) in eps.windows(2).enumerate() {
        assert!(w[1] <= w[0], "episode {e}");
    }
    for (e, &x) in eps.iter().enumerate() {
        let expected = 0.9f64.powi(e as i32).max(0.05);
        assert!((x - expected).abs() < 1e-12, "episode {e}: {x} vs {expected}");
    }
    assert_eq!(*eps.last().unwrap(), 0.05);
}

#[test]
fn no_learning_before_warmup() {
    let mut cfg = TrainConfig { episodes: 3, ..TrainConfig::smoke() };
    cfg.replay.warmup = 1_000_000;
    let out = run_training(&TrainConfig::smoke_scenario(), &cfg).unwrap();
    assert!(out.log.rows.iter().all(|r| r.learn_steps == 0));
    assert_eq!(out.agent.learn_steps, 0);
}

#[test]
fn reward_improves_on_smoke_config() {
    let scenario = TrainConfig::smoke_scenario();
    for seed in 0..5 {
        let out = run_training(&scenario, &TrainConfig { seed, ..TrainConfig::smoke() }).unwrap();
        let r = out.log.rewards();
        let k = (r.len() / 10).max(1);
        let first = r[..k].iter().sum::<f64>() / k as f64;
        let last = r[r.len() - k..].iter().sum::<f64>() / k as f64;
        assert!(last > first, "seed {seed}: first {first:.3}, last {last:.3}");
    }
}

#[test]
fn training_is_reproducible_and_log_round_trips() {
    let cfg = TrainConfig { episodes: 5, ..TrainConfig::smoke() };
    let scenario = TrainConfig::smoke_scenario();
    let a = run_training(&scenario, &cfg).unwrap();
    let b = run_training(&scenario, &cfg).unwrap();
    let (mut ca, mut cb) = (Vec::new(), Vec::new());
    write_train_log(&a.log, &mut ca).unwrap();
    write_train_log(&b.log, &mut cb).unwrap();
    assert_eq!(ca, cb);
    assert_eq!(a.agent.checksum(), b.agent.checksum());
    assert_eq!(read_train_log(ca.as_slice()).unwrap(), a.log);
}

#[test]
fn checkpoint_hook_cadence() {
    let cfg = TrainConfig { episodes: 7, checkpoint_every: 3, ..TrainConfig::smoke() };
    let mut seen = Vec::new();
    run_training_with(&TrainConfig::smoke_scenario(), &cfg, |e, _| {
        seen.push(e);
        Ok(())
    })
    .unwrap();
    assert_eq!(seen, vec![2, 5]);
}

#[test]
fn invalid_config_is_rejected() {
    let cfg = TrainConfig { n_step: 0, ..TrainConfig::smoke() };
    assert!(matches!(run_training(&TrainConfig::smoke_scenario(), &cfg), Err(TrainError::InvalidConfig(_))));
}

#[test]
fn evaluation_is_deterministic_and_pure() {
    let scenario = ScenarioConfig::desk();
    let random = EvalPolicy::heuristic(HeuristicKind::Random);
    let a = evaluate(&scenario, &random, &[1, 2], 3, true).unwrap();
    let b = evaluate(&scenario, &random, &[1, 2], 3, false).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.rows.len(), 6);
    let hand = a.rows.iter().map(|r| r.metrics.makespan).sum::<f64>() / 6.0;
    assert!((a.summary.makespan.mean - hand).abs() < 1e-9);

    let out = run_training(&TrainConfig::smoke_scenario(), &TrainConfig { episodes: 3, ..TrainConfig::smoke() }).unwrap();
    let before = out.agent.checksum();
    let policy = EvalPolicy::dqn(&out.agent, out.negotiator.as_ref());
    evaluate(&TrainConfig::smoke_scenario(), &policy, &[0], 2, true).unwrap();
    assert_eq!(out.agent.checksum(), before);
}

#[test]
fn evaluation_rejects_foreign_scenario() {
    let out = run_training(&TrainConfig::smoke_scenario(), &TrainConfig { episodes: 0, ..TrainConfig::smoke() }).unwrap();
    let policy = EvalPolicy::dqn(&out.agent, None);
    assert!(matches!(evaluate(&ScenarioConfig::desk(), &policy, &[0], 1, false), Err(TrainError::SpecMismatch(_))));
}
