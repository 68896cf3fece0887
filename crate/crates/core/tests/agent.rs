use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rms_sched::agent::{AgentConfig, AgentError, EnhancedDqn, Mode, ObservationSpec};
use rms_sched::nn::Matrix;
use rms_sched::replay::Transition;

fn small_spec() -> ObservationSpec {
    ObservationSpec::new(3, 4, 3)
}

fn random_obs(spec: &ObservationSpec, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..spec.dim()).map(|_| rng.random_range(-2.0..2.0)).collect()
}

fn random_mask(n: usize, rng: &mut ChaCha8Rng) -> Vec<bool> {
    let mut m: Vec<bool> = (0..n).map(|_| rng.random_bool(0.3)).collect();
    m[n - 1] = true;
    m
}

#[test]
fn only_idle_valid_returns_idle() {
    let spec = small_spec();
    let mut agent = EnhancedDqn::new(spec, AgentConfig::default());
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut mask = vec![false; spec.actions()];
    mask[spec.actions() - 1] = true;
    for _ in 0..50 {
        let obs = random_obs(&spec, &mut rng);
        assert_eq!(agent.act(&obs, &mask, Mode::Train).unwrap(), spec.actions() - 1);
        assert_eq!(agent.act(&obs, &mask, Mode::Eval).unwrap(), spec.actions() - 1);
    }
}

#[test]
fn masked_actions_never_chosen() {
    let spec = small_spec();
    let mut agent = EnhancedDqn::new(spec, AgentConfig { epsilon_start: 0.5, ..AgentConfig::default() });
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let obs = random_obs(&spec, &mut rng);
    for i in 0..100_000 {
        let mask = random_mask(spec.actions(), &mut rng);
        let mode = if i % 2 == 0 { Mode::Train } else { Mode::Eval };
        let a = agent.act(&obs, &mask, mode).unwrap();
        assert!(mask[a]);
    }
}

#[test]
fn full_exploration_is_uniform() {
    let spec = small_spec();
    let mut agent = EnhancedDqn::new(spec, AgentConfig { epsilon_min: 1.0, ..AgentConfig::default() });
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let obs = random_obs(&spec, &mut rng);
    let mut mask = vec![false; spec.actions()];
    for i in [0, 4, 7, spec.actions() - 1] {
        mask[i] = true;
    }
    let mut counts = std::collections::BTreeMap::new();
    for _ in 0..10_000 {
        *counts.entry(agent.act(&obs, &mask, Mode::Train).unwrap()).or_insert(0usize) += 1;
    }
    assert_eq!(counts.len(), 4);
    for c in counts.values() {
        assert!((*c as f64 / 1e4 - 0.25).abs() < 0.02, "{counts:?}");
    }
}

#[test]
fn greedy_is_deterministic_without_noise() {
    let spec = small_spec();
    let cfg = AgentConfig { epsilon_greedy: false, noisy: false, ..AgentConfig::default() };
    let mut agent = EnhancedDqn::new(spec, cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let obs = random_obs(&spec, &mut rng);
    let mask = vec![true; spec.actions()];
    let first = agent.act(&obs, &mask, Mode::Train).unwrap();
    for _ in 0..20 {
        assert_eq!(agent.act(&obs, &mask, Mode::Train).unwrap(), first);
    }
}

#[test]
fn epsilon_decays_to_floor() {
    let mut agent = EnhancedDqn::new(small_spec(), AgentConfig::default());
    let mut last = agent.epsilon;
    for e in 1..=1000 {
        agent.decay_epsilon();
        assert!(agent.epsilon <= last);
        let expected = (0.995f64.powi(e)).max(0.05);
        assert!((agent.epsilon - expected).abs() < 1e-12);
        last = agent.epsilon;
    }
    assert_eq!(agent.epsilon, 0.05);
}

fn fixture_transition(spec: &ObservationSpec, rng: &mut ChaCha8Rng, done: bool) -> Transition {
    Transition {
        obs: random_obs(spec, rng),
        action: 2,
        n_step_return: 1.5,
        boot_obs: random_obs(spec, rng),
        boot_mask: vec![true; spec.actions()],
        done,
        gamma_n: 0.99,
        aux_target: 0.5,
    }
}

#[test]
fn single_transition_overfits() {
    let spec = small_spec();
    let cfg = AgentConfig { noisy: false, ..AgentConfig::default() };
    let mut agent = EnhancedDqn::new(spec, cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let t = fixture_transition(&spec, &mut rng, true);
    let mut last = f64::INFINITY;
    for _ in 0..200 {
        last = agent.learn_step(&[&t], &[1.0]).unwrap().td_errors[0];
    }
    let q = agent.q_values(&t.obs).unwrap()[2];
    assert!(last < 1e-2 && (q - 1.5).abs() < 1e-2, "td {last}, q {q}");
}

#[test]
fn learn_step_targets_match_independent_recomputation() {
    let spec = small_spec();
    let cfg = AgentConfig { noisy: false, ..AgentConfig::default() };
    let mut agent = EnhancedDqn::new(spec, cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let batch: Vec<Transition> = (0..8).map(|i| fixture_transition(&spec, &mut rng, i % 3 == 0)).collect();
    let refs: Vec<&Transition> = batch.iter().collect();
    let before = agent.clone();
    let report = agent.learn_step(&refs, &[1.0; 8]).unwrap();
    for (i, t) in batch.iter().enumerate() {
        let q_s = before.online.q_values(&t.obs, rms_sched::nn::NoiseMode::Off).unwrap();
        let y = if t.done {
            t.n_step_return
        } else {
            let on = before.online.q_values(&t.boot_obs, rms_sched::nn::NoiseMode::Off).unwrap();
            let tg = before.target.q_values(&t.boot_obs, rms_sched::nn::NoiseMode::Off).unwrap();
            let a = (0..on.len()).fold(0, |b, k| if on[k] > on[b] { k } else { b });
            t.n_step_return + t.gamma_n * tg[a]
        };
        assert!((report.targets[i] - y).abs() < 1e-9);
        assert!((report.td_errors[i] - (q_s[t.action] - y).abs()).abs() < 1e-9);
    }
}

#[test]
fn target_moves_by_convex_combination() {
    let spec = small_spec();
    let mut agent = EnhancedDqn::new(spec, AgentConfig::default());
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let t = fixture_transition(&spec, &mut rng, false);
    for _ in 0..5 {
        let old_target = agent.target.clone();
        agent.learn_step(&[&t], &[1.0]).unwrap();
        use rms_sched::nn::Module;
        let mut changed = false;
        for ((o, n), on) in old_target.params().iter().zip(agent.target.params()).zip(agent.online.params()) {
            for k in 0..o.len() {
                let (lo, hi) = (o.data[k].min(on.data[k]), o.data[k].max(on.data[k]));
                assert!(n.data[k] >= lo - 1e-15 && n.data[k] <= hi + 1e-15);
                changed |= n.data[k] != o.data[k];
            }
        }
        assert!(changed);
    }
}

#[test]
fn checkpoint_round_trip() {
    let spec = small_spec();
    let mut agent = EnhancedDqn::new(spec, AgentConfig { seed: 9, ..AgentConfig::default() });
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let raw = random_obs(&spec, &mut rng);
        agent.prepare(&raw, true).unwrap();
    }
    let t = fixture_transition(&spec, &mut rng, false);
    for _ in 0..3 {
        agent.learn_step(&[&t], &[1.0]).unwrap();
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("agent.json");
    agent.save(&path).unwrap();
    let loaded = EnhancedDqn::load(&path, Some(&spec)).unwrap();
    assert_eq!(loaded.checksum(), agent.checksum());
    assert_eq!(loaded.norm, agent.norm);
    for _ in 0..100 {
        let obs = random_obs(&spec, &mut rng);
        let mask = random_mask(spec.actions(), &mut rng);
        assert_eq!(loaded.act_greedy(&obs, &mask).unwrap(), agent.act_greedy(&obs, &mask).unwrap());
    }

    let text = std::fs::read_to_string(&path).unwrap();
    let truncated = &text[..text.len() / 2];
    assert!(matches!(EnhancedDqn::from_json(truncated, None), Err(AgentError::CorruptCheckpoint(_))));
    let other = ObservationSpec::new(4, 4, 3);
    assert!(matches!(EnhancedDqn::from_json(&text, Some(&other)), Err(AgentError::SchemaVersionMismatch(_))));
    let retagged = text.replace("rms-sched-checkpoint/v1", "rms-sched-checkpoint/v0");
    assert!(matches!(EnhancedDqn::from_json(&retagged, None), Err(AgentError::SchemaVersionMismatch(_))));
}

#[test]
fn learn_step_cost_is_bounded() {
    // reference-sized network, batch 64
    let spec = ObservationSpec::new(5, 6, 10);
    let mut agent = EnhancedDqn::new(spec, AgentConfig::default());
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let batch: Vec<Transition> = (0..64)
        .map(|_| Transition {
            obs: random_obs(&spec, &mut rng),
            action: rng.random_range(0..spec.actions()),
            n_step_return: 1.0,
            boot_obs: random_obs(&spec, &mut rng),
            boot_mask: vec![true; spec.actions()],
            done: false,
            gamma_n: 0.97,
            aux_target: 0.0,
        })
        .collect();
    let refs: Vec<&Transition> = batch.iter().collect();
    let start = std::time::Instant::now();
    for _ in 0..50 {
        agent.learn_step(&refs, &[1.0; 64]).unwrap();
    }
    let per = start.elapsed().as_secs_f64() / 50.0;
    eprintln!("learn_step: {:.2} ms", per * 1e3);
    assert!(per < 0.25);
    let _ = Matrix::zeros(1, 1);
}
