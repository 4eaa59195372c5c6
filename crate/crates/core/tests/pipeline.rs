use std::io::Write;
use std::process::{Command, Stdio};

use coin_lnn::agent::{evaluate_episode, Agent, Choice, LnnPolicy, Mode, QFunction, TrainerConfig, Transition};
use coin_lnn::factextract::PropositionSet;
use coin_lnn::harness::{run_experiment, ExperimentConfig};
use coin_lnn::lexicon::{Category, LexiconTable};
use coin_lnn::lnn::LnnNetwork;
use coin_lnn::worldsim::{generate_game, Action, Difficulty, Direction, GameSpec};

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_coin-lnn"))
}

#[test]
fn replaying_an_action_sequence_is_deterministic() {
    let g = generate_game(&GameSpec::new(Difficulty::Hard, 7, 31)).unwrap();
    let actions: Vec<Action> = (0..60).map(|i| Action::all()[(i * 7 + 3) % Action::COUNT]).collect();
    let run = || {
        let (mut s, first) = g.reset().unwrap();
        let mut trace = vec![first];
        for &a in &actions {
            if s.done {
                break;
            }
            let o = g.step(&mut s, a).unwrap();
            trace.push(format!("{}|{}|{}", o.observation, o.quest_reward, o.action_valid));
        }
        trace
    };
    assert_eq!(run(), run());
}

#[test]
fn untrained_greedy_agent_rarely_succeeds() {
    let policy = LnnPolicy::new(LexiconTable::bundled()).unwrap();
    let mut success = 0.0;
    let mut steps = 0.0;
    for seed in 0..20 {
        let g = generate_game(&GameSpec::new(Difficulty::Easy, 5, seed)).unwrap();
        let r = evaluate_episode(&policy, &g, 0, false, 1.0).unwrap();
        success += r.quest_reward;
        steps += r.steps as f64;
    }
    assert!(success <= 2.0);
    assert!(steps / 20.0 > 90.0);
}

#[test]
fn zero_rewards_do_not_change_the_greedy_choice() {
    let mut agent = Agent::new(
        LnnPolicy::new(LexiconTable::bundled()).unwrap(),
        TrainerConfig::default(),
        4,
    )
    .unwrap();
    let states: Vec<PropositionSet> = (0..16u32)
        .map(|m| {
            let b = |i: u32| m >> i & 1 == 1;
            PropositionSet::from_positive([b(0), b(1), b(2), b(3), false], [b(1), false, b(2), false], [false; 4])
        })
        .collect();
    let before: Vec<usize> = states
        .iter()
        .map(|s| coin_lnn::agent::argmax_first(&agent.online.q_values(s, &agent.online.choices(s))))
        .collect();
    for s in &states {
        for c in agent.online.choices(s) {
            agent.replay.push(Transition {
                obs: *s,
                choice: c,
                reward: 0.0,
                next_obs: *s,
                next_choices: vec![],
                terminal: true,
            });
        }
    }
    for _ in 0..200 {
        agent.train_step().unwrap();
    }
    let after: Vec<usize> = states
        .iter()
        .map(|s| coin_lnn::agent::argmax_first(&agent.online.q_values(s, &agent.online.choices(s))))
        .collect();
    assert_eq!(before, after);
}

#[test]
fn induction_respects_gate_cap_over_a_run() {
    let config = ExperimentConfig::parse("difficulty=hard\nseeds=1\nepochs=60\ngate_cap=2\nn_train_games=10").unwrap();
    let result = run_experiment(&config, false).unwrap();
    let coin_lnn::harness::TrainedPolicy::Lnn(p) = &result.seeds[0].policy else {
        panic!("expected an LNN policy")
    };
    assert!(p.networks.values().all(|n| n.gate_count() <= 2));
    assert!(result.seeds[0].inductions <= 4);
}

#[test]
fn training_trace_lines_have_six_fields() {
    let g = generate_game(&GameSpec::new(Difficulty::Medium, 3, 2)).unwrap();
    let mut agent = Agent::new(
        LnnPolicy::new(LexiconTable::bundled()).unwrap(),
        TrainerConfig::default(),
        0,
    )
    .unwrap();
    let r = agent.run_episode(&g, Mode::Train, 0, true).unwrap();
    assert_eq!(r.trace.len() as u32, r.steps);
    for (i, line) in r.trace.iter().enumerate() {
        let text = line.to_string();
        let fields: Vec<&str> = text.split('\t').collect();
        assert_eq!(fields.len(), 6);
        assert_eq!(fields[1], (i + 1).to_string());
        assert_eq!(fields[2].len(), 26);
        assert_eq!(fields[4].split(',').count(), 5);
    }
}

#[test]
fn custom_lexicon_without_money_drops_take() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lex.tsv");
    std::fs::write(
        &path,
        "# directions only\nnorth\tdirection\neast\tdirection\nsouth\tdirection\nwest\tdirection\n",
    )
    .unwrap();
    assert!(LexiconTable::load(&path).is_err());
    let lex = LexiconTable::parse_unchecked(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let policy = LnnPolicy::new(lex).unwrap();
    let p = PropositionSet::from_positive([true, false, false, false, true], [false; 4], [false; 4]);
    let choices = policy.choices(&p);
    assert_eq!(choices.len(), 4);
    assert!(!choices.contains(&Choice {
        action: Action::take_coin(),
        category: Some(Category::money())
    }));
}

#[test]
fn checkpoint_files_round_trip_exactly() {
    let mut net = LnnNetwork::new(Category::direction()).unwrap();
    net.and_gates[0].weights[3] = 0.1 + 0.2;
    net.or_root.bias = std::f64::consts::PI / 7.0;
    let back = LnnNetwork::from_checkpoint(&net.to_checkpoint()).unwrap();
    assert_eq!(back, net);
}

#[test]
fn cli_generate_and_play() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("game.txt");
    std::fs::write(&spec, "difficulty=medium\nlevel=4\nseed=12\n").unwrap();
    let out = cli()
        .args(["generate", "--spec", spec.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    let dump = String::from_utf8(out.stdout).unwrap();
    assert!(dump.starts_with("# difficulty=medium level=4 seed=12"));

    let g = generate_game(&GameSpec::new(Difficulty::Medium, 4, 12)).unwrap();
    let open: Vec<Direction> = g.rooms()[g.start.0].open_exits().collect();
    let mut child = cli()
        .args(["play", "--spec", spec.to_str().unwrap()])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    write!(child.stdin.take().unwrap(), "help\ngo {}\nfacts\nquit\n", open[0]).unwrap();
    let out = child.wait_with_output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("commands:"));
    assert!(text.contains(&format!("visited({})", open[0].opposite())));
}

#[test]
fn cli_rejects_bad_config_and_overlap() {
    let out = cli()
        .args(["train", "--out", "/nonexistent/x", "--set", "bogus=1"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown key"));
    let out = cli()
        .args(["train", "--out", "/nonexistent/x", "--set", "test_seed_offset=3"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("also a training game"));
}

#[test]
fn cli_train_trace_and_compare() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let out = cli()
        .args([
            "--trace",
            "train",
            "--out",
            run.to_str().unwrap(),
            "--set",
            "seeds=1",
            "--set",
            "epochs=20",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.lines().next().unwrap().starts_with("seed0\t0\t1\t"));
    assert!(run.join("trace_seed0.tsv").exists());
    assert!(run.join("checkpoints/seed0/direction.lnn").exists());
    assert!(run.join("checkpoints/seed0/optimizer.txt").exists());

    let csv = run.join("metrics.csv");
    let out = cli()
        .args([
            "compare",
            csv.to_str().unwrap(),
            csv.to_str().unwrap(),
            "--thresholds",
            "0.5,1.1",
        ])
        .output()
        .unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("mean_test_reward\t1.1\tnot reached\tnot reached\tnot reached"));
}
