//! Acceptance checks, one pass/fail line per criterion.
//!
//! Runs without the libtest harness so that every line is printed even when
//! earlier criteria fail. The end-to-end criteria train the desk preset into
//! a temporary directory and take a few minutes.

use std::collections::BTreeSet;
use std::path::Path;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use decopt::decompose::{build_neural_tree, enumerate_subpolicies, whole_policy, TreeNode};
use decopt::env::Observation;
use decopt::grid::{combo, Cell, ComboState, DomainKind, GridSpec, Layout, Phase};
use decopt::harness::{run_all, select, ExperimentConfig, Mode, SeedOutcome, SeedPaths};
use decopt::nn::{Head, LayerParams, Mlp, MlpPolicy, ValueNet};
use decopt::options::{
    compute_loss, generate_candidates, greedy_select, read_selection_log, uniform_probability,
    CandidateLimits, Exclusion, OptionDef, OptionLibrary, Trajectory,
};
use decopt::trainer::{ppo_gradients, LossCoefs, Sample};

const COEFF_TOL: f64 = 1e-12;
const TREE_TOL: f64 = 1e-9;
const GRAD_REL_TOL: f64 = 1e-4;
const FD_STEP: f64 = 1e-5;
const DESK_SEEDS: usize = 10;
const MIN_AUC_WINS: usize = 8;
const TARGET_RETURN: f64 = 40.0;

type Check = std::result::Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_net(rng: &mut ChaCha8Rng, sizes: &[usize], scale: f64) -> Mlp {
    let layers = sizes
        .windows(2)
        .map(|w| {
            let mut l = LayerParams::zeros(w[0], w[1]);
            for v in l.weights.iter_mut().chain(l.biases.iter_mut()) {
                *v = rng.gen_range(-scale..scale);
            }
            l
        })
        .collect();
    Mlp::new(layers).expect("consistent sizes")
}

fn figure_one_tree() -> Check {
    let hidden = LayerParams::from_rows(&[&[2.0, 1.0], &[-2.0, -1.0]], &[1.0, 1.0]);
    let out = LayerParams::from_rows(&[&[-1.0, 1.0]], &[1.0]);
    let policy = MlpPolicy::new(Mlp::new(vec![hidden, out]).unwrap(), Head::Sigmoid).unwrap();
    let tree = build_neural_tree(&policy).map_err(|e| e.to_string())?;
    let close = |a: &[f64], b: &[f64]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= COEFF_TOL);
    match &tree.nodes[tree.root] {
        TreeNode::Internal { coeffs, offset, .. } => ensure(
            close(coeffs, &[2.0, 1.0]) && (offset - 1.0).abs() <= COEFF_TOL,
            || format!("root test is {coeffs:?} . x + {offset}"),
        )?,
        TreeNode::Leaf { .. } => return Err("root is a leaf".into()),
    }
    let mut expected = vec![
        ([0.0, 0.0], 1.0),
        ([-2.0, -1.0], 2.0),
        ([-2.0, -1.0], 0.0),
        ([-4.0, -2.0], 1.0),
    ];
    let leaves = tree.leaves();
    ensure(leaves.len() == 4, || format!("{} leaves", leaves.len()))?;
    for leaf in leaves {
        let TreeNode::Leaf { coeffs, offset, .. } = leaf else {
            return Err("leaves() returned an internal node".into());
        };
        let pos = expected
            .iter()
            .position(|(c, o)| close(coeffs, c) && (offset[0] - o).abs() <= COEFF_TOL)
            .ok_or_else(|| format!("unexpected leaf {coeffs:?} . x + {offset:?}"))?;
        expected.remove(pos);
    }
    Ok(())
}

fn subpolicy_counts() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for d in 1..=8usize {
        let policy = MlpPolicy::new(random_net(&mut rng, &[3, d, 2], 1.0), Head::Softmax).unwrap();
        let subs = enumerate_subpolicies(Arc::new(policy), 0, 14).map_err(|e| e.to_string())?;
        let want = 3usize.pow(d as u32);
        ensure(subs.len() == want, || format!("d={d}: {} masks, want {want}", subs.len()))?;
        let distinct: BTreeSet<String> = subs.iter().map(|s| s.mask.to_string()).collect();
        ensure(distinct.len() == want, || format!("d={d}: duplicate masks"))?;
        if d == 2 {
            ensure(subs.len() == 9, || "d=2 does not give 9".into())?;
        }
    }
    Ok(())
}

fn appendix_fixture() -> Check {
    let obs = vec![Observation(vec![0.0]); 6];
    let traj = Trajectory::new(0, obs, vec![0, 0, 1, 1, 0]).unwrap();
    let options = [OptionDef::from_sequence(vec![0, 0]), OptionDef::from_sequence(vec![0, 1, 1])];
    let loss = compute_loss(&traj, 0.25, &options).map_err(|e| e.to_string())?;
    ensure(loss.loss() == 384.0, || format!("loss {}", loss.loss()))?;
    ensure(loss.table[5] == 3, || format!("M[5] = {}", loss.table[5]))
}

fn dp_matches_brute_force() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for case in 0..1000 {
        let n_actions = rng.gen_range(1..=8);
        let actions: Vec<usize> = (0..n_actions).map(|_| rng.gen_range(0..3)).collect();
        let observations: Vec<Observation> = (0..=n_actions)
            .map(|_| Observation((0..4).map(|_| rng.gen_range(-1.0..1.0)).collect()))
            .collect();
        let traj = Trajectory::new(0, observations.clone(), actions.clone()).unwrap();
        let n_options = rng.gen_range(0..=3);
        let mut options = Vec::new();
        // What each option plays when started in each state, per iteration.
        let mut plays_at: Vec<Vec<Vec<Option<usize>>>> = vec![Vec::new(); n_actions];
        for _ in 0..n_options {
            let z = rng.gen_range(1..=4);
            if rng.gen_bool(0.5) {
                let seq: Vec<usize> = (0..z).map(|_| rng.gen_range(0..3)).collect();
                for plays in plays_at.iter_mut() {
                    plays.push(seq.iter().map(|&a| Some(a)).collect());
                }
                options.push(OptionDef::from_sequence(seq));
            } else {
                let policy = MlpPolicy::new(random_net(&mut rng, &[4, 3, 3], 2.0), Head::Softmax).unwrap();
                for (j, plays) in plays_at.iter_mut().enumerate() {
                    plays.push(
                        (0..z)
                            .map(|k| observations.get(j + k).map(|o| policy.greedy_action(&o.0).unwrap()))
                            .collect(),
                    );
                }
                let sub = whole_policy(Arc::new(policy), 0).unwrap();
                options.push(OptionDef::from_subpolicy(sub, z));
            }
        }
        let p = uniform_probability(3, n_options);
        let dp = compute_loss(&traj, p, &options).map_err(|e| e.to_string())?;
        let brute = brute_force(0, &actions, &plays_at);
        ensure(dp.decisions() == brute, || {
            format!("case {case}: dp {} vs brute force {brute}", dp.decisions())
        })?;
    }
    Ok(())
}

/// Fewest decisions covering `actions[j..]`, trying every segmentation.
/// `plays_at[j]` lists what each option would play when started in state `j`.
fn brute_force(j: usize, actions: &[usize], plays_at: &[Vec<Vec<Option<usize>>>]) -> usize {
    if j == actions.len() {
        return 0;
    }
    let mut best = 1 + brute_force(j + 1, actions, plays_at);
    for plays in &plays_at[j] {
        let fits = plays.len() <= actions.len() - j
            && plays.iter().enumerate().all(|(k, a)| *a == Some(actions[j + k]));
        if fits {
            best = best.min(1 + brute_force(j + plays.len(), actions, plays_at));
        }
    }
    best
}

fn tree_matches_network() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..1000 {
        let d = rng.gen_range(1..=6);
        let inputs = rng.gen_range(1..=5);
        let sigmoid = rng.gen_bool(0.25);
        let outputs = if sigmoid { 1 } else { rng.gen_range(2..=4) };
        let head = if sigmoid { Head::Sigmoid } else { Head::Softmax };
        let policy = MlpPolicy::new(random_net(&mut rng, &[inputs, d, outputs], 1.5), head).unwrap();
        let tree = build_neural_tree(&policy).map_err(|e| e.to_string())?;
        for _ in 0..10 {
            let x: Vec<f64> = (0..inputs).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let want = policy.forward(&x).map_err(|e| e.to_string())?.probs;
            let got = tree.forward(&x).map_err(|e| e.to_string())?;
            let gap = want.iter().zip(&got).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            ensure(gap <= TREE_TOL, || format!("case {case}: gap {gap:e}"))?;
            let logits = policy.logits(&x).map_err(|e| e.to_string())?;
            let pre = tree.pre_head(&x).map_err(|e| e.to_string())?;
            let gap = logits.iter().zip(&pre).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            ensure(gap <= TREE_TOL, || format!("case {case}: pre-head gap {gap:e}"))?;
        }
    }
    Ok(())
}

fn relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let diff: f64 = analytic.iter().zip(numeric).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let scale = analytic.iter().map(|a| a * a).sum::<f64>().sqrt() + numeric.iter().map(|b| b * b).sum::<f64>().sqrt();
    if scale < 1e-12 {
        0.0
    } else {
        diff / scale
    }
}

fn gradient_check() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for case in 0..20 {
        let obs_len = rng.gen_range(2..=5);
        let hidden = rng.gen_range(2..=6);
        let n_actions = rng.gen_range(2..=4);
        let policy = MlpPolicy::new(random_net(&mut rng, &[obs_len, hidden, n_actions], 1.0), Head::Softmax).unwrap();
        let value = ValueNet::new(random_net(&mut rng, &[obs_len, 5, 4, 1], 1.0)).unwrap();
        let n = rng.gen_range(3..=8);
        let obs: Vec<Vec<f64>> = (0..n).map(|_| (0..obs_len).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let samples: Vec<Sample> = obs
            .iter()
            .map(|o| {
                let action = rng.gen_range(0..n_actions);
                let lp = policy.forward(o).unwrap().probs[action].ln();
                Sample {
                    obs: o,
                    action,
                    old_log_prob: lp + rng.gen_range(-0.4..0.4),
                    advantage: rng.gen_range(-2.0..2.0),
                    target: rng.gen_range(-2.0..2.0),
                }
            })
            .collect();
        let coefs = LossCoefs {
            clip_epsilon: 0.2,
            entropy_coef: 0.01,
            value_loss_coef: 0.5,
        };
        let (_, grads) = ppo_gradients(&policy, &value, &samples, coefs).map_err(|e| e.to_string())?;
        let loss = |p: &MlpPolicy, v: &ValueNet| ppo_gradients(p, v, &samples, coefs).unwrap().0.total;

        let base = policy.net.flat();
        let mut numeric = vec![0.0; base.len()];
        let mut probe = policy.clone();
        for i in 0..base.len() {
            let mut x = base.clone();
            x[i] += FD_STEP;
            probe.net.set_flat(&x);
            let up = loss(&probe, &value);
            x[i] -= 2.0 * FD_STEP;
            probe.net.set_flat(&x);
            let down = loss(&probe, &value);
            numeric[i] = (up - down) / (2.0 * FD_STEP);
        }
        let err = relative_error(&grads.policy.flat(), &numeric);
        ensure(err <= GRAD_REL_TOL, || format!("case {case}: policy relative error {err:e}"))?;

        let base = value.net.flat();
        let mut numeric = vec![0.0; base.len()];
        let mut probe = value.clone();
        for i in 0..base.len() {
            let mut x = base.clone();
            x[i] += FD_STEP;
            probe.net.set_flat(&x);
            let up = loss(&policy, &probe);
            x[i] -= 2.0 * FD_STEP;
            probe.net.set_flat(&x);
            let down = loss(&policy, &probe);
            numeric[i] = (up - down) / (2.0 * FD_STEP);
        }
        let err = relative_error(&grads.value.flat(), &numeric);
        ensure(err <= GRAD_REL_TOL, || format!("case {case}: value relative error {err:e}"))?;
    }
    Ok(())
}

const ORACLE_COMBOS: [(&str, (isize, isize)); 4] =
    [("0221", (1, 0)), ("0011", (-1, 0)), ("1210", (0, 1)), ("1022", (0, -1))];

fn combo_dynamics() -> Check {
    let spec = GridSpec {
        kind: DomainKind::Combogrid,
        phase: Phase::Source,
        width: 5,
        height: 5,
        walls: vec![],
        starts: vec![Cell(2, 2)],
        start_facing: None,
        goals: vec![Cell(4, 4)],
        max_steps: 1000,
    };
    let layout = Layout::new(spec).map_err(|e| e.to_string())?;
    let digits = |s: &str| s.bytes().map(|b| (b - b'0') as usize).collect::<Vec<_>>();
    for (combo, (dr, dc)) in ORACLE_COMBOS {
        let mut state = ComboState::initial(&layout, Cell(2, 2));
        let actions = digits(combo);
        for (i, &a) in actions.iter().enumerate() {
            state = combo::step(&state, &layout, a).map_err(|e| e.to_string())?.0;
            if i < 3 {
                ensure(state.agent == Cell(2, 2), || format!("{combo}: moved early"))?;
            }
        }
        let want = Cell((2 + dr) as usize, (2 + dc) as usize);
        ensure(state.agent == want && state.buffer.is_empty(), || {
            format!("{combo}: ended at {:?} with buffer {:?}", state.agent, state.buffer)
        })?;
    }
    let prefixes: BTreeSet<String> = ORACLE_COMBOS
        .iter()
        .flat_map(|(c, _)| (0..4).map(move |k| c[..k].to_string()))
        .collect();
    for buffer in &prefixes {
        for a in 0..3usize {
            let mut state = ComboState::initial(&layout, Cell(2, 2));
            state.buffer = digits(buffer);
            let (next, _) = combo::step(&state, &layout, a).map_err(|e| e.to_string())?;
            let extended = format!("{buffer}{a}");
            let completes = ORACLE_COMBOS.iter().find(|(c, _)| *c == extended);
            if let Some((_, (dr, dc))) = completes {
                let want = Cell((2 + dr) as usize, (2 + dc) as usize);
                ensure(next.agent == want && next.buffer.is_empty(), || format!("{extended}: bad move"))?;
            } else if prefixes.contains(&extended) {
                ensure(next.agent == Cell(2, 2) && next.buffer == digits(&extended), || {
                    format!("{extended}: prefix not kept")
                })?;
            } else {
                ensure(next.agent == Cell(2, 2) && next.buffer.is_empty(), || {
                    format!("{extended}: non-prefix action kept {:?} at {:?}", next.buffer, next.agent)
                })?;
            }
        }
    }
    Ok(())
}

struct Desk {
    cfg: ExperimentConfig,
    dec: Vec<SeedOutcome>,
    vanilla: Vec<SeedOutcome>,
    whole: Vec<SeedOutcome>,
    elapsed: Duration,
}

fn run_desk(out: &Path) -> std::result::Result<Desk, String> {
    let mut cfg = ExperimentConfig::preset("desk").map_err(|e| e.to_string())?;
    cfg.out_dir = out.to_path_buf();
    let start = Instant::now();
    let dec = run_all(&cfg, Mode::DecOptions, false).map_err(|e| e.to_string())?;
    let vanilla = run_all(&cfg, Mode::Vanilla, false).map_err(|e| e.to_string())?;
    let whole = run_all(&cfg, Mode::DecOptionsWhole, true).map_err(|e| e.to_string())?;
    Ok(Desk {
        cfg,
        dec,
        vanilla,
        whole,
        elapsed: start.elapsed(),
    })
}

fn selection_log_properties(cfg: &ExperimentConfig, mode: Mode) -> Check {
    for &seed in &cfg.seeds {
        let path = SeedPaths::new(&cfg.out_dir, seed).selection_log(mode);
        let rows = read_selection_log(&path).map_err(|e| e.to_string())?;
        ensure(!rows.is_empty() && rows[0].1.is_none(), || format!("seed {seed}: log lacks a baseline row"))?;
        for w in rows.windows(2) {
            ensure(w[1].2 < w[0].2, || format!("seed {seed} {mode}: loss trace not strictly decreasing"))?;
        }
        let (first, last) = (rows[0].2, rows[rows.len() - 1].2);
        ensure(last <= first, || format!("seed {seed} {mode}: final loss above baseline"))?;
    }
    Ok(())
}

/// Sub-policies that always pick one primitive, paired with `z = 1` only.
fn primitive_replicas_select_nothing(cfg: &ExperimentConfig) -> Check {
    let seed = cfg.seeds[0];
    let text = std::fs::read_to_string(SeedPaths::new(&cfg.out_dir, seed).trajectories()).map_err(|e| e.to_string())?;
    let trajectories: Vec<Trajectory> = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let obs_len = trajectories[0].observations[0].0.len();
    let n_primitives = 3;
    let mut subs = Vec::new();
    for task in 0..trajectories.len() {
        for a in 0..n_primitives {
            let hidden = LayerParams::zeros(obs_len, 2);
            let mut bias = vec![0.0; n_primitives];
            bias[a] = 1.0;
            let out = LayerParams::from_rows(&[&[0.0, 0.0], &[0.0, 0.0], &[0.0, 0.0]], &bias);
            let policy = MlpPolicy::new(Mlp::new(vec![hidden, out]).unwrap(), Head::Softmax).unwrap();
            subs.push(whole_policy(Arc::new(policy), task).unwrap());
        }
    }
    let longest = trajectories.iter().map(|t| t.n_actions()).max().unwrap_or(1);
    let limits = CandidateLimits {
        max_z: Some(1),
        max_pool: None,
    };
    let set = generate_candidates(subs, longest, limits).map_err(|e| e.to_string())?;
    let result = greedy_select(&set, &trajectories, n_primitives, &Exclusion::LeaveOwnTaskOut).map_err(|e| e.to_string())?;
    ensure(result.selected.is_empty(), || format!("selected {:?}", result.selected))
}

fn greedy_selection(desk: &Desk) -> Check {
    selection_log_properties(&desk.cfg, Mode::DecOptions)?;
    primitive_replicas_select_nothing(&desk.cfg)?;
    for &seed in &desk.cfg.seeds {
        let start = Instant::now();
        select(&desk.cfg, seed, Mode::DecOptions).map_err(|e| e.to_string())?;
        let t = start.elapsed();
        ensure(t < Duration::from_secs(10), || format!("seed {seed}: selection took {t:.2?}"))?;
    }
    Ok(())
}

fn end_to_end(desk: &Desk) -> Check {
    ensure(desk.dec.len() >= DESK_SEEDS, || format!("only {} seeds", desk.dec.len()))?;
    for o in &desk.dec {
        for s in &o.sources {
            ensure(s.solved, || format!("seed {} source task {} unsolved", o.seed, s.task))?;
        }
        ensure(o.n_options > 0, || format!("seed {}: empty option library", o.seed))?;
    }
    let mut wins = 0;
    let (mut dec_final, mut van_final) = (0.0, 0.0);
    for (d, v) in desk.dec.iter().zip(&desk.vanilla) {
        assert_eq!(d.seed, v.seed);
        let (dt, vt) = (&d.targets[0], &v.targets[0]);
        if dt.auc > vt.auc {
            wins += 1;
        }
        dec_final += dt.greedy_return;
        van_final += vt.greedy_return;
        println!(
            "  seed {}: dec-options auc {:.2} final {} ({} options) | vanilla auc {:.2} final {}",
            d.seed, dt.auc, dt.greedy_return, d.n_options, vt.auc, vt.greedy_return
        );
    }
    let n = desk.dec.len() as f64;
    let (dec_final, van_final) = (dec_final / n, van_final / n);
    println!("  auc wins {wins}/{}; mean final dec-options {dec_final:.2}, vanilla {van_final:.2}", desk.dec.len());
    ensure(wins >= MIN_AUC_WINS, || format!("dec-options wins auc in {wins} seeds"))?;
    ensure(dec_final >= TARGET_RETURN - 1e-9, || format!("dec-options mean final return {dec_final}"))?;
    ensure(van_final <= dec_final, || format!("vanilla mean final {van_final} above dec-options"))?;
    ensure(desk.elapsed < Duration::from_secs(20 * 60), || format!("took {:.0?}", desk.elapsed))
}

fn whole_policy_ablation(desk: &Desk) -> Check {
    selection_log_properties(&desk.cfg, Mode::DecOptionsWhole)?;
    for o in &desk.whole {
        let paths = SeedPaths::new(&desk.cfg.out_dir, o.seed);
        let lib_path = paths.library(Mode::DecOptionsWhole);
        let lib = OptionLibrary::load(&lib_path).map_err(|e| e.to_string())?;
        let options = lib
            .resolve(lib_path.parent().expect("library has a directory"))
            .map_err(|e| e.to_string())?;
        ensure(options.len() == o.n_options, || format!("seed {}: library size mismatch", o.seed))?;
        for opt in &options {
            let decopt::options::OptionBehavior::SubPolicy(sub) = &opt.behavior else {
                return Err(format!("seed {}: non-policy option in whole-policy library", o.seed));
            };
            ensure(sub.mask.is_all_free(), || format!("seed {}: clamped mask {}", o.seed, sub.mask))?;
        }
        ensure(o.targets.iter().all(|t| t.greedy_return.is_finite()), || "bad target result".into())?;
        println!(
            "  seed {}: {} whole-policy options, target final {}",
            o.seed, o.n_options, o.targets[0].greedy_return
        );
    }
    Ok(())
}

fn report(id: usize, name: &str, limit: Duration, f: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let outcome = f();
    let t = start.elapsed();
    let outcome = outcome.and_then(|()| ensure(t <= limit, || format!("runtime {t:.2?} over {limit:?}")));
    match &outcome {
        Ok(()) => println!("criterion {id:>2} PASS  {name} ({t:.2?})"),
        Err(msg) => println!("criterion {id:>2} FAIL  {name} ({t:.2?}): {msg}"),
    }
    outcome.is_ok()
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let mut ok = true;
    ok &= report(1, "neural tree of the two-unit fixture", secs(1), figure_one_tree);
    ok &= report(2, "sub-policy counts 3^d", secs(1), subpolicy_counts);
    ok &= report(3, "worked Levin-loss fixture", secs(1), appendix_fixture);
    ok &= report(4, "Levin DP equals brute-force segmentation", secs(30), dp_matches_brute_force);
    ok &= report(5, "tree forward equals network forward", secs(10), tree_matches_network);
    ok &= report(6, "PPO gradients match finite differences", secs(30), gradient_check);
    ok &= report(7, "ComboGrid combo dynamics", secs(1), combo_dynamics);

    let dir = tempfile::tempdir().expect("temp dir");
    println!("training the desk preset (dec-options, vanilla, dec-options-whole)...");
    let desk = run_desk(dir.path());
    let limit = secs(20 * 60);
    match &desk {
        Ok(desk) => {
            println!("desk runs finished in {:.1?}", desk.elapsed);
            ok &= report(8, "greedy selection properties", secs(10 * DESK_SEEDS as u64), || greedy_selection(desk));
            ok &= report(9, "end-to-end transfer on ComboGrid 3x3", limit, || end_to_end(desk));
            ok &= report(10, "whole-policy ablation", limit, || whole_policy_ablation(desk));
        }
        Err(e) => {
            for (id, name) in [(8, "greedy selection properties"), (9, "end-to-end transfer"), (10, "whole-policy ablation")] {
                println!("criterion {id:>2} FAIL  {name}: desk run failed: {e}");
            }
            ok = false;
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
