use maxent_bw::audit::{audit, condorcet_winner, has_cycle, strict_tournament, AuditMode};
use maxent_bw::game::PromptGame;
use maxent_bw::judge::{likert_gameset, random_utility_gameset, scalarize_gameset, LatentUtilityModel, LikertConfig};

use crate::Outcome;

const N: usize = 16;
const PROMPTS: usize = 100;
const CRITERIA: usize = 4;
const TAU: f64 = 1.0;

fn flags(g: &PromptGame) -> (bool, bool) {
    let t = strict_tournament(g.matrix(0), g.n_responses(), 0.5);
    (condorcet_winner(&t).is_some(), has_cycle(&t))
}

pub fn run() -> Outcome {
    let rps = PromptGame::from_matrices(
        "rps",
        vec![vec![vec![0.5, 0.9, 0.1], vec![0.1, 0.5, 0.9], vec![0.9, 0.1, 0.5]]],
    )
    .unwrap();
    let transitive = LatentUtilityModel::new(vec![vec![3.0, 2.0, 1.0, 0.0]], 1.0).unwrap().to_game("t");
    let mut w = vec![vec![0.5; 4]; 4];
    for j in 1..4 {
        w[0][j] = 0.8;
        w[j][0] = 0.2;
    }
    for (a, b) in [(1, 2), (2, 3), (3, 1)] {
        w[a][b] = 0.7;
        w[b][a] = 0.3;
    }
    let above = PromptGame::from_matrices("above", vec![w]).unwrap();
    let small_ok = flags(&rps) == (false, true) && flags(&transitive) == (true, false) && flags(&above) == (true, true);

    let latent = random_utility_gameset(9_000, PROMPTS, N, CRITERIA, TAU).unwrap();
    let clean = audit(&latent, &[N], &AuditMode::PerCriterion, 1).unwrap().rows[0].fraction_intransitive;
    let likert = LikertConfig {
        levels: 5,
        noise_sd: 0.1,
        ..LikertConfig::default()
    };
    let sc_games = likert_gameset(&latent, &likert, 9_001).unwrap();
    let sc = audit(&sc_games, &[N], &AuditMode::PerCriterion, 1).unwrap().rows[0].fraction_intransitive;
    let jc_games = likert_gameset(&scalarize_gameset(&latent, None).unwrap(), &likert, 9_001).unwrap();
    let jc = audit(&jc_games, &[N], &AuditMode::PerCriterion, 1).unwrap().rows[0].fraction_intransitive;

    Outcome::new(
        small_ok && clean == 0.0 && sc > 0.0 && jc >= sc,
        format!(
            "hand cases {}; N=16 over 100 seeds: latent {clean:.3}, Likert per-criterion {sc:.3}, Likert joint {jc:.3} (need 0, >0, joint >= per-criterion)",
            if small_ok { "ok" } else { "WRONG" }
        ),
    )
}
