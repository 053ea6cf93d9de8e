//! Acceptance suite. Prints one line per criterion and exits nonzero if any
//! criterion fails.

use std::collections::{BTreeMap, HashMap};
use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_rational::Ratio;

use qnim::analysis::{
    alternate_grey_losing_probability, lucky_grey_counts, reachable_boards, Analyzer, ExactSolver,
};
use qnim::grundy::{enumerate_situations, kernel_classes, row_transitions};
use qnim::strategy::{EnginePolicy, Level};
use qnim::{Board, Dyadic, Engine, GrundySolver, Nimber, RuleSet, Segment, Situation};

fn rules(code: &str) -> RuleSet {
    code.parse().unwrap()
}

fn check(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

/// Reference partition of row classes for the domino game 0.07, lengths 0..=86.
const DOMINO_TABLE: &[(u32, &[usize])] = &[
    (
        0,
        &[0, 1, 5, 9, 15, 21, 25, 29, 35, 39, 43, 55, 59, 63, 73, 77],
    ),
    (
        1,
        &[
            2, 3, 7, 8, 22, 23, 27, 28, 36, 37, 41, 42, 56, 57, 61, 62, 70, 71, 75, 76,
        ],
    ),
    (
        2,
        &[4, 12, 13, 17, 18, 26, 32, 38, 46, 47, 52, 60, 72, 80, 81],
    ),
    (
        3,
        &[
            6, 10, 11, 19, 20, 24, 40, 44, 45, 53, 54, 58, 66, 74, 78, 79,
        ],
    ),
    (4, &[14, 30, 34, 48, 49, 64, 68, 82, 83]),
    (5, &[16, 31, 50, 51, 65, 84, 85]),
    (6, &[]),
    (7, &[33, 67]),
    (8, &[69]),
    (9, &[86]),
];

/// Reference classes by length mod 34, for lengths above 53.
const DOMINO_MOD34: &[(u32, &[usize])] = &[
    (0, &[5, 9, 21, 25, 29]),
    (1, &[2, 3, 7, 8, 22, 23, 27, 28]),
    (2, &[4, 12, 13, 26]),
    (3, &[6, 10, 11, 19, 20, 24, 32]),
    (4, &[0, 14, 15, 30]),
    (5, &[16, 17, 31]),
    (7, &[33]),
    (8, &[1]),
    (9, &[18]),
];

fn criterion_1() -> Result<(), String> {
    let g = GrundySolver::new(rules("0.07")).unwrap();
    let table = g.table(86);
    let mut expected: BTreeMap<Nimber, Vec<usize>> = BTreeMap::new();
    for &(c, rows) in DOMINO_TABLE {
        if !rows.is_empty() {
            expected.insert(Nimber(c), rows.to_vec());
        }
    }
    let got = table.partition();
    check(got == expected, || format!("partition differs: {got:?}"))?;
    check(!got.contains_key(&Nimber(6)), || {
        "a single row has class 6".into()
    })?;

    let mut column = HashMap::new();
    for &(c, residues) in DOMINO_MOD34 {
        for &r in residues {
            column.insert(r, Nimber(c));
        }
    }
    check(column.len() == 34, || "modulo column incomplete".into())?;
    for n in 54..=176 {
        let want = column[&(n % 34)];
        let c = g.row_class(n);
        check(c == want, || format!("c({n}) = {c}, column says {want}"))?;
    }
    Ok(())
}

fn criterion_2() -> Result<(), String> {
    let g = GrundySolver::new(rules("0.07")).unwrap();
    check(g.verify_period(34, 87, 176), || {
        "period 34 fails on [87,176]".into()
    })?;
    check(!g.verify_period(34, 53, 176), || {
        "period 34 unexpectedly holds from 53".into()
    })
}

fn criterion_3() -> Result<(), String> {
    for code in ["0.07", "0.137"] {
        let r = rules(code);
        let g = GrundySolver::new(r.clone()).unwrap();
        let kernel = kernel_classes(12, &r, 1_000_000).map_err(|e| e.to_string())?;
        for (s, k) in kernel.iter() {
            let mex = g.situation_class(s);
            check(k == mex, || format!("{code} {s}: kernel {k} vs mex {mex}"))?;
        }
    }
    Ok(())
}

/// Win/loss by plain game-tree search, no class arithmetic.
fn searched_win(s: &Situation, r: &RuleSet, memo: &mut HashMap<Situation, bool>) -> bool {
    if let Some(&w) = memo.get(s) {
        return w;
    }
    let mut distinct = s.rows().to_vec();
    distinct.dedup();
    let win = distinct.iter().any(|&row| {
        row_transitions(row, r)
            .iter()
            .any(|t| !searched_win(&s.replace(row, t), r, memo))
    });
    memo.insert(s.clone(), win);
    win
}

fn criterion_4() -> Result<(), String> {
    for code in ["0.07", "0.137"] {
        let r = rules(code);
        let g = GrundySolver::new(r.clone()).unwrap();
        for s in enumerate_situations(12) {
            let class = g.situation_class(&s);
            if class.is_zero() {
                let mut distinct = s.rows().to_vec();
                distinct.dedup();
                for row in distinct {
                    for t in row_transitions(row, &r) {
                        let next = s.replace(row, &t);
                        check(!g.situation_class(&next).is_zero(), || {
                            format!("{code} {s} -> {next} stays in class 0")
                        })?;
                    }
                }
            } else {
                let (row, replacement) = g.winning_transition(&s).map_err(|e| e.to_string())?;
                check(row_transitions(row, &r).contains(&replacement), || {
                    format!("{code} {s}: {row} -> {replacement} is not a move")
                })?;
                let next = s.replace(row, &replacement);
                check(g.situation_class(&next).is_zero(), || {
                    format!("{code} {s}: winning transition leads to {next}")
                })?;
            }
        }
        let mut memo = HashMap::new();
        for s in enumerate_situations(10) {
            let win = searched_win(&s, &r, &mut memo);
            let nonzero = !g.situation_class(&s).is_zero();
            check(win == nonzero, || {
                format!("{code} {s}: search says win={win}")
            })?;
        }
    }
    Ok(())
}

fn criterion_5() -> Result<(), String> {
    let white = GrundySolver::new(rules("0.137")).unwrap();
    let domino = GrundySolver::new(rules("0.07")).unwrap();
    for n in 0..=175 {
        let (w, d) = (white.row_class(n), domino.row_class(n + 1));
        check(w == d, || {
            format!("c_white({n}) = {w} but c_domino({}) = {d}", n + 1)
        })?;
    }
    Ok(())
}

fn criterion_6() -> Result<(), String> {
    let verbatim = [
        ("g", vec![1]),
        ("gg", vec![1]),
        ("gWg", vec![0, 2]),
        ("gWWg", vec![1, 3]),
    ];
    for (text, want) in verbatim {
        let got: Vec<usize> = lucky_grey_counts(&text.parse().unwrap())
            .map_err(|e| e.to_string())?
            .into_iter()
            .collect();
        check(got == want, || {
            format!("Ng({text}) = {got:?}, expected {want:?}")
        })?;
    }
    for whites in 0..=10 {
        let w = "W".repeat(whites);
        for text in [w.clone(), format!("g{w}"), format!("g{w}g")] {
            if text.is_empty() {
                continue;
            }
            let seg: Segment = text.parse().unwrap();
            let counts = lucky_grey_counts(&seg).map_err(|e| e.to_string())?;
            let parity = (whites + 1) % 2;
            check(counts.iter().all(|c| c % 2 == parity), || {
                format!("{text}: counts {counts:?} not all of parity {parity}")
            })?;
        }
    }
    Ok(())
}

fn as_ratio(d: Dyadic) -> Ratio<i128> {
    Ratio::new(d.numerator(), d.denominator())
}

fn criterion_7() -> Result<(), String> {
    let u = alternate_grey_losing_probability;
    check(u(0) == Dyadic::ONE, || "u_0 != 1".into())?;
    check(u(1) == Dyadic::HALF, || "u_1 != 1/2".into())?;
    let two_thirds = Ratio::new(2i128, 3);
    for n in 0..=30u32 {
        let closed = two_thirds + Ratio::new(1, 3) * Ratio::new(-1i128, 2).pow(n as i32);
        let got = as_ratio(u(n as usize));
        check(got == closed, || {
            format!("u_{n} = {got}, closed form {closed}")
        })?;
    }
    for k in 0..15usize {
        let (e0, e1) = (as_ratio(u(2 * k)), as_ratio(u(2 * k + 2)));
        let (o0, o1) = (as_ratio(u(2 * k + 1)), as_ratio(u(2 * k + 3)));
        check(e1 < e0 && e1 > two_thirds, || {
            format!("even subsequence at {k}: {e0} -> {e1}")
        })?;
        check(o1 > o0 && o1 < two_thirds, || {
            format!("odd subsequence at {k}: {o0} -> {o1}")
        })?;
    }
    Ok(())
}

fn framing(code: &str, max_n: usize) -> Result<(), String> {
    let analyzer = Analyzer::new(rules(code)).unwrap();
    let report = analyzer.verify_framing(max_n).map_err(|e| e.to_string())?;
    check(report.is_clean(), || {
        let v = &report.violations[0];
        format!(
            "{} violations, first {} couple {} value {}",
            report.violations.len(),
            v.board,
            v.couple,
            v.value
        )
    })
}

fn criterion_8() -> Result<(), String> {
    framing("Q0.7", 10)
}

fn criterion_9() -> Result<(), String> {
    let solver = ExactSolver::new(rules("Q0.7"));
    for (n, want) in [(1, "0"), (2, "1/2"), (3, "1/4")] {
        let v = solver
            .loss_probability(&Board::new_chain(n).unwrap())
            .map_err(|e| e.to_string())?;
        check(v == want.parse().unwrap(), || {
            format!("chain {n}: {v}, expected {want}")
        })?;
    }
    Ok(())
}

fn criterion_10() -> Result<(), String> {
    let r = rules("Q0.7");
    let engine = Engine::new(r.clone()).unwrap();
    let policy = EnginePolicy {
        engine: &engine,
        level: Level::Exact,
    };
    let board = Board::new_chain(3).unwrap();
    let trials = 100_000u64;
    let first = qnim::analysis::monte_carlo(&board, &r, &policy, &policy, trials, 0x5eed);
    let again = qnim::analysis::monte_carlo(&board, &r, &policy, &policy, trials, 0x5eed);
    check(first.losses == again.losses, || "repeat run differs".into())?;
    let p = 0.25;
    let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
    let delta = (first.losses as f64 - trials as f64 * p).abs();
    check(delta <= 3.0 * sigma, || {
        format!(
            "{} losses, {:.1} sigma from 1/4",
            first.losses,
            delta / sigma
        )
    })
}

fn criterion_11() -> Result<(), String> {
    check(rules("Q0.3").satisfies_framing_condition().unwrap(), || {
        "Q0.3 fails the condition".into()
    })?;
    check(
        !rules("Q0.07").satisfies_framing_condition().unwrap(),
        || "Q0.07 passes the condition".into(),
    )?;
    framing("Q0.3", 8)?;
    let mut bad = Vec::new();
    for (q, w) in [
        ("Q0.7", "0.137"),
        ("Q0.07", "0.0137"),
        ("Q0.3", "0.13"),
        ("Q0.27", "0.03137"),
    ] {
        let got = rules(q).associated_white_game().unwrap();
        if got != rules(w) {
            bad.push(format!("{q} -> {got}, expected {w}"));
        }
    }
    check(bad.is_empty(), || bad.join("; "))
}

fn criterion_12() -> Result<(), String> {
    let r = rules("Q0.7");
    let solver = ExactSolver::new(r.clone());
    for n in 1..=8 {
        for board in reachable_boards(n, &r) {
            let stripped = board.without_black_segments();
            let (a, b) = (
                solver.loss_probability(&board).map_err(|e| e.to_string())?,
                solver
                    .loss_probability(&stripped)
                    .map_err(|e| e.to_string())?,
            );
            check(a == b, || format!("{board}: {a} but {stripped}: {b}"))?;
        }
    }
    Ok(())
}

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Result<(), String>,
}

fn main() {
    let secs = |s| Some(Duration::from_secs(s));
    let criteria = [
        Criterion {
            id: 1,
            name: "0.07 class partition for n <= 86",
            limit: secs(1),
            run: criterion_1,
        },
        Criterion {
            id: 2,
            name: "0.07 period 34 window [87,176]",
            limit: secs(1),
            run: criterion_2,
        },
        Criterion {
            id: 3,
            name: "kernel peeling equals mex+XOR (total <= 12)",
            limit: secs(30),
            run: criterion_3,
        },
        Criterion {
            id: 4,
            name: "winning transitions and search agree",
            limit: secs(60),
            run: criterion_4,
        },
        Criterion {
            id: 5,
            name: "c_white(n) = c_domino(n+1), n <= 175",
            limit: secs(1),
            run: criterion_5,
        },
        Criterion {
            id: 6,
            name: "lucky-player grey parity",
            limit: secs(30),
            run: criterion_6,
        },
        Criterion {
            id: 7,
            name: "alternate grey game sequence",
            limit: None,
            run: criterion_7,
        },
        Criterion {
            id: 8,
            name: "Q0.7 bracket framing, chains <= 10",
            limit: secs(120),
            run: criterion_8,
        },
        Criterion {
            id: 9,
            name: "exact values of chains 1..3",
            limit: None,
            run: criterion_9,
        },
        Criterion {
            id: 10,
            name: "Monte Carlo chain 3 within 3 sigma of 1/4",
            limit: None,
            run: criterion_10,
        },
        Criterion {
            id: 11,
            name: "Q0.3 framing and white-game associations",
            limit: None,
            run: criterion_11,
        },
        Criterion {
            id: 12,
            name: "Black segments do not change values",
            limit: None,
            run: criterion_12,
        },
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(c.run))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        let elapsed = start.elapsed();
        let outcome = match (outcome, c.limit) {
            (Ok(()), Some(limit)) if elapsed > limit => {
                Err(format!("took {elapsed:.2?}, limit {limit:.0?}"))
            }
            (o, _) => o,
        };
        match outcome {
            Ok(()) => println!("PASS criterion {:>2}: {} ({elapsed:.2?})", c.id, c.name),
            Err(why) => {
                failed += 1;
                println!(
                    "FAIL criterion {:>2}: {} ({elapsed:.2?}): {why}",
                    c.id, c.name
                );
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
