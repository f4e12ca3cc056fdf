use super::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cl(v: &[i32]) -> Clause {
    Clause::from_dimacs(v).unwrap()
}

fn lit(v: i32) -> Literal {
    Literal::from_dimacs(v)
}

fn engine(clauses: &[Clause], atoms: u32) -> Engine {
    Engine::load_program(clauses, atoms, EngineConfig::default()).unwrap()
}

fn solve_plain(e: &mut Engine, assumptions: &[Literal]) -> SolveOutcome {
    e.solve(assumptions, &[], &HashSet::new()).unwrap()
}

/// Bitmask form of a clause for exhaustive enumeration (atoms <= 32).
fn masks(c: &Clause) -> (u32, u32) {
    let mut pos = 0;
    let mut neg = 0;
    for l in c.literals() {
        let bit = 1u32 << (l.atom() - 1);
        if l.is_positive() {
            pos |= bit;
        } else {
            neg |= bit;
        }
    }
    (pos, neg)
}

fn all_models(clauses: &[Clause], atoms: u32) -> Vec<u32> {
    let ms: Vec<(u32, u32)> = clauses.iter().map(masks).collect();
    (0..1u32 << atoms)
        .filter(|&a| ms.iter().all(|&(p, n)| (a & p) | (!a & n) != 0))
        .collect()
}

fn to_bits(model: &[bool]) -> u32 {
    model
        .iter()
        .enumerate()
        .fold(0, |acc, (i, &b)| acc | ((b as u32) << i))
}

fn random_program(rng: &mut ChaCha8Rng, atoms: u32, clauses: usize) -> Vec<Clause> {
    let mut out = Vec::new();
    while out.len() < clauses {
        let width = rng.gen_range(1..=3.min(atoms as usize));
        let lits: Vec<Literal> = (0..width)
            .map(|_| Literal::new(rng.gen_range(1..=atoms), rng.gen()))
            .collect();
        if let Ok(c) = Clause::new(lits) {
            out.push(c);
        }
    }
    out
}

fn random_3sat(rng: &mut ChaCha8Rng, atoms: u32, clauses: usize) -> Vec<Clause> {
    let mut out = Vec::new();
    while out.len() < clauses {
        let mut picked: Vec<u32> = Vec::new();
        while picked.len() < 3 {
            let a = rng.gen_range(1..=atoms);
            if !picked.contains(&a) {
                picked.push(a);
            }
        }
        out.push(Clause::new(picked.into_iter().map(|a| Literal::new(a, rng.gen()))).unwrap());
    }
    out
}

fn random_assumptions(rng: &mut ChaCha8Rng, atoms: u32) -> Vec<Literal> {
    let count = rng.gen_range(0..=atoms.min(4));
    let mut picked: Vec<u32> = Vec::new();
    while picked.len() < count as usize {
        let a = rng.gen_range(1..=atoms);
        if !picked.contains(&a) {
            picked.push(a);
        }
    }
    picked.into_iter().map(|a| Literal::new(a, rng.gen())).collect()
}

fn pigeonhole(pigeons: u32, holes: u32) -> (Vec<Clause>, u32) {
    let var = |p: u32, h: u32| (p - 1) * holes + h;
    let mut clauses = Vec::new();
    for p in 1..=pigeons {
        clauses.push(Clause::new((1..=holes).map(|h| Literal::pos(var(p, h)))).unwrap());
    }
    for h in 1..=holes {
        for p in 1..=pigeons {
            for q in p + 1..=pigeons {
                clauses.push(Clause::new([Literal::neg(var(p, h)), Literal::neg(var(q, h))]).unwrap());
            }
        }
    }
    (clauses, pigeons * holes)
}

#[test]
fn unconstrained_program_has_a_model() {
    let mut e = engine(&[], 3);
    let out = solve_plain(&mut e, &[]);
    assert_eq!(out.status.model().unwrap().len(), 3);
}

#[test]
fn unit_fact_is_true() {
    let mut e = engine(&[cl(&[1])], 2);
    let out = solve_plain(&mut e, &[]);
    assert!(out.status.model().unwrap()[0]);
}

#[test]
fn direct_contradiction_is_incoherent() {
    let mut e = engine(&[cl(&[1]), cl(&[-1])], 1);
    assert_eq!(solve_plain(&mut e, &[]).status, SolveStatus::Incoherent);
}

#[test]
fn out_of_range_atoms_rejected() {
    let err = Engine::load_program(&[cl(&[1, 4])], 3, EngineConfig::default()).unwrap_err();
    assert_eq!(err, EngineError::OutOfRange { atom: 4, atom_count: 3 });
    let mut e = engine(&[], 2);
    assert!(e.solve(&[lit(3)], &[], &HashSet::new()).is_err());
    assert_eq!(
        e.solve(&[lit(1), lit(-1)], &[], &HashSet::new()).unwrap_err(),
        EngineError::ComplementaryAssumptions(1)
    );
}

#[test]
fn assumption_forces_unit() {
    let mut e = engine(&[cl(&[1, 2])], 2);
    let out = solve_plain(&mut e, &[lit(-1)]);
    let m = out.status.model().unwrap();
    assert!(!m[0] && m[1]);
}

#[test]
fn all_four_binary_clauses_incoherent_with_learning() {
    let clauses = [cl(&[1, 2]), cl(&[-1, 2]), cl(&[1, -2]), cl(&[-1, -2])];
    assert!(all_models(&clauses, 2).is_empty());
    let mut e = engine(&clauses, 2);
    let out = solve_plain(&mut e, &[]);
    assert_eq!(out.status, SolveStatus::Incoherent);
    assert!(!out.new_learned.is_empty());
    // the first conflict resolves to the unit [x1]
    assert_eq!(out.new_learned[0].clause, cl(&[1]));
    assert_eq!(out.new_learned[0].lbd, 1);
}

#[test]
fn pigeonhole_4_into_3() {
    let (clauses, atoms) = pigeonhole(4, 3);
    assert_eq!(atoms, 12);
    let models = all_models(&clauses, atoms);
    assert!(models.is_empty());
    let mut e = engine(&clauses, atoms);
    let out = solve_plain(&mut e, &[]);
    assert_eq!(out.status, SolveStatus::Incoherent);
    assert!(out.stats.conflicts > 0);
    // implication oracle: every learned clause holds in every model of the
    // program, checked over all 2^12 assignments
    let ms: Vec<(u32, u32)> = clauses.iter().map(masks).collect();
    for learned in &out.new_learned {
        let (p, n) = masks(&learned.clause);
        for a in 0..1u32 << atoms {
            if ms.iter().all(|&(cp, cn)| (a & cp) | (!a & cn) != 0) {
                assert!((a & p) | (!a & n) != 0);
            }
        }
    }
}

#[test]
fn pigeonhole_with_aggressive_deletion_stays_sound() {
    let (clauses, atoms) = pigeonhole(6, 5);
    let config = EngineConfig {
        in_call_deletion: InCallDeletion::LbdHalving {
            interval_conflicts: 1,
        },
        ..Default::default()
    };
    let mut e = Engine::load_program(&clauses, atoms, config).unwrap();
    let out = solve_plain(&mut e, &[]);
    assert_eq!(out.status, SolveStatus::Incoherent);
    assert!(out.stats.deleted > 0);
    // only the program clauses are live afterwards
    assert_eq!(e.clauses.iter().filter(|c| !c.deleted).count(), e.program_len);
    assert_eq!(solve_plain(&mut e, &[]).status, SolveStatus::Incoherent);
}

/// Pushes a decision by hand and propagates.
fn force_decision(e: &mut Engine, l: Literal) -> Option<u32> {
    e.trail_lim.push(e.trail.len());
    e.enqueue(Lit::from_literal(l), NO_REASON);
    e.propagate()
}

#[test]
fn analysis_of_three_level_conflict() {
    // decisions ¬x1@1, ¬x2@2, ¬x3@3; clauses 1 and 2 then clash on x4
    let program = [
        cl(&[1, 3, 4]),
        cl(&[1, 3, -4]),
        cl(&[2, 5, 6]),
        cl(&[2, 5, -6]),
        cl(&[-4, 5, 1]),
        cl(&[1, 2, 3, 4, 5, 6]),
    ];
    let mut e = engine(&program, 6);
    e.begin_call(0);
    assert_eq!(force_decision(&mut e, lit(-1)), None);
    assert_eq!(force_decision(&mut e, lit(-2)), None);
    let confl = force_decision(&mut e, lit(-3)).expect("conflict at level 3");
    let (learnt, backjump, lbd) = e.analyze(confl);
    let learned = Clause::new(learnt.iter().map(|l| l.to_literal())).unwrap();
    assert_eq!(learned, cl(&[1, 3]));
    assert_eq!(lbd, 2);
    assert_eq!(backjump, 1);
    let at_current = learnt.iter().filter(|l| e.level[l.var()] == 3).count();
    assert_eq!(at_current, 1);
    e.end_call();

    // the full search learns the same clause
    let out = solve_plain(&mut engine(&program, 6), &[]);
    assert!(out.status.is_model());
    let found = out.new_learned.iter().find(|l| l.clause == cl(&[1, 3])).unwrap();
    assert_eq!(found.lbd, 2);
}

#[test]
fn unit_learning_jumps_to_level_zero() {
    let mut e = engine(&[cl(&[1, 2]), cl(&[1, -2])], 2);
    e.begin_call(0);
    let confl = force_decision(&mut e, lit(-1)).unwrap();
    let (learnt, backjump, lbd) = e.analyze(confl);
    assert_eq!(learnt.len(), 1);
    assert_eq!((backjump, lbd), (0, 1));
    e.end_call();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn learned_clause_has_single_current_level_literal(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let atoms = 10;
        let program: Vec<Clause> = random_program(&mut rng, atoms, 40)
            .into_iter()
            .filter(|c| c.len() > 1)
            .collect();
        let mut e = engine(&program, atoms);
        e.begin_call(0);
        let mut conflict = None;
        for a in 1..=atoms {
            if e.values[a as usize - 1] != 0 {
                continue;
            }
            if let Some(c) = force_decision(&mut e, Literal::new(a, rng.gen())) {
                conflict = Some(c);
                break;
            }
        }
        if let Some(c) = conflict {
            let current = e.decision_level();
            let (learnt, backjump, lbd) = e.analyze(c);
            let at_current = learnt.iter().filter(|l| e.level[l.var()] == current).count();
            prop_assert_eq!(at_current, 1);
            prop_assert!(backjump < current);
            prop_assert!(lbd >= 1 && lbd as usize <= learnt.len());
        }
        e.end_call();
    }
}

#[test]
fn fresh_engine_branches_on_atom_one_negatively() {
    let mut e = engine(&[cl(&[2, 3])], 3);
    assert_eq!(e.choose_literal(), Some(lit(-1)));
}

#[test]
fn saved_phase_is_reused() {
    let mut e = engine(&[cl(&[1])], 2);
    assert!(solve_plain(&mut e, &[]).status.is_model());
    assert_eq!(e.saved_phase(1), Some(true));
    assert_eq!(e.choose_literal(), Some(lit(1)));
}

#[test]
fn conflict_bumps_steer_next_decision() {
    // ¬x1..¬x5 decided, x7 propagated, clash on [x5, ¬x7]: analysis bumps 5 and 7
    let mut e = engine(&[cl(&[5, 7]), cl(&[5, -7])], 7);
    let out = solve_plain(&mut e, &[]);
    assert_eq!(out.stats.conflicts, 1);
    assert!(e.activity(5) > 0.0 && e.activity(7) > 0.0);
    let next = e.choose_literal().unwrap();
    assert!(next.atom() == 5 || next.atom() == 7);
}

#[test]
fn rediscovery_of_frozen_clause_is_reported() {
    let clauses = [cl(&[1, 2]), cl(&[-1, 2]), cl(&[1, -2]), cl(&[-1, -2])];
    let mut e = engine(&clauses, 2);
    let frozen: HashSet<ClauseKey> = [cl(&[1]).key()].into_iter().collect();
    let out = e.solve(&[], &[], &frozen).unwrap();
    assert_eq!(out.rediscovered.get(&cl(&[1]).key()), Some(&1));
}

#[test]
fn usage_flags_follow_propagation() {
    let mut e = engine(&[cl(&[1, 2])], 5);
    let used = cl(&[2, 3]);
    let idle = cl(&[4, 5]);
    let active = vec![(used.key(), used.clone()), (idle.key(), idle.clone())];
    let out = e
        .solve(&[lit(-2), lit(4)], &active, &HashSet::new())
        .unwrap();
    let m = out.status.model().unwrap();
    assert!(m[2]);
    assert!(out.usage[0].used);
    assert!(!out.usage[1].used);
    assert_eq!(out.usage[1].refreshed_lbd, None);
}

#[test]
fn supplied_constraint_in_conflict_gets_fresh_lbd() {
    // x1@1, x2@2 implies x3 and x4 at level 2; the supplied clause is the
    // conflict, spanning levels {1, 2}
    let mut e = engine(&[cl(&[-2, 3]), cl(&[-2, 4])], 4);
    let c = cl(&[-1, -3, -4]);
    let out = e
        .solve(&[lit(1), lit(2)], &[(c.key(), c.clone())], &HashSet::new())
        .unwrap();
    assert_eq!(out.status, SolveStatus::Incoherent);
    assert!(out.usage[0].used);
    assert_eq!(out.usage[0].refreshed_lbd, Some(2));
    // the conflict at an assumption level still yields a learned clause
    assert_eq!(out.new_learned[0].clause, cl(&[-1, -2]));
}

#[test]
fn assumption_levels_are_dedicated() {
    let mut e = engine(&[cl(&[1, 2, 3])], 3);
    let out = solve_plain(&mut e, &[lit(-1), lit(-2)]);
    let m = out.status.model().unwrap();
    assert!(m[2]);
    // assumptions are not counted as branching decisions
    assert_eq!(out.stats.decisions, 0);
}

#[test]
fn falsified_assumption_is_incoherent_and_engine_recovers() {
    let mut e = engine(&[cl(&[1]), cl(&[-1, 2])], 2);
    assert_eq!(solve_plain(&mut e, &[lit(-2)]).status, SolveStatus::Incoherent);
    assert!(solve_plain(&mut e, &[lit(2)]).status.is_model());
}

#[test]
fn timeout_is_reported() {
    let (clauses, atoms) = pigeonhole(9, 8);
    let mut e = engine(&clauses, atoms);
    let out = e
        .solve_with_deadline(&[], &[], &HashSet::new(), Some(Instant::now()))
        .unwrap();
    assert_eq!(out.status, SolveStatus::Timeout);
    assert!(e.trail.is_empty());
}

#[test]
fn completeness_against_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..100 {
        let atoms = rng.gen_range(4..=20u32);
        let density = rng.gen_range(2.0..5.0);
        let n_clauses = (atoms as f64 * density) as usize;
        let program = random_program(&mut rng, atoms, n_clauses);
        let models = all_models(&program, atoms);
        let mut e = engine(&program, atoms);
        for _ in 0..10 {
            let assumptions = random_assumptions(&mut rng, atoms);
            let (mut want_pos, mut want_neg) = (0u32, 0u32);
            for a in &assumptions {
                if a.is_positive() {
                    want_pos |= 1 << (a.atom() - 1);
                } else {
                    want_neg |= 1 << (a.atom() - 1);
                }
            }
            let expected = models
                .iter()
                .any(|&m| m & want_pos == want_pos && !m & want_neg == want_neg);
            let out = solve_plain(&mut e, &assumptions);
            assert_eq!(out.status.is_model(), expected, "atoms={atoms} {assumptions:?}");
            if let Some(m) = out.status.model() {
                // soundness by direct evaluation
                assert!(program.iter().all(|c| c.satisfied_by(m)));
                assert!(assumptions.iter().all(|a| a.holds(m)));
                assert!(models.contains(&to_bits(m)));
            }
        }
    }
}

#[test]
fn learned_clauses_are_implied_by_the_program() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut checked = 0;
    for _ in 0..150 {
        let atoms = rng.gen_range(8..=14u32);
        let program = random_3sat(&mut rng, atoms, (atoms as f64 * 4.2) as usize);
        let models = all_models(&program, atoms);
        let mut e = engine(&program, atoms);
        let mut carried: Vec<(ClauseKey, Clause)> = Vec::new();
        for _ in 0..4 {
            let assumptions = random_assumptions(&mut rng, atoms);
            let out = e.solve(&assumptions, &carried, &HashSet::new()).unwrap();
            for l in &out.new_learned {
                let (p, n) = masks(&l.clause);
                assert!(models.iter().all(|&m| (m & p) | (!m & n) != 0));
                assert!(l.lbd >= 1 && l.lbd as usize <= l.clause.len());
                checked += 1;
            }
            if let Some(m) = out.status.model() {
                assert!(carried.iter().all(|(_, c)| c.satisfied_by(m)));
            }
            carried.extend(out.new_learned.into_iter().map(|l| (l.key, l.clause)));
        }
    }
    assert!(checked > 100, "too few learned clauses exercised: {checked}");
}

#[test]
fn identical_repeat_call_replays_without_conflicts() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut replayed = 0;
    for _ in 0..200 {
        let atoms = rng.gen_range(8..=20u32);
        let program = random_3sat(&mut rng, atoms, (atoms as f64 * 3.5) as usize);
        let mut e = engine(&program, atoms);
        let assumptions = random_assumptions(&mut rng, atoms);
        let first = solve_plain(&mut e, &assumptions);
        if !first.status.is_model() {
            continue;
        }
        let active: Vec<(ClauseKey, Clause)> =
            first.new_learned.iter().map(|l| (l.key, l.clause.clone())).collect();
        let second = e.solve(&assumptions, &active, &HashSet::new()).unwrap();
        assert!(second.status.is_model());
        assert_eq!(second.stats.conflicts, 0);
        assert_eq!(second.status, first.status);
        replayed += 1;
    }
    assert!(replayed > 50);
}

#[test]
fn phase_saving_off_keeps_no_phases() {
    let config = EngineConfig {
        phase_saving: false,
        ..Default::default()
    };
    let mut e = Engine::load_program(&[cl(&[1, 2])], 2, config).unwrap();
    assert!(solve_plain(&mut e, &[]).status.is_model());
    assert_eq!(e.saved_phase_count(), 0);
}
