mod reference;

use bml_core::{Backend, Engine, Grid, LaneKernel, Layout, Phase};

const OTHER_ROWS: &str = "....\n....\n....\n";

/// Every backend/lane-kernel combination, each with one and several threads where allowed.
fn engines() -> Vec<Engine> {
    let mut out = Vec::new();
    for backend in Backend::ALL {
        for threads in [1, 3] {
            if threads > 1 && !backend.is_multithreaded() {
                continue;
            }
            if backend == Backend::Lanes {
                for k in LaneKernel::available() {
                    out.push(Engine::with_lane_kernel(backend, threads, k).unwrap());
                }
            } else {
                out.push(Engine::new(backend, threads).unwrap());
            }
        }
    }
    out
}

fn horizontal_case(row: &str, expected: &str) {
    let text = format!("{row}\n{OTHER_ROWS}");
    let want = format!("{expected}\n{OTHER_ROWS}");
    // The reference agrees with the hand-derived value before any backend is checked.
    assert_eq!(reference::show(&reference::horizontal(&reference::board(&text))), want);
    for engine in engines() {
        let mut pair = engine.pair(&Grid::parse(&text, Layout::Halo).unwrap());
        engine.step_phase(&mut pair, Phase::Horizontal).unwrap();
        assert_eq!(pair.cur.render(), want, "{engine:?}");
    }
}

#[test]
fn horizontal_phase_golden_rows() {
    horizontal_case(">.>.", ".>.>");
    horizontal_case(">>..", ">.>.");
    horizontal_case(">>>>", ">>>>");
    horizontal_case(">v..", ">v..");
}

fn step_case(start: &str, steps: u64, expected: &str) {
    assert_eq!(
        reference::show(&reference::steps(&reference::board(start), steps as usize)),
        expected
    );
    for engine in engines() {
        let mut pair = engine.pair(&Grid::parse(start, Layout::Halo).unwrap());
        engine.run(&mut pair, steps).unwrap();
        assert_eq!(pair.cur.render(), expected, "{engine:?}");
    }
}

#[test]
fn full_step_golden_grids() {
    step_case("....\n....\n....\n....\n", 5, "....\n....\n....\n....\n");
    // LR moves first and then blocks the TB vehicle's wraparound target.
    step_case(">.\n.v\n", 1, ".>\n.v\n");
    // Period-2 orbit on a 2-torus.
    step_case(">.\n..\n", 1, ".>\n..\n");
    step_case(">.\n..\n", 2, ">.\n..\n");
}

#[test]
fn vertical_phase_moves_only_tb() {
    let start = "v>..\n.v..\n..>.\nv...\n";
    let want = reference::show(&reference::vertical(&reference::board(start)));
    // (3,0) is blocked by the TB vehicle at (0,0), which only leaves during this same phase.
    assert_eq!(want, ".>..\nv...\n.v>.\nv...\n");
    for engine in engines() {
        let mut pair = engine.pair(&Grid::parse(start, Layout::Halo).unwrap());
        engine.step_phase(&mut pair, Phase::Vertical).unwrap();
        assert_eq!(pair.cur.render(), want, "{engine:?}");
    }
}

#[test]
fn one_by_one_torus() {
    // A lone vehicle faces itself and never moves.
    for start in [">\n", "v\n", ".\n"] {
        step_case(start, 3, start);
    }
}
