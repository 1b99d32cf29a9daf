#!/usr/bin/env python3
"""Smoke test for the swo_py extension module.

Build the module and make it importable first:

    cargo build --release -p swo-py
    ln -sf ../target/release/libswo_py.so python/swo_py.so

Then run:  python3 python/smoke_test.py
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

import swo_py


def test_graph_and_coloring():
    g = swo_py.Graph(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)])
    assert g.node_count == 5 and g.edge_count == 5
    assert g.degree(0) == 2 and sorted(g.neighbors(0)) == [1, 4]

    result = swo_py.solve_coloring(g, seed=1, iterations=50)
    assert result["best_score"] == 3.0, result  # odd cycle needs 3 colors
    assert g.is_proper(result["assignment"])

    # Identical seeds reproduce the run exactly.
    again = swo_py.solve_coloring(g, seed=1, iterations=50)
    assert again == result


def test_dimacs_parsing():
    g = swo_py.parse_dimacs("c triangle\np edge 3 3\ne 1 2\ne 2 3\ne 1 3\n")
    assert g.node_count == 3 and g.edge_count == 3
    result = swo_py.solve_coloring(g, seed=0, iterations=20)
    assert result["colors_used"] == 3
    try:
        swo_py.parse_dimacs("e 1 2\n")
    except ValueError:
        pass
    else:
        raise AssertionError("missing header should raise ValueError")


def test_scheduling():
    toy = swo_py.toy_sched()
    assert toy.task_count == 3 and toy.line_count == 1

    result = swo_py.solve_sched(toy, seed=0, iterations=20)
    assert result["best_score"] == 10.0, result  # B late by 10 is optimal
    assert len(result["lines"]) == 1 and sorted(result["lines"][0]) == [0, 1, 2]

    inst = swo_py.generate_sched(tasks=15, lines=3, seed=7)
    round_tripped = swo_py.SchedInstance.from_json(inst.to_json())
    assert round_tripped.to_json() == inst.to_json()
    result = swo_py.solve_sched(inst, seed=3, iterations=100, prioritizer="sort")
    assert result["best_score"] >= 0.0 and result["iterations_run"] == 100


def test_prioritizer_steps():
    assert swo_py.blame_sort_step([2, 0, 1], [20.0, 30.0, 0.0]) == [1, 0, 2]
    # Noiseless sticky sort with zero blame is the identity.
    assert swo_py.sticky_sort_step([2, 0, 1], [0.0, 0.0, 0.0], noise=0.0) == [2, 0, 1]
    try:
        swo_py.blame_sort_step([0, 0, 1], [1.0, 1.0, 1.0])
    except ValueError:
        pass
    else:
        raise AssertionError("non-permutation should raise ValueError")


def main():
    tests = [
        test_graph_and_coloring,
        test_dimacs_parsing,
        test_scheduling,
        test_prioritizer_steps,
    ]
    for t in tests:
        t()
        print(f"{t.__name__}: ok")
    print("smoke test passed")


if __name__ == "__main__":
    main()
