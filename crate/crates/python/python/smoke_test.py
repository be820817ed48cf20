"""Smoke test for the compiled extension module.

Build with `maturin develop` or copy the cdylib next to this script as
fractal_spectra_py.so, then run `python smoke_test.py`.
"""

import json
import math

import fractal_spectra_py as fs


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol


def main():
    assert set(fs.BUILTIN_GROUPS) == {
        "grigorchuk", "grigorchuk-tilde", "gamma", "gamma-bar", "gamma-barbar",
    }

    g = fs.Group("grigorchuk")
    assert g.degree == 2
    ev = g.eigenvalues(2)
    s5 = math.sqrt(5)
    for got, want in zip(ev, [(1 - s5) / 4, 0.5, (1 + s5) / 4, 1.0]):
        assert close(got, want), (got, want)
    assert all(d <= 1e-9 for d in fs.limit_distances("grigorchuk", g.eigenvalues(6)))

    gamma = fs.Group("gamma")
    assert gamma.symmetric_set == ["a", "a^-1", "r", "r^-1"]
    assert gamma.spectrum(1) == [(0.25, 2), (1.0, 1)] or all(
        close(v, w) and m == k for (v, m), (w, k) in zip(gamma.spectrum(1), [(0.25, 2), (1.0, 1)])
    )
    assert gamma.act("a", "3") == "1"

    graph = gamma.schreier_graph(1)
    assert len(graph) == 3 and graph.basepoint == "3"
    assert fs.Graph.from_dot(graph.to_dot()).isomorphic(graph)

    # Substitution expansion k matches the level k+1 Schreier graph.
    assert fs.substitute(2).isomorphic(gamma.schreier_graph(3))

    assert sorted(fs.julia_set(6.0, 1)) == sorted([-3.0, -math.sqrt(3), math.sqrt(3), 3.0]) or all(
        close(a, b) for a, b in zip(sorted(fs.julia_set(6.0, 1)), [-3.0, -math.sqrt(3), math.sqrt(3), 3.0])
    )
    assert close(fs.product_formula(1.0, 1.0, 0.0, 0), 4.0)
    q = g.q_value(3, 0.3, -1.2, 0.7)
    assert close(q, fs.product_formula(0.3, -1.2, 0.7, 3), 1e-8 * max(1.0, abs(q)))

    report = json.loads(fs.verify("nesting,markov-hecke", max_level=3))
    assert report["passed"], report

    print("smoke test passed")


if __name__ == "__main__":
    main()
