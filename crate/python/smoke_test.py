"""Smoke test for the Python bindings.

Build and install the extension first:

    cd crates/py && maturin develop --release

then run ``python python/smoke_test.py``.
"""

import lookahead_matching as lm

A, B, C, D, E, F, G = range(7)


def check_maximal(graph, matching):
    mated = {}
    for u, v in matching:
        assert u not in mated and v not in mated, "not a matching"
        mated[u], mated[v] = v, u
    for u, v in graph:
        assert u in mated or v in mated, f"edge {(u, v)} could be added"
    return mated


def worked_example():
    m = lm.Matcher(
        7,
        threshold=2,
        phase_override=3,
        edges=[(A, B), (B, G), (A, F), (G, E), (C, G), (D, E)],
    )
    m.apply([("+", F, G), ("-", A, F), ("+", D, C)])
    assert m.graph() == sorted([(A, B), (B, G), (C, G), (E, G), (D, E), (F, G), (C, D)])
    assert m.matching() == [(A, B), (C, D), (E, G)]
    assert m.mate(A) == B and m.mate(F) is None
    c = m.counters()
    assert (c["batch_phases"], c["single_phases"], c["recursion_depth_max"]) == (2, 3, 2)
    print("worked example:", m)


def random_stream():
    text = lm.generate(60, 3000, seed=4, p_delete=0.3, query_rate=0.2, allow_noop=True)
    assert text == lm.generate(60, 3000, seed=4, p_delete=0.3, query_rate=0.2, allow_noop=True)
    n, events = lm.parse_stream(text)
    assert n == 60 and sum(kind != "?" for kind, _, _ in events) == 3000

    la = lm.run_stream(text, "lookahead", verify=True, stream_id="smoke")
    rc = lm.run_stream(text, "recompute", verify=True, stream_id="smoke")
    assert la["updates"] == rc["updates"] == 3000
    assert la["m_max"] == rc["m_max"]
    work = lambda r: sum(r[k] for k in ("greedy_edge_visits", "list_writes", "indicator_ops", "mate_ops"))
    print(f"3000 updates: lookahead work {work(la)}, recompute work {work(rc)}")

    # Same final graph through the class interface, with sparse strategies.
    m = lm.Matcher(mate="map", indicator="set")
    for kind, u, v in events:
        if kind == "+":
            m.insert(u, v)
        elif kind == "-":
            m.delete(u, v)
    assert m.pending == 3000
    m.run()
    assert m.pending == 0
    mated = check_maximal(m.graph(), m.matching())
    assert all(m.mate(u) == v for u, v in mated.items())
    assert m.setup_kind == "lazy"


def greedy_and_errors():
    assert lm.greedy([(A, B), (B, G), (G, E), (C, G), (D, E)]) == [(A, B), (E, G)]
    for bad in (lambda: lm.Matcher(4).insert(2, 2), lambda: lm.greedy([(1, 1)])):
        try:
            bad()
        except ValueError:
            pass
        else:
            raise AssertionError("self-loop accepted")
    try:
        lm.Matcher(4).insert(1, 9)
    except IndexError:
        pass
    else:
        raise AssertionError("out-of-range vertex accepted")
    try:
        lm.parse_stream("n 3\n+ 0 x\n")
    except ValueError as e:
        assert "line 2" in str(e)


if __name__ == "__main__":
    worked_example()
    random_stream()
    greedy_and_errors()
    print("python smoke test: ok")
