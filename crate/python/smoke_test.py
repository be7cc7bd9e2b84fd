"""Smoke test for the hpqc Python extension.

Build first, either with `maturin develop -m crates/py/Cargo.toml` or by
copying the compiled library next to this file:

    cargo build -p hpqc-py --release --features extension-module
    cp target/release/libhpqc.so python/hpqc.so
    python3 python/smoke_test.py
"""

from pathlib import Path

import hpqc

ROOT = Path(__file__).resolve().parent.parent


def check_estimate():
    e = hpqc.estimate(4000, 500000)
    assert e["chips"] == "7500000000", e
    assert e["logical"] == "2500000", e
    r = hpqc.estimate(1000, 1000)
    assert (r["chips"], r["logical"], r["tiles"]) == ("3750000", "1250", "50x25"), r


def check_scenarios():
    fig2 = hpqc.run_scenario(ROOT / "scenarios" / "paper_fig2.toml")
    assert fig2.passed, fig2.failures
    assert fig2.fields()["users"] == "1000"

    bell = hpqc.run_scenario(ROOT / "scenarios" / "two_users_bell.toml", seed=3)
    assert bell.passed, bell.failures
    assert bell.consumed == bell.log_cross_sum
    again = hpqc.run_scenario(ROOT / "scenarios" / "two_users_bell.toml", seed=3)
    assert bell.machine() == again.machine()


def check_mainframe():
    m = hpqc.Mainframe(seed=5, width=4, depth=4)
    a = m.admit("alice", logical=4)
    b = m.admit("bob", logical=4, secure=True)
    for s in (a, b):
        m.allocate(s, 4)
        m.sever(s)
        assert m.region_entropy(s) == 0
        m.start(s)
    ca, cb = m.bell(a, b)
    assert ca >= 1 and cb >= 1
    outcomes = m.measure(a, [(1, 1, 0, "Z")])
    assert all(o in (1, -1) for o in outcomes)
    assert m.logoff(b) is None
    assert m.state(b) == "closed"
    handle = m.logoff(a, persist=True)
    assert handle is not None
    m.advance_layers(2)
    assert m.check_invariants() == []
    assert m.consumed > 0

    try:
        m.start(b)
    except RuntimeError as err:
        assert str(err).startswith("InvalidState"), err
    else:
        raise AssertionError("start on a closed session succeeded")


def check_verify():
    ok, text = hpqc.verify(["stabilizer", "protocol"], trials=20, seed=1)
    assert ok, text


def main():
    check_estimate()
    check_scenarios()
    check_mainframe()
    check_verify()
    print("python smoke test: ok")


if __name__ == "__main__":
    main()
