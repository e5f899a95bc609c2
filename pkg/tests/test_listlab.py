from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from loopunroll.errors import OracleMismatch
from loopunroll.interp import execute
from loopunroll.listlab import (
    MAIN,
    VARIANTS,
    VariantId,
    encode_list,
    exit_kind,
    gen_list_program,
    list_source,
    loop_iterations,
    main_loop_blocks,
    serial_chain_check,
    traversal_report,
)
from loopunroll.parser import parse, pretty


def run(variant, n):
    return execute(gen_list_program(variant, n), tracing=True)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 40))
def test_encoding_invariants(n):
    enc = encode_list(n)
    assert len(enc.next) == len(enc.left) == n + 1
    assert enc.next[0] == 0 and enc.left[0] == 0
    node, seen = enc.first, []
    while node:
        seen.append(node)
        node = enc.next[node]
    assert seen == list(range(1, n + 1))
    for i in range(1, n):
        assert enc.left[enc.right[i]] == i


def test_encoding_rejects_negative():
    with pytest.raises(ValueError):
        encode_list(-1)


@pytest.mark.parametrize("variant", VARIANTS)
def test_counts_sweep(variant):
    for n in range(65):
        store, _, _ = run(variant, n)
        assert store["count"] == n, (variant, n)


def test_naive_matches_oracle():
    for n in range(20):
        store, _, _ = run(VariantId.V1, n)
        assert store["count"] == oracles.walk_naive(n)


def test_twoptr_exit_parity():
    for n in range(65):
        store, _, _ = run(VariantId.V3, n)
        kind = exit_kind(VariantId.V3, n, store)
        assert kind == oracles.twoptr_exit(n)
        if n:
            assert kind == ("met" if n % 2 else "adjacent")


def test_sentinel_main_iterations():
    for n in range(65):
        _, met, _ = run(VariantId.V2, n)
        it = loop_iterations(met, MAIN)
        assert it == max(0, -(-(n - 2) // 3)) == oracles.sentinel_main_iterations(n)


def test_worked_examples():
    store, met, _ = run(VariantId.V2, 3)
    assert store["count"] == 3 and loop_iterations(met, MAIN) == 1
    store, met, _ = run(VariantId.V1, 0)
    assert store["count"] == 0 and loop_iterations(met, MAIN) == 0
    assert exit_kind(VariantId.V1, 0, store) == "empty"
    store, met, _ = run(VariantId.V3, 5)
    assert loop_iterations(met, MAIN) == 2 and store["count"] == 5 and store["F"] == store["L"] == 3
    store, met, _ = run(VariantId.V2, 4)
    assert store["count"] == 4 and loop_iterations(met, MAIN) == 1


def test_exit_kind_blank_for_single_cursor_walks():
    store, _, _ = run(VariantId.V2, 5)
    assert exit_kind(VariantId.V2, 5, store) == ""


def test_sources_round_trip():
    for v in VARIANTS:
        for n in (0, 1, 7):
            p = gen_list_program(v, n)
            assert parse(pretty(p)) == p
            assert parse(list_source(v, n)) == p


def test_variant_parse():
    assert VariantId.parse("V2") is VariantId.V2
    assert VariantId.parse("V3-twoptr") is VariantId.V3
    assert VariantId.parse("v1") is VariantId.V1
    with pytest.raises(ValueError):
        VariantId.parse("V4")


def test_main_loop_blocks_sentinel():
    prog = gen_list_program(VariantId.V2, 6)
    _, _, tr = execute(prog, tracing=True)
    blocks = main_loop_blocks(prog, tr)
    assert len(blocks) == 2
    assert all(len(b) == 5 for b in blocks)


# frozen from a model run at n=60, renaming on
FROZEN = {
    ("unit", 2): {VariantId.V1: 122, VariantId.V2: 85, VariantId.V3: 63},
    ("load2", 2): {VariantId.V1: 182, VariantId.V2: 147, VariantId.V3: 122},
    ("unit", 1): {VariantId.V1: 183, VariantId.V2: 106, VariantId.V3: 123},
}


@pytest.mark.parametrize("lat,width", sorted(FROZEN))
def test_frozen_cycles(lat, width):
    rows = traversal_report([60], [width], lat, True)
    assert {r.variant: r.cycles for r in rows} == FROZEN[(lat, width)]


def test_wider_machines_plateau():
    rows = traversal_report([60], [2, 4, 8], "unit", True)
    by = {}
    for r in rows:
        by.setdefault(r.variant, set()).add(r.cycles)
    assert all(len(c) == 1 for c in by.values())


def test_ordering_for_even_n():
    for n in range(12, 65, 2):
        for lat in ("unit", "load2"):
            rows = {r.variant: r for r in traversal_report([n], [2], lat, True)}
            assert rows[VariantId.V3].cycles < rows[VariantId.V2].cycles < rows[VariantId.V1].cycles
            assert rows[VariantId.V1].speedup_vs_baseline == 1


def test_cycles_per_node():
    (row,) = traversal_report([60], [2], "unit", True, [VariantId.V1])
    assert row.cycles_per_node == pytest.approx(2.0, abs=0.05)
    (empty,) = traversal_report([0], [2], "unit", True, [VariantId.V1])
    assert empty.cycles_per_node is None


def test_serial_chain_blocks_hit_critical_path():
    for lat, cp in (("unit", 4), ("load2", 7)):
        out = serial_chain_check(12, (2, 4, 8), lat)
        assert out and all(cycles == c == cp for _, cycles, c in out)


def test_oracle_mismatch(monkeypatch):
    import loopunroll.listlab as ll

    monkeypatch.setattr(ll, "count_oracle", lambda n: n + 1)
    with pytest.raises(OracleMismatch):
        ll.traversal_report([3], [2])
