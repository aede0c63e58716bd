"""Bit-exactness and format tests for the 128-bit hash and artifact ids."""

import time
from dataclasses import dataclass
from pathlib import Path

import pytest

from trackkit.hashing import (
    Hash128,
    artifact_id,
    canonical_bytes,
    is_artifact_id,
    spooky128,
)

FIXTURES = Path(__file__).parent / "fixtures"


def load_vectors():
    rows = []
    for line in (FIXTURES / "spooky_vectors.tsv").read_text().splitlines():
        if not line or line.startswith("#"):
            continue
        length, s1, s2, hi, lo = line.split("\t")
        rows.append((int(length), int(s1, 16), int(s2, 16), int(hi, 16), int(lo, 16)))
    return rows


def pattern_buffer(n: int) -> bytes:
    return bytes((i * 131 + 17) & 0xFF for i in range(n))


def test_vector_sweep_exact_and_fast():
    vectors = load_vectors()
    assert len(vectors) == 1024
    buf = pattern_buffer(2048)
    start = time.perf_counter()
    for length, s1, s2, hi, lo in vectors:
        h = spooky128(buf[:length], s1, s2)
        assert (h.hi, h.lo) == (hi, lo), f"mismatch at length={length}"
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0, f"1024 vectors took {elapsed:.3f}s"


def test_empty_input_known_value():
    h = spooky128(b"")
    assert h.hi == 0x232706FC6BF50919
    assert h.lo == 0x8B72EE65B4E851C7


def test_short_long_boundary():
    # 191 bytes takes the short path, 192 the block path; both must be
    # deterministic and distinct from each other.
    buf = pattern_buffer(2048)
    a = spooky128(buf[:191])
    b = spooky128(buf[:192])
    assert a == spooky128(buf[:191])
    assert b == spooky128(buf[:192])
    assert a != b


def test_seed_sensitivity():
    data = b"the same message"
    assert spooky128(data, 0, 0) != spooky128(data, 1, 0)
    assert spooky128(data, 0, 0) != spooky128(data, 0, 1)


def test_hex_is_32_lowercase_chars():
    h = spooky128(b"abc")
    text = h.hex()
    assert len(text) == 32
    assert text == text.lower()
    assert text == f"{h.hi:016x}{h.lo:016x}"


def test_artifact_id_shape():
    aid = artifact_id(b"some canonical content")
    assert aid.startswith("SpkyV2_")
    assert len(aid) == 39
    assert is_artifact_id(aid)


def test_artifact_id_deterministic_and_content_sensitive():
    assert artifact_id(b"x") == artifact_id(b"x")
    assert artifact_id(b"x") != artifact_id(b"y")


@pytest.mark.parametrize(
    "bad",
    [
        "",
        "SpkyV2_",
        "spkyv2_" + "0" * 32,
        "SpkyV2_" + "0" * 31,
        "SpkyV2_" + "0" * 33,
        "SpkyV2_" + "G" * 32,
        "SpkyV2_" + "A" * 32,  # uppercase hex is not canonical
    ],
)
def test_is_artifact_id_rejects(bad):
    assert not is_artifact_id(bad)


# --- canonical byte encoding ---


def test_canonical_bytes_dict_key_order_is_irrelevant():
    a = {"x": 1, "y": [2.5, "s"], "z": None}
    b = {"z": None, "y": [2.5, "s"], "x": 1}
    assert canonical_bytes(a) == canonical_bytes(b)


def test_canonical_bytes_distinguishes_types():
    seen = {canonical_bytes(v) for v in (1, 1.0, "1", True, [1], {"1": 1})}
    assert len(seen) == 6


def test_canonical_bytes_float_precision():
    assert canonical_bytes(0.1) == canonical_bytes(0.1)
    # 17 significant digits distinguish any two different doubles
    assert canonical_bytes(0.1) != canonical_bytes(0.10000000000000002)


def test_canonical_bytes_lists_and_tuples_agree():
    assert canonical_bytes([1, "a"]) == canonical_bytes((1, "a"))


def test_canonical_bytes_strings_are_length_prefixed():
    # concatenation ambiguity would make distinct structures collide
    assert canonical_bytes(["ab", "c"]) != canonical_bytes(["a", "bc"])


def test_canonical_bytes_dataclasses_tagged_by_class():
    @dataclass(frozen=True)
    class A:
        v: int

    @dataclass(frozen=True)
    class B:
        v: int

    assert canonical_bytes(A(1)) != canonical_bytes(B(1))
    assert canonical_bytes(A(1)) == canonical_bytes(A(1))


def test_canonical_bytes_rejects_unknown_types():
    with pytest.raises(TypeError):
        canonical_bytes({1, 2})
    with pytest.raises(TypeError):
        canonical_bytes({1: "non-string key"})
