"""Regenerate tests/fixtures/gems10k.csv.

The fixture is committed; this script documents how it was produced. It uses
a hand-rolled Lehmer generator rather than the random module so regeneration
is exact regardless of interpreter version.

    python3 tests/oracles/gen_gems.py
"""

from pathlib import Path

MODULUS = 2**31 - 1
MULTIPLIER = 48271
CLARITIES = ["I1", "SI2", "SI1", "VS2", "VS1", "VVS2", "VVS1", "IF"]


def main() -> None:
    state = 987654321

    def draw() -> int:
        nonlocal state
        state = (state * MULTIPLIER) % MODULUS
        return state

    lines = ["carat,price,clarity"]
    for _ in range(10_000):
        carat = round(0.2 + (draw() % 231) / 100.0, 2)
        noise = draw() % 901 - 450
        price = max(326, int(1500 * carat * carat + 800 * carat + noise))
        clarity = CLARITIES[draw() % len(CLARITIES)]
        lines.append(f"{carat},{price},{clarity}")
    out = Path(__file__).parent.parent / "fixtures" / "gems10k.csv"
    out.write_text("\n".join(lines) + "\n")
    print(f"wrote {out} ({out.stat().st_size} bytes)")


if __name__ == "__main__":
    main()
