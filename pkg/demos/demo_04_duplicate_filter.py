"""Formatting-blind duplicate filtering with the token fingerprint.

Run from the repository root:  python demos/demo_04_duplicate_filter.py
"""

import tempfile
import time

from scopeweaver import DedupStore, fingerprint, normalize

ORIGINAL = '''import math

def rms(values, eps=1e-8):
    total = sum(v * v for v in values)
    return math.sqrt(total / max(len(values), 1) + eps)
'''

REFORMATTED = '''import math


def rms( values , eps = 1e-8 ):   # same tokens, different layout
    total = sum(v*v for v in values)

    return math.sqrt(total / max(len(values), 1) + eps)
'''

RENAMED = ORIGINAL.replace("total", "acc")


def main():
    print("normalized form of 'x = 1':", normalize("x = 1"))
    print()
    print("original      ", fingerprint(ORIGINAL))
    print("reformatted   ", fingerprint(REFORMATTED), "(collides: formatting only)")
    print("renamed var   ", fingerprint(RENAMED), "(differs: token change)")

    started = time.perf_counter()
    for _ in range(1000):
        fingerprint(ORIGINAL)
    per_call = (time.perf_counter() - started)
    print(f"\n1000 fingerprints in {per_call * 1000:.1f} ms")

    with tempfile.TemporaryDirectory() as tmp:
        store = DedupStore(f"{tmp}/digests.jsonl")
        for label, source in (("original", ORIGINAL), ("reformatted", REFORMATTED), ("renamed", RENAMED)):
            status, record = store.check_and_insert(fingerprint(source), module_id=label)
            print(f"store says {label:12s} -> {status} (hits so far: {record.hit_count})")


if __name__ == "__main__":
    main()
