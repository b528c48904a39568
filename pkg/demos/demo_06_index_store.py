"""Content-addressed persistence: blobs, canonical catalog, stable digests.

Run from the repository root:  python demos/demo_06_index_store.py
"""

import tempfile
from pathlib import Path

from scopeweaver import IndexStore, scan

CORPUS = Path(__file__).resolve().parent.parent / "mini_corpus"


def main():
    with tempfile.TemporaryDirectory() as tmp:
        store = IndexStore(f"{tmp}/index")
        digest = store.write_index(scan([str(CORPUS)]))
        print(f"catalog digest: {digest}")

        blobs = sorted((Path(tmp) / "index" / "blobs").iterdir())
        print(f"blobs stored:   {len(blobs)} (content-addressed by sha1)")
        print(f"first blob key: {blobs[0].name}")

        again = IndexStore(f"{tmp}/index2")
        second = again.write_index(scan([str(CORPUS)]))
        print(f"rescan digest:  {second}  (identical: {second == digest})")

        loaded = store.load_index()
        print(f"reloaded units: {len(loaded.units)}, candidates: {len(loaded.candidates)}")

        store.export_sqlite(f"{tmp}/mirror.sqlite")
        print("sqlite mirror written (one table per record kind)")


if __name__ == "__main__":
    main()
