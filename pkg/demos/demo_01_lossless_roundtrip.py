"""Walk through the lossless syntax layer: parse, re-emit, reorder.

Run from the repository root:  python demos/demo_01_lossless_roundtrip.py
"""

from pathlib import Path

from scopeweaver import SourceUnit, emit, parse_lossless, tokenize_unit

CORPUS = Path(__file__).resolve().parent.parent / "mini_corpus"


def main():
    path = CORPUS / "cv_blocks" / "attention" / "core.py"
    unit = SourceUnit.from_bytes("attention/core.py", path.read_bytes())
    print(f"file: {unit.path}  ({len(unit.data)} bytes, sha1 {unit.sha1[:12]})")

    tree = parse_lossless(unit)
    print(f"top-level chunks: {[node.kind for node in tree.top_level]}")

    print("byte-identical re-emission:", emit(tree) == unit.data)

    # move the two classes ahead of the helper function and re-emit
    order = sorted(tree.top_level, key=lambda n: n.kind != "ClassDef")
    reordered = emit(tree.reordered(order)).decode()
    print("\nafter reordering, the file still parses and comments stay attached:")
    print("-" * 60)
    print("\n".join(reordered.splitlines()[:14]))
    print("-" * 60)

    stream = tokenize_unit(unit)
    print(f"\ntokens: {len(stream.tokens)}; reconstruction exact:",
          stream.reconstruct() == unit.text())


if __name__ == "__main__":
    main()
