"""Scan the bundled corpus, pick a block, and emit its self-contained module.

Run from the repository root:  python demos/demo_02_scan_and_extract.py
"""

from pathlib import Path

from scopeweaver import assemble, closure, find_target, scan

CORPUS = Path(__file__).resolve().parent.parent / "mini_corpus"


def main():
    index = scan([str(CORPUS)])
    eligible = [c for c in index.candidates if c.eligible]
    print(f"scanned {len(index.units)} files -> {len(index.candidates)} candidates, "
          f"{len(eligible)} eligible neural blocks")
    print("a few eligible blocks:")
    for cand in eligible[:6]:
        print(f"  {cand.qualname:55s} [{cand.category}]")

    target = find_target(index, "DiamondNet")
    result = closure(index, target)
    print(f"\nclosure of {target.qualname}:")
    for label in result.definition_labels():
        print(f"  needs {label}")
    print(f"  carries imports: {result.imports}")
    print(f"  external names:  {result.external}")

    module = assemble(result, index)
    print(f"\nassembled module ({module.sha1[:12]}):")
    print("-" * 60)
    print(module.source, end="")
    print("-" * 60)


if __name__ == "__main__":
    main()
