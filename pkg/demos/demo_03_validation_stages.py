"""Staged validation: static checks in-process, optional sandboxed import.

Run from the repository root:  python demos/demo_03_validation_stages.py
The dynamic stage runs only if the sandbox worker package is installed.
"""

from pathlib import Path

from scopeweaver import (
    assemble,
    closure,
    executability_report,
    find_target,
    scan,
    validate_module,
    validate_static,
)

CORPUS = Path(__file__).resolve().parent.parent / "mini_corpus"


def main():
    index = scan([str(CORPUS)])
    module = assemble(closure(index, find_target(index, "FocalLoss")), index)

    report = validate_static(module)
    print(f"static verdict for {report.target}: {report.verdict}")

    # seed a fault: drop the helper the loss depends on
    broken = module.source.replace("def _reduce(loss, reduction):", "def _unrelated(loss, reduction):")
    broken_report = validate_static(broken, target="seeded.Broken")
    print(f"seeded fault verdict: {broken_report.verdict}, unresolved={broken_report.unresolved}")

    try:
        dynamic = validate_module(module, dynamic=True, budget_s=60)
        stages = ", ".join(f"{s.name}={'ok' if s.ok else s.error_class}" for s in dynamic.stages)
        print(f"dynamic stages: {stages} -> {dynamic.verdict}")
    except Exception as exc:  # worker not installed
        print(f"dynamic stage skipped ({exc})")

    eligible = [c for c in index.candidates if c.eligible]
    reports = [
        validate_static(assemble(closure(index, c), index, allow_unresolved=True), target=c.qualname)
        for c in eligible
    ]
    stats = executability_report(reports, eligible)
    print(f"\ncorpus executability: {stats.admitted}/{stats.total} (rate {stats.rate:.3f})")
    for category, (total, admitted) in stats.per_category.items():
        print(f"  {category:20s} {admitted}/{total}")


if __name__ == "__main__":
    main()
