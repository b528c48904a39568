"""The structural gate for training-spec documents: pass, fix, or reject.

Run from the repository root:  python demos/demo_05_spec_gate.py
"""

import json

from scopeweaver import RetryLedger, retry_gate, validate_spec

VALID = """
task: classification
dataset: cifar10
metric: top1
epochs: 30
model_ref: cv_blocks.arch.resnet_tiny.TinyResNet
transform_ref: transforms.standard_rgb
loss: cross_entropy
optimizer: sgd
hyperparameters:
  learning_rate: 0.05
  momentum: 0.9
  weight_decay: 0.0005
  batch_size: 128
"""

SLOPPY = """
task: classification
dataset: cifar10
metric: top1
epochs: "30"
model_ref: cv_blocks.arch.resnet_tiny.TinyResNet
transform_ref: transforms.standard_rgb
loss: cross_entropy
optimizer: SGD
hyperparameters:
  batch_size: 128
  lr: "0.05"
  momentum: 0.9
  weight_decay: 0.0005
"""

BROKEN = VALID.replace("momentum: 0.9", "momentum: 1.5")


def main():
    for label, doc in (("valid", VALID), ("sloppy", SLOPPY), ("broken", BROKEN)):
        outcome = validate_spec(doc)
        print(f"{label:7s} -> {outcome.status}")
        for fix in outcome.fixes:
            print(f"         fixed {fix['path']} via {fix['rule']}: {fix['found']!r} -> {fix['fixed']!r}")
        for diag in outcome.diagnostics:
            print(f"         rejected {diag['path']}: {diag['rule']} (found {diag['found']!r}, expected {diag['expected']})")
        if outcome.canonical:
            hypers = json.loads(outcome.canonical)["hyperparameters"]
            print(f"         canonical hyperparameter order: {list(hypers)}")

    ledger = RetryLedger()
    rejected = validate_spec(BROKEN)
    print("\nretry budget per lineage:")
    for attempt in range(3):
        print(f"  attempt {attempt + 1}: {retry_gate(rejected, 'demo-lineage', ledger)}")


if __name__ == "__main__":
    main()
