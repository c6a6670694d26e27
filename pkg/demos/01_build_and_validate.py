"""Build damped wave networks and check the structural hypotheses.

Walks the canonical networks through structure validation, the damping node
inequality, and coefficient continuity, printing the predicted decay regime
for each.  Ends with two deliberately broken configurations to show what the
checks reject.
"""
import numpy as np

from graphwave import (
    check_property_P,
    classify_continuity,
    incidence_matrix,
    load_network,
    validate_structure,
)
from graphwave.cli import predict_regime
from graphwave import presets

print("=== canonical networks ===")
for name, doc in presets.canonical_networks(cells=16).items():
    spec = load_network(doc)
    structure = validate_structure(spec.graph, spec.damping)
    prop = check_property_P(spec.graph, spec.damping)
    cont = classify_continuity(spec.graph, spec.damping)
    predicted = predict_regime(structure, prop, cont)
    print(f"{name:18s} structure={structure.overall:4s} "
          f"node-inequality={'ok' if prop.overall else 'violated'} "
          f"case={cont.case}  ->  predicted: {predicted}")

print()
print("=== incidence matrix of the triangle-with-pendant graph ===")
spec = load_network(presets.triangle_pendant(cells=16))
print(incidence_matrix(spec.graph).d)

print()
print("=== rejected configurations ===")

# a cycle of purely elastic edges cannot be swept from the damped edges
bad = presets.triangle_pendant(cells=16)
for e in bad["edges"][:3]:
    e["damping"] = {"kind": "zero"}
bad["edges"][3]["damping"] = {"kind": "constant", "value": 1.0}
spec = load_network(bad)
report = validate_structure(spec.graph, spec.damping)
print(f"elastic cycle: {report.overall}")
for msg in report.messages:
    print(f"  - {msg}")

# two elastic edges joined at the only damped vertex trap an undamped mode
trapped = presets.kv_star(cells=16)
trapped["edges"][1]["damping"] = {"kind": "zero"}
trapped["edges"][2]["damping"] = {"kind": "zero"}
spec = load_network(trapped)
report = validate_structure(spec.graph, spec.damping)
print(f"trapped elastic pair: {report.overall}")
for msg in report.messages:
    print(f"  - {msg}")
