"""Regenerate the canonical network spec files under demos/networks/."""
import json
from pathlib import Path

from graphwave import presets

out_dir = Path(__file__).parent / "networks"
out_dir.mkdir(exist_ok=True)

docs = dict(presets.canonical_networks(cells=64))
docs["undamped_string"] = presets.undamped_string(cells=64)

for name, doc in docs.items():
    path = out_dir / f"{name}.json"
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    print(f"wrote {path}")
