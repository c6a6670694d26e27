"""Canonical example networks used by the test suite and the demos."""
from __future__ import annotations


def single_kv_string(a: float = 1.0, cells: int = 64) -> dict:
    """One fully damped unit string, both ends pinned."""
    return {
        "mode": "tree",
        "vertices": [{"id": "R", "root": True}, {"id": "S"}],
        "edges": [
            {"id": "e", "from": "R", "to": "S", "length": 1.0, "cells": cells,
             "damping": {"kind": "constant", "value": a}},
        ],
    }


def undamped_string(cells: int = 64) -> dict:
    """Purely elastic unit string (conservation control; fails validation)."""
    return {
        "mode": "tree",
        "vertices": [{"id": "R", "root": True}, {"id": "S"}],
        "edges": [
            {"id": "e", "from": "R", "to": "S", "length": 1.0, "cells": cells,
             "damping": {"kind": "zero"}},
        ],
    }


def elastic_kv_chain(a: float = 1.0, cells: int = 64) -> dict:
    """Elastic edge joined to a constant-damped edge: the coefficient jumps at
    the inner node (polynomial-decay regime)."""
    return {
        "mode": "tree",
        "vertices": [{"id": "R", "root": True}, {"id": "mid"}, {"id": "S"}],
        "edges": [
            {"id": "elastic", "from": "R", "to": "mid", "length": 1.0, "cells": cells,
             "damping": {"kind": "zero"}},
            {"id": "kv", "from": "mid", "to": "S", "length": 1.0, "cells": cells,
             "damping": {"kind": "constant", "value": a}},
        ],
    }


def kv_star(a: float = 1.0, cells: int = 64) -> dict:
    """Three-edge star, every edge damped with the same constant, so the
    coefficient is continuous at the center (exponential-decay regime)."""
    return {
        "mode": "tree",
        "vertices": [
            {"id": "R", "root": True}, {"id": "O"}, {"id": "O1"}, {"id": "O2"},
        ],
        "edges": [
            {"id": "e", "from": "R", "to": "O", "length": 1.0, "cells": cells,
             "damping": {"kind": "constant", "value": a}},
            {"id": "e1", "from": "O", "to": "O1", "length": 1.0, "cells": cells,
             "damping": {"kind": "constant", "value": a}},
            {"id": "e2", "from": "O", "to": "O2", "length": 1.0, "cells": cells,
             "damping": {"kind": "constant", "value": a}},
        ],
    }


def mixed_tree(cells: int = 64) -> dict:
    """Two-level tree mixing constant, polynomial-bump, and elastic edges."""
    return {
        "mode": "tree",
        "vertices": [
            {"id": "R", "root": True}, {"id": "O"}, {"id": "O1"}, {"id": "O2"},
            {"id": "O11"}, {"id": "O12"},
        ],
        "edges": [
            {"id": "e", "from": "R", "to": "O", "length": 1.0, "cells": cells,
             "damping": {"kind": "constant", "value": 1.0}},
            {"id": "e1", "from": "O", "to": "O1", "length": 1.0, "cells": cells,
             "damping": {"kind": "zero"}},
            {"id": "e2", "from": "O", "to": "O2", "length": 1.0, "cells": cells,
             "damping": {"kind": "pp", "breaks": [0.0, 1.0], "coeffs": [[0.0, 4.0, -4.0]]}},
            {"id": "e11", "from": "O1", "to": "O11", "length": 1.0, "cells": cells,
             "damping": {"kind": "constant", "value": 1.0}},
            {"id": "e12", "from": "O1", "to": "O12", "length": 1.0, "cells": cells,
             "damping": {"kind": "constant", "value": 2.0}},
        ],
    }


def triangle_pendant(a: float = 1.0, cells: int = 64) -> dict:
    """Triangle with two damped sides plus an elastic pendant edge whose far
    end is the single Dirichlet vertex (graph mode)."""
    return {
        "mode": "graph",
        "vertices": [
            {"id": "g0"}, {"id": "g1"}, {"id": "g2"},
            {"id": "g3", "dirichlet": True},
        ],
        "edges": [
            {"id": "c0", "from": "g0", "to": "g1", "length": 1.0, "cells": cells,
             "damping": {"kind": "constant", "value": a}},
            {"id": "c1", "from": "g1", "to": "g2", "length": 1.0, "cells": cells,
             "damping": {"kind": "zero"}},
            {"id": "c2", "from": "g2", "to": "g0", "length": 1.0, "cells": cells,
             "damping": {"kind": "constant", "value": a}},
            {"id": "p", "from": "g0", "to": "g3", "length": 1.0, "cells": cells,
             "damping": {"kind": "zero"}},
        ],
    }


def canonical_networks(cells: int = 64) -> dict[str, dict]:
    """The five damped benchmark networks, keyed by name."""
    return {
        "single_kv_string": single_kv_string(cells=cells),
        "elastic_kv_chain": elastic_kv_chain(cells=cells),
        "kv_star": kv_star(cells=cells),
        "mixed_tree": mixed_tree(cells=cells),
        "triangle_pendant": triangle_pendant(cells=cells),
    }
