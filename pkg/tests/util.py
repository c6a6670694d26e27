"""Shared helpers for the test suite."""
from __future__ import annotations

import numpy as np

from graphwave import DampingProfile, assemble, build_mesh, load_network


def build_system_from(doc, cells=None):
    """Load a network dict and assemble it; returns (spec, system)."""
    if cells is not None:
        doc = dict(doc, edges=[dict(e, cells=cells) for e in doc["edges"]])
    spec = load_network(doc)
    mesh = build_mesh(spec.graph, spec.cells, damping=spec.damping)
    return spec, assemble(mesh, spec.damping)


def random_profile_config(rng: np.random.Generator) -> dict:
    """A random admissible damping profile in JSON form (unit edge length)."""
    kind = rng.integers(0, 4)
    if kind == 0:
        return {"kind": "zero"}
    if kind == 1:
        return {"kind": "constant", "value": float(rng.uniform(0.2, 3.0))}
    if kind == 2:
        # linear, positive at both ends
        a0 = float(rng.uniform(0.1, 2.0))
        a1 = float(rng.uniform(-0.9 * a0, 2.0))
        return {"kind": "pp", "breaks": [0.0, 1.0], "coeffs": [[a0, a1]]}
    # quadratic bump c*x*(1-x), vanishing at the endpoints
    c = float(rng.uniform(0.5, 4.0))
    return {"kind": "pp", "breaks": [0.0, 1.0], "coeffs": [[0.0, c, -c]]}


def random_tree_doc(rng: np.random.Generator, n_vertices: int | None = None,
                    cells: int = 4, scrambled: bool = True) -> dict:
    """A random tree network spec with random edge orientations in the file.

    Vertex 0 is the root.  Each non-root vertex attaches to a random earlier
    vertex; to keep the root at degree 1 only vertex 1 attaches to it.
    Profiles are written in the file's own edge orientation.
    """
    if n_vertices is None:
        n_vertices = int(rng.integers(4, 9))
    edges = []
    for v in range(1, n_vertices):
        parent = 0 if v == 1 else int(rng.integers(1, v))
        cfg = random_profile_config(rng)
        src, dst = parent, v
        if scrambled and rng.random() < 0.5 and parent != 0:
            # reverse the file orientation; mirror the profile so the
            # physical coefficient is unchanged
            src, dst = v, parent
            cfg = DampingProfile.from_config(cfg, 1.0).mirrored().to_config()
        edges.append({"id": f"e{v}", "from": f"v{src}", "to": f"v{dst}",
                      "length": 1.0, "cells": cells, "damping": cfg})
    vertices = [{"id": "v0", "root": True}]
    vertices += [{"id": f"v{v}"} for v in range(1, n_vertices)]
    return {"mode": "tree", "vertices": vertices, "edges": edges}


def as_graph_mode(doc: dict) -> dict:
    """The same network document in graph mode (explicit Dirichlet flags)."""
    degree: dict = {}
    for e in doc["edges"]:
        degree[e["from"]] = degree.get(e["from"], 0) + 1
        degree[e["to"]] = degree.get(e["to"], 0) + 1
    vertices = []
    for v in doc["vertices"]:
        entry = {"id": v["id"]}
        if degree.get(v["id"], 0) == 1:
            entry["dirichlet"] = True
        vertices.append(entry)
    return {"mode": "graph", "vertices": vertices, "edges": doc["edges"]}


def dof_permutation(mesh_tree, mesh_graph, flipped_edges):
    """perm[tree_dof] = graph_dof for two meshes of the same network."""
    n = mesh_tree.n_dofs
    perm = np.full(n, -1, dtype=int)
    for v, dof in mesh_tree.vertex_dof.items():
        if dof >= 0:
            perm[dof] = mesh_graph.vertex_dof[v]
    for em_t, em_g in zip(mesh_tree.edge_meshes, mesh_graph.edge_meshes):
        inner_t = em_t.dofs[1:-1]
        inner_g = em_g.dofs[1:-1]
        if em_t.edge_id in flipped_edges:
            inner_g = inner_g[::-1]
        perm[inner_t] = inner_g
    assert np.all(perm >= 0)
    return perm
