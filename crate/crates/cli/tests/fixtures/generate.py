"""Regenerates the CLI test fixtures.

Expected values are computed here with numpy's dense linear algebra, so they
do not depend on the Rust implementation. Run from any directory:

    python3 crates/cli/tests/fixtures/generate.py
"""

import hashlib
import json
import shutil
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent


def save(path, array):
    path.parent.mkdir(parents=True, exist_ok=True)
    np.save(path, np.ascontiguousarray(array, dtype="<f4"))


def load(path):
    return np.load(path).astype(np.float64)


def write_json(path, obj):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2) + "\n")


def sign_normalize(rows):
    rows = rows.copy()
    for row in rows:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1
    return rows


def write_concept(root, name, rows):
    """Bank, embedding matrix and a subspace dir spanned by the rows' top
    singular directions."""
    rows = np.asarray(rows, dtype=np.float64)
    bank = root / "banks" / f"{name}.json"
    emb = root / "embeddings" / f"{name}.npy"
    write_json(bank, {
        "concept_name": name,
        "rank_class": "custom",
        "prompts": [f"{name} prompt {i}" for i in range(len(rows))],
        "provenance": "fixture",
    })
    save(emb, rows)
    return bank, emb


def write_subspace(root, name, basis, sigma, rows):
    bank, emb = write_concept(root, name, rows)
    out = root / "subspaces" / name
    out.mkdir(parents=True, exist_ok=True)
    save(out / "basis.npy", basis)
    save(out / "sigma.npy", np.asarray(sigma))
    write_json(out / "manifest.json", {
        "concept_name": name,
        "prompt_bank_path": f"../../banks/{name}.json",
        "embedding_matrix_path": f"../../embeddings/{name}.npy",
        "rank": int(basis.shape[0]),
        "source": "text-spanned",
        "dim": int(basis.shape[1]),
        "checksum": hashlib.sha256(emb.read_bytes()).hexdigest(),
    })
    return load(out / "basis.npy")


def projector(basis):
    return basis.T @ basis


def one_step(ref, terms):
    out = ref.copy()
    for p, c in terms:
        out = out - p @ ref + p @ c
    return out


def fold(ref, terms):
    acc = ref.copy()
    for p, c in terms:
        acc = acc - p @ acc + p @ c
    return acc


def composition_fixture(name, ref, concepts, modes):
    root = ROOT / name
    save(root / "reference.npy", ref)
    terms = []
    bindings = []
    for i, (cname, basis, sigma, rows, c) in enumerate(concepts):
        b = write_subspace(root, cname, basis, sigma, rows)
        save(root / f"concept_{i}.npy", c)
        terms.append((projector(b), load(root / f"concept_{i}.npy")))
        bindings.append({
            "concept_embedding_path": f"concept_{i}.npy",
            "subspace_dir": f"subspaces/{cname}",
        })
    r = load(root / "reference.npy")
    for mode in modes:
        write_json(root / f"{mode}.json", {
            "reference_embedding_path": "reference.npy",
            "bindings": bindings,
            "mode": mode,
        })
        expected = one_step(r, terms) if mode == "one-step" else fold(r, terms)
        save(root / f"expected_{mode}.npy", expected)


def axis_fixture():
    e = np.eye(4)
    composition_fixture(
        "axis",
        np.ones(4),
        [
            ("first", e[:1], [3.0], 3 * e[:1], np.full(4, 5.0)),
            ("second", e[1:2], [2.0], 2 * e[1:2], np.full(4, 7.0)),
        ],
        ["one-step", "sequential"],
    )


def overlap_fixture():
    e = np.eye(2)
    composition_fixture(
        "overlap",
        np.ones(2),
        [
            ("first", e[:1], [1.0], e[:1], np.array([3.0, 0.0])),
            ("second", e[:1], [1.0], e[:1], np.array([5.0, 0.0])),
        ],
        ["one-step", "sequential"],
    )


def rotated_fixture():
    rng = np.random.default_rng(7)
    q, _ = np.linalg.qr(rng.standard_normal((6, 6)))
    a = sign_normalize(q[:, 0:2].T)
    b = sign_normalize(q[:, 2:3].T)
    composition_fixture(
        "rotated",
        rng.standard_normal(6),
        [
            ("pattern", a, [3.0, 2.0], np.diag([3.0, 2.0]) @ a, rng.standard_normal(6)),
            ("color", b, [4.0], 4.0 * b, rng.standard_normal(6)),
        ],
        ["one-step", "sequential"],
    )


def build_fixture():
    root = ROOT / "build"
    rows = np.array([
        [1, 2, 0, -1],
        [3, -1, 2, 0],
        [0, 2, -2, 1],
        [-1, 0, 3, 2],
        [2, 1, 1, -3],
        [1, -2, 0, 1],
    ], dtype=np.float64)
    write_concept(root, "shape", rows)
    _, s, vt = np.linalg.svd(rows)
    save(root / "expected_basis.npy", sign_normalize(vt[:2]))
    save(root / "expected_sigma.npy", s[:2])


def inspect_fixture():
    root = ROOT / "inspect"
    diag = np.array([[2.0, 0.0], [0.0, 1.0]])
    save(root / "diag22.npy", diag)
    write_json(root / "diag22.json", diag.tolist())
    s = np.linalg.svd(diag, compute_uv=False)
    energy = np.cumsum(s**2) / np.sum(s**2)
    lines = ["index,sigma,energy_fraction"]
    lines += [f"{i + 1},{repr(float(x))},{repr(float(f))}" for i, (x, f) in enumerate(zip(s, energy))]
    (root / "diag22.csv").write_text("\n".join(lines) + "\n")


def eval_fixture():
    root = ROOT / "eval"
    vectors = {
        "generated": [1.0, 1.0],
        "hat": [1.0, 0.0],
        "scarf": [1.0, 1.0],
        "background": [1.0, -1.0],
        "zero": [0.0, 0.0],
    }
    for name, v in vectors.items():
        save(root / f"{name}.npy", np.array(v))

    def cos(a, b):
        a, b = np.array(a), np.array(b)
        return float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))

    g = vectors["generated"]
    cases = [
        {"concept": "hat", "similarity": cos(g, vectors["hat"]), "leakage": None},
        {"concept": "scarf", "similarity": cos(g, vectors["scarf"]), "leakage": None},
        {"concept": "background", "similarity": None, "leakage": cos(g, vectors["background"])},
    ]
    sims = [c["similarity"] for c in cases if c["similarity"] is not None]
    leaks = [c["leakage"] for c in cases if c["leakage"] is not None]
    write_json(root / "expected.json", {
        "cases": cases,
        "mean_similarity": sum(sims) / len(sims),
        "mean_leakage": sum(leaks) / len(leaks),
    })


def main():
    for child in ROOT.iterdir():
        if child.is_dir():
            shutil.rmtree(child)
    axis_fixture()
    overlap_fixture()
    rotated_fixture()
    build_fixture()
    inspect_fixture()
    eval_fixture()


if __name__ == "__main__":
    main()
