"""Embedding models for link prediction: scoring and analytic gradients.

Five model families over dense entity ids.  All scores follow a single
higher-is-better convention (distance-based models are negated):

* RESCAL      s(e_s, r, e_o) = e_s^T M_r e_o
* ComplEx     s = Re(sum_k e_s[k] * w_r[k] * conj(e_o[k]))
* TuckER      s = sum_{abc} W[a,b,c] e_s[a] w_r[b] e_o[c]
* TransE      s = -|| e_s + w_r - e_o ||_1
* RotatE      s = -sum_k | e_s[k] * exp(i theta_r[k]) - e_o[k] |

Complex-valued blocks (ComplEx and RotatE entities, ComplEx relations) are
stored as complex128 arrays; their "gradients" use the real-pair convention
g = d/dRe + i * d/dIm, so viewing parameters and gradients as float64 makes
every update an ordinary elementwise real update.

Hinge subgradient choices: the margin loss is flat (all-zero gradients) when
margin + neg - pos <= 0; TransE uses sign() with sign(0) = 0; RotatE treats
a zero-modulus component as gradient 0.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

TWO_PI = 2.0 * math.pi


class ModelKind(Enum):
    RESCAL = "RESCAL"
    COMPLEX = "ComplEx"
    TUCKER = "TuckER"
    TRANSE = "TransE"
    ROTATE = "RotatE"

    @classmethod
    def from_name(cls, name: str) -> "ModelKind":
        for kind in cls:
            if kind.value.lower() == name.lower():
                return kind
        valid = ", ".join(k.value for k in cls)
        raise ValueError(f"unknown model {name!r} (valid: {valid})")


@dataclass
class ModelParams:
    """Learned parameter blocks for one model.

    ``blocks`` maps block names ("entity", "relation", and "core" for
    TuckER) to numpy arrays.  TransE entity rows keep unit L2 norm and
    RotatE relation phases stay in [0, 2*pi) after every optimizer step.
    """

    kind: ModelKind
    dim: int
    num_entities: int
    num_relations: int
    seed: int
    blocks: dict[str, np.ndarray]

    @property
    def entity_emb(self) -> np.ndarray:
        return self.blocks["entity"]

    @property
    def relation_param(self) -> np.ndarray:
        return self.blocks["relation"]

    @property
    def core_tensor(self) -> np.ndarray | None:
        return self.blocks.get("core")

    def copy(self) -> "ModelParams":
        return ModelParams(
            kind=self.kind,
            dim=self.dim,
            num_entities=self.num_entities,
            num_relations=self.num_relations,
            seed=self.seed,
            blocks={k: v.copy() for k, v in self.blocks.items()},
        )

    def all_finite(self) -> bool:
        return all(np.isfinite(v).all() for v in self.blocks.values())


def _glorot(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    fan_in, fan_out = shape[0], int(np.prod(shape[1:]))
    a = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-a, a, size=shape)


def _glorot_complex(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    return _glorot(rng, shape) + 1j * _glorot(rng, shape)


def init_params(kind: ModelKind, num_entities: int, num_relations: int, config) -> ModelParams:
    """Deterministically initialize parameter blocks for ``config.seed``.

    Real entries are uniform in [-a, a] with a = sqrt(6 / (fan_in + fan_out))
    per block; RotatE phases are uniform in [0, 2*pi); TransE entity rows are
    normalized to unit L2 norm.
    """
    if num_entities <= 0 or num_relations <= 0:
        raise ValueError("entity and relation counts must be positive")
    rng = np.random.default_rng(config.seed)
    d = config.dim
    blocks: dict[str, np.ndarray] = {}
    if kind is ModelKind.TRANSE:
        ent = _glorot(rng, (num_entities, d))
        ent /= np.linalg.norm(ent, axis=1, keepdims=True)
        blocks["entity"] = ent
        blocks["relation"] = _glorot(rng, (num_relations, d))
    elif kind is ModelKind.RESCAL:
        blocks["entity"] = _glorot(rng, (num_entities, d))
        blocks["relation"] = _glorot(rng, (num_relations, d, d))
    elif kind is ModelKind.TUCKER:
        blocks["entity"] = _glorot(rng, (num_entities, d))
        blocks["relation"] = _glorot(rng, (num_relations, d))
        blocks["core"] = _glorot(rng, (d, d, d))
    elif kind is ModelKind.COMPLEX:
        blocks["entity"] = _glorot_complex(rng, (num_entities, d))
        blocks["relation"] = _glorot_complex(rng, (num_relations, d))
    elif kind is ModelKind.ROTATE:
        blocks["entity"] = _glorot_complex(rng, (num_entities, d))
        blocks["relation"] = rng.uniform(0.0, TWO_PI, size=(num_relations, d))
    else:  # pragma: no cover
        raise ValueError(f"unhandled model kind {kind}")
    return ModelParams(
        kind=kind,
        dim=d,
        num_entities=num_entities,
        num_relations=num_relations,
        seed=config.seed,
        blocks=blocks,
    )


def apply_constraints(params: ModelParams) -> None:
    """Project parameters back onto their constraint sets, in place."""
    if params.kind is ModelKind.TRANSE:
        ent = params.blocks["entity"]
        ent /= np.linalg.norm(ent, axis=1, keepdims=True)
    elif params.kind is ModelKind.ROTATE:
        rel = params.blocks["relation"]
        np.mod(rel, TWO_PI, out=rel)


# ---------------------------------------------------------------------------
# Scoring
# ---------------------------------------------------------------------------

def score_batch(params: ModelParams, triples: np.ndarray) -> np.ndarray:
    """Scores for an (B, 3) array of (subject, relation, object) id triples."""
    triples = np.atleast_2d(np.asarray(triples, dtype=np.int64))
    s, r, o = triples[:, 0], triples[:, 1], triples[:, 2]
    E, R = params.blocks["entity"], params.blocks["relation"]
    kind = params.kind
    if kind is ModelKind.TRANSE:
        return -np.abs(E[s] + R[r] - E[o]).sum(axis=1)
    if kind is ModelKind.RESCAL:
        return np.einsum("bi,bij,bj->b", E[s], R[r], E[o], optimize=True)
    if kind is ModelKind.COMPLEX:
        return np.real(np.sum(E[s] * R[r] * np.conj(E[o]), axis=1))
    if kind is ModelKind.TUCKER:
        W = params.blocks["core"]
        return np.einsum("abc,ia,ib,ic->i", W, E[s], R[r], E[o], optimize=True)
    if kind is ModelKind.ROTATE:
        rot = np.exp(1j * R[r])
        return -np.abs(E[s] * rot - E[o]).sum(axis=1)
    raise ValueError(f"unhandled model kind {kind}")  # pragma: no cover


def score(params: ModelParams, s: int, r: int, o: int) -> float:
    """Plausibility score of one triple; higher means more plausible."""
    return float(score_batch(params, np.array([[s, r, o]]))[0])


def score_objects(params: ModelParams, s: int, r: int) -> np.ndarray:
    """Scores of every entity as candidate object of (s, r, ?)."""
    E, R = params.blocks["entity"], params.blocks["relation"]
    kind = params.kind
    if kind is ModelKind.TRANSE:
        return -np.abs((E[s] + R[r])[None, :] - E).sum(axis=1)
    if kind is ModelKind.RESCAL:
        return E @ (E[s] @ R[r])
    if kind is ModelKind.COMPLEX:
        return np.real(np.conj(E) @ (E[s] * R[r]))
    if kind is ModelKind.TUCKER:
        W = params.blocks["core"]
        v = np.einsum("abc,a,b->c", W, E[s], R[r], optimize=True)
        return E @ v
    if kind is ModelKind.ROTATE:
        return -np.abs((E[s] * np.exp(1j * R[r]))[None, :] - E).sum(axis=1)
    raise ValueError(f"unhandled model kind {kind}")  # pragma: no cover


# ---------------------------------------------------------------------------
# Negative sampling and loss
# ---------------------------------------------------------------------------

def negative_sample(triple: tuple[int, int, int], num_entities: int, rng: np.random.Generator) -> tuple[int, int, int]:
    """Corrupt one slot of a triple with a uniformly random other entity.

    The subject is replaced with probability 1/2, otherwise the object; the
    replacement is uniform over the remaining entities and never equals the
    original occupant.  No filtering against known-true triples.
    """
    if num_entities < 2:
        raise ValueError("negative sampling needs at least two entities")
    s, r, o = triple
    corrupt_subject = rng.random() < 0.5
    orig = s if corrupt_subject else o
    repl = int(rng.integers(num_entities - 1))
    if repl >= orig:
        repl += 1
    return (repl, r, o) if corrupt_subject else (s, r, repl)


def corrupt_batch(pos: np.ndarray, num_entities: int, rng: np.random.Generator) -> np.ndarray:
    """Vectorized negative sampling, one corrupted triple per positive."""
    if num_entities < 2:
        raise ValueError("negative sampling needs at least two entities")
    neg = pos.copy()
    b = len(neg)
    idx = np.arange(b)
    slot = np.where(rng.random(b) < 0.5, 0, 2)
    orig = neg[idx, slot]
    repl = rng.integers(0, num_entities - 1, size=b)
    repl = repl + (repl >= orig)
    neg[idx, slot] = repl
    return neg


def margin_ranking_loss(pos_score: float, neg_score: float, margin: float) -> float:
    """Hinge ranking loss max(0, margin + neg_score - pos_score)."""
    return max(0.0, margin + neg_score - pos_score)


# ---------------------------------------------------------------------------
# Analytic gradients
# ---------------------------------------------------------------------------

def _accumulate_score_grads(
    params: ModelParams, grads: dict[str, np.ndarray], triples: np.ndarray, coeff: float
) -> None:
    """Add coeff * (d score / d params) of each triple into dense ``grads``."""
    if len(triples) == 0:
        return
    s, r, o = triples[:, 0], triples[:, 1], triples[:, 2]
    E, R = params.blocks["entity"], params.blocks["relation"]
    gE, gR = grads["entity"], grads["relation"]
    kind = params.kind
    if kind is ModelKind.TRANSE:
        sgn = np.sign(E[s] + R[r] - E[o])
        np.add.at(gE, s, -coeff * sgn)
        np.add.at(gR, r, -coeff * sgn)
        np.add.at(gE, o, coeff * sgn)
    elif kind is ModelKind.RESCAL:
        es, eo, M = E[s], E[o], R[r]
        np.add.at(gE, s, coeff * np.einsum("bij,bj->bi", M, eo, optimize=True))
        np.add.at(gE, o, coeff * np.einsum("bij,bi->bj", M, es, optimize=True))
        np.add.at(gR, r, coeff * np.einsum("bi,bj->bij", es, eo))
    elif kind is ModelKind.COMPLEX:
        es, eo, w = E[s], E[o], R[r]
        np.add.at(gE, s, coeff * (np.conj(w) * eo))
        np.add.at(gR, r, coeff * (np.conj(es) * eo))
        np.add.at(gE, o, coeff * (es * w))
    elif kind is ModelKind.TUCKER:
        W = params.blocks["core"]
        es, eo, w = E[s], E[o], R[r]
        np.add.at(gE, s, coeff * np.einsum("abc,ib,ic->ia", W, w, eo, optimize=True))
        np.add.at(gR, r, coeff * np.einsum("abc,ia,ic->ib", W, es, eo, optimize=True))
        np.add.at(gE, o, coeff * np.einsum("abc,ia,ib->ic", W, es, w, optimize=True))
        grads["core"] += coeff * np.einsum("ia,ib,ic->abc", es, w, eo, optimize=True)
    elif kind is ModelKind.ROTATE:
        theta = R[r]
        rot = np.exp(1j * theta)
        es = E[s]
        u = es * rot - E[o]
        m = np.abs(u)
        gu = np.zeros_like(u)
        nz = m > 0
        gu[nz] = -u[nz] / m[nz]
        np.add.at(gE, s, coeff * (np.conj(rot) * gu))
        np.add.at(gE, o, -coeff * gu)
        np.add.at(gR, r, coeff * np.imag(np.conj(es) * gu * np.conj(rot)))
    else:  # pragma: no cover
        raise ValueError(f"unhandled model kind {kind}")


def zero_grads(params: ModelParams) -> dict[str, np.ndarray]:
    return {name: np.zeros_like(arr) for name, arr in params.blocks.items()}


def batch_loss_and_gradients(
    params: ModelParams, pos: np.ndarray, neg: np.ndarray, margin: float
) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    """Per-pair hinge losses and the gradient of their batch mean."""
    pos_scores = score_batch(params, pos)
    neg_scores = score_batch(params, neg)
    losses = np.maximum(0.0, margin + neg_scores - pos_scores)
    grads = zero_grads(params)
    active = losses > 0.0
    if active.any():
        scale = 1.0 / len(pos)
        _accumulate_score_grads(params, grads, pos[active], -scale)
        _accumulate_score_grads(params, grads, neg[active], scale)
    return losses, grads


def gradients(
    params: ModelParams,
    pos: tuple[int, int, int],
    neg: tuple[int, int, int],
    margin: float,
) -> dict[str, np.ndarray]:
    """Exact gradient of the hinge loss of one (positive, negative) pair.

    Dense arrays shaped like the parameter blocks; all-zero when the hinge
    is inactive (pos_score - neg_score >= margin).
    """
    pos_arr = np.array([pos], dtype=np.int64)
    neg_arr = np.array([neg], dtype=np.int64)
    grads = zero_grads(params)
    loss = margin + score_batch(params, neg_arr)[0] - score_batch(params, pos_arr)[0]
    if loss > 0.0:
        _accumulate_score_grads(params, grads, pos_arr, -1.0)
        _accumulate_score_grads(params, grads, neg_arr, 1.0)
    return grads


# ---------------------------------------------------------------------------
# Checkpoints
# ---------------------------------------------------------------------------

def save_checkpoint(params: ModelParams, path: str | Path) -> Path:
    """Write a bit-exact checkpoint (.npz with a JSON header)."""
    path = Path(path)
    header = json.dumps(
        {
            "kind": params.kind.value,
            "dim": params.dim,
            "num_entities": params.num_entities,
            "num_relations": params.num_relations,
            "seed": params.seed,
        },
        sort_keys=True,
    )
    arrays = {f"block_{name}": arr for name, arr in params.blocks.items()}
    with open(path, "wb") as fh:
        np.savez(fh, header=np.array(header), **arrays)
    return path


def load_checkpoint(path: str | Path) -> ModelParams:
    with np.load(path, allow_pickle=False) as data:
        header = json.loads(str(data["header"]))
        blocks = {
            name[len("block_"):]: data[name] for name in data.files if name.startswith("block_")
        }
    return ModelParams(
        kind=ModelKind(header["kind"]),
        dim=int(header["dim"]),
        num_entities=int(header["num_entities"]),
        num_relations=int(header["num_relations"]),
        seed=int(header["seed"]),
        blocks=blocks,
    )
