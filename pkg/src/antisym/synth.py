"""Clifford+T approximations of single-qubit Z and Y rotations.

Bounded meet-in-the-middle search over Matsumoto-Amano normal forms
``(T | 1) (HT | SHT)^k C`` (matrix-product order, ``C`` one of the 24
single-qubit Cliffords).  Every normal form with ``t`` T gates is split into a
prefix and a suffix of about ``t/2`` syllables each.  Suffix unitaries are
indexed in a k-d tree over unit quaternions, and each prefix queries the
tree for the closest completion.  Quaternion chord distance equals the
phase-minimized operator-norm distance, so the tree search is exact.

T-counts are searched in increasing order, so the first hit has the minimal
T-count among normal forms.  This stands in for number-theoretic synthesis,
which is not implemented.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .gates import FIXED_MATRICES, Kind, ry_matrix, rz_matrix

DEFAULT_FLOOR = 5e-3
DEFAULT_MAX_T = 40

# reference rows for Ry(2 arccos sqrt(1/3)): (error, T gates, total gates)
RS_REFERENCE = (
    (1e-1, 8, 28),
    (9e-3, 22, 64),
    (1e-3, 34, 91),
    (8e-6, 60, 158),
    (1e-7, 82, 215),
    (7e-11, 130, 340),
    (1e-13, 168, 432),
)
ANCILLA_ANGLE = 2 * math.acos(math.sqrt(1 / 3))

WORD_GATES = ("H", "T", "TDG", "S", "SDG", "X", "Z")


class SynthesisError(RuntimeError):
    def __init__(self, message: str, best_error: float):
        super().__init__(f"{message} (best error {best_error:.3e})")
        self.best_error = best_error


@dataclass(frozen=True)
class SynthesisResult:
    """A gate word in circuit order (first entry acts first)."""

    word: tuple[str, ...]
    error: float
    theta: float
    epsilon: float

    @property
    def t_count(self) -> int:
        return sum(1 for g in self.word if g in ("T", "TDG"))

    @property
    def total_count(self) -> int:
        return len(self.word)

    def matrix(self) -> np.ndarray:
        return word_matrix(self.word)


def word_matrix(word: Sequence[str]) -> np.ndarray:
    m = np.eye(2, dtype=complex)
    for g in word:
        m = FIXED_MATRICES[Kind(g)] @ m
    return m


# -- distance --------------------------------------------------------------------------


def _check_unitary(u: np.ndarray) -> None:
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError("expected a square matrix")
    if np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0]), 2) > 1e-9:
        raise ValueError("matrix is not unitary")


def operator_norm_distance(u, v) -> float:
    """``min_phi || U - e^{i phi} V ||`` in the spectral norm.

    The eigenphases of ``U^dag V`` lie on the unit circle; the best global
    phase centers the smallest arc containing all of them, and the distance
    is ``2 sin(w / 4)`` for arc width ``w``.
    """
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if u.shape != v.shape:
        raise ValueError(f"shape mismatch {u.shape} vs {v.shape}")
    _check_unitary(u)
    _check_unitary(v)
    ph = np.sort(np.mod(np.angle(np.linalg.eigvals(u.conj().T @ v)), 2 * math.pi))
    gaps = np.diff(np.concatenate([ph, [ph[0] + 2 * math.pi]]))
    width = 2 * math.pi - gaps.max()
    return float(2 * math.sin(max(width, 0.0) / 4))


def _quat(m: np.ndarray) -> np.ndarray:
    """Unit quaternion(s) of SU(2)-normalized matrices, shape (..., 4)."""
    det = m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    s = m / np.sqrt(det)[..., None, None]
    a, b = s[..., 0, 0], s[..., 0, 1]
    return np.stack([a.real, -b.imag, -b.real, -a.imag], axis=-1)


# -- normal-form tables ---------------------------------------------------------------------

_H = FIXED_MATRICES[Kind.H]
_T = FIXED_MATRICES[Kind.T]
_S = FIXED_MATRICES[Kind.S]
# syllables as matrices and as circuit-order words
_SYL = ((_H @ _T, ("T", "H")), (_S @ _H @ _T, ("T", "H", "S")))


@lru_cache(maxsize=1)
def cliffords() -> tuple[tuple[np.ndarray, tuple[str, ...]], ...]:
    """The 24 one-qubit Cliffords mod phase, each with a shortest word."""
    gens = [(Kind(g), FIXED_MATRICES[Kind(g)]) for g in ("H", "S", "SDG", "X", "Z")]
    seen: dict[tuple, tuple[np.ndarray, tuple[str, ...]]] = {}

    def key(m):
        q = _quat(m)
        if q[np.argmax(np.abs(q) > 1e-9)] < 0:
            q = -q
        return tuple(np.round(q, 9))

    frontier = [(np.eye(2, dtype=complex), ())]
    seen[key(frontier[0][0])] = frontier[0]
    while frontier:
        nxt = []
        for m, w in frontier:
            for k, g in gens:
                m2 = g @ m
                kk = key(m2)
                if kk not in seen:
                    seen[kk] = (m2, w + (k.value,))
                    nxt.append(seen[kk])
        frontier = nxt
    out = sorted(seen.values(), key=lambda e: (len(e[1]), e[1]))
    assert len(out) == 24
    return tuple(out)


def _syllable_products(k: int) -> tuple[np.ndarray, list[int]]:
    """All 2**k products S_1...S_k; index bits choose HT (0) or SHT (1)."""
    mats = np.eye(2, dtype=complex)[None]
    for _ in range(k):
        mats = np.concatenate([mats @ _SYL[0][0], mats @ _SYL[1][0]])
    return mats, list(range(2**k))


def _syllable_word(index: int, k: int) -> tuple[str, ...]:
    """Circuit-order word of product ``index``: bit ``j`` picks syllable ``j + 1``."""
    word: tuple[str, ...] = ()
    for j in range(k - 1, -1, -1):  # the rightmost factor acts first
        word += _SYL[index >> j & 1][1]
    return word


class _SuffixIndex:
    """k-d tree over quaternions of (syllables)^b . C for one suffix length b."""

    def __init__(self, b: int):
        mats, _ = _syllable_products(b)
        cl = cliffords()
        cm = np.stack([m for m, _ in cl])
        full = (mats[:, None] @ cm[None]).reshape(-1, 2, 2)
        q = _quat(full)
        self.b = b
        self.n = len(full)
        self.tree = cKDTree(np.concatenate([q, -q]))

    def decode(self, idx: int) -> tuple[str, ...]:
        idx %= self.n
        s, c = divmod(idx, 24)
        # circuit order: Clifford first, then syllables
        return cliffords()[c][1] + _syllable_word(s, self.b)


_index_lock = threading.Lock()
_indices: dict[int, _SuffixIndex] = {}


def _suffix(b: int) -> _SuffixIndex:
    with _index_lock:
        if b not in _indices:
            _indices[b] = _SuffixIndex(b)
        return _indices[b]


def _search_t(target: np.ndarray, t: int) -> tuple[float, tuple[str, ...]]:
    """Best normal form with exactly ``t`` T gates."""
    best = (math.inf, ())
    for lead in (0, 1):
        k = t - lead
        if k < 0:
            continue
        a = (k + 1) // 2
        b = k - a
        pm, _ = _syllable_products(a)
        if lead:
            pm = _T @ pm
        # want P . Q ~ target  ->  Q ~ P^dag target
        q = _quat(np.conj(np.swapaxes(pm, -1, -2)) @ target)
        idx = _suffix(b)
        dist, pos = idx.tree.query(q, k=1)
        i = int(np.argmin(dist))
        if dist[i] < best[0] - 1e-15:
            prefix = _syllable_word(i, a) + (("T",) if lead else ())
            best = (float(dist[i]), idx.decode(int(pos[i])) + prefix)
    return best


_SIMPLIFY = {("H", "H"): (), ("S", "SDG"): (), ("SDG", "S"): (), ("X", "X"): (), ("Z", "Z"): (),
             ("T", "TDG"): (), ("TDG", "T"): (), ("S", "S"): ("Z",), ("SDG", "SDG"): ("Z",),
             ("T", "T"): ("S",), ("TDG", "TDG"): ("SDG",)}  # fmt: skip


def simplify_word(word: Sequence[str]) -> tuple[str, ...]:
    """Cancel and merge adjacent letters until nothing changes."""
    out: list[str] = []
    for g in word:
        out.append(g)
        while len(out) >= 2 and (out[-2], out[-1]) in _SIMPLIFY:
            rep = _SIMPLIFY[(out[-2], out[-1])]
            del out[-2:]
            out.extend(rep)
    return tuple(out)


_EXACT = {0: (), 1: ("T",), 2: ("S",), 3: ("S", "T"), 4: ("Z",), 5: ("Z", "T"), 6: ("SDG",), 7: ("TDG",)}


def _exact_rz(theta: float) -> tuple[str, ...] | None:
    k = theta / (math.pi / 4)
    if abs(k - round(k)) < 1e-12:
        return _EXACT[round(k) % 8]
    return None


# -- cache -------------------------------------------------------------------------------------


class SynthesisCache:
    """Plain-text table ``axis theta epsilon error word`` keyed by (axis, theta, epsilon)."""

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path else None
        self._rows: dict[tuple[str, str, str], SynthesisResult] = {}
        self._lock = threading.Lock()
        if self.path and self.path.exists():
            self._load()

    @staticmethod
    def _key(axis: str, theta: float, eps: float) -> tuple[str, str, str]:
        return axis, format(theta, ".17g"), format(eps, ".17g")

    def _load(self) -> None:
        for line in self.path.read_text().splitlines():
            if not line.strip() or line.startswith("#"):
                continue
            axis, th, eps, err, *word = line.split()
            w = tuple(x for x in word if x != "-")
            self._rows[(axis, th, eps)] = SynthesisResult(w, float(err), float(th), float(eps))

    def get(self, axis: str, theta: float, eps: float) -> SynthesisResult | None:
        with self._lock:
            return self._rows.get(self._key(axis, theta, eps))

    def put(self, axis: str, res: SynthesisResult) -> None:
        with self._lock:
            key = self._key(axis, res.theta, res.epsilon)
            self._rows[key] = res
            if self.path:
                with self.path.open("a") as fh:
                    fh.write(" ".join([*key, format(res.error, ".17g"), " ".join(res.word) or "-"]) + "\n")


_default_cache = SynthesisCache()


def synthesize_rz(
    theta: float,
    epsilon: float,
    floor: float = DEFAULT_FLOOR,
    max_t: int = DEFAULT_MAX_T,
    cache: SynthesisCache | None = None,
) -> SynthesisResult:
    """Shortest-T normal form within ``epsilon`` of ``Rz(theta)`` up to global phase."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if epsilon < floor:
        raise ValueError(f"epsilon {epsilon:g} is below the search floor {floor:g}")
    cache = cache or _default_cache
    hit = cache.get("z", theta, epsilon)
    if hit is not None:
        return hit
    exact = _exact_rz(theta)
    target = rz_matrix(theta)
    if exact is not None:
        res = SynthesisResult(exact, operator_norm_distance(target, word_matrix(exact)), theta, epsilon)
        cache.put("z", res)
        return res
    best = (math.inf, ())
    for t in range(max_t + 1):
        err, word = _search_t(target, t)
        if err < best[0]:
            best = (err, word)
        if err <= epsilon:
            break
    else:
        raise SynthesisError(f"no word with at most {max_t} T gates reaches {epsilon:g}", best[0])
    word = simplify_word(best[1])
    res = SynthesisResult(word, operator_norm_distance(target, word_matrix(word)), theta, epsilon)
    cache.put("z", res)
    return res


# Ry(theta) = S H Rz(theta) H Sdg as matrices, so in circuit order: SDG, H, word, H, S
_RY_PRE = ("SDG", "H")
_RY_POST = ("H", "S")


def synthesize_ry(theta: float, epsilon: float, **kw) -> SynthesisResult:
    """Y rotation via the Clifford conjugate of a synthesized Z rotation."""
    rz = synthesize_rz(theta, epsilon, **kw)
    if not rz.word:
        return SynthesisResult((), rz.error, theta, epsilon)
    word = simplify_word(_RY_PRE + rz.word + _RY_POST)
    return SynthesisResult(word, operator_norm_distance(ry_matrix(theta), word_matrix(word)), theta, epsilon)


def rs_reference(epsilon: float) -> tuple[float, int, int] | None:
    """Published Ross-Selinger row for ``epsilon`` (matched to 1e-12 relative), if any."""
    for row in RS_REFERENCE:
        if math.isclose(row[0], epsilon, rel_tol=1e-12):
            return row
    return None
