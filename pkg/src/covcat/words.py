"""Words in non-commuting matrix variables and trace-fingerprint equivalence.

A word is a monomial ``x_{i1}^{n1} x_{i2}^{n2} ...`` in m+1 non-commuting
variables. Its canonical form merges adjacent letters with equal variable
index by adding exponents; letters with exponent zero are kept, because under
the 0**0 = 0 functional-calculus convention ``A^0`` is the support projector
of A, not the identity, so ``x^0`` carries information for singular matrices.

Two tuples of matrices are simultaneously unitarily equivalent exactly when
all word traces agree (the Specht/Wiegmann trace criterion; for Hermitian
tuples, words in the entries themselves suffice because each entry equals its
adjoint). Enumerating all words is impossible, so `wiegmann_equivalent`
checks a bounded family plus random long words: a trace mismatch refutes
equivalence conclusively, while agreement is reported as evidence
("equivalent up to the bound"), not proof. Fractional and zeroth powers
additionally require positive semi-definite entries.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .linalg import (
    DimensionError,
    DomainError,
    hermitian_power,
    max_norm,
    require_hermitian,
    random_unitary,
    support_projector,
)


class WordSyntaxError(ValueError):
    """Malformed word text."""


@dataclass(frozen=True)
class Word:
    """Canonical word: letters are (variable index, non-negative exponent) pairs."""

    letters: tuple[tuple[int, int], ...]
    num_variables: int

    def __post_init__(self):
        if self.num_variables <= 0:
            raise ValueError("a word needs at least one variable")
        for idx, (var, exp) in enumerate(self.letters):
            if not (0 <= var < self.num_variables):
                raise ValueError(f"letter {idx}: variable x{var} out of range "
                                 f"(have {self.num_variables} variables)")
            if exp < 0:
                raise ValueError(f"letter {idx}: negative exponent {exp}")
            if idx > 0 and self.letters[idx - 1][0] == var:
                raise ValueError(f"letter {idx}: adjacent letters share variable x{var}; "
                                 "use Word.from_letters for canonicalization")

    @classmethod
    def from_letters(cls, letters: Sequence[tuple[int, int]], num_variables: int) -> "Word":
        merged: list[list[int]] = []
        for var, exp in letters:
            if merged and merged[-1][0] == int(var):
                merged[-1][1] += int(exp)
            else:
                merged.append([int(var), int(exp)])
        return cls(tuple((v, e) for v, e in merged), num_variables)

    @property
    def length(self) -> int:
        return len(self.letters)

    @property
    def participating(self) -> frozenset[int]:
        return frozenset(var for var, _ in self.letters)

    def __str__(self) -> str:
        parts = []
        for var, exp in self.letters:
            parts.append(f"x{var}" if exp == 1 else f"x{var}^{exp}")
        return " ".join(parts)


_TERM_RE = re.compile(r"^x(\d+)(?:\^(\d+))?$")


def parse_word(text: str, num_variables: int) -> Word:
    """Parse ``"x0^2 x1^3 x0^4"`` style text into a canonical word.

    Terms are whitespace separated; an omitted exponent means 1. Adjacent
    terms with the same variable merge by adding exponents.
    """
    tokens = text.split()
    if not tokens:
        raise WordSyntaxError("empty word")
    letters = []
    for tok in tokens:
        m = _TERM_RE.match(tok)
        if m is None:
            raise WordSyntaxError(f"malformed term {tok!r} (expected e.g. 'x0' or 'x1^3')")
        var = int(m.group(1))
        if var >= num_variables:
            raise WordSyntaxError(f"variable x{var} out of range: only {num_variables} variables")
        exp = int(m.group(2)) if m.group(2) is not None else 1
        letters.append((var, exp))
    return Word.from_letters(letters, num_variables)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def _check_tuple(word: Word, matrices: Sequence[np.ndarray],
                 psd_vars: frozenset[int], psd_tol: float) -> list[np.ndarray]:
    if len(matrices) != word.num_variables:
        raise DimensionError(f"word has {word.num_variables} variables, tuple has {len(matrices)}")
    mats = [require_hermitian(m) for m in matrices]
    d = mats[0].shape[0]
    for i, m in enumerate(mats):
        if m.shape[0] != d:
            raise DimensionError("tuple matrices have mixed dimensions")
        if i in psd_vars:
            low = np.linalg.eigvalsh(m)[0]
            if low < -psd_tol:
                raise DomainError(
                    f"variable x{i} has eigenvalue {low:.3e}: real or zeroth powers "
                    "need a positive semi-definite matrix")
    return mats


def word_trace(word: Word, matrices: Sequence[np.ndarray], psd_tol: float = 1e-10) -> complex:
    """Trace of the word evaluated on a Hermitian tuple with integer powers.

    An exponent of zero contributes the support projector of its matrix and
    is only defined for PSD entries (the 0**0 = 0 convention); strictly
    positive exponents work for any Hermitian tuple.
    """
    psd_vars = frozenset(var for var, exp in word.letters if exp == 0)
    mats = _check_tuple(word, matrices, psd_vars, psd_tol)
    d = mats[0].shape[0]
    acc = np.eye(d, dtype=complex)
    for var, exp in word.letters:
        if exp == 0:
            acc = acc @ support_projector(mats[var])
        else:
            acc = acc @ np.linalg.matrix_power(mats[var], exp)
    return complex(np.trace(acc))


def fractional_word_trace(word: Word, exponents: Sequence[float],
                          matrices: Sequence[np.ndarray], psd_tol: float = 1e-10) -> complex:
    """Word trace with each letter's exponent replaced by a real number.

    Matrix powers use PSD functional calculus with 0**s = 0, so the all-zero
    exponent vector yields the product of support projectors; at the word's
    own integer exponents this reproduces `word_trace`. Participating
    variables must be PSD for real powers to make sense.
    """
    mats = _check_tuple(word, matrices, word.participating, psd_tol)
    s = [float(x) for x in exponents]
    if len(s) != word.length:
        raise DimensionError(f"word length {word.length} != exponent vector length {len(s)}")
    if not all(np.isfinite(s)):
        raise DomainError("exponents must be finite")
    d = mats[0].shape[0]
    acc = np.eye(d, dtype=complex)
    for (var, _), sj in zip(word.letters, s):
        acc = acc @ hermitian_power(mats[var], sj)
    return complex(np.trace(acc))


# ---------------------------------------------------------------------------
# bounded word enumeration
# ---------------------------------------------------------------------------

def enumerate_words(num_variables: int, max_length: int, max_exponent: int) -> Iterator[Word]:
    """All canonical words up to the given length with exponents in 1..max_exponent,
    ordered by length so that short distinguishers are found first."""
    def of_length(prefix: list[tuple[int, int]], remaining: int, last_var: int) -> Iterator[tuple]:
        if remaining == 0:
            yield tuple(prefix)
            return
        for var in range(num_variables):
            if var == last_var:
                continue
            for exp in range(1, max_exponent + 1):
                prefix.append((var, exp))
                yield from of_length(prefix, remaining - 1, var)
                prefix.pop()

    for length in range(1, max_length + 1):
        for letters in of_length([], length, -1):
            yield Word(letters, num_variables)


def random_word(num_variables: int, length: int, max_exponent: int,
                rng: np.random.Generator) -> Word:
    letters = []
    last = -1
    for _ in range(length):
        if last < 0 or num_variables == 1:
            var = int(rng.integers(num_variables))
        else:
            var = int(rng.integers(num_variables - 1))
            if var >= last:
                var += 1
        letters.append((var, int(rng.integers(1, max_exponent + 1))))
        last = var
    return Word.from_letters(letters, num_variables)


@dataclass(frozen=True)
class EquivalenceConfig:
    max_length: int = 6
    max_exponent: int = 3
    num_random_words: int = 1000
    seed: int = 0
    tol: float = 1e-9

    def to_json(self) -> dict:
        return {"max_length": self.max_length, "max_exponent": self.max_exponent,
                "num_random_words": self.num_random_words, "seed": self.seed,
                "tol": self.tol}


@dataclass(frozen=True)
class EquivalenceVerdict:
    """Outcome of the bounded trace-fingerprint comparison.

    ``distinguished`` verdicts are conclusive non-equivalence; the
    ``equivalent-up-to-bound`` verdict is evidence at the configured
    enumeration depth, not a proof.
    """

    equivalent_up_to_bound: bool
    witness: Word | None
    trace_a: complex | None
    trace_b: complex | None
    words_checked: int
    config: EquivalenceConfig

    @property
    def verdict(self) -> str:
        return "equivalent-up-to-bound" if self.equivalent_up_to_bound else "distinguished"

    def to_json(self) -> dict:
        out = {"verdict": self.verdict, "words_checked": self.words_checked,
               "config": self.config.to_json()}
        if self.witness is not None:
            out["word"] = str(self.witness)
            out["trace_a"] = [self.trace_a.real, self.trace_a.imag]
            out["trace_b"] = [self.trace_b.real, self.trace_b.imag]
        return out


def wiegmann_equivalent(tuple_a: Sequence[np.ndarray], tuple_b: Sequence[np.ndarray],
                        config: EquivalenceConfig = EquivalenceConfig()) -> EquivalenceVerdict:
    """Compare trace fingerprints of two PSD tuples over a bounded word family.

    Enumerates every canonical word up to ``config.max_length`` with
    exponents up to ``config.max_exponent`` and then samples
    ``config.num_random_words`` longer words (lengths up to ``2 d^2``). The
    first word whose traces differ by more than ``config.tol`` (scaled by the
    trace magnitude) is returned as a witness.
    """
    if len(tuple_a) != len(tuple_b):
        raise DimensionError("tuples must have equal length")
    n_vars = len(tuple_a)
    mats_a = [require_hermitian(m) for m in tuple_a]
    mats_b = [require_hermitian(m) for m in tuple_b]
    d = mats_a[0].shape[0]
    if any(m.shape[0] != d for m in mats_a + mats_b):
        raise DimensionError("all matrices must share one dimension")

    # integer powers reused across words
    pow_a = [{1: m} for m in mats_a]
    pow_b = [{1: m} for m in mats_b]

    def power(cache, mats, var, exp):
        if exp not in cache[var]:
            if exp == 0:
                cache[var][0] = support_projector(mats[var])
            else:
                cache[var][exp] = cache[var][exp - 1] @ mats[var] if exp - 1 in cache[var] \
                    else np.linalg.matrix_power(mats[var], exp)
        return cache[var][exp]

    def traces(word: Word) -> tuple[complex, complex]:
        acc_a = np.eye(d, dtype=complex)
        acc_b = np.eye(d, dtype=complex)
        for var, exp in word.letters:
            acc_a = acc_a @ power(pow_a, mats_a, var, exp)
            acc_b = acc_b @ power(pow_b, mats_b, var, exp)
        return complex(np.trace(acc_a)), complex(np.trace(acc_b))

    checked = 0

    def check(word: Word) -> EquivalenceVerdict | None:
        nonlocal checked
        checked += 1
        ta, tb = traces(word)
        scale = max(1.0, abs(ta), abs(tb))
        if abs(ta - tb) > config.tol * scale:
            return EquivalenceVerdict(False, word, ta, tb, checked, config)
        return None

    for word in enumerate_words(n_vars, config.max_length, config.max_exponent):
        hit = check(word)
        if hit is not None:
            return hit
    rng = np.random.default_rng(config.seed)
    max_len = max(config.max_length + 1, 2 * d * d)
    for _ in range(config.num_random_words):
        length = int(rng.integers(config.max_length + 1, max_len + 1))
        hit = check(random_word(n_vars, length, config.max_exponent, rng))
        if hit is not None:
            return hit
    return EquivalenceVerdict(True, None, None, None, checked, config)


# ---------------------------------------------------------------------------
# constructive simultaneous unitary equivalence
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UnitaryMatchResult:
    success: bool
    unitary: np.ndarray | None
    residual: float
    stage: str  # "spectral" | "descent" | "none"
    restarts_used: int

    def to_json(self) -> dict:
        from .serialize import matrix_to_json
        out = {"success": self.success, "residual": self.residual,
               "stage": self.stage, "restarts_used": self.restarts_used}
        if self.unitary is not None:
            out["unitary"] = matrix_to_json(self.unitary)
        return out


def conjugation_residual(u: np.ndarray, tuple_a, tuple_b) -> float:
    return max(max_norm(u @ a @ u.conj().T - b) for a, b in zip(tuple_a, tuple_b))


def _spectral_match(mats_a, mats_b, rng, redraws: int = 20,
                    gap_tol: float = 1e-8, edge_tol: float = 1e-8):
    """Stage 1: diagonalize a random linear combination of each tuple, match
    eigenvectors by eigenvalue order and fix the residual diagonal phases from
    off-diagonal entries of the tuple elements in the matched bases."""
    d = mats_a[0].shape[0]
    for _ in range(redraws):
        coeff = rng.standard_normal(len(mats_a))
        wa, qa = np.linalg.eigh(sum(c * m for c, m in zip(coeff, mats_a)))
        wb, qb = np.linalg.eigh(sum(c * m for c, m in zip(coeff, mats_b)))
        if np.abs(wa - wb).max() > 1e-6 * max(1.0, np.abs(wa).max()):
            continue  # spectra differ for this combination; let later stages decide
        if d > 1 and np.min(np.diff(wa)) < gap_tol:
            continue  # degenerate combination, redraw
        rep_a = [qa.conj().T @ m @ qa for m in mats_a]
        rep_b = [qb.conj().T @ m @ qb for m in mats_b]
        # order elements by off-diagonal mass; the heaviest fixes most phases,
        # later ones only resolve components the earlier ones left unconstrained
        mass = [np.abs(m - np.diag(np.diag(m))).sum() for m in rep_a]
        order = np.argsort(mass)[::-1]
        phase = np.full(d, np.nan)
        phase[0] = 0.0
        def propagate():
            moved = True
            while moved:
                moved = False
                for t in order:
                    mat_a, mat_b = rep_a[t], rep_b[t]
                    weight = np.minimum(np.abs(mat_a), np.abs(mat_b))
                    np.fill_diagonal(weight, 0.0)
                    for jj in range(d):
                        if np.isnan(phase[jj]):
                            continue
                        for kk in range(d):
                            if not np.isnan(phase[kk]) or weight[jj, kk] <= edge_tol:
                                continue
                            phase[kk] = phase[jj] - np.angle(mat_b[jj, kk] / mat_a[jj, kk])
                            moved = True
        propagate()
        while np.isnan(phase).any():
            # disconnected phase graph: anchor the next component at zero
            phase[np.flatnonzero(np.isnan(phase))[0]] = 0.0
            propagate()
        return qb @ (np.exp(1j * phase)[:, None] * qa.conj().T)
    return None


def _polar(m: np.ndarray) -> np.ndarray:
    u, _, vh = np.linalg.svd(m)
    return u @ vh


def _descent(mats_a, mats_b, u0: np.ndarray, max_iter: int = 2000,
             target: float = 1e-22) -> np.ndarray:
    """Stage 2: minimize sum ||U A - B U||_F^2 over the unitary group by
    gradient descent with tangent-space projection, polar retraction and
    Armijo backtracking."""
    u = u0.copy()

    def cost(mat):
        return sum(np.linalg.norm(mat @ a - b @ mat) ** 2 for a, b in zip(mats_a, mats_b))

    val = cost(u)
    step = 0.1
    for _ in range(max_iter):
        grad = sum(2 * ((u @ a - b @ u) @ a - b @ (u @ a - b @ u))
                   for a, b in zip(mats_a, mats_b))
        tangent = grad - u @ grad.conj().T @ u
        slope = np.linalg.norm(tangent) ** 2
        if slope < 1e-30:
            break
        while step > 1e-16:
            candidate = _polar(u - step * tangent)
            cand_val = cost(candidate)
            if cand_val < val - 0.25 * step * slope:
                break
            step *= 0.5
        if step <= 1e-16:
            break
        u, val = candidate, cand_val
        step = min(step * 1.3, 1.0)
        if val < target:
            break
    return u


def find_simultaneous_unitary(tuple_a: Sequence[np.ndarray], tuple_b: Sequence[np.ndarray],
                              seed: int = 0, restarts: int = 10,
                              tol: float = 1e-8) -> UnitaryMatchResult:
    """Search for a unitary U with ``U A_i U^dag = B_i`` for Hermitian tuples.

    Two stages: spectral matching of a random linear combination (exact up to
    round-off whenever the combination has simple spectrum), then Riemannian
    gradient descent from the spectral candidate and from random restarts.
    Failure is not a certificate of non-equivalence; use
    `wiegmann_equivalent` for refutation.
    """
    if len(tuple_a) != len(tuple_b) or not tuple_a:
        raise DimensionError("tuples must be non-empty and of equal length")
    mats_a = [require_hermitian(m) for m in tuple_a]
    mats_b = [require_hermitian(m) for m in tuple_b]
    d = mats_a[0].shape[0]
    if any(m.shape[0] != d for m in mats_a + mats_b):
        raise DimensionError("all matrices must share one dimension")
    rng = np.random.default_rng(seed)

    best_u, best_res, best_stage = None, np.inf, "none"

    candidate = _spectral_match(mats_a, mats_b, rng)
    if candidate is not None:
        res = conjugation_residual(candidate, mats_a, mats_b)
        best_u, best_res, best_stage = candidate, res, "spectral"
        if res <= tol:
            return UnitaryMatchResult(True, candidate, res, "spectral", 0)

    starts: list[np.ndarray] = []
    if best_u is not None:
        starts.append(best_u)
    starts.append(np.eye(d, dtype=complex))
    while len(starts) < restarts:
        starts.append(random_unitary(d, rng))
    for used, start in enumerate(starts, start=1):
        refined = _descent(mats_a, mats_b, start)
        res = conjugation_residual(refined, mats_a, mats_b)
        if res < best_res:
            best_u, best_res, best_stage = refined, res, "descent"
        if best_res <= tol:
            return UnitaryMatchResult(True, best_u, best_res, best_stage, used)
    return UnitaryMatchResult(False, best_u, best_res, best_stage, len(starts))
