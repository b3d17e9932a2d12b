"""Quantum channels in Kraus form, with Choi conversion and covariance tests.

Conventions
-----------
* Kraus operators are ``d_out x d_in``; a channel acts as ``sum K rho K^dag``.
* The Choi matrix is unnormalized and ordered output-first:
  ``J(T) = sum_ij T(E_ij) (x) E_ij``. The identity channel on dimension d has
  Choi ``d |Omega><Omega|``.
* Superoperators use row-major vectorization, ``vec(K rho K^dag) =
  (K (x) conj(K)) vec(rho)``.
* Composite systems are ordered system-first: a channel "on SC" acts on
  ``d_S * d_C`` with S owning the outer indices. Dilation unitaries place the
  environment last, ``U`` on S (x) E, unless noted otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .linalg import (
    DimensionError,
    DomainError,
    STRUCT_TOL,
    as_square,
    max_norm,
    partial_trace,
    require_density,
    require_hermitian,
    require_unitary,
    tensor,
)
from .symmetry import FiniteGroupRep, gibbs_state

CHANNEL_TOL = 1e-9  # trace preservation / Choi positivity tolerance
CHOI_EIG_CUTOFF = 1e-12  # eigenvalue cutoff for Kraus extraction


class Channel:
    """Completely positive map given by Kraus operators.

    By default the constructor enforces trace preservation within
    ``CHANNEL_TOL``; pass ``require_tp=False`` for merely CP maps such as
    Hilbert-Schmidt duals of non-unital channels.
    """

    def __init__(self, kraus: Sequence[np.ndarray], d_in: int | None = None,
                 d_out: int | None = None, require_tp: bool = True,
                 atol: float = CHANNEL_TOL):
        ks = [np.asarray(k, dtype=complex) for k in kraus]
        if not ks:
            raise ValueError("a channel needs at least one Kraus operator")
        rows, cols = ks[0].shape
        for k in ks:
            if k.shape != (rows, cols):
                raise DimensionError("Kraus operators have mixed shapes")
        if d_in is not None and d_in != cols:
            raise DimensionError(f"declared d_in={d_in} but Kraus operators have {cols} columns")
        if d_out is not None and d_out != rows:
            raise DimensionError(f"declared d_out={d_out} but Kraus operators have {rows} rows")
        self.kraus = tuple(ks)
        self.d_in = cols
        self.d_out = rows
        self._choi = None
        if require_tp:
            dev = self.trace_preservation_defect()
            if dev > atol:
                raise DomainError(f"Kraus sum deviates from trace preservation by {dev:.3e}")

    # -- basic queries ------------------------------------------------------

    def trace_preservation_defect(self) -> float:
        acc = sum(k.conj().T @ k for k in self.kraus)
        return max_norm(acc - np.eye(self.d_in))

    def is_trace_preserving(self, tol: float = CHANNEL_TOL) -> bool:
        return self.trace_preservation_defect() <= tol

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return self.apply(rho)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        rho = as_square(rho)
        if rho.shape[0] != self.d_in:
            raise DimensionError(f"state dim {rho.shape[0]} != channel input dim {self.d_in}")
        return sum(k @ rho @ k.conj().T for k in self.kraus)

    def choi(self) -> np.ndarray:
        """Unnormalized Choi matrix, output factor first."""
        if self._choi is None:
            j = np.zeros((self.d_out * self.d_in,) * 2, dtype=complex)
            for k in self.kraus:
                v = k.reshape(-1)  # row-major: vec of K = sum_i (K e_i) (x) e_i
                j += np.outer(v, v.conj())
            self._choi = j
        return self._choi

    def superoperator(self) -> np.ndarray:
        """Matrix acting on row-major vectorized operators."""
        return sum(np.kron(k, k.conj()) for k in self.kraus)

    def __repr__(self):
        return f"Channel(d_in={self.d_in}, d_out={self.d_out}, kraus={len(self.kraus)})"

    # -- constructors -------------------------------------------------------

    @classmethod
    def identity(cls, d: int) -> "Channel":
        return cls([np.eye(d, dtype=complex)])

    @classmethod
    def from_unitary(cls, u: np.ndarray) -> "Channel":
        return cls([require_unitary(u)])

    @classmethod
    def depolarizing(cls, d: int) -> "Channel":
        """Completely depolarizing channel rho -> 1/d."""
        ks = []
        for i in range(d):
            for j in range(d):
                k = np.zeros((d, d), dtype=complex)
                k[i, j] = 1.0 / np.sqrt(d)
                ks.append(k)
        return cls(ks)

    @classmethod
    def from_choi(cls, j: np.ndarray, d_in: int, d_out: int,
                  atol: float = CHANNEL_TOL) -> "Channel":
        return kraus_from_choi(j, d_in, d_out, atol=atol)


def kraus_from_choi(j: np.ndarray, d_in: int, d_out: int,
                    atol: float = CHANNEL_TOL,
                    cutoff: float = CHOI_EIG_CUTOFF) -> Channel:
    """Extract Kraus operators from a Choi matrix via eigendecomposition.

    Requires J PSD within ``atol`` and the output partial trace equal to the
    identity within ``atol``. The Kraus rank equals the number of Choi
    eigenvalues above ``cutoff``.
    """
    j = require_hermitian(as_square(j), tol=max(atol, STRUCT_TOL))
    if j.shape[0] != d_in * d_out:
        raise DimensionError(f"Choi dim {j.shape[0]} != d_out*d_in = {d_out * d_in}")
    w, v = np.linalg.eigh(j)
    if w[0] < -atol:
        raise DomainError(f"Choi matrix has eigenvalue {w[0]:.3e}, not PSD within {atol}")
    marg = partial_trace(j, [d_out, d_in], keep=[1])
    if max_norm(marg - np.eye(d_in)) > atol:
        raise DomainError("Choi matrix is not trace preserving (Tr_out J != identity)")
    ks = []
    for lam, vec in zip(w, v.T):
        if lam > cutoff:
            ks.append(np.sqrt(lam) * vec.reshape(d_out, d_in))
    if not ks:
        raise DomainError("Choi matrix is numerically zero")
    return Channel(ks, atol=atol)


def compose(outer: Channel, inner: Channel) -> Channel:
    """Channel composition outer after inner."""
    if inner.d_out != outer.d_in:
        raise DimensionError(f"cannot compose: {inner.d_out} -> {outer.d_in}")
    ks = [a @ b for a in outer.kraus for b in inner.kraus]
    if len(ks) > inner.d_out * outer.d_out * 2:
        # re-extract a minimal Kraus set to keep products from piling up
        j = np.zeros((outer.d_out * inner.d_in,) * 2, dtype=complex)
        for k in ks:
            v = k.reshape(-1)
            j += np.outer(v, v.conj())
        return kraus_from_choi(j, inner.d_in, outer.d_out)
    return Channel(ks)


def tensor_channels(a: Channel, b: Channel) -> Channel:
    return Channel([tensor(ka, kb) for ka in a.kraus for kb in b.kraus])


# ---------------------------------------------------------------------------
# covariance testing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CovarianceReport:
    covariant: bool
    worst_violation: float


def _adjoint_superop(u: np.ndarray) -> np.ndarray:
    return np.kron(u, u.conj())


def _commutator_superop(x: np.ndarray) -> np.ndarray:
    d = x.shape[0]
    eye = np.eye(d)
    return np.kron(x, eye) - np.kron(eye, x.T)


def is_covariant(t: Channel, rep_in, rep_out, tol: float = STRUCT_TOL) -> CovarianceReport:
    """Test the conjugation-commutation identity on a full operator basis.

    For finite-group representations this checks, for every group element g,
    ``T[W_in(g) . W_in(g)^dag] = W_out(g) T[.] W_out(g)^dag`` at the
    superoperator level (equivalent to checking all d^2 matrix units). For
    Lie-type symmetries, ``rep_in`` and ``rep_out`` are generator lists and
    the check is the exact generator-level identity
    ``T[[X, .]] = [X', T[.]]``.
    """
    s = t.superoperator()
    worst = 0.0
    if isinstance(rep_in, FiniteGroupRep) or isinstance(rep_out, FiniteGroupRep):
        if not (isinstance(rep_in, FiniteGroupRep) and isinstance(rep_out, FiniteGroupRep)):
            raise DomainError("mixed finite/Lie representation pair")
        if rep_in.dim != t.d_in or rep_out.dim != t.d_out:
            raise DimensionError("representation dims do not match channel dims")
        for w_in, w_out in zip(rep_in.images, rep_out.images):
            lhs = s @ _adjoint_superop(w_in)
            rhs = _adjoint_superop(w_out) @ s
            worst = max(worst, max_norm(lhs - rhs))
    else:
        gens_in = [require_hermitian(g) for g in rep_in]
        gens_out = [require_hermitian(g) for g in rep_out]
        if len(gens_in) != len(gens_out):
            raise DimensionError("generator count mismatch between input and output")
        for x_in, x_out in zip(gens_in, gens_out):
            if x_in.shape[0] != t.d_in or x_out.shape[0] != t.d_out:
                raise DimensionError("generator dims do not match channel dims")
            lhs = s @ _commutator_superop(x_in)
            rhs = _commutator_superop(x_out) @ s
            worst = max(worst, max_norm(lhs - rhs))
    return CovarianceReport(covariant=worst <= tol, worst_violation=worst)


def twirl(t: Channel, rep_in: FiniteGroupRep, rep_out: FiniteGroupRep) -> Channel:
    """Group average of a channel; the result is covariant by construction."""
    if rep_in.dim != t.d_in or rep_out.dim != t.d_out:
        raise DimensionError("representation dims do not match channel dims")
    n = rep_in.group.order
    ks = []
    for w_in, w_out in zip(rep_in.images, rep_out.images):
        for k in t.kraus:
            ks.append(w_out.conj().T @ k @ w_in / np.sqrt(n))
    return Channel(ks)


# ---------------------------------------------------------------------------
# duals, induced and environment channels
# ---------------------------------------------------------------------------

def hs_dual(t: Channel) -> Channel:
    """Hilbert-Schmidt adjoint, Tr[A T[B]] = Tr[T*[A] B].

    The dual of a doubly stochastic channel is again trace preserving; in
    general the result is only completely positive and unital.
    """
    return Channel([k.conj().T for k in t.kraus], require_tp=False)


def is_doubly_stochastic(t: Channel, tol: float = CHANNEL_TOL) -> bool:
    """Whether the channel fixes the identity operator."""
    if t.d_in != t.d_out:
        raise DimensionError("doubly stochastic is only defined for equal dims")
    return max_norm(t.apply(np.eye(t.d_in)) - np.eye(t.d_out)) <= tol


def induced_channel(t: Channel, sigma_c: np.ndarray, d_s: int, d_c: int) -> Channel:
    """Reduced dynamics on S of a channel on SC with a fixed C input.

    ``rho -> Tr_C[T[rho (x) sigma_C]]``, assembled in Kraus form from an
    eigendecomposition of sigma_C.
    """
    if t.d_in != d_s * d_c or t.d_out != d_s * d_c:
        raise DimensionError("channel does not act on the declared S (x) C split")
    sigma_c = require_density(sigma_c)
    if sigma_c.shape[0] != d_c:
        raise DimensionError(f"sigma_C dim {sigma_c.shape[0]} != d_C {d_c}")
    w, v = np.linalg.eigh(sigma_c)
    ks = []
    for big in t.kraus:
        kb = big.reshape(d_s, d_c, d_s, d_c)
        for k_idx in range(d_c):
            if w[k_idx] <= 1e-15:
                continue
            amp = np.sqrt(w[k_idx])
            # (1_S (x) <l|) K (1_S (x) |v_k>) for every output index l
            block = np.einsum("albn,n->lab", kb, v[:, k_idx])
            for l in range(d_c):
                ks.append(amp * block[l])
    return Channel(ks)


def env_channel(u: np.ndarray, rho_s: np.ndarray, d_s: int, d_c: int) -> Channel:
    """Complementary-direction channel on C of a unitary on SC.

    ``sigma -> Tr_S[U (rho_S (x) sigma) U^dag]``. Linear in rho_S.
    """
    u = require_unitary(u)
    if u.shape[0] != d_s * d_c:
        raise DimensionError("unitary does not act on the declared S (x) C split")
    rho_s = require_density(rho_s)
    if rho_s.shape[0] != d_s:
        raise DimensionError(f"rho_S dim {rho_s.shape[0]} != d_S {d_s}")
    w, v = np.linalg.eigh(rho_s)
    ub = u.reshape(d_s, d_c, d_s, d_c)
    ks = []
    for k_idx in range(d_s):
        if w[k_idx] <= 1e-15:
            continue
        amp = np.sqrt(w[k_idx])
        # (<l|_S (x) 1) U (|r_k>_S (x) 1) for every output S index l
        block = np.einsum("albn,b->aln", ub, v[:, k_idx])
        for l in range(d_s):
            ks.append(amp * block[l])
    return Channel(ks)


# ---------------------------------------------------------------------------
# dilations
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DilationSpec:
    """Unitary dilation data: ``T[rho] = Tr_E[U (rho (x) omega_E) U^dag]``.

    ``unitary`` acts on S (x) E with the environment as the trailing factor
    unless ``env_first`` is set, in which case it acts on E (x) S.
    """

    omega_e: np.ndarray
    unitary: np.ndarray
    d_s: int
    d_e: int
    env_first: bool = False

    def __post_init__(self):
        require_density(self.omega_e)
        require_unitary(self.unitary)
        if self.omega_e.shape[0] != self.d_e:
            raise DimensionError("omega_E dim does not match d_E")
        if self.unitary.shape[0] != self.d_s * self.d_e:
            raise DimensionError("dilation unitary dim != d_S * d_E")

    def unitary_env_last(self) -> np.ndarray:
        from .linalg import permute_factors
        if not self.env_first:
            return self.unitary
        return permute_factors(self.unitary, [self.d_e, self.d_s], [1, 0])

    def unitary_env_first(self) -> np.ndarray:
        from .linalg import permute_factors
        if self.env_first:
            return self.unitary
        return permute_factors(self.unitary, [self.d_s, self.d_e], [1, 0])


def dilation_to_channel(spec: DilationSpec, atol: float = CHANNEL_TOL) -> Channel:
    """Kraus form of a dilation: K_{k,j} = sqrt(w_j) (1 (x) <e_k|) U (1 (x) |f_j>)."""
    u = spec.unitary_env_last()
    w, v = np.linalg.eigh(spec.omega_e)
    ub = u.reshape(spec.d_s, spec.d_e, spec.d_s, spec.d_e)
    ks = []
    for j in range(spec.d_e):
        if w[j] <= 1e-15:
            continue
        amp = np.sqrt(w[j])
        block = np.einsum("albn,n->lab", ub, v[:, j])
        for k_idx in range(spec.d_e):
            ks.append(amp * block[k_idx])
    return Channel(ks, atol=atol)


@dataclass(frozen=True)
class DilationReport:
    unitary_covariant: bool
    unitary_violation: float
    env_state_symmetric: bool
    env_state_violation: float
    env_state_pure: bool

    @property
    def certifies_covariance(self) -> bool:
        return self.unitary_covariant and self.env_state_symmetric


def verify_covariant_dilation(spec: DilationSpec, gens_s: Sequence[np.ndarray],
                              gens_e: Sequence[np.ndarray],
                              tol: float = STRUCT_TOL) -> DilationReport:
    """Check that the global unitary commutes with the composite generators and
    the environment state is symmetric; together these certify covariance of
    the dilated channel."""
    from .symmetry import is_symmetric_state
    u = spec.unitary_env_last()
    worst_u = 0.0
    for xs, xe in zip(gens_s, gens_e):
        total = tensor(require_hermitian(xs), np.eye(spec.d_e)) + \
            tensor(np.eye(spec.d_s), require_hermitian(xe))
        worst_u = max(worst_u, max_norm(u @ total - total @ u))
    sym, worst_e = is_symmetric_state(spec.omega_e, gens_e, tol)
    purity = float(np.trace(spec.omega_e @ spec.omega_e).real)
    return DilationReport(
        unitary_covariant=worst_u <= tol,
        unitary_violation=worst_u,
        env_state_symmetric=sym,
        env_state_violation=worst_e,
        env_state_pure=purity > 1.0 - 1e-9,
    )


def thermal_operation(h_s: np.ndarray, h_e: np.ndarray, beta: float,
                      u: np.ndarray, tol: float = STRUCT_TOL) -> Channel:
    """Channel dilated by a Gibbs environment and an energy-conserving unitary.

    Raises if ``u`` fails to commute with the total energy
    ``H_S (x) 1 + 1 (x) H_E``. The output fixes the system Gibbs state at the
    same inverse temperature.
    """
    h_s, h_e = require_hermitian(h_s), require_hermitian(h_e)
    d_s, d_e = h_s.shape[0], h_e.shape[0]
    u = require_unitary(u)
    total = tensor(h_s, np.eye(d_e)) + tensor(np.eye(d_s), h_e)
    dev = max_norm(u @ total - total @ u)
    if dev > tol:
        raise DomainError(f"unitary is not strictly energy conserving (violation {dev:.3e})")
    spec = DilationSpec(omega_e=gibbs_state(h_e, beta), unitary=u, d_s=d_s, d_e=d_e)
    return dilation_to_channel(spec)
