"""Slater determinants, fermionic ladder operators and Hamiltonian matrices.

A determinant is a plain Python ``int`` whose bit ``p`` is set when
spin-orbital ``p`` is occupied.  Spin-orbitals are interleaved,
``p = 2 * spatial + spin`` with spin 0 = up and 1 = down, and the state is

    |x> = prod_{p=0}^{2M-1} (c^dag_p)^{x_p} |vac>

with the product written left to right in increasing ``p``.  Moving a ladder
operator for orbital ``p`` into place therefore picks up one sign per occupied
orbital below ``p``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from itertools import combinations
from math import comb

import numpy as np
import scipy.sparse as sp

__all__ = [
    "CREATE",
    "ANNIHILATE",
    "MAX_SPIN_ORBITALS",
    "FockError",
    "ZeroPerturbationError",
    "Sector",
    "SectorWaveFunction",
    "ExcitationOperator",
    "enumerate_sector",
    "apply_ladder",
    "apply_operator",
    "apply_excitation",
    "slater_condon_element",
    "build_hamiltonian",
    "spin_counts",
    "occupied",
    "det_from_orbitals",
    "format_det",
]

CREATE = "+"
ANNIHILATE = "-"
MAX_SPIN_ORBITALS = 128
UP_MASK_128 = int("01" * 64, 2)  # even bits: spin up


class FockError(ValueError):
    pass


class ZeroPerturbationError(FockError):
    """The excitation operator annihilates the state."""


def occupied(d):
    """Indices of set bits of ``d``, ascending."""
    out = []
    while d:
        low = d & -d
        out.append(low.bit_length() - 1)
        d ^= low
    return out


def spin_counts(d):
    return (d & UP_MASK_128).bit_count(), (d & (UP_MASK_128 << 1)).bit_count()


def det_from_orbitals(up=(), down=()):
    """Determinant with the given spatial orbitals occupied per spin."""
    d = 0
    for i in up:
        d |= 1 << (2 * i)
    for i in down:
        d |= 1 << (2 * i + 1)
    return d


def format_det(d, norb):
    """Occupation string, spatial orbital 0 first: ``2`` doubly, ``u``/``d`` singly, ``0`` empty."""
    chars = []
    for i in range(norb):
        u, dn = (d >> (2 * i)) & 1, (d >> (2 * i + 1)) & 1
        chars.append("2" if u and dn else "u" if u else "d" if dn else "0")
    return "".join(chars)


@dataclass(frozen=True, eq=False)
class Sector:
    """All determinants with fixed per-spin electron counts, sorted by word."""

    norb: int
    n_up: int
    n_down: int
    dets: tuple
    index: dict = field(repr=False)

    def __len__(self):
        return len(self.dets)

    @property
    def nelec(self):
        return self.n_up + self.n_down

    def same_as(self, other):
        return (self.norb, self.n_up, self.n_down) == (other.norb, other.n_up, other.n_down)

    def contains(self, d):
        return d in self.index

    def basis_vector(self, d):
        v = np.zeros(len(self), dtype=complex)
        v[self.index[d]] = 1.0
        return v


def _spin_strings(norb, n):
    return [sum(1 << i for i in c) for c in combinations(range(norb), n)]


def _interleave(up_string, down_string):
    d = 0
    i = 0
    u, dn = up_string, down_string
    while u or dn:
        d |= ((u & 1) << (2 * i)) | ((dn & 1) << (2 * i + 1))
        u >>= 1
        dn >>= 1
        i += 1
    return d


def enumerate_sector(norb, n_up, n_down):
    if not 1 <= 2 * norb <= MAX_SPIN_ORBITALS:
        raise FockError(f"norb={norb} outside 1..{MAX_SPIN_ORBITALS // 2}")
    if not (0 <= n_up <= norb and 0 <= n_down <= norb):
        raise FockError(f"electron counts ({n_up}, {n_down}) out of range for {norb} orbitals")
    ups = _spin_strings(norb, n_up)
    downs = _spin_strings(norb, n_down)
    dets = sorted(_interleave(u, d) for u in ups for d in downs)
    assert len(dets) == comb(norb, n_up) * comb(norb, n_down)
    return Sector(norb, n_up, n_down, tuple(dets), {d: i for i, d in enumerate(dets)})


@dataclass(eq=False)
class SectorWaveFunction:
    sector: Sector
    amps: np.ndarray

    def __post_init__(self):
        self.amps = np.asarray(self.amps, dtype=complex)
        if self.amps.shape != (len(self.sector),):
            raise FockError("amplitude vector does not match sector size")

    def norm(self):
        return float(np.linalg.norm(self.amps))

    def normalized(self):
        return SectorWaveFunction(self.sector, self.amps / self.norm())

    def amplitude(self, d):
        i = self.sector.index.get(d)
        return 0j if i is None else complex(self.amps[i])

    def probabilities(self):
        return np.abs(self.amps) ** 2

    def support(self, tol=0.0):
        return [self.sector.dets[i] for i in np.flatnonzero(self.probabilities() > tol)]


def apply_ladder(d, kind, p):
    """Apply ``c^dag_p`` (kind ``"+"``) or ``c_p`` (``"-"``) to determinant ``d``.

    Returns ``(new_det, sign)`` or ``None`` when the state is annihilated.
    """
    bit = 1 << p
    if kind == CREATE:
        if d & bit:
            return None
    elif kind == ANNIHILATE:
        if not d & bit:
            return None
    else:
        raise FockError(f"unknown ladder kind {kind!r}")
    sign = -1 if (d & (bit - 1)).bit_count() & 1 else 1
    return d ^ bit, sign


_FACTOR = re.compile(r"^([+-])(\d+)(?:\.([ud]))?$")


@dataclass(frozen=True)
class ExcitationOperator:
    """Product of ladder operators; ``factors[-1]`` acts first.

    ``factors`` is a tuple of ``(kind, spin_orbital)`` with kind ``"+"`` for
    creation and ``"-"`` for annihilation.
    """

    factors: tuple = ()

    @classmethod
    def parse(cls, text):
        """Parse e.g. ``"+6.u +5.u -4.u -3.u"``.

        ``+k`` without a spin suffix is shorthand for ``+k.u``.
        """
        factors = []
        for tok in text.split():
            m = _FACTOR.match(tok)
            if not m:
                raise FockError(f"cannot parse ladder factor {tok!r}")
            kind, orb, spin = m.group(1), int(m.group(2)), m.group(3) or "u"
            factors.append((kind, 2 * orb + (spin == "d")))
        return cls(tuple(factors))

    def __str__(self):
        return " ".join(f"{k}{p // 2}.{'ud'[p % 2]}" for k, p in self.factors)

    def spin_change(self):
        """Net change ``(d_up, d_down)`` in electron numbers."""
        du = dd = 0
        for kind, p in self.factors:
            step = 1 if kind == CREATE else -1
            if p % 2:
                dd += step
            else:
                du += step
        return du, dd

    def adjoint(self):
        flip = {CREATE: ANNIHILATE, ANNIHILATE: CREATE}
        return ExcitationOperator(tuple((flip[k], p) for k, p in reversed(self.factors)))


def apply_operator(op, d):
    """Apply ``op`` to a single determinant; returns ``(det, sign)`` or None."""
    sign = 1
    for kind, p in reversed(op.factors):
        res = apply_ladder(d, kind, p)
        if res is None:
            return None
        d, s = res
        sign *= s
    return d, sign


def apply_excitation(op, psi):
    """Return ``(psi_A, norm2)`` with ``psi_A = op|psi> / sqrt(norm2)``."""
    sec = psi.sector
    for _, p in op.factors:
        if p >= 2 * sec.norb:
            raise FockError(f"spin-orbital {p} outside a {sec.norb}-orbital space")
    du, dd = op.spin_change()
    target = enumerate_sector(sec.norb, sec.n_up + du, sec.n_down + dd)
    out = np.zeros(len(target), dtype=complex)
    for i, d in enumerate(sec.dets):
        a = psi.amps[i]
        if a == 0:
            continue
        res = apply_operator(op, d)
        if res is not None:
            out[target.index[res[0]]] += res[1] * a
    norm2 = float(np.vdot(out, out).real)
    if norm2 < 1e-14:
        raise ZeroPerturbationError(f"operator {op} annihilates the state (norm^2={norm2:.3e})")
    return SectorWaveFunction(target, out / np.sqrt(norm2)), norm2


class SpinOrbitalIntegrals:
    """Spin-orbital one-body matrix and antisymmetrised two-body tensor.

    ``anti[p, q, r, s] = <pq|rs> - <pq|sr>`` with ``<pq|rs> = (pr|qs)``.
    """

    def __init__(self, table):
        m = table.norb
        n = 2 * m
        spin = np.arange(n) % 2
        spat = np.arange(n) // 2
        same = spin[:, None] == spin[None, :]
        self.e_core = float(table.e_core)
        self.h = np.where(same, table.h1[np.ix_(spat, spat)], 0.0)
        g = table.h2[np.ix_(spat, spat, spat, spat)]  # (pr|qs) indexed [p, r, q, s]
        g = g * (same[:, :, None, None] & same[None, None, :, :])
        phys = g.transpose(0, 2, 1, 3)  # <pq|rs>
        self.anti = phys - phys.transpose(0, 1, 3, 2)
        self.n = n
        # <pj||pj>-type contractions used by diagonal and single elements
        self.J = np.einsum("ijij->ij", self.anti).copy()
        self.D = np.einsum("ajij->aij", self.anti).copy()
        self._anti_list = self.anti.ravel().tolist()
        self._h_list = self.h.tolist()
        self._D_list = self.D.tolist()

    @classmethod
    def of(cls, table):
        cache = table._derived
        if "spin_orbital" not in cache:
            cache["spin_orbital"] = cls(table)
        return cache["spin_orbital"]

    def diagonal(self, d):
        occ = occupied(d)
        idx = np.array(occ)
        return self.e_core + float(self.h[idx, idx].sum()) + 0.5 * float(self.J[np.ix_(idx, idx)].sum())

    def single(self, b, i, a, occ_b):
        """<a-det|H|b> for the single excitation i -> a acting on ``b``."""
        d1, s1 = apply_ladder(b, ANNIHILATE, i)
        _, s2 = apply_ladder(d1, CREATE, a)
        Da = self._D_list[a][i]
        val = self._h_list[a][i] + sum(Da[j] for j in occ_b if j != i)
        return s1 * s2 * val

    def double(self, b, i, j, k, l):
        """<c^dag_k c^dag_l c_j c_i b|H|b>."""
        n = self.n
        res = apply_operator(ExcitationOperator(((CREATE, k), (CREATE, l), (ANNIHILATE, j), (ANNIHILATE, i))), b)
        return res[1] * self._anti_list[((k * n + l) * n + i) * n + j]


def _check_same_sector(a, b):
    if spin_counts(a) != spin_counts(b):
        raise FockError("determinants belong to different sectors")


def slater_condon_element(table, a, b):
    """Matrix element <a|H|b> including the constant ``e_core`` on the diagonal."""
    _check_same_sector(a, b)
    ints = SpinOrbitalIntegrals.of(table)
    diff = a ^ b
    rank = diff.bit_count()
    if rank == 0:
        return complex(ints.diagonal(a))
    if rank == 2:
        (i,) = occupied(b & diff)
        (k,) = occupied(a & diff)
        return complex(ints.single(b, i, k, occupied(b)))
    if rank == 4:
        i, j = occupied(b & diff)
        k, l = occupied(a & diff)
        return complex(ints.double(b, i, j, k, l))
    return 0j


def _connected(ints, b, occ_b, virt_b):
    """Yield ``(det, value)`` for all singles and doubles out of ``b``."""
    h, D, anti, n = ints._h_list, ints._D_list, ints._anti_list, ints.n
    for i in occ_b:
        d1, s1 = apply_ladder(b, ANNIHILATE, i)
        for a in virt_b:
            if (a ^ i) & 1:
                continue
            d2, s2 = apply_ladder(d1, CREATE, a)
            Dai = D[a][i]
            val = h[a][i] + sum(Dai[j] for j in occ_b if j != i)
            yield d2, s1 * s2 * val
    nocc = len(occ_b)
    for x in range(nocc):
        i = occ_b[x]
        d1, s1 = apply_ladder(b, ANNIHILATE, i)
        for y in range(x + 1, nocc):
            j = occ_b[y]
            d2, s2 = apply_ladder(d1, ANNIHILATE, j)
            spin_ij = (i & 1) + (j & 1)
            nv = len(virt_b)
            for u in range(nv):
                l = virt_b[u]
                d3, s3 = apply_ladder(d2, CREATE, l)
                base = s1 * s2 * s3
                for v in range(u + 1, nv):
                    k = virt_b[v]
                    if (k & 1) + (l & 1) != spin_ij:
                        continue
                    val = anti[((k * n + l) * n + i) * n + j]
                    if val == 0.0:
                        continue
                    d4, s4 = apply_ladder(d3, CREATE, k)
                    yield d4, base * s4 * val


def build_hamiltonian(table, dets, drop_tol=1e-14):
    """Hamiltonian matrix over the ordered determinant list ``dets``.

    Returns a real ``scipy.sparse.csr_matrix``; entries with magnitude below
    ``drop_tol`` are dropped.
    """
    dets = list(dets)
    index = {d: i for i, d in enumerate(dets)}
    if len(index) != len(dets):
        raise FockError("duplicate determinants in basis")
    if not dets:
        return sp.csr_matrix((0, 0))
    counts = spin_counts(dets[0])
    nso = 2 * table.norb
    for d in dets:
        if spin_counts(d) != counts:
            raise FockError("determinant list spans several sectors")
        if d >> nso:
            raise FockError("determinant uses orbitals beyond the integral table")
    ints = SpinOrbitalIntegrals.of(table)
    rows, cols, vals = [], [], []
    n = len(dets)
    all_orbs = range(nso)
    pairwise = n <= 64
    for col, b in enumerate(dets):
        rows.append(col)
        cols.append(col)
        vals.append(ints.diagonal(b))
        if pairwise:
            for row in range(col + 1, n):
                v = slater_condon_element(table, dets[row], b).real
                if abs(v) >= drop_tol:
                    rows += [row, col]
                    cols += [col, row]
                    vals += [v, v]
            continue
        occ_b = occupied(b)
        virt_b = [p for p in all_orbs if not (b >> p) & 1]
        for a, v in _connected(ints, b, occ_b, virt_b):
            row = index.get(a)
            if row is not None and abs(v) >= drop_tol:
                rows.append(row)
                cols.append(col)
                vals.append(v)
    mat = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    mat.sum_duplicates()
    return mat
