"""Reading and writing FCIDUMP integral files.

The two-electron integrals are kept in chemists' notation ``(pq|rs)`` as a
dense ``(M, M, M, M)`` array with all eight permutation images filled in.
"""

from __future__ import annotations

import hashlib
import io
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "FCIDumpError",
    "FCIDumpParseError",
    "FCIDumpValidationError",
    "IntegralTable",
    "parse_fcidump",
    "read_fcidump",
    "write_fcidump",
    "table_checksum",
    "load_fixture",
]

SYMMETRY_TOL = 1e-10
DATA_DIR = Path(__file__).resolve().parent / "data"


class FCIDumpError(ValueError):
    pass


class FCIDumpParseError(FCIDumpError):
    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class FCIDumpValidationError(FCIDumpError):
    pass


@dataclass(frozen=True, eq=False)
class IntegralTable:
    """Molecular Hamiltonian coefficients over ``norb`` spatial orbitals.

    Attributes
    ----------
    norb, nelec, ms2 : int
        Spatial orbital count, electron count and twice the spin projection.
    e_core : float
        Constant energy offset (nuclear repulsion plus any frozen core).
    h1 : ndarray, shape (norb, norb)
        One-electron integrals.
    h2 : ndarray, shape (norb, norb, norb, norb)
        Two-electron integrals ``h2[p, q, r, s] = (pq|rs)``.
    orbsym, isym
        Point-group labels as found in the header; never used.
    """

    norb: int
    nelec: int
    ms2: int
    e_core: float
    h1: np.ndarray
    h2: np.ndarray
    orbsym: tuple = ()
    isym: int | None = None
    # memo for derived quantities (checksum, spin-orbital tensors)
    _derived: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        m = self.norb
        if m < 1:
            raise FCIDumpValidationError("NORB must be positive")
        if not 0 < self.nelec <= 2 * m:
            raise FCIDumpValidationError(f"NELEC={self.nelec} incompatible with NORB={m}")
        if abs(self.ms2) > self.nelec or (self.nelec + self.ms2) % 2:
            raise FCIDumpValidationError(f"MS2={self.ms2} incompatible with NELEC={self.nelec}")
        if self.h1.shape != (m, m) or self.h2.shape != (m,) * 4:
            raise FCIDumpValidationError("integral arrays have wrong shape")
        _check_symmetry(self.h1, self.h2)
        self.h1.setflags(write=False)
        self.h2.setflags(write=False)

    @property
    def n_up(self):
        return (self.nelec + self.ms2) // 2

    @property
    def n_down(self):
        return (self.nelec - self.ms2) // 2

    def __eq__(self, other):
        if not isinstance(other, IntegralTable):
            return NotImplemented
        return (
            self.norb == other.norb
            and self.nelec == other.nelec
            and self.ms2 == other.ms2
            and self.e_core == other.e_core
            and np.array_equal(self.h1, other.h1)
            and np.array_equal(self.h2, other.h2)
        )

    __hash__ = None


_HEADER_START = re.compile(r"&FCI\b", re.IGNORECASE)
_HEADER_END = re.compile(r"&END\b|^\s*/\s*$|\s/\s*$", re.IGNORECASE)
_KEYVAL = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)\s*=\s*([^=]*?)(?=,?\s*[A-Za-z_][A-Za-z0-9_]*\s*=|$)")


def _to_float(token, lineno):
    try:
        return float(token.replace("D", "E").replace("d", "e"))
    except ValueError:
        raise FCIDumpParseError(f"non-numeric value {token!r}", lineno) from None


def _parse_header(lines):
    """Return (header dict, index of first record line)."""
    i = 0
    while i < len(lines) and not lines[i].strip():
        i += 1
    if i == len(lines) or not _HEADER_START.search(lines[i]):
        raise FCIDumpParseError("missing &FCI header", i + 1 if i < len(lines) else None)
    chunks = []
    start = i
    while True:
        if i == len(lines):
            raise FCIDumpParseError("header not terminated by &END or /", start + 1)
        line = lines[i]
        m = _HEADER_END.search(line)
        if m:
            chunks.append(line[: m.start()])
            break
        chunks.append(line)
        i += 1
    body = _HEADER_START.sub("", " ".join(chunks), count=1)
    body = body.replace("\n", " ")
    header = {}
    for key, val in _KEYVAL.findall(body):
        header[key.upper()] = val.strip().rstrip(",").strip()
    for key in ("NORB", "NELEC"):
        if key not in header:
            raise FCIDumpParseError(f"header lacks {key}", start + 1)
    try:
        norb = int(header["NORB"])
        nelec = int(header["NELEC"])
        ms2 = int(header.get("MS2", "0"))
        orbsym = tuple(int(v) for v in header.get("ORBSYM", "").replace(",", " ").split())
        isym = int(header["ISYM"]) if "ISYM" in header else None
    except ValueError as exc:
        raise FCIDumpParseError(f"malformed header value ({exc})", start + 1) from None
    return dict(norb=norb, nelec=nelec, ms2=ms2, orbsym=orbsym, isym=isym), i + 1


def _images(p, q, r, s):
    return {
        (p, q, r, s), (q, p, r, s), (p, q, s, r), (q, p, s, r),
        (r, s, p, q), (s, r, p, q), (r, s, q, p), (s, r, q, p),
    }


def parse_fcidump(data):
    """Parse FCIDUMP content given as ``bytes`` or ``str``.

    Records are expanded over their full permutation orbit as they are read,
    so a later record overwrites every image of an earlier one.  Tables built
    directly from arrays are instead checked for consistent images.
    """
    if isinstance(data, (bytes, bytearray)):
        data = data.decode("utf-8")
    lines = data.splitlines()
    hdr, first = _parse_header(lines)
    m = hdr["norb"]
    if m < 1:
        raise FCIDumpParseError("NORB must be positive", 1)
    h1 = np.zeros((m, m))
    h2 = np.zeros((m, m, m, m))
    e_core = 0.0
    for lineno, line in enumerate(lines[first:], start=first + 1):
        fields = line.split()
        if not fields:
            continue
        if len(fields) != 5:
            raise FCIDumpParseError(f"expected 'value i j k l', got {line.strip()!r}", lineno)
        val = _to_float(fields[0], lineno)
        try:
            i, j, k, l = (int(f) for f in fields[1:])
        except ValueError:
            raise FCIDumpParseError(f"non-integer orbital index in {line.strip()!r}", lineno) from None
        if not all(0 <= x <= m for x in (i, j, k, l)):
            raise FCIDumpParseError(f"orbital index out of range [0, {m}]", lineno)
        if i and j and k and l:
            for idx in _images(i - 1, j - 1, k - 1, l - 1):
                h2[idx] = val
        elif i and j and not k and not l:
            h1[i - 1, j - 1] = h1[j - 1, i - 1] = val
        elif not (i or j or k or l):
            e_core = val
        elif i and not j and not k and not l:
            # orbital energies, written by some codes; not part of the Hamiltonian
            continue
        else:
            raise FCIDumpParseError(f"unrecognised index pattern {(i, j, k, l)}", lineno)
    return IntegralTable(
        norb=m, nelec=hdr["nelec"], ms2=hdr["ms2"], e_core=e_core, h1=h1, h2=h2,
        orbsym=hdr["orbsym"], isym=hdr["isym"],
    )


def _check_symmetry(h1, h2):
    if np.max(np.abs(h1 - h1.T), initial=0.0) > SYMMETRY_TOL:
        raise FCIDumpValidationError("one-electron integrals are not symmetric")
    perms = [(1, 0, 2, 3), (0, 1, 3, 2), (2, 3, 0, 1)]
    for perm in perms:
        if np.max(np.abs(h2 - h2.transpose(perm)), initial=0.0) > SYMMETRY_TOL:
            raise FCIDumpValidationError(f"two-electron integrals violate symmetry {perm}")


def read_fcidump(path):
    with open(path, "rb") as f:
        return parse_fcidump(f.read())


def load_fixture(name):
    """Load one of the vendored integral files, e.g. ``"hcl_sto6g"``."""
    return read_fcidump(DATA_DIR / f"{name}.fcidump")


def write_fcidump(table, dest=None, tol=0.0):
    """Serialise ``table``; returns the text if ``dest`` is None.

    Values are written with ``repr`` so that a reparse is bit-identical.
    """
    out = io.StringIO()
    m = table.norb
    out.write(f" &FCI NORB={m},NELEC={table.nelec},MS2={table.ms2},\n")
    if table.orbsym:
        out.write("  ORBSYM=" + ",".join(str(s) for s in table.orbsym) + ",\n")
    if table.isym is not None:
        out.write(f"  ISYM={table.isym},\n")
    out.write(" &END\n")
    for p, q, r, s in _unique_quartets(m):
        v = table.h2[p, q, r, s]
        if abs(v) > tol:
            out.write(f" {float(v)!r} {p + 1} {q + 1} {r + 1} {s + 1}\n")
    for p in range(m):
        for q in range(p + 1):
            v = table.h1[p, q]
            if abs(v) > tol:
                out.write(f" {float(v)!r} {p + 1} {q + 1} 0 0\n")
    out.write(f" {float(table.e_core)!r} 0 0 0 0\n")
    text = out.getvalue()
    if dest is None:
        return text
    with open(dest, "w") as f:
        f.write(text)
    return None


def _unique_quartets(m):
    for p in range(m):
        for q in range(p + 1):
            pq = p * (p + 1) // 2 + q
            for r in range(m):
                for s in range(r + 1):
                    if r * (r + 1) // 2 + s <= pq:
                        yield p, q, r, s


def table_checksum(table):
    """SHA-256 over the canonical-ordered nonzero integrals of ``table``."""
    if "checksum" in table._derived:
        return table._derived["checksum"]
    h = hashlib.sha256()
    h.update(f"{table.norb},{table.nelec},{table.ms2};".encode())
    h.update(np.float64(table.e_core).tobytes())
    for p in range(table.norb):
        for q in range(p + 1):
            v = table.h1[p, q]
            if v != 0.0:
                h.update(np.array([p, q], dtype=np.int32).tobytes() + np.float64(v).tobytes())
    for quartet in _unique_quartets(table.norb):
        v = table.h2[quartet]
        if v != 0.0:
            h.update(np.array(quartet, dtype=np.int32).tobytes() + np.float64(v).tobytes())
    digest = h.hexdigest()
    table._derived["checksum"] = digest
    return digest
