"""Regenerate the vendored FCIDUMP fixtures.

Requires pyscf, which is *not* a runtime dependency of subspectra.  The
output files are committed under ``src/subspectra/data``; rerun only when a
fixture definition changes::

    python tools/make_fixtures.py

Alongside each file, the pyscf FCI ground energy in the active space is
stored in ``fixtures.json`` as an external cross-check for the test suite.
"""

import json
from pathlib import Path

from pyscf import fci, gto, mcscf, scf
from pyscf.tools import fcidump

OUT = Path(__file__).resolve().parents[1] / "src" / "subspectra" / "data"

# name: (atom spec, basis, n active orbitals, n active electrons, n frozen core)
FIXTURES = {
    "h2_sto3g": ("H 0 0 0; H 0 0 0.735", "sto-3g", 2, 2, 0),
    "hcl_sto6g": ("H 0 0 0; Cl 0 0 1.2", "sto-6g", 10, 18, 0),
    "lih_631g": ("Li 0 0 0; H 0 0 1.5", "6-31g", 10, 4, 0),
    "n2_631g_fc": ("N 0 0 0; N 0 0 1.1", "6-31g", 8, 10, 2),
    "co_ccpvdz": ("C 0 0 0; O 0 0 1.2", "cc-pvdz", 8, 10, 2),
}


def build(name, atom, basis, ncas, nelecas, ncore):
    mol = gto.M(atom=atom, basis=basis, unit="Angstrom", verbose=0)
    mf = scf.RHF(mol).run(conv_tol=1e-12)
    cas = mcscf.CASCI(mf, ncas, nelecas)
    assert cas.ncore == ncore, (name, cas.ncore)
    h1, ecore = cas.get_h1eff()
    h2 = cas.get_h2eff()
    from pyscf import ao2mo

    h2 = ao2mo.restore(1, h2, ncas)
    path = OUT / f"{name}.fcidump"
    fcidump.from_integrals(str(path), h1, h2, ncas, nelecas, nuc=ecore, ms=0)
    e_fci, _ = fci.direct_spin1.kernel(h1, h2, ncas, nelecas, ecore=ecore, conv_tol=1e-13)
    return {
        "file": path.name,
        "atom": atom,
        "basis": basis,
        "norb": ncas,
        "nelec": nelecas,
        "frozen_core": ncore,
        "e_hf": float(mf.e_tot),
        "e_fci_pyscf": float(e_fci),
    }


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    meta = {name: build(name, *spec) for name, spec in FIXTURES.items()}
    (OUT / "fixtures.json").write_text(json.dumps(meta, indent=2) + "\n")
    for name, m in meta.items():
        print(f"{name:12s} norb={m['norb']:2d} nelec={m['nelec']:2d} E_fci={m['e_fci_pyscf']:.10f}")


if __name__ == "__main__":
    main()
