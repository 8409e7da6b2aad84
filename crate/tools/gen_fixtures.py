#!/usr/bin/env python3
"""Generate qubit-Hamiltonian fixtures and reference values with PySCF.

The fermion-to-qubit mapping here is an independent Python implementation of
the Jordan-Wigner transformation (dictionary Pauli algebra), used to cross-check
the Rust implementation. Conventions match the Rust crate:

  * spin orbitals interleaved (alpha, beta, alpha, beta, ...) over ascending
    MO energy; qubit j <-> spin orbital j
  * character k of a Pauli string acts on qubit k
  * MO columns canonicalized in the Lowdin-orthonormal AO basis: each
    (near-)degenerate block is re-spanned by Gram-Schmidt over the projected
    unit vectors e_0, e_1, ...
  * non-diagonal terms are listed in generation order: the order in which
    OpenFermion's InteractionOperator Jordan-Wigner transform first creates
    each Pauli string (re-implemented below, with its 1e-8 pruning of terms
    that cancel). A Trotter product taken in file order ("source" order in
    the Rust crate) then matches circuits built from OpenFermion output.
    Coefficients come from the ladder-operator transform and are checked
    against the generation-order transform.

Usage: python3 tools/gen_fixtures.py [--oracle-only]
"""

import itertools
import math
import os
import sys

import numpy as np
import pyscf
from pyscf import fci, gto, scf

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
FIXTURES = os.path.join(ROOT, "crates", "core", "tests", "fixtures")

DEGENERACY_TOL = 1e-6

# ---------------------------------------------------------------- geometries


def h2(r):
    return [("H", (0.0, 0.0, 0.0)), ("H", (r, 0.0, 0.0))], 0, 0


def h3_linear(r):
    return [("H", (-r, 0.0, 0.0)), ("H", (0.0, 0.0, 0.0)), ("H", (r, 0.0, 0.0))], 0, 1


def h3_triangle_plus(r):
    return (
        [
            ("H", (0.0, 0.0, 0.0)),
            ("H", (r, 0.0, 0.0)),
            ("H", (r / 2.0, math.sqrt(3.0) * r / 2.0, 0.0)),
        ],
        1,
        0,
    )


def water(beta_deg, r=0.96):
    b = math.radians(beta_deg)
    return (
        [
            ("O", (0.0, 0.0, 0.0)),
            ("H", (r, 0.0, 0.0)),
            ("H", (r * math.cos(b), r * math.sin(b), 0.0)),
        ],
        0,
        0,
    )


def build_mol(geom):
    atoms, charge, spin = geom
    return gto.M(
        atom=[(el, pos) for el, pos in atoms],
        basis="sto-3g",
        charge=charge,
        spin=spin,
        unit="Angstrom",
        verbose=0,
    )


# --------------------------------------------------------------- SCF + MOs


def canonicalize(mo_coeff, mo_energy, s):
    w, u = np.linalg.eigh(s)
    s_half = u @ np.diag(np.sqrt(w)) @ u.T
    s_inv_half = u @ np.diag(1.0 / np.sqrt(w)) @ u.T
    c = s_half @ mo_coeff
    n = c.shape[0]
    out = c.copy()
    start = 0
    while start < c.shape[1]:
        end = start + 1
        while end < c.shape[1] and abs(mo_energy[end] - mo_energy[end - 1]) < DEGENERACY_TOL:
            end += 1
        block = c[:, start:end]
        proj = block @ block.T
        vecs = []
        for row in range(n):
            if len(vecs) == end - start:
                break
            v = proj[:, row].copy()
            for q in vecs:
                v -= q * (q @ v)
            norm = np.linalg.norm(v)
            if norm > 1e-6:
                vecs.append(v / norm)
        out[:, start:end] = np.array(vecs).T
        start = end
    return s_inv_half @ out


def run_scf(mol):
    if mol.spin == 0:
        mf = scf.RHF(mol)
    else:
        mf = scf.ROHF(mol)
    mf.conv_tol = 1e-13
    mf.conv_tol_grad = 1e-10
    mf.kernel()
    assert mf.converged
    s = mol.intor("int1e_ovlp")
    c = canonicalize(mf.mo_coeff, mf.mo_energy, s)
    return mf, c


# ----------------------------------------------------- Pauli dictionary algebra

_MUL = {
    ("I", "I"): (1, "I"), ("I", "X"): (1, "X"), ("I", "Y"): (1, "Y"), ("I", "Z"): (1, "Z"),
    ("X", "I"): (1, "X"), ("X", "X"): (1, "I"), ("X", "Y"): (1j, "Z"), ("X", "Z"): (-1j, "Y"),
    ("Y", "I"): (1, "Y"), ("Y", "X"): (-1j, "Z"), ("Y", "Y"): (1, "I"), ("Y", "Z"): (1j, "X"),
    ("Z", "I"): (1, "Z"), ("Z", "X"): (1j, "Y"), ("Z", "Y"): (-1j, "X"), ("Z", "Z"): (1, "I"),
}


def mul_strings(a, b):
    phase = 1
    out = []
    for pa, pb in zip(a, b):
        ph, p = _MUL[(pa, pb)]
        phase *= ph
        out.append(p)
    return phase, "".join(out)


def mul_ops(op_a, op_b):
    res = {}
    for sa, ca in op_a.items():
        for sb, cb in op_b.items():
            ph, s = mul_strings(sa, sb)
            res[s] = res.get(s, 0) + ph * ca * cb
    return res


def ladder(j, n, dagger):
    zs = "Z" * j
    rest = "I" * (n - j - 1)
    sign = -1 if dagger else 1
    return {zs + "X" + rest: 0.5, zs + "Y" + rest: sign * 0.5j}


def jordan_wigner(h1, eri, e_nuc):
    """h1, eri: spatial MO integrals (chemist notation)."""
    norb = h1.shape[0]
    n = 2 * norb
    cre = [ladder(j, n, True) for j in range(n)]
    ann = [ladder(j, n, False) for j in range(n)]
    total = {"I" * n: complex(e_nuc)}

    def add(op, coeff):
        for s, c in op.items():
            total[s] = total.get(s, 0) + coeff * c

    for p, q in itertools.product(range(n), repeat=2):
        if p % 2 != q % 2:
            continue
        c = h1[p // 2, q // 2]
        if abs(c) < 1e-14:
            continue
        add(mul_ops(cre[p], ann[q]), c)
    # 1/2 sum_{pqrs} (pr|qs) a+_p a+_q a_s a_r
    for p, q, r, s in itertools.product(range(n), repeat=4):
        if p == q or r == s:
            continue
        if p % 2 != r % 2 or q % 2 != s % 2:
            continue
        c = 0.5 * eri[p // 2, r // 2, q // 2, s // 2]
        if abs(c) < 1e-14:
            continue
        op = mul_ops(mul_ops(cre[p], cre[q]), mul_ops(ann[s], ann[r]))
        add(op, c)
    terms = {}
    for s, c in total.items():
        assert abs(c.imag) < 1e-10, (s, c)
        if abs(c.real) >= 1e-12:
            terms[s] = c.real
    return terms


# ----------------------------------------- generation-order transform

EQ_TOLERANCE = 1e-8


def _string(ops, n):
    s = ["I"] * n
    for i, letter in ops:
        s[i] = letter
    return "".join(s)


def _iadd(acc, add, sign=1.0):
    # insertion-ordered dict with pruning, like QubitOperator.__iadd__
    for k, v in add.items():
        acc[k] = acc.get(k, 0.0) + sign * v
        if abs(acc[k]) <= EQ_TOLERANCE:
            del acc[k]
    return acc


def _one_body(p, q, coef, n):
    out = {}
    if p != q:
        p, q = min(p, q), max(p, q)
        parity = tuple((z, "Z") for z in range(p + 1, q))
        for a, b in ("XX", "YY"):
            _iadd(out, {_string(((p, a),) + parity + ((q, b),), n): 0.5 * coef})
    else:
        _iadd(out, {"I" * n: 0.5 * coef})
        _iadd(out, {_string(((p, "Z"),), n): -0.5 * coef})
    return out


def _two_body(p, q, r, s, coef, n):
    out = {}
    if p == q or r == s:
        return out
    unique = len({p, q, r, s})
    if unique == 4:
        if (p > q) ^ (r > s):
            coef = -coef
        for ops in itertools.product("XY", repeat=4):
            if ops.count("X") % 2:
                continue  # imaginary part only
            c = 0.125 * coef
            if "".join(ops) not in ("XXYY", "YYXX"):
                c = -c
            if not c:
                continue
            (a, oa), (b, ob), (c2, oc), (d, od) = sorted(zip((p, q, r, s), ops))
            ops_ = (((a, oa),) + tuple((z, "Z") for z in range(a + 1, b)) + ((b, ob),)
                    + ((c2, oc),) + tuple((z, "Z") for z in range(c2 + 1, d)) + ((d, od),))
            _iadd(out, {_string(ops_, n): c})
    elif unique == 3:
        if p == r:
            a, b = (s, q) if q > s else (q, s)
            coef, c3 = -coef, p
        elif p == s:
            a, b = (r, q) if q > r else (q, r)
            c3 = p
        elif q == r:
            a, b = (s, p) if p > s else (p, s)
            c3 = q
        else:
            a, b = (r, p) if p > r else (p, r)
            coef, c3 = -coef, q
        parity = tuple((z, "Z") for z in range(a + 1, b))
        z = {_string(((c3, "Z"),), n): 1.0}
        for oa, ob in ("XX", "YY"):
            if not coef:
                continue
            hop = {_string(((a, oa),) + parity + ((b, ob),), n): coef / 4}
            _iadd(out, mul_ops(z, hop), -1.0)
            _iadd(out, hop)
    else:
        c = -0.25 * coef if p == s else 0.25 * coef
        _iadd(out, {"I" * n: c}, -1.0)
        _iadd(out, {_string(((p, "Z"),), n): c})
        _iadd(out, {_string(((q, "Z"),), n): c})
        _iadd(out, {_string(((min(p, q), "Z"), (max(p, q), "Z")), n): c}, -1.0)
    return out


def generation_order_terms(h1, eri, e_nuc):
    """Pauli terms in the order OpenFermion's InteractionOperator transform
    creates them. h1, eri: spatial MO integrals (chemist notation)."""
    norb = h1.shape[0]
    n = 2 * norb
    # physicist-ordered spin-orbital tensors, a+_p a+_q a_r a_s
    phys = eri.transpose(0, 2, 3, 1)
    one = np.zeros((n, n))
    two = np.zeros((n,) * 4)
    for p, q in itertools.product(range(norb), repeat=2):
        one[2 * p, 2 * q] = one[2 * p + 1, 2 * q + 1] = h1[p, q]
        for r, s in itertools.product(range(norb), repeat=2):
            v = phys[p, q, r, s]
            two[2 * p, 2 * q + 1, 2 * r + 1, 2 * s] = v
            two[2 * p + 1, 2 * q, 2 * r, 2 * s + 1] = v
            two[2 * p, 2 * q, 2 * r, 2 * s] = v
            two[2 * p + 1, 2 * q + 1, 2 * r + 1, 2 * s + 1] = v
    one[np.abs(one) < EQ_TOLERANCE] = 0.0
    two[np.abs(two) < EQ_TOLERANCE] = 0.0
    two *= 0.5
    acc = {"I" * n: e_nuc}
    for p in range(n):
        _iadd(acc, _one_body(p, p, one[p, p], n))
    for p, q in itertools.combinations(range(n), 2):
        _iadd(acc, _one_body(p, q, 0.5 * (one[p, q] + one[q, p]), n))
        c = two[p, q, p, q] - two[p, q, q, p] - two[q, p, p, q] + two[q, p, q, p]
        _iadd(acc, _two_body(p, q, p, q, c, n))
    for (p, q), (r, s) in itertools.combinations(itertools.combinations(range(n), 2), 2):
        c = 0.5 * (two[p, q, r, s] + two[s, r, q, p] - two[p, q, s, r] - two[r, s, q, p]
                   - two[q, p, r, s] - two[s, r, p, q] + two[q, p, s, r] + two[r, s, p, q])
        _iadd(acc, _two_body(p, q, r, s, c, n))
    return {k: complex(v).real for k, v in acc.items()}


def build_hamiltonian(mol):
    mf, c = run_scf(mol)
    hcore = mol.intor("int1e_kin") + mol.intor("int1e_nuc")
    h1 = c.T @ hcore @ c
    eri = pyscf.ao2mo.restore(1, pyscf.ao2mo.full(mol, c), c.shape[1])
    terms = jordan_wigner(h1, eri, mol.energy_nuc())
    ordered = generation_order_terms(h1, eri, mol.energy_nuc())
    for s, c in terms.items():
        if s in ordered:
            assert abs(ordered[s] - c) < 1e-10, (s, ordered[s], c)
        else:
            assert abs(c) <= EQ_TOLERANCE, (s, c)
    assert all(s in terms for s in ordered), set(ordered) - set(terms)
    # generation order, ladder-transform coefficients, pruned terms last
    out = {s: terms[s] for s in ordered}
    out.update((s, c) for s, c in terms.items() if s not in out)
    return mf, out


# ------------------------------------------------------------ dense checks

_P = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def dense(terms, n):
    m = np.zeros((2**n, 2**n), dtype=complex)
    for s, c in terms.items():
        op = np.array([[1.0]], dtype=complex)
        # qubit 0 is the least significant bit: kron from the highest qubit down
        for ch in reversed(s):
            op = np.kron(op, _P[ch])
        m += c * op
    return m


def sector_min(terms, n, ne):
    m = dense(terms, n)
    idx = [i for i in range(2**n) if bin(i).count("1") == ne]
    sub = m[np.ix_(idx, idx)]
    return np.linalg.eigvalsh(sub)[0]


def fci_energy(mf):
    cis = fci.FCI(mf)
    cis.conv_tol = 1e-13
    e, _ = cis.kernel()
    return e


# ------------------------------------------------------------------- output


def fmt(x):
    return "%.16e" % x


def write_ham(path, label, x, units, n, ne, terms, hf, fci_e, provenance):
    ident = "I" * n
    offset = terms.get(ident, 0.0)
    key = {"I": 0, "X": 1, "Y": 2, "Z": 3}
    diagonal = sorted(
        ((s, c) for s, c in terms.items() if s != ident and set(s) <= {"I", "Z"}),
        key=lambda sc: [key[ch] for ch in sc[0]],
    )
    # non-diagonal strings stay in generation order
    body = diagonal + [(s, c) for s, c in terms.items() if not set(s) <= {"I", "Z"}]
    with open(path, "w") as f:
        f.write("# qubit Hamiltonian interchange file\n")
        f.write("format_version = 1\n")
        f.write("label = %s\n" % label)
        f.write("x_value = %s\n" % fmt(x))
        f.write("x_units = %s\n" % units)
        f.write("n_qubits = %d\n" % n)
        f.write("n_electrons = %d\n" % ne)
        f.write("identity_offset = %s\n" % fmt(offset))
        f.write("reference_hf = %s\n" % fmt(hf))
        f.write("reference_fci = %s\n" % fmt(fci_e))
        f.write("provenance = %s\n" % provenance)
        f.write("terms\n")
        for s, c in body:
            f.write("%s %s\n" % (s, fmt(c)))


def fixture_family(dirname, label, units, geom_fn, xs, dense_check):
    out = os.path.join(FIXTURES, dirname)
    os.makedirs(out, exist_ok=True)
    for x in xs:
        mol = build_mol(geom_fn(x))
        mf, terms = build_hamiltonian(mol)
        n = 2 * mol.nao
        ne = mol.nelectron
        e_fci = fci_energy(mf)
        ref = "ROHF" if mol.spin else "RHF"
        if dense_check:
            e_sector = sector_min(terms, n, ne)
            assert abs(e_sector - e_fci) < 1e-9, (x, e_sector, e_fci)
            e_fci = e_sector
        prov = (
            "pyscf %s %s/STO-3G; python Jordan-Wigner, interleaved spin orbitals, "
            "non-diagonal terms in OpenFermion generation order; "
            "fci = particle-number-sector ground energy" % (pyscf.__version__, ref)
        )
        path = os.path.join(out, "%s_%s.ham" % (label, ("%.2f" % x).replace(".", "p")))
        write_ham(path, label, x, units, n, ne, terms, mf.e_tot, e_fci, prov)
        print("wrote", path, len(terms), "terms", "hf", mf.e_tot, "fci", e_fci)


def oracle_values():
    print("== H2 at 0.7414 A ==")
    mol = build_mol(h2(0.7414))
    s = mol.intor("int1e_ovlp")
    t = mol.intor("int1e_kin")
    v = mol.intor("int1e_nuc")
    eri = mol.intor("int2e")
    np.set_printoptions(precision=17)
    print("S", repr(s))
    print("T", repr(t))
    print("V", repr(v))
    for idx in [(0, 0, 0, 0), (0, 0, 1, 1), (0, 1, 0, 1), (0, 0, 0, 1), (1, 1, 1, 1)]:
        print("eri", idx, repr(eri[idx]))
    mf, terms = build_hamiltonian(mol)
    print("enuc", repr(mol.energy_nuc()))
    print("rhf", repr(mf.e_tot))
    print("fci", repr(fci_energy(mf)))
    print("sector", repr(sector_min(terms, 4, 2)))
    print("n_terms", len(terms))
    os.makedirs(FIXTURES, exist_ok=True)
    write_ham(
        os.path.join(FIXTURES, "h2_0p7414.ham"), "h2", 0.7414, "angstrom", 4, 2, terms,
        mf.e_tot, fci_energy(mf),
        "pyscf %s RHF/STO-3G; python Jordan-Wigner, interleaved spin orbitals" % pyscf.__version__,
    )
    for r in [0.4, 1.0, 2.2]:
        mol = build_mol(h2(r))
        mf, _ = build_hamiltonian(mol)
        print("h2 r", r, "rhf", repr(mf.e_tot), "fci", repr(fci_energy(mf)))
    for r in [0.5, 1.0, 2.5]:
        mol = build_mol(h3_triangle_plus(r))
        mf, terms = build_hamiltonian(mol)
        print("h3+ r", r, "rhf", repr(mf.e_tot), "fci", repr(sector_min(terms, 6, 2)),
              "pyscf fci", repr(fci_energy(mf)), "cycles", "n_terms", len(terms))


def main():
    oracle_values()
    if "--oracle-only" in sys.argv:
        return
    xs = [round(0.4 + 0.1 * i, 2) for i in range(19)]
    fixture_family("h3_linear", "h3_linear", "angstrom", h3_linear, xs, True)
    fixture_family("water", "water", "degree", water, [54, 72, 90, 108, 126, 154], False)


if __name__ == "__main__":
    main()
