"""Moment-matrix hierarchy for quantum-box membership and functional bounds.

Words are products of measurement projectors, one letter per projector.  A
letter is the pair ``(setting, outcome)`` with settings 1-based and outcomes
0-based; the last outcome of every setting is eliminated (it equals identity
minus the others), so letters carry outcomes ``0..n-2`` only.  Alice letters
commute with Bob letters, adjacent same-setting letters multiply by the
projector rules (idempotent if equal, zero otherwise), and every word is kept
in the normal order "Alice block then Bob block".

Level ``k`` collects all reduced words of length at most ``k``.  The moment
matrix of a state has entry ``Gamma[s, t] = <S* T>``; entries whose reduced
products coincide (up to adjoint) are equal, diagonal/identity entries are
pinned by the box's probabilities, and positive semidefiniteness of the whole
matrix is the relaxation that is solved here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import matcore, sdp
from .boxes import Box, QuantumRealization

MAX_WORDS = 5000
DEFAULT_TOL = 1e-7


def reduce_letters(letters):
    """Reduce a single-party letter string; returns a tuple or None for zero.

    Adjacent letters with the same setting collapse (equal outcome) or
    annihilate (different outcome); letters with different settings have no
    relation and keep their order.
    """
    out = []
    for let in letters:
        if out and out[-1][0] == let[0]:
            if out[-1][1] == let[1]:
                continue  # idempotent
            return None  # orthogonal projectors
        out.append(tuple(let))
    return tuple(out)


@dataclass(frozen=True)
class Word:
    """A normal-ordered product of Alice then Bob projectors; zero if annihilated."""

    alice: tuple = ()
    bob: tuple = ()
    is_zero: bool = False

    def __len__(self):
        return len(self.alice) + len(self.bob)

    def dagger(self) -> "Word":
        return Word(alice=self.alice[::-1], bob=self.bob[::-1],
                    is_zero=self.is_zero)


def word(alice_letters=(), bob_letters=()) -> Word:
    a = reduce_letters(alice_letters)
    b = reduce_letters(bob_letters)
    if a is None or b is None:
        return Word(is_zero=True)
    return Word(alice=a, bob=b)


def reduce(letters) -> Word:
    """Reduce a mixed string of ``(party, setting, outcome)`` letters.

    ``party`` is ``"A"`` or ``"B"``; the cross-party commutation is applied
    first (stable partition into the Alice and Bob blocks), then the
    single-party projector relations.
    """
    av = [(x, o) for pty, x, o in letters if pty == "A"]
    bv = [(x, o) for pty, x, o in letters if pty == "B"]
    if len(av) + len(bv) != len(letters):
        raise ValueError("letters must carry party 'A' or 'B'")
    return word(av, bv)


def product(s: Word, t: Word) -> Word:
    if s.is_zero or t.is_zero:
        return Word(is_zero=True)
    return word(s.alice + t.alice, s.bob + t.bob)


def _party_words(m: int, n: int, max_len: int):
    """All reduced single-party words up to a length, in graded lex order."""
    letters = [(x, a) for x in range(1, m + 1) for a in range(n - 1)]
    level = [()]
    out = [()]
    for _ in range(max_len):
        nxt = []
        for w in level:
            for let in letters:
                if w and w[-1][0] == let[0]:
                    continue  # would collapse or annihilate: not reduced
                nxt.append(w + (let,))
        out.extend(nxt)
        level = nxt
    return out


def _class_key(s: Word, t: Word):
    """Canonical key of the reduced product S*T, identifying adjoint pairs."""
    p = product(s.dagger(), t)
    if p.is_zero:
        return None
    q = p.dagger()
    return min((p.alice, p.bob), (q.alice, q.bob))


@dataclass
class MomentProblem:
    """The symbolic structure of one hierarchy level for fixed (m, n)."""

    m: int
    n: int
    level: int
    words: list
    class_of: dict = field(repr=False)  # (i, j) -> class id, absent if zero
    class_keys: list = field(repr=False)
    basis: list = field(repr=False)  # class id -> list of (i, j) positions

    @property
    def size(self) -> int:
        return len(self.words)

    def class_of_word(self, w: Word):
        """Class id of a word viewed as the product (identity)* . w."""
        key = _class_key(Word(), w)
        return self._key_index.get(key)

    def __post_init__(self):
        self._key_index = {k: i for i, k in enumerate(self.class_keys)}

    def basis_matrix(self, cid: int) -> np.ndarray:
        B = np.zeros((self.size, self.size))
        for i, j in self.basis[cid]:
            B[i, j] = 1.0
        return B


def build_level(m: int, n: int, level: int) -> MomentProblem:
    if level < 1:
        raise ValueError("hierarchy level must be at least 1")
    aw = _party_words(m, n, level)
    bw = _party_words(m, n, level)
    words = [Word(alice=a, bob=b) for a in aw for b in bw
             if len(a) + len(b) <= level]
    words.sort(key=lambda w: (len(w), w.alice, w.bob))
    if len(words) > MAX_WORDS:
        raise ValueError(f"level {level} needs {len(words)} words "
                         f"(limit {MAX_WORDS})")
    class_of = {}
    class_keys = []
    index = {}
    basis = []
    for i, s in enumerate(words):
        for j, t in enumerate(words):
            key = _class_key(s, t)
            if key is None:
                continue
            cid = index.get(key)
            if cid is None:
                cid = len(class_keys)
                index[key] = cid
                class_keys.append(key)
                basis.append([])
            class_of[(i, j)] = cid
            basis[cid].append((i, j))
    return MomentProblem(m=m, n=n, level=level, words=words,
                         class_of=class_of, class_keys=class_keys, basis=basis)


def prob_expr(prob: MomentProblem, a: int, b: int, x: int, y: int):
    """P(a, b | x, y) as ``(const, {class id: coeff})`` over moment classes.

    Eliminated last outcomes are expanded by inclusion-exclusion against the
    retained ones.
    """
    n = prob.n

    def cls(aw=(), bw=()):
        cid = prob.class_of_word(word(aw, bw))
        if cid is None:
            raise ValueError("required moment class missing at this level")
        return cid

    terms = {}
    const = 0.0

    def add(cid, coeff):
        terms[cid] = terms.get(cid, 0.0) + coeff

    if a < n - 1 and b < n - 1:
        add(cls(((x, a),), ((y, b),)), 1.0)
    elif a < n - 1:
        add(cls(((x, a),), ()), 1.0)
        for bp in range(n - 1):
            add(cls(((x, a),), ((y, bp),)), -1.0)
    elif b < n - 1:
        add(cls((), ((y, b),)), 1.0)
        for ap in range(n - 1):
            add(cls(((x, ap),), ((y, b),)), -1.0)
    else:
        const = 1.0
        for ap in range(n - 1):
            add(cls(((x, ap),), ()), -1.0)
        for bp in range(n - 1):
            add(cls((), ((y, bp),)), -1.0)
        for ap in range(n - 1):
            for bp in range(n - 1):
                add(cls(((x, ap),), ((y, bp),)), 1.0)
    return const, terms


def _anchor_values(prob: MomentProblem, box: Box):
    """Class values pinned by the box: identity, marginals and joints."""
    pa = box.marginal_a()
    pb = box.marginal_b()
    anchored = {prob.class_of_word(Word()): 1.0}
    for x in range(1, prob.m + 1):
        for a in range(prob.n - 1):
            anchored[prob.class_of_word(word(((x, a),), ()))] = float(pa[a, x - 1])
    for y in range(1, prob.m + 1):
        for b in range(prob.n - 1):
            anchored[prob.class_of_word(word((), ((y, b),)))] = float(pb[b, y - 1])
    for x in range(1, prob.m + 1):
        for y in range(1, prob.m + 1):
            for a in range(prob.n - 1):
                for b in range(prob.n - 1):
                    cid = prob.class_of_word(word(((x, a),), ((y, b),)))
                    anchored[cid] = box.prob(a, b, x, y)
    return anchored


@dataclass
class MomentMatrix:
    m: int
    n: int
    level: int
    words: list
    values: np.ndarray

    def to_json(self) -> dict:
        return {"m": self.m, "n": self.n, "level": self.level,
                "words": [{"alice": list(w.alice), "bob": list(w.bob)}
                          for w in self.words],
                "values": self.values.tolist()}


@dataclass
class NpaVerdict:
    feasible: bool
    margin: float
    level: int
    certificate: MomentMatrix | None = None
    dual_certificate: np.ndarray | None = None


def npa_feasible(box: Box, level: int = 1, tol: float = DEFAULT_TOL) -> NpaVerdict:
    """Test box membership at a hierarchy level, in margin form.

    Maximizes the smallest eigenvalue the moment matrix can attain under all
    anchor and class-equality constraints.  A nonnegative margin (within
    ``tol``) means the box is not refuted at this level and the achieving
    moment matrix is returned; a negative margin refutes membership, with the
    dual matrix of the PSD constraint as the separating certificate.
    """
    from .boxes import is_nonsignalling

    ns = is_nonsignalling(box, 1e-8)
    if not ns["ok"]:
        raise ValueError(f"signalling box (violation {ns['max_violation']})")
    prob = build_level(box.m, box.n, level)
    anchored = _anchor_values(prob, box)
    N = prob.size
    G0 = np.zeros((N, N))
    free = [cid for cid in range(len(prob.class_keys)) if cid not in anchored]
    var_of = {cid: k for k, cid in enumerate(free)}
    terms = {}
    for cid, val in anchored.items():
        G0 += val * prob.basis_matrix(cid)
    for cid in free:
        terms[var_of[cid]] = prob.basis_matrix(cid)
    margin, res = sdp.feasibility_margin([(G0, terms)])
    gamma = G0.copy()
    for cid in free:
        gamma += res.x[var_of[cid]] * prob.basis_matrix(cid)
    feasible = margin >= -tol
    if feasible:
        return NpaVerdict(feasible=True, margin=margin, level=level,
                          certificate=MomentMatrix(m=box.m, n=box.n,
                                                   level=level,
                                                   words=prob.words,
                                                   values=gamma))
    return NpaVerdict(feasible=False, margin=margin, level=level,
                      dual_certificate=res.Z[0] if res.Z else None)


def npa_bound(functional, m: int | None = None, n: int | None = None,
              level: int = 1, tol: float = sdp.DEFAULT_TOL) -> float:
    """Upper bound on a Bell functional over the level-``level`` relaxation.

    ``functional`` is either an object with ``t``/``m``/``n`` attributes or a
    raw array ``t[a, b, x-1, y-1]`` (then ``m`` and ``n`` are required); it
    weights P(a, b | x, y), and the bound is the maximum of the weighted sum
    over PSD moment matrices with a unit identity entry.
    """
    if hasattr(functional, "t"):
        m, n = functional.m, functional.n
        functional = functional.t
    elif m is None or n is None:
        raise ValueError("m and n are required for a raw coefficient array")
    functional = np.asarray(functional, dtype=float)
    if functional.shape != (n, n, m, m):
        raise ValueError("functional shape must be (n, n, m, m)")
    prob = build_level(m, n, level)
    N = prob.size
    ident = prob.class_of_word(Word())
    free = [cid for cid in range(len(prob.class_keys)) if cid != ident]
    var_of = {cid: k for k, cid in enumerate(free)}

    const = 0.0
    obj = np.zeros(len(free))
    for x in range(1, m + 1):
        for y in range(1, m + 1):
            for a in range(n):
                for b in range(n):
                    coeff = functional[a, b, x - 1, y - 1]
                    if coeff == 0.0:
                        continue
                    c0, tms = prob_expr(prob, a, b, x, y)
                    const += coeff * c0
                    for cid, co in tms.items():
                        obj[var_of[cid]] += coeff * co

    G0 = prob.basis_matrix(ident)
    terms = {var_of[cid]: prob.basis_matrix(cid) for cid in free}
    res = sdp.solve_lmi(obj, [(G0, terms)], tol=tol)
    if res.status != "optimal":
        raise sdp.SolverError(f"moment-relaxation solve ended with {res.status}")
    return const + res.value


def moment_matrix_from_realization(r: QuantumRealization, level: int,
                                   m: int | None = None,
                                   n: int | None = None) -> MomentMatrix:
    """Exact moment matrix of a projective realization at a hierarchy level.

    Entry (s, t) is ``Re Tr(rho (A_s A_t tensor B_s B_t))`` with ``A_s`` the
    adjoint of Alice's word operator; useful as a soundness oracle for the
    relaxation (it must be PSD and satisfy every class equality).
    """
    m = len(r.E) if m is None else m
    n = len(r.E[0]) if n is None else n
    prob = build_level(m, n, level)

    def op(letters, povms, dim):
        out = np.eye(dim, dtype=complex)
        for x, a in letters:
            out = out @ povms[x - 1][a]
        return out

    N = prob.size
    amats = [op(w.alice, r.E, r.dA) for w in prob.words]
    bmats = [op(w.bob, r.F, r.dB) for w in prob.words]
    vals = np.zeros((N, N))
    for i in range(N):
        for j in range(N):
            full = matcore.kron(matcore.dagger(amats[i]) @ amats[j],
                                matcore.dagger(bmats[i]) @ bmats[j])
            vals[i, j] = float(np.trace(r.rho @ full).real)
    return MomentMatrix(m=m, n=n, level=level, words=prob.words, values=vals)


def check_moment_matrix(prob_or_level, mat: MomentMatrix,
                        tol: float = 1e-8) -> dict:
    """Verify PSD-ness and the class equalities of a moment matrix.

    Returns ``{"ok", "min_eigenvalue", "max_class_spread", "identity_error"}``.
    """
    if isinstance(prob_or_level, MomentProblem):
        prob = prob_or_level
    else:
        prob = build_level(mat.m, mat.n, int(prob_or_level))
    vals = np.asarray(mat.values, dtype=float)
    mineig = float(np.linalg.eigvalsh(0.5 * (vals + vals.T))[0])
    spread = 0.0
    for positions in prob.basis:
        ent = [vals[i, j] for i, j in positions]
        spread = max(spread, max(ent) - min(ent))
    zero_err = 0.0
    for i in range(prob.size):
        for j in range(prob.size):
            if (i, j) not in prob.class_of:
                zero_err = max(zero_err, abs(vals[i, j]))
    ident = prob.class_of_word(Word())
    i0, j0 = prob.basis[ident][0]
    id_err = abs(vals[i0, j0] - 1.0)
    ok = (mineig >= -tol and spread <= tol and zero_err <= tol
          and id_err <= tol)
    return {"ok": bool(ok), "min_eigenvalue": mineig,
            "max_class_spread": float(max(spread, zero_err)),
            "identity_error": float(id_err)}
