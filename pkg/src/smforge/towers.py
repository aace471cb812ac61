"""Tower constructions over generalized S-machines.

Four builders turn small linear machines into the large cyclic machine the
group layer consumes.  ``compose`` runs two machines in series through a
connecting rule, ``reflect`` doubles a machine against a mirrored copy of
itself, ``cyclify`` closes the base into a ring behind a fresh anchor
letter, and ``parallelize`` lays several copies of a cyclic machine around
one ring, sharing tape alphabets but not state letters.

Mirror copies use barred letters (name suffix ``~``) rather than inverse
letters: the mirrored image of a tape word w is mu(w) = bar(w)^-1, an
anti-isomorphism, and since bar is a plain renaming every mirrored free
basis keeps the one-positive-letter-per-entry shape the sector machinery
relies on.  ``associated_pair`` undoes the doubling for inspection.
"""

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from smforge.words import Alphabet, Word, relabel
from smforge.smachine import (
    AdmissibleWord,
    GeneralizedRule,
    Hardware,
    Machine,
    NoiseDecl,
    Part,
    RulePart,
    SectorRule,
    validate_noisy,
)


# -- letter bookkeeping ---------------------------------------------------------

def bar_name(name: str) -> str:
    return name + "~"


def unbar_name(name: str) -> str:
    if not name.endswith("~"):
        raise ValueError("%r is not a barred name" % name)
    return name[:-1]


def _copy_letter(al2: Alphabet, src: Alphabet, x: int,
                 name: Optional[str] = None, part: Optional[int] = None,
                 sector: Optional[int] = None,
                 coord: Optional[int] = None) -> int:
    """Intern a letter of ``src`` into ``al2``, optionally re-indexed."""
    return al2.intern(
        name if name is not None else src.name_of(x),
        kind=src.kind_of(x),
        sector=src.sector_of(x) if sector is None else sector,
        part=src.part_of(x) if part is None else part,
        subkind=src.subkind_of(x) or "o",
        coord=src.coord_of(x) if coord is None else coord)


def _map_sector(sec: Optional[SectorRule], lmap: Dict[int, int],
                al2: Alphabet) -> Optional[SectorRule]:
    if sec is None:
        return None
    return SectorRule(tuple(relabel(x, lmap, al2) for x in sec.X),
                      tuple(relabel(z, lmap, al2) for z in sec.Z))


def _translate_rule(hw2: Hardware, r: GeneralizedRule,
                    lmap: Dict[int, int]) -> GeneralizedRule:
    al2 = hw2.alpha
    parts = [RulePart(lmap[rp.q], relabel(rp.u, lmap, al2),
                      lmap[rp.q2], relabel(rp.v, lmap, al2))
             for rp in r.parts]
    sectors = [_map_sector(sec, lmap, al2) for sec in r.sectors]
    return GeneralizedRule(hw2, r.name, parts, sectors)


def _map_noise(noise: Optional[NoiseDecl], lmap: Dict[int, int],
               smap: Callable[[int], int]) -> Optional[NoiseDecl]:
    if noise is None:
        return None
    out = NoiseDecl()
    for s, ys in noise.K.items():
        out.K[smap(s)] = tuple(lmap[y] for y in ys)
    for s, ys in noise.M.items():
        out.M[smap(s)] = tuple(lmap[y] for y in ys)
    for s, ys in noise.N.items():
        out.N[smap(s)] = tuple(lmap[y] for y in ys)
    for s, d in noise.phi.items():
        out.phi[smap(s)] = {lmap[a]: lmap[b] for a, b in d.items()}
    return out


def _merge_noise(a: Optional[NoiseDecl],
                 b: Optional[NoiseDecl]) -> Optional[NoiseDecl]:
    if a is None:
        return b
    if b is None:
        return a
    overlap = ((set(a.K) | set(a.M) | set(a.N))
               & (set(b.K) | set(b.M) | set(b.N)))
    if overlap:
        raise ValueError("noise declared twice for sectors %s"
                         % sorted(overlap))
    out = NoiseDecl(dict(a.K), dict(a.M), dict(a.N), dict(a.phi))
    out.K.update(b.K)
    out.M.update(b.M)
    out.N.update(b.N)
    out.phi.update(b.phi)
    return out


# -- padding and series composition ----------------------------------------------

def pad(m: Machine, n_parts: int,
        state_names: Optional[Sequence[str]] = None,
        name: Optional[str] = None) -> Machine:
    """Append inert singleton parts until the base has ``n_parts`` parts.

    The new parts carry empty tape alphabets and every rule fixes their
    single state letter, so the padded machine runs exactly the original
    computations.  The input machine's alphabet is extended in place.
    """
    hw = m.hw
    if hw.cyclic:
        raise ValueError("pad expects linear hardware")
    k = n_parts - hw.n_parts
    if k < 0:
        raise ValueError("machine already has %d > %d parts"
                         % (hw.n_parts, n_parts))
    if k == 0:
        return m
    names = (list(state_names) if state_names is not None
             else ["pad%d" % j for j in range(hw.n_parts, n_parts)])
    if len(names) != k:
        raise ValueError("need %d padding state names, got %d"
                         % (k, len(names)))
    al = hw.alpha
    fresh = []
    for j, nm in zip(range(hw.n_parts, n_parts), names):
        if nm in al:
            raise ValueError("padding state %r collides with a letter" % nm)
        fresh.append(al.intern(nm, kind="q", part=j))
    hw2 = Hardware(al, list(hw.parts) + [Part((q,), q, q) for q in fresh],
                   list(hw.tapes) + [()] * k)
    e = al.word()
    rules = []
    for r in m.rules.values():
        parts = list(r.parts) + [RulePart(q, e, q, e) for q in fresh]
        rules.append(GeneralizedRule(hw2, r.name, parts,
                                     list(r.sectors) + [None] * k))
    return Machine(name or m.name, hw2, rules, m.input_sectors, m.noise)


@dataclass
class SigmaSpec:
    """How to connect two machines in series.

    ``sector`` is the one sector the connecting rule leaves unlocked, with
    the identity on the composite tape alphabet there.  ``identify``
    renames tape letters of the second machine onto tape letters of the
    first (by name), so the output tape of the first machine becomes the
    input tape of the second.
    """
    sector: int = 2
    identify: Optional[Dict[str, str]] = None
    name: str = "sigma"


def compose(m_a: Machine, m_b: Machine, sigma: SigmaSpec,
            name: Optional[str] = None) -> Machine:
    """Series composition: run m_a, hand over by the sigma rule, run m_b.

    Both machines must be linear with the same number of parts (pad the
    shorter one first).  Part i of the result carries the state letters of
    both part i's; start states come from m_a, end states from m_b.  State
    letters and rule names must not collide; tape letters of m_b are
    renamed through ``sigma.identify`` where given and kept otherwise.
    """
    if m_a.hw.cyclic or m_b.hw.cyclic:
        raise ValueError("compose expects linear machines")
    n = m_a.hw.n_parts
    if m_b.hw.n_parts != n:
        raise ValueError("part counts differ: %d vs %d"
                         % (n, m_b.hw.n_parts))
    if not 1 <= sigma.sector < n:
        raise ValueError("sigma sector %d out of range" % sigma.sector)
    dup = set(m_a.rules) & set(m_b.rules)
    if sigma.name in m_a.rules or sigma.name in m_b.rules:
        dup.add(sigma.name)
    if dup:
        raise ValueError("rule names collide: %s" % ", ".join(sorted(dup)))
    ident = dict(sigma.identify or {})

    al = Alphabet()
    amap: Dict[int, int] = {}
    for p in m_a.hw.parts:
        for q in p.letters:
            amap[q] = _copy_letter(al, m_a.hw.alpha, q)
    for s in range(1, n):
        for y in m_a.hw.tapes[s]:
            amap[y] = _copy_letter(al, m_a.hw.alpha, y)
    bmap: Dict[int, int] = {}
    for p in m_b.hw.parts:
        for q in p.letters:
            nm = m_b.hw.alpha.name_of(q)
            if nm in al:
                raise ValueError("state letter %r appears in both machines"
                                 % nm)
            bmap[q] = _copy_letter(al, m_b.hw.alpha, q)
    for s in range(1, n):
        for y in m_b.hw.tapes[s]:
            nm = m_b.hw.alpha.name_of(y)
            if nm in ident:
                bmap[y] = al.id_of(ident[nm])
            elif nm in al:
                raise ValueError("tape letter %r needs an identify entry"
                                 % nm)
            else:
                bmap[y] = _copy_letter(al, m_b.hw.alpha, y)

    parts = []
    for i in range(n):
        pa, pb = m_a.hw.parts[i], m_b.hw.parts[i]
        letters = (tuple(amap[q] for q in pa.letters)
                   + tuple(bmap[q] for q in pb.letters))
        parts.append(Part(letters, amap[pa.start], bmap[pb.end]))
    tapes: List[Tuple[int, ...]] = [()]
    for s in range(1, n):
        joint = [amap[y] for y in m_a.hw.tapes[s]]
        for y in m_b.hw.tapes[s]:
            if bmap[y] not in joint:
                joint.append(bmap[y])
        tapes.append(tuple(joint))
    hw = Hardware(al, parts, tapes)

    rules = [_translate_rule(hw, r, amap) for r in m_a.rules.values()]
    e = al.word()
    sparts = [RulePart(amap[m_a.hw.parts[i].end], e,
                       bmap[m_b.hw.parts[i].start], e) for i in range(n)]
    ssec: List[Optional[SectorRule]] = [None] * n
    singles = tuple(al.word([y]) for y in tapes[sigma.sector])
    ssec[sigma.sector] = SectorRule(singles, singles)
    rules.append(GeneralizedRule(hw, sigma.name, sparts, ssec))
    rules.extend(_translate_rule(hw, r, bmap) for r in m_b.rules.values())

    noise = _merge_noise(_map_noise(m_a.noise, amap, lambda s: s),
                         _map_noise(m_b.noise, bmap, lambda s: s))
    m = Machine(name or (m_a.name + "-" + m_b.name), hw, rules,
                input_sectors=list(m_a.input_sectors), noise=noise)
    validate_noisy(m)
    return m


# -- reflection -------------------------------------------------------------------

def reflect(m: Machine, name: Optional[str] = None) -> Machine:
    """Double a linear machine against its mirror image.

    Parts 0..n-1 stay as they are; part 2n-1-i is a barred copy of part i.
    The new middle sector n is empty and locked by every rule.  Mirror
    tape content follows the original through mu(w) = bar(w)^-1: each rule
    acts on mirror part 2n-1-i by q~ -> mu(v) q2~ mu(u) and on mirror
    sector 2n-s through the barred bases, which together reproduce mu of
    the original action.  Input sectors double up and the noise
    declaration is mirrored alongside.
    """
    hw = m.hw
    if hw.cyclic:
        raise ValueError("reflect expects linear hardware")
    n = hw.n_parts
    src = hw.alpha
    used = [q for p in hw.parts for q in p.letters]
    used += [y for t in hw.tapes for y in t]
    unames = {src.name_of(x) for x in used}
    clash = sorted(nm for nm in unames if bar_name(nm) in unames)
    if clash:
        raise ValueError("letters %s collide with their mirror names"
                         % ", ".join(clash))

    al = Alphabet()
    omap: Dict[int, int] = {}
    bmap: Dict[int, int] = {}
    for p in hw.parts:
        for q in p.letters:
            omap[q] = _copy_letter(al, src, q)
    for s in range(1, n):
        for y in hw.tapes[s]:
            omap[y] = _copy_letter(al, src, y)
    for i, p in enumerate(hw.parts):
        for q in p.letters:
            bmap[q] = al.intern(bar_name(src.name_of(q)), kind="q",
                                part=2 * n - 1 - i)
    for s in range(1, n):
        for y in hw.tapes[s]:
            bmap[y] = al.intern(bar_name(src.name_of(y)), kind="a",
                                sector=2 * n - s,
                                subkind=src.subkind_of(y) or "o")

    parts = [Part(tuple(omap[q] for q in p.letters),
                  omap[p.start], omap[p.end]) for p in hw.parts]
    for i in range(n - 1, -1, -1):
        p = hw.parts[i]
        parts.append(Part(tuple(bmap[q] for q in p.letters),
                          bmap[p.start], bmap[p.end]))
    tapes: List[Tuple[int, ...]] = [()]
    for s in range(1, n):
        tapes.append(tuple(omap[y] for y in hw.tapes[s]))
    tapes.append(())
    for s in range(n - 1, 0, -1):
        tapes.append(tuple(bmap[y] for y in hw.tapes[s]))
    hw2 = Hardware(al, parts, tapes)

    def mu(w: Word) -> Word:
        return ~relabel(w, bmap, al)

    rules = []
    for r in m.rules.values():
        rparts = [RulePart(omap[rp.q], relabel(rp.u, omap, al),
                           omap[rp.q2], relabel(rp.v, omap, al))
                  for rp in r.parts]
        for i in range(n - 1, -1, -1):
            rp = r.parts[i]
            rparts.append(RulePart(bmap[rp.q], mu(rp.v),
                                   bmap[rp.q2], mu(rp.u)))
        sectors: List[Optional[SectorRule]] = [None]
        for s in range(1, n):
            sectors.append(_map_sector(r.sectors[s], omap, al))
        sectors.append(None)
        for s in range(n - 1, 0, -1):
            sectors.append(_map_sector(r.sectors[s], bmap, al))
        rules.append(GeneralizedRule(hw2, r.name, rparts, sectors))

    inputs = list(m.input_sectors) + [2 * n - s for s in m.input_sectors]
    noise = _merge_noise(_map_noise(m.noise, omap, lambda s: s),
                         _map_noise(m.noise, bmap, lambda s: 2 * n - s))
    mm = Machine(name or (m.name + "~"), hw2, rules, inputs, noise)
    validate_noisy(mm)
    return mm


def associated_pair(W: AdmissibleWord, doubled: Machine, original: Machine
                    ) -> Tuple[AdmissibleWord, AdmissibleWord]:
    """Split a configuration of a reflected machine into its two halves.

    The first half reads forward; the second is recovered through mu, so
    both returned words live on the original hardware.  The middle sector
    must be empty.
    """
    hw2, hw = doubled.hw, original.hw
    n = hw.n_parts
    if len(W.states) != 2 * n or not W.is_configuration():
        raise ValueError("need a configuration of the doubled machine")
    if W.tapes[n - 1]:
        raise ValueError("middle sector is not empty")
    al2, al = hw2.alpha, hw.alpha

    def orig_id(x: int) -> int:
        nm = al2.name_of(x)
        return al.id_of(nm[:-1] if nm.endswith("~") else nm)

    def back(w: Word) -> Word:
        return Word(al, tuple((1 if x > 0 else -1) * orig_id(x)
                              for x in w.ltrs))

    states1 = [(orig_id(q), 1) for q, _ in W.states[:n]]
    tapes1 = [back(W.tapes[j]) for j in range(n - 1)]
    states2 = [(orig_id(q), 1) for q, _ in reversed(W.states[n:])]
    tapes2 = [back(~W.tapes[2 * n - s - 1]) for s in range(1, n)]
    return (AdmissibleWord(hw, states1, tapes1),
            AdmissibleWord(hw, states2, tapes2))


# -- cyclification ----------------------------------------------------------------

def cyclify(m: Machine, t_name: str = "t",
            name: Optional[str] = None) -> Machine:
    """Close a linear machine into a cyclic one behind a fresh anchor part.

    The new singleton part {t} becomes part 0 and the old part i moves to
    i + 1, so the old sector s becomes s + 1.  Both new sectors (1,
    between t and the old first part, and 0, the wrap) are empty and
    locked, and every rule fixes t.
    """
    hw = m.hw
    if hw.cyclic:
        raise ValueError("cyclify expects linear hardware")
    n = hw.n_parts
    src = hw.alpha
    used = [q for p in hw.parts for q in p.letters]
    used += [y for t in hw.tapes for y in t]
    if t_name in {src.name_of(x) for x in used}:
        raise ValueError("anchor name %r collides with a letter" % t_name)

    al = Alphabet()
    t = al.intern(t_name, kind="q", part=0)
    lmap: Dict[int, int] = {}
    for i, p in enumerate(hw.parts):
        for q in p.letters:
            lmap[q] = _copy_letter(al, src, q, part=i + 1)
    for s in range(1, n):
        for y in hw.tapes[s]:
            lmap[y] = _copy_letter(al, src, y, sector=s + 1)
    parts = [Part((t,), t, t)]
    parts += [Part(tuple(lmap[q] for q in p.letters),
                   lmap[p.start], lmap[p.end]) for p in hw.parts]
    tapes: List[Tuple[int, ...]] = [(), ()]
    tapes += [tuple(lmap[y] for y in hw.tapes[s]) for s in range(1, n)]
    hw2 = Hardware(al, parts, tapes, cyclic=True)

    e = al.word()
    rules = []
    for r in m.rules.values():
        rparts = [RulePart(t, e, t, e)]
        rparts += [RulePart(lmap[rp.q], relabel(rp.u, lmap, al),
                            lmap[rp.q2], relabel(rp.v, lmap, al))
                   for rp in r.parts]
        sectors: List[Optional[SectorRule]] = [None, None]
        sectors += [_map_sector(r.sectors[s], lmap, al)
                    for s in range(1, n)]
        rules.append(GeneralizedRule(hw2, r.name, rparts, sectors))
    inputs = [s + 1 for s in m.input_sectors]
    noise = _map_noise(m.noise, lmap, lambda s: s + 1)
    mm = Machine(name or (m.name + "o"), hw2, rules, inputs, noise)
    validate_noisy(mm)
    return mm


# -- parallel copies ---------------------------------------------------------------

def parallelize(m: Machine, L: int, lock_first: bool = False,
                name: Optional[str] = None) -> Machine:
    """Run L copies of a cyclic machine around one ring.

    Copy i >= 2 renames its state letters with an ``(i)`` suffix; tape
    alphabets are shared between all copies, so every rule acts on all
    copies' sectors in parallel.  Junction sectors inherit the wrap
    alphabet of ``m``.  With ``lock_first`` the first copy of the smallest
    input sector is locked instead and the two insertions beside it are
    dropped; all other sectors keep working, so the locked copy's
    neighbours still evolve in step with the other copies.
    """
    hw = m.hw
    if not hw.cyclic:
        raise ValueError("parallelize expects cyclic hardware")
    if L < 1:
        raise ValueError("need at least one copy")
    P = hw.n_parts
    src = hw.alpha

    special: Optional[int] = None
    if lock_first:
        if not m.input_sectors:
            raise ValueError("lock_first needs an input sector")
        special = min(m.input_sectors)
        if special < 1:
            raise ValueError("cannot lock the wrap sector")

    al = Alphabet()
    tmap: Dict[int, int] = {}
    for s in range(P):
        for y in hw.tapes[s]:
            tmap[y] = _copy_letter(al, src, y)
    smaps: List[Dict[int, int]] = []
    for i in range(1, L + 1):
        suf = "" if i == 1 else "(%d)" % i
        d: Dict[int, int] = {}
        for pi, p in enumerate(hw.parts):
            for q in p.letters:
                nm = src.name_of(q) + suf
                if nm in al:
                    raise ValueError("state letter %r collides" % nm)
                d[q] = al.intern(nm, kind="q", part=(i - 1) * P + pi,
                                 coord=i)
        smaps.append(d)
    parts: List[Part] = []
    tapes: List[Tuple[int, ...]] = []
    for i in range(1, L + 1):
        d = smaps[i - 1]
        for pi, p in enumerate(hw.parts):
            parts.append(Part(tuple(d[q] for q in p.letters),
                              d[p.start], d[p.end]))
            tapes.append(tuple(tmap[y] for y in hw.tapes[pi]))
    hw2 = Hardware(al, parts, tapes, cyclic=True)

    e = al.word()
    rules = []
    for r in m.rules.values():
        rparts: List[RulePart] = []
        rsectors: List[Optional[SectorRule]] = []
        for i in range(1, L + 1):
            d = smaps[i - 1]
            for pi, rp in enumerate(r.parts):
                u = relabel(rp.u, tmap, al)
                v = relabel(rp.v, tmap, al)
                if special is not None and i == 1:
                    if pi == special - 1:
                        v = e
                    if pi == special:
                        u = e
                rparts.append(RulePart(d[rp.q], u, d[rp.q2], v))
            for s in range(P):
                sec = r.sectors[s]
                if special is not None and i == 1 and s == special:
                    sec = None
                rsectors.append(_map_sector(sec, tmap, al))
        rules.append(GeneralizedRule(hw2, r.name, rparts, rsectors))

    inputs = []
    noise = NoiseDecl() if m.noise is not None else None
    for i in range(1, L + 1):
        for s in m.input_sectors:
            if special is not None and i == 1 and s == special:
                continue
            inputs.append((i - 1) * P + s)
        if m.noise is not None:
            mapped = _map_noise(m.noise, tmap,
                                lambda s, base=(i - 1) * P: base + s)
            noise = _merge_noise(noise, mapped)
    mm = Machine(name or "%sx%d" % (m.name, L), hw2, rules, inputs, noise)
    validate_noisy(mm)
    return mm


def component(W: AdmissibleWord, coord: int, P: int) -> AdmissibleWord:
    """The coord-th copy's slice of a parallel machine's configuration.

    The slice keeps the copy's own sectors and drops the junctions, so a
    rule of the parallel machine restricts to it part by part.
    """
    if not W.is_configuration():
        raise ValueError("component needs a configuration")
    if len(W.states) % P:
        raise ValueError("state count %d not a multiple of %d"
                         % (len(W.states), P))
    L = len(W.states) // P
    if not 1 <= coord <= L:
        raise ValueError("no copy %d in a %d-copy configuration"
                         % (coord, L))
    lo = (coord - 1) * P
    return AdmissibleWord(W.hw, W.states[lo:lo + P],
                          W.tapes[lo:lo + P - 1])
