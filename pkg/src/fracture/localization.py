"""Inverting and completing a multiplier action, degreewise.

Both operations are truncated at K steps and certified cellwise.  The
truncated colimit of M_d -> M_{d+deg x} -> ... is its last in-window
stage; the cell is verified when the chain moved at all, its final
transition is an isomorphism, and the stage it reads from was itself
verified.  The truncated completion quotients by the image of the deepest
in-window power of x and is verified when later stages provably cannot
change the quotient.

Verification flags are honest bookkeeping, not guarantees of failure:
an unverified cell still holds the best in-window approximation.
"""

from __future__ import annotations

from .bigraded import (
    FLAG_BOUNDARY,
    FLAG_VERIFIED,
    BiDegree,
    BigradedModule,
    Multiplier,
    PHom,
    act,
    multiplier,
    phom_identity,
    reduce_entries,
)
from .matrices import column, identity, mat_mul
from .snf import cokernel, invert_iso, is_isomorphism, span_equal

COMPLETION_CAVEAT = "completion-degreewise"


def default_steps(window):
    """K defaults to the window diameter: cones stabilize within it."""
    return max(window.width, window.height, 1)


def resolve_multiplier(module, mult):
    m = module.multiplier(mult) if isinstance(mult, str) else multiplier(mult)
    if m.degree == (0, 0):
        raise ValueError(f"cannot localize along {m.name!r}: degree (0,0)")
    return m


def _depth(window, d, delta, cap):
    """Longest chain d, d+delta, ..., d+n*delta staying in the window."""
    n = 0
    cur = BiDegree(*d)
    while n < cap:
        cur = cur + delta
        if not window.contains(cur):
            break
        n += 1
    return n


def composite_action(module, mult, start, count):
    """The PHom of count successive mult-actions out of the start cell."""
    f = phom_identity(module.cell(start))
    cur = BiDegree(*start)
    for _ in range(count):
        f = act(module, mult, cur) @ f
        cur = cur + mult.degree
    return f


def insertion(module, mult, d, steps=None):
    """Canonical map from M_d into the inverted module's cell at d."""
    x = resolve_multiplier(module, mult)
    K = default_steps(module.window) if steps is None else steps
    return composite_action(module, x, d, _depth(module.window, d, x.degree, K))


def invert(module, mult, steps=None):
    """Localization of the module at a multiplier, truncated at K steps.

    The cell at d is the module's cell K steps along the multiplier (or as
    far as the window allows).  On verified cells the multiplier acts
    invertibly; near the window edge values are approximations flagged
    boundary-unverified.
    """
    x = resolve_multiplier(module, mult)
    w = module.window
    K = default_steps(w) if steps is None else steps
    if K < 1:
        raise ValueError("localization needs at least one step")
    depths = {d: _depth(w, d, x.degree, K) for d in w.cells()}
    ends = {d: d + x.degree.scaled(n) for d, n in depths.items()}

    cells = {}
    flags = {}
    for d in w.cells():
        g = module.cell(ends[d])
        if not g.is_zero():
            cells[d] = g
        # stabilization certificate: the chain took at least one step and
        # its final transition is an isomorphism.  Failures are recorded
        # even on zero cells, so a truncation gap cannot pass for a
        # verified zero.
        n = depths[d]
        ok = (
            n >= 1
            and module.flag(ends[d]) == FLAG_VERIFIED
            and is_isomorphism(act(module, x, ends[d] - x.degree))
        )
        if not ok:
            flags[d] = FLAG_BOUNDARY

    mults = dict(module.multipliers)
    mults.setdefault(x.name, x.degree)
    actions = {}
    for name, dy in mults.items():
        y = Multiplier(name, BiDegree(*dy))
        for d in cells:
            t = d + y.degree
            if not w.contains(t) or t not in cells:
                continue
            shift = depths[t] - depths[d]
            e = ends[d]
            if shift >= 0:
                # walk y once, then catch up along x inside the target chain
                f = composite_action(module, x, e + y.degree, shift) @ act(module, y, e)
            else:
                back = composite_action(module, x, d + x.degree.scaled(depths[t]), -shift)
                if not is_isomorphism(back):
                    flags[d] = FLAG_BOUNDARY
                    continue
                f = act(module, y, d + x.degree.scaled(depths[t])) @ invert_iso(back)
            if not f.is_zero():
                actions[(name, d)] = f
    return BigradedModule(module.prime, w, cells, actions, mults, flags, module.caveats)


def complete(module, mult, steps=None):
    """Completion of the module at a multiplier, truncated at K steps.

    The cell at d becomes M_d / im(x^n) for the deepest in-window power n
    up to K, the last stage of the quotient tower.  Verified cells saw the
    full K stages with the image chain stabilized at the end; the result
    always carries the degreewise-completion caveat since no derived
    functors are modeled.
    """
    x = resolve_multiplier(module, mult)
    w = module.window
    K = default_steps(w) if steps is None else steps
    if K < 1:
        raise ValueError("completion needs at least one step")
    back = -x.degree

    cells = {}
    flags = {}
    projs = {}
    sections = {}
    for d in w.cells():
        g = module.cell(d)
        if g.is_zero():
            if module.flag(d) != FLAG_VERIFIED:
                flags[d] = FLAG_BOUNDARY
            continue
        m = _depth(w, d, back, K)
        if m == 0:
            q, proj, section = g, phom_identity(g), identity(g.ngens)
            ok = False
        else:
            power = composite_action(module, x, d + x.degree.scaled(-m), m)
            q, proj, section = cokernel(power)
            # certificate that deeper stages cannot change the quotient:
            # either the deepest visible image already vanishes (images only
            # shrink further back, so the tower is constant from here on) or
            # the image chain is seen to stabilize across the final step of a
            # full-depth run
            ok = power.is_zero()
            if not ok and m == K:
                prev = composite_action(module, x, d + x.degree.scaled(-(m - 1)), m - 1)
                cols_prev = [column(prev.entries, s) for s in range(prev.source.ngens)]
                cols_last = [column(power.entries, s) for s in range(power.source.ngens)]
                ok = span_equal(g, cols_prev, cols_last)
        verified = ok and module.flag(d) == FLAG_VERIFIED
        if q.is_zero():
            if not verified:
                flags[d] = FLAG_BOUNDARY
            continue
        cells[d] = q
        flags[d] = FLAG_VERIFIED if verified else FLAG_BOUNDARY
        projs[d] = proj
        sections[d] = section

    actions = {}
    for name, dy in module.multipliers.items():
        y = Multiplier(name, BiDegree(*dy))
        for d in cells:
            t = d + y.degree
            if not w.contains(t) or t not in cells:
                continue
            f = act(module, y, d)
            middle = mat_mul(projs[t].entries, f.entries, f.target.ngens, f.source.ngens)
            entries = mat_mul(middle, sections[d], f.source.ngens, cells[d].ngens)
            try:
                induced = PHom(cells[d], cells[t], reduce_entries(cells[d], cells[t], entries))
            except ValueError:
                flags[d] = FLAG_BOUNDARY
                continue
            # well-definedness: inducing through chosen representatives must
            # agree with projecting the honest action
            if not (induced @ projs[d]).same_map(projs[t] @ f):
                flags[d] = FLAG_BOUNDARY
                continue
            if not induced.is_zero():
                actions[(name, d)] = induced
    caveats = tuple(dict.fromkeys(module.caveats + (COMPLETION_CAVEAT,)))
    return BigradedModule(module.prime, w, cells, actions, dict(module.multipliers), flags, caveats)
