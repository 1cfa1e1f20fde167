"""Truncated inversion and completion on hand-built modules and presets.

The hand modules exercise the transport and certificate logic edge by
edge; the preset cases check the frozen values that the assembler relies
on, on a window padded far enough that the core cells are exact.
"""

import pytest

from fracture.bigraded import (
    FLAG_BOUNDARY,
    FLAG_VERIFIED,
    BiDegree,
    BigradedModule,
    Multiplier,
    PGroup,
    PHom,
    Window,
    act,
    cellwise_equal,
    restrict,
)
from fracture.localization import (
    COMPLETION_CAVEAT,
    complete,
    composite_action,
    default_steps,
    insertion,
    invert,
)
from fracture.presentation import expand
from fracture.presets import preset_presentation
from fracture.snf import is_isomorphism

S = Multiplier("s", BiDegree(1, 0))


def chain_module(groups, entries, multiplier=S, prime=2):
    """A one-row module at (0,0), (1,0), ... with the given maps between."""
    cells = {BiDegree(k, 0): g for k, g in enumerate(groups)}
    actions = {}
    for k, rows in enumerate(entries):
        src, tgt = cells[BiDegree(k, 0)], cells[BiDegree(k + 1, 0)]
        actions[(multiplier.name, BiDegree(k, 0))] = PHom(src, tgt, rows)
    window = Window(0, len(groups) - 1, 0, 0)
    return BigradedModule(prime, window, cells, actions, {multiplier.name: multiplier.degree})


def padded_expansion(name, prime, core, pad=13):
    big = Window(core.imin - pad, core.imax + pad, core.jmin - pad, core.jmax + pad)
    return expand(preset_presentation(name, prime), big, budget=1_000_000)


def test_composite_action_multiplies_the_steps() -> None:
    module = chain_module([PGroup(2, 0, (2,))] * 3, [[[2]], [[1]]])
    assert composite_action(module, S, (0, 0), 0).entries == ((1,),)
    assert composite_action(module, S, (0, 0), 2).entries == ((2,),)
    assert insertion(module, S, (0, 0)).entries == ((2,),)


def test_invert_reads_the_deepest_stage_and_flags_honestly() -> None:
    module = chain_module([PGroup(2, 0, (2,))] * 3, [[[2]], [[1]]])
    inv = invert(module, S)
    for k in range(3):
        assert inv.cell((k, 0)) == PGroup(2, 0, (2,))
    assert inv.flag((0, 0)) == FLAG_VERIFIED
    assert inv.flag((1, 0)) == FLAG_VERIFIED
    assert inv.flag((2, 0)) == FLAG_BOUNDARY
    # the multiplier acts as the identity on the common deepest stage
    assert act(inv, "s", (0, 0)).entries == ((1,),)
    assert act(inv, "s", (1, 0)).entries == ((1,),)
    assert is_isomorphism(act(inv, "s", (0, 0)))


def test_invert_is_idempotent_on_verified_cells() -> None:
    module = chain_module([PGroup(2, 0, (2,))] * 3, [[[2]], [[1]]])
    once = invert(module, S)
    twice = invert(once, S)
    for d, flag in once.flags.items():
        if flag == FLAG_VERIFIED:
            assert twice.cell(d) == once.cell(d)


def test_invert_drops_actions_it_cannot_transport() -> None:
    module = chain_module([PGroup(2, 0, (2,))] * 2, [[[2]]])
    inv = invert(module, S)
    assert inv.cell((0, 0)) == PGroup(2, 0, (2,))
    assert inv.flag((0, 0)) == FLAG_BOUNDARY
    assert ("s", BiDegree(0, 0)) not in inv.actions


def test_invert_rejects_degree_zero_and_bad_steps() -> None:
    module = chain_module([PGroup(2, 0, (1,))] * 2, [[[1]]])
    with pytest.raises(ValueError, match="degree"):
        invert(module, "2")
    with pytest.raises(ValueError, match="at least one step"):
        invert(module, S, steps=0)


def test_invert_of_the_zero_module_is_zero() -> None:
    module = BigradedModule(2, Window(-2, 2, -2, 2), {}, {}, {"s": BiDegree(1, 0)})
    assert not invert(module, S).cells


def test_complete_quotients_by_the_deepest_image() -> None:
    module = chain_module([PGroup(2, 0, (2,))] * 3, [[[2]], [[2]]])
    done = complete(module, S)
    # at (2,0) the two-step image is 4 = 0, so the cell is certified whole
    assert done.cell((2, 0)) == PGroup(2, 0, (2,))
    assert done.flag((2, 0)) == FLAG_VERIFIED
    # at (1,0) only one step is visible and its image is 2Z/4
    assert done.cell((1, 0)) == PGroup(2, 0, (1,))
    assert done.flag((1, 0)) == FLAG_BOUNDARY
    # at (0,0) nothing is visible and the cell passes through untouched
    assert done.cell((0, 0)) == PGroup(2, 0, (2,))
    assert done.flag((0, 0)) == FLAG_BOUNDARY
    assert COMPLETION_CAVEAT in done.caveats


def test_complete_flags_actions_that_do_not_descend() -> None:
    two = PGroup(2, 0, (1, 1))
    cells = {BiDegree(k, 0): two for k in range(3)}
    step = [[1, 0], [0, 0]]
    actions = {
        ("x", BiDegree(0, 0)): PHom(two, two, step),
        ("x", BiDegree(1, 0)): PHom(two, two, step),
        ("y", BiDegree(1, 0)): PHom(two, two, [[0, 0], [1, 0]]),
    }
    module = BigradedModule(
        2, Window(0, 2, 0, 0), cells, actions, {"x": BiDegree(1, 0), "y": BiDegree(1, 0)}
    )
    done = complete(module, Multiplier("x", BiDegree(1, 0)))
    assert done.cell((1, 0)) == PGroup(2, 0, (1,))
    assert done.cell((2, 0)) == PGroup(2, 0, (1,))
    # y sends the visible x-image off itself, so no quotient map descends
    assert done.flag((1, 0)) == FLAG_BOUNDARY
    assert ("y", BiDegree(1, 0)) not in done.actions


def test_complete_of_the_zero_module_is_zero() -> None:
    module = BigradedModule(2, Window(-2, 2, -2, 2), {}, {}, {"s": BiDegree(1, 0)})
    assert not complete(module, S).cells


def test_invert_then_complete_kills_band_modules() -> None:
    # s vanishes past the support band, and the window is wide enough to
    # see that, so localizing after completing leaves nothing
    module = chain_module([PGroup(2, 0, (1,))] * 3 + [PGroup(2, 0)], [[[1]], [[1]], []])
    done = complete(module, S)
    assert not invert(done, S).cells


def test_inverted_preset_obeys_the_support_law() -> None:
    core = Window(-4, 4, -4, 4)
    inv = restrict(invert(padded_expansion("hf2", 2, core), "rho"), core)
    assert inv.cell((1, 0)) == PGroup(2, 0, (1,))
    for d in core.cells():
        expected = d.i >= d.j
        assert (not inv.cell(d).is_zero()) == expected, d
        if expected:
            assert inv.flag(d) == FLAG_VERIFIED, d


def test_inverted_preset_order_bound_at_full_depth() -> None:
    module = expand(preset_presentation("hz2"), Window(-6, 6, -6, 6))
    K = default_steps(module.window)
    inv = invert(module, "rho")
    delta = BiDegree(-1, -1).scaled(K)
    for d in module.window.cells():
        far = d + delta
        if not module.window.contains(far):
            continue
        got, ref = inv.cell(d), module.cell(far)
        assert got.rank <= ref.rank
        if ref.rank == 0:
            assert got.rank == 0 and sum(got.torsion) <= sum(ref.torsion)


def test_inverting_rho_kills_odd_primary_presets() -> None:
    core = Window(-4, 4, -4, 4)
    inv = restrict(invert(padded_expansion("hfp_odd", 3, core), "rho"), core)
    assert not inv.cells


def test_completion_fixes_rho_complete_presets() -> None:
    core = Window(-4, 4, -4, 4)
    for name, prime in [("hf2", 2), ("hfp_odd", 3)]:
        big = padded_expansion(name, prime, core)
        done = restrict(complete(big, "rho"), core)
        expected = expand(preset_presentation(name, prime), core)
        assert cellwise_equal(done, expected)
        for d in done.cells:
            assert done.flag(d) == FLAG_VERIFIED, (name, d)
    assert act(done, "tau2", (0, 0)).entries == ((1,),)


def test_multiplier_acts_invertibly_between_verified_cells() -> None:
    core = Window(-4, 4, -4, 4)
    inv = invert(padded_expansion("hz2", 2, core), "rho")
    checked = 0
    for d in core.cells():
        t = d + BiDegree(-1, -1)
        if inv.flag(d) == inv.flag(t) == FLAG_VERIFIED and not inv.cell(d).is_zero():
            assert is_isomorphism(act(inv, "rho", d)), d
            checked += 1
    assert checked > 20
