"""Reference evaluations of the discrete neuron and plasticity updates.

The float functions are written directly from the recurrences and know
nothing about the interpreter.  :func:`ref_plasticity_fixed` is the one
exception: it repeats the fixed-point rounding of the hardware datapath so
that learning can be checked bit for bit.

States and parameters are plain dicts.  Neuron parameters use the names
``p0``..``p8``, ``c0``..``c2`` and ``v0``; plasticity parameters ``P0``..``P6``
and ``C0``..``C3``.  Missing entries count as zero.
"""

from __future__ import annotations

from .. import fixed

NEURON_STATE = ("v", "g", "I", "h", "v_adp", "v_th")
TRACES = ("x0", "y0", "y1", "r0")


def _p(params: dict, key: str) -> float:
    return params.get(key, 0.0)


def ref_adlif_step(state: dict, params: dict, I_in: float) -> dict:
    """One step of the adaptive LIF recurrence including threshold and reset.

    ``I_in`` is the input current of the new step.  Returns the next state
    with an extra boolean ``spike`` entry.
    """
    p = lambda k: _p(params, k)  # noqa: E731
    v, v_adp = state["v"], state.get("v_adp", 0.0)
    v_adp_n = p("p3") * v_adp + p("p4") * v + p("c1")
    v_n = p("p0") * v + p("p1") * I_in + p("p2") * v_adp_n + p("c0")
    spike = v_n > state["v_th"]
    if spike:
        v_n = p("v0")
        v_adp_n += p("c2")
    out = dict(state)
    out.update(v=v_n, v_adp=v_adp_n, I=I_in, spike=spike)
    return out


def ref_coba_step(state: dict, params: dict, spike_flag: int, w: float) -> dict:
    """Synaptic input, conductance and current, in that order.

    The current uses the new conductance and the membrane potential from
    before the step.
    """
    p = lambda k: _p(params, k)  # noqa: E731
    h = p("p8") * state["h"] + w * spike_flag
    g = p("p5") * state["g"] + p("p6") * h
    I = g * state["v"] + p("p7") * g
    out = dict(state)
    out.update(h=h, g=g, I=I)
    return out


def ref_coba_lif_step(state: dict, params: dict, drive: float) -> dict:
    """Conductance input followed by the LIF membrane update.

    ``drive`` is the summed weight arriving this step.
    """
    syn = ref_coba_step(state, params, 1, drive)
    return ref_adlif_step(syn, params, syn["I"]) | {"h": syn["h"], "g": syn["g"]}


def izhikevich_coefficients(a=0.02, b=0.2, c=-65.0, d=8.0, dt=1.0, scale=100.0) -> dict:
    """Recurrence coefficients for membrane and recovery measured in ``scale`` mV."""
    return {
        "p5": 0.04 * scale * dt,
        "c1": 1.0 + 5.0 * dt,
        "p1": dt,
        "p2": -dt,
        "c0": 140.0 * dt / scale,
        "p3": 1.0 - a * dt,
        "p4": a * b * dt,
        "c2": d / scale,
        "v0": c / scale,
    }


def ref_izhikevich_step(state: dict, params: dict, I_in: float) -> dict:
    """Two-variable quadratic recurrence.

    The membrane's self-coefficient is itself state dependent,
    ``p0 = p5*v + c1``, which produces the quadratic term.  The recovery
    variable is updated first from the old membrane potential.
    """
    p = lambda k: _p(params, k)  # noqa: E731
    v, u = state["v"], state.get("v_adp", 0.0)
    p0 = p("p5") * v + p("c1")
    u_n = p("p3") * u + p("p4") * v
    v_n = p0 * v + p("p1") * I_in + p("p2") * u_n + p("c0")
    spike = v_n > state["v_th"]
    if spike:
        v_n = p("v0")
        u_n += p("c2")
    out = dict(state)
    out.update(v=v_n, v_adp=u_n, I=I_in, spike=spike)
    return out


def ref_triplet_rstdp_step(traces: dict, params: dict, x2: int, y2: int, r2: float = 0.0,
                           ) -> tuple[dict, float]:
    """Trace updates followed by the three-term weight change.

    ``x2``/``y2`` flag pre- and postsynaptic spikes in this step and ``r2``
    is the reward signal.  The weight change reads the updated traces, so an
    event contributes in the step it happens.
    """
    P = lambda k: _p(params, k)  # noqa: E731
    x0 = P("P3") * traces["x0"] + P("C0") * x2
    y0 = P("P4") * traces["y0"] + P("C1") * y2
    y1 = P("P5") * traces["y1"] + P("C2") * y2
    r0 = P("P6") * traces["r0"] + P("C3") * r2
    dw = P("P0") * r0 * x0 * y2 + P("P1") * r0 * y0 * x2 + P("P2") * r0 * y1 * x2
    return {"x0": x0, "y0": y0, "y1": y1, "r0": r0}, dw


def ref_plasticity_fixed(traces: dict, params: dict, x2: int, y2: int, r2: int, w: int,
                         frac_bits: int = fixed.DEFAULT_FRAC_BITS, terms=(0, 1, 2),
                         update_reward: bool = True) -> tuple[dict, int]:
    """Same update on raw integers with the datapath's rounding.

    Each trace is ``sat(floor(P*trace) + floor(C*event))``.  A weight term is
    a product chain taken in register order (x0, x2, y0, y1, y2, r0), each
    step floored and saturated, then added to ``w`` with saturation.
    ``r2`` is the raw reward; ``x2``/``y2`` are 0/1 flags.  Returns
    ``(traces, new raw weight)``.
    """
    f = frac_bits
    one = 1 << f
    sat = fixed.saturate
    P = lambda k: int(params.get(k, 0))  # noqa: E731
    X2, Y2 = one * x2, one * y2
    x0 = sat((P("P3") * traces["x0"] >> f) + (P("C0") * X2 >> f))
    y0 = sat((P("P4") * traces["y0"] >> f) + (P("C1") * Y2 >> f))
    y1 = sat((P("P5") * traces["y1"] >> f) + (P("C2") * Y2 >> f))
    r0 = sat((P("P6") * traces["r0"] >> f) + (P("C3") * r2 >> f)) if update_reward else traces["r0"]

    def chain(rate, *factors):
        prod = rate
        for v in factors:
            prod = sat(prod * v >> f)
        return prod

    chains = {
        0: lambda: chain(P("P0"), x0, Y2, r0),
        1: lambda: chain(P("P1"), X2, y0, r0),
        2: lambda: chain(P("P2"), X2, y1, r0),
    }
    for t in terms:
        w = sat(w + chains[t]())
    return {"x0": x0, "y0": y0, "y1": y1, "r0": r0}, w


__all__ = [
    "izhikevich_coefficients",
    "ref_adlif_step",
    "ref_coba_lif_step",
    "ref_coba_step",
    "ref_izhikevich_step",
    "ref_plasticity_fixed",
    "ref_triplet_rstdp_step",
]
