"""Asymptotic key rates for conference, post-conference and independent keys.

A protocol is described by which modes travel through the channel, which
modes are homodyned and publicly disclosed beforehand (the conditioning), the
reference party and the other parties. Conditioning is applied to both the
classical correlations and the state used for Eve's Holevo bound, i.e. the
disclosed data is assumed known to Eve. Trusted squeezer noise is modelled by
purifying ancillas that stay with the legitimate parties.

Mode indices: GHZ-like and DAN use (A, B, C) = (0, 1, 2); the six-mode state
uses (a1, a2, b1, b2, c1, c2) = (0, ..., 5).
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .gaussian import (
    apply_lossy_channel,
    condition_on_homodyne,
    homodyne_differential_entropy,
    homodyne_mutual_information,
    n_modes_of,
    submatrix,
    von_neumann_entropy,
)
from .states import DAN, GHZ, SIX, SqueezerSpec, build_state, extend_with_trusted_ancillas

DR, RR, MID = "DR", "RR", "Mid"
SCHEMES = (DR, RR, MID)
CKA, POST_CKA, INDEPENDENT = "cka", "post_cka", "independent"
KEY_TYPES = (CKA, POST_CKA, INDEPENDENT)
REMOTE, DEALER = "remote", "dealer"

ELIMINATE_TOL = 1e-12

a1, a2, b1, b2, c1, c2 = range(6)
A, B, C = range(3)


@dataclass(frozen=True)
class Protocol:
    sent: tuple
    reference: tuple
    parties: tuple
    conditioning: tuple = ()


@dataclass(frozen=True)
class Estimation:
    """Modes kept (or occasionally kept) by the dealer and one user's modes, for channel estimation."""

    retained: tuple
    user: tuple
    # True when the retained modes are only kept in dedicated estimation rounds
    occasional: bool = False


# (state, distribution, scheme) -> conference protocol
_CKA = {
    (GHZ, None, DR): Protocol((B, C), (A,), ((B,), (C,))),
    (GHZ, None, RR): Protocol((B, C), (B,), ((A,), (C,))),
    (GHZ, None, MID): Protocol((A, B, C), (A,), ((B,), (C,))),
    (DAN, None, DR): Protocol((B, C), (A,), ((B,), (C,))),
    (DAN, None, RR): Protocol((B, C), (B,), ((A,), (C,))),
    (SIX, 1, DR): Protocol((b1, c1), (a1,), ((b1,), (c1,)), (a2,)),
    (SIX, 1, RR): Protocol((b1, c1), (b1,), ((a1,), (c1,)), (b2, a2, c2)),
    (SIX, 2, DR): Protocol((b1, b2, c1, c2), (a1,), ((b1, b2), (c1, c2)), (a2,)),
    (SIX, 2, RR): Protocol((b1, b2, c1, c2), (b1,), ((a1, a2), (c1, c2)), (b2,)),
    (SIX, 3, MID): Protocol((a1, b1, c1), (a1,), ((b1,), (c1,)), (a2, b2, c2)),
    (SIX, 4, MID): Protocol((a1, a2, b1, b2, c1, c2), (a1, a2), ((b1, b2), (c1, c2))),
}

# (state, distribution, scheme, post reference) -> bipartite key after the conference key
_POST = {
    (GHZ, None, DR, REMOTE): Protocol((B, C), (B,), ((C,),), (A,)),
    (SIX, 1, DR, REMOTE): Protocol((b1, c1), (b1,), ((c1,),), (a1, a2)),
    (SIX, 2, DR, REMOTE): Protocol((b1, b2, c1, c2), (b1, b2), ((c1, c2),), (a1, a2)),
    (GHZ, None, RR, DEALER): Protocol((B, C), (A,), ((C,),), (B,)),
    (SIX, 1, RR, DEALER): Protocol((b1, c1), (a1,), ((c1,),), (b2, a2, c2, b1)),
    (SIX, 2, RR, DEALER): Protocol((b1, b2, c1, c2), (a1, a2), ((c1, c2),), (b1, b2)),
    (GHZ, None, RR, REMOTE): Protocol((B, C), (C,), ((A,),), (B,)),
    (SIX, 1, RR, REMOTE): Protocol((b1, c1), (c1,), ((a1,),), (b2, a2, c2, b1)),
    (SIX, 2, RR, REMOTE): Protocol((b1, b2, c1, c2), (c1, c2), ((a1, a2),), (b1, b2)),
    (GHZ, None, MID, REMOTE): Protocol((A, B, C), (B,), ((C,),), (A,)),
    (SIX, 3, MID, REMOTE): Protocol((a1, b1, c1), (b1,), ((c1,),), (a2, b2, c2, a1)),
    (SIX, 4, MID, REMOTE): Protocol((a1, a2, b1, b2, c1, c2), (b1, b2), ((c1, c2),), (a1, a2)),
}

# Independent keys: reference is the users' joint data, parties[0] is the dealer.
_INDEPENDENT = {
    (DAN, None): Protocol((B, C), (B, C), ((A,),)),
    (SIX, 5): Protocol((b1, b2), (b1, b2), ((a1, a2, c1, c2),)),
}

_ESTIMATION = {
    (GHZ, None): Estimation((A,), (B,)),
    (DAN, None): Estimation((A,), (B,)),
    (SIX, 1): Estimation((a1, a2, b2, c2), (b1,)),
    (SIX, 2): Estimation((a1, a2), (b1, b2)),
    (SIX, 3): Estimation((a2, b2, c2), (b1,)),
    # nothing is retained during key rounds; estimation rounds keep user A's modes
    (SIX, 4): Estimation((a1, a2), (b1, b2), occasional=True),
    (SIX, 5): Estimation((a1, a2, c1, c2), (b1,)),
}

_PARTY_NAMES = {
    (GHZ, None, False): {"dealer": (A,), "B": (B,), "C": (C,)},
    (GHZ, None, True): {"dealer": (), "A": (A,), "B": (B,), "C": (C,)},
    (DAN, None, False): {"dealer": (A,), "B": (B,), "C": (C,)},
    (SIX, 1, False): {"dealer": (a1, a2, b2, c2), "B": (b1,), "C": (c1,)},
    (SIX, 2, False): {"dealer": (a1, a2), "B": (b1, b2), "C": (c1, c2)},
    (SIX, 3, False): {"dealer": (a2, b2, c2), "A": (a1,), "B": (b1,), "C": (c1,)},
    (SIX, 4, False): {"dealer": (), "A": (a1, a2), "B": (b1, b2), "C": (c1, c2)},
    (SIX, 5, False): {"dealer": (a1, a2, c1, c2), "B": (b1,), "C": (b2,)},
}


@dataclass(frozen=True)
class ScenarioSpec:
    """State kind, distribution, reconciliation scheme and key type.

    ``distribution`` is 1-5 for the six-mode state and None otherwise.
    ``post_reference`` picks the reference of a bipartite key after an RR
    conference key ('dealer' or 'remote'); other schemes use 'remote'.
    """

    state: str
    scheme: str = DR
    distribution: Optional[int] = None
    key: str = CKA
    beta: float = 1.0
    zeta: float = 1.0
    squeezer: SqueezerSpec = field(default_factory=lambda: SqueezerSpec(0.1))
    post_reference: str = REMOTE

    def __post_init__(self):
        if self.state not in (GHZ, DAN, SIX):
            raise ValueError(f"unknown state {self.state!r}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.key not in KEY_TYPES:
            raise ValueError(f"unknown key type {self.key!r}")
        if self.state == SIX and self.distribution not in (1, 2, 3, 4, 5):
            raise ValueError("the six-mode state needs a distribution in 1..5")
        if self.state != SIX and self.distribution is not None:
            raise ValueError("distributions 1-5 apply only to the six-mode state")
        if not 0.0 < self.beta <= 1.0:
            raise ValueError(f"beta must be in (0, 1], got {self.beta}")
        if self.zeta < 1.0:
            raise ValueError(f"zeta must be >= 1, got {self.zeta}")
        if self.zeta != 1.0 and self.key != INDEPENDENT:
            raise ValueError("zeta != 1 is only meaningful for independent keys")
        if self.post_reference not in (REMOTE, DEALER):
            raise ValueError(f"post_reference must be 'remote' or 'dealer', got {self.post_reference!r}")
        self.protocol()  # rejects combinations without a defined protocol

    def protocol(self):
        if self.key == CKA:
            table, k = _CKA, (self.state, self.distribution, self.scheme)
        elif self.key == POST_CKA:
            ref = self.post_reference if self.scheme == RR else REMOTE
            table, k = _POST, (self.state, self.distribution, self.scheme, ref)
        else:
            table, k = _INDEPENDENT, (self.state, self.distribution)
        if k not in table:
            raise ValueError(f"no {self.key} protocol for state={self.state}, "
                             f"distribution={self.distribution}, scheme={self.scheme}")
        return table[k]

    def estimation(self):
        est = _ESTIMATION[(self.state, self.distribution)]
        if self.state == GHZ and self.scheme == MID:
            return Estimation(est.retained, est.user, occasional=True)
        return est

    def replace(self, **changes):
        kw = {f: getattr(self, f) for f in self.__dataclass_fields__}
        kw.update(changes)
        return ScenarioSpec(**kw)


@dataclass(frozen=True)
class PartyAssignment:
    parties: dict
    transmitted: tuple
    ancillas: tuple


@dataclass(frozen=True)
class KeyRateResult:
    mutual_info: tuple
    holevo_bits: float
    rate_bits_per_use: float
    conditioning_modes: tuple
    per_user_bits: Optional[float] = None

    @property
    def mutual_info_bits(self):
        return min(self.mutual_info)


def assignment_for(scenario):
    """Which modes each party holds and which travel through the channel."""
    proto = scenario.protocol()
    mid = scenario.state == GHZ and scenario.scheme == MID
    parties = _PARTY_NAMES[(scenario.state, scenario.distribution, mid)]
    n_sys = 6 if scenario.state == SIX else 3
    _, mode_map = _prepared_state(scenario)
    anc = tuple(mode_map["ancilla"])
    assert len(mode_map["system"]) == n_sys
    return PartyAssignment(dict(parties), tuple(proto.sent), anc)


def _prepared_state(scenario):
    spec = scenario.squeezer
    if spec.V_N == 0.0:
        cm = build_state(scenario.state, spec)
        n = n_modes_of(cm)
        return cm, {"system": list(range(n)), "ancilla": []}
    return extend_with_trusted_ancillas(scenario.state, spec)


def _condition(sigma, labels, measured):
    """Condition on ``measured`` (original labels); returns (sigma, remaining labels)."""
    if not measured:
        return sigma, list(labels)
    pos = [labels.index(m) for m in measured]
    out = condition_on_homodyne(sigma, pos)
    return out, [m for m in labels if m not in set(measured)]


def _pos(labels, modes):
    return [labels.index(m) for m in modes]


def holevo_bound(sigma, reference, conditioning=(), modes=None):
    """Eve's information on the reference's x-homodyne data.

    ``chi = S(rho | conditioning) - S(rho | conditioning, reference)``, where
    rho is the legitimate system: all modes of ``sigma`` or only ``modes``
    when given (leaving some out hands their purification to Eve).
    """
    labels = list(range(n_modes_of(sigma)))
    if modes is not None:
        modes = list(modes)
        sigma = submatrix(sigma, modes)
        labels = modes
    if set(reference) & set(conditioning):
        raise ValueError("reference and conditioning modes must be disjoint")
    cond, lab = _condition(sigma, labels, list(conditioning))
    after, _ = _condition(cond, lab, list(reference))
    return von_neumann_entropy(cond) - von_neumann_entropy(after)


def protocol_rate(sigma, protocol, ch, beta=1.0):
    """``beta * min_j I(ref : j | cond) - chi_ref|cond`` on an explicit prepared state.

    ``sigma`` holds the system modes first; any further modes are trusted
    ancillas that never leave the dealer.
    """
    sigma = apply_lossy_channel(sigma, protocol.sent, ch)
    labels = list(range(n_modes_of(sigma)))
    cond, lab = _condition(sigma, labels, list(protocol.conditioning))
    ref = _pos(lab, protocol.reference)
    infos = tuple(homodyne_mutual_information(cond, ref, _pos(lab, p)) for p in protocol.parties)
    after, _ = _condition(cond, lab, list(protocol.reference))
    chi = von_neumann_entropy(cond) - von_neumann_entropy(after)
    return KeyRateResult(infos, chi, beta * min(infos) - chi, tuple(protocol.conditioning))


def conference_key_rate(scenario, ch):
    if scenario.key != CKA:
        scenario = scenario.replace(key=CKA)
    cm, _ = _prepared_state(scenario)
    return protocol_rate(cm, scenario.protocol(), ch, scenario.beta)


def bipartite_post_cka_rate(scenario, ch):
    if scenario.key != POST_CKA:
        scenario = scenario.replace(key=POST_CKA)
    cm, _ = _prepared_state(scenario)
    return protocol_rate(cm, scenario.protocol(), ch, scenario.beta)


def independent_rate(sigma, protocol, ch, zeta=1.0):
    """Sum of the dealer's independent keys with two users on an explicit state."""
    sigma = apply_lossy_channel(sigma, protocol.sent, ch)
    labels = list(range(n_modes_of(sigma)))
    users = _pos(labels, protocol.reference)
    dealer = _pos(labels, protocol.parties[0])
    h_users = homodyne_differential_entropy(sigma, users)
    given_dealer, lab = _condition(sigma, labels, list(protocol.parties[0]))
    h_cond = homodyne_differential_entropy(given_dealer, _pos(lab, protocol.reference))
    chi = holevo_bound(sigma, users)
    rate = h_users - zeta * h_cond - chi
    info = homodyne_mutual_information(sigma, dealer, users)
    return KeyRateResult((info,), chi, rate, (), per_user_bits=rate / 2.0)


def independent_bipartite_sum(scenario, ch):
    if scenario.key != INDEPENDENT:
        scenario = scenario.replace(key=INDEPENDENT)
    cm, _ = _prepared_state(scenario)
    return independent_rate(cm, scenario.protocol(), ch, scenario.zeta)


def key_rate(scenario, ch):
    """Dispatch on ``scenario.key``."""
    if scenario.key == CKA:
        return conference_key_rate(scenario, ch)
    if scenario.key == POST_CKA:
        return bipartite_post_cka_rate(scenario, ch)
    return independent_bipartite_sum(scenario, ch)


def conditional_correlation_classify(c1, c2, c3, v):
    """Effect of disclosing A on the B-C correlation.

    ``c1 = <AB>``, ``c2 = <AC>``, ``c3 = <BC>`` and ``v`` the common variance.
    Returns ``(value, cls)`` with ``value = c3 - c1 c2 / v`` and ``cls`` one of
    'eliminate', 'diminish' or 'enhance'.
    """
    if v <= 0:
        raise ValueError(f"variance must be positive, got {v}")
    shift = c1 * c2 / v
    value = c3 - shift
    if abs(value) <= ELIMINATE_TOL:
        return value, "eliminate"
    if np.sign(shift) == np.sign(c3) and abs(value) < abs(c3):
        return value, "diminish"
    return value, "enhance"
