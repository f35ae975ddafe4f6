"""Fixed-communication point-to-point protocol simulator.

Protocols run in synchronous rounds over secure pairwise channels declared up
front; the set of used channels never depends on inputs or randomness
(obliviousness), which the engine enforces.  Executions capture the full
ordered transcript and per-party randomness, so coalition views can be
extracted exactly and small protocols can be audited by exhaustive
enumeration over the parties' finite tapes.

Also provides the compiler that reroutes any such protocol through an
untrusted curator (one extra round), additive secret sharing over a prime
field, and three concrete protocols: star-topology randomized response,
Gaussian-noise submission to an ideal aggregator, and the 3-round secret
shared windowed-minimum protocol.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Any, Dict, FrozenSet, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .core import Bits, as_bits
from .local_model import Curator, CuratorView, InteractiveParty, run_interactive, enumerate_interactive
from .mechanisms import flip_bias_for
from . import local_model

__all__ = [
    "Message",
    "Topology",
    "PartyClassification",
    "classify",
    "random_topology",
    "star_topology",
    "complete_topology",
    "ObliviousnessViolationError",
    "Protocol",
    "Execution",
    "run_protocol",
    "run_protocol_with_tapes",
    "enumerate_executions",
    "output_distribution",
    "consistent_probability",
    "CoalitionView",
    "coalition_view",
    "coalition_view_distribution",
    "CompiledLocalProtocol",
    "compile_to_local",
    "RRStarProtocol",
    "randomized_response_distributed",
    "gaussian_aggregator_sum",
    "gaussian_noise_variance",
    "ShareParams",
    "ShareVector",
    "DEFAULT_MODULUS",
    "fixed_point_scale",
    "additive_share",
    "reconstruct",
    "windowed_min_protocol",
    "windowed_min_sizes",
    "noise_base_variance",
    "message_count",
    "round_count",
    "execution_records",
    "write_execution",
    "read_execution_records",
]


class Message(NamedTuple):
    """One transcript record: who sent what to whom, and when."""

    round: int
    sender: int
    receiver: int
    symbol: Any


class ObliviousnessViolationError(RuntimeError):
    """A run used an undeclared channel, or skipped a declared one."""


def _norm_pair(a: int, b: int) -> Tuple[int, int]:
    if a == b:
        raise ValueError("channels must connect distinct parties")
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class Topology:
    """Party count and the fixed set of usable pairwise channels."""

    n: int
    channels: FrozenSet[Tuple[int, int]]

    def __post_init__(self):
        norm = frozenset(_norm_pair(a, b) for a, b in self.channels)
        object.__setattr__(self, "channels", norm)
        for a, b in norm:
            if not (0 <= a < self.n and 0 <= b < self.n):
                raise ValueError(f"channel ({a},{b}) out of range for n={self.n}")

    def degree(self, i: int) -> int:
        return sum(1 for a, b in self.channels if i in (a, b))


def star_topology(n: int, center: int = 0) -> Topology:
    return Topology(n, frozenset(_norm_pair(center, i) for i in range(n) if i != center))


def complete_topology(n: int) -> Topology:
    return Topology(n, frozenset((i, j) for i in range(n) for j in range(i + 1, n)))


def random_topology(n: int, n_channels: int, rng: np.random.Generator) -> Topology:
    """Uniformly random topology with exactly ``n_channels`` distinct channels."""
    max_channels = n * (n - 1) // 2
    if not 0 <= n_channels <= max_channels:
        raise ValueError("channel count out of range")
    idx = rng.choice(max_channels, size=n_channels, replace=False)
    pairs = []
    for k in np.sort(idx):
        # unrank k into the (i, j) pair, i < j, listed row by row
        i = int((2 * n - 1 - math.sqrt((2 * n - 1) ** 2 - 8 * k)) // 2)
        j = int(k - i * (2 * n - i - 1) // 2 + i + 1)
        pairs.append((i, j))
    return Topology(n, frozenset(pairs))


@dataclass(frozen=True)
class PartyClassification:
    """Partition of parties by degree: popular (>= t+1 channels) vs lonely."""

    popular: FrozenSet[int]
    lonely: FrozenSet[int]


def classify(topology: Topology, t: int) -> PartyClassification:
    """Split parties into popular (degree >= t+1) and lonely (degree <= t)."""
    if not 0 <= t <= topology.n - 1:
        raise ValueError("t must lie in [0, n-1]")
    degrees = [0] * topology.n
    for a, b in topology.channels:
        degrees[a] += 1
        degrees[b] += 1
    popular = frozenset(i for i, d in enumerate(degrees) if d >= t + 1)
    lonely = frozenset(range(topology.n)) - popular
    return PartyClassification(popular=popular, lonely=lonely)


# ---------------------------------------------------------------------------
# Generic synchronous engine
# ---------------------------------------------------------------------------


class Protocol:
    """Base class for fixed-communication synchronous protocols.

    Subclasses fix ``n`` and ``rounds``, declare their channels, and define
    per-party behaviour through ``send``.  A party's behaviour must be a
    deterministic function of (party, input bit, tape, round, messages
    received in earlier rounds); all randomness lives in the tape, drawn
    once before round one.  ``received`` is a tuple with one entry per
    completed round, each a tuple of (sender, symbol) pairs sorted by
    sender.

    The protocol output must be computable from the output party's own
    view, so the curator compiler can have that party announce it.
    """

    name: str = "protocol"
    n: int = 0
    rounds: int = 0
    output_party: int = 0

    def channels(self) -> FrozenSet[Tuple[int, int]]:
        raise NotImplementedError

    def draw_tape(self, i: int, rng: np.random.Generator) -> Any:
        return None

    def tape_space(self, i: int) -> Optional[List[Tuple[Any, float]]]:
        """Finite (tape, probability) list for party ``i``, if enumerable."""
        return None

    def send(
        self, i: int, x_i: int, tape: Any, rnd: int, received: Tuple[Tuple, ...]
    ) -> Dict[int, Any]:
        raise NotImplementedError

    def output(self, x_i: int, tape: Any, received: Tuple[Tuple, ...]) -> Any:
        raise NotImplementedError


@dataclass(frozen=True)
class Execution:
    """Complete record of one protocol run.

    ``transcript`` is ordered by (round, sender, receiver); ``tapes`` holds
    each party's random tape, so the run can be replayed deterministically.
    Lean runs (``record=False``) drop both but keep exact message counts.
    """

    protocol: str
    n: int
    rounds: int
    inputs: Tuple[int, ...]
    output: Any
    n_messages: int
    transcript: Optional[Tuple[Message, ...]] = None
    tapes: Optional[Tuple[Any, ...]] = None

    def transcript_key(self) -> Tuple:
        if self.transcript is None:
            raise ValueError("execution was run without transcript recording")
        return tuple(self.transcript)


def message_count(e: Execution) -> int:
    """Number of point-to-point records in the execution."""
    return e.n_messages


def round_count(e: Execution) -> int:
    return e.rounds


def run_protocol_with_tapes(
    protocol: Protocol,
    topology: Topology,
    x: Bits,
    tapes: Sequence[Any],
    record: bool = True,
) -> Execution:
    """Deterministic synchronous execution with all tapes fixed."""
    bits = as_bits(x)
    n = protocol.n
    if bits.size != n or topology.n != n:
        raise ValueError("protocol, topology, and input sizes must agree")
    declared = protocol.channels()
    if not declared <= topology.channels:
        raise ValueError("protocol uses channels missing from the topology")

    received: List[List[Tuple[Tuple[int, Any], ...]]] = [[] for _ in range(n)]
    transcript: List[Message] = []
    used: set = set()
    n_messages = 0
    for rnd in range(1, protocol.rounds + 1):
        round_sends: List[Tuple[int, int, Any]] = []
        for i in range(n):
            sends = protocol.send(i, int(bits[i]), tapes[i], rnd, tuple(received[i]))
            for receiver in sorted(sends):
                pair = _norm_pair(i, receiver)
                if pair not in declared:
                    raise ObliviousnessViolationError(
                        f"round {rnd}: undeclared channel {i}->{receiver}"
                    )
                used.add(pair)
                round_sends.append((i, receiver, sends[receiver]))
        inboxes: List[List[Tuple[int, Any]]] = [[] for _ in range(n)]
        for sender, receiver, symbol in round_sends:
            inboxes[receiver].append((sender, symbol))
            n_messages += 1
            if record:
                transcript.append(Message(rnd, sender, receiver, symbol))
        for i in range(n):
            received[i].append(tuple(inboxes[i]))
    if used != declared:
        missing = sorted(declared - used)
        raise ObliviousnessViolationError(f"declared channels never used: {missing}")
    p = protocol.output_party
    output = protocol.output(int(bits[p]), tapes[p], tuple(received[p]))
    return Execution(
        protocol=protocol.name,
        n=n,
        rounds=protocol.rounds,
        inputs=tuple(int(b) for b in bits),
        output=output,
        n_messages=n_messages,
        transcript=tuple(transcript) if record else None,
        tapes=tuple(tapes) if record else None,
    )


def run_protocol(
    protocol: Protocol,
    topology: Topology,
    x: Bits,
    rng: np.random.Generator,
    record: bool = True,
) -> Execution:
    """Run a protocol with fresh tapes drawn from ``rng``."""
    tapes = [protocol.draw_tape(i, rng) for i in range(protocol.n)]
    return run_protocol_with_tapes(protocol, topology, x, tapes, record=record)


def _enumerate_runs(protocol: Protocol, topology: Topology, x: Bits):
    """Yield (probability, execution) over all joint tape assignments."""
    spaces = []
    for i in range(protocol.n):
        space = protocol.tape_space(i)
        if space is None:
            raise ValueError(f"party {i} has no finite tape space")
        spaces.append(space)
    for combo in itertools.product(*spaces):
        prob = 1.0
        for _, p in combo:
            prob *= p
        if prob == 0.0:
            continue
        tapes = [tape for tape, _ in combo]
        yield prob, run_protocol_with_tapes(protocol, topology, x, tapes)


def enumerate_executions(protocol: Protocol, topology: Topology, x: Bits) -> Dict[Tuple, float]:
    """Exact transcript distribution: ``{transcript_key: probability}``.

    Requires finite tape spaces for every party.  Tapes that influence
    only the output, not the messages, collapse into the same transcript,
    so outputs are enumerated separately by ``output_distribution``.
    """
    out: Dict[Tuple, float] = {}
    for prob, e in _enumerate_runs(protocol, topology, x):
        key = e.transcript_key()
        out[key] = out.get(key, 0.0) + prob
    return out


def output_distribution(protocol: Protocol, topology: Topology, x: Bits) -> Dict[Any, float]:
    """Exact distribution of the protocol output, by tape enumeration."""
    out: Dict[Any, float] = {}
    for prob, e in _enumerate_runs(protocol, topology, x):
        out[e.output] = out.get(e.output, 0.0) + prob
    return out


def consistent_probability(
    protocol: Protocol, i: int, x_i: int, transcript: Sequence[Message]
) -> float:
    """Probability that party ``i`` sends exactly as in a fixed transcript.

    The party is replayed against the messages the transcript delivers to
    it; tape probabilities are summed over tapes whose sends match the
    transcript in every round.
    """
    space = protocol.tape_space(i)
    if space is None:
        raise ValueError(f"party {i} has no finite tape space")
    recv_by_round: List[List[Tuple[int, Any]]] = [[] for _ in range(protocol.rounds)]
    sent_by_round: List[Dict[int, Any]] = [dict() for _ in range(protocol.rounds)]
    for m in transcript:
        if m.receiver == i:
            recv_by_round[m.round - 1].append((m.sender, m.symbol))
        if m.sender == i:
            sent_by_round[m.round - 1][m.receiver] = m.symbol
    recv = tuple(tuple(sorted(r)) for r in recv_by_round)
    total = 0.0
    for tape, prob in space:
        if prob == 0.0:
            continue
        ok = True
        for rnd in range(1, protocol.rounds + 1):
            sends = protocol.send(i, x_i, tape, rnd, recv[: rnd - 1])
            if sends != sent_by_round[rnd - 1]:
                ok = False
                break
        if ok:
            total += prob
    return total


# ---------------------------------------------------------------------------
# Coalition views
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoalitionView:
    """What a party subset jointly sees: inputs, tapes, received messages."""

    coalition: Tuple[int, ...]
    inputs: Tuple[int, ...]
    tapes: Tuple[Any, ...]
    received: Tuple[Message, ...]

    def key(self) -> Tuple:
        return (self.coalition, self.inputs, self.tapes, self.received)


def coalition_view(e: Execution, coalition: Iterable[int]) -> CoalitionView:
    """Extract the view of a coalition from a recorded execution."""
    members = tuple(sorted(set(int(i) for i in coalition)))
    for i in members:
        if not 0 <= i < e.n:
            raise ValueError(f"party {i} out of range")
    if e.transcript is None or e.tapes is None:
        raise ValueError("coalition views require a recorded execution")
    member_set = set(members)
    received = tuple(m for m in e.transcript if m.receiver in member_set)
    return CoalitionView(
        coalition=members,
        inputs=tuple(e.inputs[i] for i in members),
        tapes=tuple(e.tapes[i] for i in members),
        received=received,
    )


def coalition_view_distribution(
    protocol: Protocol, topology: Topology, x: Bits, coalition: Iterable[int]
) -> Dict[Tuple, float]:
    """Exact distribution over coalition views, by tape enumeration."""
    members = tuple(sorted(set(int(i) for i in coalition)))
    spaces = []
    for i in range(protocol.n):
        space = protocol.tape_space(i)
        if space is None:
            raise ValueError(f"party {i} has no finite tape space")
        spaces.append(space)
    out: Dict[Tuple, float] = {}
    for combo in itertools.product(*spaces):
        prob = 1.0
        for _, p in combo:
            prob *= p
        if prob == 0.0:
            continue
        tapes = [tape for tape, _ in combo]
        e = run_protocol_with_tapes(protocol, topology, x, tapes)
        key = coalition_view(e, members).key()
        out[key] = out.get(key, 0.0) + prob
    return out


# ---------------------------------------------------------------------------
# Compiler: distributed -> local interactive
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CompiledLocalProtocol:
    """A point-to-point protocol rerouted through the curator.

    Every message from p_j to p_k in round i travels p_j -> curator in
    round i and curator -> p_k in the first phase of round i+1; in the
    extra final round the output party reports the protocol output to the
    curator.  The curator's view therefore contains every message, and the
    output distribution is unchanged for every input.
    """

    parties: Tuple[InteractiveParty, ...]
    curator: Curator
    rounds: int
    n: int

    def run(self, x: Bits, rng: np.random.Generator):
        return run_interactive(self.parties, self.curator, x, self.rounds, rng)

    def enumerate(self, x: Bits):
        return enumerate_interactive(self.parties, self.curator, x, self.rounds)

    def output_distribution(self, x: Bits) -> Dict[Any, float]:
        dist: Dict[Any, float] = {}
        for _, (prob, output) in self.enumerate(x).items():
            dist[output] = dist.get(output, 0.0) + prob
        return dist


def compile_to_local(protocol: Protocol, topology: Topology) -> CompiledLocalProtocol:
    """Compile an oblivious protocol into a curator-mediated local protocol.

    The result runs in ``protocol.rounds + 1`` rounds.  Party answers in
    round j are their original round-j sends as a ((receiver, symbol), ...)
    tuple; curator queries in round j deliver the round-(j-1) messages as a
    ((sender, symbol), ...) tuple.  In the last round only the output party
    answers, with ("output", value).
    """
    declared = protocol.channels()
    if not declared <= topology.channels:
        raise ValueError("protocol uses channels missing from the topology")
    n = protocol.n
    ell = protocol.rounds
    out_party = protocol.output_party

    def make_party(i: int) -> InteractiveParty:
        def answer(x_i: int, queries: Tuple[Any, ...], tape: Any) -> Any:
            j = len(queries)
            # queries[r] holds the original round-r deliveries (queries[0]
            # is the empty kick-off), so earlier-round receipts are
            # queries[1:j].
            received = tuple(queries[1:j])
            if j <= ell:
                sends = protocol.send(i, x_i, tape, j, received)
                return tuple(sorted(sends.items()))
            if i == out_party:
                return ("output", protocol.output(x_i, tape, received))
            return ()

        return InteractiveParty(
            answer=answer,
            draw_tape=lambda rng, i=i: protocol.draw_tape(i, rng),
            tape_space=(
                (lambda i=i: protocol.tape_space(i))
                if protocol.tape_space(i) is not None
                else None
            ),
        )

    def query(j: int, answer_hist: Tuple[Any, ...]) -> Sequence[Any]:
        if j == 1:
            return ((),) * n
        inboxes: List[List[Tuple[int, Any]]] = [[] for _ in range(n)]
        for sender, sent in enumerate(answer_hist[j - 2]):
            for receiver, symbol in sent:
                inboxes[receiver].append((sender, symbol))
        return tuple(tuple(sorted(box)) for box in inboxes)

    def output(view: CuratorView) -> Any:
        tag, value = view.answers[-1][out_party]
        assert tag == "output"
        return value

    parties = tuple(make_party(i) for i in range(n))
    return CompiledLocalProtocol(
        parties=parties, curator=Curator(query=query, output=output), rounds=ell + 1, n=n
    )


# ---------------------------------------------------------------------------
# Randomized response on a star topology
# ---------------------------------------------------------------------------


class RRStarProtocol(Protocol):
    """Randomized response with party 0 playing the curator's role.

    Round 1: every other party sends its flipped bit to party 0 (party 0
    flips its own bit locally).  Round 2: party 0 debiases the count and
    sends the estimate to everyone, for 2(n-1) messages in total.
    """

    def __init__(self, n: int, eps: float):
        if n < 1:
            raise ValueError("need at least one party")
        self.n = n
        self.rounds = 2
        self.eps = eps
        self.params = flip_bias_for(eps)
        self.name = f"rr-star(n={n},eps={eps:g})"

    def channels(self) -> FrozenSet[Tuple[int, int]]:
        return frozenset((0, i) for i in range(1, self.n))

    def draw_tape(self, i: int, rng: np.random.Generator) -> bool:
        return bool(rng.random() < self.params.keep_prob)

    def tape_space(self, i: int) -> List[Tuple[bool, float]]:
        keep = self.params.keep_prob
        return [(True, keep), (False, 1.0 - keep)]

    def _report(self, x_i: int, keep: bool) -> int:
        return int(x_i) if keep else 1 - int(x_i)

    def _estimate(self, x_0: int, tape_0: bool, received: Tuple[Tuple, ...]) -> float:
        count = self._report(x_0, tape_0) + sum(sym for _, sym in received[0])
        return local_model.rr_debias(float(count), self.n, self.params)

    def send(
        self, i: int, x_i: int, tape: bool, rnd: int, received: Tuple[Tuple, ...]
    ) -> Dict[int, Any]:
        if rnd == 1:
            return {} if i == 0 else {0: self._report(x_i, tape)}
        if i == 0:
            estimate = self._estimate(x_i, tape, received)
            return {j: estimate for j in range(1, self.n)}
        return {}

    def output(self, x_i: int, tape: bool, received: Tuple[Tuple, ...]) -> float:
        return self._estimate(x_i, tape, received)


def randomized_response_distributed(
    x: Bits, eps: float, rng: np.random.Generator, record: bool = True
) -> Execution:
    """Run the star-topology randomized-response protocol."""
    bits = as_bits(x)
    protocol = RRStarProtocol(bits.size, eps)
    return run_protocol(protocol, star_topology(bits.size), bits, rng, record=record)


# ---------------------------------------------------------------------------
# Gaussian submissions to an ideal aggregator
# ---------------------------------------------------------------------------


def gaussian_noise_variance(n: int, eps: float) -> float:
    """Per-party noise variance 6 ln^2(n) / (n eps^2)."""
    return 6.0 * math.log(n) ** 2 / (n * eps * eps)


def gaussian_aggregator_sum(
    x: Bits,
    eps: float,
    rng: np.random.Generator,
    t: Optional[int] = None,
    zero_noise: bool = False,
    record: bool = True,
) -> Tuple[float, Execution]:
    """Sum protocol where each party submits a Gaussian-noised bit.

    Party 0 acts as an ideal aggregator standing in for the
    threshold-decryption machinery: coalition views expose only each
    party's submitted noisy value, never the raw bit.  Per-party noise is
    N(0, 6 ln^2(n)/(n eps^2)), so the total noise on the estimate has
    variance 6 ln^2(n)/eps^2, and removing any n/2 parties' own noise
    still leaves half that.
    """
    bits = as_bits(x)
    n = bits.size
    if n < 2:
        raise ValueError("need at least two parties")
    if eps <= 0:
        raise ValueError("eps must be positive")
    if t is None:
        t = n // 2
    if zero_noise:
        noise = np.zeros(n)
    else:
        noise = rng.normal(0.0, math.sqrt(gaussian_noise_variance(n, eps)), n)
    y = bits + noise
    estimate = float(y.sum())
    transcript = None
    tapes = None
    if record:
        records = [Message(1, i, 0, float(y[i])) for i in range(1, n)]
        records += [Message(2, 0, i, estimate) for i in range(1, n)]
        transcript = tuple(records)
        tapes = tuple(float(v) for v in noise)
    e = Execution(
        protocol=f"gaussian-aggregator(n={n},eps={eps:g},t={t})",
        n=n,
        rounds=2,
        inputs=tuple(int(b) for b in bits),
        output=estimate,
        n_messages=2 * (n - 1),
        transcript=transcript,
        tapes=tapes,
    )
    return estimate, e


# ---------------------------------------------------------------------------
# Additive secret sharing over a prime field
# ---------------------------------------------------------------------------

# Smallest prime above 2^63; fits in uint64 with wrap-aware addition.
DEFAULT_MODULUS = 9223372036854775837


def fixed_point_scale(n: int) -> int:
    """Decimal fixed-point scale, one digit per decimal digit of n."""
    if n < 1:
        raise ValueError("n must be positive")
    return 10 ** math.ceil(math.log10(n)) if n > 1 else 10


@dataclass(frozen=True)
class ShareParams:
    """Field modulus and fixed-point scale for additive sharing."""

    modulus: int = DEFAULT_MODULUS
    scale: int = 1

    def __post_init__(self):
        if self.modulus < 3:
            raise ValueError("modulus must be at least 3")
        if self.scale < 1:
            raise ValueError("scale must be positive")

    def encode(self, value: float) -> int:
        k = round(value * self.scale)
        if abs(k) > (self.modulus - 1) // 2:
            raise ValueError(f"value {value} overflows the modulus range")
        return k % self.modulus

    def decode(self, residue: int) -> float:
        residue %= self.modulus
        if residue > self.modulus // 2:
            residue -= self.modulus
        return residue / self.scale


@dataclass(frozen=True)
class ShareVector:
    """Additive shares of one fixed-point value; all shares reconstruct it."""

    shares: Tuple[int, ...]
    params: ShareParams

    def __len__(self) -> int:
        return len(self.shares)


def additive_share(
    value: float, parts: int, params: ShareParams, rng: np.random.Generator
) -> ShareVector:
    """Split a value into ``parts`` additive shares mod the field prime.

    Any proper subset of shares is uniformly distributed independently of
    the value; only the full set reconstructs it.
    """
    if parts < 1:
        raise ValueError("parts must be at least 1")
    q = params.modulus
    target = params.encode(value)
    head = [int(v) for v in rng.integers(0, q, size=parts - 1, dtype=np.uint64)]
    last = (target - sum(head)) % q
    return ShareVector(shares=tuple(head + [last]), params=params)


def reconstruct(sv: ShareVector) -> float:
    """Recover the fixed-point value from all shares."""
    return sv.params.decode(sum(sv.shares) % sv.params.modulus)


# uint64 helpers: q slightly exceeds 2^63, so a+b can wrap past 2^64; the
# wrap is detected (sum < addend) and compensated by adding 2^64 - q.
_Q64 = np.uint64(DEFAULT_MODULUS)
_WRAP64 = np.uint64(2**64 - DEFAULT_MODULUS)


def _add_mod_q(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    s = a + b
    return np.where(s < a, s + _WRAP64, np.where(s >= _Q64, s - _Q64, s))


def _encode_mod_q(k: np.ndarray) -> np.ndarray:
    """Signed int64 values to field residues (|k| must be < q/2)."""
    k = np.asarray(k, dtype=np.int64)
    if np.any(np.abs(k) > (DEFAULT_MODULUS - 1) // 2):
        raise ValueError("value overflows the modulus range")
    neg = k < 0
    return np.where(neg, _Q64 - (-k).astype(np.uint64), k.astype(np.uint64))


def _decode_mod_q(r: np.ndarray) -> np.ndarray:
    """Field residues to signed int64 (centered representative)."""
    r = np.asarray(r, dtype=np.uint64)
    high = r > np.uint64(DEFAULT_MODULUS // 2)
    return np.where(high, -((_Q64 - r).astype(np.int64)), r.astype(np.int64))


# ---------------------------------------------------------------------------
# Secret-shared windowed minimum (3 rounds)
# ---------------------------------------------------------------------------


def noise_base_variance(eps: float, delta: float) -> float:
    """The quantity R = 2 ln(2/delta) / eps^2 calibrating the Gaussian noise."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    return 2.0 * math.log(2.0 / delta) / (eps * eps)


def windowed_min_sizes(n: int, alpha_exp: float) -> Tuple[int, int]:
    """Window length n^alpha_exp and interval length n^(alpha_exp/3).

    Both must be integers, the interval must divide both n and the window;
    otherwise the instance is rejected.
    """
    if not 0.0 < alpha_exp < 1.0:
        raise ValueError("alpha_exp must lie in (0, 1)")
    window_f = n**alpha_exp
    interval_f = n ** (alpha_exp / 3.0)
    window, interval = round(window_f), round(interval_f)
    if abs(window_f - window) > 1e-9 * window or abs(interval_f - interval) > 1e-9 * interval:
        raise ValueError(
            f"n={n}, alpha_exp={alpha_exp} gives non-integral window/interval sizes"
        )
    if n % interval != 0 or window % interval != 0:
        raise ValueError("interval must divide both n and the window")
    return window, interval


def windowed_min_protocol(
    x: Bits,
    eps: float,
    delta: float,
    t: int,
    alpha_exp: float,
    rng: np.random.Generator,
    zero_noise: bool = False,
    record: bool = True,
) -> Tuple[float, Execution]:
    """3-round secret-shared protocol for the minimum window weight.

    Round 1: party i draws Gaussian noise Y_i ~ N(0, 2R/n) with
    R = 2 ln(2/delta)/eps^2, and additively shares the fixed-point rounding
    of x_i + Y_i among the t+1 aggregator parties 0..t (no self-message for
    its own share).  Round 2: every aggregator sums its shares within each
    interval and sends the per-interval sums to party 0.  Round 3: party 0
    reconstructs each interval total, takes the minimum window sum over
    interval-aligned window starts, and announces it.

    With zero_noise the estimate equals the gridded window minimum exactly.
    """
    bits = as_bits(x)
    n = bits.size
    if t < 0 or 2 * t >= n:
        raise ValueError("need 0 <= t and 2t < n")
    window, interval = windowed_min_sizes(n, alpha_exp)
    n_intervals = n // interval
    per_window = window // interval
    r_base = noise_base_variance(eps, delta)
    params = ShareParams(modulus=DEFAULT_MODULUS, scale=fixed_point_scale(n))

    if zero_noise:
        noisy = bits.astype(float)
    else:
        noisy = bits + rng.normal(0.0, math.sqrt(2.0 * r_base / n), n)
    scaled = _encode_mod_q(np.rint(noisy * params.scale).astype(np.int64))

    # shares[i, j] = share of party i's value held by aggregator j
    shares = np.empty((n, t + 1), dtype=np.uint64)
    if t > 0:
        shares[:, :t] = rng.integers(0, DEFAULT_MODULUS, size=(n, t), dtype=np.uint64)
        acc = shares[:, 0]
        for j in range(1, t):
            acc = _add_mod_q(acc, shares[:, j])
        # closing share: scaled - acc mod q
        neg = np.where(acc == 0, np.uint64(0), _Q64 - acc)
        shares[:, t] = _add_mod_q(scaled, neg)
    else:
        shares[:, 0] = scaled

    # per-aggregator, per-interval share sums
    grouped = shares.reshape(n_intervals, interval, t + 1)
    agg = grouped[:, 0, :]
    for k in range(1, interval):
        agg = _add_mod_q(agg, grouped[:, k, :])
    totals = agg[:, 0]
    for j in range(1, t + 1):
        totals = _add_mod_q(totals, agg[:, j])
    interval_sums = _decode_mod_q(totals).astype(float) / params.scale

    window_sums = np.convolve(interval_sums, np.ones(per_window), mode="valid")
    estimate = float(window_sums.min())
    if zero_noise:
        estimate = float(int(round(estimate)))

    n_messages = (t + 1) * (n - 1) + t * n_intervals + (n - 1)
    transcript = None
    tapes = None
    if record:
        records = []
        for i in range(n):
            for j in range(t + 1):
                if j != i:
                    records.append(Message(1, i, j, int(shares[i, j])))
        for j in range(1, t + 1):
            for m in range(n_intervals):
                records.append(Message(2, j, 0, int(agg[m, j])))
        for i in range(1, n):
            records.append(Message(3, 0, i, estimate))
        transcript = tuple(records)
        tapes = tuple(
            (float(noisy[i] - bits[i]), tuple(int(s) for s in shares[i])) for i in range(n)
        )
        assert len(records) == n_messages
    e = Execution(
        protocol=f"windowed-min(n={n},eps={eps:g},delta={delta:g},t={t},alpha={alpha_exp:g})",
        n=n,
        rounds=3,
        inputs=tuple(int(b) for b in bits),
        output=estimate,
        n_messages=n_messages,
        transcript=transcript,
        tapes=tapes,
    )
    return estimate, e


# ---------------------------------------------------------------------------
# Execution serialization
# ---------------------------------------------------------------------------


def execution_records(e: Execution) -> List[str]:
    """Line-delimited transcript: ``round,sender,receiver,symbol`` per line.

    The symbol is JSON-encoded; field order is fixed as written.
    """
    if e.transcript is None:
        raise ValueError("execution was run without transcript recording")
    return [
        f"{m.round},{m.sender},{m.receiver},{json.dumps(m.symbol)}" for m in e.transcript
    ]


def write_execution(e: Execution, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for line in execution_records(e):
            fh.write(line + "\n")


def read_execution_records(path: str) -> List[Message]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rnd, sender, receiver, symbol = line.split(",", 3)
            out.append(Message(int(rnd), int(sender), int(receiver), json.loads(symbol)))
    return out
