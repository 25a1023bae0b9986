"""Behavioural reversal of step transition systems."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .algebra import ActionName, Multiset, noidx, reverse_step, sub_multisets
from .errors import CapExceeded, InvalidSystem, NotAHomeCover, NotCest
from .sts import (
    DEFAULT_SEQ_CAP,
    StepTransitionSystem,
    Witness,
    check_seq,
    is_home_cover,
    successor,
    validate_cest,
)

MODES = ("direct", "set", "mixed")


def _forward_alphabet(sts: StepTransitionSystem) -> list[ActionName]:
    bad = [a for a in sts.actions if not a.is_forward]
    if bad:
        raise InvalidSystem(f"only forward systems can be reversed; found {sorted(map(str, bad))}")
    return list(sts.actions)


def reverse(
    sts: StepTransitionSystem, mode: str = "direct", *, check: bool = True, cap: int = DEFAULT_SEQ_CAP
) -> StepTransitionSystem:
    """Direct, set, or mixed reverse of a CEST-system.

    ``direct`` adds a reverse edge for every step, ``set`` only for steps
    without repeated actions, and ``mixed`` replaces the transitions by every
    partially reversed step.  States and initial states are kept.
    """
    if mode not in MODES:
        raise ValueError(f"unknown reversal mode {mode!r}")
    if check:
        report = validate_cest(sts)
        if not report.ok:
            raise NotCest(f"cannot reverse: {report.failures()}", report)
    forward = _forward_alphabet(sts)
    alphabet = forward + [a.reverse() for a in forward]
    trans = set()
    if mode == "mixed":
        for t in sts.transitions:
            if t.step.size > cap:
                raise CapExceeded(f"step {t.step.literal()} exceeds the decomposition cap {cap}")
            for alpha in sub_multisets(t.step):
                beta = t.step - alpha
                src = successor(sts, t.source, alpha)
                dst = successor(sts, t.source, beta)
                if src is None or dst is None:
                    raise NotCest(f"sub-step of {t.literal()} is not realisable")
                trans.add((src, reverse_step(alpha) + beta, dst))
    else:
        trans.update(sts.transitions)
        for t in sts.transitions:
            if mode == "set" and not t.step.is_set():
                continue
            trans.add((t.target, reverse_step(t.step), t.source))
    return StepTransitionSystem(sts.states, alphabet, trans, sts.initials)


def reverse_multi(sts: StepTransitionSystem, cover: Iterable[str]) -> StepTransitionSystem:
    """Reverse every transition and start from each state of a home cover."""
    cover = list(dict.fromkeys(cover))
    for r in cover:
        sts.check_state(r)
    if not cover or not is_home_cover(sts, cover):
        raise NotAHomeCover(f"{cover} is not a home cover")
    forward = _forward_alphabet(sts)
    trans = [(t.target, reverse_step(t.step), t.source) for t in sts.transitions]
    cover.sort(key=sts.order)
    return StepTransitionSystem(sts.states, [a.reverse() for a in forward], trans, cover)


def noidx_system(sts: StepTransitionSystem) -> StepTransitionSystem:
    """Replace indexed reverses by plain reverses throughout."""
    return StepTransitionSystem(
        sts.states,
        {a.noidx() for a in sts.actions},
        [(t.source, Multiset(noidx(t.step)), t.target) for t in sts.transitions],
        sts.initials,
    )


@dataclass
class SplitReverseCandidate:
    sts: StepTransitionSystem
    seq_policy: str = "after-noidx"

    def __post_init__(self):
        if self.seq_policy not in ("strict", "after-noidx"):
            raise ValueError(f"unknown SEQ policy {self.seq_policy!r}")


@dataclass
class SplitReverseVerdict:
    ok: bool
    policy: str
    witness: Witness | None
    strict_seq: Witness | None
    noidx_seq: Witness | None
    seq_evaluated: bool = True

    def __bool__(self):
        return self.ok

    def to_json(self) -> dict:
        def seq(w):
            if not self.seq_evaluated:
                return "not-evaluated"
            return "pass" if w is None else {"fail": w.to_json()}

        out = {
            "ok": self.ok,
            "seqPolicy": self.policy,
            "strictSeq": seq(self.strict_seq),
            "noidxSeq": seq(self.noidx_seq),
        }
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        return out


def verify_split_reverse(
    candidate: SplitReverseCandidate,
    original: StepTransitionSystem,
    state_map: Mapping[str, str] | None = None,
) -> SplitReverseVerdict:
    """Check that a candidate is a split reverse of ``original``.

    ``state_map`` renames candidate states into original states first.  Both
    SEQ readings are evaluated; the verdict follows the candidate's policy.
    """
    cand = candidate.sts if state_map is None else candidate.sts.rename_states(state_map)
    image = noidx_system(cand)
    strict_seq = check_seq(cand)
    noidx_seq = check_seq(image)
    policy = candidate.seq_policy

    def verdict(witness):
        return SplitReverseVerdict(False, policy, witness, strict_seq, noidx_seq)

    forward = set(original.actions)
    extra = set(cand.actions) - forward
    clash = {a.noidx() for a in extra} & forward
    if clash:
        return verdict(Witness("alphabet-overlap", {"actions": sorted(map(str, clash))}))
    expected = reverse(original, "direct")
    outside = {a.noidx() for a in extra} - set(expected.actions)
    if outside:
        return verdict(Witness("foreign-actions", {"actions": sorted(map(str, outside))}))
    if set(image.states) != set(expected.states):
        diff = sorted(set(image.states) ^ set(expected.states))
        return verdict(Witness("state-set-mismatch", {"states": diff[:5]}))
    if image.initials != expected.initials:
        return verdict(Witness("initial-mismatch", {"candidate": list(image.initials)}))
    missing = sorted(set(expected.transitions) - set(image.transitions), key=lambda t: t.literal())
    if missing:
        return verdict(Witness("missing-reverse", {"transition": missing[0]}))
    surplus = sorted(set(image.transitions) - set(expected.transitions), key=lambda t: t.literal())
    if surplus:
        return verdict(Witness("extra-transition", {"transition": surplus[0]}))
    seq = strict_seq if policy == "strict" else noidx_seq
    if seq is not None:
        return verdict(seq)
    return SplitReverseVerdict(True, policy, None, strict_seq, noidx_seq)
