"""Command line driver: build, verify, reconstruct, aut, match."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, fields
from dataclasses import field as dc_field
from pathlib import Path

from sympy import isprime

from .arith import (
    ConfigError,
    abelianization_map,
    build_abelian_quandle,
    chebotarev_witness,
    fixture_F4,
    prime_from_label,
    prime_set,
    tower,
)
from .padic import Inconclusive
from .quadfield import QuadField, QuadIdeal, prime_root, split_prime
from .quandle import verify_axioms
from .rayclass import prime_below
from .reconstruct import (
    aut_structure_report,
    classify_case,
    detect_W,
    fiber_exchange,
    inner_isomorphism,
    match_quandles,
    reciprocity_coordinates,
    recover_group,
    recover_orbits,
    recover_p,
    recover_residue_chars,
    strip,
)

COMMANDS = ("build", "verify", "reconstruct", "aut", "match")

FIXTURES = {
    "F1": {"field": "Q", "p": 5, "B": 50, "N": 3},
    "F2": {"field": 5, "p": 3, "B": 100, "N": 4},
    "F3": {"field": -1, "p": 3, "B": 100, "N": 3, "split_only": True},
    "F4": {"galois": "S3", "B": 60},
}


@dataclass
class ExperimentConfig:
    field: int | str = "Q"
    p: int | None = None
    p_root: int | None = None
    B: int = 100
    N: int = 3
    N_min: int = 1
    M: list | None = None  # explicit primes: rational primes or "l:r" labels
    split_only: bool = False
    witness: bool = True
    precision: int = 12
    B_c: int = 500
    H: int = 1000
    seeds: list = dc_field(default_factory=lambda: [1, 2])
    frame: str = "natural"
    relabel: str | None = None
    galois: str | None = None
    other: dict | None = None
    fixture: str | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown config fields: {', '.join(unknown)}")
        if d.get("fixture"):
            if d["fixture"] not in FIXTURES:
                raise ConfigError(f"fixture: unknown fixture {d['fixture']!r}")
            d = {**FIXTURES[d["fixture"]], **d}
        cfg = cls(**d)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        errs = []
        if self.galois is not None:
            if self.galois != "S3":
                errs.append("galois: only 'S3' (splitting field of x^3 - x - 1) is supported")
        else:
            if not (self.field == "Q" or (isinstance(self.field, int) and self.field not in (0, 1))):
                errs.append("field: must be 'Q' or a squarefree integer m != 0, 1")
            elif isinstance(self.field, int) and any(self.field % (q * q) == 0 for q in range(2, abs(self.field) + 1)):
                errs.append("field: m must be squarefree")
            if not isinstance(self.p, int) or not isprime(self.p):
                errs.append("p: must be a rational prime")
            if not isinstance(self.N, int) or self.N < 1:
                errs.append("N: must be a positive integer")
            if not isinstance(self.N_min, int) or not 1 <= self.N_min <= max(self.N, 1):
                errs.append("N_min: must satisfy 1 <= N_min <= N")
        if not isinstance(self.B, int) or self.B < 2:
            errs.append("B: must be an integer >= 2")
        if not isinstance(self.precision, int) or self.precision < 1:
            errs.append("precision: must be a positive integer")
        if not isinstance(self.B_c, int) or self.B_c < 2:
            errs.append("B_c: must be an integer >= 2")
        if not isinstance(self.H, int) or self.H < 1:
            errs.append("H: must be a positive integer")
        if not (isinstance(self.seeds, list) and len(self.seeds) == 2 and all(isinstance(s, int) and s >= 0 for s in self.seeds)):
            errs.append("seeds: must be a list of two non-negative integers")
        if self.frame not in ("natural", "random"):
            errs.append("frame: must be 'natural' or 'random'")
        if self.relabel not in (None, "conjugation"):
            errs.append("relabel: must be null or 'conjugation'")
        if errs:
            raise ConfigError("; ".join(errs))

    def K(self) -> QuadField:
        return QuadField(1 if self.field == "Q" else self.field)

    def P(self) -> QuadIdeal:
        K = self.K()
        primes = [Q for Q, _, _ in split_prime(K, self.p).primes]
        if self.p_root is not None:
            primes = [Q for Q in primes if prime_root(Q) == self.p_root]
            if not primes:
                raise ConfigError(f"p_root: no prime over {self.p} with root {self.p_root}")
        return primes[0]


def _primes(cfg: ExperimentConfig, N: int) -> list[QuadIdeal]:
    K, P = cfg.K(), cfg.P()
    if cfg.M is not None:
        out = []
        for x in cfg.M:
            if isinstance(x, int):
                out.extend(Q for Q, _, _ in split_prime(K, x).primes)
            else:
                out.append(prime_from_label(K, str(x)))
        return out
    extra = (chebotarev_witness(K, P, N, start=cfg.B + 1, split_only=cfg.split_only),) if cfg.witness else ()
    return prime_set(K, P, cfg.B, split_only=cfg.split_only, extra=extra)


def build_tower(cfg: ExperimentConfig):
    primes = _primes(cfg, cfg.N)
    return tower(cfg.K(), cfg.P(), primes, cfg.N, cfg.N_min, B=cfg.B)


# ---------------------------------------------------------------------------
# commands


def cmd_build(cfg: ExperimentConfig, seed: int) -> tuple[int, dict]:
    if cfg.galois:
        gq = fixture_F4(cfg.B)
        return 0, {"galois": gq.quandle.to_json(), "primes": gq.labels}
    return 0, {"tower": build_tower(cfg).to_json()}


def cmd_verify(cfg: ExperimentConfig, seed: int) -> tuple[int, dict]:
    if cfg.galois:
        gq = fixture_F4(cfg.B)
        ax = verify_axioms(gq.quandle, seed=seed)
        Qab, C, f = abelianization_map(gq)
        ok = ax.passed and f is not None
        return (0 if ok else 1), {"axioms": asdict(ax), "abelianization_isomorphism": f is not None}
    T = build_tower(cfg)
    out = {"levels": {}}
    ok = True
    for N, lev in sorted(T.levels.items()):
        ax = verify_axioms(lev.quandle, seed=seed)
        iso = inner_isomorphism(lev)
        out["levels"][str(N)] = {"size": lev.quandle.n, "axioms": asdict(ax), "inner": iso}
        ok &= ax.passed
    out["projections"] = {f"{a}->{b}": v for (a, b), v in T.verify().items()}
    ok &= all(all(v.values()) for v in out["projections"].values())
    return (0 if ok else 1), out


def cmd_reconstruct(cfg: ExperimentConfig, seed: int) -> tuple[int, dict]:
    if cfg.galois:
        raise ConfigError("galois: reconstruct needs an abelian tower")
    T = build_tower(cfg)
    top = T.top
    fibers = [[int(i) for i in range(top.quandle.n) if top.quandle.fiber_of[i] == lam] for lam in range(len(top.primes))]
    g = recover_group(top.quandle, fibers, top.group.order)
    orb = recover_orbits(top.quandle)
    out = {
        "case": classify_case(T.K, T.P),
        "group": {"order": g.order, "invariants": list(g.invariants or ()), "G_N": list(top.group.invariants),
                  "transitive_on_fibers": g.transitive_on_fibers},
        "orbits_equal_fibers": sorted(map(sorted, orb)) == sorted(fibers),
        "diagnostics": list(g.diagnostics),
    }
    ok = out["orbits_equal_fibers"]
    if len(T.levels) >= 3:
        gr = recover_p(T)
        out["growthTable"] = {str(N): {str(q): v for q, v in row.items()} for N, row in gr.table.items()}
        out["p"] = gr.p
        out["p_outcome"] = gr.outcome
    if out["case"] != "2-0":
        data = reciprocity_coordinates(top, cfg.precision)
        truth = [prime_below(Q) for Q in top.primes]
        try:
            if data.R == 2:
                w = detect_W(data.values)
                conj = [top.primes.index(_conj(Q)) if _conj(Q) in top.primes else None for Q in top.primes]
                out["pairing_is_conjugation"] = w.pairing == conj
                ok &= out["pairing_is_conjugation"]
                res = recover_residue_chars(w.norm_sums, data.p, cfg.B_c, cfg.H)
            else:
                res = recover_residue_chars(data.scalars(), data.p, cfg.B_c, cfg.H)
            out["residue_chars"] = {lab: c for lab, c in zip(data.labels, res.chars)}
            correct = [c == t for c, t in zip(res.chars, truth) if c is not None]
            out["residue_char_accuracy"] = f"{sum(correct)}/{len(correct)}"
            out["diagnostics"] += res.diagnostics
            ok &= all(correct)
        except Inconclusive as exc:
            out["diagnostics"].append(f"inconclusive: {exc}")
            ok = False
    return (0 if ok else 1), out


def _conj(Q: QuadIdeal) -> QuadIdeal:
    from .quadfield import conjugate_ideal

    return conjugate_ideal(Q)


def cmd_aut(cfg: ExperimentConfig, seed: int) -> tuple[int, dict]:
    if cfg.galois:
        raise ConfigError("galois: aut needs an abelian coset quandle")
    lev = build_abelian_quandle(cfg.K(), cfg.P(), _primes(cfg, cfg.N), cfg.N)
    rep = aut_structure_report(lev)
    out = {"report": asdict(rep), "fiber_exchanges": []}
    labels = lev.fiber_labels
    for i in range(len(labels)):
        for j in range(i + 1, len(labels)):
            if lev.frob[i] == lev.frob[j] and lev.fiber_sizes()[i] == lev.fiber_sizes()[j]:
                f = fiber_exchange(lev, i, j)
                out["fiber_exchanges"].append({"fibers": [labels[i], labels[j]], "verified": f is not None})
    ok = rep.translations_are_automorphisms and rep.image_preserves_frobenius
    if rep.mode == "exhaustive":
        ok &= rep.equal and rep.kernel_is_translations
    ok &= all(e["verified"] for e in out["fiber_exchanges"])
    return (0 if ok else 1), out


def cmd_match(cfg: ExperimentConfig, seed: int) -> tuple[int, dict]:
    if cfg.galois:
        raise ConfigError("galois: match needs abelian towers")
    other = ExperimentConfig.from_dict({**_as_dict(cfg, drop=("other",)), **(cfg.other or {})}) if cfg.other else cfg
    TA, TB = build_tower(cfg), build_tower(other)
    sa, sb = cfg.seeds
    A, ka = strip(TA, seed=seed + sa, precision=cfg.precision)
    B, kb = strip(TB, seed=seed + sb, precision=other.precision, frame=other.frame, relabel=other.relabel)
    case = classify_case(TA.K, TA.P)
    res = match_quandles(A, B, cfg.B_c, cfg.H, case=case)
    report = res.labelled(ka, kb, TA.K)
    return 0, report


def _as_dict(cfg: ExperimentConfig, drop=()) -> dict:
    return {k: v for k, v in asdict(cfg).items() if k not in drop and k != "fixture"}


HANDLERS = {"build": cmd_build, "verify": cmd_verify, "reconstruct": cmd_reconstruct, "aut": cmd_aut, "match": cmd_match}


def run(command: str, config: dict, seed: int = 0, out: Path | None = None) -> tuple[int, dict]:
    try:
        cfg = ExperimentConfig.from_dict(config)
        status, report = HANDLERS[command](cfg, seed)
    except ConfigError as exc:
        return 2, {"command": command, "config": config, "error": str(exc)}
    report = {"command": command, "config": config, "seed": seed, **report}
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{command}.json").write_text(dumps(report))
    return status, report


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=1, default=str) + "\n"


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="arithquandle", description=__doc__)
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="JSON config file")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default=None, help="directory for the report")
    args = ap.parse_args(argv)
    try:
        config = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config: {exc}", file=sys.stderr)
        return 2
    if not isinstance(config, dict):
        print("config: top level must be a JSON object", file=sys.stderr)
        return 2
    status, report = run(args.command, config, args.seed, Path(args.out) if args.out else None)
    if status == 2:
        print(report["error"], file=sys.stderr)
    else:
        sys.stdout.write(dumps(report))
    return status


if __name__ == "__main__":
    sys.exit(main())
