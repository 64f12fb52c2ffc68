"""Command-line front end: sampling runs, encode/decode, verification
blocks and the limit-statistics experiments.

Every run is fully determined by its flags: outputs are byte-identical
across reruns with the same configuration and seed.  Exit code 0 means
every check in the run passed; hard failures write a reproducer file
(the configuration dump) next to the requested output.
"""

from __future__ import annotations

import argparse
import json
import math
import random
import sys
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Optional

import numpy as np

from . import _kernels
from .bijection import (
    BijectionError,
    dual_image,
    loop_tree_decode,
    loop_tree_encode,
    psi,
    psi_inverse,
)
from .infinite import (
    DEFAULT_WINDOW_CAP,
    LazyInfiniteMap,
    MatchedWindow,
    WindowCapExceeded,
    infinite_ball,
    pending_indicator,
    root_counts,
    srw_on_map,
)
from .maps import (
    MapError,
    SubgraphRootedMap,
    ball,
    canonical_key,
    dual,
    dual_subgraph,
    enumerate_maps,
    enumerate_rooted_maps,
    loop_count_euler,
    loop_count_trace,
    map_from_text,
    map_to_text,
    validate,
)
from .model import ModelParams, letter_weight, word_probability
from .sampler import (
    InfiniteWordSource,
    RetryCapExceeded,
    enumerate_Wn,
    sample_Wn,
    sample_Wn_batch,
)
from .stats import (
    Estimate,
    StatReport,
    binomial_estimate,
    chi2_uniform,
    mean_estimate,
    tv_bootstrap_se,
    tv_distance,
)
from .words import (
    Word,
    dual_word,
    parse_word,
    reduce_word,
    word_from_text,
    word_to_text,
)


@dataclass(frozen=True)
class ExperimentConfig:
    """Flags of one reproducible run."""

    verb: str
    q: Optional[float] = None
    p: Optional[float] = None
    n: int = 10
    radius: int = 2
    samples: int = 100
    steps: int = 1000
    seed: int = 0
    out: Optional[str] = None
    format: str = "csv"
    retry_cap: int = 2_000_000_000
    window_cap: int = DEFAULT_WINDOW_CAP
    only: Optional[str] = None
    map_files: tuple[str, ...] = ()
    word_file: Optional[str] = None

    def params(self) -> ModelParams:
        if self.p is not None:
            return ModelParams.from_p(self.p)
        if self.q is not None:
            return ModelParams.from_q(self.q)
        return ModelParams.from_q(1.0)


def _out_dir(config: ExperimentConfig) -> Path:
    out = Path(config.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write(path: Path, text: str) -> None:
    path.write_text(text)


def _emit_reproducer(config: ExperimentConfig, reason: str) -> Path:
    out = _out_dir(config)
    path = out / f"reproducer-{config.verb}-seed{config.seed}.json"
    payload = {"reason": reason, "config": asdict(config)}
    _write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def cmd_sample(config: ExperimentConfig) -> tuple[int, StatReport]:
    """Sample conditioned words, push them through the correspondence,
    and write word/map files plus a CSV index of their invariants."""
    params = config.params()
    out = _out_dir(config)
    report = StatReport(
        f"sample: q={params.q} p={float(params.p):.6g} n={config.n} "
        f"samples={config.samples} seed={config.seed}"
    )
    try:
        words = sample_Wn_batch(
            params, config.n, config.samples, config.seed, config.retry_cap
        )
    except RetryCapExceeded as exc:
        report.fail(str(exc))
        _emit_reproducer(config, str(exc))
        return 2, report
    rows = [["index", "offset", "loops", "flexible", "v", "e", "f"]]
    loops_ok = True
    for i, w in enumerate(words):
        sm = psi(w)
        counts = validate(sm.map)
        loops = loop_count_euler(sm)
        if loops != 1 + w.letters.count("F") or loops != loop_count_trace(sm):
            loops_ok = False
            report.fail(f"loop identity failed on sample {i}")
        rows.append(
            [i, w.offset, loops, w.letters.count("F"), counts["v"], counts["e"], counts["f"]]
        )
        _write(out / f"word-{i:05d}.txt", word_to_text(w))
        _write(out / f"map-{i:05d}.txt", map_to_text(sm))
    report.tables["samples"] = rows
    report.notes.append(f"wrote {len(words)} word/map pairs under {out}")
    if loops_ok:
        report.notes.append("loop identity verified on every sample")
    _write(out / "sample-index.csv", report.to_csv())
    return (0 if report.all_pass else 2), report


def cmd_encode(config: ExperimentConfig) -> tuple[int, StatReport]:
    """Word file -> map file."""
    report = StatReport(f"encode: {config.word_file}")
    if not config.word_file:
        report.fail("encode needs --word-file")
        return 2, report
    w = word_from_text(Path(config.word_file).read_text())
    try:
        sm = psi(w)
    except BijectionError as exc:
        report.fail(str(exc))
        _emit_reproducer(config, str(exc))
        return 2, report
    out = _out_dir(config) / (Path(config.word_file).stem + ".map")
    _write(out, map_to_text(sm))
    report.notes.append(f"wrote {out}")
    return 0, report


def cmd_decode(config: ExperimentConfig) -> tuple[int, StatReport]:
    """Map file -> word file (inverse of encode)."""
    report = StatReport(f"decode: {config.map_files}")
    if not config.map_files:
        report.fail("decode needs --map-file")
        return 2, report
    code = 0
    for path in config.map_files:
        try:
            sm = map_from_text(Path(path).read_text())
            w = psi_inverse(sm)
        except (MapError, BijectionError) as exc:
            report.fail(f"{path}: {exc}")
            _emit_reproducer(config, f"{path}: {exc}")
            code = 2
            continue
        out = _out_dir(config) / (Path(path).stem + ".word")
        _write(out, word_to_text(w))
        report.notes.append(f"wrote {out}")
    return code, report


# --------------------------------------------------------------------------
# verification blocks


def _verify_words(report: StatReport, seed: int) -> None:
    from itertools import product

    alphabet = "abABF"
    reduced = {}
    for length in range(0, 7):
        for tup in product(alphabet, repeat=length):
            w = "".join(tup)
            reduced[w] = reduce_word(Word(0, w)).reduced.letters
    bad = 0
    for u in reduced:
        for v in reduced:
            if len(u) + len(v) > 6:
                continue
            if reduced[u + v] != reduced[u + reduced[v]] or reduced[u + v] != reduced[
                reduced[u] + v
            ]:
                bad += 1
    report.add(Estimate("reduction concatenation violations (len<=6)", bad, 0.0, len(reduced), 0.0, 0.5))
    dual_bad = 0
    for u in reduced:
        if reduce_word(dual_word(Word(0, u))).matching.pairs != reduce_word(Word(0, u)).matching.pairs:
            dual_bad += 1
    report.add(Estimate("dual-word matching violations", dual_bad, 0.0, len(reduced), 0.0, 0.5))


def _verify_bijection(report: StatReport, seed: int) -> None:
    for n in (1, 2):
        words = enumerate_Wn(n)
        maps = enumerate_maps(n)
        keys = {
            canonical_key(
                SubgraphRootedMap(sm.map, sm.subgraph, second_root=sm.second_root),
                include_second_root=True,
            )
            for sm in map(psi, words)
        }
        ok = len(keys) == len(words) == len(maps)
        ok = ok and keys == {canonical_key(mm, include_second_root=True) for mm in maps}
        ok = ok and all(psi_inverse(psi(w)) == w for w in words)
        report.add(
            Estimate(f"bijectivity n={n} ({len(words)} words)", 1.0 if ok else 0.0, 0.0, len(words), 1.0, 0.5)
        )


def _verify_duality(report: StatReport, seed: int) -> None:
    bad = 0
    total = 0
    for n in (1, 2):
        for w in enumerate_Wn(n):
            total += 1
            left = psi(dual_word(w))
            right = dual_image(psi(w))
            kl = canonical_key(
                SubgraphRootedMap(left.map, left.subgraph, second_root=left.second_root),
                include_second_root=True,
            )
            kr = canonical_key(
                SubgraphRootedMap(right.map, right.subgraph, second_root=right.second_root),
                include_second_root=True,
            )
            bad += kl != kr
    report.add(Estimate("duality commutation violations (n<=2)", bad, 0.0, total, 0.0, 0.5))


def _verify_loops(report: StatReport, seed: int) -> None:
    bad = 0
    total = 0
    for n in (1, 2, 3):
        for m in enumerate_rooted_maps(n):
            edges = m.edges()
            for mask in range(1 << len(edges)):
                sub = frozenset(e for i, e in enumerate(edges) if mask >> i & 1)
                sm = SubgraphRootedMap(m, sub)
                total += 1
                bad += loop_count_euler(sm) != loop_count_trace(sm)
    report.add(Estimate("loop-count oracle disagreements (n<=3)", bad, 0.0, total, 0.0, 0.5))


def _verify_looptree(report: StatReport, seed: int) -> None:
    bad = 0
    total = 0
    for n in (1, 2, 3):
        for m in enumerate_rooted_maps(n):
            edges = m.edges()
            for mask in range(1 << len(edges)):
                sub = frozenset(e for i, e in enumerate(edges) if mask >> i & 1)
                sm = SubgraphRootedMap(m, sub)
                if loop_count_euler(sm) != n + 1:
                    continue
                total += 1
                tree, subset = loop_tree_encode(sm)
                back = loop_tree_decode(tree, subset)
                bad += canonical_key(back) != canonical_key(sm)
    report.add(Estimate("loop-tree round-trip failures (n<=3)", bad, 0.0, total, 0.0, 0.5))


def _verify_serialization(report: StatReport, seed: int) -> None:
    rng = random.Random(seed)
    params = ModelParams.from_p(1 / 3)
    bad = 0
    for i in range(20):
        w = sample_Wn(params, 8, rng)
        sm = psi(w)
        if map_from_text(map_to_text(sm)) != sm:
            bad += 1
        if word_from_text(word_to_text(w)) != w:
            bad += 1
    report.add(Estimate("serialization round-trip failures", bad, 0.0, 40, 0.0, 0.5))


def _verify_map_files(report: StatReport, config: ExperimentConfig) -> None:
    for path in config.map_files:
        try:
            sm = map_from_text(Path(path).read_text())
            validate(sm.map)
            report.notes.append(f"{path}: valid")
        except (MapError, OSError, ValueError) as exc:
            report.fail(f"{path}: {exc}")


VERIFY_BLOCKS = {
    "words": _verify_words,
    "bijectivity": _verify_bijection,
    "duality": _verify_duality,
    "loops": _verify_loops,
    "looptree": _verify_looptree,
    "serialization": _verify_serialization,
}


def cmd_verify(config: ExperimentConfig) -> tuple[int, StatReport]:
    """Run the exhaustive small-size checks (optionally a single block
    via --only) and re-validate any supplied map files."""
    report = StatReport(f"verify (only={config.only or 'all'})")
    blocks = VERIFY_BLOCKS
    if config.only:
        if config.only not in blocks:
            report.fail(f"unknown block {config.only!r}; have {sorted(blocks)}")
            return 2, report
        blocks = {config.only: blocks[config.only]}
    for name, fn in blocks.items():
        fn(report, config.seed)
    if config.map_files:
        _verify_map_files(report, config)
    if not report.all_pass:
        path = _emit_reproducer(config, "verification failure")
        report.notes.append(f"reproducer written to {path}")
        return 2, report
    return 0, report


def cmd_local_convergence(config: ExperimentConfig) -> tuple[int, StatReport]:
    """Total-variation distance between the law of the window around the
    origin under the size-n conditioned law and the i.i.d. letter law,
    for a ladder of sizes; the distance must decrease beyond noise."""
    params = config.params()
    radius = min(config.radius, 3)
    report = StatReport(
        f"local-convergence: p={float(params.p):.6g} R={radius} samples={config.samples}"
    )
    sizes = [config.n // 16, config.n // 4, config.n] if config.n >= 16 else [4, 16, 64]
    sizes = sorted({max(radius + 1, s) for s in sizes})
    from itertools import product as iproduct

    probs = {}
    for tup in iproduct("abABF", repeat=2 * radius):
        word = "".join(tup)
        pw = 1.0
        for c in word:
            pw *= float(letter_weight(params, c))
        if pw > 0:
            probs[word] = pw
    tvs = []
    for idx, n in enumerate(sizes):
        words = sample_Wn_batch(
            params, n, config.samples, config.seed + idx, config.retry_cap
        )
        counts: dict[str, int] = {}
        for w in words:
            window = w.restrict(-radius, radius)
            key = window.letters if len(window) == 2 * radius else f"partial:{window.letters}@{window.offset}"
            counts[key] = counts.get(key, 0) + 1
        tv = tv_distance(counts, probs)
        se = tv_bootstrap_se(counts, probs, seed=config.seed + 1000 + idx)
        tvs.append((n, tv, se))
        report.add(Estimate(f"tv distance n={n}", tv, se, config.samples))
    rows = [["n", "tv", "se"]] + [[n, f"{tv:.6g}", f"{se:.3g}"] for n, tv, se in tvs]
    report.tables["tv-ladder"] = rows
    for (n1, tv1, se1), (n2, tv2, se2) in zip(tvs, tvs[1:]):
        gap = tv1 - tv2
        noise = 3.0 * math.hypot(se1, se2)
        est = Estimate(
            f"tv decrease {n1}->{n2} beyond 3 sigma",
            1.0 if gap > noise else 0.0,
            0.0,
            config.samples,
            1.0,
            0.5,
        )
        report.add(est)
    if config.out:
        _write(_out_dir(config) / "local-convergence.csv", report.to_csv())
    return (0 if report.all_pass else 2), report


def cmd_limit_ball(config: ExperimentConfig) -> tuple[int, StatReport]:
    """Certified neighborhoods of the limit map: serialized balls plus a
    CSV of telemetry (window used, root degree, certification)."""
    params = config.params()
    out = _out_dir(config)
    report = StatReport(
        f"limit-ball: p={float(params.p):.6g} R={config.radius} samples={config.samples}"
    )
    rows = [["seed", "radius", "window_halfwidth", "certified", "root_degree", "v", "e"]]
    capped = 0
    for i in range(config.samples):
        seed = config.seed + i
        src = InfiniteWordSource(params, seed)
        try:
            cert = infinite_ball(src, config.radius, cap=config.window_cap)
        except WindowCapExceeded:
            capped += 1
            rows.append([seed, config.radius, config.window_cap, "capped", "", "", ""])
            continue
        sm = cert.ball.sm
        counts = validate(sm.map) if sm.map.num_darts else {"v": 1, "e": 0}
        rows.append(
            [
                seed,
                config.radius,
                cert.halfwidth,
                cert.certified,
                sm.map.degree_of_root_vertex(),
                counts["v"],
                counts["e"],
            ]
        )
        _write(out / f"ball-{seed}.txt", map_to_text(sm))
    report.tables["balls"] = rows
    report.add(
        binomial_estimate("window-cap rate", capped, config.samples)
    )
    _write(out / "limit-ball.csv", report.to_csv())
    return 0, report


def cmd_walk(config: ExperimentConfig) -> tuple[int, StatReport]:
    """Simple random walk on the limit map: pending-edge frequency
    against its closed form and root-return counts."""
    params = config.params()
    p = float(params.p)
    report = StatReport(
        f"walk: p={p:.6g} steps={config.steps} samples={config.samples} seed={config.seed}"
    )
    pending_total = 0
    steps_total = 0
    returns = []
    capped = 0
    for i in range(config.samples):
        seed = config.seed + i
        src = InfiniteWordSource(params, seed)
        rng = random.Random((config.seed, i, "walk"))
        try:
            lim = LazyInfiniteMap(MatchedWindow(src, cap=config.window_cap))
            stats = srw_on_map(lim, config.steps, rng)
        except WindowCapExceeded:
            capped += 1
            continue
        pending_total += stats.pending_steps
        steps_total += stats.steps
        returns.append(stats.root_returns)
    est = binomial_estimate(
        "pending-edge frequency", pending_total, steps_total, target=(1 + p) / 16
    )
    report.add(est)
    if returns:
        report.add(mean_estimate("root returns per walk", returns))
    if capped:
        report.notes.append(f"{capped} walks hit the window cap and were dropped")
    if config.out:
        _write(_out_dir(config) / "walk.csv", report.to_csv())
    return (0 if report.all_pass else 2), report


def cmd_rootdeg(config: ExperimentConfig) -> tuple[int, StatReport]:
    """Root-degree statistics of the limit map via the burger-count
    walk: distribution, conditional uniformity and tail diagnostics."""
    params = config.params()
    p = float(params.p)
    report = StatReport(f"rootdeg: p={p:.6g} samples={config.samples} seed={config.seed}")
    raw = _kernels.root_degree_samples(
        np.uint64(config.seed), p, config.samples, 64, max(config.window_cap // 2, 1 << 12)
    )
    n0 = raw[:, 0]
    n0p = raw[:, 1]
    good = n0 > 0
    dropped = int((~good).sum())
    n0, n0p = n0[good], n0p[good]
    report.add(mean_estimate("root degree mean", n0.astype(float)))
    # conditional uniformity aggregated over small degrees
    stat_total, dof_total = 0.0, 0
    for m in range(2, 9):
        sel = n0p[n0 == m]
        if len(sel) < 5 * m:
            continue
        counts = [int((sel == k).sum()) for k in range(1, m + 1)]
        stat, dof, _ = chi2_uniform(counts)
        stat_total += stat
        dof_total += dof
    from scipy.stats import chi2 as _chi2

    pvalue = float(_chi2.sf(stat_total, dof_total)) if dof_total else 1.0
    report.add(
        Estimate(
            "conditional uniformity chi2 p-value (m<=8)",
            pvalue,
            0.0,
            int(len(n0)),
            None,
        )
    )
    if pvalue < 0.01:
        report.fail(f"uniformity rejected at 1%: p={pvalue:.4g}")
    # survival table
    xs = range(1, int(n0.max()) + 1)
    survival = [(x, float((n0 >= x).mean())) for x in xs]
    report.tables["survival"] = [["x", "P(N0>=x)"]] + [
        [x, f"{sv:.8g}"] for x, sv in survival if sv > 0
    ]
    hist = [["m", "count"]] + [
        [m, int((n0 == m).sum())] for m in range(1, int(n0.max()) + 1)
    ]
    report.tables["histogram"] = hist
    if dropped:
        report.notes.append(f"{dropped} samples dropped at the window cap")
    if config.out:
        _write(_out_dir(config) / "rootdeg.csv", report.to_csv())
    return (0 if report.all_pass else 2), report


def cmd_limit_stats(config: ExperimentConfig) -> tuple[int, StatReport]:
    """Aggregate limit statistics across a grid of parameters: pending
    frequencies, root-degree means and tail slopes."""
    report = StatReport(f"limit-stats: samples={config.samples} seed={config.seed}")
    grid = [0.0, 1 / 3, 0.5, 2 / 3]
    rows = [["p", "pending_target", "pending_est", "rootdeg_mean", "tail_halflife"]]
    for idx, p in enumerate(grid):
        pending = int(
            _kernels.pending_indicator_samples(
                np.uint64(config.seed + idx), p, config.samples
            )
        )
        est = binomial_estimate(
            f"pending indicator p={p:.4g}", pending, config.samples, target=(1 + p) / 16
        )
        report.add(est)
        raw = _kernels.root_degree_samples(
            np.uint64(config.seed + 100 + idx),
            p,
            max(2000, config.samples // 10),
            64,
            max(config.window_cap // 2, 1 << 12),
        )
        n0 = raw[:, 0]
        n0 = n0[n0 > 0].astype(float)
        mean = float(n0.mean())
        half = ""
        surv1 = float((n0 >= 1).mean())
        for x in range(1, int(n0.max()) + 1):
            if float((n0 >= x).mean()) <= surv1 / math.e:
                half = x
                break
        rows.append([f"{p:.6g}", f"{(1+p)/16:.6g}", f"{est.value:.6g}", f"{mean:.4g}", half])
    report.tables["grid"] = rows
    if config.out:
        _write(_out_dir(config) / "limit-stats.csv", report.to_csv())
    return (0 if report.all_pass else 2), report


COMMANDS = {
    "sample": cmd_sample,
    "encode": cmd_encode,
    "decode": cmd_decode,
    "verify": cmd_verify,
    "local-convergence": cmd_local_convergence,
    "limit-ball": cmd_limit_ball,
    "walk": cmd_walk,
    "rootdeg": cmd_rootdeg,
    "limit-stats": cmd_limit_stats,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cfkmaps",
        description="critical cluster-weighted planar maps from burger words",
    )
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb in COMMANDS:
        sp = sub.add_parser(verb)
        sp.add_argument("--q", type=str, default=None, help="cluster weight in [0, inf]")
        sp.add_argument("--p", type=float, default=None, help="flexible-order fraction")
        sp.add_argument("--n", type=int, default=10, help="number of edges / pairs")
        sp.add_argument("--radius", type=int, default=2)
        sp.add_argument("--samples", type=int, default=100)
        sp.add_argument("--steps", type=int, default=1000)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", type=str, default=None)
        sp.add_argument("--format", choices=("csv", "structured"), default="csv")
        sp.add_argument("--retry-cap", type=int, default=2_000_000_000)
        sp.add_argument("--window-cap", type=int, default=DEFAULT_WINDOW_CAP)
        sp.add_argument("--only", type=str, default=None, help="verify: run one block")
        sp.add_argument(
            "--map-file", action="append", default=[], help="map files to read"
        )
        sp.add_argument("--word-file", type=str, default=None)
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    q = None
    if args.q is not None:
        q = math.inf if args.q in ("inf", "infinity") else float(args.q)
    return ExperimentConfig(
        verb=args.verb,
        q=q,
        p=args.p,
        n=args.n,
        radius=args.radius,
        samples=args.samples,
        steps=args.steps,
        seed=args.seed,
        out=args.out,
        format=args.format,
        retry_cap=args.retry_cap,
        window_cap=args.window_cap,
        only=args.only,
        map_files=tuple(args.map_file),
        word_file=args.word_file,
    )


def main(argv: Optional[list[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    config = config_from_args(args)
    code, report = COMMANDS[config.verb](config)
    print(report.format_text())
    return code


if __name__ == "__main__":
    sys.exit(main())
