"""Command-line driver: build, verify, certify, stats, export."""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, fields
from pathlib import Path

from .certificates import FOUND, certificate_campaign, lemma2_sweep
from .complex import CellMap, DComplex, simplex_boundary, standard_simplex, two_triangles
from .constructions import barycentric_subdivision, induced_map_from_quotient, orbit_quotient
from .errors import ConfigError, StageCheckFailure
from .gfp import is_prime
from .hat import DEFAULT_CELL_BUDGET
from .hat_checks import CHECK_NAMES
from .homology import cohomology_mod_p, homology_group
from .sequences import SequenceCursor
from .serialize import ParseError, parse, serialize
from .tower import TowerConfig, TowerResult, tower_build, verify_orbit

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_STAGE = 3
EXIT_BUDGET = 4
EXIT_VERIFY = 5
EXIT_REFUTED = 6

COMMANDS = ("build", "verify", "certify", "stats", "export")


@dataclass
class RunConfig:
    command: str
    p: int = 2
    K_rule: str = "const:1"
    L_source: str = "simplex:2"
    depth: int = 1
    budget: int = DEFAULT_CELL_BUDGET
    seed: int = 0
    out: str | None = None
    samples: int = 50
    search_depth: int | None = None
    defer_checks: bool = False

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if not is_prime(self.p):
            raise ConfigError(f"p = {self.p} is not prime")
        if self.depth < 0 or self.budget <= 0 or self.samples < 0:
            raise ConfigError("depth, budget and samples must be nonnegative (budget positive)")
        if self.search_depth is not None and self.search_depth < 0:
            raise ConfigError("search depth must be nonnegative")
        SequenceCursor.from_text(self.K_rule)

    def lines(self) -> list[str]:
        """Build-relevant fields only, so artifacts do not depend on the command."""
        keep = ("p", "K_rule", "L_source", "depth", "budget")
        return [f"{k} {getattr(self, k)}" for k in keep]


def config_from_lines(lines: list[str], command: str) -> RunConfig:
    types = {f.name: f.type for f in fields(RunConfig)}
    values: dict = {"command": command}
    for line in lines:
        if not line.strip() or line.startswith("#"):
            continue
        key, _, val = line.partition(" ")
        if key not in types:
            raise ConfigError(f"unknown config key {key!r}")
        values[key] = int(val) if key in ("p", "depth", "budget") else val
    return RunConfig(**values)


def load_L(source: str) -> DComplex:
    kind, _, arg = source.partition(":")
    try:
        if kind == "simplex" and arg:
            return standard_simplex(int(arg))
        if kind == "boundary" and arg:
            m = int(arg)
            if m < 1:
                raise ConfigError("boundary:m needs m ≥ 1")
            return simplex_boundary(m)
    except ValueError:
        raise ConfigError(f"bad complex source {source!r}") from None
    if source == "two-triangles":
        return two_triangles()
    path = Path(source)
    if not path.is_file():
        raise ConfigError(f"complex source {source!r} is neither a builtin nor a file")
    try:
        f = parse(path.read_text())
    except ParseError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    if "level" in f.complexes:
        return f.complexes["level"]
    if len(f.complexes) != 1:
        raise ConfigError(f"{source} holds several complexes and none is named 'level'")
    return next(iter(f.complexes.values()))


def make_tower(cfg: RunConfig, run_checks: bool = True) -> TowerResult:
    tc = TowerConfig(cfg.p, SequenceCursor.from_text(cfg.K_rule), load_L(cfg.L_source), cfg.depth, cfg.budget)
    return tower_build(tc, run_checks=run_checks, defer_checks=cfg.defer_checks)


# --- artifacts -----------------------------------------------------------


def level_text(tower: TowerResult, k: int, cfg: RunConfig) -> str:
    lv = tower.levels[k]
    header = {"p": str(cfg.p), "K": cfg.K_rule, "L": cfg.L_source, "level": str(k)}
    complexes = {"level": lv.complex}
    maps: dict[str, tuple[str, str, CellMap]] = {}
    if k:
        header["subdivisions"] = str(len(lv.hat.subdivisions))
        header["order"] = str(lv.group.order)
        header["factors"] = ",".join(map(str, lv.generator_factor)) or "-"
        complexes["base"] = lv.hat.base
        maps["proj"] = ("level", "base", lv.proj)
        for i, g in enumerate(lv.generators):
            maps[f"gen{i}"] = ("level", "level", g)
    return serialize(complexes, maps, header)


def stage_report(tower: TowerResult, cfg: RunConfig) -> list[str]:
    out = ["# run configuration"] + cfg.lines() + ["# levels"]
    trivial = True
    for lv in tower.levels:
        line = f"level {lv.index}: cells {lv.complex.counts()}"
        if lv.hat is not None:
            trivial &= lv.group.order == 1
            last = lv.hat.stages[-1]
            line += f" B {lv.B} group {lv.group} N {last.N}"
        out.append(line)
        if lv.hat is None:
            continue
        for st in lv.hat.stages:
            marks = " ".join(f"{n}={'pass' if st.checks.get(n) and st.checks[n].passed else 'FAIL'}" for n in CHECK_NAMES)
            out.append(f"  stage {st.k}: tilde {st.tilde.counts()} hat {st.hat.counts()} B {st.B} {marks}")
        out.extend(f"  note: {n}" for n in lv.hat.notes)
    if tower.depth >= 1 and trivial:
        out.append("trivial tower: every deck group is trivial")
    if tower.truncated:
        out.append(f"truncated: {tower.message}")
    return out


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def cmd_build(cfg: RunConfig) -> int:
    out = Path(cfg.out or "tower_out")
    try:
        tower = make_tower(cfg)
    except StageCheckFailure as exc:
        st = exc.witness
        if st is not None:
            _write(out / f"witness_stage_{exc.stage}.cplx", serialize({"tilde": st.tilde}, None, {"stage": str(exc.stage)}))
        _write(out / "report.txt", "\n".join(cfg.lines() + [f"stage-check failure: {exc}"]) + "\n")
        print(f"stage-check failure: {exc}", file=sys.stderr)
        return EXIT_STAGE
    _write(out / "run.cfg", "\n".join(cfg.lines()) + "\n")
    for k in range(tower.depth + 1):
        _write(out / f"level_{k}.cplx", level_text(tower, k, cfg))
    report = stage_report(tower, cfg)
    _write(out / "report.txt", "\n".join(report) + "\n")
    print("\n".join(report))
    if tower.truncated:
        print(f"budget exceeded: {tower.message}", file=sys.stderr)
        return EXIT_BUDGET
    return EXIT_OK


# --- verify --------------------------------------------------------------


def _stored_checks(files: dict[int, object], k: int) -> list[str]:
    """Checks that use only the stored files; returns failure messages."""
    f = files[k]
    L, base = f.complexes["level"], f.complexes["base"]
    fails = []
    prev = files[k - 1].complexes["level"]
    sub = prev
    for _ in range(int(f.header.get("subdivisions", "0"))):
        sub = barycentric_subdivision(sub).complex
    if sub != base:
        fails.append(f"level {k}: stored base is not the subdivided level {k - 1}")
    proj = f.cell_map("proj")
    order = int(f.header.get("order", "1"))
    top = base.dim
    sizes = proj.fiber_sizes()
    if any(x != order for x in sizes[top]):
        fails.append(f"level {k}: top fibers of proj differ from the group order {order}")
    factors = f.header.get("factors", "-")
    factors = [] if factors == "-" else [int(x) for x in factors.split(",")]
    newest = []
    for i, fac in enumerate(factors):
        g = f.cell_map(f"gen{i}")
        if not g.is_bijective():
            fails.append(f"level {k}: generator {i} is not an automorphism")
            return fails
        if fac == k:
            if g.compose(proj).assignment != proj.assignment:
                fails.append(f"level {k}: generator {i} does not commute with proj")
            newest.append(g)
    _, q = orbit_quotient(L, newest)
    ind = induced_map_from_quotient(q, proj)
    if ind is None or not ind.is_bijective():
        fails.append(f"level {k}: stored orbit space differs from the stored base")
    return fails


def cmd_verify(cfg: RunConfig, indir: str | None) -> int:
    d = Path(indir or cfg.out or "")
    if not indir and not cfg.out or not d.is_dir() or not any(d.iterdir()):
        print(f"nothing to verify in {str(d)!r}", file=sys.stderr)
        return EXIT_CONFIG
    cfg_path = d / "run.cfg"
    if not cfg_path.is_file():
        print(f"{d} has no run.cfg", file=sys.stderr)
        return EXIT_CONFIG
    run = config_from_lines(cfg_path.read_text().splitlines(), "verify")
    run.validate()
    files, texts = {}, {}
    for k in range(run.depth + 1):
        path = d / f"level_{k}.cplx"
        if not path.is_file():
            break
        texts[k] = path.read_text()
        try:
            files[k] = parse(texts[k])
        except ParseError as exc:
            print(f"{path.name}: {exc}", file=sys.stderr)
            return EXIT_VERIFY
    rows: list[tuple[str, bool, str]] = []
    for k in sorted(files)[1:]:
        fails = _stored_checks(files, k)
        rows.append((f"level {k} stored files", not fails, "; ".join(fails) or "ok"))
    try:
        tower = make_tower(run)
    except StageCheckFailure as exc:
        rows.append(("rebuild", False, str(exc)))
        tower = None
    if tower is not None:
        for k in sorted(files):
            same = level_text(tower, k, run) == texts[k] if k <= tower.depth else False
            rows.append((f"level {k} matches rebuild", same, "byte-identical" if same else "differs"))
        for lv in tower.levels[1:]:
            for st in lv.hat.stages:
                for name in CHECK_NAMES:
                    c = st.checks[name]
                    rows.append((f"level {lv.index} stage {st.k} {name}", c.passed, c.detail))
            rep = verify_orbit(tower, lv.index)
            rows.append((f"level {lv.index} orbit space", rep.passed, rep.detail))
            sweep = lemma2_sweep(lv.hat.simplex_result, run.p)
            ok = all(r.zero for r in sweep)
            rows.append((f"level {lv.index} h1 pullback sweep", ok, f"{len(sweep)} covers"))
    for name, ok, detail in rows:
        print(f"{'PASS' if ok else 'FAIL'}\t{name}\t{detail}")
    return EXIT_OK if all(ok for _, ok, _ in rows) else EXIT_VERIFY


# --- certify, stats, export ----------------------------------------------


def cmd_certify(cfg: RunConfig) -> int:
    tower = make_tower(cfg)
    summary = certificate_campaign(tower, cfg.samples, cfg.seed, search_depth=cfg.search_depth)
    lines = ["# run configuration"] + cfg.lines() + [f"search_depth {cfg.search_depth}"] + summary.lines()
    refuted = [i for i, (c, ok) in enumerate(zip(summary.certificates, summary.reverified)) if c.status == FOUND and not ok]
    for i, c in enumerate(summary.certificates):
        if c.status == FOUND:
            continue
        reason = "budget-limited" if tower.truncated else "not found at the searched depths"
        if c.tried and c.tried[-1] == tower.depth and not tower.truncated:
            reason = "not found at any built depth"
        lines.append(f"witness {i}: {reason}; level {c.level_from} cells {c.subcomplex} class {sorted(c.class_in.items())}")
    for i in refuted:
        lines.append(f"refuted {i}: extension fails independent re-verification")
    text = "\n".join(lines) + "\n"
    if cfg.out:
        _write(Path(cfg.out), text)
    print(text, end="")
    if summary.failures:
        print(f"warning: {len(summary.failures)} samples not found within depth", file=sys.stderr)
    return EXIT_REFUTED if refuted else EXIT_OK


def stats_lines(tower: TowerResult) -> list[str]:
    p = tower.config.p
    top = max(lv.complex.dim for lv in tower.levels)
    head = ["level"] + [f"cells_{d}" for d in range(top + 1)] + ["total", "deck_order", "H1", f"dim_H1_mod_{p}"]
    out = []
    if tower.truncated:
        out.append(f"# truncated: {tower.message}")
    out.append("\t".join(head))
    order = 1
    for lv in tower.levels:
        if lv.group is not None:
            order *= lv.group.order
        C = lv.complex
        counts = [str(C.count(d)) if d <= C.dim else "0" for d in range(top + 1)]
        h1 = homology_group(C, 1) if C.dim >= 1 else None
        dim1 = cohomology_mod_p(C, 1, p).dimension if C.dim >= 1 else 0
        out.append("\t".join([str(lv.index)] + counts + [str(C.total_cells()), str(order), str(h1 or 0), str(dim1)]))
    return out


def cmd_stats(cfg: RunConfig) -> int:
    tower = make_tower(cfg, run_checks=False)
    text = "\n".join(stats_lines(tower)) + "\n"
    if cfg.out:
        _write(Path(cfg.out), text)
    print(text, end="")
    return EXIT_OK


def cmd_export(cfg: RunConfig) -> int:
    tower = make_tower(cfg)
    text = level_text(tower, tower.depth, cfg)
    if cfg.out:
        _write(Path(cfg.out), text)
    else:
        sys.stdout.write(text)
    return EXIT_BUDGET if tower.truncated else EXIT_OK


# --- entry point ---------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="branched-tower", description=__doc__)
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("input", nargs="?", help="artifact directory (verify)")
    ap.add_argument("--p", type=int, default=2)
    ap.add_argument("--K", default="const:1", help="const:c | arith:a,d | list:x,y+const:c")
    ap.add_argument("--L", default="simplex:2", help="simplex:m | boundary:m | two-triangles | FILE")
    ap.add_argument("--depth", type=int, default=1)
    ap.add_argument("--budget", type=int, default=DEFAULT_CELL_BUDGET)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out")
    ap.add_argument("--samples", type=int, default=50)
    ap.add_argument("--search-depth", type=int)
    ap.add_argument("--defer-checks", action="store_true")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(
        command=args.command,
        p=args.p,
        K_rule=args.K,
        L_source=args.L,
        depth=args.depth,
        budget=args.budget,
        seed=args.seed,
        out=args.out,
        samples=args.samples,
        search_depth=args.search_depth,
        defer_checks=args.defer_checks,
    )
    try:
        cfg.validate()
        if cfg.command == "build":
            return cmd_build(cfg)
        if cfg.command == "verify":
            return cmd_verify(cfg, args.input)
        if cfg.command == "certify":
            return cmd_certify(cfg)
        if cfg.command == "stats":
            return cmd_stats(cfg)
        return cmd_export(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StageCheckFailure as exc:
        print(f"stage-check failure: {exc}", file=sys.stderr)
        return EXIT_STAGE
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
