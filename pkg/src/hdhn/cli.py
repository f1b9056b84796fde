"""Command-line front end: compute metrics, reproduce the built-in figure
sweeps as CSV (optionally SVG), and run the cross-validation suite.

Exit codes: 0 success, 1 validation-suite failure, 2 bad input, 3 numeric
non-convergence.
"""

from __future__ import annotations

import argparse
import itertools
import math
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from . import montecarlo
from .analytic import (
    AnalyticDomainError,
    DegenerateNetworkError,
    association_probability,
    laplace_fd,
    laplace_hd,
    link_distance_pdf,
    optimal_fd_portions,
    stp,
    stp_alpha4,
    stp_general,
    stp_perfect_ic,
    throughput,
    throughput_closed,
)
from .model import (
    ConfigError,
    DuplexMode,
    HdhnConfig,
    LinkDirection,
    LinkQuery,
    TierParams,
    load_config,
    target_sirs,
    validate,
)
from .montecarlo import (
    ApproxMode,
    SimSettings,
    default_window_radius,
    estimate_laplace_sweep,
    estimate_stp,
    estimate_throughput,
)
from .specfun import ConvergenceError, SpecFunDomainError

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_BAD_INPUT = 2
EXIT_NUMERIC = 3

FIGURE_IDS = tuple(f"fig{i}" for i in range(2, 11))


@dataclass(frozen=True)
class SweepSpec:
    """One parameter sweep: which knob moves, on which tier, over which
    values, and which outputs are collected at each point."""

    target: str  # self_ic_db | density | fd_portion | density_ratio | power
    tier: int
    values: tuple[float, ...]
    outputs: frozenset[str]

    def __post_init__(self):
        if not self.values:
            raise ValueError("sweep requires at least one value")
        if any(not math.isfinite(v) and self.target != "self_ic_db"
               for v in self.values):
            raise ValueError("sweep values must be finite")


def apply_sweep_value(config: HdhnConfig, spec: SweepSpec,
                      value: float) -> HdhnConfig:
    """Return the config with one sweep point applied."""
    k = spec.tier
    if spec.target == "self_ic_db":
        return config.replace_tier(k, self_ic_db=value)
    if spec.target == "density":
        return config.replace_tier(k, density=value)
    if spec.target == "fd_portion":
        return config.replace_tier(k, fd_portion=value)
    if spec.target == "power":
        return config.replace_tier(k, user_power=value)
    if spec.target == "density_ratio":
        other = 1 - k  # ratio sweeps are defined for two-tier configs
        return config.replace_tier(
            k, density=value * config.tiers[other].density)
    raise ValueError(f"unknown sweep target {spec.target!r}")


def _fmt(x) -> str:
    """Full-precision, round-trippable float formatting."""
    return repr(float(x))


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(cell if isinstance(cell, str) else _fmt(cell)
                              for cell in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


# ----------------------------------------------------------------------
# Minimal SVG rendering (artifacts only; CSV is the contract)

def _svg_line_plot(path: Path, curves: dict[str, tuple[list, list]],
                   xlabel: str, ylabel: str, logx: bool = False) -> None:
    width, height, pad = 640, 440, 56
    pts = [(x, y) for xs, ys in curves.values() for x, y in zip(xs, ys)]
    xs_all = [math.log10(x) if logx else x for x, _ in pts]
    ys_all = [y for _, y in pts]
    x0, x1 = min(xs_all), max(xs_all)
    y0, y1 = min(ys_all), max(ys_all)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0

    def sx(x):
        v = math.log10(x) if logx else x
        return pad + (v - x0) / (x1 - x0) * (width - 2 * pad)

    def sy(y):
        return height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)

    palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
               "#8c564b", "#17becf", "#7f7f7f", "#bcbd22"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}">',
        f'<rect x="{pad}" y="{pad}" width="{width-2*pad}" '
        f'height="{height-2*pad}" fill="none" stroke="black"/>',
        f'<text x="{width/2}" y="{height-12}" text-anchor="middle" '
        f'font-size="13">{xlabel}</text>',
        f'<text x="16" y="{height/2}" font-size="13" '
        f'transform="rotate(-90 16 {height/2})" '
        f'text-anchor="middle">{ylabel}</text>',
    ]
    for i, (label, (xs, ys)) in enumerate(curves.items()):
        color = palette[i % len(palette)]
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
        parts.append(f'<polyline points="{coords}" fill="none" '
                     f'stroke="{color}" stroke-width="1.5"/>')
        parts.append(f'<text x="{width-pad+4}" y="{pad+14+i*16}" '
                     f'font-size="11" fill="{color}">{label}</text>')
    parts.append("</svg>")
    path.write_text("\n".join(parts), encoding="utf-8")


def _svg_grid_plot(path: Path, xs: list, ys: list, values: dict,
                   xlabel: str, ylabel: str) -> None:
    width, height, pad = 520, 480, 56
    vmin = min(values.values())
    vmax = max(values.values())
    span = (vmax - vmin) or 1.0
    cw = (width - 2 * pad) / len(xs)
    ch = (height - 2 * pad) / len(ys)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
             f'height="{height}">']
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            t = (values[(x, y)] - vmin) / span
            r, g, b = int(255 * t), int(64 + 80 * t), int(255 * (1 - t))
            parts.append(
                f'<rect x="{pad+i*cw:.1f}" y="{height-pad-(j+1)*ch:.1f}" '
                f'width="{cw:.1f}" height="{ch:.1f}" '
                f'fill="rgb({r},{g},{b})"/>')
    parts.append(f'<text x="{width/2}" y="{height-12}" text-anchor="middle" '
                 f'font-size="13">{xlabel}</text>')
    parts.append(f'<text x="16" y="{height/2}" font-size="13" '
                 f'transform="rotate(-90 16 {height/2})" '
                 f'text-anchor="middle">{ylabel}</text>')
    parts.append("</svg>")
    path.write_text("\n".join(parts), encoding="utf-8")


# ----------------------------------------------------------------------
# compute

def _parse_mode(text: str) -> DuplexMode:
    return DuplexMode.FD if text.lower() == "fd" else DuplexMode.HD


def _parse_direction(text: str) -> LinkDirection:
    return (LinkDirection.UPLINK if text.lower() == "uplink"
            else LinkDirection.DOWNLINK)


def cmd_compute(args) -> int:
    config = load_config(args.config)
    problems = validate(config)
    if problems:
        for p in problems:
            print(f"invalid config: {p}", file=sys.stderr)
        return EXIT_BAD_INPUT

    out = sys.stdout
    if args.metric in ("throughput", "cell_throughput"):
        report = throughput(config)
        header = ["quantity", "tier", "value"]
        rows = []
        if args.metric == "throughput":
            for k, s_k in enumerate(report.per_tier):
                rows.append(["tier_throughput", str(k), s_k])
            rows.append(["total_throughput", "", report.total])
        rows.append(["cell_throughput", "", report.per_cell])
        if args.simulate:
            sim = _sim_settings(args, config)
            header += ["sim_mean", "sim_stderr", "sim_n"]
            ests = estimate_throughput(config, sim, workers=args.workers)
            for row in rows:
                if row[0] == "tier_throughput":
                    e = ests[int(row[1])]
                    row += [e.mean, e.stderr, str(e.n)]
                elif row[0] == "total_throughput":
                    tot = sum(e.mean for e in ests)
                    err = math.sqrt(sum(e.stderr**2 for e in ests))
                    row += [tot, err, str(min(e.n for e in ests))]
                else:
                    tot = sum(e.mean for e in ests)
                    err = math.sqrt(sum(e.stderr**2 for e in ests))
                    dens = config.total_density
                    row += [tot / dens, err / dens, str(min(e.n for e in ests))]
        _print_csv(out, header, rows)
        return EXIT_OK

    if args.metric == "stp":
        theta_a, theta_u = target_sirs(config)
        direction = _parse_direction(args.direction)
        theta = args.theta if args.theta is not None else (
            theta_u if direction is LinkDirection.UPLINK else theta_a)
        query = LinkQuery(args.tier, _parse_mode(args.mode), direction, theta)
        result = stp(config, query)
        header = ["quantity", "tier", "mode", "direction", "theta", "value",
                  "method", "quadrature_error"]
        rows = [["stp", str(args.tier), args.mode, args.direction, theta,
                 result.value, result.method.value, result.quadrature_error]]
        if args.simulate:
            sim = _sim_settings(args, config)
            est = estimate_stp(config, query, sim, workers=args.workers)
            header += ["sim_mean", "sim_stderr", "sim_n"]
            rows[0] += [est.mean, est.stderr, str(est.n)]
        _print_csv(out, header, rows)
        return EXIT_OK

    if args.metric == "laplace":
        tier = config.tiers[args.tier]
        if args.s is None or args.d_min is None:
            print("laplace metric requires --s and --d-min", file=sys.stderr)
            return EXIT_BAD_INPUT
        fn = laplace_fd if args.mode.lower() == "fd" else laplace_hd
        value = fn(tier, args.s, args.d_min)
        header = ["quantity", "tier", "mode", "s", "d_min", "value"]
        rows = [["laplace", str(args.tier), args.mode, args.s, args.d_min,
                 value]]
        if args.simulate and args.mode.lower() == "fd":
            sim = _sim_settings(args, config, laplace_d_min=args.d_min)
            est = estimate_laplace_sweep(tier, [args.s], args.d_min,
                                         ApproxMode.COLLAPSED, sim,
                                         workers=args.workers)[0]
            header += ["sim_mean", "sim_stderr", "sim_n"]
            rows[0] += [est.mean, est.stderr, str(est.n)]
        _print_csv(out, header, rows)
        return EXIT_OK

    print(f"unknown metric {args.metric!r}", file=sys.stderr)
    return EXIT_BAD_INPUT


def _print_csv(out, header, rows):
    out.write(",".join(header) + "\n")
    for row in rows:
        out.write(",".join(cell if isinstance(cell, str) else _fmt(cell)
                           for cell in row) + "\n")


def _sim_settings(args, config: HdhnConfig,
                  laplace_d_min: float | None = None) -> SimSettings:
    if laplace_d_min is not None:
        alpha = min(t.pathloss_exp for t in config.tiers)
        window = laplace_d_min * 1e3 ** (1.0 / (alpha - 2.0))
    else:
        window = default_window_radius(config)
    return SimSettings(window_radius=window, realizations=args.realizations,
                       seed=args.seed)


# ----------------------------------------------------------------------
# figures

def _fig2(config, args, outdir):
    """Interference Laplace transform vs s for FD-cell densities and
    minimum interferer distances; optional paired simulation columns."""
    # Sweep where the transform stays estimable by sampling; deeper into
    # the tail config the sample mean of exp(-s I) degenerates.
    tier0 = config.tiers[0]
    s_values = [10 ** (2.0 + i / 3.0) for i in range(7)]
    files = []
    for lam_fd, d_min in ((1e-3, 10.0), (1e-3, 30.0), (1e-3, 50.0),
                          (2e-3, 30.0)):
        tier = replace(tier0, density=lam_fd, fd_portion=1.0)
        header = ["s", "laplace"]
        rows = [[s, laplace_fd(tier, s, d_min)] for s in s_values]
        if args.simulate:
            alpha = tier.pathloss_exp
            window = d_min * 1e3 ** (1.0 / (alpha - 2.0))
            sim = SimSettings(window_radius=window,
                              realizations=args.realizations, seed=args.seed)
            header += ["sim_mean", "sim_stderr", "sim_exact_mean",
                       "sim_exact_stderr"]
            col = estimate_laplace_sweep(tier, s_values, d_min,
                                         ApproxMode.COLLAPSED, sim,
                                         workers=args.workers)
            exact = estimate_laplace_sweep(tier, s_values, d_min,
                                           ApproxMode.EXACT, sim,
                                           workers=args.workers)
            for row, ec, ee in zip(rows, col, exact):
                row += [ec.mean, ec.stderr, ee.mean, ee.stderr]
        name = f"fig2_lamfd{lam_fd:g}_dmin{int(d_min)}.csv"
        _write_csv(outdir / name, header, rows)
        files.append((name, header, rows))
    if args.svg:
        curves = {f"{name.split('.')[0]}": ([r[0] for r in rows],
                                            [r[1] for r in rows])
                  for name, _, rows in files}
        _svg_line_plot(outdir / "fig2.svg", curves, "s", "laplace", logx=True)
    return [name for name, _, _ in files]


_FIG3_LAM2 = (0.0, 5e-4, 1e-3, 2e-3, 5e-3, 1e-2)


def _fig3_like(config, args, outdir, fig_name, ap_power1):
    """Tier-0 throughput vs its self-IC level, FD against HD, for a range
    of tier-1 densities."""
    config = config.replace_tier(0, ap_power=ap_power1)
    betas = [-50.0 + 2.5 * i for i in range(21)]
    files = []
    for lam2 in _FIG3_LAM2:
        c_lam = config.replace_tier(1, density=lam2)
        spec = SweepSpec("self_ic_db", 0, tuple(betas),
                         frozenset({"throughput"}))
        header = ["self_ic_db", "s1"]
        rows = []
        sims = []
        for beta in spec.values:
            c = apply_sweep_value(c_lam, spec, beta).replace_tier(
                0, fd_portion=1.0)
            rows.append([beta, throughput(c).per_tier[0]])
            if args.simulate:
                sim = SimSettings(window_radius=default_window_radius(c),
                                  realizations=args.realizations,
                                  seed=args.seed)
                sims.append(estimate_throughput(c, sim,
                                                workers=args.workers)[0])
        if args.simulate:
            header += ["sim_mean", "sim_stderr", "sim_n"]
            for row, e in zip(rows, sims):
                row += [e.mean, e.stderr, str(e.n)]
        name = f"{fig_name}_fd_lam2_{lam2:g}.csv"
        _write_csv(outdir / name, header, rows)
        files.append(name)
        # HD reference for this tier-1 density.
        c_hd = c_lam.replace_tier(0, fd_portion=0.0)
        s_hd = throughput(c_hd).per_tier[0]
        name = f"{fig_name}_hd_lam2_{lam2:g}.csv"
        _write_csv(outdir / name, ["self_ic_db", "s1"],
                   [[b, s_hd] for b in betas])
        files.append(name)
    if args.svg:
        curves = {}
        for name in files:
            if "_fd_" not in name:
                continue
            rows = (outdir / name).read_text().splitlines()[1:]
            xs = [float(r.split(",")[0]) for r in rows]
            ys = [float(r.split(",")[1]) for r in rows]
            curves[name.split(".")[0]] = (xs, ys)
        _svg_line_plot(outdir / f"{fig_name}.svg", curves, "self-IC [dB]",
                       "tier-0 throughput")
    return files


def _fig5(config, args, outdir):
    """Tier-0 throughput relative to its all-HD value as the tier-0 FD
    portion grows, for several density ratios."""
    deltas = [round(0.05 * i, 2) for i in range(21)]
    files = []
    cases = ([("lam2_over_lam1", r) for r in (4.0, 2.0, 1.0, 0.5, 0.1)]
             + [("lam1_over_lam2", r) for r in (4.0, 2.0, 0.5, 0.1)])
    for label, ratio in cases:
        if label == "lam2_over_lam1":
            c = config.replace_tier(0, density=1e-3).replace_tier(
                1, density=ratio * 1e-3)
        else:
            c = config.replace_tier(1, density=1e-3).replace_tier(
                0, density=ratio * 1e-3)
        base = throughput(c.replace_tier(0, fd_portion=0.0)).per_tier[0]
        rows = [[d, throughput(c.replace_tier(0, fd_portion=d)).per_tier[0]
                 / base] for d in deltas]
        name = f"fig5_{label}_{ratio:g}.csv"
        _write_csv(outdir / name, ["delta1", "s1_over_s1_hd"], rows)
        files.append(name)
    return files


def _fig6(config, args, outdir):
    """Tier-0 throughput vs the density ratio for user powers and self-IC
    levels, FD against HD."""
    ratios = (0.1, 0.2, 0.5, 1.0, 2.0, 4.0, 8.0)
    files = []
    spec = SweepSpec("density_ratio", 0, ratios, frozenset({"throughput"}))
    for beta in (-math.inf, -30.0):
        for p_user in (3.0, 15.0, 30.0):
            c0 = config.replace_tier(0, user_power=p_user, self_ic_db=beta,
                                     fd_portion=1.0).replace_tier(
                                         1, density=1e-3)
            rows = [[r, throughput(apply_sweep_value(c0, spec, r)).per_tier[0]]
                    for r in ratios]
            beta_tag = "inf" if beta == -math.inf else f"{abs(beta):g}"
            name = f"fig6_fd_pu{p_user:g}_beta{beta_tag}.csv"
            _write_csv(outdir / name, ["lam1_over_lam2", "s1"], rows)
            files.append(name)
    c_hd = config.replace_tier(0, fd_portion=0.0).replace_tier(1, density=1e-3)
    rows = [[r, throughput(apply_sweep_value(c_hd, spec, r)).per_tier[0]]
            for r in ratios]
    _write_csv(outdir / "fig6_hd.csv", ["lam1_over_lam2", "s1"], rows)
    files.append("fig6_hd.csv")
    return files


_DUPLEX_SETS = ((0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0))


def _set_tag(deltas) -> str:
    return "_".join("fd" if d == 1.0 else "hd" for d in deltas)


def _fig7(config, args, outdir):
    """Per-cell throughput vs the tier-1/tier-0 density ratio for the four
    all-or-nothing duplex assignments, plus the best assignment per point."""
    ratios = (0.1, 0.2, 0.5, 1.0, 2.0, 4.0, 10.0)
    files = []
    best_rows = []
    by_set = {}
    for deltas in _DUPLEX_SETS:
        c0 = config.with_fd_portions(deltas).replace_tier(0, density=1e-3)
        spec = SweepSpec("density_ratio", 1, ratios,
                         frozenset({"cell_throughput"}))
        rows = [[r, throughput(apply_sweep_value(c0, spec, r)).per_cell]
                for r in ratios]
        name = f"fig7_{_set_tag(deltas)}.csv"
        _write_csv(outdir / name, ["lam2_over_lam1", "s_cell"], rows)
        files.append(name)
        by_set[deltas] = rows
    for i, r in enumerate(ratios):
        best = max(_DUPLEX_SETS, key=lambda d: by_set[d][i][1])
        best_rows.append([r, _set_tag(best), by_set[best][i][1]])
    _write_csv(outdir / "fig7_best.csv",
               ["lam2_over_lam1", "best_set", "s_cell"], best_rows)
    files.append("fig7_best.csv")
    return files


def _fig8(config, args, outdir):
    """Total throughput over the (FD portion tier 0, FD portion tier 1)
    grid with the located maximum and minimum."""
    step = args.grid_step
    n = int(math.floor(1.0 / step + 1e-9))
    values = [round(i * step, 12) for i in range(n + 1)]
    if values[-1] < 1.0 - 1e-12:
        values.append(1.0)
    grid_rows = []
    table = {}
    for d1, d2 in itertools.product(values, values):
        s = throughput(config.with_fd_portions((d1, d2))).total
        grid_rows.append([d1, d2, s])
        table[(d1, d2)] = s
    _write_csv(outdir / "fig8_grid.csv", ["delta1", "delta2", "s_total"],
               grid_rows)
    best = max(table, key=table.get)
    worst = min(table, key=table.get)
    _write_csv(outdir / "fig8_extrema.csv",
               ["kind", "delta1", "delta2", "s_total"],
               [["max", best[0], best[1], table[best]],
                ["min", worst[0], worst[1], table[worst]]])
    if args.svg:
        _svg_grid_plot(outdir / "fig8.svg", values, values, table,
                       "delta1", "delta2")
    return ["fig8_grid.csv", "fig8_extrema.csv"]


def _fig9(config, args, outdir):
    """Three-tier variant of the FD-portion grid: a third tier is added
    and the throughput is tabulated over (delta1, delta2) slices for a
    few delta3 values, with the located maximum."""
    tier3 = TierParams(density=5e-4, pathloss_exp=4.0, bias=1.0,
                       ap_power=15.0, user_power=3.0, fd_portion=0.0,
                       self_ic_db=-20.0)
    c3 = HdhnConfig(list(config.tiers) + [tier3], config.rate_ap,
                    config.rate_user, config.bandwidth, config.symbol_time)
    step = args.grid_step
    n = int(math.floor(1.0 / step + 1e-9))
    values = [round(i * step, 12) for i in range(n + 1)]
    if values[-1] < 1.0 - 1e-12:
        values.append(1.0)
    slices = (0.0, 0.25, 0.5, 0.75, 1.0)
    rows = []
    best = None
    for d3 in slices:
        for d1, d2 in itertools.product(values, values):
            s = throughput(c3.with_fd_portions((d1, d2, d3))).total
            rows.append([d1, d2, d3, s])
            if best is None or s > best[3]:
                best = [d1, d2, d3, s]
    _write_csv(outdir / "fig9_grid.csv",
               ["delta1", "delta2", "delta3", "s_total"], rows)
    deltas, value = optimal_fd_portions(c3, grid_step=step)
    _write_csv(outdir / "fig9_extrema.csv",
               ["kind", "delta1", "delta2", "delta3", "s_total"],
               [["max_slices", best[0], best[1], best[2], best[3]],
                ["max_full_grid", deltas[0], deltas[1], deltas[2], value]])
    return ["fig9_grid.csv", "fig9_extrema.csv"]


def _fig10(config, args, outdir):
    """Per-cell throughput vs the tier-0/tier-1 density ratio at two total
    densities for the four all-or-nothing duplex assignments."""
    ratios = (0.2, 0.5, 1.0, 2.0, 5.0)
    files = []
    for lam_t in (2e-3, 1e-2):
        by_set = {}
        for deltas in _DUPLEX_SETS:
            rows = []
            for r in ratios:
                lam2 = lam_t / (1.0 + r)
                lam1 = lam_t - lam2
                c = config.with_fd_portions(deltas).replace_tier(
                    0, density=lam1).replace_tier(1, density=lam2)
                rows.append([r, throughput(c).per_cell])
            name = f"fig10_lamt{lam_t:g}_{_set_tag(deltas)}.csv"
            _write_csv(outdir / name, ["lam1_over_lam2", "s_cell"], rows)
            files.append(name)
            by_set[deltas] = rows
        best_rows = []
        for i, r in enumerate(ratios):
            best = max(_DUPLEX_SETS, key=lambda d: by_set[d][i][1])
            best_rows.append([r, _set_tag(best), by_set[best][i][1]])
        name = f"fig10_lamt{lam_t:g}_best.csv"
        _write_csv(outdir / name, ["lam1_over_lam2", "best_set", "s_cell"],
                   best_rows)
        files.append(name)
    return files


def cmd_figure(args) -> int:
    config = load_config(args.config)
    problems = validate(config)
    if problems:
        for p in problems:
            print(f"invalid config: {p}", file=sys.stderr)
        return EXIT_BAD_INPUT
    if config.num_tiers < 2:
        print("figure sweeps require a two-tier config", file=sys.stderr)
        return EXIT_BAD_INPUT
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    dispatch = {
        "fig2": _fig2,
        "fig3": lambda c, a, o: _fig3_like(c, a, o, "fig3",
                                           c.tiers[0].ap_power),
        "fig4": lambda c, a, o: _fig3_like(c, a, o, "fig4", 9.0),
        "fig5": _fig5,
        "fig6": _fig6,
        "fig7": _fig7,
        "fig8": _fig8,
        "fig9": _fig9,
        "fig10": _fig10,
    }
    files = dispatch[args.figure](config, args, outdir)
    for name in files:
        print(outdir / name)
    return EXIT_OK


# ----------------------------------------------------------------------
# validate

def _check_grid_configs(base: HdhnConfig, *, alpha: float | None,
                        perfect_ic: bool, count: int):
    """Deterministic parameter grid for the closed-form cross checks."""
    lam1s = (5e-4, 1e-3, 2e-3)
    lam2s = (1e-3, 5e-3)
    deltas = ((1.0, 0.0), (0.6, 0.3))
    betas = (-40.0, -20.0) if not perfect_ic else (-math.inf,)
    alphas = (alpha,) if alpha is not None else (3.0, 3.5, 4.5)
    biases = (1.0, 3.0)
    out = []
    combos = itertools.product(lam1s, lam2s, deltas, betas, alphas, biases)
    for lam1, lam2, (d1, d2), beta, a, b2 in combos:
        cfg = (base.replace_tier(0, density=lam1, fd_portion=d1,
                                 self_ic_db=beta, pathloss_exp=a)
               .replace_tier(1, density=lam2, fd_portion=d2,
                             self_ic_db=beta, pathloss_exp=a, bias=b2))
        out.append(cfg)
        if len(out) == count:
            break
    return out


def _closed_form_check(*, alpha4: bool, count: int, tol: float):
    from .model import default_two_tier_config

    configs = _check_grid_configs(default_two_tier_config(),
                                  alpha=4.0 if alpha4 else None,
                                  perfect_ic=not alpha4, count=count)
    worst = 0.0
    for i, cfg in enumerate(configs):
        theta = 1.0 + 0.5 * (i % 3)
        direction = (LinkDirection.UPLINK if i % 2 else LinkDirection.DOWNLINK)
        query = LinkQuery(i % 2, DuplexMode.FD, direction, theta)
        general = stp_general(cfg, query).value
        closed = (stp_alpha4(cfg, query) if alpha4
                  else stp_perfect_ic(cfg, query)).value
        worst = max(worst, abs(general - closed) / closed)
    return worst <= tol, f"worst relative gap {worst:.3e} (tol {tol:g})"


def run_validation(config: HdhnConfig, quick: bool, tol_scale: float,
                   seed: int, workers: int):
    """Cross-check suite; returns (name, passed, detail) tuples.

    The checks run on pinned canonical parameter sets (the fixed-seed
    statistical bars are calibrated for them); the caller's config is
    validated for well-formedness before this runs.
    """
    from .model import default_two_tier_config
    from .specfun import integral_i0, upper_inc_gamma, erfcx as sf_erfcx

    checks = []

    def check(name):
        def wrap(fn):
            checks.append((name, fn))
            return fn
        return wrap

    @check("special_function_identities")
    def _():
        tol = 1e-10 * tol_scale
        ok = abs(integral_i0(1.0, 1.0, 4.0).value - math.pi / 8) <= tol
        ok &= abs(upper_inc_gamma(1.0, 1.0).value - math.exp(-1)) <= tol
        for s in (-0.5, -0.2, 0.7):
            for x in (0.3, 2.0, 9.0):
                lhs = upper_inc_gamma(s + 1.0, x).value
                rhs = s * upper_inc_gamma(s, x).value + x**s * math.exp(-x)
                ok &= abs(lhs - rhs) <= 1e-10 * tol_scale * max(1.0, abs(lhs))
        from scipy.special import erfc
        for x in (0.0, 0.5, 2.0, 5.0):
            ok &= (abs(sf_erfcx(x).value * math.exp(-x * x) - erfc(x))
                   <= 1e-12 * tol_scale)
        return ok, "incomplete-gamma recurrence, erfcx, arctan reduction"

    @check("alpha4_closed_form_vs_quadrature")
    def _():
        return _closed_form_check(alpha4=True, count=10 if quick else 50,
                                  tol=1e-6 * tol_scale)

    @check("perfect_ic_closed_form_vs_quadrature")
    def _():
        return _closed_form_check(alpha4=False, count=10 if quick else 50,
                                  tol=1e-6 * tol_scale)

    @check("hd_mode_reduction")
    def _():
        base = default_two_tier_config().replace_tier(0, fd_portion=0.5)
        worst = 0.0
        for theta in (0.5, 1.0, 4.0):
            hd = stp_general(base, LinkQuery(0, DuplexMode.HD,
                                             LinkDirection.DOWNLINK,
                                             theta)).value
            fd = stp_general(
                base.replace_tier(0, self_ic_db=-math.inf),
                LinkQuery(0, DuplexMode.FD, LinkDirection.DOWNLINK,
                          theta)).value
            worst = max(worst, abs(hd - fd) / hd)
        return worst <= 1e-8 * tol_scale, f"worst gap {worst:.2e}"

    @check("bias_scaling_invariance")
    def _():
        base = default_two_tier_config().replace_tier(1, bias=2.5)
        scaled = HdhnConfig(
            [replace(t, bias=t.bias * 7.3) for t in base.tiers],
            base.rate_ap, base.rate_user, base.bandwidth, base.symbol_time)
        q = LinkQuery(0, DuplexMode.FD, LinkDirection.DOWNLINK, 1.0)
        a = stp(base, q).value
        b = stp(scaled, q).value
        t_gap = abs(throughput(base).total - throughput(scaled).total)
        ok = (abs(a - b) <= 1e-12 * tol_scale * a
              and t_gap <= 1e-12 * tol_scale * throughput(base).total)
        return ok, f"stp gap {abs(a-b):.2e}, throughput gap {t_gap:.2e}"

    @check("power_scaling_invariance")
    def _():
        base = default_two_tier_config()
        scaled = HdhnConfig(
            [replace(t, ap_power=t.ap_power * 4.2,
                     user_power=t.user_power * 4.2) for t in base.tiers],
            base.rate_ap, base.rate_user, base.bandwidth, base.symbol_time)
        q = LinkQuery(0, DuplexMode.FD, LinkDirection.UPLINK, 1.0)
        a = stp(base, q).value
        b = stp(scaled, q).value
        return abs(a - b) <= 1e-9 * tol_scale * a, f"stp gap {abs(a-b):.2e}"

    @check("association_and_distance_normalization")
    def _():
        from scipy.integrate import quad
        mixed = HdhnConfig([
            TierParams(1e-3, 4.0, 1.0, 30.0, 3.0, 0.4, -40.0),
            TierParams(1e-3, 3.5, 2.0, 30.0, 6.0, 0.2, -30.0),
        ])
        total = sum(association_probability(mixed, k, m)
                    for k in range(2) for m in (DuplexMode.HD, DuplexMode.FD))
        pdf_mass = quad(lambda x: link_distance_pdf(mixed, 0, x),
                        0, 2000, limit=300)[0]
        ok = abs(total - 1.0) <= 1e-8 * tol_scale
        ok &= abs(pdf_mass - 1.0) <= 1e-8 * tol_scale
        return ok, f"sum {total:.12f}, pdf mass {pdf_mass:.12f}"

    @check("laplace_properties")
    def _():
        tier = default_two_tier_config().tiers[0]
        ok = laplace_fd(tier, 0.0, 30.0) == 1.0
        ok &= laplace_hd(tier, 1e3, 30.0) == 1.0  # fd_portion=1: no HD cells
        prev = 1.0
        for s in (1e2, 1e3, 1e4, 1e5):
            v = laplace_fd(tier, s, 30.0)
            ok &= 0.0 < v <= prev
            prev = v
        dense = replace(tier, density=2e-3)
        ok &= laplace_fd(dense, 1e3, 30.0) < laplace_fd(tier, 1e3, 30.0)
        return ok, "value 1 at s=0, in (0,1], decreasing in s and density"

    @check("throughput_identities")
    def _():
        base = default_two_tier_config()
        rep = throughput(base)
        closed = throughput_closed(base)
        ok = abs(rep.total - sum(rep.per_tier)) <= 1e-15
        ok &= abs(rep.per_cell - rep.total / base.total_density) <= 1e-18
        gap = abs(rep.total - closed.total) / closed.total
        ok &= gap <= 1e-6 * tol_scale
        hd = base.replace_tier(0, fd_portion=0.0)
        s1a = throughput(hd).per_tier[0]
        s1b = throughput(hd.replace_tier(1, density=5e-3)).per_tier[0]
        ok &= abs(s1a - s1b) <= 1e-9 * tol_scale * s1a
        return ok, f"closed-vs-quadrature gap {gap:.2e}"

    @check("monte_carlo_stp")
    def _():
        single = HdhnConfig([TierParams(1e-3, 4.0, 1.0, 30.0, 30.0)])
        sim = SimSettings(window_radius=default_window_radius(single),
                          realizations=3000 if quick else 20000, seed=seed)
        est = estimate_stp(single, LinkQuery(0, DuplexMode.HD,
                                             LinkDirection.DOWNLINK, 1.0),
                           sim, workers=workers)
        ref = 1.0 / (1.0 + math.pi / 4.0)
        z = (est.mean - ref) / est.stderr
        return abs(z) <= 3.0, f"z = {z:+.2f} over n = {est.n}"

    if not quick:
        @check("laplace_monte_carlo")
        def _():
            tier = replace(default_two_tier_config().tiers[0], fd_portion=1.0)
            svals = (1e2, 1e3, 1e4)
            worst = 0.0
            for lam in (1e-3, 2e-3):
                t = replace(tier, density=lam)
                sim = SimSettings(window_radius=30.0 * 1e3**0.5,
                                  realizations=3000, seed=seed)
                ests = estimate_laplace_sweep(t, svals, 30.0,
                                              ApproxMode.COLLAPSED, sim,
                                              workers=workers)
                for s, e in zip(svals, ests):
                    z = abs(e.mean - laplace_fd(t, s, 30.0)) / e.stderr
                    worst = max(worst, z)
            return worst <= 3.0, f"worst |z| = {worst:.2f}"

        @check("throughput_monte_carlo")
        def _():
            base = default_two_tier_config()
            worst = 0.0
            for beta, lam2 in ((-50.0, 1e-3), (-10.0, 1e-3), (-50.0, 1e-2)):
                c = base.replace_tier(0, self_ic_db=beta).replace_tier(
                    1, density=lam2)
                sim = SimSettings(window_radius=default_window_radius(c),
                                  realizations=3000, seed=seed)
                est = estimate_throughput(c, sim, workers=workers)[0]
                z = abs(est.mean - throughput(c).per_tier[0]) / est.stderr
                worst = max(worst, z)
            return worst <= 3.0, f"worst |z| = {worst:.2f}"

        @check("association_frequencies")
        def _():
            mixed = HdhnConfig([
                TierParams(1e-3, 4.0, 1.0, 30.0, 3.0, 0.4, -40.0),
                TierParams(1e-3, 3.5, 1.0, 30.0, 6.0, 0.2, -30.0),
            ])
            sampler = montecarlo.LinkDistanceSampler(mixed)
            n = 4000
            counts = {}
            for i in range(n):
                real = montecarlo.sample_realization(mixed, 300.0, seed, i,
                                                     sampler)
                a = montecarlo.associate(real, mixed)
                counts[(a.tier, a.mode)] = counts.get((a.tier, a.mode), 0) + 1
            worst = 0.0
            for k in range(2):
                for m in (DuplexMode.HD, DuplexMode.FD):
                    p = association_probability(mixed, k, m)
                    p_hat = counts.get((k, m), 0) / n
                    z = abs(p_hat - p) / math.sqrt(p * (1 - p) / n)
                    worst = max(worst, z)
            return worst <= 3.0, f"worst |z| = {worst:.2f}"

        @check("optimizer_facts")
        def _():
            ic = HdhnConfig([
                TierParams(1e-3, 4.0, 1.0, 30.0, 3.0, 0.0, -math.inf),
                TierParams(2e-3, 4.0, 1.0, 30.0, 6.0, 0.0, -math.inf),
            ])
            d_ic, _v = optimal_fd_portions(ic, 0.25)
            d_t2, _v = optimal_fd_portions(default_two_tier_config(), 0.25)
            ok = d_ic == [1.0, 1.0] and d_t2 == [1.0, 0.0]
            return ok, f"perfect-IC argmax {d_ic}, default argmax {d_t2}"

        @check("edge_effect_bound")
        def _():
            single = HdhnConfig([TierParams(1e-3, 4.0, 1.0, 30.0, 30.0)])
            q = LinkQuery(0, DuplexMode.HD, LinkDirection.DOWNLINK, 1.0)
            r0 = default_window_radius(single)
            e1 = estimate_stp(single, q,
                              SimSettings(r0, 4000, seed), workers=workers)
            e2 = estimate_stp(single, q,
                              SimSettings(2.0 * r0, 4000, seed),
                              workers=workers)
            gap = abs(e1.mean - e2.mean)
            return gap <= max(e1.stderr, e2.stderr), (
                f"gap {gap:.4f} vs stderr {max(e1.stderr, e2.stderr):.4f}")

    results = []
    for name, fn in checks:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashed check is a failed check
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        results.append((name, ok, detail))
    return results


def cmd_validate(args) -> int:
    config = load_config(args.config)
    problems = validate(config)
    if problems:
        for p in problems:
            print(f"invalid config: {p}", file=sys.stderr)
        return EXIT_BAD_INPUT
    results = run_validation(config, quick=args.quick, tol_scale=args.tol,
                             seed=args.seed, workers=args.workers)
    width = max(len(name) for name, _, _ in results)
    failed = 0
    for name, ok, detail in results:
        status = "PASS" if ok else "FAIL"
        print(f"{name:<{width}}  {status}  {detail}")
        failed += 0 if ok else 1
    print(f"{failed} of {len(results)} checks failed"
          if failed else f"all {len(results)} checks passed")
    return EXIT_CHECK_FAILED if failed else EXIT_OK


# ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hdhn",
        description="Hybrid full-/half-duplex heterogeneous network "
                    "throughput: closed forms, Monte Carlo, figure sweeps.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", help="print analytic metrics as CSV")
    p.add_argument("config")
    p.add_argument("--metric", required=True,
                   choices=["stp", "throughput", "cell_throughput", "laplace"])
    p.add_argument("--tier", type=int, default=0)
    p.add_argument("--mode", default="fd", choices=["fd", "hd"])
    p.add_argument("--direction", default="downlink",
                   choices=["downlink", "uplink"])
    p.add_argument("--theta", type=float, default=None,
                   help="target SIR (default: derived from the config rates)")
    p.add_argument("--s", type=float, default=None,
                   help="Laplace transform argument")
    p.add_argument("--d-min", type=float, default=None,
                   help="minimum interferer distance for the Laplace metric")
    p.add_argument("--simulate", action="store_true")
    p.add_argument("--realizations", type=int, default=4000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(fn=cmd_compute)

    p = sub.add_parser("figure", help="write figure-sweep CSVs (and SVGs)")
    p.add_argument("figure", choices=list(FIGURE_IDS))
    p.add_argument("config")
    p.add_argument("--out", default="figures")
    p.add_argument("--simulate", action="store_true")
    p.add_argument("--realizations", type=int, default=3000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--grid-step", type=float, default=0.05)
    p.add_argument("--svg", action="store_true")
    p.set_defaults(fn=cmd_figure)

    p = sub.add_parser("validate", help="run the cross-validation suite")
    p.add_argument("config")
    p.add_argument("--quick", action="store_true")
    p.add_argument("--tol", type=float, default=1.0,
                   help="scale factor on the deterministic tolerances")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(fn=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except (DegenerateNetworkError, AnalyticDomainError,
            SpecFunDomainError, ValueError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except ConvergenceError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
